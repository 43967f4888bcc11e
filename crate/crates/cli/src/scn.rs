//! Scenario files: one TOML document per experiment.
//!
//! Top-level keys mirror [`Scenario`] fields. The `attack`, `schedule`, and
//! `delay` sections pick their variant through a `kind` key; `graph` is
//! either inline (`n` plus `edges`) or a `path` to a graph file, resolved
//! relative to the scenario file. Unknown keys anywhere are errors.
//!
//! ```toml
//! initial_states = [1, 10, 1, 10, 1, 10, 1]
//! f = 1
//! fault_mode = "total"
//! malicious = [1]
//! quantizer = "probabilistic"
//! horizon = 500
//! seed = 7
//!
//! [graph]
//! path = "../graphs/seven_node.graph"
//!
//! [attack]
//! kind = "alternating"
//! even = 1
//! odd = 10
//!
//! [schedule]
//! kind = "synchronous"
//! ```
//!
//! Omitting `delay` means instantaneous links; omitting `horizon` keeps the
//! engine default; omitting `attack` is allowed only when `malicious` is
//! empty. Delay tables list one `[sender, receiver, even, odd]` row per
//! edge, giving the delay at even and odd send times.

use std::fmt;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Deserialize;

use qwmsr::schedule::UpdateProb;
use qwmsr::{
    AdversaryStrategy, DelayModel, DirectedGraph, FaultMode, Placement, QuantizerKind, Scenario,
    Schedule,
};

/// Malformed documents and well-formed documents describing an impossible
/// scenario map to different exit codes, so they stay distinct here.
#[derive(Debug)]
pub enum ScnError {
    Parse(String),
    Invalid(qwmsr::Error),
}

impl fmt::Display for ScnError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Parse(msg) => write!(f, "{msg}"),
            Self::Invalid(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for ScnError {}

pub type Result<T> = std::result::Result<T, ScnError>;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    initial_states: Vec<i64>,
    f: usize,
    fault_mode: FaultMode,
    #[serde(default)]
    malicious: Vec<usize>,
    quantizer: QuantizerKind,
    horizon: Option<usize>,
    seed: u64,
    graph: GraphSection,
    attack: Option<toml::Table>,
    schedule: toml::Table,
    delay: Option<toml::Table>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphSection {
    n: Option<usize>,
    edges: Option<Vec<(usize, usize)>>,
    path: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NoFields {}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstantAttack {
    value: i64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AlternatingAttack {
    even: i64,
    odd: i64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct IndexAlternatingAttack {
    offset: i64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScriptedAttack {
    values: Vec<i64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DeterministicSchedule {
    table: Vec<Vec<usize>>,
    coverage_bound: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProbabilisticSchedule {
    p: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstantDelay {
    tau: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TableDelay {
    bound: usize,
    entries: Vec<(usize, usize, usize, usize)>,
}

fn take_kind(table: &mut toml::Table, section: &str) -> Result<String> {
    match table.remove("kind") {
        Some(toml::Value::String(s)) => Ok(s),
        Some(v) => Err(ScnError::Parse(format!(
            "{section}.kind: expected a string, found {}",
            v.type_str()
        ))),
        None => Err(ScnError::Parse(format!("{section}: missing `kind`"))),
    }
}

fn fields<T: DeserializeOwned>(table: toml::Table, section: &str) -> Result<T> {
    toml::Value::Table(table)
        .try_into()
        .map_err(|e| ScnError::Parse(format!("{section}: {e}")))
}

fn attack(mut table: toml::Table) -> Result<AdversaryStrategy> {
    match take_kind(&mut table, "attack")?.as_str() {
        "constant" => fields(table, "attack")
            .map(|ConstantAttack { value }| AdversaryStrategy::Constant { value }),
        "alternating" => fields(table, "attack")
            .map(|AlternatingAttack { even, odd }| AdversaryStrategy::Alternating { even, odd }),
        "index_alternating" => fields(table, "attack").map(|IndexAlternatingAttack { offset }| {
            AdversaryStrategy::IndexAlternating { offset }
        }),
        "scripted" => fields(table, "attack")
            .map(|ScriptedAttack { values }| AdversaryStrategy::Scripted { values }),
        other => Err(ScnError::Parse(format!("attack.kind: unknown kind `{other}`"))),
    }
}

fn schedule(mut table: toml::Table) -> Result<Schedule> {
    match take_kind(&mut table, "schedule")?.as_str() {
        "synchronous" => fields::<NoFields>(table, "schedule").map(|_| Schedule::Synchronous),
        "deterministic" => {
            let DeterministicSchedule { table: rows, coverage_bound } =
                fields(table, "schedule")?;
            let rows = rows.into_iter().map(|row| row.into_iter().collect()).collect();
            Schedule::deterministic(rows, coverage_bound).map_err(ScnError::Invalid)
        }
        "probabilistic" => {
            let ProbabilisticSchedule { p } = fields(table, "schedule")?;
            Schedule::probabilistic(p).map_err(ScnError::Invalid)
        }
        other => Err(ScnError::Parse(format!("schedule.kind: unknown kind `{other}`"))),
    }
}

fn delay(mut table: toml::Table) -> Result<DelayModel> {
    match take_kind(&mut table, "delay")?.as_str() {
        "none" => fields::<NoFields>(table, "delay").map(|_| DelayModel::None),
        "constant" => {
            fields(table, "delay").map(|ConstantDelay { tau }| DelayModel::constant(tau))
        }
        "table" => {
            let TableDelay { bound, entries } = fields(table, "delay")?;
            let entries = entries.into_iter().map(|(j, i, even, odd)| ((j, i), (even, odd)));
            DelayModel::table(bound, entries).map_err(ScnError::Invalid)
        }
        other => Err(ScnError::Parse(format!("delay.kind: unknown kind `{other}`"))),
    }
}

fn graph(section: GraphSection, base: &Path) -> Result<DirectedGraph> {
    match section {
        GraphSection { path: Some(p), n: None, edges: None } => {
            let full = base.join(&p);
            let text = fs::read_to_string(&full)
                .map_err(|e| ScnError::Parse(format!("graph.path {}: {e}", full.display())))?;
            DirectedGraph::parse(&text).map_err(ScnError::Invalid)
        }
        GraphSection { path: None, n: Some(n), edges: Some(edges) } => {
            DirectedGraph::from_edges(n, edges).map_err(ScnError::Invalid)
        }
        _ => Err(ScnError::Parse(
            "graph: give either `path`, or `n` together with `edges`".into(),
        )),
    }
}

/// Reads and fully validates a scenario file.
pub fn parse_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)
        .map_err(|e| ScnError::Parse(format!("{}: {e}", path.display())))?;
    scenario_from_str(&text, path.parent().unwrap_or(Path::new(".")))
}

/// Parses scenario text; `base` anchors a relative `graph.path`.
pub fn scenario_from_str(text: &str, base: &Path) -> Result<Scenario> {
    let file: ScenarioFile = toml::from_str(text).map_err(|e| ScnError::Parse(e.to_string()))?;
    let graph = graph(file.graph, base)?;
    let strategy = match file.attack {
        Some(table) => attack(table)?,
        None if file.malicious.is_empty() => AdversaryStrategy::Constant { value: 0 },
        None => {
            return Err(ScnError::Parse(
                "attack: section required when `malicious` is nonempty".into(),
            ))
        }
    };
    let schedule = schedule(file.schedule)?;
    let delay = match file.delay {
        Some(table) => delay(table)?,
        None => DelayModel::None,
    };
    let scenario = Scenario {
        graph,
        placement: Placement::new(file.malicious, file.f, file.fault_mode),
        strategy,
        schedule,
        delay,
        quantizer: file.quantizer,
        x0: file.initial_states,
        horizon: file.horizon,
        seed: file.seed,
    };
    scenario.validate().map_err(ScnError::Invalid)?;
    Ok(scenario)
}

fn invalid(msg: &str) -> ScnError {
    ScnError::Invalid(qwmsr::Error::Config(msg.into()))
}

/// Renders a scenario back into file form with the graph inlined.
///
/// Parsing the result yields an identical `Scenario`, provided the graph
/// carries the default weight floor (file-borne graphs always do) and the
/// schedule and delay have a file representation — per-agent update
/// probabilities and scripted delays do not.
pub fn to_toml(s: &Scenario) -> Result<String> {
    use toml::{Table, Value};

    fn ints(values: impl IntoIterator<Item = i64>) -> Value {
        Value::Array(values.into_iter().map(Value::Integer).collect())
    }

    let mut doc = Table::new();
    doc.insert("initial_states".into(), ints(s.x0.iter().copied()));
    doc.insert("f".into(), Value::Integer(s.placement.f as i64));
    let mode = match s.placement.mode {
        FaultMode::Total => "total",
        FaultMode::Local => "local",
    };
    doc.insert("fault_mode".into(), Value::String(mode.into()));
    doc.insert(
        "malicious".into(),
        ints(s.placement.malicious.iter().map(|&m| m as i64)),
    );
    let quantizer = match s.quantizer {
        QuantizerKind::Probabilistic => "probabilistic",
        QuantizerKind::Floor => "floor",
        QuantizerKind::Ceil => "ceil",
    };
    doc.insert("quantizer".into(), Value::String(quantizer.into()));
    if let Some(h) = s.horizon {
        doc.insert("horizon".into(), Value::Integer(h as i64));
    }
    let seed = i64::try_from(s.seed)
        .map_err(|_| invalid("seed exceeds the file format's integer range"))?;
    doc.insert("seed".into(), Value::Integer(seed));

    let mut graph = Table::new();
    graph.insert("n".into(), Value::Integer(s.graph.n() as i64));
    graph.insert(
        "edges".into(),
        Value::Array(s.graph.edges().map(|(j, i)| ints([j as i64, i as i64])).collect()),
    );
    doc.insert("graph".into(), Value::Table(graph));

    let mut attack = Table::new();
    match &s.strategy {
        AdversaryStrategy::Constant { value } => {
            attack.insert("kind".into(), Value::String("constant".into()));
            attack.insert("value".into(), Value::Integer(*value));
        }
        AdversaryStrategy::Alternating { even, odd } => {
            attack.insert("kind".into(), Value::String("alternating".into()));
            attack.insert("even".into(), Value::Integer(*even));
            attack.insert("odd".into(), Value::Integer(*odd));
        }
        AdversaryStrategy::IndexAlternating { offset } => {
            attack.insert("kind".into(), Value::String("index_alternating".into()));
            attack.insert("offset".into(), Value::Integer(*offset));
        }
        AdversaryStrategy::Scripted { values } => {
            attack.insert("kind".into(), Value::String("scripted".into()));
            attack.insert("values".into(), ints(values.iter().copied()));
        }
    }
    doc.insert("attack".into(), Value::Table(attack));

    let mut schedule = Table::new();
    match &s.schedule {
        Schedule::Synchronous => {
            schedule.insert("kind".into(), Value::String("synchronous".into()));
        }
        Schedule::Deterministic { table, coverage_bound } => {
            schedule.insert("kind".into(), Value::String("deterministic".into()));
            schedule.insert(
                "table".into(),
                Value::Array(
                    table.iter().map(|set| ints(set.iter().map(|&i| i as i64))).collect(),
                ),
            );
            schedule.insert("coverage_bound".into(), Value::Integer(*coverage_bound as i64));
        }
        Schedule::Probabilistic { p: UpdateProb::Uniform(p) } => {
            schedule.insert("kind".into(), Value::String("probabilistic".into()));
            schedule.insert("p".into(), Value::Float(*p));
        }
        Schedule::Probabilistic { p: UpdateProb::PerAgent(_) } => {
            return Err(invalid("per-agent update probabilities have no file form"));
        }
    }
    doc.insert("schedule".into(), Value::Table(schedule));

    let mut delay = Table::new();
    match &s.delay {
        DelayModel::None => {}
        DelayModel::Constant { tau } => {
            delay.insert("kind".into(), Value::String("constant".into()));
            delay.insert("tau".into(), Value::Integer(*tau as i64));
        }
        DelayModel::Table { bound, entries } => {
            delay.insert("kind".into(), Value::String("table".into()));
            delay.insert("bound".into(), Value::Integer(*bound as i64));
            delay.insert(
                "entries".into(),
                Value::Array(
                    entries
                        .iter()
                        .map(|(&(j, i), &(even, odd))| {
                            ints([j as i64, i as i64, even as i64, odd as i64])
                        })
                        .collect(),
                ),
            );
        }
        DelayModel::Scripted { .. } => {
            return Err(invalid("scripted delays have no file form"));
        }
    }
    if !delay.is_empty() {
        doc.insert("delay".into(), Value::Table(delay));
    }

    toml::to_string(&doc).map_err(|e| ScnError::Parse(e.to_string()))
}
