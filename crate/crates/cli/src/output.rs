//! Rendering run outcomes and writing result files.

use std::collections::BTreeSet;
use std::io::{self, Write};
use std::path::Path;

use qwmsr::{NodeId, RunResult, Summary, Trajectory};

/// Writes through a sibling temp file plus rename, so readers never observe
/// a half-written file.
pub fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn frozen(t: &Trajectory, normals: &BTreeSet<NodeId>) -> bool {
    t.steps.windows(2).all(|pair| {
        normals.iter().all(|&i| pair[0].states[i - 1] == pair[1].states[i - 1])
    })
}

/// One-line outcome of a single run.
pub fn verdict(result: &RunResult, t: &Trajectory, normals: &BTreeSet<NodeId>) -> String {
    match (result.agreed, result.k_a, result.final_value) {
        (true, Some(k), Some(v)) => format!("agreement at step {k}; value {v}"),
        _ if frozen(t, normals) => "no agreement; states frozen".into(),
        _ => "no agreement within horizon".into(),
    }
}

/// Multi-line single-run report: verdict, safety, and where things ended.
pub fn run_report(result: &RunResult, t: &Trajectory, normals: &BTreeSet<NodeId>) -> String {
    let (lo, hi) = result.safety_interval;
    let safety = if result.safety_ok { "ok" } else { "VIOLATED" };
    let finals: Vec<String> = t
        .final_states()
        .iter()
        .enumerate()
        .map(|(ix, v)| {
            let mark = if normals.contains(&(ix + 1)) { "" } else { "*" };
            format!("{v}{mark}")
        })
        .collect();
    format!(
        "verdict: {}\nsafety: {safety} (interval [{lo}, {hi}])\nsteps: {}\nfinal states: [{}] (* = malicious)\n",
        verdict(result, t, normals),
        t.steps.len() - 1,
        finals.join(", "),
    )
}

/// Aligned text table over a seed batch.
pub fn summary_table(s: &Summary) -> String {
    let mut out = String::new();
    let mut line = |label: &str, value: String| {
        out.push_str(&format!("{label:<18} {value}\n"));
    };
    line("runs", s.runs.to_string());
    line("agreements", format!("{} (rate {:.3})", s.agreements, s.agreement_rate()));
    line("safety violations", s.safety_violations.to_string());
    match s.k_a {
        Some((lo, med, hi)) => line("k_a min/med/max", format!("{lo}/{med}/{hi}")),
        None => line("k_a min/med/max", "-".into()),
    }
    let finals: Vec<String> =
        s.final_values.iter().map(|(v, count)| format!("{v}\u{00d7}{count}")).collect();
    line("final values", if finals.is_empty() { "-".into() } else { finals.join("  ") });
    out
}

/// The same summary as a single JSON object.
pub fn summary_json(s: &Summary) -> String {
    let k_a = s.k_a.map(|(min, median, max)| {
        serde_json::json!({ "min": min, "median": median, "max": max })
    });
    let final_values: serde_json::Map<String, serde_json::Value> = s
        .final_values
        .iter()
        .map(|(v, count)| (v.to_string(), serde_json::json!(count)))
        .collect();
    serde_json::json!({
        "runs": s.runs,
        "agreements": s.agreements,
        "agreement_rate": s.agreement_rate(),
        "safety_violations": s.safety_violations,
        "k_a": k_a,
        "final_values": final_values,
    })
    .to_string()
}
