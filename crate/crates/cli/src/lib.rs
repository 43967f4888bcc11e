//! Scenario-file plumbing and output rendering shared by the `qwmsr-sim`
//! binary and its tests.

pub mod output;
pub mod scn;
