//! Run a shipped scenario end to end and print its report.
//!
//! `cargo run --release --example theorem_scenario -- configs/radial_inflow.cfg`

use std::path::PathBuf;

use movvol::cli::{theorem_report_text, ScenarioConfig};
use movvol::verify::run_theorem_scenario;

fn main() -> movvol::Result<()> {
    let path = std::env::args_os().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/constant_inflow.cfg")
    });
    let cfg = ScenarioConfig::load(&path)?;
    let rep = run_theorem_scenario(&cfg)?;
    print!("{}", theorem_report_text(&cfg.name, &rep));
    for c in rep
        .bound_checks
        .iter()
        .chain(&rep.inequality_checks)
        .filter(|c| !c.passed)
    {
        println!("failed: {c}");
    }
    Ok(())
}
