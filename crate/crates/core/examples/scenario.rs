//! Runs a bundled scenario and prints its report.
//!
//! cargo run -p pause-core --example scenario -- case2_routes

use pause_core::scenario::{bundled, run, BUNDLED};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "case1_mapping".into());
    let scenario = bundled(&name).map_err(|e| format!("{e}; bundled: {BUNDLED:?}"))?;
    let outcome = run(&scenario, None)?;
    print!("{}", outcome.report_markdown());
    println!("\n{} log records; all assertions passed: {}", outcome.log.lines.len(), outcome.passed());
    Ok(())
}
