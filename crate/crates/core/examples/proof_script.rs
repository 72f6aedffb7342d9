//! Check a JSON proof script node by node.
//!
//! cargo run --example proof_script -- crates/core/programs/mod8.proof.json

use oblivlog::logic::script::{check_proof, parse_script, Status};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/programs/mod8.proof.json").into());
    let script = parse_script(&std::fs::read_to_string(&path)?)?;
    let report = check_proof(&script, None)?;
    println!("universe {}", report.universe);
    for c in &report.checks {
        let status = match &c.status {
            Status::Passed => "ok".to_string(),
            Status::Failed { reason } => format!("FAILED: {reason}"),
        };
        println!("{:?} {:<8} [{}] {} -- {status}", c.path, c.rule, c.by, c.what);
    }
    println!("{}", if report.accepted() { "accepted" } else { "rejected" });
    Ok(())
}
