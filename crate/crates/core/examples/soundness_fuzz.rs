//! Fuzz every proof rule: generate instances whose premises hold and check
//! their conclusions by enumeration.
//!
//! cargo run --release --example soundness_fuzz -- [instances] [seed]

use std::time::Instant;

use oblivlog::logic::fuzz::{non_atomic_assignment, soundness_fuzz, test_universe};
use oblivlog::logic::Rule;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(100);
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(1);
    let u = test_universe();
    println!("universe {u}, seed {seed}");
    for rule in Rule::ALL {
        let t = Instant::now();
        let r = soundness_fuzz(rule, n, &u, seed)?;
        println!("{:<14} {:>4} valid / {:>5} attempts, {} violations ({:.1?})", rule.name(), r.valid, r.attempts, r.violations.len(), t.elapsed());
        for v in &r.violations {
            println!("  {} ~> {}", v.app.conclusion, v.violation);
        }
    }
    let (rejected, violation) = non_atomic_assignment(&u)?;
    println!("non-atomic random assignment: rejected ({rejected}); semantic check: {}", violation.map_or("valid".into(), |v| v.to_string()));
    Ok(())
}
