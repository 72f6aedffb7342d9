//! Run the checks of every case study at its default parameters.
//!
//! cargo run --release --example case_studies -- [study ...]

use std::time::Instant;

use oblivlog::cases::{Case, Study};
use oblivlog::interp::DEFAULT_FUEL;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let names: Vec<String> = std::env::args().skip(1).collect();
    let studies: Vec<Study> = if names.is_empty() {
        Study::ALL.to_vec()
    } else {
        names.iter().map(|n| Study::from_name(n).ok_or_else(|| format!("unknown study `{n}`"))).collect::<Result<_, _>>()?
    };
    for study in studies {
        let t = Instant::now();
        let case = Case::new(study, &[])?;
        println!("{}", study.name());
        for c in case.checks(DEFAULT_FUEL)? {
            println!("  {:<24} {}  {}", c.name, if c.passed { "pass" } else { "FAIL" }, c.detail);
        }
        println!("  ({:.1?})", t.elapsed());
    }
    Ok(())
}
