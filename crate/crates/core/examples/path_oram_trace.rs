//! The generated Path ORAM program for a short access sequence, and the
//! distribution of its trace.
//!
//! cargo run --release --example path_oram_trace -- w:0=1,r:1

use oblivlog::cases::path_oram::{build_path_oram, max_bucket, source, Op, Params};
use oblivlog::interp::DEFAULT_FUEL;
use oblivlog::security::observe_distribution;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let arg = std::env::args().nth(1).unwrap_or_else(|| "w:0=1,r:0".into());
    let ops: Vec<Op> = arg.split(',').map(|s| Op::parse(s).ok_or_else(|| format!("bad operation `{s}`"))).collect::<Result<_, _>>()?;
    let params = Params::default();
    println!("{}", source(&params, &ops)?);
    let p = build_path_oram(&params, &ops)?;
    let trace = observe_distribution(&p, "Trace", DEFAULT_FUEL)?;
    println!("// {} equally likely traces, e.g. {}", trace.len(), trace.support().next().expect("non-empty"));
    println!("// results {}", observe_distribution(&p, "Res", DEFAULT_FUEL)?.as_point().expect("deterministic results"));
    println!("// fullest bucket holds {}", max_bucket(&params, &ops, DEFAULT_FUEL)?);
    Ok(())
}
