//! Parse a program and print its exact final configuration.
//!
//! cargo run --example run_program -- [path/to/program.obl]

use oblivlog::interp::{run, DEFAULT_FUEL};
use oblivlog::syntax::parse_program;

const COIN: &str = "var x := 0;
var y := 0;
x :$= {0, 1};
y :$= {0, 1};
if x = 1 { y := 1 - y }";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let src = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path)?,
        None => COIN.to_string(),
    };
    let program = parse_program(&src)?;
    for (name, kind) in program.kinds() {
        println!("{kind} {name}");
    }
    let out = run(&program, DEFAULT_FUEL)?;
    println!("{out}");
    Ok(())
}
