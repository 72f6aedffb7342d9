//! Measure what a trace reveals: a program that branches on its secret
//! against one that masks it with a one-time pad.

use oblivlog::security::{statistical_secrecy, ObliviousnessQuery};
use oblivlog::syntax::parse_program;

const LEAKY: &str = "det var s := 0;
rand var Trace := [];
var r := 0;
r :$= {0, 1};
if s = 1 { Trace := Trace ++ [r] } else { Trace := Trace ++ [0] }";

const MASKED: &str = "det var s := 0;
rand var Trace := [];
var k := 0;
k :$= {0 .. 3};
Trace := Trace ++ [(s + k) % 4]";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for (name, src) in [("leaky", LEAKY), ("masked", MASKED)] {
        let query = ObliviousnessQuery { program: parse_program(src)?, secret_var: "s".into(), secrets: vec![0.into(), 1.into()], observe_var: "Trace".into(), fuel: 100 };
        let r = statistical_secrecy(&query)?;
        println!("{name}: {} (SD {}, best guess succeeds with {}, epsilon {})", r.verdict, r.sd[0][1], r.advantage[0][1], r.epsilon);
        for (s, d) in r.secrets.iter().zip(&r.distributions) {
            let shown: Vec<String> = d.iter_probs().map(|(v, p)| format!("{v}: {p}")).collect();
            println!("  s = {s}: {}", shown.join(", "));
        }
    }
    Ok(())
}
