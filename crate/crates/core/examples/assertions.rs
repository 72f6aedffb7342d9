//! Check assertions on a program's output and decide an entailment over a
//! small universe.

use oblivlog::assertion::{entails, satisfies, Universe};
use oblivlog::interp::run;
use oblivlog::syntax::{parse_assertion, parse_program};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = parse_program("var x := 0; var y := 0; x :$= {0, 1}; y :$= {0, 1}; if x = 1 { y := 1 - y }")?;
    let out = run(&p, 100)?;
    let u = Universe::new(1);
    for src in ["U[{0, 1}, x] * U[{0, 1}, y]", "C[x = y]", "D[x] /\\ D[y]"] {
        let a = parse_assertion(src, p.kinds())?;
        println!("{src:<30} {}", satisfies(&out, &a, &u)?);
    }

    let u = Universe::parse("a:rand={0,1,2}; denom=2")?;
    let strong = parse_assertion("C[a = 1] \\/ C[a = 2]", &u.kinds())?;
    let weak = parse_assertion("C[a = 1 || a = 2]", &u.kinds())?;
    println!("{strong} entails {weak}: {}", entails(&strong, &weak, &u)?.is_none());
    match entails(&weak, &strong, &u)? {
        Some(cex) => println!("converse fails on\n{cex}"),
        None => println!("converse holds"),
    }
    Ok(())
}
