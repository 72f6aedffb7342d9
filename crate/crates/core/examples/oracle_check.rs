//! Cross-check the interpreter against path enumeration on random
//! programs.
//!
//! cargo run --release --example oracle_check -- [count] [seed]

use oblivlog::oracle::{cross_check, random_source, DEFAULT_PATH_BUDGET};
use oblivlog::syntax::parse_program;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(200);
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut disagreements = 0;
    for i in 0..n {
        let src = random_source(&mut rng);
        if cross_check(&parse_program(&src)?, 50, DEFAULT_PATH_BUDGET) != Ok(true) {
            disagreements += 1;
            println!("program {i} disagrees:\n{src}\n");
        }
    }
    println!("{n} programs, seed {seed}, {disagreements} disagreements");
    Ok(())
}
