use oblivlog::oracle::{cross_check, random_source, DEFAULT_PATH_BUDGET};
use oblivlog::syntax::parse_program;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn interpreter_matches_path_enumeration(seed in any::<u64>()) {
        let src = random_source(&mut ChaCha8Rng::seed_from_u64(seed));
        let p = parse_program(&src).unwrap();
        prop_assert!(p.kinds().len() <= 4);
        prop_assert_eq!(cross_check(&p, 50, DEFAULT_PATH_BUDGET), Ok(true), "{}", src);
    }
}

#[test]
fn fuel_exhaustion_fails_both_sides() {
    let p = parse_program("var i := 0; while i < 5 { i := i + 1 }").unwrap();
    assert!(cross_check(&p, 3, DEFAULT_PATH_BUDGET).is_err());
    assert_eq!(cross_check(&p, 5, DEFAULT_PATH_BUDGET), Ok(true));
}
