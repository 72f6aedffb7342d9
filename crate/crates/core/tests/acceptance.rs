//! End-to-end acceptance run. Prints one line per criterion and exits
//! non-zero if any fails.

use std::collections::{BTreeMap, BTreeSet};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use oblivlog::assertion::entails;
use oblivlog::assertion::props::{defined_transfer_three_vars, disjunction_example, proposition_suite, PropOutcome};
use oblivlog::cases::{melbourne, path_oram, poh, sampling, synthetic, Case, CaseCheck, Study};
use oblivlog::dist::{even_partition, statistical_distance, FinDist, Prob};
use oblivlog::interp::DEFAULT_FUEL;
use oblivlog::logic::fuzz::{non_atomic_assignment, soundness_fuzz, test_universe};
use oblivlog::logic::Rule;
use oblivlog::oracle::{cross_check, random_source, DEFAULT_PATH_BUDGET};
use oblivlog::security::{attacker_advantage, statistical_secrecy, ObliviousnessQuery};
use oblivlog::syntax::parse_program;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(t: Instant, limit: Duration) -> Result<String, String> {
    let took = t.elapsed();
    ensure(took < limit, || format!("took {took:.1?}, limit {limit:?}"))?;
    Ok(format!("{took:.1?}"))
}

fn case_checks(checks: Result<Vec<CaseCheck>, impl std::fmt::Display>) -> Result<String, String> {
    let checks = checks.map_err(|e| e.to_string())?;
    let failed: Vec<String> = checks.iter().filter(|c| !c.passed).map(|c| format!("{}: {}", c.name, c.detail)).collect();
    ensure(failed.is_empty(), || failed.join("; "))?;
    Ok(checks.iter().map(|c| c.name.as_str()).collect::<Vec<_>>().join(", "))
}

fn synthetic_two() -> Outcome {
    let t = Instant::now();
    let program = synthetic::build_synthetic(2).map_err(|e| e.to_string())?;
    let query = ObliviousnessQuery { program, secret_var: "S".into(), secrets: synthetic::secrets(2), observe_var: "O".into(), fuel: DEFAULT_FUEL };
    let r = statistical_secrecy(&query).map_err(|e| e.to_string())?;
    ensure(r.secrets.len() == 4, || format!("{} secrets", r.secrets.len()))?;
    let mut expected = BTreeSet::new();
    for a in 0..8 {
        for b in 0..8 {
            expected.insert(oblivlog::value::Value::int_seq([a, b]));
        }
    }
    ensure(expected.len() == 64, || "expected set".into())?;
    for (s, d) in r.secrets.iter().zip(&r.distributions) {
        ensure(d.is_uniform_over(&expected), || format!("O not uniform over 64 sequences for S = {s}"))?;
    }
    ensure(r.sd.iter().flatten().all(Prob::is_zero), || "non-zero SD".into())?;
    for i in 0..4 {
        for j in 0..4 {
            ensure(i == j || r.advantage[i][j] == Prob::new(1, 2), || format!("advantage {}", r.advantage[i][j]))?;
        }
    }
    Ok(format!("4 secrets, O uniform over 64, SD 0, advantage 1/2, {}", within(t, Duration::from_secs(30))?))
}

fn even_partitions() -> Outcome {
    let s16: BTreeSet<i64> = (1..=16).collect();
    let s9: BTreeSet<i64> = (1..=9).collect();
    let target: BTreeSet<i64> = (0..8).collect();
    ensure(even_partition(|x| x % 8, &s16, &target) == Some(2), || "%8 on {1..16} not accepted with k = 2".into())?;
    ensure(even_partition(|x| x % 8, &s9, &target).is_none(), || "%8 on {1..9} accepted".into())?;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut accepted = 0;
    for i in 0..500 {
        let mut s: BTreeSet<i64> = (0..24).filter(|_| rng.gen_bool(0.4)).collect();
        s.insert(rng.gen_range(0..24));
        let (a, b, m) = (rng.gen_range(1..5), rng.gen_range(0..5), rng.gen_range(1..7));
        let f = |x: &i64| (a * x + b) % m;
        let image: BTreeSet<i64> = s.iter().map(f).collect();
        let t: BTreeSet<i64> = if rng.gen_bool(0.5) { image } else { (0..m).filter(|_| rng.gen_bool(0.7)).collect() };
        if let Some(k) = even_partition(f, &s, &t) {
            accepted += 1;
            let push = FinDist::uniform(s.iter().copied()).unwrap().map(f);
            ensure(push.is_uniform_over(&t) && k * t.len() == s.len(), || format!("instance {i}: accepted with k = {k} but pushforward not uniform"))?;
        }
    }
    ensure(accepted > 50, || format!("only {accepted} instances accepted"))?;
    Ok(format!("k = 2 on {{1..16}}, {{1..9}} rejected, 500 instances ({accepted} accepted), 0 failures"))
}

fn propositions() -> Outcome {
    let t = Instant::now();
    let mut n = 0;
    for inst in proposition_suite().into_iter().chain([defined_transfer_three_vars()]) {
        n += 1;
        match inst.check().map_err(|e| format!("{}: {e}", inst.label))? {
            PropOutcome::Holds => {}
            other => return Err(format!("{} ({}): {other:?}", inst.prop, inst.label)),
        }
    }
    let (stronger, weaker, u) = disjunction_example();
    ensure(entails(&stronger, &weaker, &u).map_err(|e| e.to_string())?.is_none(), || "stronger disjunction does not entail weaker".into())?;
    let cex = entails(&weaker, &stronger, &u).map_err(|e| e.to_string())?;
    ensure(cex.is_some(), || "no counterexample for the converse".into())?;
    Ok(format!("{n} instances hold, disjunction counterexample found, {}", within(t, Duration::from_secs(300))?))
}

fn rule_fuzzing() -> Outcome {
    let t = Instant::now();
    let u = test_universe();
    let mut total = 0;
    for rule in Rule::ALL {
        let r = soundness_fuzz(rule, 100, &u, 1).map_err(|e| e.to_string())?;
        ensure(r.violations.is_empty(), || format!("{rule}: {} violations, first {}", r.violations.len(), r.violations[0].violation))?;
        total += r.valid;
    }
    let (rejected, violation) = non_atomic_assignment(&u).map_err(|e| e.to_string())?;
    ensure(violation.is_some(), || format!("non-atomic assignment rejected ({rejected}) but semantically valid"))?;
    Ok(format!("{} rules, {total} valid instances, 0 violations; non-atomic assignment rejected and invalid, {}", Rule::ALL.len(), within(t, Duration::from_secs(900))?))
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for i in 0..200 {
        let src = random_source(&mut rng);
        let p = parse_program(&src).map_err(|e| format!("program {i}: {e}"))?;
        ensure(p.kinds().len() <= 4, || format!("program {i} has {} variables", p.kinds().len()))?;
        match cross_check(&p, 50, DEFAULT_PATH_BUDGET) {
            Ok(true) => {}
            other => return Err(format!("program {i} ({other:?}):\n{src}")),
        }
    }
    let minimal = [
        (Study::Synthetic, vec![("n", "1")]),
        (Study::Melbourne, vec![]),
        (Study::Sampling, vec![]),
        (Study::PathOram, vec![]),
        (Study::Poh, vec![]),
    ];
    for (study, settings) in minimal {
        let settings: Vec<(String, String)> = settings.into_iter().map(|(k, v)| (k.into(), v.into())).collect();
        let p = Case::new(study, &settings).and_then(|c| c.program()).map_err(|e| e.to_string())?;
        match cross_check(&p, DEFAULT_FUEL, DEFAULT_PATH_BUDGET) {
            Ok(true) => {}
            other => return Err(format!("{}: {other:?}", study.name())),
        }
    }
    Ok("200 random programs and 5 case-study programs agree".into())
}

fn path_oram_case() -> Outcome {
    let t = Instant::now();
    let checks = case_checks(path_oram::checks(&path_oram::Params::default(), 2, DEFAULT_FUEL))?;
    Ok(format!("{checks}, {}", within(t, Duration::from_secs(300))?))
}

fn melbourne_case() -> Outcome {
    case_checks(melbourne::checks(&melbourne::Params::default(), DEFAULT_FUEL))
}

fn sampling_case() -> Outcome {
    case_checks(sampling::checks(sampling::Params::default(), DEFAULT_FUEL))
}

fn poh_case() -> Outcome {
    case_checks(poh::checks(poh::Params::default(), DEFAULT_FUEL))
}

fn random_dist(rng: &mut ChaCha8Rng) -> FinDist<u8> {
    let mut w: Vec<(u8, BigRational)> = Vec::new();
    for x in 0..6u8 {
        if rng.gen_bool(0.6) {
            w.push((x, BigRational::from_integer(BigInt::from(rng.gen_range(1..10)))));
        }
    }
    if w.is_empty() {
        w.push((rng.gen_range(0..6), BigRational::one()));
    }
    FinDist::from_weights(w).unwrap()
}

/// Half the L1 distance, computed directly.
fn half_l1(p: &FinDist<u8>, q: &FinDist<u8>) -> BigRational {
    let mut sum = BigRational::zero();
    for x in 0..6u8 {
        sum += (p.prob(&x).ratio() - q.prob(&x).ratio()).abs();
    }
    sum / BigRational::from_integer(BigInt::from(2))
}

fn advantage_law() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    for i in 0..1000 {
        let (p, q) = (random_dist(&mut rng), random_dist(&mut rng));
        let sd = half_l1(&p, &q);
        ensure(statistical_distance(&p, &q).ratio() == &sd, || format!("pair {i}: distance mismatch"))?;
        let (adv, _) = attacker_advantage(&p, &q);
        ensure(adv.ratio() == &(&half + &sd / BigRational::from_integer(BigInt::from(2))), || format!("pair {i}: advantage {adv}, SD {sd}"))?;
    }
    for i in 0..1000 {
        let (p, q, r) = (random_dist(&mut rng), random_dist(&mut rng), random_dist(&mut rng));
        let d = |a: &FinDist<u8>, b: &FinDist<u8>| statistical_distance(a, b);
        let (pq, qr, pr) = (d(&p, &q), d(&q, &r), d(&p, &r));
        ensure(d(&p, &p).is_zero(), || format!("triple {i}: SD(p, p) != 0"))?;
        ensure(pq == d(&q, &p), || format!("triple {i}: not symmetric"))?;
        ensure(pq.is_zero() == (p == q), || format!("triple {i}: zero distance between distinct distributions"))?;
        ensure(pr.ratio() <= &(pq.ratio() + qr.ratio()), || format!("triple {i}: triangle inequality"))?;
        ensure(pq.ratio() <= &BigRational::one(), || format!("triple {i}: distance above one"))?;
    }
    Ok("1000 pairs satisfy advantage = 1/2 + SD/2, 1000 triples satisfy the metric axioms".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("synthetic n=2 is perfectly oblivious", synthetic_two),
        ("even partition", even_partitions),
        ("proposition suite", propositions),
        ("rule soundness fuzzing", rule_fuzzing),
        ("interpreter agrees with path enumeration", oracle_equivalence),
        ("path ORAM", path_oram_case),
        ("Melbourne shuffle", melbourne_case),
        ("oblivious sampling", sampling_case),
        ("path oblivious heap", poh_case),
        ("attacker advantage law", advantage_law),
    ];
    let only: BTreeMap<usize, ()> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).map(|n| (n, ())).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !only.is_empty() && !only.contains_key(&n) {
            continue;
        }
        match f() {
            Ok(detail) => println!("criterion {n:>2} PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("criterion {n:>2} FAIL  {name}: {why}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
