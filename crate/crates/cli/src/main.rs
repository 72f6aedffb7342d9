use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value as Json};

use oblivlog::assertion::{entails, satisfies, Universe};
use oblivlog::cases::{Case, Study};
use oblivlog::command::Program;
use oblivlog::dist::Prob;
use oblivlog::error::{AssertError, ExecError, LogicError};
use oblivlog::expr::Name;
use oblivlog::interp::{self, run};
use oblivlog::logic::fuzz::{self, soundness_fuzz};
use oblivlog::logic::script::{check_proof, parse_script};
use oblivlog::logic::{holds_semantically, Rule, Triple};
use oblivlog::report::{config_json, dist_json, fuzz_json, prob_json, secrecy_json};
use oblivlog::security::{observe_distribution, statistical_secrecy, ObliviousnessQuery, SecurityError};
use oblivlog::syntax::{parse_assertion, parse_program, parse_value, pretty};
use oblivlog::value::Value;

const NEGATIVE: u8 = 1;
const USAGE: u8 = 2;
const LIMIT: u8 = 3;

/// Exact interpreter, assertion checker and leakage measurement for a small
/// probabilistic language.
///
/// Exit status: 0 success, 1 negative verdict, 2 usage or input error,
/// 3 fuel, enumeration or generation limit reached.
#[derive(Parser)]
#[command(name = "oblivlog", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Global {
    /// Loop iterations allowed before a run is abandoned.
    #[arg(long, global = true, env = "OBLIVLOG_FUEL", default_value_t = interp::DEFAULT_FUEL)]
    fuel: u64,
    /// Seed for commands that draw random instances.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Universe as `x:rand={0,1}; d:det={0 .. 2}; denom=4`.
    #[arg(long, global = true)]
    universe: Option<String>,
    /// Candidate limit for universe enumeration; overrides the universe's own.
    #[arg(long, global = true)]
    budget: Option<u128>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a program and print its final configuration.
    Run {
        #[arg(long)]
        program: PathBuf,
        /// Override initial values, `name=value`.
        #[arg(long = "set", value_parser = key_value)]
        set: Vec<(String, String)>,
        /// Keep only these variables, comma separated.
        #[arg(long, value_delimiter = ',')]
        project: Vec<String>,
    },
    /// Check an assertion on a program's final configuration, or an
    /// entailment between two assertions over the universe.
    CheckAssert {
        #[arg(long)]
        program: Option<PathBuf>,
        #[arg(long = "assert")]
        assertion: String,
        /// Decide `assert ⟹ implies` over the universe instead.
        #[arg(long)]
        implies: Option<String>,
    },
    /// Decide `{pre} body {post}` from every configuration of the universe.
    CheckTriple {
        #[arg(long)]
        pre: String,
        #[arg(long)]
        program: PathBuf,
        #[arg(long)]
        post: String,
    },
    /// Check a JSON proof script node by node.
    CheckProof {
        #[arg(long)]
        script: PathBuf,
    },
    /// Measure how far the observable's distribution depends on a secret.
    Secrecy {
        #[arg(long)]
        program: PathBuf,
        #[arg(long)]
        secret_var: String,
        /// Sequence literal of secret values, e.g. `[[0, 0], [0, 1]]`.
        #[arg(long)]
        secrets: String,
        #[arg(long, default_value = "Trace")]
        observe: String,
        /// Accept an attacker advantage up to one half plus this bound,
        /// given as a fraction `a/b` or an integer.
        #[arg(long, default_value = "0")]
        epsilon: String,
    },
    /// Build one of the bundled algorithms and run or check it.
    CaseStudy {
        /// synthetic, melbourne, sampling, path-oram or poh.
        name: String,
        /// Parameter `key=value`; repeat for several.
        #[arg(long = "param", value_parser = key_value)]
        params: Vec<(String, String)>,
        /// Check the algorithm's security and correctness claims.
        #[arg(long = "check-paper-assertions")]
        check_claims: bool,
        /// Print the generated source instead of running it.
        #[arg(long)]
        emit_source: bool,
    },
    /// Test proof rules for soundness on random premise-valid instances.
    Fuzz {
        /// Rule name, or `all`.
        #[arg(long, default_value = "all")]
        rule: String,
        #[arg(long, default_value_t = 100)]
        instances: usize,
    },
}

fn key_value(s: &str) -> Result<(String, String), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got `{s}`"))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

/// A failed invocation and its exit status.
struct Failure {
    code: u8,
    msg: String,
}

fn usage(msg: impl Display) -> Failure {
    Failure { code: USAGE, msg: msg.to_string() }
}

fn limit(msg: impl Display) -> Failure {
    Failure { code: LIMIT, msg: msg.to_string() }
}

fn exec_failure(e: ExecError) -> Failure {
    match e {
        ExecError::FuelExhausted(_) | ExecError::PathExplosion(_) => limit(e),
        other => usage(other),
    }
}

fn assert_failure(e: AssertError) -> Failure {
    match e {
        AssertError::EnumerationBudgetExceeded { .. } => limit(e),
        other => usage(other),
    }
}

fn logic_failure(e: LogicError) -> Failure {
    match e {
        LogicError::Exec(e) => exec_failure(e),
        LogicError::Assert(e) => assert_failure(e),
        LogicError::GenerationBudgetExceeded(_) => limit(e),
        other => usage(other),
    }
}

fn security_failure(e: SecurityError) -> Failure {
    match e {
        SecurityError::Exec(e) => exec_failure(e),
        SecurityError::Assert(e) => assert_failure(e),
        other => usage(other),
    }
}

fn case_failure(e: oblivlog::cases::CaseError) -> Failure {
    match e {
        oblivlog::cases::CaseError::Exec(e) => exec_failure(e),
        oblivlog::cases::CaseError::Security(e) => security_failure(e),
        other => usage(other),
    }
}

/// Printed document and exit status.
struct Outcome {
    doc: Json,
    positive: bool,
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_program(path: &Path) -> Result<Program, Failure> {
    parse_program(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

impl Global {
    fn universe(&self) -> Result<Option<Universe>, Failure> {
        let Some(src) = &self.universe else { return Ok(None) };
        let u = Universe::parse(src).map_err(|e| usage(format!("universe: {e}")))?;
        Ok(Some(match self.budget {
            Some(b) => u.with_budget(b),
            None => u,
        }))
    }

    fn require_universe(&self, what: &str) -> Result<Universe, Failure> {
        self.universe()?.ok_or_else(|| usage(format!("{what} needs --universe")))
    }
}

fn parse_prob(s: &str) -> Result<Prob, Failure> {
    let bad = || usage(format!("cannot read probability `{s}`"));
    let (n, d) = s.split_once('/').unwrap_or((s, "1"));
    let n: i64 = n.trim().parse().map_err(|_| bad())?;
    let d: i64 = d.trim().parse().map_err(|_| bad())?;
    if d <= 0 || n < 0 {
        return Err(bad());
    }
    Ok(Prob::new(n, d))
}

fn execute(cli: &Cli) -> Result<Outcome, Failure> {
    let g = &cli.global;
    match &cli.cmd {
        Cmd::Run { program, set, project } => {
            let mut p = load_program(program)?;
            if !set.is_empty() {
                let mut inputs = BTreeMap::new();
                for (k, v) in set {
                    inputs.insert(Name::from(k.as_str()), parse_value(v).map_err(usage)?);
                }
                p = p.with_inputs(&inputs).map_err(usage)?;
            }
            let mut out = run(&p, g.fuel).map_err(exec_failure)?;
            if !project.is_empty() {
                let keep: BTreeSet<Name> = project.iter().map(|s| Name::from(s.as_str())).collect();
                if let Some(missing) = keep.iter().find(|n| p.kind_of(n).is_none()) {
                    return Err(usage(format!("no variable `{missing}`")));
                }
                out = out.restrict(&keep);
            }
            Ok(Outcome { doc: config_json(&out), positive: true })
        }
        Cmd::CheckAssert { program, assertion, implies } => match implies {
            Some(b) => {
                let u = g.require_universe("an entailment")?;
                let k = u.kinds();
                let a = parse_assertion(assertion, &k).map_err(usage)?;
                let b = parse_assertion(b, &k).map_err(usage)?;
                let cex = entails(&a, &b, &u).map_err(assert_failure)?;
                Ok(Outcome {
                    positive: cex.is_none(),
                    doc: json!({ "holds": cex.is_none(), "counterexample": cex.as_ref().map(config_json) }),
                })
            }
            None => {
                let path = program.as_ref().ok_or_else(|| usage("check-assert needs --program or --implies"))?;
                let p = load_program(path)?;
                let a = parse_assertion(assertion, p.kinds()).map_err(usage)?;
                let u = g.universe()?.unwrap_or_else(|| Universe::new(1));
                let out = run(&p, g.fuel).map_err(exec_failure)?.restrict(&a.free_names());
                let holds = satisfies(&out, &a, &u).map_err(assert_failure)?;
                Ok(Outcome { positive: holds, doc: json!({ "holds": holds, "counterexample": (!holds).then(|| config_json(&out)) }) })
            }
        },
        Cmd::CheckTriple { pre, program, post } => {
            let u = g.require_universe("a triple")?;
            let p = load_program(program)?;
            let t = Triple::new(parse_assertion(pre, p.kinds()).map_err(usage)?, p.body().clone(), parse_assertion(post, p.kinds()).map_err(usage)?);
            let v = holds_semantically(&t, &u, g.fuel).map_err(logic_failure)?;
            Ok(Outcome {
                positive: v.is_none(),
                doc: json!({
                    "triple": t.to_string(),
                    "verdict": if v.is_none() { "valid" } else { "invalid" },
                    "counterexample": v.map(|v| json!({ "initial": config_json(&v.initial), "result": config_json(&v.result) })),
                }),
            })
        }
        Cmd::CheckProof { script } => {
            let s = parse_script(&read(script)?).map_err(usage)?;
            let r = check_proof(&s, g.universe()?.as_ref()).map_err(logic_failure)?;
            let doc = serde_json::to_value(&r).expect("report serializes");
            Ok(Outcome { positive: r.accepted(), doc: json!({ "accepted": r.accepted(), "report": doc }) })
        }
        Cmd::Secrecy { program, secret_var, secrets, observe, epsilon } => {
            let p = load_program(program)?;
            let list = parse_value(secrets).map_err(usage)?;
            let Value::Seq(secrets) = list else { return Err(usage("--secrets must be a sequence literal")) };
            let bound = parse_prob(epsilon)?;
            let q = ObliviousnessQuery { program: p, secret_var: secret_var.as_str().into(), secrets, observe_var: observe.as_str().into(), fuel: g.fuel };
            let r = statistical_secrecy(&q).map_err(security_failure)?;
            let within = r.epsilon <= bound;
            let mut doc = secrecy_json(&r);
            doc["bound"] = prob_json(&bound);
            doc["within_bound"] = json!(within);
            Ok(Outcome { doc, positive: within })
        }
        Cmd::CaseStudy { name, params, check_claims, emit_source } => {
            let study = Study::from_name(name).ok_or_else(|| {
                usage(format!("unknown case study `{name}` (expected one of {})", Study::ALL.map(Study::name).join(", ")))
            })?;
            let case = Case::new(study, params).map_err(case_failure)?;
            if *emit_source {
                let p = case.program().map_err(case_failure)?;
                return Ok(Outcome { doc: Json::String(pretty::program(&p)), positive: true });
            }
            if *check_claims {
                let checks = case.checks(g.fuel).map_err(case_failure)?;
                let ok = checks.iter().all(|c| c.passed);
                let list: Vec<Json> = checks.iter().map(|c| json!({ "name": c.name, "passed": c.passed, "detail": c.detail })).collect();
                return Ok(Outcome { positive: ok, doc: json!({ "study": study.name(), "passed": ok, "checks": list }) });
            }
            let p = case.program().map_err(case_failure)?;
            let observe = if study == Study::Synthetic { "O" } else { "Trace" };
            let d = observe_distribution(&p, observe, g.fuel).map_err(security_failure)?;
            Ok(Outcome { positive: true, doc: json!({ "study": study.name(), "observe": observe, "distribution": dist_json(&d) }) })
        }
        Cmd::Fuzz { rule, instances } => {
            let rules: Vec<Rule> = if rule == "all" {
                Rule::ALL.to_vec()
            } else {
                vec![Rule::from_name(rule).ok_or_else(|| usage(format!("unknown rule `{rule}`")))?]
            };
            let u = match g.universe()? {
                Some(u) => u,
                None => match g.budget {
                    Some(b) => fuzz::test_universe().with_budget(b),
                    None => fuzz::test_universe(),
                },
            };
            eprintln!("seed {}", g.seed);
            let mut reports = Vec::new();
            let mut sound = true;
            for r in rules {
                let rep = soundness_fuzz(r, *instances, &u, g.seed).map_err(logic_failure)?;
                sound &= rep.violations.is_empty();
                reports.push(fuzz_json(&rep));
            }
            Ok(Outcome { positive: sound, doc: json!({ "seed": g.seed, "universe": u.to_string(), "rules": reports }) })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(out) => {
            let text = match &out.doc {
                Json::String(s) => s.clone(),
                doc => serde_json::to_string_pretty(doc).expect("documents serialize") + "\n",
            };
            // A closed pipe on stdout is not an error of the check.
            let _ = std::io::stdout().write_all(text.as_bytes());
            ExitCode::from(if out.positive { 0 } else { NEGATIVE })
        }
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
