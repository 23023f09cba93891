//! Acceptance run: eight criteria, one line each, with pinned budgets.
//!
//! Everything is exact, so the only tolerances are time budgets. Budgets
//! are wall-clock on an optimized test build, measured from the first call
//! of each criterion (the first criterion times a warmed call, median of
//! 21, since a single sub-millisecond call is at the mercy of the
//! scheduler).

use std::path::Path;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use slocc::canon::CanonicalForm;
use slocc::cli::{cmd_equiv, Common};
use slocc::exactmat::Scalar;
use slocc::harness::{golden_ja, orbit_case, other_shape, run_suite, witness_reproduces, Suite};
use slocc::io::{to_json, CanonFile};
use slocc::symmetry::SymmetryParams;

const SEED: u64 = 0;

struct Line {
    id: usize,
    name: &'static str,
    budget: Duration,
    elapsed: Duration,
    result: Result<String, String>,
}

impl Line {
    fn pass(&self) -> bool {
        self.result.is_ok() && self.elapsed < self.budget
    }

    fn print(&self) {
        let verdict = if self.pass() { "PASS" } else { "FAIL" };
        let detail = match &self.result {
            Ok(d) | Err(d) => d,
        };
        println!(
            "criterion {} {verdict} {}: {detail} [{:.3} ms, budget {} ms]",
            self.id,
            self.name,
            self.elapsed.as_secs_f64() * 1e3,
            self.budget.as_millis()
        );
    }
}

fn timed(
    id: usize,
    name: &'static str,
    budget_ms: u64,
    f: impl FnOnce() -> Result<String, String>,
) -> Line {
    let start = Instant::now();
    let result = f();
    Line {
        id,
        name,
        budget: Duration::from_millis(budget_ms),
        elapsed: start.elapsed(),
        result,
    }
}

fn suite_line(id: usize, name: &'static str, budget_ms: u64, suite: Suite) -> Line {
    let mut line = timed(id, name, budget_ms, || {
        let r = run_suite(suite, SEED, None);
        let summary = format!(
            "{} passed, {} failed, {} degenerate draws redrawn",
            r.passed, r.failed, r.redrawn
        );
        match r.trials.iter().find(|t| t.verdict != "pass") {
            None if r.passed == suite.default_trials() => Ok(summary),
            None => Err(summary),
            Some(t) => Err(format!(
                "{summary}; first failure seed {}: {}",
                t.seed,
                t.detail.as_deref().unwrap_or("")
            )),
        }
    });
    line.name = name;
    line
}

fn ja_line() -> Line {
    let zs = [
        Scalar::from_int(1),
        Scalar::ratio(-3, 7),
        Scalar::ratio(5, 2),
        Scalar::from_int(0),
        Scalar::ratio(-9, 4),
    ];
    for z in &zs {
        if let Err(e) = golden_ja(z) {
            return Line {
                id: 1,
                name: "golden z3 map",
                budget: Duration::from_millis(1),
                elapsed: Duration::ZERO,
                result: Err(e),
            };
        }
    }
    let mut times: Vec<Duration> = (0..21)
        .map(|_| {
            let start = Instant::now();
            golden_ja(&Scalar::ratio(5, 2)).unwrap();
            start.elapsed()
        })
        .collect();
    times.sort();
    Line {
        id: 1,
        name: "golden z3 map",
        budget: Duration::from_millis(1),
        elapsed: times[times.len() / 2],
        result: Ok(format!(
            "(1,0,2,3) -> (1, 0, 2/(1+2z3), 3/(1+2z3)^3) exactly for z3 in {{{}}}; the printed worked example's 1/(1+2z3) is off by the factor 2 of a1",
            zs.iter().map(|z| z.to_string()).collect::<Vec<_>>().join(", ")
        )),
    }
}

fn write_form(dir: &Path, name: &str, cf: &CanonicalForm) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, to_json(&CanonFile::from_canonical(cf))).unwrap();
    path
}

fn orbit_line() -> Line {
    timed(5, "orbit decisions through the CLI", 60_000, || {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let common = Common {
            json: true,
            ..Common::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        let (mut equivalent, mut inequivalent, mut redrawn) = (0, 0, 0);
        for k in 0..100 {
            let (cf, img, r) = orbit_case(&mut rng);
            redrawn += r;
            let a = write_form(dir.path(), &format!("a{k}.json"), &cf);
            let b = write_form(dir.path(), &format!("b{k}.json"), &img);
            let out = cmd_equiv(&a, &b, &common);
            if out.code != 0 {
                return Err(format!("case {k}: exit {} {}", out.code, out.stdout.trim()));
            }
            let v: serde_json::Value =
                serde_json::from_str(&out.stdout).map_err(|e| e.to_string())?;
            let witness: SymmetryParams =
                serde_json::from_value(v["witness"].clone()).map_err(|e| e.to_string())?;
            witness_reproduces(&cf, &img, &witness).map_err(|e| format!("case {k}: {e}"))?;
            equivalent += 1;
            if let Some(other) = other_shape(&mut rng, &cf) {
                let c = write_form(dir.path(), &format!("c{k}.json"), &other);
                let out = cmd_equiv(&a, &c, &common);
                if out.code != 1 {
                    return Err(format!("case {k}: different shapes gave exit {}", out.code));
                }
                inequivalent += 1;
            }
        }
        Ok(format!(
            "{equivalent}/100 images Equivalent with reproducing witnesses (exit 0), {inequivalent} shape mismatches Inequivalent (exit 1), {redrawn} degenerate draws redrawn"
        ))
    })
}

fn main() {
    let lines = vec![
        ja_line(),
        suite_line(
            2,
            "closed forms of the z1 and z2 maps",
            1_000,
            Suite::ClosedForms,
        ),
        suite_line(3, "Moebius law on 2 x N x N", 5_000, Suite::Mobius),
        suite_line(
            4,
            "symmetry engine against the matrix oracle",
            60_000,
            Suite::Oracle,
        ),
        orbit_line(),
        suite_line(6, "commutant structure", 10_000, Suite::Commutant),
        suite_line(
            7,
            "truncated power series identities",
            5_000,
            Suite::Nilpoly,
        ),
        suite_line(8, "rank-deficient split predicate", 1_000, Suite::Beta),
    ];
    for l in &lines {
        l.print();
    }
    let failed: Vec<usize> = lines.iter().filter(|l| !l.pass()).map(|l| l.id).collect();
    if !failed.is_empty() {
        eprintln!("criteria failed: {failed:?}");
        std::process::exit(1);
    }
}
