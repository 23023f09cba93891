//! The `slocc` command line.
//!
//! Exit codes: 0 success or Equivalent, 1 failure or Inequivalent, 2
//! Undecided or a degenerate parameter, 3 unreadable or invalid input, 4
//! eigenvalues outside the Gaussian rationals, 5 the reduced pair does not
//! commute.
//!
//! `Inequivalent` from `equiv` means inequivalent under the group generated
//! by the symmetry maps, rescaling and block permutations. Whether that
//! group is the whole upper-triangular symmetry is not known.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::canon::{canonicalize, CanonOptions, CanonicalForm, Canonicalization, TensorState};
use crate::error::Error;
use crate::exactmat::Scalar;
use crate::harness::{run_suites, Suite};
use crate::io::{self, CanonFile, InputFile, StateFile};
use crate::symmetry::{
    apply_all, orbit_equivalent, OrbitDecision, Stage, SymmetryParams, CANONICAL_ORDER,
};

#[derive(Parser, Debug)]
#[command(
    name = "slocc",
    version,
    about = "Exact canonical forms of L x N x N tensors"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Canonical form of a state file; the form goes to stdout, the report to stderr.
    Canonicalize(CanonArgs),
    /// Decide whether two states or canonical forms lie in one orbit.
    Equiv(EquivArgs),
    /// Apply symmetry parameters to a canonical-form file.
    SymmetryMap(MapArgs),
    /// Run the self-test suites.
    Selftest(SelftestArgs),
}

#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Comma-separated eigenvalue candidates.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub hints: Vec<Scalar>,
    /// Machine-readable report.
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug, Clone)]
pub struct CanonArgs {
    pub input: PathBuf,
    #[command(flatten)]
    pub common: Common,
    /// Shift every slot to a zero smallest eigenvalue, not just identity-like slots.
    #[arg(long)]
    pub eigen_shift: bool,
}

#[derive(Args, Debug, Clone)]
pub struct EquivArgs {
    pub a: PathBuf,
    pub b: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct MapArgs {
    pub input: PathBuf,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub z1: Scalar,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub z2: Scalar,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub z3: Scalar,
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    pub d2: Scalar,
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    pub d3: Scalar,
    /// Stage order, e.g. `rescale,ja,ea,ej`.
    #[arg(long, value_delimiter = ',', value_parser = parse_stage)]
    pub order: Vec<Stage>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug, Clone)]
pub struct SelftestArgs {
    /// Suite name or `all`: golden, closed-forms, 2nn, oracle, orbit, commutant, nilpoly, beta.
    #[arg(long, default_value = "all")]
    pub profile: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Print every trial as a JSON line.
    #[arg(long)]
    pub json: bool,
}

fn parse_stage(s: &str) -> Result<Stage, String> {
    Stage::parse(s).ok_or_else(|| format!("unknown stage {s:?}"))
}

/// What a command printed and how it exits.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Output {
    fn ok(stdout: String, stderr: String) -> Self {
        Self {
            code: 0,
            stdout,
            stderr,
        }
    }

    fn fail(err: &Error) -> Self {
        Self {
            code: exit_code(err),
            stdout: String::new(),
            stderr: format!("error: {err}\n"),
        }
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::DegenerateParameter(_) | Error::ZeroScale => 2,
        Error::NotInField { .. } => 4,
        Error::NotCommuting => 5,
        _ => 3,
    }
}

pub fn run<I, T>(args: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Output::ok(text, String::new())
            } else {
                Output {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            };
        }
    };
    match cli.command {
        Command::Canonicalize(a) => cmd_canonicalize(&a),
        Command::Equiv(a) => cmd_equiv(&a.a, &a.b, &a.common),
        Command::SymmetryMap(a) => cmd_symmetry_map(&a),
        Command::Selftest(a) => cmd_selftest(&a),
    }
}

fn load_state(path: &Path) -> Result<TensorState, Error> {
    io::parse_state(&io::read_file(path)?)?.to_state()
}

pub fn cmd_canonicalize(args: &CanonArgs) -> Output {
    let psi = match load_state(&args.input) {
        Ok(p) => p,
        Err(e) => return Output::fail(&e),
    };
    let opts = CanonOptions {
        seed: args.common.seed,
        hints: args.common.hints.clone(),
        shift_all: args.eigen_shift,
    };
    match canonicalize(&psi, &opts) {
        Ok(Canonicalization::Full {
            cf,
            max_rank,
            shifts,
        }) => {
            let j = cf.j_matrix();
            let commutes = j.commutator(&cf.a_matrix()).is_zero();
            let report = if args.common.json {
                io::to_json(&json!({
                    "max_rank": max_rank,
                    "jordan": cf.spec(),
                    "commuting": commutes,
                    "shifts": shifts,
                    "support": cf.n(),
                }))
            } else {
                let support = if cf.n() < psi.n() {
                    format!("common kernel removed, support {} of {}\n", cf.n(), psi.n())
                } else {
                    String::new()
                };
                let blocks: Vec<String> = cf
                    .spec()
                    .blocks()
                    .iter()
                    .map(|b| format!("J_{}({})", b.size, b.lambda))
                    .collect();
                support
                    + &format!(
                    "max rank {} ({}), first slot from combination [{}]\nJordan structure: {}\n(E, J, A) commute: {commutes}\nshifts: [{}]\n",
                    max_rank.rank,
                    if max_rank.certified { "certified" } else { "best found" },
                    join(&max_rank.t_row),
                    blocks.join(" + "),
                    join(&shifts),
                )
            };
            Output::ok(io::to_json(&CanonFile::from_canonical(&cf)), report)
        }
        Ok(Canonicalization::Split {
            max_rank,
            form,
            beta_canonical,
        }) => {
            let body = json!({
                "max_rank": max_rank,
                "partitioned": form,
                "beta_canonical": beta_canonical,
            });
            let report = format!(
                "first slot has rank {} < {}; split into n = {}, m = {}, i = {}\nbeta part canonical: {beta_canonical}\n",
                max_rank.rank,
                psi.n(),
                form.n,
                form.m,
                form.i
            );
            Output::ok(io::to_json(&body), report)
        }
        Err(Error::NotCommuting) => {
            // partial output: the reduced state that failed to commute
            let partial = crate::canon::full_rank_reduce(&psi, opts.seed)
                .map(|(r, _)| io::to_json(&StateFile::from_state(&r)))
                .unwrap_or_default();
            Output {
                code: 5,
                stdout: partial,
                stderr: format!("error: {}\n", Error::NotCommuting),
            }
        }
        Err(e) => Output::fail(&e),
    }
}

fn join(xs: &[Scalar]) -> String {
    xs.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

/// Canonical form of either kind of file.
pub fn load_form(path: &Path, common: &Common) -> Result<CanonicalForm, Error> {
    match io::parse_input(&io::read_file(path)?)? {
        InputFile::Canon(c) => c.to_canonical(),
        InputFile::State(s) => {
            let opts = CanonOptions {
                seed: common.seed,
                hints: common.hints.clone(),
                shift_all: false,
            };
            match canonicalize(&s.to_state()?, &opts)? {
                Canonicalization::Full { cf, .. } => Ok(cf),
                Canonicalization::Split { max_rank, .. } => Err(Error::NotFullRank {
                    best: max_rank.rank,
                    n: s.n,
                }),
            }
        }
    }
}

pub fn cmd_equiv(a: &Path, b: &Path, common: &Common) -> Output {
    let (cf1, cf2) = match (load_form(a, common), load_form(b, common)) {
        (Ok(x), Ok(y)) => (x, y),
        (Err(e), _) | (_, Err(e)) => return Output::fail(&e),
    };
    let decision = orbit_equivalent(&cf1, &cf2);
    let stdout = if common.json {
        let mut v = json!({ "decision": decision.label() });
        match &decision {
            OrbitDecision::Equivalent {
                witness,
                t,
                matching,
            } => {
                v["witness"] = json!(witness);
                v["t"] = json!(t);
                v["matching"] = json!(matching);
            }
            OrbitDecision::Undecided { reason } => v["reason"] = json!(reason),
            OrbitDecision::Inequivalent => {
                v["scope"] = json!("inequivalent under the generated group")
            }
        }
        serde_json::to_string(&v).expect("serializable") + "\n"
    } else {
        match &decision {
            OrbitDecision::Equivalent {
                witness, matching, ..
            } => {
                format!("Equivalent\nwitness: {witness}\nblock matching: {matching:?}\n")
            }
            OrbitDecision::Inequivalent => "Inequivalent (under the generated group)\n".into(),
            OrbitDecision::Undecided { reason } => format!("Undecided: {reason}\n"),
        }
    };
    Output {
        code: decision.exit_code(),
        stdout,
        stderr: String::new(),
    }
}

pub fn cmd_symmetry_map(args: &MapArgs) -> Output {
    let cf = match io::read_file(&args.input).and_then(|t| io::parse_canon(&t)?.to_canonical()) {
        Ok(c) => c,
        Err(e) => return Output::fail(&e),
    };
    let sp = SymmetryParams {
        z1: args.z1.clone(),
        z2: args.z2.clone(),
        z3: args.z3.clone(),
        d2: args.d2.clone(),
        d3: args.d3.clone(),
    };
    let order = if args.order.is_empty() {
        CANONICAL_ORDER.to_vec()
    } else {
        args.order.clone()
    };
    match apply_all(&cf, &sp, &order) {
        Ok(img) => {
            let file = CanonFile::from_canonical(&img);
            let stderr = if args.json {
                String::new()
            } else {
                format!("applied {sp}\n")
            };
            Output::ok(io::to_json(&file), stderr)
        }
        Err(e) => Output::fail(&e),
    }
}

pub fn cmd_selftest(args: &SelftestArgs) -> Output {
    let Some(suites) = Suite::parse(&args.profile) else {
        return Output {
            code: 3,
            stdout: String::new(),
            stderr: format!("error: unknown profile {:?}\n", args.profile),
        };
    };
    let reports = run_suites(&suites, args.seed, args.jobs);
    let mut stdout = String::new();
    for r in &reports {
        if args.json {
            stdout.push_str(&r.json_lines());
        } else {
            stdout.push_str(&r.summary());
            stdout.push('\n');
            for t in r.trials.iter().filter(|t| t.verdict != "pass") {
                stdout.push_str(&format!(
                    "  trial {} (seed {}): {}\n",
                    t.index,
                    t.seed,
                    t.detail.as_deref().unwrap_or("")
                ));
            }
        }
    }
    let ok = reports.iter().all(|r| r.ok());
    Output {
        code: if ok { 0 } else { 1 },
        stdout,
        stderr: String::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flags() {
        let cli = Cli::try_parse_from([
            "slocc",
            "symmetry-map",
            "f.json",
            "--z3",
            "-1/2",
            "--order",
            "ja,rescale",
        ])
        .unwrap();
        let Command::SymmetryMap(m) = cli.command else {
            panic!()
        };
        assert_eq!(m.z3, Scalar::ratio(-1, 2));
        assert_eq!(m.order, vec![Stage::Ja, Stage::Rescale]);
        let cli = Cli::try_parse_from(["slocc", "equiv", "a", "b", "--hints", "1,-1/2,i"]).unwrap();
        let Command::Equiv(e) = cli.command else {
            panic!()
        };
        assert_eq!(e.common.hints.len(), 3);
    }

    #[test]
    fn usage_errors_exit_three() {
        assert_eq!(run(["slocc", "nonsense"]).code, 3);
        assert_eq!(run(["slocc", "selftest", "--profile", "nope"]).code, 3);
        assert_eq!(run(["slocc", "--help"]).code, 0);
    }
}
