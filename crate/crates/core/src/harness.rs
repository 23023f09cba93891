//! Random generators, the matrix-level oracle, and the self-test suites.
//!
//! Every trial draws from its own seed, derived from the suite seed and the
//! trial index, so trials can run in any order or in parallel and still
//! produce the same report.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::canon::{
    apply_ilo, beta_canonical_check, commuting_pair_canonical, full_rank_reduce, CanonicalForm,
    IloTriple, PartitionedForm, TensorState,
};
use crate::error::{Error, Result};
use crate::exactmat::{commutant_basis, jordan_decompose, JordanBlock, JordanSpec, Matrix, Scalar};
use crate::nilpoly::{PolyGrid, TruncPoly};
use crate::symmetry::{
    apply_T_EA, apply_T_EJ, apply_T_JA, apply_all, apply_params, apply_rescale, mobius_2nn,
    orbit_equivalent, OrbitDecision, Stage, SymmetryParams, CANONICAL_ORDER,
};

pub const DEFAULT_BOUND: i64 = 9;
const MAX_REDRAWS: usize = 200;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GenConfig {
    pub seed: u64,
    pub n: usize,
    pub l: usize,
    pub block_profile: Vec<(Scalar, usize)>,
    pub coefficient_bound: i64,
}

impl GenConfig {
    pub fn new(seed: u64, block_profile: Vec<(Scalar, usize)>) -> Self {
        Self {
            seed,
            n: block_profile.iter().map(|b| b.1).sum(),
            l: 3,
            block_profile,
            coefficient_bound: DEFAULT_BOUND,
        }
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IloFamily {
    General,
    /// `T` upper triangular with `t11 = 1` and nonzero diagonal.
    UpperUnitriangularT,
}

/// `p/q` with `|p| <= bound`, `1 <= q <= bound`.
pub fn rand_scalar(rng: &mut impl Rng, bound: i64) -> Scalar {
    let num = rng.gen_range(-bound..=bound);
    let den = rng.gen_range(1..=bound.max(1));
    Scalar::ratio(num, den)
}

pub fn rand_nonzero(rng: &mut impl Rng, bound: i64) -> Scalar {
    loop {
        let s = rand_scalar(rng, bound);
        if !s.is_zero() {
            return s;
        }
    }
}

pub fn rand_invertible(rng: &mut impl Rng, n: usize, bound: i64) -> Matrix {
    loop {
        let m = Matrix::from_fn(n, n, |_, _| Scalar::from_int(rng.gen_range(-bound..=bound)));
        if m.rank() == n {
            return m;
        }
    }
}

/// Random canonical form with the configured blocks. Inside a run with
/// several blocks, constant terms below the diagonal are zero, which keeps
/// the eigenvalues of `A` rational.
pub fn gen_canonical(cfg: &GenConfig) -> Result<CanonicalForm> {
    let total: usize = cfg.block_profile.iter().map(|b| b.1).sum();
    if cfg.block_profile.is_empty() || total != cfg.n || cfg.block_profile.iter().any(|b| b.1 == 0)
    {
        return Err(Error::BadProfile(format!(
            "block sizes sum to {total}, expected N = {}",
            cfg.n
        )));
    }
    let mut rng = cfg.rng();
    let bound = cfg.coefficient_bound;
    let spec = JordanSpec::from_pairs(&cfg.block_profile)?;
    let mut parts = Vec::new();
    for (lambda, sizes) in spec.runs() {
        let k = sizes.len();
        let entries: Vec<Vec<TruncPoly>> = (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| {
                        let low = sizes[j].saturating_sub(sizes[i]);
                        let coeffs = (0..sizes[j])
                            .map(|d| {
                                if d < low || (d == 0 && i > j) {
                                    Scalar::zero()
                                } else {
                                    rand_scalar(&mut rng, bound)
                                }
                            })
                            .collect();
                        TruncPoly::new(coeffs)
                    })
                    .collect()
            })
            .collect();
        parts.push((lambda, PolyGrid::new(sizes, entries)?));
    }
    CanonicalForm::from_parts(parts)
}

pub fn gen_params(rng: &mut impl Rng, bound: i64) -> SymmetryParams {
    SymmetryParams {
        z1: rand_scalar(rng, bound),
        z2: rand_scalar(rng, bound),
        z3: rand_scalar(rng, bound),
        d2: rand_nonzero(rng, bound),
        d3: rand_nonzero(rng, bound),
    }
}

pub fn gen_ilo(cfg: &GenConfig, family: IloFamily) -> IloTriple {
    let mut rng = cfg.rng();
    let bound = cfg.coefficient_bound;
    let t = match family {
        IloFamily::General => rand_invertible(&mut rng, cfg.l, bound),
        IloFamily::UpperUnitriangularT => Matrix::from_fn(cfg.l, cfg.l, |i, j| match (i, j) {
            (0, 0) => Scalar::one(),
            _ if i == j => rand_nonzero(&mut rng, bound),
            _ if i < j => rand_scalar(&mut rng, bound),
            _ => Scalar::zero(),
        }),
    };
    let p = rand_invertible(&mut rng, cfg.n, bound);
    let q = rand_invertible(&mut rng, cfg.n, bound);
    IloTriple::new(t, p, q).expect("drawn invertible")
}

/// The operator of `sp` applied in `order`, with `P = Q = I`.
pub fn params_to_ilo(sp: &SymmetryParams, order: &[Stage], n: usize) -> IloTriple {
    IloTriple {
        t: sp.to_t(order).to_matrix(),
        p: Matrix::identity(n),
        q: Matrix::identity(n),
    }
}

/// Realizes `(E, J, A)` as matrices, applies `ops`, and canonicalizes the
/// result from scratch.
pub fn oracle_recanonicalize(cf: &CanonicalForm, ops: &IloTriple) -> Result<CanonicalForm> {
    let psi = apply_ilo(&TensorState::from_canonical(cf), ops)?;
    let (reduced, _) = full_rank_reduce(&psi, 0)?;
    let g = reduced.gammas();
    Ok(commuting_pair_canonical(&g[1], &g[2], &[])?.0)
}

/// A random block profile with `N <= max_n`. With `derogatory`, one run
/// is forced to repeat an eigenvalue when `N` allows it.
pub fn random_profile(
    rng: &mut impl Rng,
    max_n: usize,
    max_size: usize,
    derogatory: bool,
) -> Vec<(Scalar, usize)> {
    let n = rng.gen_range(1..=max_n);
    let mut sizes = Vec::new();
    let mut left = n;
    while left > 0 {
        let s = rng.gen_range(1..=left.min(max_size));
        sizes.push(s);
        left -= s;
    }
    let mut lambdas: Vec<Scalar> = sizes.iter().map(|_| rand_scalar(rng, 6)).collect();
    if derogatory && sizes.len() >= 2 {
        lambdas[1] = lambdas[0].clone();
    }
    lambdas.into_iter().zip(sizes).collect()
}

fn profile_label(cf: &CanonicalForm) -> Vec<(String, usize)> {
    cf.spec()
        .blocks()
        .iter()
        .map(|b| (b.lambda.to_string(), b.size))
        .collect()
}

/// The self-test suites.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Golden,
    ClosedForms,
    Mobius,
    Oracle,
    Orbit,
    Commutant,
    Nilpoly,
    Beta,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Golden,
        Suite::ClosedForms,
        Suite::Mobius,
        Suite::Oracle,
        Suite::Orbit,
        Suite::Commutant,
        Suite::Nilpoly,
        Suite::Beta,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Golden => "golden",
            Suite::ClosedForms => "closed-forms",
            Suite::Mobius => "2nn",
            Suite::Oracle => "oracle",
            Suite::Orbit => "orbit",
            Suite::Commutant => "commutant",
            Suite::Nilpoly => "nilpoly",
            Suite::Beta => "beta",
        }
    }

    pub fn parse(s: &str) -> Option<Vec<Suite>> {
        if s == "all" {
            return Some(Suite::ALL.to_vec());
        }
        Suite::ALL.iter().find(|x| x.name() == s).map(|&x| vec![x])
    }

    pub fn default_trials(self) -> usize {
        match self {
            Suite::Golden => GOLDEN.len(),
            Suite::ClosedForms => 50,
            Suite::Mobius => 100,
            Suite::Oracle => 300,
            Suite::Orbit => 100,
            Suite::Commutant => commutant_specs().len(),
            Suite::Nilpoly => 200,
            Suite::Beta => BETA.len(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TrialRecord {
    pub suite: &'static str,
    pub index: usize,
    pub seed: u64,
    pub profile: Vec<(String, usize)>,
    pub verdict: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    pub redrawn: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub passed: usize,
    pub failed: usize,
    pub redrawn: usize,
    pub elapsed_ms: u128,
    pub trials: Vec<TrialRecord>,
}

impl SuiteReport {
    pub fn ok(&self) -> bool {
        self.failed == 0 && self.passed > 0
    }

    pub fn json_lines(&self) -> String {
        self.trials
            .iter()
            .map(|t| serde_json::to_string(t).expect("serializable") + "\n")
            .collect()
    }

    pub fn summary(&self) -> String {
        format!(
            "{:<13} {} passed, {} failed, {} redrawn ({} ms)",
            self.suite, self.passed, self.failed, self.redrawn, self.elapsed_ms
        )
    }
}

struct Outcome {
    profile: Vec<(String, usize)>,
    verdict: std::result::Result<(), String>,
    redrawn: usize,
}

impl Outcome {
    fn fixed(verdict: std::result::Result<(), String>) -> Self {
        Self {
            profile: Vec::new(),
            verdict,
            redrawn: 0,
        }
    }
}

/// Seed of trial `index` in a suite run with `seed`.
pub fn trial_seed(seed: u64, suite: Suite, index: usize) -> u64 {
    let tag = suite as u64 + 1;
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15)
        ^ tag.wrapping_mul(0xbf58_476d_1ce4_e5b9)
        ^ (index as u64).wrapping_mul(0x94d0_49bb_1331_11eb)
}

pub fn run_suite(suite: Suite, seed: u64, trials: Option<usize>) -> SuiteReport {
    let count = trials.unwrap_or_else(|| suite.default_trials());
    let start = Instant::now();
    let records: Vec<TrialRecord> = (0..count)
        .into_par_iter()
        .map(|index| {
            let s = trial_seed(seed, suite, index);
            let out = run_trial(suite, index, s);
            TrialRecord {
                suite: suite.name(),
                index,
                seed: s,
                profile: out.profile,
                verdict: if out.verdict.is_ok() { "pass" } else { "fail" },
                detail: out.verdict.err(),
                redrawn: out.redrawn,
            }
        })
        .collect();
    let passed = records.iter().filter(|r| r.verdict == "pass").count();
    SuiteReport {
        suite: suite.name(),
        passed,
        failed: records.len() - passed,
        redrawn: records.iter().map(|r| r.redrawn).sum(),
        elapsed_ms: start.elapsed().as_millis(),
        trials: records,
    }
}

/// Runs `suites` on a pool of `jobs` threads (0 picks the default).
pub fn run_suites(suites: &[Suite], seed: u64, jobs: usize) -> Vec<SuiteReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .expect("thread pool");
    pool.install(|| suites.iter().map(|&s| run_suite(s, seed, None)).collect())
}

fn run_trial(suite: Suite, index: usize, seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match suite {
        Suite::Golden => Outcome::fixed(GOLDEN[index].1()),
        Suite::ClosedForms => closed_form_trial(&mut rng),
        Suite::Mobius => mobius_trial(&mut rng),
        Suite::Oracle => oracle_trial(&mut rng),
        Suite::Orbit => orbit_trial(&mut rng),
        Suite::Commutant => Outcome::fixed(commutant_trial(&commutant_specs()[index])),
        Suite::Nilpoly => nilpoly_trial(&mut rng, index),
        Suite::Beta => Outcome::fixed(BETA[index].1()),
    }
}

fn expect_eq<T: PartialEq + std::fmt::Debug>(
    what: &str,
    got: T,
    want: T,
) -> std::result::Result<(), String> {
    if got == want {
        Ok(())
    } else {
        Err(format!("{what}: got {got:?}, want {want:?}"))
    }
}

fn s(n: i64) -> Scalar {
    Scalar::from_int(n)
}

fn q(n: i64, d: i64) -> Scalar {
    Scalar::ratio(n, d)
}

fn one_block(lambda: Scalar, a: Vec<Scalar>) -> CanonicalForm {
    CanonicalForm::from_blocks(vec![(lambda, TruncPoly::new(a))]).expect("valid block")
}

fn block_tuple(cf: &CanonicalForm) -> Vec<Scalar> {
    let (l, a) = cf.single_blocks().remove(0);
    std::iter::once(l).chain(a.into_coeffs()).collect()
}

type Check = fn() -> std::result::Result<(), String>;

/// Superposition of `A` into `J` on the `(1, 0, 2, 3)` block, checked
/// against `(1, 0, 2/(1+2 z3), 3/(1+2 z3)^3)`.
pub fn golden_ja(z3: &Scalar) -> std::result::Result<(), String> {
    let cf = one_block(s(1), vec![s(0), s(2), s(3)]);
    let out = apply_T_JA(&cf, z3).map_err(|e| e.to_string())?;
    let den = &s(1) + &(&s(2) * z3);
    let want = vec![s(1), s(0), &s(2) / &den, &s(3) / &den.pow(3)];
    expect_eq("JA block", block_tuple(&out), want)
}

const GOLDEN: [(&str, Check); 8] = [
    ("ja-block", || {
        for z in [q(1, 1), q(-3, 7), q(5, 2), q(0, 1)] {
            golden_ja(&z)?;
        }
        Ok(())
    }),
    ("ej-block", || {
        let cf = one_block(s(1), vec![s(1), s(1), s(1)]);
        let out = apply_T_EJ(&cf, &s(1)).map_err(|e| e.to_string())?;
        expect_eq("EJ", block_tuple(&out), vec![q(1, 2), q(1, 2), s(1), s(8)])
    }),
    ("ea-block", || {
        let cf = one_block(s(1), vec![s(1), s(0), s(1)]);
        let out = apply_T_EA(&cf, &s(1)).map_err(|e| e.to_string())?;
        expect_eq("EA", block_tuple(&out), vec![q(1, 2), q(1, 2), s(0), s(1)])
    }),
    ("rescale", || {
        let cf = one_block(s(1), vec![s(1), s(1), s(1)]);
        let out = apply_rescale(&cf, &s(2), &s(3)).map_err(|e| e.to_string())?;
        expect_eq(
            "rescale",
            block_tuple(&out),
            vec![s(2), s(3), q(3, 2), q(3, 4)],
        )
    }),
    ("mobius", || {
        let l = mobius_2nn(&s(2), &s(1), &s(1), &s(1)).map_err(|e| e.to_string())?;
        expect_eq("mobius", l, q(2, 3))
    }),
    ("orbit-ja", || {
        let a = one_block(s(1), vec![s(0), s(2), s(3)]);
        let b = one_block(s(1), vec![s(0), q(2, 3), q(1, 9)]);
        match orbit_equivalent(&a, &b) {
            OrbitDecision::Equivalent { witness, .. } => {
                let img = apply_params(&a, &witness).map_err(|e| e.to_string())?;
                expect_eq("witness image", img, b)
            }
            d => Err(format!("expected Equivalent, got {d:?}")),
        }
    }),
    ("oracle-ja", || {
        let cf = one_block(s(1), vec![s(0), s(2), s(3)]);
        let sp = SymmetryParams {
            z3: s(1),
            ..SymmetryParams::identity()
        };
        let ops = params_to_ilo(&sp, &CANONICAL_ORDER, cf.n());
        let oracle = oracle_recanonicalize(&cf, &ops).map_err(|e| e.to_string())?;
        let direct = apply_T_JA(&cf, &s(1)).map_err(|e| e.to_string())?;
        expect_eq("oracle vs map", oracle, direct)
    }),
    ("oracle-identity", || {
        let cf = one_block(s(1), vec![s(0), s(2), s(3)]);
        let oracle =
            oracle_recanonicalize(&cf, &IloTriple::identity(3, 3)).map_err(|e| e.to_string())?;
        expect_eq("identity", oracle, cf)
    }),
];

/// Closed forms for one 3-block under `E -> E + z1 J` and `E -> E + z2 A`.
pub fn ej_closed_form(t: &[Scalar; 4], z1: &Scalar) -> Option<[Scalar; 4]> {
    let [l, a0, a1, a2] = t;
    let g = &s(1) + &(z1 * l);
    let gi = g.inv()?;
    Some([
        l * &gi,
        a0 * &gi,
        &(a1 - &(a0 * z1)) + &(&(a1 * z1) * l),
        a2 * &g.pow(3),
    ])
}

pub fn ea_closed_form(t: &[Scalar; 4], z2: &Scalar) -> Option<[Scalar; 4]> {
    let [l, a0, a1, a2] = t;
    let g = &s(1) + &(z2 * a0);
    let h = &g - &(&(a1 * z2) * l);
    let (gi, hi) = (g.inv()?, h.inv()?);
    Some([l * &gi, a0 * &gi, a1 * &hi, &(a2 * &g.pow(3)) * &hi.pow(3)])
}

fn closed_form_trial(rng: &mut ChaCha8Rng) -> Outcome {
    let mut redrawn = 0;
    loop {
        let t: [Scalar; 4] = std::array::from_fn(|_| rand_scalar(rng, DEFAULT_BOUND));
        let z = rand_scalar(rng, DEFAULT_BOUND);
        let cf = one_block(t[0].clone(), t[1..].to_vec());
        let (Some(ej), Some(ea)) = (ej_closed_form(&t, &z), ea_closed_form(&t, &z)) else {
            redrawn += 1;
            continue;
        };
        // the pipeline also needs an invertible Jordan chain after EA
        let (Ok(got_ej), Ok(got_ea)) = (apply_T_EJ(&cf, &z), apply_T_EA(&cf, &z)) else {
            redrawn += 1;
            if redrawn > MAX_REDRAWS {
                return Outcome {
                    profile: vec![],
                    verdict: Err("too many degenerate draws".into()),
                    redrawn,
                };
            }
            continue;
        };
        let verdict = expect_eq("EJ", block_tuple(&got_ej), ej.to_vec())
            .and_then(|_| expect_eq("EA", block_tuple(&got_ea), ea.to_vec()));
        return Outcome {
            profile: profile_label(&cf),
            verdict,
            redrawn,
        };
    }
}

/// `(E, J)` with `T` upper triangular `2 x 2` and random `P`, `Q`: the
/// Jordan data of the image is the Moebius image of the input.
fn mobius_trial(rng: &mut ChaCha8Rng) -> Outcome {
    let mut redrawn = 0;
    loop {
        let derog = rng.gen_bool(0.3);
        let profile = random_profile(rng, 6, 4, derog);
        let spec = JordanSpec::from_pairs(&profile).expect("valid profile");
        let n = spec.n();
        let (t11, t12, t22) = (
            rand_nonzero(rng, DEFAULT_BOUND),
            rand_scalar(rng, DEFAULT_BOUND),
            rand_nonzero(rng, DEFAULT_BOUND),
        );
        let want: std::result::Result<Vec<JordanBlock>, Error> = spec
            .blocks()
            .iter()
            .map(|b| {
                Ok(JordanBlock {
                    lambda: mobius_2nn(&b.lambda, &t11, &t12, &t22)?,
                    size: b.size,
                })
            })
            .collect();
        let Ok(want) = want else {
            redrawn += 1;
            continue;
        };
        let t = Matrix::from_rows(vec![vec![t11, t12], vec![Scalar::zero(), t22]]);
        let ops = IloTriple::new(t, rand_invertible(rng, n, 4), rand_invertible(rng, n, 4))
            .expect("invertible");
        let psi = TensorState::new(vec![Matrix::identity(n), spec.matrix()]).expect("state");
        let verdict = (|| {
            let moved = apply_ilo(&psi, &ops).map_err(|e| e.to_string())?;
            let (reduced, _) = full_rank_reduce(&moved, 0).map_err(|e| e.to_string())?;
            let (_, got) =
                jordan_decompose(&reduced.gammas()[1], &[]).map_err(|e| e.to_string())?;
            expect_eq("Jordan data", got, JordanSpec::new(want).expect("valid"))
        })();
        return Outcome {
            profile: profile.iter().map(|(l, s)| (l.to_string(), *s)).collect(),
            verdict,
            redrawn,
        };
    }
}

fn random_order(rng: &mut ChaCha8Rng) -> Vec<Stage> {
    let mut order = CANONICAL_ORDER.to_vec();
    if rng.gen_bool(0.5) {
        order.shuffle(rng);
    }
    order
}

/// Equality for single-block runs, gauge equivalence inside derogatory runs.
fn same_form(a: &CanonicalForm, b: &CanonicalForm) -> std::result::Result<(), String> {
    if a == b || (!a.is_nonderogatory() && a.same_class(b).is_some()) {
        Ok(())
    } else {
        Err(format!("forms differ: {a:?} vs {b:?}"))
    }
}

fn oracle_trial(rng: &mut ChaCha8Rng) -> Outcome {
    let mut redrawn = 0;
    loop {
        let derog = rng.gen_bool(0.35);
        let profile = random_profile(rng, 6, 4, derog);
        let cf = gen_canonical(&GenConfig::new(rng.gen(), profile)).expect("valid profile");
        let sp = gen_params(rng, 4);
        let order = random_order(rng);
        let mapped = apply_all(&cf, &sp, &order);
        let oracle = oracle_recanonicalize(&cf, &params_to_ilo(&sp, &order, cf.n()));
        let verdict = match (mapped, oracle) {
            (Ok(m), Ok(o)) => same_form(&m, &o),
            (Err(Error::DegenerateParameter(_)), _) => {
                redrawn += 1;
                if redrawn > MAX_REDRAWS {
                    Err("too many degenerate draws".into())
                } else {
                    continue;
                }
            }
            (Ok(_), Err(e)) => Err(format!("oracle failed: {e}")),
            (Err(e), _) => Err(format!("map failed: {e}")),
        };
        return Outcome {
            profile: profile_label(&cf),
            verdict,
            redrawn,
        };
    }
}

/// A form with the same `N` but a different block-size multiset.
pub fn other_shape(rng: &mut ChaCha8Rng, cf: &CanonicalForm) -> Option<CanonicalForm> {
    let n = cf.n();
    let sizes = cf.spec().size_multiset();
    let alt: Vec<usize> = if sizes.len() == n {
        if n == 1 {
            return None;
        }
        std::iter::once(2)
            .chain(std::iter::repeat(1).take(n - 2))
            .collect()
    } else {
        vec![1; n]
    };
    let profile = alt
        .into_iter()
        .enumerate()
        .map(|(k, size)| (Scalar::from_int(k as i64), size))
        .collect();
    gen_canonical(&GenConfig::new(rng.gen(), profile)).ok()
}

/// Orbit soundness on one random form: its image under random parameters
/// must be found Equivalent with a reproducing witness, and a form with
/// other block sizes must be Inequivalent.
pub fn orbit_case(rng: &mut ChaCha8Rng) -> (CanonicalForm, CanonicalForm, usize) {
    let mut redrawn = 0;
    loop {
        let derog = rng.gen_bool(0.25);
        let profile = random_profile(rng, 6, 4, derog);
        let cf = gen_canonical(&GenConfig::new(rng.gen(), profile)).expect("valid profile");
        let sp = gen_params(rng, 4);
        match apply_params(&cf, &sp) {
            Ok(img) => return (cf, img, redrawn),
            Err(_) => redrawn += 1,
        }
    }
}

/// Whether a witness reproduces the target: exactly, or up to the gauge of
/// derogatory runs.
pub fn witness_reproduces(
    cf: &CanonicalForm,
    target: &CanonicalForm,
    witness: &SymmetryParams,
) -> std::result::Result<(), String> {
    let img = apply_params(cf, witness).map_err(|e| e.to_string())?;
    same_form(&img, target)
}

fn orbit_trial(rng: &mut ChaCha8Rng) -> Outcome {
    let (cf, img, redrawn) = orbit_case(rng);
    let verdict = (|| {
        match orbit_equivalent(&cf, &img) {
            OrbitDecision::Equivalent { witness, .. } => witness_reproduces(&cf, &img, &witness)?,
            d => return Err(format!("image not recognized: {d:?}")),
        }
        if let Some(other) = other_shape(rng, &cf) {
            expect_eq(
                "other shape",
                orbit_equivalent(&cf, &other),
                OrbitDecision::Inequivalent,
            )?;
        }
        Ok(())
    })();
    Outcome {
        profile: profile_label(&cf),
        verdict,
        redrawn,
    }
}

/// Every spec with at most three blocks of size at most four, with every
/// pattern of equal eigenvalues.
pub fn commutant_specs() -> Vec<JordanSpec> {
    let mut out = Vec::new();
    for k in 1..=3usize {
        for code in 0..4usize.pow(k as u32) {
            let sizes: Vec<usize> = (0..k)
                .map(|i| code / 4usize.pow(i as u32) % 4 + 1)
                .collect();
            // restricted growth strings label the eigenvalue classes
            let mut labels = vec![vec![0usize]];
            for _ in 1..k {
                labels = labels
                    .into_iter()
                    .flat_map(|l: Vec<usize>| {
                        let top = *l.iter().max().unwrap();
                        (0..=top + 1).map(move |c| {
                            let mut m = l.clone();
                            m.push(c);
                            m
                        })
                    })
                    .collect();
            }
            for l in labels {
                let pairs: Vec<(Scalar, usize)> = l
                    .iter()
                    .zip(&sizes)
                    .map(|(&c, &n)| (Scalar::from_int(c as i64), n))
                    .collect();
                out.push(JordanSpec::from_pairs(&pairs).expect("valid"));
            }
        }
    }
    out
}

/// Basis size against the block formula, commutation, and the kernel of
/// `X -> J X - X J` solved directly through `vec`.
pub fn commutant_trial(spec: &JordanSpec) -> std::result::Result<(), String> {
    let j = spec.matrix();
    let n = spec.n();
    let basis = commutant_basis(spec);
    let b = spec.blocks();
    let want: usize = b
        .iter()
        .flat_map(|x| b.iter().map(move |y| (x, y)))
        .filter(|(x, y)| x.lambda == y.lambda)
        .map(|(x, y)| x.size.min(y.size))
        .sum();
    expect_eq("basis size", basis.len(), want)?;
    if let Some(k) = basis.iter().position(|x| !x.commutator(&j).is_zero()) {
        return Err(format!("basis element {k} does not commute"));
    }
    let id = Matrix::identity(n);
    let op = &id.kron(&j) - &j.transpose().kron(&id);
    expect_eq("kernel dimension", n * n - op.rank(), want)?;
    let cols: Vec<Vec<Scalar>> = basis.iter().map(Matrix::vec).collect();
    if !cols.is_empty() {
        expect_eq(
            "basis rank",
            Matrix::from_columns(n * n, &cols).rank(),
            want,
        )?;
    }
    Ok(())
}

fn nilpoly_trial(rng: &mut ChaCha8Rng, index: usize) -> Outcome {
    let order = 2 + index % 5;
    let verdict = (|| {
        let mut f: Vec<Scalar> = (0..order)
            .map(|_| rand_scalar(rng, DEFAULT_BOUND))
            .collect();
        f[0] = rand_nonzero(rng, DEFAULT_BOUND);
        f[1] = rand_nonzero(rng, DEFAULT_BOUND);
        let f = TruncPoly::new(f);
        let inv = f.reciprocal().map_err(|e| e.to_string())?;
        expect_eq(
            "f * 1/f",
            f.mul(&inv).map_err(|e| e.to_string())?,
            TruncPoly::one(order),
        )?;
        // independent: inverse of the Toeplitz matrix
        let tinv = f.to_toeplitz().inverse().map_err(|e| e.to_string())?;
        expect_eq("Toeplitz inverse", inv.to_toeplitz(), tinv)?;
        let g = f.shifted_reversion().map_err(|e| e.to_string())?;
        let mut h = f.clone().into_coeffs();
        h[0] = Scalar::zero();
        let h = TruncPoly::new(h);
        expect_eq(
            "g(f - f0)",
            g.compose(&h).map_err(|e| e.to_string())?,
            TruncPoly::x(order),
        )?;
        expect_eq(
            "(f - f0)(g)",
            h.compose(&g).map_err(|e| e.to_string())?,
            TruncPoly::x(order),
        )?;
        // the series y(x) solving lambda' + y/(1+z l)^2 - z y^2/(1+z l)^3 = lambda' + x
        let (z, l) = (
            rand_scalar(rng, DEFAULT_BOUND),
            rand_scalar(rng, DEFAULT_BOUND),
        );
        let w = &s(1) + &(&z * &l);
        if let Some(wi) = w.inv() {
            let lam = &l * &wi;
            let fj = TruncPoly::new(vec![lam, wi.pow(2), -(&z * &wi.pow(3))]);
            let y = fj.shifted_reversion().map_err(|e| e.to_string())?;
            expect_eq(
                "series",
                y,
                TruncPoly::new(vec![s(0), w.pow(2), &z * &w.pow(3)]),
            )?;
        }
        Ok(())
    })();
    Outcome {
        profile: vec![(format!("order {order}"), order)],
        verdict,
        redrawn: 0,
    }
}

fn partitioned(lambda_prime: Matrix, beta: Matrix) -> PartitionedForm {
    let m = lambda_prime.rows();
    PartitionedForm {
        n: 0,
        m,
        i: m - lambda_prime.rank(),
        gamma_part: Vec::new(),
        beta_part: vec![beta],
        lambda_prime,
        ops: IloTriple::identity(2, m),
    }
}

const BETA: [(&str, Check); 3] = [
    ("nilpotent-beta", || {
        let pf = partitioned(
            Matrix::diag(&[s(1), s(0)]),
            Matrix::from_ints(&[[0, 1], [0, 0]]),
        );
        expect_eq("predicate", beta_canonical_check(&pf, 0), true)
    }),
    ("diagonal-beta", || {
        let pf = partitioned(Matrix::diag(&[s(1), s(0)]), Matrix::diag(&[s(0), s(1)]));
        expect_eq("predicate", beta_canonical_check(&pf, 0), false)
    }),
    ("split-state", || {
        let psi = TensorState::new(vec![
            Matrix::diag(&[s(1), s(1), s(0)]),
            Matrix::from_ints(&[[5, 0, 0], [0, 0, 1], [0, 0, 0]]),
        ])
        .map_err(|e| e.to_string())?;
        let pf = crate::canon::nonfull_rank_split(&psi, 0).map_err(|e| e.to_string())?;
        expect_eq("(n, m, i)", (pf.n, pf.m, pf.i), (1, 2, 1))?;
        expect_eq("predicate", beta_canonical_check(&pf, 0), true)
    }),
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_is_deterministic() {
        let cfg = GenConfig::new(42, vec![(s(1), 3)]);
        assert_eq!(gen_canonical(&cfg).unwrap(), gen_canonical(&cfg).unwrap());
        let one = gen_canonical(&GenConfig::new(7, vec![(s(0), 1)])).unwrap();
        assert_eq!(one.n(), 1);
        let bad = GenConfig {
            n: 4,
            ..GenConfig::new(1, vec![(s(0), 2)])
        };
        assert!(matches!(gen_canonical(&bad), Err(Error::BadProfile(_))));
    }

    #[test]
    fn derogatory_grid_lies_in_commutant() {
        let cfg = GenConfig::new(3, vec![(s(1), 2), (s(1), 2)]);
        let cf = gen_canonical(&cfg).unwrap();
        assert!(!cf.is_nonderogatory());
        let basis = commutant_basis(&cf.spec());
        let cols: Vec<Vec<Scalar>> = basis.iter().map(Matrix::vec).collect();
        assert!(Matrix::from_columns(16, &cols)
            .solve(&cf.a_matrix().vec())
            .is_some());
    }

    #[test]
    fn ilo_families() {
        let cfg = GenConfig::new(9, vec![(s(0), 2), (s(1), 1)]);
        let g = gen_ilo(&cfg, IloFamily::General);
        assert_eq!(g, gen_ilo(&cfg, IloFamily::General));
        let u = gen_ilo(&cfg, IloFamily::UpperUnitriangularT);
        assert!(
            u.t[(0, 0)].is_one()
                && u.t[(1, 0)].is_zero()
                && u.t[(2, 0)].is_zero()
                && u.t[(2, 1)].is_zero()
        );
    }

    #[test]
    fn commutant_spec_enumeration() {
        // 4 + 16 * 2 + 64 * 5
        assert_eq!(commutant_specs().len(), 356);
    }

    #[test]
    fn small_suites_pass() {
        for suite in [Suite::Golden, Suite::Beta] {
            let r = run_suite(suite, 0, None);
            assert!(r.ok(), "{}", r.json_lines());
        }
    }
}
