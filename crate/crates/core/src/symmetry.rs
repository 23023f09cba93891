//! Parametric symmetries of canonical forms.
//!
//! An upper-triangular `T` acting on the first subsystem sends `(E, J, A)`
//! to `(E + t12 J + t13 A, t22 J + t23 A, t33 A)`. Re-normalizing the first
//! slot and bringing the second back to Jordan form gives a new canonical
//! form. On a single block all three slots are polynomials in `x = J_n(0)`,
//! so the whole computation happens in the truncated polynomial algebra.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::canon::{commuting_pair_canonical, CanonicalForm, Run};
use crate::error::{Error, Result};
use crate::exactmat::{
    eigenvalues_in_field, poly_gcd, poly_roots_partial, JordanBlock, JordanSpec, Matrix, Scalar,
};
use crate::nilpoly::{PolyGrid, TruncPoly};

mod groebner;
mod ideal;

/// Parameters of the effective first-subsystem operator: three
/// superposition coefficients and the two diagonal rescalings.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SymmetryParams {
    pub z1: Scalar,
    pub z2: Scalar,
    pub z3: Scalar,
    pub d2: Scalar,
    pub d3: Scalar,
}

impl Default for SymmetryParams {
    fn default() -> Self {
        Self::identity()
    }
}

impl SymmetryParams {
    pub fn identity() -> Self {
        Self {
            z1: Scalar::zero(),
            z2: Scalar::zero(),
            z3: Scalar::zero(),
            d2: Scalar::one(),
            d3: Scalar::one(),
        }
    }

    pub fn new(z1: Scalar, z2: Scalar, z3: Scalar, d2: Scalar, d3: Scalar) -> Result<Self> {
        if d2.is_zero() || d3.is_zero() {
            return Err(Error::ZeroScale);
        }
        Ok(Self { z1, z2, z3, d2, d3 })
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity()
    }

    /// The operator realized by applying the stages in `order`.
    pub fn to_t(&self, order: &[Stage]) -> UpperT {
        let mut t = UpperT::identity();
        for s in order {
            t = t.then(&s.operator(self));
        }
        t
    }
}

impl fmt::Display for SymmetryParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "z1={} z2={} z3={} d2={} d3={}",
            self.z1, self.z2, self.z3, self.d2, self.d3
        )
    }
}

/// One elementary factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Rescale,
    Ja,
    Ea,
    Ej,
}

impl Stage {
    fn operator(self, sp: &SymmetryParams) -> UpperT {
        let mut t = UpperT::identity();
        match self {
            Stage::Rescale => {
                t.t22 = sp.d2.clone();
                t.t33 = sp.d3.clone();
            }
            Stage::Ja => t.t23 = sp.z3.clone(),
            Stage::Ea => t.t13 = sp.z2.clone(),
            Stage::Ej => t.t12 = sp.z1.clone(),
        }
        t
    }

    pub fn parse(s: &str) -> Option<Stage> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rescale" | "d" => Some(Stage::Rescale),
            "ja" | "z3" => Some(Stage::Ja),
            "ea" | "z2" => Some(Stage::Ea),
            "ej" | "z1" => Some(Stage::Ej),
            _ => None,
        }
    }
}

/// Rescale first, then the three superpositions.
pub const CANONICAL_ORDER: [Stage; 4] = [Stage::Rescale, Stage::Ja, Stage::Ea, Stage::Ej];

/// Upper-triangular `3 x 3` operator normalized to `t11 = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct UpperT {
    pub t12: Scalar,
    pub t13: Scalar,
    pub t22: Scalar,
    pub t23: Scalar,
    pub t33: Scalar,
}

impl UpperT {
    pub fn identity() -> Self {
        Self {
            t12: Scalar::zero(),
            t13: Scalar::zero(),
            t22: Scalar::one(),
            t23: Scalar::zero(),
            t33: Scalar::one(),
        }
    }

    pub fn to_matrix(&self) -> Matrix {
        let z = Scalar::zero;
        Matrix::from_rows(vec![
            vec![Scalar::one(), self.t12.clone(), self.t13.clone()],
            vec![z(), self.t22.clone(), self.t23.clone()],
            vec![z(), z(), self.t33.clone()],
        ])
    }

    /// Normalizes an upper-triangular matrix with `t11 != 0`.
    pub fn from_matrix(m: &Matrix) -> Result<Self> {
        if m.rows() != 3 || m.cols() != 3 {
            return Err(Error::DimensionMismatch("operator must be 3 x 3".into()));
        }
        if ![(1, 0), (2, 0), (2, 1)].iter().all(|&ij| m[ij].is_zero()) {
            return Err(Error::DimensionMismatch(
                "operator is not upper triangular".into(),
            ));
        }
        let inv = m[(0, 0)].inv().ok_or(Error::SingularMatrix)?;
        Ok(Self {
            t12: &m[(0, 1)] * &inv,
            t13: &m[(0, 2)] * &inv,
            t22: &m[(1, 1)] * &inv,
            t23: &m[(1, 2)] * &inv,
            t33: &m[(2, 2)] * &inv,
        })
    }

    pub fn is_invertible(&self) -> bool {
        !self.t22.is_zero() && !self.t33.is_zero()
    }

    /// `next * self`: apply `self`, then `next`.
    pub fn then(&self, next: &UpperT) -> UpperT {
        UpperT::from_matrix(&(&next.to_matrix() * &self.to_matrix())).expect("upper triangular")
    }

    pub fn inverse(&self) -> Result<UpperT> {
        UpperT::from_matrix(&self.to_matrix().inverse()?)
    }

    /// Parameters whose canonical-order product is this operator.
    pub fn to_params(&self) -> Result<SymmetryParams> {
        if !self.is_invertible() {
            return Err(Error::ZeroScale);
        }
        let (d2, d3) = (self.t22.clone(), self.t33.clone());
        let z3 = &self.t23 / &d3;
        let z1 = &self.t12 / &d2;
        let z2 = &(&self.t13 / &d3) - &(&z1 * &z3);
        SymmetryParams::new(z1, z2, z3, d2, d3)
    }

    fn as_vec(&self) -> Vec<Scalar> {
        vec![
            self.t12.clone(),
            self.t13.clone(),
            self.t22.clone(),
            self.t23.clone(),
            self.t33.clone(),
        ]
    }

    fn from_vec(v: &[Scalar]) -> Self {
        Self {
            t12: v[0].clone(),
            t13: v[1].clone(),
            t22: v[2].clone(),
            t23: v[3].clone(),
            t33: v[4].clone(),
        }
    }
}

/// One block through the polynomial pipeline.
fn block_map(lambda: &Scalar, a: &TruncPoly, t: &UpperT) -> Result<(Scalar, TruncPoly)> {
    let n = a.order();
    let j = TruncPoly::affine(lambda.clone(), n);
    let g1 = TruncPoly::one(n)
        .add(&j.scale(&t.t12))?
        .add(&a.scale(&t.t13))?;
    if g1.coeff(0).is_zero() {
        return Err(Error::DegenerateParameter(format!(
            "1 + t12*lambda + t13*a0 vanishes on the block at lambda = {lambda}"
        )));
    }
    let r = g1.reciprocal()?;
    let jp = j.scale(&t.t22).add(&a.scale(&t.t23))?.mul(&r)?;
    let ap = a.scale(&t.t33).mul(&r)?;
    let lambda_p = jp.coeff(0);
    if n >= 2 && jp.coeff(1).is_zero() {
        return Err(Error::DegenerateParameter(format!(
            "block of size {n} at lambda = {lambda} loses its Jordan chain"
        )));
    }
    let g = jp.shifted_reversion()?;
    Ok((lambda_p, ap.compose(&g)?))
}

/// Joint generalized eigenspace of `(J, A)`: its eigenvalue pair and the
/// Jordan sizes of `J` on it. `jet` is `A` as a polynomial when `J` has a
/// single block there.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Atom {
    pub lambda: Scalar,
    pub mu: Scalar,
    pub sizes: Vec<usize>,
    pub jet: Option<TruncPoly>,
}

fn run_spec(lambda: &Scalar, sizes: &[usize]) -> JordanSpec {
    JordanSpec::new(
        sizes
            .iter()
            .map(|&size| JordanBlock {
                lambda: lambda.clone(),
                size,
            })
            .collect(),
    )
    .expect("positive sizes")
}

fn restrict(m: &Matrix, basis: &Matrix) -> Result<Matrix> {
    let img = m * basis;
    let cols: Option<Vec<Vec<Scalar>>> = (0..img.cols())
        .map(|j| basis.solve(&img.column(j)))
        .collect();
    let cols = cols.ok_or_else(|| Error::DimensionMismatch("subspace is not invariant".into()))?;
    Ok(Matrix::from_columns(basis.cols(), &cols))
}

fn run_atoms(run: &Run) -> Result<Vec<Atom>> {
    if run.grid.is_single() {
        let a = run.grid.entry(0, 0).clone();
        return Ok(vec![Atom {
            lambda: run.lambda.clone(),
            mu: a.coeff(0),
            sizes: vec![a.order()],
            jet: Some(a),
        }]);
    }
    let jr = run_spec(&run.lambda, run.grid.sizes()).matrix();
    let ar = run.grid.to_matrix();
    let dim = ar.rows();
    let mut mus = eigenvalues_in_field(&ar, &[])?;
    mus.dedup();
    let mut out = Vec::new();
    for mu in mus {
        let shifted = &ar - &Matrix::scalar(dim, &mu);
        let basis = Matrix::from_columns(dim, &shifted.pow(dim as u32).nullspace());
        let rj = restrict(&jr, &basis)?;
        let ra = restrict(&ar, &basis)?;
        let (cf, _) = commuting_pair_canonical(&rj, &ra, &[run.lambda.clone()])?;
        let sizes = cf.spec().size_multiset();
        let jet = (sizes.len() == 1).then(|| cf.runs()[0].grid.entry(0, 0).clone());
        out.push(Atom {
            lambda: run.lambda.clone(),
            mu,
            sizes,
            jet,
        });
    }
    Ok(out)
}

/// All atoms of a canonical form, run by run.
pub fn atoms(cf: &CanonicalForm) -> Result<Vec<Atom>> {
    let mut out = Vec::new();
    for r in cf.runs() {
        out.extend(run_atoms(r)?);
    }
    Ok(out)
}

fn map_point(t: &UpperT, lambda: &Scalar, mu: &Scalar) -> Option<(Scalar, Scalar)> {
    let den = &(&Scalar::one() + &(&t.t12 * lambda)) + &(&t.t13 * mu);
    let inv = den.inv()?;
    let l = &(&(&t.t22 * lambda) + &(&t.t23 * mu)) * &inv;
    let m = &(&t.t33 * mu) * &inv;
    Some((l, m))
}

/// A derogatory run through explicit matrices of the run's size.
fn run_map(run: &Run, t: &UpperT) -> Result<Vec<(Scalar, PolyGrid)>> {
    let jr = run_spec(&run.lambda, run.grid.sizes()).matrix();
    let ar = run.grid.to_matrix();
    let dim = ar.rows();
    let g1 = &(&Matrix::identity(dim) + &jr.scale(&t.t12)) + &ar.scale(&t.t13);
    let g1inv = g1.inverse().map_err(|_| {
        Error::DegenerateParameter(format!(
            "1 + t12*J + t13*A is singular on the run at lambda = {}",
            run.lambda
        ))
    })?;
    let a2 = &(&jr.scale(&t.t22) + &ar.scale(&t.t23)) * &g1inv;
    let a3 = &ar.scale(&t.t33) * &g1inv;
    let before = run_atoms(run)?;
    let hints: Vec<Scalar> = before
        .iter()
        .filter_map(|a| map_point(t, &a.lambda, &a.mu).map(|p| p.0))
        .collect();
    let (cf, _) = commuting_pair_canonical(&a2, &a3, &hints)?;
    let after = atoms(&cf)?;
    for atom in &before {
        let (l, m) = map_point(t, &atom.lambda, &atom.mu).expect("checked invertible");
        let image = after.iter().find(|b| b.lambda == l && b.mu == m);
        if image.map(|b| &b.sizes) != Some(&atom.sizes) {
            return Err(Error::DegenerateParameter(format!(
                "Jordan structure changes on the run at lambda = {}",
                run.lambda
            )));
        }
    }
    Ok(cf
        .runs()
        .iter()
        .map(|r| (r.lambda.clone(), r.grid.clone()))
        .collect())
}

/// Canonical form of `(E + t12 J + t13 A, t22 J + t23 A, t33 A)`.
pub fn apply_upper(cf: &CanonicalForm, t: &UpperT) -> Result<CanonicalForm> {
    if !t.is_invertible() {
        return Err(Error::ZeroScale);
    }
    let mut parts = Vec::new();
    for run in cf.runs() {
        if run.grid.is_single() {
            let (l, a) = block_map(&run.lambda, run.grid.entry(0, 0), t)?;
            parts.push((l, PolyGrid::single(a)));
        } else {
            parts.extend(run_map(run, t)?);
        }
    }
    CanonicalForm::from_parts(parts)
}

/// Superposition of `J` into the first slot.
#[allow(non_snake_case)]
pub fn apply_T_EJ(cf: &CanonicalForm, z1: &Scalar) -> Result<CanonicalForm> {
    apply_upper(
        cf,
        &Stage::Ej.operator(&SymmetryParams {
            z1: z1.clone(),
            ..Default::default()
        }),
    )
}

/// Superposition of `A` into the first slot.
#[allow(non_snake_case)]
pub fn apply_T_EA(cf: &CanonicalForm, z2: &Scalar) -> Result<CanonicalForm> {
    apply_upper(
        cf,
        &Stage::Ea.operator(&SymmetryParams {
            z2: z2.clone(),
            ..Default::default()
        }),
    )
}

/// Superposition of `A` into the second slot.
#[allow(non_snake_case)]
pub fn apply_T_JA(cf: &CanonicalForm, z3: &Scalar) -> Result<CanonicalForm> {
    apply_upper(
        cf,
        &Stage::Ja.operator(&SymmetryParams {
            z3: z3.clone(),
            ..Default::default()
        }),
    )
}

pub fn apply_rescale(cf: &CanonicalForm, d2: &Scalar, d3: &Scalar) -> Result<CanonicalForm> {
    if d2.is_zero() || d3.is_zero() {
        return Err(Error::ZeroScale);
    }
    let sp = SymmetryParams {
        d2: d2.clone(),
        d3: d3.clone(),
        ..Default::default()
    };
    apply_upper(cf, &Stage::Rescale.operator(&sp))
}

/// The stages in `order`, each re-canonicalizing.
pub fn apply_all(
    cf: &CanonicalForm,
    sp: &SymmetryParams,
    order: &[Stage],
) -> Result<CanonicalForm> {
    if sp.d2.is_zero() || sp.d3.is_zero() {
        return Err(Error::ZeroScale);
    }
    let mut cur = cf.clone();
    for s in order {
        cur = match s {
            Stage::Rescale => apply_rescale(&cur, &sp.d2, &sp.d3)?,
            Stage::Ja => apply_T_JA(&cur, &sp.z3)?,
            Stage::Ea => apply_T_EA(&cur, &sp.z2)?,
            Stage::Ej => apply_T_EJ(&cur, &sp.z1)?,
        };
    }
    Ok(cur)
}

/// [`apply_all`] in [`CANONICAL_ORDER`].
pub fn apply_params(cf: &CanonicalForm, sp: &SymmetryParams) -> Result<CanonicalForm> {
    apply_all(cf, sp, &CANONICAL_ORDER)
}

/// `t22 lambda / (t11 + t12 lambda)`: the eigenvalue map of `(E, J)` tuples.
pub fn mobius_2nn(lambda: &Scalar, t11: &Scalar, t12: &Scalar, t22: &Scalar) -> Result<Scalar> {
    if (t11 * t22).is_zero() {
        return Err(Error::DegenerateParameter("t11 * t22 = 0".into()));
    }
    let den = t11 + &(t12 * lambda);
    if den.is_zero() {
        return Err(Error::DegenerateParameter("t11 + t12 * lambda = 0".into()));
    }
    Ok(&(t22 * lambda) / &den)
}

/// Result of the orbit search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OrbitDecision {
    /// `apply_params(cf1, witness)` reproduces `cf2`. `matching[k]` is the
    /// atom of `cf2` that atom `k` of `cf1` lands on.
    Equivalent {
        witness: SymmetryParams,
        t: UpperT,
        matching: Vec<usize>,
    },
    /// No operator in the group generated by non-degenerate elementary
    /// maps relates the two forms.
    Inequivalent,
    Undecided {
        reason: String,
    },
}

impl OrbitDecision {
    pub fn exit_code(&self) -> i32 {
        match self {
            OrbitDecision::Equivalent { .. } => 0,
            OrbitDecision::Inequivalent => 1,
            OrbitDecision::Undecided { .. } => 2,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            OrbitDecision::Equivalent { .. } => "Equivalent",
            OrbitDecision::Inequivalent => "Inequivalent",
            OrbitDecision::Undecided { .. } => "Undecided",
        }
    }
}

const MAX_MATCHINGS: usize = 40_320;
const FAMILY_SAMPLES: usize = 6;
const LINE_TRIES: usize = 4;

/// Outcome of one direction of the search.
enum Search {
    Found(UpperT, Vec<usize>),
    Exhausted,
    Incomplete(String),
}

/// Decides whether `cf2` lies in the orbit of `cf1`.
///
/// Necessary conditions linear in `T` come from every matched pair of atoms
/// (where the eigenvalue pair goes, and for single blocks the tangent
/// direction). When these leave freedom, the first single block of size at
/// least three in the target fixes the rest: operators sending its point and
/// tangent to the right place form a two-dimensional torus, on which the
/// higher coefficients transform monomially. Every candidate is checked by
/// applying it. The search runs in both directions so the answer is
/// symmetric.
pub fn orbit_equivalent(cf1: &CanonicalForm, cf2: &CanonicalForm) -> OrbitDecision {
    if cf1.n() != cf2.n() || cf1.spec().size_multiset() != cf2.spec().size_multiset() {
        return OrbitDecision::Inequivalent;
    }
    if let Some(d) = finish(cf1, cf2, UpperT::identity(), identity_matching(cf1)) {
        return d;
    }
    let forward = search(cf1, cf2);
    if let Search::Found(t, matching) = &forward {
        if let Some(d) = finish(cf1, cf2, t.clone(), matching.clone()) {
            return d;
        }
    }
    let backward = search(cf2, cf1);
    if let Search::Found(t, matching) = &backward {
        if let Ok(tinv) = t.inverse() {
            let mut inv = vec![0; matching.len()];
            for (k, &m) in matching.iter().enumerate() {
                inv[m] = k;
            }
            if let Some(d) = finish(cf1, cf2, tinv, inv) {
                return d;
            }
        }
    }
    match (forward, backward) {
        (Search::Exhausted, _) | (_, Search::Exhausted) => OrbitDecision::Inequivalent,
        (Search::Incomplete(r), _) | (_, Search::Incomplete(r)) => {
            OrbitDecision::Undecided { reason: r }
        }
        _ => OrbitDecision::Undecided {
            reason: "candidate failed final verification".into(),
        },
    }
}

fn identity_matching(cf: &CanonicalForm) -> Vec<usize> {
    (0..atoms(cf).map_or(0, |a| a.len())).collect()
}

fn finish(
    cf1: &CanonicalForm,
    cf2: &CanonicalForm,
    t: UpperT,
    matching: Vec<usize>,
) -> Option<OrbitDecision> {
    let witness = t.to_params().ok()?;
    let img = apply_params(cf1, &witness).ok()?;
    img.same_class(cf2)?;
    Some(OrbitDecision::Equivalent {
        witness,
        t,
        matching,
    })
}

enum Check {
    Match,
    NoMatch,
    Degenerate,
}

fn check(cf1: &CanonicalForm, cf2: &CanonicalForm, t: &UpperT) -> Check {
    if !t.is_invertible() {
        return Check::NoMatch;
    }
    match apply_upper(cf1, t) {
        Ok(img) => {
            if img.same_class(cf2).is_none() {
                Check::NoMatch
            } else if t.to_params().and_then(|sp| apply_params(cf1, &sp)).is_ok() {
                Check::Match
            } else {
                // right group element, but a stage passes through a pole
                Check::Degenerate
            }
        }
        Err(_) => Check::Degenerate,
    }
}

/// Linear conditions on `(t12, t13, t22, t23, t33)`.
struct LinearSystem {
    rows: Vec<[Scalar; 5]>,
    rhs: Vec<Scalar>,
}

impl LinearSystem {
    fn new() -> Self {
        Self {
            rows: Vec::new(),
            rhs: Vec::new(),
        }
    }

    fn push(&mut self, row: [Scalar; 5], rhs: Scalar) {
        self.rows.push(row);
        self.rhs.push(rhs);
    }

    fn add_pair(&mut self, a: &Atom, b: &Atom) {
        let (l, m, lp, mp) = (&a.lambda, &a.mu, &b.lambda, &b.mu);
        self.push([l * lp, m * lp, -l, -m, Scalar::zero()], -lp);
        self.push([l * mp, m * mp, Scalar::zero(), Scalar::zero(), -m], -mp);
        if let (Some(f), Some(g)) = (&a.jet, &b.jet) {
            if f.order() >= 2 && f.order() == g.order() {
                let a1 = f.coeff(1);
                let a1p = g.coeff(1);
                let k = &g.coeff(0) - &(lp * &a1p);
                self.push(
                    [k.clone(), &a1 * &k, a1p.clone(), &a1 * &a1p, -&a1],
                    Scalar::zero(),
                );
            }
        }
    }

    fn matrix(&self) -> Matrix {
        Matrix::from_rows(self.rows.iter().map(|r| r.to_vec()).collect())
    }

    /// Particular solution and kernel basis.
    fn solve(&self) -> Option<(Vec<Scalar>, Vec<Vec<Scalar>>)> {
        let a = self.matrix();
        let x = a.solve(&self.rhs)?;
        Some((x, a.nullspace()))
    }
}

fn matchings(a1: &[Atom], a2: &[Atom]) -> Option<Vec<Vec<usize>>> {
    // group indices by size type
    let mut out: Vec<Vec<usize>> = vec![vec![usize::MAX; a1.len()]];
    let mut used_types: Vec<&Vec<usize>> = Vec::new();
    for atom in a1 {
        if used_types.contains(&&atom.sizes) {
            continue;
        }
        used_types.push(&atom.sizes);
        let src: Vec<usize> = (0..a1.len())
            .filter(|&k| a1[k].sizes == atom.sizes)
            .collect();
        let dst: Vec<usize> = (0..a2.len())
            .filter(|&k| a2[k].sizes == atom.sizes)
            .collect();
        if src.len() != dst.len() {
            return Some(Vec::new());
        }
        let perms = permutations(dst.len());
        if out.len().saturating_mul(perms.len()) > MAX_MATCHINGS {
            return None;
        }
        let mut next = Vec::new();
        for base in &out {
            for p in &perms {
                let mut m = base.clone();
                for (i, &s) in src.iter().enumerate() {
                    m[s] = dst[p[i]];
                }
                next.push(m);
            }
        }
        out = next;
    }
    if a2.len() != a1.len() {
        return Some(Vec::new());
    }
    Some(out)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

fn search(cf1: &CanonicalForm, cf2: &CanonicalForm) -> Search {
    let (at1, at2) = match (atoms(cf1), atoms(cf2)) {
        (Ok(a), Ok(b)) => (a, b),
        _ => return Search::Incomplete("joint eigenvalues leave the field".into()),
    };
    let Some(all) = matchings(&at1, &at2) else {
        return Search::Incomplete("too many atom matchings".into());
    };
    let mut incomplete: Option<String> = None;
    let mut rng = ChaCha8Rng::seed_from_u64(0x0b17);
    for m in all {
        let mut sys = LinearSystem::new();
        for (k, &j) in m.iter().enumerate() {
            sys.add_pair(&at1[k], &at2[j]);
        }
        let Some((x0, kernel)) = sys.solve() else {
            continue;
        };
        match solve_matching(cf1, cf2, &at1, &at2, &m, &sys, &x0, &kernel, &mut rng) {
            Search::Found(t, _) => return Search::Found(t, m),
            Search::Exhausted => {}
            Search::Incomplete(r) => incomplete = Some(r),
        }
    }
    match incomplete {
        Some(r) => Search::Incomplete(r),
        None => Search::Exhausted,
    }
}

fn combine(x0: &[Scalar], kernel: &[Vec<Scalar>], s: &[Scalar]) -> Vec<Scalar> {
    let mut x = x0.to_vec();
    for (v, c) in kernel.iter().zip(s) {
        for (xi, vi) in x.iter_mut().zip(v) {
            *xi += &(c * vi);
        }
    }
    x
}

fn random_member(x0: &[Scalar], kernel: &[Vec<Scalar>], rng: &mut ChaCha8Rng) -> UpperT {
    let s: Vec<Scalar> = kernel
        .iter()
        .map(|_| Scalar::from_int(rng.gen_range(-40..=40)))
        .collect();
    UpperT::from_vec(&combine(x0, kernel, &s))
}

fn judge(
    cf1: &CanonicalForm,
    cf2: &CanonicalForm,
    m: &[usize],
    cands: Vec<UpperT>,
    complete: bool,
    reason: &str,
) -> Search {
    let mut degenerate = false;
    for t in cands {
        match check(cf1, cf2, &t) {
            Check::Match => return Search::Found(t, m.to_vec()),
            Check::NoMatch => {}
            Check::Degenerate => degenerate = true,
        }
    }
    if degenerate {
        Search::Incomplete("a candidate operator is degenerate".into())
    } else if complete {
        Search::Exhausted
    } else {
        Search::Incomplete(reason.into())
    }
}

/// The direct searches first; when they cannot settle the matching, the
/// ideal conditions of every matched atom are solved exactly.
#[allow(clippy::too_many_arguments)]
fn solve_matching(
    cf1: &CanonicalForm,
    cf2: &CanonicalForm,
    at1: &[Atom],
    at2: &[Atom],
    m: &[usize],
    sys: &LinearSystem,
    x0: &[Scalar],
    kernel: &[Vec<Scalar>],
    rng: &mut ChaCha8Rng,
) -> Search {
    let fast = solve_matching_fast(cf1, cf2, at1, at2, m, sys, x0, kernel, rng);
    let Search::Incomplete(reason) = fast else {
        return fast;
    };
    let (j1, a1, j2, a2) = (
        cf1.j_matrix(),
        cf1.a_matrix(),
        cf2.j_matrix(),
        cf2.a_matrix(),
    );
    match ideal::ideal_candidates([(&j1, &a1), (&j2, &a2)], at1, at2, m, x0, kernel, rng) {
        Some((cands, complete)) => match judge(cf1, cf2, m, cands, complete, &reason) {
            Search::Incomplete(_) => Search::Incomplete(reason),
            other => other,
        },
        None => Search::Incomplete(reason),
    }
}

#[allow(clippy::too_many_arguments)]
fn solve_matching_fast(
    cf1: &CanonicalForm,
    cf2: &CanonicalForm,
    at1: &[Atom],
    at2: &[Atom],
    m: &[usize],
    sys: &LinearSystem,
    x0: &[Scalar],
    kernel: &[Vec<Scalar>],
    rng: &mut ChaCha8Rng,
) -> Search {
    if kernel.is_empty() {
        let t = UpperT::from_vec(x0);
        return match check(cf1, cf2, &t) {
            Check::Match => Search::Found(t, m.to_vec()),
            Check::NoMatch => Search::Exhausted,
            Check::Degenerate => Search::Incomplete("unique candidate is degenerate".into()),
        };
    }
    let pairs: Vec<(&Atom, &Atom)> = m
        .iter()
        .enumerate()
        .filter(|&(k, &j)| at1[k].jet.is_some() && at2[j].jet.is_some())
        .map(|(k, &j)| (&at1[k], &at2[j]))
        .collect();
    if kernel.len() == 1 {
        let (cands, complete) = line_candidates(&pairs, x0, &kernel[0], rng);
        return judge(
            cf1,
            cf2,
            m,
            cands,
            complete,
            "solution line is not pinned down",
        );
    }

    let mut anchors: Vec<usize> = (0..at2.len())
        .filter(|&k| at2[k].jet.as_ref().is_some_and(|j| j.order() >= 3))
        .collect();
    anchors.sort_by_key(|&k| at2[k].mu.is_zero());
    let mut last = String::from("no anchor block of size >= 3");
    for k2 in anchors {
        let k1 = m
            .iter()
            .position(|&j| j == k2)
            .expect("matching is a bijection");
        let res = if at2[k2].mu.is_zero() {
            line_anchor_candidates(&at1[k1], &at2[k2], sys, x0, kernel, rng)
        } else {
            torus_candidates(&at1[k1], &at2[k2], sys, x0, kernel, rng)
        };
        match res {
            Ok((cands, complete)) => {
                match judge(
                    cf1,
                    cf2,
                    m,
                    cands,
                    complete,
                    "anchor block leaves a continuous family",
                ) {
                    Search::Incomplete(r) => {
                        last = r;
                        break;
                    }
                    other => return other,
                }
            }
            Err(r) => last = r,
        }
    }
    if kernel.len() == 2 {
        let (cands, complete) = plane_candidates(&pairs, x0, &kernel[0], &kernel[1], rng);
        return judge(
            cf1,
            cf2,
            m,
            cands,
            complete,
            "solution plane is not pinned down",
        );
    }
    for attempt in 0..LINE_TRIES {
        let base = if attempt == 0 {
            x0.to_vec()
        } else {
            random_member(x0, kernel, rng).as_vec()
        };
        let zero = vec![Scalar::zero(); 5];
        let d1 = random_member(&zero, kernel, rng).as_vec();
        let d2 = random_member(&zero, kernel, rng).as_vec();
        let (cands, _) = plane_candidates(&pairs, &base, &d1, &d2, rng);
        if let found @ Search::Found(..) = judge(cf1, cf2, m, cands, false, "") {
            return found;
        }
    }
    for attempt in 0..LINE_TRIES {
        let base = if attempt == 0 {
            x0.to_vec()
        } else {
            random_member(x0, kernel, rng).as_vec()
        };
        let dir = random_member(&vec![Scalar::zero(); 5], kernel, rng).as_vec();
        if dir.iter().all(Scalar::is_zero) {
            continue;
        }
        let (cands, _) = line_candidates(&pairs, &base, &dir, rng);
        if let found @ Search::Found(..) = judge(cf1, cf2, m, cands, false, "") {
            return found;
        }
    }
    Search::Incomplete(last)
}

/// `E = t33 f g1^(n-2) - sum g_k N^k g1^(n-1-k)` with `g1 = 1 + t12 j + t13 f`
/// and `N = t22 j + t23 f - lambda' g1`. Once the eigenvalue pair matches,
/// the block lands on the target block iff `E = 0`. Each coefficient has
/// degree at most `n - 1` in the operator entries.
fn block_residual(src: &Atom, dst: &Atom, t: &UpperT) -> TruncPoly {
    let (f, g) = (src.jet.as_ref().unwrap(), dst.jet.as_ref().unwrap());
    let n = f.order();
    let j = TruncPoly::affine(src.lambda.clone(), n);
    let add = |a: &TruncPoly, b: &TruncPoly| a.add(b).expect("same order");
    let mul = |a: &TruncPoly, b: &TruncPoly| a.mul(b).expect("same order");
    let g1 = add(&add(&TruncPoly::one(n), &j.scale(&t.t12)), &f.scale(&t.t13));
    let nn = add(
        &add(&j.scale(&t.t22), &f.scale(&t.t23)),
        &g1.scale(&-&dst.lambda),
    );
    let mut g1_pows = vec![TruncPoly::one(n)];
    let mut n_pows = vec![TruncPoly::one(n)];
    for k in 1..n {
        g1_pows.push(mul(&g1_pows[k - 1], &g1));
        n_pows.push(mul(&n_pows[k - 1], &nn));
    }
    let mut e = mul(&f.scale(&t.t33), &g1_pows[n - 2]);
    for k in 0..n {
        let term = mul(&n_pows[k], &g1_pows[n - 1 - k]).scale(&g.coeff(k));
        e = e.sub(&term).expect("same order");
    }
    e
}

/// Coefficients of the polynomial through `(xs[i], ys[i])`.
fn interpolate(xs: &[Scalar], ys: &[Scalar]) -> Vec<Scalar> {
    let mut out = vec![Scalar::zero(); xs.len()];
    for (i, (xi, yi)) in xs.iter().zip(ys).enumerate() {
        if yi.is_zero() {
            continue;
        }
        let mut basis = vec![Scalar::one()];
        let mut denom = Scalar::one();
        for (j, xj) in xs.iter().enumerate() {
            if j != i {
                basis = poly_mul(&basis, &[-xj, Scalar::one()]);
                denom = &denom * &(xi - xj);
            }
        }
        let c = yi / &denom;
        for (o, b) in out.iter_mut().zip(&basis) {
            *o += &(&c * b);
        }
    }
    out
}

fn gcd_into(acc: &mut Option<Vec<Scalar>>, p: Vec<Scalar>) {
    if p.iter().all(Scalar::is_zero) {
        return;
    }
    *acc = Some(match acc.take() {
        None => p,
        Some(a) => poly_gcd(&a, &p),
    });
}

/// Operators on the line `base + s * dir` that match every single-block
/// pair, and whether the list is all of them.
fn line_candidates(
    pairs: &[(&Atom, &Atom)],
    base: &[Scalar],
    dir: &[Scalar],
    rng: &mut ChaCha8Rng,
) -> (Vec<UpperT>, bool) {
    let at =
        |s: &Scalar| UpperT::from_vec(&combine(base, &[dir.to_vec()], std::slice::from_ref(s)));
    let mut acc = None;
    for (a, b) in pairs {
        let n = a.jet.as_ref().unwrap().order();
        if n < 3 {
            continue;
        }
        let xs: Vec<Scalar> = (0..n as i64).map(Scalar::from_int).collect();
        let vals: Vec<TruncPoly> = xs.iter().map(|s| block_residual(a, b, &at(s))).collect();
        for k in 2..n {
            let ys: Vec<Scalar> = vals.iter().map(|v| v.coeff(k)).collect();
            gcd_into(&mut acc, interpolate(&xs, &ys));
        }
    }
    match acc {
        None => {
            let mut out = vec![at(&Scalar::zero()), at(&Scalar::one())];
            out.extend(sample_values(rng).iter().map(at));
            (out, false)
        }
        Some(g) => {
            let (mut roots, residual) = poly_roots_partial(&g);
            roots.dedup();
            (roots.iter().map(at).collect(), residual.len() <= 1)
        }
    }
}

fn hom(l: &Scalar, a: &Scalar) -> Vec<Scalar> {
    vec![Scalar::one(), l.clone(), a.clone()]
}

/// Local coefficients `c_k` of the curve germ `(1 : lambda + x : f(x))`
/// after `op`, in coordinates `u = w1/w0`, `v = w2/w0` with `w = op * germ`,
/// written as `v = sum c_k u^k`.
fn local_jet(
    op: &Matrix,
    lambda: &Scalar,
    f: &TruncPoly,
) -> std::result::Result<TruncPoly, String> {
    let n = f.order();
    let germ = [
        TruncPoly::one(n),
        TruncPoly::affine(lambda.clone(), n),
        f.clone(),
    ];
    let w: Vec<TruncPoly> = (0..3)
        .map(|r| {
            let mut acc = TruncPoly::zero(n);
            for (c, g) in germ.iter().enumerate() {
                acc = acc.add(&g.scale(&op[(r, c)])).expect("same order");
            }
            acc
        })
        .collect();
    let inv = w[0]
        .reciprocal()
        .map_err(|_| "germ hits the line at infinity".to_string())?;
    let u = w[1].mul(&inv).expect("same order");
    let v = w[2].mul(&inv).expect("same order");
    if !u.coeff(0).is_zero() || !v.coeff(0).is_zero() || !v.coeff(1).is_zero() {
        return Err("anchor point or tangent not aligned".into());
    }
    let g = u
        .shifted_reversion()
        .map_err(|_| "anchor curve is singular".to_string())?;
    v.compose(&g).map_err(|e| e.to_string())
}

/// Candidate operators from the anchor pair, and whether they are all of
/// them.
fn torus_candidates(
    src: &Atom,
    dst: &Atom,
    sys: &LinearSystem,
    x0: &[Scalar],
    kernel: &[Vec<Scalar>],
    rng: &mut ChaCha8Rng,
) -> std::result::Result<(Vec<UpperT>, bool), String> {
    let (f, g) = (src.jet.as_ref().unwrap(), dst.jet.as_ref().unwrap());
    let n = g.order();
    let (lp, a0p, a1p) = (&dst.lambda, g.coeff(0), g.coeff(1));
    if a0p.is_zero() {
        return Err("anchor point lies on the invariant line".into());
    }
    let p = hom(lp, &a0p);
    let q = if a1p.is_zero() {
        vec![Scalar::zero(), Scalar::one(), Scalar::zero()]
    } else {
        let l0 = lp - &(&a0p / &a1p);
        if l0.is_zero() {
            return Err("anchor tangent passes through the fixed point".into());
        }
        vec![Scalar::one(), l0, Scalar::zero()]
    };
    let e0 = vec![Scalar::one(), Scalar::zero(), Scalar::zero()];
    let mm = Matrix::from_columns(3, &[p, q, e0]);
    let minv = mm
        .inverse()
        .map_err(|_| "anchor frame is singular".to_string())?;
    let t0m = invertible_member(x0, kernel, rng)?.to_matrix();
    let proj = |k: usize| -> Matrix {
        let mut d = vec![Scalar::zero(); 3];
        d[k] = Scalar::one();
        &(&(&mm * &Matrix::diag(&d)) * &minv) * &t0m
    };
    let (k0, k1, k2) = (proj(0), proj(1), proj(2));
    let pos = [(0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];
    let dot = |row: &[Scalar; 5], k: &Matrix| -> Scalar {
        row.iter().zip(pos).map(|(r, ij)| r * &k[ij]).sum()
    };
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for (row, c) in sys.rows.iter().zip(&sys.rhs) {
        rows.push(vec![dot(row, &k1), &dot(row, &k2) - c]);
        rhs.push(-dot(row, &k0));
    }
    let lin = Matrix::from_rows(rows);
    let Some(ag0) = lin.solve(&rhs) else {
        return Ok((Vec::new(), true));
    };
    let dirs = lin.nullspace();

    let c_src = local_jet(&(&minv * &t0m), &src.lambda, f)?;
    let c_dst = local_jet(&minv, lp, g)?;
    let ks: Vec<usize> = (2..n).collect();
    let build = |alpha: &Scalar, gamma: &Scalar| -> Option<UpperT> {
        if alpha.is_zero() || gamma.is_zero() {
            return None;
        }
        let full = &(&k0 + &k1.scale(alpha)) + &k2.scale(gamma);
        UpperT::from_matrix(&full).ok()
    };
    let holds = |alpha: &Scalar, gamma: &Scalar| -> bool {
        ks.iter()
            .all(|&k| &c_dst.coeff(k) * &alpha.pow(k as i32) == gamma * &c_src.coeff(k))
    };
    let mut out = Vec::new();
    match dirs.len() {
        0 => {
            let (a, gm) = (&ag0[0], &ag0[1]);
            if holds(a, gm) {
                out.extend(build(a, gm));
            }
            Ok((out, true))
        }
        1 => {
            // (alpha, gamma) = ag0 + s * dir
            let d = &dirs[0];
            let mut g_acc: Option<Vec<Scalar>> = None;
            for &k in &ks {
                let lin_a = vec![ag0[0].clone(), d[0].clone()];
                let lin_g = vec![ag0[1].clone(), d[1].clone()];
                let mut pk = poly_pow(&lin_a, k);
                let rhs_poly = poly_scale(&lin_g, &c_src.coeff(k));
                pk = poly_sub(&poly_scale(&pk, &c_dst.coeff(k)), &rhs_poly);
                if pk.iter().all(Scalar::is_zero) {
                    continue;
                }
                g_acc = Some(match g_acc {
                    None => pk,
                    Some(acc) => poly_gcd(&acc, &pk),
                });
            }
            let Some(gp) = g_acc else {
                for s in sample_values(rng) {
                    let a = &ag0[0] + &(&s * &d[0]);
                    let gm = &ag0[1] + &(&s * &d[1]);
                    out.extend(build(&a, &gm));
                }
                return Ok((out, false));
            };
            let (roots, residual) = poly_roots_partial(&gp);
            let mut roots = roots;
            roots.dedup();
            for s in roots {
                let a = &ag0[0] + &(&s * &d[0]);
                let gm = &ag0[1] + &(&s * &d[1]);
                out.extend(build(&a, &gm));
            }
            Ok((out, residual.len() <= 1))
        }
        _ => {
            let nz1: Vec<usize> = ks
                .iter()
                .copied()
                .filter(|&k| !c_src.coeff(k).is_zero())
                .collect();
            let nz2: Vec<usize> = ks
                .iter()
                .copied()
                .filter(|&k| !c_dst.coeff(k).is_zero())
                .collect();
            if nz1 != nz2 {
                return Ok((Vec::new(), true));
            }
            if nz1.is_empty() {
                out.extend(build(&Scalar::one(), &Scalar::one()));
                for s in sample_values(rng) {
                    out.extend(build(&s, &Scalar::one()));
                }
                return Ok((out, false));
            }
            let k1 = nz1[0];
            let gamma_of = |a: &Scalar| -> Scalar {
                &(&c_dst.coeff(k1) * &a.pow(k1 as i32)) / &c_src.coeff(k1)
            };
            if nz1.len() == 1 {
                for a in std::iter::once(Scalar::one()).chain(sample_values(rng)) {
                    out.extend(build(&a, &gamma_of(&a)));
                }
                return Ok((out, false));
            }
            let mut acc: Option<Vec<Scalar>> = None;
            for &k in &nz1[1..] {
                let r =
                    &(&c_dst.coeff(k1) * &c_src.coeff(k)) / &(&c_src.coeff(k1) * &c_dst.coeff(k));
                let mut pk = vec![Scalar::zero(); k - k1 + 1];
                pk[0] = -r;
                pk[k - k1] = Scalar::one();
                acc = Some(match acc {
                    None => pk,
                    Some(a) => poly_gcd(&a, &pk),
                });
            }
            let (roots, residual) = poly_roots_partial(&acc.unwrap());
            let mut roots = roots;
            roots.dedup();
            for a in roots {
                let gm = gamma_of(&a);
                if holds(&a, &gm) {
                    out.extend(build(&a, &gm));
                }
            }
            Ok((out, residual.len() <= 1))
        }
    }
}

fn invertible_member(
    x0: &[Scalar],
    kernel: &[Vec<Scalar>],
    rng: &mut ChaCha8Rng,
) -> std::result::Result<UpperT, String> {
    let mut t0 = UpperT::from_vec(x0);
    for _ in 0..20 {
        if t0.is_invertible() {
            return Ok(t0);
        }
        t0 = random_member(x0, kernel, rng);
    }
    Err("no invertible operator in the family".into())
}

fn binom(n: usize, k: usize) -> Scalar {
    let mut c = Scalar::one();
    for i in 0..k {
        c = &(&c * &Scalar::from_int((n - i) as i64)) / &Scalar::from_int((i + 1) as i64);
    }
    c
}

/// Bivariate polynomial, `c[a][b]` the coefficient of `s^a r^b`.
type Biv = Vec<Vec<Scalar>>;

fn biv_deg_s(p: &Biv) -> Option<usize> {
    (0..p.len())
        .rev()
        .find(|&a| p[a].iter().any(|c| !c.is_zero()))
}

/// Univariate in `s` after fixing `r`.
fn biv_at_r(p: &Biv, r: &Scalar) -> Vec<Scalar> {
    p.iter().map(|row| poly_eval(row, r)).collect()
}

/// Univariate in `r` after fixing `s`.
fn biv_at_s(p: &Biv, s: &Scalar) -> Vec<Scalar> {
    let width = p.iter().map(Vec::len).max().unwrap_or(0);
    let mut out = vec![Scalar::zero(); width];
    let mut pw = Scalar::one();
    for row in p {
        for (o, c) in out.iter_mut().zip(row) {
            *o += &(c * &pw);
        }
        pw = &pw * s;
    }
    out
}

/// Univariate in `r` when `p` does not involve `s`.
fn biv_r_part(p: &Biv) -> Vec<Scalar> {
    p[0].clone()
}

/// Resultant in `s` with formal degrees `p.len() - 1` and `q.len() - 1`.
fn sylvester(p: &[Scalar], q: &[Scalar]) -> Scalar {
    let (dp, dq) = (p.len() - 1, q.len() - 1);
    let size = dp + dq;
    let mut m = Matrix::zeros(size, size);
    for i in 0..dq {
        for (k, c) in p.iter().rev().enumerate() {
            m[(i, i + k)] = c.clone();
        }
    }
    for i in 0..dp {
        for (k, c) in q.iter().rev().enumerate() {
            m[(dq + i, i + k)] = c.clone();
        }
    }
    m.det()
}

fn resultant_in_s(p: &Biv, q: &Biv, dp: usize, dq: usize) -> Vec<Scalar> {
    let deg_r = |b: &Biv| b.iter().map(|row| row.len()).max().unwrap_or(1);
    let bound = dp * deg_r(q) + dq * deg_r(p) + 1;
    let xs: Vec<Scalar> = (0..bound as i64).map(Scalar::from_int).collect();
    let ys: Vec<Scalar> = xs
        .iter()
        .map(|r| sylvester(&biv_at_r(p, r)[..=dp], &biv_at_r(q, r)[..=dq]))
        .collect();
    interpolate(&xs, &ys)
}

/// Operators on the plane `base + s * d1 + r * d2` that match every
/// single-block pair, and whether the list is all of them.
fn plane_candidates(
    pairs: &[(&Atom, &Atom)],
    base: &[Scalar],
    d1: &[Scalar],
    d2: &[Scalar],
    rng: &mut ChaCha8Rng,
) -> (Vec<UpperT>, bool) {
    let at = |s: &Scalar, r: &Scalar| {
        UpperT::from_vec(&combine(
            base,
            &[d1.to_vec(), d2.to_vec()],
            &[s.clone(), r.clone()],
        ))
    };
    let mut polys: Vec<Biv> = Vec::new();
    for (a, b) in pairs {
        let n = a.jet.as_ref().unwrap().order();
        if n < 3 {
            continue;
        }
        let xs: Vec<Scalar> = (0..n as i64).map(Scalar::from_int).collect();
        let grid: Vec<Vec<TruncPoly>> = xs
            .iter()
            .map(|s| xs.iter().map(|r| block_residual(a, b, &at(s, r))).collect())
            .collect();
        for k in 2..n {
            // interpolate in s for each r, then in r for each power of s
            let by_r: Vec<Vec<Scalar>> = (0..n)
                .map(|j| {
                    interpolate(
                        &xs,
                        &(0..n).map(|i| grid[i][j].coeff(k)).collect::<Vec<_>>(),
                    )
                })
                .collect();
            let p: Biv = (0..n)
                .map(|a| interpolate(&xs, &(0..n).map(|j| by_r[j][a].clone()).collect::<Vec<_>>()))
                .collect();
            if p.iter().flatten().any(|c| !c.is_zero()) {
                polys.push(p);
            }
        }
    }
    let mut out = Vec::new();
    let samples = |rng: &mut ChaCha8Rng| -> Vec<Scalar> {
        std::iter::once(Scalar::one())
            .chain(sample_values(rng))
            .collect()
    };
    if polys.is_empty() {
        for s in samples(rng) {
            out.push(at(&s, &Scalar::one()));
        }
        return (out, false);
    }
    let mut complete = true;
    let mut acc = None;
    let lead = polys
        .iter()
        .position(|p| biv_deg_s(p).is_some_and(|d| d > 0));
    for (i, p) in polys.iter().enumerate() {
        let d = biv_deg_s(p).unwrap();
        if d == 0 {
            gcd_into(&mut acc, biv_r_part(p));
        } else if let Some(l) = lead.filter(|&l| l != i) {
            let dl = biv_deg_s(&polys[l]).unwrap();
            gcd_into(&mut acc, resultant_in_s(&polys[l], p, dl, d));
        }
    }
    let r_values: Vec<Scalar> = match acc {
        None => {
            // a curve or less: sample along both coordinates
            for s in samples(rng) {
                let mut uni = None;
                for p in &polys {
                    gcd_into(&mut uni, biv_at_s(p, &s));
                }
                if let Some(g) = uni {
                    out.extend(poly_roots_partial(&g).0.iter().map(|r| at(&s, r)));
                }
            }
            complete = false;
            samples(rng)
        }
        Some(g) => {
            let (mut roots, residual) = poly_roots_partial(&g);
            roots.dedup();
            if residual.len() > 1 {
                complete = false;
            }
            roots
        }
    };
    for r in r_values {
        let mut uni = None;
        for p in &polys {
            gcd_into(&mut uni, biv_at_r(p, &r));
        }
        match uni {
            None => {
                complete = false;
                for s in samples(rng) {
                    out.push(at(&s, &r));
                }
            }
            Some(g) => {
                let (mut roots, residual) = poly_roots_partial(&g);
                roots.dedup();
                if residual.len() > 1 {
                    complete = false;
                }
                out.extend(roots.iter().map(|s| at(s, &r)));
            }
        }
    }
    (out, complete)
}

/// Anchor on the invariant line `w2 = 0`. In the frame `(p', r, e0)`, with
/// `r` a second point on the tangent, the stabilizer is
/// `[[1, delta, 0], [0, gamma, 0], [0, 0, alpha]]`. It sends the local jet
/// `v = sum c_k u^k` to `(alpha/gamma) sum c_k gamma^(1-k) u^k (1 - (delta/gamma) u)^(1-k)`.
/// With `m` the first nonzero index this forces `alpha = kappa gamma^m`,
/// one equation linear in `(delta, gamma)`, and polynomial ones after it.
fn line_anchor_candidates(
    src: &Atom,
    dst: &Atom,
    sys: &LinearSystem,
    x0: &[Scalar],
    kernel: &[Vec<Scalar>],
    rng: &mut ChaCha8Rng,
) -> std::result::Result<(Vec<UpperT>, bool), String> {
    let (f, g) = (src.jet.as_ref().unwrap(), dst.jet.as_ref().unwrap());
    let n = g.order();
    let (lp, a1p) = (&dst.lambda, g.coeff(1));
    if lp.is_zero() || a1p.is_zero() {
        return Err("anchor sits at a fixed point of the flag".into());
    }
    let p = hom(lp, &Scalar::zero());
    let r = vec![Scalar::one(), lp + &Scalar::one(), a1p];
    let e0 = vec![Scalar::one(), Scalar::zero(), Scalar::zero()];
    let mm = Matrix::from_columns(3, &[p, r, e0]);
    let minv = mm
        .inverse()
        .map_err(|_| "anchor frame is singular".to_string())?;
    let t0m = invertible_member(x0, kernel, rng)?.to_matrix();
    let c = local_jet(&(&minv * &t0m), &src.lambda, f)?;
    let cp = local_jet(&minv, lp, g)?;

    let first = |j: &TruncPoly| (2..n).find(|&k| !j.coeff(k).is_zero());
    let (m, ms) = match (first(&cp), first(&c)) {
        (Some(m), Some(ms)) => (m, ms),
        (None, None) => return Err("anchor jet is flat".into()),
        _ => return Ok((Vec::new(), true)),
    };
    if m != ms {
        return Ok((Vec::new(), true));
    }
    let kappa = &cp.coeff(m) / &c.coeff(m);
    let unit = |i: usize, j: usize| -> Matrix {
        let mut e = Matrix::zeros(3, 3);
        e[(i, j)] = Scalar::one();
        &(&(&mm * &e) * &minv) * &t0m
    };
    let ks = [unit(0, 0), unit(0, 1), unit(1, 1), unit(2, 2)];
    let pos = [(0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];
    let dot = |row: &[Scalar; 5], k: &Matrix| -> Scalar {
        row.iter().zip(pos).map(|(r, ij)| r * &k[ij]).sum()
    };
    // c0 + c1 delta + c2 gamma + c3 alpha = 0
    let mut lin: Vec<[Scalar; 4]> = sys
        .rows
        .iter()
        .zip(&sys.rhs)
        .map(|(row, rhs)| {
            [
                dot(row, &ks[0]),
                dot(row, &ks[1]),
                dot(row, &ks[2]),
                &dot(row, &ks[3]) - rhs,
            ]
        })
        .collect();
    if m + 1 < n {
        lin.push([
            &kappa * &c.coeff(m + 1),
            &(&kappa * &Scalar::from_int((m - 1) as i64)) * &c.coeff(m),
            -cp.coeff(m + 1),
            Scalar::zero(),
        ]);
    }
    let mut alpha = vec![Scalar::zero(); m + 1];
    alpha[m] = kappa.clone();
    let gamma = vec![Scalar::zero(), Scalar::one()];
    let solved = lin.iter().find(|e| !e[1].is_zero()).map(|e| {
        let rest = poly_add(
            &poly_add(&[e[0].clone()], &poly_scale(&gamma, &e[2])),
            &poly_scale(&alpha, &e[3]),
        );
        poly_scale(&rest, &-(e[1].inv().unwrap()))
    });
    let mut complete = solved.is_some();
    let deltas: Vec<Vec<Scalar>> = match solved {
        Some(d) => vec![d],
        None => std::iter::once(Scalar::zero())
            .chain(sample_values(rng))
            .map(|v| vec![v])
            .collect(),
    };
    let build = |d: &Scalar, gm: &Scalar| -> Option<UpperT> {
        if gm.is_zero() {
            return None;
        }
        let al = &kappa * &gm.pow(m as i32);
        let full = &(&(&ks[0] + &ks[1].scale(d)) + &ks[2].scale(gm)) + &ks[3].scale(&al);
        UpperT::from_matrix(&full).ok()
    };
    let mut out = Vec::new();
    for delta in deltas {
        let mut acc = None;
        for e in &lin {
            let p = poly_add(
                &poly_add(&[e[0].clone()], &poly_scale(&delta, &e[1])),
                &poly_add(&poly_scale(&gamma, &e[2]), &poly_scale(&alpha, &e[3])),
            );
            gcd_into(&mut acc, p);
        }
        for k in m + 2..n {
            let mut pk = vec![Scalar::zero(); k - m + 1];
            pk[k - m] = -cp.coeff(k);
            for j in m..=k {
                let coef = &(&kappa * &c.coeff(j)) * &binom(k - 2, k - j);
                pk = poly_add(&pk, &poly_scale(&poly_pow(&delta, k - j), &coef));
            }
            gcd_into(&mut acc, pk);
        }
        match acc {
            None => {
                complete = false;
                for gm in std::iter::once(Scalar::one()).chain(sample_values(rng)) {
                    out.extend(build(&poly_eval(&delta, &gm), &gm));
                }
            }
            Some(gp) => {
                let (mut roots, residual) = poly_roots_partial(&gp);
                roots.dedup();
                if residual.len() > 1 {
                    complete = false;
                }
                for gm in roots {
                    out.extend(build(&poly_eval(&delta, &gm), &gm));
                }
            }
        }
    }
    Ok((out, complete))
}

fn sample_values(rng: &mut ChaCha8Rng) -> Vec<Scalar> {
    (0..FAMILY_SAMPLES)
        .map(|_| Scalar::from_int(rng.gen_range(-40..=40)))
        .filter(|s| !s.is_zero())
        .collect()
}

fn poly_add(a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|k| {
            let x = a.get(k).cloned().unwrap_or_default();
            let y = b.get(k).cloned().unwrap_or_default();
            &x + &y
        })
        .collect()
}

fn poly_mul(a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
    let mut out = vec![Scalar::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += &(x * y);
        }
    }
    out
}

fn poly_eval(p: &[Scalar], x: &Scalar) -> Scalar {
    p.iter()
        .rev()
        .fold(Scalar::zero(), |acc, c| &(&acc * x) + c)
}

fn poly_scale(p: &[Scalar], c: &Scalar) -> Vec<Scalar> {
    p.iter().map(|x| x * c).collect()
}

fn poly_sub(a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|k| {
            let x = a.get(k).cloned().unwrap_or_default();
            let y = b.get(k).cloned().unwrap_or_default();
            &x - &y
        })
        .collect()
}

fn poly_pow(p: &[Scalar], k: usize) -> Vec<Scalar> {
    let mut acc = vec![Scalar::one()];
    for _ in 0..k {
        let mut next = vec![Scalar::zero(); acc.len() + p.len() - 1];
        for (i, a) in acc.iter().enumerate() {
            for (j, b) in p.iter().enumerate() {
                next[i + j] += &(a * b);
            }
        }
        acc = next;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmat::{int, rat};

    fn block(l: Scalar, a: &[Scalar]) -> CanonicalForm {
        CanonicalForm::from_blocks(vec![(l, TruncPoly::new(a.to_vec()))]).unwrap()
    }

    fn coeffs(cf: &CanonicalForm) -> (Scalar, Vec<Scalar>) {
        let b = &cf.single_blocks()[0];
        (b.0.clone(), b.1.coeffs().to_vec())
    }

    #[test]
    fn ej_example() {
        let cf = block(int(1), &[int(1), int(1), int(1)]);
        let out = apply_T_EJ(&cf, &int(1)).unwrap();
        assert_eq!(coeffs(&out), (rat(1, 2), vec![rat(1, 2), int(1), int(8)]));
        assert_eq!(apply_T_EJ(&cf, &int(0)).unwrap(), cf);
        assert!(matches!(
            apply_T_EJ(&cf, &int(-1)),
            Err(Error::DegenerateParameter(_))
        ));
    }

    #[test]
    fn ea_example() {
        let cf = block(int(1), &[int(1), int(0), int(1)]);
        let out = apply_T_EA(&cf, &int(1)).unwrap();
        assert_eq!(coeffs(&out), (rat(1, 2), vec![rat(1, 2), int(0), int(1)]));
    }

    #[test]
    fn ja_example() {
        let cf = block(int(1), &[int(0), int(2), int(3)]);
        let out = apply_T_JA(&cf, &int(1)).unwrap();
        assert_eq!(coeffs(&out), (int(1), vec![int(0), rat(2, 3), rat(1, 9)]));
        assert_eq!(apply_T_JA(&cf, &int(0)).unwrap(), cf);
    }

    #[test]
    fn rescale_examples() {
        let cf = block(int(1), &[int(1), int(1), int(1)]);
        let out = apply_rescale(&cf, &int(2), &int(3)).unwrap();
        assert_eq!(coeffs(&out), (int(2), vec![int(3), rat(3, 2), rat(3, 4)]));
        let diag = block(int(0), &[int(5), int(0), int(0)]);
        assert_eq!(apply_rescale(&diag, &int(2), &int(1)).unwrap(), diag);
        assert_eq!(apply_rescale(&cf, &int(0), &int(1)), Err(Error::ZeroScale));
    }

    #[test]
    fn params_round_trip_through_operator() {
        let sp = SymmetryParams::new(rat(1, 2), int(-3), rat(2, 5), int(7), rat(-1, 3)).unwrap();
        let t = sp.to_t(&CANONICAL_ORDER);
        assert_eq!(t.to_params().unwrap(), sp);
    }

    #[test]
    fn mobius_examples() {
        assert_eq!(
            mobius_2nn(&int(2), &int(1), &int(1), &int(1)).unwrap(),
            rat(2, 3)
        );
        let l = rat(-7, 3);
        assert_eq!(mobius_2nn(&l, &int(1), &int(0), &int(1)).unwrap(), l);
        assert!(mobius_2nn(&int(-1), &int(1), &int(1), &int(1)).is_err());
    }

    #[test]
    fn orbit_examples() {
        let a = block(int(1), &[int(0), int(2), int(3)]);
        let b = block(int(1), &[int(0), rat(2, 3), rat(1, 9)]);
        match orbit_equivalent(&a, &a) {
            OrbitDecision::Equivalent { witness, .. } => {
                assert_eq!(apply_params(&a, &witness).unwrap(), a);
            }
            other => panic!("{other:?}"),
        }
        match orbit_equivalent(&a, &b) {
            OrbitDecision::Equivalent { witness, .. } => {
                assert_eq!(apply_params(&a, &witness).unwrap(), b);
            }
            other => panic!("{other:?}"),
        }
        let three = CanonicalForm::from_blocks(vec![
            (int(0), TruncPoly::from_ints(&[1])),
            (int(1), TruncPoly::from_ints(&[2])),
            (int(2), TruncPoly::from_ints(&[3])),
        ])
        .unwrap();
        assert_eq!(orbit_equivalent(&a, &three), OrbitDecision::Inequivalent);
    }
}
