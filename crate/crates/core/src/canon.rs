//! From a raw matrix tuple to the canonical triple `(E, J, A)`, and the
//! splitting of tuples whose maximal rank is below `N`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactmat::{
    commutant_basis, eigenvalues_in_field, jordan_decompose, JordanBlock, JordanSpec, Matrix,
    Scalar,
};
use crate::nilpoly::{commutant_to_poly_matrix, PolyGrid, TruncPoly};

/// The tensor as `L` matrices of size `N x N`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorState {
    n: usize,
    gammas: Vec<Matrix>,
}

impl TensorState {
    pub fn new(gammas: Vec<Matrix>) -> Result<Self> {
        let Some(first) = gammas.first() else {
            return Err(Error::DimensionMismatch("state with no slots".into()));
        };
        let n = first.rows();
        if gammas.iter().any(|g| g.rows() != n || g.cols() != n) {
            return Err(Error::DimensionMismatch("slots must all be N x N".into()));
        }
        if gammas.iter().all(Matrix::is_zero) {
            return Err(Error::DimensionMismatch("all slots are zero".into()));
        }
        Ok(Self { n, gammas })
    }

    pub fn l(&self) -> usize {
        self.gammas.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gammas(&self) -> &[Matrix] {
        &self.gammas
    }

    /// `(E, J, A)` for a canonical form.
    pub fn from_canonical(cf: &CanonicalForm) -> Self {
        let n = cf.n();
        Self {
            n,
            gammas: vec![Matrix::identity(n), cf.j_matrix(), cf.a_matrix()],
        }
    }

    /// `sum_j t_j Gamma_j`.
    pub fn combination(&self, t: &[Scalar]) -> Matrix {
        let mut acc = Matrix::zeros(self.n, self.n);
        for (c, g) in t.iter().zip(&self.gammas) {
            if !c.is_zero() {
                acc = &acc + &g.scale(c);
            }
        }
        acc
    }
}

/// Invertible local operators `(T, P, Q)` acting as
/// `Gamma'_i = sum_j T_ij P Gamma_j Q`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IloTriple {
    pub t: Matrix,
    pub p: Matrix,
    pub q: Matrix,
}

impl IloTriple {
    pub fn new(t: Matrix, p: Matrix, q: Matrix) -> Result<Self> {
        for m in [&t, &p, &q] {
            if !m.is_square() || m.rank() < m.rows() {
                return Err(Error::SingularMatrix);
            }
        }
        Ok(Self { t, p, q })
    }

    pub fn identity(l: usize, n: usize) -> Self {
        Self {
            t: Matrix::identity(l),
            p: Matrix::identity(n),
            q: Matrix::identity(n),
        }
    }

    /// The triple equivalent to applying `self` first and `then` second.
    pub fn then(&self, then: &IloTriple) -> IloTriple {
        IloTriple {
            t: &then.t * &self.t,
            p: &then.p * &self.p,
            q: &self.q * &then.q,
        }
    }
}

pub fn apply_ilo(psi: &TensorState, ops: &IloTriple) -> Result<TensorState> {
    let (l, n) = (psi.l(), psi.n());
    if ops.t.rows() != l || ops.p.rows() != n || ops.q.rows() != n {
        return Err(Error::DimensionMismatch(format!(
            "operators {}x{}, {}x{}, {}x{} on an L={l}, N={n} state",
            ops.t.rows(),
            ops.t.cols(),
            ops.p.rows(),
            ops.p.cols(),
            ops.q.rows(),
            ops.q.cols()
        )));
    }
    let conj: Vec<Matrix> = psi.gammas.iter().map(|g| &(&ops.p * g) * &ops.q).collect();
    let gammas = (0..l)
        .map(|i| {
            let mut acc = Matrix::zeros(n, n);
            for (j, g) in conj.iter().enumerate() {
                let c = &ops.t[(i, j)];
                if !c.is_zero() {
                    acc = &acc + &g.scale(c);
                }
            }
            acc
        })
        .collect();
    Ok(TensorState { n, gammas })
}

/// Result of the maximal-rank search.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MaxRank {
    pub t_row: Vec<Scalar>,
    pub rank: usize,
    /// `rank == N`, so no combination can do better.
    pub certified: bool,
    pub samples: usize,
}

const SWEEP: [i64; 5] = [0, 1, -1, 2, -2];
const RANDOM_TUPLES: usize = 64;
const RANDOM_BOUND: i64 = 1_000_000;

/// Maximal rank over linear combinations of a list of matrices, plus a
/// fixed matrix added to every combination. Tries `e_1`, then a
/// lexicographic sweep over `{0, 1, -1, 2, -2}^L`, then random tuples.
fn max_rank_search(base: Option<&Matrix>, mats: &[Matrix], seed: u64) -> MaxRank {
    let l = mats.len();
    let full = mats.first().or(base).map_or(0, Matrix::rows);
    let comb = |t: &[Scalar]| -> Matrix {
        let mut acc = base.cloned().unwrap_or_else(|| Matrix::zeros(full, full));
        for (c, g) in t.iter().zip(mats) {
            if !c.is_zero() {
                acc = &acc + &g.scale(c);
            }
        }
        acc
    };
    let mut best = MaxRank {
        t_row: vec![Scalar::zero(); l],
        rank: base.map_or(0, Matrix::rank),
        certified: false,
        samples: 1,
    };
    let consider = |t: Vec<Scalar>, best: &mut MaxRank| -> bool {
        best.samples += 1;
        let r = comb(&t).rank();
        if r > best.rank {
            best.rank = r;
            best.t_row = t;
        }
        best.rank == full
    };
    if best.rank == full {
        best.certified = true;
        return best;
    }
    if l > 0 {
        let mut e1 = vec![Scalar::zero(); l];
        e1[0] = Scalar::one();
        if consider(e1, &mut best) {
            best.certified = true;
            return best;
        }
    }
    let total = SWEEP.len().pow(l as u32);
    for idx in 0..total {
        let mut rem = idx;
        let mut t = vec![Scalar::zero(); l];
        for k in (0..l).rev() {
            t[k] = Scalar::from_int(SWEEP[rem % SWEEP.len()]);
            rem /= SWEEP.len();
        }
        if base.is_none() && t.iter().all(Scalar::is_zero) {
            continue;
        }
        if consider(t, &mut best) {
            best.certified = true;
            return best;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..RANDOM_TUPLES {
        let t = (0..l)
            .map(|_| Scalar::from_int(rng.gen_range(-RANDOM_BOUND..=RANDOM_BOUND)))
            .collect();
        if consider(t, &mut best) {
            best.certified = true;
            return best;
        }
    }
    best
}

pub fn max_rank_combination(psi: &TensorState, seed: u64) -> MaxRank {
    max_rank_search(None, &psi.gammas, seed)
}

/// An invertible `L x L` matrix whose first row is `t`: the other rows are
/// unit rows `e_k` for every `k` except the first index with `t_k != 0`.
fn complete_first_row(t: &[Scalar]) -> Matrix {
    let l = t.len();
    let j = t.iter().position(|c| !c.is_zero()).expect("nonzero row");
    let mut rows = vec![t.to_vec()];
    for k in (0..l).filter(|&k| k != j) {
        let mut e = vec![Scalar::zero(); l];
        e[k] = Scalar::one();
        rows.push(e);
    }
    Matrix::from_rows(rows)
}

/// Makes the first slot the identity. Returns the reduced state and the
/// operators used.
pub fn full_rank_reduce(psi: &TensorState, seed: u64) -> Result<(TensorState, IloTriple)> {
    let mr = max_rank_combination(psi, seed);
    if mr.rank < psi.n() {
        return Err(Error::NotFullRank {
            best: mr.rank,
            n: psi.n(),
        });
    }
    let t = complete_first_row(&mr.t_row);
    let head = psi.combination(&mr.t_row);
    let ops = IloTriple {
        t,
        p: head.inverse()?,
        q: Matrix::identity(psi.n()),
    };
    Ok((apply_ilo(psi, &ops)?, ops))
}

/// Subtracts from every slot after the first its smallest eigenvalue times
/// the identity. Returns the shifted state and the shifts.
pub fn eigen_shift(psi: &TensorState, hints: &[Scalar]) -> Result<(TensorState, Vec<Scalar>)> {
    eigen_shift_where(psi, hints, |_| true)
}

fn eigen_shift_where(
    psi: &TensorState,
    hints: &[Scalar],
    select: impl Fn(&Matrix) -> bool,
) -> Result<(TensorState, Vec<Scalar>)> {
    if !psi.gammas[0].is_identity() {
        return Err(Error::DimensionMismatch(
            "first slot must be the identity".into(),
        ));
    }
    let n = psi.n();
    let mut gammas = vec![psi.gammas[0].clone()];
    let mut shifts = Vec::new();
    for g in &psi.gammas[1..] {
        if !select(g) {
            gammas.push(g.clone());
            shifts.push(Scalar::zero());
            continue;
        }
        let mu = match g.as_scalar_multiple() {
            Some(c) => c,
            None => eigenvalues_in_field(g, hints)?.into_iter().next().unwrap(),
        };
        gammas.push(g - &Matrix::scalar(n, &mu));
        shifts.push(mu);
    }
    Ok((TensorState { n, gammas }, shifts))
}

/// A run of Jordan blocks sharing one eigenvalue, with the polynomial grid
/// of `A` over those blocks.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Run {
    pub lambda: Scalar,
    pub grid: PolyGrid,
}

/// The canonical triple `(E, J, A)`; `E` is implicit.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CanonicalForm {
    runs: Vec<Run>,
}

impl CanonicalForm {
    /// Runs must have strictly increasing eigenvalues and non-increasing
    /// sizes inside each run.
    pub fn new(runs: Vec<Run>) -> Result<Self> {
        if runs.is_empty() {
            return Err(Error::BadProfile("no blocks".into()));
        }
        for w in runs.windows(2) {
            if w[0].lambda >= w[1].lambda {
                return Err(Error::BadProfile("runs out of order or repeated".into()));
            }
        }
        for r in &runs {
            if r.grid.sizes().windows(2).any(|w| w[0] < w[1]) {
                return Err(Error::BadProfile("sizes increase inside a run".into()));
            }
        }
        Ok(Self { runs })
    }

    /// Nonderogatory form from `(lambda, A polynomial)` blocks, in any order.
    pub fn from_blocks(blocks: Vec<(Scalar, TruncPoly)>) -> Result<Self> {
        Self::from_parts(
            blocks
                .into_iter()
                .map(|(l, f)| (l, PolyGrid::single(f)))
                .collect(),
        )
    }

    /// Normalizes arbitrary `(lambda, grid)` pieces: pieces with equal
    /// eigenvalue are joined block-diagonally, and blocks inside a run are
    /// stably sorted by decreasing size.
    pub fn from_parts(mut parts: Vec<(Scalar, PolyGrid)>) -> Result<Self> {
        parts.sort_by(|a, b| a.0.cmp(&b.0));
        let mut runs: Vec<Run> = Vec::new();
        for (lambda, grid) in parts {
            match runs.last_mut() {
                Some(r) if r.lambda == lambda => r.grid = r.grid.direct_sum(&grid),
                _ => runs.push(Run { lambda, grid }),
            }
        }
        for r in &mut runs {
            let sizes = r.grid.sizes();
            let mut perm: Vec<usize> = (0..sizes.len()).collect();
            perm.sort_by(|&a, &b| sizes[b].cmp(&sizes[a]));
            r.grid = r.grid.permuted(&perm);
        }
        Self::new(runs)
    }

    pub fn runs(&self) -> &[Run] {
        &self.runs
    }

    pub fn n(&self) -> usize {
        self.runs.iter().map(|r| r.grid.n()).sum()
    }

    pub fn spec(&self) -> JordanSpec {
        JordanSpec::new(
            self.runs
                .iter()
                .flat_map(|r| {
                    r.grid.sizes().iter().map(|&size| JordanBlock {
                        lambda: r.lambda.clone(),
                        size,
                    })
                })
                .collect(),
        )
        .expect("sizes are positive")
    }

    pub fn is_nonderogatory(&self) -> bool {
        self.runs.iter().all(|r| r.grid.is_single())
    }

    /// `(lambda, A polynomial)` for each single-block run, in order.
    pub fn single_blocks(&self) -> Vec<(Scalar, TruncPoly)> {
        self.runs
            .iter()
            .filter(|r| r.grid.is_single())
            .map(|r| (r.lambda.clone(), r.grid.entry(0, 0).clone()))
            .collect()
    }

    pub fn j_matrix(&self) -> Matrix {
        self.spec().matrix()
    }

    pub fn a_matrix(&self) -> Matrix {
        Matrix::block_diag(
            &self
                .runs
                .iter()
                .map(|r| r.grid.to_matrix())
                .collect::<Vec<_>>(),
        )
    }

    /// `Some(C)` with `C` invertible, `C J = J C` and `C A_self = A_other C`
    /// when both forms describe the same pair up to the residual gauge
    /// freedom inside derogatory runs. Single-block runs are compared
    /// exactly.
    pub fn same_class(&self, other: &CanonicalForm) -> Option<Matrix> {
        if self.runs.len() != other.runs.len() {
            return None;
        }
        let mut certs = Vec::new();
        for (r1, r2) in self.runs.iter().zip(&other.runs) {
            if r1.lambda != r2.lambda || r1.grid.sizes() != r2.grid.sizes() {
                return None;
            }
            if r1.grid == r2.grid {
                certs.push(Matrix::identity(r1.grid.n()));
                continue;
            }
            if r1.grid.is_single() {
                return None;
            }
            certs.push(run_gauge(r1, r2)?);
        }
        Some(Matrix::block_diag(&certs))
    }
}

const GAUGE_TRIES: usize = 12;

/// Invertible element of the run's centralizer intertwining the two grids.
fn run_gauge(r1: &Run, r2: &Run) -> Option<Matrix> {
    let spec = JordanSpec::new(
        r1.grid
            .sizes()
            .iter()
            .map(|&size| JordanBlock {
                lambda: Scalar::zero(),
                size,
            })
            .collect(),
    )
    .ok()?;
    let basis = commutant_basis(&spec);
    let (a1, a2) = (r1.grid.to_matrix(), r2.grid.to_matrix());
    let n = a1.rows();
    let cols: Vec<Vec<Scalar>> = basis
        .iter()
        .map(|b| (&(b * &a1) - &(&a2 * b)).vec())
        .collect();
    let kernel = Matrix::from_columns(n * n, &cols).nullspace();
    if kernel.is_empty() {
        return None;
    }
    let build = |coef: &[Scalar]| -> Matrix {
        let mut c = Matrix::zeros(n, n);
        for (k, b) in basis.iter().enumerate() {
            if !coef[k].is_zero() {
                c = &c + &b.scale(&coef[k]);
            }
        }
        c
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for attempt in 0..GAUGE_TRIES {
        let mut coef = vec![Scalar::zero(); basis.len()];
        for v in &kernel {
            let w = if attempt == 0 && kernel.len() == 1 {
                Scalar::one()
            } else {
                Scalar::from_int(rng.gen_range(-1000..=1000))
            };
            for (c, x) in coef.iter_mut().zip(v) {
                *c += &(&w * x);
            }
        }
        let c = build(&coef);
        if c.rank() == n {
            return Some(c);
        }
    }
    None
}

/// Canonical form of a commuting pair and the similarity `s` with
/// `s^-1 a2 s = J` and `s^-1 a3 s = A`.
pub fn commuting_pair_canonical(
    a2: &Matrix,
    a3: &Matrix,
    hints: &[Scalar],
) -> Result<(CanonicalForm, Matrix)> {
    if !a2.is_square() || a2.rows() != a3.rows() || !a3.is_square() {
        return Err(Error::DimensionMismatch(
            "pair must be square and equal size".into(),
        ));
    }
    if !a2.commutator(a3).is_zero() {
        return Err(Error::NotCommuting);
    }
    let (s, spec) = jordan_decompose(a2, hints)?;
    let a = &(&s.inverse()? * a3) * &s;
    let mut runs = Vec::new();
    let mut off = 0;
    for (lambda, sizes) in spec.runs() {
        let len: usize = sizes.iter().sum();
        let block = a.submatrix(off, off, len, len);
        let grid = commutant_to_poly_matrix(&block, &sizes)?;
        runs.push(Run { lambda, grid });
        off += len;
    }
    let cf = CanonicalForm::new(runs)?;
    if cf.a_matrix() != a {
        return Err(Error::PatternViolation(
            "A has entries coupling different eigenvalues".into(),
        ));
    }
    Ok((cf, s))
}

/// Options for the end-to-end pipeline.
#[derive(Clone, Debug, Default)]
pub struct CanonOptions {
    pub seed: u64,
    pub hints: Vec<Scalar>,
    /// Shift every slot by its smallest eigenvalue, not only slots that are
    /// multiples of the identity.
    pub shift_all: bool,
}

/// What the pipeline produced.
#[derive(Clone, Debug)]
pub enum Canonicalization {
    /// When every slot vanishes on a common `d`-dimensional kernel on both
    /// sides, the form describes the `N - d`-dimensional support and
    /// `cf.n()` is smaller than the input `N`.
    Full {
        cf: CanonicalForm,
        max_rank: MaxRank,
        shifts: Vec<Scalar>,
    },
    Split {
        max_rank: MaxRank,
        form: PartitionedForm,
        beta_canonical: bool,
    },
}

/// Row-reduces the span of the slots; fails when more than three
/// independent slots remain. Fewer than three slots are padded with zeros.
pub fn reduce_arity(psi: &TensorState) -> Result<TensorState> {
    let n = psi.n();
    let rows: Vec<Vec<Scalar>> = psi.gammas.iter().map(Matrix::vec).collect();
    let mut gammas: Vec<Matrix> = if psi.l() <= 3 {
        psi.gammas.clone()
    } else {
        let (r, pivots) = Matrix::from_rows(rows).rref();
        if pivots.len() > 3 {
            return Err(Error::UnsupportedArity(psi.l()));
        }
        (0..pivots.len())
            .map(|i| Matrix::unvec(n, n, r.row(i)))
            .collect()
    };
    while gammas.len() < 3 {
        gammas.push(Matrix::zeros(n, n));
    }
    TensorState::new(gammas)
}

/// Restricts the slots to their support when the common right and left
/// kernels have the same dimension.
pub fn compress_support(psi: &TensorState) -> Result<Option<TensorState>> {
    let n = psi.n();
    let tall = psi
        .gammas
        .iter()
        .skip(1)
        .fold(psi.gammas[0].clone(), |acc, g| acc.vstack(g));
    let wide = psi
        .gammas
        .iter()
        .skip(1)
        .fold(psi.gammas[0].clone(), |acc, g| acc.hstack(g));
    let right = tall.nullspace();
    let left = wide.transpose().nullspace();
    let d = right.len();
    if d == 0 || d != left.len() || d == n {
        return Ok(None);
    }
    let q = Matrix::from_columns(n, &[complete_basis(n, &right), right].concat());
    let p = Matrix::from_columns(n, &[complete_basis(n, &left), left].concat()).transpose();
    let keep: Vec<usize> = (0..n - d).collect();
    TensorState::new(
        psi.gammas
            .iter()
            .map(|g| (&(&p * g) * &q).select(&keep, &keep))
            .collect(),
    )
    .map(Some)
}

pub fn canonicalize(psi: &TensorState, opts: &CanonOptions) -> Result<Canonicalization> {
    let psi = reduce_arity(psi)?;
    let psi = compress_support(&psi)?.unwrap_or(psi);
    let mr = max_rank_combination(&psi, opts.seed);
    if mr.rank < psi.n() {
        let form = nonfull_rank_split(&psi, opts.seed)?;
        let beta_canonical = beta_canonical_check(&form, opts.seed);
        return Ok(Canonicalization::Split {
            max_rank: mr,
            form,
            beta_canonical,
        });
    }
    let (reduced, _) = full_rank_reduce(&psi, opts.seed)?;
    let (shifted, shifts) = if opts.shift_all {
        eigen_shift(&reduced, &opts.hints)?
    } else {
        eigen_shift_where(&reduced, &opts.hints, |g| g.as_scalar_multiple().is_some())?
    };
    let (cf, _) = commuting_pair_canonical(&shifted.gammas[1], &shifted.gammas[2], &opts.hints)?;
    Ok(Canonicalization::Full {
        cf,
        max_rank: mr,
        shifts,
    })
}

/// `Lambda` plus the `gamma` (full rank) and `beta` (rank deficient) parts
/// of the remaining slots.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PartitionedForm {
    pub n: usize,
    pub m: usize,
    pub i: usize,
    /// Slots after the first, restricted to the `n`-dimensional part where
    /// the first slot is the identity.
    pub gamma_part: Vec<Matrix>,
    /// Slots after the first, restricted to the `m`-dimensional part.
    pub beta_part: Vec<Matrix>,
    /// First slot on the `m`-dimensional part: `diag(1, .., 1, 0, .., 0)`
    /// of rank `m - i`.
    pub lambda_prime: Matrix,
    /// Operators carrying the input to `(I_n + Lambda', gamma + beta)`.
    pub ops: IloTriple,
}

/// Columns completing `vecs` (independent, length `n`) to a basis, taken
/// from the unit vectors in order.
fn complete_basis(n: usize, vecs: &[Vec<Scalar>]) -> Vec<Vec<Scalar>> {
    let mut all = vecs.to_vec();
    let mut extra = Vec::new();
    let mut rank = if all.is_empty() {
        0
    } else {
        Matrix::from_columns(n, &all).rank()
    };
    for k in 0..n {
        if rank == n {
            break;
        }
        let mut e = vec![Scalar::zero(); n];
        e[k] = Scalar::one();
        all.push(e.clone());
        let r = Matrix::from_columns(n, &all).rank();
        if r > rank {
            rank = r;
            extra.push(e);
        } else {
            all.pop();
        }
    }
    extra
}

/// `(P, Q)` with `P g Q = diag(I_r, 0)`.
fn rank_normal_form(g: &Matrix) -> Result<(Matrix, Matrix)> {
    let n = g.rows();
    let kernel = g.nullspace();
    let comp = complete_basis(n, &kernel);
    let mut qcols = comp.clone();
    qcols.extend(kernel);
    let q = Matrix::from_columns(n, &qcols);
    let images: Vec<Vec<Scalar>> = comp.iter().map(|c| g.mul_vec(c)).collect();
    let mut pcols = images.clone();
    pcols.extend(complete_basis(n, &images));
    let p = Matrix::from_columns(n, &pcols).inverse()?;
    Ok((p, q))
}

fn columns(m: &Matrix) -> Vec<Vec<Scalar>> {
    (0..m.cols()).map(|j| m.column(j)).collect()
}

fn span_basis(n: usize, vecs: &[Vec<Scalar>]) -> Vec<Vec<Scalar>> {
    if vecs.is_empty() {
        return Vec::new();
    }
    let (r, pivots) = Matrix::from_columns(n, vecs).transpose().rref();
    (0..pivots.len()).map(|i| r.row(i).to_vec()).collect()
}

/// Basis of `{x : m x in span(target)}`.
fn preimage(m: &Matrix, target: &[Vec<Scalar>]) -> Vec<Vec<Scalar>> {
    let n = m.cols();
    // [m | -target] (x, y) = 0, keep x
    let mut cols = columns(m);
    for t in target {
        cols.push(t.iter().map(|v| -v).collect());
    }
    let k = Matrix::from_columns(m.rows(), &cols).nullspace();
    span_basis(
        n,
        &k.into_iter().map(|v| v[..n].to_vec()).collect::<Vec<_>>(),
    )
}

fn intersect(n: usize, a: &[Vec<Scalar>], b: &[Vec<Scalar>]) -> Vec<Vec<Scalar>> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut cols = a.to_vec();
    cols.extend(b.iter().map(|v| v.iter().map(|x| -x).collect::<Vec<_>>()));
    let k = Matrix::from_columns(n, &cols).nullspace();
    let am = Matrix::from_columns(n, a);
    span_basis(
        n,
        &k.iter()
            .map(|v| am.mul_vec(&v[..a.len()]))
            .collect::<Vec<_>>(),
    )
}

/// Splits a tuple whose maximal rank is `N - i < N` into a part where the
/// first slot is invertible and a remainder, keeping the first slot in the
/// normal form `Lambda`.
pub fn nonfull_rank_split(psi: &TensorState, seed: u64) -> Result<PartitionedForm> {
    let n_all = psi.n();
    let mr = max_rank_combination(psi, seed);
    if mr.rank == n_all {
        return Err(Error::NoSplitFound("tuple has full rank".into()));
    }
    if mr.rank == 0 {
        return Err(Error::NoSplitFound("tuple is zero".into()));
    }
    let i = n_all - mr.rank;
    let t = complete_first_row(&mr.t_row);
    let head = psi.combination(&mr.t_row);
    let (p0, q0) = rank_normal_form(&head)?;
    let ops0 = IloTriple { t, p: p0, q: q0 };
    let st = apply_ilo(psi, &ops0)?;
    let lam = st.gammas[0].clone();
    let others = &st.gammas[1..];

    // Largest X with Gamma_j X inside Lambda X.
    let full: Vec<Vec<Scalar>> = columns(&Matrix::identity(n_all));
    let mut x_inf = full.clone();
    loop {
        let lam_x: Vec<Vec<Scalar>> = x_inf.iter().map(|v| lam.mul_vec(v)).collect();
        let lam_x = span_basis(n_all, &lam_x);
        let mut next = x_inf.clone();
        for g in others {
            next = intersect(n_all, &next, &preimage(g, &lam_x));
        }
        if next.len() == x_inf.len() {
            break;
        }
        x_inf = next;
    }
    // Closure of ker Lambda under Lambda^-1 Gamma_j.
    let mut u_inf = span_basis(n_all, &lam.nullspace());
    loop {
        let mut img: Vec<Vec<Scalar>> = Vec::new();
        for g in others {
            img.extend(u_inf.iter().map(|v| g.mul_vec(v)));
        }
        let mut next = preimage(&lam, &span_basis(n_all, &img));
        next.extend(u_inf.clone());
        let next = span_basis(n_all, &next);
        if next.len() == u_inf.len() {
            break;
        }
        u_inf = next;
    }
    let common = intersect(n_all, &x_inf, &u_inf);
    let n = x_inf.len() - common.len();
    let m = n_all - n;

    // C: complement of the common part inside X_inf.
    let c_cols: Vec<Vec<Scalar>> = {
        let mut acc = common.clone();
        let mut out = Vec::new();
        for v in &x_inf {
            acc.push(v.clone());
            if Matrix::from_columns(n_all, &acc).rank() == acc.len() {
                out.push(v.clone());
            } else {
                acc.pop();
            }
        }
        out
    };
    let x_cols: Vec<Vec<Scalar>> = if n == 0 {
        Vec::new()
    } else {
        lift_regular_part(&lam, others, &c_cols, &common)?
    };
    let xm = Matrix::from_columns(n_all, &x_cols);
    let y_cols: Vec<Vec<Scalar>> = x_cols.iter().map(|v| lam.mul_vec(v)).collect();
    // M_j with Gamma_j X = Y M_j
    let ym = Matrix::from_columns(n_all, &y_cols);
    let mut mbar = Vec::new();
    for g in others {
        let gx = if n == 0 {
            Matrix::zeros(n_all, 0)
        } else {
            g * &xm
        };
        let mut cols = Vec::new();
        for c in columns(&gx) {
            cols.push(
                ym.solve(&c)
                    .ok_or_else(|| Error::NoSplitFound("regular part is not invariant".into()))?,
            );
        }
        mbar.push(Matrix::from_columns(n, &cols));
    }
    // complements X0', Y0' and the correction (psi, chi)
    let x0 = complete_basis(n_all, &x_cols);
    let y0 = complete_basis(n_all, &y_cols);
    let basis_y = Matrix::from_columns(n_all, &[y_cols.clone(), y0.clone()].concat());
    let basis_y_inv = basis_y.inverse()?;
    let x0m = Matrix::from_columns(n_all, &x0);
    let coords = |g: &Matrix| -> (Matrix, Matrix) {
        let c = &basis_y_inv * &(g * &x0m);
        (c.submatrix(0, 0, n, m), c.submatrix(n, 0, m, m))
    };
    let (a0, b0) = coords(&lam);
    let parts: Vec<(Matrix, Matrix)> = others.iter().map(&coords).collect();
    let (psi_m, chi_m) = if n == 0 {
        (Matrix::zeros(0, m), Matrix::zeros(0, m))
    } else {
        solve_complement(&a0, &b0, &mbar, &parts)?
    };
    let xp = &x0m + &(&xm * &psi_m);
    let yp = &Matrix::from_columns(n_all, &y0) + &(&ym * &chi_m);
    let q1 = Matrix::from_columns(n_all, &[x_cols.clone(), columns(&xp)].concat());
    let p1 = Matrix::from_columns(n_all, &[y_cols.clone(), columns(&yp)].concat()).inverse()?;
    let split_ops = IloTriple {
        t: Matrix::identity(psi.l()),
        p: p1,
        q: q1,
    };
    let st2 = apply_ilo(&st, &split_ops)?;
    for g in &st2.gammas {
        let off1 = g.submatrix(0, n, n, m);
        let off2 = g.submatrix(n, 0, m, n);
        if !off1.is_zero() || !off2.is_zero() {
            return Err(Error::NoSplitFound("complement is not invariant".into()));
        }
    }
    // normalize Lambda on the beta part
    let lam_beta = st2.gammas[0].submatrix(n, n, m, m);
    let (pb, qb) = rank_normal_form(&lam_beta)?;
    let pfull = Matrix::block_diag(&[Matrix::identity(n), pb]);
    let qfull = Matrix::block_diag(&[Matrix::identity(n), qb]);
    let norm_ops = IloTriple {
        t: Matrix::identity(psi.l()),
        p: pfull,
        q: qfull,
    };
    let st3 = apply_ilo(&st2, &norm_ops)?;
    let ops = ops0.then(&split_ops).then(&norm_ops);
    let gamma_part = st3.gammas[1..]
        .iter()
        .map(|g| g.submatrix(0, 0, n, n))
        .collect();
    let beta_part: Vec<Matrix> = st3.gammas[1..]
        .iter()
        .map(|g| g.submatrix(n, n, m, m))
        .collect();
    let lambda_prime = st3.gammas[0].submatrix(n, n, m, m);
    if m <= i {
        return Err(Error::NoSplitFound(
            "remainder smaller than the rank deficiency".into(),
        ));
    }
    Ok(PartitionedForm {
        n,
        m,
        i,
        gamma_part,
        beta_part,
        lambda_prime,
        ops,
    })
}

/// Finds `X = C + U phi` with `Gamma_j X = Lambda X M_j`, where `M_j` are
/// the maps induced on `X_inf / U`.
fn lift_regular_part(
    lam: &Matrix,
    others: &[Matrix],
    c_cols: &[Vec<Scalar>],
    common: &[Vec<Scalar>],
) -> Result<Vec<Vec<Scalar>>> {
    let n_all = lam.rows();
    let n = c_cols.len();
    let k = common.len();
    let cm = Matrix::from_columns(n_all, c_cols);
    if k == 0 {
        return Ok(c_cols.to_vec());
    }
    let um = Matrix::from_columns(n_all, common);
    let lc = lam * &cm;
    let lu = lam * &um;
    let lcu = lc.hstack(&lu);
    let mut ms = Vec::new();
    for g in others {
        let gc = g * &cm;
        let mut cols = Vec::new();
        for col in columns(&gc) {
            let sol = lcu
                .solve(&col)
                .ok_or_else(|| Error::NoSplitFound("induced map undefined".into()))?;
            cols.push(sol[..n].to_vec());
        }
        // uniqueness of the X-part of the solution
        if lc.rank() < n || lcu.rank() < lc.rank() + lu.rank() {
            return Err(Error::NoSplitFound("induced map not unique".into()));
        }
        ms.push(Matrix::from_columns(n, &cols));
    }
    // (I kron G U - M^T kron Lambda U) vec(phi) = vec(Lambda C M - G C)
    let mut rows_a: Option<Matrix> = None;
    let mut rhs: Vec<Scalar> = Vec::new();
    for (g, mj) in others.iter().zip(&ms) {
        let gu = g * &um;
        let block = &Matrix::identity(n).kron(&gu) - &mj.transpose().kron(&lu);
        rhs.extend((&(&lc * mj) - &(g * &cm)).vec());
        rows_a = Some(match rows_a {
            None => block,
            Some(a) => a.vstack(&block),
        });
    }
    let a = rows_a.expect("at least one slot");
    let phi = a
        .solve(&rhs)
        .ok_or_else(|| Error::NoSplitFound("regular part does not lift".into()))?;
    let phi = Matrix::unvec(k, n, &phi);
    let x = &cm + &(&um * &phi);
    Ok(columns(&x))
}

/// Solves `psi - chi b0 = -a0`, `M_j psi - chi b_j = -a_j` for `(psi, chi)`.
fn solve_complement(
    a0: &Matrix,
    b0: &Matrix,
    mbar: &[Matrix],
    parts: &[(Matrix, Matrix)],
) -> Result<(Matrix, Matrix)> {
    let n = a0.rows();
    let m = a0.cols();
    // unknowns: vec(psi) (n*m), vec(chi) (n*m)
    let id_m = Matrix::identity(m);
    let id_n = Matrix::identity(n);
    let mut a = id_m.kron(&id_n).hstack(&(-&b0.transpose().kron(&id_n)));
    let mut rhs: Vec<Scalar> = a0.vec().iter().map(|v| -v).collect();
    for (mj, (aj, bj)) in mbar.iter().zip(parts) {
        let block = id_m.kron(mj).hstack(&(-&bj.transpose().kron(&id_n)));
        a = a.vstack(&block);
        rhs.extend(aj.vec().iter().map(|v| -v));
    }
    let sol = a
        .solve(&rhs)
        .ok_or_else(|| Error::NoSplitFound("no invariant complement".into()))?;
    Ok((
        Matrix::unvec(n, m, &sol[..n * m]),
        Matrix::unvec(n, m, &sol[n * m..]),
    ))
}

/// Whether the maximal rank of `Lambda' + sum_j alpha_j beta_j` equals
/// `m - i`, searched like [`max_rank_combination`].
pub fn beta_canonical_check(pf: &PartitionedForm, seed: u64) -> bool {
    if pf.beta_part.iter().all(Matrix::is_zero) {
        return false;
    }
    let best = max_rank_search(Some(&pf.lambda_prime), &pf.beta_part, seed);
    best.rank == pf.m - pf.i
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmat::{int, rat};

    fn st(ms: Vec<Matrix>) -> TensorState {
        TensorState::new(ms).unwrap()
    }

    #[test]
    fn apply_ilo_examples() {
        let e = Matrix::identity(2);
        let j = Matrix::jordan_block(&int(3), 2);
        let psi = st(vec![e.clone(), j.clone()]);
        assert_eq!(apply_ilo(&psi, &IloTriple::identity(2, 2)).unwrap(), psi);
        let swap =
            IloTriple::new(Matrix::from_ints(&[[0, 1], [1, 0]]), e.clone(), e.clone()).unwrap();
        assert_eq!(
            apply_ilo(&psi, &swap).unwrap().gammas(),
            &[j.clone(), e.clone()]
        );
        let up =
            IloTriple::new(Matrix::from_ints(&[[1, 1], [0, 1]]), e.clone(), e.clone()).unwrap();
        assert_eq!(apply_ilo(&psi, &up).unwrap().gammas(), &[&e + &j, j]);
    }

    #[test]
    fn max_rank_examples() {
        let psi = st(vec![Matrix::identity(2), Matrix::zeros(2, 2)]);
        let mr = max_rank_combination(&psi, 0);
        assert_eq!((mr.t_row, mr.rank), (vec![int(1), int(0)], 2));
        let psi = st(vec![
            Matrix::diag(&[int(1), int(0)]),
            Matrix::diag(&[int(0), int(1)]),
        ]);
        let mr = max_rank_combination(&psi, 0);
        assert_eq!((mr.t_row, mr.rank), (vec![int(1), int(1)], 2));
        let n = Matrix::jordan_block(&int(0), 2);
        let psi = st(vec![n.clone(), n.transpose()]);
        let mr = max_rank_combination(&psi, 0);
        assert_eq!(
            (mr.t_row, mr.rank, mr.certified),
            (vec![int(1), int(1)], 2, true)
        );
    }

    #[test]
    fn full_rank_reduce_examples() {
        let m = Matrix::from_ints(&[[1, 2], [3, 4]]);
        let psi = st(vec![Matrix::diag(&[int(2), int(3)]), m.clone()]);
        let (out, _) = full_rank_reduce(&psi, 0).unwrap();
        assert_eq!(out.gammas()[0], Matrix::identity(2));
        assert_eq!(out.gammas()[1], &Matrix::diag(&[rat(1, 2), rat(1, 3)]) * &m);
        let psi = st(vec![Matrix::identity(2), m.clone()]);
        assert_eq!(full_rank_reduce(&psi, 0).unwrap().0, psi);
        let psi = st(vec![
            Matrix::diag(&[int(1), int(0)]),
            Matrix::diag(&[int(0), int(1)]),
        ]);
        let (out, _) = full_rank_reduce(&psi, 0).unwrap();
        assert!(out.gammas()[0].is_identity());
    }

    #[test]
    fn eigen_shift_examples() {
        let i2 = Matrix::identity(2);
        let (out, _) = eigen_shift(&st(vec![i2.clone(), i2.clone()]), &[]).unwrap();
        assert!(out.gammas()[1].is_zero());
        let (out, _) =
            eigen_shift(&st(vec![i2.clone(), Matrix::diag(&[int(2), int(3)])]), &[]).unwrap();
        assert_eq!(out.gammas()[1], Matrix::diag(&[int(0), int(1)]));
        let (out, _) = eigen_shift(&st(vec![i2, Matrix::jordan_block(&int(5), 2)]), &[]).unwrap();
        assert_eq!(out.gammas()[1], Matrix::jordan_block(&int(0), 2));
    }

    #[test]
    fn commuting_pair_examples() {
        let (cf, _) = commuting_pair_canonical(
            &Matrix::diag(&[int(1), int(2)]),
            &Matrix::diag(&[int(5), int(7)]),
            &[],
        )
        .unwrap();
        assert_eq!(
            cf.single_blocks(),
            vec![
                (int(1), TruncPoly::from_ints(&[5])),
                (int(2), TruncPoly::from_ints(&[7]))
            ]
        );
        let (cf, _) = commuting_pair_canonical(
            &Matrix::from_ints(&[[1, 1], [0, 1]]),
            &Matrix::from_ints(&[[2, 3], [0, 2]]),
            &[],
        )
        .unwrap();
        assert_eq!(
            cf.single_blocks(),
            vec![(int(1), TruncPoly::from_ints(&[2, 3]))]
        );
        assert_eq!(
            commuting_pair_canonical(
                &Matrix::from_ints(&[[1, 1], [0, 1]]),
                &Matrix::from_ints(&[[0, 0], [1, 0]]),
                &[]
            )
            .unwrap_err(),
            Error::NotCommuting
        );
    }

    fn split_example() -> TensorState {
        let lam = Matrix::diag(&[int(1), int(1), int(0)]);
        let g2 = Matrix::from_ints(&[[5, 0, 0], [0, 0, 1], [0, 0, 0]]);
        st(vec![lam, g2])
    }

    #[test]
    fn split_fixed_point() {
        let pf = nonfull_rank_split(&split_example(), 0).unwrap();
        assert_eq!((pf.n, pf.m, pf.i), (1, 2, 1));
        assert_eq!(pf.gamma_part, vec![Matrix::from_ints(&[[5]])]);
        assert_eq!(pf.lambda_prime, Matrix::diag(&[int(1), int(0)]));
        assert!(beta_canonical_check(&pf, 0));
    }

    #[test]
    fn split_of_conjugated_state() {
        // P Lambda Q = Lambda for P = [[A, B],[0, D]], Q = [[A^-1, 0],[G, F]]
        let p = Matrix::from_ints(&[[2, 1, 3], [1, 1, -1], [0, 0, 4]]);
        let ainv = p.submatrix(0, 0, 2, 2).inverse().unwrap();
        let mut q = Matrix::zeros(3, 3);
        q.set_block(0, 0, &ainv);
        q.set_block(2, 0, &Matrix::from_ints(&[[1, -2]]));
        q[(2, 2)] = int(3);
        let lam = Matrix::diag(&[int(1), int(1), int(0)]);
        assert_eq!(&(&p * &lam) * &q, lam);
        let ops = IloTriple::new(Matrix::identity(2), p, q).unwrap();
        let moved = apply_ilo(&split_example(), &ops).unwrap();
        let pf = nonfull_rank_split(&moved, 0).unwrap();
        assert_eq!((pf.n, pf.m, pf.i), (1, 2, 1));
        assert_eq!(pf.gamma_part, vec![Matrix::from_ints(&[[5]])]);
        let beta = &pf.beta_part[0];
        assert_eq!(beta.rank(), 1);
        assert!(beta_canonical_check(&pf, 0));
    }

    #[test]
    fn no_nontrivial_split() {
        let psi = st(vec![
            Matrix::diag(&[int(1), int(0)]),
            Matrix::from_ints(&[[0, 1], [0, 0]]),
        ]);
        let pf = nonfull_rank_split(&psi, 0).unwrap();
        assert_eq!((pf.n, pf.m, pf.i), (0, 2, 1));
        assert!(beta_canonical_check(&pf, 0));
    }

    #[test]
    fn beta_predicate_negative() {
        let pf = PartitionedForm {
            n: 0,
            m: 2,
            i: 1,
            gamma_part: vec![],
            beta_part: vec![Matrix::diag(&[int(0), int(1)])],
            lambda_prime: Matrix::diag(&[int(1), int(0)]),
            ops: IloTriple::identity(2, 2),
        };
        assert!(!beta_canonical_check(&pf, 0));
    }
}
