use serde::{Deserialize, Serialize};

use super::TruncPoly;
use crate::error::{Error, Result};
use crate::exactmat::Matrix;

/// Polynomial description of a matrix commuting with a run of Jordan
/// blocks that share one eigenvalue.
///
/// Entry `(i, j)` has order `n_j`. The `(i, j)` block of the matrix is the
/// top-left `n_i x n_j` corner of the Toeplitz matrix of entry `(i, j)`, so
/// coefficients below degree `n_j - n_i` must vanish when `n_j > n_i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PolyGrid {
    sizes: Vec<usize>,
    entries: Vec<Vec<TruncPoly>>,
}

fn low_degree(ni: usize, nj: usize) -> usize {
    nj.saturating_sub(ni)
}

impl PolyGrid {
    pub fn new(sizes: Vec<usize>, entries: Vec<Vec<TruncPoly>>) -> Result<Self> {
        let k = sizes.len();
        if k == 0 || sizes.contains(&0) {
            return Err(Error::PatternViolation("empty block list".into()));
        }
        if entries.len() != k || entries.iter().any(|r| r.len() != k) {
            return Err(Error::PatternViolation(
                "grid is not square over the blocks".into(),
            ));
        }
        for (i, row) in entries.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                if e.order() != sizes[j] {
                    return Err(Error::PatternViolation(format!(
                        "entry ({i},{j}) has order {} but block {j} has size {}",
                        e.order(),
                        sizes[j]
                    )));
                }
                let lo = low_degree(sizes[i], sizes[j]);
                if e.coeffs()[..lo].iter().any(|c| !c.is_zero()) {
                    return Err(Error::PatternViolation(format!(
                        "entry ({i},{j}) must vanish below degree {lo}"
                    )));
                }
            }
        }
        Ok(Self { sizes, entries })
    }

    pub fn single(f: TruncPoly) -> Self {
        Self {
            sizes: vec![f.order()],
            entries: vec![vec![f]],
        }
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn n(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn entry(&self, i: usize, j: usize) -> &TruncPoly {
        &self.entries[i][j]
    }

    pub fn entries(&self) -> &[Vec<TruncPoly>] {
        &self.entries
    }

    pub fn is_single(&self) -> bool {
        self.sizes.len() == 1
    }

    pub fn to_matrix(&self) -> Matrix {
        let n = self.n();
        let mut m = Matrix::zeros(n, n);
        let mut ro = 0;
        for (i, &ni) in self.sizes.iter().enumerate() {
            let mut co = 0;
            for (j, &nj) in self.sizes.iter().enumerate() {
                let p = &self.entries[i][j];
                for r in 0..ni {
                    for c in r..nj {
                        m[(ro + r, co + c)] = p.coeffs()[c - r].clone();
                    }
                }
                co += nj;
            }
            ro += ni;
        }
        m
    }

    /// The grid with blocks reordered: new block `k` is old block `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self {
            sizes: perm.iter().map(|&p| self.sizes[p]).collect(),
            entries: perm
                .iter()
                .map(|&i| perm.iter().map(|&j| self.entries[i][j].clone()).collect())
                .collect(),
        }
    }

    /// Block-diagonal union of two grids (off-diagonal entries zero).
    pub fn direct_sum(&self, other: &Self) -> Self {
        let sizes: Vec<usize> = self.sizes.iter().chain(&other.sizes).copied().collect();
        let k1 = self.sizes.len();
        let entries = (0..sizes.len())
            .map(|i| {
                (0..sizes.len())
                    .map(|j| match (i < k1, j < k1) {
                        (true, true) => self.entries[i][j].clone(),
                        (false, false) => other.entries[i - k1][j - k1].clone(),
                        _ => TruncPoly::zero(sizes[j]),
                    })
                    .collect()
            })
            .collect();
        Self { sizes, entries }
    }

    /// Constant terms as a `k x k` matrix over the blocks.
    pub fn constant_terms(&self) -> Matrix {
        let k = self.sizes.len();
        Matrix::from_fn(k, k, |i, j| self.entries[i][j].coeff(0))
    }
}

/// Assembles the explicit commutant element described by `grid`.
pub fn poly_matrix_to_commutant(entries: Vec<Vec<TruncPoly>>, sizes: Vec<usize>) -> Result<Matrix> {
    Ok(PolyGrid::new(sizes, entries)?.to_matrix())
}

/// Reads the polynomial grid back from a matrix with the commutant pattern.
pub fn commutant_to_poly_matrix(m: &Matrix, sizes: &[usize]) -> Result<PolyGrid> {
    let n: usize = sizes.iter().sum();
    if m.rows() != n || m.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix for blocks summing to {n}",
            m.rows(),
            m.cols()
        )));
    }
    let offs: Vec<usize> = sizes
        .iter()
        .scan(0, |a, &s| {
            let o = *a;
            *a += s;
            Some(o)
        })
        .collect();
    let entries: Vec<Vec<TruncPoly>> = sizes
        .iter()
        .enumerate()
        .map(|(i, _)| {
            sizes
                .iter()
                .enumerate()
                .map(|(j, &nj)| {
                    TruncPoly::new((0..nj).map(|d| m[(offs[i], offs[j] + d)].clone()).collect())
                })
                .collect()
        })
        .collect();
    let grid = PolyGrid::new(sizes.to_vec(), entries)?;
    if grid.to_matrix() != *m {
        return Err(Error::PatternViolation(
            "matrix is not in the commutant".into(),
        ));
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmat::{commutant_basis, int, JordanSpec, Scalar};

    fn sym(i: i64) -> Scalar {
        int(i)
    }

    #[test]
    fn three_two_example_matches_explicit_matrix() {
        // a_ijk -> distinct integers 100*i + 10*j + k
        let a = |i: i64, j: i64, k: i64| sym(100 * i + 10 * j + k);
        let z = Scalar::zero;
        let entries = vec![
            vec![
                TruncPoly::new(vec![a(1, 1, 0), a(1, 1, 1), a(1, 1, 2)]),
                TruncPoly::new(vec![a(1, 2, 0), a(1, 2, 1)]),
            ],
            vec![
                TruncPoly::new(vec![z(), a(2, 1, 0), a(2, 1, 1)]),
                TruncPoly::new(vec![a(2, 2, 0), a(2, 2, 1)]),
            ],
        ];
        let m = poly_matrix_to_commutant(entries.clone(), vec![3, 2]).unwrap();
        let want = Matrix::from_rows(vec![
            vec![a(1, 1, 0), a(1, 1, 1), a(1, 1, 2), a(1, 2, 0), a(1, 2, 1)],
            vec![z(), a(1, 1, 0), a(1, 1, 1), z(), a(1, 2, 0)],
            vec![z(), z(), a(1, 1, 0), z(), z()],
            vec![z(), a(2, 1, 0), a(2, 1, 1), a(2, 2, 0), a(2, 2, 1)],
            vec![z(), z(), a(2, 1, 0), z(), a(2, 2, 0)],
        ]);
        assert_eq!(m, want);
        let spec = JordanSpec::from_pairs(&[(int(7), 3), (int(7), 2)]).unwrap();
        assert!(m.commutator(&spec.matrix()).is_zero());
        let back = commutant_to_poly_matrix(&m, &[3, 2]).unwrap();
        assert_eq!(back.entries(), &entries[..]);
    }

    #[test]
    fn pattern_violation_detected() {
        let entries = vec![
            vec![
                TruncPoly::from_ints(&[1, 0, 0]),
                TruncPoly::from_ints(&[0, 0]),
            ],
            vec![
                TruncPoly::from_ints(&[5, 0, 0]),
                TruncPoly::from_ints(&[1, 0]),
            ],
        ];
        assert!(matches!(
            poly_matrix_to_commutant(entries, vec![3, 2]),
            Err(Error::PatternViolation(_))
        ));
    }

    #[test]
    fn equal_sizes_constant_grid_matches_direct_solve() {
        let entries = vec![
            vec![TruncPoly::from_ints(&[1, 0]), TruncPoly::from_ints(&[2, 0])],
            vec![TruncPoly::from_ints(&[3, 0]), TruncPoly::from_ints(&[4, 0])],
        ];
        let m = poly_matrix_to_commutant(entries, vec![2, 2]).unwrap();
        let spec = JordanSpec::from_pairs(&[(int(0), 2), (int(0), 2)]).unwrap();
        assert!(m.commutator(&spec.matrix()).is_zero());
        // m lies in the span of the commutant basis
        let basis = commutant_basis(&spec);
        let cols: Vec<Vec<Scalar>> = basis.iter().map(|b| b.vec()).collect();
        let a = Matrix::from_columns(16, &cols);
        assert!(a.solve(&m.vec()).is_some());
    }
}
