use serde::{Deserialize, Serialize};

use super::{eigenvalues_in_field, Matrix, Scalar};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct JordanBlock {
    pub lambda: Scalar,
    pub size: usize,
}

/// Ordered Jordan block list. Runs of equal eigenvalue are adjacent, runs
/// are sorted by the total order on [`Scalar`], sizes never increase inside
/// a run.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct JordanSpec {
    blocks: Vec<JordanBlock>,
}

impl JordanSpec {
    /// Sorts the blocks into normal order.
    pub fn new(mut blocks: Vec<JordanBlock>) -> Result<Self> {
        if blocks.iter().any(|b| b.size == 0) {
            return Err(Error::BadProfile("block of size zero".into()));
        }
        blocks.sort_by(|a, b| a.lambda.cmp(&b.lambda).then(b.size.cmp(&a.size)));
        Ok(Self { blocks })
    }

    pub fn from_pairs(pairs: &[(Scalar, usize)]) -> Result<Self> {
        Self::new(
            pairs
                .iter()
                .map(|(lambda, size)| JordanBlock {
                    lambda: lambda.clone(),
                    size: *size,
                })
                .collect(),
        )
    }

    pub fn blocks(&self) -> &[JordanBlock] {
        &self.blocks
    }

    pub fn n(&self) -> usize {
        self.blocks.iter().map(|b| b.size).sum()
    }

    pub fn offsets(&self) -> Vec<usize> {
        self.blocks
            .iter()
            .scan(0, |acc, b| {
                let o = *acc;
                *acc += b.size;
                Some(o)
            })
            .collect()
    }

    /// Runs of equal eigenvalue as `(lambda, sizes)`.
    pub fn runs(&self) -> Vec<(Scalar, Vec<usize>)> {
        let mut out: Vec<(Scalar, Vec<usize>)> = Vec::new();
        for b in &self.blocks {
            match out.last_mut() {
                Some((l, sizes)) if *l == b.lambda => sizes.push(b.size),
                _ => out.push((b.lambda.clone(), vec![b.size])),
            }
        }
        out
    }

    /// Block sizes sorted in decreasing order.
    pub fn size_multiset(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.blocks.iter().map(|b| b.size).collect();
        s.sort_unstable_by(|a, b| b.cmp(a));
        s
    }

    pub fn matrix(&self) -> Matrix {
        Matrix::block_diag(
            &self
                .blocks
                .iter()
                .map(|b| Matrix::jordan_block(&b.lambda, b.size))
                .collect::<Vec<_>>(),
        )
    }
}

/// Returns `(s, spec)` with `s^-1 m s = spec.matrix()`.
///
/// Chains come from kernels of `(m - lambda)^k`. Chain tops at each level
/// are taken greedily from the reduced-echelon kernel basis, so the
/// output is deterministic.
pub fn jordan_decompose(m: &Matrix, hints: &[Scalar]) -> Result<(Matrix, JordanSpec)> {
    let n = m.rows();
    let eigs = eigenvalues_in_field(m, hints)?;
    let mut distinct: Vec<(Scalar, usize)> = Vec::new();
    for e in eigs {
        match distinct.last_mut() {
            Some((l, c)) if *l == e => *c += 1,
            _ => distinct.push((e, 1)),
        }
    }
    let mut columns: Vec<Vec<Scalar>> = Vec::with_capacity(n);
    let mut blocks = Vec::new();
    for (lambda, mult) in distinct {
        let b = m - &Matrix::scalar(n, &lambda);
        let mut kernels: Vec<Vec<Vec<Scalar>>> = vec![Vec::new()];
        let mut power = Matrix::identity(n);
        while kernels.last().unwrap().len() < mult {
            power = &power * &b;
            kernels.push(power.nullspace());
        }
        let kmax = kernels.len() - 1;
        // (top vector, chain length)
        let mut chains: Vec<(Vec<Scalar>, usize)> = Vec::new();
        for k in (1..=kmax).rev() {
            let longer = chains.iter().filter(|(_, l)| *l > k).count();
            let need = kernels[k].len() - kernels[k - 1].len() - longer;
            if need == 0 {
                continue;
            }
            let mut span: Vec<Vec<Scalar>> = kernels[k - 1].clone();
            for (v, l) in &chains {
                span.push(b.pow((l - k) as u32).mul_vec(v));
            }
            let mut rank = rank_of(n, &span);
            let mut taken = 0;
            for cand in &kernels[k] {
                if taken == need {
                    break;
                }
                span.push(cand.clone());
                let r = rank_of(n, &span);
                if r > rank {
                    rank = r;
                    taken += 1;
                    chains.push((cand.clone(), k));
                } else {
                    span.pop();
                }
            }
            debug_assert_eq!(taken, need);
        }
        for (v, len) in chains {
            let mut chain = vec![v];
            for _ in 1..len {
                let next = b.mul_vec(chain.last().unwrap());
                chain.push(next);
            }
            chain.reverse();
            columns.extend(chain);
            blocks.push(JordanBlock {
                lambda: lambda.clone(),
                size: len,
            });
        }
    }
    let s = Matrix::from_columns(n, &columns);
    Ok((s, JordanSpec { blocks }))
}

fn rank_of(n: usize, vecs: &[Vec<Scalar>]) -> usize {
    if vecs.is_empty() {
        return 0;
    }
    Matrix::from_columns(n, vecs).rank()
}

/// Basis of the matrices commuting with `spec.matrix()`.
///
/// For blocks `i, j` with the same eigenvalue the `(i, j)` block of a
/// commuting matrix is the top-left `n_i x n_j` corner of an upper
/// triangular Toeplitz matrix whose band index `d = col - row` runs over
/// `max(0, n_j - n_i) .. n_j`. One basis element per admissible band.
pub fn commutant_basis(spec: &JordanSpec) -> Vec<Matrix> {
    let n = spec.n();
    let offs = spec.offsets();
    let blocks = spec.blocks();
    let mut out = Vec::new();
    for (i, bi) in blocks.iter().enumerate() {
        for (j, bj) in blocks.iter().enumerate() {
            if bi.lambda != bj.lambda {
                continue;
            }
            for d in bj.size.saturating_sub(bi.size)..bj.size {
                let mut m = Matrix::zeros(n, n);
                for r in 0..bi.size {
                    if r + d < bj.size {
                        m[(offs[i] + r, offs[j] + r + d)] = Scalar::one();
                    }
                }
                out.push(m);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmat::int;

    fn check(m: &Matrix) -> JordanSpec {
        let (s, spec) = jordan_decompose(m, &[]).unwrap();
        let si = s.inverse().unwrap();
        assert_eq!(&(&si * m) * &s, spec.matrix());
        spec
    }

    #[test]
    fn spec_examples() {
        let d = Matrix::diag(&[int(3), int(3)]);
        let (s, spec) = jordan_decompose(&d, &[]).unwrap();
        assert_eq!(s, Matrix::identity(2));
        assert_eq!(
            spec,
            JordanSpec::from_pairs(&[(int(3), 1), (int(3), 1)]).unwrap()
        );

        let spec = check(&Matrix::from_ints(&[[1, 1], [0, 1]]));
        assert_eq!(spec, JordanSpec::from_pairs(&[(int(1), 2)]).unwrap());

        let spec = check(&Matrix::from_ints(&[[5, 4], [-4, -3]]));
        assert_eq!(spec, JordanSpec::from_pairs(&[(int(1), 2)]).unwrap());
    }

    #[test]
    fn derogatory_ordering() {
        let j =
            JordanSpec::from_pairs(&[(int(2), 1), (int(1), 1), (int(2), 3), (int(1), 2)]).unwrap();
        let sizes: Vec<(Scalar, usize)> = j
            .blocks()
            .iter()
            .map(|b| (b.lambda.clone(), b.size))
            .collect();
        assert_eq!(
            sizes,
            vec![(int(1), 2), (int(1), 1), (int(2), 3), (int(2), 1)]
        );
        let p = Matrix::from_ints(&[
            [1, 2, 0, 0, 1, 0, 0],
            [0, 1, 1, 0, 0, 0, 1],
            [0, 0, 1, 0, 2, 0, 0],
            [1, 0, 0, 1, 0, 0, 0],
            [0, 0, 0, 0, 1, 3, 0],
            [0, 1, 0, 0, 0, 1, 0],
            [0, 0, 0, 2, 0, 0, 1],
        ]);
        let m = &(&p * &j.matrix()) * &p.inverse().unwrap();
        assert_eq!(check(&m), j);
    }

    #[test]
    fn commutant_counts() {
        let l = int(4);
        assert_eq!(
            commutant_basis(&JordanSpec::from_pairs(&[(l.clone(), 1)]).unwrap()).len(),
            1
        );
        let one = JordanSpec::from_pairs(&[(l.clone(), 3)]).unwrap();
        let b = commutant_basis(&one);
        let n = Matrix::jordan_block(&Scalar::zero(), 3);
        assert_eq!(b, vec![Matrix::identity(3), n.clone(), &n * &n]);
        let two = JordanSpec::from_pairs(&[(l.clone(), 3), (l, 2)]).unwrap();
        let b = commutant_basis(&two);
        assert_eq!(b.len(), 9);
        for m in &b {
            assert!(m.commutator(&two.matrix()).is_zero());
        }
    }
}
