//! Truncated polynomials in the nilpotent shift `x = J_n(0)`, so `x^n = 0`.

mod grid;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactmat::{Matrix, Scalar};

pub use grid::{commutant_to_poly_matrix, poly_matrix_to_commutant, PolyGrid};

/// `coeffs[k]` is the coefficient of `x^k`; the order is `coeffs.len()`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TruncPoly {
    coeffs: Vec<Scalar>,
}

impl TruncPoly {
    /// Panics on an empty coefficient list.
    pub fn new(coeffs: Vec<Scalar>) -> Self {
        assert!(!coeffs.is_empty(), "truncated polynomial needs order >= 1");
        Self { coeffs }
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Scalar::from_int(c)).collect())
    }

    pub fn zero(order: usize) -> Self {
        Self::new(vec![Scalar::zero(); order])
    }

    pub fn constant(c: Scalar, order: usize) -> Self {
        let mut p = Self::zero(order);
        p.coeffs[0] = c;
        p
    }

    pub fn one(order: usize) -> Self {
        Self::constant(Scalar::one(), order)
    }

    /// `lambda + x`.
    pub fn affine(lambda: Scalar, order: usize) -> Self {
        let mut p = Self::constant(lambda, order);
        if order > 1 {
            p.coeffs[1] = Scalar::one();
        }
        p
    }

    pub fn x(order: usize) -> Self {
        Self::affine(Scalar::zero(), order)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Scalar> {
        self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Scalar {
        self.coeffs.get(k).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Scalar::is_zero)
    }

    /// Truncates or zero-pads to `order`.
    pub fn resized(&self, order: usize) -> Self {
        let mut c = self.coeffs.clone();
        c.resize(order, Scalar::zero());
        Self::new(c)
    }

    fn same_order(&self, other: &Self) -> Result<()> {
        if self.order() == other.order() {
            Ok(())
        } else {
            Err(Error::OrderMismatch(self.order(), other.order()))
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_order(other)?;
        Ok(Self::new(
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        ))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_order(other)?;
        Ok(Self::new(
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        ))
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        Self::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    /// Cauchy product modulo `x^order`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_order(other)?;
        let n = self.order();
        let mut out = vec![Scalar::zero(); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs[..n - i].iter().enumerate() {
                if !b.is_zero() {
                    out[i + j] += &(a * b);
                }
            }
        }
        Ok(Self::new(out))
    }

    /// Multiplicative inverse by triangular back-substitution.
    pub fn reciprocal(&self) -> Result<Self> {
        let inv0 = self.coeffs[0].inv().ok_or(Error::NotInvertible)?;
        let n = self.order();
        let mut g: Vec<Scalar> = Vec::with_capacity(n);
        g.push(inv0.clone());
        for m in 1..n {
            let mut acc = Scalar::zero();
            for k in 1..=m {
                if !self.coeffs[k].is_zero() {
                    acc += &(&self.coeffs[k] * &g[m - k]);
                }
            }
            g.push(-(&acc * &inv0));
        }
        Ok(Self::new(g))
    }

    /// `self / other`.
    pub fn div(&self, other: &Self) -> Result<Self> {
        self.mul(&other.reciprocal()?)
    }

    /// `self(g(x))` modulo `x^order`; `g` may have a nonzero constant term.
    pub fn compose(&self, g: &Self) -> Result<Self> {
        self.same_order(g)?;
        let n = self.order();
        let mut acc = Self::zero(n);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(g)?;
            acc.coeffs[0] += c;
        }
        Ok(acc)
    }

    /// Inverse of `self - self(0)` under composition: the returned `g` has
    /// `g(0) = 0` and `g(self(x) - self(0)) = x` modulo `x^order`.
    pub fn shifted_reversion(&self) -> Result<Self> {
        let n = self.order();
        if n == 1 {
            return Ok(Self::zero(1));
        }
        let h1 = self.coeffs[1].clone();
        let h1_inv = h1.inv().ok_or(Error::NotReversible)?;
        let mut h = self.clone();
        h.coeffs[0] = Scalar::zero();
        // powers[k] = h^k
        let mut powers = vec![Self::one(n), h.clone()];
        for k in 2..n {
            let next = powers[k - 1].mul(&h)?;
            powers.push(next);
        }
        let mut b = vec![Scalar::zero(); n];
        let mut h1_pow_inv = Scalar::one();
        for m in 1..n {
            h1_pow_inv = &h1_pow_inv * &h1_inv;
            let mut rhs = if m == 1 {
                Scalar::one()
            } else {
                Scalar::zero()
            };
            for k in 1..m {
                if !b[k].is_zero() {
                    rhs -= &(&b[k] * &powers[k].coeffs[m]);
                }
            }
            b[m] = &rhs * &h1_pow_inv;
        }
        Ok(Self::new(b))
    }

    /// `self(J_order(lambda))` as an explicit matrix.
    pub fn eval_at_jordan(&self, lambda: &Scalar) -> Matrix {
        let n = self.order();
        let j = Matrix::jordan_block(lambda, n);
        let mut acc = Matrix::zeros(n, n);
        for c in self.coeffs.iter().rev() {
            acc = &acc * &j;
            for i in 0..n {
                acc[(i, i)] += c;
            }
        }
        acc
    }

    /// Upper-triangular Toeplitz matrix with first row `coeffs`.
    pub fn to_toeplitz(&self) -> Matrix {
        let n = self.order();
        Matrix::from_fn(n, n, |r, c| {
            if c >= r {
                self.coeffs[c - r].clone()
            } else {
                Scalar::zero()
            }
        })
    }

    pub fn from_toeplitz(m: &Matrix) -> Result<Self> {
        if !m.is_square() || m.rows() == 0 {
            return Err(Error::NotToeplitz);
        }
        let p = Self::new(m.row(0).to_vec());
        if p.to_toeplitz() == *m {
            Ok(p)
        } else {
            Err(Error::NotToeplitz)
        }
    }
}

pub fn toeplitz_to_poly(m: &Matrix) -> Result<TruncPoly> {
    TruncPoly::from_toeplitz(m)
}

pub fn poly_to_toeplitz(f: &TruncPoly) -> Matrix {
    f.to_toeplitz()
}

impl fmt::Display for TruncPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| {
                let c = if c.is_real() {
                    c.to_string()
                } else {
                    format!("({c})")
                };
                match k {
                    0 => c,
                    1 => format!("{c}x"),
                    _ => format!("{c}x^{k}"),
                }
            })
            .collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
        .and_then(|_| write!(f, " mod x^{}", self.order()))
    }
}

impl fmt::Debug for TruncPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmat::{int, rat};

    fn p(c: &[i64]) -> TruncPoly {
        TruncPoly::from_ints(c)
    }

    #[test]
    fn mul_examples() {
        assert_eq!(p(&[1, 1, 0]).mul(&p(&[1, -1, 0])).unwrap(), p(&[1, 0, -1]));
        assert_eq!(p(&[0, 1]).mul(&p(&[0, 1])).unwrap(), p(&[0, 0]));
        assert_eq!(p(&[1, 1, 1]).mul(&p(&[1, 1, 0])).unwrap(), p(&[1, 2, 2]));
        assert_eq!(
            p(&[1, 1]).mul(&p(&[1, 1, 0])),
            Err(Error::OrderMismatch(2, 3))
        );
    }

    #[test]
    fn reciprocal_examples() {
        assert_eq!(p(&[1, 1, 0]).reciprocal().unwrap(), p(&[1, -1, 1]));
        assert_eq!(
            p(&[2, 0]).reciprocal().unwrap(),
            TruncPoly::new(vec![rat(1, 2), int(0)])
        );
        assert_eq!(p(&[1, 2, 1]).reciprocal().unwrap(), p(&[1, -2, 3]));
        assert_eq!(p(&[0, 1]).reciprocal(), Err(Error::NotInvertible));
    }

    #[test]
    fn compose_examples() {
        let g = p(&[3, -1, 4]);
        assert_eq!(TruncPoly::x(3).compose(&g).unwrap(), g);
        assert_eq!(
            p(&[0, 0, 1]).compose(&p(&[1, 1, 0])).unwrap(),
            p(&[1, 2, 1])
        );
        let l = rat(5, 7);
        let f = p(&[1, 1, 0]);
        let out = f.compose(&TruncPoly::affine(l.clone(), 3)).unwrap();
        assert_eq!(out, TruncPoly::new(vec![&int(1) + &l, int(1), int(0)]));
    }

    #[test]
    fn reversion_examples() {
        assert_eq!(
            TruncPoly::x(4).shifted_reversion().unwrap(),
            TruncPoly::x(4)
        );
        assert_eq!(p(&[0, 1, 1]).shifted_reversion().unwrap(), p(&[0, 1, -1]));
        assert_eq!(p(&[2, 0, 1]).shifted_reversion(), Err(Error::NotReversible));
    }

    #[test]
    fn toeplitz_examples() {
        assert_eq!(
            TruncPoly::from_toeplitz(&Matrix::identity(2)).unwrap(),
            p(&[1, 0])
        );
        let m = Matrix::from_ints(&[[2, 3, 0], [0, 2, 3], [0, 0, 2]]);
        assert_eq!(toeplitz_to_poly(&m).unwrap(), p(&[2, 3, 0]));
        assert_eq!(poly_to_toeplitz(&p(&[2, 3, 0])), m);
        let n3 = Matrix::jordan_block(&Scalar::zero(), 3);
        assert_eq!(toeplitz_to_poly(&n3).unwrap(), TruncPoly::x(3));
        let bad = Matrix::from_ints(&[[1, 0], [1, 1]]);
        assert_eq!(toeplitz_to_poly(&bad), Err(Error::NotToeplitz));
    }

    #[test]
    fn eval_examples() {
        let l = rat(-2, 3);
        let f = TruncPoly::affine(l.clone(), 4);
        assert_eq!(
            f.eval_at_jordan(&Scalar::zero()),
            Matrix::jordan_block(&l, 4)
        );
        assert_eq!(
            TruncPoly::one(3).eval_at_jordan(&int(9)),
            Matrix::identity(3)
        );
        let a = p(&[4, 5, 6]);
        assert_eq!(a.eval_at_jordan(&Scalar::zero()), a.to_toeplitz());
    }
}
