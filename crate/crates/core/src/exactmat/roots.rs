//! Roots in `Q(i)` of polynomials with Gaussian-rational coefficients.
//!
//! Distinct roots of the squarefree part are found p-adically: for a prime
//! `p = 1 mod 4` with `s^2 = -1 (mod p)` the two embeddings `i -> s` and
//! `i -> -s` send a root `a + bi` to `a + bs` and `a - bs`. Roots modulo `p`
//! are found by brute force, Hensel-lifted past a height bound, and paired
//! back into `(a, b)`. Every candidate is then checked exactly.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{Matrix, Scalar};
use crate::error::{Error, Result};

/// Polynomials are coefficient vectors in ascending degree order.
pub(crate) type Poly = Vec<Scalar>;

pub(crate) fn trim(mut p: Poly) -> Poly {
    while p.len() > 1 && p.last().is_some_and(Scalar::is_zero) {
        p.pop();
    }
    if p.is_empty() {
        p.push(Scalar::zero());
    }
    p
}

fn degree(p: &[Scalar]) -> usize {
    p.len().saturating_sub(1)
}

pub(crate) fn eval(p: &[Scalar], x: &Scalar) -> Scalar {
    p.iter()
        .rev()
        .fold(Scalar::zero(), |acc, c| &(&acc * x) + c)
}

fn deriv(p: &[Scalar]) -> Poly {
    if p.len() <= 1 {
        return vec![Scalar::zero()];
    }
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c * &Scalar::from_int(k as i64))
        .collect()
}

fn divrem(a: &[Scalar], b: &[Scalar]) -> (Poly, Poly) {
    let b = trim(b.to_vec());
    assert!(
        !(b.len() == 1 && b[0].is_zero()),
        "division by zero polynomial"
    );
    let mut r = trim(a.to_vec());
    if r.len() < b.len() {
        return (vec![Scalar::zero()], r);
    }
    let lead_inv = b.last().unwrap().inv().unwrap();
    let mut q = vec![Scalar::zero(); r.len() - b.len() + 1];
    for k in (0..q.len()).rev() {
        let c = &r[k + b.len() - 1] * &lead_inv;
        if !c.is_zero() {
            for (j, bj) in b.iter().enumerate() {
                let d = &c * bj;
                r[k + j] -= &d;
            }
        }
        q[k] = c;
    }
    r.truncate(b.len() - 1);
    (trim(q), trim(r))
}

fn is_zero_poly(p: &[Scalar]) -> bool {
    p.iter().all(Scalar::is_zero)
}

fn monic(p: Poly) -> Poly {
    let p = trim(p);
    let inv = p.last().unwrap().inv().expect("zero polynomial");
    p.iter().map(|c| c * &inv).collect()
}

fn gcd(a: &[Scalar], b: &[Scalar]) -> Poly {
    let mut a = trim(a.to_vec());
    let mut b = trim(b.to_vec());
    while !is_zero_poly(&b) {
        let (_, r) = divrem(&a, &b);
        a = b;
        b = if is_zero_poly(&r) { r } else { monic(r) };
    }
    monic(a)
}

/// Synthetic division by `(x - root)`; the remainder is discarded.
fn deflate(p: &[Scalar], root: &Scalar) -> Poly {
    let n = p.len() - 1;
    let mut q = vec![Scalar::zero(); n];
    let mut carry = Scalar::zero();
    for k in (0..n).rev() {
        carry = &p[k + 1] + &(&carry * root);
        q[k] = carry.clone();
    }
    q
}

/// Full multiset of roots of `p` in `Q(i)`, sorted; `NotInField` carries
/// the monic factor left after removing every root found.
pub fn poly_roots_in_field(p: &[Scalar], hints: &[Scalar]) -> Result<Vec<Scalar>> {
    let mut q = trim(p.to_vec());
    let mut roots = Vec::new();
    if is_zero_poly(&q) {
        return Err(Error::DimensionMismatch(
            "roots of the zero polynomial".into(),
        ));
    }
    for h in hints {
        while degree(&q) > 0 && eval(&q, h).is_zero() {
            q = deflate(&q, h);
            roots.push(h.clone());
        }
    }
    while degree(&q) > 0 && q[0].is_zero() {
        q.remove(0);
        roots.push(Scalar::zero());
    }
    if degree(&q) > 0 {
        let g = gcd(&q, &deriv(&q));
        let (sqf, _) = divrem(&q, &g);
        for rho in distinct_roots(&sqf) {
            while degree(&q) > 0 && eval(&q, &rho).is_zero() {
                q = deflate(&q, &rho);
                roots.push(rho.clone());
            }
        }
    }
    if degree(&q) > 0 {
        return Err(Error::NotInField { residual: monic(q) });
    }
    roots.sort();
    Ok(roots)
}

/// Roots in `Q(i)` with multiplicity plus the monic factor that has none.
pub fn poly_roots_partial(p: &[Scalar]) -> (Vec<Scalar>, Vec<Scalar>) {
    let mut q = trim(p.to_vec());
    if is_zero_poly(&q) {
        return (Vec::new(), q);
    }
    let mut roots = Vec::new();
    while degree(&q) > 0 && q[0].is_zero() {
        q.remove(0);
        roots.push(Scalar::zero());
    }
    if degree(&q) > 0 {
        let g = gcd(&q, &deriv(&q));
        let (sqf, _) = divrem(&q, &g);
        for rho in distinct_roots(&sqf) {
            while degree(&q) > 0 && eval(&q, &rho).is_zero() {
                q = deflate(&q, &rho);
                roots.push(rho.clone());
            }
        }
    }
    roots.sort();
    (roots, monic(q))
}

/// Monic gcd of two polynomials (ascending coefficients).
pub fn poly_gcd(a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
    if is_zero_poly(a) {
        return if is_zero_poly(b) {
            vec![Scalar::zero()]
        } else {
            monic(b.to_vec())
        };
    }
    gcd(a, b)
}

/// Eigenvalues of a square matrix, with multiplicity, when all lie in `Q(i)`.
pub fn eigenvalues_in_field(m: &Matrix, hints: &[Scalar]) -> Result<Vec<Scalar>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(
            "eigenvalues of non-square matrix".into(),
        ));
    }
    if m.rows() == 0 {
        return Ok(Vec::new());
    }
    poly_roots_in_field(&m.char_poly(), hints)
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn modp(x: &BigInt, p: u64) -> u64 {
    x.mod_floor(&BigInt::from(p)).to_u64().unwrap()
}

fn modinv(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.mod_floor(m).extended_gcd(m);
    e.gcd.is_one().then(|| e.x.mod_floor(m))
}

fn eval_mod(coeffs: &[BigInt], x: &BigInt, m: &BigInt) -> BigInt {
    coeffs
        .iter()
        .rev()
        .fold(BigInt::zero(), |acc, c| (acc * x + c).mod_floor(m))
}

fn deriv_int(coeffs: &[BigInt]) -> Vec<BigInt> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c * BigInt::from(k))
        .collect()
}

/// Roots modulo a small prime, or `None` when a root is repeated there.
fn roots_mod_p(coeffs: &[u64], p: u64) -> Option<Vec<u64>> {
    let ev = |x: u64, c: &[u64]| c.iter().rev().fold(0u64, |acc, &k| (acc * x + k) % p);
    let d: Vec<u64> = coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| (c * (k as u64 % p)) % p)
        .collect();
    let mut out = Vec::new();
    for x in 0..p {
        if ev(x, coeffs) == 0 {
            if ev(x, &d) == 0 {
                return None;
            }
            out.push(x);
        }
    }
    Some(out)
}

fn hensel(coeffs: &[BigInt], root: u64, m: &BigInt, steps: u32) -> BigInt {
    let d = deriv_int(coeffs);
    let mut r = BigInt::from(root);
    for _ in 0..steps {
        let f = eval_mod(coeffs, &r, m);
        if f.is_zero() {
            break;
        }
        let fp = eval_mod(&d, &r, m);
        let inv = modinv(&fp, m).expect("simple root lifts");
        r = (r - f * inv).mod_floor(m);
    }
    r
}

fn symmetric(x: BigInt, m: &BigInt) -> BigInt {
    let half: BigInt = m >> 1;
    if x > half {
        x - m
    } else {
        x
    }
}

/// All roots in `Q(i)` of a squarefree polynomial.
fn distinct_roots(sqf: &[Scalar]) -> Vec<Scalar> {
    let sqf = trim(sqf.to_vec());
    let n = degree(&sqf);
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![-(&sqf[0] / &sqf[1])];
    }
    let lcm = sqf
        .iter()
        .fold(BigInt::one(), |acc, c| acc.lcm(&c.denom_lcm()));
    let scaled = |part: &num_rational::BigRational| -> BigInt {
        (part * num_rational::BigRational::from_integer(lcm.clone())).to_integer()
    };
    let u: Vec<BigInt> = sqf.iter().map(|c| scaled(c.re())).collect();
    let v: Vec<BigInt> = sqf.iter().map(|c| scaled(c.im())).collect();
    let norm_lead = &u[n] * &u[n] + &v[n] * &v[n];
    let height = u
        .iter()
        .zip(&v)
        .map(|(a, b)| a.abs() + b.abs())
        .max()
        .unwrap();
    let bound = &norm_lead * (BigInt::one() + height);
    let target = BigInt::from(2) * &bound + BigInt::one();

    let mut p: u64 = 1009;
    loop {
        p += 4;
        if !is_prime(p) {
            continue;
        }
        let s = (1..p).find(|&x| (x * x) % p == p - 1).unwrap();
        let emb_mod_p = |e: u64| -> Vec<u64> {
            u.iter()
                .zip(&v)
                .map(|(a, b)| (modp(a, p) + e * modp(b, p)) % p)
                .collect()
        };
        let (c1, c2) = (emb_mod_p(s), emb_mod_p(p - s));
        if c1[n] == 0 || c2[n] == 0 {
            continue;
        }
        let (Some(r1), Some(r2)) = (roots_mod_p(&c1, p), roots_mod_p(&c2, p)) else {
            continue;
        };
        if r1.is_empty() || r2.is_empty() {
            return Vec::new();
        }
        let pb = BigInt::from(p);
        let mut m = pb.clone();
        let mut k = 1u32;
        while m < target {
            m *= &pb;
            k += 1;
        }
        let steps = 32 - k.leading_zeros() + 1;
        let s_big = hensel(
            &[BigInt::one(), BigInt::zero(), BigInt::one()],
            s,
            &m,
            steps,
        );
        let emb = |e: &BigInt| -> Vec<BigInt> {
            u.iter()
                .zip(&v)
                .map(|(a, b)| (a + e * b).mod_floor(&m))
                .collect()
        };
        let f1 = emb(&s_big);
        let f2 = emb(&(&m - &s_big));
        let l1: Vec<BigInt> = r1.iter().map(|&r| hensel(&f1, r, &m, steps)).collect();
        let l2: Vec<BigInt> = r2.iter().map(|&r| hensel(&f2, r, &m, steps)).collect();
        let inv2 = modinv(&BigInt::from(2), &m).unwrap();
        let inv2s = modinv(&(BigInt::from(2) * &s_big), &m).unwrap();
        let mut found: Vec<Scalar> = Vec::new();
        for a in &l1 {
            for b in &l2 {
                let re = symmetric((&norm_lead * (a + b) * &inv2).mod_floor(&m), &m);
                let im = symmetric((&norm_lead * (a - b) * &inv2s).mod_floor(&m), &m);
                if re.abs() > bound || im.abs() > bound {
                    continue;
                }
                let rho = Scalar::new(
                    num_rational::BigRational::new(re, norm_lead.clone()),
                    num_rational::BigRational::new(im, norm_lead.clone()),
                );
                if !found.contains(&rho) && eval(&sqf, &rho).is_zero() {
                    found.push(rho);
                }
            }
        }
        return found;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmat::{int, rat};

    fn s(lit: &str) -> Scalar {
        lit.parse().unwrap()
    }

    fn from_roots(roots: &[Scalar]) -> Poly {
        let mut p = vec![Scalar::one()];
        for r in roots {
            let mut next = vec![Scalar::zero(); p.len() + 1];
            for (k, c) in p.iter().enumerate() {
                next[k + 1] += c;
                let d = c * r;
                next[k] -= &d;
            }
            p = next;
        }
        p
    }

    #[test]
    fn spec_eigenvalue_examples() {
        let d = Matrix::diag(&[int(1), int(2), int(2)]);
        assert_eq!(
            eigenvalues_in_field(&d, &[]).unwrap(),
            vec![int(1), int(2), int(2)]
        );
        let swap = Matrix::from_ints(&[[0, 1], [1, 0]]);
        assert_eq!(
            eigenvalues_in_field(&swap, &[]).unwrap(),
            vec![int(-1), int(1)]
        );
        let rot = Matrix::from_ints(&[[0, -1], [1, 0]]);
        assert_eq!(
            eigenvalues_in_field(&rot, &[]).unwrap(),
            vec![s("-i"), s("i")]
        );
    }

    #[test]
    fn irrational_roots_are_rejected() {
        let m = Matrix::from_ints(&[[0, 2], [1, 0]]);
        match eigenvalues_in_field(&m, &[]) {
            Err(Error::NotInField { residual }) => {
                assert_eq!(residual, vec![int(-2), int(0), int(1)]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn gaussian_rational_roots_with_multiplicity() {
        let roots = vec![
            s("1/3+2/7i"),
            s("1/3+2/7i"),
            s("-5/2"),
            s("4-i"),
            rat(7, 11),
            s("-3i"),
        ];
        let p = from_roots(&roots);
        // scale by a Gaussian constant to exercise the leading coefficient
        let c = s("3+2i");
        let p: Poly = p.iter().map(|x| x * &c).collect();
        let mut want = roots.clone();
        want.sort();
        assert_eq!(poly_roots_in_field(&p, &[]).unwrap(), want);
    }

    #[test]
    fn hints_are_verified_not_trusted() {
        let p = from_roots(&[int(2), int(3)]);
        let got = poly_roots_in_field(&p, &[int(5), int(3)]).unwrap();
        assert_eq!(got, vec![int(2), int(3)]);
    }

    #[test]
    fn mixed_field_and_residual() {
        // (x - 1/2)(x^2 - 3)
        let p = vec![rat(3, 2), int(-3), rat(-1, 2), int(1)];
        match poly_roots_in_field(&p, &[]) {
            Err(Error::NotInField { residual }) => {
                assert_eq!(residual, vec![int(-3), int(0), int(1)]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
