//! Polynomial conditions on `t` from annihilator ideals.
//!
//! If `t` carries the atom at `(lambda, mu)` of the first form onto the atom
//! at `(lambda2, mu2)` of the second, every `g(x, y)` that kills the second
//! atom's local pair `(J - lambda2, A - mu2)` must kill the transformed first
//! pair. Clearing the denominator `E'` makes each matrix entry a polynomial in
//! `t`. This works for derogatory atoms too, where no jet exists.

use std::collections::{BTreeMap, HashMap};

use rand_chacha::ChaCha8Rng;

use super::groebner::{rational_points, MPoly, Mono};
use super::{Atom, UpperT};
use crate::exactmat::{Matrix, Scalar};

type Gen = Vec<((u32, u32), Scalar)>;

/// `J` and `A` on the joint generalized eigenspace of `atom`.
pub(super) fn local_pair(j: &Matrix, a: &Matrix, atom: &Atom) -> Option<(Matrix, Matrix)> {
    let n = j.rows();
    let shift = |m: &Matrix, c: &Scalar| (m - &Matrix::scalar(n, c)).pow(n as u32);
    let basis = shift(j, &atom.lambda)
        .vstack(&shift(a, &atom.mu))
        .nullspace();
    if basis.is_empty() {
        return None;
    }
    restrict_to(&basis, j, a)
}

fn restrict_to(cols: &[Vec<Scalar>], j: &Matrix, a: &Matrix) -> Option<(Matrix, Matrix)> {
    let n = j.rows();
    let b = Matrix::from_columns(n, cols);
    let bh = Matrix::from_fn(b.cols(), n, |i, k| b[(k, i)].conj());
    let proj = &(&bh * &b).inverse().ok()? * &bh;
    Some((&(&proj * j) * &b, &(&proj * a) * &b))
}

fn column_basis(m: &Matrix) -> Vec<Vec<Scalar>> {
    let (_, pivots) = m.rref();
    pivots.iter().map(|&c| m.column(c)).collect()
}

/// The local pair and the pairs it induces on `mV`, `m^2 V` and `V / soc V`,
/// where `m` is the maximal ideal of the algebra the pair generates. These
/// pieces do not depend on coordinates, so matched atoms must match piece by
/// piece. `None` marks an empty piece.
pub(super) fn pieces(
    local: &(Matrix, Matrix),
    lambda: &Scalar,
    mu: &Scalar,
) -> Vec<Option<(Matrix, Matrix)>> {
    let (j, a) = local;
    let d = j.rows();
    let nj = j - &Matrix::scalar(d, lambda);
    let na = a - &Matrix::scalar(d, mu);
    let mv = column_basis(&nj.hstack(&na));
    let m2v = column_basis(&nj.pow(2).hstack(&(&nj * &na)).hstack(&na.pow(2)));
    let sub = |cols: &[Vec<Scalar>]| {
        if cols.is_empty() {
            None
        } else {
            restrict_to(cols, j, a)
        }
    };
    // V / soc: act on the row space that annihilates soc
    let soc = nj.vstack(&na).nullspace();
    let quotient = if soc.len() == d {
        None
    } else {
        let s = Matrix::from_columns(d, &soc);
        let rows = s.transpose().nullspace();
        let r = Matrix::from_rows(rows);
        let rh = Matrix::from_fn(d, r.rows(), |i, k| r[(k, i)].conj());
        let right = &rh * &(&r * &rh).inverse().expect("full row rank");
        Some((&(&r * j) * &right, &(&r * a) * &right))
    };
    vec![Some(local.clone()), sub(&mv), sub(&m2v), quotient]
}

/// Generators of `{g : g(nj, na) = 0}` for commuting nilpotent `nj`, `na`.
fn annihilator(nj: &Matrix, na: &Matrix) -> Vec<Gen> {
    let d = nj.rows() as u32;
    let mons: Vec<(u32, u32)> = (0..=d)
        .flat_map(|e| (0..=e).rev().map(move |i| (i, e - i)))
        .collect();
    let pows: Vec<Vec<Scalar>> = mons
        .iter()
        .map(|&(i, k)| (&nj.pow(i) * &na.pow(k)).vec())
        .collect();
    let index: HashMap<(u32, u32), usize> = mons.iter().enumerate().map(|(k, &m)| (m, k)).collect();
    let width = mons.len();
    let mut span: Vec<Vec<Scalar>> = Vec::new();
    let mut gens = Vec::new();
    for e in 1..=d {
        let upto = mons.iter().take_while(|m| m.0 + m.1 <= e).count();
        let kernel = Matrix::from_columns(nj.rows() * nj.rows(), &pows[..upto]).nullspace();
        for mut g in kernel {
            g.resize(width, Scalar::zero());
            let rank = |vs: &[Vec<Scalar>]| {
                if vs.is_empty() {
                    0
                } else {
                    Matrix::from_columns(width, vs).rank()
                }
            };
            let before = rank(&span);
            span.push(g.clone());
            if rank(&span) == before {
                span.pop();
                continue;
            }
            span.pop();
            let deg = (0..width)
                .filter(|&k| !g[k].is_zero())
                .map(|k| mons[k].0 + mons[k].1)
                .max()
                .unwrap_or(0);
            for &(a, b) in mons.iter().filter(|m| m.0 + m.1 + deg <= d) {
                let mut shifted = vec![Scalar::zero(); width];
                for (k, c) in g.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
                    shifted[index[&(mons[k].0 + a, mons[k].1 + b)]] = c.clone();
                }
                span.push(shifted);
            }
            gens.push(
                mons.iter()
                    .zip(g)
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(&m, c)| (m, c))
                    .collect(),
            );
        }
    }
    gens
}

/// Matrix with polynomial entries in the free parameters, stored by monomial.
#[derive(Clone)]
struct MatPoly(BTreeMap<Mono, Matrix>);

/// `l0 + sum_i s_i ls[i]`.
struct Linear {
    l0: Matrix,
    ls: Vec<Matrix>,
}

impl MatPoly {
    fn one(n: usize, r: usize) -> Self {
        MatPoly(BTreeMap::from([(Mono::one(r), Matrix::identity(n))]))
    }

    fn mul_linear(&self, l: &Linear) -> Self {
        let r = l.ls.len();
        let mut out: BTreeMap<Mono, Matrix> = BTreeMap::new();
        let mut put = |m: Mono, x: Matrix| {
            if x.is_zero() {
                return;
            }
            match out.get_mut(&m) {
                Some(acc) => *acc = &*acc + &x,
                None => {
                    out.insert(m, x);
                }
            }
        };
        for (m, x) in &self.0 {
            put(m.clone(), &l.l0 * x);
            for (i, li) in l.ls.iter().enumerate() {
                if !li.is_zero() {
                    put(m.mul(&Mono::var(r, i)), li * x);
                }
            }
        }
        MatPoly(out)
    }

    fn add_scaled(&mut self, c: &Scalar, o: &MatPoly) {
        for (m, x) in &o.0 {
            let x = x.scale(c);
            match self.0.get_mut(m) {
                Some(acc) => *acc = &*acc + &x,
                None => {
                    self.0.insert(m.clone(), x);
                }
            }
        }
    }
}

fn linear(x0: &[Scalar], kernel: &[Vec<Scalar>], f: impl Fn(&[Scalar], bool) -> Matrix) -> Linear {
    Linear {
        l0: f(x0, true),
        ls: kernel.iter().map(|k| f(k, false)).collect(),
    }
}

/// Equations in the kernel coordinates for one matched pair of atoms.
fn pair_equations(
    local1: &(Matrix, Matrix),
    local2: &(Matrix, Matrix),
    target: &Atom,
    x0: &[Scalar],
    kernel: &[Vec<Scalar>],
    out: &mut Vec<MPoly>,
) {
    let (j1, a1) = local1;
    let d = j1.rows();
    let r = kernel.len();
    let (l2, m2) = (&target.lambda, &target.mu);
    let nil2 = (
        &local2.0 - &Matrix::scalar(d, l2),
        &local2.1 - &Matrix::scalar(d, m2),
    );
    let gens = annihilator(&nil2.0, &nil2.1);
    // t = [t12, t13, t22, t23, t33]
    let e = |t: &[Scalar], constant: bool| {
        let base = if constant {
            Matrix::identity(d)
        } else {
            Matrix::zeros(d, d)
        };
        &(&base + &j1.scale(&t[0])) + &a1.scale(&t[1])
    };
    let el = linear(x0, kernel, e);
    let xl = linear(x0, kernel, |t, c| {
        &(&j1.scale(&t[2]) + &a1.scale(&t[3])) - &e(t, c).scale(l2)
    });
    let yl = linear(x0, kernel, |t, c| &a1.scale(&t[4]) - &e(t, c).scale(m2));
    let mut memo: HashMap<(u32, u32, u32), MatPoly> = HashMap::new();
    memo.insert((0, 0, 0), MatPoly::one(d, r));
    fn power(
        memo: &mut HashMap<(u32, u32, u32), MatPoly>,
        key: (u32, u32, u32),
        ls: [&Linear; 3],
    ) -> MatPoly {
        if let Some(p) = memo.get(&key) {
            return p.clone();
        }
        let (i, k, e) = key;
        let (prev, l) = if i > 0 {
            ((i - 1, k, e), ls[0])
        } else if k > 0 {
            ((i, k - 1, e), ls[1])
        } else {
            ((i, k, e - 1), ls[2])
        };
        let p = power(memo, prev, ls).mul_linear(l);
        memo.insert(key, p.clone());
        p
    }
    for g in gens {
        let deg = g.iter().map(|((i, k), _)| i + k).max().unwrap_or(0);
        let mut acc = MatPoly(BTreeMap::new());
        for ((i, k), c) in &g {
            let p = power(&mut memo, (*i, *k, deg - i - k), [&xl, &yl, &el]);
            acc.add_scaled(c, &p);
        }
        for row in 0..d {
            for col in 0..d {
                let mut p = MPoly::zero(r);
                for (m, x) in &acc.0 {
                    p.add_term(m.clone(), x[(row, col)].clone());
                }
                if !p.is_zero() {
                    out.push(p);
                }
            }
        }
    }
}

/// Row-reduces the equations as vectors over their monomials.
fn independent(polys: Vec<MPoly>, r: usize) -> Vec<MPoly> {
    let mut mons: Vec<Mono> = polys.iter().flat_map(|p| p.terms.keys().cloned()).collect();
    mons.sort();
    mons.dedup();
    mons.reverse();
    let rows: Vec<Vec<Scalar>> = polys
        .iter()
        .map(|p| {
            mons.iter()
                .map(|m| p.terms.get(m).cloned().unwrap_or_default())
                .collect()
        })
        .collect();
    if rows.is_empty() {
        return Vec::new();
    }
    let (rref, pivots) = Matrix::from_rows(rows).rref();
    (0..pivots.len())
        .map(|k| {
            let mut p = MPoly::zero(r);
            for (c, m) in rref.row(k).iter().zip(&mons) {
                p.add_term(m.clone(), c.clone());
            }
            p
        })
        .collect()
}

/// Members of the affine family `x0 + span(kernel)` solving every matched
/// pair's ideal conditions, and whether the list is complete.
pub(super) fn ideal_candidates(
    mats: [(&Matrix, &Matrix); 2],
    at1: &[Atom],
    at2: &[Atom],
    m: &[usize],
    x0: &[Scalar],
    kernel: &[Vec<Scalar>],
    rng: &mut ChaCha8Rng,
) -> Option<(Vec<UpperT>, bool)> {
    let r = kernel.len();
    if r > 3 {
        return None;
    }
    let mut eqs = Vec::new();
    for (k, &j) in m.iter().enumerate() {
        let l1 = local_pair(mats[0].0, mats[0].1, &at1[k])?;
        let l2 = local_pair(mats[1].0, mats[1].1, &at2[j])?;
        if l1.0.rows() != l2.0.rows() || l1.0.rows() > 6 {
            return None;
        }
        if at2[j].sizes.len() == 1 {
            pair_equations(&l1, &l2, &at2[j], x0, kernel, &mut eqs);
            continue;
        }
        let p1 = pieces(&l1, &at1[k].lambda, &at1[k].mu);
        let p2 = pieces(&l2, &at2[j].lambda, &at2[j].mu);
        for (q1, q2) in p1.iter().zip(&p2) {
            match (q1, q2) {
                (Some(q1), Some(q2)) if q1.0.rows() == q2.0.rows() => {
                    pair_equations(q1, q2, &at2[j], x0, kernel, &mut eqs)
                }
                (None, None) => {}
                // the pieces are invariants
                _ => return Some((Vec::new(), true)),
            }
        }
    }
    let eqs = independent(eqs, r);
    let pts = rational_points(&eqs, r, rng);
    let cands = pts
        .points
        .iter()
        .map(|s| UpperT::from_vec(&super::combine(x0, kernel, s)))
        .collect();
    Some((cands, pts.complete))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn annihilator_of_a_curvilinear_pair() {
        // N = J_3(0), M = 2N + 3N^2: ideal (y - 2x - 3x^2, x^3)
        let n = Matrix::jordan_block(&Scalar::zero(), 3);
        let m = &n.scale(&Scalar::from_int(2)) + &n.pow(2).scale(&Scalar::from_int(3));
        let gens = annihilator(&n, &m);
        assert!(gens.len() >= 2);
        for g in &gens {
            let val = g.iter().fold(Matrix::zeros(3, 3), |acc, ((i, k), c)| {
                &acc + &(&n.pow(*i) * &m.pow(*k)).scale(c)
            });
            assert!(val.is_zero());
        }
    }
}
