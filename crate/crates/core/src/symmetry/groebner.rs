//! Small exact polynomial system solver: Buchberger in grevlex, then
//! rational points by minimal polynomials and back substitution.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::exactmat::{poly_roots_partial, Matrix, Scalar};

/// Exponent vector, ordered graded reverse lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) struct Mono(pub Vec<u32>);

impl Mono {
    pub fn one(nvars: usize) -> Self {
        Mono(vec![0; nvars])
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Mono(e)
    }

    fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn mul(&self, o: &Mono) -> Mono {
        Mono(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    fn divides(&self, o: &Mono) -> bool {
        self.0.iter().zip(&o.0).all(|(a, b)| a <= b)
    }

    fn div(&self, o: &Mono) -> Mono {
        Mono(self.0.iter().zip(&o.0).map(|(a, b)| a - b).collect())
    }

    fn lcm(&self, o: &Mono) -> Mono {
        Mono(self.0.iter().zip(&o.0).map(|(a, b)| *a.max(b)).collect())
    }

    fn coprime(&self, o: &Mono) -> bool {
        self.0.iter().zip(&o.0).all(|(a, b)| *a == 0 || *b == 0)
    }

    fn pure_power_of(&self) -> Option<usize> {
        let nz: Vec<usize> = (0..self.0.len()).filter(|&i| self.0[i] > 0).collect();
        (nz.len() == 1).then(|| nz[0])
    }
}

impl Ord for Mono {
    fn cmp(&self, o: &Self) -> Ordering {
        self.degree().cmp(&o.degree()).then_with(|| {
            for (a, b) in self.0.iter().zip(&o.0).rev() {
                if a != b {
                    return b.cmp(a);
                }
            }
            Ordering::Equal
        })
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct MPoly {
    pub nvars: usize,
    pub terms: BTreeMap<Mono, Scalar>,
}

impl MPoly {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, m: Mono, c: Scalar) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(m.clone()).or_insert_with(Scalar::zero);
        *e += &c;
        if e.is_zero() {
            self.terms.remove(&m);
        }
    }

    fn lead(&self) -> (&Mono, &Scalar) {
        self.terms.last_key_value().expect("nonzero polynomial")
    }

    fn is_constant(&self) -> bool {
        !self.is_zero() && self.lead().0.degree() == 0
    }

    fn monic(mut self) -> Self {
        if let Some(inv) = self.terms.last_key_value().and_then(|(_, c)| c.inv()) {
            for c in self.terms.values_mut() {
                *c = &*c * &inv;
            }
        }
        self
    }

    /// `self - c * m * g`.
    fn sub_mul(&mut self, c: &Scalar, m: &Mono, g: &MPoly) {
        for (gm, gc) in &g.terms {
            self.add_term(m.mul(gm), -(c * gc));
        }
    }

    /// Substitutes `x_var = value` and drops the variable.
    pub fn substitute(&self, var: usize, value: &Scalar) -> MPoly {
        let mut out = MPoly::zero(self.nvars - 1);
        for (m, c) in &self.terms {
            let mut e = m.0.clone();
            let k = e.remove(var);
            out.add_term(Mono(e), c * &value.pow(k as i32));
        }
        out
    }

    #[cfg(test)]
    pub fn eval(&self, x: &[Scalar]) -> Scalar {
        self.terms
            .iter()
            .map(|(m, c)| {
                m.0.iter()
                    .zip(x)
                    .fold(c.clone(), |acc, (&k, xi)| &acc * &xi.pow(k as i32))
            })
            .sum()
    }
}

fn normal_form(p: &MPoly, basis: &[MPoly]) -> MPoly {
    let mut p = p.clone();
    let mut rem = MPoly::zero(p.nvars);
    while let Some((m, c)) = p
        .terms
        .last_key_value()
        .map(|(m, c)| (m.clone(), c.clone()))
    {
        match basis.iter().find(|g| g.lead().0.divides(&m)) {
            Some(g) => {
                let (gm, gc) = g.lead();
                let q = &c / gc;
                p.sub_mul(&q, &m.div(gm), g);
            }
            None => {
                p.terms.remove(&m);
                rem.add_term(m, c);
            }
        }
    }
    rem
}

/// Reduced Groebner basis, or `None` past the work limit.
pub(crate) fn groebner(polys: &[MPoly], max_pairs: usize) -> Option<Vec<MPoly>> {
    let mut basis: Vec<MPoly> = Vec::new();
    for p in polys {
        let r = normal_form(p, &basis);
        if !r.is_zero() {
            basis.push(r.monic());
        }
    }
    let mut pairs: Vec<(usize, usize)> = (0..basis.len())
        .flat_map(|j| (0..j).map(move |i| (i, j)))
        .collect();
    let mut done = 0;
    while let Some(idx) = (0..pairs.len()).min_by_key(|&k| {
        let (i, j) = pairs[k];
        basis[i].lead().0.lcm(basis[j].lead().0).degree()
    }) {
        let (i, j) = pairs.swap_remove(idx);
        done += 1;
        if done > max_pairs || basis.len() > 200 {
            return None;
        }
        let (mi, mj) = (basis[i].lead().0.clone(), basis[j].lead().0.clone());
        if mi.coprime(&mj) {
            continue;
        }
        let l = mi.lcm(&mj);
        let mut s = MPoly::zero(basis[i].nvars);
        s.sub_mul(&(-&Scalar::one()), &l.div(&mi), &basis[i]);
        s.sub_mul(
            &basis[j].lead().1.inv().expect("monic"),
            &l.div(&mj),
            &basis[j],
        );
        let r = normal_form(&s, &basis);
        if r.is_zero() {
            continue;
        }
        if r.is_constant() {
            return Some(vec![r.monic()]);
        }
        let k = basis.len();
        basis.push(r.monic());
        pairs.extend((0..k).map(|i| (i, k)));
    }
    // minimal, then reduced
    let leads: Vec<Mono> = basis.iter().map(|g| g.lead().0.clone()).collect();
    let mut keep: Vec<MPoly> = Vec::new();
    for (k, g) in basis.iter().enumerate() {
        let redundant = leads
            .iter()
            .enumerate()
            .any(|(o, lo)| o != k && lo.divides(&leads[k]) && (lo != &leads[k] || o < k));
        if !redundant {
            keep.push(g.clone());
        }
    }
    let reduced: Vec<MPoly> = (0..keep.len())
        .map(|k| {
            let others: Vec<MPoly> = keep
                .iter()
                .enumerate()
                .filter(|&(o, _)| o != k)
                .map(|(_, g)| g.clone())
                .collect();
            let (m, c) = keep[k].lead();
            let mut tail = keep[k].clone();
            tail.terms.remove(m);
            let mut r = normal_form(&tail, &others);
            r.add_term(m.clone(), c.clone());
            r.monic()
        })
        .collect();
    Some(reduced)
}

/// Standard monomials of a zero-dimensional basis, up to `limit` of them.
fn standard_monomials(basis: &[MPoly], nvars: usize, limit: usize) -> Option<Vec<Mono>> {
    let mut out = vec![Mono::one(nvars)];
    let mut frontier = vec![Mono::one(nvars)];
    while let Some(m) = frontier.pop() {
        for v in 0..nvars {
            let n = m.mul(&Mono::var(nvars, v));
            if basis.iter().any(|g| g.lead().0.divides(&n)) || out.contains(&n) {
                continue;
            }
            out.push(n.clone());
            frontier.push(n);
            if out.len() > limit {
                return None;
            }
        }
    }
    Some(out)
}

/// Minimal polynomial of `x_var` modulo the ideal, ascending coefficients.
fn minimal_polynomial(
    basis: &[MPoly],
    nvars: usize,
    var: usize,
    dim: usize,
) -> Option<Vec<Scalar>> {
    let std = standard_monomials(basis, nvars, dim)?;
    let coords = |p: &MPoly| -> Vec<Scalar> {
        std.iter()
            .map(|m| p.terms.get(m).cloned().unwrap_or_default())
            .collect()
    };
    let mut power = MPoly::zero(nvars);
    power.add_term(Mono::one(nvars), Scalar::one());
    let mut cols: Vec<Vec<Scalar>> = Vec::new();
    for _ in 0..=std.len() {
        let nf = normal_form(&power, basis);
        let v = coords(&nf);
        if !cols.is_empty() {
            if let Some(c) = Matrix::from_columns(std.len(), &cols).solve(&v) {
                let mut p: Vec<Scalar> = c.into_iter().map(|x| -x).collect();
                p.push(Scalar::one());
                return Some(p);
            }
        }
        cols.push(v);
        let mut next = MPoly::zero(nvars);
        next.sub_mul(&(-&Scalar::one()), &Mono::var(nvars, var), &nf);
        power = next;
    }
    None
}

/// Points of `V(polys)` with coordinates in the field. `complete` is false
/// when the variety has positive dimension or points outside the field,
/// or the work limit was hit.
pub(crate) struct Points {
    pub points: Vec<Vec<Scalar>>,
    pub complete: bool,
}

const SLICES: usize = 4;

pub(crate) fn rational_points(polys: &[MPoly], nvars: usize, rng: &mut ChaCha8Rng) -> Points {
    let none = |complete| Points {
        points: Vec::new(),
        complete,
    };
    let polys: Vec<MPoly> = polys.iter().filter(|p| !p.is_zero()).cloned().collect();
    if nvars == 0 {
        return if polys.is_empty() {
            Points {
                points: vec![vec![]],
                complete: true,
            }
        } else {
            none(true)
        };
    }
    let Some(gb) = groebner(&polys, 4000) else {
        return none(false);
    };
    if gb.iter().any(MPoly::is_constant) {
        return none(true);
    }
    let pure: Vec<bool> = (0..nvars)
        .map(|v| gb.iter().any(|g| g.lead().0.pure_power_of() == Some(v)))
        .collect();
    if pure.iter().all(|&p| p) {
        let var = nvars - 1;
        let Some(mp) = minimal_polynomial(&gb, nvars, var, 400) else {
            return none(false);
        };
        let (mut roots, rest) = poly_roots_partial(&mp);
        roots.dedup();
        let mut out = Points {
            points: Vec::new(),
            complete: rest.len() <= 1,
        };
        for r in roots {
            let sub: Vec<MPoly> = gb.iter().map(|g| g.substitute(var, &r)).collect();
            let inner = rational_points(&sub, nvars - 1, rng);
            out.complete &= inner.complete;
            out.points.extend(inner.points.into_iter().map(|mut p| {
                p.push(r.clone());
                p
            }));
        }
        return out;
    }
    // positive dimension: slice a free variable at random values
    let var = (0..nvars)
        .rev()
        .find(|&v| !pure[v])
        .expect("some variable is free");
    let mut out = none(false);
    for _ in 0..SLICES {
        let r = Scalar::from_int(rng.gen_range(-30..=30));
        let sub: Vec<MPoly> = gb.iter().map(|g| g.substitute(var, &r)).collect();
        let inner = rational_points(&sub, nvars - 1, rng);
        for mut p in inner.points {
            p.insert(var, r.clone());
            out.points.push(p);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn poly(nvars: usize, terms: &[(&[u32], i64)]) -> MPoly {
        let mut p = MPoly::zero(nvars);
        for (e, c) in terms {
            p.add_term(Mono(e.to_vec()), Scalar::from_int(*c));
        }
        p
    }

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(1)
    }

    #[test]
    fn grevlex_order() {
        let (x, y) = (Mono(vec![1, 0]), Mono(vec![0, 1]));
        assert!(x > y);
        assert!(Mono(vec![0, 2]) > x);
        assert!(Mono(vec![2, 0]) > Mono(vec![1, 1]));
    }

    #[test]
    fn finite_systems() {
        // x - 1, y^2 - 4
        let ps = [
            poly(2, &[(&[1, 0], 1), (&[0, 0], -1)]),
            poly(2, &[(&[0, 2], 1), (&[0, 0], -4)]),
        ];
        let r = rational_points(&ps, 2, &mut rng());
        assert!(r.complete);
        let mut pts = r.points;
        pts.sort();
        assert_eq!(
            pts,
            vec![
                vec![Scalar::one(), Scalar::from_int(-2)],
                vec![Scalar::one(), Scalar::from_int(2)]
            ]
        );
        // x y - 1, x - y: (1, 1), (-1, -1)
        let ps = [
            poly(2, &[(&[1, 1], 1), (&[0, 0], -1)]),
            poly(2, &[(&[1, 0], 1), (&[0, 1], -1)]),
        ];
        let r = rational_points(&ps, 2, &mut rng());
        assert!(r.complete);
        assert_eq!(r.points.len(), 2);
        for p in &r.points {
            for q in &ps {
                assert!(q.eval(p).is_zero());
            }
        }
    }

    #[test]
    fn inconsistent_and_irrational() {
        let ps = [poly(1, &[(&[1], 1)]), poly(1, &[(&[1], 1), (&[0], -1)])];
        let r = rational_points(&ps, 1, &mut rng());
        assert!(r.complete && r.points.is_empty());
        let r = rational_points(&[poly(1, &[(&[2], 1), (&[0], -2)])], 1, &mut rng());
        assert!(!r.complete && r.points.is_empty());
    }

    #[test]
    fn positive_dimension_is_sliced() {
        // x - y = 0 in the plane
        let r = rational_points(&[poly(2, &[(&[1, 0], 1), (&[0, 1], -1)])], 2, &mut rng());
        assert!(!r.complete);
        assert!(r.points.iter().all(|p| p[0] == p[1]) && !r.points.is_empty());
    }
}
