use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use slocc::canon::{
    apply_ilo, canonicalize, CanonOptions, Canonicalization, IloTriple, TensorState,
};
use slocc::exactmat::{commutant_basis, jordan_decompose, JordanSpec, Matrix, Scalar};
use slocc::harness::{
    gen_canonical, gen_params, oracle_recanonicalize, rand_invertible, random_profile, GenConfig,
};
use slocc::io::{to_json, CanonFile};
use slocc::nilpoly::TruncPoly;
use slocc::symmetry::{apply_all, apply_upper, orbit_equivalent, Stage, CANONICAL_ORDER};

fn scalar() -> impl Strategy<Value = Scalar> {
    (-9i64..=9, 1i64..=5).prop_map(|(p, q)| Scalar::ratio(p, q))
}

fn nonzero() -> impl Strategy<Value = Scalar> {
    scalar().prop_filter("nonzero", |s| !s.is_zero())
}

fn poly(order: usize) -> impl Strategy<Value = TruncPoly> {
    prop::collection::vec(scalar(), order).prop_map(TruncPoly::new)
}

fn square(n: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(-5i64..=5, n * n)
        .prop_map(move |v| Matrix::from_fn(n, n, |i, j| Scalar::from_int(v[i * n + j])))
}

/// Laplace expansion along the first row.
fn cofactor_det(m: &Matrix) -> Scalar {
    let n = m.rows();
    if n == 0 {
        return Scalar::one();
    }
    let mut acc = Scalar::zero();
    for j in 0..n {
        let rows: Vec<usize> = (1..n).collect();
        let cols: Vec<usize> = (0..n).filter(|&c| c != j).collect();
        let term = &m[(0, j)] * &cofactor_det(&m.select(&rows, &cols));
        acc = if j % 2 == 0 {
            &acc + &term
        } else {
            &acc - &term
        };
    }
    acc
}

fn form(seed: u64, max_n: usize, derogatory: bool) -> slocc::canon::CanonicalForm {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let profile = random_profile(&mut rng, max_n, 3, derogatory);
    gen_canonical(&GenConfig::new(seed, profile)).unwrap()
}

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn recanonicalize(cf: &slocc::canon::CanonicalForm) -> slocc::canon::CanonicalForm {
    match canonicalize(&TensorState::from_canonical(cf), &CanonOptions::default()).unwrap() {
        Canonicalization::Full { cf, .. } => cf,
        Canonicalization::Split { .. } => panic!("full rank state split"),
    }
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn reciprocal_round_trip(order in 1usize..7, f in poly(6), c in nonzero()) {
        let mut co = f.resized(order).into_coeffs();
        co[0] = c;
        let f = TruncPoly::new(co);
        let g = f.reciprocal().unwrap();
        prop_assert_eq!(f.mul(&g).unwrap(), TruncPoly::one(order));
        prop_assert_eq!(g.reciprocal().unwrap(), f);
    }

    #[test]
    fn reversion_round_trip(order in 2usize..7, f in poly(6), c in nonzero()) {
        let mut co = f.resized(order).into_coeffs();
        co[0] = Scalar::zero();
        co[1] = c;
        let f = TruncPoly::new(co);
        let g = f.shifted_reversion().unwrap();
        prop_assert_eq!(g.compose(&f).unwrap(), TruncPoly::x(order));
        prop_assert_eq!(f.compose(&g).unwrap(), TruncPoly::x(order));
    }

    #[test]
    fn toeplitz_is_a_ring_map(f in poly(5), g in poly(5)) {
        let (tf, tg) = (f.to_toeplitz(), g.to_toeplitz());
        prop_assert_eq!(f.mul(&g).unwrap().to_toeplitz(), &tf * &tg);
        prop_assert_eq!(f.add(&g).unwrap().to_toeplitz(), &tf + &tg);
        prop_assert_eq!(TruncPoly::from_toeplitz(&tf).unwrap(), f);
    }

    #[test]
    fn det_matches_cofactor_expansion(m in square(4)) {
        prop_assert_eq!(m.det(), cofactor_det(&m));
        prop_assert_eq!(m.rank() + m.nullspace().len(), 4);
        if let Ok(inv) = m.inverse() {
            prop_assert!((&inv * &m).is_identity());
        } else {
            prop_assert!(m.det().is_zero());
        }
    }

    #[test]
    fn jordan_reassembles(seed in any::<u64>(), derogatory in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = JordanSpec::from_pairs(&random_profile(&mut rng, 6, 4, derogatory)).unwrap();
        let p = rand_invertible(&mut rng, spec.n(), 3);
        let m = &(&p * &spec.matrix()) * &p.inverse().unwrap();
        let (s, got) = jordan_decompose(&m, &[]).unwrap();
        prop_assert_eq!(&got, &spec);
        prop_assert_eq!(&(&s.inverse().unwrap() * &m) * &s, spec.matrix());
    }

    #[test]
    fn commutant_elements_commute(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = JordanSpec::from_pairs(&random_profile(&mut rng, 6, 4, true)).unwrap();
        let j = spec.matrix();
        for b in commutant_basis(&spec) {
            prop_assert!(b.commutator(&j).is_zero());
        }
    }
}

proptest! {
    #![proptest_config(config(32))]

    #[test]
    fn ilo_composition(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 3;
        let psi = TensorState::new((0..3).map(|_| Matrix::from_fn(n, n, |_, _| Scalar::from_int(rand::Rng::gen_range(&mut rng, -4..=4)))).collect()).unwrap();
        let mut draw = || IloTriple::new(rand_invertible(&mut rng, 3, 3), rand_invertible(&mut rng, n, 3), rand_invertible(&mut rng, n, 3)).unwrap();
        let (a, b) = (draw(), draw());
        let stepwise = apply_ilo(&apply_ilo(&psi, &a).unwrap(), &b).unwrap();
        prop_assert_eq!(stepwise, apply_ilo(&psi, &a.then(&b)).unwrap());
    }

    /// Local operators on the two `N`-dimensional parties alone never change the form.
    #[test]
    fn local_operators_keep_the_form(seed in any::<u64>(), derogatory in any::<bool>()) {
        let cf = form(seed, 5, derogatory);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let n = cf.n();
        let ops = IloTriple::new(Matrix::identity(3), rand_invertible(&mut rng, n, 4), rand_invertible(&mut rng, n, 4)).unwrap();
        let got = oracle_recanonicalize(&cf, &ops).unwrap();
        prop_assert!(got == cf || (!cf.is_nonderogatory() && got.same_class(&cf).is_some()));
    }

    #[test]
    fn canonicalization_is_idempotent(seed in any::<u64>()) {
        let once = recanonicalize(&form(seed, 5, false));
        let twice = recanonicalize(&once);
        prop_assert_eq!(&twice, &once);
        let text = to_json(&CanonFile::from_canonical(&twice));
        prop_assert_eq!(text, to_json(&CanonFile::from_canonical(&once)));
    }

    /// Staged application equals applying the composite operator once.
    #[test]
    fn stages_compose(seed in any::<u64>(), shuffle in any::<bool>()) {
        let cf = form(seed, 5, false);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 2);
        let sp = gen_params(&mut rng, 4);
        let order: Vec<Stage> = if shuffle {
            vec![Stage::Ej, Stage::Ja, Stage::Rescale, Stage::Ea]
        } else {
            CANONICAL_ORDER.to_vec()
        };
        if let Ok(staged) = apply_all(&cf, &sp, &order) {
            prop_assert_eq!(staged, apply_upper(&cf, &sp.to_t(&order)).unwrap());
        }
    }

    #[test]
    fn orbit_decision_is_symmetric(s1 in any::<u64>(), s2 in any::<u64>()) {
        let (a, b) = (form(s1, 3, false), form(s2, 3, false));
        let ab = orbit_equivalent(&a, &b);
        let ba = orbit_equivalent(&b, &a);
        prop_assert_eq!(ab.label(), ba.label());
    }
}
