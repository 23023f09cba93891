// The elementary symmetry maps on a single Jordan block.

use slocc::canon::CanonicalForm;
use slocc::exactmat::Scalar;
use slocc::nilpoly::TruncPoly;
use slocc::symmetry::{
    apply_T_EA, apply_T_EJ, apply_T_JA, apply_all, apply_upper, mobius_2nn, SymmetryParams,
    CANONICAL_ORDER,
};

pub fn run_example() -> slocc::Result<()> {
    let cf = CanonicalForm::from_blocks(vec![(Scalar::one(), TruncPoly::from_ints(&[0, 2, 3]))])?;

    // mixing A into J at z3 = 1: J_3(1) with A = 2x + 3x^2 becomes A = 2/3 x + 1/9 x^2
    let ja = apply_T_JA(&cf, &Scalar::one())?;
    println!("JA, z3 = 1: {}", ja.single_blocks()[0].1);
    assert_eq!(ja.single_blocks()[0].0, Scalar::one());
    assert_eq!(
        ja.single_blocks()[0].1,
        TruncPoly::new(vec![
            Scalar::zero(),
            Scalar::ratio(2, 3),
            Scalar::ratio(1, 9)
        ])
    );

    println!(
        "EJ, z1 = 1/2: {}",
        apply_T_EJ(&cf, &Scalar::ratio(1, 2))?.single_blocks()[0].1
    );
    println!(
        "EA, z2 = 1/3: {}",
        apply_T_EA(&cf, &Scalar::ratio(1, 3))?.single_blocks()[0].1
    );

    // the poles are reported, not crossed
    let pole = apply_T_EJ(&cf, &Scalar::from_int(-1));
    println!(
        "EJ, z1 = -1: {}",
        pole.as_ref()
            .err()
            .map(|e| e.to_string())
            .unwrap_or_default()
    );
    assert!(pole.is_err());

    // staged application agrees with one upper triangular operator
    let sp = SymmetryParams::new(
        Scalar::ratio(1, 2),
        Scalar::ratio(-1, 3),
        Scalar::from_int(2),
        Scalar::from_int(3),
        Scalar::ratio(1, 2),
    )?;
    let staged = apply_all(&cf, &sp, &CANONICAL_ORDER)?;
    assert_eq!(staged, apply_upper(&cf, &sp.to_t(&CANONICAL_ORDER))?);
    println!("{sp}: {}", staged.single_blocks()[0].1);

    // on 2 x N x N forms eigenvalues move by a Moebius map
    let moved = mobius_2nn(
        &Scalar::from_int(3),
        &Scalar::one(),
        &Scalar::from_int(2),
        &Scalar::from_int(5),
    )?;
    println!("lambda 3 under (1, 2; 0, 5): {moved}");
    Ok(())
}

fn main() -> slocc::Result<()> {
    run_example()
}
