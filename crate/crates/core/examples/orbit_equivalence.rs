// Deciding whether two canonical forms lie in one orbit.

use slocc::canon::CanonicalForm;
use slocc::exactmat::Scalar;
use slocc::nilpoly::TruncPoly;
use slocc::symmetry::{apply_params, orbit_equivalent, OrbitDecision, SymmetryParams};

pub fn run_example() -> slocc::Result<()> {
    let cf = CanonicalForm::from_blocks(vec![
        (Scalar::zero(), TruncPoly::from_ints(&[0, 1, 2])),
        (Scalar::from_int(2), TruncPoly::from_ints(&[1, 3])),
    ])?;
    let sp = SymmetryParams::new(
        Scalar::ratio(1, 3),
        Scalar::ratio(-1, 2),
        Scalar::from_int(1),
        Scalar::from_int(2),
        Scalar::from_int(-1),
    )?;
    let img = apply_params(&cf, &sp)?;

    match orbit_equivalent(&cf, &img) {
        OrbitDecision::Equivalent {
            witness, matching, ..
        } => {
            println!("Equivalent, witness {witness}, matching {matching:?}");
            assert_eq!(apply_params(&cf, &witness)?, img);
        }
        other => panic!("expected Equivalent, got {other:?}"),
    }

    let other = CanonicalForm::from_blocks(vec![(
        Scalar::zero(),
        TruncPoly::from_ints(&[0, 1, 2, 0, 0]),
    )])?;
    let d = orbit_equivalent(&cf, &other);
    println!(
        "against a single J_5: {} (under the generated group)",
        d.label()
    );
    assert_eq!(d, OrbitDecision::Inequivalent);
    Ok(())
}

fn main() -> slocc::Result<()> {
    run_example()
}
