// Arithmetic in `C[x] / x^n` and its Toeplitz picture.

use slocc::exactmat::Scalar;
use slocc::nilpoly::TruncPoly;

pub fn run_example() -> slocc::Result<()> {
    let f = TruncPoly::from_ints(&[1, 2, 0, -1]);
    let g = f.reciprocal()?;
    println!("1 / ({f}) = {g}");
    assert_eq!(f.mul(&g)?, TruncPoly::one(4));

    let h = TruncPoly::from_ints(&[0, 2, 1, 5]);
    let r = h.shifted_reversion()?;
    println!("reversion of {h}: {r}");
    assert_eq!(h.compose(&r)?, TruncPoly::x(4));

    let t = f.to_toeplitz();
    println!("Toeplitz matrix of f:\n{t}");
    assert_eq!(&t * &g.to_toeplitz(), f.mul(&g)?.to_toeplitz());
    assert_eq!(TruncPoly::from_toeplitz(&t)?, f);

    let at = f.eval_at_jordan(&Scalar::from_int(2));
    println!("f evaluated at J_4(2):\n{at}");
    Ok(())
}

fn main() -> slocc::Result<()> {
    run_example()
}
