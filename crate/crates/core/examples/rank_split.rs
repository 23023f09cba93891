// States whose slots never reach full rank split into a regular part and
// a nilpotent part.

use slocc::canon::{
    beta_canonical_check, canonicalize, nonfull_rank_split, CanonOptions, Canonicalization,
    TensorState,
};
use slocc::exactmat::Matrix;

pub fn run_example() -> slocc::Result<()> {
    // every combination of the two slots has rank at most 2
    let psi = TensorState::new(vec![
        Matrix::diag(&[1, 1, 0].map(slocc::exactmat::Scalar::from_int)),
        Matrix::from_ints(&[[5, 0, 0], [0, 0, 1], [0, 0, 0]]),
    ])?;

    let pf = nonfull_rank_split(&psi, 0)?;
    println!("n = {}, m = {}, i = {}", pf.n, pf.m, pf.i);
    println!("Lambda' =\n{}", pf.lambda_prime);
    println!("beta part canonical: {}", beta_canonical_check(&pf, 0));
    assert_eq!((pf.n, pf.m, pf.i), (1, 2, 1));

    match canonicalize(&psi, &CanonOptions::default())? {
        Canonicalization::Split { max_rank, .. } => {
            println!("pipeline: best rank {} of {}", max_rank.rank, psi.n())
        }
        Canonicalization::Full { .. } => unreachable!("no combination has full rank"),
    }
    Ok(())
}

fn main() -> slocc::Result<()> {
    run_example()
}
