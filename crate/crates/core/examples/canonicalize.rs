// Canonical form of a scrambled 3 x 3 x 3 state.
//
// The state `(I, J, A)` with `J = 1 + J_3(0)` and `A = 2 + 3 N` is hidden
// behind random operators on the two N-dimensional parties; canonicalization recovers one Jordan block
// with eigenvalue 1 whose `A` polynomial is `2 + 3x`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use slocc::canon::{
    apply_ilo, canonicalize, CanonOptions, Canonicalization, IloTriple, TensorState,
};
use slocc::exactmat::{Matrix, Scalar};
use slocc::harness::rand_invertible;

pub fn run_example() -> slocc::Result<()> {
    let n = 3;
    let nil = Matrix::jordan_block(&Scalar::zero(), n);
    let j = Matrix::jordan_block(&Scalar::one(), n);
    let a = &Matrix::scalar(n, &Scalar::from_int(2)) + &nil.scale(&Scalar::from_int(3));
    let psi = TensorState::new(vec![Matrix::identity(n), j, a])?;

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let ops = IloTriple::new(
        Matrix::identity(3),
        rand_invertible(&mut rng, n, 3),
        rand_invertible(&mut rng, n, 3),
    )?;
    let hidden = apply_ilo(&psi, &ops)?;

    match canonicalize(&hidden, &CanonOptions::default())? {
        Canonicalization::Full {
            cf,
            max_rank,
            shifts,
        } => {
            println!(
                "first slot from combination {:?} (rank {})",
                max_rank
                    .t_row
                    .iter()
                    .map(|s| s.to_string())
                    .collect::<Vec<_>>(),
                max_rank.rank
            );
            println!(
                "shifts {:?}",
                shifts.iter().map(|s| s.to_string()).collect::<Vec<_>>()
            );
            for (lambda, f) in cf.single_blocks() {
                println!("block J_{}({lambda}) with A = {f}", f.order());
            }
            let blocks = cf.single_blocks();
            assert_eq!(blocks.len(), 1);
            assert_eq!(
                blocks[0].1.coeffs()[..2],
                [Scalar::from_int(2), Scalar::from_int(3)]
            );
        }
        Canonicalization::Split { .. } => unreachable!("the state has full rank"),
    }
    Ok(())
}

fn main() -> slocc::Result<()> {
    run_example()
}
