// Matrices commuting with a Jordan matrix, as grids of truncated polynomials.

use slocc::exactmat::{commutant_basis, JordanSpec, Scalar};
use slocc::nilpoly::{commutant_to_poly_matrix, poly_matrix_to_commutant};

pub fn run_example() -> slocc::Result<()> {
    let spec =
        JordanSpec::from_pairs(&[(Scalar::zero(), 3), (Scalar::zero(), 2), (Scalar::one(), 2)])?;
    let j = spec.matrix();
    let basis = commutant_basis(&spec);
    // 3 + 2 + 2 * min(3, 2) from the zero run, 2 from the other
    println!(
        "commutant of {} has dimension {}",
        spec.blocks()
            .iter()
            .map(|b| format!("J_{}({})", b.size, b.lambda))
            .collect::<Vec<_>>()
            .join(" + "),
        basis.len()
    );
    assert_eq!(basis.len(), 11);

    let sum = basis
        .iter()
        .enumerate()
        .fold(slocc::exactmat::Matrix::zeros(7, 7), |acc, (k, b)| {
            &acc + &b.scale(&Scalar::from_int(k as i64 + 1))
        });
    assert!(sum.commutator(&j).is_zero());

    // restricted to the zero run, the element is a grid of Toeplitz pieces
    let run: Vec<usize> = (0..5).collect();
    let grid = commutant_to_poly_matrix(&sum.select(&run, &run), &[3, 2])?;
    for (i, row) in grid.entries().iter().enumerate() {
        println!(
            "row {i}: {}",
            row.iter()
                .map(|f| f.to_string())
                .collect::<Vec<_>>()
                .join(" | ")
        );
    }
    assert_eq!(
        poly_matrix_to_commutant(grid.entries().to_vec(), vec![3, 2])?,
        sum.select(&run, &run)
    );
    Ok(())
}

fn main() -> slocc::Result<()> {
    run_example()
}
