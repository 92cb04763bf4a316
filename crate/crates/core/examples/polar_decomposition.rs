//! Left and right polar decompositions of a rank-deficient operator, and the
//! uniqueness convention that makes their isometries coincide.

use holonomy_lab::linalg::{
    op_norm, partial_isometry_deviation, polar, right_support_projector, support_projector, PolarSide, DEFAULT_TOL,
};
use holonomy_lab::random::{self, rng_for};

fn main() -> holonomy_lab::Result<()> {
    let mut rng = rng_for(42, "polar-example");
    // A 4×4 operator of rank 2.
    let x = random::gaussian_matrix(&mut rng, 4, 2) * random::gaussian_matrix(&mut rng, 2, 4);

    let left = polar(&x, PolarSide::Left, DEFAULT_TOL)?;
    let right = polar(&x, PolarSide::Right, DEFAULT_TOL)?;

    println!("X = U |X|        reconstruction error {:.2e}", op_norm(&(left.reconstruct() - &x)));
    println!("X = |X†| U       reconstruction error {:.2e}", op_norm(&(right.reconstruct() - &x)));
    println!("‖U_L − U_R‖      {:.2e}", op_norm(&(&left.isometry - &right.isometry)));
    println!("‖UU†U − U‖      {:.2e}", partial_isometry_deviation(&left.isometry));

    let p_left = support_projector(&x, DEFAULT_TOL);
    let p_right = right_support_projector(&x, DEFAULT_TOL);
    let u = &left.isometry;
    println!("U maps right support onto left support: {:.2e}", op_norm(&(u * &p_right * u.adjoint() - &p_left)));
    println!("U vanishes on Ker X:                    {:.2e}", op_norm(&(u - u * &p_right)));
    Ok(())
}
