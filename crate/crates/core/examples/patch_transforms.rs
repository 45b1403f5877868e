//! Patch-structured orthogonal transforms: per-patch rotations composed with
//! a permutation of the patches.

use dsd_lab::patchspace::{haar_orthogonal, random_transform, PatchShape, PatchTransform};
use dsd_lab::rng::seeded;

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn main() -> dsd_lab::Result<()> {
    let mut rng = seeded(1);
    let q = haar_orthogonal(4, &mut rng)?;
    println!("Haar 4x4 orthogonality residual: {:.2e}", q.orthogonality_residual());

    let shape = PatchShape::new(3, 2)?;
    let x: Vec<f64> = (0..shape.dim()).map(|i| i as f64).collect();

    let swap = PatchTransform::permutation(shape, vec![2, 0, 1])?;
    println!("x              = {x:?}");
    println!("permuted       = {:?}", swap.apply(&x)?);

    let t = random_transform(shape, false, &mut rng)?;
    let tx = t.apply(&x)?;
    println!("random T, |x| = {:.6}, |Tx| = {:.6}", norm(&x), norm(&tx));
    let back = t.inverse().apply(&tx)?;
    let err = back.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("T^-1 T x error: {err:.2e}");

    let tied = random_transform(shape, true, &mut rng)?;
    println!("tied transform id: {}", tied.id());
    let both = t.compose(&tied)?;
    println!("composition is tied: {}", both.is_tied());
    Ok(())
}
