//! Broken-H1 stability of the projection onto the limit spaces and the
//! measured interpolant constant, over mesh refinement.

use apdg::projection::{interpolant_constant, projection_stability_ratio};
use apdg::{Beta, DGSpace, Mesh1D};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> apdg::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for beta in [Beta::Zero, Beta::One] {
        println!("beta = {}", beta.as_int());
        for n in [8, 16, 32, 64] {
            let space = DGSpace::broken(Mesh1D::new(0.0, 1.0, n)?, 1)?;
            let ratio = projection_stability_ratio(&space, beta, 100, &mut rng)?;
            let c = interpolant_constant(&space, beta)?;
            println!("  n = {n:>3}  ratio = {:.4} (sampled {:.4})  interpolant = {c:.4}", ratio.exact, ratio.sampled);
        }
    }
    Ok(())
}
