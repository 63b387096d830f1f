//! A state whose exact stabilizer rank strictly exceeds its approximate
//! rank: mix a Haar state orthogonal to |00> into |00> with weight delta.
//! Exactly, the perturbation keeps the rank high; approximately, |00> alone
//! already sits within delta.

use stabrank::rank;
use stabrank::Result;

fn main() -> Result<()> {
    for seed in [7u64, 19, 23] {
        let demo = rank::gap_demo(2, 0.1, 1.0, seed)?;
        println!(
            "seed {seed}: exact rank {} ({:?}) vs approximate rank {} at delta' = {}",
            demo.exact.rank, demo.exact.mode, demo.approx.rank, demo.delta_prime
        );
        println!(
            "  exact subset {:?}, approx subset {:?}",
            demo.exact.subset, demo.approx.subset
        );
        assert!(demo.exact.rank >= 2);
        assert_eq!(demo.approx.rank, 1);
    }
    println!("approximate rank undercuts exact rank on every draw");
    Ok(())
}
