//! Exact and approximate stabilizer ranks of tensor powers of the T magic
//! state, with verified certificates and the exact threshold where the
//! approximate rank of a single T state collapses to 1.

use stabrank::dense::DenseState;
use stabrank::rank::{self, SearchMode};
use stabrank::stab::{DictKind, Dictionary};
use stabrank::Result;

fn main() -> Result<()> {
    for m in 1..=2 {
        let psi = DenseState::magic_t_power(m)?;
        let dict = Dictionary::enumerate(m, DictKind::Stab)?;
        let cert = rank::exact_rank(&psi, &dict, SearchMode::Exhaustive)?;
        let residual = cert.verify(&psi, &dict)?;
        println!(
            "chi(T^{m}) = {} over {} dictionary states, subset {:?}, residual {residual:.3e}",
            cert.rank,
            dict.len(),
            cert.subset
        );
        assert_eq!(cert.rank, 2);
        assert!(residual <= 1e-9);
    }

    // Approximate rank is non-increasing in delta: sweep it for one T state.
    let psi = DenseState::magic_t_power(1)?;
    let dict = Dictionary::enumerate(1, DictKind::Stab)?;
    for delta in [0.0, 0.2, 0.3826, 0.3827, 0.6] {
        let cert = rank::approx_rank(&psi, delta, &dict, SearchMode::Exhaustive)?;
        println!("chi_{delta}(T) = {}", cert.rank);
    }

    // The collapse point is sin(pi/8): below it, no single stabilizer state
    // is close enough; at it, the best fidelity cos^2(pi/8) just suffices.
    let threshold = rank::approx_threshold(&psi, &dict, 1, 1e-8)?;
    let sin_pi8 = (std::f64::consts::PI / 8.0).sin();
    println!("rank 2 -> 1 at delta = {threshold:.8} (sin(pi/8) = {sin_pi8:.8})");
    assert!((threshold - sin_pi8).abs() < 1e-6);
    Ok(())
}
