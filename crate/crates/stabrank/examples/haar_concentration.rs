//! Haar-state concentration at desk scale: exact projection moments against
//! Monte Carlo, the tail-bound arithmetic behind the existence of
//! high-rank states, and the threshold dimension where that argument bites.

use stabrank::bounds::{self, LogBase};
use stabrank::Result;

fn main() -> Result<()> {
    // E ||P psi||^(2t) = prod_{j<t} (M+j)/(2^n+j) for a rank-M projector.
    println!("projection moments at n = 3:");
    for (m_rank, t) in [(1u64, 1u32), (5, 1), (5, 2), (5, 3)] {
        let exact = bounds::haar_moment(3, m_rank, t)?;
        let chk = bounds::haar_moment_mc(3, m_rank, t, 50_000, 11)?;
        println!(
            "  M = {m_rank}, t = {t}: exact {exact} = {:.6}, sampled {:.6} ({:.2} standard errors off)",
            chk.exact, chk.estimate, chk.sigmas
        );
        assert!(chk.within_four_se);
    }

    // The tail bound 2 exp(0.54 n^2 M - (1 - d^2 - M/2^n)^2 2^n / (100 pi))
    // with M = (1-d^2)^2 2^n / (1000 n^2) has exponent <= -0.0026 (1-d^2)^2 2^n.
    println!("\ninline estimate margin (delta = 0):");
    for n in [10, 20, 30] {
        let est = bounds::haar_inline_estimate(n, 0.0)?;
        println!(
            "  n = {n}: exponent {:12.2} <= {:12.2}",
            est.exponent, est.rhs
        );
        assert!(est.holds);
    }

    // Past n0(delta) the tail drops below 1, so some state has rank at
    // least ceil((1-d^2)^2 2^n / (1000 n^2)).
    println!("\nexistence thresholds:");
    for delta in [0.0, 0.5, 0.9] {
        let th = bounds::haar_exists_threshold(delta, LogBase::Two)?;
        let tail = th.tail_at(th.n0);
        println!(
            "  delta = {delta}: n0 = {}, guaranteed rank {}, tail at n0 = {:.4}",
            th.n0,
            th.guaranteed_rank(th.n0),
            tail.value.unwrap()
        );
        assert!(tail.value.unwrap() < 1.0);
        assert!(th.verified_through(th.n0 + 500));
    }

    // The full pipeline: budget m of T states -> largest n with
    // c n 2^(n/2) <= m -> certified rank lower bound.
    let mb = bounds::main_lower_bound(1000, 0.5, &bounds::Constants::default(), LogBase::Two)?;
    println!(
        "\nbudget m = 1000 -> n = {}, certified chi_0.5(T^1000) >= {:.4} (asymptotic constants at their defaults)",
        mb.n,
        mb.report.value.unwrap()
    );
    assert_eq!(mb.n, 12);
    Ok(())
}
