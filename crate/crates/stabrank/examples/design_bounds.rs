//! Moment bounds under approximate t-designs: the tail formula, its Monte
//! Carlo consistency check (Haar sampling is an exact design for every t),
//! the polynomial-parameter threshold, and the gate-count comparison that
//! makes the design route look weak next to direct counting.

use stabrank::bounds::{self, Constants, LogBase};
use stabrank::Result;

fn main() -> Result<()> {
    // At t = 1 the tail collapses to e^(0.54 n^2 M) (M/2^n) / (1-d^2).
    let rep = bounds::tdesign_tail(4, 1.0, 1.0, 0.3, 0.0)?;
    println!("t = 1 collapse: ln tail = {:.6}", rep.ln_value);

    // Sampled consistency at n = 3, t = 2: the fraction of Haar states a
    // fixed 5-state stabilizer subset catches sits below the Markov bound.
    let chk = bounds::tdesign_tail_mc(3, 2, 0.5, 5, 50_000, 23)?;
    println!(
        "capture fraction {:.5} <= markov {:.5} (subset spans rank {})",
        chk.fraction, chk.markov_bound, chk.span_rank
    );
    assert!(chk.passed);

    // Polynomial parameters M = n^d, t = n^(d+1), eps = e^(-n^(d+2)): the
    // tail first dips below 1 at n0 and stays there.
    let th = bounds::tdesign_poly_threshold(1, 0.5, 300)?;
    println!(
        "poly-design tail < 1 from n0 = {} onward (checked through {})",
        th.n0, th.checked_to
    );
    assert_eq!(th.n0, 55);

    // Certifying a rank n^d state through designs costs vastly more gates
    // than the direct route, already at n = 1024, d = 1.
    let cmp = bounds::design_route_comparison(1024, 1, &Constants::default(), LogBase::Two)?;
    println!(
        "t-design route: e^{:.1} gates vs direct route: e^{:.1} gates -> design route weaker: {}",
        cmp.tdesign_route_ln, cmp.direct_route_ln, cmp.tdesign_route_weaker
    );
    assert!(cmp.tdesign_route_weaker);

    // The size formulas themselves, at modest parameters.
    let f = bounds::design_gate_formulas(64, 16, 1e-6, 1, &Constants::default(), LogBase::Two)?;
    for r in &f.reports {
        match r.value {
            Some(v) => println!("  {:28} = {v:.4e}", r.name),
            None => println!("  {:28} = e^{:.2}", r.name, r.ln_value),
        }
    }
    Ok(())
}
