//! The residue-class expansion of the T-gate phase: e^(i pi/4 |x|) equals
//! the eighth-root-weighted sum of Hamming-weight-mod-8 indicators, each
//! indicator reduces to a fixed-padding zero-residue indicator, and the
//! indicator states have low quadratic-phase approximate rank.

use stabrank::rank;
use stabrank::Result;

fn main() -> Result<()> {
    let report = rank::mod8_report(10, 4, 0.5)?;

    println!(
        "T(x) = sum_j omega^j M_j(x) on {} qubits: max error {:.3e}",
        report.identity_qubits, report.identity_max_error
    );
    assert!(report.identity_max_error < 1e-12);

    println!(
        "padding reduction M_j(x) = M_0(1^((8-j) mod 8), x) on {} qubits:",
        report.padding_qubits
    );
    for p in &report.padding {
        println!(
            "  j = {}: pad {} ones -> holds {} (naive j-padding agrees: {})",
            p.j, p.pad_ones, p.holds, p.naive_pad_agrees
        );
        assert!(p.holds);
    }

    println!(
        "quadratic-phase approximate ranks of the T-phase state at delta = {}:",
        report.quadphase_delta
    );
    for r in &report.quadphase_ranks {
        println!(
            "  n = {}: rank {} (residual capture {:.6})",
            r.n, r.rank, r.residual
        );
    }
    assert!(report.all_pass);
    Ok(())
}
