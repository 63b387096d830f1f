//! Replace every T gate in a random Clifford+T circuit by the teleportation
//! gadget: a CNOT onto a fresh T-state ancilla, a measurement, and a
//! conditional S correction. The measurement outcomes come out exactly
//! uniform, and every corrected branch reproduces the direct simulation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stabrank::dense::DenseState;
use stabrank::gadget::{self, CliffordTCircuit};
use stabrank::Result;

fn main() -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let circuit = CliffordTCircuit::random(2, 14, 3, &mut rng);
    println!(
        "circuit ({} gates, {} T):",
        circuit.gates().len(),
        circuit.t_count()
    );
    for line in circuit.to_text().lines().skip(1) {
        println!("  {line}");
    }

    let gadgetized = gadget::rewrite_gadgets(&circuit);
    let stats = gadgetized.outcome_stats(&DenseState::zero_state(circuit.n())?)?;
    println!(
        "outcome distribution over {} branches: max deviation from uniform {:.3e}",
        stats.probs.len(),
        stats.max_deviation_from_uniform
    );
    assert!(stats.max_deviation_from_uniform < 1e-12);

    let report = gadget::verify_equivalence(&circuit)?;
    println!(
        "all {} corrected branches match direct simulation: max infidelity {:.3e} (correction {:?})",
        report.branches, report.max_infidelity, report.correction
    );
    assert!(report.passed);

    // Gadget branches cannot need more stabilizer terms than the magic
    // states they consume: chi_delta(V|0>) <= chi_delta(T^k).
    let mono = gadget::rank_monotonicity_experiment(1, 2, 0.2, 20, 7)?;
    let worst_lhs = mono.trials.iter().map(|t| t.lhs_rank).max().unwrap();
    let rhs = mono.trials[0].rhs_rank;
    println!(
        "rank monotonicity over {} random circuits: max chi_delta(V|0>) = {worst_lhs} <= chi_delta(T^2) = {rhs}",
        mono.trials.len()
    );
    assert!(mono.all_hold);
    Ok(())
}
