//! SELECT-SWAP table lookup: build the reversible circuit for a random
//! table, verify it densely on every address, and show how the T-count
//! model trades multi-controlled selection against swap-network routing.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stabrank::lookup::{self, LookupSpec, TCountModel};
use stabrank::Result;

fn main() -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let spec = LookupSpec::random(3, 2, 2, &mut rng)?;
    let circuit = lookup::build_lookup(&spec)?;
    println!(
        "n = {}, b = {}, lambda = {}: {} qubits, {} gates",
        spec.n(),
        spec.b(),
        spec.lambda(),
        circuit.total_qubits(),
        circuit.gates_clean().len()
    );
    for x in 0..1u64 << spec.n() {
        let out = circuit.run_dense(x, circuit.gates_clean())?;
        assert_eq!(out.output, spec.entry(x));
        assert!(out.banks.iter().all(|&v| v == 0), "banks must uncompute");
    }
    println!(
        "dense check on all {} addresses: ok, banks cleared",
        1u64 << spec.n()
    );

    // The model: 2^(n_h) selection MCXs at 7(n_h - 1) T each, plus
    // log2(lambda) swap layers charged lambda * b controlled swaps at 7 T.
    let model = TCountModel::default();
    println!("\nlambda sweep at n = 10, b = 1:");
    for row in lookup::sweep_lambda(10, 1, &model)? {
        println!("  lambda = {:4}   T = {}", row.lambda, row.t_count);
    }
    let best = lookup::best_lambda(10, 1, &model)?;
    println!(
        "best: lambda = {} with {} T gates",
        best.lambda, best.t_count
    );
    assert_eq!(best.lambda, 32);
    assert_eq!(best.t_count, 2016);

    // Balanced banks lambda = 2^(n/2) keep the minimum near 7n * 2^(n/2).
    println!("\nminimum T-count scaled by 2^(n/2):");
    for n in (8..=20).step_by(4) {
        let best = lookup::best_lambda(n, 1, &model)?;
        let scaled = best.t_count as f64 / 2f64.powf(n as f64 / 2.0);
        println!(
            "  n = {n:2}: lambda* = {:5}, T = {:8}, T / 2^(n/2) = {scaled:7.2} ({:.2} n)",
            best.lambda,
            best.t_count,
            scaled / n as f64
        );
    }
    Ok(())
}
