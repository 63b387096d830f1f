//! The acceptance suite: one test per headline claim the crate verifies at
//! desk scale. Run with --nocapture to see one line per criterion.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stabrank::bounds::{self, Constants, LogBase};
use stabrank::dense::{self, DenseState};
use stabrank::gadget::{self, CliffordTCircuit};
use stabrank::lookup::{self, LookupSpec, TCountModel};
use stabrank::rank::{self, SearchMode};
use stabrank::stab::{DictKind, Dictionary};

const COS2_PI8: f64 = 0.8535533905932737; // cos^2(pi/8)
const SIN_PI8: f64 = 0.3826834323650898;

fn pass(k: u32, what: &str) {
    println!("acceptance {k:02} PASS {what}");
}

#[test]
fn criterion_01_stabilizer_fidelity_closed_form() {
    for m in 1..=3usize {
        let psi = DenseState::magic_t_power(m).unwrap();
        let dict = Dictionary::enumerate(m, DictKind::Stab).unwrap();
        let (f, _) = rank::stab_fidelity(&psi, &dict).unwrap();
        let expect = COS2_PI8.powi(m as i32);
        assert!(
            (f - expect).abs() < 1e-9,
            "m = {m}: fidelity {f} vs {expect}"
        );
    }
    pass(
        1,
        "stabilizer fidelity of T^m equals cos^(2m)(pi/8) for m = 1..3",
    );
}

#[test]
fn criterion_02_flatness_rank_bound() {
    for m in 1..=3usize {
        let psi = DenseState::magic_t_power(m).unwrap();
        let dict = Dictionary::enumerate(m, DictKind::Stab).unwrap();
        let b = rank::f_chi_bound(&psi, &dict).unwrap().unwrap();
        assert!(
            b > 0.076 * m as f64 && b < 0.077 * m as f64,
            "m = {m}: bound {b}"
        );
    }
    pass(
        2,
        "flatness bound on chi(T^m) lands in (0.076 m, 0.077 m) for m = 1..3",
    );
}

#[test]
fn criterion_03_exact_ranks_brute_force() {
    for m in 1..=2usize {
        let psi = DenseState::magic_t_power(m).unwrap();
        let dict = Dictionary::enumerate(m, DictKind::Stab).unwrap();
        let cert = rank::exact_rank(&psi, &dict, SearchMode::Exhaustive).unwrap();
        assert_eq!(cert.rank, 2, "m = {m}");
        let residual = cert.verify(&psi, &dict).unwrap();
        assert!(residual <= 1e-9, "m = {m}: residual {residual}");
    }
    pass(
        3,
        "chi(T) = chi(T^2) = 2 by exhaustive search with residual <= 1e-9",
    );
}

#[test]
fn criterion_04_approx_threshold_at_sin_pi8() {
    let psi = DenseState::magic_t_power(1).unwrap();
    let dict = Dictionary::enumerate(1, DictKind::Stab).unwrap();
    let threshold = rank::approx_threshold(&psi, &dict, 1, 1e-8).unwrap();
    assert!(
        (threshold - SIN_PI8).abs() < 1e-6,
        "threshold {threshold} vs sin(pi/8) = {SIN_PI8}"
    );
    let below = rank::approx_rank(&psi, SIN_PI8 - 1e-4, &dict, SearchMode::Exhaustive).unwrap();
    let above = rank::approx_rank(&psi, SIN_PI8 + 1e-4, &dict, SearchMode::Exhaustive).unwrap();
    assert_eq!((below.rank, above.rank), (2, 1));
    pass(
        4,
        "chi_delta(T) drops 2 -> 1 exactly at delta = sin(pi/8) +- 1e-6",
    );
}

#[test]
fn criterion_05_gadget_uniformity_and_branches() {
    let mut rng = ChaCha8Rng::seed_from_u64(500);
    let mut worst_dev = 0.0f64;
    let mut worst_infid = 0.0f64;
    for _ in 0..100 {
        let n = rng.gen_range(1..=3usize);
        let k = rng.gen_range(0..=3usize);
        let clifford = rng.gen_range(5..=20usize);
        let circuit = CliffordTCircuit::random(n, clifford, k, &mut rng);

        let gadgetized = gadget::rewrite_gadgets(&circuit);
        let stats = gadgetized
            .outcome_stats(&DenseState::zero_state(n).unwrap())
            .unwrap();
        worst_dev = worst_dev.max(stats.max_deviation_from_uniform);
        assert!(
            stats.max_deviation_from_uniform < 1e-10,
            "outcomes not uniform: {stats:?}"
        );

        let report = gadget::verify_equivalence(&circuit).unwrap();
        worst_infid = worst_infid.max(report.max_infidelity);
        assert!(report.passed, "branch mismatch: {report:?}");
        assert!(report.max_infidelity < 1e-9);
    }
    pass(
        5,
        "100 random circuits: uniform gadget outcomes and corrected branches match direct simulation",
    );
}

#[test]
fn criterion_06_rank_monotonicity_under_gadgets() {
    for &delta in &[0.0, 0.2] {
        for k in 1..=2usize {
            let report =
                gadget::rank_monotonicity_experiment(1, k, delta, 25, 60 + k as u64).unwrap();
            assert!(report.all_hold, "delta = {delta}, k = {k}: {report:?}");
            assert_eq!(report.trials.len(), 25);
        }
    }
    pass(
        6,
        "chi_delta(V|0>) <= chi_delta(T^k) in 50 exhaustive trials per delta in {0, 0.2}",
    );
}

#[test]
fn criterion_07_haar_moments_monte_carlo() {
    let mut seed = 700u64;
    for &m_rank in &[1u64, 5] {
        for t in 1..=3u32 {
            seed += 1;
            let chk = bounds::haar_moment_mc(3, m_rank, t, 100_000, seed).unwrap();
            assert!(chk.within_four_se, "M = {m_rank}, t = {t}: {chk:?}");
        }
    }
    pass(
        7,
        "Monte Carlo moments match prod (M+j)/(2^n+j) within 4 standard errors at n = 3",
    );
}

#[test]
fn criterion_08_haar_tail_arithmetic() {
    for n in 10..=30u32 {
        for &delta in &[0.0, 0.5, 0.9] {
            let est = bounds::haar_inline_estimate(n, delta).unwrap();
            assert!(est.holds, "n = {n}, delta = {delta}: {est:?}");
        }
    }
    for &delta in &[0.0, 0.5, 0.9] {
        let th = bounds::haar_exists_threshold(delta, LogBase::Two).unwrap();
        let tail = th.tail_at(th.n0).value.unwrap();
        assert!(tail < 1.0, "delta = {delta}: tail {tail} at n0 = {}", th.n0);
    }
    pass(
        8,
        "inline tail exponent <= -0.0026 (1-d^2)^2 2^n on the grid, and tail < 1 at every threshold",
    );
}

#[test]
fn criterion_09_main_bound_pipeline() {
    let consts = Constants::default();
    let mb = bounds::main_lower_bound(1000, 0.5, &consts, LogBase::Two).unwrap();
    assert_eq!(mb.n, 12);
    for m in 10..=1_000_000u64 {
        let mb = bounds::main_lower_bound(m, 0.5, &consts, LogBase::Two).unwrap();
        assert!(
            mb.upper_bracket_holds && mb.lower_bracket_holds,
            "bracket fails at m = {m}"
        );
    }
    pass(
        9,
        "budget pipeline picks n = 12 at m = 1000 and both brackets hold for all m in 10..=10^6",
    );
}

#[test]
fn criterion_10_lookup_correctness_and_tradeoff() {
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    for trial in 0..20 {
        let n = rng.gen_range(1..=3usize);
        let b = rng.gen_range(1..=2usize);
        let lambda = if rng.gen::<bool>() { 2 } else { 1 };
        let spec = LookupSpec::random(n, b, lambda, &mut rng).unwrap();
        let circuit = lookup::build_lookup(&spec).unwrap();
        for x in 0..1u64 << n {
            let garbage = circuit.run_dense(x, circuit.gates_with_garbage()).unwrap();
            assert_eq!(garbage.output, spec.entry(x), "trial {trial}, x = {x}");
            let clean = circuit.run_dense(x, circuit.gates_clean()).unwrap();
            assert_eq!(clean.output, spec.entry(x), "trial {trial}, x = {x}");
            assert!(
                clean.banks.iter().all(|&v| v == 0),
                "trial {trial}: garbage not uncomputed"
            );
        }
    }
    let model = TCountModel::default();
    for n in 8..=20usize {
        let best = lookup::best_lambda(n, 1, &model).unwrap();
        let scaled = best.t_count as f64 / 2f64.powf(n as f64 / 2.0);
        assert!(scaled <= 14.0 * n as f64, "n = {n}: {scaled}");
    }
    pass(
        10,
        "lookup circuits correct on all addresses with exact uncompute; min T-count <= 14 n 2^(n/2)",
    );
}

#[test]
fn criterion_11_mod8_identities() {
    let report = rank::mod8_report(10, 4, 0.5).unwrap();
    assert!(
        report.identity_max_error < 1e-9,
        "identity error {}",
        report.identity_max_error
    );
    assert_eq!(report.padding.len(), 8);
    assert!(report.padding.iter().all(|p| p.holds));
    assert!(report.all_pass);
    pass(
        11,
        "T(x) = sum_j omega^j M_j(x) exhaustively at n = 10 and padding reduction for every j at n = 4",
    );
}

#[test]
fn criterion_12_measure_suite() {
    // xi >= 1/F on every state the suite touches.
    let mut states = vec![
        DenseState::magic_t_power(1).unwrap(),
        DenseState::magic_t_power(2).unwrap(),
    ];
    states.push(dense::haar_state(1, 120, 0).unwrap());
    states.push(dense::haar_state(2, 120, 1).unwrap());
    for psi in &states {
        let dict = Dictionary::enumerate(psi.n(), DictKind::Stab).unwrap();
        let rep = rank::measure_report(psi, &dict).unwrap();
        assert!(
            rep.extent >= 1.0 / rep.fidelity - 1e-6,
            "xi = {} vs 1/F = {}",
            rep.extent,
            1.0 / rep.fidelity
        );
        assert!(rep.all_checks_hold, "{rep:?}");
    }

    // Gowers U3 is exactly 1 on quadratic-phase states.
    let mut rng = ChaCha8Rng::seed_from_u64(121);
    for _ in 0..50 {
        let n = rng.gen_range(1..=4usize);
        let dict = Dictionary::enumerate(n, DictKind::QuadPhase).unwrap();
        let s = &dict.states()[rng.gen_range(0..dict.len())];
        let g = rank::gowers_u3(&s.to_dense().unwrap()).unwrap();
        assert!((g - 1.0).abs() < 1e-9, "n = {n}: U3 = {g}");
    }

    // And multiplicative under tensor products.
    let a = DenseState::magic_t_power(2).unwrap();
    let b = dense::haar_state(2, 122, 0).unwrap();
    let ga = rank::gowers_u3(&a).unwrap();
    let gb = rank::gowers_u3(&b).unwrap();
    let gab = rank::gowers_u3(&a.tensor(&b).unwrap()).unwrap();
    assert!((gab - ga * gb).abs() < 1e-9, "{gab} vs {ga} * {gb}");

    // Exact rank can exceed approximate rank.
    let demo = rank::gap_demo(2, 0.1, 1.0, 123).unwrap();
    assert!(demo.exact.rank >= 2);
    assert_eq!(demo.approx.rank, 1);

    pass(
        12,
        "xi >= 1/F, Gowers U3 = 1 on quadratic phases and multiplicative, and the rank gap demo holds",
    );
}
