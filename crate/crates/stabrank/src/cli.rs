//! Batch front end: every experiment in the crate is invocable as a single
//! command that emits one versioned JSON report (CSV for sweeps, on request).
//!
//! Reports are byte-reproducible: a run is a pure function of the parsed
//! command line, every randomized command takes an explicit --seed, and the
//! --workers count never changes any output. Exit status is 0 when the
//! command's assertion (if it carries one) holds, 1 on a failed assertion or
//! a runtime error, 2 on a usage error.

use crate::bounds::{self, Constants, LogBase};
use crate::dense::{self, DenseState};
use crate::error::{Error, Result};
use crate::gadget::{self, CliffordTCircuit};
use crate::lookup::{self, LookupSpec, RevGate, TCountModel};
use crate::rank::{self, SearchMode};
use crate::stab::{DictKind, Dictionary};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};

pub const SCHEMA: &str = "stabrank.report/1";

#[derive(Parser, Debug)]
#[command(
    name = "stabrank",
    version,
    about = "Stabilizer-rank laboratory: dictionaries, rank searches, T gadgets, lookup T counts, and tail bounds"
)]
pub struct Cli {
    /// Worker threads for parallel sections; reports are identical for any
    /// value.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Write the report to this path instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub family: Family,
}

#[derive(Subcommand, Debug)]
pub enum Family {
    /// Stabilizer dictionaries and state files.
    #[command(subcommand)]
    Stab(StabCmd),
    /// Exact and approximate stabilizer-rank searches.
    #[command(subcommand)]
    Rank(RankCmd),
    /// Fidelity, extent, flatness bound, and Gowers norm for one state.
    #[command(subcommand)]
    Measure(MeasureCmd),
    /// T-gadget rewriting, verification, and rank monotonicity.
    #[command(subcommand)]
    Gadget(GadgetCmd),
    /// SELECT-SWAP lookup circuits and their T-count model.
    #[command(subcommand)]
    Lookup(LookupCmd),
    /// Closed-form tail bounds and gate-count formulas.
    #[command(subcommand)]
    Bound(BoundCmd),
    /// Haar moments and Monte Carlo cross-checks.
    #[command(subcommand)]
    Haar(HaarCmd),
    /// Self-contained demonstrations.
    #[command(subcommand)]
    Demo(DemoCmd),
}

struct Outcome {
    command: &'static str,
    params: Value,
    result: Value,
    passed: bool,
    csv: Option<String>,
}

fn outcome<P: Serialize, R: Serialize>(
    command: &'static str,
    params: &P,
    result: &R,
    passed: bool,
) -> Result<Outcome> {
    Ok(Outcome {
        command,
        params: to_value(params)?,
        result: to_value(result)?,
        passed,
        csv: None,
    })
}

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::Numeric(format!("report serialization: {e}")))
}

/// Parse argv, run, and return the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    run_parsed(cli)
}

pub fn run_parsed(cli: Cli) -> i32 {
    if let Some(w) = cli.workers {
        // The global pool can only be installed once per process; a repeat
        // in tests is harmless because results never depend on it.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global();
    }
    match dispatch(cli.family) {
        Ok(out) => {
            let text = match &out.csv {
                Some(csv) => csv.clone(),
                None => {
                    let envelope = json!({
                        "schema": SCHEMA,
                        "command": out.command,
                        "params": out.params,
                        "result": out.result,
                    });
                    let mut s =
                        serde_json::to_string_pretty(&envelope).expect("envelope is valid JSON");
                    s.push('\n');
                    s
                }
            };
            if let Some(path) = &cli.out {
                if let Err(e) = std::fs::write(path, &text) {
                    eprintln!("error: {e}");
                    return 1;
                }
            } else {
                print!("{text}");
            }
            if out.passed {
                0
            } else {
                1
            }
        }
        Err(e) => {
            if let Error::Resource {
                context,
                best_rank: Some(r),
            } = &e
            {
                eprintln!("error: resource limit: {context} (best rank seen: {r})");
            } else {
                eprintln!("error: {e}");
            }
            match e {
                Error::Argument(_) | Error::Parse(_) => 2,
                _ => 1,
            }
        }
    }
}

fn dispatch(family: Family) -> Result<Outcome> {
    match family {
        Family::Stab(c) => run_stab(c),
        Family::Rank(c) => run_rank(c),
        Family::Measure(c) => run_measure(c),
        Family::Gadget(c) => run_gadget(c),
        Family::Lookup(c) => run_lookup(c),
        Family::Bound(c) => run_bound(c),
        Family::Haar(c) => run_haar(c),
        Family::Demo(c) => run_demo(c),
    }
}

/// A state argument is either the name T^m (T alone meaning T^1) or a path
/// to a dense state file.
fn parse_state(spec: &str) -> Result<DenseState> {
    if spec == "T" {
        return DenseState::magic_t_power(1);
    }
    if let Some(rest) = spec.strip_prefix("T^") {
        let m: usize = rest
            .parse()
            .map_err(|_| Error::Parse(format!("bad tensor power in state spec {spec:?}")))?;
        return DenseState::magic_t_power(m);
    }
    dense::read_state_file(Path::new(spec))
}

// ---------------------------------------------------------------- stab ----

#[derive(Subcommand, Debug)]
pub enum StabCmd {
    /// Enumerate a dictionary and check its size against the closed form.
    Census(CensusArgs),
    /// Enumerate a dictionary and write its text dump to a file.
    Dump(DictDumpArgs),
    /// Materialize a state into a dense state file.
    State(StateFileArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct CensusArgs {
    #[arg(long)]
    n: usize,
    /// stab or quadphase.
    #[arg(long, default_value = "stab")]
    dict: String,
}

#[derive(Args, Debug, Serialize)]
pub struct DictDumpArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value = "stab")]
    dict: String,
    /// Destination for the dictionary dump.
    #[arg(long)]
    file: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct StateFileArgs {
    /// T^m or a dense state file path.
    #[arg(long)]
    state: String,
    /// Destination for the dense state file.
    #[arg(long)]
    file: PathBuf,
}

fn expected_dict_count(n: usize, kind: DictKind) -> u64 {
    match kind {
        // 2^n * prod_{k=1..n} (2^k + 1) states in dimension 2^n.
        DictKind::Stab => {
            let mut c = 1u64 << n;
            for k in 1..=n {
                c *= (1u64 << k) + 1;
            }
            c
        }
        // Full support, i^(2 ell(x)) (-1)^(q(x)) phases: one bit per linear
        // coefficient and per strictly-upper pair.
        DictKind::QuadPhase => 1u64 << (n + n * n.saturating_sub(1) / 2),
    }
}

fn run_stab(cmd: StabCmd) -> Result<Outcome> {
    match cmd {
        StabCmd::Census(a) => {
            let kind: DictKind = a.dict.parse()?;
            let dict = Dictionary::enumerate(a.n, kind)?;
            let expected = expected_dict_count(a.n, kind);
            let matches = dict.len() as u64 == expected;
            let result = json!({
                "n": a.n,
                "kind": a.dict,
                "count": dict.len(),
                "expected": expected,
                "matches": matches,
            });
            outcome("stab census", &a, &result, matches)
        }
        StabCmd::Dump(a) => {
            let dict = Dictionary::enumerate(a.n, a.dict.parse()?)?;
            dict.dump(&a.file)?;
            let result = json!({"file": a.file, "count": dict.len()});
            outcome("stab dump", &a, &result, true)
        }
        StabCmd::State(a) => {
            let psi = parse_state(&a.state)?;
            dense::write_state_file(&a.file, &psi)?;
            let result = json!({"file": a.file, "n": psi.n()});
            outcome("stab state", &a, &result, true)
        }
    }
}

// ---------------------------------------------------------------- rank ----

#[derive(Subcommand, Debug)]
pub enum RankCmd {
    /// Smallest exact decomposition over a dictionary.
    Exact(RankExactArgs),
    /// Smallest subset whose span captures the state within delta.
    Approx(RankApproxArgs),
    /// Bisect the delta at which the approximate rank reaches a target.
    Threshold(RankThresholdArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct RankExactArgs {
    /// T^m or a dense state file path.
    #[arg(long)]
    state: String,
    #[arg(long, default_value = "stab")]
    dict: String,
    /// exhaustive or heuristic.
    #[arg(long, default_value = "exhaustive")]
    mode: String,
    /// Subset-enumeration budget per rank level.
    #[arg(long)]
    budget: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
pub struct RankApproxArgs {
    #[arg(long)]
    state: String,
    #[arg(long)]
    delta: f64,
    #[arg(long, default_value = "stab")]
    dict: String,
    #[arg(long, default_value = "exhaustive")]
    mode: String,
    #[arg(long)]
    budget: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
pub struct RankThresholdArgs {
    #[arg(long)]
    state: String,
    #[arg(long, default_value = "stab")]
    dict: String,
    /// Rank whose onset delta is located.
    #[arg(long, default_value_t = 1)]
    target_rank: usize,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
}

fn run_rank(cmd: RankCmd) -> Result<Outcome> {
    match cmd {
        RankCmd::Exact(a) => {
            let psi = parse_state(&a.state)?;
            let dict = Dictionary::enumerate(psi.n(), a.dict.parse()?)?;
            let mode: SearchMode = a.mode.parse()?;
            let cert = match a.budget {
                Some(b) => rank::rank_with_budget(&psi, None, &dict, mode, b)?,
                None => rank::exact_rank(&psi, &dict, mode)?,
            };
            let residual = cert.verify(&psi, &dict)?;
            let result = json!({"certificate": cert, "verified_residual": residual});
            outcome("rank exact", &a, &result, true)
        }
        RankCmd::Approx(a) => {
            let psi = parse_state(&a.state)?;
            let dict = Dictionary::enumerate(psi.n(), a.dict.parse()?)?;
            let mode: SearchMode = a.mode.parse()?;
            let cert = match a.budget {
                Some(b) => rank::rank_with_budget(&psi, Some(a.delta), &dict, mode, b)?,
                None => rank::approx_rank(&psi, a.delta, &dict, mode)?,
            };
            let residual = cert.verify(&psi, &dict)?;
            let result = json!({"certificate": cert, "verified_residual": residual});
            outcome("rank approx", &a, &result, true)
        }
        RankCmd::Threshold(a) => {
            let psi = parse_state(&a.state)?;
            let dict = Dictionary::enumerate(psi.n(), a.dict.parse()?)?;
            let delta_star = rank::approx_threshold(&psi, &dict, a.target_rank, a.tol)?;
            let result = json!({"target_rank": a.target_rank, "delta_star": delta_star});
            outcome("rank threshold", &a, &result, true)
        }
    }
}

// ------------------------------------------------------------- measure ----

#[derive(Subcommand, Debug)]
pub enum MeasureCmd {
    /// Full measure suite: fidelity, extent with duality gap, flatness
    /// bound, Gowers U3, and their mutual consistency checks.
    Report(MeasureArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct MeasureArgs {
    #[arg(long)]
    state: String,
    #[arg(long, default_value = "stab")]
    dict: String,
}

fn run_measure(cmd: MeasureCmd) -> Result<Outcome> {
    match cmd {
        MeasureCmd::Report(a) => {
            let psi = parse_state(&a.state)?;
            let dict = Dictionary::enumerate(psi.n(), a.dict.parse()?)?;
            let report = rank::measure_report(&psi, &dict)?;
            let passed = report.all_checks_hold;
            outcome("measure report", &a, &report, passed)
        }
    }
}

// -------------------------------------------------------------- gadget ----

#[derive(Subcommand, Debug)]
pub enum GadgetCmd {
    /// Rewrite every T into a teleportation gadget and verify all branches
    /// against direct simulation.
    Verify(CircuitArgs),
    /// Measurement-outcome distribution of the gadgetized circuit on
    /// |0...0>, which must be exactly uniform.
    Outcomes(CircuitArgs),
    /// Write a random Clifford+T circuit file.
    Random(GadgetRandomArgs),
    /// Check that gadget measurement branches cannot raise the approximate
    /// rank above the magic-state budget.
    Monotonic(MonotonicArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct CircuitArgs {
    /// Circuit file: "qubits <n>" header then one gate per line.
    #[arg(long)]
    circuit: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct GadgetRandomArgs {
    #[arg(long)]
    n: usize,
    /// Number of random Clifford gates.
    #[arg(long, default_value_t = 20)]
    clifford: usize,
    /// Number of T gates interleaved.
    #[arg(long, default_value_t = 2)]
    t: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    file: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct MonotonicArgs {
    #[arg(long, default_value_t = 1)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 0.2)]
    delta: f64,
    #[arg(long, default_value_t = 25)]
    trials: usize,
    #[arg(long)]
    seed: u64,
}

fn run_gadget(cmd: GadgetCmd) -> Result<Outcome> {
    match cmd {
        GadgetCmd::Verify(a) => {
            let circuit = CliffordTCircuit::read_file(&a.circuit)?;
            let report = gadget::verify_equivalence(&circuit)?;
            let passed = report.passed;
            outcome("gadget verify", &a, &report, passed)
        }
        GadgetCmd::Outcomes(a) => {
            let circuit = CliffordTCircuit::read_file(&a.circuit)?;
            let gadgetized = gadget::rewrite_gadgets(&circuit);
            let input = DenseState::zero_state(circuit.n())?;
            let stats = gadgetized.outcome_stats(&input)?;
            let passed = stats.max_deviation_from_uniform < 1e-9;
            outcome("gadget outcomes", &a, &stats, passed)
        }
        GadgetCmd::Random(a) => {
            if a.n == 0 {
                return Err(Error::Argument("need at least one qubit".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            let circuit = CliffordTCircuit::random(a.n, a.clifford, a.t, &mut rng);
            circuit.write_file(&a.file)?;
            let result = json!({
                "file": a.file,
                "n": circuit.n(),
                "gates": circuit.gates().len(),
                "t_count": circuit.t_count(),
            });
            outcome("gadget random", &a, &result, true)
        }
        GadgetCmd::Monotonic(a) => {
            let report = gadget::rank_monotonicity_experiment(a.n, a.k, a.delta, a.trials, a.seed)?;
            let passed = report.all_hold;
            outcome("gadget monotonic", &a, &report, passed)
        }
    }
}

// -------------------------------------------------------------- lookup ----

#[derive(Subcommand, Debug)]
pub enum LookupCmd {
    /// Build the SELECT-SWAP circuit for a table file; optionally verify it
    /// densely on every address.
    Build(LookupBuildArgs),
    /// Model T-count at one (n, b, lambda).
    Tcount(TcountArgs),
    /// Model T-count across every admissible lambda.
    Sweep(LookupSweepArgs),
    /// Write a random table file.
    Random(LookupRandomArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct LookupBuildArgs {
    /// Table file: 2^n lines of b-bit binary strings.
    #[arg(long)]
    table: PathBuf,
    #[arg(long)]
    lambda: usize,
    /// Simulate the circuit densely on every address and check the output
    /// and the cleanup.
    #[arg(long)]
    check: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct TcountArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    b: usize,
    #[arg(long)]
    lambda: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct LookupSweepArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    b: usize,
    /// Emit bare CSV (lambda,t_count) instead of the JSON envelope.
    #[arg(long)]
    csv: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct LookupRandomArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    b: usize,
    #[arg(long, default_value_t = 1)]
    lambda: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    file: PathBuf,
}

fn gate_census(gates: &[RevGate]) -> Value {
    let (mut x, mut cnot, mut mcx, mut cswap) = (0u64, 0u64, 0u64, 0u64);
    for g in gates {
        match g {
            RevGate::X(_) => x += 1,
            RevGate::Cnot { .. } => cnot += 1,
            RevGate::Mcx { .. } => mcx += 1,
            RevGate::CSwap { .. } => cswap += 1,
        }
    }
    json!({"x": x, "cnot": cnot, "mcx": mcx, "cswap": cswap})
}

fn run_lookup(cmd: LookupCmd) -> Result<Outcome> {
    let model = TCountModel::default();
    match cmd {
        LookupCmd::Build(a) => {
            let spec = LookupSpec::read_table(&a.table, a.lambda)?;
            let circuit = lookup::build_lookup(&spec)?;
            let checked = if a.check {
                if circuit.total_qubits() > 14 {
                    return Err(Error::Resource {
                        context: format!(
                            "dense check needs at most 14 qubits, circuit has {}",
                            circuit.total_qubits()
                        ),
                        best_rank: None,
                    });
                }
                let mut ok = true;
                for x in 0..1u64 << spec.n() {
                    let garbage = circuit.run_dense(x, circuit.gates_with_garbage())?;
                    let clean = circuit.run_dense(x, circuit.gates_clean())?;
                    ok &= garbage.output == spec.entry(x)
                        && clean.output == spec.entry(x)
                        && clean.banks.iter().all(|&v| v == 0);
                }
                Some(ok)
            } else {
                None
            };
            let result = json!({
                "n": spec.n(),
                "b": spec.b(),
                "lambda": spec.lambda(),
                "total_qubits": circuit.total_qubits(),
                "gates": gate_census(circuit.gates_clean()),
                "model_t_count": model.t_count(spec.n(), spec.b(), spec.lambda())?,
                "checked": checked,
            });
            let passed = checked != Some(false);
            outcome("lookup build", &a, &result, passed)
        }
        LookupCmd::Tcount(a) => {
            let t = model.t_count(a.n, a.b, a.lambda)?;
            let result = json!({"t_count": t, "model": model});
            outcome("lookup tcount", &a, &result, true)
        }
        LookupCmd::Sweep(a) => {
            let rows = lookup::sweep_lambda(a.n, a.b, &model)?;
            let best = lookup::best_lambda(a.n, a.b, &model)?;
            let mut out = outcome(
                "lookup sweep",
                &a,
                &json!({"rows": rows, "best": best}),
                true,
            )?;
            if a.csv {
                let mut csv = String::from("lambda,t_count\n");
                for r in &rows {
                    csv.push_str(&format!("{},{}\n", r.lambda, r.t_count));
                }
                out.csv = Some(csv);
            }
            Ok(out)
        }
        LookupCmd::Random(a) => {
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            let spec = LookupSpec::random(a.n, a.b, a.lambda, &mut rng)?;
            spec.write_table(&a.file)?;
            let result = json!({"file": a.file, "n": a.n, "b": a.b});
            outcome("lookup random", &a, &result, true)
        }
    }
}

// --------------------------------------------------------------- bound ----

#[derive(Subcommand, Debug)]
pub enum BoundCmd {
    /// Tail bound on low-rank approximability of a Haar state.
    Tail(BoundTailArgs),
    /// The inline-estimate exponent check across a range of n.
    Inline(BoundInlineArgs),
    /// Existence threshold n0 and the tail at its guaranteed rank.
    Threshold(BoundThresholdArgs),
    /// The full budget-to-rank lower-bound pipeline.
    Main(BoundMainArgs),
    /// Tail bound under an epsilon-approximate t-design.
    DesignTail(DesignTailArgs),
    /// First n where the polynomial-parameter design tail dips below 1.
    PolyThreshold(PolyThresholdArgs),
    /// The four design gate-count formulas plus the route comparison.
    Formulas(FormulasArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct BoundTailArgs {
    #[arg(long)]
    n: u32,
    /// Decomposition size M; fractional values allowed.
    #[arg(long)]
    m_rank: f64,
    #[arg(long)]
    delta: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct BoundInlineArgs {
    #[arg(long, default_value_t = 10)]
    n_min: u32,
    #[arg(long, default_value_t = 30)]
    n_max: u32,
    #[arg(long)]
    delta: f64,
    /// Emit bare CSV instead of the JSON envelope.
    #[arg(long)]
    csv: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct BoundThresholdArgs {
    #[arg(long)]
    delta: f64,
    /// Base for unmarked logarithms: two or natural.
    #[arg(long, default_value = "two")]
    base: String,
}

#[derive(Args, Debug, Serialize)]
pub struct BoundMainArgs {
    /// T-state budget.
    #[arg(long)]
    m: u64,
    #[arg(long)]
    delta: f64,
    /// Linear coefficient in the budget c n 2^(n/2).
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Absolute constant in the final bound.
    #[arg(long = "C", default_value_t = 1e-3)]
    c_abs: f64,
    #[arg(long, default_value = "two")]
    base: String,
}

#[derive(Args, Debug, Serialize)]
pub struct DesignTailArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    m_rank: f64,
    #[arg(long)]
    t: f64,
    #[arg(long)]
    delta: f64,
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct PolyThresholdArgs {
    /// Target rank exponent: the design certifies rank n^d.
    #[arg(long)]
    d: u32,
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
    #[arg(long, default_value_t = 200)]
    n_max: u32,
}

#[derive(Args, Debug, Serialize)]
pub struct FormulasArgs {
    #[arg(long)]
    n: u64,
    #[arg(long)]
    t: u64,
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    #[arg(long, default_value_t = 1)]
    d: u32,
    #[arg(long, default_value_t = 1.0)]
    c1: f64,
    #[arg(long, default_value_t = 1.0)]
    c2: f64,
    #[arg(long, default_value = "two")]
    base: String,
}

fn run_bound(cmd: BoundCmd) -> Result<Outcome> {
    match cmd {
        BoundCmd::Tail(a) => {
            let report = bounds::haar_tail(a.n, a.m_rank, a.delta)?;
            outcome("bound tail", &a, &report, true)
        }
        BoundCmd::Inline(a) => {
            if a.n_min == 0 || a.n_min > a.n_max {
                return Err(Error::Argument(format!(
                    "bad n range {}..={}",
                    a.n_min, a.n_max
                )));
            }
            let rows = (a.n_min..=a.n_max)
                .map(|n| bounds::haar_inline_estimate(n, a.delta))
                .collect::<Result<Vec<_>>>()?;
            let all_hold = rows.iter().all(|r| r.holds);
            let mut out = outcome(
                "bound inline",
                &a,
                &json!({"rows": rows, "all_hold": all_hold}),
                all_hold,
            )?;
            if a.csv {
                let mut csv = String::from("n,delta,m_real,exponent,rhs,holds\n");
                for r in &rows {
                    csv.push_str(&format!(
                        "{},{},{},{},{},{}\n",
                        r.n, r.delta, r.m_real, r.exponent, r.rhs, r.holds
                    ));
                }
                out.csv = Some(csv);
            }
            Ok(out)
        }
        BoundCmd::Threshold(a) => {
            let base: LogBase = a.base.parse()?;
            let th = bounds::haar_exists_threshold(a.delta, base)?;
            let result = json!({
                "n0": th.n0,
                "guaranteed_rank_at_n0": th.guaranteed_rank(th.n0),
                "tail_at_n0": th.tail_at(th.n0),
                "verified_through": th.n0 + 64,
            });
            outcome("bound threshold", &a, &result, true)
        }
        BoundCmd::Main(a) => {
            let consts = Constants {
                c: a.c,
                c_abs: a.c_abs,
                ..Constants::default()
            };
            let mb = bounds::main_lower_bound(a.m, a.delta, &consts, a.base.parse()?)?;
            let passed = mb.upper_bracket_holds && mb.lower_bracket_holds;
            outcome("bound main", &a, &mb, passed)
        }
        BoundCmd::DesignTail(a) => {
            let report = bounds::tdesign_tail(a.n, a.m_rank, a.t, a.delta, a.epsilon)?;
            outcome("bound design-tail", &a, &report, true)
        }
        BoundCmd::PolyThreshold(a) => {
            let th = bounds::tdesign_poly_threshold(a.d, a.delta, a.n_max)?;
            outcome("bound poly-threshold", &a, &th, true)
        }
        BoundCmd::Formulas(a) => {
            let consts = Constants {
                c1: a.c1,
                c2: a.c2,
                ..Constants::default()
            };
            let base: LogBase = a.base.parse()?;
            let formulas = bounds::design_gate_formulas(a.n, a.t, a.epsilon, a.d, &consts, base)?;
            let comparison = bounds::design_route_comparison(a.n, a.d, &consts, base)?;
            let result = json!({"formulas": formulas, "route_comparison": comparison});
            outcome("bound formulas", &a, &result, true)
        }
    }
}

// ---------------------------------------------------------------- haar ----

#[derive(Subcommand, Debug)]
pub enum HaarCmd {
    /// Exact moment of the squared projected mass of a Haar state.
    Moment(MomentArgs),
    /// Monte Carlo estimate of a moment against the closed form.
    MomentMc(MomentMcArgs),
    /// Sampled capture fraction against the design tail and Markov bounds.
    DesignMc(DesignMcArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct MomentArgs {
    #[arg(long)]
    n: u32,
    /// Projector rank M.
    #[arg(long)]
    m_rank: u64,
    #[arg(long)]
    t: u32,
}

#[derive(Args, Debug, Serialize)]
pub struct MomentMcArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m_rank: u64,
    #[arg(long)]
    t: u32,
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long)]
    seed: u64,
}

#[derive(Args, Debug, Serialize)]
pub struct DesignMcArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    t: u32,
    #[arg(long)]
    delta: f64,
    /// Number of dictionary states in the fixed random subset.
    #[arg(long, default_value_t = 5)]
    subset: usize,
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long)]
    seed: u64,
}

fn run_haar(cmd: HaarCmd) -> Result<Outcome> {
    match cmd {
        HaarCmd::Moment(a) => {
            let exact = bounds::haar_moment(a.n, a.m_rank, a.t)?;
            let result = json!({
                "exact": exact.to_string(),
                "value": bounds::haar_moment_f64(a.n, a.m_rank, a.t)?,
            });
            outcome("haar moment", &a, &result, true)
        }
        HaarCmd::MomentMc(a) => {
            let chk = bounds::haar_moment_mc(a.n, a.m_rank, a.t, a.samples, a.seed)?;
            let passed = chk.within_four_se;
            outcome("haar moment-mc", &a, &chk, passed)
        }
        HaarCmd::DesignMc(a) => {
            let chk = bounds::tdesign_tail_mc(a.n, a.t, a.delta, a.subset, a.samples, a.seed)?;
            let passed = chk.passed;
            outcome("haar design-mc", &a, &chk, passed)
        }
    }
}

// ---------------------------------------------------------------- demo ----

#[derive(Subcommand, Debug)]
pub enum DemoCmd {
    /// A state whose exact rank strictly exceeds its approximate rank.
    Gap(GapArgs),
    /// Residue-class expansion of the T phase, its padding reduction, and
    /// quadratic-phase approximate ranks.
    Mod8(Mod8Args),
}

#[derive(Args, Debug, Serialize)]
pub struct GapArgs {
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    /// The approximate search runs at prime_scale * delta.
    #[arg(long, default_value_t = 1.0)]
    prime_scale: f64,
    #[arg(long)]
    seed: u64,
}

#[derive(Args, Debug, Serialize)]
pub struct Mod8Args {
    #[arg(long, default_value_t = 10)]
    identity_qubits: usize,
    #[arg(long, default_value_t = 4)]
    padding_qubits: usize,
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
}

fn run_demo(cmd: DemoCmd) -> Result<Outcome> {
    match cmd {
        DemoCmd::Gap(a) => {
            let demo = rank::gap_demo(a.n, a.delta, a.prime_scale, a.seed)?;
            let passed = demo.approx.rank < demo.exact.rank;
            outcome("demo gap", &a, &demo, passed)
        }
        DemoCmd::Mod8(a) => {
            let report = rank::mod8_report(a.identity_qubits, a.padding_qubits, a.delta)?;
            let passed = report.all_pass;
            outcome("demo mod8", &a, &report, passed)
        }
    }
}
