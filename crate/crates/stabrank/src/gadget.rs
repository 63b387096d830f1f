//! Clifford+T circuits and the measurement-based T gadget.
//!
//! A T gate teleports through a magic-state ancilla: CNOT from the data
//! qubit onto an ancilla prepared in (|0> + e^{i pi/4}|1>)/sqrt(2), measure
//! the ancilla, and on outcome 1 apply S to the data qubit. Both outcomes
//! occur with probability exactly 1/2 and both corrected branches equal the
//! direct T action up to global phase. Ancillae sit above the data register
//! and are consumed from the top down, so the ancilla measured for the i-th
//! T gate is always the last qubit of the surviving register.

use crate::dense::DenseState;
use crate::error::{Error, Result};
use crate::rank::{self, SearchMode};
use crate::stab::{DictKind, Dictionary};
use rand::Rng;
use serde::Serialize;
use std::io::{BufRead, Write};
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Gate {
    H(usize),
    S(usize),
    Sdg(usize),
    X(usize),
    Z(usize),
    T(usize),
    Cz(usize, usize),
    Cnot(usize, usize),
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::H(q) | Gate::S(q) | Gate::Sdg(q) | Gate::X(q) | Gate::Z(q) | Gate::T(q) => {
                vec![q]
            }
            Gate::Cz(a, b) | Gate::Cnot(a, b) => vec![a, b],
        }
    }

    pub fn is_clifford(&self) -> bool {
        !matches!(self, Gate::T(_))
    }
}

impl std::fmt::Display for Gate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            Gate::H(q) => write!(f, "H {q}"),
            Gate::S(q) => write!(f, "S {q}"),
            Gate::Sdg(q) => write!(f, "SDG {q}"),
            Gate::X(q) => write!(f, "X {q}"),
            Gate::Z(q) => write!(f, "Z {q}"),
            Gate::T(q) => write!(f, "T {q}"),
            Gate::Cz(a, b) => write!(f, "CZ {a} {b}"),
            Gate::Cnot(a, b) => write!(f, "CNOT {a} {b}"),
        }
    }
}

impl std::str::FromStr for Gate {
    type Err = Error;
    fn from_str(s: &str) -> Result<Gate> {
        let mut it = s.split_whitespace();
        let name = it
            .next()
            .ok_or_else(|| Error::Parse("empty gate line".into()))?;
        let mut arg = || -> Result<usize> {
            it.next()
                .ok_or_else(|| Error::Parse(format!("gate {name} is missing a qubit index")))?
                .parse()
                .map_err(|e| Error::Parse(format!("bad qubit index in {s:?}: {e}")))
        };
        let gate = match name.to_ascii_uppercase().as_str() {
            "H" => Gate::H(arg()?),
            "S" => Gate::S(arg()?),
            "SDG" => Gate::Sdg(arg()?),
            "X" => Gate::X(arg()?),
            "Z" => Gate::Z(arg()?),
            "T" => Gate::T(arg()?),
            "CZ" => Gate::Cz(arg()?, arg()?),
            "CNOT" | "CX" => Gate::Cnot(arg()?, arg()?),
            other => return Err(Error::Parse(format!("unknown gate {other:?}"))),
        };
        if let Some(extra) = it.next() {
            return Err(Error::Parse(format!(
                "trailing token {extra:?} after {name}"
            )));
        }
        Ok(gate)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliffordTCircuit {
    n: usize,
    gates: Vec<Gate>,
}

impl CliffordTCircuit {
    pub fn new(n: usize, gates: Vec<Gate>) -> Result<Self> {
        for g in &gates {
            let qs = g.qubits();
            for &q in &qs {
                if q >= n {
                    return Err(Error::Argument(format!(
                        "gate {g} touches qubit {q} of an {n}-qubit circuit"
                    )));
                }
            }
            if qs.len() == 2 && qs[0] == qs[1] {
                return Err(Error::Argument(format!("gate {g} repeats a qubit")));
            }
        }
        Ok(CliffordTCircuit { n, gates })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn t_count(&self) -> usize {
        self.gates.iter().filter(|g| !g.is_clifford()).count()
    }

    /// Random circuit with `clifford_len` uniformly drawn Clifford gates and
    /// exactly `t_count` T gates mixed in at random positions.
    pub fn random<R: Rng>(n: usize, clifford_len: usize, t_count: usize, rng: &mut R) -> Self {
        assert!(n >= 1);
        let mut gates: Vec<Gate> = (0..clifford_len)
            .map(|_| random_clifford_gate(n, rng))
            .collect();
        for _ in 0..t_count {
            let pos = rng.gen_range(0..=gates.len());
            gates.insert(pos, Gate::T(rng.gen_range(0..n)));
        }
        CliffordTCircuit { n, gates }
    }

    pub fn simulate_dense(&self, input: &DenseState) -> Result<DenseState> {
        if input.n() != self.n {
            return Err(Error::Dimension(format!(
                "{}-qubit input for a {}-qubit circuit",
                input.n(),
                self.n
            )));
        }
        let mut out = input.clone();
        out.apply_gates(&self.gates)?;
        Ok(out)
    }

    /// Text form: "qubits <n>" header, one gate per line, "#" comments.
    pub fn to_text(&self) -> String {
        let mut s = format!("qubits {}\n", self.n);
        for g in &self.gates {
            s.push_str(&g.to_string());
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut n = None;
        let mut gates = Vec::new();
        for raw in text.lines() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(v) = line.strip_prefix("qubits") {
                if n.is_some() {
                    return Err(Error::Parse("duplicate qubits header".into()));
                }
                n = Some(
                    v.trim()
                        .parse::<usize>()
                        .map_err(|e| Error::Parse(format!("bad qubit count: {e}")))?,
                );
                continue;
            }
            gates.push(line.parse::<Gate>()?);
        }
        let n = n.ok_or_else(|| Error::Parse("missing \"qubits <n>\" header".into()))?;
        CliffordTCircuit::new(n, gates)
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        let f = std::io::BufReader::new(std::fs::File::open(path)?);
        let mut text = String::new();
        for line in f.lines() {
            text.push_str(&line?);
            text.push('\n');
        }
        Self::parse(&text)
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        f.write_all(self.to_text().as_bytes())?;
        Ok(())
    }
}

/// Uniformly random generator gate; CNOT/CZ only when two qubits exist.
pub fn random_clifford_gate<R: Rng>(n: usize, rng: &mut R) -> Gate {
    let two = |rng: &mut R| {
        let a = rng.gen_range(0..n);
        let mut b = rng.gen_range(0..n);
        while b == a {
            b = rng.gen_range(0..n);
        }
        (a, b)
    };
    let top = if n > 1 { 7 } else { 5 };
    match rng.gen_range(0..top) {
        0 => Gate::H(rng.gen_range(0..n)),
        1 => Gate::S(rng.gen_range(0..n)),
        2 => Gate::Sdg(rng.gen_range(0..n)),
        3 => Gate::X(rng.gen_range(0..n)),
        4 => Gate::Z(rng.gen_range(0..n)),
        5 => {
            let (a, b) = two(rng);
            Gate::Cnot(a, b)
        }
        _ => {
            let (a, b) = two(rng);
            Gate::Cz(a, b)
        }
    }
}

/// Which gate repairs the outcome-1 branch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Correction {
    SOnOne,
    SdgOnOne,
}

impl Correction {
    fn gate(self, q: usize) -> Gate {
        match self {
            Correction::SOnOne => Gate::S(q),
            Correction::SdgOnOne => Gate::Sdg(q),
        }
    }
}

/// A Clifford+T circuit with every T gate rewritten into a teleportation
/// gadget: Clifford blocks separated by (CNOT onto ancilla, measure,
/// conditional correction) sites. The i-th gadget (1-based) consumes ancilla
/// n + k - i, the last qubit of the register at that moment.
#[derive(Clone, Debug)]
pub struct GadgetizedCircuit {
    n: usize,
    k: usize,
    blocks: Vec<Vec<Gate>>,
    t_qubits: Vec<usize>,
    correction: Correction,
}

impl GadgetizedCircuit {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_total(&self) -> usize {
        self.n + self.k
    }

    pub fn blocks(&self) -> &[Vec<Gate>] {
        &self.blocks
    }

    pub fn t_qubits(&self) -> &[usize] {
        &self.t_qubits
    }

    pub fn correction(&self) -> Correction {
        self.correction
    }

    pub fn with_correction(mut self, c: Correction) -> Self {
        self.correction = c;
        self
    }

    /// Ancilla index for the i-th measurement site (0-based).
    pub fn ancilla_of(&self, i: usize) -> usize {
        self.n + self.k - 1 - i
    }

    /// Run one measurement branch densely. Returns the branch probability
    /// and the normalized post-branch state on the data qubits, or None for
    /// a probability-zero branch.
    pub fn simulate_branch(
        &self,
        outcomes: &[bool],
        input: &DenseState,
    ) -> Result<Option<(f64, DenseState)>> {
        if outcomes.len() != self.k {
            return Err(Error::Argument(format!(
                "{} outcomes for {} measurement sites",
                outcomes.len(),
                self.k
            )));
        }
        if input.n() != self.n {
            return Err(Error::Dimension(format!(
                "{}-qubit input for a {}-qubit circuit",
                input.n(),
                self.n
            )));
        }
        let mut state = if self.k > 0 {
            input.tensor(&DenseState::magic_t_power(self.k)?)?
        } else {
            input.clone()
        };
        state.apply_gates(&self.blocks[0])?;
        for (i, &bit) in outcomes.iter().enumerate() {
            let anc = self.ancilla_of(i);
            let q = self.t_qubits[i];
            state.apply_gate(Gate::Cnot(q, anc))?;
            state = state.project_qubit(anc, bit)?;
            if state.norm() < 1e-12 {
                return Ok(None);
            }
            if bit {
                state.apply_gate(self.correction.gate(q))?;
            }
            state.apply_gates(&self.blocks[i + 1])?;
        }
        let p = state.norm().powi(2);
        state.normalize()?;
        Ok(Some((p, state)))
    }

    /// Exact probability of every outcome string, by simulation rather than
    /// sampling. Outcome bits index the distribution big-endian (first
    /// measurement = most significant bit).
    pub fn outcome_stats(&self, input: &DenseState) -> Result<OutcomeStats> {
        let k = self.k;
        let mut probs = Vec::with_capacity(1 << k);
        for code in 0..1u64 << k {
            let outcomes: Vec<bool> = (0..k).map(|i| code >> (k - 1 - i) & 1 == 1).collect();
            let p = match self.simulate_branch(&outcomes, input)? {
                Some((p, _)) => p,
                None => 0.0,
            };
            probs.push(p);
        }
        let total: f64 = probs.iter().sum();
        let uniform = 1.0 / probs.len() as f64;
        let max_dev = probs
            .iter()
            .map(|p| (p - uniform).abs())
            .fold(0.0f64, f64::max);
        Ok(OutcomeStats {
            k,
            probs,
            total,
            max_deviation_from_uniform: max_dev,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OutcomeStats {
    pub k: usize,
    pub probs: Vec<f64>,
    pub total: f64,
    pub max_deviation_from_uniform: f64,
}

/// Rewrite every T gate into a teleportation gadget; Clifford gates stay in
/// place. The default correction is S on outcome 1.
pub fn rewrite_gadgets(c: &CliffordTCircuit) -> GadgetizedCircuit {
    let mut blocks = vec![Vec::new()];
    let mut t_qubits = Vec::new();
    for &g in c.gates() {
        match g {
            Gate::T(q) => {
                t_qubits.push(q);
                blocks.push(Vec::new());
            }
            other => blocks.last_mut().unwrap().push(other),
        }
    }
    GadgetizedCircuit {
        n: c.n(),
        k: t_qubits.len(),
        blocks,
        t_qubits,
        correction: Correction::SOnOne,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EquivalenceReport {
    pub n: usize,
    pub k: usize,
    pub branches: usize,
    pub max_infidelity: f64,
    pub max_probability_deviation: f64,
    pub correction: Correction,
    pub passed: bool,
}

/// Check, branch by branch, that the gadgetized circuit reproduces the direct
/// dense simulation of `c` on |0...0> up to global phase. If the default
/// correction fails the tolerance, the opposite convention is tried and the
/// one that passed is recorded.
pub fn verify_equivalence(c: &CliffordTCircuit) -> Result<EquivalenceReport> {
    let input = DenseState::zero_state(c.n())?;
    let direct = c.simulate_dense(&input)?;
    let base = rewrite_gadgets(c);
    let mut last = None;
    for correction in [Correction::SOnOne, Correction::SdgOnOne] {
        let g = base.clone().with_correction(correction);
        let k = g.k();
        let mut max_infid = 0.0f64;
        let mut max_prob_dev = 0.0f64;
        let mut ok = true;
        for code in 0..1u64 << k {
            let outcomes: Vec<bool> = (0..k).map(|i| code >> (k - 1 - i) & 1 == 1).collect();
            let Some((p, state)) = g.simulate_branch(&outcomes, &input)? else {
                ok = false;
                max_infid = 1.0;
                continue;
            };
            let infid = 1.0 - state.fidelity(&direct)?;
            max_infid = max_infid.max(infid);
            max_prob_dev = max_prob_dev.max((p - 0.5f64.powi(k as i32)).abs());
            if infid > 1e-9 {
                ok = false;
            }
        }
        let report = EquivalenceReport {
            n: c.n(),
            k,
            branches: 1 << k,
            max_infidelity: max_infid,
            max_probability_deviation: max_prob_dev,
            correction,
            passed: ok,
        };
        if ok {
            return Ok(report);
        }
        last = Some(report);
    }
    Ok(last.expect("at least one convention was tried"))
}

#[derive(Clone, Debug, Serialize)]
pub struct MonotonicityTrial {
    pub circuit: Vec<String>,
    pub lhs_rank: usize,
    pub rhs_rank: usize,
    pub branch_ranks: Option<(usize, usize)>,
    pub pre_rank: Option<usize>,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct MonotonicityReport {
    pub n: usize,
    pub k: usize,
    pub delta: f64,
    pub trials: Vec<MonotonicityTrial>,
    pub all_hold: bool,
}

/// Random-circuit check that gadgetizing can only lower the approximate
/// rank: chi_delta(V|0>) <= chi_delta of the k-fold magic state, both by
/// exhaustive search. For each trial with k >= 1 the last gadget's
/// pre-measurement state (which has an exactly balanced marginal) is also
/// split into its two branches, asserting min over branches <= whole.
pub fn rank_monotonicity_experiment(
    n: usize,
    k: usize,
    delta: f64,
    trials: usize,
    seed: u64,
) -> Result<MonotonicityReport> {
    use rand::SeedableRng;
    if n > 2 || k > 2 {
        return Err(Error::Resource {
            context: format!("exhaustive rank checks need n <= 2 and k <= 2, got n={n} k={k}"),
            best_rank: None,
        });
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let dict_n = Dictionary::enumerate(n, DictKind::Stab)?;
    let dict_k = if k > 0 {
        Some(Dictionary::enumerate(k, DictKind::Stab)?)
    } else {
        None
    };
    let dict_pre = Dictionary::enumerate(n + 1, DictKind::Stab)?;
    let rhs_rank = match &dict_k {
        Some(d) => {
            let magic = DenseState::magic_t_power(k)?;
            rank::approx_rank(&magic, delta, d, SearchMode::Exhaustive)?.rank
        }
        None => 1,
    };
    let mut out = Vec::with_capacity(trials);
    let mut all_hold = true;
    for _ in 0..trials {
        let c = CliffordTCircuit::random(n, 12, k, &mut rng);
        let v0 = {
            let mut s = c.simulate_dense(&DenseState::zero_state(n)?)?;
            s.normalize()?;
            s
        };
        let lhs = rank::approx_rank(&v0, delta, &dict_n, SearchMode::Exhaustive)?.rank;
        let mut holds = lhs <= rhs_rank;

        // Balanced-marginal branch check on a fresh gadget pre-state:
        // (V'|0>) tensor |T>, then CNOT onto the ancilla.
        let (branch_ranks, pre_rank) = if k >= 1 {
            let data_q = rng.gen_range(0..n);
            let mut pre = v0.tensor(&DenseState::magic_t_power(1)?)?;
            pre.apply_gate(Gate::Cnot(data_q, n))?;
            let p0 = pre.project_qubit(n, false)?.norm().powi(2);
            if (p0 - 0.5).abs() > 1e-12 {
                return Err(Error::Numeric(format!(
                    "gadget marginal is not balanced: p0 = {p0}"
                )));
            }
            let pre_rank = rank::approx_rank(&pre, delta, &dict_pre, SearchMode::Exhaustive)?.rank;
            let branch = |bit: bool| -> Result<usize> {
                let mut b = pre.project_qubit(n, bit)?;
                b.normalize()?;
                Ok(rank::approx_rank(&b, delta, &dict_n, SearchMode::Exhaustive)?.rank)
            };
            let (r0, r1) = (branch(false)?, branch(true)?);
            if r0.min(r1) > pre_rank {
                holds = false;
            }
            (Some((r0, r1)), Some(pre_rank))
        } else {
            (None, None)
        };
        all_hold &= holds;
        out.push(MonotonicityTrial {
            circuit: c.gates().iter().map(|g| g.to_string()).collect(),
            lhs_rank: lhs,
            rhs_rank,
            branch_ranks,
            pre_rank,
            holds,
        });
    }
    Ok(MonotonicityReport {
        n,
        k,
        delta,
        trials: out,
        all_hold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn circuit_text_round_trip() {
        let text = "# demo\nqubits 3\nH 0\nCNOT 0 1\nT 2\nCZ 1 2   # inline\nSDG 0\n";
        let c = CliffordTCircuit::parse(text).unwrap();
        assert_eq!(c.n(), 3);
        assert_eq!(c.t_count(), 1);
        assert_eq!(c.gates()[1], Gate::Cnot(0, 1));
        let again = CliffordTCircuit::parse(&c.to_text()).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn circuit_rejects_bad_indices() {
        assert!(CliffordTCircuit::new(2, vec![Gate::H(2)]).is_err());
        assert!(CliffordTCircuit::new(2, vec![Gate::Cnot(1, 1)]).is_err());
        assert!("CNOT 0".parse::<Gate>().is_err());
        assert!("Q 0".parse::<Gate>().is_err());
    }

    #[test]
    fn gadget_structure() {
        let c = CliffordTCircuit::parse("qubits 2\nH 0\nT 0\nCNOT 0 1\nT 1\nH 1\n").unwrap();
        let g = rewrite_gadgets(&c);
        assert_eq!(g.k(), 2);
        assert_eq!(g.n_total(), 4);
        assert_eq!(g.t_qubits(), &[0, 1]);
        assert_eq!(g.blocks().len(), 3);
        // First gadget takes the top ancilla, the second the next one down.
        assert_eq!(g.ancilla_of(0), 3);
        assert_eq!(g.ancilla_of(1), 2);
    }

    #[test]
    fn single_t_on_plus_both_branches() {
        let c = CliffordTCircuit::parse("qubits 1\nH 0\nT 0\n").unwrap();
        let g = rewrite_gadgets(&c);
        let input = DenseState::zero_state(1).unwrap();
        let direct = c.simulate_dense(&input).unwrap();
        for bit in [false, true] {
            let (p, state) = g.simulate_branch(&[bit], &input).unwrap().unwrap();
            assert!((p - 0.5).abs() < 1e-12);
            assert!(1.0 - state.fidelity(&direct).unwrap() < 1e-12);
        }
    }

    #[test]
    fn clifford_only_circuit_is_exact() {
        let c = CliffordTCircuit::parse("qubits 2\nH 0\nCNOT 0 1\nS 1\n").unwrap();
        let r = verify_equivalence(&c).unwrap();
        assert!(r.passed);
        assert_eq!(r.branches, 1);
        assert!(r.max_infidelity < 1e-12);
    }

    #[test]
    fn random_circuits_verify_and_outcomes_are_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        for _ in 0..30 {
            let n = rng.gen_range(1..=3);
            let k = rng.gen_range(0..=3);
            let c = CliffordTCircuit::random(n, 10, k, &mut rng);
            let r = verify_equivalence(&c).unwrap();
            assert!(r.passed, "equivalence failed for {:?}", c.to_text());
            assert_eq!(r.correction, Correction::SOnOne);
            let stats = rewrite_gadgets(&c)
                .outcome_stats(&DenseState::zero_state(n).unwrap())
                .unwrap();
            assert!((stats.total - 1.0).abs() < 1e-10);
            assert!(stats.max_deviation_from_uniform < 1e-10);
        }
    }

    #[test]
    fn wrong_correction_fails_on_a_t_circuit() {
        let c = CliffordTCircuit::parse("qubits 1\nH 0\nT 0\n").unwrap();
        let g = rewrite_gadgets(&c).with_correction(Correction::SdgOnOne);
        let input = DenseState::zero_state(1).unwrap();
        let direct = c.simulate_dense(&input).unwrap();
        let (_, state) = g.simulate_branch(&[true], &input).unwrap().unwrap();
        assert!(1.0 - state.fidelity(&direct).unwrap() > 1e-3);
    }
}
