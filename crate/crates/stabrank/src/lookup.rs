//! SELECT-SWAP table-lookup oracles and their T-count accounting.
//!
//! A table of 2^n entries, b bits each, is loaded by a two-stage reversible
//! circuit: a SELECT stage reads the high ceil(log2(2^n / lambda)) address
//! bits and writes lambda consecutive entries into ancilla banks with
//! polarity-controlled multi-controlled X gates, then a SWAP network reads
//! the remaining low bits and routes the wanted bank to position zero, where
//! it is copied into the output register. Running the load stage in reverse
//! clears every bank, so the oracle comes in two flavors: with a named
//! garbage register, or self-cleaning at twice the load cost.
//!
//! The T-count model is an accounting convention, not a claim about any
//! particular MCX decomposition: an MCX with c >= 2 controls costs
//! 7 (c - 1) T gates, controlled swaps cost 7 per routed bit, and the SWAP
//! network is charged lambda * b controlled swaps per layer across
//! log2(lambda) layers. Both unit prices are parameters.

use crate::dense::DenseState;
use crate::error::{Error, Result};
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;
use std::io::{BufRead, Write};
use std::path::Path;

/// A lookup problem: data[x] < 2^b for every n-bit address x, to be served
/// with `lambda` ancilla banks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LookupSpec {
    n: usize,
    b: usize,
    lambda: usize,
    data: Vec<u64>,
}

impl LookupSpec {
    pub fn new(n: usize, b: usize, lambda: usize, data: Vec<u64>) -> Result<Self> {
        if n == 0 || n > 40 {
            return Err(Error::Argument(format!("address width {n} out of range")));
        }
        if b == 0 || b > 63 {
            return Err(Error::Argument(format!("entry width {b} out of range")));
        }
        if data.len() != 1usize << n {
            return Err(Error::Argument(format!(
                "table has {} entries, want 2^{n}",
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|&&v| v >> b != 0) {
            return Err(Error::Argument(format!(
                "entry {bad:#x} does not fit in {b} bits"
            )));
        }
        let max_lambda = 1usize << n.div_ceil(2);
        if !lambda.is_power_of_two() || lambda > max_lambda {
            return Err(Error::Argument(format!(
                "lambda must be a power of two at most 2^ceil(n/2) = {max_lambda}, got {lambda}"
            )));
        }
        Ok(LookupSpec { n, b, lambda, data })
    }

    pub fn random<R: Rng>(n: usize, b: usize, lambda: usize, rng: &mut R) -> Result<Self> {
        let data = (0..1u64 << n)
            .map(|_| rng.gen::<u64>() & ((1 << b) - 1))
            .collect();
        LookupSpec::new(n, b, lambda, data)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn b(&self) -> usize {
        self.b
    }

    pub fn lambda(&self) -> usize {
        self.lambda
    }

    pub fn data(&self) -> &[u64] {
        &self.data
    }

    pub fn entry(&self, x: u64) -> u64 {
        self.data[x as usize]
    }

    /// One b-character binary string per line, 2^n lines, address order.
    pub fn write_table(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        for &v in &self.data {
            writeln!(f, "{v:0width$b}", width = self.b)?;
        }
        Ok(())
    }

    /// Table dimensions are inferred: b from the line width, n from the
    /// line count.
    pub fn read_table(path: &Path, lambda: usize) -> Result<Self> {
        let f = std::io::BufReader::new(std::fs::File::open(path)?);
        let mut data = Vec::new();
        let mut b = 0usize;
        for line in f.lines() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            if b == 0 {
                b = t.len();
            } else if t.len() != b {
                return Err(Error::Parse(format!(
                    "ragged table: line width {} after {b}",
                    t.len()
                )));
            }
            let v = u64::from_str_radix(t, 2)
                .map_err(|e| Error::Parse(format!("bad table line {t:?}: {e}")))?;
            data.push(v);
        }
        if !data.len().is_power_of_two() || data.len() < 2 {
            return Err(Error::Parse(format!(
                "table length {} is not a power of two",
                data.len()
            )));
        }
        let n = data.len().trailing_zeros() as usize;
        LookupSpec::new(n, b, lambda, data)
    }
}

/// Classical reversible gates; every variant is an involution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RevGate {
    X(usize),
    Cnot {
        control: usize,
        target: usize,
    },
    /// X on `target` when every (qubit, wanted-bit) control matches.
    Mcx {
        controls: Vec<(usize, bool)>,
        target: usize,
    },
    CSwap {
        control: usize,
        a: usize,
        b: usize,
    },
}

impl RevGate {
    /// Image of one basis index under the gate; bit p of `idx` is qubit
    /// total - 1 - p (the dense big-endian convention).
    pub fn map_index(&self, idx: usize, total: usize) -> usize {
        let bit = |q: usize| 1usize << (total - 1 - q);
        match self {
            RevGate::X(t) => idx ^ bit(*t),
            RevGate::Cnot { control, target } => {
                if idx & bit(*control) != 0 {
                    idx ^ bit(*target)
                } else {
                    idx
                }
            }
            RevGate::Mcx { controls, target } => {
                if controls
                    .iter()
                    .all(|&(q, want)| (idx & bit(q) != 0) == want)
                {
                    idx ^ bit(*target)
                } else {
                    idx
                }
            }
            RevGate::CSwap { control, a, b } => {
                if idx & bit(*control) != 0 {
                    let (ba, bb) = (idx & bit(*a) != 0, idx & bit(*b) != 0);
                    if ba != bb {
                        return idx ^ bit(*a) ^ bit(*b);
                    }
                }
                idx
            }
        }
    }

    pub fn mcx_controls(&self) -> Option<usize> {
        match self {
            RevGate::Mcx { controls, .. } => Some(controls.len()),
            _ => None,
        }
    }
}

/// A built lookup circuit. Qubit layout: address 0..n (big-endian), output
/// n..n+b, bank j bit beta at n + b + j*b + beta. The bank qubits are the
/// named garbage register.
#[derive(Clone, Debug)]
pub struct LookupCircuit {
    spec: LookupSpec,
    gates: Vec<RevGate>,
    fill_len: usize,
    copy_len: usize,
}

impl LookupCircuit {
    pub fn spec(&self) -> &LookupSpec {
        &self.spec
    }

    pub fn total_qubits(&self) -> usize {
        let s = &self.spec;
        s.n + s.b + s.lambda * s.b
    }

    pub fn output_qubit(&self, beta: usize) -> usize {
        self.spec.n + beta
    }

    pub fn bank_qubit(&self, bank: usize, beta: usize) -> usize {
        self.spec.n + self.spec.b + bank * self.spec.b + beta
    }

    /// Qubits left holding garbage by the un-cleaned oracle.
    pub fn garbage_qubits(&self) -> Vec<usize> {
        let lo = self.spec.n + self.spec.b;
        (lo..self.total_qubits()).collect()
    }

    /// Load + route + copy, leaving the banks populated.
    pub fn gates_with_garbage(&self) -> &[RevGate] {
        &self.gates[..self.fill_len + self.copy_len]
    }

    /// The full self-cleaning oracle.
    pub fn gates_clean(&self) -> &[RevGate] {
        &self.gates
    }

    /// The uncompute suffix, which must be the load stage reversed.
    pub fn uncompute_gates(&self) -> &[RevGate] {
        &self.gates[self.fill_len + self.copy_len..]
    }

    /// The load stage alone: SELECT writes plus the SWAP network.
    pub fn fill_gates(&self) -> &[RevGate] {
        &self.gates[..self.fill_len]
    }

    /// Run a basis state |x>|0>|0> through the given gate list classically.
    pub fn run_basis(&self, x: u64, gates: &[RevGate]) -> BasisOutcome {
        let total = self.total_qubits();
        let mut idx = (x as usize) << (total - self.spec.n);
        for g in gates {
            idx = g.map_index(idx, total);
        }
        self.split_index(idx)
    }

    /// Same trip through dense simulation; basis states stay basis states.
    pub fn run_dense(&self, x: u64, gates: &[RevGate]) -> Result<BasisOutcome> {
        let total = self.total_qubits();
        let dim = 1usize << total;
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[(x as usize) << (total - self.spec.n)] = Complex64::new(1.0, 0.0);
        let mut state = DenseState::from_amps(total, amps)?;
        for g in gates {
            let src = state.amps().to_vec();
            let out = state.amps_mut();
            for (i, v) in src.iter().enumerate() {
                out[g.map_index(i, total)] = *v;
            }
        }
        let hot: Vec<usize> = state
            .amps()
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() > 0.5)
            .map(|(i, _)| i)
            .collect();
        if hot.len() != 1 {
            return Err(Error::Numeric(
                "reversible circuit did not map a basis state to a basis state".into(),
            ));
        }
        Ok(self.split_index(hot[0]))
    }

    fn split_index(&self, idx: usize) -> BasisOutcome {
        let total = self.total_qubits();
        let s = &self.spec;
        let get = |q: usize| (idx >> (total - 1 - q)) & 1;
        let mut address = 0u64;
        for q in 0..s.n {
            address = address << 1 | get(q) as u64;
        }
        let mut output = 0u64;
        for beta in 0..s.b {
            output = output << 1 | get(self.output_qubit(beta)) as u64;
        }
        let mut banks = Vec::with_capacity(s.lambda);
        for j in 0..s.lambda {
            let mut v = 0u64;
            for beta in 0..s.b {
                v = v << 1 | get(self.bank_qubit(j, beta)) as u64;
            }
            banks.push(v);
        }
        BasisOutcome {
            address,
            output,
            banks,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisOutcome {
    pub address: u64,
    pub output: u64,
    pub banks: Vec<u64>,
}

/// Assemble the SELECT-SWAP circuit for a lookup problem.
pub fn build_lookup(spec: &LookupSpec) -> Result<LookupCircuit> {
    let n = spec.n;
    let b = spec.b;
    let lambda = spec.lambda;
    let s = lambda.trailing_zeros() as usize;
    let n_h = n - s;
    let circuit_stub = LookupCircuit {
        spec: spec.clone(),
        gates: Vec::new(),
        fill_len: 0,
        copy_len: 0,
    };
    let mut fill: Vec<RevGate> = Vec::new();

    // SELECT: write entry (v << s) | j into bank j, controlled on the high
    // address bits spelling v.
    for v in 0..1u64 << n_h {
        let controls: Vec<(usize, bool)> =
            (0..n_h).map(|i| (i, v >> (n_h - 1 - i) & 1 == 1)).collect();
        for j in 0..lambda {
            let entry = spec.data[((v as usize) << s) | j];
            for beta in 0..b {
                if entry >> (b - 1 - beta) & 1 == 0 {
                    continue;
                }
                let target = circuit_stub.bank_qubit(j, beta);
                fill.push(if controls.is_empty() {
                    RevGate::X(target)
                } else {
                    RevGate::Mcx {
                        controls: controls.clone(),
                        target,
                    }
                });
            }
        }
    }

    // SWAP network: layer t keys on low address bit t (qubit n - 1 - t) and
    // halves the distance of the wanted bank to position zero.
    for t in 0..s {
        let control = n - 1 - t;
        let stride = 1usize << t;
        let mut j = 0;
        while j + stride < lambda {
            for beta in 0..b {
                fill.push(RevGate::CSwap {
                    control,
                    a: circuit_stub.bank_qubit(j, beta),
                    b: circuit_stub.bank_qubit(j + stride, beta),
                });
            }
            j += 2 * stride;
        }
    }

    let copy: Vec<RevGate> = (0..b)
        .map(|beta| RevGate::Cnot {
            control: circuit_stub.bank_qubit(0, beta),
            target: circuit_stub.output_qubit(beta),
        })
        .collect();

    let mut gates = fill.clone();
    let fill_len = gates.len();
    let copy_len = copy.len();
    gates.extend(copy);
    gates.extend(fill.into_iter().rev());

    Ok(LookupCircuit {
        spec: spec.clone(),
        gates,
        fill_len,
        copy_len,
    })
}

/// Unit prices of the accounting model.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TCountModel {
    /// T gates per control beyond the first in an MCX.
    pub mcx_per_extra_control: u64,
    /// T gates per bit routed by one controlled swap.
    pub cswap_per_bit: u64,
}

impl Default for TCountModel {
    fn default() -> Self {
        TCountModel {
            mcx_per_extra_control: 7,
            cswap_per_bit: 7,
        }
    }
}

impl TCountModel {
    pub fn mcx(&self, controls: usize) -> u64 {
        if controls >= 2 {
            self.mcx_per_extra_control * (controls as u64 - 1)
        } else {
            0
        }
    }

    /// Model T-count of the garbage-producing oracle: one MCX per SELECT
    /// branch value plus lambda * b charged controlled swaps per layer.
    pub fn t_count(&self, n: usize, b: usize, lambda: usize) -> Result<u64> {
        if !lambda.is_power_of_two() || lambda > 1 << n.div_ceil(2) {
            return Err(Error::Argument(format!(
                "lambda {lambda} invalid for n = {n}"
            )));
        }
        let s = lambda.trailing_zeros() as u64;
        let n_h = n as u64 - s;
        let select = (1u64 << n_h) * self.mcx(n_h as usize);
        let swap = s * lambda as u64 * b as u64 * self.cswap_per_bit;
        Ok(select + swap)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub lambda: usize,
    pub t_count: u64,
}

/// Model T-count across every admissible bank count.
pub fn sweep_lambda(n: usize, b: usize, model: &TCountModel) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    let mut lambda = 1usize;
    while lambda <= 1 << n.div_ceil(2) {
        rows.push(SweepRow {
            lambda,
            t_count: model.t_count(n, b, lambda)?,
        });
        lambda *= 2;
    }
    Ok(rows)
}

/// Bank count minimizing the model T-count, ties to the smaller lambda.
pub fn best_lambda(n: usize, b: usize, model: &TCountModel) -> Result<SweepRow> {
    sweep_lambda(n, b, model)?
        .into_iter()
        .min_by(|x, y| x.t_count.cmp(&y.t_count).then(x.lambda.cmp(&y.lambda)))
        .ok_or_else(|| Error::Argument("empty lambda sweep".into()))
}
