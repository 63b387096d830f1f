//! Dense state vectors: the ground-truth oracle for everything symbolic.
//!
//! Basis labels are bit strings x_0 .. x_{n-1}; qubit 0 is the most
//! significant bit of the amplitude index, so index order equals the
//! lexicographic order on bit strings used everywhere else in the crate.

use crate::error::{Error, Result};
use crate::f2::F2Vector;
use crate::gadget::Gate;
use crate::linalg;
use crate::stab::StabilizerState;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::io::{BufRead, Write};
use std::path::Path;

type C = Complex64;

/// Hard cap on dense simulation width.
pub const MAX_DENSE_QUBITS: usize = 20;

#[derive(Clone, Debug, PartialEq)]
pub struct DenseState {
    n: usize,
    amps: Vec<C>,
}

fn check_width(n: usize) -> Result<()> {
    if n > MAX_DENSE_QUBITS {
        return Err(Error::Resource {
            context: format!(
                "dense simulation of {n} qubits exceeds the {MAX_DENSE_QUBITS}-qubit cap"
            ),
            best_rank: None,
        });
    }
    Ok(())
}

impl DenseState {
    pub fn zero_state(n: usize) -> Result<Self> {
        check_width(n)?;
        let mut amps = vec![C::new(0.0, 0.0); 1 << n];
        amps[0] = C::new(1.0, 0.0);
        Ok(DenseState { n, amps })
    }

    pub fn basis_state(n: usize, x: &F2Vector) -> Result<Self> {
        check_width(n)?;
        if x.len() != n {
            return Err(Error::Dimension(format!(
                "basis label of length {} for {n} qubits",
                x.len()
            )));
        }
        let mut amps = vec![C::new(0.0, 0.0); 1 << n];
        amps[index_of(x)] = C::new(1.0, 0.0);
        Ok(DenseState { n, amps })
    }

    pub fn from_amps(n: usize, amps: Vec<C>) -> Result<Self> {
        check_width(n)?;
        if amps.len() != 1 << n {
            return Err(Error::Dimension(format!(
                "{} amplitudes for {n} qubits",
                amps.len()
            )));
        }
        Ok(DenseState { n, amps })
    }

    /// m-fold tensor power of the single-qubit magic state
    /// (|0> + e^{i pi/4} |1>)/sqrt(2); amplitude at x is
    /// e^{i pi |x| / 4} / 2^{m/2}.
    pub fn magic_t_power(m: usize) -> Result<Self> {
        check_width(m)?;
        let norm = 0.5f64.powi(m as i32).sqrt();
        let amps = (0..1usize << m)
            .map(|idx| {
                let w = (idx as u32).count_ones() as f64;
                C::from_polar(norm, w * PI / 4.0)
            })
            .collect();
        Ok(DenseState { n: m, amps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amps(&self) -> &[C] {
        &self.amps
    }

    pub fn amps_mut(&mut self) -> &mut [C] {
        &mut self.amps
    }

    pub fn amp(&self, x: &F2Vector) -> C {
        self.amps[index_of(x)]
    }

    pub fn tensor(&self, other: &DenseState) -> Result<DenseState> {
        let n = self.n + other.n;
        check_width(n)?;
        let mut amps = vec![C::new(0.0, 0.0); 1 << n];
        let block = 1usize << other.n;
        for (i, &a) in self.amps.iter().enumerate() {
            for (j, &b) in other.amps.iter().enumerate() {
                amps[i * block + j] = a * b;
            }
        }
        Ok(DenseState { n, amps })
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let nm = self.norm();
        if nm < 1e-300 {
            return Err(Error::Numeric("cannot normalize the zero vector".into()));
        }
        for a in &mut self.amps {
            *a /= nm;
        }
        Ok(())
    }

    /// <self|other>.
    pub fn inner(&self, other: &DenseState) -> Result<C> {
        if self.n != other.n {
            return Err(Error::Dimension(format!(
                "inner product of {}- and {}-qubit states",
                self.n, other.n
            )));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// |<self|other>|^2 for normalized inputs.
    pub fn fidelity(&self, other: &DenseState) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    pub fn apply_gate(&mut self, gate: Gate) -> Result<()> {
        let n = self.n;
        let bit = |q: usize| -> Result<usize> {
            if q >= n {
                return Err(Error::Argument(format!(
                    "gate touches qubit {q} of an {n}-qubit state"
                )));
            }
            Ok(n - 1 - q)
        };
        match gate {
            Gate::H(q) => {
                let p = bit(q)?;
                let mask = 1usize << p;
                for i in 0..self.amps.len() {
                    if i & mask == 0 {
                        let a = self.amps[i];
                        let b = self.amps[i | mask];
                        self.amps[i] = (a + b) * FRAC_1_SQRT_2;
                        self.amps[i | mask] = (a - b) * FRAC_1_SQRT_2;
                    }
                }
            }
            Gate::S(q) => {
                let mask = 1usize << bit(q)?;
                for i in 0..self.amps.len() {
                    if i & mask != 0 {
                        self.amps[i] *= C::new(0.0, 1.0);
                    }
                }
            }
            Gate::Sdg(q) => {
                let mask = 1usize << bit(q)?;
                for i in 0..self.amps.len() {
                    if i & mask != 0 {
                        self.amps[i] *= C::new(0.0, -1.0);
                    }
                }
            }
            Gate::T(q) => {
                let mask = 1usize << bit(q)?;
                let w = C::from_polar(1.0, PI / 4.0);
                for i in 0..self.amps.len() {
                    if i & mask != 0 {
                        self.amps[i] *= w;
                    }
                }
            }
            Gate::X(q) => {
                let mask = 1usize << bit(q)?;
                for i in 0..self.amps.len() {
                    if i & mask == 0 {
                        self.amps.swap(i, i | mask);
                    }
                }
            }
            Gate::Z(q) => {
                let mask = 1usize << bit(q)?;
                for i in 0..self.amps.len() {
                    if i & mask != 0 {
                        self.amps[i] = -self.amps[i];
                    }
                }
            }
            Gate::Cz(a, b) => {
                if a == b {
                    return Err(Error::Argument("CZ needs two distinct qubits".into()));
                }
                let ma = 1usize << bit(a)?;
                let mb = 1usize << bit(b)?;
                for i in 0..self.amps.len() {
                    if i & ma != 0 && i & mb != 0 {
                        self.amps[i] = -self.amps[i];
                    }
                }
            }
            Gate::Cnot(c, t) => {
                if c == t {
                    return Err(Error::Argument("CNOT needs two distinct qubits".into()));
                }
                let mc = 1usize << bit(c)?;
                let mt = 1usize << bit(t)?;
                for i in 0..self.amps.len() {
                    if i & mc != 0 && i & mt == 0 {
                        self.amps.swap(i, i | mt);
                    }
                }
            }
        }
        Ok(())
    }

    pub fn apply_gates(&mut self, gates: &[Gate]) -> Result<()> {
        for &g in gates {
            self.apply_gate(g)?;
        }
        Ok(())
    }

    /// Amplitude-preserving restriction to qubit `q` = `bit`; the qubit is
    /// removed from the register. The result is generally unnormalized and
    /// its squared norm is the branch probability.
    pub fn project_qubit(&self, q: usize, bit: bool) -> Result<DenseState> {
        if q >= self.n {
            return Err(Error::Argument(format!(
                "projecting qubit {q} of an {}-qubit state",
                self.n
            )));
        }
        let p = self.n - 1 - q;
        let low_mask = (1usize << p) - 1;
        let b = bit as usize;
        let amps = (0..1usize << (self.n - 1))
            .map(|j| {
                let idx = ((j >> p) << (p + 1)) | (b << p) | (j & low_mask);
                self.amps[idx]
            })
            .collect();
        Ok(DenseState {
            n: self.n - 1,
            amps,
        })
    }
}

/// Index of the basis label, qubit 0 most significant.
pub fn index_of(x: &F2Vector) -> usize {
    let n = x.len();
    let mut idx = 0usize;
    for j in 0..n {
        idx = (idx << 1) | x.get(j) as usize;
    }
    idx
}

/// Basis label of an index, inverse of [`index_of`].
pub fn bits_of(idx: usize, n: usize) -> F2Vector {
    let mut x = F2Vector::zeros(n);
    for j in 0..n {
        if idx >> (n - 1 - j) & 1 == 1 {
            x.set(j, true);
        }
    }
    x
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Haar-random state: i.i.d. standard complex Gaussian amplitudes,
/// normalized. The generator is keyed on (master seed, sample index) so the
/// stream does not depend on scheduling or batch order.
pub fn haar_state(n: usize, master_seed: u64, sample_index: u64) -> Result<DenseState> {
    check_width(n)?;
    let key = splitmix64(master_seed ^ splitmix64(sample_index.wrapping_add(1)));
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    let mut amps: Vec<C> = (0..1usize << n)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C::new(re, im)
        })
        .collect();
    let nm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut amps {
        *a /= nm;
    }
    Ok(DenseState { n, amps })
}

/// Squared norm of the orthogonal projection of `psi` onto the span of the
/// given stabilizer states: beta^dagger G^+ beta with the Gram matrix built
/// from symbolic inner products and a spectral pseudo-inverse (eigenvalues
/// below 1e-10 of the largest are treated as zero). Invariant under linear
/// dependence in the list.
pub fn project_norm2(psi: &DenseState, states: &[StabilizerState]) -> Result<f64> {
    if states.is_empty() {
        return Ok(0.0);
    }
    let k = states.len();
    for s in states {
        if s.n() != psi.n() {
            return Err(Error::Dimension(format!(
                "projector state on {} qubits against a {}-qubit target",
                s.n(),
                psi.n()
            )));
        }
    }
    let mut gram = vec![C::new(0.0, 0.0); k * k];
    for i in 0..k {
        for j in i..k {
            let g = states[i].inner_product(&states[j])?;
            gram[i * k + j] = g;
            gram[j * k + i] = g.conj();
        }
    }
    let beta: Vec<C> = states
        .iter()
        .map(|s| s.overlap_with_dense(psi))
        .collect::<Result<_>>()?;
    let g = linalg::HermMatrix::from_rows(k, gram);
    let x = linalg::pinv_solve(&g, &beta, 1e-10);
    let val: C = beta.iter().zip(&x).map(|(b, c)| b.conj() * c).sum();
    Ok(val.re.clamp(0.0, 1.0 + 1e-9))
}

/// Two-sample Kolmogorov-Smirnov statistic and the alpha = 0.01 threshold.
pub fn ks_two_sample(a: &mut [f64], b: &mut [f64]) -> (f64, f64) {
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        let fa = i as f64 / a.len() as f64;
        let fb = j as f64 / b.len() as f64;
        d = d.max((fa - fb).abs());
    }
    let c01 = 1.628; // sqrt(-ln(alpha/2)/2) at alpha = 0.01
    let thresh = c01 * ((a.len() + b.len()) as f64 / (a.len() as f64 * b.len() as f64)).sqrt();
    (d, thresh)
}

/// State file: "n=<int>" header then one "re im" pair per basis index.
pub fn write_state_file(path: &Path, psi: &DenseState) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "n={}", psi.n())?;
    for a in psi.amps() {
        writeln!(f, "{:.17e} {:.17e}", a.re, a.im)?;
    }
    Ok(())
}

pub fn read_state_file(path: &Path) -> Result<DenseState> {
    let f = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut lines = f.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty state file".into()))??;
    let n: usize = header
        .trim()
        .strip_prefix("n=")
        .ok_or_else(|| Error::Parse(format!("expected n=<int> header, got {header:?}")))?
        .parse()
        .map_err(|e| Error::Parse(format!("bad qubit count: {e}")))?;
    check_width(n)?;
    let mut amps = Vec::with_capacity(1 << n);
    for line in lines {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let mut parts = t.split_whitespace();
        let re: f64 = parts
            .next()
            .ok_or_else(|| Error::Parse("missing real part".into()))?
            .parse()
            .map_err(|e| Error::Parse(format!("bad amplitude: {e}")))?;
        let im: f64 = parts
            .next()
            .ok_or_else(|| Error::Parse("missing imaginary part".into()))?
            .parse()
            .map_err(|e| Error::Parse(format!("bad amplitude: {e}")))?;
        amps.push(C::new(re, im));
    }
    DenseState::from_amps(n, amps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_convention_is_big_endian() {
        let x = F2Vector::from_bits(&[true, false, true]);
        assert_eq!(index_of(&x), 0b101);
        assert_eq!(bits_of(0b101, 3), x);
    }

    #[test]
    fn magic_state_amplitudes() {
        let t = DenseState::magic_t_power(2).unwrap();
        let w = C::from_polar(0.5, PI / 4.0);
        assert!((t.amps()[0] - C::new(0.5, 0.0)).norm() < 1e-15);
        assert!((t.amps()[1] - w).norm() < 1e-15);
        assert!((t.amps()[2] - w).norm() < 1e-15);
        assert!((t.amps()[3] - C::from_polar(0.5, PI / 2.0)).norm() < 1e-15);
        assert!((t.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn gate_identities() {
        // HH = I, SS = Z, CNOT^2 = I on a random-ish state.
        let mut psi = DenseState::magic_t_power(2).unwrap();
        let orig = psi.clone();
        psi.apply_gates(&[Gate::H(0), Gate::H(0), Gate::Cnot(0, 1), Gate::Cnot(0, 1)])
            .unwrap();
        for (a, b) in psi.amps().iter().zip(orig.amps()) {
            assert!((a - b).norm() < 1e-14);
        }
        let mut phi = orig.clone();
        phi.apply_gates(&[Gate::S(1), Gate::S(1)]).unwrap();
        let mut zphi = orig.clone();
        zphi.apply_gate(Gate::Z(1)).unwrap();
        for (a, b) in phi.amps().iter().zip(zphi.amps()) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn t_gate_is_diag_phase() {
        let mut psi = DenseState::zero_state(1).unwrap();
        psi.apply_gate(Gate::H(0)).unwrap();
        psi.apply_gate(Gate::T(0)).unwrap();
        let t = DenseState::magic_t_power(1).unwrap();
        assert!((psi.fidelity(&t).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn projection_of_plus_state() {
        // |0> tensor |+>, project qubit 1 onto 1: scalar 1/sqrt(2), state |0>.
        let zero = DenseState::zero_state(1).unwrap();
        let mut plus = DenseState::zero_state(1).unwrap();
        plus.apply_gate(Gate::H(0)).unwrap();
        let joint = zero.tensor(&plus).unwrap();
        let proj = joint.project_qubit(1, true).unwrap();
        assert!((proj.norm() - FRAC_1_SQRT_2).abs() < 1e-14);
        assert!((proj.amps()[0].re - FRAC_1_SQRT_2).abs() < 1e-14);
    }

    #[test]
    fn haar_states_are_normalized_and_reproducible() {
        let a = haar_state(3, 42, 7).unwrap();
        let b = haar_state(3, 42, 7).unwrap();
        let c = haar_state(3, 42, 8).unwrap();
        assert_eq!(a.amps(), b.amps());
        assert!((a.norm() - 1.0).abs() < 1e-12);
        assert!(a.fidelity(&c).unwrap() < 0.999);
    }

    #[test]
    fn haar_mean_overlap_matches_one_over_dim() {
        // E |<0|psi>|^2 = 1/8 for n = 3; 1e5 samples, 4 sigma band.
        let n = 3;
        let samples = 100_000u64;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for k in 0..samples {
            let psi = haar_state(n, 99, k).unwrap();
            let v = psi.amps()[0].norm_sqr();
            sum += v;
            sumsq += v * v;
        }
        let mean = sum / samples as f64;
        let var = (sumsq / samples as f64 - mean * mean).max(0.0);
        let se = (var / samples as f64).sqrt();
        assert!(
            (mean - 0.125).abs() < 4.0 * se + 1e-9,
            "mean {mean} se {se}"
        );
    }

    #[test]
    fn overlap_distribution_is_state_independent() {
        // |<s|psi>|^2 for two different fixed stabilizer states, two-sample KS.
        let n = 2;
        let s1 = DenseState::zero_state(n).unwrap();
        let mut s2 = DenseState::zero_state(n).unwrap();
        s2.apply_gates(&[Gate::H(0), Gate::Cnot(0, 1)]).unwrap();
        let mut d1 = Vec::new();
        let mut d2 = Vec::new();
        for k in 0..4000u64 {
            let psi = haar_state(n, 1234, k).unwrap();
            d1.push(psi.fidelity(&s1).unwrap());
            d2.push(psi.fidelity(&s2).unwrap());
        }
        let (d, thresh) = ks_two_sample(&mut d1, &mut d2);
        assert!(d < thresh, "KS statistic {d} above {thresh}");
    }

    #[test]
    fn projection_norm_is_lipschitz() {
        // |f(psi) - f(phi)| <= 2 ||psi - phi|| for f = ||P psi||^2.
        let s = DenseState::zero_state(2).unwrap();
        for k in 0..50u64 {
            let a = haar_state(2, 7, 2 * k).unwrap();
            let b = haar_state(2, 7, 2 * k + 1).unwrap();
            let fa = a.fidelity(&s).unwrap();
            let fb = b.fidelity(&s).unwrap();
            let dist = a
                .amps()
                .iter()
                .zip(b.amps())
                .map(|(x, y)| (x - y).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!((fa - fb).abs() <= 2.0 * dist + 1e-12);
        }
    }
}
