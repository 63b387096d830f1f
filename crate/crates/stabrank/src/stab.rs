//! Stabilizer states as phased affine subspaces.
//!
//! A state is scale * sum_{y in F2^m} i^{t(y)} |L y + v> where the rows of L
//! are independent, and t(y) = sum_j g_j y_j + 2 sum_{j<k} q_jk y_j y_k is a
//! mod-4 polynomial in the subspace coordinates. Every Clifford gate, basis
//! measurement, and pairwise inner product reduces to a handful of rewrites
//! of (L, v, g, q): variable substitution, variable negation, pinning,
//! multiplying in a parity phase, and summing out a variable that no longer
//! moves the support point. The last of these is a one-variable Gauss sum
//! with four outcomes; iterating it also evaluates full inner products
//! exactly, as integer powers of sqrt(2) times an eighth root of unity.

use crate::dense::{self, DenseState};
use crate::error::{Error, Result};
use crate::f2::{self, AffineSubspace, F2Matrix, F2Vector, I_POW};
use crate::gadget::Gate;
use num_bigint::BigUint;
use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::io::{BufRead, Write};
use std::path::Path;

type C = Complex64;

/// Mod-4 polynomial t(y) = konst + sum_j g_j y_j + 2 sum_{j<k} q_jk y_j y_k.
/// The quadratic coefficients live strictly above the diagonal of `quad`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct PhasePoly {
    g: Vec<u8>,
    quad: Vec<F2Vector>,
    konst: u8,
}

impl PhasePoly {
    pub(crate) fn new(vars: usize) -> Self {
        PhasePoly {
            g: vec![0; vars],
            quad: vec![F2Vector::zeros(vars); vars],
            konst: 0,
        }
    }

    pub(crate) fn vars(&self) -> usize {
        self.g.len()
    }

    fn pair(&self, i: usize, j: usize) -> bool {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.quad[a].get(b)
    }

    fn toggle_pair(&mut self, i: usize, j: usize) {
        debug_assert_ne!(i, j);
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.quad[a].flip(b);
    }

    fn set_pair(&mut self, i: usize, j: usize, v: bool) {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.quad[a].set(b, v);
    }

    /// Variables paired with i by a quadratic coefficient.
    fn row_mask(&self, i: usize) -> F2Vector {
        let m = self.vars();
        let mut mask = F2Vector::zeros(m);
        for k in 0..m {
            if k != i && self.pair(i, k) {
                mask.set(k, true);
            }
        }
        mask
    }

    pub(crate) fn eval(&self, y: &F2Vector) -> u8 {
        debug_assert_eq!(y.len(), self.vars());
        let mut t = self.konst as u32;
        for j in y.ones() {
            t += self.g[j] as u32;
            t += 2 * (self.quad[j].count_ones_masked(y) as u32);
        }
        (t % 4) as u8
    }

    /// Rewrite y_i -> y_i + y_j inside the polynomial.
    fn substitute_sum(&mut self, i: usize, j: usize) {
        debug_assert_ne!(i, j);
        self.g[j] = (self.g[j] + self.g[i] + 2 * self.pair(i, j) as u8) % 4;
        let mask = self.row_mask(i);
        for k in mask.ones() {
            if k != j {
                self.toggle_pair(j, k);
            }
        }
        if self.g[i] % 2 == 1 {
            self.toggle_pair(i, j);
        }
    }

    /// Rewrite y_i -> 1 + y_i.
    fn negate_var(&mut self, i: usize) {
        self.konst = (self.konst + self.g[i]) % 4;
        self.g[i] = (4 - self.g[i]) % 4;
        let mask = self.row_mask(i);
        for k in mask.ones() {
            self.g[k] = (self.g[k] + 2) % 4;
        }
    }

    fn delete_var(&mut self, i: usize) {
        self.g.remove(i);
        self.quad.remove(i);
        for row in &mut self.quad {
            *row = row.remove_bit(i);
        }
    }

    fn push_var(&mut self, g_new: u8) {
        let m = self.vars();
        for row in &mut self.quad {
            *row = row.extended(m + 1);
        }
        self.quad.push(F2Vector::zeros(m + 1));
        self.g.push(g_new % 4);
    }

    fn swap_vars(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        self.g.swap(i, j);
        for k in 0..self.vars() {
            if k == i || k == j {
                continue;
            }
            let pik = self.pair(i, k);
            let pjk = self.pair(j, k);
            self.set_pair(i, k, pjk);
            self.set_pair(j, k, pik);
        }
    }

    /// Add c * (xor of y_j over the mask), lifted mod 4: each variable in the
    /// mask gains c, and for odd c every pair inside the mask toggles.
    fn add_parity(&mut self, mask: &F2Vector, c: u8) {
        let c = c % 4;
        if c == 0 {
            return;
        }
        let idx: Vec<usize> = mask.ones().collect();
        for &j in &idx {
            self.g[j] = (self.g[j] + c) % 4;
        }
        if c % 2 == 1 {
            for a in 0..idx.len() {
                for b in (a + 1)..idx.len() {
                    self.toggle_pair(idx[a], idx[b]);
                }
            }
        }
    }

    /// Add 2 * parity(a.y) * parity(b.y): +2 on the overlap of the masks and
    /// a pair toggle wherever exactly one cross product hits the pair.
    fn add_pair_products(&mut self, a: &F2Vector, b: &F2Vector) {
        let m = self.vars();
        for j in 0..m {
            if a.get(j) && b.get(j) {
                self.g[j] = (self.g[j] + 2) % 4;
            }
            for k in (j + 1)..m {
                if (a.get(j) && b.get(k)) ^ (a.get(k) && b.get(j)) {
                    self.toggle_pair(j, k);
                }
            }
        }
    }

    /// Restrict to the subset where parity(mask.y) = c, eliminating one
    /// variable. The mask must be nonempty.
    fn restrict(&mut self, mask: &F2Vector, c: bool) {
        let pivot = mask.first_one().expect("restricting on an empty parity");
        for k in mask.ones() {
            if k != pivot {
                self.substitute_sum(pivot, k);
            }
        }
        if c {
            self.negate_var(pivot);
        }
        self.delete_var(pivot);
    }

    /// Exact value of sum_{y in F2^m} i^{t(y)} via variable elimination.
    fn gauss_sum(mut self) -> GaussScalar {
        let mut pow2: i32 = 0;
        let mut oct: u32 = 0;
        while self.vars() > 0 {
            let i = self.vars() - 1;
            let c = self.g[i];
            let mask = self.row_mask(i).remove_bit(i);
            self.delete_var(i);
            if mask.is_zero() {
                match c {
                    0 => pow2 += 2,
                    1 => {
                        pow2 += 1;
                        oct += 1;
                    }
                    2 => return GaussScalar::Zero,
                    _ => {
                        pow2 += 1;
                        oct += 7;
                    }
                }
            } else if c.is_multiple_of(2) {
                // 1 + (-1)^{c/2 + parity}: survives only on one parity class.
                pow2 += 2;
                self.restrict(&mask, c == 2);
            } else {
                // (1 + i^c) i^{(4-c) parity}.
                pow2 += 1;
                oct += if c == 1 { 1 } else { 7 };
                self.add_parity(&mask, 4 - c);
            }
        }
        oct += 2 * self.konst as u32;
        GaussScalar::Val {
            pow2,
            octant: (oct % 8) as u8,
        }
    }
}

/// Exact scalar sqrt(2)^pow2 * exp(i pi octant / 4), or zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum GaussScalar {
    Zero,
    Val { pow2: i32, octant: u8 },
}

impl GaussScalar {
    pub(crate) fn to_complex(self) -> C {
        match self {
            GaussScalar::Zero => C::new(0.0, 0.0),
            GaussScalar::Val { pow2, octant } => {
                C::from_polar(2f64.powf(pow2 as f64 / 2.0), PI / 4.0 * octant as f64)
            }
        }
    }
}

/// Discrete identity of a stabilizer ray: canonical support plus the mod-4
/// phase coefficients in canonical coordinates. Two states are equal up to
/// global phase and positive scaling exactly when their keys agree.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RayKey {
    basis: Vec<F2Vector>,
    offset: F2Vector,
    g: Vec<u8>,
    quad: Vec<F2Vector>,
}

#[derive(Clone, Debug)]
pub struct StabilizerState {
    n: usize,
    basis: Vec<F2Vector>,
    offset: F2Vector,
    phase: PhasePoly,
    scale: C,
}

impl StabilizerState {
    pub fn zero_state(n: usize) -> Self {
        StabilizerState {
            n,
            basis: Vec::new(),
            offset: F2Vector::zeros(n),
            phase: PhasePoly::new(0),
            scale: C::new(1.0, 0.0),
        }
    }

    pub fn basis_state(n: usize, x: &F2Vector) -> Result<Self> {
        if x.len() != n {
            return Err(Error::Dimension(format!(
                "basis label of length {} for {n} qubits",
                x.len()
            )));
        }
        Ok(StabilizerState {
            n,
            basis: Vec::new(),
            offset: x.clone(),
            phase: PhasePoly::new(0),
            scale: C::new(1.0, 0.0),
        })
    }

    /// |+>^n, the uniform superposition.
    pub fn plus_state(n: usize) -> Self {
        StabilizerState {
            n,
            basis: (0..n).map(|i| F2Vector::unit(n, i)).collect(),
            offset: F2Vector::zeros(n),
            phase: PhasePoly::new(n),
            scale: C::new(0.5f64.powi(n as i32).sqrt(), 0.0),
        }
    }

    /// Assemble a state from canonical-style parts. The phase is given in the
    /// split form (ell, lin, Q) over the subspace coordinates.
    pub fn from_parts(
        support: AffineSubspace,
        phase: &f2::QuadraticPhase,
        scale: C,
    ) -> Result<Self> {
        let m = support.dim();
        if phase.dim() != m {
            return Err(Error::Dimension(format!(
                "phase on {} variables for a dimension-{m} support",
                phase.dim()
            )));
        }
        let mut poly = PhasePoly::new(m);
        for j in 0..m {
            let ell = phase.ell().get(j) as u8;
            let lin = phase.lin().get(j) as u8;
            poly.g[j] = (ell + 2 * lin) % 4;
        }
        for j in 0..m {
            for k in (j + 1)..m {
                let q = phase.quad().get(j, k) ^ (phase.ell().get(j) && phase.ell().get(k));
                poly.quad[j].set(k, q);
            }
        }
        Ok(StabilizerState {
            n: support.ambient(),
            basis: support.basis().to_vec(),
            offset: support.offset().clone(),
            phase: poly,
            scale,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Dimension of the support subspace.
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn scale(&self) -> C {
        self.scale
    }

    pub fn support(&self) -> AffineSubspace {
        AffineSubspace::new(self.n, self.basis.clone(), self.offset.clone())
            .expect("state invariant: independent basis rows")
    }

    /// Phase function over the support coordinates in split (ell, lin, Q)
    /// form: amplitude(L y + v) = scale * i^{ell.y} (-1)^{Q(y) + lin.y}.
    pub fn phase(&self) -> f2::QuadraticPhase {
        let m = self.dim();
        let mut quad = F2Matrix::zeros(m, m);
        let mut lin = F2Vector::zeros(m);
        let mut ell = F2Vector::zeros(m);
        for j in 0..m {
            ell.set(j, self.phase.g[j] % 2 == 1);
            lin.set(j, self.phase.g[j] >> 1 == 1);
        }
        for j in 0..m {
            for k in (j + 1)..m {
                quad.set(j, k, self.phase.pair(j, k) ^ (ell.get(j) && ell.get(k)));
            }
        }
        f2::QuadraticPhase::new(quad, lin, ell).expect("strictly upper by construction")
    }

    pub fn norm2(&self) -> f64 {
        self.scale.norm_sqr() * 2f64.powi(self.dim() as i32)
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n2 = self.norm2();
        if n2 < 1e-300 {
            return Err(Error::Numeric("cannot normalize the zero state".into()));
        }
        self.scale /= n2.sqrt();
        Ok(())
    }

    pub fn amplitude(&self, x: &F2Vector) -> C {
        match self.support().coords(x) {
            Some(y) => self.scale * I_POW[self.phase.eval(&y) as usize],
            None => C::new(0.0, 0.0),
        }
    }

    pub fn to_dense(&self) -> Result<DenseState> {
        if self.n > dense::MAX_DENSE_QUBITS {
            return Err(Error::Resource {
                context: format!("densifying a {}-qubit stabilizer state", self.n),
                best_rank: None,
            });
        }
        let m = self.dim();
        let mut amps = vec![C::new(0.0, 0.0); 1usize << self.n];
        for bits in 0..1u64 << m {
            let y = F2Vector::from_u64(m, bits);
            let mut x = self.offset.clone();
            for i in y.ones() {
                x.xor_assign(&self.basis[i]);
            }
            amps[dense::index_of(&x)] = self.scale * I_POW[self.phase.eval(&y) as usize];
        }
        DenseState::from_amps(self.n, amps)
    }

    /// <self|psi> against a dense state, summing over the 2^m support points.
    pub fn overlap_with_dense(&self, psi: &DenseState) -> Result<C> {
        if psi.n() != self.n {
            return Err(Error::Dimension(format!(
                "overlap of a {}-qubit stabilizer state with a {}-qubit vector",
                self.n,
                psi.n()
            )));
        }
        let m = self.dim();
        let mut acc = C::new(0.0, 0.0);
        for bits in 0..1u64 << m {
            let y = F2Vector::from_u64(m, bits);
            let mut x = self.offset.clone();
            for i in y.ones() {
                x.xor_assign(&self.basis[i]);
            }
            let amp = self.scale * I_POW[self.phase.eval(&y) as usize];
            acc += amp.conj() * psi.amp(&x);
        }
        Ok(acc)
    }

    // Paired rewrites: every phase rewrite has a matching support update so
    // the represented state never changes.

    fn sub_sum(&mut self, i: usize, j: usize) {
        self.phase.substitute_sum(i, j);
        let row = self.basis[i].clone();
        self.basis[j].xor_assign(&row);
    }

    fn negate_var(&mut self, i: usize) {
        self.phase.negate_var(i);
        let row = self.basis[i].clone();
        self.offset.xor_assign(&row);
        self.drain_const();
    }

    fn swap_vars(&mut self, i: usize, j: usize) {
        self.phase.swap_vars(i, j);
        self.basis.swap(i, j);
    }

    fn pin_var(&mut self, i: usize, one: bool) {
        if one {
            self.negate_var(i);
        }
        self.phase.delete_var(i);
        self.basis.remove(i);
    }

    fn drain_const(&mut self) {
        if self.phase.konst != 0 {
            self.scale *= I_POW[self.phase.konst as usize];
            self.phase.konst = 0;
        }
    }

    /// Sum out variable i, whose basis row must be zero. Returns false when
    /// the state summed to zero.
    fn sum_free_var(&mut self, i: usize) -> bool {
        debug_assert!(self.basis[i].is_zero());
        let c = self.phase.g[i];
        let mask = self.phase.row_mask(i).remove_bit(i);
        self.phase.delete_var(i);
        self.basis.remove(i);
        if mask.is_zero() {
            match c {
                0 => self.scale *= 2.0,
                1 => self.scale *= C::new(1.0, 1.0),
                2 => {
                    self.scale = C::new(0.0, 0.0);
                    return false;
                }
                _ => self.scale *= C::new(1.0, -1.0),
            }
        } else if c.is_multiple_of(2) {
            self.scale *= 2.0;
            self.apply_parity_constraint(&mask, c == 2);
        } else {
            self.scale *= if c == 1 {
                C::new(1.0, 1.0)
            } else {
                C::new(1.0, -1.0)
            };
            self.phase.add_parity(&mask, 4 - c);
        }
        true
    }

    /// Keep only the part of the support where parity(mask.y) = c.
    fn apply_parity_constraint(&mut self, mask: &F2Vector, c: bool) {
        let pivot = mask.first_one().expect("constraint on an empty parity");
        for k in mask.ones() {
            if k != pivot {
                self.sub_sum(pivot, k);
            }
        }
        self.pin_var(pivot, c);
    }

    /// Remove linear dependencies among basis rows by zeroing one row per
    /// kernel vector and Gauss-summing the freed variable out.
    fn reduce_dependencies(&mut self) -> bool {
        loop {
            let m = self.basis.len();
            if m == 0 {
                return true;
            }
            let mut cols = F2Matrix::zeros(self.n, m);
            for (j, row) in self.basis.iter().enumerate() {
                for i in row.ones() {
                    cols.set(i, j, true);
                }
            }
            let (_, kernel) = f2::solve(&cols, &F2Vector::zeros(self.n))
                .expect("dimensions agree by construction");
            let Some(k) = kernel.first() else {
                return true;
            };
            let pivot = k.first_one().expect("kernel vectors are nonzero");
            for j in k.ones() {
                if j != pivot {
                    self.sub_sum(j, pivot);
                }
            }
            debug_assert!(self.basis[pivot].is_zero());
            if !self.sum_free_var(pivot) {
                return false;
            }
        }
    }

    /// Column q of the basis rows, as a mask over the support variables.
    fn col_mask(&self, q: usize) -> F2Vector {
        let mut mask = F2Vector::zeros(self.dim());
        for (k, row) in self.basis.iter().enumerate() {
            if row.get(q) {
                mask.set(k, true);
            }
        }
        mask
    }

    pub fn apply_gate(&mut self, gate: Gate) -> Result<()> {
        let n = self.n;
        let check = |q: usize| -> Result<()> {
            if q >= n {
                return Err(Error::Argument(format!(
                    "gate touches qubit {q} of an {n}-qubit state"
                )));
            }
            Ok(())
        };
        match gate {
            Gate::X(q) => {
                check(q)?;
                self.offset.flip(q);
            }
            Gate::Z(q) => {
                check(q)?;
                let mask = self.col_mask(q);
                self.phase.add_parity(&mask, 2);
                if self.offset.get(q) {
                    self.scale = -self.scale;
                }
            }
            Gate::S(q) => {
                check(q)?;
                let mask = self.col_mask(q);
                if self.offset.get(q) {
                    self.scale *= C::new(0.0, 1.0);
                    self.phase.add_parity(&mask, 3);
                } else {
                    self.phase.add_parity(&mask, 1);
                }
            }
            Gate::Sdg(q) => {
                check(q)?;
                let mask = self.col_mask(q);
                if self.offset.get(q) {
                    self.scale *= C::new(0.0, -1.0);
                    self.phase.add_parity(&mask, 1);
                } else {
                    self.phase.add_parity(&mask, 3);
                }
            }
            Gate::Cz(a, b) => {
                check(a)?;
                check(b)?;
                if a == b {
                    return Err(Error::Argument("CZ needs two distinct qubits".into()));
                }
                let ra = self.col_mask(a);
                let rb = self.col_mask(b);
                let (va, vb) = (self.offset.get(a), self.offset.get(b));
                self.phase.add_pair_products(&ra, &rb);
                if vb {
                    self.phase.add_parity(&ra, 2);
                }
                if va {
                    self.phase.add_parity(&rb, 2);
                }
                if va && vb {
                    self.scale = -self.scale;
                }
            }
            Gate::Cnot(c, t) => {
                check(c)?;
                check(t)?;
                if c == t {
                    return Err(Error::Argument("CNOT needs two distinct qubits".into()));
                }
                for row in &mut self.basis {
                    let b = row.get(c) ^ row.get(t);
                    row.set(t, b);
                }
                let b = self.offset.get(c) ^ self.offset.get(t);
                self.offset.set(t, b);
            }
            Gate::H(q) => {
                check(q)?;
                let col = self.col_mask(q);
                let vq = self.offset.get(q);
                self.scale *= FRAC_1_SQRT_2;
                for row in &mut self.basis {
                    row.set(q, false);
                }
                self.offset.set(q, false);
                let m = self.dim();
                self.phase.push_var(if vq { 2 } else { 0 });
                for k in col.ones() {
                    self.phase.toggle_pair(k, m);
                }
                self.basis.push(F2Vector::unit(self.n, q));
                if !self.reduce_dependencies() {
                    return Err(Error::Numeric(
                        "Hadamard produced the zero state; input was invalid".into(),
                    ));
                }
            }
            Gate::T(_) => {
                return Err(Error::Argument(
                    "T is not a stabilizer operation; use the gadgetized simulator".into(),
                ));
            }
        }
        // Keep the representation canonical so that equal states stay
        // byte-comparable after any gate sequence.
        self.canonicalize();
        Ok(())
    }

    pub fn apply_gates(&mut self, gates: &[Gate]) -> Result<()> {
        for &g in gates {
            self.apply_gate(g)?;
        }
        Ok(())
    }

    /// Project onto qubit q = bit without renormalizing; None when the branch
    /// has probability zero. The qubit stays in the register as a constant.
    pub fn restrict_qubit(&self, q: usize, bit: bool) -> Result<Option<StabilizerState>> {
        if q >= self.n {
            return Err(Error::Argument(format!(
                "postselecting qubit {q} of an {}-qubit state",
                self.n
            )));
        }
        let col = self.col_mask(q);
        let vq = self.offset.get(q);
        if col.is_zero() {
            return Ok(if vq == bit { Some(self.clone()) } else { None });
        }
        let mut out = self.clone();
        out.apply_parity_constraint(&col, bit ^ vq);
        Ok(Some(out))
    }

    /// Apply <bit| to qubit q: returns the scalar gamma >= 0 and the
    /// normalized (n-1)-qubit state with gamma * state = (I (x) <bit|) self,
    /// or None when the overlap vanishes.
    pub fn postselect(&self, q: usize, bit: bool) -> Result<Option<(f64, StabilizerState)>> {
        let Some(mut s) = self.measure_qubit(q, bit)? else {
            return Ok(None);
        };
        let gamma = s.norm2().sqrt();
        if gamma < 1e-300 {
            return Ok(None);
        }
        s.scale /= gamma;
        Ok(Some((gamma, s)))
    }

    /// Project qubit q onto `bit` and drop it from the register, without
    /// renormalizing.
    pub fn measure_qubit(&self, q: usize, bit: bool) -> Result<Option<StabilizerState>> {
        let Some(mut s) = self.restrict_qubit(q, bit)? else {
            return Ok(None);
        };
        for row in &s.basis {
            if row.get(q) {
                return Err(Error::Precondition(
                    "projected state still varies on the measured qubit".into(),
                ));
            }
        }
        debug_assert_eq!(s.offset.get(q), bit);
        for row in &mut s.basis {
            *row = row.remove_bit(q);
        }
        s.offset = s.offset.remove_bit(q);
        s.n -= 1;
        Ok(Some(s))
    }

    /// Probability of seeing `bit` on qubit q; one of 0, 1/2, 1 for a
    /// normalized state.
    pub fn measure_probability(&self, q: usize, bit: bool) -> Result<f64> {
        let n2 = self.norm2();
        Ok(match self.restrict_qubit(q, bit)? {
            Some(s) => s.norm2() / n2,
            None => 0.0,
        })
    }

    /// Exact <self|other> through a joint Gauss sum over the intersection of
    /// the supports. Floating point enters only through the two scales.
    pub fn inner_product(&self, other: &StabilizerState) -> Result<C> {
        Ok(self.scale.conj() * other.scale * self.inner_gauss(other)?.to_complex())
    }

    fn inner_gauss(&self, other: &StabilizerState) -> Result<GaussScalar> {
        if self.n != other.n {
            return Err(Error::Dimension(format!(
                "inner product of {}- and {}-qubit states",
                self.n, other.n
            )));
        }
        let s1 = self.support();
        let s2 = other.support();
        let Some(cap) = s1.intersect(&s2) else {
            return Ok(GaussScalar::Zero);
        };
        let d = cap.dim();
        // Affine coordinate map y = C z + d0 of the intersection into each
        // support's coordinates; cols[j] is the z-mask of variable y_j.
        let map = |s: &AffineSubspace, m: usize| -> (Vec<F2Vector>, F2Vector) {
            let d0 = s
                .coords(cap.offset())
                .expect("intersection offset lies in both supports");
            let dirs: Vec<F2Vector> = cap
                .basis()
                .iter()
                .map(|dir| {
                    let p = cap.offset().xor(dir);
                    s.coords(&p)
                        .expect("intersection direction stays inside")
                        .xor(&d0)
                })
                .collect();
            let cols = (0..m)
                .map(|j| {
                    let mut mask = F2Vector::zeros(d);
                    for (i, di) in dirs.iter().enumerate() {
                        if di.get(j) {
                            mask.set(i, true);
                        }
                    }
                    mask
                })
                .collect();
            (cols, d0)
        };
        let (c2, d2) = map(&s2, other.dim());
        let (c1, d1) = map(&s1, self.dim());
        let mut joint = PhasePoly::new(d);
        compose_phase(&mut joint, &other.phase, &c2, &d2, false);
        compose_phase(&mut joint, &self.phase, &c1, &d1, true);
        Ok(joint.gauss_sum())
    }

    /// Bring basis, offset, and phase coordinates to the canonical form:
    /// RREF rows, offset cleared at the pivots, phase rewritten in lockstep.
    pub fn canonicalize(&mut self) {
        let m = self.dim();
        let mut rank = 0;
        let mut pivots = Vec::new();
        for col in 0..self.n {
            let Some(p) = (rank..m).find(|&r| self.basis[r].get(col)) else {
                continue;
            };
            self.swap_vars(rank, p);
            for j in 0..m {
                if j != rank && self.basis[j].get(col) {
                    self.sub_sum(rank, j);
                }
            }
            pivots.push(col);
            rank += 1;
            if rank == m {
                break;
            }
        }
        for (row, &p) in pivots.iter().enumerate() {
            if self.offset.get(p) {
                self.negate_var(row);
            }
        }
    }

    /// Identity of the ray through this state; see [`RayKey`].
    pub fn ray_key(&self) -> RayKey {
        let mut s = self.clone();
        s.canonicalize();
        RayKey {
            basis: s.basis,
            offset: s.offset,
            g: s.phase.g,
            quad: s.phase.quad,
        }
    }

    /// Uniformly random stabilizer state (over rays), normalized.
    pub fn random<R: Rng>(n: usize, rng: &mut R) -> Self {
        // Number of canonical keys with support dimension m, as f64 weights.
        let weights: Vec<f64> = (0..=n)
            .map(|m| {
                let mut w = gaussian_binomial(n, m);
                w *= 2f64.powi((n - m) as i32);
                w *= 4f64.powi(m as i32);
                w *= 2f64.powi((m * m.saturating_sub(1) / 2) as i32);
                w
            })
            .collect();
        let total: f64 = weights.iter().sum();
        let mut pick = rng.gen::<f64>() * total;
        let mut m = n;
        for (mm, w) in weights.iter().enumerate() {
            if pick < *w {
                m = mm;
                break;
            }
            pick -= w;
        }
        // Uniform m-dimensional subspace: random full-rank rows, reduced.
        let mut rows: Vec<F2Vector>;
        loop {
            rows = (0..m)
                .map(|_| F2Vector::from_bits(&(0..n).map(|_| rng.gen()).collect::<Vec<_>>()))
                .collect();
            if F2Matrix::from_rows(rows.clone(), n).unwrap().rank() == m {
                break;
            }
        }
        let offset = F2Vector::from_bits(&(0..n).map(|_| rng.gen()).collect::<Vec<_>>());
        let support = AffineSubspace::new(n, rows, offset)
            .expect("rows checked full rank")
            .canonical();
        let mut phase = PhasePoly::new(m);
        for j in 0..m {
            phase.g[j] = rng.gen_range(0..4);
            for k in (j + 1)..m {
                phase.quad[j].set(k, rng.gen());
            }
        }
        StabilizerState {
            n,
            basis: support.basis().to_vec(),
            offset: support.offset().clone(),
            phase,
            scale: C::new(0.5f64.powi(m as i32).sqrt(), 0.0),
        }
    }

    #[cfg(test)]
    fn assert_valid(&self) {
        let m = self.basis.len();
        assert_eq!(self.phase.vars(), m);
        assert_eq!(self.offset.len(), self.n);
        for row in &self.basis {
            assert_eq!(row.len(), self.n);
        }
        for (j, row) in self.phase.quad.iter().enumerate() {
            assert_eq!(row.len(), m);
            for k in 0..=j.min(m.saturating_sub(1)) {
                assert!(
                    !row.get(k),
                    "quad row {j} has a bit at or below the diagonal"
                );
            }
        }
        assert_eq!(
            F2Matrix::from_rows(self.basis.clone(), self.n)
                .unwrap()
                .rank(),
            m,
            "dependent basis rows"
        );
        assert_eq!(self.phase.konst, 0);
    }
}

/// Accumulate t(C z + d) into `out`, negating all coefficients when asked.
/// Expansion of one linear term c.(P xor d): constant c when d is set, then
/// (+-c) times the parity; of one pair 2 y_j y_k: four bilinear pieces.
fn compose_phase(
    out: &mut PhasePoly,
    t: &PhasePoly,
    cols: &[F2Vector],
    dvec: &F2Vector,
    negate: bool,
) {
    debug_assert_eq!(cols.len(), t.vars());
    for (j, (&g, col)) in t.g.iter().zip(cols).enumerate() {
        let mut c = if negate { (4 - g) % 4 } else { g };
        if dvec.get(j) {
            out.konst = (out.konst + c) % 4;
            c = (4 - c) % 4;
        }
        out.add_parity(col, c);
    }
    for j in 0..t.vars() {
        for k in (j + 1)..t.vars() {
            if !t.pair(j, k) {
                continue;
            }
            // 2 y_j y_k is self-negating mod 4.
            out.add_pair_products(&cols[j], &cols[k]);
            if dvec.get(k) {
                out.add_parity(&cols[j], 2);
            }
            if dvec.get(j) {
                out.add_parity(&cols[k], 2);
            }
            if dvec.get(j) && dvec.get(k) {
                out.konst = (out.konst + 2) % 4;
            }
        }
    }
    out.konst %= 4;
}

fn gaussian_binomial(n: usize, m: usize) -> f64 {
    let mut acc = 1.0f64;
    for k in 0..m {
        acc *= (2f64.powi(n as i32 - k as i32) - 1.0) / (2f64.powi((m - k) as i32) - 1.0);
    }
    acc
}

/// Number of stabilizer states (rays) on n qubits: 2^n prod_{k=1..n} (2^k+1).
pub fn stabilizer_count(n: usize) -> BigUint {
    let mut acc = BigUint::from(1u32) << n;
    for k in 1..=n {
        acc *= (BigUint::from(1u32) << k) + 1u32;
    }
    acc
}

/// Number of full-support real quadratic-phase states: 2^{n(n+1)/2}.
pub fn quadphase_count(n: usize) -> BigUint {
    BigUint::from(1u32) << (n * (n + 1) / 2)
}

/// Which family a dictionary enumerates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DictKind {
    /// All stabilizer states.
    Stab,
    /// Full support, phases (-1)^{Q(x) + l.x} only.
    QuadPhase,
}

impl std::str::FromStr for DictKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stab" => Ok(DictKind::Stab),
            "quadphase" => Ok(DictKind::QuadPhase),
            other => Err(Error::Parse(format!(
                "unknown dictionary kind {other:?}; expected stab or quadphase"
            ))),
        }
    }
}

impl std::fmt::Display for DictKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DictKind::Stab => "stab",
            DictKind::QuadPhase => "quadphase",
        })
    }
}

/// A complete, deterministically ordered list of dictionary states.
pub struct Dictionary {
    n: usize,
    kind: DictKind,
    states: Vec<StabilizerState>,
}

const DICT_MAX_STAB: usize = 4;
const DICT_MAX_QUADPHASE: usize = 5;

impl Dictionary {
    pub fn enumerate(n: usize, kind: DictKind) -> Result<Dictionary> {
        match kind {
            DictKind::Stab => {
                if n > DICT_MAX_STAB {
                    return Err(Error::Resource {
                        context: format!(
                            "full stabilizer dictionary for n={n}; the cap is n={DICT_MAX_STAB}"
                        ),
                        best_rank: None,
                    });
                }
                Ok(Dictionary {
                    n,
                    kind,
                    states: enumerate_stab(n),
                })
            }
            DictKind::QuadPhase => {
                if n > DICT_MAX_QUADPHASE {
                    return Err(Error::Resource {
                        context: format!(
                            "quadratic-phase dictionary for n={n}; the cap is n={DICT_MAX_QUADPHASE}"
                        ),
                        best_rank: None,
                    });
                }
                Ok(Dictionary {
                    n,
                    kind,
                    states: enumerate_quadphase(n),
                })
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> DictKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[StabilizerState] {
        &self.states
    }

    pub fn into_states(self) -> Vec<StabilizerState> {
        self.states
    }

    /// Versioned text dump; see `parse_dict_line` for the line grammar.
    pub fn dump(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(
            f,
            "stabdict/1 n={} kind={} count={}",
            self.n,
            self.kind,
            self.states.len()
        )?;
        for s in &self.states {
            writeln!(f, "{}", format_dict_line(s))?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Dictionary> {
        let f = std::io::BufReader::new(std::fs::File::open(path)?);
        let mut lines = f.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty dictionary file".into()))??;
        let mut n = None;
        let mut kind = None;
        let mut count = None;
        let mut parts = header.split_whitespace();
        if parts.next() != Some("stabdict/1") {
            return Err(Error::Parse(format!(
                "unrecognized dictionary header {header:?}"
            )));
        }
        for p in parts {
            if let Some(v) = p.strip_prefix("n=") {
                n = Some(
                    v.parse::<usize>()
                        .map_err(|e| Error::Parse(e.to_string()))?,
                );
            } else if let Some(v) = p.strip_prefix("kind=") {
                kind = Some(v.parse::<DictKind>()?);
            } else if let Some(v) = p.strip_prefix("count=") {
                count = Some(
                    v.parse::<usize>()
                        .map_err(|e| Error::Parse(e.to_string()))?,
                );
            }
        }
        let n = n.ok_or_else(|| Error::Parse("dictionary header lacks n=".into()))?;
        let kind = kind.ok_or_else(|| Error::Parse("dictionary header lacks kind=".into()))?;
        let count = count.ok_or_else(|| Error::Parse("dictionary header lacks count=".into()))?;
        let mut states = Vec::with_capacity(count);
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            states.push(parse_dict_line(n, &line)?);
        }
        if states.len() != count {
            return Err(Error::Parse(format!(
                "dictionary holds {} states but the header promised {count}",
                states.len()
            )));
        }
        Ok(Dictionary { n, kind, states })
    }
}

/// One state per line: basis rows | offset | Q rows (lin on the diagonal) |
/// ell | scale. Hex fields use the crate-wide bit packing; "-" marks empty.
fn format_dict_line(s: &StabilizerState) -> String {
    let phase = s.phase();
    let m = s.dim();
    let rows = |v: Vec<String>| {
        if v.is_empty() {
            "-".to_string()
        } else {
            v.join(",")
        }
    };
    let basis = rows(s.basis.iter().map(|r| r.to_hex()).collect());
    let qrows = rows(
        (0..m)
            .map(|j| {
                let mut row = F2Vector::zeros(m);
                for k in (j + 1)..m {
                    row.set(k, phase.quad().get(j, k));
                }
                row.set(j, phase.lin().get(j));
                row.to_hex()
            })
            .collect(),
    );
    format!(
        "{}|{}|{}|{}|{:.17e} {:.17e}",
        basis,
        s.offset.to_hex(),
        qrows,
        phase.ell().to_hex(),
        s.scale.re,
        s.scale.im
    )
}

fn parse_dict_line(n: usize, line: &str) -> Result<StabilizerState> {
    let fields: Vec<&str> = line.trim().split('|').collect();
    if fields.len() != 5 {
        return Err(Error::Parse(format!(
            "dictionary line has {} fields, expected 5",
            fields.len()
        )));
    }
    let parse_rows = |field: &str, len: usize| -> Result<Vec<F2Vector>> {
        if field == "-" {
            return Ok(Vec::new());
        }
        field
            .split(',')
            .map(|h| F2Vector::from_hex(len, h))
            .collect()
    };
    let basis = parse_rows(fields[0], n)?;
    let m = basis.len();
    let offset = F2Vector::from_hex(n, fields[1])?;
    let qrows = parse_rows(fields[2], m)?;
    if qrows.len() != m {
        return Err(Error::Parse(format!(
            "{} phase rows for a dimension-{m} support",
            qrows.len()
        )));
    }
    let ell = if m == 0 {
        F2Vector::zeros(0)
    } else {
        F2Vector::from_hex(m, fields[3])?
    };
    let mut scale_parts = fields[4].split_whitespace();
    let re: f64 = scale_parts
        .next()
        .ok_or_else(|| Error::Parse("missing scale".into()))?
        .parse()
        .map_err(|e| Error::Parse(format!("bad scale: {e}")))?;
    let im: f64 = scale_parts
        .next()
        .ok_or_else(|| Error::Parse("missing scale imaginary part".into()))?
        .parse()
        .map_err(|e| Error::Parse(format!("bad scale: {e}")))?;
    let mut quad = F2Matrix::zeros(m, m);
    let mut lin = F2Vector::zeros(m);
    for (j, row) in qrows.iter().enumerate() {
        lin.set(j, row.get(j));
        for k in 0..m {
            if k > j {
                quad.set(j, k, row.get(k));
            } else if k < j && row.get(k) {
                return Err(Error::Parse(
                    "phase row has a bit below the diagonal".into(),
                ));
            }
        }
    }
    let support = AffineSubspace::new(n, basis, offset)?;
    let phase = f2::QuadraticPhase::new(quad, lin, ell)?;
    StabilizerState::from_parts(support, &phase, C::new(re, im))
}

fn combinations(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(m);
    fn rec(start: usize, n: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for c in start..=n - left {
            cur.push(c);
            rec(c + 1, n, left - 1, cur, out);
            cur.pop();
        }
    }
    if m <= n {
        rec(0, n, m, &mut cur, &mut out);
    }
    out
}

fn enumerate_stab(n: usize) -> Vec<StabilizerState> {
    let mut out = Vec::new();
    for m in 0..=n {
        for pivots in combinations(n, m) {
            let in_pivots = |c: usize| pivots.binary_search(&c).is_ok();
            // Free basis slots: (row, col) with col beyond the row's pivot
            // and not itself a pivot, row-major.
            let mut slots = Vec::new();
            for (i, &p) in pivots.iter().enumerate() {
                for c in (p + 1)..n {
                    if !in_pivots(c) {
                        slots.push((i, c));
                    }
                }
            }
            let free_cols: Vec<usize> = (0..n).filter(|&c| !in_pivots(c)).collect();
            for bits in 0..1u64 << slots.len() {
                let mut rows: Vec<F2Vector> =
                    pivots.iter().map(|&p| F2Vector::unit(n, p)).collect();
                for (b, &(i, c)) in slots.iter().enumerate() {
                    if bits >> b & 1 == 1 {
                        rows[i].set(c, true);
                    }
                }
                for off_bits in 0..1u64 << free_cols.len() {
                    let mut offset = F2Vector::zeros(n);
                    for (b, &c) in free_cols.iter().enumerate() {
                        if off_bits >> b & 1 == 1 {
                            offset.set(c, true);
                        }
                    }
                    for g_code in 0..1u64 << (2 * m) {
                        let g: Vec<u8> = (0..m).map(|j| (g_code >> (2 * j) & 3) as u8).collect();
                        let npairs = m * m.saturating_sub(1) / 2;
                        for q_code in 0..1u64 << npairs {
                            let mut phase = PhasePoly::new(m);
                            phase.g.copy_from_slice(&g);
                            let mut b = 0;
                            for j in 0..m {
                                for k in (j + 1)..m {
                                    if q_code >> b & 1 == 1 {
                                        phase.quad[j].set(k, true);
                                    }
                                    b += 1;
                                }
                            }
                            out.push(StabilizerState {
                                n,
                                basis: rows.clone(),
                                offset: offset.clone(),
                                phase,
                                scale: C::new(0.5f64.powi(m as i32).sqrt(), 0.0),
                            });
                        }
                    }
                }
            }
        }
    }
    out
}

fn enumerate_quadphase(n: usize) -> Vec<StabilizerState> {
    let mut out = Vec::new();
    let basis: Vec<F2Vector> = (0..n).map(|i| F2Vector::unit(n, i)).collect();
    let npairs = n * n.saturating_sub(1) / 2;
    for lin_bits in 0..1u64 << n {
        for q_code in 0..1u64 << npairs {
            let mut phase = PhasePoly::new(n);
            for j in 0..n {
                if lin_bits >> j & 1 == 1 {
                    phase.g[j] = 2;
                }
            }
            let mut b = 0;
            for j in 0..n {
                for k in (j + 1)..n {
                    if q_code >> b & 1 == 1 {
                        phase.quad[j].set(k, true);
                    }
                    b += 1;
                }
            }
            out.push(StabilizerState {
                n,
                basis: basis.clone(),
                offset: F2Vector::zeros(n),
                phase,
                scale: C::new(0.5f64.powi(n as i32).sqrt(), 0.0),
            });
        }
    }
    out
}
