//! Closed-form tail bounds, moment formulas, and design gate-count
//! accounting, with Monte Carlo cross-checks wherever the distribution can
//! actually be sampled.
//!
//! Everything numeric is evaluated in log space so that the reports stay
//! meaningful far beyond f64 range: a `BoundReport` always carries
//! `ln_value`, and `value` only when the exponential fits. Logarithms
//! written as "log" in the source formulas never come with a base; the
//! [`LogBase`] policy makes that choice explicit and switchable, defaulting
//! to base 2 to match the power-of-two dimension counting used everywhere
//! else. Logarithms written "ln" are always natural.

use crate::dense;
use crate::error::{Error, Result};
use crate::linalg;
use crate::stab::{DictKind, Dictionary};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

type C = Complex64;

const LN_2: f64 = std::f64::consts::LN_2;
/// exp() overflows f64 just above this.
const MAX_LN: f64 = 709.0;

/// Base used for every logarithm the source formulas leave unspecified.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    #[default]
    Two,
    Natural,
}

impl LogBase {
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Two => x.log2(),
            LogBase::Natural => x.ln(),
        }
    }
}

impl std::str::FromStr for LogBase {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two" | "2" => Ok(LogBase::Two),
            "natural" | "e" => Ok(LogBase::Natural),
            other => Err(Error::Parse(format!(
                "unknown log base {other:?}; expected two or natural"
            ))),
        }
    }
}

/// The four tunable constants the bound formulas depend on. Only `c_abs`
/// comes with a stated value (at least 1/1000); the rest default to 1.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Constants {
    /// Linear coefficient in the T-count budget c * n * 2^(n/2).
    pub c: f64,
    /// Absolute constant in the final rank lower bound.
    #[serde(rename = "C")]
    pub c_abs: f64,
    /// Prefactor of the T-count design-size formula.
    #[serde(rename = "C1")]
    pub c1: f64,
    /// Prefactor of the random-circuit design-size formula.
    #[serde(rename = "C2")]
    pub c2: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Constants {
            c: 1.0,
            c_abs: 1e-3,
            c1: 1.0,
            c2: 1.0,
        }
    }
}

/// One evaluated inequality: inputs echoed verbatim, value in log space,
/// and the direction the number certifies.
#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub name: String,
    pub inputs: BTreeMap<String, f64>,
    pub ln_value: f64,
    /// exp(ln_value) when that fits in f64.
    pub value: Option<f64>,
    pub certifies: String,
    pub flags: Vec<String>,
}

impl BoundReport {
    fn from_ln(name: &str, inputs: BTreeMap<String, f64>, ln_value: f64, certifies: &str) -> Self {
        let mut flags = Vec::new();
        let value = if ln_value.is_nan() {
            flags.push("nan: formula undefined at these inputs".to_string());
            None
        } else if ln_value > MAX_LN {
            flags.push("overflow: value exceeds f64, see ln_value".to_string());
            None
        } else {
            let v = ln_value.exp();
            if v == 0.0 {
                flags.push("underflow: value rounds to zero, see ln_value".to_string());
            }
            Some(v)
        };
        BoundReport {
            name: name.to_string(),
            inputs,
            ln_value,
            value,
            certifies: certifies.to_string(),
            flags,
        }
    }
}

fn inputs(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}

/// log(e^a + e^b), tolerating -inf in either slot.
fn lse(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Exponent of the Haar tail bound 2 e^(0.54 n^2 M - (1-d^2-M/2^n)^2 2^n / (100 pi)).
///
/// M may be fractional; the existence argument plugs in a real-valued rank.
pub fn haar_tail_exponent(n: u32, m_rank: f64, delta: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::Argument(format!("delta {delta} outside [0, 1)")));
    }
    if m_rank < 0.0 || !m_rank.is_finite() {
        return Err(Error::Argument(format!(
            "rank {m_rank} must be finite and nonnegative"
        )));
    }
    let pow = 2f64.powi(n as i32); // inf for n > 1023 is fine below
    let ratio = if pow.is_infinite() { 0.0 } else { m_rank / pow };
    let margin = 1.0 - delta * delta - ratio;
    if margin <= 0.0 {
        return Err(Error::Precondition(format!(
            "need 1 - delta^2 - M/2^n > 0, got {margin}"
        )));
    }
    let gain = 0.54 * (n as f64) * (n as f64) * m_rank;
    let loss = margin * margin * pow / (100.0 * std::f64::consts::PI);
    Ok(gain - loss)
}

/// Tail bound on the probability that a Haar state admits an approximate
/// stabilizer decomposition of rank at most M.
pub fn haar_tail(n: u32, m_rank: f64, delta: f64) -> Result<BoundReport> {
    let expo = haar_tail_exponent(n, m_rank, delta)?;
    Ok(BoundReport::from_ln(
        "haar-tail",
        inputs(&[("n", n as f64), ("M", m_rank), ("delta", delta)]),
        LN_2 + expo,
        "P[chi_delta(psi) <= M] <= value for Haar-random psi",
    ))
}

/// The inline estimate behind the existence argument: plugging the
/// real-valued rank M = (1-d^2)^2 2^n / (1000 n^2) into the tail exponent
/// lands at or below -0.0026 (1-d^2)^2 2^n.
#[derive(Clone, Debug, Serialize)]
pub struct InlineEstimate {
    pub n: u32,
    pub delta: f64,
    pub m_real: f64,
    pub exponent: f64,
    pub rhs: f64,
    pub holds: bool,
}

pub fn haar_inline_estimate(n: u32, delta: f64) -> Result<InlineEstimate> {
    if n == 0 || n > 1020 {
        return Err(Error::Argument(format!(
            "inline estimate needs 1 <= n <= 1020 for direct f64 arithmetic, got {n}"
        )));
    }
    let q = 1.0 - delta * delta;
    let pow = 2f64.powi(n as i32);
    let m_real = q * q * pow / (1000.0 * (n as f64) * (n as f64));
    let exponent = haar_tail_exponent(n, m_real, delta)?;
    let rhs = -0.0026 * q * q * pow;
    Ok(InlineEstimate {
        n,
        delta,
        m_real,
        exponent,
        rhs,
        holds: exponent <= rhs,
    })
}

/// Existence threshold: past n0, a Haar state fails to be M(n)-approximable
/// with positive probability, so a hard state of that rank exists.
#[derive(Clone, Debug, Serialize)]
pub struct HaarThreshold {
    pub delta: f64,
    pub base: LogBase,
    pub n0: u32,
}

impl HaarThreshold {
    /// The real-valued rank the tail is evaluated at.
    pub fn rank_real(&self, n: u32) -> f64 {
        let q = 1.0 - self.delta * self.delta;
        q * q * 2f64.powi(n as i32) / (1000.0 * (n as f64) * (n as f64))
    }

    /// The integer rank the argument guarantees (a state with chi_delta at
    /// least this exists); infinite past f64 range.
    pub fn guaranteed_rank(&self, n: u32) -> f64 {
        self.rank_real(n).ceil().max(1.0)
    }

    /// Tail exponent at rank_real(n), in a factored form that never hits
    /// inf - inf: exponent = kappa * 2^n with kappa depending only on
    /// (delta, n) through the vanishing ratio M/2^n.
    pub fn tail_exponent(&self, n: u32) -> f64 {
        let q = 1.0 - self.delta * self.delta;
        let ratio = q * q / (1000.0 * (n as f64) * (n as f64));
        let kappa =
            0.54 * q * q / 1000.0 - (q - ratio) * (q - ratio) / (100.0 * std::f64::consts::PI);
        kappa * 2f64.powi(n as i32)
    }

    pub fn tail_at(&self, n: u32) -> BoundReport {
        BoundReport::from_ln(
            "haar-tail-at-threshold-rank",
            inputs(&[
                ("n", n as f64),
                ("delta", self.delta),
                ("M_real", self.rank_real(n)),
            ]),
            LN_2 + self.tail_exponent(n),
            "P[chi_delta(psi) <= M(n)] <= value < 1 for Haar-random psi",
        )
    }

    /// The tail stays below 1 on all of [n0, n_max].
    pub fn verified_through(&self, n_max: u32) -> bool {
        (self.n0..=n_max).all(|n| LN_2 + self.tail_exponent(n) < 0.0)
    }
}

pub fn haar_exists_threshold(delta: f64, base: LogBase) -> Result<HaarThreshold> {
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::Argument(format!("delta {delta} outside [0, 1)")));
    }
    let q = 1.0 - delta * delta;
    let n0 = (2.0 * base.log(1.0 / q) + 9.0).ceil() as u32;
    let th = HaarThreshold { delta, base, n0 };
    // The arithmetic of the existence argument, reproduced: below 1 at the
    // threshold itself and (monotonically) beyond.
    if !th.verified_through(n0 + 64) {
        return Err(Error::Numeric(format!(
            "tail bound not below 1 at the claimed threshold n0 = {n0}, delta = {delta}"
        )));
    }
    Ok(th)
}

/// The full lower-bound pipeline: given a T-state budget m, pick the
/// largest n with c n 2^(n/2) <= m and report the certified rank bound
/// C (1 - (delta + 4^-n)^2)^2 2^n / n^2 together with the two bracketing
/// inequalities the choice of n satisfies.
#[derive(Clone, Debug, Serialize)]
pub struct MainBound {
    pub m: u64,
    pub delta: f64,
    pub n: u32,
    pub report: BoundReport,
    /// m < sqrt(2) c (n+1) 2^(n/2), i.e. n was maximal.
    pub upper_bracket_holds: bool,
    /// 2^n > m / (sqrt(2) c (2 log m + 1)).
    pub lower_bracket_holds: bool,
}

pub fn main_lower_bound(
    m: u64,
    delta: f64,
    consts: &Constants,
    base: LogBase,
) -> Result<MainBound> {
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::Argument(format!("delta {delta} outside [0, 1)")));
    }
    if consts.c <= 0.0 || consts.c_abs <= 0.0 {
        return Err(Error::Argument("constants c and C must be positive".into()));
    }
    let ln_m = (m as f64).ln();
    let fits = |n: u32| consts.c.ln() + (n as f64).ln() + n as f64 / 2.0 * LN_2 <= ln_m;
    if m == 0 || !fits(1) {
        return Err(Error::Argument(format!(
            "no n >= 1 satisfies c n 2^(n/2) <= m at m = {m}, c = {}",
            consts.c
        )));
    }
    let mut n = 1u32;
    while fits(n + 1) {
        n += 1;
    }

    let shift = (-(n as f64) * 2.0 * LN_2).exp(); // 4^-n
    let x = delta + shift;
    if x >= 1.0 {
        return Err(Error::Precondition(format!(
            "delta + 4^-n = {x} must stay below 1"
        )));
    }
    let ln_bound =
        consts.c_abs.ln() + 2.0 * (1.0 - x * x).ln() + n as f64 * LN_2 - 2.0 * (n as f64).ln();
    let report = BoundReport::from_ln(
        "main-lower-bound",
        inputs(&[
            ("m", m as f64),
            ("delta", delta),
            ("c", consts.c),
            ("C", consts.c_abs),
            ("n", n as f64),
        ]),
        ln_bound,
        "chi_delta(T tensor m) >= value",
    );

    let sqrt2c = std::f64::consts::SQRT_2 * consts.c;
    let upper = (m as f64) < sqrt2c * (n as f64 + 1.0) * 2f64.powf(n as f64 / 2.0);
    let lower = 2f64.powi(n as i32) > m as f64 / (sqrt2c * (2.0 * base.log(m as f64) + 1.0));
    Ok(MainBound {
        m,
        delta,
        n,
        report,
        upper_bracket_holds: upper,
        lower_bracket_holds: lower,
    })
}

fn tdesign_tail_ln(n: u32, m_rank: f64, t: f64, delta: f64, ln_eps: Option<f64>) -> f64 {
    // ln of e^(0.54 n^2 M) (((M+t-1)/(2^n+t-1))^t + eps) / (1-d^2)^t.
    let ln_dim_term = lse((n as f64) * LN_2, (t - 1.0).ln()); // ln(2^n + t - 1)
    let ln_ratio_pow = t * ((m_rank + t - 1.0).ln() - ln_dim_term);
    let ln_mid = match ln_eps {
        Some(le) => lse(ln_ratio_pow, le),
        None => ln_ratio_pow,
    };
    0.54 * (n as f64) * (n as f64) * m_rank + ln_mid - t * (1.0 - delta * delta).ln()
}

/// Tail bound on the same rank event under any distribution matching t Haar
/// moments up to additive error epsilon.
pub fn tdesign_tail(n: u32, m_rank: f64, t: f64, delta: f64, epsilon: f64) -> Result<BoundReport> {
    if t < 1.0 {
        return Err(Error::Argument(format!(
            "moment order t = {t} must be >= 1"
        )));
    }
    if epsilon < 0.0 {
        return Err(Error::Argument(format!("epsilon {epsilon} must be >= 0")));
    }
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::Argument(format!("delta {delta} outside [0, 1)")));
    }
    if m_rank < 1.0 {
        return Err(Error::Argument(format!("rank {m_rank} must be >= 1")));
    }
    let ln_eps = if epsilon > 0.0 {
        Some(epsilon.ln())
    } else {
        None
    };
    let ln_value = tdesign_tail_ln(n, m_rank, t, delta, ln_eps);
    Ok(BoundReport::from_ln(
        "t-design-tail",
        inputs(&[
            ("n", n as f64),
            ("M", m_rank),
            ("t", t),
            ("delta", delta),
            ("epsilon", epsilon),
        ]),
        ln_value,
        "P[chi_delta(psi) <= M] <= value for psi drawn from any epsilon-approximate t-design",
    ))
}

/// First n at which the t-design tail with the polynomial parameter choice
/// M = n^d, t = n^(d+1), eps = e^(-n^(d+2)) drops below 1, plus how far the
/// scan confirmed it stays there.
#[derive(Clone, Debug, Serialize)]
pub struct PolyDesignThreshold {
    pub d: u32,
    pub delta: f64,
    pub n0: u32,
    pub checked_to: u32,
}

pub fn tdesign_poly_threshold(d: u32, delta: f64, n_max: u32) -> Result<PolyDesignThreshold> {
    if d == 0 {
        return Err(Error::Argument("degree d must be >= 1".into()));
    }
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::Argument(format!("delta {delta} outside [0, 1)")));
    }
    let ln_tail = |n: u32| {
        let nf = n as f64;
        let m = nf.powi(d as i32);
        let t = nf.powi(d as i32 + 1);
        let ln_eps = -nf.powi(d as i32 + 2);
        tdesign_tail_ln(n, m, t, delta, Some(ln_eps))
    };
    let n0 = (2..=n_max)
        .find(|&n| ln_tail(n) < 0.0)
        .ok_or_else(|| Error::Numeric(format!("tail never drops below 1 up to n = {n_max}")))?;
    if let Some(bad) = (n0..=n_max).find(|&n| ln_tail(n) >= 0.0) {
        return Err(Error::Numeric(format!(
            "tail re-crosses 1 at n = {bad} after first dropping below at {n0}"
        )));
    }
    Ok(PolyDesignThreshold {
        d,
        delta,
        n0,
        checked_to: n_max,
    })
}

/// Exact t-th Haar moment of the squared overlap mass a rank-M projector
/// captures: prod_{j=0}^{t-1} (M+j)/(2^n+j).
pub fn haar_moment(n: u32, m_rank: u64, t: u32) -> Result<Ratio<BigInt>> {
    if n > 4096 {
        return Err(Error::Argument(format!(
            "exact rational moments capped at n = 4096, got {n}"
        )));
    }
    if t == 0 {
        return Err(Error::Argument("moment order t must be >= 1".into()));
    }
    let dim = BigInt::one() << (n as usize);
    let m = BigInt::from(m_rank);
    if m_rank == 0 || m > dim {
        return Err(Error::Argument(format!(
            "projector rank must satisfy 1 <= M <= 2^n, got {m_rank}"
        )));
    }
    let mut acc = Ratio::one();
    for j in 0..t {
        acc *= Ratio::new(&m + j, &dim + j);
    }
    Ok(acc)
}

pub fn haar_moment_f64(n: u32, m_rank: u64, t: u32) -> Result<f64> {
    haar_moment(n, m_rank, t)?
        .to_f64()
        .ok_or_else(|| Error::Numeric("moment does not fit in f64".into()))
}

/// Orthonormal basis of the span of the lexicographically first stabilizer
/// states that grow the span to exactly `m_rank` dimensions.
fn greedy_stab_basis(n: usize, m_rank: usize) -> Result<Vec<Vec<C>>> {
    let dict = Dictionary::enumerate(n, DictKind::Stab)?;
    let mut basis: Vec<Vec<C>> = Vec::new();
    for s in dict.states() {
        if basis.len() == m_rank {
            break;
        }
        let mut v = s.to_dense()?.amps().to_vec();
        for b in &basis {
            let z = linalg::dot(b, &v);
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= z * bi;
            }
        }
        let r = linalg::norm(&v);
        if r > 1e-6 {
            for x in v.iter_mut() {
                *x /= r;
            }
            basis.push(v);
        }
    }
    if basis.len() < m_rank {
        return Err(Error::Argument(format!(
            "cannot build a rank-{m_rank} projector in dimension 2^{n}"
        )));
    }
    Ok(basis)
}

fn proj_norm2(basis: &[Vec<C>], psi: &[C]) -> f64 {
    basis.iter().map(|b| linalg::dot(b, psi).norm_sqr()).sum()
}

/// Monte Carlo check of one exact moment.
#[derive(Clone, Debug, Serialize)]
pub struct MomentCheck {
    pub n: usize,
    pub m_rank: u64,
    pub t: u32,
    pub samples: u64,
    pub exact: f64,
    pub estimate: f64,
    pub std_error: f64,
    pub sigmas: f64,
    pub within_four_se: bool,
}

/// Estimate E ||P psi||^(2t) over Haar samples against the closed form,
/// using a projector spanned by stabilizer states. Sample i is generated
/// from (seed, i) alone, so the estimate is independent of thread count.
pub fn haar_moment_mc(
    n: usize,
    m_rank: u64,
    t: u32,
    samples: u64,
    seed: u64,
) -> Result<MomentCheck> {
    if samples < 2 {
        return Err(Error::Argument("need at least 2 samples".into()));
    }
    let exact = haar_moment_f64(n as u32, m_rank, t)?;
    let basis = greedy_stab_basis(n, m_rank as usize)?;
    let vals = (0..samples)
        .into_par_iter()
        .map(|i| {
            let psi = dense::haar_state(n, seed, i)?;
            Ok(proj_norm2(&basis, psi.amps()).powi(t as i32))
        })
        .collect::<Result<Vec<f64>>>()?;
    let mean = vals.iter().sum::<f64>() / samples as f64;
    let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (samples - 1) as f64;
    let se = (var / samples as f64).sqrt();
    let sigmas = if se > 0.0 {
        (mean - exact).abs() / se
    } else if mean == exact {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(MomentCheck {
        n,
        m_rank,
        t,
        samples,
        exact,
        estimate: mean,
        std_error: se,
        sigmas,
        within_four_se: sigmas <= 4.0,
    })
}

/// Sampled consistency check of the t-design tail. Haar sampling is an
/// exact t-design for every t, so the observed capture fraction must sit
/// below both the tail report and the bare Markov bound it derives from.
#[derive(Clone, Debug, Serialize)]
pub struct DesignTailCheck {
    pub n: usize,
    pub t: u32,
    pub delta: f64,
    pub subset_size: usize,
    pub span_rank: usize,
    pub samples: u64,
    pub fraction: f64,
    pub std_error: f64,
    pub tail_value: f64,
    pub markov_bound: f64,
    pub within_tail: bool,
    pub within_markov: bool,
    pub passed: bool,
}

pub fn tdesign_tail_mc(
    n: usize,
    t: u32,
    delta: f64,
    subset_size: usize,
    samples: u64,
    seed: u64,
) -> Result<DesignTailCheck> {
    if samples < 2 {
        return Err(Error::Argument("need at least 2 samples".into()));
    }
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::Argument(format!("delta {delta} outside [0, 1)")));
    }
    let dict = Dictionary::enumerate(n, DictKind::Stab)?;
    if subset_size == 0 || subset_size > dict.len() {
        return Err(Error::Argument(format!(
            "subset size {subset_size} outside 1..={}",
            dict.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picks = rand::seq::index::sample(&mut rng, dict.len(), subset_size).into_vec();
    picks.sort_unstable();
    let dense_vecs = picks
        .iter()
        .map(|&i| Ok(dict.states()[i].to_dense()?.amps().to_vec()))
        .collect::<Result<Vec<_>>>()?;
    let basis = linalg::orthonormalize(&dense_vecs, 1e-9);
    let span_rank = basis.len();

    let threshold = 1.0 - delta * delta;
    let hits = (0..samples)
        .into_par_iter()
        .map(|i| {
            let psi = dense::haar_state(n, seed.wrapping_add(1), i)?;
            Ok(u64::from(proj_norm2(&basis, psi.amps()) >= threshold))
        })
        .collect::<Result<Vec<u64>>>()?;
    let fraction = hits.iter().sum::<u64>() as f64 / samples as f64;
    let se = (fraction * (1.0 - fraction) / samples as f64)
        .sqrt()
        .max(1.0 / samples as f64);

    let tail = tdesign_tail(n as u32, span_rank as f64, t as f64, delta, 0.0)?;
    let tail_value = tail.value.unwrap_or(f64::INFINITY).min(1.0);
    let markov = haar_moment_f64(n as u32, span_rank as u64, t)? / threshold.powi(t as i32);
    let within_tail = fraction <= tail_value + 4.0 * se;
    let within_markov = fraction <= markov + 4.0 * se;
    Ok(DesignTailCheck {
        n,
        t,
        delta,
        subset_size,
        span_rank,
        samples,
        fraction,
        std_error: se,
        tail_value,
        markov_bound: markov,
        within_tail,
        within_markov,
        passed: within_tail && within_markov,
    })
}

/// The four gate-count formulas in the design size discussion, evaluated
/// together so routes can be compared under one set of constants.
#[derive(Clone, Debug, Serialize)]
pub struct DesignFormulas {
    pub reports: Vec<BoundReport>,
    pub degenerate_t: bool,
}

pub fn design_gate_formulas(
    n: u64,
    t: u64,
    epsilon: f64,
    d: u32,
    consts: &Constants,
    base: LogBase,
) -> Result<DesignFormulas> {
    if n == 0 || t == 0 {
        return Err(Error::Argument("n and t must be >= 1".into()));
    }
    if !(0.0..=1.0).contains(&epsilon) || epsilon == 0.0 {
        return Err(Error::Argument(format!("epsilon {epsilon} outside (0, 1]")));
    }
    let nf = n as f64;
    let tf = t as f64;
    let log_inv_eps = base.log(1.0 / epsilon);
    let degenerate_t = t == 1;
    let mut reports = Vec::new();

    // C1 log^2(t) (t^4 + t log(1/eps)): T-count of an epsilon-approximate
    // t-design.
    let ln_f1 = if degenerate_t {
        f64::NEG_INFINITY
    } else {
        consts.c1.ln() + 2.0 * base.log(tf).ln() + lse(4.0 * tf.ln(), tf.ln() + log_inv_eps.ln())
    };
    let mut r1 = BoundReport::from_ln(
        "design-t-count",
        inputs(&[("t", tf), ("epsilon", epsilon), ("C1", consts.c1)]),
        ln_f1,
        "some epsilon-approximate t-design uses at most value T gates",
    );
    if degenerate_t {
        r1.flags.push("degenerate: log(t) = 0 at t = 1".to_string());
    }
    reports.push(r1);

    // C2 n ln^5(t) t^(4 + 3/sqrt(log t)) (2 n t + log(1/eps)): total size of
    // a random-circuit design.
    let ln_f2 = if degenerate_t {
        f64::NEG_INFINITY
    } else {
        consts.c2.ln()
            + nf.ln()
            + 5.0 * tf.ln().ln()
            + (4.0 + 3.0 / base.log(tf).sqrt()) * tf.ln()
            + (2.0 * nf * tf + log_inv_eps).ln()
    };
    let mut r2 = BoundReport::from_ln(
        "design-circuit-size",
        inputs(&[
            ("n", nf),
            ("t", tf),
            ("epsilon", epsilon),
            ("C2", consts.c2),
        ]),
        ln_f2,
        "some epsilon-approximate t-design uses at most value gates",
    );
    if degenerate_t {
        r2.flags.push("degenerate: log(t) = 0 at t = 1".to_string());
    }
    reports.push(r2);

    // C2 log^5(n) n^(3 + 5d + 3 sqrt(d+1)/sqrt(log n)): size of the circuit
    // whose output state the design route certifies to have rank >= n^d.
    let ln_f3 = if n == 1 {
        f64::NEG_INFINITY
    } else {
        consts.c2.ln()
            + 5.0 * base.log(nf).ln()
            + (3.0 + 5.0 * d as f64 + 3.0 * ((d as f64 + 1.0).sqrt() / base.log(nf).sqrt()))
                * nf.ln()
    };
    let mut r3 = BoundReport::from_ln(
        "poly-rank-circuit-size",
        inputs(&[("n", nf), ("d", d as f64), ("C2", consts.c2)]),
        ln_f3,
        "a circuit of at most value gates outputs a state of rank >= n^d",
    );
    if n == 1 {
        r3.flags.push("degenerate: log(n) = 0 at n = 1".to_string());
    }
    reports.push(r3);

    // M log^2(M) at M = n^d: gate count that already suffices for a rank-M
    // output by direct counting.
    let ln_m = d as f64 * nf.ln();
    let log_m = match base {
        LogBase::Two => ln_m / LN_2,
        LogBase::Natural => ln_m,
    };
    let ln_f4 = if log_m <= 0.0 {
        f64::NEG_INFINITY
    } else {
        ln_m + 2.0 * log_m.ln()
    };
    let mut r4 = BoundReport::from_ln(
        "rank-route-size",
        inputs(&[("n", nf), ("d", d as f64)]),
        ln_f4,
        "rank >= M = n^d is already reachable with value = M log^2 M gates",
    );
    if log_m <= 0.0 {
        r4.flags.push("degenerate: M = 1".to_string());
    }
    reports.push(r4);

    Ok(DesignFormulas {
        reports,
        degenerate_t,
    })
}

/// Side-by-side of the two ways to certify an n-qubit state of rank n^d:
/// through the t-design tail, or by direct gate counting.
#[derive(Clone, Debug, Serialize)]
pub struct RouteComparison {
    pub n: u64,
    pub d: u32,
    pub tdesign_route_ln: f64,
    pub direct_route_ln: f64,
    pub tdesign_route_weaker: bool,
}

pub fn design_route_comparison(
    n: u64,
    d: u32,
    consts: &Constants,
    base: LogBase,
) -> Result<RouteComparison> {
    let formulas = design_gate_formulas(n, 2, 0.5, d, consts, base)?;
    let tdesign_route_ln = formulas.reports[2].ln_value;
    let direct_route_ln = formulas.reports[3].ln_value;
    Ok(RouteComparison {
        n,
        d,
        tdesign_route_ln,
        direct_route_ln,
        tdesign_route_weaker: tdesign_route_ln > direct_route_ln,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn haar_tail_hand_value_at_n20() {
        let expo = haar_tail_exponent(20, 1.0, 0.5).unwrap();
        // 0.54 * 400 - (0.75 - 2^-20)^2 * 2^20 / (100 pi) = 216 - 1877.46.
        assert!((expo - (216.0 - 1877.4584)).abs() < 0.01, "{expo}");
        let rep = haar_tail(20, 1.0, 0.5).unwrap();
        assert!(rep.ln_value < 0.0);
        assert_eq!(rep.value, Some(0.0));
        assert!(rep.flags.iter().any(|f| f.contains("underflow")));
    }

    #[test]
    fn haar_tail_rejects_violated_hypothesis() {
        assert!(matches!(
            haar_tail(3, 8.0, 0.0),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            haar_tail(3, 5.0, 0.8),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn inline_estimate_holds_on_grid() {
        for n in 10..=30 {
            for &delta in &[0.0, 0.5, 0.9] {
                let est = haar_inline_estimate(n, delta).unwrap();
                assert!(
                    est.holds,
                    "n = {n}, delta = {delta}: {} > {}",
                    est.exponent, est.rhs
                );
            }
        }
    }

    #[test]
    fn existence_thresholds() {
        assert_eq!(haar_exists_threshold(0.0, LogBase::Two).unwrap().n0, 9);
        assert_eq!(haar_exists_threshold(0.5, LogBase::Two).unwrap().n0, 10);
        assert_eq!(haar_exists_threshold(0.9, LogBase::Two).unwrap().n0, 14);
        // Base policy is observable where the log term is large enough.
        assert_eq!(haar_exists_threshold(0.9, LogBase::Natural).unwrap().n0, 13);
    }

    #[test]
    fn threshold_tail_value_frozen() {
        let th = haar_exists_threshold(0.0, LogBase::Two).unwrap();
        let rep = th.tail_at(th.n0);
        let v = rep.value.unwrap();
        assert!((v - 0.516774).abs() < 2e-4, "{v}");
        assert!(th.verified_through(5000));
    }

    #[test]
    fn main_bound_picks_n12_at_m1000() {
        let mb = main_lower_bound(1000, 0.5, &Constants::default(), LogBase::Two).unwrap();
        assert_eq!(mb.n, 12);
        let v = mb.report.value.unwrap();
        assert!((v - 0.016).abs() < 1e-5, "{v}");
        assert!(mb.upper_bracket_holds && mb.lower_bracket_holds);
    }

    #[test]
    fn main_bound_brackets_hold_across_sweep() {
        let consts = Constants::default();
        for m in (10..1000u64)
            .chain((1000..=1_000_000).step_by(997))
            .chain([1_000_000])
        {
            let mb = main_lower_bound(m, 0.5, &consts, LogBase::Two).unwrap();
            assert!(mb.upper_bracket_holds, "upper bracket fails at m = {m}");
            assert!(mb.lower_bracket_holds, "lower bracket fails at m = {m}");
        }
    }

    #[test]
    fn main_bound_rejects_tiny_m() {
        assert!(matches!(
            main_lower_bound(1, 0.5, &Constants::default(), LogBase::Two),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn tdesign_tail_collapses_at_t1() {
        let n = 4u32;
        let delta = 0.3;
        let rep = tdesign_tail(n, 1.0, 1.0, delta, 0.0).unwrap();
        let expect = 0.54 * 16.0 - 4.0 * LN_2 - (1.0 - delta * delta).ln();
        assert!((rep.ln_value - expect).abs() < 1e-9);
    }

    #[test]
    fn poly_design_threshold_at_d1() {
        let th = tdesign_poly_threshold(1, 0.5, 200).unwrap();
        assert_eq!(th.n0, 55);
        // One step earlier the tail is still above 1.
        assert!(tdesign_tail_ln(54, 54.0, 54f64.powi(2), 0.5, Some(-54f64.powi(3))) >= 0.0);
    }

    #[test]
    fn moment_formula_exact_values() {
        let five_twelfths = Ratio::new(BigInt::from(5), BigInt::from(12));
        assert_eq!(haar_moment(3, 5, 2).unwrap(), five_twelfths);
        assert_eq!(
            haar_moment(3, 5, 1).unwrap(),
            Ratio::new(BigInt::from(5), BigInt::from(8))
        );
        for t in 1..=4 {
            assert_eq!(haar_moment(2, 4, t).unwrap(), Ratio::one());
        }
        assert!(haar_moment(3, 9, 1).is_err());
        assert!(haar_moment(3, 0, 1).is_err());
    }

    #[test]
    fn moment_monotone_in_rank_and_order() {
        for n in 1..=4u32 {
            let dim = 1u64 << n;
            for m in 1..dim {
                for t in 1..=3u32 {
                    assert!(haar_moment(n, m, t).unwrap() <= haar_moment(n, m + 1, t).unwrap());
                    assert!(haar_moment(n, m, t + 1).unwrap() <= haar_moment(n, m, t).unwrap());
                }
            }
        }
    }

    #[test]
    fn moment_monte_carlo_agrees() {
        let chk = haar_moment_mc(2, 2, 2, 20_000, 7).unwrap();
        assert!(chk.within_four_se, "{chk:?}");
        assert!((chk.exact - 2.0 * 3.0 / (4.0 * 5.0)).abs() < 1e-15);
    }

    #[test]
    fn moment_monte_carlo_is_thread_count_invariant() {
        let a = haar_moment_mc(2, 3, 1, 4_000, 11).unwrap();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let b = pool.install(|| haar_moment_mc(2, 3, 1, 4_000, 11)).unwrap();
        assert_eq!(a.estimate.to_bits(), b.estimate.to_bits());
    }

    #[test]
    fn design_tail_monte_carlo_consistent() {
        let chk = tdesign_tail_mc(2, 2, 0.5, 3, 20_000, 3).unwrap();
        assert!(chk.passed, "{chk:?}");
        assert!(chk.span_rank >= 1 && chk.span_rank <= 3);
    }

    #[test]
    fn design_formula_degeneracy_and_monotonicity() {
        let consts = Constants::default();
        let f = design_gate_formulas(16, 1, 0.5, 1, &consts, LogBase::Two).unwrap();
        assert!(f.degenerate_t);
        assert_eq!(f.reports[0].value, Some(0.0));
        assert!(f.reports[0].flags.iter().any(|s| s.contains("degenerate")));

        let mut prev_t = f64::NEG_INFINITY;
        for t in [2u64, 4, 16, 256, 4096] {
            let f = design_gate_formulas(16, t, 1e-3, 1, &consts, LogBase::Two).unwrap();
            assert!(f.reports[0].ln_value > prev_t);
            prev_t = f.reports[0].ln_value;
        }
        let mut prev_e = f64::NEG_INFINITY;
        for eps in [1e-1, 1e-3, 1e-6, 1e-9] {
            let f = design_gate_formulas(16, 8, eps, 1, &consts, LogBase::Two).unwrap();
            assert!(f.reports[1].ln_value >= prev_e);
            prev_e = f.reports[1].ln_value;
        }
    }

    #[test]
    fn tdesign_route_is_weaker_at_n1024() {
        let cmp = design_route_comparison(1024, 1, &Constants::default(), LogBase::Two).unwrap();
        assert!(cmp.tdesign_route_weaker, "{cmp:?}");
        assert!(cmp.tdesign_route_ln > cmp.direct_route_ln + 10.0);
    }
}
