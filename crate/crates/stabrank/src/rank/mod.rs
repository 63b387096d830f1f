//! Exact and approximate stabilizer-rank search over an enumerated
//! dictionary, plus the scalar measures (fidelity, extent, Gowers norm)
//! that bound it.
//!
//! The searches work with the subset-projection criterion: a subset S of
//! dictionary states admits an approximation of quality delta if and only if
//! the orthogonal projection of psi onto span(S) has squared norm at least
//! 1 - delta^2. For delta = 0 a candidate subset must additionally pass a
//! dense residual check, because the projection value alone saturates double
//! precision before the residual does.

mod extent;
mod gowers;
mod mod8;

pub use extent::{stab_extent, ExtentResult};
pub use gowers::gowers_u3;
pub use mod8::{mod8_report, Mod8Report, PaddingCheck, QuadphaseRank};

use crate::dense::{self, DenseState};
use crate::error::{Error, Result};
use crate::linalg::{self, HermMatrix};
use crate::stab::{DictKind, Dictionary};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

type C = Complex64;

/// Slack subtracted from the projection target so that exact-arithmetic
/// successes survive floating-point evaluation.
pub const APPROX_SLACK: f64 = 1e-12;
/// Projection filter for exact decompositions; candidates must then pass the
/// dense residual check below.
const EXACT_GRAM_TOL: f64 = 1e-10;
const EXACT_RESIDUAL_TOL: f64 = 1e-9;
/// Squared-norm threshold under which an orthogonalized atom counts as
/// dependent on the current prefix and is skipped.
const DEP_TOL2: f64 = 1e-16;
/// Subsets examined per rank level before the search refuses and reports the
/// best upper bound it has.
pub const DEFAULT_SUBSET_BUDGET: f64 = 2.5e8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchMode {
    Exhaustive,
    Heuristic,
}

impl std::str::FromStr for SearchMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<SearchMode> {
        match s {
            "exhaustive" => Ok(SearchMode::Exhaustive),
            "heuristic" => Ok(SearchMode::Heuristic),
            other => Err(Error::Parse(format!(
                "unknown search mode {other:?} (want exhaustive or heuristic)"
            ))),
        }
    }
}

impl std::fmt::Display for SearchMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SearchMode::Exhaustive => write!(f, "exhaustive"),
            SearchMode::Heuristic => write!(f, "heuristic"),
        }
    }
}

fn ser_coeffs<S: Serializer>(coeffs: &[C], s: S) -> std::result::Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(coeffs.len()))?;
    for c in coeffs {
        seq.serialize_element(&[c.re, c.im])?;
    }
    seq.end()
}

/// A decomposition witness: `rank` states at the listed dictionary indices,
/// with coefficients realizing the projection of psi onto their span.
/// `residual` is the dense 2-norm of psi minus the combination and can be
/// recomputed from the fields alone via [`RankCertificate::verify`].
#[derive(Clone, Debug, Serialize)]
pub struct RankCertificate {
    pub rank: usize,
    pub mode: SearchMode,
    pub delta: f64,
    pub subset: Vec<usize>,
    #[serde(serialize_with = "ser_coeffs")]
    pub coefficients: Vec<C>,
    pub residual: f64,
}

impl RankCertificate {
    /// Recompute ||psi - sum_i c_i s_i|| from the stored subset and
    /// coefficients.
    pub fn verify(&self, psi: &DenseState, dict: &Dictionary) -> Result<f64> {
        if self.subset.len() != self.coefficients.len() {
            return Err(Error::Precondition(
                "certificate subset and coefficient lengths differ".into(),
            ));
        }
        let mut r: Vec<C> = psi.amps().to_vec();
        for (&idx, &c) in self.subset.iter().zip(&self.coefficients) {
            let s = dict
                .states()
                .get(idx)
                .ok_or_else(|| {
                    Error::Precondition(format!("certificate index {idx} outside the dictionary"))
                })?
                .to_dense()?;
            for (ri, ai) in r.iter_mut().zip(s.amps()) {
                *ri -= c * ai;
            }
        }
        Ok(linalg::norm(&r))
    }
}

#[derive(Clone, Copy)]
enum Criterion {
    Exact,
    Approx(f64),
}

impl Criterion {
    fn target(self) -> f64 {
        match self {
            Criterion::Exact => 1.0 - EXACT_GRAM_TOL,
            Criterion::Approx(delta) => 1.0 - delta * delta - APPROX_SLACK,
        }
    }

    fn delta(self) -> f64 {
        match self {
            Criterion::Exact => 0.0,
            Criterion::Approx(d) => d,
        }
    }

    fn is_exact(self) -> bool {
        matches!(self, Criterion::Exact)
    }
}

struct Searcher<'a> {
    atoms: Vec<Vec<C>>,
    psi: &'a [C],
    /// Dictionary indices sorted by descending single-state fidelity; the
    /// subset enumeration is lexicographic over positions in this order.
    order: Vec<usize>,
    crit: Criterion,
}

impl<'a> Searcher<'a> {
    fn new(psi: &'a DenseState, dict: &Dictionary, crit: Criterion) -> Result<Self> {
        let atoms: Vec<Vec<C>> = dict
            .states()
            .iter()
            .map(|s| s.to_dense().map(|d| d.amps().to_vec()))
            .collect::<Result<_>>()?;
        let amps = psi.amps();
        let mut order: Vec<usize> = (0..atoms.len()).collect();
        let scores: Vec<f64> = atoms
            .iter()
            .map(|a| linalg::dot(a, amps).norm_sqr())
            .collect();
        order.sort_by(|&i, &j| {
            scores[j]
                .partial_cmp(&scores[i])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(i.cmp(&j))
        });
        Ok(Searcher {
            atoms,
            psi: amps,
            order,
            crit,
        })
    }

    /// Orthogonalize `v` against the prefix twice; None when dependent.
    fn extend_prefix(&self, prefix: &[Vec<C>], idx: usize) -> Option<(Vec<C>, f64)> {
        let mut w = self.atoms[idx].clone();
        for _ in 0..2 {
            for b in prefix {
                let c = linalg::dot(b, &w);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
        }
        let nr2: f64 = w.iter().map(|z| z.norm_sqr()).sum();
        if nr2 < DEP_TOL2 {
            return None;
        }
        let nr = nr2.sqrt();
        for wi in w.iter_mut() {
            *wi /= nr;
        }
        let gain = linalg::dot(&w, self.psi).norm_sqr();
        Some((w, gain))
    }

    /// Least-squares coefficients for the subset plus the dense residual.
    fn solve(&self, subset: &[usize]) -> (Vec<C>, f64) {
        let m = subset.len();
        let mut g = vec![C::new(0.0, 0.0); m * m];
        let mut b = vec![C::new(0.0, 0.0); m];
        for i in 0..m {
            for j in 0..m {
                g[i * m + j] = linalg::dot(&self.atoms[subset[i]], &self.atoms[subset[j]]);
            }
            b[i] = linalg::dot(&self.atoms[subset[i]], self.psi);
        }
        let coeffs = linalg::pinv_solve(&HermMatrix::from_rows(m, g), &b, 1e-10);
        let mut r: Vec<C> = self.psi.to_vec();
        for (k, &idx) in subset.iter().enumerate() {
            for (ri, ai) in r.iter_mut().zip(&self.atoms[idx]) {
                *ri -= coeffs[k] * ai;
            }
        }
        (coeffs, linalg::norm(&r))
    }

    fn accepts(&self, subset: &[usize], val: f64) -> bool {
        if val < self.crit.target() {
            return false;
        }
        !self.crit.is_exact() || self.solve(subset).1 <= EXACT_RESIDUAL_TOL
    }

    /// First (in lexicographic position order) m-subset meeting the
    /// criterion, searched in parallel over the leading position.
    fn find_m(&self, m: usize) -> Option<Vec<usize>> {
        let n = self.order.len();
        if m == 0 || m > n {
            return None;
        }
        let starts: Vec<usize> = (0..=n - m).collect();
        let hits: Vec<Option<Vec<usize>>> = starts
            .par_iter()
            .map(|&p0| {
                let idx = self.order[p0];
                let (q0, gain) = self.extend_prefix(&[], idx)?;
                let mut chosen = vec![idx];
                if m == 1 {
                    return self.accepts(&chosen, gain).then(|| chosen.clone());
                }
                let mut prefix = vec![q0];
                self.dfs(m, p0 + 1, &mut prefix, gain, &mut chosen)
            })
            .collect();
        hits.into_iter().flatten().next()
    }

    fn dfs(
        &self,
        m: usize,
        start: usize,
        prefix: &mut Vec<Vec<C>>,
        val: f64,
        chosen: &mut Vec<usize>,
    ) -> Option<Vec<usize>> {
        let need = m - chosen.len();
        for p in start..=self.order.len() - need {
            let idx = self.order[p];
            let Some((w, gain)) = self.extend_prefix(prefix, idx) else {
                continue;
            };
            chosen.push(idx);
            if chosen.len() == m {
                if self.accepts(chosen, val + gain) {
                    return Some(chosen.clone());
                }
            } else {
                prefix.push(w);
                if let Some(hit) = self.dfs(m, p + 1, prefix, val + gain, chosen) {
                    return Some(hit);
                }
                prefix.pop();
            }
            chosen.pop();
        }
        None
    }

    /// Orthogonal matching pursuit with a backward pruning pass. Returns an
    /// upper-bound subset, or None if no progress is possible within `cap`
    /// iterations.
    fn matching_pursuit(&self, cap: usize) -> Option<Vec<usize>> {
        let dim = self.psi.len();
        let mut chosen: Vec<usize> = Vec::new();
        let mut prefix: Vec<Vec<C>> = Vec::new();
        let mut val = 0.0;
        for _ in 0..cap {
            if self.accepts(&chosen, val) && !chosen.is_empty() {
                break;
            }
            // Residual of psi against the current span.
            let mut r: Vec<C> = self.psi.to_vec();
            for b in &prefix {
                let c = linalg::dot(b, self.psi);
                for (ri, bi) in r.iter_mut().zip(b) {
                    *ri -= c * bi;
                }
            }
            let mut best: Option<(f64, usize)> = None;
            for (i, a) in self.atoms.iter().enumerate() {
                if chosen.contains(&i) {
                    continue;
                }
                let score = linalg::dot(a, &r).norm_sqr();
                if best.is_none_or(|(s, _)| score > s + 1e-15) {
                    best = Some((score, i));
                }
            }
            let (score, pick) = best?;
            if score < 1e-18 {
                return None;
            }
            let (w, gain) = self.extend_prefix(&prefix, pick)?;
            chosen.push(pick);
            prefix.push(w);
            val += gain;
            if prefix.len() >= dim {
                break;
            }
        }
        if !self.accepts(&chosen, val) {
            return None;
        }
        // Drop members whose removal keeps the criterion satisfied.
        let mut keep = chosen;
        let mut i = keep.len();
        while i > 0 {
            i -= 1;
            if keep.len() == 1 {
                break;
            }
            let mut trial = keep.clone();
            trial.remove(i);
            let basis = linalg::orthonormalize(
                &trial
                    .iter()
                    .map(|&t| self.atoms[t].clone())
                    .collect::<Vec<_>>(),
                1e-9,
            );
            let v: f64 = basis
                .iter()
                .map(|b| linalg::dot(b, self.psi).norm_sqr())
                .sum();
            if self.accepts(&trial, v) {
                keep = trial;
            }
        }
        Some(keep)
    }

    fn certificate(&self, subset: Vec<usize>, mode: SearchMode) -> RankCertificate {
        let mut subset = subset;
        subset.sort_unstable();
        let (coefficients, residual) = self.solve(&subset);
        RankCertificate {
            rank: subset.len(),
            mode,
            delta: self.crit.delta(),
            subset,
            coefficients,
            residual,
        }
    }
}

fn binomial_estimate(n: usize, m: usize) -> f64 {
    let mut v = 1.0f64;
    for j in 0..m {
        v *= (n - j) as f64 / (j + 1) as f64;
        if v > 1e18 {
            return f64::INFINITY;
        }
    }
    v
}

fn check_inputs(psi: &DenseState, dict: &Dictionary) -> Result<()> {
    if psi.n() != dict.n() {
        return Err(Error::Dimension(format!(
            "{}-qubit state against a {}-qubit dictionary",
            psi.n(),
            dict.n()
        )));
    }
    if (psi.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::Precondition(format!(
            "rank search needs a normalized state, got norm {}",
            psi.norm()
        )));
    }
    Ok(())
}

fn rank_search(
    psi: &DenseState,
    dict: &Dictionary,
    crit: Criterion,
    mode: SearchMode,
    budget: f64,
) -> Result<RankCertificate> {
    check_inputs(psi, dict)?;
    let searcher = Searcher::new(psi, dict, crit)?;
    let dim = 1usize << psi.n();
    let cap = dim.min(dict.len());
    match mode {
        SearchMode::Heuristic => {
            let subset = searcher
                .matching_pursuit(4 * cap)
                .ok_or_else(|| Error::Resource {
                    context: "matching pursuit made no progress".into(),
                    best_rank: None,
                })?;
            Ok(searcher.certificate(subset, mode))
        }
        SearchMode::Exhaustive => {
            for m in 1..=cap {
                if binomial_estimate(dict.len(), m) > budget {
                    let best = searcher.matching_pursuit(4 * cap).map(|s| s.len());
                    return Err(Error::Resource {
                        context: format!(
                            "rank level {m} needs more than {budget:.1e} subsets over {} states",
                            dict.len()
                        ),
                        best_rank: best,
                    });
                }
                if let Some(subset) = searcher.find_m(m) {
                    return Ok(searcher.certificate(subset, mode));
                }
            }
            Err(Error::Numeric(
                "dictionary does not span the state space".into(),
            ))
        }
    }
}

/// Smallest number of dictionary states whose span contains psi exactly
/// (dense residual at most 1e-9 after the projection filter).
pub fn exact_rank(
    psi: &DenseState,
    dict: &Dictionary,
    mode: SearchMode,
) -> Result<RankCertificate> {
    rank_search(psi, dict, Criterion::Exact, mode, DEFAULT_SUBSET_BUDGET)
}

/// Smallest number of dictionary states S with ||P_S psi||^2 >= 1 - delta^2.
pub fn approx_rank(
    psi: &DenseState,
    delta: f64,
    dict: &Dictionary,
    mode: SearchMode,
) -> Result<RankCertificate> {
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::Argument(format!(
            "delta must lie in [0, 1), got {delta}"
        )));
    }
    rank_search(
        psi,
        dict,
        Criterion::Approx(delta),
        mode,
        DEFAULT_SUBSET_BUDGET,
    )
}

/// Same searches with an explicit subset budget per rank level.
pub fn rank_with_budget(
    psi: &DenseState,
    delta: Option<f64>,
    dict: &Dictionary,
    mode: SearchMode,
    budget: f64,
) -> Result<RankCertificate> {
    let crit = match delta {
        None => Criterion::Exact,
        Some(d) => {
            if !(0.0..1.0).contains(&d) {
                return Err(Error::Argument(format!(
                    "delta must lie in [0, 1), got {d}"
                )));
            }
            Criterion::Approx(d)
        }
    };
    rank_search(psi, dict, crit, mode, budget)
}

/// Largest squared overlap with any single dictionary state, with the index
/// attaining it (ties resolve to the lowest index).
pub fn stab_fidelity(psi: &DenseState, dict: &Dictionary) -> Result<(f64, usize)> {
    check_inputs(psi, dict)?;
    let best = dict
        .states()
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            let ov = s.overlap_with_dense(psi)?;
            Ok::<_, Error>((ov.norm_sqr(), i))
        })
        .try_reduce(
            || (f64::NEG_INFINITY, usize::MAX),
            |a, b| {
                Ok(
                    if b.0 > a.0 + 1e-15 || ((b.0 - a.0).abs() <= 1e-15 && b.1 < a.1) {
                        b
                    } else {
                        a
                    },
                )
            },
        )?;
    Ok(best)
}

/// Lower bound on the exact rank from the flatness of the amplitude profile:
/// (2/3) log2(alpha^2 / (beta sqrt(F))) with alpha and beta the smallest and
/// largest rescaled amplitude magnitudes. None when some amplitude vanishes,
/// which makes the bound inapplicable.
pub fn f_chi_bound(psi: &DenseState, dict: &Dictionary) -> Result<Option<f64>> {
    check_inputs(psi, dict)?;
    let scale = 2f64.powf(0.5 * psi.n() as f64);
    let mags: Vec<f64> = psi.amps().iter().map(|a| a.norm() * scale).collect();
    let alpha = mags.iter().cloned().fold(f64::INFINITY, f64::min);
    let beta = mags.iter().cloned().fold(0.0f64, f64::max);
    if alpha < 1e-12 {
        return Ok(None);
    }
    let (fid, _) = stab_fidelity(psi, dict)?;
    Ok(Some(
        (2.0 / 3.0) * (alpha * alpha / (beta * fid.sqrt())).log2(),
    ))
}

/// Smallest delta (within `tol`) at which the approximate rank drops to
/// `target_rank`, located by bisection; the approximate rank is
/// non-increasing in delta.
pub fn approx_threshold(
    psi: &DenseState,
    dict: &Dictionary,
    target_rank: usize,
    tol: f64,
) -> Result<f64> {
    check_inputs(psi, dict)?;
    let rank_at =
        |d: f64| -> Result<usize> { Ok(approx_rank(psi, d, dict, SearchMode::Exhaustive)?.rank) };
    if rank_at(0.0)? <= target_rank {
        return Ok(0.0);
    }
    let mut lo = 0.0f64;
    let mut hi = 1.0 - 1e-12;
    if rank_at(hi)? > target_rank {
        return Err(Error::Argument(format!(
            "approximate rank never reaches {target_rank} below delta = 1"
        )));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if rank_at(mid)? <= target_rank {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// A state within distance delta of |0...0> whose exact rank stays above its
/// approximate rank: psi is Haar-random orthogonal to |0...0>, the probe is
/// delta psi + sqrt(1 - delta^2) |0...0>, and the approximate search runs at
/// delta_prime = prime_scale * delta.
#[derive(Clone, Debug, Serialize)]
pub struct GapDemo {
    #[serde(skip)]
    pub state: DenseState,
    pub n: usize,
    pub delta: f64,
    pub delta_prime: f64,
    pub exact: RankCertificate,
    pub approx: RankCertificate,
}

pub fn gap_demo(n: usize, delta: f64, prime_scale: f64, seed: u64) -> Result<GapDemo> {
    if n > 3 {
        return Err(Error::Resource {
            context: format!("gap demo runs exhaustive searches, n = {n} is too large"),
            best_rank: None,
        });
    }
    if !(0.0..1.0).contains(&delta) || delta == 0.0 {
        return Err(Error::Argument(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    let dim = 1usize << n;
    let mut perp = None;
    for sample in 0..16 {
        let h = dense::haar_state(n, seed, sample)?;
        let mut amps = h.amps().to_vec();
        amps[0] = C::new(0.0, 0.0);
        let nr = linalg::norm(&amps);
        if nr > 1e-3 {
            for a in amps.iter_mut() {
                *a /= nr;
            }
            perp = Some(amps);
            break;
        }
    }
    let perp = perp.ok_or_else(|| Error::Numeric("no usable Haar sample".into()))?;
    let mut amps = vec![C::new(0.0, 0.0); dim];
    for (i, a) in perp.iter().enumerate() {
        amps[i] = delta * a;
    }
    amps[0] += C::new((1.0 - delta * delta).sqrt(), 0.0);
    let state = DenseState::from_amps(n, amps)?;
    let dict = Dictionary::enumerate(n, DictKind::Stab)?;
    let exact = match exact_rank(&state, &dict, SearchMode::Exhaustive) {
        Ok(cert) => cert,
        Err(Error::Resource { .. }) => exact_rank(&state, &dict, SearchMode::Heuristic)?,
        Err(e) => return Err(e),
    };
    let delta_prime = prime_scale * delta;
    let approx = approx_rank(&state, delta_prime, &dict, SearchMode::Exhaustive)?;
    Ok(GapDemo {
        state,
        n,
        delta,
        delta_prime,
        exact,
        approx,
    })
}

/// All scalar measures of one state against one dictionary, with the
/// inequalities that relate them checked inline.
#[derive(Clone, Debug, Serialize)]
pub struct MeasureReport {
    pub n: usize,
    pub fidelity: f64,
    pub fidelity_argmax: usize,
    pub extent: f64,
    pub extent_l1: f64,
    pub extent_gap: f64,
    pub xi_times_fidelity: f64,
    pub gowers_u3: Option<f64>,
    pub f_chi_lower_bound: Option<f64>,
    pub checks: Vec<String>,
    pub all_checks_hold: bool,
}

pub fn measure_report(psi: &DenseState, dict: &Dictionary) -> Result<MeasureReport> {
    check_inputs(psi, dict)?;
    let (fidelity, fidelity_argmax) = stab_fidelity(psi, dict)?;
    let ext = stab_extent(psi, dict)?;
    let gowers = if psi.n() <= 5 {
        Some(gowers_u3(psi)?)
    } else {
        None
    };
    let f_chi = f_chi_bound(psi, dict)?;
    let xi_f = ext.extent * fidelity;
    let mut checks = Vec::new();
    let mut all = true;
    let mut check = |name: &str, ok: bool| {
        checks.push(format!("{name}: {}", if ok { "ok" } else { "FAIL" }));
        all &= ok;
    };
    check(
        "fidelity in (0, 1]",
        fidelity > 0.0 && fidelity <= 1.0 + 1e-9,
    );
    check("extent >= 1", ext.extent >= 1.0 - 1e-9);
    check("extent * fidelity >= 1", xi_f >= 1.0 - 1e-6);
    if let Some(u) = gowers {
        check("gowers u3 in [0, 1]", (-1e-9..=1.0 + 1e-9).contains(&u));
    }
    Ok(MeasureReport {
        n: psi.n(),
        fidelity,
        fidelity_argmax,
        extent: ext.extent,
        extent_l1: ext.l1,
        extent_gap: ext.gap,
        xi_times_fidelity: xi_f,
        gowers_u3: gowers,
        f_chi_lower_bound: f_chi,
        checks,
        all_checks_hold: all,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gadget::random_clifford_gate;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const COS2_PI8: f64 = 0.8535533905932737; // cos^2(pi/8)
    const SIN_PI8: f64 = 0.3826834323650898;

    fn dict(n: usize) -> Dictionary {
        Dictionary::enumerate(n, DictKind::Stab).unwrap()
    }

    #[test]
    fn stabilizer_states_have_rank_one() {
        let d = dict(2);
        let mut bell = DenseState::zero_state(2).unwrap();
        bell.apply_gates(&[crate::gadget::Gate::H(0), crate::gadget::Gate::Cnot(0, 1)])
            .unwrap();
        let cert = exact_rank(&bell, &d, SearchMode::Exhaustive).unwrap();
        assert_eq!(cert.rank, 1);
        assert!(cert.residual < 1e-10);
        assert!(cert.verify(&bell, &d).unwrap() < 1e-10);
    }

    #[test]
    fn magic_states_have_rank_two() {
        for m in [1usize, 2] {
            let psi = DenseState::magic_t_power(m).unwrap();
            let d = dict(m);
            let cert = exact_rank(&psi, &d, SearchMode::Exhaustive).unwrap();
            assert_eq!(cert.rank, 2, "T^{m}");
            assert!(cert.residual <= 1e-9);
            assert!((cert.verify(&psi, &d).unwrap() - cert.residual).abs() < 1e-9);
        }
    }

    #[test]
    fn fidelity_of_magic_states() {
        for m in [1usize, 2, 3] {
            let psi = DenseState::magic_t_power(m).unwrap();
            let (f, _) = stab_fidelity(&psi, &dict(m)).unwrap();
            assert!((f - COS2_PI8.powi(m as i32)).abs() < 1e-9, "T^{m}: {f}");
        }
    }

    #[test]
    fn approx_rank_of_t_drops_at_sin_pi8() {
        let psi = DenseState::magic_t_power(1).unwrap();
        let d = dict(1);
        let below = approx_rank(&psi, SIN_PI8 - 1e-4, &d, SearchMode::Exhaustive).unwrap();
        let above = approx_rank(&psi, SIN_PI8 + 1e-4, &d, SearchMode::Exhaustive).unwrap();
        assert_eq!(below.rank, 2);
        assert_eq!(above.rank, 1);
        let thr = approx_threshold(&psi, &d, 1, 1e-8).unwrap();
        assert!((thr - SIN_PI8).abs() < 1e-6, "threshold {thr}");
    }

    #[test]
    fn approx_rank_zero_delta_matches_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in 1..=2usize {
            let d = dict(n);
            for k in 0..4u64 {
                let psi = dense::haar_state(n, 17 + k, rng.gen_range(0..8)).unwrap();
                let e = exact_rank(&psi, &d, SearchMode::Exhaustive).unwrap();
                let a = approx_rank(&psi, 0.0, &d, SearchMode::Exhaustive).unwrap();
                assert_eq!(e.rank, a.rank);
            }
        }
    }

    #[test]
    fn approx_rank_is_monotone_in_delta() {
        let psi = DenseState::magic_t_power(2).unwrap();
        let d = dict(2);
        let mut last = usize::MAX;
        for k in 0..8 {
            let delta = k as f64 * 0.12;
            let r = approx_rank(&psi, delta, &d, SearchMode::Exhaustive)
                .unwrap()
                .rank;
            assert!(r <= last, "rank rose from {last} to {r} at delta {delta}");
            last = r;
        }
        assert_eq!(last, 1);
    }

    #[test]
    fn approx_certificate_residual_matches_projection() {
        let psi = DenseState::magic_t_power(2).unwrap();
        let d = dict(2);
        let cert = approx_rank(&psi, 0.3, &d, SearchMode::Exhaustive).unwrap();
        let recomputed = cert.verify(&psi, &d).unwrap();
        assert!((recomputed - cert.residual).abs() < 1e-9);
        // Residual of a projection obeys residual^2 = 1 - ||P psi||^2 <= delta^2.
        assert!(cert.residual * cert.residual <= 0.3f64.powi(2) + 1e-9);
    }

    #[test]
    fn heuristic_mode_upper_bounds_exhaustive() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let d = dict(2);
        for k in 0..6u64 {
            let psi = dense::haar_state(2, 40 + k, rng.gen_range(0..4)).unwrap();
            let e = exact_rank(&psi, &d, SearchMode::Exhaustive).unwrap();
            let h = exact_rank(&psi, &d, SearchMode::Heuristic).unwrap();
            assert!(h.rank >= e.rank);
            assert!(h.verify(&psi, &d).unwrap() <= 1e-9);
        }
    }

    #[test]
    fn rank_is_clifford_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let d = dict(2);
        for trial in 0..4u64 {
            let psi = dense::haar_state(2, 90 + trial, 0).unwrap();
            let base = exact_rank(&psi, &d, SearchMode::Exhaustive).unwrap().rank;
            let mut moved = psi.clone();
            for _ in 0..12 {
                moved.apply_gate(random_clifford_gate(2, &mut rng)).unwrap();
            }
            let after = exact_rank(&moved, &d, SearchMode::Exhaustive).unwrap().rank;
            assert_eq!(base, after);
        }
    }

    #[test]
    fn f_chi_bound_on_magic_states() {
        for m in [1usize, 2, 3] {
            let psi = DenseState::magic_t_power(m).unwrap();
            let b = f_chi_bound(&psi, &dict(m)).unwrap().unwrap();
            assert!(b > 0.076 * m as f64 && b < 0.077 * m as f64, "T^{m}: {b}");
        }
        // A basis state has alpha = 0: bound inapplicable.
        let zero = DenseState::zero_state(1).unwrap();
        assert!(f_chi_bound(&zero, &dict(1)).unwrap().is_none());
    }

    #[test]
    fn f_chi_bound_stays_below_exact_rank() {
        for m in [1usize, 2] {
            let psi = DenseState::magic_t_power(m).unwrap();
            let d = dict(m);
            let b = f_chi_bound(&psi, &d).unwrap().unwrap();
            let r = exact_rank(&psi, &d, SearchMode::Exhaustive).unwrap().rank;
            assert!(b <= r as f64);
        }
    }

    #[test]
    fn gap_demo_separates_exact_from_approx() {
        let demo = gap_demo(2, 0.1, 1.0, 2024).unwrap();
        assert!(demo.exact.rank >= 2);
        assert_eq!(demo.approx.rank, 1);
        assert!(demo.approx.residual <= demo.delta_prime + 1e-9);
    }

    #[test]
    fn measure_report_invariants_on_magic_state() {
        let psi = DenseState::magic_t_power(2).unwrap();
        let rep = measure_report(&psi, &dict(2)).unwrap();
        assert!(rep.all_checks_hold, "{:?}", rep.checks);
        assert!(rep.extent * rep.fidelity >= 1.0 - 1e-6);
        assert!((rep.fidelity - COS2_PI8 * COS2_PI8).abs() < 1e-9);
    }

    #[test]
    fn certificate_serializes_coefficients_as_pairs() {
        let psi = DenseState::magic_t_power(1).unwrap();
        let cert = exact_rank(&psi, &dict(1), SearchMode::Exhaustive).unwrap();
        let js = serde_json::to_value(&cert).unwrap();
        assert_eq!(js["rank"], 2);
        assert!(js["coefficients"][0].as_array().unwrap().len() == 2);
        assert_eq!(js["mode"], "exhaustive");
    }

    #[test]
    fn budget_exhaustion_reports_best_upper_bound() {
        let psi = dense::haar_state(2, 7, 0).unwrap();
        let d = dict(2);
        let err = rank_with_budget(&psi, None, &d, SearchMode::Exhaustive, 10.0).unwrap_err();
        match err {
            Error::Resource { best_rank, .. } => assert!(best_rank.is_some()),
            other => panic!("expected resource error, got {other:?}"),
        }
    }
}
