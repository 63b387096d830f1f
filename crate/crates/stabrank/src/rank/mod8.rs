//! The eighth-root-of-unity phase function T(x) = e^{i pi |x| / 4} split
//! into Hamming-weight residue classes mod 8, and its approximation by
//! quadratic-phase states.
//!
//! With M_j the indicator of |x| = j (mod 8), the pointwise identity
//! T(x) = sum_j omega^j M_j(x) holds with omega = e^{i pi / 4}. Each M_j
//! reduces to M_0 by padding with ones; since |(1^p, x)| = p + |x|, the
//! correct pad count is p = (8 - j) mod 8, i.e. M_j(x) = M_0(1^{(8-j) mod 8}, x).
//! Padding with j ones instead lands on M_{(8-j) mod 8}, so that form only
//! agrees at j = 0 and j = 4; the report records both facts.

use super::{approx_rank, RankCertificate, SearchMode};
use crate::dense::DenseState;
use crate::error::Result;
use crate::stab::{DictKind, Dictionary};
use num_complex::Complex64;
use serde::Serialize;

type C = Complex64;

#[derive(Clone, Debug, Serialize)]
pub struct PaddingCheck {
    pub j: usize,
    /// Number of padding ones that reduces M_j to M_0.
    pub pad_ones: usize,
    pub holds: bool,
    /// Whether the naive pad count j would also have worked.
    pub naive_pad_agrees: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct QuadphaseRank {
    pub n: usize,
    pub delta: f64,
    pub rank: usize,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Mod8Report {
    pub identity_qubits: usize,
    pub identity_max_error: f64,
    pub padding_qubits: usize,
    pub padding: Vec<PaddingCheck>,
    pub quadphase_delta: f64,
    pub quadphase_ranks: Vec<QuadphaseRank>,
    pub all_pass: bool,
}

fn m_indicator(weight: usize, j: usize) -> f64 {
    if weight % 8 == j % 8 {
        1.0
    } else {
        0.0
    }
}

/// Verify the residue-class expansion of T(x) exhaustively on
/// `identity_qubits` bits, the padding reduction for every j on
/// `padding_qubits` bits, and compute quadratic-phase approximate ranks of
/// the T-phase state for n = 1..=3 at the given delta.
pub fn mod8_report(
    identity_qubits: usize,
    padding_qubits: usize,
    delta: f64,
) -> Result<Mod8Report> {
    let omega = C::from_polar(1.0, std::f64::consts::FRAC_PI_4);

    let mut identity_max_error = 0.0f64;
    for x in 0u64..1 << identity_qubits {
        let w = x.count_ones() as usize;
        let direct = C::from_polar(1.0, std::f64::consts::FRAC_PI_4 * w as f64);
        let mut sum = C::new(0.0, 0.0);
        for j in 0..8 {
            sum += omega.powu(j as u32) * m_indicator(w, j);
        }
        identity_max_error = identity_max_error.max((direct - sum).norm());
    }

    let mut padding = Vec::with_capacity(8);
    for j in 0..8usize {
        let pad = (8 - j) % 8;
        let mut holds = true;
        let mut naive = true;
        for x in 0u64..1 << padding_qubits {
            let w = x.count_ones() as usize;
            if m_indicator(w, j) != m_indicator(pad + w, 0) {
                holds = false;
            }
            if m_indicator(w, j) != m_indicator(j + w, 0) {
                naive = false;
            }
        }
        padding.push(PaddingCheck {
            j,
            pad_ones: pad,
            holds,
            naive_pad_agrees: naive,
        });
    }

    let mut quadphase_ranks = Vec::new();
    for n in 1..=3usize {
        let psi = DenseState::magic_t_power(n)?;
        let dict = Dictionary::enumerate(n, DictKind::QuadPhase)?;
        let cert: RankCertificate = approx_rank(&psi, delta, &dict, SearchMode::Exhaustive)?;
        quadphase_ranks.push(QuadphaseRank {
            n,
            delta,
            rank: cert.rank,
            residual: cert.residual,
        });
    }

    let all_pass = identity_max_error < 1e-12 && padding.iter().all(|p| p.holds);
    Ok(Mod8Report {
        identity_qubits,
        identity_max_error,
        padding_qubits,
        padding,
        quadphase_delta: delta,
        quadphase_ranks,
        all_pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_padding_hold() {
        let r = mod8_report(10, 4, 0.5).unwrap();
        assert!(r.all_pass);
        assert!(r.identity_max_error < 1e-12);
        for p in &r.padding {
            assert!(p.holds, "j = {}", p.j);
            // The naive pad count only works when j and (8 - j) coincide mod 8.
            assert_eq!(p.naive_pad_agrees, p.j == 0 || p.j == 4, "j = {}", p.j);
        }
    }

    #[test]
    fn quadphase_ranks_are_small_and_positive() {
        let r = mod8_report(4, 4, 0.5).unwrap();
        assert_eq!(r.quadphase_ranks.len(), 3);
        for q in &r.quadphase_ranks {
            assert!(q.rank >= 1);
            assert!(q.residual * q.residual <= q.delta * q.delta + 1e-9);
        }
        // One copy of the phase function sits within delta = 0.5 of a single
        // quadratic phase state: |<+|T>|^2 = (2 + sqrt(2)) / 4 > 0.75.
        assert_eq!(r.quadphase_ranks[0].rank, 1);
    }
}
