//! Gowers U^3 norm of the rescaled amplitude function f(x) = 2^{n/2} <x|psi>,
//! by direct summation over all difference triples.
//!
//! ||f||_{U3}^8 = 2^{-4n} sum_{x,h1,h2,h3} prod_{S subseteq {1,2,3}}
//! Conj^{|S|}( f(x + sum_{i in S} h_i) ), conjugating the factors with odd
//! |S|. The sum is real for any f; values land in [0, 1] for normalized
//! states and equal 1 exactly when f is a quadratic phase over F2^n.

use crate::dense::DenseState;
use crate::error::{Error, Result};
use num_complex::Complex64;

type C = Complex64;

const MAX_GOWERS_QUBITS: usize = 5;

pub fn gowers_u3(psi: &DenseState) -> Result<f64> {
    let n = psi.n();
    if n > MAX_GOWERS_QUBITS {
        return Err(Error::Resource {
            context: format!(
                "u3 sums over 16^n tuples; n = {n} exceeds the cap of {MAX_GOWERS_QUBITS}"
            ),
            best_rank: None,
        });
    }
    let size = 1usize << n;
    let scale = (size as f64).sqrt();
    let f: Vec<C> = psi.amps().iter().map(|a| a * scale).collect();
    let mut total = 0.0f64;
    for x in 0..size {
        for h1 in 0..size {
            for h2 in 0..size {
                for h3 in 0..size {
                    let term = f[x]
                        * f[x ^ h1].conj()
                        * f[x ^ h2].conj()
                        * f[x ^ h3].conj()
                        * f[x ^ h1 ^ h2]
                        * f[x ^ h1 ^ h3]
                        * f[x ^ h2 ^ h3]
                        * f[x ^ h1 ^ h2 ^ h3].conj();
                    total += term.re;
                }
            }
        }
    }
    let eighth_power = total / (size as f64).powi(4);
    if eighth_power < -1e-9 {
        return Err(Error::Numeric(format!(
            "u3 eighth power came out negative: {eighth_power}"
        )));
    }
    Ok(eighth_power.max(0.0).powf(0.125))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stab::{DictKind, Dictionary};

    #[test]
    fn uniform_superposition_has_u3_one() {
        let n = 3;
        let dim = 1usize << n;
        let amp = C::new(1.0 / (dim as f64).sqrt(), 0.0);
        let psi = DenseState::from_amps(n, vec![amp; dim]).unwrap();
        assert!((gowers_u3(&psi).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quadratic_phase_states_have_u3_one() {
        for n in 1..=3usize {
            let dict = Dictionary::enumerate(n, DictKind::QuadPhase).unwrap();
            for s in dict.states() {
                let d = s.to_dense().unwrap();
                let u = gowers_u3(&d).unwrap();
                assert!((u - 1.0).abs() < 1e-10, "n={n}: u3 = {u}");
            }
        }
    }

    #[test]
    fn magic_state_u3_is_strictly_below_one_and_multiplicative() {
        let u1 = gowers_u3(&DenseState::magic_t_power(1).unwrap()).unwrap();
        let u2 = gowers_u3(&DenseState::magic_t_power(2).unwrap()).unwrap();
        let u3 = gowers_u3(&DenseState::magic_t_power(3).unwrap()).unwrap();
        assert!(u1 < 1.0 - 1e-3);
        assert!((u2 - u1 * u1).abs() < 1e-9);
        assert!((u3 - u1 * u1 * u1).abs() < 1e-9);
    }

    #[test]
    fn tensor_products_multiply() {
        let a = DenseState::magic_t_power(1).unwrap();
        let mut b = DenseState::zero_state(2).unwrap();
        b.apply_gates(&[
            crate::gadget::Gate::H(0),
            crate::gadget::Gate::Cnot(0, 1),
            crate::gadget::Gate::T(1),
        ])
        .unwrap();
        let ab = a.tensor(&b).unwrap();
        let lhs = gowers_u3(&ab).unwrap();
        let rhs = gowers_u3(&a).unwrap() * gowers_u3(&b).unwrap();
        assert!((lhs - rhs).abs() < 1e-9, "{lhs} vs {rhs}");
    }

    #[test]
    fn cap_is_enforced() {
        let psi = DenseState::zero_state(6).unwrap();
        assert!(gowers_u3(&psi).is_err());
    }
}
