//! Small dense Hermitian eigensolver and helpers.
//!
//! Everything here runs at desk scale (matrices up to a few hundred rows), so
//! a cyclic Jacobi sweep is plenty and keeps the crate free of BLAS/LAPACK
//! linkage. Not part of the public API.

use num_complex::Complex64;

type C = Complex64;

/// Hermitian matrix in row-major storage.
#[derive(Clone)]
pub(crate) struct HermMatrix {
    pub n: usize,
    pub data: Vec<C>,
}

impl HermMatrix {
    pub fn from_rows(n: usize, data: Vec<C>) -> Self {
        debug_assert_eq!(data.len(), n * n);
        HermMatrix { n, data }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> C {
        self.data[i * self.n + j]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: C) {
        self.data[i * self.n + j] = v;
    }
}

pub(crate) struct EigH {
    pub values: Vec<f64>,
    /// Column k of `vectors` (stride n) is the eigenvector of values[k].
    pub vectors: Vec<C>,
    pub n: usize,
}

impl EigH {
    #[inline]
    pub fn vec_entry(&self, row: usize, col: usize) -> C {
        self.vectors[row * self.n + col]
    }
}

/// Cyclic Jacobi for Hermitian matrices. Off-diagonal mass strictly decreases
/// each rotation; convergence threshold is relative to the input scale.
pub(crate) fn eigh(a: &HermMatrix) -> EigH {
    let n = a.n;
    let mut m = a.clone();
    // Symmetrize defensively so roundoff in the input cannot bias the sweep.
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m.at(i, j) + m.at(j, i).conj());
            m.set(i, j, avg);
            m.set(j, i, avg.conj());
        }
        let d = m.at(i, i).re;
        m.set(i, i, C::new(d, 0.0));
    }
    let mut v: Vec<C> = vec![C::new(0.0, 0.0); n * n];
    for i in 0..n {
        v[i * n + i] = C::new(1.0, 0.0);
    }
    let scale: f64 = m
        .data
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt()
        .max(1e-300);
    let tol = 1e-14 * scale;
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m.at(i, j).norm_sqr();
            }
        }
        if off.sqrt() <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let g = m.at(p, q);
                if g.norm() <= tol * 1e-2 / (n as f64) {
                    continue;
                }
                let app = m.at(p, p).re;
                let aqq = m.at(q, q).re;
                let absg = g.norm();
                let u = g / absg; // e^{i phi}
                                  // Real 2x2 rotation on (app, |g|; |g|, aqq).
                let tau = (aqq - app) / (2.0 * absg);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // J = I except J_pp = u c, J_pq = u s, J_qp = -s, J_qq = c.
                let jpp = u * c;
                let jpq = u * s;
                let jqp = C::new(-s, 0.0);
                let jqq = C::new(c, 0.0);
                // M <- J^dagger M J, applied as column then row updates.
                for i in 0..n {
                    let mip = m.at(i, p);
                    let miq = m.at(i, q);
                    m.set(i, p, mip * jpp + miq * jqp);
                    m.set(i, q, mip * jpq + miq * jqq);
                }
                for i in 0..n {
                    let mpi = m.at(p, i);
                    let mqi = m.at(q, i);
                    m.set(p, i, jpp.conj() * mpi + jqp.conj() * mqi);
                    m.set(q, i, jpq.conj() * mpi + jqq.conj() * mqi);
                }
                // Clean the pivot pair.
                m.set(p, q, C::new(0.0, 0.0));
                m.set(q, p, C::new(0.0, 0.0));
                let dp = m.at(p, p).re;
                let dq = m.at(q, q).re;
                m.set(p, p, C::new(dp, 0.0));
                m.set(q, q, C::new(dq, 0.0));
                for i in 0..n {
                    let vip = v[i * n + p];
                    let viq = v[i * n + q];
                    v[i * n + p] = vip * jpp + viq * jqp;
                    v[i * n + q] = vip * jpq + viq * jqq;
                }
            }
        }
    }
    let values: Vec<f64> = (0..n).map(|i| m.at(i, i).re).collect();
    EigH {
        values,
        vectors: v,
        n,
    }
}

/// x = A^+ b through the spectral decomposition, zeroing eigenvalues below
/// `rel_cutoff` times the largest magnitude eigenvalue.
pub(crate) fn pinv_solve(a: &HermMatrix, b: &[C], rel_cutoff: f64) -> Vec<C> {
    let n = a.n;
    debug_assert_eq!(b.len(), n);
    let eig = eigh(a);
    let lmax = eig.values.iter().fold(0.0f64, |acc, &l| acc.max(l.abs()));
    let cutoff = rel_cutoff * lmax;
    let mut x = vec![C::new(0.0, 0.0); n];
    for k in 0..n {
        let lam = eig.values[k];
        if lam.abs() <= cutoff {
            continue;
        }
        // coefficient <v_k, b> / lambda_k
        let mut coef = C::new(0.0, 0.0);
        for (i, bi) in b.iter().enumerate() {
            coef += eig.vec_entry(i, k).conj() * bi;
        }
        coef /= lam;
        for (i, xi) in x.iter_mut().enumerate() {
            *xi += coef * eig.vec_entry(i, k);
        }
    }
    x
}

pub(crate) fn dot(a: &[C], b: &[C]) -> C {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn norm(a: &[C]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Modified Gram-Schmidt returning an orthonormal basis of the span.
/// Vectors whose residual drops below `tol` are treated as dependent.
pub(crate) fn orthonormalize(vecs: &[Vec<C>], tol: f64) -> Vec<Vec<C>> {
    let mut basis: Vec<Vec<C>> = Vec::new();
    for v in vecs {
        let mut r = v.clone();
        for b in &basis {
            let c = dot(b, &r);
            for (ri, bi) in r.iter_mut().zip(b) {
                *ri -= c * bi;
            }
        }
        // Second pass stabilizes near-dependent inputs.
        for b in &basis {
            let c = dot(b, &r);
            for (ri, bi) in r.iter_mut().zip(b) {
                *ri -= c * bi;
            }
        }
        let nr = norm(&r);
        if nr > tol {
            for ri in r.iter_mut() {
                *ri /= nr;
            }
            basis.push(r);
        }
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> HermMatrix {
        let mut data = vec![C::new(0.0, 0.0); n * n];
        for i in 0..n {
            data[i * n + i] = C::new(rng.gen_range(-2.0..2.0), 0.0);
            for j in (i + 1)..n {
                let z = C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                data[i * n + j] = z;
                data[j * n + i] = z.conj();
            }
        }
        HermMatrix::from_rows(n, data)
    }

    #[test]
    fn eigh_reconstructs_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for &n in &[1usize, 2, 5, 12, 30] {
            let a = random_hermitian(n, &mut rng);
            let e = eigh(&a);
            // A v_k = lambda_k v_k and V orthonormal.
            for k in 0..n {
                for i in 0..n {
                    let mut av = C::new(0.0, 0.0);
                    for j in 0..n {
                        av += a.at(i, j) * e.vec_entry(j, k);
                    }
                    let diff = av - e.vec_entry(i, k) * e.values[k];
                    assert!(diff.norm() < 1e-9, "n={n} entry residual {}", diff.norm());
                }
            }
            for k in 0..n {
                for l in 0..n {
                    let mut ip = C::new(0.0, 0.0);
                    for i in 0..n {
                        ip += e.vec_entry(i, k).conj() * e.vec_entry(i, l);
                    }
                    let want = if k == l { 1.0 } else { 0.0 };
                    assert!((ip - want).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn pinv_solves_and_ignores_null_directions() {
        // Rank-1 projector onto (1, i)/sqrt(2).
        let h = 0.5;
        let data = vec![
            C::new(h, 0.0),
            C::new(0.0, -h),
            C::new(0.0, h),
            C::new(h, 0.0),
        ];
        let a = HermMatrix::from_rows(2, data);
        let b = vec![C::new(1.0, 0.0), C::new(0.0, 1.0)];
        let x = pinv_solve(&a, &b, 1e-10);
        // A x should reproduce the projection of b (b lies in range here).
        for (i, bi) in b.iter().enumerate() {
            let mut ax = C::new(0.0, 0.0);
            for (j, xj) in x.iter().enumerate() {
                ax += a.at(i, j) * xj;
            }
            assert!((ax - bi).norm() < 1e-10);
        }
    }

    #[test]
    fn orthonormalize_drops_dependent_vectors() {
        let v1 = vec![C::new(1.0, 0.0), C::new(0.0, 0.0)];
        let v2 = vec![C::new(2.0, 0.0), C::new(0.0, 0.0)];
        let v3 = vec![C::new(0.0, 0.0), C::new(0.0, 3.0)];
        let b = orthonormalize(&[v1, v2, v3], 1e-9);
        assert_eq!(b.len(), 2);
        assert!((norm(&b[0]) - 1.0).abs() < 1e-12);
        assert!(dot(&b[0], &b[1]).norm() < 1e-12);
    }
}
