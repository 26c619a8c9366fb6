//! Haar sampling: random pure states (full space or a designated
//! computational-basis subspace) and Haar-distributed unitaries.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
use rand_core::RngCore;

use crate::linalg::CMat;
use crate::rng::complex_gaussian;
use crate::{domain_err, Result};
// f64 math comes from num-traits under no_std; with std linked the
// inherent methods win and this import is unused.
#[allow(unused_imports)]
use num_traits::Float;

/// Haar-random pure state: i.i.d. standard complex Gaussian entries,
/// normalized. Unitary invariance of the Gaussian makes the result Haar.
pub fn sample_haar_state<R: RngCore>(dim: usize, rng: &mut R) -> Vec<Complex64> {
    assert!(dim >= 1);
    let mut v: Vec<Complex64> = (0..dim).map(|_| complex_gaussian(rng)).collect();
    normalize(&mut v);
    v
}

/// Haar-random state on the span of the listed computational basis
/// indices, embedded in the `dim`-dimensional vector with exact zeros
/// elsewhere.
pub fn sample_haar_state_in_subspace<R: RngCore>(
    basis_indices: &[usize],
    dim: usize,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    if basis_indices.is_empty() {
        return domain_err("subspace index set is empty");
    }
    let mut seen = vec![false; dim];
    for &i in basis_indices {
        if i >= dim {
            return domain_err(alloc::format!("basis index {i} out of range for D={dim}"));
        }
        if seen[i] {
            return domain_err(alloc::format!("duplicate basis index {i}"));
        }
        seen[i] = true;
    }
    let sub = sample_haar_state(basis_indices.len(), rng);
    let mut v = vec![Complex64::new(0.0, 0.0); dim];
    for (&idx, &amp) in basis_indices.iter().zip(sub.iter()) {
        v[idx] = amp;
    }
    Ok(v)
}

fn normalize(v: &mut [Complex64]) {
    let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let inv = 1.0 / norm;
    for a in v.iter_mut() {
        *a *= inv;
    }
}

/// Haar-distributed unitary via Gram-Schmidt orthogonalization of a
/// complex Gaussian matrix.
///
/// Orthogonalizing with positive real normalization coefficients is the
/// phase-corrected QR construction: it fixes the gauge `R_ii > 0`, the one
/// choice of diagonal phases under which Q inherits the Haar measure from
/// the Gaussian ensemble. (A decomposition with any other diagonal-phase
/// gauge is biased and must be corrected by `diag(R_ii / |R_ii|)`.)
pub fn sample_haar_unitary<R: RngCore>(dim: usize, rng: &mut R) -> CMat {
    assert!(dim >= 1);
    let mut cols: Vec<Vec<Complex64>> = (0..dim)
        .map(|_| (0..dim).map(|_| complex_gaussian(rng)).collect())
        .collect();
    for j in 0..dim {
        // Two passes of modified Gram-Schmidt keep orthogonality at the
        // 1e-15 level even for unlucky draws.
        for _ in 0..2 {
            for i in 0..j {
                let proj = crate::state::inner_product_slices(&cols[i], &cols[j]);
                let (head, tail) = cols.split_at_mut(j);
                for (cj, ci) in tail[0].iter_mut().zip(head[i].iter()) {
                    *cj -= proj * ci;
                }
            }
        }
        normalize(&mut cols[j]);
    }
    CMat::from_fn(dim, dim, |r, c| cols[c][r])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{haar_moment_dense, hs_distance_sq, MomentMatrix};
    use crate::rng::seeded_rng;

    #[test]
    fn haar_state_norm_is_one() {
        let mut rng = seeded_rng(1);
        for _ in 0..100 {
            let v = sample_haar_state(16, &mut rng);
            let norm: f64 = v.iter().map(|a| a.norm_sqr()).sum();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn haar_state_first_component_mean() {
        let mut rng = seeded_rng(2);
        let d = 16;
        let samples = 100_000;
        let mut sum = 0.0;
        for _ in 0..samples {
            let v = sample_haar_state(d, &mut rng);
            sum += v[0].norm_sqr();
        }
        let mean = sum / samples as f64;
        // |<e0|phi>|^2 ~ Beta(1, D-1): mean 1/D, var ~ (D-1)/(D^2 (D+1)).
        let se = ((d as f64 - 1.0) / ((d * d) as f64 * (d as f64 + 1.0)) / samples as f64)
            .sqrt();
        assert!(
            (mean - 1.0 / d as f64).abs() < 3.0 * se,
            "mean {mean}, expected {} +- {se}",
            1.0 / d as f64
        );
    }

    #[test]
    fn haar_second_moment_matches_closed_form() {
        // Monte-Carlo estimate of the k=2 moment at D=2 against the
        // closed-form (I + SWAP)/6.
        let mut rng = seeded_rng(3);
        let d = 2;
        let samples = 100_000;
        let mut acc = CMat::zeros(4, 4);
        for _ in 0..samples {
            let v = sample_haar_state(d, &mut rng);
            let mut t = [Complex64::new(0.0, 0.0); 4];
            for a in 0..d {
                for b in 0..d {
                    t[a * d + b] = v[a] * v[b];
                }
            }
            for r in 0..4 {
                for c in 0..4 {
                    acc[(r, c)] += t[r] * t[c].conj();
                }
            }
        }
        let emp = acc.scale(Complex64::new(1.0 / samples as f64, 0.0));
        let mc = MomentMatrix::new(d, 2, emp).unwrap();
        let exact = haar_moment_dense(d, 2).unwrap();
        let dist = hs_distance_sq(&mc, &exact).unwrap();
        assert!(dist < 1e-3, "HS distance {dist}");
    }

    #[test]
    fn haar_invariance_under_fixed_unitary() {
        // First moment of {V |phi>} must match that of {|phi>} within MC error.
        let mut rng = seeded_rng(4);
        let d = 8;
        let v = sample_haar_unitary(d, &mut rng);
        let samples = 20_000;
        let mut m_plain = CMat::zeros(d, d);
        let mut m_rotated = CMat::zeros(d, d);
        for _ in 0..samples {
            let phi = sample_haar_state(d, &mut rng);
            let rot = v.mul_vec(&phi);
            for r in 0..d {
                for c in 0..d {
                    m_plain[(r, c)] += phi[r] * phi[c].conj();
                    m_rotated[(r, c)] += rot[r] * rot[c].conj();
                }
            }
        }
        let scale = Complex64::new(1.0 / samples as f64, 0.0);
        let diff = m_plain.scale(scale).max_abs_diff(&m_rotated.scale(scale));
        assert!(diff < 6.0 / (samples as f64).sqrt(), "diff {diff}");
    }

    #[test]
    fn subspace_state_support_and_singleton() {
        let mut rng = seeded_rng(5);
        let indices = [2usize, 3, 5, 8, 13];
        let v = sample_haar_state_in_subspace(&indices, 16, &mut rng).unwrap();
        for (i, amp) in v.iter().enumerate() {
            if indices.contains(&i) {
                continue;
            }
            assert_eq!(amp.norm_sqr(), 0.0, "support leaked to index {i}");
        }
        let single = sample_haar_state_in_subspace(&[7], 16, &mut rng).unwrap();
        assert!((single[7].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn subspace_rejects_bad_sets() {
        let mut rng = seeded_rng(6);
        assert!(sample_haar_state_in_subspace(&[], 4, &mut rng).is_err());
        assert!(sample_haar_state_in_subspace(&[1, 1], 4, &mut rng).is_err());
        assert!(sample_haar_state_in_subspace(&[4], 4, &mut rng).is_err());
    }

    #[test]
    fn subspace_first_moment_is_scaled_projector() {
        let mut rng = seeded_rng(7);
        let dim = 81;
        let indices: Vec<usize> = (0..15).map(|i| i * 5 + 1).collect();
        let samples = 100_000;
        let k = indices.len();
        // Accumulate only the subspace block; everything else is exactly 0.
        let mut acc = CMat::zeros(k, k);
        for _ in 0..samples {
            let v = sample_haar_state_in_subspace(&indices, dim, &mut rng).unwrap();
            for (r, &ir) in indices.iter().enumerate() {
                for (c, &ic) in indices.iter().enumerate() {
                    acc[(r, c)] += v[ir] * v[ic].conj();
                }
            }
        }
        let emp = acc.scale(Complex64::new(1.0 / samples as f64, 0.0));
        let expect = CMat::identity(k).scale(Complex64::new(1.0 / k as f64, 0.0));
        let dist = emp.sub(&expect).frobenius_sq();
        assert!(dist < 1e-3, "HS distance^2 {dist}");
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = seeded_rng(8);
        for dim in [1usize, 2, 3, 9, 16] {
            for _ in 0..20 {
                let u = sample_haar_unitary(dim, &mut rng);
                assert!(u.unitarity_defect() < 1e-12, "dim {dim}");
            }
        }
    }

    #[test]
    fn haar_unitary_dim_one_is_uniform_phase() {
        let mut rng = seeded_rng(9);
        let mut sum = Complex64::new(0.0, 0.0);
        let samples = 20_000;
        for _ in 0..samples {
            let u = sample_haar_unitary(1, &mut rng);
            let z = u[(0, 0)];
            assert!((z.norm() - 1.0).abs() < 1e-12);
            sum += z;
        }
        // Mean of a uniform phase vanishes like 1/sqrt(samples).
        assert!(sum.norm() / (samples as f64) < 4.0 / (samples as f64).sqrt());
    }

    #[test]
    fn haar_unitary_entry_mean() {
        let mut rng = seeded_rng(10);
        let m = 3;
        let samples = 100_000;
        let mut sum = 0.0;
        for _ in 0..samples {
            let u = sample_haar_unitary(m, &mut rng);
            sum += u[(0, 0)].norm_sqr();
        }
        let mean = sum / samples as f64;
        // |U_00|^2 ~ Beta(1, m-1): mean 1/3, var 1/18.
        let se = (1.0 / 18.0 / samples as f64).sqrt();
        assert!((mean - 1.0 / 3.0).abs() < 3.0 * se, "mean {mean} +- {se}");
    }
}
