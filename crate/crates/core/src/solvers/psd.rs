use num_complex::Complex64;

use crate::linalg::{assemble_eigh, eigh, hermitize, zeros, CMat};

/// Euclidean projection of a Hermitian matrix onto {F ⪰ 0, trace(F) ≤ p}.
///
/// Eigendecompose, clip negative eigenvalues, and if the clipped trace still
/// exceeds the budget, subtract a common water level τ chosen so that
/// Σ max(0, λ_i − τ) = p. The projection acts on eigenvalues only, so the
/// eigenvectors are reused for reassembly.
pub fn project_psd_trace(m: &CMat, p: f64) -> CMat {
    let n = m.nrows();
    if p <= 0.0 {
        return zeros(n, n);
    }
    let sym = hermitize(m);
    let (mut lam, q) = eigh(&sym);
    for v in lam.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let total: f64 = lam.iter().sum();
    if total > p {
        let tau = water_level(&lam, p);
        for v in lam.iter_mut() {
            *v = (*v - tau).max(0.0);
        }
    }
    assemble_eigh(&q, &lam)
}

/// τ such that Σ max(0, λ_i − τ) = p, assuming Σ max(0, λ_i) > p.
/// Largest-prefix scan over the sorted eigenvalues.
fn water_level(lam: &[f64], p: f64) -> f64 {
    let mut sorted: Vec<f64> = lam.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite eigenvalues"));
    let mut prefix = 0.0;
    let mut tau = 0.0;
    for (m, &v) in sorted.iter().enumerate() {
        prefix += v;
        let cand = (prefix - p) / (m + 1) as f64;
        if cand < v {
            tau = cand;
        } else {
            break;
        }
    }
    tau.max(0.0)
}

#[allow(dead_code)]
pub(crate) fn diag_cmat(d: &[f64]) -> CMat {
    let n = d.len();
    CMat::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new(d[i], 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}
