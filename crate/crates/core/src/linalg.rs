//! Complex Hermitian helpers shared by the numeric modules.
//!
//! Everything here works on dense `nalgebra` matrices of `Complex<f64>`. The
//! matrices in this problem are tiny (antenna counts, so ≤ 8×8 in practice);
//! clarity and determinism win over cleverness.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const LN_2: f64 = std::f64::consts::LN_2;

/// Diagonal jitter added once when a Cholesky factorization fails on an
/// argument that should be positive definite up to rounding.
pub const CHOL_JITTER: f64 = 1e-12;

pub fn eye(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn zeros(rows: usize, cols: usize) -> CMat {
    CMat::zeros(rows, cols)
}

/// (M + M^H)/2. Used to strip rounding-level asymmetry before factorizations.
pub fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Largest entrywise deviation from Hermitian symmetry.
pub fn hermitian_defect(m: &CMat) -> f64 {
    let d = m - m.adjoint();
    d.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn frob_norm(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Re tr(M).
pub fn trace_re(m: &CMat) -> f64 {
    m.diagonal().iter().map(|z| z.re).sum()
}

/// Re tr(A B). Computed without forming the product.
pub fn trace_re_prod(a: &CMat, b: &CMat) -> f64 {
    debug_assert_eq!(a.ncols(), b.nrows());
    debug_assert_eq!(a.nrows(), b.ncols());
    let mut acc = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            let p = a[(i, j)] * b[(j, i)];
            acc += p.re;
        }
    }
    acc
}

fn cholesky_with_retry(m: &CMat) -> Result<nalgebra::Cholesky<Complex64, nalgebra::Dyn>> {
    let sym = hermitize(m);
    if let Some(ch) = sym.clone().cholesky() {
        return Ok(ch);
    }
    let jittered = &sym + eye(sym.nrows()) * Complex64::new(CHOL_JITTER, 0.0);
    jittered.cholesky().ok_or_else(|| {
        Error::Numerical(format!(
            "Cholesky failed twice on a {}x{} matrix that should be positive definite",
            m.nrows(),
            m.ncols()
        ))
    })
}

/// Natural log of det(M) for Hermitian positive definite M, via Cholesky.
/// One jitter retry on failure, then an error.
pub fn ln_det_hpd(m: &CMat) -> Result<f64> {
    let ch = cholesky_with_retry(m)?;
    let mut acc = 0.0;
    for i in 0..m.nrows() {
        acc += ch.l_dirty()[(i, i)].re.ln();
    }
    Ok(2.0 * acc)
}

/// Base-2 log of det(M) for Hermitian positive definite M.
pub fn log2_det_hpd(m: &CMat) -> Result<f64> {
    Ok(ln_det_hpd(m)? / LN_2)
}

/// A^{-1} B for Hermitian positive definite A.
pub fn solve_hpd(a: &CMat, b: &CMat) -> Result<CMat> {
    let ch = cholesky_with_retry(a)?;
    let mut x = b.clone();
    ch.solve_mut(&mut x);
    Ok(x)
}

/// A^{-1} for Hermitian positive definite A.
pub fn inv_hpd(a: &CMat) -> Result<CMat> {
    solve_hpd(a, &eye(a.nrows()))
}

/// Hermitian eigendecomposition M = Q diag(w) Q^H with real eigenvalues.
/// The input is symmetrized first; eigenvalues come back in nalgebra's order.
pub fn eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let se = nalgebra::SymmetricEigen::new(hermitize(m));
    (se.eigenvalues.iter().copied().collect(), se.eigenvectors)
}

/// Q diag(w) Q^H.
pub fn assemble_eigh(q: &CMat, w: &[f64]) -> CMat {
    let n = q.nrows();
    let mut scaled = q.clone();
    for (j, wj) in w.iter().enumerate() {
        for i in 0..n {
            scaled[(i, j)] *= Complex64::new(*wj, 0.0);
        }
    }
    scaled * q.adjoint()
}

/// Complex matrices serialize as row-major arrays of [re, im] pairs.
pub mod cxjson {
    use super::CMat;
    use num_complex::Complex64;
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn to_rows(m: &CMat) -> Vec<Vec<[f64; 2]>> {
        (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
            .collect()
    }

    pub fn from_rows(rows: &[Vec<[f64; 2]>]) -> Result<CMat, String> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err("ragged complex matrix rows".into());
        }
        Ok(CMat::from_fn(nrows, ncols, |i, j| {
            Complex64::new(rows[i][j][0], rows[i][j][1])
        }))
    }

    /// serde adapter for a single complex matrix field.
    pub mod cmat {
        use super::*;

        pub fn serialize<S: Serializer>(m: &CMat, s: S) -> Result<S::Ok, S::Error> {
            to_rows(m).serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMat, D::Error> {
            let rows = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
            from_rows(&rows).map_err(D::Error::custom)
        }
    }

    /// serde adapter for a list of complex matrices.
    pub mod cmat_list {
        use super::*;

        pub fn serialize<S: Serializer>(ms: &[CMat], s: S) -> Result<S::Ok, S::Error> {
            ms.iter().map(to_rows).collect::<Vec<_>>().serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<CMat>, D::Error> {
            let all = Vec::<Vec<Vec<[f64; 2]>>>::deserialize(d)?;
            all.iter()
                .map(|rows| from_rows(rows).map_err(D::Error::custom))
                .collect()
        }
    }
}
