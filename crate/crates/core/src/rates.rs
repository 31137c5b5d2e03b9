//! Mutual-information and rate functionals.
//!
//! Discrete-memoryless values are computed exactly by marginalizing the joint
//! distribution; Gaussian-vector values come from closed-form log-det
//! expressions. Everything is in bits (base-2 logs). The two decoder modes
//! differ in Bob's side only: joint decoding sees the full input vector,
//! per-user decoding treats the other users' signals as noise.
//!
//! Subsets of users are bitmasks (bit k = user k), capped at 20 users.

use serde::{Deserialize, Serialize};

use crate::channel::{unpack_joint, DmChannel, GvChannel, ProductPmf};
use crate::error::{Error, Result};
use crate::linalg::{cxjson, eigh, eye, hermitian_defect, hermitize, log2_det_hpd, CMat};

/// Cap on the joint-distribution size |X_1|···|X_K|·|Y|·|Z| for exact DM
/// marginalization.
pub const DM_TABLE_CAP: u128 = 10_000_000;

/// Largest supported user count for subset bitmasks.
pub const MAX_USERS: usize = 20;

const HERM_TOL: f64 = 1e-10;
const PSD_TOL: f64 = 1e-10;
const BUDGET_SLACK: f64 = 1e-9;

/// Per-user transmit power budgets in linear mW.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerBudget {
    pub p: Vec<f64>,
}

impl PowerBudget {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() || p.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::invalid("power budgets must be positive and finite"));
        }
        Ok(Self { p })
    }

    /// Same budget for every user.
    pub fn uniform(users: usize, p_mw: f64) -> Result<Self> {
        Self::new(vec![p_mw; users])
    }

    pub fn from_dbm(users: usize, p_dbm: f64) -> Result<Self> {
        Self::uniform(users, crate::channel::dbm_to_linear(p_dbm))
    }

    pub fn users(&self) -> usize {
        self.p.len()
    }
}

/// Per-user transmit covariances F_k (T_k × T_k, Hermitian PSD).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovarianceSet {
    #[serde(with = "cxjson::cmat_list")]
    pub f: Vec<CMat>,
}

impl CovarianceSet {
    pub fn zeros(t: &[usize]) -> Self {
        Self { f: t.iter().map(|&n| CMat::zeros(n, n)).collect() }
    }

    /// Full-power white covariances (P_k/T_k)·I.
    pub fn white(t: &[usize], budget: &PowerBudget) -> Self {
        Self {
            f: t.iter()
                .zip(&budget.p)
                .map(|(&n, &p)| eye(n) * num_complex::Complex64::new(p / n as f64, 0.0))
                .collect(),
        }
    }

    /// Diagonal per-user covariances from scalar powers (single-antenna users).
    pub fn from_powers(powers: &[f64]) -> Self {
        Self {
            f: powers
                .iter()
                .map(|&p| CMat::from_element(1, 1, num_complex::Complex64::new(p, 0.0)))
                .collect(),
        }
    }

    pub fn users(&self) -> usize {
        self.f.len()
    }

    pub fn trace(&self, k: usize) -> f64 {
        crate::linalg::trace_re(&self.f[k])
    }

    /// Hermitian within 1e-10 and eigenvalues ≥ −1e-10.
    pub fn validate(&self) -> Result<()> {
        for (k, f) in self.f.iter().enumerate() {
            if f.nrows() != f.ncols() {
                return Err(Error::invalid(format!("covariance {k} is not square")));
            }
            if f.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::invalid(format!("covariance {k} has non-finite entries")));
            }
            if hermitian_defect(f) > HERM_TOL {
                return Err(Error::invalid(format!("covariance {k} is not Hermitian")));
            }
            let (w, _) = eigh(f);
            if w.iter().any(|&x| x < -PSD_TOL) {
                return Err(Error::invalid(format!(
                    "covariance {k} has a negative eigenvalue"
                )));
            }
        }
        Ok(())
    }

    pub fn check_budget(&self, budget: &PowerBudget) -> Result<()> {
        if budget.users() != self.users() {
            return Err(Error::invalid("budget and covariance counts differ"));
        }
        for k in 0..self.users() {
            if self.trace(k) > budget.p[k] + BUDGET_SLACK {
                return Err(Error::invalid(format!(
                    "covariance {k} trace {} exceeds budget {}",
                    self.trace(k),
                    budget.p[k]
                )));
            }
        }
        Ok(())
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            f: self.f.iter().map(|m| m * num_complex::Complex64::new(c, 0.0)).collect(),
        }
    }

    pub fn to_json_file(&self, path: &str) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn from_json_file(path: &str) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let f: Self = serde_json::from_str(&text)?;
        f.validate()?;
        Ok(f)
    }
}

/// Per-user beamformers V_k; the transmit covariance is V_k V_k^H.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrecoderSet {
    #[serde(with = "cxjson::cmat_list")]
    pub v: Vec<CMat>,
}

impl PrecoderSet {
    /// sqrt(P_k/T_k)·I, the full-power white starting point.
    pub fn white(t: &[usize], budget: &PowerBudget) -> Self {
        Self {
            v: t.iter()
                .zip(&budget.p)
                .map(|(&n, &p)| {
                    eye(n) * num_complex::Complex64::new((p / n as f64).sqrt(), 0.0)
                })
                .collect(),
        }
    }

    pub fn users(&self) -> usize {
        self.v.len()
    }

    /// trace(V_k V_k^H).
    pub fn power(&self, k: usize) -> f64 {
        self.v[k].iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn covariances(&self) -> CovarianceSet {
        CovarianceSet {
            f: self.v.iter().map(|v| hermitize(&(v * v.adjoint()))).collect(),
        }
    }

    pub fn check_budget(&self, budget: &PowerBudget) -> Result<()> {
        for k in 0..self.users() {
            if self.power(k) > budget.p[k] + BUDGET_SLACK {
                return Err(Error::invalid(format!(
                    "precoder {k} power {} exceeds budget {}",
                    self.power(k),
                    budget.p[k]
                )));
            }
        }
        Ok(())
    }
}

/// Bob's decoding strategy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecoderMode {
    /// Decode all users' codewords simultaneously.
    Joint,
    /// Decode each user treating the others as noise.
    Independent,
}

impl std::fmt::Display for DecoderMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DecoderMode::Joint => "joint",
            DecoderMode::Independent => "independent",
        })
    }
}

/// Sum-rate summary in bits per channel use.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SumRates {
    /// Total sum rate.
    pub r: f64,
    /// Sum secrecy rate, clipped at 0.
    pub rs: f64,
    /// Max sum open rate at that secrecy rate.
    pub ro: f64,
    /// Set when the unclipped secrecy rate was ≤ 0 and the whole sum rate is
    /// reported as open.
    pub all_open: bool,
}

/// Subset-indexed mutual informations: for every S ⊆ {users},
/// `bob_cond[S]` = I(X_S;Y|X_S̄) and `eve[S]` = I(X_S;Z), in bits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MutualInfoTable {
    users: usize,
    bob_cond: Vec<f64>,
    eve: Vec<f64>,
}

impl MutualInfoTable {
    /// Validates lengths (2^K), nonnegativity (tiny negatives are clamped to
    /// 0), zero entries at the empty set, and monotonicity under inclusion.
    pub fn new(users: usize, bob_cond: Vec<f64>, eve: Vec<f64>) -> Result<Self> {
        if users == 0 || users > MAX_USERS {
            return Err(Error::UnsupportedUserCount { supported: MAX_USERS, got: users });
        }
        let n = 1usize << users;
        if bob_cond.len() != n || eve.len() != n {
            return Err(Error::invalid(format!(
                "table needs {n} subset entries, got {}/{}",
                bob_cond.len(),
                eve.len()
            )));
        }
        let clamp = |name: &str, v: Vec<f64>| -> Result<Vec<f64>> {
            v.into_iter()
                .enumerate()
                .map(|(i, x)| {
                    if x < -1e-9 || !x.is_finite() {
                        Err(Error::Numerical(format!("{name}[{i:#b}] = {x} is not a valid value")))
                    } else {
                        Ok(x.max(0.0))
                    }
                })
                .collect()
        };
        let bob_cond = clamp("bob_cond", bob_cond)?;
        let eve = clamp("eve", eve)?;
        if bob_cond[0] != 0.0 || eve[0] != 0.0 {
            return Err(Error::invalid("empty-set entries must be zero"));
        }
        for mask in 1..n {
            for k in 0..users {
                if mask >> k & 1 == 1 {
                    let sub = mask & !(1 << k);
                    if bob_cond[mask] < bob_cond[sub] - 1e-9 || eve[mask] < eve[sub] - 1e-9 {
                        return Err(Error::Numerical(format!(
                            "table not monotone at subset {mask:#b}"
                        )));
                    }
                }
            }
        }
        Ok(Self { users, bob_cond, eve })
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn full_mask(&self) -> usize {
        (1 << self.users) - 1
    }

    /// I(X_S;Y|X_S̄).
    pub fn bob_cond(&self, mask: usize) -> f64 {
        self.bob_cond[mask]
    }

    /// I(X_S;Z).
    pub fn eve(&self, mask: usize) -> f64 {
        self.eve[mask]
    }

    /// Unconditional I(X_k;Y), the per-user rate when the other users are
    /// noise: chain rule gives I(X_k;Y) = bob_cond[full] − bob_cond[full∖{k}].
    pub fn bob_marginal(&self, k: usize) -> f64 {
        (self.bob_cond[self.full_mask()] - self.bob_cond[self.full_mask() & !(1 << k)]).max(0.0)
    }

    /// I(X_S;Z|X_S̄) = eve[full] − eve[S̄].
    pub fn eve_cond(&self, mask: usize) -> f64 {
        (self.eve[self.full_mask()] - self.eve[self.full_mask() ^ mask]).max(0.0)
    }
}

pub(crate) fn check_dm_cap(input_sizes: &[usize], bob: usize, eve: usize) -> Result<()> {
    let mut needed: u128 = bob as u128 * eve as u128;
    for &s in input_sizes {
        needed = needed.saturating_mul(s as u128);
    }
    if needed > DM_TABLE_CAP {
        return Err(Error::CapExceeded {
            what: "joint distribution",
            needed,
            cap: DM_TABLE_CAP,
            unit: "entries",
        });
    }
    Ok(())
}

fn xlog2x_sum_ratio(p_joint: f64, p_marg: f64) -> f64 {
    // contribution p·log2(p/q) with the 0·log 0 convention
    if p_joint > 0.0 {
        p_joint * (p_joint / p_marg).log2()
    } else {
        0.0
    }
}

/// Exact subset mutual-information table for a discrete channel under
/// independent inputs, by direct marginalization of p(x_1..x_K, y, z).
pub fn dm_mutual_info_table(ch: &DmChannel, pmf: &ProductPmf) -> Result<MutualInfoTable> {
    let users = ch.users();
    if pmf.users() != users {
        return Err(Error::invalid("pmf user count does not match channel"));
    }
    for k in 0..users {
        if pmf.pmf(k).len() != ch.input_sizes[k] {
            return Err(Error::invalid(format!("pmf {k} does not match alphabet size")));
        }
    }
    if users > MAX_USERS {
        return Err(Error::UnsupportedUserCount { supported: MAX_USERS, got: users });
    }
    check_dm_cap(&ch.input_sizes, ch.bob_size, ch.eve_size)?;

    let joint = ch.joint_input_size();
    let (ny, nz) = (ch.bob_size, ch.eve_size);

    let p_x: Vec<f64> = (0..joint).map(|x| pmf.joint_prob_packed(x)).collect();
    let mut py_x = vec![0.0; joint * ny];
    let mut pz_x = vec![0.0; joint * nz];
    for x in 0..joint {
        for y in 0..ny {
            for z in 0..nz {
                let p = ch.prob(x, y, z);
                py_x[x * ny + y] += p;
                pz_x[x * nz + z] += p;
            }
        }
    }
    let mut p_z = vec![0.0; nz];
    for x in 0..joint {
        for z in 0..nz {
            p_z[z] += p_x[x] * pz_x[x * nz + z];
        }
    }
    // H(Y|X_full), shared by every bob_cond entry
    let mut h_y_full = 0.0;
    for x in 0..joint {
        if p_x[x] == 0.0 {
            continue;
        }
        for y in 0..ny {
            let c = py_x[x * ny + y];
            if c > 0.0 {
                h_y_full -= p_x[x] * c * c.log2();
            }
        }
    }

    // packed index of the digits of `x` restricted to the users in `mask`
    let sub_index = |x: usize, mask: usize, digits: &mut [usize]| -> usize {
        unpack_joint(x, &ch.input_sizes, digits);
        let mut idx = 0;
        for k in (0..users).rev() {
            if mask >> k & 1 == 1 {
                idx = idx * ch.input_sizes[k] + digits[k];
            }
        }
        idx
    };
    let sub_size = |mask: usize| -> usize {
        (0..users)
            .filter(|k| mask >> k & 1 == 1)
            .map(|k| ch.input_sizes[k])
            .product()
    };

    let n = 1usize << users;
    let full = n - 1;
    let mut bob_cond = vec![0.0; n];
    let mut eve = vec![0.0; n];
    let mut digits = vec![0usize; users];
    for mask in 1..n {
        // I(X_S;Z) from the pair distribution p(x_S, z)
        let ns = sub_size(mask);
        let mut q = vec![0.0; ns * nz];
        for x in 0..joint {
            if p_x[x] == 0.0 {
                continue;
            }
            let s = sub_index(x, mask, &mut digits);
            for z in 0..nz {
                q[s * nz + z] += p_x[x] * pz_x[x * nz + z];
            }
        }
        let mut info = 0.0;
        for s in 0..ns {
            let p_s: f64 = q[s * nz..(s + 1) * nz].iter().sum();
            if p_s == 0.0 {
                continue;
            }
            for z in 0..nz {
                let pj = q[s * nz + z];
                if pj > 0.0 {
                    info += xlog2x_sum_ratio(pj, p_s * p_z[z]);
                }
            }
        }
        eve[mask] = info;

        // I(X_S;Y|X_S̄) = H(Y|X_S̄) − H(Y|X_full)
        let sbar = full ^ mask;
        let nsb = sub_size(sbar);
        let mut r = vec![0.0; nsb * ny];
        for x in 0..joint {
            if p_x[x] == 0.0 {
                continue;
            }
            let s = sub_index(x, sbar, &mut digits);
            for y in 0..ny {
                r[s * ny + y] += p_x[x] * py_x[x * ny + y];
            }
        }
        let mut h_y_sbar = 0.0;
        for s in 0..nsb {
            let p_s: f64 = r[s * ny..(s + 1) * ny].iter().sum();
            if p_s == 0.0 {
                continue;
            }
            for y in 0..ny {
                let pj = r[s * ny + y];
                if pj > 0.0 {
                    h_y_sbar -= pj * (pj / p_s).log2();
                }
            }
        }
        bob_cond[mask] = h_y_sbar - h_y_full;
    }
    MutualInfoTable::new(users, bob_cond, eve)
}

fn check_gv_args(ch: &GvChannel, f: &CovarianceSet, mask: usize) -> Result<()> {
    ch.validate()?;
    f.validate()?;
    let k = ch.users();
    if f.users() != k {
        return Err(Error::invalid("covariance count does not match channel"));
    }
    if k > MAX_USERS {
        return Err(Error::UnsupportedUserCount { supported: MAX_USERS, got: k });
    }
    if mask >> k != 0 {
        return Err(Error::invalid(format!("subset mask {mask:#b} out of range for {k} users")));
    }
    for j in 0..k {
        if f.f[j].nrows() != ch.h[j].ncols() {
            return Err(Error::invalid(format!("covariance {j} does not match antenna count")));
        }
    }
    Ok(())
}

fn gram_sum(mats: &[CMat], f: &CovarianceSet, mask: usize, rows: usize) -> CMat {
    let mut acc = CMat::zeros(rows, rows);
    for k in 0..mats.len() {
        if mask >> k & 1 == 1 {
            acc += &mats[k] * &f.f[k] * mats[k].adjoint();
        }
    }
    hermitize(&acc)
}

/// I(X_S;Y|X_S̄) = log₂ det(I_B + Σ_{k∈S} H_k F_k H_k^H / σ_B²), in bits.
pub fn gv_bob_info(ch: &GvChannel, f: &CovarianceSet, mask: usize) -> Result<f64> {
    check_gv_args(ch, f, mask)?;
    if mask == 0 {
        return Ok(0.0);
    }
    let b = ch.h[0].nrows();
    let m = eye(b) + gram_sum(&ch.h, f, mask, b) / num_complex::Complex64::new(ch.sigma_b2, 0.0);
    log2_det_hpd(&hermitize(&m))
}

/// I(X_S1;Z) = log₂ det(I_E + A_S1 (A_rest + σ_E² I)^{-1}), computed as
/// log₂ det(A_rest + A_S1 + σ_E² I) − log₂ det(A_rest + σ_E² I), in bits.
pub fn gv_eve_info(ch: &GvChannel, f: &CovarianceSet, s1_mask: usize) -> Result<f64> {
    check_gv_args(ch, f, s1_mask)?;
    if s1_mask == 0 {
        return Ok(0.0);
    }
    let e = ch.g[0].nrows();
    let full = (1usize << ch.users()) - 1;
    let sigma = eye(e) * num_complex::Complex64::new(ch.sigma_e2, 0.0);
    let rest = gram_sum(&ch.g, f, full ^ s1_mask, e) + &sigma;
    let all = gram_sum(&ch.g, f, s1_mask, e) + &rest;
    Ok(log2_det_hpd(&hermitize(&all))? - log2_det_hpd(&hermitize(&rest))?)
}

/// Per-user rate with the other users as noise:
/// log₂ det(H_k F_k H_k^H D_k^{-1} + I_B), D_k = Σ_{j≠k} H_j F_j H_j^H + σ_B² I.
pub fn gv_inde_bob_info(ch: &GvChannel, f: &CovarianceSet, k: usize) -> Result<f64> {
    let users = ch.users();
    if k >= users {
        return Err(Error::invalid(format!("user {k} out of range")));
    }
    check_gv_args(ch, f, 1 << k)?;
    let b = ch.h[0].nrows();
    let full = (1usize << users) - 1;
    let d = gram_sum(&ch.h, f, full ^ (1 << k), b)
        + eye(b) * num_complex::Complex64::new(ch.sigma_b2, 0.0);
    let all = gram_sum(&ch.h, f, 1 << k, b) + &d;
    Ok(log2_det_hpd(&hermitize(&all))? - log2_det_hpd(&hermitize(&d))?)
}

/// Unclipped sum secrecy rate for the given decoder mode: the optimizers'
/// objective, before any [·]⁺ reporting.
pub fn gv_secrecy_objective(ch: &GvChannel, f: &CovarianceSet, mode: DecoderMode) -> Result<f64> {
    let full = (1usize << ch.users()) - 1;
    let r = match mode {
        DecoderMode::Joint => gv_bob_info(ch, f, full)?,
        DecoderMode::Independent => {
            let mut acc = 0.0;
            for k in 0..ch.users() {
                acc += gv_inde_bob_info(ch, f, k)?;
            }
            acc
        }
    };
    Ok(r - gv_eve_info(ch, f, full)?)
}

/// Total, secrecy, and open sum rates for the given decoder mode. When the
/// unclipped secrecy rate is ≤ 0, the full sum rate is reported as open and
/// the result is flagged `all_open`.
pub fn gv_sum_rates(ch: &GvChannel, f: &CovarianceSet, mode: DecoderMode) -> Result<SumRates> {
    let full = (1usize << ch.users()) - 1;
    let r = match mode {
        DecoderMode::Joint => gv_bob_info(ch, f, full)?,
        DecoderMode::Independent => {
            let mut acc = 0.0;
            for k in 0..ch.users() {
                acc += gv_inde_bob_info(ch, f, k)?;
            }
            acc
        }
    };
    let ro_full = gv_eve_info(ch, f, full)?;
    let rs = r - ro_full;
    if rs > 0.0 {
        Ok(SumRates { r, rs, ro: ro_full, all_open: false })
    } else {
        Ok(SumRates { r, rs: 0.0, ro: r, all_open: true })
    }
}

/// Subset table for a Gaussian-vector channel at fixed covariances.
pub fn gv_mutual_info_table(ch: &GvChannel, f: &CovarianceSet) -> Result<MutualInfoTable> {
    let users = ch.users();
    if users > MAX_USERS {
        return Err(Error::UnsupportedUserCount { supported: MAX_USERS, got: users });
    }
    let n = 1usize << users;
    let mut bob_cond = vec![0.0; n];
    let mut eve = vec![0.0; n];
    for mask in 1..n {
        bob_cond[mask] = gv_bob_info(ch, f, mask)?;
        eve[mask] = gv_eve_info(ch, f, mask)?;
    }
    MutualInfoTable::new(users, bob_cond, eve)
}
