use num_complex::Complex64;

use crate::channel::GvChannel;
use crate::error::{Error, Result};
use crate::linalg::{
    eigh, eye, frob_norm, hermitize, inv_hpd, ln_det_hpd, solve_hpd, trace_re_prod, CMat,
};
use crate::rates::{gv_secrecy_objective, DecoderMode, PowerBudget, PrecoderSet};

use super::{bob_received_cov, eve_received_cov, SolveTrace, SolverOptions, StopReason};

/// Shared state of one alternating-minimization sweep: receive filters,
/// mean-square-error weights, and Bob's received covariance they were built
/// from.
#[derive(Clone, Debug)]
pub struct WmmseState {
    pub w: Vec<CMat>,
    pub u: Vec<CMat>,
    pub a1: CMat,
}

impl WmmseState {
    pub fn compute(ch: &GvChannel, v: &PrecoderSet) -> Result<Self> {
        let w = mmse_receivers(ch, v)?;
        let u = weight_update(ch, v, &w)?;
        Ok(Self { w, u, a1: bob_received_cov(ch, &v.covariances()) })
    }
}

fn check_precoders(ch: &GvChannel, v: &PrecoderSet) -> Result<()> {
    if v.users() != ch.users() {
        return Err(Error::invalid("precoder count must match user count"));
    }
    for (k, (vk, h)) in v.v.iter().zip(&ch.h).enumerate() {
        if vk.nrows() != h.ncols() || vk.ncols() == 0 {
            return Err(Error::invalid(format!(
                "precoder for user {k} must have {} rows",
                h.ncols()
            )));
        }
        if vk.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid(format!("non-finite precoder entry for user {k}")));
        }
    }
    Ok(())
}

/// Linear MMSE receive filters W_k = A1^{-1} H_k V_k, where A1 is Bob's
/// received covariance under the given precoders.
pub fn mmse_receivers(ch: &GvChannel, v: &PrecoderSet) -> Result<Vec<CMat>> {
    ch.validate()?;
    check_precoders(ch, v)?;
    let a1 = bob_received_cov(ch, &v.covariances());
    (0..ch.users())
        .map(|k| solve_hpd(&a1, &(&ch.h[k] * &v.v[k])))
        .collect()
}

/// Per-user error covariance W^H A1 W − W^H H V − V^H H^H W + I.
fn mse_matrix(ch: &GvChannel, v: &PrecoderSet, w: &[CMat], k: usize, a1: &CMat) -> CMat {
    let hv = &ch.h[k] * &v.v[k];
    let cross = w[k].adjoint() * &hv;
    let j = w[k].adjoint() * a1 * &w[k] - &cross - cross.adjoint()
        + eye(v.v[k].ncols());
    hermitize(&j)
}

/// MSE weights U_k for the current filters.
///
/// Computes the direct inverse of the error covariance and, separately, the
/// matrix-inversion-lemma form I + V^H H^H D̂^{-1} H V built from the
/// interference-plus-noise covariance D̂_k. The two must agree to 1e-8
/// relative; disagreement signals broken upstream state and is an error.
pub fn weight_update(ch: &GvChannel, v: &PrecoderSet, w: &[CMat]) -> Result<Vec<CMat>> {
    ch.validate()?;
    check_precoders(ch, v)?;
    if w.len() != ch.users() {
        return Err(Error::invalid("filter count must match user count"));
    }
    let a1 = bob_received_cov(ch, &v.covariances());
    let mut out = Vec::with_capacity(ch.users());
    for k in 0..ch.users() {
        let j = mse_matrix(ch, v, w, k, &a1);
        let direct = inv_hpd(&j).map_err(|_| {
            Error::Numerical(format!("error covariance for user {k} is singular"))
        })?;
        let hv = &ch.h[k] * &v.v[k];
        let d_hat = hermitize(&(&a1 - &hv * hv.adjoint()));
        let lemma = hermitize(&(eye(hv.ncols()) + hv.adjoint() * solve_hpd(&d_hat, &hv)?));
        let rel = frob_norm(&(&direct - &lemma)) / frob_norm(&lemma).max(1e-300);
        if rel > 1e-8 {
            return Err(Error::Numerical(format!(
                "weight forms for user {k} disagree by {rel:.2e}; filters are not MMSE"
            )));
        }
        out.push(lemma);
    }
    Ok(out)
}

/// Per-user precoders minimizing the weighted-MSE surrogate under the trace
/// constraints, via the Lagrangian stationarity system
/// (Σ_j H_k^H W_j U_j W_j^H H_k + G_k^H A0^{-1} G_k + λI) V_k = H_k^H W_k U_k
/// with λ ≥ 0 found by bisection on the transmit power.
pub fn precoder_update(
    ch: &GvChannel,
    w: &[CMat],
    u: &[CMat],
    a0: &CMat,
    budget: &PowerBudget,
    opts: &SolverOptions,
) -> Result<PrecoderSet> {
    ch.validate()?;
    opts.validate()?;
    let k_users = ch.users();
    if w.len() != k_users || u.len() != k_users || budget.users() != k_users {
        return Err(Error::invalid("filters, weights, and budget must match user count"));
    }
    let e = ch.g[0].nrows();
    if a0.nrows() != e || a0.ncols() != e {
        return Err(Error::invalid("anchor covariance must match Eve's antenna count"));
    }
    let a0_inv = inv_hpd(a0)?;

    let mut v_out = Vec::with_capacity(k_users);
    for k in 0..k_users {
        let t = ch.h[k].ncols();
        let mut sys = ch.g[k].adjoint() * &a0_inv * &ch.g[k];
        for j in 0..k_users {
            let hw = ch.h[k].adjoint() * &w[j];
            sys += &hw * &u[j] * hw.adjoint();
        }
        let sys = hermitize(&sys);
        let rhs = ch.h[k].adjoint() * &w[k] * &u[k];

        let (mut lam, q) = eigh(&sys);
        if lam.iter().cloned().fold(f64::INFINITY, f64::min) < 1e-12 {
            for l in lam.iter_mut() {
                *l += 1e-12;
            }
        }
        let qr = q.adjoint() * &rhs;
        let phi: Vec<f64> =
            (0..t).map(|i| qr.row(i).iter().map(|z| z.norm_sqr()).sum()).collect();

        let p_k = budget.p[k];
        let tol = opts.power_tol_rel * p_k;
        let power_at = |shift: f64| -> f64 {
            phi.iter().zip(&lam).map(|(&f, &l)| f / (l + shift).powi(2)).sum()
        };

        let shift = if power_at(0.0) <= p_k + tol {
            0.0
        } else {
            let mut lo = 0.0;
            let mut hi = (phi.iter().sum::<f64>() / p_k).sqrt();
            let mut found = hi;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let p = power_at(mid);
                if (p - p_k).abs() <= tol {
                    found = mid;
                    break;
                }
                if p > p_k {
                    lo = mid;
                } else {
                    hi = mid;
                    found = hi;
                }
            }
            found
        };

        let scaled: Vec<f64> = lam.iter().map(|&l| 1.0 / (l + shift)).collect();
        let mut back = qr.clone();
        for (i, s) in scaled.iter().enumerate() {
            for z in back.row_mut(i).iter_mut() {
                *z *= Complex64::new(*s, 0.0);
            }
        }
        let mut v_k = &q * back;
        // the bisection tolerance can overshoot the budget; pull back onto it
        let power: f64 = v_k.iter().map(|z| z.norm_sqr()).sum();
        if power > p_k {
            v_k *= Complex64::new((p_k / power).sqrt(), 0.0);
        }
        v_out.push(v_k);
    }
    Ok(PrecoderSet { v: v_out })
}

/// Weighted-MMSE cost of a precoder set in nats: Σ_k [tr(U_k J_k) −
/// ln det U_k] plus the exact leakage log-determinant. This is the quantity
/// each inner iteration decreases.
fn wmmse_cost(ch: &GvChannel, v: &PrecoderSet, w: &[CMat], u: &[CMat]) -> Result<f64> {
    let covs = v.covariances();
    let a1 = bob_received_cov(ch, &covs);
    let mut c = ln_det_hpd(&eve_received_cov(ch, &covs))?;
    for k in 0..ch.users() {
        let j = mse_matrix(ch, v, w, k, &a1);
        c += trace_re_prod(&u[k], &j) - ln_det_hpd(&u[k])?;
    }
    Ok(c)
}

/// Independent-decoding secrecy sum-rate maximizer.
///
/// Outer iterations refresh the receive filters and MSE weights; inner
/// iterations re-anchor the leakage linearization at the current precoders
/// and solve the per-user weighted-MSE problems exactly. The inner cost is
/// nonincreasing; an inner step that fails to decrease it means that loop
/// has converged and is not applied. The reported objective is the
/// unclipped secrecy sum rate under per-user decoding.
pub fn wmmse_inde_secrecy(
    ch: &GvChannel,
    budget: &PowerBudget,
    opts: &SolverOptions,
) -> Result<(PrecoderSet, SolveTrace)> {
    ch.validate()?;
    opts.validate()?;
    let dims = ch.dims();
    if budget.users() != dims.k {
        return Err(Error::invalid("budget and channel disagree on user count"));
    }

    let mut v = PrecoderSet::white(&dims.t, budget);
    let amp = opts.init_power_fraction.sqrt();
    for m in v.v.iter_mut() {
        *m *= Complex64::new(amp, 0.0);
    }

    let mut obj = gv_secrecy_objective(ch, &v.covariances(), DecoderMode::Independent)?;
    let mut objective_bits = vec![obj];
    let mut surrogate = Vec::new();
    let mut stop = StopReason::IterationCap;
    let mut iterations = opts.max_outer_iters;

    for it in 0..opts.max_outer_iters {
        let w = mmse_receivers(ch, &v)?;
        let u = weight_update(ch, &v, &w)?;

        let mut seg = vec![wmmse_cost(ch, &v, &w, &u)?];
        for _ in 0..opts.max_inner_iters {
            let a0 = eve_received_cov(ch, &v.covariances());
            let v_new = precoder_update(ch, &w, &u, &a0, budget, opts)?;
            let c_cur = *seg.last().expect("segment starts nonempty");
            let c_new = wmmse_cost(ch, &v_new, &w, &u)?;
            if c_new > c_cur {
                break;
            }
            seg.push(c_new);
            v = v_new;
            if c_cur - c_new <= opts.rel_tol * c_cur.abs().max(1.0) {
                break;
            }
        }
        surrogate.push(seg);

        let new_obj = gv_secrecy_objective(ch, &v.covariances(), DecoderMode::Independent)?;
        objective_bits.push(new_obj);
        let delta = (new_obj - obj).abs();
        obj = new_obj;
        if delta <= opts.rel_tol * obj.abs().max(1.0) {
            stop = StopReason::Converged;
            iterations = it + 1;
            break;
        }
    }

    let trace = SolveTrace { objective_bits, surrogate, iterations, stop };
    Ok((v, trace))
}
