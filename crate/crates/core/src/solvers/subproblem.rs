use num_complex::Complex64;

use crate::channel::GvChannel;
use crate::error::{Error, Result};
use crate::linalg::{
    eye, frob_norm, hermitian_defect, hermitize, inv_hpd, log2_det_hpd, trace_re_prod, CMat,
};
use crate::rates::{CovarianceSet, PowerBudget};

use super::psd::project_psd_trace;
use super::{SolverOptions, StopReason};

const LN_2: f64 = std::f64::consts::LN_2;

/// Outcome of one concave-subproblem solve.
#[derive(Clone, Debug)]
pub struct Subresult {
    pub f: CovarianceSet,
    pub objective_bits: f64,
    pub iterations: usize,
    pub stop: StopReason,
}

/// log₂det(I + Σ_k H_k F_k H_k^H / σ_B²) − Σ_k Re trace(L_k F_k).
///
/// The linear terms carry the 1/ln2 factor of the callers, so both pieces
/// are in bits.
pub fn subproblem_objective(ch: &GvChannel, f: &CovarianceSet, lin_terms: &[CMat]) -> Result<f64> {
    let m = normalized_bob_cov(ch, f);
    let mut val = log2_det_hpd(&m)?;
    for (l, fk) in lin_terms.iter().zip(&f.f) {
        val -= trace_re_prod(l, fk);
    }
    Ok(val)
}

/// Gradient of [`subproblem_objective`] with respect to each F_k, as
/// Hermitian matrices: H_k^H M^{-1} H_k / (σ_B² ln2) − L_k.
pub fn subproblem_gradient(
    ch: &GvChannel,
    f: &CovarianceSet,
    lin_terms: &[CMat],
) -> Result<Vec<CMat>> {
    let m = normalized_bob_cov(ch, f);
    let m_inv = inv_hpd(&m)?;
    let scale = Complex64::new(1.0 / (ch.sigma_b2 * LN_2), 0.0);
    let mut grads = Vec::with_capacity(ch.users());
    for (k, l) in lin_terms.iter().enumerate() {
        let g = ch.h[k].adjoint() * &m_inv * &ch.h[k] * scale;
        grads.push(hermitize(&(g - l)));
    }
    Ok(grads)
}

fn normalized_bob_cov(ch: &GvChannel, f: &CovarianceSet) -> CMat {
    let b = ch.h[0].nrows();
    let mut acc = eye(b);
    let inv_noise = Complex64::new(1.0 / ch.sigma_b2, 0.0);
    for k in 0..ch.users() {
        acc += &ch.h[k] * &f.f[k] * ch.h[k].adjoint() * inv_noise;
    }
    hermitize(&acc)
}

fn check_lin_terms(ch: &GvChannel, lin_terms: &[CMat]) -> Result<()> {
    if lin_terms.len() != ch.users() {
        return Err(Error::invalid("need one linear term per user"));
    }
    for (k, l) in lin_terms.iter().enumerate() {
        let t = ch.h[k].ncols();
        if l.nrows() != t || l.ncols() != t {
            return Err(Error::invalid(format!(
                "linear term for user {k} must be {t}x{t}"
            )));
        }
        if hermitian_defect(l) > 1e-8 * frob_norm(l).max(1.0) {
            return Err(Error::invalid(format!(
                "linear term for user {k} must be Hermitian"
            )));
        }
    }
    Ok(())
}

/// Maximize the concave surrogate over the per-user power region
/// {F_k ⪰ 0, trace(F_k) ≤ P_k} by projected gradient ascent with a
/// backtracking line search. Deterministic; warm-startable via `start`.
pub fn solve_concave_subproblem(
    ch: &GvChannel,
    lin_terms: &[CMat],
    budget: &PowerBudget,
    opts: &SolverOptions,
    start: Option<&CovarianceSet>,
) -> Result<Subresult> {
    ch.validate()?;
    opts.validate()?;
    check_lin_terms(ch, lin_terms)?;
    let dims = ch.dims();
    if budget.users() != dims.k {
        return Err(Error::invalid("budget and channel disagree on user count"));
    }

    let mut f = match start {
        Some(s) => {
            if s.users() != dims.k || s.f.iter().zip(&dims.t).any(|(m, &t)| m.nrows() != t) {
                return Err(Error::invalid("start covariances have wrong shapes"));
            }
            s.clone()
        }
        None => {
            let mut w = CovarianceSet::white(&dims.t, budget);
            for m in w.f.iter_mut() {
                *m *= Complex64::new(opts.init_power_fraction, 0.0);
            }
            w
        }
    };
    // Clean up the starting point so the line search begins feasible.
    for k in 0..dims.k {
        f.f[k] = project_psd_trace(&f.f[k], budget.p[k]);
    }

    let budget_scale = budget.p.iter().cloned().fold(f64::MIN, f64::max);
    let mut obj = subproblem_objective(ch, &f, lin_terms)?;
    let mut step_norm = opts.step_init;
    let mut stop = StopReason::IterationCap;
    let mut iterations = opts.max_subproblem_iters;

    for it in 0..opts.max_subproblem_iters {
        let grads = subproblem_gradient(ch, &f, lin_terms)?;
        let gnorm = grads.iter().map(|g| frob_norm(g).powi(2)).sum::<f64>().sqrt();
        if gnorm == 0.0 {
            stop = StopReason::Converged;
            iterations = it;
            break;
        }

        let mut accepted = None;
        for _ in 0..opts.max_backtracks {
            let t = step_norm * budget_scale / gnorm;
            let mut trial = f.clone();
            let mut move2 = 0.0;
            for k in 0..dims.k {
                let stepped = &f.f[k] + &grads[k] * Complex64::new(t, 0.0);
                trial.f[k] = project_psd_trace(&stepped, budget.p[k]);
                move2 += frob_norm(&(&trial.f[k] - &f.f[k])).powi(2);
            }
            if move2.sqrt() <= opts.grad_tol * budget_scale {
                break;
            }
            let tobj = subproblem_objective(ch, &trial, lin_terms)?;
            if tobj >= obj + opts.armijo_c * move2 / t {
                accepted = Some((trial, tobj));
                break;
            }
            step_norm *= opts.backtrack;
        }

        let Some((next_f, next_obj)) = accepted else {
            stop = StopReason::Converged;
            iterations = it;
            break;
        };
        let delta = next_obj - obj;
        f = next_f;
        obj = next_obj;
        step_norm = (step_norm / opts.backtrack).min(1e6);
        if delta <= opts.rel_tol * obj.abs().max(1.0) {
            stop = StopReason::Converged;
            iterations = it + 1;
            break;
        }
    }

    Ok(Subresult { f, objective_bits: obj, iterations, stop })
}

/// Sum-capacity covariances for Bob alone: the subproblem with zero linear
/// terms.
pub fn maximize_sum_capacity(
    ch: &GvChannel,
    budget: &PowerBudget,
    opts: &SolverOptions,
) -> Result<CovarianceSet> {
    let zeros: Vec<CMat> = ch.h.iter().map(|h| crate::linalg::zeros(h.ncols(), h.ncols())).collect();
    Ok(solve_concave_subproblem(ch, &zeros, budget, opts, None)?.f)
}
