use serde::{Deserialize, Serialize};

use crate::channel::GvChannel;
use crate::error::{Error, Result};
use crate::rates::{gv_secrecy_objective, CovarianceSet, DecoderMode, PowerBudget};

/// Evaluation cap for the grid search, counting objective evaluations.
pub const GRID_EVAL_CAP: u128 = 100_000_000;

/// Best power vector found by an enumeration baseline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSolution {
    pub powers: Vec<f64>,
    pub objective_bits: f64,
    pub evaluations: u64,
}

fn ensure_single_antenna(ch: &GvChannel) -> Result<()> {
    if ch.h.iter().any(|h| h.ncols() != 1) {
        return Err(Error::invalid(
            "power-vector search needs single-antenna transmitters",
        ));
    }
    Ok(())
}

/// Ties on the objective prefer fewer active users, then the
/// lexicographically smaller power vector, so the winner does not depend on
/// enumeration order.
fn improves(obj: f64, powers: &[f64], best: &Option<GridSolution>) -> bool {
    let Some(b) = best else { return true };
    if obj != b.objective_bits {
        return obj > b.objective_bits;
    }
    let active = powers.iter().filter(|&&p| p > 0.0).count();
    let best_active = b.powers.iter().filter(|&&p| p > 0.0).count();
    if active != best_active {
        return active < best_active;
    }
    powers < b.powers.as_slice()
}

/// Joint-decoding secrecy objective over the 2^K on/off power vertices.
/// For single-antenna transmitters the optimum of the joint problem sits at
/// one of these vertices, so this is an exact baseline at that scale.
pub fn simo_vertex_search(ch: &GvChannel, budget: &PowerBudget) -> Result<GridSolution> {
    ch.validate()?;
    ensure_single_antenna(ch)?;
    let k = ch.users();
    if budget.users() != k {
        return Err(Error::invalid("budget and channel disagree on user count"));
    }
    if k >= 64 {
        return Err(Error::CapExceeded {
            what: "vertex enumeration".into(),
            needed: 1u128 << k.min(127),
            cap: GRID_EVAL_CAP,
            unit: "evaluations",
        });
    }
    let mut best: Option<GridSolution> = None;
    let mut evaluations = 0u64;
    for mask in 0u64..(1u64 << k) {
        let powers: Vec<f64> = (0..k)
            .map(|i| if mask >> i & 1 == 1 { budget.p[i] } else { 0.0 })
            .collect();
        let f = CovarianceSet::from_powers(&powers);
        let obj = gv_secrecy_objective(ch, &f, DecoderMode::Joint)?;
        evaluations += 1;
        if improves(obj, &powers, &best) {
            best = Some(GridSolution { powers, objective_bits: obj, evaluations: 0 });
        }
    }
    let mut out = best.expect("at least the all-off vertex was evaluated");
    out.evaluations = evaluations;
    Ok(out)
}

fn grid_points(p: f64, rho: f64) -> Vec<f64> {
    let mut pts = Vec::new();
    let mut i = 0u64;
    loop {
        let v = i as f64 * rho;
        if v >= p - 1e-12 * p.max(1.0) {
            break;
        }
        pts.push(v);
        i += 1;
    }
    pts.push(p);
    pts
}

/// Exhaustive search over the per-user power grid {0, ρ, 2ρ, …, P_k} (the
/// budget itself is always included), under the chosen decoder's unclipped
/// secrecy objective. Errors when the grid would exceed [`GRID_EVAL_CAP`]
/// evaluations.
pub fn exhaustive_search_grid(
    ch: &GvChannel,
    budget: &PowerBudget,
    rho: f64,
    objective: DecoderMode,
) -> Result<GridSolution> {
    ch.validate()?;
    ensure_single_antenna(ch)?;
    let k = ch.users();
    if budget.users() != k {
        return Err(Error::invalid("budget and channel disagree on user count"));
    }
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::invalid("grid spacing must be positive and finite"));
    }

    // Bound the grid size arithmetically before materializing any axis, so
    // an absurdly small spacing fails fast instead of allocating.
    let approx_len = |p: f64| -> u128 {
        let r = p / rho;
        if !r.is_finite() || r > 1e30 {
            u128::MAX
        } else {
            r as u128 + 2
        }
    };
    let bound = budget
        .p
        .iter()
        .fold(1u128, |acc, &p| acc.saturating_mul(approx_len(p)));
    if bound > GRID_EVAL_CAP {
        return Err(Error::CapExceeded {
            what: "power grid".into(),
            needed: bound,
            cap: GRID_EVAL_CAP,
            unit: "evaluations",
        });
    }
    let axes: Vec<Vec<f64>> = budget.p.iter().map(|&p| grid_points(p, rho)).collect();

    let mut best: Option<GridSolution> = None;
    let mut evaluations = 0u64;
    let mut idx = vec![0usize; k];
    let mut powers = vec![0.0f64; k];
    loop {
        for (i, &j) in idx.iter().enumerate() {
            powers[i] = axes[i][j];
        }
        let f = CovarianceSet::from_powers(&powers);
        let obj = gv_secrecy_objective(ch, &f, objective)?;
        evaluations += 1;
        if improves(obj, &powers, &best) {
            best = Some(GridSolution {
                powers: powers.clone(),
                objective_bits: obj,
                evaluations: 0,
            });
        }
        // Odometer increment, user 0 fastest.
        let mut carry = 0;
        while carry < k {
            idx[carry] += 1;
            if idx[carry] < axes[carry].len() {
                break;
            }
            idx[carry] = 0;
            carry += 1;
        }
        if carry == k {
            break;
        }
    }
    let mut out = best.expect("grid holds at least one point");
    out.evaluations = evaluations;
    Ok(out)
}
