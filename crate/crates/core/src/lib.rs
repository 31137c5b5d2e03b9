//! Rate regions and secrecy-rate optimization for multi-user channels with an
//! eavesdropper, where every user sends both a confidential and an open message.
//!
//! The library has five parts:
//!
//! * [`channel`]: discrete-memoryless and Gaussian-vector channel models, plus
//!   the seeded random draw (disc geometry, pathloss, log-normal shadowing,
//!   Rayleigh fading) used by the Monte Carlo harness.
//! * [`rates`]: mutual-information functionals. Discrete values by exact
//!   marginalization, Gaussian-vector values by closed-form log-det
//!   expressions; sum-rate summaries for joint and per-user decoding.
//! * [`regions`]: achievable-rate regions as explicit linear inequality
//!   systems over the `2K` rate coordinates, membership tests, dummy-rate
//!   feasibility witnesses, and the two-user open/secret reclassification
//!   algebra with its counterexample search.
//! * [`solvers`]: the two iterative precoder designs (difference-of-convex
//!   surrogate ascent for joint decoding, weighted-MMSE descent for per-user
//!   decoding), the on/off vertex search for single-antenna users, a grid
//!   exhaustive-search baseline, and the shared PSD-projection machinery.
//! * [`sim`]: seeded Monte Carlo experiments (convergence traces, CDFs,
//!   power/antenna sweeps) with deterministic CSV/JSON output.
//!
//! Rates are in bits per channel use throughout; powers are linear mW
//! internally with dBm accepted only at configuration boundaries.

pub mod channel;
pub mod error;
pub mod linalg;
pub mod rates;
pub mod regions;
pub mod sim;
pub mod solvers;

pub use channel::{
    dbm_to_linear, draw_gv_channel, draw_gv_channel_detailed, linear_to_dbm, ChannelDraw,
    DmChannel, DrawConfig, GvChannel, Placement, ProductPmf, SystemDims,
};
pub use error::{Error, Result};
pub use rates::{
    dm_mutual_info_table, gv_bob_info, gv_eve_info, gv_inde_bob_info, gv_mutual_info_table,
    gv_secrecy_objective, gv_sum_rates, CovarianceSet, DecoderMode, MutualInfoTable, PowerBudget,
    PrecoderSet, SumRates,
};
pub use regions::{
    classify_category, contains, counterexample_search, garbage_witness, inde_region, joint_region,
    rate_split_transform, two_user_regions, Constraint, Counterexample, GarbageWitness, RateTuple,
    Region, TwoUserInfo, TwoUserRegions,
};
pub use sim::{
    aggregate_cdf, emit_results, results_to_csv, run_experiment, run_experiment_threads, Cdf,
    EmitFormat, ExperimentBlock, ExperimentConfig, ExperimentKind, GroupStat, ModeCdf, ResultSet,
    TraceSeries, TrialMode, TrialRecord,
};
pub use solvers::{
    exhaustive_search_grid, maximize_sum_capacity, mm_joint_secrecy, mmse_receivers,
    precoder_update, project_psd_trace, simo_vertex_search, solve_concave_subproblem,
    subproblem_gradient, subproblem_objective, weight_update, wmmse_inde_secrecy, GridSolution,
    MmState, SolveTrace, SolverOptions, StopReason, Subresult, WmmseState,
};
