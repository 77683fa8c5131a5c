//! Minimum-power current allocation and the maximum sum power search.

mod benchmark;
mod closed_form;
mod dispatch;
mod profile;
mod randomization;
mod sdr;
mod solution;
mod timeshare;

pub use benchmark::{benchmark_uncoordinated, beta_max, BenchmarkTarget};
pub use closed_form::{mrt_direction, solve_p2_closed_form_single_rx};
pub use dispatch::{
    solve_p0_bisection, solve_p1, BisectionOutcome, MethodChoice, SolveOptions, DEFAULT_BISECTION_EPS,
};
pub use profile::{PowerProfile, PROFILE_SUM_TOL};
pub use randomization::{
    randomization_extract, scale_interval, RandomizationOptions, DEFAULT_DRAWS, DEFAULT_SEED,
};
pub use sdr::{
    p1_rank_bound, p1_sdr_problem, p2_rank_bound, p2_sdr_problem, rank_one_currents, solve_p1_sdr, solve_p2_sdr,
    SdrOutcome,
};
pub use solution::{BeamformingSolution, Method, Slot};
pub use timeshare::{solve_p1_ts_lp, time_sharing_from_sdr, MIN_TAU};
