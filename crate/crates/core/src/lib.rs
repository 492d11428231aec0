//! Computational toolkit for `u_n = A m! + B s` where `u_n` is a ternary
//! recurrence with a double characteristic root, with Cullen and Woodall
//! numbers as the worked instance.

pub mod arith;
pub mod bounds;
pub mod error;
pub mod lifting;
pub mod pipeline;
pub mod recurrence;
pub mod reference;
pub mod scan;
pub mod solve;
pub mod valuation;

pub use bounds::{
    audit, compute_xy, invert_log_bound, lemma_bounds, matveev_log_lower, prime_pi_and_m, theorem2_bound,
    yu_valuation_upper, BoundReport,
};
pub use error::{Error, Result};
pub use lifting::{find_residues, lift, max_valuation_below, LiftResult, LiftTask, Target, ValuationBound};
pub use pipeline::{reproduce, Bundle, PipelineConfig};
pub use recurrence::{derive_closed_form, eval_term, is_degenerate, rational_height, ClosedForm, RecurrenceSpec};
pub use scan::{max_shifted_nu2, SUnitBox, ScanOptions, ScanReport, Shift};
pub use solve::{smooth_decompose, solve_factorial_sunit, Family, Smoothness, SolutionRecord, SolveReport};
pub use valuation::{nu, nu2_truncated, nu_factorial, Nu2, TruncatedResidue};
