//! Clauser-Horne-type Bell inequality for two maximally entangled qutrits
//! measured through tritters with phase shifters.
//!
//! * [`quantum`]: tritter unitaries and outcome probabilities under white noise.
//! * [`ch`]: the inequality, its expansion over deterministic strategies, and
//!   the analytic noise threshold.
//! * [`lhv`] and [`simplex`]: the linear-programming local-model oracle.
//! * [`optimizer`]: random-restart search for the best measurement phases.
//! * [`preset`]: the published settings and tables.

pub mod ch;
pub mod error;
pub mod lhv;
pub mod optimizer;
pub mod preset;
pub mod quantum;
pub mod simplex;

pub use ch::{
    analytic_threshold, appendix_decomposition, ch_coefficients, ch_lhs, deterministic_value, AnalyticThreshold,
    ChCoefficients, JointAtom, ThresholdStatus,
};
pub use error::{Error, Result};
pub use lhv::{lhv_feasible, marginals_of, min_noise_lp, JointDistribution, LpOutcome, LpStatus};
pub use optimizer::{optimize, optimize_from, threshold_objective, Method, OptimizationResult};
pub use quantum::{
    apply_relabeling, experiment_probabilities, find_matching_relabeling, joint_table, observable_unitary, singles,
    tritter_matrix, ComplexMatrix3, ExperimentProbabilities, Noise, Permutation, PhaseSettings, PhaseVector,
    ProbabilityTable, Relabeling,
};
pub use simplex::{simplex_solve, LpProblem, LpSolution};
