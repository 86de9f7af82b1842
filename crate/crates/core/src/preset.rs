//! The published measurement settings and their probability tables.

use std::f64::consts::PI;

use crate::quantum::{ExperimentProbabilities, Permutation, PhaseSettings, PhaseVector, Relabeling};

/// `(11 - 6 sqrt 3) / 2`, the noise threshold of the published settings.
pub fn paper_threshold() -> f64 {
    (11.0 - 6.0 * 3f64.sqrt()) / 2.0
}

/// Phases for `A1, A2` and `B1, B2` with identity relabeling.
pub fn paper_phases() -> PhaseSettings {
    PhaseSettings::new(
        [PhaseVector([0.0, PI / 3.0, -PI / 3.0]), PhaseVector([0.0, 0.0, 0.0])],
        [
            PhaseVector([0.0, PI / 6.0, -PI / 6.0]),
            PhaseVector([0.0, -PI / 6.0, PI / 6.0]),
        ],
    )
}

/// Outcome relabeling that maps the tables computed from [`paper_phases`]
/// onto the published tables. First match in lexicographic order; frozen from
/// an exhaustive search (re-derived in tests).
pub fn paper_relabeling() -> Relabeling {
    let p132 = Permutation::from_images([0, 2, 1]).expect("valid permutation");
    let p213 = Permutation::from_images([1, 0, 2]).expect("valid permutation");
    Relabeling {
        alice: [p132, p132],
        bob: [p132, p213],
    }
}

/// [`paper_phases`] with [`paper_relabeling`].
pub fn paper_preset() -> PhaseSettings {
    paper_phases().with_relabel(paper_relabeling())
}

/// The published noiseless tables, entered by hand.
///
/// Each table is constant on three classes of outcome pairs:
/// `{(1;1), (2;3), (3;2)}`, `{(1;2), (2;1), (3;3)}`, `{(2;2), (1;3), (3;1)}`.
pub fn published_tables() -> ExperimentProbabilities {
    let low = 1.0 / 27.0;
    let high = (4.0 + 2.0 * 3f64.sqrt()) / 27.0;
    let mid = (4.0 - 2.0 * 3f64.sqrt()) / 27.0;
    let table = |c11: f64, c12: f64, c22: f64| {
        let mut p = [[0.0; 3]; 3];
        for (a, b) in [(1, 1), (2, 3), (3, 2)] {
            p[a - 1][b - 1] = c11;
        }
        for (a, b) in [(1, 2), (2, 1), (3, 3)] {
            p[a - 1][b - 1] = c12;
        }
        for (a, b) in [(2, 2), (1, 3), (3, 1)] {
            p[a - 1][b - 1] = c22;
        }
        p
    };
    ExperimentProbabilities::from_tables([
        [table(low, high, mid), table(mid, high, low)],
        [table(high, low, mid), table(low, high, mid)],
    ])
}
