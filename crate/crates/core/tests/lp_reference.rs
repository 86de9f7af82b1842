//! Thresholds for fixed settings, frozen from an independent LP solver
//! (HiGHS via scipy) run on the same probability model.

use qutrit_ch::lhv::min_noise_lp;
use qutrit_ch::quantum::{experiment_probabilities, Noise, PhaseSettings};

const REFERENCE: [([f64; 12], f64); 11] = [
    ([0.0, 0.4, 1.3, 0.0, -0.2, 0.9, 0.0, 1.7, 0.1, 0.0, 0.6, -1.4], 0.0),
    (
        [0.3, 1.1, -0.7, 2.0, 0.4, 0.9, -1.3, 0.2, 2.8, 0.5, -0.6, 1.7],
        0.04566997433204386,
    ),
    ([0.0, 1.0, 2.0, 0.0, 0.5, 1.0, 0.0, -1.0, 0.3, 0.0, 0.9, 0.2], 0.0),
    ([0.0, 2.1, 4.2, 0.0, 0.0, 0.0, 0.0, 0.5, -0.5, 0.0, -0.5, 0.5], 0.0),
    (
        [0.0, 1.2, -1.0, 0.0, 0.1, 0.0, 0.0, 0.6, -0.4, 0.0, -0.4, 0.6],
        0.2953498615766845,
    ),
    ([1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 0.5, 1.5, 2.5, 3.5, 4.5, 5.5], 0.0),
    (
        [
            -0.084, 0.847, -1.364, -0.117, 0.145, -0.072, 0.287, 0.464, -0.516, 0.464, -0.36, 0.372,
        ],
        0.24361478871217399,
    ),
    (
        [
            -0.055, 1.209, -0.467, -0.081, -0.073, 0.301, -0.266, 0.436, -0.259, 0.174, -0.496, 0.725,
        ],
        0.14836467812073575,
    ),
    (
        [
            -0.848, 1.354, -1.335, -0.501, 0.083, 0.21, -0.133, 0.201, -0.516, -0.016, -0.102, 0.748,
        ],
        0.09222385505649403,
    ),
    (
        [
            0.058, 1.381, -1.109, -0.278, 0.175, 0.175, -0.064, 0.289, -0.455, -0.748, -0.317, 0.671,
        ],
        0.14300991433181146,
    ),
    (
        [
            -0.492, 1.066, -1.336, 0.227, -0.61, -0.274, 0.213, 0.871, -1.171, -0.149, -0.425, 0.341,
        ],
        0.07633799671255552,
    ),
];

#[test]
fn thresholds_match_reference_solver() {
    for (phases, expected) in REFERENCE {
        let exp0 = experiment_probabilities(&PhaseSettings::from_phases(phases), Noise::NONE).unwrap();
        let f = min_noise_lp(&exp0).unwrap().f_min.unwrap();
        assert!((f - expected).abs() < 1e-7, "{phases:?}: {f} vs {expected}");
    }
}
