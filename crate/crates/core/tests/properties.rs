use std::f64::consts::TAU;

use proptest::prelude::*;
use qutrit_ch::ch::{analytic_threshold, ch_coefficients, ch_lhs, ThresholdStatus};
use qutrit_ch::lhv::{lhv_feasible, marginals_of, min_noise_lp, JointDistribution, FEASIBILITY_TOL};
use qutrit_ch::preset::{paper_preset, paper_threshold};
use qutrit_ch::quantum::{
    apply_relabeling, experiment_probabilities, observable_unitary, singles, Noise, Permutation, PhaseSettings,
    PhaseVector, Relabeling,
};

fn phases() -> impl Strategy<Value = [f64; 12]> {
    prop::array::uniform12(-TAU..TAU)
}

fn settings() -> impl Strategy<Value = PhaseSettings> {
    phases().prop_map(PhaseSettings::from_phases)
}

fn permutation() -> impl Strategy<Value = Permutation> {
    (0usize..6).prop_map(|i| Permutation::all()[i])
}

fn relabeling() -> impl Strategy<Value = Relabeling> {
    prop::array::uniform4(permutation()).prop_map(|p| Relabeling {
        alice: [p[0], p[1]],
        bob: [p[2], p[3]],
    })
}

fn distribution() -> impl Strategy<Value = JointDistribution> {
    prop::collection::vec(0.0f64..1.0, 81).prop_map(|raw| {
        let total: f64 = raw.iter().sum::<f64>() + 1e-12;
        let mut w = [0.0; 81];
        for (dst, v) in w.iter_mut().zip(&raw) {
            *dst = v / total;
        }
        let fix: f64 = 1.0 - w.iter().sum::<f64>();
        w[0] += fix;
        JointDistribution::new(w).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn unitaries_are_unitary(p in prop::array::uniform3(-100.0f64..100.0)) {
        prop_assert!(observable_unitary(&PhaseVector(p)).is_unitary(1e-12));
    }

    #[test]
    fn tables_normalised_and_no_signalling(s in settings(), f in 0.0f64..=1.0) {
        let exp = experiment_probabilities(&s, Noise::new(f).unwrap()).unwrap();
        for k in 0..2 {
            for l in 0..2 {
                let t = exp.table(k, l);
                prop_assert!(t.p.iter().flatten().all(|&v| v >= 0.0));
                prop_assert!((t.total() - 1.0).abs() < 1e-10);
            }
            let (r1, r2) = (exp.table(k, 0).row_sums(), exp.table(k, 1).row_sums());
            let (c1, c2) = (exp.table(0, k).col_sums(), exp.table(1, k).col_sums());
            for o in 0..3 {
                prop_assert!((r1[o] - r2[o]).abs() < 1e-12);
                prop_assert!((r1[o] - exp.alice_singles[k][o]).abs() < 1e-12);
                prop_assert!((c1[o] - c2[o]).abs() < 1e-12);
                prop_assert!((c1[o] - exp.bob_singles[k][o]).abs() < 1e-12);
            }
        }
        prop_assert!(exp.invariant_defect() < 1e-10);
    }

    #[test]
    fn singles_uniform_for_any_unitary(p in prop::array::uniform3(-10.0f64..10.0)) {
        let s = singles(&observable_unitary(&PhaseVector(p))).unwrap();
        prop_assert!(s.iter().all(|v| (v - 1.0 / 3.0).abs() < 1e-12));
    }

    #[test]
    fn noise_mixes_linearly(s in settings(), f in 0.0f64..=1.0) {
        let clean = experiment_probabilities(&s, Noise::NONE).unwrap();
        let noisy = experiment_probabilities(&s, Noise::new(f).unwrap()).unwrap();
        for k in 0..2 {
            for l in 0..2 {
                for a in 0..3 {
                    for b in 0..3 {
                        let expected = (1.0 - f) * clean.tables[k][l].p[a][b] + f / 9.0;
                        prop_assert!((noisy.tables[k][l].p[a][b] - expected).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn phases_are_periodic(p in phases(), idx in 0usize..12) {
        let base = experiment_probabilities(&PhaseSettings::from_phases(p), Noise::NONE).unwrap();
        let mut shifted = p;
        shifted[idx] += TAU;
        let other = experiment_probabilities(&PhaseSettings::from_phases(shifted), Noise::NONE).unwrap();
        prop_assert!(base.max_table_diff(&other) < 1e-12);
    }

    #[test]
    fn global_phase_is_invisible(p in phases(), obs in 0usize..4, offset in -5.0f64..5.0) {
        let base = experiment_probabilities(&PhaseSettings::from_phases(p), Noise::NONE).unwrap();
        let mut shifted = p;
        for v in &mut shifted[3 * obs..3 * obs + 3] {
            *v += offset;
        }
        let other = experiment_probabilities(&PhaseSettings::from_phases(shifted), Noise::NONE).unwrap();
        prop_assert!(base.max_table_diff(&other) < 1e-12);
    }

    #[test]
    fn lhs_is_the_linear_functional(d in distribution()) {
        let c = ch_coefficients();
        let direct = ch_lhs(&marginals_of(&d));
        prop_assert!((direct - c.dot(d.weights())).abs() < 1e-12);
        prop_assert!(direct <= 1e-12);
    }

    #[test]
    fn relabeling_round_trips(s in settings(), r in relabeling()) {
        let exp = experiment_probabilities(&s, Noise::NONE).unwrap();
        let back = apply_relabeling(&apply_relabeling(&exp, &r), &r.inverse());
        prop_assert!(back.max_table_diff(&exp) < 1e-15);
        prop_assert!(apply_relabeling(&exp, &r).invariant_defect() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn lp_threshold_dominates_inequality(s in settings()) {
        let exp0 = experiment_probabilities(&s, Noise::NONE).unwrap();
        let lp = min_noise_lp(&exp0).unwrap().f_min.unwrap();
        let analytic = analytic_threshold(&exp0);
        prop_assert!(lp >= analytic.f_thr - 1e-6, "lp {} analytic {}", lp, analytic.f_thr);
        if analytic.status == ThresholdStatus::Violated {
            let at = exp0.with_noise(Noise::new(analytic.f_thr).unwrap());
            prop_assert!(ch_lhs(&at).abs() < 1e-10);
            let later = exp0.with_noise(Noise::new((analytic.f_thr + 0.1).min(1.0)).unwrap());
            prop_assert!(ch_lhs(&later) < ch_lhs(&at));
        }
    }

    #[test]
    fn local_marginals_are_feasible(d in distribution()) {
        let exp = marginals_of(&d);
        let out = lhv_feasible(&exp, FEASIBILITY_TOL).unwrap();
        prop_assert!(out.is_feasible());
        let cert = out.certificate.unwrap();
        prop_assert!(marginals_of(&cert).max_table_diff(&exp) < 1e-7);
    }

    #[test]
    fn lp_threshold_ignores_relabeling(r in relabeling()) {
        let exp0 = experiment_probabilities(&paper_preset(), Noise::NONE).unwrap();
        let f = min_noise_lp(&apply_relabeling(&exp0, &r)).unwrap().f_min.unwrap();
        prop_assert!((f - paper_threshold()).abs() < 1e-7);
    }
}

#[test]
fn inequality_threshold_matches_lp_for_preset() {
    let exp0 = experiment_probabilities(&paper_preset(), Noise::NONE).unwrap();
    let lp = min_noise_lp(&exp0).unwrap().f_min.unwrap();
    assert!((analytic_threshold(&exp0).f_thr - lp).abs() < 1e-6);
}
