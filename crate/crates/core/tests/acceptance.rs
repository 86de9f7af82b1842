//! Acceptance criteria. Runs without the libtest harness so every criterion
//! prints one PASS/FAIL line; exits non-zero if any criterion fails.

use std::f64::consts::TAU;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qutrit_ch::ch::{
    analytic_threshold, appendix_decomposition, ch_coefficients, ch_lhs, deterministic_value, JointAtom,
};
use qutrit_ch::lhv::{lhv_feasible, min_noise_lp, FEASIBILITY_TOL};
use qutrit_ch::optimizer::{optimize, Method};
use qutrit_ch::preset::{paper_preset, paper_threshold, published_tables};
use qutrit_ch::quantum::{apply_relabeling, experiment_probabilities, Noise, Permutation, PhaseSettings, Relabeling};

type Outcome = Result<String, String>;

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn clean_preset() -> qutrit_ch::ExperimentProbabilities {
    experiment_probabilities(&paper_preset(), Noise::NONE).expect("preset probabilities")
}

fn published_probabilities() -> Outcome {
    let exp = clean_preset();
    let joint = exp.max_table_diff(&published_tables());
    let singles = exp
        .alice_singles
        .iter()
        .chain(&exp.bob_singles)
        .flatten()
        .map(|v| (v - 1.0 / 3.0).abs())
        .fold(0.0, f64::max);
    check(
        joint <= 1e-12 && singles <= 1e-12,
        format!("max joint deviation {joint:.2e}, max singles deviation {singles:.2e}"),
    )
}

fn inequality_value() -> Outcome {
    let clean = ch_lhs(&clean_preset());
    let noisy = ch_lhs(&experiment_probabilities(&paper_preset(), Noise::FULL).map_err(|e| e.to_string())?);
    let expected = (8.0 * 3f64.sqrt() - 6.0) / 27.0;
    check(
        (clean - expected).abs() <= 1e-12 && (noisy + 2.0 / 3.0).abs() <= 1e-12,
        format!("L(F=0) = {clean:.15}, L(F=1) = {noisy:.15}"),
    )
}

fn analytic() -> Outcome {
    let f = analytic_threshold(&clean_preset()).f_thr;
    check(
        (f - paper_threshold()).abs() <= 1e-12,
        format!("F_thr = {f:.15} (expected {:.15})", paper_threshold()),
    )
}

fn lp_threshold() -> Outcome {
    let start = Instant::now();
    let out = min_noise_lp(&clean_preset()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let f = out.f_min.ok_or("no threshold")?;
    check(
        (f - paper_threshold()).abs() <= 1e-6 && elapsed < Duration::from_secs(1),
        format!("f_min = {f:.12}, {} pivots, {elapsed:?}", out.iterations),
    )
}

fn coefficient_expansion() -> Outcome {
    let c = ch_coefficients();
    let non_positive = c.0.iter().all(|&v| v <= 0.0);
    let values_ok = c.0.iter().all(|&v| v == 0.0 || v == -1.0 || v == -2.0);
    let sum_ok = c.sum() == -54.0;
    // independent indicator expansion
    let oracle = |a: JointAtom| -> f64 {
        let i = |b: bool| b as i32 as f64;
        let (a1, a2, b1, b2) = (a.a1, a.a2, a.b1, a.b2);
        let blk = |x, y| i(a1 == x && b1 == y) + i(a1 == x && b2 == y) - i(a2 == x && b1 == y) + i(a2 == x && b2 == y);
        blk(2, 1) + blk(1, 2) + i(a1 == 2 && b1 == 2) + i(a1 == 1 && b2 == 1) - i(a2 == 2 && b1 == 2)
            + i(a2 == 2 && b2 == 2)
            - i(a1 == 1)
            - i(a1 == 2)
            - i(b2 == 1)
            - i(b2 == 2)
    };
    let oracle_ok = JointAtom::all().all(|a| oracle(a) == c[a]);
    let census_ok = c.census() == (30, 48, 3);
    let (ch1, ch2, g) = appendix_decomposition();
    let decomposition = (ch1 + ch2 + g).max_abs_diff(&c);
    let max_det = JointAtom::all()
        .map(deterministic_value)
        .fold(f64::NEG_INFINITY, f64::max);
    check(
        non_positive && values_ok && sum_ok && oracle_ok && census_ok && decomposition <= 1e-12 && max_det == 0.0,
        format!(
            "non-positive {non_positive}, values in {{0,-1,-2}} {values_ok}, sum {}, oracle agrees {oracle_ok}, census {:?}, CH1+CH2+G defect {decomposition:.1e}, max deterministic {max_det}",
            c.sum(),
            c.census()
        ),
    )
}

fn bracketing() -> Outcome {
    let exp0 = clean_preset();
    let f = min_noise_lp(&exp0)
        .map_err(|e| e.to_string())?
        .f_min
        .ok_or("no threshold")?;
    let below =
        lhv_feasible(&exp0.with_noise(Noise::new(f - 1e-4).unwrap()), FEASIBILITY_TOL).map_err(|e| e.to_string())?;
    let above =
        lhv_feasible(&exp0.with_noise(Noise::new(f + 1e-4).unwrap()), FEASIBILITY_TOL).map_err(|e| e.to_string())?;
    check(
        !below.is_feasible() && above.is_feasible(),
        format!("F-1e-4: {:?}, F+1e-4: {:?}", below.status, above.status),
    )
}

fn relabeling_invariance() -> Outcome {
    let exp0 = clean_preset();
    let base = min_noise_lp(&exp0)
        .map_err(|e| e.to_string())?
        .f_min
        .ok_or("no threshold")?;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let perms = Permutation::all();
    let mut worst = 0.0_f64;
    for _ in 0..10 {
        let mut pick = || perms[rng.gen_range(0..6)];
        let r = Relabeling {
            alice: [pick(), pick()],
            bob: [pick(), pick()],
        };
        let f = min_noise_lp(&apply_relabeling(&exp0, &r))
            .map_err(|e| e.to_string())?
            .f_min
            .ok_or("no threshold")?;
        worst = worst.max((f - base).abs());
    }
    check(
        worst <= 1e-7,
        format!("max |delta f_min| over 10 relabelings = {worst:.2e}"),
    )
}

fn invariant_suites() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst_norm = 0.0_f64;
    let mut worst_signal = 0.0_f64;
    let mut worst_neg = 0.0_f64;
    for _ in 0..100 {
        let mut phases = [0.0; 12];
        phases.iter_mut().for_each(|p| *p = rng.gen_range(0.0..TAU));
        let f = rng.gen_range(0.0..=1.0);
        let exp = experiment_probabilities(&PhaseSettings::from_phases(phases), Noise::new(f).unwrap())
            .map_err(|e| e.to_string())?;
        for k in 0..2 {
            for l in 0..2 {
                let t = exp.table(k, l);
                worst_norm = worst_norm.max((t.total() - 1.0).abs());
                worst_neg = worst_neg.max(t.p.iter().flatten().map(|v| -v).fold(0.0, f64::max));
            }
            let rows = (exp.table(k, 0).row_sums(), exp.table(k, 1).row_sums());
            let cols = (exp.table(0, k).col_sums(), exp.table(1, k).col_sums());
            for o in 0..3 {
                worst_signal = worst_signal
                    .max((rows.0[o] - rows.1[o]).abs())
                    .max((rows.0[o] - exp.alice_singles[k][o]).abs())
                    .max((cols.0[o] - cols.1[o]).abs())
                    .max((cols.0[o] - exp.bob_singles[k][o]).abs());
            }
        }
    }
    check(
        worst_norm <= 1e-10 && worst_signal <= 1e-12 && worst_neg <= 0.0,
        format!("normalisation {worst_norm:.1e}, no-signalling {worst_signal:.1e}, negativity {worst_neg:.1e}"),
    )
}

fn optimizer_rediscovery() -> Outcome {
    let start = Instant::now();
    let r = optimize(20, 7, Method::Lp).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    check(
        r.best_threshold >= 0.3038 - 1e-3 && elapsed < Duration::from_secs(300),
        format!(
            "best {:.10} from restart {:?}, {} evaluations, {} failed, {elapsed:?}",
            r.best_threshold, r.best_restart, r.evaluations, r.failed_restarts
        ),
    )
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 9] = [
        ("1 published tables reproduced", published_probabilities),
        ("2 inequality value at F=0 and F=1", inequality_value),
        ("3 analytic threshold", analytic),
        ("4 LP threshold", lp_threshold),
        ("5 coefficient expansion", coefficient_expansion),
        ("6 feasibility bracketing", bracketing),
        ("7 relabeling invariance", relabeling_invariance),
        ("8 normalisation and no-signalling", invariant_suites),
        ("9 optimizer rediscovery", optimizer_rediscovery),
    ];
    let mut failures = 0;
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("PASS  criterion {name}: {detail}"),
            Err(detail) => {
                failures += 1;
                println!("FAIL  criterion {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
