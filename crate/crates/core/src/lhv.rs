//! Local-hidden-variable feasibility and minimal noise admixture by linear
//! programming over the 81 deterministic assignments `(a1, a2; b1, b2)`.

use crate::ch::JointAtom;
use crate::error::{Error, Result};
use crate::quantum::{ExperimentProbabilities, Noise};
use crate::simplex::{simplex_solve_with, LpProblem, LpSolution, SimplexOptions};

/// Default phase-1 residual above which no local model exists.
pub const FEASIBILITY_TOL: f64 = 1e-9;
/// Certificates must reproduce their target marginals this closely.
pub const CERTIFICATE_TOL: f64 = 1e-7;
const BISECTION_STEPS: usize = 40;

/// A probability distribution over the 81 joint atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    weights: [f64; JointAtom::COUNT],
}

impl JointDistribution {
    /// Clamps weights in `[-1e-9, 0)` to zero; rejects anything more negative
    /// or a total farther than `1e-9` from one.
    pub fn new(weights: [f64; JointAtom::COUNT]) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < -1e-9) {
            return Err(Error::Numerical(
                "negative or non-finite weight in joint distribution".into(),
            ));
        }
        let weights = weights.map(|w| w.max(0.0));
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Numerical(format!("joint distribution sums to {total}")));
        }
        Ok(JointDistribution { weights })
    }

    pub fn uniform() -> Self {
        JointDistribution {
            weights: [1.0 / JointAtom::COUNT as f64; JointAtom::COUNT],
        }
    }

    pub fn point_mass(atom: JointAtom) -> Self {
        let mut weights = [0.0; JointAtom::COUNT];
        weights[atom.index()] = 1.0;
        JointDistribution { weights }
    }

    pub fn weights(&self) -> &[f64; JointAtom::COUNT] {
        &self.weights
    }

    pub fn weight(&self, atom: JointAtom) -> f64 {
        self.weights[atom.index()]
    }
}

/// Joint tables and singles implied by a distribution over atoms.
pub fn marginals_of(dist: &JointDistribution) -> ExperimentProbabilities {
    let mut tables = [[[[0.0; 3]; 3]; 2]; 2];
    let mut alice = [[0.0; 3]; 2];
    let mut bob = [[0.0; 3]; 2];
    for atom in JointAtom::all() {
        let w = dist.weight(atom);
        if w == 0.0 {
            continue;
        }
        for k in 0..2 {
            alice[k][atom.alice(k)] += w;
            bob[k][atom.bob(k)] += w;
            for l in 0..2 {
                tables[k][l][atom.alice(k)][atom.bob(l)] += w;
            }
        }
    }
    let mut exp = ExperimentProbabilities::from_tables(tables);
    exp.alice_singles = alice;
    exp.bob_singles = bob;
    exp
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Feasible,
    Infeasible,
    ThresholdFound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdMethod {
    DirectLp,
    Bisection,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpOutcome {
    pub status: LpStatus,
    pub f_min: Option<f64>,
    pub certificate: Option<JointDistribution>,
    /// Simplex pivots (summed over all solves for bisection).
    pub iterations: usize,
    /// Phase-1 residual reported for infeasible instances.
    pub infeasibility: Option<f64>,
    pub method: Option<ThresholdMethod>,
}

impl LpOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self.status, LpStatus::Feasible | LpStatus::ThresholdFound)
    }
}

/// One row per joint entry `(k, l, a, b)`: coefficient 1 on every atom whose
/// outcomes for `A_k`, `B_l` are `(a, b)`.
fn joint_rows() -> Vec<([usize; 4], Vec<f64>)> {
    let mut rows = Vec::with_capacity(36);
    for k in 0..2 {
        for l in 0..2 {
            for a in 0..3 {
                for b in 0..3 {
                    let row = JointAtom::all()
                        .map(|atom| {
                            if atom.alice(k) == a && atom.bob(l) == b {
                                1.0
                            } else {
                                0.0
                            }
                        })
                        .collect();
                    rows.push(([k, l, a, b], row));
                }
            }
        }
    }
    rows
}

/// Rows fixing the single-party marginals; implied by the joint rows, used
/// only to check that adding them changes nothing.
fn singles_rows() -> Vec<([usize; 3], Vec<f64>)> {
    let mut rows = Vec::with_capacity(12);
    for party in 0..2 {
        for obs in 0..2 {
            for o in 0..3 {
                let row = JointAtom::all()
                    .map(|atom| {
                        let hit = if party == 0 {
                            atom.alice(obs) == o
                        } else {
                            atom.bob(obs) == o
                        };
                        if hit {
                            1.0
                        } else {
                            0.0
                        }
                    })
                    .collect();
                rows.push(([party, obs, o], row));
            }
        }
    }
    rows
}

fn weights_from(x: &[f64]) -> Result<JointDistribution> {
    let mut w = [0.0; JointAtom::COUNT];
    w.copy_from_slice(&x[..JointAtom::COUNT]);
    let total: f64 = w.iter().sum();
    if total > 0.0 {
        for v in w.iter_mut() {
            *v /= total;
        }
    }
    JointDistribution::new(w)
}

fn check_certificate(cert: &JointDistribution, target: &ExperimentProbabilities) -> Result<()> {
    let diff = marginals_of(cert).max_table_diff(target);
    if diff > CERTIFICATE_TOL {
        return Err(Error::Numerical(format!(
            "certificate misses target marginals by {diff:.3e}"
        )));
    }
    Ok(())
}

/// Whether `exp` is the marginal of some joint distribution over the atoms.
///
/// Constraints are the 36 joint entries plus normalisation; `tol` is the
/// phase-1 residual above which the instance is declared infeasible.
pub fn lhv_feasible(exp: &ExperimentProbabilities, tol: f64) -> Result<LpOutcome> {
    let mut problem = LpProblem::new(vec![0.0; JointAtom::COUNT]);
    for ([k, l, a, b], row) in joint_rows() {
        problem.add_equality(row, exp.tables[k][l].p[a][b]);
    }
    problem.add_equality(vec![1.0; JointAtom::COUNT], 1.0);
    let opts = SimplexOptions {
        feasibility_tol: tol,
        ..Default::default()
    };
    match simplex_solve_with(&problem, &opts)? {
        LpSolution::Optimal { x, iterations, .. } => {
            let cert = weights_from(&x)?;
            check_certificate(&cert, exp)?;
            Ok(LpOutcome {
                status: LpStatus::Feasible,
                f_min: None,
                certificate: Some(cert),
                iterations,
                infeasibility: None,
                method: None,
            })
        }
        LpSolution::Infeasible {
            infeasibility,
            iterations,
        } => Ok(LpOutcome {
            status: LpStatus::Infeasible,
            f_min: None,
            certificate: None,
            iterations,
            infeasibility: Some(infeasibility),
            method: None,
        }),
    }
}

/// Options for [`min_noise_lp_with`].
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ThresholdOptions {
    pub simplex: SimplexOptions,
    /// Also constrain the single-party marginals.
    pub include_singles: bool,
    pub force_bisection: bool,
}

/// Smallest white-noise fraction `F` for which `(1 - F) exp0 + F/9` admits a
/// local model.
pub fn min_noise_lp(exp0: &ExperimentProbabilities) -> Result<LpOutcome> {
    min_noise_lp_with(exp0, &ThresholdOptions::default())
}

pub fn min_noise_lp_with(exp0: &ExperimentProbabilities, opts: &ThresholdOptions) -> Result<LpOutcome> {
    if opts.force_bisection {
        return bisect_threshold(exp0);
    }
    match direct_threshold(exp0, opts) {
        Err(Error::Numerical(_)) => bisect_threshold(exp0),
        other => other,
    }
}

/// Variables: 81 atom weights, `F`, and a slack for `F <= 1`. Each joint row
/// reads `marginal(w) + F (p0 - 1/9) = p0`.
fn direct_threshold(exp0: &ExperimentProbabilities, opts: &ThresholdOptions) -> Result<LpOutcome> {
    let n_atoms = JointAtom::COUNT;
    let f_col = n_atoms;
    let mut objective = vec![0.0; n_atoms + 2];
    objective[f_col] = 1.0;
    let mut problem = LpProblem::new(objective);
    for ([k, l, a, b], mut row) in joint_rows() {
        let p0 = exp0.tables[k][l].p[a][b];
        row.extend([p0 - 1.0 / 9.0, 0.0]);
        problem.add_equality(row, p0);
    }
    if opts.include_singles {
        for ([party, obs, o], mut row) in singles_rows() {
            let s0 = if party == 0 {
                exp0.alice_singles[obs][o]
            } else {
                exp0.bob_singles[obs][o]
            };
            row.extend([s0 - 1.0 / 3.0, 0.0]);
            problem.add_equality(row, s0);
        }
    }
    let mut norm = vec![1.0; n_atoms];
    norm.extend([0.0, 0.0]);
    problem.add_equality(norm, 1.0);
    let mut bound = vec![0.0; n_atoms + 2];
    bound[f_col] = 1.0;
    bound[f_col + 1] = 1.0;
    problem.add_equality(bound, 1.0);

    match simplex_solve_with(&problem, &opts.simplex)? {
        LpSolution::Optimal { x, iterations, .. } => {
            let f_min = x[f_col].clamp(0.0, 1.0);
            let cert = weights_from(&x)?;
            check_certificate(&cert, &exp0.with_noise(Noise::new(f_min)?))?;
            Ok(LpOutcome {
                status: LpStatus::ThresholdFound,
                f_min: Some(f_min),
                certificate: Some(cert),
                iterations,
                infeasibility: None,
                method: Some(ThresholdMethod::DirectLp),
            })
        }
        LpSolution::Infeasible { infeasibility, .. } => Err(Error::Numerical(format!(
            "threshold LP reported infeasible (residual {infeasibility:.3e}) although F = 1 is always feasible"
        ))),
    }
}

fn bisect_threshold(exp0: &ExperimentProbabilities) -> Result<LpOutcome> {
    let mut iterations = 0;
    let at = |f: f64| -> Result<LpOutcome> { lhv_feasible(&exp0.with_noise(Noise::new(f)?), FEASIBILITY_TOL) };

    let first = at(0.0)?;
    iterations += first.iterations;
    if first.is_feasible() {
        return Ok(LpOutcome {
            status: LpStatus::ThresholdFound,
            f_min: Some(0.0),
            iterations,
            method: Some(ThresholdMethod::Bisection),
            ..first
        });
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut best = at(hi)?;
    iterations += best.iterations;
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        let out = at(mid)?;
        iterations += out.iterations;
        if out.is_feasible() {
            hi = mid;
            best = out;
        } else {
            lo = mid;
        }
    }
    Ok(LpOutcome {
        status: LpStatus::ThresholdFound,
        f_min: Some(hi),
        certificate: best.certificate,
        iterations,
        infeasibility: None,
        method: Some(ThresholdMethod::Bisection),
    })
}
