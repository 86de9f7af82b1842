//! The Clauser-Horne-type inequality for two qutrits, its expansion over
//! deterministic local assignments, and the analytic noise threshold.
//!
//! The inequality reads `L <= 0` with
//!
//! ```text
//! L = P11(2;1) + P12(2;1) - P21(2;1) + P22(2;1)
//!   + P11(1;2) + P12(1;2) - P21(1;2) + P22(1;2)
//!   + P11(2;2) + P12(1;1) - P21(2;2) + P22(2;2)
//!   - P1(1) - P1(2) - Q2(1) - Q2(2)
//! ```
//!
//! where `Pkl(a;b)` is the joint probability for `A_k`, `B_l` and `Pk`, `Ql`
//! are the singles of Alice and Bob.

use std::ops::{Add, Index};

use crate::lhv::{marginals_of, JointDistribution};
use crate::quantum::ExperimentProbabilities;

/// An assignment of definite outcomes to all four observables.
///
/// Outcomes are stored one-based, as written in `(a1, a2; b1, b2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct JointAtom {
    pub a1: u8,
    pub a2: u8,
    pub b1: u8,
    pub b2: u8,
}

impl JointAtom {
    pub const COUNT: usize = 81;

    /// Panics unless every outcome lies in `1..=3`.
    pub fn new(a1: u8, a2: u8, b1: u8, b2: u8) -> Self {
        assert!(
            [a1, a2, b1, b2].iter().all(|o| (1..=3).contains(o)),
            "outcomes must lie in 1..=3, got ({a1},{a2};{b1},{b2})"
        );
        JointAtom { a1, a2, b1, b2 }
    }

    /// Odometer position with `a1` fastest, then `a2`, `b1`, `b2`.
    pub fn index(&self) -> usize {
        let d = |o: u8| (o - 1) as usize;
        d(self.a1) + 3 * d(self.a2) + 9 * d(self.b1) + 27 * d(self.b2)
    }

    pub fn from_index(index: usize) -> Self {
        assert!(index < Self::COUNT, "atom index {index} out of range");
        let digit = |shift: usize| ((index / shift) % 3) as u8 + 1;
        JointAtom::new(digit(1), digit(3), digit(9), digit(27))
    }

    /// All 81 atoms in odometer order.
    pub fn all() -> impl Iterator<Item = JointAtom> {
        (0..Self::COUNT).map(Self::from_index)
    }

    /// Zero-based outcome of Alice's observable `k` (`0` or `1`).
    pub fn alice(&self, k: usize) -> usize {
        (if k == 0 { self.a1 } else { self.a2 }) as usize - 1
    }

    /// Zero-based outcome of Bob's observable `l` (`0` or `1`).
    pub fn bob(&self, l: usize) -> usize {
        (if l == 0 { self.b1 } else { self.b2 }) as usize - 1
    }
}

/// A linear functional on distributions over the 81 atoms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChCoefficients(pub [f64; JointAtom::COUNT]);

impl ChCoefficients {
    pub fn zero() -> Self {
        ChCoefficients([0.0; JointAtom::COUNT])
    }

    pub fn get(&self, atom: JointAtom) -> f64 {
        self.0[atom.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = (JointAtom, f64)> + '_ {
        JointAtom::all().map(move |a| (a, self.0[a.index()]))
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `sum_atom c(atom) * weights[atom]`.
    pub fn dot(&self, weights: &[f64]) -> f64 {
        self.0.iter().zip(weights).map(|(c, w)| c * w).sum()
    }

    /// Number of coefficients equal to `0`, `-1` and `-2` respectively.
    pub fn census(&self) -> (usize, usize, usize) {
        let count = |v: f64| self.0.iter().filter(|&&c| c == v).count();
        (count(0.0), count(-1.0), count(-2.0))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl Index<JointAtom> for ChCoefficients {
    type Output = f64;

    fn index(&self, atom: JointAtom) -> &f64 {
        &self.0[atom.index()]
    }
}

impl Add for ChCoefficients {
    type Output = ChCoefficients;

    fn add(mut self, rhs: Self) -> Self {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a += b;
        }
        self
    }
}

/// One signed probability appearing in the inequality.
/// Observable and outcome indices are one-based, as printed.
#[derive(Debug, Clone, Copy)]
enum Term {
    Joint {
        k: usize,
        l: usize,
        a: usize,
        b: usize,
        sign: f64,
    },
    Alice {
        k: usize,
        a: usize,
        sign: f64,
    },
    Bob {
        l: usize,
        b: usize,
        sign: f64,
    },
}

const fn joint(k: usize, l: usize, a: usize, b: usize, sign: f64) -> Term {
    Term::Joint { k, l, a, b, sign }
}

const INEQUALITY: [Term; 16] = [
    joint(1, 1, 2, 1, 1.0),
    joint(1, 2, 2, 1, 1.0),
    joint(2, 1, 2, 1, -1.0),
    joint(2, 2, 2, 1, 1.0),
    joint(1, 1, 1, 2, 1.0),
    joint(1, 2, 1, 2, 1.0),
    joint(2, 1, 1, 2, -1.0),
    joint(2, 2, 1, 2, 1.0),
    joint(1, 1, 2, 2, 1.0),
    joint(1, 2, 1, 1, 1.0),
    joint(2, 1, 2, 2, -1.0),
    joint(2, 2, 2, 2, 1.0),
    Term::Alice { k: 1, a: 1, sign: -1.0 },
    Term::Alice { k: 1, a: 2, sign: -1.0 },
    Term::Bob { l: 2, b: 1, sign: -1.0 },
    Term::Bob { l: 2, b: 2, sign: -1.0 },
];

impl Term {
    fn evaluate(&self, exp: &ExperimentProbabilities) -> f64 {
        match *self {
            Term::Joint { k, l, a, b, sign } => sign * exp.tables[k - 1][l - 1].p[a - 1][b - 1],
            Term::Alice { k, a, sign } => sign * exp.alice_singles[k - 1][a - 1],
            Term::Bob { l, b, sign } => sign * exp.bob_singles[l - 1][b - 1],
        }
    }

    /// Weight this term puts on a point mass at `atom`, i.e. the term
    /// pushed through the marginal sums over the unconstrained outcomes.
    fn on_atom(&self, atom: &JointAtom) -> f64 {
        let hit = |cond: bool, sign: f64| if cond { sign } else { 0.0 };
        match *self {
            Term::Joint { k, l, a, b, sign } => hit(atom.alice(k - 1) == a - 1 && atom.bob(l - 1) == b - 1, sign),
            Term::Alice { k, a, sign } => hit(atom.alice(k - 1) == a - 1, sign),
            Term::Bob { l, b, sign } => hit(atom.bob(l - 1) == b - 1, sign),
        }
    }
}

/// Left-hand side of the inequality; positive values violate local realism.
pub fn ch_lhs(exp: &ExperimentProbabilities) -> f64 {
    INEQUALITY.iter().map(|t| t.evaluate(exp)).sum()
}

/// Coefficient of each atom after expanding every probability of the
/// inequality into the joint distribution over `(a1, a2; b1, b2)`.
pub fn ch_coefficients() -> ChCoefficients {
    let mut c = ChCoefficients::zero();
    for atom in JointAtom::all() {
        c.0[atom.index()] = INEQUALITY.iter().map(|t| t.on_atom(&atom)).sum();
    }
    c
}

/// An event on the joint distribution: the listed outcomes are fixed, the
/// rest are summed over. Zero means "summed".
#[derive(Debug, Clone, Copy)]
struct Event {
    sign: f64,
    a1: u8,
    a2: u8,
    b1: u8,
    b2: u8,
}

impl Event {
    fn contains(&self, atom: &JointAtom) -> bool {
        let ok = |fixed: u8, o: u8| fixed == 0 || fixed == o;
        ok(self.a1, atom.a1) && ok(self.a2, atom.a2) && ok(self.b1, atom.b1) && ok(self.b2, atom.b2)
    }
}

const fn ev(sign: f64, a1: u8, a2: u8, b1: u8, b2: u8) -> Event {
    Event { sign, a1, a2, b1, b2 }
}

fn functional(events: &[Event]) -> ChCoefficients {
    let mut c = ChCoefficients::zero();
    for atom in JointAtom::all() {
        c.0[atom.index()] = events.iter().filter(|e| e.contains(&atom)).map(|e| e.sign).sum();
    }
    c
}

/// The three parts of the inequality as sums over the joint distribution.
///
/// `ch1` and `ch2` are ordinary two-outcome Clauser-Horne expressions for the
/// events "outcome 2 for A, outcome 1 for B" and "outcome 1 for A, outcome 2
/// for B"; `g` collects the remaining joint terms.
pub fn appendix_decomposition() -> (ChCoefficients, ChCoefficients, ChCoefficients) {
    let ch1 = functional(&[
        ev(1.0, 2, 0, 1, 0),
        ev(1.0, 2, 0, 0, 1),
        ev(-1.0, 0, 2, 1, 0),
        ev(1.0, 0, 2, 0, 1),
        ev(-1.0, 2, 0, 0, 0),
        ev(-1.0, 0, 0, 0, 1),
    ]);
    let ch2 = functional(&[
        ev(1.0, 1, 0, 2, 0),
        ev(1.0, 1, 0, 0, 2),
        ev(-1.0, 0, 1, 2, 0),
        ev(1.0, 0, 1, 0, 2),
        ev(-1.0, 1, 0, 0, 0),
        ev(-1.0, 0, 0, 0, 2),
    ]);
    // last block fixes a2 = b2 = 2 and sums over a1, b1
    let g = functional(&[
        ev(1.0, 2, 0, 2, 0),
        ev(1.0, 1, 0, 0, 1),
        ev(-1.0, 0, 2, 2, 0),
        ev(1.0, 0, 2, 0, 2),
    ]);
    (ch1, ch2, g)
}

/// Value of the inequality for the deterministic strategy `atom`, computed
/// from the probabilities that strategy produces.
pub fn deterministic_value(atom: JointAtom) -> f64 {
    ch_lhs(&marginals_of(&JointDistribution::point_mass(atom)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdStatus {
    /// Violated for `F` below the threshold.
    Violated,
    /// Not violated even at `F = 0`; threshold reported as 0.
    NoViolation,
    /// The value does not depend on `F` and stays positive; threshold clamped to 1.
    AlwaysViolated,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticThreshold {
    pub f_thr: f64,
    pub status: ThresholdStatus,
    /// Inequality value at `F = 0` and at `F = 1`.
    pub lhs_clean: f64,
    pub lhs_noise: f64,
}

/// Noise fraction at which the inequality value reaches zero. The value is
/// affine in `F`, so the root is `L0 / (L0 - L1)`, clamped to `[0, 1]`.
pub fn analytic_threshold(exp0: &ExperimentProbabilities) -> AnalyticThreshold {
    let lhs_clean = ch_lhs(exp0);
    let lhs_noise = ch_lhs(&exp0.with_noise(crate::quantum::Noise::FULL));
    let (f_thr, status) = if lhs_clean <= 0.0 {
        (0.0, ThresholdStatus::NoViolation)
    } else if lhs_clean - lhs_noise <= 0.0 {
        (1.0, ThresholdStatus::AlwaysViolated)
    } else {
        (
            (lhs_clean / (lhs_clean - lhs_noise)).clamp(0.0, 1.0),
            ThresholdStatus::Violated,
        )
    };
    AnalyticThreshold {
        f_thr,
        status,
        lhs_clean,
        lhs_noise,
    }
}
