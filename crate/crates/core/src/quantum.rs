//! Tritter unitaries and outcome probabilities for the noisy maximally
//! entangled two-qutrit state `(|11> + |22> + |33>)/sqrt(3)`.
//!
//! Outcome and observable indices are zero-based throughout this module
//! (`0..3` for outcomes, `0..2` for the two observables of each party).
//! Permutations are written as images of `(1, 2, 3)` only at the I/O edge.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance for the unitarity precondition of probability routines.
pub const UNITARY_TOL: f64 = 1e-9;
/// Probabilities within this distance of `[0, 1]` are clamped.
pub const CLAMP_TOL: f64 = 1e-12;
/// Tolerance used when comparing tables for a matching relabeling.
pub const MATCH_TOL: f64 = 1e-9;

/// `exp(i 2 pi / 3)`.
pub fn alpha() -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI / 3.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexMatrix3(pub [[Complex64; 3]; 3]);

impl ComplexMatrix3 {
    pub fn identity() -> Self {
        let mut m = [[Complex64::new(0.0, 0.0); 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = Complex64::new(1.0, 0.0);
        }
        ComplexMatrix3(m)
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.0[row][col]
    }

    pub fn adjoint(&self) -> Self {
        let mut m = [[Complex64::new(0.0, 0.0); 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.0[j][i].conj();
            }
        }
        ComplexMatrix3(m)
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let mut m = [[Complex64::new(0.0, 0.0); 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..3).map(|k| self.0[i][k] * rhs.0[k][j]).sum();
            }
        }
        ComplexMatrix3(m)
    }

    /// Largest entrywise modulus of `M M^dagger - I`.
    pub fn unitarity_defect(&self) -> f64 {
        let prod = self.mul(&self.adjoint());
        let id = Self::identity();
        let mut worst = 0.0_f64;
        for i in 0..3 {
            for j in 0..3 {
                worst = worst.max((prod.0[i][j] - id.0[i][j]).norm());
            }
        }
        if self.0.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite()) {
            worst
        } else {
            f64::INFINITY
        }
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }

    fn ensure_unitary(&self) -> Result<()> {
        let deviation = self.unitarity_defect();
        if deviation <= UNITARY_TOL {
            Ok(())
        } else {
            Err(Error::NotUnitary { deviation })
        }
    }
}

/// Three phase shifts (radians) placed in front of the tritter input ports.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseVector(pub [f64; 3]);

impl PhaseVector {
    pub fn new(phases: [f64; 3]) -> Result<Self> {
        match phases.iter().find(|p| !p.is_finite()) {
            Some(&bad) => Err(Error::NonFinitePhase(bad)),
            None => Ok(PhaseVector(phases)),
        }
    }

    pub fn zero() -> Self {
        PhaseVector([0.0; 3])
    }

    /// Adds the same offset to all three phases (a global phase of the observable).
    pub fn shifted(&self, offset: f64) -> Self {
        PhaseVector(self.0.map(|p| p + offset))
    }
}

/// A bijection on the three outcomes, stored as zero-based images:
/// outcome `i` is renamed to `self.image(i)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation([usize; 3]);

impl Permutation {
    pub const IDENTITY: Permutation = Permutation([0, 1, 2]);

    pub fn from_images(images: [usize; 3]) -> Result<Self> {
        let mut seen = [false; 3];
        for &i in &images {
            if i >= 3 || seen[i] {
                return Err(Error::InvalidPermutation(images));
            }
            seen[i] = true;
        }
        Ok(Permutation(images))
    }

    /// Builds from one-based images of `(1, 2, 3)`, the form used in settings files.
    pub fn from_one_based(images: [usize; 3]) -> Result<Self> {
        if images.iter().any(|&i| i == 0 || i > 3) {
            return Err(Error::InvalidPermutation(images));
        }
        Self::from_images(images.map(|i| i - 1)).map_err(|_| Error::InvalidPermutation(images))
    }

    pub fn one_based(&self) -> [usize; 3] {
        self.0.map(|i| i + 1)
    }

    pub fn image(&self, outcome: usize) -> usize {
        self.0[outcome]
    }

    pub fn inverse(&self) -> Self {
        let mut inv = [0; 3];
        for (i, &j) in self.0.iter().enumerate() {
            inv[j] = i;
        }
        Permutation(inv)
    }

    /// `self` applied after `first`.
    pub fn compose(&self, first: &Self) -> Self {
        Permutation(first.0.map(|i| self.0[i]))
    }

    /// All six permutations in lexicographic order of their images.
    pub fn all() -> [Permutation; 6] {
        [
            Permutation([0, 1, 2]),
            Permutation([0, 2, 1]),
            Permutation([1, 0, 2]),
            Permutation([1, 2, 0]),
            Permutation([2, 0, 1]),
            Permutation([2, 1, 0]),
        ]
    }
}

impl Default for Permutation {
    fn default() -> Self {
        Self::IDENTITY
    }
}

/// Outcome relabelings for the four observables `A1, A2, B1, B2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash, PartialOrd, Ord)]
pub struct Relabeling {
    pub alice: [Permutation; 2],
    pub bob: [Permutation; 2],
}

impl Relabeling {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity()
    }

    pub fn inverse(&self) -> Self {
        Relabeling {
            alice: self.alice.map(|p| p.inverse()),
            bob: self.bob.map(|p| p.inverse()),
        }
    }

    /// All `6^4` relabelings, lexicographic over `(a1, a2, b1, b2)`.
    pub fn all() -> impl Iterator<Item = Relabeling> {
        let perms = Permutation::all();
        perms.into_iter().flat_map(move |a1| {
            perms.into_iter().flat_map(move |a2| {
                perms.into_iter().flat_map(move |b1| {
                    perms.into_iter().map(move |b2| Relabeling {
                        alice: [a1, a2],
                        bob: [b1, b2],
                    })
                })
            })
        })
    }
}

/// Phase settings of both observers plus the outcome relabeling applied
/// to the computed probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSettings {
    pub alice: [PhaseVector; 2],
    pub bob: [PhaseVector; 2],
    pub relabel: Relabeling,
}

impl PhaseSettings {
    pub fn new(alice: [PhaseVector; 2], bob: [PhaseVector; 2]) -> Self {
        PhaseSettings {
            alice,
            bob,
            relabel: Relabeling::identity(),
        }
    }

    pub fn zero() -> Self {
        Self::new([PhaseVector::zero(); 2], [PhaseVector::zero(); 2])
    }

    pub fn with_relabel(mut self, relabel: Relabeling) -> Self {
        self.relabel = relabel;
        self
    }

    /// The twelve phases in the order `A1, A2, B1, B2`.
    pub fn phases(&self) -> [f64; 12] {
        let mut out = [0.0; 12];
        for (slot, pv) in self.alice.iter().chain(self.bob.iter()).enumerate() {
            out[3 * slot..3 * slot + 3].copy_from_slice(&pv.0);
        }
        out
    }

    pub fn from_phases(phases: [f64; 12]) -> Self {
        let pv = |s: usize| PhaseVector([phases[3 * s], phases[3 * s + 1], phases[3 * s + 2]]);
        Self::new([pv(0), pv(1)], [pv(2), pv(3)])
    }
}

/// White-noise admixture `F`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Noise(f64);

impl Noise {
    pub const NONE: Noise = Noise(0.0);
    pub const FULL: Noise = Noise(1.0);

    pub fn new(fraction: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&fraction) {
            Ok(Noise(fraction))
        } else {
            Err(Error::InvalidNoise(fraction))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Joint outcome distribution `P^{kl}(a; b)` for one pair of observables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbabilityTable {
    pub p: [[f64; 3]; 3],
    /// One-based observable labels `(k, l)`.
    pub k: usize,
    pub l: usize,
}

impl ProbabilityTable {
    pub fn row_sums(&self) -> [f64; 3] {
        self.p.map(|row| row.iter().sum())
    }

    pub fn col_sums(&self) -> [f64; 3] {
        let mut out = [0.0; 3];
        for row in &self.p {
            for (o, v) in out.iter_mut().zip(row) {
                *o += v;
            }
        }
        out
    }

    pub fn total(&self) -> f64 {
        self.p.iter().flatten().sum()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.p
            .iter()
            .flatten()
            .zip(other.p.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// The four joint tables together with the single-party marginals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentProbabilities {
    /// `tables[k][l]` for observables `A_{k+1}`, `B_{l+1}`.
    pub tables: [[ProbabilityTable; 2]; 2],
    pub alice_singles: [[f64; 3]; 2],
    pub bob_singles: [[f64; 3]; 2],
}

impl ExperimentProbabilities {
    /// Builds from raw joint tables, deriving singles from row/column sums of
    /// tables `k1` and `1l`.
    pub fn from_tables(p: [[[[f64; 3]; 3]; 2]; 2]) -> Self {
        let tables = [0, 1].map(|k| {
            [0, 1].map(|l| ProbabilityTable {
                p: p[k][l],
                k: k + 1,
                l: l + 1,
            })
        });
        let alice_singles = [tables[0][0].row_sums(), tables[1][0].row_sums()];
        let bob_singles = [tables[0][0].col_sums(), tables[0][1].col_sums()];
        ExperimentProbabilities {
            tables,
            alice_singles,
            bob_singles,
        }
    }

    pub fn table(&self, k: usize, l: usize) -> &ProbabilityTable {
        &self.tables[k][l]
    }

    /// `(1 - F) * self + F / 9` on joint entries; singles are unchanged since
    /// the noise has uniform marginals.
    pub fn with_noise(&self, noise: Noise) -> Self {
        let f = noise.value();
        let mut out = *self;
        for row in out.tables.iter_mut() {
            for t in row.iter_mut() {
                for v in t.p.iter_mut().flatten() {
                    *v = (1.0 - f) * *v + f / 9.0;
                }
            }
        }
        out
    }

    /// Largest deviation from the type invariants: normalisation of every
    /// table and singles triple, and consistency of row/column sums with the
    /// singles. Negative entries count as deviation too.
    pub fn invariant_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for k in 0..2 {
            for l in 0..2 {
                let t = &self.tables[k][l];
                worst = worst.max((t.total() - 1.0).abs());
                for &v in t.p.iter().flatten() {
                    worst = worst.max(-v);
                }
                for (r, s) in t.row_sums().iter().zip(&self.alice_singles[k]) {
                    worst = worst.max((r - s).abs());
                }
                for (c, s) in t.col_sums().iter().zip(&self.bob_singles[l]) {
                    worst = worst.max((c - s).abs());
                }
            }
        }
        for s in self.alice_singles.iter().chain(self.bob_singles.iter()) {
            worst = worst.max((s.iter().sum::<f64>() - 1.0).abs());
        }
        worst
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        let defect = self.invariant_defect();
        if defect.is_finite() && defect <= tol {
            Ok(())
        } else {
            Err(Error::ProbabilityOutOfRange {
                value: defect,
                location: "experiment invariants".into(),
            })
        }
    }

    /// Largest entrywise difference over the four joint tables.
    pub fn max_table_diff(&self, other: &Self) -> f64 {
        (0..2)
            .flat_map(|k| (0..2).map(move |l| (k, l)))
            .map(|(k, l)| self.tables[k][l].max_abs_diff(&other.tables[k][l]))
            .fold(0.0, f64::max)
    }
}

impl fmt::Display for ExperimentProbabilities {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.tables {
            for t in row {
                writeln!(f, "P{}{}:", t.k, t.l)?;
                for r in &t.p {
                    writeln!(f, "  {:.6} {:.6} {:.6}", r[0], r[1], r[2])?;
                }
            }
        }
        Ok(())
    }
}

/// The unbiased 3x3 multiport: `T[k][l] = alpha^(k l) / sqrt(3)` (zero-based).
pub fn tritter_matrix() -> ComplexMatrix3 {
    let a = alpha();
    let norm = 1.0 / 3f64.sqrt();
    let mut m = [[Complex64::new(0.0, 0.0); 3]; 3];
    for (k, row) in m.iter_mut().enumerate() {
        for (l, v) in row.iter_mut().enumerate() {
            *v = a.powu(((k * l) % 3) as u32) * norm;
        }
    }
    ComplexMatrix3(m)
}

/// Tritter preceded by phase shifters: column `l` of the tritter picks up `exp(i phi_l)`.
pub fn observable_unitary(phases: &PhaseVector) -> ComplexMatrix3 {
    let mut u = tritter_matrix();
    for row in u.0.iter_mut() {
        for (v, &phi) in row.iter_mut().zip(&phases.0) {
            *v *= Complex64::from_polar(1.0, phi);
        }
    }
    u
}

fn clamp_probability(v: f64, location: impl FnOnce() -> String) -> Result<f64> {
    if !(-CLAMP_TOL..=1.0 + CLAMP_TOL).contains(&v) {
        return Err(Error::ProbabilityOutOfRange {
            value: v,
            location: location(),
        });
    }
    Ok(v.clamp(0.0, 1.0))
}

/// Joint outcome probabilities for Alice measuring with `ua` and Bob with `ub`.
///
/// Uses the transition amplitude `(1/sqrt 3) sum_m ua[a][m] ub[b][m]` of the
/// maximally entangled state plus the analytic `F/9` white-noise term.
pub fn joint_table(ua: &ComplexMatrix3, ub: &ComplexMatrix3, noise: Noise) -> Result<ProbabilityTable> {
    ua.ensure_unitary()?;
    ub.ensure_unitary()?;
    let f = noise.value();
    let norm = 1.0 / 3f64.sqrt();
    let mut p = [[0.0; 3]; 3];
    for (a, row) in p.iter_mut().enumerate() {
        for (b, v) in row.iter_mut().enumerate() {
            let amp: Complex64 = (0..3).map(|m| ua.0[a][m] * ub.0[b][m]).sum::<Complex64>() * norm;
            let raw = (1.0 - f) * amp.norm_sqr() + f / 9.0;
            *v = clamp_probability(raw, || format!("joint ({}, {})", a + 1, b + 1))?;
        }
    }
    Ok(ProbabilityTable { p, k: 1, l: 1 })
}

/// Reduced density matrix of one qutrit of the maximally entangled state,
/// obtained by tracing out the partner from the amplitude matrix `psi[i][j]`.
fn reduced_state() -> ComplexMatrix3 {
    let c = Complex64::new(1.0 / 3f64.sqrt(), 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let mut psi = [[zero; 3]; 3];
    for (i, row) in psi.iter_mut().enumerate() {
        row[i] = c;
    }
    let psi = ComplexMatrix3(psi);
    psi.mul(&psi.adjoint())
}

/// Single-party outcome probabilities `Tr(Pi_a U rho U^dagger)`.
pub fn singles(u: &ComplexMatrix3) -> Result<[f64; 3]> {
    u.ensure_unitary()?;
    let rho = u.mul(&reduced_state()).mul(&u.adjoint());
    let mut out = [0.0; 3];
    for (a, v) in out.iter_mut().enumerate() {
        *v = clamp_probability(rho.0[a][a].re, || format!("single {}", a + 1))?;
    }
    Ok(out)
}

fn permute_table(t: &ProbabilityTable, pa: Permutation, pb: Permutation) -> ProbabilityTable {
    let mut p = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            p[pa.image(a)][pb.image(b)] = t.p[a][b];
        }
    }
    ProbabilityTable { p, ..*t }
}

fn permute_triple(s: &[f64; 3], perm: Permutation) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (a, &v) in s.iter().enumerate() {
        out[perm.image(a)] = v;
    }
    out
}

/// Renames the outcomes of every observable: outcome `i` of `A_k` becomes
/// `relabel.alice[k].image(i)` in every table and singles triple involving `A_k`.
pub fn apply_relabeling(exp: &ExperimentProbabilities, relabel: &Relabeling) -> ExperimentProbabilities {
    let mut out = *exp;
    for k in 0..2 {
        for l in 0..2 {
            out.tables[k][l] = permute_table(&exp.tables[k][l], relabel.alice[k], relabel.bob[l]);
        }
        out.alice_singles[k] = permute_triple(&exp.alice_singles[k], relabel.alice[k]);
        out.bob_singles[k] = permute_triple(&exp.bob_singles[k], relabel.bob[k]);
    }
    out
}

/// All four joint tables and singles for `settings` at noise level `noise`,
/// with `settings.relabel` applied last.
pub fn experiment_probabilities(settings: &PhaseSettings, noise: Noise) -> Result<ExperimentProbabilities> {
    let ua = settings.alice.map(|pv| observable_unitary(&pv));
    let ub = settings.bob.map(|pv| observable_unitary(&pv));
    let mut tables = [[ProbabilityTable {
        p: [[0.0; 3]; 3],
        k: 0,
        l: 0,
    }; 2]; 2];
    for k in 0..2 {
        for l in 0..2 {
            let t = joint_table(&ua[k], &ub[l], noise)?;
            tables[k][l] = ProbabilityTable {
                k: k + 1,
                l: l + 1,
                ..t
            };
        }
    }
    let exp = ExperimentProbabilities {
        tables,
        alice_singles: [singles(&ua[0])?, singles(&ua[1])?],
        bob_singles: [singles(&ub[0])?, singles(&ub[1])?],
    };
    Ok(apply_relabeling(&exp, &settings.relabel))
}

/// First relabeling, in lexicographic order, that maps `computed` onto
/// `target` on all four joint tables within [`MATCH_TOL`].
pub fn find_matching_relabeling(
    computed: &ExperimentProbabilities,
    target: &ExperimentProbabilities,
) -> Option<Relabeling> {
    Relabeling::all().find(|r| apply_relabeling(computed, r).max_table_diff(target) <= MATCH_TOL)
}
