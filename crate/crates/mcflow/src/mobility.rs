//! Mobility matrices and their decomposition into harmonically additive
//! components.
//!
//! A set of pairwise mobilities `m_ij` is harmonically additive when there
//! are per-phase coefficients `m_i >= 0` with `1/m_ij = 1/m_i + 1/m_j`.
//! Arbitrary nonnegative mobility matrices are not of this form, but they can
//! always be written as a finite sum of harmonically additive components;
//! this module builds and validates such decompositions and exposes the
//! per-phase aggregates `m_k^* = sum_p m_k^p` that drive the solver.
//!
//! Zero mobilities are handled structurally rather than through infinite
//! inverse coefficients: a zero phase coefficient forces every pair value
//! through that phase to zero, and no infinity (or large sentinel) is ever
//! stored.

use thiserror::Error;

/// Relative tolerance for triple-consistency and reconstruction checks in
/// [`harmonic_fit`].
const FIT_REL_TOL: f64 = 1e-9;

/// Relative reconstruction tolerance for [`validate`].
const VALIDATE_REL_TOL: f64 = 1e-12;

/// How a run turns its mobility matrix into a decomposition.
///
/// The choice only matters at `O(eps)`: trajectories under different valid
/// decompositions of the same matrix stay within an interface width of each
/// other.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum DecompositionChoice {
    /// One component per phase pair, `P = n(n-1)/2`. Always applicable.
    #[default]
    Canonical,
    /// Single component (`P = 1`) when the matrix is harmonically additive,
    /// canonical fallback otherwise.
    Sparse,
    /// Caller-provided components, validated against the matrix.
    Explicit(Vec<Vec<f64>>),
}

impl DecompositionChoice {
    pub fn name(&self) -> &'static str {
        match self {
            DecompositionChoice::Canonical => "canonical",
            DecompositionChoice::Sparse => "sparse",
            DecompositionChoice::Explicit(_) => "explicit",
        }
    }
}

/// Harmonic mean of a pair of per-phase coefficients:
/// `(1/a + 1/b)^-1`, with a zero argument forcing a zero result.
#[inline]
pub fn harmonic_pair(a: f64, b: f64) -> f64 {
    if a <= 0.0 || b <= 0.0 {
        0.0
    } else {
        a * b / (a + b)
    }
}

/// Symmetric nonnegative mobility matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct MobilitySet {
    n: usize,
    m: Vec<f64>, // row-major n x n
}

#[derive(Debug, Error, PartialEq)]
pub enum MobilityError {
    #[error("need at least 2 phases, got {0}")]
    TooFewPhases(usize),
    #[error("mobility matrix must be {n}x{n}, got {rows}x{cols}")]
    BadShape { n: usize, rows: usize, cols: usize },
    #[error("mobility m[{i}][{j}] = {value} is negative")]
    Negative { i: usize, j: usize, value: f64 },
    #[error("mobility matrix not symmetric at ({i},{j}): {a} vs {b}")]
    NotSymmetric { i: usize, j: usize, a: f64, b: f64 },
    #[error("mobility diagonal m[{i}][{i}] = {value} must be zero")]
    NonzeroDiagonal { i: usize, value: f64 },
    #[error("pair index ({i},{j}) out of range for {n} phases")]
    PairOutOfRange { i: usize, j: usize, n: usize },
    #[error("duplicate pair entry ({i},{j})")]
    DuplicatePair { i: usize, j: usize },
}

impl MobilitySet {
    /// Builds from a full matrix, checking symmetry, nonnegativity and a zero
    /// diagonal.
    pub fn from_matrix(rows: &[Vec<f64>]) -> Result<Self, MobilityError> {
        let n = rows.len();
        if n < 2 {
            return Err(MobilityError::TooFewPhases(n));
        }
        for r in rows {
            if r.len() != n {
                return Err(MobilityError::BadShape {
                    n,
                    rows: n,
                    cols: r.len(),
                });
            }
        }
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            if rows[i][i] != 0.0 {
                return Err(MobilityError::NonzeroDiagonal {
                    i,
                    value: rows[i][i],
                });
            }
            for j in 0..n {
                let v = rows[i][j];
                if v < 0.0 || !v.is_finite() {
                    return Err(MobilityError::Negative { i, j, value: v });
                }
                if rows[j][i] != v {
                    return Err(MobilityError::NotSymmetric {
                        i,
                        j,
                        a: v,
                        b: rows[j][i],
                    });
                }
                m[i * n + j] = v;
            }
        }
        Ok(Self { n, m })
    }

    /// Builds from an upper-triangular pair list `(i, j, value)` with
    /// 0-based `i < j`; unlisted pairs are zero.
    pub fn from_pairs(n: usize, pairs: &[(usize, usize, f64)]) -> Result<Self, MobilityError> {
        if n < 2 {
            return Err(MobilityError::TooFewPhases(n));
        }
        let mut m = vec![0.0; n * n];
        let mut seen = vec![false; n * n];
        for &(i, j, v) in pairs {
            if i >= n || j >= n || i == j {
                return Err(MobilityError::PairOutOfRange { i, j, n });
            }
            let (a, b) = if i < j { (i, j) } else { (j, i) };
            if seen[a * n + b] {
                return Err(MobilityError::DuplicatePair { i: a, j: b });
            }
            seen[a * n + b] = true;
            if v < 0.0 || !v.is_finite() {
                return Err(MobilityError::Negative { i, j, value: v });
            }
            m[a * n + b] = v;
            m[b * n + a] = v;
        }
        Ok(Self { n, m })
    }

    /// All pairwise mobilities equal to `value`.
    pub fn uniform(n: usize, value: f64) -> Result<Self, MobilityError> {
        let pairs: Vec<_> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j, value)))
            .collect();
        Self::from_pairs(n, &pairs)
    }

    pub fn n_phases(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m[i * self.n + j]
    }

    pub fn max_value(&self) -> f64 {
        self.m.iter().cloned().fold(0.0, f64::max)
    }

    /// True when every mobility involving phase `i` vanishes.
    pub fn row_is_zero(&self, i: usize) -> bool {
        (0..self.n).all(|j| self.get(i, j) == 0.0)
    }

    /// Returns the relabelled matrix with phase `k` renamed to `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let n = self.n;
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                m[perm[i] * n + perm[j]] = self.get(i, j);
            }
        }
        Self { n, m }
    }
}

/// One harmonically additive component: per-phase coefficients `m_i^p`.
///
/// The pair values `m_ij^p = harmonic_pair(m_i^p, m_j^p)` are derived on
/// demand and never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicComponent {
    phase_coeffs: Vec<f64>,
}

impl HarmonicComponent {
    pub fn new(phase_coeffs: Vec<f64>) -> Self {
        Self { phase_coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.phase_coeffs
    }

    pub fn coeff(&self, i: usize) -> f64 {
        self.phase_coeffs[i]
    }

    pub fn pair_value(&self, i: usize, j: usize) -> f64 {
        harmonic_pair(self.phase_coeffs[i], self.phase_coeffs[j])
    }

    /// True when every derived pair value vanishes, i.e. at most one phase
    /// coefficient is positive. Such a component contributes nothing to any
    /// mobility and is pruned to all zeros.
    fn is_useless(&self) -> bool {
        self.phase_coeffs.iter().filter(|&&c| c > 0.0).count() <= 1
    }
}

/// Reason a mobility set admits no single harmonically additive component.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum NotAdditive {
    #[error("inverse coefficient for phase {phase} is {inv}, which is negative")]
    NegativeCoefficient { phase: usize, inv: f64 },
    #[error("phase {phase} would need an unbounded coefficient (inverse {inv})")]
    UnboundedCoefficient { phase: usize, inv: f64 },
    #[error(
        "triples disagree for phase {phase}: inverse {a} vs {b} (relative gap above {tol})"
    )]
    InconsistentTriples { phase: usize, a: f64, b: f64, tol: f64 },
    #[error("m[{i}][{j}] = 0 but both phases carry positive mobilities elsewhere")]
    ZeroPairConflict { i: usize, j: usize },
    #[error("reconstructed m[{i}][{j}] = {got}, expected {want}")]
    ReconstructionMismatch { i: usize, j: usize, got: f64, want: f64 },
    #[error("harmonic fit needs at least 3 phases, got {0}")]
    TooFewPhases(usize),
}

/// A mobility matrix written as a sum of harmonically additive components,
/// together with the per-phase aggregates `m_k^* = sum_p m_k^p`.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicDecomposition {
    n: usize,
    components: Vec<HarmonicComponent>,
    m_star: Vec<f64>,
}

impl HarmonicDecomposition {
    /// Assembles a decomposition from explicit components, pruning useless
    /// ones (all pair values zero) and computing `m_star`.
    pub fn from_components(n: usize, components: Vec<HarmonicComponent>) -> Self {
        let mut components = components;
        for c in &mut components {
            assert_eq!(c.phase_coeffs.len(), n, "component length must match n");
            if c.is_useless() {
                c.phase_coeffs.iter_mut().for_each(|v| *v = 0.0);
            }
        }
        let mut m_star = vec![0.0; n];
        for c in &components {
            for (k, &v) in c.phase_coeffs.iter().enumerate() {
                m_star[k] += v;
            }
        }
        Self {
            n,
            components,
            m_star,
        }
    }

    pub fn n_phases(&self) -> usize {
        self.n
    }

    pub fn components(&self) -> &[HarmonicComponent] {
        &self.components
    }

    pub fn p(&self) -> usize {
        self.components.len()
    }

    /// `m_k^* = sum_p m_k^p`.
    pub fn m_star(&self) -> &[f64] {
        &self.m_star
    }

    /// Sum of component pair values at `(i, j)`.
    pub fn pair_sum(&self, i: usize, j: usize) -> f64 {
        self.components.iter().map(|c| c.pair_value(i, j)).sum()
    }

    /// Relabels phases by `perm` (phase `k` becomes `perm[k]`).
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let components = self
            .components
            .iter()
            .map(|c| {
                let mut coeffs = vec![0.0; self.n];
                for (k, &v) in c.phase_coeffs.iter().enumerate() {
                    coeffs[perm[k]] = v;
                }
                HarmonicComponent::new(coeffs)
            })
            .collect();
        Self::from_components(self.n, components)
    }
}

/// Canonical decomposition: one component per unordered pair `(k, l)`, with
/// `m_a^{kl} = 2 m_kl (delta_k(a) + delta_l(a))`.
///
/// Always has `P = n (n-1) / 2` components in lexicographic pair order;
/// components for zero mobilities are retained (all-zero) so `P` stays fixed.
pub fn canonical_decomposition(mob: &MobilitySet) -> HarmonicDecomposition {
    let n = mob.n_phases();
    let mut components = Vec::with_capacity(n * (n - 1) / 2);
    for k in 0..n {
        for l in k + 1..n {
            let mut coeffs = vec![0.0; n];
            coeffs[k] = 2.0 * mob.get(k, l);
            coeffs[l] = 2.0 * mob.get(k, l);
            components.push(HarmonicComponent::new(coeffs));
        }
    }
    HarmonicDecomposition::from_components(n, components)
}

/// Attempts to represent the whole matrix as a single harmonically additive
/// component.
///
/// Phases whose entire mobility row vanishes get a zero coefficient. Over the
/// remaining phases the inverse coefficients follow the triplet identity
/// `1/m_i = (1/m_ij + 1/m_ik - 1/m_jk) / 2`; with more than three active
/// phases every triple is computed and must agree to relative `1e-9`. The
/// result is accepted only if all coefficients are finite and nonnegative and
/// the reconstructed pair values match the input to relative `1e-9`.
pub fn harmonic_fit(mob: &MobilitySet) -> Result<HarmonicComponent, NotAdditive> {
    let n = mob.n_phases();
    if n < 3 {
        return Err(NotAdditive::TooFewPhases(n));
    }

    let active: Vec<usize> = (0..n).filter(|&i| !mob.row_is_zero(i)).collect();
    let mut coeffs = vec![0.0; n];

    // A zero pair between two phases that are active elsewhere cannot come
    // from a single component: both coefficients would have to be positive.
    for (a, &i) in active.iter().enumerate() {
        for &j in &active[a + 1..] {
            if mob.get(i, j) == 0.0 {
                return Err(NotAdditive::ZeroPairConflict { i, j });
            }
        }
    }

    match active.len() {
        0 | 1 => {
            // All mobilities zero; the all-zero component reconstructs them.
        }
        2 => {
            // One equation, two unknowns; take the symmetric choice.
            let (i, j) = (active[0], active[1]);
            coeffs[i] = 2.0 * mob.get(i, j);
            coeffs[j] = 2.0 * mob.get(i, j);
        }
        _ => {
            for &i in &active {
                let mut inv: Option<f64> = None;
                for (b, &j) in active.iter().enumerate() {
                    if j == i {
                        continue;
                    }
                    for &k in &active[b + 1..] {
                        if k == i {
                            continue;
                        }
                        let cand = 0.5
                            * (1.0 / mob.get(i, j) + 1.0 / mob.get(i, k)
                                - 1.0 / mob.get(j, k));
                        match inv {
                            None => inv = Some(cand),
                            Some(prev) => {
                                let scale = prev.abs().max(cand.abs());
                                if (prev - cand).abs() > FIT_REL_TOL * scale.max(1.0) {
                                    return Err(NotAdditive::InconsistentTriples {
                                        phase: i,
                                        a: prev,
                                        b: cand,
                                        tol: FIT_REL_TOL,
                                    });
                                }
                            }
                        }
                    }
                }
                let inv = inv.expect("active set has >= 3 phases");
                if inv < 0.0 {
                    return Err(NotAdditive::NegativeCoefficient { phase: i, inv });
                }
                if inv == 0.0 {
                    // m_i = +infinity; representable only conceptually, and we
                    // store no infinities or sentinels.
                    return Err(NotAdditive::UnboundedCoefficient { phase: i, inv });
                }
                coeffs[i] = 1.0 / inv;
            }
        }
    }

    let component = HarmonicComponent::new(coeffs);
    for i in 0..n {
        for j in i + 1..n {
            let got = component.pair_value(i, j);
            let want = mob.get(i, j);
            if (got - want).abs() > FIT_REL_TOL * want.abs().max(1.0) {
                return Err(NotAdditive::ReconstructionMismatch { i, j, got, want });
            }
        }
    }
    Ok(component)
}

/// Single-component decomposition when the matrix is harmonically additive,
/// canonical fallback otherwise.
pub fn sparse_decomposition(mob: &MobilitySet) -> HarmonicDecomposition {
    match harmonic_fit(mob) {
        Ok(component) => HarmonicDecomposition::from_components(mob.n_phases(), vec![component]),
        Err(_) => canonical_decomposition(mob),
    }
}

/// Outcome of checking a decomposition against the matrix it should rebuild.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub p: usize,
    /// Max over pairs of `|sum_p m_ij^p - m_ij|`.
    pub max_reconstruction_error: f64,
    /// Most negative phase coefficient found (0 when none are negative).
    pub max_negative_coefficient: f64,
    pub passes: bool,
}

/// Checks that the components rebuild `mob` to relative `1e-12` with
/// nonnegative coefficients.
pub fn validate(
    dec: &HarmonicDecomposition,
    mob: &MobilitySet,
) -> Result<ValidationReport, MobilityError> {
    if dec.n_phases() != mob.n_phases() {
        return Err(MobilityError::BadShape {
            n: mob.n_phases(),
            rows: dec.n_phases(),
            cols: dec.n_phases(),
        });
    }
    let n = mob.n_phases();
    let mut max_err = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            max_err = max_err.max((dec.pair_sum(i, j) - mob.get(i, j)).abs());
        }
    }
    let mut max_neg = 0.0f64;
    for c in dec.components() {
        for &v in c.coeffs() {
            if v < 0.0 {
                max_neg = max_neg.min(v);
            }
        }
    }
    let tol = VALIDATE_REL_TOL * mob.max_value().max(1.0);
    Ok(ValidationReport {
        p: dec.p(),
        max_reconstruction_error: max_err,
        max_negative_coefficient: max_neg,
        passes: max_err <= tol && max_neg == 0.0,
    })
}
