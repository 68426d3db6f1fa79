//! Pairwise surface tensions and their additive per-phase split
//! `sigma_ij = sigma_i + sigma_j`.

use thiserror::Error;

const SPLIT_REL_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TensionError {
    #[error("need at least 2 phases, got {0}")]
    TooFewPhases(usize),
    #[error("tension matrix must be square, row {row} has {cols} entries for n = {n}")]
    BadShape { n: usize, row: usize, cols: usize },
    #[error("tension sigma[{i}][{j}] = {value} is negative or not finite")]
    Invalid { i: usize, j: usize, value: f64 },
    #[error("tension matrix not symmetric at ({i},{j}): {a} vs {b}")]
    NotSymmetric { i: usize, j: usize, a: f64, b: f64 },
    #[error("tension diagonal sigma[{i}][{i}] = {value} must be zero")]
    NonzeroDiagonal { i: usize, value: f64 },
    #[error("pair index ({i},{j}) out of range for {n} phases")]
    PairOutOfRange { i: usize, j: usize, n: usize },
    #[error("tensions are not additive: phase {phase} would need sigma = {value} < 0")]
    NegativePhaseTension { phase: usize, value: f64 },
    #[error("tensions are not additive: triples disagree for phase {phase} ({a} vs {b})")]
    InconsistentTriples { phase: usize, a: f64, b: f64 },
    #[error("tensions are not additive: rebuilt sigma[{i}][{j}] = {got}, expected {want}")]
    ReconstructionMismatch { i: usize, j: usize, got: f64, want: f64 },
}

/// Additive surface tensions: the pairwise matrix together with its per-phase
/// split. Construct through [`split_tensions`].
#[derive(Debug, Clone, PartialEq)]
pub struct TensionSet {
    n: usize,
    sigma_pair: Vec<f64>, // row-major n x n
    sigma_phase: Vec<f64>,
}

impl TensionSet {
    pub fn n_phases(&self) -> usize {
        self.n
    }

    pub fn pair(&self, i: usize, j: usize) -> f64 {
        self.sigma_pair[i * self.n + j]
    }

    /// The per-phase tension `sigma_k`.
    pub fn phase(&self, k: usize) -> f64 {
        self.sigma_phase[k]
    }

    pub fn phases(&self) -> &[f64] {
        &self.sigma_phase
    }

    /// `sigma_i + sigma_j`, for round-trip checks against [`Self::pair`].
    pub fn recombined(&self, i: usize, j: usize) -> f64 {
        self.sigma_phase[i] + self.sigma_phase[j]
    }

    pub fn permuted(&self, perm: &[usize]) -> Self {
        let n = self.n;
        let mut sigma_pair = vec![0.0; n * n];
        let mut sigma_phase = vec![0.0; n];
        for i in 0..n {
            sigma_phase[perm[i]] = self.sigma_phase[i];
            for j in 0..n {
                sigma_pair[perm[i] * n + perm[j]] = self.pair(i, j);
            }
        }
        Self {
            n,
            sigma_pair,
            sigma_phase,
        }
    }
}

fn check_matrix(rows: &[Vec<f64>]) -> Result<(usize, Vec<f64>), TensionError> {
    let n = rows.len();
    if n < 2 {
        return Err(TensionError::TooFewPhases(n));
    }
    for (row, r) in rows.iter().enumerate() {
        if r.len() != n {
            return Err(TensionError::BadShape {
                n,
                row,
                cols: r.len(),
            });
        }
    }
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        if rows[i][i] != 0.0 {
            return Err(TensionError::NonzeroDiagonal {
                i,
                value: rows[i][i],
            });
        }
        for j in 0..n {
            let v = rows[i][j];
            if v < 0.0 || !v.is_finite() {
                return Err(TensionError::Invalid { i, j, value: v });
            }
            if rows[j][i] != v {
                return Err(TensionError::NotSymmetric {
                    i,
                    j,
                    a: v,
                    b: rows[j][i],
                });
            }
            m[i * n + j] = v;
        }
    }
    Ok((n, m))
}

/// Splits a symmetric nonnegative pair matrix into per-phase tensions.
///
/// For `n = 2` the split is under-determined and we take
/// `sigma_1 = sigma_2 = sigma_12 / 2`. For `n >= 3` the split follows
/// `sigma_i = (sigma_ij + sigma_ik - sigma_jk) / 2`; with `n > 3` all triples
/// must agree to relative `1e-9`, and the result must be nonnegative and
/// rebuild the input.
pub fn split_tensions(rows: &[Vec<f64>]) -> Result<TensionSet, TensionError> {
    let (n, sigma_pair) = check_matrix(rows)?;
    let at = |i: usize, j: usize| sigma_pair[i * n + j];
    let mut sigma_phase = vec![0.0; n];

    if n == 2 {
        sigma_phase[0] = at(0, 1) / 2.0;
        sigma_phase[1] = at(0, 1) / 2.0;
    } else {
        for i in 0..n {
            let mut value: Option<f64> = None;
            for j in 0..n {
                if j == i {
                    continue;
                }
                for k in j + 1..n {
                    if k == i {
                        continue;
                    }
                    let cand = 0.5 * (at(i, j) + at(i, k) - at(j, k));
                    match value {
                        None => value = Some(cand),
                        Some(prev) => {
                            let scale = prev.abs().max(cand.abs()).max(1.0);
                            if (prev - cand).abs() > SPLIT_REL_TOL * scale {
                                return Err(TensionError::InconsistentTriples {
                                    phase: i,
                                    a: prev,
                                    b: cand,
                                });
                            }
                        }
                    }
                }
            }
            let value = value.expect("n >= 3");
            if value < 0.0 {
                return Err(TensionError::NegativePhaseTension { phase: i, value });
            }
            sigma_phase[i] = value;
        }
    }

    for i in 0..n {
        for j in i + 1..n {
            let got = sigma_phase[i] + sigma_phase[j];
            let want = at(i, j);
            if (got - want).abs() > SPLIT_REL_TOL * want.abs().max(1.0) {
                return Err(TensionError::ReconstructionMismatch { i, j, got, want });
            }
        }
    }

    Ok(TensionSet {
        n,
        sigma_pair,
        sigma_phase,
    })
}

/// Builds the pair matrix from an upper-triangular list and splits it.
pub fn split_tension_pairs(
    n: usize,
    pairs: &[(usize, usize, f64)],
) -> Result<TensionSet, TensionError> {
    if n < 2 {
        return Err(TensionError::TooFewPhases(n));
    }
    let mut rows = vec![vec![0.0; n]; n];
    for &(i, j, v) in pairs {
        if i >= n || j >= n || i == j {
            return Err(TensionError::PairOutOfRange { i, j, n });
        }
        rows[i][j] = v;
        rows[j][i] = v;
    }
    split_tensions(&rows)
}
