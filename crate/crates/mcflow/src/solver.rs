//! Two-step splitting scheme advancing the multiphase Allen-Cahn system.
//!
//! Each step of size `dt` does, for phase fields `u_k` on a periodic grid:
//!
//! 1. a decoupled semi-implicit Allen-Cahn solve per phase,
//!    `(I - a_k (Laplacian - alpha/eps^2 I)) u_k^{n+1/2}
//!       = u_k^n - (a_k / eps^2) (W'(u_k^n) - alpha u_k^n)`
//!    with `a_k = dt m_k^* sigma_k`, solved mode-wise in Fourier space;
//! 2. an explicit multiplier projection back onto `sum_k u_k = 1`, with one
//!    multiplier per mobility component, localized by the interface weight
//!    `sqrt(2 W(u)) + beta`.
//!
//! The projection conserves `sum_k u_k` pointwise up to rounding, and a phase
//! whose mobility row is entirely zero passes through both steps bitwise
//! unchanged.

use thiserror::Error;

use crate::grid::{GridError, ScalarField, SpectralGrid, SpectralTransform};
use crate::mobility::{DecompositionChoice, HarmonicDecomposition};
use crate::potential::{sqrt_2w, w_prime};
use crate::tension::TensionSet;

/// Numeric parameters of the scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverParams {
    /// Interface width.
    pub epsilon: f64,
    /// Time step.
    pub dt: f64,
    /// Stabilization shift in the explicit part; 0 disables it.
    pub alpha: f64,
    /// Regularization floor keeping projection denominators positive.
    pub beta: f64,
    /// Number of steps [`Solver::evolve`] takes.
    pub n_steps: usize,
    /// How the mobility matrix was decomposed (informational here; the
    /// resolved decomposition is passed to [`Solver::new`]).
    pub decomposition: DecompositionChoice,
}

impl SolverParams {
    pub fn new(epsilon: f64, dt: f64) -> Self {
        Self {
            epsilon,
            dt,
            alpha: 0.0,
            beta: f64::EPSILON,
            n_steps: 0,
            decomposition: DecompositionChoice::Canonical,
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(SolverError::BadParam("epsilon must be positive"));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(SolverError::BadParam("dt must be positive"));
        }
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return Err(SolverError::BadParam("alpha must be nonnegative"));
        }
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(SolverError::BadParam("beta must be positive"));
        }
        Ok(())
    }
}

/// All phase fields at one time, on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseState {
    fields: Vec<ScalarField>,
    time: f64,
}

impl PhaseState {
    /// Panics if the fields do not share a grid.
    pub fn new(fields: Vec<ScalarField>, time: f64) -> Self {
        assert!(!fields.is_empty(), "need at least one phase");
        let grid = fields[0].grid().clone();
        for f in &fields[1..] {
            assert_eq!(f.grid(), &grid, "phase fields must share a grid");
        }
        Self { fields, time }
    }

    pub fn n_phases(&self) -> usize {
        self.fields.len()
    }

    pub fn grid(&self) -> &SpectralGrid {
        self.fields[0].grid()
    }

    pub fn fields(&self) -> &[ScalarField] {
        &self.fields
    }

    pub fn field(&self, k: usize) -> &ScalarField {
        &self.fields[k]
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    /// Relabels phases by `perm` (phase `k` becomes `perm[k]`).
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut fields = self.fields.clone();
        for (k, f) in self.fields.iter().enumerate() {
            fields[perm[k]] = f.clone();
        }
        Self {
            fields,
            time: self.time,
        }
    }

    pub fn all_finite(&self) -> bool {
        self.fields.iter().all(|f| f.all_finite())
    }
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid solver parameter: {0}")]
    BadParam(&'static str),
    #[error("solver built for {want} phases, state has {got}")]
    PhaseCountMismatch { got: usize, want: usize },
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("phase {phase} became non-finite at step {step}")]
    NonFiniteField { phase: usize, step: usize },
    #[error("hook failed: {0}")]
    Hook(#[from] Box<dyn std::error::Error + Send + Sync>),
}

/// Precomputed per-component coefficient lists for the projection step.
struct ComponentCoeffs {
    /// `(phase, m_i^p)` for the nonzero coefficients only. Components with no
    /// positive coefficient are dropped: they would contribute a 0/0
    /// multiplier and the scheme defines their contribution as zero.
    entries: Vec<(usize, f64)>,
}

/// Time stepper bound to one grid, tension set, and mobility decomposition.
pub struct Solver {
    tensions: TensionSet,
    decomposition: HarmonicDecomposition,
    params: SolverParams,
    transform: SpectralTransform,
    /// Per phase: `None` for frozen phases (`m_k^* = 0`), otherwise the
    /// precomputed Helmholtz denominators for `a_k = dt m_k^* sigma_k`.
    helmholtz: Vec<Option<Vec<f64>>>,
    components: Vec<ComponentCoeffs>,
}

impl Solver {
    pub fn new(
        grid: &SpectralGrid,
        tensions: TensionSet,
        decomposition: HarmonicDecomposition,
        params: SolverParams,
    ) -> Result<Self, SolverError> {
        params.validate()?;
        if tensions.n_phases() != decomposition.n_phases() {
            return Err(SolverError::PhaseCountMismatch {
                got: decomposition.n_phases(),
                want: tensions.n_phases(),
            });
        }
        let transform = SpectralTransform::new(grid);
        let shift = params.alpha / (params.epsilon * params.epsilon);
        let helmholtz = (0..tensions.n_phases())
            .map(|k| {
                let a = params.dt * decomposition.m_star()[k] * tensions.phase(k);
                (a != 0.0).then(|| transform.helmholtz_denominators(a, shift))
            })
            .collect();
        let components = decomposition
            .components()
            .iter()
            .filter_map(|c| {
                let entries: Vec<(usize, f64)> = c
                    .coeffs()
                    .iter()
                    .enumerate()
                    .filter(|(_, &v)| v > 0.0)
                    .map(|(i, &v)| (i, v))
                    .collect();
                (!entries.is_empty()).then_some(ComponentCoeffs { entries })
            })
            .collect();
        Ok(Self {
            tensions,
            decomposition,
            params,
            transform,
            helmholtz,
            components,
        })
    }

    pub fn params(&self) -> &SolverParams {
        &self.params
    }

    pub fn tensions(&self) -> &TensionSet {
        &self.tensions
    }

    pub fn decomposition(&self) -> &HarmonicDecomposition {
        &self.decomposition
    }

    /// The solver's FFT plans, reusable for spectral diagnostics on the same
    /// grid.
    pub fn transform(&self) -> &SpectralTransform {
        &self.transform
    }

    fn check_state(&self, state: &PhaseState) -> Result<(), SolverError> {
        if state.n_phases() != self.tensions.n_phases() {
            return Err(SolverError::PhaseCountMismatch {
                got: state.n_phases(),
                want: self.tensions.n_phases(),
            });
        }
        if state.grid() != self.transform.grid() {
            return Err(GridError::SizeMismatch {
                got: state.grid().len(),
                want: self.transform.grid().len(),
            }
            .into());
        }
        Ok(())
    }

    /// Step 1: decoupled semi-implicit Allen-Cahn solve per phase. Frozen
    /// phases (`m_k^* = 0`) are returned unchanged, skipping the transform
    /// entirely.
    pub fn step1_decoupled(&self, state: &PhaseState) -> Result<PhaseState, SolverError> {
        self.check_state(state)?;
        let eps_sq = self.params.epsilon * self.params.epsilon;
        let alpha = self.params.alpha;
        let mut fields = Vec::with_capacity(state.n_phases());
        for (k, u) in state.fields().iter().enumerate() {
            let Some(denominators) = &self.helmholtz[k] else {
                fields.push(u.clone());
                continue;
            };
            let a = self.params.dt * self.decomposition.m_star()[k] * self.tensions.phase(k);
            let scale = a / eps_sq;
            let mut rhs = u.clone();
            for v in rhs.values_mut() {
                *v -= scale * (w_prime(*v) - alpha * *v);
            }
            fields.push(self.transform.apply_helmholtz_with(&rhs, denominators)?);
        }
        Ok(PhaseState {
            fields,
            time: state.time,
        })
    }

    /// Step 2: explicit regularized projection onto the partition constraint.
    ///
    /// Pointwise, with `w_i = sqrt(2 W(u_i^{n+1/2})) + beta`:
    /// `abar_i = (u_i^{n+1/2} - u_i^n) / (dt max(m_i^*, beta))`,
    /// `lambda^p = -(sum_i m_i^p abar_i) / (sum_i m_i^p w_i)`,
    /// `u_k^{n+1} = u_k^{n+1/2} + dt (sum_p m_k^p lambda^p) w_k`.
    /// Frozen phases keep their previous field bitwise.
    pub fn step2_project(
        &self,
        half: &PhaseState,
        prev: &PhaseState,
    ) -> Result<PhaseState, SolverError> {
        self.check_state(half)?;
        self.check_state(prev)?;
        let n = half.n_phases();
        let n_nodes = half.grid().len();
        let dt = self.params.dt;
        let beta = self.params.beta;
        let m_star = self.decomposition.m_star();

        let mut out: Vec<ScalarField> = (0..n)
            .map(|k| {
                if m_star[k] == 0.0 {
                    prev.fields[k].clone()
                } else {
                    half.fields[k].clone()
                }
            })
            .collect();

        let mut abar = vec![0.0f64; n];
        let mut weight = vec![0.0f64; n];
        let mut lambda = vec![0.0f64; n];
        for idx in 0..n_nodes {
            for i in 0..n {
                let uh = half.fields[i].values()[idx];
                abar[i] = (uh - prev.fields[i].values()[idx]) / (dt * m_star[i].max(beta));
                weight[i] = sqrt_2w(uh) + beta;
                lambda[i] = 0.0;
            }
            for component in &self.components {
                let mut num = 0.0;
                let mut den = 0.0;
                for &(i, m) in &component.entries {
                    num += m * abar[i];
                    den += m * weight[i];
                }
                let lambda_p = -num / den;
                for &(i, m) in &component.entries {
                    lambda[i] += m * lambda_p;
                }
            }
            for k in 0..n {
                if m_star[k] != 0.0 {
                    out[k].values_mut()[idx] += dt * lambda[k] * weight[k];
                }
            }
        }
        Ok(PhaseState {
            fields: out,
            time: half.time,
        })
    }

    /// One full step: decoupled solve, projection, time advanced by `dt`.
    pub fn step(&self, state: &PhaseState) -> Result<PhaseState, SolverError> {
        let half = self.step1_decoupled(state)?;
        let next = self.step2_project(&half, state)?;
        Ok(next.with_time(state.time + self.params.dt))
    }

    /// Runs `params.n_steps` steps, invoking `hook` with the step index and
    /// state after every step (and once with the initial state at index 0).
    /// Aborts if any field value becomes non-finite.
    pub fn evolve<F>(&self, state: PhaseState, mut hook: F) -> Result<PhaseState, SolverError>
    where
        F: FnMut(usize, &PhaseState) -> Result<(), Box<dyn std::error::Error + Send + Sync>>,
    {
        self.check_state(&state)?;
        hook(0, &state)?;
        let mut current = state;
        for step in 1..=self.params.n_steps {
            current = self.step(&current)?;
            for (phase, field) in current.fields().iter().enumerate() {
                if !field.all_finite() {
                    return Err(SolverError::NonFiniteField { phase, step });
                }
            }
            hook(step, &current)?;
        }
        Ok(current)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{init_phases, Shape};
    use crate::mobility::{canonical_decomposition, sparse_decomposition, MobilitySet};
    use crate::tension::split_tension_pairs;

    fn uniform_tensions(n: usize) -> TensionSet {
        let pairs: Vec<_> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j, 1.0)))
            .collect();
        split_tension_pairs(n, &pairs).unwrap()
    }

    fn solver_for(
        grid: &SpectralGrid,
        mob: &MobilitySet,
        params: SolverParams,
    ) -> Solver {
        let tensions = uniform_tensions(mob.n_phases());
        let dec = canonical_decomposition(mob);
        Solver::new(grid, tensions, dec, params).unwrap()
    }

    fn constant_state(grid: &SpectralGrid, values: &[f64]) -> PhaseState {
        PhaseState::new(
            values
                .iter()
                .map(|&v| ScalarField::constant(grid, v))
                .collect(),
            0.0,
        )
    }

    #[test]
    fn pure_phases_are_fixed_points() {
        let grid = SpectralGrid::square(16, 1.0).unwrap();
        let mob = MobilitySet::uniform(3, 1.0).unwrap();
        let mut params = SolverParams::new(0.05, 1e-4);
        params.alpha = 2.0;
        let solver = solver_for(&grid, &mob, params);
        let state = constant_state(&grid, &[1.0, 0.0, 0.0]);
        let half = solver.step1_decoupled(&state).unwrap();
        for (k, want) in [1.0, 0.0, 0.0].iter().enumerate() {
            for &v in half.field(k).values() {
                assert!(
                    (v - want).abs() < 1e-12,
                    "phase {k}: {v} vs {want}"
                );
            }
        }
        let next = solver.step(&state).unwrap();
        for (k, want) in [1.0, 0.0, 0.0].iter().enumerate() {
            for &v in next.field(k).values() {
                assert!((v - want).abs() < 1e-12);
            }
        }
    }

    // Position of the 1/2 level of a profile along x, by linear interpolation
    // on the first row.
    fn half_level_crossing(field: &ScalarField) -> f64 {
        let k = field.grid().sizes()[0];
        let ky = field.grid().sizes()[1];
        let h = field.grid().spacing(0);
        let row: Vec<f64> = (0..k).map(|i| field.values()[i * ky]).collect();
        for i in 0..k - 1 {
            let (a, b) = (row[i], row[i + 1]);
            if (a - 0.5) * (b - 0.5) <= 0.0 && a != b && a >= 0.5 {
                return (i as f64 + (a - 0.5) / (a - b)) * h;
            }
        }
        panic!("no 1/2 crossing found");
    }

    #[test]
    fn flat_profile_is_nearly_stationary() {
        // 1D profile across x on a long domain; one step must not move the
        // 1/2 level by more than 1e-3 eps.
        let grid = SpectralGrid::new(&[256, 4], &[1.0, 1.0 / 64.0]).unwrap();
        let eps = 6.0 / 256.0;
        let dt = 0.25 / (256.0 * 256.0);
        let shapes = vec![Shape::half_space(vec![1.0, 0.0], 0.5).unwrap()];
        let (state, _) = init_phases(&grid, &shapes, eps).unwrap();
        let mob = MobilitySet::uniform(2, 1.0).unwrap();
        let solver = solver_for(&grid, &mob, SolverParams::new(eps, dt));
        let before = half_level_crossing(state.field(0));
        let after = half_level_crossing(&solver.step(&state).unwrap().field(0).clone());
        assert!(
            (after - before).abs() <= 1e-3 * eps,
            "moved {} eps",
            (after - before).abs() / eps
        );
    }

    #[test]
    fn projection_without_change_is_identity() {
        let grid = SpectralGrid::square(16, 1.0).unwrap();
        let mob = MobilitySet::uniform(3, 1.0).unwrap();
        let solver = solver_for(&grid, &mob, SolverParams::new(0.05, 1e-4));
        let shapes = vec![Shape::ball(vec![0.5, 0.5], 0.25).unwrap()];
        let (mut state, _) = init_phases(&grid, &shapes, 0.05).unwrap();
        // make it 3 phases: split ambient into two copies scaled by 1/2
        let ambient = state.fields()[1].clone();
        let halved: Vec<f64> = ambient.values().iter().map(|v| v / 2.0).collect();
        let half_field = ScalarField::from_values(&grid, halved).unwrap();
        state = PhaseState::new(
            vec![state.fields()[0].clone(), half_field.clone(), half_field],
            0.0,
        );
        let out = solver.step2_project(&state, &state).unwrap();
        for k in 0..3 {
            assert_eq!(out.field(k).values(), state.field(k).values());
        }
    }

    #[test]
    fn frozen_phase_is_bitwise_unchanged() {
        let grid = SpectralGrid::square(32, 1.0).unwrap();
        // phase 0 frozen: both its mobilities vanish
        let mob = MobilitySet::from_pairs(3, &[(0, 1, 0.0), (0, 2, 0.0), (1, 2, 1.0)]).unwrap();
        let shapes = vec![
            Shape::ball(vec![0.3, 0.5], 0.15).unwrap(),
            Shape::ball(vec![0.7, 0.5], 0.15).unwrap(),
        ];
        let eps = 3.0 / 32.0;
        let (state, _) = init_phases(&grid, &shapes, eps).unwrap();
        let solver = solver_for(&grid, &mob, SolverParams::new(eps, 1e-4));
        let mut current = state.clone();
        for _ in 0..20 {
            current = solver.step(&current).unwrap();
        }
        assert_eq!(current.field(0).values(), state.field(0).values());
        // the others moved
        assert_ne!(current.field(1).values(), state.field(1).values());
    }

    #[test]
    fn all_zero_mobility_freezes_everything() {
        let grid = SpectralGrid::square(16, 1.0).unwrap();
        let mob = MobilitySet::uniform(3, 0.0).unwrap();
        let shapes = vec![
            Shape::ball(vec![0.3, 0.5], 0.15).unwrap(),
            Shape::ball(vec![0.7, 0.5], 0.15).unwrap(),
        ];
        let (state, _) = init_phases(&grid, &shapes, 0.05).unwrap();
        let solver = solver_for(&grid, &mob, SolverParams::new(0.05, 1e-4));
        let next = solver.step(&state).unwrap();
        for k in 0..3 {
            assert_eq!(next.field(k).values(), state.field(k).values());
        }
    }

    #[test]
    fn projection_conserves_partition_sum() {
        let grid = SpectralGrid::square(64, 1.0).unwrap();
        let mob =
            MobilitySet::from_pairs(3, &[(0, 1, 1.0), (0, 2, 1.0), (1, 2, 0.25)]).unwrap();
        let shapes = vec![
            Shape::ball(vec![0.25, 0.5], 0.15).unwrap(),
            Shape::ball(vec![0.75, 0.5], 0.15).unwrap(),
        ];
        let eps = 1.5 / 64.0;
        let (state, _) = init_phases(&grid, &shapes, eps).unwrap();
        let solver = solver_for(&grid, &mob, SolverParams::new(eps, 0.25 / (64.0 * 64.0)));
        let mut current = state.clone();
        for _ in 0..50 {
            let next = solver.step(&current).unwrap();
            // pointwise conservation against the previous step
            for idx in 0..grid.len() {
                let before: f64 = (0..3).map(|k| current.field(k).values()[idx]).sum();
                let after: f64 = (0..3).map(|k| next.field(k).values()[idx]).sum();
                assert!((after - before).abs() <= 1e-12);
            }
            current = next;
        }
    }

    #[test]
    fn sparse_and_canonical_agree_for_two_phases() {
        // pure two-phase shrinking circle; radius should follow the exact law
        let grid = SpectralGrid::square(64, 1.0).unwrap();
        let mob = MobilitySet::uniform(2, 1.0).unwrap();
        let eps = 3.0 / 64.0;
        let dt = 1.0 / (64.0 * 64.0);
        let shapes = vec![Shape::ball(vec![0.5, 0.5], 0.3).unwrap()];
        let (state, _) = init_phases(&grid, &shapes, eps).unwrap();
        let tensions = uniform_tensions(2);
        let mut params = SolverParams::new(eps, dt);
        params.n_steps = 100;
        let canonical = Solver::new(
            &grid,
            tensions.clone(),
            canonical_decomposition(&mob),
            params.clone(),
        )
        .unwrap();
        let sparse = Solver::new(&grid, tensions, sparse_decomposition(&mob), params).unwrap();
        let a = canonical.evolve(state.clone(), |_, _| Ok(())).unwrap();
        let b = sparse.evolve(state, |_, _| Ok(())).unwrap();
        let t = 100.0 * dt;
        let r_exact = (0.3f64 * 0.3 - 2.0 * t).sqrt();
        for out in [&a, &b] {
            let mass = crate::diagnostics::phase_mass(out, 0);
            let r = (mass / std::f64::consts::PI).sqrt();
            assert!((r - r_exact).abs() < 2.0 / 64.0, "r = {r} vs {r_exact}");
        }
        for (x, y) in a.field(0).values().iter().zip(b.field(0).values()) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn trajectory_is_permutation_equivariant() {
        let grid = SpectralGrid::square(32, 1.0).unwrap();
        let mob =
            MobilitySet::from_pairs(3, &[(0, 1, 1.0), (0, 2, 0.5), (1, 2, 0.25)]).unwrap();
        let tensions =
            split_tension_pairs(3, &[(0, 1, 1.0), (0, 2, 0.8), (1, 2, 0.6)]).unwrap();
        let shapes = vec![
            Shape::ball(vec![0.3, 0.5], 0.15).unwrap(),
            Shape::ball(vec![0.7, 0.5], 0.15).unwrap(),
        ];
        let eps = 3.0 / 32.0;
        let (state, _) = init_phases(&grid, &shapes, eps).unwrap();
        let params = SolverParams::new(eps, 1e-4);

        let perm = [2usize, 0, 1];
        let solver = Solver::new(
            &grid,
            tensions.clone(),
            canonical_decomposition(&mob),
            params.clone(),
        )
        .unwrap();
        let solver_p = Solver::new(
            &grid,
            tensions.permuted(&perm),
            canonical_decomposition(&mob.permuted(&perm)),
            params,
        )
        .unwrap();

        let mut a = state.clone();
        let mut b = state.permuted(&perm);
        for _ in 0..10 {
            a = solver.step(&a).unwrap();
            b = solver_p.step(&b).unwrap();
        }
        let a_p = a.permuted(&perm);
        for k in 0..3 {
            for (x, y) in a_p.field(k).values().iter().zip(b.field(k).values()) {
                assert!((x - y).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn evolve_zero_steps_returns_input() {
        let grid = SpectralGrid::square(16, 1.0).unwrap();
        let mob = MobilitySet::uniform(2, 1.0).unwrap();
        let solver = solver_for(&grid, &mob, SolverParams::new(0.05, 1e-4));
        let (state, _) =
            init_phases(&grid, &[Shape::ball(vec![0.5, 0.5], 0.2).unwrap()], 0.05).unwrap();
        let mut calls = 0;
        let out = solver
            .evolve(state.clone(), |step, _| {
                assert_eq!(step, 0);
                calls += 1;
                Ok(())
            })
            .unwrap();
        assert_eq!(calls, 1);
        assert_eq!(out, state);
    }

    #[test]
    fn evolve_aborts_on_blowup() {
        let grid = SpectralGrid::square(16, 1.0).unwrap();
        let mob = MobilitySet::uniform(2, 1.0).unwrap();
        let mut params = SolverParams::new(1e-3, 1e6);
        params.n_steps = 50;
        let solver = solver_for(&grid, &mob, params);
        let (state, _) =
            init_phases(&grid, &[Shape::ball(vec![0.5, 0.5], 0.2).unwrap()], 1e-3).unwrap();
        let err = solver.evolve(state, |_, _| Ok(())).unwrap_err();
        assert!(matches!(err, SolverError::NonFiniteField { .. }), "{err}");
    }

    #[test]
    fn hooks_are_read_only_for_the_trajectory() {
        let grid = SpectralGrid::square(16, 1.0).unwrap();
        let mob = MobilitySet::uniform(2, 1.0).unwrap();
        let mut params = SolverParams::new(0.06, 1e-4);
        params.n_steps = 8;
        let solver = solver_for(&grid, &mob, params);
        let (state, _) =
            init_phases(&grid, &[Shape::ball(vec![0.5, 0.5], 0.2).unwrap()], 0.06).unwrap();
        let mut every_1 = Vec::new();
        let a = solver
            .evolve(state.clone(), |s, st| {
                every_1.push((s, st.clone()));
                Ok(())
            })
            .unwrap();
        let b = solver
            .evolve(state, |s, _| {
                assert!(s <= 8);
                Ok(())
            })
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn state_mismatch_is_rejected() {
        let grid = SpectralGrid::square(16, 1.0).unwrap();
        let mob = MobilitySet::uniform(3, 1.0).unwrap();
        let solver = solver_for(&grid, &mob, SolverParams::new(0.05, 1e-4));
        let two_phase = constant_state(&grid, &[0.5, 0.5]);
        assert!(matches!(
            solver.step(&two_phase),
            Err(SolverError::PhaseCountMismatch { .. })
        ));
        let other_grid = SpectralGrid::square(8, 1.0).unwrap();
        let wrong_grid = constant_state(&other_grid, &[0.4, 0.3, 0.3]);
        assert!(solver.step(&wrong_grid).is_err());
    }
}
