//! Quantitative observables over phase states: masses, effective radii, the
//! theoretical radius law, the Cahn-Hilliard energy, the partition-constraint
//! error, and a cell-count interface distance between runs.

use rustfft::num_complex::Complex;

use crate::grid::SpectralTransform;
use crate::potential::w;
use crate::solver::PhaseState;
use crate::tension::TensionSet;

/// One diagnostics sample; rows accumulate into the CSV time series.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesRow {
    pub time: f64,
    pub radii: Vec<f64>,
    pub masses: Vec<f64>,
    pub constraint_error: f64,
    pub energy: f64,
}

/// Time-ordered diagnostics samples.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TimeSeries {
    rows: Vec<TimeSeriesRow>,
}

impl TimeSeries {
    pub fn push(&mut self, row: TimeSeriesRow) {
        if let Some(last) = self.rows.last() {
            assert!(row.time > last.time, "time series must increase");
        }
        assert!(row.time.is_finite() && row.constraint_error.is_finite());
        self.rows.push(row);
    }

    pub fn rows(&self) -> &[TimeSeriesRow] {
        &self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Samples every row of a state's diagnostics in one pass.
pub fn sample(
    state: &PhaseState,
    tensions: &TensionSet,
    epsilon: f64,
    transform: &SpectralTransform,
) -> TimeSeriesRow {
    let n = state.n_phases();
    let masses: Vec<f64> = (0..n).map(|i| phase_mass(state, i)).collect();
    let radii: Vec<f64> = (0..n).map(|i| effective_radius(state, i).radius).collect();
    TimeSeriesRow {
        time: state.time(),
        radii,
        masses,
        constraint_error: constraint_error(state),
        energy: cahn_hilliard_energy_with(state, tensions, epsilon, transform),
    }
}

/// Grid quadrature of phase `i`: `sum u_i * prod h_j`.
///
/// Panics if `i` is out of range.
pub fn phase_mass(state: &PhaseState, i: usize) -> f64 {
    assert!(i < state.n_phases(), "phase index {i} out of range");
    let cell = state.grid().cell_volume();
    state.field(i).values().iter().sum::<f64>() * cell
}

/// Mass-based radius with an extinction flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveRadius {
    pub radius: f64,
    pub extinct: bool,
}

/// Radius of the ball with the phase's mass: `sqrt(mass/pi)` in 2D,
/// `(3 mass / 4 pi)^(1/3)` in 3D. Nonpositive mass reports radius 0 and the
/// extinct flag.
pub fn effective_radius(state: &PhaseState, i: usize) -> EffectiveRadius {
    let mass = phase_mass(state, i);
    if mass <= 0.0 {
        return EffectiveRadius {
            radius: 0.0,
            extinct: true,
        };
    }
    let radius = match state.grid().dim() {
        2 => (mass / std::f64::consts::PI).sqrt(),
        _ => (3.0 * mass / (4.0 * std::f64::consts::PI)).cbrt(),
    };
    EffectiveRadius {
        radius,
        extinct: false,
    }
}

/// Radius law for a ball shrinking against a fixed phase:
/// `sqrt(r0^2 - 2 sigma m t)`, clamped to 0 past extinction.
pub fn exact_radius(r0: f64, sigma_pair: f64, mobility: f64, t: f64) -> f64 {
    let sq = r0 * r0 - 2.0 * sigma_pair * mobility * t;
    if sq <= 0.0 {
        0.0
    } else {
        sq.sqrt()
    }
}

/// `max_x |1 - sum_k u_k(x)|`.
pub fn constraint_error(state: &PhaseState) -> f64 {
    let n_nodes = state.grid().len();
    let mut worst = 0.0f64;
    for idx in 0..n_nodes {
        let sum: f64 = state.fields().iter().map(|f| f.values()[idx]).sum();
        worst = worst.max((1.0 - sum).abs());
    }
    worst
}

/// Per-phase Modica-Mortola energy
/// `sigma_i int (eps |grad u_i|^2 / 2 + W(u_i) / eps) dx`
/// with the gradient taken spectrally and the integral by grid quadrature.
pub fn phase_energy(
    state: &PhaseState,
    i: usize,
    sigma_i: f64,
    epsilon: f64,
    transform: &SpectralTransform,
) -> f64 {
    assert!(i < state.n_phases(), "phase index {i} out of range");
    let grid = state.grid();
    let field = state.field(i);
    let spectrum = transform.forward(field).expect("field matches transform");
    let d = grid.dim();
    let two_pi = 2.0 * std::f64::consts::PI;

    let mut grad_sq = vec![0.0f64; grid.len()];
    let mut freqs = vec![0i64; d];
    let mut deriv = vec![Complex::new(0.0, 0.0); grid.len()];
    for axis in 0..d {
        for (idx, c) in spectrum.iter().enumerate() {
            transform.bin_frequencies(idx, &mut freqs);
            let xi = two_pi * freqs[axis] as f64 / grid.lengths()[axis];
            // d/dx -> multiply by 2 pi i xi
            deriv[idx] = Complex::new(-c.im * xi, c.re * xi);
        }
        let dx = transform.inverse(&deriv).expect("sizes match");
        for (g, v) in grad_sq.iter_mut().zip(dx.values()) {
            *g += v * v;
        }
    }

    let mut acc = 0.0;
    for (v, g) in field.values().iter().zip(&grad_sq) {
        acc += 0.5 * epsilon * g + w(*v) / epsilon;
    }
    sigma_i * acc * grid.cell_volume()
}

/// Total energy `sum_i sigma_i int (eps |grad u_i|^2 / 2 + W(u_i)/eps) dx`.
///
/// With additive tensions an ij-interface of unit measure carries energy
/// `c_W (sigma_i + sigma_j)` in the sharp limit.
pub fn cahn_hilliard_energy(state: &PhaseState, tensions: &TensionSet, epsilon: f64) -> f64 {
    let transform = SpectralTransform::new(state.grid());
    cahn_hilliard_energy_with(state, tensions, epsilon, &transform)
}

/// Same with a caller-provided transform, for use inside stepping loops.
pub fn cahn_hilliard_energy_with(
    state: &PhaseState,
    tensions: &TensionSet,
    epsilon: f64,
    transform: &SpectralTransform,
) -> f64 {
    (0..state.n_phases())
        .map(|i| phase_energy(state, i, tensions.phase(i), epsilon, transform))
        .sum()
}

/// Symmetric Hausdorff-style distance, in grid cells, between the 1/2
/// superlevel sets of phase `i` in two states.
///
/// Counts dilation rounds (Chebyshev metric: 8-neighborhood in 2D, 26 in 3D,
/// periodic) until each set covers the other. Both sets empty gives 0; one
/// empty set gives the largest axis size.
pub fn interface_displacement(a: &PhaseState, b: &PhaseState, i: usize) -> usize {
    assert_eq!(a.grid(), b.grid(), "states must share a grid");
    let grid = a.grid();
    let set_a: Vec<bool> = a.field(i).values().iter().map(|&v| v >= 0.5).collect();
    let set_b: Vec<bool> = b.field(i).values().iter().map(|&v| v >= 0.5).collect();
    let any_a = set_a.iter().any(|&x| x);
    let any_b = set_b.iter().any(|&x| x);
    match (any_a, any_b) {
        (false, false) => return 0,
        (true, true) => {}
        _ => return *grid.sizes().iter().max().unwrap(),
    }
    let d_ab = directed_cell_distance(grid.sizes(), &set_a, &set_b);
    let d_ba = directed_cell_distance(grid.sizes(), &set_b, &set_a);
    d_ab.max(d_ba)
}

/// `max_{x in from} dist(x, to)` in Chebyshev cells, via BFS layers from
/// `to` over the periodic grid.
fn directed_cell_distance(sizes: &[usize], from: &[bool], to: &[bool]) -> usize {
    let d = sizes.len();
    let n: usize = sizes.iter().product();
    let mut dist = vec![usize::MAX; n];
    let mut frontier: Vec<usize> = (0..n).filter(|&i| to[i]).collect();
    for &i in &frontier {
        dist[i] = 0;
    }

    // neighbor offsets: all nonzero {-1,0,1}^d moves
    let mut offsets: Vec<Vec<isize>> = vec![vec![]];
    for _ in 0..d {
        offsets = offsets
            .into_iter()
            .flat_map(|p| {
                [-1isize, 0, 1].iter().map(move |&s| {
                    let mut q = p.clone();
                    q.push(s);
                    q
                })
            })
            .collect();
    }
    offsets.retain(|o| o.iter().any(|&s| s != 0));

    let mut remaining = from
        .iter()
        .enumerate()
        .filter(|&(i, &f)| f && dist[i] != 0)
        .count();
    let mut level = 0usize;
    let mut coords = vec![0usize; d];
    let mut scratch = Vec::new();
    while remaining > 0 && !frontier.is_empty() {
        level += 1;
        scratch.clear();
        for &idx in &frontier {
            // decompose idx
            let mut rest = idx;
            for a in (0..d).rev() {
                coords[a] = rest % sizes[a];
                rest /= sizes[a];
            }
            for off in &offsets {
                let mut nidx = 0usize;
                for a in 0..d {
                    let s = sizes[a] as isize;
                    let c = (coords[a] as isize + off[a]).rem_euclid(s) as usize;
                    nidx = nidx * sizes[a] + c;
                }
                if dist[nidx] == usize::MAX {
                    dist[nidx] = level;
                    if from[nidx] {
                        remaining -= 1;
                    }
                    scratch.push(nidx);
                }
            }
        }
        std::mem::swap(&mut frontier, &mut scratch);
    }
    from.iter()
        .enumerate()
        .filter(|&(_, &f)| f)
        .map(|(i, _)| dist[i])
        .max()
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{init_phases, Shape};
    use crate::grid::{ScalarField, SpectralGrid};
    use crate::potential::C_W;
    use crate::tension::split_tension_pairs;

    fn two_phase_tensions() -> TensionSet {
        split_tension_pairs(2, &[(0, 1, 1.0)]).unwrap()
    }

    #[test]
    fn mass_of_constants() {
        let g = SpectralGrid::square(16, 1.0).unwrap();
        let state = PhaseState::new(
            vec![
                ScalarField::constant(&g, 1.0),
                ScalarField::constant(&g, 0.0),
            ],
            0.0,
        );
        assert!((phase_mass(&state, 0) - 1.0).abs() < 1e-12);
        assert_eq!(phase_mass(&state, 1), 0.0);
    }

    #[test]
    #[should_panic(expected = "out of range")]
    fn mass_rejects_bad_index() {
        let g = SpectralGrid::square(8, 1.0).unwrap();
        let state = PhaseState::new(vec![ScalarField::constant(&g, 1.0)], 0.0);
        phase_mass(&state, 3);
    }

    #[test]
    fn smoothed_disk_mass_and_radius() {
        let g = SpectralGrid::square(256, 1.0).unwrap();
        let shapes = vec![Shape::ball(vec![0.5, 0.5], 0.2).unwrap()];
        let (state, _) = init_phases(&g, &shapes, 1.5 / 256.0).unwrap();
        let mass = phase_mass(&state, 0);
        let want = std::f64::consts::PI * 0.04;
        assert!((mass - want).abs() / want < 0.02);
        let r = effective_radius(&state, 0);
        assert!(!r.extinct);
        assert!((r.radius - 0.2).abs() <= g.spacing(0));
    }

    #[test]
    fn radius_of_3d_ball() {
        let g = SpectralGrid::cube(64, 1.0).unwrap();
        let shapes = vec![Shape::ball(vec![0.5, 0.5, 0.5], 0.2).unwrap()];
        let (state, _) = init_phases(&g, &shapes, 1.5 / 64.0).unwrap();
        let r = effective_radius(&state, 0);
        assert!((r.radius - 0.2).abs() <= g.spacing(0), "r = {}", r.radius);
    }

    #[test]
    fn extinct_phase_reports_zero() {
        let g = SpectralGrid::square(8, 1.0).unwrap();
        let state = PhaseState::new(
            vec![
                ScalarField::constant(&g, 0.0),
                ScalarField::constant(&g, 1.0),
            ],
            0.0,
        );
        let r = effective_radius(&state, 0);
        assert_eq!(r.radius, 0.0);
        assert!(r.extinct);
    }

    #[test]
    fn exact_radius_examples() {
        assert_eq!(exact_radius(0.2, 1.0, 1.0, 0.0), 0.2);
        let r = exact_radius(0.2, 1.0, 0.25, 0.02);
        assert!((r - 0.03f64.sqrt()).abs() < 1e-12);
        assert!((r - 0.173205).abs() < 1e-6);
        // extinction time and beyond
        let t_ext = 0.2f64 * 0.2 / 2.0;
        assert_eq!(exact_radius(0.2, 1.0, 1.0, t_ext), 0.0);
        assert_eq!(exact_radius(0.2, 1.0, 1.0, 0.05), 0.0);
    }

    #[test]
    fn constraint_error_detects_perturbation() {
        let g = SpectralGrid::square(16, 1.0).unwrap();
        let (state, _) =
            init_phases(&g, &[Shape::ball(vec![0.5, 0.5], 0.2).unwrap()], 0.05).unwrap();
        assert_eq!(constraint_error(&state), 0.0);
        let mut fields: Vec<ScalarField> = state.fields().to_vec();
        fields[0].values_mut()[7] += 1e-3;
        let state = PhaseState::new(fields, 0.0);
        assert!((constraint_error(&state) - 1e-3).abs() < 1e-15);
    }

    #[test]
    fn energy_of_constant_partition_is_zero() {
        let g = SpectralGrid::square(16, 1.0).unwrap();
        let state = PhaseState::new(
            vec![
                ScalarField::constant(&g, 1.0),
                ScalarField::constant(&g, 0.0),
            ],
            0.0,
        );
        let e = cahn_hilliard_energy(&state, &two_phase_tensions(), 0.05);
        assert!(e.abs() < 1e-13, "{e}");
    }

    #[test]
    fn slab_energy_matches_optimal_profile() {
        // two flat interfaces of unit length; the sharp-interface energy is
        // c_W (sigma_1 + sigma_2) per unit interface
        let k = 256;
        let g = SpectralGrid::square(k, 1.0).unwrap();
        let eps = 4.0 / k as f64;
        let slab = Shape::Intersection(vec![
            Shape::half_space(vec![-1.0, 0.0], -0.25).unwrap(), // x >= 0.25
            Shape::half_space(vec![1.0, 0.0], 0.75).unwrap(),   // x <= 0.75
        ]);
        let (state, _) = init_phases(&g, &[slab], eps).unwrap();
        let e = cahn_hilliard_energy(&state, &two_phase_tensions(), eps);
        let want = C_W * 1.0 * 2.0;
        assert!((e - want).abs() / want < 0.01, "e = {e}, want {want}");
    }

    #[test]
    fn energy_is_nonnegative() {
        let g = SpectralGrid::square(32, 1.0).unwrap();
        let (state, _) =
            init_phases(&g, &[Shape::ball(vec![0.5, 0.5], 0.25).unwrap()], 0.04).unwrap();
        assert!(cahn_hilliard_energy(&state, &two_phase_tensions(), 0.04) >= 0.0);
    }

    #[test]
    fn displacement_of_identical_and_shifted_states() {
        let g = SpectralGrid::square(32, 1.0).unwrap();
        let (state, _) =
            init_phases(&g, &[Shape::ball(vec![0.5, 0.5], 0.2).unwrap()], 0.03).unwrap();
        assert_eq!(interface_displacement(&state, &state, 0), 0);

        // shift by one node along x
        let k = 32;
        let mut shifted = vec![0.0; k * k];
        let values = state.field(0).values();
        for x in 0..k {
            for y in 0..k {
                shifted[((x + 1) % k) * k + y] = values[x * k + y];
            }
        }
        let shifted_state = PhaseState::new(
            vec![
                ScalarField::from_values(&g, shifted).unwrap(),
                state.field(1).clone(),
            ],
            0.0,
        );
        assert_eq!(interface_displacement(&state, &shifted_state, 0), 1);
    }

    #[test]
    fn displacement_with_empty_sets() {
        let g = SpectralGrid::square(16, 1.0).unwrap();
        let empty = PhaseState::new(
            vec![
                ScalarField::constant(&g, 0.0),
                ScalarField::constant(&g, 1.0),
            ],
            0.0,
        );
        let (ball, _) =
            init_phases(&g, &[Shape::ball(vec![0.5, 0.5], 0.2).unwrap()], 0.05).unwrap();
        assert_eq!(interface_displacement(&empty, &empty, 0), 0);
        assert_eq!(interface_displacement(&empty, &ball, 0), 16);
    }

    #[test]
    fn time_series_enforces_order() {
        let mut ts = TimeSeries::default();
        let row = |t: f64| TimeSeriesRow {
            time: t,
            radii: vec![0.1],
            masses: vec![0.05],
            constraint_error: 0.0,
            energy: 1.0,
        };
        ts.push(row(0.0));
        ts.push(row(0.5));
        assert_eq!(ts.rows().len(), 2);
        let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| {
            let mut ts2 = ts.clone();
            ts2.push(row(0.25));
        }));
        assert!(result.is_err());
    }
}
