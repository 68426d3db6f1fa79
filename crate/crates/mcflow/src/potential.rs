//! The double-well potential `W(s) = s^2 (1-s)^2 / 2`, its derivatives, and
//! the optimal 1D interface profile.
//!
//! Everything here is a pure function of its arguments; the module carries no
//! state and is safe to call from any thread.

/// Surface-energy constant of the well: `c_W = ∫_0^1 sqrt(2 W(s)) ds = 1/6`.
///
/// For this potential `sqrt(2 W(s)) = s (1 - s)` on `[0, 1]`, so the integral
/// is elementary.
pub const C_W: f64 = 1.0 / 6.0;

/// Double-well potential `W(s) = s^2 (1-s)^2 / 2`.
///
/// Minima of value 0 at `s = 0` and `s = 1`, positive everywhere else.
#[inline]
pub fn w(s: f64) -> f64 {
    let t = s * (1.0 - s);
    0.5 * t * t
}

/// `W'(s) = s (1-s) (1-2s)`.
#[inline]
pub fn w_prime(s: f64) -> f64 {
    s * (1.0 - s) * (1.0 - 2.0 * s)
}

/// `W''(s) = 1 - 6s + 6s^2`.
#[inline]
pub fn w_double_prime(s: f64) -> f64 {
    1.0 + 6.0 * s * (s - 1.0)
}

/// `sqrt(2 W(s)) = |s (1-s)|`, in closed form.
///
/// The closed form stays exact and nonnegative for overshoot values slightly
/// outside `[0, 1]`, where `sqrt(2.0 * w(s))` would be fine too but loses
/// the sign structure to rounding near the wells.
#[inline]
pub fn sqrt_2w(s: f64) -> f64 {
    (s * (1.0 - s)).abs()
}

/// Optimal interface profile `q(s) = 1 / (1 + e^s)`.
///
/// Solves `q' = -sqrt(2 W(q))` and `q'' = W'(q)` for this potential, with
/// `q(0) = 1/2`, `q(-inf) = 1`, `q(+inf) = 0`. Strictly decreasing with
/// values in `(0, 1)` for finite input.
#[inline]
pub fn profile(s: f64) -> f64 {
    1.0 / (1.0 + s.exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn well_minima_and_midpoint() {
        assert_eq!(w(0.0), 0.0);
        assert_eq!(w(1.0), 0.0);
        assert_eq!(w(0.5), 0.03125);
        // positive away from the wells
        for &s in &[-0.5, 0.2, 0.7, 1.5] {
            assert!(w(s) > 0.0, "w({s}) should be positive");
        }
    }

    #[test]
    fn w_prime_critical_points() {
        assert_eq!(w_prime(0.0), 0.0);
        assert_eq!(w_prime(1.0), 0.0);
        assert_eq!(w_prime(0.5), 0.0);
        assert_eq!(w_prime(0.25), 0.09375);
    }

    // Finite-difference oracle for W' over a dense sample of [-0.5, 1.5].
    #[test]
    fn w_prime_matches_finite_differences() {
        let h = 1e-5;
        let n = 2001;
        for i in 0..n {
            let s = -0.5 + 2.0 * (i as f64) / ((n - 1) as f64);
            let fd = (w(s + h) - w(s - h)) / (2.0 * h);
            assert!(
                (w_prime(s) - fd).abs() <= 1e-6,
                "W'({s}) = {} vs fd {}",
                w_prime(s),
                fd
            );
        }
    }

    #[test]
    fn w_double_prime_matches_finite_differences() {
        let h = 1e-5;
        for i in 0..401 {
            let s = -0.5 + 2.0 * (i as f64) / 400.0;
            let fd = (w_prime(s + h) - w_prime(s - h)) / (2.0 * h);
            assert!((w_double_prime(s) - fd).abs() <= 1e-5);
        }
    }

    #[test]
    fn sqrt_2w_closed_form() {
        assert_eq!(sqrt_2w(0.0), 0.0);
        assert_eq!(sqrt_2w(1.0), 0.0);
        assert_eq!(sqrt_2w(0.5), 0.25);
        // finite and positive for overshoots
        assert!((sqrt_2w(-0.1) - 0.11).abs() < 1e-15);
        assert!((sqrt_2w(1.1) - 0.11).abs() < 1e-15);
        // consistent with sqrt(2 W) where both are clean
        for i in 0..=100 {
            let s = i as f64 / 100.0;
            assert!((sqrt_2w(s) - (2.0 * w(s)).sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn profile_values_and_symmetry() {
        assert_eq!(profile(0.0), 0.5);
        assert!((profile(1.0) - 1.0 / (1.0 + std::f64::consts::E)).abs() < 1e-15);
        assert!((profile(1.0) - 0.26894).abs() < 1e-5);
        // odd symmetry about 1/2
        for i in 0..200 {
            let s = -8.0 + i as f64 * 0.08;
            assert!((profile(s) - (1.0 - profile(-s))).abs() < 1e-15);
        }
    }

    // The profile must satisfy q'(s) = -sqrt(2 W(q(s))); q' here in the
    // analytic form -e^s / (1 + e^s)^2.
    #[test]
    fn profile_satisfies_the_ode() {
        for i in 0..=2000 {
            let s = -10.0 + i as f64 * 0.01;
            let es = s.exp();
            let dq = -es / ((1.0 + es) * (1.0 + es));
            assert!(
                (dq + sqrt_2w(profile(s))).abs() <= 1e-10,
                "ODE residual too large at s = {s}"
            );
        }
    }

    #[test]
    fn profile_monotone_and_bounded() {
        let mut prev = f64::INFINITY;
        for i in 0..=400 {
            let s = -10.0 + i as f64 * 0.05;
            let q = profile(s);
            assert!(q > 0.0 && q < 1.0);
            assert!(q < prev, "profile must be strictly decreasing");
            prev = q;
        }
    }

    // Trapezoid oracle for c_W; the integrand is quadratic so the trapezoid
    // error is h^2/6 exactly.
    #[test]
    fn c_w_matches_quadrature() {
        let n = 100_000usize;
        let h = 1.0 / n as f64;
        let mut acc = 0.5 * (sqrt_2w(0.0) + sqrt_2w(1.0));
        for i in 1..n {
            acc += sqrt_2w(i as f64 * h);
        }
        let quad = acc * h;
        assert!((quad - C_W).abs() <= 1e-10, "quadrature {quad} vs {C_W}");
        assert!((C_W - 0.1666666666666).abs() < 1e-12);
    }

    // Scaling 4W doubles the constant: sqrt(2*4W) = 2 sqrt(2W).
    #[test]
    fn c_w_scales_with_the_potential() {
        let n = 10_000usize;
        let h = 1.0 / n as f64;
        let scaled = |s: f64| (2.0 * 4.0 * w(s)).sqrt();
        let mut acc = 0.5 * (scaled(0.0) + scaled(1.0));
        for i in 1..n {
            acc += scaled(i as f64 * h);
        }
        assert!((acc * h - 2.0 * C_W).abs() <= 1e-8);
    }
}
