//! Signed-distance shape primitives and phase-state initialization through
//! the optimal profile.
//!
//! Distances follow the convention negative inside, positive outside. Balls
//! see their periodic images (per-axis minimal wrap, exact for balls no
//! larger than half the domain); unions and intersections compose by min/max,
//! which is exact for disjoint or nested parts and approximate near corners.

use std::sync::Arc;

use thiserror::Error;

use crate::grid::{ScalarField, SpectralGrid};
use crate::potential::profile;
use crate::solver::PhaseState;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("shape uses {got} coordinates on a {want}-dimensional grid")]
    DimensionMismatch { got: usize, want: usize },
    #[error("half-space normal has zero length")]
    ZeroNormal,
    #[error("ball radius {0} must be positive")]
    BadRadius(f64),
    #[error("raster field is {w}x{h}, grid is {gw}x{gh}")]
    RasterGridMismatch {
        w: usize,
        h: usize,
        gw: usize,
        gh: usize,
    },
    #[error("raster shapes need a 2-dimensional grid")]
    RasterNeeds2d,
}

/// Precomputed signed-distance samples from a label image, pixel (x, y)
/// matching grid node (x, y).
#[derive(Debug, Clone)]
pub struct RasterDistance {
    pub width: usize,
    pub height: usize,
    pub label: u8,
    /// Row-major by image row (y slow), physical units.
    pub values: Vec<f64>,
}

/// Geometric region with a signed distance, used to seed phase fields.
#[derive(Debug, Clone)]
pub enum Shape {
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    HalfSpace {
        /// Unit outward normal; the region is `normal . x <= offset`.
        normal: Vec<f64>,
        offset: f64,
    },
    Union(Vec<Shape>),
    Intersection(Vec<Shape>),
    Complement(Box<Shape>),
    RasterLabel(Arc<RasterDistance>),
}

impl Shape {
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self, GeometryError> {
        if !(radius > 0.0) {
            return Err(GeometryError::BadRadius(radius));
        }
        Ok(Shape::Ball { center, radius })
    }

    pub fn half_space(normal: Vec<f64>, offset: f64) -> Result<Self, GeometryError> {
        let norm = normal.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(GeometryError::ZeroNormal);
        }
        Ok(Shape::HalfSpace {
            normal: normal.iter().map(|v| v / norm).collect(),
            offset: offset / norm,
        })
    }

    fn check_dim(&self, dim: usize) -> Result<(), GeometryError> {
        let check_len = |v: &Vec<f64>| {
            if v.len() == dim {
                Ok(())
            } else {
                Err(GeometryError::DimensionMismatch {
                    got: v.len(),
                    want: dim,
                })
            }
        };
        match self {
            Shape::Ball { center, .. } => check_len(center),
            Shape::HalfSpace { normal, .. } => check_len(normal),
            Shape::Union(parts) | Shape::Intersection(parts) => {
                parts.iter().try_for_each(|s| s.check_dim(dim))
            }
            Shape::Complement(inner) => inner.check_dim(dim),
            Shape::RasterLabel(_) => {
                if dim == 2 {
                    Ok(())
                } else {
                    Err(GeometryError::RasterNeeds2d)
                }
            }
        }
    }

    /// Signed distance at `x`, with `lengths` giving the periodic box.
    pub fn signed_distance(&self, x: &[f64], lengths: &[f64]) -> f64 {
        match self {
            Shape::Ball { center, radius } => {
                let mut dist_sq = 0.0;
                for a in 0..x.len() {
                    // minimal periodic image per axis
                    let l = lengths[a];
                    let mut d = (x[a] - center[a]) % l;
                    if d > l / 2.0 {
                        d -= l;
                    } else if d < -l / 2.0 {
                        d += l;
                    }
                    dist_sq += d * d;
                }
                dist_sq.sqrt() - radius
            }
            Shape::HalfSpace { normal, offset } => {
                normal.iter().zip(x).map(|(n, xi)| n * xi).sum::<f64>() - offset
            }
            Shape::Union(parts) => parts
                .iter()
                .map(|s| s.signed_distance(x, lengths))
                .fold(f64::INFINITY, f64::min),
            Shape::Intersection(parts) => parts
                .iter()
                .map(|s| s.signed_distance(x, lengths))
                .fold(f64::NEG_INFINITY, f64::max),
            Shape::Complement(inner) => -inner.signed_distance(x, lengths),
            Shape::RasterLabel(field) => {
                // nearest pixel, periodic
                let nx = (x[0] / lengths[0] * field.width as f64).round() as usize % field.width;
                let ny = (x[1] / lengths[1] * field.height as f64).round() as usize % field.height;
                field.values[ny * field.width + nx]
            }
        }
    }
}

/// Non-fatal findings from [`init_phases`].
#[derive(Debug, Clone, PartialEq)]
pub enum InitWarning {
    /// Shapes `i` and `j` (0-based) come closer than a few interface widths;
    /// the seeded fields will overlap there.
    ShapeOverlap { i: usize, j: usize, gap: f64 },
}

impl std::fmt::Display for InitWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InitWarning::ShapeOverlap { i, j, gap } => write!(
                f,
                "shapes {} and {} are separated by {gap:.4} which is under 4 interface widths",
                i + 1,
                j + 1
            ),
        }
    }
}

/// Seeds `n - 1` phases from shapes through `u_i = q(d_i / eps)`; the last
/// phase absorbs the complement, `u_n = 1 - sum u_i`, so the partition
/// constraint holds exactly at every node.
pub fn init_phases(
    grid: &SpectralGrid,
    shapes: &[Shape],
    epsilon: f64,
) -> Result<(PhaseState, Vec<InitWarning>), GeometryError> {
    for shape in shapes {
        shape.check_dim(grid.dim())?;
        if let Shape::RasterLabel(f) = shape {
            if f.width != grid.sizes()[0] || f.height != grid.sizes()[1] {
                return Err(GeometryError::RasterGridMismatch {
                    w: f.width,
                    h: f.height,
                    gw: grid.sizes()[0],
                    gh: grid.sizes()[1],
                });
            }
        }
    }
    let warnings = separation_warnings(grid, shapes, epsilon);

    let lengths = grid.lengths();
    let mut fields = Vec::with_capacity(shapes.len() + 1);
    // running sum in field order, so that 1 - sum cancels exactly against the
    // same left-to-right summation when the constraint is checked
    let mut seeded_sum = ScalarField::zeros(grid);
    for shape in shapes {
        let field =
            ScalarField::from_fn(grid, |x| profile(shape.signed_distance(x, lengths) / epsilon));
        for (acc, u) in seeded_sum.values_mut().iter_mut().zip(field.values()) {
            *acc += u;
        }
        fields.push(field);
    }
    let mut ambient = seeded_sum;
    for v in ambient.values_mut() {
        *v = 1.0 - *v;
    }
    fields.push(ambient);
    Ok((PhaseState::new(fields, 0.0), warnings))
}

/// Approximate pairwise separation check: samples each shape's boundary
/// through grid nodes near its zero level and reports pairs whose signed
/// distances overlap by more than `-4 eps`.
pub fn separation_warnings(
    grid: &SpectralGrid,
    shapes: &[Shape],
    epsilon: f64,
) -> Vec<InitWarning> {
    let lengths = grid.lengths();
    let d = grid.dim();
    let mut warnings = Vec::new();
    for i in 0..shapes.len() {
        for j in i + 1..shapes.len() {
            // gap between two regions at a node: max of the two distances is
            // negative only where both overlap; min separation over nodes of
            // d_i + d_j approximates the boundary gap
            let mut min_sum = f64::INFINITY;
            let mut coords = vec![0usize; d];
            let mut pos = vec![0.0; d];
            for idx in 0..grid.len() {
                grid.coords(idx, &mut coords);
                grid.position(&coords, &mut pos);
                let di = shapes[i].signed_distance(&pos, lengths);
                let dj = shapes[j].signed_distance(&pos, lengths);
                min_sum = min_sum.min(di + dj);
            }
            if min_sum < 4.0 * epsilon {
                warnings.push(InitWarning::ShapeOverlap {
                    i,
                    j,
                    gap: min_sum,
                });
            }
        }
    }
    warnings
}
