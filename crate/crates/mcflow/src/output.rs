//! Run artifacts on disk: the diagnostics CSV, raw field snapshots with JSON
//! sidecars, and grayscale PGM composites.
//!
//! All writers are pure functions of the state they receive, with fixed
//! formatting, so reruns of the same config produce byte-identical files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::diagnostics::TimeSeriesRow;
use crate::grid::ScalarField;
use crate::solver::PhaseState;

/// Streaming writer for `diagnostics.csv`.
///
/// Columns: `time, R_1..R_N, mass_1..mass_N, constraint_err, energy`. Floats
/// use Rust's shortest round-trip formatting.
pub struct CsvWriter {
    inner: BufWriter<File>,
}

impl CsvWriter {
    pub fn create(path: &Path, n_phases: usize) -> std::io::Result<Self> {
        let mut inner = BufWriter::new(File::create(path)?);
        let mut header = String::from("time");
        for k in 1..=n_phases {
            header.push_str(&format!(",R_{k}"));
        }
        for k in 1..=n_phases {
            header.push_str(&format!(",mass_{k}"));
        }
        header.push_str(",constraint_err,energy");
        writeln!(inner, "{header}")?;
        Ok(Self { inner })
    }

    pub fn write_row(&mut self, row: &TimeSeriesRow) -> std::io::Result<()> {
        let mut line = format!("{}", row.time);
        for r in &row.radii {
            line.push_str(&format!(",{r}"));
        }
        for m in &row.masses {
            line.push_str(&format!(",{m}"));
        }
        line.push_str(&format!(",{},{}", row.constraint_error, row.energy));
        writeln!(self.inner, "{line}")
    }

    pub fn finish(mut self) -> std::io::Result<()> {
        self.inner.flush()
    }
}

#[derive(Serialize)]
struct SnapshotSidecar<'a> {
    sizes: &'a [usize],
    lengths: &'a [f64],
    time: f64,
    phase: usize,
}

fn raw_name(step: usize, phase: usize) -> String {
    format!("fields_{step:06}_{phase}.raw")
}

/// Writes one phase field as little-endian f64, row-major, no header, plus a
/// JSON sidecar carrying the grid geometry, time and 1-based phase index.
pub fn write_raw_snapshot(
    dir: &Path,
    step: usize,
    phase: usize,
    field: &ScalarField,
    time: f64,
) -> std::io::Result<PathBuf> {
    let path = dir.join(raw_name(step, phase + 1));
    let mut w = BufWriter::new(File::create(&path)?);
    for v in field.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;

    let sidecar = SnapshotSidecar {
        sizes: field.grid().sizes(),
        lengths: field.grid().lengths(),
        time,
        phase: phase + 1,
    };
    let json = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
    std::fs::write(path.with_extension("json"), json + "\n")?;
    Ok(path)
}

/// Writes every phase of a snapshot.
pub fn write_snapshot(dir: &Path, step: usize, state: &PhaseState) -> std::io::Result<()> {
    for (phase, field) in state.fields().iter().enumerate() {
        write_raw_snapshot(dir, step, phase, field, state.time())?;
    }
    Ok(())
}

fn encode_pgm(width: usize, height: usize, pixels: &[u8]) -> Vec<u8> {
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(pixels);
    out
}

/// Maps composite values onto 0..255 over the attainable range of the
/// weights (the fields form a partition, so the composite lives in the
/// convex hull of the weights). Degenerate ranges map to 0.
fn to_gray(values: &[f64], weights: &[f64]) -> Vec<u8> {
    let lo = weights.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    values
        .iter()
        .map(|&v| {
            if span <= 0.0 {
                0u8
            } else {
                (((v - lo) / span).clamp(0.0, 1.0) * 255.0).round() as u8
            }
        })
        .collect()
}

/// Writes `composite_<step>.pgm`: the per-node value `sum_k c_k u_k` as 8-bit
/// grayscale. 2D grids map node (x, y) to pixel column x, row y; 3D grids
/// write the mid-plane slice normal to the last axis, plus per-axis
/// mid-slices (`_x`, `_y` suffixes) when `axis_slices` is set.
pub fn write_composite_pgm(
    dir: &Path,
    step: usize,
    state: &PhaseState,
    weights: &[f64],
    axis_slices: bool,
) -> std::io::Result<()> {
    assert_eq!(weights.len(), state.n_phases(), "one weight per phase");
    let grid = state.grid();
    let n = grid.len();
    let mut composite = vec![0.0f64; n];
    for (field, &w) in state.fields().iter().zip(weights) {
        for (c, v) in composite.iter_mut().zip(field.values()) {
            *c += w * v;
        }
    }

    let sizes = grid.sizes();
    match grid.dim() {
        2 => {
            let (kx, ky) = (sizes[0], sizes[1]);
            // node (x, y) at index x*ky + y; pixel rows scan y
            let mut pixels = vec![0.0f64; n];
            for x in 0..kx {
                for y in 0..ky {
                    pixels[y * kx + x] = composite[x * ky + y];
                }
            }
            let gray = to_gray(&pixels, weights);
            std::fs::write(
                dir.join(format!("composite_{step:06}.pgm")),
                encode_pgm(kx, ky, &gray),
            )
        }
        _ => {
            let (kx, ky, kz) = (sizes[0], sizes[1], sizes[2]);
            let slice = |axis: usize| -> (usize, usize, Vec<f64>) {
                match axis {
                    0 => {
                        // fix x at kx/2; image is (y, z)
                        let x = kx / 2;
                        let mut out = vec![0.0; ky * kz];
                        for y in 0..ky {
                            for z in 0..kz {
                                out[z * ky + y] = composite[(x * ky + y) * kz + z];
                            }
                        }
                        (ky, kz, out)
                    }
                    1 => {
                        let y = ky / 2;
                        let mut out = vec![0.0; kx * kz];
                        for x in 0..kx {
                            for z in 0..kz {
                                out[z * kx + x] = composite[(x * ky + y) * kz + z];
                            }
                        }
                        (kx, kz, out)
                    }
                    _ => {
                        let z = kz / 2;
                        let mut out = vec![0.0; kx * ky];
                        for x in 0..kx {
                            for y in 0..ky {
                                out[y * kx + x] = composite[(x * ky + y) * kz + z];
                            }
                        }
                        (kx, ky, out)
                    }
                }
            };
            let (w, h, mid) = slice(2);
            std::fs::write(
                dir.join(format!("composite_{step:06}.pgm")),
                encode_pgm(w, h, &to_gray(&mid, weights)),
            )?;
            if axis_slices {
                for (axis, suffix) in [(0usize, "x"), (1, "y")] {
                    let (w, h, data) = slice(axis);
                    std::fs::write(
                        dir.join(format!("composite_{step:06}_{suffix}.pgm")),
                        encode_pgm(w, h, &to_gray(&data, weights)),
                    )?;
                }
            }
            Ok(())
        }
    }
}
