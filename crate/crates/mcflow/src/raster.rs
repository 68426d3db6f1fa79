//! Label-image input for raster initial conditions: binary PGM (P5) and
//! headerless raw images, a JSON sidecar mapping pixel values to phases, and
//! a periodic chamfer distance transform that turns a label region into an
//! approximate signed distance field.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RasterError {
    #[error("io error reading {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("not a binary PGM (P5) file")]
    BadMagic,
    #[error("malformed PGM header: {0}")]
    BadHeader(String),
    #[error("PGM maxval {0} unsupported; need 1..=255")]
    BadMaxval(u32),
    #[error("image is {w}x{h} but payload has {got} bytes")]
    Truncated { w: usize, h: usize, got: usize },
    #[error("image dimensions {w}x{h} out of range")]
    BadDimensions { w: usize, h: usize },
    #[error("sidecar error: {0}")]
    Sidecar(String),
    #[error("raw image needs width/height in the sidecar")]
    MissingRawDimensions,
    #[error("label {0} not present in the image")]
    LabelNotFound(u8),
}

const MAX_PIXELS: usize = 1 << 26; // 64M pixels caps allocation on bad input

/// 8-bit label image.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>, // row-major, rows top to bottom
}

impl LabelImage {
    pub fn pixel(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    pub fn contains_label(&self, label: u8) -> bool {
        self.pixels.contains(&label)
    }
}

/// JSON sidecar accompanying a label image.
///
/// `labels` maps pixel values (as strings, JSON objects key on strings) to
/// 1-based phase indices. `width`/`height` are required for raw images and
/// cross-checked for PGM.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LabelSidecar {
    #[serde(default)]
    pub width: Option<usize>,
    #[serde(default)]
    pub height: Option<usize>,
    pub labels: BTreeMap<String, usize>,
}

impl LabelSidecar {
    pub fn from_json_bytes(bytes: &[u8]) -> Result<Self, RasterError> {
        let sidecar: LabelSidecar =
            serde_json::from_slice(bytes).map_err(|e| RasterError::Sidecar(e.to_string()))?;
        for (key, &phase) in &sidecar.labels {
            let value: u32 = key
                .parse()
                .map_err(|_| RasterError::Sidecar(format!("label key {key:?} is not a pixel value")))?;
            if value > 255 {
                return Err(RasterError::Sidecar(format!(
                    "label key {key:?} exceeds 255"
                )));
            }
            if phase == 0 {
                return Err(RasterError::Sidecar(format!(
                    "label {key:?} maps to phase 0; phases are 1-based"
                )));
            }
        }
        Ok(sidecar)
    }

    /// Pixel value assigned to a 1-based phase index, if any.
    pub fn label_for_phase(&self, phase: usize) -> Option<u8> {
        self.labels
            .iter()
            .find(|(_, &p)| p == phase)
            .and_then(|(k, _)| k.parse().ok())
    }
}

/// Parses a binary PGM (P5). Comments (`#` to end of line) are allowed in the
/// header; maxval must be at most 255.
pub fn parse_pgm(bytes: &[u8]) -> Result<LabelImage, RasterError> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(RasterError::BadMagic);
    }
    let mut pos = 2usize;
    let mut fields = [0usize; 3];
    for field in fields.iter_mut() {
        // skip whitespace and comments
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                break;
            }
        }
        let start = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
            pos += 1;
        }
        if pos == start {
            return Err(RasterError::BadHeader("expected an integer".into()));
        }
        if pos - start > 9 {
            return Err(RasterError::BadHeader("integer too long".into()));
        }
        let text = std::str::from_utf8(&bytes[start..pos])
            .map_err(|_| RasterError::BadHeader("non-ascii header".into()))?;
        *field = text
            .parse()
            .map_err(|_| RasterError::BadHeader(format!("bad integer {text:?}")))?;
    }
    let [w, h, maxval] = fields;
    if maxval == 0 || maxval > 255 {
        return Err(RasterError::BadMaxval(maxval as u32));
    }
    if w == 0 || h == 0 || w.saturating_mul(h) > MAX_PIXELS {
        return Err(RasterError::BadDimensions { w, h });
    }
    // exactly one whitespace byte separates the header from the raster
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(RasterError::BadHeader("missing raster separator".into()));
    }
    pos += 1;
    let need = w * h;
    let payload = &bytes[pos..];
    if payload.len() < need {
        return Err(RasterError::Truncated {
            w,
            h,
            got: payload.len(),
        });
    }
    Ok(LabelImage {
        width: w,
        height: h,
        pixels: payload[..need].to_vec(),
    })
}

/// Parses a headerless raw image using dimensions from the sidecar.
pub fn parse_raw(bytes: &[u8], sidecar: &LabelSidecar) -> Result<LabelImage, RasterError> {
    let (w, h) = match (sidecar.width, sidecar.height) {
        (Some(w), Some(h)) => (w, h),
        _ => return Err(RasterError::MissingRawDimensions),
    };
    if w == 0 || h == 0 || w.saturating_mul(h) > MAX_PIXELS {
        return Err(RasterError::BadDimensions { w, h });
    }
    if bytes.len() < w * h {
        return Err(RasterError::Truncated {
            w,
            h,
            got: bytes.len(),
        });
    }
    Ok(LabelImage {
        width: w,
        height: h,
        pixels: bytes[..w * h].to_vec(),
    })
}

/// Loads `path` (PGM unless the extension is `.raw`) plus its `.json`
/// sidecar, which sits next to the image with the extension replaced.
pub fn load_with_sidecar(path: &Path) -> Result<(LabelImage, LabelSidecar), RasterError> {
    let read = |p: &Path| {
        std::fs::read(p).map_err(|source| RasterError::Io {
            path: p.display().to_string(),
            source,
        })
    };
    let sidecar_path = path.with_extension("json");
    let sidecar = LabelSidecar::from_json_bytes(&read(&sidecar_path)?)?;
    let bytes = read(path)?;
    let is_raw = path
        .extension()
        .map(|e| e.eq_ignore_ascii_case("raw"))
        .unwrap_or(false);
    let image = if is_raw {
        parse_raw(&bytes, &sidecar)?
    } else {
        let image = parse_pgm(&bytes)?;
        if let (Some(w), Some(h)) = (sidecar.width, sidecar.height) {
            if w != image.width || h != image.height {
                return Err(RasterError::Sidecar(format!(
                    "sidecar says {w}x{h}, image is {}x{}",
                    image.width, image.height
                )));
            }
        }
        image
    };
    Ok((image, sidecar))
}

/// Approximate signed distance to the region `pixels == label`, negative
/// inside, in physical units (`hx`, `hy` are the pixel spacings).
///
/// Uses a 3x3 chamfer transform with periodic neighbors; the forward/backward
/// sweep pair is iterated until it stops improving, which handles wrap-around
/// paths. Output is row-major `height x width` like the image.
pub fn signed_distance_field(
    image: &LabelImage,
    label: u8,
    hx: f64,
    hy: f64,
) -> Result<Vec<f64>, RasterError> {
    if !image.contains_label(label) {
        return Err(RasterError::LabelNotFound(label));
    }
    let inside: Vec<bool> = image.pixels.iter().map(|&p| p == label).collect();
    if inside.iter().all(|&b| b) {
        // region is everything; no boundary in the periodic domain
        return Ok(vec![-(hx.max(hy)) * image.width as f64; inside.len()]);
    }
    let to_region = chamfer(image.width, image.height, hx, hy, &inside);
    let outside: Vec<bool> = inside.iter().map(|b| !b).collect();
    let to_complement = chamfer(image.width, image.height, hx, hy, &outside);
    Ok(to_region
        .iter()
        .zip(&to_complement)
        .map(|(r, c)| r - c)
        .collect())
}

/// Chamfer distance to the `true` cells, periodic, zero inside the set.
fn chamfer(width: usize, height: usize, hx: f64, hy: f64, set: &[bool]) -> Vec<f64> {
    let big = (width as f64 * hx + height as f64 * hy) * 2.0;
    let mut dist: Vec<f64> = set.iter().map(|&b| if b { 0.0 } else { big }).collect();
    let diag = (hx * hx + hy * hy).sqrt();
    let wrap = |v: isize, n: usize| -> usize {
        let n = n as isize;
        (((v % n) + n) % n) as usize
    };

    // masks of (dx, dy, weight); forward uses already-visited neighbors in a
    // top-left to bottom-right scan, backward the mirror image
    let forward = [
        (-1isize, 0isize, hx),
        (0, -1, hy),
        (-1, -1, diag),
        (1, -1, diag),
    ];
    let backward = [(1isize, 0isize, hx), (0, 1, hy), (1, 1, diag), (-1, 1, diag)];

    loop {
        let mut changed = false;
        for y in 0..height {
            for x in 0..width {
                let idx = y * width + x;
                let mut best = dist[idx];
                for &(dx, dy, w) in &forward {
                    let nx = wrap(x as isize + dx, width);
                    let ny = wrap(y as isize + dy, height);
                    let cand = dist[ny * width + nx] + w;
                    if cand < best {
                        best = cand;
                    }
                }
                if best < dist[idx] {
                    dist[idx] = best;
                    changed = true;
                }
            }
        }
        for y in (0..height).rev() {
            for x in (0..width).rev() {
                let idx = y * width + x;
                let mut best = dist[idx];
                for &(dx, dy, w) in &backward {
                    let nx = wrap(x as isize + dx, width);
                    let ny = wrap(y as isize + dy, height);
                    let cand = dist[ny * width + nx] + w;
                    if cand < best {
                        best = cand;
                    }
                }
                if best < dist[idx] {
                    dist[idx] = best;
                    changed = true;
                }
            }
        }
        if !changed {
            return dist;
        }
    }
}
