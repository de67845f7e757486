//! Seeded generation of jitter-corrupted images.
//!
//! Displacements are drawn from `N(0, sigma2)` and rounded to the nearest
//! integer (halves away from zero); the realized maximum magnitude becomes
//! the field's `rho`. The corrupted image samples the original at the
//! displaced position, zero outside: `out(x) = u(x + d(x))`. Optional
//! Gaussian noise is added afterwards and clamped to `[0, 1]`.
//!
//! The generator is ChaCha20 (`rand_chacha::ChaCha20Rng`) seeded with
//! `seed_from_u64(seed)`. Displacements use stream 0, drawn row by row, left
//! to right, `d1` before `d2` for vector fields. Noise uses stream 1, one draw
//! per channel in row-major order. Changing either order changes every
//! seeded result.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::field::{LineDisplacement, ScalarField, VectorField};
use crate::image::Image;

const DISPLACEMENT_STREAM: u64 = 0;
const NOISE_STREAM: u64 = 1;

/// The three corruption models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum JitterKind {
    /// One horizontal shift per row.
    Line,
    /// One horizontal shift per pixel.
    LinePixel,
    /// One two-dimensional shift per pixel.
    Pixel,
}

impl JitterKind {
    pub fn as_str(self) -> &'static str {
        match self {
            JitterKind::Line => "line",
            JitterKind::LinePixel => "line-pixel",
            JitterKind::Pixel => "pixel",
        }
    }
}

impl fmt::Display for JitterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for JitterKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "line" => Ok(JitterKind::Line),
            "line-pixel" => Ok(JitterKind::LinePixel),
            "pixel" => Ok(JitterKind::Pixel),
            _ => Err(Error::InvalidParameter(format!(
                "unknown jitter kind `{s}` (expected line, line-pixel or pixel)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthesisSpec {
    pub kind: JitterKind,
    /// Displacement variance in pixels squared.
    pub sigma2: f64,
    /// Intensity noise variance; zero disables the noise stage.
    pub noise_sigma2: f64,
    pub seed: u64,
}

impl SynthesisSpec {
    pub fn new(kind: JitterKind, sigma2: f64, noise_sigma2: f64, seed: u64) -> Result<Self> {
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "displacement variance must be positive, got {sigma2}"
            )));
        }
        if !(noise_sigma2 >= 0.0 && noise_sigma2.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "noise variance must be non-negative, got {noise_sigma2}"
            )));
        }
        Ok(Self {
            kind,
            sigma2,
            noise_sigma2,
            seed,
        })
    }

    fn check_kind(&self, expected: JitterKind) -> Result<()> {
        if self.kind != expected {
            return Err(Error::InvalidParameter(format!(
                "synthesis spec is for {} jitter, not {expected}",
                self.kind
            )));
        }
        Ok(())
    }
}

fn stream(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn normal(variance: f64) -> Normal<f64> {
    Normal::new(0.0, variance.sqrt()).expect("variance validated as finite and non-negative")
}

/// The first `count` unrounded displacement draws for `seed`.
pub fn gaussian_draws(count: usize, sigma2: f64, seed: u64) -> Vec<f64> {
    let dist = normal(sigma2);
    let mut rng = stream(seed, DISPLACEMENT_STREAM);
    (0..count).map(|_| dist.sample(&mut rng)).collect()
}

fn rounded_draws(count: usize, sigma2: f64, seed: u64) -> Vec<i32> {
    gaussian_draws(count, sigma2, seed)
        .into_iter()
        .map(|d| d.round() as i32)
        .collect()
}

fn finish(img: Image, spec: &SynthesisSpec) -> Image {
    if spec.noise_sigma2 > 0.0 {
        add_noise(&img, spec.noise_sigma2, spec.seed)
    } else {
        img
    }
}

/// Shifts every row `j` of `img` by an independent draw `d_j`:
/// `out(i, j) = img(i + d_j, j)`.
pub fn synthesize_line(img: &Image, spec: &SynthesisSpec) -> Result<(Image, LineDisplacement)> {
    spec.check_kind(JitterKind::Line)?;
    let d = LineDisplacement::from_values(rounded_draws(img.height(), spec.sigma2, spec.seed));
    let values = d.values();
    let out = img.resample(|i, j| (i as isize + values[j] as isize, j as isize));
    Ok((finish(out, spec), d))
}

/// Shifts every pixel horizontally by an independent draw:
/// `out(i, j) = img(i + d_ij, j)`.
pub fn synthesize_line_pixel(img: &Image, spec: &SynthesisSpec) -> Result<(Image, ScalarField)> {
    spec.check_kind(JitterKind::LinePixel)?;
    let (m, n) = (img.width(), img.height());
    let values = rounded_draws(m * n, spec.sigma2, spec.seed);
    let rho = values.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0);
    let field = ScalarField::new(m, n, values, rho)?;
    let out = img.resample(|i, j| (i as isize + field.get(i, j) as isize, j as isize));
    Ok((finish(out, spec), field))
}

/// Shifts every pixel by an independent two-dimensional draw:
/// `out(i, j) = img(i + d1_ij, j + d2_ij)`.
pub fn synthesize_pixel(img: &Image, spec: &SynthesisSpec) -> Result<(Image, VectorField)> {
    spec.check_kind(JitterKind::Pixel)?;
    let (m, n) = (img.width(), img.height());
    let flat = rounded_draws(2 * m * n, spec.sigma2, spec.seed);
    let rho = flat.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0);
    let values = flat.chunks_exact(2).map(|c| [c[0], c[1]]).collect();
    let field = VectorField::new(m, n, values, rho)?;
    let out = img.resample(|i, j| {
        let [d1, d2] = field.get(i, j);
        (i as isize + d1 as isize, j as isize + d2 as isize)
    });
    Ok((finish(out, spec), field))
}

/// Adds independent `N(0, noise_sigma2)` noise to every channel of every
/// pixel, clamping the result to `[0, 1]`.
pub fn add_noise(img: &Image, noise_sigma2: f64, seed: u64) -> Image {
    if noise_sigma2 <= 0.0 {
        return img.clone();
    }
    let dist = normal(noise_sigma2);
    let mut rng = stream(seed, NOISE_STREAM);
    let data = img
        .data()
        .iter()
        .map(|&v| (v + dist.sample(&mut rng)).clamp(0.0, 1.0))
        .collect();
    Image::new(img.width(), img.height(), img.channels(), data)
        .expect("clamped values keep the image valid")
}

/// Deterministic synthetic test images.
pub mod pattern {
    use super::*;

    /// A smooth background with a few discs, boxes and slanted bars of random
    /// colors, resembling piecewise-smooth natural content.
    pub fn scene(width: usize, height: usize, channels: usize, seed: u64) -> Result<Image> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let (w, h) = (width as f64, height as f64);
        let color =
            |rng: &mut ChaCha20Rng| -> [f64; 3] { [rng.random(), rng.random(), rng.random()] };

        enum Shape {
            Disc {
                cx: f64,
                cy: f64,
                r: f64,
            },
            Rect {
                x0: f64,
                y0: f64,
                x1: f64,
                y1: f64,
            },
            Bar {
                cx: f64,
                cy: f64,
                nx: f64,
                ny: f64,
                half: f64,
            },
        }
        let mut shapes = Vec::new();
        for k in 0..6 {
            let c = color(&mut rng);
            let shape = match k % 3 {
                0 => Shape::Disc {
                    cx: rng.random::<f64>() * w,
                    cy: rng.random::<f64>() * h,
                    r: (0.1 + 0.2 * rng.random::<f64>()) * w.min(h),
                },
                1 => {
                    let (x0, y0) = (rng.random::<f64>() * w * 0.7, rng.random::<f64>() * h * 0.7);
                    Shape::Rect {
                        x0,
                        y0,
                        x1: x0 + (0.15 + 0.3 * rng.random::<f64>()) * w,
                        y1: y0 + (0.15 + 0.3 * rng.random::<f64>()) * h,
                    }
                }
                _ => {
                    let angle = rng.random::<f64>() * std::f64::consts::PI;
                    Shape::Bar {
                        cx: rng.random::<f64>() * w,
                        cy: rng.random::<f64>() * h,
                        nx: angle.cos(),
                        ny: angle.sin(),
                        half: (0.03 + 0.05 * rng.random::<f64>()) * w.min(h),
                    }
                }
            };
            shapes.push((shape, c));
        }
        let base = color(&mut rng);
        let slope = color(&mut rng);

        Image::from_fn(width, height, channels, |i, j, c| {
            let (x, y) = (i as f64 + 0.5, j as f64 + 0.5);
            let t = 0.5 * (x / w + y / h);
            let mut v = 0.2 + 0.6 * (base[c] * (1.0 - t) + slope[c] * t);
            for (shape, col) in &shapes {
                let inside = match *shape {
                    Shape::Disc { cx, cy, r } => (x - cx).powi(2) + (y - cy).powi(2) <= r * r,
                    Shape::Rect { x0, y0, x1, y1 } => x >= x0 && x <= x1 && y >= y0 && y <= y1,
                    Shape::Bar {
                        cx,
                        cy,
                        nx,
                        ny,
                        half,
                    } => ((x - cx) * nx + (y - cy) * ny).abs() <= half,
                };
                if inside {
                    v = col[c];
                }
            }
            v.clamp(0.0, 1.0)
        })
    }

    /// Vertical stripes one column wide, each of a random color; every
    /// column is constant.
    pub fn vertical_stripes(
        width: usize,
        height: usize,
        channels: usize,
        seed: u64,
    ) -> Result<Image> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let columns: Vec<[f64; 3]> = (0..width)
            .map(|_| [rng.random(), rng.random(), rng.random()])
            .collect();
        Image::from_fn(width, height, channels, |i, _, c| columns[i][c])
    }
}
