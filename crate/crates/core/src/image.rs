//! Multi-channel images with values in `[0, 1]`, the zero-outside sampling
//! rule used by every energy, and simple quality metrics.
//!
//! Pixel coordinates are zero-based: column `i` in `0..width`, row `j` in
//! `0..height`, rows stored top to bottom.

use std::path::Path;

use image::{DynamicImage, GrayImage, RgbImage};

use crate::error::{Error, Result};

const ZEROS: [f64; 3] = [0.0; 3];

/// An `width x height` grid of `channels`-dimensional intensity vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f64>,
}

impl Image {
    /// Builds an image from a row-major buffer of `width * height * channels`
    /// intensities.
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage { width, height });
        }
        if channels != 1 && channels != 3 {
            return Err(Error::UnsupportedChannels(channels));
        }
        let expected = width * height * channels;
        if data.len() != expected {
            return Err(Error::BufferLength {
                expected,
                actual: data.len(),
            });
        }
        if let Some((index, &value)) = data
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(Error::IntensityOutOfRange { index, value });
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    /// An image with every intensity set to `value`.
    pub fn constant(width: usize, height: usize, channels: usize, value: f64) -> Result<Self> {
        Self::new(
            width,
            height,
            channels,
            vec![value; width * height * channels],
        )
    }

    /// Builds an image by evaluating `f(i, j, c)` at every entry.
    pub fn from_fn(
        width: usize,
        height: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height * channels);
        for j in 0..height {
            for i in 0..width {
                for c in 0..channels {
                    data.push(f(i, j, c));
                }
            }
        }
        Self::new(width, height, channels, data)
    }

    /// Maps 8-bit samples to `[0, 1]` by `value / 255`.
    pub fn from_u8(width: usize, height: usize, channels: usize, bytes: &[u8]) -> Result<Self> {
        let data = bytes.iter().map(|&b| f64::from(b) / 255.0).collect();
        Self::new(width, height, channels, data)
    }

    /// Quantizes to 8 bits, rounding to the nearest level.
    pub fn to_u8(&self) -> Vec<u8> {
        self.data
            .iter()
            .map(|&v| (v * 255.0).round().clamp(0.0, 255.0) as u8)
            .collect()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn same_shape(&self, other: &Image) -> bool {
        self.width == other.width && self.height == other.height && self.channels == other.channels
    }

    /// The pixel at `(i, j)`. Panics when out of range; see [`Image::sample`]
    /// for the total version.
    pub fn pixel(&self, i: usize, j: usize) -> &[f64] {
        assert!(
            i < self.width && j < self.height,
            "pixel ({i}, {j}) out of range"
        );
        let start = (j * self.width + i) * self.channels;
        &self.data[start..start + self.channels]
    }

    /// The pixel at `(i, j)`, or the zero vector when `(i, j)` lies outside
    /// the image. Defined for every integer pair.
    #[inline]
    pub fn sample(&self, i: isize, j: isize) -> &[f64] {
        if i < 0 || j < 0 || i as usize >= self.width || j as usize >= self.height {
            return &ZEROS[..self.channels];
        }
        let start = (j as usize * self.width + i as usize) * self.channels;
        &self.data[start..start + self.channels]
    }

    /// Builds a same-shape image whose pixel `(i, j)` is read from this image
    /// at `source(i, j)`, zero outside.
    pub fn resample(&self, mut source: impl FnMut(usize, usize) -> (isize, isize)) -> Image {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.height {
            for i in 0..self.width {
                let (si, sj) = source(i, j);
                data.extend_from_slice(self.sample(si, sj));
            }
        }
        Image {
            width: self.width,
            height: self.height,
            channels: self.channels,
            data,
        }
    }

    /// Copies out the rectangle with top-left corner `(x, y)`.
    pub fn crop(&self, x: usize, y: usize, width: usize, height: usize) -> Result<Image> {
        if x + width > self.width || y + height > self.height {
            return Err(Error::DimensionMismatch(format!(
                "crop {width}x{height} at ({x}, {y}) exceeds {}x{} image",
                self.width, self.height
            )));
        }
        Image::from_fn(width, height, self.channels, |i, j, c| {
            self.pixel(x + i, y + j)[c]
        })
    }

    /// Reads an 8-bit grayscale or RGB PNG.
    pub fn load_png(path: impl AsRef<Path>) -> Result<Image> {
        let path = path.as_ref();
        let decoded = image::ImageReader::open(path)?
            .with_guessed_format()?
            .decode()?;
        let (width, height) = (decoded.width() as usize, decoded.height() as usize);
        match decoded {
            DynamicImage::ImageLuma8(buf) => Image::from_u8(width, height, 1, buf.as_raw()),
            DynamicImage::ImageRgb8(buf) => Image::from_u8(width, height, 3, buf.as_raw()),
            DynamicImage::ImageLumaA8(_)
            | DynamicImage::ImageRgba8(_)
            | DynamicImage::ImageLumaA16(_)
            | DynamicImage::ImageRgba16(_)
            | DynamicImage::ImageRgba32F(_) => Err(Error::AlphaChannel {
                path: path.to_path_buf(),
            }),
            other => Err(Error::UnsupportedFormat {
                path: path.to_path_buf(),
                format: format!("{:?}", other.color()),
            }),
        }
    }

    /// Writes an 8-bit grayscale or RGB PNG.
    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        let (w, h) = (self.width as u32, self.height as u32);
        let bytes = self.to_u8();
        match self.channels {
            1 => GrayImage::from_raw(w, h, bytes)
                .expect("buffer length matches dimensions")
                .save(path)?,
            _ => RgbImage::from_raw(w, h, bytes)
                .expect("buffer length matches dimensions")
                .save(path)?,
        }
        Ok(())
    }
}

/// `|x|^p`, with exact fast paths for the common exponents.
#[inline]
pub fn abs_pow(x: f64, p: f64) -> f64 {
    let a = x.abs();
    if p == 1.0 {
        a
    } else if p == 2.0 {
        a * a
    } else if p == 0.5 {
        a.sqrt()
    } else {
        a.powf(p)
    }
}

/// `sum_c |v_c|^p`, the p-th power of the p-norm. Well defined for `0 < p < 1`.
pub fn pnorm_pow(v: &[f64], p: f64) -> f64 {
    v.iter().map(|&x| abs_pow(x, p)).sum()
}

/// `sum_c |a_c - b_c|^p`.
#[inline]
pub fn pnorm_pow_diff(a: &[f64], b: &[f64], p: f64) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| abs_pow(x - y, p)).sum()
}

/// `sum_c |a_c - 2 b_c + c_c|^p`, the second backward difference.
#[inline]
pub fn pnorm_pow_second(a: &[f64], b: &[f64], c: &[f64], p: f64) -> f64 {
    a.iter()
        .zip(b)
        .zip(c)
        .map(|((&x, &y), &z)| abs_pow(x - 2.0 * y + z, p))
        .sum()
}

/// Mean squared difference over all entries.
pub fn mse(a: &Image, b: &Image) -> Result<f64> {
    if !a.same_shape(b) {
        return Err(Error::DimensionMismatch(format!(
            "{}x{}x{} vs {}x{}x{}",
            a.width, a.height, a.channels, b.width, b.height, b.channels
        )));
    }
    let sum: f64 = a
        .data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok(sum / a.data.len() as f64)
}

/// Peak signal-to-noise ratio in dB for unit peak; `+inf` for identical images.
pub fn psnr(a: &Image, b: &Image) -> Result<f64> {
    let e = mse(a, b)?;
    Ok(if e == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (1.0 / e).log10()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn construction_rejects_bad_input() {
        assert!(matches!(
            Image::new(0, 2, 1, vec![]),
            Err(Error::EmptyImage { .. })
        ));
        assert!(matches!(
            Image::new(1, 1, 2, vec![0.0, 0.0]),
            Err(Error::UnsupportedChannels(2))
        ));
        assert!(matches!(
            Image::new(2, 2, 1, vec![0.0; 3]),
            Err(Error::BufferLength { .. })
        ));
        assert!(matches!(
            Image::new(1, 1, 1, vec![1.5]),
            Err(Error::IntensityOutOfRange { .. })
        ));
        assert!(Image::new(1, 1, 1, vec![f64::NAN]).is_err());
    }

    #[test]
    fn sample_inside_and_outside() {
        let img = Image::constant(4, 3, 3, 0.5).unwrap();
        assert_eq!(img.sample(1, 1), &[0.5, 0.5, 0.5]);
        assert_eq!(img.sample(-1, 0), &[0.0; 3]);
        assert_eq!(img.sample(4 + 3, 2), &[0.0; 3]);
        assert_eq!(img.sample(0, 3), &[0.0; 3]);
        assert_eq!(img.sample(isize::MIN, isize::MAX), &[0.0; 3]);
    }

    #[test]
    fn pnorm_examples() {
        assert_eq!(pnorm_pow(&[0.0, 0.0, 0.0], 0.5), 0.0);
        assert_eq!(pnorm_pow(&[1.0, 1.0, 1.0], 0.5), 3.0);
        assert_eq!(pnorm_pow(&[0.25], 0.5), 0.5);
        assert_eq!(pnorm_pow(&[-0.5, 0.5], 2.0), 0.5);
        assert!((pnorm_pow(&[0.3], 3.0) - 0.027).abs() < 1e-15);
    }

    #[test]
    fn mse_and_psnr_examples() {
        let zero = Image::constant(4, 4, 1, 0.0).unwrap();
        let one = Image::constant(4, 4, 1, 1.0).unwrap();
        let half = Image::constant(4, 4, 1, 0.5).unwrap();
        assert_eq!(mse(&zero, &zero).unwrap(), 0.0);
        assert_eq!(psnr(&zero, &zero).unwrap(), f64::INFINITY);
        assert_eq!(mse(&zero, &one).unwrap(), 1.0);
        assert_eq!(psnr(&zero, &one).unwrap(), 0.0);
        assert_eq!(mse(&zero, &half).unwrap(), 0.25);
        assert!((psnr(&zero, &half).unwrap() - 6.020_599_913_279_624).abs() < 1e-12);
        let rgb = Image::constant(4, 4, 3, 0.0).unwrap();
        assert!(matches!(mse(&zero, &rgb), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn u8_round_trip_and_png() {
        let bytes: Vec<u8> = (0..=255).collect();
        let img = Image::from_u8(16, 16, 1, &bytes).unwrap();
        assert_eq!(img.to_u8(), bytes);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.png");
        img.save_png(&path).unwrap();
        assert_eq!(Image::load_png(&path).unwrap(), img);

        let rgb = Image::from_fn(5, 3, 3, |i, j, c| ((i + 2 * j + c) % 4) as f64 / 3.0).unwrap();
        let path = dir.path().join("c.png");
        rgb.save_png(&path).unwrap();
        let back = Image::load_png(&path).unwrap();
        assert_eq!(back.to_u8(), rgb.to_u8());
    }

    #[test]
    fn png_with_alpha_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.png");
        image::RgbaImage::new(2, 2).save(&path).unwrap();
        assert!(matches!(
            Image::load_png(&path),
            Err(Error::AlphaChannel { .. })
        ));
    }

    proptest! {
        #[test]
        fn pnorm_zero_iff_zero_vector(v in prop::collection::vec(-1.0f64..1.0, 1..4), p in 0.1f64..4.0) {
            let value = pnorm_pow(&v, p);
            prop_assert!(value >= 0.0);
            prop_assert_eq!(value == 0.0, v.iter().all(|&x| x == 0.0));
        }

        #[test]
        fn psnr_decreases_with_mse(a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let base = Image::constant(3, 3, 1, 0.0).unwrap();
            let x = Image::constant(3, 3, 1, a).unwrap();
            let y = Image::constant(3, 3, 1, b).unwrap();
            let (mx, my) = (mse(&base, &x).unwrap(), mse(&base, &y).unwrap());
            let (px, py) = (psnr(&base, &x).unwrap(), psnr(&base, &y).unwrap());
            if mx < my {
                prop_assert!(px > py);
            }
        }

        #[test]
        fn sample_is_total(i in any::<isize>(), j in any::<isize>()) {
            let img = Image::constant(3, 2, 1, 0.25).unwrap();
            let expected = if (0..3).contains(&i) && (0..2).contains(&j) { 0.25 } else { 0.0 };
            prop_assert_eq!(img.sample(i, j), &[expected]);
        }
    }
}
