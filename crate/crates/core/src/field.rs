//! Integer displacement containers and their plain-text file formats.
//!
//! Formats:
//! - line jitter: one integer per line, one line per image row;
//! - scalar field: a header `m n`, then `n` rows of `m` integers;
//! - vector field: a header `m n`, then `n` rows of `m` `d1,d2` pairs.
//!
//! Parsed displacements carry `rho` equal to their largest magnitude.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};

fn check_bound(values: impl Iterator<Item = i32>, rho: u32) -> Result<()> {
    for (index, value) in values.enumerate() {
        if value.unsigned_abs() > rho {
            return Err(Error::BoundViolation { index, value, rho });
        }
    }
    Ok(())
}

fn max_magnitude(values: impl Iterator<Item = i32>) -> u32 {
    values.map(i32::unsigned_abs).max().unwrap_or(0)
}

/// Fraction of positions where `est` equals `truth`; with `modulo_shift`, the
/// best such fraction over constant offsets `c` (applied to every component,
/// `|c_k| <= max_offset`) added to `est`.
fn agreement<const K: usize>(
    est: &[[i32; K]],
    truth: &[[i32; K]],
    modulo_shift: bool,
    max_offset: i32,
) -> Result<f64> {
    if est.len() != truth.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} estimated displacements vs {} true ones",
            est.len(),
            truth.len()
        )));
    }
    if est.is_empty() {
        return Ok(1.0);
    }
    let count = |offset: [i32; K]| {
        est.iter()
            .zip(truth)
            .filter(|(e, t)| (0..K).all(|k| e[k] + offset[k] == t[k]))
            .count()
    };
    let best = if modulo_shift {
        let side = (2 * max_offset + 1) as usize;
        let total = side.pow(K as u32);
        (0..total)
            .map(|mut code| {
                let mut offset = [0; K];
                for slot in offset.iter_mut().rev() {
                    *slot = (code % side) as i32 - max_offset;
                    code /= side;
                }
                count(offset)
            })
            .max()
            .unwrap_or(0)
    } else {
        count([0; K])
    };
    Ok(best as f64 / est.len() as f64)
}

/// One horizontal shift per image row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineDisplacement {
    values: Vec<i32>,
    rho: u32,
}

impl LineDisplacement {
    pub fn new(values: Vec<i32>, rho: u32) -> Result<Self> {
        check_bound(values.iter().copied(), rho)?;
        Ok(Self { values, rho })
    }

    /// Uses the largest realized magnitude as the bound.
    pub fn from_values(values: Vec<i32>) -> Self {
        let rho = max_magnitude(values.iter().copied());
        Self { values, rho }
    }

    pub fn zeros(rows: usize, rho: u32) -> Self {
        Self {
            values: vec![0; rows],
            rho,
        }
    }

    pub fn values(&self) -> &[i32] {
        &self.values
    }

    pub fn rho(&self) -> u32 {
        self.rho
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for v in &self.values {
            writeln!(out, "{v}").unwrap();
        }
        out
    }
}

impl FromStr for LineDisplacement {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut values = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            values.push(parse_int(line, n + 1)?);
        }
        Ok(Self::from_values(values))
    }
}

/// Fraction of rows where `est` matches `truth`. With `modulo_shift`, the
/// maximum over constant offsets `|c| <= 2 rho` added to `est`, where `rho` is
/// the larger of the two bounds.
pub fn displacement_accuracy(
    est: &LineDisplacement,
    truth: &LineDisplacement,
    modulo_shift: bool,
) -> Result<f64> {
    let e: Vec<[i32; 1]> = est.values.iter().map(|&v| [v]).collect();
    let t: Vec<[i32; 1]> = truth.values.iter().map(|&v| [v]).collect();
    let rho = est.rho.max(truth.rho) as i32;
    agreement(&e, &t, modulo_shift, 2 * rho)
}

/// One horizontal shift per pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScalarField {
    width: usize,
    height: usize,
    values: Vec<i32>,
    rho: u32,
}

impl ScalarField {
    /// `values` is row-major, `width * height` entries.
    pub fn new(width: usize, height: usize, values: Vec<i32>, rho: u32) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::BufferLength {
                expected: width * height,
                actual: values.len(),
            });
        }
        check_bound(values.iter().copied(), rho)?;
        Ok(Self {
            width,
            height,
            values,
            rho,
        })
    }

    pub fn zeros(width: usize, height: usize, rho: u32) -> Self {
        Self {
            width,
            height,
            values: vec![0; width * height],
            rho,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn rho(&self) -> u32 {
        self.rho
    }

    pub fn values(&self) -> &[i32] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> i32 {
        self.values[j * self.width + i]
    }

    /// The displacements of column `i`, top to bottom.
    pub fn column(&self, i: usize) -> Vec<i32> {
        (0..self.height).map(|j| self.get(i, j)).collect()
    }

    pub fn accuracy(&self, truth: &ScalarField, modulo_shift: bool) -> Result<f64> {
        check_shape(self.width, self.height, truth.width, truth.height)?;
        let e: Vec<[i32; 1]> = self.values.iter().map(|&v| [v]).collect();
        let t: Vec<[i32; 1]> = truth.values.iter().map(|&v| [v]).collect();
        agreement(&e, &t, modulo_shift, 2 * self.rho.max(truth.rho) as i32)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.width, self.height);
        for row in self.values.chunks(self.width) {
            let cells: Vec<String> = row.iter().map(i32::to_string).collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        }
        out
    }
}

impl FromStr for ScalarField {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let (width, height, rows) = parse_grid(text)?;
        let mut values = Vec::with_capacity(width * height);
        for (line, row) in rows {
            for cell in row {
                values.push(parse_int(cell, line)?);
            }
        }
        let rho = max_magnitude(values.iter().copied());
        Ok(Self {
            width,
            height,
            values,
            rho,
        })
    }
}

/// One `(d1, d2)` shift per pixel: `d1` horizontal, `d2` vertical.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VectorField {
    width: usize,
    height: usize,
    values: Vec<[i32; 2]>,
    rho: u32,
}

impl VectorField {
    /// `values` is row-major, `width * height` entries; both components are
    /// bounded by `rho`.
    pub fn new(width: usize, height: usize, values: Vec<[i32; 2]>, rho: u32) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::BufferLength {
                expected: width * height,
                actual: values.len(),
            });
        }
        check_bound(values.iter().flat_map(|d| d.iter().copied()), rho)?;
        Ok(Self {
            width,
            height,
            values,
            rho,
        })
    }

    pub fn zeros(width: usize, height: usize, rho: u32) -> Self {
        Self {
            width,
            height,
            values: vec![[0, 0]; width * height],
            rho,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn rho(&self) -> u32 {
        self.rho
    }

    pub fn values(&self) -> &[[i32; 2]] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> [i32; 2] {
        self.values[j * self.width + i]
    }

    pub(crate) fn set(&mut self, i: usize, j: usize, d: [i32; 2]) {
        debug_assert!(d[0].unsigned_abs() <= self.rho && d[1].unsigned_abs() <= self.rho);
        self.values[j * self.width + i] = d;
    }

    pub fn accuracy(&self, truth: &VectorField, modulo_shift: bool) -> Result<f64> {
        check_shape(self.width, self.height, truth.width, truth.height)?;
        agreement(
            &self.values,
            &truth.values,
            modulo_shift,
            2 * self.rho.max(truth.rho) as i32,
        )
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.width, self.height);
        for row in self.values.chunks(self.width) {
            let cells: Vec<String> = row.iter().map(|d| format!("{},{}", d[0], d[1])).collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        }
        out
    }
}

impl FromStr for VectorField {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let (width, height, rows) = parse_grid(text)?;
        let mut values = Vec::with_capacity(width * height);
        for (line, row) in rows {
            for cell in row {
                let (a, b) = cell.split_once(',').ok_or_else(|| Error::Parse {
                    line,
                    message: format!("expected `d1,d2`, found `{cell}`"),
                })?;
                values.push([parse_int(a, line)?, parse_int(b, line)?]);
            }
        }
        let rho = max_magnitude(values.iter().flat_map(|d| d.iter().copied()));
        Ok(Self {
            width,
            height,
            values,
            rho,
        })
    }
}

/// Any of the three displacement kinds, as read from a file whose kind is
/// not known in advance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Displacement {
    Line(LineDisplacement),
    Scalar(ScalarField),
    Vector(VectorField),
}

impl Displacement {
    pub fn rho(&self) -> u32 {
        match self {
            Displacement::Line(d) => d.rho(),
            Displacement::Scalar(d) => d.rho(),
            Displacement::Vector(d) => d.rho(),
        }
    }

    pub fn to_text(&self) -> String {
        match self {
            Displacement::Line(d) => d.to_text(),
            Displacement::Scalar(d) => d.to_text(),
            Displacement::Vector(d) => d.to_text(),
        }
    }

    /// Agreement between an estimate (`self`) and the truth; both must be of
    /// the same kind and size.
    pub fn accuracy(&self, truth: &Displacement, modulo_shift: bool) -> Result<f64> {
        match (self, truth) {
            (Displacement::Line(e), Displacement::Line(t)) => {
                displacement_accuracy(e, t, modulo_shift)
            }
            (Displacement::Scalar(e), Displacement::Scalar(t)) => e.accuracy(t, modulo_shift),
            (Displacement::Vector(e), Displacement::Vector(t)) => e.accuracy(t, modulo_shift),
            _ => Err(Error::DimensionMismatch(
                "displacement files are of different kinds".into(),
            )),
        }
    }
}

impl FromStr for Displacement {
    type Err = Error;

    /// A first line with two tokens is a grid header; grids with `,` cells are
    /// vector fields.
    fn from_str(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let first = lines.next().unwrap_or("");
        if first.split_whitespace().count() == 2 {
            if lines.any(|l| l.contains(',')) {
                Ok(Displacement::Vector(text.parse()?))
            } else {
                Ok(Displacement::Scalar(text.parse()?))
            }
        } else {
            Ok(Displacement::Line(text.parse()?))
        }
    }
}

fn check_shape(w1: usize, h1: usize, w2: usize, h2: usize) -> Result<()> {
    if (w1, h1) != (w2, h2) {
        return Err(Error::DimensionMismatch(format!(
            "{w1}x{h1} field vs {w2}x{h2} field"
        )));
    }
    Ok(())
}

fn parse_int(token: &str, line: usize) -> Result<i32> {
    token.trim().parse().map_err(|_| Error::Parse {
        line,
        message: format!("`{}` is not an integer", token.trim()),
    })
}

type GridRows<'a> = Vec<(usize, Vec<&'a str>)>;

fn parse_grid(text: &str) -> Result<(usize, usize, GridRows<'_>)> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(n, l)| (n + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (line, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "missing `m n` header".into(),
    })?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    if dims.len() != 2 {
        return Err(Error::Parse {
            line,
            message: format!("expected `m n` header, found `{header}`"),
        });
    }
    let width = parse_int(dims[0], line)?;
    let height = parse_int(dims[1], line)?;
    if width <= 0 || height <= 0 {
        return Err(Error::Parse {
            line,
            message: "dimensions must be positive".into(),
        });
    }
    let (width, height) = (width as usize, height as usize);
    let rows: GridRows<'_> = lines
        .map(|(n, l)| (n, l.split_whitespace().collect()))
        .collect();
    if rows.len() != height {
        return Err(Error::Parse {
            line,
            message: format!("header announces {height} rows, found {}", rows.len()),
        });
    }
    if let Some((n, row)) = rows.iter().find(|(_, r)| r.len() != width) {
        return Err(Error::Parse {
            line: *n,
            message: format!("expected {width} entries, found {}", row.len()),
        });
    }
    Ok((width, height, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn bounds_are_enforced() {
        assert!(LineDisplacement::new(vec![0, 2, -2], 2).is_ok());
        assert!(matches!(
            LineDisplacement::new(vec![0, 3], 2),
            Err(Error::BoundViolation {
                index: 1,
                value: 3,
                rho: 2
            })
        ));
        assert!(ScalarField::new(2, 1, vec![1, -2], 1).is_err());
        assert!(ScalarField::new(2, 2, vec![0; 3], 1).is_err());
        assert!(VectorField::new(1, 1, vec![[0, -4]], 3).is_err());
        assert!(VectorField::new(1, 1, vec![[3, -3]], 3).is_ok());
    }

    #[test]
    fn accuracy_examples() {
        let truth = LineDisplacement::from_values(vec![0, 1, -1, 2, 0]);
        let shifted = LineDisplacement::from_values(truth.values().iter().map(|v| v + 1).collect());
        assert_eq!(displacement_accuracy(&truth, &truth, false).unwrap(), 1.0);
        assert_eq!(displacement_accuracy(&shifted, &truth, true).unwrap(), 1.0);
        assert_eq!(displacement_accuracy(&shifted, &truth, false).unwrap(), 0.0);

        let half = LineDisplacement::from_values(vec![0, 1, 0, 0]);
        let truth4 = LineDisplacement::from_values(vec![0, 1, 1, 1]);
        assert_eq!(displacement_accuracy(&half, &truth4, false).unwrap(), 0.5);
        assert_eq!(displacement_accuracy(&half, &truth4, true).unwrap(), 0.5);

        let short = LineDisplacement::from_values(vec![0]);
        assert!(displacement_accuracy(&short, &truth, false).is_err());
    }

    #[test]
    fn vector_accuracy_modulo_shift() {
        let truth = VectorField::new(2, 1, vec![[1, 0], [0, -1]], 1).unwrap();
        let est = VectorField::new(2, 1, vec![[0, 1], [-1, 0]], 1).unwrap();
        assert_eq!(est.accuracy(&truth, false).unwrap(), 0.0);
        assert_eq!(est.accuracy(&truth, true).unwrap(), 1.0);
    }

    #[test]
    fn text_formats() {
        let line = LineDisplacement::from_values(vec![0, -3, 2]);
        assert_eq!(line.to_text(), "0\n-3\n2\n");
        let scalar = ScalarField::new(3, 2, vec![1, 0, -1, 2, 2, 0], 2).unwrap();
        assert_eq!(scalar.to_text(), "3 2\n1 0 -1\n2 2 0\n");
        let vector = VectorField::new(2, 1, vec![[1, -1], [0, 2]], 2).unwrap();
        assert_eq!(vector.to_text(), "2 1\n1,-1 0,2\n");

        assert_eq!(
            line.to_text().parse::<Displacement>().unwrap(),
            Displacement::Line(line)
        );
        assert_eq!(
            scalar.to_text().parse::<Displacement>().unwrap(),
            Displacement::Scalar(scalar)
        );
        assert_eq!(
            vector.to_text().parse::<Displacement>().unwrap(),
            Displacement::Vector(vector)
        );
    }

    #[test]
    fn malformed_files() {
        assert!("1\nx\n".parse::<LineDisplacement>().is_err());
        assert!("2 2\n1 1\n".parse::<ScalarField>().is_err());
        assert!("2 1\n1 1 1\n".parse::<ScalarField>().is_err());
        assert!("1 1\n3\n".parse::<VectorField>().is_err());
        assert!("".parse::<ScalarField>().is_err());
    }

    proptest! {
        #[test]
        fn vector_text_round_trip(w in 1usize..5, h in 1usize..5, seed in prop::collection::vec((-3i32..=3, -3i32..=3), 25)) {
            let values: Vec<[i32; 2]> = seed.iter().take(w * h).map(|&(a, b)| [a, b]).collect();
            let field = VectorField::new(w, h, values, 3).unwrap();
            let back: VectorField = field.to_text().parse().unwrap();
            prop_assert_eq!(back.values(), field.values());
            prop_assert!(back.rho() <= 3);
        }
    }
}
