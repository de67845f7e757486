//! Line pixel jitter removal.
//!
//! Each pixel has its own horizontal displacement. The energy has no
//! horizontal coupling between displacements, so it splits into one chain
//! per column, each solved exactly and independently.

use rayon::prelude::*;

use crate::chain::{self, ChainCosts};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::image::{pnorm_pow_diff, pnorm_pow_second, Image};
use crate::params::{EnergyParams, Order};

/// The restriction of the line-pixel energy to column `column`; elements are
/// the rows and label `l` stands for the displacement `l - rho`.
#[derive(Debug, Clone, Copy)]
pub struct ColumnProblem<'a> {
    img: &'a Image,
    column: usize,
    params: EnergyParams,
}

pub fn build_column_problem<'a>(
    img: &'a Image,
    column: usize,
    params: &EnergyParams,
) -> Result<ColumnProblem<'a>> {
    if column >= img.width() {
        return Err(Error::DimensionMismatch(format!(
            "column {column} out of range for width {}",
            img.width()
        )));
    }
    Ok(ColumnProblem {
        img,
        column,
        params: *params,
    })
}

impl ColumnProblem<'_> {
    pub fn displacement(&self, label: usize) -> i32 {
        label as i32 - self.params.rho() as i32
    }

    #[inline]
    fn read(&self, j: usize, label: usize) -> &[f64] {
        self.img.sample(
            self.column as isize - self.displacement(label) as isize,
            j as isize,
        )
    }
}

impl ChainCosts for ColumnProblem<'_> {
    fn len(&self) -> usize {
        self.img.height()
    }

    fn num_labels(&self) -> usize {
        self.params.labels_per_axis()
    }

    fn unary(&self, _j: usize, label: usize) -> f64 {
        let d = f64::from(self.displacement(label));
        self.params.alpha() * d * d
    }

    fn pairwise(&self, j: usize, prev: usize, cur: usize) -> f64 {
        let term = self.params.term(Order::First);
        term.weight * pnorm_pow_diff(self.read(j, cur), self.read(j - 1, prev), term.exponent)
    }

    fn has_ternary(&self) -> bool {
        self.params.order() == Order::Second
    }

    fn ternary(&self, j: usize, prev2: usize, prev: usize, cur: usize) -> f64 {
        let term = self.params.term(Order::Second);
        term.weight
            * pnorm_pow_second(
                self.read(j, cur),
                self.read(j - 1, prev),
                self.read(j - 2, prev2),
                term.exponent,
            )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinePixelResult {
    pub field: ScalarField,
    pub image: Image,
    /// Sum of the per-column optimal energies.
    pub energy: f64,
}

/// Solves every column independently (in parallel) and reconstructs
/// `out(i, j) = img(i - d_ij, j)`.
pub fn dejitter_line_pixel(img: &Image, params: &EnergyParams) -> Result<LinePixelResult> {
    let (m, n) = (img.width(), img.height());
    let columns = (0..m)
        .into_par_iter()
        .map(|i| {
            let problem = build_column_problem(img, i, params)?;
            let solution = chain::solve(&problem)?;
            let d: Vec<i32> = solution
                .labels
                .iter()
                .map(|&l| problem.displacement(l))
                .collect();
            Ok((d, solution.energy))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut values = vec![0; m * n];
    let mut energy = 0.0;
    for (i, (d, e)) in columns.iter().enumerate() {
        for (j, &v) in d.iter().enumerate() {
            values[j * m + i] = v;
        }
        energy += e;
    }
    let field = ScalarField::new(m, n, values, params.rho())?;
    let image = reconstruct_line_pixel(img, &field)?;
    Ok(LinePixelResult {
        field,
        image,
        energy,
    })
}

/// `out(i, j) = img(i - d_ij, j)`, zero outside.
pub fn reconstruct_line_pixel(img: &Image, field: &ScalarField) -> Result<Image> {
    if field.width() != img.width() || field.height() != img.height() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} field for a {}x{} image",
            field.width(),
            field.height(),
            img.width(),
            img.height()
        )));
    }
    Ok(img.resample(|i, j| (i as isize - field.get(i, j) as isize, j as isize)))
}

/// Evaluates the line-pixel energy of `field` from its definition, column by
/// column.
pub fn line_pixel_energy(img: &Image, field: &ScalarField, params: &EnergyParams) -> Result<f64> {
    if field.width() != img.width() || field.height() != img.height() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} field for a {}x{} image",
            field.width(),
            field.height(),
            img.width(),
            img.height()
        )));
    }
    let at = |i: usize, j: usize| img.sample(i as isize - field.get(i, j) as isize, j as isize);
    let first = params.term(Order::First);
    let second = params.term(Order::Second);
    let mut total = 0.0;
    for i in 0..img.width() {
        let mut regularizer = 0.0;
        let mut first_sum = 0.0;
        let mut second_sum = 0.0;
        for j in 0..img.height() {
            let d = f64::from(field.get(i, j));
            regularizer += params.alpha() * d * d;
            if j >= 1 {
                first_sum += pnorm_pow_diff(at(i, j), at(i, j - 1), first.exponent);
            }
            if j >= 2 && params.order() == Order::Second {
                second_sum +=
                    pnorm_pow_second(at(i, j), at(i, j - 1), at(i, j - 2), second.exponent);
            }
        }
        total += regularizer + first.weight * first_sum + second.weight * second_sum;
    }
    Ok(total)
}
