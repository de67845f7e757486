//! Line jitter removal.
//!
//! Every row `j` gets one horizontal displacement `d_j` in `-rho..=rho`. The
//! energy
//!
//! ```text
//! sum_j alpha d_j^2
//!   + sum_{j>=1} sum_i || u(i - d_j, j) - u(i - d_{j-1}, j - 1) ||_p^p
//!   + sum_{j>=2} sum_i || u(i - d_j, j) - 2 u(i - d_{j-1}, j - 1) + u(i - d_{j-2}, j - 2) ||_p^p
//! ```
//!
//! (the last line only for second order) is a chain over rows and is
//! minimized exactly. The sums over `i` run over all columns, reading zeros
//! outside the image, so displacements near the border see zero-versus-zero
//! comparisons; `alpha` is what keeps large displacements in check there.

use crate::chain::{self, ChainCosts, ChainTable};
use crate::error::{Error, Result};
use crate::field::LineDisplacement;
use crate::image::{pnorm_pow_diff, pnorm_pow_second, Image};
use crate::params::{EnergyParams, Order};

/// Default memory budget for cached cost tables (256 MiB).
pub const DEFAULT_TABLE_BUDGET: usize = 256 << 20;

/// The line-jitter energy of one image as a chain problem over its rows.
/// Label `l` stands for the displacement `l - rho`.
#[derive(Debug, Clone, Copy)]
pub struct LineProblem<'a> {
    img: &'a Image,
    params: EnergyParams,
}

/// Builds the chain problem whose minimizer is the optimal row displacement.
pub fn build_line_problem<'a>(img: &'a Image, params: &EnergyParams) -> LineProblem<'a> {
    LineProblem {
        img,
        params: *params,
    }
}

impl LineProblem<'_> {
    pub fn displacement(&self, label: usize) -> i32 {
        label as i32 - self.params.rho() as i32
    }

    pub fn label(&self, displacement: i32) -> Option<usize> {
        let shifted = displacement + self.params.rho() as i32;
        (shifted >= 0 && (shifted as usize) < self.num_labels()).then_some(shifted as usize)
    }

    #[inline]
    fn read(&self, i: usize, j: usize, label: usize) -> &[f64] {
        self.img
            .sample(i as isize - self.displacement(label) as isize, j as isize)
    }
}

impl ChainCosts for LineProblem<'_> {
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
        let sum: f64 = (0..self.img.width())
            .map(|i| {
                pnorm_pow_diff(
                    self.read(i, j, cur),
                    self.read(i, j - 1, prev),
                    term.exponent,
                )
            })
            .sum();
        term.weight * sum
    }

    fn has_ternary(&self) -> bool {
        self.params.order() == Order::Second
    }

    fn ternary(&self, j: usize, prev2: usize, prev: usize, cur: usize) -> f64 {
        let term = self.params.term(Order::Second);
        let sum: f64 = (0..self.img.width())
            .map(|i| {
                pnorm_pow_second(
                    self.read(i, j, cur),
                    self.read(i, j - 1, prev),
                    self.read(i, j - 2, prev2),
                    term.exponent,
                )
            })
            .sum();
        term.weight * sum
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LineOptions {
    /// Cost tables larger than this many bytes are not cached; costs are then
    /// evaluated on demand during the dynamic program.
    pub table_budget: usize,
}

impl Default for LineOptions {
    fn default() -> Self {
        Self {
            table_budget: DEFAULT_TABLE_BUDGET,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineResult {
    pub displacement: LineDisplacement,
    pub image: Image,
    pub energy: f64,
}

/// Finds the globally optimal row displacement and reconstructs the image.
pub fn dejitter_line(img: &Image, params: &EnergyParams) -> Result<LineResult> {
    dejitter_line_with(img, params, &LineOptions::default())
}

pub fn dejitter_line_with(
    img: &Image,
    params: &EnergyParams,
    options: &LineOptions,
) -> Result<LineResult> {
    let problem = build_line_problem(img, params);
    let footprint =
        ChainTable::footprint(problem.len(), problem.num_labels(), problem.has_ternary());
    let solution = if footprint <= options.table_budget {
        chain::solve(&ChainTable::tabulate(&problem)?)?
    } else {
        chain::solve(&problem)?
    };
    let values = solution
        .labels
        .iter()
        .map(|&l| problem.displacement(l))
        .collect();
    let displacement = LineDisplacement::new(values, params.rho())?;
    let image = reconstruct_line(img, &displacement)?;
    Ok(LineResult {
        displacement,
        image,
        energy: solution.energy,
    })
}

/// Undoes a row displacement: `out(i, j) = img(i - d_j, j)`, zero outside.
pub fn reconstruct_line(img: &Image, d: &LineDisplacement) -> Result<Image> {
    if d.len() != img.height() {
        return Err(Error::DimensionMismatch(format!(
            "{} row displacements for an image with {} rows",
            d.len(),
            img.height()
        )));
    }
    let values = d.values();
    Ok(img.resample(|i, j| (i as isize - values[j] as isize, j as isize)))
}

/// Evaluates the line-jitter energy of `d` term by term from its definition.
pub fn line_energy(img: &Image, d: &LineDisplacement, params: &EnergyParams) -> Result<f64> {
    if d.len() != img.height() {
        return Err(Error::DimensionMismatch(format!(
            "{} row displacements for an image with {} rows",
            d.len(),
            img.height()
        )));
    }
    let v = d.values();
    let at = |i: usize, j: usize| img.sample(i as isize - v[j] as isize, j as isize);
    let mut regularizer = 0.0;
    for &x in v {
        regularizer += params.alpha() * f64::from(x) * f64::from(x);
    }
    let first = params.term(Order::First);
    let mut first_sum = 0.0;
    for j in 1..img.height() {
        for i in 0..img.width() {
            first_sum += pnorm_pow_diff(at(i, j), at(i, j - 1), first.exponent);
        }
    }
    let mut total = regularizer + first.weight * first_sum;
    if params.order() == Order::Second {
        let second = params.term(Order::Second);
        let mut second_sum = 0.0;
        for j in 2..img.height() {
            for i in 0..img.width() {
                second_sum +=
                    pnorm_pow_second(at(i, j), at(i, j - 1), at(i, j - 2), second.exponent);
            }
        }
        total += second.weight * second_sum;
    }
    Ok(total)
}
