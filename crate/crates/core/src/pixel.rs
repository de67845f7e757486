//! Pixel jitter removal by block coordinate descent.
//!
//! Each pixel carries a displacement `(d1, d2)` with both components in
//! `-rho..=rho`. The energy
//!
//! ```text
//! alpha sum ||d_ij||_2^2
//!   + sum_{i>=1} || r(i, j) - r(i - 1, j) ||_p^p
//!   + sum_{j>=1} || r(i, j) - r(i, j - 1) ||_p^p,    r(x) = u(x - d(x))
//! ```
//!
//! couples every pixel with its four neighbours, so no chain decomposition
//! exists. Instead, every sweep fixes all displacements except those on every
//! other column (or row) and minimizes exactly over the free lines: a free
//! line is a chain whose elements see their fixed neighbours through unary
//! terms. Free lines are never adjacent, so they are independent.
//!
//! Sweeps cycle through odd columns, even columns, odd rows and even rows,
//! counting lines from one: "odd" lines are zero-based indices 0, 2, 4, ...
//! Each sweep starts from the field left by the previous one, so the energy
//! never increases.

use std::fmt;

use rayon::prelude::*;

use crate::chain::{self, ChainCosts};
use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::image::{pnorm_pow_diff, Image};
use crate::params::{EnergyParams, Order};

/// Which lines a sweep frees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepKind {
    OddColumns,
    EvenColumns,
    OddRows,
    EvenRows,
}

impl SweepKind {
    /// The four kinds in the order one descent cycle visits them.
    pub const CYCLE: [SweepKind; 4] = [
        SweepKind::OddColumns,
        SweepKind::EvenColumns,
        SweepKind::OddRows,
        SweepKind::EvenRows,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SweepKind::OddColumns => "odd-columns",
            SweepKind::EvenColumns => "even-columns",
            SweepKind::OddRows => "odd-rows",
            SweepKind::EvenRows => "even-rows",
        }
    }

    fn is_columns(self) -> bool {
        matches!(self, SweepKind::OddColumns | SweepKind::EvenColumns)
    }

    /// Zero-based index of the first freed line.
    fn first_line(self) -> usize {
        match self {
            SweepKind::OddColumns | SweepKind::OddRows => 0,
            SweepKind::EvenColumns | SweepKind::EvenRows => 1,
        }
    }
}

impl fmt::Display for SweepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRecord {
    /// One-based sweep counter.
    pub sweep: usize,
    pub kind: SweepKind,
    /// Energy of the field after the sweep.
    pub energy: f64,
}

/// Energies along a descent run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BcdTrace {
    /// Energy of the zero initial field.
    pub initial_energy: f64,
    pub records: Vec<SweepRecord>,
}

impl BcdTrace {
    pub fn final_energy(&self) -> f64 {
        self.records
            .last()
            .map_or(self.initial_energy, |r| r.energy)
    }

    /// `sweep,kind,energy` lines with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("sweep,kind,energy\n");
        for r in &self.records {
            out.push_str(&format!("{},{},{:.17e}\n", r.sweep, r.kind, r.energy));
        }
        out
    }
}

fn check_dims(img: &Image, field: &VectorField) -> Result<()> {
    if field.width() != img.width() || field.height() != img.height() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} field for a {}x{} image",
            field.width(),
            field.height(),
            img.width(),
            img.height()
        )));
    }
    Ok(())
}

/// `out(i, j) = img(i - d1_ij, j - d2_ij)`, zero outside.
pub fn reconstruct_pixel(img: &Image, field: &VectorField) -> Result<Image> {
    check_dims(img, field)?;
    Ok(img.resample(|i, j| {
        let [d1, d2] = field.get(i, j);
        (i as isize - d1 as isize, j as isize - d2 as isize)
    }))
}

/// The pixel-jitter energy, summed row-major: the regularizer, then all
/// horizontal differences, then all vertical differences.
pub fn pixel_energy(img: &Image, field: &VectorField, params: &EnergyParams) -> Result<f64> {
    check_dims(img, field)?;
    let recon = reconstruct_pixel(img, field)?;
    let (m, n) = (img.width(), img.height());
    let term = params.term(Order::First);

    let mut regularizer = 0.0;
    for &[d1, d2] in field.values() {
        regularizer += params.alpha() * f64::from(d1 * d1 + d2 * d2);
    }
    let mut horizontal = 0.0;
    for j in 0..n {
        for i in 1..m {
            horizontal += pnorm_pow_diff(recon.pixel(i, j), recon.pixel(i - 1, j), term.exponent);
        }
    }
    let mut vertical = 0.0;
    for j in 1..n {
        for i in 0..m {
            vertical += pnorm_pow_diff(recon.pixel(i, j), recon.pixel(i, j - 1), term.exponent);
        }
    }
    Ok(regularizer + term.weight * (horizontal + vertical))
}

/// The energy restricted to one free line, all other displacements fixed.
/// Label `l` stands for `(l / side - rho, l % side - rho)`.
struct LineChain {
    len: usize,
    labels: usize,
    channels: usize,
    weight: f64,
    exponent: f64,
    unary: Vec<f64>,
    // values[(k * labels + l) * channels ..]: pixel k of the line read with label l
    values: Vec<f64>,
}

impl LineChain {
    #[inline]
    fn value(&self, k: usize, label: usize) -> &[f64] {
        let start = (k * self.labels + label) * self.channels;
        &self.values[start..start + self.channels]
    }
}

impl ChainCosts for LineChain {
    fn len(&self) -> usize {
        self.len
    }

    fn num_labels(&self) -> usize {
        self.labels
    }

    #[inline]
    fn unary(&self, j: usize, label: usize) -> f64 {
        self.unary[j * self.labels + label]
    }

    #[inline]
    fn pairwise(&self, j: usize, prev: usize, cur: usize) -> f64 {
        self.weight * pnorm_pow_diff(self.value(j, cur), self.value(j - 1, prev), self.exponent)
    }
}

struct Sweeper<'a> {
    img: &'a Image,
    params: &'a EnergyParams,
    field: &'a VectorField,
    // reconstruction under the current field; supplies the fixed neighbours
    recon: Image,
    side: usize,
}

impl Sweeper<'_> {
    fn displacement(&self, label: usize) -> [i32; 2] {
        let rho = self.params.rho() as i32;
        [
            (label / self.side) as i32 - rho,
            (label % self.side) as i32 - rho,
        ]
    }

    fn label(&self, d: [i32; 2]) -> usize {
        let rho = self.params.rho() as i32;
        (d[0] + rho) as usize * self.side + (d[1] + rho) as usize
    }

    /// The chain for free column `i` (`columns`) or free row `i`.
    fn line_chain(&self, columns: bool, line: usize) -> LineChain {
        let (m, n) = (self.img.width(), self.img.height());
        let len = if columns { n } else { m };
        let labels = self.side * self.side;
        let channels = self.img.channels();
        let term = self.params.term(Order::First);
        let mut unary = Vec::with_capacity(len * labels);
        let mut values = Vec::with_capacity(len * labels * channels);

        for k in 0..len {
            let (i, j) = if columns { (line, k) } else { (k, line) };
            // fixed neighbours across the line
            let (before, after) = if columns {
                (
                    (i > 0).then(|| self.recon.pixel(i - 1, j)),
                    (i + 1 < m).then(|| self.recon.pixel(i + 1, j)),
                )
            } else {
                (
                    (j > 0).then(|| self.recon.pixel(i, j - 1)),
                    (j + 1 < n).then(|| self.recon.pixel(i, j + 1)),
                )
            };
            for label in 0..labels {
                let [d1, d2] = self.displacement(label);
                let v = self
                    .img
                    .sample(i as isize - d1 as isize, j as isize - d2 as isize);
                let mut cost = self.params.alpha() * f64::from(d1 * d1 + d2 * d2);
                if let Some(b) = before {
                    cost += term.weight * pnorm_pow_diff(v, b, term.exponent);
                }
                if let Some(a) = after {
                    cost += term.weight * pnorm_pow_diff(a, v, term.exponent);
                }
                unary.push(cost);
                values.extend_from_slice(v);
            }
        }
        LineChain {
            len,
            labels,
            channels,
            weight: term.weight,
            exponent: term.exponent,
            unary,
            values,
        }
    }

    /// Optimal displacements for one free line. The current labeling is kept
    /// when the solver's labeling is not strictly better, so fixed points stay
    /// fixed under ties.
    fn solve_line(&self, columns: bool, line: usize) -> Result<Vec<[i32; 2]>> {
        let problem = self.line_chain(columns, line);
        let current: Vec<usize> = (0..problem.len)
            .map(|k| {
                let (i, j) = if columns { (line, k) } else { (k, line) };
                self.label(self.field.get(i, j))
            })
            .collect();
        let solution = chain::solve_chain(&problem)?;
        let labels = if chain::evaluate(&problem, &current)?
            <= chain::evaluate(&problem, &solution.labels)?
        {
            current
        } else {
            solution.labels
        };
        Ok(labels.into_iter().map(|l| self.displacement(l)).collect())
    }
}

/// One block coordinate descent step: every line selected by `kind` is
/// re-solved exactly with all other displacements held fixed.
pub fn bcd_sweep(
    img: &Image,
    field: &VectorField,
    params: &EnergyParams,
    kind: SweepKind,
) -> Result<VectorField> {
    check_dims(img, field)?;
    if field.rho() != params.rho() {
        return Err(Error::InvalidParameter(format!(
            "field bound {} differs from rho = {}",
            field.rho(),
            params.rho()
        )));
    }
    let sweeper = Sweeper {
        img,
        params,
        field,
        recon: reconstruct_pixel(img, field)?,
        side: params.labels_per_axis(),
    };
    let columns = kind.is_columns();
    let count = if columns { img.width() } else { img.height() };
    let lines: Vec<usize> = (kind.first_line()..count).step_by(2).collect();
    let solved = lines
        .par_iter()
        .map(|&line| sweeper.solve_line(columns, line))
        .collect::<Result<Vec<_>>>()?;

    let mut next = field.clone();
    for (&line, displacements) in lines.iter().zip(solved) {
        for (k, d) in displacements.into_iter().enumerate() {
            let (i, j) = if columns { (line, k) } else { (k, line) };
            next.set(i, j, d);
        }
    }
    Ok(next)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PixelResult {
    pub field: VectorField,
    pub image: Image,
    pub trace: BcdTrace,
    /// Number of four-sweep cycles performed.
    pub rounds: usize,
    /// Whether the last cycle left the field unchanged.
    pub converged: bool,
}

/// Default number of four-sweep cycles.
pub const DEFAULT_ROUNDS: usize = 4;

/// Block coordinate descent from the zero field for at most `max_rounds`
/// cycles, stopping early after a cycle that changes no displacement.
///
/// `alpha = 0` is accepted but tends to give poor reconstructions.
pub fn dejitter_pixel(
    img: &Image,
    params: &EnergyParams,
    max_rounds: usize,
) -> Result<PixelResult> {
    if max_rounds == 0 {
        return Err(Error::InvalidParameter(
            "at least one descent round is required".into(),
        ));
    }
    let mut field = VectorField::zeros(img.width(), img.height(), params.rho());
    let mut trace = BcdTrace {
        initial_energy: pixel_energy(img, &field, params)?,
        records: Vec::with_capacity(4 * max_rounds),
    };
    let mut rounds = 0;
    let mut converged = false;
    while rounds < max_rounds && !converged {
        rounds += 1;
        let mut changed = false;
        for kind in SweepKind::CYCLE {
            let next = bcd_sweep(img, &field, params, kind)?;
            changed |= next != field;
            field = next;
            trace.records.push(SweepRecord {
                sweep: trace.records.len() + 1,
                kind,
                energy: pixel_energy(img, &field, params)?,
            });
        }
        converged = !changed;
    }
    let image = reconstruct_pixel(img, &field)?;
    Ok(PixelResult {
        field,
        image,
        trace,
        rounds,
        converged,
    })
}
