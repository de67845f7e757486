//! Exhaustive minimizers used as ground truth for the dynamic programs.
//!
//! Both enumerate labelings in lexicographic order (first element most
//! significant) and keep the first labeling attaining the minimum.

use crate::chain::{evaluate, ChainCosts, ChainSolution};
use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::image::{pnorm_pow_diff, Image};
use crate::params::{EnergyParams, Order};

/// Largest number of chain labelings [`brute_force_chain`] will enumerate.
pub const CHAIN_SEARCH_LIMIT: f64 = 1e7;

/// Largest number of displacement fields [`brute_force_pixel_energy`] will
/// consider. Covers a 3x3 image with `rho = 1` (`3^18` fields); the search is
/// depth-first with pruning on the non-negative partial energy, so far fewer
/// leaves are actually visited.
pub const PIXEL_SEARCH_LIMIT: f64 = 1e9;

/// Minimizes a chain energy (with or without ternary terms) by trying every
/// labeling.
pub fn brute_force_chain<C: ChainCosts + ?Sized>(problem: &C) -> Result<ChainSolution> {
    let (n, l) = (problem.len(), problem.num_labels());
    if n == 0 || l == 0 {
        return Err(Error::EmptyProblem);
    }
    let space = (l as f64).powi(n as i32);
    if space > CHAIN_SEARCH_LIMIT {
        return Err(Error::SearchSpaceTooLarge(space));
    }
    let mut labels = vec![0usize; n];
    let mut best = ChainSolution {
        labels: labels.clone(),
        energy: evaluate(problem, &labels)?,
    };
    loop {
        // odometer step, last position fastest
        let mut pos = n;
        loop {
            if pos == 0 {
                return Ok(best);
            }
            pos -= 1;
            labels[pos] += 1;
            if labels[pos] < l {
                break;
            }
            labels[pos] = 0;
        }
        let energy = evaluate(problem, &labels)?;
        if energy < best.energy {
            best = ChainSolution {
                labels: labels.clone(),
                energy,
            };
        }
    }
}

struct PixelSearch {
    width: usize,
    count: usize,
    labels: usize,
    unary: Vec<f64>,
    // left[k][a * L + b]: edge between pixel k - 1 (label a) and k (label b)
    left: Vec<Vec<f64>>,
    // up[k][a * L + b]: edge between pixel k - width (label a) and k (label b)
    up: Vec<Vec<f64>>,
    current: Vec<usize>,
    best: Vec<usize>,
    best_energy: f64,
}

impl PixelSearch {
    fn descend(&mut self, k: usize, partial: f64) {
        if partial >= self.best_energy {
            return;
        }
        if k == self.count {
            self.best_energy = partial;
            self.best.copy_from_slice(&self.current);
            return;
        }
        let l = self.labels;
        let i = k % self.width;
        for b in 0..l {
            let mut cost = partial + self.unary[b];
            if i > 0 {
                cost += self.left[k][self.current[k - 1] * l + b];
            }
            if k >= self.width {
                cost += self.up[k][self.current[k - self.width] * l + b];
            }
            self.current[k] = b;
            self.descend(k + 1, cost);
        }
    }
}

/// Globally minimizes the discrete pixel-jitter energy on a tiny image by
/// exhaustive search over all displacement fields with components in
/// `-rho..=rho`.
pub fn brute_force_pixel_energy(img: &Image, params: &EnergyParams) -> Result<(VectorField, f64)> {
    let (m, n) = (img.width(), img.height());
    let side = params.labels_per_axis();
    let l = side * side;
    let count = m * n;
    let space = (l as f64).powi(count as i32);
    if space > PIXEL_SEARCH_LIMIT {
        return Err(Error::SearchSpaceTooLarge(space));
    }
    let rho = params.rho() as i32;
    let term = params.term(Order::First);
    let displacement = |label: usize| [(label / side) as i32 - rho, (label % side) as i32 - rho];

    let unary: Vec<f64> = (0..l)
        .map(|x| {
            let [d1, d2] = displacement(x);
            params.alpha() * f64::from(d1 * d1 + d2 * d2)
        })
        .collect();
    let values: Vec<Vec<&[f64]>> = (0..count)
        .map(|k| {
            let (i, j) = ((k % m) as isize, (k / m) as isize);
            (0..l)
                .map(|x| {
                    let [d1, d2] = displacement(x);
                    img.sample(i - d1 as isize, j - d2 as isize)
                })
                .collect()
        })
        .collect();
    let edge = |a: usize, b: usize| -> Vec<f64> {
        (0..l * l)
            .map(|s| {
                term.weight * pnorm_pow_diff(values[b][s % l], values[a][s / l], term.exponent)
            })
            .collect()
    };
    let left = (0..count)
        .map(|k| {
            if k % m > 0 {
                edge(k - 1, k)
            } else {
                Vec::new()
            }
        })
        .collect();
    let up = (0..count)
        .map(|k| if k >= m { edge(k - m, k) } else { Vec::new() })
        .collect();

    let mut search = PixelSearch {
        width: m,
        count,
        labels: l,
        unary,
        left,
        up,
        current: vec![0; count],
        best: vec![0; count],
        best_energy: f64::INFINITY,
    };
    search.descend(0, 0.0);

    let field = VectorField::new(
        m,
        n,
        search.best.iter().map(|&x| displacement(x)).collect(),
        params.rho(),
    )?;
    Ok((field, search.best_energy))
}
