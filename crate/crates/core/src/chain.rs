//! Exact minimization of chain energies
//!
//! ```text
//! E(x) = sum_j unary_j(x_j) + sum_{j>=1} pairwise_j(x_{j-1}, x_j)
//!                           + sum_{j>=2} ternary_j(x_{j-2}, x_{j-1}, x_j)
//! ```
//!
//! by dynamic programming over the sequence. `OPT(j, l)` holds the best energy
//! of the first `j + 1` elements with element `j` labeled `l`; it is built
//! front to back and the minimizer is recovered from stored argmins. With
//! ternary terms the state is the pair of the last two labels.
//!
//! Ties are broken towards the smallest label index, both when choosing a
//! predecessor and when choosing the final state, so results are
//! deterministic.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Cost functions of a chain labeling problem over labels `0..num_labels()`.
///
/// Element indices are zero-based. `pairwise(j, a, b)` couples element
/// `j - 1` (label `a`) with element `j` (label `b`) and is only queried for
/// `j >= 1`; `ternary(j, a, b, c)` couples `j - 2`, `j - 1`, `j` and is only
/// queried for `j >= 2` when [`ChainCosts::has_ternary`] is true.
pub trait ChainCosts {
    fn len(&self) -> usize;

    fn num_labels(&self) -> usize;

    fn unary(&self, j: usize, label: usize) -> f64;

    fn pairwise(&self, j: usize, prev: usize, cur: usize) -> f64;

    fn has_ternary(&self) -> bool {
        false
    }

    fn ternary(&self, _j: usize, _prev2: usize, _prev: usize, _cur: usize) -> f64 {
        0.0
    }

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl<C: ChainCosts + ?Sized> ChainCosts for &C {
    fn len(&self) -> usize {
        (**self).len()
    }
    fn num_labels(&self) -> usize {
        (**self).num_labels()
    }
    fn unary(&self, j: usize, label: usize) -> f64 {
        (**self).unary(j, label)
    }
    fn pairwise(&self, j: usize, prev: usize, cur: usize) -> f64 {
        (**self).pairwise(j, prev, cur)
    }
    fn has_ternary(&self) -> bool {
        (**self).has_ternary()
    }
    fn ternary(&self, j: usize, prev2: usize, prev: usize, cur: usize) -> f64 {
        (**self).ternary(j, prev2, prev, cur)
    }
}

/// A labeling together with its energy.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSolution {
    pub labels: Vec<usize>,
    pub energy: f64,
}

/// A chain problem with all costs stored in dense tables.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainTable {
    len: usize,
    labels: usize,
    unary: Vec<f64>,
    pairwise: Vec<f64>,
    ternary: Option<Vec<f64>>,
}

impl ChainTable {
    /// Tables are row-major: `unary[j][l]` (`n x L`), `pairwise[j - 1][a][b]`
    /// (`(n - 1) x L x L`) and `ternary[j - 2][a][b][c]` (`(n - 2) x L^3`).
    pub fn new(
        len: usize,
        labels: usize,
        unary: Vec<f64>,
        pairwise: Vec<f64>,
        ternary: Option<Vec<f64>>,
    ) -> Result<Self> {
        if len == 0 || labels == 0 {
            return Err(Error::EmptyProblem);
        }
        let expect = |name: &str, got: usize, want: usize| {
            if got == want {
                Ok(())
            } else {
                Err(Error::DimensionMismatch(format!(
                    "{name} table has {got} entries, expected {want}"
                )))
            }
        };
        expect("unary", unary.len(), len * labels)?;
        expect("pairwise", pairwise.len(), (len - 1) * labels * labels)?;
        if let Some(t) = &ternary {
            expect("ternary", t.len(), len.saturating_sub(2) * labels.pow(3))?;
        }
        Ok(Self {
            len,
            labels,
            unary,
            pairwise,
            ternary,
        })
    }

    /// Evaluates the given closures at every table entry.
    pub fn from_fn(
        len: usize,
        labels: usize,
        unary: impl Fn(usize, usize) -> f64,
        pairwise: impl Fn(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let u = (0..len)
            .flat_map(|j| (0..labels).map(move |l| (j, l)))
            .map(|(j, l)| unary(j, l))
            .collect();
        let mut p = Vec::with_capacity(len.saturating_sub(1) * labels * labels);
        for j in 1..len {
            for a in 0..labels {
                for b in 0..labels {
                    p.push(pairwise(j, a, b));
                }
            }
        }
        Self::new(len, labels, u, p, None)
    }

    /// Adds ternary costs evaluated from a closure.
    pub fn with_ternary_fn(mut self, ternary: impl Fn(usize, usize, usize, usize) -> f64) -> Self {
        let l = self.labels;
        let mut t = Vec::with_capacity(self.len.saturating_sub(2) * l * l * l);
        for j in 2..self.len {
            for a in 0..l {
                for b in 0..l {
                    for c in 0..l {
                        t.push(ternary(j, a, b, c));
                    }
                }
            }
        }
        self.ternary = Some(t);
        self
    }

    /// Drops the ternary terms.
    pub fn without_ternary(mut self) -> Self {
        self.ternary = None;
        self
    }

    /// Materializes any cost source, one element at a time in parallel.
    pub fn tabulate<C: ChainCosts + Sync + ?Sized>(costs: &C) -> Result<Self> {
        let (n, l) = (costs.len(), costs.num_labels());
        if n == 0 || l == 0 {
            return Err(Error::EmptyProblem);
        }
        let unary = (0..n)
            .into_par_iter()
            .flat_map_iter(|j| (0..l).map(move |x| costs.unary(j, x)))
            .collect();
        let pairwise = (1..n)
            .into_par_iter()
            .flat_map_iter(|j| (0..l * l).map(move |s| costs.pairwise(j, s / l, s % l)))
            .collect();
        let ternary = costs.has_ternary().then(|| {
            (2..n)
                .into_par_iter()
                .flat_map_iter(|j| {
                    (0..l * l * l).map(move |s| costs.ternary(j, s / (l * l), (s / l) % l, s % l))
                })
                .collect()
        });
        Self::new(n, l, unary, pairwise, ternary)
    }

    /// Approximate size in bytes of the tables `tabulate` would build.
    pub fn footprint(len: usize, labels: usize, ternary: bool) -> usize {
        let mut entries = len * labels + len.saturating_sub(1) * labels * labels;
        if ternary {
            entries += len.saturating_sub(2) * labels.pow(3);
        }
        entries * std::mem::size_of::<f64>()
    }
}

impl ChainCosts for ChainTable {
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
        let l = self.labels;
        self.pairwise[((j - 1) * l + prev) * l + cur]
    }

    fn has_ternary(&self) -> bool {
        self.ternary.is_some()
    }

    #[inline]
    fn ternary(&self, j: usize, prev2: usize, prev: usize, cur: usize) -> f64 {
        let l = self.labels;
        match &self.ternary {
            Some(t) => t[(((j - 2) * l + prev2) * l + prev) * l + cur],
            None => 0.0,
        }
    }
}

fn check_nonempty<C: ChainCosts + ?Sized>(problem: &C) -> Result<(usize, usize)> {
    let (n, l) = (problem.len(), problem.num_labels());
    if n == 0 || l == 0 {
        return Err(Error::EmptyProblem);
    }
    Ok((n, l))
}

fn first_min(values: &[f64]) -> usize {
    let mut arg = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v < values[arg] {
            arg = i;
        }
    }
    arg
}

/// Globally minimizes a chain energy with unary and pairwise terms in
/// `O(n L^2)` time and `O(n L)` memory.
///
/// Problems that report ternary terms are rejected; use
/// [`solve_chain_ternary`] (or [`solve`]) for those.
pub fn solve_chain<C: ChainCosts + ?Sized>(problem: &C) -> Result<ChainSolution> {
    check_nonempty(problem)?;
    if problem.has_ternary() {
        return Err(Error::UnexpectedTernary);
    }
    solve_pairwise(problem)
}

fn solve_pairwise<C: ChainCosts + ?Sized>(problem: &C) -> Result<ChainSolution> {
    let (n, l) = check_nonempty(problem)?;
    let mut opt: Vec<f64> = (0..l).map(|x| problem.unary(0, x)).collect();
    if opt.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteCost(0));
    }
    let mut next = vec![0.0; l];
    let mut back = vec![0u32; (n - 1) * l];

    for j in 1..n {
        let back_row = &mut back[(j - 1) * l..j * l];
        for cur in 0..l {
            let mut best = f64::INFINITY;
            let mut arg = 0;
            for (prev, &acc) in opt.iter().enumerate() {
                let c = acc + problem.pairwise(j, prev, cur);
                if c < best {
                    best = c;
                    arg = prev;
                }
            }
            next[cur] = problem.unary(j, cur) + best;
            back_row[cur] = arg as u32;
        }
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteCost(j));
        }
        std::mem::swap(&mut opt, &mut next);
    }

    let last = first_min(&opt);
    let energy = opt[last];
    let mut labels = vec![0; n];
    labels[n - 1] = last;
    for j in (1..n).rev() {
        labels[j - 1] = back[(j - 1) * l + labels[j]] as usize;
    }
    Ok(ChainSolution { labels, energy })
}

/// Globally minimizes a chain energy with unary, pairwise and ternary terms
/// in `O(n L^3)` time and `O(n L^2)` memory.
///
/// For fewer than three elements the ternary terms vanish and the result is
/// exactly that of [`solve_chain`] on the same unary and pairwise costs.
pub fn solve_chain_ternary<C: ChainCosts + ?Sized>(problem: &C) -> Result<ChainSolution> {
    let (n, l) = check_nonempty(problem)?;
    if n < 3 {
        return solve_pairwise(problem);
    }
    let states = l * l;

    // opt[a * l + b]: best energy of the prefix ending with labels (a, b) at
    // positions (j - 1, j).
    let mut opt = vec![0.0; states];
    for a in 0..l {
        let ua = problem.unary(0, a);
        for b in 0..l {
            opt[a * l + b] = ua + problem.unary(1, b) + problem.pairwise(1, a, b);
        }
    }
    if opt.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteCost(1));
    }
    let mut next = vec![0.0; states];
    let mut back = vec![0u32; (n - 2) * states];

    for j in 2..n {
        let back_row = &mut back[(j - 2) * states..(j - 1) * states];
        for b in 0..l {
            for c in 0..l {
                let mut best = f64::INFINITY;
                let mut arg = 0;
                for a in 0..l {
                    let v = opt[a * l + b] + problem.ternary(j, a, b, c);
                    if v < best {
                        best = v;
                        arg = a;
                    }
                }
                next[b * l + c] = problem.unary(j, c) + problem.pairwise(j, b, c) + best;
                back_row[b * l + c] = arg as u32;
            }
        }
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteCost(j));
        }
        std::mem::swap(&mut opt, &mut next);
    }

    let last = first_min(&opt);
    let energy = opt[last];
    let mut labels = vec![0; n];
    labels[n - 2] = last / l;
    labels[n - 1] = last % l;
    for j in (2..n).rev() {
        let state = labels[j - 1] * l + labels[j];
        labels[j - 2] = back[(j - 2) * states + state] as usize;
    }
    Ok(ChainSolution { labels, energy })
}

/// Dispatches on [`ChainCosts::has_ternary`].
pub fn solve<C: ChainCosts + ?Sized>(problem: &C) -> Result<ChainSolution> {
    if problem.has_ternary() {
        solve_chain_ternary(problem)
    } else {
        solve_chain(problem)
    }
}

/// Direct evaluation of the chain energy, accumulating the terms of each
/// element in ascending order.
pub fn evaluate<C: ChainCosts + ?Sized>(problem: &C, labels: &[usize]) -> Result<f64> {
    let (n, l) = check_nonempty(problem)?;
    if labels.len() != n {
        return Err(Error::LabelingLength {
            expected: n,
            actual: labels.len(),
        });
    }
    if let Some((position, &label)) = labels.iter().enumerate().find(|(_, &x)| x >= l) {
        return Err(Error::LabelOutOfRange {
            position,
            label,
            labels: l,
        });
    }
    let ternary = problem.has_ternary();
    let mut total = 0.0;
    for j in 0..n {
        total += problem.unary(j, labels[j]);
        if j >= 1 {
            total += problem.pairwise(j, labels[j - 1], labels[j]);
        }
        if ternary && j >= 2 {
            total += problem.ternary(j, labels[j - 2], labels[j - 1], labels[j]);
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(unary: &[&[f64]], pairwise: impl Fn(usize, usize, usize) -> f64) -> ChainTable {
        let l = unary[0].len();
        ChainTable::from_fn(unary.len(), l, |j, x| unary[j][x], pairwise).unwrap()
    }

    #[test]
    fn single_element_takes_min_unary() {
        let p = table(&[&[3.0, 1.0, 2.0]], |_, _, _| 0.0);
        let s = solve_chain(&p).unwrap();
        assert_eq!(
            s,
            ChainSolution {
                labels: vec![1],
                energy: 1.0
            }
        );
        assert_eq!(evaluate(&p, &[2]).unwrap(), 2.0);
    }

    #[test]
    fn zero_costs_pick_label_zero() {
        let p = ChainTable::from_fn(4, 3, |_, _| 0.0, |_, _, _| 0.0).unwrap();
        let s = solve_chain(&p).unwrap();
        assert_eq!(s.labels, vec![0; 4]);
        assert_eq!(s.energy, 0.0);
        assert_eq!(evaluate(&p, &[2, 1, 0, 2]).unwrap(), 0.0);

        let t = ChainTable::from_fn(5, 2, |_, _| 0.0, |_, _, _| 0.0)
            .unwrap()
            .with_ternary_fn(|_, _, _, _| 0.0);
        let s = solve_chain_ternary(&t).unwrap();
        assert_eq!(s.energy, 0.0);
        assert_eq!(s.labels, vec![0; 5]);
    }

    #[test]
    fn small_instance_matches_hand_enumeration() {
        // unary [[0,1],[1,0],[0,1]], pairwise |a - b|: labelings
        // 000:1 001:3 010:2 011:2 100:3 101:5 110:2 111:2 (minimum 1 at 000)
        let p = table(&[&[0.0, 1.0], &[1.0, 0.0], &[0.0, 1.0]], |_, a, b| {
            (a as f64 - b as f64).abs()
        });
        let s = solve_chain(&p).unwrap();
        assert_eq!(s.energy, 1.0);
        assert_eq!(s.labels, vec![0, 0, 0]);
    }

    #[test]
    fn ternary_with_two_elements_equals_pairwise() {
        let p = table(&[&[0.3, 0.1, 0.2], &[0.5, 0.5, 0.0]], |_, a, b| {
            0.1 * (a * b) as f64
        });
        let t = p.clone().with_ternary_fn(|_, _, _, _| 7.0);
        assert!(t.has_ternary());
        assert_eq!(solve_chain_ternary(&t).unwrap(), solve_chain(&p).unwrap());
    }

    #[test]
    fn ternary_terms_change_the_optimum() {
        // Without the ternary term all-zero is optimal; penalizing (0, 0, 0)
        // makes flipping the cheapest element (the first) the unique optimum.
        let p = ChainTable::from_fn(3, 2, |j, x| x as f64 * 0.1 * (j + 1) as f64, |_, _, _| 0.0)
            .unwrap();
        assert_eq!(solve_chain(&p).unwrap().labels, vec![0, 0, 0]);
        let t = p
            .clone()
            .with_ternary_fn(|_, a, b, c| if a + b + c == 0 { 1.0 } else { 0.0 });
        let s = solve_chain_ternary(&t).unwrap();
        assert_eq!(s.labels, vec![1, 0, 0]);
        assert!((s.energy - 0.1).abs() < 1e-15);
        assert!((evaluate(&t, &s.labels).unwrap() - s.energy).abs() < 1e-15);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            ChainTable::from_fn(0, 3, |_, _| 0.0, |_, _, _| 0.0),
            Err(Error::EmptyProblem)
        ));
        let p = ChainTable::from_fn(2, 2, |_, _| 0.0, |_, _, _| 0.0).unwrap();
        assert!(matches!(
            evaluate(&p, &[0, 2]),
            Err(Error::LabelOutOfRange { position: 1, .. })
        ));
        assert!(matches!(
            evaluate(&p, &[0]),
            Err(Error::LabelingLength { .. })
        ));
        let t = p.clone().with_ternary_fn(|_, _, _, _| 0.0);
        assert!(matches!(solve_chain(&t), Err(Error::UnexpectedTernary)));
        assert!(solve(&t).is_ok());

        let nan = ChainTable::from_fn(
            3,
            2,
            |_, _| 0.0,
            |j, _, _| if j == 2 { f64::NAN } else { 0.0 },
        )
        .unwrap();
        assert!(matches!(solve_chain(&nan), Err(Error::NonFiniteCost(2))));
    }

    #[test]
    fn tabulate_matches_source() {
        let t = ChainTable::from_fn(
            4,
            3,
            |j, x| (j * 3 + x) as f64,
            |j, a, b| (j + 2 * a + 5 * b) as f64,
        )
        .unwrap()
        .with_ternary_fn(|j, a, b, c| (j * a + b * c) as f64);
        assert_eq!(ChainTable::tabulate(&t).unwrap(), t);
        assert_eq!(ChainTable::footprint(4, 3, true), (12 + 27 + 54) * 8);
    }
}
