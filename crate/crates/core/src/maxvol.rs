//! Rank-1 maxvol: alternating argmax over columns and rows.
//!
//! Three stopping rules are provided:
//!
//! * [`maxvol_rank1`] runs until the current element is maximal in modulus in
//!   both its row and its column (or a step cap is hit);
//! * [`maxvol_fixed_steps`] stops after a fixed number of steps and returns
//!   whatever element it holds;
//! * [`maxvol_max_among_viewed`] keeps searching (restarting from the largest
//!   viewed element not yet used as a pivot) until at least `k` steps have been
//!   made, then returns the largest element it has seen.
//!
//! A *step* is an argmax scan that lands on a new pivot. The initial column
//! scan always counts as step 1; a final scan that confirms convergence does
//! not. All argmax ties go to the smallest index.

use crate::bounds::mu_thresholds;
use crate::error::{Error, Result};
use crate::matrix::{max_modulus, DenseMatrix};
use crate::model::RankOneModel;
use crate::scalar::Scalar;

/// A matrix element selected by the search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pivot<T> {
    pub row: usize,
    pub col: usize,
    pub value: T,
    pub abs_value: f64,
}

impl<T: Scalar> Pivot<T> {
    pub fn at(a: &DenseMatrix<T>, row: usize, col: usize) -> Self {
        let value = a.get(row, col);
        Pivot {
            row,
            col,
            value,
            abs_value: value.modulus(),
        }
    }
}

/// How the start column was chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StartPolicy {
    /// Supplied directly by the caller.
    Given,
    /// Uniformly random column.
    RandomColumn,
    /// Random column resampled until it passes a "good column" test.
    VerifiedGood,
    /// Column of the largest element among `k` scanned columns.
    ScanK(usize),
}

/// Which kind of line a scan runs along.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Column,
    Row,
}

impl Axis {
    fn flip(self) -> Self {
        match self {
            Axis::Column => Axis::Row,
            Axis::Row => Axis::Column,
        }
    }
}

/// Full record of one search.
#[derive(Debug, Clone, PartialEq)]
pub struct PivotTrace<T> {
    /// Elements held by the search, in order. Moduli strictly increase within
    /// each segment; a new segment starts at every index in `restarts`.
    pub visited: Vec<Pivot<T>>,
    /// Indices into `visited` where a restart element was taken up.
    pub restarts: Vec<usize>,
    /// Number of argmax scans that produced a pivot.
    pub steps: usize,
    /// The returned element is maximal in modulus in its row and its column.
    pub converged: bool,
    /// The returned element is zero.
    pub degenerate: bool,
    pub start_col: usize,
    pub start_policy: StartPolicy,
    /// Matrix entries read by argmax scans (`m` per column, `n` per row).
    pub elements_examined: usize,
    /// The element returned by the search.
    pub pivot: Pivot<T>,
}

impl<T> PivotTrace<T> {
    pub fn with_start_policy(mut self, policy: StartPolicy) -> Self {
        self.start_policy = policy;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Converged,
    Capped,
}

const UNSEEN: u8 = 0;
const SEEN_IN_COLUMN: u8 = 1;
const SEEN_IN_ROW: u8 = 2;

struct Search<'a, T> {
    a: &'a DenseMatrix<T>,
    visited: Vec<Pivot<T>>,
    restarts: Vec<usize>,
    steps: usize,
    examined: usize,
    // Per-entry bookkeeping, only kept by the max-among-viewed variant.
    seen: Option<Vec<u8>>,
    used: Option<Vec<bool>>,
}

impl<'a, T: Scalar> Search<'a, T> {
    fn new(a: &'a DenseMatrix<T>, track_viewed: bool) -> Self {
        let size = a.rows() * a.cols();
        Search {
            a,
            visited: Vec::new(),
            restarts: Vec::new(),
            steps: 0,
            examined: 0,
            seen: track_viewed.then(|| vec![UNSEEN; size]),
            used: track_viewed.then(|| vec![false; size]),
        }
    }

    fn current(&self) -> (usize, usize) {
        let p = self.visited.last().expect("search has a pivot");
        (p.row, p.col)
    }

    fn push(&mut self, row: usize, col: usize) {
        if let Some(used) = &mut self.used {
            used[row * self.a.cols() + col] = true;
        }
        self.visited.push(Pivot::at(self.a, row, col));
    }

    /// Argmax along `axis` through `(row, col)`; returns the position found.
    fn scan(&mut self, axis: Axis, row: usize, col: usize) -> (usize, usize) {
        let n = self.a.cols();
        match axis {
            Axis::Column => {
                self.examined += self.a.rows();
                if let Some(seen) = &mut self.seen {
                    for i in 0..self.a.rows() {
                        let s = &mut seen[i * n + col];
                        if *s == UNSEEN {
                            *s = SEEN_IN_COLUMN;
                        }
                    }
                }
                (self.a.column_argmax(col), col)
            }
            Axis::Row => {
                self.examined += n;
                if let Some(seen) = &mut self.seen {
                    for s in &mut seen[row * n..(row + 1) * n] {
                        if *s == UNSEEN {
                            *s = SEEN_IN_ROW;
                        }
                    }
                }
                (row, self.a.row_argmax(row))
            }
        }
    }

    fn start(&mut self, start_col: usize) {
        let (i, j) = self.scan(Axis::Column, 0, start_col);
        self.steps = 1;
        self.push(i, j);
    }

    /// Alternating ascent from the current element. `known` is the axis along
    /// which the current element is already known to be maximal.
    fn ascend(&mut self, mut known: Option<Axis>, mut axis: Axis, cap: Option<usize>) -> Outcome {
        loop {
            if cap.is_some_and(|c| self.steps >= c) {
                return Outcome::Capped;
            }
            let (i, j) = self.current();
            let cur_abs = self.a.get(i, j).modulus();
            let (ni, nj) = self.scan(axis, i, j);
            if self.a.get(ni, nj).modulus() > cur_abs {
                self.steps += 1;
                self.push(ni, nj);
                known = Some(axis);
            } else if known.is_some_and(|k| k != axis) {
                return Outcome::Converged;
            } else {
                known = Some(axis);
            }
            axis = axis.flip();
        }
    }

    /// Largest viewed entry not yet used as a pivot, with the axis it was
    /// first seen along.
    fn best_unused(&self) -> Option<(usize, usize, Axis)> {
        let (seen, used) = (self.seen.as_ref()?, self.used.as_ref()?);
        let n = self.a.cols();
        let mut best: Option<(usize, f64)> = None;
        for (idx, (&s, &u)) in seen.iter().zip(used).enumerate() {
            if s == UNSEEN || u {
                continue;
            }
            let v = self.a.as_slice()[idx].modulus();
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((idx, v));
            }
        }
        best.map(|(idx, _)| {
            let axis = if seen[idx] == SEEN_IN_COLUMN {
                Axis::Column
            } else {
                Axis::Row
            };
            (idx / n, idx % n, axis)
        })
    }

    /// Largest viewed entry overall. Ties go to the earliest visited pivot,
    /// then to the smallest row-major index, so a search that needed no
    /// restart returns its own final pivot.
    fn best_viewed(&self) -> Pivot<T> {
        let seen = self.seen.as_ref().expect("viewed set is tracked");
        let n = self.a.cols();
        let mut best: Option<(usize, f64)> = None;
        for (idx, &s) in seen.iter().enumerate() {
            if s == UNSEEN {
                continue;
            }
            let v = self.a.as_slice()[idx].modulus();
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((idx, v));
            }
        }
        let (idx, top) = best.expect("at least one scan happened");
        self.visited
            .iter()
            .find(|p| p.abs_value == top)
            .copied()
            .unwrap_or_else(|| Pivot::at(self.a, idx / n, idx % n))
    }

    fn finish(self, start_col: usize, pivot: Pivot<T>, converged: bool) -> PivotTrace<T> {
        let degenerate = pivot.abs_value == 0.0;
        PivotTrace {
            visited: self.visited,
            restarts: self.restarts,
            steps: self.steps,
            converged: converged && !degenerate,
            degenerate,
            start_col,
            start_policy: StartPolicy::Given,
            elements_examined: self.examined,
            pivot,
        }
    }
}

/// `true` when `a[row, col]` is maximal in modulus over its row and its column.
pub fn is_cross_maximal<T: Scalar>(a: &DenseMatrix<T>, row: usize, col: usize) -> bool {
    let x = a.get(row, col).modulus();
    a.row(row).iter().all(|y| y.modulus() <= x) && (0..a.rows()).all(|i| a.get(i, col).modulus() <= x)
}

/// Default step cap for [`maxvol`]: `m + n`.
pub fn default_max_steps<T: Scalar>(a: &DenseMatrix<T>) -> usize {
    a.rows() + a.cols()
}

/// Rank-1 maxvol from `start_col` with the default step cap `m + n`.
pub fn maxvol<T: Scalar>(a: &DenseMatrix<T>, start_col: usize) -> Result<PivotTrace<T>> {
    maxvol_rank1(a, start_col, Some(default_max_steps(a)))
}

/// Rank-1 maxvol: argmax of column `start_col`, then of that element's row,
/// and so on until the element is maximal in both (or `max_steps` steps have
/// been made; `None` means no cap).
pub fn maxvol_rank1<T: Scalar>(
    a: &DenseMatrix<T>,
    start_col: usize,
    max_steps: Option<usize>,
) -> Result<PivotTrace<T>> {
    a.check_col(start_col)?;
    if max_steps == Some(0) {
        return Err(Error::param("max_steps", "must be at least 1"));
    }
    let mut search = Search::new(a, false);
    search.start(start_col);
    let outcome = search.ascend(Some(Axis::Column), Axis::Row, max_steps);
    let last = *search.visited.last().expect("started");
    let converged = match outcome {
        Outcome::Converged => true,
        Outcome::Capped => is_cross_maximal(a, last.row, last.col),
    };
    Ok(search.finish(start_col, last, converged))
}

/// Runs at most `steps` steps and returns the last element reached, whether
/// or not it is maximal in its row and column.
pub fn maxvol_fixed_steps<T: Scalar>(
    a: &DenseMatrix<T>,
    start_col: usize,
    steps: usize,
) -> Result<PivotTrace<T>> {
    if steps == 0 {
        return Err(Error::param("steps", "must be at least 1"));
    }
    maxvol_rank1(a, start_col, Some(steps))
}

/// Searches until at least `k` steps have been made, restarting from the
/// largest viewed element not yet used as a pivot whenever the search
/// converges early, and returns the largest element viewed.
///
/// Stops early only when every viewed element has been used as a pivot.
pub fn maxvol_max_among_viewed<T: Scalar>(
    a: &DenseMatrix<T>,
    start_col: usize,
    k: usize,
) -> Result<PivotTrace<T>> {
    a.check_col(start_col)?;
    if k == 0 {
        return Err(Error::param("k", "must be at least 1"));
    }
    let mut search = Search::new(a, true);
    search.start(start_col);
    search.ascend(Some(Axis::Column), Axis::Row, None);
    while search.steps < k {
        let Some((i, j, seen_along)) = search.best_unused() else {
            break;
        };
        search.restarts.push(search.visited.len());
        search.push(i, j);
        search.ascend(None, seen_along.flip(), None);
    }
    let best = search.best_viewed();
    let converged = is_cross_maximal(a, best.row, best.col);
    Ok(search.finish(start_col, best, converged))
}

/// Column of the largest-modulus element among columns `0..k`.
pub fn scan_start_column<T: Scalar>(a: &DenseMatrix<T>, k: usize) -> Result<usize> {
    if k == 0 || k > a.cols() {
        return Err(Error::param(
            "k",
            format!("must lie in 1..={}, got {k}", a.cols()),
        ));
    }
    let cols: Vec<usize> = (0..k).collect();
    scan_start_column_among(a, &cols)
}

/// Column of the largest-modulus element among the listed columns; the
/// earliest listed column wins ties.
pub fn scan_start_column_among<T: Scalar>(a: &DenseMatrix<T>, cols: &[usize]) -> Result<usize> {
    let (&first, rest) = cols
        .split_first()
        .ok_or_else(|| Error::param("cols", "at least one column is required"))?;
    a.check_col(first)?;
    let mut best_col = first;
    let mut best_abs = a.get(a.column_argmax(first), first).modulus();
    for &j in rest {
        a.check_col(j)?;
        let v = a.get(a.column_argmax(j), j).modulus();
        if v > best_abs {
            best_abs = v;
            best_col = j;
        }
    }
    Ok(best_col)
}

fn check_pivot<T: Scalar>(a: &DenseMatrix<T>, pivot: &Pivot<T>) -> Result<()> {
    a.check_row(pivot.row)?;
    a.check_col(pivot.col)?;
    if pivot.value.modulus() == 0.0 {
        return Err(Error::DegeneratePivot {
            row: pivot.row,
            col: pivot.col,
        });
    }
    Ok(())
}

/// Residual `A - c a^{-1} r` of the rank-1 cross through `pivot`, and its C-norm.
///
/// The pivot row and column of the residual are set to exact zeros.
pub fn cross_residual<T: Scalar>(a: &DenseMatrix<T>, pivot: &Pivot<T>) -> Result<(DenseMatrix<T>, f64)> {
    check_pivot(a, pivot)?;
    let (p, q) = (pivot.row, pivot.col);
    let pivot_row = a.row(p).to_vec();
    let mut out = DenseMatrix::zeros(a.rows(), a.cols())?;
    let mut norm = 0.0_f64;
    for i in 0..a.rows() {
        if i == p {
            continue;
        }
        let factor = a.get(i, q) / pivot.value;
        for (j, (&aij, &apj)) in a.row(i).iter().zip(&pivot_row).enumerate() {
            if j == q {
                continue;
            }
            let r = aij - factor * apj;
            norm = norm.max(r.modulus());
            out.set(i, j, r);
        }
    }
    Ok((out, norm))
}

/// C-norm of the cross residual, without materializing it.
pub fn cross_residual_norm<T: Scalar>(a: &DenseMatrix<T>, pivot: &Pivot<T>) -> Result<f64> {
    check_pivot(a, pivot)?;
    let (p, q) = (pivot.row, pivot.col);
    let pivot_row = a.row(p);
    let mut norm = 0.0_f64;
    for i in (0..a.rows()).filter(|&i| i != p) {
        let factor = a.get(i, q) / pivot.value;
        for (j, (&aij, &apj)) in a.row(i).iter().zip(pivot_row).enumerate() {
            if j != q {
                norm = norm.max((aij - factor * apj).modulus());
            }
        }
    }
    Ok(norm)
}

/// Good/bad labels of a finished search against the generating model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityLabels {
    /// `|u_i| / ||u||_inf` at the returned row.
    pub mu_u: f64,
    /// `|v_j| / ||v||_inf` at the returned column.
    pub mu_v: f64,
    /// Threshold `mu1` the labels were computed against.
    pub mu1: f64,
    pub start_col_good: bool,
    pub final_col_good: bool,
    pub final_row_good: bool,
}

/// A column `j` is good when `|v_j| > mu1 ||v||_inf`, a row `i` when
/// `|u_i| > mu1 ||u||_inf` (strict in both cases).
pub fn label_quality<T: Scalar>(model: &RankOneModel<T>, trace: &PivotTrace<T>) -> Result<QualityLabels> {
    let (mu1, _) = mu_thresholds(model.epsilon())?;
    let (u_inf, v_inf) = (max_modulus(model.u()), max_modulus(model.v()));
    let mu_u = model.u()[trace.pivot.row].modulus() / u_inf;
    let mu_v = model.v()[trace.pivot.col].modulus() / v_inf;
    let good_col = |j: usize| model.v()[j].modulus() > mu1 * v_inf;
    Ok(QualityLabels {
        mu_u,
        mu_v,
        mu1,
        start_col_good: good_col(trace.start_col),
        final_col_good: good_col(trace.pivot.col),
        final_row_good: model.u()[trace.pivot.row].modulus() > mu1 * u_inf,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hand() -> DenseMatrix<f64> {
        DenseMatrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0], vec![7.0, 8.0, 10.0]]).unwrap()
    }

    #[test]
    fn hand_matrix_from_first_column() {
        let t = maxvol(&hand(), 0).unwrap();
        let path: Vec<_> = t.visited.iter().map(|p| (p.row, p.col, p.value)).collect();
        assert_eq!(path, vec![(2, 0, 7.0), (2, 2, 10.0)]);
        assert!(t.converged);
        assert_eq!(t.steps, 2);
        // column 0, row 2, confirming column 2
        assert_eq!(t.elements_examined, 9);
    }

    #[test]
    fn fixed_one_step_is_not_converged() {
        let t = maxvol_fixed_steps(&hand(), 1, 1).unwrap();
        assert_eq!((t.pivot.row, t.pivot.col, t.pivot.value), (2, 1, 8.0));
        assert!(!t.converged);
        assert_eq!(t.steps, 1);
    }

    #[test]
    fn one_by_one() {
        let a = DenseMatrix::from_vec(1, 1, vec![-3.0]).unwrap();
        let t = maxvol(&a, 0).unwrap();
        assert!(t.converged);
        assert_eq!(t.steps, 1);
        assert_eq!((t.pivot.row, t.pivot.col), (0, 0));
    }

    #[test]
    fn out_of_range_start_column() {
        assert!(matches!(maxvol(&hand(), 3), Err(Error::IndexOutOfRange { .. })));
        assert!(maxvol_max_among_viewed(&hand(), 5, 2).is_err());
        assert!(maxvol_fixed_steps(&hand(), 0, 0).is_err());
    }

    #[test]
    fn zero_column_and_row_is_degenerate() {
        let a = DenseMatrix::from_rows(&[vec![0.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let t = maxvol(&a, 0).unwrap();
        assert!(t.degenerate);
        assert!(!t.converged);
        assert_eq!(t.pivot.value, 0.0);
        assert!(matches!(
            cross_residual(&a, &t.pivot),
            Err(Error::DegeneratePivot { .. })
        ));
    }

    #[test]
    fn zero_column_with_nonzero_row_recovers() {
        let a = DenseMatrix::from_rows(&[vec![0.0, 2.0], vec![0.0, 1.0]]).unwrap();
        let t = maxvol(&a, 0).unwrap();
        assert!(!t.degenerate);
        assert_eq!((t.pivot.row, t.pivot.col), (0, 1));
    }

    #[test]
    fn scan_start_examples() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 5.0], vec![3.0, 2.0]]).unwrap();
        assert_eq!(scan_start_column(&a, 2).unwrap(), 1);
        assert_eq!(scan_start_column(&a, 1).unwrap(), 0);
        assert!(scan_start_column(&a, 0).is_err());
        assert!(scan_start_column(&a, 3).is_err());
        assert_eq!(scan_start_column(&hand(), 3).unwrap(), 2);
    }

    #[test]
    fn residual_two_by_two() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let (r, norm) = cross_residual(&a, &Pivot::at(&a, 0, 0)).unwrap();
        assert_eq!(r.as_slice(), &[0.0, 0.0, 0.0, -2.0]);
        assert_eq!(norm, 2.0);
        assert_eq!(cross_residual_norm(&a, &Pivot::at(&a, 0, 0)).unwrap(), 2.0);
    }

    #[test]
    fn restart_after_early_convergence() {
        // Column 0 leads to 5 at (0,0), which is maximal in its row and column;
        // the larger 9 sits away from it.
        let a = DenseMatrix::from_rows(&[
            vec![5.0, 4.0, 0.0],
            vec![1.0, 0.0, 9.0],
            vec![3.0, 0.0, 2.0],
        ])
        .unwrap();
        let plain = maxvol(&a, 0).unwrap();
        assert_eq!((plain.pivot.row, plain.pivot.col), (0, 0));
        assert!(plain.converged);

        let t = maxvol_max_among_viewed(&a, 0, 4).unwrap();
        assert!(!t.restarts.is_empty());
        assert!(t.steps >= 4 || t.restarts.len() > 1);
        assert!(t.pivot.abs_value >= plain.pivot.abs_value);
        assert_eq!((t.pivot.row, t.pivot.col), (1, 2));
    }

    #[test]
    fn max_among_viewed_with_k1_matches_plain_search() {
        let t = maxvol_max_among_viewed(&hand(), 0, 1).unwrap();
        let plain = maxvol(&hand(), 0).unwrap();
        assert_eq!(t.pivot, plain.pivot);
        assert!(t.restarts.is_empty());
    }
}
