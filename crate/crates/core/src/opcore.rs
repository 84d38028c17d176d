//! Symbolic operator expressions with exact sparse row/column evaluation.
//!
//! Every variant has finitely supported rows and columns, so entries of
//! products are finite contractions and truncations are exact: no entry of a
//! [`DenseBlock`] produced by [`OperatorExpr::truncate`] depends on the
//! window size.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arrangement::{BilateralArrangement, Slot, SplitArrangement};
use crate::error::{Error, Result};
use crate::seqcore::{ScalarSeq, SeqDomain};

pub type C64 = Complex64;

/// Sparse vector as sorted `(index, value)` pairs.
pub type Sparse = Vec<(i64, C64)>;

pub const DEFAULT_MAX_WINDOW: usize = 4096;

/// Basis layout a shift-down unitary acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftLayout {
    /// ℤ-indexed basis, `U e_p = e_{p+1}`.
    Bilateral,
    /// ℕ-indexed basis carrying ℤ through [`BilateralArrangement`].
    Interleaved,
    /// ℕ-indexed basis in the [`SplitArrangement`]; shifts the bilateral
    /// part and fixes the diagonal slots.
    Split,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "arrangement", rename_all = "snake_case")]
pub enum Arrangement {
    /// ℤ → ℕ, `e_p ↦ e_{arr(p)}`.
    Bilateral,
    /// Permutation of ℕ moving only `0..images.len()`: `e_i ↦ e_{images[i]}`.
    Finite { images: Vec<i64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatchEntry {
    pub row: i64,
    pub col: i64,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum OperatorExpr {
    Diagonal {
        seq: ScalarSeq,
    },
    /// `T e_n = ω_n e_{n+1}`
    WeightedShift {
        weights: ScalarSeq,
        domain: SeqDomain,
    },
    ShiftDownUnitary {
        layout: ShiftLayout,
    },
    Permutation {
        #[serde(flatten)]
        arrangement: Arrangement,
    },
    Sum {
        terms: Vec<OperatorExpr>,
    },
    /// `Product([A, B, C]) = A·B·C`, applied right to left.
    Product {
        factors: Vec<OperatorExpr>,
    },
    Scaled {
        re: f64,
        #[serde(default)]
        im: f64,
        expr: Box<OperatorExpr>,
    },
    Adjoint {
        expr: Box<OperatorExpr>,
    },
    /// `base` plus finitely many additive entries.
    FiniteRankPatch {
        base: Box<OperatorExpr>,
        entries: Vec<PatchEntry>,
    },
}

/// Inclusive index window `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationWindow {
    pub lo: i64,
    pub hi: i64,
}

impl TruncationWindow {
    pub fn new(lo: i64, hi: i64) -> Result<Self> {
        if lo > hi {
            return Err(Error::InvalidWindow(format!("lo {lo} > hi {hi}")));
        }
        Ok(TruncationWindow { lo, hi })
    }

    /// `[-r, r]`
    pub fn symmetric(r: i64) -> Self {
        TruncationWindow { lo: -r, hi: r }
    }

    /// `[0, n-1]`
    pub fn prefix(n: usize) -> Self {
        TruncationWindow {
            lo: 0,
            hi: n as i64 - 1,
        }
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, i: i64) -> bool {
        self.lo <= i && i <= self.hi
    }

    pub fn indices(&self) -> std::ops::RangeInclusive<i64> {
        self.lo..=self.hi
    }

    pub fn shrink(&self, by: usize) -> Option<Self> {
        let lo = self.lo + by as i64;
        let hi = self.hi - by as i64;
        (lo <= hi).then_some(TruncationWindow { lo, hi })
    }

    pub fn expand(&self, by: usize) -> Self {
        TruncationWindow {
            lo: self.lo - by as i64,
            hi: self.hi + by as i64,
        }
    }

    /// Clip to the domain (ℕ windows start at 0).
    pub fn clip(&self, domain: SeqDomain) -> Self {
        match domain {
            SeqDomain::Bilateral => *self,
            SeqDomain::Unilateral => TruncationWindow {
                lo: self.lo.max(0),
                hi: self.hi.max(0),
            },
        }
    }

    pub(crate) fn check(&self, domain: SeqDomain, max: usize) -> Result<()> {
        if self.lo > self.hi {
            return Err(Error::InvalidWindow(format!("lo {} > hi {}", self.lo, self.hi)));
        }
        if domain == SeqDomain::Unilateral && self.lo < 0 {
            return Err(Error::InvalidWindow(format!(
                "window [{}, {}] leaves the unilateral domain",
                self.lo, self.hi
            )));
        }
        let size = (self.hi as i128 - self.lo as i128 + 1) as u128;
        if size > max as u128 {
            return Err(Error::WindowTooLarge {
                lo: self.lo,
                hi: self.hi,
                size: size.min(usize::MAX as u128) as usize,
                max,
            });
        }
        Ok(())
    }
}

impl std::str::FromStr for TruncationWindow {
    type Err = Error;

    /// Parses `LO:HI`.
    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidWindow(format!("expected LO:HI, got {s:?}")))?;
        let parse = |t: &str| {
            t.trim()
                .parse::<i64>()
                .map_err(|e| Error::InvalidWindow(format!("{t:?}: {e}")))
        };
        TruncationWindow::new(parse(a)?, parse(b)?)
    }
}

/// Finite labeled matrix cut out of an operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseBlock {
    pub row_labels: Vec<i64>,
    pub col_labels: Vec<i64>,
    pub data: DMatrix<C64>,
    /// Every entry equals the corresponding entry of the infinite operator.
    pub exact: bool,
    /// Bound on the contribution of discarded column tails, when not exact.
    pub tail_bound: Option<f64>,
}

#[derive(Serialize)]
struct DenseBlockJson<'a> {
    row_labels: &'a [i64],
    col_labels: &'a [i64],
    exact: bool,
    tail_bound: Option<f64>,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl DenseBlock {
    pub fn nrows(&self) -> usize {
        self.data.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.data.ncols()
    }

    pub fn entry(&self, row: i64, col: i64) -> Option<C64> {
        let r = self.row_labels.iter().position(|&x| x == row)?;
        let c = self.col_labels.iter().position(|&x| x == col)?;
        Some(self.data[(r, c)])
    }

    /// CSV with header `row,col,re,im`, one line per entry in row-major order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("row,col,re,im\n");
        for (r, &rl) in self.row_labels.iter().enumerate() {
            for (c, &cl) in self.col_labels.iter().enumerate() {
                let z = self.data[(r, c)];
                let _ = writeln!(out, "{rl},{cl},{},{}", z.re, z.im);
            }
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let (n, m) = self.data.shape();
        let grid = |f: fn(&C64) -> f64| -> Vec<Vec<f64>> {
            (0..n).map(|r| (0..m).map(|c| f(&self.data[(r, c)])).collect()).collect()
        };
        serde_json::to_value(DenseBlockJson {
            row_labels: &self.row_labels,
            col_labels: &self.col_labels,
            exact: self.exact,
            tail_bound: self.tail_bound,
            re: grid(|z| z.re),
            im: grid(|z| z.im),
        })
        .expect("plain data serializes")
    }

    pub fn norm(&self) -> f64 {
        operator_norm(&self.data)
    }
}

/// Dense vector labeled by a contiguous window.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledVector {
    pub window: TruncationWindow,
    pub values: DVector<C64>,
}

impl LabeledVector {
    pub fn zeros(window: TruncationWindow) -> Self {
        LabeledVector {
            window,
            values: DVector::zeros(window.len()),
        }
    }

    pub fn basis(window: TruncationWindow, index: i64) -> Self {
        let mut v = Self::zeros(window);
        v.set(index, C64::new(1.0, 0.0));
        v
    }

    pub fn get(&self, index: i64) -> C64 {
        if self.window.contains(index) {
            self.values[(index - self.window.lo) as usize]
        } else {
            C64::new(0.0, 0.0)
        }
    }

    pub fn set(&mut self, index: i64, value: C64) {
        assert!(self.window.contains(index), "index {index} outside window");
        self.values[(index - self.window.lo) as usize] = value;
    }

    pub fn support(&self) -> impl Iterator<Item = i64> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, z)| **z != C64::new(0.0, 0.0))
            .map(move |(k, _)| self.window.lo + k as i64)
    }

    pub fn norm(&self) -> f64 {
        self.values.norm()
    }
}

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn accumulate(items: impl IntoIterator<Item = (i64, C64)>) -> Sparse {
    let mut map: BTreeMap<i64, C64> = BTreeMap::new();
    for (i, v) in items {
        *map.entry(i).or_insert(C64::new(0.0, 0.0)) += v;
    }
    map.into_iter().collect()
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidExpression(msg.into())
}

/// Convenience constructors.
impl OperatorExpr {
    pub fn diagonal(seq: ScalarSeq) -> Self {
        OperatorExpr::Diagonal { seq }
    }

    pub fn identity(domain: SeqDomain) -> Self {
        let seq = match domain {
            SeqDomain::Bilateral => ScalarSeq::constant_bilateral(1.0),
            SeqDomain::Unilateral => ScalarSeq::constant(1.0),
        };
        OperatorExpr::Diagonal { seq }
    }

    pub fn weighted_shift(weights: ScalarSeq) -> Self {
        let domain = weights.domain();
        OperatorExpr::WeightedShift { weights, domain }
    }

    pub fn shift_down(layout: ShiftLayout) -> Self {
        OperatorExpr::ShiftDownUnitary { layout }
    }

    pub fn permutation(arrangement: Arrangement) -> Self {
        OperatorExpr::Permutation { arrangement }
    }

    pub fn sum(terms: Vec<OperatorExpr>) -> Self {
        OperatorExpr::Sum { terms }
    }

    pub fn product(factors: Vec<OperatorExpr>) -> Self {
        OperatorExpr::Product { factors }
    }

    pub fn scaled(c: C64, expr: OperatorExpr) -> Self {
        OperatorExpr::Scaled {
            re: c.re,
            im: c.im,
            expr: Box::new(expr),
        }
    }

    pub fn adjoint(expr: OperatorExpr) -> Self {
        OperatorExpr::Adjoint { expr: Box::new(expr) }
    }

    pub fn patch(base: OperatorExpr, entries: Vec<(i64, i64, C64)>) -> Self {
        OperatorExpr::FiniteRankPatch {
            base: Box::new(base),
            entries: entries
                .into_iter()
                .map(|(row, col, z)| PatchEntry {
                    row,
                    col,
                    re: z.re,
                    im: z.im,
                })
                .collect(),
        }
    }
}

impl OperatorExpr {
    /// Domain of the row index (codomain basis).
    pub fn row_domain(&self) -> SeqDomain {
        match self {
            OperatorExpr::Diagonal { seq } => seq.domain(),
            OperatorExpr::WeightedShift { domain, .. } => *domain,
            OperatorExpr::ShiftDownUnitary { layout } => match layout {
                ShiftLayout::Bilateral => SeqDomain::Bilateral,
                _ => SeqDomain::Unilateral,
            },
            OperatorExpr::Permutation { .. } => SeqDomain::Unilateral,
            OperatorExpr::Sum { terms } => terms[0].row_domain(),
            OperatorExpr::Product { factors } => factors[0].row_domain(),
            OperatorExpr::Scaled { expr, .. } => expr.row_domain(),
            OperatorExpr::Adjoint { expr } => expr.col_domain(),
            OperatorExpr::FiniteRankPatch { base, .. } => base.row_domain(),
        }
    }

    /// Domain of the column index (domain basis).
    pub fn col_domain(&self) -> SeqDomain {
        match self {
            OperatorExpr::Permutation { arrangement } => match arrangement {
                Arrangement::Bilateral => SeqDomain::Bilateral,
                Arrangement::Finite { .. } => SeqDomain::Unilateral,
            },
            OperatorExpr::Sum { terms } => terms[0].col_domain(),
            OperatorExpr::Product { factors } => factors.last().unwrap().col_domain(),
            OperatorExpr::Scaled { expr, .. } => expr.col_domain(),
            OperatorExpr::Adjoint { expr } => expr.row_domain(),
            OperatorExpr::FiniteRankPatch { base, .. } => base.col_domain(),
            _ => self.row_domain(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            OperatorExpr::Diagonal { seq } => {
                if !seq.contains(0) {
                    return Err(invalid("diagonal over ℕ needs a sequence defined from 0"));
                }
            }
            OperatorExpr::WeightedShift { weights, domain } => {
                if weights.domain() != *domain {
                    return Err(invalid("weighted shift domain differs from its weight sequence"));
                }
                if !weights.contains(0) {
                    return Err(invalid("unilateral shift weights must be defined from 0"));
                }
            }
            OperatorExpr::ShiftDownUnitary { .. } => {}
            OperatorExpr::Permutation { arrangement } => {
                if let Arrangement::Finite { images } = arrangement {
                    let mut seen = vec![false; images.len()];
                    for &x in images {
                        if x < 0 || x as usize >= images.len() || seen[x as usize] {
                            return Err(invalid("finite permutation images must permute 0..len"));
                        }
                        seen[x as usize] = true;
                    }
                }
            }
            OperatorExpr::Sum { terms } => {
                let first = terms.first().ok_or_else(|| invalid("empty sum"))?;
                first.validate()?;
                for t in &terms[1..] {
                    t.validate()?;
                    if t.row_domain() != first.row_domain() || t.col_domain() != first.col_domain() {
                        return Err(invalid("sum terms act between different domains"));
                    }
                }
            }
            OperatorExpr::Product { factors } => {
                if factors.is_empty() {
                    return Err(invalid("empty product"));
                }
                for f in factors {
                    f.validate()?;
                }
                for pair in factors.windows(2) {
                    if pair[0].col_domain() != pair[1].row_domain() {
                        return Err(invalid("product factors have incompatible domains"));
                    }
                }
            }
            OperatorExpr::Scaled { re, im, expr } => {
                if !re.is_finite() || !im.is_finite() {
                    return Err(invalid("non-finite scale factor"));
                }
                expr.validate()?;
            }
            OperatorExpr::Adjoint { expr } => expr.validate()?,
            OperatorExpr::FiniteRankPatch { base, entries } => {
                base.validate()?;
                for e in entries {
                    let bad_row = base.row_domain() == SeqDomain::Unilateral && e.row < 0;
                    let bad_col = base.col_domain() == SeqDomain::Unilateral && e.col < 0;
                    if bad_row || bad_col || !e.re.is_finite() || !e.im.is_finite() {
                        return Err(invalid(format!("patch entry ({}, {}) is invalid", e.row, e.col)));
                    }
                }
            }
        }
        Ok(())
    }

    /// Structural bandwidth `max |i - j|` over nonzero entries, when finite.
    pub fn bandwidth(&self) -> Option<usize> {
        self.band().map(|(lower, upper)| lower.max(upper))
    }

    /// `(lower, upper)`: entries vanish unless `-upper <= i - j <= lower`.
    pub fn band(&self) -> Option<(usize, usize)> {
        match self {
            OperatorExpr::Diagonal { .. } => Some((0, 0)),
            OperatorExpr::WeightedShift { .. } => Some((1, 0)),
            OperatorExpr::ShiftDownUnitary { layout } => Some(match layout {
                ShiftLayout::Bilateral => (1, 0),
                ShiftLayout::Interleaved => (2, 2),
                ShiftLayout::Split => (4, 2),
            }),
            OperatorExpr::Permutation { arrangement } => match arrangement {
                Arrangement::Bilateral => None,
                Arrangement::Finite { images } => {
                    let mut lower = 0usize;
                    let mut upper = 0usize;
                    for (j, &i) in images.iter().enumerate() {
                        let d = i - j as i64;
                        if d > 0 {
                            lower = lower.max(d as usize);
                        } else {
                            upper = upper.max((-d) as usize);
                        }
                    }
                    Some((lower, upper))
                }
            },
            OperatorExpr::Sum { terms } => terms.iter().try_fold((0, 0), |(l, u), t| {
                let (tl, tu) = t.band()?;
                Some((l.max(tl), u.max(tu)))
            }),
            OperatorExpr::Product { factors } => factors.iter().try_fold((0, 0), |(l, u), f| {
                let (fl, fu) = f.band()?;
                Some((l + fl, u + fu))
            }),
            OperatorExpr::Scaled { expr, .. } => expr.band(),
            OperatorExpr::Adjoint { expr } => expr.band().map(|(l, u)| (u, l)),
            OperatorExpr::FiniteRankPatch { base, entries } => {
                let (mut l, mut u) = base.band()?;
                for e in entries {
                    let d = e.row - e.col;
                    if d > 0 {
                        l = l.max(d as usize);
                    } else {
                        u = u.max((-d) as usize);
                    }
                }
                Some((l, u))
            }
        }
    }

    fn in_domain(domain: SeqDomain, i: i64) -> bool {
        domain == SeqDomain::Bilateral || i >= 0
    }

    /// Column `j` as a sparse vector: the image `A e_j`.
    pub fn col(&self, j: i64) -> Sparse {
        match self {
            OperatorExpr::Diagonal { seq } => vec![(j, real(seq.eval_raw(j)))],
            OperatorExpr::WeightedShift { weights, .. } => vec![(j + 1, real(weights.eval_raw(j)))],
            OperatorExpr::ShiftDownUnitary { layout } => vec![(shift_image(*layout, j, 1), one())],
            OperatorExpr::Permutation { arrangement } => match arrangement {
                Arrangement::Bilateral => vec![(BilateralArrangement.to_basis(j), one())],
                Arrangement::Finite { images } => {
                    let i = if (j as usize) < images.len() { images[j as usize] } else { j };
                    vec![(i, one())]
                }
            },
            OperatorExpr::Sum { terms } => accumulate(terms.iter().flat_map(|t| t.col(j))),
            OperatorExpr::Product { factors } => {
                let mut v = factors.last().unwrap().col(j);
                for f in factors.iter().rev().skip(1) {
                    v = f.apply_sparse(&v);
                }
                v
            }
            OperatorExpr::Scaled { re, im, expr } => {
                let c = C64::new(*re, *im);
                expr.col(j).into_iter().map(|(i, z)| (i, c * z)).collect()
            }
            OperatorExpr::Adjoint { expr } => expr.row(j).into_iter().map(|(i, z)| (i, z.conj())).collect(),
            OperatorExpr::FiniteRankPatch { base, entries } => accumulate(
                base.col(j).into_iter().chain(
                    entries
                        .iter()
                        .filter(|e| e.col == j)
                        .map(|e| (e.row, C64::new(e.re, e.im))),
                ),
            ),
        }
    }

    /// Row `i` as a sparse vector over column indices.
    pub fn row(&self, i: i64) -> Sparse {
        match self {
            OperatorExpr::Diagonal { seq } => vec![(i, real(seq.eval_raw(i)))],
            OperatorExpr::WeightedShift { weights, domain } => {
                if Self::in_domain(*domain, i - 1) {
                    vec![(i - 1, real(weights.eval_raw(i - 1)))]
                } else {
                    vec![]
                }
            }
            OperatorExpr::ShiftDownUnitary { layout } => {
                let j = shift_image(*layout, i, -1);
                if Self::in_domain(self.col_domain(), j) {
                    vec![(j, one())]
                } else {
                    vec![]
                }
            }
            OperatorExpr::Permutation { arrangement } => match arrangement {
                Arrangement::Bilateral => vec![(BilateralArrangement.to_position(i).expect("row in ℕ"), one())],
                Arrangement::Finite { images } => {
                    let j = if (i as usize) < images.len() {
                        images.iter().position(|&x| x == i).unwrap() as i64
                    } else {
                        i
                    };
                    vec![(j, one())]
                }
            },
            OperatorExpr::Sum { terms } => accumulate(terms.iter().flat_map(|t| t.row(i))),
            OperatorExpr::Product { factors } => {
                let mut r = factors[0].row(i);
                for f in &factors[1..] {
                    r = accumulate(
                        r.iter()
                            .flat_map(|&(k, a)| f.row(k).into_iter().map(move |(j, b)| (j, a * b))),
                    );
                }
                r
            }
            OperatorExpr::Scaled { re, im, expr } => {
                let c = C64::new(*re, *im);
                expr.row(i).into_iter().map(|(j, z)| (j, c * z)).collect()
            }
            OperatorExpr::Adjoint { expr } => expr.col(i).into_iter().map(|(j, z)| (j, z.conj())).collect(),
            OperatorExpr::FiniteRankPatch { base, entries } => accumulate(
                base.row(i).into_iter().chain(
                    entries
                        .iter()
                        .filter(|e| e.row == i)
                        .map(|e| (e.col, C64::new(e.re, e.im))),
                ),
            ),
        }
    }

    /// Exact image of a finitely supported vector.
    pub fn apply_sparse(&self, v: &[(i64, C64)]) -> Sparse {
        accumulate(
            v.iter()
                .flat_map(|&(k, a)| self.col(k).into_iter().map(move |(i, b)| (i, a * b))),
        )
    }

    pub fn entry(&self, i: i64, j: i64) -> Result<C64> {
        self.validate()?;
        for (idx, domain) in [(i, self.row_domain()), (j, self.col_domain())] {
            if !Self::in_domain(domain, idx) {
                return Err(Error::IndexOutOfDomain { index: idx, first: 0 });
            }
        }
        Ok(self.entry_raw(i, j))
    }

    pub(crate) fn entry_raw(&self, i: i64, j: i64) -> C64 {
        self.col(j)
            .into_iter()
            .find(|&(r, _)| r == i)
            .map_or(C64::new(0.0, 0.0), |(_, z)| z)
    }

    /// Square truncation to `w × w` (default window guard).
    pub fn truncate(&self, w: TruncationWindow) -> Result<DenseBlock> {
        self.truncate_rect(w, w, DEFAULT_MAX_WINDOW)
    }

    /// Truncation to `rows × cols` with an explicit size guard.
    pub fn truncate_rect(&self, rows: TruncationWindow, cols: TruncationWindow, max: usize) -> Result<DenseBlock> {
        self.validate()?;
        rows.check(self.row_domain(), max)?;
        cols.check(self.col_domain(), max)?;
        let (n, m) = (rows.len(), cols.len());
        let columns: Vec<Sparse> = cols.indices().collect::<Vec<_>>().par_iter().map(|&j| self.col(j)).collect();
        let mut data = DMatrix::zeros(n, m);
        for (c, col) in columns.iter().enumerate() {
            for &(i, z) in col {
                if rows.contains(i) {
                    data[((i - rows.lo) as usize, c)] = z;
                }
            }
        }
        Ok(DenseBlock {
            row_labels: rows.indices().collect(),
            col_labels: cols.indices().collect(),
            data,
            exact: true,
            tail_bound: None,
        })
    }

    /// Exact image of `v` restricted to `w`.
    ///
    /// `v` must be supported where the image cannot leave `w`: inside `w`
    /// shrunk by the bandwidth for banded expressions, or anywhere in `w` as
    /// long as the exact image stays inside `w` otherwise.
    pub fn apply(&self, v: &LabeledVector, w: TruncationWindow) -> Result<LabeledVector> {
        self.validate()?;
        w.check(self.row_domain(), usize::MAX)?;
        let support: Vec<i64> = v.support().collect();
        if let Some((lower, upper)) = self.band() {
            // the image of e_k lives on rows k - upper ..= k + lower; the left
            // edge of an ℕ window at 0 is the true boundary
            let at_origin = self.row_domain() == SeqDomain::Unilateral && w.lo == 0;
            let lo = if at_origin { w.lo } else { w.lo + upper as i64 };
            let hi = w.hi - lower as i64;
            if let Some(&bad) = support.iter().find(|&&k| k < lo || k > hi) {
                return Err(Error::SupportViolation(format!(
                    "index {bad} is within the band ({lower}, {upper}) of the window edge [{}, {}]",
                    w.lo, w.hi
                )));
            }
        }
        let sparse: Sparse = support.iter().map(|&k| (k, v.get(k))).collect();
        let image = self.apply_sparse(&sparse);
        let mut out = LabeledVector::zeros(w);
        for (i, z) in image {
            if !w.contains(i) {
                if z != C64::new(0.0, 0.0) {
                    return Err(Error::SupportViolation(format!("image leaves the window at index {i}")));
                }
                continue;
            }
            out.set(i, z);
        }
        Ok(out)
    }
}

fn shift_image(layout: ShiftLayout, index: i64, step: i64) -> i64 {
    match layout {
        ShiftLayout::Bilateral => index + step,
        ShiftLayout::Interleaved => {
            let a = BilateralArrangement;
            a.to_basis(a.to_position(index).expect("ℕ index") + step)
        }
        ShiftLayout::Split => {
            let s = SplitArrangement;
            match s.slot(index).expect("ℕ index") {
                Slot::Shift(p) => s.index(Slot::Shift(p + step)).unwrap(),
                Slot::Diagonal(_) => index,
            }
        }
    }
}

fn is_real(m: &DMatrix<C64>) -> bool {
    m.iter().all(|z| z.im == 0.0)
}

fn real_part(m: &DMatrix<C64>) -> DMatrix<f64> {
    m.map(|z| z.re)
}

/// At most one nonzero per row and per column.
fn is_monomial(m: &DMatrix<C64>) -> bool {
    let zero = C64::new(0.0, 0.0);
    let rows_ok = (0..m.nrows()).all(|r| m.row(r).iter().filter(|z| **z != zero).count() <= 1);
    rows_ok && (0..m.ncols()).all(|c| m.column(c).iter().filter(|z| **z != zero).count() <= 1)
}

/// Singular values in decreasing order.
pub fn singular_values(m: &DMatrix<C64>) -> Vec<f64> {
    if m.is_empty() {
        return vec![];
    }
    let mut s: Vec<f64> = if is_real(m) {
        real_part(m).singular_values().iter().copied().collect()
    } else {
        m.clone().singular_values().iter().copied().collect()
    };
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Largest singular value. Matrices with at most one nonzero per row and
/// column (diagonals, shifts, permutations) are handled exactly.
pub fn operator_norm(m: &DMatrix<C64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    if is_monomial(m) {
        return m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    }
    singular_values(m)[0]
}

/// Smallest singular value `σ_min` (over `min(rows, cols)` values).
pub fn min_singular_value(m: &DMatrix<C64>) -> f64 {
    singular_values(m).last().copied().unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn ts(neg: f64, nonneg: f64) -> ScalarSeq {
        ScalarSeq::two_sided(ScalarSeq::constant(neg), ScalarSeq::constant(nonneg)).unwrap()
    }

    #[test]
    fn entry_examples() {
        let t = OperatorExpr::weighted_shift(ScalarSeq::constant(0.5));
        assert_eq!(t.entry(1, 0).unwrap(), c(0.5));
        assert_eq!(t.entry(0, 1).unwrap(), c(0.0));
        let d = OperatorExpr::diagonal(ScalarSeq::harmonic_shift(1.0, 1.0).unwrap());
        assert_eq!(d.entry(3, 3).unwrap(), c(0.25));
        assert!(d.entry(-1, 0).is_err());
    }

    #[test]
    fn shift_down_times_diagonal_has_weights_on_subdiagonal() {
        let lambda = ScalarSeq::two_sided(
            ScalarSeq::geometric(1.0, 0.5).unwrap(),
            ScalarSeq::geometric(1.0, 0.5).unwrap(),
        )
        .unwrap();
        let ut = OperatorExpr::product(vec![
            OperatorExpr::shift_down(ShiftLayout::Bilateral),
            OperatorExpr::diagonal(lambda.clone()),
        ]);
        for p in -20..20 {
            assert_eq!(ut.entry(p + 1, p).unwrap(), c(lambda.eval(p).unwrap()));
            assert_eq!(ut.entry(p, p).unwrap(), c(0.0));
        }
    }

    #[test]
    fn truncate_examples() {
        let id = OperatorExpr::identity(SeqDomain::Unilateral);
        let b = id.truncate(TruncationWindow::new(0, 2).unwrap()).unwrap();
        assert_eq!(b.data, DMatrix::identity(3, 3));
        assert!(b.exact);

        let t = OperatorExpr::weighted_shift(ts(2.0, 0.5));
        let b = t.truncate(TruncationWindow::symmetric(2)).unwrap();
        let sub: Vec<f64> = (0..4).map(|k| b.data[(k + 1, k)].re).collect();
        assert_eq!(sub, vec![2.0, 2.0, 0.5, 0.5]);
        assert_eq!(b.data.iter().filter(|z| z.re != 0.0).count(), 4);
    }

    #[test]
    fn window_guard_and_domain() {
        let id = OperatorExpr::identity(SeqDomain::Bilateral);
        assert!(matches!(
            id.truncate(TruncationWindow::new(0, 5000).unwrap()),
            Err(Error::WindowTooLarge { .. })
        ));
        let idn = OperatorExpr::identity(SeqDomain::Unilateral);
        assert!(idn.truncate(TruncationWindow::new(-1, 3).unwrap()).is_err());
        assert!("3:1".parse::<TruncationWindow>().is_err());
        assert_eq!("-4:7".parse::<TruncationWindow>().unwrap(), TruncationWindow { lo: -4, hi: 7 });
    }

    #[test]
    fn apply_examples() {
        let w = TruncationWindow::prefix(8);
        let t = OperatorExpr::weighted_shift(ScalarSeq::constant(2.0));
        let out = t.apply(&LabeledVector::basis(w, 0), w).unwrap();
        assert_eq!(out, {
            let mut v = LabeledVector::zeros(w);
            v.set(1, c(2.0));
            v
        });
        let id = OperatorExpr::identity(SeqDomain::Unilateral);
        let mut v = LabeledVector::zeros(w);
        v.set(3, C64::new(1.0, -2.0));
        v.set(7, c(5.0));
        assert_eq!(id.apply(&v, w).unwrap(), v);
        assert!(matches!(t.apply(&v, w), Err(Error::SupportViolation(_))));
    }

    #[test]
    fn bandwidth_rules() {
        let d = OperatorExpr::identity(SeqDomain::Bilateral);
        let s = OperatorExpr::weighted_shift(ScalarSeq::constant_bilateral(1.0));
        assert_eq!(d.bandwidth(), Some(0));
        assert_eq!(s.bandwidth(), Some(1));
        assert_eq!(OperatorExpr::sum(vec![d.clone(), s.clone()]).bandwidth(), Some(1));
        assert_eq!(OperatorExpr::product(vec![s.clone(), s.clone(), d]).bandwidth(), Some(2));
        assert_eq!(OperatorExpr::permutation(Arrangement::Bilateral).bandwidth(), None);
        assert_eq!(OperatorExpr::shift_down(ShiftLayout::Split).bandwidth(), Some(4));
    }

    #[test]
    fn shift_unitaries_are_unitary_on_interior() {
        for layout in [ShiftLayout::Bilateral, ShiftLayout::Interleaved, ShiftLayout::Split] {
            let u = OperatorExpr::shift_down(layout);
            let lo = if layout == ShiftLayout::Bilateral { -40 } else { 0 };
            let w = TruncationWindow::new(lo, lo + 80).unwrap();
            let b = u.truncate(w).unwrap();
            let interior = 8..72usize;
            for r in interior.clone() {
                let ones = b.data.row(r).iter().filter(|z| **z == one()).count();
                let nnz = b.data.row(r).iter().filter(|z| z.norm() != 0.0).count();
                assert_eq!((ones, nnz), (1, 1), "{layout:?} row {r}");
            }
            let uu = b.data.adjoint() * &b.data;
            for r in interior.clone() {
                for s in interior.clone() {
                    let expect = if r == s { one() } else { c(0.0) };
                    assert_eq!(uu[(r, s)], expect, "{layout:?}");
                }
            }
        }
    }

    #[test]
    fn permutation_is_bijective_on_windows() {
        let p = OperatorExpr::permutation(Arrangement::Bilateral);
        let b = p
            .truncate_rect(TruncationWindow::prefix(21), TruncationWindow::symmetric(10), 4096)
            .unwrap();
        assert_eq!(b.data.clone() * b.data.adjoint(), DMatrix::identity(21, 21));
        assert_eq!(b.data.adjoint() * b.data, DMatrix::identity(21, 21));
    }

    #[test]
    fn json_descriptor_round_trip() {
        let e = OperatorExpr::product(vec![
            OperatorExpr::shift_down(ShiftLayout::Interleaved),
            OperatorExpr::patch(
                OperatorExpr::diagonal(ScalarSeq::geometric(1.0, 0.5).unwrap()),
                vec![(0, 1, c(0.05))],
            ),
            OperatorExpr::permutation(Arrangement::Finite { images: vec![1, 0] }),
        ]);
        let s = serde_json::to_string(&e).unwrap();
        let back: OperatorExpr = serde_json::from_str(&s).unwrap();
        assert_eq!(back, e);
        let block = e.truncate(TruncationWindow::prefix(6)).unwrap();
        let csv = block.to_csv();
        assert!(csv.starts_with("row,col,re,im\n0,0,"));
        assert_eq!(csv.lines().count(), 37);
    }

    #[test]
    fn operator_norm_fast_paths_match_svd() {
        let m = DMatrix::from_fn(5, 5, |i, j| if i == (j + 2) % 5 { c(j as f64 - 2.5) } else { c(0.0) });
        let full = m.map(|z| z.re).singular_values().max();
        assert!((operator_norm(&m) - full).abs() < 1e-12);
        assert_eq!(operator_norm(&m), 2.5);
    }

    fn arb_expr() -> impl Strategy<Value = OperatorExpr> {
        let leaf = prop_oneof![
            (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| OperatorExpr::diagonal(ts(a, b))),
            (0.1..3.0f64, 0.1..3.0f64).prop_map(|(a, b)| OperatorExpr::weighted_shift(ts(a, b))),
            Just(OperatorExpr::shift_down(ShiftLayout::Bilateral)),
        ];
        leaf.prop_recursive(3, 12, 3, |inner| {
            prop_oneof![
                prop::collection::vec(inner.clone(), 1..3).prop_map(OperatorExpr::sum),
                prop::collection::vec(inner.clone(), 1..3).prop_map(OperatorExpr::product),
                inner.clone().prop_map(OperatorExpr::adjoint),
                (-2.0..2.0f64, -1.0..1.0f64, inner.clone())
                    .prop_map(|(re, im, e)| OperatorExpr::scaled(C64::new(re, im), e)),
                (inner, -3i64..3, -3i64..3, -1.0..1.0f64)
                    .prop_map(|(e, i, j, v)| OperatorExpr::patch(e, vec![(i, j, c(v))])),
            ]
        })
    }

    proptest! {
        #[test]
        fn adjoint_truncation_is_conjugate_transpose(e in arb_expr()) {
            let w = TruncationWindow::symmetric(6);
            let a = e.truncate(w).unwrap();
            let b = OperatorExpr::adjoint(e).truncate(w).unwrap();
            prop_assert_eq!(b.data, a.data.adjoint());
        }

        #[test]
        fn product_truncation_matches_padded_dense_product(a in arb_expr(), b in arb_expr()) {
            let w = TruncationWindow::symmetric(5);
            let pad = a.bandwidth().unwrap() + b.bandwidth().unwrap();
            let wp = w.expand(pad);
            let ab = OperatorExpr::product(vec![a.clone(), b.clone()]).truncate(w).unwrap();
            let dense = a.truncate(wp).unwrap().data * b.truncate(wp).unwrap().data;
            let inner = dense.view((pad, pad), (w.len(), w.len())).into_owned();
            let err = (ab.data - inner).iter().map(|z| z.norm()).fold(0.0, f64::max);
            prop_assert!(err <= 1e-12, "err {}", err);
        }

        #[test]
        fn entry_matches_truncation_and_rows(e in arb_expr(), i in -4i64..4, j in -4i64..4) {
            let b = e.truncate(TruncationWindow::symmetric(4)).unwrap();
            prop_assert_eq!(b.entry(i, j).unwrap(), e.entry(i, j).unwrap());
            let from_row = e.row(i).into_iter().find(|&(k, _)| k == j).map_or(c(0.0), |(_, z)| z);
            prop_assert!((from_row - e.entry(i, j).unwrap()).norm() <= 1e-12);
        }

        #[test]
        fn apply_matches_dense_multiply(e in arb_expr(), entries in prop::collection::vec((-3i64..=3, -2.0..2.0f64), 1..4)) {
            let w = TruncationWindow::symmetric(3 + e.bandwidth().unwrap() as i64);
            let mut v = LabeledVector::zeros(w);
            for (k, x) in entries {
                v.set(k, c(x));
            }
            let got = e.apply(&v, w).unwrap();
            let dense = e.truncate(w).unwrap().data * &v.values;
            let err = (got.values - dense).iter().map(|z| z.norm()).fold(0.0, f64::max);
            prop_assert!(err <= 1e-12);
        }
    }
}
