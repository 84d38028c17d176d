//! Schauder systems given by a column generator `f_n` and a finitely
//! supported dual `g_n` with `⟨f_i, g_j⟩ = δ_ij`, their natural projections
//! `Q_Δ = Σ_{n∈Δ} f_n ⊗ g_n`, basis and unconditional constants, the
//! blowing-up operator and growth evidence for the conditional example.
//!
//! All indices are 0-based. Inner products are `⟨x, y⟩ = Σ x_r conj(y_r)`.

use nalgebra::DMatrix;
use rand_xoshiro::rand_core::RngCore;
use rand_xoshiro::rand_core::SeedableRng;
use rand_xoshiro::SplitMix64;
use rayon::prelude::*;
use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::opcore::{operator_norm, DenseBlock, OperatorExpr, Sparse, TruncationWindow, C64};
use crate::seqcore::{ScalarSeq, SeriesBehavior};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Indices checked for biorthogonality when a system is built.
pub const BUILD_CHECK: i64 = 32;
pub const BIORTHOGONALITY_TOL: f64 = 1e-12;
/// Subsets are searched exhaustively up to this many indices.
pub const EXHAUSTIVE_MAX_K: usize = 12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseEntry {
    pub index: i64,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

fn to_sparse(v: &[SparseEntry]) -> Sparse {
    let mut s: Sparse = v.iter().map(|e| (e.index, C64::new(e.re, e.im))).collect();
    s.sort_by_key(|p| p.0);
    s
}

fn sparse_norm(v: &[(i64, C64)]) -> f64 {
    v.iter().map(|(_, z)| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `⟨x, y⟩` for sorted sparse vectors.
fn sparse_inner(x: &[(i64, C64)], y: &[(i64, C64)]) -> C64 {
    let (mut i, mut j) = (0, 0);
    let mut acc = ZERO;
    while i < x.len() && j < y.len() {
        match x[i].0.cmp(&y[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                acc += x[i].1 * y[j].1.conj();
                i += 1;
                j += 1;
            }
        }
    }
    acc
}

/// Column `f_n` cut at a maximal row.
#[derive(Clone, Debug, PartialEq)]
pub struct Column {
    /// Entries with row `≤ max_row`, sorted by row.
    pub entries: Sparse,
    /// Upper bound of the ℓ² norm of the discarded rows.
    pub tail: f64,
}

impl Column {
    pub fn norm_upper(&self) -> f64 {
        sparse_norm(&self.entries).hypot(self.tail)
    }
}

/// A Schauder system described by its structure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "structure", rename_all = "snake_case")]
pub enum SchauderSystem {
    Onb,
    /// `f_n`, `g_n` listed for `n < columns.len()`, `e_n` beyond.
    FinitePerturbation {
        columns: Vec<Vec<SparseEntry>>,
        duals: Vec<Vec<SparseEntry>>,
    },
    /// `f_{2m} = e_{2m} + Σ_{j≥0} α_{j+1} e_{2(m+j)+1}`, `f_{2m+1} = e_{2m+1}`.
    Example35 { alpha: ScalarSeq },
    /// Columns `X f_n`, duals `X_inv* g_n`.
    Transformed {
        x: OperatorExpr,
        x_inv: OperatorExpr,
        base: Box<SchauderSystem>,
        /// Schur-test bound of `‖X‖` over the construction window, used to
        /// carry column tails. Recomputed by [`SchauderSystem::rebuild`].
        #[serde(default)]
        x_norm: f64,
    },
    /// Columns `d_n f_n`, duals `g_n / conj(d_n)`.
    Scaled { d: ScalarSeq, base: Box<SchauderSystem> },
    /// `f'_n = f_{images[n]}` (and likewise for duals) for `n < images.len()`.
    Permuted { images: Vec<i64>, base: Box<SchauderSystem> },
}

impl SchauderSystem {
    pub fn onb() -> Self {
        SchauderSystem::Onb
    }

    /// A finite block of columns and duals on top of the standard basis. The
    /// listed vectors must live on indices `< columns.len()`.
    pub fn finite_perturbation(columns: Vec<Vec<SparseEntry>>, duals: Vec<Vec<SparseEntry>>) -> Result<Self> {
        let n = columns.len();
        if duals.len() != n {
            return Err(Error::InvalidSequence(format!("{n} columns but {} duals", duals.len())));
        }
        for v in columns.iter().chain(duals.iter()) {
            if let Some(e) = v.iter().find(|e| e.index < 0 || e.index >= n as i64) {
                return Err(Error::SupportViolation(format!(
                    "entry at index {} leaves the perturbed block 0..{n}",
                    e.index
                )));
            }
        }
        let s = SchauderSystem::FinitePerturbation { columns, duals };
        s.require_biorthogonal(n as i64)?;
        Ok(s)
    }

    /// `f_0 = e_0`, `f_1 = e_0 + e_1` with duals `g_0 = e_0 − e_1`, `g_1 = e_1`.
    pub fn skew_pair() -> Self {
        let e = |index, re| SparseEntry { index, re, im: 0.0 };
        SchauderSystem::finite_perturbation(
            vec![vec![e(0, 1.0)], vec![e(0, 1.0), e(1, 1.0)]],
            vec![vec![e(0, 1.0), e(1, -1.0)], vec![e(1, 1.0)]],
        )
        .expect("skew pair is biorthogonal")
    }

    /// Rejects `α` with `Σ n α_n² = ∞` when that is detectable.
    pub fn example35(alpha: ScalarSeq) -> Result<Self> {
        if !alpha.contains(1) {
            return Err(Error::InvalidSequence("alpha must be defined from index 1".into()));
        }
        if alpha.series_behavior(1, 2) == SeriesBehavior::Diverges {
            return Err(Error::Precondition("sum of n * alpha_n^2 diverges".into()));
        }
        let s = SchauderSystem::Example35 { alpha };
        s.require_biorthogonal(BUILD_CHECK)?;
        Ok(s)
    }

    /// `X` and `X_inv` must be banded and inverse to each other on the
    /// interior of `w` (to 1e-10).
    pub fn transformed(x: OperatorExpr, x_inv: OperatorExpr, base: SchauderSystem, w: TruncationWindow) -> Result<Self> {
        let (xl, xu) = x.band().ok_or_else(|| Error::Precondition("X must be banded".into()))?;
        let (il, iu) = x_inv.band().ok_or_else(|| Error::Precondition("X_inv must be banded".into()))?;
        let residual = inverse_residual(&x, &x_inv, w)?;
        if residual > 1e-10 {
            return Err(Error::Precondition(format!("X * X_inv differs from I by {residual:e}")));
        }
        let reach = w.expand(xl.max(xu).max(il).max(iu));
        let x_norm = schur_bound(&x, reach)?;
        let s = SchauderSystem::Transformed {
            x,
            x_inv,
            base: Box::new(base),
            x_norm,
        };
        s.require_biorthogonal(BUILD_CHECK.min(w.hi + 1))?;
        Ok(s)
    }

    pub fn scaled(d: ScalarSeq, base: SchauderSystem) -> Result<Self> {
        if !d.contains(0) {
            return Err(Error::InvalidSequence("scaling must be defined from index 0".into()));
        }
        let meta = d.meta().pos;
        if !(meta.inf > 0.0 || meta.sup < 0.0) {
            if let Some(n) = (0..4096).find(|&n| d.sign_at(n) == 0.0) {
                return Err(Error::NonPositiveWeight {
                    index: n,
                    value: 0.0,
                });
            }
        }
        Ok(SchauderSystem::Scaled { d, base: Box::new(base) })
    }

    pub fn permuted(images: Vec<i64>, base: SchauderSystem) -> Result<Self> {
        let mut seen = vec![false; images.len()];
        for &i in &images {
            if i < 0 || i as usize >= images.len() || std::mem::replace(&mut seen[i as usize], true) {
                return Err(Error::InvalidExpression(format!(
                    "{images:?} is not a permutation of 0..{}",
                    images.len()
                )));
            }
        }
        Ok(SchauderSystem::Permuted {
            images,
            base: Box::new(base),
        })
    }

    /// Re-runs every constructor check on a deserialized description
    /// (`w` is the window used for transformations).
    pub fn rebuild(self, w: TruncationWindow) -> Result<Self> {
        match self {
            SchauderSystem::Onb => Ok(SchauderSystem::Onb),
            SchauderSystem::FinitePerturbation { columns, duals } => SchauderSystem::finite_perturbation(columns, duals),
            SchauderSystem::Example35 { alpha } => SchauderSystem::example35(alpha),
            SchauderSystem::Transformed { x, x_inv, base, .. } => {
                SchauderSystem::transformed(x, x_inv, base.rebuild(w)?, w)
            }
            SchauderSystem::Scaled { d, base } => SchauderSystem::scaled(d, base.rebuild(w)?),
            SchauderSystem::Permuted { images, base } => SchauderSystem::permuted(images, base.rebuild(w)?),
        }
    }

    fn example_alpha(alpha: &ScalarSeq, j: i64) -> f64 {
        alpha.eval_raw(j + 1)
    }

    /// `f_n` restricted to rows `≤ max_row`, with a bound on the rest.
    pub fn column(&self, n: i64, max_row: i64) -> Column {
        match self {
            SchauderSystem::Onb => Column {
                entries: if n <= max_row { vec![(n, ONE)] } else { vec![] },
                tail: if n <= max_row { 0.0 } else { 1.0 },
            },
            SchauderSystem::FinitePerturbation { columns, .. } => match columns.get(n as usize) {
                Some(c) => {
                    let all = to_sparse(c);
                    let (keep, drop): (Sparse, Sparse) = all.into_iter().partition(|e| e.0 <= max_row);
                    Column {
                        entries: keep,
                        tail: sparse_norm(&drop),
                    }
                }
                None => SchauderSystem::Onb.column(n, max_row),
            },
            SchauderSystem::Example35 { alpha } => {
                if n % 2 == 1 {
                    return SchauderSystem::Onb.column(n, max_row);
                }
                let m = n / 2;
                if max_row < n {
                    // everything is discarded
                    let rest = alpha.tail_bound(0, 2).map_or(f64::INFINITY, |t| t);
                    return Column {
                        entries: vec![],
                        tail: (1.0 + rest).sqrt(),
                    };
                }
                let mut entries = vec![(n, ONE)];
                // rows 2(m+j)+1 ≤ max_row
                let j_max = (max_row - 2 * m - 1).div_euclid(2);
                for j in 0..=j_max {
                    entries.push((2 * (m + j) + 1, C64::new(Self::example_alpha(alpha, j), 0.0)));
                }
                // discarded: α_i for i > j_max + 1
                let tail = alpha.tail_bound(j_max.max(-1) + 1, 2).map_or(f64::INFINITY, f64::sqrt);
                Column { entries, tail }
            }
            SchauderSystem::Transformed { x, base, x_norm, .. } => {
                let (_, upper) = x.band().expect("checked at construction");
                let inner = base.column(n, max_row + upper as i64);
                let image = x.apply_sparse(&inner.entries);
                let (keep, drop): (Sparse, Sparse) = image.into_iter().partition(|e| e.0 <= max_row);
                Column {
                    entries: keep,
                    tail: sparse_norm(&drop) + x_norm * inner.tail,
                }
            }
            SchauderSystem::Scaled { d, base } => {
                let s = d.eval_raw(n);
                let c = base.column(n, max_row);
                Column {
                    entries: c.entries.into_iter().map(|(r, z)| (r, z * s)).collect(),
                    tail: c.tail * s.abs(),
                }
            }
            SchauderSystem::Permuted { images, base } => base.column(permute(images, n), max_row),
        }
    }

    /// `g_n`, sorted by row.
    pub fn dual(&self, n: i64) -> Sparse {
        match self {
            SchauderSystem::Onb => vec![(n, ONE)],
            SchauderSystem::FinitePerturbation { duals, .. } => match duals.get(n as usize) {
                Some(g) => to_sparse(g),
                None => vec![(n, ONE)],
            },
            SchauderSystem::Example35 { alpha } => {
                if n % 2 == 0 {
                    return vec![(n, ONE)];
                }
                let m = (n - 1) / 2;
                let mut g: Sparse = (0..=m)
                    .map(|l| (2 * l, C64::new(-Self::example_alpha(alpha, m - l), 0.0)))
                    .collect();
                g.push((n, ONE));
                g
            }
            SchauderSystem::Transformed { x_inv, base, .. } => {
                let g = base.dual(n);
                let mut out = OperatorExpr::adjoint(x_inv.clone()).apply_sparse(&g);
                out.retain(|e| e.1 != ZERO);
                out
            }
            SchauderSystem::Scaled { d, base } => {
                let s = d.eval_raw(n);
                base.dual(n).into_iter().map(|(r, z)| (r, z / s)).collect()
            }
            SchauderSystem::Permuted { images, base } => base.dual(permute(images, n)),
        }
    }

    /// The pair `(f_n, g_n)` whose outer product is the rank-one piece of
    /// every natural projection. Scalings cancel in `f_n ⊗ g_n`, so scaled
    /// systems hand back the factors of their base.
    pub fn projection_factors(&self, n: i64, max_row: i64) -> (Column, Sparse) {
        match self {
            SchauderSystem::Scaled { base, .. } => base.projection_factors(n, max_row),
            SchauderSystem::Permuted { images, base } => base.projection_factors(permute(images, n), max_row),
            _ => (self.column(n, max_row), self.dual(n)),
        }
    }

    /// `sup_n ‖f_n‖` when a rigorous bound is available.
    pub fn column_norm_bound(&self) -> Option<f64> {
        match self {
            SchauderSystem::Onb => Some(1.0),
            SchauderSystem::FinitePerturbation { columns, .. } => Some(
                columns
                    .iter()
                    .map(|c| sparse_norm(&to_sparse(c)))
                    .fold(1.0, f64::max),
            ),
            SchauderSystem::Example35 { alpha } => alpha.tail_bound(0, 2).map(|t| (1.0 + t).sqrt()),
            SchauderSystem::Transformed { base, x_norm, .. } => base.column_norm_bound().map(|b| b * x_norm),
            SchauderSystem::Scaled { d, base } => {
                let m = d.meta().pos;
                let sup = m.sup.abs().max(m.inf.abs());
                base.column_norm_bound().map(|b| b * sup).filter(|v| v.is_finite())
            }
            SchauderSystem::Permuted { base, .. } => base.column_norm_bound(),
        }
    }

    /// `max_{i,j<n} |⟨f_i, g_j⟩ − δ_ij|`, exact up to rounding since the
    /// duals are finitely supported.
    pub fn biorthogonality_residual(&self, n: i64) -> f64 {
        let duals: Vec<Sparse> = (0..n).map(|j| self.dual(j)).collect();
        let reach = duals.iter().filter_map(|g| g.last().map(|e| e.0)).max().unwrap_or(0);
        (0..n)
            .into_par_iter()
            .map(|i| {
                let f = self.column(i, reach).entries;
                duals
                    .iter()
                    .enumerate()
                    .map(|(j, g)| {
                        let target = if i == j as i64 { ONE } else { ZERO };
                        (sparse_inner(&f, g) - target).norm()
                    })
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    }

    fn require_biorthogonal(&self, n: i64) -> Result<()> {
        let r = self.biorthogonality_residual(n);
        if r > BIORTHOGONALITY_TOL {
            return Err(Error::Precondition(format!(
                "columns and duals are not biorthogonal (residual {r:e} over the first {n} indices)"
            )));
        }
        Ok(())
    }
}

fn permute(images: &[i64], n: i64) -> i64 {
    images.get(n as usize).copied().unwrap_or(n)
}

/// `‖X·X_inv − I‖` on the part of `w` unaffected by truncation.
pub fn inverse_residual(x: &OperatorExpr, x_inv: &OperatorExpr, w: TruncationWindow) -> Result<f64> {
    let (xl, xu) = x.band().ok_or_else(|| Error::Precondition("X must be banded".into()))?;
    let (il, iu) = x_inv.band().ok_or_else(|| Error::Precondition("X_inv must be banded".into()))?;
    let wide = w.expand(xl.max(xu).max(il).max(iu));
    let wide = wide.clip(x.col_domain());
    let a = x.truncate(wide)?;
    let b = x_inv.truncate(wide)?;
    let prod = &a.data * &b.data;
    let off = (w.lo - wide.lo) as usize;
    let n = w.len();
    let mut diff = prod.view((off, off), (n, n)).into_owned();
    for i in 0..n {
        diff[(i, i)] -= ONE;
    }
    Ok(operator_norm(&diff))
}

/// `sqrt(max row sum · max column sum)` of `|X|` over `w`.
fn schur_bound(x: &OperatorExpr, w: TruncationWindow) -> Result<f64> {
    let b = x.truncate(w.clip(x.col_domain()))?;
    let abs = b.data.map(|z| z.norm());
    let row = abs.row_iter().map(|r| r.sum()).fold(0.0, f64::max);
    let col = abs.column_iter().map(|c| c.sum()).fold(0.0, f64::max);
    Ok((row * col).sqrt())
}

fn window_dual_check(n: i64, g: &Sparse, w: TruncationWindow) -> Result<()> {
    if let Some(e) = g.iter().find(|e| !w.contains(e.0)) {
        return Err(Error::SupportViolation(format!(
            "dual g_{n} has support at {} outside the window {}:{}",
            e.0, w.lo, w.hi
        )));
    }
    Ok(())
}

/// `Q_Δ` restricted to `w × w`.
pub fn natural_projection_block(system: &SchauderSystem, delta: &[i64], w: TruncationWindow) -> Result<DenseBlock> {
    if w.lo < 0 {
        return Err(Error::InvalidWindow("Schauder systems live on indices >= 0".into()));
    }
    let n = w.len();
    let mut data = DMatrix::from_element(n, n, ZERO);
    let mut tail = 0.0f64;
    for &k in delta {
        let (f, g) = system.projection_factors(k, w.hi);
        window_dual_check(k, &g, w)?;
        tail += f.tail * sparse_norm(&g);
        for &(c, gz) in &g {
            let gc = gz.conj();
            for &(r, fz) in f.entries.iter().filter(|e| e.0 >= w.lo) {
                data[((r - w.lo) as usize, (c - w.lo) as usize)] += fz * gc;
            }
        }
    }
    let labels: Vec<i64> = w.indices().collect();
    Ok(DenseBlock {
        row_labels: labels.clone(),
        col_labels: labels,
        data,
        exact: tail == 0.0,
        tail_bound: (tail > 0.0).then_some(tail),
    })
}

/// Window factors `F` (columns `f_n`) and `G` (columns `g_n`) for `n < k`,
/// so that `Q_Δ = F_Δ G_Δ*` on `w`.
struct Factors {
    a: DMatrix<C64>,
    b: DMatrix<C64>,
    exact: bool,
}

fn factor_grams(system: &SchauderSystem, k: usize, w: TruncationWindow) -> Result<Factors> {
    if w.lo < 0 {
        return Err(Error::InvalidWindow("Schauder systems live on indices >= 0".into()));
    }
    let pairs: Vec<(Column, Sparse)> = (0..k as i64)
        .into_par_iter()
        .map(|n| system.projection_factors(n, w.hi))
        .collect();
    for (n, (_, g)) in pairs.iter().enumerate() {
        window_dual_check(n as i64, g, w)?;
    }
    let exact = pairs.iter().all(|(f, _)| f.tail == 0.0);
    let clip = |v: &Sparse| -> Sparse { v.iter().copied().filter(|e| w.contains(e.0)).collect() };
    let fs: Vec<Sparse> = pairs.iter().map(|(f, _)| clip(&f.entries)).collect();
    let gs: Vec<Sparse> = pairs.iter().map(|(_, g)| g.clone()).collect();
    let gram = |vs: &[Sparse]| {
        let rows: Vec<Vec<C64>> = (0..k)
            .into_par_iter()
            .map(|i| (0..k).map(|j| sparse_inner(&vs[j], &vs[i])).collect())
            .collect();
        DMatrix::from_fn(k, k, |i, j| rows[i][j])
    };
    Ok(Factors {
        a: gram(&fs),
        b: gram(&gs),
        exact,
    })
}

fn is_diagonal(m: &DMatrix<C64>) -> bool {
    (0..m.nrows()).all(|i| (0..m.ncols()).all(|j| i == j || m[(i, j)] == ZERO))
}

/// `‖F G*‖` from the Gram matrices `A = F*F` and `B = G*G`: the square root
/// of the largest eigenvalue of `L* B L` with `A = L L*`.
fn norm_from_grams(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let c = match a.clone().cholesky() {
        Some(ch) => {
            let l = ch.l();
            l.adjoint() * b * l
        }
        None => {
            let eig = a.clone().symmetric_eigen();
            let sqrt = eig.eigenvalues.map(|v| C64::new(v.max(0.0).sqrt(), 0.0));
            let half = &eig.eigenvectors * DMatrix::from_diagonal(&sqrt) * eig.eigenvectors.adjoint();
            &half * b * &half
        }
    };
    let lmax = if is_diagonal(&c) {
        c.diagonal().iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
    } else {
        let h = (&c + c.adjoint()).map(|z| z * 0.5);
        h.symmetric_eigenvalues().iter().copied().fold(f64::NEG_INFINITY, f64::max)
    };
    lmax.max(0.0).sqrt()
}

fn select(m: &DMatrix<C64>, idx: &[usize]) -> DMatrix<C64> {
    DMatrix::from_fn(idx.len(), idx.len(), |i, j| m[(idx[i], idx[j])])
}

/// `‖Q_Δ‖` on `w` (a lower bound for the operator norm).
pub fn projection_norm(system: &SchauderSystem, delta: &[i64], w: TruncationWindow) -> Result<f64> {
    let k = delta.iter().copied().max().map_or(0, |m| m as usize + 1);
    let f = factor_grams(system, k, w)?;
    let idx: Vec<usize> = delta.iter().map(|&d| d as usize).collect();
    Ok(norm_from_grams(&select(&f.a, &idx), &select(&f.b, &idx)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisConstReport {
    pub window: TruncationWindow,
    /// `‖Q_k‖` for `k = 1..=K`, where `Q_k` projects onto `f_0 … f_{k-1}`.
    pub norms: Vec<f64>,
    pub running_max: Vec<f64>,
    /// `M_K = max_{k≤K} ‖Q_k‖`, a window lower bound for the basis constant.
    pub m: f64,
    /// No column was cut by the window.
    pub exact: bool,
    pub label: String,
}

impl BasisConstReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,norm,running_max,window,exact\n");
        for (k, (n, m)) in self.norms.iter().zip(&self.running_max).enumerate() {
            s.push_str(&format!(
                "{},{:e},{:e},{}:{},{}\n",
                k + 1,
                n,
                m,
                self.window.lo,
                self.window.hi,
                self.exact
            ));
        }
        s
    }
}

pub fn basis_const_estimate(system: &SchauderSystem, k_max: usize, w: TruncationWindow) -> Result<BasisConstReport> {
    let f = factor_grams(system, k_max, w)?;
    let norms: Vec<f64> = (1..=k_max)
        .into_par_iter()
        .map(|k| {
            let idx: Vec<usize> = (0..k).collect();
            norm_from_grams(&select(&f.a, &idx), &select(&f.b, &idx))
        })
        .collect();
    let mut running = Vec::with_capacity(k_max);
    let mut m = 0.0f64;
    for &n in &norms {
        m = m.max(n);
        running.push(m);
    }
    Ok(BasisConstReport {
        window: w,
        norms,
        running_max: running,
        m,
        exact: f.exact,
        label: "window lower bound".into(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UncondReport {
    pub k: usize,
    pub window: TruncationWindow,
    pub best_set: Vec<i64>,
    /// `‖Q_Δ‖` for the best set found: a lower bound for the unconditional
    /// constant.
    pub value: f64,
    pub exhaustive: bool,
    pub evaluated: usize,
    pub seed: u64,
    pub label: String,
}

fn mask_to_idx(mask: &[bool]) -> Vec<usize> {
    mask.iter().enumerate().filter(|p| *p.1).map(|p| p.0).collect()
}

/// Best `‖Q_Δ‖` over `Δ ⊆ {0, …, K-1}`: exhaustive for `K ≤ 12`, otherwise
/// structured starts, seeded random subsets and greedy single flips within
/// `budget` evaluations.
pub fn unconditional_const_estimate(
    system: &SchauderSystem,
    k: usize,
    w: TruncationWindow,
    budget: usize,
    seed: u64,
) -> Result<UncondReport> {
    if k == 0 {
        return Err(Error::Precondition("K must be at least 1".into()));
    }
    let f = factor_grams(system, k, w)?;
    let eval = |mask: &[bool]| {
        let idx = mask_to_idx(mask);
        norm_from_grams(&select(&f.a, &idx), &select(&f.b, &idx))
    };
    // ties go to the earlier candidate so results do not depend on scheduling
    let best_of = |cands: Vec<Vec<bool>>| -> Option<(f64, Vec<bool>)> {
        let vals: Vec<f64> = cands.par_iter().map(|m| eval(m)).collect();
        vals.into_iter()
            .zip(cands)
            .fold(None, |acc: Option<(f64, Vec<bool>)>, (v, m)| match acc {
                Some((bv, _)) if bv >= v => acc,
                _ => Some((v, m)),
            })
    };

    let (value, mask, evaluated, exhaustive) = if k <= EXHAUSTIVE_MAX_K {
        let all: Vec<Vec<bool>> = (1u64..(1 << k)).map(|m| (0..k).map(|i| m >> i & 1 == 1).collect()).collect();
        let n = all.len();
        let (v, m) = best_of(all).unwrap();
        (v, m, n, true)
    } else {
        // `budget` covers the random and greedy phases; the structured
        // starts come on top
        let mut evaluated = 0usize;
        // structured starts: the exhaustive optimum on the leading indices,
        // evens, odds, everything
        let lead = unconditional_const_estimate(system, EXHAUSTIVE_MAX_K, w, 0, seed)?;
        evaluated += lead.evaluated;
        let mut starts = vec![
            (0..k).map(|i| lead.best_set.contains(&(i as i64))).collect::<Vec<bool>>(),
            (0..k).map(|i| i % 2 == 0).collect(),
            (0..k).map(|i| i % 2 == 1).collect(),
            vec![true; k],
        ];
        let mut rng = SplitMix64::seed_from_u64(seed);
        let random = budget / 2;
        let mut spent = random;
        for _ in 0..random {
            let mut m = vec![false; k];
            let mut word = 0u64;
            for (i, slot) in m.iter_mut().enumerate() {
                if i % 64 == 0 {
                    word = rng.next_u64();
                }
                *slot = word >> (i % 64) & 1 == 1;
            }
            starts.push(m);
        }
        evaluated += starts.len();
        let (mut best_v, mut best_m) = best_of(starts).unwrap();
        while spent + k <= budget {
            let flips: Vec<Vec<bool>> = (0..k)
                .map(|i| {
                    let mut m = best_m.clone();
                    m[i] = !m[i];
                    m
                })
                .collect();
            evaluated += k;
            spent += k;
            let (v, m) = best_of(flips).unwrap();
            if v > best_v {
                best_v = v;
                best_m = m;
            } else {
                break;
            }
        }
        (best_v, best_m, evaluated, false)
    };
    Ok(UncondReport {
        k,
        window: w,
        best_set: mask_to_idx(&mask).into_iter().map(|i| i as i64).collect(),
        value,
        exhaustive,
        evaluated,
        seed,
        label: "window lower bound".into(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlowupReport {
    pub alpha: ScalarSeq,
    pub window: TruncationWindow,
    /// Upper bounds of `Σ_{l<n} ‖α_l f_l‖` for `n = 1..=n_max+1`.
    pub partial_sums: Vec<f64>,
    /// Upper bound of `Σ_{l>w.hi} ‖α_l f_l‖`.
    pub tail_bound: f64,
    /// `‖T − K_n‖` on the window for `n = 0..=n_max`, where `K_n` keeps the
    /// columns `l < n` of `T e_l = α_l f_l`.
    pub errors: Vec<f64>,
    /// `Σ_{l≥n} ‖α_l f_l‖`.
    pub bounds: Vec<f64>,
    pub pass: bool,
}

pub const BLOWUP_SLACK: f64 = 1e-10;

/// Finite-rank approximation of the blowing-up operator `T e_l = α_l f_l`.
pub fn blowup(system: &SchauderSystem, alpha: &ScalarSeq, w: TruncationWindow, n_max: usize) -> Result<BlowupReport> {
    if !alpha.contains(0) {
        return Err(Error::InvalidSequence("alpha must be defined from index 0".into()));
    }
    if w.lo != 0 || w.hi < n_max as i64 {
        return Err(Error::InvalidWindow(format!("window must be 0:H with H >= {n_max}")));
    }
    let sup_f = system
        .column_norm_bound()
        .ok_or_else(|| Error::Precondition("no column norm bound for this system".into()))?;
    let alpha_tail = alpha
        .tail_bound(w.hi, 1)
        .ok_or_else(|| Error::Precondition("alpha has no rigorous tail bound".into()))?;
    let tail_bound = if alpha_tail == 0.0 { 0.0 } else { sup_f * alpha_tail };

    let cols: Vec<Column> = w.indices().map(|l| system.column(l, w.hi)).collect();
    let col_bounds: Vec<f64> = w
        .indices()
        .map(|l| alpha.eval_raw(l).abs() * cols[l as usize].norm_upper())
        .collect();
    let n = w.len();
    let mut t = DMatrix::from_element(n, n, ZERO);
    for (l, c) in cols.iter().enumerate() {
        let a = alpha.eval_raw(l as i64);
        for &(r, z) in &c.entries {
            t[(r as usize, l)] = z * a;
        }
    }
    let errors: Vec<f64> = (0..=n_max)
        .into_par_iter()
        .map(|cut| {
            let mut m = t.clone();
            m.columns_mut(0, cut).fill(ZERO);
            operator_norm(&m)
        })
        .collect();
    let mut bounds = vec![0.0; n_max + 1];
    let mut acc = tail_bound;
    for l in (0..n).rev() {
        acc += col_bounds[l];
        if l <= n_max {
            bounds[l] = acc;
        }
    }
    let mut partial_sums = Vec::with_capacity(n_max + 1);
    let mut s = 0.0;
    for b in col_bounds.iter().take(n_max + 1) {
        s += b;
        partial_sums.push(s);
    }
    let pass = errors.iter().zip(&bounds).all(|(e, b)| *e <= b + BLOWUP_SLACK);
    Ok(BlowupReport {
        alpha: alpha.clone(),
        window: w,
        partial_sums,
        tail_bound,
        errors,
        bounds,
        pass,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub sizes: Vec<usize>,
    /// Norm estimates (lower bounds) of the `N×N` lower-triangular Toeplitz
    /// block with first column `(α_1, …, α_N)`.
    pub norms: Vec<f64>,
    /// `(1/N) Σ_{k=1}^{N} (N−k+1) α_k`.
    pub lower_bounds: Vec<f64>,
    pub norms_nondecreasing: bool,
    pub lower_bounds_nondecreasing: bool,
    /// The last step changed the norm by less than `PLATEAU_TOL` (relative).
    pub bounded_like_plateau: bool,
}

pub const PLATEAU_TOL: f64 = 1e-3;
const POWER_ITERS: usize = 300;

struct ToeplitzLower {
    n: usize,
    len: usize,
    symbol: Vec<Complex<f64>>,
    fft: std::sync::Arc<dyn rustfft::Fft<f64>>,
    ifft: std::sync::Arc<dyn rustfft::Fft<f64>>,
}

impl ToeplitzLower {
    fn new(first_col: &[f64]) -> Self {
        let n = first_col.len();
        let len = (2 * n).next_power_of_two();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(len);
        let ifft = planner.plan_fft_inverse(len);
        let mut symbol: Vec<Complex<f64>> = first_col.iter().map(|&a| Complex::new(a, 0.0)).collect();
        symbol.resize(len, Complex::new(0.0, 0.0));
        fft.process(&mut symbol);
        ToeplitzLower { n, len, symbol, fft, ifft }
    }

    fn convolve(&self, x: &[f64]) -> Vec<f64> {
        let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
        buf.resize(self.len, Complex::new(0.0, 0.0));
        self.fft.process(&mut buf);
        for (b, s) in buf.iter_mut().zip(&self.symbol) {
            *b *= s;
        }
        self.ifft.process(&mut buf);
        let scale = 1.0 / self.len as f64;
        buf[..self.n].iter().map(|z| z.re * scale).collect()
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.convolve(x)
    }

    fn apply_t(&self, x: &[f64]) -> Vec<f64> {
        let rev: Vec<f64> = x.iter().rev().copied().collect();
        let mut y = self.convolve(&rev);
        y.reverse();
        y
    }
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Norm growth of the finite sections of the lower-triangular Toeplitz
/// operator built from `α`. Power iteration on `LᵀL` is warm-started from
/// the previous size, so every estimate is a lower bound and the estimates
/// can only grow with `N`.
pub fn unboundedness_evidence_example35(alpha: &ScalarSeq, sizes: &[usize]) -> Result<GrowthReport> {
    if !alpha.contains(1) {
        return Err(Error::InvalidSequence("alpha must be defined from index 1".into()));
    }
    if sizes.is_empty() || sizes.contains(&0) || sizes.windows(2).any(|p| p[1] < p[0]) {
        return Err(Error::Precondition("sizes must be positive and nondecreasing".into()));
    }
    let mut norms = Vec::new();
    let mut lower = Vec::new();
    let mut warm: Vec<f64> = vec![];
    let mut prev = 0.0f64;
    for &n in sizes {
        let a: Vec<f64> = (1..=n as i64).map(|k| alpha.eval_raw(k)).collect();
        let lb = a
            .iter()
            .enumerate()
            .map(|(k, &v)| (n - k) as f64 * v)
            .sum::<f64>()
            / n as f64;
        lower.push(lb);
        let est = if n == 1 {
            warm = vec![1.0];
            a[0].abs()
        } else {
            let op = ToeplitzLower::new(&a);
            let mut v = warm.clone();
            v.resize(n, 0.0);
            // half-period sine: near-optimal when the symbol peaks at z = 1
            let sine: Vec<f64> = (1..=n)
                .map(|j| (std::f64::consts::PI * j as f64 / (n + 1) as f64).sin())
                .collect();
            let gain = |x: &[f64]| l2(&op.apply(x)) / l2(x);
            if l2(&v) == 0.0 || gain(&sine) > gain(&v) {
                v = sine;
            }
            let nv = l2(&v);
            v.iter_mut().for_each(|x| *x /= nv);
            let mut est = l2(&op.apply(&v));
            for _ in 0..POWER_ITERS {
                let u = op.apply_t(&op.apply(&v));
                let nu = l2(&u);
                if nu == 0.0 {
                    break;
                }
                v = u.into_iter().map(|x| x / nu).collect();
                let e = l2(&op.apply(&v));
                let done = (e - est).abs() <= 1e-14 * e;
                est = est.max(e);
                if done {
                    break;
                }
            }
            warm = v;
            est
        };
        let est = est.max(prev);
        prev = est;
        norms.push(est);
    }
    let nondecreasing = |v: &[f64]| v.windows(2).all(|p| p[1] >= p[0]);
    let plateau = norms.len() >= 2 && {
        let (a, b) = (norms[norms.len() - 2], norms[norms.len() - 1]);
        (b - a).abs() <= PLATEAU_TOL * b.abs()
    };
    Ok(GrowthReport {
        sizes: sizes.to_vec(),
        norms_nondecreasing: nondecreasing(&norms),
        lower_bounds_nondecreasing: nondecreasing(&lower),
        norms,
        lower_bounds: lower,
        bounded_like_plateau: plateau,
    })
}
