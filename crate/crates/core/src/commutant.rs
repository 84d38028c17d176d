//! Divergence certificates for the entry recurrences that force operators
//! commuting with a weighted shift (or intertwining two diagonal blocks) to
//! vanish off the diagonal, plus a finite-window commutant dimension.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::certificate::{Certificate, Num};
use crate::error::{Error, Result};
use crate::opcore::{singular_values, DenseBlock, C64};
use crate::seqcore::{PartialProduct, ScalarSeq, SeqDomain};

pub const DEFAULT_BOUND: f64 = 1e9;
pub const CROSS_CHECK_TOL: f64 = 1e-12;
pub const MAX_SYLVESTER_N: usize = 64;

fn ratio_of(num: &PartialProduct, den: &PartialProduct) -> f64 {
    if num.log_space || den.log_space {
        (num.ln_abs - den.ln_abs).exp()
    } else {
        num.value / den.value
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else if a.is_finite() && b.is_finite() {
        (a - b).abs() / a.abs().max(b.abs())
    } else {
        f64::INFINITY
    }
}

/// Coefficients `c_i` with `a_{i,i+k} = c_i a_{0,k}` for `-N ≤ i ≤ N`,
/// following `a_{i+1,j+1} = (λ_i/λ_j) a_{i,j}`.
pub fn commutant_ratios(lambda: &ScalarSeq, k: i64, n: i64) -> Vec<(i64, f64)> {
    let mut out = vec![(0, 1.0)];
    let mut c = 1.0f64;
    for i in 1..=n {
        let t = i - 1;
        c *= lambda.eval_raw(t) / lambda.eval_raw(t + k);
        out.push((i, c));
    }
    let mut c = 1.0f64;
    for i in (-n..0).rev() {
        c *= lambda.eval_raw(i + k) / lambda.eval_raw(i);
        out.push((i, c));
    }
    out.sort_by_key(|&(i, _)| i);
    out
}

fn commutant_ratio_via_products(lambda: &ScalarSeq, k: i64, i: i64) -> Result<f64> {
    Ok(match i {
        0 => 1.0,
        i if i > 0 => ratio_of(&lambda.partial_product(0, i - 1)?, &lambda.partial_product(k, i + k - 1)?),
        i => ratio_of(&lambda.partial_product(i + k, k - 1)?, &lambda.partial_product(i, -1)?),
    })
}

/// Certifies that the bounded commutant of the bilateral weighted shift
/// with weights `λ` has `a_{0,k} = 0`: the coefficients `|c_i|` exceed
/// `bound` somewhere in `|i| ≤ N`.
pub fn commutant_obstruction(lambda: &ScalarSeq, k: i64, n: i64, bound: f64) -> Result<Certificate> {
    if k == 0 {
        return Err(Error::Precondition(
            "k = 0 leaves the diagonal unconstrained; use commutant_diagonal_identity".into(),
        ));
    }
    if lambda.domain() != SeqDomain::Bilateral {
        return Err(Error::Precondition("lambda must be bilateral".into()));
    }
    if n < k.abs() + 1 {
        return Err(Error::Precondition(format!("need N >= |k| + 1, got N = {n}, k = {k}")));
    }
    if let Some(i) = lambda.first_nonpositive(n + k.abs()) {
        return Err(Error::NonPositiveWeight {
            index: i,
            value: lambda.eval_raw(i),
        });
    }
    let ratios = commutant_ratios(lambda, k, n);
    let errors: Vec<f64> = ratios
        .par_iter()
        .map(|&(i, c)| commutant_ratio_via_products(lambda, k, i).map(|p| rel_err(c, p)))
        .collect::<Result<_>>()?;
    let (attained, max_ratio) = ratios
        .iter()
        .map(|&(i, c)| (i, c.abs()))
        .fold((0, 0.0f64), |best, cur| if cur.1 >= best.1 { cur } else { best });
    let max_err = errors.iter().copied().fold(0.0f64, f64::max);

    let mut cert = Certificate::new(
        "commutant_obstruction",
        json!({ "k": k, "n": n, "bound": bound }),
    );
    cert.evidence.max_ratio = Some(Num(max_ratio));
    cert.evidence.threshold = Some(Num(bound));
    cert.evidence.index_attained = Some(attained);
    cert.evidence.residuals = errors.iter().copied().map(Num).collect();
    cert.value("max_cross_check_rel_error", max_err);
    cert.series("ratios", ratios.iter().map(|r| r.1));
    cert.pass = max_ratio > bound && max_err <= CROSS_CHECK_TOL;
    Ok(cert)
}

/// With `i = j` the recurrence reads `λ_i a_{i,i} = λ_i a_{i+1,i+1}`: the
/// coefficient linking consecutive diagonal entries is exactly 1.
pub fn commutant_diagonal_identity(lambda: &ScalarSeq, n: i64) -> Result<Certificate> {
    if let Some(i) = lambda.first_nonpositive(n) {
        return Err(Error::NonPositiveWeight {
            index: i,
            value: lambda.eval_raw(i),
        });
    }
    let lo = if lambda.domain() == SeqDomain::Bilateral { -n } else { lambda.first_index().unwrap_or(0) };
    let coefficients: Vec<f64> = (lo..=n).map(|i| lambda.eval_raw(i) / lambda.eval_raw(i)).collect();
    let off = coefficients.iter().filter(|&&c| c != 1.0).count();
    let mut cert = Certificate::new("commutant_diagonal_identity", json!({ "k": 0, "n": n }));
    cert.value("coefficients_not_one", off as f64);
    cert.evidence.threshold = Some(Num(0.0));
    cert.pass = off == 0;
    Ok(cert)
}

/// Certifies that the intertwining equation `γ^j_m a_{m,n} = γ^{j+1}_n a_{m+1,n+1}`
/// admits no bounded nonzero solution: for each `k` the product
/// `(γ^j_0⋯γ^j_m)/(γ^{j+1}_k⋯γ^{j+1}_{m+k})` exceeds `bound` for some `m ≤ N`.
pub fn rosenblum_obstruction(
    gamma_j: &ScalarSeq,
    gamma_j1: &ScalarSeq,
    gap_ratio: f64,
    n: i64,
    ks: &[i64],
    bound: f64,
) -> Result<Certificate> {
    if !(gap_ratio > 1.0) {
        return Err(Error::Precondition(format!("gap ratio must exceed 1, got {gap_ratio}")));
    }
    if ks.is_empty() || n < 0 {
        return Err(Error::Precondition("need N >= 0 and at least one k".into()));
    }
    let kmax = ks.iter().map(|k| k.abs()).max().unwrap();
    let reach = n + kmax + 1;
    for (seq, name) in [(gamma_j, "gamma_j"), (gamma_j1, "gamma_j1")] {
        for idx in [0, reach, ks.iter().copied().min().unwrap().min(0)] {
            if !seq.contains(idx) {
                return Err(Error::IndexOutOfDomain {
                    index: idx,
                    first: seq.first_index().unwrap_or(0),
                });
            }
        }
        if let Some(i) = seq.first_nonpositive(reach) {
            return Err(Error::NonPositiveWeight {
                index: i,
                value: seq.eval_raw(i),
            });
        }
        let _ = name;
    }
    let min_j = (1..=reach).map(|t| gamma_j.eval_raw(t)).fold(f64::INFINITY, f64::min);
    let max_j1 = (1..=reach).map(|t| gamma_j1.eval_raw(t)).fold(0.0f64, f64::max);
    let sampled_gap = min_j / max_j1;
    if sampled_gap < gap_ratio {
        return Err(Error::Precondition(format!(
            "sampled gap {sampled_gap} is below the claimed gap ratio {gap_ratio}"
        )));
    }

    let per_k: Vec<(i64, f64, i64)> = ks
        .par_iter()
        .map(|&k| {
            let mut prod = 1.0f64;
            let mut best = (f64::NEG_INFINITY, 0i64);
            for m in 0..=n {
                prod *= gamma_j.eval_raw(m) / gamma_j1.eval_raw(m + k);
                if prod > best.0 {
                    best = (prod, m);
                }
            }
            (k, best.0, best.1)
        })
        .collect();
    let (worst_k, min_of_max, at_m) = per_k
        .iter()
        .copied()
        .fold((0, f64::INFINITY, 0), |a, c| if c.1 < a.1 { c } else { a });

    let mut cert = Certificate::new(
        "rosenblum_obstruction",
        json!({ "gap_ratio": gap_ratio, "n": n, "ks": ks, "bound": bound }),
    );
    cert.evidence.max_ratio = Some(Num(min_of_max));
    cert.evidence.threshold = Some(Num(bound));
    cert.evidence.index_attained = Some(at_m);
    cert.value("worst_k", worst_k as f64).value("sampled_gap", sampled_gap);
    cert.series("max_product_per_k", per_k.iter().map(|p| p.1));
    cert.pass = min_of_max > bound;
    Ok(cert)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommutantDim {
    pub dimension: usize,
    /// Smallest singular value above the cutoff (`None` when every singular
    /// value is below it).
    pub smallest_nonzero: Option<f64>,
    pub cutoff: f64,
}

/// Dimension of `{X : TX = XT}` for a square block `T`, from the singular
/// values of `X ↦ TX − XT` written as `I⊗T − Tᵀ⊗I`.
pub fn truncated_commutant_dim(block: &DenseBlock, tol: f64) -> Result<CommutantDim> {
    let t = &block.data;
    let n = t.nrows();
    if n != t.ncols() {
        return Err(Error::Precondition(format!("block must be square, got {}x{}", n, t.ncols())));
    }
    if n > MAX_SYLVESTER_N {
        return Err(Error::WindowTooLarge {
            lo: 0,
            hi: n as i64 - 1,
            size: n,
            max: MAX_SYLVESTER_N,
        });
    }
    let nn = n * n;
    let zero = C64::new(0.0, 0.0);
    let mut s = DMatrix::from_element(nn, nn, zero);
    // vec(X) stacks columns: entry (r, c) of X sits at c*n + r
    for c in 0..n {
        for r in 0..n {
            let col = c * n + r;
            for i in 0..n {
                // (T X)_{i,c} gets T_{i,r} X_{r,c}
                s[(c * n + i, col)] += t[(i, r)];
                // (X T)_{r,j} gets X_{r,c} T_{c,j}
                s[(i * n + r, col)] -= t[(c, i)];
            }
        }
    }
    let sv = singular_values(&s);
    let largest = sv.iter().copied().fold(0.0f64, f64::max);
    let cutoff = tol * largest;
    let dimension = sv.iter().filter(|&&x| x <= cutoff).count() + nn.saturating_sub(sv.len());
    let smallest_nonzero = sv.iter().copied().filter(|&x| x > cutoff).fold(None, |m: Option<f64>, x| {
        Some(m.map_or(x, |m| m.min(x)))
    });
    Ok(CommutantDim {
        dimension,
        smallest_nonzero,
        cutoff,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opcore::{OperatorExpr, TruncationWindow};

    fn dyadic() -> ScalarSeq {
        let g = ScalarSeq::geometric(1.0, 0.5).unwrap();
        ScalarSeq::two_sided(g.clone(), g).unwrap()
    }

    #[test]
    fn dyadic_weights_pass() {
        let c = commutant_obstruction(&dyadic(), 1, 30, DEFAULT_BOUND).unwrap();
        assert!(c.pass);
        assert_eq!(c.evidence.index_attained, Some(30));
        assert_eq!(c.evidence.max_ratio, Some(Num(2f64.powi(30))));
    }

    #[test]
    fn constant_weights_fail() {
        for k in [-3, -1, 1, 2, 5] {
            let c = commutant_obstruction(&ScalarSeq::constant_bilateral(1.0), k, 30, DEFAULT_BOUND).unwrap();
            assert!(!c.pass);
            assert!(c.get_series("ratios").unwrap().iter().all(|&r| r == 1.0));
        }
    }

    #[test]
    fn harmonic_closed_form() {
        let h = ScalarSeq::harmonic_shift(1.0, 1.0).unwrap();
        let lambda = ScalarSeq::two_sided(h.clone(), h).unwrap();
        assert_eq!(lambda.eval(-3).unwrap(), 0.25);
        let c = commutant_obstruction(&lambda, 2, 20, 100.0).unwrap();
        assert!(c.pass);
        let ratios = c.get_series("ratios").unwrap();
        for i in 0..=20i64 {
            let expect = ((i + 1) * (i + 2)) as f64 / 2.0;
            assert!((ratios[(i + 20) as usize] - expect).abs() <= 1e-12 * expect);
        }
        assert_eq!(c.evidence.index_attained, Some(20));
    }

    #[test]
    fn ratios_grow_when_weights_vanish() {
        let h = ScalarSeq::harmonic_shift(1.0, 1.0).unwrap();
        for lambda in [dyadic(), ScalarSeq::two_sided(h.clone(), h).unwrap()] {
            for k in [1, 2, 3] {
                let r = commutant_ratios(&lambda, k, 200);
                let tail: Vec<f64> = r.iter().filter(|p| p.0 >= k).map(|p| p.1).collect();
                assert!(tail.windows(2).all(|w| w[1] > w[0]));
                assert!(*tail.last().unwrap() > 100.0);
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(commutant_obstruction(&dyadic(), 0, 30, 1.0).is_err());
        assert!(commutant_obstruction(&dyadic(), 5, 5, 1.0).is_err());
        assert!(commutant_diagonal_identity(&dyadic(), 50).unwrap().pass);
    }

    #[test]
    fn rosenblum_examples() {
        let c = rosenblum_obstruction(&ScalarSeq::constant_bilateral(2.0), &ScalarSeq::constant_bilateral(1.0), 2.0, 30, &[0], DEFAULT_BOUND).unwrap();
        assert!(c.pass);
        assert_eq!(c.evidence.max_ratio, Some(Num(2f64.powi(31))));

        let g = ScalarSeq::constant_bilateral(1.5);
        assert!(rosenblum_obstruction(&g, &g, 1.0, 30, &[0], DEFAULT_BOUND).is_err());
        assert!(rosenblum_obstruction(&g, &g, 1.2, 30, &[0], DEFAULT_BOUND).is_err());

        let hi = ScalarSeq::periodic(vec![1.5, 2.0, 1.75], 0, SeqDomain::Bilateral).unwrap();
        let lo = ScalarSeq::periodic(vec![0.9, 1.0], 0, SeqDomain::Bilateral).unwrap();
        let c = rosenblum_obstruction(&hi, &lo, 1.5, 50, &[-3, -1, 0, 1, 4], DEFAULT_BOUND).unwrap();
        assert!(c.pass);
        for p in c.get_series("max_product_per_k").unwrap() {
            assert!(p >= 1.5f64.powi(51));
        }
    }

    #[test]
    fn commutant_dimensions() {
        let block = |e: OperatorExpr, n: usize| e.truncate(TruncationWindow::prefix(n)).unwrap();
        let id = block(OperatorExpr::identity(SeqDomain::Unilateral), 4);
        assert_eq!(truncated_commutant_dim(&id, 1e-10).unwrap().dimension, 16);
        let d = block(OperatorExpr::diagonal(ScalarSeq::harmonic_shift(1.0, 1.0).unwrap()), 3);
        assert_eq!(truncated_commutant_dim(&d, 1e-10).unwrap().dimension, 3);
        let shift = block(OperatorExpr::weighted_shift(ScalarSeq::constant(1.0)), 5);
        assert_eq!(truncated_commutant_dim(&shift, 1e-10).unwrap().dimension, 5);
    }

    #[test]
    fn jordan_dimension_matches_kronecker_rank() {
        let n = 5;
        let mut j = DMatrix::<f64>::zeros(n, n);
        for i in 0..n - 1 {
            j[(i + 1, i)] = 1.0;
        }
        let id = DMatrix::<f64>::identity(n, n);
        let sylvester = id.kronecker(&j) - j.transpose().kronecker(&id);
        let rank = sylvester.rank(1e-10);
        let shift = OperatorExpr::weighted_shift(ScalarSeq::constant(1.0))
            .truncate(TruncationWindow::prefix(n))
            .unwrap();
        let dim = truncated_commutant_dim(&shift, 1e-10).unwrap().dimension;
        assert_eq!(dim, n * n - rank);
        assert_eq!(dim, 5);
    }

    #[test]
    fn conjugation_invariance() {
        let t = OperatorExpr::weighted_shift(ScalarSeq::geometric(1.0, 0.5).unwrap())
            .truncate(TruncationWindow::prefix(5))
            .unwrap();
        let perm = [3usize, 0, 4, 1, 2];
        let mut p = t.clone();
        for i in 0..5 {
            for j in 0..5 {
                p.data[(perm[i], perm[j])] = t.data[(i, j)];
            }
        }
        let a = truncated_commutant_dim(&t, 1e-10).unwrap().dimension;
        let b = truncated_commutant_dim(&p, 1e-10).unwrap().dimension;
        assert_eq!(a, b);
    }
}
