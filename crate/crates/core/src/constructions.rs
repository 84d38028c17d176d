//! Explicit operator models: diagonal data rearranged into weighted shifts
//! (Cases 1-3) and the eigenvalue-excluding weight design of Case 4.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::arrangement::{BilateralArrangement, Slot, SplitArrangement};
use crate::certificate::{Certificate, Num};
use crate::error::{Error, Result};
use crate::opcore::{operator_norm, Arrangement, OperatorExpr, ShiftLayout, TruncationWindow, C64};
use crate::schauder::{natural_projection_block, SchauderSystem};
use crate::seqcore::{neumaier_sum, ScalarSeq, SeqDomain};
use crate::spectral::{fredholm_index_certificate, shift_spectrum, SpectrumDescriptor, SpectrumShape};

/// Indices sampled when a strict monotonicity or positivity claim cannot be
/// read from metadata alone.
const SAMPLE_HORIZON: i64 = 4096;

fn strictly(seq: &ScalarSeq, from: i64, decreasing: bool) -> bool {
    let meta = seq.meta().pos;
    let flag = if decreasing { meta.nonincreasing } else { meta.nondecreasing };
    flag && (from..from + SAMPLE_HORIZON).all(|n| {
        let (a, b) = (seq.eval_raw(n), seq.eval_raw(n + 1));
        if decreasing {
            a > b
        } else {
            a < b
        }
    })
}

fn require_unilateral_from(seq: &ScalarSeq, first: i64, name: &str) -> Result<()> {
    if seq.domain() != SeqDomain::Unilateral || !seq.contains(first) {
        return Err(Error::Precondition(format!(
            "{name} must be a unilateral sequence defined from index {first}"
        )));
    }
    Ok(())
}

/// Diagonal data split into a decreasing run `β`, an increasing run `α` and
/// the remaining values `γ`, together with the rearranged operators.
#[derive(Clone, Debug, Serialize)]
pub struct Case1Model {
    /// `β_1 > β_2 > … → λ_max`
    pub beta: ScalarSeq,
    /// `α_1 < α_2 < … → λ_min`
    pub alpha: ScalarSeq,
    /// `γ_1, γ_2, …` in `[λ_min, λ_max]`
    pub gamma: ScalarSeq,
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// Bilateral weights `(…, β_2, β_1, α_1, α_2, …)`: position `p < 0`
    /// carries `β_{-p}`, position `p ≥ 0` carries `α_{p+1}`.
    pub shift_weights: ScalarSeq,
    /// The shift part `B` on ℤ.
    pub b: OperatorExpr,
    /// The diagonal part `D` on ℕ, `D e_m = γ_{m+1} e_m`.
    pub d: OperatorExpr,
    /// `T + K₁` over the split basis `f_0, f_1, …`.
    pub diagonal_model: OperatorExpr,
    /// `U₁(T + K₁)` over the same basis.
    pub composite: OperatorExpr,
}

/// Validates the run conditions and assembles the Case 1 operators.
pub fn build_case1_model(beta: ScalarSeq, alpha: ScalarSeq, gamma: ScalarSeq) -> Result<Case1Model> {
    for (seq, name) in [(&beta, "beta"), (&alpha, "alpha"), (&gamma, "gamma")] {
        require_unilateral_from(seq, 1, name)?;
    }
    if !strictly(&beta, 1, true) {
        return Err(Error::Precondition("beta must be strictly decreasing".into()));
    }
    if !strictly(&alpha, 1, false) {
        return Err(Error::Precondition("alpha must be strictly increasing".into()));
    }
    let lambda_max = beta
        .meta()
        .limit_pos()
        .filter(|l| l.is_finite())
        .ok_or_else(|| Error::Precondition("beta needs a finite limit".into()))?;
    let lambda_min = alpha
        .meta()
        .limit_pos()
        .filter(|l| l.is_finite())
        .ok_or_else(|| Error::Precondition("alpha needs a finite limit".into()))?;
    if !(lambda_min < lambda_max) {
        return Err(Error::Precondition(format!(
            "need lambda_min < lambda_max, got {lambda_min} and {lambda_max}"
        )));
    }
    let alpha_1 = alpha.eval_raw(1);
    if alpha_1 <= 0.0 {
        return Err(Error::NonPositiveWeight { index: 1, value: alpha_1 });
    }
    let g = gamma.meta().pos;
    let (g_inf, g_sup) = if gamma.first_index() == Some(1) {
        (g.inf, g.sup)
    } else {
        // restrict to indices ≥ 1 by sampling the extra leading values out
        let tail = ScalarSeq::offset(gamma.clone(), 1)?;
        (tail.meta().pos.inf, tail.meta().pos.sup)
    };
    if g_inf < lambda_min || g_sup > lambda_max {
        return Err(Error::Precondition(format!(
            "gamma values [{g_inf}, {g_sup}] leave [{lambda_min}, {lambda_max}]"
        )));
    }

    let shift_weights = ScalarSeq::two_sided(beta.clone(), ScalarSeq::offset(alpha.clone(), 1)?)?;
    let b = OperatorExpr::weighted_shift(shift_weights.clone());
    let d = OperatorExpr::diagonal(ScalarSeq::offset(gamma.clone(), 1)?);
    let diagonal_model = OperatorExpr::diagonal(ScalarSeq::split(shift_weights.clone(), gamma.clone())?);
    let composite = OperatorExpr::product(vec![
        OperatorExpr::shift_down(ShiftLayout::Split),
        diagonal_model.clone(),
    ]);
    Ok(Case1Model {
        beta,
        alpha,
        gamma,
        lambda_min,
        lambda_max,
        shift_weights,
        b,
        d,
        diagonal_model,
        composite,
    })
}

impl Case1Model {
    /// Entry of `B ⊕ D` at split-basis indices `(i, j)`.
    fn direct_sum_entry(&self, i: i64, j: i64) -> C64 {
        let s = SplitArrangement;
        match (s.slot(i).unwrap(), s.slot(j).unwrap()) {
            (Slot::Shift(p), Slot::Shift(q)) => self.b.entry_raw(p, q),
            (Slot::Diagonal(m), Slot::Diagonal(n)) => self.d.entry_raw(m - 1, n - 1),
            _ => C64::new(0.0, 0.0),
        }
    }

    /// `truncate(U₁(T+K₁)) = truncate(B ⊕ D)` entrywise with tolerance 0 on
    /// the split-basis window holding shift positions `-radius..=radius`.
    pub fn block_identity(&self, radius: i64) -> Result<Certificate> {
        let s = SplitArrangement;
        let hi = s.index(Slot::Shift(radius)).unwrap().max(s.index(Slot::Shift(-radius)).unwrap());
        let w = TruncationWindow::new(0, hi)?;
        let block = self.composite.truncate(w)?;
        let mut mismatches = 0usize;
        let mut max_diff = 0.0f64;
        let mut nonzero = 0usize;
        for (r, &i) in block.row_labels.iter().enumerate() {
            for (c, &j) in block.col_labels.iter().enumerate() {
                let got = block.data[(r, c)];
                let expect = self.direct_sum_entry(i, j);
                if got != expect {
                    mismatches += 1;
                    max_diff = max_diff.max((got - expect).norm());
                }
                if got != C64::new(0.0, 0.0) {
                    nonzero += 1;
                }
            }
        }
        // B itself against (…, β_2, β_1, α_1, α_2, …) read off the raw runs
        let bw = TruncationWindow::symmetric(radius);
        let bb = self.b.truncate(bw)?;
        let mut weight_mismatch = 0usize;
        for p in -radius..radius {
            let expect = if p < 0 {
                self.beta.eval_raw(-p)
            } else {
                self.alpha.eval_raw(p + 1)
            };
            if bb.entry(p + 1, p) != Some(C64::new(expect, 0.0)) {
                weight_mismatch += 1;
            }
        }
        let mut cert = Certificate::new("case1_block_identity", json!({ "radius": radius, "window": w }));
        cert.value("mismatches", mismatches as f64)
            .value("max_abs_difference", max_diff)
            .value("nonzero_entries", nonzero as f64)
            .value("shift_weight_mismatches", weight_mismatch as f64);
        cert.evidence.threshold = Some(Num(0.0));
        cert.pass = mismatches == 0 && weight_mismatch == 0;
        Ok(cert)
    }

    /// Spectrum of `B` and containment of every `γ` in it.
    pub fn connectedness(&self) -> Result<(SpectrumDescriptor, Certificate)> {
        let spectrum = shift_spectrum(&self.shift_weights)?;
        let tail = ScalarSeq::offset(self.gamma.clone(), 1)?;
        let (g_inf, g_sup) = (tail.meta().pos.inf, tail.meta().pos.sup);
        let expected = SpectrumShape::Annulus {
            r_in: self.lambda_min,
            r_out: self.lambda_max,
        };
        let mut cert = Certificate::new(
            "case1_connected_spectrum",
            json!({ "lambda_min": self.lambda_min, "lambda_max": self.lambda_max }),
        );
        cert.value("gamma_inf", g_inf).value("gamma_sup", g_sup);
        if let SpectrumShape::Annulus { r_in, r_out } = spectrum.shape {
            cert.value("r_in", r_in).value("r_out", r_out);
        }
        cert.pass = spectrum.shape == expected && spectrum.contains_modulus(g_inf) && spectrum.contains_modulus(g_sup);
        Ok((spectrum, cert))
    }
}

/// The Case 2 model: a diagonal with eigenvalues accumulating only at 0,
/// rearranged by a unitary into a bilateral weighted shift.
#[derive(Clone, Debug, Serialize)]
pub struct Case2Model {
    pub lambda: ScalarSeq,
    /// `UT` as a bilateral weighted shift on ℤ.
    pub direct: OperatorExpr,
    /// `Product(ShiftDownUnitary, Diagonal(λ))` on ℤ.
    pub factored: OperatorExpr,
    /// `T = diag(λ_0, λ_1, λ_{-1}, λ_2, …)` on ℕ.
    pub diagonal: OperatorExpr,
    /// `U T` on ℕ with `U` the shift along the interleaved order.
    pub natural: OperatorExpr,
    /// `P* (U T) P` with `P: e_p ↦ e_{arr(p)}`, back on ℤ.
    pub conjugated: OperatorExpr,
}

pub fn build_case2_model(lambda: ScalarSeq) -> Result<Case2Model> {
    if lambda.domain() != SeqDomain::Bilateral {
        return Err(Error::Precondition("lambda must be bilateral".into()));
    }
    if let Some(n) = lambda.first_nonpositive(SAMPLE_HORIZON) {
        return Err(Error::NonPositiveWeight {
            index: n,
            value: lambda.eval_raw(n),
        });
    }
    let meta = lambda.meta();
    if meta.inf() < 0.0 {
        return Err(Error::NonPositiveWeight {
            index: 0,
            value: meta.inf(),
        });
    }
    if meta.limit_pos() != Some(0.0) || meta.limit_neg() != Some(0.0) {
        return Err(Error::Precondition(format!(
            "lambda must tend to 0 in both directions (limits {:?}, {:?})",
            meta.limit_neg(),
            meta.limit_pos()
        )));
    }
    let direct = OperatorExpr::weighted_shift(lambda.clone());
    let factored = OperatorExpr::product(vec![
        OperatorExpr::shift_down(ShiftLayout::Bilateral),
        OperatorExpr::diagonal(lambda.clone()),
    ]);
    let diagonal = OperatorExpr::diagonal(ScalarSeq::arranged(lambda.clone())?);
    let natural = OperatorExpr::product(vec![OperatorExpr::shift_down(ShiftLayout::Interleaved), diagonal.clone()]);
    let p = OperatorExpr::permutation(Arrangement::Bilateral);
    let conjugated = OperatorExpr::product(vec![OperatorExpr::adjoint(p.clone()), natural.clone(), p]);
    Ok(Case2Model {
        lambda,
        direct,
        factored,
        diagonal,
        natural,
        conjugated,
    })
}

impl Case2Model {
    /// The factored, rearranged and conjugated forms agree with the direct
    /// weighted shift entrywise (tolerance 0) on positions `-radius..=radius`.
    pub fn factorization_identity(&self, radius: i64) -> Result<Certificate> {
        let w = TruncationWindow::symmetric(radius);
        let direct = self.direct.truncate(w)?;
        let factored = self.factored.truncate(w)?;
        let conjugated = self.conjugated.truncate_rect(w, w, usize::MAX)?;
        let arr = BilateralArrangement;
        let mut natural_mismatch = 0usize;
        for (r, &i) in direct.row_labels.iter().enumerate() {
            for (c, &j) in direct.col_labels.iter().enumerate() {
                if self.natural.entry_raw(arr.to_basis(i), arr.to_basis(j)) != direct.data[(r, c)] {
                    natural_mismatch += 1;
                }
            }
        }
        let count = |a: &nalgebra::DMatrix<C64>| a.iter().zip(direct.data.iter()).filter(|(x, y)| x != y).count();
        let factored_mismatch = count(&factored.data);
        let conjugated_mismatch = count(&conjugated.data);
        let mut cert = Certificate::new("case2_factorization", json!({ "radius": radius }));
        cert.value("factored_mismatches", factored_mismatch as f64)
            .value("rearranged_mismatches", natural_mismatch as f64)
            .value("conjugated_mismatches", conjugated_mismatch as f64);
        cert.evidence.threshold = Some(Num(0.0));
        cert.pass = factored_mismatch == 0 && natural_mismatch == 0 && conjugated_mismatch == 0;
        Ok(cert)
    }
}

/// The Case 3 model: a bilateral shift glued from a sequence `λ → 0` on the
/// nonnegative side and weights `η` bounded away above it on the negative side.
#[derive(Clone, Debug, Serialize)]
pub struct Case3Model {
    pub weights: ScalarSeq,
    pub shift: OperatorExpr,
    pub gap: (f64, f64),
    /// `(sup λ + inf η) / 2`
    pub lambda_star: f64,
    pub index_certificate: Certificate,
}

pub fn build_case3_model(lambda: ScalarSeq, eta: ScalarSeq, window: TruncationWindow) -> Result<Case3Model> {
    require_unilateral_from(&lambda, 0, "lambda")?;
    require_unilateral_from(&eta, 1, "eta")?;
    if lambda.meta().limit_pos() != Some(0.0) {
        return Err(Error::Precondition("lambda must tend to 0".into()));
    }
    let weights = ScalarSeq::two_sided(eta, lambda)?;
    let gap = crate::spectral::weight_gap(&weights)?;
    let lambda_star = 0.5 * (gap.0 + gap.1);
    let index_certificate = fredholm_index_certificate(&weights, C64::new(lambda_star, 0.0), window)?;
    Ok(Case3Model {
        shift: OperatorExpr::weighted_shift(weights.clone()),
        weights,
        gap,
        lambda_star,
        index_certificate,
    })
}

/// How a Case 4 design produces `γ_n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum DesignRule {
    /// `γ_n = η²` for `n ≡ 0 (mod 3)`; the `m`-th other index (`m = 1, 2, …`)
    /// gets `η² · s_{m}/s_{m-1}` with `s_m = √(2/(m+2))`, so after `M` such
    /// indices the profile is `P = √(2/(M+2))`.
    Thirds,
    /// Any unilateral sequence (used for deliberately invalid designs).
    Explicit { gamma: ScalarSeq },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Case4WeightDesign {
    pub lambda_lo: f64,
    pub eta_sq: f64,
    pub lambda_hi: f64,
    pub horizon: usize,
    pub rule: DesignRule,
    /// `γ_0 … γ_{N-1}`
    pub gamma: Vec<f64>,
    /// Indices `< N` with `γ_n = η²` exactly.
    pub exact_indices: Vec<usize>,
    /// `P_1 … P_N` with `P_n = γ_0⋯γ_{n-1} / (η²)^n`.
    pub profile: Vec<f64>,
    /// `P_n ≥ 1/√n` for every `n ≤ N`.
    pub profile_ok: bool,
}

fn thirds_factor(m: u64) -> f64 {
    // s_m / s_{m-1} with s_m = sqrt(2/(m+2))
    ((m + 1) as f64 / (m + 2) as f64).sqrt()
}

impl Case4WeightDesign {
    /// `γ_n` for any `n ≥ 0`, following the rule past the horizon.
    pub fn gamma_at(&self, n: usize) -> f64 {
        match &self.rule {
            DesignRule::Thirds => {
                if n % 3 == 0 {
                    self.eta_sq
                } else {
                    let m = (n - n / 3 - 1) as u64 + 1;
                    self.eta_sq * thirds_factor(m)
                }
            }
            DesignRule::Explicit { gamma } => gamma.eval_raw(n as i64),
        }
    }

    /// Unchecked design from an explicit sequence; the invariant is evaluated
    /// and recorded in `profile_ok` but not enforced.
    pub fn from_sequence(eta_sq: f64, gamma: ScalarSeq, horizon: usize) -> Result<Self> {
        require_unilateral_from(&gamma, 0, "gamma")?;
        let meta = gamma.meta().pos;
        let mut d = Case4WeightDesign {
            lambda_lo: meta.inf,
            eta_sq,
            lambda_hi: meta.sup,
            horizon,
            rule: DesignRule::Explicit { gamma },
            gamma: vec![],
            exact_indices: vec![],
            profile: vec![],
            profile_ok: false,
        };
        d.fill();
        Ok(d)
    }

    fn fill(&mut self) {
        self.gamma = (0..self.horizon).map(|n| self.gamma_at(n)).collect();
        self.exact_indices = (0..self.horizon).filter(|&n| self.gamma[n] == self.eta_sq).collect();
        let mut p = 1.0f64;
        self.profile = self
            .gamma
            .iter()
            .map(|g| {
                p *= g / self.eta_sq;
                p
            })
            .collect();
        self.profile_ok = self
            .profile
            .iter()
            .enumerate()
            .all(|(k, &pn)| pn >= 1.0 / ((k + 1) as f64).sqrt());
    }

    /// Exact-η² indices make up at least a third of every prefix of length ≥ 9.
    pub fn density_ok(&self) -> bool {
        (9..=self.horizon).all(|len| {
            let count = self.exact_indices.iter().take_while(|&&n| n < len).count();
            3 * count >= len
        })
    }
}

/// Builds the Case 4 weights on `0..horizon` and verifies `P_n ≥ 1/√n`
/// exhaustively.
pub fn design_case4_weights(lambda_lo: f64, eta_sq: f64, lambda_hi: f64, horizon: usize) -> Result<Case4WeightDesign> {
    if !(lambda_lo < eta_sq && eta_sq < lambda_hi) {
        return Err(Error::Precondition(format!(
            "need lambda_lo < eta^2 < lambda_hi, got {lambda_lo}, {eta_sq}, {lambda_hi}"
        )));
    }
    if horizon < 9 {
        return Err(Error::Precondition("horizon must be at least 9".into()));
    }
    // the smallest value the schedule ever uses is η² s_1/s_0
    let smallest = eta_sq * thirds_factor(1);
    if smallest <= lambda_lo {
        return Err(Error::Infeasible(format!(
            "schedule needs gamma = {smallest} which is not above lambda_lo = {lambda_lo}"
        )));
    }
    let mut d = Case4WeightDesign {
        lambda_lo,
        eta_sq,
        lambda_hi,
        horizon,
        rule: DesignRule::Thirds,
        gamma: vec![],
        exact_indices: vec![],
        profile: vec![],
        profile_ok: false,
    };
    d.fill();
    if !d.profile_ok {
        return Err(Error::Infeasible("profile bound P_n >= 1/sqrt(n) failed".into()));
    }
    Ok(d)
}

pub const EXCLUSION_FACTOR: f64 = 0.9;

/// Divergence evidence for the formal eigenvector of `η²`: with
/// `|x_{n+1}/x_0| = P_{n+1}` from the forward recursion, certifies
/// `Σ_{n=1}^{N} P_n² ≥ 0.9 ln N`.
pub fn eigenvalue_exclusion_check(design: &Case4WeightDesign, n_max: usize) -> Certificate {
    let mut p = 1.0f64;
    let mut min_scaled = f64::INFINITY;
    let mut samples = Vec::new();
    let mut next_sample = 1usize;
    let terms = (0..n_max).map(|n| {
        p *= design.gamma_at(n) / design.eta_sq;
        let k = n + 1;
        min_scaled = min_scaled.min(p * (k as f64).sqrt());
        if k == next_sample {
            samples.push(p);
            next_sample *= 10;
        }
        p * p
    });
    let sum = neumaier_sum(terms);
    let threshold = EXCLUSION_FACTOR * (n_max as f64).ln();
    let mut cert = Certificate::new(
        "eigenvalue_exclusion",
        json!({ "eta_sq": design.eta_sq, "n": n_max, "factor": EXCLUSION_FACTOR }),
    );
    cert.value("partial_sum", sum)
        .value("min_sqrt_n_profile", min_scaled)
        .series("profile_at_powers_of_ten", samples);
    cert.evidence.threshold = Some(Num(threshold));
    cert.evidence.max_ratio = Some(Num(sum));
    cert.pass = sum >= threshold;
    cert
}

/// Relative slack for comparing singular values computed by different
/// routes.
pub const SANDWICH_REL_TOL: f64 = 1e-12;
/// Slack on the norm preconditions (absolute).
pub const NORM_PRE_TOL: f64 = 1e-12;

/// For `k = 1..=K` checks `(1+δ)^{-2}‖Q_k‖ ≤ ‖X Q_k X^{-1}‖ ≤ (1+δ)²‖Q_k‖` on
/// `w`, after verifying `‖X‖, ‖X^{-1}‖ ≤ 1 + δ/2` and `X X^{-1} = I` there.
pub fn disturbance_sandwich_check(
    system: &SchauderSystem,
    x: &OperatorExpr,
    x_inv: &OperatorExpr,
    delta: f64,
    k_max: usize,
    w: TruncationWindow,
) -> Result<Certificate> {
    if !(delta >= 0.0) {
        return Err(Error::Precondition(format!("delta must be nonnegative, got {delta}")));
    }
    let xb = x.truncate(w)?;
    let ib = x_inv.truncate(w)?;
    let limit = 1.0 + delta / 2.0;
    let (nx, ni) = (operator_norm(&xb.data), operator_norm(&ib.data));
    if nx > limit + NORM_PRE_TOL || ni > limit + NORM_PRE_TOL {
        return Err(Error::Precondition(format!(
            "need ||X||, ||X^-1|| <= {limit}, got {nx} and {ni}"
        )));
    }
    let mut prod = &xb.data * &ib.data;
    for i in 0..prod.nrows() {
        prod[(i, i)] -= C64::new(1.0, 0.0);
    }
    let inverse_residual = operator_norm(&prod);
    if inverse_residual > 1e-10 {
        return Err(Error::Precondition(format!(
            "X * X_inv differs from I on the window by {inverse_residual:e}"
        )));
    }
    let lo_factor = (1.0 + delta).powi(-2);
    let hi_factor = (1.0 + delta).powi(2);
    let rows: Vec<(f64, f64)> = (1..=k_max)
        .into_par_iter()
        .map(|k| {
            let delta_set: Vec<i64> = (0..k as i64).collect();
            let q = natural_projection_block(system, &delta_set, w)?;
            let conj = &xb.data * &q.data * &ib.data;
            Ok((operator_norm(&q.data), operator_norm(&conj)))
        })
        .collect::<Result<_>>()?;
    let mut worst_lower = f64::INFINITY;
    let mut worst_upper = f64::INFINITY;
    let mut violations = 0usize;
    for &(m, mp) in &rows {
        let slack = SANDWICH_REL_TOL * m.max(mp);
        let lower_gap = mp - lo_factor * m;
        let upper_gap = hi_factor * m - mp;
        worst_lower = worst_lower.min(lower_gap);
        worst_upper = worst_upper.min(upper_gap);
        if lower_gap < -slack || upper_gap < -slack {
            violations += 1;
        }
    }
    let m = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    let m_prime = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let mut cert = Certificate::new(
        "disturbance_sandwich",
        json!({ "delta": delta, "k": k_max, "window": w }),
    );
    cert.value("m", m)
        .value("m_prime", m_prime)
        .value("x_norm", nx)
        .value("x_inv_norm", ni)
        .value("inverse_residual", inverse_residual)
        .value("min_lower_gap", worst_lower)
        .value("min_upper_gap", worst_upper)
        .value("violations", violations as f64)
        .series("q_norms", rows.iter().map(|r| r.0))
        .series("conjugated_norms", rows.iter().map(|r| r.1));
    cert.pass = violations == 0;
    Ok(cert)
}
