//! Scalar sequences over ℤ or ℕ with closed forms and exact analytic
//! metadata (limits, extrema, monotonicity, summability).
//!
//! Every kind is a closed form, so metadata is derived from the kind rather
//! than from samples. Composite kinds (`explicit_with_tail`, `offset`,
//! `two_sided`, `arranged`, `split`) derive theirs from their parts; when a
//! derived extremum is only a bound rather than the attained value the
//! corresponding [`HalfMeta::exact`] flag is cleared.
//!
//! Index conventions:
//! * unilateral kinds are defined for `n >= first_index()`; `affine_limit`,
//!   `loglog` and `log_harmonic` start at 1, everything else at 0 unless
//!   stated otherwise;
//! * `two_sided(neg, nonneg)` evaluates `nonneg(n)` for `n >= 0` and
//!   `neg(-n)` for `n < 0`, so `neg` is a unilateral sequence read from 1.

use serde::{Deserialize, Serialize};

use crate::arrangement::{BilateralArrangement, Slot, SplitArrangement};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeqDomain {
    Bilateral,
    Unilateral,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SeqKind {
    /// `c`
    Constant { c: f64 },
    /// `c · r^n`
    Geometric { c: f64, r: f64 },
    /// `c / (n + a)`, `a > 0`
    HarmonicShift { c: f64, a: f64 },
    /// `L + c · n^(-p)`, from `n = 1`
    AffineLimit {
        #[serde(rename = "L")]
        limit: f64,
        c: f64,
        p: f64,
    },
    /// `c / (n · ln²(n + 1))`, from `n = 1`
    Loglog { c: f64 },
    /// `c / (n · ln(n + 1))`, from `n = 1`
    LogHarmonic { c: f64 },
    /// `values[n - start]` on `[start, start + len)`, `tail(n)` elsewhere.
    ExplicitWithTail {
        values: Vec<f64>,
        tail: Box<ScalarSeq>,
        #[serde(default)]
        start: i64,
    },
    TwoSided {
        neg: Box<ScalarSeq>,
        nonneg: Box<ScalarSeq>,
    },
    /// `values[(n - start) mod len]`
    Periodic {
        values: Vec<f64>,
        #[serde(default)]
        start: i64,
    },
    /// `base(n + shift)`
    Offset { base: Box<ScalarSeq>, shift: i64 },
    /// A bilateral sequence read through [`BilateralArrangement`]:
    /// value at basis index `m` is `base(position(m))`.
    Arranged { base: Box<ScalarSeq> },
    /// Values over the [`SplitArrangement`]: shift slots read the bilateral
    /// `shift_part`, diagonal slots read `diagonal_part` from index 1.
    Split {
        shift_part: Box<ScalarSeq>,
        diagonal_part: Box<ScalarSeq>,
    },
}

/// Metadata of one half of a sequence.
///
/// For unilateral sequences there is a single half over `[first, ∞)`. For
/// bilateral sequences the negative half is stored reflected: its index is
/// `m = -n ≥ 1`, so `limit` is the limit at `-∞` and the monotone flags refer
/// to increasing `m`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfMeta {
    pub limit: Option<f64>,
    pub sup: f64,
    pub inf: f64,
    pub nonincreasing: bool,
    pub nondecreasing: bool,
    /// `sup`/`inf` are the attained extended-real extrema rather than bounds.
    pub exact: bool,
}

impl HalfMeta {
    fn constant(v: f64) -> Self {
        HalfMeta {
            limit: Some(v),
            sup: v,
            inf: v,
            nonincreasing: true,
            nondecreasing: true,
            exact: true,
        }
    }

    /// Sequence `c / g(n)` with `g` positive, increasing and unbounded.
    fn reciprocal_growth(c: f64, first_value: f64) -> Self {
        if c == 0.0 {
            return HalfMeta::constant(0.0);
        }
        let (sup, inf) = if c > 0.0 { (first_value, 0.0) } else { (0.0, first_value) };
        HalfMeta {
            limit: Some(0.0),
            sup,
            inf,
            nonincreasing: c > 0.0,
            nondecreasing: c < 0.0,
            exact: true,
        }
    }

    fn geometric(c: f64, r: f64, first: i64) -> Self {
        let v0 = c * powi(r, first);
        if c == 0.0 || r == 1.0 {
            return HalfMeta::constant(v0);
        }
        if r == 0.0 {
            return HalfMeta {
                limit: Some(0.0),
                sup: v0.max(0.0),
                inf: v0.min(0.0),
                nonincreasing: v0 >= 0.0,
                nondecreasing: v0 <= 0.0,
                exact: true,
            };
        }
        if r > 0.0 && r < 1.0 {
            return HalfMeta::reciprocal_growth(c, v0);
        }
        if r > 1.0 {
            let inf_signed = f64::INFINITY.copysign(c);
            let (sup, inf) = if c > 0.0 { (f64::INFINITY, v0) } else { (v0, f64::NEG_INFINITY) };
            return HalfMeta {
                limit: Some(inf_signed),
                sup,
                inf,
                nonincreasing: c < 0.0,
                nondecreasing: c > 0.0,
                exact: true,
            };
        }
        if r > -1.0 {
            let v1 = v0 * r;
            return HalfMeta {
                limit: Some(0.0),
                sup: v0.max(v1),
                inf: v0.min(v1),
                nonincreasing: false,
                nondecreasing: false,
                exact: true,
            };
        }
        let (sup, inf) = if r == -1.0 {
            (c.abs(), -c.abs())
        } else {
            (f64::INFINITY, f64::NEG_INFINITY)
        };
        HalfMeta {
            limit: None,
            sup,
            inf,
            nonincreasing: false,
            nondecreasing: false,
            exact: true,
        }
    }

    /// The same half restricted to indices `>= from`, given `value_at_from`.
    fn restricted(self, value_at_from: f64) -> Self {
        if self.nonincreasing && self.nondecreasing {
            return self;
        }
        let mut out = self;
        if self.nonincreasing {
            out.sup = value_at_from;
        } else if self.nondecreasing {
            out.inf = value_at_from;
        } else {
            out.exact = false;
        }
        out
    }

    /// A finite list of values followed by a half whose first value is
    /// `tail_first`.
    fn prepended(values: &[f64], tail: HalfMeta, tail_first: f64) -> Self {
        if values.is_empty() {
            return tail;
        }
        let mut sup = tail.sup;
        let mut inf = tail.inf;
        for &v in values {
            sup = sup.max(v);
            inf = inf.min(v);
        }
        let last = *values.last().unwrap();
        let list_noninc = values.windows(2).all(|w| w[0] >= w[1]);
        let list_nondec = values.windows(2).all(|w| w[0] <= w[1]);
        HalfMeta {
            limit: tail.limit,
            sup,
            inf,
            nonincreasing: list_noninc && tail.nonincreasing && last >= tail_first,
            nondecreasing: list_nondec && tail.nondecreasing && last <= tail_first,
            exact: tail.exact,
        }
    }

    /// Conservative envelope of several halves (interleavings).
    fn envelope(parts: &[HalfMeta]) -> Self {
        let sup = parts.iter().map(|h| h.sup).fold(f64::NEG_INFINITY, f64::max);
        let inf = parts.iter().map(|h| h.inf).fold(f64::INFINITY, f64::min);
        let first_limit = parts[0].limit;
        let limit = if parts.iter().all(|h| h.limit.is_some() && h.limit == first_limit) {
            first_limit
        } else {
            None
        };
        let constant = sup == inf;
        HalfMeta {
            limit,
            sup,
            inf,
            nonincreasing: constant,
            nondecreasing: constant,
            exact: parts.iter().all(|h| h.exact),
        }
    }

    pub fn has_finite_limit(&self) -> bool {
        self.limit.map_or(false, f64::is_finite)
    }

    pub fn is_monotone(&self) -> bool {
        self.nonincreasing || self.nondecreasing
    }
}

/// Whole-sequence metadata.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeqMeta {
    pub pos: HalfMeta,
    pub neg: Option<HalfMeta>,
    /// Monotone along increasing `n` over the whole domain.
    pub nonincreasing: bool,
    pub nondecreasing: bool,
}

impl SeqMeta {
    pub fn limit_pos(&self) -> Option<f64> {
        self.pos.limit
    }

    pub fn limit_neg(&self) -> Option<f64> {
        self.neg.and_then(|h| h.limit)
    }

    pub fn sup(&self) -> f64 {
        self.neg.map_or(self.pos.sup, |h| h.sup.max(self.pos.sup))
    }

    pub fn inf(&self) -> f64 {
        self.neg.map_or(self.pos.inf, |h| h.inf.min(self.pos.inf))
    }

    pub fn exact(&self) -> bool {
        self.pos.exact && self.neg.map_or(true, |h| h.exact)
    }
}

/// Convergence class of `Σ n^w |a_n|^q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesBehavior {
    Converges,
    Diverges,
    Unknown,
}

impl SeriesBehavior {
    fn combine(self, other: SeriesBehavior) -> SeriesBehavior {
        use SeriesBehavior::*;
        match (self, other) {
            (Diverges, _) | (_, Diverges) => Diverges,
            (Converges, Converges) => Converges,
            _ => Unknown,
        }
    }
}

/// Finite product with its log-space shadow.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartialProduct {
    /// The product as an `f64`; may be `0` or `inf` when `log_space` is set.
    pub value: f64,
    /// `ln |product|` (`-inf` for an exact zero).
    pub ln_abs: f64,
    pub negative: bool,
    /// Accumulation left `[1e-300, 1e300]` and switched to log space.
    pub log_space: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartialSum {
    pub value: f64,
    /// Rigorous upper bound of `Σ_{n>j} |a_n|` when the kind admits one.
    pub tail_bound: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct SeqRepr {
    #[serde(flatten)]
    kind: SeqKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    domain: Option<SeqDomain>,
}

/// Immutable closed-form sequence with exact metadata.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SeqRepr", into = "SeqRepr")]
pub struct ScalarSeq {
    kind: SeqKind,
    domain: SeqDomain,
    first: i64,
    meta: SeqMeta,
}

impl TryFrom<SeqRepr> for ScalarSeq {
    type Error = Error;

    fn try_from(repr: SeqRepr) -> Result<Self> {
        ScalarSeq::with_domain(repr.kind, repr.domain)
    }
}

impl From<ScalarSeq> for SeqRepr {
    fn from(seq: ScalarSeq) -> Self {
        SeqRepr {
            kind: seq.kind,
            domain: Some(seq.domain),
        }
    }
}

const LOG_SPACE_LO: f64 = 1e-300;
const LOG_SPACE_HI: f64 = 1e300;

fn powi(r: f64, n: i64) -> f64 {
    if let Ok(k) = i32::try_from(n) {
        r.powi(k)
    } else {
        r.powf(n as f64)
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidSequence(msg.into())
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("parameter {name} must be finite, got {v}")))
    }
}

impl ScalarSeq {
    pub fn new(kind: SeqKind, domain: SeqDomain) -> Result<Self> {
        Self::with_domain(kind, Some(domain))
    }

    fn with_domain(kind: SeqKind, domain: Option<SeqDomain>) -> Result<Self> {
        let domain = domain.unwrap_or(match &kind {
            SeqKind::TwoSided { .. } => SeqDomain::Bilateral,
            SeqKind::ExplicitWithTail { tail, .. } => tail.domain,
            SeqKind::Offset { base, .. } => base.domain,
            _ => SeqDomain::Unilateral,
        });
        let first = Self::validate(&kind, domain)?;
        let mut seq = ScalarSeq {
            kind,
            domain,
            first,
            meta: SeqMeta {
                pos: HalfMeta::constant(0.0),
                neg: None,
                nonincreasing: true,
                nondecreasing: true,
            },
        };
        seq.meta = seq.compute_meta();
        Ok(seq)
    }

    fn validate(kind: &SeqKind, domain: SeqDomain) -> Result<i64> {
        use SeqDomain::*;
        let unilateral_only = |name: &str| -> Result<()> {
            if domain == Bilateral {
                Err(invalid(format!("{name} is only defined on the unilateral domain")))
            } else {
                Ok(())
            }
        };
        match kind {
            SeqKind::Constant { c } => {
                finite("c", *c)?;
                Ok(0)
            }
            SeqKind::Geometric { c, r } => {
                finite("c", *c)?;
                finite("r", *r)?;
                if domain == Bilateral && *r == 0.0 {
                    return Err(invalid("bilateral geometric sequence needs r != 0"));
                }
                Ok(0)
            }
            SeqKind::HarmonicShift { c, a } => {
                unilateral_only("harmonic_shift")?;
                finite("c", *c)?;
                finite("a", *a)?;
                if *a <= 0.0 {
                    return Err(invalid("harmonic_shift needs a > 0"));
                }
                Ok(0)
            }
            SeqKind::AffineLimit { limit, c, p } => {
                unilateral_only("affine_limit")?;
                finite("L", *limit)?;
                finite("c", *c)?;
                finite("p", *p)?;
                Ok(1)
            }
            SeqKind::Loglog { c } | SeqKind::LogHarmonic { c } => {
                unilateral_only("loglog/log_harmonic")?;
                finite("c", *c)?;
                Ok(1)
            }
            SeqKind::ExplicitWithTail { values, tail, start } => {
                for (k, v) in values.iter().enumerate() {
                    finite(&format!("values[{k}]"), *v)?;
                }
                if tail.domain != domain {
                    return Err(invalid("explicit_with_tail: tail domain differs from sequence domain"));
                }
                if domain == Unilateral {
                    if *start < 0 {
                        return Err(invalid("explicit_with_tail: unilateral start must be >= 0"));
                    }
                    let end = start + values.len() as i64;
                    if tail.first > end {
                        return Err(invalid(format!(
                            "explicit_with_tail: tail starts at {} but is needed from {end}",
                            tail.first
                        )));
                    }
                }
                Ok(*start)
            }
            SeqKind::TwoSided { neg, nonneg } => {
                if domain != Bilateral {
                    return Err(invalid("two_sided is bilateral"));
                }
                if neg.domain != Unilateral || nonneg.domain != Unilateral {
                    return Err(invalid("two_sided branches must be unilateral"));
                }
                if neg.first > 1 {
                    return Err(invalid("two_sided: neg branch must be defined from index 1"));
                }
                if nonneg.first > 0 {
                    return Err(invalid("two_sided: nonneg branch must be defined from index 0"));
                }
                Ok(0)
            }
            SeqKind::Periodic { values, start } => {
                if values.is_empty() {
                    return Err(invalid("periodic sequence needs at least one value"));
                }
                for (k, v) in values.iter().enumerate() {
                    finite(&format!("values[{k}]"), *v)?;
                }
                Ok(if domain == Unilateral { (*start).max(0) } else { 0 })
            }
            SeqKind::Offset { base, shift } => {
                if base.domain != domain {
                    return Err(invalid("offset: domain differs from base domain"));
                }
                Ok((base.first - shift).max(0))
            }
            SeqKind::Arranged { base } => {
                if domain != Unilateral || base.domain != Bilateral {
                    return Err(invalid("arranged maps a bilateral base onto the unilateral domain"));
                }
                Ok(0)
            }
            SeqKind::Split {
                shift_part,
                diagonal_part,
            } => {
                if domain != Unilateral || shift_part.domain != Bilateral {
                    return Err(invalid("split needs a bilateral shift part and a unilateral result"));
                }
                if diagonal_part.domain != Unilateral || diagonal_part.first > 1 {
                    return Err(invalid("split: diagonal part must be unilateral from index 1"));
                }
                Ok(0)
            }
        }
    }

    fn compute_meta(&self) -> SeqMeta {
        match self.domain {
            SeqDomain::Unilateral => {
                let pos = self.unilateral_half();
                SeqMeta {
                    pos,
                    neg: None,
                    nonincreasing: pos.nonincreasing,
                    nondecreasing: pos.nondecreasing,
                }
            }
            SeqDomain::Bilateral => {
                let (pos, neg) = self.bilateral_halves();
                let at_m1 = self.eval_raw(-1);
                let at_0 = self.eval_raw(0);
                SeqMeta {
                    pos,
                    neg: Some(neg),
                    nonincreasing: pos.nonincreasing && neg.nondecreasing && at_m1 >= at_0,
                    nondecreasing: pos.nondecreasing && neg.nonincreasing && at_m1 <= at_0,
                }
            }
        }
    }

    fn unilateral_half(&self) -> HalfMeta {
        let first_value = self.eval_raw(self.first);
        match &self.kind {
            SeqKind::Constant { c } => HalfMeta::constant(*c),
            SeqKind::Geometric { c, r } => HalfMeta::geometric(*c, *r, self.first),
            SeqKind::HarmonicShift { c, .. } | SeqKind::Loglog { c } | SeqKind::LogHarmonic { c } => {
                HalfMeta::reciprocal_growth(*c, first_value)
            }
            SeqKind::AffineLimit { limit, c, p } => {
                if *c == 0.0 || *p == 0.0 {
                    return HalfMeta::constant(limit + c);
                }
                if *p > 0.0 {
                    let mut h = HalfMeta::reciprocal_growth(*c, *c);
                    h.limit = Some(*limit);
                    h.sup += limit;
                    h.inf += limit;
                    h
                } else {
                    let (sup, inf) = if *c > 0.0 {
                        (f64::INFINITY, first_value)
                    } else {
                        (first_value, f64::NEG_INFINITY)
                    };
                    HalfMeta {
                        limit: Some(f64::INFINITY.copysign(*c)),
                        sup,
                        inf,
                        nonincreasing: *c < 0.0,
                        nondecreasing: *c > 0.0,
                        exact: true,
                    }
                }
            }
            SeqKind::ExplicitWithTail { values, tail, start } => {
                let end = start + values.len() as i64;
                HalfMeta::prepended(values, tail.half_from(end), tail.eval_raw(end))
            }
            SeqKind::Periodic { values, .. } => periodic_half(values),
            SeqKind::Offset { base, shift } => base.half_from(self.first + shift),
            SeqKind::Arranged { base } => {
                let m = base.meta;
                let limit = match (m.limit_pos(), m.limit_neg()) {
                    (Some(a), Some(b)) if a == b => Some(a),
                    _ => None,
                };
                let constant = m.sup() == m.inf();
                HalfMeta {
                    limit,
                    sup: m.sup(),
                    inf: m.inf(),
                    nonincreasing: constant,
                    nondecreasing: constant,
                    exact: m.exact(),
                }
            }
            SeqKind::Split {
                shift_part,
                diagonal_part,
            } => {
                let sm = shift_part.meta;
                HalfMeta::envelope(&[sm.pos, sm.neg.unwrap(), diagonal_part.half_from(1)])
            }
            SeqKind::TwoSided { .. } => unreachable!("two_sided is bilateral"),
        }
    }

    fn bilateral_halves(&self) -> (HalfMeta, HalfMeta) {
        match &self.kind {
            SeqKind::Constant { c } => (HalfMeta::constant(*c), HalfMeta::constant(*c)),
            SeqKind::Geometric { c, r } => {
                let pos = HalfMeta::geometric(*c, *r, 0);
                // c r^{-m} = c (1/r)^m for m >= 1
                let neg = HalfMeta::geometric(*c, 1.0 / r, 1);
                (pos, neg)
            }
            SeqKind::TwoSided { neg, nonneg } => (nonneg.half_from(0), neg.half_from(1)),
            SeqKind::Periodic { values, .. } => (periodic_half(values), periodic_half(values)),
            SeqKind::ExplicitWithTail { values, tail, start } => {
                let tm = tail.meta;
                let half = |base: HalfMeta, keep: &dyn Fn(i64) -> bool| {
                    let mut h = base;
                    for (k, v) in values.iter().enumerate() {
                        if keep(start + k as i64) {
                            h.sup = h.sup.max(*v);
                            h.inf = h.inf.min(*v);
                        }
                    }
                    h.nonincreasing = false;
                    h.nondecreasing = false;
                    h.exact = false;
                    h
                };
                (
                    half(tm.pos, &|n| n >= 0),
                    half(tm.neg.unwrap(), &|n| n < 0),
                )
            }
            SeqKind::Offset { base, .. } => {
                let m = base.meta;
                let whole = HalfMeta {
                    limit: None,
                    sup: m.sup(),
                    inf: m.inf(),
                    nonincreasing: false,
                    nondecreasing: false,
                    exact: false,
                };
                let pos = HalfMeta {
                    limit: m.limit_pos(),
                    nonincreasing: m.nonincreasing,
                    nondecreasing: m.nondecreasing,
                    ..whole
                };
                let neg = HalfMeta {
                    limit: m.limit_neg(),
                    nonincreasing: m.nondecreasing,
                    nondecreasing: m.nonincreasing,
                    ..whole
                };
                (pos, neg)
            }
            _ => unreachable!("validated as unilateral-only"),
        }
    }

    /// Metadata of the half `[from, ∞)` of a unilateral sequence.
    fn half_from(&self, from: i64) -> HalfMeta {
        if from <= self.first {
            self.meta.pos
        } else {
            self.meta.pos.restricted(self.eval_raw(from))
        }
    }

    pub fn kind(&self) -> &SeqKind {
        &self.kind
    }

    pub fn domain(&self) -> SeqDomain {
        self.domain
    }

    pub fn meta(&self) -> &SeqMeta {
        &self.meta
    }

    /// First admissible index; `None` on the bilateral domain.
    pub fn first_index(&self) -> Option<i64> {
        match self.domain {
            SeqDomain::Unilateral => Some(self.first),
            SeqDomain::Bilateral => None,
        }
    }

    pub fn contains(&self, n: i64) -> bool {
        self.domain == SeqDomain::Bilateral || n >= self.first
    }

    pub fn eval(&self, n: i64) -> Result<f64> {
        if !self.contains(n) {
            return Err(Error::IndexOutOfDomain {
                index: n,
                first: self.first,
            });
        }
        Ok(self.eval_raw(n))
    }

    /// Evaluation for indices already known to be in the domain.
    pub(crate) fn eval_raw(&self, n: i64) -> f64 {
        match &self.kind {
            SeqKind::Constant { c } => *c,
            SeqKind::Geometric { c, r } => c * powi(*r, n),
            SeqKind::HarmonicShift { c, a } => c / (n as f64 + a),
            SeqKind::AffineLimit { limit, c, p } => limit + c * (n as f64).powf(-p),
            SeqKind::Loglog { c } => {
                let x = n as f64;
                let l = x.ln_1p();
                c / (x * l * l)
            }
            SeqKind::LogHarmonic { c } => {
                let x = n as f64;
                c / (x * x.ln_1p())
            }
            SeqKind::ExplicitWithTail { values, tail, start } => {
                let k = n - start;
                if k >= 0 && (k as usize) < values.len() {
                    values[k as usize]
                } else {
                    tail.eval_raw(n)
                }
            }
            SeqKind::TwoSided { neg, nonneg } => {
                if n >= 0 {
                    nonneg.eval_raw(n)
                } else {
                    neg.eval_raw(-n)
                }
            }
            SeqKind::Periodic { values, start } => values[(n - start).rem_euclid(values.len() as i64) as usize],
            SeqKind::Offset { base, shift } => base.eval_raw(n + shift),
            SeqKind::Arranged { base } => {
                let p = BilateralArrangement.to_position(n).expect("nonnegative index");
                base.eval_raw(p)
            }
            SeqKind::Split {
                shift_part,
                diagonal_part,
            } => match SplitArrangement.slot(n).expect("nonnegative index") {
                Slot::Shift(p) => shift_part.eval_raw(p),
                Slot::Diagonal(m) => diagonal_part.eval_raw(m),
            },
        }
    }

    /// Sign of `a_n` (`-1`, `0` or `1`), decided from the formula where
    /// floating-point evaluation could underflow to zero.
    pub(crate) fn sign_at(&self, n: i64) -> f64 {
        let sign = |x: f64| if x > 0.0 { 1.0 } else if x < 0.0 { -1.0 } else { 0.0 };
        match &self.kind {
            SeqKind::Geometric { c, r } => {
                if n == 0 {
                    sign(*c)
                } else {
                    sign(*c) * if *r < 0.0 && n % 2 != 0 { -1.0 } else { sign(r.abs()) }
                }
            }
            SeqKind::HarmonicShift { c, .. } | SeqKind::Loglog { c } | SeqKind::LogHarmonic { c } => sign(*c),
            SeqKind::ExplicitWithTail { values, tail, start } => {
                let k = n - start;
                if k >= 0 && (k as usize) < values.len() {
                    sign(values[k as usize])
                } else {
                    tail.sign_at(n)
                }
            }
            SeqKind::TwoSided { neg, nonneg } => {
                if n >= 0 {
                    nonneg.sign_at(n)
                } else {
                    neg.sign_at(-n)
                }
            }
            SeqKind::Offset { base, shift } => base.sign_at(n + shift),
            SeqKind::Arranged { base } => base.sign_at(BilateralArrangement.to_position(n).expect("nonnegative index")),
            SeqKind::Split {
                shift_part,
                diagonal_part,
            } => match SplitArrangement.slot(n).expect("nonnegative index") {
                Slot::Shift(p) => shift_part.sign_at(p),
                Slot::Diagonal(m) => diagonal_part.sign_at(m),
            },
            _ => sign(self.eval_raw(n)),
        }
    }

    pub(crate) fn positive_at(&self, n: i64) -> bool {
        self.sign_at(n) > 0.0
    }

    /// First index in `[-radius, radius]` (or `[first, radius]`) whose value is
    /// not strictly positive.
    pub fn first_nonpositive(&self, radius: i64) -> Option<i64> {
        let lo = if self.domain == SeqDomain::Bilateral { -radius } else { self.first };
        (lo..=radius).find(|&n| !self.positive_at(n))
    }

    fn check_range(&self, i: i64, j: i64) -> Result<()> {
        if i > j {
            return Err(Error::Precondition(format!("empty index range {i}..={j}")));
        }
        if !self.contains(i) {
            return Err(Error::IndexOutOfDomain {
                index: i,
                first: self.first,
            });
        }
        Ok(())
    }

    /// `∏_{n=i}^{j} a_n`, switching to log-space accumulation when the
    /// running magnitude leaves `[1e-300, 1e300]`.
    pub fn partial_product(&self, i: i64, j: i64) -> Result<PartialProduct> {
        self.check_range(i, j)?;
        let mut acc = 1.0f64;
        let mut ln_abs = 0.0f64;
        let mut negative = false;
        let mut log_space = false;
        for n in i..=j {
            let x = self.eval_raw(n);
            if x == 0.0 {
                return Ok(PartialProduct {
                    value: 0.0,
                    ln_abs: f64::NEG_INFINITY,
                    negative: false,
                    log_space,
                });
            }
            if log_space {
                ln_abs += x.abs().ln();
                negative ^= x < 0.0;
                continue;
            }
            let next = acc * x;
            let mag = next.abs();
            if (LOG_SPACE_LO..=LOG_SPACE_HI).contains(&mag) {
                acc = next;
            } else {
                log_space = true;
                ln_abs = acc.abs().ln() + x.abs().ln();
                negative = (acc < 0.0) ^ (x < 0.0);
            }
        }
        if log_space {
            let mag = ln_abs.exp();
            Ok(PartialProduct {
                value: if negative { -mag } else { mag },
                ln_abs,
                negative,
                log_space,
            })
        } else {
            Ok(PartialProduct {
                value: acc,
                ln_abs: acc.abs().ln(),
                negative: acc < 0.0,
                log_space,
            })
        }
    }

    /// `Σ_{n=i}^{j} a_n` (compensated), with a tail bound for `Σ_{n>j} |a_n|`.
    pub fn partial_sum(&self, i: i64, j: i64) -> Result<PartialSum> {
        self.check_range(i, j)?;
        let value = neumaier_sum((i..=j).map(|n| self.eval_raw(n)));
        Ok(PartialSum {
            value,
            tail_bound: self.tail_bound(j, 1),
        })
    }

    /// Rigorous upper bound of `Σ_{n>j} |a_n|^q` for `q ∈ {1, 2}` along the
    /// positive direction, when the kind admits one.
    pub fn tail_bound(&self, j: i64, q: u32) -> Option<f64> {
        assert!(q == 1 || q == 2, "tail bounds are provided for q = 1, 2");
        let s = match self.domain {
            SeqDomain::Unilateral => (j + 1).max(self.first),
            SeqDomain::Bilateral => (j + 1).max(0),
        };
        // absorb rounding in the closed forms so the bound stays an upper bound
        self.bound_from(s, q).map(|b| b * (1.0 + 1e-12))
    }

    /// Upper bound of `Σ_{n>=s} |a_n|^q`, `s` in the domain.
    fn bound_from(&self, s: i64, q: u32) -> Option<f64> {
        let qf = q as f64;
        let term = |n: i64| self.eval_raw(n).abs().powi(q as i32);
        match &self.kind {
            SeqKind::Constant { c } => (*c == 0.0).then_some(0.0),
            SeqKind::Geometric { c, r } => {
                if *c == 0.0 {
                    Some(0.0)
                } else if r.abs() < 1.0 {
                    let rq = r.abs().powi(q as i32);
                    Some(c.abs().powi(q as i32) * powi(rq, s) / (1.0 - rq))
                } else {
                    None
                }
            }
            SeqKind::HarmonicShift { c, a } => match q {
                _ if *c == 0.0 => Some(0.0),
                2 => Some(term(s) + c * c / (s as f64 + a)),
                _ => None,
            },
            SeqKind::AffineLimit { limit, c, p } => {
                if *c == 0.0 && *limit == 0.0 {
                    return Some(0.0);
                }
                let e = p * qf;
                if *limit != 0.0 || e <= 1.0 {
                    return None;
                }
                let x = s as f64;
                Some(c.abs().powi(q as i32) * (x.powf(-e) + x.powf(1.0 - e) / (e - 1.0)))
            }
            SeqKind::Loglog { c } => {
                if *c == 0.0 {
                    return Some(0.0);
                }
                if q == 1 {
                    if s == 1 {
                        return Some(term(1) + self.bound_from(2, 1)?);
                    }
                    // Σ_{n>s} f(n) <= ∫_s^∞ c dx / (x ln² x) = c / ln s
                    Some(term(s) + c.abs() / (s as f64).ln())
                } else {
                    let x = s as f64;
                    Some(term(s) + c * c / (x.ln_1p().powi(4) * x))
                }
            }
            SeqKind::LogHarmonic { c } => match q {
                _ if *c == 0.0 => Some(0.0),
                2 => {
                    let x = s as f64;
                    Some(term(s) + c * c / (x.ln_1p().powi(2) * x))
                }
                _ => None,
            },
            SeqKind::ExplicitWithTail { values, tail, start } => {
                let end = start + values.len() as i64;
                if s >= end {
                    tail.bound_from(s, q)
                } else {
                    let head: f64 = (s.max(*start)..end).map(term).sum();
                    let before: f64 = (s..*start).map(term).sum();
                    Some(head + before + tail.bound_from(end, q)?)
                }
            }
            SeqKind::TwoSided { nonneg, .. } => nonneg.bound_from(s.max(0), q),
            SeqKind::Periodic { values, .. } => values.iter().all(|v| *v == 0.0).then_some(0.0),
            SeqKind::Offset { base, shift } => {
                let t = s + shift;
                if base.contains(t) && (base.domain == SeqDomain::Unilateral || t >= 0) {
                    base.bound_from(t, q)
                } else {
                    None
                }
            }
            SeqKind::Arranged { .. } | SeqKind::Split { .. } => None,
        }
    }

    /// Convergence class of `Σ n^w |a_n|^q` (over `|n|` for bilateral kinds).
    pub fn series_behavior(&self, w: u32, q: u32) -> SeriesBehavior {
        use SeriesBehavior::*;
        let e = q as f64 - w as f64;
        let by_power = |c: f64, exponent: f64| {
            if c == 0.0 || exponent > 1.0 {
                Converges
            } else {
                Diverges
            }
        };
        // Bertrand series Σ 1/(n^e ln^b n)
        let bertrand = |c: f64, b: f64| {
            if c == 0.0 || e > 1.0 || (e == 1.0 && b > 1.0) {
                Converges
            } else {
                Diverges
            }
        };
        match &self.kind {
            SeqKind::Constant { c } => by_power(*c, 0.0),
            SeqKind::Geometric { c, r } => {
                let pos = if *c == 0.0 || r.abs() < 1.0 { Converges } else { Diverges };
                if self.domain == SeqDomain::Bilateral && *c != 0.0 && r.abs() <= 1.0 {
                    // the negative side grows like |1/r|^m
                    Diverges
                } else {
                    pos
                }
            }
            SeqKind::HarmonicShift { c, .. } => by_power(*c, e),
            SeqKind::AffineLimit { limit, c, p } => {
                if *limit != 0.0 {
                    Diverges
                } else {
                    by_power(*c, p * q as f64 - w as f64)
                }
            }
            SeqKind::Loglog { c } => bertrand(*c, 2.0 * q as f64),
            SeqKind::LogHarmonic { c } => bertrand(*c, q as f64),
            SeqKind::ExplicitWithTail { tail, .. } => tail.series_behavior(w, q),
            SeqKind::Periodic { values, .. } => by_power(values.iter().map(|v| v.abs()).fold(0.0, f64::max), 0.0),
            SeqKind::TwoSided { neg, nonneg } => neg.series_behavior(w, q).combine(nonneg.series_behavior(w, q)),
            SeqKind::Offset { base, .. } | SeqKind::Arranged { base } => base.series_behavior(w, q),
            SeqKind::Split {
                shift_part,
                diagonal_part,
            } => shift_part.series_behavior(w, q).combine(diagonal_part.series_behavior(w, q)),
        }
    }

    /// Kinds whose limits at both ends are known in closed form and reached
    /// monotonically: constants and two-sided sequences with monotone branches.
    pub fn has_proven_limit_structure(&self) -> bool {
        match &self.kind {
            SeqKind::Constant { .. } => true,
            SeqKind::TwoSided { .. } => {
                let pos = self.meta.pos;
                let neg = self.meta.neg.unwrap();
                pos.is_monotone() && neg.is_monotone() && pos.has_finite_limit() && neg.has_finite_limit()
            }
            _ => false,
        }
    }
}

/// Convenience constructors.
impl ScalarSeq {
    pub fn constant(c: f64) -> Self {
        Self::new(SeqKind::Constant { c }, SeqDomain::Unilateral).expect("finite constant")
    }

    pub fn constant_bilateral(c: f64) -> Self {
        Self::new(SeqKind::Constant { c }, SeqDomain::Bilateral).expect("finite constant")
    }

    pub fn geometric(c: f64, r: f64) -> Result<Self> {
        Self::new(SeqKind::Geometric { c, r }, SeqDomain::Unilateral)
    }

    pub fn harmonic_shift(c: f64, a: f64) -> Result<Self> {
        Self::new(SeqKind::HarmonicShift { c, a }, SeqDomain::Unilateral)
    }

    pub fn affine_limit(limit: f64, c: f64, p: f64) -> Result<Self> {
        Self::new(SeqKind::AffineLimit { limit, c, p }, SeqDomain::Unilateral)
    }

    pub fn loglog(c: f64) -> Result<Self> {
        Self::new(SeqKind::Loglog { c }, SeqDomain::Unilateral)
    }

    pub fn log_harmonic(c: f64) -> Result<Self> {
        Self::new(SeqKind::LogHarmonic { c }, SeqDomain::Unilateral)
    }

    pub fn explicit_with_tail(values: Vec<f64>, tail: ScalarSeq, start: i64) -> Result<Self> {
        let domain = tail.domain;
        Self::new(
            SeqKind::ExplicitWithTail {
                values,
                tail: Box::new(tail),
                start,
            },
            domain,
        )
    }

    pub fn two_sided(neg: ScalarSeq, nonneg: ScalarSeq) -> Result<Self> {
        Self::new(
            SeqKind::TwoSided {
                neg: Box::new(neg),
                nonneg: Box::new(nonneg),
            },
            SeqDomain::Bilateral,
        )
    }

    pub fn periodic(values: Vec<f64>, start: i64, domain: SeqDomain) -> Result<Self> {
        Self::new(SeqKind::Periodic { values, start }, domain)
    }

    pub fn offset(base: ScalarSeq, shift: i64) -> Result<Self> {
        let domain = base.domain;
        Self::new(
            SeqKind::Offset {
                base: Box::new(base),
                shift,
            },
            domain,
        )
    }

    pub fn arranged(base: ScalarSeq) -> Result<Self> {
        Self::new(SeqKind::Arranged { base: Box::new(base) }, SeqDomain::Unilateral)
    }

    pub fn split(shift_part: ScalarSeq, diagonal_part: ScalarSeq) -> Result<Self> {
        Self::new(
            SeqKind::Split {
                shift_part: Box::new(shift_part),
                diagonal_part: Box::new(diagonal_part),
            },
            SeqDomain::Unilateral,
        )
    }
}

fn periodic_half(values: &[f64]) -> HalfMeta {
    let sup = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let inf = values.iter().copied().fold(f64::INFINITY, f64::min);
    let constant = sup == inf;
    HalfMeta {
        limit: constant.then_some(sup),
        sup,
        inf,
        nonincreasing: constant,
        nondecreasing: constant,
        exact: true,
    }
}

/// Neumaier-compensated summation.
pub fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn half() -> ScalarSeq {
        ScalarSeq::geometric(1.0, 0.5).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(half().eval(3).unwrap(), 0.125);
        assert_eq!(ScalarSeq::harmonic_shift(1.0, 1.0).unwrap().eval(0).unwrap(), 1.0);
        let ts = ScalarSeq::two_sided(ScalarSeq::constant(2.0), ScalarSeq::constant(0.5)).unwrap();
        assert_eq!(ts.eval(-4).unwrap(), 2.0);
        assert_eq!(ts.eval(0).unwrap(), 0.5);
    }

    #[test]
    fn eval_outside_domain() {
        assert!(matches!(half().eval(-1), Err(Error::IndexOutOfDomain { index: -1, .. })));
        assert!(ScalarSeq::loglog(1.0).unwrap().eval(0).is_err());
        assert!(ScalarSeq::constant_bilateral(1.0).eval(-1_000_000).is_ok());
    }

    #[test]
    fn product_examples() {
        assert_eq!(ScalarSeq::constant(2.0).partial_product(0, 4).unwrap().value, 32.0);
        assert_eq!(half().partial_product(0, 3).unwrap().value, 1.0 / 64.0);
        let h = ScalarSeq::harmonic_shift(1.0, 1.0).unwrap();
        let mut factorial = 1.0f64;
        for n in 1..=20i64 {
            factorial *= n as f64;
            let p = h.partial_product(0, n - 1).unwrap().value;
            assert!((p * factorial - 1.0).abs() < 1e-14, "n={n}");
        }
        assert!(ScalarSeq::constant(1.0).partial_product(3, 2).is_err());
    }

    #[test]
    fn product_switches_to_log_space() {
        let big = ScalarSeq::constant(1e10);
        let p = big.partial_product(0, 99).unwrap();
        assert!(p.log_space);
        assert!((p.ln_abs - 1000.0 * 10f64.ln()).abs() < 1e-9);
        assert!(p.value.is_infinite());
        let tiny = ScalarSeq::constant(-1e-10);
        let p = tiny.partial_product(0, 40).unwrap();
        assert!(p.log_space && p.negative && p.value == 0.0);
    }

    #[test]
    fn sum_examples() {
        let s = half().partial_sum(0, 0).unwrap();
        assert_eq!(s.value, 1.0);
        let b = s.tail_bound.unwrap();
        assert!(b >= 1.0 && b - 1.0 < 1e-11);
        assert_eq!(ScalarSeq::constant(1.0).partial_sum(1, 10).unwrap().value, 10.0);
        assert_eq!(ScalarSeq::constant(1.0).partial_sum(1, 10).unwrap().tail_bound, None);
    }

    #[test]
    fn loglog_sum_matches_direct_summation() {
        let s = ScalarSeq::loglog(1.0).unwrap();
        let n_max = 10_000i64;
        let mut direct = 0.0f64;
        for n in 2..=n_max {
            let x = n as f64;
            direct += 1.0 / (x * (x + 1.0).ln().powi(2));
        }
        let got = s.partial_sum(2, n_max).unwrap().value;
        assert!((got - direct).abs() <= 1e-12 * direct.max(1.0), "{got} vs {direct}");
    }

    #[test]
    fn tail_bounds_dominate_direct_sums() {
        let seqs = [
            (ScalarSeq::geometric(1.0, 0.5).unwrap(), 1),
            (ScalarSeq::geometric(0.5, 0.9).unwrap(), 2),
            (ScalarSeq::loglog(1.0).unwrap(), 1),
            (ScalarSeq::loglog(1.0).unwrap(), 2),
            (ScalarSeq::log_harmonic(1.0).unwrap(), 2),
            (ScalarSeq::harmonic_shift(1.0, 1.0).unwrap(), 2),
            (ScalarSeq::affine_limit(0.0, 2.0, 1.5).unwrap(), 1),
        ];
        let big_j = 1_000_000i64;
        for (seq, q) in &seqs {
            for j in [0i64, 1, 2, 5, 17, 100, 1000] {
                let bound = seq.tail_bound(j, *q).expect("bound exists");
                let start = (j + 1).max(seq.first_index().unwrap());
                let direct = neumaier_sum((start..=big_j).map(|n| seq.eval(n).unwrap().abs().powi(*q as i32)));
                assert!(direct <= bound, "{:?} q={q} j={j}: {direct} > {bound}", seq.kind());
            }
        }
    }

    #[test]
    fn series_classification() {
        let ll = ScalarSeq::loglog(1.0).unwrap();
        assert_eq!(ll.series_behavior(1, 2), SeriesBehavior::Converges);
        // Σ 1/(n ln² n) converges as well
        assert_eq!(ll.series_behavior(0, 1), SeriesBehavior::Converges);
        let lh = ScalarSeq::log_harmonic(1.0).unwrap();
        assert_eq!(lh.series_behavior(1, 2), SeriesBehavior::Converges);
        assert_eq!(lh.series_behavior(0, 1), SeriesBehavior::Diverges);
        assert_eq!(ScalarSeq::constant(1.0).series_behavior(1, 2), SeriesBehavior::Diverges);
        assert_eq!(ScalarSeq::constant(0.0).series_behavior(1, 2), SeriesBehavior::Converges);
    }

    #[test]
    fn metadata_examples() {
        let ts = ScalarSeq::two_sided(ScalarSeq::constant(2.0), ScalarSeq::constant(0.5)).unwrap();
        let m = ts.meta();
        assert_eq!(m.limit_pos(), Some(0.5));
        assert_eq!(m.limit_neg(), Some(2.0));
        assert_eq!((m.sup(), m.inf()), (2.0, 0.5));
        assert!(m.nonincreasing && !m.nondecreasing);
        assert!(ts.has_proven_limit_structure());

        let beta = ScalarSeq::affine_limit(2.0, 1.0, 1.0).unwrap();
        assert_eq!(beta.meta().pos.sup, 3.0);
        assert_eq!(beta.meta().pos.inf, 2.0);
        assert_eq!(beta.meta().limit_pos(), Some(2.0));
        assert!(beta.meta().nonincreasing);
    }

    #[test]
    fn json_descriptor_round_trip() {
        let json = r#"{"kind":"geometric","c":1.0,"r":0.5,"domain":"unilateral"}"#;
        let seq: ScalarSeq = serde_json::from_str(json).unwrap();
        assert_eq!(seq.eval(3).unwrap(), 0.125);
        assert_eq!(serde_json::to_string(&seq).unwrap(), json);
        let nested = r#"{"kind":"two_sided","neg":{"kind":"constant","c":2.0},"nonneg":{"kind":"affine_limit","L":1.0,"c":-0.5,"p":1.0}}"#;
        assert!(serde_json::from_str::<ScalarSeq>(nested).is_err(), "nonneg branch must start at 0");
        let bad = r#"{"kind":"loglog","c":1.0,"domain":"bilateral"}"#;
        assert!(serde_json::from_str::<ScalarSeq>(bad).is_err());
    }

    fn arb_seq() -> impl Strategy<Value = ScalarSeq> {
        let leaf = prop_oneof![
            (-3.0..3.0f64).prop_map(ScalarSeq::constant),
            (-3.0..3.0f64, -1.5..1.5f64).prop_map(|(c, r)| ScalarSeq::geometric(c, r).unwrap()),
            (-3.0..3.0f64, 0.1..4.0f64).prop_map(|(c, a)| ScalarSeq::harmonic_shift(c, a).unwrap()),
            (-2.0..2.0f64, -2.0..2.0f64, -1.0..2.0f64)
                .prop_map(|(l, c, p)| ScalarSeq::offset(ScalarSeq::affine_limit(l, c, p).unwrap(), 1).unwrap()),
            (-2.0..2.0f64).prop_map(|c| ScalarSeq::offset(ScalarSeq::loglog(c).unwrap(), 1).unwrap()),
            prop::collection::vec(-3.0..3.0f64, 1..5)
                .prop_map(|v| ScalarSeq::periodic(v, 0, SeqDomain::Unilateral).unwrap()),
        ];
        prop_oneof![
            leaf.clone(),
            (prop::collection::vec(-5.0..5.0f64, 0..6), leaf.clone())
                .prop_map(|(v, t)| ScalarSeq::explicit_with_tail(v, t, 0).unwrap()),
        ]
    }

    proptest! {
        #[test]
        fn metadata_consistent_with_samples(seq in arb_seq()) {
            let m = *seq.meta();
            let vals: Vec<f64> = (0..200).map(|n| seq.eval(n).unwrap()).collect();
            for v in &vals {
                prop_assert!(m.inf() <= *v + 1e-12 && *v <= m.sup() + 1e-12);
            }
            if m.nonincreasing {
                prop_assert!(vals.windows(2).all(|w| w[0] >= w[1]));
            }
            if m.nondecreasing {
                prop_assert!(vals.windows(2).all(|w| w[0] <= w[1]));
            }
        }

        #[test]
        fn bilateral_metadata_consistent(a in -3.0..3.0f64, b in 0.1..3.0f64, r in 0.2..0.95f64) {
            let seq = ScalarSeq::two_sided(
                ScalarSeq::geometric(a, r).unwrap(),
                ScalarSeq::harmonic_shift(b, 1.0).unwrap(),
            ).unwrap();
            let m = *seq.meta();
            let vals: Vec<f64> = (-100..100).map(|n| seq.eval(n).unwrap()).collect();
            for v in &vals {
                prop_assert!(m.inf() <= *v && *v <= m.sup());
            }
            if m.nonincreasing {
                prop_assert!(vals.windows(2).all(|w| w[0] >= w[1]));
            }
            if m.nondecreasing {
                prop_assert!(vals.windows(2).all(|w| w[0] <= w[1]));
            }
        }

        #[test]
        fn products_split_multiplicatively(c in 0.2..3.0f64, r in 0.5..1.5f64, i in 0i64..40, l1 in 0i64..40, l2 in 1i64..40) {
            let seq = ScalarSeq::geometric(c, r).unwrap();
            let j = i + l1;
            let k = j + l2;
            let left = seq.partial_product(i, j).unwrap();
            let right = seq.partial_product(j + 1, k).unwrap();
            let whole = seq.partial_product(i, k).unwrap();
            if whole.log_space || left.log_space || right.log_space {
                let err = (left.ln_abs + right.ln_abs - whole.ln_abs).abs();
                prop_assert!(err <= 1e-12 * whole.ln_abs.abs().max(1.0));
            } else {
                prop_assert!((left.value * right.value - whole.value).abs() <= 1e-12 * whole.value.abs());
            }
        }

        #[test]
        fn eval_matches_closed_form(c in -3.0..3.0f64, a in 0.1..5.0f64, n in 0i64..10_000) {
            let h = ScalarSeq::harmonic_shift(c, a).unwrap();
            prop_assert_eq!(h.eval(n).unwrap(), c / (n as f64 + a));
            let ll = ScalarSeq::loglog(c).unwrap();
            let m = n + 1;
            let x = m as f64;
            let expected = c / (x * (x + 1.0).ln().powi(2));
            prop_assert!((ll.eval(m).unwrap() - expected).abs() <= 1e-15 * expected.abs());
        }
    }
}
