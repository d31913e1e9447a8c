//! Asymptotic radii of a weighted shift.
//!
//! For a side of the shift (the nonnegative indices, or the negative ones of
//! a bilateral shift) four radii are defined from the `β` sequence:
//!
//! * `r  = lim_n [sup_k β_{n+k}/β_k]^{1/n}`,
//! * `r1 = lim_n [inf_k β_{n+k}/β_k]^{1/n}`,
//! * `r2 = liminf β_n^{1/n}` and `r3 = limsup β_n^{1/n}`.
//!
//! On the negative side the ratios are `β_j/β_{j−n}` over `j ≤ 0` and the
//! powers are taken of `1/β_{−n}`. Structured tails have closed forms; every
//! other tail is estimated from a finite window and reported with a trace.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::weightspec::{Builtin, ShiftKind, SpecError, TailRule, WeightSpec};

pub const MIN_WINDOW: usize = 64;
pub const DEFAULT_WINDOW: usize = 4096;
pub const INVERTIBILITY_THRESHOLD: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum RadiiError {
    #[error("window {0} is below the minimum of {MIN_WINDOW}")]
    WindowTooSmall(usize),
    #[error("operation needs a bilateral shift")]
    NotBilateral,
    #[error(transparent)]
    Spec(#[from] SpecError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Estimated,
}

/// Closed-form radii `(r1, r2, r3, r)` of a tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactRadii {
    pub r: f64,
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
}

impl ExactRadii {
    fn all(v: f64) -> ExactRadii {
        ExactRadii { r: v, r1: v, r2: v, r3: v }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub n: usize,
    pub r: f64,
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SideRadii {
    pub r: f64,
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub method: Method,
    /// Window estimates at `n = W/8, W/4, W/2, W`; a diagnostic only when
    /// the method is exact.
    pub estimate_trace: Vec<TracePoint>,
    /// Largest change of any radius between the last two trace points; zero
    /// for exact values.
    pub convergence_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiiReport {
    pub kind: ShiftKind,
    pub window: usize,
    pub method: Method,
    /// Radii of the nonnegative side; the only side of a unilateral shift.
    pub plus: SideRadii,
    pub minus: Option<SideRadii>,
    pub invertible: Option<bool>,
    /// `sup ω`, exact for structured tails.
    pub sup_weight: f64,
    pub sup_weight_exact: bool,
}

impl RadiiReport {
    /// `r(T)`: the largest of the side spectral radii.
    pub fn spectral_radius(&self) -> f64 {
        match &self.minus {
            Some(m) => m.r.max(self.plus.r),
            None => self.plus.r,
        }
    }

    /// `1/r(T⁻¹)` for an invertible bilateral shift: the smaller of the two
    /// side values of `r1`.
    pub fn inverse_spectral_radius_reciprocal(&self) -> f64 {
        match &self.minus {
            Some(m) => m.r1.min(self.plus.r1),
            None => self.plus.r1,
        }
    }

    /// Largest convergence gap over both sides.
    pub fn convergence_gap(&self) -> f64 {
        self.minus.as_ref().map_or(0.0, |m| m.convergence_gap).max(self.plus.convergence_gap)
    }

    /// Every ordering the radii must satisfy, as `(description, holds)`
    /// pairs with `slack` tolerance.
    pub fn chain_violations(&self, slack: f64) -> Vec<String> {
        let mut out = Vec::new();
        let mut check = |side: &str, s: &SideRadii| {
            let chain = [("r1", s.r1), ("r2", s.r2), ("r3", s.r3), ("r", s.r)];
            for w in chain.windows(2) {
                if w[0].1 > w[1].1 + slack {
                    out.push(format!("{side}: {} = {} exceeds {} = {}", w[0].0, w[0].1, w[1].0, w[1].1));
                }
            }
            if chain.iter().any(|c| !(c.1 >= 0.0)) {
                out.push(format!("{side}: negative or NaN radius"));
            }
            if s.r > self.sup_weight * (1.0 + slack) + slack {
                out.push(format!("{side}: r = {} exceeds sup weight {}", s.r, self.sup_weight));
            }
        };
        check("plus", &self.plus);
        if let Some(m) = &self.minus {
            check("minus", m);
        }
        out
    }
}

/// Closed-form radii of a tail, when its structure determines them.
pub fn exact_tail_radius(tail: &TailRule) -> Option<ExactRadii> {
    match tail {
        TailRule::Constant(c) => Some(ExactRadii::all(*c)),
        TailRule::Periodic(v) => {
            let mean = v.iter().map(|x| x.ln()).sum::<f64>() / v.len() as f64;
            Some(ExactRadii::all(mean.exp()))
        }
        TailRule::Builtin(Builtin::Bergman) => Some(ExactRadii::all(1.0)),
        TailRule::Builtin(Builtin::WilliamsGap) => {
            let e = std::f64::consts::E;
            Some(ExactRadii { r: e, r1: 0.0, r2: 1.0, r3: e })
        }
        TailRule::Expr { .. } => None,
    }
}

fn trace_points(window: usize) -> [usize; 4] {
    [window / 8, window / 4, window / 2, window]
}

/// Log-domain window estimates at a single `n`. `ratio(k)` must return
/// `log` of the `k`-th ratio of products of `n` consecutive weights and
/// `power(m)` the log of the `m`-th term whose `m`-th root is taken.
fn estimate_at(n: usize, window: usize, ratio: impl Fn(usize) -> f64, power: impl Fn(usize) -> f64) -> TracePoint {
    let (mut hi, mut lo) = (f64::NEG_INFINITY, f64::INFINITY);
    for k in 0..=window {
        let v = ratio(k);
        hi = hi.max(v);
        lo = lo.min(v);
    }
    let (mut r2, mut r3) = (f64::INFINITY, f64::NEG_INFINITY);
    for m in (n / 2).max(1)..=n {
        let v = power(m) / m as f64;
        r2 = r2.min(v);
        r3 = r3.max(v);
    }
    let (r, r1) = (hi / n as f64, lo / n as f64);
    // r1 ≤ r2 and r3 ≤ r hold for the limits; keep the estimates ordered
    TracePoint { n, r: r.max(r3).exp(), r1: r1.min(r2).exp(), r2: r2.exp(), r3: r3.exp() }
}

fn estimate_side(pos: &[f64], neg: &[f64], window: usize, positive: bool) -> Vec<TracePoint> {
    trace_points(window)
        .iter()
        .map(|&n| {
            if positive {
                estimate_at(n, window, |k| pos[n + k] - pos[k], |m| pos[m])
            } else {
                // ratio β_j/β_{j−n} at j = −k; powers of 1/β_{−m}
                estimate_at(n, window, |k| neg[k] - neg[k + n], |m| -neg[m])
            }
        })
        .collect()
}

fn side_from(trace: Vec<TracePoint>, exact: Option<ExactRadii>) -> SideRadii {
    let last = trace[trace.len() - 1];
    let prev = trace[trace.len() - 2];
    match exact {
        Some(e) => SideRadii {
            r: e.r,
            r1: e.r1,
            r2: e.r2,
            r3: e.r3,
            method: Method::Exact,
            estimate_trace: trace,
            convergence_gap: 0.0,
        },
        None => {
            let gap = [(last.r, prev.r), (last.r1, prev.r1), (last.r2, prev.r2), (last.r3, prev.r3)]
                .iter()
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            SideRadii {
                r: last.r,
                r1: last.r1,
                r2: last.r2,
                r3: last.r3,
                method: Method::Estimated,
                estimate_trace: trace,
                convergence_gap: gap,
            }
        }
    }
}

/// Radii of `spec`, exact where the tail structure allows and otherwise
/// estimated from `β` up to index `2·window` on each side.
pub fn estimate_radii(spec: &WeightSpec, window: usize) -> Result<RadiiReport, RadiiError> {
    if window < MIN_WINDOW {
        return Err(RadiiError::WindowTooSmall(window));
    }
    let bilateral = spec.is_bilateral();
    let reach = 2 * window;
    let (plus_trace, minus_trace) = spec.with_log_beta(reach, if bilateral { reach } else { 0 }, |pos, neg| {
        let plus = estimate_side(pos, neg, window, true);
        let minus = bilateral.then(|| estimate_side(pos, neg, window, false));
        (plus, minus)
    })?;
    let plus = side_from(plus_trace, exact_tail_radius(spec.tail_pos()));
    let minus = match (minus_trace, spec.tail_neg()) {
        (Some(trace), Some(tail)) => Some(side_from(trace, exact_tail_radius(tail))),
        _ => None,
    };
    let method = if plus.method == Method::Exact && minus.as_ref().is_none_or(|m| m.method == Method::Exact) {
        Method::Exact
    } else {
        Method::Estimated
    };
    let invertible = if bilateral { Some(bilateral_invertible(spec, window)?) } else { None };
    let sup = spec.sup_weight(window)?;
    Ok(RadiiReport {
        kind: spec.kind(),
        window,
        method,
        plus,
        minus,
        invertible,
        sup_weight: sup.value,
        sup_weight_exact: sup.exact,
    })
}

/// Whether the bilateral shift is invertible, i.e. its weights are bounded
/// away from zero. Expression tails are probed over `window` offsets and
/// additionally rejected when their infimum is still falling.
pub fn bilateral_invertible(spec: &WeightSpec, window: usize) -> Result<bool, RadiiError> {
    if spec.kind() != ShiftKind::Bilateral {
        return Err(RadiiError::NotBilateral);
    }
    let inf = spec.inf_weight(window)?;
    if inf.value <= INVERTIBILITY_THRESHOLD {
        return Ok(false);
    }
    if inf.exact {
        return Ok(true);
    }
    let half = spec.inf_weight(window / 2)?;
    Ok(inf.value / half.value >= 0.75)
}

/// Differences between the estimates at `window` and `2·window` that break
/// the expected sandwich: `r1` growing or `r` shrinking by more than the
/// convergence gap reported at `window`.
pub fn doubling_violations(spec: &WeightSpec, window: usize) -> Result<Vec<String>, RadiiError> {
    let a = estimate_radii(spec, window)?;
    let b = estimate_radii(spec, 2 * window)?;
    let mut out = Vec::new();
    let mut pairs = vec![("plus", &a.plus, &b.plus)];
    if let (Some(x), Some(y)) = (&a.minus, &b.minus) {
        pairs.push(("minus", x, y));
    }
    for (side, x, y) in pairs {
        let slack = x.convergence_gap + 1e-12;
        if y.r1 > x.r1 + slack {
            out.push(format!("{side}: r1 rose from {} to {} on doubling", x.r1, y.r1));
        }
        if y.r < x.r - slack {
            out.push(format!("{side}: r fell from {} to {} on doubling", x.r, y.r));
        }
    }
    Ok(out)
}
