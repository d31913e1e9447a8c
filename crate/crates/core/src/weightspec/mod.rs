//! Finite descriptions of positive weight sequences.
//!
//! A [`WeightSpec`] lists an explicit prefix of weights on each side of the
//! origin and a [`TailRule`] that generates everything past the prefix. The
//! cumulative products `β_n` are only ever handled through their logarithms
//! `L(n) = log β_n`, cached lazily per side.

pub mod expr;

use std::fmt;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use expr::{Expr, ExprError};

/// Indices probed for positivity and finiteness at parse time.
pub const PARSE_PROBE: usize = 64;
/// Indices probed per side when certifying boundedness of expression tails.
pub const DEFAULT_BOUND_WINDOW: usize = 4096;
/// Probed weights above this are treated as evidence of an unbounded tail.
pub const DEFAULT_SUP_CAP: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("weight at index {index} is not positive ({value})")]
    NonPositiveWeight { index: i64, value: f64 },
    #[error("weight at index {index} is not finite")]
    NonFiniteWeight { index: i64 },
    #[error("weight at index {index} is not representable as a double (log weight {log_weight})")]
    Unrepresentable { index: i64, log_weight: f64 },
    #[error("unilateral spec carries negative-side data ({0})")]
    UnilateralNegativeData(&'static str),
    #[error("bilateral spec is missing tail_neg")]
    MissingNegativeTail,
    #[error("negative index {0} on a unilateral spec")]
    NegativeIndex(i64),
    #[error("weight {value} at index {index} exceeds the boundedness cap {cap}; tail looks unbounded")]
    Unbounded { index: i64, value: f64, cap: f64 },
    #[error("invalid tail rule: {0}")]
    InvalidTail(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShiftKind {
    Unilateral,
    Bilateral,
}

impl fmt::Display for ShiftKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ShiftKind::Unilateral => write!(f, "unilateral"),
            ShiftKind::Bilateral => write!(f, "bilateral"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Builtin {
    /// `ω_n = sqrt((n+1)/(n+2))`, so `β_n = 1/sqrt(n+1)`.
    Bergman,
    /// Weights of the sequence with `β_{m!+k} = e^k` for `0 ≤ k < (m+1)! − m!`.
    WilliamsGap,
}

/// Rule generating weights past the explicit prefix, indexed by the
/// nonnegative offset from the end of the prefix.
#[derive(Debug, Clone)]
pub enum TailRule {
    Constant(f64),
    Periodic(Vec<f64>),
    Expr { source: String, parsed: Expr },
    Builtin(Builtin),
}

impl PartialEq for TailRule {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (TailRule::Constant(a), TailRule::Constant(b)) => a == b,
            (TailRule::Periodic(a), TailRule::Periodic(b)) => a == b,
            (TailRule::Expr { source: a, .. }, TailRule::Expr { source: b, .. }) => a == b,
            (TailRule::Builtin(a), TailRule::Builtin(b)) => a == b,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
enum TailDoc {
    Constant(f64),
    Periodic(Vec<f64>),
    Expr(String),
    Builtin(Builtin),
}

impl Serialize for TailRule {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let doc = match self {
            TailRule::Constant(c) => TailDoc::Constant(*c),
            TailRule::Periodic(v) => TailDoc::Periodic(v.clone()),
            TailRule::Expr { source, .. } => TailDoc::Expr(source.clone()),
            TailRule::Builtin(b) => TailDoc::Builtin(*b),
        };
        doc.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for TailRule {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let doc = TailDoc::deserialize(deserializer)?;
        Ok(match doc {
            TailDoc::Constant(c) => TailRule::Constant(c),
            TailDoc::Periodic(v) => TailRule::Periodic(v),
            TailDoc::Expr(source) => {
                let parsed = Expr::parse(&source).map_err(serde::de::Error::custom)?;
                TailRule::Expr { source, parsed }
            }
            TailDoc::Builtin(b) => TailRule::Builtin(b),
        })
    }
}

/// `log β_s` for the factorial-run sequence: `s − m!` where `m! ≤ s < (m+1)!`.
pub fn williams_log_beta(s: u64) -> f64 {
    if s <= 1 {
        return 0.0;
    }
    let mut fact: u64 = 1;
    let mut m: u64 = 1;
    loop {
        let next = fact.saturating_mul(m + 1);
        if next > s || next == u64::MAX {
            return (s - fact) as f64;
        }
        fact = next;
        m += 1;
    }
}

impl TailRule {
    pub fn expr(source: &str) -> Result<TailRule, ExprError> {
        Ok(TailRule::Expr { source: source.to_string(), parsed: Expr::parse(source)? })
    }

    /// Weight at tail offset `j`; may be zero, negative or non-finite for
    /// expression tails, which the caller validates.
    pub fn raw_weight(&self, j: usize) -> f64 {
        match self {
            TailRule::Constant(c) => *c,
            TailRule::Periodic(values) => values[j % values.len()],
            TailRule::Expr { parsed, .. } => parsed.eval(j as f64),
            TailRule::Builtin(_) => self.builtin_log_weight(j).exp(),
        }
    }

    fn builtin_log_weight(&self, j: usize) -> f64 {
        match self {
            TailRule::Builtin(Builtin::Bergman) => {
                let n = j as f64;
                0.5 * ((n + 1.0).ln() - (n + 2.0).ln())
            }
            TailRule::Builtin(Builtin::WilliamsGap) => {
                let s = j as u64;
                williams_log_beta(s + 1) - williams_log_beta(s)
            }
            _ => unreachable!("not a builtin"),
        }
    }

    /// Logarithm of the weight at tail offset `j`. Builtins are evaluated in
    /// log domain so that weights below the double range stay usable.
    pub fn log_weight(&self, j: usize) -> Option<f64> {
        match self {
            TailRule::Builtin(_) => Some(self.builtin_log_weight(j)),
            _ => {
                let w = self.raw_weight(j);
                (w.is_finite() && w > 0.0).then(|| w.ln())
            }
        }
    }

    /// Whether sup, inf, monotonicity and radii of the tail are known in
    /// closed form.
    pub fn is_structured(&self) -> bool {
        !matches!(self, TailRule::Expr { .. })
    }

    pub fn exact_sup(&self) -> Option<f64> {
        match self {
            TailRule::Constant(c) => Some(*c),
            TailRule::Periodic(v) => v.iter().copied().reduce(f64::max),
            TailRule::Expr { .. } => None,
            TailRule::Builtin(Builtin::Bergman) => Some(1.0),
            TailRule::Builtin(Builtin::WilliamsGap) => Some(std::f64::consts::E),
        }
    }

    pub fn exact_inf(&self) -> Option<f64> {
        match self {
            TailRule::Constant(c) => Some(*c),
            TailRule::Periodic(v) => v.iter().copied().reduce(f64::min),
            TailRule::Expr { .. } => None,
            TailRule::Builtin(Builtin::Bergman) => Some(0.5f64.sqrt()),
            TailRule::Builtin(Builtin::WilliamsGap) => Some(0.0),
        }
    }

    /// Whether the tail (on its own, in offset order) is nondecreasing.
    pub fn exact_nondecreasing(&self) -> Option<bool> {
        match self {
            TailRule::Constant(_) => Some(true),
            TailRule::Periodic(v) => Some(v.iter().all(|&x| x == v[0])),
            TailRule::Expr { .. } => None,
            TailRule::Builtin(Builtin::Bergman) => Some(true),
            TailRule::Builtin(Builtin::WilliamsGap) => Some(false),
        }
    }

    /// Whether the tail is nonincreasing in offset order.
    pub fn exact_nonincreasing(&self) -> Option<bool> {
        match self {
            TailRule::Constant(_) => Some(true),
            TailRule::Periodic(v) => Some(v.iter().all(|&x| x == v[0])),
            TailRule::Expr { .. } => None,
            TailRule::Builtin(_) => Some(false),
        }
    }

    fn validate(&self) -> Result<(), SpecError> {
        match self {
            TailRule::Constant(c) if !(c.is_finite() && *c > 0.0) => {
                Err(SpecError::InvalidTail(format!("constant {c} must be positive and finite")))
            }
            TailRule::Periodic(v) if v.is_empty() => {
                Err(SpecError::InvalidTail("periodic tail needs at least one value".into()))
            }
            TailRule::Periodic(v) => match v.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
                Some(bad) => Err(SpecError::InvalidTail(format!("periodic value {bad} must be positive and finite"))),
                None => Ok(()),
            },
            _ => Ok(()),
        }
    }
}

/// `L(n) = log β_n` per side, extended on demand.
#[derive(Debug, Default)]
struct LogBetaCache {
    /// `pos[i] = L(i)`.
    pos: Vec<f64>,
    /// `neg[i] = L(-i)`.
    neg: Vec<f64>,
}

/// A validated, immutable weight sequence.
#[derive(Debug, Clone)]
pub struct WeightSpec {
    kind: ShiftKind,
    name: Option<String>,
    prefix_pos: Vec<f64>,
    prefix_neg: Vec<f64>,
    tail_pos: TailRule,
    tail_neg: Option<TailRule>,
    cache: Arc<RwLock<LogBetaCache>>,
}

impl PartialEq for WeightSpec {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
            && self.name == other.name
            && self.prefix_pos == other.prefix_pos
            && self.prefix_neg == other.prefix_neg
            && self.tail_pos == other.tail_pos
            && self.tail_neg == other.tail_neg
    }
}

/// On-disk form of a [`WeightSpec`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecDocument {
    pub kind: ShiftKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default)]
    pub prefix_pos: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub prefix_neg: Vec<f64>,
    pub tail_pos: TailRule,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_neg: Option<TailRule>,
}

/// Sup or inf of the weights together with whether it is exact or only
/// taken over a probe window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightBound {
    pub value: f64,
    pub exact: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct ParseOptions {
    pub bound_window: usize,
    pub sup_cap: f64,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions { bound_window: DEFAULT_BOUND_WINDOW, sup_cap: DEFAULT_SUP_CAP }
    }
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(text.len());
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    kind: ShiftKind,
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    prefix_pos: Vec<f64>,
    #[serde(default)]
    prefix_neg: Vec<f64>,
    tail_pos: TailDoc,
    #[serde(default)]
    tail_neg: Option<TailDoc>,
}

/// Builds a tail, reporting expression syntax errors in document
/// coordinates.
fn tail_from_doc(text: &str, doc: TailDoc) -> Result<TailRule, SpecError> {
    Ok(match doc {
        TailDoc::Constant(c) => TailRule::Constant(c),
        TailDoc::Periodic(v) => TailRule::Periodic(v),
        TailDoc::Builtin(b) => TailRule::Builtin(b),
        TailDoc::Expr(source) => match Expr::parse(&source) {
            Ok(parsed) => TailRule::Expr { source, parsed },
            Err(err) => {
                let (line, column) = match text.find(&source) {
                    Some(at) => {
                        let (l, c) = line_column(text, at);
                        (l, c + err.column - 1)
                    }
                    None => (1, err.column),
                };
                return Err(SpecError::Parse { line, column, message: err.message });
            }
        },
    })
}

/// Parses and validates a spec document.
pub fn parse_weight_spec(text: &str) -> Result<WeightSpec, SpecError> {
    parse_weight_spec_with(text, ParseOptions::default())
}

pub fn parse_weight_spec_with(text: &str, options: ParseOptions) -> Result<WeightSpec, SpecError> {
    let raw: RawDocument = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((1, 1), |span| line_column(text, span.start));
        SpecError::Parse { line, column, message: e.message().to_string() }
    })?;
    let doc = SpecDocument {
        kind: raw.kind,
        name: raw.name,
        prefix_pos: raw.prefix_pos,
        prefix_neg: raw.prefix_neg,
        tail_pos: tail_from_doc(text, raw.tail_pos)?,
        tail_neg: raw.tail_neg.map(|t| tail_from_doc(text, t)).transpose()?,
    };
    WeightSpec::from_document(doc, options)
}

/// Evaluates a weight at a signed index.
pub fn weight_at(spec: &WeightSpec, n: i64) -> Result<f64, SpecError> {
    spec.weight_at(n)
}

/// `log β_n`.
pub fn log_beta(spec: &WeightSpec, n: i64) -> Result<f64, SpecError> {
    spec.log_beta(n)
}

impl WeightSpec {
    pub fn from_document(doc: SpecDocument, options: ParseOptions) -> Result<WeightSpec, SpecError> {
        match doc.kind {
            ShiftKind::Unilateral => {
                if !doc.prefix_neg.is_empty() {
                    return Err(SpecError::UnilateralNegativeData("prefix_neg"));
                }
                if doc.tail_neg.is_some() {
                    return Err(SpecError::UnilateralNegativeData("tail_neg"));
                }
            }
            ShiftKind::Bilateral => {
                if doc.tail_neg.is_none() {
                    return Err(SpecError::MissingNegativeTail);
                }
            }
        }
        for (i, &w) in doc.prefix_pos.iter().enumerate() {
            check_weight(i as i64, w)?;
        }
        for (i, &w) in doc.prefix_neg.iter().enumerate() {
            check_weight(-(i as i64) - 1, w)?;
        }
        doc.tail_pos.validate()?;
        if let Some(t) = &doc.tail_neg {
            t.validate()?;
        }
        let spec = WeightSpec {
            kind: doc.kind,
            name: doc.name,
            prefix_pos: doc.prefix_pos,
            prefix_neg: doc.prefix_neg,
            tail_pos: doc.tail_pos,
            tail_neg: doc.tail_neg,
            cache: Arc::new(RwLock::new(LogBetaCache { pos: vec![0.0], neg: vec![0.0] })),
        };
        spec.probe(options)?;
        Ok(spec)
    }

    pub fn unilateral(prefix: Vec<f64>, tail: TailRule) -> Result<WeightSpec, SpecError> {
        WeightSpec::from_document(
            SpecDocument {
                kind: ShiftKind::Unilateral,
                name: None,
                prefix_pos: prefix,
                prefix_neg: Vec::new(),
                tail_pos: tail,
                tail_neg: None,
            },
            ParseOptions::default(),
        )
    }

    pub fn bilateral(
        prefix_pos: Vec<f64>,
        tail_pos: TailRule,
        prefix_neg: Vec<f64>,
        tail_neg: TailRule,
    ) -> Result<WeightSpec, SpecError> {
        WeightSpec::from_document(
            SpecDocument {
                kind: ShiftKind::Bilateral,
                name: None,
                prefix_pos,
                prefix_neg,
                tail_pos,
                tail_neg: Some(tail_neg),
            },
            ParseOptions::default(),
        )
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn kind(&self) -> ShiftKind {
        self.kind
    }

    pub fn is_bilateral(&self) -> bool {
        self.kind == ShiftKind::Bilateral
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn prefix_pos(&self) -> &[f64] {
        &self.prefix_pos
    }

    pub fn prefix_neg(&self) -> &[f64] {
        &self.prefix_neg
    }

    pub fn tail_pos(&self) -> &TailRule {
        &self.tail_pos
    }

    pub fn tail_neg(&self) -> Option<&TailRule> {
        self.tail_neg.as_ref()
    }

    pub fn to_document(&self) -> SpecDocument {
        SpecDocument {
            kind: self.kind,
            name: self.name.clone(),
            prefix_pos: self.prefix_pos.clone(),
            prefix_neg: self.prefix_neg.clone(),
            tail_pos: self.tail_pos.clone(),
            tail_neg: self.tail_neg.clone(),
        }
    }

    pub fn to_document_string(&self) -> String {
        toml::to_string(&self.to_document()).expect("spec documents always serialize")
    }

    /// Whether every tail has closed-form sup/inf/radii.
    pub fn is_structured(&self) -> bool {
        self.tail_pos.is_structured() && self.tail_neg.as_ref().is_none_or(TailRule::is_structured)
    }

    /// Prefix value or tail rule on the side containing `n`; the `usize` is
    /// the offset into the tail when the tail applies.
    fn locate(&self, n: i64) -> Result<Located<'_>, SpecError> {
        if n >= 0 {
            let i = n as usize;
            Ok(match self.prefix_pos.get(i) {
                Some(&w) => Located::Prefix(w),
                None => Located::Tail(&self.tail_pos, i - self.prefix_pos.len()),
            })
        } else {
            let tail = self.tail_neg.as_ref().ok_or(SpecError::NegativeIndex(n))?;
            let i = (-n - 1) as usize;
            Ok(match self.prefix_neg.get(i) {
                Some(&w) => Located::Prefix(w),
                None => Located::Tail(tail, i - self.prefix_neg.len()),
            })
        }
    }

    /// `log ω_n`.
    pub fn log_weight_at(&self, n: i64) -> Result<f64, SpecError> {
        match self.locate(n)? {
            Located::Prefix(w) => Ok(w.ln()),
            Located::Tail(tail, j) => match tail.log_weight(j) {
                Some(lw) if lw.is_finite() => Ok(lw),
                _ => {
                    let value = tail.raw_weight(j);
                    if value.is_nan() || value.is_infinite() {
                        Err(SpecError::NonFiniteWeight { index: n })
                    } else {
                        Err(SpecError::NonPositiveWeight { index: n, value })
                    }
                }
            },
        }
    }

    /// `ω_n`. Fails when the weight is only representable in log domain.
    pub fn weight_at(&self, n: i64) -> Result<f64, SpecError> {
        let lw = self.log_weight_at(n)?;
        let w = match self.locate(n)? {
            Located::Prefix(w) => w,
            Located::Tail(tail, j) => tail.raw_weight(j),
        };
        if w.is_normal() && w > 0.0 {
            Ok(w)
        } else {
            Err(SpecError::Unrepresentable { index: n, log_weight: lw })
        }
    }

    fn ensure_cached(&self, max_pos: usize, max_neg: usize) -> Result<(), SpecError> {
        {
            let cache = self.cache.read().expect("log-beta cache poisoned");
            if cache.pos.len() > max_pos && cache.neg.len() > max_neg {
                return Ok(());
            }
        }
        let mut cache = self.cache.write().expect("log-beta cache poisoned");
        // grow geometrically so that repeated small extensions stay cheap
        if cache.pos.len() <= max_pos {
            let target = (max_pos + 1).max(2 * cache.pos.len()).max(64);
            let mut acc = *cache.pos.last().unwrap();
            let mut fresh = Vec::with_capacity(target - cache.pos.len());
            for n in cache.pos.len()..target {
                acc += self.log_weight_at(n as i64 - 1)?;
                fresh.push(acc);
            }
            cache.pos.extend(fresh);
        }
        if max_neg > 0 && cache.neg.len() <= max_neg {
            if self.kind == ShiftKind::Unilateral {
                return Err(SpecError::NegativeIndex(-(max_neg as i64)));
            }
            let target = (max_neg + 1).max(2 * cache.neg.len()).max(64);
            let mut acc = *cache.neg.last().unwrap();
            let mut fresh = Vec::with_capacity(target - cache.neg.len());
            for m in cache.neg.len()..target {
                // L(-m) = L(-m+1) - log ω_{-m}
                acc -= self.log_weight_at(-(m as i64))?;
                fresh.push(acc);
            }
            cache.neg.extend(fresh);
        }
        Ok(())
    }

    /// `L(n) = log β_n`, with `L(0) = 0`.
    pub fn log_beta(&self, n: i64) -> Result<f64, SpecError> {
        if n < 0 && self.kind == ShiftKind::Unilateral {
            return Err(SpecError::NegativeIndex(n));
        }
        let (max_pos, max_neg) = if n >= 0 { (n as usize, 0) } else { (0, (-n) as usize) };
        self.ensure_cached(max_pos, max_neg)?;
        let cache = self.cache.read().expect("log-beta cache poisoned");
        Ok(if n >= 0 { cache.pos[n as usize] } else { cache.neg[(-n) as usize] })
    }

    /// Runs `f` on the cached slices `L(0..=max_pos)` and `L(0), L(-1), …,
    /// L(-max_neg)` without copying.
    pub fn with_log_beta<R>(
        &self,
        max_pos: usize,
        max_neg: usize,
        f: impl FnOnce(&[f64], &[f64]) -> R,
    ) -> Result<R, SpecError> {
        self.ensure_cached(max_pos, max_neg)?;
        let cache = self.cache.read().expect("log-beta cache poisoned");
        let neg_len = if self.kind == ShiftKind::Bilateral { max_neg + 1 } else { 1 };
        Ok(f(&cache.pos[..=max_pos], &cache.neg[..neg_len]))
    }

    /// Supremum of the weights: exact for structured tails, else the max over
    /// the prefix and `window` tail offsets per side.
    pub fn sup_weight(&self, window: usize) -> Result<WeightBound, SpecError> {
        self.weight_extreme(window, true)
    }

    pub fn inf_weight(&self, window: usize) -> Result<WeightBound, SpecError> {
        self.weight_extreme(window, false)
    }

    fn weight_extreme(&self, window: usize, sup: bool) -> Result<WeightBound, SpecError> {
        let pick = |a: f64, b: f64| if sup { a.max(b) } else { a.min(b) };
        let mut value = if sup { 0.0 } else { f64::INFINITY };
        let mut exact = true;
        let mut sides: Vec<(&[f64], &TailRule, bool)> = vec![(&self.prefix_pos, &self.tail_pos, true)];
        if let Some(t) = &self.tail_neg {
            sides.push((&self.prefix_neg, t, false));
        }
        for (prefix, tail, positive) in sides {
            for &w in prefix {
                value = pick(value, w);
            }
            let closed = if sup { tail.exact_sup() } else { tail.exact_inf() };
            match closed {
                Some(v) => value = pick(value, v),
                None => {
                    exact = false;
                    for j in 0..window {
                        let idx = tail_index(prefix.len(), j, positive);
                        value = pick(value, self.log_weight_at(idx)?.exp());
                    }
                }
            }
        }
        Ok(WeightBound { value, exact })
    }

    fn probe(&self, options: ParseOptions) -> Result<(), SpecError> {
        for n in 0..PARSE_PROBE as i64 {
            self.log_weight_at(n)?;
            if self.is_bilateral() {
                self.log_weight_at(-n - 1)?;
            }
        }
        let mut sides = vec![(self.prefix_pos.len(), &self.tail_pos, true)];
        if let Some(t) = &self.tail_neg {
            sides.push((self.prefix_neg.len(), t, false));
        }
        for (plen, tail, positive) in sides {
            if tail.is_structured() {
                continue;
            }
            for j in 0..options.bound_window {
                let idx = tail_index(plen, j, positive);
                let w = self.log_weight_at(idx)?.exp();
                if w > options.sup_cap {
                    return Err(SpecError::Unbounded { index: idx, value: w, cap: options.sup_cap });
                }
            }
        }
        Ok(())
    }
}

fn tail_index(prefix_len: usize, j: usize, positive: bool) -> i64 {
    let i = (prefix_len + j) as i64;
    if positive {
        i
    } else {
        -i - 1
    }
}

enum Located<'a> {
    Prefix(f64),
    Tail(&'a TailRule, usize),
}

fn check_weight(index: i64, w: f64) -> Result<(), SpecError> {
    if !w.is_finite() {
        Err(SpecError::NonFiniteWeight { index })
    } else if w <= 0.0 {
        Err(SpecError::NonPositiveWeight { index, value: w })
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn uni(text: &str) -> WeightSpec {
        parse_weight_spec(text).unwrap()
    }

    #[test]
    fn parses_unweighted_shift() {
        let spec = uni("kind = \"unilateral\"\ntail_pos = { constant = 1.0 }\n");
        assert_eq!(spec.kind(), ShiftKind::Unilateral);
        for n in 0..50 {
            assert_eq!(spec.weight_at(n).unwrap(), 1.0);
        }
    }

    #[test]
    fn integer_literals_are_accepted() {
        let spec = uni("kind = \"unilateral\"\nprefix_pos = [1, 2, 3]\ntail_pos = { constant = 3 }\n");
        assert_eq!(spec.prefix_pos(), &[1.0, 2.0, 3.0]);
        assert_eq!(spec.weight_at(10).unwrap(), 3.0);
    }

    #[test]
    fn bergman_first_weights() {
        let spec = uni("kind = \"unilateral\"\ntail_pos = { builtin = \"bergman\" }\n");
        assert!((spec.weight_at(0).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((spec.weight_at(1).unwrap() - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((spec.weight_at(3).unwrap() - (4.0f64 / 5.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn zero_expression_is_rejected_at_index_zero() {
        let err = parse_weight_spec("kind = \"unilateral\"\ntail_pos = { expr = \"0\" }\n").unwrap_err();
        assert_eq!(err, SpecError::NonPositiveWeight { index: 0, value: 0.0 });
    }

    #[test]
    fn nonpositive_error_names_first_offending_index() {
        let err = parse_weight_spec("kind = \"unilateral\"\nprefix_pos = [1, 1]\ntail_pos = { expr = \"3 - n\" }\n")
            .unwrap_err();
        assert_eq!(err, SpecError::NonPositiveWeight { index: 5, value: 0.0 });
    }

    #[test]
    fn unilateral_rejects_negative_side() {
        let err = parse_weight_spec("kind = \"unilateral\"\nprefix_neg = [1.0]\ntail_pos = { constant = 1.0 }\n")
            .unwrap_err();
        assert_eq!(err, SpecError::UnilateralNegativeData("prefix_neg"));
        let err =
            parse_weight_spec("kind = \"unilateral\"\ntail_pos = { constant = 1.0 }\ntail_neg = { constant = 1.0 }\n")
                .unwrap_err();
        assert_eq!(err, SpecError::UnilateralNegativeData("tail_neg"));
    }

    #[test]
    fn syntax_errors_carry_line_and_column() {
        let err = parse_weight_spec("kind = \"unilateral\"\ntail_pos = { constant = }\n").unwrap_err();
        match err {
            SpecError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        let err = parse_weight_spec("kind = \"unilateral\"\ntail_pos = { expr = \"1 + * n\" }\n").unwrap_err();
        match err {
            SpecError::Parse { line, column, .. } => {
                assert_eq!(line, 2);
                // column of '*' inside the quoted expression
                assert_eq!(column, 26);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unbounded_expression_is_rejected() {
        let err = parse_weight_spec("kind = \"unilateral\"\ntail_pos = { expr = \"exp(n)\" }\n").unwrap_err();
        assert!(matches!(err, SpecError::Unbounded { .. }), "{err:?}");
    }

    #[test]
    fn negative_index_on_unilateral() {
        let spec = uni("kind = \"unilateral\"\ntail_pos = { constant = 2.0 }\n");
        assert_eq!(spec.weight_at(-1), Err(SpecError::NegativeIndex(-1)));
        assert_eq!(spec.log_beta(-3), Err(SpecError::NegativeIndex(-3)));
    }

    #[test]
    fn constant_tail_log_beta_is_geometric() {
        let spec = uni("kind = \"unilateral\"\ntail_pos = { constant = 2.0 }\n");
        assert_eq!(spec.weight_at(10).unwrap(), 2.0);
        assert!((spec.log_beta(4).unwrap() - 4.0 * 2f64.ln()).abs() < 1e-14);
        assert_eq!(spec.log_beta(0).unwrap(), 0.0);
    }

    #[test]
    fn williams_log_beta_matches_factorial_runs() {
        // s = m! + k  ->  k
        assert_eq!(williams_log_beta(0), 0.0);
        assert_eq!(williams_log_beta(1), 0.0);
        assert_eq!(williams_log_beta(2), 0.0);
        assert_eq!(williams_log_beta(5), 3.0);
        assert_eq!(williams_log_beta(6), 0.0);
        assert_eq!(williams_log_beta(8), 2.0);
        assert_eq!(williams_log_beta(23), 17.0);
        assert_eq!(williams_log_beta(24), 0.0);
        assert_eq!(williams_log_beta(719), 599.0);
        assert_eq!(williams_log_beta(720), 0.0);
    }

    #[test]
    fn williams_weights_inside_and_at_run_end() {
        let spec = uni("kind = \"unilateral\"\ntail_pos = { builtin = \"williams_gap\" }\n");
        // ω_4 = β_5/β_4 = e^3/e^2 lies inside the run 2..5
        assert!((spec.weight_at(4).unwrap() - E).abs() < 1e-14);
        // ω_5 = β_6/β_5 = 1/e^3 closes the run
        assert!((spec.weight_at(5).unwrap() - (-3.0f64).exp()).abs() < 1e-15);
        assert_eq!(spec.log_beta(8).unwrap(), 2.0);
        for m in 1..=5u64 {
            let fact: u64 = (1..=m).product();
            assert_eq!(spec.log_beta(fact as i64).unwrap(), 0.0, "β_{{{m}!}}");
        }
        // the drop at 7! - 1 underflows a double but stays usable in log domain
        assert!(spec.weight_at(5039).is_err());
        assert_eq!(spec.log_weight_at(5039).unwrap(), -(5040.0 - 720.0 - 1.0));
    }

    #[test]
    fn bilateral_negative_side_is_reciprocal_product() {
        let spec = WeightSpec::bilateral(vec![], TailRule::Constant(1.0), vec![], TailRule::Constant(1.0)).unwrap();
        assert_eq!(spec.log_beta(-3).unwrap(), 0.0);
        let spec =
            WeightSpec::bilateral(vec![], TailRule::Constant(1.0), vec![2.0, 4.0], TailRule::Constant(3.0)).unwrap();
        // β_{-n} = 1/(ω_{-n} ⋯ ω_{-1})
        assert!((spec.log_beta(-1).unwrap() + 2f64.ln()).abs() < 1e-15);
        assert!((spec.log_beta(-3).unwrap() + 24f64.ln()).abs() < 1e-14);
        assert_eq!(spec.weight_at(-3).unwrap(), 3.0);
    }

    #[test]
    fn log_beta_differences_match_log_weights() {
        let spec = WeightSpec::bilateral(
            vec![0.5, 3.0],
            TailRule::expr("1 + 1/(n+1)").unwrap(),
            vec![2.0],
            TailRule::Periodic(vec![1.0, 0.25]),
        )
        .unwrap();
        for n in -200..200i64 {
            let diff = spec.log_beta(n + 1).unwrap() - spec.log_beta(n).unwrap();
            let lw = spec.log_weight_at(n).unwrap();
            assert!((diff - lw).abs() <= 1e-12 * (1.0 + lw.abs()), "n = {n}");
        }
    }

    #[test]
    fn concurrent_readers_see_consistent_prefixes() {
        let spec = uni("kind = \"unilateral\"\ntail_pos = { builtin = \"bergman\" }\n");
        let handles: Vec<_> = (0..8)
            .map(|t| {
                let spec = spec.clone();
                std::thread::spawn(move || {
                    (0..2000).map(|i| spec.log_beta(((i * 7 + t * 131) % 5000) as i64).unwrap()).sum::<f64>()
                })
            })
            .collect();
        let sums: Vec<f64> = handles.into_iter().map(|h| h.join().unwrap()).collect();
        for (t, s) in sums.iter().enumerate() {
            let expected: f64 = (0..2000)
                .map(|i| {
                    let n = ((i * 7 + t * 131) % 5000) as f64;
                    -0.5 * (n + 1.0).ln()
                })
                .sum();
            assert!((s - expected).abs() < 1e-8, "thread {t}");
        }
    }

    #[test]
    fn sup_and_inf_use_closed_forms_for_structured_tails() {
        let spec = WeightSpec::unilateral(vec![0.3, 5.0], TailRule::Periodic(vec![1.0, 4.0])).unwrap();
        assert_eq!(spec.sup_weight(16).unwrap(), WeightBound { value: 5.0, exact: true });
        assert_eq!(spec.inf_weight(16).unwrap(), WeightBound { value: 0.3, exact: true });
        let spec = WeightSpec::unilateral(vec![], TailRule::expr("2 - 1/(n+1)").unwrap()).unwrap();
        let sup = spec.sup_weight(100).unwrap();
        assert!(!sup.exact);
        assert!((sup.value - (2.0 - 1.0 / 100.0)).abs() < 1e-15);
    }

    #[test]
    fn document_round_trip_preserves_weights() {
        let text = "kind = \"bilateral\"\nname = \"mixed\"\nprefix_pos = [0.5, 2.0]\nprefix_neg = [3.0]\n\
                    tail_pos = { expr = \"sqrt((n+1)/(n+2))\" }\ntail_neg = { periodic = [1.0, 2.5] }\n";
        let spec = parse_weight_spec(text).unwrap();
        let again = parse_weight_spec(&spec.to_document_string()).unwrap();
        assert_eq!(spec, again);
        for n in -300..300 {
            assert_eq!(spec.weight_at(n).unwrap(), again.weight_at(n).unwrap());
        }
    }
}
