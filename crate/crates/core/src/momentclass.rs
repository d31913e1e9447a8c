//! Normal, hyponormal and subnormal classification of weighted shifts.
//!
//! Subnormality of a unilateral shift is equivalent to `β_k² = ∫ s^k dν(s)`
//! for a probability measure `ν` on `[0, ‖T‖²]`. A finite order `K` of that
//! moment problem is checked through three Hankel matrices, all of which
//! must be positive semidefinite:
//!
//! * `H  = (m_{i+j})`,
//! * `H′ = (m_{i+j+1})`,
//! * `B·H − H′` with `B = (sup ω)²`.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::weightspec::{ShiftKind, SpecError, WeightSpec, DEFAULT_BOUND_WINDOW};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;
pub const MAX_ORDER: usize = 256;
const MAX_MOMENT: f64 = 1e300;
const MIN_MOMENT: f64 = 1e-300;
/// Relative size below which a Jacobi recurrence coefficient counts as zero.
const SINGULAR: f64 = 1e-13;

#[derive(Debug, Error, PartialEq)]
pub enum MomentError {
    #[error("moment test needs a {0} shift")]
    WrongKind(ShiftKind),
    #[error("order must be at least 1")]
    OrderTooSmall,
    #[error("order {order} exceeds the budget of {MAX_ORDER}")]
    BudgetExceeded { order: usize },
    #[error("moment m_{index} = exp({log_moment}) is outside the double range")]
    Overflow { index: i64, log_moment: f64 },
    #[error("atoms can only be reconstructed from a consistent certificate, got {0:?}")]
    NotConsistent(Verdict),
    #[error("{requested} atoms need {needed} moments, certificate has {available}")]
    TooFewMoments { requested: usize, needed: usize, available: usize },
    #[error(transparent)]
    Spec(#[from] SpecError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classes {
    pub normal: bool,
    pub hyponormal: bool,
    /// Both answers follow from closed-form tail structure rather than a
    /// probed window.
    pub exact: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    ConsistentSubnormal,
    NotSubnormal,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HankelMatrix {
    #[serde(rename = "H")]
    Hankel,
    #[serde(rename = "H'")]
    Shifted,
    #[serde(rename = "BH-H'")]
    Bounded,
    /// Two-sided window `(m_{i+j+offset})`.
    #[serde(rename = "window")]
    Window(i64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub matrix: HankelMatrix,
    /// Size of the first leading principal submatrix that is not PSD.
    pub minor_order: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowCheck {
    pub offset: i64,
    pub min_eig: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentCertificate {
    pub kind: ShiftKind,
    pub order: usize,
    pub tolerance: f64,
    pub support_bound: f64,
    /// `false` when `sup ω` was only probed over a window.
    pub support_bound_exact: bool,
    /// Index of `moments[0]`: `0` for unilateral certificates.
    pub moment_offset: i64,
    pub moments: Vec<f64>,
    pub eig_h: Vec<f64>,
    pub eig_h1: Vec<f64>,
    pub eig_hb: Vec<f64>,
    pub min_eig_h: f64,
    pub min_eig_h1: Option<f64>,
    pub min_eig_hb: Option<f64>,
    /// Determinants of the leading principal submatrices of `H`.
    pub hankel_leading_minors: Vec<f64>,
    pub windows: Vec<WindowCheck>,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    pub necessary_only: bool,
    pub notes: Vec<String>,
}

impl MomentCertificate {
    /// `m_k` for any `k` held by the certificate.
    pub fn moment(&self, k: i64) -> Option<f64> {
        usize::try_from(k - self.moment_offset).ok().and_then(|i| self.moments.get(i).copied())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    /// Location `t` of the atom of the measure in `β_n² = ∫ t^{2n} dμ(t)`.
    pub location: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomicMeasure {
    pub atoms: Vec<Atom>,
    pub order_used: usize,
    /// Largest relative error of the atoms in reproducing `m_0..m_{2q−1}`.
    pub moment_residual: f64,
    pub note: Option<String>,
}

/// Log weights of the probed range in index order, plus whether each tail's
/// closed form confirms the probed monotonicity and constancy.
struct Probe {
    log_weights: Vec<f64>,
    tails_nondecreasing: Option<bool>,
    tails_constant: Option<bool>,
}

fn probe(spec: &WeightSpec, window: usize) -> Result<Probe, SpecError> {
    let lo = if spec.is_bilateral() { -((spec.prefix_neg().len() + window) as i64) } else { 0 };
    let hi = (spec.prefix_pos().len() + window) as i64;
    let log_weights = (lo..hi).map(|n| spec.log_weight_at(n)).collect::<Result<Vec<_>, _>>()?;
    let pos = spec.tail_pos();
    let mut nondecreasing = pos.exact_nondecreasing();
    let constant =
        |t: &crate::weightspec::TailRule| t.exact_nondecreasing().zip(t.exact_nonincreasing()).map(|(a, b)| a && b);
    let mut tails_constant = constant(pos);
    if let Some(neg) = spec.tail_neg() {
        // outward offsets run against index order on the negative side
        nondecreasing = nondecreasing.zip(neg.exact_nonincreasing()).map(|(a, b)| a && b);
        tails_constant = tails_constant.zip(constant(neg)).map(|(a, b)| a && b);
    }
    Ok(Probe { log_weights, tails_nondecreasing: nondecreasing, tails_constant })
}

/// Normality (bilateral with all weights equal) and hyponormality
/// (nondecreasing weights), exact for structured tails and probed over
/// `window` tail offsets per side otherwise.
pub fn classify_normal_hyponormal(spec: &WeightSpec, window: usize) -> Result<Classes, SpecError> {
    let p = probe(spec, window)?;
    let tol = 1e-12;
    let probed_monotone = p.log_weights.windows(2).all(|w| w[1] >= w[0] - tol);
    let first = p.log_weights[0];
    let probed_constant = p.log_weights.iter().all(|&w| (w - first).abs() <= tol);
    let hyponormal = probed_monotone && p.tails_nondecreasing.unwrap_or(true);
    let normal = spec.is_bilateral() && probed_constant && p.tails_constant.unwrap_or(true);
    Ok(Classes { normal, hyponormal, exact: spec.is_structured() })
}

fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, &x| a.max(x.abs()))
}

enum Psd {
    Yes,
    Borderline,
    No,
}

/// PSD status of a matrix whose smallest eigenvalue is `min_eig`, where
/// `scale` is the largest entry the matrix was built from. Negative values
/// within rounding pass; those beyond rounding but within `eps·scale` are
/// borderline.
fn psd_status(m: &DMatrix<f64>, min_eig: f64, scale: f64, eps: f64) -> Psd {
    let roundoff = m.nrows() as f64 * 1e3 * f64::EPSILON * scale;
    if min_eig >= -roundoff {
        Psd::Yes
    } else if min_eig >= -eps * scale {
        Psd::Borderline
    } else {
        Psd::No
    }
}

fn first_bad_minor(m: &DMatrix<f64>, scale: f64, eps: f64) -> usize {
    let n = m.nrows();
    for k in 1..=n {
        let sub = m.view((0, 0), (k, k)).into_owned();
        let ev = symmetric_eigenvalues(&sub);
        if let Psd::No = psd_status(&sub, ev[0], scale, eps) {
            return k;
        }
    }
    n
}

/// `D^{-1/2}·m·D^{-1/2}` for the diagonal `d`; a congruence, so
/// semidefiniteness is unchanged while the growth of the moments drops out.
fn equilibrate(m: &DMatrix<f64>, d: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] / (d[i] * d[j]).sqrt())
}

fn diagonal(m: &DMatrix<f64>) -> Vec<f64> {
    (0..m.nrows()).map(|i| m[(i, i)]).collect()
}

fn hankel(moment: impl Fn(i64) -> f64, size: usize, offset: i64) -> DMatrix<f64> {
    DMatrix::from_fn(size, size, |i, j| moment(i as i64 + j as i64 + offset))
}

fn exp_moment(index: i64, log_beta: f64) -> Result<f64, MomentError> {
    let lm = 2.0 * log_beta;
    let m = lm.exp();
    if !(MIN_MOMENT..=MAX_MOMENT).contains(&m) {
        return Err(MomentError::Overflow { index, log_moment: lm });
    }
    Ok(m)
}

fn check_order(order: usize) -> Result<(), MomentError> {
    if order < 1 {
        Err(MomentError::OrderTooSmall)
    } else if order > MAX_ORDER {
        Err(MomentError::BudgetExceeded { order })
    } else {
        Ok(())
    }
}

/// Truncated moment test of order `order` for a unilateral shift. All three
/// matrices are scaled by `diag(H)^{-1/2}` on both sides before their
/// eigenvalues are taken, and `tolerance` is relative to the largest
/// scaled entry.
pub fn berger_hausdorff_test(
    spec: &WeightSpec,
    order: usize,
    tolerance: f64,
) -> Result<MomentCertificate, MomentError> {
    if spec.is_bilateral() {
        return Err(MomentError::WrongKind(ShiftKind::Unilateral));
    }
    check_order(order)?;
    let count = 2 * order + 2;
    let moments = (0..count).map(|k| exp_moment(k as i64, spec.log_beta(k as i64)?)).collect::<Result<Vec<_>, _>>()?;
    let sup = spec.sup_weight(DEFAULT_BOUND_WINDOW)?;
    let b = sup.value * sup.value;
    let size = order + 1;
    let m = |k: i64| moments[k as usize];
    let raw = hankel(m, size, 0);
    let d = diagonal(&raw);
    let h = equilibrate(&raw, &d);
    let h1 = equilibrate(&hankel(m, size, 1), &d);
    let hb = &h * b - &h1;
    let hb_scale = (b * max_abs(&h)).max(max_abs(&h1));
    let mats = [
        (HankelMatrix::Hankel, &h, max_abs(&h)),
        (HankelMatrix::Shifted, &h1, max_abs(&h1)),
        (HankelMatrix::Bounded, &hb, hb_scale),
    ];
    let eigs: Vec<Vec<f64>> = mats.iter().map(|(_, x, _)| symmetric_eigenvalues(x)).collect();

    let mut verdict = Verdict::ConsistentSubnormal;
    let mut witness = None;
    for ((name, mat, scale), ev) in mats.iter().zip(&eigs) {
        match psd_status(mat, ev[0], *scale, tolerance) {
            Psd::No if witness.is_none() => {
                verdict = Verdict::NotSubnormal;
                witness = Some(Witness { matrix: *name, minor_order: first_bad_minor(mat, *scale, tolerance) });
            }
            Psd::Borderline if verdict == Verdict::ConsistentSubnormal => verdict = Verdict::Inconclusive,
            _ => {}
        }
    }
    let hankel_leading_minors = (1..=size).map(|k| raw.view((0, 0), (k, k)).into_owned().determinant()).collect();
    let mut notes = vec![format!(
        "order {order}: consistent_subnormal only certifies moments m_0..m_{} at tolerance {tolerance}",
        count - 1
    )];
    if !sup.exact {
        notes.push(format!("support bound uses sup ω probed over {DEFAULT_BOUND_WINDOW} tail offsets"));
    }
    Ok(MomentCertificate {
        kind: ShiftKind::Unilateral,
        order,
        tolerance,
        support_bound: b,
        support_bound_exact: sup.exact,
        moment_offset: 0,
        moments,
        min_eig_h: eigs[0][0],
        min_eig_h1: Some(eigs[1][0]),
        min_eig_hb: Some(eigs[2][0]),
        eig_h: eigs[0].clone(),
        eig_h1: eigs[1].clone(),
        eig_hb: eigs[2].clone(),
        hankel_leading_minors,
        windows: Vec::new(),
        verdict,
        witness,
        necessary_only: false,
        notes,
    })
}

/// Two-sided moment windows `(m_{i+j+s})_{0≤i,j≤K}` for every offset
/// `s ∈ [−2M, 2M]`, with `m_k = β_k²` on all of ℤ. Passing is necessary for
/// subnormality but not sufficient.
pub fn bilateral_moment_test(
    spec: &WeightSpec,
    order: usize,
    shifts: usize,
    tolerance: f64,
) -> Result<MomentCertificate, MomentError> {
    if !spec.is_bilateral() {
        return Err(MomentError::WrongKind(ShiftKind::Bilateral));
    }
    check_order(order)?;
    let reach = 2 * shifts as i64;
    let lo = -reach;
    let hi = 2 * order as i64 + reach;
    let moments = (lo..=hi).map(|k| exp_moment(k, spec.log_beta(k)?)).collect::<Result<Vec<_>, _>>()?;
    let sup = spec.sup_weight(DEFAULT_BOUND_WINDOW)?;
    let m = |k: i64| moments[(k - lo) as usize];
    let size = order + 1;
    let mut verdict = Verdict::ConsistentSubnormal;
    let mut witness = None;
    let mut windows = Vec::new();
    let mut min_eig = f64::INFINITY;
    for offset in -reach..=reach {
        let raw = hankel(m, size, offset);
        let mat = equilibrate(&raw, &diagonal(&raw));
        let ev = symmetric_eigenvalues(&mat);
        windows.push(WindowCheck { offset, min_eig: ev[0] });
        min_eig = min_eig.min(ev[0]);
        let scale = max_abs(&mat);
        match psd_status(&mat, ev[0], scale, tolerance) {
            Psd::No if witness.is_none() => {
                verdict = Verdict::NotSubnormal;
                witness = Some(Witness {
                    matrix: HankelMatrix::Window(offset),
                    minor_order: first_bad_minor(&mat, scale, tolerance),
                });
            }
            Psd::Borderline if verdict == Verdict::ConsistentSubnormal => verdict = Verdict::Inconclusive,
            _ => {}
        }
    }
    let raw = hankel(m, size, 0);
    let h0 = equilibrate(&raw, &diagonal(&raw));
    Ok(MomentCertificate {
        kind: ShiftKind::Bilateral,
        order,
        tolerance,
        support_bound: sup.value * sup.value,
        support_bound_exact: sup.exact,
        moment_offset: lo,
        moments,
        eig_h: symmetric_eigenvalues(&h0),
        eig_h1: Vec::new(),
        eig_hb: Vec::new(),
        min_eig_h: min_eig,
        min_eig_h1: None,
        min_eig_hb: None,
        hankel_leading_minors: (1..=size).map(|k| raw.view((0, 0), (k, k)).into_owned().determinant()).collect(),
        windows,
        verdict,
        witness,
        necessary_only: true,
        notes: vec![format!(
            "necessary conditions only: {} two-sided windows of order {order}, offsets {}..={}",
            2 * reach + 1,
            -reach,
            reach
        )],
    })
}

/// Recurrence coefficients `(α_k, b_k)` of the orthogonal polynomials of a
/// measure from its power moments `m_0..m_{2q−1}` (Chebyshev algorithm).
/// Stops early when `b_k` vanishes, i.e. the measure has fewer atoms.
fn chebyshev(moments: &[f64], q: usize) -> (Vec<f64>, Vec<f64>) {
    let len = 2 * q;
    let mut prev = vec![0.0; len];
    let mut cur: Vec<f64> = moments[..len].to_vec();
    let mut alpha = vec![moments[1] / moments[0]];
    let mut beta = vec![moments[0]];
    for k in 1..q {
        let mut next = vec![0.0; len];
        for l in k..(len - k) {
            next[l] = cur[l + 1] - alpha[k - 1] * cur[l] - beta[k - 1] * prev[l];
        }
        let bk = next[k] / cur[k - 1];
        let scale = alpha.iter().fold(0.0, |a: f64, &x| a.max(x.abs())).powi(2).max(f64::MIN_POSITIVE);
        if !(bk > SINGULAR * scale) {
            break;
        }
        alpha.push(next[k + 1] / next[k] - cur[k] / cur[k - 1]);
        beta.push(bk);
        prev = cur;
        cur = next;
    }
    (alpha, beta)
}

/// Gauss quadrature of the measure certified by `cert`: `atoms` nodes and
/// weights reproducing `m_0..m_{2·atoms−1}`.
pub fn reconstruct_atoms(cert: &MomentCertificate, atoms: usize) -> Result<AtomicMeasure, MomentError> {
    if cert.verdict != Verdict::ConsistentSubnormal {
        return Err(MomentError::NotConsistent(cert.verdict));
    }
    let moments: Vec<f64> = (0..).map_while(|k| cert.moment(k)).collect();
    if atoms == 0 || 2 * atoms > moments.len() {
        return Err(MomentError::TooFewMoments { requested: atoms, needed: 2 * atoms, available: moments.len() });
    }
    let (alpha, beta) = chebyshev(&moments, atoms);
    let q = alpha.len();
    let jacobi = DMatrix::from_fn(q, q, |i, j| {
        if i == j {
            alpha[i]
        } else if i.abs_diff(j) == 1 {
            beta[i.max(j)].sqrt()
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(jacobi);
    let mut found: Vec<Atom> = (0..q)
        .map(|i| Atom {
            location: eig.eigenvalues[i].max(0.0).sqrt(),
            weight: moments[0] * eig.eigenvectors[(0, i)].powi(2),
        })
        .collect();
    found.sort_by(|a, b| a.location.total_cmp(&b.location));
    let moment_residual = (0..2 * q)
        .map(|k| {
            let fit: f64 = found.iter().map(|a| a.weight * a.location.powi(2 * k as i32)).sum();
            (fit - moments[k]).abs() / moments[k].abs().max(1.0)
        })
        .fold(0.0, f64::max);
    let note = (q < atoms).then(|| format!("moment matrix is singular beyond order {q}; returned {q} atoms"));
    Ok(AtomicMeasure { atoms: found, order_used: q, moment_residual, note })
}
