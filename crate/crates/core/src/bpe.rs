//! Bounded point evaluations, reproducing kernels and local spectra of
//! unilateral shifts.
//!
//! For `h = Σ a_n e_n` the evaluation at `λ` is `ĥ(λ) = Σ a_n λⁿ/β_n`,
//! realised as `⟨h, k_λ⟩` with kernel coefficients `c_n = conj(λ)ⁿ/β_n`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::momentclass::Classes;
use crate::radii::{estimate_radii, RadiiError, RadiiReport, DEFAULT_WINDOW};
use crate::regions::RadialRegion;
use crate::spectra::SpectralPicture;
use crate::weightspec::{ShiftKind, SpecError, WeightSpec};

pub const GAP_TOLERANCE: f64 = 1e-6;
pub const MAX_KERNEL_LEN: usize = 1 << 20;

#[derive(Debug, Error, PartialEq)]
pub enum BpeError {
    #[error("bounded point evaluations are only computed for unilateral shifts")]
    Bilateral,
    #[error("|λ| = {modulus} is not inside the open disc of radius r2 = {r2}")]
    OutsideDisc { modulus: f64, r2: f64 },
    #[error("kernel length {0} must lie in 4..={MAX_KERNEL_LEN}")]
    Length(usize),
    #[error("the zero vector has no local spectrum")]
    ZeroVector,
    #[error(transparent)]
    Radii(#[from] RadiiError),
    #[error(transparent)]
    Spec(#[from] SpecError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BpeReport {
    #[serde(rename = "B")]
    pub b: RadialRegion,
    #[serde(rename = "Ba")]
    pub ba: RadialRegion,
    pub gamma_minus_ap: RadialRegion,
    pub williams_gap: bool,
    pub question1_answer_negative: bool,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelVector {
    pub lambda: Complex64,
    pub len: usize,
    pub coefficients: Vec<Complex64>,
    /// Estimate of `Σ_{n≥N} |λ|^{2n}/β_n²`, absent when the probed growth of
    /// `β` does not dominate `|λ|`.
    pub tail_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalSpectrumReport {
    pub vector: String,
    pub lower_bound_region: Option<RadialRegion>,
    pub full_claim: Option<RadialRegion>,
    pub provenance: Vec<String>,
}

/// Point evaluation regions from the radii and spectral picture of a
/// unilateral shift.
pub fn bpe_regions(radii: &RadiiReport, picture: &SpectralPicture) -> Result<BpeReport, BpeError> {
    if radii.kind != ShiftKind::Unilateral {
        return Err(BpeError::Bilateral);
    }
    let s = &radii.plus;
    let b =
        if s.r2 == 0.0 { RadialRegion::Origin } else { RadialRegion::disc(s.r2, crate::regions::EdgeStatus::Unknown) };
    let ba = RadialRegion::open_disc(s.r2);
    let gamma_minus_ap = picture.compression.difference(&picture.approx_point);
    let williams_gap = s.r2 - s.r1 > GAP_TOLERANCE + s.convergence_gap;
    let mut notes = vec![
        "B equals the compression spectrum for a cyclic operator".to_string(),
        "the kernel of (T − λ)* is one-dimensional at every point of B".to_string(),
        format!("Ba: open disc of radius r2 = {}, where every evaluation ĥ is analytic", s.r2),
        format!("gamma_minus_ap: compression minus approx_point, the open disc of radius r1 = {}", s.r1),
        "gamma_minus_ap ⊆ Ba for every cyclic operator".to_string(),
    ];
    if williams_gap {
        notes
            .push(format!("negative answer to Question 1 (is B_a(T) = Γ(T)\\σ_ap(T)?): r1 = {} < r2 = {}", s.r1, s.r2));
    }
    Ok(BpeReport { b, ba, gamma_minus_ap, williams_gap, question1_answer_negative: williams_gap, notes })
}

/// `λⁿ/β_n` from `L(n) = log β_n`, with `0⁰ = 1`.
pub(crate) fn evaluation_term(lambda: Complex64, n: usize, log_beta: f64) -> Complex64 {
    if n == 0 {
        return Complex64::new((-log_beta).exp(), 0.0);
    }
    if lambda == Complex64::new(0.0, 0.0) {
        return Complex64::new(0.0, 0.0);
    }
    let (rho, theta) = lambda.to_polar();
    Complex64::from_polar((n as f64 * rho.ln() - log_beta).exp(), n as f64 * theta)
}

pub(crate) fn unilateral_r2(spec: &WeightSpec) -> Result<(f64, f64), BpeError> {
    if spec.is_bilateral() {
        return Err(BpeError::Bilateral);
    }
    let radii = estimate_radii(spec, DEFAULT_WINDOW)?;
    Ok((radii.plus.r2, radii.plus.convergence_gap))
}

/// Truncated reproducing kernel `k_λ` of length `len`.
pub fn kernel_coefficients(spec: &WeightSpec, lambda: Complex64, len: usize) -> Result<KernelVector, BpeError> {
    let (r2, margin) = unilateral_r2(spec)?;
    if !(4..=MAX_KERNEL_LEN).contains(&len) {
        return Err(BpeError::Length(len));
    }
    let modulus = lambda.norm();
    if modulus >= r2 - margin {
        return Err(BpeError::OutsideDisc { modulus, r2 });
    }
    // probe β growth just past the truncation for the remainder estimate
    let probe_end = 2 * len + 64;
    let (coefficients, growth) = spec.with_log_beta(probe_end, 0, |pos, _| {
        let c: Vec<Complex64> = (0..len).map(|n| evaluation_term(lambda, n, pos[n]).conj()).collect();
        let g = (len..=probe_end).map(|m| pos[m] / m as f64).fold(f64::INFINITY, f64::min);
        (c, g)
    })?;
    let tail_bound = if modulus == 0.0 {
        Some(0.0)
    } else {
        // |λ|^{2n}/β_n² ≤ q^n with q = |λ|²/e^{2g} while β_n ≥ e^{gn}
        let log_q = 2.0 * (modulus.ln() - growth);
        (log_q < 0.0).then(|| (len as f64 * log_q).exp() / -log_q.exp_m1())
    };
    Ok(KernelVector { lambda, len, coefficients, tail_bound })
}

/// `ĥ(λ) = Σ a_n λⁿ/β_n` over the support of `h`.
pub fn hhat_eval(spec: &WeightSpec, h: &[Complex64], lambda: Complex64) -> Result<Complex64, BpeError> {
    if spec.is_bilateral() {
        return Err(BpeError::Bilateral);
    }
    if h.is_empty() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok(spec.with_log_beta(h.len() - 1, 0, |pos, _| {
        h.iter().enumerate().map(|(n, a)| a * evaluation_term(lambda, n, pos[n])).sum()
    })?)
}

fn describe(h: &[Complex64]) -> String {
    let terms: Vec<String> = h
        .iter()
        .enumerate()
        .filter(|(_, a)| a.norm() != 0.0)
        .map(|(n, a)| if a.im == 0.0 { format!("{}·e_{n}", a.re) } else { format!("({a})·e_{n}") })
        .collect();
    terms.join(" + ")
}

/// What the radii and classes guarantee about the local spectrum `σ_T(h)`.
pub fn local_spectrum_report(
    spec: &WeightSpec,
    h: &[Complex64],
    radii: &RadiiReport,
    picture: &SpectralPicture,
    classes: &Classes,
) -> Result<LocalSpectrumReport, BpeError> {
    if h.iter().all(|a| a.norm() == 0.0) {
        return Err(BpeError::ZeroVector);
    }
    let mut provenance = Vec::new();
    let lower_bound_region = if spec.is_bilateral() {
        provenance.push(
            "lower_bound_region: not emitted, the analytic evaluation region of a bilateral shift is not computed"
                .to_string(),
        );
        None
    } else {
        let r2 = radii.plus.r2;
        provenance.push(format!(
            "lower_bound_region: closure of Ba (radius r2 = {r2}), contained in σ_T(x) for every nonzero x of an injective unilateral shift"
        ));
        Some(if r2 > 0.0 { RadialRegion::closed_disc(r2) } else { RadialRegion::Empty })
    };
    let full_claim = if classes.hyponormal && !classes.normal {
        provenance.push("full_claim: non-normal hyponormal weighted shifts have σ_T(x) = σ(T) for all x ≠ 0".into());
        Some(picture.spectrum.clone())
    } else {
        provenance.push("full_claim: absent, the shift is normal or not hyponormal".into());
        None
    };
    Ok(LocalSpectrumReport { vector: describe(h), lower_bound_region, full_claim, provenance })
}
