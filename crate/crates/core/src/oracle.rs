//! Finite computations that check the predicted regions independently.
//!
//! Banded operators act exactly on finitely supported vectors. The lower
//! bound `m(T − λ)` is approximated by the smallest singular value of the
//! restriction of `T − λ` to the first basis vectors, with the full range
//! kept, so no truncation error enters on the domain.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bpe::{evaluation_term, kernel_coefficients, unilateral_r2, BpeError};
use crate::regions::{membership, Membership, RadialRegion};
use crate::spectra::SpectralPicture;
use crate::weightspec::{ShiftKind, SpecError, TailRule, WeightSpec};

pub const MIN_DIM: usize = 8;
pub const MAX_DIM: usize = 1_000_000;
pub const TAU_FLOOR: f64 = 1e-4;
pub const EDGE_BAND: f64 = 0.05;
pub const WITNESS_TOLERANCE: f64 = 1e-12;

/// Finitely supported coefficient vector indexed by basis position.
pub type SparseVec = BTreeMap<i64, Complex64>;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("truncation dimension {0} is below the minimum {MIN_DIM}")]
    DimTooSmall(usize),
    #[error("truncation dimension {0} exceeds the budget {MAX_DIM}")]
    Budget(usize),
    #[error("polynomial of degree {degree} does not fit a truncation of length {len}")]
    Degree { degree: usize, len: usize },
    #[error("|λ| = {modulus} exceeds the admissible radius {limit}")]
    OutsideDisc { modulus: f64, limit: f64 },
    #[error("operation needs a unilateral shift")]
    Bilateral,
    #[error("grid needs at least one radius and one angle")]
    EmptyGrid,
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Bpe(#[from] BpeError),
}

#[derive(Debug, Clone)]
pub enum BandRule {
    Constant(Complex64),
    /// `scale · ω_{n+lag}` for input index `n`.
    Weight {
        spec: WeightSpec,
        lag: i64,
        scale: Complex64,
    },
}

impl BandRule {
    fn value(&self, n: i64) -> Result<Complex64, SpecError> {
        match self {
            BandRule::Constant(c) => Ok(*c),
            BandRule::Weight { spec, lag, scale } => Ok(scale * weight_value(spec, n + lag)?),
        }
    }
}

/// `ω_n` as stored, or through the log domain when it underflows.
fn weight_value(spec: &WeightSpec, n: i64) -> Result<f64, SpecError> {
    match spec.weight_at(n) {
        Err(SpecError::Unrepresentable { log_weight, .. }) => Ok(log_weight.exp()),
        other => other,
    }
}

#[derive(Debug, Clone)]
pub struct Band {
    pub offset: i64,
    pub rule: BandRule,
}

#[derive(Debug, Clone)]
pub struct BandedOperator {
    pub kind: ShiftKind,
    pub label: String,
    pub bands: Vec<Band>,
}

impl BandedOperator {
    pub fn shift(spec: &WeightSpec) -> BandedOperator {
        BandedOperator {
            kind: spec.kind(),
            label: "T".into(),
            bands: vec![Band { offset: 1, rule: BandRule::Weight { spec: spec.clone(), lag: 0, scale: 1.0.into() } }],
        }
    }

    pub fn adjoint(spec: &WeightSpec) -> BandedOperator {
        BandedOperator {
            kind: spec.kind(),
            label: "T*".into(),
            bands: vec![Band { offset: -1, rule: BandRule::Weight { spec: spec.clone(), lag: -1, scale: 1.0.into() } }],
        }
    }

    pub fn identity(kind: ShiftKind) -> BandedOperator {
        BandedOperator {
            kind,
            label: "I".into(),
            bands: vec![Band { offset: 0, rule: BandRule::Constant(1.0.into()) }],
        }
    }

    pub fn scaled(mut self, c: Complex64) -> BandedOperator {
        for band in &mut self.bands {
            band.rule = match &band.rule {
                BandRule::Constant(v) => BandRule::Constant(c * v),
                BandRule::Weight { spec, lag, scale } => {
                    BandRule::Weight { spec: spec.clone(), lag: *lag, scale: c * scale }
                }
            };
        }
        self.label = format!("({c})·{}", self.label);
        self
    }

    pub fn plus(mut self, other: BandedOperator) -> BandedOperator {
        self.label = format!("{} + {}", self.label, other.label);
        self.bands.extend(other.bands);
        self
    }

    pub fn max_offset(&self) -> i64 {
        self.bands.iter().map(|b| b.offset.abs()).max().unwrap_or(0)
    }
}

pub fn basis(n: i64) -> SparseVec {
    SparseVec::from([(n, Complex64::new(1.0, 0.0))])
}

pub fn norm_sqr(x: &SparseVec) -> f64 {
    x.values().map(|v| v.norm_sqr()).sum()
}

/// `op·x` summed band by band; a unilateral operator discards every
/// contribution to a negative index.
pub fn banded_apply(op: &BandedOperator, x: &SparseVec) -> Result<SparseVec, SpecError> {
    let mut out = SparseVec::new();
    for (&n, &xn) in x {
        for band in &op.bands {
            let target = n + band.offset;
            if op.kind == ShiftKind::Unilateral && target < 0 {
                continue;
            }
            *out.entry(target).or_default() += band.rule.value(n)? * xn;
        }
    }
    out.retain(|_, v| *v != Complex64::new(0.0, 0.0));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessResult {
    pub norm_adjoint_sq: f64,
    pub norm_sq: f64,
    pub pass: bool,
}

/// `‖(T*)²x‖²` and `‖T²x‖²` for the given pair, passing when they are 89
/// and 80.
pub fn witness_norms(
    t: &BandedOperator,
    t_adjoint: &BandedOperator,
    x: &SparseVec,
) -> Result<WitnessResult, SpecError> {
    let square =
        |op: &BandedOperator| -> Result<f64, SpecError> { Ok(norm_sqr(&banded_apply(op, &banded_apply(op, x)?)?)) };
    let norm_adjoint_sq = square(t_adjoint)?;
    let norm_sq = square(t)?;
    let pass = (norm_adjoint_sq - 89.0).abs() < WITNESS_TOLERANCE && (norm_sq - 80.0).abs() < WITNESS_TOLERANCE;
    Ok(WitnessResult { norm_adjoint_sq, norm_sq, pass })
}

/// `T = S* + 2S` on the unweighted unilateral shift with `x = e_0 − 2e_2`:
/// `‖(T*)²x‖ > ‖T²x‖` although `T²` would be hyponormal were `T` subnormal.
pub fn hyponormal_not_subnormal_witness() -> WitnessResult {
    let s = unit_shift();
    let t = BandedOperator::adjoint(&s).plus(BandedOperator::shift(&s).scaled(2.0.into()));
    let t_adjoint = BandedOperator::shift(&s).plus(BandedOperator::adjoint(&s).scaled(2.0.into()));
    let x = SparseVec::from([(0, Complex64::new(1.0, 0.0)), (2, Complex64::new(-2.0, 0.0))]);
    witness_norms(&t, &t_adjoint, &x).expect("unit weights are always representable")
}

fn unit_shift() -> WeightSpec {
    WeightSpec::unilateral(vec![], TailRule::Constant(1.0)).expect("constant tail is valid")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationProbe {
    pub lambda: Complex64,
    pub n: usize,
    pub sigma_min: f64,
    pub threshold: Option<f64>,
    pub inside: Option<bool>,
    pub predicted: Option<Membership>,
    pub agrees: Option<bool>,
}

/// Number of eigenvalues below `x` of the symmetric tridiagonal matrix.
fn sturm_count(diag: &[f64], off_sq: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for (i, &d) in diag.iter().enumerate() {
        let coupling = if i == 0 { 0.0 } else { off_sq[i - 1] / q };
        q = d - x - coupling;
        if q == 0.0 {
            q = -f64::EPSILON * (d.abs() + x.abs()).max(f64::MIN_POSITIVE);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn smallest_eigenvalue(diag: &[f64], off_sq: &[f64]) -> f64 {
    let mut hi = diag
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let left = if i == 0 { 0.0 } else { off_sq[i - 1].sqrt() };
            let right = off_sq.get(i).map_or(0.0, |e| e.sqrt());
            d + left + right
        })
        .fold(0.0, f64::max);
    let mut lo = 0.0;
    for _ in 0..400 {
        if hi - lo <= 1e-12 * (1e-6 + hi) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if sturm_count(diag, off_sq, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn check_dim(n: usize) -> Result<(), OracleError> {
    if n < MIN_DIM {
        return Err(OracleError::DimTooSmall(n));
    }
    if n > MAX_DIM {
        return Err(OracleError::Budget(n));
    }
    Ok(())
}

/// Smallest singular value of `T − λ` on the span of `e_0..e_{N−1}`
/// (unilateral) or `e_{−N}..e_N` (bilateral).
pub fn sigma_min_truncation(spec: &WeightSpec, lambda: Complex64, n: usize) -> Result<TruncationProbe, OracleError> {
    check_dim(n)?;
    let indices: Vec<i64> = match spec.kind() {
        ShiftKind::Unilateral => (0..n as i64).collect(),
        ShiftKind::Bilateral => (-(n as i64)..=n as i64).collect(),
    };
    let modulus = lambda.norm();
    let weights = indices.iter().map(|&j| weight_value(spec, j)).collect::<Result<Vec<f64>, SpecError>>()?;
    let diag: Vec<f64> = weights.iter().map(|w| modulus * modulus + w * w).collect();
    let off_sq: Vec<f64> = weights[..weights.len() - 1].iter().map(|w| (modulus * w).powi(2)).collect();
    let sigma_min = smallest_eigenvalue(&diag, &off_sq).max(0.0).sqrt();
    Ok(TruncationProbe { lambda, n, sigma_min, threshold: None, inside: None, predicted: None, agrees: None })
}

/// Outer radius of the picture, the reference point for the threshold.
fn outer_radius(picture: &SpectralPicture) -> f64 {
    picture.spectrum.boundary_radii().into_iter().fold(0.0, f64::max)
}

/// `max(1e−4, 10·σ_min)` at the point `λ = r(T)` on the outer circle.
pub fn reference_threshold(spec: &WeightSpec, picture: &SpectralPicture, n: usize) -> Result<f64, OracleError> {
    let r = outer_radius(picture);
    let reference = sigma_min_truncation(spec, Complex64::new(r, 0.0), n)?;
    Ok((10.0 * reference.sigma_min).max(TAU_FLOOR))
}

/// Probe at `λ` judged against `approx_point`: inside iff `σ_min < τ`.
pub fn ap_membership_probe(
    spec: &WeightSpec,
    picture: &SpectralPicture,
    lambda: Complex64,
    n: usize,
    threshold: Option<f64>,
) -> Result<TruncationProbe, OracleError> {
    let tau = match threshold {
        Some(t) => t,
        None => reference_threshold(spec, picture, n)?,
    };
    let mut probe = sigma_min_truncation(spec, lambda, n)?;
    judge(&mut probe, &picture.approx_point, tau);
    Ok(probe)
}

fn judge(probe: &mut TruncationProbe, region: &RadialRegion, tau: f64) {
    let inside = probe.sigma_min < tau;
    let predicted = membership(region, probe.lambda);
    probe.threshold = Some(tau);
    probe.inside = Some(inside);
    probe.agrees = Some(match predicted {
        Membership::BoundaryUnknown => true,
        Membership::Inside => inside,
        Membership::Outside => !inside,
    });
    probe.predicted = Some(predicted);
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub radial: usize,
    pub angular: usize,
    pub n: usize,
    pub threshold: f64,
    pub probes: Vec<TruncationProbe>,
    pub counted: usize,
    pub agreeing: usize,
    pub excluded: usize,
    pub agreement_rate: f64,
}

/// Polar grid `ρ_i = 2r(i + ½)/R`, `θ_j = 2πj/Θ`. Points within `0.05·r` of
/// an edge of the spectrum or `approx_point`, and points of undetermined
/// membership, are left out of the agreement rate.
pub fn grid_probe(
    spec: &WeightSpec,
    picture: &SpectralPicture,
    radial: usize,
    angular: usize,
    n: usize,
) -> Result<GridReport, OracleError> {
    if radial == 0 || angular == 0 {
        return Err(OracleError::EmptyGrid);
    }
    check_dim(n)?;
    let r = outer_radius(picture);
    let tau = reference_threshold(spec, picture, n)?;
    let points: Vec<Complex64> = (0..radial)
        .flat_map(|i| {
            (0..angular).map(move |j| {
                let rho = 2.0 * r * (i as f64 + 0.5) / radial as f64;
                Complex64::from_polar(rho, std::f64::consts::TAU * j as f64 / angular as f64)
            })
        })
        .collect();
    let probes = points
        .par_iter()
        .map(|&lambda| {
            let mut probe = sigma_min_truncation(spec, lambda, n)?;
            judge(&mut probe, &picture.approx_point, tau);
            Ok(probe)
        })
        .collect::<Result<Vec<_>, OracleError>>()?;
    let mut edges = picture.spectrum.boundary_radii();
    edges.extend(picture.approx_point.boundary_radii());
    let band = EDGE_BAND * r;
    let mut counted = 0;
    let mut agreeing = 0;
    for probe in &probes {
        let rho = probe.lambda.norm();
        let near_edge = edges.iter().any(|e| (rho - e).abs() <= band);
        if near_edge || probe.predicted == Some(Membership::BoundaryUnknown) {
            continue;
        }
        counted += 1;
        if probe.agrees == Some(true) {
            agreeing += 1;
        }
    }
    let agreement_rate = if counted == 0 { 1.0 } else { agreeing as f64 / counted as f64 };
    Ok(GridReport {
        radial,
        angular,
        n,
        threshold: tau,
        excluded: probes.len() - counted,
        probes,
        counted,
        agreeing,
        agreement_rate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenResidual {
    pub residual: f64,
    pub bound: f64,
    /// Rounding allowance of the cancelling components, relative to `‖x_N‖`.
    pub roundoff: f64,
}

impl EigenResidual {
    pub fn within_bound(&self) -> bool {
        self.residual <= self.bound + self.roundoff
    }
}

/// `‖T*x_N − λx_N‖/‖x_N‖` for `x_N = Σ_{n<N} λⁿ/β_n e_n`, with the bound
/// `|λ|^N/β_N · sup ω/‖x_N‖` from the dropped term.
pub fn adjoint_eigen_residual(spec: &WeightSpec, lambda: Complex64, n: usize) -> Result<EigenResidual, OracleError> {
    if spec.is_bilateral() {
        return Err(OracleError::Bilateral);
    }
    if n == 0 || n > MAX_DIM {
        return Err(OracleError::Budget(n));
    }
    let (r2, _) = unilateral_r2(spec)?;
    let modulus = lambda.norm();
    if modulus >= r2 {
        return Err(OracleError::OutsideDisc { modulus, limit: r2 });
    }
    let (x, next) = spec.with_log_beta(n, 0, |pos, _| {
        let x: SparseVec = (0..n).map(|k| (k as i64, evaluation_term(lambda, k, pos[k]))).collect();
        (x, evaluation_term(lambda, n, pos[n]).norm())
    })?;
    let mut diff = banded_apply(&BandedOperator::adjoint(spec), &x)?;
    for (&k, &v) in &x {
        *diff.entry(k).or_default() -= lambda * v;
    }
    let norm = norm_sqr(&x).sqrt();
    let sup = spec.sup_weight(n.max(64))?.value;
    Ok(EigenResidual {
        residual: norm_sqr(&diff).sqrt() / norm,
        bound: next * sup / norm,
        roundoff: 8.0 * f64::EPSILON * (sup + modulus),
    })
}

/// `|⟨p(T)e_0, k_λ⟩ − p(λ)|` with `p(T)e_0` built by repeated application
/// of the shift; `coefficients[k]` multiplies `z^k`.
pub fn reproducing_check(
    spec: &WeightSpec,
    coefficients: &[Complex64],
    lambda: Complex64,
    n: usize,
) -> Result<f64, OracleError> {
    if spec.is_bilateral() {
        return Err(OracleError::Bilateral);
    }
    let degree = coefficients.len().saturating_sub(1);
    if degree + 1 > n {
        return Err(OracleError::Degree { degree, len: n });
    }
    let (r2, _) = unilateral_r2(spec)?;
    let modulus = lambda.norm();
    if modulus > 0.9 * r2 {
        return Err(OracleError::OutsideDisc { modulus, limit: 0.9 * r2 });
    }
    let kernel = kernel_coefficients(spec, lambda, n.max(4))?;
    let shift = BandedOperator::shift(spec);
    let mut power = basis(0);
    let mut image = SparseVec::new();
    for (k, &c) in coefficients.iter().enumerate() {
        if k > 0 {
            power = banded_apply(&shift, &power)?;
        }
        for (&j, &v) in &power {
            *image.entry(j).or_default() += c * v;
        }
    }
    let pairing: Complex64 = image.iter().map(|(&j, &v)| v * kernel.coefficients[j as usize].conj()).sum();
    let value = coefficients.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * lambda + c);
    Ok((pairing - value).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radii::estimate_radii;
    use crate::spectra::spectral_picture;
    use crate::weightspec::Builtin;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn bergman() -> WeightSpec {
        WeightSpec::unilateral(vec![], TailRule::Builtin(Builtin::Bergman)).unwrap()
    }

    fn bilateral_unit() -> WeightSpec {
        WeightSpec::bilateral(vec![], TailRule::Constant(1.0), vec![], TailRule::Constant(1.0)).unwrap()
    }

    fn picture(spec: &WeightSpec) -> SpectralPicture {
        spectral_picture(&estimate_radii(spec, 1024).unwrap()).unwrap()
    }

    #[test]
    fn shift_and_adjoint_on_e0() {
        let s = unit_shift();
        assert_eq!(banded_apply(&BandedOperator::shift(&s), &basis(0)).unwrap(), basis(1));
        assert!(banded_apply(&BandedOperator::adjoint(&s), &basis(0)).unwrap().is_empty());
        let b = bilateral_unit();
        assert_eq!(banded_apply(&BandedOperator::adjoint(&b), &basis(0)).unwrap(), basis(-1));
    }

    #[test]
    fn witness_vectors_and_norms() {
        let s = unit_shift();
        let t = BandedOperator::adjoint(&s).plus(BandedOperator::shift(&s).scaled(c(2.0)));
        let t_adj = BandedOperator::shift(&s).plus(BandedOperator::adjoint(&s).scaled(c(2.0)));
        let x = SparseVec::from([(0, c(1.0)), (2, c(-2.0))]);
        let t2x = banded_apply(&t, &banded_apply(&t, &x).unwrap()).unwrap();
        assert_eq!(t2x, SparseVec::from([(2, c(-4.0)), (4, c(-8.0))]));
        let a2x = banded_apply(&t_adj, &banded_apply(&t_adj, &x).unwrap()).unwrap();
        assert_eq!(a2x, SparseVec::from([(0, c(-6.0)), (2, c(-7.0)), (4, c(-2.0))]));
        let w = hyponormal_not_subnormal_witness();
        assert_eq!((w.norm_adjoint_sq, w.norm_sq, w.pass), (89.0, 80.0, true));
    }

    #[test]
    fn perturbed_witnesses_fail() {
        let s = unit_shift();
        let t = BandedOperator::adjoint(&s).plus(BandedOperator::shift(&s).scaled(c(2.0)));
        let t_adj = BandedOperator::shift(&s).plus(BandedOperator::adjoint(&s).scaled(c(2.0)));
        // x = e_0: T²e_0 = 2e_0 + 4e_2, (T*)²e_0 = 2e_0 + e_2
        let w = witness_norms(&t, &t_adj, &basis(0)).unwrap();
        assert_eq!((w.norm_sq, w.norm_adjoint_sq), (20.0, 5.0));
        assert!(!w.pass);
        let t = BandedOperator::adjoint(&s).plus(BandedOperator::shift(&s));
        let x = SparseVec::from([(0, c(1.0)), (2, c(-2.0))]);
        let w = witness_norms(&t, &t, &x).unwrap();
        // (S*+S)x = -e_1 - 2e_3, then -e_0 - 3e_2 - 2e_4
        assert_eq!((w.norm_sq, w.norm_adjoint_sq), (14.0, 14.0));
        assert!(!w.pass);
    }

    #[test]
    fn isometry_columns_are_orthonormal() {
        let s = unit_shift();
        for n in [8, 50, 300] {
            assert!((sigma_min_truncation(&s, c(0.0), n).unwrap().sigma_min - 1.0).abs() < 1e-9);
        }
        assert!(sigma_min_truncation(&s, c(2.0), 200).unwrap().sigma_min >= 1.0 - 1e-9);
    }

    #[test]
    fn half_lies_in_isometry_bracket() {
        let s = unit_shift();
        let a = sigma_min_truncation(&s, c(0.5), 200).unwrap().sigma_min;
        let b = sigma_min_truncation(&s, c(0.5), 400).unwrap().sigma_min;
        assert!((a - b).abs() < 1e-3);
        for v in [a, b] {
            assert!((0.5 - 1e-9..=0.75f64.sqrt() + 1e-9).contains(&v), "{v}");
        }
    }

    #[test]
    fn brute_force_singular_value() {
        // rectangular (N+1)×N matrix of T − λ on the bergman shift
        let spec = bergman();
        let lambda = Complex64::from_polar(0.7, 0.4);
        let n = 40;
        let mut m = nalgebra::DMatrix::<Complex64>::zeros(n + 1, n);
        for j in 0..n {
            m[(j, j)] = -lambda;
            m[(j + 1, j)] = c(spec.weight_at(j as i64).unwrap());
        }
        let svd = m.svd(false, false);
        let brute = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
        let probe = sigma_min_truncation(&spec, lambda, n).unwrap();
        assert!((probe.sigma_min - brute).abs() < 1e-8, "{} vs {brute}", probe.sigma_min);
    }

    #[test]
    fn dimension_limits() {
        let s = unit_shift();
        assert_eq!(sigma_min_truncation(&s, c(0.0), 7), Err(OracleError::DimTooSmall(7)));
        assert_eq!(sigma_min_truncation(&s, c(0.0), 1_000_000_000), Err(OracleError::Budget(1_000_000_000)));
    }

    #[test]
    fn membership_probes() {
        let s = unit_shift();
        let p = picture(&s);
        let near = ap_membership_probe(&s, &p, Complex64::from_polar(0.99, 1.0), 500, None).unwrap();
        let half = ap_membership_probe(&s, &p, c(0.5), 500, None).unwrap();
        assert!(near.sigma_min < half.sigma_min);
        assert_eq!(half.inside, Some(false));
        assert_eq!(half.agrees, Some(true));
        let two = ap_membership_probe(&s, &p, c(2.0), 200, None).unwrap();
        assert_eq!((two.inside, two.agrees), (Some(false), Some(true)));
        let b = bilateral_unit();
        let values: Vec<f64> =
            [100, 200, 400].iter().map(|&n| sigma_min_truncation(&b, c(1.0), n).unwrap().sigma_min).collect();
        assert!(values[0] > values[1] && values[1] > values[2] && values[2] < 0.05, "{values:?}");
    }

    #[test]
    fn grids_agree_with_pictures() {
        for spec in [unit_shift(), bilateral_unit(), bergman()] {
            let g = grid_probe(&spec, &picture(&spec), 8, 16, 400).unwrap();
            assert_eq!(g.probes.len(), 128);
            assert!(g.agreement_rate >= 0.95, "{}", g.agreement_rate);
            assert!(g.counted > 0);
        }
    }

    #[test]
    fn grid_order_is_deterministic() {
        let s = bergman();
        let p = picture(&s);
        let a = grid_probe(&s, &p, 3, 5, 64).unwrap();
        let b = grid_probe(&s, &p, 3, 5, 64).unwrap();
        assert_eq!(a, b);
        assert!((a.probes[5].lambda.norm() - 2.0 * 1.5 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn eigen_residuals() {
        let s = unit_shift();
        let r = adjoint_eigen_residual(&s, c(0.5), 40).unwrap();
        assert!(r.residual <= 2f64.powi(-39));
        assert!(r.within_bound());
        let b = adjoint_eigen_residual(&bergman(), c(0.5), 40).unwrap();
        assert!(b.residual <= 1e-9 && b.within_bound());
        assert_eq!(adjoint_eigen_residual(&bergman(), c(0.0), 4).unwrap().residual, 0.0);
        assert!(matches!(adjoint_eigen_residual(&s, c(1.0), 40), Err(OracleError::OutsideDisc { .. })));
    }

    #[test]
    fn reproducing_examples() {
        let s = unit_shift();
        assert_eq!(reproducing_check(&s, &[c(1.0)], c(0.3), 8).unwrap(), 0.0);
        assert!(reproducing_check(&s, &[c(0.0), c(1.0)], c(0.5), 8).unwrap() <= 1e-14);
        let p: Vec<Complex64> = (0..21).map(|k| c(((k * 37 % 17) as f64 / 8.0) - 1.0)).collect();
        assert!(reproducing_check(&bergman(), &p, c(0.6), 32).unwrap() <= 1e-8);
        assert!(matches!(reproducing_check(&s, &p, c(0.5), 10), Err(OracleError::Degree { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn sigma_min_is_monotone_in_dimension(re in -2.0..2.0f64, im in -2.0..2.0f64, n in 8usize..120) {
            let spec = bergman();
            let lambda = Complex64::new(re, im);
            let a = sigma_min_truncation(&spec, lambda, n).unwrap().sigma_min;
            let b = sigma_min_truncation(&spec, lambda, 2 * n).unwrap().sigma_min;
            prop_assert!(b <= a + 1e-12);
        }

        #[test]
        fn sigma_min_is_rotation_invariant(rho in 0.05..2.0f64, theta in 0.0..std::f64::consts::TAU) {
            let spec = WeightSpec::unilateral(vec![0.5, 3.0], TailRule::Periodic(vec![1.0, 2.0])).unwrap();
            let a = sigma_min_truncation(&spec, Complex64::from_polar(rho, theta), 64).unwrap().sigma_min;
            let b = sigma_min_truncation(&spec, c(rho), 64).unwrap().sigma_min;
            prop_assert!((a - b).abs() <= 1e-10);
        }

        #[test]
        fn banded_apply_is_linear(
            xs in proptest::collection::vec((0i64..20, -3.0..3.0f64), 1..8),
            ys in proptest::collection::vec((0i64..20, -3.0..3.0f64), 1..8),
            alpha in -4i32..4,
        ) {
            let spec = WeightSpec::unilateral(vec![2.0], TailRule::Constant(3.0)).unwrap();
            let op = BandedOperator::adjoint(&spec).plus(BandedOperator::shift(&spec).scaled(c(2.0)));
            // dyadic entries keep every product exact
            let x: SparseVec = xs.iter().map(|&(k, v)| (k, c((v * 4.0).round() / 4.0))).collect();
            let y: SparseVec = ys.iter().map(|&(k, v)| (k, c((v * 4.0).round() / 4.0))).collect();
            let a = c(alpha as f64);
            let mut combo = y.clone();
            for (&k, &v) in &x {
                *combo.entry(k).or_default() += a * v;
            }
            combo.retain(|_, v| *v != c(0.0));
            let lhs = banded_apply(&op, &combo).unwrap();
            let mut rhs = banded_apply(&op, &y).unwrap();
            for (k, v) in banded_apply(&op, &x).unwrap() {
                *rhs.entry(k).or_default() += a * v;
            }
            rhs.retain(|_, v| *v != c(0.0));
            prop_assert_eq!(lhs, rhs);
        }
    }
}
