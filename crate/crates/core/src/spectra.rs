//! The five spectra of a weighted shift, assembled from its radii.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::radii::{Method, RadiiReport, SideRadii};
use crate::regions::{contains_region, EdgeStatus, Membership, RadialRegion};
use crate::weightspec::ShiftKind;

const CHAIN_SLACK: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum SpectraError {
    #[error("inconsistent radii: {}", .0.join("; "))]
    InconsistentRadii(Vec<String>),
    #[error("bilateral report without negative-side radii")]
    MissingNegativeSide,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralPicture {
    pub kind: ShiftKind,
    pub spectrum: RadialRegion,
    pub approx_point: RadialRegion,
    pub point: RadialRegion,
    pub point_adjoint: RadialRegion,
    pub compression: RadialRegion,
    pub invertible: Option<bool>,
    pub notes: Vec<String>,
}

/// `{a ≤ |λ| ≤ b}` with both edges undetermined. When `a = b` the circle is
/// decided by the series whose convergence defines the eigenvectors: for a
/// tail with closed-form radii one of the two series has terms bounded
/// below on that circle, so the circle carries no eigenvalues.
fn point_band(a: f64, b: f64, decidable: bool) -> RadialRegion {
    if a == b && decidable {
        RadialRegion::Empty
    } else {
        RadialRegion::annulus(a, b, EdgeStatus::Unknown, EdgeStatus::Unknown)
    }
}

/// Spectrum, approximate point spectrum, point spectra of `T` and `T*` and
/// compression spectrum of the shift described by `radii`.
pub fn spectral_picture(radii: &RadiiReport) -> Result<SpectralPicture, SpectraError> {
    let violations = radii.chain_violations(CHAIN_SLACK);
    if !violations.is_empty() {
        return Err(SpectraError::InconsistentRadii(violations));
    }
    match radii.kind {
        ShiftKind::Unilateral => Ok(unilateral_picture(&radii.plus)),
        ShiftKind::Bilateral => {
            let minus = radii.minus.as_ref().ok_or(SpectraError::MissingNegativeSide)?;
            Ok(bilateral_picture(&radii.plus, minus, radii.invertible.unwrap_or(false)))
        }
    }
}

fn unilateral_picture(s: &SideRadii) -> SpectralPicture {
    let point_adjoint = if s.r2 == 0.0 { RadialRegion::Origin } else { RadialRegion::disc(s.r2, EdgeStatus::Unknown) };
    SpectralPicture {
        kind: ShiftKind::Unilateral,
        spectrum: RadialRegion::closed_disc(s.r),
        approx_point: RadialRegion::closed_annulus(s.r1, s.r),
        point: RadialRegion::Empty,
        compression: point_adjoint.clone(),
        point_adjoint,
        invertible: None,
        notes: vec![
            format!("spectrum: closed disc of radius r = {} (unilateral shift spectrum)", s.r),
            format!(
                "approx_point: closed annulus r1 = {} ≤ |λ| ≤ r = {} (unilateral approximate point spectrum)",
                s.r1, s.r
            ),
            "point: empty, an injective unilateral shift has no eigenvalues".into(),
            format!(
                "point_adjoint: open disc of radius r2 = {} up to its edge, which the eigenvector series leaves open; \
                 one of the two containments is an equality by circular symmetry",
                s.r2
            ),
            "compression: conjugate of point_adjoint, equal to it because the region is radial".into(),
        ],
    }
}

fn bilateral_picture(plus: &SideRadii, minus: &SideRadii, invertible: bool) -> SpectralPicture {
    let outer = plus.r.max(minus.r);
    let inner = plus.r1.min(minus.r1);
    let mut notes = Vec::new();
    let spectrum = if invertible {
        notes.push(format!(
            "spectrum: annulus 1/r(T⁻¹) = {inner} ≤ |λ| ≤ r(T) = {outer} (invertible bilateral shift); \
             1/r(T⁻¹) is the smaller one-sided r1, read off the norms of negative powers"
        ));
        RadialRegion::closed_annulus(inner, outer)
    } else {
        notes.push(format!("spectrum: closed disc of radius r(T) = {outer} (non-invertible bilateral shift)"));
        RadialRegion::closed_disc(outer)
    };
    let approx_point = if minus.r < plus.r1 {
        notes.push(format!(
            "approx_point: two annuli [{}, {}] ∪ [{}, {}] since r⁻ < r1⁺ (ridge description)",
            minus.r1, minus.r, plus.r1, plus.r
        ));
        RadialRegion::union(vec![
            RadialRegion::closed_annulus(minus.r1, minus.r),
            RadialRegion::closed_annulus(plus.r1, plus.r),
        ])
    } else {
        notes.push(format!(
            "approx_point: single annulus [{inner}, {outer}] since r⁻ ≥ r1⁺ (ridge description); it equals the spectrum"
        ));
        RadialRegion::closed_annulus(inner, outer)
    };
    let exact = |s: &SideRadii| s.method == Method::Exact;
    let point = point_band(plus.r3, minus.r2, exact(plus) || exact(minus));
    let point_adjoint = point_band(minus.r3, plus.r2, exact(plus) || exact(minus));
    notes.push(format!(
        "point: between r3⁺ = {} and r2⁻ = {}, edges undetermined; empty when r2⁻ < r3⁺",
        plus.r3, minus.r2
    ));
    notes.push(format!(
        "point_adjoint: between r3⁻ = {} and r2⁺ = {}, edges undetermined; empty when r2⁺ < r3⁻",
        minus.r3, plus.r2
    ));
    notes.push("at most one of point and point_adjoint is nonempty for a bilateral shift".into());
    notes.push("compression: conjugate of point_adjoint, equal to it because the region is radial".into());
    SpectralPicture {
        kind: ShiftKind::Bilateral,
        spectrum,
        approx_point,
        point,
        compression: point_adjoint.clone(),
        point_adjoint,
        invertible: Some(invertible),
        notes,
    }
}

/// Every invariant of `picture` that fails, with the radii involved.
pub fn check_picture_consistency(picture: &SpectralPicture) -> Vec<String> {
    let mut out = Vec::new();
    if !contains_region(&picture.spectrum, &picture.approx_point) {
        out.push(format!("approx_point {} is not contained in spectrum {}", picture.approx_point, picture.spectrum));
    }
    for rho in picture.spectrum.boundary_radii() {
        if picture.approx_point.membership_at_radius(rho) != Membership::Inside {
            out.push(format!("boundary circle |λ| = {rho} of the spectrum is not in approx_point"));
        }
    }
    match picture.kind {
        ShiftKind::Unilateral => {
            if !picture.point.is_empty() {
                out.push(format!("unilateral point spectrum {} is not empty", picture.point));
            }
        }
        ShiftKind::Bilateral => {
            let p = picture.point.profile().is_certainly_nonempty();
            let q = picture.point_adjoint.profile().is_certainly_nonempty();
            if p && q {
                out.push(format!("both point spectra are nonempty: {} and {}", picture.point, picture.point_adjoint));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radii::estimate_radii;
    use crate::weightspec::{Builtin, TailRule, WeightSpec};
    use std::f64::consts::E;
    use EdgeStatus::*;

    fn picture(spec: &WeightSpec) -> SpectralPicture {
        spectral_picture(&estimate_radii(spec, 256).unwrap()).unwrap()
    }

    #[test]
    fn unweighted_unilateral() {
        let p = picture(&WeightSpec::unilateral(vec![], TailRule::Constant(1.0)).unwrap());
        assert_eq!(p.spectrum, RadialRegion::closed_disc(1.0));
        assert_eq!(p.approx_point, RadialRegion::circle(1.0));
        assert_eq!(p.point, RadialRegion::Empty);
        assert_eq!(p.point_adjoint, RadialRegion::disc(1.0, Unknown));
        assert_eq!(p.compression, p.point_adjoint);
        assert!(check_picture_consistency(&p).is_empty());
    }

    #[test]
    fn unitary_bilateral() {
        let spec = WeightSpec::bilateral(vec![], TailRule::Constant(1.0), vec![], TailRule::Constant(1.0)).unwrap();
        let p = picture(&spec);
        assert_eq!(p.spectrum, RadialRegion::circle(1.0));
        assert_eq!(p.approx_point, RadialRegion::circle(1.0));
        assert_eq!(p.point, RadialRegion::Empty);
        assert_eq!(p.point_adjoint, RadialRegion::Empty);
        assert_eq!(p.invertible, Some(true));
        assert!(check_picture_consistency(&p).is_empty());
    }

    #[test]
    fn williams_picture() {
        let p = picture(&WeightSpec::unilateral(vec![], TailRule::Builtin(Builtin::WilliamsGap)).unwrap());
        assert_eq!(p.spectrum, RadialRegion::closed_disc(E));
        assert_eq!(p.approx_point, RadialRegion::closed_disc(E));
        assert_eq!(p.point_adjoint, RadialRegion::disc(1.0, Unknown));
        assert!(check_picture_consistency(&p).is_empty());
        // nothing of the compression spectrum lies outside σ_ap
        assert!(p.compression.difference(&p.approx_point).is_empty());
    }

    #[test]
    fn compression_minus_ap_is_open_r1_disc() {
        // closed-form tails give r1 = r2, so the radii are set by hand
        let spec = WeightSpec::unilateral(vec![], TailRule::Constant(1.0)).unwrap();
        let mut radii = estimate_radii(&spec, 128).unwrap();
        radii.plus.r1 = 0.3;
        radii.plus.r2 = 0.6;
        radii.plus.r3 = 0.9;
        let p = spectral_picture(&radii).unwrap();
        assert_eq!(p.compression.difference(&p.approx_point), RadialRegion::open_disc(0.3));
    }

    #[test]
    fn ridge_splits_when_sides_separate() {
        let spec = WeightSpec::bilateral(vec![], TailRule::Constant(2.0), vec![], TailRule::Constant(0.5)).unwrap();
        let p = picture(&spec);
        assert_eq!(p.spectrum, RadialRegion::closed_annulus(0.5, 2.0));
        assert!(p
            .approx_point
            .same_set(&RadialRegion::union(vec![RadialRegion::circle(0.5), RadialRegion::circle(2.0)])));
        // r3⁺ = 2 > r2⁻ = 0.5: no eigenvalues of T; T* has 0.5 < |μ| < 2
        assert_eq!(p.point, RadialRegion::Empty);
        assert_eq!(p.point_adjoint, RadialRegion::annulus(0.5, 2.0, Unknown, Unknown));
        assert!(check_picture_consistency(&p).is_empty());
    }

    #[test]
    fn non_invertible_bilateral_is_a_disc() {
        let spec =
            WeightSpec::bilateral(vec![], TailRule::Constant(1.0), vec![], TailRule::expr("1/(n+2)").unwrap()).unwrap();
        let p = picture(&spec);
        assert_eq!(p.invertible, Some(false));
        assert_eq!(p.spectrum, RadialRegion::closed_disc(1.0));
        assert!(contains_region(&p.spectrum, &p.approx_point));
        assert!(check_picture_consistency(&p).is_empty());
    }

    #[test]
    fn rejects_broken_chains() {
        let spec = WeightSpec::unilateral(vec![], TailRule::Constant(1.0)).unwrap();
        let mut radii = estimate_radii(&spec, 128).unwrap();
        radii.plus.r1 = 1.5;
        assert!(matches!(spectral_picture(&radii), Err(SpectraError::InconsistentRadii(_))));
    }

    #[test]
    fn detects_hand_built_violation() {
        let spec = WeightSpec::unilateral(vec![], TailRule::Constant(1.0)).unwrap();
        let mut p = picture(&spec);
        p.approx_point = RadialRegion::closed_annulus(0.5, 2.0);
        let v = check_picture_consistency(&p);
        assert_eq!(v.len(), 1, "{v:?}");
        p.approx_point = RadialRegion::circle(1.0);
        p.point = RadialRegion::circle(0.5);
        assert_eq!(check_picture_consistency(&p).len(), 1);
    }
}
