//! Circularly symmetric subsets of the complex plane.
//!
//! Every region here is a union of discs, annuli and circles centred at the
//! origin, so membership of `λ` depends on `|λ|` only. Edges carry an
//! [`EdgeStatus`]; `Unknown` marks a boundary circle whose membership is
//! provably all-or-nothing but undetermined, and it propagates as a third
//! truth value through every set operation.
//!
//! Set operations go through a [`Profile`]: the region as a piecewise
//! constant three-valued function of the radius.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeStatus {
    Included,
    Excluded,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    Inside,
    Outside,
    BoundaryUnknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RadialRegion {
    Empty,
    Origin,
    Circle { radius: f64 },
    Disc { radius: f64, edge: EdgeStatus },
    Annulus { inner: f64, outer: f64, inner_edge: EdgeStatus, outer_edge: EdgeStatus },
    Union { members: Vec<RadialRegion> },
}

/// Kleene three-valued truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tri {
    In,
    Out,
    Unknown,
}

impl Tri {
    fn or(self, other: Tri) -> Tri {
        match (self, other) {
            (Tri::In, _) | (_, Tri::In) => Tri::In,
            (Tri::Out, Tri::Out) => Tri::Out,
            _ => Tri::Unknown,
        }
    }

    fn and(self, other: Tri) -> Tri {
        match (self, other) {
            (Tri::Out, _) | (_, Tri::Out) => Tri::Out,
            (Tri::In, Tri::In) => Tri::In,
            _ => Tri::Unknown,
        }
    }

    fn not(self) -> Tri {
        match self {
            Tri::In => Tri::Out,
            Tri::Out => Tri::In,
            Tri::Unknown => Tri::Unknown,
        }
    }
}

impl From<EdgeStatus> for Tri {
    fn from(e: EdgeStatus) -> Tri {
        match e {
            EdgeStatus::Included => Tri::In,
            EdgeStatus::Excluded => Tri::Out,
            EdgeStatus::Unknown => Tri::Unknown,
        }
    }
}

impl From<Tri> for EdgeStatus {
    fn from(t: Tri) -> EdgeStatus {
        match t {
            Tri::In => EdgeStatus::Included,
            Tri::Out => EdgeStatus::Excluded,
            Tri::Unknown => EdgeStatus::Unknown,
        }
    }
}

impl From<Tri> for Membership {
    fn from(t: Tri) -> Membership {
        match t {
            Tri::In => Membership::Inside,
            Tri::Out => Membership::Outside,
            Tri::Unknown => Membership::BoundaryUnknown,
        }
    }
}

/// A radial region as a function of `ρ = |λ|`: a status at each breakpoint
/// and on each open gap between consecutive breakpoints. The first
/// breakpoint is always `0` and everything beyond the last one is outside.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    points: Vec<(f64, Tri)>,
    /// `gaps[i]` covers `(points[i].0, points[i+1].0)`.
    gaps: Vec<Tri>,
}

impl Profile {
    fn new(mut points: Vec<(f64, Tri)>, gaps: Vec<Tri>) -> Profile {
        debug_assert_eq!(points.len(), gaps.len() + 1);
        debug_assert_eq!(points[0].0, 0.0);
        let mut gaps = gaps;
        // merge breakpoints that carry no information
        let mut i = 1;
        while i < points.len() {
            let left = gaps[i - 1];
            let right = gaps.get(i).copied().unwrap_or(Tri::Out);
            if points[i].1 == left && left == right {
                points.remove(i);
                if i < gaps.len() {
                    gaps.remove(i);
                } else {
                    gaps.pop();
                }
            } else {
                i += 1;
            }
        }
        Profile { points, gaps }
    }

    fn empty() -> Profile {
        Profile { points: vec![(0.0, Tri::Out)], gaps: Vec::new() }
    }

    pub fn at(&self, rho: f64) -> Tri {
        for (i, &(p, status)) in self.points.iter().enumerate() {
            if rho == p {
                return status;
            }
            let next = self.points.get(i + 1).map(|q| q.0);
            match next {
                Some(q) if rho < q => return self.gaps[i],
                Some(_) => continue,
                None => return Tri::Out,
            }
        }
        Tri::Out
    }

    fn gap_containing(&self, lo: f64, hi: f64) -> Tri {
        self.at(0.5 * (lo + hi))
    }

    fn combine(&self, other: &Profile, op: impl Fn(Tri, Tri) -> Tri) -> Profile {
        let mut radii: Vec<f64> = self.points.iter().chain(other.points.iter()).map(|p| p.0).collect();
        radii.sort_by(f64::total_cmp);
        radii.dedup();
        let points: Vec<(f64, Tri)> = radii.iter().map(|&r| (r, op(self.at(r), other.at(r)))).collect();
        let gaps: Vec<Tri> =
            radii.windows(2).map(|w| op(self.gap_containing(w[0], w[1]), other.gap_containing(w[0], w[1]))).collect();
        Profile::new(points, gaps)
    }

    fn map(&self, f: impl Fn(Tri) -> Tri) -> Profile {
        Profile {
            points: self.points.iter().map(|&(r, t)| (r, f(t))).collect(),
            gaps: self.gaps.iter().map(|&t| f(t)).collect(),
        }
    }

    pub fn union(&self, other: &Profile) -> Profile {
        self.combine(other, Tri::or)
    }

    pub fn intersection(&self, other: &Profile) -> Profile {
        self.combine(other, Tri::and)
    }

    pub fn difference(&self, other: &Profile) -> Profile {
        self.combine(other, |a, b| a.and(b.not()))
    }

    /// Topological interior in the plane.
    pub fn interior(&self) -> Profile {
        let n = self.points.len();
        let mut points = Vec::with_capacity(n);
        for (i, &(r, t)) in self.points.iter().enumerate() {
            let right = self.gaps.get(i).copied().unwrap_or(Tri::Out);
            let status = if i == 0 {
                // the origin is interior iff a small disc around it is inside
                t.and(right)
            } else {
                t.and(self.gaps[i - 1]).and(right)
            };
            points.push((r, status));
        }
        Profile::new(points, self.gaps.clone())
    }

    /// Every `In` point of `inner` (unknowns counted as in) is certainly in
    /// `self` (unknowns counted as out).
    pub fn contains(&self, inner: &Profile) -> bool {
        let outer = self.map(|t| if t == Tri::Unknown { Tri::Out } else { t });
        let inner = inner.map(|t| if t == Tri::Unknown { Tri::In } else { t });
        let merged = inner.combine(&outer, |a, b| if a == Tri::In && b != Tri::In { Tri::Unknown } else { Tri::Out });
        merged.points.iter().all(|p| p.1 != Tri::Unknown) && merged.gaps.iter().all(|&g| g != Tri::Unknown)
    }

    pub fn is_empty(&self) -> bool {
        self.points.iter().all(|p| p.1 == Tri::Out) && self.gaps.iter().all(|&g| g == Tri::Out)
    }

    /// Nonempty with certainty.
    pub fn is_certainly_nonempty(&self) -> bool {
        self.points.iter().any(|p| p.1 == Tri::In) || self.gaps.contains(&Tri::In)
    }

    /// Radii of every breakpoint other than the origin.
    pub fn edges(&self) -> Vec<f64> {
        self.points.iter().skip(1).map(|p| p.0).collect()
    }

    pub fn to_region(&self) -> RadialRegion {
        let mut members = Vec::new();
        let n = self.points.len();
        let mut i = 0;
        while i < n {
            let gap_in = |k: usize| self.gaps.get(k).copied() == Some(Tri::In);
            if gap_in(i) {
                let start = i;
                let mut end = i + 1;
                while end < n && self.points[end].1 == Tri::In && gap_in(end) {
                    end += 1;
                }
                let (a, sa) = self.points[start];
                let (b, sb) = self.points[end];
                members.push(RadialRegion::annulus(a, b, sa.into(), sb.into()));
                i = end;
                // the closing point was consumed as an edge
                if i < n && !gap_in(i) {
                    i += 1;
                }
                continue;
            }
            let (r, t) = self.points[i];
            let left_in = i > 0 && gap_in(i - 1);
            if !left_in {
                match t {
                    Tri::In => members.push(RadialRegion::circle(r)),
                    Tri::Unknown => members.push(RadialRegion::Annulus {
                        inner: r,
                        outer: r,
                        inner_edge: EdgeStatus::Unknown,
                        outer_edge: EdgeStatus::Unknown,
                    }),
                    Tri::Out => {}
                }
            }
            i += 1;
        }
        RadialRegion::union(members)
    }
}

impl RadialRegion {
    pub fn circle(radius: f64) -> RadialRegion {
        if radius == 0.0 {
            RadialRegion::Origin
        } else {
            RadialRegion::Circle { radius }
        }
    }

    pub fn disc(radius: f64, edge: EdgeStatus) -> RadialRegion {
        if radius > 0.0 {
            RadialRegion::Disc { radius, edge }
        } else {
            match edge {
                EdgeStatus::Included => RadialRegion::Origin,
                EdgeStatus::Excluded => RadialRegion::Empty,
                EdgeStatus::Unknown => RadialRegion::Annulus {
                    inner: 0.0,
                    outer: 0.0,
                    inner_edge: EdgeStatus::Unknown,
                    outer_edge: EdgeStatus::Unknown,
                },
            }
        }
    }

    pub fn open_disc(radius: f64) -> RadialRegion {
        RadialRegion::disc(radius, EdgeStatus::Excluded)
    }

    pub fn closed_disc(radius: f64) -> RadialRegion {
        RadialRegion::disc(radius, EdgeStatus::Included)
    }

    /// `{a ⋚ |λ| ⋚ b}`, normalized: closed at a zero inner radius becomes a
    /// disc, a closed zero-width annulus becomes a circle and an empty
    /// annulus becomes `Empty`.
    pub fn annulus(a: f64, b: f64, inner_edge: EdgeStatus, outer_edge: EdgeStatus) -> RadialRegion {
        debug_assert!(a >= 0.0 && b >= 0.0);
        if a > b {
            return RadialRegion::Empty;
        }
        if a == b {
            return match Tri::from(inner_edge).and(Tri::from(outer_edge)) {
                Tri::In => RadialRegion::circle(a),
                Tri::Out => RadialRegion::Empty,
                Tri::Unknown => RadialRegion::Annulus { inner: a, outer: b, inner_edge, outer_edge },
            };
        }
        if a == 0.0 && inner_edge == EdgeStatus::Included {
            return RadialRegion::disc(b, outer_edge);
        }
        RadialRegion::Annulus { inner: a, outer: b, inner_edge, outer_edge }
    }

    pub fn closed_annulus(a: f64, b: f64) -> RadialRegion {
        RadialRegion::annulus(a, b, EdgeStatus::Included, EdgeStatus::Included)
    }

    /// Flattens nested unions and drops empty members.
    pub fn union(members: Vec<RadialRegion>) -> RadialRegion {
        let mut flat = Vec::new();
        for m in members {
            match m {
                RadialRegion::Empty => {}
                RadialRegion::Union { members } => match RadialRegion::union(members) {
                    RadialRegion::Union { members } => flat.extend(members),
                    RadialRegion::Empty => {}
                    other => flat.push(other),
                },
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => RadialRegion::Empty,
            1 => flat.pop().unwrap(),
            _ => RadialRegion::Union { members: flat },
        }
    }

    pub fn profile(&self) -> Profile {
        match *self {
            RadialRegion::Empty => Profile::empty(),
            RadialRegion::Origin => Profile::new(vec![(0.0, Tri::In)], vec![]),
            RadialRegion::Circle { radius: 0.0 } => Profile::new(vec![(0.0, Tri::In)], vec![]),
            RadialRegion::Circle { radius } => Profile::new(vec![(0.0, Tri::Out), (radius, Tri::In)], vec![Tri::Out]),
            RadialRegion::Disc { radius, edge } => {
                if radius == 0.0 {
                    Profile::new(vec![(0.0, edge.into())], vec![])
                } else {
                    Profile::new(vec![(0.0, Tri::In), (radius, edge.into())], vec![Tri::In])
                }
            }
            RadialRegion::Annulus { inner, outer, inner_edge, outer_edge } => {
                if inner > outer {
                    Profile::empty()
                } else if inner == outer {
                    let t = Tri::from(inner_edge).and(outer_edge.into());
                    if inner == 0.0 {
                        Profile::new(vec![(0.0, t)], vec![])
                    } else {
                        Profile::new(vec![(0.0, Tri::Out), (inner, t)], vec![Tri::Out])
                    }
                } else if inner == 0.0 {
                    Profile::new(vec![(0.0, inner_edge.into()), (outer, outer_edge.into())], vec![Tri::In])
                } else {
                    Profile::new(
                        vec![(0.0, Tri::Out), (inner, inner_edge.into()), (outer, outer_edge.into())],
                        vec![Tri::Out, Tri::In],
                    )
                }
            }
            RadialRegion::Union { ref members } => {
                members.iter().fold(Profile::empty(), |acc, m| acc.union(&m.profile()))
            }
        }
    }

    /// Canonical form: equal regions normalize to identical values.
    pub fn normalized(&self) -> RadialRegion {
        self.profile().to_region()
    }

    /// Set equality up to normalization.
    pub fn same_set(&self, other: &RadialRegion) -> bool {
        self.profile() == other.profile()
    }

    pub fn is_empty(&self) -> bool {
        self.profile().is_empty()
    }

    pub fn membership_at_radius(&self, rho: f64) -> Membership {
        self.profile().at(rho).into()
    }

    pub fn difference(&self, other: &RadialRegion) -> RadialRegion {
        self.profile().difference(&other.profile()).to_region()
    }

    pub fn intersection(&self, other: &RadialRegion) -> RadialRegion {
        self.profile().intersection(&other.profile()).to_region()
    }

    pub fn union_with(&self, other: &RadialRegion) -> RadialRegion {
        self.profile().union(&other.profile()).to_region()
    }

    pub fn interior(&self) -> RadialRegion {
        self.profile().interior().to_region()
    }

    /// Every circle `|λ| = ρ` bounding this region (origin excluded).
    pub fn boundary_radii(&self) -> Vec<f64> {
        self.profile().edges()
    }
}

impl fmt::Display for RadialRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn bracket(e: EdgeStatus, open: &'static str, closed: &'static str) -> &'static str {
            match e {
                EdgeStatus::Included => closed,
                EdgeStatus::Excluded => open,
                EdgeStatus::Unknown => "?",
            }
        }
        match self {
            RadialRegion::Empty => write!(f, "∅"),
            RadialRegion::Origin => write!(f, "{{0}}"),
            RadialRegion::Circle { radius } => write!(f, "{{|λ| = {radius}}}"),
            RadialRegion::Disc { radius, edge } => write!(f, "{{|λ| < {radius}{}}}", bracket(*edge, "", "=")),
            RadialRegion::Annulus { inner, outer, inner_edge, outer_edge } => write!(
                f,
                "{{|λ| ∈ {}{inner}, {outer}{}}}",
                bracket(*inner_edge, "(", "["),
                bracket(*outer_edge, ")", "]")
            ),
            RadialRegion::Union { members } => {
                let parts: Vec<String> = members.iter().map(|m| m.to_string()).collect();
                write!(f, "{}", parts.join(" ∪ "))
            }
        }
    }
}

/// Membership of `λ`, decided by `|λ|` alone.
pub fn membership(region: &RadialRegion, lambda: Complex64) -> Membership {
    region.membership_at_radius(lambda.norm())
}

/// Conservative containment: unknown edges of `inner` count as included,
/// unknown edges of `outer` as excluded.
pub fn contains_region(outer: &RadialRegion, inner: &RadialRegion) -> bool {
    outer.profile().contains(&inner.profile())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CircleRole {
    DiscEdge,
    AnnulusInner,
    AnnulusOuter,
    Circle,
}

impl fmt::Display for CircleRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CircleRole::DiscEdge => "disc-edge",
            CircleRole::AnnulusInner => "annulus-inner",
            CircleRole::AnnulusOuter => "annulus-outer",
            CircleRole::Circle => "circle",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundarySample {
    pub circle_role: CircleRole,
    pub radius: f64,
    pub theta: f64,
    pub re: f64,
    pub im: f64,
}

fn push_circle(out: &mut Vec<BoundarySample>, role: CircleRole, radius: f64, samples: usize) {
    if radius <= 0.0 {
        return;
    }
    for k in 0..samples {
        let theta = 2.0 * PI * k as f64 / samples as f64;
        let (s, c) = theta.sin_cos();
        out.push(BoundarySample { circle_role: role, radius, theta, re: radius * c, im: radius * s });
    }
}

/// Equally spaced points on every bounding circle of `region`.
pub fn boundary_samples(region: &RadialRegion, samples_per_circle: usize) -> Vec<BoundarySample> {
    let mut out = Vec::new();
    collect_samples(region, samples_per_circle, &mut out);
    out
}

fn collect_samples(region: &RadialRegion, samples: usize, out: &mut Vec<BoundarySample>) {
    match region {
        RadialRegion::Empty | RadialRegion::Origin => {}
        RadialRegion::Circle { radius } => push_circle(out, CircleRole::Circle, *radius, samples),
        RadialRegion::Disc { radius, .. } => push_circle(out, CircleRole::DiscEdge, *radius, samples),
        RadialRegion::Annulus { inner, outer, .. } => {
            if inner == outer {
                push_circle(out, CircleRole::Circle, *inner, samples);
            } else {
                push_circle(out, CircleRole::AnnulusInner, *inner, samples);
                push_circle(out, CircleRole::AnnulusOuter, *outer, samples);
            }
        }
        RadialRegion::Union { members } => {
            for m in members {
                collect_samples(m, samples, out);
            }
        }
    }
}

/// Writes samples as CSV with columns `circle_role,radius,theta,re,im`.
pub fn write_boundary_csv<W: std::io::Write>(writer: W, samples: &[BoundarySample]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["circle_role", "radius", "theta", "re", "im"])?;
    for s in samples {
        w.write_record([
            s.circle_role.to_string(),
            s.radius.to_string(),
            s.theta.to_string(),
            s.re.to_string(),
            s.im.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use EdgeStatus::*;

    fn polar(r: f64, theta: f64) -> Complex64 {
        Complex64::from_polar(r, theta)
    }

    #[test]
    fn membership_examples() {
        let ann = RadialRegion::annulus(0.5, 1.0, Included, Included);
        assert_eq!(membership(&ann, polar(0.7, PI / 3.0)), Membership::Inside);
        let disc = RadialRegion::disc(1.0, Unknown);
        assert_eq!(membership(&disc, polar(1.0, 0.4)), Membership::BoundaryUnknown);
        assert_eq!(membership(&disc, polar(0.999, 0.4)), Membership::Inside);
        assert_eq!(membership(&RadialRegion::Origin, Complex64::new(0.0, 0.0)), Membership::Inside);
        assert_eq!(membership(&RadialRegion::Origin, Complex64::new(0.1, 0.0)), Membership::Outside);
    }

    #[test]
    fn union_membership_prefers_inside_then_unknown() {
        let u = RadialRegion::Union {
            members: vec![RadialRegion::disc(1.0, Unknown), RadialRegion::closed_annulus(1.0, 2.0)],
        };
        assert_eq!(u.membership_at_radius(1.0), Membership::Inside);
        let u = RadialRegion::Union { members: vec![RadialRegion::disc(1.0, Unknown), RadialRegion::circle(3.0)] };
        assert_eq!(u.membership_at_radius(1.0), Membership::BoundaryUnknown);
        assert_eq!(u.membership_at_radius(2.0), Membership::Outside);
    }

    #[test]
    fn containment_examples() {
        assert!(contains_region(&RadialRegion::closed_disc(1.0), &RadialRegion::closed_annulus(0.5, 1.0)));
        assert!(!contains_region(&RadialRegion::closed_annulus(0.5, 1.0), &RadialRegion::closed_disc(1.0)));
        assert!(!contains_region(&RadialRegion::disc(1.0, Unknown), &RadialRegion::circle(1.0)));
        assert!(contains_region(&RadialRegion::closed_disc(1.0), &RadialRegion::disc(1.0, Unknown)));
        assert!(contains_region(&RadialRegion::closed_disc(1.0), &RadialRegion::Empty));
        assert!(!contains_region(&RadialRegion::Empty, &RadialRegion::Origin));
    }

    #[test]
    fn normalization_rules() {
        assert_eq!(RadialRegion::annulus(0.0, 2.0, Included, Excluded), RadialRegion::disc(2.0, Excluded));
        assert_eq!(RadialRegion::closed_annulus(1.0, 1.0), RadialRegion::circle(1.0));
        assert_eq!(RadialRegion::annulus(1.0, 1.0, Included, Excluded), RadialRegion::Empty);
        assert_eq!(RadialRegion::annulus(2.0, 1.0, Included, Included), RadialRegion::Empty);
        assert_eq!(RadialRegion::union(vec![]), RadialRegion::Empty);
        assert_eq!(RadialRegion::closed_disc(0.0), RadialRegion::Origin);
        assert_eq!(RadialRegion::open_disc(0.0), RadialRegion::Empty);
        let touching = RadialRegion::union(vec![
            RadialRegion::closed_annulus(0.5, 1.0),
            RadialRegion::annulus(1.0, 2.0, Excluded, Included),
        ]);
        assert_eq!(touching.normalized(), RadialRegion::closed_annulus(0.5, 2.0));
    }

    #[test]
    fn difference_of_compression_and_ap_is_open_inner_disc() {
        // unilateral shift with r1 = 0.4 ≤ r2 = 0.7 ≤ r = 1
        let compression = RadialRegion::disc(0.7, Unknown);
        let ap = RadialRegion::closed_annulus(0.4, 1.0);
        let diff = compression.difference(&ap);
        assert_eq!(diff, RadialRegion::open_disc(0.4));
        assert!(diff.same_set(&RadialRegion::annulus(0.0, 0.4, Included, Excluded)));
    }

    #[test]
    fn interior_drops_boundaries() {
        assert_eq!(RadialRegion::disc(1.0, Unknown).interior(), RadialRegion::open_disc(1.0));
        assert_eq!(RadialRegion::Origin.interior(), RadialRegion::Empty);
        assert_eq!(RadialRegion::circle(2.0).interior(), RadialRegion::Empty);
        assert_eq!(
            RadialRegion::closed_annulus(1.0, 2.0).interior(),
            RadialRegion::annulus(1.0, 2.0, Excluded, Excluded)
        );
    }

    #[test]
    fn punctured_and_unknown_interior_points_round_trip() {
        let punctured = RadialRegion::union(vec![
            RadialRegion::annulus(0.0, 1.0, Included, Excluded),
            RadialRegion::annulus(1.0, 2.0, Excluded, Included),
        ]);
        let back = punctured.normalized();
        assert!(back.same_set(&punctured));
        assert_eq!(back.membership_at_radius(1.0), Membership::Outside);
        let degenerate = RadialRegion::annulus(1.5, 1.5, Unknown, Unknown);
        assert_eq!(degenerate.membership_at_radius(1.5), Membership::BoundaryUnknown);
        assert!(!degenerate.profile().is_certainly_nonempty());
        assert!(!degenerate.is_empty());
    }

    #[test]
    fn boundary_sample_examples() {
        let s = boundary_samples(&RadialRegion::circle(1.0), 4);
        assert_eq!(s.len(), 4);
        let expected = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)];
        for (p, (re, im)) in s.iter().zip(expected) {
            assert!((p.re - re).abs() < 1e-15 && (p.im - im).abs() < 1e-15);
            assert_eq!(p.circle_role, CircleRole::Circle);
        }
        assert!(boundary_samples(&RadialRegion::Empty, 100).is_empty());
        let s = boundary_samples(&RadialRegion::closed_annulus(0.5, 2.0), 8);
        assert_eq!(s.len(), 16);
        assert_eq!(s.iter().filter(|p| p.circle_role == CircleRole::AnnulusInner).count(), 8);
    }

    #[test]
    fn csv_header_and_rows() {
        let mut buf = Vec::new();
        write_boundary_csv(&mut buf, &boundary_samples(&RadialRegion::closed_disc(2.0), 8)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("circle_role,radius,theta,re,im"));
        assert_eq!(lines.count(), 8);
        assert!(text.contains("disc-edge,2,0,2,0"));
    }

    #[test]
    fn serialization_keeps_unknown_edges() {
        let r = RadialRegion::Union { members: vec![RadialRegion::disc(1.0, Unknown), RadialRegion::circle(2.0)] };
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"type\":\"disc\""));
        assert!(json.contains("\"edge\":\"unknown\""));
        let back: RadialRegion = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }

    fn edge() -> impl Strategy<Value = EdgeStatus> {
        prop_oneof![Just(Included), Just(Excluded), Just(Unknown)]
    }

    fn simple_region() -> impl Strategy<Value = RadialRegion> {
        prop_oneof![
            Just(RadialRegion::Empty),
            Just(RadialRegion::Origin),
            (0.1f64..3.0).prop_map(RadialRegion::circle),
            (0.1f64..3.0, edge()).prop_map(|(r, e)| RadialRegion::disc(r, e)),
            (0.0f64..3.0, 0.0f64..3.0, edge(), edge()).prop_map(|(a, b, ei, eo)| RadialRegion::annulus(
                a.min(b),
                a.max(b),
                ei,
                eo
            )),
        ]
    }

    fn region() -> impl Strategy<Value = RadialRegion> {
        prop_oneof![
            3 => simple_region(),
            1 => prop::collection::vec(simple_region(), 0..4).prop_map(RadialRegion::union),
        ]
    }

    proptest! {
        #[test]
        fn membership_is_rotation_invariant(r in region(), rho in 0.0f64..4.0, theta in 0.0f64..(2.0 * PI)) {
            let lambda = Complex64::new(rho, 0.0);
            let rotated = lambda * Complex64::from_polar(1.0, theta);
            // the rotation itself may move |λ| by an ulp; compare at radii off the edges
            prop_assume!(r.boundary_radii().iter().all(|e| (e - rho).abs() > 1e-12));
            prop_assert_eq!(membership(&r, lambda), membership(&r, rotated));
        }

        #[test]
        fn normalization_preserves_membership(r in region(), rho in 0.0f64..4.0) {
            let n = r.normalized();
            prop_assert_eq!(r.membership_at_radius(rho), n.membership_at_radius(rho));
            for e in r.boundary_radii() {
                prop_assert_eq!(r.membership_at_radius(e), n.membership_at_radius(e));
            }
            prop_assert_eq!(n.normalized(), n.clone());
        }

        #[test]
        fn containment_is_reflexive(r in simple_region()) {
            let n = r.normalized();
            // unknown edges make conservative containment fail on itself
            let has_unknown = serde_json::to_string(&n).unwrap().contains("unknown");
            prop_assume!(!has_unknown);
            prop_assert!(contains_region(&n, &n));
        }

        #[test]
        fn containment_is_transitive(a in simple_region(), b in simple_region(), c in simple_region()) {
            if contains_region(&a, &b) && contains_region(&b, &c) {
                prop_assert!(contains_region(&a, &c));
            }
        }

        #[test]
        fn boundary_samples_lie_on_their_circles(r in region(), k in 8usize..40) {
            for s in boundary_samples(&r, k) {
                prop_assert!((s.re * s.re + s.im * s.im - s.radius * s.radius).abs() <= 1e-12 * (1.0 + s.radius * s.radius));
            }
        }

        #[test]
        fn difference_matches_pointwise_logic(a in region(), b in region(), rho in 0.0f64..4.0) {
            let d = a.difference(&b);
            let expect = Tri::from_membership(a.membership_at_radius(rho))
                .and(Tri::from_membership(b.membership_at_radius(rho)).not());
            prop_assert_eq!(d.membership_at_radius(rho), Membership::from(expect));
        }
    }

    impl Tri {
        fn from_membership(m: Membership) -> Tri {
            match m {
                Membership::Inside => Tri::In,
                Membership::Outside => Tri::Out,
                Membership::BoundaryUnknown => Tri::Unknown,
            }
        }
    }
}
