//! Group configuration: three boundary arcs, their reflection circles,
//! the base tangent-circle radius `r₀`, and the one-step growth constants.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::{normalize_angle, ReflectionCircle, TangentCircle, PI, TAU};

/// Safety factor applied to both the separation bound and the base-circle
/// clearance when choosing `r₀`.
const R0_SAFETY: f64 = 0.9;

/// A boundary arc, given by the angle of its midpoint and its arclength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryArc {
    pub center_angle: f64,
    pub arclength: f64,
}

impl BoundaryArc {
    pub fn new(center_angle: f64, arclength: f64) -> Self {
        Self {
            center_angle: normalize_angle(center_angle),
            arclength,
        }
    }
}

/// A validated three-reflection group configuration.
///
/// Holds the three reflection circles `C₁, C₂, C₃` derived from the arcs,
/// the base radius `r₀` of the tangent circle at angle 0, and the one-step
/// curvature growth band `[a, b]`.
#[derive(Debug, Clone, Serialize)]
pub struct GroupConfig {
    pub arcs: [BoundaryArc; 3],
    pub circles: [ReflectionCircle; 3],
    pub r0: f64,
    /// Lower one-step growth constant, `a = 1 + r₀/(3·min Rᵢ) > 1`.
    pub growth_lo: f64,
    /// Upper one-step growth constant, `b = max (Rᵢ+2)²/Rᵢ²`.
    pub growth_hi: f64,
}

impl GroupConfig {
    /// Validate arcs, derive circles, and choose `r₀` automatically.
    pub fn new(arcs: [BoundaryArc; 3]) -> Result<Self> {
        Self::build(arcs, None)
    }

    /// Same as [`GroupConfig::new`] but with a caller-supplied `r₀`, which
    /// must still respect both clearance bounds.
    pub fn with_r0(arcs: [BoundaryArc; 3], r0: f64) -> Result<Self> {
        Self::build(arcs, Some(r0))
    }

    /// The symmetric reference configuration: arcs of length `7π/12`
    /// centered `2π/3` apart, placed so the boundary point 1 sits midway
    /// between two consecutive arcs.
    pub fn symmetric() -> Self {
        let l = 7.0 * PI / 12.0;
        Self::new([
            BoundaryArc::new(PI / 3.0, l),
            BoundaryArc::new(PI, l),
            BoundaryArc::new(5.0 * PI / 3.0, l),
        ])
        .expect("symmetric reference configuration is valid")
    }

    fn build(arcs: [BoundaryArc; 3], r0_override: Option<f64>) -> Result<Self> {
        let circles = [
            ReflectionCircle::from_arc(arcs[0].center_angle, arcs[0].arclength)?,
            ReflectionCircle::from_arc(arcs[1].center_angle, arcs[1].arclength)?,
            ReflectionCircle::from_arc(arcs[2].center_angle, arcs[2].arclength)?,
        ];

        // Pairwise separation of the closed regions D_i (arcs sharing an
        // endpoint give separation 0 and are rejected too).
        let mut min_sep = f64::INFINITY;
        for i in 0..3 {
            for j in (i + 1)..3 {
                let sep = region_separation(&circles[i], &circles[j]);
                if !(sep > 0.0) {
                    return Err(Error::Config(format!(
                        "regions {} and {} are not disjoint (separation {sep:.3e})",
                        i + 1,
                        j + 1
                    )));
                }
                min_sep = min_sep.min(sep);
            }
        }

        // The base point (boundary angle 0) must lie outside every region.
        let one = Complex64::new(1.0, 0.0);
        for (i, c) in circles.iter().enumerate() {
            if c.center_distance(one) <= c.radius {
                return Err(Error::Config(format!(
                    "boundary point 1 lies in region {}; move the arcs away from angle 0",
                    i + 1
                )));
            }
        }

        // r₀ from the separation bound, capped by the clearance of the base
        // circle C(1·(1−r), r) from each region: the circle first touches
        // D_i at r_i = (|1 − c|² − R²) / (2(R + 1 − Re c)).
        let mut r0 = R0_SAFETY * min_sep / 3.0;
        for c in &circles {
            let num = (one - c.center).norm_sqr() - c.radius * c.radius;
            let den = 2.0 * (c.radius + 1.0 - c.center.re);
            if den > 0.0 {
                r0 = r0.min(R0_SAFETY * num / den);
            }
        }

        if let Some(want) = r0_override {
            if !(want > 0.0 && want < 1.0) {
                return Err(Error::Config(format!("r0 must lie in (0, 1), got {want}")));
            }
            let ceiling = r0 / R0_SAFETY;
            if want >= ceiling {
                return Err(Error::Config(format!(
                    "r0 = {want} is too large for this configuration (must stay below {ceiling:.6})"
                )));
            }
            r0 = want;
        }

        // Defensive: the base circle itself must clear every region.
        let base = TangentCircle::new(0.0, 1.0 / r0)?;
        for (i, c) in circles.iter().enumerate() {
            let gap = c.center_distance(base.center()) - c.radius - r0;
            if !(gap > 0.0) {
                return Err(Error::Config(format!(
                    "base circle of radius {r0} touches region {} (gap {gap:.3e})",
                    i + 1
                )));
            }
        }

        let min_radius = circles.iter().map(|c| c.radius).fold(f64::INFINITY, f64::min);
        let growth_lo = 1.0 + r0 / (3.0 * min_radius);
        let growth_hi = circles
            .iter()
            .map(|c| (c.radius + 2.0) * (c.radius + 2.0) / (c.radius * c.radius))
            .fold(0.0, f64::max);

        Ok(Self {
            arcs,
            circles,
            r0,
            growth_lo,
            growth_hi,
        })
    }

    /// Curvature of the base circle, `κ₀ = 1/r₀`.
    pub fn kappa0(&self) -> f64 {
        1.0 / self.r0
    }

    /// The base tangent circle at boundary angle 0.
    pub fn base_circle(&self) -> TangentCircle {
        TangentCircle::new(0.0, self.kappa0()).expect("r0 validated at construction")
    }
}

/// Euclidean distance between the regions `D_i = (disk bounded by Cᵢ) ∩
/// (closed unit disk)`.
///
/// When the nearest points of the two full circles (which lie on the
/// segment through the centers) fall inside the closed unit disk, the
/// region distance is `|cᵢ − cⱼ| − Rᵢ − Rⱼ`; otherwise it is found by a
/// deterministic sampled minimization over the region boundaries.
pub fn region_separation(a: &ReflectionCircle, b: &ReflectionCircle) -> f64 {
    let axis = b.center - a.center;
    let dist = axis.norm();
    let sep = dist - a.radius - b.radius;
    if sep <= 0.0 {
        return sep;
    }
    let dir = axis / dist;
    let pa = a.center + dir * a.radius;
    let pb = b.center - dir * b.radius;
    if pa.norm() <= 1.0 + 1e-12 && pb.norm() <= 1.0 + 1e-12 {
        return sep;
    }
    sampled_region_separation(a, b)
}

/// Boundary of `D_i` as a sampled point set: the part of `Cᵢ` inside the
/// closed disk plus the boundary arc it cuts off.
fn region_boundary_samples(c: &ReflectionCircle, n: usize) -> Vec<Complex64> {
    let mut pts = Vec::with_capacity(2 * n);
    for k in 0..n {
        let t = TAU * k as f64 / n as f64;
        let p = c.center + Complex64::from_polar(c.radius, t);
        if p.norm() <= 1.0 {
            pts.push(p);
        }
    }
    // Arc endpoints: half-angle h with sec(h) = |c| (orthogonality).
    let h = (1.0 / c.center.norm()).acos();
    let mid = c.center.arg();
    for k in 0..=n {
        let t = mid - h + 2.0 * h * k as f64 / n as f64;
        pts.push(Complex64::from_polar(1.0, t));
    }
    pts
}

fn sampled_region_separation(a: &ReflectionCircle, b: &ReflectionCircle) -> f64 {
    // Coarse pass then one refinement round; deterministic and good to
    // ~1e-6, plenty for a safety-factored bound.
    let pa = region_boundary_samples(a, 2048);
    let pb = region_boundary_samples(b, 2048);
    let mut best = f64::INFINITY;
    for x in &pa {
        for y in &pb {
            best = best.min((x - y).norm());
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn symmetric_constants_match_closed_forms() {
        let cfg = GroupConfig::symmetric();
        // r₀ = 0.3·(2·sec(7π/24)·sin(π/3) − 2·tan(7π/24))
        assert_relative_eq!(cfg.r0, 0.071_626_151_096_536_49, max_relative = 1e-14);
        assert_relative_eq!(cfg.kappa0(), 13.961_381_209_109_188, max_relative = 1e-14);
        assert_relative_eq!(cfg.growth_lo, 1.018_320_226_260_477_1, max_relative = 1e-14);
        assert_relative_eq!(cfg.growth_hi, 6.424_470_777_839_296, max_relative = 1e-14);
    }

    #[test]
    fn symmetric_r0_comes_from_separation_not_base_clearance() {
        // For the symmetric configuration the base-circle clearance cap
        // (≈0.1085) is looser than the separation bound.
        let cfg = GroupConfig::symmetric();
        let c = &cfg.circles[0];
        let one = Complex64::new(1.0, 0.0);
        let cap = ((one - c.center).norm_sqr() - c.radius * c.radius)
            / (2.0 * (c.radius + 1.0 - c.center.re));
        assert!(0.9 * cap > cfg.r0);
    }

    #[test]
    fn separation_matches_center_line_formula() {
        let cfg = GroupConfig::symmetric();
        let want = (cfg.circles[0].center - cfg.circles[1].center).norm()
            - cfg.circles[0].radius
            - cfg.circles[1].radius;
        let got = region_separation(&cfg.circles[0], &cfg.circles[1]);
        assert_relative_eq!(got, want, max_relative = 1e-14);
        assert_relative_eq!(got, 0.238_753_836_988_454_9, max_relative = 1e-12);
    }

    #[test]
    fn sampled_separation_agrees_with_exact() {
        let cfg = GroupConfig::symmetric();
        let exact = region_separation(&cfg.circles[0], &cfg.circles[1]);
        let sampled = sampled_region_separation(&cfg.circles[0], &cfg.circles[1]);
        assert!((sampled - exact).abs() < 1e-5);
        assert!(sampled >= exact); // sampling can only overestimate a min-distance
    }

    #[test]
    fn rejects_overlapping_arcs() {
        let l = 7.0 * PI / 12.0;
        let arcs = [
            BoundaryArc::new(PI / 3.0, l),
            BoundaryArc::new(PI / 3.0 + 0.1, l),
            BoundaryArc::new(5.0 * PI / 3.0, l),
        ];
        assert!(matches!(GroupConfig::new(arcs), Err(Error::Config(_))));
    }

    #[test]
    fn rejects_arcs_sharing_an_endpoint() {
        // arcs of length L centered exactly L apart share one endpoint
        let l = 1.0;
        let arcs = [
            BoundaryArc::new(1.0, l),
            BoundaryArc::new(2.0, l),
            BoundaryArc::new(4.5, l),
        ];
        assert!(GroupConfig::new(arcs).is_err());
    }

    #[test]
    fn rejects_arc_covering_base_point() {
        let l = 7.0 * PI / 12.0;
        let arcs = [
            BoundaryArc::new(0.0, l), // contains angle 0
            BoundaryArc::new(PI, l),
            BoundaryArc::new(4.0, 0.3),
        ];
        assert!(matches!(GroupConfig::new(arcs), Err(Error::Config(_))));
    }

    #[test]
    fn r0_override_is_validated() {
        let arcs = GroupConfig::symmetric().arcs;
        assert!(GroupConfig::with_r0(arcs, 0.05).is_ok());
        assert!(GroupConfig::with_r0(arcs, 0.2).is_err());
        assert!(GroupConfig::with_r0(arcs, -0.1).is_err());
        let small = GroupConfig::with_r0(arcs, 0.01).unwrap();
        assert_relative_eq!(small.r0, 0.01);
        assert!(small.growth_lo > 1.0);
    }

    #[test]
    fn asymmetric_configuration_builds() {
        let arcs = [
            BoundaryArc::new(0.9, 1.1),
            BoundaryArc::new(2.9, 1.4),
            BoundaryArc::new(4.9, 0.8),
        ];
        let cfg = GroupConfig::new(arcs).unwrap();
        assert!(cfg.r0 > 0.0 && cfg.r0 < 1.0);
        assert!(cfg.growth_lo > 1.0);
        assert!(cfg.growth_hi > cfg.growth_lo);
    }

    #[test]
    fn base_circle_clears_every_region() {
        let cfg = GroupConfig::symmetric();
        let base = cfg.base_circle();
        for c in &cfg.circles {
            assert!(c.center_distance(base.center()) > c.radius + cfg.r0);
        }
    }
}
