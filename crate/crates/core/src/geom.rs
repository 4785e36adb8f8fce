//! Geometry on the Poincaré disk: circles orthogonal to the unit circle,
//! horocycle-like tangent circles, disk isometries (holomorphic and
//! anti-holomorphic), and Cartan coordinates.
//!
//! Conventions:
//! - Boundary points are unit complex numbers `e^{iφ}`; angles live in
//!   `[0, 2π)`.
//! - A reflection circle `C(c, R)` satisfies `|c|² − R² = 1`, which is
//!   exactly the condition for orthogonality to the unit circle; inversion
//!   in it preserves the disk and its boundary.
//! - A tangent circle sits inside the disk, internally tangent to the unit
//!   circle at `e^{iθ}`; it is determined by `(θ, κ)` with curvature
//!   `κ = 1/r`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

pub const TAU: f64 = std::f64::consts::TAU;
pub const PI: f64 = std::f64::consts::PI;

/// Tolerance for the orthogonality residual `|c|² − R² − 1` of a
/// reflection circle.
pub const ORTHOGONALITY_TOL: f64 = 1e-12;
/// Below this coefficient magnitude a map is treated as a pure rotation
/// when extracting Cartan coordinates.
const ROTATION_ETA_TOL: f64 = 1e-12;

/// Reduce an angle to `[0, 2π)`.
pub fn normalize_angle(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    // rem_euclid can round up to 2π for tiny negative inputs.
    if y >= TAU {
        0.0
    } else {
        y
    }
}

/// Signed wrap of an angle to `(−π, π]`.
pub fn wrap_to_pi(x: f64) -> f64 {
    let mut y = x.rem_euclid(TAU);
    if y > PI {
        y -= TAU;
    }
    y
}

fn unit(phi: f64) -> Complex64 {
    Complex64::new(phi.cos(), phi.sin())
}

// ---------------------------------------------------------------------------
// Reflection circles
// ---------------------------------------------------------------------------

/// A circle orthogonal to the unit circle; inversion in it is an
/// anti-holomorphic isometry of the disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReflectionCircle {
    pub center: Complex64,
    pub radius: f64,
}

impl ReflectionCircle {
    /// Build a reflection circle, verifying orthogonality to the unit
    /// circle (`|c|² − R² = 1` within [`ORTHOGONALITY_TOL`]).
    pub fn new(center: Complex64, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() || !center.re.is_finite() || !center.im.is_finite()
        {
            return Err(Error::Domain(format!(
                "reflection circle needs finite center and positive radius, got center {center}, radius {radius}"
            )));
        }
        let residual = center.norm_sqr() - radius * radius - 1.0;
        if residual.abs() > ORTHOGONALITY_TOL {
            return Err(Error::Domain(format!(
                "circle (center {center}, radius {radius}) is not orthogonal to the unit circle \
                 (residual {residual:.3e})"
            )));
        }
        Ok(Self { center, radius })
    }

    /// The circle carrying the boundary arc of half-length `h` centered at
    /// angle `θ`: center `sec(h)·e^{iθ}`, radius `tan(h)`. Orthogonality
    /// holds by construction.
    pub fn from_arc(center_angle: f64, arclength: f64) -> Result<Self> {
        if !(arclength > 0.0 && arclength < PI) {
            return Err(Error::Domain(format!(
                "arc length must lie in (0, π), got {arclength}"
            )));
        }
        let h = 0.5 * arclength;
        let center = unit(normalize_angle(center_angle)) / h.cos();
        Self::new(center, h.tan())
    }

    /// Inversion in the circle: `ρ(z) = c + R²·(z − c)/|z − c|²`.
    ///
    /// Fixes the circle pointwise, swaps inside and outside, preserves the
    /// unit circle. Undefined at the center.
    pub fn reflect_point(&self, z: Complex64) -> Complex64 {
        let w = z - self.center;
        self.center + w * (self.radius * self.radius / w.norm_sqr())
    }

    /// Image of the boundary point `e^{iφ}` under the inversion, reported
    /// as an angle in `[0, 2π)`.
    pub fn reflect_boundary_angle(&self, phi: f64) -> f64 {
        let z = self.reflect_point(unit(phi));
        debug_assert!(
            (z.norm() - 1.0).abs() < 1e-10,
            "boundary image drifted off the unit circle: |z| = {}",
            z.norm()
        );
        normalize_angle(z.arg())
    }

    /// Conformal scale factor `|ρ′(e^{iφ})| = R²/|e^{iφ} − c|²` of the
    /// inversion at a boundary point.
    pub fn boundary_scale(&self, phi: f64) -> f64 {
        self.radius * self.radius / (unit(phi) - self.center).norm_sqr()
    }

    /// Euclidean distance from a point to the circle's center.
    pub fn center_distance(&self, z: Complex64) -> f64 {
        (z - self.center).norm()
    }

    /// The inversion as a 2×2 matrix isometry (anti-holomorphic).
    pub fn as_map(&self) -> DiskMap {
        let c = self.center;
        let r = self.radius;
        DiskMap {
            m: [[c / r, Complex64::new(-1.0 / r, 0.0)], [Complex64::new(1.0 / r, 0.0), -c.conj() / r]],
            conjugating: true,
        }
    }
}

// ---------------------------------------------------------------------------
// Tangent circles
// ---------------------------------------------------------------------------

/// A circle inside the disk, internally tangent to the unit circle at
/// `e^{iθ}`, with curvature `κ = 1/r`. Its Euclidean center is
/// `(1 − r)·e^{iθ}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TangentCircle {
    /// Tangency angle in `[0, 2π)`.
    pub theta: f64,
    /// Curvature `1/r`; always `> 1` for a circle strictly inside the disk.
    pub kappa: f64,
}

impl TangentCircle {
    pub fn new(theta: f64, kappa: f64) -> Result<Self> {
        if !(kappa > 1.0) || !kappa.is_finite() {
            return Err(Error::Domain(format!(
                "tangent circle curvature must be finite and > 1, got {kappa}"
            )));
        }
        Ok(Self {
            theta: normalize_angle(theta),
            kappa,
        })
    }

    pub fn radius(&self) -> f64 {
        1.0 / self.kappa
    }

    pub fn center(&self) -> Complex64 {
        unit(self.theta) * (1.0 - self.radius())
    }

    /// The tangency point on the unit circle.
    pub fn tangency(&self) -> Complex64 {
        unit(self.theta)
    }
}

/// Reflect a tangent circle in a reflection circle whose region is disjoint
/// from it. Returns the image tangent circle.
///
/// The tangency angle maps through the boundary action; the curvature obeys
/// two independent exact rules that are cross-checked in debug builds:
///
/// 1. inversion of a circle at center distance `L`:
///    `κ′ = κ·(L² − r²)/R²`;
/// 2. boundary derivative: with `λ = |ρ′(e^{iθ})|`,
///    `κ′ = 1 + (κ − 1)/λ`.
///
/// Rule 2 is exact for circles tangent to the preserved unit circle (the
/// familiar `κ/λ` scaling is only its large-κ limit).
pub fn reflect_tangent_circle(rc: &ReflectionCircle, tc: &TangentCircle) -> Result<TangentCircle> {
    let r = tc.radius();
    let l = rc.center_distance(tc.center());
    if l <= rc.radius + r {
        return Err(Error::Domain(format!(
            "tangent circle at θ = {} (κ = {}) meets the reflection circle; \
             center gap {} ≤ {}",
            tc.theta,
            tc.kappa,
            l,
            rc.radius + r
        )));
    }
    let kappa = tc.kappa * (l * l - r * r) / (rc.radius * rc.radius);
    let theta = rc.reflect_boundary_angle(tc.theta);
    debug_assert!(
        {
            let via_derivative = 1.0 + (tc.kappa - 1.0) / rc.boundary_scale(tc.theta);
            ((kappa - via_derivative) / kappa).abs() < 1e-10
        },
        "curvature rules disagree at θ = {}, κ = {}",
        tc.theta,
        tc.kappa
    );
    TangentCircle::new(theta, kappa)
}

/// Curvature of the reflected circle computed from the boundary derivative
/// alone; exposed so tests and audits can compare the two exact rules.
pub fn reflected_curvature_via_derivative(rc: &ReflectionCircle, tc: &TangentCircle) -> f64 {
    1.0 + (tc.kappa - 1.0) / rc.boundary_scale(tc.theta)
}

// ---------------------------------------------------------------------------
// Disk isometries
// ---------------------------------------------------------------------------

/// An isometry of the disk, stored as a 2×2 complex matrix plus a flag for
/// anti-holomorphic maps.
///
/// With `conjugating = false` the action is `z ↦ (m₀₀z + m₀₁)/(m₁₀z + m₁₁)`;
/// with `conjugating = true` the map first conjugates its argument. The
/// composite `g = g₁∘g₂` has matrix `m₁·m₂` when `g₁` is holomorphic and
/// `m₁·conj(m₂)` (entrywise) when it conjugates; flags xor. Matrices are
/// renormalized to determinant 1 after every composition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskMap {
    pub m: [[Complex64; 2]; 2],
    pub conjugating: bool,
}

impl DiskMap {
    pub fn identity() -> Self {
        Self {
            m: [
                [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
                [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
            ],
            conjugating: false,
        }
    }

    pub fn det(&self) -> Complex64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// Compose with another map, applying `rhs` first: `self ∘ rhs`.
    pub fn compose(&self, rhs: &DiskMap) -> DiskMap {
        let b = if self.conjugating {
            [
                [rhs.m[0][0].conj(), rhs.m[0][1].conj()],
                [rhs.m[1][0].conj(), rhs.m[1][1].conj()],
            ]
        } else {
            rhs.m
        };
        let mut m = [
            [
                self.m[0][0] * b[0][0] + self.m[0][1] * b[1][0],
                self.m[0][0] * b[0][1] + self.m[0][1] * b[1][1],
            ],
            [
                self.m[1][0] * b[0][0] + self.m[1][1] * b[1][0],
                self.m[1][0] * b[0][1] + self.m[1][1] * b[1][1],
            ],
        ];
        // Renormalize to determinant 1 so rounding drift cannot accumulate
        // over long words (scalar multiples act identically).
        let d = (m[0][0] * m[1][1] - m[0][1] * m[1][0]).sqrt();
        for row in &mut m {
            for e in row {
                *e /= d;
            }
        }
        DiskMap {
            m,
            conjugating: self.conjugating ^ rhs.conjugating,
        }
    }

    /// Apply the isometry to a point of the closed disk.
    pub fn apply(&self, z: Complex64) -> Complex64 {
        let w = if self.conjugating { z.conj() } else { z };
        (self.m[0][0] * w + self.m[0][1]) / (self.m[1][0] * w + self.m[1][1])
    }

    /// Image of the boundary point `e^{iφ}` as an angle in `[0, 2π)`.
    pub fn boundary_angle(&self, phi: f64) -> f64 {
        let z = self.apply(unit(phi));
        debug_assert!(
            (z.norm() - 1.0).abs() < 1e-9,
            "boundary image drifted off the unit circle: |z| = {}",
            z.norm()
        );
        normalize_angle(z.arg())
    }

    /// Half the squared Frobenius norm of the matrix,
    /// `(|m₀₀|² + |m₀₁|² + |m₁₀|² + |m₁₁|²)/2`; equals `cosh t` on
    /// holomorphic maps in Cartan form.
    pub fn frobenius_half_sq(&self) -> f64 {
        0.5 * (self.m[0][0].norm_sqr()
            + self.m[0][1].norm_sqr()
            + self.m[1][0].norm_sqr()
            + self.m[1][1].norm_sqr())
    }

    /// Whether the matrix has the unit-disk unitary shape
    /// `[[ξ, η], [η̄, ξ̄]]` with `|ξ|² − |η|² = 1`, up to overall sign.
    /// Residuals are measured relative to the matrix scale: entries grow
    /// like √κ and the determinant is a difference of O(κ) terms, so a
    /// fixed absolute tolerance would reject perfectly healthy products of
    /// many generators.
    pub fn is_disk_unitary(&self, tol: f64) -> bool {
        let scale = (self.m[0][0].norm_sqr() + self.m[0][1].norm_sqr()).max(1.0);
        (self.m[1][1] - self.m[0][0].conj()).norm() <= tol * scale.sqrt()
            && (self.m[1][0] - self.m[0][1].conj()).norm() <= tol * scale.sqrt()
            && (self.m[0][0].norm_sqr() - self.m[0][1].norm_sqr() - 1.0).abs() <= tol * scale
    }
}

// ---------------------------------------------------------------------------
// Cartan coordinates
// ---------------------------------------------------------------------------

/// Cartan (KAK) coordinates of a holomorphic disk isometry:
/// `g = k_{φ₁}·a_t·k_{π−φ₂}` where `k_φ` is rotation by `φ` and `a_t` is the
/// hyperbolic translation of length `t ≥ 0` along the real axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CartanCoords {
    pub phi1: f64,
    pub t: f64,
    pub phi2: f64,
}

/// Extract Cartan coordinates from a holomorphic isometry.
///
/// In matrix form `g = [[ξ, η], [η̄, ξ̄]]`: `t = 2·asinh|η|`,
/// `φ₁ = arg ξ + arg η`, `φ₂ = π − (arg ξ − arg η)`, all mod 2π. A pure
/// rotation (`η ≈ 0`) has `t = 0` and by convention `φ₂ = π`, putting the
/// whole rotation into `φ₁`.
pub fn cartan_decompose(g: &DiskMap) -> Result<CartanCoords> {
    if g.conjugating {
        return Err(Error::Domain(
            "Cartan coordinates are defined for holomorphic maps only".into(),
        ));
    }
    if !g.is_disk_unitary(1e-9) {
        return Err(Error::Numeric(format!(
            "matrix is not disk-unitary within 1e-9: {:?}",
            g.m
        )));
    }
    let xi = g.m[0][0];
    let eta = g.m[0][1];
    // asinh is well-conditioned at both ends, unlike acosh near 1.
    let t = 2.0 * eta.norm().asinh();
    if eta.norm() < ROTATION_ETA_TOL {
        return Ok(CartanCoords {
            phi1: normalize_angle(2.0 * xi.arg()),
            t: 0.0,
            phi2: PI,
        });
    }
    let phi1 = normalize_angle(xi.arg() + eta.arg());
    let phi2 = normalize_angle(PI - (xi.arg() - eta.arg()));
    Ok(CartanCoords { phi1, t, phi2 })
}

/// Rebuild the holomorphic isometry with the given Cartan coordinates.
pub fn cartan_reconstruct(cc: &CartanCoords) -> DiskMap {
    let psi = PI - cc.phi2;
    let xi = Complex64::from_polar((0.5 * cc.t).cosh(), 0.5 * (cc.phi1 + psi));
    let eta = Complex64::from_polar((0.5 * cc.t).sinh(), 0.5 * (cc.phi1 - psi));
    DiskMap {
        m: [[xi, eta], [eta.conj(), xi.conj()]],
        conjugating: false,
    }
}

/// Curvature of the image of a tangent circle `(θ, 1/r)` under an isometry
/// with Cartan coordinates `cc`, evaluated in closed form:
///
/// `κ′ = e^t·(1−r)/(2r)·(1+cos β) + e^{−t}·(1−r)/(2r)·(1−cos β) + 1`,
/// with `β = π − φ₂ + θ`.
pub fn curvature_via_cartan(cc: &CartanCoords, theta: f64, r: f64) -> f64 {
    let beta = PI - cc.phi2 + theta;
    let s = (1.0 - r) / (2.0 * r);
    cc.t.exp() * s * (1.0 + beta.cos()) + (-cc.t).exp() * s * (1.0 - beta.cos()) + 1.0
}

/// Tangency angle of the image circle in closed form:
///
/// `θ′ = φ₁ + arcsin(2·sin β / (e^t(1+cos β) + e^{−t}(1−cos β)))`,
/// `β = π − φ₂ + θ`.
///
/// The principal arcsin branch is correct exactly when the image angle lies
/// within π/2 of `φ₁`, i.e. when `e^{−t}·|tan(β/2)| ≤ 1`; inputs outside
/// that regime are rejected rather than silently landing on the wrong
/// branch.
pub fn tangency_via_cartan(cc: &CartanCoords, theta: f64) -> Result<f64> {
    let beta = wrap_to_pi(PI - cc.phi2 + theta);
    let half = 0.5 * beta;
    if half.cos().abs() < 1e-12 || (-cc.t).exp() * half.tan().abs() > 1.0 {
        return Err(Error::Domain(format!(
            "tangency formula out of regime: t = {}, β = {beta}",
            cc.t
        )));
    }
    let denom = cc.t.exp() * (1.0 + beta.cos()) + (-cc.t).exp() * (1.0 - beta.cos());
    let arg = 2.0 * beta.sin() / denom;
    debug_assert!(arg.abs() <= 1.0 + 1e-15);
    Ok(normalize_angle(cc.phi1 + arg.clamp(-1.0, 1.0).asin()))
}
