//! Weak-field background of a constant-density star: the potential profile
//! `h̄⁰⁰(r)`, proper radial distance, gravitational clock-rate ratio, and
//! diagnostics for the perturbative regime.
//!
//! Geometric units: the star has mass `M` and radius `R_o` with `M/R_o ≪ 1`;
//! the metric perturbation is sourced by the Newtonian potential of the
//! uniform interior density and matches `4M/r` outside.

use crate::error::{Error, Result};
use crate::quad::{integrate_finite, QuadSpec};
use num_complex::Complex64;

/// Constant-density star in geometric units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StarConfig {
    /// Mass M (geometric units). Zero is permitted as the exact flat-space
    /// limit used by cross-checks.
    pub mass: f64,
    /// Radius R_o > 0.
    pub radius: f64,
}

impl StarConfig {
    /// Compactness ceiling for the linearized treatment.
    pub const MAX_COMPACTNESS: f64 = 0.01;
    /// Compactness above which results should be taken with caution.
    pub const WARN_COMPACTNESS: f64 = 0.001;

    pub fn new(mass: f64, radius: f64) -> Result<Self> {
        let s = StarConfig { mass, radius };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0) {
            return Err(Error::Domain {
                context: "StarConfig",
                message: format!("star radius must be positive, got {}", self.radius),
            });
        }
        if !(self.mass >= 0.0) {
            return Err(Error::Domain {
                context: "StarConfig",
                message: format!("star mass must be non-negative, got {}", self.mass),
            });
        }
        let compactness = self.mass / self.radius;
        if compactness > Self::MAX_COMPACTNESS {
            return Err(Error::Domain {
                context: "StarConfig",
                message: format!(
                    "compactness M/R_o = {compactness} exceeds the linearized-regime \
                     ceiling {}",
                    Self::MAX_COMPACTNESS
                ),
            });
        }
        Ok(())
    }

    /// True when the compactness is inside the allowed range but above the
    /// caution threshold.
    pub fn weak_field_warning(&self) -> bool {
        let c = self.mass / self.radius;
        c > Self::WARN_COMPACTNESS && c <= Self::MAX_COMPACTNESS
    }
}

/// Radial, collinear detector layout: detector 1 at radius `r1`, detector 2
/// farther from the star at proper separation `lp` along the same ray.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    /// Radial coordinate of the inner detector.
    pub r1: f64,
    /// Proper separation between the detectors (detector 2 outward).
    pub lp: f64,
}

impl Geometry {
    pub fn new(r1: f64, lp: f64) -> Result<Self> {
        let g = Geometry { r1, lp };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r1 > 0.0) {
            return Err(Error::Domain {
                context: "Geometry",
                message: format!("detector radius must be positive, got {}", self.r1),
            });
        }
        if !(self.lp > 0.0) {
            return Err(Error::Domain {
                context: "Geometry",
                message: format!("proper separation must be positive, got {}", self.lp),
            });
        }
        Ok(())
    }
}

/// Trace-reversed potential profile:
///
/// ```text
/// h̄⁰⁰(r) = (2M/R_o)(3 − r²/R_o²)   for r ≤ R_o
///        = 4M/r                     for r ≥ R_o
/// ```
///
/// Both branches give `4M/R_o` at the surface and the same one-sided slope
/// `−4M/R_o²`, so the profile is C¹ there.
pub fn hbar00(r: f64, star: &StarConfig) -> Result<f64> {
    star.validate()?;
    if r < 0.0 {
        return Err(Error::Domain {
            context: "hbar00",
            message: format!("radius must be non-negative, got {r}"),
        });
    }
    let ro = star.radius;
    if r < ro {
        Ok((2.0 * star.mass / ro) * (3.0 - r * r / (ro * ro)))
    } else {
        Ok(4.0 * star.mass / r)
    }
}

/// Proper radial distance from `r1` to `r1 + l_coord`:
/// `∫ √(1 + h̄⁰⁰(r)/2) dr`, to first order `l_coord · (1 + h̄⁰⁰(r1)/4)`.
pub fn proper_distance(
    r1: f64,
    l_coord: f64,
    star: &StarConfig,
    spec: &QuadSpec,
) -> Result<f64> {
    star.validate()?;
    if !(r1 > 0.0) || !(l_coord > 0.0) {
        return Err(Error::Domain {
            context: "proper_distance",
            message: format!("need r1 > 0 and l_coord > 0, got r1={r1}, l_coord={l_coord}"),
        });
    }
    let r = integrate_finite(
        |r| {
            let h = if r < star.radius {
                (2.0 * star.mass / star.radius) * (3.0 - r * r / (star.radius * star.radius))
            } else {
                4.0 * star.mass / r
            };
            Complex64::new((1.0 + 0.5 * h).sqrt(), 0.0)
        },
        r1,
        r1 + l_coord,
        &[star.radius],
        spec,
    )?;
    if !r.converged {
        return Err(Error::Convergence {
            context: "proper_distance",
            message: format!(
                "quadrature did not reach tolerance (error estimate {:e})",
                r.err_estimate
            ),
        });
    }
    Ok(r.value.re)
}

/// Invert [`proper_distance`]: the coordinate separation `L` whose proper
/// length equals `lp`, found by bisection to 1e-10 relative.
pub fn coordinate_separation(r1: f64, lp: f64, star: &StarConfig) -> Result<f64> {
    star.validate()?;
    if !(r1 > 0.0) || !(lp > 0.0) {
        return Err(Error::Domain {
            context: "coordinate_separation",
            message: format!("need r1 > 0 and lp > 0, got r1={r1}, lp={lp}"),
        });
    }
    if star.mass == 0.0 {
        return Ok(lp);
    }
    let spec = QuadSpec {
        rel_tol: 1e-13,
        ..QuadSpec::default()
    };
    // proper_distance(L) ≥ L and grows monotonically, so L ∈ [lp/2, lp]
    // brackets the root for any admissible compactness (h̄⁰⁰ ≤ 0.06).
    let mut lo = 0.5 * lp;
    let mut hi = lp;
    let f = |l: f64| -> Result<f64> { Ok(proper_distance(r1, l, star, &spec)? - lp) };
    if f(hi)? < 0.0 {
        return Err(Error::Convergence {
            context: "coordinate_separation",
            message: "bisection bracket failed at the upper end".to_string(),
        });
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if f(mid)? >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if (hi - lo) <= 1e-10 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Gravitational clock-rate ratio τ₂/τ₁ between static detectors at `r2`
/// and `r1`, in exact and first-order forms.
#[derive(Debug, Clone, Copy)]
pub struct ClockRatio {
    /// √[(1 − h̄⁰⁰(r₂)/2) / (1 − h̄⁰⁰(r₁)/2)]
    pub exact: f64,
    /// 1 − h̄⁰⁰(r₂)/4 + h̄⁰⁰(r₁)/4
    pub first_order: f64,
}

pub fn clock_ratio(r1: f64, r2: f64, star: &StarConfig) -> Result<ClockRatio> {
    if !(r1 > 0.0) || !(r2 > 0.0) {
        return Err(Error::Domain {
            context: "clock_ratio",
            message: format!("need positive radii, got r1={r1}, r2={r2}"),
        });
    }
    let h1 = hbar00(r1, star)?;
    let h2 = hbar00(r2, star)?;
    Ok(ClockRatio {
        exact: ((1.0 - 0.5 * h2) / (1.0 - 0.5 * h1)).sqrt(),
        first_order: 1.0 - 0.25 * h2 + 0.25 * h1,
    })
}

/// Regime diagnostics for a star/detector configuration. Advisory only —
/// nothing here refuses to compute.
#[derive(Debug, Clone, Copy)]
pub struct ValidityReport {
    /// Compactness within the linearized ceiling M/R_o ≤ 0.01.
    pub weak_field_ok: bool,
    /// Compactness above the caution threshold 0.001.
    pub weak_field_warning: bool,
    /// Detectors tick at the same rate to the order kept: exterior detectors
    /// need coordinate separation L ≤ 16M; interior configurations use the
    /// general form |h̄⁰⁰(r₂) − h̄⁰⁰(r₁)|/4 ≤ (h̄⁰⁰(r₂))².
    pub same_clock_ok: bool,
    /// 16M / L — values ≥ 1 satisfy the exterior same-clock bound.
    pub margin: f64,
    /// Detector 1 sits inside the star.
    pub interior: bool,
}

pub fn validity_check(star: &StarConfig, geom: &Geometry) -> Result<ValidityReport> {
    geom.validate()?;
    let compactness = star.mass / star.radius;
    let weak_field_ok = compactness <= StarConfig::MAX_COMPACTNESS;
    let weak_field_warning = compactness > StarConfig::WARN_COMPACTNESS;
    let interior = geom.r1 < star.radius;
    // The separation bound needs the coordinate separation; for a star
    // outside the admissible range fall back to the proper value (the
    // difference is second order and the report is advisory).
    let l_coord = if weak_field_ok && star.mass > 0.0 {
        coordinate_separation(geom.r1, geom.lp, star)?
    } else {
        geom.lp
    };
    let margin = if star.mass > 0.0 {
        16.0 * star.mass / l_coord
    } else {
        f64::INFINITY
    };
    let same_clock_ok = if interior {
        let r2 = geom.r1 + l_coord;
        let h1 = hbar00(geom.r1, star).unwrap_or(6.0 * compactness);
        let h2 = hbar00(r2, star).unwrap_or(6.0 * compactness);
        (h2 - h1).abs() / 4.0 <= h2 * h2
    } else {
        l_coord <= 16.0 * star.mass || star.mass == 0.0
    };
    Ok(ValidityReport {
        weak_field_ok,
        weak_field_warning,
        same_clock_ok,
        margin,
        interior,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn star() -> StarConfig {
        StarConfig::new(0.001, 1.0).unwrap()
    }

    #[test]
    fn star_validation_and_warning() {
        assert!(StarConfig::new(0.1, 1.0).is_err());
        assert!(StarConfig::new(-1e-3, 1.0).is_err());
        assert!(StarConfig::new(0.001, 0.0).is_err());
        assert!(StarConfig::new(0.0, 1.0).is_ok());
        assert!(StarConfig::new(0.002, 1.0).unwrap().weak_field_warning());
        assert!(!StarConfig::new(0.0005, 1.0).unwrap().weak_field_warning());
        assert!(!star().weak_field_warning());
    }

    #[test]
    fn potential_profile_reference_values() {
        let s = star();
        assert!((hbar00(0.0, &s).unwrap() - 0.006).abs() < 1e-18);
        assert!((hbar00(2.0, &s).unwrap() - 0.002).abs() < 1e-18);
        assert_eq!(hbar00(1.0, &s).unwrap(), 4.0 * s.mass / s.radius);
        assert!(hbar00(-0.1, &s).is_err());
    }

    #[test]
    fn potential_is_c1_at_the_surface() {
        let s = star();
        let ro = s.radius;
        // Continuity.
        let below = hbar00(ro * (1.0 - 1e-12), &s).unwrap();
        let above = hbar00(ro * (1.0 + 1e-12), &s).unwrap();
        assert!((below - above).abs() < 1e-13);
        // Matching one-sided slopes −4M/R_o².
        let want = -4.0 * s.mass / (ro * ro);
        let d = 1e-7;
        let slope_in = (hbar00(ro, &s).unwrap() - hbar00(ro - d, &s).unwrap()) / d;
        let slope_out = (hbar00(ro + d, &s).unwrap() - hbar00(ro, &s).unwrap()) / d;
        assert!((slope_in - want).abs() / want.abs() < 1e-4);
        assert!((slope_out - want).abs() / want.abs() < 1e-4);
    }

    #[test]
    fn potential_peak_decay_and_mass_linearity() {
        let s = star();
        let peak = hbar00(0.0, &s).unwrap();
        assert!((peak - 6.0 * s.mass / s.radius).abs() < 1e-18);
        for r in [0.2, 0.7, 1.0, 1.5, 4.0, 50.0] {
            assert!(hbar00(r, &s).unwrap() <= peak);
        }
        assert!(hbar00(1e9, &s).unwrap() < 1e-11);
        let double = StarConfig::new(0.002, 1.0).unwrap();
        for r in [0.0, 0.3, 0.99, 1.0, 1.7, 8.0] {
            assert_eq!(
                hbar00(r, &double).unwrap(),
                2.0 * hbar00(r, &star()).unwrap()
            );
        }
    }

    #[test]
    fn proper_distance_first_order_and_monotonicity() {
        let s = star();
        let spec = QuadSpec::default();
        // Flat limit.
        let flat = StarConfig::new(0.0, 1.0).unwrap();
        let d0 = proper_distance(2.0, 0.3, &flat, &spec).unwrap();
        assert!((d0 - 0.3).abs() < 1e-14);
        // First-order form at r1 = 2R_o, L = 0.01R_o: L·(1 + h̄/4) = L·1.0005.
        // The residual has two second-order pieces: the variation of h̄
        // across the interval (∝ L, ≈ 1.1e-6 relative here) and the
        // L-independent curvature of the square root (h̄²/32 ≈ 1.3e-7).
        let d = proper_distance(2.0, 0.01, &s, &spec).unwrap();
        let first_order = 0.01 * (1.0 + 0.0005);
        assert!((d - first_order).abs() / d < 2e-6);
        let d_small = proper_distance(2.0, 0.001, &s, &spec).unwrap();
        let first_order_small = 0.001 * (1.0 + 0.0005);
        assert!((d_small - first_order_small).abs() / d_small < 3e-7);
        assert!(d > 0.01);
        assert!(proper_distance(0.0, 1.0, &s, &spec).is_err());
    }

    #[test]
    fn coordinate_separation_inverts_proper_distance() {
        let s = star();
        let spec = QuadSpec::default();
        for (r1, lp) in [(1.1, 0.01), (2.0, 0.0095), (0.5, 0.2), (5.0, 3.0)] {
            let l = coordinate_separation(r1, lp, &s).unwrap();
            assert!(l < lp, "L={l} should undershoot lp={lp} for M > 0");
            let roundtrip = proper_distance(r1, l, &s, &spec).unwrap();
            assert!(
                (roundtrip - lp).abs() / lp < 1e-9,
                "roundtrip {roundtrip} vs {lp}"
            );
        }
        let flat = StarConfig::new(0.0, 1.0).unwrap();
        assert_eq!(coordinate_separation(2.0, 0.25, &flat).unwrap(), 0.25);
    }

    #[test]
    fn clock_ratio_properties() {
        let s = star();
        let same = clock_ratio(2.0, 2.0, &s).unwrap();
        assert_eq!(same.exact, 1.0);
        assert_eq!(same.first_order, 1.0);
        let up = clock_ratio(2.0, 2.01, &s).unwrap();
        assert!(up.exact > 1.0);
        assert!(up.first_order > 1.0);
        assert!((up.exact - up.first_order).abs() <= 4e-6);
        // Reciprocity.
        let down = clock_ratio(2.01, 2.0, &s).unwrap();
        assert!((up.exact * down.exact - 1.0).abs() < 1e-14);
    }

    #[test]
    fn validity_report_cases() {
        let s = star();
        // Fig-parameter case: lp = 0.01 R_o, L ≈ 0.01 ≤ 16M = 0.016.
        let ok = validity_check(&s, &Geometry::new(1.05, 0.01).unwrap()).unwrap();
        assert!(ok.weak_field_ok && ok.same_clock_ok && !ok.interior);
        assert!(ok.margin > 1.0);
        // L = 32M violates the same-clock bound.
        let wide = validity_check(&s, &Geometry::new(2.0, 0.033).unwrap()).unwrap();
        assert!(!wide.same_clock_ok);
        assert!(wide.margin < 1.0);
        // Over-compact star (constructed directly: new() refuses it).
        let heavy = StarConfig {
            mass: 0.1,
            radius: 1.0,
        };
        let rep = validity_check(&heavy, &Geometry::new(2.0, 0.01).unwrap()).unwrap();
        assert!(!rep.weak_field_ok);
        // Interior detector is flagged, not refused.
        let inner = validity_check(&s, &Geometry::new(0.5, 0.001).unwrap()).unwrap();
        assert!(inner.interior);
    }
}
