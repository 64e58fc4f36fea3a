//! Minkowski baseline: the zeroth-order propagator, closed forms and numeric
//! cross-checks for the local noise `P₀` and exchange amplitude `X₀`, the
//! `L_p`-derivative of `X₀`, and the large-gap asymptotic formulas.
//!
//! Conventions: two pointlike two-level detectors with energy gap `ΔE` are
//! switched by a Gaussian window of width `σ` and coupled with strength `α`
//! to the massless scalar vacuum. At second order in `α` the reduced
//! two-detector state is fixed by one noise integral per detector and one
//! exchange integral; both reduce to single proper-time-difference integrals
//! of the Feynman propagator against Gaussian kernels.

use crate::error::{Error, Result};
use crate::quad::{eps_limit, integrate_semiinf_gauss, QuadResult, QuadSpec};
use crate::specfun::{erfcx, faddeeva_w};
use num_complex::Complex64;
use std::f64::consts::PI;

const SQRT_PI: f64 = 1.772_453_850_905_516_1;

/// Detector parameters shared by every amplitude in the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    /// Energy gap ΔE ≥ 0 (inverse-length units).
    pub delta_e: f64,
    /// Gaussian switching width σ > 0 (length units).
    pub sigma: f64,
    /// Dimensionless coupling α > 0.
    pub alpha: f64,
}

impl DetectorConfig {
    pub fn new(delta_e: f64, sigma: f64, alpha: f64) -> Result<Self> {
        let d = DetectorConfig {
            delta_e,
            sigma,
            alpha,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0) {
            return Err(Error::Domain {
                context: "DetectorConfig",
                message: format!("switching width must be positive, got {}", self.sigma),
            });
        }
        if !(self.delta_e >= 0.0) {
            return Err(Error::Domain {
                context: "DetectorConfig",
                message: format!("energy gap must be non-negative, got {}", self.delta_e),
            });
        }
        if !(self.alpha > 0.0) {
            return Err(Error::Domain {
                context: "DetectorConfig",
                message: format!("coupling must be positive, got {}", self.alpha),
            });
        }
        Ok(())
    }
}

/// Zeroth-order amplitudes for one detector pair at proper separation `lp`.
#[derive(Debug, Clone, Copy)]
pub struct FlatResult {
    /// Local noise P₀ (equal for both detectors in flat space).
    pub p0: f64,
    /// Exchange amplitude X₀.
    pub x0: Complex64,
    /// Negativity N at this order.
    pub n0: f64,
}

/// Feynman propagator of the massless scalar between events separated by
/// `time_sep` in time and `space_sep` in space, with the regulator applied
/// to the invariant interval:
///
/// ```text
/// G(Δx) = −1 / (4π² [ (Δx⁰)² − |Δx⃗|² − iε ])
/// ```
pub fn g0(space_sep: f64, time_sep: f64, eps: f64) -> Result<Complex64> {
    if !(eps > 0.0) {
        return Err(Error::Domain {
            context: "g0",
            message: format!("regulator must be positive, got {eps}"),
        });
    }
    if space_sep < 0.0 {
        return Err(Error::Domain {
            context: "g0",
            message: format!("spatial separation must be non-negative, got {space_sep}"),
        });
    }
    let bracket = Complex64::new(time_sep * time_sep - space_sep * space_sep, -eps);
    Ok(-1.0 / (4.0 * PI * PI * bracket))
}

/// Feynman propagator with the regulator applied as a time shift,
/// `Δx⁰ → Δx⁰ − iε`. Distributionally this is the same ε → 0 limit as
/// [`g0`], but at spatial coincidence only this realization has a finite
/// regulator limit after taking real parts — shifting the whole bracket by
/// `−iε` leaves an ε^(−1/2) divergence at the s = 0 double pole. The numeric
/// amplitude integrals therefore use this form.
fn g0_time_shifted(space_sep: f64, time_sep: f64, eps: f64) -> Complex64 {
    let shifted = Complex64::new(time_sep, -eps);
    -1.0 / (4.0 * PI * PI * (shifted * shifted - space_sep * space_sep))
}

/// Closed-form local noise
/// `P₀ = α²/(4π) · e^{−ΔE²σ²} (1 − √π ΔEσ · erfcx(ΔEσ))`,
/// written with the scaled complementary error function so the large-gap
/// tail does not underflow prematurely.
pub fn p0_closed(d: &DetectorConfig) -> Result<f64> {
    d.validate()?;
    let x = d.delta_e * d.sigma;
    let val =
        d.alpha * d.alpha / (4.0 * PI) * (-x * x).exp() * (1.0 - SQRT_PI * x * erfcx(x)?);
    Ok(val)
}

/// Closed-form exchange amplitude
/// `X₀ = (α²σ i)/(4 L_p √π) · e^{−ΔE²σ²} · w(L_p / 2σ)`
/// with `w` the Faddeeva function; algebraically identical to the
/// imaginary-argument erfc form but overflow-free.
pub fn x0_closed(d: &DetectorConfig, lp: f64) -> Result<Complex64> {
    d.validate()?;
    if !(lp > 0.0) {
        return Err(Error::Domain {
            context: "x0_closed",
            message: format!("detector separation must be positive, got {lp}"),
        });
    }
    let x = d.delta_e * d.sigma;
    let w = faddeeva_w(Complex64::new(lp / (2.0 * d.sigma), 0.0))?;
    Ok(Complex64::new(0.0, d.alpha * d.alpha * d.sigma / (4.0 * lp * SQRT_PI))
        * (-x * x).exp()
        * w)
}

/// Analytic derivative `∂X₀/∂L_p`, obtained from `w′(z) = −2z w(z) + 2i/√π`:
///
/// ```text
/// ∂X₀/∂L_p = (i α² σ e^{−ΔE²σ²} / 4√π) · [ −w(z)/(2σ²) + i/(σ √π L_p) − w(z)/L_p² ]
/// ```
pub fn dx0_dlp(d: &DetectorConfig, lp: f64) -> Result<Complex64> {
    d.validate()?;
    if !(lp > 0.0) {
        return Err(Error::Domain {
            context: "dx0_dlp",
            message: format!("detector separation must be positive, got {lp}"),
        });
    }
    let x = d.delta_e * d.sigma;
    let z = lp / (2.0 * d.sigma);
    let w = faddeeva_w(Complex64::new(z, 0.0))?;
    let c = Complex64::new(0.0, d.alpha * d.alpha * d.sigma * (-x * x).exp() / (4.0 * SQRT_PI));
    let sig2 = d.sigma * d.sigma;
    Ok(c * (-w / (2.0 * sig2) + Complex64::new(0.0, 1.0) / (d.sigma * SQRT_PI * lp)
        - w / (lp * lp)))
}

/// Numeric local noise via the response integral
/// `P = 2α²σ√π · Re ∫₀^∞ ds e^{−s²/4σ² − iΔE s} G(0, s)`,
/// regulator-extrapolated with [`eps_limit`]. Cross-checks [`p0_closed`].
///
/// At coincidence the propagator is a double pole at s = 0, and the noise is
/// exponentially small relative to the individual integrand lobes. One exact
/// integration by parts turns the double pole into a simple one,
///
/// ```text
/// ∫₀^∞ f(s)/(s−iε)² ds = −i f(0)/ε + ∫₀^∞ f′(s)/(s−iε) ds,
/// ```
///
/// whose boundary term is pure imaginary (f(0) = 1) and drops under Re. The
/// remaining integrand has O(1) magnitude, which keeps the round-off floor
/// far below the cancellation level even at large ΔEσ.
pub fn p0_numeric(d: &DetectorConfig, spec: &QuadSpec) -> Result<QuadResult> {
    d.validate()?;
    let sigma = d.sigma;
    let de = d.delta_e;
    let eps0 = spec.eps0_or(sigma);
    let mut evaluations = 0usize;
    let mut subdivisions = 0usize;
    let mut quad_err = 0.0f64;
    let mut all_converged = true;
    let quart_sig2 = 1.0 / (4.0 * sigma * sigma);
    let limit = eps_limit(
        |eps| {
            let r = integrate_semiinf_gauss(
                |s| {
                    let f = Complex64::new(-s * s * quart_sig2, -de * s).exp();
                    let fprime = Complex64::new(-s / (2.0 * sigma * sigma), -de) * f;
                    let val = -fprime / Complex64::new(s, -eps) / (4.0 * PI * PI);
                    // Only the real part survives the regulator limit.
                    Complex64::new(val.re, 0.0)
                },
                sigma,
                &[eps, 10.0 * eps, 100.0 * eps, sigma],
                spec,
            )?;
            evaluations += r.evaluations;
            subdivisions += r.subdivisions;
            quad_err = quad_err.max(r.err_estimate);
            all_converged &= r.converged;
            Ok(r.value)
        },
        eps0,
        spec.eps_ratio,
        spec.eps_levels,
    )?;
    let pref = 2.0 * d.alpha * d.alpha * sigma * SQRT_PI;
    let last_inc = limit.increments.last().copied().unwrap_or(0.0);
    Ok(QuadResult {
        value: Complex64::new(pref * limit.value.re, 0.0),
        err_estimate: pref * (quad_err + last_inc),
        evaluations,
        subdivisions,
        converged: all_converged && limit.converged,
    })
}

/// Numeric exchange amplitude via
/// `X = −α² e^{−σ²ΔE²} σ√π ∫₀^∞ ds e^{−s²/4σ²} [G(L,s) + G(L,s)]`,
/// where the two terms are the two detector orderings — equal for static
/// detectors, so they are summed explicitly rather than folded into a
/// factor. Cross-checks [`x0_closed`].
pub fn x0_numeric(d: &DetectorConfig, lp: f64, spec: &QuadSpec) -> Result<QuadResult> {
    d.validate()?;
    if !(lp > 0.0) {
        return Err(Error::Domain {
            context: "x0_numeric",
            message: format!("detector separation must be positive, got {lp}"),
        });
    }
    let sigma = d.sigma;
    let eps0 = spec.eps0_or(sigma.min(lp));
    let mut evaluations = 0usize;
    let mut subdivisions = 0usize;
    let mut quad_err = 0.0f64;
    let mut all_converged = true;
    let limit = eps_limit(
        |eps| {
            let bps = [lp - 10.0 * eps, lp, lp + 10.0 * eps, sigma, 4.0 * sigma];
            let r = integrate_semiinf_gauss(
                |s| {
                    let envelope = (-s * s / (4.0 * sigma * sigma)).exp();
                    // ordering 1→2 plus ordering 2→1; identical separations
                    // for static worldlines.
                    let sum = g0_time_shifted(lp, s, eps) + g0_time_shifted(lp, s, eps);
                    envelope * sum
                },
                sigma,
                &bps,
                spec,
            )?;
            evaluations += r.evaluations;
            subdivisions += r.subdivisions;
            quad_err = quad_err.max(r.err_estimate);
            all_converged &= r.converged;
            Ok(r.value)
        },
        eps0,
        spec.eps_ratio,
        spec.eps_levels,
    )?;
    let x = d.delta_e * sigma;
    let pref = -d.alpha * d.alpha * (-x * x).exp() * sigma * SQRT_PI;
    let last_inc = limit.increments.last().copied().unwrap_or(0.0);
    Ok(QuadResult {
        value: pref * limit.value,
        err_estimate: pref.abs() * (quad_err + last_inc),
        evaluations,
        subdivisions,
        converged: all_converged && limit.converged,
    })
}

/// The four large-gap / large-separation asymptotic formulas.
#[derive(Debug, Clone, Copy)]
pub struct Asymptotics {
    /// P ≈ α² e^{−ΔE²σ²} / (8π ΔE²σ²)
    pub p_asym: f64,
    /// |X| ≈ α² σ² e^{−ΔE²σ²} / (2π L_p²)
    pub x_asym: f64,
    /// ΔE_opt ≈ (L_p / 2σ²)(1 + 2σ²/L_p²)
    pub delta_e_opt: f64,
    /// N_opt ≈ 4 α² σ⁴ e^{−L_p²/4σ²} / (π L_p⁴)
    pub n_opt: f64,
}

/// Evaluate the asymptotic expressions (intended for ΔEσ ≫ 1, L_p/σ ≫ 1;
/// the regime is not enforced).
pub fn asymptotics(d: &DetectorConfig, lp: f64) -> Asymptotics {
    let a2 = d.alpha * d.alpha;
    let x = d.delta_e * d.sigma;
    let sig2 = d.sigma * d.sigma;
    Asymptotics {
        p_asym: a2 * (-x * x).exp() / (8.0 * PI * x * x),
        x_asym: a2 * sig2 * (-x * x).exp() / (2.0 * PI * lp * lp),
        delta_e_opt: (lp / (2.0 * sig2)) * (1.0 + 2.0 * sig2 / (lp * lp)),
        n_opt: 4.0 * a2 * sig2 * sig2 * (-lp * lp / (4.0 * sig2)).exp() / (PI * lp.powi(4)),
    }
}

/// Closed-form flat-space summary at separation `lp`: both detectors see the
/// same noise, so the negativity reduces to `max(2|X₀| − 2P₀, 0)`.
pub fn flat_result(d: &DetectorConfig, lp: f64) -> Result<FlatResult> {
    let p0 = p0_closed(d)?;
    let x0 = x0_closed(d, lp)?;
    let n0 = (2.0 * x0.norm() - 2.0 * p0).max(0.0);
    Ok(FlatResult { p0, x0, n0 })
}
