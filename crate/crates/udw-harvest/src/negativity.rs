//! Negativity assembly: combines the noise and exchange matrix elements —
//! flat-space values plus, when a star is present, their first-order
//! corrections — into the entanglement negativity of the detector pair at
//! second order in the coupling.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::exec;
use crate::flat::{p0_closed, x0_closed, DetectorConfig};
use crate::gcorr::{delta_p1, delta_x1, tilde_p1, tilde_x1, CorrectionBreakdown, QuadDiag};
use crate::metric::{coordinate_separation, validity_check, Geometry, StarConfig, ValidityReport};
use crate::quad::QuadSpec;

/// Fraction of the zeroth-order magnitude a first-order component may
/// reach before the result is flagged as outside the perturbative regime.
const REGIME_FRACTION: f64 = 0.1;

/// Complete negativity computation for one detector pair: the assembled
/// matrix elements, the negativity in raw and normalized form, and the full
/// per-order breakdown.
#[derive(Debug, Clone)]
pub struct EntanglementResult {
    /// Flat-space noise (identical for both detectors).
    pub p0: f64,
    /// Flat-space exchange amplitude.
    pub x0: Complex64,
    /// Assembled noise of detector 1 (zeroth order plus corrections).
    pub p1: f64,
    /// Assembled noise of detector 2.
    pub p2: f64,
    /// Assembled exchange amplitude.
    pub x: Complex64,
    /// Negativity.
    pub n: f64,
    /// Normalized negativity 8π²N/α².
    pub n_prime: f64,
    /// First-order corrections by physical origin (all zero for flat
    /// results).
    pub breakdown: CorrectionBreakdown,
    /// Geometry validity flags; absent for flat results.
    pub diagnostics: Option<ValidityReport>,
    /// True when every first-order component is small (< 10%) against its
    /// zeroth-order counterpart; false marks the result as out of the
    /// perturbative regime.
    pub perturbative_ok: bool,
    /// True when every quadrature underlying the result converged.
    pub converged: bool,
}

fn no_corrections() -> CorrectionBreakdown {
    let exact = QuadDiag {
        err_estimate: 0.0,
        evaluations: 0,
        converged: true,
    };
    CorrectionBreakdown {
        tilde_p: [0.0; 2],
        delta_p: [0.0; 2],
        tilde_x: Complex64::new(0.0, 0.0),
        delta_x: Complex64::new(0.0, 0.0),
        eps_diagnostics: [exact; 3],
    }
}

/// Negativity of the detector pair's final state at second order in the
/// coupling:
///
/// ```text
/// N = max( √((P₁ − P₂)² + 4|X|²) − P₁ − P₂, 0 )
/// ```
///
/// Symmetric under exchanging `p1 ↔ p2`; zero exactly when the exchange
/// amplitude is too small to beat the combined noise.
pub fn negativity_of(p1: f64, p2: f64, x: Complex64) -> Result<f64> {
    if !(p1 >= 0.0) || !(p2 >= 0.0) {
        return Err(Error::Domain {
            context: "negativity_of",
            message: format!("noise terms must be non-negative, got ({p1}, {p2})"),
        });
    }
    let dp = p1 - p2;
    let root = (dp * dp + 4.0 * x.norm_sqr()).sqrt();
    // Grouping the noise sum keeps the swap symmetry p1 ↔ p2 bitwise exact.
    Ok((root - (p1 + p2)).max(0.0))
}

fn n_prime_of(n: f64, alpha: f64) -> f64 {
    8.0 * PI * PI * n / (alpha * alpha)
}

/// Negativity of two static detectors in flat spacetime at proper
/// separation `lp`, assembled from the closed forms for the noise and the
/// exchange amplitude.
pub fn compute_flat(d: &DetectorConfig, lp: f64) -> Result<EntanglementResult> {
    let p0 = p0_closed(d)?;
    let x0 = x0_closed(d, lp)?;
    let n = negativity_of(p0, p0, x0)?;
    Ok(EntanglementResult {
        p0,
        x0,
        p1: p0,
        p2: p0,
        x: x0,
        n,
        n_prime: n_prime_of(n, d.alpha),
        breakdown: no_corrections(),
        diagnostics: None,
        perturbative_ok: true,
        converged: true,
    })
}

/// Negativity of two static detectors aligned radially outside (or inside)
/// a star, with all four first-order corrections applied:
/// `P_j = P₀ + P̃_j + δP_j` and `X = X₀ + X̃ + δX`.
///
/// Detector 2 sits at `r2 = r1 + L`, where `L` is the coordinate
/// separation reproducing proper separation `lp`. Quadrature
/// non-convergence does not abort the computation; it is recorded in the
/// breakdown diagnostics and summarized in `converged`.
pub fn compute_perturbed(
    d: &DetectorConfig,
    geom: &Geometry,
    star: &StarConfig,
    spec: &QuadSpec,
) -> Result<EntanglementResult> {
    d.validate()?;
    geom.validate()?;
    star.validate()?;

    let r1 = geom.r1;
    let r2 = r1 + coordinate_separation(r1, geom.lp, star)?;
    let p0 = p0_closed(d)?;
    let x0 = x0_closed(d, geom.lp)?;

    let tp = [tilde_p1(r1, d, star)?, tilde_p1(r2, d, star)?];
    let dp1 = delta_p1(r1, d, star, spec)?;
    let dp2 = delta_p1(r2, d, star, spec)?;
    let tx = tilde_x1(geom, d, star)?;
    let dx = delta_x1(geom, d, star, spec)?;

    let p1 = p0 + tp[0] + dp1.value.re;
    let p2 = p0 + tp[1] + dp2.value.re;
    let x = x0 + tx + dx.value;
    let n = negativity_of(p1, p2, x)?;

    let x0n = x0.norm();
    let perturbative_ok = tp[0].abs() < REGIME_FRACTION * p0
        && tp[1].abs() < REGIME_FRACTION * p0
        && dp1.value.re.abs() < REGIME_FRACTION * p0
        && dp2.value.re.abs() < REGIME_FRACTION * p0
        && tx.norm() < REGIME_FRACTION * x0n
        && dx.value.norm() < REGIME_FRACTION * x0n;
    let converged = dp1.converged && dp2.converged && dx.converged;

    Ok(EntanglementResult {
        p0,
        x0,
        p1,
        p2,
        x,
        n,
        n_prime: n_prime_of(n, d.alpha),
        breakdown: CorrectionBreakdown {
            tilde_p: tp,
            delta_p: [dp1.value.re, dp2.value.re],
            tilde_x: tx,
            delta_x: dx.value,
            eps_diagnostics: [
                QuadDiag::from(&dp1),
                QuadDiag::from(&dp2),
                QuadDiag::from(&dx),
            ],
        },
        diagnostics: Some(validity_check(star, geom)?),
        perturbative_ok,
        converged,
    })
}

/// Distance sweep: [`compute_perturbed`] at each requested `r1`, plus the
/// flat-space asymptote the curves approach at large distance.
#[derive(Debug)]
pub struct SweepTable {
    /// One row per requested radius, in input order. Per-point failures
    /// are recorded in place; the sweep continues past them.
    pub rows: Vec<(f64, Result<EntanglementResult>)>,
    /// Flat-space result at the same detector parameters and separation,
    /// computed from closed forms (not extrapolated).
    pub flat_asymptote: EntanglementResult,
}

/// Run the distance sweep over `r1_values` (must be sorted ascending, all
/// positive). Points are independent and are distributed across the thread
/// pool when the `parallel` feature is active; row order and row values are
/// identical either way.
pub fn sweep_r1(
    d: &DetectorConfig,
    star: &StarConfig,
    lp: f64,
    r1_values: &[f64],
    spec: &QuadSpec,
) -> Result<SweepTable> {
    if r1_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain {
            context: "sweep_r1",
            message: "radii must be strictly ascending".into(),
        });
    }
    if r1_values.first().is_some_and(|&r| r <= 0.0) {
        return Err(Error::Domain {
            context: "sweep_r1",
            message: "radii must be positive".into(),
        });
    }
    let results = exec::map_auto(r1_values, |&r1| {
        Geometry::new(r1, lp).and_then(|geom| compute_perturbed(d, &geom, star, spec))
    });
    let rows = r1_values.iter().copied().zip(results).collect();
    Ok(SweepTable {
        rows,
        flat_asymptote: compute_flat(d, lp)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig_detector() -> DetectorConfig {
        DetectorConfig::new(1.0, 0.00674, 1.0).unwrap()
    }

    fn star() -> StarConfig {
        StarConfig {
            mass: 1e-3,
            radius: 1.0,
        }
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    // ---- the negativity formula ----

    #[test]
    fn negativity_formula_cases() {
        // Exchange too weak: clamped to zero.
        let z = negativity_of(0.05, 0.05, Complex64::new(0.03, 0.0)).unwrap();
        assert_eq!(z, 0.0);
        // Equal noise: N = 2(|X| − P).
        let n = negativity_of(0.05, 0.05, Complex64::new(0.0, 0.1)).unwrap();
        assert!(rel(n, 0.1) < 1e-15);
        // Generic values: direct formula.
        let n = negativity_of(0.01, 0.02, Complex64::new(0.03, 0.04)).unwrap();
        assert!(rel(n, (0.0001f64 + 0.01).sqrt() - 0.03) < 1e-15);
        assert!(rel(n, 0.07049875621120889) < 1e-12);
        // Negative noise is rejected.
        assert!(matches!(
            negativity_of(-0.01, 0.02, Complex64::new(0.0, 0.0)),
            Err(Error::Domain { .. })
        ));
        assert!(matches!(
            negativity_of(0.01, -0.02, Complex64::new(0.0, 0.0)),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn negativity_is_symmetric_under_label_exchange() {
        let x = Complex64::new(0.031, -0.017);
        let a = negativity_of(0.0124, 0.0222, x).unwrap();
        let b = negativity_of(0.0222, 0.0124, x).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    // ---- flat assembly ----

    #[test]
    fn flat_separation_anchors() {
        let d = fig_detector();

        // Narrow separation: entangled, with a frozen reference value.
        let tight = compute_flat(&d, 0.0095).unwrap();
        assert!(tight.n > 0.0);
        assert!(rel(tight.n_prime, 0.8405816080663915) < 1e-12);
        assert!(rel(tight.n, tight.n_prime / (8.0 * PI * PI)) < 1e-15);

        // Slightly wider: the exchange amplitude no longer beats the
        // noise — N is exactly zero while |X| stays within 1% of P.
        let wide = compute_flat(&d, 0.01).unwrap();
        assert_eq!(wide.n, 0.0);
        assert_eq!(wide.n_prime, 0.0);
        assert!((wide.x.norm() - wide.p1).abs() < 0.01 * wide.p1);

        // Zeroth order is echoed into the result.
        assert!(rel(tight.p0, 0.07863042708384613) < 1e-12);
        assert_eq!(tight.p1, tight.p0);
        assert_eq!(tight.p2, tight.p0);
        assert!(tight.diagnostics.is_none());
        assert!(tight.converged);
    }

    #[test]
    fn flat_below_gap_threshold_is_separable() {
        // At gap·width = 1 and separation 10× the width, the pair is far
        // below the entanglement threshold.
        let d = DetectorConfig::new(1.0, 1.0, 1.0).unwrap();
        let res = compute_flat(&d, 10.0).unwrap();
        assert_eq!(res.n, 0.0);
    }

    // ---- perturbed assembly ----

    #[test]
    fn zero_mass_reduces_to_flat() {
        let d = fig_detector();
        let geom = Geometry::new(2.0, 0.0095).unwrap();
        let none = StarConfig {
            mass: 0.0,
            radius: 1.0,
        };
        let spec = QuadSpec::default();
        let flat = compute_flat(&d, geom.lp).unwrap();
        let pert = compute_perturbed(&d, &geom, &none, &spec).unwrap();
        assert!(rel(pert.p1, flat.p1) < 1e-12);
        assert!(rel(pert.p2, flat.p2) < 1e-12);
        assert!((pert.x - flat.x).norm() < 1e-12 * flat.x.norm());
        assert!(rel(pert.n, flat.n) < 1e-12);
        assert!(pert.converged);
        assert!(pert.perturbative_ok);
        assert!(pert.diagnostics.is_some());
    }

    #[test]
    fn exchange_enhancement_without_net_entanglement_at_wider_separation() {
        // At the wider separation the star *does* strengthen the exchange
        // amplitude (|X| grows), but the noise also grows — the net noise
        // correction is positive at these parameters — and the pair stays
        // unentangled. Both facts are pinned: the enhancement is real, the
        // negativity stays exactly zero.
        let d = fig_detector();
        let geom = Geometry::new(1.1, 0.01).unwrap();
        let spec = QuadSpec::default();
        let flat = compute_flat(&d, geom.lp).unwrap();
        assert_eq!(flat.n, 0.0);
        let pert = compute_perturbed(&d, &geom, &star(), &spec).unwrap();
        assert!(pert.x.norm() > flat.x.norm());
        assert!(pert.breakdown.tilde_p[0] + pert.breakdown.delta_p[0] > 0.0);
        assert_eq!(pert.n, 0.0);
    }

    #[test]
    fn entanglement_enhancement_decays_toward_flat_asymptote() {
        let d = fig_detector();
        let spec = QuadSpec::default();
        let lp = 0.0095;
        let flat = compute_flat(&d, lp).unwrap();
        let near = compute_perturbed(&d, &Geometry::new(2.0, lp).unwrap(), &star(), &spec)
            .unwrap();
        let far = compute_perturbed(&d, &Geometry::new(8.0, lp).unwrap(), &star(), &spec)
            .unwrap();
        assert!(
            near.n > far.n && far.n > flat.n,
            "expected N(2) > N(8) > N_flat, got {} / {} / {}",
            near.n,
            far.n,
            flat.n
        );
        assert!(near.perturbative_ok);
        assert!(near.converged);
    }

    #[test]
    fn negativity_correction_is_linear_in_mass() {
        let d = fig_detector();
        let spec = QuadSpec::default();
        let geom = Geometry::new(2.0, 0.0095).unwrap();
        let flat_n = compute_flat(&d, geom.lp).unwrap().n;
        let masses = [5e-4, 1e-3, 2e-3];
        let mut excess = [0.0f64; 3];
        for (i, &m) in masses.iter().enumerate() {
            let st = StarConfig {
                mass: m,
                radius: 1.0,
            };
            excess[i] = compute_perturbed(&d, &geom, &st, &spec).unwrap().n - flat_n;
        }
        // Two-point line through the end masses, checked at the middle.
        let slope = (excess[2] - excess[0]) / (masses[2] - masses[0]);
        let predicted = excess[0] + slope * (masses[1] - masses[0]);
        assert!(
            rel(excess[1], predicted) < 0.02,
            "excess {excess:?} deviates from linearity"
        );
    }

    #[test]
    fn out_of_regime_detector_is_flagged() {
        // With gap × width = 5 the flat-space noise is Gaussian-suppressed
        // to ~2e-14, while the propagator correction — which keeps power at
        // the light-echo times s ≈ 2|r₁ − R_o| — decays far more slowly.
        // The first-order term is then no longer small against the zeroth
        // order and the result must carry the out-of-regime flag.
        let spec = QuadSpec::default();
        let d = DetectorConfig::new(10.0, 0.5, 1.0).unwrap();
        let geom = Geometry::new(2.0, 0.01).unwrap();
        let res = compute_perturbed(&d, &geom, &star(), &spec).unwrap();
        assert!(!res.perturbative_ok);
        assert!(res.p1 > 0.0 && res.p2 > 0.0);
        assert!(res.breakdown.delta_p[0].abs() > 0.1 * res.p0);
        // The same star and geometry at the narrow-width parameters sit
        // deep inside the perturbative regime.
        let mild = compute_perturbed(&fig_detector(), &geom, &star(), &spec).unwrap();
        assert!(mild.perturbative_ok);
        assert!(mild.converged);
    }

    #[test]
    fn clamp_identity_holds_on_computed_results() {
        let d = fig_detector();
        let spec = QuadSpec::default();
        for lp in [0.0095, 0.01] {
            let geom = Geometry::new(3.0, lp).unwrap();
            let res = compute_perturbed(&d, &geom, &star(), &spec).unwrap();
            assert!(res.n >= 0.0);
            let dp = res.p1 - res.p2;
            let recomputed =
                ((dp * dp + 4.0 * res.x.norm_sqr()).sqrt() - (res.p1 + res.p2)).max(0.0);
            assert_eq!(res.n.to_bits(), recomputed.to_bits());
        }
    }

    // ---- sweep ----

    #[test]
    fn single_point_sweep_equals_direct_computation() {
        let d = fig_detector();
        let spec = QuadSpec::default();
        let lp = 0.0095;
        let table = sweep_r1(&d, &star(), lp, &[2.0], &spec).unwrap();
        assert_eq!(table.rows.len(), 1);
        let (r1, row) = &table.rows[0];
        assert_eq!(*r1, 2.0);
        let row = row.as_ref().unwrap();
        let direct =
            compute_perturbed(&d, &Geometry::new(2.0, lp).unwrap(), &star(), &spec).unwrap();
        assert_eq!(row.n.to_bits(), direct.n.to_bits());
        assert_eq!(row.p1.to_bits(), direct.p1.to_bits());
        assert_eq!(row.x.re.to_bits(), direct.x.re.to_bits());
        assert_eq!(row.x.im.to_bits(), direct.x.im.to_bits());
    }

    #[test]
    fn zero_mass_sweep_rows_are_constant_and_flat() {
        let d = fig_detector();
        let spec = QuadSpec::default();
        let none = StarConfig {
            mass: 0.0,
            radius: 1.0,
        };
        let table = sweep_r1(&d, &none, 0.0095, &[1.5, 3.0, 6.0], &spec).unwrap();
        let flat = &table.flat_asymptote;
        for (_, row) in &table.rows {
            let row = row.as_ref().unwrap();
            assert!(rel(row.n, flat.n) < 1e-12);
            assert!(rel(row.p1, flat.p1) < 1e-12);
        }
    }

    #[test]
    fn sweep_rejects_bad_grids() {
        let d = fig_detector();
        let spec = QuadSpec::default();
        assert!(matches!(
            sweep_r1(&d, &star(), 0.0095, &[2.0, 1.5], &spec),
            Err(Error::Domain { .. })
        ));
        assert!(matches!(
            sweep_r1(&d, &star(), 0.0095, &[-1.0, 1.5], &spec),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn exchange_gain_follows_inverse_square_law() {
        // The net exchange-amplitude gain |X| − |X₀| falls off as 1/r²
        // (the dilation and propagator pieces cancel at leading order,
        // leaving the derivative term's 1/r · 1/r structure).
        let d = fig_detector();
        let spec = QuadSpec::default();
        let lp = 0.01;
        let flat = compute_flat(&d, lp).unwrap();
        let gain = |r1: f64| {
            let res =
                compute_perturbed(&d, &Geometry::new(r1, lp).unwrap(), &star(), &spec).unwrap();
            res.x.norm() - flat.x.norm()
        };
        let g2 = gain(2.0);
        let g5 = gain(5.0);
        assert!(g2 > 0.0 && g5 > 0.0);
        let ratio = g2 / g5;
        assert!(
            (ratio / 6.25 - 1.0).abs() < 0.03,
            "gain ratio {ratio} vs (5/2)² = 6.25"
        );
    }
}
