//! Run-configuration parsing and report generation for the `udwh` binary.
//!
//! A run is described by a plain-text file of `key = value` lines (`#`
//! starts a comment). [`parse_config`] turns the text into a validated
//! [`RunConfig`]; [`run`] executes it and returns the finished report —
//! a CSV table for the computation modes, a pass/fail list for
//! `selfcheck` — without touching the filesystem.
//!
//! Unit convention: the computation is carried out with lengths
//! normalized to the star radius (so `R_o = 1` internally) or, in flat
//! mode, to the detector switching width. The config values may be given
//! in any consistent unit system; they are rescaled before use and the
//! table columns report the normalized values.

use num_complex::Complex64;
use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::flat::{p0_closed, p0_numeric, x0_closed, x0_numeric, DetectorConfig};
use crate::gcorr::{delta_p1, delta_x1, g1_kernel, tilde_p1, tilde_x1, KernelPoint};
use crate::metric::{Geometry, StarConfig};
use crate::negativity::{compute_flat, compute_perturbed, sweep_r1, EntanglementResult};
use crate::quad::QuadSpec;

/// What the binary should compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Flat-space negativity at one separation: a single table row.
    Flat,
    /// Negativity near a star at one detector position: a single table row.
    Curved,
    /// Negativity near a star over a grid of detector positions, plus the
    /// flat-space asymptote as a final row.
    Sweep,
    /// Internal consistency checks; pass/fail report instead of a table.
    SelfCheck,
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "flat" => Ok(Mode::Flat),
            "curved" => Ok(Mode::Curved),
            "sweep" => Ok(Mode::Sweep),
            "selfcheck" => Ok(Mode::SelfCheck),
            other => Err(Error::Config {
                key: "mode".into(),
                constraint: format!("must be flat, curved, sweep or selfcheck, got `{other}`"),
            }),
        }
    }
}

/// Grid spacing for sweep mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

impl FromStr for Spacing {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Spacing::Linear),
            "log" => Ok(Spacing::Log),
            other => Err(Error::Config {
                key: "spacing".into(),
                constraint: format!("must be linear or log, got `{other}`"),
            }),
        }
    }
}

/// A parsed, per-key-validated run configuration. Cross-field requirements
/// (which keys a mode needs, grid consistency) are checked by [`run`], so a
/// config file can carry a full parameter set and have its `mode`
/// overridden from the command line.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub mode: Mode,
    pub delta_e: Option<f64>,
    pub sigma: Option<f64>,
    /// Detector coupling; defaults to 1.
    pub alpha: f64,
    /// Proper separation of the detector pair.
    pub lp: Option<f64>,
    pub mass: Option<f64>,
    pub radius: Option<f64>,
    /// Radius of detector 1 (curved mode).
    pub r1: Option<f64>,
    pub r1_min: Option<f64>,
    pub r1_max: Option<f64>,
    pub steps: Option<usize>,
    pub spacing: Spacing,
    pub quad: QuadSpec,
    /// Report destination; `None` means standard output.
    pub out: Option<PathBuf>,
}

/// The outcome of [`run`]: the report text plus the summary flags the
/// binary folds into its exit code.
#[derive(Debug)]
pub struct RunOutcome {
    /// CSV table (computation modes) or pass/fail listing (selfcheck).
    pub report: String,
    /// False when any row failed or any quadrature did not converge.
    pub rows_converged: bool,
    /// False when a selfcheck check failed; always true for other modes.
    pub checks_passed: bool,
}

const COLUMNS: &str = "r1_over_Ro,L_p_over_Ro,P0,tildeP1,deltaP1,P1,tildeP2,deltaP2,P2,\
                       absX0,abs_tildeX,abs_deltaX,absX,N,Nprime,Nprime_flat_asymptote,\
                       converged_flags";

fn config_err(key: &str, constraint: impl Into<String>) -> Error {
    Error::Config {
        key: key.into(),
        constraint: constraint.into(),
    }
}

fn parse_f64(key: &str, val: &str, ok: impl Fn(f64) -> bool, constraint: &str) -> Result<f64> {
    let x: f64 = val
        .parse()
        .map_err(|_| config_err(key, format!("must be {constraint}, got `{val}`")))?;
    if !x.is_finite() || !ok(x) {
        return Err(config_err(key, format!("must be {constraint}, got `{val}`")));
    }
    Ok(x)
}

fn parse_usize(key: &str, val: &str, min: usize, constraint: &str) -> Result<usize> {
    let n: usize = val
        .parse()
        .map_err(|_| config_err(key, format!("must be {constraint}, got `{val}`")))?;
    if n < min {
        return Err(config_err(key, format!("must be {constraint}, got `{val}`")));
    }
    Ok(n)
}

/// Parse a `key = value` configuration file. Every key is validated
/// individually (unknown keys, duplicates, malformed or out-of-range
/// values are all rejected by name); `mode` is required.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut mode: Option<Mode> = None;
    let mut cfg = RunConfig {
        mode: Mode::Flat, // placeholder until `mode` is seen
        delta_e: None,
        sigma: None,
        alpha: 1.0,
        lp: None,
        mass: None,
        radius: None,
        r1: None,
        r1_min: None,
        r1_max: None,
        steps: None,
        spacing: Spacing::Linear,
        quad: QuadSpec::default(),
        out: None,
    };
    let mut seen = BTreeSet::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(config_err(
                &format!("line {}", idx + 1),
                format!("expected `key = value`, got `{line}`"),
            ));
        };
        let key = k.trim();
        let val = v.trim();
        if val.is_empty() {
            return Err(config_err(key, "value must not be empty"));
        }
        if !seen.insert(key.to_string()) {
            return Err(config_err(key, "duplicate key"));
        }
        match key {
            "mode" => mode = Some(val.parse()?),
            "delta_e" => cfg.delta_e = Some(parse_f64(key, val, |x| x >= 0.0, "a number ≥ 0")?),
            "sigma" => cfg.sigma = Some(parse_f64(key, val, |x| x > 0.0, "a number > 0")?),
            "alpha" => cfg.alpha = parse_f64(key, val, |x| x > 0.0, "a number > 0")?,
            "lp" => cfg.lp = Some(parse_f64(key, val, |x| x > 0.0, "a number > 0")?),
            "mass" => cfg.mass = Some(parse_f64(key, val, |x| x >= 0.0, "a number ≥ 0")?),
            "radius" => cfg.radius = Some(parse_f64(key, val, |x| x > 0.0, "a number > 0")?),
            "r1" => cfg.r1 = Some(parse_f64(key, val, |x| x > 0.0, "a number > 0")?),
            "r1_min" => cfg.r1_min = Some(parse_f64(key, val, |x| x > 0.0, "a number > 0")?),
            "r1_max" => cfg.r1_max = Some(parse_f64(key, val, |x| x > 0.0, "a number > 0")?),
            "steps" => cfg.steps = Some(parse_usize(key, val, 1, "an integer ≥ 1")?),
            "spacing" => cfg.spacing = val.parse()?,
            "rel_tol" => cfg.quad.rel_tol = parse_f64(key, val, |x| x > 0.0, "a number > 0")?,
            "abs_tol" => cfg.quad.abs_tol = parse_f64(key, val, |x| x >= 0.0, "a number ≥ 0")?,
            "max_subdivisions" => {
                cfg.quad.max_subdivisions = parse_usize(key, val, 1, "an integer ≥ 1")?
            }
            "eps0" => cfg.quad.eps0 = parse_f64(key, val, |x| x >= 0.0, "a number ≥ 0")?,
            "eps_ratio" => cfg.quad.eps_ratio = parse_f64(key, val, |x| x > 1.0, "a number > 1")?,
            "eps_levels" => cfg.quad.eps_levels = parse_usize(key, val, 2, "an integer ≥ 2")?,
            "tail_tol" => cfg.quad.tail_tol = parse_f64(key, val, |x| x > 0.0, "a number > 0")?,
            "out" => cfg.out = Some(PathBuf::from(val)),
            other => return Err(config_err(other, "unrecognized key")),
        }
    }

    cfg.mode = mode.ok_or_else(|| config_err("mode", "required"))?;
    Ok(cfg)
}

fn need<T: Copy>(v: Option<T>, key: &'static str) -> Result<T> {
    v.ok_or_else(|| config_err(key, "required for this mode"))
}

/// Inputs rescaled to the internal unit system (star radius, or switching
/// width in flat mode). Lengths divide by the scale, the energy gap
/// multiplies by it; all reported quantities are invariant.
struct Normalized {
    d: DetectorConfig,
    lp: f64,
    star: Option<StarConfig>,
    quad: QuadSpec,
    scale: f64,
}

fn normalized(cfg: &RunConfig, with_star: bool) -> Result<Normalized> {
    let delta_e = need(cfg.delta_e, "delta_e")?;
    let sigma = need(cfg.sigma, "sigma")?;
    let lp = need(cfg.lp, "lp")?;
    let scale = if with_star {
        need(cfg.radius, "radius")?
    } else {
        sigma
    };
    let star = if with_star {
        let mass = need(cfg.mass, "mass")?;
        Some(StarConfig::new(mass / scale, 1.0)?)
    } else {
        None
    };
    let mut quad = cfg.quad.clone();
    if quad.eps0 > 0.0 {
        quad.eps0 /= scale;
    }
    Ok(Normalized {
        d: DetectorConfig::new(delta_e * scale, sigma / scale, cfg.alpha)?,
        lp: lp / scale,
        star,
        quad,
        scale,
    })
}

fn sweep_grid(cfg: &RunConfig, scale: f64) -> Result<Vec<f64>> {
    let min = need(cfg.r1_min, "r1_min")? / scale;
    let max = need(cfg.r1_max, "r1_max")? / scale;
    let steps = need(cfg.steps, "steps")?;
    if steps == 1 {
        return Ok(vec![min]);
    }
    if min >= max {
        return Err(config_err("r1_min", "must be < r1_max when steps > 1"));
    }
    let n = (steps - 1) as f64;
    let mut grid: Vec<f64> = (0..steps)
        .map(|i| match cfg.spacing {
            Spacing::Linear => min + (max - min) * i as f64 / n,
            Spacing::Log => (min.ln() + (max.ln() - min.ln()) * i as f64 / n).exp(),
        })
        .collect();
    // Pin the endpoints so rounding in the interpolation cannot shift them.
    grid[0] = min;
    grid[steps - 1] = max;
    Ok(grid)
}

fn fmt_field(x: f64) -> String {
    // 17 significant digits: every f64 round-trips exactly, so downstream
    // arithmetic on parsed columns reproduces the computed values. Signed
    // zero is canonicalized — it carries no information here and would
    // make equal-valued rows compare unequal as text.
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

fn push_row(csv: &mut String, r1: f64, lp: f64, res: &EntanglementResult, flat_nprime: f64) {
    let b = &res.breakdown;
    let flags: String = b
        .eps_diagnostics
        .iter()
        .map(|d| if d.converged { 'c' } else { 'n' })
        .collect();
    let fields = [
        r1,
        lp,
        res.p0,
        b.tilde_p[0],
        b.delta_p[0],
        res.p1,
        b.tilde_p[1],
        b.delta_p[1],
        res.p2,
        res.x0.norm(),
        b.tilde_x.norm(),
        b.delta_x.norm(),
        res.x.norm(),
        res.n,
        res.n_prime,
        flat_nprime,
    ];
    for f in fields {
        csv.push_str(&fmt_field(f));
        csv.push(',');
    }
    csv.push_str(&flags);
    csv.push('\n');
}

fn push_error_row(csv: &mut String, r1: f64, lp: f64, err: &Error) {
    let _ = write!(csv, "{},{}", fmt_field(r1), fmt_field(lp));
    for _ in 0..14 {
        csv.push_str(",NaN");
    }
    let msg = err.to_string().replace([',', '\n'], ";");
    let _ = writeln!(csv, ",error({msg})");
}

/// Execute a run configuration and return the finished report. Pure with
/// respect to the filesystem — the caller decides where the report goes.
/// Rows of a sweep are computed in input order (in parallel when the
/// `parallel` feature is active; the output is identical either way) and
/// the table is assembled only after every row has finished.
pub fn run(cfg: &RunConfig) -> Result<RunOutcome> {
    match cfg.mode {
        Mode::SelfCheck => {
            let (report, ok) = selfcheck();
            Ok(RunOutcome {
                report,
                rows_converged: true,
                checks_passed: ok,
            })
        }
        Mode::Flat => {
            let norm = normalized(cfg, false)?;
            let res = compute_flat(&norm.d, norm.lp)?;
            let mut csv = String::from(COLUMNS);
            csv.push('\n');
            push_row(&mut csv, f64::INFINITY, norm.lp, &res, res.n_prime);
            Ok(RunOutcome {
                report: csv,
                rows_converged: true,
                checks_passed: true,
            })
        }
        Mode::Curved => {
            let norm = normalized(cfg, true)?;
            let star = norm.star.as_ref().expect("curved mode builds a star");
            let r1 = need(cfg.r1, "r1")? / norm.scale;
            let geom = Geometry::new(r1, norm.lp)?;
            let res = compute_perturbed(&norm.d, &geom, star, &norm.quad)?;
            let flat = compute_flat(&norm.d, norm.lp)?;
            let mut csv = String::from(COLUMNS);
            csv.push('\n');
            push_row(&mut csv, r1, norm.lp, &res, flat.n_prime);
            Ok(RunOutcome {
                report: csv,
                rows_converged: res.converged,
                checks_passed: true,
            })
        }
        Mode::Sweep => {
            let norm = normalized(cfg, true)?;
            let star = norm.star.as_ref().expect("sweep mode builds a star");
            let grid = sweep_grid(cfg, norm.scale)?;
            let table = sweep_r1(&norm.d, star, norm.lp, &grid, &norm.quad)?;
            let flat_nprime = table.flat_asymptote.n_prime;
            let mut csv = String::from(COLUMNS);
            csv.push('\n');
            let mut rows_converged = true;
            for (r1, row) in &table.rows {
                match row {
                    Ok(res) => {
                        rows_converged &= res.converged;
                        push_row(&mut csv, *r1, norm.lp, res, flat_nprime);
                    }
                    Err(e) => {
                        rows_converged = false;
                        push_error_row(&mut csv, *r1, norm.lp, e);
                    }
                }
            }
            push_row(
                &mut csv,
                f64::INFINITY,
                norm.lp,
                &table.flat_asymptote,
                flat_nprime,
            );
            Ok(RunOutcome {
                report: csv,
                rows_converged,
                checks_passed: true,
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Selfcheck.
// ---------------------------------------------------------------------------

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn check_flat_numeric_vs_closed() -> std::result::Result<(), String> {
    let spec = QuadSpec::default();
    let d = DetectorConfig::new(1.0, 1.0, 1.0).map_err(|e| e.to_string())?;
    let pc = p0_closed(&d).map_err(|e| e.to_string())?;
    let pn = p0_numeric(&d, &spec).map_err(|e| e.to_string())?;
    if rel(pn.value.re, pc) > 1e-6 {
        return Err(format!("noise: closed {pc:e} vs numeric {:e}", pn.value.re));
    }
    let lp = 1.5;
    let xc = x0_closed(&d, lp).map_err(|e| e.to_string())?;
    let xn = x0_numeric(&d, lp, &spec).map_err(|e| e.to_string())?;
    if (xn.value - xc).norm() > 1e-6 * xc.norm() {
        return Err(format!("exchange: closed {xc} vs numeric {}", xn.value));
    }
    Ok(())
}

fn check_kernel_symmetry() -> std::result::Result<(), String> {
    for zx in [0.3, 1.1, 2.7] {
        for zy in [0.4, 0.9, 3.2] {
            for s in [0.1, 1.0] {
                let a = KernelPoint::new(zx, zy, s, 1e-6).map_err(|e| e.to_string())?;
                let b = KernelPoint::new(zy, zx, s, 1e-6).map_err(|e| e.to_string())?;
                let (ka, kb) = (g1_kernel(&a), g1_kernel(&b));
                if ka.re.to_bits() != kb.re.to_bits() || ka.im.to_bits() != kb.im.to_bits() {
                    return Err(format!("asymmetric at zx={zx} zy={zy} s={s}"));
                }
            }
        }
    }
    Ok(())
}

fn check_mass_linearity() -> std::result::Result<(), String> {
    let spec = QuadSpec::default();
    let d = DetectorConfig::new(1.0, 0.00674, 1.0).map_err(|e| e.to_string())?;
    let geom = Geometry::new(2.0, 0.0095).map_err(|e| e.to_string())?;
    let corr = |mass: f64| -> std::result::Result<(f64, f64, Complex64, Complex64), String> {
        let star = StarConfig::new(mass, 1.0).map_err(|e| e.to_string())?;
        Ok((
            tilde_p1(geom.r1, &d, &star).map_err(|e| e.to_string())?,
            delta_p1(geom.r1, &d, &star, &spec)
                .map_err(|e| e.to_string())?
                .value
                .re,
            tilde_x1(&geom, &d, &star).map_err(|e| e.to_string())?,
            delta_x1(&geom, &d, &star, &spec)
                .map_err(|e| e.to_string())?
                .value,
        ))
    };
    let (tp_a, dp_a, tx_a, dx_a) = corr(1e-3)?;
    let (tp_b, dp_b, tx_b, dx_b) = corr(2e-3)?;
    if rel(tp_b, 2.0 * tp_a) > 1e-12 {
        return Err(format!("dilation noise: {tp_a:e} vs {tp_b:e}"));
    }
    if rel(dp_b, 2.0 * dp_a) > 1e-6 {
        return Err(format!("propagator noise: {dp_a:e} vs {dp_b:e}"));
    }
    if (tx_b - 2.0 * tx_a).norm() > 1e-12 * tx_a.norm() {
        return Err(format!("dilation exchange: {tx_a} vs {tx_b}"));
    }
    if (dx_b - 2.0 * dx_a).norm() > 1e-6 * dx_a.norm() {
        return Err(format!("propagator exchange: {dx_a} vs {dx_b}"));
    }
    Ok(())
}

/// Run the internal consistency checks and render one pass/fail line per
/// check. Returns the report and whether everything passed.
pub fn selfcheck() -> (String, bool) {
    let checks: [(&str, fn() -> std::result::Result<(), String>); 3] = [
        ("flat numeric integration vs closed forms", check_flat_numeric_vs_closed),
        ("correlation kernel exchange symmetry", check_kernel_symmetry),
        ("first-order corrections linear in mass", check_mass_linearity),
    ];
    let mut report = String::new();
    let mut all_ok = true;
    for (name, check) in checks {
        match check() {
            Ok(()) => {
                let _ = writeln!(report, "check {name}: PASS");
            }
            Err(why) => {
                all_ok = false;
                let _ = writeln!(report, "check {name}: FAIL ({why})");
            }
        }
    }
    let _ = writeln!(
        report,
        "selfcheck: {}",
        if all_ok { "all checks passed" } else { "FAILED" }
    );
    (report, all_ok)
}
