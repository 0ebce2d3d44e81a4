//! Semi-analytic shooting over the initial slope.
//!
//! Every critical point of the reduced energy lies on a trajectory of the first integral
//! `φ' = √(sin²φ + ã²)/β` started from `φ(0) = 0`, so the energy restricted to that
//! one-parameter family is exact up to quadrature. Slopes are carried as `ln ã` because
//! subcritical minimizers start with `ã ~ e^{−1/β}`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use super::period::{measure_period, PeriodInfo};
use crate::error::{invalid, Error, Result};
use crate::flow::{first_integral_residual, integrate_flow, ln_sinh};
use crate::quadrature::{integral_j_ln, integral_s, QuadratureSettings};
use crate::roots::{find_root, RootOptions};
use crate::types::{classify_regime, Grid, Profile, ReducedParams, Regime, RegimeTag, THRESHOLD_TOL};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingOptions {
    pub quad: QuadratureSettings,
    /// Accepted `|φ'(1) − 2κ|`, relative to `max(1, 2κ)`.
    pub tol_bc: f64,
    /// Accepted rescaled first-integral residual `max |β²φ'² − sin²φ − ã²|`.
    pub tol_first_integral: f64,
    /// Interior samples of the Neumann mismatch per quarter of winding.
    pub samples_per_quarter: usize,
    pub threshold_tol: f64,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        Self {
            quad: QuadratureSettings::precise(),
            tol_bc: 1e-6,
            tol_first_integral: 1e-8,
            samples_per_quarter: 6,
            threshold_tol: THRESHOLD_TOL,
        }
    }
}

/// Below `ln u` of this the small-angle inverse of `J` is exact to round-off.
const SMALL_ANGLE_LN: f64 = -20.0;

/// Unfolded description of the trajectory with slope `ã` over `x ∈ [0, 1]`.
#[derive(Debug, Clone, Copy)]
struct Trajectory {
    ln_at: f64,
    /// Number of completed half-turns `M` in `Φ = Mπ + r`.
    half_turns: f64,
    rest: f64,
    phi_end: f64,
}

fn trajectory(ln_at: f64, beta: f64, q: &QuadratureSettings) -> Result<Trajectory> {
    let quarter_time = integral_j_ln(ln_at, FRAC_PI_2, q)?;
    let total = 1.0 / beta;
    let half_time = 2.0 * quarter_time;
    let half_turns = (total / half_time).floor();
    let rem = (total - half_turns * half_time).max(0.0);
    let (target, reflected) = if rem <= quarter_time {
        (rem, false)
    } else {
        ((half_time - rem).max(0.0), true)
    };
    let r = partial_angle(ln_at, target, quarter_time, q)?;
    let rest = if reflected { PI - r } else { r };
    Ok(Trajectory {
        ln_at,
        half_turns,
        rest,
        phi_end: half_turns * PI + rest,
    })
}

/// Angle `u ∈ [0, π/2]` with `J(ã, u) = target ≤ J(ã, π/2)`.
fn partial_angle(ln_at: f64, target: f64, quarter_time: f64, q: &QuadratureSettings) -> Result<f64> {
    if target <= 0.0 {
        return Ok(0.0);
    }
    if target >= quarter_time {
        return Ok(FRAC_PI_2);
    }
    // For u ≪ 1, J(ã, u) = asinh(u/ã) up to O(u²); this also covers roots below the
    // smallest normal double, which a bracketing solver would chase for a thousand steps.
    let ln_small = ln_at + ln_sinh(target);
    if ln_small < SMALL_ANGLE_LN {
        return Ok(ln_small.exp());
    }
    let mut failure = None;
    let root = find_root(
        |u| match integral_j_ln(ln_at, u, q) {
            Ok(j) => j - target,
            Err(e) => {
                failure = Some(e);
                f64::NAN
            }
        },
        0.0,
        FRAC_PI_2,
        RootOptions {
            abs_tol: 1e-300,
            rel_tol: 2.0 * f64::EPSILON,
            max_iter: 500,
        },
    );
    match failure {
        Some(e) => Err(e),
        None => root,
    }
}

fn unfolded_s(t: &Trajectory, q: &QuadratureSettings) -> Result<f64> {
    let at = t.ln_at.exp();
    let quarter = integral_s(at, FRAC_PI_2, q)?;
    let partial = if t.rest <= FRAC_PI_2 {
        integral_s(at, t.rest, q)?
    } else {
        2.0 * quarter - integral_s(at, (PI - t.rest).max(0.0), q)?
    };
    Ok(2.0 * t.half_turns * quarter + partial)
}

fn trajectory_energy(t: &Trajectory, p: &ReducedParams, q: &QuadratureSettings) -> Result<f64> {
    let at = t.ln_at.exp();
    let b = p.beta;
    Ok(unfolded_s(t, q)? / (4.0 * b) + at * at / (8.0 * b * b) - p.kappa_tilde * t.phi_end / (2.0 * b))
}

/// Endpoint `Φ` with `β ∫₀^Φ dy/√(sin²y + ã²) = 1`.
pub fn flight_angle(alpha_tilde: f64, beta: f64) -> Result<f64> {
    check_slope(alpha_tilde)?;
    flight_angle_ln(alpha_tilde.ln(), beta, &QuadratureSettings::precise())
}

pub fn flight_angle_ln(ln_alpha_tilde: f64, beta: f64, q: &QuadratureSettings) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(invalid("beta", "must be positive"));
    }
    Ok(trajectory(ln_alpha_tilde, beta, q)?.phi_end)
}

/// Exact continuum energy of the first-integral trajectory with slope `ã`.
pub fn energy_of_slope(alpha_tilde: f64, p: &ReducedParams) -> Result<f64> {
    check_slope(alpha_tilde)?;
    energy_of_log_slope(alpha_tilde.ln(), p, &QuadratureSettings::precise())
}

pub fn energy_of_log_slope(ln_alpha_tilde: f64, p: &ReducedParams, q: &QuadratureSettings) -> Result<f64> {
    let t = trajectory(ln_alpha_tilde, p.beta, q)?;
    trajectory_energy(&t, p, q)
}

fn check_slope(alpha_tilde: f64) -> Result<()> {
    if !(alpha_tilde > 0.0 && alpha_tilde.is_finite()) {
        return Err(invalid("alpha_tilde", format!("must be positive, got {alpha_tilde}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShootingResult {
    pub params: ReducedParams,
    pub regime: Regime,
    /// `φ'(0)` per unit length; underflows to 0 for extreme subcritical layers, see `ln_alpha_tilde`.
    pub alpha: f64,
    pub alpha_tilde: f64,
    pub ln_alpha_tilde: f64,
    pub profile: Profile,
    /// `φ'` obtained by integrating `φ'' = sin φ cos φ/β²` alongside the flow.
    pub slope: Profile,
    pub phi_end: f64,
    /// `arcsin(2κ̃) − φ(1)` on the subcritical branch, resolved below the spacing of doubles near
    /// `φ(1)` through `sin²φ(1) = 4κ̃² − ã²`; absent once `φ(1) ≥ π/2`.
    pub phi_end_deficit: Option<f64>,
    pub energy: f64,
    pub neumann_residual: f64,
    /// `max |β²φ'² − sin²φ − ã²|` over the nodes (rescaled units).
    pub first_integral_residual: f64,
    pub period: Option<PeriodInfo>,
    /// Set when a tolerance was missed or the drive sits at the threshold.
    pub flagged: bool,
    /// Critical slopes examined (local minima of the restricted energy).
    pub candidates: usize,
}

/// Summary scalars of a [`ShootingResult`], for serialization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootingSummary {
    pub alpha: f64,
    pub alpha_tilde: f64,
    pub phi_end: f64,
    pub phi_end_deficit: Option<f64>,
    pub energy: f64,
    pub neumann_residual: f64,
    pub first_integral_residual: f64,
    pub period: Option<PeriodInfo>,
    pub flagged: bool,
}

impl ShootingResult {
    pub fn summary(&self) -> ShootingSummary {
        ShootingSummary {
            alpha: self.alpha,
            alpha_tilde: self.alpha_tilde,
            phi_end: self.phi_end,
            phi_end_deficit: self.phi_end_deficit,
            energy: self.energy,
            neumann_residual: self.neumann_residual,
            first_integral_residual: self.first_integral_residual,
            period: self.period,
            flagged: self.flagged,
        }
    }
}

/// Integrate the increasing flow with initial slope `alpha = φ'(0)`.
pub fn integrate_profile(alpha: f64, p: &ReducedParams, grid: &Grid) -> Result<Profile> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(invalid("alpha", format!("must be positive, got {alpha}")));
    }
    Ok(integrate_profile_ln((alpha * p.beta).ln(), p, grid)?.0)
}

/// Profile and slope for the rescaled log-slope `ln ã`.
pub fn integrate_profile_ln(ln_alpha_tilde: f64, p: &ReducedParams, grid: &Grid) -> Result<(Profile, Profile, f64)> {
    if !ln_alpha_tilde.is_finite() {
        return Err(invalid("alpha_tilde", "log-slope must be finite"));
    }
    if (grid.length() - 1.0).abs() > 1e-12 {
        return Err(invalid("grid", "reduced profiles live on [0, 1]"));
    }
    let flow = integrate_flow(ln_alpha_tilde, p.beta, grid.nodes());
    let residual = first_integral_residual(&flow, ln_alpha_tilde, p.beta);
    if flow.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::StepUnderflow { x: 1.0 });
    }
    Ok((
        Profile::new(grid.clone(), flow.values)?,
        Profile::new(grid.clone(), flow.slope)?,
        residual,
    ))
}

/// `sin²Φ + ã² − 4κ̃²`; the restricted energy decreases where this is negative.
fn neumann_mismatch(t: &Trajectory, kt: f64) -> f64 {
    let at = t.ln_at.exp();
    let s = t.rest.sin();
    s * s + at * at - 4.0 * kt * kt
}

pub fn solve_reduced(p: &ReducedParams, grid: &Grid, opts: &ShootingOptions) -> Result<ShootingResult> {
    if (grid.length() - 1.0).abs() > 1e-12 {
        return Err(invalid("grid", "reduced profiles live on [0, 1]"));
    }
    if grid.spacing() > p.beta / 64.0 * (1.0 + 1e-9) {
        return Err(invalid(
            "grid",
            format!("{} nodes do not put 64 nodes across a layer of width {}", grid.n(), p.beta),
        ));
    }
    let regime = classify_regime(p, opts.threshold_tol);
    if p.is_undriven() {
        let zero = Profile::constant(grid, 0.0);
        return Ok(ShootingResult {
            params: *p,
            regime,
            alpha: 0.0,
            alpha_tilde: 0.0,
            ln_alpha_tilde: f64::NEG_INFINITY,
            profile: zero.clone(),
            slope: zero,
            phi_end: 0.0,
            phi_end_deficit: Some(0.0),
            energy: 0.0,
            neumann_residual: 0.0,
            first_integral_residual: 0.0,
            period: None,
            flagged: false,
            candidates: 0,
        });
    }

    let (best, candidates) = search_slope(p, opts)?;
    let (profile, slope, fi_residual) = integrate_profile_ln(best.ln_at, p, grid)?;
    let at = best.ln_at.exp();
    let energy = trajectory_energy(&best, p, &opts.quad)?;
    let neumann_residual = (slope.last() - 2.0 * p.kappa).abs();
    let period = (best.phi_end >= PI).then(|| measure_period(&profile)).flatten();
    let flagged = neumann_residual > opts.tol_bc * (2.0 * p.kappa).max(1.0)
        || fi_residual > opts.tol_first_integral
        || regime.tag == RegimeTag::Threshold;
    Ok(ShootingResult {
        params: *p,
        regime,
        alpha: at / p.beta,
        alpha_tilde: at,
        ln_alpha_tilde: best.ln_at,
        profile,
        slope,
        phi_end: best.phi_end,
        phi_end_deficit: endpoint_deficit(&best, p.kappa_tilde),
        energy,
        neumann_residual,
        first_integral_residual: fi_residual,
        period,
        flagged,
        candidates,
    })
}

/// `θ − Φ` with `sin θ = 2κ̃`, `sin Φ = √(4κ̃² − ã²)`: since `sin²θ − sin²Φ = ã²`,
/// `sin(θ − Φ) = ã²/(sin θ cos Φ + sin Φ cos θ)` has no cancellation.
fn endpoint_deficit(t: &Trajectory, kt: f64) -> Option<f64> {
    let a = 2.0 * kt;
    if t.half_turns > 0.0 || t.rest >= FRAC_PI_2 || a >= 1.0 {
        return None;
    }
    let at2 = (2.0 * t.ln_at).exp();
    let b = (a * a - at2).max(0.0).sqrt();
    let (ca, cb) = ((1.0 - a * a).sqrt(), (1.0 - b * b).sqrt());
    Some((at2 / (a * cb + b * ca)).asin())
}

/// Global minimizer of the restricted energy over `ln ã ∈ (ln ã_min, ln 2κ̃]`.
///
/// The slope axis is cut where `Φ` crosses multiples of `π/2`; inside each piece `sin²Φ`
/// is monotone, so sampling the Neumann mismatch there catches every local minimum
/// (sign change from − to +). Each one is refined to a root and the lowest energy wins.
fn search_slope(p: &ReducedParams, opts: &ShootingOptions) -> Result<(Trajectory, usize)> {
    let q = &opts.quad;
    let (b, kt) = (p.beta, p.kappa_tilde);
    let ln_hi = (2.0 * kt).ln();
    let ln_lo = (-1.0 / b - 50.0).min(ln_hi - 50.0);
    let top = trajectory(ln_hi, b, q)?;
    let quarters = (top.phi_end / FRAC_PI_2).floor() as usize;

    let root_opts = RootOptions {
        abs_tol: 1e-14,
        rel_tol: 4.0 * f64::EPSILON,
        max_iter: 300,
    };
    let mut cuts = Vec::with_capacity(quarters + 2);
    cuts.push(ln_lo);
    for k in 1..=quarters {
        // Φ = kπ/2 exactly when k·J(ã, π/2) = 1/β.
        let target = 1.0 / (k as f64 * b);
        let mut failure = None;
        let l = find_root(
            |l| match integral_j_ln(l, FRAC_PI_2, q) {
                Ok(j) => j - target,
                Err(e) => {
                    failure = Some(e);
                    f64::NAN
                }
            },
            ln_lo,
            ln_hi,
            root_opts,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        match l {
            Ok(l) => cuts.push(l),
            Err(Error::NoBracket { .. }) => break,
            Err(e) => return Err(e),
        }
    }
    cuts.push(ln_hi);

    let mut best: Option<(Trajectory, f64)> = None;
    let mut candidates = 0;
    let stiffest = 4.0 * kt * kt - 1.0;
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if !(hi > lo) {
            continue;
        }
        // sin²Φ ≤ 1 keeps the mismatch negative on the whole piece.
        if stiffest > 0.0 && (2.0 * hi).exp() < stiffest {
            continue;
        }
        let m = opts.samples_per_quarter.max(1) + 1;
        let mut prev: Option<(f64, f64)> = None;
        for k in 0..=m {
            let l = lo + (hi - lo) * (k as f64 / m as f64);
            let g = neumann_mismatch(&trajectory(l, b, q)?, kt);
            if let Some((l0, g0)) = prev {
                if g0 < 0.0 && g >= 0.0 {
                    let mut failure = None;
                    let root = find_root(
                        |x| match trajectory(x, b, q) {
                            Ok(t) => neumann_mismatch(&t, kt),
                            Err(e) => {
                                failure = Some(e);
                                f64::NAN
                            }
                        },
                        l0,
                        l,
                        root_opts,
                    );
                    if let Some(e) = failure {
                        return Err(e);
                    }
                    let t = trajectory(root?, b, q)?;
                    let e = trajectory_energy(&t, p, q)?;
                    candidates += 1;
                    if best.as_ref().is_none_or(|(_, eb)| e < *eb) {
                        best = Some((t, e));
                    }
                }
            }
            prev = Some((l, g));
        }
    }
    best.map(|(t, _)| (t, candidates))
        .ok_or(Error::NoBracket { lo: ln_lo, hi: ln_hi })
}
