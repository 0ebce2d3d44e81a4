//! Closed-form and root-finding evaluations of the asymptotic predictions for the
//! reduced energy: regime thresholds, the optimal stripe slope `α̃₀`, periods, leading
//! energies and the limiting profiles.

use std::f64::consts::{FRAC_1_PI, FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::flow::integrate_flow;
use crate::quadrature::{integral_i, integral_j, QuadratureSettings};
use crate::roots::{find_root, RootOptions};
use crate::types::{classify_regime, Grid, Profile, ReducedParams, Regime, RegimeTag, THRESHOLD_TOL};

/// Lower end of the `α̃₀` bracket.
pub const ALPHA0_FLOOR: f64 = 1e-12;

/// `f(x) = (1 − cos x)/4 − κ̃x/2`; its minimum over `[0, π]` is the subcritical energy per unit `1/β`.
pub fn transition_f(x: f64, kappa_tilde: f64) -> f64 {
    0.25 * (1.0 - x.cos()) - 0.5 * kappa_tilde * x
}

/// Value of `f` at its interior local minimum `arcsin(2κ̃)`.
pub fn transition_f_interior_min(kappa_tilde: f64) -> f64 {
    let s = 2.0 * kappa_tilde;
    0.25 * (1.0 - (1.0 - s * s).sqrt()) - 0.5 * kappa_tilde * s.asin()
}

/// Interior minimum of `f` minus `f(π)`; its root on `(1/π, 1/2)` is `κ̃_crit`.
pub fn critical_gap(kappa_tilde: f64) -> f64 {
    transition_f_interior_min(kappa_tilde) - 0.5 * (1.0 - kappa_tilde * PI)
}

pub fn critical_kappa(tol: f64) -> f64 {
    let opts = RootOptions {
        abs_tol: tol.max(1e-300),
        ..RootOptions::default()
    };
    find_root(critical_gap, FRAC_1_PI, 0.5, opts).expect("critical_gap changes sign on (1/π, 1/2)")
}

/// Root of `I(α̃₀, π/2) = κ̃π` on `(1e-12, 2κ̃]`.
pub fn alpha0(kappa_tilde: f64, tol: f64) -> Result<f64> {
    if !(kappa_tilde * PI > 1.0) {
        return Err(invalid(
            "kappa_tilde",
            format!("optimal slope exists only for κ̃ > 1/π, got {kappa_tilde}"),
        ));
    }
    let q = QuadratureSettings::precise();
    let target = kappa_tilde * PI;
    let opts = RootOptions {
        abs_tol: 1e-15,
        ..RootOptions::default()
    };
    let mut err = None;
    let root = find_root(
        |a| match integral_i(a, FRAC_PI_2, &q) {
            Ok(v) => v - target,
            Err(e) => {
                err = Some(e);
                f64::NAN
            }
        },
        ALPHA0_FLOOR,
        2.0 * kappa_tilde,
        opts,
    );
    if let Some(e) = err {
        return Err(e);
    }
    let a = root?;
    let residual = (integral_i(a, FRAC_PI_2, &q)? - target).abs();
    if residual > tol.max(1e-13 * target) {
        return Err(invalid(
            "tol",
            format!("optimal slope residual {residual:e} exceeds requested {tol:e}"),
        ));
    }
    Ok(a)
}

/// `h(x) = (I(x) − κ̃π)/(4J(x)) − x²/8`, minimized at `α̃₀` with value `−α̃₀²/8`.
pub fn h_of_slope(x: f64, kappa_tilde: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(invalid("x", format!("must be positive, got {x}")));
    }
    let q = QuadratureSettings::precise();
    let i = integral_i(x, FRAC_PI_2, &q)?;
    let j = integral_j(x, FRAC_PI_2, &q)?;
    Ok((i - kappa_tilde * PI) / (4.0 * j) - x * x / 8.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleSettings {
    pub threshold_tol: f64,
    /// κ̃ at and above which the simplified `−κ̃²/(2β²)` energy is also reported.
    pub large_drive_cutoff: f64,
    /// κ̃ below which the linear-drive expansion `−κ²β/2` replaces the closed form.
    pub small_drive_cutoff: f64,
}

impl Default for OracleSettings {
    fn default() -> Self {
        Self {
            threshold_tol: THRESHOLD_TOL,
            large_drive_cutoff: 10.0,
            small_drive_cutoff: 0.01,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expansion {
    LinearDrive,
    Subcritical,
    Supercritical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OraclePrediction {
    pub regime: Regime,
    pub expansion: Expansion,
    pub phi_end: f64,
    pub energy_leading: f64,
    pub energy_order: String,
    pub alpha0: Option<f64>,
    pub period_t: Option<f64>,
    pub period_bounds: Option<(f64, f64)>,
    /// Asymptotic range of `N·β`, from the period bounds.
    pub stripe_count_scale: Option<(f64, f64)>,
    /// Point prediction `β/T` of `N·β`.
    pub stripe_density: Option<f64>,
    pub simplified_energy: Option<f64>,
    /// Set at the threshold, where the subcritical formula is reused.
    pub threshold_warning: bool,
}

pub fn predicted_energy(p: &ReducedParams) -> Result<OraclePrediction> {
    predicted_energy_with(p, &OracleSettings::default())
}

pub fn predicted_energy_with(p: &ReducedParams, s: &OracleSettings) -> Result<OraclePrediction> {
    let regime = classify_regime(p, s.threshold_tol);
    let (beta, kt) = (p.beta, p.kappa_tilde);
    let mut out = OraclePrediction {
        regime,
        expansion: Expansion::Subcritical,
        phi_end: 0.0,
        energy_leading: 0.0,
        energy_order: String::new(),
        alpha0: None,
        period_t: None,
        period_bounds: None,
        stripe_count_scale: None,
        stripe_density: None,
        simplified_energy: None,
        threshold_warning: regime.tag == RegimeTag::Threshold,
    };
    match regime.tag {
        RegimeTag::Subcritical | RegimeTag::Threshold if kt < s.small_drive_cutoff => {
            out.expansion = Expansion::LinearDrive;
            out.phi_end = 2.0 * p.kappa * beta;
            out.energy_leading = -0.5 * p.kappa * p.kappa * beta;
            out.energy_order = "o(κ²β)".into();
        }
        RegimeTag::Subcritical | RegimeTag::Threshold => {
            out.phi_end = (2.0 * kt).asin();
            out.energy_leading = transition_f_interior_min(kt) / beta;
            out.energy_order = "o(β^n)".into();
        }
        RegimeTag::Supercritical | RegimeTag::NearThreshold => {
            let a0 = alpha0(kt, 1e-12)?;
            let t = 2.0 * beta * integral_j(a0, FRAC_PI_2, &QuadratureSettings::precise())?;
            out.expansion = Expansion::Supercritical;
            out.alpha0 = Some(a0);
            out.energy_leading = -a0 * a0 / (8.0 * beta * beta);
            out.energy_order = "O(1/β)".into();
            out.period_t = Some(t);
            out.phi_end = PI / t;
            out.period_bounds = Some((PI * beta / a0.hypot(1.0), PI * beta / a0));
            out.stripe_count_scale = Some((a0 / PI, a0.hypot(1.0) / PI));
            out.stripe_density = Some(beta / t);
            if kt >= s.large_drive_cutoff {
                out.simplified_energy = Some(-kt * kt / (2.0 * beta * beta));
            }
        }
    }
    Ok(out)
}

/// `ψ₀(x) = 2 arctan(tan(arcsin(2κ̃)/2) e^{−x})`, the decaying heteroclinic `ψ' = −sin ψ`.
pub fn boundary_layer_psi0(x: f64, kappa_tilde: f64) -> Result<f64> {
    if !(2.0 * kappa_tilde <= 1.0 && kappa_tilde >= 0.0) {
        return Err(invalid("kappa_tilde", format!("needs 0 ≤ 2κ̃ ≤ 1, got {kappa_tilde}")));
    }
    if !(x >= 0.0) {
        return Err(invalid("x", "must be nonnegative"));
    }
    Ok(2.0 * ((0.5 * (2.0 * kappa_tilde).asin()).tan() * (-x).exp()).atan())
}

/// Solution of `φ₀' = √(α̃₀² + sin²φ₀)`, `φ₀(0) = 0` on `grid`.
pub fn limit_profile_phi0(alpha0: f64, grid: &Grid) -> Result<Profile> {
    if !(alpha0 > 0.0 && alpha0.is_finite()) {
        return Err(invalid("alpha0", format!("must be positive, got {alpha0}")));
    }
    let flow = integrate_flow(alpha0.ln(), 1.0, grid.nodes());
    Profile::new(grid.clone(), flow.values)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NearThresholdPrediction {
    pub kappa_tilde: f64,
    pub energy_leading: f64,
    pub alpha0: f64,
    /// `α̃₀ / β^γ`, expected to be of order one.
    pub alpha0_ratio: f64,
    pub ratio_in_range: bool,
}

/// Drive `κ̃π = 1 + (β^{2γ}/2) log(1/β^γ)` and the stated leading energy `−β^{γ−2}/8`.
pub fn near_threshold_prediction(beta: f64, gamma: f64) -> Result<NearThresholdPrediction> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(invalid("beta", format!("must lie in (0, 1), got {beta}")));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(invalid("gamma", format!("must lie in (0, 1), got {gamma}")));
    }
    let bg = beta.powf(gamma);
    let kappa_tilde = (1.0 + 0.5 * bg * bg * (1.0 / bg).ln()) / PI;
    let a0 = alpha0(kappa_tilde, 1e-12)?;
    let ratio = a0 / bg;
    Ok(NearThresholdPrediction {
        kappa_tilde,
        energy_leading: -beta.powf(gamma - 2.0) / 8.0,
        alpha0: a0,
        alpha0_ratio: ratio,
        ratio_in_range: (0.5..=2.0).contains(&ratio),
    })
}
