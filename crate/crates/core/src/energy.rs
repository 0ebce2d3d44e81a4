//! Discrete energies and their exact gradients.
//!
//! Gradient terms are integrated exactly per cell for piecewise-linear profiles (the cell
//! density `v²` enters through its two-point average); pointwise terms use the trapezoid
//! rule. With `v ≡ 1` the full energy reduces term by term to the reduced one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{FullParams, Profile, ReducedParams};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    /// `½∫v'²`
    pub kinetic_v: f64,
    /// `(1/4ε²)∫(1 − v²)²`
    pub potential_v: f64,
    /// `⅛∫v²φ'²`
    pub kinetic_phi: f64,
    /// `(δ/8ε²)∫v⁴ sin²φ`, or `(1/8β²)∫sin²φ` for the reduced energy.
    pub interaction: f64,
    /// `−(κ/2)∫v²φ'`
    pub drive: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    fn from_parts(kinetic_v: f64, potential_v: f64, kinetic_phi: f64, interaction: f64, drive: f64) -> Self {
        Self {
            kinetic_v,
            potential_v,
            kinetic_phi,
            interaction,
            drive,
            total: kinetic_v + potential_v + kinetic_phi + interaction + drive,
        }
    }

    pub fn parts_sum(&self) -> f64 {
        self.kinetic_v + self.potential_v + self.kinetic_phi + self.interaction + self.drive
    }

    /// Energy carried by the density alone, `½∫v'² + (1/4ε²)∫(1 − v²)²`.
    pub fn density_part(&self) -> f64 {
        self.kinetic_v + self.potential_v
    }
}

pub(crate) fn reduced_energy_values(phi: &[f64], p: &ReducedParams, h: f64) -> EnergyBreakdown {
    let n = phi.len();
    let mut grad = 0.0;
    for w in phi.windows(2) {
        let d = w[1] - w[0];
        grad += d * d;
    }
    let mut pot = 0.0;
    for &t in &phi[1..n - 1] {
        let s = t.sin();
        pot += s * s;
    }
    let (s0, s1) = (phi[0].sin(), phi[n - 1].sin());
    pot = h * (pot + 0.5 * (s0 * s0 + s1 * s1));
    EnergyBreakdown::from_parts(
        0.0,
        0.0,
        grad / (8.0 * h),
        pot / (8.0 * p.beta * p.beta),
        -0.5 * p.kappa * (phi[n - 1] - phi[0]),
    )
}

/// Reduced energy `⅛∫(φ'² + sin²φ/β²) − (κ/2)∫φ'` of a sampled profile.
pub fn energy_reduced(phi: &Profile, p: &ReducedParams) -> EnergyBreakdown {
    reduced_energy_values(phi.values(), p, phi.grid().spacing())
}

/// Gradient of [`reduced_energy_values`] with respect to every node value.
pub(crate) fn reduced_gradient(phi: &[f64], p: &ReducedParams, h: f64, out: &mut [f64]) {
    let n = phi.len();
    let c = 1.0 / (4.0 * h);
    let w = 1.0 / (8.0 * p.beta * p.beta);
    for i in 0..n {
        let left = if i > 0 { phi[i] - phi[i - 1] } else { 0.0 };
        let right = if i + 1 < n { phi[i + 1] - phi[i] } else { 0.0 };
        let weight = if i == 0 || i + 1 == n { 0.5 * h } else { h };
        out[i] = c * (left - right) + w * weight * (2.0 * phi[i]).sin();
    }
    out[0] += 0.5 * p.kappa;
    out[n - 1] -= 0.5 * p.kappa;
}

pub(crate) fn full_energy_values(v: &[f64], phi: &[f64], p: &FullParams, h: f64) -> EnergyBreakdown {
    let n = v.len();
    let (mut kv, mut kp, mut dr) = (0.0, 0.0, 0.0);
    for c in 0..n - 1 {
        let dv = v[c + 1] - v[c];
        let dphi = phi[c + 1] - phi[c];
        let m = 0.5 * (v[c] * v[c] + v[c + 1] * v[c + 1]);
        kv += dv * dv;
        kp += m * dphi * dphi;
        dr += m * dphi;
    }
    let (mut pv, mut it) = (0.0, 0.0);
    for i in 0..n {
        let wt = if i == 0 || i + 1 == n { 0.5 } else { 1.0 };
        let v2 = v[i] * v[i];
        let s = phi[i].sin();
        pv += wt * (1.0 - v2) * (1.0 - v2);
        it += wt * v2 * v2 * s * s;
    }
    let e2 = p.epsilon * p.epsilon;
    EnergyBreakdown::from_parts(
        kv / (2.0 * h),
        h * pv / (4.0 * e2),
        kp / (8.0 * h),
        h * it * p.delta / (8.0 * e2),
        -0.5 * p.kappa * dr,
    )
}

/// Full energy `G(v, φ)` on a shared grid.
pub fn energy_full(v: &Profile, phi: &Profile, p: &FullParams) -> Result<EnergyBreakdown> {
    if !v.same_grid(phi) {
        return Err(Error::GridMismatch);
    }
    Ok(full_energy_values(v.values(), phi.values(), p, v.grid().spacing()))
}

/// Gradients of [`full_energy_values`] with respect to `v` and `φ`.
pub(crate) fn full_gradient(v: &[f64], phi: &[f64], p: &FullParams, h: f64, gv: &mut [f64], gphi: &mut [f64]) {
    let n = v.len();
    let e2 = p.epsilon * p.epsilon;
    let kappa = p.kappa;
    gv.iter_mut().for_each(|g| *g = 0.0);
    gphi.iter_mut().for_each(|g| *g = 0.0);
    for c in 0..n - 1 {
        let dv = v[c + 1] - v[c];
        let dphi = phi[c + 1] - phi[c];
        let m = 0.5 * (v[c] * v[c] + v[c + 1] * v[c + 1]);
        // ∂/∂v of Σ dv²/2h and of Σ m (dφ²/8h − κ dφ/2), with ∂m/∂v_j = v_j.
        let cell = dphi * dphi / (8.0 * h) - 0.5 * kappa * dphi;
        gv[c] += -dv / h + v[c] * cell;
        gv[c + 1] += dv / h + v[c + 1] * cell;
        let flux = m * (dphi / (4.0 * h) - 0.5 * kappa);
        gphi[c] -= flux;
        gphi[c + 1] += flux;
    }
    for i in 0..n {
        let wt = if i == 0 || i + 1 == n { 0.5 * h } else { h };
        let v2 = v[i] * v[i];
        let (s, co) = phi[i].sin_cos();
        gv[i] += wt * (-v[i] * (1.0 - v2) / e2 + p.delta / (2.0 * e2) * v2 * v[i] * s * s);
        gphi[i] += wt * p.delta / (4.0 * e2) * v2 * v2 * s * co;
    }
}

/// Tridiagonal solver with a one-time factorization (Thomas algorithm).
#[derive(Debug, Clone)]
pub(crate) struct Tridiagonal {
    sub: Vec<f64>,
    diag_inv: Vec<f64>,
    sup_scaled: Vec<f64>,
}

impl Tridiagonal {
    /// `sub[i]` couples row `i` to `i − 1` (`sub[0]` unused), `sup[i]` couples `i` to `i + 1`.
    pub fn factor(sub: &[f64], diag: &[f64], sup: &[f64]) -> Self {
        let n = diag.len();
        let mut diag_inv = vec![0.0; n];
        let mut sup_scaled = vec![0.0; n];
        let mut d = diag[0];
        diag_inv[0] = 1.0 / d;
        for i in 1..n {
            sup_scaled[i - 1] = sup[i - 1] * diag_inv[i - 1];
            d = diag[i] - sub[i] * sup_scaled[i - 1];
            diag_inv[i] = 1.0 / d;
        }
        Self {
            sub: sub.to_vec(),
            diag_inv,
            sup_scaled,
        }
    }

    pub fn solve(&self, rhs: &[f64], out: &mut [f64]) {
        let n = rhs.len();
        out[0] = rhs[0] * self.diag_inv[0];
        for i in 1..n {
            out[i] = (rhs[i] - self.sub[i] * out[i - 1]) * self.diag_inv[i];
        }
        for i in (0..n - 1).rev() {
            out[i] -= self.sup_scaled[i] * out[i + 1];
        }
    }
}

/// `A + c·W` restricted to nodes `1..n`, where `A` is the stiffness matrix of `coef·Σ dφ²/h`
/// with per-cell weights `cell_w` and `W` the trapezoid mass.
pub(crate) fn stiffness_plus_mass(n: usize, h: f64, coef: f64, cell_w: &[f64], c: f64, skip_first: bool) -> Tridiagonal {
    let start = usize::from(skip_first);
    let m = n - start;
    let mut sub = vec![0.0; m];
    let mut diag = vec![0.0; m];
    let mut sup = vec![0.0; m];
    for i in start..n {
        let r = i - start;
        let wt = if i == 0 || i + 1 == n { 0.5 * h } else { h };
        let mut d = c * wt;
        if i > 0 {
            let k = coef * cell_w[i - 1] / h;
            d += k;
            if r > 0 {
                sub[r] = -k;
            }
        }
        if i + 1 < n {
            let k = coef * cell_w[i] / h;
            d += k;
            sup[r] = -k;
        }
        diag[r] = d;
    }
    Tridiagonal::factor(&sub, &diag, &sup)
}
