//! Minimizers of the full energy `G(v, φ)` under the unit-mass constraint `∫v² = 1`.
//!
//! Descent runs on the discrete energy with a block preconditioner: the `v` block uses
//! `A/h + (2/ε²)W` (stiffness plus the double-well curvature at `v = 1`), the `φ` block the
//! density-weighted stiffness plus `(δ/4ε²)W`. Directions in `v` are projected onto the tangent
//! space of the mass sphere; after each step `v` is clamped at zero and renormalized.

use serde::{Deserialize, Serialize};

use crate::energy::{full_energy_values, full_gradient, stiffness_plus_mass, EnergyBreakdown, Tridiagonal};
use crate::error::{invalid, Error, Result};
use crate::reduced::{solve_reduced, ShootingOptions, ShootingResult};
use crate::types::{FullParams, Grid, Profile};

/// Largest grid the full solver accepts.
pub const MAX_FULL_NODES: usize = 1 << 17;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FullOptions {
    pub max_iter: usize,
    /// Stop once the relative energy decrease over `window` iterations falls below this.
    pub stop_tol: f64,
    pub window: usize,
    /// Accepted scaled discrete-gradient residuals at termination.
    pub tol_el: f64,
    /// Trial values of `v` below `−negative_tol` raise the negative-excursion flag.
    pub negative_tol: f64,
    pub armijo: f64,
}

impl Default for FullOptions {
    fn default() -> Self {
        Self {
            max_iter: 200_000,
            stop_tol: 1e-13,
            window: 50,
            tol_el: 1e-6,
            negative_tol: 1e-10,
            armijo: 1e-4,
        }
    }
}

/// Coefficient of `v²` in the first integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FirstIntegralVariant {
    /// `+λv²`, what the Hamiltonian of the Euler–Lagrange system gives.
    Linear,
    /// `−(λ²/2)v²`, the alternative form.
    HalfSquare,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirstIntegralDrift {
    /// Max minus min over cells of the `+λv²` variant.
    pub linear: f64,
    /// Same for the `−(λ²/2)v²` variant.
    pub half_square: f64,
    /// The variant with the smaller drift.
    pub conserved: FirstIntegralVariant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FullResiduals {
    /// Interior max-norms of the `v` and `φ` equations, divided by `ε⁻²` and `δε⁻²` respectively.
    pub el: (f64, f64),
    /// `(|v'(0)|, |v'(1)|, |φ'(1) − 2κ|)` from second-order one-sided differences.
    pub bc: (f64, f64, f64),
    pub first_integral_drift: FirstIntegralDrift,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FullSolution {
    pub params: FullParams,
    pub v: Profile,
    pub phi: Profile,
    pub lambda: f64,
    pub energy: EnergyBreakdown,
    pub residuals: FullResiduals,
    /// `ε²/δ`, recorded rather than enforced to be small.
    pub layer_ratio: f64,
    /// `δ/ε`, recorded rather than enforced to be small.
    pub segregation_ratio: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Some trial step pushed `v` below `−negative_tol` before clamping.
    pub negative_v_flag: bool,
    /// Largest energy increase over an accepted step (0 for a monotone run).
    pub max_energy_increase: f64,
}

/// Grid with at least 64 nodes per `β` and 32 per `ε`.
pub fn full_grid(p: &FullParams) -> Result<Grid> {
    let n = (64.0 / p.beta).max(32.0 / p.epsilon).ceil() as usize + 1;
    if n > MAX_FULL_NODES {
        return Err(invalid(
            "grid",
            format!("the layers of ε = {} and β = {} need {n} nodes, above {MAX_FULL_NODES}", p.epsilon, p.beta),
        ));
    }
    Grid::unit(n.max(Grid::MIN_NODES))
}

/// `v ≡ 1` and the reduced shooting minimizer, resampled onto `grid`.
pub fn initial_guess(p: &FullParams, grid: &Grid) -> Result<(Profile, Profile)> {
    let rp = p.reduced();
    let fine = if grid.spacing() <= rp.beta / 64.0 { grid.clone() } else { Grid::resolving(rp.beta)? };
    let red = solve_reduced(&rp, &fine, &ShootingOptions::default())?;
    let phi = if &fine == grid { red.profile } else { red.profile.resample(grid) };
    let mut values = phi.into_values();
    values[0] = 0.0;
    Ok((Profile::constant(grid, 1.0), Profile::new(grid.clone(), values)?))
}

fn mass(v: &[f64], h: f64) -> f64 {
    let n = v.len();
    let inner: f64 = v[1..n - 1].iter().map(|x| x * x).sum();
    h * (inner + 0.5 * (v[0] * v[0] + v[n - 1] * v[n - 1]))
}

fn weight(i: usize, n: usize, h: f64) -> f64 {
    if i == 0 || i + 1 == n {
        0.5 * h
    } else {
        h
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Clamp at zero and rescale to unit trapezoid mass; returns whether anything was clamped past `tol`.
fn retract(v: &mut [f64], h: f64, tol: f64) -> bool {
    let mut flagged = false;
    for x in v.iter_mut() {
        if *x < 0.0 {
            flagged |= *x < -tol;
            *x = 0.0;
        }
    }
    let s = mass(v, h).sqrt();
    v.iter_mut().for_each(|x| *x /= s);
    flagged
}

struct Workspace {
    gv: Vec<f64>,
    gphi: Vec<f64>,
    zv: Vec<f64>,
    zphi: Vec<f64>,
    wv: Vec<f64>,
    pwv: Vec<f64>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        Self {
            gv: vec![0.0; n],
            gphi: vec![0.0; n],
            zv: vec![0.0; n],
            zphi: vec![0.0; n],
            wv: vec![0.0; n],
            pwv: vec![0.0; n],
        }
    }

    /// Gradient and tangent-projected preconditioned gradient at `(v, φ)`.
    fn update(&mut self, v: &[f64], phi: &[f64], p: &FullParams, h: f64, pre_v: &Tridiagonal) {
        let n = v.len();
        full_gradient(v, phi, p, h, &mut self.gv, &mut self.gphi);
        self.gphi[0] = 0.0;

        for i in 0..n {
            self.wv[i] = weight(i, n, h) * v[i];
        }
        pre_v.solve(&self.gv, &mut self.zv);
        pre_v.solve(&self.wv, &mut self.pwv);
        let mu = dot(&self.wv, &self.zv) / dot(&self.wv, &self.pwv);
        self.zv.iter_mut().zip(&self.pwv).for_each(|(z, q)| *z -= mu * q);

        let cells: Vec<f64> = v.windows(2).map(|w| 0.5 * (w[0] * w[0] + w[1] * w[1])).collect();
        let pre_phi = stiffness_plus_mass(n, h, 0.25, &cells, p.delta / (4.0 * p.epsilon * p.epsilon), true);
        self.zphi[0] = 0.0;
        pre_phi.solve(&self.gphi[1..], &mut self.zphi[1..]);
    }

    fn preconditioned_norm(&self) -> f64 {
        dot(&self.gv, &self.zv) + dot(&self.gphi, &self.zphi)
    }
}

pub fn minimize_full(p: &FullParams, grid: &Grid, init: (&Profile, &Profile), opts: &FullOptions) -> Result<FullSolution> {
    let (v0, phi0) = init;
    if v0.grid() != grid || phi0.grid() != grid {
        return Err(Error::GridMismatch);
    }
    if grid.n() > MAX_FULL_NODES {
        return Err(invalid("grid", format!("at most {MAX_FULL_NODES} nodes")));
    }
    if grid.spacing() > p.epsilon.min(p.beta) / 16.0 {
        return Err(invalid(
            "grid",
            format!("{} nodes do not resolve layers of width min(ε, β) = {}", grid.n(), p.epsilon.min(p.beta)),
        ));
    }
    if phi0.values()[0] != 0.0 {
        return Err(invalid("init", "φ must satisfy φ(0) = 0"));
    }
    if v0.values().iter().any(|&x| !(x >= 0.0)) {
        return Err(invalid("init", "v must be nonnegative"));
    }
    let n = grid.n();
    let h = grid.spacing();
    let mut v = v0.values().to_vec();
    if mass(&v, h) == 0.0 {
        return Err(invalid("init", "v must have positive mass"));
    }
    let mut phi = phi0.values().to_vec();
    let mut negative_v_flag = retract(&mut v, h, opts.negative_tol);

    let pre_v = stiffness_plus_mass(n, h, 1.0, &vec![1.0; n - 1], 2.0 / (p.epsilon * p.epsilon), false);
    let energy = |v: &[f64], phi: &[f64]| full_energy_values(v, phi, p, h).total;

    let mut ws = Workspace::new(n);
    let mut next = Workspace::new(n);
    ws.update(&v, &phi, p, h, &pre_v);
    let mut dv: Vec<f64> = ws.zv.iter().map(|z| -z).collect();
    let mut dphi: Vec<f64> = ws.zphi.iter().map(|z| -z).collect();
    let (mut tv, mut tphi) = (vec![0.0; n], vec![0.0; n]);

    let mut e = energy(&v, &phi);
    let mut history = vec![e];
    let mut t: f64 = 1.0;
    let mut iterations = 0;
    let mut stalled = false;
    let mut max_energy_increase: f64 = 0.0;

    while iterations < opts.max_iter {
        let mut slope = dot(&ws.gv, &dv) + dot(&ws.gphi, &dphi);
        if slope >= 0.0 {
            dv.iter_mut().zip(&ws.zv).for_each(|(d, z)| *d = -z);
            dphi.iter_mut().zip(&ws.zphi).for_each(|(d, z)| *d = -z);
            slope = -ws.preconditioned_norm();
        }
        if slope == 0.0 {
            stalled = true;
            break;
        }
        t = (2.0 * t).min(1.0);
        let mut accepted = None;
        for _ in 0..80 {
            for i in 0..n {
                tv[i] = v[i] + t * dv[i];
                tphi[i] = phi[i] + t * dphi[i];
            }
            let clamped = retract(&mut tv, h, opts.negative_tol);
            let et = energy(&tv, &tphi);
            if et <= e + opts.armijo * t * slope {
                accepted = Some((et, clamped));
                break;
            }
            let model = -slope * t * t / (2.0 * (et - e - slope * t));
            t = if model.is_finite() { model.clamp(0.1 * t, 0.5 * t) } else { 0.5 * t };
        }
        let Some((et, clamped)) = accepted else {
            stalled = true;
            break;
        };
        negative_v_flag |= clamped;
        max_energy_increase = max_energy_increase.max(et - e);
        std::mem::swap(&mut v, &mut tv);
        std::mem::swap(&mut phi, &mut tphi);
        e = et;
        iterations += 1;

        next.update(&v, &phi, p, h, &pre_v);
        let num = dot(&next.zv, &next.gv) - dot(&next.zv, &ws.gv) + dot(&next.zphi, &next.gphi)
            - dot(&next.zphi, &ws.gphi);
        let den = ws.preconditioned_norm();
        let pr = if den > 0.0 { (num / den).max(0.0) } else { 0.0 };
        // Carry the old direction over to the new tangent space before mixing it in.
        let wv_norm = dot(&next.wv, &v);
        let along = dot(&next.wv, &dv) / wv_norm;
        for i in 0..n {
            dv[i] = -next.zv[i] + pr * (dv[i] - along * v[i]);
            dphi[i] = -next.zphi[i] + pr * dphi[i];
        }
        std::mem::swap(&mut ws, &mut next);

        history.push(e);
        if history.len() > opts.window {
            let old = history[history.len() - 1 - opts.window];
            if old - e <= opts.stop_tol * e.abs().max(f64::MIN_POSITIVE) {
                stalled = true;
                break;
            }
        }
    }

    let lambda = dot(&ws.gv, &v);
    let v = Profile::new(grid.clone(), v)?;
    let phi = Profile::new(grid.clone(), phi)?;
    let residuals = residuals_full(&v, &phi, lambda, p)?;
    let grad_residual = discrete_gradient_residual(&ws, v.values(), lambda, p, h);
    Ok(FullSolution {
        params: *p,
        energy: full_energy_values(v.values(), phi.values(), p, h),
        v,
        phi,
        lambda,
        residuals,
        layer_ratio: p.layer_ratio(),
        segregation_ratio: p.segregation_ratio(),
        iterations,
        converged: stalled && grad_residual <= opts.tol_el,
        negative_v_flag,
        max_energy_increase,
    })
}

/// Scaled max-norm of the discrete projected gradient, the quantity descent drives to zero.
fn discrete_gradient_residual(ws: &Workspace, v: &[f64], lambda: f64, p: &FullParams, h: f64) -> f64 {
    let n = v.len();
    let e2 = p.epsilon * p.epsilon;
    let mut r: f64 = 0.0;
    for i in 0..n {
        let w = weight(i, n, h);
        r = r.max(((ws.gv[i] - lambda * w * v[i]) / w).abs() * e2);
        if i > 0 {
            r = r.max((4.0 * ws.gphi[i] / w).abs() * e2 / p.delta);
        }
    }
    r
}

/// Strong-form residuals, boundary mismatches and first-integral drift of `(v, φ, λ)`.
pub fn residuals_full(v: &Profile, phi: &Profile, lambda: f64, p: &FullParams) -> Result<FullResiduals> {
    if !v.same_grid(phi) {
        return Err(Error::GridMismatch);
    }
    let h = v.grid().spacing();
    let (v, phi) = (v.values(), phi.values());
    let n = v.len();
    let e2 = p.epsilon * p.epsilon;
    let (kappa, delta) = (p.kappa, p.delta);

    let (mut rv, mut rphi): (f64, f64) = (0.0, 0.0);
    for i in 1..n - 1 {
        let (vm, vi, vp) = (v[i - 1], v[i], v[i + 1]);
        let d2v = (vp - 2.0 * vi + vm) / (h * h);
        let dphi = (phi[i + 1] - phi[i - 1]) / (2.0 * h);
        let (s, c) = phi[i].sin_cos();
        let res_v = -d2v + vi * (vi * vi - 1.0) / e2 + 0.25 * vi * dphi * dphi + delta / (2.0 * e2) * vi.powi(3) * s * s
            - kappa * vi * dphi
            - lambda * vi;
        rv = rv.max(res_v.abs());
        // −(v²φ')' in flux form, (v²)' centrally.
        let m_right = 0.5 * (vi * vi + vp * vp);
        let m_left = 0.5 * (vm * vm + vi * vi);
        let flux = (m_right * (phi[i + 1] - phi[i]) - m_left * (phi[i] - phi[i - 1])) / (h * h);
        let dm = (vp * vp - vm * vm) / (2.0 * h);
        let res_phi = -flux + delta / e2 * vi.powi(4) * c * s + 2.0 * kappa * dm;
        rphi = rphi.max(res_phi.abs());
    }

    let d_left = |y: &[f64]| (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * h);
    let d_right = |y: &[f64]| (3.0 * y[n - 1] - 4.0 * y[n - 2] + y[n - 3]) / (2.0 * h);
    let bc = (d_left(v).abs(), d_right(v).abs(), (d_right(phi) - 2.0 * kappa).abs());

    let (mut lo_a, mut hi_a, mut lo_b, mut hi_b) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for c in 0..n - 1 {
        let vm = 0.5 * (v[c] + v[c + 1]);
        let dv = (v[c + 1] - v[c]) / h;
        let dphi = (phi[c + 1] - phi[c]) / h;
        let s = (0.5 * (phi[c] + phi[c + 1])).sin();
        let v2 = vm * vm;
        let common = dv * dv + 0.25 * v2 * dphi * dphi - (0.5 * v2 * v2 - v2) / e2 - delta / (4.0 * e2) * v2 * v2 * s * s;
        let a = common + lambda * v2;
        let b = common - 0.5 * lambda * lambda * v2;
        lo_a = lo_a.min(a);
        hi_a = hi_a.max(a);
        lo_b = lo_b.min(b);
        hi_b = hi_b.max(b);
    }
    let (linear, half_square) = (hi_a - lo_a, hi_b - lo_b);
    Ok(FullResiduals {
        el: (rv * e2, rphi * e2 / delta.max(f64::MIN_POSITIVE)),
        bc,
        first_integral_drift: FirstIntegralDrift {
            linear,
            half_square,
            conserved: if linear <= half_square {
                FirstIntegralVariant::Linear
            } else {
                FirstIntegralVariant::HalfSquare
            },
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Anchor {
    /// `x = scale·s`.
    Left,
    /// `x = 1 − scale·s`.
    Right,
}

/// `s ↦ profile(x(s))/amplitude` on `[0, window]` with `n_out` nodes, by linear interpolation.
pub fn blowup_rescale(
    profile: &Profile,
    scale: f64,
    anchor: Anchor,
    amplitude: f64,
    window: f64,
    n_out: usize,
) -> Result<Profile> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(invalid("scale", format!("must be positive, got {scale}")));
    }
    if !(amplitude > 0.0 && amplitude.is_finite()) {
        return Err(invalid("amplitude", format!("must be positive, got {amplitude}")));
    }
    let length = profile.grid().length();
    if !(window > 0.0) || scale * window > length * (1.0 + 1e-12) {
        return Err(Error::WindowOutOfDomain {
            start: 0.0,
            end: scale * window,
            length,
        });
    }
    let out = Grid::new(n_out, window)?;
    Ok(Profile::from_fn(&out, |s| {
        let x = match anchor {
            Anchor::Left => scale * s,
            Anchor::Right => length - scale * s,
        };
        profile.sample_linear(x) / amplitude
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedComparison {
    /// `|G_total/F_min − 1|`, defined as 0 when both vanish.
    pub energy_ratio_error: f64,
    /// `‖v − 1‖∞`.
    pub v_sup_deviation: f64,
    pub phi_end_difference: f64,
    /// `∫v'² + (1/4ε²)∫(v² − 1)²`.
    pub v_energy: f64,
    /// `v_energy/(√δ/ε)`.
    pub v_energy_ratio: f64,
}

pub fn compare_to_reduced(sol: &FullSolution, red: &ShootingResult) -> Result<ReducedComparison> {
    let rp = sol.params.reduced();
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300);
    if !close(rp.beta, red.params.beta) || !(close(rp.kappa, red.params.kappa) || rp.kappa == red.params.kappa) {
        return Err(invalid(
            "reduced",
            format!("parameters (β, κ) = ({}, {}) do not match ({}, {})", red.params.beta, red.params.kappa, rp.beta, rp.kappa),
        ));
    }
    let g = sol.energy.total;
    let energy_ratio_error = if red.energy == 0.0 {
        if g == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (g / red.energy - 1.0).abs()
    };
    let v_sup_deviation = sol.v.values().iter().fold(0.0f64, |m, &x| m.max((x - 1.0).abs()));
    let v_energy = 2.0 * sol.energy.kinetic_v + sol.energy.potential_v;
    let scale = sol.params.delta.sqrt() / sol.params.epsilon;
    Ok(ReducedComparison {
        energy_ratio_error,
        v_sup_deviation,
        phi_end_difference: (sol.phi.last() - red.phi_end).abs(),
        v_energy,
        v_energy_ratio: v_energy / scale,
    })
}
