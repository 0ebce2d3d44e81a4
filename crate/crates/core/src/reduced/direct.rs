//! Direct minimization of the trapezoid-discretized reduced energy.
//!
//! Independent of the shooting path: no first integral is used, only the discrete energy and
//! its exact gradient. Plain gradient descent with step `h²` needs `O((β/h)²·β⁻²)` iterations,
//! so descent directions are preconditioned by `A + W/(4β²)` (stiffness plus a bound on the
//! potential curvature) and combined by Polak–Ribière conjugacy.

use crate::energy::{reduced_energy_values, reduced_gradient, stiffness_plus_mass, EnergyBreakdown};
use crate::error::{invalid, Error, Result};
use crate::types::{Grid, Profile, ReducedParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectOptions {
    /// Stop once the relative energy decrease over `window` iterations falls below this.
    pub stop_tol: f64,
    pub window: usize,
    pub max_iter: usize,
    /// Armijo sufficient-decrease constant.
    pub armijo: f64,
}

impl Default for DirectOptions {
    fn default() -> Self {
        Self {
            stop_tol: 1e-12,
            window: 50,
            max_iter: 100_000,
            armijo: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectOutcome {
    pub profile: Profile,
    pub energy: EnergyBreakdown,
    pub iterations: usize,
    /// False when the iteration cap stopped the descent; the last iterate is still returned.
    pub converged: bool,
}

pub fn direct_minimize_reduced(
    p: &ReducedParams,
    grid: &Grid,
    init: &Profile,
    opts: &DirectOptions,
) -> Result<DirectOutcome> {
    if init.grid() != grid {
        return Err(Error::GridMismatch);
    }
    if init.values()[0] != 0.0 {
        return Err(invalid("init", "must satisfy φ(0) = 0"));
    }
    let n = grid.n();
    let h = grid.spacing();
    let energy = |x: &[f64]| reduced_energy_values(x, p, h).total;
    let pre = stiffness_plus_mass(n, h, 0.25, &vec![1.0; n - 1], 1.0 / (4.0 * p.beta * p.beta), true);

    let mut x = init.values().to_vec();
    let mut g = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut g_new = vec![0.0; n];
    let mut z_new = vec![0.0; n];

    let precondition = |g: &[f64], z: &mut [f64]| {
        z[0] = 0.0;
        pre.solve(&g[1..], &mut z[1..]);
    };

    reduced_gradient(&x, p, h, &mut g);
    g[0] = 0.0;
    precondition(&g, &mut z);
    d.iter_mut().zip(&z).for_each(|(d, z)| *d = -z);
    let mut e = energy(&x);
    let mut history = vec![e];
    let mut t: f64 = 1.0;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < opts.max_iter {
        let mut slope: f64 = g.iter().zip(&d).map(|(g, d)| g * d).sum();
        if slope >= 0.0 {
            d.iter_mut().zip(&z).for_each(|(d, z)| *d = -z);
            slope = -g.iter().zip(&z).map(|(g, z)| g * z).sum::<f64>();
        }
        if slope == 0.0 {
            converged = true;
            break;
        }
        // Backtracking with a safeguarded quadratic model, started from twice the last step.
        t = (2.0 * t).min(1.0);
        let mut accepted = None;
        for _ in 0..80 {
            trial.iter_mut().zip(x.iter().zip(&d)).for_each(|(y, (x, d))| *y = x + t * d);
            let et = energy(&trial);
            if et <= e + opts.armijo * t * slope {
                accepted = Some(et);
                break;
            }
            let model = -slope * t * t / (2.0 * (et - e - slope * t));
            t = if model.is_finite() { model.clamp(0.1 * t, 0.5 * t) } else { 0.5 * t };
        }
        let Some(et) = accepted else {
            // No representable decrease along a descent direction: round-off floor reached.
            converged = true;
            break;
        };
        std::mem::swap(&mut x, &mut trial);
        e = et;
        iterations += 1;

        reduced_gradient(&x, p, h, &mut g_new);
        g_new[0] = 0.0;
        precondition(&g_new, &mut z_new);
        let num: f64 = z_new.iter().zip(g_new.iter().zip(&g)).map(|(z, (a, b))| z * (a - b)).sum();
        let den: f64 = z.iter().zip(&g).map(|(z, g)| z * g).sum();
        let pr = if den > 0.0 { (num / den).max(0.0) } else { 0.0 };
        d.iter_mut().zip(&z_new).for_each(|(d, z)| *d = -z + pr * *d);
        std::mem::swap(&mut g, &mut g_new);
        std::mem::swap(&mut z, &mut z_new);

        history.push(e);
        if history.len() > opts.window {
            let old = history[history.len() - 1 - opts.window];
            if (old - e) <= opts.stop_tol * e.abs().max(f64::MIN_POSITIVE) {
                converged = true;
                break;
            }
        }
    }
    Ok(DirectOutcome {
        energy: reduced_energy_values(&x, p, h),
        profile: Profile::new(grid.clone(), x)?,
        iterations,
        converged,
    })
}
