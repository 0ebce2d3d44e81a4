//! Parameter records, uniform grids, sampled profiles and regime labels.

use std::f64::consts::{FRAC_1_PI, PI};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Default tolerance on `κ̃ − 1/π` below which a drive counts as [`RegimeTag::Threshold`].
pub const THRESHOLD_TOL: f64 = 1e-9;

/// Parameters of the reduced (phase-only) energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedParams {
    pub beta: f64,
    pub kappa: f64,
    pub kappa_tilde: f64,
}

impl ReducedParams {
    /// `kappa = 0` is accepted as the degenerate undriven problem.
    pub fn new(beta: f64, kappa: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(invalid("beta", format!("must be positive and finite, got {beta}")));
        }
        if !(kappa >= 0.0 && kappa.is_finite()) {
            return Err(invalid("kappa", format!("must be nonnegative and finite, got {kappa}")));
        }
        Ok(Self {
            beta,
            kappa,
            kappa_tilde: kappa * beta,
        })
    }

    /// Build from the rescaled drive; `kappa_tilde` is stored verbatim.
    pub fn with_kappa_tilde(beta: f64, kappa_tilde: f64) -> Result<Self> {
        if !(kappa_tilde >= 0.0 && kappa_tilde.is_finite()) {
            return Err(invalid(
                "kappa_tilde",
                format!("must be nonnegative and finite, got {kappa_tilde}"),
            ));
        }
        let mut p = Self::new(beta, kappa_tilde / beta)?;
        p.kappa_tilde = kappa_tilde;
        Ok(p)
    }

    pub fn is_undriven(&self) -> bool {
        self.kappa == 0.0
    }
}

/// Parameters of the full density/phase energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FullParams {
    pub epsilon: f64,
    pub delta: f64,
    pub kappa: f64,
    pub beta: f64,
    pub kappa_tilde: f64,
}

impl FullParams {
    pub fn new(epsilon: f64, delta: f64, kappa: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(invalid("epsilon", format!("must be positive, got {epsilon}")));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(invalid("delta", format!("must be positive, got {delta}")));
        }
        if !(kappa >= 0.0 && kappa.is_finite()) {
            return Err(invalid("kappa", format!("must be nonnegative, got {kappa}")));
        }
        let beta = epsilon / delta.sqrt();
        Ok(Self {
            epsilon,
            delta,
            kappa,
            beta,
            kappa_tilde: kappa * beta,
        })
    }

    pub fn with_kappa_tilde(epsilon: f64, delta: f64, kappa_tilde: f64) -> Result<Self> {
        let beta = epsilon / delta.sqrt();
        let mut p = Self::new(epsilon, delta, kappa_tilde / beta)?;
        p.kappa_tilde = kappa_tilde;
        Ok(p)
    }

    /// The reduced problem obtained by freezing `v ≡ 1`.
    pub fn reduced(&self) -> ReducedParams {
        ReducedParams {
            beta: self.beta,
            kappa: self.kappa,
            kappa_tilde: self.kappa_tilde,
        }
    }

    /// `ε²/δ`, small when the density layer is thinner than the phase layer.
    pub fn layer_ratio(&self) -> f64 {
        self.epsilon * self.epsilon / self.delta
    }

    /// `δ/ε`, small in the strongly segregated regime.
    pub fn segregation_ratio(&self) -> f64 {
        self.delta / self.epsilon
    }
}

/// Uniform grid on `[0, length]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    n: usize,
    length: f64,
    nodes: Vec<f64>,
}

impl Grid {
    pub const MIN_NODES: usize = 16;

    pub fn new(n: usize, length: f64) -> Result<Self> {
        if n < Self::MIN_NODES {
            return Err(invalid("n", format!("need at least {} nodes, got {n}", Self::MIN_NODES)));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(invalid("length", format!("must be positive, got {length}")));
        }
        let last = (n - 1) as f64;
        let mut nodes: Vec<f64> = (0..n).map(|i| length * (i as f64 / last)).collect();
        nodes[n - 1] = length;
        Ok(Self { n, length, nodes })
    }

    pub fn unit(n: usize) -> Result<Self> {
        Self::new(n, 1.0)
    }

    /// Smallest unit-interval grid with at least 64 nodes across a layer of width `beta`.
    pub fn resolving(beta: f64) -> Result<Self> {
        if !(beta > 0.0) {
            return Err(invalid("beta", "must be positive"));
        }
        let n = ((64.0 / beta).ceil() as usize + 1).max(Self::MIN_NODES);
        Self::unit(n)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn spacing(&self) -> f64 {
        self.length / (self.n - 1) as f64
    }

    /// Trapezoid weight of node `i`.
    pub fn weight(&self, i: usize) -> f64 {
        let h = self.spacing();
        if i == 0 || i + 1 == self.n {
            0.5 * h
        } else {
            h
        }
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.weight(i)).collect()
    }

    /// Trapezoid rule for samples on this grid.
    pub fn trapezoid(&self, samples: &[f64]) -> f64 {
        debug_assert_eq!(samples.len(), self.n);
        let inner: f64 = samples[1..self.n - 1].iter().sum();
        self.spacing() * (inner + 0.5 * (samples[0] + samples[self.n - 1]))
    }
}

/// Samples of a function on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    grid: Grid,
    values: Vec<f64>,
}

impl Profile {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(invalid(
                "values",
                format!("expected {} samples, got {}", grid.n(), values.len()),
            ));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().iter().map(|&x| f(x)).collect();
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn constant(grid: &Grid, c: f64) -> Self {
        Self::from_fn(grid, |_| c)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn last(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn same_grid(&self, other: &Profile) -> bool {
        self.grid == other.grid
    }

    fn cell(&self, x: f64) -> (usize, f64) {
        let h = self.grid.spacing();
        let n = self.grid.n();
        let s = (x / h).clamp(0.0, (n - 1) as f64);
        let i = (s.floor() as usize).min(n - 2);
        (i, s - i as f64)
    }

    /// Piecewise-linear interpolation, clamped to the domain.
    pub fn sample_linear(&self, x: f64) -> f64 {
        let (i, t) = self.cell(x);
        self.values[i] * (1.0 - t) + self.values[i + 1] * t
    }

    /// Four-point Lagrange interpolation, clamped to the domain.
    pub fn sample_cubic(&self, x: f64) -> f64 {
        let n = self.grid.n();
        let (i, t) = self.cell(x);
        let j = i.saturating_sub(1).min(n - 4);
        let s = t + (i - j) as f64;
        let y = &self.values[j..j + 4];
        let l0 = -(s - 1.0) * (s - 2.0) * (s - 3.0) / 6.0;
        let l1 = s * (s - 2.0) * (s - 3.0) / 2.0;
        let l2 = -s * (s - 1.0) * (s - 3.0) / 2.0;
        let l3 = s * (s - 1.0) * (s - 2.0) / 6.0;
        l0 * y[0] + l1 * y[1] + l2 * y[2] + l3 * y[3]
    }

    /// Resample onto another grid with cubic interpolation (clamped outside this domain).
    pub fn resample(&self, grid: &Grid) -> Self {
        Self::from_fn(grid, |x| self.sample_cubic(x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegimeTag {
    Subcritical,
    Threshold,
    NearThreshold,
    Supercritical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    pub tag: RegimeTag,
    /// `κ̃ < κ̃_crit`: the interior local minimum of the transition function is global on `[0, π]`.
    pub sub_flag: bool,
    pub threshold_tol: f64,
}

impl Regime {
    pub fn is_supercritical(&self) -> bool {
        matches!(self.tag, RegimeTag::Supercritical | RegimeTag::NearThreshold)
    }
}

fn kappa_crit() -> f64 {
    static CELL: OnceLock<f64> = OnceLock::new();
    *CELL.get_or_init(|| crate::oracle::critical_kappa(1e-15))
}

pub fn classify_regime(p: &ReducedParams, threshold_tol: f64) -> Regime {
    classify_regime_with_margin(p, threshold_tol, 0.0)
}

/// As [`classify_regime`], additionally tagging `0 < κ̃π − 1 ≤ near_margin` as near-threshold.
pub fn classify_regime_with_margin(p: &ReducedParams, threshold_tol: f64, near_margin: f64) -> Regime {
    let kt = p.kappa_tilde;
    let excess = kt - FRAC_1_PI;
    let tag = if excess.abs() <= threshold_tol {
        RegimeTag::Threshold
    } else if excess < 0.0 {
        RegimeTag::Subcritical
    } else if kt * PI - 1.0 <= near_margin {
        RegimeTag::NearThreshold
    } else {
        RegimeTag::Supercritical
    };
    Regime {
        tag,
        sub_flag: kt < kappa_crit(),
        threshold_tol,
    }
}

/// Two-component amplitudes `u1 = v cos(φ/2)`, `u2 = v sin(φ/2)`.
pub fn to_wavefunctions(v: &Profile, phi: &Profile) -> Result<(Profile, Profile)> {
    if !v.same_grid(phi) {
        return Err(Error::GridMismatch);
    }
    let (u1, u2) = v
        .values()
        .iter()
        .zip(phi.values())
        .map(|(&a, &t)| {
            let (s, c) = (0.5 * t).sin_cos();
            (a * c, a * s)
        })
        .unzip();
    Ok((
        Profile::new(v.grid().clone(), u1)?,
        Profile::new(v.grid().clone(), u2)?,
    ))
}
