//! Explicit competitors whose energy bounds the reduced minimum from above.

use std::f64::consts::PI;

use crate::energy::energy_reduced;
use crate::oracle::predicted_energy;
use crate::types::{Grid, Profile, ReducedParams, Regime, RegimeTag};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct TestProfile {
    pub profile: Profile,
    /// Continuum energy, when the construction has a closed form.
    pub exact_energy: Option<f64>,
    /// Trapezoid energy of the sampled profile.
    pub discrete_energy: f64,
}

/// Subcritical ramp-plus-heteroclinic, or a staircase of transitions otherwise.
///
/// The threshold case reuses the subcritical construction, since `2κ̃ = 2/π < 1` there.
pub fn build_test_profile(regime: Regime, p: &ReducedParams, grid: &Grid) -> Result<TestProfile> {
    if p.is_undriven() {
        let profile = Profile::constant(grid, 0.0);
        return Ok(TestProfile {
            profile,
            exact_energy: Some(0.0),
            discrete_energy: 0.0,
        });
    }
    match regime.tag {
        RegimeTag::Subcritical | RegimeTag::Threshold if 2.0 * p.kappa_tilde <= 1.0 => {
            Ok(build_layer(p, grid, p.beta * p.beta))
        }
        _ => {
            let t = predicted_energy(p)?.period_t;
            let m = t.map_or(1, |t| ((1.0 / t).floor() as usize).max(1));
            Ok(build_staircase(p, grid, m))
        }
    }
}

/// Linear ramp of height `η` on `[0, γ]`, then `2 arctan(e^{(x−1)/β} tan(θ/2))` with `θ = arcsin 2κ̃`.
pub fn build_layer(p: &ReducedParams, grid: &Grid, gamma: f64) -> TestProfile {
    let b = p.beta;
    let theta = (2.0 * p.kappa_tilde).min(1.0).asin();
    let tan_half = (0.5 * theta).tan();
    let layer = |x: f64| 2.0 * (((x - 1.0) / b).exp() * tan_half).atan();
    let eta = layer(gamma);
    let profile = Profile::from_fn(grid, |x| if x < gamma { eta * x / gamma } else { layer(x) });

    // Ramp: ⅛∫(η/γ)² + ⅛β⁻²∫sin²(ηx/γ). Heteroclinic: φ' = sin φ/β, so the density is 2φ' sin φ/β.
    let ramp_sin2 = if eta > 1e-4 {
        gamma * (2.0 * eta - (2.0 * eta).sin()) / (4.0 * eta)
    } else {
        gamma * eta * eta / 3.0
    };
    let exact = eta * eta / (8.0 * gamma) + ramp_sin2 / (8.0 * b * b) + (eta.cos() - theta.cos()) / (4.0 * b)
        - p.kappa_tilde * theta / (2.0 * b);
    let discrete_energy = energy_reduced(&profile, p).total;
    TestProfile {
        profile,
        exact_energy: Some(exact),
        discrete_energy,
    }
}

/// `Σ_j 2 arctan(e^{(x − t_j)/β})` with `t_j = (j − ½)/m`, shifted so `φ(0) = 0`.
pub fn build_staircase(p: &ReducedParams, grid: &Grid, transitions: usize) -> TestProfile {
    let b = p.beta;
    let m = transitions.max(1);
    let raw = |x: f64| {
        (1..=m)
            .map(|j| {
                let t = (j as f64 - 0.5) / m as f64;
                2.0 * ((x - t) / b).exp().atan()
            })
            .sum::<f64>()
    };
    let shift = raw(0.0);
    let profile = Profile::from_fn(grid, |x| raw(x) - shift);
    debug_assert!(profile.last() <= m as f64 * PI);
    let discrete_energy = energy_reduced(&profile, p).total;
    TestProfile {
        profile,
        exact_energy: None,
        discrete_energy,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{classify_regime, THRESHOLD_TOL};

    #[test]
    fn layer_energy_closed_form_matches_discrete() {
        let p = ReducedParams::with_kappa_tilde(0.05, 0.25).unwrap();
        // A not-so-thin ramp exercises every term of the closed form.
        let g = Grid::unit(200_001).unwrap();
        let tp = build_layer(&p, &g, 0.3);
        let exact = tp.exact_energy.unwrap();
        assert!((tp.discrete_energy - exact).abs() < 1e-6 * exact.abs(), "{} vs {exact}", tp.discrete_energy);
    }

    #[test]
    fn undriven_is_zero() {
        let p = ReducedParams::new(0.05, 0.0).unwrap();
        let g = Grid::resolving(0.05).unwrap();
        let tp = build_test_profile(classify_regime(&p, THRESHOLD_TOL), &p, &g).unwrap();
        assert_eq!(tp.discrete_energy, 0.0);
        assert!(tp.profile.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn staircase_starts_at_zero_and_winds() {
        let p = ReducedParams::with_kappa_tilde(0.02, 0.5).unwrap();
        let g = Grid::resolving(0.02).unwrap();
        let tp = build_staircase(&p, &g, 5);
        assert_eq!(tp.profile.values()[0], 0.0);
        assert!((tp.profile.last() - 5.0 * PI).abs() < 6.0 * (-0.1f64 / 0.02).exp());
        assert!(tp.profile.values().windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn many_transitions_beat_one() {
        let b = 0.02;
        let p = ReducedParams::with_kappa_tilde(b, 0.5).unwrap();
        let g = Grid::resolving(b).unwrap();
        let one = build_staircase(&p, &g, 1).discrete_energy;
        let many = build_test_profile(classify_regime(&p, THRESHOLD_TOL), &p, &g).unwrap().discrete_energy;
        let a0 = crate::oracle::alpha0(0.5, 1e-12).unwrap();
        assert!(one * b > -a0 * a0 / (8.0 * b));
        assert!(many < one);
    }
}
