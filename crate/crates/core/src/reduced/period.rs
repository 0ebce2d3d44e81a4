//! Period, stripe count and symmetry diagnostics of supercritical profiles.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::roots::{find_root, RootOptions};
use crate::types::Profile;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodInfo {
    /// First `x` with `φ(x) = π`.
    pub t: f64,
    /// `floor(1/T)`.
    pub n: u64,
    /// `sup |φ(x + T) − π − φ(x)|` over nodes in `[0, 1 − T]`.
    pub periodicity_residual: f64,
    /// `sup |φ(x) + φ(T − x) − π|` over nodes in `[0, T]`.
    pub symmetry_residual: f64,
}

/// `None` when the profile never reaches `π`.
///
/// Shifted samples are read by four-point interpolation: linear interpolation alone would
/// cap the residuals at `O(h²φ'')`, well above what an exact flow attains.
pub fn measure_period(profile: &Profile) -> Option<PeriodInfo> {
    let v = profile.values();
    let nodes = profile.grid().nodes();
    // First crossing; later ones within a spacing can only be discretization noise.
    let i = v.windows(2).position(|w| w[0] < PI && w[1] >= PI)?;
    let (lo, hi) = (nodes[i], nodes[i + 1]);
    let t = if v[i + 1] == PI {
        hi
    } else {
        find_root(|x| profile.sample_cubic(x) - PI, lo, hi, RootOptions::default())
            .unwrap_or_else(|_| lo + (hi - lo) * (PI - v[i]) / (v[i + 1] - v[i]))
    };
    if !(t > 0.0 && t < 1.0) {
        return None;
    }
    let end = profile.grid().length();
    let mut periodicity_residual: f64 = 0.0;
    let mut symmetry_residual: f64 = 0.0;
    for (&x, &phi) in nodes.iter().zip(v) {
        if x + t <= end {
            periodicity_residual = periodicity_residual.max((profile.sample_cubic(x + t) - PI - phi).abs());
        }
        if x <= t {
            symmetry_residual = symmetry_residual.max((phi + profile.sample_cubic(t - x) - PI).abs());
        }
    }
    Some(PeriodInfo {
        t,
        n: (1.0 / t).floor() as u64,
        periodicity_residual,
        symmetry_residual,
    })
}
