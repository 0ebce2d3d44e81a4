//! Log–log least-squares rate fits.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Errors below this are treated as exact and left out of the fit.
pub const ZERO_ERROR: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    /// `(parameter, error)` pairs as given, including dropped ones.
    pub pairs: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// Pairs excluded because their error was below the floor.
    pub dropped: usize,
}

pub fn fit_rate(pairs: &[(f64, f64)]) -> Result<RateFit> {
    fit_rate_with_floor(pairs, ZERO_ERROR)
}

/// As [`fit_rate`] with a custom exclusion floor, for errors known to be resolved below
/// round-off (a floor of 0 only drops exact zeros).
pub fn fit_rate_with_floor(pairs: &[(f64, f64)], floor: f64) -> Result<RateFit> {
    if let Some(&(x, _)) = pairs.iter().find(|(x, _)| !(*x > 0.0 && x.is_finite())) {
        return Err(invalid("pairs", format!("parameters must be positive, got {x}")));
    }
    let usable: Vec<(f64, f64)> = pairs
        .iter()
        .filter(|(_, e)| e.is_finite() && e.abs() >= floor && *e != 0.0)
        .map(|&(x, e)| (x.ln(), e.abs().ln()))
        .collect();
    if usable.len() < 3 {
        return Err(invalid(
            "pairs",
            format!("need at least 3 errors above {floor}, got {}", usable.len()),
        ));
    }
    let m = usable.len() as f64;
    let mx = usable.iter().map(|p| p.0).sum::<f64>() / m;
    let my = usable.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = usable.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = usable.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = usable.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(invalid("pairs", "parameters must not all coincide"));
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).min(1.0) };
    Ok(RateFit {
        pairs: pairs.to_vec(),
        slope,
        intercept: my - slope * mx,
        r2,
        dropped: pairs.len() - usable.len(),
    })
}
