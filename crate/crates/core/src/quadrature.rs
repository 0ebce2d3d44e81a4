//! The three elliptic-type kernels on `[0, upper] ⊂ [0, π/2]`:
//!
//! * `I(α, u) = ∫ √(α² + sin²y) dy`
//! * `J(α, u) = ∫ dy / √(α² + sin²y)`
//! * `S(α, u) = ∫ sin²y / √(α² + sin²y) dy`
//!
//! Integration is adaptive Gauss–Kronrod (7/15) over panels that are graded geometrically
//! toward `y = 0`, where the integrands have a layer of width α. For `J` the logarithmic
//! part `∫ dy/√(α² + y²) = asinh(u/α)` is subtracted analytically, so the slope can be
//! passed as `ln α` and stays usable far below the smallest positive `f64`.

use std::f64::consts::FRAC_PI_2;

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSettings {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_subdivisions: 500,
        }
    }
}

impl QuadratureSettings {
    /// Tolerances used where an integral feeds a root that must be accurate to ~1e-12.
    pub fn precise() -> Self {
        Self {
            abs_tol: 1e-15,
            rel_tol: 1e-13,
            max_subdivisions: 2000,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(invalid("tolerance", "tolerances must be positive"));
        }
        if self.max_subdivisions < 8 {
            return Err(invalid("max_subdivisions", "must be at least 8"));
        }
        Ok(())
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights for the odd-indexed Kronrod nodes 1, 3, 5 and the center.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

/// Adaptive integration over `[pts[0], pts[last]]` with `pts` as initial breakpoints.
fn adaptive(f: impl Fn(f64) -> f64, pts: &[f64], s: &QuadratureSettings) -> Result<f64> {
    let mut panels: Vec<Panel> = pts
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let (value, error) = kronrod15(&f, w[0], w[1]);
            Panel {
                a: w[0],
                b: w[1],
                value,
                error,
            }
        })
        .collect();
    let mut subdivisions = panels.len();
    loop {
        let total: f64 = panels.iter().map(|p| p.value).sum();
        let err: f64 = panels.iter().map(|p| p.error).sum();
        if err <= s.abs_tol.max(s.rel_tol * total.abs()) {
            return Ok(total);
        }
        if subdivisions >= s.max_subdivisions {
            return Err(Error::Quadrature {
                subdivisions,
                error_estimate: err,
            });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .expect("at least one panel");
        let Panel { a, b, .. } = panels.swap_remove(worst);
        let m = 0.5 * (a + b);
        for (lo, hi) in [(a, m), (m, b)] {
            let (value, error) = kronrod15(&f, lo, hi);
            panels.push(Panel {
                a: lo,
                b: hi,
                value,
                error,
            });
        }
        subdivisions += 1;
    }
}

/// Breakpoints `0 < … < upper` shrinking by 4× until the layer scale is resolved.
fn graded(upper: f64, alpha: f64) -> Vec<f64> {
    let floor = alpha.max(1e-9) * 0.25;
    let mut pts = vec![upper];
    let mut x = upper;
    while x > floor {
        x *= 0.25;
        pts.push(x);
    }
    pts.push(0.0);
    pts.reverse();
    pts
}

fn check_upper(upper: f64) -> Result<()> {
    if !(0.0..=FRAC_PI_2 * (1.0 + 4.0 * f64::EPSILON)).contains(&upper) {
        return Err(invalid("upper", format!("must lie in [0, π/2], got {upper}")));
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(invalid("alpha", format!("must be nonnegative and finite, got {alpha}")));
    }
    Ok(())
}

/// `y − sin y` without cancellation for small `y`.
fn y_minus_sin(y: f64) -> f64 {
    if y.abs() < 0.25 {
        let y2 = y * y;
        y * y2 / 6.0 * (1.0 - y2 / 20.0 * (1.0 - y2 / 42.0 * (1.0 - y2 / 72.0 * (1.0 - y2 / 110.0))))
    } else {
        y - y.sin()
    }
}

pub fn integral_i(alpha: f64, upper: f64, s: &QuadratureSettings) -> Result<f64> {
    check_alpha(alpha)?;
    check_upper(upper)?;
    s.validate()?;
    if upper == 0.0 {
        return Ok(0.0);
    }
    adaptive(|y| y.sin().hypot(alpha), &graded(upper, alpha), s)
}

pub fn integral_s(alpha: f64, upper: f64, s: &QuadratureSettings) -> Result<f64> {
    check_alpha(alpha)?;
    check_upper(upper)?;
    s.validate()?;
    if upper == 0.0 {
        return Ok(0.0);
    }
    adaptive(
        |y| {
            let sy = y.sin();
            let r = sy.hypot(alpha);
            if r == 0.0 {
                0.0
            } else {
                sy * (sy / r)
            }
        },
        &graded(upper, alpha),
        s,
    )
}

pub fn integral_j(alpha: f64, upper: f64, s: &QuadratureSettings) -> Result<f64> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(invalid("alpha", format!("J needs a positive slope, got {alpha}")));
    }
    integral_j_ln(alpha.ln(), upper, s)
}

/// `J(e^ln_alpha, upper)`; meaningful for any finite `ln_alpha`, including ones whose
/// exponential underflows.
pub fn integral_j_ln(ln_alpha: f64, upper: f64, s: &QuadratureSettings) -> Result<f64> {
    if !ln_alpha.is_finite() {
        return Err(invalid("alpha", format!("log-slope must be finite, got {ln_alpha}")));
    }
    check_upper(upper)?;
    s.validate()?;
    if upper == 0.0 {
        return Ok(0.0);
    }
    let alpha = ln_alpha.exp();
    let log_part = if upper.ln() - ln_alpha > 300.0 {
        (2.0 * upper).ln() - ln_alpha
    } else {
        (upper / alpha).asinh()
    };
    let regular = adaptive(
        |y| {
            // The integrand is below y/6 everywhere; skipping [0, 1e-30] avoids 0/0 underflow.
            if y < 1e-30 {
                return 0.0;
            }
            let sy = y.sin();
            let d = y_minus_sin(y) * (y + sy);
            let h1 = sy.hypot(alpha);
            let h2 = y.hypot(alpha);
            d / (h1 * h2 * (h1 + h2))
        },
        &graded(upper, alpha),
        s,
    )?;
    Ok(log_part + regular)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const H: f64 = FRAC_PI_2;

    /// Composite 10-point Gauss–Legendre on a geometrically refined mesh; independent of the
    /// adaptive code path and of the singularity subtraction.
    fn brute(f: impl Fn(f64) -> f64, upper: f64, scale: f64) -> f64 {
        const X: [f64; 5] = [
            0.148_874_338_981_631_2,
            0.433_395_394_129_247_2,
            0.679_409_568_299_024_4,
            0.865_063_366_688_984_5,
            0.973_906_528_517_171_7,
        ];
        const W: [f64; 5] = [
            0.295_524_224_714_752_9,
            0.269_266_719_309_996_4,
            0.219_086_362_515_982_1,
            0.149_451_349_150_580_6,
            0.066_671_344_308_688_1,
        ];
        let mut edges = vec![0.0];
        let mut x = scale * 1e-6;
        while x < upper {
            edges.push(x);
            x *= 1.05;
        }
        edges.push(upper);
        let mut sum = 0.0;
        for w in edges.windows(2) {
            let c = 0.5 * (w[0] + w[1]);
            let h = 0.5 * (w[1] - w[0]);
            for k in 0..5 {
                sum += h * W[k] * (f(c - h * X[k]) + f(c + h * X[k]));
            }
        }
        sum
    }

    fn d() -> QuadratureSettings {
        QuadratureSettings::default()
    }

    #[test]
    fn trivial_values() {
        assert!((integral_i(0.0, H, &d()).unwrap() - 1.0).abs() < 1e-12);
        assert!((integral_s(0.0, H, &d()).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(integral_i(0.7, 0.0, &d()).unwrap(), 0.0);
        assert_eq!(integral_s(0.7, 0.0, &d()).unwrap(), 0.0);
    }

    #[test]
    fn unit_slope_matches_brute_force() {
        let i_ref = brute(|y| (1.0 + y.sin().powi(2)).sqrt(), H, 1.0);
        let j_ref = brute(|y| 1.0 / (1.0 + y.sin().powi(2)).sqrt(), H, 1.0);
        // Frozen from the brute-force rule above.
        assert!((i_ref - 1.910_098_894_513_856).abs() < 1e-13);
        assert!((j_ref - 1.311_028_777_146_06).abs() < 1e-13);
        assert!((integral_i(1.0, H, &d()).unwrap() - i_ref).abs() < 1e-11);
        assert!((integral_j(1.0, H, &d()).unwrap() - j_ref).abs() < 1e-11);
    }

    #[test]
    fn small_slope_j_matches_brute_force() {
        for &a in &[1e-2, 1e-4, 1e-7] {
            let r = brute(|y| 1.0 / (a * a + y.sin().powi(2)).sqrt(), H, a);
            let j = integral_j(a, H, &QuadratureSettings::precise()).unwrap();
            assert!((j - r).abs() < 1e-10 * r, "alpha = {a}: {j} vs {r}");
        }
    }

    #[test]
    fn partial_upper_matches_brute_force() {
        let a = 3e-3;
        for &u in &[0.01, 0.4, 1.2] {
            let r = brute(|y| 1.0 / (a * a + y.sin().powi(2)).sqrt(), u, a);
            assert!((integral_j(a, u, &d()).unwrap() - r).abs() < 1e-10 * r);
            let r = brute(|y| (a * a + y.sin().powi(2)).sqrt(), u, a);
            assert!((integral_i(a, u, &d()).unwrap() - r).abs() < 1e-11);
        }
    }

    #[test]
    fn j_lower_bound_and_log_growth() {
        for &a in &[0.1, 1.0, 5.0] {
            assert!(integral_j(a, H, &d()).unwrap() >= H / (a * a + 1.0).sqrt());
        }
        for &a in &[1e-3, 1e-4, 1e-5] {
            let ratio = integral_j(a, H, &d()).unwrap() / (1.0 / a).ln();
            assert!((0.9..=1.4).contains(&ratio), "alpha = {a}: {ratio}");
        }
    }

    #[test]
    fn log_slope_below_underflow() {
        // J ≈ ln(4/α) for vanishing α.
        let ln_a = -2000.0;
        let j = integral_j_ln(ln_a, H, &d()).unwrap();
        assert!((j - (4f64.ln() - ln_a)).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(integral_j(0.0, H, &d()).is_err());
        assert!(integral_j(-1.0, H, &d()).is_err());
        assert!(integral_i(1.0, 2.0, &d()).is_err());
        assert!(integral_i(-1.0, 1.0, &d()).is_err());
        let bad = QuadratureSettings {
            max_subdivisions: 4,
            ..d()
        };
        assert!(integral_i(1.0, 1.0, &bad).is_err());
    }

    #[test]
    fn reports_tolerance_failure() {
        let strict = QuadratureSettings {
            abs_tol: 1e-300,
            rel_tol: 1e-300,
            max_subdivisions: 20,
        };
        assert!(matches!(
            integral_i(1e-3, H, &strict),
            Err(Error::Quadrature { .. })
        ));
    }

    #[test]
    fn s_identity_at_point_seven() {
        let a = 0.7;
        let i = integral_i(a, H, &d()).unwrap();
        let j = integral_j(a, H, &d()).unwrap();
        let s = integral_s(a, H, &d()).unwrap();
        assert!((s - (i - a * a * j)).abs() <= 10.0 * 1e-10 * i);
    }

    #[test]
    fn large_slope_asymptote() {
        let i = integral_i(100.0, H, &d()).unwrap();
        assert!((i / 100.0 - H).abs() < 1e-3);
    }

    #[test]
    fn small_slope_expansion_of_i() {
        let ratio = |a: f64| (integral_i(a, H, &QuadratureSettings::precise()).unwrap() - 1.0) / (0.5 * a * a * (1.0 / a).ln());
        let r4 = ratio(1e-4);
        assert!((0.8..=1.3).contains(&r4), "{r4}");
        assert!((ratio(1e-5) - 1.0).abs() < (r4 - 1.0).abs());
    }

    proptest! {
        #[test]
        fn monotone_in_slope(a in 1e-6f64..20.0, f in 1.01f64..3.0) {
            let b = a * f;
            prop_assert!(integral_i(a, H, &d()).unwrap() < integral_i(b, H, &d()).unwrap());
            prop_assert!(integral_j(a, H, &d()).unwrap() > integral_j(b, H, &d()).unwrap());
        }

        #[test]
        fn monotone_in_upper(a in 1e-6f64..20.0, u in 0.01f64..1.5) {
            let v = (u * 1.05).min(H);
            prop_assert!(integral_i(a, u, &d()).unwrap() < integral_i(a, v, &d()).unwrap());
            prop_assert!(integral_j(a, u, &d()).unwrap() < integral_j(a, v, &d()).unwrap());
        }

        #[test]
        fn decomposition_identity(a in 1e-4f64..10.0, u in 0.05f64..H) {
            let i = integral_i(a, u, &d()).unwrap();
            let j = integral_j(a, u, &d()).unwrap();
            let s = integral_s(a, u, &d()).unwrap();
            prop_assert!((s - (i - a * a * j)).abs() <= 1e-9 * (1.0 + i + a * a * j));
        }
    }
}
