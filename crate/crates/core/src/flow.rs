//! Increasing branch of the first integral, `φ' = √(sin²φ + ã²)/b`, `φ(0) = 0`.
//!
//! The slope `p` is carried alongside by integrating the second-order equation
//! `p' = sin φ cos φ / b²`, so `b²p² − sin²φ − ã²` is an honest consistency residual
//! rather than an identity.

/// Largest `h · rate` per classical RK4 substep.
const MAX_STEP_RATE: f64 = 0.004;
/// Below this `ln φ` the linearized solution `ã sinh(x/b)` is used instead of stepping.
const LINEAR_LN_CUTOFF: f64 = -30.0;

pub(crate) struct Flow {
    pub values: Vec<f64>,
    pub slope: Vec<f64>,
}

pub(crate) fn ln_sinh(z: f64) -> f64 {
    if z > 20.0 {
        z - std::f64::consts::LN_2 + (-(-2.0 * z).exp()).ln_1p()
    } else {
        z.sinh().ln()
    }
}

fn ln_cosh(z: f64) -> f64 {
    if z > 20.0 {
        z - std::f64::consts::LN_2 + (-2.0 * z).exp().ln_1p()
    } else {
        z.cosh().ln()
    }
}

#[inline]
fn rhs(phi: f64, at: f64, inv_b: f64) -> (f64, f64) {
    let (s, c) = phi.sin_cos();
    (s.hypot(at) * inv_b, s * c * inv_b * inv_b)
}

/// Integrate on uniform `nodes` starting at `nodes[0] = 0`.
pub(crate) fn integrate_flow(ln_at: f64, b: f64, nodes: &[f64]) -> Flow {
    integrate_flow_with(ln_at, b, nodes, MAX_STEP_RATE)
}

/// As [`integrate_flow`] with substeps capped at `h · rate ≤ max_step_rate`.
pub(crate) fn integrate_flow_with(ln_at: f64, b: f64, nodes: &[f64], max_step_rate: f64) -> Flow {
    let n = nodes.len();
    let at = ln_at.exp();
    let inv_b = 1.0 / b;
    let mut values = vec![0.0; n];
    let mut slope = vec![0.0; n];
    slope[0] = at * inv_b;

    let mut start = 0;
    if ln_at < LINEAR_LN_CUTOFF {
        for i in 1..n {
            let z = nodes[i] * inv_b;
            let ln_phi = ln_at + ln_sinh(z);
            if ln_phi >= LINEAR_LN_CUTOFF {
                break;
            }
            values[i] = ln_phi.exp();
            slope[i] = (ln_at + ln_cosh(z)).exp() * inv_b;
            start = i;
        }
    }

    let h = if n > 1 { nodes[1] - nodes[0] } else { 0.0 };
    let rate = at.hypot(1.0) * inv_b;
    let m = ((h * rate / max_step_rate).ceil() as usize).max(1);
    let dt = h / m as f64;
    let (mut phi, mut p) = (values[start], slope[start]);
    for i in start + 1..n {
        for _ in 0..m {
            let (k1, l1) = rhs(phi, at, inv_b);
            let (k2, l2) = rhs(phi + 0.5 * dt * k1, at, inv_b);
            let (k3, l3) = rhs(phi + 0.5 * dt * k2, at, inv_b);
            let (k4, l4) = rhs(phi + dt * k3, at, inv_b);
            phi += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            p += dt / 6.0 * (l1 + 2.0 * l2 + 2.0 * l3 + l4);
        }
        values[i] = phi;
        slope[i] = p;
    }
    Flow { values, slope }
}

/// `max |b²p² − sin²φ − ã²|` over the nodes.
pub(crate) fn first_integral_residual(flow: &Flow, ln_at: f64, b: f64) -> f64 {
    let at = ln_at.exp();
    flow.values
        .iter()
        .zip(&flow.slope)
        .map(|(&phi, &p)| {
            let bp = b * p;
            let s = phi.sin();
            ((bp - s.hypot(at)) * (bp + s.hypot(at))).abs()
        })
        .fold(0.0, f64::max)
}
