//! Run configuration: one JSON document, overridden field by field from the command line.
//!
//! | field | default |
//! |---|---|
//! | `beta` | 0.02 |
//! | `kappa`, `kappa_tilde` | `kappa_tilde = 0.5` when neither is given; at most one may be set |
//! | `epsilon` | 0.01 |
//! | `delta` | `epsilon^delta_exponent` |
//! | `delta_exponent` | 1.2 |
//! | `grid` | solver default (64 nodes per β for reduced, 64 per β and 32 per ε for full) |
//! | `out` | `out` |
//! | `tolerances.tol_bc` | 1e-6 |
//! | `tolerances.tol_first_integral` | 1e-8 |
//! | `tolerances.threshold_tol` | 1e-9 |
//! | `tolerances.stop_tol` | 1e-13 |
//! | `tolerances.tol_el` | 1e-6 |
//! | `sweep` | `{parameter: beta, start: 0.1, factor: 0.5, count: 4, error: phi_end}` |
//! | `phase_diagram` | `kappa_tilde` 0.1 to 1.0 step 0.05, `betas` [0.04, 0.02, 0.01] |

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Reduced,
    Full,
    Sweep,
    Oracle,
    PhaseDiagram,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Reduced => "reduced",
            Mode::Full => "full",
            Mode::Sweep => "sweep",
            Mode::Oracle => "oracle",
            Mode::PhaseDiagram => "phase-diagram",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub tol_bc: f64,
    pub tol_first_integral: f64,
    pub threshold_tol: f64,
    pub stop_tol: f64,
    pub tol_el: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tol_bc: 1e-6,
            tol_first_integral: 1e-8,
            threshold_tol: 1e-9,
            stop_tol: 1e-13,
            tol_el: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    /// Reduced solves along `β`.
    Beta,
    /// Full solves along `ε` with `δ = ε^delta_exponent`.
    Epsilon,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepError {
    /// `|φ(1) − predicted φ(1)|` (reduced).
    PhiEnd,
    /// `|F/F_leading − 1|` (reduced) or `|G/F_min − 1|` (full).
    Energy,
    /// First-integral residual of the shooting profile (reduced).
    FirstIntegral,
    /// `‖v − 1‖∞` (full).
    VDeviation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub start: f64,
    pub factor: f64,
    pub count: usize,
    pub error: SweepError,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            parameter: SweepParameter::Beta,
            start: 0.1,
            factor: 0.5,
            count: 4,
            error: SweepError::PhiEnd,
        }
    }
}

impl SweepSpec {
    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|k| self.start * self.factor.powi(k as i32)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Range {
    /// Inclusive of `stop` up to a tenth of a step.
    pub fn values(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 0.1).floor() as usize + 1;
        (0..count).map(|k| self.start + k as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhaseDiagramSpec {
    pub kappa_tilde: Range,
    pub betas: Vec<f64>,
}

impl Default for PhaseDiagramSpec {
    fn default() -> Self {
        Self {
            kappa_tilde: Range {
                start: 0.1,
                stop: 1.0,
                step: 0.05,
            },
            betas: vec![0.04, 0.02, 0.01],
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Optional; must agree with the subcommand when given.
    pub mode: Option<Mode>,
    pub beta: Option<f64>,
    pub kappa: Option<f64>,
    pub kappa_tilde: Option<f64>,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub delta_exponent: Option<f64>,
    pub grid: Option<usize>,
    pub out: Option<PathBuf>,
    pub tolerances: Tolerances,
    pub sweep: SweepSpec,
    pub phase_diagram: PhaseDiagramSpec,
}

/// Drive strength as given: either `κ` or `κ̃ = κβ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Drive {
    Kappa(f64),
    KappaTilde(f64),
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("config: cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("config: {e}")))
    }

    pub fn beta(&self) -> f64 {
        self.beta.unwrap_or(0.02)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon.unwrap_or(0.01)
    }

    pub fn delta(&self) -> f64 {
        self.delta.unwrap_or_else(|| self.epsilon().powf(self.delta_exponent()))
    }

    pub fn delta_exponent(&self) -> f64 {
        self.delta_exponent.unwrap_or(1.2)
    }

    pub fn drive(&self) -> Drive {
        match (self.kappa, self.kappa_tilde) {
            (Some(k), _) => Drive::Kappa(k),
            (None, Some(kt)) => Drive::KappaTilde(kt),
            (None, None) => Drive::KappaTilde(0.5),
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    /// Field-level checks; the message names the offending field.
    pub fn validate(&self, mode: Mode) -> Result<(), CliError> {
        let bad = |field: &str, why: String| Err(CliError::Config(format!("{field}: {why}")));
        if let Some(m) = self.mode {
            if m != mode {
                return bad("mode", format!("config says {} but the subcommand is {}", m.name(), mode.name()));
            }
        }
        if self.kappa.is_some() && self.kappa_tilde.is_some() {
            return bad("kappa", "give either kappa or kappa_tilde, not both".into());
        }
        let positive = |field: &str, v: Option<f64>| match v {
            Some(x) if !(x > 0.0 && x.is_finite()) => bad(field, format!("must be positive, got {x}")),
            _ => Ok(()),
        };
        positive("beta", self.beta)?;
        positive("epsilon", self.epsilon)?;
        positive("delta", self.delta)?;
        positive("delta_exponent", self.delta_exponent)?;
        for (field, v) in [("kappa", self.kappa), ("kappa_tilde", self.kappa_tilde)] {
            if let Some(x) = v {
                if !(x >= 0.0 && x.is_finite()) {
                    return bad(field, format!("must be nonnegative, got {x}"));
                }
            }
        }
        if let Some(n) = self.grid {
            if n < 16 {
                return bad("grid", format!("need at least 16 nodes, got {n}"));
            }
        }
        let t = &self.tolerances;
        for (field, v) in [
            ("tolerances.tol_bc", t.tol_bc),
            ("tolerances.tol_first_integral", t.tol_first_integral),
            ("tolerances.threshold_tol", t.threshold_tol),
            ("tolerances.stop_tol", t.stop_tol),
            ("tolerances.tol_el", t.tol_el),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(field, format!("must be positive, got {v}"));
            }
        }
        match mode {
            Mode::Sweep => {
                let s = &self.sweep;
                if !(s.start > 0.0 && s.start.is_finite()) {
                    return bad("sweep.start", format!("must be positive, got {}", s.start));
                }
                if !(s.factor > 0.0 && s.factor < 1.0) {
                    return bad("sweep.factor", format!("must lie in (0, 1), got {}", s.factor));
                }
                if s.count < 3 {
                    return bad("sweep.count", format!("a rate fit needs at least 3 entries, got {}", s.count));
                }
                let valid = matches!(
                    (s.parameter, s.error),
                    (SweepParameter::Beta, SweepError::PhiEnd | SweepError::Energy | SweepError::FirstIntegral)
                        | (SweepParameter::Epsilon, SweepError::Energy | SweepError::VDeviation)
                );
                if !valid {
                    return bad("sweep.error", format!("{:?} is not measured along {:?}", s.error, s.parameter));
                }
            }
            Mode::PhaseDiagram => {
                let r = &self.phase_diagram.kappa_tilde;
                if !(r.step > 0.0 && r.start >= 0.0 && r.stop >= r.start) {
                    return bad("phase_diagram.kappa_tilde", "need 0 ≤ start ≤ stop and step > 0".into());
                }
                if self.phase_diagram.betas.is_empty() || self.phase_diagram.betas.iter().any(|&b| !(b > 0.0)) {
                    return bad("phase_diagram.betas", "need at least one positive β".into());
                }
            }
            _ => {}
        }
        Ok(())
    }
}
