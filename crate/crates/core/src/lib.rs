//! Minimizers of a two-component condensate energy with spin-orbit drive in one dimension.
//!
//! The full problem couples a density amplitude `v` (unit mass) to a phase-like angle `φ`;
//! in the Thomas–Fermi limit `v → 1` it collapses onto the reduced energy
//! `F(φ) = ⅛∫(φ'² + sin²φ/β²) − (κ/2)φ(1)` with `φ(0) = 0`. The [`oracle`] gives the
//! asymptotic predictions, [`reduced`] and [`full`] compute minimizers on a grid.

pub mod energy;
pub mod error;
pub(crate) mod flow;
pub mod full;
pub mod oracle;
pub mod quadrature;
pub mod rates;
pub mod reduced;
pub mod roots;
pub mod types;

pub use energy::{energy_full, energy_reduced, EnergyBreakdown};
pub use error::{Error, Result};
pub use types::{
    classify_regime, classify_regime_with_margin, to_wavefunctions, FullParams, Grid, Profile, ReducedParams, Regime,
    RegimeTag, THRESHOLD_TOL,
};
