//! Minimizers of the reduced phase energy `F_{β,κ}`.

pub mod certificate;
pub mod direct;
pub mod period;
pub mod shooting;

pub use certificate::{build_layer, build_staircase, build_test_profile, TestProfile};
pub use direct::{direct_minimize_reduced, DirectOptions, DirectOutcome};
pub use period::{measure_period, PeriodInfo};
pub use shooting::{
    energy_of_log_slope, energy_of_slope, flight_angle, flight_angle_ln, integrate_profile, integrate_profile_ln,
    solve_reduced, ShootingOptions, ShootingResult, ShootingSummary,
};
