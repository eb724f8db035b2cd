//! Toolkit for finite birth-death chains: the classical stationary
//! distribution, a one-parameter family of deformed stationary solutions
//! reached through the discrete Riccati substitution, the renormalized
//! (effective) rate schedules under which the deformed solutions satisfy
//! detailed balance, and independent cross-checks via generator null
//! spaces, time evolution, and exact stochastic simulation.
//!
//! The `bdchain` binary exposes the same machinery over JSON run
//! configurations: `solve`, `verify`, `simulate`, and the `figure1` ..
//! `figure5` parameter presets.

pub mod commands;
pub mod config;
pub mod dynamics;
mod error;
pub mod output;
pub mod riccati;
pub mod schedule;
pub mod sim;
pub mod stationary;
pub mod tolerances;

pub use config::{figure_preset, FigureId, OutputFormat, RunConfig};
pub use dynamics::{probability_current, Generator};
pub use error::{Error, Result};
pub use riccati::{particular_value, DParam, RiccatiSequence, RiccatiWeights};
pub use schedule::{PositivityReport, RateSchedule, ScheduleConfig};
pub use sim::{gillespie_run, total_variation, Trajectory};
pub use stationary::{
    asymmetric_closed_form, classical_stationary, constant_closed_form, effective_schedule,
    parametric_stationary, renormalization_factor, renormalization_factors, Distribution,
    Provenance,
};

#[cfg(test)]
mod tests {
    // every computation type is immutable after construction and safe to
    // share across threads
    #[test]
    fn core_types_are_send_and_sync() {
        fn check<T: Send + Sync>() {}
        check::<crate::RateSchedule>();
        check::<crate::RiccatiWeights>();
        check::<crate::RiccatiSequence>();
        check::<crate::Distribution>();
        check::<crate::Generator>();
        check::<crate::Trajectory>();
        check::<crate::RunConfig>();
    }
}
