//! Experiment harness around `fpec-core`: configuration files, seeded
//! sweeps, the mischaracterization study, and file emission.

pub mod config;
pub mod emit;
pub mod error;
pub mod run;

pub use config::{ChannelConfig, ConfigFile, Experiment, LatticeConfig, SweepRange, ZneConfig};
pub use emit::{
    gamma_to_csv, parse_sweep_json, render_sweep, sweep_to_csv, sweep_to_json, to_pretty_json,
    write_output, Format,
};
pub use error::CliError;
pub use run::{
    estimate_point, exact_noiseless_value, gamma_profile, mischaracterization_study, run_sweep,
    PointOutput, SweepResult, SweepRow,
};
