//! Energy model of a mobile radio talking to servers at different network
//! distances, plus the measurement-cleaning steps used on real runs.
//!
//! - [`radio`]: four-state DRX machine and per-interval energy.
//! - [`workload`]: packet traces from request/response and download behaviours.
//! - [`engine`]: simulation, comparison and sweeps.
//! - [`hygiene`]: warm-up removal, slot-minimum filtering, uptime normalization.
//! - [`config`]: JSON run configuration.

pub mod config;
pub mod engine;
pub mod error;
pub mod hygiene;
pub mod radio;
pub mod workload;

pub use config::{LoadedConfig, OutputFormat, RunConfig};
pub use engine::{compare, simulate, simulate_trace, summary_csv, sweep, ComparisonTable, EnergyReport, Scenario, SweepParam};
pub use error::{Error, Result};
pub use hygiene::{
    analyze, discard_warmup, discharge_to_power, normalize_uptime, parse_sample_series, slot_min_mean,
    AnalysisReport, SampleSeries, SlotStat,
};
pub use radio::{
    build_state_timeline, energy_between, energy_of_interval, fsm_advance, AccountingMode, DutyCycle, FsmTimers,
    PowerProfile, RadioFsm, RadioState, StateInterval, StateTimeline,
};
pub use workload::{
    generate_trace, parse_packet_trace, slow_start_rounds, transfer_timeline, Direction, EventTrace, PacketEvent, PathModel, Pattern,
    Workload,
};
