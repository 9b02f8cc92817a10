//! Scenario simulation, comparison and parameter sweeps.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radio::{build_state_timeline, energy_of_interval, AccountingMode, PowerProfile, RadioState, StateTimeline};
use crate::workload::{generate_trace, EventTrace, PathModel, Pattern, Workload};

/// One server placement: a client behaviour over a network path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub label: String,
    pub profile: PowerProfile,
    pub workload: Workload,
    pub path: PathModel,
    #[serde(default)]
    pub accounting: AccountingMode,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.label.trim().is_empty() {
            return Err(Error::invalid("label", "must not be empty"));
        }
        self.profile.validate().map_err(|e| e.within("profile"))?;
        self.workload.validate().map_err(|e| e.within("workload"))?;
        self.path.validate().map_err(|e| e.within("path"))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StateShare {
    pub time_s: f64,
    #[serde(rename = "energy_J")]
    pub energy_j: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub label: String,
    #[serde(rename = "total_J")]
    pub total_energy: f64,
    pub per_state: BTreeMap<RadioState, StateShare>,
    #[serde(rename = "mean_W")]
    pub mean_power: f64,
    #[serde(rename = "mean_A")]
    pub mean_current: f64,
    #[serde(rename = "horizon_s")]
    pub horizon: f64,
    /// Hash of the configuration that produced this report.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fingerprint: Option<String>,
}

impl EnergyReport {
    pub fn time_in(&self, state: RadioState) -> f64 {
        self.per_state.get(&state).map_or(0.0, |s| s.time_s)
    }

    pub fn energy_in(&self, state: RadioState) -> f64 {
        self.per_state.get(&state).map_or(0.0, |s| s.energy_j)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize") + "\n"
    }
}

/// Accumulates a report from a state timeline.
pub fn report_from_timeline(
    label: &str,
    timeline: &StateTimeline,
    profile: &PowerProfile,
    mode: AccountingMode,
) -> Result<EnergyReport> {
    if timeline.horizon.is_nan() || timeline.horizon <= 0.0 {
        return Err(Error::invalid("horizon", "must be > 0 to report mean power"));
    }
    let mut per_state: BTreeMap<RadioState, StateShare> =
        RadioState::ALL.iter().map(|&s| (s, StateShare::default())).collect();
    let mut total_energy = 0.0;
    for interval in &timeline.intervals {
        let energy = energy_of_interval(interval, profile, mode);
        let share = per_state.get_mut(&interval.state).expect("all states present");
        share.time_s += interval.duration();
        share.energy_j += energy;
        total_energy += energy;
    }
    let mean_power = total_energy / timeline.horizon;
    Ok(EnergyReport {
        label: label.to_owned(),
        total_energy,
        per_state,
        mean_power,
        mean_current: mean_power / profile.nominal_voltage,
        horizon: timeline.horizon,
        fingerprint: None,
    })
}

/// Runs an already materialized trace, e.g. one measured on a device.
pub fn simulate_trace(
    label: &str,
    trace: &EventTrace,
    profile: &PowerProfile,
    mode: AccountingMode,
) -> Result<EnergyReport> {
    profile.validate().map_err(|e| e.within("profile"))?;
    let timeline = build_state_timeline(trace, &profile.timers, trace.horizon)?;
    report_from_timeline(label, &timeline, profile, mode)
}

pub fn simulate(scenario: &Scenario) -> Result<EnergyReport> {
    scenario.validate()?;
    let trace = generate_trace(&scenario.workload, &scenario.path)?;
    simulate_trace(&scenario.label, &trace, &scenario.profile, scenario.accounting)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub label: String,
    #[serde(rename = "total_J")]
    pub total_energy: f64,
    pub ratio: f64,
}

/// Each report's energy relative to a baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTable {
    pub baseline: String,
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonTable {
    pub fn ratio(&self, label: &str) -> Option<f64> {
        self.rows.iter().find(|r| r.label == label).map(|r| r.ratio)
    }

    /// `label,total_J,ratio` with a header row.
    pub fn to_csv(&self) -> String {
        let mut writer = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            writer.serialize(row).expect("in-memory csv write");
        }
        String::from_utf8(writer.into_inner().expect("in-memory csv flush")).expect("utf-8 csv")
    }
}

#[derive(Serialize)]
struct SummaryRow<'a> {
    label: &'a str,
    #[serde(rename = "total_J")]
    total: f64,
    #[serde(rename = "mean_W")]
    mean_power: f64,
    #[serde(rename = "mean_A")]
    mean_current: f64,
    horizon_s: f64,
    #[serde(rename = "cr_J")]
    cr: f64,
    #[serde(rename = "short_drx_J")]
    short_drx: f64,
    #[serde(rename = "long_drx_J")]
    long_drx: f64,
    #[serde(rename = "idle_J")]
    idle: f64,
}

/// One row per report: totals followed by per-state energy.
pub fn summary_csv(reports: &[EnergyReport]) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for r in reports {
        writer
            .serialize(SummaryRow {
                label: &r.label,
                total: r.total_energy,
                mean_power: r.mean_power,
                mean_current: r.mean_current,
                horizon_s: r.horizon,
                cr: r.energy_in(RadioState::Cr),
                short_drx: r.energy_in(RadioState::ShortDrx),
                long_drx: r.energy_in(RadioState::LongDrx),
                idle: r.energy_in(RadioState::Idle),
            })
            .expect("in-memory csv write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory csv flush")).expect("utf-8 csv")
}

const HORIZON_TOLERANCE_S: f64 = 1e-9;

pub fn compare(reports: &[EnergyReport], baseline_label: &str) -> Result<ComparisonTable> {
    let mut labels = HashSet::new();
    for r in reports {
        if !labels.insert(r.label.as_str()) {
            return Err(Error::InvalidComparison(format!("duplicate label `{}`", r.label)));
        }
    }
    let baseline = reports
        .iter()
        .find(|r| r.label == baseline_label)
        .ok_or_else(|| Error::InvalidComparison(format!("baseline `{baseline_label}` not among the reports")))?;
    if let Some(r) = reports
        .iter()
        .find(|r| (r.horizon - baseline.horizon).abs() > HORIZON_TOLERANCE_S)
    {
        return Err(Error::InvalidComparison(format!(
            "`{}` covers {} s but baseline `{}` covers {} s",
            r.label, r.horizon, baseline.label, baseline.horizon
        )));
    }
    if baseline.total_energy.is_nan() || baseline.total_energy <= 0.0 {
        return Err(Error::InvalidComparison(format!(
            "baseline `{}` has non-positive energy",
            baseline.label
        )));
    }
    let rows = reports
        .iter()
        .map(|r| ComparisonRow {
            label: r.label.clone(),
            total_energy: r.total_energy,
            ratio: if r.label == baseline.label {
                1.0
            } else {
                r.total_energy / baseline.total_energy
            },
        })
        .collect();
    Ok(ComparisonTable {
        baseline: baseline.label.clone(),
        rows,
    })
}

/// Numeric scenario fields that [`sweep`] can vary, named by their config path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    PeriodS,
    DurationS,
    ResourceBytes,
    RequestBytes,
    ResponseBytes,
    /// Request and response size together (echo workloads).
    PayloadBytes,
    BaseRttS,
    AddedDelayS,
    BandwidthBps,
    MssB,
    InitCwnd,
    CrPowerW,
    T1S,
    T2S,
    T3S,
}

impl SweepParam {
    const NAMES: [(&'static str, SweepParam); 15] = [
        ("workload.period_s", SweepParam::PeriodS),
        ("workload.duration_s", SweepParam::DurationS),
        ("workload.resource_bytes", SweepParam::ResourceBytes),
        ("workload.request_bytes", SweepParam::RequestBytes),
        ("workload.response_bytes", SweepParam::ResponseBytes),
        ("workload.payload_bytes", SweepParam::PayloadBytes),
        ("path.base_rtt_s", SweepParam::BaseRttS),
        ("path.added_delay_s", SweepParam::AddedDelayS),
        ("path.bandwidth_Bps", SweepParam::BandwidthBps),
        ("path.mss_B", SweepParam::MssB),
        ("path.init_cwnd", SweepParam::InitCwnd),
        ("profile.p_cr_w", SweepParam::CrPowerW),
        ("profile.timers.t1_s", SweepParam::T1S),
        ("profile.timers.t2_s", SweepParam::T2S),
        ("profile.timers.t3_s", SweepParam::T3S),
    ];

    pub fn name(self) -> &'static str {
        Self::NAMES.iter().find(|(_, p)| *p == self).map(|(n, _)| *n).expect("every param is named")
    }

    /// Returns a copy of `base` with this parameter set to `value`.
    pub fn apply(self, base: &Scenario, value: f64) -> Result<Scenario> {
        let mut s = base.clone();
        let field = self.name();
        let as_count = || -> Result<u64> {
            if value.is_finite() && value >= 0.0 && value.fract() == 0.0 {
                Ok(value as u64)
            } else {
                Err(Error::invalid(field, format!("needs a whole non-negative number, got {value}")))
            }
        };
        let wrong_kind = || Error::Config(format!("`{field}` does not apply to scenario `{}`", base.label));
        match self {
            SweepParam::PeriodS => match &mut s.workload.pattern {
                Pattern::RequestResponse { period_s, .. } | Pattern::Download { period_s, .. } => *period_s = value,
            },
            SweepParam::DurationS => s.workload.duration_s = value,
            SweepParam::ResourceBytes => match &mut s.workload.pattern {
                Pattern::Download { resource_bytes, .. } => *resource_bytes = as_count()?,
                _ => return Err(wrong_kind()),
            },
            SweepParam::RequestBytes | SweepParam::ResponseBytes | SweepParam::PayloadBytes => {
                let n = as_count()?;
                match &mut s.workload.pattern {
                    Pattern::RequestResponse {
                        request_bytes,
                        response_bytes,
                        ..
                    } => {
                        if self != SweepParam::ResponseBytes {
                            *request_bytes = n;
                        }
                        if self != SweepParam::RequestBytes {
                            *response_bytes = n;
                        }
                    }
                    _ => return Err(wrong_kind()),
                }
            }
            SweepParam::BaseRttS => s.path.base_rtt = value,
            SweepParam::AddedDelayS => s.path.added_delay = value,
            SweepParam::BandwidthBps => s.path.bandwidth = value,
            SweepParam::MssB => s.path.mss = as_count()?,
            SweepParam::InitCwnd => s.path.init_cwnd = as_count()?,
            SweepParam::CrPowerW => s.profile.cr_power = value,
            SweepParam::T1S => s.profile.timers.t1 = value,
            SweepParam::T2S => s.profile.timers.t2 = value,
            SweepParam::T3S => s.profile.timers.t3 = value,
        }
        s.label = format!("{}@{}", base.label, value);
        Ok(s)
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::NAMES
            .iter()
            .find(|(n, _)| *n == s)
            .map(|(_, p)| *p)
            .ok_or_else(|| {
                let known: Vec<&str> = Self::NAMES.iter().map(|(n, _)| *n).collect();
                Error::Config(format!("unknown sweep parameter `{s}` (known: {})", known.join(", ")))
            })
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Simulates `base` once per value. Members run in parallel; the output
/// keeps the order of `values`.
pub fn sweep(base: &Scenario, parameter: &str, values: &[f64]) -> Result<Vec<EnergyReport>> {
    let param: SweepParam = parameter.parse()?;
    let scenarios = values
        .iter()
        .map(|&v| param.apply(base, v))
        .collect::<Result<Vec<_>>>()?;
    scenarios.par_iter().map(simulate).collect()
}
