//! Cleaning of long measurement runs.
//!
//! Background activity only ever adds consumption, so the quietest slot of
//! a run with a steady workload is the best estimate of the workload's own
//! cost. The helpers here drop the warm-up, split the rest into equal slots
//! and pick the slot with the lowest mean.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub value: f64,
}

/// Timestamped measurements with strictly increasing timestamps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSeries {
    samples: Vec<Sample>,
    unit: String,
}

impl SampleSeries {
    pub fn new(samples: Vec<Sample>, unit: impl Into<String>) -> Result<Self> {
        for (i, s) in samples.iter().enumerate() {
            ensure_finite(&format!("samples[{i}].t"), s.t)?;
            ensure_finite(&format!("samples[{i}].value"), s.value)?;
        }
        if let Some(i) = samples.windows(2).position(|w| w[1].t <= w[0].t) {
            return Err(Error::invalid(
                format!("samples[{}].t", i + 1),
                "timestamps must be strictly increasing",
            ));
        }
        Ok(SampleSeries {
            samples,
            unit: unit.into(),
        })
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (f64, f64)>, unit: &str) -> Result<Self> {
        Self::new(pairs.into_iter().map(|(t, value)| Sample { t, value }).collect(), unit)
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn unit(&self) -> &str {
        &self.unit
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Time covered, from the first to the last sample.
    pub fn span(&self) -> f64 {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => b.t - a.t,
            _ => 0.0,
        }
    }

    /// `# unit:` header, column header, then one `t,value` row per sample.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# unit: {}\nt_seconds,value\n", self.unit);
        for s in &self.samples {
            out.push_str(&format!("{},{}\n", s.t, s.value));
        }
        out
    }
}

/// Parses `t_seconds,value` rows; the unit comes from a `# unit: X` comment.
pub fn parse_sample_series(text: &str) -> Result<SampleSeries> {
    let mut unit: Option<String> = None;
    let mut samples: Vec<Sample> = Vec::new();
    let mut header_allowed = true;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(u) = comment.trim().strip_prefix("unit:") {
                unit = Some(u.trim().to_owned());
            }
            continue;
        }
        let parse_err = |reason: String| Error::Parse { line: line_no, reason };
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if header_allowed && fields[0].parse::<f64>().is_err() {
            header_allowed = false;
            if fields == ["t_seconds", "value"] {
                continue;
            }
            return Err(parse_err(format!("unexpected header `{line}`")));
        }
        header_allowed = false;
        if fields.len() != 2 {
            return Err(parse_err(format!("expected 2 fields, found {}", fields.len())));
        }
        let t: f64 = fields[0]
            .parse()
            .map_err(|_| parse_err(format!("bad timestamp `{}`", fields[0])))?;
        let value: f64 = fields[1]
            .parse()
            .map_err(|_| parse_err(format!("bad value `{}`", fields[1])))?;
        if !(t.is_finite() && value.is_finite()) {
            return Err(parse_err("timestamp and value must be finite".into()));
        }
        if let Some(prev) = samples.last() {
            if t == prev.t {
                return Err(parse_err(format!("duplicate timestamp {t}")));
            }
            if t < prev.t {
                return Err(parse_err(format!("timestamp {t} goes backwards from {}", prev.t)));
            }
        }
        samples.push(Sample { t, value });
    }
    if samples.is_empty() {
        return Err(Error::EmptySeries("no samples in input".into()));
    }
    let unit = unit.ok_or_else(|| Error::Parse {
        line: 1,
        reason: "missing `# unit: X` header comment".into(),
    })?;
    SampleSeries::new(samples, unit)
}

/// Drops samples before `warmup` and shifts the rest so the run starts at 0.
pub fn discard_warmup(series: &SampleSeries, warmup: f64) -> Result<SampleSeries> {
    if !(warmup >= 0.0 && warmup.is_finite()) {
        return Err(Error::invalid("warmup", "must be finite and >= 0"));
    }
    let last = series
        .samples
        .last()
        .ok_or_else(|| Error::EmptySeries("input series has no samples".into()))?;
    if warmup > 0.0 && warmup >= last.t {
        return Err(Error::EmptySeries(format!(
            "warm-up of {warmup} s covers the whole run (last sample at {} s)",
            last.t
        )));
    }
    let samples = series
        .samples
        .iter()
        .filter(|s| s.t >= warmup)
        .map(|s| Sample {
            t: s.t - warmup,
            value: s.value,
        })
        .collect();
    SampleSeries::new(samples, series.unit.clone())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlotStat {
    pub slot_index: usize,
    pub start: f64,
    pub end: f64,
    pub mean_value: f64,
    pub sample_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotSelection {
    pub selected: SlotStat,
    pub slots: Vec<SlotStat>,
}

/// Bounds of slot `index`: `[index * len, (index + 1) * len)`.
pub fn slot_bounds(index: usize, slot_len: f64) -> (f64, f64) {
    (index as f64 * slot_len, (index + 1) as f64 * slot_len)
}

/// Splits `[0, T)`, `T` being the last timestamp, into whole slots and
/// returns the one with the lowest mean. A trailing partial slot is ignored;
/// ties go to the earlier slot; slots without samples are not reported.
pub fn slot_min_mean(series: &SampleSeries, slot_len: f64) -> Result<SlotSelection> {
    if !(slot_len > 0.0 && slot_len.is_finite()) {
        return Err(Error::invalid("slot_len", "must be finite and > 0"));
    }
    let last = series
        .samples
        .last()
        .ok_or_else(|| Error::EmptySeries("input series has no samples".into()))?;
    let full_slots = (last.t / slot_len).floor().max(0.0) as usize;

    let samples = &series.samples;
    let mut cursor = samples.partition_point(|s| s.t < 0.0);
    let mut slots = Vec::new();
    for index in 0..full_slots {
        let (start, end) = slot_bounds(index, slot_len);
        let mut sum = 0.0;
        let mut count = 0usize;
        while cursor < samples.len() && samples[cursor].t < end {
            sum += samples[cursor].value;
            count += 1;
            cursor += 1;
        }
        if count > 0 {
            slots.push(SlotStat {
                slot_index: index,
                start,
                end,
                mean_value: sum / count as f64,
                sample_count: count,
            });
        }
    }

    let selected = slots
        .iter()
        .copied()
        .reduce(|best, s| if s.mean_value < best.mean_value { s } else { best })
        .ok_or_else(|| {
            Error::InsufficientData(format!(
                "no complete {slot_len} s slot with samples in a run ending at {} s",
                last.t
            ))
        })?;
    Ok(SlotSelection { selected, slots })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisParameters {
    pub slot_len_s: f64,
    pub warmup_s: f64,
}

/// Output of the warm-up + slot-minimum pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub selected_slot: SlotStat,
    pub slots: Vec<SlotStat>,
    pub parameters: AnalysisParameters,
    pub unit: String,
}

pub fn analyze(series: &SampleSeries, slot_len: f64, warmup: f64) -> Result<AnalysisReport> {
    let steady = discard_warmup(series, warmup)?;
    let selection = slot_min_mean(&steady, slot_len)?;
    Ok(AnalysisReport {
        selected_slot: selection.selected,
        slots: selection.slots,
        parameters: AnalysisParameters {
            slot_len_s: slot_len,
            warmup_s: warmup,
        },
        unit: series.unit.clone(),
    })
}

/// Rescales an uptime to what it would have been on `reference_charge`.
pub fn normalize_uptime(uptime: f64, initial_charge: f64, reference_charge: f64) -> Result<f64> {
    if !(initial_charge > 0.0 && initial_charge.is_finite()) {
        return Err(Error::invalid("initial_charge", "must be finite and > 0"));
    }
    if !(reference_charge > 0.0 && reference_charge.is_finite()) {
        return Err(Error::invalid("reference_charge", "must be finite and > 0"));
    }
    ensure_finite("uptime", uptime)?;
    Ok(uptime * reference_charge / initial_charge)
}

const SECONDS_PER_HOUR: f64 = 3600.0;

/// Power estimated from a discharge log.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerEstimate {
    /// Power in W at the midpoint of each discharging interval.
    pub series: SampleSeries,
    /// `[start, end]` of intervals where the level rose (charging); they are
    /// left out of `series`.
    pub excluded: Vec<(f64, f64)>,
}

/// Converts a battery log to power: `-dQ/dt * voltage` per sample interval.
///
/// Accepts `battery_%` (or `%`) series, scaled by `capacity_mah`, and
/// absolute `mAh` series.
pub fn discharge_to_power(series: &SampleSeries, capacity_mah: f64, voltage: f64) -> Result<PowerEstimate> {
    if !(capacity_mah > 0.0 && capacity_mah.is_finite()) {
        return Err(Error::invalid("capacity", "must be finite and > 0"));
    }
    if !(voltage > 0.0 && voltage.is_finite()) {
        return Err(Error::invalid("voltage", "must be finite and > 0"));
    }
    let to_mah: Box<dyn Fn(f64) -> f64> = match series.unit.as_str() {
        "battery_%" | "%" => Box::new(move |pct| pct / 100.0 * capacity_mah),
        "mAh" => Box::new(|q| q),
        other => {
            return Err(Error::invalid(
                "unit",
                format!("expected `battery_%`, `%` or `mAh`, got `{other}`"),
            ))
        }
    };
    let mut power = Vec::new();
    let mut excluded = Vec::new();
    for w in series.samples.windows(2) {
        let (a, b) = (w[0], w[1]);
        let dq_mah = to_mah(b.value) - to_mah(a.value);
        if dq_mah > 0.0 {
            excluded.push((a.t, b.t));
            continue;
        }
        let amps = -dq_mah * SECONDS_PER_HOUR / 1000.0 / (b.t - a.t);
        power.push(Sample {
            t: a.t + (b.t - a.t) / 2.0,
            value: amps * voltage,
        });
    }
    Ok(PowerEstimate {
        series: SampleSeries::new(power, "W")?,
        excluded,
    })
}
