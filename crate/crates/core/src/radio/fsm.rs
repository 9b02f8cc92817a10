use serde::{Deserialize, Serialize};

use super::profile::{FsmTimers, RadioState};
use crate::error::{Error, Result};
use crate::workload::EventTrace;

/// State reached at `now`, given the last packet at `last_activity`.
///
/// Inactivity only ever demotes the radio, so the result is never more
/// active than `current`; promotion to CR happens through [`RadioFsm::on_packet`].
pub fn fsm_advance(
    current: RadioState,
    last_activity: f64,
    now: f64,
    timers: &FsmTimers,
) -> Result<RadioState> {
    let elapsed = now - last_activity;
    if elapsed.is_nan() || elapsed < 0.0 {
        return Err(Error::invalid(
            "now",
            format!("precedes last activity ({now} < {last_activity})"),
        ));
    }
    Ok(current.max(timers.state_after(elapsed)))
}

/// Radio state together with the time of the most recent packet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioFsm {
    pub state: RadioState,
    pub last_activity: Option<f64>,
}

impl Default for RadioFsm {
    fn default() -> Self {
        RadioFsm {
            state: RadioState::Idle,
            last_activity: None,
        }
    }
}

impl RadioFsm {
    pub fn on_packet(self, t: f64) -> Self {
        RadioFsm {
            state: RadioState::Cr,
            last_activity: Some(t),
        }
    }

    pub fn advance(self, now: f64, timers: &FsmTimers) -> Result<Self> {
        let Some(last) = self.last_activity else {
            return Ok(self);
        };
        Ok(RadioFsm {
            state: fsm_advance(self.state, last, now, timers)?,
            last_activity: self.last_activity,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateInterval {
    pub state: RadioState,
    pub start: f64,
    pub end: f64,
}

impl StateInterval {
    pub fn new(state: RadioState, start: f64, end: f64) -> Result<Self> {
        if !(start.is_finite() && end.is_finite() && end > start) {
            return Err(Error::invalid(
                "interval",
                format!("needs finite start < end, got [{start}, {end}]"),
            ));
        }
        Ok(StateInterval { state, start, end })
    }

    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

/// Gapless, ordered state intervals covering `[0, horizon]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StateTimeline {
    pub intervals: Vec<StateInterval>,
    pub horizon: f64,
}

impl StateTimeline {
    pub fn residence(&self, state: RadioState) -> f64 {
        self.intervals
            .iter()
            .filter(|iv| iv.state == state)
            .map(StateInterval::duration)
            .sum()
    }

    /// State in force at `t`; boundaries belong to the later interval.
    pub fn state_at(&self, t: f64) -> Option<RadioState> {
        let idx = self.intervals.partition_point(|iv| iv.end <= t);
        self.intervals
            .get(idx)
            .filter(|iv| iv.start <= t)
            .map(|iv| iv.state)
    }

    fn push(&mut self, state: RadioState, start: f64, end: f64) {
        if end <= start {
            return;
        }
        if let Some(last) = self.intervals.last_mut() {
            if last.state == state && last.end == start {
                last.end = end;
                return;
            }
        }
        self.intervals.push(StateInterval { state, start, end });
    }

    /// Fills `[from, to)` with the inactivity cascade following a packet at `last`.
    fn fill(&mut self, last: Option<f64>, from: f64, to: f64, timers: &FsmTimers) {
        let Some(last) = last else {
            self.push(RadioState::Idle, from, to);
            return;
        };
        let bounds = [last, last + timers.t1, last + timers.t2, last + timers.t3, f64::INFINITY];
        for (state, edge) in RadioState::ALL.into_iter().zip(bounds.windows(2)) {
            let start = edge[0].max(from);
            let end = edge[1].min(to);
            self.push(state, start, end);
        }
    }
}

/// Replays `trace` through the state machine, starting idle at `t = 0`.
pub fn build_state_timeline(
    trace: &EventTrace,
    timers: &FsmTimers,
    horizon: f64,
) -> Result<StateTimeline> {
    timers.validate().map_err(|e| e.within("timers"))?;
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(Error::invalid("horizon", "must be finite and >= 0"));
    }
    let mut timeline = StateTimeline {
        intervals: Vec::new(),
        horizon,
    };
    let mut cursor = 0.0;
    let mut last: Option<f64> = None;
    for (i, event) in trace.events.iter().enumerate() {
        let t = event.t;
        if t.is_nan() || t < 0.0 {
            return Err(Error::invalid(format!("events[{i}].t"), "must be >= 0"));
        }
        if t < cursor {
            return Err(Error::invalid(
                format!("events[{i}].t"),
                format!("trace is not sorted ({t} after {cursor})"),
            ));
        }
        if t > horizon {
            return Err(Error::invalid(
                format!("events[{i}].t"),
                format!("lies beyond the horizon {horizon}"),
            ));
        }
        timeline.fill(last, cursor, t, timers);
        cursor = t;
        last = Some(t);
    }
    timeline.fill(last, cursor, horizon, timers);
    Ok(timeline)
}
