use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

/// Radio states, ordered from most to least power-hungry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadioState {
    Cr,
    ShortDrx,
    LongDrx,
    Idle,
}

impl RadioState {
    pub const ALL: [RadioState; 4] = [
        RadioState::Cr,
        RadioState::ShortDrx,
        RadioState::LongDrx,
        RadioState::Idle,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RadioState::Cr => "cr",
            RadioState::ShortDrx => "short_drx",
            RadioState::LongDrx => "long_drx",
            RadioState::Idle => "idle",
        }
    }
}

impl fmt::Display for RadioState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Wake/sleep square wave of a low-power state. The wake-up window comes
/// first in every cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DutyCycle {
    #[serde(rename = "cycle_s")]
    pub cycle_len: f64,
    #[serde(rename = "on_s")]
    pub on_dur: f64,
    #[serde(rename = "p_on_w")]
    pub p_on: f64,
    #[serde(rename = "p_sleep_w")]
    pub p_sleep: f64,
}

impl DutyCycle {
    pub fn new(cycle_len: f64, on_dur: f64, p_on: f64, p_sleep: f64) -> Result<Self> {
        let cycle = DutyCycle {
            cycle_len,
            on_dur,
            p_on,
            p_sleep,
        };
        cycle.validate()?;
        Ok(cycle)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("cycle_s", self.cycle_len)?;
        ensure_finite("on_s", self.on_dur)?;
        ensure_finite("p_on_w", self.p_on)?;
        ensure_finite("p_sleep_w", self.p_sleep)?;
        if self.cycle_len <= 0.0 {
            return Err(Error::invalid("cycle_s", "must be > 0"));
        }
        if self.on_dur < 0.0 || self.on_dur > self.cycle_len {
            return Err(Error::invalid("on_s", "must lie in [0, cycle_s]"));
        }
        if self.p_sleep < 0.0 {
            return Err(Error::invalid("p_sleep_w", "must be >= 0"));
        }
        if self.p_sleep > self.p_on {
            return Err(Error::invalid("p_sleep_w", "must not exceed p_on_w"));
        }
        Ok(())
    }

    pub fn cycle_energy(&self) -> f64 {
        self.p_on * self.on_dur + self.p_sleep * (self.cycle_len - self.on_dur)
    }

    pub fn avg_power(&self) -> f64 {
        (self.p_on * self.on_dur + self.p_sleep * (self.cycle_len - self.on_dur)) / self.cycle_len
    }

    pub fn sleep_fraction(&self) -> f64 {
        (self.cycle_len - self.on_dur) / self.cycle_len
    }

    /// Energy drawn between state entry and `elapsed` seconds later.
    pub fn cumulative_energy(&self, elapsed: f64) -> f64 {
        if elapsed <= 0.0 {
            return 0.0;
        }
        let whole = (elapsed / self.cycle_len).floor();
        let rem = (elapsed - whole * self.cycle_len).clamp(0.0, self.cycle_len);
        let awake = rem.min(self.on_dur);
        whole * self.cycle_energy() + self.p_on * awake + self.p_sleep * (rem - awake)
    }
}

/// Inactivity thresholds, all counted from the most recent packet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FsmTimers {
    #[serde(rename = "t1_s")]
    pub t1: f64,
    #[serde(rename = "t2_s")]
    pub t2: f64,
    #[serde(rename = "t3_s")]
    pub t3: f64,
}

impl FsmTimers {
    pub fn new(t1: f64, t2: f64, t3: f64) -> Result<Self> {
        let timers = FsmTimers { t1, t2, t3 };
        timers.validate()?;
        Ok(timers)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("t1_s", self.t1)?;
        ensure_finite("t2_s", self.t2)?;
        ensure_finite("t3_s", self.t3)?;
        if self.t1 <= 0.0 {
            return Err(Error::invalid("t1_s", "must be > 0"));
        }
        if self.t2 <= self.t1 {
            return Err(Error::invalid("t2_s", "must be greater than t1_s"));
        }
        if self.t3 <= self.t2 {
            return Err(Error::invalid("t3_s", "must be greater than t2_s"));
        }
        Ok(())
    }

    /// State reached after `elapsed` seconds of inactivity.
    pub fn state_after(&self, elapsed: f64) -> RadioState {
        if elapsed >= self.t3 {
            RadioState::Idle
        } else if elapsed >= self.t2 {
            RadioState::LongDrx
        } else if elapsed >= self.t1 {
            RadioState::ShortDrx
        } else {
            RadioState::Cr
        }
    }
}

/// Power figures and timers of one radio interface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerProfile {
    /// Free-form provenance label, e.g. where the figures came from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(rename = "p_cr_w")]
    pub cr_power: f64,
    pub short_drx: DutyCycle,
    pub long_drx: DutyCycle,
    pub idle: DutyCycle,
    pub timers: FsmTimers,
    #[serde(rename = "nominal_voltage_v", default = "default_voltage")]
    pub nominal_voltage: f64,
}

fn default_voltage() -> f64 {
    3.85
}

const LITERATURE_DEFAULT: &str = include_str!("../../../../presets/profile-default.json");

impl PowerProfile {
    /// The shipped default profile (`presets/profile-default.json`).
    ///
    /// These are typical LTE figures, not measurements of any particular device.
    pub fn literature_default() -> Self {
        let profile: PowerProfile =
            serde_json::from_str(LITERATURE_DEFAULT).expect("bundled default profile parses");
        profile.validate().expect("bundled default profile is valid");
        profile
    }

    pub fn duty_cycle(&self, state: RadioState) -> Option<&DutyCycle> {
        match state {
            RadioState::Cr => None,
            RadioState::ShortDrx => Some(&self.short_drx),
            RadioState::LongDrx => Some(&self.long_drx),
            RadioState::Idle => Some(&self.idle),
        }
    }

    /// Long-run mean power while resident in `state`.
    pub fn avg_power(&self, state: RadioState) -> f64 {
        match self.duty_cycle(state) {
            None => self.cr_power,
            Some(cycle) => cycle.avg_power(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("p_cr_w", self.cr_power)?;
        if self.cr_power < 0.0 {
            return Err(Error::invalid("p_cr_w", "must be >= 0"));
        }
        self.short_drx.validate().map_err(|e| e.within("short_drx"))?;
        self.long_drx.validate().map_err(|e| e.within("long_drx"))?;
        self.idle.validate().map_err(|e| e.within("idle"))?;
        self.timers.validate().map_err(|e| e.within("timers"))?;
        ensure_finite("nominal_voltage_v", self.nominal_voltage)?;
        if self.nominal_voltage <= 0.0 {
            return Err(Error::invalid("nominal_voltage_v", "must be > 0"));
        }

        let powers = RadioState::ALL.map(|s| self.avg_power(s));
        for (pair, state) in powers.windows(2).zip(&RadioState::ALL[1..]) {
            if pair[0] <= pair[1] {
                return Err(Error::invalid(
                    format!("{state}"),
                    "mean power must be strictly below that of the preceding state \
                     (cr > short_drx > long_drx > idle)",
                ));
            }
        }
        let sleep = [&self.short_drx, &self.long_drx, &self.idle].map(|c| c.sleep_fraction());
        if !(sleep[0] < sleep[1] && sleep[1] < sleep[2]) {
            return Err(Error::invalid(
                "idle",
                "sleep fraction must grow from short_drx to long_drx to idle",
            ));
        }
        Ok(())
    }
}
