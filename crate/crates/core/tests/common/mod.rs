#![allow(dead_code)]

use std::path::PathBuf;

use drxsim_core::engine::Scenario;
use drxsim_core::{DutyCycle, EventTrace, FsmTimers, PowerProfile, RadioState, RunConfig, SampleSeries};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn presets_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../presets")
}

pub fn load_preset(name: &str) -> RunConfig {
    let text = std::fs::read_to_string(presets_dir().join(name)).expect("preset readable");
    RunConfig::from_json(&text).expect("preset valid").config
}

pub fn scenario<'a>(scenarios: &'a [Scenario], label: &str) -> &'a Scenario {
    scenarios.iter().find(|s| s.label == label).expect("label present")
}

/// Duty cycle with whole-microsecond cycle and wake window.
#[derive(Debug, Clone, Copy)]
pub struct MicroCycle {
    pub cycle_us: u64,
    pub on_us: u64,
    pub p_on: f64,
    pub p_sleep: f64,
}

impl MicroCycle {
    pub fn random(rng: &mut impl Rng) -> Self {
        let cycle_us = rng.gen_range(1_000..=100_000);
        let on_us = rng.gen_range(0..=cycle_us);
        let p_on = rng.gen_range(0.05..2.0);
        let p_sleep = rng.gen_range(0.0..=p_on);
        MicroCycle { cycle_us, on_us, p_on, p_sleep }
    }

    pub fn duty_cycle(&self) -> DutyCycle {
        DutyCycle {
            cycle_len: self.cycle_us as f64 * 1e-6,
            on_dur: self.on_us as f64 * 1e-6,
            p_on: self.p_on,
            p_sleep: self.p_sleep,
        }
    }

    /// Midpoint rule with a 1 us step. Exact on this grid because every
    /// phase edge falls on a step boundary.
    pub fn integrate(&self, duration_us: u64) -> f64 {
        let mut energy = 0.0;
        for step in 0..duration_us {
            let p = if step % self.cycle_us < self.on_us { self.p_on } else { self.p_sleep };
            energy += p * 1e-6;
        }
        energy
    }
}

/// A valid profile with random figures, by rejection sampling.
pub fn random_profile(rng: &mut impl Rng) -> PowerProfile {
    loop {
        let cycle = |rng: &mut dyn rand::RngCore, lo: f64, hi: f64, max_on: f64| {
            let len = rng.gen_range(lo..hi);
            let on = rng.gen_range(0.0..max_on) * len;
            let p_on = rng.gen_range(0.1..2.0);
            DutyCycle {
                cycle_len: len,
                on_dur: on,
                p_on,
                p_sleep: rng.gen_range(0.0..p_on * 0.5),
            }
        };
        let t1 = rng.gen_range(0.01..1.0);
        let t2 = t1 + rng.gen_range(0.01..2.0);
        let t3 = t2 + rng.gen_range(0.5..15.0);
        let profile = PowerProfile {
            note: None,
            cr_power: rng.gen_range(0.5..3.0),
            short_drx: cycle(rng, 0.01, 0.1, 0.6),
            long_drx: cycle(rng, 0.1, 0.6, 0.2),
            idle: cycle(rng, 0.6, 2.6, 0.05),
            timers: FsmTimers { t1, t2, t3 },
            nominal_voltage: rng.gen_range(3.0..4.5),
        };
        if profile.validate().is_ok() {
            return profile;
        }
    }
}

/// Random sorted trace mixing dense bursts and long silences.
pub fn random_trace(rng: &mut impl Rng, horizon: f64) -> EventTrace {
    use drxsim_core::{Direction, PacketEvent};
    let n = rng.gen_range(0..40);
    let mut times: Vec<f64> = (0..n)
        .map(|_| {
            let t: f64 = rng.gen_range(0.0..horizon);
            if rng.gen_bool(0.3) {
                // Floor keeps quantized times below the horizon.
                (t * 100.0).floor() / 100.0
            } else {
                t
            }
        })
        .collect();
    times.sort_by(f64::total_cmp);
    let events = times
        .into_iter()
        .map(|t| PacketEvent {
            t,
            direction: if rng.gen_bool(0.5) { Direction::Up } else { Direction::Down },
            bytes: rng.gen_range(1..100_000),
        })
        .collect();
    EventTrace { events, horizon }
}

/// Average-mode energy of a trace from the cascade definition alone: after
/// each packet, elapsed inactivity picks the state; before the first packet
/// the radio is idle.
pub fn cascade_energy_oracle(trace: &EventTrace, profile: &PowerProfile) -> f64 {
    let power = |s: RadioState| profile.avg_power(s);
    let t = &profile.timers;
    let mut times: Vec<f64> = trace.events.iter().map(|e| e.t).collect();
    times.push(trace.horizon);
    let mut energy = power(RadioState::Idle) * times[0];
    for w in times.windows(2) {
        let gap = w[1] - w[0];
        let edges = [0.0, t.t1, t.t2, t.t3, f64::INFINITY];
        for (i, state) in RadioState::ALL.into_iter().enumerate() {
            let lo = edges[i].min(gap);
            let hi = edges[i + 1].min(gap);
            energy += power(state) * (hi - lo);
        }
    }
    energy
}

/// Slot means by filtering the whole series once per slot.
pub fn brute_force_slot_means(series: &SampleSeries, slot_len: f64) -> Vec<(usize, f64)> {
    let last = series.samples().last().unwrap().t;
    let slots = (last / slot_len).floor() as usize;
    (0..slots)
        .filter_map(|i| {
            let start = i as f64 * slot_len;
            let end = (i + 1) as f64 * slot_len;
            let inside: Vec<f64> = series
                .samples()
                .iter()
                .filter(|s| start <= s.t && s.t < end)
                .map(|s| s.value)
                .collect();
            if inside.is_empty() {
                None
            } else {
                Some((i, inside.iter().sum::<f64>() / inside.len() as f64))
            }
        })
        .collect()
}

/// Time at which a linearly sampled charge series reaches zero.
pub fn time_to_empty(series: &SampleSeries) -> f64 {
    let s = series.samples();
    for w in s.windows(2) {
        if w[1].value <= 0.0 {
            let frac = w[0].value / (w[0].value - w[1].value);
            return w[0].t + frac * (w[1].t - w[0].t) - s[0].t;
        }
    }
    panic!("series never reaches empty");
}
