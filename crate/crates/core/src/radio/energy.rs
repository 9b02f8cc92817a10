use serde::{Deserialize, Serialize};

use super::fsm::StateInterval;
use super::profile::{PowerProfile, RadioState};

/// How duty-cycled states are charged.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AccountingMode {
    /// Long-run mean power times residence time.
    #[default]
    Average,
    /// Integrates the wake/sleep square wave, wake-up window first at state entry.
    ExactCycle,
}

/// Energy (J) spent in `state` between `from` and `to` seconds after entering it.
///
/// Splitting a span at any point and summing the pieces gives the energy of
/// the whole span, because exact-cycle accounting threads the phase through
/// the offsets.
pub fn energy_between(
    state: RadioState,
    profile: &PowerProfile,
    mode: AccountingMode,
    from: f64,
    to: f64,
) -> f64 {
    if to <= from {
        return 0.0;
    }
    match (profile.duty_cycle(state), mode) {
        (None, _) => profile.cr_power * (to - from),
        (Some(cycle), AccountingMode::Average) => cycle.avg_power() * (to - from),
        (Some(cycle), AccountingMode::ExactCycle) => {
            (cycle.cumulative_energy(to) - cycle.cumulative_energy(from)).max(0.0)
        }
    }
}

pub fn energy_of_interval(interval: &StateInterval, profile: &PowerProfile, mode: AccountingMode) -> f64 {
    energy_between(interval.state, profile, mode, 0.0, interval.duration())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radio::{DutyCycle, FsmTimers};

    fn profile() -> PowerProfile {
        PowerProfile {
            note: None,
            cr_power: 1.2,
            short_drx: DutyCycle::new(0.08, 0.01, 0.8, 0.02).unwrap(),
            long_drx: DutyCycle::new(0.32, 0.01, 0.8, 0.02).unwrap(),
            idle: DutyCycle::new(1.28, 0.01, 0.5, 0.005).unwrap(),
            timers: FsmTimers::new(0.1, 0.4, 10.0).unwrap(),
            nominal_voltage: 3.85,
        }
    }

    fn iv(state: RadioState, start: f64, end: f64) -> StateInterval {
        StateInterval::new(state, start, end).unwrap()
    }

    #[test]
    fn cr_is_constant_power_in_both_modes() {
        let p = profile();
        for mode in [AccountingMode::Average, AccountingMode::ExactCycle] {
            assert_eq!(energy_of_interval(&iv(RadioState::Cr, 0.0, 10.0), &p, mode), 12.0);
        }
    }

    #[test]
    fn two_whole_short_drx_cycles() {
        let e = energy_of_interval(&iv(RadioState::ShortDrx, 0.0, 0.16), &profile(), AccountingMode::ExactCycle);
        assert!((e - 0.0188).abs() < 1e-15, "{e}");
    }

    #[test]
    fn partial_cycle_charges_wake_window_first() {
        let p = profile();
        let e = energy_of_interval(&iv(RadioState::ShortDrx, 3.0, 3.005), &p, AccountingMode::ExactCycle);
        assert!((e - 0.005 * 0.8).abs() < 1e-15);
        let e = energy_of_interval(&iv(RadioState::ShortDrx, 0.0, 0.09), &p, AccountingMode::ExactCycle);
        let expected = 0.01 * 0.8 + 0.07 * 0.02 + 0.01 * 0.8;
        assert!((e - expected).abs() < 1e-15);
    }

    #[test]
    fn modes_agree_on_whole_cycles() {
        let p = profile();
        for state in [RadioState::ShortDrx, RadioState::LongDrx, RadioState::Idle] {
            let cycle = p.duty_cycle(state).unwrap().cycle_len;
            for n in [1.0, 3.0, 17.0, 250.0] {
                let i = iv(state, 0.0, n * cycle);
                let a = energy_of_interval(&i, &p, AccountingMode::Average);
                let x = energy_of_interval(&i, &p, AccountingMode::ExactCycle);
                assert!((a - x).abs() <= 1e-12 * a, "{state} n={n}: {a} vs {x}");
            }
        }
    }

    #[test]
    fn empty_span_costs_nothing() {
        assert_eq!(energy_between(RadioState::Idle, &profile(), AccountingMode::ExactCycle, 2.0, 2.0), 0.0);
    }
}
