//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use drxsim_core::engine::{compare, simulate, sweep, EnergyReport};
use drxsim_core::hygiene::{analyze, discard_warmup, normalize_uptime, slot_min_mean, SampleSeries};
use drxsim_core::{
    energy_between, energy_of_interval, simulate_trace, AccountingMode, EventTrace, PacketEvent, Direction,
    PowerProfile, RadioState, StateInterval,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rand::Rng;

use common::*;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_budget(start: Instant, budget: Duration) -> Result<Duration, String> {
    let took = start.elapsed();
    check(took < budget, || format!("took {took:?}, budget {budget:?}"))?;
    Ok(took)
}

/// Exact-cycle energy against 1 us numeric integration; average mode against
/// its closed form.
fn ac1_energy_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = rng(1);
    let mut worst: f64 = 0.0;
    for case in 0..1000 {
        let micro = MicroCycle::random(&mut rng);
        let state = [RadioState::ShortDrx, RadioState::LongDrx, RadioState::Idle][case % 3];
        let mut profile = PowerProfile::literature_default();
        match state {
            RadioState::ShortDrx => profile.short_drx = micro.duty_cycle(),
            RadioState::LongDrx => profile.long_drx = micro.duty_cycle(),
            _ => profile.idle = micro.duty_cycle(),
        }
        let duration_us: u64 = rng.gen_range(1..=400_000);
        let start_us: u64 = rng.gen_range(0..10_000_000);
        let interval = StateInterval::new(
            state,
            start_us as f64 * 1e-6,
            (start_us + duration_us) as f64 * 1e-6,
        )
        .unwrap();

        let exact = energy_of_interval(&interval, &profile, AccountingMode::ExactCycle);
        let numeric = micro.integrate(duration_us);
        let rel = if numeric == 0.0 { exact.abs() } else { ((exact - numeric) / numeric).abs() };
        worst = worst.max(rel);
        check(rel <= 1e-6, || format!("case {case}: exact {exact} vs numeric {numeric} (rel {rel:e})"))?;

        let c = micro.duty_cycle();
        let closed = (c.p_on * c.on_dur + c.p_sleep * (c.cycle_len - c.on_dur)) / c.cycle_len * interval.duration();
        let avg = energy_of_interval(&interval, &profile, AccountingMode::Average);
        check(avg == closed, || format!("case {case}: average {avg} vs closed form {closed}"))?;
    }
    let took = within_budget(start, Duration::from_secs(30))?;
    Ok(format!("1000 cases, worst relative error {worst:.2e}, {took:.2?}"))
}

fn ac2_cascade() -> Outcome {
    let profile = PowerProfile::literature_default();
    let t = profile.timers;
    let horizon = 60.0;
    let trace = EventTrace::new(
        vec![PacketEvent {
            t: 0.0,
            direction: Direction::Down,
            bytes: 1460,
        }],
        horizon,
    )
    .unwrap();
    let r = simulate_trace("cascade", &trace, &profile, AccountingMode::Average).map_err(|e| e.to_string())?;
    let expected = [
        (RadioState::Cr, t.t1),
        (RadioState::ShortDrx, t.t2 - t.t1),
        (RadioState::LongDrx, t.t3 - t.t2),
        (RadioState::Idle, horizon - t.t3),
    ];
    for (state, want) in expected {
        let got = r.time_in(state);
        check(got == want, || format!("{state}: residence {got} s, expected {want} s"))?;
    }
    Ok(format!("residences {:?}", expected.map(|(_, v)| v)))
}

fn mean_currents(reports: &[EnergyReport]) -> Vec<f64> {
    reports.iter().map(|r| r.mean_current).collect()
}

fn ac3_placement_ordering() -> Outcome {
    let start = Instant::now();
    let config = load_preset("software-monitor.json");
    let sweep_spec = config.sweep.clone().ok_or("preset has no sweep")?;
    let scenarios = config.scenarios();
    check(
        scenarios.iter().all(|s| s.profile == PowerProfile::literature_default()),
        || "preset must run on the shipped default profile".into(),
    )?;
    let run = |label: &str| {
        sweep(scenario(&scenarios, label), &sweep_spec.parameter, &sweep_spec.values).map_err(|e| e.to_string())
    };
    let (edge, cloud, far) = (mean_currents(&run("edge")?), mean_currents(&run("cloud")?), mean_currents(&run("far-cloud")?));
    for (i, payload) in sweep_spec.values.iter().enumerate() {
        check(edge[i] <= cloud[i] && cloud[i] <= far[i], || {
            format!("payload {payload} B: edge {} A, cloud {} A, far cloud {} A", edge[i], cloud[i], far[i])
        })?;
    }
    let last = sweep_spec.values.len() - 1;
    let excess = cloud[last] / edge[last] - 1.0;
    check(excess >= 0.20, || format!("cloud excess at largest payload is {:.1}%", excess * 100.0))?;
    let took = within_budget(start, Duration::from_secs(10))?;
    Ok(format!(
        "{} payloads ordered; cloud +{:.1}%, far cloud +{:.1}% at {} B; {took:.2?}",
        edge.len(),
        excess * 100.0,
        (far[last] / edge[last] - 1.0) * 100.0,
        sweep_spec.values[last]
    ))
}

fn edge_cloud_ratios(preset: &str) -> Result<Vec<f64>, String> {
    let config = load_preset(preset);
    let spec = config.sweep.clone().ok_or("preset has no sweep")?;
    let scenarios = config.scenarios();
    let edge = sweep(scenario(&scenarios, "edge"), &spec.parameter, &spec.values).map_err(|e| e.to_string())?;
    let cloud = sweep(scenario(&scenarios, "cloud"), &spec.parameter, &spec.values).map_err(|e| e.to_string())?;
    edge.into_iter()
        .zip(cloud)
        .map(|(mut e, mut c)| {
            e.label = "edge".into();
            c.label = "cloud".into();
            let table = compare(&[c, e], "cloud").map_err(|err| err.to_string())?;
            Ok(table.ratio("edge").unwrap())
        })
        .collect()
}

fn ac4_analytical_ratio() -> Outcome {
    let start = Instant::now();
    let ratios = edge_cloud_ratios("analytical.json")?;
    check(ratios.iter().all(|&r| r < 1.0), || format!("ratio >= 1 in {ratios:?}"))?;
    check(ratios.windows(2).all(|w| w[1] < w[0]), || format!("ratios not strictly decreasing: {ratios:?}"))?;

    let calibrated = load_preset("analytical-calibrated.json");
    check(
        calibrated.note.as_deref().is_some_and(|n| n.starts_with("CALIBRATED")),
        || "calibration config must be labeled CALIBRATED".into(),
    )?;
    let cal = edge_cloud_ratios("analytical-calibrated.json")?;
    check(cal.iter().all(|r| (0.40..=0.54).contains(r)), || format!("calibrated ratios outside [0.40, 0.54]: {cal:?}"))?;
    check(cal.windows(2).all(|w| w[1] < w[0]), || format!("calibrated ratios not decreasing: {cal:?}"))?;
    let took = within_budget(start, Duration::from_secs(10))?;
    let fmt = |v: &[f64]| v.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>().join(" ");
    Ok(format!("default [{}], calibrated [{}]; {took:.2?}", fmt(&ratios), fmt(&cal)))
}

fn noisy_slot_case() -> impl Strategy<Value = (Vec<Vec<f64>>, usize, f64, usize, usize)> {
    (2usize..10)
        .prop_flat_map(|slots| {
            (
                prop::collection::vec(prop::collection::vec(0.1f64..2.0, 1..30), slots..=slots),
                0..slots,
                0.001f64..5.0,
                0usize..30,
                1usize..30,
            )
        })
}

/// Lays the per-slot values out evenly inside 60 s slots, plus a closing sample.
fn build_series(slots: &[Vec<f64>]) -> SampleSeries {
    let mut pairs = Vec::new();
    for (i, values) in slots.iter().enumerate() {
        let step = 60.0 / values.len() as f64;
        for (j, &v) in values.iter().enumerate() {
            pairs.push((i as f64 * 60.0 + j as f64 * step, v));
        }
    }
    pairs.push((slots.len() as f64 * 60.0, 0.0));
    SampleSeries::from_pairs(pairs, "A").unwrap()
}

fn agrees_with_oracle(series: &SampleSeries) -> Result<(usize, f64), TestCaseError> {
    let sel = slot_min_mean(series, 60.0).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let oracle = brute_force_slot_means(series, 60.0);
    let got: Vec<(usize, f64)> = sel.slots.iter().map(|s| (s.slot_index, s.mean_value)).collect();
    prop_assert_eq!(&got, &oracle);
    let best = oracle.iter().copied().fold((usize::MAX, f64::INFINITY), |b, s| if s.1 < b.1 { s } else { b });
    prop_assert_eq!((sel.selected.slot_index, sel.selected.mean_value), best);
    Ok(best)
}

fn ac5_slot_robustness() -> Outcome {
    let start = Instant::now();
    let config = Config {
        cases: 200,
        failure_persistence: None,
        ..Config::default()
    };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    runner
        .run(&noisy_slot_case(), |(slots, polluted, noise, from, len)| {
            let clean = build_series(&slots);
            let (before_idx, before_mean) = agrees_with_oracle(&clean)?;

            let mut dirty = slots.clone();
            let n = dirty[polluted].len();
            let from = from % n;
            for v in dirty[polluted].iter_mut().skip(from).take(len) {
                *v += noise;
            }
            let (after_idx, after_mean) = agrees_with_oracle(&build_series(&dirty))?;
            prop_assert!(after_mean >= before_mean);
            if after_idx != before_idx {
                prop_assert_ne!(after_idx, polluted);
            }

            // Polluting any set of slots that excludes the cleanest one leaves the choice alone.
            let mut many = slots.clone();
            for (i, values) in many.iter_mut().enumerate() {
                if i != before_idx && (i + polluted) % 2 == 0 {
                    values.iter_mut().for_each(|v| *v += noise);
                }
            }
            let (many_idx, many_mean) = agrees_with_oracle(&build_series(&many))?;
            prop_assert_eq!(many_idx, before_idx);
            prop_assert_eq!(many_mean, before_mean);
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    let took = within_budget(start, Duration::from_secs(10))?;
    Ok(format!("200 cases; {took:.2?}"))
}

fn ac6_warmup() -> Outcome {
    let series = SampleSeries::from_pairs((0..=540).map(|m| (m as f64 * 60.0, 0.2 + (m % 7) as f64 * 0.01)), "A")
        .map_err(|e| e.to_string())?;
    check(series.span() == 9.0 * 3600.0, || "fixture is not 9 h".into())?;
    let kept = discard_warmup(&series, 2.0 * 3600.0).map_err(|e| e.to_string())?;
    check(kept.span() == 7.0 * 3600.0, || format!("kept span {} s", kept.span()))?;
    check(kept.samples()[0].t == 0.0, || "kept series does not start at 0".into())?;
    check(kept.len() == 7 * 60 + 1, || format!("kept {} samples", kept.len()))?;
    let report = analyze(&series, 3600.0, 7200.0).map_err(|e| e.to_string())?;
    check(report.slots.len() == 7, || format!("{} one-hour slots", report.slots.len()))?;
    Ok(format!("kept {} samples over 7 h, 7 one-hour slots", kept.len()))
}

fn ac7_uptime_normalization() -> Outcome {
    let mut rng = rng(7);
    let mut worst: f64 = 0.0;
    for case in 0..100 {
        let drain_ma: f64 = rng.gen_range(100.0..600.0);
        let base_mah: f64 = rng.gen_range(2000.0..5000.0);
        let reference: f64 = rng.gen_range(2000.0..5000.0);
        let mut uptimes = Vec::new();
        for initial in [base_mah, base_mah * 1.1] {
            let step = 60.0;
            let hours_to_empty = initial / drain_ma;
            let samples = (hours_to_empty * 3600.0 / step).ceil() as usize + 1;
            let curve = SampleSeries::from_pairs(
                (0..=samples).map(|i| {
                    let t = i as f64 * step;
                    (t, initial - drain_ma * t / 3600.0)
                }),
                "mAh",
            )
            .unwrap();
            let uptime = time_to_empty(&curve);
            uptimes.push(normalize_uptime(uptime, curve.samples()[0].value, reference).map_err(|e| e.to_string())?);
        }
        let rel = ((uptimes[0] - uptimes[1]) / uptimes[0]).abs();
        worst = worst.max(rel);
        check(rel <= 1e-9, || format!("case {case}: normalized uptimes {uptimes:?}"))?;
    }
    Ok(format!("100 curve pairs, worst relative gap {worst:.2e}"))
}

fn ac8_determinism_and_additivity() -> Outcome {
    let start = Instant::now();
    for preset in ["analytical.json", "software-monitor.json", "hardware-monitor.json"] {
        for mut scenario in load_preset(preset).scenarios() {
            scenario.workload.duration_s = scenario.workload.duration_s.min(7200.0);
            for mode in [AccountingMode::Average, AccountingMode::ExactCycle] {
                scenario.accounting = mode;
                let a = simulate(&scenario).map_err(|e| e.to_string())?;
                let b = simulate(&scenario).map_err(|e| e.to_string())?;
                check(a == b && a.to_json() == b.to_json(), || format!("{preset}/{} differs between runs", scenario.label))?;
            }
        }
    }

    let mut rng = rng(8);
    let mut worst: f64 = 0.0;
    for case in 0..500 {
        let profile = random_profile(&mut rng);
        let state = RadioState::ALL[case % 4];
        let total: f64 = rng.gen_range(0.001..120.0);
        let mut cuts: Vec<f64> = (0..rng.gen_range(1..20)).map(|_| rng.gen_range(0.0..total)).collect();
        cuts.push(0.0);
        cuts.push(total);
        cuts.sort_by(f64::total_cmp);
        for mode in [AccountingMode::Average, AccountingMode::ExactCycle] {
            let whole = energy_between(state, &profile, mode, 0.0, total);
            let parts: f64 = cuts.windows(2).map(|w| energy_between(state, &profile, mode, w[0], w[1])).sum();
            let rel = ((whole - parts) / whole).abs();
            worst = worst.max(rel);
            check(rel <= 1e-9, || format!("case {case} {state} {mode:?}: whole {whole} vs parts {parts}"))?;
        }
    }
    let took = within_budget(start, Duration::from_secs(20))?;
    Ok(format!("presets bit-identical; 500 partitions, worst relative gap {worst:.2e}; {took:.2?}"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("AC1 energy oracle equivalence", ac1_energy_oracle),
        ("AC2 cascade reproduction", ac2_cascade),
        ("AC3 placement ordering of mean current", ac3_placement_ordering),
        ("AC4 edge:cloud download ratio", ac4_analytical_ratio),
        ("AC5 slot-minimum robustness", ac5_slot_robustness),
        ("AC6 warm-up arithmetic", ac6_warmup),
        ("AC7 uptime normalization", ac7_uptime_normalization),
        ("AC8 determinism and additivity", ac8_determinism_and_additivity),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("[PASS] {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
