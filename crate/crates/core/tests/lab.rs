use anchorlab::lab::{run_battery, BatteryConfig, BatteryReport, FactId, FactInstance, Suite};

fn report_with_threads(cfg: &BatteryConfig, threads: usize) -> String {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    pool.install(|| run_battery(cfg).unwrap().to_json())
}

#[test]
fn reports_are_identical_across_thread_counts() {
    let cfg = BatteryConfig { trials: 3, suite: Suite::All, seed: 11, ..Default::default() };
    let one = report_with_threads(&cfg, 1);
    let four = report_with_threads(&cfg, 4);
    assert_eq!(one, four);
    let again = report_with_threads(&cfg, 2);
    assert_eq!(one, again);
}

#[test]
fn seeds_change_instances() {
    let a = BatteryConfig { trials: 2, suite: Suite::Classical, seed: 1, ..Default::default() };
    let b = BatteryConfig { seed: 2, ..a.clone() };
    assert_ne!(run_battery(&a).unwrap().facts, run_battery(&b).unwrap().facts);
}

#[test]
fn dumps_replay_their_margins() {
    // A huge negative tolerance turns every trial into a recorded violation.
    let cfg = BatteryConfig {
        trials: 2,
        suite: Suite::All,
        seed: 3,
        classical_tolerance: -1e300,
        quantum_tolerance: -1e300,
        ..Default::default()
    };
    let report = run_battery(&cfg).unwrap();
    assert!(!report.passed());
    let parsed: BatteryReport = serde_json::from_str(&report.to_json()).unwrap();
    let mut replayed = 0;
    for (id, fact) in &parsed.facts {
        assert_eq!(fact.violations, fact.dumps.len(), "{id}");
        if fact.report_only {
            assert_eq!(fact.violations, 0);
            continue;
        }
        assert_eq!(fact.violations, fact.trials, "{id}");
        for dump in &fact.dumps {
            let inst: &FactInstance = dump.instance.as_ref().expect("instance dumped");
            assert_eq!(inst.fact().id(), id);
            let standalone: FactInstance = serde_json::from_str(&serde_json::to_string(inst).unwrap()).unwrap();
            let m = standalone.evaluate().unwrap().margin().unwrap();
            let recorded = dump.margin.unwrap();
            assert!((m - recorded).abs() <= 1e-12, "{id} trial {}: {m} vs {recorded}", dump.trial);
            replayed += 1;
        }
    }
    assert_eq!(replayed, 2 * (FactId::all().len() - 2));
}

#[test]
fn suites_select_their_facts() {
    for (suite, n) in [(Suite::Classical, 7), (Suite::Quantum, 14), (Suite::Breaker, 4), (Suite::All, 25)] {
        let r = run_battery(&BatteryConfig { trials: 0, suite, ..Default::default() }).unwrap();
        assert_eq!(r.facts.len(), n);
        assert!(r.passed());
    }
}

#[test]
fn report_schema() {
    let r = run_battery(&BatteryConfig { trials: 1, suite: Suite::Breaker, seed: 5, ..Default::default() }).unwrap();
    let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(v["seed"], 5);
    for id in ["BREAKER_MARGINAL", "BREAKER_INDEPENDENCE", "BREAKER_MISMATCH", "BREAKER_SANDWICH"] {
        let f = &v["facts"][id];
        assert_eq!(f["trials"], 1);
        assert_eq!(f["violations"], 0);
        assert!(f["min_margin"].is_number());
        assert!(f["dumps"].as_array().unwrap().is_empty());
    }
}
