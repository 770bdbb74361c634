use tdsusy::numerics::Grid;
use tdsusy::suite::{expected_spectrum, negative_controls, run_suite, SuiteConfig, SuiteReport};

fn small(m: usize, l: usize, k: usize) -> SuiteConfig {
    let mut cfg = SuiteConfig::new(m, l, k).unwrap();
    cfg.grid = Grid::new(10.0, 257, vec![0.0, 0.5, -2.0]).unwrap();
    cfg
}

fn describe(r: &SuiteReport) -> String {
    r.groups
        .iter()
        .filter(|g| !g.passed)
        .map(|g| format!("{} {}: {:?}", g.criterion, g.name, g.worst().map(|w| (&w.name, w.max_norm, &w.note))))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn small_grid_suite_passes() {
    let r = run_suite(&small(0, 1, 4)).unwrap();
    assert!(r.passed, "{}", describe(&r));
    let criteria: Vec<u8> = r.groups.iter().map(|g| g.criterion).collect();
    assert_eq!(criteria, (1..=9).collect::<Vec<u8>>());
    let spec = r.spectrum.as_ref().unwrap();
    assert_eq!(spec.multiplicities, expected_spectrum(0, 1, 4).1);
}

#[test]
fn perturbation_breaks_the_algebra_group() {
    let mut cfg = small(0, 1, 3);
    cfg.perturbation = 1e-2;
    let r = run_suite(&cfg).unwrap();
    assert!(!r.passed);
    assert!(!r.group(6).unwrap().passed);
}

#[test]
fn negative_controls_are_caught() {
    let reports = negative_controls(&small(0, 1, 3), 1e-2);
    assert_eq!(reports.len(), 3);
    for r in reports {
        assert!(r.passed, "{}: {:?}", r.name, r.note);
    }
}

#[test]
fn config_validation() {
    assert!(SuiteConfig::new(1, 2, 6).is_err());
    assert!(SuiteConfig::new(2, 2, 6).is_err());
    assert!(SuiteConfig::new(0, 2, 6).is_err());
    assert!(SuiteConfig::new(0, 1, 2).is_err());
    assert!(SuiteConfig::new(2, 5, 3).is_ok());
}

#[test]
fn expected_spectrum_shape() {
    let (e, m) = expected_spectrum(2, 5, 5);
    assert_eq!(e, [-5.5, -2.5, 0.5, 1.5, 2.5]);
    assert_eq!(m, [1, 2, 3, 3, 3]);
}

#[test]
fn report_round_trips_through_json() {
    let r = run_suite(&small(0, 1, 3)).unwrap();
    let s = serde_json::to_string(&r).unwrap();
    let back: SuiteReport = serde_json::from_str(&s).unwrap();
    assert_eq!(back.groups.len(), r.groups.len());
    assert_eq!(back.passed, r.passed);
}
