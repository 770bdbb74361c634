use tdsusy_web::demo::{density, potentials, spectrum_json, x_axis, SAMPLES};

fn at_zero(xs: &[f64]) -> usize {
    xs.iter().position(|x| x.abs() < 1e-12).expect("grid contains x = 0")
}

#[test]
fn axis_is_symmetric_and_scaled() {
    let xs = x_axis(2.0);
    assert_eq!(xs.len(), SAMPLES);
    assert!((xs[0] + xs[SAMPLES - 1]).abs() < 1e-12);
    assert!((xs[SAMPLES - 1] - 6.0 * 5f64.sqrt()).abs() < 1e-12);
}

#[test]
fn potentials_match_closed_forms() {
    // V1(0, 0) = −1 for m = 0
    let t = 0.0;
    let v = potentials(0, 1, t).unwrap();
    let xs = x_axis(t);
    let i = at_zero(&xs);
    assert!((v[i] - -1.0).abs() < 1e-12, "V1(0,0) = {}", v[i]);
    // V2 = −2/(1+t²) for (0, 1), constant in x
    for t in [0.0, 1.5] {
        let v = potentials(0, 1, t).unwrap();
        for &v2 in &v[SAMPLES..] {
            assert!((v2 + 2.0 / (1.0 + t * t)).abs() < 1e-10, "{v2}");
        }
    }
}

#[test]
fn ground_state_density() {
    // |ψ_0(x, t)|² = e^{−z²/2} / (√(2π) √(1+t²)) with z = x/√(1+t²)
    let t = 0.7;
    let s = (1.0f64 + t * t).sqrt();
    for (x, d) in x_axis(t).into_iter().zip(density(0, 1, 0, 0, t).unwrap()) {
        let z = x / s;
        let want = (-z * z / 2.0).exp() / ((2.0 * std::f64::consts::PI).sqrt() * s);
        assert!((d - want).abs() < 1e-12, "x = {x}: {d} vs {want}");
    }
}

#[test]
fn densities_are_normalized() {
    let t = 0.4;
    let xs = x_axis(t);
    let h = xs[1] - xs[0];
    for level in 0..3 {
        let d = density(2, 3, level, 1, t).unwrap();
        let norm: f64 = d.iter().sum::<f64>() * h;
        assert!((norm - 1.0).abs() < 1e-6, "level {level}: {norm}");
    }
}

#[test]
fn spectrum_json_has_expected_levels() {
    let v: serde_json::Value = serde_json::from_str(&spectrum_json(0, 1, 4).unwrap()).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["report"]["multiplicities"], serde_json::json!([1, 2, 3, 3]));
    let e = v["report"]["eigenvalues"].as_array().unwrap();
    assert!((e[0].as_f64().unwrap() + 1.5).abs() < 1e-8);
    assert!((e[1].as_f64().unwrap() + 0.5).abs() < 1e-8);
}

#[test]
fn invalid_pairs_are_errors() {
    assert!(potentials(1, 2, 0.0).is_err());
    assert!(density(2, 2, 0, 0, 0.0).is_err());
    assert!(spectrum_json(0, 1, 2).is_err());
}
