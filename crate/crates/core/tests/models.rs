use emaxpk::models::{eta_pk1, eta_pk2, grad_pk1, grad_pk2, Model, ModelId, ParamsPk1, ParamsPk2};

// Conventional one-compartment forms, written independently of the crate.
fn pk1_oracle(t: f64, b: [f64; 4], dose: f64) -> f64 {
    let c = dose * (-b[3] * t).exp();
    b[0] + b[1] * c / (b[2] + c)
}

fn pk2_oracle(t: f64, b: [f64; 5], dose: f64) -> f64 {
    let c = dose * b[2] / (b[2] - b[3]) * ((-b[3] * t).exp() - (-b[2] * t).exp());
    b[0] + b[1] * c / (b[4] + c)
}

fn fd<const K: usize>(f: impl Fn([f64; K]) -> f64, b: [f64; K], i: usize) -> f64 {
    let h = 1e-6 * b[i].abs().max(1.0);
    let (mut up, mut dn) = (b, b);
    up[i] += h;
    dn[i] -= h;
    (f(up) - f(dn)) / (2.0 * h)
}

#[test]
fn pk1_nominal_values() {
    let p = ParamsPk1::nominal();
    assert!((eta_pk1(0.0, &p).unwrap() - (0.5 + 50.0 / 6.0)).abs() < 1e-12);
    for t in [0.0, 1.0, 13.48, 31.62, 160.0] {
        let want = pk1_oracle(t, p.beta(), p.dose);
        assert!((eta_pk1(t, &p).unwrap() - want).abs() < 1e-12);
    }
    // Effect decays to the baseline.
    assert!((eta_pk1(1e4, &p).unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn pk2_nominal_values() {
    let p = ParamsPk2::nominal();
    assert_eq!(eta_pk2(0.0, &p).unwrap(), 0.5);
    for t in [0.3, 3.0, 14.7, 32.7, 200.0] {
        let want = pk2_oracle(t, p.beta(), p.dose);
        assert!((eta_pk2(t, &p).unwrap() - want).abs() < 1e-12, "t = {t}");
    }
}

#[test]
fn gradients_match_finite_differences() {
    let p1 = ParamsPk1::nominal();
    let p2 = ParamsPk2::nominal();
    for t in [0.0, 0.5, 5.0, 20.0, 80.0] {
        let g = grad_pk1(t, &p1).unwrap();
        for i in 0..4 {
            let want = fd(|b| pk1_oracle(t, b, p1.dose), p1.beta(), i);
            assert!((g[i] - want).abs() < 1e-6 * want.abs().max(1.0), "pk1 t={t} i={i}");
        }
        let g = grad_pk2(t, &p2).unwrap();
        for i in 0..5 {
            let want = fd(|b| pk2_oracle(t, b, p2.dose), p2.beta(), i);
            assert!((g[i] - want).abs() < 1e-6 * want.abs().max(1.0), "pk2 t={t} i={i}");
        }
    }
}

#[test]
fn pk1_is_decreasing_and_pk2_stays_above_baseline() {
    let p1 = ParamsPk1::nominal();
    let p2 = ParamsPk2::nominal();
    let mut last = f64::INFINITY;
    for i in 0..=400 {
        let t = i as f64 * 0.5;
        let e = eta_pk1(t, &p1).unwrap();
        assert!(e < last);
        last = e;
        assert!(eta_pk2(t, &p2).unwrap() >= p2.beta0);
    }
}

#[test]
fn invalid_parameters_are_rejected() {
    assert!(ParamsPk1::new([0.5, 10.0, -1.0, 0.1], 5.0, 1.0).is_err());
    assert!(ParamsPk1::new([0.5, 10.0, 1.0, 0.0], 5.0, 1.0).is_err());
    assert!(ParamsPk1::new([0.5, 10.0, 1.0, 0.1], 5.0, 0.0).is_err());
    assert!(ParamsPk1::new([0.5, 10.0, 1.0, 0.1], 0.0, 1.0).is_err());
    // Absorption must exceed elimination.
    assert!(ParamsPk2::new([0.5, 10.0, 0.1, 0.5, 1.0], 5.0, 1.0).is_err());
    assert!(ParamsPk2::new([0.5, 10.0, 0.1, 0.1, 1.0], 5.0, 1.0).is_err());
    assert!(eta_pk1(-1.0, &ParamsPk1::nominal()).is_err());
    assert!(Model::from_beta(ModelId::Pk1, &[1.0, 2.0], 5.0, 1.0).is_err());
}

#[test]
fn model_enum_dispatch() {
    let m = Model::nominal(ModelId::Pk2);
    assert_eq!(m.k(), 5);
    assert_eq!(m.id().param_names().len(), 5);
    let p = ParamsPk2::nominal();
    assert_eq!(m.eta(7.0), eta_pk2(7.0, &p).unwrap());
    let m2 = m.with_param(1, 20.0).unwrap();
    assert_eq!(m2.beta()[1], 20.0);
    assert_eq!(m.with_sigma(2.0).unwrap().sigma(), 2.0);
}
