use emaxpk::design::{equivalence_check, DesignMeasure, InterestSet};
use emaxpk::models::{Model, ModelId};
use emaxpk::numerics::Interval;
use emaxpk::search::{collapse_support, fedorov_v, ld_design, reweight, uniform_ld_search, SearchConfig};
use emaxpk::verify::random_pk1;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn space(hi: f64) -> Interval {
    Interval::new(0.0, hi).unwrap()
}

fn pk1_ld(hi: f64) -> DesignMeasure {
    let model = Model::nominal(ModelId::Pk1);
    ld_design(&model, space(hi), &SearchConfig::for_model(ModelId::Pk1))
        .unwrap()
        .design
}

fn assert_times(got: &[f64], want: &[f64], tol: f64) {
    assert_eq!(got.len(), want.len(), "{got:?}");
    for (a, b) in got.iter().zip(want) {
        assert!((a - b).abs() < tol, "{got:?} vs {want:?}");
    }
}

#[test]
fn pk1_nominal_ld_design() {
    let r = ld_design(
        &Model::nominal(ModelId::Pk1),
        space(160.0),
        &SearchConfig::for_model(ModelId::Pk1),
    )
    .unwrap();
    assert!(r.converged && r.report.passed);
    assert_times(&r.design.times(), &[0.0, 13.48, 31.62, 160.0], 0.05);
    for w in r.design.weights() {
        assert!((w - 0.25).abs() < 1e-9);
    }
    assert!(r.report.sup_d <= 4.0 * 1.001);
}

#[test]
fn pk2_nominal_ld_design_has_five_points() {
    let model = Model::nominal(ModelId::Pk2);
    let r = ld_design(&model, space(200.0), &SearchConfig::for_model(ModelId::Pk2)).unwrap();
    assert!(r.converged);
    assert_eq!(r.design.len(), 5);
    assert_eq!(r.design.times()[0], 0.0);
    assert_eq!(r.report.interior_maxima(), 4);
}

#[test]
fn fedorov_from_optimum_is_a_fixed_point() {
    let model = Model::nominal(ModelId::Pk1);
    let ld = pk1_ld(160.0);
    let r = fedorov_v(&model, &ld, &SearchConfig::for_model(ModelId::Pk1)).unwrap();
    assert!(r.converged);
    assert!(r.iterations <= 1, "{} iterations", r.iterations);
    assert_times(&r.design.times(), &ld.times(), 1e-3);
}

#[test]
fn fedorov_from_equispaced_start_reaches_optimum() {
    let model = Model::nominal(ModelId::Pk1);
    let start = DesignMeasure::uniform(&[0.0, 40.0, 80.0, 160.0], space(160.0)).unwrap();
    let r = fedorov_v(&model, &start, &SearchConfig::for_model(ModelId::Pk1)).unwrap();
    assert!(r.converged);
    assert_times(&r.design.times(), &[0.0, 13.48, 31.62, 160.0], 0.05);
    for w in r.design.weights() {
        assert!((w - 0.25).abs() < 1e-3, "{:?}", r.design.weights());
    }
}

#[test]
fn random_pk1_designs_are_certified_four_point_designs() {
    let n = 50;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..n {
        let p = random_pk1(&mut rng);
        let hi = 8.0 / p.beta3;
        let model = Model::pk1(p).unwrap();
        let cfg = SearchConfig::for_model(ModelId::Pk1);
        let r = ld_design(&model, space(hi), &cfg).unwrap();
        assert!(r.converged, "{p:?}: sup d {}", r.report.sup_d);
        let ts = r.design.times();
        assert_eq!(ts.len(), 4, "{p:?}: {ts:?}");
        assert_eq!(ts[0], 0.0);
        assert_eq!(ts[3], hi);
    }
}

#[test]
fn search_ignores_sigma() {
    let cfg = SearchConfig::for_model(ModelId::Pk1);
    let base = Model::nominal(ModelId::Pk1);
    let a = ld_design(&base.with_sigma(0.5).unwrap(), space(160.0), &cfg).unwrap();
    let b = ld_design(&base.with_sigma(2.0).unwrap(), space(160.0), &cfg).unwrap();
    assert_eq!(a.design, b.design);
    // det M scales as σ^{-2k}, k = 4.
    assert!((a.criterion / b.criterion / 4f64.powi(8) - 1.0).abs() < 1e-12);
}

#[test]
fn certificate_holds_on_a_finer_grid() {
    let model = Model::nominal(ModelId::Pk1);
    let cfg = SearchConfig::for_model(ModelId::Pk1);
    let r = ld_design(&model, space(160.0), &cfg).unwrap();
    let fine = equivalence_check(&model, &r.design, &InterestSet::all(4), 2 * cfg.grid_n, cfg.cert_tol).unwrap();
    assert!(fine.passed);
    assert!((fine.sup_d - r.report.sup_d).abs() < 1e-6);
}

#[test]
fn uniform_search_is_deterministic_per_seed() {
    let model = Model::nominal(ModelId::Pk1);
    let cfg = SearchConfig {
        seed: 3,
        ..SearchConfig::for_model(ModelId::Pk1)
    };
    let a = uniform_ld_search(&model, space(72.0), &cfg).unwrap();
    let b = uniform_ld_search(&model, space(72.0), &cfg).unwrap();
    assert_eq!(a, b);
    assert_times(&a.design.times(), &[0.0, 13.263, 31.051, 72.0], 0.01);
}

#[test]
fn saturated_reweighting_converges_to_equal_weights() {
    let model = Model::nominal(ModelId::Pk1);
    let ld = pk1_ld(160.0);
    let skewed = DesignMeasure::new(
        ld.times()
            .iter()
            .zip([0.4, 0.1, 0.3, 0.2])
            .map(|(&t, weight)| emaxpk::design::SupportPoint { t, weight })
            .collect(),
        ld.space(),
    )
    .unwrap();
    let r = reweight(&model, &skewed, 10_000, 1e-10).unwrap();
    for w in r.weights() {
        assert!((w - 0.25).abs() < 1e-6, "{:?}", r.weights());
    }
}

#[test]
fn collapse_merges_and_drops() {
    let s = space(10.0);
    let pt = |t, weight| emaxpk::design::SupportPoint { t, weight };
    let xi = DesignMeasure::new(vec![pt(1.0, 0.3), pt(1.01, 0.1), pt(5.0, 0.59995), pt(9.0, 0.00005)], s).unwrap();
    let c = collapse_support(&xi, 0.05, 1e-4).unwrap();
    assert_eq!(c.len(), 2);
    assert!((c.times()[0] - 1.0025).abs() < 1e-12);
    assert!((c.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn config_validation() {
    let mut cfg = SearchConfig::for_model(ModelId::Pk1);
    cfg.n_points = 2;
    assert!(cfg.validate(4).is_err());
    let mut cfg = SearchConfig::for_model(ModelId::Pk1);
    cfg.multistarts = 0;
    assert!(cfg.validate(4).is_err());
    assert!(SearchConfig::for_model(ModelId::Pk2).validate(5).is_ok());
}
