//! Cross-module pipelines: catalog metrics through curvature, density,
//! assembly, and the exact oracles.

use gblab_core::assembly::{self, Verdict};
use gblab_core::chart;
use gblab_core::chi;
use gblab_core::moduli;
use gblab_core::quad::QuadSpec;
use num_bigint::BigInt;
use num_rational::BigRational;

#[test]
fn geometry_values_are_shareable_across_threads() {
    fn assert_send_sync<T: Send + Sync>() {}
    assert_send_sync::<chart::MetricChart>();
    assert_send_sync::<gblab_core::region::Region>();
    assert_send_sync::<gblab_core::curvature::CurvatureTensor>();
    assert_send_sync::<moduli::FrickeTriple>();

    // pure evaluation from multiple threads
    let c = chart::sphere(1.0);
    std::thread::scope(|s| {
        for k in 0..4 {
            let c = &c;
            s.spawn(move || {
                let p = c.point(&[1.0 + 0.1 * k as f64, 0.5]).unwrap();
                let kgauss = gblab_core::curvature::gauss_curvature(c, &p).unwrap();
                assert!((kgauss - 1.0).abs() < 1e-10);
            });
        }
    });
}

#[test]
fn every_closed_catalog_metric_integrates_to_its_chi() {
    let spec2 = QuadSpec::for_dim(2);
    let spec4 = QuadSpec::for_dim(4);
    let charts = [
        (chart::sphere(1.0), spec2.clone()),
        (chart::sphere(0.5), spec2.clone()),
        (chart::flat_torus(2), spec2.clone()),
        (chart::round_s4(1.0), spec4.clone()),
        (chart::s2xs2(), spec4.clone()),
    ];
    for (c, spec) in charts {
        let expected = c.closed.as_ref().unwrap().expected_chi;
        let r = assembly::gauss_bonnet_closed(&c, &spec).unwrap();
        assert_eq!(r.verdict, Verdict::Match, "{}: total {}", c.name, r.total);
        assert_eq!(r.nearest_integer, expected);
        assert!(r.integer_gap < 0.01, "{}: gap {}", c.name, r.integer_gap);
    }
}

#[test]
fn modular_exhaustion_agrees_with_the_covering_oracle() {
    // numerical route: truncated-area integrals on the index-12 cover
    let model = assembly::ModularCurveModel { index: 12 };
    let report = assembly::exhaustion_report(&model, &[0.2, 0.1, 0.05]).unwrap();
    assert_eq!(report.verdict, Verdict::Match);
    let integral = report.rows.last().unwrap().nearest_integer;

    // exact route: orbifold value -1/6 scaled by the covering index
    let orb = BigRational::new(BigInt::from(-1), BigInt::from(6));
    let exact = chi::chi_finite_cover(&orb, 12);
    assert!(chi::is_integer(&exact));
    assert_eq!(exact.to_integer(), BigInt::from(integral));
}

#[test]
fn orbifold_area_matches_the_zeta_bookkeeping() {
    // area route: chi_orb = -(pi/3)/(2 pi) = -1/6
    let area = moduli::modular_thick_area(2048.0, 1).unwrap();
    let chi_orb = moduli::chi_from_area(area.area + area.truncation_tail).unwrap();
    assert!((chi_orb + 1.0 / 6.0).abs() < 1e-8);

    // the same -1/6 from the covering direction
    let cover = BigRational::new(BigInt::from(-2), BigInt::from(1));
    let orb = chi::chi_orbifold_from_cover(&cover, 12);
    assert_eq!(orb, BigRational::new(BigInt::from(-1), BigInt::from(6)));
}

#[test]
fn thin_model_chart_matches_the_model_module() {
    let c = chart::model_thin(8.0);
    for u in [0.0, 0.5, 2.0, 7.5] {
        let p = c.point(&[u, 0.3]).unwrap();
        let g = c.metric_at(&p).unwrap();
        let m = moduli::thin_model_metric(u).unwrap();
        assert_eq!(g[0], m[0][0]);
        assert!((g[3] - m[1][1]).abs() < 1e-18);
        let k = gblab_core::curvature::gauss_curvature(&c, &p).unwrap();
        assert!((k + 9.0).abs() < 1e-9, "u = {u}: K = {k}");
    }
}

#[test]
fn systole_thick_parts_are_nested() {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
    let triples: Vec<moduli::FrickeTriple> =
        (0..50).map(|_| moduli::random_triple(&mut rng)).collect();
    let eps_list = [2.0, 1.5, 1.0, 0.5];
    let mut previous: Option<Vec<bool>> = None;
    for &eps in &eps_list {
        let members: Vec<bool> = triples
            .iter()
            .map(|t| moduli::thick_membership(t, eps).unwrap())
            .collect();
        if let Some(prev) = &previous {
            for (was, is) in prev.iter().zip(&members) {
                assert!(!was | is, "thick parts failed to nest");
            }
        }
        previous = Some(members);
    }
}
