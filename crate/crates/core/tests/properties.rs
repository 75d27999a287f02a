//! Property tests over randomized inputs.

use gblab_core::curvature::CurvatureTensor;
use gblab_core::density::{gb_density_perm, gb_density_pfaffian};
use gblab_core::quad::{quad_box, QuadSpec};
use proptest::prelude::*;

/// Curvature tensors built from a symmetric pair-basis expansion.
fn curvature_tensor(n: usize) -> impl Strategy<Value = CurvatureTensor> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| ((a + 1)..n).map(move |b| (a, b)))
        .collect();
    let np = pairs.len();
    let dim = np * (np + 1) / 2;
    prop::collection::vec(-1.0f64..1.0, dim).prop_map(move |coeffs| {
        let mut t = CurvatureTensor::zero(n);
        let mut it = coeffs.into_iter();
        for (x, &(a, b)) in pairs.iter().enumerate() {
            for &(c, d) in pairs.iter().skip(x) {
                let v = it.next().unwrap();
                for ((i, j), (k, l), s) in [
                    ((a, b), (c, d), v),
                    ((b, a), (c, d), -v),
                    ((a, b), (d, c), -v),
                    ((b, a), (d, c), v),
                ] {
                    t.set(i, j, k, l, s);
                    t.set(k, l, i, j, s);
                }
            }
        }
        t
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The permutation sum and the Pfaffian expansion are the same polynomial
    /// in the curvature components.
    #[test]
    fn density_routes_agree_on_surfaces(r in curvature_tensor(2)) {
        let a = gb_density_perm(&r).unwrap().value;
        let b = gb_density_pfaffian(&r).unwrap().value;
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn density_routes_agree_in_four_dims(r in curvature_tensor(4)) {
        let a = gb_density_perm(&r).unwrap().value;
        let b = gb_density_pfaffian(&r).unwrap().value;
        prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0));
    }

    /// Low-degree polynomials integrate exactly and deterministically.
    #[test]
    fn quadrature_polynomial_exactness(
        coeffs in prop::collection::vec(-2.0f64..2.0, 1..6),
        hi in 0.3f64..2.5,
    ) {
        let spec = QuadSpec::for_dim(1);
        let eval = |x: f64| {
            let mut v = 0.0;
            for c in coeffs.iter().rev() {
                v = v * x + c;
            }
            v
        };
        let exact: f64 = coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c * hi.powi(k as i32 + 1) / (k as f64 + 1.0))
            .sum();
        let once = quad_box(|p| eval(p[0]), &[(0.0, hi)], &spec).unwrap();
        let again = quad_box(|p| eval(p[0]), &[(0.0, hi)], &spec).unwrap();
        prop_assert_eq!(once.value.to_bits(), again.value.to_bits());
        prop_assert!((once.value - exact).abs() <= 1e-10 * exact.abs().max(1.0));
    }
}
