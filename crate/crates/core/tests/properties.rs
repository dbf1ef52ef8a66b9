//! Property-based checks of the algebraic identities the library is built
//! on: shift invariance of the estimator, sign symmetries, parity of exact
//! derivatives, monotonicity of the error bound, and serialization round
//! trips.

use proptest::prelude::*;
use rffd::bounds::{required_m, uniform_bound, BoundInputs};
use rffd::{
    approx_derivative, approx_derivative_at_difference, FeatureMap, KernelOracle, MultiIndex,
    SpectralMeasure,
};

/// Dimension, two multi-indices, and two points, all consistently sized.
fn estimator_case() -> impl Strategy<Value = (Vec<u32>, Vec<u32>, Vec<f64>, Vec<f64>)> {
    (1usize..=3).prop_flat_map(|d| {
        (
            proptest::collection::vec(0u32..=2, d),
            proptest::collection::vec(0u32..=2, d),
            proptest::collection::vec(-2.0f64..2.0, d),
            proptest::collection::vec(-2.0f64..2.0, d),
        )
    })
}

proptest! {
    /// The estimator depends on (x, y) only through x - y.
    #[test]
    fn estimator_is_shift_invariant((p, q, x, y) in estimator_case()) {
        let d = p.len();
        let measure = SpectralMeasure::gaussian(0.9, d).unwrap();
        let sample = measure.sample(8, 11);
        let p = MultiIndex::new(p);
        let q = MultiIndex::new(q);
        let z: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
        let via_points = approx_derivative(&sample, &p, &q, &x, &y).unwrap();
        let via_diff = approx_derivative_at_difference(&sample, &p, &q, &z).unwrap();
        let tol = 1e-12 * (1.0 + via_points.abs());
        prop_assert!((via_points - via_diff).abs() <= tol,
            "{via_points} vs {via_diff}");
    }

    /// Swapping p and q at a fixed difference flips the sign once per unit
    /// of total order.
    #[test]
    fn estimator_sign_flips_under_index_swap((p, q, x, y) in estimator_case()) {
        let d = p.len();
        let measure = SpectralMeasure::gaussian(0.9, d).unwrap();
        let sample = measure.sample(8, 13);
        let p = MultiIndex::new(p);
        let q = MultiIndex::new(q);
        let z: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
        let a = approx_derivative_at_difference(&sample, &p, &q, &z).unwrap();
        let b = approx_derivative_at_difference(&sample, &q, &p, &z).unwrap();
        let sign = if (p.order() + q.order()) % 2 == 1 { -1.0 } else { 1.0 };
        let tol = 1e-12 * (1.0 + a.abs());
        prop_assert!((a - sign * b).abs() <= tol, "{a} vs {b}");
    }

    /// Exact derivatives inherit the parity of the total order: even orders
    /// are even functions of the difference, odd orders odd.
    #[test]
    fn exact_derivative_has_total_order_parity(
        sigma in 0.5f64..1.5,
        pi in 0u32..=3,
        qi in 0u32..=3,
        z in -2.0f64..2.0,
    ) {
        let oracle = KernelOracle::new(SpectralMeasure::gaussian(sigma, 1).unwrap());
        let p = MultiIndex::new(vec![pi]);
        let q = MultiIndex::new(vec![qi]);
        let plus = oracle.exact_derivative_at(&p, &q, &[z]).unwrap();
        let minus = oracle.exact_derivative_at(&p, &q, &[-z]).unwrap();
        let sign = if (pi + qi) % 2 == 1 { -1.0 } else { 1.0 };
        let tol = 1e-12 * (1.0 + plus.abs());
        prop_assert!((plus - sign * minus).abs() <= tol, "{plus} vs {minus}");
    }

    /// Order-zero feature vectors lie on the unit sphere: the interleaved
    /// cos/sin pairs contribute cos^2 + sin^2 = 1 per frequency.
    #[test]
    fn base_feature_map_has_unit_norm(
        d in 1usize..=3,
        m in 1usize..=32,
        coord in -5.0f64..5.0,
    ) {
        let measure = SpectralMeasure::gaussian(1.0, d).unwrap();
        let sample = measure.sample(m, 3);
        let map = FeatureMap::new(&sample, MultiIndex::zeros(d)).unwrap();
        let phi = map.phi(&vec![coord; d]).unwrap();
        let norm2: f64 = phi.iter().map(|v| v * v).sum();
        prop_assert!((norm2 - 1.0).abs() <= 1e-12, "norm^2 = {norm2}");
    }

    /// The uniform bound is strictly monotone: down in m, up in diameter
    /// and in confidence t.
    #[test]
    fn uniform_bound_is_monotone(
        m in 1u64..100_000,
        diameter in 0.0f64..50.0,
        k in 1.0f64..5.0,
        t in 0.1f64..5.0,
    ) {
        let base = BoundInputs { m, diameter, d: 1, sigma_pq: 1.0, c_pq: 1.0, k, t };
        let total = uniform_bound(&base).unwrap().total;
        let mut more_m = base;
        more_m.m = m * 4;
        prop_assert!(uniform_bound(&more_m).unwrap().total < total);
        let mut wider = base;
        wider.diameter = diameter + 1.0;
        prop_assert!(uniform_bound(&wider).unwrap().total > total);
        let mut surer = base;
        surer.t = t + 1.0;
        prop_assert!(uniform_bound(&surer).unwrap().total > total);
    }

    /// required_m returns the first feature count whose bound meets the
    /// target.
    #[test]
    fn required_m_is_the_threshold(
        diameter in 0.0f64..10.0,
        k in 1.0f64..3.0,
        t in 0.5f64..4.0,
        target in 0.05f64..100.0,
    ) {
        let mut inputs = BoundInputs {
            m: 1, diameter, d: 1, sigma_pq: 1.0, c_pq: 1.0, k, t,
        };
        let m = required_m(&inputs, target).unwrap();
        inputs.m = m;
        prop_assert!(uniform_bound(&inputs).unwrap().total <= target);
        if m > 1 {
            inputs.m = m - 1;
            prop_assert!(uniform_bound(&inputs).unwrap().total > target);
        }
    }

    /// A moment-growth certificate only improves as K grows.
    #[test]
    fn bernstein_verdict_is_monotone_in_k(
        r in 1u32..=4,
        k in 1.0f64..8.0,
        n_max in 5u32..40,
    ) {
        let measure = SpectralMeasure::gaussian(1.0, 1).unwrap();
        let report = measure.bernstein_check(r, k, n_max).unwrap();
        if report.passed() {
            let larger = measure.bernstein_check(r, k * 1.7, n_max).unwrap();
            prop_assert!(larger.passed(), "K={k} passed but K={} failed", k * 1.7);
        }
    }

    /// Multi-index text form round-trips (display wraps the comma list in
    /// parentheses; parsing takes the bare list).
    #[test]
    fn multi_index_text_round_trip(orders in proptest::collection::vec(0u32..9, 1..6)) {
        let mi = MultiIndex::new(orders);
        let text = mi.to_string();
        let bare = text.trim_matches(|c| c == '(' || c == ')');
        let parsed: MultiIndex = bare.parse().unwrap();
        prop_assert_eq!(parsed, mi);
    }
}
