use std::f64::consts::PI;

use nalgebra::{Matrix2, Vector3};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

use adsweyl::cone_metric::{ConeMetric, Geometry};
use adsweyl::fixtures::random_metric;
use adsweyl::fuchsian::{build_genus2, elem_eq, reference_rep, Word};
use adsweyl::projective::{ads_distance, exp_o, isom_action, loglog_slope};

/// Short words: group equality is decided numerically, which loses accuracy on long products.
fn word() -> impl Strategy<Value = Word> {
    prop::collection::vec(
        prop::sample::select(vec![1i8, -1, 2, -2, 3, -3, 4, -4]),
        0..5,
    )
    .prop_map(|l| Word::new(&l))
}

fn geometry() -> impl Strategy<Value = Geometry> {
    prop_oneof![Just(Geometry::Euclidean), Just(Geometry::Hyperbolic)]
}

fn sl2(a: f64, b: f64, c: f64) -> Matrix2<f64> {
    let x = Matrix2::new(a, b, c, -a);
    let m = Matrix2::identity() + x + x * x * 0.5;
    m / m.determinant().sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn word_times_inverse_is_identity(w in word()) {
        prop_assert!(w.mul(&w.inverse()).reduced().is_empty());
        prop_assert_eq!(w.inverse().inverse().reduced(), w.reduced());
        let m = reference_rep().evaluate(&w) * reference_rep().evaluate(&w.inverse());
        prop_assert!((m - Matrix2::identity()).abs().max() < 1e-8 * (1.0 + reference_rep().evaluate(&w).norm().powi(2)));
    }

    #[test]
    fn word_display_roundtrips(w in word()) {
        let r = w.reduced();
        prop_assert_eq!(Word::parse(&r.to_string()).unwrap(), r);
    }

    #[test]
    fn relator_is_trivial_in_the_group(w in word()) {
        let conj = w.mul(&Word::relator()).mul(&w.inverse());
        prop_assert!(elem_eq(&conj, &Word::identity()));
    }

    #[test]
    fn flipping_twice_restores_the_metric(seed in 0u64..1000, n in 1usize..4, g in geometry(), pick in 0usize..64) {
        let mut rng = StdRng::seed_from_u64(seed);
        let m = random_metric(&mut rng, n, g).unwrap();
        let e = pick % m.lengths.len();
        if let Ok(once) = m.flip(e) {
            let back = once.flip(e).unwrap();
            for i in 0..m.lengths.len() {
                prop_assert!(m.tri.same_edge(i, &back.tri, i));
                prop_assert!((m.lengths[i] - back.lengths[i]).abs() < 1e-9 * m.lengths[i]);
            }
        }
    }

    #[test]
    fn gauss_bonnet_holds(seed in 0u64..1000, n in 1usize..5, g in geometry()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let m = random_metric(&mut rng, n, g).unwrap();
        let total = m.curvature().total();
        let expected = match g {
            Geometry::Euclidean => -4.0 * PI,
            Geometry::Hyperbolic => m.area() - 4.0 * PI,
        };
        prop_assert!((total - expected).abs() < 1e-9, "{} vs {}", total, expected);
    }

    #[test]
    fn metric_toml_roundtrips(seed in 0u64..1000, n in 1usize..4, g in geometry()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let m = random_metric(&mut rng, n, g).unwrap();
        let back = ConeMetric::from_toml(&m.to_toml()).unwrap();
        prop_assert_eq!(&back.lengths, &m.lengths);
        for i in 0..m.lengths.len() {
            prop_assert!(m.tri.same_edge(i, &back.tri, i));
        }
        for (a, b) in m.tri.triangles.iter().zip(&back.tri.triangles) {
            prop_assert_eq!(a.edges, b.edges);
            prop_assert_eq!(a.verts, b.verts);
        }
        prop_assert_eq!(ConeMetric::from_toml(&back.to_toml()).unwrap().to_toml(), back.to_toml());
    }

    #[test]
    fn scaling_is_linear_in_lengths(seed in 0u64..1000, t in 0.1f64..3.0) {
        let mut rng = StdRng::seed_from_u64(seed);
        let m = random_metric(&mut rng, 2, Geometry::Euclidean).unwrap();
        let s = m.scale(t);
        prop_assert!((s.area() - t * t * m.area()).abs() < 1e-9 * s.area());
        let (a, b) = (m.cone_angles(), s.cone_angles());
        prop_assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-10));
    }

    #[test]
    fn ads_distance_is_isometry_invariant(
        u in prop::array::uniform3(-0.5f64..0.5),
        v in prop::array::uniform3(-0.5f64..0.5),
        g in prop::array::uniform6(-0.3f64..0.3),
    ) {
        let u = Vector3::new(u[0], u[1], 0.0);
        let v = Vector3::new(v[0], v[1], 0.0);
        let (p, q) = (exp_o(&u), exp_o(&v));
        let d = ads_distance(&p, &q);
        let (gl, gr) = (sl2(g[0], g[1], g[2]), sl2(g[3], g[4], g[5]));
        let d2 = ads_distance(&isom_action(&gl, &gr, &p), &isom_action(&gl, &gr, &q));
        match (d, d2) {
            (Some(a), Some(b)) => prop_assert!((a - b).abs() < 1e-9),
            (None, None) => {}
            other => prop_assert!(false, "{:?}", other),
        }
    }

    #[test]
    fn loglog_slope_recovers_power(k in -3.0f64..3.0, c in 0.1f64..10.0) {
        let x = [1e-3f64, 1e-2, 1e-1, 1.0];
        let y: Vec<f64> = x.iter().map(|t| c * t.powf(k)).collect();
        prop_assert!((loglog_slope(&x, &y).unwrap() - k).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, ..ProptestConfig::default() })]

    #[test]
    fn translation_lengths_are_conjugation_invariant(
        d in prop::array::uniform6(-0.2f64..0.2),
        g in prop::array::uniform3(-0.5f64..0.5),
        w in word(),
    ) {
        prop_assume!(!w.reduced().is_empty());
        let c = [2.0 + d[0], 2.0 + d[1], 2.0 + d[2], d[3], d[4], d[5]];
        let rep = build_genus2(&c).unwrap();
        let conj = rep.conjugate(&sl2(g[0], g[1], g[2]));
        match (rep.translation_length(&w), conj.translation_length(&w)) {
            (Ok(a), Ok(b)) => prop_assert!((a - b).abs() < 1e-8 * a.max(1.0)),
            (Err(_), Err(_)) => {}
            other => prop_assert!(false, "{:?}", other),
        }
    }
}
