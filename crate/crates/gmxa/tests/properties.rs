use gmxa::cli::{fit_scaling, FitModel};
use gmxa::fourierops::{fourier_average, low_high_split};
use gmxa::grassmann::{
    cone_membership, metric_distance, near_orthogonal_subset, principal_angles, random_rotation, DirectionSet, Subspace, ZERO_ANGLE_TOL,
};
use gmxa::gridops::GridFunction;
use gmxa::plates::Plate;
use gmxa::rng::{seeded, unit_vector};
use proptest::prelude::*;

fn dims() -> impl Strategy<Value = (usize, usize)> {
    (2usize..=5).prop_flat_map(|n| (1..n, Just(n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn metric_axioms((d, n) in dims(), seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let a = Subspace::random(n, d, &mut rng);
        let b = Subspace::random(n, d, &mut rng);
        let c = Subspace::random(n, d, &mut rng);
        let ab = metric_distance(&a, &b).unwrap();
        prop_assert_eq!(ab, metric_distance(&b, &a).unwrap());
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert!(metric_distance(&a, &a).unwrap() < 1e-7);
        let ac = metric_distance(&a, &c).unwrap();
        let cb = metric_distance(&c, &b).unwrap();
        prop_assert!(ab <= ac + cb + 1e-10);
    }

    #[test]
    fn metric_is_rotation_invariant((d, n) in dims(), seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let a = Subspace::random(n, d, &mut rng);
        let b = Subspace::random(n, d, &mut rng);
        let r = random_rotation(n, &mut rng);
        let before = metric_distance(&a, &b).unwrap();
        let after = metric_distance(&a.rotate(&r), &b.rotate(&r)).unwrap();
        prop_assert!((before - after).abs() < 1e-10);
    }

    #[test]
    fn largest_angle_is_comparable_to_the_metric((d, n) in dims(), seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let a = Subspace::random(n, d, &mut rng);
        let b = Subspace::random(n, d, &mut rng);
        let pd = principal_angles(&a, &b, ZERO_ANGLE_TOL).unwrap();
        prop_assert!(pd.angles.windows(2).all(|w| w[0] <= w[1]));
        let dist = metric_distance(&a, &b).unwrap();
        let theta = pd.largest();
        // sin θ ≤ θ ≤ (π/2) sin θ on [0, π/2].
        prop_assert!(dist <= theta + 1e-12 && theta <= 2.0 * dist + 1e-12);
    }

    #[test]
    fn projection_is_idempotent((d, n) in dims(), seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let s = Subspace::random(n, d, &mut rng);
        let x = unit_vector(&mut rng, n);
        let p = s.project(&x);
        let pp = s.project(&p);
        prop_assert!(p.iter().zip(&pp).all(|(a, b)| (a - b).abs() < 1e-10));
    }

    #[test]
    fn cone_membership_is_scale_invariant(seed in any::<u64>(), delta in 0.01f64..1.0, lambda in 1e-3f64..1e3) {
        let mut rng = seeded(seed);
        let s = Subspace::random(3, 1, &mut rng);
        let eta = unit_vector(&mut rng, 3);
        let scaled: Vec<f64> = eta.iter().map(|v| v * lambda).collect();
        let a = cone_membership(&s, delta, &eta).unwrap();
        let b = cone_membership(&s, delta, &scaled).unwrap();
        let margin = (s.project_norm(&eta) - 0.25 * delta).abs();
        prop_assert!(a == b || margin < 1e-12);
    }

    #[test]
    fn near_orthogonal_members_lie_in_the_hyperplane((d, n) in (3usize..=5).prop_flat_map(|n| (1..n - 1, Just(n))), seed in any::<u64>(), delta in 0.05f64..0.5) {
        let set = DirectionSet::random(n, d, 40, seed);
        let xi = unit_vector(&mut seeded(seed ^ 1), n);
        let near = near_orthogonal_subset(&set, &xi, delta).unwrap();
        for (a, dist) in near.projected.iter().zip(&near.distances) {
            prop_assert!(a.project_norm(&xi) < 1e-10);
            prop_assert!(*dist < delta / 3.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn direction_set_json_is_bit_exact((d, n) in dims(), count in 1usize..8, seed in any::<u64>(), sep in proptest::option::of(0.0f64..1.0)) {
        let mut set = DirectionSet::random(n, d, count, seed);
        set.separation = sep;
        let back = DirectionSet::from_json(&set.to_json()).unwrap();
        prop_assert_eq!(back.separation.map(f64::to_bits), sep.map(f64::to_bits));
        for (a, b) in set.elements.iter().zip(&back.elements) {
            prop_assert!(a.to_column_major().iter().zip(b.to_column_major()).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
    }

    #[test]
    fn plate_json_round_trips((d, n) in dims(), seed in any::<u64>(), s in 0.01f64..100.0, delta in 0.0f64..1.0) {
        let mut rng = seeded(seed);
        let center = unit_vector(&mut rng, n);
        let p = Plate::new(Subspace::random(n, d, &mut rng), center, s, delta).unwrap();
        prop_assert_eq!(Plate::from_json(&p.to_json()).unwrap(), p);
    }

    #[test]
    fn plate_membership_commutes_with_dyadic_rescaling((d, n) in dims(), seed in any::<u64>(), k in -6i32..6) {
        // Powers of two rescale exactly in floating point.
        let lambda = 2f64.powi(k);
        let mut rng = seeded(seed);
        let sigma = Subspace::random(n, d, &mut rng);
        let c = unit_vector(&mut rng, n);
        let p = Plate::new(sigma.clone(), c.clone(), 1.0, 0.3).unwrap();
        let q = Plate::new(sigma, c.iter().map(|v| v * lambda).collect(), lambda, 0.3).unwrap();
        for _ in 0..50 {
            let x: Vec<f64> = unit_vector(&mut rng, n).iter().zip(&c).map(|(u, ci)| ci + 1.2 * u).collect();
            let y: Vec<f64> = x.iter().map(|v| v * lambda).collect();
            prop_assert_eq!(p.contains(&x).unwrap(), q.contains(&y).unwrap());
        }
    }

    #[test]
    fn grid_binary_round_trip(shape in proptest::collection::vec(1usize..6, 1..4), h in 1e-3f64..10.0, seed in any::<u64>()) {
        let len: usize = shape.iter().product();
        let mut rng = seeded(seed);
        let values: Vec<f64> = (0..len).map(|_| gmxa::rng::gaussian(&mut rng) * 1e3).collect();
        let origin: Vec<f64> = shape.iter().map(|_| gmxa::rng::gaussian(&mut rng)).collect();
        let g = GridFunction::new(shape, origin, h, values).unwrap();
        let bytes = g.to_bytes();
        let back = GridFunction::from_bytes(&bytes).unwrap();
        prop_assert_eq!(back.to_bytes(), bytes);
        prop_assert_eq!(back, g);
    }

    #[test]
    fn truncated_grids_are_rejected(cut in 1usize..40) {
        let g = GridFunction::new(vec![2, 3], vec![0.0, 0.0], 0.5, vec![1.0; 6]).unwrap();
        let bytes = g.to_bytes();
        let cut = cut.min(bytes.len());
        prop_assert!(GridFunction::from_bytes(&bytes[..bytes.len() - cut]).is_err());
    }

    #[test]
    fn fits_recover_exact_models(slope in -3.0f64..3.0, c in 0.1f64..10.0) {
        let xs = [2.0f64, 4.0, 8.0, 16.0, 32.0];
        let power: Vec<(f64, f64)> = xs.iter().map(|&x| (x, c * x.powf(slope))).collect();
        let f = fit_scaling(&power, FitModel::Power).unwrap();
        prop_assert!((f.slope - slope).abs() < 1e-9 && (f.intercept - c.ln()).abs() < 1e-9);
        let log: Vec<(f64, f64)> = xs.iter().map(|&x| (x, 11.0 + c + slope * x.ln())).collect();
        let f = fit_scaling(&log, FitModel::Log).unwrap();
        prop_assert!((f.slope - slope).abs() < 1e-9);
        let sq: Vec<(f64, f64)> = xs.iter().map(|&x| (x, (c + slope.abs() * x.ln()).sqrt())).collect();
        let f = fit_scaling(&sq, FitModel::SqrtLog).unwrap();
        prop_assert!((f.slope - slope.abs()).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn low_and_high_parts_reconstruct_the_average(seed in any::<u64>(), s in 0.5f64..4.0, delta in 0.05f64..1.0) {
        let mut rng = seeded(seed);
        let values: Vec<f64> = (0..32 * 32).map(|_| gmxa::rng::gaussian(&mut rng)).collect();
        let f = GridFunction::new(vec![32, 32], vec![-4.0, -4.0], 0.25, values).unwrap();
        let sigma = Subspace::line(&unit_vector(&mut rng, 2)).unwrap();
        let a = fourier_average(&f, &sigma, s).unwrap();
        let (high, low) = low_high_split(&f, &sigma, s, delta).unwrap();
        let scale = a.values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        for i in 0..a.values.len() {
            prop_assert!((high.values[i] + low.values[i] - a.values[i]).abs() <= 1e-12 * scale);
        }
    }
}
