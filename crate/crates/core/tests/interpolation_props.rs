mod common;

use common::*;
use nalgebra::DVector;
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use sobolev_dfo::interpolation::{
    brute_force_p1, check_poisedness, lagrange_functions, radius_to_sigma, sigma_to_radius, solve_p1,
};
use sobolev_dfo::quadratic::{combine, h1_seminorm_sq};
use sobolev_dfo::{Ball, InterpolationSet, LeastNormSpec, QuadraticModel};

struct Instance {
    set: InterpolationSet,
    x0: DVector<f64>,
    center: DVector<f64>,
}

/// `m` points in the unit ball around a random center, values from a random quadratic.
fn instance(rng: &mut ChaCha8Rng, n: usize, underdetermined: bool) -> Instance {
    let full = (n + 1) * (n + 2) / 2;
    let m = if underdetermined { rng.random_range(n + 1..full) } else { rng.random_range(n + 1..=full) };
    let center = normal_vec(rng, n, 1.0);
    let points = points_in_ball(rng, m, &center, 1.0);
    let f = random_quadratic(rng, n);
    let values = points.iter().map(|p| f.evaluate(p).unwrap()).collect();
    let x0 = &center + normal_vec(rng, n, 0.3);
    Instance { set: InterpolationSet::new(points, values).unwrap(), x0, center }
}

fn sigma_strategy() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.0), (-3.0f64..3.0).prop_map(|e| 10f64.powf(e))]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn solutions_interpolate(seed in any::<u64>(), n in 1usize..5, sigma in sigma_strategy(), prior in any::<bool>()) {
        let mut rng = rng(seed);
        let inst = instance(&mut rng, n, false);
        let mut spec = LeastNormSpec::new(inst.x0.clone(), sigma);
        if prior {
            spec = spec.with_prior(random_quadratic(&mut rng, n));
        }
        let q = solve_p1(&inst.set, &spec).unwrap();
        let scale = 1.0 + max_abs(inst.set.values());
        for (y, f) in inst.set.points().iter().zip(inst.set.values()) {
            prop_assert!((q.evaluate(y).unwrap() - f).abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn agrees_with_brute_force(seed in any::<u64>(), n in 1usize..5, sigma in sigma_strategy()) {
        let mut rng = rng(seed);
        let inst = instance(&mut rng, n, false);
        let spec = LeastNormSpec::new(inst.x0.clone(), sigma).with_prior(random_quadratic(&mut rng, n));
        let a = solve_p1(&inst.set, &spec).unwrap();
        let b = brute_force_p1(&inst.set, &spec).unwrap();
        prop_assert!(coeff_distance(&a, &b) <= 1e-8, "distance {}", coeff_distance(&a, &b));
    }

    #[test]
    fn least_seminorm_among_interpolants(seed in any::<u64>(), n in 1usize..5, e in -2.0f64..2.0) {
        let mut rng = rng(seed);
        let inst = instance(&mut rng, n, true);
        let sigma = 10f64.powf(e);
        let q = solve_p1(&inst.set, &LeastNormSpec::new(inst.x0.clone(), sigma)).unwrap();
        let ball = Ball::new(inst.x0.clone(), sigma_to_radius(sigma, n).unwrap()).unwrap();
        // A quadratic vanishing at every point: r minus its own interpolant.
        let r = random_quadratic(&mut rng, n);
        let rv = inst.set.points().iter().map(|p| r.evaluate(p).unwrap()).collect();
        let fit = solve_p1(&inst.set.with_values(rv).unwrap(), &LeastNormSpec::new(inst.center.clone(), 1.0)).unwrap();
        let direction = combine(1.0, &r, -1.0, &fit).unwrap();
        let best = h1_seminorm_sq(&q, &ball).unwrap();
        for t in [-1.0, -0.01, 0.01, 1.0] {
            let other = combine(1.0, &q, t, &direction).unwrap();
            prop_assert!(h1_seminorm_sq(&other, &ball).unwrap() >= best - 1e-10 * (1.0 + best));
        }
    }

    #[test]
    fn solution_is_linear_in_lagrange_functions(seed in any::<u64>(), n in 1usize..5, sigma in sigma_strategy()) {
        let mut rng = rng(seed);
        let inst = instance(&mut rng, n, false);
        let prior = random_quadratic(&mut rng, n);
        let spec = LeastNormSpec::new(inst.x0.clone(), sigma).with_prior(prior.clone());
        let q = solve_p1(&inst.set, &spec).unwrap();
        let ls = lagrange_functions(inst.set.points(), &inst.x0, sigma).unwrap();
        let mut expanded = prior.rebase(&inst.x0).unwrap();
        for ((l, y), f) in ls.iter().zip(inst.set.points()).zip(inst.set.values()) {
            expanded = combine(1.0, &expanded, f - prior.evaluate(y).unwrap(), l).unwrap();
        }
        prop_assert!(coeff_distance(&q, &expanded) <= 1e-9, "distance {}", coeff_distance(&q, &expanded));
    }

    #[test]
    fn large_balls_approach_the_minimum_frobenius_solution(seed in any::<u64>(), n in 2usize..5) {
        let mut rng = rng(seed);
        let inst = instance(&mut rng, n, true);
        let limit = solve_p1(&inst.set, &LeastNormSpec::new(inst.x0.clone(), 0.0)).unwrap();
        let sigma = radius_to_sigma(1e5, n).unwrap();
        let q = solve_p1(&inst.set, &LeastNormSpec::new(inst.x0.clone(), sigma)).unwrap();
        prop_assert!(coeff_distance(&q, &limit) <= 1e-6);
    }

    #[test]
    fn linear_rank_is_bounded(seed in any::<u64>(), n in 1usize..6, m in 2usize..10) {
        let mut rng = rng(seed);
        let center = normal_vec(&mut rng, n, 1.0);
        let set = InterpolationSet::from_points(points_in_ball(&mut rng, m, &center, 1.0)).unwrap();
        let report = check_poisedness(&set).unwrap();
        prop_assert!(report.linear_rank <= n.min(m - 1));
        prop_assert_eq!(report.poised_linear, report.linear_rank == n);
    }
}

#[test]
fn zero_model_needs_no_correction() {
    let points = vec![DVector::from_vec(vec![0.0, 0.0]), DVector::from_vec(vec![1.0, 0.0]), DVector::from_vec(vec![0.0, 1.0])];
    let prior = QuadraticModel::zero(DVector::zeros(2));
    let set = InterpolationSet::from_points(points).unwrap();
    let q = solve_p1(&set, &LeastNormSpec::new(DVector::zeros(2), 1.0).with_prior(prior.clone())).unwrap();
    assert_eq!(coeff_distance(&q, &prior), 0.0);
}
