//! Grid-based Bayesian inference: likelihoods, posteriors, point estimates and moments.
//!
//! Likelihoods are accumulated in log space and shifted by their maximum
//! before exponentiation; hundreds of factors near 1/4 would otherwise
//! underflow. All integrals use the trapezoid rule on the grid.

mod grid;
mod joint;
mod posterior;

pub use grid::ParameterGrid;
pub use joint::{marginal, posterior_2d, JointPosterior};
pub use posterior::{
    bayes_estimate, central_abs_moment, log_likelihood, posterior, posterior_draw,
    posterior_from_table, posterior_variance, LikelihoodTable, Posterior, MIN_RESULTANT,
};

pub use crate::model::Sample;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::information::{fisher_information, gaussian_abs_moment};
    use crate::model::{sample_outcomes, DiscreteModel, NoonPhaseModel, TwoParamNoonModel};
    use alloc::vec;
    use alloc::vec::Vec;
    use core::f64::consts::PI;
    use proptest::prelude::*;

    fn noon(v: f64) -> NoonPhaseModel {
        NoonPhaseModel::new(v).unwrap()
    }

    fn gaussian_posterior(sigma: f64, center: f64, half_width: f64, points: usize) -> Posterior {
        let grid = ParameterGrid::new(center - half_width, center + half_width, points).unwrap();
        let w = grid
            .nodes()
            .map(|x| (-(x - center) * (x - center) / (2.0 * sigma * sigma)).exp())
            .collect();
        Posterior::from_weights(grid, w).unwrap()
    }

    fn delta(grid: ParameterGrid, at: usize) -> Posterior {
        let mut w = vec![0.0; grid.len()];
        w[at] = 1.0;
        Posterior::from_weights(grid, w).unwrap()
    }

    #[test]
    fn log_likelihood_examples() {
        let m = noon(0.9);
        assert_eq!(log_likelihood(&m, &Sample::empty(4), &[0.4]).unwrap(), 0.0);
        let one = Sample::from_outcomes(vec![2], 4).unwrap();
        let l = log_likelihood(&noon(0.0), &one, &[1.0]).unwrap();
        assert!((l - 0.25f64.ln()).abs() < 1e-15);

        // brute-force oracle: log of the product over the expanded outcome list
        let sample = Sample::from_histogram(vec![3, 1, 2, 4]);
        let mut shuffled = sample.outcomes().to_vec();
        shuffled.reverse();
        shuffled.swap(1, 7);
        for phi in [0.1, 0.2, 1.3, 2.9] {
            let product: f64 = shuffled
                .iter()
                .map(|&k| 0.25 * (1.0 + 0.9 * (2.0 * phi - k as f64 * PI / 2.0).cos()))
                .product();
            let l = log_likelihood(&m, &sample, &[phi]).unwrap();
            assert!((l - product.ln()).abs() < 1e-12);
        }
        assert!(log_likelihood(&m, &Sample::empty(3), &[0.1]).is_err());
    }

    #[test]
    fn zero_probability_gives_negative_infinity() {
        let m = noon(1.0);
        // p(2|0) = 0 at unit visibility
        let s = Sample::from_outcomes(vec![2], 4).unwrap();
        assert_eq!(log_likelihood(&m, &s, &[0.0]).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn empty_sample_gives_uniform_posterior() {
        let grid = ParameterGrid::noon_phase(257).unwrap();
        let p = posterior(&noon(0.9), &Sample::empty(4), grid, None).unwrap();
        let expected = 1.0 / PI;
        assert!(p.weights().iter().all(|w| (w - expected).abs() < 1e-12));
        assert!((p.bayes_estimate() - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn single_outcome_posterior_follows_the_likelihood() {
        let m = noon(0.9);
        let grid = ParameterGrid::new(0.0, PI, 301).unwrap();
        let p = posterior(&m, &Sample::from_outcomes(vec![1], 4).unwrap(), grid, None).unwrap();
        let ratio0 = p.weights()[0] / m.prob_unchecked(1, &[0.0]);
        for (i, x) in grid.nodes().enumerate() {
            let r = p.weights()[i] / m.prob_unchecked(1, &[x]);
            assert!((r - ratio0).abs() < 1e-10 * ratio0);
        }
    }

    #[test]
    fn prior_is_applied_and_validated() {
        let grid = ParameterGrid::new(0.0, 1.0, 11).unwrap();
        let t =
            crate::model::TabulatedModel::new(vec![0.0, 1.0], vec![vec![0.5, 0.5], vec![0.5, 0.5]])
                .unwrap();
        let prior: Vec<f64> = grid.nodes().collect();
        let p = posterior(&t, &Sample::empty(2), grid, Some(&prior)).unwrap();
        // trapezoid rule on 11 nodes: ∫x² = 0.335, ∫x = 0.5
        assert!((p.bayes_estimate() - 0.67).abs() < 1e-12);
        assert!(posterior(&t, &Sample::empty(2), grid, Some(&[1.0; 3])).is_err());
        assert!(posterior(&t, &Sample::empty(2), grid, Some(&[0.0; 11])).is_err());
        let mut negative = vec![1.0; 11];
        negative[3] = -1.0;
        assert!(posterior(&t, &Sample::empty(2), grid, Some(&negative)).is_err());
    }

    #[test]
    fn degenerate_posterior_is_reported() {
        let grid = ParameterGrid::new(0.0, 1.0, 5).unwrap();
        let r = Posterior::from_log_weights(grid, &[f64::NEG_INFINITY; 5]);
        assert_eq!(r, Err(crate::Error::DegeneratePosterior));
        let t =
            crate::model::TabulatedModel::new(vec![0.0, 1.0], vec![vec![1.0, 0.0], vec![1.0, 0.0]])
                .unwrap();
        let s = Sample::from_outcomes(vec![1], 2).unwrap();
        assert_eq!(
            posterior(&t, &s, grid, None),
            Err(crate::Error::DegeneratePosterior)
        );
    }

    #[test]
    fn variance_near_crb_for_a_typical_run() {
        let m = noon(0.9);
        let grid = ParameterGrid::noon_phase(2048).unwrap();
        let s = sample_outcomes(&m, &[0.2], 450, 11).unwrap();
        let p = posterior(&m, &s, grid, None).unwrap();
        let crb = 1.0 / (450.0 * fisher_information(&m, &[0.2], 0).unwrap());
        assert!(
            (p.variance() / crb - 1.0).abs() < 0.25,
            "{}",
            p.variance() / crb
        );
    }

    #[test]
    fn point_estimates_of_symmetric_posteriors() {
        let grid = ParameterGrid::new(0.0, PI, 1001).unwrap();
        assert!((Posterior::uniform(grid).bayes_estimate() - PI / 2.0).abs() < 1e-12);
        let grid = ParameterGrid::new(0.0, 1.0, 1001).unwrap();
        let w = grid
            .nodes()
            .map(|x| (0.2 - (x - 0.3).abs()).max(0.0))
            .collect();
        let p = Posterior::from_weights(grid, w).unwrap();
        assert!((p.bayes_estimate() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn delta_posteriors_have_no_spread() {
        for grid in [
            ParameterGrid::new(0.0, 1.0, 101).unwrap(),
            ParameterGrid::noon_phase(101).unwrap(),
        ] {
            let p = delta(grid, 37);
            assert!((p.bayes_estimate() - grid.node(37)).abs() < 1e-12);
            assert!(p.variance() < 1e-15);
            for beta in [1.5, 2.0, 3.0, 5.0] {
                assert!(p.central_abs_moment(p.bayes_estimate(), beta).unwrap() < 1e-15);
            }
            for seed in 0..50 {
                assert_eq!(p.draw(seed), grid.node(37));
            }
        }
    }

    #[test]
    fn gaussian_moments() {
        let sigma = 0.02;
        let p = gaussian_posterior(sigma, 0.0, 0.3, 6001);
        assert!((p.variance() / (sigma * sigma) - 1.0).abs() < 1e-3);
        let center = p.bayes_estimate();
        let var = p.variance();
        let m2 = p.central_abs_moment(center, 2.0).unwrap();
        assert!((m2 - var).abs() < 1e-10);
        for beta in [3.0, 4.0, 5.0] {
            let expected = gaussian_abs_moment(sigma * sigma, beta).unwrap();
            let got = p.central_abs_moment(center, beta).unwrap();
            assert!((got / expected - 1.0).abs() < 5e-3, "beta={beta}");
        }
        assert!(p.central_abs_moment(center, 1.0).is_err());
        assert!(p.skewness().abs() < 1e-9);
        assert!(p.excess_kurtosis().abs() < 1e-6);
    }

    #[test]
    fn variance_matches_second_moment_on_periodic_grids() {
        let m = noon(0.9);
        let grid = ParameterGrid::noon_phase(1024).unwrap();
        for seed in 0..20 {
            let s = sample_outcomes(
                &m,
                &[0.02 + 0.15 * seed as f64],
                30 + 10 * seed as usize,
                seed,
            )
            .unwrap();
            let p = posterior(&m, &s, grid, None).unwrap();
            let c = p.bayes_estimate();
            assert!((p.central_abs_moment(c, 2.0).unwrap() - p.variance()).abs() < 1e-10);
        }
    }

    #[test]
    fn wrapped_posterior_is_integrated_as_one_bump() {
        // Gaussian bump centered on the seam of a periodic grid
        let grid = ParameterGrid::noon_phase(2049).unwrap();
        let sigma = 0.05;
        let w = grid
            .nodes()
            .map(|x| {
                let d = crate::math::wrap_symmetric(x - 0.01, PI);
                (-d * d / (2.0 * sigma * sigma)).exp()
            })
            .collect();
        let p = Posterior::from_weights(grid, w).unwrap();
        assert!((p.bayes_estimate() - 0.01).abs() < 1e-9);
        assert!((p.variance() / (sigma * sigma) - 1.0).abs() < 1e-6);
        let w = grid
            .nodes()
            .map(|x| {
                let d = crate::math::wrap_symmetric(x - (PI - 0.02), PI);
                (-d * d / (2.0 * sigma * sigma)).exp()
            })
            .collect();
        let p = Posterior::from_weights(grid, w).unwrap();
        assert!((p.bayes_estimate() - (PI - 0.02)).abs() < 1e-9);
        let moment = p.central_abs_moment(-0.02, 4.0).unwrap();
        assert!((moment / (3.0 * sigma.powi(4)) - 1.0).abs() < 1e-5);
    }

    #[test]
    fn uniform_draws_pass_kolmogorov_smirnov() {
        let grid = ParameterGrid::new(0.0, PI, 2048).unwrap();
        let p = Posterior::uniform(grid);
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(99);
        let n = 100_000;
        let mut draws: Vec<f64> = (0..n).map(|_| p.draw_with(&mut rng)).collect();
        draws.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let d = draws
            .iter()
            .enumerate()
            .map(|(i, x)| {
                let f = x / PI;
                (f - i as f64 / n as f64)
                    .abs()
                    .max(((i + 1) as f64 / n as f64 - f).abs())
            })
            .fold(0.0, f64::max);
        // 1% critical value of the one-sample KS statistic
        assert!(d < 1.628 / (n as f64).sqrt(), "D = {d}");
    }

    #[test]
    fn draws_are_deterministic_and_avoid_empty_gaps() {
        let grid = ParameterGrid::new(0.0, 1.0, 11).unwrap();
        let p = Posterior::uniform(grid);
        assert_eq!(posterior_draw(&p, 5), posterior_draw(&p, 5));
        let mut w = vec![0.0; 11];
        w[2] = 1.0;
        w[8] = 1.0;
        let p = Posterior::from_weights(grid, w).unwrap();
        for seed in 0..200 {
            let x = p.draw(seed);
            assert!(x == grid.node(2) || x == grid.node(8), "{x}");
        }
    }

    #[test]
    fn joint_posterior_basics() {
        let phases = ParameterGrid::noon_phase(64).unwrap();
        let vis = ParameterGrid::visibility(16).unwrap();
        let j = posterior_2d(&TwoParamNoonModel, &Sample::empty(4), phases, vis, None).unwrap();
        let expected = 1.0 / PI;
        assert!(j.weights().iter().all(|w| (w - expected).abs() < 1e-12));
        assert!((j.mass() - 1.0).abs() < 1e-12);
        let m = j.marginal(0).unwrap();
        assert!(m.weights().iter().all(|w| (w - expected).abs() < 1e-12));
        assert!(j
            .marginal(1)
            .unwrap()
            .weights()
            .iter()
            .all(|w| (w - 1.0).abs() < 1e-12));
        assert!(j.marginal(2).is_err());
        assert!(posterior_2d(&noon(0.9), &Sample::empty(4), phases, vis, None).is_err());
    }

    #[test]
    fn separable_joint_marginal() {
        let a = ParameterGrid::new(-1.0, 1.0, 41).unwrap();
        let b = ParameterGrid::new(0.0, 2.0, 31).unwrap();
        let f = |x: f64| (-(x - 0.2) * (x - 0.2) / 0.1).exp();
        let g = |y: f64| 1.0 + y * y;
        let logw: Vec<f64> = a
            .nodes()
            .flat_map(|x| b.nodes().map(move |y| (f(x) * g(y)).ln()))
            .collect();
        let j = JointPosterior::from_log_weights(a, b, &logw).unwrap();
        let m = marginal(&j, 0).unwrap();
        let direct = Posterior::from_weights(a, a.nodes().map(f).collect()).unwrap();
        for (x, y) in m.weights().iter().zip(direct.weights()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn correlated_gaussian_marginal_mean() {
        // bivariate normal, means (0.4, -0.3), sds (0.1, 0.2), correlation 0.7
        let (mx, my, sx, sy, rho) = (0.4, -0.3, 0.1, 0.2, 0.7);
        let a = ParameterGrid::new(mx - 0.8, mx + 0.8, 401).unwrap();
        let b = ParameterGrid::new(my - 1.6, my + 1.6, 401).unwrap();
        let logw: Vec<f64> = a
            .nodes()
            .flat_map(|x| {
                b.nodes().map(move |y| {
                    let (u, v) = ((x - mx) / sx, (y - my) / sy);
                    -(u * u - 2.0 * rho * u * v + v * v) / (2.0 * (1.0 - rho * rho))
                })
            })
            .collect();
        let j = JointPosterior::from_log_weights(a, b, &logw).unwrap();
        let px = j.marginal(0).unwrap();
        let py = j.marginal(1).unwrap();
        assert!((px.bayes_estimate() / mx - 1.0).abs() < 1e-3);
        assert!((py.bayes_estimate() / my - 1.0).abs() < 1e-3);
        assert!((px.variance() / (sx * sx) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn joint_analysis_recovers_the_phase() {
        let model = TwoParamNoonModel;
        let s = sample_outcomes(&model, &[0.2, 0.9], 2000, 314).unwrap();
        let j = posterior_2d(
            &model,
            &s,
            ParameterGrid::noon_phase(1024).unwrap(),
            ParameterGrid::visibility(128).unwrap(),
            None,
        )
        .unwrap();
        let phi = j.marginal(0).unwrap();
        let sd = phi.variance().sqrt();
        assert!((phi.bayes_estimate() - 0.2).abs() < 3.0 * sd);
        let v = j.marginal(1).unwrap();
        assert!((v.bayes_estimate() - 0.9).abs() < 3.0 * v.variance().sqrt());
    }

    #[test]
    fn sequential_updates_match_batch_posterior() {
        let m = noon(0.9);
        let grid = ParameterGrid::noon_phase(512).unwrap();
        let first = sample_outcomes(&m, &[0.7], 60, 1).unwrap();
        let second = sample_outcomes(&m, &[0.7], 90, 2).unwrap();
        let batch = posterior(&m, &first.concat(&second).unwrap(), grid, None).unwrap();
        let step = posterior(&m, &first, grid, None)
            .unwrap()
            .updated(&m, &second)
            .unwrap();
        for (a, b) in batch.weights().iter().zip(step.weights()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn grid_doubling_moves_estimates_by_less_than_1e_6() {
        let m = noon(0.9);
        let s = sample_outcomes(&m, &[0.2], 450, 8).unwrap();
        let coarse = posterior(&m, &s, ParameterGrid::noon_phase(2048).unwrap(), None).unwrap();
        let fine = posterior(&m, &s, ParameterGrid::noon_phase(4096).unwrap(), None).unwrap();
        assert!((coarse.bayes_estimate() - fine.bayes_estimate()).abs() < 1e-6);
        assert!((coarse.variance() - fine.variance()).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn posteriors_are_normalized_and_order_invariant(
            outcomes in proptest::collection::vec(0usize..4, 0..200),
            seed in any::<u64>(),
        ) {
            let m = noon(0.8);
            let grid = ParameterGrid::noon_phase(256).unwrap();
            let s = Sample::from_outcomes(outcomes.clone(), 4).unwrap();
            let p = posterior(&m, &s, grid, None).unwrap();
            prop_assert!((p.mass() - 1.0).abs() < 1e-10);
            prop_assert!(p.weights().iter().all(|w| *w >= 0.0));

            let mut permuted = outcomes;
            let n = permuted.len();
            if n > 1 {
                let mut state = seed;
                for i in (1..n).rev() {
                    state = crate::math::splitmix64(state);
                    permuted.swap(i, (state % (i as u64 + 1)) as usize);
                }
            }
            let q = posterior(&m, &Sample::from_outcomes(permuted, 4).unwrap(), grid, None).unwrap();
            for (a, b) in p.weights().iter().zip(q.weights()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
