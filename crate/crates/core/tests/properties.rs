use std::sync::Arc;

use cbtest::asymptotics::{kernel_marginal, maxima_variance_direct, maxima_variance_identity};
use cbtest::empirical::{maxima_process, sym_rect_mass};
use cbtest::montecarlo::{critical_value, p_value, replicate_rng, simulate_values, EcdfTable, SimMeta};
use cbtest::quadrature::simpson;
use cbtest::statistics::{chain_values, product_linear_stat};
use cbtest::*;
use proptest::prelude::*;

fn weights() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..1.0f64, 5).prop_map(|w| {
        let w: Vec<f64> = w.into_iter().map(|x| x + 1e-3).collect();
        let total: f64 = w.iter().sum();
        w.into_iter().map(|x| x / total).collect()
    })
}

/// CDF `Σ wₖ x^k`, k = 1..=5.
fn poly_cdf(w: &[f64]) -> DistributionSpec {
    let mut coeffs = vec![0.0];
    coeffs.extend_from_slice(w);
    DistributionSpec::polynomial(&coeffs).unwrap()
}

fn null_sample(seed: u64, n: usize) -> LabeledSample {
    sample_null(&DistributionSpec::uniform(), n, &mut replicate_rng(seed, 0))
}

fn warp(s: &LabeledSample, f: impl Fn(f64) -> f64) -> LabeledSample {
    LabeledSample::new(s.pairs().iter().map(|&(x, y)| (f(x), f(y))).collect()).unwrap()
}

fn meta() -> SimMeta {
    SimMeta {
        statistic: "x".into(),
        model: "y".into(),
        n: 1,
        reps: 1,
        seed: 0,
        grid: 2,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rank_statistics_ignore_monotone_maps(seed in 0u64..10_000, n in 2usize..60) {
        let s = null_sample(seed, n);
        let w = warp(&s, |x| 0.5 * (x + x * x));
        prop_assert_eq!(ks_colour_blind(&blind(&s)), ks_colour_blind(&blind(&w)));
        prop_assert_eq!(ks_full(&s), ks_full(&w));
        prop_assert_eq!(cross_probability(&blind(&s)).unwrap(), cross_probability(&blind(&w)).unwrap());
    }

    #[test]
    fn chain_is_ordered(a in 0.0..=1.0f64, b in 0.0..=1.0f64) {
        let (lo, mid, hi) = chain_values(a, b);
        prop_assert!(lo <= mid && mid <= hi);
        let (lo, mid, hi) = chain_values(a, a);
        prop_assert!((lo - mid).abs() < 1e-12 && (mid - hi).abs() < 1e-12);
    }

    #[test]
    fn pair_direction_recovers_densities(w1 in weights(), w2 in weights(), x in 0.0..=1.0f64) {
        let (a1, a2) = (poly_cdf(&w1), poly_cdf(&w2));
        let alt = direction_from_pair(&a1, &a2).unwrap();
        prop_assert!((alt.coordinate_density(1.0, x) - a1.density(x)).abs() < 1e-10);
        prop_assert!((alt.coordinate_density(-1.0, x) - a2.density(x)).abs() < 1e-10);
    }

    #[test]
    fn direction_integrates_to_zero(w1 in weights(), w2 in weights()) {
        let alt = direction_from_pair(&poly_cdf(&w1), &poly_cdf(&w2)).unwrap();
        let q = alt.base().clone();
        for sign in [1.0, -1.0] {
            let mass = simpson(&|x: f64| (1.0 + sign * alt.epsilon() * alt.h(x)) * q.density(x), 0.0, 1.0, 1024).unwrap();
            prop_assert!((mass - 1.0).abs() < 1e-8, "{mass}");
        }
    }

    #[test]
    fn inverse_cdf_roundtrip(w in weights(), x in 0.001..0.999f64) {
        let d = poly_cdf(&w);
        let back = inverse_cdf(&d, d.cdf(x)).unwrap();
        prop_assert!((back - x).abs() < 1e-8, "{back} vs {x}");
    }

    #[test]
    fn symmetric_rectangles(seed in 0u64..10_000, n in 1usize..40, u in 0.0..=1.0f64, frac in 0.0..=1.0f64, du in 0.0..0.5f64) {
        let s = blind(&null_sample(seed, n));
        let v = u * frac;
        let m = sym_rect_mass(&s, u, v).unwrap();
        prop_assert!(sym_rect_mass(&s, (u + du).min(1.0), v).unwrap() >= m);
        prop_assert!(sym_rect_mass(&s, u, (v + du).min(u)).unwrap() >= m);
        prop_assert!((process_rs(&s, u, u).unwrap() - maxima_process(&s, u)).abs() < 1e-12);
    }

    #[test]
    fn pooled_edf_matches_qn(seed in 0u64..10_000, n in 1usize..40) {
        let s = blind(&null_sample(seed, n));
        let pooled = s.pooled().to_vec();
        for &t in &pooled {
            let count = pooled.iter().filter(|&&x| x <= t).count();
            prop_assert_eq!(s.qn(t), count as f64 / (2 * n) as f64);
        }
        prop_assert!(pooled.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(s.pairs().iter().all(|&(u, v)| v <= u));
    }

    #[test]
    fn product_kernel_paths_agree(seed in 0u64..10_000, n in 1usize..40, c in -2.0..2.0f64) {
        let s = blind(&null_sample(seed, n));
        let h: RealFn = Arc::new(move |x| c + x * x - 0.5);
        let quad = linear_stat(&s, &SymmetricKernel::product(h.clone())).unwrap();
        let lin = product_linear_stat(&s, |x| h(x));
        prop_assert!((quad - lin).abs() <= 1e-12 * (1.0 + lin.abs()), "{quad} vs {lin}");
    }

    #[test]
    fn projection_has_vanishing_marginals(c in -1.0..1.0f64, d in -1.0..1.0f64, x in 0.0..=1.0f64) {
        let q = DistributionSpec::uniform_square_mix();
        let h: RealFn = Arc::new(move |t| c + d * t + t * t);
        let proj = project_lstar(&SymmetricKernel::product(h), &q);
        prop_assert!(kernel_marginal(&proj, &q, x).abs() < 1e-6);
    }

    #[test]
    fn ecdf_table_invariants(mut values in prop::collection::vec(-5.0..5.0f64, 1..200), obs in -6.0..6.0f64) {
        values.sort_by(f64::total_cmp);
        let t = EcdfTable::from_values(values, meta()).unwrap();
        let probs: Vec<f64> = t.probabilities().collect();
        prop_assert!(probs.windows(2).all(|w| w[0] < w[1]));
        prop_assert_eq!(*probs.last().unwrap(), 1.0);
        let mut prev = f64::NEG_INFINITY;
        for level in [0.5, 0.2, 0.1, 0.05, 0.01] {
            let c = critical_value(&t, level).unwrap();
            prop_assert!(c >= prev);
            prev = c;
        }
        let p = p_value(&t, obs);
        prop_assert!(p > 0.0 && p <= 1.0);
    }

    #[test]
    fn shift_surfaces_vanish_on_boundary(c in -0.9..0.9f64, u in 0.0..=1.0f64) {
        let alt = EqualityAlternative::uniform_vs_square().with_epsilon(0.5).unwrap();
        let s = shift_equality(&alt, 400);
        prop_assert!(s.eval(u, 0.0).abs() < 1e-9);
        prop_assert!(s.eval(1.0, 1.0).abs() < 1e-9);
        let dep = DependenceAlternative::product(DistributionSpec::uniform(), 1.0, c.abs()).unwrap();
        let s = shift_dependence(&dep, 400);
        prop_assert!(s.eval(u, 0.0).abs() < 1e-9);
        prop_assert!(s.eval(1.0, 1.0).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn variance_identity_for_polynomial_weights(a in -1.0..1.0f64, b in -1.0..1.0f64, c in -1.0..1.0f64, mix in any::<bool>()) {
        let q = if mix { DistributionSpec::uniform_square_mix() } else { DistributionSpec::uniform() };
        let alpha: RealFn = Arc::new(move |x| a + b * x + c * x * x * x);
        let direct = maxima_variance_direct(&alpha, &q);
        let identity = maxima_variance_identity(&alpha, &q).unwrap();
        prop_assert!((direct - identity).abs() <= 1e-6 * direct.abs().max(1e-12), "{direct} vs {identity}");
    }

    #[test]
    fn simulation_ignores_worker_count(seed in any::<u64>(), workers in 2usize..5) {
        let cfg = SimConfig::new(Statistic::KsSym, Model::Null(DistributionSpec::uniform()), 30, 40, seed)
            .with_workers(1);
        let many = cfg.clone().with_workers(workers);
        prop_assert_eq!(simulate_values(&cfg).unwrap(), simulate_values(&many).unwrap());
    }
}
