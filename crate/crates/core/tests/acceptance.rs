//! Acceptance checks, one line per criterion.
//!
//! Runs as a plain binary so the report is printed under `cargo test`.
//! Pass criterion numbers as arguments to run a subset.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use cbtest::asymptotics::snr_linear;
use cbtest::dist::{q_direction, sample_null, DistributionSpec, EqualityAlternative, RealFn};
use cbtest::empirical::{blind, maxima_process, pillow_decomposition, process_rs, LabeledSample};
use cbtest::montecarlo::{
    critical_value_tail, rejection_rate, run_replicates, simulate, simulate_values, Model, SimConfig, Statistic, Tail,
};
use cbtest::statistics::{chain_values, cross_probability, inequality_chain, snr_maxima};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

type Check = fn() -> Outcome;

fn main() {
    let wanted: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let checks: [(usize, &str, u64, Check); 12] = [
        (1, "cross probability is 5/6 under the null", 10, c01_cross_probability),
        (2, "inequality chain lo <= mid <= hi", 30, c02_inequality_chain),
        (
            3,
            "exact pillow decomposition of the colour-blind process",
            60,
            c03_decomposition,
        ),
        (4, "optimal linear statistic SNR at n = 400", 1, c04_linear_snr),
        (5, "maxima statistic variance, shift and SNR", 300, c05_maxima_numbers),
        (6, "Brownian pillow covariance", 300, c06_pillow_covariance),
        (7, "maxima process covariance", 120, c07_maxima_covariance),
        (
            8,
            "distribution-freeness of the colour-blind KS null",
            600,
            c08_distribution_free,
        ),
        (
            9,
            "colour-blind KS stochastically smaller than full KS",
            900,
            c09_stochastic_order,
        ),
        (10, "size and power ordering at n = 500", 1200, c10_size_and_power),
        (11, "rate separation n^-1/4 vs n^-1/2", 900, c11_rate_separation),
        (12, "determinism across worker counts", 60, c12_determinism),
    ];
    let mut failures = 0;
    let mut ran = 0;
    for (id, name, budget, check) in checks {
        if !wanted.is_empty() && !wanted.contains(&id) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check));
        let elapsed = start.elapsed();
        let (pass, detail) = match result {
            Ok(o) => (o.pass, o.detail),
            Err(e) => {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                (false, format!("panicked: {msg}"))
            }
        };
        let in_time = elapsed <= Duration::from_secs(budget);
        let ok = pass && in_time;
        if !ok {
            failures += 1;
        }
        println!(
            "[{}] criterion {id:>2}: {name}: {detail} ({:.1} s, budget {budget} s{})",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            if in_time { "" } else { ", over budget" }
        );
    }
    println!("acceptance: {} of {ran} criteria passed", ran - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}

fn mix() -> DistributionSpec {
    DistributionSpec::uniform_square_mix()
}

fn example_alt() -> EqualityAlternative {
    EqualityAlternative::uniform_vs_square()
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, var.sqrt())
}

/// Sample covariance and its Monte Carlo standard error.
fn covariance_with_se(a: &[f64], b: &[f64]) -> (f64, f64) {
    let (ma, _) = mean_sd(a);
    let (mb, _) = mean_sd(b);
    let prods: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).collect();
    let (c, sd) = mean_sd(&prods);
    (c, sd / (prods.len() as f64).sqrt())
}

/// Two-sample KS distance between sorted samples.
fn ks_distance(a: &[f64], b: &[f64]) -> f64 {
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

fn c01_cross_probability() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let s = blind(&sample_null(&DistributionSpec::uniform(), 1_000_000, &mut rng));
    let p = cross_probability(&s).unwrap();
    let dev = (p - 5.0 / 6.0).abs();
    outcome(dev <= 0.002, format!("estimate {p:.6}, |error| {dev:.2e} <= 2e-3"))
}

fn c02_inequality_chain() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let random_cdf = |rng: &mut ChaCha8Rng| {
        let degree = rng.random_range(1..=5);
        let mut c = vec![0.0];
        c.extend((0..degree).map(|_| rng.random::<f64>()));
        let total: f64 = c.iter().sum();
        c.iter_mut().for_each(|a| *a /= total);
        let fix = 1.0 - c.iter().sum::<f64>();
        *c.last_mut().unwrap() += fix;
        DistributionSpec::polynomial(&c).unwrap()
    };
    let (mut violations, mut raw_violations, mut null_violations) = (0, 0, 0);
    for _ in 0..10_000 {
        let p1 = random_cdf(&mut rng);
        let p2 = random_cdf(&mut rng);
        for k in 0..=100 {
            let x = k as f64 / 100.0;
            let (lo, mid, hi) = inequality_chain(&p1, &p2, x).unwrap();
            if lo > mid + 1e-12 || mid > hi + 1e-12 {
                violations += 1;
            }
            // The closed forms themselves, without the library's rounding guard.
            let (a, b) = (p1.cdf(x), p2.cdf(x));
            let r = 1.0 - ((1.0 - a) * (1.0 - b)).sqrt();
            if a * b > (0.5 * (a + b)).powi(2) + 1e-12 || (0.5 * (a + b)).powi(2) > r * r + 1e-12 {
                raw_violations += 1;
            }
            let (l, m, h) = chain_values(a, a);
            if (l - m).abs() > 1e-12 || (m - h).abs() > 1e-12 || (l - a * a).abs() > 1e-12 {
                null_violations += 1;
            }
        }
    }
    outcome(
        violations + raw_violations + null_violations == 0,
        format!(
            "1.01e6 points: {violations} ordering, {raw_violations} closed-form, {null_violations} equal-case violations"
        ),
    )
}

fn c03_decomposition() -> Outcome {
    let q = mix();
    let mut worst = 0.0f64;
    let mut points = 0usize;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(300 + seed);
        let s = sample_null(&q, 50, &mut rng);
        let cb = blind(&s);
        let mut grid = vec![0.0];
        grid.extend_from_slice(cb.pooled());
        grid.push(1.0);
        for (a, &u) in grid.iter().enumerate() {
            for &v in &grid[..=a] {
                let rs = process_rs(&cb, u, v).unwrap();
                let (z, r) = pillow_decomposition(&s, &q, u, v).unwrap();
                worst = worst.max((rs - (z - r)).abs());
                points += 1;
            }
        }
    }
    outcome(
        worst <= 1e-10,
        format!("max |Rs - (z(S) - r(S))| = {worst:.2e} over {points} points (residual enters with a minus sign)"),
    )
}

fn c04_linear_snr() -> Outcome {
    let t = snr_linear(&example_alt(), 400).unwrap();
    outcome(
        (t - 1.972).abs() <= 0.005,
        format!("T = {t:.5}, target 1.972 +/- 0.005"),
    )
}

fn c05_maxima_numbers() -> Outcome {
    let alt = example_alt();
    let q = q_direction(&alt);
    let r = snr_maxima(&q, &alt, 400).unwrap();
    let cfg = SimConfig::new(
        Statistic::Maxima {
            label: "q".into(),
            alpha: q.clone(),
        },
        Model::Equality(alt),
        400,
        100_000,
        505,
    );
    let values = simulate_values(&cfg).unwrap();
    let (m, sd) = mean_sd(&values);
    let shift = m.abs() / 20.0;
    let ok_var = (r.variance - 0.0030).abs() <= 0.0002;
    let ok_shift = (0.0046..=0.0050).contains(&shift);
    let ok_snr = (r.snr - 1.74).abs() <= 0.03;
    outcome(
        ok_var && ok_shift && ok_snr,
        format!(
            "variance {:.5}, MC |shift|/sqrt(n) {shift:.5} (se {:.1e}), quadrature {:.5}, SNR {:.4}",
            r.variance,
            sd / (values.len() as f64).sqrt() / 20.0,
            r.inner,
            r.snr
        ),
    )
}

fn c06_pillow_covariance() -> Outcome {
    let q = mix();
    let pairs: [((f64, f64), (f64, f64)); 5] = [
        ((0.3, 0.4), (0.6, 0.7)),
        ((0.5, 0.5), (0.5, 0.5)),
        ((0.2, 0.8), (0.7, 0.3)),
        ((0.9, 0.1), (0.4, 0.6)),
        ((0.25, 0.25), (0.75, 0.75)),
    ];
    let points: Vec<(f64, f64)> = pairs
        .iter()
        .flat_map(|&(a, b)| [a, b])
        .map(|(s, t)| (q.quantile(s), q.quantile(t)))
        .collect();
    let n = 2000;
    let reps = 20_000;
    let zq = q.clone();
    let rows = run_replicates(
        reps,
        606,
        None,
        || (),
        |_, _, rng| {
            let s = sample_null(&zq, n, rng);
            Ok(pillow_values(&s, &zq, &points))
        },
    )
    .unwrap();
    let mut worst = 0.0f64;
    let mut ok = true;
    for (k, &((s1, t1), (s2, t2))) in pairs.iter().enumerate() {
        let a: Vec<f64> = rows.iter().map(|r| r[2 * k]).collect();
        let b: Vec<f64> = rows.iter().map(|r| r[2 * k + 1]).collect();
        let (c, se) = covariance_with_se(&a, &b);
        let want = (s1.min(s2) - s1 * s2) * (t1.min(t2) - t1 * t2);
        let z = (c - want).abs() / se;
        worst = worst.max(z);
        ok &= z <= 3.0;
    }
    outcome(ok, format!("5 pairs, worst deviation {worst:.2} MC standard errors"))
}

/// `zₙ` at several points in one pass over the sample.
fn pillow_values(s: &LabeledSample, q: &DistributionSpec, points: &[(f64, f64)]) -> Vec<f64> {
    let n = s.n() as f64;
    points
        .iter()
        .map(|&(x, y)| {
            let (mut both, mut first, mut second) = (0usize, 0usize, 0usize);
            for &(a, b) in s.pairs() {
                let (ia, ib) = (a <= x, b <= y);
                both += (ia && ib) as usize;
                first += ia as usize;
                second += ib as usize;
            }
            let (qx, qy) = (q.cdf(x), q.cdf(y));
            let v = |p: f64, truth: f64| n.sqrt() * (p - truth);
            let vxy = v(both as f64 / n, qx * qy);
            let vx1 = v(first as f64 / n, qx);
            let v1y = v(second as f64 / n, qy);
            vxy - qx * v1y - qy * vx1
        })
        .collect()
}

fn c07_maxima_covariance() -> Outcome {
    let q = DistributionSpec::uniform();
    let pairs = [(0.3, 0.6), (0.5, 0.5), (0.1, 0.9), (0.4, 0.8), (0.7, 0.75)];
    let zq = q.clone();
    let rows = run_replicates(
        10_000,
        707,
        None,
        || (),
        |_, _, rng| {
            let s = blind(&sample_null(&zq, 1000, rng));
            Ok(pairs
                .iter()
                .flat_map(|&(v, u)| [maxima_process(&s, v), maxima_process(&s, u)])
                .collect::<Vec<f64>>())
        },
    )
    .unwrap();
    let mut worst = 0.0f64;
    for (k, &(v, u)) in pairs.iter().enumerate() {
        let a: Vec<f64> = rows.iter().map(|r| r[2 * k]).collect();
        let b: Vec<f64> = rows.iter().map(|r| r[2 * k + 1]).collect();
        let (c, se) = covariance_with_se(&a, &b);
        let want = (v * v) * (1.0 - u) * (1.0 - u);
        worst = worst.max((c - want).abs() / se);
    }
    outcome(
        worst <= 3.0,
        format!("5 pairs, worst deviation {worst:.2} MC standard errors"),
    )
}

fn c08_distribution_free() -> Outcome {
    let reps = 10_000;
    let a = simulate(&SimConfig::new(
        Statistic::KsSym,
        Model::Null(DistributionSpec::uniform()),
        500,
        reps,
        801,
    ))
    .unwrap();
    let b = simulate(&SimConfig::new(Statistic::KsSym, Model::Null(mix()), 500, reps, 802)).unwrap();
    let d = ks_distance(a.values(), b.values());
    let r = reps as f64;
    let crit = (-(0.005f64).ln() / 2.0).sqrt() * (2.0 / r).sqrt();
    outcome(
        d < crit,
        format!("two-sample KS distance {d:.4} < 1% critical value {crit:.4}"),
    )
}

fn c09_stochastic_order() -> Outcome {
    let q = DistributionSpec::uniform();
    let sym = simulate(&SimConfig::new(
        Statistic::KsSym,
        Model::Null(q.clone()),
        1000,
        10_000,
        909,
    ))
    .unwrap();
    let full = simulate(&SimConfig::new(Statistic::KsFull, Model::Null(q), 1000, 10_000, 909)).unwrap();
    let mut pooled: Vec<f64> = sym.values().iter().chain(full.values()).copied().collect();
    pooled.sort_unstable_by(f64::total_cmp);
    let mut ok = true;
    let mut min_gap = f64::INFINITY;
    for d in 1..=9 {
        let x = pooled[d * pooled.len() / 10];
        let gap = sym.ecdf(x) - full.ecdf(x);
        min_gap = min_gap.min(gap);
        ok &= gap >= 0.0;
    }
    let median = pooled[pooled.len() / 2];
    let slack = sym.ecdf(median) - full.ecdf(median);
    let se = (0.25f64 / 10_000.0).sqrt();
    ok &= slack >= 3.0 * se;
    outcome(
        ok,
        format!(
            "min decile gap {min_gap:.4}, median slack {slack:.4} ({:.1} binomial SE)",
            slack / se
        ),
    )
}

fn c10_size_and_power() -> Outcome {
    let n = 500;
    let reps = 10_000;
    let level = 0.05;
    let alt = example_alt();
    let null = Model::Null(alt.base().clone());
    let tests: Vec<(&str, Statistic)> = vec![
        ("Ds", Statistic::KsSym),
        ("D", Statistic::KsFull),
        (
            "linear",
            Statistic::Linear {
                label: "example-4-2".into(),
                h: alt.h_fn(),
            },
        ),
    ];
    let mut sizes = Vec::new();
    let mut powers = Vec::new();
    for (k, (_, stat)) in tests.iter().enumerate() {
        let tail: Tail = stat.default_tail();
        let base = SimConfig::new(stat.clone(), null.clone(), n, reps, 1000 + k as u64);
        let calib = simulate(&base).unwrap();
        let crit = critical_value_tail(&calib, level, tail).unwrap();
        let fresh = simulate_values(&base.clone().with_seed(2000 + k as u64)).unwrap();
        sizes.push(rejection_rate(&fresh, crit, tail));
        let alt_values = simulate_values(
            &base
                .clone()
                .with_seed(3000 + k as u64)
                .with_model(Model::Equality(alt.clone())),
        )
        .unwrap();
        powers.push(rejection_rate(&alt_values, crit, tail));
    }
    let size_ok = sizes.iter().all(|s| (s - level).abs() <= 0.007);
    let gap_ok = powers[1] - powers[0] >= 0.2;
    let linear_ok = powers[2] > powers[0];
    let fmt = |v: &[f64]| {
        tests
            .iter()
            .zip(v)
            .map(|((name, _), x)| format!("{name} {x:.4}"))
            .collect::<Vec<_>>()
            .join(", ")
    };
    outcome(
        size_ok && gap_ok && linear_ok,
        format!("size [{}]; power [{}]", fmt(&sizes), fmt(&powers)),
    )
}

fn c11_rate_separation() -> Outcome {
    let alt = example_alt();
    let h: RealFn = alt.h_fn();
    let ns = [400usize, 1600, 6400];
    let reps = 10_000;
    let run = |eps: f64, n: usize, seed: u64| {
        let a = alt.with_epsilon(eps).unwrap();
        let cfg = SimConfig::new(
            Statistic::Linear {
                label: "example-4-2".into(),
                h: h.clone(),
            },
            Model::Equality(a),
            n,
            reps,
            seed,
        );
        mean_sd(&simulate_values(&cfg).unwrap()).0
    };
    let c_slow = 400f64.powf(0.25);
    let c_fast = 20.0;
    let slow: Vec<f64> = ns
        .iter()
        .enumerate()
        .map(|(k, &n)| run(c_slow * (n as f64).powf(-0.25), n, 1100 + k as u64))
        .collect();
    let fast: Vec<f64> = ns
        .iter()
        .enumerate()
        .map(|(k, &n)| run(c_fast / (n as f64).sqrt(), n, 1200 + k as u64))
        .collect();
    let max_slow = slow.iter().map(|m| m.abs()).fold(0.0, f64::max);
    let min_slow = slow.iter().map(|m| m.abs()).fold(f64::INFINITY, f64::min);
    let slow_ok = min_slow > 0.0 && max_slow / min_slow <= 1.2;
    let factors: Vec<f64> = fast.windows(2).map(|w| w[0].abs() / w[1].abs()).collect();
    let fast_ok = factors.iter().all(|f| (1.6..=2.4).contains(f));
    let show = |v: &[f64]| v.iter().map(|m| format!("{m:.4}")).collect::<Vec<_>>().join(", ");
    outcome(
        slow_ok && fast_ok,
        format!(
            "n^-1/4 means [{}] (max/min {:.3}); n^-1/2 means [{}] (factors {})",
            show(&slow),
            max_slow / min_slow,
            show(&fast),
            factors.iter().map(|f| format!("{f:.2}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

fn c12_determinism() -> Outcome {
    let alt = example_alt();
    let max_workers = std::thread::available_parallelism().map_or(1, |n| n.get()).max(4);
    let configs = vec![
        SimConfig::new(Statistic::KsSym, Model::Null(mix()), 200, 500, 1201),
        SimConfig::new(Statistic::KsFull, Model::Equality(alt.clone()), 100, 300, 1202),
        SimConfig::new(
            Statistic::Maxima {
                label: "q".into(),
                alpha: q_direction(&alt),
            },
            Model::Equality(alt.clone()),
            150,
            500,
            1203,
        ),
        SimConfig::new(
            Statistic::Linear {
                label: "h".into(),
                h: Arc::new(move |x| alt.h(x)),
            },
            Model::Null(mix()),
            150,
            500,
            1204,
        ),
    ];
    let mut identical = 0;
    for cfg in &configs {
        let one = simulate(&cfg.clone().with_workers(1)).unwrap().to_csv_string();
        let many = simulate(&cfg.clone().with_workers(max_workers))
            .unwrap()
            .to_csv_string();
        identical += (one == many) as usize;
    }
    outcome(
        identical == configs.len(),
        format!(
            "{identical}/{} configs byte-identical with 1 vs {max_workers} workers",
            configs.len()
        ),
    )
}
