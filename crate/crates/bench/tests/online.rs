use riemopt::online::{roogd_init, roogd_step, roogd_step_cap, Aoogd, StepSizePool};
use riemopt::{FrechetOptions, Manifold, TangentVector};
use riemopt_bench::config::{AlgorithmSpec, FrechetConfig, OnlineAlgorithm, StreamMode};
use riemopt_bench::gen_frechet_stream;
use riemopt_bench::run::FrechetConstants;

fn stationary(seed: u64, rounds: usize) -> FrechetConfig {
    FrechetConfig {
        dim: 10,
        n_points: 20,
        rounds,
        seed,
        mode: StreamMode::Abrupt,
        window: rounds,
        drift: 0.1,
        ball_radius: 1.0,
        center_diam: 1.0,
        diameter: 1.0,
        kappa: -1.0,
        algorithms: vec![AlgorithmSpec {
            name: OnlineAlgorithm::Roogd,
            step_size: None,
        }],
        record_timing: false,
        output: None,
    }
}

fn distances(cfg: &FrechetConfig, fixed: bool) -> (f64, Vec<f64>) {
    let k = FrechetConstants::from_config(cfg).unwrap();
    let eta = roogd_step_cap(k.sigma0, k.zeta0, k.smoothness);
    let stream = gen_frechet_stream(cfg);
    let m = stream.manifold();
    let u = if fixed {
        stream.loss(1).minimizer(m).unwrap()
    } else {
        stream
            .hindsight_minimizer(FrechetOptions::default())
            .unwrap()
    };
    let x0 = m.origin();
    let mut s = roogd_init(m, &x0, eta).unwrap();
    let mut d = Vec::with_capacity(cfg.rounds);
    for t in 1..=cfg.rounds {
        let f = stream.loss(if fixed { 1 } else { t });
        let g = f.grad(m, &s.x_cur).unwrap();
        s = roogd_step(m, &s, &TangentVector::new(s.x_cur.clone(), g)).unwrap();
        d.push(m.dist(&s.x_cur, &u));
    }
    (m.dist(&x0, &u), d)
}

#[test]
fn capped_step_approaches_minimizer_of_fixed_loss() {
    for seed in 0..20 {
        let (_, d) = distances(&stationary(seed, 300), true);
        for (t, w) in d.windows(2).enumerate().skip(10) {
            assert!(
                w[1] <= w[0] + 1e-9,
                "seed {seed} round {}: {} -> {}",
                t + 2,
                w[0],
                w[1]
            );
        }
        assert!(d[299] < 1e-8);
    }
}

#[test]
fn capped_step_stays_near_minimizer_on_stationary_stream() {
    for seed in 0..20 {
        let (d0, d) = distances(&stationary(seed, 300), false);
        let worst = d[10..].iter().cloned().fold(0.0, f64::max);
        assert!(worst < d0, "seed {seed}: {worst} vs start {d0}");
    }
}

#[test]
fn hedge_weights_stay_normalized() {
    let mut cfg = stationary(4, 400);
    cfg.window = 50;
    let stream = gen_frechet_stream(&cfg);
    let m = stream.manifold();
    let pool = StepSizePool::geometric(0.01, 6).unwrap();
    let mut learner = Aoogd::new(m, &m.origin(), &pool, 0.5).unwrap();
    for t in 1..=cfg.rounds {
        let cur = stream.loss(t);
        let prev = (t > 1).then(|| stream.loss(t - 1));
        let out = learner
            .round(
                m,
                |x| cur.grad(m, x),
                prev.as_ref()
                    .map(|p| move |x: &riemopt::Point| p.grad(m, x)),
            )
            .unwrap();
        let sum: f64 = out.weights.w.iter().sum();
        assert!((sum - 1.0).abs() <= 1e-12, "round {t}: {sum}");
        assert!(out.weights.w.iter().all(|&w| w >= 0.0));
    }
}
