use std::process::Command;

use riemopt::Manifold;
use riemopt_bench::config::{FrechetConfig, StreamMode};
use riemopt_bench::output::write_csv;
use riemopt_bench::{gen_frechet_stream, run_experiment, sweep, ExperimentConfig, SweepConfig};

fn frechet(mode: StreamMode, rounds: usize, window: usize) -> FrechetConfig {
    let text = format!(
        r#"{{"experiment":"frechet","dim":4,"n_points":5,"rounds":{rounds},"window":{window},
            "mode":"{}","seed":7}}"#,
        if mode == StreamMode::Abrupt {
            "abrupt"
        } else {
            "drift"
        }
    );
    match ExperimentConfig::parse(&text).unwrap() {
        ExperimentConfig::Frechet(c) => c,
        _ => unreachable!(),
    }
}

#[test]
fn stationary_stream_keeps_center() {
    let s = gen_frechet_stream(&frechet(StreamMode::Abrupt, 30, 30));
    for t in 2..=30 {
        assert_eq!(s.center(t), s.center(1));
    }
}

#[test]
fn abrupt_stream_moves_only_on_window_boundaries() {
    let s = gen_frechet_stream(&frechet(StreamMode::Abrupt, 40, 10));
    let m = s.manifold();
    for t in 1..40 {
        let d = m.dist(s.center(t), s.center(t + 1));
        if s.is_reselection(t + 1) {
            assert!(d > 0.0);
        } else {
            assert_eq!(d, 0.0);
        }
    }
}

#[test]
fn drift_stream_steps_by_drift() {
    let s = gen_frechet_stream(&frechet(StreamMode::Drift, 40, 10));
    let m = s.manifold();
    for t in 1..40 {
        if !s.is_reselection(t + 1) {
            let d = m.dist(s.center(t), s.center(t + 1));
            assert!((d - 0.1).abs() < 1e-10, "{d}");
        }
    }
}

#[test]
fn stream_points_are_seeded() {
    let a = gen_frechet_stream(&frechet(StreamMode::Drift, 5, 2));
    let b = gen_frechet_stream(&frechet(StreamMode::Drift, 5, 2));
    assert_eq!(a.loss(3).points, b.loss(3).points);
}

#[test]
fn one_round_gives_one_row_per_algorithm() {
    let cfg = ExperimentConfig::Frechet(frechet(StreamMode::Abrupt, 1, 1));
    let out = run_experiment(&cfg).unwrap();
    assert_eq!(out.rows.len(), 3);
    assert!(out.rows.iter().all(|r| r.round == 1));
}

#[test]
fn regret_column_recomputes_offline() {
    let cfg = frechet(StreamMode::Abrupt, 40, 10);
    let stream = gen_frechet_stream(&cfg);
    let m = stream.manifold();
    let out = run_experiment(&ExperimentConfig::Frechet(cfg)).unwrap();
    let mut acc = std::collections::HashMap::new();
    for r in &out.rows {
        let loss = stream.loss(r.round);
        let u = loss.minimizer(m).unwrap();
        let e = acc.entry(r.algorithm.clone()).or_insert(0.0);
        *e += r.instantaneous_loss - loss.value(m, &u);
        assert!((*e - r.cumulative_regret).abs() < 1e-9);
    }
}

#[test]
fn csv_is_byte_identical_across_reruns() {
    let dir = std::env::temp_dir().join(format!("riemopt-det-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg =
        ExperimentConfig::parse(r#"{"experiment":"quadgame","d":3,"c1":0.5,"rounds":50,"seed":3}"#)
            .unwrap();
    let a = run_experiment(&cfg).unwrap();
    let b = run_experiment(&cfg).unwrap();
    write_csv(&dir.join("a.csv"), &a.rows).unwrap();
    write_csv(&dir.join("b.csv"), &b.rows).unwrap();
    let ba = std::fs::read(dir.join("a.csv")).unwrap();
    assert_eq!(ba, std::fs::read(dir.join("b.csv")).unwrap());
    let text = String::from_utf8(ba).unwrap();
    assert!(text.starts_with(
        "round,algorithm,instantaneous_loss,cumulative_loss,cumulative_regret,grad_norm,wall_micros\n"
    ));
    assert!(!text.contains('\r'));
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn config_errors_name_the_field() {
    let unknown =
        ExperimentConfig::parse(r#"{"experiment":"quadgame","d":3,"c1":0.5,"rounds":5,"typo":1}"#)
            .unwrap_err();
    assert!(unknown.to_string().contains("typo"), "{unknown}");
    assert_eq!(unknown.exit_code(), 2);
    let zero = ExperimentConfig::parse(r#"{"experiment":"quadgame","d":3,"c1":0.5,"rounds":0}"#)
        .unwrap_err();
    assert!(zero.to_string().contains("rounds"));
}

#[test]
fn sweep_over_seeds_aggregates() {
    let cfg = SweepConfig::parse(
        r#"{"configs":[{"experiment":"quadgame","d":2,"c1":1.0,"rounds":20}],"seeds":[1,2,3,4,5]}"#,
    )
    .unwrap();
    let s = sweep(&cfg, None).unwrap();
    assert_eq!(s["runs"].as_array().unwrap().len(), 5);
    let agg = &s["aggregates"][0];
    assert_eq!(agg["runs"], 5);
    assert_eq!(agg["metrics"]["rogda/best_grad_norm"]["n"], 5);
}

#[test]
fn sweep_reports_failures_per_run() {
    let cfg = SweepConfig::parse(
        r#"{"configs":[
            {"experiment":"quadgame","d":2,"c1":1.0,"rounds":20},
            {"experiment":"quadgame","d":2,"c1":0.0,"rounds":200,"scale_step_by_dim":false,
             "algorithms":[{"name":"rgda","step_size":50.0}]}
        ]}"#,
    )
    .unwrap();
    let s = sweep(&cfg, None).unwrap();
    assert_eq!(s["failures"], 1);
    assert!(s["runs"][1]["error"].as_str().unwrap().contains("numeric"));
    assert!(s["runs"][0].get("error").is_none());
}

fn bench() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bench"))
}

#[test]
fn cli_exit_codes() {
    let dir = std::env::temp_dir().join(format!("riemopt-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let good = dir.join("good.json");
    std::fs::write(
        &good,
        r#"{"experiment":"quadgame","d":2,"c1":1.0,"rounds":10}"#,
    )
    .unwrap();
    let st = bench()
        .args(["quadgame", "--config"])
        .arg(&good)
        .arg("--out")
        .arg(dir.join("out"))
        .args(["--seed", "4", "--rounds", "12"])
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    let csv = std::fs::read_to_string(dir.join("out/quadgame.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3 * 12);

    let st = bench()
        .args(["frechet", "--config"])
        .arg(&good)
        .arg("--out")
        .arg(dir.join("out"))
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(2));

    let bad = dir.join("diverge.json");
    std::fs::write(
        &bad,
        r#"{"experiment":"quadgame","d":2,"c1":0.0,"rounds":200,"scale_step_by_dim":false,
            "algorithms":[{"name":"rgda","step_size":50.0}]}"#,
    )
    .unwrap();
    let st = bench()
        .args(["quadgame", "--config"])
        .arg(&bad)
        .arg("--out")
        .arg(dir.join("out2"))
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(3));
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn shipped_configs_parse() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs");
    for name in ["frechet", "quadgame", "robust_pca", "verify"] {
        let cfg =
            ExperimentConfig::load(std::path::Path::new(&format!("{dir}/{name}.json"))).unwrap();
        assert_eq!(cfg.name(), name);
    }
    SweepConfig::load(std::path::Path::new(&format!("{dir}/sweep.json"))).unwrap();
}
