//! Running one configured experiment.

use std::time::Instant;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use riemopt::games::{
    ne_diagnostics, quad_duality_gap, quad_logdet_game, rceg_step, rgda_step, robust_pca_game,
    rogda_step, GameState, ZeroSumGame,
};
use riemopt::manifolds::{random_point, random_tangent, Hyperbolic, Spd, Sphere};
use riemopt::online::{
    aoogd_configure, regret_update, rogd_step, roogd_corrected_init, roogd_corrected_step,
    roogd_init, roogd_step, roogd_tuned_step, Aoogd, AoogdParams, GradientPair, RegretLedger,
};
use riemopt::rng::SeedTree;
use riemopt::{sigma_constant, zeta_constant, Manifold, Point, TangentVector};

use crate::config::{
    AlgorithmSpec, ExperimentConfig, FrechetConfig, GameAlgorithm, OnlineAlgorithm, PcaConfig,
    QuadConfig,
};
use crate::stream::{gen_frechet_stream, FrechetStream};
use crate::BenchError;

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub round: usize,
    pub algorithm: String,
    pub instantaneous_loss: f64,
    pub cumulative_loss: f64,
    pub cumulative_regret: f64,
    pub grad_norm: Option<f64>,
    pub wall_micros: u64,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub rows: Vec<ResultRow>,
    pub summary: Value,
}

/// Labels of the solvers that diverged during the run.
pub fn diverged(summary: &Value) -> Vec<String> {
    summary
        .get("algorithms")
        .and_then(Value::as_object)
        .map(|algs| {
            algs.iter()
                .filter_map(|(k, v)| {
                    v.get("diverged_at")
                        .and_then(Value::as_u64)
                        .map(|t| format!("{k} at round {t}"))
                })
                .collect()
        })
        .unwrap_or_default()
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput, BenchError> {
    cfg.validate()?;
    match cfg {
        ExperimentConfig::Frechet(c) => run_frechet(c),
        ExperimentConfig::Quadgame(c) => run_quadgame(c),
        ExperimentConfig::RobustPca(c) => run_pca(c),
        ExperimentConfig::Verify(c) => Ok(RunOutput {
            rows: Vec::new(),
            summary: crate::verify_cmd::run_verify(c)?,
        }),
    }
}

struct Clock {
    on: bool,
    start: Instant,
}

impl Clock {
    fn new(on: bool) -> Self {
        Clock {
            on,
            start: Instant::now(),
        }
    }

    /// Microseconds since the last call, or 0 when timing is off.
    fn lap(&mut self) -> u64 {
        if !self.on {
            return 0;
        }
        let now = Instant::now();
        let us = now.duration_since(self.start).as_micros() as u64;
        self.start = now;
        us
    }
}

/// Constants of the Fréchet experiment that feed the step-size rules.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FrechetConstants {
    pub diameter: f64,
    pub lipschitz: f64,
    pub smoothness: f64,
    pub sigma0: f64,
    pub zeta0: f64,
}

impl FrechetConstants {
    pub fn from_config(c: &FrechetConfig) -> Result<Self, BenchError> {
        let m = Hyperbolic::new(c.dim);
        let zeta0 = zeta_constant(c.kappa, c.diameter);
        Ok(FrechetConstants {
            diameter: c.diameter,
            lipschitz: c.diameter + c.ball_radius,
            smoothness: zeta0,
            sigma0: sigma_constant(m.curvature().upper, c.diameter)?,
            zeta0,
        })
    }
}

/// Per-round quantities shared by every algorithm.
#[derive(Debug, Clone)]
pub struct FrechetReference {
    /// `f_t(u_t)` with `u_t` the round's minimizer.
    pub comparator_loss: Vec<f64>,
    pub path_length: f64,
    pub variation: f64,
}

/// Computes comparators, path length and the gradient-variation estimate.
///
/// The variation term of round `t` is the larger of
/// `|grad f_t(p) - grad f_{t-1}(p)|^2` over `p` in `{u_{t-1}, u_t}`.
pub fn frechet_reference(stream: &FrechetStream) -> Result<FrechetReference, BenchError> {
    let m = stream.manifold();
    let mut ledger = RegretLedger::default();
    let mut comparator_loss = Vec::with_capacity(stream.rounds());
    let mut prev: Option<(crate::stream::FrechetLoss, Point)> = None;
    for t in 1..=stream.rounds() {
        let loss = stream.loss(t);
        let u = loss.minimizer(m)?;
        let fu = loss.value(m, &u);
        comparator_loss.push(fu);
        let mut samples = Vec::new();
        if let Some((pl, pu)) = &prev {
            for p in [pu, &u] {
                samples.push(GradientPair {
                    point: p.clone(),
                    current: loss.grad(m, p)?,
                    previous: pl.grad(m, p)?,
                });
            }
        }
        ledger = regret_update(
            m,
            &ledger,
            0.0,
            fu,
            &u,
            prev.as_ref().map(|p| &p.1),
            &samples,
        );
        prev = Some((loss, u));
    }
    Ok(FrechetReference {
        comparator_loss,
        path_length: ledger.path_length,
        variation: ledger.grad_variation,
    })
}

/// Default step size of an online algorithm; `Raoogd` returns `eta_1`.
pub fn default_online_step(
    alg: OnlineAlgorithm,
    k: &FrechetConstants,
    rounds: usize,
    variation: f64,
) -> f64 {
    match alg {
        OnlineAlgorithm::Rogd => k.diameter / (k.lipschitz * (rounds as f64).sqrt()),
        OnlineAlgorithm::Roogd | OnlineAlgorithm::RoogdCorrected => roogd_tuned_step(
            k.diameter,
            k.sigma0,
            k.zeta0,
            k.lipschitz,
            k.smoothness,
            variation,
        ),
        OnlineAlgorithm::Raoogd => aoogd_params(k, rounds, variation)
            .and_then(|p| aoogd_configure(&p).ok())
            .map(|(pool, _)| pool.etas()[0])
            .unwrap_or(f64::NAN),
    }
}

fn aoogd_params(k: &FrechetConstants, rounds: usize, variation: f64) -> Option<AoogdParams> {
    Some(AoogdParams {
        horizon: rounds,
        diameter: k.diameter,
        lipschitz: k.lipschitz,
        smoothness: k.smoothness,
        sigma0: k.sigma0,
        zeta0: k.zeta0,
        variation_bound: variation,
    })
}

/// Trajectory of one online algorithm on a stream.
#[derive(Debug, Clone)]
pub struct OnlineTrace {
    pub label: &'static str,
    pub losses: Vec<f64>,
    pub micros: Vec<u64>,
    pub ledger: RegretLedger,
    pub step_size: f64,
    pub meta: Value,
    pub final_point: Point,
}

pub fn run_online(
    spec: &AlgorithmSpec<OnlineAlgorithm>,
    stream: &FrechetStream,
    reference: &FrechetReference,
    k: &FrechetConstants,
    timing: bool,
) -> Result<OnlineTrace, BenchError> {
    let m = stream.manifold();
    let origin = m.origin();
    let rounds = stream.rounds();
    let eta = spec
        .step_size
        .unwrap_or_else(|| default_online_step(spec.name, k, rounds, reference.variation));
    let mut losses = Vec::with_capacity(rounds);
    let mut micros = Vec::with_capacity(rounds);
    let mut ledger = RegretLedger::default();
    let mut clock = Clock::new(timing);
    let mut meta = json!({});

    enum Learner {
        Gd(Point),
        Opt(riemopt::online::OptimisticState),
        Corr(riemopt::online::CorrectedState),
        Meta(Box<Aoogd>),
    }
    let mut learner = match spec.name {
        OnlineAlgorithm::Rogd => Learner::Gd(origin.clone()),
        OnlineAlgorithm::Roogd => Learner::Opt(roogd_init(m, &origin, eta)?),
        OnlineAlgorithm::RoogdCorrected => Learner::Corr(roogd_corrected_init(m, &origin, eta)?),
        OnlineAlgorithm::Raoogd => {
            let params = aoogd_params(k, rounds, reference.variation).expect("params");
            let (mut pool, beta) = aoogd_configure(&params)?;
            if let Some(e1) = spec.step_size {
                pool = riemopt::online::StepSizePool::geometric(e1, pool.len())?;
            }
            meta = json!({ "pool": pool.etas(), "beta": beta });
            Learner::Meta(Box::new(Aoogd::new(m, &origin, &pool, beta)?))
        }
    };

    let mut prev_loss: Option<crate::stream::FrechetLoss> = None;
    for t in 1..=rounds {
        let loss = stream.loss(t);
        let played = match &mut learner {
            Learner::Gd(x) => {
                let played = x.clone();
                let g = TangentVector::new(played.clone(), loss.grad(m, &played)?);
                *x = rogd_step(m, &played, &g, eta)?;
                played
            }
            Learner::Opt(s) => {
                let played = s.x_cur.clone();
                let g = TangentVector::new(played.clone(), loss.grad(m, &played)?);
                *s = roogd_step(m, s, &g)?;
                played
            }
            Learner::Corr(s) => {
                let played = s.x_cur.clone();
                let g = TangentVector::new(played.clone(), loss.grad(m, &played)?);
                *s = roogd_corrected_step(m, s, &g)?;
                played
            }
            Learner::Meta(a) => {
                let grad = |x: &Point| loss.grad(m, x);
                let out = match &prev_loss {
                    Some(pl) => a.round(m, grad, Some(|x: &Point| pl.grad(m, x)))?,
                    None => {
                        a.round(m, grad, None::<fn(&Point) -> riemopt::Result<DVector<f64>>>)?
                    }
                };
                out.played
            }
        };
        let f = loss.value(m, &played);
        if !f.is_finite() {
            return Err(BenchError::Numeric(format!(
                "{}: non-finite loss at round {t}",
                spec.name.label()
            )));
        }
        ledger = regret_update(
            m,
            &ledger,
            f,
            reference.comparator_loss[t - 1],
            &played,
            None,
            &[],
        );
        ledger.observe_excursion(m.dist(&played, &origin));
        losses.push(f);
        micros.push(clock.lap());
        prev_loss = Some(loss);
    }
    let final_point = match &learner {
        Learner::Gd(x) => x.clone(),
        Learner::Opt(s) => s.x_cur.clone(),
        Learner::Corr(s) => s.x_cur.clone(),
        Learner::Meta(a) => {
            meta["final_weights"] = json!(a.weights.w);
            a.experts[0].x_cur.clone()
        }
    };
    ledger.path_length = reference.path_length;
    ledger.grad_variation = reference.variation;
    Ok(OnlineTrace {
        label: spec.name.label(),
        losses,
        micros,
        ledger,
        step_size: eta,
        meta,
        final_point,
    })
}

fn online_rows(trace: &OnlineTrace, comparator: &[f64]) -> Vec<ResultRow> {
    let mut cum = 0.0;
    let mut reg = 0.0;
    trace
        .losses
        .iter()
        .enumerate()
        .map(|(i, &f)| {
            cum += f;
            reg += f - comparator[i];
            ResultRow {
                round: i + 1,
                algorithm: trace.label.to_string(),
                instantaneous_loss: f,
                cumulative_loss: cum,
                cumulative_regret: reg,
                grad_norm: None,
                wall_micros: trace.micros[i],
            }
        })
        .collect()
}

pub fn run_frechet(c: &FrechetConfig) -> Result<RunOutput, BenchError> {
    let stream = gen_frechet_stream(c);
    let k = FrechetConstants::from_config(c)?;
    let reference = frechet_reference(&stream)?;
    let traces: Vec<OnlineTrace> = c
        .algorithms
        .par_iter()
        .map(|spec| run_online(spec, &stream, &reference, &k, c.record_timing))
        .collect::<Result<_, _>>()?;
    let mut rows = Vec::new();
    let mut algs = serde_json::Map::new();
    for tr in &traces {
        rows.extend(online_rows(tr, &reference.comparator_loss));
        algs.insert(
            tr.label.to_string(),
            json!({
                "step_size": tr.step_size,
                "final_cumulative_loss": tr.ledger.cum_alg_loss,
                "final_regret": tr.ledger.regret(),
                "max_excursion": tr.ledger.max_excursion,
                "meta": tr.meta,
            }),
        );
    }
    let summary = json!({
        "experiment": "frechet",
        "seed": c.seed,
        "rounds": c.rounds,
        "constants": k,
        "path_length": reference.path_length,
        "variation_estimate": reference.variation,
        "comparator_cumulative_loss": reference.comparator_loss.iter().sum::<f64>(),
        "algorithms": algs,
    });
    Ok(RunOutput { rows, summary })
}

/// Per-round record of a game solver.
#[derive(Debug, Clone)]
pub struct GameTrace {
    pub label: &'static str,
    pub step_size: f64,
    pub payoffs: Vec<f64>,
    pub grad_norms: Vec<f64>,
    /// Distance of each iterate to the reference equilibrium, when known.
    pub ref_distance: Vec<f64>,
    pub micros: Vec<u64>,
    pub last: Point,
    /// Geodesic average of the iterates (optimistic solver only).
    pub average: Option<Point>,
    /// First round whose iterate or field was not finite. The trace stops
    /// one round earlier.
    pub diverged_at: Option<usize>,
}

/// Runs `rounds` steps of one solver from `z0`.
pub fn run_game<G: ZeroSumGame + ?Sized>(
    g: &G,
    alg: GameAlgorithm,
    z0: &Point,
    eta: f64,
    rounds: usize,
    reference: Option<&Point>,
    timing: bool,
) -> Result<GameTrace, BenchError> {
    let m = g.space();
    let mut clock = Clock::new(timing);
    let mut trace = GameTrace {
        label: alg.label(),
        step_size: eta,
        payoffs: Vec::with_capacity(rounds),
        grad_norms: Vec::with_capacity(rounds),
        ref_distance: Vec::new(),
        micros: Vec::with_capacity(rounds),
        last: z0.clone(),
        average: None,
        diverged_at: None,
    };
    let mut state = GameState::new(g, z0)?;
    let mut z = z0.clone();
    for t in 1..=rounds {
        let next = match alg {
            GameAlgorithm::Rogda => rogda_step(g, &state, eta).map(|s| {
                state = s;
                state.z_cur.clone()
            }),
            GameAlgorithm::Rgda => rgda_step(g, &z, eta),
            GameAlgorithm::Rceg => rceg_step(g, &z, eta),
        };
        let Ok(next) = next else {
            trace.diverged_at = Some(t);
            break;
        };
        let f = g.joint_payoff(&next);
        let gn = m.norm(&next, &g.field(&next));
        if !f.is_finite() || !gn.is_finite() || next.iter().any(|c| !c.is_finite()) {
            trace.diverged_at = Some(t);
            break;
        }
        z = next;
        trace.payoffs.push(f);
        trace.grad_norms.push(gn);
        if let Some(r) = reference {
            trace.ref_distance.push(m.dist(&z, r));
        }
        trace.micros.push(clock.lap());
    }
    if alg == GameAlgorithm::Rogda && trace.diverged_at.is_none() {
        trace.average = Some(state.z_bar.clone());
        let diag = ne_diagnostics(g, &state);
        debug_assert!(diag.best_grad_norm <= diag.grad_norm);
    }
    trace.last = z;
    Ok(trace)
}

fn game_rows(trace: &GameTrace, value: f64) -> Vec<ResultRow> {
    let mut cum = 0.0;
    let mut reg = 0.0;
    trace
        .payoffs
        .iter()
        .enumerate()
        .map(|(i, &f)| {
            cum += f;
            reg += f - value;
            ResultRow {
                round: i + 1,
                algorithm: trace.label.to_string(),
                instantaneous_loss: f,
                cumulative_loss: cum,
                cumulative_regret: reg,
                grad_norm: Some(trace.grad_norms[i]),
                wall_micros: trace.micros[i],
            }
        })
        .collect()
}

fn grad_stats(v: &[f64]) -> Value {
    if v.is_empty() {
        return Value::Null;
    }
    let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = v.iter().cloned().fold(0.0, f64::max);
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    json!({
        "first": v.first(),
        "last": v.last(),
        "best": min,
        "max": max,
        "mean": mean,
    })
}

/// Default step size for the logdet game: 0.5 when `c1 <= 0.1`,
/// otherwise 0.2.
pub fn quad_default_step(c1: f64) -> f64 {
    if c1 <= 0.1 {
        0.5
    } else {
        0.2
    }
}

/// A random equilibrium `(X*, Y*)` with unit determinants and a start at
/// geodesic distance `init_distance` from it.
pub fn quad_start(
    g: &riemopt::games::QuadLogdetGame,
    init_distance: f64,
    seed: u64,
) -> Result<(Point, Point), BenchError> {
    let spd = g.spd();
    let root = SeedTree::new(seed).named("quad-start");
    let unit_det = |s: SeedTree| -> Result<Point, BenchError> {
        let p = random_point(spd, s.0, None, None)?;
        let k = (spd.logdet(&p) / spd.size() as f64).exp();
        Ok(p / k)
    };
    let star = g
        .space()
        .join(&[unit_det(root.child(0))?, unit_det(root.child(1))?]);
    let v = random_tangent(g.space(), &star, root.child(2).0, init_distance)?;
    let z0 = g.space().exp(&star, &v.coords);
    Ok((star, z0))
}

pub fn run_quadgame(c: &QuadConfig) -> Result<RunOutput, BenchError> {
    let g = quad_logdet_game(c.d, c.c1, c.c2)?;
    let (star, z0) = quad_start(&g, c.init_distance, c.seed)?;
    let scale = if c.scale_step_by_dim { c.d as f64 } else { 1.0 };
    let traces: Vec<GameTrace> = c
        .algorithms
        .par_iter()
        .map(|spec| {
            let eta = spec.step_size.unwrap_or_else(|| quad_default_step(c.c1)) / scale;
            run_game(
                &g,
                spec.name,
                &z0,
                eta,
                c.rounds,
                Some(&star),
                c.record_timing,
            )
        })
        .collect::<Result<_, _>>()?;
    let mut rows = Vec::new();
    let mut algs = serde_json::Map::new();
    for tr in &traces {
        rows.extend(game_rows(tr, 0.0));
        let mut entry = json!({
            "step_size": tr.step_size,
            "final_cumulative_loss": tr.payoffs.iter().sum::<f64>(),
            "grad_norm": grad_stats(&tr.grad_norms),
            "ne_residual": g.ne_residual(&tr.last),
            "ne_distance": g.ne_distance(&tr.last),
            "max_distance_to_reference": tr.ref_distance.iter().cloned().fold(0.0, f64::max),
            "diverged_at": tr.diverged_at,
        });
        if let Some(avg) = &tr.average {
            let (x, y) = g.split(avg);
            entry["average_ne_residual"] = json!(g.ne_residual(avg));
            if c.c1 > 0.0 {
                entry["average_duality_gap"] = json!(quad_duality_gap(&g, &x, &y)?);
            }
        }
        algs.insert(tr.label.to_string(), entry);
    }
    let summary = json!({
        "experiment": "quadgame",
        "seed": c.seed,
        "rounds": c.rounds,
        "d": c.d,
        "c1": c.c1,
        "c2": c.c2,
        "mu": g.mu(),
        "smoothness": g.smoothness(),
        "init_distance": m_dist(&g, &z0, &star),
        "equilibrium_value": 0.0,
        "algorithms": algs,
    });
    Ok(RunOutput { rows, summary })
}

fn m_dist<G: ZeroSumGame + ?Sized>(g: &G, a: &Point, b: &Point) -> f64 {
    g.space().dist(a, b)
}

/// Synthetic SPD data with eigenvalues in `[eig_lo, eig_hi]`.
pub fn pca_data(c: &PcaConfig) -> Result<Vec<Point>, BenchError> {
    let spd = Spd::with_eigen_range(c.d, c.eig_lo, c.eig_hi)?;
    let root = SeedTree::new(c.seed).named("pca-data");
    (0..c.n_samples)
        .map(|i| Ok(random_point(&spd, root.child(i as u64).0, None, None)?))
        .collect()
}

pub fn run_pca(c: &PcaConfig) -> Result<RunOutput, BenchError> {
    let g = robust_pca_game(pca_data(c)?, c.alpha)?;
    let root = SeedTree::new(c.seed).named("pca-start");
    let a0 = random_point(&Spd::new(c.d), root.child(0).0, None, None)?;
    let x0 = random_point(&Sphere::new(c.d - 1), root.child(1).0, None, None)?;
    let z0 = g.space().join(&[a0, x0]);
    let traces: Vec<GameTrace> = c
        .algorithms
        .par_iter()
        .map(|spec| {
            let eta = spec.step_size.unwrap_or(0.07);
            run_game(&g, spec.name, &z0, eta, c.rounds, None, c.record_timing)
        })
        .collect::<Result<_, _>>()?;
    let mut rows = Vec::new();
    let mut algs = serde_json::Map::new();
    for tr in &traces {
        rows.extend(game_rows(tr, 0.0));
        algs.insert(
            tr.label.to_string(),
            json!({
                "step_size": tr.step_size,
                "final_cumulative_loss": tr.payoffs.iter().sum::<f64>(),
                "grad_norm": grad_stats(&tr.grad_norms),
                "ne_residual": g.ne_residual(&tr.last),
                "diverged_at": tr.diverged_at,
            }),
        );
    }
    let summary = json!({
        "experiment": "robust_pca",
        "seed": c.seed,
        "rounds": c.rounds,
        "d": c.d,
        "n_samples": c.n_samples,
        "alpha": c.alpha,
        "algorithms": algs,
    });
    Ok(RunOutput { rows, summary })
}
