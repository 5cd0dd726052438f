//! Loss streams for the online Fréchet mean on hyperbolic space.
//!
//! Round `t` has loss `f_t(x) = (1/2N) sum_i d(x, A_{t,i})^2` where the
//! `A_{t,i}` are drawn from a ball around the round's center `P_t`. Round
//! points are regenerated from the seed on demand, so streams of any length
//! cost memory only for the centers.

use nalgebra::DVector;
use riemopt::manifolds::{sample_in_ball, Hyperbolic};
use riemopt::rng::SeedTree;
use riemopt::{weighted_frechet_mean, FrechetOptions, Manifold, Point, Result};

use crate::config::{FrechetConfig, StreamMode};

#[derive(Debug, Clone)]
pub struct FrechetStream {
    m: Hyperbolic,
    centers: Vec<Point>,
    n_points: usize,
    ball_radius: f64,
    window: usize,
    points_seed: SeedTree,
}

/// Builds the stream: `P_t` is re-selected uniformly in a ball of diameter
/// `center_diam` around the origin on rounds `1, S+1, 2S+1, ...`. In between
/// it stays put (abrupt mode) or takes a step of length `drift` in a fresh
/// random direction each round (drift mode).
pub fn gen_frechet_stream(cfg: &FrechetConfig) -> FrechetStream {
    let m = Hyperbolic::new(cfg.dim);
    let root = SeedTree::new(cfg.seed).named("frechet-stream");
    let origin = m.origin();
    let mut centers: Vec<Point> = Vec::with_capacity(cfg.rounds);
    for t in 1..=cfg.rounds {
        let mut rng = root.named("center").child(t as u64).rng();
        let reselect = (t - 1) % cfg.window == 0;
        let p = if reselect {
            sample_in_ball(&m, &origin, cfg.center_diam / 2.0, &mut rng)
        } else {
            let prev = &centers[t - 2];
            match cfg.mode {
                StreamMode::Abrupt => prev.clone(),
                StreamMode::Drift => {
                    let dir = m.sample_unit_tangent(prev, &mut rng);
                    m.project_point(&m.exp(prev, &(dir * cfg.drift)))
                }
            }
        };
        centers.push(p);
    }
    FrechetStream {
        m,
        centers,
        n_points: cfg.n_points,
        ball_radius: cfg.ball_radius,
        window: cfg.window,
        points_seed: root.named("points"),
    }
}

impl FrechetStream {
    pub fn manifold(&self) -> &Hyperbolic {
        &self.m
    }

    pub fn rounds(&self) -> usize {
        self.centers.len()
    }

    /// `P_t` for `t` in `1..=T`.
    pub fn center(&self, t: usize) -> &Point {
        &self.centers[t - 1]
    }

    pub fn is_reselection(&self, t: usize) -> bool {
        (t - 1).is_multiple_of(self.window)
    }

    pub fn loss(&self, t: usize) -> FrechetLoss {
        let seed = self.points_seed.child(t as u64);
        let c = self.center(t);
        let points = (0..self.n_points)
            .map(|i| {
                let mut rng = seed.child(i as u64).rng();
                sample_in_ball(&self.m, c, self.ball_radius, &mut rng)
            })
            .collect();
        FrechetLoss { points }
    }

    /// Minimizer of `sum_t f_t`: the Karcher mean of all round points,
    /// computed by streaming over rounds.
    pub fn hindsight_minimizer(&self, opts: FrechetOptions) -> Result<Point> {
        let m = &self.m;
        let mut x = self.center(1).clone();
        let total = (self.rounds() * self.n_points) as f64;
        for _ in 0..opts.max_iter {
            let mut step = DVector::zeros(x.len());
            for t in 1..=self.rounds() {
                for p in &self.loss(t).points {
                    step += m.log(&x, p)?;
                }
            }
            step /= total;
            x = m.project_point(&m.exp(&x, &step));
            if m.norm(&x, &step) < opts.tol {
                break;
            }
        }
        Ok(x)
    }
}

/// One round's loss.
#[derive(Debug, Clone)]
pub struct FrechetLoss {
    pub points: Vec<Point>,
}

impl FrechetLoss {
    pub fn value<M: Manifold + ?Sized>(&self, m: &M, x: &Point) -> f64 {
        let s: f64 = self.points.iter().map(|p| m.dist(x, p).powi(2)).sum();
        s / (2.0 * self.points.len() as f64)
    }

    /// `-(1/N) sum_i log_x A_i`.
    pub fn grad<M: Manifold + ?Sized>(&self, m: &M, x: &Point) -> Result<DVector<f64>> {
        let mut g = DVector::zeros(x.len());
        for p in &self.points {
            g -= m.log(x, p)?;
        }
        Ok(g / self.points.len() as f64)
    }

    /// The round's offline minimizer.
    pub fn minimizer<M: Manifold + ?Sized>(&self, m: &M) -> Result<Point> {
        let w = vec![1.0 / self.points.len() as f64; self.points.len()];
        weighted_frechet_mean(m, &self.points, &w, FrechetOptions::default())
    }
}
