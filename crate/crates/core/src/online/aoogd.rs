//! Adaptive meta-expert learner: N optimistic experts with geometrically
//! spaced step sizes, combined by an optimistic exponentially weighted
//! Fréchet mean.

use nalgebra::DVector;

use super::optimistic::{roogd_init, roogd_step, OptimisticState};
use crate::geometry::{
    weighted_frechet_mean, FrechetOptions, GeomError, Manifold, Point, Result, TangentVector,
};

/// Step sizes `eta_i = 2^(i-1) eta_1`, `i = 1..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepSizePool {
    etas: Vec<f64>,
}

impl StepSizePool {
    pub fn geometric(eta1: f64, n: usize) -> Result<Self> {
        if !(eta1 > 0.0) || n == 0 {
            return Err(GeomError::InvalidParameter(format!(
                "pool needs eta1 > 0 and N >= 1 (got {eta1}, {n})"
            )));
        }
        Ok(StepSizePool {
            etas: (0..n).map(|i| eta1 * 2f64.powi(i as i32)).collect(),
        })
    }

    pub fn etas(&self) -> &[f64] {
        &self.etas
    }

    pub fn len(&self) -> usize {
        self.etas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.etas.is_empty()
    }
}

/// Problem constants used to size the pool and the meta learning rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AoogdParams {
    pub horizon: usize,
    pub diameter: f64,
    pub lipschitz: f64,
    pub smoothness: f64,
    pub sigma0: f64,
    pub zeta0: f64,
    /// Upper bound on the gradient variation used in place of `V_T`.
    pub variation_bound: f64,
}

/// Pool and meta learning rate:
///
/// ```text
/// eta_1 = sqrt(sigma0 D^2 / (16 zeta0^2 G^2 T))
/// N     = ceil(log2(sigma0 G^2 T / (D^2 L^2)) / 2) + 1
/// beta  = min(1 / sqrt(12 D^4 L^2 + D^2 G^2 zeta0^2),
///             sqrt((2 + ln N) / (3 D^2 (V + G^2))))
/// ```
///
/// `N` is clamped to at least 1 when the logarithm is negative.
pub fn aoogd_configure(p: &AoogdParams) -> Result<(StepSizePool, f64)> {
    let AoogdParams {
        horizon,
        diameter: d,
        lipschitz: g,
        smoothness: l,
        sigma0,
        zeta0,
        variation_bound: v,
    } = *p;
    if horizon == 0 {
        return Err(GeomError::InvalidParameter(
            "horizon must be at least 1".into(),
        ));
    }
    for (name, val) in [
        ("diameter", d),
        ("lipschitz", g),
        ("smoothness", l),
        ("sigma0", sigma0),
        ("zeta0", zeta0),
    ] {
        if !(val > 0.0) || !val.is_finite() {
            return Err(GeomError::InvalidParameter(format!(
                "{name} must be positive, got {val}"
            )));
        }
    }
    if !(v >= 0.0) {
        return Err(GeomError::InvalidParameter(format!(
            "variation bound must be non-negative, got {v}"
        )));
    }
    let t = horizon as f64;
    let eta1 = (sigma0 * d * d / (16.0 * zeta0 * zeta0 * g * g * t)).sqrt();
    let n = ((0.5 * (sigma0 * g * g * t / (d * d * l * l)).log2()).ceil() + 1.0).max(1.0) as usize;
    let beta = (1.0 / (12.0 * d.powi(4) * l * l + d * d * g * g * zeta0 * zeta0).sqrt())
        .min(((2.0 + (n as f64).ln()) / (3.0 * d * d * (v + g * g))).sqrt());
    Ok((StepSizePool::geometric(eta1, n)?, beta))
}

/// Expert weights and the running sums of their surrogate losses.
#[derive(Debug, Clone, PartialEq)]
pub struct MetaWeights {
    pub w: Vec<f64>,
    pub cumulative_surrogate: Vec<f64>,
}

impl MetaWeights {
    pub fn uniform(n: usize) -> Self {
        MetaWeights {
            w: vec![1.0 / n as f64; n],
            cumulative_surrogate: vec![0.0; n],
        }
    }

    fn validate(&self) -> Result<()> {
        let s: f64 = self.w.iter().sum();
        if self.w.is_empty()
            || self.w.len() != self.cumulative_surrogate.len()
            || self.w.iter().any(|w| !(*w >= 0.0))
            || (s - 1.0).abs() > 1e-9
        {
            return Err(GeomError::InvalidParameter(
                "meta weights must be a probability vector".into(),
            ));
        }
        Ok(())
    }
}

/// Softmax of `-beta * (cumulative + optimism)`.
fn hedge(beta: f64, cumulative: &[f64], optimism: &[f64]) -> Vec<f64> {
    let logits: Vec<f64> = cumulative
        .iter()
        .zip(optimism)
        .map(|(c, m)| -beta * (c + m))
        .collect();
    let top = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let unnorm: Vec<f64> = logits.iter().map(|l| (l - top).exp()).collect();
    let z: f64 = unnorm.iter().sum();
    unnorm.into_iter().map(|u| u / z).collect()
}

/// Everything one meta round produces.
#[derive(Debug, Clone)]
pub struct RoundOutcome {
    /// The point played this round.
    pub played: Point,
    /// Combination under the previous round's weights.
    pub combined_prior: Point,
    pub experts: Vec<OptimisticState>,
    pub weights: MetaWeights,
    /// Optimistic surrogate `m_i` per expert.
    pub optimism: Vec<f64>,
    /// Realized surrogate `l_i` per expert.
    pub surrogate: Vec<f64>,
}

/// One round of the meta-expert learner.
///
/// `grad` evaluates the gradient of this round's loss; `prev_grad` that of
/// the previous round's loss (`None` on the first round). The played point is
/// fixed before `grad` is consulted.
pub fn aoogd_round<M, F, P>(
    m: &M,
    experts: &[OptimisticState],
    weights: &MetaWeights,
    beta: f64,
    opts: FrechetOptions,
    grad: F,
    prev_grad: Option<P>,
) -> Result<RoundOutcome>
where
    M: Manifold + ?Sized,
    F: Fn(&Point) -> Result<DVector<f64>>,
    P: Fn(&Point) -> Result<DVector<f64>>,
{
    weights.validate()?;
    if experts.len() != weights.w.len() {
        return Err(GeomError::InvalidParameter(format!(
            "{} experts but {} weights",
            experts.len(),
            weights.w.len()
        )));
    }
    let points: Vec<Point> = experts.iter().map(|e| e.x_cur.clone()).collect();

    let combined_prior = weighted_frechet_mean(m, &points, &weights.w, opts)?;
    let optimism = match &prev_grad {
        Some(pg) => {
            let hint = pg(&combined_prior)?;
            points
                .iter()
                .map(|p| Ok(m.inner(&combined_prior, &hint, &m.log(&combined_prior, p)?)))
                .collect::<Result<Vec<_>>>()?
        }
        None => vec![0.0; points.len()],
    };
    let w = hedge(beta, &weights.cumulative_surrogate, &optimism);
    let played = weighted_frechet_mean(m, &points, &w, opts)?;

    let g = grad(&played)?;
    let surrogate = points
        .iter()
        .map(|p| Ok(m.inner(&played, &g, &m.log(&played, p)?)))
        .collect::<Result<Vec<_>>>()?;
    let cumulative_surrogate = weights
        .cumulative_surrogate
        .iter()
        .zip(&surrogate)
        .map(|(c, l)| c + l)
        .collect();

    let next_experts = experts
        .iter()
        .map(|e| {
            let gi = TangentVector::new(e.x_cur.clone(), grad(&e.x_cur)?);
            roogd_step(m, e, &gi)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(RoundOutcome {
        played,
        combined_prior,
        experts: next_experts,
        weights: MetaWeights {
            w,
            cumulative_surrogate,
        },
        optimism,
        surrogate,
    })
}

/// Owned learner wrapping [`aoogd_round`].
#[derive(Debug, Clone)]
pub struct Aoogd {
    pub experts: Vec<OptimisticState>,
    pub weights: MetaWeights,
    pub beta: f64,
    pub frechet: FrechetOptions,
}

impl Aoogd {
    pub fn new<M: Manifold + ?Sized>(
        m: &M,
        x0: &Point,
        pool: &StepSizePool,
        beta: f64,
    ) -> Result<Self> {
        if !(beta > 0.0) {
            return Err(GeomError::InvalidParameter(format!(
                "meta learning rate must be positive, got {beta}"
            )));
        }
        let experts = pool
            .etas()
            .iter()
            .map(|&eta| roogd_init(m, x0, eta))
            .collect::<Result<Vec<_>>>()?;
        Ok(Aoogd {
            weights: MetaWeights::uniform(experts.len()),
            experts,
            beta,
            frechet: FrechetOptions::default(),
        })
    }

    /// Runs one round and returns the played point.
    pub fn round<M, F, P>(&mut self, m: &M, grad: F, prev_grad: Option<P>) -> Result<RoundOutcome>
    where
        M: Manifold + ?Sized,
        F: Fn(&Point) -> Result<DVector<f64>>,
        P: Fn(&Point) -> Result<DVector<f64>>,
    {
        let out = aoogd_round(
            m,
            &self.experts,
            &self.weights,
            self.beta,
            self.frechet,
            grad,
            prev_grad,
        )?;
        self.experts = out.experts.clone();
        self.weights = out.weights.clone();
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifolds::Hyperbolic;
    use nalgebra::DVector;

    type NoGrad = fn(&Point) -> Result<DVector<f64>>;

    #[test]
    fn configure_reference_values() {
        let p = AoogdParams {
            horizon: 1024,
            diameter: 1.0,
            lipschitz: 1.0,
            smoothness: 1.0,
            sigma0: 1.0,
            zeta0: 1.0,
            variation_bound: 0.0,
        };
        let (pool, beta) = aoogd_configure(&p).unwrap();
        assert_eq!(pool.len(), 6);
        assert!((pool.etas()[0] - 1.0 / 128.0).abs() < 1e-15);
        for w in pool.etas().windows(2) {
            assert_eq!(w[1] / w[0], 2.0);
        }
        assert!(beta <= 1.0 / 13f64.sqrt() + 1e-15);
        assert!((beta - 1.0 / 13f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn hedge_is_symmetric_and_normalized() {
        let w = hedge(0.7, &[1.5, 1.5], &[0.2, 0.2]);
        assert_eq!(w, vec![0.5, 0.5]);
        let w = hedge(50.0, &[1e3, -1e3, 0.0], &[0.0, 0.0, 0.0]);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(w[1] > 0.999);
    }

    #[test]
    fn single_expert_is_played() {
        let m = Hyperbolic::new(2);
        let x0 = Hyperbolic::lift(&[0.2, 0.1]);
        let pool = StepSizePool::geometric(0.1, 1).unwrap();
        let mut learner = Aoogd::new(&m, &x0, &pool, 1.0).unwrap();
        let target = Hyperbolic::lift(&[-0.4, 0.3]);
        let grad = |x: &Point| Ok(-m.log(x, &target)?);
        for _ in 0..3 {
            let expert = learner.experts[0].x_cur.clone();
            let out = learner.round(&m, grad, None::<NoGrad>).unwrap();
            assert!(m.dist(&out.played, &expert) < 1e-12);
            assert_eq!(out.weights.w, vec![1.0]);
        }
    }

    #[test]
    fn coincident_experts_play_their_point() {
        let m = Hyperbolic::new(2);
        let x0 = Hyperbolic::lift(&[0.2, 0.1]);
        let pool = StepSizePool::geometric(0.05, 4).unwrap();
        let mut learner = Aoogd::new(&m, &x0, &pool, 1.0).unwrap();
        learner.weights.w = vec![0.1, 0.2, 0.3, 0.4];
        let out = learner
            .round(&m, |x: &Point| Ok(DVector::zeros(x.len())), None::<NoGrad>)
            .unwrap();
        assert!(m.dist(&out.played, &x0) < 1e-12);
    }
}
