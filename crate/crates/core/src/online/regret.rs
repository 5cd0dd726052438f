use nalgebra::DVector;

use crate::geometry::{Manifold, Point};

/// Running totals for regret, path length and gradient variation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RegretLedger {
    pub cum_alg_loss: f64,
    pub cum_comparator_loss: f64,
    /// Sum of `d(u_t, u_{t-1})`.
    pub path_length: f64,
    /// Sum over rounds of the largest `|grad f_t(x) - grad f_{t-1}(x)|^2`
    /// seen on the probe points.
    pub grad_variation: f64,
    pub round: usize,
    /// Largest observed distance from an iterate to the feasible-set center.
    pub max_excursion: f64,
}

impl RegretLedger {
    pub fn regret(&self) -> f64 {
        self.cum_alg_loss - self.cum_comparator_loss
    }

    pub fn observe_excursion(&mut self, d: f64) {
        self.max_excursion = self.max_excursion.max(d);
    }
}

/// Gradients of two consecutive losses evaluated at the same point.
#[derive(Debug, Clone)]
pub struct GradientPair {
    pub point: Point,
    pub current: DVector<f64>,
    pub previous: DVector<f64>,
}

pub fn regret_update<M: Manifold + ?Sized>(
    m: &M,
    ledger: &RegretLedger,
    f_alg: f64,
    f_comp: f64,
    u_t: &Point,
    u_prev: Option<&Point>,
    samples: &[GradientPair],
) -> RegretLedger {
    let hop = u_prev.map_or(0.0, |p| m.dist(p, u_t));
    let variation = samples
        .iter()
        .map(|s| {
            let diff = &s.current - &s.previous;
            m.inner(&s.point, &diff, &diff)
        })
        .fold(0.0, f64::max);
    RegretLedger {
        cum_alg_loss: ledger.cum_alg_loss + f_alg,
        cum_comparator_loss: ledger.cum_comparator_loss + f_comp,
        path_length: ledger.path_length + hop,
        grad_variation: ledger.grad_variation + variation,
        round: ledger.round + 1,
        max_excursion: ledger.max_excursion,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifolds::Euclidean;
    use nalgebra::dvector;

    #[test]
    fn path_length_and_variation() {
        let m = Euclidean::new(2);
        let u = dvector![0.0, 0.0];
        let mut l = RegretLedger::default();
        for _ in 0..4 {
            l = regret_update(&m, &l, 1.0, 0.5, &u, Some(&u), &[]);
        }
        assert_eq!(l.path_length, 0.0);
        assert_eq!(l.round, 4);
        assert_eq!(l.regret(), 2.0);

        let same = GradientPair {
            point: u.clone(),
            current: dvector![1.0, 2.0],
            previous: dvector![1.0, 2.0],
        };
        let l2 = regret_update(&m, &l, 0.0, 0.0, &dvector![1.0, 0.0], Some(&u), &[same]);
        assert_eq!(l2.grad_variation, 0.0);
        assert_eq!(l2.path_length, 1.0);

        let moved = GradientPair {
            point: u.clone(),
            current: dvector![1.0, 2.0],
            previous: dvector![0.0, 0.0],
        };
        let l3 = regret_update(&m, &l2, 0.0, 0.0, &u, None, &[moved]);
        assert_eq!(l3.grad_variation, 5.0);
    }
}
