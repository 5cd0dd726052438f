use crate::geometry::{GeomError, Manifold, Point, Result, TangentVector};

/// Memory of the optimistic learner: the last two iterates and the gradient
/// received at the earlier one.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimisticState {
    pub x_prev: Point,
    pub x_cur: Point,
    /// Gradient received at `x_prev`.
    pub grad_prev: TangentVector,
    pub step_size: f64,
    /// False until the first gradient arrives.
    primed: bool,
}

impl OptimisticState {
    pub fn is_primed(&self) -> bool {
        self.primed
    }
}

pub fn roogd_init<M: Manifold + ?Sized>(m: &M, x0: &Point, eta: f64) -> Result<OptimisticState> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(GeomError::InvalidParameter(format!(
            "step size must be positive, got {eta}"
        )));
    }
    if x0.len() != m.ambient_dim() {
        return Err(GeomError::Dimension {
            expected: m.ambient_dim(),
            got: x0.len(),
        });
    }
    Ok(OptimisticState {
        x_prev: x0.clone(),
        x_cur: x0.clone(),
        grad_prev: TangentVector::zero(x0),
        step_size: eta,
        primed: false,
    })
}

pub(crate) fn check_gradient(g: &TangentVector, at: &Point) -> Result<()> {
    if !g.is_finite() {
        return Err(GeomError::NonFinite("gradient"));
    }
    if !g.is_based_at(at) {
        return Err(GeomError::BaseMismatch);
    }
    Ok(())
}

/// One optimistic step
/// `x+ = exp_x(-2 eta g_t + eta Gamma_{x_prev -> x}(g_{t-1}))`.
///
/// On the first call the previous gradient is taken equal to `grad_cur`, so
/// the first move is a plain gradient step of length `eta * |g|`.
pub fn roogd_step<M: Manifold + ?Sized>(
    m: &M,
    s: &OptimisticState,
    grad_cur: &TangentVector,
) -> Result<OptimisticState> {
    check_gradient(grad_cur, &s.x_cur)?;
    let eta = s.step_size;
    let memory = if s.primed {
        m.transport(&s.x_prev, &s.x_cur, &s.grad_prev.coords)?
    } else {
        grad_cur.coords.clone()
    };
    let dir = m.project_tangent(&s.x_cur, &(&grad_cur.coords * (-2.0 * eta) + memory * eta));
    let next = m.exp(&s.x_cur, &dir);
    Ok(OptimisticState {
        x_prev: s.x_cur.clone(),
        x_cur: next,
        grad_prev: grad_cur.clone(),
        step_size: eta,
        primed: true,
    })
}

/// Plain Riemannian online gradient descent, `exp_x(-eta g)`.
pub fn rogd_step<M: Manifold + ?Sized>(
    m: &M,
    x: &Point,
    grad: &TangentVector,
    eta: f64,
) -> Result<Point> {
    check_gradient(grad, x)?;
    Ok(m.exp(x, &(&grad.coords * -eta)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifolds::{Euclidean, Hyperbolic};
    use nalgebra::{dvector, DVector};

    #[test]
    fn init_contract() {
        let m = Euclidean::new(2);
        let x0 = dvector![1.0, 2.0];
        let s = roogd_init(&m, &x0, 0.1).unwrap();
        assert_eq!(m.dist(&s.x_prev, &s.x_cur), 0.0);
        assert_eq!(s.grad_prev.norm(&m), 0.0);
        assert!(roogd_init(&m, &x0, 0.0).is_err());
        assert!(roogd_init(&m, &x0, -1.0).is_err());
    }

    #[test]
    fn constant_gradient_hand_iteration() {
        let m = Euclidean::new(1);
        let mut s = roogd_init(&m, &dvector![0.0], 0.1).unwrap();
        let g = |s: &OptimisticState| TangentVector::new(s.x_cur.clone(), dvector![1.0]);
        s = roogd_step(&m, &s, &g(&s)).unwrap();
        assert!((s.x_cur[0] + 0.1).abs() < 1e-15);
        s = roogd_step(&m, &s, &g(&s)).unwrap();
        assert!((s.x_cur[0] + 0.2).abs() < 1e-15);
    }

    #[test]
    fn zero_gradients_fix_the_iterate() {
        let m = Hyperbolic::new(3);
        let x = Hyperbolic::lift(&[0.3, -0.2, 0.5]);
        let mut s = roogd_init(&m, &x, 0.5).unwrap();
        for _ in 0..5 {
            s = roogd_step(&m, &s, &TangentVector::zero(&s.x_cur)).unwrap();
        }
        assert!(m.dist(&s.x_cur, &x) < 1e-12);
    }

    #[test]
    fn rejects_bad_gradients() {
        let m = Euclidean::new(2);
        let s = roogd_init(&m, &dvector![0.0, 0.0], 0.1).unwrap();
        let nan = TangentVector::new(s.x_cur.clone(), dvector![f64::NAN, 0.0]);
        assert!(matches!(
            roogd_step(&m, &s, &nan),
            Err(GeomError::NonFinite(_))
        ));
        let elsewhere = TangentVector::new(dvector![1.0, 0.0], DVector::zeros(2));
        assert!(matches!(
            roogd_step(&m, &s, &elsewhere),
            Err(GeomError::BaseMismatch)
        ));
    }

    #[test]
    fn rogd_basics() {
        let m = Euclidean::new(2);
        let x = dvector![1.0, 1.0];
        let g = TangentVector::new(x.clone(), dvector![2.0, -4.0]);
        let y = rogd_step(&m, &x, &g, 0.25).unwrap();
        assert_eq!(y, dvector![0.5, 2.0]);
        let z = rogd_step(&m, &x, &TangentVector::zero(&x), 0.25).unwrap();
        assert_eq!(z, x);
    }
}
