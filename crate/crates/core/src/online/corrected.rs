use super::optimistic::check_gradient;
use crate::geometry::{GeomError, Manifold, Point, Result, TangentVector};

/// State of the correction-term variant of the optimistic learner, which
/// re-bases the previous step through `log_x(x_hat)` instead of transporting
/// the previous gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectedState {
    pub x_cur: Point,
    pub x_hat: Point,
    pub step_size: f64,
    primed: bool,
}

pub fn roogd_corrected_init<M: Manifold + ?Sized>(
    m: &M,
    x0: &Point,
    eta: f64,
) -> Result<CorrectedState> {
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
    Ok(CorrectedState {
        x_cur: x0.clone(),
        x_hat: x0.clone(),
        step_size: eta,
        primed: false,
    })
}

/// `x+ = exp_x(-2 eta g + log_x(x_hat))`, `x_hat+ = exp_x(-eta g + log_x(x_hat))`.
///
/// The first call uses `eta * g` in place of `log_x(x_hat)`, the same
/// previous-gradient convention as [`super::roogd_step`].
pub fn roogd_corrected_step<M: Manifold + ?Sized>(
    m: &M,
    s: &CorrectedState,
    grad_cur: &TangentVector,
) -> Result<CorrectedState> {
    check_gradient(grad_cur, &s.x_cur)?;
    let eta = s.step_size;
    let offset = if s.primed {
        m.log(&s.x_cur, &s.x_hat)?
    } else {
        &grad_cur.coords * eta
    };
    let x_next = m.exp(&s.x_cur, &(&grad_cur.coords * (-2.0 * eta) + &offset));
    let hat_next = m.exp(&s.x_cur, &(&grad_cur.coords * -eta + &offset));
    Ok(CorrectedState {
        x_cur: x_next,
        x_hat: hat_next,
        step_size: eta,
        primed: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifolds::Euclidean;
    use nalgebra::dvector;

    #[test]
    fn unchanged_without_gradients() {
        let m = Euclidean::new(2);
        let x = dvector![0.5, -1.0];
        let mut s = roogd_corrected_init(&m, &x, 0.2).unwrap();
        for _ in 0..3 {
            s = roogd_corrected_step(&m, &s, &TangentVector::zero(&s.x_cur)).unwrap();
        }
        assert_eq!(s.x_cur, x);
        assert_eq!(s.x_hat, x);
    }
}
