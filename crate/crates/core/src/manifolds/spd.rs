use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, RngCore};
use rand_distr::{Distribution, StandardNormal};

use crate::geometry::{CurvatureBounds, GeomError, Manifold, Point, Result};

/// Symmetric positive definite `d x d` matrices with the affine-invariant
/// metric `<U, V>_X = tr(X^-1 U X^-1 V)`.
///
/// Points and tangents are stored column-major as vectors of length `d*d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spd {
    d: usize,
    eig_lo: f64,
    eig_hi: f64,
}

/// Symmetric eigendecomposition with helpers for spectral functions.
pub(crate) struct SymEig {
    vals: DVector<f64>,
    vecs: DMatrix<f64>,
}

impl SymEig {
    pub(crate) fn new(m: &DMatrix<f64>) -> Self {
        let e = SymmetricEigen::new(symmetrize(m));
        SymEig {
            vals: e.eigenvalues,
            vecs: e.eigenvectors,
        }
    }

    pub(crate) fn values(&self) -> &DVector<f64> {
        &self.vals
    }

    pub(crate) fn map(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let mut scaled = self.vecs.clone();
        for (j, &l) in self.vals.iter().enumerate() {
            let s = f(l);
            scaled.column_mut(j).scale_mut(s);
        }
        let out = scaled * self.vecs.transpose();
        symmetrize(&out)
    }
}

pub(crate) fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Square root and inverse square root of an SPD matrix.
struct Roots {
    sqrt: DMatrix<f64>,
    inv_sqrt: DMatrix<f64>,
}

impl Roots {
    fn of(x: &DMatrix<f64>) -> Self {
        let e = SymEig::new(x);
        Roots {
            sqrt: e.map(f64::sqrt),
            inv_sqrt: e.map(|l| 1.0 / l.sqrt()),
        }
    }

    /// `X^-1/2 M X^-1/2`, symmetrized.
    fn whiten(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        symmetrize(&(&self.inv_sqrt * m * &self.inv_sqrt))
    }

    /// `X^1/2 M X^1/2`, symmetrized.
    fn color(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        symmetrize(&(&self.sqrt * m * &self.sqrt))
    }
}

impl Spd {
    pub fn new(d: usize) -> Self {
        Spd {
            d,
            eig_lo: 0.2,
            eig_hi: 4.5,
        }
    }

    /// Sets the eigenvalue range used by [`Manifold::sample_point`].
    pub fn with_eigen_range(d: usize, lo: f64, hi: f64) -> Result<Self> {
        if !(lo > 0.0 && hi >= lo) {
            return Err(GeomError::InvalidParameter(format!(
                "eigenvalue range [{lo}, {hi}] must be positive and ordered"
            )));
        }
        Ok(Spd {
            d,
            eig_lo: lo,
            eig_hi: hi,
        })
    }

    pub fn size(&self) -> usize {
        self.d
    }

    pub fn eigen_range(&self) -> (f64, f64) {
        (self.eig_lo, self.eig_hi)
    }

    pub fn to_matrix(&self, v: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_column_slice(self.d, self.d, v.as_slice())
    }

    pub fn from_matrix(&self, m: &DMatrix<f64>) -> DVector<f64> {
        DVector::from_column_slice(m.as_slice())
    }

    pub fn identity(&self) -> Point {
        self.from_matrix(&DMatrix::identity(self.d, self.d))
    }

    /// `log det X` from the eigenvalues.
    pub fn logdet(&self, x: &Point) -> f64 {
        SymEig::new(&self.to_matrix(x))
            .values()
            .iter()
            .map(|l| l.ln())
            .sum()
    }

    pub fn eigenvalues(&self, x: &Point) -> DVector<f64> {
        SymEig::new(&self.to_matrix(x)).values().clone()
    }

    fn inverse(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        SymEig::new(x).map(|l| 1.0 / l)
    }
}

impl Manifold for Spd {
    fn name(&self) -> String {
        format!("spd({})", self.d)
    }

    fn ambient_dim(&self) -> usize {
        self.d * self.d
    }

    fn intrinsic_dim(&self) -> usize {
        self.d * (self.d + 1) / 2
    }

    fn curvature(&self) -> CurvatureBounds {
        CurvatureBounds {
            kappa: -0.5,
            upper: 0.0,
        }
    }

    fn inner(&self, x: &Point, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        let xi = self.inverse(&self.to_matrix(x));
        let a = &xi * self.to_matrix(u);
        let b = &xi * self.to_matrix(v);
        // tr(A B) = sum_ij A_ij B_ji
        a.component_mul(&b.transpose()).sum()
    }

    fn exp(&self, x: &Point, v: &DVector<f64>) -> Point {
        let r = Roots::of(&self.to_matrix(x));
        let w = r.whiten(&self.to_matrix(v));
        let e = SymEig::new(&w).map(f64::exp);
        self.from_matrix(&r.color(&e))
    }

    fn log(&self, x: &Point, y: &Point) -> Result<DVector<f64>> {
        let r = Roots::of(&self.to_matrix(x));
        let w = r.whiten(&self.to_matrix(y));
        let eig = SymEig::new(&w);
        if eig.values().iter().any(|&l| !(l > 0.0)) {
            return Err(GeomError::Domain(
                "argument of log is not positive definite".into(),
            ));
        }
        let l = eig.map(f64::ln);
        Ok(self.from_matrix(&r.color(&l)))
    }

    fn dist(&self, x: &Point, y: &Point) -> f64 {
        let r = Roots::of(&self.to_matrix(x));
        let w = r.whiten(&self.to_matrix(y));
        SymEig::new(&w)
            .values()
            .iter()
            .map(|l| l.ln().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    fn transport(&self, x: &Point, y: &Point, v: &DVector<f64>) -> Result<DVector<f64>> {
        // E = (Y X^-1)^1/2 = X^1/2 (X^-1/2 Y X^-1/2)^1/2 X^-1/2
        let r = Roots::of(&self.to_matrix(x));
        let w = r.whiten(&self.to_matrix(y));
        let e = &r.sqrt * SymEig::new(&w).map(f64::sqrt) * &r.inv_sqrt;
        let out = &e * self.to_matrix(v) * e.transpose();
        Ok(self.from_matrix(&symmetrize(&out)))
    }

    fn project_point(&self, x: &Point) -> Point {
        self.from_matrix(&symmetrize(&self.to_matrix(x)))
    }

    fn project_tangent(&self, _x: &Point, v: &DVector<f64>) -> DVector<f64> {
        self.from_matrix(&symmetrize(&self.to_matrix(v)))
    }

    fn point_residual(&self, x: &Point) -> f64 {
        let m = self.to_matrix(x);
        let asym = (&m - m.transpose()).norm();
        if SymEig::new(&m).values().iter().all(|&l| l > 0.0) {
            asym
        } else {
            f64::INFINITY
        }
    }

    fn tangent_residual(&self, _x: &Point, v: &DVector<f64>) -> f64 {
        let m = self.to_matrix(v);
        (&m - m.transpose()).norm()
    }

    fn origin(&self) -> Point {
        self.identity()
    }

    fn sample_point(&self, rng: &mut dyn RngCore) -> Point {
        let g = DMatrix::from_fn(self.d, self.d, |_, _| -> f64 {
            StandardNormal.sample(&mut *rng)
        });
        let q = g.qr().q();
        let vals = DVector::from_fn(self.d, |_, _| rng.random_range(self.eig_lo..=self.eig_hi));
        let m = &q * DMatrix::from_diagonal(&vals) * q.transpose();
        self.from_matrix(&symmetrize(&m))
    }
}
