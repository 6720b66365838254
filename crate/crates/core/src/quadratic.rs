//! Quadratic functions on R^n and their H1 seminorm over balls.
//!
//! A [`QuadraticModel`] is stored in expanded form around a base point `b`:
//!
//! ```text
//! Q(x) = c + g^T (x - b) + 1/2 (x - b)^T G (x - b)
//! ```
//!
//! For a ball `B = {x : |x - x0| <= r}` the squared H1 seminorm has the closed form
//!
//! ```text
//! |Q|^2 = V_n r^n [ r^2/(n+2) |G|_F^2 + |grad Q(x0)|^2 ]
//! ```
//!
//! where `V_n` is the volume of the unit ball. [`h1_seminorm_sq_quadrature`] computes the
//! same integral by brute force and is used to cross-check the closed form.

use nalgebra::{DMatrix, DVector};
use statrs::function::gamma::gamma;

use crate::error::{check_dim, Error, Result};

/// A quadratic polynomial `c + g^T (x - base) + 1/2 (x - base)^T G (x - base)`.
///
/// The Hessian is always exactly symmetric: on construction the lower triangle is taken as
/// authoritative and mirrored into the upper triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticModel {
    base: DVector<f64>,
    c: f64,
    g: DVector<f64>,
    h: DMatrix<f64>,
}

impl QuadraticModel {
    pub fn new(base: DVector<f64>, c: f64, g: DVector<f64>, h: DMatrix<f64>) -> Result<Self> {
        let n = base.len();
        if n == 0 {
            return Err(Error::InvalidArgument(
                "dimension must be at least 1".into(),
            ));
        }
        check_dim(n, g.len())?;
        check_dim(n, h.nrows())?;
        check_dim(n, h.ncols())?;
        let mut h = h;
        for j in 0..n {
            for i in (j + 1)..n {
                h[(j, i)] = h[(i, j)];
            }
        }
        Ok(Self { base, c, g, h })
    }

    /// The zero polynomial, expanded around `base`.
    pub fn zero(base: DVector<f64>) -> Self {
        let n = base.len();
        Self {
            base,
            c: 0.0,
            g: DVector::zeros(n),
            h: DMatrix::zeros(n, n),
        }
    }

    /// A linear function `c + g^T (x - base)`.
    pub fn linear(base: DVector<f64>, c: f64, g: DVector<f64>) -> Result<Self> {
        let n = base.len();
        Self::new(base, c, g, DMatrix::zeros(n, n))
    }

    pub fn dim(&self) -> usize {
        self.base.len()
    }

    pub fn base(&self) -> &DVector<f64> {
        &self.base
    }

    /// Value at the base point.
    pub fn constant(&self) -> f64 {
        self.c
    }

    /// Gradient at the base point.
    pub fn gradient(&self) -> &DVector<f64> {
        &self.g
    }

    pub fn hessian(&self) -> &DMatrix<f64> {
        &self.h
    }

    pub fn hessian_frobenius_sq(&self) -> f64 {
        self.h.norm_squared()
    }

    pub fn evaluate(&self, x: &DVector<f64>) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(self.value_unchecked(x))
    }

    pub(crate) fn value_unchecked(&self, x: &DVector<f64>) -> f64 {
        let s = x - &self.base;
        let hs = &self.h * &s;
        self.c + self.g.dot(&s) + 0.5 * s.dot(&hs)
    }

    /// `grad Q(x) = g + G (x - base)`.
    pub fn gradient_at(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.dim(), x.len())?;
        Ok(self.gradient_unchecked(x))
    }

    pub(crate) fn gradient_unchecked(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.g + &self.h * (x - &self.base)
    }

    /// The same function, expanded around `new_base`.
    pub fn rebase(&self, new_base: &DVector<f64>) -> Result<Self> {
        check_dim(self.dim(), new_base.len())?;
        let s = new_base - &self.base;
        let hs = &self.h * &s;
        Ok(Self {
            base: new_base.clone(),
            c: self.c + self.g.dot(&s) + 0.5 * s.dot(&hs),
            g: &self.g + hs,
            h: self.h.clone(),
        })
    }

    /// `a * self`, keeping the base point.
    pub fn scaled(&self, a: f64) -> Self {
        Self {
            base: self.base.clone(),
            c: a * self.c,
            g: &self.g * a,
            h: &self.h * a,
        }
    }
}

/// `a * q1 + b * q2`, expanded around `q1`'s base point.
pub fn combine(a: f64, q1: &QuadraticModel, b: f64, q2: &QuadraticModel) -> Result<QuadraticModel> {
    check_dim(q1.dim(), q2.dim())?;
    let q2 = q2.rebase(&q1.base)?;
    Ok(QuadraticModel {
        base: q1.base.clone(),
        c: a * q1.c + b * q2.c,
        g: &q1.g * a + &q2.g * b,
        h: &q1.h * a + &q2.h * b,
    })
}

/// Closed ball `{x : |x - center| <= radius}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    center: DVector<f64>,
    radius: f64,
}

impl Ball {
    pub fn new(center: DVector<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "ball radius must be positive and finite, got {radius}"
            )));
        }
        if center.is_empty() {
            return Err(Error::InvalidArgument(
                "ball center must have dimension >= 1".into(),
            ));
        }
        Ok(Self { center, radius })
    }

    pub fn center(&self) -> &DVector<f64> {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn contains(&self, x: &DVector<f64>) -> bool {
        (x - &self.center).norm() <= self.radius
    }
}

/// Volume of the unit ball in R^n, `pi^(n/2) / Gamma(n/2 + 1)`.
pub fn unit_ball_volume(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "unit ball volume needs n >= 1".into(),
        ));
    }
    let half = n as f64 / 2.0;
    Ok(std::f64::consts::PI.powf(half) / gamma(half + 1.0))
}

/// Squared H1 seminorm `integral over B of |grad Q|^2`, in closed form.
pub fn h1_seminorm_sq(q: &QuadraticModel, ball: &Ball) -> Result<f64> {
    h1_inner(q, q, ball)
}

pub fn h1_seminorm(q: &QuadraticModel, ball: &Ball) -> Result<f64> {
    h1_seminorm_sq(q, ball).map(f64::sqrt)
}

/// The H1 semi-inner product `integral over B of grad P . grad R`.
///
/// This is the bilinear form whose diagonal is [`h1_seminorm_sq`]; the odd part of the
/// integrand cancels over the ball, leaving the Frobenius product of the Hessians and the
/// product of the gradients at the center.
pub fn h1_inner(p: &QuadraticModel, q: &QuadraticModel, ball: &Ball) -> Result<f64> {
    let n = ball.dim();
    check_dim(n, p.dim())?;
    check_dim(n, q.dim())?;
    let r = ball.radius;
    let gp = p.gradient_unchecked(&ball.center);
    let gq = q.gradient_unchecked(&ball.center);
    let hess = p.h.dot(&q.h);
    let scale = unit_ball_volume(n)? * r.powi(n as i32);
    Ok(scale * (r * r / (n as f64 + 2.0) * hess + gp.dot(&gq)))
}

/// Largest dimension accepted by the quadrature oracle.
pub const QUADRATURE_MAX_DIM: usize = 5;
/// Smallest grid accepted by the quadrature oracle.
pub const QUADRATURE_MIN_CELLS: usize = 16;

/// Midpoint-rule approximation of the squared H1 seminorm.
///
/// The bounding box of the ball is split into `cells_per_axis^n` cubes; a cube contributes
/// `|grad Q(center)|^2 * volume` when its center lies in the ball. Cost grows as
/// `cells_per_axis^n`, hence the dimension cap.
pub fn h1_seminorm_sq_quadrature(
    q: &QuadraticModel,
    ball: &Ball,
    cells_per_axis: usize,
) -> Result<f64> {
    let n = ball.dim();
    check_dim(n, q.dim())?;
    if n > QUADRATURE_MAX_DIM {
        return Err(Error::InvalidArgument(format!(
            "quadrature oracle supports n <= {QUADRATURE_MAX_DIM}, got {n}"
        )));
    }
    if cells_per_axis < QUADRATURE_MIN_CELLS {
        return Err(Error::InvalidArgument(format!(
            "quadrature oracle needs at least {QUADRATURE_MIN_CELLS} cells per axis, got {cells_per_axis}"
        )));
    }

    let r = ball.radius;
    let step = 2.0 * r / cells_per_axis as f64;
    let g0 = q.gradient_unchecked(&ball.center);
    // Offsets of cell centers from the ball center along one axis.
    let offsets: Vec<f64> = (0..cells_per_axis)
        .map(|k| -r + (k as f64 + 0.5) * step)
        .collect();

    let mut index = vec![0usize; n];
    let mut u = vec![0.0; n];
    let mut grad = vec![0.0; n];
    let mut sum = 0.0;
    loop {
        let mut dist_sq = 0.0;
        for (ui, &k) in u.iter_mut().zip(&index) {
            *ui = offsets[k];
            dist_sq += *ui * *ui;
        }
        if dist_sq <= r * r {
            for (i, gi) in grad.iter_mut().enumerate() {
                let mut acc = g0[i];
                for (j, uj) in u.iter().enumerate() {
                    acc += q.h[(i, j)] * uj;
                }
                *gi = acc;
            }
            sum += grad.iter().map(|v| v * v).sum::<f64>();
        }

        // Odometer increment over the n-dimensional grid.
        let mut axis = 0;
        loop {
            if axis == n {
                return Ok(sum * step.powi(n as i32));
            }
            index[axis] += 1;
            if index[axis] < cells_per_axis {
                break;
            }
            index[axis] = 0;
            axis += 1;
        }
    }
}
