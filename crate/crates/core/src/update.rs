//! Symmetric Broyden and extended symmetric Broyden model updates.
//!
//! The new model is the interpolant closest to the previous one `Q0`,
//!
//! ```text
//! min |grad^2 Q - grad^2 Q0|_F^2 + sigma |grad Q(x0) - grad Q0(x0)|^2   s.t. Q(y) = F(y), y in S,
//! ```
//!
//! which is `Q0` plus the least-norm interpolant of the residuals `F - Q0`. With `sigma > 0`
//! this is the H1 distance to `Q0` on the ball `B(x0, sqrt((n+2)/sigma))`, so choosing
//! `(x0, sigma)` amounts to choosing that ball.

use nalgebra::DVector;

use crate::error::{check_dim, Error, Result};
use crate::interpolation::{solve_p1, InterpolationSet, LeastNormSpec, LeastNormSystem};
use crate::quadratic::{combine, h1_seminorm_sq, Ball, QuadraticModel};

/// Default multiplier of the trust-region radius in the geometric rule.
pub const DEFAULT_MULTIPLIER: f64 = 10.0;
/// Floor on the gradient magnitude estimate in the eta/xi rule.
pub const ETA_XI_FLOOR: f64 = 1e-12;
/// Clamp range of the eta/xi rule.
pub const SIGMA_MIN: f64 = 1e-12;
pub const SIGMA_MAX: f64 = 1e12;

/// How the update picks its weight `sigma` (the anchor is always the trust-region center).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SigmaRule {
    /// Ball of radius `max(M * Delta, max_j |y_j - center|)` around the trust-region center.
    Geometric { multiplier: f64 },
    /// Balance `|grad^2 l_0|_F^2` against `|grad l_0(x0)|^2` for the Lagrange function of the
    /// new point. This is a one-solve surrogate of the eta/xi idea, not a reproduction of any
    /// particular published estimator.
    EtaXi,
    /// A constant weight; `Fixed(0.0)` is the plain symmetric Broyden update.
    Fixed(f64),
}

impl SigmaRule {
    pub fn geometric(multiplier: f64) -> Result<Self> {
        let rule = Self::Geometric { multiplier };
        rule.validate()?;
        Ok(rule)
    }

    pub fn fixed(value: f64) -> Result<Self> {
        let rule = Self::Fixed(value);
        rule.validate()?;
        Ok(rule)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Geometric { multiplier } if !(multiplier >= 1.0 && multiplier.is_finite()) => {
                Err(Error::InvalidArgument(format!(
                    "geometric multiplier must be >= 1, got {multiplier}"
                )))
            }
            Self::Fixed(v) if !(v >= 0.0 && v.is_finite()) => Err(Error::InvalidArgument(format!(
                "fixed sigma must be finite and nonnegative, got {v}"
            ))),
            _ => Ok(()),
        }
    }
}

impl Default for SigmaRule {
    fn default() -> Self {
        Self::Geometric {
            multiplier: DEFAULT_MULTIPLIER,
        }
    }
}

/// Everything an update needs: trust region, points with fresh data, and the old model.
#[derive(Debug, Clone)]
pub struct UpdateContext {
    pub tr_center: DVector<f64>,
    pub tr_radius: f64,
    /// Interpolation points with the objective values the new model must match.
    pub set: InterpolationSet,
    pub prior: QuadraticModel,
    /// Index of the point where `prior` does not interpolate, when known.
    pub new_index: Option<usize>,
}

impl UpdateContext {
    pub fn new(
        tr_center: DVector<f64>,
        tr_radius: f64,
        set: InterpolationSet,
        prior: QuadraticModel,
    ) -> Result<Self> {
        let n = set.dim();
        check_dim(n, tr_center.len())?;
        check_dim(n, prior.dim())?;
        if !(tr_radius > 0.0 && tr_radius.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "trust-region radius must be positive, got {tr_radius}"
            )));
        }
        Ok(Self {
            tr_center,
            tr_radius,
            set,
            prior,
            new_index: None,
        })
    }

    pub fn with_new_index(mut self, index: usize) -> Self {
        self.new_index = Some(index);
        self
    }

    fn residuals(&self) -> Vec<f64> {
        self.set
            .points()
            .iter()
            .zip(self.set.values())
            .map(|(y, f)| f - self.prior.value_unchecked(y))
            .collect()
    }

    /// The point carrying new information: the given index, or else the largest residual.
    fn new_point_index(&self) -> Result<usize> {
        match self.new_index {
            Some(k) if k < self.set.len() => Ok(k),
            Some(k) => Err(Error::InvalidArgument(format!(
                "new point index {k} out of range 0..{}",
                self.set.len()
            ))),
            None => Ok(self
                .residuals()
                .iter()
                .enumerate()
                .fold((0, -1.0), |best, (j, r)| {
                    if r.abs() > best.1 {
                        (j, r.abs())
                    } else {
                        best
                    }
                })
                .0),
        }
    }
}

/// Ball parameters picked by the geometric rule.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometricChoice {
    pub x0: DVector<f64>,
    pub sigma: f64,
    pub radius: f64,
}

/// `r = max(M * Delta, max_j |y_j - center|)`, `sigma = (n+2)/r^2`, `x0 = center`.
pub fn sigma_geometric(ctx: &UpdateContext, multiplier: f64) -> Result<GeometricChoice> {
    SigmaRule::geometric(multiplier)?;
    let n = ctx.set.dim();
    let farthest = ctx
        .set
        .points()
        .iter()
        .map(|y| (y - &ctx.tr_center).norm())
        .fold(0.0, f64::max);
    let radius = (multiplier * ctx.tr_radius).max(farthest);
    Ok(GeometricChoice {
        x0: ctx.tr_center.clone(),
        sigma: (n as f64 + 2.0) / (radius * radius),
        radius,
    })
}

/// `eta / xi` for a given Lagrange function, clamped to `[SIGMA_MIN, SIGMA_MAX]`.
pub fn sigma_from_lagrange(l0: &QuadraticModel, x0: &DVector<f64>) -> Result<f64> {
    let eta = l0.hessian_frobenius_sq();
    let xi = l0.gradient_at(x0)?.norm_squared().max(ETA_XI_FLOOR);
    Ok((eta / xi).clamp(SIGMA_MIN, SIGMA_MAX))
}

/// The eta/xi surrogate: compute the new point's Lagrange function with
/// `provisional_sigma` at `x0 = center`, then balance its two norms.
pub fn sigma_eta_xi(ctx: &UpdateContext, provisional_sigma: f64) -> Result<f64> {
    let k = ctx.new_point_index()?;
    let system = LeastNormSystem::new(ctx.set.points(), &ctx.tr_center, provisional_sigma)?;
    let l0 = system.lagrange_function(k)?;
    sigma_from_lagrange(&l0, &ctx.tr_center)
}

/// Anchor and weight the rule selects for this context.
pub fn choose_sigma(ctx: &UpdateContext, rule: &SigmaRule) -> Result<f64> {
    rule.validate()?;
    match *rule {
        SigmaRule::Geometric { multiplier } => Ok(sigma_geometric(ctx, multiplier)?.sigma),
        SigmaRule::Fixed(v) => Ok(v),
        SigmaRule::EtaXi => {
            let provisional = sigma_geometric(ctx, DEFAULT_MULTIPLIER)?.sigma;
            sigma_eta_xi(ctx, provisional)
        }
    }
}

#[derive(Debug, Clone)]
pub struct UpdateOutcome {
    pub model: QuadraticModel,
    pub x0: DVector<f64>,
    pub sigma: f64,
}

/// Extended symmetric Broyden update: `Q+ = Q0 + D`, with `D` the least-norm interpolant of
/// the residuals `F(y_j) - Q0(y_j)` for the rule's `(x0, sigma)`. The result is expanded
/// around the trust-region center.
pub fn esb_update(ctx: &UpdateContext, rule: &SigmaRule) -> Result<UpdateOutcome> {
    let sigma = choose_sigma(ctx, rule)?;
    let x0 = ctx.tr_center.clone();
    let spec = LeastNormSpec::new(x0.clone(), sigma).with_prior(ctx.prior.clone());
    let model = solve_p1(&ctx.set, &spec)?;
    Ok(UpdateOutcome { model, x0, sigma })
}

/// The same update through the Lagrange function of the single new point:
/// `Q+ = Q0 + [F(y_k) - Q0(y_k)] l_k`. Only valid when `Q0` already interpolates every other
/// point, which is checked.
pub fn one_point_update(ctx: &UpdateContext, rule: &SigmaRule) -> Result<UpdateOutcome> {
    let k = ctx.new_index.ok_or_else(|| {
        Error::InvalidArgument("one-point update needs the new point index".into())
    })?;
    if k >= ctx.set.len() {
        return Err(Error::InvalidArgument(format!(
            "new point index {k} out of range"
        )));
    }
    let residuals = ctx.residuals();
    let scale = 1.0 + ctx.set.values().iter().map(|v| v.abs()).fold(0.0, f64::max);
    if let Some((j, r)) = residuals
        .iter()
        .enumerate()
        .find(|&(j, r)| j != k && r.abs() > 1e-10 * scale)
    {
        return Err(Error::InvalidArgument(format!(
            "prior does not interpolate point {j} (residual {r:e})"
        )));
    }
    let sigma = choose_sigma(ctx, rule)?;
    let x0 = ctx.tr_center.clone();
    let system = LeastNormSystem::new(ctx.set.points(), &x0, sigma)?;
    let lk = system.lagrange_function(k)?;
    let model = combine(residuals[k], &lk, 1.0, &ctx.prior)?;
    Ok(UpdateOutcome { model, x0, sigma })
}

/// Relative defect of `|Q+ - F|^2 = |Q0 - F|^2 - |Q+ - Q0|^2` in `H1(B)`:
///
/// ```text
/// | |Q+ - F|^2 - |Q0 - F|^2 + |Q+ - Q0|^2 | / (1 + |Q0 - F|^2)
/// ```
pub fn pythagorean_residual(
    q0: &QuadraticModel,
    qp: &QuadraticModel,
    f: &QuadraticModel,
    ball: &Ball,
) -> Result<f64> {
    let plus_err = h1_seminorm_sq(&combine(1.0, qp, -1.0, f)?, ball)?;
    let prior_err = h1_seminorm_sq(&combine(1.0, q0, -1.0, f)?, ball)?;
    let change = h1_seminorm_sq(&combine(1.0, qp, -1.0, q0)?, ball)?;
    Ok((plus_err - prior_err + change).abs() / (1.0 + prior_err))
}
