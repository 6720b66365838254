//! Model-based trust-region minimization without derivatives.
//!
//! The solver keeps `npt` interpolation points (default `2n + 1`) and a quadratic model that
//! interpolates the objective on them. Each iteration minimizes the model in the trust
//! region, evaluates the trial point, swaps it into the point set and refreshes the model
//! with the extended symmetric Broyden update. The lower bound `rho` on the trust-region
//! radius is reduced by a factor of ten whenever the model stops producing progress and the
//! point set is well spread around the best point; the run ends once `rho` has reached
//! `rhoend` and another reduction is requested.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;

use crate::error::{check_dim, Error, Result};
use crate::interpolation::{ensure_distinct, InterpolationSet, LeastNormSystem, TOL_DISTINCT};
use crate::quadratic::QuadraticModel;
use crate::update::{esb_update, SigmaRule, UpdateContext};

const RATIO_BAD: f64 = 0.1;
const RATIO_GOOD: f64 = 0.7;
const SHRINK: f64 = 0.5;
const EXPAND: f64 = 2.0;
const RHO_FACTOR: f64 = 10.0;
/// A radius within this factor of `rho` is set to `rho`.
const SNAP: f64 = 1.5;
/// Trial steps shorter than `SHORT_STEP * rho` are not evaluated.
const SHORT_STEP: f64 = 0.5;
/// Points farther than `FAR_FACTOR * delta` from the best point trigger a geometry step.
const FAR_FACTOR: f64 = 2.0;
/// Relative gap below which two values count as tied. Ties go to the lower index, so runs
/// that agree in exact arithmetic make the same choices despite rounding noise.
const TIE: f64 = 1e-13;
/// Iterations without improvement at `rho = rhoend`, per variable, before giving up.
const STALL_PER_DIM: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Status {
    Converged,
    MaxFun,
    Stalled,
    Error,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::MaxFun => "maxfun",
            Status::Stalled => "stalled",
            Status::Error => "error",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Status {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "converged" => Ok(Status::Converged),
            "maxfun" => Ok(Status::MaxFun),
            "stalled" => Ok(Status::Stalled),
            "error" => Ok(Status::Error),
            other => Err(Error::InvalidArgument(format!("unknown status `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub rhobeg: f64,
    /// Final trust-region radius; sets the accuracy of the returned point.
    pub rhoend: f64,
    pub maxfun: usize,
    /// Number of interpolation points; `None` means `2n + 1`.
    pub npt: Option<usize>,
    pub sigma_rule: SigmaRule,
    /// Reserved for stochastic tie-breaking. The current algorithm is fully deterministic.
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rhobeg: 0.5,
            rhoend: 1e-6,
            maxfun: 1000,
            npt: None,
            sigma_rule: SigmaRule::default(),
            seed: 0,
        }
    }
}

impl SolverConfig {
    /// Checks the configuration for an `n`-dimensional problem and resolves `npt`.
    pub fn validate(&self, n: usize) -> Result<usize> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "problem dimension must be >= 1".into(),
            ));
        }
        if !(self.rhoend > 0.0 && self.rhoend <= self.rhobeg && self.rhobeg.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "need 0 < rhoend <= rhobeg, got rhoend = {}, rhobeg = {}",
                self.rhoend, self.rhobeg
            )));
        }
        let npt = self.npt.unwrap_or(2 * n + 1);
        let max_npt = (n + 1) * (n + 2) / 2;
        if npt < n + 2 || npt > max_npt {
            return Err(Error::InvalidArgument(format!(
                "npt must lie in [{}, {max_npt}], got {npt}",
                n + 2
            )));
        }
        if self.maxfun < npt {
            return Err(Error::InvalidArgument(format!(
                "maxfun ({}) must be at least npt ({npt})",
                self.maxfun
            )));
        }
        self.sigma_rule.validate()?;
        Ok(npt)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverReport {
    pub best_point: Vec<f64>,
    pub best_value: f64,
    /// Number of objective evaluations.
    pub nf: usize,
    pub status: Status,
    /// `(nf, best value so far)` at every improvement, starting after the initial stencil.
    pub history: Vec<(usize, f64)>,
    /// Largest interpolation residual of any model built during the run, relative to
    /// `1 + max |F|` over the points.
    pub max_interpolation_error: f64,
    pub message: Option<String>,
}

/// Initial interpolation points: `x_hat`, then `x_hat + rhobeg e_i`, then
/// `x_hat - rhobeg e_i` for as many `i` as `npt` allows. Beyond `2n + 1` points,
/// `x_hat + rhobeg (e_p + e_q)` for `p < q` in lexicographic order.
pub fn initial_point_set(
    xhat: &DVector<f64>,
    rhobeg: f64,
    npt: usize,
) -> Result<Vec<DVector<f64>>> {
    let n = xhat.len();
    if n == 0 {
        return Err(Error::InvalidArgument("dimension must be >= 1".into()));
    }
    let max_npt = (n + 1) * (n + 2) / 2;
    if npt < n + 2 || npt > max_npt {
        return Err(Error::InvalidArgument(format!(
            "npt must lie in [{}, {max_npt}], got {npt}",
            n + 2
        )));
    }
    if !(rhobeg > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "rhobeg must be positive, got {rhobeg}"
        )));
    }
    let mut points = Vec::with_capacity(npt);
    points.push(xhat.clone());
    for i in 0..n {
        let mut p = xhat.clone();
        p[i] += rhobeg;
        points.push(p);
    }
    for i in 0..n {
        if points.len() == npt {
            return Ok(points);
        }
        let mut p = xhat.clone();
        p[i] -= rhobeg;
        points.push(p);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if points.len() == npt {
                return Ok(points);
            }
            let mut p = xhat.clone();
            p[i] += rhobeg;
            p[j] += rhobeg;
            points.push(p);
        }
    }
    Ok(points)
}

/// Truncated conjugate gradient (Steihaug-Toint) for `min Q(center + d)` over
/// `|d| <= radius`. Stops on the boundary at nonpositive curvature or when the CG iterate
/// leaves the region; returns the zero step when the model gradient at `center` vanishes.
pub fn trust_region_subproblem(
    q: &QuadraticModel,
    center: &DVector<f64>,
    radius: f64,
) -> Result<DVector<f64>> {
    let n = q.dim();
    check_dim(n, center.len())?;
    if !(radius > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "radius must be positive, got {radius}"
        )));
    }
    let g = q.gradient_unchecked(center);
    let hess = q.hessian();
    let gnorm = g.norm();
    let mut d = DVector::zeros(n);
    if gnorm == 0.0 {
        return Ok(d);
    }
    let mut r = g.clone();
    let mut p = -&g;
    let mut rr = r.norm_squared();
    let tol = 1e-10 * gnorm;
    for _ in 0..2 * n {
        let hp = hess * &p;
        let curvature = p.dot(&hp);
        if curvature <= 0.0 {
            return Ok(to_boundary(&d, &p, radius));
        }
        let alpha = rr / curvature;
        let next = &d + &p * alpha;
        if next.norm() >= radius {
            return Ok(to_boundary(&d, &p, radius));
        }
        d = next;
        r.axpy(alpha, &hp, 1.0);
        let rr_next = r.norm_squared();
        if rr_next.sqrt() <= tol {
            break;
        }
        let beta = rr_next / rr;
        rr = rr_next;
        p = -&r + p * beta;
    }
    Ok(d)
}

/// `d + tau p` with `tau >= 0` chosen so that `|d + tau p| = radius`.
fn to_boundary(d: &DVector<f64>, p: &DVector<f64>, radius: f64) -> DVector<f64> {
    let pp = p.norm_squared();
    let dp = d.dot(p);
    let dd = d.norm_squared();
    let disc = (dp * dp + pp * (radius * radius - dd)).max(0.0);
    let tau = (-dp + disc.sqrt()) / pp;
    d + p * tau
}

/// Picks the point to drop when `new_point` enters the set: the maximizer of
/// `|l_j(new_point)| * max(1, |y_j - center|^4 / radius^4)`, skipping `protected` (the best
/// point). The choice is checked to leave a nonsingular system; otherwise the farthest
/// point is tried.
#[allow(clippy::too_many_arguments)]
pub fn select_replacement_point(
    points: &[DVector<f64>],
    x0: &DVector<f64>,
    sigma: f64,
    new_point: &DVector<f64>,
    tr_center: &DVector<f64>,
    tr_radius: f64,
    protected: Option<usize>,
) -> Result<usize> {
    let system = LeastNormSystem::new(points, x0, sigma)?;
    check_dim(system.dim(), new_point.len())?;
    check_dim(system.dim(), tr_center.len())?;

    let scale = 1.0
        + points
            .iter()
            .map(|p| p.norm())
            .fold(new_point.norm(), f64::max);
    if let Some(k) = points
        .iter()
        .position(|y| (y - new_point).norm() <= TOL_DISTINCT * scale)
    {
        return if Some(k) == protected {
            Err(Error::GeometryFailure)
        } else {
            Ok(k)
        };
    }

    let lagrange = system.lagrange_values(new_point)?;
    let mut best: Option<(usize, f64)> = None;
    for (j, y) in points.iter().enumerate() {
        if Some(j) == protected {
            continue;
        }
        let score = lagrange[j].abs() * replacement_weight(y, tr_center, tr_radius);
        if best.is_none_or(|(_, s)| exceeds(score, s)) {
            best = Some((j, score));
        }
    }
    let candidate = best.ok_or(Error::GeometryFailure)?.0;
    if keeps_nonsingular(points, candidate, new_point, x0, sigma) {
        return Ok(candidate);
    }

    let farthest = farthest_point(points, tr_center, protected).ok_or(Error::GeometryFailure)?;
    if farthest != candidate && keeps_nonsingular(points, farthest, new_point, x0, sigma) {
        return Ok(farthest);
    }
    Err(Error::GeometryFailure)
}

pub(crate) fn replacement_weight(y: &DVector<f64>, center: &DVector<f64>, radius: f64) -> f64 {
    let ratio = (y - center).norm() / radius;
    ratio.powi(4).max(1.0)
}

fn keeps_nonsingular(
    points: &[DVector<f64>],
    index: usize,
    new_point: &DVector<f64>,
    x0: &DVector<f64>,
    sigma: f64,
) -> bool {
    let mut trial = points.to_vec();
    trial[index] = new_point.clone();
    ensure_distinct(&trial).is_ok() && LeastNormSystem::check(&trial, x0, sigma).is_ok()
}

fn farthest_point(
    points: &[DVector<f64>],
    center: &DVector<f64>,
    protected: Option<usize>,
) -> Option<usize> {
    points
        .iter()
        .enumerate()
        .filter(|(j, _)| Some(*j) != protected)
        .map(|(j, y)| (j, (y - center).norm()))
        .fold(None, |best: Option<(usize, f64)>, (j, d)| match best {
            Some((_, bd)) if !exceeds(d, bd) => best,
            _ => Some((j, d)),
        })
        .map(|(j, _)| j)
}

/// Model-improvement point for replacing `worst_index`: from `tr_center`, step `tr_radius`
/// along `+-` the normalized gradient of that point's Lagrange function, keeping the sign
/// with the larger `|l|`.
pub fn geometry_step_point(
    points: &[DVector<f64>],
    x0: &DVector<f64>,
    sigma: f64,
    worst_index: usize,
    tr_center: &DVector<f64>,
    tr_radius: f64,
) -> Result<DVector<f64>> {
    let system = LeastNormSystem::new(points, x0, sigma)?;
    let l = system.lagrange_function(worst_index)?;
    geometry_step_from_lagrange(&l, tr_center, tr_radius)
}

/// [`geometry_step_point`] for an explicit Lagrange function. A vanishing gradient falls
/// back to the coordinate direction with the largest `|l|`.
pub fn geometry_step_from_lagrange(
    l: &QuadraticModel,
    center: &DVector<f64>,
    radius: f64,
) -> Result<DVector<f64>> {
    let n = l.dim();
    check_dim(n, center.len())?;
    if !(radius > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "radius must be positive, got {radius}"
        )));
    }
    let g = l.gradient_unchecked(center);
    let gnorm = g.norm();
    let pick = |dir: DVector<f64>| {
        let plus = center + &dir * radius;
        let minus = center - &dir * radius;
        let lp = l.value_unchecked(&plus).abs();
        let lm = l.value_unchecked(&minus).abs();
        if exceeds(lm, lp) {
            (minus, lm)
        } else {
            (plus, lp)
        }
    };
    if gnorm > 0.0 && gnorm.is_finite() {
        return Ok(pick(g / gnorm).0);
    }
    let mut best: Option<(DVector<f64>, f64)> = None;
    for i in 0..n {
        let mut e = DVector::zeros(n);
        e[i] = 1.0;
        let cand = pick(e);
        if best.as_ref().is_none_or(|(_, v)| exceeds(cand.1, *v)) {
            best = Some(cand);
        }
    }
    Ok(best.expect("n >= 1").0)
}

enum Stop {
    Budget,
    Failed(String),
}

struct Run<'a, F> {
    f: F,
    config: &'a SolverConfig,
    n: usize,
    points: Vec<DVector<f64>>,
    fvals: Vec<f64>,
    kopt: usize,
    model: QuadraticModel,
    x0: DVector<f64>,
    sigma: f64,
    delta: f64,
    rho: f64,
    nf: usize,
    history: Vec<(usize, f64)>,
    max_interpolation_error: f64,
}

impl<F: FnMut(&[f64]) -> f64> Run<'_, F> {
    fn evaluate(&mut self, x: &DVector<f64>) -> std::result::Result<f64, Stop> {
        if self.nf >= self.config.maxfun {
            return Err(Stop::Budget);
        }
        let value = (self.f)(x.as_slice());
        self.nf += 1;
        if !value.is_finite() {
            return Err(Stop::Failed(format!(
                "objective returned {value} at evaluation {}",
                self.nf
            )));
        }
        Ok(value)
    }

    fn best_value(&self) -> f64 {
        self.fvals[self.kopt]
    }

    /// Puts `(x, fx)` at `index` and moves the best point if it improved.
    fn replace(&mut self, index: usize, x: DVector<f64>, fx: f64) -> bool {
        let improved = exceeds(self.best_value(), fx);
        self.points[index] = x;
        self.fvals[index] = fx;
        if improved {
            self.kopt = index;
            self.history.push((self.nf, fx));
        } else if index == self.kopt {
            // Only reachable if the best point itself was replaced by a worse one.
            self.kopt = argmin(&self.fvals);
        }
        improved
    }

    fn update_model(&mut self, new_index: Option<usize>) -> std::result::Result<(), Stop> {
        let set = InterpolationSet::new(self.points.clone(), self.fvals.clone())
            .map_err(|e| Stop::Failed(e.to_string()))?;
        let mut ctx = UpdateContext::new(
            self.points[self.kopt].clone(),
            self.delta,
            set,
            self.model.clone(),
        )
        .map_err(|e| Stop::Failed(e.to_string()))?;
        if let Some(k) = new_index {
            ctx = ctx.with_new_index(k);
        }
        let out = esb_update(&ctx, &self.config.sigma_rule)
            .map_err(|e| Stop::Failed(format!("model update: {e}")))?;
        self.model = out.model;
        self.x0 = out.x0;
        self.sigma = out.sigma;

        let scale = 1.0 + self.fvals.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let worst = self
            .points
            .iter()
            .zip(&self.fvals)
            .map(|(y, f)| (self.model.value_unchecked(y) - f).abs())
            .fold(0.0, f64::max);
        self.max_interpolation_error = self.max_interpolation_error.max(worst / scale);
        Ok(())
    }

    /// Index of the point farthest from the best one, if it lies beyond `FAR_FACTOR * delta`.
    fn far_point(&self) -> Option<usize> {
        let center = &self.points[self.kopt];
        let j = farthest_point(&self.points, center, Some(self.kopt))?;
        ((&self.points[j] - center).norm() > FAR_FACTOR * self.delta).then_some(j)
    }

    fn geometry_step(&mut self, j: usize) -> std::result::Result<(), Stop> {
        let center = self.points[self.kopt].clone();
        let dist = (&self.points[j] - &center).norm();
        let radius = (0.1 * dist).min(self.delta).max(self.rho);
        let x = geometry_step_point(&self.points, &self.x0, self.sigma, j, &center, radius)
            .map_err(|e| Stop::Failed(format!("geometry step: {e}")))?;
        let fx = self.evaluate(&x)?;
        self.replace(j, x, fx);
        self.update_model(Some(j))
    }

    fn snap_delta(&mut self) {
        if self.delta <= SNAP * self.rho {
            self.delta = self.rho;
        }
    }

    /// Returns `false` when `rho` is already at `rhoend`.
    fn reduce_rho(&mut self) -> bool {
        if self.rho <= self.config.rhoend {
            return false;
        }
        let old = self.rho;
        self.rho = (self.rho / RHO_FACTOR).max(self.config.rhoend);
        self.delta = (SHRINK * old).max(self.rho);
        true
    }

    fn iterate(&mut self) -> std::result::Result<Status, Stop> {
        let stall_limit = STALL_PER_DIM * self.n;
        let mut stalled_for = 0;
        loop {
            if self.nf >= self.config.maxfun {
                return Err(Stop::Budget);
            }
            let xopt = self.points[self.kopt].clone();
            let d = trust_region_subproblem(&self.model, &xopt, self.delta)
                .map_err(|e| Stop::Failed(e.to_string()))?;
            let dnorm = d.norm();

            if dnorm < SHORT_STEP * self.rho {
                self.delta *= SHRINK;
                self.snap_delta();
                if let Some(j) = self.far_point() {
                    self.geometry_step(j)?;
                } else if self.delta <= self.rho && !self.reduce_rho() {
                    return Ok(Status::Converged);
                }
                continue;
            }

            let xnew = &xopt + &d;
            let fnew = self.evaluate(&xnew)?;
            let fopt = self.best_value();
            let predicted = self.model.value_unchecked(&xopt) - self.model.value_unchecked(&xnew);
            let ratio = if predicted > 0.0 {
                (fopt - fnew) / predicted
            } else {
                -1.0
            };

            if ratio <= RATIO_BAD {
                self.delta *= SHRINK;
            } else if ratio > RATIO_GOOD {
                self.delta = self.delta.max(EXPAND * dnorm);
            }
            self.snap_delta();

            let j = select_replacement_point(
                &self.points,
                &self.x0,
                self.sigma,
                &xnew,
                &xopt,
                self.delta,
                Some(self.kopt),
            )
            .map_err(|e| Stop::Failed(format!("point replacement: {e}")))?;
            let improved = self.replace(j, xnew, fnew);
            self.update_model(Some(j))?;

            if self.rho <= self.config.rhoend {
                stalled_for = if improved { 0 } else { stalled_for + 1 };
                if stalled_for >= stall_limit {
                    return Ok(Status::Stalled);
                }
            }

            if ratio <= RATIO_BAD && self.delta <= self.rho {
                if let Some(j) = self.far_point() {
                    self.geometry_step(j)?;
                } else if !self.reduce_rho() {
                    return Ok(Status::Converged);
                }
            }
        }
    }

    fn report(self, status: Status, message: Option<String>) -> SolverReport {
        SolverReport {
            best_point: self.points[self.kopt].as_slice().to_vec(),
            best_value: self.fvals[self.kopt],
            nf: self.nf,
            status,
            history: self.history,
            max_interpolation_error: self.max_interpolation_error,
            message,
        }
    }
}

/// `a > b` by more than the tie tolerance.
fn exceeds(a: f64, b: f64) -> bool {
    a - b > TIE * a.abs().max(b.abs())
}

fn argmin(values: &[f64]) -> usize {
    values.iter().enumerate().fold(
        0,
        |best, (j, &v)| if exceeds(values[best], v) { j } else { best },
    )
}

/// Minimizes `f` from `xhat`. Invalid configurations are reported as errors; failures during
/// the run (non-finite objective values, numerical breakdown) end it with
/// [`Status::Error`] and a message, keeping the best point found so far.
pub fn minimize<F>(f: F, xhat: &[f64], config: &SolverConfig) -> Result<SolverReport>
where
    F: FnMut(&[f64]) -> f64,
{
    let n = xhat.len();
    let npt = config.validate(n)?;
    let xhat = DVector::from_column_slice(xhat);
    let points = initial_point_set(&xhat, config.rhobeg, npt)?;

    let mut run = Run {
        f,
        config,
        n,
        points: Vec::with_capacity(npt),
        fvals: Vec::with_capacity(npt),
        kopt: 0,
        model: QuadraticModel::zero(xhat.clone()),
        x0: xhat.clone(),
        sigma: 0.0,
        delta: config.rhobeg,
        rho: config.rhobeg,
        nf: 0,
        history: Vec::new(),
        max_interpolation_error: 0.0,
    };

    for p in points {
        match run.evaluate(&p) {
            Ok(v) => {
                run.points.push(p);
                run.fvals.push(v);
            }
            Err(Stop::Failed(msg)) => {
                if run.points.is_empty() {
                    return Ok(SolverReport {
                        best_point: p.as_slice().to_vec(),
                        best_value: f64::NAN,
                        nf: run.nf,
                        status: Status::Error,
                        history: Vec::new(),
                        max_interpolation_error: 0.0,
                        message: Some(msg),
                    });
                }
                run.kopt = argmin(&run.fvals);
                return Ok(run.report(Status::Error, Some(msg)));
            }
            Err(Stop::Budget) => unreachable!("maxfun >= npt is validated"),
        }
    }
    run.kopt = argmin(&run.fvals);
    run.history.push((run.nf, run.best_value()));
    if let Err(Stop::Failed(msg)) = run.update_model(None) {
        return Ok(run.report(Status::Error, Some(msg)));
    }

    Ok(match run.iterate() {
        Ok(status) => run.report(status, None),
        Err(Stop::Budget) => run.report(Status::MaxFun, None),
        Err(Stop::Failed(msg)) => run.report(Status::Error, Some(msg)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interpolation::{check_poisedness, lagrange_functions};
    use approx::assert_relative_eq;
    use nalgebra::{dmatrix, dvector, DMatrix};

    #[test]
    fn stencil_examples() {
        let pts = initial_point_set(&dvector![0.0, 0.0], 1.0, 5).unwrap();
        assert_eq!(
            pts,
            vec![
                dvector![0.0, 0.0],
                dvector![1.0, 0.0],
                dvector![0.0, 1.0],
                dvector![-1.0, 0.0],
                dvector![0.0, -1.0]
            ]
        );
        let pts = initial_point_set(&dvector![3.0], 0.5, 3).unwrap();
        assert_eq!(pts, vec![dvector![3.0], dvector![3.5], dvector![2.5]]);
        assert!(initial_point_set(&dvector![0.0, 0.0], 1.0, 3).is_err());
        assert!(initial_point_set(&dvector![0.0, 0.0], 1.0, 7).is_err());
    }

    #[test]
    fn stencil_is_poised() {
        for n in 1..=6 {
            let xhat = DVector::from_fn(n, |i, _| i as f64 * 0.3 - 1.0);
            for npt in (n + 2)..=((n + 1) * (n + 2) / 2) {
                let pts = initial_point_set(&xhat, 0.5, npt).unwrap();
                assert_eq!(pts.len(), npt);
                let report =
                    check_poisedness(&InterpolationSet::from_points(pts.clone()).unwrap()).unwrap();
                assert!(report.poised_linear, "n={n} npt={npt}");
                assert!(
                    LeastNormSystem::new(&pts, &xhat, 0.0).is_ok(),
                    "n={n} npt={npt}"
                );
            }
        }
    }

    #[test]
    fn subproblem_interior_newton_point() {
        let q = QuadraticModel::new(
            dvector![0.0, 0.0],
            0.0,
            dvector![-1.0, 0.0],
            DMatrix::identity(2, 2),
        )
        .unwrap();
        let d = trust_region_subproblem(&q, &dvector![0.0, 0.0], 10.0).unwrap();
        assert_relative_eq!(d, dvector![1.0, 0.0], epsilon = 1e-14);
    }

    #[test]
    fn subproblem_linear_model_goes_to_boundary() {
        let q = QuadraticModel::linear(dvector![0.0, 0.0], 0.0, dvector![-1.0, 0.0]).unwrap();
        let d = trust_region_subproblem(&q, &dvector![0.0, 0.0], 2.0).unwrap();
        assert_relative_eq!(d, dvector![2.0, 0.0], epsilon = 1e-14);
    }

    #[test]
    fn subproblem_zero_gradient() {
        let q = QuadraticModel::new(
            dvector![0.0, 0.0],
            0.0,
            dvector![0.0, 0.0],
            dmatrix![-1.0, 0.0; 0.0, 1.0],
        )
        .unwrap();
        assert_eq!(
            trust_region_subproblem(&q, &dvector![0.0, 0.0], 1.0).unwrap(),
            dvector![0.0, 0.0]
        );
    }

    #[test]
    fn replacement_prefers_far_point() {
        // Linear Lagrange values are equal at the new point; the far point's weight wins.
        let points = vec![
            dvector![0.0, 0.0],
            dvector![1.0, 0.0],
            dvector![0.0, 1.0],
            dvector![10.0, 10.0],
        ];
        let center = dvector![0.0, 0.0];
        let j = select_replacement_point(
            &points,
            &center,
            1.0,
            &dvector![0.3, 0.3],
            &center,
            1.0,
            Some(0),
        )
        .unwrap();
        assert_eq!(j, 3);
    }

    #[test]
    fn replacement_of_coincident_point() {
        let points = initial_point_set(&dvector![0.0, 0.0], 1.0, 5).unwrap();
        let center = dvector![0.0, 0.0];
        let j = select_replacement_point(
            &points,
            &center,
            0.5,
            &dvector![0.0, 1.0],
            &center,
            1.0,
            Some(0),
        )
        .unwrap();
        assert_eq!(j, 2);
    }

    #[test]
    fn geometry_step_examples() {
        let l = QuadraticModel::linear(dvector![0.0], 0.0, dvector![1.0]).unwrap();
        let p = geometry_step_from_lagrange(&l, &dvector![0.0], 1.0).unwrap();
        assert_eq!(p[0].abs(), 1.0);

        let l = QuadraticModel::new(
            dvector![0.0],
            0.0,
            dvector![1.0],
            DMatrix::from_element(1, 1, -2.0),
        )
        .unwrap();
        let p = geometry_step_from_lagrange(&l, &dvector![0.0], 1.0).unwrap();
        assert_eq!(p, dvector![-1.0]);

        let flat = QuadraticModel::new(
            dvector![0.0, 0.0],
            1.0,
            dvector![0.0, 0.0],
            dmatrix![0.0, 0.0; 0.0, 3.0],
        )
        .unwrap();
        let p = geometry_step_from_lagrange(&flat, &dvector![0.0, 0.0], 0.5).unwrap();
        assert_relative_eq!(p.norm(), 0.5, epsilon = 1e-15);
        assert_eq!(p[0], 0.0);
    }

    #[test]
    fn geometry_step_through_point_set() {
        let points = initial_point_set(&dvector![0.0, 0.0], 1.0, 5).unwrap();
        let center = dvector![0.2, -0.1];
        let ls = lagrange_functions(&points, &center, 0.4).unwrap();
        let p = geometry_step_point(&points, &center, 0.4, 3, &center, 0.7).unwrap();
        assert_relative_eq!((&p - &center).norm(), 0.7, epsilon = 1e-12);
        let anti = &center * 2.0 - &p;
        assert!(ls[3].evaluate(&p).unwrap().abs() >= ls[3].evaluate(&anti).unwrap().abs());
    }

    #[test]
    fn status_round_trip() {
        for s in [
            Status::Converged,
            Status::MaxFun,
            Status::Stalled,
            Status::Error,
        ] {
            assert_eq!(s.as_str().parse::<Status>().unwrap(), s);
        }
        assert!("done".parse::<Status>().is_err());
    }

    #[test]
    fn config_validation() {
        let c = SolverConfig::default();
        assert_eq!(c.validate(3).unwrap(), 7);
        assert!(SolverConfig {
            rhoend: 1.0,
            ..c.clone()
        }
        .validate(3)
        .is_err());
        assert!(SolverConfig {
            npt: Some(4),
            ..c.clone()
        }
        .validate(3)
        .is_err());
        assert!(SolverConfig {
            npt: Some(11),
            ..c.clone()
        }
        .validate(3)
        .is_err());
        assert!(SolverConfig {
            maxfun: 6,
            ..c.clone()
        }
        .validate(3)
        .is_err());
        assert!(SolverConfig { npt: Some(10), ..c }.validate(3).is_ok());
    }

    #[test]
    fn budget_equal_to_stencil() {
        let config = SolverConfig {
            maxfun: 5,
            ..Default::default()
        };
        let r = minimize(|x| x.iter().map(|v| v * v).sum(), &[1.0, 1.0], &config).unwrap();
        assert_eq!(r.status, Status::MaxFun);
        assert_eq!(r.nf, 5);
        // Best stencil point is (0.5, 1) or (1, 0.5).
        assert_eq!(r.best_value, 1.25);
    }

    #[test]
    fn non_finite_objective_is_an_error_status() {
        let mut calls = 0;
        let r = minimize(
            |x| {
                calls += 1;
                if calls > 7 {
                    f64::NAN
                } else {
                    x.iter().map(|v| v * v).sum()
                }
            },
            &[1.0, 1.0],
            &SolverConfig::default(),
        )
        .unwrap();
        assert_eq!(r.status, Status::Error);
        assert!(r.message.unwrap().contains("NaN"));
    }

    #[test]
    fn sphere_converges() {
        let config = SolverConfig::default();
        let r = minimize(|x| x.iter().map(|v| v * v).sum(), &[1.0, 1.0], &config).unwrap();
        assert_eq!(r.status, Status::Converged, "{r:?}");
        assert!(r.best_value <= 1e-10, "{r:?}");
        assert!(r.nf <= 200, "nf = {}", r.nf);
    }
}
