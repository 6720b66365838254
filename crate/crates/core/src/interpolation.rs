//! Least-norm quadratic interpolation.
//!
//! Given points `y_0..y_m`, data `f_j`, an anchor `x0`, a weight `sigma >= 0` and an
//! optional prior model `Q0`, find the quadratic `Q` with `Q(y_j) = f_j` minimizing
//!
//! ```text
//! |grad^2 (Q - Q0)|_F^2 + sigma |grad (Q - Q0)(x0)|^2
//! ```
//!
//! For `sigma = 0` the problem is read as the bilevel one: minimize the Hessian term first,
//! then the gradient at `x0` among the minimizers. The correction `D = Q - Q0` has the form
//! `G = 1/2 sum_j lambda_j s_j s_j^T`, `s_j = y_j - x0`, with `(lambda, c, g)` solving
//!
//! ```text
//! [ A   e   S      ] [lambda]   [d]        A_jk = (s_j . s_k)^2 / 4
//! [ e^T 0   0      ] [  c   ] = [0]        S    = rows s_j^T
//! [ S^T 0  -sigma I] [  g   ]   [0]        d_j  = f_j - Q0(y_j)
//! ```
//!
//! Eliminating `g` gives the familiar system with `A + S S^T / sigma` for `sigma > 0`; at
//! `sigma = 0` it is the minimum-Frobenius-norm system. Keeping `g` as an unknown makes the
//! matrix continuous in `sigma`, so small weights do not produce huge entries. Large weights
//! are handled in coefficient space instead, see [`LeastNormSystem`].
//!
//! [`brute_force_p1`] solves the same problems in coefficient space with a null-space method
//! and is kept as an independent cross-check.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{check_dim, Error, Result};
use crate::quadratic::{h1_inner, h1_seminorm_sq, Ball, QuadraticModel};

/// Relative singularity threshold for KKT pivots (times the matrix infinity norm).
pub const TOL_SINGULAR: f64 = 1e-12;
/// Relative numerical-rank threshold (times the largest singular value).
pub const TOL_RANK: f64 = 1e-10;
/// Relative distinctness threshold for interpolation points (times `1 + max |y|`).
pub const TOL_DISTINCT: f64 = 1e-10;
/// Interpolation residual accepted as exact, relative to `1 + max |data|`.
pub const TOL_INTERPOLATION: f64 = 1e-9;

/// Interpolation points with one data value per point.
#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationSet {
    points: Vec<DVector<f64>>,
    values: Vec<f64>,
}

impl InterpolationSet {
    pub fn new(points: Vec<DVector<f64>>, values: Vec<f64>) -> Result<Self> {
        let n = validate_points(&points)?;
        if values.len() != points.len() {
            return Err(Error::InvalidArgument(format!(
                "{} points but {} values",
                points.len(),
                values.len()
            )));
        }
        if points.iter().flat_map(|p| p.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "interpolation points must be finite".into(),
            ));
        }
        debug_assert!(n >= 1);
        Ok(Self { points, values })
    }

    /// A set with all data values zero; useful when only the geometry matters.
    pub fn from_points(points: Vec<DVector<f64>>) -> Result<Self> {
        let values = vec![0.0; points.len()];
        Self::new(points, values)
    }

    pub fn points(&self) -> &[DVector<f64>] {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.points.clone(), values)
    }
}

fn validate_points(points: &[DVector<f64>]) -> Result<usize> {
    let first = points
        .first()
        .ok_or_else(|| Error::InvalidArgument("interpolation set must not be empty".into()))?;
    let n = first.len();
    if n == 0 {
        return Err(Error::InvalidArgument(
            "points must have dimension >= 1".into(),
        ));
    }
    for p in points {
        check_dim(n, p.len())?;
    }
    Ok(n)
}

/// Returns an error naming the first pair of points closer than the distinctness tolerance.
pub fn ensure_distinct(points: &[DVector<f64>]) -> Result<()> {
    validate_points(points)?;
    let scale = 1.0 + points.iter().map(|p| p.norm()).fold(0.0, f64::max);
    let tol = TOL_DISTINCT * scale;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let distance = (&points[i] - &points[j]).norm();
            if distance <= tol {
                return Err(Error::DuplicatePoints {
                    first: i,
                    second: j,
                    distance,
                });
            }
        }
    }
    Ok(())
}

/// Parameters of one least-norm solve: gradient anchor, weight, and optional prior model.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastNormSpec {
    pub x0: DVector<f64>,
    pub sigma: f64,
    pub prior: Option<QuadraticModel>,
}

impl LeastNormSpec {
    pub fn new(x0: DVector<f64>, sigma: f64) -> Self {
        Self {
            x0,
            sigma,
            prior: None,
        }
    }

    pub fn with_prior(mut self, prior: QuadraticModel) -> Self {
        self.prior = Some(prior);
        self
    }

    fn validate(&self, n: usize) -> Result<()> {
        check_dim(n, self.x0.len())?;
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "sigma must be finite and nonnegative, got {}",
                self.sigma
            )));
        }
        if let Some(prior) = &self.prior {
            check_dim(n, prior.dim())?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoisednessReport {
    /// Numerical rank of `(y_1 - y_0, ..., y_m - y_0) / r`.
    pub linear_rank: usize,
    /// Spectral condition number of the scaled minimum-Frobenius-norm KKT matrix
    /// (infinite when it is singular).
    pub kkt_condition: f64,
    pub poised_linear: bool,
}

fn numerical_rank(m: &DMatrix<f64>) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.singular_values();
    let smax = sv.max();
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > TOL_RANK * smax).count()
}

fn linear_rank(points: &[DVector<f64>]) -> usize {
    let n = points[0].len();
    let m = points.len() - 1;
    if m == 0 {
        return 0;
    }
    let radius = points[1..]
        .iter()
        .map(|p| (p - &points[0]).norm())
        .fold(0.0, f64::max);
    let l = DMatrix::from_fn(n, m, |i, j| (points[j + 1][i] - points[0][i]) / radius);
    numerical_rank(&l)
}

pub fn check_poisedness(set: &InterpolationSet) -> Result<PoisednessReport> {
    let points = set.points();
    if points.len() < 2 {
        return Err(Error::InvalidArgument(
            "poisedness needs at least two interpolation points".into(),
        ));
    }
    ensure_distinct(points)?;
    let n = set.dim();
    let linear_rank = linear_rank(points);
    let sv = kkt_matrix(points, &points[0], 0.0).singular_values();
    let smin = sv.min();
    let kkt_condition = if smin > 0.0 {
        sv.max() / smin
    } else {
        f64::INFINITY
    };
    Ok(PoisednessReport {
        linear_rank,
        kkt_condition,
        poised_linear: linear_rank == n,
    })
}

/// Radius of the ball on which the weight `sigma` measures the H1 seminorm.
pub fn sigma_to_radius(sigma: f64, n: usize) -> Result<f64> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    Ok(((n as f64 + 2.0) / sigma).sqrt())
}

/// Inverse of [`sigma_to_radius`].
pub fn radius_to_sigma(radius: f64, n: usize) -> Result<f64> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "radius must be positive, got {radius}"
        )));
    }
    Ok((n as f64 + 2.0) / (radius * radius))
}

// ---------------------------------------------------------------------------
// Least-norm systems
// ---------------------------------------------------------------------------

/// The augmented KKT matrix in scaled coordinates `s_j = (y_j - x0) / h`, where `h` is the
/// largest distance from `x0`. Only used for the conditioning estimate in
/// [`check_poisedness`].
fn kkt_matrix(points: &[DVector<f64>], x0: &DVector<f64>, sigma: f64) -> DMatrix<f64> {
    let n = x0.len();
    let m = points.len();
    let h = points.iter().map(|p| (p - x0).norm()).fold(0.0, f64::max);
    let h = if h > 0.0 { h } else { 1.0 };
    let scaled: Vec<DVector<f64>> = points.iter().map(|p| (p - x0) / h).collect();
    let sigma_hat = sigma * h * h;
    let alpha = 1.0 / sigma_hat.max(1.0).sqrt();

    let dim = m + 1 + n;
    let mut k = DMatrix::zeros(dim, dim);
    for j in 0..m {
        for l in 0..=j {
            let dot = scaled[j].dot(&scaled[l]);
            let v = 0.25 * dot * dot;
            k[(j, l)] = v;
            k[(l, j)] = v;
        }
        k[(j, m)] = 1.0;
        k[(m, j)] = 1.0;
        for i in 0..n {
            let v = alpha * scaled[j][i];
            k[(j, m + 1 + i)] = v;
            k[(m + 1 + i, j)] = v;
        }
    }
    for i in 0..n {
        k[(m + 1 + i, m + 1 + i)] = -sigma_hat * alpha * alpha;
    }
    k
}

/// A factored least-norm interpolation system for a fixed point set, anchor and weight.
///
/// The system is stored as the linear map from data to the scaled coefficients
/// `[c, g, upper triangle of G]`, so solving for several data vectors (Lagrange functions,
/// repeated model updates) is a matrix-vector product.
///
/// For small scaled weights the map comes from the KKT system above. For larger ones the
/// multipliers of that system grow without bound when there are more points than Hessian
/// entries, so the coefficients are solved for directly: the constant is projected out of
/// the conditions and the weighted Hessian and gradient get the minimum-norm solution.
pub struct LeastNormSystem {
    x0: DVector<f64>,
    sigma: f64,
    h: f64,
    m: usize,
    map: DMatrix<f64>,
    /// Rows are the monomials of the scaled points.
    phi: DMatrix<f64>,
}

impl std::fmt::Debug for LeastNormSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LeastNormSystem")
            .field("x0", &self.x0)
            .field("sigma", &self.sigma)
            .field("points", &self.m)
            .finish()
    }
}

/// Monomials `[1, s, s_i^2 / 2, s_i s_k (i < k)]` matching the coefficient layout.
fn monomials(s: &DVector<f64>) -> DVector<f64> {
    let n = s.len();
    let mut row = Vec::with_capacity(1 + n + n * (n + 1) / 2);
    row.push(1.0);
    row.extend(s.iter());
    for i in 0..n {
        row.push(0.5 * s[i] * s[i]);
        for k in i + 1..n {
            row.push(s[i] * s[k]);
        }
    }
    DVector::from_vec(row)
}

fn monomial_matrix(scaled: &[DVector<f64>]) -> DMatrix<f64> {
    let n = scaled[0].len();
    let mut phi = DMatrix::zeros(scaled.len(), 1 + n + n * (n + 1) / 2);
    for (j, s) in scaled.iter().enumerate() {
        phi[(j, 0)] = 1.0;
        let mut idx = 1;
        for i in 0..n {
            phi[(j, idx)] = s[i];
            idx += 1;
        }
        for i in 0..n {
            phi[(j, idx)] = 0.5 * s[i] * s[i];
            idx += 1;
            for k in i + 1..n {
                phi[(j, idx)] = s[i] * s[k];
                idx += 1;
            }
        }
    }
    phi
}

fn singular(what: &str, smin: f64, smax: f64) -> Error {
    Error::NotPoised(format!(
        "{what} is singular (smallest pivot {smin:e}, largest {smax:e})"
    ))
}

/// Data-to-coefficient map from the KKT system; `None` when only the factorization was asked for.
fn kkt_map(
    scaled: &[DVector<f64>],
    sigma_hat: f64,
    factor_only: bool,
) -> Result<Option<DMatrix<f64>>> {
    let m = scaled.len();
    let n = scaled[0].len();
    let k = kkt_matrix(scaled, &DVector::zeros(n), sigma_hat);
    let alpha = 1.0 / sigma_hat.max(1.0).sqrt();
    let norm_inf = k
        .row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let lu = k.clone().lu();
    let pivots = lu.u().diagonal().abs();
    if !(pivots.min() > TOL_SINGULAR * norm_inf) {
        return Err(singular("KKT matrix", pivots.min(), norm_inf));
    }
    if factor_only {
        return Ok(None);
    }
    let rhs = DMatrix::identity(m + 1 + n, m);
    let sol = lu
        .solve(&rhs)
        .ok_or_else(|| Error::NotPoised("KKT solve failed".into()))?;

    let nh = n * (n + 1) / 2;
    let mut map = DMatrix::zeros(1 + n + nh, m);
    map.row_mut(0).copy_from(&sol.row(m));
    map.rows_mut(1, n).copy_from(&sol.rows(m + 1, n));
    map.rows_mut(1, n).scale_mut(alpha);
    // G_il = 1/2 sum_j lambda_j s_ji s_jl; the quadratic monomials are s_i^2 / 2 and s_i s_l.
    let mut quad = monomial_matrix(scaled).columns(1 + n, nh).transpose();
    let mut idx = 0;
    for i in 0..n {
        idx += 1;
        for _ in i + 1..n {
            quad.row_mut(idx).scale_mut(0.5);
            idx += 1;
        }
    }
    map.rows_mut(1 + n, nh).gemm(1.0, &quad, &sol.rows(0, m), 0.0);
    Ok(Some(map))
}

/// Data-to-coefficient map by a direct minimum-norm solve, for `sigma_hat > 0`.
fn coefficient_map(
    scaled: &[DVector<f64>],
    sigma_hat: f64,
    factor_only: bool,
) -> Result<Option<DMatrix<f64>>> {
    let m = scaled.len();
    let n = scaled[0].len();
    let nh = n * (n + 1) / 2;
    let p = n + nh;
    // Weighted unknowns z = [sqrt(sigma_hat) g, G_ii, sqrt(2) G_ik] so that
    // |z|^2 = sigma_hat |g|^2 + |G|_F^2; row j of `b` gives the conditions on z.
    let w = 1.0 / sigma_hat.sqrt();
    let mut weights = DVector::from_element(p, 0.0);
    for i in 0..n {
        weights[i] = w;
    }
    let mut idx = n;
    for i in 0..n {
        weights[idx] = 1.0;
        idx += 1;
        for _ in i + 1..n {
            weights[idx] = std::f64::consts::FRAC_1_SQRT_2;
            idx += 1;
        }
    }
    let mut b = monomial_matrix(scaled).columns(1, p).into_owned();
    for (i, mut col) in b.column_iter_mut().enumerate() {
        col *= weights[i];
    }

    // Orthonormal basis of the complement of the constants: the Householder reflection
    // swapping e_1 and the normalized ones vector maps e_2..e_m onto it.
    let mut v = DVector::from_element(m, -1.0 / (m as f64).sqrt());
    v[0] += 1.0;
    let vv = v.norm_squared();
    let mut reflector = DMatrix::identity(m, m);
    if vv > 0.0 {
        reflector.ger(-2.0 / vv, &v, &v, 1.0);
    }
    let basis = reflector.columns(1, m - 1);

    let penalized = if m > 1 {
        if p < m - 1 {
            return Err(Error::NotPoised(
                "more conditions than quadratic coefficients".into(),
            ));
        }
        // min |z| subject to N^T B z = N^T d, via QR of (N^T B)^T.
        let ct = b.tr_mul(&basis);
        let qr = ct.qr();
        let r = qr.r();
        let diag = r.diagonal().abs();
        let scale = diag.max().max(1.0);
        if !(diag.min() > TOL_SINGULAR * scale) {
            return Err(singular("interpolation system", diag.min(), scale));
        }
        if factor_only {
            return Ok(None);
        }
        let rinv_t = r
            .transpose()
            .solve_lower_triangular(&basis.transpose())
            .ok_or_else(|| Error::NotPoised("triangular solve failed".into()))?;
        qr.q() * rinv_t
    } else {
        DMatrix::zeros(p, m)
    };

    // Constant from the mean residual, then unweight.
    let residual = DMatrix::identity(m, m) - &b * &penalized;
    let mut map = DMatrix::zeros(1 + p, m);
    for j in 0..m {
        map[(0, j)] = residual.column(j).mean();
    }
    for i in 0..p {
        map.row_mut(1 + i)
            .copy_from(&(penalized.row(i) * weights[i]));
    }
    Ok(Some(map))
}

impl LeastNormSystem {
    /// Factor the system for `points`. Fails with [`Error::NotPoised`] when the points do not
    /// impose independent conditions on quadratics, or for `sigma = 0` when they do not
    /// determine a linear function.
    pub fn new(points: &[DVector<f64>], x0: &DVector<f64>, sigma: f64) -> Result<Self> {
        Self::build(points, x0, sigma, false).map(|s| s.expect("map requested"))
    }

    /// Same checks as [`LeastNormSystem::new`] without forming the solution map.
    pub fn check(points: &[DVector<f64>], x0: &DVector<f64>, sigma: f64) -> Result<()> {
        Self::build(points, x0, sigma, true).map(|_| ())
    }

    fn build(
        points: &[DVector<f64>],
        x0: &DVector<f64>,
        sigma: f64,
        factor_only: bool,
    ) -> Result<Option<Self>> {
        let n = validate_points(points)?;
        check_dim(n, x0.len())?;
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "sigma must be finite and nonnegative, got {sigma}"
            )));
        }
        let h = points.iter().map(|p| (p - x0).norm()).fold(0.0, f64::max);
        let h = if h > 0.0 { h } else { 1.0 };
        let scaled: Vec<DVector<f64>> = points.iter().map(|p| (p - x0) / h).collect();
        let sigma_hat = sigma * h * h;
        let map = if sigma_hat > 1.0 {
            coefficient_map(&scaled, sigma_hat, factor_only)?
        } else {
            kkt_map(&scaled, sigma_hat, factor_only)?
        };
        Ok(map.map(|map| Self {
            x0: x0.clone(),
            sigma,
            h,
            m: points.len(),
            map,
            phi: monomial_matrix(&scaled),
        }))
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    pub fn dim(&self) -> usize {
        self.x0.len()
    }

    pub fn x0(&self) -> &DVector<f64> {
        &self.x0
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// The least-norm correction interpolating `data`, expanded around `x0`.
    pub fn solve(&self, data: &[f64]) -> Result<QuadraticModel> {
        let n = self.dim();
        check_dim(self.m, data.len())?;
        let d = DVector::from_column_slice(data);
        let mut theta = &self.map * &d;
        // refinement against the interpolation residual
        for _ in 0..2 {
            let r = &d - &self.phi * &theta;
            theta += &self.map * r;
        }
        let mut hess = DMatrix::zeros(n, n);
        let mut idx = 1 + n;
        for i in 0..n {
            for k in i..n {
                hess[(i, k)] = theta[idx];
                hess[(k, i)] = theta[idx];
                idx += 1;
            }
        }
        let h = self.h;
        let g = theta.rows(1, n) / h;
        QuadraticModel::new(self.x0.clone(), theta[0], g, hess / (h * h))
    }

    /// Values of all Lagrange functions at `x`, in one product.
    pub fn lagrange_values(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.dim(), x.len())?;
        let s = (x - &self.x0) / self.h;
        Ok(self.map.tr_mul(&monomials(&s)))
    }

    /// The `j`-th Lagrange function: the least-norm interpolant of `delta_ij`.
    pub fn lagrange_function(&self, j: usize) -> Result<QuadraticModel> {
        let m = self.len();
        if j >= m {
            return Err(Error::InvalidArgument(format!(
                "Lagrange index {j} out of range 0..{m}"
            )));
        }
        let mut data = vec![0.0; m];
        data[j] = 1.0;
        self.solve(&data)
    }
}

fn data_tolerance(data: &[f64]) -> f64 {
    TOL_INTERPOLATION * (1.0 + data.iter().map(|v| v.abs()).fold(0.0, f64::max))
}

fn quadratic_space_dim(n: usize) -> usize {
    (n + 1) * (n + 2) / 2
}

/// Greedily picks points whose quadratic monomial rows are linearly independent.
fn independent_subset(points: &[DVector<f64>], x0: &DVector<f64>) -> Vec<usize> {
    let h = points.iter().map(|p| (p - x0).norm()).fold(0.0, f64::max);
    let h = if h > 0.0 { h } else { 1.0 };
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut chosen = Vec::new();
    for (j, p) in points.iter().enumerate() {
        let mut row = coeffs::monomial_row(&((p - x0) / h));
        let norm0 = row.norm();
        for b in &basis {
            let proj = b.dot(&row);
            row.axpy(-proj, b, 1.0);
        }
        // second pass for numerical orthogonality
        for b in &basis {
            let proj = b.dot(&row);
            row.axpy(-proj, b, 1.0);
        }
        let norm = row.norm();
        if norm > 1e-8 * norm0 {
            basis.push(row / norm);
            chosen.push(j);
        }
    }
    chosen
}

/// Solve the least-norm interpolation problem `P1(sigma)` (bilevel for `sigma = 0`),
/// optionally as a least-change update of `spec.prior`. The result is expanded around
/// `spec.x0`.
pub fn solve_p1(set: &InterpolationSet, spec: &LeastNormSpec) -> Result<QuadraticModel> {
    let n = set.dim();
    spec.validate(n)?;
    let points = set.points();
    ensure_distinct(points)?;
    if spec.sigma == 0.0 && linear_rank(points) < n {
        return Err(Error::NotPoised(
            "sigma = 0 needs interpolation points whose differences span R^n".into(),
        ));
    }

    let data: Vec<f64> = match &spec.prior {
        Some(prior) => points
            .iter()
            .zip(set.values())
            .map(|(y, f)| f - prior.value_unchecked(y))
            .collect(),
        None => set.values().to_vec(),
    };

    let correction = if points.len() <= quadratic_space_dim(n) {
        match LeastNormSystem::new(points, &spec.x0, spec.sigma) {
            Ok(system) => system.solve(&data)?,
            Err(Error::NotPoised(msg)) => solve_on_subset(points, &data, spec, msg)?,
            Err(e) => return Err(e),
        }
    } else {
        solve_on_subset(
            points,
            &data,
            spec,
            "more points than quadratic coefficients".into(),
        )?
    };

    match &spec.prior {
        Some(prior) => crate::quadratic::combine(1.0, &correction, 1.0, prior),
        None => Ok(correction),
    }
}

/// Rank-deficient interpolation conditions: drop redundant points, solve, and accept the
/// result only if it still interpolates the dropped ones.
fn solve_on_subset(
    points: &[DVector<f64>],
    data: &[f64],
    spec: &LeastNormSpec,
    reason: String,
) -> Result<QuadraticModel> {
    let subset = independent_subset(points, &spec.x0);
    if subset.len() == points.len() {
        return Err(Error::NotPoised(reason));
    }
    let sub_points: Vec<DVector<f64>> = subset.iter().map(|&j| points[j].clone()).collect();
    let sub_data: Vec<f64> = subset.iter().map(|&j| data[j]).collect();
    let system = LeastNormSystem::new(&sub_points, &spec.x0, spec.sigma)?;
    let model = system.solve(&sub_data)?;
    let worst = points
        .iter()
        .zip(data)
        .map(|(y, d)| (model.value_unchecked(y) - d).abs())
        .fold(0.0, f64::max);
    let scale = 1.0 + data.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if worst > data_tolerance(data) {
        return Err(Error::Inconsistent {
            residual: worst / scale,
        });
    }
    Ok(model)
}

/// Lagrange functions `l_0..l_m` of `P1(sigma)`: `l_i(y_j) = delta_ij`.
pub fn lagrange_functions(
    points: &[DVector<f64>],
    x0: &DVector<f64>,
    sigma: f64,
) -> Result<Vec<QuadraticModel>> {
    let n = validate_points(points)?;
    check_dim(n, x0.len())?;
    ensure_distinct(points)?;
    if sigma == 0.0 && linear_rank(points) < n {
        return Err(Error::NotPoised(
            "sigma = 0 needs interpolation points whose differences span R^n".into(),
        ));
    }
    let system = LeastNormSystem::new(points, x0, sigma)?;
    (0..points.len())
        .map(|j| system.lagrange_function(j))
        .collect()
}

// ---------------------------------------------------------------------------
// Coefficient-space route
// ---------------------------------------------------------------------------

/// Dense coefficient parameterization `theta = (c, g, G_ii, G_ik for i < k)` of a quadratic
/// expanded around a fixed base point.
pub(crate) mod coeffs {
    use nalgebra::{DMatrix, DVector};

    use crate::error::Result;
    use crate::quadratic::QuadraticModel;

    pub fn len(n: usize) -> usize {
        (n + 1) * (n + 2) / 2
    }

    /// Row of the interpolation matrix for the displacement `s`.
    pub fn monomial_row(s: &DVector<f64>) -> DVector<f64> {
        let n = s.len();
        let mut row = DVector::zeros(len(n));
        row[0] = 1.0;
        for i in 0..n {
            row[1 + i] = s[i];
            row[1 + n + i] = 0.5 * s[i] * s[i];
        }
        let mut k = 1 + 2 * n;
        for i in 0..n {
            for j in (i + 1)..n {
                row[k] = s[i] * s[j];
                k += 1;
            }
        }
        row
    }

    /// Diagonal weights turning `theta^T W theta` into `w_grad |g|^2 + w_hess |G|_F^2`.
    pub fn weights(n: usize, w_grad: f64, w_hess: f64) -> DVector<f64> {
        let mut w = DVector::zeros(len(n));
        for i in 0..n {
            w[1 + i] = w_grad;
            w[1 + n + i] = w_hess;
        }
        for k in (1 + 2 * n)..len(n) {
            w[k] = 2.0 * w_hess;
        }
        w
    }

    pub fn to_model(theta: &DVector<f64>, base: &DVector<f64>) -> Result<QuadraticModel> {
        let n = base.len();
        let g = theta.rows(1, n).into_owned();
        let mut h = DMatrix::zeros(n, n);
        for i in 0..n {
            h[(i, i)] = theta[1 + n + i];
        }
        let mut k = 1 + 2 * n;
        for i in 0..n {
            for j in (i + 1)..n {
                h[(i, j)] = theta[k];
                h[(j, i)] = theta[k];
                k += 1;
            }
        }
        QuadraticModel::new(base.clone(), theta[0], g, h)
    }

    #[cfg(test)]
    pub fn from_model(q: &QuadraticModel, base: &DVector<f64>) -> Result<DVector<f64>> {
        let q = q.rebase(base)?;
        let n = base.len();
        let mut theta = DVector::zeros(len(n));
        theta[0] = q.constant();
        for i in 0..n {
            theta[1 + i] = q.gradient()[i];
            theta[1 + n + i] = q.hessian()[(i, i)];
        }
        let mut k = 1 + 2 * n;
        for i in 0..n {
            for j in (i + 1)..n {
                theta[k] = q.hessian()[(i, j)];
                k += 1;
            }
        }
        Ok(theta)
    }

    /// Interpolation matrix, one monomial row per point.
    pub fn interpolation_matrix(points: &[DVector<f64>], base: &DVector<f64>) -> DMatrix<f64> {
        let n = base.len();
        let mut phi = DMatrix::zeros(points.len(), len(n));
        for (j, p) in points.iter().enumerate() {
            phi.set_row(j, &monomial_row(&(p - base)).transpose());
        }
        phi
    }
}

struct NullSpaceSplit {
    particular: DVector<f64>,
    null_basis: DMatrix<f64>,
    residual: f64,
}

/// Minimum-norm particular solution of `phi theta = d` and an orthonormal basis of the null
/// space of `phi`, both from one SVD. Wide matrices are padded with zero rows so the SVD
/// returns a complete right basis.
fn null_space_split(phi: &DMatrix<f64>, d: &DVector<f64>) -> NullSpaceSplit {
    let (rows, cols) = phi.shape();
    let padded_rows = rows.max(cols);
    let mut square = DMatrix::zeros(padded_rows, cols);
    square.rows_mut(0, rows).copy_from(phi);
    let svd = square.svd(true, true);
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let smax = svd.singular_values.max();
    let tol = TOL_RANK * smax.max(f64::MIN_POSITIVE);

    let mut padded_d = DVector::zeros(padded_rows);
    padded_d.rows_mut(0, rows).copy_from(d);
    let mut particular = DVector::zeros(cols);
    let mut null_cols = Vec::new();
    for k in 0..svd.singular_values.len() {
        let s = svd.singular_values[k];
        let v = v_t.row(k).transpose();
        if s > tol {
            let coef = u.column(k).dot(&padded_d) / s;
            particular.axpy(coef, &v, 1.0);
        } else {
            null_cols.push(v);
        }
    }
    let residual = (phi * &particular - d).amax();
    let null_basis = if null_cols.is_empty() {
        DMatrix::zeros(cols, 0)
    } else {
        DMatrix::from_columns(&null_cols)
    };
    NullSpaceSplit {
        particular,
        null_basis,
        residual,
    }
}

/// Minimizes `(theta + Z z)^T W (theta + Z z)` over `z`; returns the minimizer and an
/// orthonormal basis (in `z` coordinates) of the directions the objective does not see.
fn minimize_over_null(
    theta: &DVector<f64>,
    z: &DMatrix<f64>,
    w: &DVector<f64>,
) -> (DVector<f64>, DMatrix<f64>) {
    let k = z.ncols();
    if k == 0 {
        return (theta.clone(), DMatrix::zeros(0, 0));
    }
    let wz = DMatrix::from_fn(z.nrows(), k, |i, j| w[i] * z[(i, j)]);
    let hess = z.transpose() * &wz;
    let grad = wz.transpose() * theta;
    let eig = SymmetricEigen::new(hess);
    let emax = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let tol = 1e-12 * emax.max(f64::MIN_POSITIVE);
    let mut step = DVector::zeros(k);
    let mut flat = Vec::new();
    for (i, &e) in eig.eigenvalues.iter().enumerate() {
        let q = eig.eigenvectors.column(i);
        if e > tol {
            step.axpy(-q.dot(&grad) / e, &q, 1.0);
        } else {
            flat.push(q.into_owned());
        }
    }
    let flat = if flat.is_empty() {
        DMatrix::zeros(k, 0)
    } else {
        DMatrix::from_columns(&flat)
    };
    (theta + z * step, flat)
}

/// Independent solver for the same problems as [`solve_p1`], working directly on the
/// `(n+1)(n+2)/2` coefficients of `Q - Q0` with a dense null-space method. For `sigma = 0`
/// it performs the two levels literally: minimize `|G|_F` over the interpolants, then
/// minimize `|g(x0)|` over the remaining freedom.
///
/// Intended for desk-scale cross-checks (`n <= 6`, at most 28 points).
pub fn brute_force_p1(set: &InterpolationSet, spec: &LeastNormSpec) -> Result<QuadraticModel> {
    let n = set.dim();
    spec.validate(n)?;
    if n > 6 || set.len() > 28 {
        return Err(Error::InvalidArgument(
            "brute-force oracle is limited to n <= 6 and at most 28 points".into(),
        ));
    }
    let points = set.points();
    ensure_distinct(points)?;
    if spec.sigma == 0.0 && linear_rank(points) < n {
        return Err(Error::NotPoised(
            "sigma = 0 needs interpolation points whose differences span R^n".into(),
        ));
    }
    let data: Vec<f64> = match &spec.prior {
        Some(prior) => points
            .iter()
            .zip(set.values())
            .map(|(y, f)| prior.evaluate(y).map(|v| f - v))
            .collect::<Result<_>>()?,
        None => set.values().to_vec(),
    };
    let d = DVector::from_vec(data.clone());
    let phi = coeffs::interpolation_matrix(points, &spec.x0);
    let split = null_space_split(&phi, &d);
    let scale = 1.0 + d.amax();
    if split.residual > data_tolerance(&data) {
        return Err(Error::Inconsistent {
            residual: split.residual / scale,
        });
    }

    let theta = if spec.sigma > 0.0 {
        let w = coeffs::weights(n, spec.sigma, 1.0);
        minimize_over_null(&split.particular, &split.null_basis, &w).0
    } else {
        let w_hess = coeffs::weights(n, 0.0, 1.0);
        let (theta1, flat) = minimize_over_null(&split.particular, &split.null_basis, &w_hess);
        let remaining = &split.null_basis * flat;
        let w_grad = coeffs::weights(n, 1.0, 0.0);
        minimize_over_null(&theta1, &remaining, &w_grad).0
    };

    let correction = coeffs::to_model(&theta, &spec.x0)?;
    match &spec.prior {
        Some(prior) => crate::quadratic::combine(1.0, &correction, 1.0, prior),
        None => Ok(correction),
    }
}

/// First-order optimality residual of the `P1(sigma)` solution for the H1 problem on the ball
/// `B(x0, sqrt((n+2)/sigma))`.
///
/// Every feasible competitor is `Q_sigma + D` with `D` vanishing on the points, so
/// optimality is equivalent to `<Q_sigma, D>_H1 = 0` for a basis of such `D`. Returns
/// `max_k |<Q, D_k>| / (|Q| |D_k|)`, which is zero when no feasible direction exists.
pub fn verify_equivalence_theorem(
    set: &InterpolationSet,
    x0: &DVector<f64>,
    sigma: f64,
) -> Result<f64> {
    let n = set.dim();
    let radius = sigma_to_radius(sigma, n)?;
    let q = solve_p1(set, &LeastNormSpec::new(x0.clone(), sigma))?;
    let ball = Ball::new(x0.clone(), radius)?;
    let q_norm = h1_seminorm_sq(&q, &ball)?.sqrt();
    if q_norm == 0.0 {
        return Ok(0.0);
    }

    let phi = coeffs::interpolation_matrix(set.points(), x0);
    let split = null_space_split(&phi, &DVector::zeros(set.len()));
    let mut worst: f64 = 0.0;
    for direction in split.null_basis.column_iter() {
        let dq = coeffs::to_model(&direction.into_owned(), x0)?;
        let d_norm = h1_seminorm_sq(&dq, &ball)?.sqrt();
        if d_norm == 0.0 {
            continue;
        }
        let inner = h1_inner(&q, &dq, &ball)?;
        worst = worst.max(inner.abs() / (q_norm * d_norm));
    }
    Ok(worst)
}

/// Worst sampled ratios `lhs / rhs` of the gradient and value error bounds for quadratic
/// interpolants; both must be at most one for the bounds to hold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorBoundReport {
    pub gradient_ratio: f64,
    pub value_ratio: f64,
    /// `|L^+|_2` for the scaled difference matrix.
    pub pinv_norm: f64,
    pub samples: usize,
}

impl ErrorBoundReport {
    pub fn holds(&self) -> bool {
        self.gradient_ratio <= 1.0 && self.value_ratio <= 1.0
    }
}

const ERROR_BOUND_SEED: u64 = 0x5eed_0b0d;

/// Samples the gradient and value error bounds for an interpolant `q` of `f` on `set`
/// (with `set` inside `B(y_0, radius)`), where `grad f` is Lipschitz with constant `nu`:
///
/// ```text
/// |grad Q(x) - grad F(x)| <= 5 sqrt(m)/2 |L^+| (nu + |grad^2 Q|) r
/// |Q(x) - F(x)|           <= (5 sqrt(m)/2 |L^+| + 1/2) (nu + |grad^2 Q|) r^2
/// ```
///
/// with `L = (y_1 - y_0, ..., y_m - y_0) / r`.
pub fn csv_error_bound_report<F, G>(
    f: F,
    grad_f: G,
    set: &InterpolationSet,
    q: &QuadraticModel,
    nu: f64,
    radius: f64,
    samples: usize,
) -> Result<ErrorBoundReport>
where
    F: Fn(&DVector<f64>) -> f64,
    G: Fn(&DVector<f64>) -> DVector<f64>,
{
    let n = set.dim();
    check_dim(n, q.dim())?;
    let points = set.points();
    ensure_distinct(points)?;
    if !(nu > 0.0) || !(radius > 0.0) {
        return Err(Error::InvalidArgument(
            "nu and radius must be positive".into(),
        ));
    }
    let m = points.len() - 1;
    if m < n {
        return Err(Error::NotPoised(format!(
            "need at least n = {n} differences, got {m}"
        )));
    }
    let y0 = &points[0];
    for (j, y) in points.iter().enumerate() {
        if (y - y0).norm() > radius * (1.0 + 1e-12) {
            return Err(Error::InvalidArgument(format!(
                "point {j} lies outside B(y_0, r)"
            )));
        }
        let fy = f(y);
        if (q.value_unchecked(y) - fy).abs() > 1e-8 * (1.0 + fy.abs()) {
            return Err(Error::InvalidArgument(format!(
                "model does not interpolate at point {j}"
            )));
        }
    }

    let l = DMatrix::from_fn(n, m, |i, j| (points[j + 1][i] - y0[i]) / radius);
    let sv = l.singular_values();
    let smax = sv.max();
    let rank = sv.iter().filter(|&&s| s > TOL_RANK * smax).count();
    if rank < n {
        return Err(Error::NotPoised(format!(
            "difference matrix has rank {rank} < {n}"
        )));
    }
    let pinv_norm = 1.0 / sv.min();
    let hess_norm = SymmetricEigen::new(q.hessian().clone())
        .eigenvalues
        .iter()
        .map(|e| e.abs())
        .fold(0.0, f64::max);
    let kappa = 2.5 * (m as f64).sqrt() * pinv_norm;
    let grad_rhs = kappa * (nu + hess_norm) * radius;
    let value_rhs = (kappa + 0.5) * (nu + hess_norm) * radius * radius;

    let mut rng = ChaCha8Rng::seed_from_u64(ERROR_BOUND_SEED ^ samples as u64);
    let mut report = ErrorBoundReport {
        gradient_ratio: 0.0,
        value_ratio: 0.0,
        pinv_norm,
        samples,
    };
    for _ in 0..samples {
        let x = sample_in_ball(&mut rng, y0, radius);
        let grad_err = (q.gradient_unchecked(&x) - grad_f(&x)).norm();
        let value_err = (q.value_unchecked(&x) - f(&x)).abs();
        report.gradient_ratio = report.gradient_ratio.max(grad_err / grad_rhs);
        report.value_ratio = report.value_ratio.max(value_err / value_rhs);
    }
    Ok(report)
}

/// `true` iff both error bounds hold at every sampled point of `B(y_0, radius)`.
pub fn verify_csv_error_bounds<F, G>(
    f: F,
    grad_f: G,
    set: &InterpolationSet,
    q: &QuadraticModel,
    nu: f64,
    radius: f64,
    samples: usize,
) -> Result<bool>
where
    F: Fn(&DVector<f64>) -> f64,
    G: Fn(&DVector<f64>) -> DVector<f64>,
{
    csv_error_bound_report(f, grad_f, set, q, nu, radius, samples).map(|r| r.holds())
}

/// Uniform sample from the ball `B(center, radius)`.
pub(crate) fn sample_in_ball<R: Rng>(
    rng: &mut R,
    center: &DVector<f64>,
    radius: f64,
) -> DVector<f64> {
    let n = center.len();
    let dir = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let norm = dir.norm();
    let u: f64 = rng.random();
    let rho = radius * u.powf(1.0 / n as f64);
    center + dir * (rho / norm.max(f64::MIN_POSITIVE))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::{dmatrix, dvector};

    fn pts(raw: &[&[f64]]) -> Vec<DVector<f64>> {
        raw.iter().map(|p| DVector::from_column_slice(p)).collect()
    }

    #[test]
    fn poisedness_examples() {
        let s =
            InterpolationSet::from_points(pts(&[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]])).unwrap();
        let r = check_poisedness(&s).unwrap();
        assert_eq!(r.linear_rank, 2);
        assert!(r.poised_linear);

        let s =
            InterpolationSet::from_points(pts(&[&[0.0, 0.0], &[1.0, 0.0], &[2.0, 0.0]])).unwrap();
        let r = check_poisedness(&s).unwrap();
        assert_eq!(r.linear_rank, 1);
        assert!(!r.poised_linear);
        assert!(r.kkt_condition.is_infinite() || r.kkt_condition > 1e12);

        let s =
            InterpolationSet::from_points(pts(&[&[0.0, 0.0], &[1.0, 0.0], &[1e-13, 0.0]])).unwrap();
        assert!(matches!(
            check_poisedness(&s),
            Err(Error::DuplicatePoints {
                first: 0,
                second: 2,
                ..
            })
        ));
    }

    #[test]
    fn set_validation() {
        assert!(InterpolationSet::new(vec![], vec![]).is_err());
        assert!(InterpolationSet::new(pts(&[&[0.0]]), vec![1.0, 2.0]).is_err());
        assert!(InterpolationSet::new(pts(&[&[0.0], &[1.0, 2.0]]), vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn one_dimensional_full_interpolation() {
        let s =
            InterpolationSet::new(pts(&[&[-1.0], &[0.0], &[1.0]]), vec![1.0, 0.0, 1.0]).unwrap();
        let q = solve_p1(&s, &LeastNormSpec::new(dvector![0.0], 1.0)).unwrap();
        assert!(q.constant().abs() < 1e-14);
        assert!(q.gradient()[0].abs() < 1e-14);
        assert_relative_eq!(q.hessian()[(0, 0)], 2.0, max_relative = 1e-13);
    }

    #[test]
    fn linear_data_with_zero_sigma() {
        let s = InterpolationSet::new(
            pts(&[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]]),
            vec![1.0, 3.0, 4.0, 6.0],
        )
        .unwrap();
        let q = solve_p1(&s, &LeastNormSpec::new(dvector![0.0, 0.0], 0.0)).unwrap();
        assert_relative_eq!(q.constant(), 1.0, epsilon = 1e-13);
        assert_relative_eq!(q.gradient()[0], 2.0, epsilon = 1e-13);
        assert_relative_eq!(q.gradient()[1], 3.0, epsilon = 1e-13);
        assert!(q.hessian().amax() < 1e-13);
    }

    #[test]
    fn two_points_sigma_four() {
        let s = InterpolationSet::new(pts(&[&[0.0], &[1.0]]), vec![0.0, 1.0]).unwrap();
        let spec = LeastNormSpec::new(dvector![0.0], 4.0);
        let q = solve_p1(&s, &spec).unwrap();
        assert!(q.constant().abs() < 1e-14);
        assert_relative_eq!(q.gradient()[0], 0.5, epsilon = 1e-14);
        assert_relative_eq!(q.hessian()[(0, 0)], 1.0, epsilon = 1e-14);
        let b = brute_force_p1(&s, &spec).unwrap();
        assert_relative_eq!(b.gradient()[0], 0.5, epsilon = 1e-12);
        assert_relative_eq!(b.hessian()[(0, 0)], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_data_gives_zero_model() {
        let s = InterpolationSet::from_points(pts(&[
            &[0.0, 0.0],
            &[1.0, 0.0],
            &[-1.0, 0.0],
            &[0.0, 1.0],
            &[0.0, -1.0],
        ]))
        .unwrap();
        for sigma in [0.0, 0.3, 7.0] {
            let spec = LeastNormSpec::new(dvector![0.0, 0.0], sigma);
            for q in [
                solve_p1(&s, &spec).unwrap(),
                brute_force_p1(&s, &spec).unwrap(),
            ] {
                assert!(q.constant().abs() < 1e-14);
                assert!(q.gradient().amax() < 1e-14);
                assert!(q.hessian().amax() < 1e-14);
            }
        }
    }

    #[test]
    fn negative_sigma_rejected() {
        let s = InterpolationSet::new(pts(&[&[0.0], &[1.0]]), vec![0.0, 1.0]).unwrap();
        assert!(matches!(
            solve_p1(&s, &LeastNormSpec::new(dvector![0.0], -1.0)),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn zero_sigma_needs_linear_poisedness() {
        let s = InterpolationSet::new(
            pts(&[&[0.0, 0.0], &[1.0, 0.0], &[2.0, 0.0]]),
            vec![0.0, 1.0, 4.0],
        )
        .unwrap();
        assert!(matches!(
            solve_p1(&s, &LeastNormSpec::new(dvector![0.0, 0.0], 0.0)),
            Err(Error::NotPoised(_))
        ));
        // With positive sigma the same set is fine.
        let q = solve_p1(&s, &LeastNormSpec::new(dvector![0.0, 0.0], 1.0)).unwrap();
        for (y, f) in s.points().iter().zip(s.values()) {
            assert_relative_eq!(q.evaluate(y).unwrap(), *f, epsilon = 1e-12);
        }
    }

    #[test]
    fn overdetermined_consistent_and_inconsistent() {
        // Seven points in 1-D: more than the three quadratic coefficients.
        let xs = [-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0];
        let points: Vec<_> = xs.iter().map(|&x| dvector![x]).collect();
        let values: Vec<f64> = xs.iter().map(|x| 1.0 - x + 2.0 * x * x).collect();
        let s = InterpolationSet::new(points.clone(), values).unwrap();
        let q = solve_p1(&s, &LeastNormSpec::new(dvector![0.0], 1.0)).unwrap();
        assert_relative_eq!(q.hessian()[(0, 0)], 4.0, epsilon = 1e-10);

        let mut values: Vec<f64> = xs.iter().map(|x| x * x).collect();
        values[3] += 1.0;
        let s = InterpolationSet::new(points, values).unwrap();
        assert!(matches!(
            solve_p1(&s, &LeastNormSpec::new(dvector![0.0], 1.0)),
            Err(Error::Inconsistent { .. })
        ));
        assert!(matches!(
            brute_force_p1(&s, &LeastNormSpec::new(dvector![0.0], 1.0)),
            Err(Error::Inconsistent { .. })
        ));
    }

    #[test]
    fn lagrange_examples() {
        let points = pts(&[&[0.0], &[1.0]]);
        let ls = lagrange_functions(&points, &dvector![0.0], 4.0).unwrap();
        assert_relative_eq!(ls[1].gradient()[0], 0.5, epsilon = 1e-14);
        assert_relative_eq!(ls[1].hessian()[(0, 0)], 1.0, epsilon = 1e-14);
        assert_relative_eq!(ls[0].constant(), 1.0, epsilon = 1e-14);
        assert_relative_eq!(ls[0].gradient()[0], -0.5, epsilon = 1e-14);
        assert_relative_eq!(ls[0].hessian()[(0, 0)], -1.0, epsilon = 1e-14);
    }

    #[test]
    fn lagrange_values_match_functions() {
        let points = pts(&[
            &[0.0, 0.0],
            &[0.5, 0.1],
            &[-0.3, 0.4],
            &[0.2, -0.6],
            &[-0.1, -0.2],
        ]);
        let x0 = dvector![0.1, 0.0];
        let system = LeastNormSystem::new(&points, &x0, 0.7).unwrap();
        let x = dvector![0.33, -0.12];
        let values = system.lagrange_values(&x).unwrap();
        for j in 0..points.len() {
            let l = system.lagrange_function(j).unwrap();
            assert_relative_eq!(values[j], l.evaluate(&x).unwrap(), epsilon = 1e-12);
        }
    }

    #[test]
    fn sigma_radius_examples() {
        assert_relative_eq!(sigma_to_radius(1.0, 2).unwrap(), 2.0);
        assert_relative_eq!(radius_to_sigma(5.0, 3).unwrap(), 0.2, epsilon = 1e-16);
        assert!(sigma_to_radius(0.0, 2).is_err());
        assert!(radius_to_sigma(-1.0, 2).is_err());
    }

    #[test]
    fn equivalence_on_fully_determined_set_is_trivial() {
        let s =
            InterpolationSet::new(pts(&[&[-1.0], &[0.0], &[1.0]]), vec![1.0, 0.0, 1.0]).unwrap();
        assert_eq!(
            verify_equivalence_theorem(&s, &dvector![0.0], 1.0).unwrap(),
            0.0
        );
    }

    #[test]
    fn equivalence_two_points() {
        let s = InterpolationSet::new(pts(&[&[0.0], &[1.0]]), vec![0.0, 1.0]).unwrap();
        assert!(verify_equivalence_theorem(&s, &dvector![0.0], 4.0).unwrap() <= 1e-10);
    }

    #[test]
    fn error_bounds_exact_for_quadratic() {
        let f_model = QuadraticModel::new(
            dvector![0.0, 0.0],
            1.0,
            dvector![1.0, -1.0],
            dmatrix![2.0, 0.5; 0.5, 1.0],
        )
        .unwrap();
        let points = pts(&[
            &[0.0, 0.0],
            &[0.3, 0.0],
            &[0.0, 0.3],
            &[-0.3, 0.0],
            &[0.0, -0.3],
        ]);
        let values = points
            .iter()
            .map(|p| f_model.evaluate(p).unwrap())
            .collect();
        let s = InterpolationSet::new(points, values).unwrap();
        let f = |x: &DVector<f64>| f_model.evaluate(x).unwrap();
        let g = |x: &DVector<f64>| f_model.gradient_at(x).unwrap();
        assert!(verify_csv_error_bounds(f, g, &s, &f_model, 2.5, 0.3, 200).unwrap());
    }

    #[test]
    fn error_bounds_reject_collinear() {
        let points = pts(&[&[0.0, 0.0], &[0.1, 0.0], &[0.2, 0.0]]);
        let s = InterpolationSet::from_points(points).unwrap();
        let zero = QuadraticModel::zero(dvector![0.0, 0.0]);
        let r = verify_csv_error_bounds(|_| 0.0, |_| dvector![0.0, 0.0], &s, &zero, 1.0, 0.5, 10);
        assert!(matches!(r, Err(Error::NotPoised(_))));
    }

    #[test]
    fn coefficient_round_trip() {
        let q = QuadraticModel::new(
            dvector![1.0, 2.0, 0.5],
            0.7,
            dvector![1.0, -1.0, 2.0],
            dmatrix![2.0, 0.5, 0.1; 0.5, 1.0, -0.3; 0.1, -0.3, 4.0],
        )
        .unwrap();
        let base = dvector![0.0, -1.0, 0.25];
        let theta = coeffs::from_model(&q, &base).unwrap();
        let back = coeffs::to_model(&theta, &base).unwrap();
        let x = dvector![0.3, 0.2, -0.9];
        assert_relative_eq!(
            back.evaluate(&x).unwrap(),
            q.evaluate(&x).unwrap(),
            epsilon = 1e-12
        );
        let m = coeffs::interpolation_matrix(std::slice::from_ref(&x), &base);
        assert_relative_eq!((m * &theta)[0], q.evaluate(&x).unwrap(), epsilon = 1e-12);
    }
}
