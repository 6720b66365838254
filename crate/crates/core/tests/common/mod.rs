#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sobolev_dfo::QuadraticModel;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal_vec(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> DVector<f64> {
    DVector::from_fn(n, |_, _| scale * rng.sample::<f64, _>(StandardNormal))
}

pub fn symmetric(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| scale * rng.sample::<f64, _>(StandardNormal));
    (&a + a.transpose()) * 0.5
}

pub fn random_quadratic(rng: &mut ChaCha8Rng, n: usize) -> QuadraticModel {
    let base = normal_vec(rng, n, 1.0);
    let c = rng.sample::<f64, _>(StandardNormal);
    let g = normal_vec(rng, n, 1.0);
    let h = symmetric(rng, n, 1.0);
    QuadraticModel::new(base, c, g, h).unwrap()
}

/// Uniform point in `B(center, radius)`.
pub fn in_ball(rng: &mut ChaCha8Rng, center: &DVector<f64>, radius: f64) -> DVector<f64> {
    let n = center.len();
    let d = normal_vec(rng, n, 1.0);
    let u: f64 = rng.random();
    center + d.normalize() * (radius * u.powf(1.0 / n as f64))
}

pub fn points_in_ball(
    rng: &mut ChaCha8Rng,
    m: usize,
    center: &DVector<f64>,
    radius: f64,
) -> Vec<DVector<f64>> {
    (0..m).map(|_| in_ball(rng, center, radius)).collect()
}

/// Coefficients `(c, g, upper triangle of H)` expanded at `base`.
pub fn coefficients(q: &QuadraticModel, base: &DVector<f64>) -> Vec<f64> {
    let q = q.rebase(base).unwrap();
    let n = q.dim();
    let mut out = vec![q.constant()];
    out.extend(q.gradient().iter());
    for i in 0..n {
        for j in i..n {
            out.push(q.hessian()[(i, j)]);
        }
    }
    out
}

/// Largest coefficient difference at `a`'s base, relative to `1 + max |coefficient|`.
pub fn coeff_distance(a: &QuadraticModel, b: &QuadraticModel) -> f64 {
    let base = a.base().clone();
    let ca = coefficients(a, &base);
    let cb = coefficients(b, &base);
    let scale = 1.0 + ca.iter().chain(&cb).fold(0.0f64, |m, v| m.max(v.abs()));
    ca.iter()
        .zip(&cb)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
        / scale
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Random orthogonal matrix from the QR factorization of a Gaussian matrix.
pub fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    a.qr().q()
}

/// Matrix of `x -> P x` with `(P x)_i = x[perm[i]]`.
pub fn permutation_matrix(perm: &[usize]) -> DMatrix<f64> {
    let n = perm.len();
    DMatrix::from_fn(n, n, |i, j| if perm[i] == j { 1.0 } else { 0.0 })
}

/// `x -> q(P x)` as a quadratic.
pub fn compose_permutation(q: &QuadraticModel, perm: &[usize]) -> QuadraticModel {
    let p = permutation_matrix(perm);
    QuadraticModel::new(
        p.transpose() * q.base(),
        q.constant(),
        p.transpose() * q.gradient(),
        p.transpose() * q.hessian() * &p,
    )
    .unwrap()
}
