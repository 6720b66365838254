//! A fixed suite of unconstrained test problems with variable dimension, and the variable
//! permutations used to replicate runs.
//!
//! Sums are evaluated in ascending index order. Permuting the variables therefore changes the
//! order of floating-point operations without changing the mathematical problem.

use std::fmt;
use std::sync::Arc;

use crate::error::{check_dim, Error, Result};

pub type Objective = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Problem identifiers accepted by [`instantiate`], in suite order.
pub const SUITE: [&str; 8] = [
    "sphere", "chrosen", "arwhead", "dqrtic", "vardim", "bdqrtic", "sumpow", "cosmix",
];

#[derive(Clone)]
pub struct ProblemDef {
    pub name: String,
    pub n: usize,
    pub objective: Objective,
    pub start: Vec<f64>,
    pub known_fmin: Option<f64>,
}

impl ProblemDef {
    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.objective)(x)
    }
}

impl fmt::Debug for ProblemDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemDef")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("start", &self.start)
            .field("known_fmin", &self.known_fmin)
            .finish_non_exhaustive()
    }
}

fn sphere(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn chrosen(x: &[f64]) -> f64 {
    let mut sum = 0.0;
    for i in 1..x.len() {
        let a = x[i - 1] - x[i] * x[i];
        let b = 1.0 - x[i];
        sum += 4.0 * a * a + b * b;
    }
    sum
}

fn arwhead(x: &[f64]) -> f64 {
    let n = x.len();
    let last = x[n - 1] * x[n - 1];
    let mut sum = 0.0;
    for &xi in &x[..n - 1] {
        let t = xi * xi + last;
        sum += t * t - 4.0 * xi + 3.0;
    }
    sum
}

fn dqrtic(x: &[f64]) -> f64 {
    x.iter()
        .enumerate()
        .map(|(i, v)| (v - (i + 1) as f64).powi(4))
        .sum()
}

fn vardim(x: &[f64]) -> f64 {
    let mut squares = 0.0;
    let mut weighted = 0.0;
    for (i, v) in x.iter().enumerate() {
        let d = v - 1.0;
        squares += d * d;
        weighted += (i + 1) as f64 * d;
    }
    squares + weighted * weighted + weighted.powi(4)
}

fn bdqrtic(x: &[f64]) -> f64 {
    let n = x.len();
    let last = 5.0 * x[n - 1] * x[n - 1];
    let mut sum = 0.0;
    for i in 0..n - 4 {
        let a = -4.0 * x[i] + 3.0;
        let b = x[i] * x[i]
            + 2.0 * x[i + 1] * x[i + 1]
            + 3.0 * x[i + 2] * x[i + 2]
            + 4.0 * x[i + 3] * x[i + 3]
            + last;
        sum += a * a + b * b;
    }
    sum
}

fn sumpow(x: &[f64]) -> f64 {
    x.iter()
        .enumerate()
        .map(|(i, v)| (i + 1) as f64 * v.powi(4))
        .sum()
}

fn cosmix(x: &[f64]) -> f64 {
    let mut sum = 0.0;
    for i in 0..x.len() - 1 {
        sum += (-0.5 * x[i + 1] - x[i] * x[i]).cos();
    }
    sum
}

/// Builds a suite problem by (lowercase) name.
pub fn instantiate(name: &str, n: usize) -> Result<ProblemDef> {
    let min_dim = if name == "bdqrtic" { 5 } else { 2 };
    let (objective, start, known_fmin): (Objective, Vec<f64>, Option<f64>) = match name {
        "sphere" => (Arc::new(sphere), vec![1.0; n], Some(0.0)),
        "chrosen" => (Arc::new(chrosen), vec![-1.0; n], Some(0.0)),
        "arwhead" => (Arc::new(arwhead), vec![1.0; n], Some(0.0)),
        "dqrtic" => (Arc::new(dqrtic), vec![2.0; n], Some(0.0)),
        "vardim" => (
            Arc::new(vardim),
            (1..=n).map(|i| 1.0 - i as f64 / n as f64).collect(),
            Some(0.0),
        ),
        "bdqrtic" => (Arc::new(bdqrtic), vec![1.0; n], None),
        "sumpow" => (Arc::new(sumpow), vec![1.0; n], Some(0.0)),
        "cosmix" => (Arc::new(cosmix), vec![1.0; n], None),
        _ => return Err(Error::UnknownProblem(name.to_string())),
    };
    if n < min_dim {
        return Err(Error::InvalidArgument(format!(
            "{name} needs n >= {min_dim}, got {n}"
        )));
    }
    Ok(ProblemDef {
        name: name.to_string(),
        n,
        objective,
        start,
        known_fmin,
    })
}

/// A permutation of `0..n`, acting on vectors by `(P x)_i = x[perm[i]]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    perm: Vec<usize>,
    seed: u64,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self {
            perm: (0..n).collect(),
            seed: 0,
        }
    }

    /// Wraps an explicit index map; fails unless every index appears exactly once.
    pub fn from_vec(perm: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; perm.len()];
        for &p in &perm {
            if p >= perm.len() || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidArgument(format!(
                    "{perm:?} is not a permutation"
                )));
            }
        }
        Ok(Self { perm, seed: 0 })
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.perm
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.perm.len()];
        for (i, &p) in self.perm.iter().enumerate() {
            inv[p] = i;
        }
        Self {
            perm: inv,
            seed: self.seed,
        }
    }

    /// `P x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.perm.iter().map(|&p| x[p]).collect()
    }

    /// `P^{-1} y`.
    pub fn apply_inverse(&self, y: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; y.len()];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = y[i];
        }
        x
    }
}

/// xorshift64* with shifts 12/25/27 and multiplier 2685821657736338717.
#[derive(Debug, Clone)]
pub struct XorShift64Star {
    state: u64,
}

impl XorShift64Star {
    const SEED_MIX: u64 = 0x9E37_79B9_7F4A_7C15;
    const MULTIPLIER: u64 = 2_685_821_657_736_338_717;

    pub fn new(seed: u64) -> Self {
        let state = seed ^ Self::SEED_MIX;
        // An all-zero state is a fixed point of the generator.
        Self {
            state: if state == 0 { Self::SEED_MIX } else { state },
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.state;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.state = x;
        x.wrapping_mul(Self::MULTIPLIER)
    }
}

/// Fisher-Yates shuffle of `0..n`, swapping position `i = n-1, ..., 1` with a uniform
/// `j = next % (i + 1)`.
pub fn random_permutation(n: usize, seed: u64) -> Permutation {
    let mut rng = XorShift64Star::new(seed);
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        perm.swap(i, j);
    }
    Permutation { perm, seed }
}

/// `F_P(x) = F(P x)` started from `P^{-1} x_hat`.
pub fn permute_problem(p: &ProblemDef, perm: &Permutation) -> Result<ProblemDef> {
    check_dim(p.n, perm.len())?;
    let inner = Arc::clone(&p.objective);
    let map = perm.clone();
    Ok(ProblemDef {
        name: p.name.clone(),
        n: p.n,
        objective: Arc::new(move |x: &[f64]| inner(&map.apply(x))),
        start: perm.apply_inverse(&p.start),
        known_fmin: p.known_fmin,
    })
}
