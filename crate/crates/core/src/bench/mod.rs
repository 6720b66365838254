//! Permutation-replicated benchmarking.
//!
//! Every (solver, problem, dimension, rhoend) cell is run on `N` randomly permuted copies of
//! the problem. The permutations depend only on the problem, the dimension, the replica
//! index and a base seed, so all solvers see the same instances. Records come back sorted by
//! key, independent of how the runs were scheduled.

mod csv;
mod profile;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::problems::{instantiate, permute_problem, random_permutation};
use crate::solver::{minimize, SolverConfig, Status};
use crate::update::{SigmaRule, DEFAULT_MULTIPLIER};

pub use self::csv::{emit_csv, parse_csv, RECORDS_HEADER};
pub use self::profile::{
    emit_profile_csv, is_solved, parse_profile_csv, performance_profile, profile_from_records,
    render_svg, solved_threshold, Metric, ProfileCurve, ProfileTable, COST_FLOOR, PROFILE_HEADER,
};

/// The three solver variants, differing only in how the update weight is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SolverKind {
    /// Geometric weight from the trust-region radius and the point spread.
    Esymbs,
    /// Weight balancing the Hessian and gradient of the new point's Lagrange function
    /// (a surrogate estimate, see [`SigmaRule::EtaXi`]).
    Esymbp,
    /// Plain symmetric Broyden update (weight zero).
    Symb,
}

impl SolverKind {
    pub const ALL: [SolverKind; 3] = [SolverKind::Esymbs, SolverKind::Esymbp, SolverKind::Symb];

    pub fn as_str(&self) -> &'static str {
        match self {
            SolverKind::Esymbs => "esymbs",
            SolverKind::Esymbp => "esymbp",
            SolverKind::Symb => "symb",
        }
    }

    /// Weight rule for this variant; `multiplier` only affects `esymbs`.
    pub fn sigma_rule(&self, multiplier: f64) -> Result<SigmaRule> {
        match self {
            SolverKind::Esymbs => SigmaRule::geometric(multiplier),
            SolverKind::Esymbp => Ok(SigmaRule::EtaXi),
            SolverKind::Symb => SigmaRule::fixed(0.0),
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SolverKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::UnknownSolver(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub solver: String,
    pub problem: String,
    pub n: usize,
    pub perm_index: usize,
    /// Seed of the permutation used for this replica.
    pub seed: u64,
    pub rhoend: f64,
    pub nf: usize,
    pub fbest: f64,
    pub status: Status,
}

/// Everything `run_suite` needs. `base` supplies rhobeg, maxfun and npt; its `rhoend` and
/// `sigma_rule` are replaced per run.
#[derive(Debug, Clone)]
pub struct SuiteSpec {
    pub solvers: Vec<SolverKind>,
    pub problems: Vec<String>,
    pub dims: Vec<usize>,
    pub rhoends: Vec<f64>,
    pub perms: usize,
    pub base_seed: u64,
    pub base: SolverConfig,
    pub multiplier: f64,
}

impl Default for SuiteSpec {
    fn default() -> Self {
        Self {
            solvers: SolverKind::ALL.to_vec(),
            problems: crate::problems::SUITE
                .iter()
                .map(|s| s.to_string())
                .collect(),
            dims: vec![6, 8, 10],
            rhoends: vec![1e-2, 1e-4],
            perms: 10,
            base_seed: 0,
            base: SolverConfig::default(),
            multiplier: DEFAULT_MULTIPLIER,
        }
    }
}

impl SuiteSpec {
    /// Resolves every name and checks every run configuration before any work starts.
    pub fn validate(&self) -> Result<()> {
        if self.perms == 0 {
            return Err(Error::InvalidArgument(
                "number of permutations must be >= 1".into(),
            ));
        }
        for (what, empty) in [
            ("solvers", self.solvers.is_empty()),
            ("problems", self.problems.is_empty()),
            ("dims", self.dims.is_empty()),
            ("rhoend values", self.rhoends.is_empty()),
        ] {
            if empty {
                return Err(Error::InvalidArgument(format!("no {what} given")));
            }
        }
        for kind in &self.solvers {
            kind.sigma_rule(self.multiplier)?;
        }
        for problem in &self.problems {
            for &n in &self.dims {
                instantiate(problem, n)?;
                for &rhoend in &self.rhoends {
                    SolverConfig {
                        rhoend,
                        ..self.base.clone()
                    }
                    .validate(n)?;
                }
            }
        }
        Ok(())
    }
}

/// Seed for replica `perm_index` of `problem` in dimension `n`.
pub fn instance_seed(base_seed: u64, problem: &str, n: usize, perm_index: usize) -> u64 {
    // FNV-1a over the name, then splitmix64 rounds to mix in the numeric fields.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in problem.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    let mut s = splitmix64(base_seed ^ h);
    s = splitmix64(s ^ n as u64);
    splitmix64(s ^ perm_index as u64)
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs every (solver, problem, n, rhoend, replica) combination, in parallel, and returns
/// one record per run sorted by that key. Failures inside a run are recorded with
/// `status = error`; only an invalid specification is an error here.
pub fn run_suite(spec: &SuiteSpec) -> Result<Vec<RunRecord>> {
    spec.validate()?;

    let mut solvers = spec.solvers.clone();
    solvers.sort_by_key(|k| k.as_str());
    solvers.dedup();
    let mut problems = spec.problems.clone();
    problems.sort();
    problems.dedup();
    let mut dims = spec.dims.clone();
    dims.sort_unstable();
    dims.dedup();
    let mut rhoends = spec.rhoends.clone();
    rhoends.sort_by(f64::total_cmp);
    rhoends.dedup();

    let mut jobs = Vec::new();
    for &kind in &solvers {
        for problem in &problems {
            for &n in &dims {
                for &rhoend in &rhoends {
                    for perm_index in 0..spec.perms {
                        jobs.push((kind, problem.as_str(), n, rhoend, perm_index));
                    }
                }
            }
        }
    }

    jobs.into_par_iter()
        .map(|(kind, problem, n, rhoend, perm_index)| {
            let seed = instance_seed(spec.base_seed, problem, n, perm_index);
            let config = SolverConfig {
                rhoend,
                sigma_rule: kind.sigma_rule(spec.multiplier)?,
                seed,
                ..spec.base.clone()
            };
            let base = instantiate(problem, n)?;
            let instance = permute_problem(&base, &random_permutation(n, seed))?;
            let (nf, fbest, status) = match minimize(|x| instance.eval(x), &instance.start, &config)
            {
                Ok(r) => (r.nf, r.best_value, r.status),
                Err(_) => (0, f64::NAN, Status::Error),
            };
            Ok(RunRecord {
                solver: kind.as_str().to_string(),
                problem: problem.to_string(),
                n,
                perm_index,
                seed,
                rhoend,
                nf,
                fbest,
                status,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatSummary {
    pub mean: f64,
    /// Population standard deviation (divisor `N`).
    pub std: f64,
    /// `std / mean`, or zero when the mean is zero.
    pub rstd: f64,
    pub count: usize,
}

/// Mean, population standard deviation and relative standard deviation of evaluation counts.
pub fn summarize(nf_values: &[usize]) -> Result<StatSummary> {
    let values: Vec<f64> = nf_values.iter().map(|&v| v as f64).collect();
    summarize_values(&values)
}

/// [`summarize`] for real-valued samples.
pub fn summarize_values(values: &[f64]) -> Result<StatSummary> {
    if values.is_empty() {
        return Err(Error::InvalidArgument(
            "cannot summarize an empty sample".into(),
        ));
    }
    let count = values.len();
    let mean = values.iter().sum::<f64>() / count as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / count as f64;
    let std = var.sqrt();
    let rstd = if mean != 0.0 { std / mean.abs() } else { 0.0 };
    Ok(StatSummary {
        mean,
        std,
        rstd,
        count,
    })
}
