//! Performance profiles over benchmark records.
//!
//! A profile instance is a (problem, n, rhoend) cell. Its cost for a solver is either the mean
//! evaluation count or the relative standard deviation of the counts across the replicas;
//! the cell counts as failed when any replica did not solve the problem.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::str::FromStr;

use ::csv::{ReaderBuilder, Writer};

use super::{summarize, RunRecord};
use crate::error::{Error, Result};
use crate::problems::instantiate;
use crate::solver::Status;

/// Costs below this are raised to it, so zero costs still give finite ratios.
pub const COST_FLOOR: f64 = 1e-12;
pub const PROFILE_HEADER: [&str; 3] = ["solver", "tau", "rho"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Mean,
    Rstd,
}

impl Metric {
    pub fn as_str(&self) -> &'static str {
        match self {
            Metric::Mean => "mean",
            Metric::Rstd => "rstd",
        }
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(Metric::Mean),
            "rstd" => Ok(Metric::Rstd),
            other => Err(Error::InvalidArgument(format!(
                "unknown metric `{other}` (expected mean or rstd)"
            ))),
        }
    }
}

/// Right-continuous step function: the value at `tau` is the fraction of the last breakpoint
/// with abscissa `<= tau`, and zero below the first one.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileCurve {
    pub solver: String,
    pub breakpoints: Vec<(f64, f64)>,
}

impl ProfileCurve {
    pub fn value_at(&self, tau: f64) -> f64 {
        self.breakpoints
            .iter()
            .take_while(|(t, _)| *t <= tau)
            .last()
            .map_or(0.0, |&(_, r)| r)
    }

    /// Limit for large `tau`: the fraction of problems solved at all.
    pub fn terminal(&self) -> f64 {
        self.breakpoints.last().map_or(0.0, |&(_, r)| r)
    }
}

/// Dolan-More profiles. `costs[p][s]` is solver `s`'s cost on problem `p`, `None` for a
/// failure.
pub fn performance_profile(
    solvers: &[String],
    costs: &[Vec<Option<f64>>],
) -> Result<Vec<ProfileCurve>> {
    if solvers.is_empty() || costs.is_empty() {
        return Err(Error::InvalidArgument(
            "a profile needs at least one problem and one solver".into(),
        ));
    }
    let mut ratios = vec![Vec::with_capacity(costs.len()); solvers.len()];
    for (p, row) in costs.iter().enumerate() {
        if row.len() != solvers.len() {
            return Err(Error::DimensionMismatch {
                expected: solvers.len(),
                found: row.len(),
            });
        }
        let mut clamped = Vec::with_capacity(row.len());
        for c in row {
            clamped.push(match *c {
                Some(v) if v.is_finite() && v >= 0.0 => Some(v.max(COST_FLOOR)),
                Some(v) => {
                    return Err(Error::InvalidArgument(format!(
                        "invalid cost {v} for problem {p}"
                    )));
                }
                None => None,
            });
        }
        let best = clamped
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min);
        for (s, c) in clamped.iter().enumerate() {
            ratios[s].push(c.map_or(f64::INFINITY, |v| v / best));
        }
    }

    let total = costs.len() as f64;
    Ok(solvers
        .iter()
        .zip(ratios)
        .map(|(solver, mut r)| {
            r.sort_by(f64::total_cmp);
            let mut breakpoints =
                vec![(1.0, r.iter().filter(|&&x| x <= 1.0).count() as f64 / total)];
            for (i, &x) in r.iter().enumerate() {
                if x > 1.0 && x.is_finite() && r.get(i + 1) != Some(&x) {
                    breakpoints.push((x, (i + 1) as f64 / total));
                }
            }
            ProfileCurve {
                solver: solver.clone(),
                breakpoints,
            }
        })
        .collect())
}

/// `fmin + max(1e-6, 1e-4 |fmin|)`.
pub fn solved_threshold(known_fmin: f64) -> f64 {
    known_fmin + (1e-4 * known_fmin.abs()).max(1e-6)
}

/// A run solves its problem if it stopped normally and, when the minimum is known, got
/// within [`solved_threshold`] of it. Without a known minimum only convergence counts.
pub fn is_solved(record: &RunRecord, known_fmin: Option<f64>) -> bool {
    match known_fmin {
        Some(fmin) => {
            matches!(record.status, Status::Converged | Status::Stalled)
                && record.fbest <= solved_threshold(fmin)
        }
        None => record.status == Status::Converged,
    }
}

/// Costs per (problem, n, rhoend) instance and solver, ready for [`performance_profile`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileTable {
    pub instances: Vec<(String, usize, f64)>,
    pub solvers: Vec<String>,
    pub costs: Vec<Vec<Option<f64>>>,
}

impl ProfileTable {
    /// Groups records by instance and solver. A cell fails if any of its runs is unsolved or
    /// the solver has no runs on the instance.
    pub fn from_records(records: &[RunRecord], metric: Metric) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::InvalidArgument("no records to profile".into()));
        }
        let solvers: BTreeSet<&str> = records.iter().map(|r| r.solver.as_str()).collect();
        let mut cells: BTreeMap<(String, usize, u64), BTreeMap<&str, Vec<&RunRecord>>> =
            BTreeMap::new();
        for r in records {
            cells
                .entry((r.problem.clone(), r.n, r.rhoend.to_bits()))
                .or_default()
                .entry(r.solver.as_str())
                .or_default()
                .push(r);
        }

        let mut fmins = BTreeMap::new();
        let mut instances = Vec::with_capacity(cells.len());
        let mut costs = Vec::with_capacity(cells.len());
        for ((problem, n, rho_bits), by_solver) in &cells {
            let fmin = *fmins
                .entry((problem.clone(), *n))
                .or_insert_with(|| instantiate(problem, *n).ok().and_then(|p| p.known_fmin));
            let mut row = Vec::with_capacity(solvers.len());
            for solver in &solvers {
                let cost = match by_solver.get(solver) {
                    Some(runs) if runs.iter().all(|r| is_solved(r, fmin)) => {
                        let nf: Vec<usize> = runs.iter().map(|r| r.nf).collect();
                        let s = summarize(&nf)?;
                        Some(match metric {
                            Metric::Mean => s.mean,
                            Metric::Rstd => s.rstd,
                        })
                    }
                    _ => None,
                };
                row.push(cost);
            }
            instances.push((problem.clone(), *n, f64::from_bits(*rho_bits)));
            costs.push(row);
        }
        Ok(Self {
            instances,
            solvers: solvers.into_iter().map(str::to_string).collect(),
            costs,
        })
    }
}

pub fn profile_from_records(records: &[RunRecord], metric: Metric) -> Result<Vec<ProfileCurve>> {
    let table = ProfileTable::from_records(records, metric)?;
    performance_profile(&table.solvers, &table.costs)
}

/// One row per breakpoint, curves in the given order.
pub fn emit_profile_csv(curves: &[ProfileCurve]) -> Result<Vec<u8>> {
    let mut w = Writer::from_writer(Vec::new());
    let io = |e: ::csv::Error| Error::Parse {
        line: 0,
        message: e.to_string(),
    };
    w.write_record(PROFILE_HEADER).map_err(io)?;
    for c in curves {
        for &(tau, rho) in &c.breakpoints {
            w.write_record([c.solver.as_str(), &tau.to_string(), &rho.to_string()])
                .map_err(io)?;
        }
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

/// Reads a profile CSV back; consecutive rows with the same solver form one curve.
pub fn parse_profile_csv(bytes: &[u8]) -> Result<Vec<ProfileCurve>> {
    let mut reader = ReaderBuilder::new().has_headers(false).from_reader(bytes);
    let mut curves: Vec<ProfileCurve> = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let line = i as u64 + 1;
        let row = row.map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        if i == 0 {
            if row.iter().ne(PROFILE_HEADER) {
                return Err(Error::Parse {
                    line,
                    message: format!("expected header `{}`", PROFILE_HEADER.join(",")),
                });
            }
            continue;
        }
        let parse = |k: usize| {
            row[k].parse::<f64>().map_err(|_| Error::Parse {
                line,
                message: format!("invalid {} `{}`", PROFILE_HEADER[k], &row[k]),
            })
        };
        let point = (parse(1)?, parse(2)?);
        match curves.last_mut() {
            Some(c) if c.solver == row[0] => c.breakpoints.push(point),
            _ => curves.push(ProfileCurve {
                solver: row[0].to_string(),
                breakpoints: vec![point],
            }),
        }
    }
    Ok(curves)
}

const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

/// Minimal SVG plot of the step curves on `tau` in `[1, tau_max]`, `rho` in `[0, 1]`.
pub fn render_svg(curves: &[ProfileCurve], title: &str) -> String {
    let (w, h, left, right, top, bottom) = (640.0, 420.0, 60.0, 150.0, 40.0, 50.0);
    let tau_max = curves
        .iter()
        .flat_map(|c| c.breakpoints.iter().map(|&(t, _)| t))
        .filter(|t| t.is_finite())
        .fold(1.0f64, f64::max)
        .max(1.5)
        * 1.05;
    let pw = w - left - right;
    let ph = h - top - bottom;
    let sx = |t: f64| left + (t.min(tau_max) - 1.0) / (tau_max - 1.0) * pw;
    let sy = |r: f64| top + (1.0 - r) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="22" font-family="sans-serif" font-size="15" text-anchor="middle">{}</text>"#,
        left + pw / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for k in 0..=4 {
        let r = k as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">{r:.2}</text>"#,
            left - 6.0,
            sy(r) + 4.0
        );
        let t = 1.0 + (tau_max - 1.0) * r;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="middle">{t:.2}</text>"#,
            sx(t),
            top + ph + 16.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">tau</text>"#,
        left + pw / 2.0,
        h - 10.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 16 {})">rho</text>"#,
        top + ph / 2.0,
        top + ph / 2.0
    );

    for (i, c) in curves.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let mut pts = Vec::new();
        let mut prev = 0.0;
        for &(t, r) in &c.breakpoints {
            pts.push((sx(t), sy(prev)));
            pts.push((sx(t), sy(r)));
            prev = r;
        }
        pts.push((sx(tau_max), sy(prev)));
        let path: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            path.join(" ")
        );
        let ly = top + 16.0 + 18.0 * i as f64;
        let lx = w - right + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
            lx + 20.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12">{}</text>"#,
            lx + 26.0,
            ly + 4.0,
            escape(&c.solver)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
