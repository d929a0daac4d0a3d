//! Root finding for two equal polygons (N = L, θ ∈ {0, π/N}): planar pairs,
//! stacked pairs, the height of equal-size stacked pairs, and scans over the
//! mass ratio.

use std::cell::Cell;
use std::fmt::Write as _;
use std::io;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{PolyError, Result};
use crate::grid::GridSpec;
use crate::nbody::cc_residual_with_tolerance;
use crate::polygon::{centered_positions, TwistedPairParams};
use crate::residuals::{residual_vector, EqualRingSystem, ThetaChoice};
use crate::roots::{bisect, newton2, sign_change_indices, NewtonOptions};

/// Tolerance of the point-mass check applied to every solver output.
pub const ORACLE_TOLERANCE: f64 = 1e-8;
/// Largest accepted relative residual of the reduced conditions.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;
/// Distance from a = 1 below which a root counts as equal-size.
pub const EQUAL_SIZE_TOLERANCE: f64 = 1e-6;
/// Distance from a = 1 below which a planar root is flagged.
pub const NEAR_UNIT_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BranchTag {
    /// a < 1: the upper polygon is the smaller one.
    InnerSmaller,
    /// a > 1.
    InnerLarger,
    EqualSize,
}

impl BranchTag {
    pub fn of(a: f64) -> Self {
        if (a - 1.0).abs() <= EQUAL_SIZE_TOLERANCE {
            BranchTag::EqualSize
        } else if a < 1.0 {
            BranchTag::InnerSmaller
        } else {
            BranchTag::InnerLarger
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub params: TwistedPairParams,
    /// Largest reduced residual of [`residual_vector`], divided by `max(1, |μ|)`.
    pub residual_norm: f64,
    /// λ = U/I of the centered point-mass system.
    pub lambda: f64,
    pub iterations: usize,
    pub converged: bool,
    pub branch_tag: BranchTag,
    /// Largest point-mass residual from [`cc_residual_with_tolerance`].
    pub oracle_residual: f64,
    pub near_unit_ratio: bool,
}

fn verify(params: TwistedPairParams, iterations: usize) -> Result<SolveResult> {
    let reduced = residual_vector(&params)?;
    let residual_norm = reduced.max_abs() / reduced.mu_lower.abs().max(1.0);
    let report = cc_residual_with_tolerance(&centered_positions(&params)?, ORACLE_TOLERANCE);
    Ok(SolveResult {
        params,
        residual_norm,
        lambda: report.lambda,
        iterations,
        converged: residual_norm <= RESIDUAL_TOLERANCE && report.is_central,
        branch_tag: BranchTag::of(params.a),
        oracle_residual: report.max_residual_norm,
        near_unit_ratio: (params.a - 1.0).abs() <= NEAR_UNIT_TOLERANCE,
    })
}

fn check_inputs(n: usize, b: f64) -> Result<()> {
    if n < 2 {
        return Err(PolyError::InvalidParams(format!("N = {n} < 2")));
    }
    if !(b.is_finite() && b > 0.0) {
        return Err(PolyError::InvalidParams(format!("b must be positive, got {b}")));
    }
    Ok(())
}

/// Nodes `s ∈ (0, 1)` for the planar scan: log-spaced from 10⁻⁴ towards ½
/// and log-spaced in `1 − s` from ½ down to 10⁻¹⁰.
fn planar_nodes() -> Vec<f64> {
    let mut nodes = GridSpec::log(1e-4, 0.5, 400).values();
    let upper = GridSpec::log(0.5, 1e-10, 400).values();
    nodes.extend(upper.iter().skip(1).map(|d| 1.0 - d));
    nodes
}

/// All coplanar pairs `(N, N, a, b, 0, θ)` with `a ≠ 1`.
///
/// Scans `a = s` and `a = 1/s` for `s ∈ (0, 1)`, bisects every sign change of
/// the balance function to full precision and checks each root against the
/// point-mass model.
pub fn solve_planar(n: usize, b: f64, choice: ThetaChoice) -> Result<Vec<SolveResult>> {
    check_inputs(n, b)?;
    let system = EqualRingSystem::new(n, choice);
    let nodes = planar_nodes();
    let inner = |s: f64| system.planar_balance_scaled(s, b);
    let outer = |s: f64| system.planar_balance(1.0 / s, b);

    let mut trace = String::new();
    let mut roots: Vec<(f64, usize)> = Vec::new();
    for (name, f, invert) in [
        ("a = s", &inner as &dyn Fn(f64) -> f64, false),
        ("a = 1/s", &outer as &dyn Fn(f64) -> f64, true),
    ] {
        let values: Vec<f64> = nodes.iter().map(|&s| f(s)).collect();
        let changes = sign_change_indices(&values);
        let _ = write!(
            trace,
            "[{name}: {} nodes on [{:e}, 1 - {:e}], f = {:e} .. {:e}, {} sign change(s)] ",
            nodes.len(),
            nodes[0],
            1.0 - nodes[nodes.len() - 1],
            values[0],
            values[values.len() - 1],
            changes.len()
        );
        for i in changes {
            let count = Cell::new(0usize);
            let s = bisect(
                |s| {
                    count.set(count.get() + 1);
                    f(s)
                },
                nodes[i],
                nodes[i + 1],
                0.0,
            );
            roots.push((if invert { 1.0 / s } else { s }, count.get()));
        }
    }
    if roots.is_empty() {
        return Err(PolyError::NoRootInBracket { trace });
    }
    roots.sort_by(|p, q| p.0.total_cmp(&q.0));
    roots
        .into_iter()
        .map(|(a, iterations)| {
            let params = TwistedPairParams::new(n, n, a, b, 0.0, choice.angle(n))?;
            verify(params, iterations)
        })
        .collect()
}

/// Multistart settings for [`solve_spatial_with`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpatialOptions {
    pub a_starts: GridSpec,
    pub h_starts: GridSpec,
    pub max_iterations: usize,
    pub fd_step: f64,
    /// Roots closer than this in both a and h are merged.
    pub dedup: f64,
    /// Roots with smaller h are coplanar and dropped.
    pub min_height: f64,
}

impl Default for SpatialOptions {
    fn default() -> Self {
        Self {
            a_starts: GridSpec::log(0.2, 5.0, 25),
            h_starts: GridSpec::log(0.1, 5.0, 25),
            max_iterations: 100,
            fd_step: 1e-7,
            dedup: 1e-8,
            min_height: 1e-6,
        }
    }
}

/// Roots of a spatial multistart together with its bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpatialSolution {
    #[serde(rename = "N")]
    pub n: usize,
    pub b: f64,
    pub theta_choice: ThetaChoice,
    pub starts: usize,
    /// Newton runs whose reduced residual fell below the acceptance level.
    pub converged_runs: usize,
    /// Distinct roots, in order of the first start that reached them.
    pub roots: Vec<SolveResult>,
    /// Distinct Newton limits that failed the point-mass check or had h ≈ 0.
    pub rejected: Vec<SolveResult>,
}

/// [`solve_spatial_with`] using the default 25 × 25 start grid.
pub fn solve_spatial(n: usize, b: f64, choice: ThetaChoice) -> Result<SpatialSolution> {
    solve_spatial_with(n, b, choice, &SpatialOptions::default())
}

/// Stacked pairs `(N, N, a, b, h, θ)` with `h > 0`, by damped Newton on the
/// two reduced equations from every point of the start grid.
pub fn solve_spatial_with(
    n: usize,
    b: f64,
    choice: ThetaChoice,
    options: &SpatialOptions,
) -> Result<SpatialSolution> {
    check_inputs(n, b)?;
    let system = EqualRingSystem::new(n, choice);
    let opts = NewtonOptions {
        max_iterations: options.max_iterations,
        fd_step: options.fd_step,
        ..NewtonOptions::default()
    };
    let starts: Vec<[f64; 2]> = options
        .a_starts
        .values()
        .into_iter()
        .flat_map(|a| options.h_starts.values().into_iter().map(move |h| [a, h]))
        .collect();
    let f = |x: [f64; 2]| {
        let (a, h) = (x[0], x[1].abs());
        if !(a > 0.0 && h > 0.0 && a.is_finite() && h.is_finite()) {
            return None;
        }
        let (r1, r2) = system.spatial_residuals(a, b, h);
        (r1.is_finite() && r2.is_finite()).then_some([r1, r2])
    };
    let outcomes: Vec<_> = starts.par_iter().map(|&x0| newton2(f, x0, &opts)).collect();

    let mut distinct: Vec<([f64; 2], usize)> = Vec::new();
    let mut converged_runs = 0;
    for out in outcomes.iter().filter(|o| o.converged) {
        converged_runs += 1;
        let x = [out.x[0], out.x[1].abs()];
        let seen = distinct.iter().any(|(y, _)| {
            (x[0] - y[0]).abs() <= options.dedup && (x[1] - y[1]).abs() <= options.dedup
        });
        if !seen {
            distinct.push((x, out.iterations));
        }
    }

    let verified: Vec<Result<SolveResult>> = distinct
        .par_iter()
        .map(|&([a, h], iterations)| {
            let params = TwistedPairParams::new(n, n, a, b, h, choice.angle(n))?;
            verify(params, iterations)
        })
        .collect();
    let mut roots = Vec::new();
    let mut rejected = Vec::new();
    for r in verified {
        let mut r = r?;
        if r.params.h < options.min_height {
            r.converged = false;
        }
        if r.converged {
            roots.push(r);
        } else {
            rejected.push(r);
        }
    }
    Ok(SpatialSolution {
        n,
        b,
        theta_choice: choice,
        starts: starts.len(),
        converged_runs,
        roots,
        rejected,
    })
}

/// The unique `h > 0` making `(N, N, 1, 1, h, θ)` central.
///
/// Counts sign changes of `C + T − A` over 2000 log-spaced heights in
/// `[10⁻⁴, 10³]`; anything other than exactly one is an error.
pub fn equal_size_height(n: usize, choice: ThetaChoice) -> Result<f64> {
    if n < 2 {
        return Err(PolyError::InvalidParams(format!("N = {n} < 2")));
    }
    let system = EqualRingSystem::new(n, choice);
    let hs = GridSpec::log(1e-4, 1e3, 2000).values();
    let values: Vec<f64> = hs.iter().map(|&h| system.equal_size_height_function(h)).collect();
    let changes = sign_change_indices(&values);
    if changes.len() != 1 {
        return Err(PolyError::BracketCount {
            expected: 1,
            found: changes.len(),
        });
    }
    let i = changes[0];
    Ok(bisect(|h| system.equal_size_height_function(h), hs[i], hs[i + 1], 0.0))
}

/// One line of an existence scan. A mass ratio without roots gets a single
/// row with `root_index`, `a`, `h` and `residual_norm` empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub b: f64,
    pub theta: f64,
    pub root_index: Option<usize>,
    pub a: Option<f64>,
    pub h: Option<f64>,
    pub residual_norm: Option<f64>,
    pub converged: bool,
}

/// Spatial roots over a grid of mass ratios. Presence and absence are
/// empirical: a missing root means no start converged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExistenceTable {
    #[serde(rename = "N")]
    pub n: usize,
    pub theta_choice: ThetaChoice,
    pub certified: bool,
    pub rows: Vec<ScanRow>,
    /// Roots that converged but failed the point-mass check.
    pub oracle_failures: usize,
}

pub const SCAN_HEADER: &str = "b,theta,root_index,a,h,residual_norm,converged";

impl ExistenceTable {
    /// Number of roots found at each mass ratio, in grid order.
    pub fn counts(&self) -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, usize)> = Vec::new();
        for row in &self.rows {
            let found = usize::from(row.root_index.is_some());
            match out.last_mut() {
                Some((b, c)) if *b == row.b => *c += found,
                _ => out.push((row.b, found)),
            }
        }
        out
    }

    /// CSV with 17 significant digits per float.
    pub fn write_csv<W: io::Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{SCAN_HEADER}")?;
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.16e}")).unwrap_or_default();
        for r in &self.rows {
            writeln!(
                w,
                "{:.16e},{:.16e},{},{},{},{},{}",
                r.b,
                r.theta,
                r.root_index.map(|i| i.to_string()).unwrap_or_default(),
                opt(r.a),
                opt(r.h),
                opt(r.residual_norm),
                r.converged
            )?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii")
    }
}

/// Runs [`solve_spatial_with`] for every `b` in `b_grid`.
pub fn existence_scan_b(
    n: usize,
    choice: ThetaChoice,
    b_grid: &[f64],
    options: &SpatialOptions,
) -> Result<ExistenceTable> {
    let theta = choice.angle(n);
    let mut rows = Vec::new();
    let mut oracle_failures = 0;
    for &b in b_grid {
        let sol = solve_spatial_with(n, b, choice, options)?;
        oracle_failures += sol
            .rejected
            .iter()
            .filter(|r| r.params.h >= options.min_height && r.residual_norm <= RESIDUAL_TOLERANCE)
            .count();
        if sol.roots.is_empty() {
            rows.push(ScanRow {
                b,
                theta,
                root_index: None,
                a: None,
                h: None,
                residual_norm: None,
                converged: false,
            });
        }
        for (i, r) in sol.roots.iter().enumerate() {
            rows.push(ScanRow {
                b,
                theta,
                root_index: Some(i),
                a: Some(r.params.a),
                h: Some(r.params.h),
                residual_norm: Some(r.residual_norm),
                converged: r.converged,
            });
        }
    }
    Ok(ExistenceTable {
        n,
        theta_choice: choice,
        certified: false,
        rows,
        oracle_failures,
    })
}
