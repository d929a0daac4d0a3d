//! Numerical verification of the sign statements that decide which twisted
//! configurations can be central.
//!
//! Each function evaluates one trigonometric sum exactly (or through an exact
//! rearrangement, see [`crate::series`]); the `*_suite` functions sweep grids
//! and collect every violation into a [`LemmaReport`]. None of this is
//! interval-certified: it is grid evidence with explicit bounds.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{PolyError, Result};
use crate::grid::GridSpec;
use crate::roots::bisect;
use crate::series::{laplace_coefficient, series_coeffs, shell_difference, shell_difference_direct};
use crate::sum::{pairwise_sum, pairwise_sum_by};

/// Distance below which a sign change is attributed to a collision pole.
const POLE_DISTANCE: f64 = 1e-6;

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(PolyError::Domain(format!("{name} must be positive, got {v}")))
    }
}

fn check_n(n: usize) -> Result<()> {
    if n >= 2 {
        Ok(())
    } else {
        Err(PolyError::Domain(format!("N = {n} < 2")))
    }
}

/// `Σ_j sin(θ_j + θ) / (1 + a² − 2a cos(θ_j + θ) + x)^α` with `θ_j = 2πj/N`.
///
/// The positivity statement concerns `θ ∈ (0, π/N)`; the closed interval is
/// accepted so that the cancellation at the endpoints can be observed.
pub fn twisted_sine_sum(a: f64, theta: f64, n: usize, x: f64, alpha: f64) -> Result<f64> {
    check_n(n)?;
    check_positive("a", a)?;
    check_positive("alpha", alpha)?;
    if !(x.is_finite() && x >= 0.0) {
        return Err(PolyError::Domain(format!("x must be nonnegative, got {x}")));
    }
    let upper = PI / n as f64;
    if !(theta >= -1e-12 && theta <= upper + 1e-12) {
        return Err(PolyError::Domain(format!(
            "theta = {theta} outside [0, pi/N]"
        )));
    }
    let base0 = (1.0 - a) * (1.0 - a) + x;
    let mut zero = false;
    let value = pairwise_sum_by(n, |j| {
        let psi = TAU * ((j + 1) % n) as f64 / n as f64 + theta;
        let half = (psi / 2.0).sin();
        let base = base0 + 4.0 * a * half * half;
        if base == 0.0 {
            zero = true;
        }
        psi.sin() * base.powf(-alpha)
    });
    if zero {
        return Err(PolyError::Domain("collision: a = 1, x = 0, theta = 0".into()));
    }
    Ok(value)
}

/// Sign changes of `θ ↦ Σ_j sin(θ_j + θ) / [1 + a² − 2a cos(θ_j + θ) + h²]^{3/2}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SineZeroScan {
    pub n: usize,
    pub a: f64,
    pub h: f64,
    /// Number of grid nodes actually used.
    pub grid: usize,
    /// Zeros in `[0, 2π)`, increasing.
    pub zeros: Vec<f64>,
    /// Sign changes through a collision pole (only when a = 1, h = 0).
    pub excluded: Vec<f64>,
}

fn tangential_sum(n: usize, a: f64, h: f64, theta: f64) -> (f64, f64) {
    let base0 = (1.0 - a) * (1.0 - a) + h * h;
    let mut min_d = f64::INFINITY;
    let terms: Vec<f64> = (1..=n)
        .map(|j| {
            let psi = TAU * (j % n) as f64 / n as f64 + theta;
            let half = (psi / 2.0).sin();
            let d = base0 + 4.0 * a * half * half;
            min_d = min_d.min(d);
            psi.sin() / (d * d.sqrt())
        })
        .collect();
    (pairwise_sum(&terms), min_d)
}

/// The tangential sum as a function of θ. Away from `a = 1, h = 0` it is
/// evaluated through its Fourier expansion
/// `N Σ_q c_{qN} sin(qNθ)`, whose coefficients come from Laplace
/// coefficients; the literal sum cancels down to `O(t^N)` and cannot place
/// zeros accurately when `t = 2a/(1 + a² + h²)` is small.
struct TangentialEvaluator {
    n: usize,
    a: f64,
    h: f64,
    /// `(qN, N c_{qN})`.
    modes: Option<Vec<(f64, f64)>>,
}

impl TangentialEvaluator {
    fn new(n: usize, a: f64, h: f64) -> Self {
        let s = 1.0 + a * a + h * h;
        let t = 2.0 * a / s;
        let beta = t / (1.0 + (1.0 - t * t).max(0.0).sqrt());
        let modes = (beta <= 0.9).then(|| {
            let k = ((1.0 + beta * beta) / s).powf(1.5);
            let mut modes = Vec::new();
            let mut first = None;
            for q in 1.. {
                let m = q * n;
                let below = laplace_coefficient(1.5, m - 1, beta);
                let above = laplace_coefficient(1.5, m + 1, beta);
                let c = n as f64 * k * (below - above) / 2.0;
                let first = *first.get_or_insert(below);
                modes.push((m as f64, c));
                if below <= 1e-20 * first || c == 0.0 {
                    break;
                }
            }
            modes
        });
        Self { n, a, h, modes }
    }

    fn eval(&self, theta: f64) -> f64 {
        match &self.modes {
            Some(modes) => {
                let terms: Vec<f64> = modes.iter().map(|(m, c)| c * (m * theta).sin()).collect();
                pairwise_sum(&terms)
            }
            None => tangential_sum(self.n, self.a, self.h, theta).0,
        }
    }
}

/// Locates every sign change of the tangential sum on a grid of at least
/// `grid` nodes and refines it by bisection to full double precision.
///
/// The node count is rounded up to a multiple of 2N and nodes sit at half
/// steps, so no node ever lands on a multiple of π/N.
pub fn sine_zero_angles(n: usize, a: f64, h: f64, grid: usize) -> Result<SineZeroScan> {
    check_n(n)?;
    check_positive("a", a)?;
    if !(h.is_finite() && h >= 0.0) {
        return Err(PolyError::Domain(format!("h must be nonnegative, got {h}")));
    }
    if grid < 4 * n {
        return Err(PolyError::Domain(format!(
            "grid of {grid} nodes is coarser than 4N = {}",
            4 * n
        )));
    }
    let g = grid.div_ceil(2 * n) * 2 * n;
    let step = TAU / g as f64;
    let nodes: Vec<f64> = (0..g).map(|i| (i as f64 + 0.5) * step).collect();
    let evaluator = TangentialEvaluator::new(n, a, h);
    let values: Vec<f64> = nodes.iter().map(|&t| evaluator.eval(t)).collect();

    let mut zeros = Vec::new();
    let mut excluded = Vec::new();
    for i in 0..g {
        let j = (i + 1) % g;
        let lo = nodes[i];
        let hi = if j == 0 { nodes[0] + TAU } else { nodes[j] };
        if values[i] * values[j] >= 0.0 {
            continue;
        }
        let root = bisect(|t| evaluator.eval(t), lo, hi, 0.0);
        let root = root.rem_euclid(TAU);
        let root = if TAU - root < 1e-13 { 0.0 } else { root };
        let (_, min_d) = tangential_sum(n, a, h, root);
        if min_d < POLE_DISTANCE * POLE_DISTANCE {
            excluded.push(root);
        } else {
            zeros.push(root);
        }
    }
    zeros.sort_by(f64::total_cmp);
    excluded.sort_by(f64::total_cmp);
    Ok(SineZeroScan {
        n,
        a,
        h,
        grid: g,
        zeros,
        excluded,
    })
}

/// The multiples `jπ/N` in `[0, 2π)` that are not collisions.
pub fn expected_zero_angles(n: usize, a: f64, h: f64) -> Vec<f64> {
    let coplanar_equal = a == 1.0 && h == 0.0;
    (0..2 * n)
        .filter(|j| !(coplanar_equal && j % 2 == 0))
        .map(|j| PI * j as f64 / n as f64)
        .collect()
}

/// Difference of inverse-cube sums between the staggered and the aligned ring
/// at squared vertical offset `x`:
///
/// ```text
/// Σ_j [1 + a² − 2a cos((2j−1)π/N) + x]^{−3/2} − Σ_j [1 + a² − 2a cos(2jπ/N) + x]^{−3/2}
/// ```
///
/// Negative everywhere except the singular point `a = 1, x = 0`.
pub fn height_gap(a: f64, x: f64, n: usize) -> Result<f64> {
    check_n(n)?;
    check_positive("a", a)?;
    if !(x.is_finite() && x >= 0.0) {
        return Err(PolyError::Domain(format!("x must be nonnegative, got {x}")));
    }
    if a == 1.0 && x == 0.0 {
        return Err(PolyError::Singularity);
    }
    let s = 1.0 + a * a + x;
    let t = 2.0 * a / s;
    Ok(s.powf(-1.5) * shell_difference(1.5, t, n))
}

/// Literal finite-sum form of [`height_gap`].
pub fn height_gap_direct(a: f64, x: f64, n: usize) -> f64 {
    let side = |offset: usize| {
        pairwise_sum_by(n, |j| {
            let psi = PI * ((2 * (j + 1) + offset) % (2 * n)) as f64 / n as f64;
            let half = (psi / 2.0).sin();
            let d = (1.0 - a) * (1.0 - a) + 4.0 * a * half * half + x;
            d.powf(-1.5)
        })
    };
    side(2 * n - 1) - side(0)
}

/// Difference of the upper-layer radial sums between the odd and even
/// vertices of a doubled ring at radius ratio `x`:
///
/// ```text
/// Σ_j (1 − x⁻¹ cos((2j−1)π/N)) / [1 + x² − 2x cos((2j−1)π/N)]^{3/2}
///   − Σ_j (1 − x⁻¹ cos(2jπ/N)) / [1 + x² − 2x cos(2jπ/N)]^{3/2}
/// ```
///
/// Positive on (0, 1), negative on (1, ∞). Evaluated as
/// `[(x² − 1) F₃(x) + F₁(x)] / (2x²)` where `F_α` is the half-step ring
/// difference of `D^{−α/2}`, which never cancels catastrophically.
pub fn radial_gap(x: f64, n: usize) -> Result<f64> {
    check_n(n)?;
    check_positive("x", x)?;
    if x == 1.0 {
        return Err(PolyError::Domain("radial gap is singular at x = 1".into()));
    }
    let s = 1.0 + x * x;
    let t = 2.0 * x / s;
    let cubic = s.powf(-1.5) * shell_difference(1.5, t, n);
    let linear = s.powf(-0.5) * shell_difference(0.5, t, n);
    Ok(((x * x - 1.0) * cubic + linear) / (2.0 * x * x))
}

/// Literal finite-sum form of [`radial_gap`].
pub fn radial_gap_direct(x: f64, n: usize) -> f64 {
    let side = |offset: usize| {
        pairwise_sum_by(n, |j| {
            let psi = PI * ((2 * (j + 1) + offset) % (2 * n)) as f64 / n as f64;
            let half = (psi / 2.0).sin();
            let d = (1.0 - x) * (1.0 - x) + 4.0 * x * half * half;
            (1.0 - psi.cos() / x) / (d * d.sqrt())
        })
    };
    side(2 * n - 1) - side(0)
}

/// `Σ_odd D^{−1/2} − Σ_even D^{−1/2}` at radius ratio x, whose derivative is
/// `−x ·` [`radial_gap`]. Its Taylor coefficients are [`crate::series::SeriesCoeffs::b`].
pub fn ring_potential_gap(x: f64, n: usize) -> Result<f64> {
    check_n(n)?;
    check_positive("x", x)?;
    if x == 1.0 {
        return Err(PolyError::Domain("ring potential gap is singular at x = 1".into()));
    }
    let s = 1.0 + x * x;
    Ok(s.powf(-0.5) * shell_difference(0.5, 2.0 * x / s, n))
}

/// Literal finite-sum form of [`ring_potential_gap`].
pub fn ring_potential_gap_direct(x: f64, n: usize) -> f64 {
    let s = 1.0 + x * x;
    s.powf(-0.5) * shell_difference_direct(0.5, 2.0 * x / s, n)
}

/// `(Σ_j w_j B_j^x)^{1/x}` for positive weights and bases, in log space.
pub fn power_mean(weights: &[f64], bases: &[f64], x: f64) -> f64 {
    assert_eq!(weights.len(), bases.len());
    let logs: Vec<f64> = weights
        .iter()
        .zip(bases)
        .map(|(w, b)| w.ln() + x * b.ln())
        .collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let rest: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
    ((top + pairwise_sum(&rest).ln()) / x).exp()
}

/// Leading large-x behaviour of `d/dx` [`power_mean`]: `−B₁ ln w₁ / x²`,
/// where `B₁` is the largest base and `w₁` its weight.
pub fn power_mean_slope_leading(weights: &[f64], bases: &[f64], x: f64) -> f64 {
    let (w1, b1) = weights
        .iter()
        .zip(bases)
        .max_by(|p, q| p.1.total_cmp(q.1))
        .map(|(w, b)| (*w, *b))
        .expect("non-empty");
    -b1 * w1.ln() / (x * x)
}

/// Difference of power means splitting the sine sum into its positive and
/// negative parts, together with its pointwise limit as α → ∞.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerMeanGap {
    pub value: f64,
    /// `1/(1 − t cos θ) − 1/(1 − t cos(2π/N − θ))`.
    pub limit: f64,
}

/// For `θ ∈ (0, π/N)` and `t ∈ (0, 2a/(1 + a²)]`,
///
/// ```text
/// {Σ_{0≤j≤⌊(N−1)/2⌋} sin(θ_j+θ)/(1 − t cos(θ_j+θ))^α}^{1/α}
///   − {Σ_{1≤j≤⌊N/2⌋} sin(θ_j−θ)/(1 − t cos(θ_j−θ))^α}^{1/α},
/// ```
///
/// which has the sign of `Σ_j sin(θ_j+θ)/(1 − t cos(θ_j+θ))^α`.
pub fn power_mean_gap(a: f64, theta: f64, n: usize, t: f64, alpha: f64) -> Result<PowerMeanGap> {
    check_n(n)?;
    check_positive("a", a)?;
    check_positive("alpha", alpha)?;
    if !(theta > 0.0 && theta < PI / n as f64) {
        return Err(PolyError::Domain(format!("theta = {theta} outside (0, pi/N)")));
    }
    let t_max = 2.0 * a / (1.0 + a * a);
    if !(t > 0.0 && t <= t_max * (1.0 + 1e-15)) {
        return Err(PolyError::Domain(format!("t = {t} outside (0, {t_max}]")));
    }
    let side = |angles: Vec<f64>| {
        let weights: Vec<f64> = angles.iter().map(|p| p.sin()).collect();
        let bases: Vec<f64> = angles.iter().map(|p| 1.0 / (1.0 - t * p.cos())).collect();
        power_mean(&weights, &bases, alpha)
    };
    let step = TAU / n as f64;
    let positive: Vec<f64> = (0..=(n - 1) / 2).map(|j| j as f64 * step + theta).collect();
    let negative: Vec<f64> = (1..=n / 2).map(|j| j as f64 * step - theta).collect();
    let value = side(positive) - side(negative);
    let limit = 1.0 / (1.0 - t * theta.cos()) - 1.0 / (1.0 - t * (step - theta).cos());
    Ok(PowerMeanGap { value, limit })
}

/// A grid point where a sign statement failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub point: BTreeMap<String, f64>,
    pub value: f64,
    pub note: String,
}

/// Outcome of one verification sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub lemma: String,
    pub statement: String,
    pub grid: BTreeMap<String, GridSpec>,
    pub evaluations: usize,
    /// Smallest and largest observed value of the checked quantity, after
    /// multiplying by its expected sign where one is expected.
    pub min: f64,
    pub max: f64,
    pub violations: Vec<Violation>,
    /// False for sweeps that are recorded but not required to pass.
    pub asserted: bool,
}

impl LemmaReport {
    fn new(lemma: &str, statement: &str, asserted: bool) -> Self {
        Self {
            lemma: lemma.into(),
            statement: statement.into(),
            grid: BTreeMap::new(),
            evaluations: 0,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
            violations: Vec::new(),
            asserted,
        }
    }

    fn axis(mut self, name: &str, spec: GridSpec) -> Self {
        self.grid.insert(name.into(), spec);
        self
    }

    fn observe(&mut self, value: f64) {
        self.evaluations += 1;
        self.min = self.min.min(value);
        self.max = self.max.max(value);
    }

    fn absorb(&mut self, part: Partial) {
        self.evaluations += part.evaluations;
        self.min = self.min.min(part.min);
        self.max = self.max.max(part.max);
        self.violations.extend(part.violations);
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Default)]
struct Partial {
    evaluations: usize,
    min: f64,
    max: f64,
    violations: Vec<Violation>,
}

impl Partial {
    fn new() -> Self {
        Self {
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
            ..Default::default()
        }
    }

    fn observe(&mut self, value: f64) {
        self.evaluations += 1;
        self.min = self.min.min(value);
        self.max = self.max.max(value);
    }

    fn violate(&mut self, point: &[(&str, f64)], value: f64, note: impl Into<String>) {
        self.violations.push(Violation {
            point: point.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            value,
            note: note.into(),
        });
    }
}

fn merge(report: &mut LemmaReport, parts: Vec<Partial>) {
    for p in parts {
        report.absorb(p);
    }
}

/// Sign split of [`radial_gap`] at x = 1.
pub fn radial_gap_suite(ns: &[usize], x_grid: &GridSpec) -> LemmaReport {
    let xs = x_grid.values();
    let mut report = LemmaReport::new(
        "radial-gap",
        "radial_gap(x) > 0 on (0,1) and < 0 on (1,inf)",
        true,
    )
    .axis("N", GridSpec::integers(ns.iter().copied()))
    .axis("x", x_grid.clone());
    let parts = ns
        .par_iter()
        .map(|&n| {
            let mut part = Partial::new();
            for &x in xs.iter().filter(|&&x| x != 1.0) {
                let sign = if x < 1.0 { 1.0 } else { -1.0 };
                match radial_gap(x, n) {
                    Ok(v) => {
                        part.observe(sign * v);
                        if !(sign * v > 0.0) {
                            part.violate(&[("N", n as f64), ("x", x)], v, "wrong sign");
                        }
                    }
                    Err(e) => part.violate(&[("N", n as f64), ("x", x)], f64::NAN, e.to_string()),
                }
            }
            part
        })
        .collect();
    merge(&mut report, parts);
    report
}

/// Negativity of [`height_gap`] away from `a = 1, x = 0`.
pub fn height_gap_suite(ns: &[usize], a_grid: &GridSpec, x_grid: &GridSpec) -> LemmaReport {
    let avals = a_grid.values();
    let xvals = x_grid.values();
    let mut report = LemmaReport::new(
        "height-gap",
        "height_gap(a, x) < 0 except at a = 1, x = 0",
        true,
    )
    .axis("N", GridSpec::integers(ns.iter().copied()))
    .axis("a", a_grid.clone())
    .axis("x", x_grid.clone());
    let parts = ns
        .par_iter()
        .map(|&n| {
            let mut part = Partial::new();
            for &a in &avals {
                for &x in &xvals {
                    if a == 1.0 && x == 0.0 {
                        continue;
                    }
                    match height_gap(a, x, n) {
                        Ok(v) => {
                            part.observe(-v);
                            if !(v < 0.0) {
                                part.violate(&[("N", n as f64), ("a", a), ("x", x)], v, "not negative");
                            }
                        }
                        Err(e) => part.violate(
                            &[("N", n as f64), ("a", a), ("x", x)],
                            f64::NAN,
                            e.to_string(),
                        ),
                    }
                }
            }
            part
        })
        .collect();
    merge(&mut report, parts);
    report
}

/// Nonpositivity of `b_m` and agreement of the partial sum with a direct
/// evaluation of the ring potential gap at `x`.
///
/// The recorded min/max are those of `b_m`.
pub fn series_suite(ns: &[usize], order: usize, x: f64) -> LemmaReport {
    let mut report = LemmaReport::new(
        "series-coefficients",
        "b_m <= 0 for all m, infinitely many < 0; partial sums reproduce the ring potential gap",
        true,
    )
    .axis("N", GridSpec::integers(ns.iter().copied()))
    .axis("m", GridSpec::linear(0.0, order as f64, order + 1))
    .axis("x", GridSpec::list([x]));
    let parts = ns
        .par_iter()
        .map(|&n| {
            let mut part = Partial::new();
            let s = match series_coeffs(n, order, x) {
                Ok(s) => s,
                Err(e) => {
                    part.violate(&[("N", n as f64)], f64::NAN, e.to_string());
                    return part;
                }
            };
            for (m, &bm) in s.b.iter().enumerate() {
                part.observe(bm);
                if bm > 0.0 {
                    part.violate(&[("N", n as f64), ("m", m as f64)], bm, "positive coefficient");
                }
            }
            for w in s.windows_without_negative() {
                part.violate(
                    &[("N", n as f64), ("window_start", w as f64)],
                    0.0,
                    "no negative coefficient in window",
                );
            }
            let partial = s.partial_sum(x);
            let direct = ring_potential_gap_direct(x, n);
            let direct_rounding = 4.0 * n as f64 * f64::EPSILON * (1.0 - 2.0 * x / (1.0 + x * x)).powf(-0.5);
            let allowed = s.tail_bound + direct_rounding;
            if !((partial - direct).abs() <= allowed) {
                part.violate(
                    &[("N", n as f64), ("x", x)],
                    partial - direct,
                    format!("partial sum misses direct value by more than {allowed:e}"),
                );
            }
            part
        })
        .collect();
    merge(&mut report, parts);
    report
}

/// Positivity of [`twisted_sine_sum`] for twist angles inside `(0, π/N)`.
///
/// `theta_fractions` are fractions of π/N.
pub fn sine_sum_suite(
    ns: &[usize],
    a_grid: &GridSpec,
    x_grid: &GridSpec,
    theta_fractions: &[f64],
    alpha: f64,
    asserted: bool,
) -> LemmaReport {
    let avals = a_grid.values();
    let xvals = x_grid.values();
    let mut report = LemmaReport::new(
        &format!("sine-sum-positivity(alpha={alpha})"),
        "twisted_sine_sum(a, theta, N, x, alpha) > 0 for theta in (0, pi/N)",
        asserted,
    )
    .axis("N", GridSpec::integers(ns.iter().copied()))
    .axis("a", a_grid.clone())
    .axis("x", x_grid.clone())
    .axis("theta/(pi/N)", GridSpec::list(theta_fractions.iter().copied()))
    .axis("alpha", GridSpec::list([alpha]));
    let parts = ns
        .par_iter()
        .map(|&n| {
            let mut part = Partial::new();
            for &a in &avals {
                for &x in &xvals {
                    for &f in theta_fractions {
                        let theta = f * PI / n as f64;
                        let point = [("N", n as f64), ("a", a), ("x", x), ("theta", theta)];
                        match twisted_sine_sum(a, theta, n, x, alpha) {
                            Ok(v) => {
                                // Normalise by the dominant term so that the
                                // recorded range is comparable across α.
                                part.observe(v.signum());
                                if !(v > 0.0) {
                                    part.violate(&point, v, "not positive");
                                }
                            }
                            Err(e) => part.violate(&point, f64::NAN, e.to_string()),
                        }
                    }
                }
            }
            part
        })
        .collect();
    merge(&mut report, parts);
    report
}

/// Zero set of the tangential sum against `{jπ/N}` minus collisions.
///
/// Records the largest distance from a found zero to its expected angle.
pub fn sine_zero_suite(ns: &[usize], a_vals: &[f64], h_vals: &[f64], grid_factor: usize) -> LemmaReport {
    let mut report = LemmaReport::new(
        "sine-zero-angles",
        "tangential sum vanishes exactly at theta = j*pi/N",
        true,
    )
    .axis("N", GridSpec::integers(ns.iter().copied()))
    .axis("a", GridSpec::list(a_vals.iter().copied()))
    .axis("h", GridSpec::list(h_vals.iter().copied()));
    let parts = ns
        .par_iter()
        .map(|&n| {
            let mut part = Partial::new();
            for &a in a_vals {
                for &h in h_vals {
                    let point = [("N", n as f64), ("a", a), ("h", h)];
                    let scan = match sine_zero_angles(n, a, h, grid_factor * n) {
                        Ok(s) => s,
                        Err(e) => {
                            part.violate(&point, f64::NAN, e.to_string());
                            continue;
                        }
                    };
                    let expected = expected_zero_angles(n, a, h);
                    if scan.zeros.len() != expected.len() {
                        part.violate(
                            &point,
                            scan.zeros.len() as f64,
                            format!("found {} zeros, expected {}", scan.zeros.len(), expected.len()),
                        );
                        continue;
                    }
                    for z in &scan.zeros {
                        let d = expected
                            .iter()
                            .map(|e| crate::polygon::angle_distance(*z, *e))
                            .fold(f64::INFINITY, f64::min);
                        part.observe(d);
                        if d > 1e-10 {
                            part.violate(&point, *z, format!("zero {d:e} away from j*pi/N"));
                        }
                    }
                }
            }
            part
        })
        .collect();
    merge(&mut report, parts);
    report
}

/// Random instances of `(Σ a_j A_j^n)^{1/n} → max A_j`: at `n = 2048` the
/// estimate is within 1 % of `A₁` when `A₁/A₂ ≥ 1.1`.
///
/// The recorded values are relative errors.
pub fn power_mean_limit_suite(seed: u64, draws: usize) -> LemmaReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = LemmaReport::new(
        "power-mean-limit",
        "(sum a_j A_j^n)^(1/n) -> A_1 as n -> inf",
        true,
    )
    .axis("n", GridSpec::list([2048.0]))
    .axis("draws", GridSpec::list([draws as f64]));
    for _ in 0..draws {
        let k = rng.gen_range(1..=6);
        let top = rng.gen_range(0.1..10.0);
        let mut bases = vec![top];
        for _ in 1..k {
            bases.push(rng.gen_range(0.0..top / 1.1));
        }
        let weights: Vec<f64> = (0..k).map(|_| rng.gen_range(0.01..100.0)).collect();
        let estimate = power_mean(&weights, &bases, 2048.0);
        let rel = (estimate - top).abs() / top;
        report.observe(rel);
        if rel > 0.01 {
            report.violations.push(Violation {
                point: BTreeMap::from([("A_1".into(), top), ("k".into(), k as f64)]),
                value: rel,
                note: "relative error above 1%".into(),
            });
        }
    }
    report
}

/// Random instances of the slope asymptotics of [`power_mean`] at x = 200,
/// with `A₁/A_j ≥ 1.1` and `|ln a₁| ≥ 0.2`. Recorded values are relative
/// errors of the central finite difference against `−A₁ ln a₁ / x²`.
pub fn power_mean_slope_suite(seed: u64, draws: usize) -> LemmaReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = 200.0;
    let mut report = LemmaReport::new(
        "power-mean-slope",
        "d/dx (sum a_j A_j^x)^(1/x) = -A_1 ln(a_1)/x^2 + o(1/x^2)",
        true,
    )
    .axis("x", GridSpec::list([x]))
    .axis("draws", GridSpec::list([draws as f64]));
    for _ in 0..draws {
        let k = rng.gen_range(1..=5);
        let top = rng.gen_range(0.5..5.0);
        let mut bases = vec![top];
        for _ in 1..k {
            bases.push(rng.gen_range(0.05..top / 1.1));
        }
        let mut w1: f64 = rng.gen_range(0.1..10.0);
        while w1.ln().abs() < 0.2 {
            w1 = rng.gen_range(0.1..10.0);
        }
        let mut weights = vec![w1];
        weights.extend((1..k).map(|_| rng.gen_range(0.1..10.0)));
        let step = 1e-2;
        let fd = (power_mean(&weights, &bases, x + step) - power_mean(&weights, &bases, x - step))
            / (2.0 * step);
        let lead = power_mean_slope_leading(&weights, &bases, x);
        let rel = (fd - lead).abs() / lead.abs();
        report.observe(rel);
        if rel > 0.1 {
            report.violations.push(Violation {
                point: BTreeMap::from([("A_1".into(), top), ("a_1".into(), w1)]),
                value: rel,
                note: "relative error above 10%".into(),
            });
        }
    }
    report
}

/// Checks on [`power_mean_gap`]: sign agreement with [`twisted_sine_sum`] and
/// positivity of the α → ∞ limit (asserted), and monotone growth in α for
/// α ≥ 50 (reported in a second, non-asserted report).
pub fn power_mean_gap_suite(
    ns: &[usize],
    a_vals: &[f64],
    theta_fractions: &[f64],
    t_fractions: &[f64],
    alphas: &[f64],
) -> (LemmaReport, LemmaReport) {
    let axes = |r: LemmaReport| {
        r.axis("N", GridSpec::integers(ns.iter().copied()))
            .axis("a", GridSpec::list(a_vals.iter().copied()))
            .axis("theta/(pi/N)", GridSpec::list(theta_fractions.iter().copied()))
            .axis("t/t_max", GridSpec::list(t_fractions.iter().copied()))
            .axis("alpha", GridSpec::list(alphas.iter().copied()))
    };
    let mut sign_report = axes(LemmaReport::new(
        "power-mean-gap",
        "power_mean_gap has the sign of the sine sum; its alpha->inf limit is positive",
        true,
    ));
    let mut monotone_report = axes(LemmaReport::new(
        "power-mean-gap-monotone",
        "power_mean_gap increases in alpha for alpha >= 50",
        false,
    ));
    let parts: Vec<(Partial, Partial)> = ns
        .par_iter()
        .map(|&n| {
            let mut sign = Partial::new();
            let mut mono = Partial::new();
            for &a in a_vals {
                let t_max = 2.0 * a / (1.0 + a * a);
                for &tf in theta_fractions {
                    let theta = tf * PI / n as f64;
                    for &frac in t_fractions {
                        let t = frac * t_max;
                        let x = (2.0 * a / t - 1.0 - a * a).max(0.0);
                        let mut previous: Option<(f64, f64)> = None;
                        for &alpha in alphas {
                            let point = [("N", n as f64), ("a", a), ("theta", theta), ("t", t), ("alpha", alpha)];
                            let (Ok(gap), Ok(g)) = (
                                power_mean_gap(a, theta, n, t, alpha),
                                twisted_sine_sum(a, theta, n, x, alpha),
                            ) else {
                                sign.violate(&point, f64::NAN, "domain error");
                                continue;
                            };
                            sign.observe(gap.limit);
                            if !(gap.limit > 0.0) {
                                sign.violate(&point, gap.limit, "limit not positive");
                            }
                            if gap.value.signum() != g.signum() {
                                sign.violate(&point, gap.value, format!("sign differs from sine sum {g:e}"));
                            }
                            if alpha >= 50.0 {
                                if let Some((prev_alpha, prev)) = previous {
                                    let inc = gap.value - prev;
                                    mono.observe(inc);
                                    if !(inc > 0.0) {
                                        mono.violate(
                                            &point,
                                            inc,
                                            format!("not increasing from alpha = {prev_alpha}"),
                                        );
                                    }
                                }
                                previous = Some((alpha, gap.value));
                            }
                        }
                    }
                }
            }
            (sign, mono)
        })
        .collect();
    for (s, m) in parts {
        sign_report.absorb(s);
        monotone_report.absorb(m);
    }
    (sign_report, monotone_report)
}

/// Named sweeps with their default grids.
pub const SUITE_NAMES: [&str; 8] = [
    "power-mean-limit",
    "power-mean-slope",
    "sine-sum-positivity",
    "sine-zero-angles",
    "power-mean-gap",
    "height-gap",
    "radial-gap",
    "series-coefficients",
];

/// Runs a named sweep (or `"all"`) with default grids.
pub fn run_suite(name: &str) -> Result<Vec<LemmaReport>> {
    let small: Vec<usize> = (2..=12).collect();
    let reports = match name {
        "all" => {
            let mut all = Vec::new();
            for n in SUITE_NAMES {
                all.extend(run_suite(n)?);
            }
            all
        }
        "power-mean-limit" => vec![power_mean_limit_suite(0x5eed, 1000)],
        "power-mean-slope" => vec![power_mean_slope_suite(0x5eed, 1000)],
        "sine-sum-positivity" => {
            let ns: Vec<usize> = (2..=8).collect();
            let a = GridSpec::log(0.25, 4.0, 21);
            let x = GridSpec::linear(0.0, 4.0, 17);
            let thetas = [0.05, 0.2, 0.35, 0.5, 0.65, 0.8, 0.95];
            [1.5, 3.0, 10.0, 50.0]
                .iter()
                .map(|&alpha| sine_sum_suite(&ns, &a, &x, &thetas, alpha, alpha == 1.5))
                .collect()
        }
        "sine-zero-angles" => vec![sine_zero_suite(
            &(2..=10).collect::<Vec<_>>(),
            &[0.5, 1.0, 2.0],
            &[0.0, 0.5, 2.0],
            8,
        )],
        "power-mean-gap" => {
            let (sign, mono) = power_mean_gap_suite(
                &(2..=8).collect::<Vec<_>>(),
                &[0.5, 1.0, 2.0],
                &[0.1, 0.3, 0.5, 0.7, 0.9],
                &[0.25, 0.5, 0.75, 1.0],
                &[1.5, 3.0, 10.0, 50.0, 100.0, 200.0],
            );
            vec![sign, mono]
        }
        "height-gap" => vec![height_gap_suite(
            &small,
            &GridSpec::log(0.05, 20.0, 200),
            &GridSpec::linear(0.0, 100.0, 50),
        )],
        "radial-gap" => vec![radial_gap_suite(&small, &radial_gap_default_grid())],
        "series-coefficients" => vec![series_suite(&small, 200, 0.5)],
        other => {
            return Err(PolyError::InvalidParams(format!(
                "unknown lemma suite '{other}'; expected one of {SUITE_NAMES:?} or 'all'"
            )))
        }
    };
    Ok(reports)
}

/// 200 log-spaced points on [10⁻², 10²]; x = 1 is not a node.
pub fn radial_gap_default_grid() -> GridSpec {
    GridSpec::log(1e-2, 1e2, 200)
}
