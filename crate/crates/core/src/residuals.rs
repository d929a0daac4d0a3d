//! The specialised balance conditions for two twisted regular polygons.
//!
//! Projecting the central-configuration equation for one lower vertex onto its
//! radial, tangential and vertical directions gives (with `m = 1`, μ = λ/m and
//! `D = 1 + a² − 2a cos ψ + h²`)
//!
//! ```text
//! A + b Σ_j (1 − a cos ψ_j) / D_j^{3/2} = μ
//!     Σ_j sin ψ_j / D_j^{3/2}           = 0
//!   h Σ_j 1 / D_j^{3/2}                 = μ L h / (N + bL)
//! ```
//!
//! with `ψ_j = 2πj/L − 2πk/N + θ`, and for an upper vertex
//!
//! ```text
//! b B / a³ + Σ_j (1 − a⁻¹ cos ψ'_j) / D_j^{3/2} = μ
//!            Σ_j sin ψ'_j / D_j^{3/2}           = 0
//!          h Σ_j 1 / D_j^{3/2}                  = μ N h / (N + bL)
//! ```
//!
//! with `ψ'_j = 2πj/N − 2πk/L − θ`. `A` and `B` are the self-interaction
//! constants of the unit N-gon and L-gon.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{PolyError, Result};
use crate::nbody::COLLISION_TOLERANCE;
use crate::polygon::TwistedPairParams;
use crate::sum::{pairwise_sum, pairwise_sum_by};

/// Half-width of the excluded neighbourhood of `a = 1` in [`planar_mass_ratio`].
pub const UNIT_RATIO_GUARD: f64 = 1e-9;

/// `A(N) = Σ_{j=1}^{N−1} (1 − ρ_j) / |1 − ρ_j|³`, summed as complex numbers.
///
/// `1 − ρ_j` is formed as `2 sin²(φ/2) − i sin φ` so that large N does not
/// lose digits to `1 − cos φ`.
pub fn constant_a(n: usize) -> f64 {
    assert!(n >= 2, "constant_a needs N >= 2");
    let terms: Vec<Complex64> = (1..n)
        .map(|j| {
            let phi = TAU * j as f64 / n as f64;
            let half = (phi / 2.0).sin();
            let z = Complex64::new(2.0 * half * half, -phi.sin());
            let r = z.norm();
            z / (r * r * r)
        })
        .collect();
    let re: Vec<f64> = terms.iter().map(|z| z.re).collect();
    let im: Vec<f64> = terms.iter().map(|z| z.im).collect();
    debug_assert!(pairwise_sum(&im).abs() <= 1e-9 * (n as f64).powi(2));
    pairwise_sum(&re)
}

/// Self-interaction constants of the two layers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolygonConstants {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
}

impl PolygonConstants {
    pub fn new(n: usize, l: usize) -> Self {
        Self {
            a: constant_a(n),
            b: constant_a(l),
        }
    }
}

/// The two twist angles compatible with equal polygons: 0 and π/N.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThetaChoice {
    /// θ = 0: upper vertices directly above lower ones.
    Aligned,
    /// θ = π/N: upper vertices above the gaps.
    Staggered,
}

impl ThetaChoice {
    pub const ALL: [ThetaChoice; 2] = [ThetaChoice::Aligned, ThetaChoice::Staggered];

    pub fn angle(self, n: usize) -> f64 {
        match self {
            ThetaChoice::Aligned => 0.0,
            ThetaChoice::Staggered => PI / n as f64,
        }
    }

    /// Classifies a twist angle, within the crate angle tolerance.
    pub fn from_angle(n: usize, theta: f64) -> Option<Self> {
        use crate::polygon::{angle_distance, ANGLE_TOLERANCE};
        ThetaChoice::ALL
            .into_iter()
            .find(|c| angle_distance(theta, c.angle(n)) <= ANGLE_TOLERANCE)
    }

    fn half_steps(self) -> usize {
        match self {
            ThetaChoice::Aligned => 0,
            ThetaChoice::Staggered => 1,
        }
    }
}

/// Precomputed trigonometry of a set of relative angles ψ_j.
#[derive(Debug, Clone)]
pub(crate) struct Ring {
    cos: Vec<f64>,
    sin: Vec<f64>,
    /// sin²(ψ/2), so that `1 − cos ψ = 2·half_sin_sq` without cancellation.
    half_sin_sq: Vec<f64>,
}

/// Sums over a [`Ring`] at fixed `(a, h)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct RingSums {
    /// Σ (1 − a cos ψ) / D^{3/2}
    pub lower_radial: f64,
    /// Σ (1 − a⁻¹ cos ψ) / D^{3/2}
    pub upper_radial: f64,
    /// Σ sin ψ / D^{3/2}
    pub sine: f64,
    /// Σ 1 / D^{3/2}
    pub inverse: f64,
    /// Σ cos ψ / D^{3/2}
    pub cosine: f64,
    /// min_j D_j
    pub min_distance_sq: f64,
}

impl Ring {
    pub(crate) fn from_angles<I: IntoIterator<Item = f64>>(angles: I) -> Self {
        let mut ring = Ring {
            cos: Vec::new(),
            sin: Vec::new(),
            half_sin_sq: Vec::new(),
        };
        for psi in angles {
            let half = (psi / 2.0).sin();
            ring.cos.push(psi.cos());
            ring.sin.push(psi.sin());
            ring.half_sin_sq.push(half * half);
        }
        ring
    }

    /// Angles `(2j + s)π/N`, `j = 1..=N`, reduced exactly in integers first.
    pub(crate) fn half_steps(n: usize, s: usize) -> Self {
        Self::from_angles((1..=n).map(|j| PI * ((2 * j + s) % (2 * n)) as f64 / n as f64))
    }

    pub(crate) fn equal(n: usize, choice: ThetaChoice) -> Self {
        Self::half_steps(n, choice.half_steps())
    }

    pub(crate) fn len(&self) -> usize {
        self.cos.len()
    }

    pub(crate) fn cosines(&self) -> &[f64] {
        &self.cos
    }

    pub(crate) fn sums(&self, a: f64, h: f64) -> RingSums {
        let n = self.len();
        let base = (1.0 - a) * (1.0 - a) + h * h;
        let d: Vec<f64> = self
            .half_sin_sq
            .iter()
            .map(|s| base + 4.0 * a * s)
            .collect();
        let w: Vec<f64> = d.iter().map(|d| 1.0 / (d * d.sqrt())).collect();
        RingSums {
            lower_radial: pairwise_sum_by(n, |j| {
                ((1.0 - a) + 2.0 * a * self.half_sin_sq[j]) * w[j]
            }),
            upper_radial: pairwise_sum_by(n, |j| {
                ((a - 1.0) + 2.0 * self.half_sin_sq[j]) / a * w[j]
            }),
            sine: pairwise_sum_by(n, |j| self.sin[j] * w[j]),
            inverse: pairwise_sum(&w),
            cosine: pairwise_sum_by(n, |j| self.cos[j] * w[j]),
            min_distance_sq: d.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }
}

/// Values of the balance conditions with μ eliminated.
///
/// All entries except `mu_lower` vanish exactly when the configuration is
/// central.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualVector {
    /// μ from the radial condition of the first lower vertex.
    pub mu_lower: f64,
    /// Radial condition of the first upper vertex minus μ.
    pub radial_upper_gap: f64,
    pub tangential_lower: Vec<f64>,
    pub tangential_upper: Vec<f64>,
    pub vertical_lower_gap: f64,
    pub vertical_upper_gap: f64,
    /// Largest deviation of any other vertex's radial condition from that of
    /// the first vertex of its layer.
    pub radial_spread: f64,
    /// Same for the vertical conditions.
    pub vertical_spread: f64,
}

impl ResidualVector {
    /// Largest absolute entry, μ excluded.
    pub fn max_abs(&self) -> f64 {
        self.tangential_lower
            .iter()
            .chain(&self.tangential_upper)
            .chain([
                &self.radial_upper_gap,
                &self.vertical_lower_gap,
                &self.vertical_upper_gap,
                &self.radial_spread,
                &self.vertical_spread,
            ])
            .fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn max_tangential(&self) -> f64 {
        self.tangential_lower
            .iter()
            .chain(&self.tangential_upper)
            .fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn vanishes(&self, tolerance: f64) -> bool {
        self.max_abs() <= tolerance
    }
}

fn collision_check(sums: &RingSums, lower: usize, upper: usize) -> Result<()> {
    let tol = COLLISION_TOLERANCE;
    if sums.min_distance_sq <= tol * tol {
        return Err(PolyError::Collision {
            i: lower,
            j: upper,
            distance: sums.min_distance_sq.max(0.0).sqrt(),
            tolerance: tol,
        });
    }
    Ok(())
}

/// Evaluates the six balance conditions for every vertex of both layers.
pub fn residual_vector(params: &TwistedPairParams) -> Result<ResidualVector> {
    let n = params.n;
    let l = params.l;
    let (a, b, h, theta) = (params.a, params.b, params.h, params.theta);
    let consts = PolygonConstants::new(n, l);
    let nl = n * l;
    let frac = |num: usize| TAU * (num % nl) as f64 / nl as f64;

    // Lower vertex k sees the upper ring at 2π(jN − kL)/(NL) + θ.
    let mut lower = Vec::with_capacity(n);
    for k in 1..=n {
        let ring = Ring::from_angles((1..=l).map(|j| frac(j * n + nl - (k * l) % nl) + theta));
        let sums = ring.sums(a, h);
        collision_check(&sums, k - 1, n)?;
        lower.push(sums);
    }
    // Upper vertex k sees the lower ring at 2π(jL − kN)/(NL) − θ.
    let mut upper = Vec::with_capacity(l);
    for k in 1..=l {
        let ring = Ring::from_angles((1..=n).map(|j| frac(j * l + nl - (k * n) % nl) - theta));
        let sums = ring.sums(a, h);
        collision_check(&sums, 0, n + k - 1)?;
        upper.push(sums);
    }

    let upper_self = b * consts.b / (a * a * a);
    let lower_radial: Vec<f64> = lower.iter().map(|s| consts.a + b * s.lower_radial).collect();
    let upper_radial: Vec<f64> = upper.iter().map(|s| upper_self + s.upper_radial).collect();
    let mu = lower_radial[0];

    let total = n as f64 + b * l as f64;
    let (lower_vertical, upper_vertical): (Vec<f64>, Vec<f64>) = if h == 0.0 {
        (vec![0.0; n], vec![0.0; l])
    } else {
        (
            lower
                .iter()
                .map(|s| h * s.inverse - mu * l as f64 * h / total)
                .collect(),
            upper
                .iter()
                .map(|s| h * s.inverse - mu * n as f64 * h / total)
                .collect(),
        )
    };

    let spread = |v: &[f64]| v.iter().fold(0.0_f64, |m, x| m.max((x - v[0]).abs()));
    let radial_spread = spread(&lower_radial).max(spread(&upper_radial));
    let vertical_spread = spread(&lower_vertical).max(spread(&upper_vertical));
    if n == l {
        // Equal polygons: every vertex of a layer sees the same ring.
        debug_assert!(
            radial_spread <= 1e-12 * mu.abs().max(1.0) * (n as f64),
            "radial spread {radial_spread:e} for N = L = {n}"
        );
    }

    Ok(ResidualVector {
        mu_lower: mu,
        radial_upper_gap: upper_radial[0] - mu,
        tangential_lower: lower.iter().map(|s| s.sine).collect(),
        tangential_upper: upper.iter().map(|s| s.sine).collect(),
        vertical_lower_gap: lower_vertical[0],
        vertical_upper_gap: upper_vertical[0],
        radial_spread,
        vertical_spread,
    })
}

/// Reduced equations for two equal polygons (N = L) with θ ∈ {0, π/N}.
///
/// Both layers see the same ring of relative angles, so each family of
/// conditions collapses to a single equation.
#[derive(Debug, Clone)]
pub struct EqualRingSystem {
    n: usize,
    choice: ThetaChoice,
    a_const: f64,
    ring: Ring,
}

impl EqualRingSystem {
    pub fn new(n: usize, choice: ThetaChoice) -> Self {
        assert!(n >= 2, "polygons need at least two vertices");
        Self {
            n,
            choice,
            a_const: constant_a(n),
            ring: Ring::equal(n, choice),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn choice(&self) -> ThetaChoice {
        self.choice
    }

    pub fn constant_a(&self) -> f64 {
        self.a_const
    }

    /// Returns `(coefficient of b, right side)` of the planar relation
    /// `b [S₁ − A/a³] = S₂ − A`.
    pub fn planar_coefficients(&self, a: f64) -> (f64, f64) {
        let s = self.ring.sums(a, 0.0);
        (
            s.lower_radial - self.a_const / (a * a * a),
            s.upper_radial - self.a_const,
        )
    }

    /// `b [S₁ − A/a³] − [S₂ − A]`: zero exactly on planar central configurations.
    pub fn planar_balance(&self, a: f64, b: f64) -> f64 {
        let (coef, rhs) = self.planar_coefficients(a);
        b * coef - rhs
    }

    /// `a³ ·` [`Self::planar_balance`], bounded as a → 0.
    pub(crate) fn planar_balance_scaled(&self, a: f64, b: f64) -> f64 {
        let s = self.ring.sums(a, 0.0);
        let a3 = a * a * a;
        b * (a3 * s.lower_radial - self.a_const) - a3 * (s.upper_radial - self.a_const)
    }

    /// The two spatial equations, each as (left side − right side):
    ///
    /// ```text
    /// b a C − (A − T)
    /// b a (A/a³ − T) − C
    /// ```
    ///
    /// with `C = Σ cos ψ / D^{3/2}` and `T = Σ 1 / D^{3/2}`.
    pub fn spatial_residuals(&self, a: f64, b: f64, h: f64) -> (f64, f64) {
        let s = self.ring.sums(a, h);
        (
            b * a * s.cosine - (self.a_const - s.inverse),
            b * a * (self.a_const / (a * a * a) - s.inverse) - s.cosine,
        )
    }

    /// `C + T − A` at `a = b = 1`, where both spatial equations coincide.
    pub fn equal_size_height_function(&self, h: f64) -> f64 {
        let s = self.ring.sums(1.0, h);
        s.cosine + s.inverse - self.a_const
    }
}

/// Mass ratio `b` making the coplanar pair `(N, N, a, b, 0, θ)` central.
///
/// The result may be negative; physical configurations need `b > 0`.
pub fn planar_mass_ratio(n: usize, a: f64, choice: ThetaChoice) -> Result<f64> {
    if n < 2 {
        return Err(PolyError::InvalidParams(format!("N = {n} < 2")));
    }
    if !(a.is_finite() && a > 0.0) {
        return Err(PolyError::InvalidParams(format!("a must be positive, got {a}")));
    }
    if (a - 1.0).abs() <= UNIT_RATIO_GUARD {
        return Err(PolyError::InvalidParams(
            "planar mass ratio is undefined at a = 1".into(),
        ));
    }
    let system = EqualRingSystem::new(n, choice);
    let (coef, rhs) = system.planar_coefficients(a);
    let scale = system.constant_a() / (a * a * a) + system.constant_a();
    if coef.abs() <= 1e-14 * scale || !coef.is_finite() {
        return Err(PolyError::Degenerate { a, coefficient: coef });
    }
    Ok(rhs / coef)
}

/// Residuals of the two spatial equations for `(N, N, a, b, h, θ)`, h > 0.
pub fn spatial_system(n: usize, choice: ThetaChoice, a: f64, b: f64, h: f64) -> Result<(f64, f64)> {
    if n < 2 {
        return Err(PolyError::InvalidParams(format!("N = {n} < 2")));
    }
    if !(a.is_finite() && a > 0.0 && b.is_finite() && b > 0.0) {
        return Err(PolyError::InvalidParams(format!(
            "a and b must be positive, got a = {a}, b = {b}"
        )));
    }
    if !(h.is_finite() && h > 0.0) {
        return Err(PolyError::InvalidParams(format!("h must be positive, got {h}")));
    }
    Ok(EqualRingSystem::new(n, choice).spatial_residuals(a, b, h))
}
