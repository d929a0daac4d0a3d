//! Which twist angles let every tangential condition vanish, and the
//! refutation of the doubled system `L = 2N`.
//!
//! A lower vertex sees the upper L-gon under the relative angles
//! `2πj/L − 2πk/N + θ`; its tangential sum vanishes only when that offset is a
//! multiple of π/L. The upper vertices give the mirror condition with π/N.
//! Both families are checked here in exact rational arithmetic.

use std::f64::consts::PI;

use num_integer::Integer;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{PolyError, Result};
use crate::grid::GridSpec;
use crate::lemmas::{height_gap, radial_gap};
use crate::nbody::COLLISION_TOLERANCE;
use crate::polygon::TwistedPairParams;
use crate::residuals::{constant_a, residual_vector, Ring};
use crate::roots::levenberg_marquardt;

/// An angle `(p/q)·π`, reduced into `[0, 2π)`. Serialises as `[p, q]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PiMultiple(Ratio<i64>);

impl PiMultiple {
    pub fn new(p: i64, q: i64) -> Result<Self> {
        if q == 0 {
            return Err(PolyError::InvalidParams("zero denominator".into()));
        }
        Ok(Self::from_ratio(Ratio::new(p, q)))
    }

    fn from_ratio(r: Ratio<i64>) -> Self {
        let two = Ratio::from_integer(2);
        let mut r = r % two;
        if r < Ratio::from_integer(0) {
            r += two;
        }
        Self(r)
    }

    pub fn numer(&self) -> i64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i64 {
        *self.0.denom()
    }

    pub fn ratio(&self) -> Ratio<i64> {
        self.0
    }

    pub fn radians(&self) -> f64 {
        PI * self.numer() as f64 / self.denom() as f64
    }
}

impl std::fmt::Display for PiMultiple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match (self.numer(), self.denom()) {
            (0, _) => write!(f, "0"),
            (p, 1) => write!(f, "{p}pi"),
            (p, q) => write!(f, "{p}/{q}pi"),
        }
    }
}

impl Serialize for PiMultiple {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.numer(), self.denom()].serialize(s)
    }
}

impl<'de> Deserialize<'de> for PiMultiple {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let [p, q] = <[i64; 2]>::deserialize(d)?;
        PiMultiple::new(p, q).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Equal,
    Double,
    Inadmissible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "L")]
    pub l: usize,
    /// `N | 2L` and `L | 2N`.
    pub divisibility_ok: bool,
    /// The odd parts of N and L coincide.
    pub odd_parts_equal: bool,
    pub verdict: Verdict,
    pub admissible_thetas: Vec<PiMultiple>,
}

/// Splits `x = 2^e · odd`.
pub fn two_adic(x: usize) -> (u32, usize) {
    let e = x.trailing_zeros();
    (e, x >> e)
}

fn is_integer(r: Ratio<i64>) -> bool {
    r.is_integer()
}

/// Decides admissibility of `(N, L)` from the two congruence families.
///
/// θ must satisfy, for every lower vertex k, `θ − 2πk/N ∈ (π/L)ℤ`, and for
/// every upper vertex k, `θ + 2πk/L ∈ (π/N)ℤ`. Candidates are `jπ/L`,
/// `j = 0..2L`, since the k = N case of the first family already forces that.
pub fn admissible(n: usize, l: usize) -> Result<AdmissibilityReport> {
    if n < 2 || n > l {
        return Err(PolyError::InvalidParams(format!(
            "need 2 <= N <= L, got N = {n}, L = {l}"
        )));
    }
    let (ni, li) = (n as i64, l as i64);
    let lower_ok = |theta: Ratio<i64>| {
        (1..=ni).all(|k| is_integer((theta - Ratio::new(2 * k, ni)) * li))
    };
    let upper_ok = |theta: Ratio<i64>| {
        (1..=li).all(|k| is_integer((theta + Ratio::new(2 * k, li)) * ni))
    };
    let mut thetas: Vec<PiMultiple> = (0..2 * li)
        .map(|j| Ratio::new(j, li))
        .filter(|&t| lower_ok(t) && upper_ok(t))
        .map(PiMultiple::from_ratio)
        .collect();
    thetas.sort();
    thetas.dedup();

    let divisibility_ok = (2 * l) % n == 0 && (2 * n) % l == 0;
    let (en, on) = two_adic(n);
    let (el, ol) = two_adic(l);
    let odd_parts_equal = on == ol;
    let verdict = if thetas.is_empty() {
        Verdict::Inadmissible
    } else if l == n {
        Verdict::Equal
    } else {
        debug_assert_eq!(l, 2 * n);
        Verdict::Double
    };
    debug_assert_eq!(
        verdict != Verdict::Inadmissible,
        divisibility_ok && odd_parts_equal && en <= el && el <= en + 1
    );
    Ok(AdmissibilityReport {
        n,
        l,
        divisibility_ok,
        odd_parts_equal,
        verdict,
        admissible_thetas: thetas,
    })
}

/// Smallest value over a θ grid of the largest tangential sum of
/// [`residual_vector`] at `(N, L, a, b = 1, h)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TangentialScan {
    pub grid: usize,
    pub theta: f64,
    pub min_max_tangential: f64,
}

/// Scans θ over `16·lcm(N, L)` half-step nodes of `[0, 2π)`, skipping
/// colliding nodes.
pub fn tangential_scan(n: usize, l: usize, a: f64, h: f64) -> Result<TangentialScan> {
    let grid = 16 * n.lcm(&l);
    let mut best = TangentialScan {
        grid,
        theta: f64::NAN,
        min_max_tangential: f64::INFINITY,
    };
    for i in 0..grid {
        let theta = 2.0 * PI * i as f64 / grid as f64;
        let params = TwistedPairParams::new(n, l, a, 1.0, h, theta)?;
        let v = match residual_vector(&params) {
            Ok(v) => v.max_tangential(),
            Err(PolyError::Collision { .. }) => continue,
            Err(e) => return Err(e),
        };
        if v < best.min_max_tangential {
            best.min_max_tangential = v;
            best.theta = theta;
        }
    }
    Ok(best)
}

/// Residuals of the six conditions for `(N, 2N, a, b, h, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoubledRingResidual {
    pub mu: f64,
    /// In order: lower radial (zero by construction, it defines μ), upper
    /// radial at odd and at even vertices, lower vertical, upper vertical at
    /// odd and at even vertices.
    pub residuals: [f64; 6],
}

impl DoubledRingResidual {
    pub fn max_abs(&self) -> f64 {
        self.residuals.iter().fold(0.0_f64, |m, r| m.max(r.abs()))
    }
}

struct DoubledRings {
    n: usize,
    a_const: f64,
    b_const: f64,
    full: Ring,
    odd: Ring,
    even: Ring,
}

impl DoubledRings {
    fn new(n: usize) -> Self {
        Self {
            n,
            a_const: constant_a(n),
            b_const: constant_a(2 * n),
            full: Ring::half_steps(2 * n, 0),
            odd: Ring::half_steps(n, 2 * n - 1),
            even: Ring::half_steps(n, 0),
        }
    }

    fn residual(&self, a: f64, b: f64, h: f64) -> Result<DoubledRingResidual> {
        let full = self.full.sums(a, h);
        let odd = self.odd.sums(a, h);
        let even = self.even.sums(a, h);
        let tol = COLLISION_TOLERANCE * COLLISION_TOLERANCE;
        if full.min_distance_sq <= tol || even.min_distance_sq <= tol || odd.min_distance_sq <= tol {
            return Err(PolyError::Collision {
                i: self.n - 1,
                j: 3 * self.n - 1,
                distance: full.min_distance_sq.max(0.0).sqrt(),
                tolerance: COLLISION_TOLERANCE,
            });
        }
        let mu = self.a_const + b * full.lower_radial;
        let self_term = b * self.b_const / (a * a * a);
        let share = mu * h / (1.0 + 2.0 * b);
        Ok(DoubledRingResidual {
            mu,
            residuals: [
                0.0,
                self_term + odd.upper_radial - mu,
                self_term + even.upper_radial - mu,
                h * full.inverse - 2.0 * share,
                h * odd.inverse - share,
                h * even.inverse - share,
            ],
        })
    }
}

/// Evaluates the conditions for a lower N-gon and an upper 2N-gon. All
/// admissible twists are equivalent, so θ = 0.
pub fn doubled_ring_residual(n: usize, a: f64, b: f64, h: f64) -> Result<DoubledRingResidual> {
    if n < 2 {
        return Err(PolyError::InvalidParams(format!("N = {n} < 2")));
    }
    if !(a.is_finite() && a > 0.0 && b.is_finite() && b > 0.0 && h.is_finite() && h >= 0.0) {
        return Err(PolyError::InvalidParams(format!(
            "need a, b > 0 and h >= 0, got a = {a}, b = {b}, h = {h}"
        )));
    }
    DoubledRings::new(n).residual(a, b, h)
}

/// Grids and sampling for [`nonexistence_certificate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CertificateConfig {
    pub a_grid: GridSpec,
    pub b_grid: GridSpec,
    pub h_grid: GridSpec,
    pub height_gap_x_grid: GridSpec,
    pub polish_starts: usize,
    pub polish_iterations: usize,
    pub random_draws: usize,
    pub random_threshold: f64,
    pub seed: u64,
}

impl Default for CertificateConfig {
    fn default() -> Self {
        Self {
            a_grid: GridSpec::log(0.05, 20.0, 60),
            b_grid: GridSpec::log(0.01, 50.0, 40),
            h_grid: GridSpec::linear(0.0, 5.0, 26),
            height_gap_x_grid: GridSpec::linear(0.0, 25.0, 51),
            polish_starts: 8,
            polish_iterations: 200,
            random_draws: 10_000,
            random_threshold: 1e-4,
            seed: 20_240_601,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignScan {
    pub function: String,
    pub expected_sign: String,
    pub evaluations: usize,
    /// Smallest `|value|` seen.
    pub min_abs: f64,
    /// Largest value after multiplication by the expected sign; negative
    /// when the sign holds everywhere.
    pub worst_signed: f64,
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualMinimum {
    pub a: f64,
    pub b: f64,
    pub h: f64,
    pub max_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomRefutation {
    pub draws: usize,
    pub seed: u64,
    pub threshold: f64,
    pub below_threshold: usize,
    pub best: ResidualMinimum,
}

/// Machine-readable evidence that `(N, 2N)` admits no central configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonexistenceCertificate {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub config: CertificateConfig,
    /// The difference of the two upper vertical conditions equals
    /// `h · height_gap(a, h², N)`, so a negative height gap forces h = 0.
    pub height_gap: SignScan,
    /// At h = 0 the two upper radial conditions differ by `radial_gap(a, N)`,
    /// nonzero for a ≠ 1; a = 1 is a collision.
    pub radial_gap: SignScan,
    pub grid_minimum: ResidualMinimum,
    pub polished_minimum: ResidualMinimum,
    pub random: RandomRefutation,
    pub references: Vec<String>,
    /// Both sign scans are violation-free and no random draw fell below the
    /// threshold.
    pub refuted: bool,
}

fn sign_scan(function: &str, expected: &str, values: impl Iterator<Item = (f64, f64)>) -> SignScan {
    let mut scan = SignScan {
        function: function.into(),
        expected_sign: expected.into(),
        evaluations: 0,
        min_abs: f64::INFINITY,
        worst_signed: f64::NEG_INFINITY,
        violations: 0,
    };
    for (value, sign) in values {
        scan.evaluations += 1;
        scan.min_abs = scan.min_abs.min(value.abs());
        let signed = -sign * value;
        scan.worst_signed = scan.worst_signed.max(signed);
        if !(signed < 0.0) {
            scan.violations += 1;
        }
    }
    scan
}

fn residual_max(rings: &DoubledRings, a: f64, b: f64, h: f64) -> f64 {
    rings
        .residual(a, b, h)
        .map(|r| r.max_abs())
        .unwrap_or(f64::INFINITY)
}

/// Grid scan, local polish and random sampling of the `(N, 2N)` system.
pub fn nonexistence_certificate(n: usize, config: &CertificateConfig) -> Result<NonexistenceCertificate> {
    if n < 2 {
        return Err(PolyError::InvalidParams(format!("N = {n} < 2")));
    }
    let rings = DoubledRings::new(n);
    let avals: Vec<f64> = config.a_grid.values().into_iter().filter(|&a| a != 1.0).collect();
    let bvals = config.b_grid.values();
    let hvals = config.h_grid.values();
    let xvals = config.height_gap_x_grid.values();

    let mut height_values = Vec::new();
    for &a in &avals {
        for &x in &xvals {
            height_values.push((height_gap(a, x, n)?, -1.0));
        }
    }
    let height = sign_scan("height_gap", "negative", height_values.into_iter());

    let mut radial_values = Vec::new();
    for &a in &avals {
        let sign = if a < 1.0 { 1.0 } else { -1.0 };
        radial_values.push((radial_gap(a, n)?, sign));
    }
    let radial = sign_scan("radial_gap", "positive for a < 1, negative for a > 1", radial_values.into_iter());

    let mut cells: Vec<ResidualMinimum> = avals
        .par_iter()
        .flat_map_iter(|&a| {
            let rings = &rings;
            let hvals = &hvals;
            bvals.iter().flat_map(move |&b| {
                hvals.iter().map(move |&h| ResidualMinimum {
                    a,
                    b,
                    h,
                    max_residual: residual_max(rings, a, b, h),
                })
            })
        })
        .collect();
    cells.sort_by(|p, q| p.max_residual.total_cmp(&q.max_residual));
    let grid_minimum = cells[0].clone();

    let polished: Vec<ResidualMinimum> = cells
        .iter()
        .take(config.polish_starts)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|start| polish(&rings, start, config))
        .collect();
    let polished_minimum = polished
        .into_iter()
        .chain([grid_minimum.clone()])
        .min_by(|p, q| p.max_residual.total_cmp(&q.max_residual))
        .expect("non-empty");

    let random = random_refutation(&rings, config);

    let refuted = height.violations == 0 && radial.violations == 0 && random.below_threshold == 0;
    Ok(NonexistenceCertificate {
        n,
        l: 2 * n,
        config: config.clone(),
        height_gap: height,
        radial_gap: radial,
        grid_minimum,
        polished_minimum,
        random,
        references: vec![
            "doubled_ring_residual".into(),
            "height_gap".into(),
            "radial_gap".into(),
            "admissible".into(),
        ],
        refuted,
    })
}

/// Levenberg–Marquardt in `(ln a, ln b, h)`, clamped to the scanned box.
fn polish(rings: &DoubledRings, start: &ResidualMinimum, config: &CertificateConfig) -> ResidualMinimum {
    let (alo, ahi) = bounds(&config.a_grid);
    let (blo, bhi) = bounds(&config.b_grid);
    let (hlo, hhi) = bounds(&config.h_grid);
    let iterations = config.polish_iterations;
    let unpack = |x: &[f64]| {
        (
            x[0].exp().clamp(alo, ahi),
            x[1].exp().clamp(blo, bhi),
            x[2].abs().clamp(hlo, hhi),
        )
    };
    let r = |x: &[f64]| {
        let (a, b, h) = unpack(x);
        rings.residual(a, b, h).ok().map(|r| r.residuals[1..].to_vec())
    };
    let out = levenberg_marquardt(r, &[start.a.ln(), start.b.ln(), start.h], iterations, 1e-7);
    let (a, b, h) = unpack(&out.x);
    let candidate = ResidualMinimum {
        a,
        b,
        h,
        max_residual: residual_max(rings, a, b, h),
    };
    if candidate.max_residual < start.max_residual {
        candidate
    } else {
        start.clone()
    }
}

fn random_refutation(rings: &DoubledRings, config: &CertificateConfig) -> RandomRefutation {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ rings.n as u64);
    let (alo, ahi) = bounds(&config.a_grid);
    let (blo, bhi) = bounds(&config.b_grid);
    let (hlo, hhi) = bounds(&config.h_grid);
    let mut best = ResidualMinimum {
        a: f64::NAN,
        b: f64::NAN,
        h: f64::NAN,
        max_residual: f64::INFINITY,
    };
    let mut below = 0;
    for _ in 0..config.random_draws {
        let a = rng.gen_range(alo.ln()..=ahi.ln()).exp();
        let b = rng.gen_range(blo.ln()..=bhi.ln()).exp();
        let h = rng.gen_range(hlo..=hhi);
        let v = residual_max(rings, a, b, h);
        if v < config.random_threshold {
            below += 1;
        }
        if v < best.max_residual {
            best = ResidualMinimum { a, b, h, max_residual: v };
        }
    }
    RandomRefutation {
        draws: config.random_draws,
        seed: config.seed,
        threshold: config.random_threshold,
        below_threshold: below,
        best,
    }
}

fn bounds(grid: &GridSpec) -> (f64, f64) {
    let v = grid.values();
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lemmas::sine_zero_angles;
    use crate::polygon::angle_distance;

    #[test]
    fn examples() {
        let r = admissible(3, 3).unwrap();
        assert_eq!(r.verdict, Verdict::Equal);
        assert!(r.admissible_thetas.contains(&PiMultiple::new(0, 1).unwrap()));
        assert!(r.admissible_thetas.contains(&PiMultiple::new(1, 3).unwrap()));
        assert_eq!(r.admissible_thetas.len(), 6);

        let r = admissible(3, 6).unwrap();
        assert_eq!(r.verdict, Verdict::Double);
        assert!(r.divisibility_ok && r.odd_parts_equal);

        let r = admissible(3, 5).unwrap();
        assert_eq!(r.verdict, Verdict::Inadmissible);
        assert!(!r.divisibility_ok);
        assert!(r.admissible_thetas.is_empty());

        assert!(admissible(4, 3).is_err());
    }

    #[test]
    fn verdict_matches_divisibility() {
        for n in 2..=24 {
            for l in n..=24 {
                let r = admissible(n, l).unwrap();
                assert_eq!(r.verdict != Verdict::Inadmissible, l == n || l == 2 * n, "({n}, {l})");
                if r.verdict != Verdict::Inadmissible {
                    assert!(r.divisibility_ok && r.odd_parts_equal);
                }
            }
        }
    }

    #[test]
    fn equal_thetas_match_sine_zeros() {
        for n in 2..=8 {
            let r = admissible(n, n).unwrap();
            let scan = sine_zero_angles(n, 0.7, 0.4, 8 * n).unwrap();
            assert_eq!(r.admissible_thetas.len(), scan.zeros.len());
            for (t, z) in r.admissible_thetas.iter().zip(&scan.zeros) {
                assert!(angle_distance(t.radians(), *z) < 1e-10);
            }
        }
    }

    #[test]
    fn pi_multiple_reduces_and_serialises() {
        let t = PiMultiple::new(-1, 3).unwrap();
        assert_eq!((t.numer(), t.denom()), (5, 3));
        assert_eq!(serde_json::to_string(&t).unwrap(), "[5,3]");
        let back: PiMultiple = serde_json::from_str("[5,3]").unwrap();
        assert_eq!(back, t);
        assert_eq!(PiMultiple::new(4, 2).unwrap().numer(), 0);
        assert_eq!(t.to_string(), "5/3pi");
        assert!(PiMultiple::new(1, 0).is_err());
    }

    #[test]
    fn doubled_residual_matches_full_model() {
        for n in [2, 3, 5] {
            for (a, b, h) in [(0.6, 0.8, 0.0), (1.7, 2.0, 0.9), (0.3, 0.05, 2.0)] {
                let d = doubled_ring_residual(n, a, b, h).unwrap();
                let p = TwistedPairParams::new(n, 2 * n, a, b, h, 0.0).unwrap();
                let v = residual_vector(&p).unwrap();
                assert!((d.mu - v.mu_lower).abs() < 1e-12 * d.mu.abs());
                assert!(v.max_tangential() < 1e-12);
                // First upper vertex (k = 1) is an odd vertex.
                assert!((d.residuals[1] - v.radial_upper_gap).abs() < 1e-11);
                assert!((d.residuals[3] - v.vertical_lower_gap).abs() < 1e-11);
                assert!((d.residuals[4] - v.vertical_upper_gap).abs() < 1e-11);
                let spread = (d.residuals[1] - d.residuals[2]).abs();
                assert!((spread - v.radial_spread).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn doubled_residual_identities() {
        for n in 2..=6 {
            for a in [0.2, 0.8, 1.3, 4.0] {
                let flat = doubled_ring_residual(n, a, 1.5, 0.0).unwrap();
                let gap = flat.residuals[1] - flat.residuals[2];
                let expected = radial_gap(a, n).unwrap();
                assert!((gap - expected).abs() <= 1e-10 * expected.abs().max(1e-6), "N={n} a={a}");
                for h in [0.3, 1.1] {
                    let r = doubled_ring_residual(n, a, 0.7, h).unwrap();
                    let gap = r.residuals[4] - r.residuals[5];
                    let expected = h * height_gap(a, h * h, n).unwrap();
                    assert!((gap - expected).abs() <= 1e-10 * expected.abs().max(1e-6));
                }
            }
        }
        assert!(matches!(
            doubled_ring_residual(3, 1.0, 1.0, 0.0),
            Err(PolyError::Collision { .. })
        ));
    }

    #[test]
    fn tangential_scan_separates_inadmissible_pairs() {
        let bad = tangential_scan(3, 5, 0.8, 0.3).unwrap();
        assert!(bad.min_max_tangential > 1e-6);
        let good = tangential_scan(3, 3, 0.8, 0.3).unwrap();
        assert!(good.min_max_tangential < 1e-12);
    }

    #[test]
    fn small_certificate_is_refuting() {
        let config = CertificateConfig {
            a_grid: GridSpec::log(0.1, 10.0, 12),
            b_grid: GridSpec::log(0.1, 10.0, 6),
            h_grid: GridSpec::linear(0.0, 2.0, 5),
            polish_starts: 2,
            random_draws: 500,
            ..CertificateConfig::default()
        };
        let c = nonexistence_certificate(2, &config).unwrap();
        assert!(c.refuted);
        assert_eq!(c.l, 4);
        assert!(c.polished_minimum.max_residual <= c.grid_minimum.max_residual);
        assert!(c.polished_minimum.max_residual > 0.0);
        let json = serde_json::to_string(&c).unwrap();
        assert!(json.contains("\"radial_gap\""));
    }
}
