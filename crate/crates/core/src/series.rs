//! Power-series machinery behind the sign lemmas.
//!
//! Two rings of N points, one at angles `2jπ/N` and one at `(2j − 1)π/N`,
//! are compared through
//!
//! ```text
//! G_α(t) = Σ_j (1 − t cos((2j−1)π/N))^{−α} − Σ_j (1 − t cos(2jπ/N))^{−α}.
//! ```
//!
//! Expanding in t, only Fourier modes that are multiples of N survive the sum
//! over j, and each mode contributes `((−1)^q − 1)`: every coefficient of
//! `G_α` is nonpositive and the first nonzero one sits at `t^N`. Summing that
//! series keeps full relative accuracy when the literal difference of sums
//! would cancel to nothing.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{PolyError, Result};
use crate::residuals::Ring;
use crate::sum::pairwise_sum;

/// Truncation order used when none is given.
pub const DEFAULT_ORDER: usize = 512;
/// Beyond this order `d_m` is accumulated in log space.
pub const LOG_SPACE_ORDER: usize = 10_000;
/// Hard cap on the truncation order (the convolution is O(M²/N)).
pub const MAX_ORDER: usize = 1_000_000;

/// `d_m`, the Taylor coefficients of `(1 − z)^{−1/2}`.
pub fn inverse_sqrt_coefficients(order: usize) -> Vec<f64> {
    let mut d = Vec::with_capacity(order + 1);
    d.push(1.0);
    if order <= LOG_SPACE_ORDER {
        for m in 0..order {
            let next = d[m] * (m as f64 + 0.5) / (m as f64 + 1.0);
            d.push(next);
        }
    } else {
        let mut log_d = 0.0_f64;
        for m in 0..order {
            log_d += (-0.5 / (m as f64 + 1.0)).ln_1p();
            d.push(log_d.exp());
        }
    }
    d
}

/// Truncated coefficient sequences of the half-step ring comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesCoeffs {
    pub n: usize,
    /// `d_m` for `m = 0..=truncation_order`.
    pub d: Vec<f64>,
    /// `b_m` for `m = 0..=truncation_order`, the coefficients of
    /// `h(x) = Σ_odd |1 − x e^{iψ}|^{−1} − Σ_even |1 − x e^{iψ}|^{−1}`.
    pub b: Vec<f64>,
    pub truncation_order: usize,
    /// Radius at which `tail_bound` applies.
    pub radius: f64,
    /// Bound on `|h(r) − Σ_{m≤M} b_m r^m|` including the rounding of the
    /// partial sum itself.
    pub tail_bound: f64,
}

impl SeriesCoeffs {
    /// `Σ_{m ≤ M} b_m x^m`.
    pub fn partial_sum(&self, x: f64) -> f64 {
        let mut power = 1.0;
        let terms: Vec<f64> = self
            .b
            .iter()
            .map(|b| {
                let t = b * power;
                power *= x;
                t
            })
            .collect();
        pairwise_sum(&terms)
    }

    /// `Σ_{m ≤ M} m b_m x^{m−2}`; equals `−h'(x)/x` up to truncation.
    pub fn derivative_over_x(&self, x: f64) -> f64 {
        let terms: Vec<f64> = self
            .b
            .iter()
            .enumerate()
            .skip(1)
            .map(|(m, b)| m as f64 * b * x.powi(m as i32 - 2))
            .collect();
        pairwise_sum(&terms)
    }

    pub fn max_coefficient(&self) -> f64 {
        self.b.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Indices `m ≥ N` of windows `[w, w + N)` without a strictly negative
    /// coefficient (empty when infinitely-many-negative holds up to truncation).
    pub fn windows_without_negative(&self) -> Vec<usize> {
        let n = self.n;
        let mut missing = Vec::new();
        let mut w = n;
        while w + n <= self.b.len() {
            if !self.b[w..w + n].iter().any(|&b| b < 0.0) {
                missing.push(w);
            }
            w += n;
        }
        missing
    }
}

/// Coefficients `d_m` and `b_m` up to order `order`, with the remainder bound
/// at `radius`.
///
/// `b_m = N Σ_{k+l=m, k≡l (mod N)} d_k d_l [cos((k−l)π/N) − 1]`; the bracket
/// is `−2` when `(k − l)/N` is odd and `0` when it is even, and is applied in
/// that exact form.
pub fn series_coeffs(n: usize, order: usize, radius: f64) -> Result<SeriesCoeffs> {
    if n < 2 {
        return Err(PolyError::InvalidParams(format!("N = {n} < 2")));
    }
    if order < n {
        return Err(PolyError::InvalidParams(format!(
            "truncation order {order} must be at least N = {n}"
        )));
    }
    if order > MAX_ORDER {
        return Err(PolyError::InvalidParams(format!(
            "truncation order {order} exceeds {MAX_ORDER}"
        )));
    }
    if !(radius > 0.0 && radius < 1.0) {
        return Err(PolyError::Domain(format!(
            "evaluation radius must lie in (0, 1), got {radius}"
        )));
    }
    let d = inverse_sqrt_coefficients(order);
    let mut b = vec![0.0; order + 1];
    for (m, slot) in b.iter_mut().enumerate() {
        let q_max = (m / n) as i64;
        let mut terms = Vec::new();
        let mut q = -q_max;
        while q <= q_max {
            if q.rem_euclid(2) == 1 {
                let diff = q * n as i64;
                let twice_k = m as i64 + diff;
                if twice_k.rem_euclid(2) == 0 {
                    let k = (twice_k / 2) as usize;
                    let l = m - k;
                    terms.push(d[k] * d[l]);
                }
            }
            q += 1;
        }
        *slot = -2.0 * n as f64 * pairwise_sum(&terms);
    }

    // Σ_{k+l=m} d_k d_l = 1, hence |b_m| ≤ 2N.
    let truncation = 2.0 * n as f64 * radius.powi(order as i32 + 1) / (1.0 - radius);
    let mut power = 1.0;
    let mut abs_sum = 0.0;
    for bm in &b {
        abs_sum += bm.abs() * power;
        power *= radius;
    }
    let rounding = (order as f64 + 1.0) * f64::EPSILON * abs_sum;

    Ok(SeriesCoeffs {
        n,
        d,
        b,
        truncation_order: order,
        radius,
        tail_bound: truncation + rounding,
    })
}

/// Laplace coefficient `b_s^{(j)}(β)`, the `j`-th cosine coefficient of
/// `(1 − 2β cos ψ + β²)^{−s} = ½ Σ_j b_s^{(j)} cos jψ`, for `0 ≤ β < 1`.
///
/// Summed from its hypergeometric series, whose terms are all positive.
pub fn laplace_coefficient(s: f64, j: usize, beta: f64) -> f64 {
    assert!((0.0..1.0).contains(&beta), "laplace coefficient needs 0 <= beta < 1");
    if beta == 0.0 {
        return if j == 0 { 2.0 } else { 0.0 };
    }
    let jf = j as f64;
    let mut lead = 2.0;
    for i in 0..j {
        lead *= (s + i as f64) / (i as f64 + 1.0) * beta;
    }
    if lead == 0.0 {
        return 0.0;
    }
    let b2 = beta * beta;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 0.0;
    loop {
        term *= (s + k) * (s + jf + k) / ((k + 1.0) * (jf + 1.0 + k)) * b2;
        sum += term;
        k += 1.0;
        if term <= 1e-18 * sum {
            break;
        }
    }
    lead * sum
}

/// `(α)_m / m!` for `m = 0, 1, …` as log values.
fn ln_rising_over_factorial(alpha: f64, m: usize) -> f64 {
    ln_gamma(alpha + m as f64) - ln_gamma(alpha) - ln_gamma(m as f64 + 1.0)
}

fn ln_binomial(m: usize, k: usize) -> f64 {
    ln_gamma(m as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((m - k) as f64 + 1.0)
}

/// `2^{−m} Σ C(m, k)` over `k` with `(m − 2k)/N` an odd integer.
fn odd_mode_weight_ln(n: usize, m: usize) -> Option<Vec<f64>> {
    let q_max = (m / n) as i64;
    let mut logs = Vec::new();
    let mut q = -q_max;
    while q <= q_max {
        if q.rem_euclid(2) == 1 {
            let r = q * n as i64;
            let twice_k = m as i64 - r;
            if twice_k >= 0 && twice_k.rem_euclid(2) == 0 {
                let k = (twice_k / 2) as usize;
                logs.push(ln_binomial(m, k) - m as f64 * std::f64::consts::LN_2);
            }
        }
        q += 1;
    }
    if logs.is_empty() {
        None
    } else {
        Some(logs)
    }
}

/// `G_α(t)` by its literal definition.
pub fn shell_difference_direct(alpha: f64, t: f64, n: usize) -> f64 {
    let odd = Ring::half_steps(n, n + n - 1);
    let even = Ring::half_steps(n, 0);
    let side = |ring: &Ring| {
        let terms: Vec<f64> = ring
            .cosines()
            .iter()
            .map(|c| (1.0 - t * c).powf(-alpha))
            .collect();
        pairwise_sum(&terms)
    };
    side(&odd) - side(&even)
}

/// `G_α(t)` through its nonpositive power series in t.
pub fn shell_difference_series(alpha: f64, t: f64, n: usize) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    let ln_t = t.ln();
    let mut scale: Option<f64> = None;
    let mut acc = Vec::new();
    let mut m = n;
    loop {
        if let Some(logs) = odd_mode_weight_ln(n, m) {
            let base = ln_rising_over_factorial(alpha, m) + m as f64 * ln_t;
            for lw in logs {
                let l = base + lw;
                let s = *scale.get_or_insert(l);
                acc.push((l - s).exp());
            }
        }
        // Remaining terms are bounded by c_m t^m with a ratio at most
        // t·max(1, (α + m)/(m + 1)) < 1.
        let ratio = t * ((alpha + m as f64) / (m as f64 + 1.0)).max(1.0);
        if let Some(s) = scale {
            if ratio < 1.0 {
                let ln_bound = ln_rising_over_factorial(alpha, m + 1)
                    + (m + 1) as f64 * ln_t
                    - (1.0 - ratio).ln();
                let partial = pairwise_sum(&acc);
                if (ln_bound - s).exp() < 1e-17 * partial {
                    return -2.0 * n as f64 * partial * s.exp();
                }
            }
        }
        m += 1;
        if m > n + 200_000 {
            let partial = pairwise_sum(&acc);
            return -2.0 * n as f64 * partial * scale.map_or(0.0, f64::exp);
        }
    }
}

/// `G_α(t)` for `0 ≤ t < 1`, choosing the series where the direct difference
/// would lose its significant digits.
pub fn shell_difference(alpha: f64, t: f64, n: usize) -> f64 {
    debug_assert!((0.0..=1.0).contains(&t));
    if t <= 0.6 {
        return shell_difference_series(alpha, t, n);
    }
    // Relative size of the leading term against the individual sums.
    let lead = (ln_rising_over_factorial(alpha, n) + n as f64 * t.ln()
        - (n as f64 - 2.0) * std::f64::consts::LN_2)
        .exp();
    let sums = (1.0 - t).powf(-alpha);
    if t < 0.9 && lead / sums < 1e-8 {
        shell_difference_series(alpha, t, n)
    } else {
        shell_difference_direct(alpha, t, n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_inverse_sqrt_coefficients() {
        let d = inverse_sqrt_coefficients(3);
        assert_eq!(d, vec![1.0, 0.5, 0.375, 0.3125]);
    }

    #[test]
    fn log_space_coefficients_agree_with_recurrence() {
        let direct = inverse_sqrt_coefficients(LOG_SPACE_ORDER);
        let logged = inverse_sqrt_coefficients(LOG_SPACE_ORDER + 10);
        for m in [1, 10, 1000, LOG_SPACE_ORDER] {
            assert!((direct[m] - logged[m]).abs() <= 1e-12 * direct[m]);
        }
    }

    #[test]
    fn coefficient_ratios_decrease_below_one() {
        let d = inverse_sqrt_coefficients(200);
        for m in 0..200 {
            let ratio = d[m + 1] / d[m];
            assert!(ratio < 1.0);
            assert!((ratio - (m as f64 + 0.5) / (m as f64 + 1.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn b_zero_and_low_orders_vanish() {
        for n in 2..=8 {
            let s = series_coeffs(n, 64, 0.5).unwrap();
            assert_eq!(s.b[0], 0.0);
            for m in 0..n {
                assert_eq!(s.b[m], 0.0, "N = {n}, m = {m}");
            }
            assert!(s.b[n] < 0.0);
            // Leading coefficient: −2N·2·d_N·d_0.
            assert!((s.b[n] + 4.0 * n as f64 * s.d[n]).abs() < 1e-14);
        }
    }

    #[test]
    fn coefficients_nonpositive_with_negative_windows() {
        for n in 2..=12 {
            let s = series_coeffs(n, 200, 0.5).unwrap();
            assert!(s.max_coefficient() <= 0.0);
            assert!(s.windows_without_negative().is_empty());
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(series_coeffs(1, 10, 0.5).is_err());
        assert!(series_coeffs(5, 3, 0.5).is_err());
        assert!(series_coeffs(5, 30, 1.0).is_err());
        assert!(series_coeffs(5, MAX_ORDER + 1, 0.5).is_err());
    }

    #[test]
    fn series_and_direct_agree_where_both_are_accurate() {
        for n in 2..=6 {
            for alpha in [0.5, 1.5, 3.0] {
                for t in [0.3, 0.5, 0.6] {
                    let s = shell_difference_series(alpha, t, n);
                    let d = shell_difference_direct(alpha, t, n);
                    assert!(s < 0.0);
                    let scale = 2.0 * n as f64 * (1.0 - t).powf(-alpha);
                    assert!((s - d).abs() <= 1e-13 * scale, "N={n} α={alpha} t={t}: {s} vs {d}");
                }
            }
        }
    }

    #[test]
    fn series_keeps_sign_where_direct_cancels() {
        let v = shell_difference(1.5, 1e-3, 12);
        assert!(v < 0.0 && v.is_finite());
        // Leading term −4N (3/2)_N/N! (t/2)^N.
        let lead = -4.0 * 12.0 * ln_rising_over_factorial(1.5, 12).exp() * (0.5e-3f64).powi(12);
        assert!((v / lead - 1.0).abs() < 1e-3);
    }

    #[test]
    fn laplace_coefficients_match_quadrature() {
        for beta in [0.1, 0.5, 0.8] {
            for j in 0..6 {
                let m = 4096;
                let q: f64 = (0..m)
                    .map(|i| {
                        let psi = 2.0 * std::f64::consts::PI * i as f64 / m as f64;
                        (j as f64 * psi).cos() * (1.0 - 2.0 * beta * psi.cos() + beta * beta).powf(-1.5)
                    })
                    .sum::<f64>()
                    * 2.0
                    / m as f64;
                let l = laplace_coefficient(1.5, j, beta);
                assert!((l - q).abs() < 1e-12 * q.abs().max(1.0), "beta={beta} j={j}: {l} vs {q}");
            }
        }
        assert_eq!(laplace_coefficient(1.5, 3, 0.0), 0.0);
    }
}
