//! Small deterministic root finders: bracketing bisection, damped 2-D Newton
//! with a finite-difference Jacobian, and Levenberg–Marquardt for
//! over-determined residual minimisation.

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};

/// Bisects `[lo, hi]`, which must bracket a sign change of `f`, until the
/// bracket is narrower than `xtol` or cannot be split further in f64.
pub fn bisect<F>(mut f: F, mut lo: f64, mut hi: f64, xtol: f64) -> f64
where
    F: FnMut(f64) -> f64,
{
    let mut flo = f(lo);
    let fhi = f(hi);
    debug_assert!(flo.signum() != fhi.signum() || flo == 0.0 || fhi == 0.0);
    if flo == 0.0 {
        return lo;
    }
    if fhi == 0.0 {
        return hi;
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= xtol || mid <= lo || mid >= hi {
            return mid;
        }
        let fmid = f(mid);
        if fmid == 0.0 {
            return mid;
        }
        if fmid.signum() == flo.signum() {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
}

/// Indices `i` such that `values[i]` and `values[i + 1]` have strictly
/// opposite signs. Non-finite values never bracket.
pub fn sign_change_indices(values: &[f64]) -> Vec<usize> {
    values
        .windows(2)
        .enumerate()
        .filter(|(_, w)| {
            w[0].is_finite() && w[1].is_finite() && w[0] * w[1] < 0.0
        })
        .map(|(i, _)| i)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub max_iterations: usize,
    /// Relative finite-difference step for the Jacobian.
    pub fd_step: f64,
    /// Stop as soon as the max-norm residual drops below this.
    pub ftol: f64,
    /// A run counts as converged only if its final residual is at most this.
    pub accept: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            fd_step: 1e-7,
            ftol: 1e-14,
            accept: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOutcome {
    pub x: [f64; 2],
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn max_norm2(v: [f64; 2]) -> f64 {
    v[0].abs().max(v[1].abs())
}

/// Damped Newton iteration for a 2×2 system.
///
/// `f` returns `None` outside its domain; such trial points are treated like a
/// failed line-search step.
pub fn newton2<F>(f: F, x0: [f64; 2], opts: &NewtonOptions) -> NewtonOutcome
where
    F: Fn([f64; 2]) -> Option<[f64; 2]>,
{
    let mut x = x0;
    let Some(mut fx) = f(x) else {
        return NewtonOutcome {
            x,
            residual: f64::INFINITY,
            iterations: 0,
            converged: false,
        };
    };
    let mut res = max_norm2(fx);
    let mut iterations = 0;
    while iterations < opts.max_iterations && res > opts.ftol {
        iterations += 1;
        let mut jac = Matrix2::zeros();
        let mut ok = true;
        for c in 0..2 {
            let step = opts.fd_step * x[c].abs().max(1e-3);
            let mut xp = x;
            xp[c] += step;
            match f(xp) {
                Some(fp) => {
                    jac[(0, c)] = (fp[0] - fx[0]) / step;
                    jac[(1, c)] = (fp[1] - fx[1]) / step;
                }
                None => ok = false,
            }
        }
        if !ok {
            break;
        }
        let Some(delta) = jac.lu().solve(&Vector2::new(-fx[0], -fx[1])) else {
            break;
        };
        if !(delta[0].is_finite() && delta[1].is_finite()) {
            break;
        }
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial = [x[0] + lambda * delta[0], x[1] + lambda * delta[1]];
            if let Some(ft) = f(trial) {
                let rt = max_norm2(ft);
                if rt.is_finite() && rt < res {
                    x = trial;
                    fx = ft;
                    res = rt;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
        let size = delta[0].abs().max(delta[1].abs()) * lambda;
        if size <= 4.0 * f64::EPSILON * x[0].abs().max(x[1].abs()) {
            break;
        }
    }
    NewtonOutcome {
        x,
        residual: res,
        iterations,
        converged: res <= opts.accept,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquaresOutcome {
    pub x: Vec<f64>,
    /// Max-norm of the residual vector at `x`.
    pub residual: f64,
    pub iterations: usize,
}

/// Levenberg–Marquardt minimisation of `‖r(x)‖²` with a forward-difference
/// Jacobian. `r` returns `None` outside its domain.
pub fn levenberg_marquardt<F>(
    r: F,
    x0: &[f64],
    max_iterations: usize,
    fd_step: f64,
) -> LeastSquaresOutcome
where
    F: Fn(&[f64]) -> Option<Vec<f64>>,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let sq = |v: &[f64]| v.iter().map(|e| e * e).sum::<f64>();
    let max_abs = |v: &[f64]| v.iter().fold(0.0_f64, |m, e| m.max(e.abs()));
    let Some(mut rx) = r(&x) else {
        return LeastSquaresOutcome {
            x,
            residual: f64::INFINITY,
            iterations: 0,
        };
    };
    let m = rx.len();
    let mut cost = sq(&rx);
    let mut damping = 1e-3;
    let mut iterations = 0;
    while iterations < max_iterations {
        iterations += 1;
        let mut jac = DMatrix::zeros(m, n);
        for c in 0..n {
            let step = fd_step * x[c].abs().max(1e-3);
            let mut xp = x.clone();
            xp[c] += step;
            let Some(rp) = r(&xp) else {
                return LeastSquaresOutcome {
                    residual: max_abs(&rx),
                    x,
                    iterations,
                };
            };
            for i in 0..m {
                jac[(i, c)] = (rp[i] - rx[i]) / step;
            }
        }
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let g = &jt * DVector::from_column_slice(&rx);
        let mut improved = false;
        for _ in 0..30 {
            let mut a = jtj.clone();
            for d in 0..n {
                a[(d, d)] += damping * jtj[(d, d)].max(1e-12);
            }
            let Some(delta) = a.lu().solve(&(-&g)) else {
                damping *= 10.0;
                continue;
            };
            let trial: Vec<f64> = x.iter().zip(delta.iter()).map(|(xi, di)| xi + di).collect();
            if let Some(rt) = r(&trial) {
                let ct = sq(&rt);
                if ct.is_finite() && ct < cost {
                    let rel = delta.amax() / x.iter().fold(1e-12_f64, |mm, v| mm.max(v.abs()));
                    x = trial;
                    rx = rt;
                    cost = ct;
                    damping = (damping * 0.3).max(1e-12);
                    improved = rel > 1e-15;
                    break;
                }
            }
            damping *= 10.0;
        }
        if !improved {
            break;
        }
    }
    LeastSquaresOutcome {
        residual: max_abs(&rx),
        x,
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisection_reaches_machine_precision() {
        let root = bisect(|x| x * x - 2.0, 1.0, 2.0, 0.0);
        assert!((root - 2f64.sqrt()).abs() <= 2.0 * f64::EPSILON);
    }

    #[test]
    fn bisection_is_deterministic() {
        let f = |x: f64| (x - 0.3).sin();
        assert_eq!(bisect(f, 0.0, 1.0, 1e-12).to_bits(), bisect(f, 0.0, 1.0, 1e-12).to_bits());
    }

    #[test]
    fn sign_changes_skip_non_finite() {
        let v = [1.0, -1.0, f64::NAN, 1.0, 2.0, -3.0];
        assert_eq!(sign_change_indices(&v), vec![0, 4]);
    }

    #[test]
    fn newton_solves_circle_line_intersection() {
        let f = |x: [f64; 2]| Some([x[0] * x[0] + x[1] * x[1] - 1.0, x[0] - x[1]]);
        let out = newton2(f, [1.0, 0.2], &NewtonOptions::default());
        assert!(out.converged);
        assert!((out.x[0] - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn newton_reports_failure_without_root() {
        let f = |x: [f64; 2]| Some([x[0] * x[0] + 1.0, x[1]]);
        let out = newton2(f, [0.5, 0.5], &NewtonOptions::default());
        assert!(!out.converged);
    }

    #[test]
    fn lm_finds_least_squares_minimum() {
        // Residuals (x − 1, y − 2, x + y − 3) vanish at (1, 2).
        let r = |x: &[f64]| Some(vec![x[0] - 1.0, x[1] - 2.0, x[0] + x[1] - 3.0]);
        let out = levenberg_marquardt(r, &[5.0, -4.0], 100, 1e-7);
        assert!(out.residual < 1e-8, "{out:?}");
        // Inconsistent system: minimum residual stays positive.
        let r = |x: &[f64]| Some(vec![x[0] - 1.0, x[0] + 1.0]);
        let out = levenberg_marquardt(r, &[3.0], 100, 1e-7);
        assert!((out.residual - 1.0).abs() < 1e-6);
    }
}
