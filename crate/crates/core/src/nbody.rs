//! Brute-force central configuration test for an arbitrary set of point masses.
//!
//! Units: G = 1. A configuration `q` is central when there is a single λ with
//!
//! ```text
//! Σ_{j≠k} m_j m_k (q_j − q_k) / |q_j − q_k|³ = −λ m_k q_k      for every k,
//! ```
//!
//! after translating the center of mass to the origin; λ is then U/I. Nothing
//! here knows about polygons, so it serves as the oracle for the specialised
//! residuals in [`crate::residuals`].

use serde::{Deserialize, Serialize};

use crate::error::{PolyError, Result};

pub type Vec3 = [f64; 3];

/// Default minimum pairwise distance.
pub const COLLISION_TOLERANCE: f64 = 1e-9;
/// Default bound on `max_k |r_k| / m_k` for a system to count as central.
pub const CENTRALITY_TOLERANCE: f64 = 1e-10;
/// Relative bound on `|Σ m q|` accepted by [`moment_of_inertia`].
pub const CENTERING_TOLERANCE: f64 = 1e-10;

fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn norm(a: Vec3) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

/// Point masses with positions in R³.
///
/// Construction validates positivity of the masses and the absence of
/// collisions, so every `BodySystem` in hand is a point of `X \ Δ` up to
/// translation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBodySystem")]
pub struct BodySystem {
    masses: Vec<f64>,
    positions: Vec<Vec3>,
}

#[derive(Deserialize)]
struct RawBodySystem {
    masses: Vec<f64>,
    positions: Vec<Vec3>,
}

impl TryFrom<RawBodySystem> for BodySystem {
    type Error = PolyError;

    fn try_from(raw: RawBodySystem) -> Result<Self> {
        BodySystem::new(raw.masses, raw.positions)
    }
}

impl BodySystem {
    pub fn new(masses: Vec<f64>, positions: Vec<Vec3>) -> Result<Self> {
        Self::with_collision_tolerance(masses, positions, COLLISION_TOLERANCE)
    }

    pub fn with_collision_tolerance(
        masses: Vec<f64>,
        positions: Vec<Vec3>,
        tolerance: f64,
    ) -> Result<Self> {
        if masses.len() != positions.len() {
            return Err(PolyError::InvalidParams(format!(
                "{} masses but {} positions",
                masses.len(),
                positions.len()
            )));
        }
        if masses.len() < 2 {
            return Err(PolyError::InvalidParams(
                "a body system needs at least two bodies".into(),
            ));
        }
        if let Some(m) = masses.iter().find(|m| !(m.is_finite() && **m > 0.0)) {
            return Err(PolyError::InvalidParams(format!(
                "masses must be positive, got {m}"
            )));
        }
        if positions.iter().flatten().any(|x| !x.is_finite()) {
            return Err(PolyError::InvalidParams("non-finite coordinate".into()));
        }
        for i in 0..positions.len() {
            for j in i + 1..positions.len() {
                let distance = norm(sub(positions[i], positions[j]));
                if distance <= tolerance {
                    return Err(PolyError::Collision {
                        i,
                        j,
                        distance,
                        tolerance,
                    });
                }
            }
        }
        Ok(Self { masses, positions })
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn positions(&self) -> &[Vec3] {
        &self.positions
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// `Σ m_i q_i`.
    pub fn mass_moment(&self) -> Vec3 {
        let mut acc = [0.0; 3];
        for (m, q) in self.masses.iter().zip(&self.positions) {
            for d in 0..3 {
                acc[d] += m * q[d];
            }
        }
        acc
    }

    pub fn center_of_mass(&self) -> Vec3 {
        let moment = self.mass_moment();
        let total = self.total_mass();
        [moment[0] / total, moment[1] / total, moment[2] / total]
    }

    /// Applies `f` to every position; masses are kept. Re-validates collisions.
    pub fn map_positions<F>(&self, f: F) -> Result<Self>
    where
        F: Fn(Vec3) -> Vec3,
    {
        Self::new(
            self.masses.clone(),
            self.positions.iter().map(|&q| f(q)).collect(),
        )
    }

    /// Multiplies every mass by `c`.
    pub fn scale_masses(&self, c: f64) -> Result<Self> {
        Self::new(
            self.masses.iter().map(|m| m * c).collect(),
            self.positions.clone(),
        )
    }
}

/// Per-body balance report of a candidate central configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CCReport {
    pub lambda: f64,
    pub per_body_residual: Vec<Vec3>,
    pub max_residual_norm: f64,
    pub is_central: bool,
    pub tolerance: f64,
}

/// Newtonian potential `U = Σ_{j<k} m_j m_k / |q_j − q_k|`.
pub fn potential(sys: &BodySystem) -> f64 {
    let q = sys.positions();
    let m = sys.masses();
    let mut terms = Vec::with_capacity(q.len() * (q.len() - 1) / 2);
    for j in 0..q.len() {
        for k in j + 1..q.len() {
            terms.push(m[j] * m[k] / norm(sub(q[j], q[k])));
        }
    }
    crate::sum::pairwise_sum(&terms)
}

/// `I = Σ m_j |q_j|²`. Requires a centered system.
pub fn moment_of_inertia(sys: &BodySystem) -> Result<f64> {
    let moment = sys.mass_moment();
    let offset = norm(moment);
    let scale: f64 = sys
        .masses()
        .iter()
        .zip(sys.positions())
        .map(|(m, q)| m * norm(*q))
        .sum();
    let tolerance = CENTERING_TOLERANCE * scale.max(1.0);
    if offset > tolerance {
        return Err(PolyError::NotCentered { offset, tolerance });
    }
    let terms: Vec<f64> = sys
        .masses()
        .iter()
        .zip(sys.positions())
        .map(|(m, q)| m * (q[0] * q[0] + q[1] * q[1] + q[2] * q[2]))
        .collect();
    Ok(crate::sum::pairwise_sum(&terms))
}

/// Translates the system so that its center of mass sits at the origin.
pub fn center_of_mass_shift(sys: &BodySystem) -> BodySystem {
    let c = sys.center_of_mass();
    BodySystem {
        masses: sys.masses.clone(),
        positions: sys.positions.iter().map(|&q| sub(q, c)).collect(),
    }
}

/// Central-configuration residuals at the default tolerance.
pub fn cc_residual(sys: &BodySystem) -> CCReport {
    cc_residual_with_tolerance(sys, CENTRALITY_TOLERANCE)
}

/// Central-configuration residuals with λ = U/I of the centered system.
///
/// `r_k = Σ_{j≠k} m_j m_k (q_j − q_k)/|q_j − q_k|³ + λ m_k q_k`; the system is
/// central when `max_k |r_k| / m_k ≤ tolerance`.
pub fn cc_residual_with_tolerance(sys: &BodySystem, tolerance: f64) -> CCReport {
    let centered = center_of_mass_shift(sys);
    let u = potential(&centered);
    // Centering is exact up to round-off, so the precondition holds.
    let i = moment_of_inertia(&centered).expect("centered system");
    let lambda = u / i;

    let q = centered.positions();
    let m = centered.masses();
    let n = q.len();
    let mut per_body_residual = Vec::with_capacity(n);
    let mut max_residual_norm = 0.0_f64;
    let mut terms = vec![Vec::with_capacity(n); 3];
    for k in 0..n {
        for t in terms.iter_mut() {
            t.clear();
        }
        for j in 0..n {
            if j == k {
                continue;
            }
            let d = sub(q[j], q[k]);
            let r = norm(d);
            let w = m[j] * m[k] / (r * r * r);
            for c in 0..3 {
                terms[c].push(w * d[c]);
            }
        }
        let mut r_k = [0.0; 3];
        for c in 0..3 {
            r_k[c] = crate::sum::pairwise_sum(&terms[c]) + lambda * m[k] * q[k][c];
        }
        max_residual_norm = max_residual_norm.max(norm(r_k) / m[k]);
        per_body_residual.push(r_k);
    }
    CCReport {
        lambda,
        per_body_residual,
        max_residual_norm,
        is_central: max_residual_norm <= tolerance,
        tolerance,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn ngon(n: usize) -> BodySystem {
        let positions = (0..n)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / n as f64;
                [t.cos(), t.sin(), 0.0]
            })
            .collect();
        BodySystem::new(vec![1.0; n], positions).unwrap()
    }

    #[test]
    fn potential_of_simple_systems() {
        let pair = BodySystem::new(vec![1.0, 1.0], vec![[-1.0, 0.0, 0.0], [1.0, 0.0, 0.0]]).unwrap();
        assert_relative_eq!(potential(&pair), 0.5);

        let h = 3f64.sqrt() / 2.0;
        let tri = BodySystem::new(
            vec![1.0; 3],
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.5, h, 0.0]],
        )
        .unwrap();
        assert_relative_eq!(potential(&tri), 3.0, epsilon = 1e-14);

        let square = BodySystem::new(
            vec![1.0; 4],
            vec![
                [0.0, 0.0, 0.0],
                [1.0, 0.0, 0.0],
                [1.0, 1.0, 0.0],
                [0.0, 1.0, 0.0],
            ],
        )
        .unwrap();
        assert_relative_eq!(potential(&square), 5.414_213_562_373_095, epsilon = 1e-14);
    }

    #[test]
    fn inertia_of_centered_systems() {
        assert_relative_eq!(moment_of_inertia(&ngon(7)).unwrap(), 7.0, epsilon = 1e-13);
        let pair = BodySystem::new(vec![1.0, 1.0], vec![[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]]).unwrap();
        assert_relative_eq!(moment_of_inertia(&pair).unwrap(), 2.0);
        let lopsided =
            BodySystem::new(vec![1.0, 3.0], vec![[3.0, 0.0, 0.0], [-1.0, 0.0, 0.0]]).unwrap();
        assert_relative_eq!(moment_of_inertia(&lopsided).unwrap(), 12.0);
    }

    #[test]
    fn inertia_rejects_uncentered() {
        let sys = BodySystem::new(vec![1.0, 1.0], vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]).unwrap();
        assert!(matches!(
            moment_of_inertia(&sys),
            Err(PolyError::NotCentered { .. })
        ));
        assert!(moment_of_inertia(&center_of_mass_shift(&sys)).is_ok());
    }

    #[test]
    fn construction_guards() {
        assert!(matches!(
            BodySystem::new(vec![1.0, 1.0], vec![[0.0; 3], [0.0, 0.0, 1e-12]]),
            Err(PolyError::Collision { i: 0, j: 1, .. })
        ));
        assert!(BodySystem::new(vec![1.0, -1.0], vec![[0.0; 3], [1.0, 0.0, 0.0]]).is_err());
        assert!(BodySystem::new(vec![1.0], vec![[0.0; 3]]).is_err());
        assert!(BodySystem::new(vec![1.0, 1.0], vec![[0.0; 3]]).is_err());
    }

    #[test]
    fn centering_is_identity_on_centered_input() {
        let sys = ngon(5);
        let shifted = center_of_mass_shift(&sys);
        for (a, b) in sys.positions().iter().zip(shifted.positions()) {
            for d in 0..3 {
                assert!((a[d] - b[d]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn two_body_lambda() {
        let pair = BodySystem::new(vec![1.0, 1.0], vec![[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]]).unwrap();
        let report = cc_residual(&pair);
        assert!(report.is_central);
        assert_relative_eq!(report.lambda, 0.25, epsilon = 1e-15);
    }

    #[test]
    fn lagrange_triangle_with_unequal_masses() {
        let h = 3f64.sqrt() / 2.0;
        let tri = BodySystem::new(
            vec![1.0, 2.0, 3.0],
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.5, h, 0.0]],
        )
        .unwrap();
        let report = cc_residual(&tri);
        assert!(report.is_central, "{}", report.max_residual_norm);
    }

    #[test]
    fn non_central_is_flagged() {
        let sys = BodySystem::new(
            vec![1.0; 3],
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.3, 0.9, 0.0]],
        )
        .unwrap();
        assert!(!cc_residual(&sys).is_central);
    }

    #[test]
    fn json_round_trip_validates() {
        let json = r#"{"masses":[1.0,2.0],"positions":[[1,0,0],[-0.5,0,0]]}"#;
        let sys: BodySystem = serde_json::from_str(json).unwrap();
        assert_eq!(sys.len(), 2);
        let back: BodySystem = serde_json::from_str(&serde_json::to_string(&sys).unwrap()).unwrap();
        assert_eq!(sys, back);
        let bad = r#"{"masses":[1.0,2.0],"positions":[[1,0,0],[1,0,0]]}"#;
        assert!(serde_json::from_str::<BodySystem>(bad).is_err());
    }
}
