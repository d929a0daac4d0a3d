//! Two coaxial regular polygons: an N-gon of unit circumradius in the plane
//! z = 0 and an L-gon of circumradius `a` at height `h`, rotated by the twist
//! angle θ.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{PolyError, Result};
use crate::nbody::{center_of_mass_shift, BodySystem};

/// Tolerance used when comparing twist angles.
pub const ANGLE_TOLERANCE: f64 = 1e-12;

/// Reduces an angle into `[0, 2π)`.
pub fn reduce_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    if r >= TAU - ANGLE_TOLERANCE * 1e-3 {
        0.0
    } else {
        r
    }
}

/// Circular distance between two angles.
pub fn angle_distance(x: f64, y: f64) -> f64 {
    let d = (x - y).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Parameter tuple `(N, L, a, b, h, θ, m)`.
///
/// Lower layer: N bodies of mass `m` at the N-th roots of unity. Upper layer:
/// L bodies of mass `b·m` at `a·ξ_l·e^{iθ}` lifted to height `h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct TwistedPairParams {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub a: f64,
    pub b: f64,
    pub h: f64,
    pub theta: f64,
    pub m: f64,
}

#[derive(Deserialize)]
struct RawParams {
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "L")]
    l: usize,
    a: f64,
    b: f64,
    h: f64,
    theta: f64,
    #[serde(default = "unit_mass")]
    m: f64,
}

fn unit_mass() -> f64 {
    1.0
}

impl TryFrom<RawParams> for TwistedPairParams {
    type Error = PolyError;

    fn try_from(raw: RawParams) -> Result<Self> {
        TwistedPairParams::with_mass(raw.n, raw.l, raw.a, raw.b, raw.h, raw.theta, raw.m)
    }
}

impl TwistedPairParams {
    /// Parameters with the canonical lower mass `m = 1`.
    pub fn new(n: usize, l: usize, a: f64, b: f64, h: f64, theta: f64) -> Result<Self> {
        Self::with_mass(n, l, a, b, h, theta, 1.0)
    }

    pub fn with_mass(
        n: usize,
        l: usize,
        a: f64,
        b: f64,
        h: f64,
        theta: f64,
        m: f64,
    ) -> Result<Self> {
        if n < 2 || l < 2 {
            return Err(PolyError::InvalidParams(format!(
                "polygons need at least two vertices (N = {n}, L = {l})"
            )));
        }
        if n > l {
            return Err(PolyError::InvalidParams(format!(
                "lower polygon must not have more vertices than the upper one (N = {n} > L = {l})"
            )));
        }
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(PolyError::InvalidParams(format!("{name} must be positive, got {v}")))
            }
        };
        positive("a", a)?;
        positive("b", b)?;
        positive("m", m)?;
        if !(h.is_finite() && h >= 0.0) {
            return Err(PolyError::InvalidParams(format!(
                "h must be nonnegative, got {h}"
            )));
        }
        if !theta.is_finite() {
            return Err(PolyError::InvalidParams("theta must be finite".into()));
        }
        Ok(Self {
            n,
            l,
            a,
            b,
            h,
            theta: reduce_angle(theta),
            m,
        })
    }

    /// Same shape with a different twist.
    pub fn with_theta(&self, theta: f64) -> Self {
        Self {
            theta: reduce_angle(theta),
            ..*self
        }
    }

    pub fn upper_mass(&self) -> f64 {
        self.b * self.m
    }

    /// Height of the center of mass above the lower plane, `bLh / (N + bL)`.
    pub fn center_height(&self) -> f64 {
        let bl = self.b * self.l as f64;
        bl * self.h / (self.n as f64 + bl)
    }
}

/// Lower vertices first, then upper vertices, each in ascending index order
/// starting at `k = 1` (angle `2π/N`) and ending at `k = N` (angle 0).
pub fn build(params: &TwistedPairParams) -> Result<BodySystem> {
    let n = params.n;
    let l = params.l;
    let mut masses = Vec::with_capacity(n + l);
    let mut positions = Vec::with_capacity(n + l);
    for k in 1..=n {
        let t = TAU * (k % n) as f64 / n as f64;
        masses.push(params.m);
        positions.push([t.cos(), t.sin(), 0.0]);
    }
    for j in 1..=l {
        let t = TAU * (j % l) as f64 / l as f64 + params.theta;
        masses.push(params.upper_mass());
        positions.push([params.a * t.cos(), params.a * t.sin(), params.h]);
    }
    BodySystem::new(masses, positions)
}

/// [`build`] followed by translation of the center of mass to the origin.
pub fn centered_positions(params: &TwistedPairParams) -> Result<BodySystem> {
    Ok(center_of_mass_shift(&build(params)?))
}
