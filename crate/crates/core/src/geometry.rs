//! Configurations of three bodies on the unit sphere.
//!
//! Two descriptions of the same triangle are used throughout the crate:
//! the *shape* (cosines of the three mutual arc angles, independent of any
//! rotation) and the *configuration* (polar and azimuthal angles measured
//! from a chosen axis). This module converts between them and checks that a
//! proposed shape is a spherical triangle at all.

use std::f64::consts::{PI, TAU};
use std::fmt;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pairs in cyclic order: (1,2), (2,3), (3,1).
pub const PAIRS: [(usize, usize); 3] = [(0, 1), (1, 2), (2, 0)];

/// Bodies closer than this to coinciding or being antipodal are rejected.
pub const DEGENERACY_TOL: f64 = 1e-12;

const PHI_COS_TOL: f64 = 1e-10;
const PHI_CLOSURE_TOL: f64 = 1e-8;

/// Three positive masses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassTriple {
    m: [f64; 3],
}

impl MassTriple {
    pub fn new(m1: f64, m2: f64, m3: f64) -> Result<Self> {
        Self::from_array([m1, m2, m3])
    }

    pub fn from_array(m: [f64; 3]) -> Result<Self> {
        for (k, &mk) in m.iter().enumerate() {
            if !(mk.is_finite() && mk > 0.0) {
                return Err(Error::InvalidMass(format!(
                    "m{} = {mk} must be positive and finite",
                    k + 1
                )));
            }
        }
        Ok(Self { m })
    }

    pub fn equal(m: f64) -> Result<Self> {
        Self::new(m, m, m)
    }

    pub fn get(&self, k: usize) -> f64 {
        self.m[k]
    }

    pub fn as_array(&self) -> [f64; 3] {
        self.m
    }

    /// Total mass, always recomputed from the components.
    pub fn total(&self) -> f64 {
        self.m.iter().sum()
    }

    pub fn sqrt(&self) -> [f64; 3] {
        self.m.map(f64::sqrt)
    }

    pub fn is_equal(&self, rel_tol: f64) -> bool {
        let scale = self.total() / 3.0;
        PAIRS
            .iter()
            .all(|&(i, j)| (self.m[i] - self.m[j]).abs() <= rel_tol * scale)
    }
}

/// Shape of a spherical triangle: cosines of the arc angles
/// (sigma12, sigma23, sigma31).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeAngles {
    cos: [f64; 3],
}

impl ShapeAngles {
    pub fn from_cosines(cos_s12: f64, cos_s23: f64, cos_s31: f64) -> Result<Self> {
        let cos = [cos_s12, cos_s23, cos_s31];
        for (p, &c) in cos.iter().enumerate() {
            if !c.is_finite() || c.abs() >= 1.0 - DEGENERACY_TOL {
                let (i, j) = PAIRS[p];
                return Err(Error::DegenerateShape {
                    i: i + 1,
                    j: j + 1,
                    cos: c,
                });
            }
        }
        Ok(Self { cos })
    }

    /// Builds a shape from arc angles in radians.
    pub fn from_angles(s12: f64, s23: f64, s31: f64) -> Result<Self> {
        Self::from_cosines(s12.cos(), s23.cos(), s31.cos())
    }

    pub fn equilateral(sigma: f64) -> Result<Self> {
        Self::from_angles(sigma, sigma, sigma)
    }

    /// Cosines in the order (sigma12, sigma23, sigma31).
    pub fn cosines(&self) -> [f64; 3] {
        self.cos
    }

    /// Arc angles in (0, pi), in the order (sigma12, sigma23, sigma31).
    pub fn angles(&self) -> [f64; 3] {
        self.cos.map(f64::acos)
    }

    /// cos(sigma_ij) for any ordered pair of distinct indices.
    pub fn cos_between(&self, i: usize, j: usize) -> f64 {
        self.cos[pair_index(i, j)]
    }

    /// Relabels the bodies: body `k` of the result is body `perm[k]` of `self`.
    pub fn permuted(&self, perm: [usize; 3]) -> Self {
        let mut cos = [0.0; 3];
        for (p, &(i, j)) in PAIRS.iter().enumerate() {
            cos[p] = self.cos_between(perm[i], perm[j]);
        }
        Self { cos }
    }
}

/// Index into the cyclic pair list for an unordered pair.
pub fn pair_index(i: usize, j: usize) -> usize {
    match (i.min(j), i.max(j)) {
        (0, 1) => 0,
        (1, 2) => 1,
        (0, 2) => 2,
        _ => panic!("invalid body pair ({i}, {j})"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AngleConvention {
    /// theta in [0, pi], arbitrary phi.
    Standard,
    /// All bodies on the meridian phi = 0 with theta extended to [-pi, pi].
    MeridianExtended,
}

/// Polar and azimuthal angles of the three bodies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphericalConfig {
    pub theta: [f64; 3],
    pub phi: [f64; 3],
    pub convention: AngleConvention,
}

impl SphericalConfig {
    pub fn standard(theta: [f64; 3], phi: [f64; 3]) -> Result<Self> {
        for (k, &t) in theta.iter().enumerate() {
            if !t.is_finite() || t.sin() < -1e-15 || !(-1e-15..=PI + 1e-15).contains(&t) {
                return Err(Error::InvalidArgument(format!(
                    "theta{} = {t} outside [0, pi]",
                    k + 1
                )));
            }
        }
        if phi.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidArgument("non-finite azimuth".into()));
        }
        Ok(Self {
            theta,
            phi,
            convention: AngleConvention::Standard,
        })
    }

    pub fn meridian(theta: [f64; 3]) -> Result<Self> {
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidArgument("non-finite polar angle".into()));
        }
        Ok(Self {
            theta,
            phi: [0.0; 3],
            convention: AngleConvention::MeridianExtended,
        })
    }
}

/// Unit position vectors of the three bodies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartesianConfig {
    q: [Vector3<f64>; 3],
}

impl CartesianConfig {
    pub fn new(q: [Vector3<f64>; 3]) -> Result<Self> {
        for (k, qk) in q.iter().enumerate() {
            if !((qk.norm() - 1.0).abs() <= 1e-12) {
                return Err(Error::InvalidArgument(format!(
                    "q{} has norm {}, expected 1",
                    k + 1,
                    qk.norm()
                )));
            }
        }
        Ok(Self { q })
    }

    /// Normalizes each vector onto the sphere.
    pub fn from_unnormalized(q: [Vector3<f64>; 3]) -> Result<Self> {
        if q.iter().any(|v| !(v.norm() > 0.0 && v.norm().is_finite())) {
            return Err(Error::InvalidArgument("zero or non-finite position".into()));
        }
        Ok(Self {
            q: q.map(|v| v.normalize()),
        })
    }

    pub fn positions(&self) -> &[Vector3<f64>; 3] {
        &self.q
    }

    pub fn get(&self, k: usize) -> &Vector3<f64> {
        &self.q[k]
    }

    /// Cosine of the polar angle of each body measured from `axis`.
    pub fn cos_theta_about(&self, axis: &Vector3<f64>) -> [f64; 3] {
        self.q.map(|qk| qk.dot(axis))
    }
}

/// q_k = (sin theta cos phi, sin theta sin phi, cos theta).
pub fn to_cartesian(c: &SphericalConfig) -> CartesianConfig {
    let q = std::array::from_fn(|k| {
        let (st, ct) = c.theta[k].sin_cos();
        let (sp, cp) = c.phi[k].sin_cos();
        Vector3::new(st * cp, st * sp, ct)
    });
    CartesianConfig { q }
}

/// Shape of a configuration: cos sigma_ij = q_i . q_j.
pub fn shape_of(c: &CartesianConfig) -> Result<ShapeAngles> {
    let q = c.positions();
    let cos = PAIRS.map(|(i, j)| q[i].dot(&q[j]));
    ShapeAngles::from_cosines(cos[0], cos[1], cos[2])
}

/// Spherical-coordinate form of the arc-angle cosine.
pub fn cos_sigma_spherical(theta_i: f64, theta_j: f64, dphi: f64) -> f64 {
    theta_i.cos() * theta_j.cos() + theta_i.sin() * theta_j.sin() * dphi.cos()
}

/// Azimuth differences (phi1-phi2, phi2-phi3, phi3-phi1) for a shape seen
/// from an axis at which the bodies have the given cos(theta).
///
/// The orientation branch with sin(phi_i - phi_j) < 0 is returned; the
/// mirror branch is the negation.
pub fn phi_differences(shape: &ShapeAngles, cos_theta: [f64; 3]) -> Result<[f64; 3]> {
    phi_differences_with_tol(shape, cos_theta, PHI_CLOSURE_TOL)
}

/// As [`phi_differences`] with an explicit tolerance on the closure
/// (phi1-phi2)+(phi2-phi3)+(phi3-phi1) = 0 mod 2pi.
pub fn phi_differences_with_tol(
    shape: &ShapeAngles,
    cos_theta: [f64; 3],
    closure_tol: f64,
) -> Result<[f64; 3]> {
    let sin_theta = cos_theta.map(|c| (1.0 - c * c).max(0.0).sqrt());
    if let Some(k) = sin_theta.iter().position(|&s| s <= 1e-12) {
        return Err(Error::InconsistentShape(format!(
            "body {} sits on the axis; azimuth undefined",
            k + 1
        )));
    }
    let mut diff = [0.0; 3];
    for (p, &(i, j)) in PAIRS.iter().enumerate() {
        let c = (shape.cosines()[p] - cos_theta[i] * cos_theta[j]) / (sin_theta[i] * sin_theta[j]);
        if c.abs() > 1.0 + PHI_COS_TOL {
            return Err(Error::InconsistentShape(format!(
                "cos(phi{}-phi{}) = {c} outside [-1, 1]",
                i + 1,
                j + 1
            )));
        }
        diff[p] = -c.clamp(-1.0, 1.0).acos();
    }
    let sum: f64 = diff.iter().sum();
    let closure = (sum - TAU * (sum / TAU).round()).abs();
    if closure > closure_tol {
        return Err(Error::InconsistentShape(format!(
            "azimuth differences sum to {sum}, closure error {closure:e}"
        )));
    }
    Ok(diff)
}

/// A failed spherical-triangle inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ShapeViolation {
    /// sigma_ij exceeds sigma_jk + sigma_ki (bodies are 1-based).
    Side { i: usize, j: usize, excess: f64 },
    /// sigma12 + sigma23 + sigma31 exceeds 2 pi.
    Perimeter { total: f64 },
}

impl fmt::Display for ShapeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ShapeViolation::Side { i, j, excess } => {
                let k = 6 - i - j;
                write!(
                    f,
                    "sigma{i}{j} <= sigma{j}{k} + sigma{k}{i} violated by {excess:e}"
                )
            }
            ShapeViolation::Perimeter { total } => {
                write!(f, "sigma12 + sigma23 + sigma31 = {total} exceeds 2*pi")
            }
        }
    }
}

pub fn validate_shape(shape: &ShapeAngles) -> Vec<ShapeViolation> {
    validate_shape_with_slack(shape, 0.0)
}

/// Triangle inequalities, each allowed to fail by at most `slack` radians.
pub fn validate_shape_with_slack(shape: &ShapeAngles, slack: f64) -> Vec<ShapeViolation> {
    let s = shape.angles();
    let mut out = Vec::new();
    for (p, &(i, j)) in PAIRS.iter().enumerate() {
        let excess = s[p] - (s[(p + 1) % 3] + s[(p + 2) % 3]);
        if excess > slack {
            out.push(ShapeViolation::Side {
                i: i + 1,
                j: j + 1,
                excess,
            });
        }
    }
    let total: f64 = s.iter().sum();
    if total - TAU > slack {
        out.push(ShapeViolation::Perimeter { total });
    }
    out
}

/// True when the arc angles describe three bodies on one great circle.
pub fn is_collinear(sigma: [f64; 3], tol: f64) -> bool {
    let total: f64 = sigma.iter().sum();
    (total - TAU).abs() <= tol
        || (0..3).any(|p| (sigma[p] - sigma[(p + 1) % 3] - sigma[(p + 2) % 3]).abs() <= tol)
}

/// Wraps an angle into (-pi, pi].
pub fn wrap_angle(x: f64) -> f64 {
    let mut w = x.rem_euclid(TAU);
    if w > PI {
        w -= TAU;
    }
    w
}
