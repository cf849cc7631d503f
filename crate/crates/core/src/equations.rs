//! Residuals of the equations of motion for a rigid rotation about e_z.
//!
//! Two independent forms are provided: a Cartesian one (tangential force
//! balance against the centripetal acceleration) and the spherical-angle
//! form, with one polar equation per body and the azimuthal torques.

use nalgebra::Vector3;

use crate::dynamics::{force, force_scale};
use crate::error::Result;
use crate::geometry::{to_cartesian, CartesianConfig, MassTriple, SphericalConfig, PAIRS};
use crate::potential::Potential;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EomResidual {
    /// Largest tangential force imbalance over the bodies.
    pub max_abs: f64,
    /// Magnitude of the terms being balanced.
    pub scale: f64,
}

impl EomResidual {
    pub fn relative(&self) -> f64 {
        self.max_abs / self.scale.max(1.0)
    }

    pub fn within(&self, tol: f64) -> bool {
        self.relative() <= tol
    }
}

/// Imbalance of F_k + m_k omega^2 (q_k - (q_k . e_z) e_z), projected to the
/// tangent plane at q_k.
pub fn rigid_rotation_residual(
    c: &CartesianConfig,
    m: &MassTriple,
    p: &dyn Potential,
    omega_sq: f64,
) -> Result<EomResidual> {
    let q = c.positions();
    let f = force(q, m, p)?;
    let fs = force_scale(q, m, p)?;
    let mut max_abs: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for k in 0..3 {
        let perp = q[k] - Vector3::z() * q[k].z;
        let centrifugal = perp * (m.get(k) * omega_sq);
        let total = f[k] + centrifugal;
        let tangential = total - q[k] * q[k].dot(&total);
        max_abs = max_abs.max(tangential.norm());
        scale = scale.max(fs[k] + centrifugal.norm());
    }
    Ok(EomResidual { max_abs, scale })
}

/// Spherical-angle residuals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalResiduals {
    /// omega^2 m_i sin(th_i) cos(th_i)
    ///   - sum_j m_i m_j U'_ij (sin th_i cos th_j - cos th_i sin th_j cos(ph_i - ph_j)).
    pub theta: [f64; 3],
    /// T_ij = m_i m_j U'_ij sin th_i sin th_j sin(ph_i - ph_j) for (12), (23), (31);
    /// a rigid rotation needs all three equal.
    pub torque: [f64; 3],
}

impl SphericalResiduals {
    pub fn max_abs(&self) -> f64 {
        let t = self.theta.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        let d = (0..3)
            .map(|p| (self.torque[p] - self.torque[(p + 1) % 3]).abs())
            .fold(0.0f64, f64::max);
        t.max(d)
    }
}

pub fn spherical_residuals(
    c: &SphericalConfig,
    m: &MassTriple,
    p: &dyn Potential,
    omega_sq: f64,
) -> Result<SphericalResiduals> {
    let q = to_cartesian(c);
    let (st, ct): (Vec<f64>, Vec<f64>) = c.theta.iter().map(|t| t.sin_cos()).unzip();
    let mut theta = [0.0; 3];
    for i in 0..3 {
        let mut rhs = 0.0;
        for j in 0..3 {
            if i == j {
                continue;
            }
            let du = p.derivative(q.get(i).dot(q.get(j)))?;
            let dphi = c.phi[i] - c.phi[j];
            rhs += m.get(i) * m.get(j) * du * (st[i] * ct[j] - ct[i] * st[j] * dphi.cos());
        }
        theta[i] = omega_sq * m.get(i) * st[i] * ct[i] - rhs;
    }
    let mut torque = [0.0; 3];
    for (k, &(i, j)) in PAIRS.iter().enumerate() {
        let du = p.derivative(q.get(i).dot(q.get(j)))?;
        torque[k] = m.get(i) * m.get(j) * du * st[i] * st[j] * (c.phi[i] - c.phi[j]).sin();
    }
    Ok(SphericalResiduals { theta, torque })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Cotangent;
    use std::f64::consts::TAU;

    #[test]
    fn equilateral_right_angle_rotation() {
        let t = (1.0 / 3f64.sqrt()).acos();
        let c = SphericalConfig::standard([t; 3], [0.0, TAU / 3.0, 2.0 * TAU / 3.0]).unwrap();
        let m = MassTriple::equal(1.0).unwrap();
        let r = rigid_rotation_residual(&to_cartesian(&c), &m, &Cotangent, 3.0).unwrap();
        assert!(r.max_abs < 1e-14, "{r:?}");
        let s = spherical_residuals(&c, &m, &Cotangent, 3.0).unwrap();
        assert!(s.max_abs() < 1e-14, "{s:?}");
        let wrong = rigid_rotation_residual(&to_cartesian(&c), &m, &Cotangent, 2.0).unwrap();
        assert!(wrong.relative() > 0.1);
    }

    #[test]
    fn forms_agree_on_zero_set() {
        // A meridian rotation: both forms vanish for the isosceles Euler solution.
        let th = std::f64::consts::FRAC_PI_3;
        let c = SphericalConfig::meridian([-th, th, 0.0]).unwrap();
        let m = MassTriple::equal(1.0).unwrap();
        let w2 = 32.0 / (3.0 * 3f64.sqrt());
        let r = rigid_rotation_residual(&to_cartesian(&c), &m, &Cotangent, w2).unwrap();
        assert!(r.max_abs < 1e-13, "{r:?}");
        let s = spherical_residuals(&c, &m, &Cotangent, w2).unwrap();
        assert!(s.max_abs() < 1e-13, "{s:?}");
    }
}
