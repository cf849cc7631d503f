//! Direct integration of the constrained equations of motion.
//!
//! Positions and velocities are kept in Cartesian coordinates; after each
//! step positions are pulled back to the sphere and velocities projected to
//! the tangent plane. With the Lagrangian written as L = K + V the conserved
//! energy is K - V.

use std::io::{self, Write};

use nalgebra::{Rotation3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CartesianConfig, MassTriple, PAIRS};
use crate::potential::Potential;

/// Integration stops when two bodies get this close to colliding or to
/// being antipodal.
pub const BLOWUP_TOL: f64 = 1e-10;
const MAX_STEPS: f64 = 1e8;
pub const MIN_SAMPLES: usize = 200;

type Triple = [Vector3<f64>; 3];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseState {
    pub q: Triple,
    pub v: Triple,
    pub t: f64,
}

impl PhaseState {
    /// Checks |q_k| = 1 and q_k . v_k = 0 within 1e-10.
    pub fn new(q: Triple, v: Triple, t: f64) -> Result<Self> {
        for k in 0..3 {
            if (q[k].norm() - 1.0).abs() > 1e-10 || q[k].dot(&v[k]).abs() > 1e-10 {
                return Err(Error::InvalidArgument(format!(
                    "body {} violates the sphere constraint (|q| = {}, q.v = {})",
                    k + 1,
                    q[k].norm(),
                    q[k].dot(&v[k])
                )));
            }
        }
        Ok(Self { q, v, t })
    }

    pub fn at_rest(c: &CartesianConfig) -> Self {
        Self {
            q: *c.positions(),
            v: [Vector3::zeros(); 3],
            t: 0.0,
        }
    }

    fn project(&mut self) {
        for k in 0..3 {
            self.q[k] = self.q[k].normalize();
            let q = self.q[k];
            self.v[k] -= q * q.dot(&self.v[k]);
        }
    }

    pub fn cosines(&self) -> [f64; 3] {
        PAIRS.map(|(i, j)| self.q[i].dot(&self.q[j]))
    }
}

/// Initial state of a rigid rotation about e_z: v_k = omega e_z x q_k.
pub fn rigid_rotation(c: &CartesianConfig, omega: f64) -> PhaseState {
    let q = *c.positions();
    PhaseState {
        q,
        v: q.map(|qk| Vector3::z().cross(&qk) * omega),
        t: 0.0,
    }
}

/// Initial state for a relative equilibrium with the given squared angular
/// velocity about e_z.
pub fn re_initial_state(c: &CartesianConfig, omega_sq: f64) -> Result<PhaseState> {
    if !(omega_sq >= 0.0 && omega_sq.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "omega^2 = {omega_sq} must be finite and non-negative"
        )));
    }
    Ok(rigid_rotation(c, omega_sq.sqrt()))
}

/// Pairwise term m_i m_j U'(q_i . q_j) (q_j - (q_i . q_j) q_i) acting on i.
fn pair_force(
    q: &Triple,
    m: &MassTriple,
    p: &dyn Potential,
    i: usize,
    j: usize,
) -> Result<Vector3<f64>> {
    let c = q[i].dot(&q[j]);
    let du = p.derivative(c)?;
    Ok((q[j] - q[i] * c) * (m.get(i) * m.get(j) * du))
}

/// Tangential forces on the three bodies.
pub fn force(q: &Triple, m: &MassTriple, p: &dyn Potential) -> Result<Triple> {
    let mut f = [Vector3::zeros(); 3];
    for &(i, j) in PAIRS.iter() {
        f[i] += pair_force(q, m, p, i, j)?;
        f[j] += pair_force(q, m, p, j, i)?;
    }
    Ok(f)
}

/// Largest sum of pairwise force magnitudes on any body, used to scale
/// residuals.
pub fn force_scale(q: &Triple, m: &MassTriple, p: &dyn Potential) -> Result<[f64; 3]> {
    let mut s = [0.0; 3];
    for &(i, j) in PAIRS.iter() {
        s[i] += pair_force(q, m, p, i, j)?.norm();
        s[j] += pair_force(q, m, p, j, i)?.norm();
    }
    Ok(s)
}

/// a_k = F_k / m_k - |v_k|^2 q_k.
pub fn accel(s: &PhaseState, m: &MassTriple, p: &dyn Potential) -> Result<Triple> {
    let f = force(&s.q, m, p)?;
    Ok(std::array::from_fn(|k| {
        f[k] / m.get(k) - s.q[k] * s.v[k].norm_squared()
    }))
}

/// V = sum m_i m_j U(cos sigma_ij).
pub fn potential_energy(q: &Triple, m: &MassTriple, p: &dyn Potential) -> Result<f64> {
    let mut v = 0.0;
    for &(i, j) in PAIRS.iter() {
        v += m.get(i) * m.get(j) * p.value(q[i].dot(&q[j]))?;
    }
    Ok(v)
}

/// K - V.
pub fn energy(s: &PhaseState, m: &MassTriple, p: &dyn Potential) -> Result<f64> {
    let kinetic: f64 = (0..3).map(|k| 0.5 * m.get(k) * s.v[k].norm_squared()).sum();
    Ok(kinetic - potential_energy(&s.q, m, p)?)
}

/// c = sum m q x v.
pub fn angular_momentum(s: &PhaseState, m: &MassTriple) -> Vector3<f64> {
    (0..3).map(|k| s.q[k].cross(&s.v[k]) * m.get(k)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationOptions {
    pub duration: f64,
    pub dt: f64,
    /// Number of stored samples; at least [`MIN_SAMPLES`].
    pub samples: usize,
    /// Expected rigid rotation rate about e_z, if any.
    pub omega: Option<f64>,
}

impl IntegrationOptions {
    pub fn new(duration: f64, dt: f64) -> Self {
        Self {
            duration,
            dt,
            samples: MIN_SAMPLES,
            omega: None,
        }
    }

    pub fn with_omega(mut self, omega: f64) -> Self {
        self.omega = Some(omega);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConservedReport {
    /// max |E(t) - E(0)|.
    pub energy_drift: f64,
    /// max |c(t) - c(0)|.
    pub angular_momentum_drift: f64,
    /// max over pairs and t of |cos sigma_ij(t) - cos sigma_ij(0)|.
    pub shape_drift: f64,
    /// max over bodies and t of |q_k(t) - R_z(omega t) q_k(0)|, when a rate
    /// was given.
    pub rotation_error: Option<f64>,
    pub duration: f64,
    pub dt: f64,
    pub steps: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub q: Triple,
    pub cos: [f64; 3],
    pub energy: f64,
    pub angular_momentum: Vector3<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub final_state: PhaseState,
    pub report: ConservedReport,
}

fn rk4_step(s: &PhaseState, m: &MassTriple, p: &dyn Potential, h: f64) -> Result<PhaseState> {
    let shifted = |base: &PhaseState, dq: &Triple, dv: &Triple, f: f64| PhaseState {
        q: std::array::from_fn(|k| base.q[k] + dq[k] * f),
        v: std::array::from_fn(|k| base.v[k] + dv[k] * f),
        t: base.t + f,
    };
    let k1v = accel(s, m, p)?;
    let k1q = s.v;
    let s2 = shifted(s, &k1q, &k1v, h / 2.0);
    let k2v = accel(&s2, m, p)?;
    let k2q = s2.v;
    let s3 = shifted(s, &k2q, &k2v, h / 2.0);
    let k3v = accel(&s3, m, p)?;
    let k3q = s3.v;
    let s4 = shifted(s, &k3q, &k3v, h);
    let k4v = accel(&s4, m, p)?;
    let k4q = s4.v;
    let mut next = PhaseState {
        q: std::array::from_fn(|k| {
            s.q[k] + (k1q[k] + (k2q[k] + k3q[k]) * 2.0 + k4q[k]) * (h / 6.0)
        }),
        v: std::array::from_fn(|k| {
            s.v[k] + (k1v[k] + (k2v[k] + k3v[k]) * 2.0 + k4v[k]) * (h / 6.0)
        }),
        t: s.t + h,
    };
    next.project();
    Ok(next)
}

fn closest_approach(s: &PhaseState) -> Error {
    let cos = s.cosines();
    let p = (0..3)
        .max_by(|&a, &b| cos[a].abs().total_cmp(&cos[b].abs()))
        .unwrap_or(0);
    let (i, j) = PAIRS[p];
    Error::BlowUp {
        t: s.t,
        i: i + 1,
        j: j + 1,
        cos: cos[p],
    }
}

fn check_collision(s: &PhaseState) -> Result<()> {
    for &(i, j) in PAIRS.iter() {
        let c = s.q[i].dot(&s.q[j]);
        if !(c.abs() < 1.0 - BLOWUP_TOL) {
            return Err(Error::BlowUp {
                t: s.t,
                i: i + 1,
                j: j + 1,
                cos: c,
            });
        }
    }
    Ok(())
}

/// Classical fourth-order Runge-Kutta with projection back onto the
/// constraint manifold after every step. Conservation measures are tracked
/// at every step; `opts.samples` evenly spaced states are stored.
pub fn integrate(
    s0: &PhaseState,
    m: &MassTriple,
    p: &dyn Potential,
    opts: &IntegrationOptions,
) -> Result<Trajectory> {
    if !(opts.dt > 0.0 && opts.dt.is_finite())
        || !(opts.duration >= 0.0 && opts.duration.is_finite())
    {
        return Err(Error::InvalidArgument(format!(
            "need dt > 0 and a finite duration, got dt = {}, T = {}",
            opts.dt, opts.duration
        )));
    }
    let ratio = opts.duration / opts.dt;
    if ratio > MAX_STEPS {
        return Err(Error::InvalidArgument(format!(
            "T/dt = {ratio:e} exceeds {MAX_STEPS:e} steps"
        )));
    }
    let steps = (ratio.ceil() as u64).max(1);
    let h = opts.duration / steps as f64;
    let wanted = opts.samples.max(MIN_SAMPLES) as u64;
    let stride = (steps / wanted).max(1);

    let mut s = *s0;
    s.project();
    check_collision(&s)?;
    let e0 = energy(&s, m, p)?;
    let c0 = angular_momentum(&s, m);
    let cos0 = s.cosines();
    let q0 = s.q;

    let mut report = ConservedReport {
        energy_drift: 0.0,
        angular_momentum_drift: 0.0,
        shape_drift: 0.0,
        rotation_error: opts.omega.map(|_| 0.0),
        duration: opts.duration,
        dt: h,
        steps,
    };
    let mut samples = Vec::with_capacity((steps / stride + 2) as usize);
    let sample = |s: &PhaseState, e: f64, c: Vector3<f64>| Sample {
        t: s.t,
        q: s.q,
        cos: s.cosines(),
        energy: e,
        angular_momentum: c,
    };
    samples.push(sample(&s, e0, c0));

    for n in 1..=steps {
        s = rk4_step(&s, m, p, h).map_err(|e| match e {
            Error::Domain(_) => closest_approach(&s),
            other => other,
        })?;
        s.t = n as f64 * h;
        check_collision(&s)?;
        let e = energy(&s, m, p)?;
        let c = angular_momentum(&s, m);
        report.energy_drift = report.energy_drift.max((e - e0).abs());
        report.angular_momentum_drift = report.angular_momentum_drift.max((c - c0).norm());
        let cos = s.cosines();
        for k in 0..3 {
            report.shape_drift = report.shape_drift.max((cos[k] - cos0[k]).abs());
        }
        if let (Some(omega), Some(err)) = (opts.omega, report.rotation_error.as_mut()) {
            let r = Rotation3::from_axis_angle(&Vector3::z_axis(), omega * s.t);
            for k in 0..3 {
                *err = err.max((s.q[k] - r * q0[k]).norm());
            }
        }
        if n % stride == 0 || n == steps {
            samples.push(sample(&s, e, c));
        }
    }
    Ok(Trajectory {
        samples,
        final_state: s,
        report,
    })
}

/// min(1e-3, period / 1e4), or 1e-3 without a period.
pub fn default_dt(period: Option<f64>) -> f64 {
    match period {
        Some(t) if t > 0.0 && t.is_finite() => (t / 1e4).min(1e-3),
        _ => 1e-3,
    }
}

/// Integrates a configuration launched as a rigid rotation for a number of
/// rotation periods. A fixed point (omega^2 = 0) runs for `periods` time
/// units instead.
pub fn verify_rigid_rotation(
    c: &CartesianConfig,
    m: &MassTriple,
    p: &dyn Potential,
    omega_sq: f64,
    periods: f64,
    dt: Option<f64>,
) -> Result<Trajectory> {
    let s0 = re_initial_state(c, omega_sq)?;
    let omega = omega_sq.sqrt();
    let period = (omega > 0.0).then(|| std::f64::consts::TAU / omega);
    let duration = period.map_or(periods, |t| periods * t);
    let dt = dt.unwrap_or_else(|| default_dt(period));
    integrate(
        &s0,
        m,
        p,
        &IntegrationOptions::new(duration, dt).with_omega(omega),
    )
}

pub const TRAJECTORY_HEADER: &str =
    "t,q1x,q1y,q1z,q2x,q2y,q2z,q3x,q3y,q3z,cos_s12,cos_s23,cos_s31,E,cx,cy,cz";

pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, mut w: W) -> io::Result<()> {
    writeln!(w, "{TRAJECTORY_HEADER}")?;
    for s in &traj.samples {
        let mut fields = vec![s.t];
        for q in &s.q {
            fields.extend_from_slice(&[q.x, q.y, q.z]);
        }
        fields.extend_from_slice(&s.cos);
        fields.push(s.energy);
        fields.extend_from_slice(&[
            s.angular_momentum.x,
            s.angular_momentum.y,
            s.angular_momentum.z,
        ]);
        let line: Vec<String> = fields.iter().map(|x| format!("{x:.11e}")).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}
