//! Euler relative equilibria: three bodies on a meridian that rotates about
//! an axis in its own plane.
//!
//! Bodies sit at extended polar angles theta_k in [-pi, pi] on the meridian
//! phi = 0. The shape is encoded by the offsets a = theta2 - theta1 and
//! x = theta3 - theta1. With F_ij = m_i m_j sin(theta_ij) U'(cos theta_ij)
//! and G_ij = m_i m_j sin(2 theta_ij), a shape rotates rigidly iff the
//! columns of
//!
//! ```text
//! | G12 - G23   G31 - G12 |
//! | F12 - F23   F31 - F12 |
//! ```
//!
//! are parallel, the ratio F/G being s omega^2 / (2A) with A^2 = D the
//! discriminant and s = +-1 the branch picking the rotation axis.

pub mod contour;

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    to_cartesian, wrap_angle, CartesianConfig, MassTriple, ShapeAngles, SphericalConfig, PAIRS,
};
use crate::potential::{MeridianKernel, Potential};

pub use contour::{contour_scan, ContourPoint, GridSpec, Polyline, PolylineKind};

/// D below this is treated as zero.
pub const D_TOL: f64 = 1e-12;
/// Matrix entries below this count as vanishing.
pub const ENTRY_TOL: f64 = 1e-10;
const EOM_TOL: f64 = 1e-8;

/// Relative placement of three bodies on a meridian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeridianShape {
    /// theta2 - theta1.
    pub a: f64,
    /// theta3 - theta1.
    pub x: f64,
}

impl MeridianShape {
    /// Rejects coincident and antipodal pairs.
    pub fn new(a: f64, x: f64) -> Result<Self> {
        if !a.is_finite() || !x.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "non-finite offsets ({a}, {x})"
            )));
        }
        let sh = Self { a, x };
        for (p, t) in sh.pair_angles().iter().enumerate() {
            if 1.0 - t.cos().abs() <= 1e-12 {
                let (i, j) = PAIRS[p];
                let what = if t.cos() > 0.0 {
                    "coincide"
                } else {
                    "are antipodal"
                };
                return Err(Error::ExcludedShape(format!(
                    "bodies {} and {} {what} (a = {a}, x = {x})",
                    i + 1,
                    j + 1
                )));
            }
        }
        Ok(sh)
    }

    /// Shape from the midpoint-relative coordinate y = x - a/2.
    pub fn from_y(a: f64, y: f64) -> Result<Self> {
        Self::new(a, y + a / 2.0)
    }

    pub fn y(&self) -> f64 {
        self.x - self.a / 2.0
    }

    /// theta_k - theta_1.
    pub fn offsets(&self) -> [f64; 3] {
        [0.0, self.a, self.x]
    }

    /// (theta12, theta23, theta31) with theta_ij = theta_i - theta_j.
    pub fn pair_angles(&self) -> [f64; 3] {
        [-self.a, self.a - self.x, self.x]
    }

    /// Arc angles in [0, pi] between the bodies.
    pub fn arc_angles(&self) -> [f64; 3] {
        self.pair_angles().map(|t| t.cos().clamp(-1.0, 1.0).acos())
    }

    pub fn shape_angles(&self) -> Result<ShapeAngles> {
        let c = self.pair_angles().map(f64::cos);
        ShapeAngles::from_cosines(c[0], c[1], c[2])
    }

    /// Places a collinear triangle with arcs (sigma12, sigma23, sigma31)
    /// on a meridian.
    pub fn from_arcs(sigma: [f64; 3]) -> Result<Self> {
        let a = sigma[0];
        let arc = |t: f64| t.cos().clamp(-1.0, 1.0).acos();
        let x = [sigma[2], -sigma[2]]
            .into_iter()
            .min_by(|u, v| {
                (arc(u - a) - sigma[1])
                    .abs()
                    .total_cmp(&(arc(v - a) - sigma[1]).abs())
            })
            .unwrap_or(sigma[2]);
        if (arc(x - a) - sigma[1]).abs() > 1e-6 {
            return Err(Error::InconsistentShape(format!(
                "arcs {sigma:?} do not place three bodies on one great circle"
            )));
        }
        Self::new(a, x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BranchSign {
    Plus,
    Minus,
}

impl BranchSign {
    pub fn value(self) -> f64 {
        match self {
            BranchSign::Plus => 1.0,
            BranchSign::Minus => -1.0,
        }
    }

    pub fn from_sign(x: f64) -> Self {
        if x < 0.0 {
            BranchSign::Minus
        } else {
            BranchSign::Plus
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            BranchSign::Plus => BranchSign::Minus,
            BranchSign::Minus => BranchSign::Plus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AngularVelocity {
    Rotating {
        omega_sq: f64,
    },
    /// omega = 0: the bodies are in equilibrium at rest.
    FixedPoint,
    /// Every entry of the condition matrix vanishes and omega is free.
    Undetermined,
}

impl AngularVelocity {
    /// omega^2, zero for a fixed point and None when undetermined.
    pub fn omega_sq(&self) -> Option<f64> {
        match *self {
            AngularVelocity::Rotating { omega_sq } => Some(omega_sq),
            AngularVelocity::FixedPoint => Some(0.0),
            AngularVelocity::Undetermined => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerSolution {
    /// Extended polar angles in (-pi, pi].
    pub theta: [f64; 3],
    pub s: Option<BranchSign>,
    pub omega: AngularVelocity,
    pub discriminant: f64,
    /// Relative residual of the meridian equations of motion.
    pub residual: f64,
}

impl EulerSolution {
    pub fn positions(&self) -> CartesianConfig {
        to_cartesian(&SphericalConfig {
            theta: self.theta,
            phi: [0.0; 3],
            convention: crate::geometry::AngleConvention::MeridianExtended,
        })
    }

    pub fn shape(&self) -> MeridianShape {
        MeridianShape {
            a: wrap_angle(self.theta[1] - self.theta[0]),
            x: wrap_angle(self.theta[2] - self.theta[0]),
        }
    }
}

/// D = sum m_l^2 + 2 sum m_i m_j cos(2 theta_ij).
pub fn discriminant(m: &MassTriple, sh: &MeridianShape) -> f64 {
    let t = sh.pair_angles();
    let sq: f64 = m.as_array().iter().map(|x| x * x).sum();
    let cross: f64 = PAIRS
        .iter()
        .enumerate()
        .map(|(p, &(i, j))| m.get(i) * m.get(j) * (2.0 * t[p]).cos())
        .sum();
    sq + 2.0 * cross
}

/// Polar angles for branch s, chosen so that sum m_k sin(2 theta_k) = 0.
pub fn theta_from_shape(m: &MassTriple, sh: &MeridianShape, s: BranchSign) -> Result<[f64; 3]> {
    let d = discriminant(m, sh);
    if d <= D_TOL {
        return Err(Error::DegenerateD(d));
    }
    let off = sh.offsets();
    // sum_j m_j e^{2 i theta_1j}
    let (mut re, mut im) = (0.0, 0.0);
    for (k, &o) in off.iter().enumerate() {
        re += m.get(k) * (-2.0 * o).cos();
        im += m.get(k) * (-2.0 * o).sin();
    }
    let mut theta1 = 0.5 * im.atan2(re);
    if s == BranchSign::Minus {
        theta1 += FRAC_PI_2;
    }
    Ok(off.map(|o| wrap_angle(theta1 + o)))
}

/// (F_ij, G_ij) for the pair at theta_i - theta_j = `theta_ij`.
pub fn fg(mi: f64, mj: f64, theta_ij: f64, p: &dyn Potential) -> Result<(f64, f64)> {
    let du = MeridianKernel::new(p).eval(theta_ij)?;
    Ok((
        mi * mj * theta_ij.sin() * du,
        mi * mj * (2.0 * theta_ij).sin(),
    ))
}

/// Entries of the condition matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetMatrix {
    /// (G12 - G23, G31 - G12).
    pub g: [f64; 2],
    /// (F12 - F23, F31 - F12).
    pub f: [f64; 2],
}

impl DetMatrix {
    pub fn det(&self) -> f64 {
        self.g[0] * self.f[1] - self.g[1] * self.f[0]
    }

    /// |G row| |F row|, the natural size of the determinant.
    pub fn scale(&self) -> f64 {
        self.g[0].hypot(self.g[1]) * self.f[0].hypot(self.f[1])
    }

    pub fn max_entry(&self) -> f64 {
        self.g
            .iter()
            .chain(&self.f)
            .fold(0.0f64, |a, b| a.max(b.abs()))
    }
}

pub fn det_matrix(m: &MassTriple, sh: &MeridianShape, p: &dyn Potential) -> Result<DetMatrix> {
    let t = sh.pair_angles();
    let mut f = [0.0; 3];
    let mut g = [0.0; 3];
    for (k, &(i, j)) in PAIRS.iter().enumerate() {
        (f[k], g[k]) = fg(m.get(i), m.get(j), t[k], p)?;
    }
    Ok(DetMatrix {
        g: [g[0] - g[1], g[2] - g[0]],
        f: [f[0] - f[1], f[2] - f[0]],
    })
}

/// Determinant of the condition matrix; requires D > 0.
pub fn det_condition(m: &MassTriple, sh: &MeridianShape, p: &dyn Potential) -> Result<f64> {
    let d = discriminant(m, sh);
    if d <= D_TOL {
        return Err(Error::DegenerateD(d));
    }
    Ok(det_matrix(m, sh, p)?.det())
}

/// Per-body residuals (omega^2/2) m_k sin(2 theta_k) - sum_j F_kj, and the
/// size of the largest term.
pub fn meridian_residuals(
    m: &MassTriple,
    theta: &[f64; 3],
    p: &dyn Potential,
    omega_sq: f64,
) -> Result<([f64; 3], f64)> {
    let mut r = [0.0; 3];
    let mut scale: f64 = 0.0;
    for k in 0..3 {
        let lhs = 0.5 * omega_sq * m.get(k) * (2.0 * theta[k]).sin();
        let mut rhs = 0.0;
        let mut size = lhs.abs();
        for j in 0..3 {
            if j != k {
                let (fkj, _) = fg(m.get(k), m.get(j), theta[k] - theta[j], p)?;
                rhs += fkj;
                size += fkj.abs();
            }
        }
        r[k] = lhs - rhs;
        scale = scale.max(size);
    }
    Ok((r, scale))
}

fn relative_residual(
    m: &MassTriple,
    theta: &[f64; 3],
    p: &dyn Potential,
    omega_sq: f64,
) -> Result<f64> {
    let (r, scale) = meridian_residuals(m, theta, p, omega_sq)?;
    Ok(r.iter().fold(0.0f64, |a, b| a.max(b.abs())) / scale.max(1.0))
}

/// Reads off omega^2 and s from a shape satisfying the determinant
/// condition. `tol` bounds |det| relative to the size of its factors.
pub fn solve_omega(
    m: &MassTriple,
    sh: &MeridianShape,
    p: &dyn Potential,
    tol: f64,
) -> Result<EulerSolution> {
    let d = discriminant(m, sh);
    if d <= D_TOL {
        return Err(Error::DegenerateD(d));
    }
    let mat = det_matrix(m, sh, p)?;
    let det = mat.det();
    if det.abs() > tol * mat.scale().max(1.0) {
        return Err(Error::not_an_re(
            "condition determinant does not vanish",
            det,
        ));
    }
    let amp = d.sqrt();
    let eom_tol = EOM_TOL.max(10.0 * tol);

    if mat.max_entry() <= ENTRY_TOL {
        let theta = theta_from_shape(m, sh, BranchSign::Plus)?;
        return Ok(EulerSolution {
            theta,
            s: None,
            omega: AngularVelocity::Undetermined,
            discriminant: d,
            residual: 0.0,
        });
    }
    let row = if mat.g[0].abs() >= mat.g[1].abs() {
        0
    } else {
        1
    };
    if mat.g[row].abs() < ENTRY_TOL {
        return Err(Error::not_an_re(
            "G differences vanish while F differences do not",
            mat.f[0].abs().max(mat.f[1].abs()),
        ));
    }
    // k = s omega^2 / (2A)
    let k = mat.f[row] / mat.g[row];
    let force_size = mat.f[0].abs().max(mat.f[1].abs());
    let (s, omega) = if k.abs() * mat.g[row].abs() <= 1e-12 * force_size.max(1.0) || k == 0.0 {
        (None, AngularVelocity::FixedPoint)
    } else {
        (
            Some(BranchSign::from_sign(k)),
            AngularVelocity::Rotating {
                omega_sq: 2.0 * amp * k.abs(),
            },
        )
    };
    let theta = theta_from_shape(m, sh, s.unwrap_or(BranchSign::Plus))?;
    let omega_sq = omega.omega_sq().unwrap_or(0.0);
    let residual = relative_residual(m, &theta, p, omega_sq)?;
    if residual > eom_tol {
        return Err(Error::not_an_re(
            "meridian equations of motion not satisfied",
            residual,
        ));
    }
    Ok(EulerSolution {
        theta,
        s,
        omega,
        discriminant: d,
        residual,
    })
}

/// Solves the meridian equations directly when D = 0.
///
/// The right-hand side R_k = sum_j F_kj depends on the shape only, while
/// w_k(theta1) = m_k sin(2 theta_k) sweeps an ellipse in the plane
/// sum w = 0 as theta1 runs over [0, pi). Solutions are the directions where
/// w is a positive multiple of R; omega^2/2 is that multiple.
pub fn solve_degenerate(
    m: &MassTriple,
    sh: &MeridianShape,
    p: &dyn Potential,
) -> Result<Vec<EulerSolution>> {
    let d = discriminant(m, sh);
    let off = sh.offsets();
    let mut rhs = [0.0; 3];
    let mut size: f64 = 0.0;
    for k in 0..3 {
        for j in 0..3 {
            if j != k {
                let (f, _) = fg(m.get(k), m.get(j), off[k] - off[j], p)?;
                rhs[k] += f;
                size = size.max(f.abs());
            }
        }
    }
    let rnorm = rhs.iter().map(|x| x * x).sum::<f64>().sqrt();
    if rnorm <= ENTRY_TOL * size.max(1.0) {
        let theta = canonical_meridian(off, 0.0);
        let residual = relative_residual(m, &theta, p, 0.0)?;
        return Ok(vec![EulerSolution {
            theta,
            s: None,
            omega: AngularVelocity::FixedPoint,
            discriminant: d,
            residual,
        }]);
    }
    let w =
        |t1: f64| -> [f64; 3] { std::array::from_fn(|k| m.get(k) * (2.0 * (t1 + off[k])).sin()) };
    // component of w x R along (1, 1, 1)
    let h = |t1: f64| -> f64 {
        let v = w(t1);
        let c = [
            v[1] * rhs[2] - v[2] * rhs[1],
            v[2] * rhs[0] - v[0] * rhs[2],
            v[0] * rhs[1] - v[1] * rhs[0],
        ];
        c[0] + c[1] + c[2]
    };
    let n = 720;
    let mut roots = Vec::new();
    let mut prev = (0.0, h(0.0));
    for i in 1..=n {
        let t = PI * i as f64 / n as f64;
        let cur = (t, h(t));
        if prev.1 == 0.0 {
            roots.push(prev.0);
        } else if prev.1.signum() != cur.1.signum() && cur.1 != 0.0 {
            roots.push(bisect(&h, prev.0, cur.0));
        }
        prev = cur;
    }
    let mut out = Vec::new();
    for t1 in roots {
        let v = w(t1);
        let vv: f64 = v.iter().map(|x| x * x).sum();
        let vr: f64 = v.iter().zip(&rhs).map(|(a, b)| a * b).sum();
        if vv <= 1e-24 || vr <= 0.0 {
            continue;
        }
        let omega_sq = 2.0 * vr / vv;
        let theta = canonical_meridian(off, t1);
        let residual = relative_residual(m, &theta, p, omega_sq)?;
        if residual > EOM_TOL {
            continue;
        }
        out.push(EulerSolution {
            theta,
            s: None,
            omega: AngularVelocity::Rotating { omega_sq },
            discriminant: d,
            residual,
        });
    }
    if out.is_empty() {
        return Err(Error::NoSolution(format!(
            "no rotation rate balances the forces for degenerate shape a = {}, x = {}",
            sh.a, sh.x
        )));
    }
    Ok(out)
}

/// Among theta1 and theta1 + pi, the placement with the smallest largest
/// |theta_k|.
fn canonical_meridian(off: [f64; 3], t1: f64) -> [f64; 3] {
    let place = |t: f64| off.map(|o| wrap_angle(t + o));
    let spread = |th: &[f64; 3]| th.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let a = place(t1);
    let b = place(t1 + PI);
    if spread(&b) + 1e-12 < spread(&a) {
        b
    } else {
        a
    }
}

pub(crate) fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Dispatches to [`solve_omega`] or, when D vanishes, to the first
/// solution of [`solve_degenerate`].
pub fn solve_euler(
    m: &MassTriple,
    sh: &MeridianShape,
    p: &dyn Potential,
    tol: f64,
) -> Result<EulerSolution> {
    match solve_omega(m, sh, p, tol) {
        Err(Error::DegenerateD(_)) => {
            let mut all = solve_degenerate(m, sh, p)?;
            Ok(all.remove(0))
        }
        other => other,
    }
}

/// Shapes with D = 0: cos(2 theta_ij) = (m_k^2 - m_i^2 - m_j^2) / (2 m_i m_j).
/// They exist only when every mass is smaller than the sum of the other two.
pub fn degenerate_shapes(m: &MassTriple) -> Vec<MeridianShape> {
    let [m1, m2, m3] = m.as_array();
    let c12 = (m3 * m3 - m1 * m1 - m2 * m2) / (2.0 * m1 * m2);
    if !(c12.abs() < 1.0) || m1 >= m2 + m3 || m2 >= m1 + m3 || m3 >= m1 + m2 {
        return Vec::new();
    }
    let alpha = c12.acos();
    let mut out = Vec::new();
    for a in [alpha / 2.0, PI - alpha / 2.0] {
        // m1 + m2 e^{2ia} + m3 e^{2ix} = 0
        let re = -(m1 + m2 * (2.0 * a).cos()) / m3;
        let im = -(m2 * (2.0 * a).sin()) / m3;
        let x0 = 0.5 * im.atan2(re);
        for x in [x0, x0 + PI, x0 - PI] {
            if x > -PI && x <= PI {
                if let Ok(sh) = MeridianShape::new(a, x) {
                    if !out.iter().any(|o: &MeridianShape| {
                        (o.a - sh.a).abs() < 1e-12 && (o.x - sh.x).abs() < 1e-12
                    }) {
                        out.push(sh);
                    }
                }
            }
        }
    }
    out
}

/// f(theta) = 2 (1/|sin 2theta|^3 + 1/(sin^2 theta sin 2theta)).
pub fn isosceles_f(theta: f64) -> f64 {
    let s2 = (2.0 * theta).sin();
    2.0 * (1.0 / s2.abs().powi(3) + 1.0 / (theta.sin().powi(2) * s2))
}

/// Isosceles solution for unit masses and the cotangent potential, with the
/// outer bodies at angular distance `theta` from the middle body 3.
///
/// Below 2pi/3 the middle body sits on the rotation axis and omega^2 =
/// f(theta); at 2pi/3 the shape is a fixed point; above it the middle body
/// is on the equator and omega^2 = -f(theta).
pub fn equal_mass_isosceles(theta: f64) -> Result<EulerSolution> {
    if !(theta > 0.0 && theta < PI) {
        return Err(Error::InvalidArgument(format!(
            "theta = {theta} outside (0, pi)"
        )));
    }
    if (theta - FRAC_PI_2).abs() <= 1e-9 {
        return Err(Error::ExcludedShape(
            "outer bodies antipodal at theta = pi/2".into(),
        ));
    }
    let m = MassTriple::equal(1.0)?;
    let p = crate::potential::Cotangent;
    let critical = 2.0 * PI / 3.0;
    let (theta3, omega) = if (theta - critical).abs() <= 1e-12 {
        (0.0, AngularVelocity::FixedPoint)
    } else if theta < critical {
        (
            0.0,
            AngularVelocity::Rotating {
                omega_sq: isosceles_f(theta),
            },
        )
    } else {
        (
            FRAC_PI_2,
            AngularVelocity::Rotating {
                omega_sq: -isosceles_f(theta),
            },
        )
    };
    let th = [
        wrap_angle(theta3 - theta),
        wrap_angle(theta3 + theta),
        theta3,
    ];
    let sh = MeridianShape::new(2.0 * theta, theta)?;
    let d = discriminant(&m, &sh);
    let sum_cos: f64 = th.iter().map(|t| (2.0 * t).cos()).sum();
    let s = (d > D_TOL && !matches!(omega, AngularVelocity::FixedPoint))
        .then(|| BranchSign::from_sign(sum_cos));
    let residual = relative_residual(&m, &th, &p, omega.omega_sq().unwrap_or(0.0))?;
    if residual > EOM_TOL {
        return Err(Error::not_an_re(
            "isosceles branch failed the equations of motion",
            residual,
        ));
    }
    Ok(EulerSolution {
        theta: th,
        s,
        omega,
        discriminant: d,
        residual,
    })
}

/// cos(2y) on the scalene curve for unit masses and the cotangent potential,
/// where y = x - a/2 and |y| < a/2. The curve exists for a in (pi/2, a_c].
pub fn equal_mass_scalene_cos2y(a: f64) -> Result<f64> {
    let ca = a.cos();
    if ca.abs() < 1e-12 {
        return Err(Error::OutOfBranch("a = pi/2 is singular".into()));
    }
    let c2a = (2.0 * a).cos();
    let radicand = c2a * c2a - 4.0 * c2a - 4.0;
    if radicand < 0.0 {
        return Err(Error::OutOfBranch(format!(
            "negative radicand {radicand} at a = {a}"
        )));
    }
    let v = ca + (a.sin().powi(2) / ca) * (c2a + radicand.sqrt());
    if !(-1.0..=1.0 + 1e-9).contains(&v) {
        return Err(Error::OutOfBranch(format!("cos(2y) = {v} at a = {a}")));
    }
    let v = v.min(1.0);
    // |y| < a/2 keeps the third body between the other two
    if v.acos() / 2.0 >= a / 2.0 {
        return Err(Error::OutOfBranch(format!("a = {a} gives |y| >= a/2")));
    }
    Ok(v)
}

/// Point of the scalene curve at `a`, with y of the requested sign.
pub fn equal_mass_scalene_shape(a: f64, positive_y: bool) -> Result<MeridianShape> {
    let y = equal_mass_scalene_cos2y(a)?.acos() / 2.0;
    MeridianShape::from_y(a, if positive_y { y } else { -y })
}

/// Largest angle where the scalene curve meets the isosceles line y = 0:
/// cos(a_c) = -1 + ((1 + sqrt78/9)^(1/3) + (1 - sqrt78/9)^(1/3)) / 2.
pub fn critical_angle_ac() -> f64 {
    let r = 78f64.sqrt() / 9.0;
    let c = -1.0 + 0.5 * ((1.0 + r).cbrt() + (1.0 - r).cbrt());
    c.acos()
}

/// P(t) = sin(t) |sin(t)|.
fn p_fn(t: f64) -> f64 {
    t.sin() * t.sin().abs()
}

/// Numerator g of the cotangent determinant, for any masses:
/// det = m1 m2 m3 g / (P12 P23 P31) with P(t) = sin t |sin t|.
pub fn cotangent_g(m: &MassTriple, sh: &MeridianShape) -> f64 {
    let th = sh.offsets();
    let t = |i: usize, j: usize| th[i] - th[j];
    [(0, 1, 2), (1, 2, 0), (2, 0, 1)]
        .iter()
        .map(|&(i, j, k)| {
            m.get(k)
                * p_fn(t(i, j))
                * (p_fn(t(k, i)) * (2.0 * t(k, i)).sin() - p_fn(t(j, k)) * (2.0 * t(j, k)).sin())
        })
        .sum()
}

/// The cotangent determinant evaluated through [`cotangent_g`].
pub fn det_via_g(m: &MassTriple, sh: &MeridianShape) -> f64 {
    let [t12, t23, t31] = sh.pair_angles();
    let prod: f64 = m.as_array().iter().product();
    prod * cotangent_g(m, sh) / (p_fn(t12) * p_fn(t23) * p_fn(t31))
}

/// Unit-mass numerator in terms of (a, x).
pub fn equal_mass_g(a: f64, x: f64) -> f64 {
    p_fn(x) * ((2.0 * x).sin() + (2.0 * a).sin()) * (p_fn(x - a) - p_fn(a))
        - p_fn(x - a) * ((2.0 * a).sin() - (2.0 * (x - a)).sin()) * (p_fn(a) + p_fn(x))
}

/// Small-angle limit of [`cotangent_g`] divided by eps^5 for body positions
/// r on a line: 2 sum m_k rho_ij (rho_ki r_ki - rho_jk r_jk), rho = r|r|.
pub fn newtonian_g(m: &MassTriple, r: [f64; 3]) -> f64 {
    let d = |i: usize, j: usize| r[i] - r[j];
    let rho = |t: f64| t * t.abs();
    2.0 * [(0, 1, 2), (1, 2, 0), (2, 0, 1)]
        .iter()
        .map(|&(i, j, k)| {
            m.get(k) * rho(d(i, j)) * (rho(d(k, i)) * d(k, i) - rho(d(j, k)) * d(j, k))
        })
        .sum::<f64>()
}

/// Euler's quintic for collinear Newtonian central configurations, with
/// bodies at 0, 1 and 1 + z.
pub fn euler_quintic(m: &MassTriple, z: f64) -> f64 {
    let [m1, m2, m3] = m.as_array();
    (m1 + m2) * z.powi(5) + (3.0 * m1 + 2.0 * m2) * z.powi(4) + (3.0 * m1 + m2) * z.powi(3)
        - (m2 + 3.0 * m3) * z * z
        - (2.0 * m2 + 3.0 * m3) * z
        - (m2 + m3)
}

/// Angle window helper for scans: maps t to [-pi, pi).
pub(crate) fn wrap_periodic(t: f64) -> f64 {
    (t + PI).rem_euclid(TAU) - PI
}
