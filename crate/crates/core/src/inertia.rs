//! Inertia tensor, the shape-space matrix J and the bridge between them.
//!
//! `I = M E - sum m q q^T` lives in configuration space; `J` is built from
//! masses and arc angles only. The two are similar, and an eigenvector of
//! `I` (a candidate rotation axis) maps to an eigenvector of `J` through the
//! weighted cosines `sqrt(m_k) cos(theta_k)`.

use std::f64::consts::TAU;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CartesianConfig, MassTriple, ShapeAngles, PAIRS};

/// Eigenvalue spread beyond which the closed form hands over to Jacobi.
const SPREAD_LIMIT: f64 = 1e12;
const DEGENERACY_REL: f64 = 1e-9;

/// Symmetric 3x3 matrix stored as (xx, yy, zz, xy, yz, xz).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix3 {
    pub xx: f64,
    pub yy: f64,
    pub zz: f64,
    pub xy: f64,
    pub yz: f64,
    pub xz: f64,
}

impl SymMatrix3 {
    pub fn new(xx: f64, yy: f64, zz: f64, xy: f64, yz: f64, xz: f64) -> Self {
        Self {
            xx,
            yy,
            zz,
            xy,
            yz,
            xz,
        }
    }

    pub fn diagonal(d: [f64; 3]) -> Self {
        Self::new(d[0], d[1], d[2], 0.0, 0.0, 0.0)
    }

    pub fn scaled_identity(s: f64) -> Self {
        Self::diagonal([s; 3])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match (i.min(j), i.max(j)) {
            (0, 0) => self.xx,
            (1, 1) => self.yy,
            (2, 2) => self.zz,
            (0, 1) => self.xy,
            (1, 2) => self.yz,
            (0, 2) => self.xz,
            _ => panic!("index ({i}, {j}) out of range"),
        }
    }

    pub fn to_array(&self) -> [[f64; 3]; 3] {
        std::array::from_fn(|i| std::array::from_fn(|j| self.get(i, j)))
    }

    fn from_fn(f: impl Fn(usize, usize) -> f64) -> Self {
        Self::new(f(0, 0), f(1, 1), f(2, 2), f(0, 1), f(1, 2), f(0, 2))
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy + self.zz
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        (self.xx * self.xx
            + self.yy * self.yy
            + self.zz * self.zz
            + 2.0 * (self.xy * self.xy + self.yz * self.yz + self.xz * self.xz))
            .sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        [self.xx, self.yy, self.zz, self.xy, self.yz, self.xz]
            .iter()
            .fold(0.0, |a, b| a.max(b.abs()))
    }

    pub fn determinant(&self) -> f64 {
        self.xx * (self.yy * self.zz - self.yz * self.yz)
            - self.xy * (self.xy * self.zz - self.yz * self.xz)
            + self.xz * (self.xy * self.yz - self.yy * self.xz)
    }

    pub fn mul_vec(&self, v: &Vector3<f64>) -> Vector3<f64> {
        Vector3::new(
            self.xx * v.x + self.xy * v.y + self.xz * v.z,
            self.xy * v.x + self.yy * v.y + self.yz * v.z,
            self.xz * v.x + self.yz * v.y + self.zz * v.z,
        )
    }

    /// v^T A v.
    pub fn quadratic_form(&self, v: &Vector3<f64>) -> f64 {
        v.dot(&self.mul_vec(v))
    }

    pub fn shifted(&self, s: f64) -> Self {
        Self::new(
            self.xx - s,
            self.yy - s,
            self.zz - s,
            self.xy,
            self.yz,
            self.xz,
        )
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(
            self.xx * s,
            self.yy * s,
            self.zz * s,
            self.xy * s,
            self.yz * s,
            self.xz * s,
        )
    }

    fn row(&self, i: usize) -> Vector3<f64> {
        Vector3::new(self.get(i, 0), self.get(i, 1), self.get(i, 2))
    }
}

/// Eigen-decomposition of a symmetric 3x3 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spectrum {
    /// Eigenvalues in ascending order.
    pub lambda: [f64; 3],
    /// Orthonormal, right-handed eigenvectors matching `lambda`.
    pub vectors: [Vector3<f64>; 3],
    /// Degeneracy of the pairs (0,1), (1,2), (0,2).
    pub degenerate: [bool; 3],
}

impl Spectrum {
    pub fn is_degenerate(&self) -> bool {
        self.degenerate.iter().any(|&d| d)
    }

    pub fn is_triply_degenerate(&self) -> bool {
        self.degenerate.iter().all(|&d| d)
    }

    /// Sum of lambda_a e_a e_a^T.
    pub fn reconstruct(&self) -> SymMatrix3 {
        SymMatrix3::from_fn(|i, j| {
            (0..3)
                .map(|a| self.lambda[a] * self.vectors[a][i] * self.vectors[a][j])
                .sum()
        })
    }
}

/// Eigenvalues and eigenvectors of a symmetric 3x3 matrix.
///
/// Eigenvalues come from the trigonometric solution of the characteristic
/// cubic, each polished by one Newton step. The eigenvector of the best
/// separated eigenvalue is taken from cross products of rows of `A - lambda`,
/// the remaining two from the 2x2 problem on its orthogonal complement.
/// Matrices whose eigenvalue magnitudes spread over more than twelve decades
/// go through cyclic Jacobi instead.
///
/// Sign convention: the first two eigenvectors have their largest-magnitude
/// component positive, the third is their cross product.
pub fn eigen_sym3(a: &SymMatrix3) -> Spectrum {
    let scale = a.max_abs();
    if scale == 0.0 || !scale.is_finite() {
        return finish(a, [Vector3::x(), Vector3::y(), Vector3::z()]);
    }
    let b = a.scaled(1.0 / scale);
    let vectors = match closed_form(&b) {
        Some(v) => v,
        None => jacobi(&b),
    };
    finish(a, vectors)
}

fn closed_form(b: &SymMatrix3) -> Option<[Vector3<f64>; 3]> {
    let q = b.trace() / 3.0;
    let c = b.shifted(q);
    let p2 =
        (c.xx * c.xx + c.yy * c.yy + c.zz * c.zz + 2.0 * (c.xy * c.xy + c.yz * c.yz + c.xz * c.xz))
            / 6.0;
    if p2 <= 1e-30 {
        return Some([Vector3::x(), Vector3::y(), Vector3::z()]);
    }
    let p = p2.sqrt();
    let r = (c.scaled(1.0 / p).determinant() / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let hi = q + 2.0 * p * phi.cos();
    let lo = q + 2.0 * p * (phi + TAU / 3.0).cos();
    let mid = 3.0 * q - hi - lo;
    let lam = [lo, mid, hi].map(|l| newton_polish(b, l));

    let (lmax, lmin) = (
        lam.iter().fold(0.0f64, |m, l| m.max(l.abs())),
        lam.iter().fold(f64::INFINITY, |m, l| m.min(l.abs())),
    );
    if lmin == 0.0 || lmax / lmin > SPREAD_LIMIT {
        return None;
    }

    // The eigenvalue farthest from the other two has a well-conditioned vector.
    let isolated = if hi - mid >= mid - lo { lam[2] } else { lam[0] };
    let v = null_vector(&b.shifted(isolated))?;
    let (u, w) = complete_frame(&v);
    let m00 = b.quadratic_form(&u);
    let m11 = b.quadratic_form(&w);
    let m01 = u.dot(&b.mul_vec(&w));
    let angle = 0.5 * (2.0 * m01).atan2(m00 - m11);
    let (s, co) = angle.sin_cos();
    let e1 = u * co + w * s;
    let e2 = w * co - u * s;
    Some([v, e1, e2])
}

fn newton_polish(b: &SymMatrix3, l: f64) -> f64 {
    let s = b.shifted(l);
    let f = s.determinant();
    let minors =
        (s.yy * s.zz - s.yz * s.yz) + (s.xx * s.zz - s.xz * s.xz) + (s.xx * s.yy - s.xy * s.xy);
    let df = -minors;
    if df.abs() < 1e-8 {
        return l;
    }
    let step = f / df;
    if step.abs() > 1e-6 * (1.0 + l.abs()) {
        l
    } else {
        l - step
    }
}

/// Unit vector spanning the kernel of a rank-2 symmetric matrix.
fn null_vector(s: &SymMatrix3) -> Option<Vector3<f64>> {
    let rows = [s.row(0), s.row(1), s.row(2)];
    let candidates = [
        rows[0].cross(&rows[1]),
        rows[0].cross(&rows[2]),
        rows[1].cross(&rows[2]),
    ];
    let best = candidates
        .iter()
        .max_by(|a, b| a.norm_squared().total_cmp(&b.norm_squared()))?;
    let n = best.norm();
    if n <= 1e-150 {
        None
    } else {
        Some(best / n)
    }
}

/// Two unit vectors completing `v` to an orthonormal right-handed triad.
pub fn complete_frame(v: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let u = if v.x.abs() > v.y.abs() {
        Vector3::new(-v.z, 0.0, v.x) / (v.x * v.x + v.z * v.z).sqrt()
    } else {
        Vector3::new(0.0, v.z, -v.y) / (v.y * v.y + v.z * v.z).sqrt()
    };
    let w = v.cross(&u);
    (u, w)
}

fn jacobi(b: &SymMatrix3) -> [Vector3<f64>; 3] {
    let mut a = b.to_array();
    let mut v = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    for _sweep in 0..64 {
        let off = a[0][1].powi(2) + a[0][2].powi(2) + a[1][2].powi(2);
        if off <= 1e-40 {
            break;
        }
        for (p, r) in [(0usize, 1usize), (0, 2), (1, 2)] {
            if a[p][r] == 0.0 {
                continue;
            }
            let theta = (a[r][r] - a[p][p]) / (2.0 * a[p][r]);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let t = if theta == 0.0 { 1.0 } else { t };
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            for k in 0..3 {
                let akp = a[k][p];
                let akr = a[k][r];
                a[k][p] = c * akp - s * akr;
                a[k][r] = s * akp + c * akr;
            }
            for k in 0..3 {
                let apk = a[p][k];
                let ark = a[r][k];
                a[p][k] = c * apk - s * ark;
                a[r][k] = s * apk + c * ark;
            }
            for row in v.iter_mut() {
                let vp = row[p];
                let vr = row[r];
                row[p] = c * vp - s * vr;
                row[r] = s * vp + c * vr;
            }
        }
    }
    std::array::from_fn(|k| Vector3::new(v[0][k], v[1][k], v[2][k]))
}

/// Sorts by Rayleigh quotient, fixes signs and flags degeneracies.
fn finish(a: &SymMatrix3, vectors: [Vector3<f64>; 3]) -> Spectrum {
    let mut pairs: Vec<(f64, Vector3<f64>)> =
        vectors.iter().map(|v| (a.quadratic_form(v), *v)).collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let lambda = [pairs[0].0, pairs[1].0, pairs[2].0];
    let e0 = canonical_sign(pairs[0].1);
    let e1 = canonical_sign(pairs[1].1);
    let e2 = e0.cross(&e1);
    let thresh = DEGENERACY_REL * a.trace().abs().max(a.norm());
    let degenerate = [(0, 1), (1, 2), (0, 2)].map(|(i, j)| (lambda[i] - lambda[j]).abs() <= thresh);
    Spectrum {
        lambda,
        vectors: [e0, e1, e2],
        degenerate,
    }
}

fn canonical_sign(v: Vector3<f64>) -> Vector3<f64> {
    let mut k = 0;
    for i in 1..3 {
        if v[i].abs() > v[k].abs() + 1e-14 {
            k = i;
        }
    }
    if v[k] < 0.0 {
        -v
    } else {
        v
    }
}

/// I = M E - sum m_l q_l q_l^T.
pub fn inertia_tensor(c: &CartesianConfig, m: &MassTriple) -> SymMatrix3 {
    let total = m.total();
    let q = c.positions();
    SymMatrix3::from_fn(|i, j| {
        let outer: f64 = (0..3).map(|k| m.get(k) * q[k][i] * q[k][j]).sum();
        if i == j {
            total - outer
        } else {
            -outer
        }
    })
}

/// J_ij = M delta_ij - sqrt(m_i m_j) cos(sigma_ij).
pub fn j_matrix(m: &MassTriple, shape: &ShapeAngles) -> SymMatrix3 {
    j_from_cosines(m, shape.cosines())
}

/// J built directly from the dot products of a configuration.
pub fn j_matrix_from_config(c: &CartesianConfig, m: &MassTriple) -> SymMatrix3 {
    let q = c.positions();
    j_from_cosines(m, PAIRS.map(|(i, j)| q[i].dot(&q[j])))
}

fn j_from_cosines(m: &MassTriple, cos: [f64; 3]) -> SymMatrix3 {
    let [m1, m2, m3] = m.as_array();
    SymMatrix3::new(
        m2 + m3,
        m3 + m1,
        m1 + m2,
        -(m1 * m2).sqrt() * cos[0],
        -(m2 * m3).sqrt() * cos[1],
        -(m3 * m1).sqrt() * cos[2],
    )
}

/// Unit vector (sqrt(m_k) cos(theta_k)) / norm and the eigenvalue it carries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsiVector {
    pub psi: [f64; 3],
    pub lambda: f64,
}

impl PsiVector {
    pub fn as_vector(&self) -> Vector3<f64> {
        Vector3::from(self.psi)
    }

    /// ||J psi - lambda psi||.
    pub fn eigen_residual(&self, j: &SymMatrix3) -> f64 {
        let v = self.as_vector();
        (j.mul_vec(&v) - v * self.lambda).norm()
    }
}

/// Psi for a rotation axis. `lambda` is the axis' Rayleigh quotient in I,
/// which is its eigenvalue when the axis is a principal axis.
pub fn psi_from_axis(
    c: &CartesianConfig,
    m: &MassTriple,
    axis: &Vector3<f64>,
) -> Result<PsiVector> {
    if !((axis.norm() - 1.0).abs() <= 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "axis must be a unit vector, has norm {}",
            axis.norm()
        )));
    }
    let cos = c.cos_theta_about(axis);
    let v: [f64; 3] = std::array::from_fn(|k| m.get(k).sqrt() * cos[k]);
    let n2: f64 = v.iter().map(|x| x * x).sum();
    if n2 <= 1e-14 {
        return Err(Error::ZeroNorm);
    }
    let n = n2.sqrt();
    Ok(PsiVector {
        psi: v.map(|x| x / n),
        lambda: inertia_tensor(c, m).quadratic_form(axis),
    })
}

/// cos(theta_k) = sqrt(M - lambda) psi_k / sqrt(m_k).
pub fn cos_theta_from_psi(psi: &PsiVector, m: &MassTriple) -> Result<[f64; 3]> {
    let total = m.total();
    if psi.lambda > total + 1e-12 {
        return Err(Error::InvalidEigenpair(format!(
            "eigenvalue {} exceeds total mass {}",
            psi.lambda, total
        )));
    }
    let r = (total - psi.lambda).max(0.0).sqrt();
    let mut out = [0.0; 3];
    for k in 0..3 {
        let c = r * psi.psi[k] / m.get(k).sqrt();
        if c.abs() > 1.0 + 1e-8 {
            return Err(Error::InvalidEigenpair(format!(
                "cos(theta{}) = {c} outside [-1, 1]",
                k + 1
            )));
        }
        out[k] = c.clamp(-1.0, 1.0);
    }
    Ok(out)
}

/// Both sides of v^T J v = (sum m cos^2)(sum m sin^2) - (I_xz^2 + I_yz^2),
/// with v = (sqrt(m_k) cos(theta_k)) unnormalized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentitySides {
    pub lhs: f64,
    pub rhs: f64,
    pub ixz: f64,
    pub iyz: f64,
}

impl IdentitySides {
    pub fn residual(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }
}

/// |lhs - rhs| of the identity, with a frame completed automatically.
pub fn identity_check(c: &CartesianConfig, m: &MassTriple, axis: &Vector3<f64>) -> f64 {
    let (ex, _) = complete_frame(&axis.normalize());
    identity_sides(c, m, axis, &ex).residual()
}

/// Evaluates the identity in the frame (ex, axis x ex, axis). `ex` is
/// orthogonalized against the axis first.
pub fn identity_sides(
    c: &CartesianConfig,
    m: &MassTriple,
    axis: &Vector3<f64>,
    ex: &Vector3<f64>,
) -> IdentitySides {
    let ez = axis.normalize();
    let ex = (ex - ez * ex.dot(&ez)).normalize();
    let ey = ez.cross(&ex);
    let q = c.positions();
    let z = c.cos_theta_about(&ez);
    let v = Vector3::from_fn(|k, _| m.get(k).sqrt() * z[k]);
    let lhs = j_matrix_from_config(c, m).quadratic_form(&v);
    let cos2: f64 = (0..3).map(|k| m.get(k) * z[k] * z[k]).sum();
    let sin2: f64 = (0..3).map(|k| m.get(k) * (1.0 - z[k] * z[k])).sum();
    let ixz = -(0..3).map(|k| m.get(k) * q[k].dot(&ex) * z[k]).sum::<f64>();
    let iyz = -(0..3).map(|k| m.get(k) * q[k].dot(&ey) * z[k]).sum::<f64>();
    IdentitySides {
        lhs,
        rhs: cos2 * sin2 - (ixz * ixz + iyz * iyz),
        ixz,
        iyz,
    }
}
