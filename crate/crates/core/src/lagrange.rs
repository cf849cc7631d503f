//! Lagrange (non-collinear) relative equilibria.
//!
//! A shape rotates rigidly iff the vector
//! Psi_L ~ (sqrt(m1)/U'23, sqrt(m2)/U'31, sqrt(m3)/U'12) is an eigenvector of
//! J. The eigenvalue then fixes the polar angles of the bodies about the
//! rotation axis, and omega^2 = U'12 U'23 U'31 sum m_k / U'_ij^2.

use std::f64::consts::PI;

use nalgebra::Vector3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equations::rigid_rotation_residual;
use crate::error::{Error, Result};
use crate::geometry::{
    phi_differences_with_tol, to_cartesian, CartesianConfig, MassTriple, ShapeAngles,
    SphericalConfig,
};
use crate::inertia::{cos_theta_from_psi, j_matrix, PsiVector};
use crate::potential::{Cotangent, ForceSign, Potential};

pub const DEFAULT_TOL: f64 = 1e-9;
const EOM_TOL: f64 = 1e-8;
/// Bodies this close to the rotation equator do not form a Lagrange solution.
const EQUATOR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Hemisphere {
    North,
    South,
}

/// Sign of sin(phi_i - phi_j) for the cyclic pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    Negative,
    Positive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LreSolution {
    pub masses: MassTriple,
    pub shape: ShapeAngles,
    pub cos_theta: [f64; 3],
    /// (phi1 - phi2, phi2 - phi3, phi3 - phi1).
    pub phi_diff: [f64; 3],
    pub omega_sq: f64,
    /// Rayleigh quotient of Psi_L in J.
    pub lambda: f64,
    /// ||J Psi_L - lambda Psi_L||.
    pub residual: f64,
    /// Relative residual of the equations of motion for the rebuilt
    /// configuration.
    pub eom_residual: f64,
    pub hemisphere: Hemisphere,
    pub orientation: Orientation,
}

impl LreSolution {
    /// Configuration with phi1 = 0.
    pub fn spherical(&self) -> SphericalConfig {
        let theta = self.cos_theta.map(|c| c.clamp(-1.0, 1.0).acos());
        let phi = [0.0, -self.phi_diff[0], -self.phi_diff[0] - self.phi_diff[1]];
        SphericalConfig {
            theta,
            phi,
            convention: crate::geometry::AngleConvention::Standard,
        }
    }

    pub fn positions(&self) -> CartesianConfig {
        to_cartesian(&self.spherical())
    }
}

/// Psi_L with lambda its Rayleigh quotient in J.
pub fn psi_l(m: &MassTriple, sh: &ShapeAngles, p: &dyn Potential) -> Result<PsiVector> {
    let c = sh.cosines();
    let (d12, d23, d31) = (
        p.derivative(c[0])?,
        p.derivative(c[1])?,
        p.derivative(c[2])?,
    );
    if d12 == 0.0 || d23 == 0.0 || d31 == 0.0 {
        return Err(Error::InvalidArgument("U' vanishes on this shape".into()));
    }
    let raw = [
        m.get(0).sqrt() / d23,
        m.get(1).sqrt() / d31,
        m.get(2).sqrt() / d12,
    ];
    let n = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
    let psi = raw.map(|x| x / n);
    let lambda = j_matrix(m, sh).quadratic_form(&Vector3::from(psi));
    Ok(PsiVector { psi, lambda })
}

/// ||J Psi_L - (Psi_L^T J Psi_L) Psi_L||.
pub fn lre_residual(m: &MassTriple, sh: &ShapeAngles, p: &dyn Potential) -> Result<f64> {
    let psi = psi_l(m, sh, p)?;
    Ok(psi.eigen_residual(&j_matrix(m, sh)))
}

/// U'12 U'23 U'31 sum m_k / U'_ij^2.
pub fn lre_omega_sq(m: &MassTriple, sh: &ShapeAngles, p: &dyn Potential) -> Result<f64> {
    let c = sh.cosines();
    let (d12, d23, d31) = (
        p.derivative(c[0])?,
        p.derivative(c[1])?,
        p.derivative(c[2])?,
    );
    Ok(
        d12 * d23
            * d31
            * (m.get(0) / (d23 * d23) + m.get(1) / (d31 * d31) + m.get(2) / (d12 * d12)),
    )
}

/// Canonical Lagrange solution (northern hemisphere, negative orientation).
pub fn solve_lre(
    m: &MassTriple,
    sh: &ShapeAngles,
    p: &dyn Potential,
    tol: f64,
) -> Result<LreSolution> {
    if p.force_sign() == ForceSign::Repulsive {
        return Err(Error::RepulsiveNoLRE);
    }
    let psi = psi_l(m, sh, p)?;
    let residual = psi.eigen_residual(&j_matrix(m, sh));
    if !(residual <= tol) {
        return Err(Error::not_an_re(
            "Psi_L is not an eigenvector of J",
            residual,
        ));
    }
    let cos_theta = cos_theta_from_psi(&psi, m)?;
    if let Some(k) = cos_theta.iter().position(|&c| c <= EQUATOR_TOL) {
        return Err(Error::not_an_re(
            format!("body {} would sit on the rotation equator", k + 1),
            cos_theta[k],
        ));
    }
    let check_tol = EOM_TOL.max(10.0 * tol);
    let phi_diff = phi_differences_with_tol(sh, cos_theta, check_tol)
        .map_err(|e| Error::not_an_re(e.to_string(), residual))?;
    let omega_sq = lre_omega_sq(m, sh, p)?;
    if !(omega_sq > 0.0) {
        return Err(Error::not_an_re("non-positive angular velocity", omega_sq));
    }
    let mut sol = LreSolution {
        masses: *m,
        shape: *sh,
        cos_theta,
        phi_diff,
        omega_sq,
        lambda: psi.lambda,
        residual,
        eom_residual: 0.0,
        hemisphere: Hemisphere::North,
        orientation: Orientation::Negative,
    };
    let eom = rigid_rotation_residual(&sol.positions(), m, p, omega_sq)?;
    sol.eom_residual = eom.relative();
    if sol.eom_residual > check_tol {
        return Err(Error::not_an_re(
            "equations of motion not satisfied",
            sol.eom_residual,
        ));
    }
    Ok(sol)
}

/// The four solutions sharing one shape: reflection through the equator
/// and reversal of the azimuthal order.
pub fn variants(sol: &LreSolution) -> [LreSolution; 4] {
    let reflect = |s: &LreSolution| LreSolution {
        cos_theta: s.cos_theta.map(|c| -c),
        hemisphere: match s.hemisphere {
            Hemisphere::North => Hemisphere::South,
            Hemisphere::South => Hemisphere::North,
        },
        ..*s
    };
    let reverse = |s: &LreSolution| LreSolution {
        phi_diff: s.phi_diff.map(|d| -d),
        orientation: match s.orientation {
            Orientation::Negative => Orientation::Positive,
            Orientation::Positive => Orientation::Negative,
        },
        ..*s
    };
    [*sol, reflect(sol), reverse(sol), reverse(&reflect(sol))]
}

/// For unit masses and the cotangent potential, the right-hand sides
/// (cos s_jk sin^3 s_ki + sin^3 s_jk cos s_ki) / sin^3 s_ij for
/// (ij) = (12), (23), (31), and their pairwise differences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EqualMassCondition {
    pub rhs: [f64; 3],
    pub residuals: [f64; 3],
}

impl EqualMassCondition {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0f64, |a, b| a.max(b.abs()))
    }
}

pub fn equal_mass_lre_condition(sh: &ShapeAngles) -> EqualMassCondition {
    let c = sh.cosines();
    let s = c.map(|x| (1.0 - x * x).max(0.0).sqrt());
    // pair p = (ij); jk = p+1, ki = p+2
    let rhs: [f64; 3] = std::array::from_fn(|p| {
        let (jk, ki) = ((p + 1) % 3, (p + 2) % 3);
        (c[jk] * s[ki].powi(3) + s[jk].powi(3) * c[ki]) / s[p].powi(3)
    });
    let residuals = std::array::from_fn(|p| rhs[p] - rhs[(p + 1) % 3]);
    EqualMassCondition { rhs, residuals }
}

/// q(s, s12) = cos s (2 sin^6 s - sin^6 s12) - sin^3 s cos s12 sin^3 s12;
/// the isosceles shape (s12, s, s) is a unit-mass Lagrange shape iff q = 0.
pub fn isosceles_q(sigma: f64, sigma12: f64) -> f64 {
    let (s, c) = sigma.sin_cos();
    let (s12, c12) = sigma12.sin_cos();
    c * (2.0 * s.powi(6) - s12.powi(6)) - s.powi(3) * c12 * s12.powi(3)
}

const ISO_GRID: usize = 2048;

fn bracket_roots(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let mut roots = Vec::new();
    let xs: Vec<f64> = (0..=n)
        .map(|i| lo + (hi - lo) * i as f64 / n as f64)
        .collect();
    let vals: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    for i in 0..n {
        let (a, b) = (vals[i], vals[i + 1]);
        if a == 0.0 {
            roots.push(xs[i]);
        } else if a.signum() != b.signum() && b != 0.0 {
            // down to the last representable bit: unstable shapes amplify
            // any error in the initial configuration
            roots.push(crate::euler::bisect(&f, xs[i], xs[i + 1]));
        }
    }
    if vals[n] == 0.0 {
        roots.push(xs[n]);
    }
    roots
}

fn dedup_sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(v.len());
    for x in v {
        if out.last().is_none_or(|&l| (x - l).abs() > 1e-9) {
            out.push(x);
        }
    }
    out
}

/// Roots sigma of q(., sigma12) with sigma12 < 2 sigma < 2pi - sigma12,
/// ascending. The equilateral root sigma = sigma12 is included whenever it
/// lies in that window, i.e. for sigma12 < 2pi/3.
pub fn isosceles_solve(sigma12: f64) -> Vec<f64> {
    if !(sigma12 > 0.0 && sigma12 < PI) {
        return Vec::new();
    }
    let (lo, hi) = (sigma12 / 2.0, PI - sigma12 / 2.0);
    let width = hi - lo;
    // open interval: stay a hair inside the boundaries
    let eps = width * 1e-9;
    let mut roots = bracket_roots(|s| isosceles_q(s, sigma12), lo + eps, hi - eps, ISO_GRID);
    if sigma12 > lo && sigma12 < hi {
        roots.push(sigma12);
    }
    dedup_sorted(roots)
}

/// Points of the isosceles family with a right angle at body 3, where
/// cos s12 = cos^2 s. Returned as (sigma12, sigma) pairs.
pub fn right_angle_points() -> Vec<(f64, f64)> {
    let s12 = |s: f64| (s.cos() * s.cos()).acos();
    let r = |s: f64| isosceles_q(s, s12(s));
    bracket_roots(r, 1e-3, PI - 1e-3, 20_000)
        .into_iter()
        .map(|s| (s12(s), s))
        .filter(|&(a, s)| a < 2.0 * s && 2.0 * s < 2.0 * PI - a)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IsoscelesKind {
    Equilateral,
    Isosceles,
    RightAngle,
}

impl IsoscelesKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            IsoscelesKind::Equilateral => "equilateral",
            IsoscelesKind::Isosceles => "isosceles",
            IsoscelesKind::RightAngle => "right-angle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsoscelesRow {
    pub kind: IsoscelesKind,
    pub sigma12: f64,
    pub sigma: f64,
    pub omega_sq: f64,
    pub residual: f64,
}

fn isosceles_row(kind: IsoscelesKind, sigma12: f64, sigma: f64) -> Option<IsoscelesRow> {
    let m = MassTriple::equal(1.0).ok()?;
    let sh = ShapeAngles::from_angles(sigma12, sigma, sigma).ok()?;
    let sol = solve_lre(&m, &sh, &Cotangent, DEFAULT_TOL).ok()?;
    Some(IsoscelesRow {
        kind,
        sigma12,
        sigma,
        omega_sq: sol.omega_sq,
        residual: sol.residual,
    })
}

/// Unit-mass cotangent isosceles family on sigma12 = pi i / n for
/// i = 1..n-1, followed by the right-angle points. Only roots that solve as
/// Lagrange equilibria are kept.
pub fn isosceles_scan(n: usize) -> Vec<IsoscelesRow> {
    let mut rows: Vec<IsoscelesRow> = (1..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let s12 = PI * i as f64 / n as f64;
            isosceles_solve(s12).into_iter().filter_map(move |s| {
                let kind = if (s - s12).abs() <= 1e-9 {
                    IsoscelesKind::Equilateral
                } else {
                    IsoscelesKind::Isosceles
                };
                let s = if kind == IsoscelesKind::Equilateral {
                    s12
                } else {
                    s
                };
                isosceles_row(kind, s12, s)
            })
        })
        .collect();
    rows.extend(
        right_angle_points()
            .into_iter()
            .filter_map(|(s12, s)| isosceles_row(IsoscelesKind::RightAngle, s12, s)),
    );
    rows
}

/// Smallest unit-mass Lagrange residual found over scalene shapes whose
/// arcs differ pairwise by at least `min_gap`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleneInfimum {
    pub residual: f64,
    pub sigma: [f64; 3],
    pub samples: usize,
}

pub fn scalene_residual_infimum(n: usize, min_gap: f64) -> Option<ScaleneInfimum> {
    let m = MassTriple::equal(1.0).ok()?;
    let h = PI / n as f64;
    let best = (1..n)
        .into_par_iter()
        .map(|i| {
            let mut best: Option<(f64, [f64; 3])> = None;
            let mut count = 0usize;
            for j in 1..n {
                for k in 1..n {
                    let s = [i as f64 * h, j as f64 * h, k as f64 * h];
                    if (s[0] - s[1]).abs() < min_gap
                        || (s[1] - s[2]).abs() < min_gap
                        || (s[0] - s[2]).abs() < min_gap
                    {
                        continue;
                    }
                    let Ok(sh) = ShapeAngles::from_angles(s[0], s[1], s[2]) else {
                        continue;
                    };
                    if !crate::geometry::validate_shape(&sh).is_empty() {
                        continue;
                    }
                    let Ok(r) = lre_residual(&m, &sh, &Cotangent) else {
                        continue;
                    };
                    count += 1;
                    if best.is_none_or(|b| r < b.0) {
                        best = Some((r, s));
                    }
                }
            }
            (best, count)
        })
        .collect::<Vec<_>>();
    let samples = best.iter().map(|b| b.1).sum();
    best.into_iter()
        .filter_map(|b| b.0)
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(residual, sigma)| ScaleneInfimum {
            residual,
            sigma,
            samples,
        })
}
