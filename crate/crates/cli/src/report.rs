//! Machine-readable results and their CSV/JSON encodings.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use sphere_re_core::dynamics::ConservedReport;
use sphere_re_core::euler::contour::ContourSet;
use sphere_re_core::lagrange::IsoscelesRow;
use sphere_re_core::{Classification, ReSolution};

/// Answer to "is this shape a relative equilibrium, and at what rate?".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReReport {
    pub classification: Classification,
    pub masses: [f64; 3],
    pub sigma: [f64; 3],
    pub potential: String,
    pub tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_sq: Option<f64>,
    /// Unit position vectors, rotation axis e_z.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions: Option<[[f64; 3]; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solution: Option<ReSolution>,
    /// Why the shape was rejected.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    /// Offending residual for a rejected shape.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verification: Option<ConservedReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub omega_sq: f64,
    pub periods: f64,
    pub max_drift: f64,
    pub passed: bool,
    pub report: ConservedReport,
}

/// 12 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.11e}")
}

pub fn write_json<T: Serialize, W: Write>(value: &T, mut w: W) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)
}

pub const EULER_HEADER: &str = "polyline,kind,closed,a,y,det,omega_sq,s,theta1,theta2,theta3";

pub fn write_contour_csv<W: Write>(set: &ContourSet, mut w: W) -> io::Result<()> {
    writeln!(w, "{EULER_HEADER}")?;
    for (n, line) in set.polylines.iter().enumerate() {
        for p in &line.points {
            let s =
                p.s.map_or(String::new(), |s| format!("{:+}", s.value() as i32));
            writeln!(
                w,
                "{n},{},{},{},{},{},{},{s},{},{},{}",
                line.kind.as_str(),
                line.closed,
                num(p.a),
                num(p.y),
                num(p.det),
                num(p.omega_sq),
                num(p.theta[0]),
                num(p.theta[1]),
                num(p.theta[2]),
            )?;
        }
    }
    Ok(())
}

pub const LAGRANGE_HEADER: &str = "kind,sigma12,sigma,omega_sq,residual";

pub fn write_isosceles_csv<W: Write>(rows: &[IsoscelesRow], mut w: W) -> io::Result<()> {
    writeln!(w, "{LAGRANGE_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.kind.as_str(),
            num(r.sigma12),
            num(r.sigma),
            num(r.omega_sq),
            num(r.residual)
        )?;
    }
    Ok(())
}
