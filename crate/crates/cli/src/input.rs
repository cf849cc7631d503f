//! Parsing and validation of numeric command-line input.

use std::f64::consts::PI;

use sphere_re_core::geometry::validate_shape_with_slack;
use sphere_re_core::{MassTriple, ShapeAngles};

/// Tolerance used when every angle is given to full double precision.
pub const FULL_PRECISION_TOL: f64 = 1e-9;

fn triple(s: &str, what: &str) -> Result<([f64; 3], [usize; 3]), String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!(
            "{what} needs three comma-separated values, got '{s}'"
        ));
    }
    let mut v = [0.0; 3];
    let mut decimals = [0; 3];
    for (k, p) in parts.iter().enumerate() {
        v[k] = p
            .parse::<f64>()
            .map_err(|e| format!("{what}: cannot parse '{p}' ({e})"))?;
        if !v[k].is_finite() {
            return Err(format!("{what}: '{p}' is not finite"));
        }
        decimals[k] = match p.split_once('.') {
            Some((_, frac)) => frac.chars().take_while(char::is_ascii_digit).count(),
            None => 0,
        };
    }
    Ok((v, decimals))
}

pub fn parse_masses(s: &str) -> Result<MassTriple, String> {
    let (m, _) = triple(s, "--masses")?;
    MassTriple::from_array(m).map_err(|e| e.to_string())
}

/// Arc angles as typed, with the number of decimals of the least precise
/// entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaInput {
    pub sigma: [f64; 3],
    pub decimals: usize,
}

impl SigmaInput {
    /// Half a unit in the last typed decimal.
    pub fn rounding(&self) -> f64 {
        0.5 * 10f64.powi(-(self.decimals as i32))
    }

    /// Default solver tolerance: inputs rounded to a few decimals cannot
    /// satisfy the equilibrium conditions any better than their rounding
    /// allows.
    pub fn default_tol(&self) -> f64 {
        if self.decimals >= 12 {
            FULL_PRECISION_TOL
        } else {
            (100.0 * self.rounding()).max(FULL_PRECISION_TOL)
        }
    }
}

pub fn parse_sigma(s: &str) -> Result<SigmaInput, String> {
    let (sigma, dec) = triple(s, "--sigma")?;
    for &x in &sigma {
        if x > PI {
            return Err(format!(
                "--sigma takes radians in (0, pi); {x} looks like degrees ({x} deg = {:.6} rad)",
                x.to_radians()
            ));
        }
        if x <= 0.0 {
            return Err(format!("--sigma values must be positive radians, got {x}"));
        }
    }
    Ok(SigmaInput {
        sigma,
        decimals: dec.into_iter().min().unwrap_or(0),
    })
}

/// Checks the spherical triangle inequalities, allowing for the rounding of
/// the typed values.
pub fn check_triangle(input: &SigmaInput, shape: &ShapeAngles) -> Result<(), String> {
    let slack = 3.0 * input.rounding().clamp(1e-12, 1e-3);
    let v = validate_shape_with_slack(shape, slack);
    if v.is_empty() {
        Ok(())
    } else {
        let what: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        Err(format!(
            "arcs {:?} are not a spherical triangle: {}",
            input.sigma,
            what.join("; ")
        ))
    }
}
