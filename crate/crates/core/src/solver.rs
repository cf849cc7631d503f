//! Strategy selection: each solver handles one class of shapes and is
//! registered under a name, so callers can route a shape or pick a solver
//! explicitly.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::euler::{solve_euler, AngularVelocity, EulerSolution, MeridianShape};
use crate::geometry::{is_collinear, CartesianConfig, MassTriple, ShapeAngles};
use crate::lagrange::{solve_lre, LreSolution};
use crate::potential::Potential;

/// Arc sums within this of a collinear relation route to the Euler solver.
pub const COLLINEAR_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    EulerMeridian,
    Lagrange,
    FixedPoint,
    #[serde(rename = "not-an-RE")]
    NotAnRe,
    Excluded,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::EulerMeridian => "euler-meridian",
            Classification::Lagrange => "lagrange",
            Classification::FixedPoint => "fixed-point",
            Classification::NotAnRe => "not-an-RE",
            Classification::Excluded => "excluded",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum ReSolution {
    Euler(EulerSolution),
    Lagrange(LreSolution),
}

impl ReSolution {
    pub fn positions(&self) -> CartesianConfig {
        match self {
            ReSolution::Euler(s) => s.positions(),
            ReSolution::Lagrange(s) => s.positions(),
        }
    }

    /// omega^2; an undetermined Euler rate is reported as None.
    pub fn omega_sq(&self) -> Option<f64> {
        match self {
            ReSolution::Euler(s) => s.omega.omega_sq(),
            ReSolution::Lagrange(s) => Some(s.omega_sq),
        }
    }

    pub fn classification(&self) -> Classification {
        match self {
            ReSolution::Euler(s) if s.omega == AngularVelocity::FixedPoint => {
                Classification::FixedPoint
            }
            ReSolution::Euler(_) => Classification::EulerMeridian,
            ReSolution::Lagrange(_) => Classification::Lagrange,
        }
    }
}

pub trait RelativeEquilibriumSolver: Send + Sync {
    fn name(&self) -> &str;

    /// Whether the solver is meant for this shape.
    fn accepts(&self, sigma: [f64; 3]) -> bool;

    fn solve(
        &self,
        m: &MassTriple,
        sigma: [f64; 3],
        p: &dyn Potential,
        tol: f64,
    ) -> Result<ReSolution>;
}

/// Collinear shapes on a rotating meridian.
#[derive(Debug, Clone, Copy, Default)]
pub struct EulerMeridianSolver;

impl RelativeEquilibriumSolver for EulerMeridianSolver {
    fn name(&self) -> &str {
        "euler-meridian"
    }

    fn accepts(&self, sigma: [f64; 3]) -> bool {
        is_collinear(sigma, COLLINEAR_TOL)
    }

    fn solve(
        &self,
        m: &MassTriple,
        sigma: [f64; 3],
        p: &dyn Potential,
        tol: f64,
    ) -> Result<ReSolution> {
        let sh = MeridianShape::from_arcs(sigma)?;
        Ok(ReSolution::Euler(solve_euler(m, &sh, p, tol)?))
    }
}

/// Non-collinear shapes.
#[derive(Debug, Clone, Copy, Default)]
pub struct LagrangeSolver;

impl RelativeEquilibriumSolver for LagrangeSolver {
    fn name(&self) -> &str {
        "lagrange"
    }

    fn accepts(&self, sigma: [f64; 3]) -> bool {
        !is_collinear(sigma, COLLINEAR_TOL)
    }

    fn solve(
        &self,
        m: &MassTriple,
        sigma: [f64; 3],
        p: &dyn Potential,
        tol: f64,
    ) -> Result<ReSolution> {
        let sh = ShapeAngles::from_angles(sigma[0], sigma[1], sigma[2])?;
        Ok(ReSolution::Lagrange(solve_lre(m, &sh, p, tol)?))
    }
}

pub struct SolverRegistry {
    solvers: BTreeMap<String, Arc<dyn RelativeEquilibriumSolver>>,
    order: Vec<String>,
}

impl SolverRegistry {
    pub fn empty() -> Self {
        Self {
            solvers: BTreeMap::new(),
            order: Vec::new(),
        }
    }

    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        r.register(Arc::new(EulerMeridianSolver));
        r.register(Arc::new(LagrangeSolver));
        r
    }

    /// Later registrations are consulted after earlier ones when routing.
    pub fn register(&mut self, s: Arc<dyn RelativeEquilibriumSolver>) {
        let name = s.name().to_owned();
        if self.solvers.insert(name.clone(), s).is_none() {
            self.order.push(name);
        }
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn RelativeEquilibriumSolver>> {
        self.solvers.get(name).cloned().ok_or_else(|| {
            Error::InvalidArgument(format!(
                "unknown solver '{name}' (available: {})",
                self.order.join(", ")
            ))
        })
    }

    pub fn names(&self) -> &[String] {
        &self.order
    }

    /// First registered solver that accepts the shape.
    pub fn route(&self, sigma: [f64; 3]) -> Result<Arc<dyn RelativeEquilibriumSolver>> {
        self.order
            .iter()
            .map(|n| &self.solvers[n])
            .find(|s| s.accepts(sigma))
            .cloned()
            .ok_or_else(|| Error::InvalidArgument(format!("no solver accepts arcs {sigma:?}")))
    }

    pub fn solve(
        &self,
        m: &MassTriple,
        sigma: [f64; 3],
        p: &dyn Potential,
        tol: f64,
    ) -> Result<ReSolution> {
        self.route(sigma)?.solve(m, sigma, p, tol)
    }
}

impl Default for SolverRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}
