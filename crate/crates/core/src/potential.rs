//! Pairwise interaction potentials U(cos sigma).
//!
//! Every model exposes U and its derivative U' with respect to cos(sigma).
//! U' must keep one sign on (-1, 1): positive means attraction.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Evaluations with |sin(sigma)| below this are treated as collisions.
pub const SIN_GUARD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ForceSign {
    Attractive,
    Repulsive,
}

impl ForceSign {
    pub fn flipped(self) -> Self {
        match self {
            ForceSign::Attractive => ForceSign::Repulsive,
            ForceSign::Repulsive => ForceSign::Attractive,
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            ForceSign::Attractive => 1.0,
            ForceSign::Repulsive => -1.0,
        }
    }
}

pub trait Potential: fmt::Debug + Send + Sync {
    fn name(&self) -> &str;

    fn force_sign(&self) -> ForceSign;

    /// U(c) for c = cos(sigma).
    fn value(&self, c: f64) -> Result<f64>;

    /// dU/dc.
    fn derivative(&self, c: f64) -> Result<f64>;
}

pub type PotentialRef = Arc<dyn Potential>;

fn checked_sin(c: f64) -> Result<f64> {
    if !(c.abs() < 1.0) {
        return Err(Error::Domain(c));
    }
    let s = ((1.0 - c) * (1.0 + c)).sqrt();
    if s < SIN_GUARD {
        return Err(Error::Domain(c));
    }
    Ok(s)
}

/// U = cos(sigma) / sin(sigma), U' = 1 / sin^3(sigma).
#[derive(Debug, Clone, Copy, Default)]
pub struct Cotangent;

impl Potential for Cotangent {
    fn name(&self) -> &str {
        "cotangent"
    }

    fn force_sign(&self) -> ForceSign {
        ForceSign::Attractive
    }

    fn value(&self, c: f64) -> Result<f64> {
        Ok(c / checked_sin(c)?)
    }

    fn derivative(&self, c: f64) -> Result<f64> {
        let s = checked_sin(c)?;
        Ok(1.0 / (s * s * s))
    }
}

pub fn cotangent() -> PotentialRef {
    Arc::new(Cotangent)
}

/// -U for a wrapped potential.
#[derive(Debug, Clone)]
pub struct Negated {
    inner: PotentialRef,
    name: String,
}

impl Negated {
    pub fn named(inner: PotentialRef, name: impl Into<String>) -> Self {
        Self {
            inner,
            name: name.into(),
        }
    }

    pub fn inner(&self) -> &PotentialRef {
        &self.inner
    }
}

impl Potential for Negated {
    fn name(&self) -> &str {
        &self.name
    }

    fn force_sign(&self) -> ForceSign {
        self.inner.force_sign().flipped()
    }

    fn value(&self, c: f64) -> Result<f64> {
        Ok(-self.inner.value(c)?)
    }

    fn derivative(&self, c: f64) -> Result<f64> {
        Ok(-self.inner.derivative(c)?)
    }
}

pub fn negate(p: PotentialRef) -> PotentialRef {
    let name = format!("negated-{}", p.name());
    Arc::new(Negated::named(p, name))
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A potential assembled from two closures. The closures are only called
/// for |c| < 1 with |sin(sigma)| at least [`SIN_GUARD`].
#[derive(Clone)]
pub struct FnPotential {
    name: String,
    sign: ForceSign,
    u: ScalarFn,
    du: ScalarFn,
}

impl FnPotential {
    pub fn new(
        name: impl Into<String>,
        sign: ForceSign,
        u: impl Fn(f64) -> f64 + Send + Sync + 'static,
        du: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            sign,
            u: Arc::new(u),
            du: Arc::new(du),
        }
    }
}

impl fmt::Debug for FnPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnPotential")
            .field("name", &self.name)
            .field("sign", &self.sign)
            .finish_non_exhaustive()
    }
}

impl Potential for FnPotential {
    fn name(&self) -> &str {
        &self.name
    }

    fn force_sign(&self) -> ForceSign {
        self.sign
    }

    fn value(&self, c: f64) -> Result<f64> {
        checked_sin(c)?;
        Ok((self.u)(c))
    }

    fn derivative(&self, c: f64) -> Result<f64> {
        checked_sin(c)?;
        Ok((self.du)(c))
    }
}

/// theta -> U'(cos theta) for extended meridian angles. The cosine makes it
/// even in theta, so for the cotangent model it is 1/|sin theta|^3.
#[derive(Debug, Clone, Copy)]
pub struct MeridianKernel<'a> {
    potential: &'a dyn Potential,
}

impl<'a> MeridianKernel<'a> {
    pub fn new(potential: &'a dyn Potential) -> Self {
        Self { potential }
    }

    pub fn eval(&self, theta: f64) -> Result<f64> {
        let (s, c) = theta.sin_cos();
        if s.abs() < SIN_GUARD {
            return Err(Error::Domain(c));
        }
        self.potential.derivative(c)
    }
}

/// Checks the declared sign of U' on a 1000-point grid and compares U'
/// against central differences of U on an interior grid.
pub fn validate_potential(p: &dyn Potential) -> Result<()> {
    let n = 1000;
    let sign = p.force_sign().sign();
    for i in 0..n {
        let c = -1.0 + 2.0 * (i as f64 + 0.5) / n as f64;
        let d = match p.derivative(c) {
            Ok(d) => d,
            Err(Error::Domain(_)) => continue,
            Err(e) => return Err(e),
        };
        if !(d * sign > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "potential '{}' has U'({c}) = {d}, contradicting its declared sign",
                p.name()
            )));
        }
    }
    let h = 1e-5;
    for i in 0..=180 {
        let c = -0.9 + 0.01 * i as f64;
        let fd = (p.value(c + h)? - p.value(c - h)?) / (2.0 * h);
        let d = p.derivative(c)?;
        if (d - fd).abs() > 1e-6 * d.abs().max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "potential '{}': U'({c}) = {d} but central difference gives {fd}",
                p.name()
            )));
        }
    }
    Ok(())
}

/// Potentials selectable by name.
#[derive(Debug, Clone, Default)]
pub struct PotentialRegistry {
    entries: BTreeMap<String, PotentialRef>,
}

impl PotentialRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// "cotangent" and "cotangent-repulsive".
    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        let cot = cotangent();
        r.register(Arc::new(Negated::named(cot.clone(), "cotangent-repulsive")));
        r.register(cot);
        r
    }

    pub fn register(&mut self, p: PotentialRef) {
        self.entries.insert(p.name().to_owned(), p);
    }

    pub fn get(&self, name: &str) -> Result<PotentialRef> {
        self.entries.get(name).cloned().ok_or_else(|| {
            Error::InvalidArgument(format!(
                "unknown potential '{name}' (available: {})",
                self.names().join(", ")
            ))
        })
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.keys().map(String::as_str).collect()
    }
}
