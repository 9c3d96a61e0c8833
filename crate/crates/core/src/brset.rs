//! The fibered obstacle set and its per-fiber geometry.
//!
//! Over each base point `z` in the unit disc, the obstacle is the closed
//! disc `|w - psi(z)| <= r(z)` with radius `r(z) = exp(u(z) + |z|^2 + A)`.
//! The radius vanishes exactly on the two singular families, where the
//! fiber collapses to the single point `0` (right family) or `1` (left
//! family).
//!
//! Degeneracy is decided symbolically from exact rational membership, never
//! from a floating radius having underflowed: a float can sit one ulp away
//! from a center and still carry a genuinely positive (if tiny) radius.

use std::str::FromStr;

use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interpolant::SmoothStep;
use crate::potential::{e_side, LogPotential, Side};
use crate::serde_util::complex_pair;

/// A base point in the disc, either exact rational (on the real axis, where
/// the singular families live) or floating complex.
///
/// Exact inputs get symbolic treatment: membership in the singular families
/// is decided on the reduced fraction, so indices far beyond any series
/// truncation still produce degenerate fibers. Float inputs are compared
/// bit-for-bit against the retained centers only.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BasePoint {
    Exact(Ratio<i64>),
    Float(Complex64),
}

impl BasePoint {
    /// The point as a floating complex number.
    pub fn to_complex(self) -> Complex64 {
        match self {
            BasePoint::Exact(q) => Complex64::new(q.to_f64().unwrap_or(f64::NAN), 0.0),
            BasePoint::Float(z) => z,
        }
    }

    /// Exact singular-family membership, available only for exact inputs.
    pub fn exact_side(self) -> Option<Side> {
        match self {
            BasePoint::Exact(q) => e_side(q),
            BasePoint::Float(_) => None,
        }
    }
}

impl From<Ratio<i64>> for BasePoint {
    fn from(q: Ratio<i64>) -> Self {
        BasePoint::Exact(q)
    }
}

impl From<Complex64> for BasePoint {
    fn from(z: Complex64) -> Self {
        BasePoint::Float(z)
    }
}

impl From<f64> for BasePoint {
    fn from(x: f64) -> Self {
        BasePoint::Float(Complex64::new(x, 0.0))
    }
}

/// Accepted forms: `p/q` (exact rational), `x` (real float), `re,im`
/// (complex float).
impl FromStr for BasePoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((p, q)) = s.split_once('/') {
            let p: i64 = p
                .trim()
                .parse()
                .map_err(|_| Error::Invalid(format!("bad rational numerator in {s:?}")))?;
            let q: i64 = q
                .trim()
                .parse()
                .map_err(|_| Error::Invalid(format!("bad rational denominator in {s:?}")))?;
            if q == 0 {
                return Err(Error::Invalid(format!("zero denominator in {s:?}")));
            }
            return Ok(BasePoint::Exact(Ratio::new(p, q)));
        }
        if let Some((re, im)) = s.split_once(',') {
            let re: f64 = re
                .trim()
                .parse()
                .map_err(|_| Error::Invalid(format!("bad real part in {s:?}")))?;
            let im: f64 = im
                .trim()
                .parse()
                .map_err(|_| Error::Invalid(format!("bad imaginary part in {s:?}")))?;
            return Ok(BasePoint::Float(Complex64::new(re, im)));
        }
        let x: f64 = s
            .parse()
            .map_err(|_| Error::Invalid(format!("bad base point {s:?}")))?;
        Ok(BasePoint::Float(Complex64::new(x, 0.0)))
    }
}

/// One fiber of the obstacle: the closed disc `|w - center| <= radius`,
/// collapsed to the single point `center` when degenerate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberDescriptor {
    #[serde(with = "complex_pair")]
    pub z: Complex64,
    #[serde(with = "complex_pair")]
    pub center: Complex64,
    pub radius: f64,
    pub degenerate: bool,
}

/// The disc-fibered obstacle: potential, transition profile, and the
/// additive constant `a` in the radius exponent `u(z) + |z|^2 + a`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiscFibration {
    a: f64,
    potential: LogPotential,
    step: SmoothStep,
}

impl Default for DiscFibration {
    /// Default constant 10: comfortably inside the certified-positivity
    /// regime for the default grid.
    fn default() -> Self {
        Self::new(10.0, LogPotential::default(), SmoothStep::default())
    }
}

impl DiscFibration {
    pub fn new(a: f64, potential: LogPotential, step: SmoothStep) -> Self {
        Self { a, potential, step }
    }

    pub fn with_a(a: f64) -> Self {
        Self::new(a, LogPotential::default(), SmoothStep::default())
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn potential(&self) -> &LogPotential {
        &self.potential
    }

    pub fn step(&self) -> &SmoothStep {
        &self.step
    }

    /// The fiber over `z`. Exact rational inputs in a singular family give
    /// a degenerate fiber regardless of series truncation; float inputs
    /// degenerate only on exact hits of retained centers.
    pub fn fiber(&self, z: impl Into<BasePoint>) -> Result<FiberDescriptor> {
        let bp = z.into();
        let zc = bp.to_complex();
        if zc.norm_sqr() >= 1.0 {
            return Err(Error::OutsideUnitDisc(zc));
        }
        let center = Complex64::new(self.step.eval_psi(zc), 0.0);
        let degenerate = match bp {
            BasePoint::Exact(_) => bp.exact_side().is_some(),
            BasePoint::Float(_) => self.potential.hits_retained_center(zc),
        };
        if degenerate {
            return Ok(FiberDescriptor { z: zc, center, radius: 0.0, degenerate: true });
        }
        let u = self.potential.eval(zc)?.value;
        let mut radius = (u + zc.norm_sqr() + self.a).exp();
        if radius == 0.0 {
            // exp underflowed: the true radius is positive, keep it so
            radius = f64::MIN_POSITIVE;
        }
        Ok(FiberDescriptor { z: zc, center, radius, degenerate: false })
    }

    /// Membership test `|w - psi(z)| <= r(z)`.
    pub fn contains(&self, w: Complex64, z: impl Into<BasePoint>) -> Result<bool> {
        let f = self.fiber(z)?;
        Ok((w - f.center).norm() <= f.radius)
    }

    /// Signed log-gauge `g = ln|w - psi(z)| - u(z) - |z|^2 - a`.
    ///
    /// Positive exactly outside the fiber, zero on its boundary circle.
    /// `w = psi(z)` gives `-inf`; a degenerate fiber with `w` anywhere else
    /// gives `+inf` (the complement is everything but the center).
    pub fn defining_value(&self, w: Complex64, z: impl Into<BasePoint>) -> Result<f64> {
        let bp = z.into();
        let f = self.fiber(bp)?;
        if w == f.center {
            return Ok(f64::NEG_INFINITY);
        }
        if f.degenerate {
            return Ok(f64::INFINITY);
        }
        let u = self.potential.eval(f.z)?.value;
        Ok((w - f.center).norm().ln() - u - f.z.norm_sqr() - self.a)
    }

    /// A real level `N0` whose horizontal line `w = N0` clears every fiber
    /// by at least 1: centers lie in `[0, 1]` and radii below
    /// `exp(U_max + 1 + a)` with `U_max = 4 ln 3` the potential's sup bound
    /// on the disc.
    pub fn transversal_level(&self) -> f64 {
        2.0 + (LogPotential::sup_bound_on_disc() + 1.0 + self.a).exp()
    }
}

/// A zero-thickness obstacle: the graph `w = c(z)` of a (generally
/// non-holomorphic) center map. The built-in instance is the graph of
/// complex conjugation.
#[derive(Clone, Copy)]
pub struct GraphObstacle {
    center_fn: fn(Complex64) -> Complex64,
}

impl Default for GraphObstacle {
    fn default() -> Self {
        Self::conjugation()
    }
}

impl GraphObstacle {
    /// The graph of `z -> conj z`.
    pub fn conjugation() -> Self {
        Self { center_fn: |z| z.conj() }
    }

    pub fn center(&self, z: Complex64) -> Complex64 {
        (self.center_fn)(z)
    }

    /// Every fiber is the single point `c(z)`.
    pub fn fiber(&self, z: Complex64) -> FiberDescriptor {
        FiberDescriptor { z, center: self.center(z), radius: 0.0, degenerate: true }
    }

    pub fn contains(&self, w: Complex64, z: Complex64) -> bool {
        w == self.center(z)
    }

    /// Finite-difference Wirtinger derivative `(d/d conj z) c` at `z`:
    /// `(c_x + i c_y) / 2` by central differences. Nonzero values witness
    /// non-holomorphy of the center map (1 for conjugation).
    pub fn dbar_center_fd(&self, z: Complex64, h: f64) -> Complex64 {
        let cx = (self.center(z + h) - self.center(z - h)) / (2.0 * h);
        let cy = (self.center(z + Complex64::new(0.0, h)) - self.center(z - Complex64::new(0.0, h)))
            / (2.0 * h);
        (cx + Complex64::i() * cy) / 2.0
    }
}

impl std::fmt::Debug for GraphObstacle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GraphObstacle").finish_non_exhaustive()
    }
}
