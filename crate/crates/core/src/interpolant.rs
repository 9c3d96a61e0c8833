//! Smooth transition profile separating the two singular families.
//!
//! `psi(z) = h(Re z)` steps from 1 (left half of the disc) down to 0 (right
//! half) across the vertical strip `|Re z| <= s`. Both singular families
//! live in `|Re z| >= 1/3`, so any `s < 1/3` leaves a strip of half-width
//! `1/3 - s` around each family where `psi` is exactly constant and all its
//! derivatives vanish identically, not just approximately.
//!
//! The profile is the quintic smoothstep `q(t) = 6t^5 - 15t^4 + 10t^3`,
//! which matches value, first and second derivative at both ends: the
//! result is C^2, which is all the curvature computations downstream ever
//! differentiate.

use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};

/// Wirtinger derivatives of `psi` at a point.
///
/// `psi` is real-valued and depends on `Re z` only, so `psi_z = psi_zbar`
/// (both equal `h'(x)/2`) and the mixed second derivative is the real
/// number `h''(x)/4`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PsiDerivs {
    pub psi_z: Complex64,
    pub psi_zbar: Complex64,
    pub psi_zzbar: f64,
}

/// The rescaled quintic step. `plateau_edge` is the half-width `s` of the
/// transition strip; values are exactly 1 for `Re z <= -s` and exactly 0
/// for `Re z >= s`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmoothStep {
    plateau_edge: Ratio<i64>,
    s: f64,
}

impl Default for SmoothStep {
    fn default() -> Self {
        Self::new(Ratio::new(7, 24)).expect("default edge is valid")
    }
}

impl SmoothStep {
    /// Build a step with the given transition half-width. Requires
    /// `0 < s < 1/3` so both plateaus cover their singular family.
    pub fn new(plateau_edge: Ratio<i64>) -> Result<Self> {
        let s = plateau_edge.to_f64().unwrap_or(f64::NAN);
        if !(plateau_edge > Ratio::new(0, 1) && plateau_edge < Ratio::new(1, 3)) {
            return Err(Error::InvalidPlateauEdge(s));
        }
        Ok(Self { plateau_edge, s })
    }

    pub fn plateau_edge(&self) -> Ratio<i64> {
        self.plateau_edge
    }

    /// `psi(z) = h(Re z)`, in `[0, 1]`, with exact plateau values.
    pub fn eval_psi(&self, z: Complex64) -> f64 {
        let x = z.re;
        if x <= -self.s {
            return 1.0;
        }
        if x >= self.s {
            return 0.0;
        }
        // t in (0, 1); at x = 0 the quotient s/(2s) rounds to exactly 1/2
        // and the Horner form of q gives exactly 1/2, so psi(0) = 1/2.
        let t = (x + self.s) / (2.0 * self.s);
        1.0 - quintic(t)
    }

    /// Closed-form Wirtinger derivatives; all identically zero on the
    /// plateaus `|Re z| >= s`.
    pub fn psi_derivs(&self, z: Complex64) -> PsiDerivs {
        let x = z.re;
        if x.abs() >= self.s {
            return PsiDerivs {
                psi_z: Complex64::new(0.0, 0.0),
                psi_zbar: Complex64::new(0.0, 0.0),
                psi_zzbar: 0.0,
            };
        }
        let t = (x + self.s) / (2.0 * self.s);
        let h1 = -quintic_d1(t) / (2.0 * self.s);
        let h2 = -quintic_d2(t) / (4.0 * self.s * self.s);
        PsiDerivs {
            psi_z: Complex64::new(h1 / 2.0, 0.0),
            psi_zbar: Complex64::new(h1 / 2.0, 0.0),
            psi_zzbar: h2 / 4.0,
        }
    }

    /// Exact suprema of `|h'|` and `|h''|` over the transition strip.
    ///
    /// The unit quintic has `max q' = q'(1/2) = 15/8` and
    /// `max |q''| = 10/sqrt(3)` (attained at `t = (1 -+ 1/sqrt(3))/2`);
    /// rescaling to `[-s, s]` divides by `2s` and `(2s)^2`.
    pub fn c2_bounds(&self) -> (f64, f64) {
        let sup_first = (15.0 / 8.0) / (2.0 * self.s);
        let sup_second = (10.0 / 3f64.sqrt()) / (4.0 * self.s * self.s);
        (sup_first, sup_second)
    }
}

fn quintic(t: f64) -> f64 {
    ((6.0 * t - 15.0) * t + 10.0) * t * t * t
}

fn quintic_d1(t: f64) -> f64 {
    // 30 t^2 (1 - t)^2
    let v = t * (1.0 - t);
    30.0 * v * v
}

fn quintic_d2(t: f64) -> f64 {
    // 60 t (2t - 1)(t - 1)
    60.0 * t * (2.0 * t - 1.0) * (t - 1.0)
}
