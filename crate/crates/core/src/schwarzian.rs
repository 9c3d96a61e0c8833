//! Schwarzian derivative on 3-jets, Moebius algebra, and the change of
//! chart into the logarithmic coordinate.
//!
//! The Schwarzian `Sf = f'''/f' - (3/2)(f''/f')^2` kills exactly the
//! Moebius maps and obeys the cocycle rule
//! `S(f o g) = (Sf o g) (g')^2 + Sg`, which together make it the right
//! detector for "is this family Moebius in the log chart": push a jet
//! through `exp`, read off the Schwarzian, and a genuinely Moebius family
//! reads exactly zero there.
//!
//! Jets (function value plus three derivatives at a point) are the
//! universal currency. Sampled functions enter through a finite-difference
//! extractor with a Richardson consistency gate, analytic families through
//! closed-form jets.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Value and first three derivatives of a map at a base point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet3 {
    pub p: Complex64,
    pub f0: Complex64,
    pub f1: Complex64,
    pub f2: Complex64,
    pub f3: Complex64,
}

impl Jet3 {
    pub fn new(p: Complex64, f0: Complex64, f1: Complex64, f2: Complex64, f3: Complex64) -> Self {
        Self { p, f0, f1, f2, f3 }
    }

    /// Jet of the identity at `p`.
    pub fn identity(p: Complex64) -> Self {
        Self::new(p, p, Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
    }

    /// Jet of `exp` at `p`.
    pub fn of_exp(p: Complex64) -> Self {
        let e = p.exp();
        Self::new(p, e, e, e, e)
    }

    /// Jet of the principal `ln` at `p != 0`.
    pub fn of_log(p: Complex64) -> Result<Self> {
        if p == Complex64::new(0.0, 0.0) {
            return Err(Error::LogChartAtOrigin);
        }
        let inv = p.inv();
        Self::new(p, p.ln(), inv, -inv * inv, 2.0 * inv * inv * inv).ok()
    }

    /// Jet of a polynomial with ascending coefficients, by repeated
    /// synthetic division (extended Horner).
    pub fn of_polynomial(coeffs: &[Complex64], p: Complex64) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        let mut d = [zero; 4];
        for &c in coeffs.iter().rev() {
            d[3] = d[3] * p + d[2];
            d[2] = d[2] * p + d[1];
            d[1] = d[1] * p + d[0];
            d[0] = d[0] * p + c;
        }
        Self::new(p, d[0], d[1], 2.0 * d[2], 6.0 * d[3])
    }

    /// Jet of `outer o inner` at `inner.p`. `outer` must be based at the
    /// inner value.
    pub fn compose(outer: &Jet3, inner: &Jet3) -> Result<Jet3> {
        if (outer.p - inner.f0).norm() > 1e-9 * (1.0 + inner.f0.norm()) {
            return Err(Error::JetMismatch(format!(
                "outer jet based at {} but inner value is {}",
                outer.p, inner.f0
            )));
        }
        let (g1, g2, g3) = (inner.f1, inner.f2, inner.f3);
        Ok(Jet3::new(
            inner.p,
            outer.f0,
            outer.f1 * g1,
            outer.f2 * g1 * g1 + outer.f1 * g2,
            outer.f3 * g1 * g1 * g1 + 3.0 * outer.f2 * g1 * g2 + outer.f1 * g3,
        ))
    }

    fn ok(self) -> Result<Self> {
        Ok(self)
    }
}

/// `Sf = f3/f1 - (3/2)(f2/f1)^2` from a jet. Errors at critical points
/// (`f1 = 0`), where local univalence fails.
pub fn schwarzian(jet: &Jet3) -> Result<Complex64> {
    if jet.f1 == Complex64::new(0.0, 0.0) {
        return Err(Error::CriticalJet(jet.p));
    }
    let ratio = jet.f2 / jet.f1;
    Ok(jet.f3 / jet.f1 - 1.5 * ratio * ratio)
}

/// Chain rule `S(f o g)(p) = Sf(g(p)) g'(p)^2 + Sg(p)`.
pub fn cocycle(sf_at_gp: Complex64, g_jet: &Jet3, sg_at_p: Complex64) -> Result<Complex64> {
    if g_jet.f1 == Complex64::new(0.0, 0.0) {
        return Err(Error::CriticalJet(g_jet.p));
    }
    Ok(sf_at_gp * g_jet.f1 * g_jet.f1 + sg_at_p)
}

/// Schwarzian of `F o exp` at `ln w0`, from the jet of `F` in the original
/// coordinate at `w0 != 0`.
///
/// By the cocycle with `S(exp) = -1/2` and `exp' = w0` this is
/// `w0^2 SF(w0) - 1/2`; a family that is Moebius in the log chart reads
/// exactly zero here.
pub fn schwarzian_in_log_chart(jet_in_w: &Jet3) -> Result<Complex64> {
    let w0 = jet_in_w.p;
    if w0 == Complex64::new(0.0, 0.0) {
        return Err(Error::LogChartAtOrigin);
    }
    Ok(w0 * w0 * schwarzian(jet_in_w)? - Complex64::new(0.5, 0.0))
}

/// Finite-difference Schwarzian with its Richardson error estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchwarzianFd {
    pub value: Complex64,
    pub error_estimate: f64,
}

/// Default step for the finite-difference extractor.
pub const DEFAULT_FD_STEP: f64 = 1e-2;

/// Schwarzian of a sampled map at `p` by fourth-order central stencils
/// (real-direction offsets up to `3h`).
///
/// The estimate is recomputed at steps `h`, `h/2`, `h/4`; fourth-order
/// convergence predicts each difference of consecutive estimates shrinks
/// 16-fold, and the run is rejected when the observed pair disagrees with
/// the prediction by more than a factor 10 plus the roundoff floor (the
/// third-derivative stencil amplifies sample rounding by roughly
/// `|f| / (h^3 |f'|)`, so the floor adapts to both the samples and the
/// step). Errors also when any stencil sample is non-finite.
pub fn schwarzian_fd<F: Fn(Complex64) -> Complex64>(
    f: F,
    p: Complex64,
    step: f64,
) -> Result<SchwarzianFd> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::Invalid(format!("step must be positive, got {step}")));
    }
    let (s_h, _) = schwarzian_fd_once(&f, p, step)?;
    let (s_h2, noise_h2) = schwarzian_fd_once(&f, p, step / 2.0)?;
    let (s_h4, noise_h4) = schwarzian_fd_once(&f, p, step / 4.0)?;
    if !(s_h.is_finite() && s_h2.is_finite() && s_h4.is_finite()) {
        return Err(Error::RichardsonFailure(
            "non-finite Schwarzian estimate (critical point or wild samples)".into(),
        ));
    }
    let d12 = (s_h - s_h2).norm();
    let d23 = (s_h2 - s_h4).norm();
    let floor = noise_h2 + noise_h4;
    if d23 > 10.0 * (d12 / 16.0) + floor {
        return Err(Error::RichardsonFailure(format!(
            "estimates not converging at fourth order: |S_h - S_h/2| = {d12:.3e}, |S_h/2 - S_h/4| = {d23:.3e}, roundoff floor = {floor:.3e}"
        )));
    }
    Ok(SchwarzianFd {
        value: s_h4,
        error_estimate: (d23 / 15.0).max(noise_h4).max(1e-14 * (1.0 + s_h4.norm())),
    })
}

fn schwarzian_fd_once<F: Fn(Complex64) -> Complex64>(
    f: &F,
    p: Complex64,
    h: f64,
) -> Result<(Complex64, f64)> {
    // samples at p + k h for k = -3..=3
    let mut v = [Complex64::new(0.0, 0.0); 7];
    let mut vmax: f64 = 0.0;
    for (i, k) in (-3..=3).enumerate() {
        v[i] = f(p + Complex64::new(k as f64 * h, 0.0));
        if !(v[i].re.is_finite() && v[i].im.is_finite()) {
            return Err(Error::SingularStencil);
        }
        vmax = vmax.max(v[i].norm());
    }
    let f1 = (-v[5] + 8.0 * v[4] - 8.0 * v[2] + v[1]) / (12.0 * h);
    let f2 = (-v[5] + 16.0 * v[4] - 30.0 * v[3] + 16.0 * v[2] - v[1]) / (12.0 * h * h);
    let f3 = (v[0] - 8.0 * v[1] + 13.0 * v[2] - 13.0 * v[4] + 8.0 * v[5] - v[6]) / (8.0 * h * h * h);
    let ratio = f2 / f1;
    let s = f3 / f1 - 1.5 * ratio * ratio;
    // rounding each sample by one ulp moves f3 by ~ eps vmax / h^3; that
    // divided by |f1| dominates the roundoff noise in s
    let noise = 4.0 * f64::EPSILON * vmax / (h * h * h * f1.norm().max(f64::MIN_POSITIVE));
    Ok((s, noise))
}

/// A point of the Riemann sphere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtComplex {
    Finite(Complex64),
    Infinity,
}

impl ExtComplex {
    /// Chordal distance on the sphere of diameter 2:
    /// `2|a - b| / sqrt((1+|a|^2)(1+|b|^2))`, with the usual limits at
    /// infinity.
    pub fn chordal(self, other: ExtComplex) -> f64 {
        match (self, other) {
            (ExtComplex::Finite(a), ExtComplex::Finite(b)) => {
                2.0 * (a - b).norm() / ((1.0 + a.norm_sqr()) * (1.0 + b.norm_sqr())).sqrt()
            }
            (ExtComplex::Finite(a), ExtComplex::Infinity)
            | (ExtComplex::Infinity, ExtComplex::Finite(a)) => {
                2.0 / (1.0 + a.norm_sqr()).sqrt()
            }
            (ExtComplex::Infinity, ExtComplex::Infinity) => 0.0,
        }
    }
}

impl From<Complex64> for ExtComplex {
    fn from(z: Complex64) -> Self {
        ExtComplex::Finite(z)
    }
}

/// A Moebius map `(az + b)/(cz + d)`, stored with `ad - bc = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mobius {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl Mobius {
    /// Normalize a coefficient matrix to determinant 1. Errors when the
    /// matrix is singular (a constant, not a Moebius map).
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        let det = a * d - b * c;
        if det == Complex64::new(0.0, 0.0) {
            return Err(Error::SingularMobius);
        }
        let s = det.sqrt();
        Ok(Self { a: a / s, b: b / s, c: c / s, d: d / s })
    }

    pub fn identity() -> Self {
        Self {
            a: Complex64::new(1.0, 0.0),
            b: Complex64::new(0.0, 0.0),
            c: Complex64::new(0.0, 0.0),
            d: Complex64::new(1.0, 0.0),
        }
    }

    /// Matrix product, renormalized.
    pub fn compose(&self, other: &Mobius) -> Mobius {
        Mobius::new(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )
        .expect("product of unimodular matrices is unimodular")
    }

    pub fn inverse(&self) -> Mobius {
        Mobius::new(self.d, -self.b, -self.c, self.a).expect("unimodular inverse")
    }

    pub fn apply(&self, z: Complex64) -> ExtComplex {
        let den = self.c * z + self.d;
        if den == Complex64::new(0.0, 0.0) {
            ExtComplex::Infinity
        } else {
            ExtComplex::Finite((self.a * z + self.b) / den)
        }
    }

    pub fn apply_ext(&self, z: ExtComplex) -> ExtComplex {
        match z {
            ExtComplex::Finite(z) => self.apply(z),
            ExtComplex::Infinity => {
                if self.c == Complex64::new(0.0, 0.0) {
                    ExtComplex::Infinity
                } else {
                    ExtComplex::Finite(self.a / self.c)
                }
            }
        }
    }

    /// Jet at a non-pole point `p`.
    pub fn jet_at(&self, p: Complex64) -> Result<Jet3> {
        let den = self.c * p + self.d;
        if den == Complex64::new(0.0, 0.0) {
            return Err(Error::Invalid(format!("jet requested at the pole {p}")));
        }
        let det = self.a * self.d - self.b * self.c;
        let inv = den.inv();
        let inv2 = inv * inv;
        Ok(Jet3::new(
            p,
            (self.a * p + self.b) * inv,
            det * inv2,
            -2.0 * self.c * det * inv2 * inv,
            6.0 * self.c * self.c * det * inv2 * inv2,
        ))
    }

    /// The unique Moebius map matching a 2-jet `(v0, v1, v2)` at `p`
    /// (`v1 != 0`).
    pub fn from_two_jet(p: Complex64, v0: Complex64, v1: Complex64, v2: Complex64) -> Result<Mobius> {
        if v1 == Complex64::new(0.0, 0.0) {
            return Err(Error::CriticalJet(p));
        }
        let k = v2 / (2.0 * v1);
        // [[v1 - v0 k, v0], [-k, 1]] after recentering z -> z - p
        Mobius::new(v1 - v0 * k, -(v1 - v0 * k) * p + v0, -k, k * p + 1.0)
    }

    /// The Moebius map sending `z1, z2, z3` to `w1, w2, w3` (all finite and
    /// pairwise distinct per triple).
    pub fn through_three_points(
        zs: (Complex64, Complex64, Complex64),
        ws: (Complex64, Complex64, Complex64),
    ) -> Result<Mobius> {
        // cross-ratio chart sending the triple to (0, 1, inf)
        fn chart(t: (Complex64, Complex64, Complex64)) -> Result<Mobius> {
            let (t1, t2, t3) = t;
            Mobius::new(t2 - t3, -t1 * (t2 - t3), t2 - t1, -t3 * (t2 - t1))
        }
        Ok(chart(ws)?.inverse().compose(&chart(zs)?))
    }
}
