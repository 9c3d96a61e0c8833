//! Weighted logarithmic potential with singular sets accumulating at +-1/2.
//!
//! The potential is
//!
//! ```text
//! u(z) = ln|z - 1/2| + ln|z + 1/2|
//!      + sum_{n>=1} 2^-n ( ln|z - n/(2n+1)| + ln|z + n/(2n+1)| )
//! ```
//!
//! It is harmonic on the unit disc away from the centers and equals -inf
//! exactly on the two mirror-image sets
//!
//! ```text
//! E+ = {1/2} u { n/(2n+1) : n >= 1 },    E- = -E+ ,
//! ```
//! both of which accumulate at their endpoint from inside the disc. Working
//! code truncates the series at index `N` (default 53, where the term weight
//! reaches machine epsilon scale) and carries an explicit majorant for the
//! dropped tail, so every evaluation is a (value, tail bound) pair rather
//! than a bare float.
//!
//! `-inf` is a value here, not an error: the gauge built on top of `u`
//! consumes it as `exp(-inf) = 0` (a collapsed fiber).

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::{BigRational, Ratio};

use crate::error::{Error, Result};

/// Which of the two mirror-image center families to enumerate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

/// One singular center with its series weight, in f64.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SingularTerm {
    pub center: f64,
    pub weight: f64,
}

/// One singular center with its series weight, exact.
///
/// Centers `n/(2n+1)` are already in lowest terms (gcd(n, 2n+1) = 1), so the
/// rational carries the index `n` recoverably. Weights `2^-n` need arbitrary
/// precision for large `n`, hence `BigRational`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactTerm {
    pub center: Ratio<i64>,
    pub weight: BigRational,
}

/// First `count + 1` singular points of one family, exactly: the weight-1
/// endpoint `sign/2` first, then `sign * n/(2n+1)` with weight `2^-n` for
/// `n = 1..=count`, ordered by index.
pub fn singular_points(side: Side, count: usize) -> Vec<ExactTerm> {
    let sign: i64 = match side {
        Side::Plus => 1,
        Side::Minus => -1,
    };
    let mut out = Vec::with_capacity(count + 1);
    out.push(ExactTerm {
        center: Ratio::new(sign, 2),
        weight: BigRational::from_integer(BigInt::from(1)),
    });
    for n in 1..=count as i64 {
        out.push(ExactTerm {
            center: Ratio::new(sign * n, 2 * n + 1),
            weight: BigRational::new(BigInt::from(1), BigInt::from(2).pow(n as u32)),
        });
    }
    out
}

/// Exact membership test for E+ on reduced rationals: `1/2` or `n/(2n+1)`
/// with `n >= 1`. No enumeration, so it covers indices beyond any truncation.
pub fn e_plus_contains(q: Ratio<i64>) -> bool {
    let (n, d) = (*q.numer(), *q.denom());
    (n == 1 && d == 2) || (n >= 1 && d == 2 * n + 1)
}

/// Exact membership test for E- (the mirror image of E+).
pub fn e_minus_contains(q: Ratio<i64>) -> bool {
    e_plus_contains(-q)
}

/// Which singular family an exact rational belongs to, if any.
pub fn e_side(q: Ratio<i64>) -> Option<Side> {
    if e_plus_contains(q) {
        Some(Side::Plus)
    } else if e_minus_contains(q) {
        Some(Side::Minus)
    } else {
        None
    }
}

/// A (value, tail-majorant) pair from evaluating the truncated series.
///
/// `tail_bound` majorizes `|u(z) - value|`; it is `+inf` when `z` lies on a
/// tail segment, where no finite majorant exists (the standalone
/// [`LogPotential::tail_bound`] errors there instead).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PotentialValue {
    pub value: f64,
    pub tail_bound: f64,
}

/// The truncated potential. Copyable configuration, no cached state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LogPotential {
    truncation: usize,
}

impl Default for LogPotential {
    fn default() -> Self {
        Self::new(Self::DEFAULT_TRUNCATION)
    }
}

impl LogPotential {
    /// Default series truncation; `2^-53` is the scale of one ulp at 1.
    pub const DEFAULT_TRUNCATION: usize = 53;

    pub fn new(truncation: usize) -> Self {
        assert!(truncation >= 1, "truncation must be at least 1");
        Self { truncation }
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    /// Retained plus-family terms `(center, weight)` in index order,
    /// starting with the weight-1 endpoint `1/2`. The minus family is the
    /// reflection `center -> -center` with equal weights.
    pub fn plus_terms(&self) -> impl Iterator<Item = SingularTerm> + '_ {
        (0..=self.truncation).map(|n| {
            if n == 0 {
                SingularTerm { center: 0.5, weight: 1.0 }
            } else {
                SingularTerm {
                    center: n as f64 / (2 * n + 1) as f64,
                    weight: 2f64.powi(-(n as i32)),
                }
            }
        })
    }

    /// Sum of the weights of the full (untruncated) series over both
    /// families: `2 * (1 + sum 2^-n) = 4`.
    pub fn total_weight_bound() -> f64 {
        4.0
    }

    /// Upper bound for `u` on the unit disc: every log-distance is below
    /// `ln 3` (distances stay under `3/2`), so `u < 4 ln 3` regardless of
    /// truncation.
    pub fn sup_bound_on_disc() -> f64 {
        4.0 * 3f64.ln()
    }

    /// Whether `z` coincides exactly (f64 equality) with a retained center.
    pub fn hits_retained_center(&self, z: Complex64) -> bool {
        z.im == 0.0 && self.plus_terms().any(|t| z.re == t.center || z.re == -t.center)
    }

    /// Truncated potential at `z` with a tail majorant.
    ///
    /// Returns `-inf` as the value exactly when `z` coincides with a
    /// retained center. Errors only when `z` is outside the open unit disc.
    ///
    /// Terms are accumulated per index as the pair
    /// `w_n (ln|z - a_n| + ln|z + a_n|)` with compensated summation, which
    /// makes the symmetries `u(-z) = u(z)` and `u(conj z) = u(z)` hold
    /// bit-for-bit (negation and conjugation permute values within a pair).
    pub fn eval(&self, z: Complex64) -> Result<PotentialValue> {
        if z.norm_sqr() >= 1.0 {
            return Err(Error::OutsideUnitDisc(z));
        }
        let mut sum = Neumaier::default();
        for t in self.plus_terms() {
            let d_minus = (z - t.center).norm();
            let d_plus = (z + t.center).norm();
            if d_minus == 0.0 || d_plus == 0.0 {
                return Ok(PotentialValue {
                    value: f64::NEG_INFINITY,
                    tail_bound: self.tail_bound(z).unwrap_or(f64::INFINITY),
                });
            }
            sum.add(t.weight * (d_minus.ln() + d_plus.ln()));
        }
        Ok(PotentialValue {
            value: sum.total(),
            tail_bound: self.tail_bound(z).unwrap_or(f64::INFINITY),
        })
    }

    /// Wirtinger derivative of the truncated series,
    /// `u_z = (1/2) sum w_n (1/(z - c_n) + 1/(z + c_n))`.
    ///
    /// Errors when `z` coincides with a retained center. `z` is not required
    /// to lie in the disc; the formula is global.
    pub fn wirtinger_z(&self, z: Complex64) -> Result<Complex64> {
        let mut sum = Complex64::new(0.0, 0.0);
        for t in self.plus_terms() {
            let d_minus = z - t.center;
            let d_plus = z + t.center;
            if d_minus == Complex64::new(0.0, 0.0) || d_plus == Complex64::new(0.0, 0.0) {
                return Err(Error::AtSingularCenter(z));
            }
            sum += t.weight * (d_minus.inv() + d_plus.inv());
        }
        Ok(0.5 * sum)
    }

    /// Majorant for the dropped tail `sum_{n>N}`: all omitted centers lie on
    /// the two segments `[a_{N+1}, 1/2]` and `[-1/2, -a_{N+1}]`, so with `d`
    /// the distance from `z` to their union,
    ///
    /// ```text
    /// |tail| <= 2^-N * 2 * max(|ln d|, ln 3).
    /// ```
    ///
    /// Errors when `d = 0` (`z` on a tail segment).
    pub fn tail_bound(&self, z: Complex64) -> Result<f64> {
        let next = self.truncation + 1;
        let a_next = next as f64 / (2 * next + 1) as f64;
        let d = dist_to_real_segment(z, a_next, 0.5).min(dist_to_real_segment(z, -0.5, -a_next));
        if d <= 0.0 {
            return Err(Error::OnTailSegment(z));
        }
        Ok(2f64.powi(-(self.truncation as i32)) * 2.0 * d.ln().abs().max(3f64.ln()))
    }
}

/// Distance from `z` to the real segment `[lo, hi]`.
pub(crate) fn dist_to_real_segment(z: Complex64, lo: f64, hi: f64) -> f64 {
    let x = z.re.clamp(lo, hi);
    Complex64::new(z.re - x, z.im).norm()
}

/// Neumaier-compensated accumulator. Keeps the truncated sum's rounding
/// error near one ulp, which the finite-difference oracles downstream rely
/// on (second differences divide by h^2 and amplify evaluation noise).
#[derive(Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.comp
    }
}
