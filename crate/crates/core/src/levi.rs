//! Boundary Levi-form computation and grid certification of positivity.
//!
//! The defining function of the obstacle near its boundary is
//!
//! ```text
//! rho(z, w) = u(z) + |z|^2 + A - ln|w - psi(z)|,
//! ```
//!
//! zero on the fiber boundary circles. At a boundary point
//! `w = psi(z) + r e^{i theta}` the complex-tangent restriction of the
//! Levi form of `rho` reduces (with `p = psi_z`, `q = psi_zzbar`, both
//! real) to the closed forms
//!
//! ```text
//! rho_z    = u_z + conj z + p cos(theta) / r
//! rho_w    = -e^{-i theta} / (2r)
//! f_zzbar  = 1 + q cos(theta)/r + p^2 cos(2 theta)/r^2
//! f_zwbar  = -p e^{2 i theta} / (2 r^2)
//! f_wwbar  = 0
//! H        = f_zzbar + 2 Re(f_zwbar conj(t_w)),   t_w = -rho_z/rho_w = 2 zeta rho_z.
//! ```
//!
//! Everything `psi`-dependent carries at least one factor `1/r`; since `r`
//! scales as `e^A`, `H(A) = 1 + alpha/r - p^2/r^2` per point, a parabola
//! in `1/r` opening away from 1. Three consequences drive the module:
//! plateau points have `H = 1` exactly (`p = q = 0`), certification on any
//! fixed grid is monotone in `A`, and `|H - 1|` decays like `e^{-A}` with
//! a per-point constant available in closed form.
//!
//! Positivity of `H` over a grid is sampling evidence for pseudoconvexity
//! of the complement, not a proof; points inside thin strips around the
//! singular families are excluded, which is harmless because the strips
//! sit inside the plateaus where `H = 1` analytically.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::brset::DiscFibration;
use crate::error::{Error, Result};
use crate::interpolant::SmoothStep;
use crate::potential::LogPotential;

/// Mixed second Wirtinger derivatives of a real-valued field of `(z, w)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ComplexHessian {
    pub f_zzbar: f64,
    pub f_wwbar: f64,
    #[serde(with = "crate::serde_util::complex_pair")]
    pub f_zwbar: Complex64,
}

/// First Wirtinger derivatives and Hessian of `rho` at a boundary point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RhoDerivs {
    pub rho_z: Complex64,
    pub rho_w: Complex64,
    pub hessian: ComplexHessian,
}

/// Product grid for certification: `nx x ny` cell centers over the disc,
/// `theta_count` boundary angles per cell, and the half-width `epsilon` of
/// the exclusion strips around the singular families.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub theta_count: usize,
    pub epsilon: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { nx: 64, ny: 64, theta_count: 32, epsilon: 1.0 / 48.0 }
    }
}

/// Outcome of a certification run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeviReport {
    pub a: f64,
    pub grid: GridSpec,
    pub min_h: f64,
    #[serde(with = "crate::serde_util::complex_pair")]
    pub argmin_z: Complex64,
    pub argmin_theta: f64,
    pub margin_requested: f64,
    pub certified: bool,
}

/// One evaluated grid point, for dumps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LeviSample {
    pub z: Complex64,
    pub theta: f64,
    pub h: f64,
}

/// Result of the minimal-constant search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinAResult {
    pub a_star: f64,
    /// Every `(A, certified)` pair evaluated on the way, in evaluation
    /// order.
    pub evaluations: Vec<(f64, bool)>,
    pub final_report: LeviReport,
}

/// Per-cell quantities reused across all boundary angles of one fiber.
#[derive(Clone, Copy, Debug)]
struct CellQuantities {
    z: Complex64,
    u_z: Complex64,
    p: f64,
    q: f64,
    r: f64,
}

/// The Levi-form analyzer for one fibration.
#[derive(Clone, Copy, Debug)]
pub struct LeviForm {
    fibration: DiscFibration,
}

impl LeviForm {
    pub fn new(fibration: DiscFibration) -> Self {
        Self { fibration }
    }

    pub fn with_a(a: f64) -> Self {
        Self::new(DiscFibration::with_a(a))
    }

    pub fn fibration(&self) -> &DiscFibration {
        &self.fibration
    }

    /// Whether `Re z` falls inside the exclusion strip of half-pad
    /// `epsilon` around either singular segment.
    pub fn excluded(z: Complex64, epsilon: f64) -> bool {
        let x = z.re;
        (1.0 / 3.0 - epsilon..=0.5 + epsilon).contains(&x)
            || (-0.5 - epsilon..=-1.0 / 3.0 + epsilon).contains(&x)
    }

    fn cell_quantities(&self, z: Complex64) -> Result<CellQuantities> {
        let fiber = self.fibration.fiber(z)?;
        if fiber.degenerate {
            return Err(Error::DegenerateFiber(z));
        }
        let u_z = self.fibration.potential().wirtinger_z(z)?;
        let d = self.fibration.step().psi_derivs(z);
        Ok(CellQuantities { z, u_z, p: d.psi_z.re, q: d.psi_zzbar, r: fiber.radius })
    }

    /// Closed-form derivatives of `rho` at the boundary point
    /// `w = psi(z) + r e^{i theta}`. Errors inside the exclusion strips and
    /// on degenerate fibers.
    pub fn rho_derivs_closed(&self, z: Complex64, theta: f64, epsilon: f64) -> Result<RhoDerivs> {
        if Self::excluded(z, epsilon) {
            return Err(Error::Invalid(format!(
                "z = {z} lies in an exclusion strip (epsilon = {epsilon})"
            )));
        }
        let cq = self.cell_quantities(z)?;
        Ok(rho_derivs_from_cell(&cq, theta))
    }

    /// The complex-tangent Levi quantity `H` at one boundary point.
    pub fn tangent_levi(&self, z: Complex64, theta: f64, epsilon: f64) -> Result<f64> {
        if Self::excluded(z, epsilon) {
            return Err(Error::Invalid(format!(
                "z = {z} lies in an exclusion strip (epsilon = {epsilon})"
            )));
        }
        let cq = self.cell_quantities(z)?;
        Ok(h_from_cell(&cq, theta))
    }

    /// Per-point flattening constant: with `r0 = r(z) e^{-A}` and
    /// `alpha(theta)` the linear coefficient of `H - 1` in `1/r`,
    /// `|H(A) - 1| <= C e^{-A}` for all `A >= a_ref`, where
    /// `C = (max_theta |alpha| + p^2 e^{-a_ref}/r0) / r0`.
    pub fn flattening_constant(&self, z: Complex64, a_ref: f64) -> Result<f64> {
        let cq = self.cell_quantities(z)?;
        let r0 = cq.r * (-self.fibration.a()).exp();
        // alpha = q cos t - 2 p Re(e^{it} conj(u_z + conj z)); |.| <= |q| + 2|p| |u_z + conj z|
        let alpha_max = cq.q.abs() + 2.0 * cq.p.abs() * (cq.u_z + cq.z.conj()).norm();
        Ok((alpha_max + cq.p * cq.p * (-a_ref).exp() / r0) / r0)
    }

    fn validate_grid(&self, grid: &GridSpec) -> Result<()> {
        if grid.nx == 0 || grid.ny == 0 || grid.theta_count == 0 {
            return Err(Error::InvalidGrid("grid dimensions must be positive".into()));
        }
        if !(grid.epsilon > 0.0) {
            return Err(Error::InvalidGrid("epsilon must be positive".into()));
        }
        let s = self.fibration.step().plateau_edge();
        let strip_inner = 1.0 / 3.0 - grid.epsilon;
        let s_f = *s.numer() as f64 / *s.denom() as f64;
        if strip_inner < s_f {
            return Err(Error::InvalidGrid(format!(
                "epsilon = {} pushes the exclusion strip outside the plateau (needs 1/3 - epsilon >= {})",
                grid.epsilon, s_f
            )));
        }
        Ok(())
    }

    fn grid_cells(&self, grid: &GridSpec) -> Vec<Complex64> {
        let mut cells = Vec::new();
        for j in 0..grid.ny {
            let y = -1.0 + (j as f64 + 0.5) * 2.0 / grid.ny as f64;
            for i in 0..grid.nx {
                let x = -1.0 + (i as f64 + 0.5) * 2.0 / grid.nx as f64;
                let z = Complex64::new(x, y);
                if z.norm_sqr() < 1.0 && !Self::excluded(z, grid.epsilon) {
                    cells.push(z);
                }
            }
        }
        cells
    }

    /// Minimum of `H` over the product grid, with the certification
    /// verdict. Non-finite `H` values count as `-inf` (uncertifiable).
    ///
    /// The grid is evaluated in parallel; the minimum is reduced by the
    /// total order (H, cell index, angle index), so reports are
    /// bit-identical regardless of worker count or scheduling.
    pub fn certify(&self, grid: &GridSpec, margin: f64) -> Result<LeviReport> {
        self.validate_grid(grid)?;
        let cells = self.grid_cells(grid);
        if cells.is_empty() {
            return Err(Error::InvalidGrid("no grid cells survive the exclusions".into()));
        }
        let identity = (f64::INFINITY, usize::MAX, usize::MAX);
        let (min_h, argmin_cell, argmin_angle) = cells
            .par_iter()
            .enumerate()
            .map(|(ci, &z)| {
                let cq = self.cell_quantities(z).ok();
                let mut best = (f64::INFINITY, ci, usize::MAX);
                for ti in 0..grid.theta_count {
                    let theta =
                        std::f64::consts::TAU * ti as f64 / grid.theta_count as f64;
                    // cells are never degenerate or singular by
                    // construction, but an unexpected failure must surface
                    // as uncertifiable, not vanish; ditto non-finite H
                    let h = cq
                        .as_ref()
                        .map(|cq| h_from_cell(cq, theta))
                        .filter(|h| h.is_finite())
                        .unwrap_or(f64::NEG_INFINITY);
                    if (h, ci, ti) < best {
                        best = (h, ci, ti);
                    }
                }
                best
            })
            .reduce(|| identity, |a, b| if a <= b { a } else { b });
        if argmin_cell == usize::MAX {
            return Err(Error::InvalidGrid("no grid cells survive the exclusions".into()));
        }
        let argmin_z = cells[argmin_cell];
        let argmin_theta =
            std::f64::consts::TAU * argmin_angle as f64 / grid.theta_count as f64;
        Ok(LeviReport {
            a: self.fibration.a(),
            grid: *grid,
            min_h,
            argmin_z,
            argmin_theta,
            margin_requested: margin,
            certified: min_h >= margin,
        })
    }

    /// All grid samples in deterministic row-major/angle order, for dumps.
    pub fn grid_samples(&self, grid: &GridSpec) -> Result<Vec<LeviSample>> {
        self.validate_grid(grid)?;
        let cells = self.grid_cells(grid);
        let samples: Vec<Vec<LeviSample>> = cells
            .par_iter()
            .map(|&z| {
                let cq = self.cell_quantities(z).ok();
                (0..grid.theta_count)
                    .map(|ti| {
                        let theta =
                            std::f64::consts::TAU * ti as f64 / grid.theta_count as f64;
                        let h = cq.as_ref().map_or(f64::NEG_INFINITY, |cq| h_from_cell(cq, theta));
                        LeviSample { z, theta, h }
                    })
                    .collect()
            })
            .collect();
        Ok(samples.into_iter().flatten().collect())
    }
}

fn rho_derivs_from_cell(cq: &CellQuantities, theta: f64) -> RhoDerivs {
    let cos_t = theta.cos();
    let inv_r = 1.0 / cq.r;
    let zeta = Complex64::from_polar(cq.r, theta);
    let p_term = if cq.p == 0.0 { 0.0 } else { cq.p * cos_t * inv_r };
    let rho_z = cq.u_z + cq.z.conj() + p_term;
    let rho_w = -0.5 / zeta;
    let q_term = if cq.q == 0.0 { 0.0 } else { cq.q * cos_t * inv_r };
    let p2_term = if cq.p == 0.0 {
        0.0
    } else {
        cq.p * cq.p * (2.0 * cos_t * cos_t - 1.0) * inv_r * inv_r
    };
    let f_zwbar = if cq.p == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        -cq.p * Complex64::from_polar(0.5 * inv_r * inv_r, 2.0 * theta)
    };
    RhoDerivs {
        rho_z,
        rho_w,
        hessian: ComplexHessian { f_zzbar: 1.0 + q_term + p2_term, f_wwbar: 0.0, f_zwbar },
    }
}

fn h_from_cell(cq: &CellQuantities, theta: f64) -> f64 {
    let d = rho_derivs_from_cell(cq, theta);
    let zeta = Complex64::from_polar(cq.r, theta);
    let t_w = 2.0 * zeta * d.rho_z;
    // f_wwbar = 0 identically, its |t_w|^2 term drops
    let cross = if d.hessian.f_zwbar == Complex64::new(0.0, 0.0) {
        0.0
    } else {
        2.0 * (d.hessian.f_zwbar * t_w.conj()).re
    };
    d.hessian.f_zzbar + cross
}

/// Bisect for the smallest grid-certified constant in `[lo, hi]`.
///
/// Requires `certify` to fail at `lo` and succeed at `hi`; refines the
/// bracket to width `1e-2` and cross-checks that every failed evaluation
/// sits below every successful one (grid certification is monotone in the
/// constant because each point's `H` is a downward parabola in `e^{-A}`).
pub fn find_min_a(
    lo: f64,
    hi: f64,
    grid: &GridSpec,
    margin: f64,
) -> Result<MinAResult> {
    if !(lo < hi) {
        return Err(Error::InvalidBracket(format!("need lo < hi, got [{lo}, {hi}]")));
    }
    let mut evaluations = Vec::new();
    let run = |a: f64, evals: &mut Vec<(f64, bool)>| -> Result<LeviReport> {
        let report = LeviForm::with_a(a).certify(grid, margin)?;
        evals.push((a, report.certified));
        Ok(report)
    };
    let lo_report = run(lo, &mut evaluations)?;
    if lo_report.certified {
        return Err(Error::InvalidBracket(format!(
            "certification already succeeds at lo = {lo} (min_H = {})",
            lo_report.min_h
        )));
    }
    let hi_report = run(hi, &mut evaluations)?;
    if !hi_report.certified {
        return Err(Error::InvalidBracket(format!(
            "certification still fails at hi = {hi} (min_H = {})",
            hi_report.min_h
        )));
    }
    let (mut lo, mut hi) = (lo, hi);
    let mut final_report = hi_report;
    while hi - lo > 1e-2 {
        let mid = 0.5 * (lo + hi);
        let report = run(mid, &mut evaluations)?;
        if report.certified {
            hi = mid;
            final_report = report;
        } else {
            lo = mid;
        }
    }
    let worst_failure = evaluations
        .iter()
        .filter(|(_, ok)| !ok)
        .map(|(a, _)| *a)
        .fold(f64::NEG_INFINITY, f64::max);
    let best_success = evaluations
        .iter()
        .filter(|(_, ok)| *ok)
        .map(|(a, _)| *a)
        .fold(f64::INFINITY, f64::min);
    if worst_failure >= best_success {
        return Err(Error::Invalid(format!(
            "certification is not monotone on this grid: fails at {worst_failure} but succeeds at {best_success}"
        )));
    }
    Ok(MinAResult { a_star: hi, evaluations, final_report })
}

/// First Wirtinger derivatives and mixed Hessian of a real field of
/// `(z, w)`, by second-order central differences.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FdDerivs {
    pub f_z: Complex64,
    pub f_w: Complex64,
    pub hessian: ComplexHessian,
}

/// Finite-difference Wirtinger derivatives of `field` at `(z, w)` with
/// step `h`:
///
/// ```text
/// f_z     = (f_x - i f_y)/2                     (same in w)
/// f_zzbar = (f_xx + f_yy)/4                     (same in w)
/// f_zwbar = [(f_xu + f_yv) + i (f_xv - f_yu)]/4
/// ```
///
/// Errors when any stencil sample is non-finite.
pub fn wirtinger_fd<F: Fn(Complex64, Complex64) -> f64>(
    field: F,
    z: Complex64,
    w: Complex64,
    h: f64,
) -> Result<FdDerivs> {
    let ex = Complex64::new(h, 0.0);
    let ey = Complex64::new(0.0, h);
    let sample = |z: Complex64, w: Complex64| -> Result<f64> {
        let v = field(z, w);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::SingularStencil)
        }
    };
    let f00 = sample(z, w)?;
    let fxp = sample(z + ex, w)?;
    let fxm = sample(z - ex, w)?;
    let fyp = sample(z + ey, w)?;
    let fym = sample(z - ey, w)?;
    let fup = sample(z, w + ex)?;
    let fum = sample(z, w - ex)?;
    let fvp = sample(z, w + ey)?;
    let fvm = sample(z, w - ey)?;
    let two_h = 2.0 * h;
    let h2 = h * h;
    let f_z = Complex64::new((fxp - fxm) / two_h, -(fyp - fym) / two_h) * 0.5;
    let f_w = Complex64::new((fup - fum) / two_h, -(fvp - fvm) / two_h) * 0.5;
    let f_zzbar = (fxp + fxm + fyp + fym - 4.0 * f00) / (4.0 * h2);
    let f_wwbar = (fup + fum + fvp + fvm - 4.0 * f00) / (4.0 * h2);
    let mixed = |dz: Complex64, dw: Complex64| -> Result<f64> {
        Ok((sample(z + dz, w + dw)? - sample(z + dz, w - dw)? - sample(z - dz, w + dw)?
            + sample(z - dz, w - dw)?)
            / (4.0 * h2))
    };
    let f_xu = mixed(ex, ex)?;
    let f_yv = mixed(ey, ey)?;
    let f_xv = mixed(ex, ey)?;
    let f_yu = mixed(ey, ex)?;
    Ok(FdDerivs {
        f_z,
        f_w,
        hessian: ComplexHessian {
            f_zzbar,
            f_wwbar,
            f_zwbar: Complex64::new(f_xu + f_yv, f_xv - f_yu) * 0.25,
        },
    })
}

/// Richardson-extrapolated [`wirtinger_fd`] from steps `h` and `h/2`
/// (fourth-order for the second-order stencils).
pub fn wirtinger_fd_richardson<F: Fn(Complex64, Complex64) -> f64 + Copy>(
    field: F,
    z: Complex64,
    w: Complex64,
    h: f64,
) -> Result<FdDerivs> {
    let coarse = wirtinger_fd(field, z, w, h)?;
    let fine = wirtinger_fd(field, z, w, h / 2.0)?;
    let combine = |c: f64, f: f64| (4.0 * f - c) / 3.0;
    let combine_c =
        |c: Complex64, f: Complex64| Complex64::new(combine(c.re, f.re), combine(c.im, f.im));
    Ok(FdDerivs {
        f_z: combine_c(coarse.f_z, fine.f_z),
        f_w: combine_c(coarse.f_w, fine.f_w),
        hessian: ComplexHessian {
            f_zzbar: combine(coarse.hessian.f_zzbar, fine.hessian.f_zzbar),
            f_wwbar: combine(coarse.hessian.f_wwbar, fine.hessian.f_wwbar),
            f_zwbar: combine_c(coarse.hessian.f_zwbar, fine.hessian.f_zwbar),
        },
    })
}

/// The defining field itself, for oracle comparisons: `rho(z, w)` built
/// from the same potential and profile the closed forms use.
pub fn rho_field(
    potential: LogPotential,
    step: SmoothStep,
    a: f64,
) -> impl Fn(Complex64, Complex64) -> f64 + Copy {
    move |z: Complex64, w: Complex64| {
        let u = match potential.eval(z) {
            Ok(v) => v.value,
            Err(_) => f64::NAN,
        };
        u + z.norm_sqr() + a - (w - step.eval_psi(z)).norm().ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    const EPS: f64 = 1.0 / 48.0;

    #[test]
    fn fd_oracle_on_square_modulus() {
        let d = wirtinger_fd(|z, _| z.norm_sqr(), c(0.3, -0.2), c(1.0, 1.0), 1e-4).unwrap();
        assert!((d.hessian.f_zzbar - 1.0).abs() < 1e-8);
        assert!(d.hessian.f_wwbar.abs() < 1e-8);
        assert!(d.hessian.f_zwbar.norm() < 1e-8);
        assert!((d.f_z - c(0.3, 0.2)).norm() < 1e-8); // d/dz |z|^2 = conj z
        assert!(d.f_w.norm() < 1e-8);
    }

    #[test]
    fn fd_oracle_on_harmonic_log() {
        // plain second differences of ln|w| at h = 1e-4 sit on a ~2e-8
        // roundoff floor; the larger Richardson step keeps both truncation
        // and roundoff below 1e-9
        let d =
            wirtinger_fd_richardson(|_, w| w.norm().ln(), c(0.0, 0.0), c(2.0, 0.0), 1e-3).unwrap();
        assert!(d.hessian.f_wwbar.abs() < 1e-8);
        assert!((d.f_w - c(0.25, 0.0)).norm() < 1e-8); // 1/(2w) at w = 2
    }

    #[test]
    fn fd_oracle_on_mixed_bilinear() {
        // Re(z conj w) has f_zwbar = 1/2 and no other second derivatives
        let d = wirtinger_fd(|z, w| (z * w.conj()).re, c(0.4, 0.1), c(-0.3, 0.9), 1e-4).unwrap();
        assert!((d.hessian.f_zwbar - c(0.5, 0.0)).norm() < 1e-8);
        assert!(d.hessian.f_zzbar.abs() < 1e-8);
        assert!(d.hessian.f_wwbar.abs() < 1e-8);
    }

    #[test]
    fn fd_oracle_rejects_singular_stencils() {
        let r = wirtinger_fd(|_, w| w.norm().ln(), c(0.0, 0.0), c(0.0, 0.0), 1e-4);
        assert!(matches!(r, Err(Error::SingularStencil)));
    }

    #[test]
    fn plateau_points_have_unit_levi_form_exactly() {
        // plateau abscissas that avoid the exclusion strips: between the
        // profile edge 7/24 and 1/3 - epsilon, or beyond 1/2 + epsilon
        let levi = LeviForm::with_a(10.0);
        for z in [c(0.30, 0.2), c(0.6, 0.2), c(-0.55, -0.3)] {
            for theta in [0.0, 1.3, 4.0] {
                let d = levi.rho_derivs_closed(z, theta, EPS).unwrap();
                assert_eq!(d.hessian.f_zzbar, 1.0);
                assert_eq!(d.hessian.f_zwbar, c(0.0, 0.0));
                assert_eq!(d.hessian.f_wwbar, 0.0);
                assert_eq!(levi.tangent_levi(z, theta, EPS).unwrap(), 1.0);
            }
        }
    }

    #[test]
    fn exclusion_strip_is_enforced() {
        let levi = LeviForm::with_a(10.0);
        assert!(levi.rho_derivs_closed(c(0.34, 0.1), 0.0, EPS).is_err());
        assert!(levi.tangent_levi(c(-0.45, 0.2), 0.0, EPS).is_err());
        assert!(levi.rho_derivs_closed(c(0.6, 0.1), 0.0, EPS).is_ok());
    }

    #[test]
    fn degenerate_fibers_are_rejected() {
        let levi = LeviForm::with_a(10.0);
        // exact retained center, outside any strip only by epsilon = 0
        let r = levi.rho_derivs_closed(c(1.0 / 3.0, 0.0), 0.0, 1e-9);
        assert!(matches!(r, Err(Error::DegenerateFiber(_)) | Err(Error::Invalid(_))));
    }

    fn random_transition_point(rng: &mut ChaCha8Rng) -> Complex64 {
        // inside the transition strip, away from the real axis so the
        // nearest singular center is at distance >= 0.2
        let x = rng.gen_range(-0.28..0.28);
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let y = sign * rng.gen_range(0.2..0.6);
        c(x, y)
    }

    #[test]
    fn closed_forms_match_fd_oracle() {
        let a = 10.0;
        let levi = LeviForm::with_a(a);
        let field = rho_field(*levi.fibration().potential(), *levi.fibration().step(), a);
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0030);
        // floor-relative gate: the FD noise floor at these steps sits near
        // 1e-6 absolute, while entries like f_zwbar scale as e^{-2A}
        let tol = |closed: f64| 1e-5 * closed.abs().max(1.0);
        for _ in 0..25 {
            let z = random_transition_point(&mut rng);
            let theta = rng.gen_range(0.0..std::f64::consts::TAU);
            let closed = levi.rho_derivs_closed(z, theta, EPS).unwrap();
            let fiber = levi.fibration().fiber(z).unwrap();
            let w = fiber.center + Complex64::from_polar(fiber.radius, theta);
            let fd = wirtinger_fd_richardson(field, z, w, 1e-4).unwrap();
            assert!((closed.rho_z - fd.f_z).norm() < tol(closed.rho_z.norm()), "rho_z at {z}");
            assert!((closed.rho_w - fd.f_w).norm() < tol(closed.rho_w.norm()), "rho_w at {z}");
            assert!(
                (closed.hessian.f_zzbar - fd.hessian.f_zzbar).abs() < tol(closed.hessian.f_zzbar),
                "f_zzbar at {z}: closed {} fd {}",
                closed.hessian.f_zzbar,
                fd.hessian.f_zzbar
            );
            assert!(
                (closed.hessian.f_zwbar - fd.hessian.f_zwbar).norm()
                    < tol(closed.hessian.f_zwbar.norm()),
                "f_zwbar at {z}"
            );
            assert!(fd.hessian.f_wwbar.abs() < 1e-6, "f_wwbar at {z}");
        }
    }

    #[test]
    fn tangent_levi_matches_fd_assembly() {
        // run at A = 0 where the psi-coupled entries are O(1): at large A
        // the FD noise on f_zwbar is amplified by |t_w| ~ e^A
        let a = 0.0;
        let levi = LeviForm::with_a(a);
        let field = rho_field(*levi.fibration().potential(), *levi.fibration().step(), a);
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0031);
        for _ in 0..10 {
            let z = random_transition_point(&mut rng);
            let theta = rng.gen_range(0.0..std::f64::consts::TAU);
            let h_closed = levi.tangent_levi(z, theta, EPS).unwrap();
            let fiber = levi.fibration().fiber(z).unwrap();
            let w = fiber.center + Complex64::from_polar(fiber.radius, theta);
            let fd = wirtinger_fd_richardson(field, z, w, 4e-4).unwrap();
            let t_w = -fd.f_z / fd.f_w;
            let h_fd = fd.hessian.f_zzbar
                + 2.0 * (fd.hessian.f_zwbar * t_w.conj()).re
                + fd.hessian.f_wwbar * t_w.norm_sqr();
            assert!(
                (h_closed - h_fd).abs() < 1e-5 * h_closed.abs().max(1.0),
                "H at ({z}, {theta}): closed {h_closed} vs fd {h_fd}"
            );
        }
    }

    #[test]
    fn transition_levi_flattens_toward_one() {
        let z = c(0.1, 0.0);
        let theta = 0.0;
        let h30 = LeviForm::with_a(30.0).tangent_levi(z, theta, EPS).unwrap();
        assert!((h30 - 1.0).abs() < 1e-3);
        let h60 = LeviForm::with_a(60.0).tangent_levi(z, theta, EPS).unwrap();
        assert!((h60 - 1.0).abs() < (h30 - 1.0).abs());
    }

    #[test]
    fn flattening_bound_holds_at_reference_points() {
        let z = c(0.1, 0.0);
        let c_bound = LeviForm::with_a(10.0).flattening_constant(z, 10.0).unwrap();
        assert!(c_bound > 0.0);
        for a in [10.0, 15.0, 20.0] {
            let levi = LeviForm::with_a(a);
            for theta in [0.0, 0.8, 2.5, 4.1] {
                let h = levi.tangent_levi(z, theta, EPS).unwrap();
                assert!(
                    (h - 1.0).abs() <= c_bound * (-a).exp() * (1.0 + 1e-12),
                    "A = {a}, theta = {theta}: |H-1| = {} vs bound {}",
                    (h - 1.0).abs(),
                    c_bound * (-a).exp()
                );
            }
        }
    }

    fn small_grid() -> GridSpec {
        GridSpec { nx: 16, ny: 16, theta_count: 8, epsilon: EPS }
    }

    #[test]
    fn certify_succeeds_at_large_a_and_fails_at_negative_a() {
        let good = LeviForm::with_a(10.0).certify(&small_grid(), 0.5).unwrap();
        assert!(good.certified);
        assert!(good.min_h >= 0.5 && good.min_h <= 1.5, "min_H = {}", good.min_h);
        let bad = LeviForm::with_a(-20.0).certify(&small_grid(), 0.5).unwrap();
        assert!(!bad.certified);
        assert!(bad.min_h < 0.0, "min_H = {}", bad.min_h);
    }

    #[test]
    fn certify_validates_grid_parameters() {
        let levi = LeviForm::with_a(10.0);
        let mut grid = small_grid();
        grid.nx = 0;
        assert!(matches!(levi.certify(&grid, 0.5), Err(Error::InvalidGrid(_))));
        let mut grid = small_grid();
        grid.epsilon = 0.2; // strips would leave the plateaus
        assert!(matches!(levi.certify(&grid, 0.5), Err(Error::InvalidGrid(_))));
    }

    #[test]
    fn certify_is_deterministic_across_worker_counts() {
        let grid = small_grid();
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| LeviForm::with_a(10.0).certify(&grid, 0.5).unwrap())
        };
        let single = run(1);
        let quad = run(4);
        assert_eq!(single, quad);
    }

    #[test]
    fn grid_samples_cover_the_product_grid_deterministically() {
        let levi = LeviForm::with_a(10.0);
        let grid = GridSpec { nx: 8, ny: 8, theta_count: 4, epsilon: EPS };
        let samples = levi.grid_samples(&grid).unwrap();
        let again = levi.grid_samples(&grid).unwrap();
        assert_eq!(samples, again);
        assert!(samples.len() % grid.theta_count == 0);
        assert!(samples.iter().all(|s| s.h.is_finite()));
        // the certify minimum is attained among the samples
        let report = levi.certify(&grid, 0.5).unwrap();
        let min = samples.iter().map(|s| s.h).fold(f64::INFINITY, f64::min);
        assert_eq!(min, report.min_h);
    }

    #[test]
    fn find_min_a_bisects_to_a_monotone_threshold() {
        let grid = small_grid();
        let res = find_min_a(-30.0, 30.0, &grid, 0.1).unwrap();
        assert!(res.a_star > -30.0 && res.a_star < 30.0);
        assert!(res.final_report.certified);
        // postconditions on the fixed grid
        assert!(LeviForm::with_a(res.a_star + 1.0).certify(&grid, 0.1).unwrap().certified);
        assert!(!LeviForm::with_a(res.a_star - 1.0).certify(&grid, 0.1).unwrap().certified);
        // bracket width
        let last_failure = res
            .evaluations
            .iter()
            .filter(|(_, ok)| !ok)
            .map(|(a, _)| *a)
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(res.a_star - last_failure <= 1e-2 * (1.0 + 1e-9));
    }

    #[test]
    fn find_min_a_rejects_bad_brackets() {
        let grid = small_grid();
        assert!(matches!(
            find_min_a(20.0, 30.0, &grid, 0.1),
            Err(Error::InvalidBracket(_))
        ));
        assert!(matches!(
            find_min_a(-40.0, -35.0, &grid, 0.1),
            Err(Error::InvalidBracket(_))
        ));
        assert!(matches!(
            find_min_a(5.0, -5.0, &grid, 0.1),
            Err(Error::InvalidBracket(_))
        ));
    }
}
