//! Conformal charts on fibers of the complement and analytic continuation
//! of the logarithm along paths, with monodromy extraction.
//!
//! A non-degenerate fiber is the plane minus a closed disc; `m(w) =
//! r/(w - c)` maps it onto the punctured unit disc, and the covering
//! coordinate `zeta` with `e^zeta = m` has deck translation `zeta + 2 pi i`.
//! A degenerate fiber is the plane minus one point, charted by
//! `m(w) = 1/(w - c)` onto the punctured plane.
//!
//! The two degenerate cases behave differently under `ln w`, and that
//! asymmetry is the whole point: over the right singular family the
//! obstacle sits at `w = 0`, every loop around 0 is non-contractible in the
//! fiber, and the log increment is consistent on the cover; over the left
//! family the obstacle sits at `w = 1`, a loop around 0 contracts freely in
//! the fiber yet still picks up `2 pi i`, exhibiting a genuine branch
//! point. [`log_chart_witness`] packages that dichotomy per loop.

use std::f64::consts::{FRAC_PI_2, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::brset::FiberDescriptor;
use crate::error::{Error, Result};

/// Conformal chart data for one fiber.
#[derive(Clone, Copy, Debug)]
pub struct FiberChart {
    descriptor: FiberDescriptor,
}

impl FiberChart {
    pub fn new(descriptor: FiberDescriptor) -> Self {
        Self { descriptor }
    }

    pub fn descriptor(&self) -> &FiberDescriptor {
        &self.descriptor
    }

    /// Whether `w` belongs to the fiber (strictly outside the obstacle).
    pub fn contains_in_domain(&self, w: Complex64) -> bool {
        (w - self.descriptor.center).norm() > self.descriptor.radius
    }

    /// Chart onto the punctured unit disc (non-degenerate fiber) or the
    /// punctured plane (degenerate fiber).
    pub fn to_punctured_disc(&self, w: Complex64) -> Result<Complex64> {
        let d = w - self.descriptor.center;
        if d.norm() <= self.descriptor.radius {
            return Err(Error::InsideObstacle(w));
        }
        if self.descriptor.degenerate {
            Ok(d.inv())
        } else {
            Ok(self.descriptor.radius / d)
        }
    }

    /// Inverse chart. Non-degenerate fibers require `0 < |m| < 1`,
    /// degenerate ones only `m != 0`.
    pub fn from_punctured_disc(&self, m: Complex64) -> Result<Complex64> {
        if m == Complex64::new(0.0, 0.0) {
            return Err(Error::OutsideChartRange(m));
        }
        if self.descriptor.degenerate {
            Ok(self.descriptor.center + m.inv())
        } else {
            if m.norm() >= 1.0 {
                return Err(Error::OutsideChartRange(m));
            }
            Ok(self.descriptor.center + self.descriptor.radius / m)
        }
    }

    /// Evaluate the covering coordinate: the fiber point under `e^zeta = m`.
    /// Non-degenerate fibers need `Re zeta < 0` (so that `|m| < 1`); the
    /// deck translation `zeta -> zeta + 2 pi i` leaves the value unchanged.
    pub fn from_cover(&self, zeta: Complex64) -> Result<Complex64> {
        self.from_punctured_disc(zeta.exp())
    }
}

/// A piecewise-linear path given by its vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct PathPolyline {
    vertices: Vec<Complex64>,
}

impl PathPolyline {
    /// At least two vertices (a path, not a point).
    pub fn new(vertices: Vec<Complex64>) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::EmptyPath);
        }
        Ok(Self { vertices })
    }

    /// A polygonal circle around `center`, `turns` full revolutions
    /// (negative for clockwise), `segments_per_turn` chords each. The last
    /// vertex is pinned to the first exactly, so the loop closes
    /// bit-for-bit.
    pub fn circle(center: Complex64, radius: f64, turns: i32, segments_per_turn: usize) -> Self {
        assert!(turns != 0 && segments_per_turn >= 2, "need a genuine loop");
        let n = segments_per_turn * turns.unsigned_abs() as usize;
        let mut vertices = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let angle = TAU * (turns.signum() as f64) * (k as f64) / (segments_per_turn as f64);
            vertices.push(center + Complex64::from_polar(radius, angle));
        }
        vertices[n] = vertices[0];
        Self { vertices }
    }

    pub fn vertices(&self) -> &[Complex64] {
        &self.vertices
    }

    pub fn is_closed(&self) -> bool {
        self.vertices.first() == self.vertices.last()
    }

    /// Concatenate two paths whose endpoints match exactly.
    pub fn concat(&self, other: &PathPolyline) -> Result<PathPolyline> {
        if self.vertices.last() != other.vertices.first() {
            return Err(Error::Invalid(
                "paths can only be concatenated at a shared vertex".into(),
            ));
        }
        let mut vertices = self.vertices.clone();
        vertices.extend_from_slice(&other.vertices[1..]);
        PathPolyline::new(vertices)
    }

    /// The same path with every segment split in two.
    pub fn refined(&self) -> PathPolyline {
        let mut vertices = Vec::with_capacity(2 * self.vertices.len() - 1);
        for pair in self.vertices.windows(2) {
            vertices.push(pair[0]);
            vertices.push(0.5 * (pair[0] + pair[1]));
        }
        vertices.push(*self.vertices.last().unwrap());
        PathPolyline { vertices }
    }
}

/// Result of continuing `ln` along a path.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogContinuation {
    pub final_value: Complex64,
    pub increment: Complex64,
}

/// Net log increment around a closed loop and the winding number it
/// encodes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonodromyResult {
    #[serde(with = "crate::serde_util::complex_pair")]
    pub increment: Complex64,
    pub winding: i64,
}

/// The per-loop dichotomy record: monodromy of `ln w`, contractibility of
/// the loop inside the fiber, and whether together they witness a branch
/// point (nontrivial monodromy on a fiber-contractible loop).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogChartWitness {
    pub monodromy: MonodromyResult,
    pub contractible_in_fiber: bool,
    pub branch_point: bool,
}

const MAX_SUBDIVISION_DEPTH: u32 = 40;

/// Analytic continuation of `ln` along the path, starting from a branch
/// value at the first vertex (`exp(initial_branch)` must reproduce it to
/// `1e-10` relative).
///
/// Each segment contributes the principal log of the endpoint ratio;
/// segments whose argument step reaches `pi/2` are subdivided dyadically,
/// so every accepted step is unambiguous with margin. Paths through 0 are
/// rejected, as are segments needing more than 40 splitting levels (which
/// only happens when a segment grazes 0).
pub fn continue_log(path: &PathPolyline, initial_branch: Complex64) -> Result<LogContinuation> {
    let v0 = path.vertices[0];
    if v0 == Complex64::new(0.0, 0.0) {
        return Err(Error::PathThroughBranchPoint);
    }
    if (initial_branch.exp() - v0).norm() > 1e-10 * v0.norm().max(1.0) {
        return Err(Error::BranchMismatch { branch: initial_branch, vertex: v0 });
    }
    let mut value = initial_branch;
    for pair in path.vertices.windows(2) {
        value += log_step(pair[0], pair[1], 0)?;
    }
    Ok(LogContinuation { final_value: value, increment: value - initial_branch })
}

fn log_step(from: Complex64, to: Complex64, depth: u32) -> Result<Complex64> {
    let zero = Complex64::new(0.0, 0.0);
    if from == zero || to == zero {
        return Err(Error::PathThroughBranchPoint);
    }
    let d = (to / from).ln();
    if d.im.abs() < FRAC_PI_2 {
        return Ok(d);
    }
    if depth >= MAX_SUBDIVISION_DEPTH {
        return Err(Error::SubdivisionLimit);
    }
    let mid = 0.5 * (from + to);
    Ok(log_step(from, mid, depth + 1)? + log_step(mid, to, depth + 1)?)
}

/// Monodromy of `ln` around a closed loop: the increment over one circuit
/// and the nearest-integer winding it represents.
pub fn monodromy(loop_path: &PathPolyline) -> Result<MonodromyResult> {
    if !loop_path.is_closed() {
        return Err(Error::NonClosedPath);
    }
    let v0 = loop_path.vertices[0];
    if v0 == Complex64::new(0.0, 0.0) {
        return Err(Error::PathThroughBranchPoint);
    }
    let cont = continue_log(loop_path, v0.ln())?;
    let winding = (cont.increment.im / TAU).round() as i64;
    Ok(MonodromyResult { increment: cont.increment, winding })
}

/// Winding number of a closed loop around an arbitrary point.
pub fn winding_number(loop_path: &PathPolyline, p: Complex64) -> Result<i64> {
    let shifted: Vec<Complex64> = loop_path.vertices.iter().map(|&v| v - p).collect();
    Ok(monodromy(&PathPolyline::new(shifted)?)?.winding)
}

/// Run a closed loop through the log chart of a fiber: monodromy of
/// `ln w`, contractibility inside the fiber (winding around the obstacle),
/// and the branch-point verdict.
///
/// Every vertex must lie in the fiber domain.
pub fn log_chart_witness(chart: &FiberChart, loop_path: &PathPolyline) -> Result<LogChartWitness> {
    for &v in loop_path.vertices() {
        if !chart.contains_in_domain(v) {
            return Err(Error::InsideObstacle(v));
        }
    }
    let monodromy = monodromy(loop_path)?;
    let contractible_in_fiber = winding_number(loop_path, chart.descriptor().center)? == 0;
    Ok(LogChartWitness {
        monodromy,
        contractible_in_fiber,
        branch_point: contractible_in_fiber && monodromy.winding != 0,
    })
}
