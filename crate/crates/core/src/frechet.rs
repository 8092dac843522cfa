//! Karcher (Fréchet) means of weighted point sets on the unit-determinant
//! slice.
//!
//! The iteration is `x ← exp_x(step · Σ w_i log_x(y_i))`, evaluated in the
//! whitened frame at `x` where `log_x(y) = x^{1/2} log(x^{-1/2} y x^{-1/2}) x^{1/2}`.
//! The step is halved whenever the objective would increase.

use alloc::vec::Vec;

use crate::eigen::{herm_eigen, SpectralFn};
use crate::manifold::{distance, project, Frame, GroupElement, SpdPoint, UnitDetPoint, DEFAULT_SCALE};
use crate::matrix::{HermMatrix, Mat};
use crate::scalar::Scalar;
use crate::{Error, Result};

/// Allowed objective increase per accepted step.
pub const DESCENT_SLACK: f64 = 1e-12;
const MAX_HALVINGS: usize = 20;
const PAIRWISE_BLOCK: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanConfig {
    pub max_iters: usize,
    /// Threshold on the metric norm of the mean tangent vector.
    pub grad_tol: f64,
    pub step: f64,
    /// Distance scale used for the objective and the gradient norm.
    pub scale: f64,
}

impl Default for MeanConfig {
    fn default() -> Self {
        Self {
            max_iters: 200,
            grad_tol: 1e-9,
            step: 1.0,
            scale: DEFAULT_SCALE,
        }
    }
}

impl MeanConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument("max_iters must be at least 1"));
        }
        if !(self.grad_tol > 0.0) {
            return Err(Error::InvalidArgument("grad_tol must be positive"));
        }
        if !(self.step > 0.0 && self.step <= 1.0) {
            return Err(Error::InvalidArgument("step must lie in (0, 1]"));
        }
        if !(self.scale > 0.0) {
            return Err(Error::InvalidArgument("scale must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeanResult<S> {
    pub mean: UnitDetPoint<S>,
    /// Accepted iterations.
    pub iterations: usize,
    pub final_grad_norm: f64,
    pub converged: bool,
    /// Objective at the initial point and after each accepted iteration.
    pub objective_history: Vec<f64>,
}

fn checked_weights<S: Scalar>(points: &[UnitDetPoint<S>], weights: Option<&[f64]>) -> Result<Vec<f64>> {
    if points.is_empty() {
        return Err(Error::Empty);
    }
    let d = points[0].dim();
    if let Some(p) = points.iter().find(|p| p.dim() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: p.dim(),
        });
    }
    match weights {
        None => Ok(alloc::vec![1.0 / points.len() as f64; points.len()]),
        Some(w) => {
            if w.len() != points.len() {
                return Err(Error::InvalidWeights("length differs from the number of points"));
            }
            if w.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
                return Err(Error::InvalidWeights("weights must be finite and nonnegative"));
            }
            let total: f64 = w.iter().sum();
            if crate::math::abs(total - 1.0) > 1e-9 {
                return Err(Error::InvalidWeights("weights must sum to 1"));
            }
            Ok(w.to_vec())
        }
    }
}

/// `Σ w_i log(x^{-1/2} y_i x^{-1/2})` and `Σ w_i ‖log(x^{-1/2} y_i x^{-1/2})‖²`,
/// summed pairwise so the result does not depend on thread scheduling or
/// accumulate linear rounding drift.
fn whitened_moments<S: Scalar>(
    frame: &Frame<S>,
    points: &[UnitDetPoint<S>],
    weights: &[f64],
) -> Result<(Mat<S>, f64)> {
    if points.len() <= PAIRWISE_BLOCK {
        let d = frame.sqrt.dim();
        let mut acc = Mat::zeros(d);
        let mut sq = 0.0;
        for (y, &w) in points.iter().zip(weights) {
            if w == 0.0 {
                continue;
            }
            let log = herm_eigen(&frame.whiten(y.mat()))?.apply(SpectralFn::Log)?;
            let norm = log.frobenius_norm();
            sq += w * norm * norm;
            acc.add_scaled(w, log.mat());
        }
        return Ok((acc, sq));
    }
    let mid = points.len() / 2;
    let (a, sa) = whitened_moments(frame, &points[..mid], &weights[..mid])?;
    let (b, sb) = whitened_moments(frame, &points[mid..], &weights[mid..])?;
    Ok((a.add(&b), sa + sb))
}

/// `Σ w_i d(x, y_i)²` with uniform weights when `weights` is `None`.
pub fn frechet_objective<S: Scalar>(
    x: &UnitDetPoint<S>,
    points: &[UnitDetPoint<S>],
    weights: Option<&[f64]>,
    scale: f64,
) -> Result<f64> {
    let w = checked_weights(points, weights)?;
    let frame = Frame::at(x.mat())?;
    let (_, sq) = whitened_moments(&frame, points, &w)?;
    Ok(scale * scale * sq)
}

struct Iterate<S> {
    point: UnitDetPoint<S>,
    frame: Frame<S>,
    direction: HermMatrix<S>,
    objective: f64,
}

impl<S: Scalar> Iterate<S> {
    fn at(point: UnitDetPoint<S>, points: &[UnitDetPoint<S>], w: &[f64], scale: f64) -> Result<Self> {
        let frame = Frame::at(point.mat())?;
        let (dir, sq) = whitened_moments(&frame, points, w)?;
        Ok(Self {
            point,
            frame,
            direction: HermMatrix::new(dir)?,
            objective: scale * scale * sq,
        })
    }

    fn grad_norm(&self, scale: f64) -> f64 {
        scale * self.direction.frobenius_norm()
    }

    fn step(&self, t: f64) -> Result<UnitDetPoint<S>> {
        let eig = herm_eigen(&self.direction.scaled(t))?;
        let det = crate::math::exp(eig.eigenvalues.iter().sum());
        Ok(UnitDetPoint::rescaled(self.frame.unwhiten(&eig.apply(SpectralFn::Exp)?), det))
    }
}

/// Karcher mean, started from the projected Euclidean average.
///
/// Non-convergence is reported through `converged = false`, never as a
/// silent answer.
pub fn karcher_mean<S: Scalar>(
    points: &[UnitDetPoint<S>],
    weights: Option<&[f64]>,
    cfg: &MeanConfig,
) -> Result<MeanResult<S>> {
    cfg.validate()?;
    let w = checked_weights(points, weights)?;
    let d = points[0].dim();

    let mut avg = Mat::<S>::zeros(d);
    for (p, &wi) in points.iter().zip(&w) {
        avg.add_scaled(wi, p.mat().mat());
    }
    let start = project(&SpdPoint::new(HermMatrix::new(avg)?)?);

    let mut cur = Iterate::at(start, points, &w, cfg.scale)?;
    let mut history = alloc::vec![cur.objective];
    let mut iterations = 0;
    let converged = loop {
        if cur.grad_norm(cfg.scale) <= cfg.grad_tol {
            break true;
        }
        if iterations == cfg.max_iters {
            break false;
        }
        let mut t = cfg.step;
        let mut next = None;
        for _ in 0..=MAX_HALVINGS {
            let cand = Iterate::at(cur.step(t)?, points, &w, cfg.scale)?;
            if cand.objective <= cur.objective + DESCENT_SLACK {
                next = Some(cand);
                break;
            }
            t *= 0.5;
        }
        match next {
            Some(n) => cur = n,
            None => break false,
        }
        iterations += 1;
        history.push(cur.objective);
    };

    Ok(MeanResult {
        final_grad_norm: cur.grad_norm(cfg.scale),
        mean: cur.point,
        iterations,
        converged,
        objective_history: history,
    })
}

fn require_converged<S>(r: MeanResult<S>) -> Result<MeanResult<S>> {
    if r.converged {
        Ok(r)
    } else {
        Err(Error::NotConverged {
            iterations: r.iterations,
            grad_norm: r.final_grad_norm,
        })
    }
}

/// `d(G · mean(points), mean(G · points))`.
pub fn equivariance_check<S: Scalar>(
    points: &[UnitDetPoint<S>],
    weights: Option<&[f64]>,
    g: &GroupElement<S>,
    cfg: &MeanConfig,
) -> Result<f64> {
    let m = require_converged(karcher_mean(points, weights, cfg)?)?;
    let moved: Vec<UnitDetPoint<S>> = points.iter().map(|p| g.act(p)).collect::<Result<_>>()?;
    let gm = require_converged(karcher_mean(&moved, weights, cfg)?)?;
    distance(&g.act(&m.mean)?, &gm.mean, cfg.scale)
}
