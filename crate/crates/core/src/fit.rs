//! Closed-form least-squares fitting of polynomial trajectories to labeled
//! bounding-box tracks, plus the corner-error metrics used to judge fits.
//!
//! The objective is the total squared L2 error between labeled and fitted box
//! corners over all corners and label time-points. Corners are linear in the
//! raw `(cx, cy, sin, cos)` channel values, so the fit is one exact linear
//! least-squares problem over all channel coefficients jointly. Because the
//! four corner offsets are symmetric about the centroid, that joint problem
//! decomposes algebraically into independent per-channel Vandermonde solves:
//!
//! `Σ_corners |Δcentroid + ΔR·o_i|² = 4·|Δcentroid|² + (L² + W²)·(Δs² + Δc²)`
//!
//! The solver works on the decomposed blocks; the contract (optimum, objective
//! value, ridge semantics, rank behavior) is that of the joint system.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::se2::OrientedBox;
use crate::traj::{PolyTraj, PoseProvider, WaypointTrack};

/// Degrees above this are refused: they are numerically meaningless here.
pub const MAX_DEGREE: usize = 12;

/// Estimated normal-system condition number above which fits are flagged.
pub const CONDITION_WARN: f64 = 1e10;

/// Configuration for [`fit_label`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    degree_xy: usize,
    degree_heading: usize,
    horizon: f64,
    ridge_lambda: f64,
}

impl FitConfig {
    /// Polynomial degrees for the translation and heading channels, and the
    /// fit horizon `T` that normalizes time (`u = t/T`). `T` is the prediction
    /// horizon, not necessarily the label's last timestamp; it must cover the
    /// label interval.
    pub fn new(degree_xy: usize, degree_heading: usize, horizon: f64) -> Result<Self> {
        if degree_xy > MAX_DEGREE || degree_heading > MAX_DEGREE {
            return Err(Error::InvalidConfig(format!(
                "degrees ({degree_xy}, {degree_heading}) exceed the maximum of {MAX_DEGREE}"
            )));
        }
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::InvalidConfig(format!("horizon must be positive, got {horizon}")));
        }
        Ok(Self { degree_xy, degree_heading, horizon, ridge_lambda: 0.0 })
    }

    /// Add a ridge term `ridge_lambda · I` to the joint normal equations.
    pub fn with_ridge(mut self, ridge_lambda: f64) -> Result<Self> {
        if !(ridge_lambda >= 0.0) || !ridge_lambda.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "ridge_lambda must be non-negative, got {ridge_lambda}"
            )));
        }
        self.ridge_lambda = ridge_lambda;
        Ok(self)
    }

    pub fn degree_xy(&self) -> usize {
        self.degree_xy
    }

    pub fn degree_heading(&self) -> usize {
        self.degree_heading
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn ridge_lambda(&self) -> f64 {
        self.ridge_lambda
    }
}

/// Outcome of [`fit_label`].
#[derive(Debug, Clone)]
pub struct FitResult {
    /// Fitted trajectory. The stored sine/cosine channels are the raw
    /// least-squares fits; evaluation normalizes them.
    pub traj: PolyTraj,
    /// Fit objective at the optimum: total squared corner error over all
    /// label time-points, using raw (unnormalized) heading channels.
    pub total_sq_corner_error: f64,
    /// Maximum corner error of the fitted trajectory over the label
    /// time-points, evaluated with normalized heading.
    pub max_corner_error: f64,
    /// Set when the estimated normal-system condition number exceeds
    /// [`CONDITION_WARN`].
    pub condition_warning: bool,
}

/// Result of a single-channel polynomial least-squares solve.
pub(crate) struct ChannelFit {
    pub coeffs: Vec<f64>,
    /// Largest/smallest singular values of the (ridge-augmented) design
    /// matrix; `sv²` are the eigenvalues of the channel's normal block.
    pub sv_max: f64,
    pub sv_min: f64,
}

/// Least squares of `ys` on the Vandermonde basis `1, u, …, u^degree`,
/// optionally ridge-regularized: `min Σ(P(u_i) − y_i)² + ridge·‖a‖²`.
pub(crate) fn polyfit_channel(
    us: &[f64],
    ys: &[f64],
    degree: usize,
    ridge: f64,
) -> Result<ChannelFit> {
    debug_assert_eq!(us.len(), ys.len());
    let cols = degree + 1;
    let base_rows = us.len();
    let rows = base_rows + if ridge > 0.0 { cols } else { 0 };
    let mut a = DMatrix::<f64>::zeros(rows, cols);
    for (i, &u) in us.iter().enumerate() {
        let mut p = 1.0;
        for j in 0..cols {
            a[(i, j)] = p;
            p *= u;
        }
    }
    if ridge > 0.0 {
        let sq = ridge.sqrt();
        for j in 0..cols {
            a[(base_rows + j, j)] = sq;
        }
    }
    let mut b = DVector::<f64>::zeros(rows);
    for (i, &y) in ys.iter().enumerate() {
        b[i] = y;
    }

    let svd = a.svd(true, true);
    let sv_max = svd.singular_values.max();
    let sv_min = svd.singular_values.min();
    if ridge <= 0.0 && (base_rows < cols || sv_min <= sv_max * 1e-12) {
        let cond = if sv_min > 0.0 { (sv_max / sv_min).powi(2) } else { f64::INFINITY };
        return Err(Error::SingularSystem { cond });
    }
    let sol = svd.solve(&b, 0.0).map_err(|_| Error::NonFinite("least-squares solve"))?;
    let coeffs: Vec<f64> = sol.iter().copied().collect();
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFinite("least-squares solution"));
    }
    Ok(ChannelFit { coeffs, sv_max, sv_min })
}

/// Fit a polynomial trajectory to a labeled track by minimizing the total
/// squared corner error.
///
/// Labels without heading (pedestrians) are fitted on the centroid-only
/// objective; their heading channels are fixed to the identity `(0, 1)`.
pub fn fit_label(label: &WaypointTrack, bbox: &OrientedBox, cfg: &FitConfig) -> Result<FitResult> {
    let n = label.len();
    let max_degree = cfg.degree_xy.max(cfg.degree_heading);
    if n < max_degree + 1 {
        return Err(Error::InsufficientData { needed: max_degree + 1, got: n });
    }
    let t_eps = 1e-9 * cfg.horizon.max(1.0);
    if label.start_time() < -t_eps || label.end_time() > cfg.horizon + t_eps {
        return Err(Error::InvalidConfig(format!(
            "fit horizon {} does not cover label interval [{}, {}]",
            cfg.horizon,
            label.start_time(),
            label.end_time()
        )));
    }

    let us: Vec<f64> = label.times().iter().map(|&t| t / cfg.horizon).collect();
    let xs: Vec<f64> = label.poses().iter().map(|p| p.x).collect();
    let ys: Vec<f64> = label.poses().iter().map(|p| p.y).collect();

    // Block weights of the decomposed corner objective: each time-point
    // contributes the centroid displacement once per corner (weight 4) and
    // the heading mismatch scaled by Σ|o_i|² = L² + W².
    let (w_xy, w_h) = if label.has_heading() {
        (4.0, bbox.length().powi(2) + bbox.width().powi(2))
    } else {
        (1.0, 0.0)
    };

    let mut block_eigs: Vec<(f64, f64)> = Vec::with_capacity(4);
    let mut solve = |values: &[f64], degree: usize, weight: f64| -> Result<Vec<f64>> {
        let fit = polyfit_channel(&us, values, degree, cfg.ridge_lambda / weight)?;
        block_eigs.push((weight * fit.sv_max * fit.sv_max, weight * fit.sv_min * fit.sv_min));
        Ok(fit.coeffs)
    };

    let cx = solve(&xs, cfg.degree_xy, w_xy)?;
    let cy = solve(&ys, cfg.degree_xy, w_xy)?;
    let (s, c) = if label.has_heading() {
        let ss: Vec<f64> = label.poses().iter().map(|p| p.s).collect();
        let cs: Vec<f64> = label.poses().iter().map(|p| p.c).collect();
        (solve(&ss, cfg.degree_heading, w_h)?, solve(&cs, cfg.degree_heading, w_h)?)
    } else {
        (vec![0.0], vec![1.0])
    };

    let eig_max = block_eigs.iter().map(|e| e.0).fold(0.0f64, f64::max);
    let eig_min = block_eigs.iter().map(|e| e.1).fold(f64::INFINITY, f64::min);
    let cond = if eig_min > 0.0 { eig_max / eig_min } else { f64::INFINITY };

    let traj = PolyTraj::new(cfg.horizon, cx, cy, s, c)?;
    let total_sq_corner_error = raw_corner_sq_error(&traj, label, bbox);
    let max_corner_error = max_corner_error(&traj, label, bbox, label.times())?;
    Ok(FitResult { traj, total_sq_corner_error, max_corner_error, condition_warning: cond > CONDITION_WARN })
}

/// The fit objective: total squared corner error of `traj` against `label`,
/// with corners computed from the raw (unnormalized) heading channels exactly
/// as [`fit_label`] minimizes it. Labels without heading use the centroid
/// displacement instead of corners.
pub fn raw_corner_sq_error(traj: &PolyTraj, label: &WaypointTrack, bbox: &OrientedBox) -> f64 {
    let offsets = bbox.corner_offsets();
    let mut total = 0.0;
    for (&t, pose) in label.times().iter().zip(label.poses()) {
        let [x, y, s_raw, c_raw] = traj.raw_channels(t);
        if !label.has_heading() {
            total += (x - pose.x).powi(2) + (y - pose.y).powi(2);
            continue;
        }
        for [ox, oy] in offsets {
            let px = x + c_raw * ox - s_raw * oy;
            let py = y + s_raw * ox + c_raw * oy;
            let lx = pose.x + pose.c * ox - pose.s * oy;
            let ly = pose.y + pose.s * ox + pose.c * oy;
            total += (px - lx).powi(2) + (py - ly).powi(2);
        }
    }
    total
}

/// Maximum L2 distance over all four box corners and all `times` between the
/// predicted and labeled corner positions.
///
/// Each time must match a label timestamp (within 1e-9 s); the prediction may
/// be any [`PoseProvider`].
pub fn max_corner_error<P: PoseProvider + ?Sized>(
    pred: &P,
    label: &WaypointTrack,
    bbox: &OrientedBox,
    times: &[f64],
) -> Result<f64> {
    if times.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut max_err = 0.0f64;
    for &t in times {
        let label_pose = label.pose_at_time(t).ok_or(Error::OutOfDomain {
            t,
            lo: label.start_time(),
            hi: label.end_time(),
        })?;
        let pred_pose = pred.pose_at(t)?;
        let pc = bbox.corners_at(&pred_pose);
        let lc = bbox.corners_at(label_pose);
        for (p, l) in pc.iter().zip(lc.iter()) {
            max_err = max_err.max((p[0] - l[0]).hypot(p[1] - l[1]));
        }
    }
    Ok(max_err)
}

/// Fraction of `errors` at or below each threshold.
///
/// Thresholds must be non-decreasing; the output is then non-decreasing and
/// in `[0, 1]`.
pub fn cumulative_error_curve(errors: &[f64], thresholds: &[f64]) -> Result<Vec<f64>> {
    if errors.is_empty() || thresholds.is_empty() {
        return Err(Error::EmptyInput);
    }
    if thresholds.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidConfig("thresholds must be non-decreasing".into()));
    }
    let mut sorted = errors.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("non-finite error value"));
    let n = sorted.len() as f64;
    Ok(thresholds
        .iter()
        .map(|&thr| sorted.partition_point(|&e| e <= thr) as f64 / n)
        .collect())
}
