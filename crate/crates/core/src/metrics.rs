//! Prediction-quality metrics over matched prediction/label pairs:
//! displacement error for centroids and angle error for headings.

use crate::error::{Error, Result};
use crate::traj::{PoseProvider, WaypointTrack};

/// Evaluation protocol: where to measure and which actors to keep.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalSpec {
    /// Strictly increasing evaluation times within the label horizon.
    pub eval_times: Vec<f64>,
    /// Actors slower than this (label speed at the eval time) are skipped;
    /// 0 disables the filter.
    pub min_speed_filter: f64,
    /// Emit one row per evaluation time (the report always carries them;
    /// consumers may aggregate when this is off).
    pub per_time: bool,
}

impl EvalSpec {
    pub fn new(eval_times: Vec<f64>, min_speed_filter: f64) -> Result<Self> {
        if eval_times.is_empty() {
            return Err(Error::InvalidTimes("empty evaluation times"));
        }
        if eval_times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidTimes("evaluation times must be strictly increasing"));
        }
        if !(min_speed_filter >= 0.0) {
            return Err(Error::InvalidConfig("min_speed_filter must be non-negative".into()));
        }
        Ok(Self { eval_times, min_speed_filter, per_time: true })
    }
}

/// Aggregated metrics at one evaluation time.
///
/// Means are `None` when no actor survived the speed filter at that time
/// (reported, not fatal).
#[derive(Debug, Clone, PartialEq)]
pub struct TimeMetrics {
    pub t: f64,
    pub mean_de: Option<f64>,
    pub de_count: usize,
    pub mean_dtheta: Option<f64>,
    pub dtheta_count: usize,
}

/// Per-time metric means for one representation.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub representation: String,
    pub rows: Vec<TimeMetrics>,
}

/// L2 distance between the predicted and labeled centroid at `t`.
pub fn displacement_error<P: PoseProvider + ?Sized>(
    pred: &P,
    label: &WaypointTrack,
    t: f64,
) -> Result<f64> {
    let label_pose = label.pose_at_time(t).ok_or(Error::OutOfDomain {
        t,
        lo: label.start_time(),
        hi: label.end_time(),
    })?;
    let pred_pose = pred.pose_at(t)?;
    Ok(pred_pose.distance(label_pose))
}

/// Absolute heading difference in degrees, in `[0, 180]` (shortest arc).
pub fn heading_error<P: PoseProvider + ?Sized>(
    pred: &P,
    label: &WaypointTrack,
    t: f64,
) -> Result<f64> {
    if !label.has_heading() || !pred.has_heading() {
        return Err(Error::HeadingUnavailable);
    }
    let label_pose = label.pose_at_time(t).ok_or(Error::OutOfDomain {
        t,
        lo: label.start_time(),
        hi: label.end_time(),
    })?;
    let pred_pose = pred.pose_at(t)?;
    // Relative rotation pred ∘ label⁻¹ via angle-difference identities.
    let s_rel = pred_pose.s * label_pose.c - pred_pose.c * label_pose.s;
    let c_rel = pred_pose.c * label_pose.c + pred_pose.s * label_pose.s;
    Ok(s_rel.atan2(c_rel).abs().to_degrees())
}

/// Label speed at `t` by central finite difference on the label track
/// (one-sided at the track ends, segment slope between waypoints).
pub fn label_speed(label: &WaypointTrack, t: f64) -> Result<f64> {
    let times = label.times();
    let poses = label.poses();
    let n = label.len();
    if t < label.start_time() - 1e-9 || t > label.end_time() + 1e-9 {
        return Err(Error::OutOfDomain { t, lo: label.start_time(), hi: label.end_time() });
    }
    if n == 1 {
        return Ok(0.0);
    }
    let chord = |i: usize, j: usize| -> f64 {
        let dt = times[j] - times[i];
        (poses[j].x - poses[i].x).hypot(poses[j].y - poses[i].y) / dt
    };
    if let Some(i) = label.index_at(t, 1e-9) {
        return Ok(if i == 0 {
            chord(0, 1)
        } else if i == n - 1 {
            chord(n - 2, n - 1)
        } else {
            chord(i - 1, i + 1)
        });
    }
    // Between waypoints: slope of the bracketing segment.
    let i = times.partition_point(|&x| x < t);
    Ok(chord(i - 1, i))
}

/// Evaluate matched prediction/label pairs at the spec's times.
///
/// Means are over actors whose label speed at the time passes the filter;
/// heading errors additionally require heading on both sides.
pub fn evaluate_batch<P: PoseProvider>(
    representation: &str,
    preds: &[P],
    labels: &[WaypointTrack],
    spec: &EvalSpec,
) -> Result<MetricReport> {
    if preds.is_empty() {
        return Err(Error::EmptyInput);
    }
    if preds.len() != labels.len() {
        return Err(Error::InvalidConfig("preds and labels differ in length".into()));
    }
    let mut rows = Vec::with_capacity(spec.eval_times.len());
    for &t in &spec.eval_times {
        let mut de_sum = 0.0;
        let mut de_count = 0usize;
        let mut dtheta_sum = 0.0;
        let mut dtheta_count = 0usize;
        for (pred, label) in preds.iter().zip(labels) {
            if spec.min_speed_filter > 0.0 && label_speed(label, t)? < spec.min_speed_filter {
                continue;
            }
            de_sum += displacement_error(pred, label, t)?;
            de_count += 1;
            if label.has_heading() && pred.has_heading() {
                dtheta_sum += heading_error(pred, label, t)?;
                dtheta_count += 1;
            }
        }
        rows.push(TimeMetrics {
            t,
            mean_de: (de_count > 0).then(|| de_sum / de_count as f64),
            de_count,
            mean_dtheta: (dtheta_count > 0).then(|| dtheta_sum / dtheta_count as f64),
            dtheta_count,
        });
    }
    Ok(MetricReport { representation: representation.to_string(), rows })
}
