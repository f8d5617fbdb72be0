//! Trajectory representations: timestamped waypoint tracks and per-channel
//! polynomial trajectories in normalized time.

use crate::error::{Error, Result};
use crate::se2::{normalize_heading, SE2Pose};

/// Identifies one of the four SE2 channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajChannel {
    X,
    Y,
    Sin,
    Cos,
}

/// Anything that can answer "where is the actor at time `t`".
///
/// Implemented by [`PolyTraj`] (polynomial evaluation), [`WaypointTrack`]
/// (linear interpolation), probabilistic trajectories (mean evaluation), and
/// [`ModeSet`] (delegates to its highest-weight mode).
pub trait PoseProvider {
    fn pose_at(&self, t: f64) -> Result<SE2Pose>;

    /// Whether the heading channels of this provider are meaningful.
    fn has_heading(&self) -> bool {
        true
    }
}

impl<T: PoseProvider + ?Sized> PoseProvider for &T {
    fn pose_at(&self, t: f64) -> Result<SE2Pose> {
        (**self).pose_at(t)
    }

    fn has_heading(&self) -> bool {
        (**self).has_heading()
    }
}

/// Evaluate the polynomial with the given coefficients at `u` (Horner).
///
/// `coeffs[n]` multiplies `uⁿ`; an empty slice is the zero polynomial.
pub fn poly_eval(coeffs: &[f64], u: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &a| acc * u + a)
}

/// Coefficients of the derivative polynomial `dP/du`.
pub fn poly_derive(coeffs: &[f64]) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(n, &a)| n as f64 * a)
        .collect()
}

fn domain_eps(hi: f64) -> f64 {
    1e-9 * hi.abs().max(1.0)
}

/// Time-stamped pose sequence: both the label format and the waypoint
/// (linear-spline) trajectory representation.
#[derive(Debug, Clone, PartialEq)]
pub struct WaypointTrack {
    times: Vec<f64>,
    poses: Vec<SE2Pose>,
    has_heading: bool,
}

impl WaypointTrack {
    /// Build a track from matched times and poses.
    ///
    /// Times must be finite, strictly increasing and of the same nonzero
    /// length as `poses`. `has_heading = false` marks labels (pedestrians)
    /// whose heading channels are placeholders.
    pub fn new(times: Vec<f64>, poses: Vec<SE2Pose>, has_heading: bool) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::InvalidTimes("empty time sequence"));
        }
        if times.len() != poses.len() {
            return Err(Error::InvalidTimes("times and poses differ in length"));
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidTimes("non-finite timestamp"));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidTimes("times must be strictly increasing"));
        }
        Ok(Self { times, poses, has_heading })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn poses(&self) -> &[SE2Pose] {
        &self.poses
    }

    pub fn has_heading(&self) -> bool {
        self.has_heading
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees at least one waypoint
    }

    pub fn start_time(&self) -> f64 {
        self.times[0]
    }

    pub fn end_time(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Index of the waypoint whose timestamp matches `t` within `tol`.
    pub fn index_at(&self, t: f64, tol: f64) -> Option<usize> {
        let i = self.times.partition_point(|&x| x < t);
        for j in [i.wrapping_sub(1), i] {
            if let Some(&tj) = self.times.get(j) {
                if (tj - t).abs() <= tol {
                    return Some(j);
                }
            }
        }
        None
    }

    /// Stored pose at exactly timestamp `t` (within 1e-9 s), if any.
    pub fn pose_at_time(&self, t: f64) -> Option<&SE2Pose> {
        self.index_at(t, 1e-9).map(|i| &self.poses[i])
    }

    /// Pose at `t` by linear interpolation between bracketing waypoints.
    ///
    /// Positions interpolate linearly; the heading interpolates by lerping
    /// the `(sin, cos)` channels and renormalizing, which matches how the
    /// polynomial representation treats heading and avoids angle wrap-around
    /// branches. Exactly opposite bracketing headings make the interpolated
    /// channel pair vanish and yield [`Error::DegenerateHeading`].
    pub fn interp_pose(&self, t: f64) -> Result<SE2Pose> {
        if let Some(i) = self.index_at(t, 1e-9) {
            return Ok(self.poses[i]);
        }
        let (lo, hi) = (self.start_time(), self.end_time());
        if self.len() < 2 || t < lo || t > hi {
            return Err(Error::OutOfDomain { t, lo, hi });
        }
        // partition_point > 0 here: t > lo + 1e-9 was not matched above.
        let i = self.times.partition_point(|&x| x < t);
        let (i0, i1) = (i - 1, i);
        let (t0, t1) = (self.times[i0], self.times[i1]);
        let alpha = (t - t0) / (t1 - t0);
        let (p0, p1) = (&self.poses[i0], &self.poses[i1]);
        let lerp = |a: f64, b: f64| a + alpha * (b - a);
        let (s, c) = normalize_heading(lerp(p0.s, p1.s), lerp(p0.c, p1.c))?;
        Ok(SE2Pose { x: lerp(p0.x, p1.x), y: lerp(p0.y, p1.y), s, c })
    }
}

impl PoseProvider for WaypointTrack {
    fn pose_at(&self, t: f64) -> Result<SE2Pose> {
        self.interp_pose(t)
    }

    fn has_heading(&self) -> bool {
        self.has_heading
    }
}

/// Polynomial trajectory over a finite horizon.
///
/// Each channel of the SE2 transform is a polynomial in normalized time
/// `u = t / horizon`. Translation channels are read off directly; the raw
/// sine/cosine channels are normalized at evaluation so every returned pose
/// carries a valid rotation.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyTraj {
    horizon: f64,
    cx: Vec<f64>,
    cy: Vec<f64>,
    s: Vec<f64>,
    c: Vec<f64>,
}

impl PolyTraj {
    pub fn new(horizon: f64, cx: Vec<f64>, cy: Vec<f64>, s: Vec<f64>, c: Vec<f64>) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "horizon must be positive and finite, got {horizon}"
            )));
        }
        for (name, ch) in [("cx", &cx), ("cy", &cy), ("s", &s), ("c", &c)] {
            if ch.is_empty() {
                return Err(Error::InvalidConfig(format!("channel {name} has no coefficients")));
            }
            if ch.iter().any(|a| !a.is_finite()) {
                return Err(Error::NonFinite("polynomial coefficient"));
            }
        }
        Ok(Self { horizon, cx, cy, s, c })
    }

    /// Stationary trajectory holding `pose` over `horizon`.
    pub fn constant(horizon: f64, pose: &SE2Pose) -> Result<Self> {
        Self::new(horizon, vec![pose.x], vec![pose.y], vec![pose.s], vec![pose.c])
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn channel(&self, ch: TrajChannel) -> &[f64] {
        match ch {
            TrajChannel::X => &self.cx,
            TrajChannel::Y => &self.cy,
            TrajChannel::Sin => &self.s,
            TrajChannel::Cos => &self.c,
        }
    }

    pub fn degree(&self, ch: TrajChannel) -> usize {
        self.channel(ch).len() - 1
    }

    fn check_domain(&self, t: f64) -> Result<()> {
        let eps = domain_eps(self.horizon);
        if t < -eps || t > self.horizon + eps {
            return Err(Error::OutOfDomain { t, lo: 0.0, hi: self.horizon });
        }
        Ok(())
    }

    /// Raw channel values `(x, y, s_raw, c_raw)` at `t`, without the domain
    /// check or heading normalization.
    pub fn raw_channels(&self, t: f64) -> [f64; 4] {
        let u = t / self.horizon;
        [
            poly_eval(&self.cx, u),
            poly_eval(&self.cy, u),
            poly_eval(&self.s, u),
            poly_eval(&self.c, u),
        ]
    }

    /// Pose at `t ∈ [0, horizon]` with normalized heading.
    pub fn eval_pose(&self, t: f64) -> Result<SE2Pose> {
        self.check_domain(t)?;
        self.eval_pose_extrapolated(t)
    }

    /// Pose at any `t`, explicitly opting in to extrapolation beyond the
    /// fitted horizon. Callers that extrapolate should flag it downstream.
    pub fn eval_pose_extrapolated(&self, t: f64) -> Result<SE2Pose> {
        let [x, y, s_raw, c_raw] = self.raw_channels(t);
        let (s, c) = normalize_heading(s_raw, c_raw)?;
        Ok(SE2Pose { x, y, s, c })
    }

    /// Sample the trajectory at the given strictly increasing in-domain times.
    pub fn sample_waypoints(&self, times: &[f64]) -> Result<WaypointTrack> {
        if times.is_empty() {
            return Err(Error::InvalidTimes("empty time sequence"));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidTimes("times must be strictly increasing"));
        }
        let poses = times.iter().map(|&t| self.eval_pose(t)).collect::<Result<Vec<_>>>()?;
        WaypointTrack::new(times.to_vec(), poses, true)
    }
}

impl PoseProvider for PolyTraj {
    fn pose_at(&self, t: f64) -> Result<SE2Pose> {
        self.eval_pose(t)
    }
}

/// A weighted set of trajectory modes.
///
/// Container only: mode weights are inputs, not learned here. Metric
/// evaluation uses the highest-weight mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSet<T> {
    modes: Vec<T>,
    weights: Vec<f64>,
}

impl<T> ModeSet<T> {
    pub fn new(modes: Vec<T>, weights: Vec<f64>) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::InvalidConfig("mode set needs at least one mode".into()));
        }
        if modes.len() != weights.len() {
            return Err(Error::InvalidConfig("modes and weights differ in length".into()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidConfig("weights must be finite and non-negative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!("weights sum to {total}, expected 1")));
        }
        Ok(Self { modes, weights })
    }

    /// Single-mode set with weight 1.
    pub fn single(mode: T) -> Self {
        Self { modes: vec![mode], weights: vec![1.0] }
    }

    pub fn modes(&self) -> &[T] {
        &self.modes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// The highest-weight mode (lowest index on ties).
    pub fn primary(&self) -> &T {
        let mut best = 0;
        for (i, &w) in self.weights.iter().enumerate().skip(1) {
            if w > self.weights[best] {
                best = i;
            }
        }
        &self.modes[best]
    }
}

impl<T: PoseProvider> PoseProvider for ModeSet<T> {
    fn pose_at(&self, t: f64) -> Result<SE2Pose> {
        self.primary().pose_at(t)
    }

    fn has_heading(&self) -> bool {
        self.primary().has_heading()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn quadratic_x() -> PolyTraj {
        // x(t) = 16 u² with T = 4, i.e. x(t) = t².
        PolyTraj::new(4.0, vec![0.0, 0.0, 16.0], vec![0.0], vec![0.0], vec![1.0]).unwrap()
    }

    #[test]
    fn eval_identity_pose() {
        let traj = PolyTraj::new(4.0, vec![0.0], vec![0.0], vec![0.0], vec![1.0]).unwrap();
        for t in [0.0, 1.7, 4.0] {
            let p = traj.eval_pose(t).unwrap();
            assert_eq!((p.x, p.y, p.s, p.c), (0.0, 0.0, 0.0, 1.0));
        }
    }

    #[test]
    fn eval_quadratic_midpoint() {
        let p = quadratic_x().eval_pose(2.0).unwrap();
        assert_eq!(p.x, 4.0); // 16 · 0.5² exactly
    }

    #[test]
    fn eval_at_zero_returns_constant_coefficients_exactly() {
        let traj =
            PolyTraj::new(4.0, vec![3.25, 1.0, -2.0], vec![-7.5, 4.0], vec![0.6], vec![0.8])
                .unwrap();
        let p = traj.eval_pose(0.0).unwrap();
        assert_eq!(p.x, 3.25);
        assert_eq!(p.y, -7.5);
    }

    #[test]
    fn eval_normalizes_heading_scale_invariantly() {
        for k in [0.2, 1.0, 55.0] {
            let traj =
                PolyTraj::new(4.0, vec![0.0], vec![0.0], vec![0.6 * k], vec![0.8 * k]).unwrap();
            let p = traj.eval_pose(1.0).unwrap();
            assert_relative_eq!(p.s, 0.6, epsilon = 1e-12);
            assert_relative_eq!(p.c, 0.8, epsilon = 1e-12);
        }
    }

    #[test]
    fn eval_rejects_out_of_domain_but_extrapolates_on_request() {
        let traj = quadratic_x();
        assert!(matches!(traj.eval_pose(4.5), Err(Error::OutOfDomain { .. })));
        assert!(matches!(traj.eval_pose(-0.1), Err(Error::OutOfDomain { .. })));
        let p = traj.eval_pose_extrapolated(8.0).unwrap();
        assert_eq!(p.x, 64.0);
    }

    #[test]
    fn eval_degenerate_heading() {
        let traj = PolyTraj::new(1.0, vec![0.0], vec![0.0], vec![0.0, 1.0], vec![0.0]).unwrap();
        assert!(matches!(traj.eval_pose(0.0), Err(Error::DegenerateHeading { .. })));
    }

    #[test]
    fn sample_waypoints_matches_pointwise_eval() {
        let traj = quadratic_x();
        let times: Vec<f64> = (0..=40).map(|i| i as f64 * 0.1).collect();
        let track = traj.sample_waypoints(&times).unwrap();
        assert_eq!(track.len(), 41);
        assert!(track.has_heading());
        for (&t, p) in track.times().iter().zip(track.poses()) {
            let q = traj.eval_pose(t).unwrap();
            assert_eq!((p.x, p.y, p.s, p.c), (q.x, q.y, q.s, q.c));
        }
    }

    #[test]
    fn sample_waypoints_constant() {
        let traj = PolyTraj::constant(4.0, &SE2Pose::new(1.0, 2.0, 0.3)).unwrap();
        let track = traj.sample_waypoints(&[0.0, 1.0, 2.0]).unwrap();
        assert_eq!(track.len(), 3);
        assert!(track.poses().windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn sample_waypoints_rejects_bad_times() {
        let traj = quadratic_x();
        assert!(matches!(traj.sample_waypoints(&[]), Err(Error::InvalidTimes(_))));
        assert!(matches!(traj.sample_waypoints(&[0.0, 0.0]), Err(Error::InvalidTimes(_))));
        assert!(matches!(traj.sample_waypoints(&[1.0, 0.5]), Err(Error::InvalidTimes(_))));
    }

    fn track(points: &[(f64, f64, f64, f64)]) -> WaypointTrack {
        let times = points.iter().map(|p| p.0).collect();
        let poses = points.iter().map(|p| SE2Pose::new(p.1, p.2, p.3)).collect();
        WaypointTrack::new(times, poses, true).unwrap()
    }

    #[test]
    fn interp_linear_midpoint() {
        let tr = track(&[(0.0, 0.0, 0.0, 0.0), (2.0, 4.0, 0.0, 0.0)]);
        let p = tr.interp_pose(1.0).unwrap();
        assert_eq!((p.x, p.y), (2.0, 0.0));
    }

    #[test]
    fn interp_error_on_accelerating_truth() {
        // Truth x(t) = t²; waypoints at t ∈ {0, 2}; the linear spline at t = 1
        // reads 2 while the truth is 1: error a·Δt²/8 = 1 for a = 2, Δt = 2.
        let tr = track(&[(0.0, 0.0, 0.0, 0.0), (2.0, 4.0, 0.0, 0.0)]);
        let interp = tr.interp_pose(1.0).unwrap().x;
        let truth = 1.0;
        assert_relative_eq!(interp - truth, 2.0 * 2.0 * 2.0 / 8.0, epsilon = 1e-12);
    }

    #[test]
    fn interp_heading_bisects_right_angle() {
        let tr = track(&[(0.0, 0.0, 0.0, 0.0), (2.0, 0.0, 0.0, std::f64::consts::FRAC_PI_2)]);
        let p = tr.interp_pose(1.0).unwrap();
        // lerp of (0,1) and (1,0) is (0.5, 0.5); normalized → (√2/2, √2/2) = 45°.
        assert_relative_eq!(p.s, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-12);
        assert_relative_eq!(p.c, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-12);
        assert_relative_eq!(p.theta(), std::f64::consts::FRAC_PI_4, epsilon = 1e-12);
    }

    #[test]
    fn interp_exact_at_waypoints() {
        let tr = track(&[(0.0, 1.0, -1.0, 0.2), (0.5, 2.0, 3.0, 0.4), (1.5, -1.0, 0.0, 0.9)]);
        for (i, &t) in tr.times().iter().enumerate() {
            assert_eq!(tr.interp_pose(t).unwrap(), tr.poses()[i]);
        }
    }

    #[test]
    fn interp_domain_and_degenerate_cases() {
        let tr = track(&[(0.0, 0.0, 0.0, 0.0), (1.0, 1.0, 0.0, std::f64::consts::PI)]);
        assert!(matches!(tr.interp_pose(-0.5), Err(Error::OutOfDomain { .. })));
        assert!(matches!(tr.interp_pose(1.5), Err(Error::OutOfDomain { .. })));
        // Opposite headings cancel at the midpoint.
        assert!(matches!(tr.interp_pose(0.5), Err(Error::DegenerateHeading { .. })));

        let single = track(&[(1.0, 5.0, 5.0, 0.0)]);
        assert_eq!(single.interp_pose(1.0).unwrap().x, 5.0);
        assert!(matches!(single.interp_pose(1.2), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn track_validation() {
        let p = SE2Pose::identity();
        assert!(matches!(
            WaypointTrack::new(vec![], vec![], true),
            Err(Error::InvalidTimes(_))
        ));
        assert!(WaypointTrack::new(vec![0.0, 0.0], vec![p, p], true).is_err());
        assert!(WaypointTrack::new(vec![0.0, 1.0], vec![p], true).is_err());
    }

    #[test]
    fn mode_set_picks_highest_weight() {
        let a = PolyTraj::constant(1.0, &SE2Pose::new(1.0, 0.0, 0.0)).unwrap();
        let b = PolyTraj::constant(1.0, &SE2Pose::new(2.0, 0.0, 0.0)).unwrap();
        let set = ModeSet::new(vec![a, b], vec![0.3, 0.7]).unwrap();
        assert_eq!(set.pose_at(0.5).unwrap().x, 2.0);
        assert!(ModeSet::<PolyTraj>::new(vec![], vec![]).is_err());
        let c = PolyTraj::constant(1.0, &SE2Pose::identity()).unwrap();
        assert!(ModeSet::new(vec![c], vec![0.5]).is_err());
    }
}
