//! Analytic derivatives of polynomial trajectories, finite-difference
//! derivatives of waypoint tracks, and physical-feasibility statistics.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::se2::normalize_heading;
use crate::traj::{poly_derive, poly_eval, PolyTraj, WaypointTrack};

/// Default speed below which a time-point is treated as static.
pub const STATIC_SPEED_THRESHOLD: f64 = 0.2;

/// 2D cross product `x₁y₂ − x₂y₁`.
pub fn cross2(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn dot2(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Centroid kinematics at one time-point.
///
/// `h = (cos θ, sin θ)` is the unit heading. Acceleration is `None` where the
/// producing scheme cannot supply it (finite-difference track endpoints).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KinematicSample {
    pub t: f64,
    /// Centroid velocity (m/s).
    pub v: [f64; 2],
    /// Centroid acceleration (m/s²), absent at finite-difference endpoints.
    pub a: Option<[f64; 2]>,
    /// Unit heading vector (cos θ, sin θ).
    pub h: [f64; 2],
    /// `|v|`.
    pub speed: f64,
}

impl KinematicSample {
    /// Signed curvature `(v × a)/|v|³`, when both are available and the
    /// speed is meaningfully nonzero.
    pub fn curvature(&self) -> Option<f64> {
        let a = self.a?;
        if self.speed < 1e-9 {
            return None;
        }
        Some(cross2(self.v, a) / self.speed.powi(3))
    }
}

/// Analytic kinematics of a polynomial trajectory at `t`.
///
/// Velocity and acceleration come from differentiating the channel
/// polynomials with the chain rule `d/dt = (1/T)·d/du`; degrees too low for an
/// order return exact zeros. The heading comes from the normalized
/// sine/cosine channels.
pub fn poly_derivatives(traj: &PolyTraj, t: f64) -> Result<KinematicSample> {
    let horizon = traj.horizon();
    let eps = 1e-9 * horizon.max(1.0);
    if t < -eps || t > horizon + eps {
        return Err(Error::OutOfDomain { t, lo: 0.0, hi: horizon });
    }
    let u = t / horizon;
    let cx = traj.channel(crate::traj::TrajChannel::X);
    let cy = traj.channel(crate::traj::TrajChannel::Y);
    let dcx = poly_derive(cx);
    let dcy = poly_derive(cy);
    let ddcx = poly_derive(&dcx);
    let ddcy = poly_derive(&dcy);
    let v = [poly_eval(&dcx, u) / horizon, poly_eval(&dcy, u) / horizon];
    let a = [
        poly_eval(&ddcx, u) / (horizon * horizon),
        poly_eval(&ddcy, u) / (horizon * horizon),
    ];
    let s_raw = poly_eval(traj.channel(crate::traj::TrajChannel::Sin), u);
    let c_raw = poly_eval(traj.channel(crate::traj::TrajChannel::Cos), u);
    let (s, c) = normalize_heading(s_raw, c_raw)?;
    Ok(KinematicSample { t, v, a: Some(a), h: [c, s], speed: v[0].hypot(v[1]) })
}

/// Finite-difference kinematics of a uniformly sampled track.
///
/// Interior points use central differences, `v_i = (p_{i+1} − p_{i−1})/(2Δt)`
/// and `a_i = (p_{i+1} − 2p_i + p_{i−1})/Δt²`. Endpoints use one-sided
/// first-order differences for velocity and carry no acceleration.
pub fn track_derivatives(track: &WaypointTrack) -> Result<Vec<KinematicSample>> {
    let n = track.len();
    if n < 3 {
        return Err(Error::TooShort { needed: 3, got: n });
    }
    let times = track.times();
    let dt = (track.end_time() - track.start_time()) / (n - 1) as f64;
    for w in times.windows(2) {
        if ((w[1] - w[0]) - dt).abs() > 1e-6 {
            return Err(Error::NonUniformTimes);
        }
    }
    let poses = track.poses();
    let pos = |i: usize| [poses[i].x, poses[i].y];
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let (v, a) = if i == 0 {
            let p0 = pos(0);
            let p1 = pos(1);
            ([(p1[0] - p0[0]) / dt, (p1[1] - p0[1]) / dt], None)
        } else if i == n - 1 {
            let p0 = pos(n - 2);
            let p1 = pos(n - 1);
            ([(p1[0] - p0[0]) / dt, (p1[1] - p0[1]) / dt], None)
        } else {
            let (pm, p0, pp) = (pos(i - 1), pos(i), pos(i + 1));
            let v = [(pp[0] - pm[0]) / (2.0 * dt), (pp[1] - pm[1]) / (2.0 * dt)];
            let a = [
                (pp[0] - 2.0 * p0[0] + pm[0]) / (dt * dt),
                (pp[1] - 2.0 * p0[1] + pm[1]) / (dt * dt),
            ];
            (v, Some(a))
        };
        out.push(KinematicSample {
            t: times[i],
            v,
            a,
            h: [poses[i].c, poses[i].s],
            speed: v[0].hypot(v[1]),
        });
    }
    Ok(out)
}

/// Per-trajectory feasibility statistics over all prediction time-points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibilityStats {
    /// max of `a·v/|v|` (m/s²).
    pub max_lon_acc: f64,
    /// min of `a·v/|v|` (m/s²).
    pub min_lon_acc: f64,
    /// max of `|a × v|/|v|` (m/s²).
    pub max_lat_acc: f64,
    /// max of `|v × h|` (m/s).
    pub max_lat_speed: f64,
    /// All time-points were below the static-speed threshold; stats are
    /// reported as zero.
    pub is_static: bool,
}

/// Aggregate feasibility statistics from kinematic samples.
///
/// Time-points slower than `static_speed_threshold` are excluded from the
/// longitudinal/lateral acceleration aggregation (they divide by `|v|`);
/// samples without acceleration contribute to lateral speed only. A
/// trajectory whose every time-point is below the threshold is flagged
/// static and reports zeros.
pub fn feasibility_stats(
    samples: &[KinematicSample],
    static_speed_threshold: f64,
) -> Result<FeasibilityStats> {
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    if samples.iter().all(|s| s.speed < static_speed_threshold) {
        return Ok(FeasibilityStats {
            max_lon_acc: 0.0,
            min_lon_acc: 0.0,
            max_lat_acc: 0.0,
            max_lat_speed: 0.0,
            is_static: true,
        });
    }
    let mut max_lon = f64::NEG_INFINITY;
    let mut min_lon = f64::INFINITY;
    let mut max_lat = 0.0f64;
    let mut max_lat_speed = 0.0f64;
    let mut any_acc = false;
    for s in samples {
        max_lat_speed = max_lat_speed.max(cross2(s.v, s.h).abs());
        if s.speed < static_speed_threshold {
            continue;
        }
        if let Some(a) = s.a {
            any_acc = true;
            max_lon = max_lon.max(dot2(a, s.v) / s.speed);
            min_lon = min_lon.min(dot2(a, s.v) / s.speed);
            max_lat = max_lat.max(cross2(a, s.v).abs() / s.speed);
        }
    }
    if !any_acc {
        max_lon = 0.0;
        min_lon = 0.0;
    }
    Ok(FeasibilityStats {
        max_lon_acc: max_lon,
        min_lon_acc: min_lon,
        max_lat_acc: max_lat,
        max_lat_speed,
        is_static: false,
    })
}

/// A normalized histogram over fixed-width bins; only non-empty bins are kept.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub bin_width: f64,
    /// `(lower_edge, fraction)` in ascending edge order; a value `v` falls in
    /// the bin `floor(v / bin_width)`.
    pub bins: Vec<(f64, f64)>,
}

impl Histogram {
    fn build(values: impl Iterator<Item = f64>, bin_width: f64) -> Self {
        let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
        let mut total = 0usize;
        for v in values {
            let idx = (v / bin_width).floor() as i64;
            *counts.entry(idx).or_insert(0) += 1;
            total += 1;
        }
        let bins = counts
            .into_iter()
            .map(|(idx, c)| (idx as f64 * bin_width, c as f64 / total as f64))
            .collect();
        Self { bin_width, bins }
    }

    /// Total fraction of mass in bins whose lower edge is at or above `edge`.
    pub fn mass_at_or_above(&self, edge: f64) -> f64 {
        self.bins.iter().filter(|(lo, _)| *lo >= edge - 1e-12).map(|(_, f)| f).sum()
    }
}

/// Bin widths per feasibility quantity; defaults are 0.1 m/s² for the three
/// acceleration quantities and 0.01 m/s for lateral speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibilityBinWidths {
    pub max_lon_acc: f64,
    pub min_lon_acc: f64,
    pub max_lat_acc: f64,
    pub max_lat_speed: f64,
}

impl Default for FeasibilityBinWidths {
    fn default() -> Self {
        Self { max_lon_acc: 0.1, min_lon_acc: 0.1, max_lat_acc: 0.1, max_lat_speed: 0.01 }
    }
}

/// Normalized histograms of the four feasibility quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityHistograms {
    pub max_lon_acc: Histogram,
    pub min_lon_acc: Histogram,
    pub max_lat_acc: Histogram,
    pub max_lat_speed: Histogram,
}

/// Histogram the feasibility statistics of non-static trajectories.
///
/// Static trajectories are excluded; fractions sum to 1 per quantity.
pub fn feasibility_histogram(
    stats: &[FeasibilityStats],
    widths: &FeasibilityBinWidths,
) -> Result<FeasibilityHistograms> {
    let moving: Vec<&FeasibilityStats> = stats.iter().filter(|s| !s.is_static).collect();
    if moving.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(FeasibilityHistograms {
        max_lon_acc: Histogram::build(moving.iter().map(|s| s.max_lon_acc), widths.max_lon_acc),
        min_lon_acc: Histogram::build(moving.iter().map(|s| s.min_lon_acc), widths.min_lon_acc),
        max_lat_acc: Histogram::build(moving.iter().map(|s| s.max_lat_acc), widths.max_lat_acc),
        max_lat_speed: Histogram::build(
            moving.iter().map(|s| s.max_lat_speed),
            widths.max_lat_speed,
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::se2::SE2Pose;
    use approx::assert_relative_eq;

    #[test]
    fn poly_derivatives_of_quadratic_motion() {
        // x(t) = 3t + 0.5t² is 12u + 8u² with T = 4:
        // v(0) = 12/4 = 3 m/s, a = 2·8/16 = 1 m/s².
        let traj = PolyTraj::new(4.0, vec![0.0, 12.0, 8.0], vec![0.0], vec![0.0], vec![1.0])
            .unwrap();
        let k = poly_derivatives(&traj, 0.0).unwrap();
        assert_relative_eq!(k.v[0], 3.0, epsilon = 1e-12);
        assert_relative_eq!(k.a.unwrap()[0], 1.0, epsilon = 1e-12);
        assert_eq!(k.h, [1.0, 0.0]);
    }

    #[test]
    fn constant_trajectory_has_zero_derivatives() {
        let traj = PolyTraj::constant(4.0, &SE2Pose::new(1.0, 2.0, 0.5)).unwrap();
        let k = poly_derivatives(&traj, 2.0).unwrap();
        assert_eq!(k.v, [0.0, 0.0]);
        assert_eq!(k.a.unwrap(), [0.0, 0.0]);
        assert_eq!(k.speed, 0.0);
    }

    #[test]
    fn poly_derivatives_match_finite_differences_of_eval() {
        let traj = PolyTraj::new(
            4.0,
            vec![1.0, -3.0, 7.0, 2.0],
            vec![0.5, 4.0, -1.0, 0.3],
            vec![0.1],
            vec![1.0],
        )
        .unwrap();
        let h = 1e-4;
        for t in [0.5, 1.3, 2.0, 3.5] {
            let k = poly_derivatives(&traj, t).unwrap();
            let plus = traj.eval_pose(t + h).unwrap();
            let minus = traj.eval_pose(t - h).unwrap();
            let fd_vx = (plus.x - minus.x) / (2.0 * h);
            let fd_vy = (plus.y - minus.y) / (2.0 * h);
            let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1.0);
            assert!(rel(k.v[0], fd_vx) < 1e-6);
            assert!(rel(k.v[1], fd_vy) < 1e-6);
        }
    }

    fn uniform_track(points: &[(f64, f64)], dt: f64) -> WaypointTrack {
        let times = (0..points.len()).map(|i| i as f64 * dt).collect();
        let poses = points.iter().map(|&(x, y)| SE2Pose { x, y, s: 0.0, c: 1.0 }).collect();
        WaypointTrack::new(times, poses, true).unwrap()
    }

    #[test]
    fn track_derivatives_arithmetic() {
        let track = uniform_track(&[(0.0, 0.0), (1.0, 0.0), (4.0, 0.0)], 1.0);
        let ks = track_derivatives(&track).unwrap();
        assert_eq!(ks.len(), 3);
        assert_eq!(ks[0].a, None);
        assert_eq!(ks[2].a, None);
        assert_relative_eq!(ks[1].v[0], 2.0, epsilon = 1e-12);
        assert_relative_eq!(ks[1].a.unwrap()[0], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn constant_velocity_track_has_zero_acceleration() {
        let pts: Vec<(f64, f64)> = (0..20).map(|i| (1.5 * i as f64 * 0.1, 0.0)).collect();
        let track = uniform_track(&pts, 0.1);
        for k in track_derivatives(&track).unwrap() {
            if let Some(a) = k.a {
                assert!(a[0].abs() < 1e-10 && a[1].abs() < 1e-10);
            }
        }
    }

    #[test]
    fn track_derivatives_validation() {
        let short = uniform_track(&[(0.0, 0.0), (1.0, 0.0)], 0.1);
        assert!(matches!(track_derivatives(&short), Err(Error::TooShort { .. })));
        let times = vec![0.0, 0.1, 0.3];
        let poses = vec![SE2Pose::identity(); 3];
        let nonuniform = WaypointTrack::new(times, poses, true).unwrap();
        assert!(matches!(track_derivatives(&nonuniform), Err(Error::NonUniformTimes)));
    }

    #[test]
    fn track_fd_matches_analytic_for_cubic() {
        let traj = PolyTraj::new(
            4.0,
            vec![0.0, 8.0, -5.0, 2.0],
            vec![1.0, -2.0, 3.0, -1.0],
            vec![0.0],
            vec![1.0],
        )
        .unwrap();
        let times: Vec<f64> = (0..=40).map(|i| i as f64 * 0.1).collect();
        let track = traj.sample_waypoints(&times).unwrap();
        let ks = track_derivatives(&track).unwrap();
        for k in &ks[1..ks.len() - 1] {
            let analytic = poly_derivatives(&traj, k.t).unwrap();
            let fd = k.a.unwrap();
            let an = analytic.a.unwrap();
            assert!((fd[0] - an[0]).abs() < 0.05, "t={}: {} vs {}", k.t, fd[0], an[0]);
            assert!((fd[1] - an[1]).abs() < 0.05);
        }
    }

    fn circular_samples(speed: f64, radius: f64, n: usize) -> Vec<KinematicSample> {
        let omega = speed / radius;
        (0..n)
            .map(|i| {
                let t = i as f64 * 0.1;
                let phi = omega * t;
                let v = [-speed * phi.sin(), speed * phi.cos()];
                let a = [-speed * omega * phi.cos(), -speed * omega * phi.sin()];
                // Heading tangent to the circle.
                let h = [-phi.sin(), phi.cos()];
                KinematicSample { t, v, a: Some(a), h, speed }
            })
            .collect()
    }

    #[test]
    fn feasibility_of_uniform_circular_motion() {
        let stats = feasibility_stats(&circular_samples(5.0, 25.0, 41), 0.2).unwrap();
        assert!(stats.max_lon_acc.abs() < 1e-9);
        assert!(stats.min_lon_acc.abs() < 1e-9);
        assert_relative_eq!(stats.max_lat_acc, 1.0, epsilon = 1e-9);
        assert!(stats.max_lat_speed < 1e-9);
        assert!(!stats.is_static);
    }

    #[test]
    fn feasibility_of_straight_acceleration() {
        let samples: Vec<KinematicSample> = (0..10)
            .map(|i| {
                let v = 3.0 + 2.0 * i as f64 * 0.1;
                KinematicSample {
                    t: i as f64 * 0.1,
                    v: [v, 0.0],
                    a: Some([2.0, 0.0]),
                    h: [1.0, 0.0],
                    speed: v,
                }
            })
            .collect();
        let stats = feasibility_stats(&samples, 0.2).unwrap();
        assert_relative_eq!(stats.max_lon_acc, 2.0, epsilon = 1e-12);
        assert_relative_eq!(stats.min_lon_acc, 2.0, epsilon = 1e-12);
        assert_eq!(stats.max_lat_acc, 0.0);
    }

    #[test]
    fn feasibility_of_sideways_drift() {
        let sample = KinematicSample {
            t: 0.0,
            v: [0.0, 1.0],
            a: Some([0.0, 0.0]),
            h: [1.0, 0.0],
            speed: 1.0,
        };
        let stats = feasibility_stats(&[sample], 0.2).unwrap();
        assert_relative_eq!(stats.max_lat_speed, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn static_trajectory_is_flagged_and_zeroed() {
        let sample = KinematicSample {
            t: 0.0,
            v: [0.05, 0.0],
            a: Some([3.0, 1.0]),
            h: [1.0, 0.0],
            speed: 0.05,
        };
        let stats = feasibility_stats(&[sample], 0.2).unwrap();
        assert!(stats.is_static);
        assert_eq!(
            (stats.max_lon_acc, stats.min_lon_acc, stats.max_lat_acc, stats.max_lat_speed),
            (0.0, 0.0, 0.0, 0.0)
        );
        assert!(matches!(feasibility_stats(&[], 0.2), Err(Error::EmptyInput)));
    }

    #[test]
    fn lon_lat_decomposition_identity() {
        // lon² + lat² = |a|² at every included time-point.
        let samples = circular_samples(4.0, 10.0, 20);
        for s in &samples {
            let a = s.a.unwrap();
            let lon = dot2(a, s.v) / s.speed;
            let lat = cross2(a, s.v).abs() / s.speed;
            let norm2 = a[0] * a[0] + a[1] * a[1];
            assert_relative_eq!(lon * lon + lat * lat, norm2, max_relative = 1e-9);
        }
    }

    #[test]
    fn histogram_basics() {
        let one = FeasibilityStats {
            max_lon_acc: 1.23,
            min_lon_acc: -0.5,
            max_lat_acc: 0.4,
            max_lat_speed: 0.03,
            is_static: false,
        };
        let hists = feasibility_histogram(&[one; 5], &FeasibilityBinWidths::default()).unwrap();
        assert_eq!(hists.max_lon_acc.bins.len(), 1);
        assert_eq!(hists.max_lon_acc.bins[0].1, 1.0);
        assert_relative_eq!(hists.min_lon_acc.bins[0].0, -0.5, epsilon = 1e-12);

        let mut stats = vec![one; 3];
        let mut other = one;
        other.max_lon_acc = 2.5;
        stats.extend(vec![other; 7]);
        let hists = feasibility_histogram(&stats, &FeasibilityBinWidths::default()).unwrap();
        let fractions: Vec<f64> = hists.max_lon_acc.bins.iter().map(|b| b.1).collect();
        assert_eq!(fractions, vec![0.3, 0.7]);
        let total: f64 = fractions.iter().sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn histogram_excludes_static_trajectories() {
        let moving = FeasibilityStats {
            max_lon_acc: 0.0,
            min_lon_acc: 0.0,
            max_lat_acc: 0.0,
            max_lat_speed: 0.0,
            is_static: false,
        };
        let parked = FeasibilityStats { is_static: true, ..moving };
        assert!(feasibility_histogram(&[parked], &FeasibilityBinWidths::default()).is_err());
        let hists =
            feasibility_histogram(&[moving, parked], &FeasibilityBinWidths::default()).unwrap();
        assert_eq!(hists.max_lat_speed.bins[0].1, 1.0);
    }
}
