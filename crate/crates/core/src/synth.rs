//! Deterministic, seeded synthetic trajectory generation: kinematic-bicycle
//! vehicles and bicyclists driven by jerk-bounded random control profiles,
//! pedestrian smoothed random walks, and observation-noise injection.
//!
//! Every actor draws from its own RNG stream derived from `(seed, index)`, so
//! generation is reproducible and order-independent.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::se2::{OrientedBox, SE2Pose};
use crate::traj::WaypointTrack;

/// Traffic-actor class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActorClass {
    Vehicle,
    Bicyclist,
    Pedestrian,
}

impl ActorClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            ActorClass::Vehicle => "vehicle",
            ActorClass::Bicyclist => "bicyclist",
            ActorClass::Pedestrian => "pedestrian",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "vehicle" => Ok(ActorClass::Vehicle),
            "bicyclist" => Ok(ActorClass::Bicyclist),
            "pedestrian" => Ok(ActorClass::Pedestrian),
            other => Err(Error::InvalidConfig(format!("unknown actor class '{other}'"))),
        }
    }

    /// Pedestrian labels do not model heading.
    pub fn has_heading(&self) -> bool {
        !matches!(self, ActorClass::Pedestrian)
    }
}

impl std::fmt::Display for ActorClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Generator configuration.
///
/// The hard clip bounds default to ±8 m/s² longitudinal acceleration and
/// ±0.2 m⁻¹ curvature; the random control profiles are scaled well inside
/// those limits so typical actors drive plausibly and the clips only catch
/// outliers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenConfig {
    pub class: ActorClass,
    /// Track length in seconds.
    pub horizon: f64,
    /// Sample interval in seconds; `horizon/dt` must be integral.
    pub dt: f64,
    pub count: usize,
    pub seed: u64,
    /// Hard clip on longitudinal acceleration (m/s²).
    pub lon_acc_limits: (f64, f64),
    /// Hard clip on |curvature| (1/m).
    pub curvature_limit: f64,
    /// Slew-rate bound on longitudinal acceleration (m/s³).
    pub jerk_limit: f64,
    /// Initial/target speed range (m/s).
    pub speed_range: (f64, f64),
    pub box_dims: (f64, f64),
    /// Distance from the integrated rear-axle point to the centroid (m).
    pub half_wheelbase: f64,
    /// Knot spacing range of the random control splines (s).
    pub knot_interval: (f64, f64),
    /// Std of longitudinal-acceleration knot values (m/s²).
    pub lon_acc_scale: f64,
    /// Typical lateral acceleration used to scale curvature knots (m/s²).
    pub lat_acc_scale: f64,
    /// Fraction of actors given a brake-dwell-accelerate profile.
    pub stop_go_fraction: f64,
    /// Pedestrian velocity process: mean-reversion rate (1/s) and
    /// diffusion (m/s per √s).
    pub ou_reversion: f64,
    pub ou_noise: f64,
}

impl GenConfig {
    /// Class defaults at the given horizon.
    pub fn for_class(class: ActorClass, horizon: f64, count: usize, seed: u64) -> Self {
        let base = Self {
            class,
            horizon,
            dt: 0.1,
            count,
            seed,
            lon_acc_limits: (-8.0, 8.0),
            curvature_limit: 0.2,
            jerk_limit: 4.0,
            speed_range: (0.5, 15.0),
            box_dims: (4.6, 2.0),
            half_wheelbase: 1.4,
            knot_interval: (6.0, 10.0),
            lon_acc_scale: 0.45,
            lat_acc_scale: 0.45,
            stop_go_fraction: 0.02,
            ou_reversion: 0.8,
            ou_noise: 0.5,
        };
        match class {
            ActorClass::Vehicle => base,
            ActorClass::Bicyclist => Self {
                speed_range: (1.0, 8.0),
                box_dims: (1.8, 0.6),
                half_wheelbase: 0.5,
                lon_acc_scale: 0.3,
                lat_acc_scale: 0.35,
                stop_go_fraction: 0.02,
                ..base
            },
            ActorClass::Pedestrian => Self {
                speed_range: (0.3, 2.0),
                box_dims: (0.6, 0.6),
                half_wheelbase: 0.0,
                stop_go_fraction: 0.0,
                ..base
            },
        }
    }

    /// Number of integration steps (`horizon / dt`).
    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !(self.horizon > 0.0) {
            return Err(Error::InvalidConfig("dt and horizon must be positive".into()));
        }
        let n = self.horizon / self.dt;
        if (n - n.round()).abs() > 1e-9 || n.round() < 1.0 {
            return Err(Error::InvalidConfig(format!(
                "horizon {} must be an integral multiple of dt {}",
                self.horizon, self.dt
            )));
        }
        let (lo, hi) = self.lon_acc_limits;
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidConfig("bad longitudinal acceleration limits".into()));
        }
        if !(self.curvature_limit > 0.0) || !(self.jerk_limit > 0.0) {
            return Err(Error::InvalidConfig("curvature and jerk limits must be positive".into()));
        }
        let (slo, shi) = self.speed_range;
        if !(0.0 <= slo && slo <= shi) {
            return Err(Error::InvalidConfig("bad speed range".into()));
        }
        let (klo, khi) = self.knot_interval;
        if !(0.0 < klo && klo <= khi) {
            return Err(Error::InvalidConfig("bad knot interval".into()));
        }
        if !(self.box_dims.0 > 0.0 && self.box_dims.1 > 0.0) {
            return Err(Error::InvalidConfig("box dimensions must be positive".into()));
        }
        if !(self.lon_acc_scale >= 0.0 && self.lat_acc_scale >= 0.0)
            || !(0.0..=1.0).contains(&self.stop_go_fraction)
            || self.half_wheelbase < 0.0
            || self.ou_reversion < 0.0
            || self.ou_noise < 0.0
        {
            return Err(Error::InvalidConfig("bad profile parameters".into()));
        }
        Ok(())
    }

    fn times(&self) -> Vec<f64> {
        (0..=self.steps()).map(|i| i as f64 * self.dt).collect()
    }

    fn actor_rng(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }
}

/// A generated ground-truth actor.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledActor {
    pub id: u64,
    pub class: ActorClass,
    pub bbox: OrientedBox,
    /// Noise-free ground-truth track, uniformly sampled at `dt`.
    pub track: WaypointTrack,
    /// Seed provenance: the base seed; the actor's RNG stream is its `id`.
    pub base_seed: u64,
}

/// Piecewise-cubic (smoothstep) random profile through knots at random
/// spacing.
struct SmoothProfile {
    knot_ts: Vec<f64>,
    knot_vs: Vec<f64>,
}

impl SmoothProfile {
    fn sample<R: Rng>(
        rng: &mut R,
        horizon: f64,
        interval: (f64, f64),
        mut knot_value: impl FnMut(&mut R) -> f64,
    ) -> Self {
        let mut knot_ts = vec![0.0];
        let mut knot_vs = vec![knot_value(rng)];
        while *knot_ts.last().unwrap() < horizon {
            let gap = interval.0 + rng.random::<f64>() * (interval.1 - interval.0);
            knot_ts.push(knot_ts.last().unwrap() + gap);
            knot_vs.push(knot_value(rng));
        }
        Self { knot_ts, knot_vs }
    }

    fn eval(&self, t: f64) -> f64 {
        let i = self.knot_ts.partition_point(|&k| k <= t).min(self.knot_ts.len() - 1);
        if i == 0 {
            return self.knot_vs[0];
        }
        let (t0, t1) = (self.knot_ts[i - 1], self.knot_ts[i]);
        let (v0, v1) = (self.knot_vs[i - 1], self.knot_vs[i]);
        let s = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
        let w = s * s * (3.0 - 2.0 * s);
        v0 + (v1 - v0) * w
    }
}

/// Clamp a sampled control sequence to `[lo, hi]` with slew rate at most
/// `max_delta` per sample. The windows always intersect, so both bounds hold
/// exactly on the output.
fn slew_clip(raw: &[f64], max_delta: f64, lo: f64, hi: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(raw.len());
    let mut prev = raw[0].clamp(lo, hi);
    out.push(prev);
    for &r in &raw[1..] {
        let v = r.clamp((prev - max_delta).max(lo), (prev + max_delta).min(hi));
        out.push(v);
        prev = v;
    }
    out
}

/// Control signals sampled on the half-step grid used by RK4.
struct ControlGrid {
    lon_acc: Vec<f64>,
    curvature: Vec<f64>,
}

fn build_controls<R: Rng>(rng: &mut R, cfg: &GenConfig, v0: f64, stop_go: bool) -> ControlGrid {
    let half_dt = cfg.dt / 2.0;
    let m = 2 * cfg.steps();
    let (lo, hi) = cfg.lon_acc_limits;

    let lon_raw: Vec<f64> = if stop_go {
        // Cruise, brake to a stop, dwell, pull away. The braking strength is
        // raised as needed so the stop happens within the first half of the
        // horizon even for fast actors.
        let t_brake = 0.3 + rng.random::<f64>() * (0.25 * cfg.horizon - 0.3).max(0.1);
        let brake_window = 0.45 * cfg.horizon;
        let a_brake = (1.5 + rng.random::<f64>() * 1.5).max(1.2 * v0 / brake_window);
        let dwell = 0.5 + rng.random::<f64>();
        let effective_brake = a_brake.min(-lo); // the clip caps the decel
        let t_go = t_brake + v0 / effective_brake + dwell;
        let a_go = 0.8 + rng.random::<f64>() * 1.2;
        (0..=m)
            .map(|k| {
                let t = k as f64 * half_dt;
                if t < t_brake {
                    0.0
                } else if t < t_go {
                    -a_brake
                } else {
                    a_go
                }
            })
            .collect()
    } else {
        let scale = cfg.lon_acc_scale;
        let profile = SmoothProfile::sample(rng, cfg.horizon, cfg.knot_interval, |r| {
            let z: f64 = r.sample(StandardNormal);
            z * scale
        });
        (0..=m).map(|k| profile.eval(k as f64 * half_dt)).collect()
    };
    let lon_acc = slew_clip(&lon_raw, cfg.jerk_limit * half_dt, lo, hi);

    // Curvature knots scaled so typical lateral acceleration v²κ stays near
    // the configured scale at the initial speed. The floor on v² keeps slow
    // actors from being handed hairpin curvatures.
    let kappa_scale = if stop_go {
        0.2 * cfg.lat_acc_scale / v0.powi(2).max(25.0)
    } else {
        cfg.lat_acc_scale / v0.powi(2).max(25.0)
    };
    let profile = SmoothProfile::sample(rng, cfg.horizon, cfg.knot_interval, |r| {
        let z: f64 = r.sample(StandardNormal);
        z * kappa_scale
    });
    let curvature: Vec<f64> = (0..=m)
        .map(|k| profile.eval(k as f64 * half_dt).clamp(-cfg.curvature_limit, cfg.curvature_limit))
        .collect();

    debug_assert!(lon_acc.iter().all(|&a| (lo..=hi).contains(&a)));
    debug_assert!(curvature.iter().all(|&k| k.abs() <= cfg.curvature_limit));
    ControlGrid { lon_acc, curvature }
}

/// Rear-axle bicycle state.
#[derive(Clone, Copy)]
struct BicycleState {
    x: f64,
    y: f64,
    theta: f64,
    v: f64,
}

fn bicycle_deriv(s: &BicycleState, a: f64, kappa: f64) -> [f64; 4] {
    let v = s.v.max(0.0);
    [v * s.theta.cos(), v * s.theta.sin(), v * kappa, a]
}

/// Integrate the bicycle ODE `x' = v cos θ, y' = v sin θ, θ' = v κ, v' = a`
/// with fixed-step RK4 (Euler is too coarse for the circular-motion
/// identities at dt = 0.1), recording the centroid pose at each step. The
/// centroid sits `half_wheelbase` ahead of the integrated rear-axle point,
/// which gives labels the small nonzero lateral speed `|κ|·v·half_wheelbase`
/// real centroid annotations show. Speed is clamped at zero: stopped actors
/// do not reverse under residual braking.
fn integrate_bicycle(
    mut state: BicycleState,
    controls: &ControlGrid,
    dt: f64,
    steps: usize,
    half_wheelbase: f64,
) -> Vec<SE2Pose> {
    let centroid = |s: &BicycleState| SE2Pose {
        x: s.x + half_wheelbase * s.theta.cos(),
        y: s.y + half_wheelbase * s.theta.sin(),
        s: s.theta.sin(),
        c: s.theta.cos(),
    };
    let mut poses = Vec::with_capacity(steps + 1);
    poses.push(centroid(&state));
    for i in 0..steps {
        let (a0, k0) = (controls.lon_acc[2 * i], controls.curvature[2 * i]);
        let (a1, k1) = (controls.lon_acc[2 * i + 1], controls.curvature[2 * i + 1]);
        let (a2, k2) = (controls.lon_acc[2 * i + 2], controls.curvature[2 * i + 2]);
        let step = |s: &BicycleState, d: &[f64; 4], h: f64| BicycleState {
            x: s.x + h * d[0],
            y: s.y + h * d[1],
            theta: s.theta + h * d[2],
            v: s.v + h * d[3],
        };
        let d1 = bicycle_deriv(&state, a0, k0);
        let d2 = bicycle_deriv(&step(&state, &d1, dt / 2.0), a1, k1);
        let d3 = bicycle_deriv(&step(&state, &d2, dt / 2.0), a1, k1);
        let d4 = bicycle_deriv(&step(&state, &d3, dt), a2, k2);
        state = BicycleState {
            x: state.x + dt / 6.0 * (d1[0] + 2.0 * d2[0] + 2.0 * d3[0] + d4[0]),
            y: state.y + dt / 6.0 * (d1[1] + 2.0 * d2[1] + 2.0 * d3[1] + d4[1]),
            theta: state.theta + dt / 6.0 * (d1[2] + 2.0 * d2[2] + 2.0 * d3[2] + d4[2]),
            v: (state.v + dt / 6.0 * (d1[3] + 2.0 * d2[3] + 2.0 * d3[3] + d4[3])).max(0.0),
        };
        poses.push(centroid(&state));
    }
    poses
}

/// Generate kinematic-bicycle actors (vehicles and bicyclists).
pub fn gen_bicycle(cfg: &GenConfig) -> Result<Vec<LabeledActor>> {
    cfg.validate()?;
    let times = cfg.times();
    let bbox = OrientedBox::new(cfg.box_dims.0, cfg.box_dims.1)?;
    let mut actors = Vec::with_capacity(cfg.count);
    for id in 0..cfg.count as u64 {
        let mut rng = cfg.actor_rng(id);
        let x0 = (rng.random::<f64>() - 0.5) * 80.0;
        let y0 = (rng.random::<f64>() - 0.5) * 80.0;
        let theta0 = (rng.random::<f64>() - 0.5) * 2.0 * std::f64::consts::PI;
        let (slo, shi) = cfg.speed_range;
        let mut v0 = slo + rng.random::<f64>() * (shi - slo);
        let stop_go = rng.random::<f64>() < cfg.stop_go_fraction;
        if stop_go {
            // Stop-and-go happens at approach speeds, not at full cruise.
            v0 = v0.min(slo.max(0.6 * shi));
        }
        let controls = build_controls(&mut rng, cfg, v0, stop_go);
        let poses = integrate_bicycle(
            BicycleState { x: x0, y: y0, theta: theta0, v: v0 },
            &controls,
            cfg.dt,
            cfg.steps(),
            cfg.half_wheelbase,
        );
        let track = WaypointTrack::new(times.clone(), poses, true)?;
        actors.push(LabeledActor { id, class: cfg.class, bbox, track, base_seed: cfg.seed });
    }
    Ok(actors)
}

/// Generate pedestrian actors: a mean-reverting (Ornstein–Uhlenbeck style)
/// random walk on velocity, `v ← v + r·dt·(v_target − v) + σ·√dt·ξ`, with the
/// speed capped at the configured maximum. Pedestrian labels carry no heading.
pub fn gen_pedestrian(cfg: &GenConfig) -> Result<Vec<LabeledActor>> {
    cfg.validate()?;
    let times = cfg.times();
    let bbox = OrientedBox::new(cfg.box_dims.0, cfg.box_dims.1)?;
    let sqrt_dt = cfg.dt.sqrt();
    let mut actors = Vec::with_capacity(cfg.count);
    for id in 0..cfg.count as u64 {
        let mut rng = cfg.actor_rng(id);
        let mut x = (rng.random::<f64>() - 0.5) * 40.0;
        let mut y = (rng.random::<f64>() - 0.5) * 40.0;
        let dir = (rng.random::<f64>() - 0.5) * 2.0 * std::f64::consts::PI;
        let (slo, shi) = cfg.speed_range;
        let speed = slo + rng.random::<f64>() * (shi - slo);
        let target = [speed * dir.cos(), speed * dir.sin()];
        let mut v = target;
        let mut poses = Vec::with_capacity(cfg.steps() + 1);
        poses.push(SE2Pose { x, y, s: 0.0, c: 1.0 });
        for _ in 0..cfg.steps() {
            let prev = v;
            for axis in 0..2 {
                let z: f64 = rng.sample(StandardNormal);
                v[axis] += cfg.ou_reversion * cfg.dt * (target[axis] - v[axis])
                    + cfg.ou_noise * sqrt_dt * z;
            }
            let speed_now = v[0].hypot(v[1]);
            if speed_now > shi {
                let f = shi / speed_now;
                v[0] *= f;
                v[1] *= f;
            }
            x += cfg.dt * 0.5 * (prev[0] + v[0]);
            y += cfg.dt * 0.5 * (prev[1] + v[1]);
            poses.push(SE2Pose { x, y, s: 0.0, c: 1.0 });
        }
        let track = WaypointTrack::new(times.clone(), poses, false)?;
        actors.push(LabeledActor { id, class: cfg.class, bbox, track, base_seed: cfg.seed });
    }
    Ok(actors)
}

/// Generate actors of the configured class.
pub fn generate(cfg: &GenConfig) -> Result<Vec<LabeledActor>> {
    match cfg.class {
        ActorClass::Pedestrian => gen_pedestrian(cfg),
        _ => gen_bicycle(cfg),
    }
}

/// Perturb a track with i.i.d. Gaussian observation noise: `sigma_pos` on
/// each centroid coordinate and `sigma_theta` on the heading angle (skipped
/// for tracks without heading). Deterministic per seed; zero sigmas return
/// the track bit-identically.
pub fn add_observation_noise(
    track: &WaypointTrack,
    sigma_pos: f64,
    sigma_theta: f64,
    seed: u64,
) -> Result<WaypointTrack> {
    if !(sigma_pos >= 0.0) || !(sigma_theta >= 0.0) {
        return Err(Error::InvalidConfig("noise sigmas must be non-negative".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let poses = track
        .poses()
        .iter()
        .map(|p| {
            let mut q = *p;
            if sigma_pos > 0.0 {
                let zx: f64 = rng.sample(StandardNormal);
                let zy: f64 = rng.sample(StandardNormal);
                q.x += sigma_pos * zx;
                q.y += sigma_pos * zy;
            }
            if sigma_theta > 0.0 && track.has_heading() {
                let z: f64 = rng.sample(StandardNormal);
                let (s, c) = (p.theta() + sigma_theta * z).sin_cos();
                q.s = s;
                q.c = c;
            }
            q
        })
        .collect();
    WaypointTrack::new(track.times().to_vec(), poses, track.has_heading())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::{feasibility_stats, track_derivatives};
    use approx::assert_relative_eq;

    fn quiet_vehicle_cfg() -> GenConfig {
        GenConfig {
            lon_acc_scale: 0.0,
            lat_acc_scale: 0.0,
            stop_go_fraction: 0.0,
            ..GenConfig::for_class(ActorClass::Vehicle, 4.0, 3, 7)
        }
    }

    #[test]
    fn zero_controls_give_straight_constant_velocity() {
        let actors = gen_bicycle(&quiet_vehicle_cfg()).unwrap();
        for actor in &actors {
            let ks = track_derivatives(&actor.track).unwrap();
            let stats = feasibility_stats(&ks, 0.2).unwrap();
            assert!(stats.max_lon_acc.abs() < 1e-9, "{}", stats.max_lon_acc);
            assert!(stats.max_lat_acc < 1e-9);
            assert!(stats.max_lat_speed < 1e-9);
            let v0 = ks[1].speed;
            assert!(ks.iter().all(|k| (k.speed - v0).abs() < 1e-9));
        }
    }

    #[test]
    fn constant_curvature_traces_a_circle() {
        // v = 5, κ = 0.04 → radius 25, centripetal acceleration 1 m/s².
        let controls = ControlGrid { lon_acc: vec![0.0; 81], curvature: vec![0.04; 81] };
        let poses = integrate_bicycle(
            BicycleState { x: 0.0, y: 0.0, theta: 0.0, v: 5.0 },
            &controls,
            0.1,
            40,
            0.0,
        );
        let times: Vec<f64> = (0..=40).map(|i| i as f64 * 0.1).collect();
        let track = WaypointTrack::new(times, poses, true).unwrap();
        // All points lie on a circle of radius 25 around (0, 25).
        for p in track.poses() {
            let r = p.x.hypot(p.y - 25.0);
            assert_relative_eq!(r, 25.0, epsilon = 1e-6);
        }
        // Interior samples only: the one-sided endpoint chords are rotated
        // off the tangent by half a step's arc.
        let ks = track_derivatives(&track).unwrap();
        let stats = feasibility_stats(&ks[1..ks.len() - 1], 0.2).unwrap();
        assert_relative_eq!(stats.max_lat_acc, 1.0, epsilon = 1e-3);
        assert!(stats.max_lat_speed < 1e-9); // rear-axle point: no lateral slip
        assert!(stats.max_lon_acc.abs() < 1e-6);
    }

    #[test]
    fn centroid_lateral_speed_matches_offset_identity() {
        // With the centroid half a wheelbase ahead, lateral speed is |κ|·v·d.
        let controls = ControlGrid { lon_acc: vec![0.0; 81], curvature: vec![0.04; 81] };
        let poses = integrate_bicycle(
            BicycleState { x: 0.0, y: 0.0, theta: 0.0, v: 5.0 },
            &controls,
            0.1,
            40,
            1.4,
        );
        let times: Vec<f64> = (0..=40).map(|i| i as f64 * 0.1).collect();
        let track = WaypointTrack::new(times, poses, true).unwrap();
        let ks = track_derivatives(&track).unwrap();
        let stats = feasibility_stats(&ks[1..ks.len() - 1], 0.2).unwrap();
        assert_relative_eq!(stats.max_lat_speed, 0.04 * 5.0 * 1.4, epsilon = 1e-3);
    }

    #[test]
    fn slew_clip_enforces_both_bounds() {
        let raw = vec![0.0, 10.0, -10.0, 3.0, 3.0, -9.0];
        let out = slew_clip(&raw, 1.0, -4.0, 4.0);
        for w in out.windows(2) {
            assert!((w[1] - w[0]).abs() <= 1.0 + 1e-12);
        }
        assert!(out.iter().all(|&v| (-4.0..=4.0).contains(&v)));
    }

    #[test]
    fn generated_controls_respect_limits() {
        let cfg = GenConfig::for_class(ActorClass::Vehicle, 8.0, 1, 3);
        let mut rng = cfg.actor_rng(0);
        for stop_go in [false, true] {
            let controls = build_controls(&mut rng, &cfg, 12.0, stop_go);
            let (lo, hi) = cfg.lon_acc_limits;
            assert!(controls.lon_acc.iter().all(|&a| (lo..=hi).contains(&a)));
            assert!(controls.curvature.iter().all(|&k| k.abs() <= cfg.curvature_limit));
            let max_jerk = cfg.jerk_limit * cfg.dt / 2.0;
            assert!(controls
                .lon_acc
                .windows(2)
                .all(|w| (w[1] - w[0]).abs() <= max_jerk + 1e-12));
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let cfg = GenConfig::for_class(ActorClass::Vehicle, 4.0, 5, 99);
        assert_eq!(gen_bicycle(&cfg).unwrap(), gen_bicycle(&cfg).unwrap());
        let ped = GenConfig::for_class(ActorClass::Pedestrian, 4.0, 5, 99);
        assert_eq!(gen_pedestrian(&ped).unwrap(), gen_pedestrian(&ped).unwrap());
    }

    #[test]
    fn stop_and_go_actors_stop_without_reversing() {
        let mut cfg = GenConfig::for_class(ActorClass::Vehicle, 8.0, 50, 5);
        cfg.stop_go_fraction = 1.0; // every actor brakes to a stop
        for actor in gen_bicycle(&cfg).unwrap() {
            let ks = track_derivatives(&actor.track).unwrap();
            let min_speed = ks.iter().map(|k| k.speed).fold(f64::INFINITY, f64::min);
            assert!(min_speed < 1.0, "expected a dwell phase, min speed {min_speed}");
            // No backward motion along the heading: a stopped vehicle stays
            // stopped. Finite differences straddle the stop boundary, so
            // allow a small margin.
            for k in &ks {
                let along = k.v[0] * k.h[0] + k.v[1] * k.h[1];
                assert!(along > -0.05, "t={}: reversing with along-speed {along}", k.t);
            }
        }
    }

    #[test]
    fn pedestrian_zero_noise_walks_straight() {
        let cfg = GenConfig {
            ou_noise: 0.0,
            ..GenConfig::for_class(ActorClass::Pedestrian, 4.0, 3, 11)
        };
        for actor in gen_pedestrian(&cfg).unwrap() {
            assert!(!actor.track.has_heading());
            let poses = actor.track.poses();
            let step0 = [poses[1].x - poses[0].x, poses[1].y - poses[0].y];
            for w in poses.windows(2) {
                assert_relative_eq!(w[1].x - w[0].x, step0[0], epsilon = 1e-9);
                assert_relative_eq!(w[1].y - w[0].y, step0[1], epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn observation_noise_basics() {
        let cfg = GenConfig::for_class(ActorClass::Vehicle, 4.0, 1, 21);
        let actor = &gen_bicycle(&cfg).unwrap()[0];
        let clean = add_observation_noise(&actor.track, 0.0, 0.0, 1).unwrap();
        assert_eq!(&clean, &actor.track);

        let a = add_observation_noise(&actor.track, 0.1, 0.01, 42).unwrap();
        let b = add_observation_noise(&actor.track, 0.1, 0.01, 42).unwrap();
        assert_eq!(a, b);
        let c = add_observation_noise(&actor.track, 0.1, 0.01, 43).unwrap();
        assert_ne!(a, c);
        // Headings stay unit after perturbation.
        for p in a.poses() {
            assert_relative_eq!(p.s * p.s + p.c * p.c, 1.0, epsilon = 1e-12);
        }
        assert!(add_observation_noise(&actor.track, -0.1, 0.0, 1).is_err());
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut cfg = GenConfig::for_class(ActorClass::Vehicle, 4.0, 1, 0);
        cfg.dt = 0.3; // 4.0 / 0.3 is not integral
        assert!(matches!(gen_bicycle(&cfg), Err(Error::InvalidConfig(_))));
        let mut cfg = GenConfig::for_class(ActorClass::Vehicle, 4.0, 1, 0);
        cfg.speed_range = (5.0, 1.0);
        assert!(gen_bicycle(&cfg).is_err());
    }
}
