//! Probabilistic polynomial trajectories: per-channel Laplace distributions
//! whose location is a polynomial in normalized time and whose scale is the
//! exponential of one, fitted by gradient descent on the negative
//! log-likelihood of sampled waypoints, plus reliability (calibration)
//! analysis of the resulting uncertainty.

use rand::Rng;

use crate::error::{Error, Result};
use crate::fit::polyfit_channel;
use crate::se2::{normalize_heading, SE2Pose};
use crate::traj::{poly_eval, PolyTraj, PoseProvider, TrajChannel, WaypointTrack};

/// Scale floor applied inside the NLL so degenerate noise-free data keeps the
/// loss finite. Applied as a clamp on `log b`.
pub const B_FLOOR: f64 = 1e-3;

/// One scalar channel: Laplace location and log-scale, each polynomial in
/// `u = t/T`. The exponential parameterization keeps `b(t) > 0` structurally.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplaceChannel {
    mu: Vec<f64>,
    log_b: Vec<f64>,
}

impl LaplaceChannel {
    pub fn new(mu: Vec<f64>, log_b: Vec<f64>) -> Result<Self> {
        for (name, v) in [("mu", &mu), ("log_b", &log_b)] {
            if v.is_empty() {
                return Err(Error::InvalidConfig(format!("{name} has no coefficients")));
            }
            if v.iter().any(|a| !a.is_finite()) {
                return Err(Error::NonFinite("Laplace channel coefficient"));
            }
        }
        Ok(Self { mu, log_b })
    }

    pub fn mu_coeffs(&self) -> &[f64] {
        &self.mu
    }

    pub fn log_b_coeffs(&self) -> &[f64] {
        &self.log_b
    }

    /// `(μ(t), b(t))` at normalized time `u`.
    pub fn params_at_u(&self, u: f64) -> (f64, f64) {
        (poly_eval(&self.mu, u), poly_eval(&self.log_b, u).exp())
    }
}

/// Distribution parameters `(μ, b)` of a channel at time `t ∈ [0, T]`.
pub fn channel_pdf_params(ch: &LaplaceChannel, horizon: f64, t: f64) -> Result<(f64, f64)> {
    let eps = 1e-9 * horizon.abs().max(1.0);
    if t < -eps || t > horizon + eps {
        return Err(Error::OutOfDomain { t, lo: 0.0, hi: horizon });
    }
    Ok(ch.params_at_u(t / horizon))
}

/// Probabilistic trajectory: Laplace channels for `cx` and `cy`, and for the
/// raw sine/cosine channels when the actor has a modeled heading.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbPolyTraj {
    horizon: f64,
    cx: LaplaceChannel,
    cy: LaplaceChannel,
    heading: Option<(LaplaceChannel, LaplaceChannel)>,
}

impl ProbPolyTraj {
    pub fn new(
        horizon: f64,
        cx: LaplaceChannel,
        cy: LaplaceChannel,
        heading: Option<(LaplaceChannel, LaplaceChannel)>,
    ) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "horizon must be positive and finite, got {horizon}"
            )));
        }
        Ok(Self { horizon, cx, cy, heading })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn has_heading(&self) -> bool {
        self.heading.is_some()
    }

    pub fn channel(&self, ch: TrajChannel) -> Option<&LaplaceChannel> {
        match ch {
            TrajChannel::X => Some(&self.cx),
            TrajChannel::Y => Some(&self.cy),
            TrajChannel::Sin => self.heading.as_ref().map(|(s, _)| s),
            TrajChannel::Cos => self.heading.as_ref().map(|(_, c)| c),
        }
    }

    /// The mean trajectory; heading channels default to the identity when
    /// absent.
    pub fn mean_traj(&self) -> PolyTraj {
        let (s, c) = match &self.heading {
            Some((s, c)) => (s.mu.clone(), c.mu.clone()),
            None => (vec![0.0], vec![1.0]),
        };
        PolyTraj::new(self.horizon, self.cx.mu.clone(), self.cy.mu.clone(), s, c)
            .expect("channels validated at construction")
    }

    fn channels_with_labels<'a>(
        &'a self,
        pose: &SE2Pose,
        label_has_heading: bool,
    ) -> Result<Vec<(&'a LaplaceChannel, f64)>> {
        let mut out = vec![(&self.cx, pose.x), (&self.cy, pose.y)];
        if let Some((s, c)) = &self.heading {
            if !label_has_heading {
                return Err(Error::HeadingUnavailable);
            }
            out.push((s, pose.s));
            out.push((c, pose.c));
        }
        Ok(out)
    }

    /// Flatten all coefficients into one vector, per channel `mu` then
    /// `log_b`, channels in `cx, cy, sin, cos` order.
    pub fn to_param_vec(&self) -> Vec<f64> {
        let mut v = Vec::new();
        for ch in self.channels() {
            v.extend_from_slice(&ch.mu);
            v.extend_from_slice(&ch.log_b);
        }
        v
    }

    /// Rebuild a trajectory of this shape from a packed parameter vector.
    pub fn with_param_vec(&self, params: &[f64]) -> Result<Self> {
        let mut iter = params.iter();
        let mut take = |n: usize| -> Result<Vec<f64>> {
            let v: Vec<f64> = iter.by_ref().take(n).copied().collect();
            if v.len() < n {
                return Err(Error::InvalidConfig("parameter vector too short".into()));
            }
            Ok(v)
        };
        let mut rebuild = |ch: &LaplaceChannel| -> Result<LaplaceChannel> {
            LaplaceChannel::new(take(ch.mu.len())?, take(ch.log_b.len())?)
        };
        let cx = rebuild(&self.cx)?;
        let cy = rebuild(&self.cy)?;
        let heading = match &self.heading {
            Some((s, c)) => Some((rebuild(s)?, rebuild(c)?)),
            None => None,
        };
        if iter.next().is_some() {
            return Err(Error::InvalidConfig("parameter vector too long".into()));
        }
        Self::new(self.horizon, cx, cy, heading)
    }

    fn channels(&self) -> Vec<&LaplaceChannel> {
        let mut v = vec![&self.cx, &self.cy];
        if let Some((s, c)) = &self.heading {
            v.push(s);
            v.push(c);
        }
        v
    }
}

impl PoseProvider for ProbPolyTraj {
    fn pose_at(&self, t: f64) -> Result<SE2Pose> {
        let eps = 1e-9 * self.horizon.max(1.0);
        if t < -eps || t > self.horizon + eps {
            return Err(Error::OutOfDomain { t, lo: 0.0, hi: self.horizon });
        }
        let u = t / self.horizon;
        let x = poly_eval(&self.cx.mu, u);
        let y = poly_eval(&self.cy.mu, u);
        let (s, c) = match &self.heading {
            Some((sc, cc)) => normalize_heading(poly_eval(&sc.mu, u), poly_eval(&cc.mu, u))?,
            None => (0.0, 1.0),
        };
        Ok(SE2Pose { x, y, s, c })
    }

    fn has_heading(&self) -> bool {
        self.heading.is_some()
    }
}

fn clamped_log_b(ch: &LaplaceChannel, u: f64) -> (f64, bool) {
    let raw = poly_eval(&ch.log_b, u);
    let floor = B_FLOOR.ln();
    if raw < floor {
        (floor, true)
    } else {
        (raw, false)
    }
}

/// Negative log-likelihood of the label under the trajectory's channels,
/// summed over the given times: `Σ [ln(2b) + |v − μ|/b]`.
///
/// Each time must match a label timestamp. The scale is floored at
/// [`B_FLOOR`] so noise-free data keeps the loss finite.
pub fn nll(traj: &ProbPolyTraj, label: &WaypointTrack, times: &[f64]) -> Result<f64> {
    let mut total = 0.0;
    for &t in times {
        let pose = label.pose_at_time(t).ok_or(Error::OutOfDomain {
            t,
            lo: label.start_time(),
            hi: label.end_time(),
        })?;
        let u = t / traj.horizon;
        for (ch, v) in traj.channels_with_labels(pose, label.has_heading())? {
            let mu = poly_eval(&ch.mu, u);
            let (log_b, _) = clamped_log_b(ch, u);
            let b = log_b.exp();
            total += (2.0 * b).ln() + (v - mu).abs() / b;
        }
    }
    Ok(total)
}

/// Analytic gradient of [`nll`] with respect to the packed parameter vector
/// (layout of [`ProbPolyTraj::to_param_vec`]).
///
/// Per sample: `∂/∂a_{μ,n} = −sign(v−μ)·uⁿ/b` and
/// `∂/∂a_{b,n} = (1 − |v−μ|/b)·uⁿ`; exact-zero residuals use subgradient 0,
/// and log-scale coefficients get zero gradient where the floor clamp is
/// active.
pub fn nll_grad(traj: &ProbPolyTraj, label: &WaypointTrack, times: &[f64]) -> Result<Vec<f64>> {
    let channels = traj.channels();
    let mut grads: Vec<(Vec<f64>, Vec<f64>)> = channels
        .iter()
        .map(|ch| (vec![0.0; ch.mu.len()], vec![0.0; ch.log_b.len()]))
        .collect();
    for &t in times {
        let pose = label.pose_at_time(t).ok_or(Error::OutOfDomain {
            t,
            lo: label.start_time(),
            hi: label.end_time(),
        })?;
        let u = t / traj.horizon;
        for (k, (ch, v)) in traj
            .channels_with_labels(pose, label.has_heading())?
            .into_iter()
            .enumerate()
        {
            let mu = poly_eval(&ch.mu, u);
            let (log_b, clamped) = clamped_log_b(ch, u);
            let b = log_b.exp();
            let r = v - mu;
            let sign = if r > 0.0 {
                1.0
            } else if r < 0.0 {
                -1.0
            } else {
                0.0
            };
            let (gmu, gb) = &mut grads[k];
            let mut un = 1.0;
            for n in 0..gmu.len().max(gb.len()) {
                if n < gmu.len() {
                    gmu[n] += -sign * un / b;
                }
                if n < gb.len() && !clamped {
                    gb[n] += (1.0 - r.abs() / b) * un;
                }
                un *= u;
            }
        }
    }
    let mut out = Vec::new();
    for (gmu, gb) in grads {
        out.extend(gmu);
        out.extend(gb);
    }
    Ok(out)
}

/// Configuration for [`fit_prob`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbFitConfig {
    pub degree_mu: usize,
    pub degree_b: usize,
    pub horizon: f64,
    /// Initial gradient-descent step size.
    pub lr: f64,
    pub max_iters: usize,
    /// Stop when one accepted step improves the NLL by less than this.
    pub tol: f64,
}

impl ProbFitConfig {
    pub fn new(degree_mu: usize, degree_b: usize, horizon: f64) -> Result<Self> {
        if degree_mu > crate::fit::MAX_DEGREE || degree_b > crate::fit::MAX_DEGREE {
            return Err(Error::InvalidConfig(format!(
                "degrees ({degree_mu}, {degree_b}) exceed the maximum of {}",
                crate::fit::MAX_DEGREE
            )));
        }
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::InvalidConfig(format!("horizon must be positive, got {horizon}")));
        }
        Ok(Self { degree_mu, degree_b, horizon, lr: 0.05, max_iters: 200, tol: 1e-9 })
    }

    pub fn with_optimizer(mut self, lr: f64, max_iters: usize, tol: f64) -> Result<Self> {
        if !(lr > 0.0) || !lr.is_finite() || !(tol >= 0.0) {
            return Err(Error::InvalidConfig("lr must be positive and tol non-negative".into()));
        }
        self.lr = lr;
        self.max_iters = max_iters;
        self.tol = tol;
        Ok(self)
    }
}

/// Fit a probabilistic trajectory to a labeled track by gradient descent on
/// the Laplace NLL over the supervision `times`.
///
/// Initialization: location coefficients from the closed-form per-channel
/// least-squares fit; log-scale constant at `ln(mean |residual|)` of that fit,
/// floored at `ln(`[`B_FLOOR`]`)`. Steps use backtracking (the step halves
/// until the NLL does not increase), so the returned NLL never exceeds the
/// initial one.
pub fn fit_prob(label: &WaypointTrack, times: &[f64], cfg: &ProbFitConfig) -> Result<ProbPolyTraj> {
    if times.is_empty() {
        return Err(Error::InvalidTimes("empty supervision times"));
    }
    let needed = cfg.degree_mu.max(cfg.degree_b) + 1;
    if times.len() < needed {
        return Err(Error::InsufficientData { needed, got: times.len() });
    }

    let mut us = Vec::with_capacity(times.len());
    let mut values: Vec<[f64; 4]> = Vec::with_capacity(times.len());
    for &t in times {
        let pose = label.pose_at_time(t).ok_or(Error::OutOfDomain {
            t,
            lo: label.start_time(),
            hi: label.end_time(),
        })?;
        us.push(t / cfg.horizon);
        values.push([pose.x, pose.y, pose.s, pose.c]);
    }

    let init_channel = |idx: usize| -> Result<LaplaceChannel> {
        let ys: Vec<f64> = values.iter().map(|v| v[idx]).collect();
        let fit = polyfit_channel(&us, &ys, cfg.degree_mu, 0.0)?;
        let mean_abs = us
            .iter()
            .zip(&ys)
            .map(|(&u, &y)| (y - poly_eval(&fit.coeffs, u)).abs())
            .sum::<f64>()
            / us.len() as f64;
        let mut log_b = vec![0.0; cfg.degree_b + 1];
        log_b[0] = mean_abs.max(B_FLOOR).ln();
        LaplaceChannel::new(fit.coeffs, log_b)
    };

    let heading = if label.has_heading() {
        Some((init_channel(2)?, init_channel(3)?))
    } else {
        None
    };
    let init = ProbPolyTraj::new(cfg.horizon, init_channel(0)?, init_channel(1)?, heading)?;

    let mut params = init.to_param_vec();
    let mut f = nll(&init, label, times)?;
    if !f.is_finite() {
        return Err(Error::NonFinite("initial NLL"));
    }
    let mut step = cfg.lr;
    for _ in 0..cfg.max_iters {
        let current = init.with_param_vec(&params)?;
        let grad = nll_grad(&current, label, times)?;
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite("NLL gradient"));
        }
        if grad.iter().all(|g| g.abs() < 1e-14) {
            break;
        }
        let mut accepted = None;
        let mut trial = step;
        for _ in 0..60 {
            let cand: Vec<f64> =
                params.iter().zip(&grad).map(|(p, g)| p - trial * g).collect();
            let cand_traj = init.with_param_vec(&cand)?;
            let fc = nll(&cand_traj, label, times)?;
            if fc.is_finite() && fc <= f {
                accepted = Some((cand, fc));
                break;
            }
            trial *= 0.5;
        }
        let Some((cand, fc)) = accepted else { break };
        let improvement = f - fc;
        params = cand;
        f = fc;
        step = (trial * 2.0).min(cfg.lr * 16.0);
        if improvement < cfg.tol {
            break;
        }
    }
    init.with_param_vec(&params)
}

/// Which scalar residual a reliability analysis projects out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualDimension {
    /// Centroid displacement projected onto the predicted heading.
    AlongTrack,
    /// Centroid displacement projected onto the predicted left-normal.
    CrossTrack,
    /// A raw channel residual with that channel's own scale.
    Channel(TrajChannel),
}

/// Empirical coverage of the predicted Laplace intervals at each nominal
/// probability level.
#[derive(Debug, Clone, PartialEq)]
pub struct ReliabilityCurve {
    pub nominal: Vec<f64>,
    pub empirical: Vec<f64>,
    /// Number of residuals aggregated.
    pub count: usize,
}

/// The default nominal grid: 19 levels from 0.05 to 0.95.
pub fn default_nominal_levels() -> Vec<f64> {
    (1..=19).map(|i| i as f64 / 20.0).collect()
}

/// Build a reliability curve from matched prediction/label pairs at the given
/// times.
///
/// For each nominal level `p`, the empirical value is the fraction of
/// residuals `r` with `|r| ≤ −b·ln(1−p)`, the half-width of the centered
/// `p`-mass interval of `Laplace(0, b)`. Projected dimensions combine the
/// per-axis scales as `b = |n_x|·b_x + |n_y|·b_y`, exact only for
/// axis-aligned headings.
pub fn reliability_curve(
    preds: &[ProbPolyTraj],
    labels: &[WaypointTrack],
    times: &[f64],
    dimension: ResidualDimension,
    nominal: &[f64],
) -> Result<ReliabilityCurve> {
    if preds.len() != labels.len() {
        return Err(Error::InvalidConfig("preds and labels differ in length".into()));
    }
    if nominal.is_empty() {
        return Err(Error::EmptyInput);
    }
    if nominal.iter().any(|&p| !(p > 0.0 && p < 1.0)) || nominal.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidConfig(
            "nominal levels must be strictly increasing within (0, 1)".into(),
        ));
    }

    let mut residuals: Vec<(f64, f64)> = Vec::new(); // (|r|, b)
    for (pred, label) in preds.iter().zip(labels) {
        for &t in times {
            let pose = label.pose_at_time(t).ok_or(Error::OutOfDomain {
                t,
                lo: label.start_time(),
                hi: label.end_time(),
            })?;
            let u = t / pred.horizon();
            let (mu_x, b_x) = pred.cx.params_at_u(u);
            let (mu_y, b_y) = pred.cy.params_at_u(u);
            let (r, b) = match dimension {
                ResidualDimension::Channel(TrajChannel::X) => (pose.x - mu_x, b_x),
                ResidualDimension::Channel(TrajChannel::Y) => (pose.y - mu_y, b_y),
                ResidualDimension::Channel(ch @ (TrajChannel::Sin | TrajChannel::Cos)) => {
                    if !label.has_heading() {
                        return Err(Error::HeadingUnavailable);
                    }
                    let channel = pred.channel(ch).ok_or(Error::HeadingUnavailable)?;
                    let (mu, b) = channel.params_at_u(u);
                    let v = if ch == TrajChannel::Sin { pose.s } else { pose.c };
                    (v - mu, b)
                }
                ResidualDimension::AlongTrack | ResidualDimension::CrossTrack => {
                    let (sc, cc) = pred.heading.as_ref().ok_or(Error::HeadingUnavailable)?;
                    let (s, c) =
                        normalize_heading(poly_eval(&sc.mu, u), poly_eval(&cc.mu, u))?;
                    // Heading vector (c, s); left normal (−s, c).
                    let n = if dimension == ResidualDimension::AlongTrack {
                        [c, s]
                    } else {
                        [-s, c]
                    };
                    let d = [pose.x - mu_x, pose.y - mu_y];
                    (d[0] * n[0] + d[1] * n[1], n[0].abs() * b_x + n[1].abs() * b_y)
                }
            };
            residuals.push((r.abs(), b));
        }
    }
    if residuals.is_empty() {
        return Err(Error::EmptyInput);
    }

    let count = residuals.len();
    let empirical = nominal
        .iter()
        .map(|&p| {
            let covered = residuals
                .iter()
                .filter(|(r_abs, b)| *r_abs <= -b * (1.0 - p).ln())
                .count();
            covered as f64 / count as f64
        })
        .collect();
    Ok(ReliabilityCurve { nominal: nominal.to_vec(), empirical, count })
}

/// Draw from `Laplace(mu, b)` by inverse-CDF sampling.
pub fn sample_laplace<R: Rng + ?Sized>(rng: &mut R, mu: f64, b: f64) -> f64 {
    let u: f64 = loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            break u;
        }
    };
    let centered = u - 0.5;
    mu - b * centered.signum() * (1.0 - 2.0 * centered.abs()).ln()
}
