//! Simulators for the four linear consensus systems:
//!
//! * noiseless, `dX/dt = -L X`
//! * constant delay, `dX/dt = -L X(t - ε)` with constant history `x0`
//! * first-order noisy, `dX = -L X dt + dW`
//! * second-order noisy, `dX = Y dt`, `dY = -L (X + Y) dt + dW`
//!
//! Deterministic systems use explicit Euler (or classical RK4 for the
//! noiseless case); noisy systems use Euler–Maruyama with unit-intensity
//! Brownian increments per agent.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::graph::Graph;
use crate::numeric::{csum, fmt17, Sig17};
use crate::spectral::{numeric_spectrum, DENSE_LIMIT};
use crate::{Error, Result};

/// Disagreement below which a deterministic run counts as converged.
pub const CONVERGENCE_TOL: f64 = 1e-8;
/// Growth of disagreement (relative to the initial value) that flags divergence.
pub const DIVERGENCE_FACTOR: f64 = 1e6;
/// Minimum number of history slots a delay must span.
pub const MIN_DELAY_SLOTS: usize = 20;
pub const MAX_TRIALS: usize = 1_000_000;
/// Transients must decay below this factor before statistics are collected.
pub const BURN_IN_DECAY: f64 = 1e-3;

const RK4_REAL_AXIS_LIMIT: f64 = 2.785;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Noiseless,
    Delay,
    Noise1,
    Noise2,
}

impl Protocol {
    pub fn name(self) -> &'static str {
        match self {
            Protocol::Noiseless => "noiseless",
            Protocol::Delay => "delay",
            Protocol::Noise1 => "noise1",
            Protocol::Noise2 => "noise2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Integrator {
    #[default]
    Euler,
    Rk4,
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub dt: f64,
    pub steps: usize,
    /// Steps discarded before statistics are accumulated.
    pub burn_in: usize,
    pub trials: usize,
    pub seed: u64,
    /// Communication delay ε (delay protocol only).
    pub delay: f64,
    /// Record every `sample_every`-th state in the trace (the last state is
    /// always recorded).
    pub sample_every: usize,
    pub integrator: Integrator,
}

impl SimConfig {
    pub fn new(dt: f64, steps: usize) -> Self {
        Self {
            dt,
            steps,
            burn_in: 0,
            trials: 1,
            seed: 0,
            delay: 0.0,
            sample_every: (steps / 1000).max(1),
            integrator: Integrator::Euler,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if self.steps == 0 {
            return bad("steps must be positive".into());
        }
        if self.burn_in >= self.steps {
            return bad(format!(
                "burn_in {} must be below steps {}",
                self.burn_in, self.steps
            ));
        }
        if self.trials == 0 {
            return bad("trials must be >= 1".into());
        }
        if !(self.delay.is_finite() && self.delay >= 0.0) {
            return bad(format!("delay must be >= 0, got {}", self.delay));
        }
        if self.sample_every == 0 {
            return bad("sample_every must be >= 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationTrace {
    pub protocol: Protocol,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// `Y(t)` samples for the second-order system.
    pub velocities: Option<Vec<Vec<f64>>>,
    /// `max_i |x_i - x̄|` per sample.
    pub disagreement: Vec<f64>,
    /// Time average after burn-in of `(1/n) Σ (x_i - x̄)^2`.
    pub variance_estimate: f64,
    pub converged: bool,
    pub diverged: bool,
    /// First time the disagreement fell below [`CONVERGENCE_TOL`].
    pub converged_at: Option<f64>,
    /// Largest `|mean(x(t)) - mean(x0)|` seen at any step.
    pub max_mean_drift: f64,
    pub steps_run: usize,
    pub seed_used: u64,
}

impl SimulationTrace {
    pub fn final_disagreement(&self) -> f64 {
        *self.disagreement.last().unwrap_or(&f64::NAN)
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().map(Vec::as_slice).unwrap_or(&[])
    }

    /// CSV with header `t,x_0,...,x_{n-1},disagreement`.
    pub fn to_csv(&self) -> String {
        let n = self.states.first().map_or(0, Vec::len);
        let mut s = String::from("t");
        for i in 0..n {
            let _ = write!(s, ",x_{i}");
        }
        s.push_str(",disagreement\n");
        for ((t, x), d) in self.times.iter().zip(&self.states).zip(&self.disagreement) {
            s.push_str(&fmt17(*t));
            for v in x {
                s.push(',');
                s.push_str(&fmt17(*v));
            }
            s.push(',');
            s.push_str(&fmt17(*d));
            s.push('\n');
        }
        s
    }
}

fn mean(x: &[f64]) -> f64 {
    csum(x.iter().copied()) / x.len() as f64
}

fn disagreement(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().fold(0.0f64, |a, v| a.max((v - m).abs()))
}

fn deviation_variance(x: &[f64]) -> f64 {
    let m = mean(x);
    csum(x.iter().map(|v| (v - m) * (v - m))) / x.len() as f64
}

/// `(λ2, λ_N)` from the dense oracle; for graphs over the dense limit λ2 is
/// unavailable and λ_N falls back to the Gershgorin bound `2Δ`.
pub fn laplacian_extremes(g: &Graph) -> Result<(Option<f64>, f64)> {
    if g.n() < 2 {
        return Err(Error::InvalidParameter("need at least two agents".into()));
    }
    if g.n() > DENSE_LIMIT {
        let max_deg = g.degrees().into_iter().max().unwrap_or(0);
        return Ok((None, 2.0 * max_deg as f64));
    }
    let spec = numeric_spectrum(g)?;
    let l2 = spec.nonzero().next().map(|p| p.lambda);
    Ok((l2, spec.pairs.last().expect("non-empty").lambda))
}

/// `0.1 / λ_N`.
pub fn default_dt(g: &Graph) -> Result<f64> {
    Ok(0.1 / laplacian_extremes(g)?.1)
}

/// Steps covering `20 / λ2` time units at step `dt`.
pub fn default_burn_in(g: &Graph, dt: f64) -> Result<usize> {
    let l2 = laplacian_extremes(g)?.0.ok_or(Error::BudgetExceeded {
        what: "dense matrix order",
        size: g.n(),
        budget: DENSE_LIMIT,
    })?;
    Ok((20.0 / l2 / dt).ceil() as usize)
}

fn check_euler_stability(dt: f64, lambda_n: f64, limit: f64) -> Result<()> {
    if dt * lambda_n >= limit {
        return Err(Error::Unstable(format!(
            "dt·λ_N = {} must stay below {limit}",
            dt * lambda_n
        )));
    }
    Ok(())
}

struct Recorder {
    every: usize,
    times: Vec<f64>,
    states: Vec<Vec<f64>>,
    velocities: Option<Vec<Vec<f64>>>,
    disagreement: Vec<f64>,
}

impl Recorder {
    fn new(every: usize, with_velocity: bool) -> Self {
        Self {
            every,
            times: Vec::new(),
            states: Vec::new(),
            velocities: with_velocity.then(Vec::new),
            disagreement: Vec::new(),
        }
    }

    fn record(&mut self, step: usize, last: bool, dt: f64, x: &[f64], y: Option<&[f64]>) {
        if step.is_multiple_of(self.every) || last {
            self.times.push(step as f64 * dt);
            self.states.push(x.to_vec());
            if let (Some(v), Some(y)) = (self.velocities.as_mut(), y) {
                v.push(y.to_vec());
            }
            self.disagreement.push(disagreement(x));
        }
    }
}

/// Integrates `dX/dt = -L X` from `x0`.
pub fn simulate_noiseless(g: &Graph, x0: &[f64], cfg: &SimConfig) -> Result<SimulationTrace> {
    cfg.validate()?;
    check_state(g, x0)?;
    let (_, lambda_n) = laplacian_extremes(g)?;
    let limit = match cfg.integrator {
        Integrator::Euler => 2.0,
        Integrator::Rk4 => RK4_REAL_AXIS_LIMIT,
    };
    check_euler_stability(cfg.dt, lambda_n, limit)?;

    let n = g.n();
    let dt = cfg.dt;
    let mean0 = mean(x0);
    let mut x = x0.to_vec();
    let mut rec = Recorder::new(cfg.sample_every, false);
    rec.record(0, false, dt, &x, None);
    let mut ks = vec![vec![0.0; n]; 4];
    let mut tmp = vec![0.0; n];
    let mut max_drift = 0.0f64;
    let mut converged_at = (disagreement(&x) < CONVERGENCE_TOL).then_some(0.0);
    let mut var_acc = Vec::with_capacity(cfg.steps - cfg.burn_in);
    for step in 1..=cfg.steps {
        match cfg.integrator {
            Integrator::Euler => {
                g.laplacian_apply(&x, &mut ks[0]);
                x.iter_mut().zip(&ks[0]).for_each(|(xi, k)| *xi -= dt * k);
            }
            Integrator::Rk4 => {
                let coeffs = [0.0, 0.5, 0.5, 1.0];
                for s in 0..4 {
                    if s == 0 {
                        tmp.copy_from_slice(&x);
                    } else {
                        for i in 0..n {
                            tmp[i] = x[i] - coeffs[s] * dt * ks[s - 1][i];
                        }
                    }
                    g.laplacian_apply(&tmp, &mut ks[s]);
                }
                for i in 0..n {
                    x[i] -= dt / 6.0 * (ks[0][i] + 2.0 * ks[1][i] + 2.0 * ks[2][i] + ks[3][i]);
                }
            }
        }
        max_drift = max_drift.max((mean(&x) - mean0).abs());
        if step > cfg.burn_in {
            var_acc.push(deviation_variance(&x));
        }
        if converged_at.is_none() && disagreement(&x) < CONVERGENCE_TOL {
            converged_at = Some(step as f64 * dt);
        }
        rec.record(step, step == cfg.steps, dt, &x, None);
    }
    let final_dis = disagreement(&x);
    Ok(SimulationTrace {
        protocol: Protocol::Noiseless,
        times: rec.times,
        states: rec.states,
        velocities: None,
        disagreement: rec.disagreement,
        variance_estimate: csum(var_acc.iter().copied()) / var_acc.len().max(1) as f64,
        converged: final_dis < CONVERGENCE_TOL,
        diverged: false,
        converged_at,
        max_mean_drift: max_drift,
        steps_run: cfg.steps,
        seed_used: cfg.seed,
    })
}

fn check_state(g: &Graph, x0: &[f64]) -> Result<()> {
    if x0.len() != g.n() {
        return Err(Error::SizeMismatch(format!(
            "initial state has {} entries for {} agents",
            x0.len(),
            g.n()
        )));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(
            "initial state must be finite".into(),
        ));
    }
    Ok(())
}

/// Number of grid steps spanned by `cfg.delay`, checking alignment and the
/// minimum buffer length.
pub fn delay_slots(cfg: &SimConfig) -> Result<usize> {
    if cfg.delay <= 0.0 {
        return Err(Error::InvalidParameter("delay must be positive".into()));
    }
    let ratio = cfg.delay / cfg.dt;
    let k = ratio.round();
    if (ratio - k).abs() > 1e-9 * ratio.max(1.0) {
        return Err(Error::InvalidParameter(format!(
            "delay {} is not a multiple of dt {}",
            cfg.delay, cfg.dt
        )));
    }
    let k = k as usize;
    if k < MIN_DELAY_SLOTS {
        return Err(Error::InvalidParameter(format!(
            "delay spans {k} steps; at least {MIN_DELAY_SLOTS} are required"
        )));
    }
    Ok(k)
}

/// Integrates `dX/dt = -L X(t - ε)` with `X(t) = x0` for `t <= 0`.
///
/// Stops early once the disagreement exceeds [`DIVERGENCE_FACTOR`] times its
/// initial value.
pub fn simulate_delay(g: &Graph, x0: &[f64], cfg: &SimConfig) -> Result<SimulationTrace> {
    cfg.validate()?;
    check_state(g, x0)?;
    let k = delay_slots(cfg)?;
    let (_, lambda_n) = laplacian_extremes(g)?;
    check_euler_stability(cfg.dt, lambda_n, 2.0)?;
    let d0 = disagreement(x0);
    if d0 == 0.0 {
        return Err(Error::InvalidParameter(
            "initial state is already in consensus".into(),
        ));
    }

    let n = g.n();
    let dt = cfg.dt;
    let mean0 = mean(x0);
    // slot m % k holds X_m; before step m >= k it still holds x0
    let mut history = vec![x0.to_vec(); k];
    let mut x = x0.to_vec();
    let mut lx = vec![0.0; n];
    let mut rec = Recorder::new(cfg.sample_every, false);
    rec.record(0, false, dt, &x, None);
    let mut max_drift = 0.0f64;
    let mut converged_at = None;
    let mut diverged = false;
    let mut var_acc = Vec::new();
    let mut steps_run = 0;
    for step in 0..cfg.steps {
        let slot = step % k;
        g.laplacian_apply(&history[slot], &mut lx);
        history[slot].copy_from_slice(&x);
        x.iter_mut().zip(&lx).for_each(|(xi, l)| *xi -= dt * l);
        steps_run = step + 1;
        max_drift = max_drift.max((mean(&x) - mean0).abs());
        let dis = disagreement(&x);
        if steps_run > cfg.burn_in {
            var_acc.push(deviation_variance(&x));
        }
        if converged_at.is_none() && dis < CONVERGENCE_TOL {
            converged_at = Some(steps_run as f64 * dt);
        }
        if !dis.is_finite() || dis > DIVERGENCE_FACTOR * d0 {
            diverged = true;
        }
        rec.record(steps_run, diverged || steps_run == cfg.steps, dt, &x, None);
        if diverged {
            break;
        }
    }
    let final_dis = disagreement(&x);
    Ok(SimulationTrace {
        protocol: Protocol::Delay,
        times: rec.times,
        states: rec.states,
        velocities: None,
        disagreement: rec.disagreement,
        variance_estimate: csum(var_acc.iter().copied()) / var_acc.len().max(1) as f64,
        converged: !diverged && final_dis < CONVERGENCE_TOL,
        diverged,
        converged_at,
        max_mean_drift: max_drift,
        steps_run,
        seed_used: cfg.seed,
    })
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the RNG stream for one trial; depends only on `(seed, trial)`.
pub fn trial_seed(seed: u64, trial: usize) -> u64 {
    splitmix64(seed ^ splitmix64(trial as u64))
}

/// Uniform `[0, 1)` initial state derived from `seed`.
pub fn random_initial_state(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, usize::MAX));
    (0..n).map(|_| rng.random::<f64>()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseOrder {
    First,
    Second,
}

#[derive(Debug, Clone, Serialize)]
pub struct NoiseEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub trials: usize,
    pub per_trial: Vec<f64>,
}

/// Slowest decay rate and step stability for the noisy system of the given
/// order, from the nonzero Laplacian eigenvalues.
fn noisy_preconditions(g: &Graph, cfg: &SimConfig, order: NoiseOrder) -> Result<()> {
    cfg.validate()?;
    if cfg.trials < 2 || cfg.trials > MAX_TRIALS {
        return Err(Error::InvalidParameter(format!(
            "trials must lie in [2, {MAX_TRIALS}], got {}",
            cfg.trials
        )));
    }
    if g.n() > DENSE_LIMIT {
        return Err(Error::BudgetExceeded {
            what: "dense matrix order",
            size: g.n(),
            budget: DENSE_LIMIT,
        });
    }
    let spec = numeric_spectrum(g)?;
    let lambdas: Vec<f64> = spec.nonzero().map(|p| p.lambda).collect();
    let (slowest, unstable) = match order {
        NoiseOrder::First => {
            let ln = *lambdas.last().expect("connected graph with n >= 2");
            (lambdas[0], (cfg.dt * ln >= 2.0).then_some(ln))
        }
        NoiseOrder::Second => {
            // modes of [[0, 1], [-λ, -λ]]: s^2 + λ s + λ = 0
            let mut slowest = f64::INFINITY;
            let mut unstable = None;
            for &l in &lambdas {
                let disc = l * l - 4.0 * l;
                let roots: [(f64, f64); 2] = if disc >= 0.0 {
                    let sq = disc.sqrt();
                    [((-l + sq) / 2.0, 0.0), ((-l - sq) / 2.0, 0.0)]
                } else {
                    let im = (-disc).sqrt() / 2.0;
                    [(-l / 2.0, im), (-l / 2.0, -im)]
                };
                for (re, im) in roots {
                    let amp = ((1.0 + cfg.dt * re).powi(2) + (cfg.dt * im).powi(2)).sqrt();
                    if amp >= 1.0 {
                        unstable = Some(l);
                    }
                    slowest = slowest.min(-re);
                }
            }
            (slowest, unstable)
        }
    };
    if let Some(l) = unstable {
        return Err(Error::Unstable(format!(
            "dt = {} is unstable for eigenvalue {l}",
            cfg.dt
        )));
    }
    let decay = (-slowest * cfg.burn_in as f64 * cfg.dt).exp();
    if decay >= BURN_IN_DECAY {
        return Err(Error::InvalidParameter(format!(
            "burn-in of {} steps leaves transient factor {decay:.3e} (needs < {BURN_IN_DECAY})",
            cfg.burn_in
        )));
    }
    Ok(())
}

/// One Euler–Maruyama realisation; returns the post-burn-in time average of
/// the deviation variance.
fn noisy_trial(
    g: &Graph,
    cfg: &SimConfig,
    order: NoiseOrder,
    trial: usize,
    mut rec: Option<&mut Recorder>,
) -> f64 {
    let n = g.n();
    let dt = cfg.dt;
    let sq = dt.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(cfg.seed, trial));
    let mut x = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut work = vec![0.0; n];
    let mut pos = vec![0.0; n];
    let mut samples = 0usize;
    let mut comp = crate::numeric::CompensatedSum::new();
    if let Some(r) = rec.as_deref_mut() {
        r.record(
            0,
            false,
            dt,
            &x,
            (order == NoiseOrder::Second).then_some(&y[..]),
        );
    }
    for step in 1..=cfg.steps {
        match order {
            NoiseOrder::First => {
                g.laplacian_apply(&x, &mut work);
                for i in 0..n {
                    let xi: f64 = rng.sample(StandardNormal);
                    x[i] += -dt * work[i] + sq * xi;
                }
                let m = mean(&x);
                x.iter_mut().for_each(|v| *v -= m);
            }
            NoiseOrder::Second => {
                for i in 0..n {
                    pos[i] = x[i] + y[i];
                }
                g.laplacian_apply(&pos, &mut work);
                for i in 0..n {
                    x[i] += dt * y[i];
                    let xi: f64 = rng.sample(StandardNormal);
                    y[i] += -dt * work[i] + sq * xi;
                }
                let mx = mean(&x);
                let my = mean(&y);
                x.iter_mut().for_each(|v| *v -= mx);
                y.iter_mut().for_each(|v| *v -= my);
            }
        }
        if step > cfg.burn_in {
            comp.add(deviation_variance(&x));
            samples += 1;
        }
        if let Some(r) = rec.as_deref_mut() {
            r.record(
                step,
                step == cfg.steps,
                dt,
                &x,
                (order == NoiseOrder::Second).then_some(&y[..]),
            );
        }
    }
    comp.value() / samples as f64
}

fn estimate(g: &Graph, cfg: &SimConfig, order: NoiseOrder) -> Result<NoiseEstimate> {
    noisy_preconditions(g, cfg, order)?;
    let per_trial: Vec<f64> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| noisy_trial(g, cfg, order, t, None))
        .collect();
    let t = per_trial.len() as f64;
    let m = csum(per_trial.iter().copied()) / t;
    let var = csum(per_trial.iter().map(|v| (v - m) * (v - m))) / (t - 1.0);
    Ok(NoiseEstimate {
        estimate: m,
        stderr: (var / t).sqrt(),
        trials: cfg.trials,
        per_trial,
    })
}

/// Monte Carlo estimate of first-order coherence.
pub fn estimate_h1(g: &Graph, cfg: &SimConfig) -> Result<NoiseEstimate> {
    estimate(g, cfg, NoiseOrder::First)
}

/// Monte Carlo estimate of second-order coherence.
pub fn estimate_h2(g: &Graph, cfg: &SimConfig) -> Result<NoiseEstimate> {
    estimate(g, cfg, NoiseOrder::Second)
}

/// Full trajectory of a single noisy realisation (trial `trial`).
pub fn simulate_noisy(
    g: &Graph,
    cfg: &SimConfig,
    order: NoiseOrder,
    trial: usize,
) -> Result<SimulationTrace> {
    noisy_preconditions(
        g,
        &SimConfig {
            trials: cfg.trials.max(2),
            ..cfg.clone()
        },
        order,
    )?;
    let mut rec = Recorder::new(cfg.sample_every, order == NoiseOrder::Second);
    let v = noisy_trial(g, cfg, order, trial, Some(&mut rec));
    Ok(SimulationTrace {
        protocol: match order {
            NoiseOrder::First => Protocol::Noise1,
            NoiseOrder::Second => Protocol::Noise2,
        },
        times: rec.times,
        states: rec.states,
        velocities: rec.velocities,
        disagreement: rec.disagreement,
        variance_estimate: v,
        converged: false,
        diverged: false,
        converged_at: None,
        max_mean_drift: 0.0,
        steps_run: cfg.steps,
        seed_used: cfg.seed,
    })
}

/// `|est - target| <= max(3·stderr, rel_tol·|target|)`.
pub fn within_tolerance(est: &NoiseEstimate, target: f64, rel_tol: f64) -> bool {
    (est.estimate - target).abs() <= (3.0 * est.stderr).max(rel_tol * target.abs())
}

/// Machine-readable run summary.
#[derive(Debug, Clone, Serialize)]
pub struct SimulationSummary {
    pub protocol: Protocol,
    pub n: usize,
    pub dt: Sig17,
    pub steps: usize,
    pub trials: usize,
    pub seed: u64,
    pub estimate: Sig17,
    pub stderr: Sig17,
    pub target: Sig17,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<Sig17>,
    pub converged: bool,
    pub diverged: bool,
    pub noise: &'static str,
}
