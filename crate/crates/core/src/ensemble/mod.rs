//! Monte Carlo ensembles of the truncated flow.
//!
//! Each member draws its couplings and initial data from its own ChaCha8
//! stream, so any member can be replayed alone. With `antithetic` set, a
//! member is the pair `(C, -C)` on the same initial data; flipping `C`
//! reverses time, so odd powers of `t` cancel within the pair.

mod couplings;
mod integrate;

pub use couplings::{member_rng, sample_couplings, sample_couplings_with, sample_initial, sample_initial_with, CouplingSample, ModeState};
pub use integrate::{Flow, Method};

use crate::error::{Error, Result};
use crate::scalar::Real;
use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

/// `S_gamma = sum_r r^gamma |alpha_r|^2`, with `0^0 = 1`.
pub fn sobolev_norm<T: Real>(a: &[Complex<T>], gamma: T) -> T {
    a.iter()
        .enumerate()
        .map(|(r, z)| {
            let w = if r == 0 { if gamma == T::zero() { T::one() } else { T::zero() } } else { T::of_usize(r).powf(gamma) };
            w * z.norm_sqr()
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Invariants<T> {
    pub s0: T,
    pub s1: T,
    pub h: T,
}

impl<T: Real> Invariants<T> {
    pub fn of(flow: &Flow<'_, T>, a: &[Complex<T>]) -> Self {
        Self {
            s0: sobolev_norm(a, T::zero()),
            s1: sobolev_norm(a, T::one()),
            h: flow.hamiltonian(a),
        }
    }

    pub fn drift(&self, other: &Self) -> T {
        (self.s0 - other.s0).abs().max((self.s1 - other.s1).abs()).max((self.h - other.h).abs())
    }
}

/// States at every `record_every`-th step, including `t = 0`.
#[derive(Debug, Clone)]
pub struct Trajectory<T> {
    pub states: Vec<ModeState<T>>,
    /// Largest change of `S_0`, `S_1` or `H` over the recorded states.
    pub drift: T,
}

pub fn integrate<T: Real>(
    state: &ModeState<T>,
    c: &CouplingSample<T>,
    t_end: T,
    dt: T,
    method: Method,
    record_every: usize,
    drift_limit: Option<T>,
) -> Result<Trajectory<T>> {
    if !(dt > T::zero()) || t_end < T::zero() {
        return Err(Error::Domain(format!("need dt > 0 and T >= 0, got dt={dt} T={t_end}")));
    }
    let steps = (t_end / dt).round().to_usize().unwrap_or(0);
    let slack = T::of(1e-9).max(T::of(4.0) * T::epsilon() * T::of_usize(steps.max(1)));
    if ((T::of_usize(steps) * dt) - t_end).abs() > slack * t_end.max(T::one()) {
        return Err(Error::Domain(format!("T={t_end} is not a multiple of dt={dt}")));
    }
    let record_every = record_every.max(1);
    let mut flow = Flow::new(c, state.alpha.len())?;
    let mut y = state.alpha.clone();
    let inv0 = Invariants::of(&flow, &y);
    let mut states = vec![state.clone()];
    let mut drift = T::zero();
    for i in 1..=steps {
        flow.step(&mut y, dt, method);
        if i % record_every == 0 || i == steps {
            let d = Invariants::of(&flow, &y).drift(&inv0);
            drift = drift.max(d);
            if let Some(lim) = drift_limit {
                if !(d <= lim) {
                    return Err(Error::Convergence(format!(
                        "invariant drift {:e} exceeds {:e} at step {i} (dt={dt}, |alpha|^2={})",
                        d.as_f64(),
                        lim.as_f64(),
                        inv0.s0
                    )));
                }
            }
            states.push(ModeState { alpha: y.clone(), t: T::of_usize(i) * dt, p: state.p });
        }
    }
    Ok(Trajectory { states, drift })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig {
    pub p: f64,
    pub j_max: usize,
    /// Trajectories; with `antithetic` they form `samples / 2` pairs.
    pub samples: usize,
    pub t_end: f64,
    pub dt: f64,
    pub gammas: Vec<f64>,
    pub seed: u64,
    pub method: Method,
    pub record_every: usize,
    pub antithetic: bool,
    pub drift_limit: f64,
    /// Quadratic fits use recorded times up to this value.
    pub fit_window: f64,
}

impl EnsembleConfig {
    pub fn new(p: f64, seed: u64) -> Self {
        Self {
            p,
            j_max: 16,
            samples: 4000,
            t_end: 0.1,
            dt: 1e-3,
            gammas: vec![0.0, 1.0, 2.0, 3.0],
            seed,
            method: Method::Rk4,
            record_every: 25,
            antithetic: true,
            drift_limit: 1e-8,
            fit_window: 0.1,
        }
    }
}

/// Coefficients of `y = c0 + c1 t + c2 t^2` fitted to `<S_gamma(t)> - <S_gamma(0)>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadFit {
    pub gamma: f64,
    pub c1: f64,
    pub c1_err: f64,
    pub c2: f64,
    pub c2_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleTable {
    pub times: Vec<f64>,
    pub gammas: Vec<f64>,
    /// `mean[g][t]`.
    pub mean: Vec<Vec<f64>>,
    pub stderr: Vec<Vec<f64>>,
    pub fits: Vec<QuadFit>,
    /// Largest invariant drift over all trajectories.
    pub max_drift: f64,
    /// Independent units averaged (pairs when antithetic).
    pub units: usize,
}

/// Leave-one-out jackknife of the mean: `(mean, standard error)`.
pub fn jackknife_mean(x: &[f64]) -> (f64, f64) {
    let n = x.len();
    let total: f64 = x.iter().sum();
    let mean = total / n as f64;
    if n < 2 {
        return (mean, f64::NAN);
    }
    let loo: Vec<f64> = x.iter().map(|&v| (total - v) / (n - 1) as f64).collect();
    let lbar = loo.iter().sum::<f64>() / n as f64;
    let var = (n - 1) as f64 / n as f64 * loo.iter().map(|&v| (v - lbar).powi(2)).sum::<f64>();
    (mean, var.sqrt())
}

/// Rows of the least-squares operator mapping samples at `ts` to `(c0, c1, c2)`.
fn quadratic_weights(ts: &[f64]) -> Result<[Vec<f64>; 3]> {
    let mut m = [[0.0; 3]; 3];
    for &t in ts {
        let b = [1.0, t, t * t];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += b[i] * b[j];
            }
        }
    }
    // invert the 3x3 normal matrix
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if det.abs() < 1e-300 {
        return Err(Error::Domain(format!("quadratic fit needs three distinct times, got {ts:?}")));
    }
    let mut inv = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (a, b) = ((j + 1) % 3, (j + 2) % 3);
            let (c, d) = ((i + 1) % 3, (i + 2) % 3);
            inv[i][j] = (m[a][c] * m[b][d] - m[a][d] * m[b][c]) / det;
        }
    }
    let row = |i: usize| ts.iter().map(|&t| inv[i][0] + inv[i][1] * t + inv[i][2] * t * t).collect();
    Ok([row(0), row(1), row(2)])
}

/// Per-unit `S_gamma` curves: `curves[g][t]`, plus the unit's drift.
fn run_unit(cfg: &EnsembleConfig, unit: usize) -> Result<(Vec<Vec<f64>>, f64)> {
    let mut rng = member_rng(cfg.seed, unit as u64);
    let c = sample_couplings_with::<f64, _>(2 * cfg.j_max.saturating_sub(1), &mut rng);
    let init = sample_initial_with(cfg.p, cfg.j_max, &mut rng);
    let mut runs = vec![integrate(&init, &c, cfg.t_end, cfg.dt, cfg.method, cfg.record_every, Some(cfg.drift_limit))?];
    if cfg.antithetic {
        runs.push(integrate(&init, &c.negated(), cfg.t_end, cfg.dt, cfg.method, cfg.record_every, Some(cfg.drift_limit))?);
    }
    let k = runs.len() as f64;
    let curves = cfg
        .gammas
        .iter()
        .map(|&g| {
            (0..runs[0].states.len())
                .map(|i| runs.iter().map(|tr| sobolev_norm(&tr.states[i].alpha, g)).sum::<f64>() / k)
                .collect()
        })
        .collect();
    Ok((curves, runs.iter().map(|r| r.drift).fold(0.0, f64::max)))
}

pub fn ensemble_sobolev(cfg: &EnsembleConfig) -> Result<EnsembleTable> {
    if cfg.samples == 0 || !(cfg.p > 0.0 && cfg.p < 1.0) {
        return Err(Error::Domain(format!("need samples >= 1 and p in (0, 1), got {} and {}", cfg.samples, cfg.p)));
    }
    let units = if cfg.antithetic { (cfg.samples / 2).max(1) } else { cfg.samples };
    let results: Vec<(Vec<Vec<f64>>, f64)> = (0..units).into_par_iter().map(|u| run_unit(cfg, u)).collect::<Result<_>>()?;
    let steps = (cfg.t_end / cfg.dt).round() as usize;
    let re = cfg.record_every.max(1);
    let mut times: Vec<f64> = (0..=steps).step_by(re).map(|i| i as f64 * cfg.dt).collect();
    if steps % re != 0 {
        times.push(steps as f64 * cfg.dt);
    }
    let fit_idx: Vec<usize> = (0..times.len()).filter(|&i| times[i] <= cfg.fit_window * (1.0 + 1e-12)).collect();
    let fit_t: Vec<f64> = fit_idx.iter().map(|&i| times[i]).collect();
    let w = if fit_t.len() >= 3 { Some(quadratic_weights(&fit_t)?) } else { None };
    let mut mean = Vec::new();
    let mut stderr = Vec::new();
    let mut fits = Vec::new();
    for (gi, &g) in cfg.gammas.iter().enumerate() {
        let (mut mrow, mut srow) = (Vec::new(), Vec::new());
        for ti in 0..times.len() {
            let col: Vec<f64> = results.iter().map(|r| r.0[gi][ti]).collect();
            let (m, s) = jackknife_mean(&col);
            mrow.push(m);
            srow.push(s);
        }
        mean.push(mrow);
        stderr.push(srow);
        if let Some(w) = &w {
            let coef = |row: &Vec<f64>| -> Vec<f64> {
                results
                    .iter()
                    .map(|r| fit_idx.iter().zip(row).map(|(&i, &wt)| wt * (r.0[gi][i] - r.0[gi][0])).sum())
                    .collect()
            };
            let (c1, c1_err) = jackknife_mean(&coef(&w[1]));
            let (c2, c2_err) = jackknife_mean(&coef(&w[2]));
            fits.push(QuadFit { gamma: g, c1, c1_err, c2, c2_err });
        }
    }
    Ok(EnsembleTable {
        times,
        gammas: cfg.gammas.clone(),
        mean,
        stderr,
        fits,
        max_drift: results.iter().map(|r| r.1).fold(0.0, f64::max),
        units,
    })
}
