//! Melonic bounds and the empirical `N`-scaling probe.

use super::{amplitude_bruteforce, amplitude_facesum, amplitude_transfer, AmplitudeValue, EvalOptions, FaceSumOptions};
use crate::error::{Error, Result};
use crate::graph::ExpansionGraph;
use crate::melonic::is_melonic;
use crate::scalar::{modes_n, Real};
use crate::stranded::degree;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundCheck<T> {
    pub value: T,
    pub tail: T,
    pub lower_bound: T,
    pub upper_bound: T,
    pub crude_bound: T,
    pub lower: bool,
    pub upper: bool,
    pub crude: bool,
}

impl<T> BoundCheck<T> {
    pub fn all(&self) -> bool {
        self.lower && self.upper && self.crude
    }
}

/// `N^{-n} (sum_S (S+1)^2 p^{S/n})^{n/2}`.
pub fn crude_bound<T: Real>(n: usize, p: T) -> T {
    if n == 0 {
        return T::one();
    }
    let x = p.powf(T::one() / T::of_usize(n));
    let s = (T::one() + x) / (T::one() - x).powi(3);
    modes_n(p).powi(-(n as i32)) * s.powf(T::of_usize(n) / T::of(2.0))
}

/// Evaluate a melonic amplitude exactly where cheap: the sweep up to order two,
/// the transfer recursion beyond.
fn melonic_value<T: Real>(g: &ExpansionGraph, r: usize, p: T) -> Result<AmplitudeValue<T>> {
    if g.n() <= 2 {
        amplitude_bruteforce(g, r, p, &EvalOptions::default())
    } else {
        amplitude_transfer(g, r, p, &EvalOptions::default())
    }
}

/// `(2n+1)^{-n} p^{(2n+1) r} <= A_r <= 4^n p^{r/2}` and the crude bound.
pub fn check_melonic_bounds<T: Real>(g: &ExpansionGraph, r: usize, p: T) -> Result<BoundCheck<T>> {
    if !is_melonic(g) {
        return Err(Error::Domain(format!("{} is not melonic", g.canonical_key())));
    }
    let a = melonic_value(g, r, p)?;
    if !a.converged {
        return Err(Error::Convergence(format!("amplitude at cutoff {}", a.cutoff)));
    }
    let n = g.n();
    let nn = T::of_usize(2 * n + 1);
    let lower_bound = nn.powi(-(n as i32)) * p.powi(((2 * n + 1) * r) as i32);
    let upper_bound = T::of(4.0).powi(n as i32) * p.powf(T::of_usize(r) / T::of(2.0));
    let crude_bound = crude_bound(n, p);
    let (v, t) = (a.value, a.tail);
    Ok(BoundCheck {
        value: v,
        tail: t,
        lower_bound,
        upper_bound,
        crude_bound,
        lower: v + t >= lower_bound,
        upper: v - t <= upper_bound,
        crude: v - t <= crude_bound,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingFit {
    /// Least-squares slope of `ln A` against `ln N`.
    pub slope: f64,
    pub intercept: f64,
    pub degree: usize,
    /// `(ln N, ln A)` samples.
    pub points: Vec<(f64, f64)>,
}

/// Fit `ln A_r` against `ln N` over `grid`, with `N = 1/(1-p)`.
pub fn empirical_scaling_exponent(g: &ExpansionGraph, r: usize, grid: &[f64]) -> Result<ScalingFit> {
    if grid.len() < 2 {
        return Err(Error::Domain("need at least two grid points".into()));
    }
    let melonic = is_melonic(g);
    let eval = EvalOptions {
        tol: 1e-7,
        cutoff: None,
        max_cutoff: 1 << 14,
    };
    let mut points = Vec::with_capacity(grid.len());
    for &p in grid {
        let a = if melonic {
            amplitude_transfer(g, r, p, &eval)?
        } else {
            amplitude_facesum(g, r, p, &eval, &FaceSumOptions::default())?
        };
        if !a.converged || a.value <= 0.0 {
            return Err(Error::Convergence(format!("amplitude at p={p}: {a:?}")));
        }
        points.push((modes_n(p).ln(), a.value.ln()));
    }
    let m = points.len() as f64;
    let mx = points.iter().map(|q| q.0).sum::<f64>() / m;
    let my = points.iter().map(|q| q.1).sum::<f64>() / m;
    let sxy: f64 = points.iter().map(|q| (q.0 - mx) * (q.1 - my)).sum();
    let sxx: f64 = points.iter().map(|q| (q.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    Ok(ScalingFit {
        slope,
        intercept: my - slope * mx,
        degree: degree(g)?,
        points,
    })
}
