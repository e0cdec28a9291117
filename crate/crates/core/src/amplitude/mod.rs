//! Averaged graph amplitudes `A_r(G)`.
//!
//! Three evaluators: a direct sweep over momentum assignments, a sum over
//! independent face momenta, and an exact transfer recursion for melonic
//! graphs. The first two cover every graph and check each other.

mod bounds;
mod brute;
mod chain;
mod facesum;
mod transfer;

pub use bounds::{check_melonic_bounds, crude_bound, empirical_scaling_exponent, BoundCheck, ScalingFit};
pub use brute::{amplitude_bruteforce, bruteforce_sum, BruteStats};
pub use chain::{chain_function, ChainTable};
pub use facesum::{amplitude_facesum, facesum_sum, FaceSumOptions};
pub use transfer::{amplitude_transfer, transfer_weights};

use crate::error::{Error, Result};
use crate::scalar::Real;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Brute,
    Face,
    Transfer,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AmplitudeValue<T> {
    pub value: T,
    /// Momentum cutoff of the accepted evaluation.
    pub cutoff: usize,
    /// Estimated truncation error: change under cutoff doubling plus a rounding floor.
    pub tail: T,
    pub method: Method,
    pub converged: bool,
    /// Rigorous but loose bound on the discarded tail, where available.
    pub analytic_tail: Option<T>,
}

/// Cutoff-doubling protocol parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    /// Relative tolerance on the change under doubling.
    pub tol: f64,
    /// Initial cutoff; `None` picks the order-dependent default.
    pub cutoff: Option<usize>,
    /// Hard ceiling for the cutoff.
    pub max_cutoff: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            cutoff: None,
            max_cutoff: 1 << 13,
        }
    }
}

impl EvalOptions {
    /// Looser defaults used at order four and above.
    pub fn for_order(n: usize) -> Self {
        if n <= 2 {
            Self::default()
        } else {
            Self {
                tol: 1e-6,
                cutoff: None,
                max_cutoff: 1 << 10,
            }
        }
    }

    pub fn initial_cutoff(&self, n: usize, r: usize) -> usize {
        self.cutoff.unwrap_or(if n <= 2 {
            (8 * (r + 1)).max(64)
        } else {
            (2 * (r + 1)).max(16)
        })
    }
}

/// Evaluate `f` at `L` and `2L`, doubling until the relative change drops
/// below `tol`. Returns the value at the larger cutoff.
pub(crate) fn doubling<T: Real>(
    start: usize,
    opts: &EvalOptions,
    method: Method,
    mut f: impl FnMut(usize) -> Result<T>,
) -> Result<AmplitudeValue<T>> {
    if start == 0 {
        return Err(Error::Domain("cutoff must be positive".into()));
    }
    let mut lam = start.min(opts.max_cutoff / 2).max(1);
    let mut lo = f(lam)?;
    loop {
        let hi = f(2 * lam)?;
        let delta = (hi - lo).abs();
        let floor = T::of(64.0) * T::epsilon() * hi.abs();
        let converged = delta <= T::of(opts.tol) * hi.abs().max(T::min_positive_value()) || delta <= floor;
        if converged || 4 * lam > opts.max_cutoff {
            return Ok(AmplitudeValue {
                value: hi,
                cutoff: 2 * lam,
                tail: delta + floor,
                method,
                converged,
                analytic_tail: None,
            });
        }
        lam *= 2;
        lo = hi;
    }
}

/// Table `p^e` for `e = 0..=max`.
pub(crate) fn powers<T: Real>(p: T, max: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(max + 1);
    let mut x = T::one();
    for _ in 0..=max {
        out.push(x);
        x *= p;
    }
    out
}

pub(crate) fn check_p<T: Real>(p: T) -> Result<()> {
    if p > T::zero() && p < T::one() {
        Ok(())
    } else {
        Err(Error::Domain(format!("p = {p} not in (0, 1)")))
    }
}
