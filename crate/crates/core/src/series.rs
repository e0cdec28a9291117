//! Sobolev-norm series coefficients `s_{gamma,n}(p)`, the order-two closed
//! forms and polylogarithms.

use crate::amplitude::{amplitude_facesum, transfer_weights, EvalOptions, FaceSumOptions};
use crate::error::{Error, Result};
use crate::graph::{ExpansionGraph, GraphFamily};
use crate::melonic::{is_melonic, melonic_count_bound, melonic_family};
use crate::scalar::{modes_n, pairwise_sum, Real};
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

/// Eulerian numbers `A(g, k)` for `k = 0..g`.
pub fn eulerian_row(g: usize) -> Vec<BigUint> {
    let mut row = vec![BigUint::from(1u32)];
    for m in 2..=g {
        let mut next = vec![BigUint::default(); m];
        for k in 0..m {
            let mut v = BigUint::default();
            if k < row.len() {
                v += BigUint::from(k + 1) * &row[k];
            }
            if k >= 1 && k - 1 < row.len() {
                v += BigUint::from(m - k) * &row[k - 1];
            }
            next[k] = v;
        }
        row = next;
    }
    row
}

/// `L_g(z) = sum_{r>=1} r^g z^r`.
pub fn polylog<T: Real>(gamma: T, z: T) -> Result<T> {
    if !(z > T::zero() && z < T::one()) {
        return Err(Error::Domain(format!("polylog argument {z} not in (0, 1)")));
    }
    if gamma < T::zero() {
        return Err(Error::Domain(format!("polylog order {gamma} is negative")));
    }
    let g = gamma.round();
    if g == gamma && g <= T::of(60.0) {
        let g = g.to_usize().unwrap();
        if g == 0 {
            return Ok(z / (T::one() - z));
        }
        let row = eulerian_row(g);
        let mut num = T::zero();
        for (k, a) in row.iter().enumerate() {
            let a = T::of(a.to_f64().unwrap());
            num += a * z.powi((g - k) as i32);
        }
        return Ok(num / (T::one() - z).powi(g as i32 + 1));
    }
    let mut acc = T::zero();
    let mut r = 1usize;
    loop {
        let term = T::of_usize(r).powf(gamma) * z.powi(r as i32);
        acc += term;
        if r > 16 && term <= T::epsilon() * acc {
            return Ok(acc);
        }
        r += 1;
    }
}

/// `sum_{r>=0} r^g z^r`, which differs from `L_g` only at `g = 0`.
fn lhat<T: Real>(gamma: T, z: T) -> T {
    if gamma == T::zero() {
        T::one() / (T::one() - z)
    } else {
        polylog(gamma, z).expect("argument checked by caller")
    }
}

/// Order-two coefficient of `t^2` in the averaged Sobolev norm, split into the
/// leading-propagator part and the residual.
pub fn order2_reference<T: Real>(gamma: T, p: T) -> Result<(T, T)> {
    if !(p > T::zero() && p < T::one()) {
        return Err(Error::Domain(format!("p = {p} not in (0, 1)")));
    }
    let one = T::one();
    let two = T::of(2.0);
    let n = modes_n(p);
    let l = |g: T, z: T| lhat(g, z);
    let g1 = gamma + one;
    let p2 = p * p;
    let p32 = p.powf(T::of(1.5));
    let p3 = p2 * p;
    let p4 = p2 * p2;
    let dom = (p * (p + T::of(3.0)) / (p + one) * l(gamma, p2) + (p2 / (p + one).powi(2) - two) * l(gamma, p)) / (T::of(4.0) * n)
        + ((l(g1, p) + l(gamma, p)) / (one + p) + l(g1, p2) + l(gamma, p2)) / (T::of(4.0) * n * n);
    let tg = two.powf(gamma);
    let rest = (p2 * l(gamma, p) / ((one + p) * (one + p2)) + p / (one + p) * l(gamma, p2)
        - two * p32 * l(gamma, p32) / (one + p + p2)
        + two * (p * l(gamma, p4) - l(gamma, p2)))
        / (T::of(4.0) * n * n)
        + (tg / (one + p2) * l(gamma, p2) + tg / (one + p) * l(gamma, p4) - two * tg / (one + p32) * l(gamma, p3)
            + T::of(4.0) * l(g1, p3)
            + two * l(gamma, p3))
            / (T::of(4.0) * n * n * n);
    Ok((dom, rest))
}

/// `N^2 gamma! / 16 [(5+gamma)/2^gamma + 2 gamma - 5]`, the large-`N` limit of the order-two coefficient.
pub fn order2_asymptotic(gamma: u32, p: f64) -> f64 {
    let fact: f64 = (1..=gamma).map(f64::from).product();
    let g = f64::from(gamma);
    modes_n(p).powi(gamma as i32) * fact / 16.0 * ((5.0 + g) / 2f64.powi(gamma as i32) + 2.0 * g - 5.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scope {
    Full,
    Melonic,
}

impl std::str::FromStr for Scope {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Scope::Full),
            "melonic" => Ok(Scope::Melonic),
            _ => Err(Error::Parse(format!("unknown scope {s}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesCoefficient {
    pub n: usize,
    pub gamma: f64,
    pub p: f64,
    pub scope: Scope,
    pub value: f64,
    /// Amplitude truncation plus the estimated tail in `r`.
    pub error: f64,
    pub r_max: usize,
    /// Graphs evaluated, counted with heap multiplicity.
    pub graphs: u64,
}

/// Smallest `r` with `r^gamma p^{r/2} < 1e-12 (1-p)` past the peak of `r^gamma p^{r/2}`.
pub fn default_r_max(p: f64, gamma: f64) -> usize {
    let target = 1e-12 * (1.0 - p);
    let q = p.sqrt();
    let peak = if gamma > 0.0 { (-gamma / q.ln()).ceil() as usize } else { 0 };
    let mut r = (target.ln() / q.ln()).floor() as usize + 1;
    r = r.max(peak);
    while (r as f64).powf(gamma) * q.powi(r as i32) >= target {
        r += 1;
    }
    r
}

pub const FULL_ORDER_GUARD: usize = if cfg!(feature = "full-order4") { 4 } else { 2 };

/// Tail of positive terms `t_r` past the last one, from their observed decay rate.
fn observed_tail(terms: &[f64]) -> f64 {
    let k = 8.min(terms.len().saturating_sub(1));
    let last = *terms.last().unwrap_or(&0.0);
    if k == 0 || last <= 0.0 {
        return 0.0;
    }
    let rho = (last / terms[terms.len() - 1 - k]).powf(1.0 / k as f64);
    if rho >= 1.0 {
        return f64::INFINITY;
    }
    last * rho / (1.0 - rho)
}

struct GraphTerm {
    value: f64,
    amp_err: f64,
    r_tail: f64,
}

/// Per-graph contribution `eps mult sum_r (r^g/N) A_r` with error estimates.
fn graph_term(g: &ExpansionGraph, mult: f64, gamma: f64, p: f64, r_max: usize, melonic: bool) -> Result<GraphTerm> {
    let n = modes_n(p);
    let weight = |r: usize| if r == 0 { if gamma == 0.0 { 1.0 } else { 0.0 } } else { (r as f64).powf(gamma) } / n;
    let eps = f64::from(g.sign()) * mult;
    let (terms, amp_err) = if melonic {
        let mut m = r_max + 64;
        let mut lo = transfer_weights(g, p, m)?;
        loop {
            let hi = transfer_weights(g, p, 2 * m)?;
            let terms: Vec<f64> = (0..=r_max).map(|r| weight(r) * hi[r]).collect();
            let diff: f64 = (0..=r_max).map(|r| weight(r) * (hi[r] - lo[r]).abs()).sum();
            let total = pairwise_sum(&terms);
            if diff <= 1e-12 * total.abs().max(1e-300) || m >= 1 << 14 {
                if diff > 1e-9 * total.abs().max(1e-300) {
                    return Err(Error::Convergence(format!("transfer at cutoff {m}")));
                }
                break (terms, diff + 1e-15 * total.abs());
            }
            m *= 2;
            lo = hi;
        }
    } else {
        let eval = EvalOptions::default();
        let fo = FaceSumOptions::default();
        let mut terms = Vec::with_capacity(r_max + 1);
        let mut err = 0.0;
        for r in 0..=r_max {
            let w = weight(r);
            if w == 0.0 {
                terms.push(0.0);
                continue;
            }
            let a = amplitude_facesum(g, r, p, &eval, &fo)?;
            if !a.converged {
                return Err(Error::Convergence(format!("{} at r={r}: {a:?}", g.canonical_key())));
            }
            terms.push(w * a.value);
            err += w * a.tail;
        }
        (terms, err)
    };
    Ok(GraphTerm {
        value: eps * pairwise_sum(&terms),
        amp_err: mult * amp_err,
        r_tail: mult * observed_tail(&terms),
    })
}

/// `(1/n!) 8^{-n/2} sum_{r<=R} (r^g/N) sum_G eps(G) A_r(G)`.
pub fn sobolev_coefficient(n: usize, gamma: f64, p: f64, scope: Scope, r_max: Option<usize>) -> Result<SeriesCoefficient> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("p = {p} not in (0, 1)")));
    }
    if gamma < 0.0 {
        return Err(Error::Domain(format!("gamma = {gamma} is negative")));
    }
    let r_max = r_max.unwrap_or_else(|| default_r_max(p, gamma));
    let mut out = SeriesCoefficient { n, gamma, p, scope, value: 0.0, error: 0.0, r_max, graphs: 0 };
    if n % 2 == 1 {
        return Ok(out);
    }
    let graphs: Vec<(ExpansionGraph, f64, bool)> = match scope {
        Scope::Full => {
            if n > FULL_ORDER_GUARD {
                return Err(Error::Guard { what: "full-scope series order", limit: FULL_ORDER_GUARD as u64, requested: n as u64 });
            }
            let fam = GraphFamily::with_guard(n, FULL_ORDER_GUARD)?;
            fam.iter().map(|g| {
                let m = is_melonic(&g);
                (g, 1.0, m)
            }).collect()
        }
        Scope::Melonic => melonic_family(n)?
            .into_values()
            .map(|g| {
                let mult = g.tree().heap_orderings().to_f64().unwrap();
                (g, mult, true)
            })
            .collect(),
    };
    let parts: Vec<GraphTerm> = graphs
        .par_iter()
        .map(|(g, mult, mel)| graph_term(g, *mult, gamma, p, r_max, *mel))
        .collect::<Result<_>>()?;
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    let norm = 1.0 / (fact * 8f64.powf(n as f64 / 2.0));
    let vals: Vec<f64> = parts.iter().map(|x| x.value).collect();
    let abs: Vec<f64> = parts.iter().map(|x| x.value.abs()).collect();
    let amp_err: f64 = parts.iter().map(|x| x.amp_err).sum();
    out.graphs = graphs.iter().map(|x| x.1 as u64).sum();
    out.value = norm * pairwise_sum(&vals);
    let r_tail = match scope {
        Scope::Full => parts.iter().map(|x| x.r_tail).sum(),
        // every melonic amplitude is at most 4^n p^{r/2}
        Scope::Melonic => {
            let q = p.sqrt();
            let mut tail = 0.0;
            for r in r_max + 1.. {
                let t = (r as f64).powf(gamma) * q.powi(r as i32);
                tail += t;
                if t < 1e-18 * tail || r > r_max + 100_000 {
                    break;
                }
            }
            tail / modes_n(p) * 4f64.powi(n as i32) * out.graphs as f64
        }
    };
    let rounding = 1e-14 * pairwise_sum(&abs);
    out.error = norm * (amp_err + r_tail + rounding);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MelonicSeriesValue {
    pub value: f64,
    pub coefficients: Vec<f64>,
    /// Bound on the discarded orders; infinite outside the certified disk.
    pub remainder: f64,
    pub certified: bool,
    /// Radius in `t` within which the coefficient bound series converges.
    pub radius: f64,
}

/// Bound on `|s^melo_{g,n}|`: count bound times `4^n`, times the `r`-sum of `p^{r/2}`.
fn coefficient_bound(n: usize, gamma: f64, p: f64) -> f64 {
    let q = p.sqrt();
    let rsum = if gamma == 0.0 { 1.0 / (1.0 - q) } else { polylog(gamma, q).unwrap() } / modes_n(p);
    let count = melonic_count_bound(n).to_f64().unwrap_or(f64::INFINITY);
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    count * 4f64.powi(n as i32) * rsum / (fact * 8f64.powf(n as f64 / 2.0))
}

/// Partial sum of the melonic series through order `n_max` at time `t`.
pub fn melonic_series_eval(gamma: f64, p: f64, t: f64, n_max: usize) -> Result<MelonicSeriesValue> {
    if n_max % 2 == 1 {
        return Err(Error::OddOrder(n_max));
    }
    let mut coefficients = Vec::new();
    let mut value = 0.0;
    for n in (0..=n_max).step_by(2) {
        let c = if n == 0 {
            lhat(gamma, p) / modes_n(p)
        } else {
            sobolev_coefficient(n, gamma, p, Scope::Melonic, None)?.value
        };
        value += c * t.powi(n as i32);
        coefficients.push(c);
    }
    // successive bound ratios b_{n+2}/b_n settle quickly
    let ratio = (n_max + 2..n_max + 42)
        .step_by(2)
        .map(|n| coefficient_bound(n + 2, gamma, p) / coefficient_bound(n, gamma, p))
        .fold(0.0, f64::max);
    let radius = 1.0 / ratio.sqrt();
    let q = ratio * t * t;
    let certified = q < 1.0;
    let remainder = if certified {
        coefficient_bound(n_max + 2, gamma, p) * t.abs().powi(n_max as i32 + 2) / (1.0 - q)
    } else {
        f64::INFINITY
    };
    Ok(MelonicSeriesValue { value, coefficients, remainder, certified, radius })
}
