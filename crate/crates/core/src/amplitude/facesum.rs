//! Sum over independent face momenta.
//!
//! Dependent momenta are rational combinations of the independent ones and
//! only integral, non-negative values are kept. The last free momentum is
//! summed in closed form: on each residue class the exponent is affine, so the
//! sum is a finite geometric series.

use super::{check_p, doubling, AmplitudeValue, EvalOptions, Method};
use crate::error::Result;
use crate::graph::ExpansionGraph;
use crate::scalar::{modes_n, Compensated, Real};
use crate::stranded::{incidence_with_pivots, to_stranded, IncidenceData};
use num_integer::Integer;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FaceSumOptions {
    /// Drop the non-negativity filters on dependent momenta. The sum then
    /// diverges as the cutoff grows whenever a filter was active.
    pub disable_theta: bool,
    /// Column preference for dependent faces.
    pub pivots: Option<Vec<usize>>,
}

/// Integer form of one dependent momentum: `den * i_j = sum_k num[k] i_k`.
struct Row {
    num: Vec<i64>,
    den: i64,
    len: i64,
}

struct Plan {
    rows: Vec<Row>,
    /// Dashed lengths of the free faces (independent faces minus the root).
    free_len: Vec<i64>,
    root_len: i64,
}

fn plan(inc: &IncidenceData) -> Plan {
    let rows = inc
        .a
        .iter()
        .zip(&inc.dependent)
        .map(|(a, &f)| {
            let den = a.iter().fold(1i64, |d, x| d.lcm(x.denom()));
            Row {
                num: a.iter().map(|x| x.numer() * (den / x.denom())).collect(),
                den,
                len: inc.dashed[f] as i64,
            }
        })
        .collect();
    let free_len = inc.independent[1..].iter().map(|&f| inc.dashed[f] as i64).collect();
    Plan {
        rows,
        free_len,
        root_len: inc.dashed[inc.independent[0]] as i64,
    }
}

struct Walk<'a, T> {
    plan: &'a Plan,
    theta: bool,
    cutoff: i64,
    p: T,
    /// Partial numerators `c_j` of the dependent rows.
    c: Vec<i64>,
    acc: Compensated<T>,
}

impl<T: Real> Walk<'_, T> {
    fn pw(&self, e: i64) -> T {
        self.p.powi(e as i32)
    }

    fn go(&mut self, k: usize, e: i64) {
        let free = self.plan.free_len.len();
        if k + 1 == free {
            self.innermost(k, e);
            return;
        }
        if k == free {
            self.single(e);
            return;
        }
        for x in 0..=self.cutoff {
            for (j, row) in self.plan.rows.iter().enumerate() {
                self.c[j] += row.num[k + 1] * x;
            }
            self.go(k + 1, e + self.plan.free_len[k] * x);
            for (j, row) in self.plan.rows.iter().enumerate() {
                self.c[j] -= row.num[k + 1] * x;
            }
        }
    }

    /// No free momenta: every dependent momentum is fixed by `r`.
    fn single(&mut self, e: i64) {
        let mut e = e;
        for (row, &c) in self.plan.rows.iter().zip(&self.c) {
            if c % row.den != 0 || (self.theta && c < 0) {
                return;
            }
            e += row.len * c / row.den;
        }
        self.acc.add(self.pw(e));
    }

    fn exponent(&self, k: usize, e: i64, x: i64) -> i64 {
        let mut out = e + self.plan.free_len[k] * x;
        for (row, &c) in self.plan.rows.iter().zip(&self.c) {
            out += row.len * (c + row.num[k + 1] * x) / row.den;
        }
        out
    }

    fn innermost(&mut self, k: usize, e: i64) {
        let col = k + 1;
        let (mut lo, mut hi) = (0i64, self.cutoff);
        let mut modulus = 1i64;
        for (row, &c) in self.plan.rows.iter().zip(&self.c) {
            let b = row.num[col];
            if b == 0 {
                if c % row.den != 0 || (self.theta && c < 0) {
                    return;
                }
                continue;
            }
            modulus = modulus.lcm(&(row.den / b.gcd(&row.den)));
            if self.theta {
                if b > 0 {
                    lo = lo.max(Integer::div_ceil(&-c, &b));
                } else {
                    hi = hi.min(Integer::div_floor(&c, &-b));
                }
            }
        }
        if lo > hi {
            return;
        }
        for rho in 0..modulus {
            let ok = self
                .plan
                .rows
                .iter()
                .zip(&self.c)
                .all(|(row, &c)| (c + row.num[col] * rho) % row.den == 0);
            if !ok {
                continue;
            }
            // x = rho + modulus * t with lo <= x <= hi
            let t_lo = Integer::div_ceil(&(lo - rho), &modulus);
            let t_hi = Integer::div_floor(&(hi - rho), &modulus);
            if t_lo > t_hi {
                continue;
            }
            let x0 = rho + modulus * t_lo;
            let e0 = self.exponent(k, e, x0);
            let step = self.exponent(k, e, x0 + modulus) - e0;
            let count = t_hi - t_lo + 1;
            self.acc.add(self.pw(e0) * geometric(self.pw(step), count));
        }
    }
}

/// `sum_{t=0}^{count-1} q^t`.
fn geometric<T: Real>(q: T, count: i64) -> T {
    if q == T::one() {
        T::of(count as f64)
    } else {
        (T::one() - q.powi(count as i32)) / (T::one() - q)
    }
}

/// Face-momentum sum with every free momentum at most `cutoff`.
pub fn facesum_sum<T: Real>(g: &ExpansionGraph, r: usize, p: T, cutoff: usize, opts: &FaceSumOptions) -> Result<T> {
    check_p(p)?;
    let gs = to_stranded(g)?;
    let inc = incidence_with_pivots(&gs, opts.pivots.as_deref())?;
    facesum_from_incidence(&inc, g.n(), r, p, cutoff, opts.disable_theta)
}

pub(crate) fn facesum_from_incidence<T: Real>(
    inc: &IncidenceData,
    n: usize,
    r: usize,
    p: T,
    cutoff: usize,
    disable_theta: bool,
) -> Result<T> {
    let plan = plan(inc);
    let r = r as i64;
    let mut w = Walk {
        plan: &plan,
        theta: !disable_theta,
        cutoff: cutoff as i64,
        p,
        c: plan.rows.iter().map(|row| row.num[0] * r).collect(),
        acc: Compensated::new(),
    };
    w.go(0, plan.root_len * r);
    Ok(w.acc.value() * modes_n(p).powi(-(n as i32)))
}

pub fn amplitude_facesum<T: Real>(
    g: &ExpansionGraph,
    r: usize,
    p: T,
    eval: &EvalOptions,
    opts: &FaceSumOptions,
) -> Result<AmplitudeValue<T>> {
    check_p(p)?;
    let gs = to_stranded(g)?;
    let inc = incidence_with_pivots(&gs, opts.pivots.as_deref())?;
    let start = eval.initial_cutoff(g.n(), r);
    doubling(start, eval, Method::Face, |lam| {
        facesum_from_incidence(&inc, g.n(), r, p, lam, opts.disable_theta)
    })
}
