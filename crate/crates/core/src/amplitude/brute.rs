//! Direct sweep over momentum assignments `(S_v, j_v, k_v)`.

use super::{check_p, doubling, powers, AmplitudeValue, EvalOptions, Method};
use crate::error::Result;
use crate::graph::{he_vertex, EdgeKind, ExpansionGraph};
use crate::scalar::{modes_n, Compensated, Real};

/// Linear form `sum coef * var + rc * r`.
#[derive(Debug, Clone, Default)]
struct Lin {
    terms: Vec<(usize, i64)>,
    rc: i64,
}

impl Lin {
    fn add(&mut self, other: &Lin, sign: i64) {
        for &(v, c) in &other.terms {
            match self.terms.iter_mut().find(|t| t.0 == v) {
                Some(t) => t.1 += sign * c,
                None => self.terms.push((v, sign * c)),
            }
        }
        self.terms.retain(|t| t.1 != 0);
        self.rc += sign * other.rc;
    }

    fn eval(&self, x: &[i64], r: i64) -> i64 {
        self.terms.iter().map(|&(v, c)| c * x[v]).sum::<i64>() + self.rc * r
    }
}

/// Momentum of a half-edge: root half-edges carry `r`; vertex slots carry
/// `j, S-j, k, S-k`.
fn slot_form(h: usize) -> Lin {
    if h < 2 {
        return Lin { terms: vec![], rc: 1 };
    }
    let (v, a) = he_vertex(h);
    let (s, j, k) = (3 * v, 3 * v + 1, 3 * v + 2);
    let terms = match a {
        0 => vec![(j, 1)],
        1 => vec![(s, 1), (j, -1)],
        2 => vec![(k, 1)],
        _ => vec![(s, 1), (k, -1)],
    };
    Lin { terms, rc: 0 }
}

struct Problem {
    nvars: usize,
    /// For each variable, constraints whose highest variable it is.
    closing: Vec<Vec<Lin>>,
    dashed: Vec<Lin>,
    n: usize,
}

fn build(g: &ExpansionGraph) -> Problem {
    let h = g.half_edges();
    let n = g.n();
    let nvars = 3 * n;
    let mut constraints = Vec::new();
    let mut dashed = Vec::new();
    for x in 0..h.half_edge_count() {
        let y = h.edge[x];
        if x > y {
            continue;
        }
        let mut c = slot_form(x);
        c.add(&slot_form(y), -1);
        if h.kind[x] == EdgeKind::Dashed {
            dashed.push(slot_form(x));
        }
        constraints.push(c);
    }
    for &(v, w, p) in &g.wick().pairs {
        let vars = [3 * v, 3 * v + 1, 3 * v + 2, 3 * w, 3 * w + 1, 3 * w + 2];
        let mut ss = Lin::default();
        ss.add(&Lin { terms: vec![(vars[0], 1), (vars[3], -1)], rc: 0 }, 1);
        constraints.push(ss);
        for d in p.deltas() {
            let terms = vars.iter().zip(d).filter(|t| t.1 != 0).map(|(&v, c)| (v, c as i64)).collect();
            let mut l = Lin::default();
            l.add(&Lin { terms, rc: 0 }, 1);
            constraints.push(l);
        }
    }
    let mut closing = vec![Vec::new(); nvars];
    for c in constraints {
        if let Some(&(last, _)) = c.terms.iter().max_by_key(|t| t.0) {
            closing[last].push(c);
        } else {
            debug_assert_eq!(c.rc, 0, "constant constraint");
        }
    }
    Problem { nvars, closing, dashed, n }
}

/// Diagnostics of a sweep.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BruteStats {
    /// Complete assignments visited.
    pub assignments: u64,
    /// Assignments violating `sum_v S_v <= n sum_leaves j`.
    pub lemma_violations: u64,
}

struct Sweep<'a, T> {
    pr: &'a Problem,
    r: i64,
    cutoff: i64,
    pw: Vec<T>,
    x: Vec<i64>,
    acc: Compensated<T>,
    stats: BruteStats,
}

impl<T: Real> Sweep<'_, T> {
    fn go(&mut self, var: usize) {
        if var == self.pr.nvars {
            self.leaf();
            return;
        }
        let (lo, hi) = if var % 3 == 0 { (0, self.cutoff) } else { (0, self.x[var - var % 3]) };
        let closing = &self.pr.closing[var];
        if let Some(c) = closing.first() {
            let coef = c.terms.iter().find(|t| t.0 == var).unwrap().1;
            self.x[var] = 0;
            let rest = c.eval(&self.x, self.r);
            if rest % coef != 0 {
                return;
            }
            let val = -rest / coef;
            if val < lo || val > hi {
                return;
            }
            self.x[var] = val;
            if closing[1..].iter().all(|c| c.eval(&self.x, self.r) == 0) {
                self.go(var + 1);
            }
        } else {
            for val in lo..=hi {
                self.x[var] = val;
                self.go(var + 1);
            }
        }
    }

    fn leaf(&mut self) {
        let mut e = 0i64;
        for d in &self.pr.dashed {
            e += d.eval(&self.x, self.r);
        }
        let ssum: i64 = (0..self.pr.n).map(|v| self.x[3 * v]).sum();
        if ssum > 2 * self.pr.n as i64 * e {
            self.stats.lemma_violations += 1;
        }
        self.stats.assignments += 1;
        self.acc.add(self.pw[e as usize]);
    }
}

/// Sum over all assignments with every `S_v <= cutoff`.
pub fn bruteforce_sum<T: Real>(g: &ExpansionGraph, r: usize, p: T, cutoff: usize) -> Result<(T, BruteStats)> {
    check_p(p)?;
    let pr = build(g);
    let n = g.n();
    let maxe = (n + 1) * cutoff.max(r);
    let mut sw = Sweep {
        pr: &pr,
        r: r as i64,
        cutoff: cutoff as i64,
        pw: powers(p, maxe),
        x: vec![0; pr.nvars],
        acc: Compensated::new(),
        stats: BruteStats::default(),
    };
    if pr.nvars == 0 {
        let e: i64 = pr.dashed.iter().map(|d| d.eval(&[], r as i64)).sum();
        return Ok((sw.pw[e as usize], BruteStats { assignments: 1, lemma_violations: 0 }));
    }
    sw.go(0);
    let norm = modes_n(p).powi(-(n as i32));
    Ok((sw.acc.value() * norm, sw.stats))
}

/// `N^{-n} n [sum_{S>L} (S+1)^2 x^S] [sum_S (S+1)^2 x^S]^{n-1}` with `x = p^{1/2n}`.
fn lemma_tail<T: Real>(n: usize, p: T, cutoff: usize) -> T {
    if n == 0 {
        return T::zero();
    }
    let x = p.powf(T::one() / T::of_usize(2 * n));
    let full = (T::one() + x) / (T::one() - x).powi(3);
    let mut head = T::zero();
    let mut xs = T::one();
    for s in 0..=cutoff {
        let k = T::of_usize(s + 1);
        head += k * k * xs;
        xs *= x;
    }
    let tail = (full - head).max(T::zero());
    modes_n(p).powi(-(n as i32)) * T::of_usize(n) * tail * full.powi(n as i32 - 1)
}

/// Brute-force amplitude under the cutoff-doubling protocol.
pub fn amplitude_bruteforce<T: Real>(g: &ExpansionGraph, r: usize, p: T, opts: &EvalOptions) -> Result<AmplitudeValue<T>> {
    let start = opts.initial_cutoff(g.n(), r).max(r);
    let mut out = doubling(start, opts, Method::Brute, |lam| Ok(bruteforce_sum(g, r, p, lam)?.0))?;
    out.analytic_tail = Some(lemma_tail(g.n(), p, out.cutoff));
    Ok(out)
}
