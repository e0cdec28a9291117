//! Exact recursion for melonic graphs.
//!
//! Every edge carries a weight as a function of its momentum. Removing a melon
//! on vertices `u, w` with external momentum `J` replaces its two external
//! edges by one edge of weight
//! `w_x(J) w_y(J) sum_{S>=J} w_b(S-J) sum_{a<=S} w_c(a) w_d(S-a)`.

use super::{check_p, doubling, powers, AmplitudeValue, EvalOptions, Method};
use crate::error::{Error, Result};
use crate::graph::{he, he_vertex, EdgeKind, ExpansionGraph, HalfEdgeGraph};
use crate::melonic::{apply_reduction_he, find_reductions_he};
use crate::scalar::{modes_n, Real};

fn convolve_tail<T: Real>(wb: &[T], wc: &[T], wd: &[T]) -> Vec<T> {
    let m = wb.len();
    let h: Vec<T> = (0..m).map(|s| (0..=s).map(|a| wc[a] * wd[s - a]).sum()).collect();
    (0..m).map(|j| (j..m).map(|s| wb[s - j] * h[s]).sum()).collect()
}

/// Normalised amplitudes `A_r` for `r = 0..=cutoff` with all momenta at most `cutoff`.
pub fn transfer_weights<T: Real>(g: &ExpansionGraph, p: T, cutoff: usize) -> Result<Vec<T>> {
    check_p(p)?;
    let mut h: HalfEdgeGraph = g.half_edges();
    let dashed = powers(p, cutoff);
    let ones = vec![T::one(); cutoff + 1];
    let mut pool = vec![ones, dashed];
    let mut wid: Vec<usize> = h.kind.iter().map(|&k| (k == EdgeKind::Dashed) as usize).collect();
    while h.n > 0 {
        let mv = find_reductions_he(&h)
            .into_iter()
            .next()
            .ok_or_else(|| Error::Domain("transfer evaluation needs a melonic graph".into()))?;
        let (u, slot) = he_vertex(mv.ext.0);
        let others: Vec<usize> = (0..4).filter(|&s| s != slot && s != slot ^ 1).collect();
        let w = |s: usize| &pool[wid[he(u, s)]];
        let g = convolve_tail(w(slot ^ 1), w(others[0]), w(others[1]));
        let (wx, wy) = (&pool[wid[mv.ext.0]], &pool[wid[mv.ext.1]]);
        let new: Vec<T> = (0..=cutoff).map(|j| wx[j] * wy[j] * g[j]).collect();
        pool.push(new);
        let id = pool.len() - 1;
        let gone = [mv.pair.0, mv.pair.1];
        let next = apply_reduction_he(&h, &mv);
        let shift = |v: usize| v - gone.iter().filter(|&&x| x < v).count();
        let mut nw = vec![0; next.half_edge_count()];
        for (x, &i) in wid.iter().enumerate() {
            if x < 2 {
                nw[x] = i;
            } else {
                let (v, s) = he_vertex(x);
                if !gone.contains(&v) {
                    nw[he(shift(v), s)] = i;
                }
            }
        }
        for x in [mv.join.0, mv.join.1] {
            let nx = if x < 2 { x } else { he(shift(he_vertex(x).0), he_vertex(x).1) };
            nw[nx] = id;
        }
        wid = nw;
        h = next;
    }
    let norm = modes_n(p).powi(-(g.n() as i32));
    Ok(pool[wid[0]].iter().map(|&x| x * norm).collect())
}

pub fn amplitude_transfer<T: Real>(g: &ExpansionGraph, r: usize, p: T, opts: &EvalOptions) -> Result<AmplitudeValue<T>> {
    let start = opts.initial_cutoff(g.n(), r).max(2 * r + 16);
    doubling(start, opts, Method::Transfer, |m| Ok(transfer_weights(g, p, m)?[r]))
}
