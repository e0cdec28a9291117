//! Melonic reductions and insertions.
//!
//! An elementary 2-point melon is a Wick pair `(v, w)` joined by three edges
//! that coincide with three corners of its propagator. Reducing it deletes
//! both vertices and joins their two external neighbours.

use crate::error::{Error, Result};
use crate::graph::{he, he_vertex, EdgeKind, ExpansionGraph, HalfEdgeGraph, LabelOrder};
use crate::trees::Charge;
use num_bigint::BigUint;
use serde::Serialize;
use std::collections::{BTreeMap, HashSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum MoveType {
    I,
    II,
    III,
    IIs,
    IIIs,
}

/// A melon found in a graph, with the edge that replaces it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionMove {
    pub kind: MoveType,
    /// `(upper, lower)` for types II/III and their solid variants; `(v, w)`, `v < w`, for type I.
    pub pair: (usize, usize),
    /// External half-edges of `pair.0` and `pair.1`.
    pub ext: (usize, usize),
    /// Half-edges outside the melon that get joined.
    pub join: (usize, usize),
    pub new_edge: EdgeKind,
}

pub fn find_reductions(g: &ExpansionGraph) -> Vec<ReductionMove> {
    find_reductions_he(&g.half_edges())
}

pub fn find_reductions_he(h: &HalfEdgeGraph) -> Vec<ReductionMove> {
    let mut out = Vec::new();
    for v in 0..h.n {
        let w = h.mate(v);
        if w < v {
            continue;
        }
        let matched: Vec<usize> = (0..4).filter(|&a| h.edge[he(v, a)] == h.corner[he(v, a)]).collect();
        if matched.len() != 3 {
            continue;
        }
        let ext_v = he(v, (0..4).find(|a| !matched.contains(a)).unwrap());
        let ext_w = h.corner[ext_v];
        let solid_inside: Vec<usize> = matched
            .iter()
            .map(|&a| he(v, a))
            .filter(|&x| h.kind[x] == EdgeKind::Solid)
            .collect();
        let mv = match solid_inside.as_slice() {
            [] => ReductionMove {
                kind: MoveType::I,
                pair: (v, w),
                ext: (ext_v, ext_w),
                join: (h.edge[ext_v], h.edge[ext_w]),
                new_edge: EdgeKind::Dashed,
            },
            [x] => {
                let (a, b) = (*x, h.edge[*x]);
                let (lower_e1, upper_slot) = if he_vertex(a).1 == 0 { (a, b) } else { (b, a) };
                let lower = he_vertex(lower_e1).0;
                let (upper, s) = he_vertex(upper_slot);
                let (up_ext, low_ext) = if upper == v { (ext_v, ext_w) } else { (ext_w, ext_v) };
                let dashed_leg = h.kind[low_ext] == EdgeKind::Dashed;
                let kind = match (s, dashed_leg) {
                    (1, true) => MoveType::II,
                    (1, false) => MoveType::IIs,
                    (_, true) => MoveType::III,
                    (_, false) => MoveType::IIIs,
                };
                ReductionMove {
                    kind,
                    pair: (upper, lower),
                    ext: (up_ext, low_ext),
                    join: (h.edge[up_ext], h.edge[low_ext]),
                    new_edge: h.kind[low_ext],
                }
            }
            _ => continue,
        };
        out.push(mv);
    }
    out
}

pub fn apply_reduction_he(h: &HalfEdgeGraph, mv: &ReductionMove) -> HalfEdgeGraph {
    h.remove_and_join(&[mv.pair.0, mv.pair.1], mv.join.0, mv.join.1, mv.new_edge)
}

/// Apply a reduction, keeping the relative heap order of the survivors.
pub fn reduce(g: &ExpansionGraph, mv: &ReductionMove) -> Result<ExpansionGraph> {
    apply_reduction_he(&g.half_edges(), mv).to_expansion(LabelOrder::Keep)
}

fn memo_key(h: &HalfEdgeGraph) -> String {
    h.to_expansion(LabelOrder::Preorder)
        .map(|g| g.canonical_key())
        .unwrap_or_default()
}

/// True iff some sequence of reductions reaches the trivial graph.
pub fn is_melonic(g: &ExpansionGraph) -> bool {
    let mut failed = HashSet::new();
    search(&g.half_edges(), &mut failed)
}

fn search(h: &HalfEdgeGraph, failed: &mut HashSet<String>) -> bool {
    if h.n == 0 {
        return true;
    }
    let moves = find_reductions_he(h);
    if moves.is_empty() {
        return false;
    }
    let key = memo_key(h);
    if failed.contains(&key) {
        return false;
    }
    for mv in &moves {
        if search(&apply_reduction_he(h, mv), failed) {
            return true;
        }
    }
    failed.insert(key);
    false
}

/// Reduce by always taking the first available move; no backtracking.
pub fn is_melonic_greedy(g: &ExpansionGraph) -> bool {
    let mut h = g.half_edges();
    while h.n > 0 {
        match find_reductions_he(&h).first() {
            Some(mv) => h = apply_reduction_he(&h, mv),
            None => return false,
        }
    }
    true
}

/// One of the 14 dashed-leg or 6 solid-leg elementary 2-point melons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct MelonTemplate {
    pub kind: MoveType,
    /// Child slot of the upper vertex holding the lower one (1 = `e2`, 2 = `e3`, 3 = `e4`); unused for type I.
    pub upper_slot: usize,
    /// Slot of the lower vertex carrying the external leg; unused for type I.
    pub lower_ext: usize,
    /// Types I, II, IIs: `e3` of the upper vertex meets `e4` of the lower one.
    pub crossed: bool,
}

/// Templates insertable into an edge of the given kind (one end fixed).
pub fn melon_templates(kind: EdgeKind) -> Vec<MelonTemplate> {
    let t = |kind, upper_slot, lower_ext, crossed| MelonTemplate {
        kind,
        upper_slot,
        lower_ext,
        crossed,
    };
    let mut out = Vec::new();
    match kind {
        EdgeKind::Dashed => {
            for c in [false, true] {
                out.push(t(MoveType::II, 1, 1, c));
            }
            for us in [2, 3] {
                for le in [2, 3] {
                    out.push(t(MoveType::III, us, le, false));
                }
            }
        }
        EdgeKind::Solid => {
            for c in [false, true] {
                out.push(t(MoveType::IIs, 1, 1, c));
            }
            for us in [2, 3] {
                for le in [2, 3] {
                    out.push(t(MoveType::IIIs, us, le, false));
                }
            }
        }
    }
    out
}

/// Type-I templates (attached at both ends of a dashed edge).
pub fn type_one_templates() -> Vec<MelonTemplate> {
    [false, true]
        .into_iter()
        .map(|c| MelonTemplate {
            kind: MoveType::I,
            upper_slot: 0,
            lower_ext: 0,
            crossed: c,
        })
        .collect()
}

/// Type of the edge carried by half-edge `x` (a root or child slot).
fn slot_charge(h: &HalfEdgeGraph, x: usize) -> Charge {
    match x {
        0 => Charge::Alpha,
        1 => Charge::AlphaBar,
        _ => {
            let (v, s) = he_vertex(x);
            if s == 1 {
                h.charge[v].flip()
            } else {
                h.charge[v]
            }
        }
    }
}

/// Insert an elementary melon into the edge through half-edge `x`. For the
/// non-type-I templates the upper vertex hangs from `x`, which must then be a
/// parent-side slot (never an `e1`).
pub fn insert_melon_he(h: &HalfEdgeGraph, x: usize, t: MelonTemplate) -> Result<HalfEdgeGraph> {
    if x >= 2 && he_vertex(x).1 == 0 {
        return Err(Error::Domain("insertion point must be a parent-side slot".into()));
    }
    let y = h.edge[x];
    let kind = h.kind[x];
    let solid_template = matches!(t.kind, MoveType::IIs | MoveType::IIIs);
    if solid_template != (kind == EdgeKind::Solid) {
        return Err(Error::Domain(format!("template {:?} does not fit a {kind:?} edge", t.kind)));
    }
    let (u, l) = (h.n, h.n + 1);
    let mut g = h.clone();
    g.n += 2;
    let cu = slot_charge(h, x);
    g.edge.resize(2 + 4 * g.n, usize::MAX);
    g.kind.resize(2 + 4 * g.n, EdgeKind::Solid);
    g.corner.resize(2 + 4 * g.n, usize::MAX);
    let link = |g: &mut HalfEdgeGraph, a: usize, b: usize, k: EdgeKind| {
        g.edge[a] = b;
        g.edge[b] = a;
        g.kind[a] = k;
        g.kind[b] = k;
    };
    let cornr = |g: &mut HalfEdgeGraph, a: usize, b: usize| {
        g.corner[a] = b;
        g.corner[b] = a;
    };
    link(&mut g, x, he(u, 0), EdgeKind::Solid);
    let pairs: Vec<(usize, usize)>;
    match t.kind {
        MoveType::I => {
            if kind != EdgeKind::Dashed {
                return Err(Error::Domain("type I needs a dashed edge".into()));
            }
            let cl = slot_charge(h, y);
            g.charge.extend([cu, cl]);
            link(&mut g, y, he(l, 0), EdgeKind::Solid);
            let (b3, b4) = if t.crossed { (3, 2) } else { (2, 3) };
            pairs = vec![(1, 1), (2, b3), (3, b4)];
            cornr(&mut g, he(u, 0), he(l, 0));
        }
        _ => {
            let s = t.upper_slot;
            let cl = if s == 1 { cu.flip() } else { cu };
            g.charge.extend([cu, cl]);
            link(&mut g, he(u, s), he(l, 0), EdgeKind::Solid);
            link(&mut g, he(l, t.lower_ext), y, kind);
            cornr(&mut g, he(u, 0), he(l, t.lower_ext));
            cornr(&mut g, he(u, s), he(l, 0));
            if s == 1 {
                let (b3, b4) = if t.crossed { (3, 2) } else { (2, 3) };
                pairs = vec![(2, b3), (3, b4)];
            } else {
                let other_u = 5 - s;
                let other_l = 5 - t.lower_ext;
                pairs = vec![(other_u, 1), (1, other_l)];
            }
        }
    }
    for (a, b) in pairs {
        link(&mut g, he(u, a), he(l, b), EdgeKind::Dashed);
        cornr(&mut g, he(u, a), he(l, b));
    }
    Ok(g)
}

/// Every single-melon insertion into `g`, relabeled in preorder.
pub fn all_insertions(g: &ExpansionGraph) -> Result<Vec<ExpansionGraph>> {
    let h = g.half_edges();
    let mut out = Vec::new();
    for x in 0..h.half_edge_count() {
        if x >= 2 && he_vertex(x).1 == 0 {
            continue;
        }
        let mut ts = melon_templates(h.kind[x]);
        if h.kind[x] == EdgeKind::Dashed && slot_charge(&h, x) == Charge::Alpha {
            ts.extend(type_one_templates());
        }
        for t in ts {
            out.push(insert_melon_he(&h, x, t)?.to_expansion(LabelOrder::Preorder)?);
        }
    }
    Ok(out)
}

/// The 14 elementary melons, relabeled in preorder.
pub fn elementary_melons() -> Vec<ExpansionGraph> {
    all_insertions(&ExpansionGraph::trivial()).expect("insertions into the trivial graph")
}

/// Melonic graphs of order `n` up to heap labeling, keyed by heap-free key,
/// built by insertions from lower orders.
pub fn melonic_family(n: usize) -> Result<BTreeMap<String, ExpansionGraph>> {
    if n % 2 == 1 {
        return Ok(BTreeMap::new());
    }
    if n > 8 {
        return Err(Error::Guard {
            what: "melonic family order",
            limit: 8,
            requested: n as u64,
        });
    }
    let mut level = BTreeMap::new();
    let triv = ExpansionGraph::trivial();
    level.insert(triv.heap_free_key(), triv);
    for _ in 0..n / 2 {
        let mut next = BTreeMap::new();
        for g in level.values() {
            for ins in all_insertions(g)? {
                next.entry(ins.heap_free_key()).or_insert(ins);
            }
        }
        level = next;
    }
    Ok(level)
}

/// Number of heap-labeled melonic graphs of order `n`.
pub fn count_melonic(n: usize) -> Result<BigUint> {
    Ok(melonic_family(n)?
        .values()
        .map(|g| g.tree().heap_orderings())
        .sum())
}

/// `2 n! C^4_n 48^n` with `C^4_n` the quaternary Fuss-Catalan number.
pub fn melonic_count_bound(n: usize) -> BigUint {
    let fact: BigUint = (2..=n).fold(BigUint::from(1u32), |a, k| a * BigUint::from(k));
    let fc = crate::trees::fuss_catalan(4, n).expect("q = 4");
    BigUint::from(2u32) * fact * fc * BigUint::from(48u32).pow(n as u32)
}
