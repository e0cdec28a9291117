//! Expansion graphs `(U, w, w')`: a 2-rooted tree, a leaf pairing and a Wick
//! pairing with one of eight propagators per pair.

use crate::error::{Error, Result};
use crate::trees::{enumerate_2rooted, Charge, SlotRef, TwoRootedTree};
use num_bigint::BigUint;
use num_traits::One;
use serde::Serialize;
use std::fmt::Write as _;
use std::sync::Arc;

/// Default largest order for which the full family is assembled.
pub const DEFAULT_ORDER_GUARD: usize = 4;
/// Largest order for which leaf pairings are listed.
pub const LEAF_PAIRING_GUARD: usize = 6;

/// One of the eight terms of the coupling covariance, numbered 1..=8 in
/// textual order: four `delta_{jj'}`-type terms, then four exchange terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Propagator(u8);

/// Slot permutations: slot `a` of `v` (momenta `j, S-j, k, S-k`) is identified
/// with slot `MAPS[i][a]` of the partner.
const MAPS: [[usize; 4]; 8] = [
    [0, 1, 2, 3],
    [1, 0, 2, 3],
    [0, 1, 3, 2],
    [1, 0, 3, 2],
    [2, 3, 0, 1],
    [3, 2, 0, 1],
    [2, 3, 1, 0],
    [3, 2, 1, 0],
];

/// A linear form in `(S, j, k, S', j', k')` required to vanish.
pub type Delta = [i8; 6];

/// The two deltas of each propagator besides `delta_{SS'}`, written as
/// `lhs - rhs` with `S' = S` substituted where the text uses `S`.
const DELTAS: [[Delta; 2]; 8] = [
    [[0, 1, 0, 0, -1, 0], [0, 0, 1, 0, 0, -1]],
    [[-1, 1, 0, 0, 1, 0], [0, 0, 1, 0, 0, -1]],
    [[0, 1, 0, 0, -1, 0], [-1, 0, 1, 0, 0, 1]],
    [[-1, 1, 0, 0, 1, 0], [-1, 0, 1, 0, 0, 1]],
    [[0, 1, 0, 0, 0, -1], [0, 0, 1, 0, -1, 0]],
    [[-1, 1, 0, 0, 0, 1], [0, 0, 1, 0, -1, 0]],
    [[0, 1, 0, 0, 0, -1], [-1, 0, 1, 0, 1, 0]],
    [[-1, 1, 0, 0, 0, 1], [-1, 0, 1, 0, 1, 0]],
];

impl Propagator {
    pub fn new(index: u8) -> Result<Self> {
        if (1..=8).contains(&index) {
            Ok(Self(index))
        } else {
            Err(Error::Domain(format!("propagator index {index} not in 1..=8")))
        }
    }

    pub fn all() -> impl Iterator<Item = Propagator> {
        (1..=8).map(Propagator)
    }

    pub fn index(self) -> u8 {
        self.0
    }

    /// Corner map from the slots of the first vertex to the slots of the second.
    pub fn slot_map(self) -> [usize; 4] {
        MAPS[self.0 as usize - 1]
    }

    pub fn from_slot_map(m: [usize; 4]) -> Option<Self> {
        MAPS.iter().position(|x| *x == m).map(|i| Propagator(i as u8 + 1))
    }

    /// The same term seen from the partner vertex.
    pub fn inverse(self) -> Self {
        let m = self.slot_map();
        let mut inv = [0; 4];
        for (a, &b) in m.iter().enumerate() {
            inv[b] = a;
        }
        Self::from_slot_map(inv).expect("inverse of a propagator is a propagator")
    }

    /// Whether the pair of momenta `(j, S-j)` is sent to `(j', S'-j')`.
    pub fn is_parallel(self) -> bool {
        self.0 <= 4
    }

    pub fn deltas(self) -> [Delta; 2] {
        DELTAS[self.0 as usize - 1]
    }
}

/// Bijection from leaves to anti-leaves: leaf `i` is joined to anti-leaf `target[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct LeafPairing {
    pub target: Vec<usize>,
}

/// Perfect matching of true vertices with a propagator per pair. Pairs are
/// stored as `(v, w, P)` with `v < w`, sorted by `v`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct WickPairing {
    pub pairs: Vec<(usize, usize, Propagator)>,
}

impl WickPairing {
    /// Partner and propagator as seen from `v`.
    pub fn mate(&self, v: usize) -> Option<(usize, Propagator)> {
        self.pairs.iter().find_map(|&(a, b, p)| {
            if a == v {
                Some((b, p))
            } else if b == v {
                Some((a, p.inverse()))
            } else {
                None
            }
        })
    }
}

fn factorial(n: usize) -> BigUint {
    (2..=n).fold(BigUint::one(), |a, k| a * BigUint::from(k))
}

fn double_factorial(n: usize) -> BigUint {
    let mut acc = BigUint::one();
    let mut k = n;
    while k > 1 {
        acc *= BigUint::from(k - 1);
        k -= 2;
    }
    acc
}

/// All `(n+1)!` leaf pairings of `u`, in lexicographic order.
pub fn enumerate_leaf_pairings(u: &TwoRootedTree) -> Result<Vec<LeafPairing>> {
    let n = u.n();
    if n > LEAF_PAIRING_GUARD {
        return Err(Error::Guard {
            what: "leaf pairings",
            limit: LEAF_PAIRING_GUARD as u64,
            requested: n as u64,
        });
    }
    Ok(permutations(n + 1)
        .into_iter()
        .map(|target| LeafPairing { target })
        .collect())
}

fn permutations(m: usize) -> Vec<Vec<usize>> {
    let mut cur: Vec<usize> = (0..m).collect();
    let mut out = vec![cur.clone()];
    loop {
        let Some(i) = (1..m).rev().find(|&i| cur[i - 1] < cur[i]) else {
            return out;
        };
        let j = (i..m).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
        cur.swap(i - 1, j);
        cur[i..].reverse();
        out.push(cur.clone());
    }
}

/// Number of perfect matchings (`n!!` with `(n-1)!!` convention) times `8^{n/2}`.
pub fn count_wick_pairings(n: usize) -> BigUint {
    if n % 2 == 1 {
        return BigUint::from(0u32);
    }
    double_factorial(n) * BigUint::from(8u32).pow(n as u32 / 2)
}

/// All Wick pairings of `n` vertices: matchings in lexicographic order, each
/// with every propagator assignment.
pub fn enumerate_wick_pairings(n: usize) -> Result<Vec<WickPairing>> {
    if n % 2 == 1 {
        return Err(Error::OddOrder(n));
    }
    if n > 2 * LEAF_PAIRING_GUARD {
        return Err(Error::Guard {
            what: "wick pairings",
            limit: 2 * LEAF_PAIRING_GUARD as u64,
            requested: n as u64,
        });
    }
    let mut matchings = Vec::new();
    matchings_rec(&mut vec![false; n], &mut Vec::new(), &mut matchings);
    let mut out = Vec::new();
    for m in matchings {
        let k = m.len();
        let total = 8usize.pow(k as u32);
        for code in 0..total {
            let mut pairs = Vec::with_capacity(k);
            for (i, &(a, b)) in m.iter().enumerate() {
                let digit = (code / 8usize.pow((k - 1 - i) as u32)) % 8;
                pairs.push((a, b, Propagator(digit as u8 + 1)));
            }
            out.push(WickPairing { pairs });
        }
    }
    Ok(out)
}

fn matchings_rec(used: &mut Vec<bool>, cur: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
    let Some(a) = used.iter().position(|&u| !u) else {
        out.push(cur.clone());
        return;
    };
    used[a] = true;
    for b in a + 1..used.len() {
        if !used[b] {
            used[b] = true;
            cur.push((a, b));
            matchings_rec(used, cur, out);
            cur.pop();
            used[b] = false;
        }
    }
    used[a] = false;
}

/// Edge kinds of the expanded graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum EdgeKind {
    /// Tree edge between a slot and a vertex.
    Solid,
    /// Leaf joined to an anti-leaf by the average over initial data.
    Dashed,
}

/// A graph `(U, w, w')` at even order `n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExpansionGraph {
    tree: TwoRootedTree,
    pairing: LeafPairing,
    wick: WickPairing,
}

/// The key of the trivial graph: a bare dashed edge at the root.
pub const TRIVIAL_KEY: &str = "g0|t|w0|c";

impl ExpansionGraph {
    pub fn new(tree: TwoRootedTree, pairing: LeafPairing, wick: WickPairing) -> Result<Self> {
        let g = Self { tree, pairing, wick };
        g.validate()?;
        Ok(g)
    }

    pub fn trivial() -> Self {
        Self {
            tree: TwoRootedTree::trivial(),
            pairing: LeafPairing { target: vec![0] },
            wick: WickPairing { pairs: Vec::new() },
        }
    }

    pub fn n(&self) -> usize {
        self.tree.n()
    }

    pub fn tree(&self) -> &TwoRootedTree {
        &self.tree
    }

    pub fn pairing(&self) -> &LeafPairing {
        &self.pairing
    }

    pub fn wick(&self) -> &WickPairing {
        &self.wick
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        let bad = |m: String| Err(Error::Internal(m));
        if n % 2 == 1 {
            return Err(Error::OddOrder(n));
        }
        self.tree.validate()?;
        let mut seen = vec![false; n + 1];
        if self.pairing.target.len() != n + 1 {
            return bad("leaf pairing has wrong length".into());
        }
        for &t in &self.pairing.target {
            if t > n || std::mem::replace(&mut seen[t], true) {
                return bad("leaf pairing is not a bijection".into());
            }
        }
        let mut hit = vec![false; n];
        for &(a, b, _) in &self.wick.pairs {
            if a >= b || b >= n || std::mem::replace(&mut hit[a], true) || std::mem::replace(&mut hit[b], true) {
                return bad("wick pairing is not a perfect matching".into());
            }
        }
        if hit.iter().any(|h| !h) {
            return bad("wick pairing is not perfect".into());
        }
        Ok(())
    }

    /// `epsilon(U) = prod_v (-i or +i)`: `-i` for an in-going parent edge
    /// (alpha type), `+i` for an out-going one.
    pub fn sign(&self) -> i32 {
        tree_sign(&self.tree)
    }

    /// Solid edges as `(parent slot, child vertex)`.
    pub fn solid_edges(&self) -> Vec<(SlotRef, usize)> {
        (0..self.n()).map(|v| (self.tree.attach_of(v), v)).collect()
    }

    /// Dashed edges as `(leaf, anti-leaf)`.
    pub fn dashed_edges(&self) -> Vec<(SlotRef, SlotRef)> {
        let leaves = self.tree.leaves();
        let anti = self.tree.anti_leaves();
        leaves
            .into_iter()
            .zip(&self.pairing.target)
            .map(|(l, &t)| (l, anti[t]))
            .collect()
    }

    /// Number of dashed edges joining the tree half to the anti-tree half.
    pub fn crossing_dashed_edges(&self) -> usize {
        let side = |a: SlotRef| match a {
            SlotRef::Root(c) => c,
            SlotRef::Child(v, _) => self.tree.side(v),
        };
        self.dashed_edges()
            .into_iter()
            .filter(|&(l, a)| side(l) != side(a))
            .count()
    }

    /// Injective, stable textual key including heap labels.
    pub fn canonical_key(&self) -> String {
        let mut s = format!("g{}|t", self.n());
        for (v, a) in self.tree.attach().iter().enumerate() {
            if v > 0 {
                s.push(',');
            }
            match a {
                SlotRef::Root(Charge::Alpha) => s.push('a'),
                SlotRef::Root(Charge::AlphaBar) => s.push('b'),
                SlotRef::Child(p, c) => {
                    let _ = write!(s, "{}.{}", p + 1, c + 2);
                }
            }
        }
        s.push_str("|w");
        let targets: Vec<String> = self.pairing.target.iter().map(usize::to_string).collect();
        s.push_str(&targets.join(","));
        s.push_str("|c");
        let pairs: Vec<String> = self
            .wick
            .pairs
            .iter()
            .map(|(a, b, p)| format!("{}-{}:{}", a + 1, b + 1, p.0))
            .collect();
        s.push_str(&pairs.join(","));
        s
    }

    /// Decode a key produced by [`canonical_key`](Self::canonical_key) or
    /// [`heap_free_key`](Self::heap_free_key).
    pub fn from_key(key: &str) -> Result<Self> {
        let perr = |m: &str| Error::Parse(format!("{m} in key {key:?}"));
        let parts: Vec<&str> = key.split('|').collect();
        if parts.len() != 4 {
            return Err(perr("expected four fields"));
        }
        let n: usize = parts[0]
            .strip_prefix('g')
            .or_else(|| parts[0].strip_prefix('u'))
            .and_then(|x| x.parse().ok())
            .ok_or_else(|| perr("bad order field"))?;
        let tfield = parts[1].strip_prefix('t').ok_or_else(|| perr("bad tree field"))?;
        let mut attach = Vec::new();
        for tok in tfield.split(',').filter(|t| !t.is_empty()) {
            attach.push(match tok {
                "a" => SlotRef::Root(Charge::Alpha),
                "b" => SlotRef::Root(Charge::AlphaBar),
                _ => {
                    let (p, e) = tok.split_once('.').ok_or_else(|| perr("bad slot"))?;
                    let p: usize = p.parse().map_err(|_| perr("bad parent"))?;
                    let e: usize = e.parse().map_err(|_| perr("bad edge"))?;
                    if p == 0 || !(2..=4).contains(&e) {
                        return Err(perr("slot out of range"));
                    }
                    SlotRef::Child(p - 1, e - 2)
                }
            });
        }
        if attach.len() != n {
            return Err(perr("vertex count mismatch"));
        }
        let tree = TwoRootedTree::from_attach(&attach)?;
        let wfield = parts[2].strip_prefix('w').ok_or_else(|| perr("bad pairing field"))?;
        let target = wfield
            .split(',')
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<usize>().map_err(|_| perr("bad pairing entry")))
            .collect::<Result<Vec<_>>>()?;
        let cfield = parts[3].strip_prefix('c').ok_or_else(|| perr("bad wick field"))?;
        let mut pairs = Vec::new();
        for tok in cfield.split(',').filter(|t| !t.is_empty()) {
            let (ab, p) = tok.split_once(':').ok_or_else(|| perr("bad wick pair"))?;
            let (a, b) = ab.split_once('-').ok_or_else(|| perr("bad wick pair"))?;
            let a: usize = a.parse().map_err(|_| perr("bad wick vertex"))?;
            let b: usize = b.parse().map_err(|_| perr("bad wick vertex"))?;
            let p: u8 = p.parse().map_err(|_| perr("bad propagator"))?;
            if a == 0 || b == 0 {
                return Err(perr("wick vertex out of range"));
            }
            pairs.push((a - 1, b - 1, Propagator::new(p)?));
        }
        pairs.sort();
        Self::new(tree, LeafPairing { target }, WickPairing { pairs })
    }

    /// Key invariant under changes of heap labeling: vertices renumbered in
    /// depth-first preorder.
    pub fn heap_free_key(&self) -> String {
        let g = self.half_edges().to_expansion(LabelOrder::Preorder).expect("relabel of a valid graph");
        let mut k = g.canonical_key();
        k.replace_range(0..1, "u");
        k
    }

    /// Half-edge form used by face tracing, reductions and evaluation.
    pub fn half_edges(&self) -> HalfEdgeGraph {
        HalfEdgeGraph::from_expansion(self)
    }

    pub fn to_record(&self) -> GraphRecord {
        GraphRecord {
            key: self.canonical_key(),
            n: self.n(),
            sign: self.sign(),
            attach: self
                .tree
                .attach()
                .iter()
                .map(|a| match a {
                    SlotRef::Root(Charge::Alpha) => "a".to_string(),
                    SlotRef::Root(Charge::AlphaBar) => "b".to_string(),
                    SlotRef::Child(p, c) => format!("{}.{}", p + 1, c + 2),
                })
                .collect(),
            charges: (0..self.n()).map(|v| self.tree.charge(v)).collect(),
            pairing: self.pairing.target.clone(),
            matching: self.wick.pairs.iter().map(|&(a, b, _)| [a + 1, b + 1]).collect(),
            propagators: self.wick.pairs.iter().map(|p| p.2.index()).collect(),
        }
    }
}

/// Sign of a 2-rooted tree, `(-1)^{a + n/2}` with `a` the number of alpha vertices.
pub fn tree_sign(u: &TwoRootedTree) -> i32 {
    let n = u.n();
    let a = (0..n).filter(|&v| u.charge(v) == Charge::Alpha).count();
    if (a + n / 2) % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Serializable graph record for the CLI.
#[derive(Debug, Clone, Serialize)]
pub struct GraphRecord {
    pub key: String,
    pub n: usize,
    pub sign: i32,
    pub attach: Vec<String>,
    pub charges: Vec<Charge>,
    pub pairing: Vec<usize>,
    pub matching: Vec<[usize; 2]>,
    pub propagators: Vec<u8>,
}

/// The full family of order-`n` graphs, addressed by index in canonical order
/// (tree-major, then leaf pairing, then Wick pairing).
#[derive(Debug, Clone)]
pub struct GraphFamily {
    n: usize,
    trees: Arc<Vec<TwoRootedTree>>,
    pairings: Arc<Vec<LeafPairing>>,
    wicks: Arc<Vec<WickPairing>>,
}

impl GraphFamily {
    pub fn new(n: usize) -> Result<Self> {
        Self::with_guard(n, DEFAULT_ORDER_GUARD)
    }

    pub fn with_guard(n: usize, guard: usize) -> Result<Self> {
        if n % 2 == 1 {
            return Ok(Self {
                n,
                trees: Arc::new(Vec::new()),
                pairings: Arc::new(Vec::new()),
                wicks: Arc::new(Vec::new()),
            });
        }
        if n > guard {
            return Err(Error::Guard {
                what: "graph order",
                limit: guard as u64,
                requested: n as u64,
            });
        }
        let trees = enumerate_2rooted(n)?;
        let pairings = permutations(n + 1)
            .into_iter()
            .map(|target| LeafPairing { target })
            .collect();
        Ok(Self {
            n,
            trees: Arc::new(trees),
            pairings: Arc::new(pairings),
            wicks: Arc::new(enumerate_wick_pairings(n)?),
        })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.trees.len() * self.pairings.len() * self.wicks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of `(U, w)` prefixes; each carries `wick_count()` graphs.
    pub fn prefix_count(&self) -> usize {
        self.trees.len() * self.pairings.len()
    }

    pub fn wick_count(&self) -> usize {
        self.wicks.len()
    }

    pub fn get(&self, index: usize) -> ExpansionGraph {
        let w = self.wicks.len();
        let l = self.pairings.len();
        let (rest, wi) = (index / w, index % w);
        let (ti, li) = (rest / l, rest % l);
        ExpansionGraph {
            tree: self.trees[ti].clone(),
            pairing: self.pairings[li].clone(),
            wick: self.wicks[wi].clone(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = ExpansionGraph> + '_ {
        (0..self.len()).map(move |i| self.get(i))
    }
}

/// Total count `|trees| (n+1)! 8^{n/2} n!!`, zero for odd `n`.
pub fn count_graphs(n: usize) -> BigUint {
    if n % 2 == 1 {
        return BigUint::from(0u32);
    }
    crate::trees::count_2rooted(n) * factorial(n + 1) * count_wick_pairings(n)
}

/// Stream over every graph of order `n` (empty for odd `n`).
pub fn assemble_graphs(n: usize) -> Result<impl Iterator<Item = ExpansionGraph>> {
    let fam = GraphFamily::new(n)?;
    Ok((0..fam.len()).map(move |i| fam.get(i)))
}

/// Root half-edges and the half-edge id of slot `s` (0 = `e1`) of vertex `v`.
pub const ROOT_ALPHA: usize = 0;
pub const ROOT_BAR: usize = 1;

pub fn he(v: usize, s: usize) -> usize {
    2 + 4 * v + s
}

/// Vertex and slot of a non-root half-edge.
pub fn he_vertex(h: usize) -> (usize, usize) {
    ((h - 2) / 4, (h - 2) % 4)
}

/// How vertices are numbered when converting back to an [`ExpansionGraph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelOrder {
    /// Keep the current vertex order (must already be heap-ordered).
    Keep,
    /// Depth-first preorder from the root, alpha side first.
    Preorder,
}

/// Half-edge form: two root half-edges and four per vertex, with involutions
/// across edges and across corners (the root pseudo-corner joins the two root
/// half-edges).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HalfEdgeGraph {
    pub n: usize,
    pub charge: Vec<Charge>,
    pub edge: Vec<usize>,
    pub kind: Vec<EdgeKind>,
    pub corner: Vec<usize>,
}

impl HalfEdgeGraph {
    pub fn from_expansion(g: &ExpansionGraph) -> Self {
        let n = g.n();
        let m = 2 + 4 * n;
        let mut edge = vec![usize::MAX; m];
        let mut kind = vec![EdgeKind::Solid; m];
        let mut corner = vec![usize::MAX; m];
        let slot_he = |a: SlotRef| match a {
            SlotRef::Root(Charge::Alpha) => ROOT_ALPHA,
            SlotRef::Root(Charge::AlphaBar) => ROOT_BAR,
            SlotRef::Child(v, c) => he(v, c + 1),
        };
        for (a, v) in g.solid_edges() {
            let x = slot_he(a);
            edge[x] = he(v, 0);
            edge[he(v, 0)] = x;
        }
        for (l, a) in g.dashed_edges() {
            let (x, y) = (slot_he(l), slot_he(a));
            edge[x] = y;
            edge[y] = x;
            kind[x] = EdgeKind::Dashed;
            kind[y] = EdgeKind::Dashed;
        }
        corner[ROOT_ALPHA] = ROOT_BAR;
        corner[ROOT_BAR] = ROOT_ALPHA;
        for &(v, w, p) in &g.wick.pairs {
            for (a, &b) in p.slot_map().iter().enumerate() {
                corner[he(v, a)] = he(w, b);
                corner[he(w, b)] = he(v, a);
            }
        }
        Self {
            n,
            charge: (0..n).map(|v| g.tree.charge(v)).collect(),
            edge,
            kind,
            corner,
        }
    }

    pub fn half_edge_count(&self) -> usize {
        self.edge.len()
    }

    /// Wick partner of `v`.
    pub fn mate(&self, v: usize) -> usize {
        he_vertex(self.corner[he(v, 0)]).0
    }

    /// Propagator of the pair seen from `v`.
    pub fn propagator_from(&self, v: usize) -> Result<Propagator> {
        let mut m = [0; 4];
        for (a, x) in m.iter_mut().enumerate() {
            *x = he_vertex(self.corner[he(v, a)]).1;
        }
        Propagator::from_slot_map(m)
            .ok_or_else(|| Error::Internal(format!("corner map {m:?} at vertex {v} is not a propagator")))
    }

    /// Slot reference of a half-edge that is a parent-side slot (root or `e2..e4`).
    fn slot_of(h: usize) -> Option<SlotRef> {
        match h {
            ROOT_ALPHA => Some(SlotRef::Root(Charge::Alpha)),
            ROOT_BAR => Some(SlotRef::Root(Charge::AlphaBar)),
            _ => {
                let (v, s) = he_vertex(h);
                (s > 0).then_some(SlotRef::Child(v, s - 1))
            }
        }
    }

    /// Remove the vertices in `gone` and join half-edges `x` and `y` by a new
    /// edge of kind `k`. Remaining vertices keep their relative order.
    pub fn remove_and_join(&self, gone: &[usize], x: usize, y: usize, k: EdgeKind) -> Self {
        let mut newv = vec![usize::MAX; self.n];
        let mut next = 0;
        for (v, slot) in newv.iter_mut().enumerate() {
            if !gone.contains(&v) {
                *slot = next;
                next += 1;
            }
        }
        let map = |h: usize| -> usize {
            if h < 2 {
                h
            } else {
                let (v, s) = he_vertex(h);
                he(newv[v], s)
            }
        };
        let m = 2 + 4 * next;
        let mut edge = vec![usize::MAX; m];
        let mut kind = vec![EdgeKind::Solid; m];
        let mut corner = vec![usize::MAX; m];
        for h in 0..self.edge.len() {
            if h >= 2 && gone.contains(&he_vertex(h).0) {
                continue;
            }
            let nh = map(h);
            corner[nh] = map(self.corner[h]);
            if h == x || h == y {
                continue;
            }
            edge[nh] = map(self.edge[h]);
            kind[nh] = self.kind[h];
        }
        let (nx, ny) = (map(x), map(y));
        edge[nx] = ny;
        edge[ny] = nx;
        kind[nx] = k;
        kind[ny] = k;
        Self {
            n: next,
            charge: (0..self.n).filter(|v| !gone.contains(v)).map(|v| self.charge[v]).collect(),
            edge,
            kind,
            corner,
        }
    }

    /// Rebuild an expansion graph, checking every structural invariant.
    pub fn to_expansion(&self, order: LabelOrder) -> Result<ExpansionGraph> {
        let n = self.n;
        let bad = |m: String| Err(Error::Internal(m));
        let mut parent = vec![SlotRef::Root(Charge::Alpha); n];
        for (v, pv) in parent.iter_mut().enumerate() {
            let h = he(v, 0);
            if self.kind[h] != EdgeKind::Solid {
                return bad(format!("parent edge of vertex {v} is not solid"));
            }
            *pv = match Self::slot_of(self.edge[h]) {
                Some(a) => a,
                None => return bad(format!("vertex {v} hangs from a parent slot")),
            };
        }
        let perm: Vec<usize> = match order {
            LabelOrder::Keep => (0..n).collect(),
            LabelOrder::Preorder => {
                let mut kids: Vec<Vec<(SlotRef, usize)>> = vec![Vec::new(); n];
                let mut roots = Vec::new();
                for (v, &a) in parent.iter().enumerate() {
                    match a {
                        SlotRef::Root(c) => roots.push((c, v)),
                        SlotRef::Child(p, _) => kids[p].push((a, v)),
                    }
                }
                roots.sort();
                let mut out = Vec::with_capacity(n);
                let mut stack: Vec<usize> = roots.iter().rev().map(|r| r.1).collect();
                while let Some(v) = stack.pop() {
                    out.push(v);
                    let mut k = kids[v].clone();
                    k.sort();
                    stack.extend(k.iter().rev().map(|x| x.1));
                }
                if out.len() != n {
                    return bad("vertices unreachable from the root".into());
                }
                out
            }
        };
        let mut label = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            label[old] = new;
        }
        let relabel = |a: SlotRef| match a {
            SlotRef::Child(p, c) => SlotRef::Child(label[p], c),
            r => r,
        };
        let attach: Vec<SlotRef> = perm.iter().map(|&old| relabel(parent[old])).collect();
        let tree = TwoRootedTree::from_attach(&attach)?;
        for v in 0..n {
            if tree.charge(label[v]) != self.charge[v] {
                return bad(format!("charge mismatch at vertex {v}"));
            }
        }
        let to_he = |a: SlotRef| match a {
            SlotRef::Root(Charge::Alpha) => ROOT_ALPHA,
            SlotRef::Root(Charge::AlphaBar) => ROOT_BAR,
            SlotRef::Child(p, c) => he(perm[p], c + 1),
        };
        let anti = tree.anti_leaves();
        let mut target = Vec::with_capacity(n + 1);
        for l in tree.leaves() {
            let h = to_he(l);
            if self.kind[h] != EdgeKind::Dashed {
                return bad(format!("leaf {l:?} is not on a dashed edge"));
            }
            let other = Self::slot_of(self.edge[h]).map(relabel);
            match other.and_then(|o| anti.iter().position(|&a| a == o)) {
                Some(i) => target.push(i),
                None => return bad(format!("leaf {l:?} is not paired with an anti-leaf")),
            }
        }
        let mut pairs = Vec::with_capacity(n / 2);
        for v in 0..n {
            let w = self.mate(v);
            if label[v] < label[w] {
                pairs.push((label[v], label[w], self.propagator_from(v)?));
            }
        }
        pairs.sort();
        ExpansionGraph::new(tree, LeafPairing { target }, WickPairing { pairs })
    }
}
