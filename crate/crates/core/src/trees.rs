//! Heap-ordered q-ary trees, 1-rooted and 2-rooted, with orientations.
//!
//! Trees are generated by insertion: the vertex with label `k` attaches to
//! any open slot of the tree built from labels `1..k`. This produces every
//! heap-ordered tree exactly once.

use crate::error::{Error, Result};
use crate::scalar::Real;
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

/// Direction of a half-edge relative to the vertex (or root) it belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    In,
    Out,
}

impl Orientation {
    pub fn flip(self) -> Self {
        match self {
            Orientation::In => Orientation::Out,
            Orientation::Out => Orientation::In,
        }
    }
}

/// Edge type: `Alpha` edges carry `alpha`, `AlphaBar` edges its conjugate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Charge {
    Alpha,
    AlphaBar,
}

impl Charge {
    pub fn flip(self) -> Self {
        match self {
            Charge::Alpha => Charge::AlphaBar,
            Charge::AlphaBar => Charge::Alpha,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TreeKind {
    Tree,
    AntiTree,
}

/// Largest enumeration the tree generators will materialize.
pub const TREE_ENUMERATION_LIMIT: u64 = 3_000_000;

/// A heap-ordered q-ary 1-rooted tree. Vertex `v` (0-based) has heap label `v + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HeapTree {
    arity: usize,
    kind: TreeKind,
    /// `parent[v] = 0` for the root, otherwise the parent's label.
    parent: Vec<usize>,
    /// Child position `0..arity` of `v` under its parent (edge `e_{slot+2}`); 0 under the root.
    slot: Vec<usize>,
    /// Per vertex, orientation of half-edges `e1..e_{arity+1}`.
    orientation: Vec<Vec<Orientation>>,
    root_orientation: Orientation,
}

impl HeapTree {
    fn empty(arity: usize, kind: TreeKind) -> Self {
        let root_orientation = match kind {
            TreeKind::Tree => Orientation::Out,
            TreeKind::AntiTree => Orientation::In,
        };
        Self {
            arity,
            kind,
            parent: Vec::new(),
            slot: Vec::new(),
            orientation: Vec::new(),
            root_orientation,
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn kind(&self) -> TreeKind {
        self.kind
    }

    /// Number of true vertices `h`.
    pub fn size(&self) -> usize {
        self.parent.len()
    }

    pub fn parent(&self, v: usize) -> usize {
        self.parent[v]
    }

    pub fn slot(&self, v: usize) -> usize {
        self.slot[v]
    }

    pub fn orientation(&self, v: usize) -> &[Orientation] {
        &self.orientation[v]
    }

    pub fn root_orientation(&self) -> Orientation {
        self.root_orientation
    }

    /// Orientation of the half-edge at slot `s` of vertex label `p` (0 = root).
    fn slot_orientation(&self, p: usize, s: usize) -> Orientation {
        if p == 0 {
            self.root_orientation
        } else {
            self.orientation[p - 1][s + 1]
        }
    }

    /// Children of label `p` (0 = root), as labels, `None` for open slots.
    pub fn children(&self, p: usize) -> Vec<Option<usize>> {
        let k = if p == 0 { 1 } else { self.arity };
        let mut out = vec![None; k];
        for v in 0..self.size() {
            if self.parent[v] == p {
                out[self.slot[v]] = Some(v + 1);
            }
        }
        out
    }

    /// Open slots as `(label, slot, orientation)`; `Out` marks a leaf, `In` an anti-leaf.
    pub fn open_slots(&self) -> Vec<(usize, usize, Orientation)> {
        let mut out = Vec::new();
        for p in 0..=self.size() {
            for (s, c) in self.children(p).into_iter().enumerate() {
                if c.is_none() {
                    out.push((p, s, self.slot_orientation(p, s)));
                }
            }
        }
        out
    }

    pub fn leaf_count(&self) -> usize {
        self.open_slots()
            .iter()
            .filter(|s| s.2 == Orientation::Out)
            .count()
    }

    pub fn anti_leaf_count(&self) -> usize {
        self.open_slots()
            .iter()
            .filter(|s| s.2 == Orientation::In)
            .count()
    }

    /// Attach a new vertex with the next label at slot `s` of label `p`.
    fn attach(&mut self, p: usize, s: usize) {
        let e1 = self.slot_orientation(p, s).flip();
        let mut o = vec![e1.flip(); self.arity + 1];
        o[0] = e1;
        o[1] = e1;
        self.parent.push(p);
        self.slot.push(s);
        self.orientation.push(o);
    }

    /// Same tree with every half-edge reversed.
    pub fn flipped(&self) -> Self {
        let mut t = self.clone();
        t.kind = match self.kind {
            TreeKind::Tree => TreeKind::AntiTree,
            TreeKind::AntiTree => TreeKind::Tree,
        };
        t.root_orientation = self.root_orientation.flip();
        for o in &mut t.orientation {
            for x in o.iter_mut() {
                *x = x.flip();
            }
        }
        t
    }

    /// Check heap order, valence, orientation and leaf-count invariants.
    pub fn validate(&self) -> Result<()> {
        let h = self.size();
        let q = self.arity;
        let bad = |m: String| Err(Error::Internal(m));
        for v in 0..h {
            if self.parent[v] > v {
                return bad(format!("heap order broken at label {}", v + 1));
            }
            let o = &self.orientation[v];
            if o.len() != q + 1 || o[1] != o[0] || o[2..].iter().any(|&x| x == o[0]) {
                return bad(format!("orientation rule broken at label {}", v + 1));
            }
            if o[0] == self.slot_orientation(self.parent[v], self.slot[v]) {
                return bad(format!("edge into label {} not oriented", v + 1));
            }
        }
        for p in 0..=h {
            let cap = if p == 0 { 1 } else { q };
            let n = (0..h).filter(|&v| self.parent[v] == p).count();
            if n > cap || (0..h).any(|v| self.parent[v] == p && self.slot[v] >= cap) {
                return bad(format!("valence broken at label {p}"));
            }
        }
        let open = self.open_slots().len();
        if open != h * (q - 1) + 1 {
            return bad(format!("{open} open slots for h={h}"));
        }
        if q == 3 {
            let (l, a) = (self.leaf_count(), self.anti_leaf_count());
            let (l, a) = match self.kind {
                TreeKind::Tree => (l, a),
                TreeKind::AntiTree => (a, l),
            };
            if l != h + 1 || a != h {
                return bad(format!("leaf counts {l}/{a} for h={h}"));
            }
        }
        Ok(())
    }

    /// Depth-first serialization `(edge number, label, orientation)`; 0 marks an open slot.
    pub fn dfs_signature(&self) -> Vec<(u8, u32, Orientation)> {
        let mut out = Vec::with_capacity(self.size() * (self.arity + 1) + 1);
        self.dfs(0, &mut out);
        out
    }

    fn dfs(&self, p: usize, out: &mut Vec<(u8, u32, Orientation)>) {
        for (s, c) in self.children(p).into_iter().enumerate() {
            let edge = if p == 0 { 1 } else { s as u8 + 2 };
            out.push((edge, c.unwrap_or(0) as u32, self.slot_orientation(p, s)));
            if let Some(c) = c {
                self.dfs(c, out);
            }
        }
    }

    /// Plane shape with heap labels forgotten.
    pub fn shape_key(&self) -> Vec<bool> {
        self.dfs_signature().iter().map(|e| e.1 != 0).collect()
    }

    pub fn to_record(&self) -> TreeRecord {
        TreeRecord {
            arity: self.arity,
            kind: self.kind,
            parent: self.parent.clone(),
            slot: self.slot.iter().map(|&s| s + 2).collect(),
            labels: (1..=self.size()).collect(),
            root_orientation: self.root_orientation,
            orientations: self.orientation.clone(),
        }
    }
}

/// Compact serializable form of a [`HeapTree`]. `slot` holds edge numbers `2..=q+1`.
#[derive(Debug, Clone, Serialize)]
pub struct TreeRecord {
    pub arity: usize,
    pub kind: TreeKind,
    pub parent: Vec<usize>,
    pub slot: Vec<usize>,
    pub labels: Vec<usize>,
    pub root_orientation: Orientation,
    pub orientations: Vec<Vec<Orientation>>,
}

/// `prod_{k=1}^{h-1} (k(q-1)+1)`.
pub fn count_heap_trees_1rooted(q: usize, h: usize) -> Result<BigUint> {
    if q < 2 {
        return crate::error::domain(format!("arity {q} < 2"));
    }
    let mut acc = BigUint::one();
    for k in 1..h {
        acc *= BigUint::from(k * (q - 1) + 1);
    }
    Ok(acc)
}

/// `binom(qh+1, h) / (qh+1)`.
pub fn fuss_catalan(q: usize, h: usize) -> Result<BigUint> {
    if q < 2 {
        return crate::error::domain(format!("arity {q} < 2"));
    }
    let m = q * h + 1;
    let mut b = BigUint::one();
    for i in 0..h {
        b = b * BigUint::from(m - i) / BigUint::from(i + 1);
    }
    Ok(b / BigUint::from(m))
}

fn guard_count(what: &'static str, c: &BigUint) -> Result<()> {
    match c.to_u64() {
        Some(x) if x <= TREE_ENUMERATION_LIMIT => Ok(()),
        x => Err(Error::Guard {
            what,
            limit: TREE_ENUMERATION_LIMIT,
            requested: x.unwrap_or(u64::MAX),
        }),
    }
}

/// All heap-ordered q-ary 1-rooted trees with `h` vertices, in canonical order.
pub fn enumerate_heap_trees_1rooted(q: usize, h: usize) -> Result<Vec<HeapTree>> {
    guard_count("heap trees", &count_heap_trees_1rooted(q, h)?)?;
    let mut out = Vec::new();
    grow_1rooted(HeapTree::empty(q, TreeKind::Tree), h, &mut out);
    out.sort_by_cached_key(HeapTree::dfs_signature);
    Ok(out)
}

fn grow_1rooted(t: HeapTree, h: usize, out: &mut Vec<HeapTree>) {
    if t.size() == h {
        out.push(t);
        return;
    }
    for (p, s, _) in t.open_slots() {
        let mut u = t.clone();
        u.attach(p, s);
        grow_1rooted(u, h, out);
    }
}

/// Where a vertex of a 2-rooted tree hangs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SlotRef {
    /// One of the two root edges, identified by its type.
    Root(Charge),
    /// Child slot `s` (edge `e_{s+2}`) of vertex `v` (0-based).
    Child(usize, usize),
}

/// A heap-ordered ternary 2-rooted tree: a tree and an anti-tree glued at a
/// bivalent root. Vertex `v` has label `v + 1` in the global heap order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TwoRootedTree {
    attach: Vec<SlotRef>,
    charge: Vec<Charge>,
    children: Vec<[Option<usize>; 3]>,
    root_children: [Option<usize>; 2],
}

impl TwoRootedTree {
    pub fn trivial() -> Self {
        Self {
            attach: Vec::new(),
            charge: Vec::new(),
            children: Vec::new(),
            root_children: [None, None],
        }
    }

    /// Build from attachment points in label order; fails if a slot is reused
    /// or refers to a later vertex.
    pub fn from_attach(attach: &[SlotRef]) -> Result<Self> {
        let mut t = Self::trivial();
        for &a in attach {
            if !t.is_open(a) {
                return Err(Error::Parse(format!("slot {a:?} not open")));
            }
            t.push(a);
        }
        Ok(t)
    }

    fn is_open(&self, a: SlotRef) -> bool {
        match a {
            SlotRef::Root(c) => self.root_children[root_index(c)].is_none(),
            SlotRef::Child(v, s) => v < self.n() && s < 3 && self.children[v][s].is_none(),
        }
    }

    fn push(&mut self, a: SlotRef) {
        let v = self.n();
        let c = self.slot_charge(a);
        match a {
            SlotRef::Root(r) => self.root_children[root_index(r)] = Some(v),
            SlotRef::Child(p, s) => self.children[p][s] = Some(v),
        }
        self.attach.push(a);
        self.charge.push(c);
        self.children.push([None; 3]);
    }

    pub fn n(&self) -> usize {
        self.attach.len()
    }

    pub fn attach(&self) -> &[SlotRef] {
        &self.attach
    }

    pub fn attach_of(&self, v: usize) -> SlotRef {
        self.attach[v]
    }

    /// Type of the parent edge of `v`.
    pub fn charge(&self, v: usize) -> Charge {
        self.charge[v]
    }

    pub fn children(&self, v: usize) -> [Option<usize>; 3] {
        self.children[v]
    }

    pub fn root_child(&self, c: Charge) -> Option<usize> {
        self.root_children[root_index(c)]
    }

    /// Type carried by the edge at a slot.
    pub fn slot_charge(&self, a: SlotRef) -> Charge {
        match a {
            SlotRef::Root(c) => c,
            SlotRef::Child(v, 0) => self.charge[v].flip(),
            SlotRef::Child(v, _) => self.charge[v],
        }
    }

    /// Orientation of a half-edge at a slot; `Out` iff the edge is of type alpha.
    pub fn slot_orientation(&self, a: SlotRef) -> Orientation {
        match self.slot_charge(a) {
            Charge::Alpha => Orientation::Out,
            Charge::AlphaBar => Orientation::In,
        }
    }

    /// Orientation of half-edges `e1..e4` of `v`.
    pub fn orientation(&self, v: usize) -> [Orientation; 4] {
        let e1 = match self.charge[v] {
            Charge::Alpha => Orientation::In,
            Charge::AlphaBar => Orientation::Out,
        };
        [e1, e1, e1.flip(), e1.flip()]
    }

    /// Open slots in canonical order: root alpha, root alpha-bar, then child
    /// slots by vertex label and slot.
    pub fn open_slots(&self) -> Vec<SlotRef> {
        let mut out = Vec::with_capacity(2 * self.n() + 2);
        for c in [Charge::Alpha, Charge::AlphaBar] {
            if self.root_child(c).is_none() {
                out.push(SlotRef::Root(c));
            }
        }
        for v in 0..self.n() {
            for s in 0..3 {
                if self.children[v][s].is_none() {
                    out.push(SlotRef::Child(v, s));
                }
            }
        }
        out
    }

    /// Open alpha slots (leaves), canonical order.
    pub fn leaves(&self) -> Vec<SlotRef> {
        self.open_slots()
            .into_iter()
            .filter(|&a| self.slot_charge(a) == Charge::Alpha)
            .collect()
    }

    /// Open alpha-bar slots (anti-leaves), canonical order.
    pub fn anti_leaves(&self) -> Vec<SlotRef> {
        self.open_slots()
            .into_iter()
            .filter(|&a| self.slot_charge(a) == Charge::AlphaBar)
            .collect()
    }

    /// Half (tree side or anti-tree side) containing `v`.
    pub fn side(&self, mut v: usize) -> Charge {
        loop {
            match self.attach[v] {
                SlotRef::Root(c) => return c,
                SlotRef::Child(p, _) => v = p,
            }
        }
    }

    /// Split into the tree and anti-tree halves, with the global labels of each.
    pub fn halves(&self) -> ((HeapTree, Vec<usize>), (HeapTree, Vec<usize>)) {
        let build = |side: Charge, kind: TreeKind| {
            let mut t = HeapTree::empty(3, kind);
            let mut labels = Vec::new();
            let mut local = vec![0usize; self.n()];
            for v in 0..self.n() {
                if self.side(v) != side {
                    continue;
                }
                let (p, s) = match self.attach[v] {
                    SlotRef::Root(_) => (0, 0),
                    SlotRef::Child(p, s) => (local[p], s),
                };
                t.attach(p, s);
                labels.push(v + 1);
                local[v] = labels.len();
            }
            (t, labels)
        };
        (
            build(Charge::Alpha, TreeKind::Tree),
            build(Charge::AlphaBar, TreeKind::AntiTree),
        )
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        for v in 0..n {
            if let SlotRef::Child(p, _) = self.attach[v] {
                if p >= v {
                    return Err(Error::Internal(format!("heap order broken at label {}", v + 1)));
                }
            }
        }
        let (l, a) = (self.leaves().len(), self.anti_leaves().len());
        if l != n + 1 || a != n + 1 {
            return Err(Error::Internal(format!("{l} leaves, {a} anti-leaves at n={n}")));
        }
        let ((t, _), (u, _)) = self.halves();
        t.validate()?;
        u.validate()?;
        Ok(())
    }

    /// Depth-first serialization from the root, alpha side first.
    pub fn dfs_signature(&self) -> Vec<(u8, u32, Orientation)> {
        let mut out = Vec::with_capacity(3 * self.n() + 2);
        for (i, c) in [Charge::Alpha, Charge::AlphaBar].into_iter().enumerate() {
            let a = SlotRef::Root(c);
            let child = self.root_child(c);
            out.push((i as u8, child.map_or(0, |x| x as u32 + 1), self.slot_orientation(a)));
            if let Some(x) = child {
                self.dfs(x, &mut out);
            }
        }
        out
    }

    fn dfs(&self, v: usize, out: &mut Vec<(u8, u32, Orientation)>) {
        for s in 0..3 {
            let child = self.children[v][s];
            let o = self.slot_orientation(SlotRef::Child(v, s));
            out.push((s as u8 + 2, child.map_or(0, |x| x as u32 + 1), o));
            if let Some(x) = child {
                self.dfs(x, out);
            }
        }
    }

    /// Vertices in depth-first preorder (alpha side first).
    pub fn preorder(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.n());
        let mut stack: Vec<usize> = [Charge::AlphaBar, Charge::Alpha]
            .into_iter()
            .filter_map(|c| self.root_child(c))
            .collect();
        while let Some(v) = stack.pop() {
            out.push(v);
            for s in (0..3).rev() {
                if let Some(c) = self.children[v][s] {
                    stack.push(c);
                }
            }
        }
        out
    }

    /// Subtree sizes, indexed by vertex.
    pub fn subtree_sizes(&self) -> Vec<usize> {
        let mut size = vec![1usize; self.n()];
        for v in (0..self.n()).rev() {
            if let SlotRef::Child(p, _) = self.attach[v] {
                size[p] += size[v];
            }
        }
        size
    }

    /// Number of heap labelings of the underlying plane forest: `n! / prod subtree sizes`.
    pub fn heap_orderings(&self) -> BigUint {
        let mut num = BigUint::one();
        for k in 2..=self.n() {
            num *= BigUint::from(k);
        }
        let den = self
            .subtree_sizes()
            .into_iter()
            .fold(BigUint::one(), |acc, s| acc * BigUint::from(s));
        num / den
    }
}

fn root_index(c: Charge) -> usize {
    match c {
        Charge::Alpha => 0,
        Charge::AlphaBar => 1,
    }
}

/// `sum_h binom(n,h) |T_h| |T_{n-h}|`, which equals `2^n n!` for ternary trees.
pub fn count_2rooted(n: usize) -> BigUint {
    let mut total = BigUint::from(0u32);
    for h in 0..=n {
        let mut b = BigUint::one();
        for i in 0..h {
            b = b * BigUint::from(n - i) / BigUint::from(i + 1);
        }
        let x = count_heap_trees_1rooted(3, h).expect("q=3");
        let y = count_heap_trees_1rooted(3, n - h).expect("q=3");
        total += b * x * y;
    }
    total
}

/// All heap-ordered 2-rooted ternary trees with `n` vertices, canonical order.
pub fn enumerate_2rooted(n: usize) -> Result<Vec<TwoRootedTree>> {
    guard_count("2-rooted trees", &count_2rooted(n))?;
    let mut out = Vec::new();
    grow_2rooted(TwoRootedTree::trivial(), n, &mut out);
    out.sort_by_cached_key(TwoRootedTree::dfs_signature);
    Ok(out)
}

fn grow_2rooted(t: TwoRootedTree, n: usize, out: &mut Vec<TwoRootedTree>) {
    if t.n() == n {
        out.push(t);
        return;
    }
    for a in t.open_slots() {
        let mut u = t.clone();
        u.push(a);
        grow_2rooted(u, n, out);
    }
}

/// Truncated tree sum and truncated Taylor series of the closed-form solution
/// `x0 (1 - (q-1) lambda t x0^(q-1))^(-1/(q-1))` of `dx/dt = lambda x^q`.
pub fn scalar_flow_check<T: Real>(q: usize, lambda: T, x0: T, order: usize, t: T) -> Result<(T, T)> {
    let (tree, taylor) = scalar_flow_coefficients(q, lambda, x0, order)?;
    let growth = T::of_usize(q - 1) * lambda.abs() * x0.abs().powi(q as i32 - 1);
    if growth > T::zero() && t.abs() >= T::one() / growth {
        return crate::error::domain(format!(
            "t = {t} outside the radius {}",
            T::one() / growth
        ));
    }
    let horner = |c: &[T]| c.iter().rev().fold(T::zero(), |acc, &x| acc * t + x);
    Ok((horner(&tree), horner(&taylor)))
}

/// Taylor coefficients of the flow through `order`: first from the tree sum
/// `(1/h!) sum_T lambda^h x0^{leaves}`, then from the generalized binomial series.
pub fn scalar_flow_coefficients<T: Real>(q: usize, lambda: T, x0: T, order: usize) -> Result<(Vec<T>, Vec<T>)> {
    if q < 2 {
        return crate::error::domain(format!("arity {q} < 2"));
    }
    let mut tree = Vec::with_capacity(order + 1);
    let mut fact = T::one();
    for h in 0..=order {
        if h > 0 {
            fact *= T::of_usize(h);
        }
        let mut acc = T::zero();
        for tr in enumerate_heap_trees_1rooted(q, h)? {
            let leaves = tr.open_slots().len();
            acc += lambda.powi(tr.size() as i32) * x0.powi(leaves as i32);
        }
        tree.push(acc / fact);
    }
    let a = -T::one() / T::of_usize(q - 1);
    let z = -T::of_usize(q - 1) * lambda * x0.powi(q as i32 - 1);
    let mut binom = T::one();
    let mut zp = T::one();
    let mut taylor = Vec::with_capacity(order + 1);
    for h in 0..=order {
        if h > 0 {
            binom = binom * (a - T::of_usize(h - 1)) / T::of_usize(h);
            zp *= z;
        }
        taylor.push(x0 * binom * zp);
    }
    Ok((tree, taylor))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_vertex_orientations() {
        let mut t = HeapTree::empty(3, TreeKind::Tree);
        t.attach(0, 0);
        assert_eq!(
            t.orientation(0),
            &[Orientation::In, Orientation::In, Orientation::Out, Orientation::Out]
        );
        assert_eq!(t.leaf_count(), 2);
        assert_eq!(t.anti_leaf_count(), 1);
        t.validate().unwrap();
        let u = t.flipped();
        assert_eq!(u.leaf_count(), 1);
        u.validate().unwrap();
    }

    #[test]
    fn two_rooted_charges() {
        let t = TwoRootedTree::from_attach(&[SlotRef::Root(Charge::Alpha), SlotRef::Child(0, 0)]).unwrap();
        assert_eq!(t.charge(1), Charge::AlphaBar);
        assert_eq!(t.leaves().len(), 3);
        t.validate().unwrap();
        assert!(TwoRootedTree::from_attach(&[SlotRef::Child(0, 0)]).is_err());
    }

    #[test]
    fn heap_orderings_of_chain_and_forest() {
        let chain = TwoRootedTree::from_attach(&[SlotRef::Root(Charge::Alpha), SlotRef::Child(0, 1)]).unwrap();
        assert_eq!(chain.heap_orderings(), BigUint::one());
        let split =
            TwoRootedTree::from_attach(&[SlotRef::Root(Charge::Alpha), SlotRef::Root(Charge::AlphaBar)]).unwrap();
        assert_eq!(split.heap_orderings(), BigUint::from(2u32));
    }
}
