//! Stranded representation: each Wick pair becomes an 8-valent node with
//! four corners, strands close into faces, and the node-face incidence
//! matrix fixes the number of independent face momenta.

use crate::error::{Error, Result};
use crate::exact::{rank_i64, rref_with_order};
use crate::graph::{he, he_vertex, EdgeKind, ExpansionGraph, HalfEdgeGraph, Propagator};
use num_rational::Ratio;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    /// The Wick pair `(v, w)`, `v < w`.
    pub vertices: (usize, usize),
    pub propagator: Propagator,
    /// Corner pattern class: `(j, S-j)` slots meet `(j', S'-j')` slots.
    pub parallel: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Face {
    /// Half-edges in traversal order.
    pub half_edges: Vec<usize>,
    /// Corners visited, in traversal order (the root pseudo-corner excluded).
    pub corners: Vec<usize>,
    /// Number of dashed edges traversed, `L^alpha_f`.
    pub dashed: usize,
}

impl Face {
    pub fn length(&self) -> usize {
        self.corners.len()
    }
}

#[derive(Debug, Clone)]
pub struct StrandedGraph {
    pub n: usize,
    pub nodes: Vec<Node>,
    /// Corner `4i + a` of node `i` holds slot `a` of the node's first vertex.
    pub corner_face: Vec<usize>,
    pub faces: Vec<Face>,
    /// Face through the root; always 0.
    pub root_face: usize,
    half: HalfEdgeGraph,
}

impl StrandedGraph {
    pub fn half_edges(&self) -> &HalfEdgeGraph {
        &self.half
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    /// `F_l` histogram: entry `l` counts faces of length `l`.
    pub fn length_histogram(&self) -> Vec<usize> {
        let max = self.faces.iter().map(Face::length).max().unwrap_or(0);
        let mut h = vec![0; max + 1];
        for f in &self.faces {
            h[f.length()] += 1;
        }
        h
    }
}

/// Corner id of a true half-edge in `half`.
fn corner_of(half: &HalfEdgeGraph, node_of: &[usize], h: usize) -> usize {
    let (v, a) = he_vertex(h);
    let w = half.mate(v);
    let node = node_of[v];
    if v < w {
        4 * node + a
    } else {
        4 * node + he_vertex(half.corner[h]).1
    }
}

pub fn to_stranded(g: &ExpansionGraph) -> Result<StrandedGraph> {
    from_half_edges(g.half_edges())
}

pub fn from_half_edges(half: HalfEdgeGraph) -> Result<StrandedGraph> {
    let n = half.n;
    let mut nodes = Vec::with_capacity(n / 2);
    let mut node_of = vec![usize::MAX; n];
    for v in 0..n {
        let w = half.mate(v);
        if w == v || half.mate(w) != v {
            return Err(Error::Internal(format!("inconsistent corner pairing at vertex {v}")));
        }
        if v < w {
            let p = half.propagator_from(v)?;
            node_of[v] = nodes.len();
            node_of[w] = nodes.len();
            nodes.push(Node {
                vertices: (v, w),
                propagator: p,
                parallel: p.is_parallel(),
            });
        }
    }
    let m = half.half_edge_count();
    let mut seen = vec![false; m];
    let mut faces = Vec::new();
    let mut corner_face = vec![usize::MAX; 2 * n];
    for start in 0..m {
        if seen[start] {
            continue;
        }
        let mut face = Face {
            half_edges: Vec::new(),
            corners: Vec::new(),
            dashed: 0,
        };
        let mut cur = start;
        loop {
            let x = half.edge[cur];
            if seen[cur] || seen[x] {
                return Err(Error::Internal("strand revisited while tracing a face".into()));
            }
            seen[cur] = true;
            seen[x] = true;
            face.half_edges.push(cur);
            face.half_edges.push(x);
            if half.kind[cur] == EdgeKind::Dashed {
                face.dashed += 1;
            }
            if x >= 2 {
                let c = corner_of(&half, &node_of, x);
                corner_face[c] = faces.len();
                face.corners.push(c);
            }
            cur = half.corner[x];
            if cur == start {
                break;
            }
        }
        faces.push(face);
    }
    Ok(StrandedGraph {
        n,
        nodes,
        corner_face,
        faces,
        root_face: 0,
        half,
    })
}

/// Incidence matrix, its rank and the independent face basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceData {
    /// `V x F` matrix `E = zeta eta`.
    pub e: Vec<Vec<i64>>,
    pub rank: usize,
    /// Independent faces, root face first.
    pub independent: Vec<usize>,
    /// Dependent faces (pivot columns).
    pub dependent: Vec<usize>,
    /// `a[j][k]`: dependent momentum `j` as a combination of independent momenta.
    pub a: Vec<Vec<Ratio<i64>>>,
    /// Dashed length of each face.
    pub dashed: Vec<usize>,
}

impl IncidenceData {
    pub fn face_count(&self) -> usize {
        self.dashed.len()
    }

    /// `I = F - R - 1`, the number of free face momenta besides the root face.
    pub fn free_faces(&self) -> usize {
        self.face_count() - self.rank - 1
    }
}

/// `zeta = +1` on the corners of the first vertex's slots `e1, e2`, `-1` on `e3, e4`.
fn zeta(a: usize) -> i64 {
    if a < 2 {
        1
    } else {
        -1
    }
}

pub fn incidence(gs: &StrandedGraph) -> IncidenceData {
    incidence_with_pivots(gs, None).expect("greedy pivoting cannot fail")
}

/// Incidence data with an explicit pivot preference. `order` lists the columns
/// tried as dependent faces; the default is left to right with the root face
/// excluded. Fails if the requested order does not span the rank.
pub fn incidence_with_pivots(gs: &StrandedGraph, order: Option<&[usize]>) -> Result<IncidenceData> {
    let f = gs.face_count();
    let v = gs.nodes.len();
    let mut e = vec![vec![0i64; f]; v];
    for (c, &face) in gs.corner_face.iter().enumerate() {
        e[c / 4][face] += zeta(c % 4);
    }
    let rank = rank_i64(&e);
    let default: Vec<usize> = (1..f).collect();
    let order = order.unwrap_or(&default);
    if order.contains(&gs.root_face) {
        return Err(Error::Domain("the root face is always independent".into()));
    }
    let mut m: Vec<Vec<Ratio<i64>>> = e
        .iter()
        .map(|row| row.iter().map(|&x| Ratio::from_integer(x)).collect())
        .collect();
    let dependent = rref_with_order(&mut m, Some(order));
    if dependent.len() != rank {
        return Err(Error::Domain(format!(
            "pivot order {order:?} spans rank {} of {rank}",
            dependent.len()
        )));
    }
    let independent: Vec<usize> = (0..f).filter(|c| !dependent.contains(c)).collect();
    let a = (0..rank)
        .map(|i| independent.iter().map(|&k| -m[i][k]).collect())
        .collect();
    Ok(IncidenceData {
        e,
        rank,
        independent,
        dependent,
        a,
        dashed: gs.faces.iter().map(|x| x.dashed).collect(),
    })
}

/// `d(G) = n - (F - R - 1)`.
pub fn degree(g: &ExpansionGraph) -> Result<usize> {
    let gs = to_stranded(g)?;
    let inc = incidence(&gs);
    let free = inc.free_faces();
    g.n()
        .checked_sub(free)
        .ok_or_else(|| Error::Internal(format!("negative degree: n={} I={free}", g.n())))
}

/// Check the identities every stranded graph must satisfy.
pub fn check_invariants(gs: &StrandedGraph, inc: &IncidenceData) -> Result<()> {
    let n = gs.n;
    let bad = |m: String| Err(Error::Internal(m));
    let total: usize = gs.faces.iter().map(Face::length).sum();
    if total != 2 * n {
        return bad(format!("total face length {total} != 2n"));
    }
    if 2 * gs.face_count() > 3 * n + 2 {
        return bad(format!("{} faces exceed 3n/2+1", gs.face_count()));
    }
    let through_root = gs
        .faces
        .iter()
        .filter(|f| f.half_edges.iter().any(|&h| h < 2))
        .count();
    if through_root != 1 || !gs.faces[0].half_edges.contains(&0) {
        return bad("root face is not unique or not first".into());
    }
    for r in &inc.e {
        if r.iter().sum::<i64>() != 0 {
            return bad("incidence row does not sum to zero".into());
        }
    }
    if inc.face_count() < inc.rank + 1 {
        return bad("I < 0".into());
    }
    Ok(())
}

/// Slot at vertex `v` of a corner id.
pub fn corner_slot(gs: &StrandedGraph, c: usize) -> (usize, usize) {
    let node = &gs.nodes[c / 4];
    (node.vertices.0, c % 4)
}

#[doc(hidden)]
pub fn corner_half_edge(gs: &StrandedGraph, c: usize) -> usize {
    let (v, a) = corner_slot(gs, c);
    he(v, a)
}
