//! The combinatorial stand-in for a drawing on the torus: a circular
//! reference order of the vertices (a convex chord drawing placed on a disk
//! of the torus), a rotation system, a symmetric crossing-parity matrix over
//! edges, and a two-bit homology vector per edge measured against a fixed
//! meridian/equator basis.
//!
//! A closed walk's homology class is the sum of its edges' vectors; two
//! disjoint closed walks cross oddly exactly when the symplectic form
//! `u1*v2 + u2*v1` of their classes is one.

use crate::graph::{EdgeId, Graph, VertexId};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SchemeError {
    #[error("reference order is not a permutation of 0..n")]
    OrderNotPermutation,
    #[error("rotation at vertex {0} is not a permutation of its incident edges")]
    RotationMismatch(VertexId),
    #[error("parity matrix size {0} does not match edge count {1}")]
    ParitySizeMismatch(usize, usize),
    #[error("homology vector count {0} does not match edge count {1}")]
    HomologySizeMismatch(usize, usize),
    #[error("walk is not closed (first and last vertex differ)")]
    WalkNotClosed,
    #[error("walk step {0}-{1} is not an edge")]
    WalkStepNotEdge(VertexId, VertexId),
    #[error("cycle is invalid: {0}")]
    BadCycle(String),
    #[error("paths do not share both endpoints")]
    PathEndpointMismatch,
    #[error("paths are not internally disjoint")]
    PathsNotInternallyDisjoint,
    #[error("malformed scheme document: {0}")]
    BadDocument(String),
}

/// Z2 x Z2 homology class of a closed curve on the torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Hom2 {
    pub h1: bool,
    pub h2: bool,
}

impl Hom2 {
    pub const ZERO: Hom2 = Hom2 { h1: false, h2: false };

    pub fn new(h1: bool, h2: bool) -> Self {
        Hom2 { h1, h2 }
    }

    /// The four classes in a fixed order: 00, 10, 01, 11.
    pub fn from_index(i: u8) -> Self {
        Hom2 {
            h1: i & 1 == 1,
            h2: i >> 1 & 1 == 1,
        }
    }

    pub fn index(self) -> u8 {
        self.h1 as u8 | (self.h2 as u8) << 1
    }

    pub fn is_zero(self) -> bool {
        !self.h1 && !self.h2
    }

    pub fn add(self, other: Hom2) -> Hom2 {
        Hom2 {
            h1: self.h1 ^ other.h1,
            h2: self.h2 ^ other.h2,
        }
    }

    /// Intersection form (0 1; 1 0): odd crossing between disjoint closed
    /// curves iff their classes differ and neither vanishes.
    pub fn symplectic(self, other: Hom2) -> bool {
        (self.h1 & other.h2) ^ (self.h2 & other.h1)
    }
}

pub fn symplectic(u: Hom2, v: Hom2) -> bool {
    u.symplectic(v)
}

impl Serialize for Hom2 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        (self.h1 as u8, self.h2 as u8).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Hom2 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let (a, b) = <(u8, u8)>::deserialize(d)?;
        if a > 1 || b > 1 {
            return Err(D::Error::custom("homology bits must be 0 or 1"));
        }
        Ok(Hom2::new(a == 1, b == 1))
    }
}

/// Symmetric edge-by-edge crossing parity matrix with a zero diagonal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityMatrix {
    m: usize,
    words: usize,
    bits: Vec<u64>,
}

impl ParityMatrix {
    pub fn zeros(m: usize) -> Self {
        let words = crate::gf2::words_for(m).max(1);
        ParityMatrix {
            m,
            words,
            bits: vec![0; m * words],
        }
    }

    pub fn size(&self) -> usize {
        self.m
    }

    pub fn get(&self, e: EdgeId, f: EdgeId) -> bool {
        if e == f {
            return false;
        }
        crate::gf2::bit_get(&self.bits[e * self.words..(e + 1) * self.words], f)
    }

    pub fn set(&mut self, e: EdgeId, f: EdgeId, value: bool) {
        assert_ne!(e, f, "parity matrix diagonal is fixed at zero");
        let w = self.words;
        crate::gf2::bit_set(&mut self.bits[e * w..(e + 1) * w], f, value);
        crate::gf2::bit_set(&mut self.bits[f * w..(f + 1) * w], e, value);
    }

    pub fn toggle(&mut self, e: EdgeId, f: EdgeId) {
        assert_ne!(e, f, "parity matrix diagonal is fixed at zero");
        let w = self.words;
        crate::gf2::bit_toggle(&mut self.bits[e * w..(e + 1) * w], f);
        crate::gf2::bit_toggle(&mut self.bits[f * w..(f + 1) * w], e);
    }

    /// True if `e` crosses every other edge evenly.
    pub fn row_is_zero(&self, e: EdgeId) -> bool {
        crate::gf2::is_zero(&self.bits[e * self.words..(e + 1) * self.words])
    }

    pub fn is_symmetric_zero_diagonal(&self) -> bool {
        for e in 0..self.m {
            if self.get(e, e) {
                return false;
            }
            for f in e + 1..self.m {
                if self.get(e, f) != self.get(f, e) {
                    return false;
                }
            }
        }
        true
    }

    /// Copy into a matrix over `new_m >= m` edges; new rows and columns zero.
    pub fn expanded(&self, new_m: usize) -> ParityMatrix {
        assert!(new_m >= self.m);
        let mut out = ParityMatrix::zeros(new_m);
        for e in 0..self.m {
            for f in e + 1..self.m {
                if self.get(e, f) {
                    out.set(e, f, true);
                }
            }
        }
        out
    }

    /// Copy into a matrix with edge `gone` removed; ids above shift down.
    pub fn with_edge_removed(&self, gone: EdgeId) -> ParityMatrix {
        let mut out = ParityMatrix::zeros(self.m - 1);
        let map = |e: EdgeId| if e > gone { e - 1 } else { e };
        for e in 0..self.m {
            for f in e + 1..self.m {
                if e != gone && f != gone && self.get(e, f) {
                    out.set(map(e), map(f), true);
                }
            }
        }
        out
    }

    /// Upper triangle, row-major, bit-packed msb-first, lowercase hex.
    pub fn to_hex(&self) -> String {
        let npairs = self.m * self.m.saturating_sub(1) / 2;
        let mut bytes = vec![0u8; (npairs + 7) / 8];
        let mut k = 0;
        for e in 0..self.m {
            for f in e + 1..self.m {
                if self.get(e, f) {
                    bytes[k / 8] |= 1 << (7 - k % 8);
                }
                k += 1;
            }
        }
        let mut s = String::with_capacity(bytes.len() * 2);
        for b in bytes {
            s.push_str(&format!("{b:02x}"));
        }
        s
    }

    pub fn from_hex(m: usize, hex: &str) -> Result<ParityMatrix, SchemeError> {
        let npairs = m * m.saturating_sub(1) / 2;
        let expect = (npairs + 7) / 8;
        if hex.len() != expect * 2 {
            return Err(SchemeError::BadDocument(format!(
                "parity hex length {} does not match {} pairs",
                hex.len(),
                npairs
            )));
        }
        let mut bytes = Vec::with_capacity(expect);
        for i in 0..expect {
            let b = u8::from_str_radix(&hex[i * 2..i * 2 + 2], 16)
                .map_err(|e| SchemeError::BadDocument(e.to_string()))?;
            bytes.push(b);
        }
        let mut out = ParityMatrix::zeros(m);
        let mut k = 0;
        for e in 0..m {
            for f in e + 1..m {
                if bytes[k / 8] >> (7 - k % 8) & 1 == 1 {
                    out.set(e, f, true);
                }
                k += 1;
            }
        }
        // Padding bits past the last pair must be zero.
        for k in npairs..expect * 8 {
            if bytes[k / 8] >> (7 - k % 8) & 1 == 1 {
                return Err(SchemeError::BadDocument("nonzero padding bits".into()));
            }
        }
        Ok(out)
    }
}

/// Cyclic order of edge ends around every vertex. For simple graphs an end
/// at `v` is identified by its edge id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RotationSystem {
    pub at: Vec<Vec<EdgeId>>,
}

impl RotationSystem {
    pub fn validate(&self, g: &Graph) -> Result<(), SchemeError> {
        if self.at.len() != g.n() {
            return Err(SchemeError::RotationMismatch(self.at.len().min(g.n())));
        }
        for v in 0..g.n() {
            let mut have: Vec<EdgeId> = self.at[v].clone();
            have.sort_unstable();
            let mut want: Vec<EdgeId> = g.incident_edges(v).collect();
            want.sort_unstable();
            if have != want {
                return Err(SchemeError::RotationMismatch(v));
            }
        }
        Ok(())
    }

    /// Equality of the cyclic sequences at `v`, ignoring the linear cut.
    pub fn cyclic_eq_at(&self, other: &RotationSystem, v: VertexId) -> bool {
        cyclic_eq(&self.at[v], &other.at[v])
    }
}

pub fn cyclic_eq(a: &[EdgeId], b: &[EdgeId]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    if a.is_empty() {
        return true;
    }
    (0..a.len()).any(|s| (0..a.len()).all(|i| a[(s + i) % a.len()] == b[i]))
}

/// A simple cycle given by its vertex sequence (no repeated vertices).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cycle {
    vertices: Vec<VertexId>,
    edges: Vec<EdgeId>,
}

impl Cycle {
    pub fn new(g: &Graph, vertices: Vec<VertexId>) -> Result<Cycle, SchemeError> {
        if vertices.len() < 3 {
            return Err(SchemeError::BadCycle("fewer than three vertices".into()));
        }
        let mut sorted = vertices.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != vertices.len() {
            return Err(SchemeError::BadCycle("repeated vertex".into()));
        }
        let mut edges = Vec::with_capacity(vertices.len());
        for i in 0..vertices.len() {
            let u = vertices[i];
            let v = vertices[(i + 1) % vertices.len()];
            let e = g
                .edge_between(u, v)
                .ok_or(SchemeError::WalkStepNotEdge(u, v))?;
            edges.push(e);
        }
        Ok(Cycle { vertices, edges })
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn edges(&self) -> &[EdgeId] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains_vertex(&self, v: VertexId) -> bool {
        self.vertices.contains(&v)
    }
}

/// Crossing parities of the reference chord drawing: all vertices on a
/// circle in the given order, edges as chords. Two chords cross exactly when
/// their endpoints strictly interleave.
pub fn reference_parities(g: &Graph, order: &[VertexId]) -> Result<ParityMatrix, SchemeError> {
    let pos = positions(g.n(), order)?;
    let mut p = ParityMatrix::zeros(g.m());
    for pair in g.independent_pairs() {
        let (u, v) = g.edge(pair.e);
        let (s, t) = g.edge(pair.f);
        if chords_interleave(g.n(), pos[u], pos[v], pos[s], pos[t]) {
            p.set(pair.e, pair.f, true);
        }
    }
    Ok(p)
}

fn positions(n: usize, order: &[VertexId]) -> Result<Vec<usize>, SchemeError> {
    if order.len() != n {
        return Err(SchemeError::OrderNotPermutation);
    }
    let mut pos = vec![usize::MAX; n];
    for (i, &v) in order.iter().enumerate() {
        if v >= n || pos[v] != usize::MAX {
            return Err(SchemeError::OrderNotPermutation);
        }
        pos[v] = i;
    }
    Ok(pos)
}

fn chords_interleave(n: usize, pu: usize, pv: usize, ps: usize, pt: usize) -> bool {
    if pu == ps || pu == pt || pv == ps || pv == pt {
        return false;
    }
    let rel = |x: usize| (x + n - pu) % n;
    let (v, s, t) = (rel(pv), rel(ps), rel(pt));
    (s < v) != (t < v)
}

/// Rotation induced by the circular order: at `v`, neighbors sorted by their
/// clockwise distance from `v` along the circle.
pub fn reference_rotation(g: &Graph, order: &[VertexId]) -> Result<RotationSystem, SchemeError> {
    let pos = positions(g.n(), order)?;
    let n = g.n();
    let mut at = Vec::with_capacity(n);
    for v in 0..n {
        let mut ends: Vec<(usize, EdgeId)> = g
            .neighbors(v)
            .iter()
            .map(|&(w, e)| ((pos[w] + n - pos[v]) % n, e))
            .collect();
        ends.sort_unstable();
        at.push(ends.into_iter().map(|(_, e)| e).collect());
    }
    Ok(RotationSystem { at })
}

/// The full drawing model. Values are immutable; the move calculus returns
/// fresh schemes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DrawingScheme {
    pub graph: Graph,
    pub order: Vec<VertexId>,
    pub rotation: RotationSystem,
    pub parity: ParityMatrix,
    pub homology: Vec<Hom2>,
}

impl DrawingScheme {
    pub fn new(
        graph: Graph,
        order: Vec<VertexId>,
        rotation: RotationSystem,
        parity: ParityMatrix,
        homology: Vec<Hom2>,
    ) -> Result<Self, SchemeError> {
        positions(graph.n(), &order)?;
        rotation.validate(&graph)?;
        if parity.size() != graph.m() {
            return Err(SchemeError::ParitySizeMismatch(parity.size(), graph.m()));
        }
        if homology.len() != graph.m() {
            return Err(SchemeError::HomologySizeMismatch(homology.len(), graph.m()));
        }
        Ok(DrawingScheme {
            graph,
            order,
            rotation,
            parity,
            homology,
        })
    }

    /// The undisturbed reference drawing: chord parities, induced rotation,
    /// vanishing homology everywhere.
    pub fn reference(graph: Graph, order: Vec<VertexId>) -> Result<Self, SchemeError> {
        let parity = reference_parities(&graph, &order)?;
        let rotation = reference_rotation(&graph, &order)?;
        let homology = vec![Hom2::ZERO; graph.m()];
        DrawingScheme::new(graph, order, rotation, parity, homology)
    }

    /// Z2 sum of edge vectors along a closed walk, multiplicities counted.
    /// The walk lists vertices and must end where it starts.
    pub fn walk_homology(&self, walk: &[VertexId]) -> Result<Hom2, SchemeError> {
        if walk.len() < 2 {
            return if walk.len() == 1 {
                Ok(Hom2::ZERO)
            } else {
                Err(SchemeError::WalkNotClosed)
            };
        }
        if walk.first() != walk.last() {
            return Err(SchemeError::WalkNotClosed);
        }
        let mut h = Hom2::ZERO;
        for step in walk.windows(2) {
            let e = self
                .graph
                .edge_between(step[0], step[1])
                .ok_or(SchemeError::WalkStepNotEdge(step[0], step[1]))?;
            h = h.add(self.homology[e]);
        }
        Ok(h)
    }

    pub fn cycle_homology(&self, c: &Cycle) -> Hom2 {
        c.edges()
            .iter()
            .fold(Hom2::ZERO, |h, &e| h.add(self.homology[e]))
    }

    /// A cycle is essential when its class does not vanish.
    pub fn is_essential(&self, c: &Cycle) -> bool {
        !self.cycle_homology(c).is_zero()
    }

    pub fn pair_parity(&self, e: EdgeId, f: EdgeId) -> bool {
        assert_ne!(e, f);
        self.parity.get(e, f)
    }

    /// Every two independent edges cross evenly. Adjacent pairs are
    /// unconstrained.
    pub fn is_iocr0(&self) -> bool {
        self.graph
            .independent_pairs()
            .all(|p| !self.parity.get(p.e, p.f))
    }

    pub fn first_odd_independent_pair(&self) -> Option<(EdgeId, EdgeId)> {
        self.graph
            .independent_pairs()
            .find(|p| self.parity.get(p.e, p.f))
            .map(|p| (p.e, p.f))
    }

    pub fn vertex_is_even(&self, v: VertexId) -> bool {
        let inc: Vec<EdgeId> = self.graph.incident_edges(v).collect();
        for (i, &e) in inc.iter().enumerate() {
            for &f in &inc[i + 1..] {
                if self.parity.get(e, f) {
                    return false;
                }
            }
        }
        true
    }

    /// Vertices whose incident edges pairwise cross evenly.
    pub fn even_vertices(&self) -> Vec<VertexId> {
        (0..self.graph.n())
            .filter(|&v| self.vertex_is_even(v))
            .collect()
    }

    /// Connected components of the subgraph induced by the even vertices.
    pub fn evenly_connected_components(&self) -> Vec<Vec<VertexId>> {
        let even = self.even_vertices();
        let mut is_even = vec![false; self.graph.n()];
        for &v in &even {
            is_even[v] = true;
        }
        let mut seen = vec![false; self.graph.n()];
        let mut out = Vec::new();
        for &root in &even {
            if seen[root] {
                continue;
            }
            seen[root] = true;
            let mut comp = vec![root];
            let mut queue = std::collections::VecDeque::from([root]);
            while let Some(v) = queue.pop_front() {
                for &(w, _) in self.graph.neighbors(v) {
                    if is_even[w] && !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                        queue.push_back(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Check the 3-path condition on three internally disjoint paths with
    /// common endpoints: of the three pairwise cycles, the number of
    /// essential ones is never exactly one.
    pub fn check_three_path(
        &self,
        p1: &[VertexId],
        p2: &[VertexId],
        p3: &[VertexId],
    ) -> Result<ThreePathCheck, SchemeError> {
        let paths = [p1, p2, p3];
        for p in paths {
            if p.len() < 2 {
                return Err(SchemeError::BadCycle("path with fewer than two vertices".into()));
            }
            for step in p.windows(2) {
                if self.graph.edge_between(step[0], step[1]).is_none() {
                    return Err(SchemeError::WalkStepNotEdge(step[0], step[1]));
                }
            }
        }
        let (s, t) = (p1[0], *p1.last().unwrap());
        if s == t {
            return Err(SchemeError::PathEndpointMismatch);
        }
        for p in &paths[1..] {
            if !(p[0] == s && *p.last().unwrap() == t) {
                return Err(SchemeError::PathEndpointMismatch);
            }
        }
        for i in 0..3 {
            for j in i + 1..3 {
                let inner_i: Vec<_> = paths[i][1..paths[i].len() - 1].to_vec();
                if inner_i.iter().any(|v| paths[j][1..paths[j].len() - 1].contains(v)) {
                    return Err(SchemeError::PathsNotInternallyDisjoint);
                }
                // Two length-1 paths would be the same edge.
                if paths[i].len() == 2 && paths[j].len() == 2 {
                    return Err(SchemeError::PathsNotInternallyDisjoint);
                }
            }
        }
        let class = |p: &[VertexId]| -> Hom2 {
            p.windows(2).fold(Hom2::ZERO, |h, step| {
                let e = self.graph.edge_between(step[0], step[1]).unwrap();
                h.add(self.homology[e])
            })
        };
        let h = [class(p1), class(p2), class(p3)];
        let essential = [
            !h[0].add(h[1]).is_zero(),
            !h[0].add(h[2]).is_zero(),
            !h[1].add(h[2]).is_zero(),
        ];
        let count = essential.iter().filter(|&&b| b).count();
        Ok(ThreePathCheck {
            essential,
            pass: count != 1,
        })
    }

    pub fn to_doc(&self) -> SchemeDoc {
        SchemeDoc {
            reference_order: self.order.clone(),
            rotations: self.rotation.at.clone(),
            parity_matrix: self.parity.to_hex(),
            homology: self.homology.clone(),
        }
    }

    pub fn from_doc(graph: Graph, doc: &SchemeDoc) -> Result<Self, SchemeError> {
        let parity = ParityMatrix::from_hex(graph.m(), &doc.parity_matrix)?;
        if !parity.is_symmetric_zero_diagonal() {
            return Err(SchemeError::BadDocument("parity matrix not symmetric".into()));
        }
        DrawingScheme::new(
            graph,
            doc.reference_order.clone(),
            RotationSystem {
                at: doc.rotations.clone(),
            },
            parity,
            doc.homology.clone(),
        )
    }
}

/// Outcome of a 3-path condition check. Cycle order: (p1,p2), (p1,p3), (p2,p3).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ThreePathCheck {
    pub essential: [bool; 3],
    pub pass: bool,
}

/// Deterministic JSON document for schemes; fixtures and certificates use it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SchemeDoc {
    pub reference_order: Vec<VertexId>,
    pub rotations: Vec<Vec<EdgeId>>,
    /// Upper triangle, row-major over edge pairs, bit-packed, hex.
    pub parity_matrix: String,
    /// Two bits per edge.
    pub homology: Vec<Hom2>,
}
