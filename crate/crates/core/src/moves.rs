//! The redrawing-move calculus acting on schemes with exact parity and
//! rotation deltas: edge-vertex (finger) moves, edge-flips, vertex splits,
//! contractions of even edges, a flip-reachability decision procedure for
//! making a vertex even, and an X-configuration detector.

use crate::graph::{EdgeId, Graph, VertexId};
use crate::scheme::{Cycle, DrawingScheme, Hom2, RotationSystem, SchemeError};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MoveError {
    #[error("vertex {0} is an endpoint of edge {1}")]
    VertexOnEdge(VertexId, EdgeId),
    #[error("vertex {0} has degree {1}, need at least 2")]
    DegreeTooSmall(VertexId, usize),
    #[error("position {0} out of range for degree {1}")]
    BadPosition(usize, usize),
    #[error("split arcs must be contiguous and nonempty")]
    BadArc,
    #[error("edge {0} crosses edge {1} oddly; only even edges contract")]
    OddEdge(EdgeId, EdgeId),
    #[error("endpoints share neighbor {0}; contraction would create a multi-edge")]
    CommonNeighbor(VertexId),
    #[error("degree {0} too large for the exhaustive flip search")]
    DegreeTooLarge(usize),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
}

/// What a move did and how ids map across it. Applying `kind` to the
/// recorded pre-state reproduces the post-state.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct MoveRecord {
    pub kind: MoveKind,
    /// Surviving edges: (old id, new id). Identity entries are kept so the
    /// record stands alone.
    pub edge_map: Vec<(EdgeId, EdgeId)>,
    pub vertex_map: Vec<(VertexId, VertexId)>,
    pub new_vertex: Option<VertexId>,
    pub new_edge: Option<EdgeId>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(tag = "move", rename_all = "snake_case")]
pub enum MoveKind {
    EdgeVertex { edge: EdgeId, vertex: VertexId },
    Flip { vertex: VertexId, position: usize },
    Split { vertex: VertexId, arc_start: usize, arc_len: usize },
    Contract { edge: EdgeId },
}

fn identity_maps(g: &Graph) -> (Vec<(EdgeId, EdgeId)>, Vec<(VertexId, VertexId)>) {
    (
        (0..g.m()).map(|e| (e, e)).collect(),
        (0..g.n()).map(|v| (v, v)).collect(),
    )
}

/// Replay entry point for recorded move streams.
pub fn apply_move(
    s: &DrawingScheme,
    kind: MoveKind,
) -> Result<(DrawingScheme, MoveRecord), MoveError> {
    match kind {
        MoveKind::EdgeVertex { edge, vertex } => edge_vertex_move(s, edge, vertex),
        MoveKind::Flip { vertex, position } => edge_flip(s, vertex, position),
        MoveKind::Split {
            vertex,
            arc_start,
            arc_len,
        } => vertex_split(s, vertex, arc_start, arc_len),
        MoveKind::Contract { edge } => contract_even_edge(s, edge),
    }
}

/// Finger move: toggle the crossing parity between `e` and every edge
/// incident to `v`. Rotations and homology stay put.
pub fn edge_vertex_move(
    s: &DrawingScheme,
    e: EdgeId,
    v: VertexId,
) -> Result<(DrawingScheme, MoveRecord), MoveError> {
    let (a, b) = s.graph.edge(e);
    if v == a || v == b {
        return Err(MoveError::VertexOnEdge(v, e));
    }
    let mut out = s.clone();
    for f in s.graph.incident_edges(v) {
        out.parity.toggle(e, f);
    }
    let (edge_map, vertex_map) = identity_maps(&s.graph);
    Ok((
        out,
        MoveRecord {
            kind: MoveKind::EdgeVertex { edge: e, vertex: v },
            edge_map,
            vertex_map,
            new_vertex: None,
            new_edge: None,
        },
    ))
}

/// Transpose the ends at positions `i`, `i+1` (cyclically) in the rotation
/// at `v`; exactly that pair of edges changes crossing parity.
pub fn edge_flip(
    s: &DrawingScheme,
    v: VertexId,
    i: usize,
) -> Result<(DrawingScheme, MoveRecord), MoveError> {
    let d = s.graph.degree(v);
    if d < 2 {
        return Err(MoveError::DegreeTooSmall(v, d));
    }
    if i >= d {
        return Err(MoveError::BadPosition(i, d));
    }
    let j = (i + 1) % d;
    let mut out = s.clone();
    let (e, f) = (out.rotation.at[v][i], out.rotation.at[v][j]);
    out.rotation.at[v].swap(i, j);
    // Distinct edges in a simple graph: each edge has one end at v.
    out.parity.toggle(e, f);
    let (edge_map, vertex_map) = identity_maps(&s.graph);
    Ok((
        out,
        MoveRecord {
            kind: MoveKind::Flip { vertex: v, position: i },
            edge_map,
            vertex_map,
            new_vertex: None,
            new_edge: None,
        },
    ))
}

/// Split `v` along the cut between two contiguous nonempty arcs of its
/// rotation. The arc starting at `arc_start` (length `arc_len`) stays on
/// `v`; the rest moves to a fresh vertex; a new crossing-free even edge
/// joins the copies, inserted at the cut on both sides.
pub fn vertex_split(
    s: &DrawingScheme,
    v: VertexId,
    arc_start: usize,
    arc_len: usize,
) -> Result<(DrawingScheme, MoveRecord), MoveError> {
    let d = s.graph.degree(v);
    if d < 2 {
        return Err(MoveError::DegreeTooSmall(v, d));
    }
    if arc_start >= d || arc_len == 0 || arc_len >= d {
        return Err(MoveError::BadArc);
    }
    let rot = &s.rotation.at[v];
    let arc1: Vec<EdgeId> = (0..arc_len).map(|k| rot[(arc_start + k) % d]).collect();
    let arc2: Vec<EdgeId> = (arc_len..d).map(|k| rot[(arc_start + k) % d]).collect();

    let new_vertex = s.graph.n();
    let new_edge = s.graph.m();
    let mut edges = s.graph.edges().to_vec();
    for &e in &arc2 {
        let w = s.graph.opposite(e, v);
        edges[e] = (w.min(new_vertex), w.max(new_vertex));
    }
    edges.push((v, new_vertex));
    let graph =
        Graph::from_edges(s.graph.n() + 1, edges).expect("vertex split keeps the graph simple");

    let mut rotation = s.rotation.clone();
    let mut at_v = arc1;
    at_v.push(new_edge);
    rotation.at[v] = at_v;
    let mut at_new = arc2;
    at_new.push(new_edge);
    rotation.at.push(at_new);

    let parity = s.parity.expanded(graph.m());
    let mut homology = s.homology.clone();
    homology.push(Hom2::ZERO);
    let mut order = s.order.clone();
    order.push(new_vertex);

    let out = DrawingScheme::new(graph, order, rotation, parity, homology)?;
    let (edge_map, vertex_map) = identity_maps(&s.graph);
    Ok((
        out,
        MoveRecord {
            kind: MoveKind::Split {
                vertex: v,
                arc_start,
                arc_len,
            },
            edge_map,
            vertex_map,
            new_vertex: Some(new_vertex),
            new_edge: Some(new_edge),
        },
    ))
}

/// Contract an even edge `uv` whose endpoints have no common neighbor.
/// The merged rotation splices v's rotation into u's at the contracted
/// position; surviving pair parities are untouched; v-edges absorb the
/// contracted edge's homology vector so every cycle class is preserved.
pub fn contract_even_edge(
    s: &DrawingScheme,
    e: EdgeId,
) -> Result<(DrawingScheme, MoveRecord), MoveError> {
    let (u, v) = s.graph.edge(e);
    for f in 0..s.graph.m() {
        if f != e && s.parity.get(e, f) {
            return Err(MoveError::OddEdge(e, f));
        }
    }
    for &(w, _) in s.graph.neighbors(u) {
        if w != v && s.graph.edge_between(v, w).is_some() {
            return Err(MoveError::CommonNeighbor(w));
        }
    }

    let vmap = |w: VertexId| if w > v { w - 1 } else { w };
    let emap = |f: EdgeId| if f > e { f - 1 } else { f };

    let mut edges = Vec::with_capacity(s.graph.m() - 1);
    for f in 0..s.graph.m() {
        if f == e {
            continue;
        }
        let (a, b) = s.graph.edge(f);
        let (a, b) = (
            vmap(if a == v { u } else { a }),
            vmap(if b == v { u } else { b }),
        );
        edges.push((a.min(b), a.max(b)));
    }
    let graph = Graph::from_edges(s.graph.n() - 1, edges)
        .expect("contraction precondition keeps the graph simple");

    // v's rotation cut at e, then spliced into u's rotation in place of e.
    let rot_v = &s.rotation.at[v];
    let pos_v = rot_v.iter().position(|&f| f == e).expect("e is at v");
    let spliced: Vec<EdgeId> = (1..rot_v.len())
        .map(|k| rot_v[(pos_v + k) % rot_v.len()])
        .collect();
    let mut at = Vec::with_capacity(s.graph.n() - 1);
    for w in 0..s.graph.n() {
        if w == v {
            continue;
        }
        let mut list = Vec::new();
        for &f in &s.rotation.at[w] {
            if w == u && f == e {
                list.extend(spliced.iter().map(|&g| emap(g)));
            } else {
                list.push(emap(f));
            }
        }
        at.push(list);
    }

    let parity = s.parity.with_edge_removed(e);
    let absorbed = s.homology[e];
    let mut homology = Vec::with_capacity(s.graph.m() - 1);
    for f in 0..s.graph.m() {
        if f == e {
            continue;
        }
        let (a, b) = s.graph.edge(f);
        let h = if a == v || b == v {
            s.homology[f].add(absorbed)
        } else {
            s.homology[f]
        };
        homology.push(h);
    }
    let order: Vec<VertexId> = s
        .order
        .iter()
        .filter(|&&w| w != v)
        .map(|&w| vmap(w))
        .collect();

    let out = DrawingScheme::new(graph, order, RotationSystem { at }, parity, homology)?;
    let edge_map = (0..s.graph.m())
        .filter(|&f| f != e)
        .map(|f| (f, emap(f)))
        .collect();
    let vertex_map = (0..s.graph.n())
        .filter(|&w| w != v)
        .map(|w| (w, vmap(w)))
        .collect();
    Ok((
        out,
        MoveRecord {
            kind: MoveKind::Contract { edge: e },
            edge_map,
            vertex_map,
            new_vertex: None,
            new_edge: None,
        },
    ))
}

// ---------------------------------------------------------------------------
// Flip reachability at a vertex

/// Outcome of the flip search at a vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FlipPlan {
    /// Flip positions that make the vertex even, in application order; each
    /// position refers to the rotation of the evolving scheme.
    Evened(Vec<usize>),
    /// Four incident edges that cannot be made to cross each other evenly by
    /// flips, ascending by edge id.
    Obstructed([EdgeId; 4]),
}

const MAX_FLIP_DEGREE: usize = 8;

fn pair_bit(i: usize, j: usize, d: usize) -> u64 {
    debug_assert!(i < j && j < d);
    let k = i * d - i * (i + 1) / 2 + (j - i - 1);
    1u64 << k
}

fn local_bits(s: &DrawingScheme, inc: &[EdgeId]) -> u64 {
    let d = inc.len();
    let mut bits = 0u64;
    for i in 0..d {
        for j in i + 1..d {
            if s.parity.get(inc[i], inc[j]) {
                bits |= pair_bit(i, j, d);
            }
        }
    }
    bits
}

fn canonical_rotation(rot: &[u8]) -> Vec<u8> {
    let d = rot.len();
    let start = (0..d).min_by_key(|&i| rot[i]).unwrap();
    (0..d).map(|k| rot[(start + k) % d]).collect()
}

/// Breadth-first search over (cyclic end order, local parity bits) states
/// generated by single flips. Exhaustive for degree <= 8.
pub fn make_vertex_even_by_flips(
    s: &DrawingScheme,
    v: VertexId,
) -> Result<FlipPlan, MoveError> {
    let d = s.graph.degree(v);
    if d <= 1 {
        return Ok(FlipPlan::Evened(Vec::new()));
    }
    if d > MAX_FLIP_DEGREE {
        return Err(MoveError::DegreeTooLarge(d));
    }
    let mut inc: Vec<EdgeId> = s.graph.incident_edges(v).collect();
    inc.sort_unstable();
    // Rotation as indices into the sorted incident list.
    let start_rot: Vec<u8> = s.rotation.at[v]
        .iter()
        .map(|e| inc.iter().position(|x| x == e).unwrap() as u8)
        .collect();
    let start_bits = local_bits(s, &inc);

    struct Node {
        rot: Vec<u8>,
        bits: u64,
        parent: usize,
        flip: usize,
    }
    let mut arena = vec![Node {
        rot: start_rot.clone(),
        bits: start_bits,
        parent: usize::MAX,
        flip: usize::MAX,
    }];
    let mut seen: HashMap<(Vec<u8>, u64), ()> = HashMap::new();
    seen.insert((canonical_rotation(&start_rot), start_bits), ());
    let mut head = 0;
    while head < arena.len() {
        if arena[head].bits == 0 {
            let mut flips = Vec::new();
            let mut at = head;
            while arena[at].parent != usize::MAX {
                flips.push(arena[at].flip);
                at = arena[at].parent;
            }
            flips.reverse();
            return Ok(FlipPlan::Evened(flips));
        }
        for pos in 0..d {
            let cur = &arena[head];
            let mut rot = cur.rot.clone();
            let nxt = (pos + 1) % d;
            let (a, b) = (rot[pos] as usize, rot[nxt] as usize);
            rot.swap(pos, nxt);
            let bits = cur.bits ^ pair_bit(a.min(b), a.max(b), d);
            let key = (canonical_rotation(&rot), bits);
            if let std::collections::hash_map::Entry::Vacant(slot) = seen.entry(key) {
                slot.insert(());
                arena.push(Node {
                    rot,
                    bits,
                    parent: head,
                    flip: pos,
                });
            }
        }
        head += 1;
    }

    // Unreachable: produce a four-edge obstruction, scanning quadruples in
    // ascending edge-id order.
    for a in 0..d {
        for b in a + 1..d {
            for c in b + 1..d {
                for e4 in c + 1..d {
                    let quad = [a, b, c, e4];
                    if !quad_flips_even(&start_rot, start_bits, d, quad) {
                        return Ok(FlipPlan::Obstructed([
                            inc[a], inc[b], inc[c], inc[e4],
                        ]));
                    }
                }
            }
        }
    }
    unreachable!("vertex not evenable by flips must carry a four-edge obstruction");
}

/// Decide whether four ends at a vertex can be made pairwise even, moving
/// only the restricted state: their cyclic order among themselves (other
/// ends shuffle freely) and their six mutual parity bits. Generators are
/// adjacent transpositions within the restricted order (toggling that pair)
/// and full rotations of one end around the vertex (toggling it against the
/// other three).
fn quad_flips_even(rot: &[u8], bits: u64, d: usize, quad: [usize; 4]) -> bool {
    // Restrict the rotation to the quad, renaming members 0..4.
    let mut qrot = Vec::with_capacity(4);
    for &r in rot {
        if let Some(k) = quad.iter().position(|&q| q == r as usize) {
            qrot.push(k as u8);
        }
    }
    let qbit = |i: usize, j: usize| pair_bit(i.min(j), i.max(j), 4);
    let mut qbits = 0u64;
    for i in 0..4 {
        for j in i + 1..4 {
            if bits & pair_bit(quad[i].min(quad[j]), quad[i].max(quad[j]), d) != 0 {
                qbits |= qbit(i, j);
            }
        }
    }

    let mut seen = std::collections::HashSet::new();
    let mut queue = std::collections::VecDeque::new();
    seen.insert((canonical_rotation(&qrot), qbits));
    queue.push_back((qrot, qbits));
    while let Some((rot, bits)) = queue.pop_front() {
        if bits == 0 {
            return true;
        }
        let push = |rot: Vec<u8>, bits: u64,
                        seen: &mut std::collections::HashSet<(Vec<u8>, u64)>,
                        queue: &mut std::collections::VecDeque<(Vec<u8>, u64)>| {
            if seen.insert((canonical_rotation(&rot), bits)) {
                queue.push_back((rot, bits));
            }
        };
        for pos in 0..4 {
            let nxt = (pos + 1) % 4;
            let (a, b) = (rot[pos] as usize, rot[nxt] as usize);
            let mut r2 = rot.clone();
            r2.swap(pos, nxt);
            push(r2, bits ^ qbit(a, b), &mut seen, &mut queue);
        }
        for k in 0..4usize {
            let mut b2 = bits;
            for other in 0..4 {
                if other != k {
                    b2 ^= qbit(k, other);
                }
            }
            push(rot.clone(), b2, &mut seen, &mut queue);
        }
    }
    false
}

/// All four-edge subsets at `v` that fail the restricted flip search.
pub fn failing_quadruples(s: &DrawingScheme, v: VertexId) -> Vec<[EdgeId; 4]> {
    let d = s.graph.degree(v);
    if d < 4 || d > MAX_FLIP_DEGREE {
        return Vec::new();
    }
    let mut inc: Vec<EdgeId> = s.graph.incident_edges(v).collect();
    inc.sort_unstable();
    let rot: Vec<u8> = s.rotation.at[v]
        .iter()
        .map(|e| inc.iter().position(|x| x == e).unwrap() as u8)
        .collect();
    let bits = local_bits(s, &inc);
    let mut out = Vec::new();
    for a in 0..d {
        for b in a + 1..d {
            for c in b + 1..d {
                for e4 in c + 1..d {
                    if !quad_flips_even(&rot, bits, d, [a, b, c, e4]) {
                        out.push([inc[a], inc[b], inc[c], inc[e4]]);
                    }
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// X-configuration search

/// Two essential-candidate cycles meeting exactly at `vertex`, whose four
/// ends there cannot be made pairwise even by flips.
#[derive(Debug, Clone)]
pub struct XConfiguration {
    pub c1: Cycle,
    pub c2: Cycle,
    pub vertex: VertexId,
    pub obstruction: [EdgeId; 4],
}

#[derive(Debug, Clone)]
pub enum XSearchResult {
    Found(XConfiguration),
    /// `complete` is false when the path budget ran out before the space was
    /// exhausted.
    NotFound { complete: bool },
}

/// Look for an X-configuration: enumerate vertices that flips cannot make
/// even, and for each obstruction quadruple try to route two cycles through
/// the prescribed end pairs, disjoint except at the vertex. `budget` caps
/// the number of candidate paths explored.
pub fn find_x_configuration(s: &DrawingScheme, budget: usize) -> XSearchResult {
    let mut complete = true;
    let mut remaining = budget;
    for v in 0..s.graph.n() {
        if s.graph.degree(v) > MAX_FLIP_DEGREE {
            complete = false;
            continue;
        }
        match make_vertex_even_by_flips(s, v) {
            Ok(FlipPlan::Evened(_)) => continue,
            Ok(FlipPlan::Obstructed(_)) => {}
            Err(_) => {
                complete = false;
                continue;
            }
        }
        for quad in failing_quadruples(s, v) {
            // Each pairing of the quadruple into two end pairs is a routing
            // candidate; the local obstruction does not depend on it.
            let pairings = [[0, 1, 2, 3], [0, 2, 1, 3], [0, 3, 1, 2]];
            for pr in pairings {
                let (ea, eb, ec, ed) = (quad[pr[0]], quad[pr[1]], quad[pr[2]], quad[pr[3]]);
                if let Some(found) =
                    route_two_cycles(s, v, ea, eb, ec, ed, &mut remaining, &mut complete)
                {
                    let (c1, c2) = found;
                    return XSearchResult::Found(XConfiguration {
                        c1,
                        c2,
                        vertex: v,
                        obstruction: quad,
                    });
                }
                if remaining == 0 {
                    return XSearchResult::NotFound { complete: false };
                }
            }
        }
    }
    XSearchResult::NotFound { complete }
}

/// Route cycle 1 through ends `ea`, `eb` at `v` and cycle 2 through `ec`,
/// `ed`, internally disjoint from cycle 1 and avoiding `v` internally.
fn route_two_cycles(
    s: &DrawingScheme,
    v: VertexId,
    ea: EdgeId,
    eb: EdgeId,
    ec: EdgeId,
    ed: EdgeId,
    remaining: &mut usize,
    complete: &mut bool,
) -> Option<(Cycle, Cycle)> {
    let g = &s.graph;
    let (wa, wb) = (g.opposite(ea, v), g.opposite(eb, v));
    let (wc, wd) = (g.opposite(ec, v), g.opposite(ed, v));
    let mut blocked = vec![false; g.n()];
    blocked[v] = true;
    let mut path = vec![wa];
    let mut on_path = vec![false; g.n()];
    on_path[wa] = true;
    let mut result = None;
    enumerate_paths(
        g,
        wb,
        &blocked,
        &mut path,
        &mut on_path,
        remaining,
        complete,
        &mut |path1| {
            // Second cycle must avoid v and everything on path1.
            let mut blocked2 = vec![false; g.n()];
            blocked2[v] = true;
            for &w in path1.iter() {
                blocked2[w] = true;
            }
            if blocked2[wc] || blocked2[wd] {
                return None;
            }
            let path2 = shortest_path_avoiding(g, wc, wd, &blocked2)?;
            let mut verts1 = vec![v];
            verts1.extend_from_slice(path1);
            let mut verts2 = vec![v];
            verts2.extend_from_slice(&path2);
            let c1 = Cycle::new(g, verts1).ok()?;
            let c2 = Cycle::new(g, verts2).ok()?;
            Some((c1, c2))
        },
        &mut result,
    );
    result
}

/// Depth-first enumeration of simple paths from the current `path` tip to
/// `target`, calling `check` on each complete path until it yields a result
/// or the budget runs dry. Neighbor order is ascending, so the enumeration
/// is deterministic.
#[allow(clippy::too_many_arguments)]
fn enumerate_paths<T>(
    g: &Graph,
    target: VertexId,
    blocked: &[bool],
    path: &mut Vec<VertexId>,
    on_path: &mut Vec<bool>,
    remaining: &mut usize,
    complete: &mut bool,
    check: &mut impl FnMut(&[VertexId]) -> Option<T>,
    result: &mut Option<T>,
) {
    if result.is_some() || *remaining == 0 {
        if *remaining == 0 {
            *complete = false;
        }
        return;
    }
    let tip = *path.last().unwrap();
    if tip == target {
        *remaining -= 1;
        *result = check(path);
        return;
    }
    for &(w, _) in g.neighbors(tip) {
        if blocked[w] || on_path[w] {
            continue;
        }
        path.push(w);
        on_path[w] = true;
        enumerate_paths(g, target, blocked, path, on_path, remaining, complete, check, result);
        path.pop();
        on_path[w] = false;
        if result.is_some() || *remaining == 0 {
            return;
        }
    }
}

fn shortest_path_avoiding(
    g: &Graph,
    from: VertexId,
    to: VertexId,
    blocked: &[bool],
) -> Option<Vec<VertexId>> {
    let mut prev = vec![usize::MAX; g.n()];
    let mut queue = std::collections::VecDeque::from([from]);
    let mut seen = vec![false; g.n()];
    seen[from] = true;
    while let Some(x) = queue.pop_front() {
        if x == to {
            let mut path = vec![to];
            let mut at = to;
            while at != from {
                at = prev[at];
                path.push(at);
            }
            path.reverse();
            return Some(path);
        }
        for &(w, _) in g.neighbors(x) {
            if !blocked[w] && !seen[w] {
                seen[w] = true;
                prev[w] = x;
                queue.push_back(w);
            }
        }
    }
    None
}
