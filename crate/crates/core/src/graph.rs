//! Simple undirected graphs with dense integer identifiers, the standard
//! generators used by the experiment suite, spanning forests, independent
//! edge pairs, and graph6 text I/O.
//!
//! Vertices are `0..n`, edges are `0..m` in a fixed insertion order that the
//! named constructors keep deterministic (row-major over the upper triangle
//! for matrix-style inputs). Operations that extend a graph append new ids at
//! the end; nothing here renumbers.

use thiserror::Error;

pub type VertexId = usize;
pub type EdgeId = usize;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("loop edge at vertex {0}")]
    LoopEdge(VertexId),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(VertexId, VertexId),
    #[error("vertex {0} out of range (n={1})")]
    VertexOutOfRange(VertexId, usize),
    #[error("bracer length {0} not in {{1,2}}")]
    BadBracerLength(u8),
    #[error("bracer endpoint index {0} not in {{0,1,2}}")]
    BadBracerEnd(u8),
    #[error("bracer endpoints coincide")]
    DegenerateBracer,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum Graph6Error {
    #[error("empty graph6 line")]
    Empty,
    #[error("byte {byte:#04x} at offset {offset} outside printable graph6 range 63..=126")]
    NonPrintable { offset: usize, byte: u8 },
    #[error("malformed length prefix at offset {offset}")]
    BadLengthPrefix { offset: usize },
    #[error("vertex count {0} exceeds supported limit 258047")]
    TooLarge(u64),
    #[error("truncated adjacency bits: expected {expected} bytes, got {got}")]
    Truncated { expected: usize, got: usize },
    #[error("trailing garbage at offset {offset}")]
    TrailingGarbage { offset: usize },
}

/// An unordered pair of distinct edges. `e < f` always holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgePair {
    pub e: EdgeId,
    pub f: EdgeId,
    /// True when the two edges share an endpoint.
    pub adjacent: bool,
}

impl EdgePair {
    /// Two edges are independent when their four endpoints are distinct.
    pub fn independent(&self) -> bool {
        !self.adjacent
    }
}

/// Immutable simple graph. Cheap to clone at desk scale.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(VertexId, VertexId)>,
    adj: Vec<Vec<(VertexId, EdgeId)>>,
}

impl Graph {
    pub fn new(n: usize) -> Self {
        Graph {
            n,
            edges: Vec::new(),
            adj: vec![Vec::new(); n],
        }
    }

    /// Build from an explicit edge list; ids follow list positions.
    pub fn from_edges(
        n: usize,
        list: impl IntoIterator<Item = (VertexId, VertexId)>,
    ) -> Result<Self, GraphError> {
        let mut g = Graph::new(n);
        for (u, v) in list {
            g.push_edge(u, v)?;
        }
        Ok(g)
    }

    fn push_edge(&mut self, u: VertexId, v: VertexId) -> Result<EdgeId, GraphError> {
        if u >= self.n {
            return Err(GraphError::VertexOutOfRange(u, self.n));
        }
        if v >= self.n {
            return Err(GraphError::VertexOutOfRange(v, self.n));
        }
        if u == v {
            return Err(GraphError::LoopEdge(u));
        }
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        if self.edge_between(a, b).is_some() {
            return Err(GraphError::DuplicateEdge(a, b));
        }
        let id = self.edges.len();
        self.edges.push((a, b));
        self.adj[a].push((b, id));
        self.adj[b].push((a, id));
        self.adj[a].sort_unstable();
        self.adj[b].sort_unstable();
        Ok(id)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    /// Endpoints of an edge, normalized `u < v`.
    pub fn edge(&self, e: EdgeId) -> (VertexId, VertexId) {
        self.edges[e]
    }

    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    /// Neighbors of `v` with the connecting edge, ascending by neighbor id.
    pub fn neighbors(&self, v: VertexId) -> &[(VertexId, EdgeId)] {
        &self.adj[v]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adj[v].len()
    }

    pub fn edge_between(&self, u: VertexId, v: VertexId) -> Option<EdgeId> {
        self.adj[u]
            .binary_search_by_key(&v, |&(w, _)| w)
            .ok()
            .map(|i| self.adj[u][i].1)
    }

    /// Edge ids incident to `v`, ascending by neighbor id.
    pub fn incident_edges(&self, v: VertexId) -> impl Iterator<Item = EdgeId> + '_ {
        self.adj[v].iter().map(|&(_, e)| e)
    }

    /// The other endpoint of `e` as seen from `v`.
    pub fn opposite(&self, e: EdgeId, v: VertexId) -> VertexId {
        let (a, b) = self.edges[e];
        if v == a {
            b
        } else {
            debug_assert_eq!(v, b);
            a
        }
    }

    pub fn edges_adjacent(&self, e: EdgeId, f: EdgeId) -> bool {
        let (a, b) = self.edges[e];
        let (c, d) = self.edges[f];
        a == c || a == d || b == c || b == d
    }

    /// All unordered edge pairs `e < f`, sorted by `(e, f)`.
    pub fn edge_pairs(&self) -> impl Iterator<Item = EdgePair> + '_ {
        (0..self.m()).flat_map(move |e| {
            (e + 1..self.m()).map(move |f| EdgePair {
                e,
                f,
                adjacent: self.edges_adjacent(e, f),
            })
        })
    }

    /// Pairs of edges with four distinct endpoints, sorted by `(e, f)`.
    pub fn independent_pairs(&self) -> impl Iterator<Item = EdgePair> + '_ {
        self.edge_pairs().filter(|p| p.independent())
    }

    /// BFS spanning forest: roots at the lowest unvisited vertex, neighbors
    /// scanned in ascending id order. Returns `n - #components` edge ids.
    pub fn spanning_forest(&self) -> Vec<EdgeId> {
        let mut seen = vec![false; self.n];
        let mut tree = Vec::new();
        let mut queue = std::collections::VecDeque::new();
        for root in 0..self.n {
            if seen[root] {
                continue;
            }
            seen[root] = true;
            queue.push_back(root);
            while let Some(v) = queue.pop_front() {
                for &(w, e) in &self.adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        tree.push(e);
                        queue.push_back(w);
                    }
                }
            }
        }
        tree
    }

    pub fn components(&self) -> Vec<Vec<VertexId>> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        let mut queue = std::collections::VecDeque::new();
        for root in 0..self.n {
            if seen[root] {
                continue;
            }
            seen[root] = true;
            queue.push_back(root);
            let mut comp = vec![root];
            while let Some(v) = queue.pop_front() {
                for &(w, _) in &self.adj[v] {
                    if !seen[w] {
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

    pub fn is_connected(&self) -> bool {
        self.n <= 1 || self.components().len() == 1
    }

    /// Length of a shortest cycle, or `None` for forests.
    pub fn girth(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for s in 0..self.n {
            // BFS from s; a non-tree edge closing at depths d1, d2 gives a
            // cycle through s of length d1 + d2 + 1.
            let mut dist = vec![usize::MAX; self.n];
            let mut parent_edge = vec![usize::MAX; self.n];
            let mut queue = std::collections::VecDeque::new();
            dist[s] = 0;
            queue.push_back(s);
            while let Some(v) = queue.pop_front() {
                for &(w, e) in &self.adj[v] {
                    if e == parent_edge[v] {
                        continue;
                    }
                    if dist[w] == usize::MAX {
                        dist[w] = dist[v] + 1;
                        parent_edge[w] = e;
                        queue.push_back(w);
                    } else {
                        let len = dist[v] + dist[w] + 1;
                        if best.map_or(true, |b| len < b) {
                            best = Some(len);
                        }
                    }
                }
            }
        }
        best
    }
}

// ---------------------------------------------------------------------------
// Generators

pub fn complete(n: usize) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            edges.push((u, v));
        }
    }
    Graph::from_edges(n, edges).expect("complete graph is simple")
}

/// Side A is `0..a`, side B is `a..a+b`; edges row-major over side A.
pub fn complete_bipartite(a: usize, b: usize) -> Graph {
    let mut edges = Vec::new();
    for u in 0..a {
        for v in 0..b {
            edges.push((u, a + v));
        }
    }
    Graph::from_edges(a + b, edges).expect("complete bipartite graph is simple")
}

/// Outer cycle 0..5, inner pentagram 5..10, spokes i - (i+5).
pub fn petersen() -> Graph {
    let mut edges = Vec::new();
    for i in 0..5 {
        edges.push((i, (i + 1) % 5));
    }
    for i in 0..5 {
        edges.push((i, i + 5));
    }
    for i in 0..5 {
        edges.push((5 + i, 5 + (i + 2) % 5));
    }
    Graph::from_edges(10, edges).expect("petersen graph is simple")
}

/// A path of length 1 or 2 between two of the three degree-n vertices of a
/// K3,n. Endpoints index into {0,1,2}; length-2 bracers get a fresh interior
/// vertex each.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bracer {
    pub ends: (u8, u8),
    pub len: u8,
}

impl Bracer {
    pub fn new(a: u8, b: u8, len: u8) -> Self {
        Bracer { ends: (a, b), len }
    }
}

/// K3,n on the degree-n side {0,1,2} plus the given bracer paths. Star
/// vertices are `3..3+n`; interior bracer vertices are appended after.
pub fn k3n_with_bracers(n: usize, bracers: &[Bracer]) -> Result<Graph, GraphError> {
    let mut edges = Vec::new();
    for s in 0..3 {
        for t in 0..n {
            edges.push((s, 3 + t));
        }
    }
    // Row-major ids for the bipartite part.
    edges.sort_unstable();
    let mut next_vertex = 3 + n;
    for b in bracers {
        let (x, y) = (b.ends.0, b.ends.1);
        if x > 2 {
            return Err(GraphError::BadBracerEnd(x));
        }
        if y > 2 {
            return Err(GraphError::BadBracerEnd(y));
        }
        if x == y {
            return Err(GraphError::DegenerateBracer);
        }
        match b.len {
            1 => edges.push((x.min(y) as usize, x.max(y) as usize)),
            2 => {
                edges.push((x as usize, next_vertex));
                edges.push((y as usize, next_vertex));
                next_vertex += 1;
            }
            other => return Err(GraphError::BadBracerLength(other)),
        }
    }
    // from_edges rejects a duplicated length-1 bracer.
    Graph::from_edges(next_vertex, edges)
}

// ---------------------------------------------------------------------------
// graph6 (McKay's format)

const G6_MIN: u8 = 63;
const G6_MAX: u8 = 126;

fn check_printable(bytes: &[u8]) -> Result<(), Graph6Error> {
    for (offset, &b) in bytes.iter().enumerate() {
        if !(G6_MIN..=G6_MAX).contains(&b) {
            return Err(Graph6Error::NonPrintable { offset, byte: b });
        }
    }
    Ok(())
}

/// Parse one graph6 line. A leading `>>graph6<<` header is tolerated.
/// Edge ids are assigned row-major over the upper triangle.
pub fn parse_graph6(line: &str) -> Result<Graph, Graph6Error> {
    let mut bytes = line.as_bytes();
    if let Some(rest) = bytes.strip_prefix(b">>graph6<<") {
        bytes = rest;
    }
    while bytes.last().is_some_and(|b| *b == b'\n' || *b == b'\r') {
        bytes = &bytes[..bytes.len() - 1];
    }
    if bytes.is_empty() {
        return Err(Graph6Error::Empty);
    }
    check_printable(bytes)?;

    let (n, mut pos) = if bytes[0] == 126 {
        if bytes.len() >= 2 && bytes[1] == 126 {
            // 8-byte form for n >= 258048: out of scope.
            return Err(Graph6Error::TooLarge(u64::MAX));
        }
        if bytes.len() < 4 {
            return Err(Graph6Error::BadLengthPrefix { offset: 0 });
        }
        let mut n: u64 = 0;
        for &b in &bytes[1..4] {
            n = (n << 6) | u64::from(b - G6_MIN);
        }
        if n > 258047 {
            return Err(Graph6Error::TooLarge(n));
        }
        (n as usize, 4)
    } else {
        ((bytes[0] - G6_MIN) as usize, 1)
    };

    let nbits = n * (n.saturating_sub(1)) / 2;
    let nbytes = (nbits + 5) / 6;
    if bytes.len() < pos + nbytes {
        return Err(Graph6Error::Truncated {
            expected: nbytes,
            got: bytes.len() - pos,
        });
    }

    let mut adj = vec![false; nbits];
    for i in 0..nbits {
        let byte = bytes[pos + i / 6] - G6_MIN;
        let bit = (byte >> (5 - i % 6)) & 1;
        adj[i] = bit == 1;
    }
    // Padding bits must be zero, otherwise the line encodes a larger graph.
    for i in nbits..nbytes * 6 {
        let byte = bytes[pos + i / 6] - G6_MIN;
        if (byte >> (5 - i % 6)) & 1 == 1 {
            return Err(Graph6Error::TrailingGarbage {
                offset: pos + i / 6,
            });
        }
    }
    pos += nbytes;
    if pos != bytes.len() {
        return Err(Graph6Error::TrailingGarbage { offset: pos });
    }

    // Bit k of R(x) is cell (i, j) of the upper triangle in column-major
    // order; re-emit edges row-major for the id assignment.
    let mut matrix = vec![false; n * n];
    let mut k = 0;
    for j in 1..n {
        for i in 0..j {
            if adj[k] {
                matrix[i * n + j] = true;
            }
            k += 1;
        }
    }
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if matrix[u * n + v] {
                edges.push((u, v));
            }
        }
    }
    Ok(Graph::from_edges(n, edges).expect("graph6 bits encode a simple graph"))
}

/// Canonical graph6 line (no header) for `g`. Supports n <= 258047.
pub fn write_graph6(g: &Graph) -> String {
    let n = g.n();
    assert!(n <= 258047, "graph6 writer supports n <= 258047");
    let mut out = Vec::new();
    if n <= 62 {
        out.push(G6_MIN + n as u8);
    } else {
        out.push(126);
        out.push(G6_MIN + ((n >> 12) & 0x3f) as u8);
        out.push(G6_MIN + ((n >> 6) & 0x3f) as u8);
        out.push(G6_MIN + (n & 0x3f) as u8);
    }
    let nbits = n * n.saturating_sub(1) / 2;
    let mut bits = vec![false; nbits];
    let mut k = 0;
    for j in 1..n {
        for i in 0..j {
            bits[k] = g.edge_between(i, j).is_some();
            k += 1;
        }
    }
    for chunk in bits.chunks(6) {
        let mut byte = 0u8;
        for (i, &b) in chunk.iter().enumerate() {
            if b {
                byte |= 1 << (5 - i);
            }
        }
        out.push(G6_MIN + byte);
    }
    String::from_utf8(out).expect("graph6 bytes are printable ASCII")
}

/// Parse a whole file of graph6 lines; blank lines are skipped.
pub fn parse_graph6_file(text: &str) -> Result<Vec<Graph>, (usize, Graph6Error)> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        out.push(parse_graph6(line).map_err(|e| (lineno + 1, e))?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k5_graph6_round_trip() {
        // "D~{" cross-checked against an independent encoder.
        let g = parse_graph6("D~{").unwrap();
        assert_eq!(g.n(), 5);
        assert_eq!(g.m(), 10);
        assert_eq!(write_graph6(&complete(5)), "D~{");
        assert_eq!(write_graph6(&g), "D~{");
    }

    #[test]
    fn single_vertex() {
        let g = parse_graph6("@").unwrap();
        assert_eq!((g.n(), g.m()), (1, 0));
        assert_eq!(write_graph6(&Graph::new(1)), "@");
    }

    #[test]
    fn named_graphs_match_independent_encoder() {
        assert_eq!(write_graph6(&complete(4)), "C~");
        assert_eq!(write_graph6(&complete(7)), "F~~~w");
        assert_eq!(write_graph6(&complete(8)), "G~~~~{");
        assert_eq!(write_graph6(&complete_bipartite(3, 3)), "EFz_");
        assert_eq!(write_graph6(&complete_bipartite(3, 7)), "IFzfFB_w?");
        assert_eq!(write_graph6(&petersen()), "IheA@GUAo");
    }

    #[test]
    fn header_is_tolerated() {
        let g = parse_graph6(">>graph6<<D~{").unwrap();
        assert_eq!(g.m(), 10);
    }

    #[test]
    fn parse_errors_name_offsets() {
        assert_eq!(
            parse_graph6("D\x1f"),
            Err(Graph6Error::NonPrintable {
                offset: 1,
                byte: 0x1f
            })
        );
        assert!(matches!(
            parse_graph6("D~"),
            Err(Graph6Error::Truncated { expected: 2, got: 1 })
        ));
        assert_eq!(
            parse_graph6("D~{?"),
            Err(Graph6Error::TrailingGarbage { offset: 3 })
        );
        assert!(matches!(parse_graph6("~?"), Err(Graph6Error::BadLengthPrefix { offset: 0 })));
    }

    #[test]
    fn long_size_prefix() {
        // Path on 63 vertices forces the 4-byte prefix.
        let mut edges = Vec::new();
        for i in 0..62 {
            edges.push((i, i + 1));
        }
        let g = Graph::from_edges(63, edges).unwrap();
        let enc = write_graph6(&g);
        assert!(enc.starts_with("~??~"));
        let back = parse_graph6(&enc).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn generators_have_expected_sizes() {
        assert_eq!(complete(5).m(), 10);
        let g = complete_bipartite(3, 7);
        assert_eq!((g.n(), g.m()), (10, 21));
        let p = petersen();
        assert_eq!((p.n(), p.m()), (10, 15));
        assert!((0..10).all(|v| p.degree(v) == 3));
    }

    #[test]
    fn k3n_bracer_shapes() {
        // K3,6 plus the triangle on {a,b,c}.
        let g = k3n_with_bracers(
            6,
            &[Bracer::new(0, 1, 1), Bracer::new(1, 2, 1), Bracer::new(0, 2, 1)],
        )
        .unwrap();
        assert_eq!((g.n(), g.m()), (9, 21));

        let plain = k3n_with_bracers(3, &[]).unwrap();
        assert_eq!((plain.n(), plain.m()), (6, 9));
        assert_eq!(write_graph6(&plain), write_graph6(&complete_bipartite(3, 3)));

        let two = k3n_with_bracers(2, &[Bracer::new(0, 1, 2), Bracer::new(0, 1, 2)]).unwrap();
        assert_eq!((two.n(), two.m()), (7, 10));

        assert_eq!(
            k3n_with_bracers(3, &[Bracer::new(0, 1, 1), Bracer::new(0, 1, 1)]),
            Err(GraphError::DuplicateEdge(0, 1))
        );
    }

    #[test]
    fn spanning_forest_shapes() {
        assert_eq!(complete(4).spanning_forest().len(), 3);
        let path = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(path.spanning_forest(), vec![0, 1]);
        let two_k2 = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        assert_eq!(two_k2.spanning_forest().len(), 2);
    }

    #[test]
    fn independent_pair_counts() {
        assert_eq!(complete(4).independent_pairs().count(), 3);
        let star = complete_bipartite(1, 4);
        assert_eq!(star.independent_pairs().count(), 0);
        // Brute force over C(10,2) pairs minus adjacent ones.
        let k5 = complete(5);
        let brute = k5
            .edge_pairs()
            .filter(|p| {
                let (a, b) = k5.edge(p.e);
                let (c, d) = k5.edge(p.f);
                a != c && a != d && b != c && b != d
            })
            .count();
        assert_eq!(brute, 15);
        assert_eq!(k5.independent_pairs().count(), brute);
    }

    #[test]
    fn pair_counts_partition() {
        for g in [complete(5), petersen(), complete_bipartite(3, 4)] {
            let m = g.m();
            let all = m * (m - 1) / 2;
            let indep = g.independent_pairs().count();
            let adjacent = g.edge_pairs().filter(|p| p.adjacent).count();
            assert_eq!(indep + adjacent, all);
        }
    }

    #[test]
    fn girth_values() {
        assert_eq!(complete(4).girth(), Some(3));
        assert_eq!(complete_bipartite(3, 3).girth(), Some(4));
        assert_eq!(petersen().girth(), Some(5));
        let tree = Graph::from_edges(4, [(0, 1), (1, 2), (1, 3)]).unwrap();
        assert_eq!(tree.girth(), None);
    }
}
