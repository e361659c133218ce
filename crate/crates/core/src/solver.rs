//! Feasibility of independently even drawings. On the sphere the constraint
//! per independent pair {e,f} is linear over GF(2) in the finger-move
//! indicators y[e,v]; on the torus each edge also carries a two-bit homology
//! class and the pair constraint gains the quadratic term x_e^T (0 1; 1 0)
//! x_f. The search pins a spanning forest to the zero class (the coboundary
//! gauge), enumerates cotree classes in Gray-code order, and checks each
//! branch against the left kernel of the once-reduced linear matrix, so a
//! branch costs a handful of word operations. Also: certificates and their
//! independent checker, and minimum odd-pair search by branch and bound.

use crate::gf2::{self, Gf2Matrix, Gf2System, Reduced};
use crate::graph::{EdgeId, Graph, VertexId};
use crate::scheme::{reference_parities, reference_rotation, DrawingScheme, Hom2, ParityMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Surface {
    Sphere,
    Torus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Sat,
    Unsat,
    UnknownBudget,
}

#[derive(Debug, Clone, Default)]
pub struct SolveStats {
    pub branches: u64,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub status: Status,
    pub certificate: Option<Certificate>,
    pub stats: SolveStats,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CertificateError {
    #[error("independent pair ({0}, {1}) crosses oddly")]
    OddIndependentPair(EdgeId, EdgeId),
    #[error("recorded parity of pair ({0}, {1}) does not match the recomputation")]
    MatrixMismatch(EdgeId, EdgeId),
    #[error("malformed certificate: {0}")]
    Malformed(String),
}

// ---------------------------------------------------------------------------
// Finger-move variables

/// Number of y variables: one per (edge, vertex not on the edge).
pub fn y_var_count(g: &Graph) -> usize {
    g.m() * g.n().saturating_sub(2)
}

/// Dense index of y[e,v]; `v` must not be an endpoint of `e`.
pub fn y_var(g: &Graph, e: EdgeId, v: VertexId) -> usize {
    let (a, b) = g.edge(e);
    debug_assert!(v != a && v != b);
    let rank = v - (v > a) as usize - (v > b) as usize;
    e * (g.n() - 2) + rank
}

/// Assignment of all finger-move indicators, bit-packed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FingerMoves {
    vars: usize,
    bits: Vec<u64>,
}

impl FingerMoves {
    pub fn zero(g: &Graph) -> Self {
        let vars = y_var_count(g);
        FingerMoves {
            vars,
            bits: vec![0; gf2::words_for(vars).max(1)],
        }
    }

    pub fn from_bits(g: &Graph, bits: Vec<u64>) -> Self {
        FingerMoves {
            vars: y_var_count(g),
            bits,
        }
    }

    pub fn get(&self, g: &Graph, e: EdgeId, v: VertexId) -> bool {
        gf2::bit_get(&self.bits, y_var(g, e, v))
    }

    pub fn set(&mut self, g: &Graph, e: EdgeId, v: VertexId, value: bool) {
        gf2::bit_set(&mut self.bits, y_var(g, e, v), value);
    }

    pub fn to_hex(&self) -> String {
        gf2::to_hex(&self.bits, self.vars)
    }

    pub fn from_hex(g: &Graph, s: &str) -> Result<Self, CertificateError> {
        let vars = y_var_count(g);
        let bits = gf2::from_hex(s, vars).map_err(CertificateError::Malformed)?;
        Ok(FingerMoves { vars, bits })
    }
}

/// A satisfying witness: the scheme plus the finger moves that produce its
/// parity matrix from the reference drawing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub scheme: DrawingScheme,
    pub finger_moves: FingerMoves,
}

/// On-disk certificate: graph, scheme document, packed finger moves.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateDoc {
    pub graph6: String,
    pub scheme: crate::scheme::SchemeDoc,
    pub finger_moves: String,
}

impl Certificate {
    pub fn to_doc(&self) -> CertificateDoc {
        CertificateDoc {
            graph6: crate::graph::write_graph6(&self.scheme.graph),
            scheme: self.scheme.to_doc(),
            finger_moves: self.finger_moves.to_hex(),
        }
    }

    pub fn from_doc(doc: &CertificateDoc) -> Result<Self, CertificateError> {
        let g = crate::graph::parse_graph6(&doc.graph6)
            .map_err(|e| CertificateError::Malformed(e.to_string()))?;
        let finger_moves = FingerMoves::from_hex(&g, &doc.finger_moves)?;
        let scheme = DrawingScheme::from_doc(g, &doc.scheme)
            .map_err(|e| CertificateError::Malformed(e.to_string()))?;
        Ok(Certificate {
            scheme,
            finger_moves,
        })
    }
}

/// Parity matrix generated by (order, x, y): chord parities of the reference
/// drawing, finger-move toggles at non-shared endpoints, and the quadratic
/// homology term. Works for adjacent pairs too, where only the two existing
/// y variables contribute.
pub fn build_parity(g: &Graph, cr0: &ParityMatrix, x: &[Hom2], y: &FingerMoves) -> ParityMatrix {
    let mut p = ParityMatrix::zeros(g.m());
    for e in 0..g.m() {
        let (a, b) = g.edge(e);
        for f in e + 1..g.m() {
            let (c, d) = g.edge(f);
            let mut bit = cr0.get(e, f) ^ x[e].symplectic(x[f]);
            for v in [c, d] {
                if v != a && v != b {
                    bit ^= y.get(g, e, v);
                }
            }
            for u in [a, b] {
                if u != c && u != d {
                    bit ^= y.get(g, f, u);
                }
            }
            if bit {
                p.set(e, f, true);
            }
        }
    }
    p
}

/// One linear constraint per independent pair: the four finger-move
/// indicators that can toggle the pair sum to the reference parity.
pub fn build_sphere_system(g: &Graph, cr0: &ParityMatrix) -> Gf2System {
    let pairs: Vec<(EdgeId, EdgeId)> = g.independent_pairs().map(|p| (p.e, p.f)).collect();
    let mut sys = Gf2System::new(pairs.len(), y_var_count(g));
    for (row, &(e, f)) in pairs.iter().enumerate() {
        let (a, b) = g.edge(e);
        let (c, d) = g.edge(f);
        for v in [c, d] {
            sys.a.toggle(row, y_var(g, e, v));
        }
        for u in [a, b] {
            sys.a.toggle(row, y_var(g, f, u));
        }
        if cr0.get(e, f) {
            gf2::bit_toggle(&mut sys.b, row);
        }
    }
    sys
}

fn certificate_from_assignment(
    g: &Graph,
    order: &[VertexId],
    cr0: &ParityMatrix,
    x: Vec<Hom2>,
    y: FingerMoves,
) -> Certificate {
    let parity = build_parity(g, cr0, &x, &y);
    let rotation = reference_rotation(g, order).expect("order is a permutation");
    let scheme = DrawingScheme::new(g.clone(), order.to_vec(), rotation, parity, x)
        .expect("assignment produces a consistent scheme");
    Certificate {
        scheme,
        finger_moves: y,
    }
}

/// Decide existence of an independently even drawing in the plane/sphere.
pub fn solve_sphere(g: &Graph) -> SolveResult {
    let order: Vec<VertexId> = (0..g.n()).collect();
    let cr0 = reference_parities(g, &order).expect("identity order");
    let sys = build_sphere_system(g, &cr0);
    let red = sys.reduce();
    let stats = SolveStats { branches: 1 };
    match red.particular_solution(&sys.b) {
        Some(yv) => {
            let y = FingerMoves::from_bits(g, yv);
            let x = vec![Hom2::ZERO; g.m()];
            let cert = certificate_from_assignment(g, &order, &cr0, x, y);
            SolveResult {
                status: Status::Sat,
                certificate: Some(cert),
                stats,
            }
        }
        None => SolveResult {
            status: Status::Unsat,
            certificate: None,
            stats,
        },
    }
}

// ---------------------------------------------------------------------------
// Torus search

#[derive(Debug, Clone)]
pub struct TorusOptions {
    /// Maximum number of class assignments visited before giving up.
    pub budget_branches: u64,
    /// Worker threads for the branch loop; 1 runs strictly sequentially.
    pub workers: usize,
}

impl Default for TorusOptions {
    fn default() -> Self {
        TorusOptions {
            budget_branches: 100_000_000,
            workers: 1,
        }
    }
}

/// Precomputed branch-independent data for one torus search.
struct TorusContext {
    order: Vec<VertexId>,
    cr0: ParityMatrix,
    pairs: Vec<(EdgeId, EdgeId)>,
    red: Reduced,
    sys_b_words: usize,
    /// Edges whose class is enumerated; the rest stay at the zero class.
    branch_edges: Vec<EdgeId>,
    /// Per branch edge: (pair row, other edge) for pairs whose other edge is
    /// also enumerated. Pairs with a pinned partner never change.
    partners: Vec<Vec<(usize, EdgeId)>>,
    /// Left kernel of the linear matrix, flattened row-major over pairs.
    kernel_words: usize,
    kernel_cols: Vec<u64>,
    /// Kernel syndrome of the reference parities.
    s0: Vec<u64>,
}

impl TorusContext {
    fn new(g: &Graph, gauge: bool) -> Self {
        let order: Vec<VertexId> = (0..g.n()).collect();
        let cr0 = reference_parities(g, &order).expect("identity order");
        let sys = build_sphere_system(g, &cr0);
        let pairs: Vec<(EdgeId, EdgeId)> = g.independent_pairs().map(|p| (p.e, p.f)).collect();
        let red = sys.reduce();

        let tree: Vec<EdgeId> = if gauge { g.spanning_forest() } else { Vec::new() };
        let mut in_tree = vec![false; g.m()];
        for &e in &tree {
            in_tree[e] = true;
        }
        let mut branch_edges: Vec<EdgeId> = (0..g.m()).filter(|&e| !in_tree[e]).collect();
        // Constraint-dense edges first: descending endpoint degree sum, ties
        // by id.
        branch_edges.sort_by_key(|&e| {
            let (u, v) = g.edge(e);
            (std::cmp::Reverse(g.degree(u) + g.degree(v)), e)
        });
        let mut enumerated = vec![false; g.m()];
        for &e in &branch_edges {
            enumerated[e] = true;
        }
        let mut partners = vec![Vec::new(); branch_edges.len()];
        for (row, &(e, f)) in pairs.iter().enumerate() {
            if enumerated[e] && enumerated[f] {
                let ie = branch_edges.iter().position(|&x| x == e).unwrap();
                let iff = branch_edges.iter().position(|&x| x == f).unwrap();
                partners[ie].push((row, f));
                partners[iff].push((row, e));
            }
        }

        let kernel = red.left_kernel();
        let kernel_words = gf2::words_for(kernel.len()).max(1);
        // Column view of the kernel: for each pair row, the kernel bits it
        // feeds, so a toggled pair updates the syndrome with one XOR.
        let mut kernel_cols = vec![0u64; pairs.len().max(1) * kernel_words];
        for (ki, kv) in kernel.iter().enumerate() {
            for row in 0..pairs.len() {
                if gf2::bit_get(kv, row) {
                    gf2::bit_toggle(
                        &mut kernel_cols[row * kernel_words..(row + 1) * kernel_words],
                        ki,
                    );
                }
            }
        }
        let mut s0 = vec![0u64; kernel_words];
        for (ki, kv) in kernel.iter().enumerate() {
            if gf2::dot(kv, &sys.b) {
                gf2::bit_toggle(&mut s0, ki);
            }
        }
        TorusContext {
            order,
            cr0,
            pairs,
            red,
            sys_b_words: gf2::words_for(pairs.len()).max(1),
            branch_edges,
            partners,
            kernel_words,
            kernel_cols,
            s0,
        }
    }

    /// Kernel syndrome for an explicit class assignment.
    fn syndrome(&self, x: &[Hom2]) -> Vec<u64> {
        let mut s = self.s0.clone();
        for (row, &(e, f)) in self.pairs.iter().enumerate() {
            if x[e].symplectic(x[f]) {
                gf2::xor_into(
                    &mut s,
                    &self.kernel_cols[row * self.kernel_words..(row + 1) * self.kernel_words],
                );
            }
        }
        s
    }

    /// Right-hand side for an explicit class assignment.
    fn rhs(&self, g: &Graph, x: &[Hom2]) -> Vec<u64> {
        let mut b = vec![0u64; self.sys_b_words];
        for (row, &(e, f)) in self.pairs.iter().enumerate() {
            if self.cr0.get(e, f) ^ x[e].symplectic(x[f]) {
                gf2::bit_set(&mut b, row, true);
            }
        }
        b
    }

    fn certificate(&self, g: &Graph, x: &[Hom2]) -> Option<Certificate> {
        let b = self.rhs(g, x);
        let yv = self.red.particular_solution(&b)?;
        Some(certificate_from_assignment(
            g,
            &self.order,
            &self.cr0,
            x.to_vec(),
            FingerMoves::from_bits(g, yv),
        ))
    }
}

/// Reflected Gray enumeration of base-4 digit strings: exactly one digit
/// changes by one between consecutive assignments, so each branch update
/// touches a single edge class.
struct Gray {
    a: Vec<u8>,
    focus: Vec<usize>,
    dir: Vec<i8>,
}

impl Gray {
    fn new(t: usize) -> Self {
        Gray {
            a: vec![0; t],
            focus: (0..=t).collect(),
            dir: vec![1; t],
        }
    }

    /// Step to the next assignment; None when the space is exhausted.
    fn advance(&mut self) -> Option<(usize, u8, u8)> {
        let t = self.a.len();
        let j = self.focus[0];
        self.focus[0] = 0;
        if j == t {
            return None;
        }
        let old = self.a[j];
        self.a[j] = (self.a[j] as i8 + self.dir[j]) as u8;
        let new = self.a[j];
        if new == 0 || new == 3 {
            self.dir[j] = -self.dir[j];
            self.focus[j] = self.focus[j + 1];
            self.focus[j + 1] = j + 1;
        }
        Some((j, old, new))
    }
}

struct ChunkOutcome {
    sat_x: Option<Vec<Hom2>>,
    visited: u64,
    completed: bool,
}

fn run_chunk(
    g: &Graph,
    ctx: &TorusContext,
    prefix: &[u8],
    found: &AtomicBool,
    visited_global: &AtomicU64,
    budget: u64,
) -> ChunkOutcome {
    let t = ctx.branch_edges.len();
    let suffix = t - prefix.len();
    let mut x = vec![Hom2::ZERO; g.m()];
    for (i, &digit) in prefix.iter().enumerate() {
        x[ctx.branch_edges[i]] = Hom2::from_index(digit);
    }
    let mut s = ctx.syndrome(&x);
    let mut gray = Gray::new(suffix);
    let mut visited = 0u64;
    const SYNC: u64 = 1 << 16;
    let mut since_sync = 0u64;
    loop {
        visited += 1;
        since_sync += 1;
        if gf2::is_zero(&s) {
            visited_global.fetch_add(since_sync, Ordering::Relaxed);
            found.store(true, Ordering::Relaxed);
            return ChunkOutcome {
                sat_x: Some(x),
                visited,
                completed: false,
            };
        }
        if since_sync >= SYNC {
            let total = visited_global.fetch_add(since_sync, Ordering::Relaxed) + since_sync;
            since_sync = 0;
            if found.load(Ordering::Relaxed) || total >= budget {
                return ChunkOutcome {
                    sat_x: None,
                    visited,
                    completed: false,
                };
            }
        }
        let Some((digit, _old, new)) = gray.advance() else {
            visited_global.fetch_add(since_sync, Ordering::Relaxed);
            return ChunkOutcome {
                sat_x: None,
                visited,
                completed: true,
            };
        };
        let e = ctx.branch_edges[prefix.len() + digit];
        let new_class = Hom2::from_index(new);
        let delta = x[e].add(new_class);
        for &(row, other) in &ctx.partners[prefix.len() + digit] {
            if delta.symplectic(x[other]) {
                gf2::xor_into(
                    &mut s,
                    &ctx.kernel_cols[row * ctx.kernel_words..(row + 1) * ctx.kernel_words],
                );
            }
        }
        x[e] = new_class;
    }
}

fn solve_torus_impl(g: &Graph, gauge: bool, opts: &TorusOptions) -> SolveResult {
    let ctx = TorusContext::new(g, gauge);
    let t = ctx.branch_edges.len();
    let found = AtomicBool::new(false);
    let visited_global = AtomicU64::new(0);
    let workers = opts.workers.max(1);
    let mut chunk_results: Vec<ChunkOutcome> = Vec::new();
    if workers == 1 || t == 0 {
        chunk_results.push(run_chunk(
            g,
            &ctx,
            &[],
            &found,
            &visited_global,
            opts.budget_branches,
        ));
    } else {
        // Static partition over leading digits.
        let mut prefix_len = 0;
        while prefix_len < t && 4usize.pow(prefix_len as u32) < workers * 4 {
            prefix_len += 1;
        }
        prefix_len = prefix_len.min(6);
        let chunks: Vec<Vec<u8>> = (0..4usize.pow(prefix_len as u32))
            .map(|mut i| {
                let mut p = vec![0u8; prefix_len];
                for d in (0..prefix_len).rev() {
                    p[d] = (i % 4) as u8;
                    i /= 4;
                }
                p
            })
            .collect();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .expect("thread pool");
        chunk_results = pool.install(|| {
            use rayon::prelude::*;
            chunks
                .par_iter()
                .map(|prefix| {
                    if found.load(Ordering::Relaxed) {
                        return ChunkOutcome {
                            sat_x: None,
                            visited: 0,
                            completed: false,
                        };
                    }
                    run_chunk(g, &ctx, prefix, &found, &visited_global, opts.budget_branches)
                })
                .collect()
        });
    }

    let visited: u64 = chunk_results.iter().map(|c| c.visited).sum();
    let stats = SolveStats { branches: visited };
    if let Some(x) = chunk_results.iter().find_map(|c| c.sat_x.clone()) {
        let cert = ctx
            .certificate(g, &x)
            .expect("zero syndrome implies a consistent system");
        return SolveResult {
            status: Status::Sat,
            certificate: Some(cert),
            stats,
        };
    }
    // Unsat only after every chunk swept its whole subspace.
    let complete = chunk_results.iter().all(|c| c.completed);
    SolveResult {
        status: if complete {
            Status::Unsat
        } else {
            Status::UnknownBudget
        },
        certificate: None,
        stats,
    }
}

/// Torus feasibility with the spanning-forest gauge: tree edges pinned to
/// the zero class, 4^(m-n+c) branches.
pub fn solve_torus(g: &Graph, opts: &TorusOptions) -> SolveResult {
    solve_torus_impl(g, true, opts)
}

/// Gauge-validation oracle: enumerate all 4^m class assignments.
pub fn solve_torus_ungauged(g: &Graph, opts: &TorusOptions) -> SolveResult {
    solve_torus_impl(g, false, opts)
}

// ---------------------------------------------------------------------------
// Certificate enumeration and sampling (for the experiment suite)

/// All gauge-fixed class assignments whose linear system is consistent.
/// None if the budget ran out before the enumeration finished.
pub fn enumerate_sat_branches(g: &Graph, budget: u64) -> Option<Vec<Vec<Hom2>>> {
    let ctx = TorusContext::new(g, true);
    let t = ctx.branch_edges.len();
    let mut x = vec![Hom2::ZERO; g.m()];
    let mut s = ctx.syndrome(&x);
    let mut gray = Gray::new(t);
    let mut out = Vec::new();
    let mut visited = 0u64;
    loop {
        visited += 1;
        if visited > budget {
            return None;
        }
        if gf2::is_zero(&s) {
            out.push(x.clone());
        }
        let Some((digit, _old, new)) = gray.advance() else {
            return Some(out);
        };
        let e = ctx.branch_edges[digit];
        let new_class = Hom2::from_index(new);
        let delta = x[e].add(new_class);
        for &(row, other) in &ctx.partners[digit] {
            if delta.symplectic(x[other]) {
                gf2::xor_into(
                    &mut s,
                    &ctx.kernel_cols[row * ctx.kernel_words..(row + 1) * ctx.kernel_words],
                );
            }
        }
        x[e] = new_class;
    }
}

/// The particular certificate for a branch plus uniformly sampled solutions
/// of its linear system, deterministic in `seed`.
pub fn y_variants(g: &Graph, x: &[Hom2], count: usize, seed: u64) -> Vec<Certificate> {
    let ctx = TorusContext::new(g, true);
    let b = ctx.rhs(g, x);
    let Some(particular) = ctx.red.particular_solution(&b) else {
        return Vec::new();
    };
    let kernel = ctx.red.kernel_basis();
    let mut out = Vec::new();
    let base = certificate_from_assignment(
        g,
        &ctx.order,
        &ctx.cr0,
        x.to_vec(),
        FingerMoves::from_bits(g, particular.clone()),
    );
    out.push(base);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 1..count.max(1) {
        let mut yv = particular.clone();
        for kv in &kernel {
            if rng.gen_bool(0.5) {
                gf2::xor_into(&mut yv, kv);
            }
        }
        out.push(certificate_from_assignment(
            g,
            &ctx.order,
            &ctx.cr0,
            x.to_vec(),
            FingerMoves::from_bits(g, yv),
        ));
    }
    out
}

/// Independent check: rebuild the parity matrix from the recorded order,
/// homology classes and finger moves, compare entry by entry, and confirm
/// every independent pair is even.
pub fn certificate_check(g: &Graph, cert: &Certificate) -> Result<(), CertificateError> {
    if cert.scheme.graph != *g {
        return Err(CertificateError::Malformed(
            "certificate is for a different graph".into(),
        ));
    }
    let cr0 = reference_parities(g, &cert.scheme.order)
        .map_err(|e| CertificateError::Malformed(e.to_string()))?;
    let rebuilt = build_parity(g, &cr0, &cert.scheme.homology, &cert.finger_moves);
    for e in 0..g.m() {
        for f in e + 1..g.m() {
            if rebuilt.get(e, f) != cert.scheme.parity.get(e, f) {
                return Err(CertificateError::MatrixMismatch(e, f));
            }
        }
    }
    if let Some((e, f)) = cert.scheme.first_odd_independent_pair() {
        return Err(CertificateError::OddIndependentPair(e, f));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Minimum independent odd pairs

#[derive(Debug, Clone)]
pub struct MinIocrOptions {
    /// Class-assignment branches to explore on the torus.
    pub branch_budget: u64,
    /// Branch-and-bound nodes for the linear part, shared across branches.
    pub node_budget: u64,
    pub workers: usize,
}

impl Default for MinIocrOptions {
    fn default() -> Self {
        MinIocrOptions {
            branch_budget: 1 << 20,
            node_budget: 50_000_000,
            workers: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MinIocrResult {
    pub value: u32,
    pub certificate: Certificate,
    /// True only if the whole search space was exhausted.
    pub exact: bool,
    pub stats: SolveStats,
}

/// Minimum weight vector in the coset `start + colspace`, by depth-first
/// include/exclude over a column-echelon basis. Rows before the next basis
/// leader are fixed, so their weight is an admissible bound.
struct CosetSearch<'a> {
    basis: &'a [(Vec<u64>, Vec<u64>)],
    prefix_masks: Vec<Vec<u64>>,
    words: usize,
    var_words: usize,
    best_weight: u32,
    best_vec: Vec<u64>,
    best_combo: Vec<u64>,
    nodes: u64,
    exhausted: bool,
}

impl<'a> CosetSearch<'a> {
    fn new(basis: &'a [(Vec<u64>, Vec<u64>)], rows: usize, var_words: usize) -> Self {
        let words = gf2::words_for(rows).max(1);
        // prefix_masks[i] covers rows settled before deciding basis[i];
        // the last entry covers everything.
        let mut leads: Vec<usize> = basis
            .iter()
            .map(|(p, _)| (0..rows).find(|&r| gf2::bit_get(p, r)).unwrap_or(rows))
            .collect();
        leads.push(rows);
        let mut prefix_masks = Vec::with_capacity(basis.len() + 1);
        for &lead in &leads {
            let mut mask = vec![0u64; words];
            for r in 0..lead {
                gf2::bit_set(&mut mask, r, true);
            }
            prefix_masks.push(mask);
        }
        CosetSearch {
            basis,
            prefix_masks,
            words,
            var_words,
            best_weight: u32::MAX,
            best_vec: vec![0; words],
            best_combo: vec![0; var_words],
            nodes: 0,
            exhausted: false,
        }
    }

    fn masked_weight(&self, v: &[u64], mask: &[u64]) -> u32 {
        v.iter().zip(mask).map(|(a, b)| (a & b).count_ones()).sum()
    }

    fn dfs(&mut self, depth: usize, w: &mut Vec<u64>, combo: &mut Vec<u64>, budget: &mut u64) {
        if *budget == 0 {
            self.exhausted = true;
            return;
        }
        *budget -= 1;
        self.nodes += 1;
        let fixed = self.masked_weight(w, &self.prefix_masks[depth]);
        if fixed >= self.best_weight {
            return;
        }
        if depth == self.basis.len() {
            let total = gf2::popcount(w);
            if total < self.best_weight {
                self.best_weight = total;
                self.best_vec = w.clone();
                self.best_combo = combo.clone();
            }
            return;
        }
        // Explore the child with the lighter newly-fixed region first.
        let next_mask = &self.prefix_masks[depth + 1];
        let skip_w = self.masked_weight(w, next_mask);
        gf2::xor_into(w, &self.basis[depth].0);
        let take_w = self.masked_weight(w, next_mask);
        gf2::xor_into(w, &self.basis[depth].0);
        let take_first = take_w < skip_w;
        for take in [take_first, !take_first] {
            if take {
                gf2::xor_into(w, &self.basis[depth].0);
                gf2::xor_into(combo, &self.basis[depth].1);
            }
            self.dfs(depth + 1, w, combo, budget);
            if take {
                gf2::xor_into(w, &self.basis[depth].0);
                gf2::xor_into(combo, &self.basis[depth].1);
            }
            if self.exhausted {
                return;
            }
        }
    }
}

/// Fewest independent pairs left crossing oddly over all assignments, by
/// branch and bound: branch on cotree classes (torus only), then minimize
/// over the linear solution coset.
pub fn min_iocr(g: &Graph, surface: Surface, opts: &MinIocrOptions) -> MinIocrResult {
    let gauge = true;
    let ctx = TorusContext::new(g, gauge);
    let sys = {
        let order: Vec<VertexId> = (0..g.n()).collect();
        let cr0 = reference_parities(g, &order).expect("identity order");
        build_sphere_system(g, &cr0)
    };
    let rows = ctx.pairs.len();
    let var_words = gf2::words_for(y_var_count(g)).max(1);
    let basis = gf2::column_space_basis(&sys.a);

    let mut search = CosetSearch::new(&basis, rows, var_words);
    let mut node_budget = opts.node_budget;
    let mut best_x = vec![Hom2::ZERO; g.m()];
    let mut best_of: Option<(u32, Vec<u64>, Vec<Hom2>)> = None;
    let mut branches = 0u64;
    let mut torus_complete = true;

    let mut consider = |x: &[Hom2],
                        search: &mut CosetSearch,
                        node_budget: &mut u64,
                        best_of: &mut Option<(u32, Vec<u64>, Vec<Hom2>)>,
                        best_x: &mut Vec<Hom2>| {
        let b = ctx.rhs(g, x);
        let before = search.best_weight;
        let mut w = b;
        let mut combo = vec![0u64; var_words];
        search.dfs(0, &mut w, &mut combo, node_budget);
        if search.best_weight < before {
            *best_x = x.to_vec();
            *best_of = Some((
                search.best_weight,
                search.best_combo.clone(),
                x.to_vec(),
            ));
        }
    };

    match surface {
        Surface::Sphere => {
            let x = vec![Hom2::ZERO; g.m()];
            branches = 1;
            consider(&x, &mut search, &mut node_budget, &mut best_of, &mut best_x);
        }
        Surface::Torus => {
            let t = ctx.branch_edges.len();
            let mut x = vec![Hom2::ZERO; g.m()];
            let completed = gray_enumerate(
                t,
                &mut |_| {
                    branches += 1;
                    if branches > opts.branch_budget || search.best_weight == 0 {
                        return true;
                    }
                    consider(&x, &mut search, &mut node_budget, &mut best_of, &mut best_x);
                    search.exhausted && search.best_weight == u32::MAX
                },
                &mut |digit, _old, new| {
                    x[ctx.branch_edges[digit]] = Hom2::from_index(new);
                },
            );
            torus_complete = completed || search.best_weight == 0;
        }
    }

    let (value, combo, x) = best_of.unwrap_or((
        gf2::popcount(&ctx.rhs(g, &vec![Hom2::ZERO; g.m()])),
        vec![0; var_words],
        vec![Hom2::ZERO; g.m()],
    ));
    let y = FingerMoves::from_bits(g, combo);
    let cert = certificate_from_assignment(g, &ctx.order, &ctx.cr0, x, y);
    // The reported value must be the scheme's actual odd-pair count.
    let recount = g
        .independent_pairs()
        .filter(|p| cert.scheme.parity.get(p.e, p.f))
        .count() as u32;
    debug_assert_eq!(recount, value);
    let exact = !search.exhausted && torus_complete;
    MinIocrResult {
        value: recount,
        certificate: cert,
        exact,
        stats: SolveStats { branches },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{
        complete, complete_bipartite, k3n_with_bracers, parse_graph6, petersen, Bracer,
    };
    use rand::seq::SliceRandom;

    fn torus_opts() -> TorusOptions {
        TorusOptions::default()
    }

    #[test]
    fn sphere_feasibility_matches_planarity_on_named_graphs() {
        assert_eq!(solve_sphere(&complete(4)).status, Status::Sat);
        assert_eq!(solve_sphere(&complete(5)).status, Status::Unsat);
        assert_eq!(solve_sphere(&complete_bipartite(3, 3)).status, Status::Unsat);
        assert_eq!(solve_sphere(&petersen()).status, Status::Unsat);
        // Star: no independent pairs at all.
        let star = complete_bipartite(1, 4);
        let r = solve_sphere(&star);
        assert_eq!(r.status, Status::Sat);
        assert!(r.certificate.unwrap().scheme.is_iocr0());
    }

    #[test]
    fn sphere_constraint_counts() {
        let order: Vec<usize> = (0..5).collect();
        let k5 = complete(5);
        let cr0 = reference_parities(&k5, &order).unwrap();
        let sys = build_sphere_system(&k5, &cr0);
        assert_eq!(sys.rows(), 15);
        let k14 = complete_bipartite(1, 4);
        let cr0 = reference_parities(&k14, &(0..5).collect::<Vec<_>>()).unwrap();
        assert_eq!(build_sphere_system(&k14, &cr0).rows(), 0);
    }

    #[test]
    fn sphere_certificates_pass_the_checker() {
        for g in [complete(4), petersen_minus_edge()] {
            let r = solve_sphere(&g);
            if let Some(cert) = r.certificate {
                certificate_check(&g, &cert).unwrap();
                assert!(cert.scheme.is_iocr0());
                assert!(cert.scheme.homology.iter().all(|h| h.is_zero()));
            }
        }
    }

    fn petersen_minus_edge() -> Graph {
        let p = petersen();
        let edges: Vec<_> = p.edges().iter().copied().take(p.m() - 1).collect();
        Graph::from_edges(10, edges).unwrap()
    }

    #[test]
    fn torus_feasibility_k5_and_k33() {
        let r = solve_torus(&complete(5), &torus_opts());
        assert_eq!(r.status, Status::Sat);
        certificate_check(&complete(5), &r.certificate.unwrap()).unwrap();
        let r = solve_torus(&complete_bipartite(3, 3), &torus_opts());
        assert_eq!(r.status, Status::Sat);
        let r = solve_torus(&complete(4), &torus_opts());
        assert_eq!(r.status, Status::Sat);
    }

    #[test]
    fn torus_feasibility_k7_sat() {
        let r = solve_torus(&complete(7), &torus_opts());
        assert_eq!(r.status, Status::Sat);
        certificate_check(&complete(7), &r.certificate.unwrap()).unwrap();
    }

    #[test]
    fn budget_exhaustion_is_unknown_not_unsat() {
        let g = complete_bipartite(3, 7);
        let r = solve_torus(&g, &TorusOptions { budget_branches: 1000, workers: 1 });
        assert_eq!(r.status, Status::UnknownBudget);
    }

    #[test]
    fn gauged_and_ungauged_agree_on_small_graphs() {
        for g6 in ["C~", "DUW", "D~{", "EFz_", "E}lw"] {
            let g = parse_graph6(g6).unwrap();
            let a = solve_torus(&g, &torus_opts()).status;
            let b = solve_torus_ungauged(&g, &torus_opts()).status;
            assert_eq!(a, b, "{g6}");
        }
    }

    #[test]
    fn certificates_survive_document_round_trip() {
        let g = complete(5);
        let cert = solve_torus(&g, &torus_opts()).certificate.unwrap();
        let doc = cert.to_doc();
        let json = serde_json::to_string_pretty(&doc).unwrap();
        let back = Certificate::from_doc(&serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back, cert);
        certificate_check(&g, &back).unwrap();
    }

    #[test]
    fn tampered_certificates_fail() {
        let g = complete(5);
        let mut cert = solve_torus(&g, &torus_opts()).certificate.unwrap();
        // Flip one finger-move bit: the rebuilt matrix diverges.
        let v = {
            let (a, b) = g.edge(0);
            (0..5).find(|w| *w != a && *w != b).unwrap()
        };
        let old = cert.finger_moves.get(&g, 0, v);
        cert.finger_moves.set(&g, 0, v, !old);
        assert!(matches!(
            certificate_check(&g, &cert),
            Err(CertificateError::MatrixMismatch(_, _))
        ));
    }

    #[test]
    fn all_zero_k4_scheme_fails_until_fixed() {
        // Convex-position K4 has exactly one crossing pair; a hand-built
        // all-zero scheme contradicts the recomputation until a finger move
        // cancels the crossing and the adjacent toggles are recorded.
        let g = complete(4);
        let order: Vec<usize> = (0..4).collect();
        let rotation = reference_rotation(&g, &order).unwrap();
        let scheme = DrawingScheme::new(
            g.clone(),
            order.clone(),
            rotation,
            ParityMatrix::zeros(g.m()),
            vec![Hom2::ZERO; g.m()],
        )
        .unwrap();
        let cert = Certificate {
            scheme,
            finger_moves: FingerMoves::zero(&g),
        };
        let e02 = g.edge_between(0, 2).unwrap();
        let e13 = g.edge_between(1, 3).unwrap();
        assert_eq!(
            certificate_check(&g, &cert),
            Err(CertificateError::MatrixMismatch(e02, e13))
        );

        // Cancel the chord crossing with y[e02, 1]; the two adjacent pairs
        // it toggles get recorded in the parity matrix.
        let mut fixed = cert.clone();
        fixed.finger_moves.set(&g, e02, 1, true);
        for f in g.incident_edges(1) {
            if f != e02 {
                fixed.scheme.parity.toggle(e02, f);
            }
        }
        fixed.scheme.parity.toggle(e02, e13); // crossing cancelled
        certificate_check(&g, &fixed).unwrap();
        assert!(fixed.scheme.is_iocr0());
    }

    #[test]
    fn branch_enumeration_and_variants() {
        let g = complete(5);
        let branches = enumerate_sat_branches(&g, 1 << 20).unwrap();
        assert!(!branches.is_empty());
        // The zero branch is the sphere system, unsat for K5.
        assert!(branches.iter().all(|x| x.iter().any(|h| !h.is_zero())));
        let variants = y_variants(&g, &branches[0], 10, 42);
        assert_eq!(variants.len(), 10);
        for cert in &variants {
            certificate_check(&g, cert).unwrap();
            assert!(cert.scheme.is_iocr0());
            assert_eq!(cert.scheme.homology, branches[0]);
        }
        // Deterministic in the seed.
        let again = y_variants(&g, &branches[0], 10, 42);
        assert_eq!(again, variants);
    }

    #[test]
    fn min_iocr_planar_is_zero_and_k5_sphere_is_one() {
        let r = min_iocr(&complete(4), Surface::Sphere, &MinIocrOptions::default());
        assert_eq!((r.value, r.exact), (0, true));
        let r = min_iocr(&complete(5), Surface::Sphere, &MinIocrOptions::default());
        assert_eq!((r.value, r.exact), (1, true));
        let r = min_iocr(&complete(5), Surface::Torus, &MinIocrOptions::default());
        assert_eq!((r.value, r.exact), (0, true));
    }

    #[test]
    fn min_iocr_zero_iff_solver_sat() {
        for g in [complete(4), complete(5), complete_bipartite(3, 3)] {
            let sat = solve_sphere(&g).status == Status::Sat;
            let r = min_iocr(&g, Surface::Sphere, &MinIocrOptions::default());
            assert!(r.exact);
            assert_eq!(r.value == 0, sat);
        }
    }

    #[test]
    fn relabeling_preserves_feasibility() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for base in [complete(5), complete_bipartite(3, 3), complete(4)] {
            let expected = solve_torus(&base, &torus_opts()).status;
            for _ in 0..5 {
                let mut perm: Vec<usize> = (0..base.n()).collect();
                perm.shuffle(&mut rng);
                let mut edges: Vec<(usize, usize)> = base
                    .edges()
                    .iter()
                    .map(|&(u, v)| (perm[u].min(perm[v]), perm[u].max(perm[v])))
                    .collect();
                edges.sort_unstable();
                let g = Graph::from_edges(base.n(), edges).unwrap();
                assert_eq!(solve_torus(&g, &torus_opts()).status, expected);
            }
        }
    }

    #[test]
    fn deleting_edges_preserves_sat() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let g = complete(5);
        assert_eq!(solve_torus(&g, &torus_opts()).status, Status::Sat);
        for _ in 0..10 {
            let keep: Vec<(usize, usize)> = g
                .edges()
                .iter()
                .copied()
                .filter(|_| rng.gen_bool(0.7))
                .collect();
            let h = Graph::from_edges(5, keep).unwrap();
            assert_eq!(solve_torus(&h, &torus_opts()).status, Status::Sat);
        }
    }

    #[test]
    fn k36_with_triangle_is_sat() {
        let g = k3n_with_bracers(
            6,
            &[Bracer::new(0, 1, 1), Bracer::new(1, 2, 1), Bracer::new(0, 2, 1)],
        )
        .unwrap();
        let r = solve_torus(&g, &torus_opts());
        assert_eq!(r.status, Status::Sat);
        certificate_check(&g, &r.certificate.unwrap()).unwrap();
    }

    #[test]
    fn parallel_status_matches_sequential() {
        for g in [complete(5), complete_bipartite(3, 4)] {
            let seq = solve_torus(&g, &TorusOptions { budget_branches: 1 << 30, workers: 1 });
            let par = solve_torus(&g, &TorusOptions { budget_branches: 1 << 30, workers: 2 });
            assert_eq!(seq.status, par.status);
        }
    }
}
