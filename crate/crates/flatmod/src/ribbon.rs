//! Ribbon graphs as a pair of dart permutations.
//!
//! Darts are `0..n`. Each vertex lists its darts counterclockwise; each edge
//! is a pair of darts. The face permutation is `rot ∘ pair` (cross the edge,
//! then turn counterclockwise at the far vertex). With this convention the
//! Kontsevich form inverts the Poisson bivector with a plus sign, which the
//! `forms` tests pin down.

use crate::linalg::{fmt_q, parse_q, Q};
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

/// Largest dart count the enumerator accepts.
pub const MAX_ENUM_DARTS: usize = 24;

const NONE: usize = usize::MAX;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RibbonError {
    #[error("invalid ribbon graph: {}", .0.join("; "))]
    Invalid(Vec<String>),
    #[error("edge {0} does not exist")]
    NoSuchEdge(usize),
    #[error("edge {0} is a loop: loop contraction corresponds to W11 degeneration, use moves module")]
    LoopContraction(usize),
    #[error("enumeration refuses {0} darts (limit {MAX_ENUM_DARTS})")]
    TooManyDarts(usize),
    #[error("length for edge {0} is missing")]
    MissingLength(usize),
    #[error("length {0:?} is not a rational or float")]
    BadLength(String),
    #[error("length of edge {0} is negative")]
    NegativeLength(usize),
}

/// JSON interchange record for (metric) ribbon graphs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub darts: usize,
    pub vertex_cycles: Vec<Vec<usize>>,
    pub edge_pairing: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub lengths: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<serde_json::Value>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub issues: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Check every ribbon-graph invariant on a raw record.
pub fn validate(f: &GraphFile) -> ValidationReport {
    let mut issues = Vec::new();
    let n = f.darts;
    if !n.is_multiple_of(2) {
        issues.push(format!("dart count {n} is odd"));
    }
    let mut seen_v = vec![0usize; n];
    for cyc in &f.vertex_cycles {
        if cyc.is_empty() {
            issues.push("empty vertex cycle".into());
        }
        for &d in cyc {
            if d >= n {
                issues.push(format!("dart {d} out of range"));
            } else {
                seen_v[d] += 1;
            }
        }
    }
    if seen_v.iter().any(|&c| c != 1) {
        issues.push("vertex cycles do not partition the darts".into());
    }
    let mut seen_e = vec![0usize; n];
    let mut fixed = false;
    for &[a, b] in &f.edge_pairing {
        if a >= n || b >= n {
            issues.push(format!("edge ({a},{b}) out of range"));
            continue;
        }
        if a == b {
            fixed = true;
            seen_e[a] += 1;
        } else {
            seen_e[a] += 1;
            seen_e[b] += 1;
        }
    }
    if fixed {
        issues.push("pairing not fixed-point-free".into());
    }
    if seen_e.iter().any(|&c| c != 1) {
        issues.push("edge pairing does not cover every dart exactly once".into());
    }
    for (k, v) in &f.lengths {
        match k.parse::<usize>() {
            Ok(e) if e < f.edge_pairing.len() => {}
            _ => issues.push(format!("length key {k:?} is not an edge id")),
        }
        match parse_q(v) {
            Some(x) if x.is_negative() => issues.push(format!("length of edge {k} is negative")),
            Some(_) => {}
            None => issues.push(format!("length {v:?} is not a rational or float")),
        }
    }
    if !issues.is_empty() {
        return ValidationReport { issues };
    }

    let (rot, pair) = perms_of(&f.vertex_cycles, &f.edge_pairing, n);
    if n > 0 && !connected(&rot, &pair) {
        issues.push("not connected".into());
    }
    let faces = orbits(&face_perm(&rot, &pair)).len() as i64;
    let chi = f.vertex_cycles.len() as i64 - f.edge_pairing.len() as i64 + faces;
    if chi % 2 != 0 {
        issues.push("Euler characteristic odd".into());
    } else if chi > 2 {
        issues.push(format!("Euler characteristic {chi} exceeds 2"));
    }
    ValidationReport { issues }
}

fn perms_of(cycles: &[Vec<usize>], edges: &[[usize; 2]], n: usize) -> (Vec<usize>, Vec<usize>) {
    let mut rot = vec![0; n];
    for cyc in cycles {
        for (i, &d) in cyc.iter().enumerate() {
            rot[d] = cyc[(i + 1) % cyc.len()];
        }
    }
    let mut pair = vec![0; n];
    for &[a, b] in edges {
        pair[a] = b;
        pair[b] = a;
    }
    (rot, pair)
}

fn face_perm(rot: &[usize], pair: &[usize]) -> Vec<usize> {
    (0..rot.len()).map(|d| rot[pair[d]]).collect()
}

fn orbits(p: &[usize]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; p.len()];
    let mut out = Vec::new();
    for s in 0..p.len() {
        if seen[s] {
            continue;
        }
        let mut cyc = Vec::new();
        let mut d = s;
        while !seen[d] {
            seen[d] = true;
            cyc.push(d);
            d = p[d];
        }
        out.push(cyc);
    }
    out
}

fn connected(rot: &[usize], pair: &[usize]) -> bool {
    let n = rot.len();
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    let mut count = 1;
    while let Some(d) = stack.pop() {
        for nb in [rot[d], pair[d]] {
            if !seen[nb] {
                seen[nb] = true;
                count += 1;
                stack.push(nb);
            }
        }
    }
    count == n
}

/// A connected ribbon graph. Construction validates every invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RibbonGraph {
    vertex_cycles: Vec<Vec<usize>>,
    edges: Vec<[usize; 2]>,
    rot: Vec<usize>,
    rot_inv: Vec<usize>,
    pair: Vec<usize>,
    vertex_of: Vec<usize>,
    pos: Vec<usize>,
    edge_of: Vec<usize>,
    labels: Option<serde_json::Value>,
}

impl RibbonGraph {
    pub fn new(vertex_cycles: Vec<Vec<usize>>, edges: Vec<[usize; 2]>) -> Result<Self, RibbonError> {
        let darts = vertex_cycles.iter().map(|c| c.len()).sum();
        Self::from_file(&GraphFile {
            darts,
            vertex_cycles,
            edge_pairing: edges,
            lengths: BTreeMap::new(),
            labels: None,
        })
    }

    pub fn from_file(f: &GraphFile) -> Result<Self, RibbonError> {
        let rep = validate(f);
        if !rep.is_valid() {
            return Err(RibbonError::Invalid(rep.issues));
        }
        let n = f.darts;
        let (rot, pair) = perms_of(&f.vertex_cycles, &f.edge_pairing, n);
        let mut rot_inv = vec![0; n];
        for d in 0..n {
            rot_inv[rot[d]] = d;
        }
        let mut vertex_of = vec![0; n];
        let mut pos = vec![0; n];
        for (v, cyc) in f.vertex_cycles.iter().enumerate() {
            for (i, &d) in cyc.iter().enumerate() {
                vertex_of[d] = v;
                pos[d] = i;
            }
        }
        let mut edge_of = vec![0; n];
        for (e, &[a, b]) in f.edge_pairing.iter().enumerate() {
            edge_of[a] = e;
            edge_of[b] = e;
        }
        Ok(RibbonGraph {
            vertex_cycles: f.vertex_cycles.clone(),
            edges: f.edge_pairing.clone(),
            rot,
            rot_inv,
            pair,
            vertex_of,
            pos,
            edge_of,
            labels: f.labels.clone(),
        })
    }

    pub fn to_file(&self) -> GraphFile {
        GraphFile {
            darts: self.dart_count(),
            vertex_cycles: self.vertex_cycles.clone(),
            edge_pairing: self.edges.clone(),
            lengths: BTreeMap::new(),
            labels: self.labels.clone(),
        }
    }

    pub fn dart_count(&self) -> usize {
        self.rot.len()
    }
    pub fn vertex_count(&self) -> usize {
        self.vertex_cycles.len()
    }
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }
    pub fn vertex_cycles(&self) -> &[Vec<usize>] {
        &self.vertex_cycles
    }
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }
    pub fn labels(&self) -> Option<&serde_json::Value> {
        self.labels.as_ref()
    }
    /// Next dart counterclockwise at the same vertex.
    pub fn rot(&self, d: usize) -> usize {
        self.rot[d]
    }
    pub fn rot_inv(&self, d: usize) -> usize {
        self.rot_inv[d]
    }
    /// The other half of the dart's edge.
    pub fn pair(&self, d: usize) -> usize {
        self.pair[d]
    }
    pub fn vertex_of(&self, d: usize) -> usize {
        self.vertex_of[d]
    }
    /// Position of the dart within its vertex cycle.
    pub fn position(&self, d: usize) -> usize {
        self.pos[d]
    }
    pub fn edge_of(&self, d: usize) -> usize {
        self.edge_of[d]
    }
    pub fn is_loop(&self, e: usize) -> bool {
        let [a, b] = self.edges[e];
        self.vertex_of[a] == self.vertex_of[b]
    }
    pub fn valence(&self, v: usize) -> usize {
        self.vertex_cycles[v].len()
    }
    pub fn valences(&self) -> Vec<usize> {
        self.vertex_cycles.iter().map(|c| c.len()).collect()
    }
    pub fn is_trivalent(&self) -> bool {
        self.vertex_cycles.iter().all(|c| c.len() == 3)
    }
    pub fn is_odd_valent(&self) -> bool {
        self.vertex_cycles.iter().all(|c| c.len() % 2 == 1)
    }

    pub fn face_next(&self, d: usize) -> usize {
        self.rot[self.pair[d]]
    }

    /// Face cycles of darts, each starting at its smallest dart.
    pub fn faces(&self) -> Vec<Vec<usize>> {
        orbits(&face_perm(&self.rot, &self.pair))
    }

    /// Face boundaries as edge sequences.
    pub fn face_edges(&self) -> Vec<Vec<usize>> {
        self.faces().iter().map(|f| f.iter().map(|&d| self.edge_of[d]).collect()).collect()
    }

    pub fn face_count(&self) -> usize {
        self.faces().len()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count() as i64 - self.edge_count() as i64 + self.face_count() as i64
    }

    pub fn genus(&self) -> usize {
        ((2 - self.euler_characteristic()) / 2) as usize
    }

    /// Lexicographically least breadth-first encoding over all root darts.
    pub fn canonical_form(&self) -> CanonicalForm {
        let n = self.dart_count();
        let mut best: Option<(Vec<usize>, Vec<usize>)> = None;
        for root in 0..n {
            let (code, lab) = self.encode_from(root);
            if best.as_ref().is_none_or(|(b, _)| code < *b) {
                best = Some((code, lab));
            }
        }
        let (code, relabel) = best.unwrap_or_default();
        CanonicalForm { code, relabel }
    }

    fn encode_from(&self, root: usize) -> (Vec<usize>, Vec<usize>) {
        let n = self.dart_count();
        let mut lab = vec![NONE; n];
        let mut order = Vec::with_capacity(n);
        lab[root] = 0;
        order.push(root);
        let mut i = 0;
        while i < order.len() {
            let d = order[i];
            for nb in [self.rot[d], self.pair[d]] {
                if lab[nb] == NONE {
                    lab[nb] = order.len();
                    order.push(nb);
                }
            }
            i += 1;
        }
        let mut code = Vec::with_capacity(2 * n);
        for &d in &order {
            code.push(lab[self.rot[d]]);
            code.push(lab[self.pair[d]]);
        }
        (code, lab)
    }

    /// The graph relabeled by its canonical form.
    pub fn canonical_graph(&self) -> RibbonGraph {
        let cf = self.canonical_form();
        cf.graph()
    }

    pub fn is_isomorphic(&self, other: &RibbonGraph) -> bool {
        self.dart_count() == other.dart_count() && self.canonical_form().code == other.canonical_form().code
    }

    /// All dart bijections `phi` with `phi∘rot = rot'∘phi` and `phi∘pair = pair'∘phi`.
    pub fn isomorphisms(&self, other: &RibbonGraph) -> Vec<Vec<usize>> {
        let n = self.dart_count();
        if n != other.dart_count() || n == 0 {
            return Vec::new();
        }
        (0..n).filter_map(|t| self.iso_with(other, 0, t)).collect()
    }

    fn iso_with(&self, other: &RibbonGraph, s: usize, t: usize) -> Option<Vec<usize>> {
        let n = self.dart_count();
        let mut phi = vec![NONE; n];
        let mut used = vec![false; n];
        phi[s] = t;
        used[t] = true;
        let mut stack = vec![s];
        while let Some(d) = stack.pop() {
            let img = phi[d];
            for (a, b) in [(self.rot[d], other.rot[img]), (self.pair[d], other.pair[img])] {
                if phi[a] == NONE {
                    if used[b] {
                        return None;
                    }
                    phi[a] = b;
                    used[b] = true;
                    stack.push(a);
                } else if phi[a] != b {
                    return None;
                }
            }
        }
        Some(phi)
    }

    /// Merge the endpoints of a non-loop edge, keeping cyclic order.
    pub fn contract_edge(&self, e: usize) -> Result<(RibbonGraph, Vec<usize>), RibbonError> {
        if e >= self.edge_count() {
            return Err(RibbonError::NoSuchEdge(e));
        }
        if self.is_loop(e) {
            return Err(RibbonError::LoopContraction(e));
        }
        let [d, dp] = self.edges[e];
        let (x, xp) = (self.vertex_of[d], self.vertex_of[dp]);
        let after = |start: usize| {
            let mut out = Vec::new();
            let mut c = self.rot[start];
            while c != start {
                out.push(c);
                c = self.rot[c];
            }
            out
        };
        let mut merged = after(d);
        merged.extend(after(dp));
        let n = self.dart_count();
        let mut map = vec![NONE; n];
        let mut next = 0;
        for old in 0..n {
            if old != d && old != dp {
                map[old] = next;
                next += 1;
            }
        }
        let keep = x.min(xp);
        let mut cycles = Vec::new();
        for v in 0..self.vertex_count() {
            if v == keep {
                cycles.push(merged.iter().map(|&c| map[c]).collect());
            } else if v != x && v != xp {
                cycles.push(self.vertex_cycles[v].iter().map(|&c| map[c]).collect());
            }
        }
        let edges = self
            .edges
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != e)
            .map(|(_, &[a, b])| [map[a], map[b]])
            .collect();
        Ok((RibbonGraph::new(cycles, edges)?, map))
    }

    /// Rotate every vertex cycle to begin at its smallest dart.
    pub fn normalized_cycles(&self) -> Vec<Vec<usize>> {
        self.vertex_cycles
            .iter()
            .map(|c| {
                let k = (0..c.len()).min_by_key(|&i| c[i]).unwrap_or(0);
                c[k..].iter().chain(&c[..k]).copied().collect()
            })
            .collect()
    }
}

/// Canonical encoding plus the relabeling that produces it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CanonicalForm {
    /// For canonical dart i: (rot(i), pair(i)), flattened.
    pub code: Vec<usize>,
    /// Old dart -> canonical dart.
    pub relabel: Vec<usize>,
}

impl CanonicalForm {
    pub fn graph(&self) -> RibbonGraph {
        let n = self.code.len() / 2;
        let rot: Vec<usize> = (0..n).map(|i| self.code[2 * i]).collect();
        let pair: Vec<usize> = (0..n).map(|i| self.code[2 * i + 1]).collect();
        let cycles = orbits(&rot);
        let edges = (0..n).filter(|&d| d < pair[d]).map(|d| [d, pair[d]]).collect();
        RibbonGraph::new(cycles, edges).expect("canonical form of a valid graph")
    }
}

/// Which vertex valences an enumeration admits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValenceFilter {
    Trivalent,
    /// Exact multiset of valences.
    Valences(Vec<usize>),
}

/// All connected ribbon graphs of the given genus, face count and valences,
/// up to isomorphism, sorted by canonical code.
pub fn enumerate(genus: usize, faces: usize, filter: &ValenceFilter) -> Result<Vec<RibbonGraph>, RibbonError> {
    let valences = match filter {
        ValenceFilter::Trivalent => {
            let v = 4 * genus as i64 - 4 + 2 * faces as i64;
            if v <= 0 {
                return Ok(Vec::new());
            }
            vec![3; v as usize]
        }
        ValenceFilter::Valences(v) => {
            let mut v = v.clone();
            v.sort_unstable();
            v
        }
    };
    if valences.is_empty() || valences.contains(&0) {
        return Ok(Vec::new());
    }
    let darts: usize = valences.iter().sum();
    if !darts.is_multiple_of(2) {
        return Ok(Vec::new());
    }
    if darts > MAX_ENUM_DARTS {
        return Err(RibbonError::TooManyDarts(darts));
    }
    let chi = valences.len() as i64 - (darts / 2) as i64 + faces as i64;
    if chi != 2 - 2 * genus as i64 {
        return Ok(Vec::new());
    }

    let mut cycles = Vec::new();
    let mut next = 0;
    for &k in &valences {
        cycles.push((next..next + k).collect::<Vec<_>>());
        next += k;
    }
    let (rot, _) = perms_of(&cycles, &[], darts);
    let mut found: BTreeMap<Vec<usize>, RibbonGraph> = BTreeMap::new();
    let mut st = Search {
        rot: &rot,
        starts: cycles.iter().map(|c| c[0]).collect(),
        vertex: cycles.iter().enumerate().flat_map(|(v, c)| c.iter().map(move |_| v)).collect(),
        valences: &valences,
        touched: vec![false; valences.len()],
        pair: vec![NONE; darts],
        faces,
    };
    st.touched[0] = true;
    st.run(&mut |pair| {
        let edges: Vec<[usize; 2]> = (0..darts).filter(|&d| d < pair[d]).map(|d| [d, pair[d]]).collect();
        let g = RibbonGraph::new(cycles.clone(), edges).expect("generated graph is valid");
        let cf = g.canonical_form();
        found.entry(cf.code.clone()).or_insert_with(|| cf.graph());
    });
    Ok(found.into_values().collect())
}

/// Perfect matchings grown from vertex 0 so the partial graph stays connected.
/// Untouched vertices of equal valence are interchangeable and rotation
/// symmetric, so only the first dart of the first one of each valence is tried.
struct Search<'a> {
    rot: &'a [usize],
    starts: Vec<usize>,
    vertex: Vec<usize>,
    valences: &'a [usize],
    touched: Vec<bool>,
    pair: Vec<usize>,
    faces: usize,
}

impl Search<'_> {
    fn run(&mut self, visit: &mut dyn FnMut(&[usize])) {
        let n = self.pair.len();
        let Some(a) = (0..n).find(|&d| self.pair[d] == NONE && self.touched[self.vertex[d]]) else {
            if self.touched.iter().all(|&t| t) && orbits(&face_perm(self.rot, &self.pair)).len() == self.faces {
                visit(&self.pair);
            }
            return;
        };
        let mut fresh_tried: Vec<usize> = Vec::new();
        for b in a + 1..n {
            if self.pair[b] != NONE {
                continue;
            }
            let w = self.vertex[b];
            let fresh = !self.touched[w];
            if fresh {
                if b != self.starts[w] || fresh_tried.contains(&self.valences[w]) {
                    continue;
                }
                fresh_tried.push(self.valences[w]);
                self.touched[w] = true;
            }
            self.pair[a] = b;
            self.pair[b] = a;
            self.run(visit);
            self.pair[a] = NONE;
            self.pair[b] = NONE;
            if fresh {
                self.touched[w] = false;
            }
        }
    }
}

/// A ribbon graph with nonnegative rational edge lengths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricRibbonGraph {
    pub graph: RibbonGraph,
    pub lengths: Vec<Q>,
}

impl MetricRibbonGraph {
    /// Lengths must be nonnegative; zero marks a facet point.
    pub fn new(graph: RibbonGraph, lengths: Vec<Q>) -> Result<Self, RibbonError> {
        if lengths.len() != graph.edge_count() {
            return Err(RibbonError::MissingLength(lengths.len().min(graph.edge_count())));
        }
        if let Some(e) = lengths.iter().position(|l| l.is_negative()) {
            return Err(RibbonError::NegativeLength(e));
        }
        Ok(MetricRibbonGraph { graph, lengths })
    }

    pub fn from_file(f: &GraphFile) -> Result<Self, RibbonError> {
        let graph = RibbonGraph::from_file(f)?;
        let mut lengths = Vec::with_capacity(graph.edge_count());
        for e in 0..graph.edge_count() {
            let s = f.lengths.get(&e.to_string()).ok_or(RibbonError::MissingLength(e))?;
            lengths.push(parse_q(s).ok_or_else(|| RibbonError::BadLength(s.clone()))?);
        }
        Self::new(graph, lengths)
    }

    pub fn to_file(&self) -> GraphFile {
        let mut f = self.graph.to_file();
        f.lengths = self.lengths.iter().enumerate().map(|(e, l)| (e.to_string(), fmt_q(l))).collect();
        f
    }

    /// One perimeter per face, in `faces()` order.
    pub fn perimeters(&self) -> Vec<Q> {
        self.graph
            .face_edges()
            .iter()
            .map(|f| f.iter().fold(Q::zero(), |acc, &e| acc + &self.lengths[e]))
            .collect()
    }

    pub fn is_facet_point(&self) -> bool {
        self.lengths.iter().any(|l| l.is_zero())
    }

    pub fn contract_edge(&self, e: usize) -> Result<MetricRibbonGraph, RibbonError> {
        let (g, _) = self.graph.contract_edge(e)?;
        let lengths = self.lengths.iter().enumerate().filter(|&(k, _)| k != e).map(|(_, l)| l.clone()).collect();
        MetricRibbonGraph::new(g, lengths)
    }
}

/// Distinct canonical classes among a set of graphs.
pub fn canonical_classes<'a>(graphs: impl IntoIterator<Item = &'a RibbonGraph>) -> BTreeSet<Vec<usize>> {
    graphs.into_iter().map(|g| g.canonical_form().code).collect()
}

/// The genus-one, one-face trivalent graph with rotations (a b c)(a' b' c').
pub fn m11_graph() -> RibbonGraph {
    RibbonGraph::new(vec![vec![0, 1, 2], vec![3, 4, 5]], vec![[0, 3], [1, 4], [2, 5]]).expect("valid")
}

/// Planar theta graph, rotations (a b c)(a' c' b').
pub fn planar_theta() -> RibbonGraph {
    RibbonGraph::new(vec![vec![0, 1, 2], vec![3, 5, 4]], vec![[0, 3], [1, 4], [2, 5]]).expect("valid")
}
