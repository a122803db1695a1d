//! Canonical double cover of an odd-valent ribbon graph and its odd homology.
//!
//! Cover darts are `2d + s` for base dart `d` on sheet `s`. At a vertex with
//! darts `d_0..d_{k-1}` the sign of v along the outgoing ray of `d_j` on sheet
//! 0 is `ε(d_j) = (−1)^j`; after a full turn the sheets swap, so the cover
//! vertex is the single cycle `(d_0,0)..(d_{k-1},0)(d_0,1)..(d_{k-1},1)`.
//! Along an edge the outward signs at the two ends are opposite, which fixes
//! the sheet gluing.
//!
//! The class `γ_e` runs out along `e` on one sheet and back on the other; its
//! period is `2ℓ_e` once oriented by `ε` of the edge's first dart.

use crate::forms::{kontsevich_form, leaf_basis, perimeter_map, poisson_bivector};
use crate::linalg::{dot, q, qfrac, qser, QMatrix, Q};
use crate::ribbon::{MetricRibbonGraph, RibbonError, RibbonGraph};
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoverError {
    #[error("vertex {0} has even valence {1}: the cover is nodal there (unsupported)")]
    EvenValence(usize, usize),
    #[error("face cycles do not span the radical of the intersection form: {0}")]
    CorruptRadical(String),
    #[error("intersection form has odd rank {0}")]
    OddRank(usize),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error(transparent)]
    Ribbon(#[from] RibbonError),
}

fn require_odd(g: &RibbonGraph) -> Result<(), CoverError> {
    match (0..g.vertex_count()).find(|&v| g.valence(v).is_multiple_of(2)) {
        Some(v) => Err(CoverError::EvenValence(v, g.valence(v))),
        None => Ok(()),
    }
}

/// `ε(d) = (−1)^position`.
pub fn eps(g: &RibbonGraph, d: usize) -> i64 {
    if g.position(d).is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Sheet reached at the far end of `d` when leaving on sheet `s`.
pub fn glued_sheet(g: &RibbonGraph, d: usize, s: usize) -> usize {
    let same = eps(g, d) == eps(g, g.pair(d));
    s ^ usize::from(same)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DoubleCover {
    pub base: RibbonGraph,
    pub branch_vertices: Vec<usize>,
    pub cover_graph: RibbonGraph,
    pub deck_involution: Vec<usize>,
}

impl DoubleCover {
    pub fn genus(&self) -> usize {
        self.cover_graph.genus()
    }

    /// `2g + m_odd/2 − 1`.
    pub fn formula_genus(&self) -> usize {
        2 * self.base.genus() + self.branch_vertices.len() / 2 - 1
    }

    /// Whether μ is an involutive ribbon automorphism covering the identity.
    pub fn deck_is_automorphism(&self) -> bool {
        let c = &self.cover_graph;
        let mu = &self.deck_involution;
        (0..c.dart_count()).all(|x| {
            mu[mu[x]] == x && mu[x] != x && mu[c.rot(x)] == c.rot(mu[x]) && mu[c.pair(x)] == c.pair(mu[x]) && mu[x] / 2 == x / 2
        })
    }
}

pub fn build_cover(g: &RibbonGraph) -> Result<DoubleCover, CoverError> {
    require_odd(g)?;
    let cycles = g
        .vertex_cycles()
        .iter()
        .map(|cyc| {
            let mut c: Vec<usize> = cyc.iter().map(|&d| 2 * d).collect();
            c.extend(cyc.iter().map(|&d| 2 * d + 1));
            c
        })
        .collect();
    let mut edges = Vec::new();
    for &[a, b] in g.edges() {
        for s in 0..2 {
            edges.push([2 * a + s, 2 * b + glued_sheet(g, a, s)]);
        }
    }
    let cover_graph = RibbonGraph::new(cycles, edges)?;
    let deck_involution = (0..2 * g.dart_count()).map(|x| x ^ 1).collect();
    Ok(DoubleCover {
        base: g.clone(),
        branch_vertices: (0..g.vertex_count()).collect(),
        cover_graph,
        deck_involution,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OddHomology {
    /// γ_e ∘ γ_e'.
    pub j: QMatrix,
    /// Row f: the face class ½(ĉ_f − μĉ_f) in the γ_e basis.
    pub face_cycles: QMatrix,
}

/// One pass of a γ-cycle through a cover vertex.
struct Passage {
    edge: usize,
    sign: i64,
    inn: usize,
    out: usize,
}

fn chord_sign(k2: usize, a: &Passage, b: &Passage) -> i64 {
    let span = (a.inn + k2 - a.out) % k2;
    let left = |x: usize| {
        let off = (x + k2 - a.out) % k2;
        off > 0 && off < span
    };
    match (left(b.out), left(b.inn)) {
        (true, false) => -1,
        (false, true) => 1,
        _ => 0,
    }
}

/// Integer intersection matrix of the γ_e classes via chord crossings at the branch points.
pub fn intersection_matrix(g: &RibbonGraph) -> Result<OddHomology, CoverError> {
    require_odd(g)?;
    let ne = g.edge_count();
    let mut by_vertex: Vec<Vec<Passage>> = (0..g.vertex_count()).map(|_| Vec::new()).collect();
    for (e, &[a, b]) in g.edges().iter().enumerate() {
        let sign = eps(g, a);
        let ka = g.valence(g.vertex_of(a));
        let kb = g.valence(g.vertex_of(b));
        by_vertex[g.vertex_of(a)].push(Passage { edge: e, sign, inn: g.position(a) + ka, out: g.position(a) });
        let sb = glued_sheet(g, a, 0);
        by_vertex[g.vertex_of(b)].push(Passage {
            edge: e,
            sign,
            inn: g.position(b) + sb * kb,
            out: g.position(b) + (1 - sb) * kb,
        });
    }
    let mut j = QMatrix::zeros(ne, ne);
    for (v, ps) in by_vertex.iter().enumerate() {
        let k2 = 2 * g.valence(v);
        for a in ps {
            for b in ps {
                if a.edge != b.edge {
                    let s = a.sign * b.sign * chord_sign(k2, a, b);
                    if s != 0 {
                        j[(a.edge, b.edge)] += q(s);
                    }
                }
            }
        }
    }
    let face_cycles = perimeter_map(g).matrix.scale(&qfrac(1, 2));
    Ok(OddHomology { j, face_cycles })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SymplecticBasis {
    /// Columns: a_1..a_g, b_1..b_g, then the face classes.
    pub u: QMatrix,
    #[serde(serialize_with = "qser::vecvec")]
    pub a_classes: Vec<Vec<Q>>,
    #[serde(serialize_with = "qser::vecvec")]
    pub b_classes: Vec<Vec<Q>>,
    #[serde(serialize_with = "qser::vecvec")]
    pub radical_classes: Vec<Vec<Q>>,
}

impl SymplecticBasis {
    pub fn genus(&self) -> usize {
        self.a_classes.len()
    }
}

/// Standard skew form of size 2g padded with an r×r zero block.
pub fn standard_form(g: usize, r: usize) -> QMatrix {
    let mut m = QMatrix::zeros(2 * g + r, 2 * g + r);
    for i in 0..g {
        m[(i, g + i)] = Q::one();
        m[(g + i, i)] = -Q::one();
    }
    m
}

/// Rational symplectic Gram–Schmidt; the radical is taken to be the face classes and checked.
pub fn symplectic_basis(h: &OddHomology) -> Result<SymplecticBasis, CoverError> {
    let j = &h.j;
    let n = j.rows();
    let rank = j.rank();
    if !rank.is_multiple_of(2) {
        return Err(CoverError::OddRank(rank));
    }
    let mut pool: Vec<Vec<Q>> = (0..n).map(|i| crate::linalg::unit(n, i)).collect();
    let (mut a_cl, mut b_cl) = (Vec::new(), Vec::new());
    loop {
        let mut hit = None;
        'search: for i in 0..pool.len() {
            for k in i + 1..pool.len() {
                let w = j.pair(&pool[i], &pool[k]);
                if !w.is_zero() {
                    hit = Some((i, k, w));
                    break 'search;
                }
            }
        }
        let Some((i, k, w)) = hit else { break };
        let a = pool[i].clone();
        let b: Vec<Q> = pool[k].iter().map(|x| x / &w).collect();
        pool.remove(k);
        pool.remove(i);
        for v in pool.iter_mut() {
            let vb = j.pair(v, &b);
            let va = j.pair(v, &a);
            for t in 0..n {
                let x = &v[t] - &vb * &a[t] + &va * &b[t];
                v[t] = x;
            }
        }
        a_cl.push(a);
        b_cl.push(b);
    }
    let radical: Vec<Vec<Q>> = (0..h.face_cycles.rows()).map(|f| h.face_cycles.row(f)).collect();
    for (f, c) in radical.iter().enumerate() {
        if !j.mul_vec(c).iter().all(|x| x.is_zero()) {
            return Err(CoverError::CorruptRadical(format!("face {f} pairs nontrivially")));
        }
    }
    if QMatrix::from_rows(&radical).rank() != n - rank || radical.len() != n - rank {
        return Err(CoverError::CorruptRadical(format!(
            "{} face classes for a radical of dimension {}",
            radical.len(),
            n - rank
        )));
    }
    let mut cols = a_cl.clone();
    cols.extend(b_cl.iter().cloned());
    cols.extend(radical.iter().cloned());
    let u = QMatrix::from_cols(&cols, n);
    let gm = a_cl.len();
    let std = standard_form(gm, radical.len());
    if &(&u.transpose() * j) * &u != std {
        return Err(CoverError::CorruptRadical("UᵀJU is not in normal form".into()));
    }
    Ok(SymplecticBasis { u, a_classes: a_cl, b_classes: b_cl, radical_classes: radical })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HomologicalCoordinates {
    #[serde(serialize_with = "qser::vec")]
    pub a: Vec<Q>,
    #[serde(serialize_with = "qser::vec")]
    pub b: Vec<Q>,
    #[serde(serialize_with = "qser::vec")]
    pub p: Vec<Q>,
}

/// Periods `P_{γ_e} = 2ℓ_e` pushed through the symplectic basis.
pub fn homological_coordinates(mg: &MetricRibbonGraph, sb: &SymplecticBasis) -> Result<HomologicalCoordinates, CoverError> {
    let n = mg.lengths.len();
    if sb.u.rows() != n {
        return Err(CoverError::Dimension(format!("basis has {} rows, graph has {n} edges", sb.u.rows())));
    }
    let per: Vec<Q> = mg.lengths.iter().map(|l| l * q(2)).collect();
    Ok(HomologicalCoordinates {
        a: sb.a_classes.iter().map(|c| dot(c, &per)).collect(),
        b: sb.b_classes.iter().map(|c| dot(c, &per)).collect(),
        p: mg.perimeters(),
    })
}

/// `Σ dA_i∧dB_i` as a matrix in the dℓ basis.
pub fn homological_form(sb: &SymplecticBasis, edges: usize) -> QMatrix {
    let mut m = QMatrix::zeros(edges, edges);
    for (a, b) in sb.a_classes.iter().zip(&sb.b_classes) {
        for r in 0..edges {
            for c in 0..edges {
                let x = &m[(r, c)] + q(4) * (&a[r] * &b[c] - &b[r] * &a[c]);
                m[(r, c)] = x;
            }
        }
    }
    m
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DarbouxReport {
    pub holds: bool,
    pub kontsevich_on_leaf: QMatrix,
    pub homological_on_leaf: QMatrix,
    pub j_equals_four_p: bool,
}

pub fn darboux_report(g: &RibbonGraph) -> Result<DarbouxReport, CoverError> {
    let h = intersection_matrix(g)?;
    let sb = symplectic_basis(&h)?;
    let k = leaf_basis(g);
    let omega = kontsevich_form(g).matrix;
    let hom = homological_form(&sb, g.edge_count());
    let kt = k.transpose();
    let lo = &(&kt * &omega) * &k;
    let lh = &(&kt * &hom) * &k;
    let four_p = poisson_bivector(g).matrix.scale(&q(4));
    Ok(DarbouxReport { holds: lo == lh, kontsevich_on_leaf: lo, homological_on_leaf: lh, j_equals_four_p: h.j == four_p })
}

/// Exact equality of Σ dA∧dB and the Kontsevich form on fixed-perimeter directions.
pub fn darboux_check(g: &RibbonGraph) -> Result<bool, CoverError> {
    Ok(darboux_report(g)?.holds)
}
