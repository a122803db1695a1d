//! Whitehead moves, transport of odd and even homology, pentagon loops and
//! combinatorial Dehn twists.
//!
//! A move on edge `e = (d, d')` with `x = (d a1 a2)`, `x' = (d' b1 b2)`
//! produces `x = (d a2 b1)`, `x' = (d' b2 a1)`. Dart ids are kept, so the dart
//! correspondence is the identity. The reverse move is the exact inverse.
//!
//! Odd classes transport as `γ_e ↦ −γ_e` (the vanishing period changes sign)
//! and, for the two corner darts that change vertex (`a1`, `b1` forward;
//! `a2`, `b2` in reverse), `γ_c ↦ γ_c + t_δ γ_e` on their edges. The `t_δ`
//! are solved from the intertwining equations `Tᵀ J' T = J`.
//!
//! Even classes are edge flows; the flow on the moved edge is whatever
//! conservation at the moved vertices demands.

use crate::cover::{intersection_matrix, CoverError};
use crate::linalg::{dot, q, qfrac, unit, QMatrix, Q};
use crate::ribbon::{RibbonError, RibbonGraph};
use num_traits::{Signed, Zero};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MovesError {
    #[error("edge {0} does not exist")]
    NoSuchEdge(usize),
    #[error("edge {0} is a loop")]
    Loop(usize),
    #[error("edge {0} has an endpoint of valence {1}, not 3")]
    NotTrivalent(usize, usize),
    #[error("edges {0} and {1} share two vertices: that is the W11 configuration, use dehn_twist")]
    DehnConfiguration(usize, usize),
    #[error("edges {0} and {1} do not share exactly one vertex")]
    NotAdjacent(usize, usize),
    #[error("edges {0} and {1} do not join the same pair of vertices")]
    NotDoubleEdge(usize, usize),
    #[error("edges {0} and {1} bound a face: the loop is homotopically trivial")]
    BoundsFace(usize, usize),
    #[error("edges {0} and {1} are not opposite corners of one another's move")]
    Twisted(usize, usize),
    #[error("transport equations are inconsistent")]
    NoTransport,
    #[error("sequence does not close: {0}")]
    NoClosure(String),
    #[error(transparent)]
    Ribbon(#[from] RibbonError),
    #[error(transparent)]
    Cover(#[from] CoverError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Rule {
    Forward,
    Reverse,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WhiteheadMove {
    pub before: RibbonGraph,
    pub after: RibbonGraph,
    pub moved_edge: usize,
    pub rule: Rule,
    /// Dart of `before` -> dart of `after`.
    pub dart_correspondence: Vec<usize>,
    /// (a1, a2, b1, b2) of `before`.
    pub corners: [usize; 4],
}

fn check_flip(g: &RibbonGraph, e: usize) -> Result<(usize, usize), MovesError> {
    if e >= g.edge_count() {
        return Err(MovesError::NoSuchEdge(e));
    }
    if g.is_loop(e) {
        return Err(MovesError::Loop(e));
    }
    let [d, dp] = g.edges()[e];
    for v in [g.vertex_of(d), g.vertex_of(dp)] {
        if g.valence(v) != 3 {
            return Err(MovesError::NotTrivalent(e, g.valence(v)));
        }
    }
    Ok((d, dp))
}

fn flip(g: &RibbonGraph, e: usize, rule: Rule) -> Result<WhiteheadMove, MovesError> {
    let (d, dp) = check_flip(g, e)?;
    let (a1, b1) = (g.rot(d), g.rot(dp));
    let (a2, b2) = (g.rot(a1), g.rot(b1));
    let (cx, cxp) = match rule {
        Rule::Forward => (vec![d, a2, b1], vec![dp, b2, a1]),
        Rule::Reverse => (vec![d, b2, a1], vec![dp, a2, b1]),
    };
    let (x, xp) = (g.vertex_of(d), g.vertex_of(dp));
    let mut cycles = g.vertex_cycles().to_vec();
    cycles[x] = cx;
    cycles[xp] = cxp;
    let after = RibbonGraph::new(cycles, g.edges().to_vec())?;
    Ok(WhiteheadMove {
        before: g.clone(),
        after,
        moved_edge: e,
        rule,
        dart_correspondence: (0..g.dart_count()).collect(),
        corners: [a1, a2, b1, b2],
    })
}

/// The other resolution of the 4-valent vertex obtained by collapsing `e`.
pub fn whitehead(g: &RibbonGraph, e: usize) -> Result<WhiteheadMove, MovesError> {
    flip(g, e, Rule::Forward)
}

impl WhiteheadMove {
    /// The inverse move, starting from `after`.
    pub fn reverse(&self) -> WhiteheadMove {
        let rule = match self.rule {
            Rule::Forward => Rule::Reverse,
            Rule::Reverse => Rule::Forward,
        };
        flip(&self.after, self.moved_edge, rule).expect("a move can always be undone")
    }
}

/// Linear map on the γ_e basis: column c is the image of `before`'s γ_c.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BasisTransport {
    pub matrix: QMatrix,
    /// Coefficient of γ_e picked up through each corner dart (a1, a2, b1, b2).
    pub corner_coefficients: Vec<String>,
}

impl BasisTransport {
    pub fn identity(n: usize) -> Self {
        BasisTransport { matrix: QMatrix::identity(n), corner_coefficients: Vec::new() }
    }
}

fn transport_with(m: &WhiteheadMove, coef: &[Q]) -> QMatrix {
    let n = m.before.edge_count();
    let e = m.moved_edge;
    let mut t = QMatrix::identity(n);
    t[(e, e)] = q(-1);
    for (k, &dart) in m.corners.iter().enumerate() {
        let c = m.before.edge_of(dart);
        let x = &t[(e, c)] + &coef[k];
        t[(e, c)] = x;
    }
    t
}

pub fn transport_basis(m: &WhiteheadMove) -> Result<BasisTransport, MovesError> {
    let j = intersection_matrix(&m.before)?.j;
    let jp = intersection_matrix(&m.after)?.j;
    let n = j.rows();
    // Tᵀ J' T is affine in the four corner coefficients; sample it.
    let zero = vec![Q::zero(); 4];
    let base = {
        let t = transport_with(m, &zero);
        &(&t.transpose() * &jp) * &t
    };
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    let moving: [usize; 2] = match m.rule {
        Rule::Forward => [0, 2],
        Rule::Reverse => [1, 3],
    };
    let cols: Vec<QMatrix> = moving
        .iter()
        .map(|&k| {
            let t = transport_with(m, &unit(4, k));
            &(&(&t.transpose() * &jp) * &t) - &base
        })
        .collect();
    for r in 0..n {
        for c in r + 1..n {
            rows.push(cols.iter().map(|m| m[(r, c)].clone()).collect::<Vec<_>>());
            rhs.push(&j[(r, c)] - &base[(r, c)]);
        }
    }
    let sys = QMatrix::from_rows(&rows);
    let mut coef = zero;
    if !rows.is_empty() {
        let sol = sys.solve_min_norm(&rhs).ok_or(MovesError::NoTransport)?;
        for (&k, x) in moving.iter().zip(sol) {
            coef[k] = x;
        }
    }
    let matrix = transport_with(m, &coef);
    if &(&matrix.transpose() * &jp) * &matrix != j {
        return Err(MovesError::NoTransport);
    }
    Ok(BasisTransport { matrix, corner_coefficients: coef.iter().map(crate::linalg::fmt_q).collect() })
}

/// Transport of edge flows (even classes) across the move.
pub fn transport_flows(m: &WhiteheadMove) -> QMatrix {
    let g = &m.after;
    let n = g.edge_count();
    let e = m.moved_edge;
    let [d, _] = g.edges()[e];
    let x = g.vertex_of(d);
    let mut t = QMatrix::identity(n);
    t[(e, e)] = Q::zero();
    // Out-flow at x through the other darts must be cancelled by e.
    for &dart in &g.vertex_cycles()[x] {
        if dart == d {
            continue;
        }
        let c = g.edge_of(dart);
        let s = if g.edges()[c][0] == dart { 1 } else { -1 };
        let x = &t[(e, c)] - q(s);
        t[(e, c)] = x;
    }
    // Loops at x cancel themselves; the move never creates them on e's darts.
    t
}

/// Matrix sending γ-classes of `after` to γ-classes of `before` along a dart isomorphism.
pub fn iso_transport(after: &RibbonGraph, before: &RibbonGraph, phi: &[usize]) -> QMatrix {
    let n = after.edge_count();
    let mut t = QMatrix::zeros(n, n);
    for c in 0..n {
        let img = before.edge_of(phi[after.edges()[c][0]]);
        t[(img, c)] = q(1);
    }
    t
}

/// Same for edge flows, tracking edge directions.
pub fn iso_flows(after: &RibbonGraph, before: &RibbonGraph, phi: &[usize]) -> QMatrix {
    let n = after.edge_count();
    let mut t = QMatrix::zeros(n, n);
    for c in 0..n {
        let start = phi[after.edges()[c][0]];
        let img = before.edge_of(start);
        t[(img, c)] = q(if before.edges()[img][0] == start { 1 } else { -1 });
    }
    t
}

/// Basis of the cycle space (closed edge flows).
pub fn cycle_space(g: &RibbonGraph) -> Vec<Vec<Q>> {
    let mut bd = QMatrix::zeros(g.vertex_count(), g.edge_count());
    for (e, &[a, b]) in g.edges().iter().enumerate() {
        let x = &bd[(g.vertex_of(b), e)] + q(1);
        bd[(g.vertex_of(b), e)] = x;
        let y = &bd[(g.vertex_of(a), e)] - q(1);
        bd[(g.vertex_of(a), e)] = y;
    }
    bd.kernel()
}

/// Sign data of one facet crossing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FacetSigns {
    pub a_before: i8,
    pub a_after: i8,
    /// Absent when the vanishing class lies in the radical (no partner).
    pub b_before: Option<i8>,
    pub b_after: Option<i8>,
    pub pairing_preserved: bool,
}

impl FacetSigns {
    pub fn ok(&self) -> bool {
        self.a_before > 0 && self.a_after < 0 && self.b_before == self.b_after && self.pairing_preserved
    }
}

fn sign(x: &Q) -> i8 {
    if x.is_positive() {
        1
    } else if x.is_negative() {
        -1
    } else {
        0
    }
}

/// Periods of the vanishing class and a partner class on either side of the facet.
pub fn facet_signs(m: &WhiteheadMove) -> Result<FacetSigns, MovesError> {
    let t = transport_basis(m)?.matrix;
    let j = intersection_matrix(&m.before)?.j;
    let jp = intersection_matrix(&m.after)?.j;
    let n = j.rows();
    let e = m.moved_edge;
    let small = qfrac(1, 10);
    let lengths: Vec<Q> = (0..n).map(|c| if c == e { small.clone() } else { q(1) }).collect();
    let periods = |v: &[Q]| dot(v, &lengths.iter().map(|l| l * q(2)).collect::<Vec<_>>());
    let a = unit(n, e);
    let ta = t.mul_vec(&a);
    let mut out = FacetSigns {
        a_before: sign(&periods(&a)),
        a_after: sign(&periods(&ta)),
        b_before: None,
        b_after: None,
        pairing_preserved: true,
    };
    let partner = (0..n).filter(|&c| !j[(e, c)].is_zero()).max_by_key(|&c| j[(e, c)].abs());
    if let Some(p) = partner {
        let s = if j[(e, p)].is_negative() { q(-1) } else { q(1) };
        let b: Vec<Q> = unit(n, p).iter().map(|x| x * &s).collect();
        let tb = t.mul_vec(&b);
        out.b_before = Some(sign(&periods(&b)));
        out.b_after = Some(sign(&periods(&tb)));
        out.pairing_preserved = j.pair(&a, &b) == jp.pair(&ta, &tb);
    }
    Ok(out)
}

/// Vanishing coordinate flips sign across the facet while its partner keeps its sign.
pub fn orientation_check(m: &WhiteheadMove) -> bool {
    facet_signs(m).map(|s| s.ok()).unwrap_or(false)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoveSequence {
    pub moves: Vec<WhiteheadMove>,
    pub transports: Vec<BasisTransport>,
    /// Dart isomorphism from the final graph back to the initial one.
    pub closure: Option<Vec<usize>>,
    /// Composite on odd classes, closed up by the isomorphism.
    pub composite_minus: QMatrix,
    /// Composite on edge flows, closed up by the isomorphism.
    pub composite_plus: QMatrix,
    pub facets: Vec<FacetSigns>,
}

impl MoveSequence {
    pub fn is_closed(&self) -> bool {
        self.closure.is_some()
    }

    /// σᵀ J σ = J on the initial graph.
    pub fn is_symplectic(&self) -> bool {
        let Some(first) = self.moves.first() else { return true };
        let j = intersection_matrix(&first.before).expect("odd valent").j;
        let s = &self.composite_minus;
        &(&s.transpose() * &j) * s == j
    }

    /// Whether the composite fixes every closed flow.
    pub fn trivial_on_cycles(&self) -> bool {
        let Some(first) = self.moves.first() else { return true };
        cycle_space(&first.before).iter().all(|c| self.composite_plus.mul_vec(c) == *c)
    }
}

fn run_sequence(g: &RibbonGraph, edges: &[usize]) -> Result<(Vec<WhiteheadMove>, Vec<BasisTransport>, QMatrix, QMatrix), MovesError> {
    let n = g.edge_count();
    let mut cur = g.clone();
    let mut moves = Vec::new();
    let mut transports = Vec::new();
    let mut minus = QMatrix::identity(n);
    let mut plus = QMatrix::identity(n);
    for &e in edges {
        let m = whitehead(&cur, e)?;
        let t = transport_basis(&m)?;
        minus = &t.matrix * &minus;
        plus = &transport_flows(&m) * &plus;
        cur = m.after.clone();
        transports.push(t);
        moves.push(m);
    }
    Ok((moves, transports, minus, plus))
}

fn locus_darts(g: &RibbonGraph, edges: &[usize]) -> Vec<usize> {
    edges.iter().flat_map(|&e| g.edges()[e]).collect()
}

/// Isomorphism back to `target` fixing as many darts outside `locus` as possible.
fn best_closure(last: &RibbonGraph, target: &RibbonGraph, locus: &[usize], want: impl Fn(&[usize]) -> bool) -> Option<Vec<usize>> {
    last.isomorphisms(target)
        .into_iter()
        .filter(|phi| want(phi))
        .max_by_key(|phi| (0..phi.len()).filter(|d| !locus.contains(d) && phi[*d] == *d).count())
}

/// Five alternating flips of two edges sharing one trivalent vertex.
pub fn pentagon(g: &RibbonGraph, e1: usize, e2: usize) -> Result<MoveSequence, MovesError> {
    for e in [e1, e2] {
        check_flip(g, e)?;
    }
    let ends = |e: usize| {
        let [a, b] = g.edges()[e];
        [g.vertex_of(a), g.vertex_of(b)]
    };
    let (v1, v2) = (ends(e1), ends(e2));
    let shared = v1.iter().filter(|v| v2.contains(v)).count();
    if e1 == e2 || shared == 0 {
        return Err(MovesError::NotAdjacent(e1, e2));
    }
    if shared == 2 {
        return Err(MovesError::DehnConfiguration(e1, e2));
    }
    let order = [e1, e2, e1, e2, e1];
    let (moves, transports, minus, plus) = run_sequence(g, &order)?;
    for (k, m) in moves.iter().enumerate().take(4) {
        if m.after.is_isomorphic(g) && k < 4 {
            let locus = locus_darts(g, &[e1, e2]);
            if best_closure(&m.after, g, &locus, |_| true).is_some_and(|phi| fixes_outside(&phi, &locus)) {
                return Err(MovesError::NoClosure(format!("closed early after {} moves", k + 1)));
            }
        }
    }
    let last = &moves[4].after;
    let locus = locus_darts(g, &[e1, e2]);
    let phi = best_closure(last, g, &locus, |phi| fixes_outside(phi, &locus))
        .ok_or_else(|| MovesError::NoClosure("no isomorphism fixing the outer darts".into()))?;
    let composite_minus = &iso_transport(last, g, &phi) * &minus;
    let composite_plus = &iso_flows(last, g, &phi) * &plus;
    let facets = moves.iter().map(facet_signs).collect::<Result<_, _>>()?;
    Ok(MoveSequence { moves, transports, closure: Some(phi), composite_minus, composite_plus, facets })
}

fn fixes_outside(phi: &[usize], locus: &[usize]) -> bool {
    (0..phi.len()).all(|d| locus.contains(&d) || phi[d] == d)
}

/// Induced action of a Dehn twist on the distinguished pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TwistAction {
    pub flipped_edge: usize,
    pub partner_edge: usize,
    /// Rank of (σ₋ − I) modulo the radical.
    pub rank_mod_radical: usize,
    /// ±½(γ_e ± γ_ẽ), the invariant odd class.
    pub a_minus: Vec<String>,
    /// A class with a₋ ∘ b₋ = 1.
    pub b_minus: Vec<String>,
    /// k in σ₋(b₋) = b₋ + k a₋ + γ.
    pub k_minus: String,
    /// The radical correction γ, in the γ_e basis.
    pub radical_part: Vec<String>,
    /// Rank of (σ₊ − I) on closed flows.
    pub rank_plus: usize,
    /// k in σ₊(b₁) = b₁ + k a₁ with a₁ ∘ b₁ = 1; absent when the loop
    /// separates and meets no closed cycle.
    pub k_plus: Option<i64>,
}

/// A single flip of one edge of the double edge `{e, ẽ}`, closed up by the cone
/// identification. The flipped edge is the one whose moving corners are the
/// partner's darts; along that loop the shrinking class pairs positively with
/// the growing one.
pub fn dehn_twist(g: &RibbonGraph, e: usize, et: usize) -> Result<(MoveSequence, TwistAction), MovesError> {
    check_flip(g, e)?;
    check_flip(g, et)?;
    let ends = |c: usize| {
        let [a, b] = g.edges()[c];
        let mut v = [g.vertex_of(a), g.vertex_of(b)];
        v.sort();
        v
    };
    if e == et || ends(e) != ends(et) {
        return Err(MovesError::NotDoubleEdge(e, et));
    }
    if g.face_edges().iter().any(|f| f.len() == 2 && f.contains(&e) && f.contains(&et)) {
        return Err(MovesError::BoundsFace(e, et));
    }
    // The positive loop flips the edge whose moving corners carry the partner.
    let carries = |x: usize, y: usize| {
        let [d, dp] = g.edges()[x];
        let mut c = [g.rot(d), g.rot(dp)];
        let mut t = g.edges()[y];
        c.sort();
        t.sort();
        c == t
    };
    let (e, et) = if carries(e, et) {
        (e, et)
    } else if carries(et, e) {
        (et, e)
    } else {
        return Err(MovesError::Twisted(e, et));
    };
    let (moves, transports, minus, plus) = run_sequence(g, &[e])?;
    let last = &moves[0].after;
    let locus = locus_darts(g, &[e, et]);
    let phi = best_closure(last, g, &locus, |phi| {
        let img = |c: usize| g.edge_of(phi[last.edges()[c][0]]);
        img(et) == e && img(e) == et && fixes_outside(phi, &locus)
    })
    .ok_or_else(|| MovesError::NoClosure("no cone identification swapping the double edge".into()))?;
    let composite_minus = &iso_transport(last, g, &phi) * &minus;
    let composite_plus = &iso_flows(last, g, &phi) * &plus;
    let facets = moves.iter().map(facet_signs).collect::<Result<_, _>>()?;
    let seq = MoveSequence { moves, transports, closure: Some(phi), composite_minus, composite_plus, facets };
    let action = twist_action(g, e, et, &seq)?;
    Ok((seq, action))
}

fn twist_action(g: &RibbonGraph, e: usize, et: usize, seq: &MoveSequence) -> Result<TwistAction, MovesError> {
    let h = intersection_matrix(g)?;
    let j = &h.j;
    let n = g.edge_count();
    let radical: Vec<Vec<Q>> = (0..h.face_cycles.rows()).map(|f| h.face_cycles.row(f)).collect();
    let mod_rad_rank = |vs: &[Vec<Q>]| {
        let mut rows = radical.clone();
        rows.extend(vs.iter().cloned());
        QMatrix::from_rows(&rows).rank() - QMatrix::from_rows(&radical).rank()
    };
    let s = &seq.composite_minus;
    let defect = s - &QMatrix::identity(n);
    let images: Vec<Vec<Q>> = (0..n).map(|c| defect.col(c)).collect();
    let rank = mod_rad_rank(&images);

    // Invariant class: ½(γ_e ± γ_ẽ), whichever is fixed modulo the radical.
    let half = qfrac(1, 2);
    let mut a = None;
    for sg in [1, -1] {
        let mut v = vec![Q::zero(); n];
        v[e] = half.clone();
        v[et] = &half * q(sg);
        let moved: Vec<Q> = s.mul_vec(&v).iter().zip(&v).map(|(x, y)| x - y).collect();
        if mod_rad_rank(&[moved]) == 0 && !images.iter().all(|im| mod_rad_rank(&[im.clone(), v.clone()]) > 1) {
            a = Some(v);
            break;
        }
    }
    let a = a.ok_or(MovesError::NoTransport)?;
    // b with a∘b = 1: solve (aᵀJ) b = 1.
    let row = QMatrix::from_rows(&[j.transpose().mul_vec(&a)]);
    let b = row.solve_min_norm(&[q(1)]).ok_or(MovesError::NoTransport)?;
    let diff: Vec<Q> = s.mul_vec(&b).iter().zip(&b).map(|(x, y)| x - y).collect();
    // diff = k a + Σ r_f face_f.
    let mut cols = vec![a.clone()];
    cols.extend(radical.iter().cloned());
    let sol = QMatrix::from_cols(&cols, n).solve(&diff).ok_or(MovesError::NoTransport)?;
    let k = sol[0].clone();
    let mut rad = vec![Q::zero(); n];
    for (f, r) in radical.iter().enumerate() {
        for t in 0..n {
            let x = &rad[t] + &sol[f + 1] * &r[t];
            rad[t] = x;
        }
    }

    let (rank_plus, k_plus) = plus_action(g, e, et, &seq.composite_plus)?;
    Ok(TwistAction {
        flipped_edge: e,
        partner_edge: et,
        rank_mod_radical: rank,
        a_minus: a.iter().map(crate::linalg::fmt_q).collect(),
        b_minus: b.iter().map(crate::linalg::fmt_q).collect(),
        k_minus: crate::linalg::fmt_q(&k),
        radical_part: rad.iter().map(crate::linalg::fmt_q).collect(),
        rank_plus,
        k_plus,
    })
}

/// Closed walk given by its outgoing darts.
pub type Walk = Vec<usize>;

/// Edge flow of a closed walk.
pub fn walk_flow(g: &RibbonGraph, w: &Walk) -> Vec<Q> {
    let mut f = vec![Q::zero(); g.edge_count()];
    for &d in w {
        let c = g.edge_of(d);
        let s = if g.edges()[c][0] == d { 1 } else { -1 };
        f[c] += q(s);
    }
    f
}

/// Algebraic intersection of two closed walks, the second pushed off to the
/// left of every edge (relative to the edge's stored direction).
pub fn walk_intersection(g: &RibbonGraph, w1: &Walk, w2: &Walk) -> i64 {
    // Positions on a circle of 4k slots: dart j sits at 4j, push-offs at 4j ± 1.
    let passages = |w: &Walk, shift: bool| {
        let mut out = Vec::new();
        for i in 0..w.len() {
            let prev = w[(i + w.len() - 1) % w.len()];
            let inn = g.pair(prev);
            let outd = w[i];
            let slot = |d: usize| {
                let base = 4 * g.position(d) as i64;
                if !shift {
                    base
                } else if g.edges()[g.edge_of(d)][0] == d {
                    base + 1
                } else {
                    base - 1
                }
            };
            out.push((g.vertex_of(outd), slot(inn), slot(outd)));
        }
        out
    };
    let p1 = passages(w1, false);
    let p2 = passages(w2, true);
    let mut total = 0;
    for &(v, i1, o1) in &p1 {
        let m = 4 * g.valence(v) as i64;
        let span = (i1 - o1).rem_euclid(m);
        let left = |x: i64| {
            let off = (x - o1).rem_euclid(m);
            off > 0 && off < span
        };
        for &(v2, i2, o2) in &p2 {
            if v2 != v {
                continue;
            }
            total += match (left(o2), left(i2)) {
                (true, false) => -1,
                (false, true) => 1,
                _ => 0,
            };
        }
    }
    total
}

/// Simple closed walks of a spanning tree's fundamental cycles.
pub fn fundamental_walks(g: &RibbonGraph) -> Vec<Walk> {
    let nv = g.vertex_count();
    let mut parent: Vec<Option<usize>> = vec![None; nv];
    let mut seen = vec![false; nv];
    let mut tree = vec![false; g.edge_count()];
    seen[0] = true;
    let mut stack = vec![0];
    while let Some(v) = stack.pop() {
        for &d in &g.vertex_cycles()[v] {
            let w = g.vertex_of(g.pair(d));
            if !seen[w] {
                seen[w] = true;
                parent[w] = Some(g.pair(d));
                tree[g.edge_of(d)] = true;
                stack.push(w);
            }
        }
    }
    // Path from the root to v as outgoing darts.
    let path_to = |v: usize| {
        let mut p = Vec::new();
        let mut cur = v;
        while let Some(back) = parent[cur] {
            p.push(g.pair(back));
            cur = g.vertex_of(g.pair(back));
        }
        p.reverse();
        p
    };
    let mut walks = Vec::new();
    for c in 0..g.edge_count() {
        if tree[c] {
            continue;
        }
        let [a, b] = g.edges()[c];
        let (pa, pb) = (path_to(g.vertex_of(a)), path_to(g.vertex_of(b)));
        let common = pa.iter().zip(&pb).take_while(|(x, y)| x == y).count();
        let mut w: Walk = pa[common..].to_vec();
        w.push(a);
        w.extend(pb[common..].iter().rev().map(|&d| g.pair(d)));
        walks.push(w);
    }
    walks
}

fn plus_action(g: &RibbonGraph, e: usize, et: usize, plus: &QMatrix) -> Result<(usize, Option<i64>), MovesError> {
    let [d, _] = g.edges()[e];
    let x = g.vertex_of(d);
    let back = g.edges()[et].iter().copied().find(|&t| g.vertex_of(t) != x).ok_or(MovesError::NotDoubleEdge(e, et))?;
    let a1: Walk = vec![d, back];
    let a1f = walk_flow(g, &a1);
    let cycles = cycle_space(g);
    let defects: Vec<Vec<Q>> =
        cycles.iter().map(|c| plus.mul_vec(c).iter().zip(c).map(|(p, q)| p - q).collect()).collect();
    let rank = QMatrix::from_rows(&defects).rank();
    let walks = fundamental_walks(g);
    let Some((w, s)) = walks.iter().map(|w| (w, walk_intersection(g, &a1, w))).find(|(_, s)| s.abs() == 1) else {
        return if rank == 0 { Ok((0, None)) } else { Err(MovesError::NoTransport) };
    };
    let mut bf = walk_flow(g, w);
    if s < 0 {
        bf.iter_mut().for_each(|x| *x = -x.clone());
    }
    let diff: Vec<Q> = plus.mul_vec(&bf).iter().zip(&bf).map(|(p, q)| p - q).collect();
    let k = QMatrix::from_cols(&[a1f], g.edge_count()).solve(&diff).ok_or(MovesError::NoTransport)?;
    let k = k[0].to_integer().try_into().unwrap_or(i64::MAX);
    Ok((rank, Some(k)))
}

/// Split vertex `v` into two joined by a new edge: the first `split` darts
/// of its cycle stay with one end. Inverse of edge contraction.
pub fn expand_vertex(g: &RibbonGraph, v: usize, split: usize) -> Result<RibbonGraph, MovesError> {
    let cyc = &g.vertex_cycles()[v];
    if split == 0 || split >= cyc.len() {
        return Err(MovesError::NoTransport);
    }
    let n = g.dart_count();
    let (d, dp) = (n, n + 1);
    let mut first = vec![d];
    first.extend_from_slice(&cyc[..split]);
    let mut second = vec![dp];
    second.extend_from_slice(&cyc[split..]);
    let mut cycles = g.vertex_cycles().to_vec();
    cycles[v] = first;
    cycles.push(second);
    let mut edges = g.edges().to_vec();
    edges.push([d, dp]);
    Ok(RibbonGraph::new(cycles, edges)?)
}
