//! Kontsevich two-form, Poisson bivector and perimeter map in the edge-length basis.
//!
//! A two-form `Σ c_ab dℓ_a∧dℓ_b` is stored as the antisymmetric matrix `M`
//! with `M[a][b] = c_ab`, so that it evaluates as `uᵀ M v`. A bivector is
//! stored the same way in the `∂/∂ℓ` basis.
//!
//! Contractions: `P(α)ⁱ = Pⁱʲ αⱼ` and `Ω[v]ⱼ = vⁱ Ωᵢⱼ`, so `Ω[P(dℓ_e)]` is row
//! `e` of `PᵀΩ`.

use crate::linalg::{q, qfrac, QMatrix, Q};
use crate::ribbon::RibbonGraph;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormsError {
    #[error("vertex {0} has even valence {1}: unsupported stratum")]
    EvenValence(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TwoForm {
    pub matrix: QMatrix,
    pub basis_edges: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Bivector {
    pub matrix: QMatrix,
}

/// Row f counts the sides of edge e on face f.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PerimeterMap {
    pub matrix: QMatrix,
}

/// Sign sum over ordered pairs of sides of a single face.
pub fn eta_face(sides: &[usize], edges: usize) -> QMatrix {
    let mut m = QMatrix::zeros(edges, edges);
    for j in 0..sides.len() {
        for k in j + 1..sides.len() {
            let (a, b) = (sides[j], sides[k]);
            if a != b {
                m[(a, b)] += q(1);
                m[(b, a)] -= q(1);
            }
        }
    }
    m
}

pub fn kontsevich_form(g: &RibbonGraph) -> TwoForm {
    let e = g.edge_count();
    let mut m = QMatrix::zeros(e, e);
    for face in g.face_edges() {
        m = &m + &eta_face(&face, e);
    }
    TwoForm { matrix: m, basis_edges: (0..e).collect() }
}

/// Contribution of one vertex with incident edges listed counterclockwise.
pub fn vertex_bivector(star: &[usize], edges: usize) -> QMatrix {
    let mut m = QMatrix::zeros(edges, edges);
    let quarter = qfrac(1, 4);
    for j in 0..star.len() {
        for k in j + 1..star.len() {
            let (a, b) = (star[j], star[k]);
            if a == b {
                continue;
            }
            let s = if (k - j - 1) % 2 == 0 { quarter.clone() } else { -quarter.clone() };
            m[(a, b)] += s.clone();
            m[(b, a)] -= s;
        }
    }
    m
}

pub fn poisson_bivector(g: &RibbonGraph) -> Bivector {
    let e = g.edge_count();
    let mut m = QMatrix::zeros(e, e);
    for cyc in g.vertex_cycles() {
        let star: Vec<usize> = cyc.iter().map(|&d| g.edge_of(d)).collect();
        m = &m + &vertex_bivector(&star, e);
    }
    Bivector { matrix: m }
}

pub fn perimeter_map(g: &RibbonGraph) -> PerimeterMap {
    let faces = g.face_edges();
    let mut m = QMatrix::zeros(faces.len(), g.edge_count());
    for (f, sides) in faces.iter().enumerate() {
        for &e in sides {
            m[(f, e)] += q(1);
        }
    }
    PerimeterMap { matrix: m }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MkReport {
    pub holds_exactly: bool,
    pub holds_mod_perimeters: bool,
    /// Row e is the 1-form Ω[P(dℓ_e)] − dℓ_e.
    pub defect: QMatrix,
    /// First row of the defect outside the perimeter span, if any.
    pub witness: Option<usize>,
}

/// Compare Ω∘P with the identity, exactly and modulo perimeter differentials.
pub fn mk_check(g: &RibbonGraph) -> MkReport {
    let omega = kontsevich_form(g).matrix;
    let p = poisson_bivector(g).matrix;
    let defect = &(&p.transpose() * &omega) - &QMatrix::identity(g.edge_count());
    let per = perimeter_map(g).matrix;
    let witness = (0..defect.rows()).find(|&r| !per.row_span_contains(&defect.row(r)));
    MkReport { holds_exactly: defect.is_zero(), holds_mod_perimeters: witness.is_none(), defect, witness }
}

/// Whether every perimeter is a Casimir of the bivector.
pub fn casimir_check(g: &RibbonGraph) -> bool {
    let p = poisson_bivector(g).matrix;
    let per = perimeter_map(g).matrix;
    (0..per.rows()).all(|f| p.mul_vec(&per.row(f)).iter().all(|x| x == &Q::from_integer(0.into())))
}

/// Basis of the fixed-perimeter directions, as columns.
pub fn leaf_basis(g: &RibbonGraph) -> QMatrix {
    let per = perimeter_map(g).matrix;
    QMatrix::from_cols(&per.kernel(), g.edge_count())
}

/// Rank of Ω on the fixed-perimeter leaf.
pub fn leaf_rank(g: &RibbonGraph) -> Result<usize, FormsError> {
    if let Some(v) = (0..g.vertex_count()).find(|&v| g.valence(v).is_multiple_of(2)) {
        return Err(FormsError::EvenValence(v, g.valence(v)));
    }
    let k = leaf_basis(g);
    if k.cols() == 0 {
        return Ok(0);
    }
    let omega = kontsevich_form(g).matrix;
    Ok((&(&k.transpose() * &omega) * &k).rank())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ribbon::m11_graph;

    #[test]
    fn trivalent_star_matches_sign_rule() {
        let m = vertex_bivector(&[0, 1, 2], 3);
        assert_eq!(m[(0, 1)], qfrac(1, 4));
        assert_eq!(m[(0, 2)], qfrac(-1, 4));
        assert_eq!(m[(1, 2)], qfrac(1, 4));
    }

    #[test]
    fn m11_bivector_is_twice_a_star() {
        let p = poisson_bivector(&m11_graph()).matrix;
        assert_eq!(p[(0, 1)], qfrac(1, 2));
        assert_eq!(p[(0, 2)], qfrac(-1, 2));
        assert_eq!(p[(1, 2)], qfrac(1, 2));
    }
}
