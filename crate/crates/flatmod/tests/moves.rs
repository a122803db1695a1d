use flatmod::cover::intersection_matrix;
use flatmod::moves::{dehn_twist, orientation_check, pentagon, whitehead, MovesError};
use flatmod::ribbon::{enumerate, m11_graph, planar_theta, RibbonGraph, ValenceFilter};

fn ends(g: &RibbonGraph, e: usize) -> [usize; 2] {
    let [a, b] = g.edges()[e];
    [g.vertex_of(a), g.vertex_of(b)]
}

fn flippable(g: &RibbonGraph, e: usize) -> bool {
    !g.is_loop(e)
}

/// Pairs of non-loop edges sharing exactly one endpoint.
fn adjacent_pairs(g: &RibbonGraph) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for e1 in 0..g.edge_count() {
        for e2 in e1 + 1..g.edge_count() {
            let (a, b) = (ends(g, e1), ends(g, e2));
            let shared = a.iter().filter(|v| b.contains(v)).count();
            if flippable(g, e1) && flippable(g, e2) && shared == 1 {
                out.push((e1, e2));
            }
        }
    }
    out
}

#[test]
fn whitehead_flip_preserves_topology() {
    for g in enumerate(0, 4, &ValenceFilter::Trivalent).unwrap() {
        for e in (0..g.edge_count()).filter(|&e| flippable(&g, e)) {
            let m = whitehead(&g, e).unwrap();
            assert_eq!((m.after.genus(), m.after.face_count()), (g.genus(), g.face_count()));
            assert!(m.after.is_trivalent());
            assert!(orientation_check(&m));
        }
    }
}

#[test]
fn flip_of_a_loop_is_rejected() {
    let g = enumerate(1, 2, &ValenceFilter::Trivalent).unwrap();
    let (h, e) = g.iter().find_map(|h| (0..h.edge_count()).find(|&e| h.is_loop(e)).map(|e| (h, e))).unwrap();
    assert!(whitehead(h, e).is_err());
}

#[test]
fn pentagons_close_and_act_trivially() {
    let mut count = 0;
    for g in [(0, 4), (1, 2)].iter().flat_map(|&(a, b)| enumerate(a, b, &ValenceFilter::Trivalent).unwrap()) {
        for (e1, e2) in adjacent_pairs(&g) {
            let s = match pentagon(&g, e1, e2) {
                Ok(s) => s,
                Err(MovesError::DehnConfiguration(..)) => continue,
                Err(e) => panic!("{e}"),
            };
            count += 1;
            assert_eq!(s.moves.len(), 5);
            assert!(s.is_closed());
            assert!(s.is_symplectic());
            assert!(s.trivial_on_cycles());
            assert!(s.moves.iter().all(orientation_check));
            assert!(s.facets.iter().all(|f| f.ok()));
        }
    }
    assert!(count > 0);
}

#[test]
fn pentagon_requires_adjacent_edges() {
    let g = planar_theta();
    assert!(matches!(pentagon(&g, 0, 0), Err(MovesError::NotAdjacent(0, 0))));
    assert!(matches!(pentagon(&g, 0, 1), Err(MovesError::DehnConfiguration(0, 1))));
}

#[test]
fn dehn_twist_on_m11() {
    let g = m11_graph();
    let (seq, act) = dehn_twist(&g, 0, 1).unwrap();
    assert_eq!(seq.moves.len(), 1);
    assert!(seq.is_closed());
    assert!(seq.is_symplectic());
    assert_eq!(act.rank_mod_radical, 1);
    assert_eq!(act.k_minus, "2");
    // Transvection: σ − I has rank one on the odd classes.
    let j = intersection_matrix(&g).unwrap().j;
    let d = &seq.composite_minus - &flatmod::linalg::QMatrix::identity(g.edge_count());
    assert_eq!(d.rank(), 1);
    assert!(j.rank() >= 2);
}

#[test]
fn dehn_twist_needs_double_edge() {
    let g = enumerate(0, 4, &ValenceFilter::Trivalent).unwrap().remove(0);
    let pair = adjacent_pairs(&g)[0];
    assert!(dehn_twist(&g, pair.0, pair.1).is_err());
}
