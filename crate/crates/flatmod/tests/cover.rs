use flatmod::cover::{build_cover, darboux_report, intersection_matrix, symplectic_basis};
use flatmod::forms::poisson_bivector;
use flatmod::linalg::q;
use flatmod::ribbon::{enumerate, m11_graph, RibbonGraph, ValenceFilter};
use flatmod::suite::five_valent_graph;

fn graphs() -> Vec<RibbonGraph> {
    let mut v: Vec<RibbonGraph> =
        [(0, 3), (1, 1), (0, 4), (1, 2)].iter().flat_map(|&(g, n)| enumerate(g, n, &ValenceFilter::Trivalent).unwrap()).collect();
    v.push(five_valent_graph());
    v
}

#[test]
fn cover_genus_matches_riemann_hurwitz() {
    for g in graphs() {
        let c = build_cover(&g).unwrap();
        // Euler characteristic of the cover: 2χ(base) − #branch points.
        let chi = 2 * g.euler_characteristic() - g.vertex_count() as i64;
        assert_eq!(2 - 2 * c.genus() as i64, chi);
        assert_eq!(c.genus(), c.formula_genus());
        assert!(c.deck_is_automorphism());
        assert_eq!(c.cover_graph.face_count(), 2 * g.face_count());
    }
}

#[test]
fn intersection_matrix_is_four_times_bivector() {
    for g in graphs() {
        let h = intersection_matrix(&g).unwrap();
        assert!(h.j.is_antisymmetric());
        assert!(h.j.all_integer());
        assert_eq!(h.j, poisson_bivector(&g).matrix.scale(&q(4)));
    }
}

#[test]
fn odd_rank_of_intersection_form() {
    for g in graphs() {
        let h = intersection_matrix(&g).unwrap();
        let sb = symplectic_basis(&h).unwrap();
        let odd_genus = g.genus() + g.vertex_count() / 2 - 1;
        assert_eq!(h.j.rank(), 2 * sb.genus());
        assert!(sb.genus() <= odd_genus);
    }
}

#[test]
fn darboux_on_every_graph() {
    for g in graphs() {
        let r = darboux_report(&g).unwrap();
        assert!(r.holds);
        assert!(r.j_equals_four_p);
    }
}

#[test]
fn m11_intersections() {
    let h = intersection_matrix(&m11_graph()).unwrap();
    let j = h.j.to_strings();
    for a in 0..3 {
        for b in 0..3 {
            let v: i64 = j[a][b].parse().unwrap();
            assert_eq!(v.abs(), if a == b { 0 } else { 2 });
        }
    }
}

#[test]
fn even_valence_has_no_cover() {
    let g = RibbonGraph::new(vec![vec![0, 1, 2, 3]], vec![[0, 2], [1, 3]]).unwrap();
    assert!(build_cover(&g).is_err());
}
