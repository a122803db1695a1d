use flatmod::ribbon::{enumerate, m11_graph, planar_theta, validate, RibbonGraph, ValenceFilter};
use flatmod::suite::five_valent_graph;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Brute-force oracle: trivalent ribbon graphs as (rot, pair) permutations on
/// 6V darts with rot fixed to (0 1 2)(3 4 5)..., classified up to isomorphism
/// by propagating a dart bijection from a single seed.
struct Perms {
    rot: Vec<usize>,
    pair: Vec<usize>,
}

fn pairings(n: usize) -> Vec<Vec<usize>> {
    fn go(free: &mut Vec<usize>, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if free.is_empty() {
            out.push(cur.clone());
            return;
        }
        let a = free.remove(0);
        for i in 0..free.len() {
            let b = free.remove(i);
            cur[a] = b;
            cur[b] = a;
            go(free, cur, out);
            free.insert(i, b);
        }
        free.insert(0, a);
    }
    let mut out = Vec::new();
    go(&mut (0..n).collect(), &mut vec![0; n], &mut out);
    out
}

fn orbits(p: &[usize]) -> usize {
    let mut seen = vec![false; p.len()];
    let mut k = 0;
    for s in 0..p.len() {
        if !seen[s] {
            k += 1;
            let mut d = s;
            while !seen[d] {
                seen[d] = true;
                d = p[d];
            }
        }
    }
    k
}

fn connected(g: &Perms) -> bool {
    let n = g.rot.len();
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    while let Some(d) = stack.pop() {
        if !seen[d] {
            seen[d] = true;
            stack.push(g.rot[d]);
            stack.push(g.pair[d]);
        }
    }
    seen.into_iter().all(|x| x)
}

fn iso(a: &Perms, b: &Perms) -> bool {
    let n = a.rot.len();
    (0..n).any(|t| {
        let mut phi = vec![usize::MAX; n];
        phi[0] = t;
        let mut stack = vec![0];
        while let Some(d) = stack.pop() {
            for (x, y) in [(a.rot[d], b.rot[phi[d]]), (a.pair[d], b.pair[phi[d]])] {
                if phi[x] == usize::MAX {
                    phi[x] = y;
                    stack.push(x);
                } else if phi[x] != y {
                    return false;
                }
            }
        }
        let mut hit = vec![false; n];
        phi.iter().all(|&y| !std::mem::replace(&mut hit[y], true))
    })
}

fn oracle_count(genus: usize, faces: usize) -> usize {
    let v = 4 * genus + 2 * faces - 4;
    let n = 3 * v;
    let rot: Vec<usize> = (0..n).map(|d| 3 * (d / 3) + (d + 1) % 3).collect();
    let mut reps: Vec<Perms> = Vec::new();
    for pair in pairings(n) {
        let face: Vec<usize> = (0..n).map(|d| rot[pair[d]]).collect();
        let g = Perms { rot: rot.clone(), pair };
        if orbits(&face) != faces || !connected(&g) {
            continue;
        }
        if !reps.iter().any(|r| iso(r, &g)) {
            reps.push(g);
        }
    }
    reps.len()
}

#[test]
fn trivalent_counts_match_brute_force() {
    for (g, n) in [(0, 3), (1, 1), (0, 4), (1, 2)] {
        let got = enumerate(g, n, &ValenceFilter::Trivalent).unwrap();
        assert_eq!(got.len(), oracle_count(g, n), "({g},{n})");
        for x in &got {
            assert_eq!((x.genus(), x.face_count()), (g, n));
            assert!(x.is_trivalent());
        }
    }
}

#[test]
fn frozen_counts() {
    let counts: Vec<usize> =
        [(0, 3), (1, 1), (0, 4), (1, 2), (2, 1)].iter().map(|&(g, n)| enumerate(g, n, &ValenceFilter::Trivalent).unwrap().len()).collect();
    assert_eq!(counts, vec![2, 1, 6, 5, 9]);
}

#[test]
fn enumerated_graphs_are_pairwise_distinct() {
    let gs = enumerate(1, 2, &ValenceFilter::Trivalent).unwrap();
    for i in 0..gs.len() {
        for j in 0..gs.len() {
            assert_eq!(gs[i].is_isomorphic(&gs[j]), i == j);
        }
    }
}

#[test]
fn canonical_form_is_relabeling_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for g in enumerate(1, 2, &ValenceFilter::Trivalent).unwrap() {
        let n = g.dart_count();
        for _ in 0..20 {
            let mut s: Vec<usize> = (0..n).collect();
            s.shuffle(&mut rng);
            let cycles = g.vertex_cycles().iter().map(|c| c.iter().map(|&d| s[d]).collect()).collect();
            let edges = g.edges().iter().map(|&[a, b]| [s[a], s[b]]).collect();
            let h = RibbonGraph::new(cycles, edges).unwrap();
            assert_eq!(g.canonical_form().code, h.canonical_form().code);
            assert!(g.is_isomorphic(&h));
        }
    }
}

#[test]
fn theta_graphs() {
    assert_eq!((m11_graph().genus(), m11_graph().face_count()), (1, 1));
    assert_eq!((planar_theta().genus(), planar_theta().face_count()), (0, 3));
    assert!(!m11_graph().is_isomorphic(&planar_theta()));
}

#[test]
fn five_valent_graph_is_enumerated() {
    let g = five_valent_graph();
    assert_eq!((g.genus(), g.face_count(), g.edge_count()), (1, 2, 4));
    let all = enumerate(1, 2, &ValenceFilter::Valences(vec![3, 5])).unwrap();
    assert!(all.iter().any(|h| h.is_isomorphic(&g)));
}

#[test]
fn contraction_merges_vertices() {
    let g = planar_theta();
    let (h, _) = g.contract_edge(0).unwrap();
    assert_eq!(h.vertex_count(), 1);
    assert_eq!(h.valences(), vec![4]);
    assert_eq!((h.genus(), h.face_count()), (0, 3));
}

#[test]
fn validation_flags_bad_pairing() {
    let mut f = m11_graph().to_file();
    assert!(validate(&f).is_valid());
    f.edge_pairing[0] = [0, 0];
    assert!(!validate(&f).is_valid());
    assert!(RibbonGraph::from_file(&f).is_err());
}
