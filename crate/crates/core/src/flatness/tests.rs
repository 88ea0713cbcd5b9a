use super::*;
use crate::catalog::{dynkin, self_system};
use crate::connection::temperley_lieb_connection;
use crate::linalg::null_space;

fn tl_sequence(name: &str) -> DoubleSequence {
    let sys = self_system(&dynkin(name).unwrap()).unwrap();
    let conn = temperley_lieb_connection(sys).unwrap();
    let start = StartVertexSet::star(conn.system());
    DoubleSequence::new(conn, start)
}

/// Dimension of `{x ∈ A_{k,0} : [x, A_{0,l}] = 0}` with both sides embedded in `A_{k,l}` and every
/// matrix unit of `A_{0,l}` imposed separately.
fn brute_force_dim(ds: &DoubleSequence, k: usize, l: usize) -> usize {
    let ak = ds.algebra(k, 0).unwrap();
    let a0 = ds.algebra(0, l).unwrap();
    let xs: Vec<AlgebraElement> =
        ak.basis().map(|(b, i, j)| ds.embed(&ak.matrix_unit(b, i, j), (k, 0), (k, l)).unwrap()).collect();
    let ys: Vec<AlgebraElement> =
        a0.basis().map(|(b, i, j)| ds.embed(&a0.matrix_unit(b, i, j), (0, l), (k, l)).unwrap()).collect();
    let rows: Vec<Vec<C64>> = xs
        .iter()
        .map(|x| ys.iter().flat_map(|y| x.commutator(y).blocks.into_iter().flat_map(|m| m.iter().copied().collect::<Vec<_>>())).collect())
        .collect();
    let m = CMat::from_fn(rows[0].len(), rows.len(), |i, j| rows[j][i]);
    null_space(&m, 1e-9).ncols()
}

#[test]
fn a3_commutants_match_brute_force() {
    let ds = tl_sequence("A3");
    let caps = Caps::default();
    let expected = [1, 1, 2, 4];
    for (k, &d) in expected.iter().enumerate() {
        assert_eq!(brute_force_dim(&ds, k, 4), d, "oracle at k={k}");
        assert_eq!(relative_commutant(&ds, k, &caps).unwrap().dim(), d, "direct at k={k}");
    }
    let t = tower(&ds, 3, &caps).unwrap();
    assert_eq!(t.dims(), expected);
    assert_eq!(t.sizes(), vec![vec![1], vec![1], vec![1, 1], vec![2]]);
}

#[test]
fn a4_tower_matches_direct_solves() {
    let ds = tl_sequence("A4");
    let caps = Caps::default();
    let t = tower(&ds, 5, &caps).unwrap();
    for k in 0..=5 {
        let c = relative_commutant(&ds, k, &caps).unwrap();
        let mut a = c.sizes();
        let mut b = t.levels[k].sizes();
        a.sort();
        b.sort();
        assert_eq!(a, b, "k={k}");
    }
    for k in 0..=4 {
        assert_eq!(brute_force_dim(&ds, k, 4), t.levels[k].dim(), "k={k}");
    }
}

#[test]
fn commutant_elements_commute_with_horizontal_algebras() {
    let ds = tl_sequence("A4");
    let c = relative_commutant(&ds, 3, &Caps::default()).unwrap();
    let l = 3;
    let a0 = ds.algebra(0, l).unwrap();
    for p in 0..c.irreps.len() {
        let x = ds.embed(&c.matrix_unit(p, 0, c.irreps[p].d - 1), (3, 0), (3, l)).unwrap();
        for (b, i, j) in a0.basis() {
            let y = ds.embed(&a0.matrix_unit(b, i, j), (0, l), (3, l)).unwrap();
            assert!(x.commutator(&y).norm() < 1e-9);
        }
    }
}

#[test]
fn matrix_units_multiply_and_expectation_is_idempotent() {
    let ds = tl_sequence("A4");
    let c = relative_commutant(&ds, 3, &Caps::default()).unwrap();
    for p in 0..c.irreps.len() {
        let d = c.irreps[p].d;
        for i in 0..d {
            for j in 0..d {
                let e = c.matrix_unit(p, i, j);
                let prod = &c.matrix_unit(p, j, i) * &e;
                assert!(prod.is_close(&c.matrix_unit(p, j, j), 1e-10));
                assert!(c.contains(&e, 1e-10));
            }
        }
    }
    let incl = c.inclusion(ds.system()).unwrap();
    assert!(incl.homomorphism_defect() < 1e-10);
}

#[test]
fn a3_principal_graph() {
    let ds = tl_sequence("A3");
    let (_, pg) = analyze(&ds, &Caps::default()).unwrap();
    assert!(pg.graph.is_isomorphic(&dynkin("A3").unwrap()));
    assert_eq!(pg.depth, 2);
    assert!((pg.index - 2.0).abs() < 1e-9);
    assert!((pg.global_index - 2.0).abs() < 1e-9);
    assert!((global_index(&pg).unwrap() - 2.0).abs() < 1e-9);
}

#[test]
fn single_edge_is_trivial() {
    let ds = tl_sequence("A2");
    let t = tower(&ds, 4, &Caps::default()).unwrap();
    assert!(t.dims().iter().all(|&d| d == 1));
    let pg = principal_graph(&t).unwrap();
    assert!((pg.index - 1.0).abs() < 1e-12);
    assert!((pg.global_index - 1.0).abs() < 1e-12);
    assert!(is_flat(&ds, &Caps::default()).unwrap().flat);
    assert_eq!(subfactor_index(ds.connection(), Direction::Horizontal), 1.0);
}

#[test]
fn temperley_lieb_connections_are_flat() {
    for name in ["A3", "A4", "A5"] {
        let ds = tl_sequence(name);
        let r = is_flat(&ds, &Caps::default()).unwrap();
        assert!(r.flat, "{name}: {:?}", r.dims);
    }
}

#[test]
fn a_n_principal_graphs() {
    for n in [4, 5, 6] {
        let name = format!("A{n}");
        let ds = tl_sequence(&name);
        let (_, pg) = analyze(&ds, &Caps::default()).unwrap();
        assert!(pg.graph.is_isomorphic(&dynkin(&name).unwrap()), "{name}");
        let beta = 2.0 * (std::f64::consts::PI / (n as f64 + 1.0)).cos();
        assert!((pg.index - beta * beta).abs() < 1e-9);
    }
}

#[test]
fn shallow_tower_is_undecided() {
    let ds = tl_sequence("A5");
    let t = tower(&ds, 2, &Caps::default()).unwrap();
    assert!(matches!(principal_graph(&t), Err(Error::Undecided { .. })));
}
