use commsq::algebra::{conditional_expectation, pf_data, trace_eval, AlgebraElement, Inclusion, MultiMatrixAlgebra, TraceVector};
use commsq::catalog::{dynkin, fourier_matrix, hadamard_square, self_system};
use commsq::connection::{random_gauge, solve_connection, verify_biunitarity, BiUnitaryConnection, SolverOptions};
use commsq::flatness::{analyze, is_flat, relative_commutant, Caps};
use commsq::linalg::{rank, C64, CMat};
use commsq::paths::StartVertexSet;
use commsq::square::{is_symmetric, iterate, symmetry_rank, verify_commuting, CommutingSquare, DoubleSequence};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn element(alg: &MultiMatrixAlgebra, seed: u64) -> AlgebraElement {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = AlgebraElement::zero(alg);
    for m in x.blocks.iter_mut() {
        for z in m.iter_mut() {
            *z = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
    }
    x
}

fn diff(a: &AlgebraElement, b: &AlgebraElement) -> f64 {
    let mut d = a.clone();
    d.axpy(C64::new(-1.0, 0.0), b);
    d.max_abs()
}

fn solved(name: &str) -> BiUnitaryConnection {
    solve_connection(self_system(&dynkin(name).unwrap()).unwrap(), &SolverOptions::default()).unwrap()
}

fn star_sequence(conn: BiUnitaryConnection) -> DoubleSequence {
    let start = StartVertexSet::star(conn.system());
    DoubleSequence::new(conn, start)
}

/// Inclusion with the given small sizes and Bratteli matrix; the big sizes follow.
fn inclusion(small: Vec<usize>, lam: Vec<Vec<usize>>) -> Inclusion {
    let nb = lam[0].len();
    let big: Vec<usize> = (0..nb).map(|j| (0..small.len()).map(|i| small[i] * lam[i][j]).sum()).collect();
    Inclusion::standard(MultiMatrixAlgebra::from_sizes(&small).unwrap(), MultiMatrixAlgebra::from_sizes(&big).unwrap(), lam)
        .unwrap()
}

fn bratteli() -> impl Strategy<Value = (Vec<usize>, Vec<Vec<usize>>)> {
    (1usize..=3, 1usize..=3).prop_flat_map(|(na, nb)| {
        (prop::collection::vec(1usize..=3, na), prop::collection::vec(prop::collection::vec(0usize..=2, nb), na))
            .prop_filter("every summand embeds", move |(_, lam)| {
                lam.iter().all(|r| r.iter().any(|&x| x > 0)) && (0..nb).all(|j| lam.iter().any(|r| r[j] > 0))
            })
    })
}

fn hadamard(n: usize, phases: &[f64]) -> CMat {
    let f = fourier_matrix(n);
    CMat::from_fn(n, n, |i, j| C64::from_polar(1.0, phases[i]) * f[(i, j)] * C64::from_polar(1.0, phases[n + j]))
}

/// Walks of length `len` from the star of `g`, by flat vertex index.
fn walk_counts(name: &str, len: usize) -> Vec<f64> {
    let g = dynkin(name).unwrap();
    let a = g.adjacency();
    let mut v = vec![0.0; g.n_vertices()];
    v[g.flat_index(g.star())] = 1.0;
    for _ in 0..len {
        v = (0..v.len()).map(|i| (0..v.len()).map(|j| a[(i, j)] * v[j]).sum()).collect();
    }
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn expectation_fixes_the_small_algebra_and_the_trace((small, lam) in bratteli(), w in prop::collection::vec(0.1f64..2.0, 3), seed in any::<u64>()) {
        let inc = inclusion(small, lam);
        let tr = TraceVector::normalized(&inc.big, &w[..inc.big.n_summands()]).unwrap();
        let a = element(&inc.small, seed);
        let ea = conditional_expectation(&inc, &tr, &inc.embed(&a).unwrap()).unwrap();
        prop_assert!(diff(&ea, &a) < 1e-10);
        let b = element(&inc.big, seed ^ 1);
        let eb = conditional_expectation(&inc, &tr, &b).unwrap();
        let small_tr = inc.restrict_trace(&tr);
        let t1 = trace_eval(&inc.big, &tr, &b).unwrap();
        let t2 = trace_eval(&inc.small, &small_tr, &eb).unwrap();
        prop_assert!((t1 - t2).norm() < 1e-10);
        // bimodule property
        let (a1, a2) = (element(&inc.small, seed ^ 2), element(&inc.small, seed ^ 3));
        let sandwich = &(&inc.embed(&a1).unwrap() * &b) * &inc.embed(&a2).unwrap();
        let lhs = conditional_expectation(&inc, &tr, &sandwich).unwrap();
        prop_assert!(diff(&lhs, &(&(&a1 * &eb) * &a2)) < 1e-10);
    }

    #[test]
    fn pf_weights_solve_the_eigen_equation(n in 2usize..14, kind in 0usize..3) {
        let name = match kind {
            0 => format!("A{n}"),
            1 => format!("D{}", n.max(4)),
            _ => format!("E{}", 6 + n % 3),
        };
        let g = dynkin(&name).unwrap();
        let pf = pf_data(&g).unwrap();
        let a = g.adjacency();
        for i in 0..g.n_vertices() {
            prop_assert!(pf.weights[i] > 0.0);
            let s: f64 = (0..g.n_vertices()).map(|j| a[(i, j)] * pf.weights[j]).sum();
            prop_assert!((s - pf.norm * pf.weights[i]).abs() < 1e-12 * pf.norm.max(1.0) * pf.weights[i].max(1.0));
        }
    }

    #[test]
    fn hadamard_squares_pass_all_conditions_and_iterate_symmetrically(n in 2usize..6, phases in prop::collection::vec(0.0f64..6.3, 10)) {
        let sq = hadamard_square(&hadamard(n, &phases)).unwrap();
        let r = verify_commuting(&sq, 1e-9);
        prop_assert!(r.passes() && r.all_equivalent);
        let ds = iterate(&sq).unwrap();
        for (k, l) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
            let w = ds.window(k, l).unwrap();
            prop_assert!(is_symmetric(&w));
            prop_assert!(verify_commuting(&w, 1e-9).passes());
        }
    }

    #[test]
    fn windows_of_gauged_sequences_commute(which in 0usize..4, seed in any::<u64>(), k in 0usize..3, l in 0usize..3) {
        let name = ["A3", "A5", "D5", "E6"][which];
        let conn = solved(name);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_gauge(conn.system(), &mut rng);
        let ds = star_sequence(conn.gauge_transform(&g).unwrap());
        let r = verify_commuting(&ds.window(k, l).unwrap(), 1e-9);
        prop_assert!(r.passes() && r.all_equivalent, "{:?}", r);
    }

    #[test]
    fn string_algebra_dimensions_count_paths(which in 0usize..4, k in 0usize..4, l in 0usize..4) {
        let name = ["A3", "A6", "D5", "E7"][which];
        let ds = star_sequence(solved(name));
        let walks = walk_counts(name, k + l);
        let expected: f64 = walks.iter().map(|c| c * c).sum();
        prop_assert_eq!(ds.algebra(k, l).unwrap().dim(), expected as usize);
    }

    #[test]
    fn inclusions_are_unital_trace_and_star_preserving(which in 0usize..3, k in 0usize..3, l in 0usize..3, seed in any::<u64>()) {
        let ds = star_sequence(solved(["A4", "D5", "E6"][which]));
        for (inc, to) in [(ds.horizontal_inclusion(k, l).unwrap(), (k, l + 1)), (ds.vertical_inclusion(k, l).unwrap(), (k + 1, l))] {
            let one = AlgebraElement::identity(&inc.small);
            prop_assert!(diff(&inc.embed(&one).unwrap(), &AlgebraElement::identity(&inc.big)) < 1e-12);
            let x = element(&inc.small, seed);
            let y = inc.embed(&x).unwrap();
            prop_assert!(diff(&inc.embed(&x.adjoint()).unwrap(), &y.adjoint()) < 1e-12);
            let t_small = trace_eval(&inc.small, &ds.trace(k, l).unwrap(), &x).unwrap();
            let t_big = trace_eval(&inc.big, &ds.trace(to.0, to.1).unwrap(), &y).unwrap();
            prop_assert!((t_small - t_big).norm() < 1e-12);
        }
    }

    #[test]
    fn jones_relations_hold_with_the_graph_norm(n in 3usize..7, seed in any::<u64>()) {
        let name = format!("A{n}");
        let conn = solved(&name);
        let beta2 = pf_data(&dynkin(&name).unwrap()).unwrap().norm.powi(2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_gauge(conn.system(), &mut rng);
        let ds = star_sequence(conn.gauge_transform(&g).unwrap());
        let (k, l) = (4, 4);
        let es: Vec<AlgebraElement> = (1..k).map(|j| ds.e(k, l, j).unwrap()).collect();
        let fs: Vec<AlgebraElement> = (1..l).map(|j| ds.f(k, l, j).unwrap()).collect();
        for ps in [&es, &fs] {
            for i in 0..ps.len() - 1 {
                let (p, q) = (&ps[i], &ps[i + 1]);
                prop_assert!(diff(&(&(p * q) * p), &p.scale(C64::new(1.0 / beta2, 0.0))) < 1e-10);
                prop_assert!(diff(&(&(q * p) * q), &q.scale(C64::new(1.0 / beta2, 0.0))) < 1e-10);
            }
        }
        for e in &es {
            for f in &fs {
                prop_assert!(diff(&(e * f), &(f * e)) < 1e-10);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn gauge_leaves_residuals_dimensions_and_commutants_unchanged(which in 0usize..3, seed in any::<u64>()) {
        let conn = solved(["A4", "D5", "E6"][which]);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let moved = conn.gauge_transform(&random_gauge(conn.system(), &mut rng)).unwrap();
        let (r0, r1) = (verify_biunitarity(&conn), verify_biunitarity(&moved));
        prop_assert!((r0.max() - r1.max()).abs() < 1e-12);
        let (a, b) = (star_sequence(conn), star_sequence(moved));
        for (k, l) in [(1, 2), (2, 3), (3, 1)] {
            prop_assert_eq!(a.algebra(k, l).unwrap(), b.algebra(k, l).unwrap());
            prop_assert_eq!(a.trace(k, l).unwrap(), b.trace(k, l).unwrap());
        }
        let caps = Caps::default();
        let (ta, pa) = analyze(&a, &caps).unwrap();
        let (tb, pb) = analyze(&b, &caps).unwrap();
        prop_assert_eq!(ta.sizes(), tb.sizes());
        prop_assert!(pa.graph.is_isomorphic(&pb.graph));
        prop_assert_eq!(pa.index.to_bits(), pb.index.to_bits());
        prop_assert_eq!(is_flat(&a, &caps).unwrap().dims, is_flat(&b, &caps).unwrap().dims);
    }

    #[test]
    fn solver_seeds_agree_up_to_gauge(which in 0usize..3, seed in 1u64..1000) {
        let sys = self_system(&dynkin(["A5", "D6", "E6"][which]).unwrap()).unwrap();
        let a = solve_connection(sys.clone(), &SolverOptions::default()).unwrap().canonical_gauge();
        let b = solve_connection(sys, &SolverOptions { seed, ..SolverOptions::default() }).unwrap().canonical_gauge();
        let (ca, cb) = (a.cells(), b.cells());
        prop_assert_eq!(ca.len(), cb.len());
        for ((x, za), (y, zb)) in ca.iter().zip(&cb) {
            prop_assert_eq!(x, y);
            prop_assert!((za.norm() - zb.norm()).abs() < 1e-8);
        }
    }

    #[test]
    fn commutant_dimensions_fall_and_settle(which in 0usize..4, k in 1usize..5) {
        let ds = star_sequence(solved(["A4", "A6", "D5", "E7"][which]));
        let c = relative_commutant(&ds, k, &Caps::default()).unwrap();
        prop_assert!(c.dims_by_l.windows(2).all(|w| w[1] <= w[0]), "{:?}", c.dims_by_l);
        prop_assert_eq!(*c.dims_by_l.last().unwrap(), c.dim());
    }
}

#[test]
fn flat_self_systems_reproduce_their_graph() {
    let caps = Caps::default();
    for name in ["A3", "A4", "A6", "D4", "D6", "E6", "E8"] {
        let (_, pg) = analyze(&star_sequence(solved(name)), &caps).unwrap();
        assert!(pg.graph.is_isomorphic(&dynkin(name).unwrap()), "{name}");
    }
}

/// Rank of every product of matrix units, with no sampling.
fn exhaustive_symmetry_rank(sq: &CommutingSquare) -> usize {
    let units = |alg: &MultiMatrixAlgebra, inc: &Inclusion| -> Vec<AlgebraElement> {
        alg.basis().map(|(b, i, j)| inc.embed(&alg.matrix_unit(b, i, j)).unwrap()).collect()
    };
    let (a, c) = (units(&sq.b01, &sq.i01_11), units(&sq.b10, &sq.i10_11));
    let rows: Vec<Vec<C64>> = a.iter().flat_map(|x| c.iter().map(move |y| sq.b11.coords(&(x * y)))).collect();
    rank(&CMat::from_fn(rows.len(), sq.b11.dim(), |i, j| rows[i][j]), 1e-9)
}

#[test]
fn sampled_symmetry_rank_matches_all_products() {
    let ds = iterate(&hadamard_square(&fourier_matrix(3)).unwrap()).unwrap();
    for (k, l) in [(1, 1), (2, 1)] {
        let w = ds.window(k, l).unwrap();
        assert_eq!(symmetry_rank(&w), exhaustive_symmetry_rank(&w));
        assert!(is_symmetric(&w));
    }
}

#[test]
fn diagonal_copy_square_is_not_symmetric() {
    // M_4 sitting diagonally in M_4 ⊕ M_4 from both sides
    let m4 = MultiMatrixAlgebra::from_sizes(&[4]).unwrap();
    let big = MultiMatrixAlgebra::from_sizes(&[4, 4]).unwrap();
    let same = Inclusion::standard(m4.clone(), m4.clone(), vec![vec![1]]).unwrap();
    let diag = Inclusion::standard(m4, big.clone(), vec![vec![1, 1]]).unwrap();
    let tr = TraceVector::normalized(&big, &[1.0, 1.0]).unwrap();
    let sq = CommutingSquare::new(same.clone(), same, diag.clone(), diag, tr).unwrap();
    assert!(verify_commuting(&sq, 1e-9).passes());
    assert_eq!(exhaustive_symmetry_rank(&sq), 16);
    assert_eq!(symmetry_rank(&sq), 16);
    assert!(!is_symmetric(&sq));
}
