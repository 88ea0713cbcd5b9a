//! One line per acceptance criterion; exits non-zero if any fails.

use std::time::Instant;

use commsq::algebra::{conditional_expectation, trace_eval, AlgebraElement, Inclusion, TraceVector};
use commsq::catalog::{
    self, build, canonical_cut_example, dynkin, fourier_matrix, ghj_connection, hadamard_square, hadamard_square_unchecked,
    rotation_matrix, Fixture,
};
use commsq::connection::{random_gauge, verify_biunitarity, SolverOptions};
use commsq::error::Error;
use commsq::flatness::{analyze, is_flat, sequence_for, subfactor_index, Caps, TowerOfCommutants};
use commsq::linalg::{C64, CMat};
use commsq::paths::{Direction, StartVertexSet};
use commsq::square::{basic_construction, iterate, verify_commuting, CommutingSquare, DoubleSequence};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn fixture(name: &str) -> Fixture {
    catalog::build_named(name, &SolverOptions::default()).unwrap()
}

fn random_element(alg: &commsq::algebra::MultiMatrixAlgebra, rng: &mut ChaCha8Rng) -> AlgebraElement {
    let mut x = AlgebraElement::zero(alg);
    for m in x.blocks.iter_mut() {
        for z in m.iter_mut() {
            *z = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
    }
    x
}

/// Largest eigenvalue of `ΛᵀΛ` with its eigenvector, by power iteration.
fn markov(lam: &[Vec<usize>]) -> (f64, Vec<f64>) {
    let (na, nb) = (lam.len(), lam[0].len());
    let mut t = vec![1.0; nb];
    let mut val = 0.0;
    for _ in 0..5000 {
        let s: Vec<f64> = (0..na).map(|i| (0..nb).map(|j| lam[i][j] as f64 * t[j]).sum()).collect();
        let u: Vec<f64> = (0..nb).map(|j| (0..na).map(|i| lam[i][j] as f64 * s[i]).sum::<f64>() + t[j]).collect();
        let n = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        let next: Vec<f64> = u.iter().map(|x| x / n).collect();
        val = n / t.iter().map(|x| x * x).sum::<f64>().sqrt() - 1.0;
        t = next;
    }
    (val, t)
}

// ---------------------------------------------------------------------------

fn random_hadamard(n: usize, rng: &mut ChaCha8Rng) -> CMat {
    let f = fourier_matrix(n);
    let d1: Vec<C64> = (0..n).map(|_| C64::from_polar(1.0, rng.gen_range(0.0..6.3))).collect();
    let d2: Vec<C64> = (0..n).map(|_| C64::from_polar(1.0, rng.gen_range(0.0..6.3))).collect();
    CMat::from_fn(n, n, |i, j| d1[i] * f[(i, j)] * d2[j])
}

fn ac1() -> Outcome {
    let good = verify_commuting(&hadamard_square(&fourier_matrix(2)).unwrap(), 1e-10);
    let bad = verify_commuting(&hadamard_square_unchecked(&rotation_matrix(std::f64::consts::PI / 6.0)).unwrap(), 1e-10);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut squares: Vec<CommutingSquare> = Vec::new();
    for i in 0..50 {
        squares.push(hadamard_square(&random_hadamard(2 + i % 4, &mut rng)).unwrap());
    }
    for name in ["a3", "a4", "d4", "e6", "hadamard-3"] {
        let f = fixture(name);
        for _ in 0..10 {
            let g = random_gauge(f.connection.system(), &mut rng);
            let ds = DoubleSequence::new(f.connection.gauge_transform(&g).unwrap(), f.start.clone());
            let (k, l) = (rng.gen_range(0..3), rng.gen_range(0..3));
            squares.push(ds.window(k, l).unwrap());
        }
    }
    let equivalent = squares
        .iter()
        .filter(|sq| {
            let r = verify_commuting(sq, 1e-9);
            r.passes() && r.all_equivalent
        })
        .count();
    let pass = good.passes() && good.max_residual() <= 1e-10 && !bad.passes() && bad.max_residual() >= 0.1 && equivalent == 100;
    outcome(
        pass,
        format!(
            "fourier residual {:.1e}, rotated residual {:.3}, {equivalent}/100 random squares pass all six conditions",
            good.max_residual(),
            bad.max_residual()
        ),
    )
}

fn ac2() -> Outcome {
    let mut incs: Vec<Inclusion> = Vec::new();
    let h = hadamard_square(&fourier_matrix(3)).unwrap();
    incs.extend([h.i00_01.clone(), h.i00_10.clone(), h.i01_11.clone(), h.i10_11.clone()]);
    for name in ["a3", "a4", "e6"] {
        let ds = fixture(name).sequence(Direction::Horizontal).unwrap();
        incs.push(ds.horizontal_inclusion(2, 2).unwrap());
        incs.push(ds.vertical_inclusion(2, 3).unwrap());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    let mut ok = 0;
    for inc in &incs {
        let (beta2, t) = markov(&inc.bratteli);
        let tr = TraceVector::normalized(&inc.big, &t).unwrap();
        let r = basic_construction(inc, &tr).unwrap();
        let transposed = (0..inc.big.n_summands())
            .all(|j| (0..inc.small.n_summands()).all(|i| r.inclusion.bratteli[j][i] == inc.bratteli[i][j]));
        let e = &r.jones;
        let mut defect: f64 = 0.0;
        for _ in 0..3 {
            let b = random_element(&inc.big, &mut rng);
            let eb = conditional_expectation(inc, &tr, &b).unwrap();
            let lhs = &(e * &r.inclusion.embed(&b).unwrap()) * e;
            let rhs = &r.inclusion.embed(&inc.embed(&eb).unwrap()).unwrap() * e;
            let mut d = lhs.clone();
            d.axpy(C64::new(-1.0, 0.0), &rhs);
            defect = defect.max(d.max_abs());
        }
        let te = trace_eval(&r.algebra, &r.trace, e).unwrap().re;
        let trace_err = (te - 1.0 / beta2).abs();
        worst = worst.max(defect).max(trace_err);
        if transposed && defect <= 1e-10 && trace_err <= 1e-10 {
            ok += 1;
        }
    }
    outcome(ok == incs.len(), format!("{ok}/{} inclusions, worst defect {worst:.1e}", incs.len()))
}

fn jones_defect(ds: &DoubleSequence, beta2: f64, kmax: usize, lmax: usize) -> f64 {
    let mut worst: f64 = 0.0;
    let mut record = |x: AlgebraElement, y: AlgebraElement| {
        let mut d = x;
        d.axpy(C64::new(-1.0, 0.0), &y);
        worst = worst.max(d.max_abs());
    };
    for k in 0..=kmax {
        for l in 0..=lmax {
            let es: Vec<AlgebraElement> = (1..k).map(|j| ds.e(k, l, j).unwrap()).collect();
            let fs: Vec<AlgebraElement> = (1..l).map(|j| ds.f(k, l, j).unwrap()).collect();
            for ps in [&es, &fs] {
                for (i, p) in ps.iter().enumerate() {
                    record(p * p, p.clone());
                    record(p.adjoint(), p.clone());
                    for q in [i.checked_sub(1), Some(i + 1)].into_iter().flatten().filter(|&q| q < ps.len()) {
                        record(&(p * &ps[q]) * p, p.scale(C64::new(1.0 / beta2, 0.0)));
                    }
                    for q in ps.iter().skip(i + 2) {
                        record(p * q, q * p);
                    }
                }
            }
            for e in &es {
                for f in &fs {
                    record(e * f, f * e);
                }
            }
        }
    }
    worst
}

fn ac3() -> Outcome {
    let had = iterate(&hadamard_square(&fourier_matrix(2)).unwrap()).unwrap();
    let a3 = fixture("a3").sequence(Direction::Horizontal).unwrap();
    let dh = jones_defect(&had, 2.0, 6, 6);
    let da = jones_defect(&a3, 2.0, 6, 6);
    outcome(dh <= 1e-9 && da <= 1e-9, format!("hadamard defect {dh:.1e}, A3 defect {da:.1e} up to (6,6)"))
}

fn ac4() -> Outcome {
    let ds = fixture("a3").sequence(Direction::Horizontal).unwrap();
    let caps = Caps::default();
    let flat = is_flat(&ds, &caps).unwrap().flat;
    let (tower, pg) = analyze(&ds, &caps).unwrap();
    let sizes: Vec<usize> = tower.levels.iter().take(4).map(|c| c.total_size()).collect();
    let graph = pg.graph.is_isomorphic(&dynkin("A3").unwrap());
    let pass = flat
        && graph
        && (pg.index - 2.0).abs() <= 1e-9
        && (pg.global_index - 2.0).abs() <= 1e-9
        && sizes == [1, 1, 2, 2];
    outcome(
        pass,
        format!(
            "flat {flat}, graph A3 {graph}, index {:.12}, global index {:.12}, summand sizes {sizes:?}, dims {:?}",
            pg.index,
            pg.global_index,
            &tower.dims()[..4]
        ),
    )
}

fn ac5() -> Outcome {
    let conn = ghj_connection(&SolverOptions::default()).unwrap();
    let start = StartVertexSet::star(conn.system());
    let caps = Caps::default();
    let (_, h) = analyze(&sequence_for(&conn, &start, Direction::Horizontal).unwrap(), &caps).unwrap();
    let (_, v) = analyze(&sequence_for(&conn, &start, Direction::Vertical).unwrap(), &caps).unwrap();
    let target = 3.0 + 3f64.sqrt();
    let from_graphs = subfactor_index(&conn, Direction::Horizontal);
    let a11 = v.graph.is_isomorphic(&dynkin("A11").unwrap());
    let pass = (h.index - target).abs() <= 1e-6 && (from_graphs - target).abs() <= 1e-6 && a11;
    outcome(pass, format!("index {:.10} (target {target:.10}), vertical graph A11 {a11}", h.index))
}

fn ac6() -> Outcome {
    let f = fixture("e7");
    let residual = verify_biunitarity(&f.connection).max();
    let ds = f.sequence(Direction::Horizontal).unwrap();
    let caps = Caps::default();
    let flat = is_flat(&ds, &caps);
    let pg = analyze(&ds, &caps);
    let undecided = matches!(flat, Err(Error::Undecided { .. })) || matches!(pg, Err(Error::Undecided { .. }));
    let (graph, depth) = match &pg {
        Ok((_, p)) => (p.graph.is_isomorphic(&dynkin("D10").unwrap()), p.depth),
        Err(_) => (false, usize::MAX),
    };
    let not_flat = matches!(flat, Ok(ref r) if !r.flat);
    let pass = residual <= 1e-10 && not_flat && graph && depth <= 10 && !undecided;
    outcome(pass, format!("residual {residual:.1e}, not flat {not_flat}, graph D10 {graph}, depth {depth}, undecided {undecided}"))
}

fn ac7() -> Outcome {
    let caps = Caps::default();
    let entries = catalog::entries().unwrap();
    let mut bad = Vec::new();
    for e in &entries {
        let f = build(e, &SolverOptions::default()).unwrap();
        let run = |d| analyze(&f.sequence(d).unwrap(), &caps).map(|(_, p)| p);
        let (h, v) = (run(Direction::Horizontal), run(Direction::Vertical));
        let agree = match (&h, &v) {
            (Ok(h), Ok(v)) => h.finite_depth == v.finite_depth && (h.global_index - v.global_index).abs() <= 1e-6,
            (Err(Error::Undecided { .. }), Err(Error::Undecided { .. })) => true,
            _ => false,
        };
        if !agree {
            bad.push(e.name.clone());
        }
    }
    outcome(bad.is_empty(), format!("{}/{} connections agree{}", entries.len() - bad.len(), entries.len(), if bad.is_empty() { String::new() } else { format!(", disagreeing: {bad:?}") }))
}

#[derive(PartialEq, Debug)]
struct Summary {
    dims: Vec<usize>,
    sizes: Vec<Vec<usize>>,
    graph: String,
    index: u64,
    global_index: u64,
    depth: usize,
}

fn summarize(ds: &DoubleSequence, caps: &Caps) -> Vec<Summary> {
    [Direction::Horizontal, Direction::Vertical]
        .into_iter()
        .map(|d| {
            let s = sequence_for(ds.connection(), ds.start(), d).unwrap();
            let (t, p): (TowerOfCommutants, _) = analyze(&s, caps).unwrap();
            Summary {
                dims: t.dims(),
                sizes: t.sizes(),
                graph: serde_json::to_string(&p.graph).unwrap(),
                index: p.index.to_bits(),
                global_index: p.global_index.to_bits(),
                depth: p.depth,
            }
        })
        .collect()
}

fn ac8() -> Outcome {
    let caps = Caps::default();
    let entries = catalog::entries().unwrap();
    let mut bad = Vec::new();
    for e in &entries {
        let f = build(e, &SolverOptions::default()).unwrap();
        let reference = summarize(&DoubleSequence::new(f.connection.canonical_gauge(), f.start.clone()), &caps);
        let same = (0..20u64).into_par_iter().all(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
            let g = random_gauge(f.connection.system(), &mut rng);
            let moved = f.connection.gauge_transform(&g).unwrap().canonical_gauge();
            summarize(&DoubleSequence::new(moved, f.start.clone()), &caps) == reference
        });
        if !same {
            bad.push(e.name.clone());
        }
    }
    outcome(bad.is_empty(), format!("{} fixtures x 20 gauges, differing: {bad:?}", entries.len()))
}

fn ac9() -> Outcome {
    let caps = Caps::default();
    let opts = SolverOptions::default();
    let mut checked = 0;
    let mut failures = Vec::new();
    for name in ["A3", "A4", "A5"] {
        let g = dynkin(name).unwrap();
        let uncut = canonical_cut_example(&g, 1, 1, None, &opts).unwrap();
        let (_, reference) = analyze(&uncut, &caps).unwrap();
        // with p = 1 the start multiplicities are the summand sizes of B_{2,2}
        let n_min: usize = uncut.start().multiplicities().iter().sum();
        for p in 0..n_min {
            let cut = canonical_cut_example(&g, 1, 1, Some(p), &opts).unwrap();
            let windows_ok = (0..3).all(|k| (0..3).all(|l| verify_commuting(&cut.window(k, l).unwrap(), 1e-9).passes()));
            let (_, pg) = analyze(&cut, &caps).unwrap();
            if !windows_ok || !pg.graph.is_isomorphic(&reference.graph) {
                failures.push(format!("{name}/{p}"));
            }
            checked += 1;
        }
    }
    outcome(failures.is_empty(), format!("{checked} cuts of A3, A4, A5, failing: {failures:?}"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] =
        [("AC1", ac1), ("AC2", ac2), ("AC3", ac3), ("AC4", ac4), ("AC5", ac5), ("AC6", ac6), ("AC7", ac7), ("AC8", ac8), ("AC9", ac9)];
    let mut failed = Vec::new();
    for (name, run) in criteria {
        let t0 = Instant::now();
        let o = run();
        println!("{name} {} {} ({:.1?})", if o.pass { "PASS" } else { "FAIL" }, o.detail, t0.elapsed());
        if !o.pass {
            failed.push(name);
        }
    }
    if !failed.is_empty() {
        eprintln!("failing criteria: {failed:?}");
        std::process::exit(1);
    }
}
