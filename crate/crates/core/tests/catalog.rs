use commsq::catalog::{build, dynkin, entries, Tagged};
use commsq::connection::SolverOptions;
use commsq::flatness::{analyze, is_flat, Caps};
use commsq::paths::Direction;

fn close(name: &str, what: &str, got: f64, want: &Option<Tagged<f64>>) {
    if let Some(w) = want {
        assert!((got - w.value).abs() < 1e-7 * w.value.max(1.0), "{name}: {what} {got} vs {}", w.value);
    }
}

#[test]
fn every_entry_matches_its_expected_record() {
    let caps = Caps::default();
    let opts = SolverOptions::default();
    for e in entries().unwrap() {
        let f = build(&e, &opts).unwrap();
        let x = &e.expected;
        for (dir, idx, graph) in [
            (Direction::Horizontal, &x.horizontal_index, &x.horizontal_graph),
            (Direction::Vertical, &x.vertical_index, &x.vertical_graph),
        ] {
            let ds = f.sequence(dir).unwrap();
            let (_, pg) = analyze(&ds, &caps).unwrap();
            close(&e.name, "index", pg.index, idx);
            if let Some(g) = graph {
                assert!(pg.graph.is_isomorphic(&dynkin(&g.value).unwrap()), "{}: {dir:?} graph is not {}", e.name, g.value);
            }
            close(&e.name, "global index", pg.global_index, &x.global_index);
            if dir == Direction::Horizontal {
                if let Some(d) = &x.depth {
                    assert_eq!(pg.depth, d.value, "{}", e.name);
                }
                if let Some(fl) = &x.flat {
                    assert_eq!(is_flat(&ds, &caps).unwrap().flat, fl.value, "{}", e.name);
                }
            }
        }
    }
}

#[test]
fn lookup_ignores_case() {
    let e = commsq::catalog::entry("E7").unwrap();
    assert_eq!(e.name, "e7");
    assert!(commsq::catalog::entry("nope").is_err());
}
