use crate::error::{Error, Result};
use crate::paths::{BipartiteGraph, FourGraphSystem};

/// Tree given by its edges on vertices `0..n`, vertex `0` distinguished and even.
fn tree(n: usize, edges: &[(usize, usize)]) -> Result<BipartiteGraph> {
    let mut parity = vec![None; n];
    parity[0] = Some(0usize);
    let mut changed = true;
    while changed {
        changed = false;
        for &(a, b) in edges {
            match (parity[a], parity[b]) {
                (Some(p), None) => {
                    parity[b] = Some(1 - p);
                    changed = true;
                }
                (None, Some(p)) => {
                    parity[a] = Some(1 - p);
                    changed = true;
                }
                _ => {}
            }
        }
    }
    let labels: Vec<String> = (0..n).map(|i| i.to_string()).collect();
    let even: Vec<&str> = (0..n).filter(|&i| parity[i] == Some(0)).map(|i| labels[i].as_str()).collect();
    let odd: Vec<&str> = (0..n).filter(|&i| parity[i] == Some(1)).map(|i| labels[i].as_str()).collect();
    let es: Vec<(&str, &str, usize)> = edges
        .iter()
        .map(|&(a, b)| {
            if parity[a] == Some(0) {
                (labels[a].as_str(), labels[b].as_str(), 1)
            } else {
                (labels[b].as_str(), labels[a].as_str(), 1)
            }
        })
        .collect();
    BipartiteGraph::from_labels(&even, &odd, &es, "0")
}

/// Chain `0 - 1 - … - (len-1)` plus extra vertices hung on chain vertices.
fn chain_with(len: usize, extra: &[usize]) -> Result<BipartiteGraph> {
    let mut edges: Vec<(usize, usize)> = (1..len).map(|i| (i - 1, i)).collect();
    for (k, &at) in extra.iter().enumerate() {
        edges.push((at, len + k));
    }
    tree(len + extra.len(), &edges)
}

/// Dynkin diagrams `A_n`, `D_n`, `E6`, `E7`, `E8`, with `*` (vertex `0`) at the end of the
/// longest arm.
pub fn dynkin(name: &str) -> Result<BipartiteGraph> {
    let bad = || Error::Invalid(format!("unknown Dynkin diagram {name:?}"));
    let upper = name.trim().to_ascii_uppercase();
    let (kind, num) = upper.split_at(1);
    let n: usize = num.trim_start_matches('_').parse().map_err(|_| bad())?;
    match kind {
        "A" if n >= 2 => chain_with(n, &[]),
        "D" if n >= 4 => chain_with(n - 1, &[n - 3]),
        "E" if n == 6 => chain_with(5, &[2]),
        "E" if n == 7 => chain_with(6, &[3]),
        "E" if n == 8 => chain_with(7, &[4]),
        _ => Err(bad()),
    }
}

/// All four graphs equal to `g`; the top-left and bottom-right corners hold the even vertices.
pub fn self_system(g: &BipartiteGraph) -> Result<FourGraphSystem> {
    FourGraphSystem::new(g.clone(), g.swapped(), g.clone(), g.swapped())
}

/// The `A₁₁`–`E₆` system: `A₁₁` on top, `E₆` at the bottom, and vertically the graphs recording
/// how the Temperley-Lieb summands (labelled by `A₁₁` vertices) occur in the `E₆` path algebra.
pub fn ghj_system() -> Result<FourGraphSystem> {
    let g = ghj_system_graphs();
    FourGraphSystem::new(g[0].clone(), g[1].clone(), g[2].clone(), g[3].clone())
}

fn ghj_system_graphs() -> Vec<BipartiteGraph> {
    let a = |i: usize| format!("a{i}");
    let e = |i: usize| format!("e{i}");
    let a_even: Vec<String> = (0..11).step_by(2).map(a).collect();
    let a_odd: Vec<String> = (1..11).step_by(2).map(a).collect();
    let e_even: Vec<String> = [0, 2, 4].into_iter().map(e).collect();
    let e_odd: Vec<String> = [1, 3, 5].into_iter().map(e).collect();
    fn make(ev: &[String], od: &[String], edges: &[(String, String)], star: &str) -> Result<BipartiteGraph> {
        let es: Vec<(&str, &str, usize)> = edges.iter().map(|(x, y)| (x.as_str(), y.as_str(), 1)).collect();
        let ev: Vec<&str> = ev.iter().map(String::as_str).collect();
        let od: Vec<&str> = od.iter().map(String::as_str).collect();
        BipartiteGraph::from_labels(&ev, &od, &es, star)
    }
    let a_edges: Vec<(String, String)> =
        (0..10).map(|i| if i % 2 == 0 { (a(i), a(i + 1)) } else { (a(i + 1), a(i)) }).collect();
    let e_edges: Vec<(String, String)> =
        [(0, 1), (2, 1), (2, 3), (4, 3), (2, 5)].into_iter().map(|(x, y)| (e(x), e(y))).collect();
    let left: Vec<(String, String)> = [(0, 0), (2, 2), (4, 2), (4, 4), (6, 0), (6, 2), (8, 2), (10, 4)]
        .into_iter()
        .map(|(x, y)| (a(x), e(y)))
        .collect();
    let right: Vec<(String, String)> = [(1, 1), (3, 3), (3, 5), (5, 1), (5, 3), (7, 1), (7, 5), (9, 3)]
        .into_iter()
        .map(|(x, y)| (a(x), e(y)))
        .collect();
    vec![
        make(&a_even, &a_odd, &a_edges, "a0").unwrap(),
        make(&e_even, &e_odd, &e_edges, "e0").unwrap(),
        make(&a_even, &e_even, &left, "a0").unwrap(),
        make(&a_odd, &e_odd, &right, "a1").unwrap(),
    ]
}
