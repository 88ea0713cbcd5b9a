//! Numerical search for bi-unitary connections on a four-graph system.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, C64, ZERO};
use crate::paths::{FourGraphSystem, LEFT, RIGHT};

use super::{verify_biunitarity, BiUnitaryConnection};

#[derive(Clone, Debug)]
pub struct SolverOptions {
    pub seed: u64,
    pub restarts: usize,
    /// Iteration cap per restart (projection sweeps plus Newton steps).
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { seed: 0, restarts: 20, max_iter: 10_000, tol: 1e-10 }
    }
}

/// Where each cell reappears inside the renormalized `(b, c)` matrices.
struct Layout {
    /// `(block, row, col)` of every cell in layout order.
    cells: Vec<(usize, usize, usize)>,
    /// Per cell: `(bc block, row, col, factor)`.
    reflect: Vec<(usize, usize, usize, f64)>,
    ad_sizes: Vec<usize>,
    bc_sizes: Vec<usize>,
}

impl Layout {
    fn new(conn: &BiUnitaryConnection) -> Self {
        let sys = conn.system();
        let mut cells = Vec::new();
        let mut keyed = Vec::new();
        for (k, blk) in conn.blocks().iter().enumerate() {
            for (i, &(top, right)) in blk.h.iter().enumerate() {
                let b = sys.other_end(top, blk.a);
                for (j, &(left, bottom)) in blk.v.iter().enumerate() {
                    let c = sys.other_end(left, blk.a);
                    let f = (sys.mu(blk.a) * sys.mu(blk.d) / (sys.mu(b) * sys.mu(c))).sqrt();
                    cells.push((k, i, j));
                    keyed.push(((b, c), (top, left), (right, bottom), f));
                }
            }
        }
        let mut keys: Vec<(u32, u32)> = keyed.iter().map(|x| x.0).collect();
        keys.sort();
        keys.dedup();
        let mut rows: Vec<Vec<(u32, u32)>> = vec![Vec::new(); keys.len()];
        let mut cols: Vec<Vec<(u32, u32)>> = vec![Vec::new(); keys.len()];
        for (key, r, c, _) in &keyed {
            let m = keys.binary_search(key).unwrap();
            rows[m].push(*r);
            cols[m].push(*c);
        }
        for v in rows.iter_mut().chain(cols.iter_mut()) {
            v.sort();
            v.dedup();
        }
        let reflect = keyed
            .iter()
            .map(|(key, r, c, f)| {
                let m = keys.binary_search(key).unwrap();
                (m, rows[m].binary_search(r).unwrap(), cols[m].binary_search(c).unwrap(), *f)
            })
            .collect();
        Self {
            cells,
            reflect,
            ad_sizes: conn.blocks().iter().map(|b| b.h.len()).collect(),
            bc_sizes: rows.iter().map(Vec::len).collect(),
        }
    }

    fn flatten(&self, w: &[CMat]) -> Vec<C64> {
        self.cells.iter().map(|&(k, i, j)| w[k][(i, j)]).collect()
    }

    fn ad(&self, x: &[C64]) -> Vec<CMat> {
        let mut out: Vec<CMat> = self.ad_sizes.iter().map(|&n| CMat::zeros(n, n)).collect();
        for (&(k, i, j), z) in self.cells.iter().zip(x) {
            out[k][(i, j)] = *z;
        }
        out
    }

    fn bc(&self, x: &[C64]) -> Vec<CMat> {
        let mut out: Vec<CMat> = self.bc_sizes.iter().map(|&n| CMat::zeros(n, n)).collect();
        for (&(m, r, c, f), z) in self.reflect.iter().zip(x) {
            out[m][(r, c)] = z.conj() * f;
        }
        out
    }

    fn from_bc(&self, x: &[CMat]) -> Vec<C64> {
        self.reflect.iter().map(|&(m, r, c, f)| x[m][(r, c)].conj() / f).collect()
    }

    /// Real residual vector: entries of `U*U - 1` for all blocks of both kinds.
    fn residual(&self, x: &[C64]) -> Vec<f64> {
        let mut out = Vec::new();
        for u in self.ad(x).iter().chain(self.bc(x).iter()) {
            let g = u.adjoint() * u - CMat::identity(u.nrows(), u.ncols());
            for z in g.iter() {
                out.push(z.re);
                out.push(z.im);
            }
        }
        out
    }

    /// Directional derivative of the residual along `d`.
    fn derivative(&self, x: &[C64], d: &[C64]) -> Vec<f64> {
        let mut out = Vec::new();
        let pairs = self.ad(x).into_iter().zip(self.ad(d)).chain(self.bc(x).into_iter().zip(self.bc(d)));
        for (u, du) in pairs {
            let g = du.adjoint() * &u + u.adjoint() * du;
            for z in g.iter() {
                out.push(z.re);
                out.push(z.im);
            }
        }
        out
    }

    fn max_defect(&self, x: &[C64]) -> f64 {
        self.ad(x)
            .iter()
            .chain(self.bc(x).iter())
            .map(linalg::unitarity_defect)
            .fold(0.0, f64::max)
    }
}

/// Alternating nearest-unitary projections, then damped Gauss-Newton.
fn run_restart(layout: &Layout, seed: u64, opts: &SolverOptions) -> (f64, Vec<C64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let init: Vec<CMat> = layout.ad_sizes.iter().map(|&n| linalg::random_unitary(n, &mut rng)).collect();
    let mut x = layout.flatten(&init);
    let mut iters = 0;
    let sweeps = opts.max_iter.saturating_sub(200).max(1);
    while iters < sweeps {
        iters += 1;
        let ad: Vec<CMat> = layout.ad(&x).iter().map(linalg::nearest_unitary).collect();
        x = layout.flatten(&ad);
        let bc: Vec<CMat> = layout.bc(&x).iter().map(linalg::nearest_unitary).collect();
        let y = layout.from_bc(&bc);
        // average of the two projections keeps the iteration symmetric
        let ad2: Vec<CMat> = layout.ad(&y).iter().map(linalg::nearest_unitary).collect();
        let y2 = layout.flatten(&ad2);
        let step: f64 = x.iter().zip(&y2).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        x = y2;
        if step < 1e-9 || (iters % 50 == 0 && layout.max_defect(&x) < 1e-6) {
            break;
        }
    }
    let mut res = layout.max_defect(&x);
    // polish
    let n = x.len();
    let mut lambda = 1e-6;
    let mut f = layout.residual(&x);
    let mut cost: f64 = f.iter().map(|v| v * v).sum();
    for _ in 0..200 {
        if res <= opts.tol * 1e-2 {
            break;
        }
        let mut jac = nalgebra::DMatrix::<f64>::zeros(f.len(), 2 * n);
        let mut d = vec![ZERO; n];
        for p in 0..n {
            for (q, unit) in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)].into_iter().enumerate() {
                d[p] = unit;
                let col = layout.derivative(&x, &d);
                for (r, v) in col.into_iter().enumerate() {
                    jac[(r, 2 * p + q)] = v;
                }
            }
            d[p] = ZERO;
        }
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let g = &jt * nalgebra::DVector::from_vec(f.clone());
        let mut improved = false;
        for _ in 0..12 {
            let mut a = jtj.clone();
            for i in 0..a.nrows() {
                a[(i, i)] += lambda * (1.0 + jtj[(i, i)]);
            }
            let Some(delta) = a.lu().solve(&(-&g)) else {
                lambda *= 10.0;
                continue;
            };
            let cand: Vec<C64> = (0..n).map(|p| x[p] + C64::new(delta[2 * p], delta[2 * p + 1])).collect();
            let fc = layout.residual(&cand);
            let cc: f64 = fc.iter().map(|v| v * v).sum();
            if cc < cost {
                x = cand;
                f = fc;
                cost = cc;
                lambda = (lambda / 10.0).max(1e-15);
                improved = true;
                break;
            }
            lambda *= 10.0;
        }
        res = layout.max_defect(&x);
        if !improved {
            break;
        }
    }
    (res, x)
}

/// Search for a bi-unitary connection; restarts run in parallel and the lowest residual wins
/// (ties go to the lower restart index). The result is put in the canonical gauge.
pub fn solve_connection(sys: FourGraphSystem, opts: &SolverOptions) -> Result<BiUnitaryConnection> {
    let template = BiUnitaryConnection::from_fn(sys, |_, _| ZERO)?;
    if template.n_cells() == 0 {
        return Err(Error::Invalid("system has no cells".into()));
    }
    let layout = Layout::new(&template);
    let restarts = opts.restarts.max(1);
    let results: Vec<(f64, Vec<C64>)> = (0..restarts)
        .into_par_iter()
        .map(|r| run_restart(&layout, opts.seed.wrapping_add(r as u64), opts))
        .collect();
    let (best_idx, best) = results
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .0.total_cmp(&b.1 .0).then(a.0.cmp(&b.0)))
        .expect("at least one restart");
    log::debug!("solver: best restart {best_idx} residual {:.3e}", best.0);
    if best.0 > opts.tol {
        return Err(Error::NoConvergence { best_residual: best.0 });
    }
    let conn = template.with_values(layout.ad(&best.1)).canonical_gauge();
    let report = verify_biunitarity(&conn);
    if !report.passes(opts.tol) {
        return Err(Error::NoConvergence { best_residual: report.max() });
    }
    Ok(conn)
}

/// Two-term connection on a system whose four graphs are one simple graph `G` (top and left as
/// given, bottom and right with parities exchanged):
/// `W = ω [b = c] + ω̄ [a = d] √(μ(b)μ(c)) / μ(a)` with `cos 2θ = -β/2`, `ω = e^{iθ}`.
pub fn temperley_lieb_connection(sys: FourGraphSystem) -> Result<BiUnitaryConnection> {
    let g = sys.top();
    if g.edges().iter().any(|e| e.2 > 1) {
        return Err(Error::Invalid("two-term connection needs a graph without multiple edges".into()));
    }
    for other in [LEFT, RIGHT] {
        let h = sys.graph(other);
        let same = if other == LEFT { h.clone() } else { h.swapped() };
        if same.even_labels() != g.even_labels() || same.odd_labels() != g.odd_labels() || same.edges() != g.edges() {
            return Err(Error::Invalid("two-term connection needs all four graphs equal".into()));
        }
    }
    let beta = sys.beta(crate::paths::Step::H);
    if beta >= 2.0 {
        return Err(Error::Invalid("two-term connection needs graph norm below 2".into()));
    }
    let theta = 0.5 * (-beta / 2.0).acos();
    let omega = C64::from_polar(1.0, theta);
    BiUnitaryConnection::from_fn(sys, |s, cell| {
        let a = s.edge_ends(cell.top).0;
        let b = s.other_end(cell.top, a);
        let c = s.other_end(cell.left, a);
        let d = s.other_end(cell.right, b);
        let mut w = ZERO;
        if s.node_label(b) == s.node_label(c) {
            w += omega;
        }
        if s.node_label(a) == s.node_label(d) {
            w += omega.conj() * (s.mu(b) * s.mu(c)).sqrt() / s.mu(a);
        }
        w
    })
}
