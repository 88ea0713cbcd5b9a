//! Small dense helpers over `DMatrix<Complex64>`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn fro(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Deviation of `m` from unitarity, measured as the largest entry of `m* m - 1` and `m m* - 1`.
pub fn unitarity_defect(m: &CMat) -> f64 {
    if m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let id = CMat::identity(n, n);
    max_abs(&(m.adjoint() * m - &id)).max(max_abs(&(m * m.adjoint() - id)))
}

/// Closest unitary in Frobenius norm (the unitary factor of the polar decomposition).
pub fn nearest_unitary(m: &CMat) -> CMat {
    let svd = m.clone().svd(true, true);
    svd.u.unwrap() * svd.v_t.unwrap()
}

/// Orthonormal basis (as columns) of the kernel of `a`, singular values below `tol` count as zero.
pub fn null_space(a: &CMat, tol: f64) -> CMat {
    let d = a.ncols();
    if d == 0 {
        return CMat::zeros(0, 0);
    }
    if a.nrows() == 0 {
        return CMat::identity(d, d);
    }
    let square = if a.nrows() > d {
        a.clone().qr().r()
    } else {
        let mut p = CMat::zeros(d, d);
        p.view_mut((0, 0), (a.nrows(), d)).copy_from(a);
        p
    };
    let svd = square.svd(false, true);
    let vt = svd.v_t.unwrap();
    let cols: Vec<usize> = (0..d).filter(|&i| svd.singular_values[i] <= tol).collect();
    let mut out = CMat::zeros(d, cols.len());
    for (k, &i) in cols.iter().enumerate() {
        for r in 0..d {
            out[(r, k)] = vt[(i, r)].conj();
        }
    }
    out
}

/// Numerical rank with an absolute singular-value cutoff.
pub fn rank(a: &CMat, tol: f64) -> usize {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0;
    }
    let m = if a.nrows() > 2 * a.ncols() { a.clone().qr().r() } else { a.clone() };
    m.singular_values().iter().filter(|&&s| s > tol).count()
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    if m.nrows() == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let h = (m + m.adjoint()) * c(0.5);
    let eig = h.symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = CMat::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vecs.set_column(k, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

pub fn random_gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    })
}

/// Haar-distributed unitary via QR with phase correction.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    let g = random_gaussian(n, n, rng);
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let mut out = q;
    for j in 0..n {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..n {
            out[(i, j)] *= ph;
        }
    }
    out
}

pub fn random_phase<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU))
}

/// Sparse matrix stored as rows of (column, value) pairs.
#[derive(Clone, Debug)]
pub struct SparseRows {
    pub ncols: usize,
    pub rows: Vec<Vec<(usize, C64)>>,
}

impl SparseRows {
    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    /// `self * x * self^*` for dense `x`.
    pub fn conjugate(&self, x: &CMat) -> CMat {
        let n = self.nrows();
        let m = x.ncols();
        // t = self * x
        let mut t = CMat::zeros(n, m);
        for (i, row) in self.rows.iter().enumerate() {
            for &(k, v) in row {
                for j in 0..m {
                    t[(i, j)] += v * x[(k, j)];
                }
            }
        }
        // out = t * self^*
        let mut out = CMat::zeros(n, n);
        for (j, row) in self.rows.iter().enumerate() {
            for &(k, v) in row {
                let vc = v.conj();
                for i in 0..n {
                    out[(i, j)] += t[(i, k)] * vc;
                }
            }
        }
        out
    }

    /// `self * m` for dense `m`.
    pub fn mul_dense(&self, m: &CMat) -> CMat {
        let mut out = CMat::zeros(self.nrows(), m.ncols());
        for (i, row) in self.rows.iter().enumerate() {
            for &(k, v) in row {
                for j in 0..m.ncols() {
                    out[(i, j)] += v * m[(k, j)];
                }
            }
        }
        out
    }

    pub fn to_dense(&self) -> CMat {
        let mut out = CMat::zeros(self.nrows(), self.ncols);
        for (i, row) in self.rows.iter().enumerate() {
            for &(k, v) in row {
                out[(i, k)] += v;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn null_space_of_rank_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v = random_gaussian(4, 1, &mut rng);
        let a = v.adjoint();
        let k = null_space(&a, 1e-10);
        assert_eq!(k.ncols(), 3);
        assert!(max_abs(&(&a * &k)) < 1e-12);
        let tall = CMat::from_fn(10, 4, |i, j| v[(j, 0)].conj() * c((i + 1) as f64));
        assert_eq!(null_space(&tall, 1e-9).ncols(), 3);
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let u = random_unitary(5, &mut rng);
        assert!(unitarity_defect(&u) < 1e-12);
        let m = random_gaussian(3, 3, &mut rng);
        assert!(unitarity_defect(&nearest_unitary(&m)) < 1e-12);
    }

    #[test]
    fn sparse_conjugation_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = random_gaussian(3, 3, &mut rng);
        let s = SparseRows {
            ncols: 3,
            rows: vec![vec![(0, c(2.0)), (2, C64::new(0.0, 1.0))], vec![(1, ONE)], vec![]],
        };
        let d = s.to_dense();
        assert!(max_abs(&(s.conjugate(&x) - &d * &x * d.adjoint())) < 1e-12);
    }
}
