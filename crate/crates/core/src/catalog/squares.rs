use crate::algebra::{Inclusion, MultiMatrixAlgebra, TraceVector};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, C64};
use crate::square::{verify_commuting, CommutingSquare};

/// Normalized Fourier matrix `ω^{jk} / √n`.
pub fn fourier_matrix(n: usize) -> CMat {
    let s = (n as f64).sqrt();
    CMat::from_fn(n, n, |j, k| C64::from_polar(1.0 / s, 2.0 * std::f64::consts::PI * (j * k) as f64 / n as f64))
}

pub fn rotation_matrix(theta: f64) -> CMat {
    let (s, c) = theta.sin_cos();
    CMat::from_fn(2, 2, |i, j| C64::new([[c, -s], [s, c]][i][j], 0.0))
}

fn labelled(prefix: &str, n: usize) -> Result<MultiMatrixAlgebra> {
    MultiMatrixAlgebra::new((0..n).map(|i| format!("{prefix}{i}")).collect(), vec![1; n])
}

/// `ℂ ⊂ D, uDu^* ⊂ M_n` for the diagonal subalgebra `D`, without checking the square commutes.
pub fn hadamard_square_unchecked(u: &CMat) -> Result<CommutingSquare> {
    let n = u.nrows();
    if u.ncols() != n || n == 0 {
        return Err(Error::Shape("matrix must be square".into()));
    }
    if linalg::unitarity_defect(u) > 1e-9 {
        return Err(Error::Invalid("matrix is not unitary".into()));
    }
    let one = MultiMatrixAlgebra::new(vec!["*".into()], vec![1])?;
    let diag = labelled("p", n)?;
    let rotated = labelled("q", n)?;
    let full = MultiMatrixAlgebra::new(vec!["M".into()], vec![n])?;
    let i00_01 = Inclusion::standard(one.clone(), diag.clone(), vec![vec![1; n]])?;
    let i00_10 = Inclusion::standard(one, rotated.clone(), vec![vec![1; n]])?;
    let i01_11 = Inclusion::standard(diag, full.clone(), vec![vec![1]; n])?;
    let i10_11 = Inclusion::new(rotated, full.clone(), vec![vec![1]; n], vec![Some(u.clone())])?;
    let trace = TraceVector::new(&full, vec![1.0 / n as f64])?;
    CommutingSquare::new(i00_01, i00_10, i01_11, i10_11, trace)
}

/// Spin-model square of a unitary with all entries of modulus `1/√n`; rejected with the failing
/// conditions otherwise.
pub fn hadamard_square(u: &CMat) -> Result<CommutingSquare> {
    let sq = hadamard_square_unchecked(u)?;
    let report = verify_commuting(&sq, 1e-9);
    if !report.passes() {
        let detail: Vec<String> = report
            .conditions
            .iter()
            .filter(|c| !c.passed)
            .map(|c| format!("{} (residual {:.3e})", c.name, c.residual))
            .collect();
        return Err(Error::Verification(format!("not a commuting square: {}", detail.join("; "))));
    }
    Ok(sq)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fourier_passes_rotation_fails() {
        assert!(hadamard_square(&fourier_matrix(2)).is_ok());
        assert!(hadamard_square(&fourier_matrix(3)).is_ok());
        let err = hadamard_square(&rotation_matrix(std::f64::consts::PI / 6.0)).unwrap_err();
        assert!(err.to_string().contains("E_B01"));
        assert!(hadamard_square(&fourier_matrix(1)).is_ok());
    }
}
