use crate::algebra::{AlgebraElement, Inclusion, MultiMatrixAlgebra, TraceVector};
use crate::error::{Error, Result};
use crate::linalg::{c, CMat};

/// `B ⊂ C = ⟨B, e_A⟩` for an inclusion `A ⊂ B`, with the Jones projection and the natural trace.
#[derive(Clone, Debug)]
pub struct BasicConstructionResult {
    pub algebra: MultiMatrixAlgebra,
    pub inclusion: Inclusion,
    pub jones: AlgebraElement,
    pub trace: TraceVector,
}

/// Basic construction of `A ⊂ B` with respect to the trace `tr` on `B`.
///
/// `C` has one summand per summand `i` of `A`, of size `Σ_j Λ_ij b_j`; the inclusion `B ⊂ C` has
/// Bratteli matrix `Λᵀ`. In summand `i`, `e_A = Σ_s |ξ_s⟩⟨ξ_s|` where `ξ_s` runs over the
/// backtracking paths `i → j → i` weighted by `√(t_j / s_i)`.
pub fn basic_construction(incl: &Inclusion, tr: &TraceVector) -> Result<BasicConstructionResult> {
    tr.validate(&incl.big, 1e-9)?;
    let (na, nb) = (incl.small.n_summands(), incl.big.n_summands());
    let small_tr = incl.restrict_trace(tr);
    let lam = &incl.bratteli;
    let bsizes = incl.big.sizes();
    let csizes: Vec<usize> = (0..na).map(|i| (0..nb).map(|j| lam[i][j] * bsizes[j]).sum()).collect();
    if csizes.iter().any(|&n| n == 0) {
        return Err(Error::Invalid("a summand of the small algebra does not embed".into()));
    }
    let algebra = MultiMatrixAlgebra::new(incl.small.labels().to_vec(), csizes.clone())?;
    let transpose: Vec<Vec<usize>> = (0..nb).map(|j| (0..na).map(|i| lam[i][j]).collect()).collect();
    let unitaries: Vec<Option<CMat>> = (0..na)
        .map(|i| {
            if incl.unitaries.iter().all(Option::is_none) {
                return None;
            }
            let mut v = CMat::zeros(csizes[i], csizes[i]);
            let mut off = 0;
            for j in 0..nb {
                for _ in 0..lam[i][j] {
                    let n = bsizes[j];
                    match &incl.unitaries[j] {
                        Some(u) => v.view_mut((off, off), (n, n)).copy_from(&u.adjoint()),
                        None => v.view_mut((off, off), (n, n)).fill_with_identity(),
                    }
                    off += n;
                }
            }
            Some(v)
        })
        .collect();
    let inclusion = Inclusion::new(incl.big.clone(), algebra.clone(), transpose, unitaries)?;

    let mut jones = AlgebraElement::zero(&algebra);
    for i in 0..na {
        let a = incl.small.sizes()[i];
        let mut cups = CMat::zeros(csizes[i], a);
        for slot in inclusion.slots(i) {
            let (j, m) = (slot.small, slot.copy);
            let kappa = (tr.weights[j] / small_tr.weights[i]).sqrt();
            let inner = incl
                .slots(j)
                .iter()
                .find(|s| s.small == i && s.copy == m)
                .expect("copies are symmetric in the Bratteli matrix");
            for s in 0..a {
                cups[(slot.offset + inner.offset + s, s)] = c(kappa);
            }
        }
        jones.blocks[i] = &cups * cups.adjoint();
    }
    let norm: f64 = (0..na).map(|i| csizes[i] as f64 * small_tr.weights[i]).sum();
    let trace = TraceVector { weights: small_tr.weights.iter().map(|s| s / norm).collect() };
    Ok(BasicConstructionResult { algebra, inclusion, jones, trace })
}
