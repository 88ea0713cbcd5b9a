//! Commuting squares of multi-matrix algebras and the double sequences they generate.

mod basic;
mod sequence;

use serde::{Deserialize, Serialize};

use crate::algebra::{expectation_unchecked, AlgebraElement, Inclusion, MultiMatrixAlgebra, TraceVector};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub use basic::{basic_construction, BasicConstructionResult};
pub use sequence::{cut_by_projection, iterate, DoubleSequence};

/// ```text
/// B01 ⊂ B11
///  ∪     ∪
/// B00 ⊂ B10
/// ```
/// with a faithful trace on `B11`.
#[derive(Clone, Debug)]
pub struct CommutingSquare {
    pub b00: MultiMatrixAlgebra,
    pub b01: MultiMatrixAlgebra,
    pub b10: MultiMatrixAlgebra,
    pub b11: MultiMatrixAlgebra,
    pub i00_01: Inclusion,
    pub i00_10: Inclusion,
    pub i01_11: Inclusion,
    pub i10_11: Inclusion,
    pub trace: TraceVector,
}

/// Names of the six equivalent conditions, in report order.
pub const CONDITIONS: [&str; 6] = [
    "E_B01 = E_B00 on B10",
    "E_B01(B10) = B00",
    "E_B10 = E_B00 on B01",
    "E_B10(B01) = B00",
    "E_B01 E_B10 = E_B00",
    "E_B10 E_B01 = E_B00",
];

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConditionResult {
    pub name: String,
    pub residual: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CommutingReport {
    pub conditions: Vec<ConditionResult>,
    /// True when the six verdicts agree (all pass or all fail).
    pub all_equivalent: bool,
    /// Defect of the two composite embeddings `B00 → B11` agreeing.
    pub square_defect: f64,
    pub tolerance: f64,
}

impl CommutingReport {
    pub fn passes(&self) -> bool {
        self.conditions.iter().all(|c| c.passed) && self.square_defect <= self.tolerance
    }

    pub fn max_residual(&self) -> f64 {
        self.conditions.iter().map(|c| c.residual).fold(0.0, f64::max)
    }

    pub fn failing(&self) -> Vec<&str> {
        self.conditions.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect()
    }
}

/// Expectations onto the three proper corners, each returned embedded in `B11`.
struct Projections<'a> {
    sq: &'a CommutingSquare,
    tr01: TraceVector,
}

impl<'a> Projections<'a> {
    fn new(sq: &'a CommutingSquare) -> Self {
        Self { sq, tr01: sq.i01_11.restrict_trace(&sq.trace) }
    }
    fn e01(&self, x: &AlgebraElement) -> AlgebraElement {
        self.sq.i01_11.embed_unchecked(&expectation_unchecked(&self.sq.i01_11, &self.sq.trace, x))
    }
    fn e10(&self, x: &AlgebraElement) -> AlgebraElement {
        self.sq.i10_11.embed_unchecked(&expectation_unchecked(&self.sq.i10_11, &self.sq.trace, x))
    }
    fn e00(&self, x: &AlgebraElement) -> AlgebraElement {
        let y = expectation_unchecked(&self.sq.i01_11, &self.sq.trace, x);
        let z = expectation_unchecked(&self.sq.i00_01, &self.tr01, &y);
        self.sq.i01_11.embed_unchecked(&self.sq.i00_01.embed_unchecked(&z))
    }
}

impl CommutingSquare {
    /// Assemble and check shapes, unitality and that both routes `B00 → B11` agree.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        i00_01: Inclusion,
        i00_10: Inclusion,
        i01_11: Inclusion,
        i10_11: Inclusion,
        trace: TraceVector,
    ) -> Result<Self> {
        if i00_01.small != i00_10.small
            || i00_01.big != i01_11.small
            || i00_10.big != i10_11.small
            || i01_11.big != i10_11.big
        {
            return Err(Error::Shape("inclusions do not fit together as a square".into()));
        }
        trace.validate(&i01_11.big, 1e-9)?;
        for (name, inc) in [("B00 ⊂ B01", &i00_01), ("B00 ⊂ B10", &i00_10), ("B01 ⊂ B11", &i01_11), ("B10 ⊂ B11", &i10_11)] {
            if !inc.is_connected() {
                return Err(Error::Disconnected(format!("Bratteli diagram of {name} is not connected")));
            }
        }
        Ok(Self {
            b00: i00_01.small.clone(),
            b01: i00_01.big.clone(),
            b10: i00_10.big.clone(),
            b11: i01_11.big.clone(),
            i00_01,
            i00_10,
            i01_11,
            i10_11,
            trace,
        })
    }

    pub fn trace_on(&self, corner: Corner) -> TraceVector {
        match corner {
            Corner::B11 => self.trace.clone(),
            Corner::B01 => self.i01_11.restrict_trace(&self.trace),
            Corner::B10 => self.i10_11.restrict_trace(&self.trace),
            Corner::B00 => self.i00_01.restrict_trace(&self.i01_11.restrict_trace(&self.trace)),
        }
    }

    pub fn embed01(&self, x: &AlgebraElement) -> Result<AlgebraElement> {
        self.i01_11.embed(x)
    }

    pub fn embed10(&self, x: &AlgebraElement) -> Result<AlgebraElement> {
        self.i10_11.embed(x)
    }

    pub fn embed00(&self, x: &AlgebraElement) -> Result<AlgebraElement> {
        self.i01_11.embed(&self.i00_01.embed(x)?)
    }

    /// Largest difference between the two composite embeddings of `B00` matrix units.
    pub fn square_defect(&self) -> f64 {
        self.b00
            .basis()
            .map(|(b, i, j)| {
                let x = self.b00.matrix_unit(b, i, j);
                let p = self.i01_11.embed_unchecked(&self.i00_01.embed_unchecked(&x));
                let q = self.i10_11.embed_unchecked(&self.i00_10.embed_unchecked(&x));
                (&p - &q).max_abs()
            })
            .fold(0.0, f64::max)
    }

    /// Index of the small-to-big inclusion `B00 ⊂ B01` for the restricted traces, when Markov.
    pub fn horizontal_index(&self) -> f64 {
        let t00 = self.trace_on(Corner::B00);
        markov_index(&self.i00_01, &t00)
    }

    pub fn vertical_index(&self) -> f64 {
        let t00 = self.trace_on(Corner::B00);
        markov_index(&self.i00_10, &t00)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(SquareDto::from(self)).expect("square serializes")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let dto: SquareDto = serde_json::from_value(v.clone())?;
        dto.try_into()
    }
}

/// Rayleigh quotient of `Λ Λᵀ` at the small trace weights; equals `β²` when the trace is Markov.
fn markov_index(inc: &Inclusion, small_tr: &TraceVector) -> f64 {
    let lam = inc.bratteli_matrix();
    let s = nalgebra::DVector::from_vec(small_tr.weights.clone());
    let v = &lam * (lam.transpose() * &s);
    v.dot(&s) / s.dot(&s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Corner {
    B00,
    B01,
    B10,
    B11,
}

/// Residuals of the six commuting-square conditions, each the largest Frobenius-norm defect
/// over the matrix units of the relevant algebra.
pub fn verify_commuting(sq: &CommutingSquare, tol: f64) -> CommutingReport {
    let p = Projections::new(sq);
    let units = |alg: &MultiMatrixAlgebra| -> Vec<AlgebraElement> {
        alg.basis().map(|(b, i, j)| alg.matrix_unit(b, i, j)).collect()
    };
    let from10: Vec<AlgebraElement> = units(&sq.b10).iter().map(|x| sq.i10_11.embed_unchecked(x)).collect();
    let from01: Vec<AlgebraElement> = units(&sq.b01).iter().map(|x| sq.i01_11.embed_unchecked(x)).collect();
    let all11 = units(&sq.b11);
    let worst = |xs: &[AlgebraElement], f: &dyn Fn(&AlgebraElement) -> f64| xs.iter().map(f).fold(0.0, f64::max);

    let r = [
        worst(&from10, &|x| (&p.e01(x) - &p.e00(x)).norm()),
        worst(&from10, &|x| {
            let y = p.e01(x);
            (&y - &p.e00(&y)).norm()
        }),
        worst(&from01, &|x| (&p.e10(x) - &p.e00(x)).norm()),
        worst(&from01, &|x| {
            let y = p.e10(x);
            (&y - &p.e00(&y)).norm()
        }),
        worst(&all11, &|x| (&p.e01(&p.e10(x)) - &p.e00(x)).norm()),
        worst(&all11, &|x| (&p.e10(&p.e01(x)) - &p.e00(x)).norm()),
    ];
    let conditions: Vec<ConditionResult> = CONDITIONS
        .iter()
        .zip(r)
        .map(|(n, residual)| ConditionResult { name: n.to_string(), residual, passed: residual <= tol })
        .collect();
    let first = conditions[0].passed;
    let all_equivalent = conditions.iter().all(|c| c.passed == first);
    CommutingReport { conditions, all_equivalent, square_defect: sq.square_defect(), tolerance: tol }
}

/// `span B01·B10 = B11`, decided by the rank of the products of matrix units.
pub fn is_symmetric(sq: &CommutingSquare) -> bool {
    symmetry_rank(sq) == sq.b11.dim()
}

pub fn symmetry_rank(sq: &CommutingSquare) -> usize {
    let a: Vec<AlgebraElement> = sq.b01.basis().map(|(b, i, j)| sq.i01_11.embed_unchecked(&sq.b01.matrix_unit(b, i, j))).collect();
    let c: Vec<AlgebraElement> = sq.b10.basis().map(|(b, i, j)| sq.i10_11.embed_unchecked(&sq.b10.matrix_unit(b, i, j))).collect();
    let n = sq.b11.dim();
    let mut rows: Vec<Vec<C64>> = Vec::new();
    if a.len() * c.len() <= 4 * n {
        for x in &a {
            for y in &c {
                rows.push(sq.b11.coords(&(x * y)));
            }
        }
    } else {
        // products of generic elements span the same space as all products of basis elements
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let mut generic = |basis: &[AlgebraElement]| {
            let mut z = basis[0].scale(C64::new(0.0, 0.0));
            for b in basis {
                z.axpy(C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)), b);
            }
            z
        };
        for _ in 0..n + 8 {
            let (x, y) = (generic(&a), generic(&c));
            rows.push(sq.b11.coords(&(&x * &y)));
        }
    }
    let m = CMat::from_fn(rows.len(), n, |i, j| rows[i][j]);
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    linalg::rank(&m, 1e-9 * scale)
}

pub const SQUARE_SCHEMA: &str = "commsq/square/v1";

#[derive(Serialize, Deserialize)]
struct InclusionDto {
    bratteli: Vec<Vec<usize>>,
    /// Per big summand, `null` for the identity or rows of `[re, im]` pairs.
    unitaries: Vec<Option<Vec<Vec<[f64; 2]>>>>,
}

impl InclusionDto {
    fn from(inc: &Inclusion) -> Self {
        Self {
            bratteli: inc.bratteli.clone(),
            unitaries: inc
                .unitaries
                .iter()
                .map(|u| {
                    u.as_ref().map(|u| {
                        (0..u.nrows()).map(|i| (0..u.ncols()).map(|j| [u[(i, j)].re, u[(i, j)].im]).collect()).collect()
                    })
                })
                .collect(),
        }
    }

    fn build(self, small: &MultiMatrixAlgebra, big: &MultiMatrixAlgebra) -> Result<Inclusion> {
        let mut us = Vec::with_capacity(self.unitaries.len());
        for u in self.unitaries {
            us.push(match u {
                None => None,
                Some(rows) => {
                    let n = rows.len();
                    if rows.iter().any(|r| r.len() != n) {
                        return Err(Error::Shape("unitary must be square".into()));
                    }
                    Some(CMat::from_fn(n, n, |i, j| C64::new(rows[i][j][0], rows[i][j][1])))
                }
            });
        }
        Inclusion::new(small.clone(), big.clone(), self.bratteli, us)
    }
}

#[derive(Serialize, Deserialize)]
struct SquareDto {
    schema: String,
    b00: MultiMatrixAlgebra,
    b01: MultiMatrixAlgebra,
    b10: MultiMatrixAlgebra,
    b11: MultiMatrixAlgebra,
    i00_01: InclusionDto,
    i00_10: InclusionDto,
    i01_11: InclusionDto,
    i10_11: InclusionDto,
    trace: Vec<f64>,
}

impl From<&CommutingSquare> for SquareDto {
    fn from(s: &CommutingSquare) -> Self {
        SquareDto {
            schema: SQUARE_SCHEMA.into(),
            b00: s.b00.clone(),
            b01: s.b01.clone(),
            b10: s.b10.clone(),
            b11: s.b11.clone(),
            i00_01: InclusionDto::from(&s.i00_01),
            i00_10: InclusionDto::from(&s.i00_10),
            i01_11: InclusionDto::from(&s.i01_11),
            i10_11: InclusionDto::from(&s.i10_11),
            trace: s.trace.weights.clone(),
        }
    }
}

impl TryFrom<SquareDto> for CommutingSquare {
    type Error = Error;
    fn try_from(d: SquareDto) -> Result<Self> {
        if d.schema != SQUARE_SCHEMA {
            return Err(Error::Invalid(format!("unsupported schema {}", d.schema)));
        }
        let i00_01 = d.i00_01.build(&d.b00, &d.b01)?;
        let i00_10 = d.i00_10.build(&d.b00, &d.b10)?;
        let i01_11 = d.i01_11.build(&d.b01, &d.b11)?;
        let i10_11 = d.i10_11.build(&d.b10, &d.b11)?;
        CommutingSquare::new(i00_01, i00_10, i01_11, i10_11, TraceVector { weights: d.trace })
    }
}
