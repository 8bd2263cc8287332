//! Linear operators on a based algebra, the Nijenhuis and Rota-Baxter
//! residuals, and symbolic validation of parametric operator families.
//!
//! Matrix convention: row `i` holds the coordinates of `N(e_i)`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::Zero;
use rayon::prelude::*;
use thiserror::Error;

use crate::algebra::{label, AlgebraError, BilinearProduct, StructureConstants, Vector};
use crate::scalars::{Assignment, Coefficient, EvalTarget, Polynomial, Scalar, ScalarError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OperatorError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error("family `{family}` uses undeclared parameter `{param}`")]
    UndeclaredParameter { family: String, param: String },
    #[error("family `{family}` requires {constraint}")]
    ConstraintViolated { family: String, constraint: String },
}

/// A square matrix acting on a based vector space.
#[derive(Clone, PartialEq)]
pub struct LinearOperator<S> {
    rows: Vec<Vector<S>>,
}

impl<S: Coefficient> LinearOperator<S> {
    /// Row `i` is the image of `e_i`. Fails if a row leaves the space.
    pub fn new(rows: Vec<Vector<S>>) -> Result<Self, AlgebraError> {
        let n = rows.len();
        for r in &rows {
            if let Some(m) = r.support_max() {
                if m >= n {
                    return Err(AlgebraError::DimensionMismatch {
                        expected: n,
                        found: m + 1,
                    });
                }
            }
        }
        Ok(Self { rows })
    }

    pub fn from_dense(rows: Vec<Vec<S>>) -> Result<Self, AlgebraError> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(AlgebraError::DimensionMismatch {
                expected: n,
                found: bad.len(),
            });
        }
        Self::new(rows.iter().map(|r| Vector::from_dense(r)).collect())
    }

    pub fn zero(n: usize) -> Self {
        Self {
            rows: vec![Vector::zero(); n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: (0..n).map(Vector::basis).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vector<S>] {
        &self.rows
    }

    /// `N(e_i)`.
    pub fn row(&self, i: usize) -> &Vector<S> {
        &self.rows[i]
    }

    /// The coefficient of `e_j` in `N(e_i)`.
    pub fn entry(&self, i: usize, j: usize) -> S {
        self.rows[i].get(j)
    }

    pub fn to_dense(&self) -> Vec<Vec<S>> {
        self.rows.iter().map(|r| r.to_dense(self.dim())).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(Vector::is_zero)
    }

    pub fn apply(&self, x: &Vector<S>) -> Vector<S> {
        let mut out = Vector::zero();
        for (i, c) in x.coords() {
            out.add_scaled(c, &self.rows[i]);
        }
        out
    }

    /// `self ∘ other`, i.e. `x ↦ self(other(x))`.
    pub fn compose(&self, other: &LinearOperator<S>) -> LinearOperator<S> {
        LinearOperator {
            rows: other.rows.iter().map(|r| self.apply(r)).collect(),
        }
    }

    pub fn scale(&self, c: &S) -> LinearOperator<S> {
        LinearOperator {
            rows: self.rows.iter().map(|r| r.scale(c)).collect(),
        }
    }

    pub fn add(&self, other: &LinearOperator<S>) -> LinearOperator<S> {
        LinearOperator {
            rows: self.rows.iter().zip(&other.rows).map(|(a, b)| a.add(b)).collect(),
        }
    }

    pub fn map<T: Coefficient, E>(&self, f: impl Fn(&S) -> Result<T, E>) -> Result<LinearOperator<T>, E> {
        Ok(LinearOperator {
            rows: self.rows.iter().map(|r| r.map(&f)).collect::<Result<_, E>>()?,
        })
    }

    fn check_dim(&self, n: usize) -> Result<(), AlgebraError> {
        if self.dim() == n {
            Ok(())
        } else {
            Err(AlgebraError::DimensionMismatch {
                expected: n,
                found: self.dim(),
            })
        }
    }
}

impl<S: Coefficient> fmt::Debug for LinearOperator<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, row) in self.to_dense().iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
            write!(f, "[{}]", cells.join(", "))?;
        }
        write!(f, "]")
    }
}

/// `N∘N` under the row-image convention.
pub fn operator_square<S: Coefficient>(n: &LinearOperator<S>) -> LinearOperator<S> {
    n.compose(n)
}

/// `N(e_i)·N(e_j) - N(N(e_i)·e_j + e_i·N(e_j) - N(e_i·e_j))`.
pub fn nijenhuis_residual<S: Coefficient>(
    a: &impl BilinearProduct<S>,
    n: &LinearOperator<S>,
    i: usize,
    j: usize,
) -> Result<Vector<S>, AlgebraError> {
    n.check_dim(a.dim())?;
    a.check_index(i)?;
    a.check_index(j)?;
    let (ei, ej) = (Vector::basis(i), Vector::basis(j));
    let (ni, nj) = (n.row(i), n.row(j));
    let lhs = a.product(ni, nj)?;
    let inner = a
        .product(ni, &ej)?
        .add(&a.product(&ei, nj)?)
        .sub(&n.apply(&a.product_basis(i, j)));
    Ok(lhs.sub(&n.apply(&inner)))
}

/// The same residual, expanded in structure constants `C_kl^m` and matrix
/// entries `n_ij`:
///
/// ```text
/// Σ_kl C_kl^m n_ik n_jl − Σ_kl C_kj^l n_ik n_lm − Σ_lk C_il^k n_jl n_km + Σ_tl C_ij^t n_tl n_lm
/// ```
///
/// Kept independent of [`nijenhuis_residual`] as a cross-check.
pub fn nijenhuis_residual_constants<S: Coefficient>(
    a: &StructureConstants<S>,
    n: &LinearOperator<S>,
    i: usize,
    j: usize,
) -> Result<Vector<S>, AlgebraError> {
    let d = a.dim();
    n.check_dim(d)?;
    a.check_index(i)?;
    a.check_index(j)?;
    let c = |x: usize, y: usize, z: usize| a.coefficient(x, y, z);
    let m_ = n.to_dense();
    let nn = |x: usize, y: usize| m_[x][y].clone();
    let mut out = Vector::zero();
    for m in 0..d {
        let mut acc = S::zero();
        for k in 0..d {
            for l in 0..d {
                acc = acc + c(k, l, m) * nn(i, k) * nn(j, l);
                acc = acc - c(k, j, l) * nn(i, k) * nn(l, m);
                acc = acc - c(i, l, k) * nn(j, l) * nn(k, m);
                // k plays the role of the summation index t here
                acc = acc + c(i, j, k) * nn(k, l) * nn(l, m);
            }
        }
        out.add_at(m, acc);
    }
    Ok(out)
}

/// `R(e_i)∘R(e_j) - R(R(e_i)∘e_j + e_i∘R(e_j) + w e_i∘e_j)` for the product
/// `∘` of `m`, which may be a pre-Lie product or a Lie bracket.
pub fn rota_baxter_residual<S: Coefficient>(
    m: &impl BilinearProduct<S>,
    r: &LinearOperator<S>,
    weight: &S,
    i: usize,
    j: usize,
) -> Result<Vector<S>, AlgebraError> {
    r.check_dim(m.dim())?;
    m.check_index(i)?;
    m.check_index(j)?;
    let (ei, ej) = (Vector::basis(i), Vector::basis(j));
    let (ri, rj) = (r.row(i), r.row(j));
    let lhs = m.product(ri, rj)?;
    let inner = m
        .product(ri, &ej)?
        .add(&m.product(&ei, rj)?)
        .add(&m.product_basis(i, j).scale(weight));
    Ok(lhs.sub(&r.apply(&inner)))
}

/// Which operator identity a family is claimed to satisfy.
#[derive(Debug, Clone, PartialEq)]
pub enum OperatorKind {
    Nijenhuis,
    RotaBaxter(Scalar),
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OperatorKind::Nijenhuis => write!(f, "nijenhuis"),
            OperatorKind::RotaBaxter(w) => write!(f, "rota-baxter(weight {w})"),
        }
    }
}

/// An operator matrix over named parameters.
///
/// `constraints` are required nonzero and are therefore units in the
/// validation field; `side_conditions` are required zero and are used to
/// reduce residuals.
#[derive(Clone, PartialEq)]
pub struct ParametricFamily {
    pub id: String,
    pub algebra: String,
    pub params: Vec<String>,
    pub matrix: LinearOperator<Scalar>,
    pub constraints: Vec<Scalar>,
    pub side_conditions: Vec<Scalar>,
    /// Free-form annotations, e.g. the source of a correction.
    pub notes: Vec<String>,
}

impl fmt::Debug for ParametricFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} on {}: {:?}", self.id, self.algebra, self.matrix)
    }
}

impl ParametricFamily {
    pub fn new(id: &str, algebra: &str, params: &[&str], matrix: LinearOperator<Scalar>) -> Self {
        Self {
            id: id.to_string(),
            algebra: algebra.to_string(),
            params: params.iter().map(|p| p.to_string()).collect(),
            matrix,
            constraints: Vec::new(),
            side_conditions: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Every parameter mentioned by the matrix or its conditions.
    pub fn used_parameters(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for row in self.matrix.rows() {
            for (_, c) in row.coords() {
                out.extend(c.parameters());
            }
        }
        for c in self.constraints.iter().chain(&self.side_conditions) {
            out.extend(c.parameters());
        }
        out
    }

    /// Fails on the first parameter declared neither by the family nor by
    /// the algebra it lives on.
    pub fn check_declared(&self, algebra_params: &[String]) -> Result<(), OperatorError> {
        for p in self.used_parameters() {
            if !self.params.contains(&p) && !algebra_params.contains(&p) {
                return Err(OperatorError::UndeclaredParameter {
                    family: self.id.clone(),
                    param: p,
                });
            }
        }
        Ok(())
    }

    /// Replace some parameters by scalars; constraints and side conditions
    /// are carried along, substituted.
    pub fn specialize_partial(&self, values: &BTreeMap<String, Scalar>) -> Result<ParametricFamily, OperatorError> {
        let sub = |c: &Scalar| c.substitute_partial(values);
        Ok(ParametricFamily {
            id: self.id.clone(),
            algebra: self.algebra.clone(),
            params: self.params.iter().filter(|p| !values.contains_key(*p)).cloned().collect(),
            matrix: self.matrix.map(sub)?,
            constraints: self.constraints.iter().map(sub).collect::<Result<_, _>>()?,
            side_conditions: self.side_conditions.iter().map(sub).collect::<Result<_, _>>()?,
            notes: self.notes.clone(),
        })
    }

    /// Matrix rows printed as `N e1 = …` lines.
    pub fn row_lines(&self, names: &[String], symbol: &str) -> Vec<String> {
        self.matrix
            .rows()
            .iter()
            .enumerate()
            .map(|(i, r)| format!("{symbol} {} = {}", label(names, i), r.display(names)))
            .collect()
    }
}

/// Evaluate a family at a point, checking its constraints and side
/// conditions there.
pub fn specialize_family<T: EvalTarget>(
    f: &ParametricFamily,
    assignment: &Assignment<T>,
) -> Result<LinearOperator<T>, OperatorError> {
    for c in &f.constraints {
        if c.eval(assignment)?.is_zero() {
            return Err(OperatorError::ConstraintViolated {
                family: f.id.clone(),
                constraint: format!("{c} != 0"),
            });
        }
    }
    for c in &f.side_conditions {
        if !c.eval(assignment)?.is_zero() {
            return Err(OperatorError::ConstraintViolated {
                family: f.id.clone(),
                constraint: format!("{c} = 0"),
            });
        }
    }
    Ok(f.matrix.map(|c| c.eval(assignment))?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Verdict {
    Pass,
    Fail,
}

/// Outcome of a symbolic family validation.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyReport {
    pub family: String,
    pub algebra: String,
    pub kind: String,
    pub verdict: Verdict,
    /// First nonzero residual: basis pair (0-based) and printed value.
    pub witness: Option<((usize, usize), String)>,
}

impl FamilyReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// True if `x` vanishes once the side conditions are imposed.
///
/// Zero remainder modulo the side-condition numerators certifies vanishing;
/// without side conditions this is the exact zero test.
fn vanishes(x: &Scalar, side: &[Polynomial]) -> bool {
    x.is_zero() || (!side.is_empty() && x.numerator().reduce_modulo(side).is_zero())
}

/// Check the claimed identity for every basis pair in the field where the
/// family's constraints (and the algebra's) are units.
pub fn validate_family(
    a: &StructureConstants<Scalar>,
    f: &ParametricFamily,
    kind: &OperatorKind,
) -> Result<FamilyReport, OperatorError> {
    f.check_declared(&a.params)?;
    f.matrix.check_dim(a.dim())?;
    let side: Vec<Polynomial> = f.side_conditions.iter().map(|s| s.numerator().clone()).collect();
    let mut witness = None;
    'pairs: for i in 0..a.dim() {
        for j in 0..a.dim() {
            let r = match kind {
                OperatorKind::Nijenhuis => nijenhuis_residual(a, &f.matrix, i, j)?,
                OperatorKind::RotaBaxter(w) => rota_baxter_residual(a, &f.matrix, w, i, j)?,
            };
            let rest = Vector::from_coords(r.coords().filter(|(_, c)| !vanishes(c, &side)).map(|(k, c)| (k, c.clone())));
            if !rest.is_zero() {
                witness = Some(((i, j), rest.display(a.basis_names())));
                break 'pairs;
            }
        }
    }
    Ok(FamilyReport {
        family: f.id.clone(),
        algebra: a.name.clone(),
        kind: kind.to_string(),
        verdict: if witness.is_none() { Verdict::Pass } else { Verdict::Fail },
        witness,
    })
}

/// Validate many families in parallel; reports are sorted by family id.
pub fn validate_families(
    a: &StructureConstants<Scalar>,
    families: &[ParametricFamily],
    kind: &OperatorKind,
) -> Result<Vec<FamilyReport>, OperatorError> {
    let mut out: Vec<FamilyReport> = families
        .par_iter()
        .map(|f| validate_family(a, f, kind))
        .collect::<Result<_, _>>()?;
    out.sort_by(|x, y| x.family.cmp(&y.family));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::GaussianRational as Q;

    fn q(n: i64) -> Q {
        Q::from(n)
    }

    fn v(coords: &[(usize, i64)]) -> Vector<Q> {
        Vector::from_coords(coords.iter().map(|&(i, c)| (i, q(c))))
    }

    fn a5() -> StructureConstants<Q> {
        let mut a = StructureConstants::new("A5", 2);
        a.set_product(0, 0, v(&[(1, 1)])).unwrap();
        a
    }

    fn g1() -> StructureConstants<Q> {
        let mut g = StructureConstants::new("g1", 2);
        g.set_product(0, 1, v(&[(0, 1)])).unwrap();
        g.set_product(1, 0, v(&[(0, -1)])).unwrap();
        g
    }

    fn dense(rows: &[&[i64]]) -> LinearOperator<Q> {
        LinearOperator::from_dense(rows.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect()).unwrap()
    }

    #[test]
    fn swap_operator_on_a5_is_not_nijenhuis() {
        let n = dense(&[&[0, 1], &[1, 0]]);
        assert_eq!(nijenhuis_residual(&a5(), &n, 0, 0).unwrap(), v(&[(1, 1)]));
        assert_eq!(nijenhuis_residual_constants(&a5(), &n, 0, 0).unwrap(), v(&[(1, 1)]));
    }

    #[test]
    fn identity_and_zero_are_nijenhuis() {
        let a = a5();
        for n in [LinearOperator::identity(2), LinearOperator::zero(2)] {
            for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                assert!(nijenhuis_residual(&a, &n, i, j).unwrap().is_zero());
                assert!(nijenhuis_residual_constants(&a, &n, i, j).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn identity_on_g1_is_not_rota_baxter() {
        let r = LinearOperator::identity(2);
        assert_eq!(rota_baxter_residual(&g1(), &r, &q(0), 0, 1).unwrap(), v(&[(0, -1)]));
        let r = dense(&[&[0, 0], &[3, 0]]);
        for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            assert!(rota_baxter_residual(&g1(), &r, &q(0), i, j).unwrap().is_zero());
        }
    }

    #[test]
    fn square_follows_row_convention() {
        let n = dense(&[&[1, 1], &[0, 1]]);
        assert_eq!(operator_square(&n), dense(&[&[1, 2], &[0, 1]]));
        let nil = dense(&[&[0, 0], &[1, 0]]);
        assert!(operator_square(&nil).is_zero());
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let n = LinearOperator::<Q>::identity(3);
        assert!(matches!(
            nijenhuis_residual(&a5(), &n, 0, 0),
            Err(AlgebraError::DimensionMismatch { .. })
        ));
    }
}
