//! The coadjoint representation, the double `g ⋉ g*`, and the classical
//! Yang-Baxter equation for tensors over a Lie algebra.
//!
//! In the double of an `n`-dimensional Lie algebra the dual vector `e_a*` has
//! index `n + a`.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;

use crate::algebra::{label, linear_combination, AlgebraError, BilinearProduct, LieAlgebra, StructureConstants, Vector};
use crate::operators::LinearOperator;
use crate::scalars::Coefficient;

/// `ad*_{e_k}` for every basis vector `e_k`, as operators on the dual space.
///
/// Row `a` of the `k`-th operator holds the coordinates of `ad*_{e_k}(e_a*)`,
/// which are `-[e_k, e_b]_a` by `⟨ad*_x ξ, y⟩ = -⟨ξ, [x, y]⟩`.
pub fn coadjoint<S: Coefficient>(l: &LieAlgebra<S>) -> Vec<LinearOperator<S>> {
    let n = l.dim();
    (0..n)
        .map(|k| {
            let rows = (0..n)
                .map(|a| Vector::from_coords((0..n).map(|b| (b, -l.product_basis(k, b).get(a)))))
                .collect();
            LinearOperator::new(rows).expect("square by construction")
        })
        .collect()
}

/// `g ⋉_{ad*} g*` together with its base.
#[derive(Clone, PartialEq)]
pub struct SemidirectDouble<S> {
    pub base: LieAlgebra<S>,
    pub total: LieAlgebra<S>,
}

impl<S: Coefficient> SemidirectDouble<S> {
    /// Dimension of the base.
    pub fn n(&self) -> usize {
        self.base.dim()
    }

    pub fn basis_names(&self) -> &[String] {
        self.total.basis_names()
    }

    /// Index of `e_a*`.
    pub fn dual(&self, a: usize) -> usize {
        self.n() + a
    }
}

impl<S: Coefficient> fmt::Debug for SemidirectDouble<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.total)
    }
}

/// Brackets `[x1 + ξ1, x2 + ξ2] = [x1, x2] + ad*_{x1} ξ2 - ad*_{x2} ξ1`;
/// Jacobi is re-verified on the result.
pub fn semidirect_double<S: Coefficient>(l: &LieAlgebra<S>) -> Result<SemidirectDouble<S>, AlgebraError> {
    let n = l.dim();
    let base_names = l.basis_names().to_vec();
    let names: Vec<String> = base_names
        .iter()
        .cloned()
        .chain(base_names.iter().map(|s| format!("{s}*")))
        .collect();
    let mut c = StructureConstants::new(&format!("double({})", l.name()), 2 * n).with_basis_names(names)?;
    c.params = l.constants().params.clone();
    c.constraints = l.constants().constraints.clone();
    let ad = coadjoint(l);
    for i in 0..n {
        for j in 0..n {
            let b = l.product_basis(i, j);
            if !b.is_zero() {
                c.set_product(i, j, b)?;
            }
            let act = Vector::from_coords(ad[i].row(j).coords().map(|(b, v)| (n + b, v.clone())));
            if !act.is_zero() {
                c.set_product(i, n + j, act.clone())?;
                c.set_product(n + j, i, act.neg())?;
            }
        }
    }
    let total = LieAlgebra::new(c)?;
    Ok(SemidirectDouble { base: l.clone(), total })
}

fn tensor_label(names: &[String], idx: &[usize]) -> String {
    idx.iter()
        .map(|&i| label(names, i))
        .collect::<Vec<_>>()
        .join(" (x) ")
}

/// A sparse tensor of fixed order `K` over a based space.
#[derive(Clone, PartialEq)]
pub struct Tensor<S, const K: usize> {
    terms: BTreeMap<[usize; K], S>,
}

/// `Σ c a ⊗ b`.
pub type Tensor2<S> = Tensor<S, 2>;
/// `Σ c a ⊗ b ⊗ c`.
pub type Tensor3<S> = Tensor<S, 3>;

impl<S: Coefficient, const K: usize> Tensor<S, K> {
    pub fn zero() -> Self {
        Self { terms: BTreeMap::new() }
    }

    pub fn term(idx: [usize; K], c: S) -> Self {
        let mut t = Self::zero();
        t.add_at(idx, c);
        t
    }

    pub fn from_terms(terms: impl IntoIterator<Item = ([usize; K], S)>) -> Self {
        let mut t = Self::zero();
        for (idx, c) in terms {
            t.add_at(idx, c);
        }
        t
    }

    pub fn get(&self, idx: &[usize; K]) -> S {
        self.terms.get(idx).cloned().unwrap_or_else(S::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[usize; K], &S)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn support_max(&self) -> Option<usize> {
        self.terms.keys().flat_map(|k| k.iter().copied()).max()
    }

    pub fn add_at(&mut self, idx: [usize; K], c: S) {
        if c.is_zero() {
            return;
        }
        let sum = match self.terms.remove(&idx) {
            Some(old) => old + c,
            None => c,
        };
        if !sum.is_zero() {
            self.terms.insert(idx, sum);
        }
    }

    pub fn add_scaled(&mut self, c: &S, other: &Self) {
        for (idx, d) in &other.terms {
            self.add_at(*idx, c.clone() * d.clone());
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_scaled(&S::one(), other);
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_scaled(&-S::one(), other);
        out
    }

    pub fn scale(&self, c: &S) -> Self {
        let mut out = Self::zero();
        out.add_scaled(c, self);
        out
    }

    pub fn map<T: Coefficient, E>(&self, f: impl Fn(&S) -> Result<T, E>) -> Result<Tensor<T, K>, E> {
        let mut out = Tensor::zero();
        for (idx, c) in &self.terms {
            out.add_at(*idx, f(c)?);
        }
        Ok(out)
    }

    /// Printed as `c a (x) b + …` with the given basis labels.
    pub fn display(&self, names: &[String]) -> String {
        linear_combination(
            self.terms
                .iter()
                .map(|(idx, c)| (c.to_string(), tensor_label(names, idx))),
        )
    }
}

impl<S: Coefficient> Tensor2<S> {
    /// `a ⊗ b`.
    pub fn outer(a: &Vector<S>, b: &Vector<S>) -> Self {
        let mut out = Self::zero();
        for (i, x) in a.coords() {
            for (j, y) in b.coords() {
                out.add_at([i, j], x.clone() * y.clone());
            }
        }
        out
    }

    /// `T²¹`, the two tensor slots swapped.
    pub fn flip(&self) -> Self {
        Self::from_terms(self.terms.iter().map(|([a, b], c)| ([*b, *a], c.clone())))
    }
}

impl<S: Coefficient, const K: usize> fmt::Debug for Tensor<S, K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = match self.support_max() {
            Some(m) => (0..=m).map(|i| format!("e{}", i + 1)).collect(),
            None => Vec::new(),
        };
        write!(f, "{}", self.display(&names))
    }
}

/// `Σ_i R(e_i) ⊗ e_i*` in the basis of the double.
pub fn operator_to_tensor<S: Coefficient>(
    d: &SemidirectDouble<S>,
    r: &LinearOperator<S>,
) -> Result<Tensor2<S>, AlgebraError> {
    let n = d.n();
    if r.dim() != n {
        return Err(AlgebraError::DimensionMismatch {
            expected: n,
            found: r.dim(),
        });
    }
    let mut out = Tensor2::zero();
    for i in 0..n {
        for (j, c) in r.row(i).coords() {
            out.add_at([j, n + i], c.clone());
        }
    }
    Ok(out)
}

/// `T - T²¹`.
pub fn skewize<S: Coefficient>(t: &Tensor2<S>) -> Tensor2<S> {
    t.sub(&t.flip())
}

/// `[r12, r13] + [r12, r23] + [r13, r23]` for `r = Σ a_i ⊗ b_i`, expanded as
/// `Σ_ij [a_i, a_j] ⊗ b_i ⊗ b_j + a_i ⊗ [b_i, a_j] ⊗ b_j + a_i ⊗ a_j ⊗ [b_i, b_j]`.
pub fn cybe_residual<S: Coefficient>(
    l: &(impl BilinearProduct<S> + Sync),
    r: &Tensor2<S>,
) -> Result<Tensor3<S>, AlgebraError> {
    if let Some(m) = r.support_max() {
        if m >= l.dim() {
            return Err(AlgebraError::DimensionMismatch {
                expected: l.dim(),
                found: m + 1,
            });
        }
    }
    let terms: Vec<([usize; 2], S)> = r.terms().map(|(k, c)| (*k, c.clone())).collect();
    let partial: Vec<Tensor3<S>> = terms
        .par_iter()
        .map(|([a1, b1], c1)| {
            let mut out = Tensor3::zero();
            for ([a2, b2], c2) in &terms {
                let c = c1.clone() * c2.clone();
                for (t, v) in l.product_basis(*a1, *a2).coords() {
                    out.add_at([t, *b1, *b2], c.clone() * v.clone());
                }
                for (t, v) in l.product_basis(*b1, *a2).coords() {
                    out.add_at([*a1, t, *b2], c.clone() * v.clone());
                }
                for (t, v) in l.product_basis(*b1, *b2).coords() {
                    out.add_at([*a1, *a2, t], c.clone() * v.clone());
                }
            }
            out
        })
        .collect();
    Ok(partial.iter().fold(Tensor3::zero(), |acc, t| acc.add(t)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::GaussianRational as Q;

    fn g1() -> LieAlgebra<Q> {
        let mut c = StructureConstants::new("g1", 2);
        c.set_product(0, 1, Vector::basis(0)).unwrap();
        c.set_product(1, 0, Vector::basis(0).neg()).unwrap();
        LieAlgebra::new(c).unwrap()
    }

    #[test]
    fn double_of_g1_has_three_brackets() {
        let d = semidirect_double(&g1()).unwrap();
        let lines = d.total.constants().product_lines(crate::algebra::ProductNotation::Bracket);
        assert_eq!(lines, ["[e1, e2] = e1", "[e1, e1*] = -e2*", "[e2, e1*] = e1*"]);
    }

    #[test]
    fn coadjoint_pairing_on_g1() {
        let ad = coadjoint(&g1());
        assert_eq!(ad[0].row(0), &Vector::basis(1).neg());
        assert_eq!(ad[1].row(0), &Vector::basis(0));
    }

    #[test]
    fn skewize_examples() {
        let t: Tensor2<Q> = Tensor2::term([0, 3], Q::from(1));
        assert_eq!(skewize(&t), Tensor2::from_terms([([0, 3], Q::from(1)), ([3, 0], Q::from(-1))]));
        assert!(skewize(&Tensor2::term([0, 0], Q::from(1))).is_zero());
        let s: Tensor2<Q> = Tensor2::from_terms([([0, 1], Q::from(1)), ([1, 0], Q::from(-1))]);
        assert_eq!(skewize(&s), s.scale(&Q::from(2)));
    }

    #[test]
    fn operator_tensor_of_identity() {
        let d = semidirect_double(&g1()).unwrap();
        let t = operator_to_tensor(&d, &LinearOperator::identity(2)).unwrap();
        assert_eq!(t.display(d.basis_names()), "e1 (x) e1* + e2 (x) e2*");
    }

    #[test]
    fn cybe_on_double_of_g1() {
        let d = semidirect_double(&g1()).unwrap();
        let r1 = Tensor2::from_terms([([0, 3], Q::from(1)), ([3, 0], Q::from(-1))]);
        assert!(cybe_residual(&d.total, &r1).unwrap().is_zero());
        assert!(cybe_residual(&d.total, &Tensor2::zero()).unwrap().is_zero());

        let r = Tensor2::from_terms([([0, 2], Q::from(1)), ([2, 0], Q::from(-1))]);
        let res = cybe_residual(&d.total, &r).unwrap();
        assert_eq!(
            res.display(d.basis_names()),
            "-e1 (x) e1* (x) e2* + e1 (x) e2* (x) e1* + e1* (x) e1 (x) e2* \
             - e1* (x) e2* (x) e1 - e2* (x) e1 (x) e1* + e2* (x) e1* (x) e1"
        );
    }

    #[test]
    fn dimension_mismatch() {
        let d = semidirect_double(&g1()).unwrap();
        let err = operator_to_tensor(&d, &LinearOperator::<Q>::identity(3)).unwrap_err();
        assert!(matches!(err, AlgebraError::DimensionMismatch { expected: 2, found: 3 }));
        let t = Tensor2::term([0, 7], Q::from(1));
        assert!(cybe_residual(&d.total, &t).is_err());
    }
}
