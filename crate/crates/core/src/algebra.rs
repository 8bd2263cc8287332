//! Structure-constant algebras and their identity checks.
//!
//! Indices are 0-based in the API and 1-based in every printed form.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::scalars::Coefficient;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("`{algebra}` is not pre-Lie: residual at {witness}")]
    NotPreLie { algebra: String, witness: String },
    #[error("`{algebra}` is not a Lie algebra: {witness}")]
    NotLie { algebra: String, witness: String },
    #[error("basis index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
}

/// A sparse coordinate vector. No zero coordinates are stored.
#[derive(Clone, PartialEq)]
pub struct Vector<S> {
    coords: BTreeMap<usize, S>,
}

impl<S: Coefficient> Vector<S> {
    pub fn zero() -> Self {
        Self {
            coords: BTreeMap::new(),
        }
    }

    pub fn basis(i: usize) -> Self {
        Self::term(i, S::one())
    }

    pub fn term(i: usize, c: S) -> Self {
        let mut v = Self::zero();
        v.add_at(i, c);
        v
    }

    pub fn from_coords(coords: impl IntoIterator<Item = (usize, S)>) -> Self {
        let mut v = Self::zero();
        for (i, c) in coords {
            v.add_at(i, c);
        }
        v
    }

    /// Dense coordinates `0..dim`.
    pub fn from_dense(coords: &[S]) -> Self {
        Self::from_coords(coords.iter().cloned().enumerate())
    }

    pub fn to_dense(&self, dim: usize) -> Vec<S> {
        (0..dim).map(|i| self.get(i)).collect()
    }

    pub fn get(&self, i: usize) -> S {
        self.coords.get(&i).cloned().unwrap_or_else(S::zero)
    }

    pub fn coords(&self) -> impl Iterator<Item = (usize, &S)> {
        self.coords.iter().map(|(i, c)| (*i, c))
    }

    pub fn support_max(&self) -> Option<usize> {
        self.coords.keys().next_back().copied()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn add_at(&mut self, i: usize, c: S) {
        if c.is_zero() {
            return;
        }
        let sum = match self.coords.remove(&i) {
            Some(old) => old + c,
            None => c,
        };
        if !sum.is_zero() {
            self.coords.insert(i, sum);
        }
    }

    pub fn add_scaled(&mut self, c: &S, other: &Vector<S>) {
        if c.is_zero() {
            return;
        }
        for (i, d) in &other.coords {
            self.add_at(*i, c.clone() * d.clone());
        }
    }

    pub fn add(&self, other: &Vector<S>) -> Vector<S> {
        let mut out = self.clone();
        out.add_scaled(&S::one(), other);
        out
    }

    pub fn sub(&self, other: &Vector<S>) -> Vector<S> {
        let mut out = self.clone();
        out.add_scaled(&-S::one(), other);
        out
    }

    pub fn scale(&self, c: &S) -> Vector<S> {
        let mut out = Vector::zero();
        out.add_scaled(c, self);
        out
    }

    pub fn neg(&self) -> Vector<S> {
        self.scale(&-S::one())
    }

    pub fn map<T: Coefficient, E>(&self, f: impl Fn(&S) -> Result<T, E>) -> Result<Vector<T>, E> {
        let mut out = Vector::zero();
        for (i, c) in &self.coords {
            out.add_at(*i, f(c)?);
        }
        Ok(out)
    }

    /// Printed with the given basis labels, e.g. `e1 - 2 e2`.
    pub fn display(&self, names: &[String]) -> String {
        linear_combination(
            self.coords
                .iter()
                .map(|(i, c)| (c.to_string(), label(names, *i))),
        )
    }
}

impl<S: Coefficient> fmt::Debug for Vector<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = match self.support_max() {
            Some(m) => (0..=m).map(|i| format!("e{}", i + 1)).collect(),
            None => Vec::new(),
        };
        write!(f, "{}", self.display(&names))
    }
}

pub(crate) fn label(names: &[String], i: usize) -> String {
    names
        .get(i)
        .cloned()
        .unwrap_or_else(|| format!("e{}", i + 1))
}

fn wrapped_in_parens(s: &str) -> bool {
    if !s.starts_with('(') || !s.ends_with(')') {
        return false;
    }
    let mut depth = 0i32;
    for (k, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 && k + 1 < s.len() {
                    return false;
                }
            }
            _ => {}
        }
    }
    true
}

/// Join `(coefficient, label)` pairs as `c1 x1 - c2 x2 + …`, parenthesizing
/// compound coefficients. The output is re-parseable by the scalar syntax.
pub(crate) fn linear_combination(items: impl IntoIterator<Item = (String, String)>) -> String {
    let mut out = String::new();
    for (k, (coef, label)) in items.into_iter().enumerate() {
        let compound = !wrapped_in_parens(&coef) && (coef.contains(" + ") || coef.contains(" - "));
        let (negative, magnitude) = match coef.strip_prefix('-') {
            Some(rest) if !compound => (true, rest.to_string()),
            _ if compound => (false, format!("({coef})")),
            _ => (false, coef.clone()),
        };
        match (k, negative) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        if magnitude != "1" {
            out.push_str(&magnitude);
            if !label.is_empty() {
                out.push(' ');
            }
        }
        out.push_str(&label);
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

/// Anything with a bilinear product on a finite basis.
pub trait BilinearProduct<S: Coefficient> {
    fn dim(&self) -> usize;

    /// `e_i ∘ e_j`.
    fn product_basis(&self, i: usize, j: usize) -> Vector<S>;

    fn basis_names(&self) -> &[String];

    fn product(&self, x: &Vector<S>, y: &Vector<S>) -> Result<Vector<S>, AlgebraError> {
        self.check_vector(x)?;
        self.check_vector(y)?;
        let mut out = Vector::zero();
        for (i, a) in x.coords() {
            for (j, b) in y.coords() {
                out.add_scaled(&(a.clone() * b.clone()), &self.product_basis(i, j));
            }
        }
        Ok(out)
    }

    fn check_vector(&self, x: &Vector<S>) -> Result<(), AlgebraError> {
        match x.support_max() {
            Some(m) if m >= self.dim() => Err(AlgebraError::DimensionMismatch {
                expected: self.dim(),
                found: m + 1,
            }),
            _ => Ok(()),
        }
    }

    fn check_index(&self, i: usize) -> Result<(), AlgebraError> {
        if i < self.dim() {
            Ok(())
        } else {
            Err(AlgebraError::IndexOutOfRange {
                index: i + 1,
                dim: self.dim(),
            })
        }
    }
}

/// Basis triples or pairs at which an identity fails, with the residual.
#[derive(Clone)]
pub struct IdentityCheck<K, S> {
    pub witnesses: Vec<(K, Vector<S>)>,
}

impl<K: fmt::Debug, S: Coefficient> fmt::Debug for IdentityCheck<K, S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.witnesses.iter()).finish()
    }
}

impl<K, S> IdentityCheck<K, S> {
    pub fn holds(&self) -> bool {
        self.witnesses.is_empty()
    }
}

/// `e_i · e_j = Σ C_ij^t e_t` on a named basis, possibly depending on
/// parameters that are required to be nonzero through `constraints`.
#[derive(Clone, PartialEq)]
pub struct StructureConstants<S> {
    pub name: String,
    dim: usize,
    basis_names: Vec<String>,
    table: BTreeMap<(usize, usize), Vector<S>>,
    pub params: Vec<String>,
    /// Expressions required to be nonzero, e.g. `lambda` or `k + 1`.
    pub constraints: Vec<S>,
}

impl<S: Coefficient> StructureConstants<S> {
    /// The zero product on `e1 … en`.
    pub fn new(name: &str, dim: usize) -> Self {
        Self {
            name: name.to_string(),
            dim,
            basis_names: (1..=dim).map(|i| format!("e{i}")).collect(),
            table: BTreeMap::new(),
            params: Vec::new(),
            constraints: Vec::new(),
        }
    }

    pub fn with_basis_names(mut self, names: Vec<String>) -> Result<Self, AlgebraError> {
        if names.len() != self.dim {
            return Err(AlgebraError::DimensionMismatch {
                expected: self.dim,
                found: names.len(),
            });
        }
        self.basis_names = names;
        Ok(self)
    }

    /// Set `e_i · e_j`, replacing any previous value.
    pub fn set_product(&mut self, i: usize, j: usize, v: Vector<S>) -> Result<(), AlgebraError> {
        self.check_index(i)?;
        self.check_index(j)?;
        self.check_vector(&v)?;
        if v.is_zero() {
            self.table.remove(&(i, j));
        } else {
            self.table.insert((i, j), v);
        }
        Ok(())
    }

    /// The nonzero products `(i, j) ↦ e_i · e_j`.
    pub fn products(&self) -> impl Iterator<Item = ((usize, usize), &Vector<S>)> {
        self.table.iter().map(|(k, v)| (*k, v))
    }

    pub fn has_product(&self, i: usize, j: usize) -> bool {
        self.table.contains_key(&(i, j))
    }

    /// `C_ij^t`.
    pub fn coefficient(&self, i: usize, j: usize, t: usize) -> S {
        self.table
            .get(&(i, j))
            .map(|v| v.get(t))
            .unwrap_or_else(S::zero)
    }

    pub fn is_zero_product(&self) -> bool {
        self.table.is_empty()
    }

    fn basis_product(&self, x: &Vector<S>, j: usize) -> Vector<S> {
        let mut out = Vector::zero();
        for (i, a) in x.coords() {
            out.add_scaled(a, &self.product_basis(i, j));
        }
        out
    }

    fn product_with_basis(&self, i: usize, y: &Vector<S>) -> Vector<S> {
        let mut out = Vector::zero();
        for (j, b) in y.coords() {
            out.add_scaled(b, &self.product_basis(i, j));
        }
        out
    }

    /// `(e_i e_j) e_k - e_i (e_j e_k)`.
    pub fn associator(&self, i: usize, j: usize, k: usize) -> Result<Vector<S>, AlgebraError> {
        for idx in [i, j, k] {
            self.check_index(idx)?;
        }
        let left = self.basis_product(&self.product_basis(i, j), k);
        let right = self.product_with_basis(i, &self.product_basis(j, k));
        Ok(left.sub(&right))
    }

    /// `(e_i e_j) e_k - e_i (e_j e_k) - (e_j e_i) e_k + e_j (e_i e_k)`.
    pub fn pre_lie_residual(&self, i: usize, j: usize, k: usize) -> Result<Vector<S>, AlgebraError> {
        Ok(self.associator(i, j, k)?.sub(&self.associator(j, i, k)?))
    }

    fn triples(&self) -> impl Iterator<Item = (usize, usize, usize)> {
        let n = self.dim;
        (0..n).flat_map(move |i| (0..n).flat_map(move |j| (0..n).map(move |k| (i, j, k))))
    }

    pub fn check_pre_lie(&self) -> IdentityCheck<(usize, usize, usize), S> {
        IdentityCheck {
            witnesses: self
                .triples()
                .map(|t| (t, self.pre_lie_residual(t.0, t.1, t.2).expect("in range")))
                .filter(|(_, r)| !r.is_zero())
                .collect(),
        }
    }

    pub fn check_associative(&self) -> IdentityCheck<(usize, usize, usize), S> {
        IdentityCheck {
            witnesses: self
                .triples()
                .map(|t| (t, self.associator(t.0, t.1, t.2).expect("in range")))
                .filter(|(_, r)| !r.is_zero())
                .collect(),
        }
    }

    /// Pairs `(i, j)` with `e_i e_j ≠ e_j e_i`, residual `e_i e_j - e_j e_i`.
    pub fn check_commutative(&self) -> IdentityCheck<(usize, usize), S> {
        let n = self.dim;
        IdentityCheck {
            witnesses: (0..n)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .filter(|(i, j)| i > j)
                .map(|(i, j)| ((i, j), self.product_basis(i, j).sub(&self.product_basis(j, i))))
                .filter(|(_, r)| !r.is_zero())
                .collect(),
        }
    }

    /// The commutator algebra `[x, y] = x·y - y·x` of a pre-Lie algebra.
    pub fn sub_adjacent(&self) -> Result<LieAlgebra<S>, AlgebraError> {
        let pre_lie = self.check_pre_lie();
        if let Some(((i, j, k), r)) = pre_lie.witnesses.first() {
            return Err(AlgebraError::NotPreLie {
                algebra: self.name.clone(),
                witness: format!("({}, {}, {}) = {}", i + 1, j + 1, k + 1, r.display(&self.basis_names)),
            });
        }
        let mut g = StructureConstants::new(&format!("g({})", self.name), self.dim);
        g.basis_names = self.basis_names.clone();
        g.params = self.params.clone();
        g.constraints = self.constraints.clone();
        for i in 0..self.dim {
            for j in 0..self.dim {
                let v = self.product_basis(i, j).sub(&self.product_basis(j, i));
                g.set_product(i, j, v)?;
            }
        }
        let mut lie = LieAlgebra::new(g)?;
        lie.provenance = Some(self.name.clone());
        Ok(lie)
    }

    /// Apply `f` to every structure constant and constraint.
    pub fn map<T: Coefficient, E>(
        &self,
        f: impl Fn(&S) -> Result<T, E>,
    ) -> Result<StructureConstants<T>, E> {
        let mut table = BTreeMap::new();
        for (k, v) in &self.table {
            let w = v.map(&f)?;
            if !w.is_zero() {
                table.insert(*k, w);
            }
        }
        Ok(StructureConstants {
            name: self.name.clone(),
            dim: self.dim,
            basis_names: self.basis_names.clone(),
            table,
            params: self.params.clone(),
            constraints: self.constraints.iter().map(&f).collect::<Result<_, E>>()?,
        })
    }

    /// Printed products, one per line, e.g. `e2 * e1 = -e1`.
    pub fn product_lines(&self, op: ProductNotation) -> Vec<String> {
        let names = &self.basis_names;
        self.table
            .iter()
            .filter(|((i, j), _)| op == ProductNotation::Dot || i < j)
            .map(|((i, j), v)| {
                let (a, b) = (label(names, *i), label(names, *j));
                match op {
                    ProductNotation::Dot => format!("{a} * {b} = {}", v.display(names)),
                    ProductNotation::Bracket => format!("[{a}, {b}] = {}", v.display(names)),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProductNotation {
    Dot,
    Bracket,
}

impl<S: Coefficient> BilinearProduct<S> for StructureConstants<S> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn product_basis(&self, i: usize, j: usize) -> Vector<S> {
        self.table.get(&(i, j)).cloned().unwrap_or_else(Vector::zero)
    }

    fn basis_names(&self) -> &[String] {
        &self.basis_names
    }
}

impl<S: Coefficient> fmt::Debug for StructureConstants<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}]", self.name, self.product_lines(ProductNotation::Dot).join("; "))
    }
}

/// A Lie algebra given by antisymmetric structure constants that satisfy
/// Jacobi; both are verified on construction.
#[derive(Clone, PartialEq)]
pub struct LieAlgebra<S> {
    constants: StructureConstants<S>,
    /// The pre-Lie algebra this was derived from, if any.
    pub provenance: Option<String>,
}

/// The commutator structure of a pre-Lie algebra.
pub type LieStructure<S> = LieAlgebra<S>;

impl<S: Coefficient> LieAlgebra<S> {
    pub fn new(constants: StructureConstants<S>) -> Result<Self, AlgebraError> {
        let n = constants.dim;
        let names = constants.basis_names.clone();
        for i in 0..n {
            for j in i..n {
                let sym = constants
                    .product_basis(i, j)
                    .add(&constants.product_basis(j, i));
                if !sym.is_zero() {
                    return Err(AlgebraError::NotLie {
                        algebra: constants.name.clone(),
                        witness: format!(
                            "[{a}, {b}] + [{b}, {a}] = {}",
                            sym.display(&names),
                            a = label(&names, i),
                            b = label(&names, j)
                        ),
                    });
                }
            }
        }
        let lie = Self {
            constants,
            provenance: None,
        };
        for (i, j, k) in lie.constants.triples() {
            let r = lie.jacobi_residual(i, j, k)?;
            if !r.is_zero() {
                return Err(AlgebraError::NotLie {
                    algebra: lie.constants.name.clone(),
                    witness: format!(
                        "Jacobi at ({}, {}, {}) = {}",
                        i + 1,
                        j + 1,
                        k + 1,
                        r.display(&names)
                    ),
                });
            }
        }
        Ok(lie)
    }

    pub fn name(&self) -> &str {
        &self.constants.name
    }

    pub fn constants(&self) -> &StructureConstants<S> {
        &self.constants
    }

    pub fn into_constants(self) -> StructureConstants<S> {
        self.constants
    }

    pub fn bracket(&self, x: &Vector<S>, y: &Vector<S>) -> Result<Vector<S>, AlgebraError> {
        self.product(x, y)
    }

    /// `[[e_i, e_j], e_k] + [[e_j, e_k], e_i] + [[e_k, e_i], e_j]`.
    pub fn jacobi_residual(&self, i: usize, j: usize, k: usize) -> Result<Vector<S>, AlgebraError> {
        for idx in [i, j, k] {
            self.check_index(idx)?;
        }
        let c = &self.constants;
        let mut out = c.basis_product(&c.product_basis(i, j), k);
        out = out.add(&c.basis_product(&c.product_basis(j, k), i));
        out = out.add(&c.basis_product(&c.product_basis(k, i), j));
        Ok(out)
    }

    pub fn is_abelian(&self) -> bool {
        self.constants.is_zero_product()
    }

    pub fn map<T: Coefficient, E>(&self, f: impl Fn(&S) -> Result<T, E>) -> Result<LieAlgebra<T>, E> {
        Ok(LieAlgebra {
            constants: self.constants.map(f)?,
            provenance: self.provenance.clone(),
        })
    }

    pub fn renamed(mut self, name: &str) -> Self {
        self.constants.name = name.to_string();
        self
    }
}

impl<S: Coefficient> BilinearProduct<S> for LieAlgebra<S> {
    fn dim(&self) -> usize {
        self.constants.dim
    }

    fn product_basis(&self, i: usize, j: usize) -> Vector<S> {
        self.constants.product_basis(i, j)
    }

    fn basis_names(&self) -> &[String] {
        &self.constants.basis_names
    }
}

impl<S: Coefficient> fmt::Debug for LieAlgebra<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} [{}]",
            self.constants.name,
            self.constants.product_lines(ProductNotation::Bracket).join("; ")
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::GaussianRational as Q;

    fn v(coords: &[(usize, i64)]) -> Vector<Q> {
        Vector::from_coords(coords.iter().map(|&(i, c)| (i, Q::from(c))))
    }

    /// e2·e1 = -e1, e2·e2 = e1 - e2.
    fn b1() -> StructureConstants<Q> {
        let mut a = StructureConstants::new("B1", 2);
        a.set_product(1, 0, v(&[(0, -1)])).unwrap();
        a.set_product(1, 1, v(&[(0, 1), (1, -1)])).unwrap();
        a
    }

    /// e1·e1 = 2e1, e1·e2 = e2, e2·e2 = e1.
    fn b6() -> StructureConstants<Q> {
        let mut a = StructureConstants::new("B6", 2);
        a.set_product(0, 0, v(&[(0, 2)])).unwrap();
        a.set_product(0, 1, v(&[(1, 1)])).unwrap();
        a.set_product(1, 1, v(&[(0, 1)])).unwrap();
        a
    }

    #[test]
    fn products_are_bilinear() {
        let a = b1();
        assert_eq!(a.product(&v(&[(1, 1)]), &v(&[(1, 1)])).unwrap(), v(&[(0, 1), (1, -1)]));
        assert!(a.product(&Vector::zero(), &v(&[(1, 3)])).unwrap().is_zero());
        assert!(matches!(
            a.product(&v(&[(2, 1)]), &v(&[(0, 1)])),
            Err(AlgebraError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn b6_is_pre_lie_but_not_associative() {
        let a = b6();
        assert!(a.check_pre_lie().holds());
        let assoc = a.check_associative();
        assert!(!assoc.holds());
        assert!(assoc.witnesses.iter().any(|(t, r)| *t == (1, 1, 1) && *r == v(&[(1, 1)])));
    }

    #[test]
    fn mutated_b6_breaks_pre_lie() {
        let mut a = b6();
        a.set_product(0, 0, v(&[(0, 1)])).unwrap();
        assert_eq!(a.pre_lie_residual(0, 1, 1).unwrap(), v(&[(0, 1)]));
        assert_eq!(a.pre_lie_residual(1, 0, 1).unwrap(), v(&[(0, -1)]));
        assert!(a.pre_lie_residual(0, 0, 1).unwrap().is_zero());
        assert_eq!(a.check_pre_lie().witnesses.len(), 2);
        assert!(matches!(a.sub_adjacent(), Err(AlgebraError::NotPreLie { .. })));
    }

    #[test]
    fn commutator_of_b1() {
        let g = b1().sub_adjacent().unwrap();
        assert_eq!(g.product_basis(0, 1), v(&[(0, 1)]));
        assert_eq!(g.product_basis(1, 0), v(&[(0, -1)]));
        assert_eq!(g.provenance.as_deref(), Some("B1"));
        assert_eq!(g.constants().product_lines(ProductNotation::Bracket), ["[e1, e2] = e1"]);
    }

    #[test]
    fn lie_algebra_rejects_symmetric_bracket() {
        let mut c = StructureConstants::new("bad", 2);
        c.set_product(0, 1, v(&[(0, 1)])).unwrap();
        assert!(matches!(LieAlgebra::new(c), Err(AlgebraError::NotLie { .. })));
    }

    #[test]
    fn linear_combinations_print_reparseably() {
        let items = |xs: &[(&str, &str)]| {
            linear_combination(xs.iter().map(|(c, l)| (c.to_string(), l.to_string())))
        };
        assert_eq!(items(&[("1", "e1"), ("-1", "e2")]), "e1 - e2");
        assert_eq!(items(&[("-2", "e1"), ("n11 - n33", "e2")]), "-2 e1 + (n11 - n33) e2");
        assert_eq!(items(&[("(1 - 3 i)", "e1")]), "(1 - 3 i) e1");
        assert_eq!(items(&[]), "0");
    }
}
