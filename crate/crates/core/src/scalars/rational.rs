use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_traits::{One, Zero};

use super::{sqrt_mod, EvalTarget, Field, Fp, GaussianRational, Polynomial, ScalarError, Var};

/// An exact rational function over ℚ(i) with adjoined square roots.
///
/// The denominator is kept as a product of monic, root-free polynomial
/// factors; constants are folded into the numerator. Cancellation is
/// best-effort (factors are divided out of the numerator when they divide it
/// exactly), but the zero test is exact: a value is zero iff its numerator is
/// the zero polynomial.
#[derive(Clone)]
pub struct Scalar {
    num: Polynomial,
    den: BTreeMap<Polynomial, u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// `a op b`, failing only on division by an identically zero scalar.
pub fn scalar_arithmetic(a: &Scalar, b: &Scalar, op: ArithOp) -> Result<Scalar, ScalarError> {
    Ok(match op {
        ArithOp::Add => a + b,
        ArithOp::Sub => a - b,
        ArithOp::Mul => a * b,
        ArithOp::Div => a.try_div(b)?,
    })
}

/// Insert a monic, root-free, content-free factor, splitting against existing
/// factors whenever one divides the other.
fn insert_factor(den: &mut BTreeMap<Polynomial, u32>, d: Polynomial, e: u32) {
    if e == 0 || d.is_one() {
        return;
    }
    if let Some(k) = den.get_mut(&d) {
        *k += e;
        return;
    }
    let existing: Vec<Polynomial> = den.keys().cloned().collect();
    for f in existing {
        if let Some(q) = d.exact_div(&f) {
            insert_factor(den, f, e);
            insert_factor(den, q, e);
            return;
        }
        if let Some(q) = f.exact_div(&d) {
            let k = den.remove(&f).expect("present");
            insert_factor(den, d.clone(), k + e);
            insert_factor(den, q, k);
            return;
        }
    }
    den.insert(d, e);
}

fn factor_product(den: &BTreeMap<Polynomial, u32>) -> Polynomial {
    den.iter()
        .fold(Polynomial::one(), |acc, (f, e)| &acc * &f.pow(*e))
}

impl Scalar {
    pub fn constant(c: GaussianRational) -> Self {
        Self::from_polynomial(Polynomial::constant(c))
    }

    pub fn from_polynomial(p: Polynomial) -> Self {
        Self {
            num: p,
            den: BTreeMap::new(),
        }
    }

    pub fn param(name: &str) -> Self {
        Self::from_polynomial(Polynomial::param(name))
    }

    pub fn i() -> Self {
        Self::constant(GaussianRational::i())
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Self::constant(GaussianRational::from_ratio(num, den))
    }

    /// A square root of a polynomial.
    ///
    /// `-1` becomes `i`, constant squares (of a rational or of `i` times a
    /// rational) become that root, and anything else is adjoined as a new
    /// symbol whose square rewrites to the radicand. The sign convention is the
    /// one of [`EvalTarget::square_root`] for constants.
    pub fn sqrt(radicand: &Polynomial) -> Result<Self, ScalarError> {
        if radicand.contains_root() {
            return Err(ScalarError::NestedRoot(radicand.to_string()));
        }
        if let Some(c) = radicand.as_constant() {
            if let Some(r) = c.square_root() {
                return Ok(Self::constant(r));
            }
        }
        Ok(Self::from_polynomial(Polynomial::var(Var::Root(Arc::new(
            radicand.clone(),
        )))))
    }

    /// Square root of a rational function, via `sqrt(N/D) = sqrt(N D)/D`.
    pub fn sqrt_of(radicand: &Scalar) -> Result<Self, ScalarError> {
        if radicand.den.is_empty() {
            return Self::sqrt(&radicand.num);
        }
        let d = factor_product(&radicand.den);
        let root = Self::sqrt(&(&radicand.num * &d))?;
        root.try_div(&Self::from_polynomial(d))
    }

    pub fn numerator(&self) -> &Polynomial {
        &self.num
    }

    /// Denominator factors, each monic and root-free.
    pub fn denominator_factors(&self) -> &BTreeMap<Polynomial, u32> {
        &self.den
    }

    pub fn denominator(&self) -> Polynomial {
        factor_product(&self.den)
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_empty()
    }

    pub fn as_constant(&self) -> Option<GaussianRational> {
        if self.den.is_empty() {
            self.num.as_constant()
        } else {
            None
        }
    }

    /// Every parameter name, including those inside radicands.
    pub fn parameters(&self) -> BTreeSet<String> {
        fn walk(p: &Polynomial, out: &mut BTreeSet<String>) {
            for v in p.variables() {
                match &v {
                    Var::Param(name) => {
                        out.insert(name.to_string());
                    }
                    Var::Root(r) => walk(r, out),
                }
            }
        }
        let mut out = BTreeSet::new();
        walk(&self.num, &mut out);
        for f in self.den.keys() {
            walk(f, &mut out);
        }
        out
    }

    /// Adjoined square-root symbols used by this value.
    pub fn roots(&self) -> BTreeSet<Var> {
        self.num
            .variables()
            .into_iter()
            .filter(Var::is_root)
            .collect()
    }

    /// Build `num / Π divisors^e` from arbitrary nonzero divisors.
    fn over(mut num: Polynomial, divisors: Vec<(Polynomial, u32)>) -> Result<Self, ScalarError> {
        let mut den = BTreeMap::new();
        let mut scale = GaussianRational::one();
        for (mut d, e) in divisors {
            if d.is_zero() {
                return Err(ScalarError::DivisionByZero);
            }
            // Clear adjoined roots from the divisor one symbol at a time:
            // (a + b s)(a - b s) = a² - b² r no longer mentions s.
            while let Some(s) = d.variables().into_iter().find(Var::is_root) {
                let conj = d.conjugate_root(&s);
                num = &num * &conj.pow(e);
                d = &d * &conj;
                if d.is_zero() {
                    return Err(ScalarError::DivisionByZero);
                }
            }
            let content = d.monomial_content();
            d = d.div_monomial(&content).expect("content divides");
            for (v, k) in content.powers() {
                insert_factor(&mut den, Polynomial::var(v.clone()), k * e);
            }
            let (_, lc) = d.leading().expect("nonzero");
            let lc_inv = lc.checked_inv().expect("nonzero");
            scale = &scale * &pow_gaussian(&lc_inv, e);
            d = d.scale(&lc_inv);
            insert_factor(&mut den, d, e);
        }
        Ok(Self::cancel(num.scale(&scale), den))
    }

    /// Divide out every denominator factor that divides the numerator.
    fn cancel(mut num: Polynomial, mut den: BTreeMap<Polynomial, u32>) -> Self {
        if num.is_zero() {
            return Self::zero();
        }
        for (f, e) in den.iter_mut() {
            while *e > 0 {
                match num.exact_div(f) {
                    Some(q) => {
                        num = q;
                        *e -= 1;
                    }
                    None => break,
                }
            }
        }
        den.retain(|_, e| *e > 0);
        Self { num, den }
    }

    pub fn try_div(&self, rhs: &Scalar) -> Result<Scalar, ScalarError> {
        Ok(self * &rhs.try_inv()?)
    }

    pub fn try_inv(&self) -> Result<Scalar, ScalarError> {
        if self.num.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        Self::over(factor_product(&self.den), vec![(self.num.clone(), 1)])
    }

    pub fn pow(&self, e: u32) -> Scalar {
        (0..e).fold(Scalar::one(), |acc, _| &acc * self)
    }

    /// Evaluate every parameter and root symbol through `var`.
    fn eval_with<T: EvalTarget>(
        &self,
        coef: &impl Fn(&GaussianRational) -> Result<T, ScalarError>,
        var: &impl Fn(&Var) -> Result<T, ScalarError>,
    ) -> Result<T, ScalarError> {
        let num = self.num.eval(coef, var)?;
        let mut den = T::one();
        for (f, e) in &self.den {
            let v = f.eval(coef, var)?;
            if v.is_zero() {
                return Err(ScalarError::DenominatorVanishes(format!("{f} = 0")));
            }
            for _ in 0..*e {
                den = den * v.clone();
            }
        }
        num.checked_div(&den)
            .ok_or_else(|| ScalarError::DenominatorVanishes(self.denominator().to_string()))
    }

    /// Evaluate into any field that admits the coefficients.
    pub fn eval<T: EvalTarget>(&self, a: &Assignment<T>) -> Result<T, ScalarError> {
        let coef = |g: &GaussianRational| T::embed(g, a.imaginary.as_ref(), &a.one);
        let var = |v: &Var| a.resolve(v);
        self.eval_with(&coef, &var)
    }

    /// Evaluate to a Gaussian rational.
    pub fn substitute(&self, a: &Assignment<GaussianRational>) -> Result<GaussianRational, ScalarError> {
        self.eval(a)
    }

    /// Evaluate in F_p.
    pub fn substitute_fp(&self, a: &Assignment<Fp>) -> Result<Fp, ScalarError> {
        self.eval(a)
    }

    /// Replace some parameters by scalars, keeping the rest symbolic.
    ///
    /// Root symbols are rebuilt from their substituted radicands, so a
    /// radicand that becomes a constant square collapses to its root.
    pub fn substitute_partial(&self, values: &BTreeMap<String, Scalar>) -> Result<Scalar, ScalarError> {
        if values.is_empty() {
            return Ok(self.clone());
        }
        let coef = |g: &GaussianRational| Ok(Scalar::constant(g.clone()));
        fn var(v: &Var, values: &BTreeMap<String, Scalar>) -> Result<Scalar, ScalarError> {
            match v {
                Var::Param(name) => Ok(values
                    .get(&**name)
                    .cloned()
                    .unwrap_or_else(|| Scalar::param(name))),
                Var::Root(r) => {
                    let coef = |g: &GaussianRational| Ok(Scalar::constant(g.clone()));
                    let radicand = r.eval(&coef, &|w| var(w, values))?;
                    Scalar::sqrt_of(&radicand)
                }
            }
        }
        self.eval_with(&coef, &|v| var(v, values))
    }
}

fn pow_gaussian(g: &GaussianRational, e: u32) -> GaussianRational {
    (0..e).fold(GaussianRational::one(), |acc, _| &acc * g)
}

/// Values for the parameters (and optionally the root symbols) of a scalar.
///
/// Roots are keyed by their printed form, e.g. `sqrt(-4 lambda + 1)`. A root
/// without an explicit value is taken from [`EvalTarget::square_root`] of its
/// evaluated radicand.
#[derive(Debug, Clone)]
pub struct Assignment<T> {
    pub params: BTreeMap<String, T>,
    pub roots: BTreeMap<String, T>,
    pub imaginary: Option<T>,
    pub one: T,
}

impl<T: EvalTarget> Assignment<T> {
    pub fn new(one: T, imaginary: Option<T>) -> Self {
        Self {
            params: BTreeMap::new(),
            roots: BTreeMap::new(),
            imaginary,
            one,
        }
    }

    pub fn with(mut self, name: &str, value: T) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    pub fn with_root(mut self, root: &str, value: T) -> Self {
        self.roots.insert(root.to_string(), value);
        self
    }

    pub fn set(&mut self, name: &str, value: T) {
        self.params.insert(name.to_string(), value);
    }

    fn resolve(&self, v: &Var) -> Result<T, ScalarError> {
        match v {
            Var::Param(name) => self
                .params
                .get(&**name)
                .cloned()
                .ok_or_else(|| ScalarError::UnboundParameter(name.to_string())),
            Var::Root(r) => {
                if let Some(x) = self.roots.get(&v.name()) {
                    return Ok(x.clone());
                }
                let coef = |g: &GaussianRational| T::embed(g, self.imaginary.as_ref(), &self.one);
                let radicand = r.eval(&coef, &|w| self.resolve(w))?;
                radicand
                    .square_root()
                    .ok_or_else(|| ScalarError::NoSquareRootInField(format!("{r} = {radicand}")))
            }
        }
    }
}

impl Assignment<GaussianRational> {
    pub fn exact() -> Self {
        Self::new(GaussianRational::one(), Some(GaussianRational::i()))
    }
}

impl Assignment<Fp> {
    /// Over F_p with `i` bound to the smaller square root of `-1`, if any.
    pub fn modulo(p: u32) -> Self {
        let i = sqrt_mod(p as u64 - 1, p as u64).map(|r| Fp::new(r as i64, p));
        Self::new(Fp::new(1, p), i)
    }
}

/// The rewrite rules `sqrt(r)^2 -> r` carried by a collection of scalars.
///
/// Rules are intrinsic to the root symbols, so this is a read-only view used
/// for reporting.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RelationSet {
    rules: BTreeMap<Var, Polynomial>,
}

impl RelationSet {
    pub fn collect<'a>(scalars: impl IntoIterator<Item = &'a Scalar>) -> Self {
        let mut rules = BTreeMap::new();
        for s in scalars {
            for v in s.roots() {
                let r = v.radicand().expect("root").clone();
                rules.insert(v, r);
            }
        }
        Self { rules }
    }

    pub fn rules(&self) -> impl Iterator<Item = (&Var, &Polynomial)> {
        self.rules.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }
}

impl fmt::Display for RelationSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, (v, r)) in self.rules.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}^2 = {r}")?;
        }
        Ok(())
    }
}

impl Zero for Scalar {
    fn zero() -> Self {
        Self::from_polynomial(Polynomial::zero())
    }

    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
}

impl One for Scalar {
    fn one() -> Self {
        Self::from_polynomial(Polynomial::one())
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        (self.num == other.num && self.den == other.den) || (self - other).is_zero()
    }
}

impl Add<&Scalar> for &Scalar {
    type Output = Scalar;

    fn add(self, rhs: &Scalar) -> Scalar {
        if rhs.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return rhs.clone();
        }
        if self.den == rhs.den {
            return Scalar::cancel(&self.num + &rhs.num, self.den.clone());
        }
        let mut lcm = self.den.clone();
        for (f, e) in &rhs.den {
            let k = lcm.entry(f.clone()).or_default();
            *k = (*k).max(*e);
        }
        let cofactor = |den: &BTreeMap<Polynomial, u32>| {
            lcm.iter().fold(Polynomial::one(), |acc, (f, e)| {
                &acc * &f.pow(e - den.get(f).copied().unwrap_or(0))
            })
        };
        let num = &(&self.num * &cofactor(&self.den)) + &(&rhs.num * &cofactor(&rhs.den));
        Scalar::cancel(num, lcm)
    }
}

impl Sub<&Scalar> for &Scalar {
    type Output = Scalar;

    fn sub(self, rhs: &Scalar) -> Scalar {
        self + &(-rhs)
    }
}

impl Mul<&Scalar> for &Scalar {
    type Output = Scalar;

    fn mul(self, rhs: &Scalar) -> Scalar {
        if self.is_zero() || rhs.is_zero() {
            return Scalar::zero();
        }
        let mut den = self.den.clone();
        for (f, e) in &rhs.den {
            insert_factor(&mut den, f.clone(), *e);
        }
        Scalar::cancel(&self.num * &rhs.num, den)
    }
}

impl Neg for &Scalar {
    type Output = Scalar;

    fn neg(self) -> Scalar {
        Scalar {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;

    fn neg(self) -> Scalar {
        -&self
    }
}

macro_rules! forward_owned {
    ($($tr:ident $method:ident),*) => {$(
        impl $tr for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$method(&rhs)
            }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul);

impl Field for Scalar {
    fn checked_inv(&self) -> Option<Self> {
        self.try_inv().ok()
    }
}

impl EvalTarget for Scalar {
    fn embed(g: &GaussianRational, _imaginary: Option<&Self>, _one: &Self) -> Result<Self, ScalarError> {
        Ok(Scalar::constant(g.clone()))
    }

    fn square_root(&self) -> Option<Self> {
        Scalar::sqrt_of(self).ok()
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::constant(n.into())
    }
}

impl From<GaussianRational> for Scalar {
    fn from(g: GaussianRational) -> Self {
        Scalar::constant(g)
    }
}

impl From<Polynomial> for Scalar {
    fn from(p: Polynomial) -> Self {
        Scalar::from_polynomial(p)
    }
}

fn needs_parens(p: &Polynomial) -> bool {
    p.len() > 1 || p.terms().any(|(m, c)| !c.is_atomic() || (!m.is_one() && !c.is_real()))
}

impl fmt::Display for Scalar {
    /// `N`, `N/d`, or `(N)/(d1 d2^2)`; parseable by the scalar syntax.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_empty() {
            return write!(f, "{}", self.num);
        }
        if needs_parens(&self.num) {
            write!(f, "({})", self.num)?;
        } else {
            write!(f, "{}", self.num)?;
        }
        write!(f, "/")?;
        let simple = self.den.len() == 1 && {
            let (d, e) = self.den.iter().next().expect("one factor");
            *e == 1 && d.len() == 1
        };
        let simple = simple && {
            let d = self.den.keys().next().expect("one factor");
            d.leading().map(|(m, _)| m.powers().len() == 1 && m.degree() == 1) == Some(true)
        };
        if simple {
            return write!(f, "{}", self.den.keys().next().expect("one factor"));
        }
        write!(f, "(")?;
        for (k, (d, e)) in self.den.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            match (d.len() > 1, *e) {
                (true, 1) => write!(f, "({d})")?,
                (true, e) => write!(f, "({d})^{e}")?,
                (false, 1) => write!(f, "{d}")?,
                (false, e) => write!(f, "{d}^{e}")?,
            }
        }
        write!(f, ")")
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(name: &str) -> Scalar {
        Scalar::param(name)
    }

    fn c(n: i64) -> Scalar {
        Scalar::from(n)
    }

    fn s_lambda() -> Scalar {
        let radicand = (&c(1) - &(&c(4) * &p("lambda"))).numerator().clone();
        Scalar::sqrt(&radicand).unwrap()
    }

    #[test]
    fn gaussian_conjugates_multiply_to_two() {
        let a = &c(1) + &Scalar::i();
        let b = &c(1) - &Scalar::i();
        assert_eq!(&a * &b, c(2));
    }

    #[test]
    fn adjoined_root_squares_to_radicand() {
        let s = s_lambda();
        assert_eq!(&s * &s, &c(1) - &(&c(4) * &p("lambda")));
        assert_eq!((&s * &s).to_string(), "-4 lambda + 1");
    }

    #[test]
    fn cancellation_by_exact_division() {
        let d = &p("n11") - &p("n33");
        let q = (&d * &d).try_div(&p("n12")).unwrap();
        assert_eq!(q.to_string(), "(n11^2 - 2 n11 n33 + n33^2)/n12");
        let back = &q * &p("n12");
        assert!(back.is_polynomial());
        assert_eq!(back, &d * &d);
    }

    #[test]
    fn opposite_factors_share_a_canonical_form() {
        let a = c(1).try_div(&(&p("n11") - &p("n33"))).unwrap();
        let b = c(1).try_div(&(&p("n33") - &p("n11"))).unwrap();
        assert!((&a + &b).is_zero());
        assert_eq!(a.denominator_factors().len(), 1);
    }

    #[test]
    fn root_in_denominator_is_rationalized() {
        let s = s_lambda();
        let x = c(1).try_div(&(&c(1) + &s)).unwrap();
        assert!(x.roots().len() == 1);
        assert!(x.denominator_factors().keys().all(|f| !f.contains_root()));
        assert_eq!(&x * &(&c(1) + &s), c(1));
    }

    #[test]
    fn sqrt_of_minus_one_is_i() {
        let m1 = Polynomial::constant((-1).into());
        assert_eq!(Scalar::sqrt(&m1).unwrap(), Scalar::i());
        let m4 = Polynomial::constant((-4).into());
        assert_eq!(Scalar::sqrt(&m4).unwrap(), &c(2) * &Scalar::i());
    }

    #[test]
    fn division_by_zero() {
        let zero = &p("x") - &p("x");
        assert_eq!(
            scalar_arithmetic(&c(1), &zero, ArithOp::Div),
            Err(ScalarError::DivisionByZero)
        );
    }

    #[test]
    fn substitution_over_q_i() {
        let d = &p("n11") - &p("n33");
        let x = -(&d * &d).try_div(&p("n12")).unwrap();
        let a = Assignment::exact()
            .with("n11", 1.into())
            .with("n33", 0.into())
            .with("n12", 2.into());
        assert_eq!(x.substitute(&a).unwrap(), GaussianRational::from_ratio(-1, 2));
        let zero = Assignment::exact()
            .with("n11", 1.into())
            .with("n33", 0.into())
            .with("n12", 0.into());
        assert!(matches!(x.substitute(&zero), Err(ScalarError::DenominatorVanishes(_))));
        let partial = Assignment::exact().with("n11", 1.into()).with("n33", 0.into());
        assert_eq!(
            x.substitute(&partial),
            Err(ScalarError::UnboundParameter("n12".into()))
        );
    }

    #[test]
    fn substitution_over_f5_with_i_equal_two() {
        let plus = &p("n11") + &(&p("n21") * &Scalar::i());
        let minus = &p("n11") - &(&p("n21") * &Scalar::i());
        let a = Assignment::modulo(5).with("n11", Fp::new(0, 5)).with("n21", Fp::new(1, 5));
        assert_eq!(plus.substitute_fp(&a).unwrap(), Fp::new(2, 5));
        assert_eq!(minus.substitute_fp(&a).unwrap(), Fp::new(3, 5));
        let no_i = Assignment::modulo(7).with("n11", Fp::new(0, 7)).with("n21", Fp::new(1, 7));
        assert!(matches!(plus.substitute_fp(&no_i), Err(ScalarError::NoSquareRootInField(_))));
    }

    #[test]
    fn roots_specialize_through_their_radicand() {
        let s = s_lambda();
        let x = &(&c(-1) + &s) * &p("n12");
        let mut values = BTreeMap::new();
        values.insert("lambda".to_string(), c(-2));
        let y = x.substitute_partial(&values).unwrap();
        assert_eq!(y, &c(2) * &p("n12"));
        let a = Assignment::modulo(5).with("lambda", Fp::new(1, 5)).with("n12", Fp::new(1, 5));
        // 1 - 4 = -3 = 2 has no square root mod 5
        assert!(matches!(x.substitute_fp(&a), Err(ScalarError::NoSquareRootInField(_))));
        // an explicitly supplied root value is used as given
        let a = a.with_root("sqrt(-4 lambda + 1)", Fp::new(3, 5));
        assert_eq!(x.substitute_fp(&a).unwrap(), Fp::new(2, 5));
    }

    #[test]
    fn relation_set_lists_root_rules() {
        let rel = RelationSet::collect([&s_lambda(), &p("n11")]);
        assert_eq!(rel.to_string(), "sqrt(-4 lambda + 1)^2 = -4 lambda + 1");
    }
}
