use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_traits::{One, Zero};

use super::{Coefficient, GaussianRational, ScalarError};

/// A polynomial indeterminate.
///
/// Variable order is fixed globally: matrix parameters `n11 < n12 < … < n33`
/// first, then every other parameter by name (`k < l < lambda`), then adjoined
/// square roots. A root symbol carries its radicand, so every value that uses
/// it also carries the rewrite rule `sqrt(r)^2 -> r`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Var {
    Param(Arc<str>),
    Root(Arc<Polynomial>),
}

impl Var {
    pub fn param(name: &str) -> Self {
        Var::Param(Arc::from(name))
    }

    pub fn is_root(&self) -> bool {
        matches!(self, Var::Root(_))
    }

    pub fn radicand(&self) -> Option<&Polynomial> {
        match self {
            Var::Root(r) => Some(r),
            Var::Param(_) => None,
        }
    }

    /// The name used in assignments and printing.
    pub fn name(&self) -> String {
        self.to_string()
    }

    fn class(&self) -> u8 {
        match self {
            Var::Param(name) => {
                let matrix_entry = name.len() > 1
                    && name.starts_with('n')
                    && name[1..].bytes().all(|b| b.is_ascii_digit());
                if matrix_entry {
                    0
                } else {
                    1
                }
            }
            Var::Root(_) => 2,
        }
    }
}

impl Ord for Var {
    fn cmp(&self, other: &Self) -> Ordering {
        self.class().cmp(&other.class()).then_with(|| match (self, other) {
            (Var::Param(a), Var::Param(b)) => a.cmp(b),
            (Var::Root(a), Var::Root(b)) => a.cmp(b),
            _ => Ordering::Equal,
        })
    }
}

impl PartialOrd for Var {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::Param(name) => write!(f, "{name}"),
            Var::Root(r) => write!(f, "sqrt({r})"),
        }
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A power product, stored sparsely and sorted by variable.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Vec<(Var, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Self(Vec::new())
    }

    pub fn var(v: Var) -> Self {
        Self(vec![(v, 1)])
    }

    pub fn from_powers(powers: impl IntoIterator<Item = (Var, u32)>) -> Self {
        let mut map: BTreeMap<Var, u32> = BTreeMap::new();
        for (v, e) in powers {
            *map.entry(v).or_default() += e;
        }
        Self(map.into_iter().filter(|(_, e)| *e > 0).collect())
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn powers(&self) -> &[(Var, u32)] {
        &self.0
    }

    pub fn exponent(&self, v: &Var) -> u32 {
        self.0
            .binary_search_by(|(w, _)| w.cmp(v))
            .map(|i| self.0[i].1)
            .unwrap_or(0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut a, mut b) = (self.0.iter().peekable(), other.0.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some((va, ea)), Some((vb, eb))) => match va.cmp(vb) {
                    Ordering::Less => {
                        out.push((va.clone(), *ea));
                        a.next();
                    }
                    Ordering::Greater => {
                        out.push((vb.clone(), *eb));
                        b.next();
                    }
                    Ordering::Equal => {
                        out.push((va.clone(), ea + eb));
                        a.next();
                        b.next();
                    }
                },
                (Some(_), None) => out.extend(a.by_ref().cloned()),
                (None, Some(_)) => out.extend(b.by_ref().cloned()),
                (None, None) => break,
            }
        }
        Monomial(out)
    }

    /// `self / other` when `other` divides `self`.
    pub fn checked_div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = Vec::with_capacity(self.0.len());
        let mut b = other.0.iter().peekable();
        for (v, e) in &self.0 {
            let mut e = *e;
            if let Some((w, f)) = b.peek() {
                match w.cmp(v) {
                    Ordering::Less => return None,
                    Ordering::Equal => {
                        if *f > e {
                            return None;
                        }
                        e -= f;
                        b.next();
                    }
                    Ordering::Greater => {}
                }
            }
            if e > 0 {
                out.push((v.clone(), e));
            }
        }
        if b.next().is_some() {
            return None;
        }
        Some(Monomial(out))
    }

    /// Exponent-wise minimum.
    pub fn gcd(&self, other: &Monomial) -> Monomial {
        Monomial(
            self.0
                .iter()
                .filter_map(|(v, e)| {
                    let f = other.exponent(v);
                    (f > 0).then(|| (v.clone(), (*e).min(f)))
                })
                .collect(),
        )
    }

    fn lex_cmp(&self, other: &Monomial) -> Ordering {
        let (mut a, mut b) = (self.0.iter(), other.0.iter());
        loop {
            match (a.next(), b.next()) {
                (Some((va, ea)), Some((vb, eb))) => match va.cmp(vb) {
                    Ordering::Less => return Ordering::Greater,
                    Ordering::Greater => return Ordering::Less,
                    Ordering::Equal => match ea.cmp(eb) {
                        Ordering::Equal => continue,
                        o => return o,
                    },
                },
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (None, None) => return Ordering::Equal,
            }
        }
    }
}

/// Graded lexicographic order on the global variable order.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.lex_cmp(other))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (k, (v, e)) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            match e {
                1 => write!(f, "{v}")?,
                _ => write!(f, "{v}^{e}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A sparse polynomial over ℚ(i) in the global variable order.
///
/// No zero coefficients are stored and every adjoined root appears with
/// exponent at most one.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, GaussianRational>,
}

impl Polynomial {
    pub fn constant(c: GaussianRational) -> Self {
        Self::term(Monomial::one(), c)
    }

    pub fn var(v: Var) -> Self {
        Self::term(Monomial::var(v), GaussianRational::one())
    }

    pub fn param(name: &str) -> Self {
        Self::var(Var::param(name))
    }

    pub fn term(m: Monomial, c: GaussianRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Self { terms }
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &GaussianRational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Leading term under graded lex.
    pub fn leading(&self) -> Option<(&Monomial, &GaussianRational)> {
        self.terms.last_key_value()
    }

    pub fn as_constant(&self) -> Option<GaussianRational> {
        match self.terms.len() {
            0 => Some(GaussianRational::zero()),
            1 => self
                .terms
                .iter()
                .next()
                .filter(|(m, _)| m.is_one())
                .map(|(_, c)| c.clone()),
            _ => None,
        }
    }

    pub fn variables(&self) -> BTreeSet<Var> {
        self.terms
            .keys()
            .flat_map(|m| m.powers().iter().map(|(v, _)| v.clone()))
            .collect()
    }

    pub fn contains_root(&self) -> bool {
        self.terms
            .keys()
            .any(|m| m.powers().iter().any(|(v, _)| v.is_root()))
    }

    fn add_term(&mut self, m: Monomial, c: GaussianRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = &*e.get() + &c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn scale(&self, c: &GaussianRational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero();
        }
        Polynomial {
            terms: self.terms.iter().map(|(m, d)| (m.clone(), d * c)).collect(),
        }
    }

    /// Multiply by a single term without root reduction.
    fn mul_term_raw(&self, m: &Monomial, c: &GaussianRational) -> Polynomial {
        Polynomial {
            terms: self
                .terms
                .iter()
                .map(|(n, d)| (n.mul(m), d * c))
                .collect(),
        }
    }

    /// Rewrite every `sqrt(r)^e` with `e >= 2` using `sqrt(r)^2 = r`.
    fn reduce_roots(self) -> Polynomial {
        let needs = |m: &Monomial| m.powers().iter().any(|(v, e)| v.is_root() && *e >= 2);
        if !self.terms.keys().any(needs) {
            return self;
        }
        let mut out = Polynomial::zero();
        for (m, c) in self.terms {
            if !needs(&m) {
                out.add_term(m, c);
                continue;
            }
            let mut kept = Vec::new();
            let mut factor = Polynomial::constant(c);
            for (v, e) in m.powers() {
                match v.radicand() {
                    Some(r) if *e >= 2 => {
                        for _ in 0..e / 2 {
                            factor = &factor * r;
                        }
                        if e % 2 == 1 {
                            kept.push((v.clone(), 1));
                        }
                    }
                    _ => kept.push((v.clone(), *e)),
                }
            }
            let kept = Monomial::from_powers(kept);
            out = out + factor.mul_term_raw(&kept, &GaussianRational::one()).reduce_roots();
        }
        out
    }

    pub fn pow(&self, e: u32) -> Polynomial {
        let mut acc = Polynomial::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Exact quotient `self / d`, if `d` divides `self`.
    ///
    /// Only root-free divisors are supported; with those, graded-lex division
    /// decides divisibility exactly.
    pub fn exact_div(&self, d: &Polynomial) -> Option<Polynomial> {
        if d.is_zero() || d.contains_root() {
            return None;
        }
        let (lm, lc) = d.leading()?;
        let lc_inv = crate::scalars::Field::checked_inv(lc)?;
        let mut r = self.clone();
        let mut q = Polynomial::zero();
        while let Some((rm, rc)) = r.leading() {
            let m = rm.checked_div(lm)?;
            let c = rc * &lc_inv;
            r = &r - &d.mul_term_raw(&m, &c);
            q.add_term(m, c);
        }
        Some(q)
    }

    /// Remainder of multivariate division by `divisors` (graded lex).
    ///
    /// Zero remainder certifies membership in the ideal they generate; a
    /// nonzero remainder is inconclusive unless the divisors form a Gröbner
    /// basis, which is the caller's concern.
    pub fn reduce_modulo(&self, divisors: &[Polynomial]) -> Polynomial {
        let divisors: Vec<&Polynomial> = divisors.iter().filter(|d| !d.is_zero()).collect();
        let mut p = self.clone();
        let mut rem = Polynomial::zero();
        'outer: while let Some((pm, pc)) = p.leading() {
            for d in &divisors {
                let (dm, dc) = d.leading().expect("nonzero");
                if let Some(m) = pm.checked_div(dm) {
                    let c = pc * &crate::scalars::Field::checked_inv(dc).expect("nonzero");
                    p = &p - &(*d * &Polynomial::term(m, c));
                    continue 'outer;
                }
            }
            let (m, c) = (pm.clone(), pc.clone());
            p.terms.remove(&m);
            rem.add_term(m, c);
        }
        rem
    }

    /// Greatest common monomial divisor of all terms.
    pub fn monomial_content(&self) -> Monomial {
        let mut it = self.terms.keys();
        let Some(first) = it.next() else {
            return Monomial::one();
        };
        it.fold(first.clone(), |g, m| g.gcd(m))
    }

    pub fn div_monomial(&self, m: &Monomial) -> Option<Polynomial> {
        let mut out = Polynomial::zero();
        for (n, c) in &self.terms {
            out.terms.insert(n.checked_div(m)?, c.clone());
        }
        Some(out)
    }

    /// Replace `sqrt(r)` by `-sqrt(r)` for one root symbol.
    pub fn conjugate_root(&self, root: &Var) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, c) in &self.terms {
            if m.exponent(root) % 2 == 1 {
                out.add_term(m.clone(), -c);
            } else {
                out.add_term(m.clone(), c.clone());
            }
        }
        out
    }

    /// Evaluate into any coefficient ring.
    pub fn eval<T: Coefficient>(
        &self,
        coef: &impl Fn(&GaussianRational) -> Result<T, ScalarError>,
        var: &impl Fn(&Var) -> Result<T, ScalarError>,
    ) -> Result<T, ScalarError> {
        let mut cache: BTreeMap<&Var, T> = BTreeMap::new();
        let mut acc = T::zero();
        for (m, c) in &self.terms {
            let mut t = coef(c)?;
            for (v, e) in m.powers() {
                let x = match cache.get(v) {
                    Some(x) => x.clone(),
                    None => {
                        let x = var(v)?;
                        cache.insert(v, x.clone());
                        x
                    }
                };
                for _ in 0..*e {
                    t = t * x.clone();
                }
            }
            acc = acc + t;
        }
        Ok(acc)
    }
}

impl Zero for Polynomial {
    fn zero() -> Self {
        Self {
            terms: BTreeMap::new(),
        }
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl One for Polynomial {
    fn one() -> Self {
        Self::constant(GaussianRational::one())
    }
}

impl Add<&Polynomial> for &Polynomial {
    type Output = Polynomial;

    fn add(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub<&Polynomial> for &Polynomial {
    type Output = Polynomial;

    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl Mul<&Polynomial> for &Polynomial {
    type Output = Polynomial;

    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, c) in &self.terms {
            for (n, d) in &rhs.terms {
                out.add_term(m.mul(n), c * d);
            }
        }
        out.reduce_roots()
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;

    fn neg(self) -> Polynomial {
        Polynomial {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($($tr:ident $method:ident),*) => {$(
        impl $tr for Polynomial {
            type Output = Polynomial;
            fn $method(self, rhs: Polynomial) -> Polynomial {
                (&self).$method(&rhs)
            }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul);

impl Neg for Polynomial {
    type Output = Polynomial;

    fn neg(self) -> Polynomial {
        -&self
    }
}

impl fmt::Display for Polynomial {
    /// Terms in descending graded-lex order, e.g. `n11^2 - 2 n11 n33 + n33^2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let negative = c.is_real() && c.re() < &num_rational::BigRational::zero();
            let shown = if negative { -c } else { c.clone() };
            match (k, negative) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if m.is_one() {
                write!(f, "{shown}")?;
            } else if shown.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{shown} {m}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(name: &str) -> Polynomial {
        Polynomial::param(name)
    }

    fn c(n: i64) -> Polynomial {
        Polynomial::constant(n.into())
    }

    #[test]
    fn variable_order_puts_matrix_entries_first() {
        let mut vars = vec![
            Var::param("lambda"),
            Var::param("n33"),
            Var::param("k"),
            Var::param("n12"),
            Var::param("l"),
            Var::param("n11"),
        ];
        vars.sort();
        let names: Vec<String> = vars.iter().map(Var::name).collect();
        assert_eq!(names, ["n11", "n12", "n33", "k", "l", "lambda"]);
    }

    #[test]
    fn printing_is_grlex_descending() {
        let x = &p("n11") - &p("n33");
        assert_eq!((&x * &x).to_string(), "n11^2 - 2 n11 n33 + n33^2");
        assert_eq!((&c(1) - &(&c(4) * &p("lambda"))).to_string(), "-4 lambda + 1");
    }

    #[test]
    fn roots_reduce_on_multiplication() {
        let radicand = &c(1) - &(&c(4) * &p("lambda"));
        let s = Polynomial::var(Var::Root(Arc::new(radicand.clone())));
        assert_eq!(&s * &s, radicand);
        let cube = &(&s * &s) * &s;
        assert_eq!(cube, &radicand * &s);
    }

    #[test]
    fn exact_division() {
        let x = &p("n11") - &p("n33");
        let num = &(&x * &x) * &p("n12");
        assert_eq!(num.exact_div(&p("n12")), Some(&x * &x));
        assert_eq!(num.exact_div(&x), Some(&x * &p("n12")));
        assert_eq!(num.exact_div(&p("n21")), None);
        assert_eq!((&num + &c(1)).exact_div(&x), None);
    }

    #[test]
    fn reduction_modulo_side_condition() {
        // a^2 + b c = 0
        let side = &(&p("a") * &p("a")) + &(&p("b") * &p("c"));
        let target = &side * &(&p("a") - &p("c"));
        assert!(target.reduce_modulo(std::slice::from_ref(&side)).is_zero());
        assert!(!p("a").reduce_modulo(&[side]).is_zero());
    }
}
