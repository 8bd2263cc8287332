use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use super::{EvalTarget, Field, GaussianRational, ScalarError};

/// An element of ℤ/pℤ.
///
/// `modulus == 0` marks an integer not yet bound to a field; these only arise
/// from [`Zero::zero`]/[`One::one`] and small sums of them, and are reduced as
/// soon as they meet a bound element.
#[derive(Clone, Copy)]
pub struct Fp {
    value: i64,
    modulus: u32,
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

/// Smallest square root of `a` modulo the odd prime (or 2) `p`, via Tonelli–Shanks.
pub fn sqrt_mod(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 || p == 2 {
        return Some(a);
    }
    if pow_mod(a, (p - 1) / 2, p) != 1 {
        return None;
    }
    let (mut q, mut s) = (p - 1, 0u32);
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let z = (2..p).find(|&z| pow_mod(z, (p - 1) / 2, p) == p - 1)?;
    let mut m = s;
    let mut c = pow_mod(z, q, p);
    let mut t = pow_mod(a, q, p);
    let mut r = pow_mod(a, (q + 1) / 2, p);
    while t != 1 {
        let mut i = 0;
        let mut tt = t;
        while tt != 1 {
            tt = tt * tt % p;
            i += 1;
        }
        let b = pow_mod(c, 1 << (m - i - 1), p);
        m = i;
        c = b * b % p;
        t = t * c % p;
        r = r * b % p;
    }
    Some(r.min(p - r))
}

impl Fp {
    /// `value mod p`. Panics if `p` is zero.
    pub fn new(value: i64, modulus: u32) -> Self {
        assert!(modulus > 0, "modulus must be positive");
        assert!(modulus < 1 << 31, "modulus must fit in 31 bits");
        Self {
            value: value.rem_euclid(modulus as i64),
            modulus,
        }
    }

    pub fn value(&self) -> u32 {
        match self.modulus {
            0 => self.value as u32,
            p => self.value.rem_euclid(p as i64) as u32,
        }
    }

    /// Zero for unbound integers.
    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    /// Reduce a big integer into ℤ/pℤ.
    pub fn from_bigint(n: &BigInt, modulus: u32) -> Self {
        let r = n.mod_floor(&BigInt::from(modulus));
        Self::new(r.to_i64().expect("residue fits"), modulus)
    }

    fn unify(self, other: Self) -> (i64, i64, u32) {
        let p = match (self.modulus, other.modulus) {
            (0, q) | (q, 0) => q,
            (a, b) => {
                assert_eq!(a, b, "mixing elements of F_{a} and F_{b}");
                a
            }
        };
        if p == 0 {
            (self.value, other.value, 0)
        } else {
            let m = p as i64;
            (self.value.rem_euclid(m), other.value.rem_euclid(m), p)
        }
    }

    fn make(value: i64, modulus: u32) -> Self {
        if modulus == 0 {
            Self { value, modulus }
        } else {
            Self::new(value, modulus)
        }
    }

    pub fn pow(self, e: u64) -> Self {
        if self.modulus == 0 {
            return Self::make(self.value.pow(e as u32), 0);
        }
        let p = self.modulus as u64;
        Self::new(pow_mod(self.value() as u64, e, p) as i64, self.modulus)
    }
}

impl PartialEq for Fp {
    fn eq(&self, other: &Self) -> bool {
        let (a, b, _) = self.unify(*other);
        a == b
    }
}

impl Eq for Fp {}

impl Zero for Fp {
    fn zero() -> Self {
        Self { value: 0, modulus: 0 }
    }

    fn is_zero(&self) -> bool {
        match self.modulus {
            0 => self.value == 0,
            p => self.value.rem_euclid(p as i64) == 0,
        }
    }
}

impl One for Fp {
    fn one() -> Self {
        Self { value: 1, modulus: 0 }
    }
}

impl Neg for Fp {
    type Output = Fp;

    fn neg(self) -> Fp {
        Fp::make(-self.value, self.modulus)
    }
}

impl Add for Fp {
    type Output = Fp;

    fn add(self, rhs: Fp) -> Fp {
        let (a, b, p) = self.unify(rhs);
        Fp::make(a + b, p)
    }
}

impl Sub for Fp {
    type Output = Fp;

    fn sub(self, rhs: Fp) -> Fp {
        let (a, b, p) = self.unify(rhs);
        Fp::make(a - b, p)
    }
}

impl Mul for Fp {
    type Output = Fp;

    fn mul(self, rhs: Fp) -> Fp {
        let (a, b, p) = self.unify(rhs);
        Fp::make(a * b, p)
    }
}

impl Field for Fp {
    /// Unbound integers are only invertible when they are ±1.
    fn checked_inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        match self.modulus {
            0 => matches!(self.value, 1 | -1).then_some(*self),
            p => Some(self.pow(p as u64 - 2)),
        }
    }
}

impl EvalTarget for Fp {
    fn embed(g: &GaussianRational, imaginary: Option<&Self>, one: &Self) -> Result<Self, ScalarError> {
        let p = one.modulus;
        assert!(p != 0, "embedding into F_p needs a bound unit");
        let part = |q: &num_rational::BigRational| -> Result<Fp, ScalarError> {
            let den = Fp::from_bigint(q.denom(), p);
            let inv = den.checked_inv().ok_or_else(|| {
                ScalarError::DenominatorVanishes(format!("{q} has no image in F_{p}"))
            })?;
            Ok(Fp::from_bigint(q.numer(), p) * inv)
        };
        let re = part(g.re())?;
        if g.is_real() {
            return Ok(re);
        }
        let i = imaginary.ok_or_else(|| ScalarError::NoSquareRootInField(format!("-1 mod {p}")))?;
        Ok(re + part(g.im())? * *i)
    }

    fn square_root(&self) -> Option<Self> {
        match self.modulus {
            0 => None,
            p => sqrt_mod(self.value() as u64, p as u64).map(|r| Fp::new(r as i64, p)),
        }
    }
}

impl fmt::Display for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

impl fmt::Debug for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.modulus {
            0 => write!(f, "{}", self.value),
            p => write!(f, "{} mod {p}", self.value()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes() {
        let ps: Vec<u64> = (0..30).filter(|&n| is_prime(n)).collect();
        assert_eq!(ps, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
    }

    #[test]
    fn square_roots_mod_p() {
        assert_eq!(sqrt_mod(4, 5), Some(2)); // -1 ≡ 4
        assert_eq!(sqrt_mod(12, 13), Some(5));
        assert_eq!(sqrt_mod(2, 5), None);
        for p in [5u64, 13, 17, 29, 41, 97] {
            for a in 0..p {
                if let Some(r) = sqrt_mod(a, p) {
                    assert_eq!(r * r % p, a);
                } else {
                    assert!((0..p).all(|x| x * x % p != a));
                }
            }
        }
    }

    #[test]
    fn unbound_constants_adapt() {
        let x = Fp::new(3, 5);
        assert_eq!(Fp::zero() - x, Fp::new(2, 5));
        assert_eq!((Fp::one() + Fp::one()) * x, Fp::new(1, 5));
        assert!((x * x.checked_inv().unwrap() - Fp::one()).is_zero());
        assert!(Fp::new(5, 5).is_zero());
    }

    #[test]
    fn embed_gaussian_with_chosen_i() {
        let one = Fp::new(1, 5);
        let i = Fp::new(2, 5);
        let g = GaussianRational::gaussian(0, 1);
        assert_eq!(Fp::embed(&g, Some(&i), &one).unwrap(), Fp::new(2, 5));
        let half = GaussianRational::from_ratio(1, 2);
        assert_eq!(Fp::embed(&half, Some(&i), &one).unwrap(), Fp::new(3, 5));
        let fifth = GaussianRational::from_ratio(1, 5);
        assert!(Fp::embed(&fifth, Some(&i), &one).is_err());
    }
}
