//! Exact coefficient arithmetic.
//!
//! Everything downstream is generic over [`Coefficient`] (a commutative ring
//! with exact zero test) or [`Field`] (adds inversion). The concrete
//! coefficient types are:
//!
//! * [`GaussianRational`]: the base field of rationals extended by `i`,
//! * [`Scalar`]: rational functions in named parameters over the Gaussian
//!   rationals, reduced modulo adjoined square roots,
//! * [`Fp`]: integers modulo a prime, used by the exhaustive oracle.

mod finite;
mod gaussian;
mod poly;
mod rational;

use std::fmt::{Debug, Display};
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};
use thiserror::Error;

pub use finite::{is_prime, sqrt_mod, Fp};
pub use gaussian::GaussianRational;
pub use poly::{Monomial, Polynomial, Var};
pub use rational::{scalar_arithmetic, ArithOp, Assignment, RelationSet, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScalarError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("denominator vanishes under the assignment: {0}")]
    DenominatorVanishes(String),
    #[error("unbound parameter `{0}`")]
    UnboundParameter(String),
    #[error("no square root of {0} in the target field")]
    NoSquareRootInField(String),
    #[error("nested square roots are not supported: sqrt({0})")]
    NestedRoot(String),
}

/// A commutative ring whose zero test is exact.
pub trait Coefficient:
    Clone
    + Debug
    + Display
    + PartialEq
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Send
    + Sync
{
}

impl<T> Coefficient for T where
    T: Clone
        + Debug
        + Display
        + PartialEq
        + Zero
        + One
        + Neg<Output = T>
        + Add<Output = T>
        + Sub<Output = T>
        + Mul<Output = T>
        + Send
        + Sync
{
}

/// A [`Coefficient`] ring in which every nonzero element is invertible.
pub trait Field: Coefficient {
    fn checked_inv(&self) -> Option<Self>;

    fn checked_div(&self, rhs: &Self) -> Option<Self> {
        rhs.checked_inv().map(|inv| self.clone() * inv)
    }
}

impl Field for f64 {
    fn checked_inv(&self) -> Option<Self> {
        (*self != 0.0).then(|| 1.0 / self)
    }
}

impl Field for f32 {
    fn checked_inv(&self) -> Option<Self> {
        (*self != 0.0).then(|| 1.0 / self)
    }
}

/// A field that parametric [`Scalar`]s can be evaluated into.
pub trait EvalTarget: Field {
    /// Image of a Gaussian rational, given the chosen image of `i` (if the
    /// field has one) and the unit.
    fn embed(
        g: &GaussianRational,
        imaginary: Option<&Self>,
        one: &Self,
    ) -> Result<Self, ScalarError>;

    /// Some square root, if one exists in the field. Deterministic.
    fn square_root(&self) -> Option<Self>;
}
