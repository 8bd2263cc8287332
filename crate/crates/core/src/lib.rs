//! Exact verification of Nijenhuis operators on low-dimensional pre-Lie and
//! associative algebras, weight-zero Rota-Baxter operators on their
//! commutator Lie algebras, and the classical Yang-Baxter solutions these
//! induce on coadjoint doubles.
//!
//! * [`scalars`]: exact coefficients (Gaussian rationals, parametric rational
//!   functions with square roots, prime fields),
//! * [`algebra`]: structure constants, identity checks, commutator algebras,
//! * [`operators`]: operator residuals and symbolic family validation,
//! * [`yangbaxter`]: doubles, tensors and the CYBE residual,
//! * [`oracle`]: exhaustive finite-field enumeration and family coverage,
//! * [`formats`] and [`catalog`]: the text formats and the built-in tables,
//! * [`report`]: check reports and the full verification run.

pub mod scalars;
pub mod algebra;
pub mod operators;
pub mod yangbaxter;
pub mod formats;
pub mod catalog;
pub mod oracle;
pub mod report;

pub use algebra::{AlgebraError, BilinearProduct, LieAlgebra, StructureConstants, Vector};
pub use catalog::{builtin, catalog_integrity, catalog_lookup, Catalog, CatalogError, EntryKind};
pub use operators::{
    nijenhuis_residual, rota_baxter_residual, validate_family, FamilyReport, LinearOperator, OperatorKind,
    ParametricFamily,
};
pub use oracle::{enumerate_nijenhuis_ff, enumerate_rb_ff, family_coverage, CoverageReport, FFMatrix};
pub use report::{run_verify_paper, Report, Status, VerifyOptions};
pub use scalars::{Fp, GaussianRational, Scalar};
pub use yangbaxter::{cybe_residual, operator_to_tensor, semidirect_double, skewize, Tensor2, Tensor3};

/// Algebras over parametric exact scalars, as stored in the catalog.
pub type SymbolicAlgebra = StructureConstants<Scalar>;
/// Algebras over a prime field, as used by the oracle.
pub type FpAlgebra = StructureConstants<Fp>;
