//! Exhaustive search over F_p as an independent check on the classification
//! tables.
//!
//! Candidates are n×n matrices in the row-image convention, enumerated in
//! row-major order with entry (0,0) the most significant digit, values
//! ascending. The search space is cut into contiguous chunks handled by rayon
//! workers; results are concatenated in chunk order, so output order never
//! depends on scheduling.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rayon::prelude::*;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::algebra::{BilinearProduct, LieAlgebra, StructureConstants};
use crate::operators::{LinearOperator, ParametricFamily};
use crate::scalars::{is_prime, sqrt_mod, Assignment, Fp, GaussianRational, Polynomial, Scalar, ScalarError, Var};

/// Largest number of candidates a single search may visit.
pub const SEARCH_LIMIT: u128 = 100_000_000;

const CHUNK: u64 = 1 << 14;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("{p}^{exponent} candidates exceed the search limit of {SEARCH_LIMIT}")]
    SearchSpaceTooLarge { p: u32, exponent: usize },
    #[error("{0} is not a prime")]
    NonPrimeModulus(u32),
    #[error("{0}")]
    Scalar(#[from] ScalarError),
}

/// Which identity the candidates must satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FfIdentity {
    Nijenhuis,
    /// Weight as a residue mod p.
    RotaBaxter(u32),
}

fn check_space(p: u32, exponent: usize) -> Result<u64, OracleError> {
    if !is_prime(p as u64) {
        return Err(OracleError::NonPrimeModulus(p));
    }
    let too_large = || OracleError::SearchSpaceTooLarge { p, exponent };
    let mut total: u128 = 1;
    for _ in 0..exponent {
        total = total.checked_mul(p as u128).ok_or_else(too_large)?;
        if total > SEARCH_LIMIT {
            return Err(too_large());
        }
    }
    Ok(total as u64)
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

fn inv_mod(a: u64, p: u64) -> Option<u64> {
    (a % p != 0).then(|| pow_mod(a, p - 2, p))
}

/// A square matrix over F_p, rows are images of basis vectors.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct FFMatrix {
    p: u32,
    n: usize,
    entries: Vec<u32>,
}

impl FFMatrix {
    pub fn new(p: u32, rows: &[Vec<u32>]) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        Self {
            p,
            n,
            entries: rows.iter().flatten().map(|x| x % p).collect(),
        }
    }

    /// Inverse of [`FFMatrix::code`].
    pub fn from_code(mut code: u64, n: usize, p: u32) -> Self {
        let mut entries = vec![0u32; n * n];
        for e in entries.iter_mut().rev() {
            *e = (code % p as u64) as u32;
            code /= p as u64;
        }
        Self { p, n, entries }
    }

    /// Position in the enumeration order.
    pub fn code(&self) -> u64 {
        self.entries.iter().fold(0u64, |acc, &e| acc * self.p as u64 + e as u64)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn modulus(&self) -> u32 {
        self.p
    }

    pub fn entry(&self, i: usize, j: usize) -> u32 {
        self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&e| e == 0)
    }

    pub fn to_operator(&self) -> LinearOperator<Fp> {
        let rows = (0..self.n)
            .map(|i| (0..self.n).map(|j| Fp::new(self.entry(i, j) as i64, self.p)).collect())
            .collect();
        LinearOperator::from_dense(rows).expect("square")
    }
}

impl fmt::Display for FFMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.n {
            if i > 0 {
                write!(f, ", ")?;
            }
            let row: Vec<String> = (0..self.n).map(|j| self.entry(i, j).to_string()).collect();
            write!(f, "[{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

/// Structure constants over F_p as a list of nonzero `(k, l, t, c)` with
/// `e_k e_l = Σ c e_t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DenseTable {
    n: usize,
    p: u64,
    terms: Vec<(usize, usize, usize, u64)>,
}

fn residue(x: Fp, p: u32) -> u64 {
    // Unbound constants (modulus 0) are reduced here.
    (Fp::new(1, p) * x).value() as u64
}

impl DenseTable {
    pub fn new(a: &StructureConstants<Fp>, p: u32) -> Self {
        let n = a.dim();
        let mut terms = Vec::new();
        for ((k, l), v) in a.products() {
            for (t, c) in v.coords() {
                let c = residue(*c, p);
                if c != 0 {
                    terms.push((k, l, t, c));
                }
            }
        }
        Self { n, p: p as u64, terms }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `x·y` for coordinate vectors with residues below p.
    pub fn product(&self, x: &[u64], y: &[u64]) -> Vec<u64> {
        let mut out = vec![0u64; self.n];
        for &(k, l, t, c) in &self.terms {
            out[t] = (out[t] + x[k] * y[l] % self.p * c) % self.p;
        }
        out
    }

    /// Whether the row-major matrix `m` satisfies `id` on every basis pair.
    pub fn holds(&self, id: FfIdentity, m: &[u64]) -> bool {
        let (n, p) = (self.n, self.p);
        let row = |i: usize| &m[i * n..(i + 1) * n];
        let mut lhs = [0u64; 8];
        let mut inner = [0u64; 8];
        debug_assert!(n <= 8);
        for i in 0..n {
            for j in 0..n {
                lhs[..n].fill(0);
                inner[..n].fill(0);
                let (ri, rj) = (row(i), row(j));
                for &(k, l, t, c) in &self.terms {
                    lhs[t] = (lhs[t] + ri[k] * rj[l] % p * c) % p;
                    if l == j {
                        inner[t] = (inner[t] + ri[k] * c) % p;
                    }
                    if k == i {
                        inner[t] = (inner[t] + rj[l] * c) % p;
                    }
                    if k == i && l == j {
                        match id {
                            // minus N(e_i e_j), added as (p - c) times row t
                            FfIdentity::Nijenhuis => {
                                let rt = row(t);
                                for s in 0..n {
                                    inner[s] = (inner[s] + (p - c) * rt[s]) % p;
                                }
                            }
                            FfIdentity::RotaBaxter(w) => inner[t] = (inner[t] + w as u64 * c) % p,
                        }
                    }
                }
                // lhs - Σ_t inner_t row_t
                for s in 0..n {
                    let mut acc = lhs[s];
                    for t in 0..n {
                        acc = (acc + (p - inner[t]) * row(t)[s]) % p;
                    }
                    if acc % p != 0 {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// `m∘m = 0` for a row-major matrix.
pub fn square_is_zero(n: usize, p: u64, m: &[u64]) -> bool {
    (0..n).all(|i| {
        (0..n).all(|j| (0..n).map(|k| m[i * n + k] * m[k * n + j]).sum::<u64>() % p == 0)
    })
}

/// Codes of all n×n matrices over F_p accepted by `pred`, ascending.
pub fn search(n: usize, p: u32, pred: impl Fn(&[u64]) -> bool + Sync) -> Result<Vec<u64>, OracleError> {
    let total = check_space(p, n * n)?;
    let chunks = total.div_ceil(CHUNK);
    let p64 = p as u64;
    Ok((0..chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            let start = c * CHUNK;
            let end = (start + CHUNK).min(total);
            let mut digits: Vec<u64> = FFMatrix::from_code(start, n, p).entries.iter().map(|&e| e as u64).collect();
            let mut found = Vec::new();
            for code in start..end {
                if pred(&digits) {
                    found.push(code);
                }
                for d in digits.iter_mut().rev() {
                    *d += 1;
                    if *d < p64 {
                        break;
                    }
                    *d = 0;
                }
            }
            found
        })
        .collect())
}

fn enumerate_table(table: &DenseTable, id: FfIdentity, p: u32) -> Result<Vec<u64>, OracleError> {
    search(table.dim(), p, |m| table.holds(id, m))
}

/// All Nijenhuis operators on `a` over F_p, in enumeration order.
pub fn enumerate_nijenhuis_ff(a: &StructureConstants<Fp>, p: u32) -> Result<Vec<FFMatrix>, OracleError> {
    check_space(p, a.dim() * a.dim())?;
    let codes = enumerate_table(&DenseTable::new(a, p), FfIdentity::Nijenhuis, p)?;
    Ok(codes.into_iter().map(|c| FFMatrix::from_code(c, a.dim(), p)).collect())
}

/// All Rota-Baxter operators of the given weight on `l` over F_p.
pub fn enumerate_rb_ff(l: &LieAlgebra<Fp>, p: u32, weight: Fp) -> Result<Vec<FFMatrix>, OracleError> {
    check_space(p, l.constants().dim() * l.constants().dim())?;
    let w = residue(weight, p) as u32;
    let codes = enumerate_table(&DenseTable::new(l.constants(), p), FfIdentity::RotaBaxter(w), p)?;
    Ok(codes.into_iter().map(|c| FFMatrix::from_code(c, l.constants().dim(), p)).collect())
}

/// One choice of values for the parameters of an algebra.
#[derive(Debug, Clone)]
pub struct Instance {
    pub values: BTreeMap<String, u32>,
    pub constants: StructureConstants<Fp>,
}

impl Instance {
    pub fn label(&self) -> String {
        self.values.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(" ")
    }
}

/// Every admissible specialization of the algebra's parameters over F_p:
/// constraints nonzero and all constants defined.
pub fn instances(a: &StructureConstants<Scalar>, p: u32) -> Result<Vec<Instance>, OracleError> {
    check_space(p, a.params.len())?;
    let k = a.params.len();
    let total = (p as u64).pow(k as u32);
    let mut out = Vec::new();
    'points: for code in 0..total {
        let mut asg = Assignment::modulo(p);
        let mut values = BTreeMap::new();
        let mut c = code;
        for name in a.params.iter().rev() {
            let v = (c % p as u64) as u32;
            c /= p as u64;
            asg.set(name, Fp::new(v as i64, p));
            values.insert(name.clone(), v);
        }
        for s in &a.constraints {
            match s.substitute_fp(&asg) {
                Ok(x) if residue(x, p) != 0 => {}
                _ => continue 'points,
            }
        }
        match a.map(|s| s.substitute_fp(&asg)) {
            Ok(constants) => out.push(Instance { values, constants }),
            Err(_) => continue,
        }
    }
    Ok(out)
}

/// A polynomial over F_p on numbered slots.
#[derive(Debug, Clone)]
struct CPoly(Vec<(u64, Vec<(usize, u32)>)>);

impl CPoly {
    fn eval(&self, vals: &[u64], p: u64) -> u64 {
        self.0.iter().fold(0u64, |acc, (c, mono)| {
            let t = mono.iter().fold(*c, |t, &(s, e)| t * pow_mod(vals[s], e as u64, p) % p);
            (acc + t) % p
        })
    }
}

#[derive(Debug, Clone)]
struct CRat {
    num: CPoly,
    den: Vec<(CPoly, u32)>,
}

impl CRat {
    fn eval(&self, vals: &[u64], p: u64) -> Option<u64> {
        let mut den = 1u64;
        for (d, e) in &self.den {
            den = den * pow_mod(d.eval(vals, p), *e as u64, p) % p;
        }
        inv_mod(den, p).map(|inv| self.num.eval(vals, p) * inv % p)
    }
}

/// A family compiled for fast evaluation: slots are the family parameters,
/// then the algebra parameters, then square-root symbols.
#[derive(Debug, Clone)]
struct CompiledFamily {
    id: String,
    params: Vec<String>,
    algebra_params: Vec<String>,
    roots: Vec<CPoly>,
    entries: Vec<CRat>,
    nonzero: Vec<CRat>,
    zero: Vec<CRat>,
}

struct Compiler {
    p: u32,
    imaginary: Option<Fp>,
    slots: BTreeMap<Var, usize>,
}

impl Compiler {
    fn coef(&self, g: &GaussianRational) -> Result<u64, ScalarError> {
        use crate::scalars::EvalTarget;
        Fp::embed(g, self.imaginary.as_ref(), &Fp::new(1, self.p)).map(|x| x.value() as u64)
    }

    fn poly(&self, poly: &Polynomial) -> Result<CPoly, ScalarError> {
        let mut terms = Vec::new();
        for (m, c) in poly.terms() {
            let c = self.coef(c)?;
            let mono = m
                .powers()
                .iter()
                .map(|(v, e)| {
                    self.slots
                        .get(v)
                        .map(|&s| (s, *e))
                        .ok_or_else(|| ScalarError::UnboundParameter(v.name()))
                })
                .collect::<Result<_, _>>()?;
            terms.push((c, mono));
        }
        Ok(CPoly(terms))
    }

    fn rat(&self, s: &Scalar) -> Result<CRat, ScalarError> {
        Ok(CRat {
            num: self.poly(s.numerator())?,
            den: s
                .denominator_factors()
                .iter()
                .map(|(d, e)| Ok((self.poly(d)?, *e)))
                .collect::<Result<_, ScalarError>>()?,
        })
    }
}

fn compile_family(f: &ParametricFamily, algebra_params: &[String], p: u32) -> Result<CompiledFamily, ScalarError> {
    let imaginary = sqrt_mod(p as u64 - 1, p as u64).map(|r| Fp::new(r as i64, p));
    let scalars: Vec<&Scalar> = f
        .matrix
        .rows()
        .iter()
        .flat_map(|r| r.coords().map(|(_, c)| c))
        .chain(&f.constraints)
        .chain(&f.side_conditions)
        .collect();
    let roots: BTreeSet<Var> = scalars.iter().flat_map(|s| s.roots()).collect();
    let mut slots = BTreeMap::new();
    for (idx, name) in f.params.iter().chain(algebra_params).enumerate() {
        slots.entry(Var::param(name)).or_insert(idx);
    }
    let base = f.params.len() + algebra_params.len();
    for (r, root) in roots.iter().enumerate() {
        slots.insert(root.clone(), base + r);
    }
    let c = Compiler { p, imaginary, slots };
    let radicands = roots
        .iter()
        .map(|r| match r.radicand() {
            Some(rad) => c.poly(rad),
            None => unreachable!("root variables carry a radicand"),
        })
        .collect::<Result<_, _>>()?;
    let n = f.dim();
    let dense = f.matrix.to_dense();
    let entries = (0..n * n).map(|k| c.rat(&dense[k / n][k % n])).collect::<Result<_, _>>()?;
    Ok(CompiledFamily {
        id: f.id.clone(),
        params: f.params.clone(),
        algebra_params: algebra_params.to_vec(),
        roots: radicands,
        entries,
        nonzero: f.constraints.iter().map(|s| c.rat(s)).collect::<Result<_, _>>()?,
        zero: f.side_conditions.iter().map(|s| c.rat(s)).collect::<Result<_, _>>()?,
    })
}

impl CompiledFamily {
    /// The matrix code at parameter point `code`, if the point is admissible.
    fn point(&self, code: u64, inst: &[u64], p: u32) -> Option<u64> {
        let p64 = p as u64;
        let k = self.params.len();
        let mut vals = vec![0u64; k + self.algebra_params.len() + self.roots.len()];
        let mut c = code;
        for v in vals[..k].iter_mut().rev() {
            *v = c % p64;
            c /= p64;
        }
        vals[k..k + inst.len()].copy_from_slice(inst);
        let base = k + inst.len();
        for (r, rad) in self.roots.iter().enumerate() {
            vals[base + r] = sqrt_mod(rad.eval(&vals, p64), p64)?;
        }
        for s in &self.nonzero {
            if s.eval(&vals, p64)? == 0 {
                return None;
            }
        }
        for s in &self.zero {
            if s.eval(&vals, p64)? != 0 {
                return None;
            }
        }
        let mut out = 0u64;
        for e in &self.entries {
            out = out * p64 + e.eval(&vals, p64)?;
        }
        Some(out)
    }

    fn assignment(&self, code: u64, p: u32) -> Vec<(String, u32)> {
        let mut vals = vec![0u32; self.params.len()];
        let mut c = code;
        for v in vals.iter_mut().rev() {
            *v = (c % p as u64) as u32;
            c /= p as u64;
        }
        self.params.iter().cloned().zip(vals).collect()
    }
}

/// Matrix codes of every admissible specialization of `f` at one instance of
/// its algebra, sorted and deduplicated.
pub fn family_points(
    a: &StructureConstants<Scalar>,
    f: &ParametricFamily,
    inst: &Instance,
    p: u32,
) -> Result<Vec<u64>, OracleError> {
    let cf = compile_family(f, &a.params, p)?;
    let points = check_space(p, cf.params.len())?;
    let inst_vals: Vec<u64> = a.params.iter().map(|k| inst.values[k] as u64).collect();
    let mut out: Vec<u64> = (0..points)
        .into_par_iter()
        .filter_map(|pt| cf.point(pt, &inst_vals, p))
        .collect();
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

fn serialize_len<S: Serializer, T>(v: &[T], s: S) -> Result<S::Ok, S::Error> {
    s.serialize_u64(v.len() as u64)
}

/// A solution explained by a family specialization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoverageMatch {
    pub solution: u64,
    /// Index into [`CoverageReport::families`].
    pub family: usize,
    /// Parameter point, encoded like a matrix code over the family parameters.
    pub assignment: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EmptyFamily {
    pub family: String,
    pub reason: String,
}

/// A family specialization that is not a solution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UnsoundPoint {
    pub family: String,
    pub assignment: Vec<(String, u32)>,
    pub matrix: String,
}

/// Comparison of the exhaustive solution set with the specializations of a
/// list of families, for one instance of the algebra.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverageReport {
    pub algebra: String,
    pub instance: BTreeMap<String, u32>,
    pub p: u32,
    pub dim: usize,
    pub total: usize,
    pub families: Vec<String>,
    #[serde(serialize_with = "serialize_len")]
    pub matched: Vec<CoverageMatch>,
    pub unmatched: Vec<FFMatrix>,
    pub empty_families: Vec<EmptyFamily>,
    /// Non-solution specializations per family, with up to
    /// [`UNSOUND_SAMPLES`] examples each.
    pub unsound_counts: BTreeMap<String, usize>,
    pub unsound: Vec<UnsoundPoint>,
    #[serde(skip)]
    params: Vec<Vec<String>>,
}

pub const UNSOUND_SAMPLES: usize = 5;

impl CoverageReport {
    pub fn is_sound(&self) -> bool {
        self.unsound_counts.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.unmatched.is_empty()
    }

    pub fn instance_label(&self) -> String {
        self.instance.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(" ")
    }

    /// `matrix <- family (n11=.., ...)`.
    pub fn describe_match(&self, m: &CoverageMatch) -> String {
        let mat = FFMatrix::from_code(m.solution, self.dim, self.p);
        let mut vals = vec![0u32; self.params[m.family].len()];
        let mut c = m.assignment;
        for v in vals.iter_mut().rev() {
            *v = (c % self.p as u64) as u32;
            c /= self.p as u64;
        }
        let asg: Vec<String> = self.params[m.family].iter().zip(vals).map(|(k, v)| format!("{k}={v}")).collect();
        format!("{mat} <- {} ({})", self.families[m.family], asg.join(" "))
    }
}

/// Exhaustive solutions against family specializations, one report per
/// admissible instance of the algebra parameters.
pub fn family_coverage(
    a: &StructureConstants<Scalar>,
    families: &[ParametricFamily],
    id: FfIdentity,
    p: u32,
) -> Result<Vec<CoverageReport>, OracleError> {
    let n = a.dim();
    check_space(p, n * n)?;
    let compiled: Vec<Result<CompiledFamily, ScalarError>> =
        families.iter().map(|f| compile_family(f, &a.params, p)).collect();
    let mut reports = Vec::new();
    for inst in instances(a, p)? {
        let table = DenseTable::new(&inst.constants, p);
        let solutions = enumerate_table(&table, id, p)?;
        let inst_vals: Vec<u64> = a.params.iter().map(|k| inst.values[k] as u64).collect();
        let mut first: Vec<Option<(usize, u64)>> = vec![None; solutions.len()];
        let mut empty = Vec::new();
        let mut unsound = Vec::new();
        let mut unsound_counts = BTreeMap::new();
        for (fi, cf) in compiled.iter().enumerate() {
            let cf = match cf {
                Ok(cf) => cf,
                Err(e) => {
                    empty.push(EmptyFamily {
                        family: families[fi].id.clone(),
                        reason: e.to_string(),
                    });
                    continue;
                }
            };
            let points = check_space(p, cf.params.len())?;
            let hits: Vec<(u64, u64)> = (0..points)
                .into_par_iter()
                .filter_map(|pt| cf.point(pt, &inst_vals, p).map(|m| (pt, m)))
                .collect();
            if hits.is_empty() {
                empty.push(EmptyFamily {
                    family: cf.id.clone(),
                    reason: format!("no admissible point over F_{p}"),
                });
                continue;
            }
            let mut bad = 0usize;
            for (pt, m) in hits {
                match solutions.binary_search(&m) {
                    Ok(idx) => {
                        first[idx].get_or_insert((fi, pt));
                    }
                    Err(_) => {
                        if bad < UNSOUND_SAMPLES {
                            unsound.push(UnsoundPoint {
                                family: cf.id.clone(),
                                assignment: cf.assignment(pt, p),
                                matrix: FFMatrix::from_code(m, n, p).to_string(),
                            });
                        }
                        bad += 1;
                    }
                }
            }
            if bad > 0 {
                unsound_counts.insert(cf.id.clone(), bad);
            }
        }
        let mut matched = Vec::new();
        let mut unmatched = Vec::new();
        for (s, f) in solutions.iter().zip(&first) {
            match f {
                Some((fi, pt)) => matched.push(CoverageMatch {
                    solution: *s,
                    family: *fi,
                    assignment: *pt,
                }),
                None => unmatched.push(FFMatrix::from_code(*s, n, p)),
            }
        }
        reports.push(CoverageReport {
            algebra: a.name.clone(),
            instance: inst.values.clone(),
            p,
            dim: n,
            total: solutions.len(),
            families: families.iter().map(|f| f.id.clone()).collect(),
            matched,
            unmatched,
            empty_families: empty,
            unsound_counts,
            unsound,
            params: families.iter().map(|f| f.params.clone()).collect(),
        });
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Vector;

    fn fp(x: i64) -> Fp {
        Fp::new(x, 5)
    }

    fn a5() -> StructureConstants<Fp> {
        // e1·e1 = e2
        let mut a = StructureConstants::new("A5", 2);
        a.set_product(0, 0, Vector::term(1, fp(1))).unwrap();
        a
    }

    #[test]
    fn codes_round_trip_in_row_major_order() {
        let m = FFMatrix::new(5, &[vec![1, 2], vec![3, 4]]);
        assert_eq!(m.code(), ((1 * 5 + 2) * 5 + 3) * 5 + 4);
        assert_eq!(FFMatrix::from_code(m.code(), 2, 5), m);
        assert_eq!(m.to_string(), "[[1, 2], [3, 4]]");
    }

    #[test]
    fn zero_product_accepts_everything() {
        let a = StructureConstants::<Fp>::new("A4", 2);
        assert_eq!(enumerate_nijenhuis_ff(&a, 5).unwrap().len(), 625);
    }

    #[test]
    fn a5_solutions_are_upper_triangular_scalars() {
        let sols = enumerate_nijenhuis_ff(&a5(), 5).unwrap();
        assert_eq!(sols.len(), 25);
        assert!(sols.iter().all(|m| m.entry(1, 0) == 0 && m.entry(0, 0) == m.entry(1, 1)));
    }

    #[test]
    fn guard_and_modulus_errors() {
        let a = StructureConstants::<Fp>::new("big", 4);
        assert!(matches!(
            enumerate_nijenhuis_ff(&a, 5),
            Err(OracleError::SearchSpaceTooLarge { .. })
        ));
        assert_eq!(
            enumerate_nijenhuis_ff(&a5(), 4).unwrap_err(),
            OracleError::NonPrimeModulus(4)
        );
    }

    #[test]
    fn dense_check_agrees_with_generic_residual() {
        use crate::operators::nijenhuis_residual;
        let a = a5();
        let table = DenseTable::new(&a, 5);
        for code in 0..625u64 {
            let m = FFMatrix::from_code(code, 2, 5);
            let op = m.to_operator();
            let generic = (0..2).all(|i| (0..2).all(|j| nijenhuis_residual(&a, &op, i, j).unwrap().is_zero()));
            let dense: Vec<u64> = m.entries().iter().map(|&e| e as u64).collect();
            assert_eq!(table.holds(FfIdentity::Nijenhuis, &dense), generic, "{m}");
        }
    }
}
