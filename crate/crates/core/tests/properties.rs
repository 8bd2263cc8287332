//! Property tests for the scalar field, the operator residuals, the coadjoint
//! construction and the text formats.

use proptest::prelude::*;

use nijenhuis::algebra::{BilinearProduct, StructureConstants, Vector};
use nijenhuis::catalog::{builtin, EntryKind};
use nijenhuis::formats::{parse_document, parse_scalar, print_algebra, print_family, AlgebraDef, Block, FamilyDef};
use nijenhuis::operators::{
    nijenhuis_residual, nijenhuis_residual_constants, rota_baxter_residual, validate_family, LinearOperator,
    OperatorKind, ParametricFamily,
};
use nijenhuis::oracle::{DenseTable, FFMatrix, FfIdentity};
use nijenhuis::report::{commutator_rb_failure, nijenhuis_split_failure};
use nijenhuis::scalars::{Assignment, Fp, GaussianRational as Q, Scalar};
use nijenhuis::yangbaxter::{coadjoint, semidirect_double};

const VARS: [&str; 3] = ["x", "y", "z"];

fn gauss() -> impl Strategy<Value = Q> {
    (-3i64..=3, 1i64..=3, -2i64..=2).prop_map(|(n, d, im)| Q::from_ratio(n, d) + Q::gaussian(0, im))
}

/// Up to three terms of degree at most two in x, y, z.
fn poly() -> impl Strategy<Value = Scalar> {
    prop::collection::vec((gauss(), 0usize..3, 0u32..3, 0usize..3, 0u32..2), 1..=3).prop_map(|terms| {
        terms.into_iter().fold(Scalar::ratio(0, 1), |acc, (c, v1, e1, v2, e2)| {
            let m = Scalar::param(VARS[v1]).pow(e1) * Scalar::param(VARS[v2]).pow(e2);
            acc + Scalar::constant(c) * m
        })
    })
}

/// A polynomial, or a quotient of polynomials, optionally times a square
/// root.
fn scalar() -> impl Strategy<Value = Scalar> {
    (poly(), prop::option::of(poly()), any::<bool>()).prop_map(|(n, d, root)| {
        let mut s = match d {
            Some(d) if !d.is_zero() => n.try_div(&d).expect("nonzero"),
            _ => n,
        };
        if root {
            s = s * Scalar::sqrt_of(&(Scalar::param("x") + Scalar::ratio(2, 1))).expect("root");
        }
        s
    })
}

fn rootless() -> impl Strategy<Value = Scalar> {
    (poly(), prop::option::of(poly())).prop_map(|(n, d)| match d {
        Some(d) if !d.is_zero() => n.try_div(&d).expect("nonzero"),
        _ => n,
    })
}

use num_traits::Zero;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn ring_axioms(a in scalar(), b in scalar(), c in scalar()) {
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert!((&a - &a).is_zero());
    }

    #[test]
    fn nonzero_scalars_are_invertible(a in scalar()) {
        prop_assume!(!a.is_zero());
        let inv = a.try_inv().unwrap();
        prop_assert_eq!(&a * &inv, Scalar::ratio(1, 1));
    }

    #[test]
    fn normal_form_is_stable(a in scalar()) {
        let once = &a * &Scalar::ratio(1, 1);
        let twice = &once * &Scalar::ratio(1, 1);
        prop_assert_eq!(format!("{once:?}"), format!("{twice:?}"));
        prop_assert_eq!(parse_scalar(&a.to_string()).unwrap(), a);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn substitution_is_a_homomorphism(a in rootless(), b in rootless(), vals in prop::array::uniform3(-4i64..=4)) {
        let asg = VARS.iter().zip(vals).fold(Assignment::exact(), |s, (v, x)| s.with(v, Q::from_integer(x)));
        let (Ok(x), Ok(y)) = (a.substitute(&asg), b.substitute(&asg)) else {
            return Err(TestCaseError::reject("denominator vanishes"));
        };
        prop_assert_eq!((&a + &b).substitute(&asg).unwrap(), x.clone() + y.clone());
        prop_assert_eq!((&a * &b).substitute(&asg).unwrap(), x * y);
    }
}

fn small_algebra(dim: usize) -> impl Strategy<Value = StructureConstants<Q>> {
    prop::collection::vec(prop::option::weighted(0.4, gauss()), dim * dim * dim).prop_map(move |cs| {
        let mut a = StructureConstants::new("R", dim);
        for i in 0..dim {
            for j in 0..dim {
                let v = Vector::from_coords(
                    (0..dim).filter_map(|k| cs[(i * dim + j) * dim + k].clone().map(|c| (k, c))),
                );
                if !v.is_zero() {
                    a.set_product(i, j, v).unwrap();
                }
            }
        }
        a
    })
}

fn small_operator(dim: usize) -> impl Strategy<Value = LinearOperator<Q>> {
    prop::collection::vec(gauss(), dim * dim)
        .prop_map(move |v| LinearOperator::from_dense(v.chunks(dim).map(|r| r.to_vec()).collect()).unwrap())
}

fn algebra_and_operator() -> impl Strategy<Value = (StructureConstants<Q>, LinearOperator<Q>)> {
    (2usize..=3).prop_flat_map(|n| (small_algebra(n), small_operator(n)))
}

fn pre_lie_catalog() -> Vec<StructureConstants<Q>> {
    builtin()
        .of_kind(EntryKind::Algebra)
        .filter_map(|e| builtin().algebra(&e.id).ok())
        .filter_map(|a| a.constants.map(|s| s.as_constant().ok_or(())).ok())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn residual_formulas_agree((a, n) in algebra_and_operator()) {
        for i in 0..a.dim() {
            for j in 0..a.dim() {
                prop_assert_eq!(nijenhuis_residual(&a, &n, i, j).unwrap(), nijenhuis_residual_constants(&a, &n, i, j).unwrap());
            }
        }
    }

    #[test]
    fn nijenhuis_residual_splits_on_catalog_algebras(
        k in 0usize..64,
        entries in prop::collection::vec(gauss(), 9),
        w in gauss(),
    ) {
        let algs = pre_lie_catalog();
        let a = &algs[k % algs.len()];
        let d = a.dim();
        let n = LinearOperator::from_dense((0..d).map(|i| entries[i * 3..i * 3 + d].to_vec()).collect()).unwrap();
        prop_assert_eq!(nijenhuis_split_failure(a, &n).unwrap(), None);
        let g = a.sub_adjacent().unwrap();
        prop_assert_eq!(commutator_rb_failure(a, &g, &n, &w).unwrap(), None);
    }
}

fn catalog_families() -> Vec<&'static FamilyDef> {
    builtin()
        .families(EntryKind::NijenhuisFamily)
        .chain(builtin().families(EntryKind::RbOperator))
        .collect()
}

fn family_algebra(f: &FamilyDef) -> StructureConstants<Scalar> {
    match f.kind {
        OperatorKind::Nijenhuis => builtin().algebra(&f.family.algebra).unwrap().constants.clone(),
        OperatorKind::RotaBaxter(_) => builtin().lie(&f.family.algebra).unwrap().into_constants(),
    }
}

fn with_matrix(f: &ParametricFamily, m: LinearOperator<Scalar>) -> ParametricFamily {
    ParametricFamily { matrix: m, ..f.clone() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    /// `c N` and `N + c Id` are Nijenhuis whenever `N` is; `c R` is a
    /// weight-zero Rota-Baxter operator whenever `R` is.
    #[test]
    fn scaling_and_shift_preserve_catalog_families(k in 0usize..1000, ci in 0usize..3) {
        let fams = catalog_families();
        let f = fams[k % fams.len()];
        let a = family_algebra(f);
        prop_assume!(validate_family(&a, &f.family, &f.kind).unwrap().passed());
        let c = [Scalar::ratio(2, 1), Scalar::i(), Scalar::ratio(-1, 3)][ci].clone();
        let scaled = with_matrix(&f.family, f.family.matrix.scale(&c));
        prop_assert!(validate_family(&a, &scaled, &f.kind).unwrap().passed(), "{} scaled by {}", f.family.id, c);
        if f.kind == OperatorKind::Nijenhuis {
            let shifted = with_matrix(&f.family, f.family.matrix.add(&LinearOperator::identity(a.dim()).scale(&c)));
            prop_assert!(validate_family(&a, &shifted, &f.kind).unwrap().passed(), "{} shifted by {}", f.family.id, c);
        }
    }

    #[test]
    fn dense_check_matches_generic_residuals(
        a in small_algebra(2),
        code in 0u64..625,
        weight in 0u32..5,
    ) {
        let p = 5;
        let fa = a.map(|q| Ok::<_, ()>(Fp::from_bigint(&(q.re().numer() * q.re().denom()), p))).unwrap();
        let table = DenseTable::new(&fa, p);
        let m = FFMatrix::from_code(code, 2, p);
        let op = m.to_operator();
        let dense: Vec<u64> = m.entries().iter().map(|&e| e as u64).collect();
        let nij = (0..2).all(|i| (0..2).all(|j| nijenhuis_residual(&fa, &op, i, j).unwrap().is_zero()));
        prop_assert_eq!(table.holds(FfIdentity::Nijenhuis, &dense), nij);
        let w = Fp::new(weight as i64, p);
        let rb = (0..2).all(|i| (0..2).all(|j| rota_baxter_residual(&fa, &op, &w, i, j).unwrap().is_zero()));
        prop_assert_eq!(table.holds(FfIdentity::RotaBaxter(weight), &dense), rb);
    }

    #[test]
    fn algebras_round_trip_through_text(a in (2usize..=3).prop_flat_map(small_algebra)) {
        let constants = a.map(|q| Ok::<_, ()>(Scalar::constant(q.clone()))).unwrap();
        let def = AlgebraDef { constants, is_lie: false, flags: vec!["associative".to_string()] };
        let blocks = parse_document(&print_algebra(&def)).unwrap();
        prop_assert_eq!(blocks, vec![Block::Algebra(def)]);
    }
}

#[test]
fn catalog_families_round_trip_through_text() {
    for f in catalog_families() {
        let blocks = parse_document(&print_family(f)).unwrap();
        assert_eq!(blocks, vec![Block::Family(f.clone())], "{}", f.family.id);
    }
}

#[test]
fn coadjoint_is_a_representation_and_respects_the_pairing() {
    for e in builtin().of_kind(EntryKind::LieAlgebra) {
        let l = builtin().lie(&e.id).unwrap();
        let n = l.dim();
        let ad = coadjoint(&l);
        for i in 0..n {
            for j in 0..n {
                let br = l.product_basis(i, j);
                for k in 0..n {
                    let xi = Vector::basis(k);
                    let lhs = ad[i].apply(&ad[j].apply(&xi)).sub(&ad[j].apply(&ad[i].apply(&xi)));
                    let mut rhs = Vector::zero();
                    for (t, c) in br.coords() {
                        rhs.add_scaled(c, &ad[t].apply(&xi));
                    }
                    assert_eq!(lhs, rhs, "{}: rho([e{}, e{}]) on e{}*", e.id, i + 1, j + 1, k + 1);
                    // <ad*_{e_i} e_k*, e_j> = -<e_k*, [e_i, e_j]>
                    assert_eq!(ad[i].apply(&xi).get(j), -br.get(k), "{}: pairing", e.id);
                }
            }
        }
    }
}

#[test]
fn doubles_satisfy_jacobi_on_every_triple() {
    for e in builtin().of_kind(EntryKind::LieAlgebra) {
        let d = semidirect_double(&builtin().lie(&e.id).unwrap()).unwrap();
        let m = d.total.dim();
        for i in 0..m {
            for j in 0..m {
                assert_eq!(d.total.product_basis(i, j), d.total.product_basis(j, i).neg(), "{}", e.id);
                for k in 0..m {
                    assert!(d.total.jacobi_residual(i, j, k).unwrap().is_zero(), "{}", e.id);
                }
            }
        }
    }
}
