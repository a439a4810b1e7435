//! Property-based invariants. Exact-rational algebras make the algebraic
//! identities literal equalities, so these run without tolerances.

use proptest::prelude::*;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use solvharm_core::algebra::basis;
use solvharm_core::lattice::{smith_normal_form, IntMat};
use solvharm_core::mat::{vec_add, vec_sub};
use solvharm_core::scalar::{Exact, Scalar, ScalarContext};
use solvharm_core::{AlgebraSpec, ComplexStructure, Mat};

fn rational() -> impl Strategy<Value = Exact> {
    (-12i64..=12, 1i64..=4).prop_map(|(p, q)| Exact::from_ratio(p, q))
}

fn algebra(n: usize) -> impl Strategy<Value = AlgebraSpec<Exact>> {
    let m = 2 * n - 1;
    proptest::collection::vec(rational(), m * m).prop_map(move |cells| {
        let l = Mat::from_fn(m, m, |i, j| cells[i * m + j].clone());
        AlgebraSpec::new(n, l, ScalarContext::exact()).unwrap()
    })
}

fn g_vector(n: usize) -> impl Strategy<Value = Vec<Exact>> {
    proptest::collection::vec(rational(), 2 * n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn decomposition_reassembles_exactly(spec in (2usize..=4).prop_flat_map(algebra)) {
        let dec = spec.decompose();
        prop_assert_eq!(dec.reassemble(), spec.l.clone());
        // S + A = L, S symmetric, A skew
        prop_assert_eq!(dec.s.add(&dec.a), spec.l.clone());
        prop_assert_eq!(dec.s.transpose(), dec.s.clone());
        prop_assert_eq!(dec.a.transpose(), dec.a.neg());
        // gamma + rho = v0, gamma - rho = w0
        prop_assert_eq!(vec_add(&dec.gamma, &dec.rho), dec.v0.clone());
        prop_assert_eq!(vec_sub(&dec.gamma, &dec.rho), dec.w0.clone());
    }

    #[test]
    fn bracket_is_antisymmetric_and_satisfies_jacobi(
        (spec, x, y, z) in (2usize..=3).prop_flat_map(|n| (algebra(n), g_vector(n), g_vector(n), g_vector(n)))
    ) {
        let neg_yx: Vec<Exact> = spec.bracket(&y, &x).iter().map(|v| -v.clone()).collect();
        prop_assert_eq!(spec.bracket(&x, &y), neg_yx);
        // [[x,y],z] + [[y,z],x] + [[z,x],y] = 0, exactly
        let j1 = spec.bracket(&spec.bracket(&x, &y), &z);
        let j2 = spec.bracket(&spec.bracket(&y, &z), &x);
        let j3 = spec.bracket(&spec.bracket(&z, &x), &y);
        let total = vec_add(&vec_add(&j1, &j2), &j3);
        prop_assert!(total.iter().all(Scalar::is_exact_zero));
    }

    #[test]
    fn standard_structure_is_an_anti_involution(n in 2usize..=5) {
        let cs = ComplexStructure::<Exact>::standard(n).unwrap();
        let m = 2 * n;
        prop_assert_eq!(cs.j.matmul(&cs.j), Mat::identity(m).neg());
        prop_assert_eq!(cs.j.transpose(), cs.j.neg());
        // J e_{2i} = e_{2i+1}
        for i in 0..n {
            prop_assert_eq!(cs.j.mul_vec(&basis::<Exact>(n, 2 * i)), basis::<Exact>(n, 2 * i + 1));
        }
    }

    #[test]
    fn smith_form_reassembles_with_divisibility(
        (size, cells) in (1usize..=5).prop_flat_map(|s| (Just(s), proptest::collection::vec(-30i64..=30, s * s)))
    ) {
        let rows: Vec<Vec<i64>> = (0..size).map(|i| cells[i * size..(i + 1) * size].to_vec()).collect();
        let m = IntMat::from_i64_rows(&rows);
        let snf = smith_normal_form(&m);
        prop_assert_eq!(snf.u.matmul(&m).matmul(&snf.v), snf.d.clone());
        prop_assert_eq!(snf.u.det().abs(), BigInt::one());
        prop_assert_eq!(snf.v.det().abs(), BigInt::one());
        let factors = snf.invariant_factors();
        for w in factors.windows(2) {
            if w[0].is_zero() {
                prop_assert!(w[1].is_zero());
            } else if !w[1].is_zero() {
                prop_assert!((&w[1] % &w[0]).is_zero());
            }
            prop_assert!(!w[0].is_negative() && !w[1].is_negative());
        }
    }

    #[test]
    fn exact_harmonicity_routes_agree(spec in (2usize..=3).prop_flat_map(algebra)) {
        use solvharm_core::harmonic::decide_harmonic;
        let cs = ComplexStructure::<Exact>::standard(spec.n).unwrap();
        // decide_harmonic errors if the closed form and the oracle split
        decide_harmonic(&spec.decompose(), &cs).unwrap();
    }
}
