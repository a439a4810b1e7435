//! Harmonicity of the almost complex structure.
//!
//! The ground truth is the commutator [J, nabla*nabla J] = 0. On an almost
//! abelian algebra this is equivalent to two closed-form conditions on the
//! split of L:
//!
//!   (i)  mu gamma + D_s gamma - (Tr S) rho - J' D_a J' rho = 0,
//!   (ii) D_a J' D_a J' - J' D_a J' D_a + (Tr S) [D_a, J'] J' = 0,
//!
//! with specializations for unimodular algebras, integrable J, and dimension
//! four. Every method reports the residual norms it decided on.

use std::collections::BTreeMap;

use crate::algebra::{ComplexStructure, Decomposition};
use crate::error::{Error, Result};
use crate::mat::{dot, vec_norm_f64, vec_scale, vec_sub, Mat};
use crate::scalar::{Scalar, ZeroTest};
use crate::tensors::{harmonic_commutator, NijenhuisClosed};

/// Which characterization produced a verdict.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    General,
    Unimodular,
    Integrable,
    Dim4,
    Oracle,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::General => "general",
            Method::Unimodular => "unimodular",
            Method::Integrable => "integrable",
            Method::Dim4 => "dim4",
            Method::Oracle => "oracle",
        }
    }
}

/// Verdict plus the residual norm of each condition it evaluated.
#[derive(Clone, Debug)]
pub struct HarmonicVerdict {
    pub harmonic: bool,
    pub method: Method,
    pub residuals: BTreeMap<String, f64>,
}

fn verdict_from(method: Method, parts: Vec<(&str, f64, bool)>) -> HarmonicVerdict {
    let mut residuals = BTreeMap::new();
    let mut ok = true;
    for (name, norm, zero) in parts {
        residuals.insert(name.to_string(), norm);
        ok &= zero;
    }
    HarmonicVerdict { harmonic: ok, method, residuals }
}

/// Condition (i) as a vector of a.
fn condition_i<S: Scalar>(dec: &Decomposition<S>, jp: &Mat<S>) -> Vec<S> {
    let mut v = vec_scale(&dec.gamma, &dec.mu);
    v = crate::mat::vec_add(&v, &dec.ds.mul_vec(&dec.gamma));
    v = vec_sub(&v, &vec_scale(&dec.rho, &dec.tr_s()));
    let jdjr = jp.mul_vec(&dec.da.mul_vec(&jp.mul_vec(&dec.rho)));
    vec_sub(&v, &jdjr)
}

/// Condition (ii) as a matrix on a.
fn condition_ii<S: Scalar>(dec: &Decomposition<S>, jp: &Mat<S>) -> Mat<S> {
    let daj = dec.da.matmul(jp);
    let jda = jp.matmul(&dec.da);
    let lhs = daj.matmul(&daj).sub(&jda.matmul(&jda));
    let comm_j = dec.da.commutator(jp).matmul(jp).scale(&dec.tr_s());
    lhs.add(&comm_j)
}

/// The main characterization: conditions (i) and (ii) verbatim.
pub fn is_harmonic_general<S: Scalar>(
    dec: &Decomposition<S>,
    cs: &ComplexStructure<S>,
) -> Result<HarmonicVerdict> {
    let jp = cs.jprime()?;
    let zt = dec.zero_test();
    let c1 = condition_i(dec, jp);
    let c2 = condition_ii(dec, jp);
    let c2v: Vec<S> = c2.iter().cloned().collect();
    Ok(verdict_from(
        Method::General,
        vec![
            ("i", vec_norm_f64(&c1), zt.slice_is_zero(&c1)),
            ("ii", c2.norm_f64(), zt.slice_is_zero(&c2v)),
        ],
    ))
}

/// Norms of the two general conditions; used by sweeps that only need sizes.
pub fn general_residuals<S: Scalar>(
    dec: &Decomposition<S>,
    cs: &ComplexStructure<S>,
) -> Result<(f64, f64)> {
    let jp = cs.jprime()?;
    Ok((vec_norm_f64(&condition_i(dec, jp)), condition_ii(dec, jp).norm_f64()))
}

/// Unimodular specialization: (i') mu gamma + D_s gamma - J'D_aJ' rho = 0 and
/// (ii') D_aJ'D_aJ' = J'D_aJ'D_a. Requires Tr L = 0.
pub fn is_harmonic_unimodular<S: Scalar>(
    dec: &Decomposition<S>,
    cs: &ComplexStructure<S>,
) -> Result<HarmonicVerdict> {
    let zt = dec.zero_test();
    let tr = dec.l.trace();
    if !zt.scalar_is_zero(&tr) {
        return Err(Error::precondition(format!(
            "unimodular method requires Tr L = 0, got Tr L = {}",
            tr.to_f64()
        )));
    }
    let jp = cs.jprime()?;
    let mut c1 = vec_scale(&dec.gamma, &dec.mu);
    c1 = crate::mat::vec_add(&c1, &dec.ds.mul_vec(&dec.gamma));
    let jdjr = jp.mul_vec(&dec.da.mul_vec(&jp.mul_vec(&dec.rho)));
    c1 = vec_sub(&c1, &jdjr);

    let daj = dec.da.matmul(jp);
    let jda = jp.matmul(&dec.da);
    let c2 = daj.matmul(&daj).sub(&jda.matmul(&jda));
    let c2v: Vec<S> = c2.iter().cloned().collect();
    Ok(verdict_from(
        Method::Unimodular,
        vec![
            ("i", vec_norm_f64(&c1), zt.slice_is_zero(&c1)),
            ("ii", c2.norm_f64(), zt.slice_is_zero(&c2v)),
        ],
    ))
}

/// Integrable specialization: Dv0 = (Tr D) v0. Requires w0 = 0 and
/// [D, J'] = 0; on unimodular input the equivalent form L^2 e1 = mu^2 e1 is
/// also evaluated and must agree.
pub fn is_harmonic_integrable<S: Scalar>(
    dec: &Decomposition<S>,
    cs: &ComplexStructure<S>,
) -> Result<HarmonicVerdict> {
    let zt = dec.zero_test();
    let closed = NijenhuisClosed::new(dec, cs)?;
    if !closed.is_integrable(dec) {
        let (w0, comm) = closed.integrability_residuals(dec);
        return Err(Error::precondition(format!(
            "integrable method requires N = 0; integrability residuals |w0| = {:.3e}, |[D,J']| = {:.3e}",
            vec_norm_f64(&w0),
            comm.norm_f64()
        )));
    }
    let res = vec_sub(&dec.d.mul_vec(&dec.v0), &vec_scale(&dec.v0, &dec.tr_d()));
    let harmonic = zt.slice_is_zero(&res);
    let mut parts = vec![("Dv0 - (TrD)v0", vec_norm_f64(&res), harmonic)];

    if zt.scalar_is_zero(&dec.l.trace()) {
        // L^2 e1 = mu^2 e1, an equivalent statement when unimodular
        let e1 = crate::mat::basis_vector::<S>(2 * dec.n - 1, 0);
        let l2e1 = dec.l.mul_vec(&dec.l.mul_vec(&e1));
        let target = vec_scale(&e1, &(dec.mu.clone() * &dec.mu));
        let res2 = vec_sub(&l2e1, &target);
        let agrees = zt.slice_is_zero(&res2);
        if agrees != harmonic {
            return Err(Error::inconsistent(format!(
                "integrable criteria disagree: |Dv0-(TrD)v0| = {:.3e} but |L^2e1 - mu^2 e1| = {:.3e}",
                vec_norm_f64(&res),
                vec_norm_f64(&res2)
            )));
        }
        parts.push(("L^2 e1 - mu^2 e1", vec_norm_f64(&res2), agrees));
    }
    Ok(verdict_from(Method::Integrable, parts))
}

/// Dimension-four криterion on L = [[mu,r,s],[p,a,b],[q,c,d]]:
///
///   bq + cs - d(p + r) = 0   and   cp + br - a(q + s) = 0.
///
/// These are the unimodular specialization in coordinates; for almost Kaehler
/// inputs (p = q = 0, a + d = 0) the refinement cs + ar = 0, br - as = 0 is
/// also reported.
pub fn is_harmonic_dim4<S: Scalar>(l: &Mat<S>, zt: ZeroTest) -> Result<HarmonicVerdict> {
    if l.nrows() != 3 || l.ncols() != 3 {
        return Err(Error::precondition(format!(
            "dim4 method requires a 3x3 matrix (n = 2), got {}x{}",
            l.nrows(),
            l.ncols()
        )));
    }
    let (r, s) = (l[(0, 1)].clone(), l[(0, 2)].clone());
    let (p, a, b) = (l[(1, 0)].clone(), l[(1, 1)].clone(), l[(1, 2)].clone());
    let (q, c, d) = (l[(2, 0)].clone(), l[(2, 1)].clone(), l[(2, 2)].clone());

    let e1 = b.clone() * &q + c.clone() * &s - d.clone() * &(p.clone() + &r);
    let e2 = c.clone() * &p + b.clone() * &r - a.clone() * &(q.clone() + &s);
    let h1 = zt.scalar_is_zero(&e1);
    let h2 = zt.scalar_is_zero(&e2);
    let mut parts = vec![
        ("bq + cs - d(p+r)", e1.to_f64().abs(), h1),
        ("cp + br - a(q+s)", e2.to_f64().abs(), h2),
    ];

    let almost_kaehler = zt.scalar_is_zero(&p)
        && zt.scalar_is_zero(&q)
        && zt.scalar_is_zero(&(a.clone() + &d));
    if almost_kaehler {
        let k1 = c.clone() * &s + a.clone() * &r;
        let k2 = b * &r - a * &s;
        parts.push(("aK: cs + ar", k1.to_f64().abs(), zt.scalar_is_zero(&k1)));
        parts.push(("aK: br - as", k2.to_f64().abs(), zt.scalar_is_zero(&k2)));
    }
    // verdict from the two displayed equations only
    let mut v = verdict_from(Method::Dim4, parts);
    v.harmonic = h1 && h2;
    Ok(v)
}

/// Ground-truth oracle: harmonic iff [J, nabla*nabla J] = 0.
pub fn is_harmonic_oracle<S: Scalar>(
    dec: &Decomposition<S>,
    cs: &ComplexStructure<S>,
) -> HarmonicVerdict {
    let zt = dec.zero_test();
    let h = harmonic_commutator(dec, cs);
    let hv: Vec<S> = h.iter().cloned().collect();
    verdict_from(
        Method::Oracle,
        vec![("|[J, nabla*nabla J]|/2", h.norm_f64(), zt.slice_is_zero(&hv))],
    )
}

/// The general closed form checked against the oracle; a disagreement is an
/// internal-consistency error, never resolved silently.
pub fn decide_harmonic<S: Scalar>(
    dec: &Decomposition<S>,
    cs: &ComplexStructure<S>,
) -> Result<HarmonicVerdict> {
    let general = is_harmonic_general(dec, cs)?;
    let oracle = is_harmonic_oracle(dec, cs);
    if general.harmonic != oracle.harmonic {
        return Err(Error::inconsistent(format!(
            "closed-form harmonicity ({}) disagrees with the commutator oracle ({}); residuals {:?} vs {:?}",
            general.harmonic, oracle.harmonic, general.residuals, oracle.residuals
        )));
    }
    Ok(general)
}

/// Theorem conditions for an arbitrary compatible J, evaluated in the
/// splitting u = R(Je0) + (Je0)^perp that J itself induces. Returns the
/// residual norms of (i) and (ii). Float only; used to certify flow limits.
pub fn adapted_residuals(l: &Mat<f64>, n: usize, j: &Mat<f64>) -> (f64, f64) {
    let m = 2 * n;
    debug_assert_eq!(j.nrows(), m);
    // e1' = J e0 lies in u automatically (J skew); split u along it.
    let e0 = crate::mat::basis_vector::<f64>(m, 0);
    let e1p = j.mul_vec(&e0);

    // Projector P onto a' = span{e0, e1'}^perp, as a matrix on g.
    let mut proj = Mat::<f64>::identity(m);
    for i in 0..m {
        for k in 0..m {
            proj[(i, k)] -= e0[i] * e0[k] + e1p[i] * e1p[k];
        }
    }
    // L extended to g with L e0 = 0.
    let mut lg = Mat::<f64>::zeros(m, m);
    lg.set_block(1, 1, l);
    let s = lg.sym_part();
    let a = lg.skew_part();

    let mu = dot(&lg.mul_vec(&e1p), &e1p);
    let tr_s = l.trace();
    let gamma = proj.mul_vec(&s.mul_vec(&e1p));
    let rho = proj.mul_vec(&a.mul_vec(&e1p));
    let ds = proj.matmul(&s).matmul(&proj);
    let da = proj.matmul(&a).matmul(&proj);
    let jp = proj.matmul(j).matmul(&proj);

    let mut c1 = vec_scale(&gamma, &mu);
    c1 = crate::mat::vec_add(&c1, &ds.mul_vec(&gamma));
    c1 = vec_sub(&c1, &vec_scale(&rho, &tr_s));
    c1 = vec_sub(&c1, &jp.mul_vec(&da.mul_vec(&jp.mul_vec(&rho))));

    let daj = da.matmul(&jp);
    let jda = jp.matmul(&da);
    let mut c2 = daj.matmul(&daj).sub(&jda.matmul(&jda));
    // [D_a, J'] J' restricted to a'
    let comm = da.commutator(&jp).matmul(&jp);
    c2 = c2.add(&comm.scale(&tr_s));
    let c2 = proj.matmul(&c2).matmul(&proj);

    (vec_norm_f64(&c1), c2.norm_f64())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::AlgebraSpec;
    use crate::scalar::{Exact, ScalarContext};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn spec_from(l: Vec<Vec<f64>>, n: usize) -> AlgebraSpec<f64> {
        AlgebraSpec::new(n, Mat::from_rows(l), ScalarContext::default()).unwrap()
    }

    fn l0() -> AlgebraSpec<f64> {
        spec_from(vec![vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 0.0]], 2)
    }

    #[test]
    fn general_on_the_w_example_and_friends() {
        let cs = ComplexStructure::standard(2).unwrap();
        let v = is_harmonic_general(&l0().decompose(), &cs).unwrap();
        assert!(v.harmonic);
        let lint = spec_from(vec![vec![0.0; 3], vec![1.0, 0.0, -1.0], vec![0.0, 1.0, 0.0]], 2);
        let v = is_harmonic_general(&lint.decompose(), &cs).unwrap();
        assert!(!v.harmonic);
        assert!(v.residuals["i"] > 0.1);
        let zero = spec_from(vec![vec![0.0; 3]; 3], 2);
        assert!(is_harmonic_general(&zero.decompose(), &cs).unwrap().harmonic);
    }

    #[test]
    fn unimodular_specialization() {
        let cs = ComplexStructure::standard(2).unwrap();
        // Kodaira-Thurston
        let kt = spec_from(vec![vec![0.0; 3], vec![0.0; 3], vec![0.0, 1.0, 0.0]], 2);
        assert!(is_harmonic_unimodular(&kt.decompose(), &cs).unwrap().harmonic);
        // 3-step nilpotent example
        let nil = spec_from(vec![vec![0.0, 1.0, 0.0], vec![0.0; 3], vec![1.0, 0.0, 0.0]], 2);
        assert!(is_harmonic_unimodular(&nil.decompose(), &cs).unwrap().harmonic);
        // rejects non-unimodular input, naming the trace
        let id = spec_from(vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]], 2);
        let err = is_harmonic_unimodular(&id.decompose(), &cs).unwrap_err();
        assert!(matches!(err, Error::Precondition(ref m) if m.contains("Tr L")));
    }

    #[test]
    fn unimodular_agrees_with_general_on_random_traceless() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        for _ in 0..50 {
            let n = rng.gen_range(2..=4usize);
            let m = 2 * n - 1;
            let mut l = Mat::from_fn(m, m, |_, _| rng.gen_range(-2.0..2.0));
            let shift = l.trace() / m as f64;
            for i in 0..m {
                l[(i, i)] -= shift;
            }
            let spec = AlgebraSpec::new(n, l, ScalarContext::default()).unwrap();
            let cs = ComplexStructure::standard(n).unwrap();
            let dec = spec.decompose();
            let a = is_harmonic_general(&dec, &cs).unwrap().harmonic;
            let b = is_harmonic_unimodular(&dec, &cs).unwrap().harmonic;
            assert_eq!(a, b);
        }
    }

    #[test]
    fn integrable_specialization() {
        let cs = ComplexStructure::standard(2).unwrap();
        // integrable non-harmonic: Dv0 = (0,1) != 0 = (TrD) v0
        let lint = spec_from(vec![vec![0.0; 3], vec![1.0, 0.0, -1.0], vec![0.0, 1.0, 0.0]], 2);
        let v = is_harmonic_integrable(&lint.decompose(), &cs).unwrap();
        assert!(!v.harmonic);
        // v0 = 0 integrable is harmonic trivially
        let l = spec_from(vec![vec![0.0; 3], vec![0.0, 0.0, -1.0], vec![0.0, 1.0, 0.0]], 2);
        assert!(is_harmonic_integrable(&l.decompose(), &cs).unwrap().harmonic);
        // precondition failure carries integrability residuals
        let err = is_harmonic_integrable(&l0().decompose(), &cs).unwrap_err();
        assert!(matches!(err, Error::Precondition(ref m) if m.contains("w0")));
    }

    #[test]
    fn dim4_criterion() {
        let zt = ZeroTest::new(1e-9, 1.0);
        // L1: almost Kaehler and harmonic
        let l1 = Mat::from_rows(vec![vec![0.0; 3], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, -1.0]]);
        let v = is_harmonic_dim4(&l1, zt).unwrap();
        assert!(v.harmonic);
        assert!(v.residuals.contains_key("aK: cs + ar"));
        // L2: almost Kaehler, not harmonic: bq + cs - d(p+r) = 1
        let l2 = Mat::from_rows(vec![vec![0.0, 1.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, -1.0]]);
        let v = is_harmonic_dim4(&l2, zt).unwrap();
        assert!(!v.harmonic);
        assert!((v.residuals["bq + cs - d(p+r)"] - 1.0).abs() < 1e-12);
        // zero matrix trivially harmonic
        assert!(is_harmonic_dim4(&Mat::<f64>::zeros(3, 3), zt).unwrap().harmonic);
        // wrong size rejected
        assert!(is_harmonic_dim4(&Mat::<f64>::zeros(5, 5), zt).is_err());
    }

    #[test]
    fn dim4_agrees_with_general_on_unimodular_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let cs = ComplexStructure::standard(2).unwrap();
        for _ in 0..100 {
            let mut l = Mat::from_fn(3, 3, |_, _| rng.gen_range(-2.0..2.0));
            let shift = l.trace() / 3.0;
            for i in 0..3 {
                l[(i, i)] -= shift;
            }
            let spec = AlgebraSpec::new(2, l.clone(), ScalarContext::default()).unwrap();
            let dec = spec.decompose();
            let a = is_harmonic_general(&dec, &cs).unwrap().harmonic;
            let b = is_harmonic_dim4(&l, dec.zero_test()).unwrap().harmonic;
            assert_eq!(a, b);
        }
    }

    #[test]
    fn oracle_equals_general_on_random_sweep() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..100 {
            let n = rng.gen_range(2..=4usize);
            let l = Mat::from_fn(2 * n - 1, 2 * n - 1, |_, _| rng.gen_range(-2.0..2.0));
            let spec = AlgebraSpec::new(n, l, ScalarContext::default()).unwrap();
            let cs = ComplexStructure::standard(n).unwrap();
            let dec = spec.decompose();
            assert!(decide_harmonic(&dec, &cs).is_ok());
        }
    }

    #[test]
    fn condition_ii_vanishes_identically_in_dim4() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let cs = ComplexStructure::standard(2).unwrap();
        for _ in 0..200 {
            let l = Mat::from_fn(3, 3, |_, _| rng.gen_range(-5.0..5.0));
            let spec = AlgebraSpec::new(2, l, ScalarContext::default()).unwrap();
            let (_, r2) = general_residuals(&spec.decompose(), &cs).unwrap();
            assert!(r2 < 1e-12);
        }
    }

    #[test]
    fn exact_mode_verdicts_are_exact() {
        let rat = |p: i64, q: i64| Exact::from_ratio(p, q);
        let l = Mat::from_rows(vec![
            vec![rat(0, 1), rat(1, 1), rat(0, 1)],
            vec![rat(1, 1), rat(0, 1), rat(0, 1)],
            vec![rat(0, 1), rat(0, 1), rat(0, 1)],
        ]);
        let spec = AlgebraSpec::new(2, l, ScalarContext::exact()).unwrap();
        let cs = ComplexStructure::<Exact>::standard(2).unwrap();
        let v = decide_harmonic(&spec.decompose(), &cs).unwrap();
        assert!(v.harmonic);
        assert_eq!(v.residuals["i"], 0.0);
    }

    #[test]
    fn adapted_residuals_match_standard_split_for_standard_j() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        for _ in 0..30 {
            let n = rng.gen_range(2..=3usize);
            let l = Mat::from_fn(2 * n - 1, 2 * n - 1, |_, _| rng.gen_range(-2.0..2.0));
            let spec = AlgebraSpec::new(n, l.clone(), ScalarContext::default()).unwrap();
            let cs = ComplexStructure::standard(n).unwrap();
            let (r1, r2) = general_residuals(&spec.decompose(), &cs).unwrap();
            let (a1, a2) = adapted_residuals(&l, n, &cs.j);
            assert!((r1 - a1).abs() < 1e-10, "{r1} vs {a1}");
            assert!((r2 - a2).abs() < 1e-10, "{r2} vs {a2}");
        }
    }
}
