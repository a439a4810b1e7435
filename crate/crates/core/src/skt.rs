//! SKT (strong Kaehler with torsion) structures and their harmonicity.
//!
//! The structure is SKT iff w0 = 0, [D, J'] = 0, [D, D^t] = 0 and every
//! eigenvalue of D has real part 0 or -mu/2. For an SKT structure {J', D_s,
//! D_a} is a commuting family of normal operators, so an orthonormal basis of
//! a exists in which J' is the standard block form and D is block diagonal
//! with blocks [[a_i, -b_i], [b_i, a_i]], a_i in {0, -mu/2}.
//!
//! SKT implies integrable, so J is harmonic iff Dv0 = (Tr D) v0, which splits
//! into two mutually exclusive cases: v0 = 0, or v0 != 0 with D in u(n-1) and
//! v0 in Ker D.

use std::collections::BTreeMap;

use crate::algebra::{ComplexStructure, Decomposition};
use crate::error::{Error, Result};
use crate::harmonic::{is_harmonic_oracle, Method};
use crate::mat::{dot, vec_norm_f64, vec_scale, vec_sub, Mat};
use crate::scalar::Scalar;

/// Which clause of the harmonicity proposition applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SktHarmonicCase {
    /// Input is not SKT, so the proposition does not speak.
    NotApplicable,
    /// v0 = 0.
    CaseI,
    /// v0 != 0, D in u(n-1) and Dv0 = 0.
    CaseII,
    NotHarmonic,
}

impl SktHarmonicCase {
    pub fn name(&self) -> &'static str {
        match self {
            SktHarmonicCase::NotApplicable => "not-applicable",
            SktHarmonicCase::CaseI => "case-i",
            SktHarmonicCase::CaseII => "case-ii",
            SktHarmonicCase::NotHarmonic => "not-harmonic",
        }
    }
}

/// SKT decision with the residual of every clause.
#[derive(Clone, Debug)]
pub struct SktVerdict {
    pub skt: bool,
    pub reasons: BTreeMap<String, f64>,
    pub eigen_real_parts: Vec<f64>,
    pub harmonic_case: SktHarmonicCase,
}

/// Real parts of the eigenvalues of D, sorted; reporting data, never the
/// basis of a verdict. Exact block-diagonal inputs are read off their 2x2
/// blocks, everything else goes through a float Schur decomposition.
fn eigen_real_parts<S: Scalar>(dec: &Decomposition<S>) -> Vec<f64> {
    let mut out: Vec<f64> = if S::EXACT {
        match read_blocks(dec) {
            Some(blocks) => blocks.iter().flat_map(|(a, _)| [a.to_f64(); 2]).collect(),
            None => {
                dec.d.to_f64().to_na().complex_eigenvalues().iter().map(|z| z.re).collect()
            }
        }
    } else {
        dec.d.to_f64().to_na().complex_eigenvalues().iter().map(|z| z.re).collect()
    };
    out.sort_by(f64::total_cmp);
    out
}

/// If D is 2x2 block diagonal along the standard pairing with blocks
/// [[a,-b],[b,a]], return the (a_i, b_i); otherwise None.
fn read_blocks<S: Scalar>(dec: &Decomposition<S>) -> Option<Vec<(S, S)>> {
    let k = 2 * dec.n - 2;
    let zt = dec.zero_test();
    let mut blocks = Vec::new();
    for p in (0..k).step_by(2) {
        let a = dec.d[(p, p)].clone();
        let b = dec.d[(p + 1, p)].clone();
        if !zt.scalar_is_zero(&(dec.d[(p + 1, p + 1)].clone() - &a))
            || !zt.scalar_is_zero(&(dec.d[(p, p + 1)].clone() + &b))
        {
            return None;
        }
        blocks.push((a, b));
    }
    // off-block entries must vanish
    for i in 0..k {
        for j in 0..k {
            if i / 2 != j / 2 && !zt.scalar_is_zero(&dec.d[(i, j)]) {
                return None;
            }
        }
    }
    Some(blocks)
}

/// Decide the SKT property clause by clause.
pub fn is_skt<S: Scalar>(dec: &Decomposition<S>, cs: &ComplexStructure<S>) -> Result<SktVerdict> {
    let jp = cs.jprime()?;
    let zt = dec.zero_test();

    let w0_norm = vec_norm_f64(&dec.w0);
    let w0_ok = zt.slice_is_zero(&dec.w0);

    let comm = dec.d.commutator(jp);
    let comm_v: Vec<S> = comm.iter().cloned().collect();
    let comm_ok = zt.slice_is_zero(&comm_v);

    let normality = dec.d.commutator(&dec.d.transpose());
    let normality_v: Vec<S> = normality.iter().cloned().collect();
    let normal_ok = zt.slice_is_zero(&normality_v);

    // Under normality the real parts of the eigenvalues of D are exactly the
    // eigenvalues of D_s, so the spectrum clause is the algebraic identity
    // D_s (D_s + (mu/2) I) = 0: symmetric matrices have squarefree minimal
    // polynomials, so this holds iff spec(D_s) is contained in {0, -mu/2}.
    // This keeps the clause exact in exact mode.
    let k = 2 * dec.n - 2;
    let shift = Mat::identity(k).scale(&dec.mu.half());
    let spectrum_res = dec.ds.matmul(&dec.ds.add(&shift));
    let spectrum_v: Vec<S> = spectrum_res.iter().cloned().collect();
    let spectrum_ok = zt.slice_is_zero(&spectrum_v);
    let parts = eigen_real_parts(dec);

    let mut reasons = BTreeMap::new();
    reasons.insert("w0".to_string(), w0_norm);
    reasons.insert("[D,J']".to_string(), comm.norm_f64());
    reasons.insert("[D,D^t]".to_string(), normality.norm_f64());
    reasons.insert("spectrum".to_string(), spectrum_res.norm_f64());

    Ok(SktVerdict {
        skt: w0_ok && comm_ok && normal_ok && spectrum_ok,
        reasons,
        eigen_real_parts: parts,
        harmonic_case: SktHarmonicCase::NotApplicable,
    })
}

/// Given an SKT structure, decide harmonicity of J and identify the case of
/// the proposition. On unimodular algebras the refinements are also checked:
/// case (i) with mu != 0 forces exactly one block with a_i = -mu/2, and case
/// (ii) forces mu = 0.
pub fn skt_harmonic<S: Scalar>(
    dec: &Decomposition<S>,
    cs: &ComplexStructure<S>,
) -> Result<SktVerdict> {
    let mut verdict = is_skt(dec, cs)?;
    if !verdict.skt {
        let failed: Vec<String> = verdict
            .reasons
            .iter()
            .filter(|(_, v)| **v > dec.zero_test().threshold())
            .map(|(k, v)| format!("{k} = {v:.3e}"))
            .collect();
        return Err(Error::precondition(format!(
            "skt_harmonic requires an SKT structure; failed clauses: {}",
            failed.join(", ")
        )));
    }
    let zt = dec.zero_test();

    // SKT implies integrable, so harmonicity is Dv0 = (Tr D) v0.
    let res = vec_sub(&dec.d.mul_vec(&dec.v0), &vec_scale(&dec.v0, &dec.tr_d()));
    let harmonic = zt.slice_is_zero(&res);
    verdict.reasons.insert("Dv0 - (TrD)v0".to_string(), vec_norm_f64(&res));

    let v0_zero = zt.slice_is_zero(&dec.v0);
    verdict.harmonic_case = if v0_zero {
        SktHarmonicCase::CaseI
    } else if harmonic {
        // the proposition forces D in u(n-1) and v0 in Ker D here
        let ds_v: Vec<S> = dec.ds.iter().cloned().collect();
        let dv0 = dec.d.mul_vec(&dec.v0);
        if !zt.slice_is_zero(&ds_v) || !zt.slice_is_zero(&dv0) {
            return Err(Error::inconsistent(format!(
                "SKT harmonic with v0 != 0 must have D in u(n-1) and Dv0 = 0; |D_s| = {:.3e}, |Dv0| = {:.3e}",
                dec.ds.norm_f64(),
                vec_norm_f64(&dv0)
            )));
        }
        SktHarmonicCase::CaseII
    } else {
        SktHarmonicCase::NotHarmonic
    };

    // unimodular refinements
    if zt.scalar_is_zero(&dec.l.trace()) {
        let mu = dec.mu.to_f64();
        let thr = zt.threshold();
        match verdict.harmonic_case {
            SktHarmonicCase::CaseI if mu.abs() > thr => {
                let hits = verdict
                    .eigen_real_parts
                    .iter()
                    .filter(|re| (*re + mu / 2.0).abs() <= thr.max(1e-7 * mu.abs()))
                    .count();
                if hits != 2 {
                    return Err(Error::inconsistent(format!(
                        "unimodular case (i) with mu != 0 must have exactly one block with a_i = -mu/2; found {} matching eigenvalues",
                        hits
                    )));
                }
            }
            SktHarmonicCase::CaseII if mu.abs() > thr => {
                return Err(Error::inconsistent(format!(
                    "unimodular case (ii) forces mu = 0, got mu = {mu}"
                )));
            }
            _ => {}
        }
    }
    Ok(verdict)
}

/// Block parameters (a_i, b_i) of D in the adapted basis.
pub type SktBlocks<S> = Vec<(S, S)>;

/// Orthogonal change of basis Q on a such that Q^t J' Q is the standard block
/// form and Q^t D Q is block diagonal with blocks [[a_i,-b_i],[b_i,a_i]].
/// Returns Q together with the block parameters (a_i, b_i).
pub fn skt_block_basis<S: Scalar>(
    dec: &Decomposition<S>,
    cs: &ComplexStructure<S>,
) -> Result<(Mat<S>, SktBlocks<S>)> {
    let verdict = is_skt(dec, cs)?;
    if !verdict.skt {
        let zt = dec.zero_test();
        let failed: Vec<String> = verdict
            .reasons
            .iter()
            .filter(|(_, v)| **v > zt.threshold())
            .map(|(k, v)| format!("{k} = {v:.3e}"))
            .collect();
        return Err(Error::precondition(format!(
            "skt_block_basis requires an SKT structure; failed clauses: {}",
            failed.join(", ")
        )));
    }
    let k = 2 * dec.n - 2;

    // Already in block form: identity change of basis.
    if let Some(blocks) = read_blocks(dec) {
        return Ok((Mat::identity(k), blocks));
    }
    if S::EXACT {
        return Err(Error::precondition(
            "exact-mode block basis is available only for block-diagonal D; rerun in float mode",
        ));
    }

    // Float path: split a by the symmetric part, then by K = -J' D_a inside
    // each eigenspace; each common eigenspace carries D = aI + bJ'.
    let jp = cs.jprime()?.to_f64();
    let ds = dec.ds.to_f64();
    let da = dec.da.to_f64();
    let zt = dec.zero_test();
    let cluster_tol = zt.threshold().max(1e-12);

    let eig = ds.to_na().symmetric_eigen();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));

    let mut q_cols: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut blocks: Vec<(f64, f64)> = Vec::new();
    let mut idx = 0;
    while idx < k {
        // cluster of Ds-eigenvalues
        let a_val = eig.eigenvalues[order[idx]];
        let mut hi = idx;
        while hi < k && (eig.eigenvalues[order[hi]] - a_val).abs() <= cluster_tol * 10.0 {
            hi += 1;
        }
        if hi < k {
            let gap = eig.eigenvalues[order[hi]] - eig.eigenvalues[order[hi - 1]];
            if gap <= cluster_tol * 100.0 {
                return Err(Error::Degeneracy(format!(
                    "symmetric-part eigenvalues too close to cluster reliably: gap {gap:.3e}"
                )));
            }
        }
        let dim = hi - idx;
        if dim % 2 != 0 {
            return Err(Error::Degeneracy(format!(
                "eigenspace of the symmetric part has odd dimension {dim}; offending eigenvalue {a_val:.6e}"
            )));
        }
        // basis of the cluster subspace
        let v_basis: Vec<Vec<f64>> =
            (idx..hi).map(|t| (0..k).map(|r| eig.eigenvectors[(r, order[t])]).collect()).collect();
        // K = -J' D_a restricted to the subspace, symmetric there
        let dim_v = v_basis.len();
        let jda = jp.matmul(&da).map(|x| -x);
        let mut k_sub = Mat::<f64>::zeros(dim_v, dim_v);
        for p in 0..dim_v {
            let image = jda.mul_vec(&v_basis[p]);
            for r in 0..dim_v {
                k_sub[(r, p)] = dot(&image, &v_basis[r]);
            }
        }
        let k_eig = k_sub.to_na().symmetric_eigen();
        let mut korder: Vec<usize> = (0..dim_v).collect();
        korder.sort_by(|&i, &j| k_eig.eigenvalues[i].total_cmp(&k_eig.eigenvalues[j]));

        let mut kidx = 0;
        while kidx < dim_v {
            let b_val = k_eig.eigenvalues[korder[kidx]];
            let mut khi = kidx;
            while khi < dim_v && (k_eig.eigenvalues[korder[khi]] - b_val).abs() <= cluster_tol * 10.0
            {
                khi += 1;
            }
            if khi < dim_v {
                let gap = k_eig.eigenvalues[korder[khi]] - k_eig.eigenvalues[korder[khi - 1]];
                if gap <= cluster_tol * 100.0 {
                    return Err(Error::Degeneracy(format!(
                        "rotation-speed eigenvalues too close to cluster reliably: gap {gap:.3e}"
                    )));
                }
            }
            let sub_dim = khi - kidx;
            if sub_dim % 2 != 0 {
                return Err(Error::Degeneracy(format!(
                    "common eigenspace has odd dimension {sub_dim}"
                )));
            }
            // lift back to a-coordinates
            let mut w_basis: Vec<Vec<f64>> = Vec::with_capacity(sub_dim);
            for t in kidx..khi {
                let mut w = vec![0.0; k];
                for p in 0..dim_v {
                    let c = k_eig.eigenvectors[(p, korder[t])];
                    for r in 0..k {
                        w[r] += c * v_basis[p][r];
                    }
                }
                w_basis.push(w);
            }
            // J'-adapted orthonormal pairs inside the common eigenspace
            let mut used: Vec<Vec<f64>> = Vec::new();
            while used.len() < sub_dim {
                // next candidate orthogonal to everything already chosen
                let mut x = w_basis[0].clone();
                for t in &w_basis {
                    let mut cand = t.clone();
                    for u in &used {
                        let c = dot(&cand, u);
                        for r in 0..k {
                            cand[r] -= c * u[r];
                        }
                    }
                    if vec_norm_f64(&cand) > 1e-6 {
                        x = cand;
                        break;
                    }
                }
                let nx = vec_norm_f64(&x);
                if nx < 1e-9 {
                    return Err(Error::Degeneracy(
                        "failed to extend the adapted basis; eigenspace numerically defective"
                            .to_string(),
                    ));
                }
                for r in 0..k {
                    x[r] /= nx;
                }
                let jx = jp.mul_vec(&x);
                used.push(x.clone());
                used.push(jx.clone());
                q_cols.push(x);
                q_cols.push(jx);
                blocks.push((a_val, b_val));
            }
            kidx = khi;
        }
        idx = hi;
    }

    let q64 = Mat::from_fn(k, k, |i, j| q_cols[j][i]);
    // reconstruction check
    let mut block_mat = Mat::<f64>::zeros(k, k);
    for (p, (a, b)) in blocks.iter().enumerate() {
        block_mat[(2 * p, 2 * p)] = *a;
        block_mat[(2 * p + 1, 2 * p + 1)] = *a;
        block_mat[(2 * p, 2 * p + 1)] = -b;
        block_mat[(2 * p + 1, 2 * p)] = *b;
    }
    let recon = q64.matmul(&block_mat).matmul(&q64.transpose());
    let err = recon.sub(&dec.d.to_f64()).norm_f64();
    if err > zt.threshold().max(1e-10) {
        return Err(Error::Degeneracy(format!(
            "block reconstruction error {err:.3e} exceeds tolerance"
        )));
    }
    let q = Mat::from_fn(k, k, |i, j| S::try_from_f64(q64[(i, j)]).unwrap_or_else(|_| S::zero()));
    let blocks_s = blocks
        .into_iter()
        .map(|(a, b)| {
            (
                S::try_from_f64(a).unwrap_or_else(|_| S::zero()),
                S::try_from_f64(b).unwrap_or_else(|_| S::zero()),
            )
        })
        .collect();
    Ok((q, blocks_s))
}

/// Convenience: full SKT analysis with the oracle cross-check. The verdict of
/// [`skt_harmonic`] must match the ground-truth commutator oracle.
pub fn skt_analysis<S: Scalar>(
    dec: &Decomposition<S>,
    cs: &ComplexStructure<S>,
) -> Result<SktVerdict> {
    let verdict = is_skt(dec, cs)?;
    if !verdict.skt {
        return Ok(verdict);
    }
    let refined = skt_harmonic(dec, cs)?;
    let oracle = is_harmonic_oracle(dec, cs);
    debug_assert_eq!(oracle.method, Method::Oracle);
    let claims = matches!(refined.harmonic_case, SktHarmonicCase::CaseI | SktHarmonicCase::CaseII);
    if claims != oracle.harmonic {
        return Err(Error::inconsistent(format!(
            "SKT harmonicity case {} disagrees with the commutator oracle ({})",
            refined.harmonic_case.name(),
            oracle.harmonic
        )));
    }
    Ok(refined)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::AlgebraSpec;
    use crate::mat::basis_vector;
    use crate::scalar::{Exact, ScalarContext};
    use crate::tensors::nijenhuis;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// The diagonal-plus-rotations SKT family at n = 3: mu arbitrary, one
    /// block with real part -mu/2, one rotation block.
    fn skt_family(mu: f64, a: f64, b: f64) -> AlgebraSpec<f64> {
        let mut l = Mat::<f64>::zeros(5, 5);
        l[(0, 0)] = mu;
        l[(1, 1)] = -mu / 2.0;
        l[(2, 2)] = -mu / 2.0;
        l[(1, 2)] = -a;
        l[(2, 1)] = a;
        l[(3, 4)] = -b;
        l[(4, 3)] = b;
        AlgebraSpec::new(3, l, ScalarContext::default()).unwrap()
    }

    #[test]
    fn skt_family_is_skt_and_case_i() {
        let spec = skt_family(1.0, std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2);
        let cs = ComplexStructure::standard(3).unwrap();
        let dec = spec.decompose();
        let v = skt_analysis(&dec, &cs).unwrap();
        assert!(v.skt);
        assert_eq!(v.harmonic_case, SktHarmonicCase::CaseI);
        // exactly one block with real part -mu/2
        let hits = v.eigen_real_parts.iter().filter(|re| (*re + 0.5).abs() < 1e-9).count();
        assert_eq!(hits, 2);
    }

    #[test]
    fn zero_algebra_is_skt_kaehler() {
        let spec = AlgebraSpec::new(2, Mat::<f64>::zeros(3, 3), ScalarContext::default()).unwrap();
        let cs = ComplexStructure::standard(2).unwrap();
        let v = is_skt(&spec.decompose(), &cs).unwrap();
        assert!(v.skt);
    }

    #[test]
    fn w0_obstructs_skt() {
        // L0 has w0 != 0, so it is not SKT and the w0 residual is flagged.
        let l = Mat::from_rows(vec![vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0; 3]]);
        let spec = AlgebraSpec::new(2, l, ScalarContext::default()).unwrap();
        let cs = ComplexStructure::standard(2).unwrap();
        let v = is_skt(&spec.decompose(), &cs).unwrap();
        assert!(!v.skt);
        assert!(v.reasons["w0"] > 0.9);
        assert!(matches!(
            skt_harmonic(&spec.decompose(), &cs),
            Err(Error::Precondition(ref m)) if m.contains("w0")
        ));
    }

    #[test]
    fn case_ii_construction() {
        // mu = 0, D = b J2 on the first pair and 0 on the second, v0 in Ker D.
        let b = std::f64::consts::FRAC_PI_2;
        let mut l = Mat::<f64>::zeros(5, 5);
        l[(1, 2)] = -b;
        l[(2, 1)] = b;
        l[(3, 0)] = 1.0;
        let spec = AlgebraSpec::new(3, l, ScalarContext::default()).unwrap();
        let cs = ComplexStructure::standard(3).unwrap();
        let v = skt_analysis(&spec.decompose(), &cs).unwrap();
        assert!(v.skt);
        assert_eq!(v.harmonic_case, SktHarmonicCase::CaseII);
    }

    #[test]
    fn skt_with_misaligned_v0_is_not_harmonic() {
        // v0 != 0 with a block a_i = -mu/2 != 0: Dv0 != (TrD) v0.
        let mut spec = skt_family(1.0, 0.7, 0.3);
        spec.l[(3, 0)] = 1.0; // v0 pointing into the rotation block
        let spec = AlgebraSpec::new(3, spec.l, ScalarContext::default()).unwrap();
        let cs = ComplexStructure::standard(3).unwrap();
        let v = skt_analysis(&spec.decompose(), &cs).unwrap();
        assert!(v.skt);
        assert_eq!(v.harmonic_case, SktHarmonicCase::NotHarmonic);
    }

    #[test]
    fn skt_implies_integrable() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        for _ in 0..20 {
            let n = rng.gen_range(2..=4usize);
            let mu: f64 = if rng.gen_bool(0.5) { 0.0 } else { rng.gen_range(-1.0..1.0f64) };
            let k = 2 * n - 2;
            let mut l = Mat::<f64>::zeros(2 * n - 1, 2 * n - 1);
            l[(0, 0)] = mu;
            for p in 0..n - 1 {
                let a = if rng.gen_bool(0.5) { 0.0 } else { -mu / 2.0 };
                let b: f64 = rng.gen_range(-2.0..2.0);
                l[(1 + 2 * p, 1 + 2 * p)] = a;
                l[(2 + 2 * p, 2 + 2 * p)] = a;
                l[(1 + 2 * p, 2 + 2 * p)] = -b;
                l[(2 + 2 * p, 1 + 2 * p)] = b;
            }
            for q in 0..k {
                l[(1 + q, 0)] = rng.gen_range(-1.0..1.0);
            }
            let spec = AlgebraSpec::new(n, l, ScalarContext::default()).unwrap();
            let cs = ComplexStructure::standard(n).unwrap();
            let dec = spec.decompose();
            let v = is_skt(&dec, &cs).unwrap();
            assert!(v.skt);
            // N = 0 against the tensor module
            for i in 0..2 * n {
                for j in 0..2 * n {
                    let nv = nijenhuis(
                        &spec,
                        &cs,
                        &basis_vector::<f64>(2 * n, i),
                        &basis_vector::<f64>(2 * n, j),
                    );
                    assert!(vec_norm_f64(&nv) < 1e-9);
                }
            }
            // harmonicity case agrees with the oracle
            skt_analysis(&dec, &cs).unwrap();
        }
    }

    #[test]
    fn block_basis_identity_when_already_blocked() {
        let spec = skt_family(2.0, 0.4, 1.1);
        let cs = ComplexStructure::standard(3).unwrap();
        let (q, blocks) = skt_block_basis(&spec.decompose(), &cs).unwrap();
        assert_eq!(q, Mat::identity(4));
        assert_eq!(blocks.len(), 2);
        assert!((blocks[0].0 + 1.0).abs() < 1e-12);
        assert!((blocks[1].0).abs() < 1e-12);
    }

    #[test]
    fn block_basis_reconstructs_random_conjugates() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..10 {
            let n = 3;
            let k = 2 * n - 2;
            // start from a block form with distinct (a, b) pairs
            let base = skt_family(rng.gen_range(0.5..2.0), rng.gen_range(0.5..1.5), rng.gen_range(2.0..3.0));
            // conjugate D by a random unitary (orthogonal commuting with J'):
            // exp of a random element of u(n-1)
            let cs = ComplexStructure::standard(n).unwrap();
            let jp = cs.jprime.clone().unwrap();
            let x = Mat::from_fn(k, k, |_, _| rng.gen_range(-0.5..0.5f64));
            let sk = x.skew_part();
            let u_elt = sk.sub(&jp.matmul(&sk).matmul(&jp)).map(|v| v / 2.0);
            let g = crate::flow::expm(&u_elt);
            let dec0 = base.decompose();
            let d_conj = g.matmul(&dec0.d).matmul(&g.transpose());
            let spec = AlgebraSpec::from_components(
                n,
                dec0.mu,
                vec![0.0; k],
                vec![0.0; k],
                d_conj.clone(),
                ScalarContext::default(),
            )
            .unwrap();
            let dec = spec.decompose();
            let (q, blocks) = skt_block_basis(&dec, &cs).unwrap();
            // Q orthogonal, J' standardized, D reconstructed
            assert!(q.matmul(&q.transpose()).sub(&Mat::identity(k)).norm_f64() < 1e-9);
            let jq = q.transpose().matmul(&jp).matmul(&q);
            let mut std_blocks = Mat::<f64>::zeros(k, k);
            let mut dm = Mat::<f64>::zeros(k, k);
            for (p, (a, b)) in blocks.iter().enumerate() {
                std_blocks[(2 * p, 2 * p + 1)] = -1.0;
                std_blocks[(2 * p + 1, 2 * p)] = 1.0;
                dm[(2 * p, 2 * p)] = *a;
                dm[(2 * p + 1, 2 * p + 1)] = *a;
                dm[(2 * p, 2 * p + 1)] = -b;
                dm[(2 * p + 1, 2 * p)] = *b;
            }
            assert!(jq.sub(&std_blocks).norm_f64() < 1e-8);
            assert!(q.matmul(&dm).matmul(&q.transpose()).sub(&d_conj).norm_f64() < 1e-8);
        }
    }

    #[test]
    fn ambiguous_rotation_speeds_raise_degeneracy() {
        // two blocks with rotation speeds split by less than the clustering
        // safety margin but more than the tolerance itself: refuse to cluster
        let n = 3;
        let k = 2 * n - 2;
        let gap = 5e-8;
        let base = {
            let mut l = Mat::<f64>::zeros(5, 5);
            l[(1, 2)] = -1.0;
            l[(2, 1)] = 1.0;
            l[(3, 4)] = -(1.0 + gap);
            l[(4, 3)] = 1.0 + gap;
            AlgebraSpec::new(n, l, ScalarContext::default()).unwrap()
        };
        let cs = ComplexStructure::standard(n).unwrap();
        // conjugate away from block form so the identity shortcut cannot fire
        let jp = cs.jprime.clone().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let x = Mat::from_fn(k, k, |_, _| rng.gen_range(-0.5..0.5f64));
        let sk = x.skew_part();
        let u_elt = sk.sub(&jp.matmul(&sk).matmul(&jp)).map(|v| v / 2.0);
        let g = crate::flow::expm(&u_elt);
        let dec0 = base.decompose();
        let d_conj = g.matmul(&dec0.d).matmul(&g.transpose());
        let spec = AlgebraSpec::from_components(
            n,
            0.0,
            vec![0.0; k],
            vec![0.0; k],
            d_conj,
            ScalarContext::default(),
        )
        .unwrap();
        let err = skt_block_basis(&spec.decompose(), &cs).unwrap_err();
        assert!(matches!(err, Error::Degeneracy(ref m) if m.contains("gap")), "{err:?}");
    }

    #[test]
    fn exact_mode_handles_non_block_normal_inputs() {
        // conjugate a block form by the rational unitary (3/5, -4/5): the
        // result is normal, commutes with J', has rational entries and is not
        // block diagonal; the spectrum clause must still decide exactly
        let r = |p: i64, q: i64| Exact::from_ratio(p, q);
        let u = Mat::from_rows(vec![
            vec![r(3, 5), r(0, 1), r(-4, 5), r(0, 1)],
            vec![r(0, 1), r(3, 5), r(0, 1), r(-4, 5)],
            vec![r(4, 5), r(0, 1), r(3, 5), r(0, 1)],
            vec![r(0, 1), r(4, 5), r(0, 1), r(3, 5)],
        ]);
        let mut d0 = Mat::<Exact>::zeros(4, 4);
        // blocks (a, b) = (-1, 2) and (0, 3); mu = 2 makes real parts {-mu/2, 0}
        d0[(0, 0)] = r(-1, 1);
        d0[(1, 1)] = r(-1, 1);
        d0[(0, 1)] = r(-2, 1);
        d0[(1, 0)] = r(2, 1);
        d0[(2, 3)] = r(-3, 1);
        d0[(3, 2)] = r(3, 1);
        let d = u.matmul(&d0).matmul(&u.transpose());
        assert!(d.sub(&d0).norm_f64() > 0.1, "conjugation must move D");
        let spec = AlgebraSpec::from_components(
            3,
            r(2, 1),
            vec![r(0, 1); 4],
            vec![r(0, 1); 4],
            d,
            ScalarContext::exact(),
        )
        .unwrap();
        let cs = ComplexStructure::<Exact>::standard(3).unwrap();
        let dec = spec.decompose();
        let v = skt_analysis(&dec, &cs).unwrap();
        assert!(v.skt);
        assert_eq!(v.harmonic_case, SktHarmonicCase::CaseI);
        // exact block basis only handles block-diagonal inputs
        assert!(matches!(skt_block_basis(&dec, &cs), Err(Error::Precondition(_))));
        // while the float path recovers the blocks
        let fspec = AlgebraSpec::new(3, dec.l.to_f64(), ScalarContext::default()).unwrap();
        let fcs = ComplexStructure::<f64>::standard(3).unwrap();
        let (q, blocks) = skt_block_basis(&fspec.decompose(), &fcs).unwrap();
        assert_eq!(blocks.len(), 2);
        assert!(q.matmul(&q.transpose()).sub(&Mat::identity(4)).norm_f64() < 1e-9);
    }

    #[test]
    fn exact_mode_skt_family() {
        let rat = Exact::from_int;
        let mut l = Mat::<Exact>::zeros(5, 5);
        l[(0, 0)] = rat(2);
        l[(1, 1)] = rat(-1);
        l[(2, 2)] = rat(-1);
        l[(1, 2)] = rat(-3);
        l[(2, 1)] = rat(3);
        l[(3, 4)] = rat(-1);
        l[(4, 3)] = rat(1);
        let spec = AlgebraSpec::new(3, l, ScalarContext::exact()).unwrap();
        let cs = ComplexStructure::<Exact>::standard(3).unwrap();
        let v = skt_analysis(&spec.decompose(), &cs).unwrap();
        assert!(v.skt);
        assert_eq!(v.harmonic_case, SktHarmonicCase::CaseI);
        let (q, blocks) = skt_block_basis(&spec.decompose(), &cs).unwrap();
        assert_eq!(q, Mat::identity(4));
        assert_eq!(blocks[0].0, rat(-1));
    }
}
