//! The invariant tensor calculus: N, d-omega, delta-omega, the Lee form,
//! nabla-omega, T+/T-, U, the rough Laplacian and the harmonicity commutator.
//!
//! Every tensor comes in two routes: a closed form consuming only the split
//! (mu, v0, w0, D) of L, and a generic route built from the bracket and the
//! connection table alone. Tests pin the two against each other; the generic
//! route guards transcription errors in the closed forms.

use crate::algebra::{AlgebraSpec, ComplexStructure, Decomposition};
use crate::connection::{levi_civita, ConnectionTable};
use crate::error::{Error, Result};
use crate::mat::{basis_vector, dot, vec_add, vec_norm_f64, Mat};
use crate::scalar::Scalar;

/// Kaehler form omega(x, y) = <Jx, y>.
pub fn omega<S: Scalar>(j: &Mat<S>, x: &[S], y: &[S]) -> S {
    dot(&j.mul_vec(x), y)
}

// ---------------------------------------------------------------------------
// Nijenhuis tensor
// ---------------------------------------------------------------------------

/// N(x,y) = [x,y] + J([Jx,y] + [x,Jy]) - [Jx,Jy], evaluated verbatim.
pub fn nijenhuis<S: Scalar>(
    spec: &AlgebraSpec<S>,
    cs: &ComplexStructure<S>,
    x: &[S],
    y: &[S],
) -> Vec<S> {
    let j = &cs.j;
    let jx = j.mul_vec(x);
    let jy = j.mul_vec(y);
    let mut acc = spec.bracket(x, y);
    let inner = vec_add(&spec.bracket(&jx, y), &spec.bracket(x, &jy));
    acc = vec_add(&acc, &j.mul_vec(&inner));
    let last = spec.bracket(&jx, &jy);
    acc.iter().zip(&last).map(|(a, b)| a.clone() - b).collect()
}

/// Closed form of N on an almost abelian algebra. Everything is determined by
/// N(e0, x) for x in a:
///
///   N(e0, x) = <J'w0, x> e0 + <w0, x> e1 + (D + J'DJ') x.
///
/// Integrability is w0 = 0 together with [D, J'] = 0.
#[derive(Clone, Debug)]
pub struct NijenhuisClosed<S: Scalar> {
    pub n: usize,
    /// Pairing vector of the e1 term.
    pub w0: Vec<S>,
    /// The a-part operator D + J'DJ'.
    pub op: Mat<S>,
    jprime: Mat<S>,
}

impl<S: Scalar> NijenhuisClosed<S> {
    pub fn new(dec: &Decomposition<S>, cs: &ComplexStructure<S>) -> Result<Self> {
        let jp = cs.jprime()?;
        let op = dec.d.add(&jp.matmul(&dec.d).matmul(jp));
        Ok(NijenhuisClosed { n: dec.n, w0: dec.w0.clone(), op, jprime: jp.clone() })
    }

    /// N(e0, x) for x in a (length 2n-2), returned as a vector of g.
    pub fn eval_e0(&self, xa: &[S]) -> Vec<S> {
        let mut out = vec![S::zero(); 2 * self.n];
        out[0] = dot(&self.jprime.mul_vec(&self.w0), xa);
        out[1] = dot(&self.w0, xa);
        let a_part = self.op.mul_vec(xa);
        out[2..].clone_from_slice(&a_part);
        out
    }

    /// Residuals of the integrability criterion (w0, [D, J']); both vanish
    /// iff N = 0.
    pub fn integrability_residuals(&self, dec: &Decomposition<S>) -> (Vec<S>, Mat<S>) {
        (dec.w0.clone(), dec.d.commutator(&self.jprime))
    }

    pub fn is_integrable(&self, dec: &Decomposition<S>) -> bool {
        let zt = dec.zero_test();
        let (w0, comm) = self.integrability_residuals(dec);
        zt.slice_is_zero(&w0) && zt.slice_is_zero(&comm.iter().cloned().collect::<Vec<_>>())
    }
}

// ---------------------------------------------------------------------------
// d-omega
// ---------------------------------------------------------------------------

/// Closed form of d-omega on basis indices; antisymmetric, and nonzero only
/// when one argument is e0:
///
///   d-omega(e0, e1, x) = <v0, J'x>,
///   d-omega(e0, x, y)  = <x, (D^t J' + J'D) y>,   x, y in a,
///   d-omega(z, x, y)   = 0,                        z, x, y in u.
#[derive(Clone, Debug)]
pub struct DOmegaClosed<S: Scalar> {
    n: usize,
    jp_v0: Vec<S>,
    m: Mat<S>,
}

impl<S: Scalar> DOmegaClosed<S> {
    pub fn new(dec: &Decomposition<S>, cs: &ComplexStructure<S>) -> Result<Self> {
        let jp = cs.jprime()?;
        let m = dec.d.transpose().matmul(jp).add(&jp.matmul(&dec.d));
        // <v0, J'x> = (J'^t v0) . x = -(J' v0) . x
        let jp_v0 = jp.mul_vec(&dec.v0).iter().map(|t| -t.clone()).collect();
        Ok(DOmegaClosed { n: dec.n, jp_v0, m })
    }

    pub fn eval_basis(&self, i: usize, j: usize, k: usize) -> S {
        if i == j || j == k || i == k {
            return S::zero();
        }
        // sort with sign
        let mut idx = [i, j, k];
        let mut sign = S::one();
        for p in 0..2 {
            for q in 0..2 - p {
                if idx[q] > idx[q + 1] {
                    idx.swap(q, q + 1);
                    sign = -sign;
                }
            }
        }
        let val = match idx {
            [0, 1, k] => self.jp_v0[k - 2].clone(),
            [0, j, k] => self.m[(j - 2, k - 2)].clone(),
            _ => S::zero(),
        };
        sign * val
    }

    pub fn eval(&self, x: &[S], y: &[S], z: &[S]) -> S {
        let m = 2 * self.n;
        let mut acc = S::zero();
        for i in 0..m {
            if x[i].is_exact_zero() {
                continue;
            }
            for j in 0..m {
                if y[j].is_exact_zero() {
                    continue;
                }
                for k in 0..m {
                    if z[k].is_exact_zero() {
                        continue;
                    }
                    acc = acc + x[i].clone() * &y[j] * &z[k] * &self.eval_basis(i, j, k);
                }
            }
        }
        acc
    }
}

/// Generic invariant-form route: d-omega(x,y,z) =
/// -omega([x,y],z) - omega([y,z],x) - omega([z,x],y).
pub fn d_omega_generic<S: Scalar>(
    spec: &AlgebraSpec<S>,
    cs: &ComplexStructure<S>,
    x: &[S],
    y: &[S],
    z: &[S],
) -> S {
    let j = &cs.j;
    -omega(j, &spec.bracket(x, y), z) - omega(j, &spec.bracket(y, z), x)
        - omega(j, &spec.bracket(z, x), y)
}

// ---------------------------------------------------------------------------
// delta-omega and the Lee form
// ---------------------------------------------------------------------------

/// Codifferential of omega as a covector on g:
/// delta(e0) = 0, delta(e1) = Tr D, delta(x) = -<v0, x> on a.
pub fn delta_omega<S: Scalar>(dec: &Decomposition<S>) -> Vec<S> {
    let mut out = vec![S::zero(); 2 * dec.n];
    out[1] = dec.tr_d();
    for (k, v) in dec.v0.iter().enumerate() {
        out[k + 2] = -v.clone();
    }
    out
}

/// Oracle route: delta-omega(x) = -Sum_i (nabla_{e_i} omega)(e_i, x).
pub fn delta_omega_from_connection<S: Scalar>(
    table: &ConnectionTable<S>,
    cs: &ComplexStructure<S>,
) -> Vec<S> {
    let m = table.dim();
    let mut out = vec![S::zero(); m];
    for k in 0..m {
        let ek = basis_vector::<S>(m, k);
        let mut acc = S::zero();
        for (i, lam) in table.lambdas.iter().enumerate() {
            let ei = basis_vector::<S>(m, i);
            acc = acc + nabla_omega_from_connection_dir(lam, cs, &ei, &ek);
        }
        out[k] = -acc;
    }
    out
}

fn nabla_omega_from_connection_dir<S: Scalar>(
    lam: &Mat<S>,
    cs: &ComplexStructure<S>,
    y: &[S],
    z: &[S],
) -> S {
    let j = &cs.j;
    -omega(j, &lam.mul_vec(y), z) - omega(j, y, &lam.mul_vec(z))
}

/// Lee form theta = -(1/(n-1)) delta-omega o J.
pub fn lee_form<S: Scalar>(dec: &Decomposition<S>, cs: &ComplexStructure<S>) -> Vec<S> {
    let delta = delta_omega(dec);
    let m = 2 * dec.n;
    let scale = S::from_int(-(dec.n as i64 - 1));
    (0..m)
        .map(|k| {
            let jek = cs.j.col(k);
            dot(&delta, &jek) / scale.clone()
        })
        .collect()
}

// ---------------------------------------------------------------------------
// nabla-omega
// ---------------------------------------------------------------------------

/// Closed form of nabla-omega as per-direction 2-form matrices
/// F_i[j][k] = (nabla_{e_i} omega)(e_j, e_k), assembled from
///
///   (nabla_{e0} omega)(e0, x) = <rho, x>,  (nabla_{e0} omega)(x, y) = <[A,J]x, y>,
///   (nabla_{e1} omega)(e1, x) = <gamma, x>,
///   (nabla_z  omega)(x, y)    = 0,         (nabla_x omega)(e1, y)  = <Sx, y>,
///
/// extended by (nabla omega)(Jy, z) = (nabla omega)(y, Jz) and antisymmetry.
pub fn nabla_omega_forms<S: Scalar>(
    dec: &Decomposition<S>,
    cs: &ComplexStructure<S>,
) -> Result<Vec<Mat<S>>> {
    let jp = cs.jprime()?;
    let n = dec.n;
    let m = 2 * n;
    let k = m - 2;
    let mut forms = Vec::with_capacity(m);

    let set_skew = |f: &mut Mat<S>, j: usize, kk: usize, v: S| {
        f[(kk, j)] = -v.clone();
        f[(j, kk)] = v;
    };

    // direction e0
    let mut f0 = Mat::zeros(m, m);
    let comm = dec.da.commutator(jp); // [Da, J']
    for q in 0..k {
        set_skew(&mut f0, 0, q + 2, dec.rho[q].clone());
        // (e1, x): <rho, J'x>
        let jq = jp.col(q);
        set_skew(&mut f0, 1, q + 2, dot(&dec.rho, &jq));
        for r in 0..k {
            // (x, y) = <[Da,J'] e_x, e_y>
            f0[(q + 2, r + 2)] = comm[(r, q)].clone();
        }
    }
    forms.push(f0);

    // direction e1
    let mut f1 = Mat::zeros(m, m);
    for q in 0..k {
        set_skew(&mut f1, 1, q + 2, dec.gamma[q].clone());
        // (e0, x) = -<gamma, J'x>
        let jq = jp.col(q);
        set_skew(&mut f1, 0, q + 2, -dot(&dec.gamma, &jq));
    }
    forms.push(f1);

    // directions in a
    for p in 0..k {
        let mut f = Mat::zeros(m, m);
        let ds_x = dec.ds.col(p);
        let jds_x = jp.mul_vec(&ds_x);
        for q in 0..k {
            set_skew(&mut f, 1, q + 2, ds_x[q].clone());
            set_skew(&mut f, 0, q + 2, jds_x[q].clone());
        }
        forms.push(f);
    }
    Ok(forms)
}

/// Evaluate the closed-form nabla-omega on arbitrary vectors of g.
pub fn nabla_omega<S: Scalar>(
    dec: &Decomposition<S>,
    cs: &ComplexStructure<S>,
    x: &[S],
    y: &[S],
    z: &[S],
) -> Result<S> {
    let forms = nabla_omega_forms(dec, cs)?;
    Ok(eval_forms(&forms, x, y, z))
}

/// Oracle route from the connection: (nabla_x omega)(y,z) =
/// -omega(nabla_x y, z) - omega(y, nabla_x z).
pub fn nabla_omega_from_connection<S: Scalar>(
    table: &ConnectionTable<S>,
    cs: &ComplexStructure<S>,
    x: &[S],
    y: &[S],
    z: &[S],
) -> S {
    let lam = table.nabla_along(x);
    nabla_omega_from_connection_dir(&lam, cs, y, z)
}

fn eval_forms<S: Scalar>(forms: &[Mat<S>], x: &[S], y: &[S], z: &[S]) -> S {
    let mut acc = S::zero();
    for (i, f) in forms.iter().enumerate() {
        if x[i].is_exact_zero() {
            continue;
        }
        acc = acc + x[i].clone() * &dot(&f.mul_vec(z), y);
    }
    acc
}

// ---------------------------------------------------------------------------
// T+- and U
// ---------------------------------------------------------------------------

/// Sign selector for the T tensors.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TSign {
    Plus,
    Minus,
}

/// Closed form of T(x,y,z) = (nabla_x omega)(y,z) +- (nabla_Jx omega)(Jy,z)
/// as per-direction 2-form matrices, from
///
///   T(e0,e0,x) = <rho +- gamma, x>,  T(e0,x,y) = <[A,J]x,y>,
///   T(z,x,y) = 0,                    T(x,e1,y) = <(S -+ JSJ)x, y>,
///
/// with T(Jx,y,z) = -+T(x,Jy,z) reducing the e1 direction to e0.
pub fn tensor_t_forms<S: Scalar>(
    dec: &Decomposition<S>,
    cs: &ComplexStructure<S>,
    sign: TSign,
) -> Result<Vec<Mat<S>>> {
    let jp = cs.jprime()?;
    let n = dec.n;
    let m = 2 * n;
    let k = m - 2;
    let set_skew = |f: &mut Mat<S>, j: usize, kk: usize, v: S| {
        f[(kk, j)] = -v.clone();
        f[(j, kk)] = v;
    };
    let comb = |a: &S, b: &S| match sign {
        TSign::Plus => a.clone() + b,
        TSign::Minus => a.clone() - b,
    };

    // direction e0
    let mut f0 = Mat::zeros(m, m);
    let lead: Vec<S> = dec.rho.iter().zip(&dec.gamma).map(|(r, g)| comb(r, g)).collect();
    let comm = dec.da.commutator(jp);
    for q in 0..k {
        set_skew(&mut f0, 0, q + 2, lead[q].clone());
        let jq = jp.col(q);
        set_skew(&mut f0, 1, q + 2, dot(&lead, &jq));
        for r in 0..k {
            f0[(q + 2, r + 2)] = comm[(r, q)].clone();
        }
    }

    // direction e1 = J e0: T(e1,y,z) = -+ T(e0, Jy, z)
    let mut f1 = Mat::zeros(m, m);
    for jdx in 0..m {
        let jej = cs.j.col(jdx);
        for kk in 0..m {
            let mut acc = S::zero();
            for p in 0..m {
                if !jej[p].is_exact_zero() {
                    acc = acc + jej[p].clone() * &f0[(p, kk)];
                }
            }
            f1[(jdx, kk)] = match sign {
                TSign::Plus => -acc,
                TSign::Minus => acc,
            };
        }
    }

    let mut forms = vec![f0, f1];

    // directions in a: M = Ds -+ J'DsJ'
    let jdj = jp.matmul(&dec.ds).matmul(jp);
    let m_op = match sign {
        TSign::Plus => dec.ds.sub(&jdj),
        TSign::Minus => dec.ds.add(&jdj),
    };
    for p in 0..k {
        let mut f = Mat::zeros(m, m);
        let mx = m_op.col(p);
        let jmx = jp.mul_vec(&mx);
        for q in 0..k {
            set_skew(&mut f, 1, q + 2, mx[q].clone());
            set_skew(&mut f, 0, q + 2, jmx[q].clone());
        }
        forms.push(f);
    }
    Ok(forms)
}

/// Closed-form T evaluated on vectors.
pub fn tensor_t<S: Scalar>(
    dec: &Decomposition<S>,
    cs: &ComplexStructure<S>,
    sign: TSign,
    x: &[S],
    y: &[S],
    z: &[S],
) -> Result<S> {
    let forms = tensor_t_forms(dec, cs, sign)?;
    Ok(eval_forms(&forms, x, y, z))
}

/// Definition route for T from the connection.
pub fn tensor_t_from_connection<S: Scalar>(
    table: &ConnectionTable<S>,
    cs: &ComplexStructure<S>,
    sign: TSign,
    x: &[S],
    y: &[S],
    z: &[S],
) -> S {
    let jx = cs.j.mul_vec(x);
    let jy = cs.j.mul_vec(y);
    let a = nabla_omega_from_connection(table, cs, x, y, z);
    let b = nabla_omega_from_connection(table, cs, &jx, &jy, z);
    match sign {
        TSign::Plus => a + b,
        TSign::Minus => a - b,
    }
}

/// U(x,y,z) = <x,y> d(z) - <x,z> d(y) - <x,Jy> d(Jz) + <x,Jz> d(Jy) with
/// d = delta-omega; `delta` selects the route.
pub fn tensor_u_with<S: Scalar>(
    cs: &ComplexStructure<S>,
    delta: &[S],
    x: &[S],
    y: &[S],
    z: &[S],
) -> S {
    let j = &cs.j;
    let jy = j.mul_vec(y);
    let jz = j.mul_vec(z);
    dot(x, y) * dot(delta, z) - dot(x, z) * dot(delta, y) - dot(x, &jy) * dot(delta, &jz)
        + dot(x, &jz) * dot(delta, &jy)
}

/// Closed-form U (delta-omega from the algebraic expression).
pub fn tensor_u<S: Scalar>(
    dec: &Decomposition<S>,
    cs: &ComplexStructure<S>,
    x: &[S],
    y: &[S],
    z: &[S],
) -> S {
    tensor_u_with(cs, &delta_omega(dec), x, y, z)
}

// ---------------------------------------------------------------------------
// Rough Laplacian and the harmonicity commutator
// ---------------------------------------------------------------------------

/// Rough Laplacian of J: Sum_i nabla^2_{e_i,e_i} J as a matrix, including the
/// second-order correction through Sum_i nabla_{e_i} e_i = (Tr S) e0.
pub fn rough_laplacian<S: Scalar>(dec: &Decomposition<S>, cs: &ComplexStructure<S>) -> Mat<S> {
    let table = levi_civita(dec, cs);
    rough_laplacian_from_table(dec, &table, &cs.j)
}

pub fn rough_laplacian_from_table<S: Scalar>(
    dec: &Decomposition<S>,
    table: &ConnectionTable<S>,
    j: &Mat<S>,
) -> Mat<S> {
    let m = table.dim();
    let mut acc = Mat::zeros(m, m);
    for lam in &table.lambdas {
        let p = lam.commutator(j);
        acc = acc.add(&lam.commutator(&p));
    }
    // nabla through the trace vector (Tr S) e0
    let corr = table.lambdas[0].scale(&dec.tr_s());
    acc.sub(&corr.commutator(j))
}

/// H = (1/2) [J, nabla*nabla J]; zero exactly when J is harmonic.
pub fn harmonic_commutator<S: Scalar>(dec: &Decomposition<S>, cs: &ComplexStructure<S>) -> Mat<S> {
    let r = rough_laplacian(dec, cs);
    cs.j.matmul(&r).sub(&r.matmul(&cs.j)).map(Scalar::half)
}

/// The same commutator through the orthonormal-frame expansion
/// (1/2)[J, nabla*nabla J] = Sum_i (L_i J L_i J - J L_i J L_i) - (Tr S) J [L_0, J];
/// kept as an independent algebraic route for tests.
pub fn harmonic_commutator_expanded<S: Scalar>(
    dec: &Decomposition<S>,
    cs: &ComplexStructure<S>,
) -> Mat<S> {
    let table = levi_civita(dec, cs);
    let j = &cs.j;
    let m = table.dim();
    let mut acc = Mat::zeros(m, m);
    for lam in &table.lambdas {
        let lj = lam.matmul(j);
        acc = acc.add(&lj.matmul(&lj)).sub(&j.matmul(&lj).matmul(lam));
    }
    let corr = j.matmul(&table.lambdas[0].commutator(j)).scale(&dec.tr_s());
    acc.sub(&corr)
}

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

/// Norm aggregates of the calculus plus the harmonicity commutator.
#[derive(Clone, Debug)]
pub struct TensorReport {
    pub nijenhuis_norm: f64,
    pub d_omega_norm: f64,
    pub delta_omega: Vec<f64>,
    pub lee_form: Vec<f64>,
    pub nabla_omega_norm: f64,
    pub h: Mat<f64>,
    /// L skew-symmetric makes the metric flat; a hint only, not a full
    /// flatness decision for non-skew L.
    pub metric_flat_hint: bool,
}

impl TensorReport {
    pub fn compute<S: Scalar>(dec: &Decomposition<S>, cs: &ComplexStructure<S>) -> Result<Self> {
        let n = dec.n;
        let m = 2 * n;
        let spec = dec.spec();

        let mut nij_sq = 0.0;
        for i in 0..m {
            for jdx in 0..m {
                let ei = basis_vector::<S>(m, i);
                let ej = basis_vector::<S>(m, jdx);
                nij_sq += vec_norm_f64(&nijenhuis(&spec, cs, &ei, &ej)).powi(2);
            }
        }

        let dwc = DOmegaClosed::new(dec, cs)?;
        let mut dw_sq = 0.0;
        for i in 0..m {
            for jdx in 0..m {
                for k in 0..m {
                    dw_sq += dwc.eval_basis(i, jdx, k).to_f64().powi(2);
                }
            }
        }

        let forms = nabla_omega_forms(dec, cs)?;
        let nw_sq: f64 = forms.iter().map(|f| f.to_f64().frob_sq()).sum();

        let h = harmonic_commutator(dec, cs);
        // invariants: H skew, HJ = -JH
        let zt = dec.zero_test();
        let skew_res = h.add(&h.transpose());
        let anti = h.matmul(&cs.j).add(&cs.j.matmul(&h));
        if !zt.slice_is_zero(&skew_res.iter().cloned().collect::<Vec<_>>())
            || !zt.slice_is_zero(&anti.iter().cloned().collect::<Vec<_>>())
        {
            return Err(Error::inconsistent(format!(
                "harmonicity commutator lost its symmetries: |H + H^t| = {:.3e}, |HJ + JH| = {:.3e}",
                skew_res.norm_f64(),
                anti.norm_f64()
            )));
        }

        let flat_hint = zt.slice_is_zero(
            &dec.l.add(&dec.l.transpose()).iter().cloned().collect::<Vec<_>>(),
        );

        Ok(TensorReport {
            nijenhuis_norm: nij_sq.sqrt(),
            d_omega_norm: dw_sq.sqrt(),
            delta_omega: delta_omega(dec).iter().map(Scalar::to_f64).collect(),
            lee_form: lee_form(dec, cs).iter().map(Scalar::to_f64).collect(),
            nabla_omega_norm: nw_sq.sqrt(),
            h: h.to_f64(),
            metric_flat_hint: flat_hint,
        })
    }
}
