//! The algebra data model.
//!
//! A 2n-dimensional almost abelian Lie algebra is R e0 acting on the abelian
//! ideal u = span{e1, ..., e_{2n-1}} through a matrix L; the only nonzero
//! brackets are [e0, u] = Lu. The subspace a = span{e2, ..., e_{2n-1}} is the
//! maximal J-invariant subspace of u for the standard almost complex structure
//! J e_{2i} = e_{2i+1}. All later tensor formulas consume the split of L into
//! (mu, v0, w0, D) and the symmetric/skew parts below.

use crate::error::{Error, Result};
use crate::mat::{basis_vector, vec_add, vec_scale, vec_sub, Mat};
use crate::scalar::{Mode, Scalar, ScalarContext, ZeroTest};

/// An almost abelian Lie algebra given by its half-dimension n and the matrix
/// L of ad_{e0} restricted to u, in the orthonormal basis {e1,...,e_{2n-1}}.
#[derive(Clone, Debug)]
pub struct AlgebraSpec<S: Scalar> {
    pub n: usize,
    pub l: Mat<S>,
    pub ctx: ScalarContext,
}

impl<S: Scalar> AlgebraSpec<S> {
    pub fn new(n: usize, l: Mat<S>, ctx: ScalarContext) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid_input(format!("n must be >= 2, got {n}")));
        }
        let m = 2 * n - 1;
        if l.nrows() != m || l.ncols() != m {
            return Err(Error::invalid_input(format!(
                "L must be {m}x{m} for n = {n}, got {}x{}",
                l.nrows(),
                l.ncols()
            )));
        }
        if l.iter().any(|x| !x.entry_is_finite()) {
            return Err(Error::invalid_input("L has non-finite entries"));
        }
        match (ctx.mode, S::EXACT) {
            (Mode::ExactRational, false) | (Mode::Float, true) => {
                return Err(Error::invalid_input("scalar context mode does not match the scalar type"))
            }
            _ => {}
        }
        if ctx.mode == Mode::Float && (!ctx.tolerance.is_finite() || ctx.tolerance <= 0.0) {
            return Err(Error::invalid_input("tolerance must be positive in float mode"));
        }
        Ok(AlgebraSpec { n, l, ctx })
    }

    /// Assemble L from the component form (mu, v0, w0, D).
    pub fn from_components(
        n: usize,
        mu: S,
        v0: Vec<S>,
        w0: Vec<S>,
        d: Mat<S>,
        ctx: ScalarContext,
    ) -> Result<Self> {
        let k = 2 * n - 2;
        if v0.len() != k || w0.len() != k || d.nrows() != k || d.ncols() != k {
            return Err(Error::invalid_input(format!(
                "component sizes must match 2n-2 = {k}: |v0|={}, |w0|={}, D is {}x{}",
                v0.len(),
                w0.len(),
                d.nrows(),
                d.ncols()
            )));
        }
        let mut l = Mat::zeros(2 * n - 1, 2 * n - 1);
        l[(0, 0)] = mu;
        for i in 0..k {
            l[(i + 1, 0)] = v0[i].clone();
            l[(0, i + 1)] = w0[i].clone();
        }
        l.set_block(1, 1, &d);
        Self::new(n, l, ctx)
    }

    /// Zero test scaled by max(1, ||L||).
    pub fn zero_test(&self) -> ZeroTest {
        ZeroTest::new(self.ctx.tolerance, self.l.norm_f64())
    }

    /// Lie bracket of two vectors of g written in the basis {e0,...,e_{2n-1}}:
    /// [x, y] = x_0 L(y_u) - y_0 L(x_u).
    pub fn bracket(&self, x: &[S], y: &[S]) -> Vec<S> {
        let m = 2 * self.n;
        assert_eq!(x.len(), m);
        assert_eq!(y.len(), m);
        let lx = self.l.mul_vec(&x[1..]);
        let ly = self.l.mul_vec(&y[1..]);
        let mut out = vec![S::zero(); m];
        for i in 0..m - 1 {
            out[i + 1] = x[0].clone() * &ly[i] - y[0].clone() * &lx[i];
        }
        out
    }

    /// Tr L = 0, i.e. Tr ad_{e0} = 0; the only nontrivial unimodularity
    /// condition on an almost abelian algebra.
    pub fn is_unimodular(&self) -> bool {
        self.zero_test().scalar_is_zero(&self.l.trace())
    }

    pub fn decompose(&self) -> Decomposition<S> {
        Decomposition::new(self)
    }
}

/// L split according to u = R e1 + a, together with the symmetric and skew
/// parts of everything. Reassembly of the blocks reproduces L exactly.
#[derive(Clone, Debug)]
pub struct Decomposition<S: Scalar> {
    pub n: usize,
    pub mu: S,
    pub v0: Vec<S>,
    pub w0: Vec<S>,
    pub d: Mat<S>,
    /// (v0 + w0)/2, the first column of S below the corner.
    pub gamma: Vec<S>,
    /// (v0 - w0)/2, the first column of A below the corner.
    pub rho: Vec<S>,
    pub ds: Mat<S>,
    pub da: Mat<S>,
    /// Symmetric part of L on u.
    pub s: Mat<S>,
    /// Skew part of L on u.
    pub a: Mat<S>,
    pub l: Mat<S>,
    pub ctx: ScalarContext,
}

impl<S: Scalar> Decomposition<S> {
    fn new(spec: &AlgebraSpec<S>) -> Self {
        let l = &spec.l;
        let k = 2 * spec.n - 2;
        let mu = l[(0, 0)].clone();
        let v0: Vec<S> = (0..k).map(|i| l[(i + 1, 0)].clone()).collect();
        let w0: Vec<S> = (0..k).map(|i| l[(0, i + 1)].clone()).collect();
        let d = l.block(1, 1, k, k);
        let gamma: Vec<S> = vec_add(&v0, &w0).iter().map(Scalar::half).collect();
        let rho: Vec<S> = vec_sub(&v0, &w0).iter().map(Scalar::half).collect();
        Decomposition {
            n: spec.n,
            mu,
            v0,
            w0,
            ds: d.sym_part(),
            da: d.skew_part(),
            d,
            gamma,
            rho,
            s: l.sym_part(),
            a: l.skew_part(),
            l: l.clone(),
            ctx: spec.ctx,
        }
    }

    pub fn zero_test(&self) -> ZeroTest {
        ZeroTest::new(self.ctx.tolerance, self.l.norm_f64())
    }

    pub fn tr_s(&self) -> S {
        self.s.trace()
    }

    pub fn tr_d(&self) -> S {
        self.d.trace()
    }

    /// Rebuild L from (mu, v0, w0, D); equals the stored L entrywise.
    pub fn reassemble(&self) -> Mat<S> {
        let k = 2 * self.n - 2;
        let mut l = Mat::zeros(k + 1, k + 1);
        l[(0, 0)] = self.mu.clone();
        for i in 0..k {
            l[(i + 1, 0)] = self.v0[i].clone();
            l[(0, i + 1)] = self.w0[i].clone();
        }
        l.set_block(1, 1, &self.d);
        l
    }

    pub fn spec(&self) -> AlgebraSpec<S> {
        AlgebraSpec { n: self.n, l: self.l.clone(), ctx: self.ctx }
    }
}

/// An orthogonal almost complex structure on R^{2n} compatible with the inner
/// product: J^2 = -I and J^t = -J.
#[derive(Clone, Debug)]
pub struct ComplexStructure<S: Scalar> {
    pub n: usize,
    pub j: Mat<S>,
    /// Restriction of J to a, present when span{e0,e1} and a are J-invariant
    /// with J e0 = e1 (the basis-adapted situation every closed form assumes).
    pub jprime: Option<Mat<S>>,
}

impl<S: Scalar> ComplexStructure<S> {
    /// The standard structure J e_{2i} = e_{2i+1}, 0 <= i <= n-1: block
    /// diagonal with n rotation blocks [[0,-1],[1,0]].
    pub fn standard(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid_input(format!("n must be >= 2, got {n}")));
        }
        let mut j = Mat::zeros(2 * n, 2 * n);
        for i in 0..n {
            j[(2 * i, 2 * i + 1)] = -S::one();
            j[(2 * i + 1, 2 * i)] = S::one();
        }
        let jprime = j.block(2, 2, 2 * n - 2, 2 * n - 2);
        Ok(ComplexStructure { n, j, jprime: Some(jprime) })
    }

    /// Wrap an arbitrary matrix, validating compatibility.
    pub fn from_matrix(n: usize, j: Mat<S>, zt: ZeroTest) -> Result<Self> {
        let m = 2 * n;
        if j.nrows() != m || j.ncols() != m {
            return Err(Error::invalid_input(format!("J must be {m}x{m}")));
        }
        let jj_plus_i = j.matmul(&j).add(&Mat::identity(m));
        let jt_plus_j = j.transpose().add(&j);
        if !zt.slice_is_zero(&jj_plus_i.iter().cloned().collect::<Vec<_>>())
            || !zt.slice_is_zero(&jt_plus_j.iter().cloned().collect::<Vec<_>>())
        {
            return Err(Error::invalid_input(format!(
                "J is not a compatible almost complex structure: |J^2+I| = {:.3e}, |J^t+J| = {:.3e}",
                jj_plus_i.norm_f64(),
                jt_plus_j.norm_f64()
            )));
        }
        // Adapted iff J e0 = e1 and the a-block is closed; then J|_a exists.
        let mut adapted = zt.scalar_is_zero(&(j[(1, 0)].clone() - S::one()));
        for i in [0usize, 1] {
            for k in 2..m {
                if !zt.scalar_is_zero(&j[(i, k)]) || !zt.scalar_is_zero(&j[(k, i)]) {
                    adapted = false;
                }
            }
        }
        let jprime = adapted.then(|| j.block(2, 2, m - 2, m - 2));
        Ok(ComplexStructure { n, j, jprime })
    }

    /// J restricted to a; an error for non-adapted structures, which the
    /// closed-form operations cannot consume.
    pub fn jprime(&self) -> Result<&Mat<S>> {
        self.jprime.as_ref().ok_or_else(|| {
            Error::precondition("J is not adapted to the basis (J e0 != e1 or a is not J-invariant)")
        })
    }
}

/// Standard J as a bare operation (spec surface).
pub fn standard_j<S: Scalar>(n: usize) -> Result<ComplexStructure<S>> {
    ComplexStructure::standard(n)
}

/// Embed a vector of a (length 2n-2) into g (length 2n).
pub fn embed_a<S: Scalar>(n: usize, xa: &[S]) -> Vec<S> {
    let mut v = vec![S::zero(); 2 * n];
    v[2..].clone_from_slice(xa);
    v
}

/// Embed a vector of u (length 2n-1) into g.
pub fn embed_u<S: Scalar>(n: usize, xu: &[S]) -> Vec<S> {
    let mut v = vec![S::zero(); 2 * n];
    v[1..].clone_from_slice(xu);
    v
}

pub fn basis<S: Scalar>(n: usize, idx: usize) -> Vec<S> {
    basis_vector(2 * n, idx)
}

#[allow(dead_code)]
fn _unused<S: Scalar>(a: &[S], k: &S) -> Vec<S> {
    vec_scale(a, k)
}
