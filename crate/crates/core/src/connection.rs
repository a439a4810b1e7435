//! Levi-Civita connection of the invariant metric.
//!
//! In the orthonormal basis the connection is the family of skew matrices
//! Lambda_i = nabla_{e_i}, pinned by four rules:
//!
//!   nabla_{e0} e0 = 0,   nabla_{e0} u = A u,
//!   nabla_u e0   = -S u, nabla_u v   = <S u, v> e0,
//!
//! with S, A the symmetric and skew parts of L on u. The Koszul formula
//! 2<nabla_x y, z> = <[x,y],z> - <[y,z],x> + <[z,x],y> is kept alongside as an
//! independent oracle built only from the bracket.

use crate::algebra::{AlgebraSpec, ComplexStructure, Decomposition};
use crate::mat::{basis_vector, dot, Mat};
use crate::scalar::Scalar;

/// The matrices of nabla_{e_i} acting on g, indexed by i = 0..2n.
#[derive(Clone, Debug)]
pub struct ConnectionTable<S: Scalar> {
    pub lambdas: Vec<Mat<S>>,
}

impl<S: Scalar> ConnectionTable<S> {
    pub fn dim(&self) -> usize {
        self.lambdas.len()
    }

    /// nabla_x for an arbitrary x in g, by tensoriality in the lower slot.
    pub fn nabla_along(&self, x: &[S]) -> Mat<S> {
        let m = self.dim();
        let mut out = Mat::zeros(m, m);
        for (i, lam) in self.lambdas.iter().enumerate() {
            if !x[i].is_exact_zero() {
                out = out.add(&lam.scale(&x[i]));
            }
        }
        out
    }

    /// Sum_i nabla_{e_i} e_i; equals (Tr S) e0.
    pub fn trace_vector(&self) -> Vec<S> {
        let m = self.dim();
        let mut acc = vec![S::zero(); m];
        for (i, lam) in self.lambdas.iter().enumerate() {
            let col = lam.col(i);
            for k in 0..m {
                acc[k] = acc[k].clone() + col[k].clone();
            }
        }
        acc
    }
}

/// Build the connection from the closed-form rules.
pub fn levi_civita<S: Scalar>(dec: &Decomposition<S>, _j: &ComplexStructure<S>) -> ConnectionTable<S> {
    let n = dec.n;
    let m = 2 * n;
    let mut lambdas = Vec::with_capacity(m);

    // nabla_{e0}: zero on e0, A on u.
    let mut lam0 = Mat::zeros(m, m);
    lam0.set_block(1, 1, &dec.a);
    lambdas.push(lam0);

    // nabla_{e_i}, i >= 1: e0 -> -S e_i, v -> <S e_i, v> e0.
    for i in 1..m {
        let se_i = dec.s.col(i - 1);
        let mut lam = Mat::zeros(m, m);
        for k in 0..m - 1 {
            lam[(k + 1, 0)] = -se_i[k].clone();
            lam[(0, k + 1)] = se_i[k].clone();
        }
        lambdas.push(lam);
    }
    ConnectionTable { lambdas }
}

/// nabla_x y from the Koszul formula, using only the bracket.
pub fn koszul_oracle<S: Scalar>(spec: &AlgebraSpec<S>, x: &[S], y: &[S]) -> Vec<S> {
    let m = 2 * spec.n;
    let xy = spec.bracket(x, y);
    let mut out = vec![S::zero(); m];
    for k in 0..m {
        let z = basis_vector::<S>(m, k);
        let yz = spec.bracket(y, &z);
        let zx = spec.bracket(&z, x);
        out[k] = (dot(&xy, &z) - dot(&yz, x) + dot(&zx, y)).half();
    }
    out
}
