//! Gray-Hervella classification of the almost Hermitian structure.
//!
//! The sixteen classes are indexed by subsets of {1,2,3,4}. On an almost
//! abelian algebra with n >= 3 several classes collapse:
//!
//!   W1 = {0},  W1+Wi = Wi,  W1+W2+W4 = W2+W4,  W1+W3+W4 = W3+W4,
//!
//! leaving ten distinct rows, each a conjunction of matrix predicates on the
//! split of L. In dimension four only {0}, W2, W4 and W survive. A tensor
//! level oracle evaluates the defining conditions of every row directly and
//! must agree with the matrix predicates.

use std::collections::BTreeMap;

use crate::algebra::{ComplexStructure, Decomposition};
use crate::connection::levi_civita;
use crate::error::{Error, Result};
use crate::mat::{basis_vector, Mat};
use crate::scalar::Scalar;
use crate::tensors::{
    delta_omega_from_connection, lee_form, nabla_omega_forms, nijenhuis, omega, tensor_t_forms,
    tensor_u_with, DOmegaClosed, TSign,
};

/// One of the sixteen Gray-Hervella classes, as a subset of {1,2,3,4}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct GhClass(u8);

impl GhClass {
    pub const KAEHLER: GhClass = GhClass(0b0000);
    pub const W1: GhClass = GhClass(0b0001);
    pub const W2: GhClass = GhClass(0b0010);
    pub const W3: GhClass = GhClass(0b0100);
    pub const W4: GhClass = GhClass(0b1000);
    pub const W12: GhClass = GhClass(0b0011);
    pub const W13: GhClass = GhClass(0b0101);
    pub const W14: GhClass = GhClass(0b1001);
    pub const W23: GhClass = GhClass(0b0110);
    pub const W24: GhClass = GhClass(0b1010);
    pub const W34: GhClass = GhClass(0b1100);
    pub const W123: GhClass = GhClass(0b0111);
    pub const W124: GhClass = GhClass(0b1011);
    pub const W134: GhClass = GhClass(0b1101);
    pub const W234: GhClass = GhClass(0b1110);
    pub const W: GhClass = GhClass(0b1111);

    pub const ALL: [GhClass; 16] = [
        Self::KAEHLER,
        Self::W1,
        Self::W2,
        Self::W3,
        Self::W4,
        Self::W12,
        Self::W13,
        Self::W14,
        Self::W23,
        Self::W24,
        Self::W34,
        Self::W123,
        Self::W124,
        Self::W134,
        Self::W234,
        Self::W,
    ];

    /// The distinct rows of the n >= 3 table.
    pub const LISTED_HIGH_DIM: [GhClass; 10] = [
        Self::KAEHLER,
        Self::W2,
        Self::W3,
        Self::W4,
        Self::W23,
        Self::W24,
        Self::W34,
        Self::W123,
        Self::W234,
        Self::W,
    ];

    /// Classes surviving in dimension four.
    pub const LISTED_DIM4: [GhClass; 4] = [Self::KAEHLER, Self::W2, Self::W4, Self::W];

    pub fn contains(&self, other: &GhClass) -> bool {
        other.0 & !self.0 == 0
    }

    pub fn is_proper_subclass_of(&self, other: &GhClass) -> bool {
        self != other && other.contains(self)
    }

    pub fn name(&self) -> &'static str {
        match self.0 {
            0b0000 => "Kaehler",
            0b0001 => "W1",
            0b0010 => "W2",
            0b0100 => "W3",
            0b1000 => "W4",
            0b0011 => "W1+W2",
            0b0101 => "W1+W3",
            0b1001 => "W1+W4",
            0b0110 => "W2+W3",
            0b1010 => "W2+W4",
            0b1100 => "W3+W4",
            0b0111 => "W1+W2+W3",
            0b1011 => "W1+W2+W4",
            0b1101 => "W1+W3+W4",
            0b1110 => "W2+W3+W4",
            _ => "W",
        }
    }

    pub fn from_name(name: &str) -> Option<GhClass> {
        Self::ALL.into_iter().find(|c| c.name() == name)
    }

    /// Collapse target on almost abelian algebras (n >= 3): the listed class
    /// with the same extension.
    pub fn collapse_target(&self) -> GhClass {
        match *self {
            Self::W1 => Self::KAEHLER,
            Self::W12 => Self::W2,
            Self::W13 => Self::W3,
            Self::W14 => Self::W4,
            Self::W124 => Self::W24,
            Self::W134 => Self::W34,
            other => other,
        }
    }
}

/// The atomic matrix predicates of the n >= 3 table.
#[derive(Clone, Debug)]
pub struct AtomicPredicates {
    /// v0 = 0
    pub p_v: bool,
    /// w0 = 0
    pub p_w: bool,
    /// D_s = 0
    pub p_sym0: bool,
    /// [D_a, J'] = 0
    pub p_au: bool,
    /// [D_s, J'] = 0
    pub p_su: bool,
    /// D_s J' + J' D_s = 0
    pub p_sp: bool,
    /// Tr D = 0, the vanishing of delta-omega(e1) (equivalently mu = Tr S)
    pub p_tr: bool,
    /// D_s = c I with c = (Tr S - mu)/(2(n-1))
    pub p_homothety: bool,
    /// D_s J' + J' D_s = 2 c J'
    pub p_conf_sp: bool,
}

/// Evaluate the atomic predicates; requires n >= 3.
pub fn atomic_predicates<S: Scalar>(
    dec: &Decomposition<S>,
    cs: &ComplexStructure<S>,
) -> Result<AtomicPredicates> {
    if dec.n < 3 {
        return Err(Error::precondition(format!(
            "the high-dimensional predicate table requires n >= 3, got n = {}",
            dec.n
        )));
    }
    let jp = cs.jprime()?;
    let zt = dec.zero_test();
    let k = 2 * dec.n - 2;
    let mz = |m: &Mat<S>| zt.slice_is_zero(&m.iter().cloned().collect::<Vec<_>>());

    let anti = dec.ds.matmul(jp).add(&jp.matmul(&dec.ds));
    // c = (Tr S - mu)/(2(n-1)) = Tr D_s / (2(n-1))
    let c = (dec.tr_s() - dec.mu.clone()) / S::from_int(2 * (dec.n as i64 - 1));
    let homothety = dec.ds.sub(&Mat::identity(k).scale(&c));
    let two_c_jp = jp.scale(&(c.clone() + &c));

    Ok(AtomicPredicates {
        p_v: zt.slice_is_zero(&dec.v0),
        p_w: zt.slice_is_zero(&dec.w0),
        p_sym0: mz(&dec.ds),
        p_au: mz(&dec.da.commutator(jp)),
        p_su: mz(&dec.ds.commutator(jp)),
        p_sp: mz(&anti),
        p_tr: zt.scalar_is_zero(&dec.tr_d()),
        p_homothety: mz(&homothety),
        p_conf_sp: mz(&anti.sub(&two_c_jp)),
    })
}

/// Membership map, minimal (genuine) class, and the collapse identities
/// applied to fill the non-listed classes.
#[derive(Clone, Debug)]
pub struct ClassReport {
    pub memberships: BTreeMap<GhClass, bool>,
    pub genuine: GhClass,
    pub collapses: Vec<String>,
}

impl ClassReport {
    pub fn member(&self, class: GhClass) -> bool {
        self.memberships.get(&class).copied().unwrap_or(false)
    }

    fn from_listed(listed: &[(GhClass, bool)], fill_collapses: bool) -> Result<Self> {
        let mut memberships: BTreeMap<GhClass, bool> = listed.iter().cloned().collect();
        let mut collapses = Vec::new();
        if fill_collapses {
            for c in
                [GhClass::W1, GhClass::W12, GhClass::W13, GhClass::W14, GhClass::W124, GhClass::W134]
            {
                let target = c.collapse_target();
                let val = memberships[&target];
                memberships.insert(c, val);
                collapses.push(format!("{} = {}", c.name(), target.name()));
            }
        }
        // membership must be monotone under inclusion
        for (a, &va) in &memberships {
            for (b, &vb) in &memberships {
                if a.is_proper_subclass_of(b) && va && !vb {
                    return Err(Error::inconsistent(format!(
                        "class memberships not monotone: {} holds but {} does not",
                        a.name(),
                        b.name()
                    )));
                }
            }
        }
        let genuine = genuine_class(listed)?;
        Ok(ClassReport { memberships, genuine, collapses })
    }
}

/// The minimal listed class containing the structure.
fn genuine_class(listed: &[(GhClass, bool)]) -> Result<GhClass> {
    let true_classes: Vec<GhClass> = listed.iter().filter(|(_, v)| *v).map(|(c, _)| *c).collect();
    let minimal: Vec<GhClass> = true_classes
        .iter()
        .copied()
        .filter(|c| !true_classes.iter().any(|c2| c2.is_proper_subclass_of(c)))
        .collect();
    match minimal.as_slice() {
        [one] => Ok(*one),
        _ => Err(Error::inconsistent(format!(
            "genuine class is not unique: minimal true classes {:?}",
            minimal.iter().map(GhClass::name).collect::<Vec<_>>()
        ))),
    }
}

/// Classify via the matrix-predicate table (branches on n = 2 vs n >= 3).
pub fn classify<S: Scalar>(
    dec: &Decomposition<S>,
    cs: &ComplexStructure<S>,
) -> Result<ClassReport> {
    if dec.n == 2 {
        return classify_dim4(dec);
    }
    let p = atomic_predicates(dec, cs)?;
    let listed = [
        (GhClass::KAEHLER, p.p_v && p.p_w && p.p_sym0 && p.p_au),
        (GhClass::W2, p.p_v && p.p_au && p.p_sp),
        (GhClass::W3, p.p_tr && p.p_v && p.p_w && p.p_au && p.p_su),
        (GhClass::W4, p.p_v && p.p_w && p.p_homothety && p.p_au),
        (GhClass::W23, p.p_tr && p.p_v && p.p_au),
        (GhClass::W24, p.p_v && p.p_au && p.p_conf_sp),
        (GhClass::W34, p.p_w && p.p_au && p.p_su),
        (GhClass::W123, p.p_tr && p.p_v),
        (GhClass::W234, p.p_au),
        (GhClass::W, true),
    ];
    ClassReport::from_listed(&listed, true)
}

/// Dimension-four table on L = [[mu,r,s],[p,a,b],[q,c,d]]:
/// {0}: p=q=r=s=0, a=d=0, b=-c; W2: p=q=0, a+d=0; W4: r=s=0, a=d, b+c=0.
fn classify_dim4<S: Scalar>(dec: &Decomposition<S>) -> Result<ClassReport> {
    let zt = dec.zero_test();
    let l = &dec.l;
    let (r, s) = (l[(0, 1)].clone(), l[(0, 2)].clone());
    let (p, a, b) = (l[(1, 0)].clone(), l[(1, 1)].clone(), l[(1, 2)].clone());
    let (q, c, d) = (l[(2, 0)].clone(), l[(2, 1)].clone(), l[(2, 2)].clone());
    let z = |x: &S| zt.scalar_is_zero(x);

    let w2 = z(&p) && z(&q) && z(&(a.clone() + &d));
    let w4 = z(&r) && z(&s) && z(&(a.clone() - &d)) && z(&(b.clone() + &c));
    let kaehler = z(&p) && z(&q) && z(&r) && z(&s) && z(&a) && z(&d) && z(&(b + &c));
    let listed = [
        (GhClass::KAEHLER, kaehler),
        (GhClass::W2, w2),
        (GhClass::W4, w4),
        (GhClass::W, true),
    ];
    ClassReport::from_listed(&listed, false)
}

/// Tensor-level oracle: evaluates the defining condition of every row from
/// the tensors themselves, then checks the result against [`classify`]. A
/// disagreement beyond tolerance is an internal-consistency error.
pub fn classify_oracle<S: Scalar>(
    dec: &Decomposition<S>,
    cs: &ComplexStructure<S>,
) -> Result<ClassReport> {
    let spec = dec.spec();
    let zt = dec.zero_test();
    let n = dec.n;
    let m = 2 * n;
    let table = levi_civita(dec, cs);

    // dense tensors on basis indices
    let forms = nabla_omega_forms(dec, cs)?;
    let dwc = DOmegaClosed::new(dec, cs)?;
    let delta = delta_omega_from_connection(&table, cs);
    let theta = lee_form(dec, cs);
    let tp = tensor_t_forms(dec, cs, TSign::Plus)?;
    let tm = tensor_t_forms(dec, cs, TSign::Minus)?;

    let mut nij: Vec<Vec<Vec<S>>> = vec![vec![vec![S::zero(); m]; m]; m];
    for i in 0..m {
        for j in 0..m {
            nij[i][j] = nijenhuis(&spec, cs, &basis_vector::<S>(m, i), &basis_vector::<S>(m, j));
        }
    }

    // max residual per raw tensor row
    let mut res: BTreeMap<GhClass, f64> = BTreeMap::new();
    let add = |res: &mut BTreeMap<GhClass, f64>, class: GhClass, v: f64| {
        let e = res.entry(class).or_insert(0.0);
        if v > *e {
            *e = v;
        }
    };

    let coef = 1.0 / (2.0 * (n as f64 - 1.0));
    for i in 0..m {
        let ei = basis_vector::<S>(m, i);
        let dv = delta[i].to_f64().abs();
        add(&mut res, GhClass::W3, dv);
        add(&mut res, GhClass::W123, dv);
        add(&mut res, GhClass::W13, dv);
        add(&mut res, GhClass::W23, dv);
        for j in 0..m {
            let ej = basis_vector::<S>(m, j);
            for k in 0..m {
                let ek = basis_vector::<S>(m, k);
                let no_v = forms[i][(j, k)].to_f64();
                let dw_v = dwc.eval_basis(i, j, k).to_f64();
                let n_v = nij[i][j][k].to_f64();
                let tp_v = tp[i][(j, k)].to_f64();
                let tm_v = tm[i][(j, k)].to_f64();
                let u_v = tensor_u_with(cs, &delta, &ei, &ej, &ek).to_f64();

                add(&mut res, GhClass::KAEHLER, no_v.abs());
                add(&mut res, GhClass::W1, (3.0 * no_v - dw_v).abs());
                add(&mut res, GhClass::W2, dw_v.abs());
                add(&mut res, GhClass::W3, n_v.abs());
                add(&mut res, GhClass::W12, tp_v.abs());
                add(&mut res, GhClass::W34, n_v.abs());
                if n >= 3 {
                    add(&mut res, GhClass::W4, (no_v + coef * u_v).abs());
                    let tw = theta[i].to_f64() * omega(&cs.j, &ej, &ek).to_f64()
                        + theta[j].to_f64() * omega(&cs.j, &ek, &ei).to_f64()
                        + theta[k].to_f64() * omega(&cs.j, &ei, &ej).to_f64();
                    add(&mut res, GhClass::W24, (dw_v - tw).abs());
                    add(&mut res, GhClass::W124, (tp_v + 2.0 * coef * u_v).abs());
                    // polarized T-(X,X,Y) = 0
                    add(&mut res, GhClass::W13, (tm_v + tm[j][(i, k)].to_f64()).abs());
                    // polarized (nabla_X omega)(X,Y) = -U(X,X,Y)/(2(n-1))
                    let u_sym = tensor_u_with(cs, &delta, &ej, &ei, &ek).to_f64();
                    add(
                        &mut res,
                        GhClass::W14,
                        (no_v + forms[j][(i, k)].to_f64() + coef * (u_v + u_sym)).abs(),
                    );
                }
                let cyc = tm_v + tm[j][(k, i)].to_f64() + tm[k][(i, j)].to_f64();
                add(&mut res, GhClass::W23, cyc.abs());
                add(&mut res, GhClass::W234, cyc.abs());
                // polarized <N(X,Y),X> = 0
                let n_star = nij[k][j][i].to_f64();
                add(&mut res, GhClass::W134, (n_v + n_star).abs());
            }
        }
    }

    let thr = zt.threshold();
    let is = |c: GhClass| res.get(&c).is_none_or(|v| *v <= thr);

    let report = if n == 2 {
        let listed = [
            (GhClass::KAEHLER, is(GhClass::KAEHLER)),
            (GhClass::W2, is(GhClass::W2)),
            (GhClass::W4, is(GhClass::W34)), // in dim 4 the W4 row is N = 0
            (GhClass::W, true),
        ];
        ClassReport::from_listed(&listed, false)?
    } else {
        let listed = [
            (GhClass::KAEHLER, is(GhClass::KAEHLER)),
            (GhClass::W2, is(GhClass::W2)),
            (GhClass::W3, is(GhClass::W3)),
            (GhClass::W4, is(GhClass::W4)),
            (GhClass::W23, is(GhClass::W23)),
            (GhClass::W24, is(GhClass::W24)),
            (GhClass::W34, is(GhClass::W34)),
            (GhClass::W123, is(GhClass::W123)),
            (GhClass::W234, is(GhClass::W234)),
            (GhClass::W, true),
        ];
        let mut rep = ClassReport::from_listed(&listed, true)?;
        // the raw (uncollapsed) tensor rows must land on their collapse targets
        let raw = [
            (GhClass::W1, GhClass::KAEHLER),
            (GhClass::W12, GhClass::W2),
            (GhClass::W13, GhClass::W3),
            (GhClass::W14, GhClass::W4),
            (GhClass::W124, GhClass::W24),
            (GhClass::W134, GhClass::W34),
        ];
        for (rc, target) in raw {
            if is(rc) != rep.member(target) {
                return Err(Error::inconsistent(format!(
                    "collapse identity {} = {} fails extensionally: raw tensor row gives {}, table gives {}",
                    rc.name(),
                    target.name(),
                    is(rc),
                    rep.member(target)
                )));
            }
        }
        rep.collapses.push("raw tensor rows verified against collapse targets".to_string());
        rep
    };

    let table_report = classify(dec, cs)?;
    for (class, &v) in &report.memberships {
        if table_report.member(*class) != v {
            return Err(Error::inconsistent(format!(
                "tensor oracle disagrees with the predicate table on {}: oracle {}, table {} (residual {:.3e})",
                class.name(),
                v,
                table_report.member(*class),
                res.get(class).copied().unwrap_or(0.0)
            )));
        }
    }
    Ok(report)
}
