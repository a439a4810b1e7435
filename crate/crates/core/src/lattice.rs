//! Lattice witnesses for the almost abelian group R x_phi R^m.
//!
//! The group admits a lattice iff phi(t0) = exp(t0 L) is conjugate to an
//! integer matrix of determinant one for some t0 != 0. The examples that
//! arise are all block diagonal, so witnesses are verified block by block:
//! each block of exp(t0 L) carries exact trace data (hyperbolic times are
//! carried symbolically through the integer trace m), the integer witness is
//! conjugate to it by a characteristic-polynomial or Jordan-type argument,
//! and the direct sum is checked for det = +1 and exact coefficientwise
//! char-poly agreement.
//!
//! Lattice invariants go through an exact integer Smith normal form: the
//! abelianization of Z x_E Z^m is Z + coker(E - I).

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::mat::Mat;
use crate::scalar::{Scalar, ZeroTest};

// ---------------------------------------------------------------------------
// Exact integer matrices
// ---------------------------------------------------------------------------

/// Dense integer matrix with exact arithmetic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMat {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMat { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            *m.at_mut(i, i) = BigInt::one();
        }
        m
    }

    pub fn from_i64_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        IntMat {
            rows: r,
            cols: c,
            data: rows.iter().flatten().map(|&v| BigInt::from(v)).collect(),
        }
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }
    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows);
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                if self.at(i, k).is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let v = self.at(i, k) * rhs.at(k, j);
                    *out.at_mut(i, j) += v;
                }
            }
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        IntMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn direct_sum(&self, rhs: &Self) -> Self {
        let mut out = Self::zeros(self.rows + rhs.rows, self.cols + rhs.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                *out.at_mut(i, j) = self.at(i, j).clone();
            }
        }
        for i in 0..rhs.rows {
            for j in 0..rhs.cols {
                *out.at_mut(self.rows + i, self.cols + j) = rhs.at(i, j).clone();
            }
        }
        out
    }

    pub fn to_f64(&self) -> Mat<f64> {
        Mat::from_fn(self.rows, self.cols, |i, j| self.at(i, j).to_f64().unwrap_or(f64::NAN))
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> BigInt {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut m = self.data.clone();
        let at = |m: &Vec<BigInt>, i: usize, j: usize| m[i * n + j].clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if at(&m, k, k).is_zero() {
                let swap = (k + 1..n).find(|&i| !at(&m, i, k).is_zero());
                match swap {
                    Some(i) => {
                        for j in 0..n {
                            m.swap(k * n + j, i * n + j);
                        }
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (at(&m, k, k) * at(&m, i, j) - at(&m, i, k) * at(&m, k, j)) / &prev;
                    m[i * n + j] = v;
                }
                m[i * n + k] = BigInt::zero();
            }
            prev = at(&m, k, k);
        }
        sign * at(&m, n - 1, n - 1)
    }

    /// Exact monic characteristic polynomial, ascending coefficients
    /// [c0, ..., c_{n-1}, 1].
    pub fn char_poly(&self) -> Vec<BigInt> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        // Faddeev-LeVerrier over the rationals; an integer matrix has
        // integer coefficients, enforced at the end.
        let a: Vec<BigRational> =
            self.data.iter().map(|v| BigRational::from_integer(v.clone())).collect();
        let at = |m: &[BigRational], i: usize, j: usize| m[i * n + j].clone();
        let matmul = |x: &[BigRational], y: &[BigRational]| {
            let mut out = vec![BigRational::zero(); n * n];
            for i in 0..n {
                for k in 0..n {
                    if at(x, i, k).is_zero() {
                        continue;
                    }
                    for j in 0..n {
                        out[i * n + j] += at(x, i, k) * at(y, k, j);
                    }
                }
            }
            out
        };
        let trace = |m: &[BigRational]| {
            let mut t = BigRational::zero();
            for i in 0..n {
                t += at(m, i, i);
            }
            t
        };
        let mut coeffs = vec![BigRational::zero(); n + 1];
        coeffs[n] = BigRational::one();
        let mut m = a.clone();
        for k in 1..=n {
            let c = -trace(&m) / BigRational::from_integer(BigInt::from(k as i64));
            coeffs[n - k] = c.clone();
            if k < n {
                // M <- A (M + c I)
                let mut shifted = m.clone();
                for i in 0..n {
                    shifted[i * n + i] += c.clone();
                }
                m = matmul(&a, &shifted);
            }
        }
        coeffs
            .into_iter()
            .map(|c| {
                debug_assert!(c.denom().is_one(), "char poly of an integer matrix is integral");
                c.numer().clone()
            })
            .collect()
    }
}

fn poly_mul_int(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Smith normal form
// ---------------------------------------------------------------------------

/// U * M * V = D with U, V unimodular and D = diag(d1, ..., dk, 0, ...),
/// d1 | d2 | ... (nonnegative).
#[derive(Clone, Debug)]
pub struct Snf {
    pub u: IntMat,
    pub d: IntMat,
    pub v: IntMat,
}

impl Snf {
    /// Diagonal invariant factors, including the zeros.
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        let k = self.d.nrows().min(self.d.ncols());
        (0..k).map(|i| self.d.at(i, i).clone()).collect()
    }
}

/// Exact Smith normal form over the integers.
pub fn smith_normal_form(m: &IntMat) -> Snf {
    let (nr, nc) = (m.nrows(), m.ncols());
    let mut d = m.clone();
    let mut u = IntMat::identity(nr);
    let mut v = IntMat::identity(nc);

    let swap_rows = |d: &mut IntMat, u: &mut IntMat, a: usize, b: usize| {
        for j in 0..d.ncols() {
            let t = d.at(a, j).clone();
            *d.at_mut(a, j) = d.at(b, j).clone();
            *d.at_mut(b, j) = t;
        }
        for j in 0..u.ncols() {
            let t = u.at(a, j).clone();
            *u.at_mut(a, j) = u.at(b, j).clone();
            *u.at_mut(b, j) = t;
        }
    };
    let swap_cols = |d: &mut IntMat, v: &mut IntMat, a: usize, b: usize| {
        for i in 0..d.nrows() {
            let t = d.at(i, a).clone();
            *d.at_mut(i, a) = d.at(i, b).clone();
            *d.at_mut(i, b) = t;
        }
        for i in 0..v.nrows() {
            let t = v.at(i, a).clone();
            *v.at_mut(i, a) = v.at(i, b).clone();
            *v.at_mut(i, b) = t;
        }
    };
    // row_i -= q * row_k etc.
    let row_op = |d: &mut IntMat, u: &mut IntMat, i: usize, k: usize, q: &BigInt| {
        for j in 0..d.ncols() {
            let t = q * d.at(k, j);
            *d.at_mut(i, j) -= t;
        }
        for j in 0..u.ncols() {
            let t = q * u.at(k, j);
            *u.at_mut(i, j) -= t;
        }
    };
    let col_op = |d: &mut IntMat, v: &mut IntMat, j: usize, k: usize, q: &BigInt| {
        for i in 0..d.nrows() {
            let t = q * d.at(i, k);
            *d.at_mut(i, j) -= t;
        }
        for i in 0..v.nrows() {
            let t = q * v.at(i, k);
            *v.at_mut(i, j) -= t;
        }
    };

    let rank_bound = nr.min(nc);
    for k in 0..rank_bound {
        // find a minimal nonzero pivot in the remaining submatrix
        loop {
            let mut pivot: Option<(usize, usize)> = None;
            for i in k..nr {
                for j in k..nc {
                    if !d.at(i, j).is_zero()
                        && pivot.is_none_or(|(pi, pj)| d.at(i, j).abs() < d.at(pi, pj).abs())
                    {
                        pivot = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = pivot else { break };
            if pi != k {
                swap_rows(&mut d, &mut u, pi, k);
            }
            if pj != k {
                swap_cols(&mut d, &mut v, pj, k);
            }
            // reduce column and row by the pivot
            let mut dirty = false;
            for i in k + 1..nr {
                if !d.at(i, k).is_zero() {
                    let q = d.at(i, k).div_floor(d.at(k, k));
                    row_op(&mut d, &mut u, i, k, &q);
                    if !d.at(i, k).is_zero() {
                        dirty = true;
                    }
                }
            }
            for j in k + 1..nc {
                if !d.at(k, j).is_zero() {
                    let q = d.at(k, j).div_floor(d.at(k, k));
                    col_op(&mut d, &mut v, j, k, &q);
                    if !d.at(k, j).is_zero() {
                        dirty = true;
                    }
                }
            }
            if dirty {
                continue;
            }
            let clean = (k + 1..nr).all(|i| d.at(i, k).is_zero())
                && (k + 1..nc).all(|j| d.at(k, j).is_zero());
            if !clean {
                continue;
            }
            // divisibility: the pivot must divide the rest of the submatrix
            let mut fixed = true;
            'outer: for i in k + 1..nr {
                for j in k + 1..nc {
                    if !(d.at(i, j) % d.at(k, k)).is_zero() {
                        // add row i to row k to pull the entry into range
                        let q = BigInt::from(-1);
                        row_op(&mut d, &mut u, k, i, &q);
                        fixed = false;
                        break 'outer;
                    }
                }
            }
            if fixed {
                break;
            }
        }
        if d.at(k, k).is_negative() {
            for j in 0..nc {
                let t = -d.at(k, j).clone();
                *d.at_mut(k, j) = t;
            }
            for j in 0..nr {
                let t = -u.at(k, j).clone();
                *u.at_mut(k, j) = t;
            }
        }
    }
    Snf { u, d, v }
}

// ---------------------------------------------------------------------------
// Blocks and witnesses
// ---------------------------------------------------------------------------

/// Rotation angles admitting an integer witness.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RotationAngle {
    TwoPi,
    Pi,
    TwoPiOver3,
    PiOver2,
    PiOver3,
}

impl RotationAngle {
    pub const ALL: [RotationAngle; 5] = [
        RotationAngle::TwoPi,
        RotationAngle::Pi,
        RotationAngle::TwoPiOver3,
        RotationAngle::PiOver2,
        RotationAngle::PiOver3,
    ];

    pub fn radians(&self) -> f64 {
        use std::f64::consts::PI;
        match self {
            RotationAngle::TwoPi => 2.0 * PI,
            RotationAngle::Pi => PI,
            RotationAngle::TwoPiOver3 => 2.0 * PI / 3.0,
            RotationAngle::PiOver2 => PI / 2.0,
            RotationAngle::PiOver3 => PI / 3.0,
        }
    }

    /// 2 cos(angle), exactly an integer for the admissible set.
    pub fn trace(&self) -> i64 {
        match self {
            RotationAngle::TwoPi => 2,
            RotationAngle::Pi => -2,
            RotationAngle::TwoPiOver3 => -1,
            RotationAngle::PiOver2 => 0,
            RotationAngle::PiOver3 => 1,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            RotationAngle::TwoPi => "2pi",
            RotationAngle::Pi => "pi",
            RotationAngle::TwoPiOver3 => "2pi/3",
            RotationAngle::PiOver2 => "pi/2",
            RotationAngle::PiOver3 => "pi/3",
        }
    }

    /// Parse an angle tag; anything outside the admissible set has no known
    /// integer witness.
    pub fn parse(tag: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == tag)
            .ok_or_else(|| {
                Error::NoWitness(format!(
                    "rotation angle '{tag}' has no known integer witness; admissible angles: 2pi, pi, 2pi/3, pi/2, pi/3"
                ))
            })
    }
}

/// One block of exp(t0 L).
#[derive(Clone, Debug, PartialEq)]
pub enum BlockSpec {
    /// exp of param * (k x k nilpotent Jordan block).
    Unipotent { size: usize, param: f64 },
    /// 2x2 block with trace exactly m and determinant 1 (m >= 3).
    Hyperbolic { m: i64 },
    Rotation { angle: RotationAngle },
    Identity { size: usize },
    /// A block that is already an integer matrix.
    Explicit { matrix: Vec<Vec<i64>> },
}

impl BlockSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            BlockSpec::Unipotent { size, .. } if *size == 0 => {
                Err(Error::invalid_input("unipotent block size must be >= 1"))
            }
            BlockSpec::Hyperbolic { m } if *m < 3 => Err(Error::invalid_input(format!(
                "hyperbolic block requires integer m >= 3, got {m}"
            ))),
            BlockSpec::Identity { size } if *size == 0 => {
                Err(Error::invalid_input("identity block size must be >= 1"))
            }
            BlockSpec::Explicit { matrix } => {
                let r = matrix.len();
                if r == 0 || matrix.iter().any(|row| row.len() != r) {
                    return Err(Error::invalid_input("explicit block must be square and nonempty"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            BlockSpec::Unipotent { size, .. } | BlockSpec::Identity { size } => *size,
            BlockSpec::Hyperbolic { .. } | BlockSpec::Rotation { .. } => 2,
            BlockSpec::Explicit { matrix } => matrix.len(),
        }
    }
}

/// exp(t0 L) restricted to one block, as floats plus exact trace data.
#[derive(Clone, Debug)]
pub struct ExpBlock {
    pub matrix: Mat<f64>,
    /// Exact characteristic polynomial, ascending coefficients.
    pub char_poly: Vec<BigInt>,
}

/// Evaluate the exponential of a block with its exact characteristic data.
pub fn exp_block(spec: &BlockSpec) -> Result<ExpBlock> {
    spec.validate()?;
    match spec {
        BlockSpec::Hyperbolic { m } => {
            let mf = *m as f64;
            let tm = ((mf + (mf * mf - 4.0).sqrt()) / 2.0).ln();
            let (ch, sh) = (tm.cosh(), tm.sinh());
            Ok(ExpBlock {
                matrix: Mat::from_rows(vec![vec![ch, sh], vec![sh, ch]]),
                char_poly: vec![BigInt::one(), BigInt::from(-m), BigInt::one()],
            })
        }
        BlockSpec::Rotation { angle } => {
            let t = angle.radians();
            let (c, s) = (t.cos(), t.sin());
            Ok(ExpBlock {
                matrix: Mat::from_rows(vec![vec![c, -s], vec![s, c]]),
                char_poly: vec![BigInt::one(), BigInt::from(-angle.trace()), BigInt::one()],
            })
        }
        BlockSpec::Unipotent { size, param } => {
            let k = *size;
            let mut m = Mat::<f64>::zeros(k, k);
            for i in 0..k {
                let mut term = 1.0;
                for j in i..k {
                    m[(i, j)] = term;
                    term *= param / ((j - i + 1) as f64);
                }
            }
            Ok(ExpBlock { matrix: m, char_poly: unipotent_char_poly(k) })
        }
        BlockSpec::Identity { size } => Ok(ExpBlock {
            matrix: Mat::identity(*size),
            char_poly: unipotent_char_poly(*size),
        }),
        BlockSpec::Explicit { matrix } => {
            let im = IntMat::from_i64_rows(matrix);
            Ok(ExpBlock { matrix: im.to_f64(), char_poly: im.char_poly() })
        }
    }
}

/// (x - 1)^k, ascending coefficients.
fn unipotent_char_poly(k: usize) -> Vec<BigInt> {
    let mut p = vec![BigInt::one()];
    for _ in 0..k {
        p = poly_mul_int(&p, &[BigInt::from(-1), BigInt::one()]);
    }
    p
}

/// Integer witness for one block together with the conjugacy evidence.
#[derive(Clone, Debug)]
pub struct BlockWitness {
    pub e: IntMat,
    pub char_poly: Vec<BigInt>,
    pub evidence: String,
}

/// Produce the integer matrix conjugate to the block exponential.
pub fn block_integer_witness(spec: &BlockSpec) -> Result<BlockWitness> {
    spec.validate()?;
    match spec {
        BlockSpec::Hyperbolic { m } => Ok(BlockWitness {
            e: IntMat::from_i64_rows(&[vec![0, -1], vec![1, *m]]),
            char_poly: vec![BigInt::one(), BigInt::from(-m), BigInt::one()],
            evidence: format!(
                "companion matrix of x^2 - {m} x + 1; both sides share this characteristic polynomial, whose roots are real and distinct for m >= 3, hence they are conjugate"
            ),
        }),
        BlockSpec::Rotation { angle } => {
            let tr = angle.trace();
            let (e, evidence) = match angle {
                RotationAngle::TwoPi => (IntMat::identity(2), "the full turn equals the identity".to_string()),
                RotationAngle::Pi => {
                    let mut e = IntMat::zeros(2, 2);
                    *e.at_mut(0, 0) = BigInt::from(-1);
                    *e.at_mut(1, 1) = BigInt::from(-1);
                    (e, "the half turn equals minus the identity".to_string())
                }
                _ => (
                    IntMat::from_i64_rows(&[vec![0, -1], vec![1, tr]]),
                    format!(
                        "companion matrix of x^2 - ({tr}) x + 1; both sides share this characteristic polynomial, whose roots are distinct complex units, hence they are conjugate"
                    ),
                ),
            };
            Ok(BlockWitness {
                e,
                char_poly: vec![BigInt::one(), BigInt::from(-tr), BigInt::one()],
                evidence,
            })
        }
        BlockSpec::Unipotent { size, param } => {
            let k = *size;
            let mut e = IntMat::identity(k);
            if *param != 0.0 {
                for i in 0..k - 1 {
                    *e.at_mut(i, i + 1) = BigInt::one();
                }
            }
            Ok(BlockWitness {
                e,
                char_poly: unipotent_char_poly(k),
                evidence: if *param == 0.0 || k == 1 {
                    "both sides are the identity".to_string()
                } else {
                    format!(
                        "unitriangular with a single Jordan block of size {k} on both sides, hence conjugate"
                    )
                },
            })
        }
        BlockSpec::Identity { size } => Ok(BlockWitness {
            e: IntMat::identity(*size),
            char_poly: unipotent_char_poly(*size),
            evidence: "identity block, witnessed by itself".to_string(),
        }),
        BlockSpec::Explicit { matrix } => {
            let e = IntMat::from_i64_rows(matrix);
            let det = e.det();
            if det.abs() != BigInt::one() {
                return Err(Error::NoWitness(format!(
                    "explicit block has determinant {det}; a lattice witness must be unimodular"
                )));
            }
            let char_poly = e.char_poly();
            Ok(BlockWitness {
                e,
                char_poly,
                evidence: "exp(t0 L) restricted to this block is already an integer matrix".to_string(),
            })
        }
    }
}

/// Assembled witness for exp(t0 L): the direct sum of block witnesses.
#[derive(Clone, Debug)]
pub struct LatticeWitness {
    pub t0: String,
    pub e: IntMat,
    pub det: BigInt,
    /// det = +1 as the criterion demands; a det = -1 witness is flagged, not
    /// claimed as a lattice.
    pub in_sl: bool,
    pub char_poly: Vec<BigInt>,
    pub evidence: Vec<String>,
    /// Set when hyperbolic blocks make the family countable in m.
    pub countable_family: Option<String>,
}

/// Assemble a witness from blocks; char polys must agree exactly.
pub fn assemble_witness(blocks: &[BlockSpec], t0: impl Into<String>) -> Result<LatticeWitness> {
    if blocks.is_empty() {
        return Err(Error::invalid_input("witness needs at least one block"));
    }
    let mut e = IntMat::zeros(0, 0);
    let mut exp_poly = vec![BigInt::one()];
    let mut evidence = Vec::new();
    let mut witness_poly = vec![BigInt::one()];
    let mut hyper_ms = Vec::new();
    for spec in blocks {
        let xb = exp_block(spec)?;
        let wb = block_integer_witness(spec)?;
        exp_poly = poly_mul_int(&exp_poly, &xb.char_poly);
        witness_poly = poly_mul_int(&witness_poly, &wb.char_poly);
        evidence.push(wb.evidence.clone());
        e = e.direct_sum(&wb.e);
        if let BlockSpec::Hyperbolic { m } = spec {
            hyper_ms.push(*m);
        }
    }
    if exp_poly != witness_poly {
        return Err(Error::inconsistent(
            "assembled witness characteristic polynomial differs from the block exponentials",
        ));
    }
    // independent recomputation from the assembled matrix itself
    let direct = e.char_poly();
    if direct != witness_poly {
        return Err(Error::inconsistent(
            "direct characteristic polynomial of E differs from the block product",
        ));
    }
    let det = e.det();
    let in_sl = det == BigInt::one();
    if det.abs() != BigInt::one() {
        return Err(Error::NoWitness(format!("assembled witness has determinant {det}")));
    }
    if !in_sl {
        evidence.push(
            "determinant is -1: the matrix is unimodular but outside SL, so no lattice is claimed"
                .to_string(),
        );
    }
    let countable_family = (!hyper_ms.is_empty()).then(|| {
        format!(
            "one witness for every integer m >= 3 in place of m = {:?}; the torsion invariants m - 2 distinguish them pairwise",
            hyper_ms
        )
    });
    Ok(LatticeWitness {
        t0: t0.into(),
        e,
        det,
        in_sl,
        char_poly: witness_poly,
        evidence,
        countable_family,
    })
}

// ---------------------------------------------------------------------------
// Abelianization
// ---------------------------------------------------------------------------

/// Finitely generated abelian group Z^rank + sum of Z_{torsion[i]}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbelianGroup {
    pub rank: usize,
    pub torsion: Vec<BigInt>,
}

impl AbelianGroup {
    pub fn describe(&self) -> String {
        let mut parts = Vec::new();
        if self.rank > 0 {
            parts.push(if self.rank == 1 { "Z".to_string() } else { format!("Z^{}", self.rank) });
        }
        for t in &self.torsion {
            parts.push(format!("Z_{t}"));
        }
        if parts.is_empty() {
            "0".to_string()
        } else {
            parts.join(" + ")
        }
    }
}

/// Abelianization of the lattice Z x_E Z^m: Z + coker(E - I), computed from
/// the Smith normal form of E - I. Trivial factors are dropped.
pub fn lattice_abelianization(e: &IntMat) -> Result<AbelianGroup> {
    if e.nrows() != e.ncols() {
        return Err(Error::invalid_input("E must be square"));
    }
    let det = e.det();
    if det.abs() != BigInt::one() {
        return Err(Error::precondition(format!(
            "abelianization requires det E = +-1, got {det}"
        )));
    }
    let e_minus_i = e.sub(&IntMat::identity(e.nrows()));
    let snf = smith_normal_form(&e_minus_i);
    // verify the decomposition exactly
    let recon = snf.u.matmul(&e_minus_i).matmul(&snf.v);
    if recon != snf.d {
        return Err(Error::inconsistent("Smith decomposition failed to reassemble"));
    }
    let factors = snf.invariant_factors();
    let zeros = factors.iter().filter(|f| f.is_zero()).count();
    let torsion: Vec<BigInt> = factors.into_iter().filter(|f| *f > BigInt::one()).collect();
    Ok(AbelianGroup { rank: 1 + zeros, torsion })
}

// ---------------------------------------------------------------------------
// Isomorphism of almost abelian algebras up to scaling
// ---------------------------------------------------------------------------

/// Decide whether c L1 and L2 are conjugate: exactly (rational canonical
/// form via the polynomial Smith form of xI - M) when the scalars are exact,
/// otherwise by comparing eigenvalue clusters and the rank profile of powers
/// of (M - lambda I).
pub fn isomorphism_scale_check<S: Scalar>(
    l1: &Mat<S>,
    l2: &Mat<S>,
    c: &S,
    zt: ZeroTest,
) -> Result<bool> {
    if l1.nrows() != l2.nrows() || l1.ncols() != l2.ncols() || !l1.is_square() {
        return Err(Error::invalid_input("matrices must be square of the same size"));
    }
    if c.is_exact_zero() {
        return Err(Error::invalid_input("scale factor c must be nonzero"));
    }
    if S::EXACT {
        let a: Vec<Vec<BigRational>> = (0..l1.nrows())
            .map(|i| {
                (0..l1.ncols())
                    .map(|j| (l1[(i, j)].clone() * c).try_to_rational().expect("exact scalar"))
                    .collect()
            })
            .collect();
        let b: Vec<Vec<BigRational>> = (0..l2.nrows())
            .map(|i| {
                (0..l2.ncols()).map(|j| l2[(i, j)].try_to_rational().expect("exact scalar")).collect()
            })
            .collect();
        Ok(poly_invariant_factors(&a) == poly_invariant_factors(&b))
    } else {
        Ok(similar_f64(&l1.to_f64().scale(&c.to_f64()), &l2.to_f64(), zt))
    }
}

// --- exact path: polynomial Smith form of xI - M over Q[x] ---

type Poly = Vec<BigRational>; // ascending, normalized (no trailing zeros)

fn ptrim(mut p: Poly) -> Poly {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    p
}

fn pdeg(p: &Poly) -> Option<usize> {
    if p.is_empty() {
        None
    } else {
        Some(p.len() - 1)
    }
}

fn pmul(a: &Poly, b: &Poly) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    ptrim(out)
}

fn psub(a: &Poly, b: &Poly) -> Poly {
    let mut out = vec![BigRational::zero(); a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        out[i] -= y;
    }
    ptrim(out)
}

/// Quotient and remainder of a by b (b nonzero).
fn pdivmod(a: &Poly, b: &Poly) -> (Poly, Poly) {
    let db = pdeg(b).expect("division by zero polynomial");
    let mut rem = a.clone();
    let mut quo: Poly = Vec::new();
    while let Some(dr) = pdeg(&rem) {
        if dr < db {
            break;
        }
        let coef = rem[dr].clone() / b[db].clone();
        let shift = dr - db;
        if quo.len() < shift + 1 {
            quo.resize(shift + 1, BigRational::zero());
        }
        quo[shift] = coef.clone();
        let mut sub = vec![BigRational::zero(); shift];
        sub.push(coef);
        rem = psub(&rem, &pmul(&sub, b));
    }
    (ptrim(quo), rem)
}

fn pmonic(p: &Poly) -> Poly {
    match pdeg(p) {
        None => Vec::new(),
        Some(d) => {
            let lead = p[d].clone();
            p.iter().map(|c| c / lead.clone()).collect()
        }
    }
}

/// Invariant factors of xI - M over Q[x], monic, nontrivial ones only.
fn poly_invariant_factors(m: &[Vec<BigRational>]) -> Vec<Poly> {
    let n = m.len();
    // xI - M as a polynomial matrix
    let mut a: Vec<Vec<Poly>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut p = vec![-m[i][j].clone()];
                    if i == j {
                        p.push(BigRational::one());
                    }
                    ptrim(p)
                })
                .collect()
        })
        .collect();

    for k in 0..n {
        loop {
            // minimal-degree nonzero entry in the submatrix
            let mut pivot: Option<(usize, usize, usize)> = None;
            for i in k..n {
                for j in k..n {
                    if let Some(d) = pdeg(&a[i][j]) {
                        if pivot.is_none_or(|(_, _, pd)| d < pd) {
                            pivot = Some((i, j, d));
                        }
                    }
                }
            }
            let Some((pi, pj, _)) = pivot else { break };
            a.swap(k, pi);
            for row in a.iter_mut() {
                row.swap(k, pj);
            }
            let mut dirty = false;
            for i in k + 1..n {
                if pdeg(&a[i][k]).is_some() {
                    let (q, r) = pdivmod(&a[i][k].clone(), &a[k][k].clone());
                    for j in k..n {
                        let t = pmul(&q, &a[k][j]);
                        a[i][j] = psub(&a[i][j], &t);
                    }
                    if pdeg(&r).is_some() {
                        dirty = true;
                    }
                }
            }
            for j in k + 1..n {
                if pdeg(&a[k][j]).is_some() {
                    let (q, r) = pdivmod(&a[k][j].clone(), &a[k][k].clone());
                    for i in k..n {
                        let t = pmul(&q, &a[i][k]);
                        a[i][j] = psub(&a[i][j], &t);
                    }
                    if pdeg(&r).is_some() {
                        dirty = true;
                    }
                }
            }
            if dirty {
                continue;
            }
            let clean = (k + 1..n).all(|i| a[i][k].is_empty())
                && (k + 1..n).all(|j| a[k][j].is_empty());
            if !clean {
                continue;
            }
            // divisibility of the remaining entries by the pivot
            let mut fixed = true;
            'outer: for i in k + 1..n {
                for j in k + 1..n {
                    if pdeg(&a[i][j]).is_some() {
                        let (_, r) = pdivmod(&a[i][j], &a[k][k]);
                        if pdeg(&r).is_some() {
                            // add row i to row k
                            for jj in k..n {
                                let t = a[i][jj].clone();
                                a[k][jj] = psub(&a[k][jj], &pmul(&vec![-BigRational::one()], &t));
                            }
                            fixed = false;
                            break 'outer;
                        }
                    }
                }
            }
            if fixed {
                break;
            }
        }
    }
    (0..n)
        .map(|k| pmonic(&a[k][k]))
        .filter(|p| pdeg(p).is_some_and(|d| d > 0))
        .collect()
}

// --- float path: eigenvalue clusters and rank profiles ---

fn similar_f64(a: &Mat<f64>, b: &Mat<f64>, zt: ZeroTest) -> bool {
    use nalgebra::Complex;
    let n = a.nrows();
    let scale = a.norm_f64().max(b.norm_f64()).max(1.0);
    let tol = zt.tol.max(1e-9) * scale;
    // cluster the union of eigenvalues; multiplicities must match
    let ea = a.to_na().complex_eigenvalues();
    let eb = b.to_na().complex_eigenvalues();
    let cluster_tol = (tol * 1e3).max(1e-5 * scale);
    let mut reps: Vec<(Complex<f64>, usize, usize)> = Vec::new();
    for (which, eigs) in [(0usize, &ea), (1usize, &eb)] {
        for z in eigs.iter() {
            match reps.iter_mut().find(|(w, _, _)| (w - z).norm() <= cluster_tol) {
                Some(entry) => {
                    if which == 0 {
                        entry.1 += 1;
                    } else {
                        entry.2 += 1;
                    }
                }
                None => reps.push((*z, usize::from(which == 0), usize::from(which == 1))),
            }
        }
    }
    for (_, ca, cb) in &reps {
        if ca != cb {
            return false;
        }
    }
    // Jordan type at each eigenvalue: rank profile of powers
    let rank = |m: &nalgebra::DMatrix<Complex<f64>>| -> usize {
        let sv = m.clone().svd(false, false).singular_values;
        let smax = sv.iter().cloned().fold(0.0f64, f64::max).max(1.0);
        sv.iter().filter(|s| **s > 1e-9 * smax * n as f64).count()
    };
    let to_c = |m: &Mat<f64>| {
        nalgebra::DMatrix::from_fn(n, n, |i, j| Complex::new(m[(i, j)], 0.0))
    };
    let ac = to_c(a);
    let bc = to_c(b);
    for (lambda, mult, _) in &reps {
        let shift_a = &ac - nalgebra::DMatrix::from_diagonal_element(n, n, *lambda);
        let shift_b = &bc - nalgebra::DMatrix::from_diagonal_element(n, n, *lambda);
        let mut pa = shift_a.clone();
        let mut pb = shift_b.clone();
        for _ in 0..*mult {
            if rank(&pa) != rank(&pb) {
                return false;
            }
            pa *= &shift_a;
            pb *= &shift_b;
        }
    }
    true
}
