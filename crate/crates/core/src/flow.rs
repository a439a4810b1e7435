//! Dirichlet energy E(J) = Sum_i |nabla_{e_i} J|^2 over the compatible
//! orthogonal complex structures on a fixed unimodular metric almost abelian
//! algebra, minimized by Riemannian gradient descent.
//!
//! The tangent space at J is {K skew : KJ + JK = 0} and the projection of a
//! skew X onto it is (X + JXJ)/2. On a unimodular algebra the Euclidean
//! gradient of E is the projection of -2 nabla*nabla J, which vanishes iff
//! [J, nabla*nabla J] = 0; fixed points of the flow are exactly the harmonic
//! structures. Steps retract by two-sided conjugation with exp of a skew
//! matrix, which stays on the constraint set by construction.

use crate::algebra::{ComplexStructure, Decomposition};
use crate::connection::levi_civita;
use crate::error::{Error, Result};
use crate::harmonic::{adapted_residuals, is_harmonic_oracle};
use crate::mat::Mat;
use crate::scalar::Scalar;
use crate::tensors::rough_laplacian;
use rand::Rng;

/// Matrix exponential by scaling and squaring with a Taylor tail; the inputs
/// here are small skew matrices, so the series converges fast.
pub fn expm(a: &Mat<f64>) -> Mat<f64> {
    let n = a.nrows();
    let norm = a.norm_f64();
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scaled = a.map(|x| x / f64::powi(2.0, squarings as i32));
    let mut term = Mat::<f64>::identity(n);
    let mut sum = term.clone();
    for k in 1..=30 {
        term = term.matmul(&scaled).map(|x| x / k as f64);
        let tn = term.norm_f64();
        sum = sum.add(&term);
        if tn < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        sum = sum.matmul(&sum);
    }
    sum
}

/// One point of the descent.
#[derive(Clone, Debug)]
pub struct FlowState {
    pub j: Mat<f64>,
    pub energy: f64,
    pub grad_norm: f64,
    pub step: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct FlowOptions {
    pub tol_grad: f64,
    pub max_steps: usize,
    pub initial_step: f64,
    pub keep_trace: bool,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions { tol_grad: 1e-8, max_steps: 100_000, initial_step: 0.1, keep_trace: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlowVerdict {
    Converged,
    Stagnated,
    StepBudgetExhausted,
}

impl FlowVerdict {
    pub fn name(&self) -> &'static str {
        match self {
            FlowVerdict::Converged => "converged",
            FlowVerdict::Stagnated => "stagnated",
            FlowVerdict::StepBudgetExhausted => "step-budget-exhausted",
        }
    }
}

#[derive(Clone, Debug)]
pub struct TracePoint {
    pub step: usize,
    pub energy: f64,
    pub grad_norm: f64,
}

#[derive(Clone, Debug)]
pub struct FlowResult {
    pub state: FlowState,
    pub verdict: FlowVerdict,
    pub trace: Vec<TracePoint>,
    /// Oracle certificate of the limit (converged runs only).
    pub certified_harmonic: bool,
    /// Closed-form residuals of the limit in its own adapted splitting.
    pub closed_form_residuals: Option<(f64, f64)>,
}

/// E(J) = Sum_i |[Lambda_i, J]|^2; zero exactly for Kaehler pairs.
pub fn dirichlet_energy<S: Scalar>(
    dec: &Decomposition<S>,
    cs: &ComplexStructure<S>,
) -> Result<S> {
    validate_compatible(&cs.j, dec)?;
    let table = levi_civita(dec, cs);
    let mut acc = S::zero();
    for lam in &table.lambdas {
        acc = acc + lam.commutator(&cs.j).frob_sq();
    }
    Ok(acc)
}

fn validate_compatible<S: Scalar>(j: &Mat<S>, dec: &Decomposition<S>) -> Result<()> {
    let m = 2 * dec.n;
    let zt = dec.zero_test();
    let r1 = j.matmul(j).add(&Mat::identity(m));
    let r2 = j.transpose().add(j);
    let ok = zt.slice_is_zero(&r1.iter().cloned().collect::<Vec<_>>())
        && zt.slice_is_zero(&r2.iter().cloned().collect::<Vec<_>>());
    if !ok {
        return Err(Error::invalid_input(format!(
            "J is not compatible: |J^2 + I| = {:.3e}, |J^t + J| = {:.3e}",
            r1.norm_f64(),
            r2.norm_f64()
        )));
    }
    Ok(())
}

/// Projection of a skew matrix onto the tangent space at J.
pub fn project_tangent(j: &Mat<f64>, x: &Mat<f64>) -> Mat<f64> {
    x.add(&j.matmul(x).matmul(j)).map(|v| v * 0.5)
}

/// Riemannian gradient of the energy at J: the tangent projection of
/// -2 nabla*nabla J. Requires a unimodular algebra, where the algebraic first
/// variation pairs exactly with the rough Laplacian.
pub fn energy_gradient(dec: &Decomposition<f64>, j: &Mat<f64>) -> Result<Mat<f64>> {
    let zt = dec.zero_test();
    let tr = dec.l.trace();
    if !zt.scalar_is_zero(&tr) {
        return Err(Error::precondition(format!(
            "energy flow requires a unimodular algebra (Tr L = 0), got Tr L = {tr}"
        )));
    }
    validate_compatible(j, dec)?;
    let cs = ComplexStructure { n: dec.n, j: j.clone(), jprime: None };
    let r = rough_laplacian(dec, &cs);
    Ok(project_tangent(j, &r.map(|v| -2.0 * v)))
}

/// Move from J along the tangent direction `t` by parameter `tau`:
/// J(tau) = exp(tau/2 J T) J exp(-tau/2 J T), whose derivative at 0 is T.
pub fn retract(j: &Mat<f64>, t: &Mat<f64>, tau: f64) -> Mat<f64> {
    let omega = j.matmul(t).map(|v| v * 0.5 * tau);
    let g = expm(&omega);
    let ginv = expm(&omega.map(|v| -v));
    g.matmul(j).matmul(&ginv)
}

/// Pull a near-compatible J back onto the constraint set: exact skew
/// projection followed by one polar Newton step J (3I - J^t J)/2, which keeps
/// skewness and drives J^2 to -I quadratically. Rounding would otherwise
/// accumulate linearly over long runs.
fn renormalize(j: &Mat<f64>) -> Mat<f64> {
    let sk = j.skew_part();
    let jtj = sk.transpose().matmul(&sk);
    let corr = Mat::identity(j.nrows()).scale(&3.0).sub(&jtj);
    sk.matmul(&corr).map(|v| v * 0.5)
}

fn state_at(dec: &Decomposition<f64>, j: Mat<f64>, step: usize) -> Result<FlowState> {
    let cs = ComplexStructure { n: dec.n, j: j.clone(), jprime: None };
    let energy = dirichlet_energy(dec, &cs)?;
    let grad_norm = energy_gradient(dec, &j)?.norm_f64();
    Ok(FlowState { j, energy, grad_norm, step })
}

/// One descent step with backtracking: Omega = J K / 2 and
/// J' = exp(-h Omega) J exp(h Omega), halving h until the energy decreases.
/// Returns the accepted state and the accepted step size.
pub fn flow_step(dec: &Decomposition<f64>, state: &FlowState, h: f64) -> Result<(FlowState, f64)> {
    if !h.is_finite() || h <= 0.0 {
        return Err(Error::invalid_input(format!("step size must be positive, got {h}")));
    }
    let k = energy_gradient(dec, &state.j)?;
    let k_sq = k.frob_sq();
    if k_sq == 0.0 {
        // fixed point: J unchanged
        return Ok((
            FlowState { j: state.j.clone(), energy: state.energy, grad_norm: 0.0, step: state.step },
            h,
        ));
    }
    let descent = k.map(|v| -v);
    let mut hh = h;
    while hh >= 1e-14 {
        let j_next = renormalize(&retract(&state.j, &descent, hh));
        let next = state_at(dec, j_next, state.step + 1)?;
        // sufficient decrease, so accepted steps make real progress instead
        // of grazing the stability boundary
        if next.energy <= state.energy - 0.25 * hh * k_sq {
            return Ok((next, hh));
        }
        hh *= 0.5;
    }
    Err(Error::Stagnation(format!(
        "backtracking underflowed below 1e-14 at step {} (energy {:.6e}, grad {:.3e})",
        state.step, state.energy, state.grad_norm
    )))
}

/// Run the descent from `j0` until the gradient norm drops below
/// `opts.tol_grad` or the step budget is exhausted. Converged limits are
/// certified against the harmonicity oracle and, in their own adapted
/// splitting, against the closed-form conditions.
pub fn run_flow(
    dec: &Decomposition<f64>,
    j0: &Mat<f64>,
    opts: &FlowOptions,
) -> Result<FlowResult> {
    let mut state = state_at(dec, j0.clone(), 0)?;
    let mut h = opts.initial_step;
    let mut trace = Vec::new();
    let mut verdict = FlowVerdict::StepBudgetExhausted;

    for _ in 0..opts.max_steps {
        if opts.keep_trace {
            trace.push(TracePoint { step: state.step, energy: state.energy, grad_norm: state.grad_norm });
        }
        if state.grad_norm <= opts.tol_grad {
            verdict = FlowVerdict::Converged;
            break;
        }
        match flow_step(dec, &state, h) {
            Ok((next, accepted)) => {
                debug_assert!(next.energy <= state.energy);
                state = next;
                h = (accepted * 2.0).min(opts.initial_step * 8.0);
            }
            Err(Error::Stagnation(msg)) => {
                if state.grad_norm <= opts.tol_grad {
                    verdict = FlowVerdict::Converged;
                } else {
                    verdict = FlowVerdict::Stagnated;
                    if opts.keep_trace {
                        trace.push(TracePoint {
                            step: state.step,
                            energy: state.energy,
                            grad_norm: state.grad_norm,
                        });
                    }
                    let _ = msg;
                }
                break;
            }
            Err(e) => return Err(e),
        }
    }
    if state.grad_norm <= opts.tol_grad {
        verdict = FlowVerdict::Converged;
    }
    if opts.keep_trace {
        trace.push(TracePoint { step: state.step, energy: state.energy, grad_norm: state.grad_norm });
    }

    let mut certified = false;
    let mut closed = None;
    if verdict == FlowVerdict::Converged {
        let zt = dec.zero_test();
        let cs = ComplexStructure::from_matrix(dec.n, state.j.clone(), zt)
            .unwrap_or(ComplexStructure { n: dec.n, j: state.j.clone(), jprime: None });
        let oracle = is_harmonic_oracle(dec, &cs);
        // certify at a tolerance compatible with the gradient stop
        let h_norm = oracle.residuals["|[J, nabla*nabla J]|/2"];
        certified = h_norm <= (opts.tol_grad * 10.0).max(zt.threshold());
        if !certified {
            return Err(Error::inconsistent(format!(
                "flow converged (grad {:.3e}) but the limit fails the harmonicity oracle: |H| = {h_norm:.3e}",
                state.grad_norm
            )));
        }
        let (r1, r2) = adapted_residuals(&dec.l, dec.n, &state.j);
        let thr = (opts.tol_grad * 100.0).max(zt.threshold());
        if r1 > thr || r2 > thr {
            return Err(Error::inconsistent(format!(
                "flow limit fails the closed-form conditions in its adapted splitting: (i) {r1:.3e}, (ii) {r2:.3e}"
            )));
        }
        closed = Some((r1, r2));
    }

    let result = FlowResult { state, verdict, trace, certified_harmonic: certified, closed_form_residuals: closed };
    match result.verdict {
        FlowVerdict::Converged => Ok(result),
        FlowVerdict::Stagnated => Err(Error::Stagnation(format!(
            "no energy decrease at step {} (energy {:.6e}, grad {:.3e})",
            result.state.step, result.state.energy, result.state.grad_norm
        ))),
        FlowVerdict::StepBudgetExhausted => Err(Error::NonConvergence(format!(
            "step budget {} exhausted (energy {:.6e}, grad {:.3e})",
            opts.max_steps, result.state.energy, result.state.grad_norm
        ))),
    }
}

/// Random compatible structure Q J_std Q^t from a Haar-ish orthogonal Q.
pub fn random_compatible_j(n: usize, rng: &mut impl Rng) -> Mat<f64> {
    let m = 2 * n;
    let g = nalgebra::DMatrix::<f64>::from_fn(m, m, |_, _| {
        // Box-Muller normal
        let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
        let u2: f64 = rng.gen_range(0.0..1.0);
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    });
    let qr = g.qr();
    let q = Mat::from_na(&qr.q());
    let jstd = ComplexStructure::<f64>::standard(n).unwrap().j;
    q.matmul(&jstd).matmul(&q.transpose())
}

/// Random unit tangent direction at J.
pub fn random_tangent(j: &Mat<f64>, rng: &mut impl Rng) -> Mat<f64> {
    let m = j.nrows();
    let x = Mat::from_fn(m, m, |_, _| rng.gen_range(-1.0..1.0));
    let t = project_tangent(j, &x.skew_part());
    let norm = t.norm_f64();
    if norm < 1e-12 {
        return random_tangent(j, rng);
    }
    t.map(|v| v / norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::AlgebraSpec;
    use crate::scalar::ScalarContext;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn kt() -> AlgebraSpec<f64> {
        let mut l = Mat::<f64>::zeros(3, 3);
        l[(2, 1)] = 1.0;
        AlgebraSpec::new(2, l, ScalarContext::default()).unwrap()
    }

    fn kaehler_admitting(n: usize) -> AlgebraSpec<f64> {
        // v0 = w0 = 0, D = J2 (+) 0: in u(n-1), traceless
        let mut l = Mat::<f64>::zeros(2 * n - 1, 2 * n - 1);
        l[(1, 2)] = -1.0;
        l[(2, 1)] = 1.0;
        AlgebraSpec::new(n, l, ScalarContext::default()).unwrap()
    }

    #[test]
    fn expm_on_rotations() {
        // exp of the quarter-turn generator is the quarter turn
        let mut a = Mat::<f64>::zeros(2, 2);
        a[(0, 1)] = -std::f64::consts::FRAC_PI_2;
        a[(1, 0)] = std::f64::consts::FRAC_PI_2;
        let e = expm(&a);
        let expected = Mat::from_rows(vec![vec![0.0, -1.0], vec![1.0, 0.0]]);
        assert!(e.sub(&expected).norm_f64() < 1e-12);
        assert!(expm(&Mat::<f64>::zeros(3, 3)).sub(&Mat::identity(3)).norm_f64() == 0.0);
    }

    #[test]
    fn energy_zero_iff_kaehler() {
        // abelian algebra: any compatible J has zero energy
        let spec = AlgebraSpec::new(2, Mat::<f64>::zeros(3, 3), ScalarContext::default()).unwrap();
        let dec = spec.decompose();
        let mut rng = ChaCha8Rng::seed_from_u64(50);
        for _ in 0..5 {
            let j = random_compatible_j(2, &mut rng);
            let cs = ComplexStructure::from_matrix(2, j, dec.zero_test()).unwrap();
            assert!(dirichlet_energy(&dec, &cs).unwrap() < 1e-20);
        }
        // Kaehler row with the standard J
        let spec = kaehler_admitting(3);
        let dec = spec.decompose();
        let cs = ComplexStructure::standard(3).unwrap();
        assert!(dirichlet_energy(&dec, &cs).unwrap() < 1e-20);
    }

    #[test]
    fn kodaira_thurston_energy_is_two() {
        // pinned regression value, computed by hand from the connection rules
        let dec = kt().decompose();
        let cs = ComplexStructure::standard(2).unwrap();
        let e = dirichlet_energy(&dec, &cs).unwrap();
        assert!((e - 2.0).abs() < 1e-12);
    }

    #[test]
    fn incompatible_j_rejected_with_residuals() {
        let dec = kt().decompose();
        let bad = Mat::<f64>::identity(4);
        let cs = ComplexStructure { n: 2, j: bad, jprime: None };
        let err = dirichlet_energy(&dec, &cs).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(ref m) if m.contains("J^2 + I")));
    }

    #[test]
    fn gradient_requires_unimodular() {
        let spec = AlgebraSpec::new(2, Mat::<f64>::identity(3), ScalarContext::default()).unwrap();
        let dec = spec.decompose();
        let j = ComplexStructure::<f64>::standard(2).unwrap().j;
        assert!(matches!(energy_gradient(&dec, &j), Err(Error::Precondition(_))));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        for _ in 0..15 {
            let n = rng.gen_range(2..=3usize);
            let m = 2 * n - 1;
            let mut l = Mat::from_fn(m, m, |_, _| rng.gen_range(-2.0..2.0));
            let shift = l.trace() / m as f64;
            for i in 0..m {
                l[(i, i)] -= shift;
            }
            let dec = AlgebraSpec::new(n, l, ScalarContext::default()).unwrap().decompose();
            let j = random_compatible_j(n, &mut rng);
            let k = energy_gradient(&dec, &j).unwrap();
            let t = random_tangent(&j, &mut rng);
            let ip: f64 = k.iter().zip(t.iter()).map(|(a, b)| a * b).sum();
            let tau = 1e-5;
            let ep = {
                let cs = ComplexStructure { n, j: retract(&j, &t, tau), jprime: None };
                dirichlet_energy(&dec, &cs).unwrap()
            };
            let em = {
                let cs = ComplexStructure { n, j: retract(&j, &t, -tau), jprime: None };
                dirichlet_energy(&dec, &cs).unwrap()
            };
            let fd = (ep - em) / (2.0 * tau);
            let rel = (fd - ip).abs() / ip.abs().max(1e-6);
            assert!(rel < 1e-5, "finite-difference mismatch: <K,T> = {ip:.6e}, FD = {fd:.6e}");
        }
    }

    #[test]
    fn gradient_zero_iff_commutator_zero() {
        // projection identity: (X + JXJ)/2 = 0 iff [J, X] = 0 for skew X
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        for _ in 0..20 {
            let n = rng.gen_range(2..=3usize);
            let j = random_compatible_j(n, &mut rng);
            let x = Mat::from_fn(2 * n, 2 * n, |_, _| rng.gen_range(-1.0..1.0)).skew_part();
            let p = project_tangent(&j, &x);
            let comm = j.matmul(&x).sub(&x.matmul(&j));
            assert!((p.norm_f64() < 1e-12) == (comm.norm_f64() < 1e-12));
            // and the two vanish together in exact arithmetic terms:
            // J (X + JXJ) = [J, X]
            let lhs = j.matmul(&x.add(&j.matmul(&x).matmul(&j)));
            assert!(lhs.sub(&comm).norm_f64() < 1e-12);
        }
    }

    #[test]
    fn retraction_preserves_compatibility() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let j = random_compatible_j(3, &mut rng);
        let t = random_tangent(&j, &mut rng);
        let jn = retract(&j, &t, 0.37);
        let m = 2 * 3;
        assert!(jn.transpose().matmul(&jn).sub(&Mat::identity(m)).norm_f64() < 1e-12);
        assert!(jn.matmul(&jn).add(&Mat::identity(m)).norm_f64() < 1e-12);
    }

    #[test]
    fn fixed_point_step_is_identity() {
        let dec = kt().decompose();
        let cs = ComplexStructure::standard(2).unwrap();
        let state = FlowState {
            j: cs.j.clone(),
            energy: dirichlet_energy(&dec, &cs).unwrap(),
            grad_norm: 0.0,
            step: 0,
        };
        let (next, _) = flow_step(&dec, &state, 0.1).unwrap();
        assert_eq!(next.j, cs.j);
    }

    #[test]
    fn energy_decreases_on_first_accepted_step() {
        // an algebra with non-constant energy: diag(0, 1, -1)
        let mut l = Mat::<f64>::zeros(3, 3);
        l[(1, 1)] = 1.0;
        l[(2, 2)] = -1.0;
        let dec = AlgebraSpec::new(2, l, ScalarContext::default()).unwrap().decompose();
        let mut rng = ChaCha8Rng::seed_from_u64(54);
        let mut decreased = false;
        for _ in 0..10 {
            let j = random_compatible_j(2, &mut rng);
            let state = state_at(&dec, j, 0).unwrap();
            if state.grad_norm < 1e-8 {
                continue;
            }
            let (next, _) = flow_step(&dec, &state, 1e-2).unwrap();
            assert!(next.energy < state.energy);
            decreased = true;
        }
        assert!(decreased);
    }

    #[test]
    fn flow_reaches_kaehler_ground_state() {
        let dec = kaehler_admitting(3).decompose();
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        let j0 = random_compatible_j(3, &mut rng);
        let res = run_flow(&dec, &j0, &FlowOptions { tol_grad: 1e-9, ..Default::default() }).unwrap();
        assert_eq!(res.verdict, FlowVerdict::Converged);
        assert!(res.state.energy <= 1e-10, "limit energy {}", res.state.energy);
        assert!(res.certified_harmonic);
    }

    #[test]
    fn flow_on_kt_converges_immediately_everywhere() {
        // every compatible J on this algebra is already harmonic
        let dec = kt().decompose();
        let mut rng = ChaCha8Rng::seed_from_u64(56);
        for _ in 0..5 {
            let j0 = random_compatible_j(2, &mut rng);
            let res = run_flow(&dec, &j0, &FlowOptions::default()).unwrap();
            assert_eq!(res.verdict, FlowVerdict::Converged);
            assert!(res.state.step == 0);
            assert!(res.certified_harmonic);
        }
    }

    #[test]
    fn spectrum_preserved_by_steps() {
        // conjugation preserves the spectrum {+-i}; check J^2 = -I after many steps
        let mut l = Mat::<f64>::zeros(5, 5);
        l[(1, 2)] = -1.0;
        l[(2, 1)] = 1.0;
        let dec = AlgebraSpec::new(3, l, ScalarContext::default()).unwrap().decompose();
        let mut rng = ChaCha8Rng::seed_from_u64(57);
        let j0 = random_compatible_j(3, &mut rng);
        let res = run_flow(&dec, &j0, &FlowOptions { tol_grad: 1e-8, ..Default::default() }).unwrap();
        let m = 6;
        assert!(res.state.j.matmul(&res.state.j).add(&Mat::identity(m)).norm_f64() < 1e-11);
        assert!(res.state.j.transpose().matmul(&res.state.j).sub(&Mat::identity(m)).norm_f64() < 1e-11);
    }
}
