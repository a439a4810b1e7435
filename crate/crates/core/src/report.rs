//! Assembled analysis of one algebra: decomposition, tensor norms, every
//! applicable harmonicity method, Gray-Hervella classification and the SKT
//! verdict, serialized as canonical JSON.

use serde_json::{json, Map, Value};

use crate::algebra::{AlgebraSpec, ComplexStructure};
use crate::error::Result;
use crate::flow::dirichlet_energy;
use crate::gh::{classify_oracle, ClassReport};
use crate::harmonic::{
    decide_harmonic, is_harmonic_dim4, is_harmonic_integrable, is_harmonic_oracle,
    is_harmonic_unimodular, HarmonicVerdict,
};
use crate::jsonio::{float_value, mat_to_value, vec_to_value};
use crate::mat::Mat;
use crate::scalar::Scalar;
use crate::skt::{skt_analysis, SktVerdict};
use crate::tensors::{nabla_omega_forms, tensor_t_forms, NijenhuisClosed, TSign, TensorReport};

/// Everything the `analyze` pipeline produces for one input.
pub struct AnalysisReport {
    pub n: usize,
    pub mode: &'static str,
    pub tolerance: f64,
    pub l_echo: Value,
    pub unimodular: bool,
    pub decomposition: Value,
    pub tensors: TensorReport,
    pub harmonic: Vec<HarmonicVerdict>,
    pub class: ClassReport,
    pub skt: SktVerdict,
    pub energy: f64,
    pub dense: Option<Value>,
}

fn scalar_value<S: Scalar>(x: &S) -> Value {
    match x.try_to_rational() {
        Some(r) => {
            use num_traits::One;
            if r.denom().is_one() {
                // integral rationals print as plain integers
                match i64::try_from(r.numer()) {
                    Ok(i) => json!(i),
                    Err(_) => Value::String(r.to_string()),
                }
            } else {
                Value::String(r.to_string())
            }
        }
        None => float_value(x.to_f64()),
    }
}

fn mat_echo<S: Scalar>(m: &Mat<S>) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| scalar_value(&m[(i, j)])).collect()))
            .collect(),
    )
}

fn vec_echo<S: Scalar>(v: &[S]) -> Value {
    Value::Array(v.iter().map(scalar_value).collect())
}

impl AnalysisReport {
    /// Run the full pipeline with the standard J. Internal cross-checks
    /// (closed forms against oracles) run as part of it; a disagreement
    /// surfaces as an internal-consistency error.
    pub fn compute<S: Scalar>(spec: &AlgebraSpec<S>, dense: bool) -> Result<AnalysisReport> {
        let cs = ComplexStructure::standard(spec.n)?;
        let dec = spec.decompose();

        let mut harmonic = vec![decide_harmonic(&dec, &cs)?, is_harmonic_oracle(&dec, &cs)];
        if spec.is_unimodular() {
            harmonic.push(is_harmonic_unimodular(&dec, &cs)?);
        }
        let nij = NijenhuisClosed::new(&dec, &cs)?;
        if nij.is_integrable(&dec) {
            harmonic.push(is_harmonic_integrable(&dec, &cs)?);
        }
        if spec.n == 2 {
            harmonic.push(is_harmonic_dim4(&dec.l, dec.zero_test())?);
        }

        let class = classify_oracle(&dec, &cs)?;
        let skt = skt_analysis(&dec, &cs)?;
        let tensors = TensorReport::compute(&dec, &cs)?;
        let energy = dirichlet_energy(&dec, &cs)?.to_f64();

        let decomposition = json!({
            "mu": scalar_value(&dec.mu),
            "v0": vec_echo(&dec.v0),
            "w0": vec_echo(&dec.w0),
            "D": mat_echo(&dec.d),
            "gamma": vec_echo(&dec.gamma),
            "rho": vec_echo(&dec.rho),
            "Ds": mat_echo(&dec.ds),
            "Da": mat_echo(&dec.da),
            "trace_S": scalar_value(&dec.tr_s()),
            "trace_D": scalar_value(&dec.tr_d()),
        });

        let dense_value = dense
            .then(|| -> Result<Value> {
                let forms = nabla_omega_forms(&dec, &cs)?;
                let tp = tensor_t_forms(&dec, &cs, TSign::Plus)?;
                let tm = tensor_t_forms(&dec, &cs, TSign::Minus)?;
                let render =
                    |fs: &[Mat<S>]| Value::Array(fs.iter().map(|f| mat_to_value(&f.to_f64())).collect());
                Ok(json!({
                    "nabla_omega": render(&forms),
                    "T_plus": render(&tp),
                    "T_minus": render(&tm),
                }))
            })
            .transpose()?;

        Ok(AnalysisReport {
            n: spec.n,
            mode: spec.ctx.mode.name(),
            tolerance: spec.ctx.tolerance,
            l_echo: mat_echo(&spec.l),
            unimodular: spec.is_unimodular(),
            decomposition,
            tensors,
            harmonic,
            class,
            skt,
            energy,
            dense: dense_value,
        })
    }

    pub fn to_value(&self) -> Value {
        let mut root = Map::new();
        root.insert("n".into(), json!(self.n));
        root.insert("mode".into(), json!(self.mode));
        root.insert("tolerance".into(), float_value(self.tolerance));
        root.insert("L".into(), self.l_echo.clone());
        root.insert("unimodular".into(), json!(self.unimodular));
        root.insert("decomposition".into(), self.decomposition.clone());
        root.insert("tensors".into(), tensor_report_value(&self.tensors));
        let mut methods = Map::new();
        for v in &self.harmonic {
            methods.insert(v.method.name().into(), harmonic_value(v));
        }
        root.insert("harmonic".into(), Value::Object(methods));
        root.insert("class".into(), class_value(&self.class));
        root.insert("skt".into(), skt_value(&self.skt));
        root.insert("dirichlet_energy".into(), float_value(self.energy));
        if let Some(d) = &self.dense {
            root.insert("dense".into(), d.clone());
        }
        Value::Object(root)
    }
}

pub fn harmonic_value(v: &HarmonicVerdict) -> Value {
    let residuals: Map<String, Value> =
        v.residuals.iter().map(|(k, r)| (k.clone(), float_value(*r))).collect();
    json!({
        "harmonic": v.harmonic,
        "method": v.method.name(),
        "residuals": Value::Object(residuals),
    })
}

pub fn class_value(c: &ClassReport) -> Value {
    let memberships: Map<String, Value> =
        c.memberships.iter().map(|(cls, m)| (cls.name().to_string(), json!(m))).collect();
    json!({
        "memberships": Value::Object(memberships),
        "genuine": c.genuine.name(),
        "collapses": c.collapses,
    })
}

pub fn skt_value(v: &SktVerdict) -> Value {
    let reasons: Map<String, Value> =
        v.reasons.iter().map(|(k, r)| (k.clone(), float_value(*r))).collect();
    json!({
        "skt": v.skt,
        "reasons": Value::Object(reasons),
        "eigen_real_parts": vec_to_value(&v.eigen_real_parts),
        "harmonic_case": v.harmonic_case.name(),
    })
}

pub fn tensor_report_value(t: &TensorReport) -> Value {
    json!({
        "nijenhuis_norm": float_value(t.nijenhuis_norm),
        "d_omega_norm": float_value(t.d_omega_norm),
        "delta_omega": vec_to_value(&t.delta_omega),
        "lee_form": vec_to_value(&t.lee_form),
        "nabla_omega_norm": float_value(t.nabla_omega_norm),
        "H": mat_to_value(&t.h),
        "metric_flat_hint": t.metric_flat_hint,
    })
}
