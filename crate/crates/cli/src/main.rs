//! Command-line front end: analyze | classify | harmonic | skt | lattice |
//! flow | catalog, all with JSON input and optional canonical JSON output.
//!
//! Exit codes: 0 success, 1 invalid input or precondition failure, 2 internal
//! consistency failure (an oracle disagreed with a closed form), 3 flow
//! non-convergence.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Map, Value};

use solvharm_core::catalog;
use solvharm_core::error::Error;
use solvharm_core::flow::{random_compatible_j, run_flow, FlowOptions, FlowVerdict};
use solvharm_core::gh::classify_oracle;
use solvharm_core::harmonic::{
    decide_harmonic, is_harmonic_dim4, is_harmonic_general, is_harmonic_integrable,
    is_harmonic_oracle, is_harmonic_unimodular,
};
use solvharm_core::jsonio::{float_value, parse_algebra, to_canonical_string, ParsedAlgebra};
use solvharm_core::lattice::{
    assemble_witness, lattice_abelianization, BlockSpec, IntMat, RotationAngle,
};
use solvharm_core::report::{class_value, harmonic_value, skt_value, AnalysisReport};
use solvharm_core::scalar::Scalar;
use solvharm_core::skt::skt_analysis;
use solvharm_core::{AlgebraSpec, ComplexStructure};

#[derive(Parser)]
#[command(
    name = "solvharm",
    about = "Invariant almost Hermitian geometry on almost abelian Lie algebras",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Args)]
struct InputArgs {
    /// JSON input file ({"n": ..., "L": [[...]]} or the component form)
    #[arg(long)]
    input: PathBuf,
    /// Emit canonical JSON on stdout
    #[arg(long)]
    json: bool,
    /// Float tolerance (overrides the file and AA_DEFAULT_TOL)
    #[arg(long)]
    tol: Option<f64>,
    /// Force exact rational arithmetic
    #[arg(long)]
    exact: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Full analysis: decomposition, tensors, harmonicity, class, SKT
    Analyze {
        #[command(flatten)]
        input: InputArgs,
        /// Include dense tensor components in the JSON report
        #[arg(long)]
        dense: bool,
    },
    /// Gray-Hervella classification only
    Classify {
        #[command(flatten)]
        input: InputArgs,
    },
    /// Harmonicity verdicts
    Harmonic {
        #[command(flatten)]
        input: InputArgs,
        /// One of: all, general, unimodular, integrable, dim4, oracle
        #[arg(long, default_value = "all")]
        method: String,
    },
    /// SKT property and SKT harmonicity case
    Skt {
        #[command(flatten)]
        input: InputArgs,
    },
    /// Lattice witnesses and invariants
    Lattice {
        /// JSON block list for a witness ({"t0": ..., "blocks": [...]})
        #[arg(long)]
        blocks: Option<PathBuf>,
        /// JSON integer matrix E for the abelianization of Z x_E Z^m
        #[arg(long)]
        abelianization: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Dirichlet energy gradient descent over compatible structures
    Flow {
        #[command(flatten)]
        input: InputArgs,
        /// Number of random compatible starting structures
        #[arg(long, default_value_t = 1)]
        starts: usize,
        /// RNG seed for the starts
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Gradient norm at which the flow stops
        #[arg(long = "tol-grad", default_value_t = 1e-8)]
        tol_grad: f64,
        #[arg(long = "max-steps", default_value_t = 100_000)]
        max_steps: usize,
        /// Write per-step JSONL records (start, step, energy, grad_norm)
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// The golden example catalog
    Catalog {
        #[command(subcommand)]
        action: CatalogCmd,
    },
}

#[derive(Subcommand)]
enum CatalogCmd {
    /// List entry names
    List,
    /// Run one entry or all of them
    Run {
        /// Entry name, or "all"
        name: String,
        #[arg(long)]
        json: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn read_json(path: &PathBuf) -> Result<Value, Error> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::invalid_input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::invalid_input(format!("{} is not valid JSON: {e}", path.display())))
}

fn load(input: &InputArgs) -> Result<ParsedAlgebra, Error> {
    let tol = input
        .tol
        .or_else(|| std::env::var("AA_DEFAULT_TOL").ok().and_then(|v| v.parse::<f64>().ok()));
    parse_algebra(&read_json(&input.input)?, input.exact, tol)
}

fn emit(json_flag: bool, value: &Value, human: &str) {
    if json_flag {
        println!("{}", to_canonical_string(value));
    } else {
        println!("{human}");
    }
}

fn dispatch(cli: Cli) -> Result<(), Error> {
    match cli.cmd {
        Cmd::Analyze { input, dense } => {
            let report = match load(&input)? {
                ParsedAlgebra::Float(spec) => AnalysisReport::compute(&spec, dense)?,
                ParsedAlgebra::Exact(spec) => AnalysisReport::compute(&spec, dense)?,
            };
            let value = report.to_value();
            let general = report.harmonic.iter().find(|v| v.method.name() == "general");
            let human = format!(
                "mode: {}\nunimodular: {}\nharmonic: {}\ngenuine class: {}\nskt: {} ({})\ndirichlet energy: {:.6}",
                report.mode,
                report.unimodular,
                general.is_some_and(|v| v.harmonic),
                report.class.genuine.name(),
                report.skt.skt,
                report.skt.harmonic_case.name(),
                report.energy,
            );
            emit(input.json, &value, &human);
        }
        Cmd::Classify { input } => {
            let (value, human) = match load(&input)? {
                ParsedAlgebra::Float(spec) => classify_of(&spec)?,
                ParsedAlgebra::Exact(spec) => classify_of(&spec)?,
            };
            emit(input.json, &value, &human);
        }
        Cmd::Harmonic { input, method } => {
            let (value, human) = match load(&input)? {
                ParsedAlgebra::Float(spec) => harmonic_of(&spec, &method)?,
                ParsedAlgebra::Exact(spec) => harmonic_of(&spec, &method)?,
            };
            emit(input.json, &value, &human);
        }
        Cmd::Skt { input } => {
            let (value, human) = match load(&input)? {
                ParsedAlgebra::Float(spec) => skt_of(&spec)?,
                ParsedAlgebra::Exact(spec) => skt_of(&spec)?,
            };
            emit(input.json, &value, &human);
        }
        Cmd::Lattice { blocks, abelianization, json } => match (blocks, abelianization) {
            (Some(path), None) => {
                let value = read_json(&path)?;
                let (t0, block_list) = parse_blocks(&value)?;
                let witness = assemble_witness(&block_list, t0)?;
                let ab = lattice_abelianization(&witness.e)?;
                let out = json!({
                    "t0": witness.t0,
                    "E": int_mat_value(&witness.e),
                    "det": witness.det.to_string(),
                    "in_sl": witness.in_sl,
                    "char_poly": witness.char_poly.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                    "evidence": witness.evidence,
                    "countable_family": witness.countable_family,
                    "abelianization": {
                        "rank": ab.rank,
                        "torsion": ab.torsion.iter().map(|t| t.to_string()).collect::<Vec<_>>(),
                    },
                });
                let human = format!(
                    "witness E ({}x{}), det {} ({})\nabelianization: {}\n{}",
                    witness.e.nrows(),
                    witness.e.ncols(),
                    witness.det,
                    if witness.in_sl { "in SL" } else { "NOT in SL" },
                    ab.describe(),
                    witness.evidence.join("\n"),
                );
                emit(json, &out, &human);
            }
            (None, Some(path)) => {
                let value = read_json(&path)?;
                let e = parse_int_matrix(&value)?;
                let ab = lattice_abelianization(&e)?;
                let out = json!({
                    "rank": ab.rank,
                    "torsion": ab.torsion.iter().map(|t| t.to_string()).collect::<Vec<_>>(),
                    "group": ab.describe(),
                });
                emit(json, &out, &format!("abelianization: {}", ab.describe()));
            }
            _ => {
                return Err(Error::invalid_input(
                    "lattice needs exactly one of --blocks or --abelianization",
                ))
            }
        },
        Cmd::Flow { input, starts, seed, tol_grad, max_steps, trace } => {
            let ParsedAlgebra::Float(spec) = load(&input)? else {
                return Err(Error::invalid_input(
                    "the energy flow runs in float mode; drop --exact / \"mode\": \"exact\"",
                ));
            };
            run_flow_command(&spec, starts, seed, tol_grad, max_steps, trace, input.json)?;
        }
        Cmd::Catalog { action } => match action {
            CatalogCmd::List => {
                for name in catalog::entry_names() {
                    println!("{name}");
                }
            }
            CatalogCmd::Run { name, json } => {
                let reports =
                    if name == "all" { catalog::run_all()? } else { vec![catalog::run_entry(&name)?] };
                let all_pass = reports.iter().all(|r| r.pass);
                if json {
                    let value = Value::Array(
                        reports
                            .iter()
                            .map(|r| {
                                json!({
                                    "name": r.name,
                                    "pass": r.pass,
                                    "checks": r.checks.iter().map(|c| json!({
                                        "field": c.field,
                                        "pass": c.pass,
                                        "detail": c.detail,
                                    })).collect::<Vec<_>>(),
                                })
                            })
                            .collect(),
                    );
                    println!("{}", to_canonical_string(&value));
                } else {
                    for r in &reports {
                        println!("{} {}", if r.pass { "PASS" } else { "FAIL" }, r.name);
                        for c in &r.checks {
                            println!(
                                "  [{}] {}: {}",
                                if c.pass { "ok" } else { "FAIL" },
                                c.field,
                                c.detail
                            );
                        }
                    }
                    println!(
                        "{}/{} entries pass",
                        reports.iter().filter(|r| r.pass).count(),
                        reports.len()
                    );
                }
                if !all_pass {
                    return Err(Error::inconsistent("catalog expectations violated"));
                }
            }
        },
    }
    Ok(())
}

fn classify_of<S: Scalar>(spec: &AlgebraSpec<S>) -> Result<(Value, String), Error> {
    let cs = ComplexStructure::standard(spec.n)?;
    let dec = spec.decompose();
    let rep = classify_oracle(&dec, &cs)?;
    let human = format!(
        "genuine class: {}\nmemberships: {}",
        rep.genuine.name(),
        rep.memberships
            .iter()
            .filter(|(_, m)| **m)
            .map(|(c, _)| c.name())
            .collect::<Vec<_>>()
            .join(", ")
    );
    Ok((class_value(&rep), human))
}

fn harmonic_of<S: Scalar>(spec: &AlgebraSpec<S>, method: &str) -> Result<(Value, String), Error> {
    let cs = ComplexStructure::standard(spec.n)?;
    let dec = spec.decompose();
    let mut verdicts = Vec::new();
    match method {
        "all" => {
            verdicts.push(decide_harmonic(&dec, &cs)?);
            verdicts.push(is_harmonic_oracle(&dec, &cs));
            if spec.is_unimodular() {
                verdicts.push(is_harmonic_unimodular(&dec, &cs)?);
            }
            if solvharm_core::tensors::NijenhuisClosed::new(&dec, &cs)?.is_integrable(&dec) {
                verdicts.push(is_harmonic_integrable(&dec, &cs)?);
            }
            if spec.n == 2 {
                verdicts.push(is_harmonic_dim4(&dec.l, dec.zero_test())?);
            }
        }
        "general" => verdicts.push(is_harmonic_general(&dec, &cs)?),
        "oracle" => verdicts.push(is_harmonic_oracle(&dec, &cs)),
        "unimodular" => verdicts.push(is_harmonic_unimodular(&dec, &cs)?),
        "integrable" => verdicts.push(is_harmonic_integrable(&dec, &cs)?),
        "dim4" => verdicts.push(is_harmonic_dim4(&dec.l, dec.zero_test())?),
        other => {
            return Err(Error::invalid_input(format!(
                "unknown method '{other}'; use all, general, unimodular, integrable, dim4 or oracle"
            )))
        }
    }
    let mut map = Map::new();
    for v in &verdicts {
        map.insert(v.method.name().into(), harmonic_value(v));
    }
    let human = verdicts
        .iter()
        .map(|v| {
            format!("{}: {}", v.method.name(), if v.harmonic { "harmonic" } else { "not harmonic" })
        })
        .collect::<Vec<_>>()
        .join("\n");
    Ok((Value::Object(map), human))
}

fn skt_of<S: Scalar>(spec: &AlgebraSpec<S>) -> Result<(Value, String), Error> {
    let cs = ComplexStructure::standard(spec.n)?;
    let dec = spec.decompose();
    let v = skt_analysis(&dec, &cs)?;
    let human = format!("skt: {} (harmonic case: {})", v.skt, v.harmonic_case.name());
    Ok((skt_value(&v), human))
}

#[allow(clippy::too_many_arguments)]
fn run_flow_command(
    spec: &AlgebraSpec<f64>,
    starts: usize,
    seed: u64,
    tol_grad: f64,
    max_steps: usize,
    trace: Option<PathBuf>,
    json: bool,
) -> Result<(), Error> {
    use rand::SeedableRng;
    let dec = spec.decompose();
    let opts =
        FlowOptions { tol_grad, max_steps, keep_trace: trace.is_some(), ..Default::default() };
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut trace_file = trace
        .map(|p| {
            fs::File::create(&p)
                .map_err(|e| Error::invalid_input(format!("cannot create {}: {e}", p.display())))
        })
        .transpose()?;

    let mut results = Vec::new();
    let mut failures = 0usize;
    for start in 0..starts.max(1) {
        let j0 = random_compatible_j(spec.n, &mut rng);
        let (state, verdict, tr, certified) = match run_flow(&dec, &j0, &opts) {
            Ok(res) => (res.state, res.verdict, res.trace, res.certified_harmonic),
            Err(Error::Stagnation(msg)) | Err(Error::NonConvergence(msg)) => {
                failures += 1;
                eprintln!("start {start}: {msg}");
                continue;
            }
            Err(e) => return Err(e),
        };
        if let Some(f) = trace_file.as_mut() {
            for p in &tr {
                let line = json!({
                    "start": start,
                    "step": p.step,
                    "energy": float_value(p.energy),
                    "grad_norm": float_value(p.grad_norm),
                });
                writeln!(f, "{}", to_canonical_string(&line))
                    .map_err(|e| Error::invalid_input(format!("trace write failed: {e}")))?;
            }
        }
        results.push(json!({
            "start": start,
            "verdict": verdict.name(),
            "steps": state.step,
            "energy": float_value(state.energy),
            "grad_norm": float_value(state.grad_norm),
            "certified_harmonic": certified,
        }));
        if verdict != FlowVerdict::Converged {
            failures += 1;
        }
    }
    if json {
        println!("{}", to_canonical_string(&Value::Array(results.clone())));
    } else {
        for r in &results {
            println!(
                "start {}: {} in {} steps, energy {}, grad {}",
                r["start"],
                r["verdict"],
                r["steps"],
                to_canonical_string(&r["energy"]),
                to_canonical_string(&r["grad_norm"]),
            );
        }
    }
    if failures > 0 {
        return Err(Error::NonConvergence(format!(
            "{failures} of {starts} starts did not converge"
        )));
    }
    Ok(())
}

fn parse_blocks(v: &Value) -> Result<(String, Vec<BlockSpec>), Error> {
    let (t0, arr) = match v {
        Value::Array(_) => ("1".to_string(), v),
        Value::Object(map) => (
            map.get("t0").and_then(Value::as_str).unwrap_or("1").to_string(),
            map.get("blocks")
                .ok_or_else(|| Error::invalid_input("blocks file needs a \"blocks\" array"))?,
        ),
        _ => return Err(Error::invalid_input("blocks file must be an array or an object")),
    };
    let items =
        arr.as_array().ok_or_else(|| Error::invalid_input("\"blocks\" must be an array"))?;
    let mut out = Vec::new();
    for item in items {
        let kind = item
            .get("kind")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::invalid_input("every block needs a \"kind\""))?;
        let block = match kind {
            "hyperbolic" => BlockSpec::Hyperbolic {
                m: item
                    .get("m")
                    .and_then(Value::as_i64)
                    .ok_or_else(|| Error::invalid_input("hyperbolic block needs integer \"m\""))?,
            },
            "rotation" => {
                let tag = item
                    .get("angle")
                    .and_then(Value::as_str)
                    .ok_or_else(|| Error::invalid_input("rotation block needs \"angle\""))?;
                BlockSpec::Rotation { angle: RotationAngle::parse(tag)? }
            }
            "unipotent" => BlockSpec::Unipotent {
                size: item
                    .get("size")
                    .and_then(Value::as_u64)
                    .ok_or_else(|| Error::invalid_input("unipotent block needs \"size\""))?
                    as usize,
                param: item.get("param").and_then(Value::as_f64).unwrap_or(1.0),
            },
            "identity" => BlockSpec::Identity {
                size: item.get("size").and_then(Value::as_u64).unwrap_or(1) as usize,
            },
            "explicit" => {
                let m = item
                    .get("matrix")
                    .ok_or_else(|| Error::invalid_input("explicit block needs \"matrix\""))?;
                let rows = m
                    .as_array()
                    .ok_or_else(|| Error::invalid_input("explicit matrix must be rows"))?
                    .iter()
                    .map(|row| {
                        row.as_array()
                            .ok_or_else(|| {
                                Error::invalid_input("explicit matrix rows must be arrays")
                            })?
                            .iter()
                            .map(|x| {
                                x.as_i64().ok_or_else(|| {
                                    Error::invalid_input("explicit matrix entries must be integers")
                                })
                            })
                            .collect::<Result<Vec<i64>, Error>>()
                    })
                    .collect::<Result<Vec<Vec<i64>>, Error>>()?;
                BlockSpec::Explicit { matrix: rows }
            }
            other => {
                return Err(Error::invalid_input(format!(
                    "unknown block kind '{other}'; use hyperbolic, rotation, unipotent, identity or explicit"
                )))
            }
        };
        out.push(block);
    }
    Ok((t0, out))
}

fn parse_int_matrix(v: &Value) -> Result<IntMat, Error> {
    let arr = match v {
        Value::Object(map) => {
            map.get("E").ok_or_else(|| Error::invalid_input("abelianization file needs \"E\""))?
        }
        other => other,
    };
    let rows = arr
        .as_array()
        .ok_or_else(|| Error::invalid_input("E must be an array of rows"))?
        .iter()
        .map(|row| {
            row.as_array()
                .ok_or_else(|| Error::invalid_input("E rows must be arrays"))?
                .iter()
                .map(|x| {
                    x.as_i64().ok_or_else(|| Error::invalid_input("E entries must be integers"))
                })
                .collect::<Result<Vec<i64>, Error>>()
        })
        .collect::<Result<Vec<Vec<i64>>, Error>>()?;
    Ok(IntMat::from_i64_rows(&rows))
}

fn int_mat_value(m: &IntMat) -> Value {
    use num_traits::ToPrimitive;
    Value::Array(
        (0..m.nrows())
            .map(|i| {
                Value::Array(
                    (0..m.ncols())
                        .map(|j| match m.at(i, j).to_i64() {
                            Some(v) => json!(v),
                            None => Value::String(m.at(i, j).to_string()),
                        })
                        .collect(),
                )
            })
            .collect(),
    )
}
