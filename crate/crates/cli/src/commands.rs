use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use symwit::bases::{resolve_basis, GroupedBasis};
use symwit::lab::{
    certify_with, evaluate, is_ppt_on, ppt_detection_search, validate_state_with, Tolerances,
};
use symwit::maps::{build_map, positivity_probe, rotation_preset, MapSpec, Rotation, RotationSet};
use symwit::matrix::{CMatrix, Subsystem};
use symwit::povm::{build_povm_for_x, check_symmetry, optimal_x, x_range};
use symwit::registry::{load_example, reproduce_with, ReproduceOptions, EXAMPLE_IDS};
use symwit::witness::{
    ccnr_witness, choi_witness, m2_witness, rescaled_witness, weighted_witness, CcnrSpec, Witness,
};

use crate::{BasisArgs, Cli, Command, ExampleCommand, Form, MapCommand, PovmCommand, WitnessArgs, WitnessCommand};

const SUCCESS: u8 = 0;
const NEGATIVE: u8 = 2;

#[derive(Serialize)]
struct RunConfig<'a> {
    args: &'a Cli,
    tolerances: Tolerances,
}

pub fn run(cli: &Cli) -> Result<u8> {
    let tol = match cli.tol {
        None => Tolerances::default(),
        Some(t) if t.is_finite() && t > 0.0 => Tolerances::uniform(t),
        Some(t) => bail!("--tol must be positive, got {t}"),
    };
    let (result, code, report_path) = dispatch(cli, &tol)?;
    let report = json!({
        "config": RunConfig { args: cli, tolerances: tol },
        "result": result,
    });
    let text = serde_json::to_string_pretty(&report)? + "\n";
    print!("{text}");
    for path in [cli.out.as_deref(), report_path].into_iter().flatten() {
        fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(code)
}

fn dispatch<'a>(cli: &'a Cli, tol: &Tolerances) -> Result<(Value, u8, Option<&'a Path>)> {
    let ok = |v: Value| Ok((v, SUCCESS, None));
    match &cli.command {
        Command::Povm(PovmCommand::Build { basis, x }) => {
            let b = grouped(basis)?;
            let x = parse_x(x, &b)?;
            let povm = build_povm_for_x(&b, x)?;
            let report = povm.check();
            let code = if report.holds { SUCCESS } else { NEGATIVE };
            Ok((
                json!({
                    "params": povm.params,
                    "degenerate": povm.degenerate,
                    "elements": povm.elements,
                    "report": report,
                }),
                code,
                None,
            ))
        }
        Command::Povm(PovmCommand::Validate { input }) => {
            let v = read_json(input)?;
            let node = pick(&v, &["/result/elements", "/elements"]);
            let elements: Vec<Vec<CMatrix>> =
                serde_json::from_value(node.clone()).context("expected a list of POVMs")?;
            let report = check_symmetry(&elements)?;
            let code = if report.holds { SUCCESS } else { NEGATIVE };
            Ok((json!({ "report": report }), code, None))
        }
        Command::Povm(PovmCommand::Optx { basis }) => {
            let b = grouped(basis)?;
            let (low, high) = x_range(b.d(), b.m());
            ok(json!({
                "d": b.d(), "n": b.n(), "m": b.m(),
                "x_opt": optimal_x(&b),
                "range": { "low_exclusive": low, "high": high },
            }))
        }
        Command::Map(MapCommand::Build { spec, probe, seed }) => {
            let file: MapSpecFile = serde_json::from_value(read_json(spec)?).context("malformed map spec")?;
            let mut b = resolve_basis(&file.basis, &file.grouping)?;
            if let Some(sel) = &file.select {
                b = b.select(sel)?;
            }
            let x = match &file.x {
                XValue::Number(x) => *x,
                XValue::Keyword(s) => parse_x(s, &b)?,
            };
            let rotations = file.rotations.resolve(b.n())?;
            let povm = build_povm_for_x(&b, x)?;
            let map_spec = MapSpec::new(povm, RotationSet::strict(rotations)?, file.l)?;
            let phi = build_map(&map_spec)?;
            let probe = (*probe > 0).then(|| positivity_probe(&phi, *probe, *seed));
            let code = if probe.as_ref().is_some_and(|p| p.violation()) { NEGATIVE } else { SUCCESS };
            Ok((
                json!({
                    "params": map_spec.povm.params,
                    "l": map_spec.l,
                    "a": map_spec.a,
                    "b": map_spec.b,
                    "y": map_spec.y,
                    "choi": phi.choi,
                    "trace_preservation_dev": phi.trace_preservation_dev(),
                    "probe": probe,
                }),
                code,
                None,
            ))
        }
        Command::Witness(WitnessCommand::Build(args)) => {
            let w = build_witness(args)?;
            ok(serde_json::to_value(&w)?)
        }
        Command::Detect(args) => {
            let w = load_witness(&args.witness)?;
            let state = load_state(&args.state, args.dims.as_deref(), &w, args.renormalize, tol)?;
            let expectation = evaluate(&w, &state)?;
            let detected = expectation < -tol.detection;
            let code = if detected { SUCCESS } else { NEGATIVE };
            Ok((json!({ "expectation": expectation, "detected": detected }), code, None))
        }
        Command::Certify(args) => {
            let w = load_witness(&args.witness)?;
            let state = load_state(&args.state, args.dims.as_deref(), &w, args.renormalize, tol)?;
            let cert = certify_with(&w, &state, tol)?;
            let code = if cert.indecomposable_certified { SUCCESS } else { NEGATIVE };
            Ok((serde_json::to_value(&cert)?, code, None))
        }
        Command::HuntPpt(args) => {
            let w = load_witness(&args.witness)?;
            let dims = resolve_dims(args.dims.as_deref(), w.matrix.rows())?;
            let out = ppt_detection_search(&w, dims, args.restarts, args.iters, args.seed)?;
            let ppt = out.found.as_ref().map(|s| is_ppt_on(s, Subsystem::B, tol.ppt));
            let code = if out.found.is_some() { SUCCESS } else { NEGATIVE };
            Ok((json!({ "search": out, "ppt_check": ppt }), code, None))
        }
        Command::Example(ExampleCommand::List) => {
            let mut list = Vec::new();
            for id in EXAMPLE_IDS {
                let b = load_example(id)?;
                list.push(json!({
                    "id": b.id,
                    "witness": b.witness_label,
                    "state": b.state_label,
                    "recipe": b.recipe,
                    "errata": b.errata,
                }));
            }
            ok(Value::Array(list))
        }
        Command::Example(ExampleCommand::Reproduce { id, report, restarts, seed }) => {
            let opts = ReproduceOptions {
                see_saw_restarts: *restarts,
                seed: *seed,
                ..ReproduceOptions::default()
            };
            let r = reproduce_with(id, &opts)?;
            let code = if r.certified { SUCCESS } else { NEGATIVE };
            Ok((serde_json::to_value(&r)?, code, report.as_deref()))
        }
    }
}

#[derive(Deserialize)]
struct MapSpecFile {
    basis: String,
    grouping: String,
    #[serde(default)]
    select: Option<Vec<usize>>,
    x: XValue,
    l: usize,
    rotations: RotationsField,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum XValue {
    Number(f64),
    Keyword(String),
}

/// One preset for every group, or a list with one entry per group.
#[derive(Deserialize)]
#[serde(untagged)]
enum RotationsField {
    Preset(String),
    List(Vec<RotationItem>),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RotationItem {
    Preset(String),
    Matrix(Rotation),
}

impl RotationsField {
    fn resolve(&self, n: usize) -> Result<Vec<Rotation>> {
        match self {
            Self::Preset(p) => Ok(vec![rotation_preset(p)?; n]),
            Self::List(items) => {
                if items.len() != n {
                    bail!("need {n} rotations, got {}", items.len());
                }
                items
                    .iter()
                    .map(|r| match r {
                        RotationItem::Preset(p) => Ok(rotation_preset(p)?),
                        RotationItem::Matrix(m) => Ok(m.clone()),
                    })
                    .collect()
            }
        }
    }
}

fn build_witness(args: &WitnessArgs) -> Result<Witness> {
    let b = grouped(&args.basis)?;
    let rotations = || -> Result<Vec<Rotation>> {
        let field = match (&args.rotation, &args.rotations) {
            (Some(_), Some(_)) => bail!("use either --rotation or --rotations"),
            (Some(p), None) => RotationsField::Preset(p.clone()),
            (None, Some(path)) => serde_json::from_value(read_json(path)?).context("malformed rotations file")?,
            (None, None) => RotationsField::Preset(format!("identity:{}", b.m())),
        };
        field.resolve(b.n())
    };
    let need_l = || args.l.context("--l is required for this form");
    Ok(match args.form {
        Form::Choi => {
            let x = parse_x(args.x.as_deref().unwrap_or("opt"), &b)?;
            let povm = build_povm_for_x(&b, x)?;
            let spec = MapSpec::new(povm, RotationSet::strict(rotations()?)?, need_l()?)?;
            choi_witness(&build_map(&spec)?)?
        }
        Form::Rescaled => rescaled_witness(&b, &rotations()?, need_l()?)?,
        Form::Weighted => {
            let weights = args.weights.as_ref().context("--weights is required for the weighted form")?;
            weighted_witness(&b, &rotations()?, weights)?
        }
        Form::M2 => {
            let signs = args.signs.as_deref().context("--signs is required for the m2 form")?;
            m2_witness(&b, &parse_signs(signs)?)?
        }
        Form::Ccnr => {
            let spec = match args.q.as_deref().unwrap_or("identity") {
                "identity" => CcnrSpec::identity(b.completed_elements()),
                "zero" => {
                    let n = b.d() * b.d();
                    CcnrSpec { basis: b.completed_elements(), q: vec![vec![0.0; n]; n] }
                }
                "recipe" => CcnrSpec::from_recipe(&b, &rotations()?, need_l()?)?,
                path => {
                    let q: Vec<Vec<f64>> =
                        serde_json::from_value(read_json(Path::new(path))?).context("Q must be a list of rows")?;
                    CcnrSpec { basis: b.completed_elements(), q }
                }
            };
            ccnr_witness(&spec)?
        }
    })
}

fn grouped(args: &BasisArgs) -> Result<GroupedBasis> {
    let b = resolve_basis(&args.basis, &args.group)?;
    Ok(match &args.select {
        Some(sel) => b.select(sel)?,
        None => b,
    })
}

fn parse_x(s: &str, b: &GroupedBasis) -> Result<f64> {
    if s == "opt" {
        return Ok(optimal_x(b));
    }
    s.parse().with_context(|| format!("x must be a number or `opt`, got `{s}`"))
}

fn parse_signs(s: &str) -> Result<Vec<i8>> {
    s.split(',')
        .map(|tok| match tok.trim() {
            "+" | "+1" | "1" => Ok(1),
            "-" | "-1" => Ok(-1),
            other => bail!("bad sign `{other}`"),
        })
        .collect()
}

fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// First of `pointers` present in `v`, else `v` itself.
fn pick<'v>(v: &'v Value, pointers: &[&str]) -> &'v Value {
    pointers.iter().find_map(|p| v.pointer(p)).unwrap_or(v)
}

/// Accepts a `witness build` report, a bare witness bundle or a bare matrix.
fn load_witness(path: &Path) -> Result<Witness> {
    let v = read_json(path)?;
    if let Some(node) = v.pointer("/result/form").and(v.get("result")).or(v.get("form").map(|_| &v)) {
        return serde_json::from_value(node.clone()).context("malformed witness bundle");
    }
    let m: CMatrix = serde_json::from_value(pick(&v, &["/matrix"]).clone()).context("malformed witness matrix")?;
    Ok(Witness::from_matrix(m)?)
}

/// Accepts a bare matrix, `{"matrix": ...}` or a `hunt-ppt` report.
fn load_state(
    path: &Path,
    dims: Option<&[usize]>,
    w: &Witness,
    renormalize: bool,
    tol: &Tolerances,
) -> Result<symwit::lab::DensityState> {
    let v = read_json(path)?;
    let node = pick(&v, &["/result/search/found/matrix", "/matrix"]);
    let m: CMatrix = serde_json::from_value(node.clone()).context("malformed state matrix")?;
    let dims = resolve_dims(dims, w.matrix.rows())?;
    Ok(validate_state_with(&m, dims, renormalize, tol)?)
}

fn resolve_dims(dims: Option<&[usize]>, n: usize) -> Result<(usize, usize)> {
    match dims {
        Some([a, b]) => Ok((*a, *b)),
        Some(other) => bail!("--dims needs two values, got {}", other.len()),
        None => {
            let d = (n as f64).sqrt().round() as usize;
            if d * d != n {
                bail!("cannot infer local dimensions for size {n}; pass --dims");
            }
            Ok((d, d))
        }
    }
}
