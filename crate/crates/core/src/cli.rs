//! Scenario files: loading, validation, task dispatch and reports.
//!
//! A scenario is a JSON object with `schema_version`, a `workspace`, named `functions`,
//! `maps` (vector functions), `sets` and `spaces`, an ordered list of `tasks` and optional
//! `output` settings. See `scenarios/README.md` for the schema.

pub mod expr;
pub mod plot;

use crate::builtins;
use crate::calculus::{regularity_check, scalarized_derivative_intersection, set_derivative};
use crate::json::{ext_value, rat, rat_vector, rational, vector, vectors};
use crate::lattice::{UpperSet, Workspace};
use crate::rat::{Vector, Q};
use crate::setfun::{Affine, ConcavePWL, ConvexPWL, Domain, EpiVector, ParamPoly, SetFunction, VectorFunction};
use crate::vectoropt::{
    classify_dini, default_t_params, efficient_set, infdir_map, infdir_plus_cone, noncommutation_example, vector_dini,
    vector_minty_check, VectorMap,
};
use crate::vi::{
    audit_directions, check_vi, implication_audit, infimizer_check, infimum_at_point_check, minimal_check, minimal_set, solution_check,
    CandidateSpace, Ineq,
};
use rayon::prelude::*;
use serde_json::{json, Map, Value};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

pub const SCHEMA_VERSION: u64 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_FAILURE: i32 = 2;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CliError {
    #[error("validation error: {0}")]
    Validation(String),
    #[error("{0}")]
    Plot(#[from] plot::PlotError),
    #[error("i/o error: {0}")]
    Io(String),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Validation(msg.into()))
}

/// Scenario files shipped with the binary, addressed as `builtin:<name>`.
pub const BUILTIN_SCENARIOS: [(&str, &str); 8] = [
    ("abs_diag", include_str!("../scenarios/abs_diag.json")),
    ("abs_pair", include_str!("../scenarios/abs_pair.json")),
    ("circle", include_str!("../scenarios/circle.json")),
    ("example23", include_str!("../scenarios/example23.json")),
    ("heyde_a", include_str!("../scenarios/heyde_a.json")),
    ("heyde_b", include_str!("../scenarios/heyde_b.json")),
    ("infdir_example", include_str!("../scenarios/infdir_example.json")),
    ("no_solution_line", include_str!("../scenarios/no_solution_line.json")),
];

pub fn builtin_scenario(name: &str) -> Option<&'static str> {
    BUILTIN_SCENARIOS.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

#[derive(Clone, Debug, Default)]
pub struct OutputOptions {
    pub report: Option<PathBuf>,
    pub plot: Option<PathBuf>,
    /// Names of scenario sets or set-valued task results to draw.
    pub plot_sets: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct Task {
    pub id: String,
    pub op: Op,
    /// Dotted paths into the result with the values they must have.
    pub expect: Vec<(String, Value)>,
}

#[derive(Clone, Debug)]
pub enum Op {
    SetExpr { expr: String },
    Residual { a: String, b: String, dirs: Vec<Vector> },
    Eval { f: String, x: Vector },
    Derivative { f: String, x: Vector, u: Vector, dirs: Vec<Vector> },
    CheckVi { f: String, x0: Vector, space: String, ineq: Ineq, dirs: Vec<Vector> },
    Infimum { f: String, x0: Vector, space: String, dirs: Vec<Vector> },
    Minimal { f: String, x0: Vector, space: String, dirs: Vec<Vector> },
    MinimalSet { f: String, candidates: String, space: String },
    Infimizer { f: String, m: Vec<Vector>, space: String, dirs: Vec<Vector>, solution: bool },
    Audit { f: String, x0: Vector, space: String, dirs: Vec<Vector>, finite_dirs: Vec<Vector> },
    Efficient { map: String, space: String },
    VectorDini { map: String, x0: Vector, x: Vector, mstar: Vec<Vector> },
    VectorMinty { map: String, x0: Vector, space: String, mstar: Vec<Vector>, t_params: Vec<Q> },
    InfdirPlusCone { z: Vector },
    Noncommutation,
}

impl Op {
    pub fn name(&self) -> &'static str {
        match self {
            Op::SetExpr { .. } => "set",
            Op::Residual { .. } => "residual",
            Op::Eval { .. } => "eval",
            Op::Derivative { .. } => "derivative",
            Op::CheckVi { .. } => "check_vi",
            Op::Infimum { .. } => "infimum",
            Op::Minimal { .. } => "minimal",
            Op::MinimalSet { .. } => "minimal_set",
            Op::Infimizer { solution: false, .. } => "infimizer",
            Op::Infimizer { solution: true, .. } => "solution",
            Op::Audit { .. } => "audit",
            Op::Efficient { .. } => "efficient",
            Op::VectorDini { .. } => "vector_dini",
            Op::VectorMinty { .. } => "vector_minty",
            Op::InfdirPlusCone { .. } => "infdir_plus_cone",
            Op::Noncommutation => "noncommutation",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub ws: Workspace,
    pub functions: BTreeMap<String, SetFunction>,
    pub maps: BTreeMap<String, VectorMap>,
    pub sets: Vec<(String, UpperSet)>,
    pub spaces: BTreeMap<String, CandidateSpace>,
    pub tasks: Vec<Task>,
    pub output: OutputOptions,
    pub tolerance: Option<Q>,
}

fn obj<'a>(v: &'a Value, what: &str) -> Result<&'a Map<String, Value>, CliError> {
    v.as_object().ok_or_else(|| CliError::Validation(format!("{what} must be an object")))
}

fn field<'a>(m: &'a Map<String, Value>, key: &str, what: &str) -> Result<&'a Value, CliError> {
    m.get(key).ok_or_else(|| CliError::Validation(format!("{what} needs \"{key}\"")))
}

fn string(m: &Map<String, Value>, key: &str, what: &str) -> Result<String, CliError> {
    field(m, key, what)?
        .as_str()
        .map(str::to_string)
        .ok_or_else(|| CliError::Validation(format!("{what}: \"{key}\" must be a string")))
}

fn wrap<T>(r: Result<T, String>, what: &str) -> Result<T, CliError> {
    r.map_err(|e| CliError::Validation(format!("{what}: {e}")))
}

fn point(m: &Map<String, Value>, key: &str, what: &str, dim: usize) -> Result<Vector, CliError> {
    let p = wrap(vector(field(m, key, what)?), what)?;
    if p.dim() != dim {
        return invalid(format!("{what}: \"{key}\" has dimension {}, expected {dim}", p.dim()));
    }
    Ok(p)
}

fn opt_points(m: &Map<String, Value>, key: &str, what: &str, dim: usize) -> Result<Vec<Vector>, CliError> {
    match m.get(key) {
        None => Ok(vec![]),
        Some(v) => {
            let ps = wrap(vectors(v), what)?;
            if let Some(p) = ps.iter().find(|p| p.dim() != dim) {
                return invalid(format!("{what}: {p} in \"{key}\" has the wrong dimension"));
            }
            Ok(ps)
        }
    }
}

fn affine(v: &Value, xdim: usize, what: &str) -> Result<Affine, CliError> {
    let m = obj(v, what)?;
    let coef = point(m, "coef", what, xdim)?;
    let c = wrap(rational(field(m, "c", what)?), what)?;
    Ok(Affine::new(coef, c))
}

fn pieces(v: &Value, xdim: usize, what: &str) -> Result<Vec<Affine>, CliError> {
    v.as_array()
        .ok_or_else(|| CliError::Validation(format!("{what}: pieces must be an array")))?
        .iter()
        .map(|p| affine(p, xdim, what))
        .collect()
}

fn domain(m: &Map<String, Value>, xdim: usize, what: &str) -> Result<Domain, CliError> {
    let mut halfspaces = Vec::new();
    if let Some(d) = m.get("domain") {
        for h in d.as_array().ok_or_else(|| CliError::Validation(format!("{what}: domain must be an array")))? {
            let hm = obj(h, what)?;
            halfspaces.push((point(hm, "a", what, xdim)?, wrap(rational(field(hm, "b", what)?), what)?));
        }
    }
    Ok(Domain { halfspaces })
}

fn xdim_of(m: &Map<String, Value>, what: &str) -> Result<usize, CliError> {
    field(m, "xdim", what)?
        .as_u64()
        .filter(|d| (1..=2).contains(d))
        .map(|d| d as usize)
        .ok_or_else(|| CliError::Validation(format!("{what}: xdim must be 1 or 2")))
}

fn vector_function(v: &Value, what: &str) -> Result<VectorFunction, CliError> {
    let m = obj(v, what)?;
    let xdim = xdim_of(m, what)?;
    let comps = field(m, "components", what)?
        .as_array()
        .ok_or_else(|| CliError::Validation(format!("{what}: components must be an array")))?
        .iter()
        .map(|c| ConvexPWL::new(pieces(c, xdim, what)?).map_err(|e| CliError::Validation(format!("{what}: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    VectorFunction::new(xdim, comps, domain(m, xdim, what)?).map_err(|e| CliError::Validation(format!("{what}: {e}")))
}

fn same_workspace(a: &Workspace, b: &Workspace) -> bool {
    let gens = |w: &Workspace| {
        let mut g: Vec<Vector> = w.cone.generators.iter().map(Vector::primitive).collect();
        g.sort();
        g
    };
    a.dim == b.dim && gens(a) == gens(b)
}

fn parse_workspace(v: &Value) -> Result<Workspace, CliError> {
    let m = obj(v, "workspace")?;
    if let Some(name) = m.get("builtin") {
        let name = name.as_str().unwrap_or_default();
        return builtins::get(name).map(|b| b.ws).ok_or_else(|| CliError::Validation(format!("unknown builtin {name:?}")));
    }
    let dim = field(m, "dim", "workspace")?
        .as_u64()
        .filter(|d| (1..=2).contains(d))
        .ok_or_else(|| CliError::Validation("workspace: dim must be 1 or 2".into()))? as usize;
    let gens = opt_points(m, "cone", "workspace", dim)?;
    let dirs = opt_points(m, "directions", "workspace", dim)?;
    Workspace::new(dim, gens, dirs).map_err(|e| CliError::Validation(format!("workspace: {e}")))
}

fn parse_function(ws: &Workspace, name: &str, v: &Value) -> Result<SetFunction, CliError> {
    let what = format!("function {name:?}");
    let m = obj(v, &what)?;
    if let Some(b) = m.get("builtin") {
        let b = b.as_str().unwrap_or_default();
        let bi = builtins::get(b).ok_or_else(|| CliError::Validation(format!("{what}: unknown builtin {b:?}")))?;
        if !same_workspace(ws, &bi.ws) {
            return invalid(format!("{what}: builtin {b:?} lives in a different workspace"));
        }
        return bi.f.ok_or_else(|| CliError::Validation(format!("{what}: builtin {b:?} has no function")));
    }
    if let Some(p) = m.get("parampoly") {
        let pm = obj(p, &what)?;
        let xdim = xdim_of(pm, &what)?;
        let normals = opt_points(pm, "normals", &what, ws.dim)?;
        let offsets = field(pm, "offsets", &what)?
            .as_array()
            .ok_or_else(|| CliError::Validation(format!("{what}: offsets must be an array")))?
            .iter()
            .map(|o| ConcavePWL::new(pieces(o, xdim, &what)?).map_err(|e| CliError::Validation(format!("{what}: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        let d = domain(pm, xdim, &what)?;
        let pp = ParamPoly::new(ws, xdim, normals, offsets, d).map_err(|e| CliError::Validation(format!("{what}: {e}")))?;
        return Ok(SetFunction::ParamPoly(pp));
    }
    if let Some(e) = m.get("epivector") {
        let psi = vector_function(e, &what)?;
        let ev = EpiVector::new(ws, psi).map_err(|e| CliError::Validation(format!("{what}: {e}")))?;
        return Ok(SetFunction::EpiVector(ev));
    }
    invalid(format!("{what}: expected \"builtin\", \"parampoly\" or \"epivector\""))
}

fn parse_map(ws: &Workspace, name: &str, v: &Value) -> Result<VectorMap, CliError> {
    let what = format!("map {name:?}");
    let m = obj(v, &what)?;
    let map = if let Some(b) = m.get("builtin") {
        let b = b.as_str().unwrap_or_default();
        match builtins::get(b) {
            Some(bi) if b == "infdir_example" => {
                if !same_workspace(ws, &bi.ws) {
                    return invalid(format!("{what}: builtin {b:?} lives in a different workspace"));
                }
                infdir_map()
            }
            Some(bi) => match bi.f {
                Some(SetFunction::EpiVector(e)) => {
                    if !same_workspace(ws, &bi.ws) {
                        return invalid(format!("{what}: builtin {b:?} lives in a different workspace"));
                    }
                    VectorMap::Pwl(e.psi)
                }
                _ => return invalid(format!("{what}: builtin {b:?} is not a vector function")),
            },
            None => return invalid(format!("{what}: unknown builtin {b:?}")),
        }
    } else if let Some(p) = m.get("pwl") {
        VectorMap::Pwl(vector_function(p, &what)?)
    } else {
        return invalid(format!("{what}: expected \"builtin\" or \"pwl\""));
    };
    if map.zdim() != ws.dim {
        return invalid(format!("{what}: has {} components in a workspace of dimension {}", map.zdim(), ws.dim));
    }
    Ok(map)
}

fn parse_set(ws: &Workspace, name: &str, v: &Value, known: &[(String, UpperSet)]) -> Result<UpperSet, CliError> {
    let what = format!("set {name:?}");
    let m = obj(v, &what)?;
    if let Some(b) = m.get("builtin") {
        let b = b.as_str().unwrap_or_default();
        let bi = builtins::get(b).ok_or_else(|| CliError::Validation(format!("{what}: unknown builtin {b:?}")))?;
        if !same_workspace(ws, &bi.ws) {
            return invalid(format!("{what}: builtin {b:?} lives in a different workspace"));
        }
        let key = string(m, "set", &what)?;
        return bi
            .sets
            .into_iter()
            .find(|(n, _)| *n == key)
            .map(|(_, s)| s)
            .ok_or_else(|| CliError::Validation(format!("{what}: builtin {b:?} has no set {key:?}")));
    }
    if let Some(e) = m.get("expr") {
        let env: BTreeMap<String, UpperSet> = known.iter().cloned().collect();
        let src = e.as_str().unwrap_or_default();
        return expr::eval_expr(ws, src, &env).map_err(|e| CliError::Validation(format!("{what}: {e}")));
    }
    wrap(ws.upper_from_json(v), &what)
}

fn parse_space(
    name: &str,
    v: &Value,
    ws: &Workspace,
    functions: &BTreeMap<String, SetFunction>,
    known: &BTreeMap<String, CandidateSpace>,
) -> Result<CandidateSpace, CliError> {
    let what = format!("space {name:?}");
    let m = obj(v, &what)?;
    let space = if let Some(p) = m.get("points") {
        CandidateSpace::new(wrap(vectors(p), &what)?)
    } else if let Some(g) = m.get("grid") {
        let gm = obj(g, &what)?;
        let lo = wrap(vector(field(gm, "lo", &what)?), &what)?;
        let hi = wrap(vector(field(gm, "hi", &what)?), &what)?;
        let n = field(gm, "n", &what)?.as_u64().ok_or_else(|| CliError::Validation(format!("{what}: n must be a count")))?;
        CandidateSpace::grid(&lo, &hi, n as usize)
    } else if let Some(d) = m.get("domain_of") {
        let dm = obj(d, &what)?;
        let f = functions
            .get(&string(dm, "function", &what)?)
            .ok_or_else(|| CliError::Validation(format!("{what}: unknown function")))?;
        let base = known.get(&string(dm, "space", &what)?).ok_or_else(|| CliError::Validation(format!("{what}: unknown space")))?;
        CandidateSpace::new(base.points.iter().filter(|p| f.in_domain(ws, p)).cloned().collect())
    } else {
        return invalid(format!("{what}: expected \"points\", \"grid\" or \"domain_of\""));
    };
    space.map_err(|e| CliError::Validation(format!("{what}: {e}")))
}

struct Names<'a> {
    s: &'a Scenario,
}

impl Names<'_> {
    fn function(&self, m: &Map<String, Value>, what: &str) -> Result<(String, usize), CliError> {
        let n = string(m, "function", what)?;
        match self.s.functions.get(&n) {
            Some(f) => Ok((n, f.xdim())),
            None => invalid(format!("{what}: unknown function {n:?}")),
        }
    }

    fn map(&self, m: &Map<String, Value>, what: &str) -> Result<(String, usize), CliError> {
        let n = string(m, "map", what)?;
        match self.s.maps.get(&n) {
            Some(f) => Ok((n, f.xdim())),
            None => invalid(format!("{what}: unknown map {n:?}")),
        }
    }

    fn space(&self, m: &Map<String, Value>, key: &str, what: &str, dim: usize) -> Result<String, CliError> {
        let n = string(m, key, what)?;
        match self.s.spaces.get(&n) {
            Some(sp) if sp.dim() == dim => Ok(n),
            Some(_) => invalid(format!("{what}: space {n:?} has the wrong dimension")),
            None => invalid(format!("{what}: unknown space {n:?}")),
        }
    }

    fn set(&self, m: &Map<String, Value>, key: &str, what: &str) -> Result<String, CliError> {
        let n = string(m, key, what)?;
        if self.s.sets.iter().any(|(k, _)| *k == n) {
            Ok(n)
        } else {
            invalid(format!("{what}: unknown set {n:?}"))
        }
    }

    /// A list of points, or the name of a space.
    fn points(&self, m: &Map<String, Value>, key: &str, what: &str, dim: usize) -> Result<Vec<Vector>, CliError> {
        match field(m, key, what)? {
            Value::String(n) => match self.s.spaces.get(n) {
                Some(sp) if sp.dim() == dim => Ok(sp.points.clone()),
                _ => invalid(format!("{what}: unknown space {n:?}")),
            },
            _ => {
                let ps = opt_points(m, key, what, dim)?;
                if ps.is_empty() {
                    return invalid(format!("{what}: \"{key}\" is empty"));
                }
                Ok(ps)
            }
        }
    }
}

fn parse_task(s: &Scenario, v: &Value, index: usize) -> Result<Task, CliError> {
    let what0 = format!("task #{index}");
    let m = obj(v, &what0)?;
    let id = m.get("id").and_then(Value::as_str).map(str::to_string).unwrap_or_else(|| format!("task{index}"));
    let what = format!("task {id:?}");
    let op_name = string(m, "op", &what)?;
    let names = Names { s };
    let zd = s.ws.dim;
    let dirs = |key: &str| opt_points(m, key, &what, zd);
    let op = match op_name.as_str() {
        "set" => {
            let expr = string(m, "expr", &what)?;
            let env: BTreeMap<String, UpperSet> = s.sets.iter().cloned().collect();
            expr::eval_expr(&s.ws, &expr, &env).map_err(|e| CliError::Validation(format!("{what}: {e}")))?;
            Op::SetExpr { expr }
        }
        "residual" => Op::Residual { a: names.set(m, "a", &what)?, b: names.set(m, "b", &what)?, dirs: dirs("dirs")? },
        "eval" => {
            let (f, xd) = names.function(m, &what)?;
            Op::Eval { f, x: point(m, "x", &what, xd)? }
        }
        "derivative" => {
            let (f, xd) = names.function(m, &what)?;
            Op::Derivative { f, x: point(m, "x", &what, xd)?, u: point(m, "u", &what, xd)?, dirs: dirs("dirs")? }
        }
        "check_vi" => {
            let (f, xd) = names.function(m, &what)?;
            let id_s = string(m, "ineq", &what)?;
            let ineq = Ineq::from_id(&id_s).ok_or_else(|| CliError::Validation(format!("{what}: unknown inequality {id_s:?}")))?;
            Op::CheckVi { x0: point(m, "x0", &what, xd)?, space: names.space(m, "space", &what, xd)?, f, ineq, dirs: dirs("dirs")? }
        }
        "infimum" | "minimal" => {
            let (f, xd) = names.function(m, &what)?;
            let (x0, space) = (point(m, "x0", &what, xd)?, names.space(m, "space", &what, xd)?);
            if op_name == "infimum" {
                Op::Infimum { f, x0, space, dirs: dirs("dirs")? }
            } else {
                Op::Minimal { f, x0, space, dirs: dirs("dirs")? }
            }
        }
        "minimal_set" => {
            let (f, xd) = names.function(m, &what)?;
            Op::MinimalSet { candidates: names.space(m, "candidates", &what, xd)?, space: names.space(m, "space", &what, xd)?, f }
        }
        "infimizer" | "solution" => {
            let (f, xd) = names.function(m, &what)?;
            Op::Infimizer {
                m: names.points(m, "m", &what, xd)?,
                space: names.space(m, "space", &what, xd)?,
                f,
                dirs: dirs("dirs")?,
                solution: op_name == "solution",
            }
        }
        "audit" => {
            let (f, xd) = names.function(m, &what)?;
            Op::Audit {
                x0: point(m, "x0", &what, xd)?,
                space: names.space(m, "space", &what, xd)?,
                f,
                dirs: dirs("dirs")?,
                finite_dirs: dirs("finite_dirs")?,
            }
        }
        "efficient" => {
            let (map, xd) = names.map(m, &what)?;
            Op::Efficient { space: names.space(m, "space", &what, xd)?, map }
        }
        "vector_dini" => {
            let (map, xd) = names.map(m, &what)?;
            Op::VectorDini { x0: point(m, "x0", &what, xd)?, x: point(m, "x", &what, xd)?, map, mstar: dirs("mstar")? }
        }
        "vector_minty" => {
            let (map, xd) = names.map(m, &what)?;
            let t_params = match m.get("t_params") {
                None => default_t_params(),
                Some(v) => wrap(vector(v), &what)?.0,
            };
            Op::VectorMinty {
                x0: point(m, "x0", &what, xd)?,
                space: names.space(m, "space", &what, xd)?,
                map,
                mstar: dirs("mstar")?,
                t_params,
            }
        }
        "infdir_plus_cone" => Op::InfdirPlusCone { z: point(m, "z", &what, zd)? },
        "noncommutation" => {
            if zd != 2 {
                return invalid(format!("{what}: needs a planar workspace"));
            }
            Op::Noncommutation
        }
        other => return invalid(format!("{what}: unknown op {other:?}")),
    };
    let mut expect = Vec::new();
    if let Some(e) = m.get("expect") {
        for (k, v) in obj(e, &what)? {
            expect.push((k.clone(), v.clone()));
        }
    }
    Ok(Task { id, op, expect })
}

fn with_tolerance(f: SetFunction, tol: &Q) -> SetFunction {
    match f {
        SetFunction::Oracle(mut o) => {
            o.tolerance = tol.clone();
            SetFunction::Oracle(o)
        }
        other => other,
    }
}

fn map_with_tolerance(m: VectorMap, tol: &Q) -> VectorMap {
    match m {
        VectorMap::Oracle(mut o) => {
            o.tolerance = tol.clone();
            VectorMap::Oracle(o)
        }
        other => other,
    }
}

impl Scenario {
    /// Parses and validates a scenario; relative output paths resolve against `base`.
    pub fn parse(text: &str, base: Option<&Path>) -> Result<Scenario, CliError> {
        let v: Value = serde_json::from_str(text).map_err(|e| CliError::Validation(format!("malformed JSON: {e}")))?;
        let m = obj(&v, "scenario")?;
        match m.get("schema_version").and_then(Value::as_u64) {
            Some(SCHEMA_VERSION) => {}
            Some(other) => return invalid(format!("unsupported schema_version {other}")),
            None => return invalid("scenario needs an integer \"schema_version\""),
        }
        let name = m.get("name").and_then(Value::as_str).unwrap_or("scenario").to_string();
        let ws = parse_workspace(field(m, "workspace", "scenario")?)?;
        let tolerance = match m.get("output").and_then(|o| o.get("tolerance")) {
            None => None,
            Some(t) => Some(wrap(rational(t), "output.tolerance")?),
        };
        let section = |key: &str| -> Result<Vec<(String, Value)>, CliError> {
            match m.get(key) {
                None => Ok(vec![]),
                Some(v) => Ok(obj(v, key)?.iter().map(|(k, v)| (k.clone(), v.clone())).collect()),
            }
        };
        let mut functions = BTreeMap::new();
        for (k, v) in section("functions")? {
            functions.insert(k.clone(), parse_function(&ws, &k, &v)?);
        }
        let mut maps = BTreeMap::new();
        for (k, v) in section("maps")? {
            maps.insert(k.clone(), parse_map(&ws, &k, &v)?);
        }
        // sets and spaces may refer to earlier entries, so they are arrays of named entries or objects
        let named = |key: &str| -> Result<Vec<(String, Value)>, CliError> {
            match m.get(key) {
                Some(Value::Array(a)) => a
                    .iter()
                    .map(|e| {
                        let em = obj(e, key)?;
                        Ok((string(em, "name", key)?, e.clone()))
                    })
                    .collect(),
                _ => section(key),
            }
        };
        let mut sets: Vec<(String, UpperSet)> = Vec::new();
        for (k, v) in named("sets")? {
            if sets.iter().any(|(n, _)| *n == k) {
                return invalid(format!("duplicate set {k:?}"));
            }
            let s = parse_set(&ws, &k, &v, &sets)?;
            sets.push((k, s));
        }
        let mut spaces = BTreeMap::new();
        for (k, v) in named("spaces")? {
            let sp = parse_space(&k, &v, &ws, &functions, &spaces)?;
            spaces.insert(k, sp);
        }
        let out = m.get("output").map(|o| obj(o, "output")).transpose()?;
        let resolve = |p: &str| match base {
            Some(b) => b.join(p),
            None => PathBuf::from(p),
        };
        let output = OutputOptions {
            report: out.and_then(|o| o.get("report")).and_then(Value::as_str).map(resolve),
            plot: out.and_then(|o| o.get("plot")).and_then(Value::as_str).map(resolve),
            plot_sets: match out.and_then(|o| o.get("plot_sets")) {
                None => vec![],
                Some(Value::Array(a)) => a
                    .iter()
                    .map(|n| n.as_str().map(str::to_string).ok_or_else(|| CliError::Validation("plot_sets must be names".into())))
                    .collect::<Result<_, _>>()?,
                Some(_) => return invalid("plot_sets must be an array"),
            },
        };
        let mut s = Scenario { name, ws, functions, maps, sets, spaces, tasks: vec![], output, tolerance };
        let tasks = match m.get("tasks") {
            Some(Value::Array(a)) => a,
            _ => return invalid("scenario needs a \"tasks\" array"),
        };
        let mut ids = Vec::new();
        for (i, t) in tasks.iter().enumerate() {
            let task = parse_task(&s, t, i)?;
            if ids.contains(&task.id) {
                return invalid(format!("duplicate task id {:?}", task.id));
            }
            ids.push(task.id.clone());
            s.tasks.push(task);
        }
        for n in &s.output.plot_sets {
            let is_set = s.sets.iter().any(|(k, _)| k == n);
            let is_task = s.tasks.iter().any(|t| t.id == *n && matches!(t.op, Op::SetExpr { .. }));
            if !is_set && !is_task {
                return invalid(format!("plot_sets: {n:?} is neither a set nor a set task"));
            }
        }
        if let Some(t) = s.tolerance.clone() {
            s.set_tolerance(&t);
        }
        Ok(s)
    }

    /// Overrides the tolerance of every oracle.
    pub fn set_tolerance(&mut self, tol: &Q) {
        self.tolerance = Some(tol.clone());
        let fs = std::mem::take(&mut self.functions);
        self.functions = fs.into_iter().map(|(k, f)| (k, with_tolerance(f, tol))).collect();
        let ms = std::mem::take(&mut self.maps);
        self.maps = ms.into_iter().map(|(k, m)| (k, map_with_tolerance(m, tol))).collect();
    }

    fn set(&self, name: &str) -> &UpperSet {
        &self.sets.iter().find(|(k, _)| k == name).expect("validated").1
    }

    /// Given directions, or the sample plus the normals of `f`'s values.
    fn fdirs(&self, f: &SetFunction, dirs: &[Vector]) -> Vec<Vector> {
        if dirs.is_empty() {
            audit_directions(&self.ws, f, &[])
        } else {
            dirs.to_vec()
        }
    }

    fn dirs_or_default(&self, dirs: &[Vector]) -> Vec<Vector> {
        if dirs.is_empty() {
            self.ws.directions.items.clone()
        } else {
            dirs.to_vec()
        }
    }

    /// Runs one task: the result JSON and whether a checked property failed.
    fn run_task(&self, task: &Task) -> Result<(Value, bool), String> {
        let ws = &self.ws;
        let err = |e: &dyn std::fmt::Display| e.to_string();
        let f = |n: &str| &self.functions[n];
        let sp = |n: &str| &self.spaces[n];
        Ok(match &task.op {
            Op::SetExpr { expr } => {
                let env: BTreeMap<String, UpperSet> = self.sets.iter().cloned().collect();
                let s = expr::eval_expr(ws, expr, &env).map_err(|e| err(&e))?;
                (json!({ "value": s.to_json(), "describe": s.describe() }), false)
            }
            Op::Residual { a, b, dirs } => {
                let (sa, sb) = (self.set(a), self.set(b));
                let res = ws.residual_diff(sa, sb);
                let per: Vec<Value> = self
                    .dirs_or_default(dirs)
                    .iter()
                    .map(|z| {
                        let r = ws.neg_support(z, sa).residual(&ws.neg_support(z, sb));
                        json!({ "zstar": rat_vector(z), "value": ext_value(&r) })
                    })
                    .collect();
                (json!({ "value": res.to_json(), "describe": res.describe(), "scalar_residuals": per }), false)
            }
            Op::Eval { f: n, x } => {
                let v = f(n).eval(ws, x);
                (json!({ "value": v.to_json(), "describe": v.describe() }), false)
            }
            Op::Derivative { f: n, x, u, dirs } => {
                let g = f(n);
                let dirs = self.fdirs(g, dirs);
                let d = set_derivative(ws, g, x, u).map_err(|e| err(&e))?;
                let inter = scalarized_derivative_intersection(ws, g, x, u, &dirs);
                let r = regularity_check(ws, g, x, u, &dirs).map_err(|e| err(&e))?;
                let mut dj = d.to_json();
                if let Some(o) = dj.as_object_mut() {
                    o.remove("samples");
                }
                let v = json!({
                    "derivative": dj,
                    "describe": d.value.describe(),
                    "scalarized_intersection": inter.to_json(),
                    "scalarized_describe": inter.describe(),
                    "regularity": {
                        "strong": r.strong,
                        "weak": r.weak,
                        "exact": r.exact,
                        "strong_failures": r.strong_failures.iter().map(rat_vector).collect::<Vec<_>>(),
                    },
                });
                (v, false)
            }
            Op::CheckVi { f: n, x0, space, ineq, dirs } => {
                let r = check_vi(ws, f(n), x0, sp(space), &self.fdirs(f(n), dirs), *ineq).map_err(|e| err(&e))?;
                (r.to_json(), false)
            }
            Op::Infimum { f: n, x0, space, dirs } => {
                let r = infimum_at_point_check(ws, f(n), x0, sp(space), &self.fdirs(f(n), dirs)).map_err(|e| err(&e))?;
                let bad = r.exact && !r.consistent;
                (r.to_json(), bad)
            }
            Op::Minimal { f: n, x0, space, dirs } => {
                let r = minimal_check(ws, f(n), x0, sp(space), &self.fdirs(f(n), dirs)).map_err(|e| err(&e))?;
                let bad = r.exact && !r.consistent;
                (r.to_json(), bad)
            }
            Op::MinimalSet { f: n, candidates, space } => {
                let m = minimal_set(ws, f(n), sp(candidates), sp(space));
                (json!({ "minimal": m.iter().map(rat_vector).collect::<Vec<_>>(), "count": m.len() }), false)
            }
            Op::Infimizer { f: n, m, space, dirs, solution } => {
                let dirs = self.fdirs(f(n), dirs);
                if *solution {
                    (solution_check(ws, f(n), m, sp(space), &dirs).map_err(|e| err(&e))?.to_json(), false)
                } else {
                    (infimizer_check(ws, f(n), m, sp(space), &dirs).map_err(|e| err(&e))?.to_json(), false)
                }
            }
            Op::Audit { f: n, x0, space, dirs, finite_dirs } => {
                let r = implication_audit(ws, f(n), x0, sp(space), &self.fdirs(f(n), dirs), finite_dirs).map_err(|e| err(&e))?;
                let bad = !r.violations().is_empty();
                (r.to_json(), bad)
            }
            Op::Efficient { map, space } => {
                let r = efficient_set(ws, &self.maps[map], &sp(space).points).map_err(|e| err(&e))?;
                let bad = !(r.agrees_with_minimal && r.eff_plus_c_identity);
                (r.to_json(), bad)
            }
            Op::VectorDini { map, x0, x, mstar } => {
                let psi = &self.maps[map];
                let d = vector_dini(psi, x0, &x.sub(x0)).map_err(|e| err(&e))?;
                let c = classify_dini(ws, psi, x0, x, &d, &self.dirs_or_default(mstar)).map_err(|e| err(&e))?;
                let bad = c.exact && !c.holds();
                (json!({ "dini": d.to_json(), "classification": c.to_json() }), bad)
            }
            Op::VectorMinty { map, x0, space, mstar, t_params } => {
                let r = vector_minty_check(ws, &self.maps[map], x0, &sp(space).points, mstar, t_params).map_err(|e| err(&e))?;
                let bad = !r.consistent();
                (r.to_json(), bad)
            }
            Op::InfdirPlusCone { z } => {
                let s = infdir_plus_cone(ws, z);
                (json!({ "value": s.to_json(), "describe": s.describe() }), false)
            }
            Op::Noncommutation => {
                let r = noncommutation_example(ws);
                let bad = !r.strictly_smaller;
                (r.to_json(), bad)
            }
        })
    }

    fn exact(&self) -> bool {
        self.functions.values().all(SetFunction::is_exact) && self.maps.values().all(VectorMap::is_exact)
    }
}

fn lookup<'a>(v: &'a Value, path: &str) -> Option<&'a Value> {
    path.split('.').try_fold(v, |cur, key| match cur {
        Value::Array(a) => key.parse::<usize>().ok().and_then(|i| a.get(i)),
        _ => cur.get(key),
    })
}

#[derive(Clone, Debug)]
pub struct TaskOutcome {
    pub id: String,
    pub op: &'static str,
    pub status: &'static str,
    pub result: Value,
    pub mismatches: Vec<String>,
    pub summary: String,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub report: Value,
    pub tasks: Vec<TaskOutcome>,
    pub exit_code: i32,
}

fn summarize(op: &Op, result: &Value) -> String {
    let b = |k: &str| lookup(result, k).map(|v| v.to_string()).unwrap_or_default();
    match op {
        Op::SetExpr { .. } | Op::Residual { .. } | Op::Eval { .. } | Op::InfdirPlusCone { .. } => b("describe").trim_matches('"').to_string(),
        Op::Derivative { .. } => format!(
            "f' = {}, scalarized = {}, strong = {}, weak = {}",
            b("describe").trim_matches('"'),
            b("scalarized_describe").trim_matches('"'),
            b("regularity.strong"),
            b("regularity.weak")
        ),
        Op::Audit { .. } => {
            let mut lines = vec![format!("exact = {}, domain = {}", b("exact"), b("domain_size"))];
            if let Some(rows) = result["implications"].as_array() {
                for r in rows {
                    lines.push(format!(
                        "    {:<40} {:>4}  {}",
                        r["name"].as_str().unwrap_or(""),
                        r["premises"],
                        r["status"].as_str().unwrap_or("")
                    ));
                }
            }
            lines.join("\n")
        }
        Op::MinimalSet { .. } => format!("{} minimal: {}", b("count"), b("minimal")),
        Op::Efficient { .. } => format!("efficient: {}, agrees = {}", b("efficient"), b("agrees_with_minimal")),
        Op::VectorDini { .. } => format!("{} / {}, holds = {}", b("dini.finite"), b("dini.infinite"), b("classification.holds")),
        Op::VectorMinty { .. } => format!("efficient = {}, inner = {}, consistent = {}", b("efficient"), b("inner.holds"), b("consistent")),
        Op::Noncommutation => format!("strictly_smaller = {}", b("strictly_smaller")),
        _ => format!("holds = {}", b("holds")),
    }
}

/// Runs every task (in parallel when `jobs > 1`) and assembles the report in task order.
pub fn run(s: &Scenario, jobs: usize) -> RunOutcome {
    let exec = |t: &Task| -> TaskOutcome {
        let (status, result, mismatches) = match s.run_task(t) {
            Err(e) => ("error", json!({ "error": e }), vec![]),
            Ok((result, bad)) => {
                let mismatches: Vec<String> = t
                    .expect
                    .iter()
                    .filter(|(k, v)| lookup(&result, k) != Some(v))
                    .map(|(k, v)| format!("{k}: expected {v}, got {}", lookup(&result, k).map(Value::to_string).unwrap_or("nothing".into())))
                    .collect();
                let status = if bad {
                    "violation"
                } else if !mismatches.is_empty() {
                    "mismatch"
                } else {
                    "ok"
                };
                (status, result, mismatches)
            }
        };
        let summary = if status == "error" { result["error"].as_str().unwrap_or("").to_string() } else { summarize(&t.op, &result) };
        TaskOutcome { id: t.id.clone(), op: t.op.name(), status, result, mismatches, summary }
    };
    let tasks: Vec<TaskOutcome> = if jobs > 1 {
        match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
            Ok(pool) => pool.install(|| s.tasks.par_iter().map(exec).collect()),
            Err(_) => s.tasks.iter().map(exec).collect(),
        }
    } else {
        s.tasks.iter().map(exec).collect()
    };
    let failed = tasks.iter().filter(|t| t.status != "ok").count();
    let report = json!({
        "schema_version": SCHEMA_VERSION,
        "scenario": s.name,
        "environment": {
            "exact": s.exact(),
            "tolerance": s.tolerance.as_ref().map(rat),
            "workspace": {
                "dim": s.ws.dim,
                "cone": s.ws.cone.generators.iter().map(rat_vector).collect::<Vec<_>>(),
                "directions": s.ws.directions.items.iter().map(rat_vector).collect::<Vec<_>>(),
            },
        },
        "tasks": tasks.iter().map(|t| {
            let mut v = json!({ "id": t.id, "op": t.op, "status": t.status, "result": t.result });
            if !t.mismatches.is_empty() {
                v["mismatches"] = json!(t.mismatches);
            }
            v
        }).collect::<Vec<_>>(),
        "summary": { "tasks": tasks.len(), "failed": failed },
    });
    RunOutcome { report, exit_code: if failed == 0 { EXIT_OK } else { EXIT_FAILURE }, tasks }
}

/// Sets to draw: the requested names, or every scenario set.
pub fn plot_sets(s: &Scenario) -> Result<Vec<(String, UpperSet)>, CliError> {
    if s.output.plot_sets.is_empty() {
        return Ok(s.sets.clone());
    }
    let env: BTreeMap<String, UpperSet> = s.sets.iter().cloned().collect();
    s.output
        .plot_sets
        .iter()
        .map(|n| {
            if let Some(set) = env.get(n) {
                return Ok((n.clone(), set.clone()));
            }
            match s.tasks.iter().find(|t| t.id == *n).map(|t| &t.op) {
                Some(Op::SetExpr { expr }) => expr::eval_expr(&s.ws, expr, &env)
                    .map(|v| (n.clone(), v))
                    .map_err(|e| CliError::Validation(e.to_string())),
                _ => invalid(format!("cannot plot {n:?}")),
            }
        })
        .collect()
}

/// Pretty JSON with a trailing newline.
pub fn render_report(report: &Value) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("serializable");
    s.push('\n');
    s
}

/// Reads a scenario from a path or `builtin:<name>`.
pub fn load(spec: &str) -> Result<Scenario, CliError> {
    if let Some(name) = spec.strip_prefix("builtin:") {
        let text = builtin_scenario(name).ok_or_else(|| CliError::Validation(format!("unknown builtin scenario {name:?}")))?;
        return Scenario::parse(text, None);
    }
    let path = Path::new(spec);
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Validation(format!("cannot read {spec}: {e}")))?;
    Scenario::parse(&text, path.parent())
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests;
