//! Python bindings: workspaces, upper sets, set functions, vector functions and scenarios.
//!
//! Rationals cross the boundary as `int`, `str` (`"3/4"`) or anything whose `str()` parses,
//! such as `fractions.Fraction`. Reports come back as plain dicts.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde_json::Value;
use setvi::builtins;
use setvi::calculus::{regularity_check, set_derivative};
use setvi::cli;
use setvi::lattice::{UpperSet as CoreSet, Workspace as CoreWorkspace};
use setvi::rat::{parse_q, q, Vector, Q};
use setvi::setfun::SetFunction as CoreFunction;
use setvi::vectoropt::{self, VectorMap as CoreMap};
use setvi::vi::{self, CandidateSpace, Ineq};
use std::collections::BTreeMap;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_q(v: &Bound<'_, PyAny>) -> PyResult<Q> {
    let s: String = v.str()?.extract()?;
    parse_q(s.trim()).ok_or_else(|| PyValueError::new_err(format!("not a rational: {s:?}")))
}

fn to_vector(v: &Bound<'_, PyAny>) -> PyResult<Vector> {
    let items: Vec<Bound<'_, PyAny>> = v.extract()?;
    items.iter().map(to_q).collect::<PyResult<Vec<_>>>().map(Vector::new)
}

fn to_vectors(v: &Bound<'_, PyAny>) -> PyResult<Vec<Vector>> {
    let items: Vec<Bound<'_, PyAny>> = v.extract()?;
    items.iter().map(to_vector).collect()
}

fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (v.to_string(),))
}

fn space(points: &Bound<'_, PyAny>) -> PyResult<CandidateSpace> {
    CandidateSpace::new(to_vectors(points)?).map_err(err)
}

#[pyclass(name = "UpperSet", frozen, skip_from_py_object, eq)]
#[derive(Clone, PartialEq)]
struct UpperSet {
    inner: CoreSet,
}

#[pymethods]
impl UpperSet {
    fn is_empty(&self) -> bool {
        self.inner.is_empty()
    }

    fn is_all(&self) -> bool {
        self.inner.is_all()
    }

    /// Irredundant constraints as `(normal, bound)` with `normal·z <= bound`.
    fn constraints<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.to_json()["constraints"])
    }

    fn vertices<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.to_json()["vertices"])
    }

    fn rays<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.to_json()["rays"])
    }

    fn to_json<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.to_json())
    }

    fn __repr__(&self) -> String {
        format!("UpperSet({})", self.inner.describe())
    }
}

fn wrap(s: CoreSet) -> UpperSet {
    UpperSet { inner: s }
}

fn unwrap_sets(sets: Vec<PyRef<'_, UpperSet>>) -> Vec<CoreSet> {
    sets.iter().map(|s| s.inner.clone()).collect()
}

#[pyclass(name = "Workspace", frozen, skip_from_py_object)]
#[derive(Clone)]
struct Workspace {
    inner: CoreWorkspace,
}

#[pymethods]
impl Workspace {
    /// `cone` lists generators; the nonnegative orthant when omitted.
    #[new]
    #[pyo3(signature = (dim=2, cone=None, directions=None))]
    fn new(dim: usize, cone: Option<&Bound<'_, PyAny>>, directions: Option<&Bound<'_, PyAny>>) -> PyResult<Self> {
        let gens = match cone {
            Some(c) => to_vectors(c)?,
            None => (0..dim).map(|i| Vector::new((0..dim).map(|j| q((i == j) as i64)).collect())).collect(),
        };
        let dirs = match directions {
            Some(d) => to_vectors(d)?,
            None => vec![],
        };
        CoreWorkspace::new(dim, gens, dirs).map(|inner| Workspace { inner }).map_err(err)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim
    }

    #[getter]
    fn directions<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &Value::Array(self.inner.directions.items.iter().map(setvi::json::rat_vector).collect()))
    }

    fn point(&self, p: &Bound<'_, PyAny>) -> PyResult<UpperSet> {
        let p = to_vector(p)?;
        if p.dim() != self.inner.dim {
            return Err(err("point has the wrong dimension"));
        }
        Ok(wrap(self.inner.translated_cone(&p)))
    }

    /// `{z : n_i·z <= b_i}` from `(n, b)` pairs.
    fn polyhedron(&self, constraints: Vec<(Bound<'_, PyAny>, Bound<'_, PyAny>)>) -> PyResult<UpperSet> {
        let raw = constraints.iter().map(|(n, b)| Ok((to_vector(n)?, to_q(b)?))).collect::<PyResult<Vec<_>>>()?;
        self.inner.canonicalize(&raw).map(wrap).map_err(err)
    }

    #[pyo3(signature = (points, rays=None))]
    fn from_vrep(&self, points: &Bound<'_, PyAny>, rays: Option<&Bound<'_, PyAny>>) -> PyResult<UpperSet> {
        let rays = match rays {
            Some(r) => to_vectors(r)?,
            None => vec![],
        };
        self.inner.from_vrep(&to_vectors(points)?, &rays).map(wrap).map_err(err)
    }

    fn cone(&self) -> UpperSet {
        wrap(self.inner.cone_set())
    }

    fn all(&self) -> UpperSet {
        wrap(self.inner.all())
    }

    fn empty(&self) -> UpperSet {
        wrap(CoreSet::Empty)
    }

    fn inf(&self, sets: Vec<PyRef<'_, UpperSet>>) -> UpperSet {
        wrap(self.inner.inf_family(&unwrap_sets(sets)))
    }

    fn sup(&self, sets: Vec<PyRef<'_, UpperSet>>) -> UpperSet {
        wrap(self.inner.sup_family(&unwrap_sets(sets)))
    }

    fn add(&self, a: &UpperSet, b: &UpperSet) -> UpperSet {
        wrap(self.inner.add(&a.inner, &b.inner))
    }

    fn scale(&self, t: &Bound<'_, PyAny>, a: &UpperSet) -> PyResult<UpperSet> {
        self.inner.scale(&to_q(t)?, &a.inner).map(wrap).map_err(err)
    }

    /// `a ÷ b`.
    fn residual(&self, a: &UpperSet, b: &UpperSet) -> UpperSet {
        wrap(self.inner.residual_diff(&a.inner, &b.inner))
    }

    fn recession(&self, a: &UpperSet) -> UpperSet {
        wrap(self.inner.recession(&a.inner))
    }

    /// `a ≤ b` in the lattice order, i.e. `b ⊆ a`.
    fn leq(&self, a: &UpperSet, b: &UpperSet) -> bool {
        self.inner.leq(&a.inner, &b.inner)
    }

    /// `−σ(z*|a)` as a string (`"-inf"`, `"+inf"` or a rational).
    fn scalarize(&self, zstar: &Bound<'_, PyAny>, a: &UpperSet) -> PyResult<String> {
        let z = to_vector(zstar)?;
        if z.is_zero() || z.dim() != self.inner.dim {
            return Err(err("direction must be nonzero with the workspace dimension"));
        }
        Ok(self.inner.neg_support(&z, &a.inner).to_string())
    }

    /// Evaluates a lattice expression; `env` maps names to sets.
    #[pyo3(signature = (expr, env=None))]
    fn eval(&self, expr: &str, env: Option<BTreeMap<String, PyRef<'_, UpperSet>>>) -> PyResult<UpperSet> {
        let env: BTreeMap<String, CoreSet> = env.unwrap_or_default().into_iter().map(|(k, v)| (k, v.inner.clone())).collect();
        cli::expr::eval_expr(&self.inner, expr, &env).map(wrap).map_err(err)
    }
}

#[pyclass(name = "SetFunction", frozen, skip_from_py_object)]
#[derive(Clone)]
struct SetFunction {
    inner: CoreFunction,
}

fn parse_ineq(id: &str) -> PyResult<Ineq> {
    Ineq::from_id(id).ok_or_else(|| err(format!("unknown inequality {id:?}")))
}

#[pymethods]
impl SetFunction {
    #[getter]
    fn xdim(&self) -> usize {
        self.inner.xdim()
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind()
    }

    fn eval(&self, ws: &Workspace, x: &Bound<'_, PyAny>) -> PyResult<UpperSet> {
        Ok(wrap(self.inner.eval(&ws.inner, &to_vector(x)?)))
    }

    fn derivative<'py>(&self, py: Python<'py>, ws: &Workspace, x: &Bound<'_, PyAny>, u: &Bound<'_, PyAny>) -> PyResult<Bound<'py, PyAny>> {
        let (x, u) = (to_vector(x)?, to_vector(u)?);
        let d = set_derivative(&ws.inner, &self.inner, &x, &u).map_err(err)?;
        let dirs = vi::audit_directions(&ws.inner, &self.inner, &[]);
        let r = regularity_check(&ws.inner, &self.inner, &x, &u, &dirs).map_err(err)?;
        let mut v = d.to_json();
        v["regularity"] = serde_json::json!({ "strong": r.strong, "weak": r.weak, "exact": r.exact });
        to_py(py, &v)
    }

    fn check_vi<'py>(
        &self,
        py: Python<'py>,
        ws: &Workspace,
        x0: &Bound<'_, PyAny>,
        points: &Bound<'_, PyAny>,
        ineq: &str,
    ) -> PyResult<Bound<'py, PyAny>> {
        let dirs = vi::audit_directions(&ws.inner, &self.inner, &[]);
        let r = vi::check_vi(&ws.inner, &self.inner, &to_vector(x0)?, &space(points)?, &dirs, parse_ineq(ineq)?).map_err(err)?;
        to_py(py, &r.to_json())
    }

    fn minimal<'py>(&self, py: Python<'py>, ws: &Workspace, x0: &Bound<'_, PyAny>, points: &Bound<'_, PyAny>) -> PyResult<Bound<'py, PyAny>> {
        let dirs = vi::audit_directions(&ws.inner, &self.inner, &[]);
        let r = vi::minimal_check(&ws.inner, &self.inner, &to_vector(x0)?, &space(points)?, &dirs).map_err(err)?;
        to_py(py, &r.to_json())
    }

    fn infimum<'py>(&self, py: Python<'py>, ws: &Workspace, x0: &Bound<'_, PyAny>, points: &Bound<'_, PyAny>) -> PyResult<Bound<'py, PyAny>> {
        let dirs = vi::audit_directions(&ws.inner, &self.inner, &[]);
        let r = vi::infimum_at_point_check(&ws.inner, &self.inner, &to_vector(x0)?, &space(points)?, &dirs).map_err(err)?;
        to_py(py, &r.to_json())
    }

    fn audit<'py>(&self, py: Python<'py>, ws: &Workspace, x0: &Bound<'_, PyAny>, points: &Bound<'_, PyAny>) -> PyResult<Bound<'py, PyAny>> {
        let r = vi::implication_audit(&ws.inner, &self.inner, &to_vector(x0)?, &space(points)?, &ws.inner.directions.items, &[])
            .map_err(err)?;
        to_py(py, &r.to_json())
    }

    fn __repr__(&self) -> String {
        format!("SetFunction({}, xdim={})", self.inner.kind(), self.inner.xdim())
    }
}

#[pyclass(name = "VectorFunction", frozen, skip_from_py_object)]
#[derive(Clone)]
struct VectorFunction {
    inner: CoreMap,
}

#[pymethods]
impl VectorFunction {
    /// Componentwise maxima of affine pieces `(coef, c)`.
    #[staticmethod]
    fn pwl(xdim: usize, components: Vec<Vec<(Bound<'_, PyAny>, Bound<'_, PyAny>)>>) -> PyResult<Self> {
        use setvi::setfun::{Affine, ConvexPWL, Domain, VectorFunction as CoreVf};
        let comps = components
            .iter()
            .map(|c| {
                let pieces = c.iter().map(|(a, b)| Ok(Affine::new(to_vector(a)?, to_q(b)?))).collect::<PyResult<Vec<_>>>()?;
                ConvexPWL::new(pieces).map_err(err)
            })
            .collect::<PyResult<Vec<_>>>()?;
        let vf = CoreVf::new(xdim, comps, Domain::default()).map_err(err)?;
        Ok(VectorFunction { inner: CoreMap::Pwl(vf) })
    }

    fn eval<'py>(&self, py: Python<'py>, x: &Bound<'_, PyAny>) -> PyResult<Bound<'py, PyAny>> {
        let v = self.inner.eval(&to_vector(x)?).map(|p| setvi::json::rat_vector(&p)).unwrap_or(Value::Null);
        to_py(py, &v)
    }

    fn dini<'py>(&self, py: Python<'py>, x0: &Bound<'_, PyAny>, u: &Bound<'_, PyAny>) -> PyResult<Bound<'py, PyAny>> {
        let d = vectoropt::vector_dini(&self.inner, &to_vector(x0)?, &to_vector(u)?).map_err(err)?;
        to_py(py, &d.to_json())
    }

    fn efficient<'py>(&self, py: Python<'py>, ws: &Workspace, points: &Bound<'_, PyAny>) -> PyResult<Bound<'py, PyAny>> {
        let r = vectoropt::efficient_set(&ws.inner, &self.inner, &to_vectors(points)?).map_err(err)?;
        to_py(py, &r.to_json())
    }

    fn minty<'py>(&self, py: Python<'py>, ws: &Workspace, x0: &Bound<'_, PyAny>, points: &Bound<'_, PyAny>) -> PyResult<Bound<'py, PyAny>> {
        let r = vectoropt::vector_minty_check(&ws.inner, &self.inner, &to_vector(x0)?, &to_vectors(points)?, &[], &vectoropt::default_t_params())
            .map_err(err)?;
        to_py(py, &r.to_json())
    }

    fn epigraph(&self, ws: &Workspace) -> PyResult<SetFunction> {
        vectoropt::epigraphical(&ws.inner, &self.inner).map(|inner| SetFunction { inner }).map_err(err)
    }
}

/// A named example: `(workspace, function or None, {set name: set})`.
#[pyfunction]
fn builtin(name: &str) -> PyResult<(Workspace, Option<SetFunction>, BTreeMap<String, UpperSet>)> {
    let b = builtins::get(name).ok_or_else(|| err(format!("unknown builtin {name:?}")))?;
    let sets = b.sets.into_iter().map(|(k, s)| (k, wrap(s))).collect();
    Ok((Workspace { inner: b.ws }, b.f.map(|inner| SetFunction { inner }), sets))
}

#[pyfunction]
fn builtin_names() -> Vec<&'static str> {
    builtins::NAMES.to_vec()
}

/// Vector form of a builtin epigraph example (`abs_pair`, `infdir_example`, ...).
#[pyfunction]
fn builtin_vector_function(name: &str) -> PyResult<VectorFunction> {
    if name == "infdir_example" {
        return Ok(VectorFunction { inner: vectoropt::infdir_map() });
    }
    match builtins::get(name).and_then(|b| b.f) {
        Some(CoreFunction::EpiVector(e)) => Ok(VectorFunction { inner: CoreMap::Pwl(e.psi) }),
        _ => Err(err(format!("{name:?} is not a vector function example"))),
    }
}

/// Runs scenario JSON text; returns `(exit_code, report)`.
#[pyfunction]
#[pyo3(signature = (text, jobs=1))]
fn run_scenario<'py>(py: Python<'py>, text: &str, jobs: usize) -> PyResult<(i32, Bound<'py, PyAny>)> {
    let s = cli::Scenario::parse(text, None).map_err(err)?;
    let out = cli::run(&s, jobs.max(1));
    Ok((out.exit_code, to_py(py, &out.report)?))
}

#[pyfunction]
fn infdir_plus_cone(ws: &Workspace, z: &Bound<'_, PyAny>) -> PyResult<UpperSet> {
    Ok(wrap(vectoropt::infdir_plus_cone(&ws.inner, &to_vector(z)?)))
}

#[pymodule]
fn setvi_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Workspace>()?;
    m.add_class::<UpperSet>()?;
    m.add_class::<SetFunction>()?;
    m.add_class::<VectorFunction>()?;
    m.add_function(wrap_pyfunction!(builtin, m)?)?;
    m.add_function(wrap_pyfunction!(builtin_names, m)?)?;
    m.add_function(wrap_pyfunction!(builtin_vector_function, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(infdir_plus_cone, m)?)?;
    Ok(())
}
