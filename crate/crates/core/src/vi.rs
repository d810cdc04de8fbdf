//! Stampacchia and Minty type variational inequalities, optimality oracles over finite candidate
//! spaces, and an audit of the implications between them.

use crate::calculus::{exact_derivative_value, scalar_dini_bundle, set_derivative, CalculusError};
use crate::extres::ExtReal;
use crate::json::{rat, rat_vector};
use crate::lattice::{UpperSet, Workspace};
use crate::rat::{Vector, Q};
use crate::setfun::{cminus_lsc_probe, lattice_lsc_probe, star_parameters, LscProbe, SetFunError, SetFunction};
use serde_json::{json, Value};
use std::cmp::Ordering;
use std::collections::HashMap;
use std::sync::OnceLock;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ViError {
    #[error("base point {0} is outside the domain")]
    BaseOutsideDomain(Vector),
    #[error("candidate space is empty")]
    EmptySpace,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("direction set is empty")]
    NoDirections,
    #[error(transparent)]
    Calculus(#[from] CalculusError),
    #[error(transparent)]
    SetFun(#[from] SetFunError),
}

/// Finite stand-in for the argument space in universally quantified statements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CandidateSpace {
    pub points: Vec<Vector>,
    /// For star spaces: the generating point's index and the segment parameter.
    pub rays: Vec<Option<(usize, Q)>>,
}

impl CandidateSpace {
    /// Drops repeated points, keeping the first occurrence.
    pub fn new(points: Vec<Vector>) -> Result<Self, ViError> {
        let first = points.first().ok_or(ViError::EmptySpace)?;
        let dim = first.dim();
        let mut out: Vec<Vector> = Vec::new();
        for p in points {
            if p.dim() != dim {
                return Err(ViError::DimensionMismatch { expected: dim, got: p.dim() });
            }
            if !out.contains(&p) {
                out.push(p);
            }
        }
        let rays = vec![None; out.len()];
        Ok(CandidateSpace { points: out, rays })
    }

    /// Regular grid on the box `[lo, hi]` with `n ≥ 1` points per axis.
    pub fn grid(lo: &Vector, hi: &Vector, n: usize) -> Result<Self, ViError> {
        if lo.dim() != hi.dim() {
            return Err(ViError::DimensionMismatch { expected: lo.dim(), got: hi.dim() });
        }
        if n == 0 {
            return Err(ViError::EmptySpace);
        }
        let axis = |i: usize| -> Vec<Q> {
            if n == 1 {
                return vec![lo.0[i].clone()];
            }
            (0..n).map(|k| &lo.0[i] + (&hi.0[i] - &lo.0[i]) * Q::new(k.into(), (n - 1).into())).collect()
        };
        let mut pts = vec![Vector::new(vec![])];
        for i in 0..lo.dim() {
            pts = pts.iter().flat_map(|p| axis(i).into_iter().map(move |c| {
                let mut v = p.0.clone();
                v.push(c);
                Vector::new(v)
            })).collect();
        }
        CandidateSpace::new(pts)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    /// `x0` together with sample points on every segment from `x0` to a candidate. For exact
    /// classes the samples cover each structural event and one point between consecutive
    /// events, so statements that are piecewise constant along segments are decided on the
    /// whole star of `x0`.
    pub fn star(&self, ws: &Workspace, f: &SetFunction, x0: &Vector) -> CandidateSpace {
        let mut points = vec![x0.clone()];
        let mut rays = vec![None];
        for (i, p) in self.points.iter().enumerate() {
            if p == x0 {
                continue;
            }
            let u = p.sub(x0);
            for s in star_parameters(ws, f, x0, p) {
                let y = x0.axpy(&s, &u);
                if !points.contains(&y) {
                    points.push(y);
                    rays.push(Some((i, s)));
                }
            }
        }
        CandidateSpace { points, rays }
    }
}

/// The ten inequalities, named by their report ids.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Ineq {
    SetStampStrict,
    ScalarStampStrict,
    SetMintyStrict,
    ScalarMintyStrict,
    SetStamp,
    ScalarStamp,
    ScalarStampAlt,
    SetMinty,
    ScalarMinty,
    ScalarMintyFinite,
}

impl Ineq {
    pub const ALL: [Ineq; 10] = [
        Ineq::SetStampStrict,
        Ineq::ScalarStampStrict,
        Ineq::SetMintyStrict,
        Ineq::ScalarMintyStrict,
        Ineq::SetStamp,
        Ineq::ScalarStamp,
        Ineq::ScalarStampAlt,
        Ineq::SetMinty,
        Ineq::ScalarMinty,
        Ineq::ScalarMintyFinite,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Ineq::SetStampStrict => "SVI_I",
            Ineq::ScalarStampStrict => "svi_I",
            Ineq::SetMintyStrict => "MVI_I",
            Ineq::ScalarMintyStrict => "mvi_I",
            Ineq::SetStamp => "SVI_M",
            Ineq::ScalarStamp => "svi_M",
            Ineq::ScalarStampAlt => "svi_M2",
            Ineq::SetMinty => "MVI_M",
            Ineq::ScalarMinty => "mvi_M",
            Ineq::ScalarMintyFinite => "mvi_M_finite",
        }
    }

    pub fn from_id(s: &str) -> Option<Ineq> {
        Ineq::ALL.into_iter().find(|i| i.id() == s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub x: Vector,
    pub zstar: Option<Vector>,
    pub t: Option<Q>,
}

impl Witness {
    pub fn to_json(&self) -> Value {
        let mut v = json!({ "x": rat_vector(&self.x) });
        if let Some(z) = &self.zstar {
            v["zstar"] = rat_vector(z);
        }
        if let Some(t) = &self.t {
            v["t"] = rat(t);
        }
        v
    }
}

#[derive(Clone, Debug)]
pub struct ViReport {
    pub id: Ineq,
    pub holds: bool,
    pub witnesses: Vec<Witness>,
    pub exact: bool,
    /// Verdict at each point of the space.
    pub per_point: Vec<bool>,
    /// For `SVI_M`: whether the intersection form `f′ ∩ −0⁺f(x0) = ∅` gives the same verdicts.
    pub set_form_agrees: Option<bool>,
}

impl ViReport {
    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "id": self.id.id(),
            "holds": self.holds,
            "exact": self.exact,
            "witnesses": self.witnesses.iter().map(Witness::to_json).collect::<Vec<_>>(),
        });
        if let Some(a) = self.set_form_agrees {
            v["set_form_agrees"] = json!(a);
        }
        v
    }
}

/// Derivative data at a point in one direction, with scalar derivatives for every direction.
struct Deriv {
    set: UpperSet,
    exact: bool,
    dini: Vec<ExtReal>,
    strong: bool,
    weak: bool,
}

struct PointData {
    val: UpperSet,
    phi: Vec<ExtReal>,
    stamp: OnceLock<Deriv>,
    minty: OnceLock<Deriv>,
}

/// Shared evaluations for checking all inequalities at `x0` over one candidate space.
pub struct ViContext<'a> {
    ws: &'a Workspace,
    f: &'a SetFunction,
    pub x0: Vector,
    pub space: CandidateSpace,
    /// `M*`, followed by any extra directions of the finite variant.
    pub dirs: Vec<Vector>,
    main: Vec<usize>,
    finite: Vec<usize>,
    fx0: UpperSet,
    rec0: UpperSet,
    phi0: Vec<ExtReal>,
    tol: Q,
    pts: Vec<PointData>,
    /// `x_j − x0 = λ (x_r − x0)` with `r` the first point in the same direction.
    along: Vec<Option<(usize, Q)>>,
}

fn dedup_primitive(dirs: &[Vector]) -> Vec<Vector> {
    let mut out: Vec<Vector> = Vec::new();
    for d in dirs {
        let p = d.primitive();
        if !out.contains(&p) {
            out.push(p);
        }
    }
    out
}

impl<'a> ViContext<'a> {
    /// `dirs` plays the role of `C^-` in the scalarized forms; `finite_dirs` is the declared
    /// `M*` of the finite Minty variant (defaults to `dirs` when empty).
    pub fn new(
        ws: &'a Workspace,
        f: &'a SetFunction,
        x0: &Vector,
        space: CandidateSpace,
        dirs: &[Vector],
        finite_dirs: &[Vector],
    ) -> Result<Self, ViError> {
        if space.is_empty() {
            return Err(ViError::EmptySpace);
        }
        if space.dim() != f.xdim() || x0.dim() != f.xdim() {
            return Err(ViError::DimensionMismatch { expected: f.xdim(), got: space.dim().max(x0.dim()) });
        }
        if !f.declared_convex() {
            let name = match f {
                SetFunction::Oracle(o) => o.name.clone(),
                other => other.kind().to_string(),
            };
            return Err(CalculusError::NotDeclaredConvex(name).into());
        }
        let main_dirs = dedup_primitive(dirs);
        if main_dirs.is_empty() {
            return Err(ViError::NoDirections);
        }
        let mut all = main_dirs.clone();
        let fin_src = if finite_dirs.is_empty() { main_dirs.clone() } else { dedup_primitive(finite_dirs) };
        let mut finite = Vec::new();
        for d in fin_src {
            let i = all.iter().position(|e| e == &d).unwrap_or_else(|| {
                all.push(d.clone());
                all.len() - 1
            });
            finite.push(i);
        }
        let fx0 = f.eval(ws, x0);
        if fx0.is_empty() {
            return Err(ViError::BaseOutsideDomain(x0.clone()));
        }
        let rec0 = ws.recession(&fx0);
        let phi0 = all.iter().map(|d| ws.neg_support(d, &fx0)).collect();
        let tol = match f {
            SetFunction::Oracle(o) => o.tolerance.clone(),
            _ => Q::from_integer(0.into()),
        };
        let pts = space
            .points
            .iter()
            .map(|p| {
                let val = f.eval(ws, p);
                let phi = all.iter().map(|d| ws.neg_support(d, &val)).collect();
                PointData { val, phi, stamp: OnceLock::new(), minty: OnceLock::new() }
            })
            .collect();
        let mut firsts: HashMap<Vector, (usize, Q)> = HashMap::new();
        let along = space
            .points
            .iter()
            .enumerate()
            .map(|(j, p)| {
                let d = p.sub(x0);
                if d.is_zero() {
                    return None;
                }
                let (prim, k) = d.primitive_factor();
                let (r, kr) = firsts.entry(prim).or_insert((j, k.clone()));
                Some((*r, &*kr / &k))
            })
            .collect();
        Ok(ViContext {
            ws,
            along,
            f,
            x0: x0.clone(),
            space,
            main: (0..main_dirs.len()).collect(),
            finite,
            dirs: all,
            fx0,
            rec0,
            phi0,
            tol,
            pts,
        })
    }

    pub fn is_exact_class(&self) -> bool {
        self.f.is_exact()
    }

    pub fn value(&self, j: usize) -> &UpperSet {
        &self.pts[j].val
    }

    pub fn base_value(&self) -> &UpperSet {
        &self.fx0
    }

    fn deriv(&self, x: &Vector, fx: &UpperSet, u: &Vector) -> Deriv {
        let (value, mut exact) = match exact_derivative_value(self.ws, self.f, x, fx, u) {
            Some(v) => (v, true),
            None => {
                let d = set_derivative(self.ws, self.f, x, u).expect("convexity checked at construction");
                (d.value, d.exact)
            }
        };
        let bundle = scalar_dini_bundle(self.ws, self.f, x, fx, u, &self.dirs);
        let mut strong = true;
        let mut levels = Vec::new();
        let mut dini = Vec::new();
        for &i in &self.main {
            let z = &self.dirs[i];
            let (v, ex) = &bundle[i];
            exact &= ex;
            if self.ws.neg_support(z, &value).cmp_with_tol(v, &self.tol) != Ordering::Equal {
                strong = false;
            }
            levels.push(self.ws.level_set(z, v));
        }
        let inter = self.ws.sup_family(&levels);
        let weak = if exact {
            inter == value
        } else {
            let probe = self.ws.directions.items.iter().chain(&self.dirs);
            probe.clone().all(|z| self.ws.support(z, &inter).cmp_with_tol(&self.ws.support(z, &value), &self.tol) == Ordering::Equal)
        };
        dini.extend(bundle.into_iter().map(|b| b.0));
        Deriv { set: value, exact, dini, strong, weak }
    }

    /// `f′(x0, x_j − x0)` and the scalar derivatives in the same direction.
    fn stamp(&self, j: usize) -> &Deriv {
        self.pts[j].stamp.get_or_init(|| match &self.along[j] {
            Some((r, lam)) if *r != j => {
                let d = self.stamp(*r);
                Deriv {
                    set: self.ws.scale(lam, &d.set).expect("positive factor"),
                    exact: d.exact,
                    dini: d.dini.iter().map(|v| v.scale_pos(lam)).collect(),
                    strong: d.strong,
                    weak: d.weak,
                }
            }
            _ => self.deriv(&self.x0, &self.fx0, &self.space.points[j].sub(&self.x0)),
        })
    }

    /// `f′(x_j, x0 − x_j)` and the scalar derivatives in the same direction.
    fn minty(&self, j: usize) -> &Deriv {
        let x = &self.space.points[j];
        self.pts[j].minty.get_or_init(|| self.deriv(x, &self.pts[j].val, &self.x0.sub(x)))
    }

    fn sign(&self, v: &ExtReal) -> Ordering {
        v.cmp_with_tol(&ExtReal::int(0), &self.tol)
    }

    /// `f(x_j) ≠ f(x0)`.
    fn differs(&self, j: usize) -> bool {
        self.pts[j].val != self.fx0
    }

    /// Guard of the Stampacchia forms for minimality: `f(x0) ≠ Z`, `x_j ∈ dom f`, `f(x_j) ≠ f(x0)`.
    fn stamp_guard(&self, j: usize) -> bool {
        !self.fx0.is_all() && !self.pts[j].val.is_empty() && self.differs(j)
    }

    /// Verdict at point `j` with the failing directions (empty `Vec` plus `false` means a
    /// failure not tied to a direction).
    fn verdict(&self, id: Ineq, j: usize) -> (bool, Vec<usize>) {
        let idx = |fin: bool| if fin { &self.finite } else { &self.main };
        match id {
            Ineq::ScalarStampStrict => {
                let d = self.stamp(j);
                let bad: Vec<usize> = self
                    .main
                    .iter()
                    .copied()
                    .filter(|&i| self.phi0[i] != ExtReal::MinusInf && self.sign(&d.dini[i]) == Ordering::Less)
                    .collect();
                (bad.is_empty(), bad)
            }
            Ineq::SetStampStrict => (self.ws.leq(&self.rec0, &self.stamp(j).set), vec![]),
            Ineq::ScalarMintyStrict => {
                let d = self.minty(j);
                let bad: Vec<usize> =
                    self.main.iter().copied().filter(|&i| self.sign(&d.dini[i]) == Ordering::Greater).collect();
                (bad.is_empty(), bad)
            }
            Ineq::SetMintyStrict => (self.ws.contains(&self.minty(j).set, &Vector::zeros(self.ws.dim)), vec![]),
            Ineq::ScalarStamp | Ineq::ScalarStampAlt => {
                if !self.stamp_guard(j) {
                    return (true, vec![]);
                }
                let d = self.stamp(j);
                let alt = id == Ineq::ScalarStampAlt;
                let ok = self.main.iter().any(|&i| {
                    (alt && self.phi0[i] == ExtReal::MinusInf && self.pts[j].phi[i] != ExtReal::MinusInf)
                        || self.sign(&d.dini[i]) == Ordering::Greater
                });
                (ok, vec![])
            }
            Ineq::SetStamp => {
                if !self.stamp_guard(j) {
                    return (true, vec![]);
                }
                (!self.ws.contains(&self.stamp(j).set, &Vector::zeros(self.ws.dim)), vec![])
            }
            Ineq::ScalarMinty | Ineq::ScalarMintyFinite => {
                if !self.differs(j) {
                    return (true, vec![]);
                }
                let d = self.minty(j);
                let ok = idx(id == Ineq::ScalarMintyFinite)
                    .iter()
                    .any(|&i| self.pts[j].phi[i] != ExtReal::MinusInf && self.sign(&d.dini[i]) == Ordering::Less);
                (ok, vec![])
            }
            Ineq::SetMinty => {
                if !self.differs(j) {
                    return (true, vec![]);
                }
                let rec = self.ws.recession(&self.pts[j].val);
                (!self.ws.leq(&rec, &self.minty(j).set), vec![])
            }
        }
    }

    fn uses_minty(id: Ineq) -> bool {
        matches!(
            id,
            Ineq::SetMintyStrict | Ineq::ScalarMintyStrict | Ineq::SetMinty | Ineq::ScalarMinty | Ineq::ScalarMintyFinite
        )
    }

    pub fn check(&self, id: Ineq) -> ViReport {
        let mut per_point = Vec::with_capacity(self.pts.len());
        let mut witnesses = Vec::new();
        let mut exact = self.f.is_exact();
        for j in 0..self.pts.len() {
            let (ok, bad) = self.verdict(id, j);
            let d = if Self::uses_minty(id) { self.pts[j].minty.get() } else { self.pts[j].stamp.get() };
            if let Some(d) = d {
                exact &= d.exact;
            }
            per_point.push(ok);
            if !ok {
                let x = self.space.points[j].clone();
                if bad.is_empty() {
                    witnesses.push(Witness { x, zstar: None, t: None });
                } else {
                    for i in bad {
                        witnesses.push(Witness { x: x.clone(), zstar: Some(self.dirs[i].clone()), t: None });
                    }
                }
            }
        }
        let set_form_agrees = (id == Ineq::SetStamp).then(|| {
            (0..self.pts.len()).all(|j| {
                let form = !self.stamp_guard(j) || !self.ws.meets_negative_cone(&self.stamp(j).set, &self.rec0);
                form == per_point[j]
            })
        });
        ViReport { id, holds: witnesses.is_empty(), witnesses, exact, per_point, set_form_agrees }
    }

    /// `(SR at (x0, x_j − x0), WR at (x0, x_j − x0))`.
    pub fn stamp_regularity(&self, j: usize) -> (bool, bool) {
        let d = self.stamp(j);
        (d.strong, d.weak)
    }

    /// `(SR at (x_j, x0 − x_j), WR at (x_j, x0 − x_j))`.
    pub fn minty_regularity(&self, j: usize) -> (bool, bool) {
        let d = self.minty(j);
        (d.strong, d.weak)
    }

    /// Whether the regularity verdicts at point `j` come from exact derivatives.
    fn regularity_exact(&self, j: usize) -> bool {
        self.stamp(j).exact && self.minty(j).exact
    }

    /// Conditions (a)–(f) for `f(x0) = inf f[space]`.
    pub fn infimum_check(&self) -> InfimumReport {
        let ws = self.ws;
        let mut vals: Vec<UpperSet> = self.pts.iter().map(|p| p.val.clone()).collect();
        vals.push(self.fx0.clone());
        let infimum = ws.inf_family(&vals);
        let a = infimum == self.fx0;
        let (mut b, mut c, mut d, mut e, mut fcond) = (true, true, true, true, true);
        let mut witnesses = Vec::new();
        let zero = Vector::zeros(ws.dim);
        for (j, p) in self.pts.iter().enumerate() {
            for &i in &self.main {
                let (p0, pj) = (&self.phi0[i], &p.phi[i]);
                b &= p0 <= pj;
                c &= p0.residual(pj) <= ExtReal::int(0);
                e &= *p0 == ExtReal::MinusInf || ExtReal::int(0) <= pj.residual(p0);
            }
            let dj = ws.contains(&ws.residual_diff(&self.fx0, &p.val), &zero);
            if !dj {
                witnesses.push(self.space.points[j].clone());
            }
            d &= dj;
            fcond &= ws.leq(&self.rec0, &ws.residual_diff(&p.val, &self.fx0));
        }
        let conditions = vec![('a', a), ('b', b), ('c', c), ('d', d), ('e', e), ('f', fcond)];
        let consistent = [b, c, d, e].iter().all(|&v| v == a) && (!e || fcond);
        InfimumReport { holds: a, conditions, infimum, consistent, witnesses, exact: self.f.is_exact() }
    }

    /// `f(x_j) ⊇ f(x0)` with `f(x_j) ≠ f(x0)`, i.e. `x_j` strictly improves on `x0`.
    fn dominates(&self, j: usize) -> bool {
        self.ws.leq(&self.pts[j].val, &self.fx0) && self.differs(j)
    }

    /// Conditions (a)–(e) for `f(x0) ∈ Min f[space]`.
    pub fn minimal_check(&self) -> MinimalReport {
        let ws = self.ws;
        let zero = Vector::zeros(ws.dim);
        let (mut b, mut c, mut d, mut e) = (true, true, true, true);
        let mut witnesses = Vec::new();
        for (j, p) in self.pts.iter().enumerate() {
            if self.dominates(j) {
                witnesses.push(self.space.points[j].clone());
            }
            if !self.differs(j) {
                continue;
            }
            let dirs = || self.main.iter().map(|&i| (&self.phi0[i], &p.phi[i]));
            b &= dirs().any(|(p0, pj)| p0 < pj);
            c &= dirs().any(|(p0, pj)| *pj != ExtReal::MinusInf && p0.residual(pj) < ExtReal::int(0));
            d &= dirs().any(|(p0, pj)| ExtReal::int(0) < pj.residual(p0));
            e &= !ws.contains(&ws.residual_diff(&p.val, &self.fx0), &zero);
        }
        let a = witnesses.is_empty();
        let conditions = vec![('a', a), ('b', b), ('c', c), ('d', d), ('e', e)];
        let consistent = [b, c, d, e].iter().all(|&v| v == a);
        MinimalReport { holds: a, conditions, consistent, witnesses, exact: self.f.is_exact() }
    }

    /// Pointwise minimality: no `x_j` strictly improves on `x0`.
    pub fn minimal_at(&self, j: usize) -> bool {
        !self.dominates(j)
    }
}

#[derive(Clone, Debug)]
pub struct InfimumReport {
    pub holds: bool,
    pub conditions: Vec<(char, bool)>,
    pub infimum: UpperSet,
    /// (a)–(e) agree and (e) implies (f).
    pub consistent: bool,
    /// Points where `0 ∉ f(x0) ÷ f(x)`.
    pub witnesses: Vec<Vector>,
    pub exact: bool,
}

impl InfimumReport {
    pub fn to_json(&self) -> Value {
        json!({
            "holds": self.holds,
            "conditions": conditions_json(&self.conditions),
            "infimum": self.infimum.to_json(),
            "consistent": self.consistent,
            "exact": self.exact,
            "witnesses": self.witnesses.iter().map(rat_vector).collect::<Vec<_>>(),
        })
    }
}

#[derive(Clone, Debug)]
pub struct MinimalReport {
    pub holds: bool,
    pub conditions: Vec<(char, bool)>,
    pub consistent: bool,
    /// Points whose value strictly contains `f(x0)`.
    pub witnesses: Vec<Vector>,
    pub exact: bool,
}

impl MinimalReport {
    pub fn to_json(&self) -> Value {
        json!({
            "holds": self.holds,
            "conditions": conditions_json(&self.conditions),
            "consistent": self.consistent,
            "exact": self.exact,
            "witnesses": self.witnesses.iter().map(rat_vector).collect::<Vec<_>>(),
        })
    }
}

fn conditions_json(c: &[(char, bool)]) -> Value {
    let mut m = serde_json::Map::new();
    for (k, v) in c {
        m.insert(k.to_string(), json!(v));
    }
    Value::Object(m)
}

/// Checks one inequality at `x0` over `space`.
pub fn check_vi(
    ws: &Workspace,
    f: &SetFunction,
    x0: &Vector,
    space: &CandidateSpace,
    dirs: &[Vector],
    id: Ineq,
) -> Result<ViReport, ViError> {
    Ok(ViContext::new(ws, f, x0, space.clone(), dirs, &[])?.check(id))
}

pub fn infimum_at_point_check(
    ws: &Workspace,
    f: &SetFunction,
    x0: &Vector,
    space: &CandidateSpace,
    dirs: &[Vector],
) -> Result<InfimumReport, ViError> {
    Ok(ViContext::new(ws, f, x0, space.clone(), dirs, &[])?.infimum_check())
}

pub fn minimal_check(
    ws: &Workspace,
    f: &SetFunction,
    x0: &Vector,
    space: &CandidateSpace,
    dirs: &[Vector],
) -> Result<MinimalReport, ViError> {
    Ok(ViContext::new(ws, f, x0, space.clone(), dirs, &[])?.minimal_check())
}

/// Points of `candidates` in the domain whose values are minimal in `f[space ∪ candidates]`.
pub fn minimal_set(
    ws: &Workspace,
    f: &SetFunction,
    candidates: &CandidateSpace,
    space: &CandidateSpace,
) -> Vec<Vector> {
    let mut all = space.points.clone();
    all.extend(candidates.points.iter().cloned());
    let vals: Vec<UpperSet> = all.iter().map(|p| f.eval(ws, p)).collect();
    candidates
        .points
        .iter()
        .filter(|c| {
            let v = f.eval(ws, c);
            !v.is_empty() && !vals.iter().any(|w| ws.leq(w, &v) && *w != v)
        })
        .cloned()
        .collect()
}

#[derive(Clone, Debug)]
pub struct InfimizerReport {
    /// `inf f[M] = inf f[space ∪ M]`.
    pub infimizer: bool,
    pub inf_m: UpperSet,
    pub inf_space: UpperSet,
    /// `f̂(0; co M)`, exact for polyhedral classes.
    pub hull_value: UpperSet,
    pub hull_exact: bool,
    /// `f̂(0; M) = f̂(0; co M)`.
    pub hull_equal: bool,
    /// `{0}` is an infimizer of `f̂(·; co M)` relative to the space.
    pub zero_infimizer_of_hull: bool,
    /// `svi_I` for `f̂(·; co M)` at 0 over the translated space.
    pub svi_translated: bool,
}

impl InfimizerReport {
    pub fn to_json(&self) -> Value {
        json!({
            "infimizer": self.infimizer,
            "inf_m": self.inf_m.to_json(),
            "inf_space": self.inf_space.to_json(),
            "hull_value": self.hull_value.to_json(),
            "hull_exact": self.hull_exact,
            "conditions": {
                "a": self.infimizer,
                "b": self.infimizer,
                "c": self.zero_infimizer_of_hull && self.hull_equal,
            },
            "hull_equal": self.hull_equal,
            "svi_translated": self.svi_translated,
        })
    }
}

/// Infimizer verdict for a finite `M`, with `∀x ∈ X` relativized to `space ∪ M`.
pub fn infimizer_check(
    ws: &Workspace,
    f: &SetFunction,
    m: &[Vector],
    space: &CandidateSpace,
    dirs: &[Vector],
) -> Result<InfimizerReport, ViError> {
    let inf_m = f.inf_translation_finite(ws, m, &Vector::zeros(f.xdim()))?;
    let mut vals: Vec<UpperSet> = space.points.iter().map(|p| f.eval(ws, p)).collect();
    vals.push(inf_m.clone());
    let inf_space = ws.inf_family(&vals);
    let (g, hull_exact) = f.inf_translation_hull(ws, m)?;
    let origin = Vector::zeros(f.xdim());
    let hull_value = g.eval(ws, &origin);
    let hull_equal = hull_value == inf_m;
    let zero_infimizer_of_hull = ws.inf(&inf_space, &hull_value) == hull_value;
    let mut shifted = Vec::new();
    for p in &space.points {
        for mi in m {
            shifted.push(p.sub(mi));
        }
    }
    let shifted = CandidateSpace::new(shifted)?;
    let svi_translated = if hull_value.is_empty() {
        false
    } else {
        let star = shifted.star(ws, &g, &origin);
        ViContext::new(ws, &g, &origin, star, dirs, &[])?.check(Ineq::ScalarStampStrict).holds
    };
    Ok(InfimizerReport {
        infimizer: inf_m == inf_space,
        inf_m,
        inf_space,
        hull_value,
        hull_exact,
        hull_equal,
        zero_infimizer_of_hull,
        svi_translated,
    })
}

#[derive(Clone, Debug)]
pub struct SolutionReport {
    pub holds: bool,
    pub infimizer: InfimizerReport,
    /// Points of `M` that are not minimal in `f[space ∪ M]`.
    pub non_minimal: Vec<Vector>,
}

impl SolutionReport {
    pub fn to_json(&self) -> Value {
        json!({
            "holds": self.holds,
            "infimizer": self.infimizer.to_json(),
            "non_minimal": self.non_minimal.iter().map(rat_vector).collect::<Vec<_>>(),
        })
    }
}

/// An infimizer consisting of minimizers, relative to `space ∪ M`.
pub fn solution_check(
    ws: &Workspace,
    f: &SetFunction,
    m: &[Vector],
    space: &CandidateSpace,
    dirs: &[Vector],
) -> Result<SolutionReport, ViError> {
    let infimizer = infimizer_check(ws, f, m, space, dirs)?;
    let cands = CandidateSpace::new(m.to_vec())?;
    let minimal = minimal_set(ws, f, &cands, space);
    let non_minimal: Vec<Vector> = cands.points.iter().filter(|p| !minimal.contains(p)).cloned().collect();
    Ok(SolutionReport { holds: infimizer.infimizer && non_minimal.is_empty(), infimizer, non_minimal })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AuditStatus {
    Holds,
    Violated,
    /// Failed on approximate data, where the premises are not certified.
    Inconclusive,
}

impl AuditStatus {
    pub fn name(self) -> &'static str {
        match self {
            AuditStatus::Holds => "holds",
            AuditStatus::Violated => "violated",
            AuditStatus::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug)]
pub struct AuditRow {
    pub name: &'static str,
    /// Points (or 1 for aggregate rows) where the premise held.
    pub premises: usize,
    pub failures: Vec<Vector>,
    pub status: AuditStatus,
}

#[derive(Clone, Debug)]
pub struct AuditReport {
    pub rows: Vec<AuditRow>,
    pub verdicts: Vec<(String, bool)>,
    pub exact: bool,
    /// Size of the refined quantifier space.
    pub domain_size: usize,
    pub strong_regular: usize,
    pub weak_regular: usize,
}

impl AuditReport {
    pub fn violations(&self) -> Vec<&AuditRow> {
        self.rows.iter().filter(|r| r.status == AuditStatus::Violated).collect()
    }

    pub fn to_json(&self) -> Value {
        let mut verdicts = serde_json::Map::new();
        for (k, v) in &self.verdicts {
            verdicts.insert(k.clone(), json!(v));
        }
        json!({
            "exact": self.exact,
            "domain_size": self.domain_size,
            "verdicts": verdicts,
            "regularity": { "strong": self.strong_regular, "weak": self.weak_regular },
            "implications": self.rows.iter().map(|r| json!({
                "name": r.name,
                "premises": r.premises,
                "status": r.status.name(),
                "failures": r.failures.iter().map(rat_vector).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })
    }
}

/// Directions for the audit: `dirs`, the cone's facet normals and the row normals of polyhedral
/// classes, so that every facet of every value and derivative is scalarized.
pub fn audit_directions(ws: &Workspace, f: &SetFunction, dirs: &[Vector]) -> Vec<Vector> {
    let mut all: Vec<Vector> = dirs.to_vec();
    all.extend(ws.cone.facet_normals.iter().cloned());
    if let Some(p) = f.as_parampoly() {
        all.extend(p.normals.iter().cloned());
    }
    dedup_primitive(&all)
}

/// Runs every checker at `x0` on the star of `space` and tests the implications between the
/// inequalities, infimum attainment and minimality.
pub fn implication_audit(
    ws: &Workspace,
    f: &SetFunction,
    x0: &Vector,
    space: &CandidateSpace,
    dirs: &[Vector],
    finite_dirs: &[Vector],
) -> Result<AuditReport, ViError> {
    if !f.in_domain(ws, x0) {
        return Err(ViError::BaseOutsideDomain(x0.clone()));
    }
    let dirs = audit_directions(ws, f, dirs);
    let star = space.star(ws, f, x0);
    let ctx = ViContext::new(ws, f, x0, star, &dirs, finite_dirs)?;
    let n = ctx.space.len();
    let reports: Vec<ViReport> = Ineq::ALL.iter().map(|&id| ctx.check(id)).collect();
    let rep = |id: Ineq| reports.iter().find(|r| r.id == id).unwrap();
    let pp = |id: Ineq, j: usize| rep(id).per_point[j];
    let exact = f.is_exact() && reports.iter().all(|r| r.exact) && (0..n).all(|j| ctx.regularity_exact(j));
    let infimum = ctx.infimum_check();
    let minimal = ctx.minimal_check();
    let minimal_at: Vec<bool> = (0..n).map(|j| ctx.minimal_at(j)).collect();

    // l.s.c. along the segments to the original candidates
    let probe = LscProbe::default();
    let mut lattice_lsc = true;
    let mut cminus_lsc = true;
    let mut finite_lsc = true;
    let finite: Vec<Vector> = ctx.finite.iter().map(|&i| ctx.dirs[i].clone()).collect();
    if !f.is_exact() {
        for p in space.points.iter().filter(|p| *p != x0) {
            lattice_lsc &= lattice_lsc_probe(ws, f, x0, p, &probe).holds;
            cminus_lsc &= cminus_lsc_probe(ws, f, x0, p, &dirs, &probe).0.is_empty();
            finite_lsc &= cminus_lsc_probe(ws, f, x0, p, &finite, &probe).0.is_empty();
        }
    }

    let mut rows = Vec::new();
    let soft = |unconditional: bool| if exact || unconditional { AuditStatus::Violated } else { AuditStatus::Inconclusive };
    let pointwise = |name: &'static str, unconditional: bool, premise: &dyn Fn(usize) -> bool, concl: &dyn Fn(usize) -> bool| {
        let mut premises = 0;
        let mut failures = Vec::new();
        for j in 0..n {
            if premise(j) {
                premises += 1;
                if !concl(j) {
                    failures.push(ctx.space.points[j].clone());
                }
            }
        }
        let status = if failures.is_empty() { AuditStatus::Holds } else { soft(unconditional) };
        AuditRow { name, premises, failures, status }
    };
    use Ineq::*;
    rows.push(pointwise("svi_I => SVI_I", true, &|j| pp(ScalarStampStrict, j), &|j| pp(SetStampStrict, j)));
    rows.push(pointwise("SVI_I + SR => svi_I", false, &|j| pp(SetStampStrict, j) && ctx.stamp_regularity(j).0, &|j| {
        pp(ScalarStampStrict, j)
    }));
    rows.push(pointwise("MVI_I => mvi_I", true, &|j| pp(SetMintyStrict, j), &|j| pp(ScalarMintyStrict, j)));
    rows.push(pointwise("mvi_I + WR => MVI_I", false, &|j| pp(ScalarMintyStrict, j) && ctx.minty_regularity(j).1, &|j| {
        pp(SetMintyStrict, j)
    }));
    rows.push(pointwise("svi_M => SVI_M", true, &|j| pp(ScalarStamp, j), &|j| pp(SetStamp, j)));
    rows.push(pointwise("SVI_M + WR => svi_M", false, &|j| pp(SetStamp, j) && ctx.stamp_regularity(j).1, &|j| pp(ScalarStamp, j)));
    rows.push(pointwise("MVI_M => mvi_M", true, &|j| pp(SetMinty, j), &|j| pp(ScalarMinty, j)));
    rows.push(pointwise("mvi_M + SR => MVI_M", false, &|j| pp(ScalarMinty, j) && ctx.minty_regularity(j).0, &|j| pp(SetMinty, j)));
    rows.push(pointwise("svi_M => svi_M2", false, &|j| pp(ScalarStamp, j), &|j| pp(ScalarStampAlt, j)));
    rows.push(pointwise("SVI_M => minimal", false, &|j| pp(SetStamp, j), &|j| minimal_at[j]));
    rows.push(pointwise("svi_M2 => minimal", false, &|j| pp(ScalarStampAlt, j), &|j| minimal_at[j]));
    rows.push(pointwise("mvi_M_finite => mvi_M", false, &|j| pp(ScalarMintyFinite, j), &|j| pp(ScalarMinty, j)));
    rows.push(pointwise("SR => WR", false, &|j| ctx.stamp_regularity(j).0, &|j| ctx.stamp_regularity(j).1));
    // the scalar Minty inequality at x_j against the segment back to x0
    let mut groups: HashMap<usize, Vec<(Q, usize)>> = HashMap::new();
    for (j, a) in ctx.along.iter().enumerate() {
        if let Some((r, lam)) = a {
            groups.entry(*r).or_default().push((lam.clone(), j));
        }
    }
    let ray_char = |j: usize| -> bool {
        if !ctx.differs(j) || ctx.value(j).is_empty() {
            return true;
        }
        let Some((r, lam)) = &ctx.along[j] else {
            return true;
        };
        let below = groups[r].iter().filter(|(l, _)| l < lam).map(|(_, k)| *k);
        below.chain([0]).any(|k| !ctx.ws.leq(ctx.value(j), ctx.value(k)))
    };
    rows.push(pointwise("mvi_M <=> segment infimum", false, &|j| ctx.along[j].is_some(), &|j| pp(ScalarMinty, j) == ray_char(j)));
    if !f.is_exact() {
        // the sampled stars only bound the segment infimum
        let r = rows.last_mut().unwrap();
        if r.status == AuditStatus::Violated {
            r.status = AuditStatus::Inconclusive;
        }
    }
    rows.push(pointwise("minimal => mvi_M", false, &|j| minimal_at[j], &|j| pp(ScalarMinty, j)));
    rows.push(pointwise("SVI_M agrees with its intersection form", false, &|_| true, &|_| rep(SetStamp).set_form_agrees == Some(true)));

    let mut aggregate = |name: &'static str, premise: bool, concl: bool| {
        let failed = premise && !concl;
        let status = if failed { soft(false) } else { AuditStatus::Holds };
        let failures = if failed { vec![x0.clone()] } else { vec![] };
        rows.push(AuditRow { name, premises: premise as usize, failures, status });
    };
    let all_holds = |id: Ineq| rep(id).holds;
    aggregate("svi_I => infimum", all_holds(ScalarStampStrict), infimum.holds);
    aggregate("infimum => svi_I", infimum.holds, all_holds(ScalarStampStrict));
    aggregate("infimum => MVI_I", infimum.holds, all_holds(SetMintyStrict));
    aggregate("MVI_I + lattice lsc => infimum", all_holds(SetMintyStrict) && lattice_lsc, infimum.holds);
    aggregate("mvi_I + C- lsc => infimum", all_holds(ScalarMintyStrict) && cminus_lsc, infimum.holds);
    aggregate("mvi_M_finite + M* lsc => minimal", all_holds(ScalarMintyFinite) && finite_lsc, minimal.holds);
    aggregate("infimum conditions agree", true, infimum.consistent);
    aggregate("minimal conditions agree", true, minimal.consistent);

    let mut verdicts: Vec<(String, bool)> = reports.iter().map(|r| (r.id.id().to_string(), r.holds)).collect();
    verdicts.push(("infimum".into(), infimum.holds));
    verdicts.push(("minimal".into(), minimal.holds));
    verdicts.push(("lattice_lsc".into(), lattice_lsc));
    verdicts.push(("cminus_lsc".into(), cminus_lsc));
    let strong_regular = (0..n).filter(|&j| ctx.stamp_regularity(j).0).count();
    let weak_regular = (0..n).filter(|&j| ctx.stamp_regularity(j).1).count();
    Ok(AuditReport { rows, verdicts, exact, domain_size: n, strong_regular, weak_regular })
}
