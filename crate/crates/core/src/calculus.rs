//! Difference quotients, directional derivatives and regularity checks.

use crate::extres::ExtReal;
use crate::json::{ext_value, rat};
use crate::lattice::{UpperSet, Workspace};
use crate::rat::{q, simplest_between, Vector, Q};
use crate::setfun::{first_segment_event, Affine, Domain, EpiVector, ParamPoly, SetFunction};
use num::{Signed, Zero};
use serde_json::{json, Value};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CalculusError {
    #[error("function {0} is not declared convex")]
    NotDeclaredConvex(String),
    #[error("difference quotient needs t > 0")]
    NonPositiveStep,
}

/// Geometric step schedule `t0 ρ^k` used for oracle functions.
#[derive(Clone, Debug)]
pub struct TGrid {
    pub t0: Q,
    pub ratio: Q,
    pub steps: usize,
}

impl Default for TGrid {
    fn default() -> Self {
        TGrid { t0: q(1), ratio: q(1) / q(2), steps: 20 }
    }
}

impl TGrid {
    pub fn points(&self) -> Vec<Q> {
        let mut out = Vec::with_capacity(self.steps + 1);
        let mut t = self.t0.clone();
        for _ in 0..=self.steps {
            out.push(t.clone());
            t = &t * &self.ratio;
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct DerivativeResult {
    pub value: UpperSet,
    pub exact: bool,
    /// Quotients are constant on `(0, t_star]`; `+inf` when they never change. Absent for
    /// sampled results and for exact limits that no single quotient attains.
    pub t_star: Option<ExtReal>,
    pub samples: Vec<(Q, UpperSet)>,
    /// Largest support gap between the two finest sampled quotients; `None` if one side is infinite.
    pub cauchy_gap: Option<Q>,
}

impl DerivativeResult {
    fn exact(value: UpperSet, t_star: Option<ExtReal>, samples: Vec<(Q, UpperSet)>) -> Self {
        DerivativeResult { value, exact: true, t_star, samples, cauchy_gap: Some(Q::zero()) }
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "value": self.value.to_json(),
            "exact": self.exact,
            "samples": self.samples.iter().map(|(t, s)| json!({"t": rat(t), "value": s.to_json()})).collect::<Vec<_>>(),
        });
        if let Some(t) = &self.t_star {
            v["t_star"] = ext_value(t);
        }
        if !self.exact {
            v["cauchy_gap"] = self.cauchy_gap.as_ref().map(rat).unwrap_or(Value::Null);
        }
        v
    }
}

/// `(1/t)(f(x + t u) ÷ f(x))`.
pub fn diff_quotient(ws: &Workspace, f: &SetFunction, x: &Vector, u: &Vector, t: &Q) -> Result<UpperSet, CalculusError> {
    if !t.is_positive() {
        return Err(CalculusError::NonPositiveStep);
    }
    let r = ws.residual_diff(&f.eval(ws, &x.axpy(t, u)), &f.eval(ws, x));
    Ok(ws.scale(&(q(1) / t), &r).expect("positive factor"))
}

/// Smallest positive `t` where `x + t u` leaves the domain (`None`: never).
fn domain_exit(dom: &Domain, x: &Vector, u: &Vector) -> Option<Q> {
    dom.halfspaces
        .iter()
        .filter_map(|(a, b)| {
            let s = a.dot(u);
            s.is_positive().then(|| (b - a.dot(x)) / s)
        })
        .min()
}

/// Right slope of `t ↦ min_k p_k(x + t u)` at 0 and the first positive breakpoint.
fn concave_along(pieces: &[Affine], x: &Vector, u: &Vector) -> (Q, Q, Option<Q>) {
    let vals: Vec<(Q, Q)> = pieces.iter().map(|p| p.along(x, u)).collect();
    let v = vals.iter().map(|(a, _)| a.clone()).min().unwrap();
    let s = vals.iter().filter(|(a, _)| *a == v).map(|(_, s)| s.clone()).min().unwrap();
    let bp = vals.iter().filter(|(a, sk)| *a > v && *sk < s).map(|(a, sk)| (a - &v) / (&s - sk)).min();
    (v, s, bp)
}

fn min_opt(a: Option<Q>, b: Option<Q>) -> Option<Q> {
    match (a, b) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, None) => a,
        (None, b) => b,
    }
}

fn threshold(t: Option<Q>) -> ExtReal {
    t.map(ExtReal::Finite).unwrap_or(ExtReal::PlusInf)
}

/// `f′(x,u)` alone for the exact classes, skipping threshold and sample diagnostics. `None`
/// for oracles.
pub fn exact_derivative_value(ws: &Workspace, f: &SetFunction, x: &Vector, fx: &UpperSet, u: &Vector) -> Option<UpperSet> {
    if fx.is_empty() {
        return Some(ws.all());
    }
    match f {
        SetFunction::ParamPoly(p) => {
            if domain_exit(&p.domain, x, u).is_some_and(|t| t.is_zero()) {
                return Some(UpperSet::Empty);
            }
            let mut tight = Vec::new();
            for (n, off) in p.normals.iter().zip(&p.offsets) {
                let (b, s, _) = concave_along(&off.pieces, x, u);
                match ws.support(n, fx) {
                    ExtReal::Finite(sig) if sig == b => tight.push((n.clone(), s)),
                    ExtReal::Finite(_) => {}
                    _ => return Some(UpperSet::Empty),
                }
            }
            Some(ws.canonicalize(&tight).expect("normals validated at construction"))
        }
        SetFunction::EpiVector(e) => {
            if domain_exit(&e.psi.domain, x, u).is_some_and(|t| t.is_zero()) {
                return Some(UpperSet::Empty);
            }
            let d = e.psi.components.iter().map(|comp| {
                let neg: Vec<Affine> = comp.pieces.iter().map(|p| Affine::new(p.coef.neg(), -p.c.clone())).collect();
                -concave_along(&neg, x, u).1
            });
            Some(ws.translated_cone(&Vector::new(d.collect())))
        }
        SetFunction::Oracle(_) => None,
    }
}

fn exact_parampoly(ws: &Workspace, p: &ParamPoly, x: &Vector, u: &Vector, fx: &UpperSet) -> DerivativeResult {
    let mut t_star = domain_exit(&p.domain, x, u);
    if t_star.as_ref().is_some_and(|t| t.is_zero()) {
        return DerivativeResult::exact(UpperSet::Empty, Some(ExtReal::PlusInf), vec![]);
    }
    // each row of the quotient reads ⟨N_i, z⟩ ≤ s_i + g_i / t for small t
    let mut rows = Vec::new();
    for (n, off) in p.normals.iter().zip(&p.offsets) {
        let (b, s, bp) = concave_along(&off.pieces, x, u);
        t_star = min_opt(t_star, bp);
        let sigma = ws.support(n, fx);
        match sigma {
            ExtReal::Finite(sig) => rows.push((n.clone(), s, b - sig)),
            _ => return DerivativeResult::exact(UpperSet::Empty, Some(threshold(t_star)), vec![]),
        }
    }
    let tight: Vec<(Vector, Q)> = rows.iter().filter(|r| r.2.is_zero()).map(|(n, s, _)| (n.clone(), s.clone())).collect();
    let value = ws.canonicalize(&tight).expect("normals validated at construction");
    let mut attained = true;
    for (n, s, g) in rows.iter().filter(|r| !r.2.is_zero()) {
        match ws.support(n, &value) {
            ExtReal::MinusInf => {}
            ExtReal::PlusInf => attained = false,
            ExtReal::Finite(sig) => {
                if &sig > s {
                    t_star = min_opt(t_star, Some(g / (sig - s)));
                }
            }
        }
    }
    if !attained {
        return DerivativeResult::exact(value, None, vec![]);
    }
    let t_eval = t_star.as_ref().map(|t| t / q(2)).unwrap_or_else(|| q(1));
    let sample = ws.residual_diff(&p.eval(ws, &x.axpy(&t_eval, u)), fx);
    let sample = ws.scale(&(q(1) / &t_eval), &sample).unwrap();
    DerivativeResult::exact(value, Some(threshold(t_star)), vec![(t_eval, sample)])
}

fn exact_epivector(ws: &Workspace, e: &EpiVector, x: &Vector, u: &Vector) -> DerivativeResult {
    let mut t_star = domain_exit(&e.psi.domain, x, u);
    if t_star.as_ref().is_some_and(|t| t.is_zero()) {
        return DerivativeResult::exact(UpperSet::Empty, Some(ExtReal::PlusInf), vec![]);
    }
    let mut d = Vec::new();
    for comp in &e.psi.components {
        // max of affine pieces = −min of the negated pieces
        let neg: Vec<Affine> = comp.pieces.iter().map(|p| Affine::new(p.coef.neg(), -p.c.clone())).collect();
        let (_, s, bp) = concave_along(&neg, x, u);
        t_star = min_opt(t_star, bp);
        d.push(-s);
    }
    let value = ws.translated_cone(&Vector::new(d));
    let t_eval = t_star.as_ref().map(|t| t / q(2)).unwrap_or_else(|| q(1));
    let fx = e.eval(ws, x);
    let sample = ws.scale(&(q(1) / &t_eval), &ws.residual_diff(&e.eval(ws, &x.axpy(&t_eval, u)), &fx)).unwrap();
    DerivativeResult::exact(value, Some(threshold(t_star)), vec![(t_eval, sample)])
}

fn support_gap(ws: &Workspace, a: &UpperSet, b: &UpperSet) -> Option<Q> {
    let mut worst = Q::zero();
    for d in &ws.directions.items {
        worst = worst.max(ws.support(d, a).gap(&ws.support(d, b))?);
    }
    Some(worst)
}

/// `f′(x, u)`: exact for parametric polyhedra and epigraphs, sampled on `grid` for oracles.
pub fn set_derivative_with(
    ws: &Workspace,
    f: &SetFunction,
    x: &Vector,
    u: &Vector,
    grid: &TGrid,
) -> Result<DerivativeResult, CalculusError> {
    if !f.declared_convex() {
        let name = match f {
            SetFunction::Oracle(o) => o.name.clone(),
            other => other.kind().to_string(),
        };
        return Err(CalculusError::NotDeclaredConvex(name));
    }
    let fx = f.eval(ws, x);
    if fx.is_empty() {
        return Ok(DerivativeResult::exact(ws.all(), Some(ExtReal::PlusInf), vec![]));
    }
    Ok(match f {
        SetFunction::ParamPoly(p) => exact_parampoly(ws, p, x, u, &fx),
        SetFunction::EpiVector(e) => exact_epivector(ws, e, x, u),
        SetFunction::Oracle(_) => {
            let samples: Vec<(Q, UpperSet)> =
                grid.points().into_iter().map(|t| (t.clone(), diff_quotient(ws, f, x, u, &t).unwrap())).collect();
            let value = ws.inf_family(&samples.iter().map(|s| s.1.clone()).collect::<Vec<_>>());
            let n = samples.len();
            let cauchy_gap = if n >= 2 { support_gap(ws, &samples[n - 2].1, &samples[n - 1].1) } else { None };
            DerivativeResult { value, exact: false, t_star: None, samples, cauchy_gap }
        }
    })
}

pub fn set_derivative(ws: &Workspace, f: &SetFunction, x: &Vector, u: &Vector) -> Result<DerivativeResult, CalculusError> {
    set_derivative_with(ws, f, x, u, &TGrid::default())
}

fn scalar_quotient(phi0: &ExtReal, phit: &ExtReal, t: &Q) -> ExtReal {
    phit.residual(phi0).scale_pos(&(q(1) / t))
}

/// Most halvings tried before an exact scalar derivative gives up on stabilisation.
const MAX_HALVINGS: usize = 256;

/// `φ′_{f,z*}(x, u)` together with an exactness flag.
pub fn scalar_dini_with(ws: &Workspace, f: &SetFunction, zstar: &Vector, x: &Vector, u: &Vector, grid: &TGrid) -> (ExtReal, bool) {
    let phi0 = f.scalarize(ws, zstar, x);
    if phi0 == ExtReal::PlusInf {
        return (ExtReal::MinusInf, true);
    }
    let phi = |t: &Q| f.scalarize(ws, zstar, &x.axpy(t, u));
    match f {
        SetFunction::Oracle(o) => {
            let v = grid.points().iter().map(|t| scalar_quotient(&phi0, &phi(t), t)).min().unwrap();
            let v = match v {
                ExtReal::Finite(a) => ExtReal::Finite(simplest_between(&(&a - &o.tolerance * zstar.l1()), &a)),
                other => other,
            };
            (v, false)
        }
        _ => {
            // convex piecewise-linear along the ray: equal chord slopes at t and t/2 pin the right derivative
            let mut t = q(1);
            let mut prev = scalar_quotient(&phi0, &phi(&t), &t);
            for _ in 0..MAX_HALVINGS {
                let half = &t / q(2);
                let cur = scalar_quotient(&phi0, &phi(&half), &half);
                if cur == prev && cur != ExtReal::PlusInf {
                    return (cur, true);
                }
                prev = cur;
                t = half;
            }
            // still +inf: the segment leaves the domain at once
            let exact = prev == ExtReal::PlusInf;
            (prev, exact)
        }
    }
}

pub fn scalar_dini(ws: &Workspace, f: &SetFunction, zstar: &Vector, x: &Vector, u: &Vector) -> (ExtReal, bool) {
    scalar_dini_with(ws, f, zstar, x, u, &TGrid::default())
}

/// `φ′_{f,z*}(x,u)` for every `z*` in `dirs`, sharing evaluations; `fx` is `f(x)`. For exact
/// classes every scalarization is affine up to the first structural event along the ray, so one
/// chord suffices.
pub fn scalar_dini_bundle(
    ws: &Workspace,
    f: &SetFunction,
    x: &Vector,
    fx: &UpperSet,
    u: &Vector,
    dirs: &[Vector],
) -> Vec<(ExtReal, bool)> {
    let phi0: Vec<ExtReal> = dirs.iter().map(|d| ws.neg_support(d, fx)).collect();
    let finish = |vals: Vec<ExtReal>, exact: bool| -> Vec<(ExtReal, bool)> {
        phi0.iter()
            .zip(vals)
            .map(|(p, v)| if *p == ExtReal::PlusInf { (ExtReal::MinusInf, true) } else { (v, exact) })
            .collect()
    };
    match first_segment_event(ws, f, x, fx, &x.add(u)) {
        Some(first) => {
            let t = first / q(2);
            let ft = f.eval(ws, &x.axpy(&t, u));
            let vals = dirs.iter().zip(&phi0).map(|(d, p)| scalar_quotient(p, &ws.neg_support(d, &ft), &t)).collect();
            finish(vals, true)
        }
        None => {
            let tol = match f {
                SetFunction::Oracle(o) => o.tolerance.clone(),
                _ => Q::zero(),
            };
            let sets: Vec<(Q, UpperSet)> = TGrid::default().points().into_iter().map(|t| {
                let v = f.eval(ws, &x.axpy(&t, u));
                (t, v)
            }).collect();
            let vals = dirs
                .iter()
                .zip(&phi0)
                .map(|(d, p)| {
                    let v = sets.iter().map(|(t, s)| scalar_quotient(p, &ws.neg_support(d, s), t)).min().unwrap();
                    match v {
                        ExtReal::Finite(a) => ExtReal::Finite(simplest_between(&(&a - &tol * d.l1()), &a)),
                        other => other,
                    }
                })
                .collect();
            finish(vals, false)
        }
    }
}

/// `∩_{z* ∈ M*} {z : φ′_{f,z*}(x,u) ≤ −⟨z*, z⟩}`.
pub fn scalarized_derivative_intersection(ws: &Workspace, f: &SetFunction, x: &Vector, u: &Vector, dirs: &[Vector]) -> UpperSet {
    let levels: Vec<UpperSet> = dirs.iter().map(|d| ws.level_set(d, &scalar_dini(ws, f, d, x, u).0)).collect();
    ws.sup_family(&levels)
}

#[derive(Clone, Debug)]
pub struct Regularity {
    pub strong: bool,
    pub weak: bool,
    /// Directions where `φ_{f′(x,·),z*}(u) ≠ φ′_{f,z*}(x,u)`.
    pub strong_failures: Vec<Vector>,
    pub exact: bool,
}

/// Strong regularity compares scalarized derivatives direction by direction; weak regularity
/// compares the set derivative with the intersection of scalar derivative halfspaces.
pub fn regularity_check(ws: &Workspace, f: &SetFunction, x: &Vector, u: &Vector, dirs: &[Vector]) -> Result<Regularity, CalculusError> {
    let d = set_derivative(ws, f, x, u)?;
    let tol = match f {
        SetFunction::Oracle(o) => o.tolerance.clone(),
        _ => Q::zero(),
    };
    let mut exact = d.exact;
    let mut strong_failures = Vec::new();
    let mut levels = Vec::new();
    for z in dirs {
        let (dini, ex) = scalar_dini(ws, f, z, x, u);
        exact &= ex;
        let lhs = ws.neg_support(z, &d.value);
        if lhs.cmp_with_tol(&dini, &tol) != std::cmp::Ordering::Equal {
            strong_failures.push(z.clone());
        }
        levels.push(ws.level_set(z, &dini));
    }
    let inter = ws.sup_family(&levels);
    let weak = if exact {
        inter == d.value
    } else {
        let probe: Vec<Vector> = ws.directions.items.iter().chain(dirs).cloned().collect();
        probe.iter().all(|z| ws.support(z, &inter).cmp_with_tol(&ws.support(z, &d.value), &tol) == std::cmp::Ordering::Equal)
    };
    let strong = strong_failures.is_empty();
    Ok(Regularity { strong, weak, strong_failures, exact })
}

#[cfg(test)]
mod tests;
