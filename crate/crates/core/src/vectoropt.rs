//! Vector-valued objectives through their epigraphical extension: efficiency, vector Dini
//! derivatives in the extended space `Z ∪ Z∞`, and the vector Minty principle.

use crate::builtins;
use crate::calculus::{exact_derivative_value, scalar_dini_bundle, set_derivative};
use crate::extres::ExtReal;
use crate::json::{rat, rat_vector};
use crate::lattice::{UpperSet, Workspace};
use crate::rat::{q, qr, simplest_between, Vector, Q};
use crate::setfun::{star_parameters, EpiVector, Oracle, SetFunError, SetFunction, VectorFunction};
use crate::vi::{minimal_set, CandidateSpace, Ineq, ViContext, ViError};
use num::{Signed, Zero};
use serde_json::{json, Value};
use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VectorOptError {
    #[error("grid is empty")]
    EmptyGrid,
    #[error("base point {0} is outside the domain")]
    BaseOutsideDomain(Vector),
    #[error("grid point {0} is outside the domain")]
    PointOutsideDomain(Vector),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("inconsistent limit data: {0}")]
    InconsistentLimitData(String),
    #[error(transparent)]
    SetFun(#[from] SetFunError),
    #[error(transparent)]
    Vi(#[from] ViError),
}

/// Numeric vector function, `None` outside its domain.
#[derive(Clone)]
pub struct VectorOracle {
    pub name: String,
    pub xdim: usize,
    pub zdim: usize,
    pub tolerance: Q,
    pub eval: Arc<dyn Fn(&Vector) -> Option<Vector> + Send + Sync>,
}

impl fmt::Debug for VectorOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "VectorOracle({})", self.name)
    }
}

#[derive(Clone, Debug)]
pub enum VectorMap {
    Pwl(VectorFunction),
    Oracle(VectorOracle),
}

impl VectorMap {
    pub fn xdim(&self) -> usize {
        match self {
            VectorMap::Pwl(p) => p.xdim,
            VectorMap::Oracle(o) => o.xdim,
        }
    }

    pub fn zdim(&self) -> usize {
        match self {
            VectorMap::Pwl(p) => p.components.len(),
            VectorMap::Oracle(o) => o.zdim,
        }
    }

    pub fn eval(&self, x: &Vector) -> Option<Vector> {
        match self {
            VectorMap::Pwl(p) => p.eval(x),
            VectorMap::Oracle(o) => (o.eval)(x),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, VectorMap::Pwl(_))
    }

    fn tolerance(&self) -> Q {
        match self {
            VectorMap::Pwl(_) => Q::zero(),
            VectorMap::Oracle(o) => o.tolerance.clone(),
        }
    }
}

/// The oracle behind the `infdir_example` builtin.
pub fn infdir_map() -> VectorMap {
    VectorMap::Oracle(VectorOracle {
        name: "infdir_example".into(),
        xdim: 1,
        zdim: 2,
        tolerance: qr(1, 1_000_000),
        eval: Arc::new(builtins::infdir_psi),
    })
}

/// `f = ψ^C`: `ψ(x) + C` on the domain, `∅` elsewhere.
pub fn epigraphical(ws: &Workspace, psi: &VectorMap) -> Result<SetFunction, VectorOptError> {
    if psi.zdim() != ws.dim {
        return Err(VectorOptError::DimensionMismatch { expected: ws.dim, got: psi.zdim() });
    }
    Ok(match psi {
        VectorMap::Pwl(p) => SetFunction::EpiVector(EpiVector::new(ws, p.clone())?),
        VectorMap::Oracle(o) => {
            let inner = o.eval.clone();
            SetFunction::Oracle(Oracle {
                name: o.name.clone(),
                xdim: o.xdim,
                convex: true,
                tolerance: o.tolerance.clone(),
                eval: Arc::new(move |w: &Workspace, x: &Vector| match inner(x) {
                    Some(p) => w.translated_cone(&p),
                    None => UpperSet::Empty,
                }),
            })
        }
    })
}

/// A point of `Z ∪ Z∞`. Infinite elements carry an L1-normalized direction.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExtendedPoint {
    Fin(Vector),
    Inf(Vector),
}

impl ExtendedPoint {
    /// `z∞`, with `0∞ = 0`.
    pub fn infinite(z: &Vector) -> ExtendedPoint {
        if z.is_zero() {
            ExtendedPoint::Fin(z.clone())
        } else {
            ExtendedPoint::Inf(z.l1_normalized())
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            ExtendedPoint::Fin(z) => json!({ "finite": rat_vector(z) }),
            ExtendedPoint::Inf(d) => json!({ "infinite": rat_vector(d) }),
        }
    }
}

impl fmt::Display for ExtendedPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedPoint::Fin(z) => write!(f, "{z}"),
            ExtendedPoint::Inf(d) => write!(f, "{d}∞"),
        }
    }
}

/// Limit points of the difference quotients in `Z ∪ Z∞`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiniLimitSet {
    pub finite_points: Vec<ExtendedPoint>,
    pub infinite_dirs: Vec<ExtendedPoint>,
    pub exact: bool,
    pub diagnostic: Option<String>,
}

impl DiniLimitSet {
    pub fn is_empty(&self) -> bool {
        self.finite_points.is_empty() && self.infinite_dirs.is_empty()
    }

    /// The single finite point, if that is all there is.
    pub fn single_finite(&self) -> Option<&Vector> {
        match (&self.finite_points[..], self.infinite_dirs.is_empty()) {
            ([ExtendedPoint::Fin(z)], true) => Some(z),
            _ => None,
        }
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "finite": self.finite_points.iter().map(ExtendedPoint::to_json).collect::<Vec<_>>(),
            "infinite": self.infinite_dirs.iter().map(ExtendedPoint::to_json).collect::<Vec<_>>(),
            "exact": self.exact,
        });
        if let Some(d) = &self.diagnostic {
            v["diagnostic"] = json!(d);
        }
        v
    }
}

fn dominates(ws: &Workspace, y: &Vector, x: &Vector) -> bool {
    // ψ(x) ∈ ψ(y) + C but not in ψ(y) + (C ∩ −C)
    let d = x.sub(y);
    ws.cone.contains(&d, ws.dim) && !ws.cone.in_lineality(&d, ws.dim)
}

#[derive(Clone, Debug)]
pub struct EfficientReport {
    pub efficient: Vec<Vector>,
    /// The efficient points are exactly the minimizers of `ψ^C` over the grid.
    pub agrees_with_minimal: bool,
    /// Union of minimal values equals `Eff + C`, compared value by value.
    pub eff_plus_c_identity: bool,
}

impl EfficientReport {
    pub fn to_json(&self) -> Value {
        json!({
            "efficient": self.efficient.iter().map(rat_vector).collect::<Vec<_>>(),
            "agrees_with_minimal": self.agrees_with_minimal,
            "eff_plus_c_identity": self.eff_plus_c_identity,
        })
    }
}

fn eval_grid(psi: &VectorMap, grid: &[Vector]) -> Result<Vec<Vector>, VectorOptError> {
    if grid.is_empty() {
        return Err(VectorOptError::EmptyGrid);
    }
    grid.iter()
        .map(|x| {
            if x.dim() != psi.xdim() {
                return Err(VectorOptError::DimensionMismatch { expected: psi.xdim(), got: x.dim() });
            }
            psi.eval(x).ok_or_else(|| VectorOptError::PointOutsideDomain(x.clone()))
        })
        .collect()
}

/// Grid points whose values are efficient in `ψ[grid]`, cross-checked against minimality of
/// `ψ^C` and the identity `∪ Min = Eff + C`.
pub fn efficient_set(ws: &Workspace, psi: &VectorMap, grid: &[Vector]) -> Result<EfficientReport, VectorOptError> {
    let vals = eval_grid(psi, grid)?;
    let f = epigraphical(ws, psi)?;
    let efficient: Vec<Vector> = grid
        .iter()
        .zip(&vals)
        .filter(|(_, v)| !vals.iter().any(|w| dominates(ws, w, v)))
        .map(|(x, _)| x.clone())
        .collect();
    let space = CandidateSpace::new(grid.to_vec())?;
    let minimal = minimal_set(ws, &f, &space, &space);
    let mut a = efficient.clone();
    let mut b = minimal.clone();
    a.sort();
    a.dedup();
    b.sort();
    b.dedup();
    let agrees_with_minimal = a == b;

    let min_values: Vec<UpperSet> = minimal.iter().map(|x| f.eval(ws, x)).collect();
    let eff_values: Vec<Vector> = vals.iter().filter(|v| !vals.iter().any(|w| dominates(ws, w, v))).cloned().collect();
    let eff_plus_c: Vec<UpperSet> = eff_values.iter().map(|z| ws.translated_cone(z)).collect();
    let covered = |xs: &[UpperSet], ys: &[UpperSet]| xs.iter().all(|x| ys.contains(x));
    let eff_plus_c_identity = covered(&min_values, &eff_plus_c) && covered(&eff_plus_c, &min_values);
    Ok(EfficientReport { efficient, agrees_with_minimal, eff_plus_c_identity })
}

/// One-sided slope of a max of affine pieces at `x` along `u`.
fn right_slope(pieces: &[crate::setfun::Affine], x: &Vector, u: &Vector) -> Q {
    let vals: Vec<Q> = pieces.iter().map(|p| p.eval(x)).collect();
    let top = vals.iter().max().unwrap();
    pieces.iter().zip(&vals).filter(|(_, v)| *v == top).map(|(p, _)| p.coef.dot(u)).max().unwrap()
}

/// Steps of the geometric grid `t = 2^{-k}` used for oracle trails.
pub const ORACLE_STEPS: usize = 60;
/// Trail points inspected by the Cauchy tests.
const CAUCHY_WINDOW: usize = 5;

/// Classifies a trail of quotients: convergent, direction-stabilized divergence, or neither.
pub fn classify_trail(trail: &[Vector], tol: &Q) -> (Option<ExtendedPoint>, String) {
    let n = trail.len();
    if n < CAUCHY_WINDOW {
        return (None, format!("only {n} trail points"));
    }
    let tail = &trail[n - CAUCHY_WINDOW..];
    let last = &trail[n - 1];
    if tail.windows(2).all(|w| w[1].sub(&w[0]).l1() <= *tol) {
        let snapped = Vector::new(last.0.iter().map(|c| simplest_between(&(c - tol), &(c + tol))).collect());
        return (Some(ExtendedPoint::Fin(snapped)), "quotients converge".into());
    }
    if last.l1() > tol.recip() {
        let dirs: Vec<Vector> = tail.iter().filter(|z| !z.is_zero()).map(Vector::l1_normalized).collect();
        if dirs.len() == CAUCHY_WINDOW && dirs.iter().all(|d| d.sub(&dirs[CAUCHY_WINDOW - 1]).l1() <= *tol) {
            let d = &dirs[CAUCHY_WINDOW - 1];
            let snapped = Vector::new(d.0.iter().map(|c| simplest_between(&(c - tol), &(c + tol))).collect());
            if !snapped.is_zero() {
                return (Some(ExtendedPoint::infinite(&snapped)), "norm diverges along a stable direction".into());
            }
        }
        return (None, "norm diverges without a stable direction".into());
    }
    (None, "quotients neither converge nor diverge within the grid".into())
}

fn oracle_trail(psi: &VectorMap, x0: &Vector, p0: &Vector, u: &Vector) -> Vec<Vector> {
    let mut trail = Vec::new();
    let mut t = q(1);
    for _ in 0..=ORACLE_STEPS {
        match psi.eval(&x0.axpy(&t, u)) {
            Some(p) => trail.push(p.sub(p0).scale(&t.recip())),
            None => break,
        }
        t /= q(2);
    }
    trail
}

/// `ψ′(x0, u)` as a subset of `Z ∪ Z∞`.
pub fn vector_dini(psi: &VectorMap, x0: &Vector, u: &Vector) -> Result<DiniLimitSet, VectorOptError> {
    if x0.dim() != psi.xdim() || u.dim() != psi.xdim() {
        return Err(VectorOptError::DimensionMismatch { expected: psi.xdim(), got: x0.dim().max(u.dim()) });
    }
    let p0 = psi.eval(x0).ok_or_else(|| VectorOptError::BaseOutsideDomain(x0.clone()))?;
    match psi {
        VectorMap::Pwl(p) => {
            let leaves = p.domain.halfspaces.iter().any(|(a, b)| a.dot(x0) == *b && a.dot(u).is_positive());
            if leaves {
                return Ok(DiniLimitSet {
                    finite_points: vec![],
                    infinite_dirs: vec![],
                    exact: true,
                    diagnostic: Some("the segment leaves the domain at once".into()),
                });
            }
            let slopes = p.components.iter().map(|c| right_slope(&c.pieces, x0, u)).collect();
            Ok(DiniLimitSet {
                finite_points: vec![ExtendedPoint::Fin(Vector::new(slopes))],
                infinite_dirs: vec![],
                exact: true,
                diagnostic: None,
            })
        }
        VectorMap::Oracle(o) => {
            let trail = oracle_trail(psi, x0, &p0, u);
            let (class, note) = classify_trail(&trail, &o.tolerance);
            let (finite_points, infinite_dirs) = match class {
                Some(e @ ExtendedPoint::Fin(_)) => (vec![e], vec![]),
                Some(e @ ExtendedPoint::Inf(_)) => (vec![], vec![e]),
                None => (vec![], vec![]),
            };
            Ok(DiniLimitSet { finite_points, infinite_dirs, exact: false, diagnostic: Some(note) })
        }
    }
}

/// `z∞ + C`, the lower limit of `{tz} + C` as `t ↑ ∞`.
pub fn infdir_plus_cone(ws: &Workspace, z: &Vector) -> UpperSet {
    if z.is_zero() || ws.cone.in_lineality(z, ws.dim) {
        return ws.cone_set();
    }
    if !ws.cone.contains(&z.neg(), ws.dim) {
        return UpperSet::Empty;
    }
    ws.from_vrep(&[Vector::zeros(ws.dim)], &[z.clone()]).expect("dimension checked")
}

/// Scalarized derivative along an oracle trail; `−∞` once the trail falls below `−1/tol`.
fn trail_scalar(trail: &[Vector], zstar: &Vector, tol: &Q) -> ExtReal {
    let vals: Vec<Q> = trail.iter().map(|z| -zstar.dot(z)).collect();
    let last = vals.last().cloned().unwrap_or_else(Q::zero);
    if last < -tol.recip() {
        return ExtReal::MinusInf;
    }
    ExtReal::Finite(vals.into_iter().min().unwrap_or_else(Q::zero))
}

#[derive(Clone, Debug)]
pub struct DiniClassification {
    /// Per finite limit: `z + C = f′(x0, u)` and `φ′_{f,z*} = −z*(z)` on `M*`.
    pub finite_ok: Vec<bool>,
    /// Per infinite direction: `z ∈ −C` and `z∞ + C ⊆ 0⁺f′(x0, u)`.
    pub infinite_ok: Vec<bool>,
    /// A finite limit next to an infinite one forces the direction into `C ∩ −C`.
    pub coexistence_ok: bool,
    pub exact: bool,
}

impl DiniClassification {
    pub fn holds(&self) -> bool {
        self.finite_ok.iter().chain(&self.infinite_ok).all(|b| *b) && self.coexistence_ok
    }

    pub fn to_json(&self) -> Value {
        json!({
            "a": self.finite_ok,
            "b": self.infinite_ok,
            "c": self.coexistence_ok,
            "holds": self.holds(),
            "exact": self.exact,
        })
    }
}

/// Checks the limit data of `vector_dini` against the set derivative of `ψ^C`.
pub fn classify_dini(
    ws: &Workspace,
    psi: &VectorMap,
    x0: &Vector,
    x: &Vector,
    dlimit: &DiniLimitSet,
    mstar: &[Vector],
) -> Result<DiniClassification, VectorOptError> {
    for e in dlimit.finite_points.iter().chain(&dlimit.infinite_dirs) {
        let (ExtendedPoint::Fin(z) | ExtendedPoint::Inf(z)) = e;
        if z.dim() != ws.dim {
            return Err(VectorOptError::DimensionMismatch { expected: ws.dim, got: z.dim() });
        }
    }
    if dlimit.finite_points.iter().any(|e| matches!(e, ExtendedPoint::Inf(_)))
        || dlimit.infinite_dirs.iter().any(|e| matches!(e, ExtendedPoint::Fin(_)))
    {
        return Err(VectorOptError::InconsistentLimitData("finite and infinite entries are swapped".into()));
    }
    if psi.is_exact() != dlimit.exact {
        return Err(VectorOptError::InconsistentLimitData("exactness differs from the function's class".into()));
    }
    let f = epigraphical(ws, psi)?;
    let p0 = psi.eval(x0).ok_or_else(|| VectorOptError::BaseOutsideDomain(x0.clone()))?;
    let fx0 = ws.translated_cone(&p0);
    let u = x.sub(x0);
    let tol = psi.tolerance();
    let (deriv, scalars): (UpperSet, Vec<ExtReal>) = match psi {
        VectorMap::Pwl(_) => {
            let d = exact_derivative_value(ws, &f, x0, &fx0, &u).expect("exact class");
            let s = scalar_dini_bundle(ws, &f, x0, &fx0, &u, mstar).into_iter().map(|b| b.0).collect();
            (d, s)
        }
        VectorMap::Oracle(_) => {
            let trail = oracle_trail(psi, x0, &p0, &u);
            let s: Vec<ExtReal> = mstar.iter().map(|z| trail_scalar(&trail, z, &tol)).collect();
            let levels: Vec<UpperSet> = mstar.iter().zip(&s).map(|(z, v)| ws.level_set(z, v)).collect();
            (ws.sup_family(&levels), s)
        }
    };
    let close = |a: &ExtReal, b: &ExtReal| a.cmp_with_tol(b, &tol).is_eq();
    let finite_ok = dlimit
        .finite_points
        .iter()
        .map(|e| {
            let ExtendedPoint::Fin(z) = e else { unreachable!() };
            let same_set = if psi.is_exact() {
                ws.translated_cone(z) == deriv
            } else {
                let d = set_derivative(ws, &f, x0, &u).map(|d| d.value).unwrap_or(UpperSet::Empty);
                let probe = ws.directions.items.iter().chain(mstar);
                let zc = ws.translated_cone(z);
                probe.clone().all(|n| close(&ws.support(n, &zc), &ws.support(n, &d)))
            };
            let scalar = mstar.iter().zip(&scalars).all(|(m, s)| close(s, &ExtReal::Finite(-m.dot(z))));
            same_set && scalar
        })
        .collect();
    let rec = ws.recession(&deriv);
    let infinite_ok = dlimit
        .infinite_dirs
        .iter()
        .map(|e| {
            let ExtendedPoint::Inf(z) = e else { unreachable!() };
            ws.cone.contains(&z.neg(), ws.dim) && ws.leq(&rec, &infdir_plus_cone(ws, z))
        })
        .collect();
    let coexistence_ok = dlimit.finite_points.is_empty()
        || dlimit.infinite_dirs.iter().all(|e| {
            let ExtendedPoint::Inf(z) = e else { unreachable!() };
            ws.cone.in_lineality(z, ws.dim)
        });
    Ok(DiniClassification { finite_ok, infinite_ok, coexistence_ok, exact: psi.is_exact() })
}

/// Segment parameters for the vector Minty checks when none are given.
pub fn default_t_params() -> Vec<Q> {
    vec![qr(1, 8), qr(1, 4), qr(1, 2), qr(3, 4)]
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MintyWitness {
    pub x: Vector,
    pub t: Q,
    pub zstar: Option<Vector>,
}

impl MintyWitness {
    pub fn to_json(&self) -> Value {
        let mut v = json!({ "x": rat_vector(&self.x), "t": rat(&self.t) });
        if let Some(z) = &self.zstar {
            v["zstar"] = rat_vector(z);
        }
        v
    }
}

#[derive(Clone, Debug)]
pub struct VectorMintyReport {
    /// `ψ(x0)` is efficient among the values at `x0`, the sampled `x_t` and the grid.
    pub efficient: bool,
    /// Scalarized form: some `z* ∈ M*` with `(−z*ψ)′(x_t, x0 − x) < 0`.
    pub scalarized: bool,
    pub scalarized_witnesses: Vec<MintyWitness>,
    /// Inner form: `ψ′(x_t, x0 − x) ⊆ Z \ C`.
    pub inner: bool,
    pub inner_witnesses: Vec<MintyWitness>,
    /// Every sampled derivative is one finite point.
    pub single_valued: bool,
    /// Every sampled `(−z*ψ)′(x_t, x0 − x)` is finite.
    pub scalars_finite: bool,
    /// `C` is the nonnegative orthant and `ψ` is continuous, so the inner form is equivalent to efficiency.
    pub principle_applies: bool,
    /// The finite Minty inequality with the facet normals of `C`.
    pub finite_minty: bool,
    pub t_params: Vec<Q>,
    pub samples: usize,
}

impl VectorMintyReport {
    /// When the principle applies, every form agrees with efficiency.
    pub fn consistent(&self) -> bool {
        !self.principle_applies
            || (self.inner == self.efficient && self.scalarized == self.efficient && self.finite_minty == self.efficient)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "efficient": self.efficient,
            "scalarized": { "holds": self.scalarized, "witnesses": self.scalarized_witnesses.iter().map(MintyWitness::to_json).collect::<Vec<_>>() },
            "inner": { "holds": self.inner, "witnesses": self.inner_witnesses.iter().map(MintyWitness::to_json).collect::<Vec<_>>() },
            "single_valued": self.single_valued,
            "scalars_finite": self.scalars_finite,
            "principle_applies": self.principle_applies,
            "finite_minty": self.finite_minty,
            "consistent": self.consistent(),
            "t_params": self.t_params.iter().map(rat).collect::<Vec<_>>(),
            "samples": self.samples,
        })
    }
}

fn is_orthant(ws: &Workspace) -> bool {
    let mut gens: Vec<Vector> = ws.cone.generators.iter().map(Vector::primitive).collect();
    gens.sort();
    let mut units: Vec<Vector> = (0..ws.dim)
        .map(|i| {
            let mut e = vec![Q::zero(); ws.dim];
            e[i] = q(1);
            Vector::new(e)
        })
        .collect();
    units.sort();
    gens == units
}

/// The vector Minty forms at `x0` over the points `x_t = x0 + t (x − x0)`, `x` in the grid and
/// `t` in `t_params` (plus the structural events of each segment for exact `ψ`).
pub fn vector_minty_check(
    ws: &Workspace,
    psi: &VectorMap,
    x0: &Vector,
    grid: &[Vector],
    mstar: &[Vector],
    t_params: &[Q],
) -> Result<VectorMintyReport, VectorOptError> {
    let p0 = psi.eval(x0).ok_or_else(|| VectorOptError::BaseOutsideDomain(x0.clone()))?;
    let vals = eval_grid(psi, grid)?;
    let f = epigraphical(ws, psi)?;
    let mstar: Vec<Vector> = if mstar.is_empty() { ws.directions.items.clone() } else { mstar.to_vec() };
    let tol = psi.tolerance();

    let mut samples: Vec<(Vector, Q, Vector)> = Vec::new();
    for x in grid.iter().filter(|x| *x != x0) {
        let mut ts: Vec<Q> = t_params.to_vec();
        if psi.is_exact() {
            ts.extend(star_parameters(ws, &f, x0, x).into_iter().filter(|t| *t < q(1)));
        }
        ts.sort();
        ts.dedup();
        for t in ts.into_iter().filter(|t| t.is_positive() && *t < q(1)) {
            samples.push((x.clone(), t.clone(), x0.axpy(&t, &x.sub(x0))));
        }
    }

    let mut scalarized_witnesses = Vec::new();
    let mut inner_witnesses = Vec::new();
    let mut single_valued = true;
    let mut scalars_finite = true;
    let mut sample_vals = Vec::new();
    for (x, t, y) in &samples {
        let py = psi.eval(y).ok_or_else(|| VectorOptError::PointOutsideDomain(y.clone()))?;
        let u = x0.sub(x);
        let fy = ws.translated_cone(&py);
        let bundle = scalar_dini_bundle(ws, &f, y, &fy, &u, &mstar);
        scalars_finite &= bundle.iter().all(|b| b.0.is_finite());
        let d = vector_dini(psi, y, &u)?;
        single_valued &= d.single_finite().is_some();
        if py != p0 {
            let sign = |v: &ExtReal| v.cmp_with_tol(&ExtReal::int(0), &tol);
            if !bundle.iter().any(|b| sign(&b.0).is_lt()) {
                scalarized_witnesses.push(MintyWitness { x: x.clone(), t: t.clone(), zstar: None });
            }
            let inner_ok = !d.is_empty() && d.infinite_dirs.is_empty() && d.finite_points.iter().all(|e| {
                let ExtendedPoint::Fin(z) = e else { unreachable!() };
                !ws.cone.contains(z, ws.dim)
            });
            if !inner_ok {
                inner_witnesses.push(MintyWitness { x: x.clone(), t: t.clone(), zstar: None });
            }
        }
        sample_vals.push(py);
    }

    let efficient = !vals.iter().chain(&sample_vals).any(|w| dominates(ws, w, &p0));
    let mut points = vec![x0.clone()];
    points.extend(samples.iter().map(|s| s.2.clone()));
    points.extend(grid.iter().cloned());
    let space = CandidateSpace::new(points)?;
    let finite_minty = ViContext::new(ws, &f, x0, space, &mstar, &ws.cone.facet_normals)?.check(Ineq::ScalarMintyFinite).holds;
    let mut t_params: Vec<Q> = t_params.to_vec();
    t_params.sort();
    Ok(VectorMintyReport {
        efficient,
        scalarized: scalarized_witnesses.is_empty(),
        scalarized_witnesses,
        inner: inner_witnesses.is_empty(),
        inner_witnesses,
        single_valued,
        scalars_finite,
        principle_applies: psi.is_exact() && is_orthant(ws),
        finite_minty,
        t_params,
        samples: samples.len(),
    })
}

/// Limit of the increasing family `{z_t} + C` along a trail, through its scalarizations.
pub fn limit_of_translated_cones(ws: &Workspace, trail: &[Vector], tol: &Q) -> UpperSet {
    let levels: Vec<UpperSet> = ws
        .directions
        .items
        .iter()
        .map(|z| {
            let vals: Vec<Q> = trail.iter().map(|p| -z.dot(p)).collect();
            let last = vals.last().cloned().unwrap_or_else(Q::zero);
            let v = if last < -tol.recip() { ExtReal::MinusInf } else { ExtReal::Finite(vals.into_iter().min().unwrap()) };
            ws.level_set(z, &v)
        })
        .collect();
    ws.sup_family(&levels)
}

#[derive(Clone, Debug)]
pub struct NoncommutationReport {
    pub limsup: Option<ExtendedPoint>,
    pub limsup_plus_cone: UpperSet,
    pub limit_of_sums: UpperSet,
    /// `Limsup + C` is strictly contained in the limit of `{z_t} + C`.
    pub strictly_smaller: bool,
}

impl NoncommutationReport {
    pub fn to_json(&self) -> Value {
        json!({
            "limsup": self.limsup.as_ref().map(ExtendedPoint::to_json),
            "limsup_plus_cone": self.limsup_plus_cone.to_json(),
            "limit_of_sums": self.limit_of_sums.to_json(),
            "strictly_smaller": self.strictly_smaller,
        })
    }
}

/// `z_t = (−t, −t²)` for `t = 2^k ↑ ∞`: the limit of singletons plus `C` against the limit of
/// the translated cones.
pub fn noncommutation_example(ws: &Workspace) -> NoncommutationReport {
    let tol = qr(1, 1_000_000);
    let trail: Vec<Vector> = (0..40)
        .map(|k| {
            let t = q(1i64 << k);
            Vector::new(vec![-t.clone(), -(&t * &t)])
        })
        .collect();
    let (limsup, _) = classify_trail(&trail, &tol);
    let limsup_plus_cone = match &limsup {
        Some(ExtendedPoint::Inf(d)) => infdir_plus_cone(ws, d),
        Some(ExtendedPoint::Fin(z)) => ws.translated_cone(z),
        None => UpperSet::Empty,
    };
    let limit_of_sums = limit_of_translated_cones(ws, &trail, &tol);
    let strictly_smaller = ws.leq(&limit_of_sums, &limsup_plus_cone) && limit_of_sums != limsup_plus_cone;
    NoncommutationReport { limsup, limsup_plus_cone, limit_of_sums, strictly_smaller }
}
