//! Set-valued functions `X → G(Z,C)`: parametric polyhedra, epigraphical extensions of vector
//! functions, and numeric oracles.

use crate::extres::ExtReal;
use crate::lattice::{KernelError, UpperSet, Workspace};
use crate::rat::{q, qr, to_f64, Vector, Q};
use num::{Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SetFunError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("a piecewise-linear function needs at least one piece")]
    NoPieces,
    #[error("translation set is empty")]
    EmptyTranslationSet,
    #[error("{0}")]
    Invalid(String),
}

/// `x ↦ ⟨coef, x⟩ + c`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Affine {
    pub coef: Vector,
    pub c: Q,
}

impl Affine {
    pub fn new(coef: Vector, c: Q) -> Self {
        Affine { coef, c }
    }

    pub fn eval(&self, x: &Vector) -> Q {
        self.coef.dot(x) + &self.c
    }

    /// Value and slope of `t ↦ self(x + t u)`.
    pub fn along(&self, x: &Vector, u: &Vector) -> (Q, Q) {
        (self.eval(x), self.coef.dot(u))
    }
}

/// Pointwise minimum of affine pieces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConcavePWL {
    pub pieces: Vec<Affine>,
}

impl ConcavePWL {
    pub fn new(pieces: Vec<Affine>) -> Result<Self, SetFunError> {
        if pieces.is_empty() {
            return Err(SetFunError::NoPieces);
        }
        Ok(ConcavePWL { pieces })
    }

    pub fn constant(c: Q, xdim: usize) -> Self {
        ConcavePWL { pieces: vec![Affine::new(Vector::zeros(xdim), c)] }
    }

    pub fn eval(&self, x: &Vector) -> Q {
        self.pieces.iter().map(|p| p.eval(x)).min().unwrap()
    }
}

/// Pointwise maximum of affine pieces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvexPWL {
    pub pieces: Vec<Affine>,
}

impl ConvexPWL {
    pub fn new(pieces: Vec<Affine>) -> Result<Self, SetFunError> {
        if pieces.is_empty() {
            return Err(SetFunError::NoPieces);
        }
        Ok(ConvexPWL { pieces })
    }

    pub fn eval(&self, x: &Vector) -> Q {
        self.pieces.iter().map(|p| p.eval(x)).max().unwrap()
    }
}

/// Polyhedron `{x : ⟨a, x⟩ ≤ b}` in the pre-image space.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Domain {
    pub halfspaces: Vec<(Vector, Q)>,
}

impl Domain {
    pub fn contains(&self, x: &Vector) -> bool {
        self.halfspaces.iter().all(|(a, b)| &a.dot(x) <= b)
    }
}

/// `f(x) = {z : ⟨N_i, z⟩ ≤ b_i(x)}` on `S`, `∅` elsewhere.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParamPoly {
    pub xdim: usize,
    pub normals: Vec<Vector>,
    pub offsets: Vec<ConcavePWL>,
    pub domain: Domain,
}

impl ParamPoly {
    pub fn new(
        ws: &Workspace,
        xdim: usize,
        normals: Vec<Vector>,
        offsets: Vec<ConcavePWL>,
        domain: Domain,
    ) -> Result<Self, SetFunError> {
        if normals.len() != offsets.len() {
            return Err(SetFunError::Invalid("one offset per normal is required".into()));
        }
        for n in &normals {
            if n.dim() != ws.dim {
                return Err(SetFunError::DimensionMismatch { expected: ws.dim, got: n.dim() });
            }
            if n.is_zero() {
                return Err(KernelError::ZeroNormal.into());
            }
            if !ws.in_dual(n) {
                return Err(KernelError::NormalOutsideDualCone(n.clone()).into());
            }
        }
        for p in offsets.iter().flat_map(|o| &o.pieces).map(|p| &p.coef).chain(domain.halfspaces.iter().map(|h| &h.0)) {
            if p.dim() != xdim {
                return Err(SetFunError::DimensionMismatch { expected: xdim, got: p.dim() });
            }
        }
        Ok(ParamPoly { xdim, normals, offsets, domain })
    }

    pub fn eval(&self, ws: &Workspace, x: &Vector) -> UpperSet {
        if !self.domain.contains(x) {
            return UpperSet::Empty;
        }
        let raw: Vec<(Vector, Q)> = self.normals.iter().zip(&self.offsets).map(|(n, b)| (n.clone(), b.eval(x))).collect();
        ws.canonicalize(&raw).expect("normals validated at construction")
    }

    /// The inf-translation by `co M` as a new parametric polyhedron, by eliminating the
    /// barycentric coordinates of `M`'s points from the joint system.
    pub fn inf_translate(&self, ws: &Workspace, m: &[Vector]) -> Result<ParamPoly, SetFunError> {
        if m.is_empty() {
            return Err(SetFunError::EmptyTranslationSet);
        }
        let m = hull_vertices(m);
        let m = &m[..];
        let k = m.len();
        // row: z-coefficients, λ-coefficients, rhs coefficients on x, rhs constant
        let mut rows: Vec<Row> = Vec::new();
        for (n, off) in self.normals.iter().zip(&self.offsets) {
            for p in &off.pieces {
                // ⟨n,z⟩ ≤ ⟨a, Σλ_j m_j + x⟩ + c
                let lam: Vec<Q> = m.iter().map(|mj| -p.coef.dot(mj)).collect();
                rows.push(Row { z: n.clone(), lam, xc: p.coef.clone(), c: p.c.clone() });
            }
        }
        for (a, b) in &self.domain.halfspaces {
            let lam: Vec<Q> = m.iter().map(|mj| a.dot(mj)).collect();
            rows.push(Row { z: Vector::zeros(ws.dim), lam, xc: a.neg(), c: b.clone() });
        }
        for j in 0..k {
            let mut lam = vec![Q::zero(); k];
            lam[j] = q(-1);
            rows.push(Row { z: Vector::zeros(ws.dim), lam, xc: Vector::zeros(self.xdim), c: Q::zero() });
        }
        rows.push(Row { z: Vector::zeros(ws.dim), lam: vec![q(1); k], xc: Vector::zeros(self.xdim), c: q(1) });
        rows.push(Row { z: Vector::zeros(ws.dim), lam: vec![q(-1); k], xc: Vector::zeros(self.xdim), c: q(-1) });
        for j in 0..k {
            rows = eliminate(rows, j);
        }
        let mut grouped: BTreeMap<Vector, Vec<Affine>> = BTreeMap::new();
        let mut domain = Vec::new();
        for r in rows {
            if r.z.is_zero() {
                // 0 ≤ ⟨xc, x⟩ + c
                if r.xc.is_zero() {
                    if r.c.is_negative() {
                        domain.push((Vector::zeros(self.xdim), q(-1)));
                    }
                    continue;
                }
                domain.push((r.xc.neg(), r.c));
            } else {
                let (prim, f) = r.z.primitive_factor();
                grouped.entry(prim).or_default().push(Affine::new(r.xc.scale(&f), &r.c * &f));
            }
        }
        let mut normals = Vec::new();
        let mut offsets = Vec::new();
        for (n, mut pieces) in grouped {
            pieces.sort();
            pieces.dedup();
            normals.push(n);
            offsets.push(ConcavePWL { pieces });
        }
        domain.sort();
        domain.dedup();
        ParamPoly::new(ws, self.xdim, normals, offsets, Domain { halfspaces: domain })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Row {
    z: Vector,
    lam: Vec<Q>,
    xc: Vector,
    c: Q,
}

impl Row {
    fn combine(&self, s: &Q, o: &Row, t: &Q) -> Row {
        Row {
            z: self.z.scale(s).add(&o.z.scale(t)),
            lam: self.lam.iter().zip(&o.lam).map(|(a, b)| a * s + b * t).collect(),
            xc: self.xc.scale(s).add(&o.xc.scale(t)),
            c: &self.c * s + &o.c * t,
        }
    }

    /// Scales so the first nonzero coefficient has absolute value one.
    fn normalized(self) -> Row {
        let lead = self
            .z
            .0
            .iter()
            .chain(&self.lam)
            .chain(&self.xc.0)
            .chain(std::iter::once(&self.c))
            .find(|v| !v.is_zero())
            .map(|v| v.abs());
        match lead {
            Some(l) => {
                let s = q(1) / l;
                self.combine(&s, &self.clone(), &Q::zero())
            }
            None => self,
        }
    }
}

/// Points of `m` spanning the same convex hull: the extreme points in dimensions 1 and 2,
/// everything (deduplicated) otherwise.
pub fn hull_vertices(m: &[Vector]) -> Vec<Vector> {
    let mut pts: Vec<Vector> = m.to_vec();
    pts.sort();
    pts.dedup();
    match pts.first().map(Vector::dim) {
        Some(1) if pts.len() > 2 => vec![pts[0].clone(), pts[pts.len() - 1].clone()],
        Some(2) if pts.len() > 2 => {
            // monotone chain, dropping collinear points
            let turn = |o: &Vector, a: &Vector, b: &Vector| crate::rat::cross(&a.sub(o), &b.sub(o));
            let mut hull: Vec<Vector> = Vec::new();
            for pass in [pts.clone(), pts.iter().rev().cloned().collect()] {
                let start = hull.len();
                for p in pass {
                    while hull.len() >= start + 2 && !turn(&hull[hull.len() - 2], &hull[hull.len() - 1], &p).is_positive() {
                        hull.pop();
                    }
                    hull.push(p);
                }
                hull.pop();
            }
            hull.sort();
            hull.dedup();
            hull
        }
        _ => pts,
    }
}

fn eliminate(rows: Vec<Row>, j: usize) -> Vec<Row> {
    let (mut pos, mut neg, mut out) = (Vec::new(), Vec::new(), Vec::new());
    for r in rows {
        if r.lam[j].is_positive() {
            pos.push(r);
        } else if r.lam[j].is_negative() {
            neg.push(r);
        } else {
            out.push(r);
        }
    }
    for p in &pos {
        for n in &neg {
            let s = -n.lam[j].clone();
            let t = p.lam[j].clone();
            let mut r = p.combine(&s, n, &t);
            r.lam[j] = Q::zero();
            out.push(r);
        }
    }
    let mut out: Vec<Row> = out.into_iter().map(Row::normalized).collect();
    out.sort();
    out.dedup();
    out
}

/// `ψ : S → Z` with convex piecewise-linear components.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorFunction {
    pub xdim: usize,
    pub components: Vec<ConvexPWL>,
    pub domain: Domain,
}

impl VectorFunction {
    pub fn new(xdim: usize, components: Vec<ConvexPWL>, domain: Domain) -> Result<Self, SetFunError> {
        for p in components.iter().flat_map(|c| &c.pieces).map(|p| &p.coef).chain(domain.halfspaces.iter().map(|h| &h.0)) {
            if p.dim() != xdim {
                return Err(SetFunError::DimensionMismatch { expected: xdim, got: p.dim() });
            }
        }
        Ok(VectorFunction { xdim, components, domain })
    }

    pub fn eval(&self, x: &Vector) -> Option<Vector> {
        if !self.domain.contains(x) {
            return None;
        }
        Some(Vector::new(self.components.iter().map(|c| c.eval(x)).collect()))
    }
}

/// `f = ψ^C`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpiVector {
    pub psi: VectorFunction,
}

impl EpiVector {
    pub fn new(ws: &Workspace, psi: VectorFunction) -> Result<Self, SetFunError> {
        if psi.components.len() != ws.dim {
            return Err(SetFunError::DimensionMismatch { expected: ws.dim, got: psi.components.len() });
        }
        Ok(EpiVector { psi })
    }

    pub fn eval(&self, ws: &Workspace, x: &Vector) -> UpperSet {
        match self.psi.eval(x) {
            None => UpperSet::Empty,
            Some(p) => ws.translated_cone(&p),
        }
    }

    /// Rewrites `ψ(x) + C` as a parametric polyhedron; possible when every facet normal of `C`
    /// is componentwise nonpositive.
    pub fn to_parampoly(&self, ws: &Workspace) -> Option<ParamPoly> {
        let normals = ws.cone.facet_normals.clone();
        if normals.iter().any(|n| n.0.iter().any(|c| c.is_positive())) {
            return None;
        }
        let mut offsets = Vec::new();
        for n in &normals {
            // Σ_j n_j max_k ψ_jk = min over piece choices since n_j ≤ 0
            let mut acc = vec![Affine::new(Vector::zeros(self.psi.xdim), Q::zero())];
            for (j, comp) in self.psi.components.iter().enumerate() {
                let nj = &n.0[j];
                if nj.is_zero() {
                    continue;
                }
                let mut next = Vec::new();
                for a in &acc {
                    for p in &comp.pieces {
                        next.push(Affine::new(a.coef.add(&p.coef.scale(nj)), &a.c + &p.c * nj));
                    }
                }
                next.sort();
                next.dedup();
                acc = next;
            }
            offsets.push(ConcavePWL { pieces: acc });
        }
        ParamPoly::new(ws, self.psi.xdim, normals, offsets, self.psi.domain.clone()).ok()
    }
}

pub type OracleEval = dyn Fn(&Workspace, &Vector) -> UpperSet + Send + Sync;

/// Function known only through evaluations; values are inner approximations at rational precision.
#[derive(Clone)]
pub struct Oracle {
    pub name: String,
    pub xdim: usize,
    pub convex: bool,
    pub tolerance: Q,
    pub eval: Arc<OracleEval>,
}

impl fmt::Debug for Oracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Oracle({})", self.name)
    }
}

#[derive(Clone, Debug)]
pub enum SetFunction {
    ParamPoly(ParamPoly),
    EpiVector(EpiVector),
    Oracle(Oracle),
}

impl SetFunction {
    pub fn xdim(&self) -> usize {
        match self {
            SetFunction::ParamPoly(p) => p.xdim,
            SetFunction::EpiVector(e) => e.psi.xdim,
            SetFunction::Oracle(o) => o.xdim,
        }
    }

    pub fn eval(&self, ws: &Workspace, x: &Vector) -> UpperSet {
        assert_eq!(x.dim(), self.xdim(), "argument dimension");
        match self {
            SetFunction::ParamPoly(p) => p.eval(ws, x),
            SetFunction::EpiVector(e) => e.eval(ws, x),
            SetFunction::Oracle(o) => (o.eval)(ws, x),
        }
    }

    pub fn in_domain(&self, ws: &Workspace, x: &Vector) -> bool {
        !self.eval(ws, x).is_empty()
    }

    /// Exact classes have certified derivatives and semicontinuity.
    pub fn is_exact(&self) -> bool {
        !matches!(self, SetFunction::Oracle(_))
    }

    pub fn as_parampoly(&self) -> Option<&ParamPoly> {
        match self {
            SetFunction::ParamPoly(p) => Some(p),
            _ => None,
        }
    }

    pub fn declared_convex(&self) -> bool {
        match self {
            SetFunction::Oracle(o) => o.convex,
            _ => true,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            SetFunction::ParamPoly(_) => "parampoly",
            SetFunction::EpiVector(_) => "epivector",
            SetFunction::Oracle(_) => "oracle",
        }
    }

    /// `φ_{f,z*}(x)`.
    pub fn scalarize(&self, ws: &Workspace, zstar: &Vector, x: &Vector) -> ExtReal {
        ws.neg_support(zstar, &self.eval(ws, x))
    }

    /// `f_{z*}(x)`.
    pub fn level_function(&self, ws: &Workspace, zstar: &Vector, x: &Vector) -> UpperSet {
        ws.level_set(zstar, &self.scalarize(ws, zstar, x))
    }

    /// `f̂(x; M) = inf_{m ∈ M} f(m + x)` for a finite `M`.
    pub fn inf_translation_finite(&self, ws: &Workspace, m: &[Vector], x: &Vector) -> Result<UpperSet, SetFunError> {
        if m.is_empty() {
            return Err(SetFunError::EmptyTranslationSet);
        }
        let vals: Vec<UpperSet> = m.iter().map(|mi| self.eval(ws, &mi.add(x))).collect();
        Ok(ws.inf_family(&vals))
    }

    /// `f̂(·; co M)` as a set function. Exact for parametric polyhedra and convertible epigraphs;
    /// otherwise the hull of values at `M`'s points (an inner bound), flagged by `exact = false`.
    pub fn inf_translation_hull(&self, ws: &Workspace, m: &[Vector]) -> Result<(SetFunction, bool), SetFunError> {
        if m.is_empty() {
            return Err(SetFunError::EmptyTranslationSet);
        }
        let pp = match self {
            SetFunction::ParamPoly(p) => Some(p.clone()),
            SetFunction::EpiVector(e) => e.to_parampoly(ws),
            SetFunction::Oracle(_) => None,
        };
        if let Some(p) = pp {
            return Ok((SetFunction::ParamPoly(p.inf_translate(ws, m)?), true));
        }
        let base = self.clone();
        let pts = m.to_vec();
        let xdim = self.xdim();
        let name = format!("inf-translation of {}", self.kind());
        let eval = move |w: &Workspace, x: &Vector| base.inf_translation_finite(w, &pts, x).expect("nonempty");
        Ok((
            SetFunction::Oracle(Oracle { name, xdim, convex: true, tolerance: q(0), eval: Arc::new(eval) }),
            false,
        ))
    }

    /// `f(t x1 + (1−t) x2) ≼ t f(x1) ⊕ (1−t) f(x2)`.
    pub fn convexity_holds(&self, ws: &Workspace, x1: &Vector, x2: &Vector, t: &Q) -> bool {
        let t1 = q(1) - t;
        let mid = x1.scale(t).add(&x2.scale(&t1));
        let rhs = ws.add(&ws.scale(t, &self.eval(ws, x1)).unwrap(), &ws.scale(&t1, &self.eval(ws, x2)).unwrap());
        ws.leq(&self.eval(ws, &mid), &rhs)
    }
}

/// `t ↦ f(x0 + t (x − x0))` on `[0,1]`, `∅` elsewhere.
#[derive(Clone, Debug)]
pub struct Segment {
    pub x0: Vector,
    pub x: Vector,
}

impl Segment {
    pub fn new(x0: Vector, x: Vector) -> Self {
        Segment { x0, x }
    }

    pub fn point(&self, t: &Q) -> Vector {
        self.x0.axpy(t, &self.x.sub(&self.x0))
    }

    pub fn eval(&self, ws: &Workspace, f: &SetFunction, t: &Q) -> UpperSet {
        if t.is_negative() || t > &q(1) {
            return UpperSet::Empty;
        }
        f.eval(ws, &self.point(t))
    }
}

/// Finite stand-in for a neighbourhood base: decreasing radii with sample counts.
#[derive(Clone, Debug)]
pub struct LscProbe {
    pub radii: Vec<Q>,
    pub samples: usize,
}

impl Default for LscProbe {
    fn default() -> Self {
        LscProbe { radii: (0..8).map(|k| q(1) / q(1 << (2 * k))).collect(), samples: 6 }
    }
}

impl LscProbe {
    pub fn validate(&self) -> Result<(), SetFunError> {
        let ok = !self.radii.is_empty()
            && self.samples >= 1
            && self.radii.iter().all(|r| r.is_positive())
            && self.radii.windows(2).all(|w| w[0] > w[1]);
        if ok {
            Ok(())
        } else {
            Err(SetFunError::Invalid("radius schedule must be positive and strictly decreasing".into()))
        }
    }

    fn ts(&self, r: &Q) -> Vec<Q> {
        (1..=self.samples).map(|k| r * q(k as i64) / q(self.samples as i64)).collect()
    }
}

/// A row offset along a segment as `Σ_j c_j · m_j(s)`, each `m_j` the min (or max) of affine
/// pieces `a + s·slope`.
struct RowAlong {
    normal: Vector,
    terms: Vec<(Q, bool, Vec<(Q, Q)>)>,
}

impl RowAlong {
    fn eval(&self, s: &Q) -> Q {
        let mut acc = Q::zero();
        for (c, is_min, pieces) in &self.terms {
            let vals = pieces.iter().map(|(a, sl)| a + s * sl);
            let m = if *is_min { vals.min().unwrap() } else { vals.max().unwrap() };
            acc += c * m;
        }
        acc
    }

    fn eval_f64(&self, s: f64) -> f64 {
        let mut acc = 0.0;
        for (c, is_min, pieces) in &self.terms {
            let vals = pieces.iter().map(|(a, sl)| to_f64(a) + s * to_f64(sl));
            let m = if *is_min { vals.fold(f64::INFINITY, f64::min) } else { vals.fold(f64::NEG_INFINITY, f64::max) };
            acc += to_f64(c) * m;
        }
        acc
    }

    fn breakpoints(&self, out: &mut Vec<Q>) {
        for (_, _, pieces) in &self.terms {
            for (i, (a, s)) in pieces.iter().enumerate() {
                for (b, t) in &pieces[i + 1..] {
                    if s != t {
                        out.push((b - a) / (s - t));
                    }
                }
            }
        }
    }
}

fn solve2(n1: &Vector, n2: &Vector, b1: &Q, b2: &Q) -> Vector {
    let det = crate::rat::cross(n1, n2);
    let x = (b1 * &n2.0[1] - b2 * &n1.0[1]) / &det;
    let y = (&n1.0[0] * b2 - &n2.0[0] * b1) / &det;
    Vector::new(vec![x, y])
}

/// Parameters `s ∈ (0, 1]` at which the combinatorial structure of `f(x0 + s(x − x0))` can change:
/// piece breakpoints, domain exits, coinciding parallel rows, rows passing through a vertex and
/// offsets crossing the support of `f(x0)`. Between consecutive events every row offset, vertex
/// and tight set is affine or constant. `None` for oracles.
pub fn segment_events(ws: &Workspace, f: &SetFunction, x0: &Vector, x: &Vector) -> Option<Vec<Q>> {
    events_along(ws, f, x0, &f.eval(ws, x0), x, false)
}

/// The smallest entry of [`segment_events`], found without scanning past it; `fx0` is `f(x0)`.
pub fn first_segment_event(ws: &Workspace, f: &SetFunction, x0: &Vector, fx0: &UpperSet, x: &Vector) -> Option<Q> {
    events_along(ws, f, x0, fx0, x, true).map(|e| e[0].clone())
}

fn events_along(ws: &Workspace, f: &SetFunction, x0: &Vector, fx0: &UpperSet, x: &Vector, first_only: bool) -> Option<Vec<Q>> {
    let u = x.sub(x0);
    let (rows, dom): (Vec<RowAlong>, &Domain) = match f {
        SetFunction::ParamPoly(p) => (
            p.normals
                .iter()
                .zip(&p.offsets)
                .map(|(n, o)| RowAlong {
                    normal: n.clone(),
                    terms: vec![(q(1), true, o.pieces.iter().map(|a| a.along(x0, &u)).collect())],
                })
                .collect(),
            &p.domain,
        ),
        SetFunction::EpiVector(e) => (
            ws.cone
                .facet_normals
                .iter()
                .map(|n| RowAlong {
                    normal: n.clone(),
                    terms: e
                        .psi
                        .components
                        .iter()
                        .zip(&n.0)
                        .filter(|(_, c)| !c.is_zero())
                        .map(|(comp, c)| (c.clone(), false, comp.pieces.iter().map(|a| a.along(x0, &u)).collect()))
                        .collect(),
                })
                .collect(),
            &e.psi.domain,
        ),
        SetFunction::Oracle(_) => return None,
    };
    let in_range = |s: &Q| s.is_positive() && *s < q(1);
    let mut cuts = vec![q(0), q(1)];
    for r in &rows {
        r.breakpoints(&mut cuts);
    }
    for (a, c) in &dom.halfspaces {
        let sl = a.dot(&u);
        if !sl.is_zero() {
            cuts.push((c - a.dot(x0)) / sl);
        }
    }
    cuts.retain(|s| in_range(s) || s.is_zero() || *s == q(1));
    cuts.sort();
    cuts.dedup();
    let base: Vec<Option<Q>> = rows.iter().map(|r| ws.support(&r.normal, fx0).finite().cloned()).collect();
    let m = rows.len();
    let mut events: Vec<Q> = cuts.iter().filter(|s| s.is_positive()).cloned().collect();
    let fnormals: Vec<[f64; 2]> = rows.iter().map(|r| [to_f64(&r.normal.0[0]), r.normal.0.get(1).map(to_f64).unwrap_or(0.0)]).collect();
    let windows = if first_only { 1 } else { cuts.len() - 1 };
    let mut vertex_events = Vec::new();
    for w in cuts.windows(2).take(windows) {
        let (l, r) = (&w[0], &w[1]);
        let bl: Vec<Q> = rows.iter().map(|row| row.eval(l)).collect();
        let br: Vec<Q> = rows.iter().map(|row| row.eval(r)).collect();
        let mut root = |gl: Q, gr: Q| {
            if (gl.is_positive() && gr.is_negative()) || (gl.is_negative() && gr.is_positive()) {
                events.push(l + &gl * (r - l) / (&gl - &gr));
            }
        };
        for k in 0..m {
            if let Some(sig) = &base[k] {
                root(&bl[k] - sig, &br[k] - sig);
            }
        }
        let (fl, fr) = (to_f64s(&bl), to_f64s(&br));
        for i in 0..m {
            let ni = &rows[i].normal;
            for j in (i + 1)..m {
                let nj = &rows[j].normal;
                if ws.dim == 1 || crate::rat::cross(ni, nj).is_zero() {
                    let c = ni.0.iter().position(|c| !c.is_zero()).unwrap();
                    let lam = &nj.0[c] / &ni.0[c];
                    root(bk_minus(&bl, j, i, &lam), bk_minus(&br, j, i, &lam));
                    continue;
                }
                let (ai, aj) = (&fnormals[i], &fnormals[j]);
                let (wl, wr) = (solve2_f64(ai, aj, fl[i], fl[j]), solve2_f64(ai, aj, fr[i], fr[j]));
                let mut exact: Option<(Vector, Vector)> = None;
                for k in 0..m {
                    if k == i || k == j {
                        continue;
                    }
                    // skip rows that clearly stay on one side of the vertex
                    let ak = &fnormals[k];
                    let side = |w: [f64; 2], b: f64| {
                        let g = ak[0] * w[0] + ak[1] * w[1] - b;
                        let err = 1e-9 * (1.0 + ak[0].abs() * w[0].abs() + ak[1].abs() * w[1].abs() + b.abs());
                        if g > err { 1 } else if g < -err { -1 } else { 0 }
                    };
                    let (sl, sr) = (side(wl, fl[k]), side(wr, fr[k]));
                    if sl != 0 && sl == sr {
                        continue;
                    }
                    let (vl, vr) = exact.get_or_insert_with(|| (solve2(ni, nj, &bl[i], &bl[j]), solve2(ni, nj, &br[i], &br[j])));
                    let nk = &rows[k].normal;
                    let (gl, gr) = (nk.dot(vl) - &bl[k], nk.dot(vr) - &br[k]);
                    if gl.is_positive() == gr.is_positive() || gl.is_zero() || gr.is_zero() {
                        continue;
                    }
                    // only a feasible vertex crossing a row changes the shape
                    let t = l + &gl * (r - l) / (&gl - &gr);
                    let tf = to_f64(&t);
                    let bf: Vec<f64> = rows.iter().map(|row| row.eval_f64(tf)).collect();
                    let w = solve2_f64(ai, aj, bf[i], bf[j]);
                    let clearly_infeasible = fnormals.iter().zip(&bf).any(|(a, b)| {
                        let g = a[0] * w[0] + a[1] * w[1] - b;
                        g > 1e-9 * (1.0 + a[0].abs() * w[0].abs() + a[1].abs() * w[1].abs() + b.abs())
                    });
                    if clearly_infeasible {
                        continue;
                    }
                    let b: Vec<Q> = rows.iter().map(|row| row.eval(&t)).collect();
                    let v = solve2(ni, nj, &b[i], &b[j]);
                    if rows.iter().zip(&b).all(|(row, bk)| row.normal.dot(&v) <= *bk) {
                        vertex_events.push(t);
                    }
                }
            }
        }
    }
    events.extend(vertex_events);
    events.sort();
    events.dedup();
    Some(events)
}

fn to_f64s(b: &[Q]) -> Vec<f64> {
    b.iter().map(to_f64).collect()
}

fn solve2_f64(n1: &[f64; 2], n2: &[f64; 2], b1: f64, b2: f64) -> [f64; 2] {
    let det = n1[0] * n2[1] - n1[1] * n2[0];
    if det.abs() < 1e-6 * (n1[0].abs() + n1[1].abs()) * (n2[0].abs() + n2[1].abs()) {
        // ill-conditioned: NaN sends every comparison to the exact path
        return [f64::NAN; 2];
    }
    [(b1 * n2[1] - b2 * n1[1]) / det, (n1[0] * b2 - n2[0] * b1) / det]
}

fn bk_minus(b: &[Q], k: usize, i: usize, lam: &Q) -> Q {
    &b[k] - lam * &b[i]
}

/// Sample parameters for the star of `x0` towards `x`: the events, the midpoints between
/// consecutive events (and between 0 and the first one), and `s = 1`. Oracles get a fixed
/// dyadic sample.
pub fn star_parameters(ws: &Workspace, f: &SetFunction, x0: &Vector, x: &Vector) -> Vec<Q> {
    let Some(events) = segment_events(ws, f, x0, x) else {
        return vec![qr(1, 8), qr(1, 4), qr(1, 2), qr(3, 4), q(1)];
    };
    let mut out = Vec::new();
    let mut prev = q(0);
    for e in events {
        out.push((&prev + &e) / q(2));
        out.push(e.clone());
        prev = e;
    }
    if prev < q(1) {
        out.push((&prev + q(1)) / q(2));
        out.push(q(1));
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LscVerdict {
    pub holds: bool,
    pub witness_radius: Option<Q>,
    pub approximate: bool,
}

/// Lattice l.s.c. of the segment restriction at `t = 0`.
pub fn lattice_lsc_probe(ws: &Workspace, f: &SetFunction, x0: &Vector, x: &Vector, probe: &LscProbe) -> LscVerdict {
    if f.is_exact() {
        // closed polyhedral graph on a closed domain
        return LscVerdict { holds: true, witness_radius: None, approximate: false };
    }
    let seg = Segment::new(x0.clone(), x.clone());
    let v0 = seg.eval(ws, f, &q(0));
    let mut acc: Vec<UpperSet> = Vec::new();
    for r in &probe.radii {
        let mut vals: Vec<UpperSet> = probe.ts(r).iter().map(|t| seg.eval(ws, f, t)).collect();
        vals.push(v0.clone());
        acc.push(ws.inf_family(&vals));
        let lim = ws.sup_family(&acc);
        if !ws.leq(&v0, &lim) {
            return LscVerdict { holds: false, witness_radius: Some(r.clone()), approximate: true };
        }
    }
    LscVerdict { holds: true, witness_radius: None, approximate: true }
}

/// Scalar l.s.c. of `t ↦ φ_{f,z*}(x_t)` at `0` for each direction; returns the failing ones.
pub fn cminus_lsc_probe(
    ws: &Workspace,
    f: &SetFunction,
    x0: &Vector,
    x: &Vector,
    dirs: &[Vector],
    probe: &LscProbe,
) -> (Vec<Vector>, bool) {
    if f.is_exact() {
        return (vec![], false);
    }
    let seg = Segment::new(x0.clone(), x.clone());
    let tol = match f {
        SetFunction::Oracle(o) => o.tolerance.clone(),
        _ => Q::zero(),
    };
    let mut failing = Vec::new();
    for d in dirs {
        let phi0 = ws.neg_support(d, &seg.eval(ws, f, &q(0)));
        // liminf as sup over radii of the sampled infima
        let mut lim = ExtReal::MinusInf;
        for r in &probe.radii {
            let inf = probe.ts(r).iter().map(|t| ws.neg_support(d, &seg.eval(ws, f, t))).min().unwrap();
            let inf = std::cmp::min(inf, phi0.clone());
            lim = std::cmp::max(lim, inf);
        }
        let ok = match (&phi0, &lim) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a <= &(b + &tol),
            _ => phi0 <= lim,
        };
        if !ok {
            failing.push(d.clone());
        }
    }
    (failing, true)
}

#[cfg(test)]
mod tests;
