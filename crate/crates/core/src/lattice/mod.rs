//! The complete lattice G(Z,C) of upper closed convex sets for Z = R or R².
//!
//! One-dimensional workspaces are embedded into the plane as `A × R` with the cone `C × R`;
//! all lattice operations commute with that embedding, so a single exact planar kernel serves both.

pub(crate) mod geom;

use crate::extres::ExtReal;
use crate::rat::{fmt_q, Vector, Q};
use geom::{cone_shape, polar, ConeShape, Half, Poly2};
use num::{Signed, Zero};
use serde_json::{json, Value};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum KernelError {
    #[error("normal {0} is not in the negative dual cone")]
    NormalOutsideDualCone(Vector),
    #[error("zero normal vector")]
    ZeroNormal,
    #[error("negative scalar {0}")]
    NegativeScalar(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid workspace: {0}")]
    InvalidWorkspace(String),
    #[error("direction {0} is not in the negative dual cone")]
    DirectionOutsideDualCone(Vector),
}

/// Polyhedral ordering cone `C = cone(generators)`.
#[derive(Clone, Debug)]
pub struct OrderCone {
    pub generators: Vec<Vector>,
    pub facet_normals: Vec<Vector>,
    lifted: ConeShape,
    lifted_gens: Vec<Vector>,
}

impl OrderCone {
    pub fn contains(&self, v: &Vector, dim: usize) -> bool {
        self.lifted.contains(&lift(v, dim))
    }

    /// Membership in the lineality space `C ∩ −C`.
    pub fn in_lineality(&self, v: &Vector, dim: usize) -> bool {
        let l = lift(v, dim);
        self.lifted.contains(&l) && self.lifted.contains(&l.neg())
    }

    pub fn is_pointed(&self) -> bool {
        self.lineality_dim() == 0
    }

    fn lineality_dim(&self) -> usize {
        // the lifted second axis is artificial in dimension one and counted by the caller
        match self.lifted {
            ConeShape::Line(_) | ConeShape::HalfPlane(_) => 1,
            ConeShape::Plane => 2,
            _ => 0,
        }
    }
}

/// Finite sample of `C^- \ {0}`, primitive integer vectors without duplicates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectionSet {
    pub items: Vec<Vector>,
}

#[derive(Clone, Debug)]
pub struct Workspace {
    pub dim: usize,
    pub cone: OrderCone,
    pub directions: DirectionSet,
}

fn lift(v: &Vector, dim: usize) -> Vector {
    if dim == 1 {
        Vector::new(vec![v.0[0].clone(), Q::zero()])
    } else {
        v.clone()
    }
}

fn project(v: &Vector, dim: usize) -> Vector {
    if dim == 1 {
        Vector::new(vec![v.0[0].clone()])
    } else {
        v.clone()
    }
}

impl Workspace {
    /// Builds a workspace; `extra_directions` are added to the cone's facet normals.
    pub fn new(dim: usize, generators: Vec<Vector>, extra_directions: Vec<Vector>) -> Result<Self, KernelError> {
        if dim != 1 && dim != 2 {
            return Err(KernelError::InvalidWorkspace(format!("dimension {dim} unsupported by the exact kernel")));
        }
        for g in generators.iter().chain(&extra_directions) {
            if g.dim() != dim {
                return Err(KernelError::DimensionMismatch { expected: dim, got: g.dim() });
            }
        }
        let mut lifted_gens: Vec<Vector> = generators.iter().filter(|g| !g.is_zero()).map(|g| lift(g, dim)).collect();
        if dim == 1 {
            lifted_gens.push(Vector::ints(&[0, 1]));
            lifted_gens.push(Vector::ints(&[0, -1]));
        }
        let lifted = cone_shape(&lifted_gens);
        let dual = polar(&lifted_gens);
        if dual == ConeShape::Zero {
            return Err(KernelError::InvalidWorkspace("negative dual cone is trivial".into()));
        }
        let lifted_gens = lifted.generators();
        let facet_normals: Vec<Vector> = lifted.normals().iter().map(|n| project(n, dim)).collect();
        let cone = OrderCone { generators: generators.clone(), facet_normals: facet_normals.clone(), lifted, lifted_gens };
        let mut items = facet_normals;
        for d in extra_directions {
            if d.is_zero() {
                return Err(KernelError::ZeroNormal);
            }
            let p = d.primitive();
            if !cone.lifted_gens.iter().all(|g| !lift(&p, dim).dot(g).is_positive()) {
                return Err(KernelError::DirectionOutsideDualCone(d));
            }
            items.push(p);
        }
        items.sort();
        items.dedup();
        Ok(Workspace { dim, cone, directions: DirectionSet { items } })
    }

    /// `Z = R²`, `C = R²₊`.
    pub fn orthant2() -> Self {
        Workspace::new(2, vec![Vector::ints(&[1, 0]), Vector::ints(&[0, 1])], vec![]).unwrap()
    }

    /// Same cone, different direction sample.
    pub fn with_directions(&self, extra: Vec<Vector>) -> Result<Self, KernelError> {
        let mut all = self.directions.items.clone();
        all.extend(extra);
        Workspace::new(self.dim, self.cone.generators.clone(), all)
    }

    pub fn in_dual(&self, n: &Vector) -> bool {
        n.dim() == self.dim && self.cone.lifted_gens.iter().all(|g| !lift(n, self.dim).dot(g).is_positive())
    }

    fn check_dim(&self, v: &Vector) -> Result<(), KernelError> {
        if v.dim() != self.dim {
            return Err(KernelError::DimensionMismatch { expected: self.dim, got: v.dim() });
        }
        Ok(())
    }

    fn wrap(&self, p: Option<Poly2>) -> UpperSet {
        match p {
            None => UpperSet::Empty,
            Some(p) => UpperSet::Poly(PolySet { dim: self.dim, inner: p }),
        }
    }

    /// Normal form of `{z : ⟨n_i, z⟩ ≤ b_i}`.
    pub fn canonicalize(&self, raw: &[(Vector, Q)]) -> Result<UpperSet, KernelError> {
        let mut cons: Vec<Half> = Vec::with_capacity(raw.len());
        for (n, b) in raw {
            self.check_dim(n)?;
            if n.is_zero() {
                return Err(KernelError::ZeroNormal);
            }
            if !self.in_dual(n) {
                return Err(KernelError::NormalOutsideDualCone(n.clone()));
            }
            cons.push((lift(n, self.dim), b.clone()));
        }
        Ok(self.from_lifted_h(&cons))
    }

    fn from_lifted_h(&self, cons: &[Half]) -> UpperSet {
        if cons.is_empty() {
            return self.all();
        }
        self.wrap(Poly2::from_h(cons))
    }

    fn from_lifted_v(&self, points: &[Vector], rays: &[Vector]) -> UpperSet {
        if points.is_empty() {
            return UpperSet::Empty;
        }
        let mut r: Vec<Vector> = rays.to_vec();
        r.extend(self.cone.lifted_gens.iter().cloned());
        self.wrap(Some(Poly2::from_v(points, &r)))
    }

    /// `conv(points) + cone(rays) + C`.
    pub fn from_vrep(&self, points: &[Vector], rays: &[Vector]) -> Result<UpperSet, KernelError> {
        for v in points.iter().chain(rays) {
            self.check_dim(v)?;
        }
        let p: Vec<Vector> = points.iter().map(|v| lift(v, self.dim)).collect();
        let r: Vec<Vector> = rays.iter().map(|v| lift(v, self.dim)).collect();
        Ok(self.from_lifted_v(&p, &r))
    }

    pub fn all(&self) -> UpperSet {
        UpperSet::Poly(PolySet { dim: self.dim, inner: Poly2::plane() })
    }

    pub fn empty(&self) -> UpperSet {
        UpperSet::Empty
    }

    /// The ordering cone as a lattice element (the neutral element of ⊕).
    pub fn cone_set(&self) -> UpperSet {
        self.from_lifted_v(&[Vector::zeros(2)], &[])
    }

    /// `{p} + C`.
    pub fn translated_cone(&self, p: &Vector) -> UpperSet {
        assert_eq!(p.dim(), self.dim, "point dimension");
        self.from_lifted_v(&[lift(p, self.dim)], &[])
    }

    /// `a ≼ b`, i.e. `b ⊆ a`.
    pub fn leq(&self, a: &UpperSet, b: &UpperSet) -> bool {
        match (a, b) {
            (_, UpperSet::Empty) => true,
            (UpperSet::Empty, _) => false,
            (UpperSet::Poly(pa), UpperSet::Poly(pb)) => pa.inner.includes(&pb.inner),
        }
    }

    pub fn inf_family(&self, sets: &[UpperSet]) -> UpperSet {
        let mut pts = Vec::new();
        let mut rays = Vec::new();
        for s in sets {
            if let UpperSet::Poly(p) = s {
                if p.inner.is_plane() {
                    return self.all();
                }
                pts.extend(p.inner.points.iter().cloned());
                rays.extend(p.inner.rays.iter().cloned());
            }
        }
        self.from_lifted_v(&pts, &rays)
    }

    pub fn sup_family(&self, sets: &[UpperSet]) -> UpperSet {
        let mut cons = Vec::new();
        for s in sets {
            match s {
                UpperSet::Empty => return UpperSet::Empty,
                UpperSet::Poly(p) => cons.extend(p.inner.facets.iter().cloned()),
            }
        }
        self.from_lifted_h(&cons)
    }

    pub fn inf(&self, a: &UpperSet, b: &UpperSet) -> UpperSet {
        self.inf_family(&[a.clone(), b.clone()])
    }

    pub fn sup(&self, a: &UpperSet, b: &UpperSet) -> UpperSet {
        self.sup_family(&[a.clone(), b.clone()])
    }

    /// `a ⊕ b`.
    pub fn add(&self, a: &UpperSet, b: &UpperSet) -> UpperSet {
        match (a, b) {
            (UpperSet::Empty, _) | (_, UpperSet::Empty) => UpperSet::Empty,
            (UpperSet::Poly(pa), UpperSet::Poly(pb)) => {
                if pa.inner.is_plane() || pb.inner.is_plane() {
                    return self.all();
                }
                let mut pts = Vec::with_capacity(pa.inner.points.len() * pb.inner.points.len());
                for x in &pa.inner.points {
                    for y in &pb.inner.points {
                        pts.push(x.add(y));
                    }
                }
                let mut rays = pa.inner.rays.clone();
                rays.extend(pb.inner.rays.iter().cloned());
                self.from_lifted_v(&pts, &rays)
            }
        }
    }

    /// `t · a` with `0 · a = C`.
    pub fn scale(&self, t: &Q, a: &UpperSet) -> Result<UpperSet, KernelError> {
        if t.is_negative() {
            return Err(KernelError::NegativeScalar(fmt_q(t)));
        }
        if t.is_zero() {
            return Ok(self.cone_set());
        }
        Ok(match a {
            UpperSet::Empty => UpperSet::Empty,
            UpperSet::Poly(p) => UpperSet::Poly(PolySet {
                dim: p.dim,
                inner: Poly2 {
                    facets: p.inner.facets.iter().map(|(n, b)| (n.clone(), b * t)).collect(),
                    points: p.inner.points.iter().map(|x| x.scale(t)).collect(),
                    rays: p.inner.rays.clone(),
                },
            }),
        })
    }

    /// `a ÷ b = {z : b + z ⊆ a}`.
    pub fn residual_diff(&self, a: &UpperSet, b: &UpperSet) -> UpperSet {
        let pb = match b {
            UpperSet::Empty => return self.all(),
            UpperSet::Poly(p) => p,
        };
        let pa = match a {
            UpperSet::Empty => return UpperSet::Empty,
            UpperSet::Poly(p) => p,
        };
        let mut cons = Vec::with_capacity(pa.inner.facets.len());
        for (n, beta) in &pa.inner.facets {
            let sigma = support_lifted(&pb.inner, n);
            match ExtReal::Finite(beta.clone()).residual(&sigma) {
                ExtReal::Finite(v) => cons.push((n.clone(), v)),
                ExtReal::MinusInf => return UpperSet::Empty,
                ExtReal::PlusInf => {}
            }
        }
        self.from_lifted_h(&cons)
    }

    /// `0⁺a`.
    pub fn recession(&self, a: &UpperSet) -> UpperSet {
        match a {
            UpperSet::Empty => UpperSet::Empty,
            UpperSet::Poly(p) => {
                let cons: Vec<Half> = p.inner.facets.iter().map(|(n, _)| (n.clone(), Q::zero())).collect();
                self.from_lifted_h(&cons)
            }
        }
    }

    /// `σ(z* | a)`.
    pub fn support(&self, zstar: &Vector, a: &UpperSet) -> ExtReal {
        assert!(!zstar.is_zero(), "support needs a nonzero direction");
        match a {
            UpperSet::Empty => ExtReal::MinusInf,
            UpperSet::Poly(p) => support_lifted(&p.inner, &lift(zstar, self.dim)),
        }
    }

    /// `−σ(z* | a)`, the scalarization value.
    pub fn neg_support(&self, zstar: &Vector, a: &UpperSet) -> ExtReal {
        self.support(zstar, a).neg()
    }

    /// The level halfspace `{z : v ≤ −⟨z*, z⟩}` (Empty for `+∞`, Z for `−∞`).
    pub fn level_set(&self, zstar: &Vector, v: &ExtReal) -> UpperSet {
        match v {
            ExtReal::PlusInf => UpperSet::Empty,
            ExtReal::MinusInf => self.all(),
            ExtReal::Finite(x) => self.from_lifted_h(&[(lift(zstar, self.dim), -x.clone())]),
        }
    }

    /// Intersection of the scalarization halfspaces of `a` over the direction sample.
    pub fn scalar_hull(&self, a: &UpperSet) -> UpperSet {
        let levels: Vec<UpperSet> =
            self.directions.items.iter().map(|d| self.level_set(d, &self.neg_support(d, a))).collect();
        self.sup_family(&levels)
    }

    pub fn contains(&self, a: &UpperSet, z: &Vector) -> bool {
        match a {
            UpperSet::Empty => false,
            UpperSet::Poly(p) => p.inner.contains(&lift(z, self.dim)),
        }
    }

    /// Whether `a ∩ (−K) ≠ ∅` for the closed convex cone `K`.
    pub fn meets_negative_cone(&self, a: &UpperSet, k: &UpperSet) -> bool {
        let (pa, pk) = match (a, k) {
            (UpperSet::Poly(pa), UpperSet::Poly(pk)) => (pa, pk),
            _ => return false,
        };
        let mut cons: Vec<Half> = pa.inner.facets.clone();
        cons.extend(pk.inner.facets.iter().map(|(n, b)| (n.neg(), b.clone())));
        geom::is_feasible(&cons)
    }

    /// JSON form; rationals as strings, primitive normals as integers.
    pub fn to_json(&self, a: &UpperSet) -> Value {
        a.to_json()
    }

    /// Reads a set written by [`UpperSet::to_json`] (only the constraints are used) or the shorthands
    /// `{"tag":"all"}`, `{"tag":"cone"}` and `{"tag":"point","point":[..]}`.
    pub fn upper_from_json(&self, v: &Value) -> Result<UpperSet, String> {
        let tag = v.get("tag").and_then(Value::as_str).ok_or("set needs a \"tag\"")?;
        match tag {
            "empty" => Ok(UpperSet::Empty),
            "all" => Ok(self.all()),
            "cone" => Ok(self.cone_set()),
            "point" => {
                let p = crate::json::vector(v.get("point").ok_or("point set needs \"point\"")?)?;
                if p.dim() != self.dim {
                    return Err(format!("point dimension {} differs from workspace dimension {}", p.dim(), self.dim));
                }
                Ok(self.translated_cone(&p))
            }
            "poly" => {
                let cons = v.get("constraints").and_then(Value::as_array).ok_or("poly set needs \"constraints\"")?;
                let mut raw = Vec::new();
                for c in cons {
                    let n = crate::json::vector(c.get("n").ok_or("constraint needs \"n\"")?)?;
                    let b = crate::json::rational(c.get("b").ok_or("constraint needs \"b\"")?)?;
                    raw.push((n, b));
                }
                self.canonicalize(&raw).map_err(|e| e.to_string())
            }
            other => Err(format!("unknown set tag {other}")),
        }
    }
}

fn support_lifted(p: &Poly2, d: &Vector) -> ExtReal {
    match p.support(d) {
        None => ExtReal::PlusInf,
        Some(v) => ExtReal::Finite(v),
    }
}

/// Nonempty polyhedron in canonical form; the planar data is the lifted representation.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PolySet {
    dim: usize,
    inner: Poly2,
}

/// An element of G(Z,C).
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum UpperSet {
    Empty,
    Poly(PolySet),
}

impl UpperSet {
    pub fn is_empty(&self) -> bool {
        matches!(self, UpperSet::Empty)
    }

    pub fn is_all(&self) -> bool {
        matches!(self, UpperSet::Poly(p) if p.inner.is_plane())
    }

    /// Irredundant constraints `⟨n, z⟩ ≤ b` with primitive integer normals.
    pub fn constraints(&self) -> Vec<(Vector, Q)> {
        match self {
            UpperSet::Empty => vec![],
            UpperSet::Poly(p) => p.inner.facets.iter().map(|(n, b)| (project(n, p.dim), b.clone())).collect(),
        }
    }

    /// Extreme points, or canonical points of the minimal face when C has a lineality line.
    pub fn vertices(&self) -> Vec<Vector> {
        match self {
            UpperSet::Empty => vec![],
            UpperSet::Poly(p) => p.inner.points.iter().map(|x| project(x, p.dim)).collect(),
        }
    }

    pub fn rays(&self) -> Vec<Vector> {
        match self {
            UpperSet::Empty => vec![],
            UpperSet::Poly(p) => {
                let mut r: Vec<Vector> =
                    p.inner.rays.iter().map(|x| project(x, p.dim)).filter(|x| !x.is_zero()).collect();
                r.sort();
                r.dedup();
                r
            }
        }
    }

    pub fn affine_dim(&self) -> Option<usize> {
        match self {
            UpperSet::Empty => None,
            UpperSet::Poly(p) => Some(if p.dim == 1 { p.inner.affine_dim() - 1 } else { p.inner.affine_dim() }),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            UpperSet::Empty => json!({"tag": "empty"}),
            UpperSet::Poly(_) => {
                let cons: Vec<Value> = self
                    .constraints()
                    .iter()
                    .map(|(n, b)| json!({"n": crate::json::int_vector(n), "b": fmt_q(b)}))
                    .collect();
                let verts: Vec<Value> = self.vertices().iter().map(crate::json::rat_vector).collect();
                let rays: Vec<Value> = self.rays().iter().map(crate::json::int_vector).collect();
                json!({"tag": "poly", "constraints": cons, "vertices": verts, "rays": rays})
            }
        }
    }

    /// Short human-readable description.
    pub fn describe(&self) -> String {
        match self {
            UpperSet::Empty => "Empty".into(),
            s if s.is_all() => "Z".into(),
            s => {
                let parts: Vec<String> = s
                    .constraints()
                    .iter()
                    .map(|(n, b)| {
                        let terms: Vec<String> = n.0.iter().enumerate().map(|(i, c)| format!("{}*z{}", fmt_q(c), i + 1)).collect();
                        format!("{} <= {}", terms.join(" + "), fmt_q(b))
                    })
                    .collect();
                format!("{{{}}}", parts.join(", "))
            }
        }
    }
}

impl fmt::Debug for UpperSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.describe())
    }
}
