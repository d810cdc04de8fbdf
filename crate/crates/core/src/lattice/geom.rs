//! Exact planar polyhedra: cone classification, H/V conversion and canonical forms.
//!
//! Everything here works in R². One-dimensional workspaces are lifted by the caller.

use crate::rat::{cross, perp, v2, Vector, Q};
use num::{One, Signed, Zero};
use std::cmp::Ordering;

/// Halfspace `⟨n, z⟩ ≤ b`.
pub(crate) type Half = (Vector, Q);

fn upper(v: &Vector) -> bool {
    v.y().is_positive() || (v.y().is_zero() && v.x().is_positive())
}

fn angle_cmp(a: &Vector, b: &Vector) -> Ordering {
    match (upper(a), upper(b)) {
        (true, false) => Ordering::Less,
        (false, true) => Ordering::Greater,
        _ => {
            let c = cross(a, b);
            if c.is_positive() {
                Ordering::Less
            } else if c.is_negative() {
                Ordering::Greater
            } else {
                Ordering::Equal
            }
        }
    }
}

fn e(i: usize) -> Vector {
    if i == 0 {
        v2(Q::one(), Q::zero())
    } else {
        v2(Q::zero(), Q::one())
    }
}

fn axes() -> Vec<Vector> {
    vec![e(0), e(0).neg(), e(1), e(1).neg()]
}

/// Closed convex cones in the plane, with primitive integer data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum ConeShape {
    Zero,
    Ray(Vector),
    /// Extreme rays in counter-clockwise order, opening angle in (0, π).
    Wedge(Vector, Vector),
    Line(Vector),
    /// Outward normal of the bounding line.
    HalfPlane(Vector),
    Plane,
}

pub(crate) fn cone_shape(gens: &[Vector]) -> ConeShape {
    let mut dirs: Vec<Vector> = gens.iter().filter(|g| !g.is_zero()).map(|g| g.primitive()).collect();
    dirs.sort_by(angle_cmp);
    dirs.dedup();
    let n = dirs.len();
    match n {
        0 => return ConeShape::Zero,
        1 => return ConeShape::Ray(dirs[0].clone()),
        _ => {}
    }
    let mut pi_gap = None;
    for i in 0..n {
        let a = &dirs[i];
        let b = &dirs[(i + 1) % n];
        let c = cross(a, b);
        if c.is_negative() {
            // The reflex gap runs from a to b; the cone spans b .. a counter-clockwise.
            return ConeShape::Wedge(b.clone(), a.clone());
        }
        if c.is_zero() && pi_gap.is_none() {
            pi_gap = Some(a.clone());
        }
    }
    match pi_gap {
        Some(a) if n == 2 => {
            let l = if upper(&a) { a } else { a.neg() };
            ConeShape::Line(l)
        }
        Some(a) => ConeShape::HalfPlane(perp(&a).primitive()),
        None => ConeShape::Plane,
    }
}

impl ConeShape {
    pub(crate) fn generators(&self) -> Vec<Vector> {
        let mut g = match self {
            ConeShape::Zero => vec![],
            ConeShape::Ray(r) => vec![r.clone()],
            ConeShape::Wedge(a, b) => vec![a.clone(), b.clone()],
            ConeShape::Line(l) => vec![l.clone(), l.neg()],
            ConeShape::HalfPlane(n) => {
                let l = perp(n);
                vec![l.clone(), l.neg(), n.neg()]
            }
            ConeShape::Plane => axes(),
        };
        g.sort();
        g
    }

    /// Normals of a homogeneous H-representation `{r : ⟨n, r⟩ ≤ 0}`.
    pub(crate) fn normals(&self) -> Vec<Vector> {
        let mut ns = match self {
            ConeShape::Zero => axes(),
            ConeShape::Ray(r) => vec![perp(r), perp(r).neg(), r.neg()],
            ConeShape::Wedge(a, b) => vec![perp(a).neg(), perp(b)],
            ConeShape::Line(l) => vec![perp(l), perp(l).neg()],
            ConeShape::HalfPlane(n) => vec![n.clone()],
            ConeShape::Plane => vec![],
        };
        ns.sort();
        ns
    }

    pub(crate) fn lineality(&self) -> Option<Vector> {
        match self {
            ConeShape::Line(l) => Some(l.clone()),
            ConeShape::HalfPlane(n) => Some(perp(n)),
            _ => None,
        }
    }

    pub(crate) fn contains(&self, v: &Vector) -> bool {
        self.normals().iter().all(|n| !n.dot(v).is_positive())
    }
}

/// Generators of the polar cone `{n : ⟨n, g⟩ ≤ 0 for all g}`.
pub(crate) fn polar(gens: &[Vector]) -> ConeShape {
    let gens: Vec<&Vector> = gens.iter().filter(|g| !g.is_zero()).collect();
    if gens.is_empty() {
        return ConeShape::Plane;
    }
    let mut cand = Vec::new();
    for g in &gens {
        cand.push(perp(g));
        cand.push(perp(g).neg());
        cand.push(g.neg());
    }
    let feas: Vec<Vector> = cand.into_iter().filter(|n| gens.iter().all(|g| !n.dot(g).is_positive())).collect();
    cone_shape(&feas)
}

/// Scales a halfspace so its normal is primitive.
pub(crate) fn normalize_half(h: &Half) -> Half {
    let (n, k) = h.0.primitive_factor();
    (n, &h.1 * k)
}

/// Keeps the tightest offset per primitive normal.
fn dedupe(cons: &[Half]) -> Vec<Half> {
    let mut v: Vec<Half> = cons.iter().map(normalize_half).collect();
    v.sort();
    v.dedup_by(|later, earlier| later.0 == earlier.0);
    v
}

fn feasible(cons: &[Half], z: &Vector) -> bool {
    cons.iter().all(|(n, b)| &n.dot(z) <= b)
}

/// Exact H-to-V conversion. Returns `None` for an empty system.
/// Points are extreme points (or canonical points of the minimal face when there is a lineality line).
pub(crate) fn h_to_v(cons: &[Half]) -> Option<(Vec<Vector>, ConeShape)> {
    let cons = dedupe(cons);
    if cons.is_empty() {
        return Some((vec![Vector::zeros(2)], ConeShape::Plane));
    }
    let normals: Vec<Vector> = cons.iter().map(|h| h.0.clone()).collect();
    let shape = polar(&normals);
    if let Some(l) = shape.lineality() {
        let p = perp(&l);
        let (mut lo, mut hi): (Option<Q>, Option<Q>) = (None, None);
        for (n, b) in &cons {
            let c = n.dot(&p);
            let bound = b / &c;
            if c.is_positive() {
                if hi.as_ref().map_or(true, |h| &bound < h) {
                    hi = Some(bound);
                }
            } else if lo.as_ref().map_or(true, |l| &bound > l) {
                lo = Some(bound);
            }
        }
        if let (Some(l), Some(h)) = (&lo, &hi) {
            if l > h {
                return None;
            }
        }
        let mut pts: Vec<Vector> = [lo, hi].into_iter().flatten().map(|lam| p.scale(&lam)).collect();
        pts.sort();
        pts.dedup();
        return Some((pts, shape));
    }
    // Each facet line meets the polyhedron in an interval whose endpoints are vertices.
    let mut pts = Vec::new();
    for (i, (ni, bi)) in cons.iter().enumerate() {
        let z0 = ni.scale(&(bi / ni.dot(ni)));
        let d = perp(ni);
        let (mut lo, mut hi): (Option<Q>, Option<Q>) = (None, None);
        let mut empty = false;
        for (j, (nj, bj)) in cons.iter().enumerate() {
            if i == j {
                continue;
            }
            let c = nj.dot(&d);
            let slack = bj - nj.dot(&z0);
            if c.is_zero() {
                if slack.is_negative() {
                    empty = true;
                    break;
                }
                continue;
            }
            let s = &slack / &c;
            if c.is_positive() {
                if hi.as_ref().map_or(true, |h| &s < h) {
                    hi = Some(s);
                }
            } else if lo.as_ref().map_or(true, |l| &s > l) {
                lo = Some(s);
            }
        }
        if empty {
            continue;
        }
        if let (Some(l), Some(h)) = (&lo, &hi) {
            if l > h {
                continue;
            }
        }
        for s in [lo, hi].into_iter().flatten() {
            pts.push(z0.axpy(&s, &d));
        }
    }
    if pts.is_empty() {
        return None;
    }
    pts.sort();
    pts.dedup();
    Some((pts, shape))
}

/// Convex hull vertices in counter-clockwise order (collinear points dropped).
pub(crate) fn hull(points: &[Vector]) -> Vec<Vector> {
    let mut p: Vec<Vector> = points.to_vec();
    p.sort();
    p.dedup();
    if p.len() <= 2 {
        return p;
    }
    let turn = |a: &Vector, b: &Vector, c: &Vector| cross(&b.sub(a), &c.sub(a));
    let mut lower: Vec<Vector> = Vec::new();
    for pt in &p {
        while lower.len() >= 2 && !turn(&lower[lower.len() - 2], &lower[lower.len() - 1], pt).is_positive() {
            lower.pop();
        }
        lower.push(pt.clone());
    }
    let mut upper_: Vec<Vector> = Vec::new();
    for pt in p.iter().rev() {
        while upper_.len() >= 2 && !turn(&upper_[upper_.len() - 2], &upper_[upper_.len() - 1], pt).is_positive() {
            upper_.pop();
        }
        upper_.push(pt.clone());
    }
    lower.pop();
    upper_.pop();
    lower.extend(upper_);
    lower
}

/// Canonical planar polyhedron: irredundant facets, extreme points, minimal recession generators.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) struct Poly2 {
    pub facets: Vec<Half>,
    pub points: Vec<Vector>,
    pub rays: Vec<Vector>,
}

impl Poly2 {
    pub(crate) fn plane() -> Poly2 {
        Poly2 { facets: vec![], points: vec![Vector::zeros(2)], rays: ConeShape::Plane.generators() }
    }

    pub(crate) fn is_plane(&self) -> bool {
        self.facets.is_empty()
    }

    pub(crate) fn from_h(cons: &[Half]) -> Option<Poly2> {
        let (pts, shape) = h_to_v(cons)?;
        Some(Self::from_parts(pts, shape))
    }

    /// `conv(points) + cone(rays)`; `points` must be nonempty.
    pub(crate) fn from_v(points: &[Vector], rays: &[Vector]) -> Poly2 {
        assert!(!points.is_empty(), "V-representation needs a point");
        let shape = cone_shape(rays);
        if shape == ConeShape::Plane {
            return Poly2::plane();
        }
        if let Some(l) = shape.lineality() {
            let p = perp(&l);
            let pp = p.dot(&p);
            let vals: Vec<Q> = points.iter().map(|x| p.dot(x)).collect();
            let mut keep: Vec<Q> = match &shape {
                ConeShape::HalfPlane(n) => {
                    // n is parallel to p; keep the extreme value in the direction of n.
                    let best = if n.dot(&p).is_positive() { vals.iter().max() } else { vals.iter().min() };
                    vec![best.unwrap().clone()]
                }
                _ => vec![vals.iter().min().unwrap().clone(), vals.iter().max().unwrap().clone()],
            };
            keep.dedup();
            let pts = keep.into_iter().map(|lam| p.scale(&(lam / &pp))).collect();
            return Self::from_parts(pts, shape);
        }
        let hv = hull(points);
        if shape == ConeShape::Zero {
            let mut pts = hv;
            pts.sort();
            return Self::from_parts(pts, shape);
        }
        let gens = shape.generators();
        if affine_dim(&hv, &gens) == 2 {
            // Pointed and full-dimensional: every vertex lies on exactly two facets.
            let facets = facets_of(&hv, &gens, &shape);
            let mut pts: Vec<Vector> = hv
                .into_iter()
                .filter(|p| facets.iter().filter(|(n, b)| n.dot(p) == *b).count() >= 2)
                .collect();
            pts.sort();
            return Poly2 { facets, points: pts, rays: gens };
        }
        let mut cand: Vec<Vector> = axes();
        if hv.len() >= 2 {
            for i in 0..hv.len() {
                let d = hv[(i + 1) % hv.len()].sub(&hv[i]);
                cand.push(perp(&d));
                cand.push(perp(&d).neg());
            }
        }
        for g in &gens {
            cand.push(perp(g));
            cand.push(perp(g).neg());
            cand.push(g.neg());
        }
        let cons: Vec<Half> = cand
            .into_iter()
            .filter(|n| gens.iter().all(|g| !n.dot(g).is_positive()))
            .map(|n| {
                let b = hv.iter().map(|x| n.dot(x)).max().unwrap();
                (n, b)
            })
            .collect();
        Self::from_h(&cons).expect("hull of nonempty point set is nonempty")
    }

    fn from_parts(mut points: Vec<Vector>, shape: ConeShape) -> Poly2 {
        points.sort();
        points.dedup();
        let rays = shape.generators();
        if shape == ConeShape::Plane {
            return Poly2::plane();
        }
        let facets = facets_of(&points, &rays, &shape);
        Poly2 { facets, points, rays }
    }

    pub(crate) fn contains(&self, z: &Vector) -> bool {
        feasible(&self.facets, z)
    }

    /// `self ⊇ other`.
    pub(crate) fn includes(&self, other: &Poly2) -> bool {
        other.points.iter().all(|p| self.contains(p))
            && other.rays.iter().all(|r| self.facets.iter().all(|(n, _)| !n.dot(r).is_positive()))
    }

    /// Support value; `None` means `+∞`.
    pub(crate) fn support(&self, d: &Vector) -> Option<Q> {
        if self.rays.iter().any(|r| d.dot(r).is_positive()) {
            return None;
        }
        self.points.iter().map(|p| d.dot(p)).max()
    }

    pub(crate) fn affine_dim(&self) -> usize {
        affine_dim(&self.points, &self.rays)
    }
}

fn affine_dim(points: &[Vector], rays: &[Vector]) -> usize {
    let mut dirs: Vec<Vector> = points.iter().skip(1).map(|p| p.sub(&points[0])).collect();
    dirs.extend(rays.iter().cloned());
    let first = match dirs.iter().find(|d| !d.is_zero()) {
        None => return 0,
        Some(d) => d.clone(),
    };
    if dirs.iter().any(|d| !cross(&first, d).is_zero()) {
        2
    } else {
        1
    }
}

fn facets_of(points: &[Vector], rays: &[Vector], shape: &ConeShape) -> Vec<Half> {
    let mut out: Vec<Half> = Vec::new();
    match affine_dim(points, rays) {
        0 => {
            let v = &points[0];
            for a in axes() {
                let b = a.dot(v);
                out.push((a, b));
            }
        }
        1 => {
            let d = if points.len() >= 2 { points[1].sub(&points[0]) } else { rays[0].clone() };
            let p = perp(&d).primitive();
            let c = p.dot(&points[0]);
            out.push((p.neg(), -c.clone()));
            out.push((p, c));
            match shape {
                ConeShape::Ray(r) => out.push(normalize_half(&(r.neg(), r.neg().dot(&points[0])))),
                ConeShape::Zero => {
                    let (v, w) = (&points[0], &points[1]);
                    let dw = w.sub(v);
                    out.push(normalize_half(&(dw.clone(), dw.dot(w))));
                    let dv = v.sub(w);
                    out.push(normalize_half(&(dv.clone(), dv.dot(v))));
                }
                _ => {}
            }
        }
        _ => {
            let mut cand: Vec<Vector> = Vec::new();
            let ring = hull(points);
            if ring.len() >= 2 {
                for i in 0..ring.len() {
                    let d = ring[(i + 1) % ring.len()].sub(&ring[i]);
                    cand.push(perp(&d));
                    cand.push(perp(&d).neg());
                }
            }
            for g in rays {
                cand.push(perp(g));
                cand.push(perp(g).neg());
            }
            for n in cand {
                if rays.iter().any(|g| n.dot(g).is_positive()) {
                    continue;
                }
                let vals: Vec<Q> = points.iter().map(|p| n.dot(p)).collect();
                let b = vals.iter().max().unwrap().clone();
                let tight = vals.iter().filter(|v| **v == b).count();
                let along = rays.iter().any(|g| n.dot(g).is_zero());
                if tight >= 2 || (tight >= 1 && along) {
                    out.push(normalize_half(&(n, b)));
                }
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Emptiness test for an arbitrary halfspace system.
pub(crate) fn is_feasible(cons: &[Half]) -> bool {
    h_to_v(cons).is_some()
}
