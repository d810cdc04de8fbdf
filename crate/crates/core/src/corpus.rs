//! Seeded random instances for property suites.

use crate::lattice::{UpperSet, Workspace};
use crate::rat::{q, Vector};
use crate::setfun::{Affine, ConcavePWL, ConvexPWL, Domain, ParamPoly, VectorFunction};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;
pub type Rng8 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng8 {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Planar cone shapes used by the suites: orthant, skew wedges, a ray, the origin, a line.
pub const CONE_KINDS: [&[[i64; 2]]; 7] = [
    &[[1, 0], [0, 1]],
    &[[1, 0], [1, 1]],
    &[[2, -1], [-1, 2]],
    &[[1, 2]],
    &[],
    &[[1, -1], [-1, 1]],
    &[[0, 1]],
];

pub fn workspace_of_kind(k: usize) -> Workspace {
    let gens = CONE_KINDS[k].iter().map(|g| Vector::ints(g)).collect();
    Workspace::new(2, gens, vec![]).expect("corpus cone")
}

pub fn random_workspace(r: &mut Rng8) -> Workspace {
    workspace_of_kind(r.gen_range(0..CONE_KINDS.len()))
}

/// A nonzero direction of `C^-` as a small nonnegative combination of the facet normals.
pub fn random_dual_direction(r: &mut Rng8, ws: &Workspace) -> Vector {
    loop {
        let mut d = Vector::zeros(ws.dim);
        for n in &ws.cone.facet_normals {
            let c = r.gen_range(0..3);
            d = d.axpy(&q(c), n);
        }
        if !d.is_zero() {
            return d.primitive();
        }
    }
}

/// Up to `max_cons` random halfspaces; offsets in `[-4, 4]`. Mostly nonempty.
pub fn random_set(r: &mut Rng8, ws: &Workspace, max_cons: usize) -> UpperSet {
    for _ in 0..8 {
        let k = r.gen_range(1..=max_cons);
        let raw: Vec<(Vector, _)> =
            (0..k).map(|_| (random_dual_direction(r, ws), q(r.gen_range(-4..=4)))).collect();
        let s = ws.canonicalize(&raw).expect("normals are dual");
        if !s.is_empty() {
            return s;
        }
    }
    ws.translated_cone(&random_point(r, ws.dim, 3))
}

pub fn random_point(r: &mut Rng8, dim: usize, bound: i64) -> Vector {
    Vector::ints(&(0..dim).map(|_| r.gen_range(-bound..=bound)).collect::<Vec<_>>())
}

/// Random set that is occasionally `Empty` or all of Z.
pub fn random_set_or_extreme(r: &mut Rng8, ws: &Workspace) -> UpperSet {
    match r.gen_range(0..12) {
        0 => UpperSet::Empty,
        1 => ws.all(),
        _ => random_set(r, ws, 6),
    }
}

/// Random parametric polyhedron with `xdim`-dimensional arguments and at most `max_rows` rows.
pub fn random_parampoly(r: &mut Rng8, ws: &Workspace, xdim: usize, max_rows: usize) -> ParamPoly {
    let rows = r.gen_range(1..=max_rows);
    let mut normals = Vec::new();
    let mut offsets = Vec::new();
    for _ in 0..rows {
        normals.push(random_dual_direction(r, ws));
        let np = r.gen_range(1..=3);
        let pieces = (0..np)
            .map(|_| Affine::new(random_point(r, xdim, 2), q(r.gen_range(0..=4))))
            .collect();
        offsets.push(ConcavePWL::new(pieces).unwrap());
    }
    let mut halfspaces = Vec::new();
    if r.gen_bool(0.5) {
        for _ in 0..r.gen_range(1..=2) {
            let a = random_point(r, xdim, 1);
            if !a.is_zero() {
                halfspaces.push((a, q(r.gen_range(1..=3))));
            }
        }
    }
    ParamPoly::new(ws, xdim, normals, offsets, Domain { halfspaces }).expect("dual normals")
}

/// Random vector function with convex piecewise-linear components.
pub fn random_vector_function(r: &mut Rng8, zdim: usize, xdim: usize) -> VectorFunction {
    let comps = (0..zdim)
        .map(|_| {
            let np = r.gen_range(1..=3);
            ConvexPWL::new((0..np).map(|_| Affine::new(random_point(r, xdim, 2), q(r.gen_range(-2..=2)))).collect())
                .unwrap()
        })
        .collect();
    VectorFunction::new(xdim, comps, Domain::default()).unwrap()
}
