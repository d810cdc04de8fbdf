//! Named example instances.

use crate::lattice::{UpperSet, Workspace};
use crate::rat::{q, qr, sqrt_floor, Vector};
use crate::setfun::{Affine, ConcavePWL, ConvexPWL, Domain, EpiVector, Oracle, ParamPoly, SetFunction, VectorFunction};
use num::{Signed, Zero};
use std::sync::Arc;

pub const NAMES: [&str; 8] = [
    "abs_diag",
    "abs_pair",
    "circle",
    "example23",
    "heyde_a",
    "heyde_b",
    "infdir_example",
    "no_solution_line",
];

pub struct Builtin {
    pub name: &'static str,
    pub ws: Workspace,
    pub f: Option<SetFunction>,
    pub sets: Vec<(String, UpperSet)>,
    pub note: &'static str,
}

pub fn get(name: &str) -> Option<Builtin> {
    Some(match name {
        "abs_diag" => abs_diag(),
        "abs_pair" => abs_pair(),
        "circle" => circle(),
        "example23" => example23(),
        "heyde_a" => heyde_a(),
        "heyde_b" => heyde_b(),
        "infdir_example" => infdir(),
        "no_solution_line" => no_solution_line(),
        _ => return None,
    })
}

fn v(xs: &[i64]) -> Vector {
    Vector::ints(xs)
}

fn aff(coef: &[i64], c: i64) -> Affine {
    Affine::new(v(coef), q(c))
}

fn abs_of(coef: i64, shift: i64) -> ConvexPWL {
    // |coef·x + shift|
    ConvexPWL { pieces: vec![aff(&[coef], shift), aff(&[-coef], -shift)] }
}

fn builtin(name: &'static str, ws: Workspace, f: SetFunction, note: &'static str) -> Builtin {
    Builtin { name, ws, f: Some(f), sets: vec![], note }
}

/// `{(|x|, |x|)} + R²₊` on the real line.
pub fn abs_diag() -> Builtin {
    let ws = Workspace::orthant2();
    let psi = VectorFunction::new(1, vec![abs_of(1, 0), abs_of(1, 0)], Domain::default()).unwrap();
    let f = SetFunction::EpiVector(EpiVector::new(&ws, psi).unwrap());
    builtin("abs_diag", ws, f, "epigraph of x -> (|x|, |x|)")
}

/// `{(|x|, |x − 1|)} + R²₊` on the real line.
pub fn abs_pair() -> Builtin {
    let ws = Workspace::orthant2();
    let psi = VectorFunction::new(1, vec![abs_of(1, 0), abs_of(1, -1)], Domain::default()).unwrap();
    let f = SetFunction::EpiVector(EpiVector::new(&ws, psi).unwrap());
    builtin("abs_pair", ws, f, "epigraph of x -> (|x|, |x - 1|)")
}

/// `(−x, −x) + R²₊` on the real line: every set `(a, ∞)` is an infimizer, no point is minimal.
pub fn no_solution_line() -> Builtin {
    let ws = Workspace::orthant2();
    let comp = ConvexPWL { pieces: vec![aff(&[-1], 0)] };
    let psi = VectorFunction::new(1, vec![comp.clone(), comp], Domain::default()).unwrap();
    let f = SetFunction::EpiVector(EpiVector::new(&ws, psi).unwrap());
    builtin("no_solution_line", ws, f, "epigraph of x -> (-x, -x)")
}

/// `f(x) = {z : −x1+x2 ≤ z1, −x1−x2 ≤ z2, x1 ≤ z1+z2}` for `x1 ≥ 0`.
pub fn heyde_a() -> Builtin {
    let ws = Workspace::orthant2();
    let normals = vec![v(&[-1, 0]), v(&[0, -1]), v(&[-1, -1])];
    let offsets = vec![
        ConcavePWL { pieces: vec![aff(&[1, -1], 0)] },
        ConcavePWL { pieces: vec![aff(&[1, 1], 0)] },
        ConcavePWL { pieces: vec![aff(&[-1, 0], 0)] },
    ];
    let domain = Domain { halfspaces: vec![(v(&[-1, 0]), q(0))] };
    let p = ParamPoly::new(&ws, 2, normals, offsets, domain).unwrap();
    builtin("heyde_a", ws, SetFunction::ParamPoly(p), "every point of the domain is minimal")
}

/// Exponents `k` of the sample points `(s 2^k, s 2^-k)` on the hyperbola branch.
const HYPERBOLA_SPAN: i64 = 24;

/// `f(x) = (1−x) H + R²₊` on `[0,1]` with `H = {z > 0 : z1 z2 ≥ 1}`, approximated from inside
/// by the hull of points on the branch.
pub fn heyde_b() -> Builtin {
    let ws = Workspace::orthant2();
    let pts: Vec<Vector> = (-HYPERBOLA_SPAN..=HYPERBOLA_SPAN)
        .map(|k| {
            let r = if k >= 0 { q(1i64 << k) } else { qr(1, 1i64 << (-k)) };
            Vector::new(vec![r.clone(), q(1) / r])
        })
        .collect();
    let base = ws.from_vrep(&pts, &[]).unwrap();
    let eval = move |w: &Workspace, x: &Vector| -> UpperSet {
        let x = x.0[0].clone();
        if x.is_negative() || x > q(1) {
            return UpperSet::Empty;
        }
        w.scale(&(q(1) - x), &base).unwrap()
    };
    let f = SetFunction::Oracle(Oracle {
        name: "heyde_b".into(),
        xdim: 1,
        convex: true,
        tolerance: qr(1, 1_000_000),
        eval: Arc::new(eval),
    });
    builtin("heyde_b", ws, f, "only x = 1 is a minimizer; values approximated from inside")
}

/// `f(x) = [−√(1−x²), √(1−x²)]` on `[−1,1]`, ordered by `C = {0}`.
pub fn circle() -> Builtin {
    let ws = Workspace::new(1, vec![], vec![]).unwrap();
    let eval = |w: &Workspace, x: &Vector| -> UpperSet {
        let x = &x.0[0];
        let r = q(1) - x * x;
        if r.is_negative() {
            return UpperSet::Empty;
        }
        let h = sqrt_floor(&r, 64);
        w.canonicalize(&[(v(&[1]), h.clone()), (v(&[-1]), h)]).unwrap()
    };
    let f = SetFunction::Oracle(Oracle {
        name: "circle".into(),
        xdim: 1,
        convex: true,
        tolerance: qr(1, 1_000_000),
        eval: Arc::new(eval),
    });
    builtin("circle", ws, f, "the set derivative at 0 is empty while every scalar derivative vanishes")
}

/// `C = cone{(0,1)}`, `A = C`, `B = [−1,1] × [0,∞)`.
pub fn example23() -> Builtin {
    let ws = Workspace::new(2, vec![v(&[0, 1])], vec![]).unwrap();
    let a = ws.cone_set();
    let b = ws.canonicalize(&[(v(&[-1, 0]), q(1)), (v(&[1, 0]), q(1)), (v(&[0, -1]), q(0))]).unwrap();
    Builtin {
        name: "example23",
        ws,
        f: None,
        sets: vec![("A".into(), a), ("B".into(), b)],
        note: "A ÷ B is empty although every scalar residuation is finite",
    }
}

/// `ψ(x) = (−√x, −1)` for `x > 0`, `ψ(0) = 0`: the quotient at 0 is `(−s, −s²)` with `s = t^{−1/2}`.
pub fn infdir() -> Builtin {
    let ws = Workspace::orthant2();
    let eval = |w: &Workspace, x: &Vector| match infdir_psi(x) {
        Some(p) => w.translated_cone(&p),
        None => UpperSet::Empty,
    };
    let f = SetFunction::Oracle(Oracle {
        name: "infdir_example".into(),
        xdim: 1,
        convex: true,
        tolerance: qr(1, 1_000_000),
        eval: Arc::new(eval),
    });
    builtin("infdir_example", ws, f, "vector Dini derivative at 0 is the infinite element along (0,-1)")
}

/// The vector function behind [`infdir`], rounded towards the cone.
pub fn infdir_psi(x: &Vector) -> Option<Vector> {
    let x = &x.0[0];
    if x.is_negative() {
        return None;
    }
    if x.is_zero() {
        return Some(Vector::zeros(2));
    }
    Some(Vector::new(vec![-sqrt_floor(x, 64), q(-1)]))
}
