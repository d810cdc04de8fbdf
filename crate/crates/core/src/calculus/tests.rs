use super::*;
use crate::builtins;
use crate::corpus::{self, random_dual_direction, random_parampoly, random_point, random_vector_function, Rng8};
use crate::rat::qr;
use crate::setfun::EpiVector;
use proptest::prelude::*;
use rand::Rng;

fn v(x: &[i64]) -> Vector {
    Vector::ints(x)
}

fn pow2(k: u32) -> Q {
    q(1) / q(1i64 << k)
}

/// Random parametric instance with `x` in the domain.
fn instance(r: &mut Rng8) -> Option<(Workspace, SetFunction, Vector, Vector)> {
    let ws = corpus::random_workspace(r);
    let xdim = r.gen_range(1..=2);
    let f = SetFunction::ParamPoly(random_parampoly(r, &ws, xdim, 5));
    let x = random_point(r, xdim, 2);
    if f.eval(&ws, &x).is_empty() {
        return None;
    }
    let u = random_point(r, xdim, 2);
    Some((ws, f, x, u))
}

// smallest chord slope over a long dyadic schedule
fn dini_by_chords(ws: &Workspace, f: &SetFunction, z: &Vector, x: &Vector, u: &Vector) -> ExtReal {
    let phi0 = f.scalarize(ws, z, x);
    (0..=40)
        .map(|k| {
            let t = pow2(k);
            f.scalarize(ws, z, &x.axpy(&t, u)).residual(&phi0).scale_pos(&(q(1) / &t))
        })
        .min()
        .unwrap()
}

/// Every quotient lies inside the derivative, and every vertex and far ray point of the
/// derivative lies in some quotient.
fn check_against_quotients(ws: &Workspace, f: &SetFunction, x: &Vector, u: &Vector, d: &DerivativeResult) {
    let quots: Vec<(Q, UpperSet)> = (0..=60).map(|k| (pow2(k), diff_quotient(ws, f, x, u, &pow2(k)).unwrap())).collect();
    for (t, qt) in &quots {
        assert!(ws.leq(&d.value, qt), "quotient at {t} escapes the derivative");
        if let Some(ts) = &d.t_star {
            if &ExtReal::Finite(t.clone()) <= ts {
                assert_eq!(qt, &d.value, "quotient at {t} below the threshold");
            }
        }
    }
    if d.value.is_empty() {
        return;
    }
    let mut probes = d.value.vertices();
    for p in d.value.vertices() {
        for ray in d.value.rays() {
            probes.push(p.axpy(&q(16), &ray));
        }
    }
    for p in probes {
        assert!(quots.iter().any(|(_, qt)| ws.contains(qt, &p)), "{p:?} is not reached by the quotients");
    }
}

#[test]
fn quotient_examples() {
    let b = builtins::abs_diag();
    let f = b.f.unwrap();
    for t in [qr(1, 3), q(1), q(7)] {
        assert_eq!(diff_quotient(&b.ws, &f, &v(&[0]), &v(&[1]), &t).unwrap(), b.ws.translated_cone(&v(&[1, 1])));
    }
    assert!(diff_quotient(&b.ws, &f, &v(&[0]), &v(&[1]), &q(0)).is_err());

    let h = builtins::heyde_a();
    let g = h.f.unwrap();
    assert!(diff_quotient(&h.ws, &g, &v(&[-1, 0]), &v(&[1, 0]), &qr(1, 2)).unwrap().is_all());
}

#[test]
fn derivative_examples() {
    let b = builtins::abs_diag();
    let f = b.f.unwrap();
    let d = set_derivative(&b.ws, &f, &v(&[0]), &v(&[1])).unwrap();
    assert!(d.exact);
    assert_eq!(d.value, b.ws.translated_cone(&v(&[1, 1])));
    assert_eq!(d.t_star, Some(ExtReal::PlusInf));
    let d0 = set_derivative(&b.ws, &f, &v(&[2]), &v(&[0])).unwrap();
    assert_eq!(d0.value, b.ws.recession(&f.eval(&b.ws, &v(&[2]))));

    let h = builtins::heyde_a();
    let g = h.f.unwrap();
    let out = set_derivative(&h.ws, &g, &v(&[-2, 0]), &v(&[1, 1])).unwrap();
    assert!(out.value.is_all() && out.exact);
    // leaving the domain immediately
    assert!(set_derivative(&h.ws, &g, &v(&[0, 0]), &v(&[-1, 0])).unwrap().value.is_empty());

    let c = builtins::circle();
    let fc = c.f.unwrap();
    for u in [v(&[1]), v(&[-1])] {
        let d = set_derivative(&c.ws, &fc, &v(&[0]), &u).unwrap();
        assert!(d.value.is_empty() && !d.exact);
        assert_eq!(d.samples.len(), 21);
    }
}

#[test]
fn nonconvex_oracle_is_rejected() {
    let c = builtins::circle();
    let mut f = c.f.unwrap();
    if let SetFunction::Oracle(o) = &mut f {
        o.convex = false;
    }
    assert_eq!(
        set_derivative(&c.ws, &f, &v(&[0]), &v(&[1])).unwrap_err(),
        CalculusError::NotDeclaredConvex("circle".into())
    );
}

#[test]
fn scalar_dini_examples() {
    let b = builtins::abs_diag();
    let f = b.f.unwrap();
    for u in [-3, -1, 0, 2] {
        assert_eq!(scalar_dini(&b.ws, &f, &v(&[-1, 0]), &v(&[0]), &v(&[u])), (ExtReal::int(u.abs()), true));
    }
    let h = builtins::heyde_a();
    let g = h.f.unwrap();
    assert_eq!(scalar_dini(&h.ws, &g, &v(&[-1, -1]), &v(&[-1, 0]), &v(&[1, 0])).0, ExtReal::MinusInf);
    assert!(scalarized_derivative_intersection(&h.ws, &g, &v(&[-1, 0]), &v(&[1, 0]), &h.ws.directions.items).is_all());

    let c = builtins::circle();
    let fc = c.f.unwrap();
    let zero = c.ws.canonicalize(&[(v(&[1]), q(0)), (v(&[-1]), q(0))]).unwrap();
    for u in [v(&[1]), v(&[-1])] {
        for s in [v(&[1]), v(&[-1]), v(&[3])] {
            let (val, exact) = scalar_dini(&c.ws, &fc, &s, &v(&[0]), &u);
            assert_eq!(val, ExtReal::int(0));
            assert!(!exact);
        }
        let inter = scalarized_derivative_intersection(&c.ws, &fc, &v(&[0]), &u, &c.ws.directions.items);
        assert_eq!(inter, zero);
        let reg = regularity_check(&c.ws, &fc, &v(&[0]), &u, &c.ws.directions.items).unwrap();
        assert!(!reg.weak && !reg.strong && !reg.exact);
    }
}

#[test]
fn regularity_examples() {
    let ws = Workspace::orthant2();
    let affine = ParamPoly::new(
        &ws,
        1,
        vec![v(&[-1, 0]), v(&[0, -1]), v(&[-1, -2])],
        vec![
            crate::setfun::ConcavePWL { pieces: vec![Affine::new(v(&[2]), q(1))] },
            crate::setfun::ConcavePWL { pieces: vec![Affine::new(v(&[-1]), q(0))] },
            crate::setfun::ConcavePWL { pieces: vec![Affine::new(v(&[1]), q(3))] },
        ],
        Domain::default(),
    )
    .unwrap();
    let f = SetFunction::ParamPoly(affine);
    let dirs = vec![v(&[-1, 0]), v(&[0, -1]), v(&[-1, -2]), v(&[-2, -1])];
    for x in [-2, 0, 5] {
        for u in [-1, 1, 3] {
            let reg = regularity_check(&ws, &f, &v(&[x]), &v(&[u]), &dirs).unwrap();
            assert!(reg.strong && reg.weak && reg.exact, "x={x} u={u}");
        }
    }
}

#[test]
fn derivative_json_shape() {
    let b = builtins::abs_diag();
    let d = set_derivative(&b.ws, b.f.as_ref().unwrap(), &v(&[0]), &v(&[1])).unwrap();
    let j = d.to_json();
    assert_eq!(j["exact"], true);
    assert_eq!(j["t_star"], "+inf");
    assert_eq!(j["samples"].as_array().unwrap().len(), 1);
}

fn seeded() -> impl Strategy<Value = u64> {
    any::<u64>()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn derivative_is_the_limit_of_quotients(seed in seeded()) {
        let mut r = corpus::rng(seed);
        if let Some((ws, f, x, u)) = instance(&mut r) {
            let d = set_derivative(&ws, &f, &x, &u).unwrap();
            prop_assert!(d.exact);
            for (_, s) in &d.samples {
                prop_assert_eq!(s, &d.value);
            }
            check_against_quotients(&ws, &f, &x, &u, &d);
        }
    }

    #[test]
    fn derivative_value_shortcut_agrees(seed in seeded()) {
        let mut r = corpus::rng(seed);
        if let Some((ws, f, x, u)) = instance(&mut r) {
            let d = set_derivative(&ws, &f, &x, &u).unwrap();
            prop_assert_eq!(exact_derivative_value(&ws, &f, &x, &f.eval(&ws, &x), &u), Some(d.value));
        }
    }

    #[test]
    fn quotients_shrink_as_t_grows(seed in seeded()) {
        let mut r = corpus::rng(seed);
        if let Some((ws, f, x, u)) = instance(&mut r) {
            let ts = [qr(1, 16), qr(1, 3), qr(1, 2), q(1), q(3)];
            let qs: Vec<UpperSet> = ts.iter().map(|t| diff_quotient(&ws, &f, &x, &u, t).unwrap()).collect();
            for w in qs.windows(2) {
                prop_assert!(ws.leq(&w[0], &w[1]));
            }
        }
    }

    #[test]
    fn derivative_is_positively_homogeneous(seed in seeded()) {
        let mut r = corpus::rng(seed);
        if let Some((ws, f, x, u)) = instance(&mut r) {
            let d = set_derivative(&ws, &f, &x, &u).unwrap().value;
            for s in [qr(1, 3), q(2), qr(5, 2)] {
                let ds = set_derivative(&ws, &f, &x, &u.scale(&s)).unwrap().value;
                prop_assert_eq!(ds, ws.scale(&s, &d).unwrap());
            }
        }
    }

    #[test]
    fn derivative_is_sublinear(seed in seeded()) {
        let mut r = corpus::rng(seed);
        if let Some((ws, f, x, u1)) = instance(&mut r) {
            let u2 = random_point(&mut r, x.dim(), 2);
            let s = qr(r.gen_range(1..=3), 4);
            let s1 = q(1) - &s;
            let mid = set_derivative(&ws, &f, &x, &u1.scale(&s).add(&u2.scale(&s1))).unwrap().value;
            let d1 = set_derivative(&ws, &f, &x, &u1).unwrap().value;
            let d2 = set_derivative(&ws, &f, &x, &u2).unwrap().value;
            let rhs = ws.add(&ws.scale(&s, &d1).unwrap(), &ws.scale(&s1, &d2).unwrap());
            prop_assert!(ws.leq(&mid, &rhs));
        }
    }

    #[test]
    fn zero_direction_gives_recession_cone(seed in seeded()) {
        let mut r = corpus::rng(seed);
        if let Some((ws, f, x, _)) = instance(&mut r) {
            let d = set_derivative(&ws, &f, &x, &Vector::zeros(x.dim())).unwrap();
            prop_assert_eq!(d.value, ws.recession(&f.eval(&ws, &x)));
        }
    }

    #[test]
    fn scalar_dini_matches_chords_and_bounds_the_set_derivative(seed in seeded()) {
        let mut r = corpus::rng(seed);
        if let Some((ws, f, x, u)) = instance(&mut r) {
            let d = set_derivative(&ws, &f, &x, &u).unwrap().value;
            for _ in 0..3 {
                let z = random_dual_direction(&mut r, &ws);
                let (dini, exact) = scalar_dini(&ws, &f, &z, &x, &u);
                prop_assert!(exact);
                prop_assert_eq!(&dini, &dini_by_chords(&ws, &f, &z, &x, &u));
                prop_assert!(dini <= ws.neg_support(&z, &d));
            }
            let inter = scalarized_derivative_intersection(&ws, &f, &x, &u, &ws.directions.items);
            prop_assert!(ws.leq(&inter, &d));
        }
    }

    #[test]
    fn recession_cones_along_the_segment(seed in seeded()) {
        let mut r = corpus::rng(seed);
        if let Some((ws, f, x0, _)) = instance(&mut r) {
            let x = random_point(&mut r, x0.dim(), 2);
            let d = set_derivative(&ws, &f, &x0, &x.sub(&x0)).unwrap().value;
            if !d.is_empty() {
                let xt = x0.axpy(&qr(1, 64), &x.sub(&x0));
                let rt = ws.recession(&f.eval(&ws, &xt));
                prop_assert!(ws.leq(&ws.recession(&d), &rt));
                prop_assert!(ws.leq(&rt, &ws.recession(&f.eval(&ws, &x0))));
            }
        }
    }

    #[test]
    fn epigraphs_are_strongly_regular(seed in seeded()) {
        let mut r = corpus::rng(seed);
        // componentwise convex ψ is C-convex for cones containing the orthant
        let ws = corpus::workspace_of_kind([0, 2][r.gen_range(0..2)]);
        let e = EpiVector::new(&ws, random_vector_function(&mut r, 2, 1)).unwrap();
        let f = SetFunction::EpiVector(e);
        let x = random_point(&mut r, 1, 3);
        let u = random_point(&mut r, 1, 2);
        let d = set_derivative(&ws, &f, &x, &u).unwrap();
        check_against_quotients(&ws, &f, &x, &u, &d);
        let mut dirs = ws.directions.items.clone();
        dirs.push(random_dual_direction(&mut r, &ws));
        let reg = regularity_check(&ws, &f, &x, &u, &dirs).unwrap();
        prop_assert!(reg.strong && reg.weak && reg.exact);
    }

    #[test]
    fn dini_bundle_matches_chords(seed in seeded()) {
        let mut r = corpus::rng(seed);
        let ws = corpus::workspace_of_kind([0, 2][r.gen_range(0..2)]);
        let xdim = r.gen_range(1..=2);
        let f = if r.gen_bool(0.6) {
            SetFunction::ParamPoly(random_parampoly(&mut r, &ws, xdim, 5))
        } else {
            SetFunction::EpiVector(EpiVector::new(&ws, random_vector_function(&mut r, 2, xdim)).unwrap())
        };
        let x = random_point(&mut r, xdim, 3);
        let u = random_point(&mut r, xdim, 2);
        let mut dirs = ws.directions.items.clone();
        dirs.push(random_dual_direction(&mut r, &ws));
        let bundle = scalar_dini_bundle(&ws, &f, &x, &f.eval(&ws, &x), &u, &dirs);
        for (d, (val, exact)) in dirs.iter().zip(&bundle) {
            prop_assert!(*exact);
            let want = if f.scalarize(&ws, d, &x) == ExtReal::PlusInf { ExtReal::MinusInf } else { dini_by_chords(&ws, &f, d, &x, &u) };
            prop_assert_eq!(val, &want);
        }
    }
}
