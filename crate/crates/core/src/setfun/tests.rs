use super::*;
use crate::builtins;
use crate::corpus::{self, random_parampoly, random_point, random_vector_function};
use crate::rat::qr;
use proptest::prelude::*;
use rand::Rng;

fn v(x: &[i64]) -> Vector {
    Vector::ints(x)
}

// min z1 + z2 over the three Heyde (a) constraints by scanning z1 on a fine grid
fn heyde_a_diag_value(x1: i64, x2: i64) -> Q {
    let mut best: Option<Q> = None;
    for k in -400..=400 {
        let z1 = qr(k, 8);
        if z1 < q(x2 - x1) {
            continue;
        }
        let z2 = std::cmp::max(q(-x1 - x2), q(x1) - &z1);
        let val = &z1 + &z2;
        if best.as_ref().map_or(true, |b| &val < b) {
            best = Some(val);
        }
    }
    best.unwrap()
}

#[test]
fn hull_vertices_keep_extreme_points() {
    let grid: Vec<Vector> = (0..4).flat_map(|a| (0..3).map(move |b| v(&[a, b]))).collect();
    assert_eq!(hull_vertices(&grid), vec![v(&[0, 0]), v(&[0, 2]), v(&[3, 0]), v(&[3, 2])]);
    let line = vec![v(&[2, 2]), v(&[0, 0]), v(&[1, 1]), v(&[0, 0])];
    assert_eq!(hull_vertices(&line), vec![v(&[0, 0]), v(&[2, 2])]);
    assert_eq!(hull_vertices(&[v(&[3]), v(&[-1]), v(&[0])]), vec![v(&[-1]), v(&[3])]);
    let tri = vec![v(&[0, 0]), v(&[4, 0]), v(&[0, 4]), v(&[1, 1]), v(&[2, 2])];
    assert_eq!(hull_vertices(&tri), vec![v(&[0, 0]), v(&[0, 4]), v(&[4, 0])]);
}

#[test]
fn heyde_a_values() {
    let b = builtins::heyde_a();
    let f = b.f.unwrap();
    assert_eq!(f.eval(&b.ws, &v(&[0, 0])), b.ws.cone_set());
    assert!(f.eval(&b.ws, &v(&[-1, 0])).is_empty());
    for (x1, x2) in [(2, 5), (0, 3), (3, -1), (1, 1)] {
        let got = f.scalarize(&b.ws, &v(&[-1, -1]), &v(&[x1, x2]));
        assert_eq!(got, ExtReal::Finite(heyde_a_diag_value(x1, x2)), "x = ({x1},{x2})");
    }
    assert_eq!(f.scalarize(&b.ws, &v(&[-1, -1]), &v(&[2, 5])), ExtReal::int(2));
    assert_eq!(f.scalarize(&b.ws, &v(&[-1, -1]), &v(&[-1, 5])), ExtReal::PlusInf);
}

#[test]
fn epigraph_values() {
    let b = builtins::abs_pair();
    let f = b.f.unwrap();
    assert_eq!(f.eval(&b.ws, &v(&[0])), b.ws.translated_cone(&v(&[0, 1])));
    let mut r = corpus::rng(5);
    for _ in 0..50 {
        let x = random_point(&mut r, 1, 4);
        let zs = corpus::random_dual_direction(&mut r, &b.ws);
        let psi = match &f {
            SetFunction::EpiVector(e) => e.psi.eval(&x).unwrap(),
            _ => unreachable!(),
        };
        assert_eq!(f.scalarize(&b.ws, &zs, &x), ExtReal::Finite(-zs.dot(&psi)));
    }
}

#[test]
fn level_functions() {
    let ws = Workspace::orthant2();
    let f = builtins::heyde_a().f.unwrap();
    let zs = v(&[-1, -1]);
    let lv = f.level_function(&ws, &zs, &v(&[2, 5]));
    assert_eq!(lv.constraints(), vec![(zs.clone(), q(-2))]);
    assert!(f.level_function(&ws, &zs, &v(&[-3, 0])).is_empty());
    // unbounded below along (0,-1): φ = −∞
    let open = ParamPoly::new(&ws, 1, vec![v(&[-1, 0])], vec![ConcavePWL::constant(q(0), 1)], Domain::default()).unwrap();
    let g = SetFunction::ParamPoly(open);
    assert_eq!(g.scalarize(&ws, &v(&[0, -1]), &v(&[0])), ExtReal::MinusInf);
    assert!(g.level_function(&ws, &v(&[0, -1]), &v(&[0])).is_all());
}

#[test]
fn translation_examples() {
    let b = builtins::heyde_a();
    let f = b.f.unwrap();
    let ws = &b.ws;
    let m = vec![v(&[1, 2])];
    for x in [v(&[0, 0]), v(&[-1, 3]), v(&[-2, 0])] {
        assert_eq!(f.inf_translation_finite(ws, &m, &x).unwrap(), f.eval(ws, &m[0].add(&x)));
    }
    assert_eq!(f.inf_translation_finite(ws, &[], &v(&[0, 0])), Err(SetFunError::EmptyTranslationSet));
    // domain of the translation is the union of shifted domains
    let m = vec![v(&[1, 0]), v(&[3, 0])];
    for x1 in -5..=2 {
        let x = v(&[x1, 0]);
        let inside = m.iter().any(|mi| f.in_domain(ws, &mi.add(&x)));
        assert_eq!(!f.inf_translation_finite(ws, &m, &x).unwrap().is_empty(), inside);
    }
}

#[test]
fn translation_scalarizations_commute() {
    let mut r = corpus::rng(21);
    for _ in 0..40 {
        let ws = corpus::random_workspace(&mut r);
        let f = SetFunction::ParamPoly(random_parampoly(&mut r, &ws, 1, 4));
        let m: Vec<Vector> = (0..3).map(|_| random_point(&mut r, 1, 2)).collect();
        let x = random_point(&mut r, 1, 2);
        let t = f.inf_translation_finite(&ws, &m, &x).unwrap();
        for zs in &ws.directions.items {
            let direct = m.iter().map(|mi| f.scalarize(&ws, zs, &mi.add(&x))).min().unwrap();
            assert_eq!(ws.neg_support(zs, &t), direct);
        }
    }
}

#[test]
fn hull_translation_matches_dense_sampling() {
    let mut r = corpus::rng(8);
    let steps = 240;
    for _ in 0..25 {
        let ws = corpus::random_workspace(&mut r);
        let f = SetFunction::ParamPoly(random_parampoly(&mut r, &ws, 1, 3));
        let a = r.gen_range(-2..=0);
        let m = vec![v(&[a]), v(&[a + 2])];
        let (fh, exact) = f.inf_translation_hull(&ws, &m).unwrap();
        assert!(exact);
        for x0 in -2..=2 {
            let x = v(&[x0]);
            let val = fh.eval(&ws, &x);
            let samples: Vec<Vector> = (0..=steps).map(|k| v(&[a]).axpy(&qr(2 * k, steps as i64), &v(&[1])).add(&x)).collect();
            for zs in &ws.directions.items {
                let grid = samples.iter().map(|y| f.scalarize(&ws, zs, y)).min().unwrap();
                let got = ws.neg_support(zs, &val);
                assert!(got <= grid, "exact {got} above sampled {grid}");
                match (&got, &grid) {
                    (ExtReal::Finite(g), ExtReal::Finite(s)) => assert!(s - g <= qr(1, 20), "{g} vs {s}"),
                    _ => assert!(got == grid || got == ExtReal::MinusInf, "{got} vs {grid}"),
                }
            }
        }
    }
}

#[test]
fn epigraph_converts_to_parametric_form() {
    let mut r = corpus::rng(3);
    for kind in [0usize, 1, 3] {
        let ws = corpus::workspace_of_kind(kind);
        let e = EpiVector::new(&ws, random_vector_function(&mut r, 2, 1)).unwrap();
        let p = match e.to_parampoly(&ws) {
            Some(p) => p,
            None => continue,
        };
        for x in -4..=4 {
            let x = v(&[x]);
            assert_eq!(p.eval(&ws, &x), e.eval(&ws, &x));
        }
    }
    let ws = corpus::workspace_of_kind(4);
    let e = EpiVector::new(&ws, random_vector_function(&mut r, 2, 1)).unwrap();
    assert!(e.to_parampoly(&ws).is_none());
}

#[test]
fn lsc_probes() {
    let ws = Workspace::new(1, vec![v(&[1])], vec![]).unwrap();
    let jump = SetFunction::Oracle(Oracle {
        name: "jump".into(),
        xdim: 1,
        convex: true,
        tolerance: q(0),
        eval: Arc::new(|w: &Workspace, x: &Vector| {
            let b = if x.0[0].is_zero() { q(-1) } else { q(0) };
            w.canonicalize(&[(v(&[-1]), b)]).unwrap()
        }),
    });
    let probe = LscProbe::default();
    probe.validate().unwrap();
    let verdict = lattice_lsc_probe(&ws, &jump, &v(&[0]), &v(&[1]), &probe);
    assert!(!verdict.holds && verdict.approximate);
    assert_eq!(verdict.witness_radius, Some(q(1)));
    let (failing, _) = cminus_lsc_probe(&ws, &jump, &v(&[0]), &v(&[1]), &ws.directions.items, &probe);
    assert_eq!(failing, vec![v(&[-1])]);

    let constant = SetFunction::Oracle(Oracle {
        name: "constant".into(),
        xdim: 1,
        convex: true,
        tolerance: q(0),
        eval: Arc::new(|w: &Workspace, _: &Vector| w.cone_set()),
    });
    assert!(lattice_lsc_probe(&ws, &constant, &v(&[0]), &v(&[1]), &probe).holds);

    let hb = builtins::heyde_b();
    let f = hb.f.unwrap();
    let (failing, approx) = cminus_lsc_probe(&hb.ws, &f, &v(&[0]), &v(&[1]), &[v(&[0, -1]), v(&[-1, 0])], &probe);
    assert!(failing.is_empty() && approx);

    let pp = SetFunction::ParamPoly(builtins::heyde_a().f.unwrap().as_parampoly().unwrap().clone());
    let ver = lattice_lsc_probe(&hb.ws, &pp, &v(&[0, 0]), &v(&[1, 1]), &probe);
    assert!(ver.holds && !ver.approximate);
    assert!(LscProbe { radii: vec![q(1), q(2)], samples: 1 }.validate().is_err());
}

fn seeded() -> impl Strategy<Value = u64> {
    any::<u64>()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(80))]

    #[test]
    fn parametric_functions_are_convex(seed in seeded()) {
        let mut r = corpus::rng(seed);
        let ws = corpus::random_workspace(&mut r);
        let xdim = r.gen_range(1..=2);
        let f = SetFunction::ParamPoly(random_parampoly(&mut r, &ws, xdim, 6));
        for _ in 0..4 {
            let x1 = random_point(&mut r, xdim, 3);
            let x2 = random_point(&mut r, xdim, 3);
            let t = qr(r.gen_range(1..=7), 8);
            prop_assert!(f.convexity_holds(&ws, &x1, &x2, &t));
        }
    }

    #[test]
    fn hull_translation_is_convex(seed in seeded()) {
        let mut r = corpus::rng(seed);
        let ws = corpus::random_workspace(&mut r);
        let f = SetFunction::ParamPoly(random_parampoly(&mut r, &ws, 1, 4));
        let m: Vec<Vector> = (0..2).map(|_| random_point(&mut r, 1, 2)).collect();
        let (g, _) = f.inf_translation_hull(&ws, &m).unwrap();
        for _ in 0..4 {
            let x1 = random_point(&mut r, 1, 3);
            let x2 = random_point(&mut r, 1, 3);
            prop_assert!(g.convexity_holds(&ws, &x1, &x2, &qr(r.gen_range(1..=3), 4)));
        }
    }

    #[test]
    fn values_are_intersections_of_level_sets(seed in seeded()) {
        let mut r = corpus::rng(seed);
        let ws = corpus::random_workspace(&mut r);
        let p = random_parampoly(&mut r, &ws, 1, 5);
        let ws = ws.with_directions(p.normals.clone()).unwrap();
        let f = SetFunction::ParamPoly(p);
        let x = random_point(&mut r, 1, 3);
        let levels: Vec<UpperSet> = ws.directions.items.iter().map(|d| f.level_function(&ws, d, &x)).collect();
        prop_assert_eq!(ws.sup_family(&levels), f.eval(&ws, &x));
    }

    #[test]
    fn recession_cone_constant_on_open_segment(seed in seeded()) {
        let mut r = corpus::rng(seed);
        let ws = corpus::random_workspace(&mut r);
        let xdim = r.gen_range(1..=2);
        let f = SetFunction::ParamPoly(random_parampoly(&mut r, &ws, xdim, 6));
        let x = random_point(&mut r, xdim, 3);
        let x0 = random_point(&mut r, xdim, 3);
        let (fx, fx0) = (f.eval(&ws, &x), f.eval(&ws, &x0));
        if !fx.is_empty() && !fx0.is_empty() {
            let seg = Segment::new(x.clone(), x0.clone());
            let recs: Vec<UpperSet> = [qr(1, 4), qr(1, 2), qr(3, 4), qr(1, 100)]
                .iter()
                .map(|t| ws.recession(&seg.eval(&ws, &f, t)))
                .collect();
            for rc in &recs[1..] {
                prop_assert_eq!(rc, &recs[0]);
            }
            let hull = ws.inf(&ws.recession(&fx), &ws.recession(&fx0));
            prop_assert!(ws.leq(&recs[0], &hull));
        }
    }

    #[test]
    fn supports_are_affine_between_segment_events(seed in seeded()) {
        let mut r = corpus::rng(seed);
        let ws = corpus::random_workspace(&mut r);
        let xdim = r.gen_range(1..=2);
        let f = if r.gen_bool(0.7) {
            SetFunction::ParamPoly(random_parampoly(&mut r, &ws, xdim, 5))
        } else {
            SetFunction::EpiVector(EpiVector::new(&ws, random_vector_function(&mut r, ws.dim, xdim)).unwrap())
        };
        let x0 = random_point(&mut r, xdim, 2);
        let x = random_point(&mut r, xdim, 3);
        let events = segment_events(&ws, &f, &x0, &x).unwrap();
        prop_assert_eq!(events.last(), Some(&q(1)));
        let at = |s: &Q| f.eval(&ws, &x0.axpy(s, &x.sub(&x0)));
        let mut prev = q(0);
        for e in &events {
            prop_assert!(e > &prev);
            let (a, b) = (at(&prev), at(e));
            let third = (&prev * q(2) + e) / q(3);
            let m = at(&third);
            if !a.is_empty() && !b.is_empty() {
                for d in &ws.directions.items {
                    let (sa, sb, sm) = (ws.support(d, &a), ws.support(d, &b), ws.support(d, &m));
                    if let (Some(sa), Some(sb)) = (sa.finite(), sb.finite()) {
                        let want = (sa * q(2) + sb) / q(3);
                        prop_assert_eq!(sm, ExtReal::Finite(want));
                    }
                }
            }
            prev = e.clone();
        }
    }
}
