//! Acceptance suite: one test per criterion, each printing a single PASS/FAIL line.
//!
//! Run with `cargo test -p setvi --test acceptance -- --nocapture --test-threads 1` to see the lines.

use rand::Rng;
use setvi::builtins;
use setvi::calculus::{diff_quotient, exact_derivative_value, regularity_check, scalar_dini, scalarized_derivative_intersection, set_derivative};
use setvi::corpus::{self, random_dual_direction, random_parampoly, random_point, random_set_or_extreme, random_vector_function, Rng8};
use setvi::extres::ExtReal;
use setvi::lattice::{UpperSet, Workspace};
use setvi::rat::{q, qr, Vector, Q};
use setvi::setfun::{EpiVector, SetFunction};
use setvi::vectoropt::{self, ExtendedPoint, VectorMap};
use setvi::vi::{self, CandidateSpace};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

const LATTICE_INSTANCES: u64 = 1000;
const LATTICE_BUDGET: Duration = Duration::from_secs(60);
const DERIVATIVE_INSTANCES: usize = 500;
const AUDIT_INSTANCES: u64 = 200;
const AUDIT_MAX_GRID: usize = 25;
const AUDIT_BUDGET: Duration = Duration::from_secs(300);
const EFFICIENCY_INSTANCES: u64 = 100;
const EFFICIENCY_MAX_GRID: usize = 50;
const REGULARITY_INSTANCES: u64 = 100;
const MINTY_INSTANCES: u64 = 60;
/// Oracle tolerance for the circle comparison.
fn circle_tol() -> Q {
    qr(1, 1_000_000)
}

type Outcome = Result<String, String>;

fn report(n: u32, name: &str, start: Instant, out: Outcome) {
    let secs = start.elapsed().as_secs_f64();
    match out {
        Ok(detail) => println!("criterion {n} {name}: PASS ({detail}; {secs:.1}s)"),
        Err(why) => {
            println!("criterion {n} {name}: FAIL ({why}; {secs:.1}s)");
            panic!("criterion {n} failed: {why}");
        }
    }
}

fn ensure(cond: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what())
    }
}

fn v(x: &[i64]) -> Vector {
    Vector::ints(x)
}

fn sets(r: &mut Rng8, n: usize) -> (Workspace, Vec<UpperSet>) {
    let ws = corpus::random_workspace(r);
    let s = (0..n).map(|_| random_set_or_extreme(r, &ws)).collect();
    (ws, s)
}

fn lattice_laws(seed: u64) -> Result<(), String> {
    let mut r = corpus::rng(seed);
    let (ws, s) = sets(&mut r, 3);
    let (a, b, c) = (&s[0], &s[1], &s[2]);
    let e = |law: &'static str| move || format!("seed {seed}: {law}");
    let i = ws.inf(a, b);
    let u = ws.sup(a, b);
    ensure(ws.leq(&i, a) && ws.leq(&i, b), e("inf is a lower bound"))?;
    ensure(ws.leq(a, &u) && ws.leq(b, &u), e("sup is an upper bound"))?;
    ensure(!(ws.leq(c, a) && ws.leq(c, b)) || ws.leq(c, &i), e("inf is greatest"))?;
    ensure(!(ws.leq(a, c) && ws.leq(b, c)) || ws.leq(&u, c), e("sup is least"))?;
    ensure(ws.inf(a, b) == ws.inf(b, a) && ws.sup(a, b) == ws.sup(b, a), e("commutativity"))?;
    ensure(ws.inf(&ws.inf(a, b), c) == ws.inf(a, &ws.inf(b, c)), e("inf associativity"))?;
    ensure(ws.sup(&ws.sup(a, b), c) == ws.sup(a, &ws.sup(b, c)), e("sup associativity"))?;
    ensure(ws.inf(a, &ws.sup(a, b)) == *a && ws.sup(a, &ws.inf(a, b)) == *a, e("absorption"))?;
    ensure(ws.add(a, &ws.inf(b, c)) == ws.inf(&ws.add(a, b), &ws.add(a, c)), e("addition distributes over inf"))?;
    ensure(ws.add(a, b) == ws.add(b, a), e("addition commutes"))?;
    ensure(ws.add(a, &ws.cone_set()) == *a, e("the cone is neutral"))?;
    let d = ws.residual_diff(a, b);
    ensure(ws.leq(a, &ws.add(b, &d)), e("a <= b + a÷b"))?;
    ensure(ws.leq(a, &ws.add(b, c)) == ws.leq(&d, c), e("residuation adjunction"))?;
    let t = qr(r.gen_range(1..=3), 4);
    let t1 = q(1) - &t;
    let lhs = ws.residual_diff(&ws.add(&ws.scale(&t, a).unwrap(), &ws.scale(&t1, b).unwrap()), c);
    let rhs = ws.add(&ws.scale(&t, &ws.residual_diff(a, c)).unwrap(), &ws.scale(&t1, &ws.residual_diff(b, c)).unwrap());
    ensure(ws.leq(&lhs, &rhs), e("residual of a convex combination"))?;
    ensure(ws.leq(&ws.residual_diff(a, c), &ws.add(&d, &ws.residual_diff(b, c))), e("triangle inequality"))?;
    Ok(())
}

#[test]
fn criterion_1_lattice_laws() {
    let start = Instant::now();
    let out = (|| {
        for seed in 0..LATTICE_INSTANCES {
            lattice_laws(seed)?;
        }
        ensure(start.elapsed() < LATTICE_BUDGET, || format!("over budget: {:?}", start.elapsed()))?;
        Ok(format!("{LATTICE_INSTANCES} instances"))
    })();
    report(1, "lattice laws", start, out);
}

fn scalarization_laws(seed: u64) -> Result<(), String> {
    let mut r = corpus::rng(seed);
    let (ws, s) = sets(&mut r, 3);
    let inf = ws.inf_family(&s);
    let d = ws.residual_diff(&s[0], &s[1]);
    let mut dirs = ws.directions.items.clone();
    dirs.push(random_dual_direction(&mut r, &ws));
    for zs in &dirs {
        let min = s.iter().map(|a| ws.neg_support(zs, a)).min().unwrap();
        ensure(ws.neg_support(zs, &inf) == min, || format!("seed {seed}: scalarization of inf at {zs:?}"))?;
        let lower = ws.neg_support(zs, &s[0]).residual(&ws.neg_support(zs, &s[1]));
        ensure(lower <= ws.neg_support(zs, &d), || format!("seed {seed}: scalar residual bound at {zs:?}"))?;
    }
    let a = &s[0];
    let normals: Vec<Vector> = a.constraints().into_iter().map(|c| c.0).collect();
    let ws2 = ws.with_directions(normals).unwrap();
    ensure(ws2.scalar_hull(a) == *a, || format!("seed {seed}: scalar representation"))?;
    Ok(())
}

#[test]
fn criterion_2_scalarization() {
    let start = Instant::now();
    let out = (|| {
        for seed in 0..300 {
            scalarization_laws(seed)?;
        }
        let b = builtins::example23();
        let (ws, a, bb) = (&b.ws, &b.sets[0].1, &b.sets[1].1);
        let d = ws.residual_diff(a, bb);
        ensure(d.is_empty(), || format!("A÷B = {}", d.describe()))?;
        for n in [v(&[1, 0]), v(&[-1, 0])] {
            let gap = ws.neg_support(&n, a).residual(&ws.neg_support(&n, bb));
            ensure(gap == ExtReal::int(1), || format!("scalar residual at {n:?} is {gap}"))?;
            ensure(ws.neg_support(&n, &d) == ExtReal::PlusInf, || "scalarization of Empty".into())?;
        }
        Ok("300 instances; example23 A÷B = Empty with +1 at (±1,0)".into())
    })();
    report(2, "scalarization laws", start, out);
}

fn recession_laws(seed: u64) -> Result<(), String> {
    let mut r = corpus::rng(seed);
    let (ws, s) = sets(&mut r, 2);
    let (a, b) = (&s[0], &s[1]);
    let e = |law: &'static str| move || format!("seed {seed}: {law}");
    if !a.is_empty() {
        ensure(ws.recession(a) == ws.residual_diff(a, a), e("rec A = A÷A"))?;
    }
    if !a.is_empty() && !b.is_empty() {
        let rs = ws.recession(&ws.add(a, b));
        ensure(rs == ws.add(&ws.recession(a), &ws.recession(b)), e("rec of a sum"))?;
        ensure(rs == ws.inf(&ws.recession(a), &ws.recession(b)), e("rec of a sum as inf"))?;
    }
    if ws.leq(a, b) && !b.is_empty() {
        ensure(ws.leq(&ws.recession(a), &ws.recession(b)), e("monotone"))?;
    }
    let d = ws.residual_diff(a, b);
    if !d.is_empty() {
        let rd = ws.recession(&d);
        ensure(ws.leq(&rd, &ws.recession(a)), e("rec of a residual"))?;
        ensure(ws.leq(&ws.recession(a), &ws.recession(b)), e("nonempty residual orders the recession cones"))?;
        if !b.is_empty() {
            ensure(rd == ws.recession(a), e("rec(A÷B) = rec A"))?;
        }
    }
    if !a.is_empty() {
        let rec = ws.recession(a);
        for zs in &ws.directions.items {
            if ws.neg_support(zs, a).is_finite() {
                ensure(ws.support(zs, &rec) <= ExtReal::int(0), e("finite scalarization is nonpositive on rec"))?;
            }
        }
    }
    Ok(())
}

#[test]
fn criterion_3_recession() {
    let start = Instant::now();
    let out = (|| {
        for seed in 0..500 {
            recession_laws(seed)?;
        }
        Ok("500 instances".to_string())
    })();
    report(3, "recession laws", start, out);
}

fn derivative_instance(r: &mut Rng8) -> Option<(Workspace, SetFunction, Vector, Vector)> {
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

fn derivative_laws(ws: &Workspace, f: &SetFunction, x: &Vector, u: &Vector, r: &mut Rng8) -> Result<(), String> {
    let d = set_derivative(ws, f, x, u).map_err(|e| e.to_string())?;
    ensure(d.exact, || "ParamPoly derivative not exact".into())?;
    let ts = [qr(1, 1 << 30), qr(1, 1 << 10), qr(1, 16), qr(1, 3), q(1), q(3)];
    let qs = ts.iter().map(|t| diff_quotient(ws, f, x, u, t).map_err(|e| e.to_string())).collect::<Result<Vec<_>, _>>()?;
    ensure(qs.windows(2).all(|w| ws.leq(&w[0], &w[1])), || "quotients are not monotone in t".into())?;
    ensure(qs.iter().all(|qt| ws.leq(&d.value, qt)), || "a quotient escapes the derivative".into())?;
    ensure(exact_derivative_value(ws, f, x, &f.eval(ws, x), u) == Some(d.value.clone()), || "shortcut disagrees".into())?;
    let s = qr(5, 2);
    let ds = set_derivative(ws, f, x, &u.scale(&s)).unwrap().value;
    ensure(ds == ws.scale(&s, &d.value).unwrap(), || "not positively homogeneous".into())?;
    let u2 = random_point(r, x.dim(), 2);
    let lam = qr(r.gen_range(1..=3), 4);
    let lam1 = q(1) - &lam;
    let mid = set_derivative(ws, f, x, &u.scale(&lam).add(&u2.scale(&lam1))).unwrap().value;
    let d2 = set_derivative(ws, f, x, &u2).unwrap().value;
    let rhs = ws.add(&ws.scale(&lam, &d.value).unwrap(), &ws.scale(&lam1, &d2).unwrap());
    ensure(ws.leq(&mid, &rhs), || "not sublinear".into())?;
    let d0 = set_derivative(ws, f, x, &Vector::zeros(x.dim())).unwrap().value;
    ensure(d0 == ws.recession(&f.eval(ws, x)), || "zero direction is not the recession cone".into())?;
    let z = random_dual_direction(r, ws);
    let (dini, exact) = scalar_dini(ws, f, &z, x, u);
    ensure(exact && dini <= ws.neg_support(&z, &d.value), || "scalar Dini bound".into())?;
    let inter = scalarized_derivative_intersection(ws, f, x, u, &ws.directions.items);
    ensure(ws.leq(&inter, &d.value), || "scalarized intersection contains the derivative".into())?;
    Ok(())
}

#[test]
fn criterion_4_derivatives() {
    let start = Instant::now();
    let out = (|| {
        let mut count = 0;
        let mut seed = 0u64;
        while count < DERIVATIVE_INSTANCES {
            let mut r = corpus::rng(seed);
            if let Some((ws, f, x, u)) = derivative_instance(&mut r) {
                derivative_laws(&ws, &f, &x, &u, &mut r).map_err(|e| format!("seed {seed}: {e}"))?;
                count += 1;
            }
            seed += 1;
        }
        let c = builtins::circle();
        let f = c.f.unwrap();
        for u in [v(&[1]), v(&[-1])] {
            let d = set_derivative(&c.ws, &f, &v(&[0]), &u).map_err(|e| e.to_string())?;
            ensure(d.value.is_empty(), || format!("circle f'(0,{u:?}) = {}", d.value.describe()))?;
            let dirs = vi::audit_directions(&c.ws, &f, &[]);
            for z in &dirs {
                let (dini, _) = scalar_dini(&c.ws, &f, z, &v(&[0]), &u);
                let near_zero = match &dini {
                    ExtReal::Finite(a) => *a <= circle_tol() && -a.clone() <= circle_tol(),
                    _ => false,
                };
                ensure(near_zero, || format!("circle scalar derivative at {z:?} is {dini}"))?;
            }
            let inter = scalarized_derivative_intersection(&c.ws, &f, &v(&[0]), &u, &dirs);
            let verts = inter.vertices();
            ensure(inter.rays().is_empty() && verts.len() == 1 && verts[0].l1() <= circle_tol(), || {
                format!("scalarized intersection {}", inter.describe())
            })?;
        }
        Ok(format!("{count} ParamPoly instances; circle f'(0,u) = Empty vs {{0}}"))
    })();
    report(4, "derivatives", start, out);
}

fn audit_instance(r: &mut Rng8) -> (Workspace, SetFunction, Vector, CandidateSpace) {
    loop {
        let ws = corpus::random_workspace(r);
        let xdim = r.gen_range(1..=2);
        let f = SetFunction::ParamPoly(random_parampoly(r, &ws, xdim, 6));
        let x0 = random_point(r, xdim, 2);
        if !f.in_domain(&ws, &x0) {
            continue;
        }
        let k = r.gen_range(1..=AUDIT_MAX_GRID);
        let pts = (0..k).map(|_| random_point(r, xdim, 3)).collect();
        return (ws, f, x0, CandidateSpace::new(pts).unwrap());
    }
}

#[test]
fn criterion_5_implication_audit() {
    let start = Instant::now();
    let out = (|| {
        let mut rows = 0;
        for seed in 0..AUDIT_INSTANCES {
            let mut r = corpus::rng(seed);
            let (ws, f, x0, space) = audit_instance(&mut r);
            let finite: Vec<Vector> = ws.directions.items.iter().filter(|_| r.gen_bool(0.6)).cloned().collect();
            let a = vi::implication_audit(&ws, &f, &x0, &space, &ws.directions.items, &finite).map_err(|e| e.to_string())?;
            ensure(a.exact, || format!("seed {seed}: audit not exact"))?;
            let bad = a.violations();
            ensure(bad.is_empty(), || format!("seed {seed}: {} violations", bad.len()))?;
            rows += a.rows.len();
        }
        ensure(start.elapsed() < AUDIT_BUDGET, || format!("over budget: {:?}", start.elapsed()))?;
        Ok(format!("{AUDIT_INSTANCES} instances, {rows} implication rows, 0 violations"))
    })();
    report(5, "implication audit", start, out);
}

#[test]
fn criterion_6_golden_examples() {
    let start = Instant::now();
    let out = (|| {
        let h = builtins::heyde_a();
        let f = h.f.unwrap();
        let grid = CandidateSpace::grid(&v(&[-1, -2]), &v(&[3, 2]), 5).unwrap();
        let dom: Vec<Vector> = grid.points.iter().filter(|p| f.in_domain(&h.ws, p)).cloned().collect();
        let m = CandidateSpace::new(dom.clone()).unwrap();
        let minimal = vi::minimal_set(&h.ws, &f, &m, &grid);
        ensure(!dom.is_empty() && minimal == dom, || format!("heyde(a): {} of {} minimal", minimal.len(), dom.len()))?;
        let dirs = vi::audit_directions(&h.ws, &f, &[]);
        for p in &dom {
            let rep = vi::minimal_check(&h.ws, &f, p, &grid, &dirs).map_err(|e| e.to_string())?;
            ensure(rep.holds, || format!("heyde(a): minimal_check fails at {p:?}"))?;
        }
        let sol = vi::solution_check(&h.ws, &f, &dom, &grid, &dirs).map_err(|e| e.to_string())?;
        ensure(sol.holds, || "heyde(a): solution check fails".into())?;

        let h = builtins::heyde_b();
        let f = h.f.unwrap();
        let grid = CandidateSpace::grid(&v(&[0]), &v(&[1]), 9).unwrap();
        let minimal = vi::minimal_set(&h.ws, &f, &grid, &grid);
        ensure(minimal == vec![v(&[1])], || format!("heyde(b): minimal set {minimal:?}"))?;
        let dirs = vi::audit_directions(&h.ws, &f, &[]);
        let mut passing = Vec::new();
        for p in &grid.points {
            if vi::minimal_check(&h.ws, &f, p, &grid, &dirs).map_err(|e| e.to_string())?.holds {
                passing.push(p.clone());
            }
        }
        ensure(passing == vec![v(&[1])], || format!("heyde(b): minimal_check passes at {passing:?}"))?;

        let n = builtins::no_solution_line();
        let f = n.f.unwrap();
        let g = CandidateSpace::new((0..=4).map(|k| v(&[k])).collect()).unwrap();
        let w = CandidateSpace::new((0..=5).map(|k| v(&[k])).collect()).unwrap();
        let dirs = vi::audit_directions(&n.ws, &f, &[]);
        let inf = vi::infimizer_check(&n.ws, &f, &[v(&[3]), v(&[4])], &g, &dirs).map_err(|e| e.to_string())?;
        ensure(inf.infimizer, || "no_solution_line: {3,4} is not an infimizer".into())?;
        let inf = vi::infimizer_check(&n.ws, &f, &[v(&[4])], &g, &dirs).map_err(|e| e.to_string())?;
        ensure(inf.infimizer, || "no_solution_line: {4} is not an infimizer".into())?;
        let minimal = vi::minimal_set(&n.ws, &f, &g, &w);
        ensure(minimal.is_empty(), || format!("no_solution_line: minimal set {minimal:?}"))?;
        for hi in 1..=8 {
            let g = CandidateSpace::new((0..=hi).map(|k| v(&[k])).collect()).unwrap();
            let w = CandidateSpace::new((0..=hi + 1).map(|k| v(&[k])).collect()).unwrap();
            let minimal = vi::minimal_set(&n.ws, &f, &g, &w);
            ensure(minimal.is_empty(), || format!("no_solution_line: minimal points {minimal:?} on [0,{hi}]"))?;
        }
        Ok(format!("heyde(a) {} minimal points, heyde(b) only x=1, no_solution_line empty", dom.len()))
    })();
    report(6, "golden examples", start, out);
}

fn half_grid(r: &mut Rng8, max: usize) -> Vec<Vector> {
    let n = r.gen_range(1..=max);
    (0..n).map(|_| Vector::new(vec![qr(r.gen_range(-8..=8), 2)])).collect()
}

#[test]
fn criterion_7_vector_optimization() {
    let start = Instant::now();
    let out = (|| {
        for seed in 0..REGULARITY_INSTANCES {
            let mut r = corpus::rng(seed);
            let ws = corpus::workspace_of_kind([0, 2][r.gen_range(0..2)]);
            let f = SetFunction::EpiVector(EpiVector::new(&ws, random_vector_function(&mut r, 2, 1)).unwrap());
            let x = random_point(&mut r, 1, 3);
            let u = random_point(&mut r, 1, 2);
            let reg = regularity_check(&ws, &f, &x, &u, &ws.directions.items).map_err(|e| e.to_string())?;
            ensure(reg.strong && reg.weak && reg.exact, || format!("seed {seed}: epigraph not strongly regular"))?;
        }

        for seed in 0..EFFICIENCY_INSTANCES {
            let mut r = corpus::rng(1000 + seed);
            let ws = corpus::random_workspace(&mut r);
            let psi = VectorMap::Pwl(random_vector_function(&mut r, 2, 1));
            let grid = half_grid(&mut r, EFFICIENCY_MAX_GRID);
            let rep = vectoropt::efficient_set(&ws, &psi, &grid).map_err(|e| e.to_string())?;
            ensure(rep.agrees_with_minimal, || format!("seed {seed}: Eff differs from the minimal points"))?;
            ensure(rep.eff_plus_c_identity, || format!("seed {seed}: Eff + C differs from the union of minimal values"))?;
        }

        let ws = Workspace::orthant2();
        let upper = ws.canonicalize(&[(v(&[-1, 0]), q(0))]).unwrap();
        ensure(vectoropt::infdir_plus_cone(&ws, &v(&[0, -1])) == upper, || "(0,-1)∞ + C".into())?;
        ensure(vectoropt::infdir_plus_cone(&ws, &v(&[1, -1])).is_empty(), || "(1,-1)∞ + C".into())?;
        ensure(vectoropt::infdir_plus_cone(&ws, &v(&[0, 0])) == ws.cone_set(), || "0 + C".into())?;
        ensure(vectoropt::infdir_plus_cone(&ws, &v(&[-1, -1])).is_all(), || "(-1,-1)∞ + C".into())?;

        let (mut eff, mut non_eff) = (0, 0);
        for seed in 0..MINTY_INSTANCES {
            let mut r = corpus::rng(2000 + seed);
            let psi = VectorMap::Pwl(random_vector_function(&mut r, 2, 1));
            let grid: Vec<Vector> = (-4..=4).map(|k| Vector::new(vec![qr(k, 2)])).collect();
            let x0 = grid[r.gen_range(0..grid.len())].clone();
            let rep = vectoropt::vector_minty_check(&ws, &psi, &x0, &grid, &[], &vectoropt::default_t_params())
                .map_err(|e| e.to_string())?;
            ensure(rep.principle_applies && rep.consistent(), || format!("seed {seed}: Minty disagrees with efficiency"))?;
            if rep.efficient {
                eff += 1;
            } else {
                non_eff += 1;
            }
        }
        ensure(eff > 0 && non_eff > 0, || format!("one-sided sample: {eff} efficient, {non_eff} not"))?;

        let nc = vectoropt::noncommutation_example(&ws);
        ensure(nc.limsup == Some(ExtendedPoint::Inf(v(&[0, -1]))), || format!("limsup {:?}", nc.limsup))?;
        ensure(nc.strictly_smaller, || "z_t: limits commute".into())?;
        Ok(format!(
            "{REGULARITY_INSTANCES} SR, {EFFICIENCY_INSTANCES} Eff, Minty {eff}/{non_eff} efficient/not, noncommutation strict"
        ))
    })();
    report(7, "vector optimization", start, out);
}

fn scenario_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

fn run_cli(scenario: &Path, report_path: &Path) -> (i32, Vec<u8>) {
    let status = Command::new(env!("CARGO_BIN_EXE_setvi"))
        .args(["check-vi", "--scenario"])
        .arg(scenario)
        .arg("--report")
        .arg(report_path)
        .output()
        .expect("run setvi");
    let bytes = std::fs::read(report_path).unwrap_or_default();
    (status.status.code().unwrap_or(-1), bytes)
}

#[test]
fn criterion_8_cli_scenarios() {
    let start = Instant::now();
    let out = (|| {
        let tmp = std::env::temp_dir().join(format!("setvi-acceptance-{}", std::process::id()));
        std::fs::create_dir_all(&tmp).map_err(|e| e.to_string())?;
        let mut files: Vec<PathBuf> = std::fs::read_dir(scenario_dir())
            .map_err(|e| e.to_string())?
            .map(|e| e.unwrap().path())
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        files.sort();
        ensure(files.len() == builtins::NAMES.len(), || format!("{} scenario files", files.len()))?;
        for p in &files {
            let name = p.file_stem().unwrap().to_string_lossy().to_string();
            let (c1, r1) = run_cli(p, &tmp.join(format!("{name}.1.json")));
            let (c2, r2) = run_cli(p, &tmp.join(format!("{name}.2.json")));
            ensure(c1 == 0 && c2 == 0, || format!("{name}: exit {c1}/{c2}"))?;
            ensure(!r1.is_empty() && r1 == r2, || format!("{name}: reports differ"))?;
        }
        let broken = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/broken.json");
        let (code, _) = run_cli(&broken, &tmp.join("broken.json"));
        ensure(code == 1, || format!("broken scenario exits {code}"))?;
        let _ = std::fs::remove_dir_all(&tmp);
        Ok(format!("{} scenarios byte-identical, broken exits 1", files.len()))
    })();
    report(8, "CLI scenarios", start, out);
}
