use super::*;
use crate::rat::{q, qr};

fn v(x: &[i64]) -> Vector {
    Vector::ints(x)
}

fn orthant_env() -> (Workspace, BTreeMap<String, UpperSet>) {
    (Workspace::orthant2(), BTreeMap::new())
}

#[test]
fn expressions_evaluate() {
    let (ws, env) = orthant_env();
    let e = |s: &str| expr::eval_expr(&ws, s, &env).unwrap();
    assert_eq!(e("pt(1,2)"), ws.translated_cone(&v(&[1, 2])));
    assert_eq!(e("cone"), ws.cone_set());
    assert!(e("all").is_all());
    assert!(e("empty").is_empty());
    assert_eq!(e("inf(pt(0,1), pt(1,0))"), ws.inf(&ws.translated_cone(&v(&[0, 1])), &ws.translated_cone(&v(&[1, 0]))));
    assert_eq!(e("sup(pt(0,1), pt(1,0))"), ws.translated_cone(&v(&[1, 1])));
    assert_eq!(e("add(pt(1,1), pt(-1,2))"), ws.translated_cone(&v(&[0, 3])));
    assert_eq!(e("scale(1/2, pt(2,4))"), ws.translated_cone(&v(&[1, 2])));
    assert_eq!(e("res(pt(2,3), pt(1,1))"), ws.translated_cone(&v(&[1, 2])));
    assert_eq!(e("rec(pt(5,-5))"), ws.cone_set());
    assert_eq!(e("hs(-1,0;-2)"), ws.canonicalize(&[(v(&[-1, 0]), q(-2))]).unwrap());
    assert_eq!(e(" hs( -1 , -1 ; -1/2 ) "), ws.canonicalize(&[(v(&[-1, -1]), qr(-1, 2))]).unwrap());
}

#[test]
fn expression_errors() {
    let (ws, env) = orthant_env();
    let e = |s: &str| expr::eval_expr(&ws, s, &env).unwrap_err();
    assert!(matches!(e("pt(1,2"), expr::ExprError::Parse { .. }));
    assert!(matches!(e("pt(1,2) x"), expr::ExprError::Parse { .. }));
    assert!(matches!(e("pt(1,#)"), expr::ExprError::Parse { .. }));
    assert!(matches!(e("nope(1)"), expr::ExprError::Eval(_)));
    assert!(matches!(e("A"), expr::ExprError::Eval(_)));
    assert!(matches!(e("pt(1)"), expr::ExprError::Eval(_)));
    assert!(matches!(e("hs(1,0;0)"), expr::ExprError::Eval(_)));
    assert!(matches!(e("add(pt(1,1))"), expr::ExprError::Eval(_)));
}

#[test]
fn plot_is_deterministic_and_clipped() {
    let ws = Workspace::orthant2();
    let sets = vec![("C".to_string(), ws.cone_set()), ("none".to_string(), UpperSet::Empty)];
    let a = plot::plot_svg(2, &sets).unwrap();
    assert_eq!(a, plot::plot_svg(2, &sets).unwrap());
    assert_eq!(a.matches("<polygon").count(), 1);
    assert!(a.contains("none (empty)"));
    // viewport [-2, 2]^2: the orthant is the upper right quarter
    assert!(a.contains(r#"points="240.00,240.00 480.00,240.00 480.00,0.00 240.00,0.00""#), "{a}");
    assert_eq!(plot::plot_svg(1, &[]).unwrap_err(), plot::PlotError::DimensionUnsupported(1));
}

#[test]
fn builtin_scenarios_pass_and_repeat() {
    for (name, _) in BUILTIN_SCENARIOS {
        let s = load(&format!("builtin:{name}")).unwrap();
        let a = run(&s, 1);
        let bad: Vec<_> = a.tasks.iter().filter(|t| t.status != "ok").map(|t| (t.id.clone(), t.mismatches.clone(), t.summary.clone())).collect();
        assert_eq!(a.exit_code, EXIT_OK, "{name}: {bad:?}");
        let b = run(&s, 2);
        assert_eq!(render_report(&a.report), render_report(&b.report), "{name}");
    }
}

#[test]
fn example23_report_values() {
    let s = load("builtin:example23").unwrap();
    let out = run(&s, 1);
    let r = &out.report["tasks"][0]["result"];
    assert_eq!(r["value"]["tag"], "empty");
    assert_eq!(r["scalar_residuals"][0]["zstar"], json!([1, 0]));
    assert_eq!(r["scalar_residuals"][1]["value"], json!(1));
    let svg = plot::plot_svg(2, &plot_sets(&s).unwrap()).unwrap();
    assert_eq!(svg.matches("<polygon").count(), 3);
}

#[test]
fn validation_errors() {
    let bad = |text: &str| matches!(Scenario::parse(text, None), Err(CliError::Validation(_)));
    assert!(bad("{"));
    assert!(bad(r#"{"workspace": {"dim": 2}, "tasks": []}"#));
    assert!(bad(r#"{"schema_version": 9, "workspace": {"dim": 2}, "tasks": []}"#));
    assert!(bad(r#"{"schema_version": 1, "workspace": {"dim": 3}, "tasks": []}"#));
    assert!(bad(r#"{"schema_version": 1, "workspace": {"dim": 2}, "tasks": [{"op": "eval", "function": "f", "x": [0]}]}"#));
    assert!(bad(r#"{"schema_version": 1, "workspace": {"dim": 2}, "tasks": [{"op": "bogus"}]}"#));
    assert!(bad(r#"{"schema_version": 1, "workspace": {"builtin": "circle"}, "functions": {"f": {"builtin": "abs_pair"}}, "tasks": []}"#));
    assert!(bad(r#"{"schema_version": 1, "workspace": {"dim": 2}, "tasks": [{"id": "a", "op": "noncommutation"}, {"id": "a", "op": "noncommutation"}]}"#));
    assert!(bad(r#"{"schema_version": 1, "workspace": {"dim": 2}, "tasks": [{"op": "set", "expr": "pt(1)"}]}"#));
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/broken.json")).unwrap();
    assert!(bad(&text));
}

#[test]
fn custom_functions_and_expectations() {
    let text = r#"{
        "schema_version": 1,
        "workspace": {"dim": 2, "cone": [[1, 0], [0, 1]]},
        "functions": {
            "g": {"parampoly": {"xdim": 1, "normals": [[-1, 0], [0, -1]],
                  "offsets": [[{"coef": [1], "c": 0}, {"coef": [-1], "c": 0}], [{"coef": [0], "c": "1/2"}]],
                  "domain": [{"a": [1], "b": 2}]}},
            "h": {"epivector": {"xdim": 1, "components": [[{"coef": [1], "c": 0}], [{"coef": [-1], "c": 0}]]}}
        },
        "spaces": {"G": {"points": [[-1], [0], [1]]}},
        "tasks": [
            {"id": "e", "op": "eval", "function": "g", "x": [1], "expect": {"value.vertices": [[1, "-1/2"]]}},
            {"id": "wrong", "op": "eval", "function": "h", "x": [1], "expect": {"value.vertices": [[0, 0]]}},
            {"id": "out", "op": "eval", "function": "g", "x": [3], "expect": {"value.tag": "empty"}}
        ]
    }"#;
    let s = Scenario::parse(text, None).unwrap();
    let out = run(&s, 1);
    assert_eq!(out.tasks[0].status, "ok", "{:?}", out.tasks[0]);
    assert_eq!(out.tasks[1].status, "mismatch");
    assert_eq!(out.tasks[2].status, "ok");
    assert_eq!(out.exit_code, EXIT_FAILURE);
}

#[test]
fn tolerance_override_reaches_oracles() {
    let mut s = load("builtin:circle").unwrap();
    s.set_tolerance(&qr(1, 1000));
    match &s.functions["f"] {
        SetFunction::Oracle(o) => assert_eq!(o.tolerance, qr(1, 1000)),
        _ => panic!("circle is an oracle"),
    }
    assert_eq!(run(&s, 1).report["environment"]["tolerance"], json!("1/1000"));
}

#[test]
fn dotted_lookup() {
    let v = json!({"a": {"b": [1, {"c": true}]}});
    assert_eq!(lookup(&v, "a.b.1.c"), Some(&json!(true)));
    assert_eq!(lookup(&v, "a.b.2"), None);
    assert_eq!(lookup(&v, "a.x"), None);
}
