use clap::{Parser, Subcommand};
use setvi::cli::{self, expr, plot, CliError, EXIT_FAILURE, EXIT_OK, EXIT_VALIDATION};
use setvi::lattice::Workspace;
use setvi::rat::{parse_q, q, Vector};
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "setvi", version, about = "Set-valued variational inequality checker")]
struct Args {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario file (or `builtin:<name>`) and report every task.
    CheckVi {
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        plot: Option<PathBuf>,
        /// Oracle tolerance override, e.g. `1/1000000`.
        #[arg(long)]
        tolerance: Option<String>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Evaluate a lattice expression such as `res(pt(0,1), hs(-1,0;1))`.
    LatticeEval {
        #[arg(long)]
        expr: String,
        /// Cone generators as `x,y;x,y`; the nonnegative orthant by default.
        #[arg(long)]
        cone: Option<String>,
        #[arg(long, default_value_t = 2)]
        dim: usize,
    },
}

fn fail(code: i32, msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code as u8)
}

fn check_vi(scenario: &str, report: Option<PathBuf>, plot_path: Option<PathBuf>, tolerance: Option<String>, jobs: usize) -> ExitCode {
    let mut s = match cli::load(scenario) {
        Ok(s) => s,
        Err(e) => return fail(EXIT_VALIDATION, &e.to_string()),
    };
    if let Some(t) = tolerance {
        match parse_q(&t) {
            Some(t) if t > q(0) => s.set_tolerance(&t),
            _ => return fail(EXIT_VALIDATION, &format!("bad tolerance {t:?}")),
        }
    }
    let plot_path = plot_path.or_else(|| s.output.plot.clone());
    let svg = match &plot_path {
        None => None,
        Some(_) => match cli::plot_sets(&s).and_then(|sets| plot::plot_svg(s.ws.dim, &sets).map_err(CliError::from)) {
            Ok(svg) => Some(svg),
            Err(e) => return fail(EXIT_VALIDATION, &e.to_string()),
        },
    };
    let out = cli::run(&s, jobs.max(1));
    for t in &out.tasks {
        println!("[{}] {} ({}): {}", t.status, t.id, t.op, t.summary);
        for m in &t.mismatches {
            println!("    expected {m}");
        }
    }
    let failed = out.tasks.iter().filter(|t| t.status != "ok").count();
    println!("{}: {} tasks, {} failed", s.name, out.tasks.len(), failed);
    if let Some(p) = report.or_else(|| s.output.report.clone()) {
        if let Err(e) = cli::write_file(&p, &cli::render_report(&out.report)) {
            return fail(EXIT_FAILURE, &e.to_string());
        }
    }
    if let (Some(p), Some(svg)) = (plot_path, svg) {
        if let Err(e) = cli::write_file(&p, &svg) {
            return fail(EXIT_FAILURE, &e.to_string());
        }
    }
    ExitCode::from(out.exit_code as u8)
}

fn lattice_eval(src: &str, cone: Option<String>, dim: usize) -> ExitCode {
    let gens: Result<Vec<Vector>, String> = match cone {
        None => Ok((0..dim).map(|i| Vector::new((0..dim).map(|j| q((i == j) as i64)).collect())).collect()),
        Some(c) => c
            .split(';')
            .filter(|g| !g.trim().is_empty())
            .map(|g| {
                g.split(',')
                    .map(|x| parse_q(x.trim()).ok_or_else(|| format!("bad cone coordinate {x:?}")))
                    .collect::<Result<Vec<_>, _>>()
                    .map(Vector::new)
            })
            .collect(),
    };
    let ws = match gens.and_then(|g| Workspace::new(dim, g, vec![]).map_err(|e| e.to_string())) {
        Ok(ws) => ws,
        Err(e) => return fail(EXIT_VALIDATION, &e),
    };
    match expr::eval_expr(&ws, src, &BTreeMap::new()) {
        Ok(s) => {
            println!("{}", s.describe());
            println!("{}", serde_json::to_string(&s.to_json()).expect("serializable"));
            ExitCode::from(EXIT_OK as u8)
        }
        Err(e) => fail(EXIT_VALIDATION, &e.to_string()),
    }
}

fn main() -> ExitCode {
    match Args::parse().cmd {
        Cmd::CheckVi { scenario, report, plot, tolerance, jobs } => check_vi(&scenario, report, plot, tolerance, jobs),
        Cmd::LatticeEval { expr, cone, dim } => lattice_eval(&expr, cone, dim),
    }
}
