use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use hcx_core::complex::HilbertComplex;
use hcx_core::estimator::{decompose_error, second_order_estimate, two_sided_estimate, EstimateOptions};
use hcx_core::instances::Instance;
use hcx_core::linalg::io::{read_vector_csv, write_vector_csv};
use hcx_core::linalg::vector::{deterministic_vector, scaled, add};
use hcx_core::linalg::InnerProduct;
use hcx_core::manifest::{load_instance, write_instance};
use hcx_core::solver::{
    check_compatibility, solve_first_order_with, solve_second_order, Backend, FirstOrderProblem, SecondOrderProblem,
    SolveOptions, COMPAT_TOL,
};
use hcx_core::Error;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::{RunConfig, Tolerances};
use crate::{json, BackendArg, BuildArgs, CliError, Command, ConstantsArgs, DataArgs, DecomposeArgs, EstimateArgs, ReportArgs, SolveArgs};

pub const PROBLEM_FILE: &str = "problem.json";
pub const SOLVE_REPORT: &str = "solve_report.json";
pub const BOUND_REPORT: &str = "bound_report.json";

pub fn dispatch(cmd: &Command) -> Result<(), CliError> {
    match cmd {
        Command::Build(a) => cmd_build(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Constants(a) => cmd_constants(a),
        Command::Estimate(a) => cmd_estimate(a),
        Command::Decompose(a) => cmd_decompose(a),
        Command::Report(a) => cmd_report(a),
    }
}

/// Seconds since the epoch; the only field excluded from determinism checks.
fn timestamp() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

fn envelope(command: &str, result: Value) -> Value {
    json!({
        "command": command,
        "timestamp_unix": timestamp(),
        "result": result,
    })
}

fn emit(value: &Value, out_dir: Option<&Path>, file: &str) -> Result<(), CliError> {
    let text = json::to_string(value)?;
    match out_dir {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join(file), text)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

/// Metadata written next to a manufactured bundle.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemFile {
    pub level: usize,
    pub order: u8,
    pub recipe: hcx_core::instances::Recipe,
    pub seed: u64,
    pub perturbation: f64,
    pub exact_norm: f64,
    pub error_norm: f64,
}

fn manifest_dir(path: &Path) -> PathBuf {
    if path.is_dir() {
        path.to_path_buf()
    } else {
        path.parent().map(Path::to_path_buf).unwrap_or_default()
    }
}

fn read_problem(manifest: &Path) -> Option<ProblemFile> {
    let text = fs::read_to_string(manifest_dir(manifest).join(PROBLEM_FILE)).ok()?;
    serde_json::from_str(&text).ok()
}

fn tolerances(config: Option<&Path>) -> Result<Tolerances, CliError> {
    match config {
        Some(p) => Ok(RunConfig::read(p)?.tolerances),
        None => Ok(Tolerances::default()),
    }
}

fn positive(v: f64, what: &str) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Config(format!("{what} must be positive, got {v}")))
    }
}

fn read_or_zero(path: Option<&Path>, n: usize, what: &'static str) -> Result<Vec<f64>, CliError> {
    match path {
        None => Ok(vec![0.0; n]),
        Some(p) => {
            let v = read_vector_csv(p)?;
            if v.len() != n {
                return Err(Error::DimensionMismatch {
                    context: what,
                    expected: n,
                    found: v.len(),
                }
                .into());
            }
            Ok(v)
        }
    }
}

struct Loaded {
    instance: Instance,
    level: usize,
    order: u8,
    tol: Tolerances,
    f: Vec<f64>,
    g: Vec<f64>,
    k: Vec<f64>,
}

fn load_data(a: &DataArgs) -> Result<Loaded, CliError> {
    let (_, instance) = load_instance(&a.manifest)?;
    let problem = read_problem(&a.manifest);
    let level = a
        .level
        .or(problem.as_ref().map(|p| p.level))
        .ok_or_else(|| CliError::Config("--level is required when no problem.json is present".into()))?;
    let order = a.order.or(problem.as_ref().map(|p| p.order)).unwrap_or(1);
    let c = &instance.complex;
    c.check_level(level)?;
    let mut tol = tolerances(a.config.as_deref())?;
    if let Some(t) = a.tol {
        tol.solver_tol = positive(t, "--tol")?;
    }
    let l = level as isize;
    let f_dim = if order == 2 { c.dim(l) } else { c.dim(l + 1) };
    let f = read_or_zero(a.f.as_deref(), f_dim, "datum f")?;
    let g = read_or_zero(a.g.as_deref(), c.dim(l - 1), "datum g")?;
    let k = read_or_zero(a.k.as_deref(), c.dim(l), "datum k")?;
    Ok(Loaded {
        instance,
        level,
        order,
        tol,
        f,
        g,
        k,
    })
}

fn cmd_build(a: &BuildArgs) -> Result<(), CliError> {
    let cfg = RunConfig::read(&a.config)?;
    let spec = cfg
        .instance
        .clone()
        .ok_or_else(|| CliError::Config("missing [instance] section".into()))?;
    let out = a
        .out
        .clone()
        .or(cfg.output.dir.clone())
        .ok_or_else(|| CliError::Config("no output directory (--out or [output] dir)".into()))?;
    let instance = spec.build().map_err(|e| match e {
        Error::InvalidSpec(m) => CliError::Config(m),
        e => e.into(),
    })?;
    write_instance(&out, &instance, Some(&spec))?;
    let c = &instance.complex;
    let mut summary = json!({
        "name": instance.name,
        "dims": (0..c.num_spaces() as isize).map(|l| c.dim(l)).collect::<Vec<_>>(),
        "operators": c.names().iter().map(|n| n.clone().unwrap_or_default()).collect::<Vec<_>>(),
        "complex_check": c.verify_complex().pass,
    });
    if let Some(p) = &cfg.problem {
        let seed = a.seed.unwrap_or(cfg.seed);
        let problem = write_bundle(&out, &instance, p, seed)?;
        summary["problem"] = serde_json::to_value(problem)?;
    }
    emit(&envelope("build", summary), Some(&out), "build.json")
}

fn write_bundle(
    out: &Path,
    instance: &Instance,
    p: &crate::config::ProblemConfig,
    seed: u64,
) -> Result<ProblemFile, CliError> {
    let c = &instance.complex;
    let level = p.level;
    c.check_level(level)?;
    let l = level as isize;
    let m = c.gram(l);
    let (exact, f, g, k, y) = if p.order == 2 {
        let s = instance.manufacture_second_order(level, seed)?;
        (s.exact_x, s.f, s.g, s.k, Some(s.y))
    } else {
        let s = instance.manufacture(level, p.recipe, seed)?;
        (s.exact_x, s.f, s.g, s.k, None)
    };
    let pert = deterministic_vector(exact.len(), seed.wrapping_add(1000));
    let pn = m.norm(&pert);
    let scale = if pn > 0.0 { p.perturbation * m.norm(&exact) / pn } else { 0.0 };
    let x_approx = add(&exact, &scaled(scale, &pert));
    write_vector_csv(&out.join("exact_x.csv"), &exact)?;
    write_vector_csv(&out.join("x_approx.csv"), &x_approx)?;
    write_vector_csv(&out.join("f.csv"), &f)?;
    write_vector_csv(&out.join("g.csv"), &g)?;
    write_vector_csv(&out.join("k.csv"), &k)?;
    if let Some(y) = y {
        write_vector_csv(&out.join("y_exact.csv"), &y)?;
        write_vector_csv(&out.join("y_approx.csv"), &c.apply_op(l, &x_approx))?;
    }
    let problem = ProblemFile {
        level,
        order: p.order,
        recipe: p.recipe,
        seed,
        perturbation: p.perturbation,
        exact_norm: m.norm(&exact),
        error_norm: m.norm(&hcx_core::linalg::vector::sub(&exact, &x_approx)),
    };
    fs::write(out.join(PROBLEM_FILE), json::to_string(&problem)?)?;
    Ok(problem)
}

fn incompatible(c: &HilbertComplex, d: &Loaded) -> Result<Option<Value>, CliError> {
    if d.order != 1 {
        return Ok(None);
    }
    let prob = FirstOrderProblem::new(c, d.level, d.f.clone(), d.g.clone(), d.k.clone())?;
    let rep = check_compatibility(&prob, COMPAT_TOL)?;
    if rep.pass {
        Ok(None)
    } else {
        Ok(Some(serde_json::to_value(&rep)?))
    }
}

fn cmd_solve(a: &SolveArgs) -> Result<(), CliError> {
    let d = load_data(&a.data)?;
    let c = &d.instance.complex;
    let out = a.data.out.as_deref();
    if let Some(rep) = incompatible(c, &d)? {
        emit(&envelope("solve", json!({ "compatibility": rep })), out, SOLVE_REPORT)?;
        return Err(Error::Incompatible(format!(
            "distances f: {}, g: {}, k: {}",
            rep["f"]["distance"], rep["g"]["distance"], rep["k"]["distance"]
        ))
        .into());
    }
    let opts = SolveOptions {
        backend: match a.backend {
            BackendArg::Variational => Backend::Variational,
            BackendArg::Saddle => Backend::Saddle,
        },
        tol: d.tol.solver_tol,
        start_salt: a.seed,
        ..SolveOptions::default()
    };
    let (result, x) = if d.order == 2 {
        let prob = SecondOrderProblem {
            complex: c,
            level: d.level,
            f: d.f.clone(),
            g: d.g.clone(),
            k: d.k.clone(),
        };
        let rep = solve_second_order(&prob, &opts)?;
        if let Some(dir) = out {
            fs::create_dir_all(dir)?;
            write_vector_csv(&dir.join("y.csv"), &rep.y)?;
        }
        let x = rep.x().to_vec();
        (serde_json::to_value(&rep)?, x)
    } else {
        let prob = FirstOrderProblem::new(c, d.level, d.f.clone(), d.g.clone(), d.k.clone())?;
        let rep = solve_first_order_with(&prob, &opts)?;
        (serde_json::to_value(&rep)?, rep.x)
    };
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        write_vector_csv(&dir.join("x.csv"), &x)?;
    }
    let body = json!({ "level": d.level, "order": d.order, "report": result });
    emit(&envelope("solve", body), out, SOLVE_REPORT)
}

fn cmd_constants(a: &ConstantsArgs) -> Result<(), CliError> {
    let (_, instance) = load_instance(&a.manifest)?;
    let c = &instance.complex;
    let tol = positive(a.tol.unwrap_or(1e-12), "--tol")?;
    let levels: Vec<usize> = match a.level {
        Some(l) => {
            if l >= c.num_ops() {
                return Err(Error::InvalidLevel {
                    level: l,
                    spaces: c.num_spaces(),
                }
                .into());
            }
            vec![l]
        }
        None => (0..c.num_ops()).collect(),
    };
    let mut rows = Vec::new();
    for l in levels {
        if c.is_zero_op(l as isize) {
            rows.push(json!({ "level": l, "c_l": "infinite", "note": "zero operator" }));
            continue;
        }
        let r = c.poincare_constant(l, tol)?;
        let rs = c.poincare_constant_adjoint(l, tol)?;
        let mut v = serde_json::to_value(&r)?;
        v["c_l_adjoint"] = json!(rs.c_l);
        v["relative_difference"] = json!((r.c_l - rs.c_l).abs() / r.c_l);
        rows.push(v);
    }
    emit(&envelope("constants", json!({ "constants": rows })), a.out.as_deref(), "constants.json")
}

fn cmd_estimate(a: &EstimateArgs) -> Result<(), CliError> {
    let d = load_data(&a.data)?;
    let c = &d.instance.complex;
    let out = a.data.out.as_deref();
    let l = d.level as isize;
    let x_approx = read_or_zero(Some(&a.x_approx), c.dim(l), "approximation")?;
    let exact = match &a.exact {
        Some(p) => Some(read_or_zero(Some(p), c.dim(l), "exact solution")?),
        None => None,
    };
    let budget = a.budget.unwrap_or(d.tol.budget);
    if budget < 1 {
        return Err(CliError::Config("--budget must be at least 1".into()));
    }
    let opts = EstimateOptions {
        budget,
        tol: d.tol.solver_tol,
        stop_tol: d.tol.bound_tol,
        constants: None,
        exact_x: exact,
    };
    let (body, exhausted) = if d.order == 2 {
        let y_approx = match &a.y_approx {
            Some(p) => read_or_zero(Some(p), c.dim(l + 1), "approximation y")?,
            None => c.apply_op(l, &x_approx),
        };
        let b = second_order_estimate(c, d.level, &x_approx, &y_approx, &d.f, &d.g, &d.k, &opts)?;
        if let Some(dir) = out {
            fs::create_dir_all(dir)?;
            fs::write(dir.join("traces.csv"), b.e.trace_csv())?;
            fs::write(dir.join("traces_h.csv"), b.h.trace_csv())?;
        }
        let exhausted = b.e.budget_exhausted || b.h.budget_exhausted;
        (json!({ "level": d.level, "order": 2, "budget": budget, "bounds": b }), exhausted)
    } else {
        let r = two_sided_estimate(c, d.level, &x_approx, &d.f, &d.g, &d.k, &opts)?;
        if let Some(dir) = out {
            fs::create_dir_all(dir)?;
            fs::write(dir.join("traces.csv"), r.trace_csv())?;
        }
        let exhausted = r.budget_exhausted;
        (json!({ "level": d.level, "order": 1, "budget": budget, "bounds": r }), exhausted)
    };
    emit(&envelope("estimate", body), out, BOUND_REPORT)?;
    if exhausted {
        return Err(CliError::BudgetExhausted);
    }
    Ok(())
}

fn cmd_decompose(a: &DecomposeArgs) -> Result<(), CliError> {
    let (_, instance) = load_instance(&a.manifest)?;
    let level = a
        .level
        .or(read_problem(&a.manifest).map(|p| p.level))
        .ok_or_else(|| CliError::Config("--level is required when no problem.json is present".into()))?;
    let c = &instance.complex;
    c.check_level(level)?;
    let n = c.dim(level as isize);
    let tol = positive(a.tol.unwrap_or(1e-12), "--tol")?;
    let x_approx = read_or_zero(Some(&a.x_approx), n, "approximation")?;
    // Without an exact solution, decompose x̃ itself (as the error of 0).
    let (base, target) = match &a.exact {
        Some(p) => (x_approx, read_or_zero(Some(p), n, "exact solution")?),
        None => (vec![0.0; n], x_approx),
    };
    let d = decompose_error(c, level, &base, &target, tol)?;
    if let Some(dir) = a.out.as_deref() {
        fs::create_dir_all(dir)?;
        write_vector_csv(&dir.join("component_prev.csv"), &d.e_prev)?;
        write_vector_csv(&dir.join("component_kernel.csv"), &d.e_kernel)?;
        write_vector_csv(&dir.join("component_adj.csv"), &d.e_adj)?;
    }
    let body = json!({ "level": level, "of_error": a.exact.is_some(), "decomposition": d });
    emit(&envelope("decompose", body), a.out.as_deref(), "decomposition.json")
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub run: String,
    pub kind: String,
    pub level: String,
    pub lower_total: String,
    pub upper_total: String,
    pub efficiency_index: String,
    pub status: String,
}

fn num(v: &Value) -> String {
    match v.as_f64() {
        Some(x) if v.is_f64() => format!("{x:.16e}"),
        Some(_) => v.to_string(),
        None => String::new(),
    }
}

fn summarize(run: &str, dir: &Path) -> ReportRow {
    let mut row = ReportRow {
        run: run.into(),
        kind: String::new(),
        level: String::new(),
        lower_total: String::new(),
        upper_total: String::new(),
        efficiency_index: String::new(),
        status: "warning: missing report".into(),
    };
    let read = |f: &str| -> Option<Value> { serde_json::from_str(&fs::read_to_string(dir.join(f)).ok()?).ok() };
    if let Some(v) = read(BOUND_REPORT) {
        let r = &v["result"];
        let totals = if r["order"] == 2 { &r["bounds"]["e"]["totals"] } else { &r["bounds"]["totals"] };
        row.kind = "estimate".into();
        row.level = r["level"].to_string();
        row.lower_total = num(&totals["lower_total"]);
        row.upper_total = num(&totals["upper_total"]);
        row.efficiency_index = num(&totals["efficiency_index"]);
        row.status = if totals["valid"] == true { "ok".into() } else { "invalid".into() };
    } else if let Some(v) = read(SOLVE_REPORT) {
        let r = &v["result"];
        row.kind = "solve".into();
        row.level = r["level"].to_string();
        row.status = if r.get("report").is_some() { "ok".into() } else { "incompatible".into() };
    }
    row
}

pub fn collect_rows(runs: &Path, expect: &[String]) -> Result<Vec<ReportRow>, CliError> {
    let mut rows: BTreeMap<String, ReportRow> = BTreeMap::new();
    if runs.is_dir() {
        for entry in fs::read_dir(runs)? {
            let entry = entry?;
            if entry.file_type()?.is_dir() {
                let name = entry.file_name().to_string_lossy().into_owned();
                rows.insert(name.clone(), summarize(&name, &entry.path()));
            }
        }
    } else {
        return Err(CliError::Config(format!("{} is not a directory", runs.display())));
    }
    for name in expect {
        rows.entry(name.clone()).or_insert_with(|| summarize(name, &runs.join(name)));
    }
    Ok(rows.into_values().collect())
}

fn cmd_report(a: &ReportArgs) -> Result<(), CliError> {
    let rows = collect_rows(&a.runs, &a.expect)?;
    let mut out = String::from("run,kind,level,lower_total,upper_total,efficiency_index,status\n");
    for r in &rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.run, r.kind, r.level, r.lower_total, r.upper_total, r.efficiency_index, r.status
        ));
    }
    match &a.out {
        Some(p) => fs::write(p, out)?,
        None => print!("{out}"),
    }
    Ok(())
}
