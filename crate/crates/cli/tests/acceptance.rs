//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//!
//! Runs with `harness = false` so that the verdict lines are printed even
//! when every criterion passes.

use std::f64::consts::PI;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use hcx_core::complex::{dense_slice, HilbertComplex, RangeSide, PROJECTION_TOL};
use hcx_core::estimator::{
    conforming_functional, decompose_error, kernel_attaining_potentials, lower_bound_f_part, lower_bound_g_part,
    lower_bound_kernel_part, minimize_upper_f, minimize_upper_g, second_order_estimate, upper_bound_f_part,
    upper_bound_g_part, upper_bound_kernel_part, BoundReport, Constants, EstimateOptions, MinimizeOptions,
    TrialFields,
};
use hcx_core::instances::{
    build_cycle, build_grid, build_path, Dirichlet, Epsilon, GammaT, GridSpec, Instance, Recipe,
};
use hcx_core::linalg::vector::{add, deterministic_vector, sub};
use hcx_core::linalg::{InnerProduct, DEFAULT_CAP};
use hcx_core::solver::{solve_first_order, Backend, FirstOrderProblem};
use hcx_core::Result;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

/// Worst observed value against a limit; `NaN` counts as a failure.
#[derive(Default)]
struct Worst {
    value: f64,
    at: String,
}

impl Worst {
    fn see(&mut self, v: f64, at: impl FnOnce() -> String) {
        if v.is_nan() || v > self.value {
            self.value = if v.is_nan() { f64::INFINITY } else { v };
            self.at = at();
        }
    }

    fn within(&self, limit: f64) -> bool {
        self.value <= limit
    }

    fn show(&self, label: &str, limit: f64) -> String {
        if self.at.is_empty() {
            format!("{label} {:.2e} (limit {limit:.0e})", self.value)
        } else {
            format!("{label} {:.2e} at {} (limit {limit:.0e})", self.value, self.at)
        }
    }
}

fn path(n: usize, d: Dirichlet) -> Instance {
    build_path(n, d).expect("path")
}

fn grid(spec: GridSpec) -> Instance {
    build_grid(&spec).expect("grid")
}

/// Every instance family the library ships, at moderate sizes.
fn shipped() -> Vec<Instance> {
    vec![
        path(8, Dirichlet::None),
        path(8, Dirichlet::Left),
        path(8, Dirichlet::Both),
        build_cycle(7).expect("cycle"),
        grid(GridSpec::new(2, 6)),
        grid(GridSpec::new(2, 6).with_gamma(GammaT::All)),
        grid(GridSpec::new(2, 6).with_hole(vec![2, 2], vec![4, 4])),
        grid(GridSpec::new(2, 6).with_gamma(GammaT::All).with_epsilon(Epsilon::Diagonal(vec![1.0, 3.0]))),
        grid(GridSpec::new(2, 16).with_gamma(GammaT::All)),
        grid(GridSpec::new(3, 3).with_gamma(GammaT::All)),
        grid(GridSpec::new(3, 4)),
        grid(GridSpec::new(3, 4).with_hole(vec![1, 1, 1], vec![3, 3, 3])),
        grid(GridSpec::new(3, 8).with_gamma(GammaT::All)),
    ]
}

fn levels(c: &HilbertComplex) -> std::ops::Range<usize> {
    0..c.num_spaces()
}

fn m_norm(c: &HilbertComplex, level: usize, v: &[f64]) -> f64 {
    c.gram(level as isize).norm(v)
}

/// `x` plus a deterministic perturbation of relative size `rel`.
fn perturb(c: &HilbertComplex, level: usize, x: &[f64], rel: f64, seed: u64) -> Vec<f64> {
    let p = deterministic_vector(x.len(), seed);
    let nx = m_norm(c, level, x);
    let s = if nx > 0.0 { rel * nx } else { rel } / m_norm(c, level, &p).max(f64::MIN_POSITIVE);
    x.iter().zip(&p).map(|(a, b)| a + s * b).collect()
}

fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

// 1 ---------------------------------------------------------------------

fn complex_identities() -> Result<Outcome> {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut adj = Worst::default();
    for inst in shipped() {
        let c = &inst.complex;
        let rep = c.verify_complex();
        if !rep.pass {
            failures.push(format!("{} level {:?}", inst.name, rep.first_failure()));
        }
        for l in 0..c.num_ops() {
            let li = l as isize;
            for t in 0..100u64 {
                let x = deterministic_vector(c.dim(li), 7 * t + 1);
                let y = deterministic_vector(c.dim(li + 1), 7 * t + 2);
                let ax = c.apply_op(li, &x);
                let lhs = c.gram(li + 1).inner(&ax, &y);
                let rhs = c.gram(li).inner(&x, &c.apply_adjoint(li, &y));
                let scale = c.gram(li + 1).norm(&ax) * c.gram(li + 1).norm(&y);
                adj.see((lhs - rhs).abs() / scale.max(f64::MIN_POSITIVE), || format!("{} l={l}", inst.name));
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = failures.is_empty() && adj.within(1e-12) && elapsed <= Duration::from_secs(10);
    Ok(Outcome::new(
        pass,
        format!(
            "complex failures {:?}; {}; {:.2} s (limit 10 s)",
            failures,
            adj.show("adjointness", 1e-12),
            elapsed.as_secs_f64()
        ),
    ))
}

// 2 ---------------------------------------------------------------------

fn oracle_equivalence() -> Result<Outcome> {
    let start = Instant::now();
    let tol = 1e-8;
    let mut mismatches: Vec<String> = Vec::new();
    let mut consts = Worst::default();
    let mut helm = Worst::default();
    let mut checked = 0;
    // Fixture values of dim Kₗ for the named instances.
    let fixtures: Vec<(&str, Vec<Option<usize>>)> = vec![
        ("path8-both", vec![Some(0), Some(1)]),
        ("path8-left", vec![Some(0), Some(0)]),
        ("path8-none", vec![Some(1), Some(0)]),
        ("cycle7", vec![Some(1), Some(1)]),
    ];
    for inst in shipped() {
        let c = &inst.complex;
        if c.total_dim() > 2000 {
            continue;
        }
        checked += 1;
        let mut rank_prev = 0usize;
        for l in levels(c) {
            let li = l as isize;
            let slice = dense_slice(c, l, DEFAULT_CAP)?;
            // Iterative route: cohomology by projection (cap 0 disables the
            // dense path), kernel dimension from the rank recursion.
            let coh = c.cohomology_basis(l, PROJECTION_TOL, 0)?.dim;
            let rank = c.dim(li) - coh - rank_prev;
            rank_prev = rank;
            let kernel = c.dim(li) - rank;
            if coh != slice.cohomology_dim() {
                mismatches.push(format!("{} K{l}: {coh} vs {}", inst.name, slice.cohomology_dim()));
            }
            if kernel != slice.kernel_dim() {
                mismatches.push(format!("{} N(A{l}): {kernel} vs {}", inst.name, slice.kernel_dim()));
            }
            if let Some((_, dims)) = fixtures.iter().find(|(n, _)| inst.name.starts_with(n)) {
                if let Some(Some(want)) = dims.get(l) {
                    if *want != coh {
                        mismatches.push(format!("{} K{l} fixture {want} got {coh}", inst.name));
                    }
                }
            }
            if c.num_ops() > l && !c.is_zero_op(li) {
                let lanczos = c.poincare_constant(l, 1e-12)?.c_l;
                let dense = slice.poincare_constant().unwrap_or(f64::NAN);
                consts.see(rel_diff(lanczos, dense), || format!("{} l={l}", inst.name));
            }
            let x = deterministic_vector(c.dim(li), 40 + l as u64);
            let h = c.helmholtz_decompose(l, &x, 1e-13)?;
            let nx = m_norm(c, l, &x);
            let prev = slice.project_prev(&x);
            let adj = slice.project_adj(&x);
            let ker = sub(&sub(&x, &prev), &adj);
            for (a, b) in [(&h.prev, &prev), (&h.adj, &adj), (&h.kernel, &ker)] {
                helm.see(m_norm(c, l, &sub(a, b)) / nx, || format!("{} l={l}", inst.name));
            }
        }
    }
    // Named values that do not come from the fixture table above.
    let annulus = grid(GridSpec::new(2, 6).with_hole(vec![2, 2], vec![4, 4]));
    if annulus.complex.cohomology_basis(1, PROJECTION_TOL, 0)?.dim != 1 {
        mismatches.push("annulus K1 != 1".into());
    }
    let cube = grid(GridSpec::new(3, 4).with_gamma(GammaT::All));
    for l in 0..3 {
        if cube.complex.cohomology_basis(l, PROJECTION_TOL, 0)?.dim != 0 {
            mismatches.push(format!("dirichlet box K{l} != 0"));
        }
    }
    let elapsed = start.elapsed();
    let pass = mismatches.is_empty() && consts.within(tol) && helm.within(tol) && elapsed <= Duration::from_secs(60);
    Ok(Outcome::new(
        pass,
        format!(
            "{checked} instances; dimension mismatches {:?}; {}; {}; {:.2} s (limit 60 s)",
            mismatches,
            consts.show("constants", tol),
            helm.show("helmholtz", tol),
            elapsed.as_secs_f64()
        ),
    ))
}

// 3 ---------------------------------------------------------------------

fn constant_symmetry() -> Result<Outcome> {
    let mut w = Worst::default();
    let mut n = 0;
    for inst in shipped() {
        let c = &inst.complex;
        for l in 0..c.num_ops() {
            if c.is_zero_op(l as isize) {
                continue;
            }
            let a = c.poincare_constant(l, 1e-12)?.c_l;
            let b = c.poincare_constant_adjoint(l, 1e-12)?.c_l;
            w.see((a - b).abs() / a, || format!("{} l={l}", inst.name));
            n += 1;
        }
    }
    Ok(Outcome::new(w.within(1e-8), format!("{n} operators; {}", w.show("|c - c*|/c", 1e-8))))
}

// 4 ---------------------------------------------------------------------

fn closed_form_constant() -> Result<Outcome> {
    let closed = |h: f64| 1.0 / ((4.0 / (h * h)) * (PI * h / 2.0).sin().powi(2)).sqrt();
    let c4 = path(4, Dirichlet::Both).complex.poincare_constant(0, 1e-14)?.c_l;
    let a_ok = (c4 - closed(0.25)).abs() <= 1e-10;
    let mut seq = Vec::new();
    for n in [4, 8, 16] {
        seq.push(path(n, Dirichlet::Both).complex.poincare_constant(0, 1e-14)?.c_l);
    }
    let increasing = seq.windows(2).all(|w| w[1] > w[0]);
    let below = seq.iter().all(|c| *c < 1.0 / PI);
    Ok(Outcome::new(
        a_ok && increasing && below,
        format!(
            "h=1/4: c={c4:.12} closed form {:.12} ({}); sequence {:?} vs 1/pi={:.12}: increasing={increasing}, below={below}",
            closed(0.25),
            if a_ok { "ok" } else { "off" },
            seq.iter().map(|v| format!("{v:.12}")).collect::<Vec<_>>(),
            1.0 / PI
        ),
    ))
}

// 5 ---------------------------------------------------------------------

fn solver_correctness() -> Result<Outcome> {
    let start = Instant::now();
    let recipes = [Recipe::SmoothPotential, Recipe::RangePair, Recipe::KernelShift];
    let mut rec = Worst::default();
    let mut gap = Worst::default();
    let mut agree = Worst::default();
    let mut runs = 0;
    for inst in shipped() {
        let c = &inst.complex;
        for seed in 0..20u64 {
            let l = seed as usize % c.num_spaces();
            let recipe = recipes[(seed / c.num_spaces() as u64) as usize % recipes.len()];
            let s = inst.manufacture(l, recipe, seed)?;
            let p = FirstOrderProblem::new(c, l, s.f.clone(), s.g.clone(), s.k.clone())?;
            let v = solve_first_order(&p, Backend::Variational, 1e-12)?;
            let sd = solve_first_order(&p, Backend::Saddle, 1e-12)?;
            let nx = m_norm(c, l, &s.exact_x);
            let denom = if nx > 0.0 { nx } else { 1.0 };
            let at = || format!("{} l={l} seed={seed}", inst.name);
            rec.see(m_norm(c, l, &sub(&v.x, &s.exact_x)) / denom, at);
            gap.see(v.norm_identity_gap, at);
            agree.see(m_norm(c, l, &sub(&v.x, &sd.x)) / denom, at);
            runs += 1;
        }
    }
    let elapsed = start.elapsed();
    let pass = rec.within(1e-7) && gap.within(1e-9) && agree.within(1e-8) && elapsed <= Duration::from_secs(120);
    Ok(Outcome::new(
        pass,
        format!(
            "{runs} scenarios; {}; {}; {}; {:.2} s (limit 120 s)",
            rec.show("recovery", 1e-7),
            gap.show("norm identity", 1e-9),
            agree.show("backend agreement", 1e-8),
            elapsed.as_secs_f64()
        ),
    ))
}

// 6 ---------------------------------------------------------------------

fn bound_sandwich() -> Result<Outcome> {
    let slack = 1e-10;
    let mut violations = Worst::default();
    let mut trials = 0usize;
    for inst in shipped() {
        let c = &inst.complex;
        for l in levels(c) {
            let s = inst.manufacture(l, Recipe::SmoothPotential, 3)?;
            let xa = perturb(c, l, &s.exact_x, 0.1, 11);
            let d = decompose_error(c, l, &xa, &s.exact_x, 1e-13)?;
            let k = Constants::compute(c, l, 1e-12)?;
            let scale = d.e.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1e-3) * 2.0;
            for seed in 0..1000u64 {
                let t = TrialFields::random(c, l, &xa, scale, seed)?;
                let v = t.evaluate(c, l, &xa, &s.f, &s.g, &s.k, k.c_prev, k.c_next)?;
                let at = || format!("{} l={l} seed={seed}", inst.name);
                violations.see(d.norm_prev - slack - v.upper_g, at);
                violations.see(d.norm_adj - slack - v.upper_f, at);
                violations.see(d.norm_kernel - slack - v.upper_kernel, at);
                violations.see(v.lower_g - d.norm_prev.powi(2) - slack, at);
                violations.see(v.lower_f - d.norm_adj.powi(2) - slack, at);
                violations.see(v.lower_kernel - d.norm_kernel.powi(2) - slack, at);
                trials += 1;
            }
        }
    }
    Ok(Outcome::new(
        violations.value <= 0.0,
        format!(
            "{trials} trial sets x 6 forms; worst violation {:.2e}{}",
            violations.value,
            if violations.at.is_empty() { String::new() } else { format!(" at {}", violations.at) }
        ),
    ))
}

// 7 ---------------------------------------------------------------------

fn sharpness() -> Result<Outcome> {
    let tol = 1e-8;
    let mut w = Worst::default();
    let mut cases = 0;
    for inst in shipped() {
        let c = &inst.complex;
        for l in levels(c) {
            let s = inst.manufacture(l, Recipe::RangePair, 5)?;
            let xa = perturb(c, l, &s.exact_x, 0.1, 13);
            let d = decompose_error(c, l, &xa, &s.exact_x, 1e-13)?;
            let k = Constants::compute(c, l, 1e-12)?;
            let phi = c.project_range(RangeSide::PrevRange, l, &d.e, 1e-13)?.potential;
            let phi_p = c.project_range(RangeSide::AdjRange, l, &d.e, 1e-13)?.potential;
            let (kphi, kphi_p) = kernel_attaining_potentials(c, l, &xa)?;
            let norm = d.norm.max(f64::MIN_POSITIVE);
            // Relative to the component, or to ‖e‖ for components that vanish.
            let rel = |got: f64, want: f64| {
                if want > 1e-8 * norm {
                    (got - want).abs() / want
                } else {
                    (got - want).abs() / norm
                }
            };
            let at = || format!("{} l={l}", inst.name);
            w.see(rel(upper_bound_g_part(c, l, &xa, &s.g, &add(&xa, &d.e_prev), k.c_prev), d.norm_prev), at);
            w.see(rel(upper_bound_f_part(c, l, &xa, &s.f, &add(&xa, &d.e_adj), k.c_next), d.norm_adj), at);
            w.see(rel(upper_bound_kernel_part(c, l, &xa, &s.k, &kphi, &kphi_p), d.norm_kernel), at);
            let sq = |v: f64| v.max(0.0).sqrt();
            w.see(rel(sq(lower_bound_g_part(c, l, &xa, &s.g, &phi)), d.norm_prev), at);
            w.see(rel(sq(lower_bound_f_part(c, l, &xa, &s.f, &phi_p)), d.norm_adj), at);
            let theta = c.project_cohomology(l, &d.e)?;
            w.see(rel(sq(lower_bound_kernel_part(c, l, &xa, &s.k, &theta)), d.norm_kernel), at);
            cases += 1;
        }
    }
    Ok(Outcome::new(w.within(tol), format!("{cases} instance levels x 6 forms; {}", w.show("relative gap", tol))))
}

// 8 ---------------------------------------------------------------------

fn algorithm_performance() -> Result<Outcome> {
    let start = Instant::now();
    let mut lines = Vec::new();
    let mut pass = true;
    let cases = [
        ("laplace-2d-16", grid(GridSpec::new(2, 16).with_gamma(GammaT::All))),
        ("em-3d-8", grid(GridSpec::new(3, 8).with_gamma(GammaT::All))),
    ];
    for (name, inst) in &cases {
        let c = &inst.complex;
        let l = 1;
        let s = inst.manufacture(l, Recipe::SmoothPotential, 1)?;
        let xa = perturb(c, l, &s.exact_x, 0.1, 101);
        let d = decompose_error(c, l, &xa, &s.exact_x, 1e-13)?;
        let k = Constants::compute(c, l, 1e-12)?;
        let opts = MinimizeOptions::default();
        let runs = [
            ("f", minimize_upper_f(c, l, &xa, &s.f, k.c_next, &opts)?, d.norm_adj),
            ("g", minimize_upper_g(c, l, &xa, &s.g, k.c_prev, &opts)?, d.norm_prev),
        ];
        for (which, m, exact) in runs {
            let eff = m.bound / exact;
            let monotone = m.log.windows(2).all(|w| w[1].1 <= w[0].1);
            let ok = eff <= 1.01 && eff >= 1.0 - 1e-10 && m.iterations <= 20 && monotone;
            pass &= ok;
            lines.push(format!("{name}/{which}: eff {eff:.6} in {} it, monotone={monotone}", m.iterations));
        }
    }
    let elapsed = start.elapsed();
    pass &= elapsed <= Duration::from_secs(300);
    Ok(Outcome::new(pass, format!("{}; {:.2} s (limit 300 s)", lines.join("; "), elapsed.as_secs_f64())))
}

// 9 ---------------------------------------------------------------------

fn sandwich_report(rep: &BoundReport, exact: [f64; 3], slack: f64, worst: &mut Worst, at: &str) {
    for (comp, want) in rep.components.iter().zip(exact) {
        let v = if comp.ok() {
            (comp.lower - want - slack).max(want - slack - comp.upper)
        } else {
            f64::INFINITY
        };
        worst.see(v, || format!("{at} {}", comp.name));
    }
}

fn second_order_suite() -> Result<Outcome> {
    let slack = 1e-10;
    let mut worst = Worst { value: f64::NEG_INFINITY, at: String::new() };
    let mut zero_ok = true;
    let mut details = Vec::new();
    let cases = [
        ("laplacian", grid(GridSpec::new(2, 8).with_gamma(GammaT::All)), 0usize),
        ("rot-rot", grid(GridSpec::new(3, 4).with_gamma(GammaT::All)), 1usize),
    ];
    for (name, inst, l) in &cases {
        let c = &inst.complex;
        let l = *l;
        let s = inst.manufacture_second_order(l, 3)?;
        let xa = perturb(c, l, &s.exact_x, 0.05, 17);
        let opts = EstimateOptions {
            exact_x: Some(s.exact_x.clone()),
            budget: 50,
            ..EstimateOptions::default()
        };
        let de = decompose_error(c, l, &xa, &s.exact_x, 1e-13)?;
        let y_in = c.apply_op(l as isize, &xa);
        let y_out = perturb(c, l + 1, &y_in, 0.05, 19);
        for (label, ya) in [("y in range", &y_in), ("y perturbed", &y_out)] {
            let b = second_order_estimate(c, l, &xa, ya, &s.f, &s.g, &s.k, &opts)?;
            let dh = decompose_error(c, l + 1, ya, &s.y, 1e-13)?;
            let at = format!("{name} {label}");
            sandwich_report(&b.e, [de.norm_prev, de.norm_kernel, de.norm_adj], slack, &mut worst, &format!("{at} e"));
            sandwich_report(&b.h, [dh.norm_prev, dh.norm_kernel, dh.norm_adj], slack, &mut worst, &format!("{at} h"));
            if label == "y in range" {
                for n in ["kernel", "f-part"] {
                    let comp = b.h.component(n).expect("component");
                    zero_ok &= b.y_in_range && comp.upper == 0.0 && comp.lower == 0.0;
                }
            }
            details.push(format!(
                "{at}: e eff {:.4}, h eff {:.4}",
                b.e.totals.efficiency_index.unwrap_or(f64::NAN),
                b.h.totals.efficiency_index.unwrap_or(f64::NAN)
            ));
        }
    }
    Ok(Outcome::new(
        worst.value <= 0.0 && zero_ok,
        format!(
            "{}; worst sandwich violation {:.2e} at {}; exact zeros for y in range: {zero_ok}",
            details.join("; "),
            worst.value,
            worst.at
        ),
    ))
}

// 10 --------------------------------------------------------------------

fn conforming_equivalence() -> Result<Outcome> {
    let slack = -1e-10;
    let mut min_lower = f64::INFINITY;
    let mut min_upper = f64::INFINITY;
    let cases = [
        grid(GridSpec::new(2, 6).with_hole(vec![2, 2], vec![4, 4])),
        grid(GridSpec::new(3, 4).with_gamma(GammaT::All)),
    ];
    let mut n = 0;
    for inst in &cases {
        let c = &inst.complex;
        let l = 1;
        let li = l as isize;
        let s = inst.manufacture(l, Recipe::SmoothPotential, 2)?;
        let k = Constants::compute(c, l, 1e-12)?;
        let cmax = k.c_prev.max(k.c_next);
        for seed in 0..25u64 {
            let xa = perturb(c, l, &s.exact_x, 0.02 * (seed + 1) as f64, 300 + seed);
            let e = sub(&s.exact_x, &xa);
            let d2 = m_norm(c, l, &e).powi(2)
                + c.gram(li + 1).norm(&c.apply_op(li, &e)).powi(2)
                + c.gram(li - 1).norm(&c.apply_adjoint(li - 1, &e)).powi(2);
            let f = conforming_functional(c, l, &xa, &s.f, &s.g, &s.k, k.c_prev, k.c_next)?;
            min_lower = min_lower.min(f - d2);
            min_upper = min_upper.min((1.0 + cmax * cmax) * d2 - f);
            n += 1;
        }
    }
    Ok(Outcome::new(
        min_lower >= slack && min_upper >= slack,
        format!("{n} perturbations; min F - |e|^2 = {min_lower:.3e}; min (1+c^2)|e|^2 - F = {min_upper:.3e}"),
    ))
}

// 11 --------------------------------------------------------------------

fn convexity_bound() -> Result<Outcome> {
    let cube = grid(GridSpec::new(3, 8).with_gamma(GammaT::All));
    let c2 = cube.complex.poincare_constant(1, 1e-12)?.c_l;
    let limit = 3f64.sqrt() / PI * 1.1;
    Ok(Outcome::new(c2 <= limit, format!("c = {c2:.6} (limit sqrt(3)/pi * 1.1 = {limit:.6})")))
}

// 12 --------------------------------------------------------------------

fn cli_determinism() -> Result<Outcome> {
    let dir = std::env::temp_dir().join(format!("hcx-acceptance-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir)?;
    let cfg = dir.join("run.toml");
    fs::write(
        &cfg,
        "seed = 9\n[instance]\nkind = \"grid\"\ndimension = 3\ncells = [4, 4, 4]\ngamma_t = \"all\"\n\
         [problem]\nlevel = 1\nrecipe = \"smooth-potential\"\nperturbation = 0.1\n[tolerances]\nbudget = 40\n",
    )?;
    let bin = env!("CARGO_BIN_EXE_hcx");
    let s = |p: &Path| p.to_string_lossy().into_owned();
    let b = dir.join("bundle");
    let status = Command::new(bin).args(["build", "--config", &s(&cfg), "--out", &s(&b)]).status()?;
    if !status.success() {
        return Ok(Outcome::new(false, format!("build exited with {status}")));
    }
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out = dir.join(run);
        let st = Command::new(bin)
            .args(["estimate", "--manifest", &s(&b), "--config", &s(&cfg)])
            .args(["--f", &s(&b.join("f.csv")), "--g", &s(&b.join("g.csv")), "--k", &s(&b.join("k.csv"))])
            .args(["--x-approx", &s(&b.join("x_approx.csv")), "--exact", &s(&b.join("exact_x.csv"))])
            .args(["--out", &s(&out)])
            .status()?;
        if !st.success() {
            return Ok(Outcome::new(false, format!("estimate exited with {st}")));
        }
        let report: String = fs::read_to_string(out.join("bound_report.json"))?
            .lines()
            .filter(|l| !l.contains("\"timestamp_unix\""))
            .map(|l| format!("{l}\n"))
            .collect();
        outputs.push((report, fs::read(out.join("traces.csv"))?));
    }
    let _ = fs::remove_dir_all(&dir);
    let same = outputs[0] == outputs[1];
    Ok(Outcome::new(
        same,
        format!("bound_report.json ({} bytes) and traces.csv identical: {same}", outputs[0].0.len()),
    ))
}

type Criterion = (u32, &'static str, fn() -> Result<Outcome>);

fn main() {
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let criteria: [Criterion; 12] = [
        (1, "complex and adjoint identities", complex_identities),
        (2, "toolbox vs dense oracle", oracle_equivalence),
        (3, "constant symmetry", constant_symmetry),
        (4, "closed-form path constant", closed_form_constant),
        (5, "solver correctness", solver_correctness),
        (6, "bound sandwich", bound_sandwich),
        (7, "sharpness at attaining arguments", sharpness),
        (8, "minimization algorithms", algorithm_performance),
        (9, "second-order bounds", second_order_suite),
        (10, "conforming equivalence", conforming_equivalence),
        (11, "convex cube constant", convexity_bound),
        (12, "CLI determinism", cli_determinism),
    ];
    let mut failed = Vec::new();
    for (id, name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| f == &id.to_string() || name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = match catch_unwind(AssertUnwindSafe(run)) {
            Ok(Ok(o)) => o,
            Ok(Err(e)) => Outcome::new(false, format!("error: {e}")),
            Err(_) => Outcome::new(false, "panicked"),
        };
        let verdict = if outcome.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {id:>2} {verdict} {name} [{:.1} s]: {}",
            start.elapsed().as_secs_f64(),
            outcome.detail
        );
        if !outcome.pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
