//! First-order system `Aₗx = f`, `Aₗ₋₁*x = g`, `πₗx = k` and the
//! second-order system `Aₗ*Aₗx = f`, `Aₗ₋₁*x = g`, `πₗx = k`.

mod saddle;
mod second;

use serde::{Deserialize, Serialize};

use crate::complex::{HilbertComplex, RangeSide, PROJECTION_TOL};
use crate::error::{Error, Result};
use crate::linalg::vector::{add, deterministic_vector, sub};
use crate::linalg::{cg, CgOptions, InnerProduct, IterStats};

pub use saddle::{solve_saddle, SaddlePart, SaddleSolution};
pub use second::{solve_second_order, SecondOrderProblem, SecondOrderReport};

/// Relative distance below which data is projected onto its required
/// subspace instead of being rejected.
pub const COMPAT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    #[default]
    Variational,
    Saddle,
}

#[derive(Debug, Clone)]
pub struct FirstOrderProblem<'a> {
    pub complex: &'a HilbertComplex,
    pub level: usize,
    /// In `Hₗ₊₁`.
    pub f: Vec<f64>,
    /// In `Hₗ₋₁`.
    pub g: Vec<f64>,
    /// In `Hₗ`.
    pub k: Vec<f64>,
}

impl<'a> FirstOrderProblem<'a> {
    pub fn new(complex: &'a HilbertComplex, level: usize, f: Vec<f64>, g: Vec<f64>, k: Vec<f64>) -> Result<Self> {
        complex.check_level(level)?;
        let l = level as isize;
        for (name, v, n) in [
            ("f", &f, complex.dim(l + 1)),
            ("g", &g, complex.dim(l - 1)),
            ("k", &k, complex.dim(l)),
        ] {
            if v.len() != n {
                return Err(Error::DimensionMismatch {
                    context: match name {
                        "f" => "datum f",
                        "g" => "datum g",
                        _ => "datum k",
                    },
                    expected: n,
                    found: v.len(),
                });
            }
        }
        Ok(Self { complex, level, f, g, k })
    }

    /// Zero data of the right sizes.
    pub fn zero(complex: &'a HilbertComplex, level: usize) -> Result<Self> {
        let l = level as isize;
        Self::new(
            complex,
            level,
            vec![0.0; complex.dim(l + 1)],
            vec![0.0; complex.dim(l - 1)],
            vec![0.0; complex.dim(l)],
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Membership {
    pub norm: f64,
    pub distance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompatibilityReport {
    pub f: Membership,
    pub g: Membership,
    pub k: Membership,
    pub tol: f64,
    pub pass: bool,
    #[serde(skip)]
    pub f_projected: Vec<f64>,
    #[serde(skip)]
    pub g_projected: Vec<f64>,
    #[serde(skip)]
    pub k_projected: Vec<f64>,
}

impl CompatibilityReport {
    pub fn summary(&self) -> String {
        format!(
            "distance of f to R(A) = {:.3e} (|f| = {:.3e}), of g to R(A*) = {:.3e} (|g| = {:.3e}), of k to K = {:.3e} (|k| = {:.3e})",
            self.f.distance, self.f.norm, self.g.distance, self.g.norm, self.k.distance, self.k.norm
        )
    }
}

fn membership(v: &[f64], p: &[f64], m: &dyn InnerProduct, tol: f64) -> Membership {
    let norm = m.norm(v);
    let distance = m.norm(&sub(v, p));
    Membership {
        norm,
        distance,
        pass: distance <= tol * norm,
    }
}

/// Distances of the data to `R(Aₗ)`, `R(Aₗ₋₁*)` and `Kₗ`.
pub fn check_compatibility(problem: &FirstOrderProblem, tol: f64) -> Result<CompatibilityReport> {
    let c = problem.complex;
    let l = problem.level;
    let li = l as isize;
    let f_proj = if c.dim(li + 1) == 0 {
        Vec::new()
    } else {
        c.project_range(RangeSide::PrevRange, l + 1, &problem.f, PROJECTION_TOL)?.p
    };
    let g_proj = if l == 0 || c.dim(li - 1) == 0 {
        vec![0.0; c.dim(li - 1)]
    } else {
        c.project_range(RangeSide::AdjRange, l - 1, &problem.g, PROJECTION_TOL)?.p
    };
    let k_proj = c.project_cohomology(l, &problem.k)?;
    let f = membership(&problem.f, &f_proj, c.gram(li + 1), tol);
    let g = membership(&problem.g, &g_proj, c.gram(li - 1), tol);
    let k = membership(&problem.k, &k_proj, c.gram(li), tol);
    let pass = f.pass && g.pass && k.pass;
    Ok(CompatibilityReport {
        f,
        g,
        k,
        tol,
        pass,
        f_projected: f_proj,
        g_projected: g_proj,
        k_projected: k_proj,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Residuals {
    /// `‖Aₗx − f‖`
    pub next: f64,
    /// `‖Aₗ₋₁*x − g‖`
    pub prev_adjoint: f64,
    /// `‖πₗx − k‖`
    pub kernel: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveNorms {
    pub x: f64,
    pub x_f: f64,
    pub x_g: f64,
    pub k: f64,
    pub f: f64,
    pub g: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveStats {
    pub f_part: IterStats,
    pub g_part: IterStats,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub level: usize,
    pub backend: Backend,
    #[serde(skip)]
    pub x: Vec<f64>,
    #[serde(skip)]
    pub x_f: Vec<f64>,
    #[serde(skip)]
    pub x_g: Vec<f64>,
    #[serde(skip)]
    pub k: Vec<f64>,
    #[serde(skip)]
    pub y_f: Vec<f64>,
    #[serde(skip)]
    pub z_g: Vec<f64>,
    pub norms: SolveNorms,
    pub residuals: Residuals,
    pub stats: SolveStats,
    /// `|‖x‖² − ‖x_f‖² − ‖x_g‖² − ‖k‖²| / ‖x‖²`
    pub norm_identity_gap: f64,
    /// Multiplier norms of the saddle backend (f-part, g-part).
    pub multiplier_norms: Option<(f64, f64)>,
    pub compatibility: CompatibilityReport,
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub backend: Backend,
    /// Relative tolerance of every subsolve.
    pub tol: f64,
    /// Start the variational CG solves from a deterministic nonzero vector
    /// with this salt instead of zero.
    pub start_salt: Option<u64>,
    pub compat_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            backend: Backend::Variational,
            tol: 1e-12,
            start_salt: None,
            compat_tol: COMPAT_TOL,
        }
    }
}

pub fn solve_first_order(problem: &FirstOrderProblem, backend: Backend, tol: f64) -> Result<SolveReport> {
    solve_first_order_with(
        problem,
        &SolveOptions {
            backend,
            tol,
            ..SolveOptions::default()
        },
    )
}

fn require(stats: &IterStats, what: &'static str, tol: f64) -> Result<()> {
    if stats.converged || stats.final_residual <= 1e3 * tol {
        Ok(())
    } else {
        Err(Error::NonConvergence {
            method: what,
            iterations: stats.iterations,
            residual: stats.final_residual,
        })
    }
}

/// Variational potential `y_f` with `AₗAₗ* y_f = f`; `x_f = Aₗ* y_f`.
pub(crate) fn solve_f_part(
    c: &HilbertComplex,
    level: usize,
    f: &[f64],
    tol: f64,
    x0: Option<&[f64]>,
) -> Result<(Vec<f64>, Vec<f64>, IterStats)> {
    let l = level as isize;
    if c.dim(l + 1) == 0 {
        return Ok((Vec::new(), vec![0.0; c.dim(l)], IterStats::trivial()));
    }
    let opts = CgOptions {
        tol,
        x0,
        ..CgOptions::default()
    };
    let (y, st) = cg(
        |v: &[f64]| c.apply_op(l, &c.apply_adjoint(l, v)),
        c.gram(l + 1),
        f,
        &opts,
    );
    require(&st, "cg (f-part)", tol)?;
    let x = c.apply_adjoint(l, &y);
    Ok((y, x, st))
}

/// Variational potential `z_g` with `Aₗ₋₁*Aₗ₋₁ z_g = g`; `x_g = Aₗ₋₁ z_g`.
pub(crate) fn solve_g_part(
    c: &HilbertComplex,
    level: usize,
    g: &[f64],
    tol: f64,
    x0: Option<&[f64]>,
) -> Result<(Vec<f64>, Vec<f64>, IterStats)> {
    let l = level as isize;
    if c.dim(l - 1) == 0 {
        return Ok((Vec::new(), vec![0.0; c.dim(l)], IterStats::trivial()));
    }
    let opts = CgOptions {
        tol,
        x0,
        ..CgOptions::default()
    };
    let (z, st) = cg(
        |v: &[f64]| c.apply_adjoint(l - 1, &c.apply_op(l - 1, v)),
        c.gram(l - 1),
        g,
        &opts,
    );
    require(&st, "cg (g-part)", tol)?;
    let x = c.apply_op(l - 1, &z);
    Ok((z, x, st))
}

pub fn solve_first_order_with(problem: &FirstOrderProblem, opts: &SolveOptions) -> Result<SolveReport> {
    let c = problem.complex;
    let level = problem.level;
    let l = level as isize;
    let compat = check_compatibility(problem, opts.compat_tol)?;
    if !compat.pass {
        return Err(Error::Incompatible(compat.summary()));
    }
    let f = &compat.f_projected;
    let g = &compat.g_projected;
    let k = compat.k_projected.clone();

    let (y_f, x_f, z_g, x_g, stats, multipliers) = match opts.backend {
        Backend::Variational => {
            let sf = opts.start_salt.map(|s| deterministic_vector(c.dim(l + 1), s));
            let sg = opts.start_salt.map(|s| deterministic_vector(c.dim(l - 1), s + 1));
            let (y_f, x_f, st_f) = solve_f_part(c, level, f, opts.tol, sf.as_deref())?;
            let (z_g, x_g, st_g) = solve_g_part(c, level, g, opts.tol, sg.as_deref())?;
            (y_f, x_f, z_g, x_g, SolveStats { f_part: st_f, g_part: st_g }, None)
        }
        Backend::Saddle => {
            let aug_f = c.dim(l + 1) > 0 && c.cohomology(level + 1)?.dim == 0;
            let aug_g = level == 0 || c.cohomology(level - 1)?.dim == 0;
            let sf = solve_saddle(c, level, SaddlePart::F, f, aug_f, opts.tol)?;
            let sg = solve_saddle(c, level, SaddlePart::G, g, aug_g, opts.tol)?;
            let norms = (sf.multiplier_norm, sg.multiplier_norm);
            (
                sf.potential,
                sf.field,
                sg.potential,
                sg.field,
                SolveStats {
                    f_part: sf.stats,
                    g_part: sg.stats,
                },
                Some(norms),
            )
        }
    };

    let x = add(&add(&x_f, &x_g), &k);
    let m = c.gram(l);
    let residuals = Residuals {
        next: c.gram(l + 1).norm(&sub(&c.apply_op(l, &x), &problem.f)),
        prev_adjoint: c.gram(l - 1).norm(&sub(&c.apply_adjoint(l - 1, &x), &problem.g)),
        kernel: m.norm(&sub(&c.project_cohomology(level, &x)?, &problem.k)),
    };
    let norms = SolveNorms {
        x: m.norm(&x),
        x_f: m.norm(&x_f),
        x_g: m.norm(&x_g),
        k: m.norm(&k),
        f: c.gram(l + 1).norm(&problem.f),
        g: c.gram(l - 1).norm(&problem.g),
    };
    let sq = norms.x * norms.x;
    let parts = norms.x_f.powi(2) + norms.x_g.powi(2) + norms.k.powi(2);
    let norm_identity_gap = if sq > 0.0 { (sq - parts).abs() / sq } else { parts };
    Ok(SolveReport {
        level,
        backend: opts.backend,
        x,
        x_f,
        x_g,
        k,
        y_f,
        z_g,
        norms,
        residuals,
        stats,
        norm_identity_gap,
        multiplier_norms: multipliers,
        compatibility: compat,
    })
}
