//! Manufactured solutions with exactly compatible data.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::grid::Geometry;
use crate::complex::HilbertComplex;
use crate::error::Result;
use crate::linalg::vector::{add, axpy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Recipe {
    /// `x = Aₗ₋₁u + Aₗ*w + k` with `u`, `w` sampled from smooth functions.
    SmoothPotential,
    /// As above with `u`, `w` uniformly random.
    RangePair,
    /// `x ∈ Kₗ`, so `f = 0` and `g = 0`.
    KernelShift,
}

#[derive(Debug, Clone, Serialize)]
pub struct ManufacturedScenario {
    pub name: String,
    pub level: usize,
    pub recipe: Recipe,
    pub seed: u64,
    pub exact_x: Vec<f64>,
    /// `Aₗ x`
    pub f: Vec<f64>,
    /// `Aₗ₋₁* x`
    pub g: Vec<f64>,
    /// `πₗ x`
    pub k: Vec<f64>,
    pub description: String,
}

/// Data of `Aₗ*Aₗ x = f`, `Aₗ₋₁* x = g`, `πₗ x = k` together with
/// `y = Aₗ x`.
#[derive(Debug, Clone, Serialize)]
pub struct SecondOrderScenario {
    pub level: usize,
    pub seed: u64,
    pub exact_x: Vec<f64>,
    pub y: Vec<f64>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub k: Vec<f64>,
}

struct SmoothField {
    terms: Vec<([f64; 3], f64, f64)>,
}

impl SmoothField {
    fn sample(rng: &mut ChaCha8Rng) -> Self {
        let terms = (0..3)
            .map(|_| {
                let freq = [
                    rng.random_range(1..=3) as f64,
                    rng.random_range(1..=3) as f64,
                    rng.random_range(1..=3) as f64,
                ];
                (freq, rng.random_range(-1.0..1.0), rng.random_range(0.0..std::f64::consts::TAU))
            })
            .collect();
        Self { terms }
    }

    fn eval(&self, p: &[f64; 3]) -> f64 {
        let pi = std::f64::consts::PI;
        self.terms
            .iter()
            .map(|(k, a, phi)| a * (pi * (k[0] * p[0] + k[1] * p[1] + k[2] * p[2]) + phi).sin())
            .sum()
    }
}

fn points_for(geometry: Option<&Geometry>, level: isize, n: usize) -> Vec<[f64; 3]> {
    if level >= 0 {
        if let Some(pts) = geometry.and_then(|g| g.points.get(level as usize)) {
            if pts.len() == n {
                return pts.clone();
            }
        }
    }
    (0..n).map(|i| [(i as f64 + 0.5) / n.max(1) as f64, 0.0, 0.0]).collect()
}

fn sample_vector(rng: &mut ChaCha8Rng, recipe: Recipe, geometry: Option<&Geometry>, level: isize, n: usize) -> Vec<f64> {
    match recipe {
        Recipe::SmoothPotential => {
            let field = SmoothField::sample(rng);
            points_for(geometry, level, n).iter().map(|p| field.eval(p)).collect()
        }
        _ => (0..n).map(|_| rng.random_range(-1.0..1.0)).collect(),
    }
}

/// Builds `exact_x` at `level` and its data. Deterministic in `seed`.
pub fn manufacture(
    complex: &HilbertComplex,
    geometry: Option<&Geometry>,
    level: usize,
    recipe: Recipe,
    seed: u64,
) -> Result<ManufacturedScenario> {
    complex.check_level(level)?;
    let l = level as isize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let basis = complex.cohomology(level)?;
    let mut k = vec![0.0; complex.dim(l)];
    let exact_x = match recipe {
        Recipe::KernelShift => {
            for q in &basis.vectors {
                axpy(rng.random_range(0.5..1.5), q, &mut k);
            }
            k.clone()
        }
        _ => {
            let u = sample_vector(&mut rng, recipe, geometry, l - 1, complex.dim(l - 1));
            let w = sample_vector(&mut rng, recipe, geometry, l + 1, complex.dim(l + 1));
            for q in &basis.vectors {
                axpy(rng.random_range(-1.0..1.0), q, &mut k);
            }
            let x = add(&complex.apply_op(l - 1, &u), &complex.apply_adjoint(l, &w));
            add(&x, &k)
        }
    };
    let (f, g) = match recipe {
        Recipe::KernelShift => (vec![0.0; complex.dim(l + 1)], vec![0.0; complex.dim(l - 1)]),
        _ => (complex.apply_op(l, &exact_x), complex.apply_adjoint(l - 1, &exact_x)),
    };
    let name = format!("{}-l{level}-s{seed}", serde_json::to_value(recipe)?.as_str().unwrap_or("recipe"));
    let description = match recipe {
        Recipe::SmoothPotential => "x = A_prev u + A_next* w + k with smooth u, w",
        Recipe::RangePair => "x = A_prev u + A_next* w + k with random u, w",
        Recipe::KernelShift => "x is a harmonic field, f = g = 0",
    };
    Ok(ManufacturedScenario {
        name,
        level,
        recipe,
        seed,
        exact_x,
        f,
        g,
        k,
        description: description.into(),
    })
}

/// Second-order data from a first-order scenario: `f = Aₗ*Aₗ x`.
pub fn manufacture_second_order(
    complex: &HilbertComplex,
    geometry: Option<&Geometry>,
    level: usize,
    seed: u64,
) -> Result<SecondOrderScenario> {
    let s = manufacture(complex, geometry, level, Recipe::SmoothPotential, seed)?;
    let l = level as isize;
    let y = complex.apply_op(l, &s.exact_x);
    let f = complex.apply_adjoint(l, &y);
    Ok(SecondOrderScenario {
        level,
        seed,
        exact_x: s.exact_x,
        y,
        f,
        g: s.g,
        k: s.k,
    })
}
