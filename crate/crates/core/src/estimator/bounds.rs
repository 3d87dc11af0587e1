//! Closed-form bound evaluations for given trial fields. Upper bounds
//! return a bound on the component norm, lower bounds a bound on its
//! square. Every value is guaranteed for any trial field.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::complex::HilbertComplex;
use crate::error::{Error, Result};
use crate::linalg::vector::{add, axpy, sub};
use crate::linalg::InnerProduct;

fn check_len(v: &[f64], n: usize, context: &'static str) -> Result<()> {
    if v.len() != n {
        return Err(Error::DimensionMismatch {
            context,
            expected: n,
            found: v.len(),
        });
    }
    Ok(())
}

/// `c‖Aₗ₋₁*ζ − g‖ + ‖ζ − x̃‖ ≥ ‖e_prev‖`, with `c = cₗ₋₁`.
pub fn upper_bound_g_part(c: &HilbertComplex, level: usize, x_approx: &[f64], g: &[f64], zeta: &[f64], c_prev: f64) -> f64 {
    let l = level as isize;
    let r = c.gram(l - 1).norm(&sub(&c.apply_adjoint(l - 1, zeta), g));
    c_prev * r + c.gram(l).norm(&sub(zeta, x_approx))
}

/// `c‖Aₗξ − f‖ + ‖ξ − x̃‖ ≥ ‖e_adj‖`, with `c = cₗ`.
pub fn upper_bound_f_part(c: &HilbertComplex, level: usize, x_approx: &[f64], f: &[f64], xi: &[f64], c_next: f64) -> f64 {
    let l = level as isize;
    let r = c.gram(l + 1).norm(&sub(&c.apply_op(l, xi), f));
    c_next * r + c.gram(l).norm(&sub(xi, x_approx))
}

/// `‖k − x̃ + Aₗ₋₁φ + Aₗ*φ'‖ ≥ ‖e_K‖`.
pub fn upper_bound_kernel_part(
    c: &HilbertComplex,
    level: usize,
    x_approx: &[f64],
    k: &[f64],
    phi: &[f64],
    phi_prime: &[f64],
) -> f64 {
    let l = level as isize;
    let mut v = sub(k, x_approx);
    v = add(&v, &c.apply_op(l - 1, phi));
    v = add(&v, &c.apply_adjoint(l, phi_prime));
    c.gram(l).norm(&v)
}

/// `2⟨g, φ⟩ − ⟨2x̃ + Aₗ₋₁φ, Aₗ₋₁φ⟩ ≤ ‖e_prev‖²`.
pub fn lower_bound_g_part(c: &HilbertComplex, level: usize, x_approx: &[f64], g: &[f64], phi: &[f64]) -> f64 {
    let l = level as isize;
    let a_phi = c.apply_op(l - 1, phi);
    let mut w = a_phi.clone();
    axpy(2.0, x_approx, &mut w);
    2.0 * c.gram(l - 1).inner(g, phi) - c.gram(l).inner(&w, &a_phi)
}

/// `2⟨f, φ'⟩ − ⟨2x̃ + Aₗ*φ', Aₗ*φ'⟩ ≤ ‖e_adj‖²`.
pub fn lower_bound_f_part(c: &HilbertComplex, level: usize, x_approx: &[f64], f: &[f64], phi_prime: &[f64]) -> f64 {
    let l = level as isize;
    let a_phi = c.apply_adjoint(l, phi_prime);
    let mut w = a_phi.clone();
    axpy(2.0, x_approx, &mut w);
    2.0 * c.gram(l + 1).inner(f, phi_prime) - c.gram(l).inner(&w, &a_phi)
}

/// `⟨2(k − x̃) − θ, θ⟩ ≤ ‖e_K‖²` for `θ ∈ Kₗ`.
pub fn lower_bound_kernel_part(c: &HilbertComplex, level: usize, x_approx: &[f64], k: &[f64], theta: &[f64]) -> f64 {
    let mut w = sub(k, x_approx);
    for v in w.iter_mut() {
        *v *= 2.0;
    }
    axpy(-1.0, theta, &mut w);
    c.gram(level as isize).inner(&w, theta)
}

/// `‖k − πₗx̃‖² + (1 + cₗ²)‖Aₗx̃ − f‖² + (1 + cₗ₋₁²)‖Aₗ₋₁*x̃ − g‖²`.
#[allow(clippy::too_many_arguments)]
pub fn conforming_functional(
    c: &HilbertComplex,
    level: usize,
    x_approx: &[f64],
    f: &[f64],
    g: &[f64],
    k: &[f64],
    c_prev: f64,
    c_next: f64,
) -> Result<f64> {
    let l = level as isize;
    let kernel = c.gram(l).norm(&sub(k, &c.project_cohomology(level, x_approx)?));
    let rf = c.gram(l + 1).norm(&sub(&c.apply_op(l, x_approx), f));
    let rg = c.gram(l - 1).norm(&sub(&c.apply_adjoint(l - 1, x_approx), g));
    Ok(kernel * kernel + (1.0 + c_next * c_next) * rf * rf + (1.0 + c_prev * c_prev) * rg * rg)
}

/// Free vectors of the six first-order bounds: `ζ, ξ ∈ Hₗ`, `φ ∈ Hₗ₋₁`,
/// `φ' ∈ Hₗ₊₁`, `θ ∈ Kₗ`.
#[derive(Debug, Clone)]
pub struct TrialFields {
    pub zeta: Vec<f64>,
    pub xi: Vec<f64>,
    pub phi: Vec<f64>,
    pub phi_prime: Vec<f64>,
    pub theta: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TrialValues {
    pub upper_g: f64,
    pub upper_f: f64,
    pub upper_kernel: f64,
    pub lower_g: f64,
    pub lower_f: f64,
    pub lower_kernel: f64,
}

impl TrialFields {
    pub fn validate(&self, c: &HilbertComplex, level: usize) -> Result<()> {
        let l = level as isize;
        check_len(&self.zeta, c.dim(l), "trial field zeta")?;
        check_len(&self.xi, c.dim(l), "trial field xi")?;
        check_len(&self.phi, c.dim(l - 1), "trial field phi")?;
        check_len(&self.phi_prime, c.dim(l + 1), "trial field phi'")?;
        check_len(&self.theta, c.dim(l), "trial field theta")
    }

    /// Random trial fields around `center` with entries of size `scale`;
    /// `θ` is a random combination of the cohomology basis.
    pub fn random(c: &HilbertComplex, level: usize, center: &[f64], scale: f64, seed: u64) -> Result<Self> {
        let l = level as isize;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sample = |n: usize| -> Vec<f64> { (0..n).map(|_| scale * rng.random_range(-1.0..1.0)).collect() };
        let zeta = add(center, &sample(c.dim(l)));
        let xi = add(center, &sample(c.dim(l)));
        let phi = sample(c.dim(l - 1));
        let phi_prime = sample(c.dim(l + 1));
        let coeffs = sample(c.cohomology(level)?.dim);
        let mut theta = vec![0.0; c.dim(l)];
        for (a, q) in coeffs.iter().zip(&c.cohomology(level)?.vectors) {
            axpy(*a, q, &mut theta);
        }
        Ok(Self {
            zeta,
            xi,
            phi,
            phi_prime,
            theta,
        })
    }

    #[allow(clippy::too_many_arguments)]
    pub fn evaluate(
        &self,
        c: &HilbertComplex,
        level: usize,
        x_approx: &[f64],
        f: &[f64],
        g: &[f64],
        k: &[f64],
        c_prev: f64,
        c_next: f64,
    ) -> Result<TrialValues> {
        self.validate(c, level)?;
        Ok(TrialValues {
            upper_g: upper_bound_g_part(c, level, x_approx, g, &self.zeta, c_prev),
            upper_f: upper_bound_f_part(c, level, x_approx, f, &self.xi, c_next),
            upper_kernel: upper_bound_kernel_part(c, level, x_approx, k, &self.phi, &self.phi_prime),
            lower_g: lower_bound_g_part(c, level, x_approx, g, &self.phi),
            lower_f: lower_bound_f_part(c, level, x_approx, f, &self.phi_prime),
            lower_kernel: lower_bound_kernel_part(c, level, x_approx, k, &self.theta),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::{decompose_error, kernel_attaining_potentials};
    use crate::instances::{build_cycle, build_grid, GammaT, GridSpec, Recipe};
    use crate::linalg::vector::deterministic_vector;

    fn setup() -> (crate::instances::Instance, Vec<f64>, Vec<f64>, crate::instances::ManufacturedScenario) {
        let inst = build_grid(&GridSpec::new(2, 4).with_hole(vec![1, 1], vec![3, 3])).unwrap();
        let s = inst.manufacture(1, Recipe::RangePair, 7).unwrap();
        let pert = deterministic_vector(s.exact_x.len(), 5);
        let x_approx: Vec<f64> = s.exact_x.iter().zip(&pert).map(|(a, b)| a + 0.1 * b).collect();
        (inst, s.exact_x.clone(), x_approx, s)
    }

    #[test]
    fn sharp_at_attaining_arguments() {
        let (inst, x, xa, s) = setup();
        let c = &inst.complex;
        let d = decompose_error(c, 1, &xa, &x, 1e-13).unwrap();
        let c0 = c.poincare_constant(0, 1e-12).unwrap().c_l;
        let c1 = c.poincare_constant(1, 1e-12).unwrap().c_l;
        let zeta = add(&d.e_prev, &xa);
        let xi = add(&d.e_adj, &xa);
        let ug = upper_bound_g_part(c, 1, &xa, &s.g, &zeta, c0);
        let uf = upper_bound_f_part(c, 1, &xa, &s.f, &xi, c1);
        assert!((ug - d.norm_prev).abs() <= 1e-8 * d.norm_prev);
        assert!((uf - d.norm_adj).abs() <= 1e-8 * d.norm_adj);
        let (phi, phi_p) = kernel_attaining_potentials(c, 1, &xa).unwrap();
        let uk = upper_bound_kernel_part(c, 1, &xa, &s.k, &phi, &phi_p);
        assert!((uk - d.norm_kernel).abs() <= 1e-8 * d.norm_kernel);
        let lk = lower_bound_kernel_part(c, 1, &xa, &s.k, &d.e_kernel);
        assert!((lk - d.norm_kernel.powi(2)).abs() <= 1e-8 * d.norm_kernel.powi(2));
        let doubled: Vec<f64> = d.e_kernel.iter().map(|v| 2.0 * v).collect();
        assert!(lower_bound_kernel_part(c, 1, &xa, &s.k, &doubled).abs() < 1e-12);
    }

    #[test]
    fn exact_approximation_gives_zero() {
        let c = build_cycle(5).unwrap();
        let s = c.manufacture(1, Recipe::KernelShift, 2).unwrap();
        let x = &s.exact_x;
        assert_eq!(upper_bound_g_part(&c.complex, 1, x, &s.g, x, 1.0), 0.0);
        assert_eq!(upper_bound_f_part(&c.complex, 1, x, &s.f, x, 1.0), 0.0);
        assert_eq!(lower_bound_g_part(&c.complex, 1, x, &s.g, &[0.0; 5]), 0.0);
        let g = build_grid(&GridSpec::new(2, 3).with_gamma(GammaT::All)).unwrap();
        let s = g.manufacture(1, Recipe::SmoothPotential, 1).unwrap();
        let f = conforming_functional(&g.complex, 1, &s.exact_x, &s.f, &s.g, &s.k, 1.0, 1.0).unwrap();
        assert!(f < 1e-24);
    }

    #[test]
    fn random_trials_sandwich() {
        let (inst, x, xa, s) = setup();
        let c = &inst.complex;
        let d = decompose_error(c, 1, &xa, &x, 1e-13).unwrap();
        let c0 = c.poincare_constant(0, 1e-12).unwrap().c_l;
        let c1 = c.poincare_constant(1, 1e-12).unwrap().c_l;
        for seed in 0..50 {
            let t = TrialFields::random(c, 1, &xa, 0.5, seed).unwrap();
            let v = t.evaluate(c, 1, &xa, &s.f, &s.g, &s.k, c0, c1).unwrap();
            assert!(v.upper_g >= d.norm_prev - 1e-10);
            assert!(v.upper_f >= d.norm_adj - 1e-10);
            assert!(v.upper_kernel >= d.norm_kernel - 1e-10);
            assert!(v.lower_g <= d.norm_prev.powi(2) + 1e-10);
            assert!(v.lower_f <= d.norm_adj.powi(2) + 1e-10);
            assert!(v.lower_kernel <= d.norm_kernel.powi(2) + 1e-10);
        }
    }
}
