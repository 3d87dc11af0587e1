//! Small dense vector kernels on `f64` slices.

#[inline]
pub fn dot(u: &[f64], v: &[f64]) -> f64 {
    debug_assert_eq!(u.len(), v.len());
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

#[inline]
pub fn norm2(u: &[f64]) -> f64 {
    dot(u, u).sqrt()
}

/// y += alpha * x
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[inline]
pub fn scale(alpha: f64, x: &mut [f64]) {
    for xi in x.iter_mut() {
        *xi *= alpha;
    }
}

pub fn add(u: &[f64], v: &[f64]) -> Vec<f64> {
    u.iter().zip(v).map(|(a, b)| a + b).collect()
}

pub fn sub(u: &[f64], v: &[f64]) -> Vec<f64> {
    u.iter().zip(v).map(|(a, b)| a - b).collect()
}

pub fn scaled(alpha: f64, x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| alpha * v).collect()
}

pub fn max_abs(u: &[f64]) -> f64 {
    u.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Deterministic, non-symmetric filler used for start vectors.
///
/// The sequence is built from an irrational rotation so that it has no
/// reflection or translation symmetry on structured grids.
pub fn deterministic_vector(n: usize, salt: u64) -> Vec<f64> {
    let phase = 0.318_309_886_183_790_7 * (salt as f64 + 1.0);
    (0..n)
        .map(|i| {
            let t = (i as f64 + 1.0) * 0.618_033_988_749_894_8 + phase;
            let frac = t - t.floor();
            (frac - 0.5) + 0.25 * ((i as f64 + 1.0) * 1.324_717_957_244_746 + phase).sin()
        })
        .collect()
}
