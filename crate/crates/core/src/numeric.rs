//! Small numeric helpers shared by the modules: complex 3-vectors and
//! order-stable reductions.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use rayon::prelude::*;

pub type CVec3 = Vector3<Complex64>;
pub type CMat3 = Matrix3<Complex64>;
pub type RVec3 = Vector3<f64>;

pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn complexify(v: &RVec3) -> CVec3 {
    v.map(|x| Complex64::new(x, 0.0))
}

/// Bilinear dot product (no conjugation).
pub fn dotu(a: &CVec3, b: &CVec3) -> Complex64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Hermitian inner product conj(a)·b.
pub fn dotc(a: &CVec3, b: &CVec3) -> Complex64 {
    a[0].conj() * b[0] + a[1].conj() * b[1] + a[2].conj() * b[2]
}

pub fn cross_rc(a: &RVec3, b: &CVec3) -> CVec3 {
    CVec3::new(
        b[2] * a[1] - b[1] * a[2],
        b[0] * a[2] - b[2] * a[0],
        b[1] * a[0] - b[0] * a[1],
    )
}

pub fn norm(v: &CVec3) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(m: &CMat3) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Pairwise (cascade) summation. The split points depend only on the
/// length, so the result is identical for any thread count.
pub fn pairwise_sum<T>(xs: &[T]) -> T
where
    T: Copy + std::ops::Add<Output = T> + Default,
{
    match xs.len() {
        0 => T::default(),
        1 => xs[0],
        n if n <= 8 => xs.iter().copied().fold(T::default(), |a, b| a + b),
        n => {
            let (l, r) = xs.split_at(n / 2);
            pairwise_sum(l) + pairwise_sum(r)
        }
    }
}

/// Pairwise sum of complex 3-vectors.
pub fn pairwise_sum_vec(xs: &[CVec3]) -> CVec3 {
    match xs.len() {
        0 => CVec3::zeros(),
        n if n <= 8 => xs.iter().fold(CVec3::zeros(), |a, b| a + b),
        n => {
            let (l, r) = xs.split_at(n / 2);
            pairwise_sum_vec(l) + pairwise_sum_vec(r)
        }
    }
}

/// Parallel map that keeps input order; results are reduced by the caller.
pub fn ordered_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    items.par_iter().map(f).collect()
}

/// Observed convergence order between two successive refinement levels.
pub fn observed_order(coarse: f64, fine: f64, refinement: f64) -> f64 {
    (coarse / fine).ln() / refinement.ln()
}
