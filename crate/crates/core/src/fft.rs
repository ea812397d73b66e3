//! FFT engine: cached plans, 2D transforms with the domain phase folded in,
//! and spectrum padding/truncation for dealiased products.
//!
//! Normalization: the forward transform carries the `1/(n1*n2)` factor, so
//! Parseval holds with equal weights,
//! `sum_k |f_hat(k)|^2 = (1/M) sum_x |f(x)|^2`,
//! and the inverse transform is a plain sum. Because the position grid starts
//! at `-L` rather than 0, the coefficient of the signed index `k` picks up a
//! factor `(-1)^(k1+k2)` relative to the raw DFT; both directions apply it so
//! that `f_hat(k)` is the true coefficient of `exp(i xi_k . x)`.

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

type PlanKey = (usize, bool); // (len, forward)
type PlanCache = Mutex<HashMap<PlanKey, Arc<dyn Fft<f64>>>>;

fn plan(len: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    static PLANS: OnceLock<PlanCache> = OnceLock::new();
    let cache = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    guard
        .entry((len, forward))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if forward {
                planner.plan_fft_forward(len)
            } else {
                planner.plan_fft_inverse(len)
            }
        })
        .clone()
}

/// FFT every contiguous row of length `row_len` in place.
fn fft_rows(values: &mut [C64], row_len: usize, forward: bool) {
    let fft = plan(row_len, forward);
    let mut scratch = vec![C64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for row in values.chunks_exact_mut(row_len) {
        fft.process_with_scratch(row, &mut scratch);
    }
}

/// In-place 2D DFT over an `n1 x n2` row-major array (no normalization, no
/// domain phase). Rows first, then columns via transpose.
fn dft_2d_raw(values: &mut [C64], n1: usize, n2: usize, forward: bool) {
    debug_assert_eq!(values.len(), n1 * n2);
    fft_rows(values, n2, forward);
    let mut t = vec![C64::new(0.0, 0.0); values.len()];
    transpose::transpose(values, &mut t, n2, n1);
    fft_rows(&mut t, n1, forward);
    transpose::transpose(&t, values, n1, n2);
}

/// Multiply entry `(i1, i2)` by `(-1)^(i1+i2)`; with even axis lengths this is
/// exactly the `(-1)^(k1+k2)` domain phase for signed indices.
fn checkerboard(values: &mut [C64], n1: usize, n2: usize) {
    for i1 in 0..n1 {
        let row = &mut values[i1 * n2..(i1 + 1) * n2];
        let mut i2 = 1 - (i1 % 2);
        while i2 < n2 {
            row[i2] = -row[i2];
            i2 += 2;
        }
    }
}

/// Forward transform of a square `n x n` position-space array into true
/// Fourier coefficients (normalized, domain phase applied).
pub fn forward_2d(values: &mut [C64], n: usize) {
    dft_2d_raw(values, n, n, true);
    let scale = 1.0 / (n * n) as f64;
    for v in values.iter_mut() {
        *v *= scale;
    }
    checkerboard(values, n, n);
}

/// Inverse of [`forward_2d`].
pub fn inverse_2d(values: &mut [C64], n: usize) {
    checkerboard(values, n, n);
    dft_2d_raw(values, n, n, false);
}

/// Copy an `n x n` spectrum (FFT index order) into the center of a `p x p`
/// spectrum, `p >= n`; the new high-frequency modes are zero.
pub fn pad_spectrum(src: &[C64], n: usize, p: usize) -> Vec<C64> {
    debug_assert!(p >= n && src.len() == n * n);
    let mut dst = vec![C64::new(0.0, 0.0); p * p];
    let half = n / 2;
    for i1 in 0..n {
        let j1 = if i1 < half { i1 } else { i1 + (p - n) };
        let (srow, drow) = (&src[i1 * n..(i1 + 1) * n], &mut dst[j1 * p..(j1 + 1) * p]);
        drow[..half].copy_from_slice(&srow[..half]);
        drow[p - half..].copy_from_slice(&srow[half..]);
    }
    dst
}

/// Inverse of [`pad_spectrum`]: keep only the modes of the `n`-point band.
pub fn truncate_spectrum(src: &[C64], p: usize, n: usize) -> Vec<C64> {
    debug_assert!(p >= n && src.len() == p * p);
    let mut dst = vec![C64::new(0.0, 0.0); n * n];
    let half = n / 2;
    for i1 in 0..n {
        let j1 = if i1 < half { i1 } else { i1 + (p - n) };
        let (srow, drow) = (&src[j1 * p..(j1 + 1) * p], &mut dst[i1 * n..(i1 + 1) * n]);
        drow[..half].copy_from_slice(&srow[..half]);
        drow[half..].copy_from_slice(&srow[p - half..]);
    }
    dst
}

/// FFT along the first (slowest) axis of an `n_t x m` row-major array, with
/// arbitrary per-bin phase applied after (forward) or before (inverse).
/// Used for the time axis of space-time fields, whose window starts at `t0`.
pub fn dft_time_axis(values: &mut [C64], n_t: usize, m: usize, forward: bool) {
    debug_assert_eq!(values.len(), n_t * m);
    let mut t = vec![C64::new(0.0, 0.0); values.len()];
    transpose::transpose(values, &mut t, m, n_t);
    fft_rows(&mut t, n_t, forward);
    transpose::transpose(&t, values, n_t, m);
}
