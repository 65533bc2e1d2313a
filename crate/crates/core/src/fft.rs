//! Cached-plan 2D complex FFTs on row-major arrays.

use ndarray::Array2;
use num_complex::Complex64;
use once_cell::sync::Lazy;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::par::maybe_par_chunks_mut;

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

static PLAN_CACHE: Lazy<Mutex<HashMap<usize, Arc<Plans>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

fn plans(n: usize) -> Arc<Plans> {
    let mut cache = PLAN_CACHE.lock().unwrap();
    cache
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Arc::new(Plans {
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
            })
        })
        .clone()
}

fn fft_rows(data: &mut Array2<Complex64>, fft: &Arc<dyn Fft<f64>>) {
    let n = data.ncols();
    let slice = data.as_slice_mut().expect("row-major contiguous");
    let fft = fft.clone();
    maybe_par_chunks_mut(slice, n, move |row| {
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        fft.process_with_scratch(row, &mut scratch);
    });
}

fn transpose(data: &Array2<Complex64>) -> Array2<Complex64> {
    let (r, c) = data.dim();
    Array2::from_shape_fn((c, r), |(i, j)| data[(j, i)])
}

/// Forward 2D FFT (unnormalized), in place over both axes.
pub fn fft2(data: &Array2<Complex64>) -> Array2<Complex64> {
    let n = data.nrows();
    let p = plans(n);
    let mut out = data.clone();
    fft_rows(&mut out, &p.forward);
    let mut out = transpose(&out);
    fft_rows(&mut out, &p.forward);
    transpose(&out)
}

/// Inverse 2D FFT, normalized so that `ifft2(fft2(x)) == x`.
pub fn ifft2(data: &Array2<Complex64>) -> Array2<Complex64> {
    let n = data.nrows();
    let p = plans(n);
    let mut out = data.clone();
    fft_rows(&mut out, &p.inverse);
    let mut out = transpose(&out);
    fft_rows(&mut out, &p.inverse);
    let scale = 1.0 / (n * n) as f64;
    let mut out = transpose(&out);
    out.mapv_inplace(|z| z * scale);
    out
}
