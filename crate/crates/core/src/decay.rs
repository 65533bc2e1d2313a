//! Radial decay measurement: shell-averaged amplitude profiles around a
//! vortex center and log-log power-law fits with confidence half-widths.

use thiserror::Error;

use crate::field::VectorField;

#[derive(Debug, Error)]
pub enum DecayError {
    #[error("window [{lo}, {hi}] leaves {points} usable shells; need at least {needed}")]
    TooFewPoints {
        lo: f64,
        hi: f64,
        points: usize,
        needed: usize,
    },
    #[error("fit window is empty or inverted: [{0}, {1}]")]
    BadWindow(f64, f64),
}

/// Shell-averaged amplitude as a function of periodic distance from a
/// center; one bin per grid spacing.
#[derive(Debug, Clone)]
pub struct RadialProfile {
    /// Bin mid-point radii.
    pub radii: Vec<f64>,
    /// Mean pointwise magnitude |u| over each shell (empty shells dropped).
    pub amplitude: Vec<f64>,
}

/// Bin the pointwise magnitude of `field` into radial shells of width d/n
/// around `center`, using periodic distance.
pub fn shell_average(field: &VectorField, center: (f64, f64)) -> RadialProfile {
    let grid = field.grid();
    let n = grid.n();
    let h = grid.d() / n as f64;
    let max_r = grid.d() / std::f64::consts::SQRT_2;
    let bins = (max_r / h).ceil() as usize + 1;
    let mut sums = vec![0.0f64; bins];
    let mut counts = vec![0usize; bins];
    for i in 0..n {
        for j in 0..n {
            let r = grid.periodic_distance(grid.point(i, j), center);
            let b = (r / h).floor() as usize;
            let a = (field.u1()[(i, j)].norm_sqr() + field.u2()[(i, j)].norm_sqr()).sqrt();
            sums[b.min(bins - 1)] += a;
            counts[b.min(bins - 1)] += 1;
        }
    }
    let mut radii = Vec::new();
    let mut amplitude = Vec::new();
    for b in 0..bins {
        if counts[b] > 0 {
            radii.push((b as f64 + 0.5) * h);
            amplitude.push(sums[b] / counts[b] as f64);
        }
    }
    RadialProfile { radii, amplitude }
}

/// Least-squares power-law fit of a radial profile.
#[derive(Debug, Clone, Copy)]
pub struct DecayFit {
    /// Log-log slope: amplitude ≈ C r^slope over the fit window.
    pub slope: f64,
    /// 95% confidence half-width of the slope (normal approximation).
    pub half_width: f64,
    /// log C.
    pub intercept: f64,
    /// Number of shells entering the fit.
    pub points: usize,
}

/// Fit log(amplitude) against log(r) over shells with r ∈ [r_lo, r_hi].
///
/// Shells with non-positive amplitude are dropped; at least four usable
/// shells are required.
pub fn fit_log_slope(profile: &RadialProfile, r_lo: f64, r_hi: f64) -> Result<DecayFit, DecayError> {
    if !(r_lo > 0.0) || !(r_hi > r_lo) {
        return Err(DecayError::BadWindow(r_lo, r_hi));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (r, a) in profile.radii.iter().zip(&profile.amplitude) {
        if *r >= r_lo && *r <= r_hi && *a > 0.0 {
            xs.push(r.ln());
            ys.push(a.ln());
        }
    }
    fit_logs(&xs, &ys, 4, r_lo, r_hi)
}

/// Log-log least-squares fit of positive samples (x, y), e.g. unstable
/// counts against Grashof numbers; at least three points are required.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<DecayFit, DecayError> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &(x, y) in points {
        if x > 0.0 && y > 0.0 {
            xs.push(x.ln());
            ys.push(y.ln());
        }
    }
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    fit_logs(&xs, &ys, 3, lo.exp(), hi.exp())
}

fn fit_logs(xs: &[f64], ys: &[f64], needed: usize, r_lo: f64, r_hi: f64) -> Result<DecayFit, DecayError> {
    let m = xs.len();
    if m < needed {
        return Err(DecayError::TooFewPoints {
            lo: r_lo,
            hi: r_hi,
            points: m,
            needed,
        });
    }
    let mf = m as f64;
    let xbar = xs.iter().sum::<f64>() / mf;
    let ybar = ys.iter().sum::<f64>() / mf;
    let sxx: f64 = xs.iter().map(|x| (x - xbar).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let se = if m > 2 {
        (rss / (mf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(DecayFit {
        slope,
        half_width: 1.96 * se,
        intercept,
        points: m,
    })
}
