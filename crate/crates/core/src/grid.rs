//! Periodic n×n spectral grid on a square box of side `d`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("grid size {0} must be a power of two and at least 32")]
    BadSize(usize),
    #[error("box side must be positive, got {0}")]
    BadBoxSide(f64),
    #[error("grid mismatch: {0}x{0} (d={1}) vs {2}x{2} (d={3})")]
    Mismatch(usize, f64, usize, f64),
}

/// Uniform periodic grid: `n` points per axis, box side `d`.
///
/// Wavenumbers are `(2π/d)·m` for integer `m ∈ [−n/2, n/2)` in FFT order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n: usize,
    d: f64,
}

impl Grid {
    pub fn new(n: usize, d: f64) -> Result<Self, GridError> {
        if !n.is_power_of_two() || n < 32 {
            return Err(GridError::BadSize(n));
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(GridError::BadBoxSide(d));
        }
        Ok(Grid { n, d })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    /// Grid spacing d/n.
    pub fn dx(&self) -> f64 {
        self.d / self.n as f64
    }

    /// Quadrature weight (d/n)² of one grid cell.
    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dx()
    }

    /// Integer wavenumber for FFT index `i` (0..n → 0,1,..,n/2-1,-n/2,..,-1).
    pub fn mode(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i <= n / 2 - 1 {
            i
        } else {
            i - n
        }
    }

    /// Physical wavenumber (2π/d)·m for FFT index `i`.
    pub fn wavenumber(&self, i: usize) -> f64 {
        2.0 * std::f64::consts::PI / self.d * self.mode(i) as f64
    }

    /// Largest integer mode kept by the 2/3 dealiasing rule.
    pub fn dealias_limit(&self) -> i64 {
        (self.n / 3) as i64
    }

    /// True if FFT index pair (i, j) survives the 2/3 rule.
    pub fn in_dealias_mask(&self, i: usize, j: usize) -> bool {
        let lim = self.dealias_limit();
        self.mode(i).abs() <= lim && self.mode(j).abs() <= lim
    }

    /// Physical coordinate of sample (i, j): (i·d/n, j·d/n).
    pub fn point(&self, i: usize, j: usize) -> (f64, f64) {
        (i as f64 * self.dx(), j as f64 * self.dx())
    }

    /// Periodic distance between two points of the box.
    pub fn periodic_distance(&self, a: (f64, f64), b: (f64, f64)) -> f64 {
        let dx = periodic_delta(a.0 - b.0, self.d);
        let dy = periodic_delta(a.1 - b.1, self.d);
        dx.hypot(dy)
    }

    pub fn check_same(&self, other: &Grid) -> Result<(), GridError> {
        if self != other {
            return Err(GridError::Mismatch(self.n, self.d, other.n, other.d));
        }
        Ok(())
    }
}

/// Signed displacement wrapped into [-d/2, d/2).
pub fn periodic_delta(x: f64, d: f64) -> f64 {
    let mut r = x % d;
    if r < -d / 2.0 {
        r += d;
    } else if r >= d / 2.0 {
        r -= d;
    }
    r
}
