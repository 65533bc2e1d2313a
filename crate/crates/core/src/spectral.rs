//! FFT-based calculus on the periodic box: derivatives, Leray projection,
//! shifted Helmholtz inverses, dealiasing.
//!
//! Sign conventions used throughout the crate:
//!   rot u       = ∂₂u₁ − ∂₁u₂
//!   ∇⊥s         = (∂₂s, −∂₁s)
//!   u⊥          = (−u₂, u₁)
//! so that rot(∇⊥s) = Δs and every zero-mean solenoidal field u has a
//! stream function S = Δ⁻¹ rot u with u = ∇⊥S.

use ndarray::Array2;
use num_complex::Complex64;
use thiserror::Error;

use crate::fft::{fft2, ifft2};
use crate::field::{FieldError, ScalarField, SolenoidalField, VectorField};
use crate::grid::Grid;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("shift {0} is within 1e-14 of the discrete Laplacian spectrum")]
    SingularShift(Complex64),
    #[error("kernel evaluation at the singular point z = 0")]
    SingularPoint,
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Spectral coefficients of one scalar component.
pub(crate) fn spec(data: &Array2<Complex64>) -> Array2<Complex64> {
    fft2(data)
}

pub(crate) fn phys(data: &Array2<Complex64>) -> Array2<Complex64> {
    ifft2(data)
}

/// Zero out every mode outside the 2/3 mask, in place.
pub(crate) fn apply_dealias_mask(grid: &Grid, c: &mut Array2<Complex64>) {
    let n = grid.n();
    for i in 0..n {
        for j in 0..n {
            if !grid.in_dealias_mask(i, j) {
                c[(i, j)] = Complex64::default();
            }
        }
    }
}

/// Multiply by i·k_x in place (derivative along the first axis).
pub(crate) fn mul_ikx(grid: &Grid, c: &mut Array2<Complex64>) {
    let n = grid.n();
    for i in 0..n {
        let k = grid.wavenumber(i);
        for j in 0..n {
            c[(i, j)] *= Complex64::new(0.0, k);
        }
    }
}

/// Multiply by i·k_y in place (derivative along the second axis).
pub(crate) fn mul_iky(grid: &Grid, c: &mut Array2<Complex64>) {
    let n = grid.n();
    for i in 0..n {
        for j in 0..n {
            let k = grid.wavenumber(j);
            c[(i, j)] *= Complex64::new(0.0, k);
        }
    }
}

/// Leray projection in spectral space: ĉ ← (I − kkᵀ/|k|²)ĉ, zero-mean gauge.
pub(crate) fn leray_spec(grid: &Grid, c1: &mut Array2<Complex64>, c2: &mut Array2<Complex64>) {
    let n = grid.n();
    for i in 0..n {
        let kx = grid.wavenumber(i);
        for j in 0..n {
            let ky = grid.wavenumber(j);
            let k2 = kx * kx + ky * ky;
            if k2 == 0.0 {
                c1[(i, j)] = Complex64::default();
                c2[(i, j)] = Complex64::default();
            } else {
                let kdotc = (c1[(i, j)] * kx + c2[(i, j)] * ky) / k2;
                c1[(i, j)] -= kdotc * kx;
                c2[(i, j)] -= kdotc * ky;
            }
        }
    }
}

/// Spectral gradient magnitude max_k |k|·(|c1| + |c2|)/n², the reference
/// scale against which divergence roundoff is meaningful.
pub(crate) fn gscale_spec(grid: &Grid, c1: &Array2<Complex64>, c2: &Array2<Complex64>) -> f64 {
    let n = grid.n();
    let scale = 1.0 / ((n * n) as f64);
    let mut gscale = 0.0f64;
    for i in 0..n {
        let kx = grid.wavenumber(i);
        for j in 0..n {
            let ky = grid.wavenumber(j);
            let g = kx.hypot(ky) * (c1[(i, j)].norm() + c2[(i, j)].norm());
            gscale = gscale.max(g * scale);
        }
    }
    gscale
}

/// Divergence certificate of a spectral pair: (absolute per-mode max-norm,
/// residual relative to the field's spectral gradient magnitude).
pub(crate) fn div_max_spec(
    grid: &Grid,
    c1: &Array2<Complex64>,
    c2: &Array2<Complex64>,
) -> (f64, f64) {
    let n = grid.n();
    let scale = 1.0 / ((n * n) as f64);
    let mut worst = 0.0f64;
    let mut gscale = 0.0f64;
    for i in 0..n {
        let kx = grid.wavenumber(i);
        for j in 0..n {
            let ky = grid.wavenumber(j);
            let d = Complex64::new(0.0, kx) * c1[(i, j)] + Complex64::new(0.0, ky) * c2[(i, j)];
            worst = worst.max(d.norm() * scale);
            let g = kx.hypot(ky) * (c1[(i, j)].norm() + c2[(i, j)].norm());
            gscale = gscale.max(g * scale);
        }
    }
    let rel = if gscale > 0.0 { worst / gscale } else { 0.0 };
    (worst, rel)
}

/// L²-orthogonal projection onto divergence-free fields with zero mean.
///
/// Fourier symbol I − kkᵀ/|k|²; the k = 0 mode is pinned to zero.
pub fn leray_project(u: &VectorField) -> SolenoidalField {
    let grid = u.grid();
    let mut c1 = spec(u.u1());
    let mut c2 = spec(u.u2());
    leray_spec(&grid, &mut c1, &mut c2);
    let res = div_max_spec(&grid, &c1, &c2);
    let v = VectorField::from_components(grid, phys(&c1), phys(&c2))
        .expect("projection preserves finiteness");
    SolenoidalField::certified(v, res).expect("Leray output is divergence-free")
}

/// Smooth (non-delta) part of the Leray projector kernel:
/// (1/(2π|z|⁴))·[[z₁²−z₂², −2z₁z₂], [−2z₁z₂, z₂²−z₁²]].
pub fn leray_kernel_eval(z: (f64, f64)) -> Result<[[f64; 2]; 2], SpectralError> {
    let (z1, z2) = z;
    let r2 = z1 * z1 + z2 * z2;
    if r2 == 0.0 {
        return Err(SpectralError::SingularPoint);
    }
    let c = 1.0 / (2.0 * std::f64::consts::PI * r2 * r2);
    Ok([
        [c * (z1 * z1 - z2 * z2), c * (-2.0 * z1 * z2)],
        [c * (-2.0 * z1 * z2), c * (z2 * z2 - z1 * z1)],
    ])
}

/// Solve (Δ − λ)w = g diagonally in Fourier space.
pub fn invert_helmholtz(g: &VectorField, shift: Complex64) -> Result<VectorField, SpectralError> {
    invert_helmholtz_scaled(g, 1.0, 0.0, shift)
}

/// Solve (νΔ − μ − λ)w = g diagonally in Fourier space.
///
/// When the k = 0 symbol is singular (λ = −μ for the zero mode) the input
/// must have zero mean; the output mean is then gauged to zero.
pub fn invert_helmholtz_scaled(
    g: &VectorField,
    nu: f64,
    mu: f64,
    shift: Complex64,
) -> Result<VectorField, SpectralError> {
    let grid = g.grid();
    let n = grid.n();
    let mut c1 = spec(g.u1());
    let mut c2 = spec(g.u2());
    let mean_scale = (n * n) as f64;
    for i in 0..n {
        let kx = grid.wavenumber(i);
        for j in 0..n {
            let ky = grid.wavenumber(j);
            let k2 = kx * kx + ky * ky;
            let denom = Complex64::new(-nu * k2 - mu, 0.0) - shift;
            if denom.norm() < 1e-14 {
                if k2 == 0.0 {
                    // zero-mean gauge: require no content in the kernel mode
                    let m = (c1[(i, j)].norm() + c2[(i, j)].norm()) / mean_scale;
                    if m > 1e-12 * (1.0 + g.max_abs()) {
                        return Err(SpectralError::SingularShift(shift));
                    }
                    c1[(i, j)] = Complex64::default();
                    c2[(i, j)] = Complex64::default();
                } else {
                    return Err(SpectralError::SingularShift(shift));
                }
            } else {
                c1[(i, j)] /= denom;
                c2[(i, j)] /= denom;
            }
        }
    }
    Ok(VectorField::from_components(grid, phys(&c1), phys(&c2))?)
}

/// ∇⊥s = (∂₂s, −∂₁s); exactly divergence-free at spectral precision.
pub fn grad_perp(s: &ScalarField) -> SolenoidalField {
    let grid = s.grid();
    let sh = spec(s.data());
    let mut c1 = sh.clone();
    mul_iky(&grid, &mut c1);
    let mut c2 = sh;
    mul_ikx(&grid, &mut c2);
    c2.mapv_inplace(|z| -z);
    // remove any mean the scalar carried; ∇⊥ of a constant is zero anyway
    c1[(0, 0)] = Complex64::default();
    c2[(0, 0)] = Complex64::default();
    let res = div_max_spec(&grid, &c1, &c2);
    let v = VectorField::from_components(grid, phys(&c1), phys(&c2))
        .expect("derivative preserves finiteness");
    SolenoidalField::certified(v, res).expect("grad_perp output is divergence-free")
}

/// Scalar curl rot u = ∂₂u₁ − ∂₁u₂.
pub fn rot(u: &VectorField) -> ScalarField {
    let grid = u.grid();
    let mut c1 = spec(u.u1());
    mul_iky(&grid, &mut c1);
    let mut c2 = spec(u.u2());
    mul_ikx(&grid, &mut c2);
    c1.zip_mut_with(&c2, |a, b| *a -= *b);
    ScalarField::from_data(grid, phys(&c1)).expect("curl preserves finiteness")
}

/// Spectral divergence ∂₁u₁ + ∂₂u₂.
pub fn divergence(u: &VectorField) -> ScalarField {
    let grid = u.grid();
    let mut c1 = spec(u.u1());
    mul_ikx(&grid, &mut c1);
    let mut c2 = spec(u.u2());
    mul_iky(&grid, &mut c2);
    c1.zip_mut_with(&c2, |a, b| *a += *b);
    ScalarField::from_data(grid, phys(&c1)).expect("divergence preserves finiteness")
}

/// Gradient of a scalar, (∂₁q, ∂₂q). Test helper for the projector identities.
pub fn gradient(q: &ScalarField) -> VectorField {
    let grid = q.grid();
    let qh = spec(q.data());
    let mut c1 = qh.clone();
    mul_ikx(&grid, &mut c1);
    let mut c2 = qh;
    mul_iky(&grid, &mut c2);
    VectorField::from_components(grid, phys(&c1), phys(&c2)).expect("finite")
}

/// Componentwise Laplacian Δu.
pub fn laplacian(u: &VectorField) -> VectorField {
    let grid = u.grid();
    let n = grid.n();
    let mut c1 = spec(u.u1());
    let mut c2 = spec(u.u2());
    for i in 0..n {
        let kx = grid.wavenumber(i);
        for j in 0..n {
            let ky = grid.wavenumber(j);
            let k2 = kx * kx + ky * ky;
            c1[(i, j)] *= -k2;
            c2[(i, j)] *= -k2;
        }
    }
    VectorField::from_components(grid, phys(&c1), phys(&c2)).expect("finite")
}

/// Stream function S = Δ⁻¹ rot u (zero mean), so that ∇⊥S = u for
/// zero-mean solenoidal u.
pub fn stream_function(u: &SolenoidalField) -> ScalarField {
    let grid = u.grid();
    let n = grid.n();
    let mut c1 = spec(u.u1());
    mul_iky(&grid, &mut c1);
    let mut c2 = spec(u.u2());
    mul_ikx(&grid, &mut c2);
    c1.zip_mut_with(&c2, |a, b| *a -= *b);
    for i in 0..n {
        let kx = grid.wavenumber(i);
        for j in 0..n {
            let ky = grid.wavenumber(j);
            let k2 = kx * kx + ky * ky;
            if k2 == 0.0 {
                c1[(i, j)] = Complex64::default();
            } else {
                c1[(i, j)] /= -k2;
            }
        }
    }
    ScalarField::from_data(grid, phys(&c1)).expect("finite")
}

/// Truncate a vector field to the 2/3 dealiasing mask.
pub fn dealias(u: &VectorField) -> VectorField {
    let grid = u.grid();
    let mut c1 = spec(u.u1());
    let mut c2 = spec(u.u2());
    apply_dealias_mask(&grid, &mut c1);
    apply_dealias_mask(&grid, &mut c2);
    VectorField::from_components(grid, phys(&c1), phys(&c2)).expect("finite")
}

/// Periodic translation u(· − δ) by spectral phase shift (exact on the
/// grid for arbitrary, not necessarily lattice-aligned, offsets).
pub fn translate(u: &VectorField, delta: (f64, f64)) -> VectorField {
    let grid = u.grid();
    let n = grid.n();
    let mut c1 = spec(u.u1());
    let mut c2 = spec(u.u2());
    for i in 0..n {
        let kx = grid.wavenumber(i);
        for j in 0..n {
            let ky = grid.wavenumber(j);
            let phase = Complex64::new(0.0, -(kx * delta.0 + ky * delta.1)).exp();
            c1[(i, j)] *= phase;
            c2[(i, j)] *= phase;
        }
    }
    VectorField::from_components(grid, phys(&c1), phys(&c2)).expect("finite")
}

/// Translation of a certified field: phase shifts preserve per-mode
/// divergence magnitudes, so the certificate carries over.
pub fn translate_solenoidal(u: &SolenoidalField, delta: (f64, f64)) -> SolenoidalField {
    let grid = u.grid();
    let t = translate(u.as_vector(), delta);
    let c1 = spec(t.u1());
    let c2 = spec(t.u2());
    let res = div_max_spec(&grid, &c1, &c2);
    SolenoidalField::certified(t, res).expect("translation preserves solenoidality")
}

/// L² norm computed in spectral space (Parseval route, for cross-checks).
pub fn l2_norm_spectral(u: &VectorField) -> f64 {
    let grid = u.grid();
    let n2 = (grid.n() * grid.n()) as f64;
    let c1 = spec(u.u1());
    let c2 = spec(u.u2());
    let s: f64 = c1
        .iter()
        .zip(c2.iter())
        .map(|(a, b)| a.norm_sqr() + b.norm_sqr())
        .sum();
    (s / n2 * grid.cell_area()).sqrt()
}
