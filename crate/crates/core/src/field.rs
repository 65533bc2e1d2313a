//! Scalar and vector fields sampled on a periodic grid.
//!
//! Values are stored as complex numbers: physical base flows and forcings
//! are real-valued, but eigenfields of the linearized operator come in
//! complex conjugate pairs, so the whole field layer carries `Complex64`
//! and real-ness is a checkable property rather than a type.

use ndarray::Array2;
use num_complex::Complex64;
use thiserror::Error;

use crate::grid::{Grid, GridError};

#[derive(Debug, Error)]
pub enum FieldError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("field contains a non-finite value")]
    NotFinite,
    #[error("field is not real-valued (max imaginary part {0:e})")]
    NotReal(f64),
    #[error("field is not divergence-free: residual {residual:e} exceeds {allowed:e}")]
    NotSolenoidal { residual: f64, allowed: f64 },
}

/// Real or complex scalar samples on the uniform lattice x = (i·d/n, j·d/n).
#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: Grid,
    data: Array2<Complex64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> Self {
        ScalarField {
            grid,
            data: Array2::zeros((grid.n(), grid.n())),
        }
    }

    pub fn from_data(grid: Grid, data: Array2<Complex64>) -> Result<Self, FieldError> {
        assert_eq!(data.dim(), (grid.n(), grid.n()));
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(FieldError::NotFinite);
        }
        Ok(ScalarField { grid, data })
    }

    /// Sample a real-valued function of the physical coordinates.
    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let data = Array2::from_shape_fn((grid.n(), grid.n()), |(i, j)| {
            let (x, y) = grid.point(i, j);
            Complex64::new(f(x, y), 0.0)
        });
        ScalarField { grid, data }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn data(&self) -> &Array2<Complex64> {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut Array2<Complex64> {
        &mut self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_imag(&self) -> f64 {
        self.data.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    /// Discrete L² norm: (Σ |s|² (d/n)²)^{1/2}.
    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.data.iter().map(|z| z.norm_sqr()).sum();
        (s * self.grid.cell_area()).sqrt()
    }

    pub fn scale(&mut self, c: Complex64) {
        self.data.mapv_inplace(|z| z * c);
    }
}

/// Two-component velocity-like field.
#[derive(Debug, Clone)]
pub struct VectorField {
    grid: Grid,
    u1: Array2<Complex64>,
    u2: Array2<Complex64>,
}

impl VectorField {
    pub fn zeros(grid: Grid) -> Self {
        let n = grid.n();
        VectorField {
            grid,
            u1: Array2::zeros((n, n)),
            u2: Array2::zeros((n, n)),
        }
    }

    pub fn from_components(
        grid: Grid,
        u1: Array2<Complex64>,
        u2: Array2<Complex64>,
    ) -> Result<Self, FieldError> {
        assert_eq!(u1.dim(), (grid.n(), grid.n()));
        assert_eq!(u2.dim(), (grid.n(), grid.n()));
        if u1
            .iter()
            .chain(u2.iter())
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(FieldError::NotFinite);
        }
        Ok(VectorField { grid, u1, u2 })
    }

    /// Sample real-valued component functions of the physical coordinates.
    pub fn from_fns(
        grid: Grid,
        f1: impl Fn(f64, f64) -> f64,
        f2: impl Fn(f64, f64) -> f64,
    ) -> Self {
        let n = grid.n();
        let sample = |f: &dyn Fn(f64, f64) -> f64| {
            Array2::from_shape_fn((n, n), |(i, j)| {
                let (x, y) = grid.point(i, j);
                Complex64::new(f(x, y), 0.0)
            })
        };
        VectorField {
            grid,
            u1: sample(&f1),
            u2: sample(&f2),
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn u1(&self) -> &Array2<Complex64> {
        &self.u1
    }

    pub fn u2(&self) -> &Array2<Complex64> {
        &self.u2
    }

    pub fn components_mut(&mut self) -> (&mut Array2<Complex64>, &mut Array2<Complex64>) {
        (&mut self.u1, &mut self.u2)
    }

    /// Pointwise speed maximum max |u(x)|.
    pub fn max_abs(&self) -> f64 {
        self.u1
            .iter()
            .zip(self.u2.iter())
            .map(|(a, b)| (a.norm_sqr() + b.norm_sqr()).sqrt())
            .fold(0.0, f64::max)
    }

    pub fn max_imag(&self) -> f64 {
        self.u1
            .iter()
            .chain(self.u2.iter())
            .map(|z| z.im.abs())
            .fold(0.0, f64::max)
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.max_imag() <= tol * self.max_abs().max(1e-300)
    }

    /// Discrete L² norm over both components.
    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self
            .u1
            .iter()
            .zip(self.u2.iter())
            .map(|(a, b)| a.norm_sqr() + b.norm_sqr())
            .sum();
        (s * self.grid.cell_area()).sqrt()
    }

    /// Sesquilinear discrete L² product ⟨self, other⟩ = Σ u·conj(v) (d/n)².
    pub fn inner(&self, other: &VectorField) -> Complex64 {
        let mut s = Complex64::default();
        for (a, b) in self.u1.iter().zip(other.u1.iter()) {
            s += a * b.conj();
        }
        for (a, b) in self.u2.iter().zip(other.u2.iter()) {
            s += a * b.conj();
        }
        s * self.grid.cell_area()
    }

    pub fn scale(&mut self, c: Complex64) {
        self.u1.mapv_inplace(|z| z * c);
        self.u2.mapv_inplace(|z| z * c);
    }

    /// self += c · other
    pub fn axpy(&mut self, c: Complex64, other: &VectorField) {
        self.u1.zip_mut_with(&other.u1, |a, b| *a += c * b);
        self.u2.zip_mut_with(&other.u2, |a, b| *a += c * b);
    }

    pub fn conj(&self) -> VectorField {
        VectorField {
            grid: self.grid,
            u1: self.u1.mapv(|z| z.conj()),
            u2: self.u2.mapv(|z| z.conj()),
        }
    }

    /// Pointwise multiply both components by a real scalar field.
    pub fn mul_scalar(&self, s: &ScalarField) -> VectorField {
        let mut out = self.clone();
        out.u1.zip_mut_with(s.data(), |a, b| *a *= b);
        out.u2.zip_mut_with(s.data(), |a, b| *a *= b);
        out
    }
}

/// A vector field carrying a divergence-free certificate.
///
/// The recorded residual is the per-mode spectral divergence max-norm; at
/// construction its value relative to the field's spectral gradient
/// magnitude must not exceed `DIV_TOL` (up to an absolute roundoff floor).
#[derive(Debug, Clone)]
pub struct SolenoidalField {
    field: VectorField,
    div_residual: f64,
}

pub const DIV_TOL: f64 = 1e-10;

impl SolenoidalField {
    /// Certify a vector field as divergence-free. `div_residual` is the
    /// spectral divergence max-norm computed by the caller (spectral ops
    /// construct it; see `spectral::leray_project` / `spectral::grad_perp`).
    pub(crate) fn certified(field: VectorField, div: (f64, f64)) -> Result<Self, FieldError> {
        let (abs, rel) = div;
        // the absolute floor keeps projections of (near-)gradient inputs,
        // whose output is roundoff-sized, from failing their own certificate
        if rel > DIV_TOL && abs > 1e-13 {
            return Err(FieldError::NotSolenoidal {
                residual: rel,
                allowed: DIV_TOL,
            });
        }
        Ok(SolenoidalField {
            field,
            div_residual: abs,
        })
    }

    pub fn zeros(grid: Grid) -> Self {
        SolenoidalField {
            field: VectorField::zeros(grid),
            div_residual: 0.0,
        }
    }

    pub fn grid(&self) -> Grid {
        self.field.grid()
    }

    pub fn div_residual(&self) -> f64 {
        self.div_residual
    }

    pub fn as_vector(&self) -> &VectorField {
        &self.field
    }

    pub fn into_vector(self) -> VectorField {
        self.field
    }
}

impl std::ops::Deref for SolenoidalField {
    type Target = VectorField;

    fn deref(&self) -> &VectorField {
        &self.field
    }
}
