//! Matrix-free complex Krylov machinery: restarted GMRES with optional
//! right preconditioning, and an explicitly restarted Arnoldi iteration
//! with locked deflation for leading eigenpairs.
//!
//! Vectors are whole `VectorField`s; inner products are the sesquilinear
//! discrete L² product, so adjoint-based identities translate directly.

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::field::VectorField;

#[derive(Debug, Error)]
pub enum GmresError {
    #[error("GMRES stalled after {iterations} iterations, relative residual {residual:e}")]
    Stalled { iterations: usize, residual: f64 },
}

/// Result of a linear solve.
pub struct GmresSolution {
    pub x: VectorField,
    pub iterations: usize,
    /// Final relative residual ‖b − Ax‖/‖b‖.
    pub residual: f64,
}

type Op<'a> = &'a dyn Fn(&VectorField) -> VectorField;

/// Complex Givens rotation zeroing `b` against `a`: returns (c, s, r) with
/// c·a + s·b = r and −conj(s)·a + c·b = 0.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64, Complex64) {
    if b.norm() == 0.0 {
        (1.0, Complex64::default(), a)
    } else if a.norm() == 0.0 {
        (0.0, Complex64::ONE, b)
    } else {
        let t = (a.norm_sqr() + b.norm_sqr()).sqrt();
        let c = a.norm() / t;
        let phase = a / a.norm();
        let s = phase * b.conj() / t;
        (c, s, phase * t)
    }
}

/// Right-preconditioned restarted GMRES for A x = b.
///
/// `pre`, when given, approximates A⁻¹; the iteration solves A M y = b and
/// returns x = M y. Iteration counts are matvec applications of A.
pub fn gmres(
    op: Op,
    pre: Option<Op>,
    b: &VectorField,
    rtol: f64,
    restart: usize,
    max_iter: usize,
) -> Result<GmresSolution, GmresError> {
    let bnorm = b.l2_norm();
    if bnorm == 0.0 {
        return Ok(GmresSolution {
            x: VectorField::zeros(b.grid()),
            iterations: 0,
            residual: 0.0,
        });
    }
    let apply_pre = |v: &VectorField| -> VectorField {
        match pre {
            Some(m) => m(v),
            None => v.clone(),
        }
    };
    let mut x = VectorField::zeros(b.grid());
    let mut iterations = 0usize;
    let mut last_rel = 1.0;
    while iterations < max_iter {
        // residual of the current iterate
        let mut r = b.clone();
        let ax = op(&x);
        r.axpy(-Complex64::ONE, &ax);
        let beta = r.l2_norm();
        last_rel = beta / bnorm;
        if last_rel <= rtol {
            return Ok(GmresSolution {
                x,
                iterations,
                residual: last_rel,
            });
        }
        let m = restart.min(max_iter - iterations).max(1);
        let mut v: Vec<VectorField> = Vec::with_capacity(m + 1);
        let mut r0 = r;
        r0.scale(Complex64::new(1.0 / beta, 0.0));
        v.push(r0);
        let mut h = vec![vec![Complex64::default(); m]; m + 1];
        let mut cs = vec![0.0f64; m];
        let mut sn = vec![Complex64::default(); m];
        let mut s = vec![Complex64::default(); m + 1];
        s[0] = Complex64::new(beta, 0.0);
        let mut k_used = 0;
        for j in 0..m {
            let mut w = op(&apply_pre(&v[j]));
            iterations += 1;
            // modified Gram–Schmidt
            for (i, vi) in v.iter().enumerate() {
                let hij = w.inner(vi);
                h[i][j] = hij;
                w.axpy(-hij, vi);
            }
            let wn = w.l2_norm();
            h[j + 1][j] = Complex64::new(wn, 0.0);
            // previous rotations applied to the new column
            for i in 0..j {
                let t = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
                h[i + 1][j] = -sn[i].conj() * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            let (c, sg, rr) = givens(h[j][j], h[j + 1][j]);
            cs[j] = c;
            sn[j] = sg;
            h[j][j] = rr;
            h[j + 1][j] = Complex64::default();
            s[j + 1] = -sg.conj() * s[j];
            s[j] *= c;
            k_used = j + 1;
            let rel = s[j + 1].norm() / bnorm;
            if rel <= rtol || wn < 1e-14 * bnorm || iterations >= max_iter {
                break;
            }
            let mut vnext = w;
            vnext.scale(Complex64::new(1.0 / wn, 0.0));
            v.push(vnext);
        }
        // back-substitution on the triangularized Hessenberg
        let mut y = vec![Complex64::default(); k_used];
        for i in (0..k_used).rev() {
            let mut acc = s[i];
            for l in i + 1..k_used {
                acc -= h[i][l] * y[l];
            }
            y[i] = acc / h[i][i];
        }
        let mut z = VectorField::zeros(b.grid());
        for (yi, vi) in y.iter().zip(v.iter()) {
            z.axpy(*yi, vi);
        }
        x.axpy(Complex64::ONE, &apply_pre(&z));
    }
    // final residual check after exhausting the budget
    let mut r = b.clone();
    let ax = op(&x);
    r.axpy(-Complex64::ONE, &ax);
    let rel = r.l2_norm() / bnorm;
    if rel <= rtol {
        Ok(GmresSolution {
            x,
            iterations,
            residual: rel,
        })
    } else {
        Err(GmresError::Stalled {
            iterations,
            residual: rel.min(last_rel),
        })
    }
}

/// One converged Ritz pair of the operated-on map.
pub struct RitzPair {
    pub theta: Complex64,
    pub vector: VectorField,
    /// Arnoldi residual estimate |h_{m+1,m}|·|y_m| at lock time.
    pub residual: f64,
}

/// Options for the restarted Arnoldi iteration.
pub struct ArnoldiConfig {
    /// Krylov subspace dimension per restart cycle.
    pub subspace: usize,
    /// Number of eigenpairs to lock.
    pub wanted: usize,
    /// Relative residual tolerance for locking.
    pub tol: f64,
    pub max_restarts: usize,
}

/// Explicitly restarted Arnoldi with locked deflation.
///
/// Finds the `wanted` eigenpairs of `op` that maximize `order` (e.g.
/// modulus for shift-inverted operators). Locked vectors are deflated by
/// orthogonalization in every later cycle.
pub fn arnoldi_eigs(
    op: Op,
    start: &VectorField,
    cfg: &ArnoldiConfig,
    order: &dyn Fn(Complex64) -> f64,
) -> Vec<RitzPair> {
    let mut locked: Vec<RitzPair> = Vec::new();
    let mut v0 = start.clone();
    for _restart in 0..cfg.max_restarts {
        if locked.len() >= cfg.wanted {
            break;
        }
        // deflate and normalize the start vector
        for l in &locked {
            let c = v0.inner(&l.vector);
            v0.axpy(-c, &l.vector);
        }
        let n0 = v0.l2_norm();
        if n0 < 1e-300 {
            break;
        }
        v0.scale(Complex64::new(1.0 / n0, 0.0));
        let m = cfg.subspace;
        let mut v: Vec<VectorField> = vec![v0.clone()];
        let mut h = DMatrix::<Complex64>::zeros(m + 1, m);
        let mut k_used = 0;
        for j in 0..m {
            let mut w = op(&v[j]);
            for l in &locked {
                let c = w.inner(&l.vector);
                w.axpy(-c, &l.vector);
            }
            for (i, vi) in v.iter().enumerate() {
                let hij = w.inner(vi);
                h[(i, j)] = hij;
                w.axpy(-hij, vi);
            }
            // one reorthogonalization pass keeps the basis clean
            for (i, vi) in v.iter().enumerate() {
                let corr = w.inner(vi);
                h[(i, j)] += corr;
                w.axpy(-corr, vi);
            }
            let wn = w.l2_norm();
            h[(j + 1, j)] = Complex64::new(wn, 0.0);
            k_used = j + 1;
            if wn < 1e-12 {
                break;
            }
            let mut vnext = w;
            vnext.scale(Complex64::new(1.0 / wn, 0.0));
            v.push(vnext);
        }
        let hk = h.view((0, 0), (k_used, k_used)).into_owned();
        let hsub = h[(k_used.min(m), k_used - 1)].norm();
        let thetas = hessenberg_eigenvalues(&hk);
        let mut order_idx: Vec<usize> = (0..thetas.len()).collect();
        order_idx.sort_by(|&a, &b| {
            order(thetas[b])
                .partial_cmp(&order(thetas[a]))
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let mut next_start: Option<VectorField> = None;
        for &idx in order_idx.iter().take(cfg.wanted - locked.len()) {
            let theta = thetas[idx];
            let y = hessenberg_eigenvector(&hk, theta);
            let resid = hsub * y[k_used - 1].norm();
            let mut ritz = VectorField::zeros(start.grid());
            for (yi, vi) in y.iter().zip(v.iter()) {
                ritz.axpy(*yi, vi);
            }
            for l in &locked {
                let c = ritz.inner(&l.vector);
                ritz.axpy(-c, &l.vector);
            }
            let rn = ritz.l2_norm();
            if rn < 1e-300 {
                continue;
            }
            ritz.scale(Complex64::new(1.0 / rn, 0.0));
            if resid <= cfg.tol * theta.norm().max(1e-300) {
                locked.push(RitzPair {
                    theta,
                    vector: ritz,
                    residual: resid,
                });
            } else if next_start.is_none() {
                next_start = Some(ritz);
            }
        }
        v0 = next_start.unwrap_or_else(|| v[v.len() - 1].clone());
    }
    locked
}

/// Eigenvalues of a (small) complex matrix via its Schur form.
pub fn hessenberg_eigenvalues(h: &DMatrix<Complex64>) -> Vec<Complex64> {
    let schur = nalgebra::linalg::Schur::new(h.clone());
    match schur.eigenvalues() {
        Some(e) => e.iter().copied().collect(),
        None => Vec::new(),
    }
}

/// Eigenvector of `h` for eigenvalue `theta` by shifted inverse iteration.
pub fn hessenberg_eigenvector(h: &DMatrix<Complex64>, theta: Complex64) -> Vec<Complex64> {
    let k = h.nrows();
    let scale = h.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    // tiny complex perturbation keeps the shifted matrix invertible
    let shift = theta + Complex64::new(1e-12 * scale, 1e-12 * scale);
    let mut a = h.clone();
    for i in 0..k {
        a[(i, i)] -= shift;
    }
    let lu = a.lu();
    let mut y = nalgebra::DVector::<Complex64>::from_element(k, Complex64::ONE);
    y /= Complex64::new((k as f64).sqrt(), 0.0);
    for _ in 0..3 {
        if let Some(sol) = lu.solve(&y) {
            let n = sol.norm();
            if n > 0.0 && n.is_finite() {
                y = sol / Complex64::new(n, 0.0);
            }
        }
    }
    y.iter().copied().collect()
}
