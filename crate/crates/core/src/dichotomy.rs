//! Exponential dichotomy of the linearization around a multi-vortex state:
//! the localized multi-projector, hyperbolic/neutral block split, a damped
//! Riccati fixed-point for the graph correction, and resolvent probes of
//! the hyperbolic gap.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::field::{SolenoidalField, VectorField};
use crate::grid::Grid;
use crate::krylov::{self, GmresError};
use crate::oseen::{build_localized_frame, LocalizedFrame, OseenParams, SpectralPair};
use crate::spectral::{
    invert_helmholtz_scaled, leray_project, translate, translate_solenoidal,
};

#[derive(Debug, Error)]
pub enum DichotomyError {
    #[error("frames overlap: cut-off radius βL = {beta_l} exceeds half the minimal spacing {half_spacing}")]
    FrameOverlap { beta_l: f64, half_spacing: f64 },
    #[error("no lattice sites given")]
    EmptyLattice,
    #[error("frame Gram matrix is numerically singular (deviation from identity {deviation:e})")]
    SingularGram { deviation: f64 },
    #[error("hyperbolic solve stalled after {iterations} iterations, residual {residual:e}")]
    HyperbolicSolve { iterations: usize, residual: f64 },
    #[error("Riccati iteration did not contract: residual {residual:e} after {iterations} sweeps")]
    RiccatiDiverged { residual: f64, iterations: usize },
    #[error(transparent)]
    Oseen(#[from] crate::oseen::OseenError),
}

/// The localized projector Π_{Ξ,L} w = Σ_j c_j(w) φ_{j,L}, assembled from
/// one translated frame per lattice site (and per retained eigenvalue — a
/// complex pair contributes its conjugate partner too).
///
/// The coordinates biorthogonalize the raw frame pairings through the
/// inverse Gram matrix, c(w) = G⁻¹ (α_j⟨w, ψ̃_{j,L}⟩)_j, so Π is exactly
/// idempotent; the deviation of the raw Gram matrix from the identity
/// remains available as the locality diagnostic.
#[derive(Debug)]
pub struct MultiProjector {
    frames: Vec<LocalizedFrame>,
    alphas: Vec<Complex64>,
    gram_inv: DMatrix<Complex64>,
    grid: Grid,
}

fn check_lattice(
    centers: &[(f64, f64)],
    min_spacing: f64,
    l: f64,
) -> Result<(), DichotomyError> {
    if centers.is_empty() {
        return Err(DichotomyError::EmptyLattice);
    }
    let beta_l = 0.8 * l;
    if centers.len() > 1 && beta_l > min_spacing / 2.0 {
        return Err(DichotomyError::FrameOverlap {
            beta_l,
            half_spacing: min_spacing / 2.0,
        });
    }
    Ok(())
}

impl MultiProjector {
    /// Build frames of radius `l` at every center by translating the
    /// single-vortex eigenpair (anchored at `pair_center`).
    ///
    /// `min_spacing` is the minimal pairwise periodic distance of the
    /// centers; the cut-off supports must not overlap.
    pub fn new(
        pair: &SpectralPair,
        pair_center: (f64, f64),
        centers: &[(f64, f64)],
        min_spacing: f64,
        l: f64,
    ) -> Result<Self, DichotomyError> {
        check_lattice(centers, min_spacing, l)?;
        let grid = pair.phi0.grid();
        let mut proj = MultiProjector {
            frames: Vec::new(),
            alphas: Vec::new(),
            gram_inv: DMatrix::identity(0, 0),
            grid,
        };
        proj.push_pair_frames(pair, pair_center, centers, l)?;
        proj.finalize()?;
        Ok(proj)
    }

    /// Like [`MultiProjector::new`], but each center also carries the
    /// frame of the conjugate eigenvalue, so the projected cluster is the
    /// full complex pair {λ, conj λ} and the range is closed under
    /// conjugation.
    pub fn with_conjugate(
        pair: &SpectralPair,
        pair_center: (f64, f64),
        centers: &[(f64, f64)],
        min_spacing: f64,
        l: f64,
    ) -> Result<Self, DichotomyError> {
        check_lattice(centers, min_spacing, l)?;
        let grid = pair.phi0.grid();
        let mut proj = MultiProjector {
            frames: Vec::new(),
            alphas: Vec::new(),
            gram_inv: DMatrix::identity(0, 0),
            grid,
        };
        proj.push_pair_frames(pair, pair_center, centers, l)?;
        if pair.lambda.im != 0.0 {
            let conj = conjugate_pair(pair);
            proj.push_pair_frames(&conj, pair_center, centers, l)?;
        }
        proj.finalize()?;
        Ok(proj)
    }

    fn finalize(&mut self) -> Result<(), DichotomyError> {
        let g = self.gram();
        match g.clone().try_inverse() {
            Some(inv) => {
                self.gram_inv = inv;
                Ok(())
            }
            None => Err(DichotomyError::SingularGram {
                deviation: self.gram_deviation(),
            }),
        }
    }

    fn push_pair_frames(
        &mut self,
        pair: &SpectralPair,
        pair_center: (f64, f64),
        centers: &[(f64, f64)],
        l: f64,
    ) -> Result<(), DichotomyError> {
        for &c in centers {
            let delta = (c.0 - pair_center.0, c.1 - pair_center.1);
            let moved = SpectralPair {
                lambda: pair.lambda,
                phi0: translate_solenoidal(&pair.phi0, delta),
                psi0: translate_solenoidal(&pair.psi0, delta),
                psi_tilde: translate(&pair.psi_tilde, delta),
                residuals: pair.residuals,
            };
            let frame = build_localized_frame(&moved, c, l)?;
            // normalization for the coordinate c_j(w) = α_j⟨w, ψ̃_j⟩: the
            // projector fixes φ_j exactly when α_j⟨φ_j, ψ̃_j⟩ = 1
            let alpha = Complex64::ONE / frame.phi_l.inner(&frame.psi_tilde_l);
            self.frames.push(frame);
            self.alphas.push(alpha);
        }
        Ok(())
    }

    pub fn rank(&self) -> usize {
        self.frames.len()
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn alphas(&self) -> &[Complex64] {
        &self.alphas
    }

    pub fn frames(&self) -> &[LocalizedFrame] {
        &self.frames
    }

    /// Biorthogonalized frame coordinates c(w) = G⁻¹ (α_j⟨w, ψ̃_{j,L}⟩)_j.
    pub fn coordinates(&self, w: &VectorField) -> Vec<Complex64> {
        let raw = nalgebra::DVector::from_vec(
            self.frames
                .iter()
                .zip(&self.alphas)
                .map(|(f, a)| w.inner(&f.psi_tilde_l) * a)
                .collect::<Vec<_>>(),
        );
        (&self.gram_inv * raw).iter().copied().collect()
    }

    /// Σ_j c_j φ_{j,L}.
    pub fn synthesize(&self, coords: &[Complex64]) -> SolenoidalField {
        let mut out = VectorField::zeros(self.grid);
        for (c, f) in coords.iter().zip(&self.frames) {
            out.axpy(*c, &f.phi_l);
        }
        leray_project(&out)
    }

    /// Π_{Ξ,L} w.
    pub fn apply(&self, w: &VectorField) -> SolenoidalField {
        self.synthesize(&self.coordinates(w))
    }

    /// (1 − Π_{Ξ,L}) w.
    pub fn complement(&self, w: &VectorField) -> SolenoidalField {
        let pw = self.apply(w);
        let mut out = leray_project(w).into_vector();
        out.axpy(-Complex64::ONE, &pw);
        leray_project(&out)
    }

    /// Adjoint projector: ⟨Π w, v⟩ = ⟨w, Π* v⟩ for solenoidal w, v.
    pub fn apply_adjoint(&self, v: &VectorField) -> SolenoidalField {
        let t = nalgebra::DVector::from_vec(
            self.frames
                .iter()
                .map(|f| f.phi_l.inner(v))
                .collect::<Vec<_>>(),
        );
        let gamma = self.gram_inv.transpose() * t;
        let mut out = VectorField::zeros(self.grid);
        for (i, f) in self.frames.iter().enumerate() {
            out.axpy((gamma[i] * self.alphas[i]).conj(), &f.psi_tilde_l);
        }
        // ψ̃ carries a non-solenoidal lift component; projecting it away
        // preserves all pairings against solenoidal fields
        leray_project(&out)
    }

    /// (1 − Π_{Ξ,L})* v.
    pub fn complement_adjoint(&self, v: &VectorField) -> SolenoidalField {
        let pv = self.apply_adjoint(v);
        let mut out = leray_project(v).into_vector();
        out.axpy(-Complex64::ONE, &pv);
        leray_project(&out)
    }

    /// Raw Gram matrix G_jk = α_j ⟨φ_{k,L}, ψ̃_{j,L}⟩, which is ≈ I for
    /// well-separated frames. The projector applies G⁻¹ internally, so
    /// this matrix is a locality diagnostic, not a correctness condition.
    pub fn gram(&self) -> DMatrix<Complex64> {
        let m = self.frames.len();
        DMatrix::from_fn(m, m, |j, k| {
            self.frames[k].phi_l.inner(&self.frames[j].psi_tilde_l) * self.alphas[j]
        })
    }

    /// max_jk |G − I|.
    pub fn gram_deviation(&self) -> f64 {
        let g = self.gram();
        let m = g.nrows();
        let mut worst = 0.0f64;
        for j in 0..m {
            for k in 0..m {
                let want = if j == k { Complex64::ONE } else { Complex64::default() };
                worst = worst.max((g[(j, k)] - want).norm());
            }
        }
        worst
    }
}

/// Deterministic Gaussian probe field (zero-mean solenoidal).
fn gaussian_probe(grid: Grid, seed: u64) -> SolenoidalField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = grid.n();
    let mut mk = || {
        ndarray::Array2::from_shape_fn((n, n), |_| {
            // Box–Muller from two uniforms
            let u1: f64 = rng.gen_range(1e-12..1.0);
            let u2: f64 = rng.gen_range(0.0..1.0);
            let r = (-2.0 * u1.ln()).sqrt();
            Complex64::new(r * (2.0 * std::f64::consts::PI * u2).cos(), 0.0)
        })
    };
    let (u1, u2) = (mk(), mk());
    let v = VectorField::from_components(grid, u1, u2).expect("finite");
    leray_project(&v)
}

/// Probe-based operator-norm estimate: power iteration on BᴴB from ≥20
/// Gaussian starts, 10 steps each, using the supplied adjoint action.
pub fn block_norm_probe(
    b: &dyn Fn(&SolenoidalField) -> SolenoidalField,
    b_adj: &dyn Fn(&SolenoidalField) -> SolenoidalField,
    grid: Grid,
    probes: usize,
    seed: u64,
) -> f64 {
    let probes = probes.max(20);
    let mut best = 0.0f64;
    for p in 0..probes {
        let mut v = gaussian_probe(grid, seed.wrapping_add(p as u64));
        let mut sigma2 = 0.0f64;
        for _ in 0..10 {
            let nrm = v.l2_norm();
            if nrm < 1e-300 {
                break;
            }
            let mut vv = v.into_vector();
            vv.scale(Complex64::new(1.0 / nrm, 0.0));
            let bv = b(&leray_project(&vv));
            sigma2 = bv.l2_norm().powi(2);
            v = b_adj(&bv);
        }
        best = best.max(sigma2.sqrt());
    }
    best
}

/// The four blocks of 𝓛 under the splitting induced by Π_{Ξ,L}, acting
/// matrix-free; 𝓛 is the unshifted linearization.
pub struct BlockOperator<'a> {
    pub op: &'a OseenParams,
    pub proj: &'a MultiProjector,
}

impl<'a> BlockOperator<'a> {
    /// 𝓛₁₁ w = (1−Π) 𝓛 (1−Π) w.
    pub fn l11(&self, w: &SolenoidalField) -> SolenoidalField {
        let q = self.proj.complement(w);
        self.proj.complement(&self.op.apply_raw(&q).into_vector())
    }

    /// 𝓛₁₂ c = (1−Π) 𝓛 Σ_j c_j φ_{j,L}.
    pub fn l12(&self, coords: &[Complex64]) -> SolenoidalField {
        let f = self.proj.synthesize(coords);
        self.proj.complement(&self.op.apply_raw(&f).into_vector())
    }

    /// 𝓛₂₁ w = coords(𝓛 (1−Π) w).
    pub fn l21(&self, w: &SolenoidalField) -> Vec<Complex64> {
        let q = self.proj.complement(w);
        self.proj
            .coordinates(&self.op.apply_raw(&q).into_vector())
    }

    /// 𝓛₂₂ as an explicit #Ξ×#Ξ matrix.
    pub fn l22_matrix(&self) -> DMatrix<Complex64> {
        let m = self.proj.rank();
        let mut a = DMatrix::<Complex64>::zeros(m, m);
        for j in 0..m {
            let mut e = vec![Complex64::default(); m];
            e[j] = Complex64::ONE;
            let f = self.proj.synthesize(&e);
            let img = self.op.apply_raw(&f).into_vector();
            for (i, c) in self.proj.coordinates(&img).into_iter().enumerate() {
                a[(i, j)] = c;
            }
        }
        a
    }

    /// Probe estimate of the coupling norm ‖(1−Π) 𝓛 Π‖.
    pub fn l12_norm_probe(&self, probes: usize, seed: u64) -> f64 {
        let b = |w: &SolenoidalField| {
            self.proj
                .complement(&self.op.apply_raw(self.proj.apply(w).as_vector()).into_vector())
        };
        let b_adj = |v: &SolenoidalField| {
            self.proj.apply_adjoint(
                self.op
                    .apply_adjoint_raw(self.proj.complement_adjoint(v).as_vector())
                    .as_vector(),
            )
        };
        block_norm_probe(&b, &b_adj, self.proj.grid(), probes, seed)
    }

    /// Probe estimate of the coupling norm ‖Π 𝓛 (1−Π)‖.
    pub fn l21_norm_probe(&self, probes: usize, seed: u64) -> f64 {
        let b = |w: &SolenoidalField| {
            self.proj
                .apply(self.op.apply_raw(self.proj.complement(w).as_vector()).as_vector())
        };
        let b_adj = |v: &SolenoidalField| {
            self.proj.complement_adjoint(
                self.op
                    .apply_adjoint_raw(self.proj.apply_adjoint(v).as_vector())
                    .as_vector(),
            )
        };
        block_norm_probe(&b, &b_adj, self.proj.grid(), probes, seed)
    }

    /// Solve 𝓛₁₁ x = (1−Π) g in the hyperbolic subspace.
    pub fn solve_l11(&self, g: &SolenoidalField) -> Result<SolenoidalField, DichotomyError> {
        self.solve_l11_shifted(g, Complex64::default())
    }

    /// Solve (𝓛₁₁ − θ) x = (1−Π) g in the hyperbolic subspace.
    ///
    /// The iteration runs on (𝓛₁₁ − θ(1−Π) + Π), which agrees with
    /// 𝓛₁₁ − θ on range(1−Π) and is the identity on range Π, so the
    /// kernel of 𝓛₁₁ never makes the system singular and the solution
    /// automatically satisfies Π x = 0.
    pub fn solve_l11_shifted(
        &self,
        g: &SolenoidalField,
        theta: Complex64,
    ) -> Result<SolenoidalField, DichotomyError> {
        let rhs = self.proj.complement(g);
        let opf = |w: &VectorField| {
            let mut out = self.l11(&leray_project(w)).into_vector();
            out.axpy(-theta, &self.proj.complement(w));
            out.axpy(Complex64::ONE, &self.proj.apply(w));
            out
        };
        let (nu, mu) = (self.op.nu(), self.op.mu());
        let pre = move |r: &VectorField| -> VectorField {
            invert_helmholtz_scaled(r, nu, mu, theta).unwrap_or_else(|_| r.clone())
        };
        match krylov::gmres(&opf, Some(&pre), rhs.as_vector(), 1e-10, 250, 4000) {
            Ok(sol) => Ok(self.proj.complement(&sol.x)),
            Err(GmresError::Stalled {
                iterations,
                residual,
            }) => Err(DichotomyError::HyperbolicSolve {
                iterations,
                residual,
            }),
        }
    }
}

/// Result of the Riccati graph iteration.
pub struct RiccatiReport {
    /// Graph correction K as one hyperbolic field per frame coordinate.
    pub k_fields: Vec<SolenoidalField>,
    /// Neutral block 𝓛₂₁K + 𝓛₂₂ on the frame coordinates.
    pub neutral: DMatrix<Complex64>,
    /// Final relative residual of the Riccati equation.
    pub residual: f64,
    pub iterations: usize,
    /// Last observed contraction factor of the update sequence.
    pub contraction: f64,
}

impl RiccatiReport {
    /// Eigenvalues of the neutral block, sorted by descending real part.
    pub fn neutral_eigenvalues(&self) -> Vec<Complex64> {
        let mut e = krylov::hessenberg_eigenvalues(&self.neutral);
        e.sort_by(|a, b| b.re.partial_cmp(&a.re).unwrap_or(std::cmp::Ordering::Equal));
        e
    }

    /// Centroid and radius of the neutral eigenvalue cluster.
    pub fn cluster(&self) -> (Complex64, f64) {
        let e = self.neutral_eigenvalues();
        let m = e.len().max(1) as f64;
        let mean = e.iter().sum::<Complex64>() / Complex64::new(m, 0.0);
        let radius = e
            .iter()
            .map(|z| (z - mean).norm())
            .fold(0.0, f64::max);
        (mean, radius)
    }
}

/// Solve the Riccati graph equation for the invariant subspace over the
/// frame coordinates: find K (one hyperbolic field per coordinate) with
///
///   𝓛₁₁ K − K N = −𝓛₁₂,   N = 𝓛₂₂ + 𝓛₂₁ K.
///
/// Each outer sweep freezes N, Schur-factors it (N = U T Uᴴ), and solves
/// the Sylvester equation column by column through shifted hyperbolic
/// solves (𝓛₁₁ − T_ii)k̃_i = rhs_i — the shifts sit on the neutral
/// cluster, away from the hyperbolic spectrum, so the solves stay well
/// conditioned. N is then refreshed from the new K until the direct
/// residual drops below `tol` (relative to ‖𝓛₁₂‖).
pub fn riccati_neutral(
    blocks: &BlockOperator,
    tol: f64,
    max_iters: usize,
) -> Result<RiccatiReport, DichotomyError> {
    let m = blocks.proj.rank();
    let grid = blocks.proj.grid();
    let l22 = blocks.l22_matrix();
    let mut l12_cols: Vec<SolenoidalField> = Vec::with_capacity(m);
    let mut l12_scale = 0.0f64;
    for j in 0..m {
        let mut e = vec![Complex64::default(); m];
        e[j] = Complex64::ONE;
        let col = blocks.l12(&e);
        l12_scale = l12_scale.max(col.l2_norm());
        l12_cols.push(col);
    }
    let l12_scale = l12_scale.max(1e-300);
    let mut k: Vec<SolenoidalField> = vec![SolenoidalField::zeros(grid); m];
    let mut n_mat = l22.clone();
    let mut prev_update = f64::INFINITY;
    let mut contraction;
    let mut residual = f64::INFINITY;
    for it in 1..=max_iters {
        // N = U T Uᴴ, then 𝓛₁₁ K̃ − K̃ T = −𝓛₁₂ U with K̃ = K U
        let (u, t) = nalgebra::linalg::Schur::new(n_mat.clone()).unpack();
        let mut kt: Vec<SolenoidalField> = Vec::with_capacity(m);
        for i in 0..m {
            let mut rhs = VectorField::zeros(grid);
            for j in 0..m {
                rhs.axpy(-u[(j, i)], l12_cols[j].as_vector());
            }
            for (j, kt_j) in kt.iter().enumerate().take(i) {
                rhs.axpy(t[(j, i)], kt_j.as_vector());
            }
            kt.push(blocks.solve_l11_shifted(&leray_project(&rhs), t[(i, i)])?);
        }
        // rotate back: k_j = Σ_i k̃_i conj(U_ji)
        let mut update = 0.0f64;
        let mut knew: Vec<SolenoidalField> = Vec::with_capacity(m);
        for j in 0..m {
            let mut col = VectorField::zeros(grid);
            for (i, kt_i) in kt.iter().enumerate() {
                col.axpy(u[(j, i)].conj(), kt_i.as_vector());
            }
            let next = leray_project(&col);
            let mut diff = next.as_vector().clone();
            diff.axpy(-Complex64::ONE, &k[j]);
            update = update.max(diff.l2_norm());
            knew.push(next);
        }
        contraction = if prev_update.is_finite() && prev_update > 0.0 {
            update / prev_update
        } else {
            0.0
        };
        prev_update = update;
        k = knew;
        // refresh the neutral block from the new graph
        let mut q = DMatrix::<Complex64>::zeros(m, m);
        for j in 0..m {
            for (i, c) in blocks.l21(&k[j]).into_iter().enumerate() {
                q[(i, j)] = c;
            }
        }
        n_mat = &q + &l22;
        // direct residual: 𝓛₁₁ k_j + 𝓛₁₂ e_j − Σ_i k_i N_ij
        let mut worst = 0.0f64;
        for j in 0..m {
            let mut r = blocks.l11(&k[j]).into_vector();
            r.axpy(Complex64::ONE, l12_cols[j].as_vector());
            for i in 0..m {
                r.axpy(-n_mat[(i, j)], &k[i]);
            }
            worst = worst.max(r.l2_norm());
        }
        residual = worst / l12_scale;
        if std::env::var_os("MVLB_RICCATI_TRACE").is_some() {
            eprintln!(
                "riccati sweep {it}: residual {residual:.3e}, update {update:.3e}, contraction {contraction:.3}"
            );
        }
        if residual <= tol {
            return Ok(RiccatiReport {
                k_fields: k,
                neutral: n_mat,
                residual,
                iterations: it,
                contraction,
            });
        }
    }
    Err(DichotomyError::RiccatiDiverged {
        residual,
        iterations: max_iters,
    })
}

/// Resolvent probe of the hyperbolic gap: solve (𝓛₁₁ − z) x = r for z on
/// the circle |z| = δ/2 and Gaussian right-hand sides; the gap is declared
/// open when every solve converges with ‖x‖ ≤ 10³ ‖r‖.
pub fn hyperbolic_gap_probe(
    blocks: &BlockOperator,
    delta_trial: f64,
    points: usize,
    seed: u64,
) -> bool {
    let grid = blocks.proj.grid();
    let radius = delta_trial / 2.0;
    let points = points.max(4);
    for p in 0..points {
        let theta = 2.0 * std::f64::consts::PI * (p as f64) / (points as f64);
        let z = Complex64::new(radius * theta.cos(), radius * theta.sin());
        let rhs = blocks.proj.complement(gaussian_probe(grid, seed + p as u64).as_vector());
        let rnorm = rhs.l2_norm();
        // the +Π term deflates the kernel of 𝓛₁₁ on range Π without
        // touching the restriction to the hyperbolic subspace
        let opf = |w: &VectorField| {
            let mut out = blocks.l11(&leray_project(w)).into_vector();
            out.axpy(-z, &blocks.proj.complement(w));
            out.axpy(Complex64::ONE, &blocks.proj.apply(w));
            out
        };
        let (nu, mu) = (blocks.op.nu(), blocks.op.mu());
        let pre = move |r: &VectorField| -> VectorField {
            invert_helmholtz_scaled(r, nu, mu, z)
                .unwrap_or_else(|_| r.clone())
        };
        match krylov::gmres(&opf, Some(&pre), rhs.as_vector(), 1e-8, 250, 2000) {
            Ok(sol) => {
                if sol.x.l2_norm() > 1e3 * rnorm {
                    return false;
                }
            }
            Err(_) => return false,
        }
    }
    true
}

/// Probe estimate of ‖Π_{Ξ,L} − Π₀‖ for a single-vortex projector against
/// the exact rank-one spectral projector of the same eigenvalue.
pub fn projector_distance(
    proj: &MultiProjector,
    pair: &SpectralPair,
    probes: usize,
    seed: u64,
) -> f64 {
    let grid = proj.grid();
    let mut worst = 0.0f64;
    for p in 0..probes.max(8) {
        let w = gaussian_probe(grid, seed + p as u64);
        let pl = proj.apply(w.as_vector());
        let ps = pair.spectral_projector(&w);
        let mut diff = pl.into_vector();
        diff.axpy(-Complex64::ONE, ps.as_vector());
        worst = worst.max(diff.l2_norm() / w.l2_norm());
    }
    worst
}

/// The conjugate-partner eigenpair (λ̄, φ̄₀, ψ̄₀).
pub fn conjugate_pair(pair: &SpectralPair) -> SpectralPair {
    SpectralPair {
        lambda: pair.lambda.conj(),
        phi0: leray_project(&pair.phi0.conj()),
        psi0: leray_project(&pair.psi0.conj()),
        psi_tilde: pair.psi_tilde.conj(),
        residuals: pair.residuals,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::FIXTURE;

    fn fixture_projector(l: f64) -> MultiProjector {
        let f = &*FIXTURE;
        MultiProjector::new(&f.pair, f.center, &[f.center], f64::INFINITY, l).unwrap()
    }

    #[test]
    fn overlapping_frames_are_rejected() {
        let f = &*FIXTURE;
        let centers = [(2.0, 2.0), (6.0, 2.0)];
        let err = MultiProjector::new(&f.pair, f.center, &centers, 4.0, 3.0).unwrap_err();
        assert!(matches!(err, DichotomyError::FrameOverlap { .. }), "{err}");
    }

    #[test]
    fn single_frame_projector_is_idempotent() {
        let proj = fixture_projector(4.5);
        assert!(proj.gram_deviation() < 1e-10, "gram {}", proj.gram_deviation());
        let w = gaussian_probe(proj.grid(), 11);
        let pw = proj.apply(w.as_vector());
        let ppw = proj.apply(pw.as_vector());
        let mut diff = ppw.into_vector();
        diff.axpy(-Complex64::ONE, pw.as_vector());
        let rel = diff.l2_norm() / pw.l2_norm().max(1e-300);
        assert!(rel < 1e-8, "‖Π²w − Πw‖/‖Πw‖ = {rel}");
    }

    #[test]
    fn conjugate_projector_is_idempotent() {
        let f = &*FIXTURE;
        let proj =
            MultiProjector::with_conjugate(&f.pair, f.center, &[f.center], f64::INFINITY, 4.5)
                .unwrap();
        assert_eq!(proj.rank(), 2);
        // raw frames of a conjugate pair are only approximately
        // biorthogonal; the G⁻¹ correction restores exact idempotency
        let dev = proj.gram_deviation();
        assert!(dev < 0.5, "gram deviation {dev}");
        let w = gaussian_probe(proj.grid(), 13);
        let pw = proj.apply(w.as_vector());
        let ppw = proj.apply(pw.as_vector());
        let mut diff = ppw.into_vector();
        diff.axpy(-Complex64::ONE, pw.as_vector());
        let rel = diff.l2_norm() / pw.l2_norm().max(1e-300);
        assert!(rel < 1e-8, "‖Π²w − Πw‖/‖Πw‖ = {rel} (gram deviation {dev})");
    }

    #[test]
    fn adjoint_projector_matches_pairing() {
        let f = &*FIXTURE;
        let proj =
            MultiProjector::with_conjugate(&f.pair, f.center, &[f.center], f64::INFINITY, 4.5)
                .unwrap();
        let w = gaussian_probe(proj.grid(), 17);
        let v = gaussian_probe(proj.grid(), 19);
        let lhs = proj.apply(w.as_vector()).inner(&v);
        let rhs = w.inner(&proj.apply_adjoint(v.as_vector()));
        let scale = w.l2_norm() * v.l2_norm();
        assert!(
            (lhs - rhs).norm() < 1e-10 * scale,
            "⟨Πw,v⟩ = {lhs}, ⟨w,Π*v⟩ = {rhs}"
        );
    }

    #[test]
    fn projector_distance_decreases_with_cut_radius() {
        let f = &*FIXTURE;
        let near = projector_distance(&fixture_projector(4.5), &f.pair, 8, 3);
        let far = projector_distance(&fixture_projector(2.2), &f.pair, 8, 3);
        assert!(near < far, "distance L=4.5 {near} vs L=2.2 {far}");
        assert!(near < 0.5, "distance at L=4.5 is {near}");
    }

    #[test]
    fn riccati_recovers_pair_eigenvalues() {
        let f = &*FIXTURE;
        let proj =
            MultiProjector::with_conjugate(&f.pair, f.center, &[f.center], f64::INFINITY, 4.5)
                .unwrap();
        let blocks = BlockOperator {
            op: &f.op,
            proj: &proj,
        };
        let rep = riccati_neutral(&blocks, 1e-6, 25).unwrap();
        assert!(rep.residual <= 1e-6, "residual {}", rep.residual);
        let eigs = rep.neutral_eigenvalues();
        assert_eq!(eigs.len(), 2);
        let best = eigs
            .iter()
            .map(|z| (z - f.pair.lambda).norm())
            .fold(f64::INFINITY, f64::min);
        assert!(
            best < 0.05 * (1.0 + f.pair.lambda.norm()),
            "nearest neutral eigenvalue is {best:e} from λ = {}",
            f.pair.lambda
        );
    }

    #[test]
    fn hyperbolic_gap_is_open_below_leading_rate() {
        let f = &*FIXTURE;
        let proj =
            MultiProjector::with_conjugate(&f.pair, f.center, &[f.center], f64::INFINITY, 4.5)
                .unwrap();
        let blocks = BlockOperator {
            op: &f.op,
            proj: &proj,
        };
        assert!(hyperbolic_gap_probe(&blocks, 0.02, 8, 5));
    }
}
