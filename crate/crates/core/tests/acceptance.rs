//! End-to-end acceptance suite.
//!
//! One test per acceptance criterion; each prints a single summary line
//! with its measured quantities. Heavier criteria share lazily-built
//! fixtures (the certified unstable vortex at two box sizes). The dense
//! reference eigenvalues come from LAPACK's zgeev through the system
//! library, independent of the crate's own eigensolvers.

use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use once_cell::sync::Lazy;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mvlb_core::decay::{fit_log_slope, shell_average};
use mvlb_core::dichotomy::{riccati_neutral, BlockOperator, MultiProjector};
use mvlb_core::eigen::{
    adjoint_pair, count_unstable, dense, find_unstable_vortex, leading_spectrum, EigenRequest,
};
use mvlb_core::experiments::{
    case1_plan, case2_plan, config_hash, run_case1_scaling, run_case2_scaling, Case,
    ExperimentConfig,
};
use mvlb_core::field::{ScalarField, SolenoidalField, VectorField};
use mvlb_core::grid::Grid;
use mvlb_core::oseen::{build_localized_frame, OseenParams, SpectralPair};
use mvlb_core::spectral::{
    divergence, grad_perp, gradient, leray_project, rot,
};
use mvlb_core::steady::{
    assemble_multivortex, single_vortex_state, Lattice, VortexFamily, VortexSpec,
};
use mvlb_core::weight::{lattice_sum_slope, weight_inequality_check};

const NU: f64 = 0.05;
const R0: f64 = 1.0;
const AMP: f64 = 4.0;

#[link(name = "lapack")]
extern "C" {
    fn zgeev_(
        jobvl: *const u8,
        jobvr: *const u8,
        n: *const i32,
        a: *mut Complex64,
        lda: *const i32,
        w: *mut Complex64,
        vl: *mut Complex64,
        ldvl: *const i32,
        vr: *mut Complex64,
        ldvr: *const i32,
        work: *mut Complex64,
        lwork: *const i32,
        rwork: *mut f64,
        info: *mut i32,
    );
}

/// All eigenvalues of a dense complex matrix, sorted by descending real
/// part (LAPACK zgeev; independent of the crate's eigensolvers).
fn lapack_eigenvalues(a: &DMatrix<Complex64>) -> Vec<Complex64> {
    let n = a.nrows() as i32;
    let mut data: Vec<Complex64> = a.as_slice().to_vec();
    let mut w = vec![Complex64::default(); n as usize];
    let lwork = 4 * n;
    let mut work = vec![Complex64::default(); lwork as usize];
    let mut rwork = vec![0.0f64; 2 * n as usize];
    let mut info = 0i32;
    let mut dummy = Complex64::default();
    let one = 1i32;
    unsafe {
        zgeev_(
            b"N".as_ptr(),
            b"N".as_ptr(),
            &n,
            data.as_mut_ptr(),
            &n,
            w.as_mut_ptr(),
            &mut dummy,
            &one,
            &mut dummy,
            &one,
            work.as_mut_ptr(),
            &lwork,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    assert_eq!(info, 0, "zgeev failed with info {info}");
    w.sort_by(|x, y| y.re.partial_cmp(&x.re).unwrap());
    w
}

/// The reference vortex on the small box: operator, dense spectrum, and
/// the certified eigenpair.
struct Anchor {
    op: OseenParams,
    dense_eigs: Vec<Complex64>,
    pair: SpectralPair,
}

static ANCHOR: Lazy<Anchor> = Lazy::new(|| {
    let grid = Grid::new(64, 8.0).unwrap();
    let spec = VortexSpec::ring(AMP, R0, (4.0, 4.0));
    let st = single_vortex_state(grid, &spec, NU, 0.0).unwrap();
    let op = OseenParams::from_state(&st, Complex64::default());
    let dense_eigs = lapack_eigenvalues(&dense::assemble(&op));
    let hint = dense_eigs[0];
    let rep = leading_spectrum(&op, &EigenRequest::rightmost(2, Some(hint))).unwrap();
    let lead = rep
        .pairs
        .into_iter()
        .max_by(|a, b| a.lambda.re.partial_cmp(&b.lambda.re).unwrap())
        .unwrap();
    let pair = adjoint_pair(&op, lead.lambda, &lead.phi).unwrap();
    Anchor {
        op,
        dense_eigs,
        pair,
    }
});

/// The same vortex on the wide box d = 32 r₀ at 256², for decay and
/// frame-scaling measurements.
static WIDE: Lazy<(OseenParams, SpectralPair)> = Lazy::new(|| {
    let grid = Grid::new(256, 32.0).unwrap();
    let spec = VortexSpec::ring(AMP, R0, (16.0, 16.0));
    let st = single_vortex_state(grid, &spec, NU, 0.0).unwrap();
    let op = OseenParams::from_state(&st, Complex64::default());
    let hint = ANCHOR.pair.lambda;
    let rep = leading_spectrum(&op, &EigenRequest::rightmost(2, Some(hint))).unwrap();
    let lead = rep
        .pairs
        .into_iter()
        .max_by(|a, b| a.lambda.re.partial_cmp(&b.lambda.re).unwrap())
        .unwrap();
    let pair = adjoint_pair(&op, lead.lambda, &lead.phi).unwrap();
    (op, pair)
});

/// Single-vortex eigenpair on the two-vortex quincunx box (128², spacing
/// 8), shared by the index and dichotomy criteria.
static QUINCUNX_PAIR: Lazy<(OseenParams, SpectralPair)> = Lazy::new(|| {
    let a = 8.0 / std::f64::consts::SQRT_2;
    let d = 2.0 * a;
    let grid = Grid::new(128, d).unwrap();
    let spec = VortexSpec::ring(AMP, R0, (d / 2.0, d / 2.0));
    let st = single_vortex_state(grid, &spec, NU, 0.0).unwrap();
    let op = OseenParams::from_state(&st, Complex64::default());
    let rep =
        leading_spectrum(&op, &EigenRequest::rightmost(2, Some(ANCHOR.pair.lambda))).unwrap();
    let lead = rep
        .pairs
        .into_iter()
        .max_by(|a, b| a.lambda.re.partial_cmp(&b.lambda.re).unwrap())
        .unwrap();
    let pair = adjoint_pair(&op, lead.lambda, &lead.phi).unwrap();
    (op, pair)
});

/// Smooth random band-limited test field.
fn random_trig_field(grid: Grid, seed: u64) -> VectorField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = grid.d();
    let modes: Vec<(f64, f64, f64, f64, f64)> = (0..6)
        .map(|_| {
            let kx = rng.gen_range(1..=5) as f64 * 2.0 * std::f64::consts::PI / d;
            let ky = rng.gen_range(1..=5) as f64 * 2.0 * std::f64::consts::PI / d;
            (
                kx,
                ky,
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect();
    let m1 = modes.clone();
    let m2 = modes;
    VectorField::from_fns(
        grid,
        move |x, y| {
            m1.iter()
                .map(|(kx, ky, a, _, p)| a * (kx * x + ky * y + p).sin())
                .sum()
        },
        move |x, y| {
            m2.iter()
                .map(|(kx, ky, _, b, p)| b * (kx * x + ky * y + p).cos())
                .sum()
        },
    )
}

fn sub(a: &VectorField, b: &VectorField) -> VectorField {
    let mut out = a.clone();
    out.axpy(Complex64::new(-1.0, 0.0), b);
    out
}

fn scalar_max(s: &ScalarField) -> f64 {
    s.max_abs()
}

#[test]
fn criterion_01_spectral_core_properties() {
    let t0 = Instant::now();
    let grid = Grid::new(64, 8.0).unwrap();
    // Leray projector: idempotency, orthogonality, gradient annihilation
    for k in 0..50u64 {
        let w = random_trig_field(grid, 100 + k);
        let pw = leray_project(&w);
        let ppw = leray_project(pw.as_vector());
        let wn = w.l2_norm();
        let idem = sub(ppw.as_vector(), pw.as_vector()).l2_norm() / wn;
        assert!(idem <= 1e-10, "idempotency defect {idem:e} at probe {k}");
        let resid = sub(&w, pw.as_vector());
        let ortho = pw.as_vector().inner(&resid).norm() / (wn * wn);
        assert!(ortho <= 1e-10, "orthogonality defect {ortho:e} at probe {k}");
        let q = ScalarField::from_fn(grid, |x, y| (0.7 * x - 0.4 * y).sin() + (0.3 * x * 0.9).cos());
        let g = gradient(&q);
        let ann = leray_project(&g).l2_norm() / g.l2_norm();
        assert!(ann <= 1e-10, "gradient annihilation defect {ann:e}");
    }
    // calculus identities on smooth fields
    let s = ScalarField::from_fn(grid, |x, y| {
        (2.0 * std::f64::consts::PI * x / 8.0).sin() * (4.0 * std::f64::consts::PI * y / 8.0).cos()
    });
    let div_gp = divergence(grad_perp(&s).as_vector());
    assert!(
        scalar_max(&div_gp) <= 1e-12 * s.max_abs().max(1.0),
        "div(grad_perp s) = {:e}",
        scalar_max(&div_gp)
    );
    let rot_g = rot(&gradient(&s));
    assert!(
        scalar_max(&rot_g) <= 1e-12 * gradient(&s).max_abs().max(1.0) * 10.0,
        "rot(grad q) = {:e}",
        scalar_max(&rot_g)
    );
    // weight inequality on one million random pairs
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1_000_000u32 {
        let x = (rng.gen_range(-40.0..40.0), rng.gen_range(-40.0..40.0));
        let y = (rng.gen_range(-40.0..40.0), rng.gen_range(-40.0..40.0));
        assert!(weight_inequality_check(x, y), "weight inequality at {x:?}, {y:?}");
    }
    // lattice-sum decay across L-doublings
    let slope = lattice_sum_slope(&[8.0, 16.0, 32.0]);
    let elapsed = t0.elapsed().as_secs_f64();
    println!(
        "criterion 01 spectral-core: lattice slope {slope:.3} (target -3 +/- 0.1), {elapsed:.0}s"
    );
    assert!(elapsed < 60.0, "runtime {elapsed:.0}s exceeds 60s");
    assert!(
        (slope + 3.0).abs() <= 0.1,
        "lattice-sum slope {slope:.4} outside -3 +/- 0.1: at L <= 32 the \
         nearest-neighbor terms (1 + L|m|)^-3 still carry the +1 offset, \
         flattening the measured slope to about -2.88"
    );
}

#[test]
fn criterion_02_dense_oracle_equivalence() {
    let t0 = Instant::now();
    let grid = Grid::new(64, 8.0).unwrap();
    let mut flows: Vec<(&str, OseenParams)> = Vec::new();
    flows.push((
        "zero",
        OseenParams::new(&SolenoidalField::zeros(grid), NU, 0.0, Complex64::default()),
    ));
    let weak_spec = VortexSpec::ring(1.0, R0, (4.0, 4.0));
    let weak = single_vortex_state(grid, &weak_spec, NU, 0.0).unwrap();
    flows.push(("weak", OseenParams::from_state(&weak, Complex64::default())));
    let mut worst = 0.0f64;
    for (name, op) in &flows {
        let reference = lapack_eigenvalues(&dense::assemble(op));
        let rep =
            leading_spectrum(op, &EigenRequest::rightmost(2, Some(reference[0]))).unwrap();
        assert!(rep.converged, "{name}: matrix-free eigensolve did not converge");
        for p in rep.pairs.iter().take(2) {
            let err = reference
                .iter()
                .map(|z| (z - p.lambda).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(
                err <= 1e-6,
                "{name}: matrix-free {} is {err:e} from the dense spectrum",
                p.lambda
            );
            worst = worst.max(err);
        }
    }
    // the unstable flow reuses the anchor fixture (same grid, same oracle)
    let a = &*ANCHOR;
    for lam in [a.pair.lambda, a.pair.lambda.conj()] {
        let err = a
            .dense_eigs
            .iter()
            .map(|z| (z - lam).norm())
            .fold(f64::INFINITY, f64::min);
        assert!(err <= 1e-6, "unstable: {lam} is {err:e} from the dense spectrum");
        worst = worst.max(err);
    }
    let elapsed = t0.elapsed().as_secs_f64();
    println!(
        "criterion 02 dense-oracle: 3 flows matched to {worst:.1e} (tol 1e-6), {elapsed:.0}s"
    );
    assert!(elapsed < 300.0, "runtime {elapsed:.0}s exceeds 5 min");
}

#[test]
fn criterion_03_unstable_vortex_search() {
    let t0 = Instant::now();
    let coarse = Grid::new(64, 8.0).unwrap();
    let fine = Grid::new(256, 16.0).unwrap();
    let (spec, pair) = find_unstable_vortex(
        VortexFamily::CounterRotatingRing,
        R0,
        coarse,
        fine,
        (0.5, 8.0),
        NU,
        0.0,
    )
    .unwrap();
    let margin = 0.05 * NU / (R0 * R0);
    assert!(
        pair.lambda.re >= margin,
        "Re lambda {:.4e} below margin {margin:.1e}",
        pair.lambda.re
    );
    assert!(
        pair.residuals.0 <= 1e-6 && pair.residuals.1 <= 1e-6,
        "eigenpair residuals {:?} above 1e-6",
        pair.residuals
    );
    let biorth = (pair.phi0.inner(&pair.psi0) - Complex64::ONE).norm();
    assert!(biorth <= 1e-8, "biorthogonal defect {biorth:e}");
    assert_eq!(pair.phi0.grid().n(), 256);
    assert!(fine.d() / R0 >= 16.0);
    let elapsed = t0.elapsed().as_secs_f64();
    println!(
        "criterion 03 unstable-vortex: a = {:.3}, lambda = {:.4}{:+.4}i, residuals ({:.1e}, {:.1e}), {elapsed:.0}s",
        spec.amplitude, pair.lambda.re, pair.lambda.im, pair.residuals.0, pair.residuals.1
    );
    assert!(elapsed < 600.0, "runtime {elapsed:.0}s exceeds 10 min");
}

#[test]
fn criterion_04_decay_exponents() {
    let t0 = Instant::now();
    let (op, pair) = &*WIDE;
    let grid = op.grid();
    assert!(grid.d() / R0 >= 32.0);
    let center = (16.0, 16.0);
    let (r_lo, r_hi) = (4.0 * R0, grid.d() / 4.0);
    let phi_fit = fit_log_slope(
        &shell_average(pair.phi0.as_vector(), center),
        r_lo,
        r_hi,
    )
    .unwrap();
    let psi_fit = fit_log_slope(
        &shell_average(pair.psi0.as_vector(), center),
        r_lo,
        r_hi,
    )
    .unwrap();
    let elapsed = t0.elapsed().as_secs_f64();
    println!(
        "criterion 04 decay: phi0 slope {:.2} (window [-3.7, -2.3]), psi0 slope {:.2} (window [-2.7, -1.4]), {elapsed:.0}s",
        phi_fit.slope, psi_fit.slope
    );
    assert!(
        (-3.7..=-2.3).contains(&phi_fit.slope),
        "phi0 decay slope {:.3} outside [-3.7, -2.3]",
        phi_fit.slope
    );
    assert!(
        (-2.7..=-1.4).contains(&psi_fit.slope),
        "psi0 decay slope {:.3} outside [-2.7, -1.4]",
        psi_fit.slope
    );
}

#[test]
fn criterion_05_frame_scaling() {
    let t0 = Instant::now();
    let (op, pair) = &*WIDE;
    let center = (16.0, 16.0);
    let mut residuals = Vec::new();
    for l in [4.5, 9.0, 18.0] {
        let frame = build_localized_frame(pair, center, l).unwrap();
        let mut r = op
            .apply_linearization(&frame.phi_l)
            .unwrap()
            .into_vector();
        r.axpy(-pair.lambda, frame.phi_l.as_vector());
        residuals.push(r.l2_norm());
    }
    let r1 = residuals[1] / residuals[0];
    let r2 = residuals[2] / residuals[1];
    let elapsed = t0.elapsed().as_secs_f64();
    println!(
        "criterion 05 frame-scaling: per-doubling ratios {r1:.3}, {r2:.3} (window [0.5, 0.9]), {elapsed:.0}s"
    );
    for (i, r) in [r1, r2].iter().enumerate() {
        assert!(
            (0.5..=0.9).contains(r),
            "doubling {} ratio {r:.3} outside [0.5, 0.9]",
            i + 1
        );
    }
}

/// Quincunx two-vortex lattice with spacing 8 (box √2·8 per side).
fn two_vortex_lattice(spacing: f64) -> (Lattice, f64) {
    let a = spacing / std::f64::consts::SQRT_2;
    let lat = Lattice::new(a, vec![(0, 0), (1, 1)], (a / 2.0, a / 2.0), 0.0).unwrap();
    (lat, 2.0 * a)
}

#[test]
fn criterion_06_instability_index() {
    let t0 = Instant::now();
    let anchor = &*ANCHOR;
    let lambda1 = anchor.pair.lambda;
    let threshold = 0.5 * lambda1.re;
    let spec0 = VortexSpec::ring(AMP, R0, (0.0, 0.0));

    // #Ξ = 1 on the anchor box
    let c1 = count_unstable(&anchor.op, lambda1, threshold, 6).unwrap();
    assert!(c1.count >= 1, "#Xi = 1: count {}", c1.count);

    // #Ξ = 2: quincunx at spacing L* = 8
    let (lat2, d2) = two_vortex_lattice(8.0);
    let g2 = Grid::new(128, d2).unwrap();
    let st2 = assemble_multivortex(g2, &spec0, &lat2, NU, 0.0).unwrap();
    let op2 = OseenParams::from_state(&st2, Complex64::default());
    let c2 = count_unstable(&op2, lambda1, threshold, 8).unwrap();
    assert!(c2.count >= 2, "#Xi = 2: count {}", c2.count);

    // #Ξ = 4: square block at spacing 8
    let lat4 = Lattice::square_block(8.0, 2, (4.0, 4.0));
    let g4 = Grid::new(128, 16.0).unwrap();
    let st4 = assemble_multivortex(g4, &spec0, &lat4, NU, 0.0).unwrap();
    let op4 = OseenParams::from_state(&st4, Complex64::default());
    let c4 = count_unstable(&op4, lambda1, threshold, 12).unwrap();
    assert!(c4.count >= 4, "#Xi = 4: count {}", c4.count);

    // cluster radius about the single-vortex eigenvalue shrinks when the
    // two-vortex spacing doubles
    let radius = |counted: &mvlb_core::eigen::UnstableCount, lam: Complex64| -> f64 {
        counted
            .eigenvalues
            .iter()
            .map(|z| (z - lam).norm())
            .fold(0.0, f64::max)
    };
    let lam_q = QUINCUNX_PAIR.1.lambda;
    let rad_l = radius(&c2, lam_q);
    let (lat2w, d2w) = two_vortex_lattice(16.0);
    let g2w = Grid::new(256, d2w).unwrap();
    let st2w = assemble_multivortex(g2w, &spec0, &lat2w, NU, 0.0).unwrap();
    let op2w = OseenParams::from_state(&st2w, Complex64::default());
    let single_w = {
        let spec = VortexSpec::ring(AMP, R0, (d2w / 2.0, d2w / 2.0));
        let st = single_vortex_state(g2w, &spec, NU, 0.0).unwrap();
        let op = OseenParams::from_state(&st, Complex64::default());
        let rep = leading_spectrum(&op, &EigenRequest::rightmost(2, Some(lambda1))).unwrap();
        rep.pairs
            .into_iter()
            .max_by(|a, b| a.lambda.re.partial_cmp(&b.lambda.re).unwrap())
            .unwrap()
            .lambda
    };
    let c2w = count_unstable(&op2w, lambda1, threshold, 8).unwrap();
    let rad_2l = radius(&c2w, single_w);
    let elapsed = t0.elapsed().as_secs_f64();
    println!(
        "criterion 06 instability-index: counts ({}, {}, {}) for #Xi = (1, 2, 4); cluster radius {rad_l:.2e} -> {rad_2l:.2e} under L-doubling, {elapsed:.0}s",
        c1.count, c2.count, c4.count
    );
    assert!(
        rad_2l < rad_l,
        "cluster radius grew under L-doubling: {rad_l:.3e} -> {rad_2l:.3e}"
    );
    assert!(elapsed < 1800.0, "runtime {elapsed:.0}s exceeds 30 min");
}

#[test]
fn criterion_07_dichotomy_suite() {
    let t0 = Instant::now();
    let anchor = &*ANCHOR;
    let grid = anchor.op.grid();
    let center = (4.0, 4.0);
    let proj =
        MultiProjector::with_conjugate(&anchor.pair, center, &[center], f64::INFINITY, 4.5)
            .unwrap();
    // idempotency on random probes
    let mut worst_idem = 0.0f64;
    for k in 0..50u64 {
        let w = random_trig_field(grid, 500 + k);
        let pw = proj.apply(&w);
        let ppw = proj.apply(pw.as_vector());
        worst_idem = worst_idem
            .max(sub(ppw.as_vector(), pw.as_vector()).l2_norm() / w.l2_norm().max(1e-300));
    }
    assert!(worst_idem <= 1e-6, "idempotency defect {worst_idem:e}");

    // cross-center Gram entries vanish for disjoint frames (two-vortex
    // quincunx at spacing 8, cut radius 5 so the supports just separate)
    let (qop, qpair) = &*QUINCUNX_PAIR;
    let qd = qop.grid().d();
    let a = qd / 2.0;
    let centers = [(a / 2.0, a / 2.0), (3.0 * a / 2.0, 3.0 * a / 2.0)];
    let proj2 = MultiProjector::with_conjugate(
        qpair,
        (qd / 2.0, qd / 2.0),
        &centers,
        8.0,
        5.0,
    )
    .unwrap();
    let gram = proj2.gram();
    let rank = proj2.rank();
    let mut cross = 0.0f64;
    // frames are ordered center-major within each conjugate family
    let family = centers.len();
    for i in 0..rank {
        for j in 0..rank {
            let same_center = (i % family) == (j % family);
            let val = if i == j {
                (gram[(i, j)] - Complex64::ONE).norm()
            } else {
                gram[(i, j)].norm()
            };
            if !same_center {
                cross = cross.max(val);
            }
        }
    }
    assert!(
        cross <= 1e-3,
        "cross-center Gram entry {cross:e} above 1e-3"
    );

    // coupling norms decrease when the cut radius doubles
    let proj_small =
        MultiProjector::with_conjugate(&anchor.pair, center, &[center], f64::INFINITY, 2.2)
            .unwrap();
    let blocks_small = BlockOperator {
        op: &anchor.op,
        proj: &proj_small,
    };
    let blocks = BlockOperator {
        op: &anchor.op,
        proj: &proj,
    };
    let l12_small = blocks_small.l12_norm_probe(20, 11);
    let l12_big = blocks.l12_norm_probe(20, 11);
    let l21_small = blocks_small.l21_norm_probe(20, 13);
    let l21_big = blocks.l21_norm_probe(20, 13);
    assert!(
        l12_big < l12_small && l21_big < l21_small,
        "coupling norms did not decrease: L12 {l12_small:.3e} -> {l12_big:.3e}, L21 {l21_small:.3e} -> {l21_big:.3e}"
    );

    // Riccati reduction and the neutral block against the direct cluster
    let ric = riccati_neutral(&blocks, 1e-6, 25).unwrap();
    assert!(
        ric.residual <= 1e-6,
        "Riccati residual {:.3e} above 1e-6",
        ric.residual
    );
    let (_, rad) = ric.cluster();
    let tol = (1e-2f64).max(2.0 * rad);
    let mut worst_match = 0.0f64;
    for target in [anchor.pair.lambda, anchor.pair.lambda.conj()] {
        let best = ric
            .neutral_eigenvalues()
            .iter()
            .map(|z| (z - target).norm())
            .fold(f64::INFINITY, f64::min);
        worst_match = worst_match.max(best);
    }
    assert!(
        worst_match <= tol,
        "neutral block misses the direct cluster by {worst_match:.3e} (allowed {tol:.3e})"
    );
    let elapsed = t0.elapsed().as_secs_f64();
    println!(
        "criterion 07 dichotomy: idempotency {worst_idem:.1e}, cross-Gram {cross:.1e}, \
         L12 {l12_small:.2e}->{l12_big:.2e}, L21 {l21_small:.2e}->{l21_big:.2e}, \
         Riccati residual {:.1e}, neutral match {worst_match:.1e}, {elapsed:.0}s",
        ric.residual
    );
}

fn case2_config(plan_n: &[usize], seed: u64) -> ExperimentConfig {
    let mu = 0.05;
    let lam = ANCHOR.pair.lambda;
    ExperimentConfig {
        case: Case::EkmanII,
        vortex: VortexSpec::ring(AMP, R0, (0.0, 0.0)),
        nu: NU,
        mu,
        plan: case2_plan(plan_n, 8.0, R0).unwrap(),
        lambda_hint: Some((lam.re - mu, lam.im)),
        seed,
    }
}

#[test]
fn criterion_08_case2_scaling() {
    let t0 = Instant::now();
    let cfg = case2_config(&[1, 2, 4, 8], 0);
    let outcome = run_case2_scaling(&cfg).unwrap();
    let g1 = outcome.records[0].grashof;
    let mut additivity = 0.0f64;
    for r in &outcome.records {
        let expected = r.xi as f64 * g1;
        additivity = additivity.max((r.grashof - expected).abs() / expected);
        assert!(r.unstable_count >= r.xi, "#Xi = {}: count {}", r.xi, r.unstable_count);
    }
    let counts: Vec<usize> = outcome.records.iter().map(|r| r.unstable_count).collect();
    let mono = counts.windows(2).all(|w| w[1] >= w[0]);
    assert!(mono, "unstable count not monotone in #Xi: {counts:?}");
    let elapsed = t0.elapsed().as_secs_f64();
    println!(
        "criterion 08 case-II: slope {:.3} +/- {:.3} (target 1.0 +/- 0.2), G1 additivity {:.2}%, counts {counts:?}, {elapsed:.0}s",
        outcome.fit.slope,
        outcome.fit.half_width,
        100.0 * additivity
    );
    assert!(
        additivity <= 0.02,
        "G1 additivity defect {:.3}% above 2%",
        100.0 * additivity
    );
    assert!(
        (outcome.fit.slope - 1.0).abs() <= 0.2,
        "case-II slope {:.3} outside 1.0 +/- 0.2",
        outcome.fit.slope
    );
    assert!(elapsed < 3600.0, "runtime {elapsed:.0}s exceeds 60 min");
}

#[test]
fn criterion_09_case1_proxy_scaling() {
    let t0 = Instant::now();
    let lam = ANCHOR.pair.lambda;
    let cfg = ExperimentConfig {
        case: Case::TorusProxyI,
        vortex: VortexSpec::ring(AMP, R0, (0.0, 0.0)),
        nu: NU,
        mu: 0.0,
        plan: case1_plan(&[1, 2, 3], 8.0, R0),
        lambda_hint: Some((lam.re, lam.im)),
        seed: 0,
    };
    let outcome = run_case1_scaling(&cfg).unwrap();
    let g1 = outcome.records[0].grashof;
    for r in &outcome.records {
        let n = (r.xi as f64).sqrt();
        let expected = n.powi(3) * g1;
        let dev = (r.grashof - expected).abs() / expected;
        assert!(
            dev <= 0.10,
            "#Xi = {}: G deviates {:.1}% from the N^3 law",
            r.xi,
            100.0 * dev
        );
        assert!(r.unstable_count >= r.xi, "#Xi = {}: count {}", r.xi, r.unstable_count);
    }
    let counts: Vec<usize> = outcome.records.iter().map(|r| r.unstable_count).collect();
    let elapsed = t0.elapsed().as_secs_f64();
    println!(
        "criterion 09 case-I proxy: slope {:.3} +/- {:.3} (target 0.667 +/- 0.15), counts {counts:?}, {elapsed:.0}s",
        outcome.fit.slope, outcome.fit.half_width
    );
    assert!(
        (outcome.fit.slope - 2.0 / 3.0).abs() <= 0.15,
        "case-I slope {:.3} outside 2/3 +/- 0.15",
        outcome.fit.slope
    );
    assert!(elapsed < 5400.0, "runtime {elapsed:.0}s exceeds 90 min");
}

#[test]
fn criterion_10_determinism() {
    let t0 = Instant::now();
    let cfg = case2_config(&[1, 2, 4], 42);
    let first = run_case2_scaling(&cfg).unwrap();
    let second = run_case2_scaling(&cfg).unwrap();
    let strip = |records: &[mvlb_core::experiments::ExperimentRecord]| -> String {
        let mut rs = records.to_vec();
        for r in &mut rs {
            r.wall_time = 0.0;
        }
        serde_json::to_string(&rs).unwrap()
    };
    assert_eq!(
        strip(&first.records),
        strip(&second.records),
        "records differ between identical re-runs"
    );
    assert_eq!(config_hash(&cfg), first.records[0].config_hash);
    // a different seed only reshuffles probe noise; fitted slopes stay
    // within the reported confidence half-width
    let reseeded = run_case2_scaling(&case2_config(&[1, 2, 4], 43)).unwrap();
    let dslope = (reseeded.fit.slope - first.fit.slope).abs();
    let hw = first.fit.half_width.max(f64::EPSILON);
    assert!(
        dslope < hw.max(1e-12),
        "slope moved {dslope:.3e} across seeds (half-width {hw:.3e})"
    );
    let elapsed = t0.elapsed().as_secs_f64();
    println!(
        "criterion 10 determinism: identical records across re-runs, slope shift {dslope:.1e} < half-width, {elapsed:.0}s"
    );
}
