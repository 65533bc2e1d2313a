//! End-to-end scaling studies: tile unstable vortices into lattices,
//! count unstable directions, and fit the growth of the count against the
//! Grashof numbers; plus the L-sweep diagnostic behind the localized-frame
//! construction, and report emission (CSV / JSON / SVG).

use std::path::Path;
use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::decay::{fit_power_law, DecayFit};
use crate::dichotomy::{
    hyperbolic_gap_probe, projector_distance, riccati_neutral, BlockOperator, DichotomyError,
    MultiProjector,
};
use crate::eigen::{
    adjoint_pair, count_unstable, leading_spectrum, EigenError, EigenRequest,
};
use crate::grid::{Grid, GridError};
use crate::oseen::{OseenError, OseenParams};
use crate::steady::{
    assemble_multivortex, grashof_case1, grashof_case2, single_vortex_state, Lattice, SteadyError,
    VortexSpec,
};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("unsupported lattice size {0}: need N or N/2 to be a perfect square")]
    UnsupportedLattice(usize),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Steady(#[from] SteadyError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error(transparent)]
    Oseen(#[from] OseenError),
    #[error(transparent)]
    Dichotomy(#[from] DichotomyError),
    #[error(transparent)]
    Fit(#[from] crate::decay::DecayError),
    #[error("writing {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// Which theorem-proxy a study reproduces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Case {
    /// Count vs G on a growing torus, #Ξ = N², box side ∝ N.
    #[serde(rename = "torus-proxy-I")]
    TorusProxyI,
    /// Count vs G₁ at fixed Ekman damping μ > 0, area ∝ N.
    #[serde(rename = "ekman-II")]
    EkmanII,
}

impl Case {
    pub fn name(self) -> &'static str {
        match self {
            Case::TorusProxyI => "torus-proxy-I",
            Case::EkmanII => "ekman-II",
        }
    }
}

/// One lattice geometry to run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanEntry {
    /// Number of vortices #Ξ.
    pub xi: usize,
    /// Lattice spacing (and frame scale) L.
    pub l: f64,
    /// Grid resolution n.
    pub grid_n: usize,
    /// Box side d.
    pub box_d: f64,
}

/// Full description of a study; hashing this yields the config hash
/// stamped into every record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub case: Case,
    /// The single-vortex template (its `center` field is ignored; centers
    /// come from the lattice plan).
    pub vortex: VortexSpec,
    pub nu: f64,
    pub mu: f64,
    pub plan: Vec<PlanEntry>,
    /// Eigenvalue hint for the single-vortex leading pair; `None` anchors
    /// it with a coarse dense solve.
    pub lambda_hint: Option<(f64, f64)>,
    pub seed: u64,
}

/// One scaling data point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub case: String,
    pub nu: f64,
    pub mu: f64,
    pub l: f64,
    pub xi: usize,
    pub box_d: f64,
    pub grid_n: usize,
    /// G (case I) or G₁ (case II).
    pub grashof: f64,
    pub unstable_count: usize,
    /// Upper-half-plane representatives of the counted eigenvalues,
    /// formatted `re+imi` and `;`-joined.
    pub leading: String,
    /// Spread of the counted cluster around the single-vortex eigenvalue.
    pub cluster_radius: f64,
    /// Frame residual ‖(A − λ)φ_L‖/‖φ_L‖ (L-sweep only).
    pub frame_residual: Option<f64>,
    /// Probe distance ‖Π_{Ξ,L} − Π₀‖ (L-sweep only).
    pub projector_distance: Option<f64>,
    /// Probe norm ‖(1−Π)𝓛Π‖ (L-sweep only).
    pub l12_norm: Option<f64>,
    /// Probe norm ‖Π𝓛(1−Π)‖ (L-sweep only).
    pub l21_norm: Option<f64>,
    /// Wall-clock seconds for this entry (excluded from determinism).
    pub wall_time: f64,
    pub config_hash: String,
}

/// Records plus the fitted log-log slope of count vs Grashof.
#[derive(Debug)]
pub struct StudyOutcome {
    pub records: Vec<ExperimentRecord>,
    pub fit: DecayFit,
    /// The single-vortex reference eigenvalue used for hints/thresholds.
    pub lambda_ref: Complex64,
}

/// SHA-256 of the canonical JSON serialization of the config.
pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let json = serde_json::to_string(cfg).expect("config serializes");
    let digest = Sha256::digest(json.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Resolution rule: at least 16 points across the 2r₀ vortex core and at
/// least 8 points per unit length, rounded up to the grid's power-of-two
/// size (minimum 32).
pub fn resolution_rule(box_d: f64, r0: f64) -> usize {
    let n = (8.0 * box_d / r0.min(1.0)).ceil() as usize;
    n.max(32).next_power_of_two()
}

/// Case-I plan: #Ξ = N², box side N·L.
pub fn case1_plan(n_values: &[usize], l: f64, r0: f64) -> Vec<PlanEntry> {
    n_values
        .iter()
        .map(|&n| {
            let d = n as f64 * l;
            PlanEntry {
                xi: n * n,
                l,
                grid_n: resolution_rule(d, r0),
                box_d: d,
            }
        })
        .collect()
}

/// Case-II plan: #Ξ = N, box area N·L².
pub fn case2_plan(n_values: &[usize], l: f64, r0: f64) -> Result<Vec<PlanEntry>, ExperimentError> {
    n_values
        .iter()
        .map(|&n| {
            let (_, d) = case2_lattice(n, l)?;
            Ok(PlanEntry {
                xi: n,
                l,
                grid_n: resolution_rule(d, r0),
                box_d: d,
            })
        })
        .collect()
}

/// Square-lattice arrangement for #Ξ = k² (spacing L, box kL).
fn case1_lattice(xi: usize, l: f64) -> Result<(Lattice, f64), ExperimentError> {
    let k = (xi as f64).sqrt().round() as usize;
    if k * k != xi {
        return Err(ExperimentError::UnsupportedLattice(xi));
    }
    let lat = Lattice::square_block(l, k as i64, (l / 2.0, l / 2.0));
    Ok((lat, k as f64 * l))
}

/// Constant-density arrangement with area #Ξ·L² and minimal spacing L:
/// a square block for #Ξ = k², a 45°-rotated (quincunx) block for
/// #Ξ = 2k².
fn case2_lattice(xi: usize, l: f64) -> Result<(Lattice, f64), ExperimentError> {
    let k = (xi as f64).sqrt().round() as usize;
    if k * k == xi {
        return case1_lattice(xi, l);
    }
    let k = ((xi / 2) as f64).sqrt().round() as usize;
    if 2 * k * k != xi {
        return Err(ExperimentError::UnsupportedLattice(xi));
    }
    let a = l / std::f64::consts::SQRT_2;
    let mut offsets = Vec::new();
    for i in 0..2 * k as i64 {
        for j in 0..2 * k as i64 {
            if (i + j) % 2 == 0 {
                offsets.push((i, j));
            }
        }
    }
    let lat = Lattice::new(a, offsets, (a / 2.0, a / 2.0), 0.0)?;
    Ok((lat, 2.0 * k as f64 * a))
}

/// Leading eigenvalue of the single template vortex on the given box,
/// anchored by a coarse dense solve when no hint is supplied.
pub fn reference_lambda(
    cfg: &ExperimentConfig,
    box_d: f64,
    grid_n: usize,
) -> Result<Complex64, ExperimentError> {
    let grid = Grid::new(grid_n, box_d)?;
    let mut spec_v = cfg.vortex;
    spec_v.center = (box_d / 2.0, box_d / 2.0);
    let hint = match cfg.lambda_hint {
        Some((re, im)) => Complex64::new(re, im),
        None => {
            let coarse = Grid::new(32, box_d)?;
            let st = single_vortex_state(coarse, &spec_v, cfg.nu, cfg.mu)?;
            let op = OseenParams::from_state(&st, Complex64::default());
            *crate::eigen::dense::spectrum(&op)
                .first()
                .ok_or_else(|| ExperimentError::InvalidConfig("empty coarse spectrum".into()))?
        }
    };
    let st = single_vortex_state(grid, &spec_v, cfg.nu, cfg.mu)?;
    let op = OseenParams::from_state(&st, Complex64::default());
    let rep = leading_spectrum(&op, &EigenRequest::rightmost(2, Some(hint)))?;
    rep.pairs
        .iter()
        .map(|p| p.lambda)
        .max_by(|a, b| a.re.partial_cmp(&b.re).unwrap())
        .ok_or(EigenError::NotConverged(0, 1))
        .map_err(ExperimentError::from)
}

fn format_eigenvalues(eigs: &[Complex64]) -> String {
    eigs.iter()
        .map(|z| format!("{:+.6e}{:+.6e}i", z.re, z.im))
        .collect::<Vec<_>>()
        .join(";")
}

fn cluster_radius(eigs: &[Complex64], reference: Complex64) -> f64 {
    eigs.iter()
        .map(|z| (z - reference).norm())
        .fold(0.0, f64::max)
}

fn run_scaling(cfg: &ExperimentConfig) -> Result<StudyOutcome, ExperimentError> {
    if cfg.plan.is_empty() {
        return Err(ExperimentError::InvalidConfig("empty plan".into()));
    }
    match cfg.case {
        Case::TorusProxyI if cfg.mu != 0.0 => {
            return Err(ExperimentError::InvalidConfig(
                "case I runs without Ekman damping (μ = 0)".into(),
            ));
        }
        Case::EkmanII if cfg.mu <= 0.0 => {
            return Err(ExperimentError::InvalidConfig(
                "case II requires μ > 0".into(),
            ));
        }
        _ => {}
    }
    // validate every lattice before any heavy compute
    for e in &cfg.plan {
        let (lat, d) = match cfg.case {
            Case::TorusProxyI => case1_lattice(e.xi, e.l)?,
            Case::EkmanII => case2_lattice(e.xi, e.l)?,
        };
        if (d - e.box_d).abs() > 1e-9 * d {
            return Err(ExperimentError::InvalidConfig(format!(
                "plan entry #Ξ = {} expects box {d}, got {}",
                e.xi, e.box_d
            )));
        }
        let _ = lat.centers();
        Grid::new(e.grid_n, e.box_d)?;
    }
    let hash = config_hash(cfg);
    let first = cfg.plan[0];
    let lambda_ref = reference_lambda(cfg, first.box_d, first.grid_n)?;
    let threshold = 0.5 * lambda_ref.re;
    if threshold <= 0.0 {
        return Err(ExperimentError::InvalidConfig(format!(
            "template vortex is not unstable: λ = {lambda_ref}"
        )));
    }
    let mut records = Vec::new();
    for e in &cfg.plan {
        let t0 = Instant::now();
        let (lat, _) = match cfg.case {
            Case::TorusProxyI => case1_lattice(e.xi, e.l)?,
            Case::EkmanII => case2_lattice(e.xi, e.l)?,
        };
        let grid = Grid::new(e.grid_n, e.box_d)?;
        let state = assemble_multivortex(grid, &cfg.vortex, &lat, cfg.nu, cfg.mu)?;
        let op = OseenParams::from_state(&state, Complex64::default());
        let counted = count_unstable(&op, lambda_ref, threshold, 2 * e.xi + 4)?;
        let grashof = match cfg.case {
            Case::TorusProxyI => {
                grashof_case1(&state.forcing, cfg.nu, e.box_d * e.box_d)
            }
            Case::EkmanII => grashof_case2(&state.forcing, cfg.mu, cfg.nu),
        };
        records.push(ExperimentRecord {
            case: cfg.case.name().to_string(),
            nu: cfg.nu,
            mu: cfg.mu,
            l: e.l,
            xi: e.xi,
            box_d: e.box_d,
            grid_n: e.grid_n,
            grashof,
            unstable_count: counted.count,
            leading: format_eigenvalues(&counted.eigenvalues),
            cluster_radius: cluster_radius(&counted.eigenvalues, lambda_ref),
            frame_residual: None,
            projector_distance: None,
            l12_norm: None,
            l21_norm: None,
            wall_time: t0.elapsed().as_secs_f64(),
            config_hash: hash.clone(),
        });
    }
    let pts: Vec<(f64, f64)> = records
        .iter()
        .map(|r| (r.grashof, r.unstable_count as f64))
        .collect();
    let fit = fit_power_law(&pts)?;
    Ok(StudyOutcome {
        records,
        fit,
        lambda_ref,
    })
}

/// Case-I proxy study: unstable count vs G over square lattices #Ξ = N²
/// on boxes of side N·L.
pub fn run_case1_scaling(cfg: &ExperimentConfig) -> Result<StudyOutcome, ExperimentError> {
    if cfg.case != Case::TorusProxyI {
        return Err(ExperimentError::InvalidConfig(
            "run_case1_scaling requires case torus-proxy-I".into(),
        ));
    }
    run_scaling(cfg)
}

/// Case-II study: unstable count vs G₁ over constant-density lattices
/// #Ξ = N at fixed μ > 0.
pub fn run_case2_scaling(cfg: &ExperimentConfig) -> Result<StudyOutcome, ExperimentError> {
    if cfg.case != Case::EkmanII {
        return Err(ExperimentError::InvalidConfig(
            "run_case2_scaling requires case ekman-II".into(),
        ));
    }
    run_scaling(cfg)
}

/// Per-L frame diagnostics on a fixed single-vortex box: frame residual,
/// projector distance, coupling norms, neutral cluster radius, and the
/// gap probe.
pub struct LSweepOutcome {
    pub records: Vec<ExperimentRecord>,
    /// Fitted exponent of the frame residual against L.
    pub frame_fit: DecayFit,
    pub lambda_ref: Complex64,
}

/// Run the L-sweep: every plan entry must share one geometry (xi = 1) and
/// vary only `l`.
pub fn run_l_sweep(cfg: &ExperimentConfig) -> Result<LSweepOutcome, ExperimentError> {
    if cfg.plan.is_empty() {
        return Err(ExperimentError::InvalidConfig("empty plan".into()));
    }
    if cfg.plan.iter().any(|e| e.xi != 1) {
        return Err(ExperimentError::InvalidConfig(
            "the L-sweep varies the cut radius around one vortex (#Ξ = 1)".into(),
        ));
    }
    let first = cfg.plan[0];
    if cfg
        .plan
        .iter()
        .any(|e| e.grid_n != first.grid_n || e.box_d != first.box_d)
    {
        return Err(ExperimentError::InvalidConfig(
            "L-sweep entries must share one grid and box".into(),
        ));
    }
    let hash = config_hash(cfg);
    let grid = Grid::new(first.grid_n, first.box_d)?;
    let center = (first.box_d / 2.0, first.box_d / 2.0);
    let mut spec_v = cfg.vortex;
    spec_v.center = center;
    let lambda_ref = reference_lambda(cfg, first.box_d, first.grid_n)?;
    let st = single_vortex_state(grid, &spec_v, cfg.nu, cfg.mu)?;
    let op = OseenParams::from_state(&st, Complex64::default());
    let rep = leading_spectrum(&op, &EigenRequest::rightmost(2, Some(lambda_ref)))?;
    let lead = rep
        .pairs
        .into_iter()
        .max_by(|a, b| a.lambda.re.partial_cmp(&b.lambda.re).unwrap())
        .ok_or(EigenError::NotConverged(0, 1))?;
    let pair = adjoint_pair(&op, lead.lambda, &lead.phi)?;
    let mut records = Vec::new();
    for e in &cfg.plan {
        let t0 = Instant::now();
        let proj = MultiProjector::with_conjugate(&pair, center, &[center], f64::INFINITY, e.l)?;
        let frame = &proj.frames()[0];
        let mut res = op.apply_raw(frame.phi_l.as_vector()).into_vector();
        res.axpy(-pair.lambda, frame.phi_l.as_vector());
        let frame_residual = res.l2_norm() / frame.phi_l.l2_norm().max(1e-300);
        let dist = projector_distance(&proj, &pair, 8, cfg.seed);
        let blocks = BlockOperator {
            op: &op,
            proj: &proj,
        };
        let l12 = blocks.l12_norm_probe(20, cfg.seed ^ 0x12);
        let l21 = blocks.l21_norm_probe(20, cfg.seed ^ 0x21);
        let ric = riccati_neutral(&blocks, 1e-6, 25)?;
        let eigs = ric.neutral_eigenvalues();
        let radius = eigs
            .iter()
            .map(|z| (z - pair.lambda).norm().min((z - pair.lambda.conj()).norm()))
            .fold(0.0, f64::max);
        let gap_open = hyperbolic_gap_probe(&blocks, 0.5 * pair.lambda.re, 8, cfg.seed ^ 0x9a);
        records.push(ExperimentRecord {
            case: "l-sweep".to_string(),
            nu: cfg.nu,
            mu: cfg.mu,
            l: e.l,
            xi: 1,
            box_d: e.box_d,
            grid_n: e.grid_n,
            grashof: grashof_case1(&st.forcing, cfg.nu, first.box_d * first.box_d),
            unstable_count: if gap_open { 2 } else { 0 },
            leading: format_eigenvalues(&eigs),
            cluster_radius: radius,
            frame_residual: Some(frame_residual),
            projector_distance: Some(dist),
            l12_norm: Some(l12),
            l21_norm: Some(l21),
            wall_time: t0.elapsed().as_secs_f64(),
            config_hash: hash.clone(),
        });
    }
    let pts: Vec<(f64, f64)> = records
        .iter()
        .map(|r| (r.l, r.frame_residual.unwrap_or(0.0)))
        .collect();
    let frame_fit = fit_power_law(&pts)?;
    Ok(LSweepOutcome {
        records,
        frame_fit,
        lambda_ref: pair.lambda,
    })
}

/// Write records as CSV (one header row, stable column order).
pub fn emit_csv(records: &[ExperimentRecord], path: &Path) -> Result<(), ExperimentError> {
    let io_err = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(source) => ExperimentError::Io {
            path: path.display().to_string(),
            source,
        },
        other => ExperimentError::Io {
            path: path.display().to_string(),
            source: std::io::Error::other(format!("{other:?}")),
        },
    };
    let mut w = csv::Writer::from_path(path).map_err(io_err)?;
    for r in records {
        w.serialize(r).map_err(io_err)?;
    }
    w.flush().map_err(|source| ExperimentError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(())
}

/// Write records as a JSON array.
pub fn emit_json(records: &[ExperimentRecord], path: &Path) -> Result<(), ExperimentError> {
    let json = serde_json::to_string_pretty(records).expect("records serialize");
    std::fs::write(path, json).map_err(|source| ExperimentError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Read back a JSON record array.
pub fn read_json(path: &Path) -> Result<Vec<ExperimentRecord>, ExperimentError> {
    let text = std::fs::read_to_string(path).map_err(|source| ExperimentError::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text)
        .map_err(|e| ExperimentError::InvalidConfig(format!("parsing {}: {e}", path.display())))
}

/// Emit a log-log SVG scatter of count vs Grashof with the fitted line
/// and a slope annotation (3 decimals).
pub fn emit_svg(
    records: &[ExperimentRecord],
    fit: &DecayFit,
    path: &Path,
) -> Result<(), ExperimentError> {
    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.grashof > 0.0 && r.unstable_count > 0)
        .map(|r| (r.grashof.ln(), (r.unstable_count as f64).ln()))
        .collect();
    let (w, h, m) = (480.0, 360.0, 48.0);
    let xmin = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let xmax = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let ymin = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let ymax = pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let sx = |x: f64| {
        if xmax > xmin {
            m + (x - xmin) / (xmax - xmin) * (w - 2.0 * m)
        } else {
            w / 2.0
        }
    };
    let sy = |y: f64| {
        if ymax > ymin {
            h - m - (y - ymin) / (ymax - ymin) * (h - 2.0 * m)
        } else {
            h / 2.0
        }
    };
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
    ));
    svg.push_str(&format!(
        "  <rect x=\"0\" y=\"0\" width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n"
    ));
    if !pts.is_empty() {
        let (x0, x1) = (xmin, xmax);
        let (y0, y1) = (fit.intercept + fit.slope * x0, fit.intercept + fit.slope * x1);
        svg.push_str(&format!(
            "  <line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"steelblue\" stroke-width=\"2\"/>\n",
            sx(x0), sy(y0), sx(x1), sy(y1)
        ));
        for (x, y) in &pts {
            svg.push_str(&format!(
                "  <circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"crimson\"/>\n",
                sx(*x),
                sy(*y)
            ));
        }
    }
    svg.push_str(&format!(
        "  <text x=\"{:.0}\" y=\"{:.0}\" font-family=\"monospace\" font-size=\"14\">slope {:.3} ± {:.3}</text>\n",
        m,
        m - 12.0,
        fit.slope,
        fit.half_width
    ));
    svg.push_str(&format!(
        "  <text x=\"{:.0}\" y=\"{:.0}\" font-family=\"monospace\" font-size=\"12\">log count vs log Grashof</text>\n",
        m,
        h - 8.0
    ));
    svg.push_str("</svg>\n");
    std::fs::write(path, svg).map_err(|source| ExperimentError::Io {
        path: path.display().to_string(),
        source,
    })
}
