//! Command-line driver for the multi-vortex stability laboratory.
//!
//! Subcommands cover the full pipeline: locate an unstable vortex, tile it
//! into a lattice equilibrium, probe spectra and dichotomies, run the
//! scaling studies, and re-emit persisted records. Parameters come from
//! plain-text key=value config files, overridable with repeated
//! `--set key=value` flags.
//!
//! Exit codes: 0 success, 2 invalid configuration, 3 numerical
//! non-convergence, 4 I/O failure.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use mvlb_core::dichotomy::{
    hyperbolic_gap_probe, riccati_neutral, BlockOperator, DichotomyError, MultiProjector,
};
use mvlb_core::eigen::{
    adjoint_pair, find_unstable_vortex, leading_spectrum, EigenError, EigenRequest,
};
use mvlb_core::experiments::{
    case1_plan, case2_plan, config_hash, emit_csv, emit_json, emit_svg, read_json,
    run_case1_scaling, run_case2_scaling, run_l_sweep, Case, ExperimentConfig, ExperimentError,
    PlanEntry,
};
use mvlb_core::decay::fit_power_law;
use mvlb_core::grid::Grid;
use mvlb_core::oseen::OseenParams;
use mvlb_core::snapshot::{read_kv, write_kv, Snapshot, SnapshotError};
use mvlb_core::steady::{
    assemble_multivortex, grashof_case1, grashof_case2, single_vortex_state, Lattice,
    VortexFamily, VortexSpec,
};

#[derive(Parser)]
#[command(name = "mvlb", version, about = "Multi-vortex stability laboratory")]
struct Cli {
    /// Seed for all randomized probes.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output directory for snapshots, records, and plots.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Worker threads for data-parallel kernels (0 = library default).
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Single-vortex construction.
    Vortex {
        #[command(subcommand)]
        action: VortexCmd,
    },
    /// Multi-vortex equilibrium assembly.
    Multivortex {
        #[command(subcommand)]
        action: MultivortexCmd,
    },
    /// Leading eigenvalues of the linearization around a configured state.
    Spectrum {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Localized projector, block norms, Riccati reduction, and gap probe.
    Dichotomy {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Scaling studies: unstable count vs Grashof number.
    Scaling {
        #[arg(value_enum)]
        which: ScalingCase,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Frame diagnostics across a sweep of cut radii L.
    Lsweep {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Re-emit persisted JSON records as CSV, JSON, or an SVG plot.
    Report {
        /// Path to a JSON record array written by a study.
        #[arg(long)]
        records: PathBuf,
        #[arg(long, value_enum, default_value_t = ReportFormat::Csv)]
        format: ReportFormat,
    },
}

#[derive(Subcommand)]
enum VortexCmd {
    /// Bisect the smallest amplitude whose leading eigenvalue clears the
    /// instability margin; certify the eigenpair on the fine grid.
    Find {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
}

#[derive(Subcommand)]
enum MultivortexCmd {
    /// Assemble the lattice equilibrium and its forcing; persist both.
    Build {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ScalingCase {
    Case1,
    Case2,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Csv,
    Json,
    Svg,
}

#[derive(clap::Args)]
struct ConfigArgs {
    /// key=value config file; command-line --set entries override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one config key, e.g. --set nu=0.05 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
}

#[derive(Debug)]
enum CliError {
    Config(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "invalid config: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "i/o failure: {m}"),
        }
    }
}

impl From<EigenError> for CliError {
    fn from(e: EigenError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<DichotomyError> for CliError {
    fn from(e: DichotomyError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<mvlb_core::grid::GridError> for CliError {
    fn from(e: mvlb_core::grid::GridError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<mvlb_core::steady::SteadyError> for CliError {
    fn from(e: mvlb_core::steady::SteadyError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<SnapshotError> for CliError {
    fn from(e: SnapshotError) -> Self {
        match e {
            SnapshotError::Io(io) => CliError::Io(io.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Io { .. } => CliError::Io(e.to_string()),
            ExperimentError::InvalidConfig(_)
            | ExperimentError::UnsupportedLattice(_)
            | ExperimentError::Grid(_)
            | ExperimentError::Steady(_) => CliError::Config(e.to_string()),
            ExperimentError::Eigen(_)
            | ExperimentError::Oseen(_)
            | ExperimentError::Dichotomy(_)
            | ExperimentError::Fit(_) => CliError::Numerical(e.to_string()),
        }
    }
}

/// Merged key=value parameters with typed accessors.
struct Params {
    map: BTreeMap<String, String>,
}

impl Params {
    fn load(cfg: &ConfigArgs) -> Result<Params, CliError> {
        let mut map = match &cfg.config {
            Some(path) => read_kv(path)?,
            None => BTreeMap::new(),
        };
        for s in &cfg.sets {
            let Some((k, v)) = s.split_once('=') else {
                return Err(CliError::Config(format!(
                    "--set expects key=value, got {s:?}"
                )));
            };
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Params { map })
    }

    fn f64(&self, key: &str, default: f64) -> Result<f64, CliError> {
        match self.map.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| CliError::Config(format!("{key} = {v:?} is not a number"))),
        }
    }

    fn usize(&self, key: &str, default: usize) -> Result<usize, CliError> {
        match self.map.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| CliError::Config(format!("{key} = {v:?} is not an integer"))),
        }
    }

    fn list_usize(&self, key: &str, default: &[usize]) -> Result<Vec<usize>, CliError> {
        match self.map.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(|t| {
                    t.trim().parse().map_err(|_| {
                        CliError::Config(format!("{key} entry {t:?} is not an integer"))
                    })
                })
                .collect(),
        }
    }

    fn list_f64(&self, key: &str, default: &[f64]) -> Result<Vec<f64>, CliError> {
        match self.map.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse()
                        .map_err(|_| CliError::Config(format!("{key} entry {t:?} is not a number")))
                })
                .collect(),
        }
    }

    fn family(&self) -> Result<VortexFamily, CliError> {
        match self.map.get("family").map(String::as_str) {
            None | Some("ring") => Ok(VortexFamily::CounterRotatingRing),
            Some("bump") => Ok(VortexFamily::SmoothBump),
            Some(other) => Err(CliError::Config(format!(
                "family = {other:?}; expected ring or bump"
            ))),
        }
    }

    fn hint(&self) -> Result<Option<(f64, f64)>, CliError> {
        match (self.map.get("hint_re"), self.map.get("hint_im")) {
            (None, None) => Ok(None),
            (re, im) => {
                let re = re
                    .map(|v| v.parse::<f64>())
                    .transpose()
                    .map_err(|e| CliError::Config(format!("hint_re: {e}")))?
                    .unwrap_or(0.0);
                let im = im
                    .map(|v| v.parse::<f64>())
                    .transpose()
                    .map_err(|e| CliError::Config(format!("hint_im: {e}")))?
                    .unwrap_or(0.0);
                Ok(Some((re, im)))
            }
        }
    }

    /// Vortex amplitude: a number, or `auto` for a quick coarse search.
    fn amplitude(&self, r0: f64, nu: f64, mu: f64) -> Result<f64, CliError> {
        match self.map.get("amplitude").map(String::as_str) {
            None | Some("auto") => {
                let d = 8.0 * r0.max(1.0);
                let coarse = Grid::new(32, d)?;
                let fine = Grid::new(64, d)?;
                let (spec, _) =
                    find_unstable_vortex(self.family()?, r0, coarse, fine, (0.5, 8.0), nu, mu)?;
                Ok(spec.amplitude)
            }
            Some(v) => v
                .parse()
                .map_err(|_| CliError::Config(format!("amplitude = {v:?} is not a number"))),
        }
    }
}

fn ensure_out(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))
}

fn write_json_file(path: &Path, value: &serde_json::Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("json serializes");
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn cmd_vortex_find(p: &Params, seed: u64, out: &Path) -> Result<(), CliError> {
    let _ = seed;
    let r0 = p.f64("r0", 1.0)?;
    let nu = p.f64("nu", 0.05)?;
    let mu = p.f64("mu", 0.0)?;
    let d = p.f64("d", 16.0 * r0.max(0.5))?;
    let coarse = Grid::new(p.usize("coarse_n", 64)?, d)?;
    let fine = Grid::new(p.usize("n", 128)?, d)?;
    let a_lo = p.f64("a_lo", 0.5)?;
    let a_hi = p.f64("a_hi", 8.0)?;
    let (spec, pair) =
        find_unstable_vortex(p.family()?, r0, coarse, fine, (a_lo, a_hi), nu, mu)?;
    ensure_out(out)?;
    Snapshot::from_vector(pair.phi0.as_vector()).save(&out.join("vortex_phi0.mvlb"))?;
    Snapshot::from_vector(pair.psi0.as_vector()).save(&out.join("vortex_psi0.mvlb"))?;
    let mut kv = BTreeMap::new();
    kv.insert("family".into(), format!("{:?}", spec.family));
    kv.insert("amplitude".into(), format!("{}", spec.amplitude));
    kv.insert("r0".into(), format!("{r0}"));
    kv.insert("nu".into(), format!("{nu}"));
    kv.insert("mu".into(), format!("{mu}"));
    kv.insert("n".into(), format!("{}", fine.n()));
    kv.insert("d".into(), format!("{d}"));
    kv.insert("lambda_re".into(), format!("{}", pair.lambda.re));
    kv.insert("lambda_im".into(), format!("{}", pair.lambda.im));
    kv.insert("residual_direct".into(), format!("{}", pair.residuals.0));
    kv.insert("residual_adjoint".into(), format!("{}", pair.residuals.1));
    write_kv(&out.join("vortex.cfg"), &kv)?;
    println!(
        "amplitude {:.4}  lambda {:+.6e}{:+.6e}i  residuals ({:.2e}, {:.2e})",
        spec.amplitude, pair.lambda.re, pair.lambda.im, pair.residuals.0, pair.residuals.1
    );
    Ok(())
}

fn build_state(
    p: &Params,
) -> Result<(mvlb_core::steady::SteadyState, VortexSpec, usize), CliError> {
    let r0 = p.f64("r0", 1.0)?;
    let nu = p.f64("nu", 0.05)?;
    let mu = p.f64("mu", 0.0)?;
    let a = p.amplitude(r0, nu, mu)?;
    let nx = p.usize("nx", 1)?;
    let l = p.f64("l", 8.0)?;
    let d = p.f64("d", nx as f64 * l)?;
    let grid = Grid::new(p.usize("n", 128)?, d)?;
    let mut spec = VortexSpec {
        family: p.family()?,
        amplitude: a,
        core_radius: r0,
        center: (d / 2.0, d / 2.0),
    };
    if nx <= 1 {
        let st = single_vortex_state(grid, &spec, nu, mu)?;
        Ok((st, spec, 1))
    } else {
        let lat = Lattice::square_block(l, nx as i64, (l / 2.0, l / 2.0));
        spec.center = (0.0, 0.0);
        let st = assemble_multivortex(grid, &spec, &lat, nu, mu)?;
        Ok((st, spec, nx * nx))
    }
}

fn cmd_multivortex_build(p: &Params, out: &Path) -> Result<(), CliError> {
    let (st, spec, xi) = build_state(p)?;
    ensure_out(out)?;
    Snapshot::from_vector(st.velocity.as_vector()).save(&out.join("velocity.mvlb"))?;
    Snapshot::from_vector(st.forcing.as_vector()).save(&out.join("forcing.mvlb"))?;
    let d = st.velocity.grid().d();
    let mut kv = BTreeMap::new();
    kv.insert("family".into(), format!("{:?}", spec.family));
    kv.insert("amplitude".into(), format!("{}", spec.amplitude));
    kv.insert("r0".into(), format!("{}", spec.core_radius));
    kv.insert("nu".into(), format!("{}", st.nu));
    kv.insert("mu".into(), format!("{}", st.mu));
    kv.insert("xi".into(), format!("{xi}"));
    kv.insert("d".into(), format!("{d}"));
    kv.insert("residual".into(), format!("{}", st.residual));
    kv.insert(
        "grashof1".into(),
        format!("{}", grashof_case1(st.forcing.as_vector(), st.nu, d * d)),
    );
    if st.mu > 0.0 {
        kv.insert(
            "grashof2".into(),
            format!("{}", grashof_case2(st.forcing.as_vector(), st.mu, st.nu)),
        );
    }
    write_kv(&out.join("multivortex.cfg"), &kv)?;
    println!("assembled #Xi = {xi}, residual {:.3e}", st.residual);
    Ok(())
}

fn cmd_spectrum(p: &Params, out: &Path) -> Result<(), CliError> {
    let (st, _, _) = build_state(p)?;
    let op = OseenParams::from_state(&st, Complex64::default());
    let k = p.usize("k", 4)?;
    let hint = p.hint()?.map(|(re, im)| Complex64::new(re, im));
    let rep = leading_spectrum(&op, &EigenRequest::rightmost(k, hint))?;
    ensure_out(out)?;
    let eigs: Vec<serde_json::Value> = rep
        .pairs
        .iter()
        .map(|pr| {
            serde_json::json!({
                "re": pr.lambda.re,
                "im": pr.lambda.im,
                "residual": pr.residual,
            })
        })
        .collect();
    write_json_file(
        &out.join("spectrum.json"),
        &serde_json::json!({ "eigenvalues": eigs, "converged": rep.converged }),
    )?;
    for pr in &rep.pairs {
        println!(
            "lambda {:+.6e}{:+.6e}i  residual {:.2e}",
            pr.lambda.re, pr.lambda.im, pr.residual
        );
    }
    Ok(())
}

fn cmd_dichotomy(p: &Params, seed: u64, out: &Path) -> Result<(), CliError> {
    let (st, _, _) = build_state(p)?;
    let grid = st.velocity.grid();
    let center = (grid.d() / 2.0, grid.d() / 2.0);
    let op = OseenParams::from_state(&st, Complex64::default());
    let hint = p.hint()?.map(|(re, im)| Complex64::new(re, im));
    let rep = leading_spectrum(&op, &EigenRequest::rightmost(2, hint))?;
    let lead = rep
        .pairs
        .into_iter()
        .max_by(|a, b| a.lambda.re.partial_cmp(&b.lambda.re).unwrap())
        .ok_or_else(|| CliError::Numerical("no leading eigenpair".into()))?;
    let pair = adjoint_pair(&op, lead.lambda, &lead.phi)?;
    let l = p.f64("l", grid.d() / 2.2)?;
    let proj = MultiProjector::with_conjugate(&pair, center, &[center], f64::INFINITY, l)?;
    let blocks = BlockOperator {
        op: &op,
        proj: &proj,
    };
    let probes = p.usize("probes", 20)?;
    let l12 = blocks.l12_norm_probe(probes, seed ^ 0x12);
    let l21 = blocks.l21_norm_probe(probes, seed ^ 0x21);
    let ric = riccati_neutral(&blocks, p.f64("tol", 1e-6)?, p.usize("max_iters", 25)?)?;
    let (centroid, radius) = ric.cluster();
    let gap = hyperbolic_gap_probe(&blocks, 0.5 * pair.lambda.re.abs().max(1e-3), 8, seed ^ 0x9a);
    ensure_out(out)?;
    let neutral: Vec<String> = ric
        .neutral
        .iter()
        .map(|z| format!("{},{}", z.re, z.im))
        .collect();
    write_json_file(
        &out.join("dichotomy.json"),
        &serde_json::json!({
            "lambda": { "re": pair.lambda.re, "im": pair.lambda.im },
            "cut_radius": l,
            "rank": proj.rank(),
            "gram_deviation": proj.gram_deviation(),
            "l12_norm": l12,
            "l21_norm": l21,
            "riccati_residual": ric.residual,
            "riccati_iterations": ric.iterations,
            "neutral_block": neutral,
            "cluster_centroid": { "re": centroid.re, "im": centroid.im },
            "cluster_radius": radius,
            "gap_open": gap,
        }),
    )?;
    println!(
        "rank {}  gram dev {:.2e}  |L12| {:.3e}  |L21| {:.3e}  riccati {:.2e} in {} sweeps  gap {}",
        proj.rank(),
        proj.gram_deviation(),
        l12,
        l21,
        ric.residual,
        ric.iterations,
        if gap { "open" } else { "closed" }
    );
    Ok(())
}

fn scaling_config(
    p: &Params,
    case: Case,
    seed: u64,
) -> Result<ExperimentConfig, CliError> {
    let r0 = p.f64("r0", 1.0)?;
    let nu = p.f64("nu", 0.05)?;
    let mu = p.f64("mu", if case == Case::EkmanII { 0.05 } else { 0.0 })?;
    let a = p.amplitude(r0, nu, mu)?;
    let l = p.f64("l", 8.0)?;
    let plan = match case {
        Case::TorusProxyI => case1_plan(&p.list_usize("plan", &[1, 2, 3])?, l, r0),
        Case::EkmanII => case2_plan(&p.list_usize("plan", &[1, 2, 4, 8])?, l, r0)
            .map_err(CliError::from)?,
    };
    Ok(ExperimentConfig {
        case,
        vortex: VortexSpec {
            family: p.family()?,
            amplitude: a,
            core_radius: r0,
            center: (0.0, 0.0),
        },
        nu,
        mu,
        plan,
        lambda_hint: p.hint()?,
        seed,
    })
}

fn cmd_scaling(p: &Params, which: ScalingCase, seed: u64, out: &Path) -> Result<(), CliError> {
    let case = match which {
        ScalingCase::Case1 => Case::TorusProxyI,
        ScalingCase::Case2 => Case::EkmanII,
    };
    let cfg = scaling_config(p, case, seed)?;
    let outcome = match case {
        Case::TorusProxyI => run_case1_scaling(&cfg)?,
        Case::EkmanII => run_case2_scaling(&cfg)?,
    };
    ensure_out(out)?;
    emit_csv(&outcome.records, &out.join("records.csv"))?;
    emit_json(&outcome.records, &out.join("records.json"))?;
    emit_svg(&outcome.records, &outcome.fit, &out.join("scaling.svg"))?;
    for r in &outcome.records {
        println!(
            "#Xi {:>3}  G {:>12.4e}  count {:>3}  cluster radius {:.3e}",
            r.xi, r.grashof, r.unstable_count, r.cluster_radius
        );
    }
    println!(
        "slope {:.3} +/- {:.3}  (config {})",
        outcome.fit.slope,
        outcome.fit.half_width,
        &config_hash(&cfg)[..12]
    );
    Ok(())
}

fn cmd_lsweep(p: &Params, seed: u64, out: &Path) -> Result<(), CliError> {
    let r0 = p.f64("r0", 1.0)?;
    let nu = p.f64("nu", 0.05)?;
    let mu = p.f64("mu", 0.0)?;
    let a = p.amplitude(r0, nu, mu)?;
    let d = p.f64("d", 16.0)?;
    let n = p.usize("n", 128)?;
    let ls = p.list_f64("ls", &[d / 8.0, d / 4.0, d / 2.2])?;
    let plan: Vec<PlanEntry> = ls
        .iter()
        .map(|&l| PlanEntry {
            xi: 1,
            l,
            grid_n: n,
            box_d: d,
        })
        .collect();
    let cfg = ExperimentConfig {
        case: Case::TorusProxyI,
        vortex: VortexSpec {
            family: p.family()?,
            amplitude: a,
            core_radius: r0,
            center: (0.0, 0.0),
        },
        nu,
        mu,
        plan,
        lambda_hint: p.hint()?,
        seed,
    };
    let outcome = run_l_sweep(&cfg)?;
    ensure_out(out)?;
    emit_csv(&outcome.records, &out.join("lsweep.csv"))?;
    emit_json(&outcome.records, &out.join("lsweep.json"))?;
    for r in &outcome.records {
        println!(
            "L {:>6.2}  frame res {:.3e}  proj dist {:.3e}  |L12| {:.3e}  |L21| {:.3e}  radius {:.3e}",
            r.l,
            r.frame_residual.unwrap_or(f64::NAN),
            r.projector_distance.unwrap_or(f64::NAN),
            r.l12_norm.unwrap_or(f64::NAN),
            r.l21_norm.unwrap_or(f64::NAN),
            r.cluster_radius
        );
    }
    println!(
        "frame residual exponent {:.3} +/- {:.3}",
        outcome.frame_fit.slope, outcome.frame_fit.half_width
    );
    Ok(())
}

fn cmd_report(records: &Path, format: ReportFormat, out: &Path) -> Result<(), CliError> {
    let recs = read_json(records)?;
    if recs.is_empty() {
        return Err(CliError::Config(format!(
            "{}: no records",
            records.display()
        )));
    }
    ensure_out(out)?;
    match format {
        ReportFormat::Csv => emit_csv(&recs, &out.join("report.csv"))?,
        ReportFormat::Json => emit_json(&recs, &out.join("report.json"))?,
        ReportFormat::Svg => {
            // plot count vs Grashof when possible, frame residual vs L for
            // L-sweep records
            let scatter: Vec<(f64, f64)> = if recs.iter().any(|r| r.frame_residual.is_some()) {
                recs.iter()
                    .map(|r| (r.l, r.frame_residual.unwrap_or(0.0)))
                    .collect()
            } else {
                recs.iter()
                    .map(|r| (r.grashof, r.unstable_count as f64))
                    .collect()
            };
            let fit = fit_power_law(&scatter)
                .map_err(|e| CliError::Config(format!("cannot fit records: {e}")))?;
            emit_svg(&recs, &fit, &out.join("report.svg"))?;
        }
    }
    println!("wrote {} records", recs.len());
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    #[cfg(feature = "parallel")]
    if cli.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.workers)
            .build_global()
            .map_err(|e| CliError::Config(format!("workers: {e}")))?;
    }
    let out = cli.out.clone();
    match &cli.cmd {
        Cmd::Vortex {
            action: VortexCmd::Find { cfg },
        } => cmd_vortex_find(&Params::load(cfg)?, cli.seed, &out),
        Cmd::Multivortex {
            action: MultivortexCmd::Build { cfg },
        } => cmd_multivortex_build(&Params::load(cfg)?, &out),
        Cmd::Spectrum { cfg } => cmd_spectrum(&Params::load(cfg)?, &out),
        Cmd::Dichotomy { cfg } => cmd_dichotomy(&Params::load(cfg)?, cli.seed, &out),
        Cmd::Scaling { which, cfg } => cmd_scaling(&Params::load(cfg)?, *which, cli.seed, &out),
        Cmd::Lsweep { cfg } => cmd_lsweep(&Params::load(cfg)?, cli.seed, &out),
        Cmd::Report { records, format } => cmd_report(records, *format, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mvlb: {e}");
            ExitCode::from(e.code())
        }
    }
}
