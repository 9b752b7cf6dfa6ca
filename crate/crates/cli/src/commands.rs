use std::path::{Path, PathBuf};

use pbb_core::bright::bright_state_curves;
use pbb_core::classical::{
    intuitive_photon_number, neoclassical_roots, semiclassical_roots, trace_boundary_with, Theory,
};
use pbb_core::mcwf::{
    ensemble_mean, master_equation_evolve, run_ensemble, DensityMatrix, EnsembleError,
    TrajectoryRecord, TrajectorySettings,
};
use pbb_core::telegraph::{find_half_filling, summarize, ReferenceLevels, TelegraphSummary};
use pbb_core::{Execution, PureState, SystemParams};

use crate::config::{ReferenceChoice, RunConfig};
use crate::error::CliError;
use crate::output::{
    fmt, fmt_opt, read_trajectory, trajectory_files, write_table, write_trajectory, Metadata, Table,
};

pub struct Context {
    pub config: RunConfig,
    pub exec: Execution,
}

impl Context {
    fn out(&self, name: &str) -> PathBuf {
        Path::new(&self.config.output.dir).join(name)
    }

    fn meta<'a>(&'a self, command: &'a str) -> Metadata<'a> {
        Metadata::new(command, &self.config)
    }
}

fn config_error(field: &str, message: impl Into<String>) -> CliError {
    CliError::Config {
        field: field.into(),
        message: message.into(),
    }
}

pub const ROOTS_HEADER: [&str; 8] = [
    "theory",
    "delta",
    "eta",
    "root",
    "class",
    "residual",
    "slope",
    "empty_cavity",
];

/// Steady-state photon numbers of each theory over the drive sweep, one
/// row per root.
pub fn classical_roots(ctx: &Context) -> Result<PathBuf, CliError> {
    let cfg = &ctx.config;
    let theories = cfg.theories()?;
    let base = cfg.system_params();
    let mut rows = Vec::new();
    for delta in cfg.deltas() {
        for &eta in &cfg.sweep.etas {
            let p = base.with_delta(delta).with_eta(eta);
            for &theory in &theories {
                let set = match theory {
                    Theory::Semiclassical => semiclassical_roots(&p),
                    Theory::Neoclassical => neoclassical_roots(&p),
                    Theory::Intuitive => intuitive_photon_number(&p),
                }
                .map_err(|e| match e {
                    pbb_core::Error::InvalidParams {
                        field: "delta",
                        reason,
                    } => config_error("sweep.deltas", format!("{theory:?}: {reason}")),
                    other => other.into(),
                })?;
                for r in &set.roots {
                    rows.push(vec![
                        theory.name().to_string(),
                        fmt(delta),
                        fmt(eta),
                        fmt(r.n),
                        r.class.name().to_string(),
                        fmt(r.residual),
                        fmt(r.slope),
                        fmt(p.empty_cavity_photons()),
                    ]);
                }
            }
        }
    }
    let path = ctx.out("classical_roots.csv");
    write_table(&path, &ctx.meta("classical-roots"), &ROOTS_HEADER, &rows)?;
    Ok(path)
}

pub const BOUNDARY_HEADER: [&str; 8] = [
    "theory",
    "g",
    "gamma",
    "gamma_c",
    "delta",
    "eta_lower",
    "eta_upper",
    "width",
];

/// Bistable window per theory, decay rate and detuning. Detunings without
/// a window keep their row with empty boundary cells.
pub fn boundary(ctx: &Context) -> Result<PathBuf, CliError> {
    let cfg = &ctx.config;
    let theories = cfg.theories()?;
    let mut deltas = cfg.deltas();
    if deltas.iter().any(|&d| !(d > 0.0)) {
        return Err(config_error(
            "sweep.deltas",
            "boundary tracing needs positive detunings",
        ));
    }
    deltas.sort_by(f64::total_cmp);
    deltas.dedup();
    let mut rows = Vec::new();
    for &theory in &theories {
        for gamma in cfg.gammas() {
            let base = cfg.system_params().with_gamma(gamma);
            let curve = trace_boundary_with(ctx.exec, theory, &base, &deltas)?;
            for &delta in &deltas {
                let w = curve.at(delta);
                rows.push(vec![
                    theory.name().to_string(),
                    fmt(base.g),
                    fmt(gamma),
                    fmt(base.gamma_c),
                    fmt(delta),
                    fmt_opt(w.map(|w| w.eta_lower)),
                    fmt_opt(w.map(|w| w.eta_upper)),
                    fmt_opt(w.map(|w| w.eta_upper - w.eta_lower)),
                ]);
            }
        }
    }
    let path = ctx.out("boundary.csv");
    write_table(&path, &ctx.meta("boundary"), &BOUNDARY_HEADER, &rows)?;
    Ok(path)
}

pub const SUMMARY_HEADER: [&str; 30] = [
    "source",
    "delta",
    "eta",
    "gamma",
    "n_max",
    "trajectories",
    "failed",
    "status",
    "ref_dim",
    "ref_bright",
    "records_used",
    "filling_factor",
    "analyzed_time",
    "bright_time",
    "transient_cut",
    "n_bright",
    "n_dim",
    "pseudospin_bright",
    "pseudospin_bright_stderr",
    "pseudospin_dim",
    "mutual_info_bright",
    "mutual_info_dim",
    "mandel_q_bright",
    "mandel_q_dim",
    "dwell_bright_count",
    "dwell_bright_mean",
    "dwell_dim_count",
    "dwell_dim_mean",
    "empty_cavity",
    "neo_bistable",
];

/// Telegraph statistics of one ensemble, or why there are none.
pub struct Analysis {
    pub refs: Option<ReferenceLevels>,
    pub summary: Option<TelegraphSummary>,
    pub status: &'static str,
}

/// Reference levels and conditional statistics for a set of records that
/// share their parameters. Recoverable shortfalls (no neoclassical window
/// to take references from, signals too short) are reported in `status`.
pub fn analyze_records(
    cfg: &RunConfig,
    params: &SystemParams,
    records: &[TrajectoryRecord],
    exec: Execution,
) -> Result<Analysis, CliError> {
    if records.is_empty() {
        return Ok(Analysis {
            refs: None,
            summary: None,
            status: "no_records",
        });
    }
    let refs = match cfg.analysis.references {
        ReferenceChoice::Neoclassical => ReferenceLevels::neoclassical(params).ok(),
        ReferenceChoice::Quantiles => {
            let pooled: Vec<f64> = records.iter().flat_map(|r| r.photon_signal()).collect();
            ReferenceLevels::from_quantiles(
                &pooled,
                cfg.analysis.quantile_lo,
                cfg.analysis.quantile_hi,
            )
            .ok()
        }
    };
    let Some(refs) = refs else {
        return Ok(Analysis {
            refs: None,
            summary: None,
            status: "no_reference_levels",
        });
    };
    match summarize(records, refs, &cfg.summary_options(), exec) {
        Ok(s) => Ok(Analysis {
            refs: Some(refs),
            summary: Some(s),
            status: "ok",
        }),
        Err(pbb_core::Error::InsufficientSignal { .. }) => Ok(Analysis {
            refs: Some(refs),
            summary: None,
            status: "insufficient_signal",
        }),
        Err(e) => Err(e.into()),
    }
}

fn summary_row(
    source: &str,
    params: &SystemParams,
    n_max: usize,
    trajectories: usize,
    failed: usize,
    a: &Analysis,
) -> Vec<String> {
    let s = a.summary.as_ref();
    let neo = neoclassical_roots(params)
        .map(|r| r.is_bistable())
        .unwrap_or(false);
    vec![
        source.to_string(),
        fmt(params.delta),
        fmt(params.eta),
        fmt(params.gamma),
        n_max.to_string(),
        trajectories.to_string(),
        failed.to_string(),
        a.status.to_string(),
        fmt_opt(a.refs.map(|r| r.dim)),
        fmt_opt(a.refs.map(|r| r.bright)),
        s.map(|s| s.records_used.to_string()).unwrap_or_default(),
        fmt_opt(s.map(|s| s.filling_factor)),
        fmt_opt(s.map(|s| s.analyzed_time)),
        fmt_opt(s.map(|s| s.bright_time)),
        fmt_opt(s.map(|s| s.transient_cut)),
        fmt_opt(s.and_then(|s| s.n_bright)),
        fmt_opt(s.and_then(|s| s.n_dim)),
        fmt_opt(s.and_then(|s| s.pseudospin_bright)),
        fmt_opt(s.and_then(|s| s.pseudospin_bright_stderr)),
        fmt_opt(s.and_then(|s| s.pseudospin_dim)),
        fmt_opt(s.and_then(|s| s.mutual_info_bright)),
        fmt_opt(s.and_then(|s| s.mutual_info_dim)),
        fmt_opt(s.and_then(|s| s.mandel_q_bright)),
        fmt_opt(s.and_then(|s| s.mandel_q_dim)),
        s.map(|s| s.dwell_bright.count.to_string())
            .unwrap_or_default(),
        fmt_opt(s.and_then(|s| s.dwell_bright.mean)),
        s.map(|s| s.dwell_dim.count.to_string()).unwrap_or_default(),
        fmt_opt(s.and_then(|s| s.dwell_dim.mean)),
        fmt(params.empty_cavity_photons()),
        neo.to_string(),
    ]
}

pub const MEANS_HEADER: [&str; 9] = [
    "delta",
    "eta",
    "t",
    "n_mean",
    "n_stderr",
    "sigma_z_mean",
    "sigma_z_stderr",
    "master_n",
    "master_sigma_z",
];

pub const FAILURES_HEADER: [&str; 5] = ["delta", "eta", "index", "seed", "error"];

pub const HALF_FILLING_HEADER: [&str; 6] = [
    "delta",
    "eta",
    "filling",
    "converged",
    "evaluations",
    "history",
];

#[derive(Default)]
struct EnsembleTables {
    summary: Vec<Vec<String>>,
    means: Vec<Vec<String>>,
    failures: Vec<Vec<String>>,
    half_filling: Vec<Vec<String>>,
    failed: usize,
    total: usize,
}

type Indexed<T> = Vec<(usize, T)>;

fn point_dir(delta: f64, eta: f64) -> String {
    format!("d{}_e{}", fmt(delta), fmt(eta))
}

/// One ensemble at `(delta, eta)`: trajectories, their files, ensemble
/// means and the telegraph summary. Returns the filling factor when the
/// signal could be analyzed.
fn run_point(
    ctx: &Context,
    delta: f64,
    eta: f64,
    tables: &mut EnsembleTables,
) -> Result<Option<f64>, CliError> {
    let cfg = &ctx.config;
    let t = &cfg.trajectory;
    let params = cfg.system_params().with_delta(delta).with_eta(eta);
    let n_max = t.n_max.unwrap_or_else(|| params.default_n_max());
    let settings = TrajectorySettings::new(t.t_final, t.dt_out)
        .with_tolerances(cfg.tolerances())
        .with_snapshots(t.store_snapshots);
    let initial = PureState::ground(n_max);

    let (records, failures): (Indexed<TrajectoryRecord>, Indexed<pbb_core::Error>) =
        match run_ensemble(
            &initial,
            &params,
            &settings,
            t.n_trajectories,
            t.base_seed,
            ctx.exec,
        ) {
            Ok(r) => (r.into_iter().enumerate().collect(), Vec::new()),
            Err(EnsembleError::Failed { failures, partial }) => (
                partial
                    .into_iter()
                    .enumerate()
                    .filter_map(|(i, r)| r.map(|r| (i, r)))
                    .collect(),
                failures,
            ),
            Err(EnsembleError::Setup(e)) => return Err(e.into()),
            Err(EnsembleError::Empty) => {
                return Err(config_error(
                    "trajectory.n_trajectories",
                    "must be at least 1",
                ))
            }
        };
    tables.total += t.n_trajectories;
    tables.failed += failures.len();
    for (i, e) in &failures {
        tables.failures.push(vec![
            fmt(delta),
            fmt(eta),
            i.to_string(),
            t.base_seed.wrapping_add(*i as u64).to_string(),
            e.to_string(),
        ]);
    }

    let dir_name = point_dir(delta, eta);
    if t.write_trajectories {
        let dir = ctx.out("trajectories").join(&dir_name);
        for (i, r) in &records {
            write_trajectory(&dir, *i, r, cfg)?;
        }
    }

    let records: Vec<TrajectoryRecord> = records.into_iter().map(|(_, r)| r).collect();
    let n = ensemble_mean(&records, |s| s.obs.n_mean);
    let sz = ensemble_mean(&records, |s| s.obs.sigma_z_mean);
    let master = if t.master_check {
        Some(master_equation_evolve(
            &DensityMatrix::ground(n_max),
            &params,
            t.t_final,
            t.dt_out,
        )?)
    } else {
        None
    };
    for (k, (a, b)) in n.iter().zip(&sz).enumerate() {
        let m = master.as_ref().and_then(|m| m.samples.get(k));
        tables.means.push(vec![
            fmt(delta),
            fmt(eta),
            fmt(a.0),
            fmt(a.1),
            fmt(a.2),
            fmt(b.1),
            fmt(b.2),
            fmt_opt(m.map(|m| m.obs.n_mean)),
            fmt_opt(m.map(|m| m.obs.sigma_z_mean)),
        ]);
    }

    let analysis = analyze_records(cfg, &params, &records, ctx.exec)?;
    tables.summary.push(summary_row(
        &dir_name,
        &params,
        n_max,
        t.n_trajectories,
        failures.len(),
        &analysis,
    ));
    Ok(analysis.summary.map(|s| s.filling_factor))
}

fn ensemble_body(ctx: &Context, tables: &mut EnsembleTables) -> Result<(), CliError> {
    let cfg = &ctx.config;
    for delta in cfg.deltas() {
        if cfg.sweep.half_filling {
            let search = cfg.half_filling_search()?;
            let found = find_half_filling(&search, |eta| {
                run_point(ctx, delta, eta, tables)
                    .map_err(|e| match e {
                        CliError::Core(e) => e,
                        other => pbb_core::Error::InvalidArgument(other.to_string()),
                    })?
                    .ok_or_else(|| {
                        pbb_core::Error::InvalidArgument(format!(
                            "no filling factor at eta = {eta}; see summary.csv status"
                        ))
                    })
            })?;
            let history: Vec<String> = found
                .history
                .iter()
                .map(|(e, f)| format!("{}:{}", fmt(*e), fmt(*f)))
                .collect();
            tables.half_filling.push(vec![
                fmt(delta),
                fmt(found.eta),
                fmt(found.filling),
                found.converged.to_string(),
                found.history.len().to_string(),
                history.join(" "),
            ]);
        } else {
            for eta in cfg.etas() {
                run_point(ctx, delta, eta, tables)?;
            }
        }
    }
    Ok(())
}

/// Trajectory ensembles over the sweep (or a half-filling search per
/// detuning), with per-trajectory files and summary tables. Tables are
/// written even when a trajectory or the search fails part way.
pub fn ensemble(ctx: &Context) -> Result<Vec<PathBuf>, CliError> {
    let cfg = &ctx.config;
    if cfg.params.gamma_c != 0.0 {
        return Err(config_error(
            "params.gamma_c",
            "trajectories have no dephasing channel; set gamma_c = 0",
        ));
    }
    if cfg.analysis.mutual_information && !cfg.trajectory.store_snapshots {
        return Err(config_error(
            "analysis.mutual_information",
            "needs trajectory.store_snapshots = true",
        ));
    }
    if cfg.sweep.half_filling {
        cfg.half_filling_search()?;
    }

    let mut tables = EnsembleTables::default();
    let outcome = ensemble_body(ctx, &mut tables);

    let meta = ctx.meta("ensemble");
    let mut written = vec![
        ctx.out("summary.csv"),
        ctx.out("means.csv"),
        ctx.out("failures.csv"),
    ];
    write_table(&written[0], &meta, &SUMMARY_HEADER, &tables.summary)?;
    write_table(&written[1], &meta, &MEANS_HEADER, &tables.means)?;
    write_table(&written[2], &meta, &FAILURES_HEADER, &tables.failures)?;
    if cfg.sweep.half_filling {
        let path = ctx.out("half_filling.csv");
        write_table(&path, &meta, &HALF_FILLING_HEADER, &tables.half_filling)?;
        written.push(path);
    }
    outcome?;
    if tables.failed > 0 {
        return Err(CliError::TrajectoriesFailed {
            failed: tables.failed,
            total: tables.total,
        });
    }
    Ok(written)
}

/// Directories under `root` holding trajectory files: `root` itself if it
/// has any, otherwise its immediate subdirectories that do.
fn trajectory_groups(root: &Path) -> Result<Vec<PathBuf>, CliError> {
    if !trajectory_files(root)?.is_empty() {
        return Ok(vec![root.to_path_buf()]);
    }
    let mut groups = Vec::new();
    for entry in std::fs::read_dir(root).map_err(|e| CliError::io(root, e))? {
        let path = entry.map_err(|e| CliError::io(root, e))?.path();
        if path.is_dir() && !trajectory_files(&path)?.is_empty() {
            groups.push(path);
        }
    }
    groups.sort();
    Ok(groups)
}

/// Re-analyzes trajectory files from disk with the current analysis
/// settings; one summary row per trajectory directory.
pub fn analyze(ctx: &Context, input: Option<&Path>) -> Result<PathBuf, CliError> {
    let cfg = &ctx.config;
    let root = input
        .map(Path::to_path_buf)
        .unwrap_or_else(|| ctx.out("trajectories"));
    let groups = trajectory_groups(&root)?;
    if groups.is_empty() {
        return Err(CliError::Usage(format!(
            "no trajectory files under {}",
            root.display()
        )));
    }
    let mut rows = Vec::new();
    for dir in &groups {
        let records: Vec<TrajectoryRecord> = trajectory_files(dir)?
            .iter()
            .map(|f| read_trajectory(f))
            .collect::<Result<_, _>>()?;
        let first = &records[0];
        if let Some(r) = records
            .iter()
            .find(|r| r.params != first.params || r.n_max != first.n_max)
        {
            return Err(CliError::format(
                dir,
                format!("trajectory with seed {} has different parameters", r.seed),
            ));
        }
        let analysis = analyze_records(cfg, &first.params, &records, ctx.exec)?;
        let source = dir
            .strip_prefix(&root)
            .ok()
            .filter(|p| !p.as_os_str().is_empty())
            .unwrap_or(dir)
            .display()
            .to_string();
        rows.push(summary_row(
            &source,
            &first.params,
            first.n_max,
            records.len(),
            0,
            &analysis,
        ));
    }
    let path = ctx.out("analysis.csv");
    write_table(
        &path,
        &ctx.meta("analyze")
            .with("input", root.display().to_string()),
        &SUMMARY_HEADER,
        &rows,
    )?;
    Ok(path)
}

pub const BRIGHT_HEADER: [&str; 8] = [
    "kind",
    "source",
    "n_bright",
    "pseudospin",
    "mutual_information",
    "lambda1",
    "lambda2",
    "sigma_z",
];

/// Model curves on the configured grid, followed by the bright-state
/// points of any overlaid summary tables.
pub fn bright_model(ctx: &Context) -> Result<PathBuf, CliError> {
    let cfg = &ctx.config;
    let mut rows: Vec<Vec<String>> = bright_state_curves(&cfg.bright.n_grid)?
        .iter()
        .map(|p| {
            vec![
                "model".to_string(),
                String::new(),
                fmt(p.n_bright),
                fmt(p.pseudospin),
                fmt(p.mutual_information),
                fmt(p.lambda1),
                fmt(p.lambda2),
                fmt(p.sigma_z),
            ]
        })
        .collect();
    for file in &cfg.bright.overlay {
        let t = Table::read(Path::new(file))?;
        let (cs, cn, cp, ci) = (
            t.column("source")?,
            t.column("n_bright")?,
            t.column("pseudospin_bright")?,
            t.column("mutual_info_bright")?,
        );
        for r in 0..t.rows.len() {
            let Some(n) = t.cell::<f64>(r, cn)? else {
                continue;
            };
            rows.push(vec![
                "trajectory".to_string(),
                format!("{file}:{}", t.rows[r][cs]),
                fmt(n),
                fmt_opt(t.cell(r, cp)?),
                fmt_opt(t.cell(r, ci)?),
                String::new(),
                String::new(),
                String::new(),
            ]);
        }
    }
    let path = ctx.out("bright_model.csv");
    write_table(&path, &ctx.meta("bright-model"), &BRIGHT_HEADER, &rows)?;
    Ok(path)
}
