//! Run configuration. Every key has a default, and the resolved config is
//! echoed into each output file.

use pbb_core::classical::Theory;
use pbb_core::ode::Tolerances;
use pbb_core::telegraph::{HalfFillingSearch, PseudospinMode, SegmentConfig, SummaryOptions};
use pbb_core::{Execution, SystemParams};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Environment variable that overrides `output.threads`.
pub const THREADS_ENV: &str = "PBB_THREADS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub params: ParamsConfig,
    pub trajectory: TrajectoryConfig,
    pub analysis: AnalysisConfig,
    pub sweep: SweepConfig,
    pub bright: BrightConfig,
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsConfig {
    pub g: f64,
    pub kappa: f64,
    pub gamma: f64,
    pub gamma_c: f64,
    pub delta: f64,
    pub eta: f64,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        SystemParams::default().into()
    }
}

impl From<SystemParams> for ParamsConfig {
    fn from(p: SystemParams) -> Self {
        Self {
            g: p.g,
            kappa: p.kappa,
            gamma: p.gamma,
            gamma_c: p.gamma_c,
            delta: p.delta,
            eta: p.eta,
        }
    }
}

impl From<ParamsConfig> for SystemParams {
    fn from(p: ParamsConfig) -> Self {
        SystemParams {
            g: p.g,
            kappa: p.kappa,
            gamma: p.gamma,
            gamma_c: p.gamma_c,
            delta: p.delta,
            eta: p.eta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrajectoryConfig {
    pub t_final: f64,
    pub dt_out: f64,
    pub n_trajectories: usize,
    pub base_seed: u64,
    /// Fock truncation; when absent each ensemble point uses the
    /// parameter-dependent default, reported per row.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    pub store_snapshots: bool,
    pub rtol: f64,
    pub atol: f64,
    /// Write one file set per trajectory.
    pub write_trajectories: bool,
    /// Also integrate the master equation and tabulate it beside the
    /// ensemble means.
    pub master_check: bool,
}

impl Default for TrajectoryConfig {
    fn default() -> Self {
        Self {
            t_final: 2000.0,
            dt_out: 0.1,
            n_trajectories: 32,
            base_seed: 0,
            n_max: None,
            store_snapshots: false,
            rtol: 1e-8,
            atol: 1e-10,
            write_trajectories: true,
            master_check: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PseudospinChoice {
    #[default]
    Expectation,
    PerSample,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceChoice {
    /// Dim and bright neoclassical roots at the run's parameters.
    #[default]
    Neoclassical,
    /// Quantiles of the pooled photon signal.
    Quantiles,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub smoothing: f64,
    pub enter_bright: f64,
    pub enter_dim: f64,
    pub min_dwell: f64,
    pub min_signal: f64,
    pub pseudospin: PseudospinChoice,
    pub mutual_information: bool,
    pub references: ReferenceChoice,
    pub quantile_lo: f64,
    pub quantile_hi: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        let s = SegmentConfig::default();
        Self {
            smoothing: s.smoothing,
            enter_bright: s.enter_bright,
            enter_dim: s.enter_dim,
            min_dwell: s.min_dwell,
            min_signal: s.min_signal,
            pseudospin: PseudospinChoice::Expectation,
            mutual_information: false,
            references: ReferenceChoice::Neoclassical,
            quantile_lo: 0.1,
            quantile_hi: 0.9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// Empty means `params.delta` alone.
    pub deltas: Vec<f64>,
    /// Empty means `params.eta` alone, except for `classical-roots`, where
    /// an empty list yields an empty table.
    pub etas: Vec<f64>,
    /// Empty means `params.gamma` alone.
    pub gammas: Vec<f64>,
    pub theories: Vec<String>,
    pub half_filling: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta_bracket: Option<[f64; 2]>,
    pub target: f64,
    pub tolerance: f64,
    pub max_evaluations: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        let h = HalfFillingSearch::new(0.0, 1.0);
        Self {
            deltas: Vec::new(),
            etas: Vec::new(),
            gammas: Vec::new(),
            theories: [
                Theory::Semiclassical,
                Theory::Neoclassical,
                Theory::Intuitive,
            ]
            .iter()
            .map(|t| t.name().to_string())
            .collect(),
            half_filling: false,
            eta_bracket: None,
            target: h.target,
            tolerance: h.tolerance,
            max_evaluations: h.max_evaluations,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BrightConfig {
    pub n_grid: Vec<f64>,
    /// Ensemble or analysis summary tables whose bright-state columns are
    /// overlaid on the model curves.
    pub overlay: Vec<String>,
}

impl Default for BrightConfig {
    fn default() -> Self {
        Self {
            n_grid: default_bright_grid(),
            overlay: Vec::new(),
        }
    }
}

/// `0`, then 0.1 to 300 on a log grid with 20 points per decade, rounded
/// to six significant digits.
pub fn default_bright_grid() -> Vec<f64> {
    let mut grid = vec![0.0];
    let top = 300f64.log10();
    let mut k = 0;
    loop {
        let x = -1.0 + k as f64 / 20.0;
        if x >= top {
            break;
        }
        let v = 10f64.powf(x);
        let scale = 10f64.powi(5 - v.log10().floor() as i32);
        grid.push((v * scale).round() / scale);
        k += 1;
    }
    grid.push(300.0);
    grid
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: String,
    /// 0 uses every available core.
    pub threads: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: "pbb-out".into(),
            threads: 0,
        }
    }
}

fn invalid(field: &str, reason: impl Into<String>) -> CliError {
    CliError::Config {
        field: field.to_string(),
        message: reason.into(),
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let config: RunConfig = toml::from_str(text).map_err(|e| CliError::Config {
            field: e
                .span()
                .map(|s| field_at(text, s.start))
                .unwrap_or_default(),
            message: e.message().to_string(),
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse(&text)
    }

    pub fn emit(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn system_params(&self) -> SystemParams {
        self.params.into()
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.system_params().validate().map_err(|e| match e {
            pbb_core::Error::InvalidParams { field, reason } => {
                invalid(&format!("params.{field}"), reason)
            }
            other => invalid("params", other.to_string()),
        })?;

        let t = &self.trajectory;
        if !(t.t_final > 0.0 && t.t_final.is_finite()) {
            return Err(invalid("trajectory.t_final", "must be positive and finite"));
        }
        if !(t.dt_out > 0.0 && t.dt_out <= t.t_final) {
            return Err(invalid(
                "trajectory.dt_out",
                "must be positive and at most t_final",
            ));
        }
        if t.n_trajectories == 0 {
            return Err(invalid("trajectory.n_trajectories", "must be at least 1"));
        }
        if t.base_seed > i64::MAX as u64 {
            return Err(invalid(
                "trajectory.base_seed",
                "must fit a signed 64-bit integer",
            ));
        }
        if t.n_max == Some(0) {
            return Err(invalid("trajectory.n_max", "must be at least 1"));
        }
        if !(t.rtol > 0.0) {
            return Err(invalid("trajectory.rtol", "must be positive"));
        }
        if !(t.atol > 0.0) {
            return Err(invalid("trajectory.atol", "must be positive"));
        }

        let a = &self.analysis;
        if !(a.smoothing >= 0.0) {
            return Err(invalid("analysis.smoothing", "must be non-negative"));
        }
        if !(0.0 <= a.enter_dim && a.enter_dim < a.enter_bright && a.enter_bright <= 1.0) {
            return Err(invalid(
                "analysis.enter_bright",
                "need 0 <= enter_dim < enter_bright <= 1",
            ));
        }
        if !(a.min_dwell >= 0.0) {
            return Err(invalid("analysis.min_dwell", "must be non-negative"));
        }
        if !(a.min_signal >= 0.0) {
            return Err(invalid("analysis.min_signal", "must be non-negative"));
        }
        if !(0.0 <= a.quantile_lo && a.quantile_lo < a.quantile_hi && a.quantile_hi <= 1.0) {
            return Err(invalid(
                "analysis.quantile_lo",
                "need 0 <= quantile_lo < quantile_hi <= 1",
            ));
        }

        let s = &self.sweep;
        for (field, list) in [
            ("sweep.deltas", &s.deltas),
            ("sweep.etas", &s.etas),
            ("sweep.gammas", &s.gammas),
        ] {
            if list.iter().any(|x| !x.is_finite()) {
                return Err(invalid(field, "entries must be finite"));
            }
        }
        if s.etas.iter().any(|&x| x < 0.0) {
            return Err(invalid("sweep.etas", "entries must be non-negative"));
        }
        if s.gammas.iter().any(|&x| x < 0.0) {
            return Err(invalid("sweep.gammas", "entries must be non-negative"));
        }
        self.theories()?;
        if let Some([lo, hi]) = s.eta_bracket {
            if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo < hi) {
                return Err(invalid("sweep.eta_bracket", "need 0 <= lo < hi"));
            }
        }
        if !(0.0 < s.target && s.target < 1.0) {
            return Err(invalid("sweep.target", "must lie in (0, 1)"));
        }
        if !(s.tolerance > 0.0) {
            return Err(invalid("sweep.tolerance", "must be positive"));
        }
        if s.max_evaluations < 2 {
            return Err(invalid("sweep.max_evaluations", "must be at least 2"));
        }

        let g = &self.bright.n_grid;
        if g.iter().any(|n| !(*n >= 0.0 && n.is_finite())) || g.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid(
                "bright.n_grid",
                "must be non-negative and strictly increasing",
            ));
        }
        if self.output.dir.is_empty() {
            return Err(invalid("output.dir", "must not be empty"));
        }
        Ok(())
    }

    pub fn theories(&self) -> Result<Vec<Theory>, CliError> {
        self.sweep
            .theories
            .iter()
            .map(|t| t.parse().map_err(|e: String| invalid("sweep.theories", e)))
            .collect()
    }

    pub fn deltas(&self) -> Vec<f64> {
        if self.sweep.deltas.is_empty() {
            vec![self.params.delta]
        } else {
            self.sweep.deltas.clone()
        }
    }

    pub fn etas(&self) -> Vec<f64> {
        if self.sweep.etas.is_empty() {
            vec![self.params.eta]
        } else {
            self.sweep.etas.clone()
        }
    }

    pub fn gammas(&self) -> Vec<f64> {
        if self.sweep.gammas.is_empty() {
            vec![self.params.gamma]
        } else {
            self.sweep.gammas.clone()
        }
    }

    pub fn tolerances(&self) -> Tolerances {
        Tolerances::new(self.trajectory.rtol, self.trajectory.atol)
    }

    pub fn segmentation(&self) -> SegmentConfig {
        let a = &self.analysis;
        SegmentConfig {
            smoothing: a.smoothing,
            enter_bright: a.enter_bright,
            enter_dim: a.enter_dim,
            min_dwell: a.min_dwell,
            min_signal: a.min_signal,
        }
    }

    pub fn summary_options(&self) -> SummaryOptions {
        SummaryOptions {
            segmentation: self.segmentation(),
            pseudospin: match self.analysis.pseudospin {
                PseudospinChoice::Expectation => PseudospinMode::Expectation,
                PseudospinChoice::PerSample => PseudospinMode::PerSample,
            },
            mutual_information: self.analysis.mutual_information,
        }
    }

    pub fn half_filling_search(&self) -> Result<HalfFillingSearch, CliError> {
        let [lo, hi] = self
            .sweep
            .eta_bracket
            .ok_or_else(|| invalid("sweep.eta_bracket", "required when half_filling is on"))?;
        Ok(HalfFillingSearch {
            eta_lo: lo,
            eta_hi: hi,
            target: self.sweep.target,
            tolerance: self.sweep.tolerance,
            max_evaluations: self.sweep.max_evaluations,
        })
    }

    /// Worker threads: the explicit override, then the environment, then
    /// the config. Returns the count together with the execution mode.
    pub fn execution(&self, cli_threads: Option<usize>) -> Result<(usize, Execution), CliError> {
        let env = match std::env::var(THREADS_ENV) {
            Ok(v) => Some(v.trim().parse::<usize>().map_err(|_| {
                invalid(THREADS_ENV, format!("expected a thread count, got `{v}`"))
            })?),
            Err(_) => None,
        };
        let threads = cli_threads.or(env).unwrap_or(self.output.threads);
        let exec = if threads == 0 {
            Execution::default()
        } else {
            Execution::from_threads(threads)
        };
        Ok((threads, exec))
    }
}

/// Dotted name of the key whose value starts at byte `offset`, for error
/// messages: the nearest `[section]` header above plus the key on the line.
fn field_at(text: &str, offset: usize) -> String {
    let head = &text[..offset.min(text.len())];
    let line_start = head.rfind('\n').map_or(0, |i| i + 1);
    let line = text[line_start..].lines().next().unwrap_or("");
    let key = line.split('=').next().unwrap_or("").trim();
    let section = head[..line_start].lines().rev().find_map(|l| {
        let l = l.trim();
        (l.starts_with('[') && l.ends_with(']')).then(|| l.trim_matches(['[', ']']).to_string())
    });
    match (section, key.is_empty() || key.starts_with('[')) {
        (Some(s), false) => format!("{s}.{key}"),
        (Some(s), true) => s,
        (None, false) => key.to_string(),
        (None, true) => String::new(),
    }
}
