//! CSV tables with `#` metadata lines, and the on-disk trajectory format.
//!
//! Floats are written with the shortest representation that parses back
//! to the same value, so a table read back reproduces the run exactly.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use pbb_core::mcwf::{Channel, Jump, Sample, TrajectoryRecord};
use pbb_core::{Observables, PureState, Qubit, SystemParams, C64};

use crate::config::RunConfig;
use crate::error::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

const CONFIG_MARK: &str = "# [config]";

pub fn fmt(x: f64) -> String {
    format!("{x}")
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt).unwrap_or_default()
}

/// Header lines shared by every output file.
#[derive(Debug, Clone)]
pub struct Metadata<'a> {
    pub command: &'a str,
    pub config: &'a RunConfig,
    /// File-specific `key = value` entries.
    pub extra: Vec<(String, String)>,
}

impl<'a> Metadata<'a> {
    pub fn new(command: &'a str, config: &'a RunConfig) -> Self {
        Self {
            command,
            config,
            extra: Vec::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Into<String>) -> Self {
        self.extra.push((key.to_string(), value.into()));
        self
    }

    fn write_to(&self, w: &mut impl Write) -> std::io::Result<()> {
        writeln!(w, "# pbb {VERSION}")?;
        writeln!(w, "# command = {}", self.command)?;
        for (k, v) in &self.extra {
            writeln!(w, "# {k} = {v}")?;
        }
        writeln!(w, "{CONFIG_MARK}")?;
        for line in self.config.emit().lines() {
            if line.is_empty() {
                writeln!(w, "#")?;
            } else {
                writeln!(w, "# {line}")?;
            }
        }
        Ok(())
    }
}

pub fn write_table(
    path: &Path,
    meta: &Metadata<'_>,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let file = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    meta.write_to(&mut w).map_err(|e| CliError::io(path, e))?;
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(header)
        .map_err(|e| CliError::io(path, e))?;
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        csv.write_record(row).map_err(|e| CliError::io(path, e))?;
    }
    csv.flush().map_err(|e| CliError::io(path, e))
}

/// A table read back from disk.
#[derive(Debug, Clone)]
pub struct Table {
    pub path: PathBuf,
    /// `key = value` metadata above the embedded config.
    pub meta: Vec<(String, String)>,
    /// The embedded config text.
    pub config: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut meta = Vec::new();
        let mut config = String::new();
        let mut in_config = false;
        for line in text.lines().take_while(|l| l.starts_with('#')) {
            if line == CONFIG_MARK {
                in_config = true;
            } else if in_config {
                config.push_str(line.strip_prefix("# ").unwrap_or(&line[1..]));
                config.push('\n');
            } else if let Some((k, v)) = line[1..].split_once(" = ") {
                meta.push((k.trim().to_string(), v.to_string()));
            }
        }
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let header = reader
            .headers()
            .map_err(|e| CliError::format(path, e))?
            .iter()
            .map(str::to_string)
            .collect();
        let rows = reader
            .records()
            .map(|r| {
                r.map(|r| r.iter().map(str::to_string).collect())
                    .map_err(|e| CliError::format(path, e))
            })
            .collect::<Result<_, _>>()?;
        Ok(Self {
            path: path.to_path_buf(),
            meta,
            config,
            header,
            rows,
        })
    }

    pub fn meta(&self, key: &str) -> Result<&str, CliError> {
        self.meta
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .ok_or_else(|| CliError::format(&self.path, format!("missing metadata `{key}`")))
    }

    pub fn meta_parse<T: std::str::FromStr>(&self, key: &str) -> Result<T, CliError> {
        let v = self.meta(key)?;
        v.parse()
            .map_err(|_| CliError::format(&self.path, format!("bad value `{v}` for `{key}`")))
    }

    pub fn column(&self, name: &str) -> Result<usize, CliError> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::format(&self.path, format!("missing column `{name}`")))
    }

    /// Parses a cell; an empty cell is `None`.
    pub fn cell<T: std::str::FromStr>(
        &self,
        row: usize,
        col: usize,
    ) -> Result<Option<T>, CliError> {
        let s = &self.rows[row][col];
        if s.is_empty() {
            return Ok(None);
        }
        s.parse().map(Some).map_err(|_| {
            CliError::format(
                &self.path,
                format!(
                    "bad cell `{s}` in row {} column `{}`",
                    row + 1,
                    self.header[col]
                ),
            )
        })
    }

    pub fn required<T: std::str::FromStr>(&self, row: usize, col: usize) -> Result<T, CliError> {
        self.cell(row, col)?.ok_or_else(|| {
            CliError::format(
                &self.path,
                format!(
                    "empty cell in row {} column `{}`",
                    row + 1,
                    self.header[col]
                ),
            )
        })
    }
}

const SAMPLE_HEADER: [&str; 9] = [
    "t",
    "n_mean",
    "a_re",
    "a_im",
    "sigma_re",
    "sigma_im",
    "sigma_z",
    "photon_variance",
    "norm_sq",
];
const JUMP_HEADER: [&str; 2] = ["t", "channel"];
const STATE_HEADER: [&str; 4] = ["qubit", "m", "re", "im"];

pub fn trajectory_stem(index: usize) -> String {
    format!("traj_{index:05}")
}

/// Writes `<stem>.csv` (samples), `<stem>.jumps.csv` and `<stem>.state.csv`
/// (final state) into `dir`.
pub fn write_trajectory(
    dir: &Path,
    index: usize,
    record: &TrajectoryRecord,
    config: &RunConfig,
) -> Result<(), CliError> {
    let stem = trajectory_stem(index);
    let p = &record.params;
    let meta = Metadata::new("ensemble", config)
        .with("record.index", index.to_string())
        .with("record.seed", record.seed.to_string())
        .with("record.n_max", record.n_max.to_string())
        .with("record.g", fmt(p.g))
        .with("record.kappa", fmt(p.kappa))
        .with("record.gamma", fmt(p.gamma))
        .with("record.gamma_c", fmt(p.gamma_c))
        .with("record.delta", fmt(p.delta))
        .with("record.eta", fmt(p.eta));

    let rows: Vec<Vec<String>> = record
        .samples
        .iter()
        .map(|s| {
            let o = &s.obs;
            vec![
                fmt(s.t),
                fmt(o.n_mean),
                fmt(o.a_mean.re),
                fmt(o.a_mean.im),
                fmt(o.sigma_mean.re),
                fmt(o.sigma_mean.im),
                fmt(o.sigma_z_mean),
                fmt(o.photon_variance),
                fmt(s.norm_sq),
            ]
        })
        .collect();
    write_table(
        &dir.join(format!("{stem}.csv")),
        &meta,
        &SAMPLE_HEADER,
        &rows,
    )?;

    let rows: Vec<Vec<String>> = record
        .jumps
        .iter()
        .map(|j| vec![fmt(j.t), j.channel.name().to_string()])
        .collect();
    write_table(
        &dir.join(format!("{stem}.jumps.csv")),
        &meta,
        &JUMP_HEADER,
        &rows,
    )?;

    let n_max = record.n_max;
    let mut rows = Vec::with_capacity(2 * (n_max + 1));
    for (q, name) in [(Qubit::Ground, "g"), (Qubit::Excited, "e")] {
        for m in 0..=n_max {
            let c = record.final_state.amplitude(q, m);
            rows.push(vec![name.to_string(), m.to_string(), fmt(c.re), fmt(c.im)]);
        }
    }
    write_table(
        &dir.join(format!("{stem}.state.csv")),
        &meta,
        &STATE_HEADER,
        &rows,
    )
}

/// Sample files (`traj_*.csv` without the jump and state suffixes) in
/// `dir`, sorted by name.
pub fn trajectory_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| CliError::io(dir, e))? {
        let path = entry.map_err(|e| CliError::io(dir, e))?.path();
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
            continue;
        };
        if name.starts_with("traj_")
            && name.ends_with(".csv")
            && !name.ends_with(".jumps.csv")
            && !name.ends_with(".state.csv")
        {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Reads a trajectory written by [`write_trajectory`]. Snapshots are not
/// stored on disk, so the record comes back without them.
pub fn read_trajectory(samples_path: &Path) -> Result<TrajectoryRecord, CliError> {
    let t = Table::read(samples_path)?;
    let params = SystemParams {
        g: t.meta_parse("record.g")?,
        kappa: t.meta_parse("record.kappa")?,
        gamma: t.meta_parse("record.gamma")?,
        gamma_c: t.meta_parse("record.gamma_c")?,
        delta: t.meta_parse("record.delta")?,
        eta: t.meta_parse("record.eta")?,
    };
    let seed: u64 = t.meta_parse("record.seed")?;
    let n_max: usize = t.meta_parse("record.n_max")?;

    let cols: Vec<usize> = SAMPLE_HEADER
        .iter()
        .map(|h| t.column(h))
        .collect::<Result<_, _>>()?;
    let mut samples = Vec::with_capacity(t.rows.len());
    for r in 0..t.rows.len() {
        let v = |k: usize| t.required::<f64>(r, cols[k]);
        samples.push(Sample {
            t: v(0)?,
            obs: Observables {
                n_mean: v(1)?,
                a_mean: C64::new(v(2)?, v(3)?),
                sigma_mean: C64::new(v(4)?, v(5)?),
                sigma_z_mean: v(6)?,
                photon_variance: v(7)?,
            },
            norm_sq: v(8)?,
        });
    }

    let stem = samples_path
        .file_name()
        .and_then(|n| n.to_str())
        .and_then(|n| n.strip_suffix(".csv"))
        .unwrap_or_default();
    let dir = samples_path.parent().unwrap_or(Path::new("."));

    let jt = Table::read(&dir.join(format!("{stem}.jumps.csv")))?;
    let (ct, cc) = (jt.column("t")?, jt.column("channel")?);
    let mut jumps = Vec::with_capacity(jt.rows.len());
    for r in 0..jt.rows.len() {
        let channel: Channel = jt.rows[r][cc]
            .parse()
            .map_err(|e: String| CliError::format(&jt.path, e))?;
        jumps.push(Jump {
            t: jt.required(r, ct)?,
            channel,
        });
    }

    let st = Table::read(&dir.join(format!("{stem}.state.csv")))?;
    let (cq, cm, cre, cim) = (
        st.column("qubit")?,
        st.column("m")?,
        st.column("re")?,
        st.column("im")?,
    );
    let mut amps = vec![C64::new(0.0, 0.0); 2 * (n_max + 1)];
    for r in 0..st.rows.len() {
        let q = match st.rows[r][cq].as_str() {
            "g" => Qubit::Ground,
            "e" => Qubit::Excited,
            other => {
                return Err(CliError::format(
                    &st.path,
                    format!("bad qubit label `{other}`"),
                ))
            }
        };
        let m: usize = st.required(r, cm)?;
        if m > n_max {
            return Err(CliError::format(
                &st.path,
                format!("level {m} above n_max {n_max}"),
            ));
        }
        amps[pbb_core::state::basis_index(n_max, q, m)] =
            C64::new(st.required(r, cre)?, st.required(r, cim)?);
    }
    let final_state =
        PureState::from_amplitudes(n_max, amps).map_err(|e| CliError::format(&st.path, e))?;

    Ok(TrajectoryRecord {
        seed,
        params,
        n_max,
        samples,
        jumps,
        snapshots: None,
        final_state,
    })
}
