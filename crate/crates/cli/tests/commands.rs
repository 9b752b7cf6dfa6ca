use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pbb_cli::config::RunConfig;
use pbb_cli::output::Table;

fn pbb(dir: &Path, config: &str, args: &[&str]) -> Output {
    let cfg = dir.join("run.toml");
    std::fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_pbb"))
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .args(args)
        .env_remove("PBB_THREADS")
        .output()
        .unwrap()
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn error_line(out: &Output) -> serde_json::Value {
    let err = String::from_utf8_lossy(&out.stderr);
    let line = err.lines().last().expect("an error line");
    serde_json::from_str(line).expect("machine-readable error")
}

fn col<T: std::str::FromStr>(t: &Table, row: usize, name: &str) -> Option<T> {
    t.cell(row, t.column(name).unwrap()).unwrap()
}

fn all_files(root: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(root).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(all_files(&p));
        } else {
            out.push(p);
        }
    }
    out.sort();
    out
}

#[test]
fn default_config_round_trips() {
    let out = Command::new(env!("CARGO_BIN_EXE_pbb"))
        .arg("default-config")
        .output()
        .unwrap();
    ok(&out);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(RunConfig::parse(&text).unwrap(), RunConfig::default());
    assert!(text.contains("t_final = 2000.0"));
}

const WINDOW_SWEEP: &str = r#"
[params]
g = 100.0
gamma = 0.0
[sweep]
deltas = [2.0, 10.0, 25.0, 50.0]
etas = [5.0, 14.0, 30.0, 45.0]
"#;

#[test]
fn classical_roots_table() {
    let dir = tempfile::tempdir().unwrap();
    ok(&pbb(dir.path(), WINDOW_SWEEP, &["classical-roots"]));
    let t = Table::read(&dir.path().join("out/classical_roots.csv")).unwrap();
    assert_eq!(t.meta("command").unwrap(), "classical-roots");
    let cfg = RunConfig::parse(&t.config).unwrap();
    assert_eq!(cfg.sweep.deltas, [2.0, 10.0, 25.0, 50.0]);
    for r in 0..t.rows.len() {
        let (d, e): (f64, f64) = (col(&t, r, "delta").unwrap(), col(&t, r, "eta").unwrap());
        let empty: f64 = col(&t, r, "empty_cavity").unwrap();
        assert_eq!(empty, e * e / (d * d + 1.0));
    }
    let theories: std::collections::BTreeSet<&str> = t.rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(
        theories.into_iter().collect::<Vec<_>>(),
        ["intuitive", "neoclassical", "semiclassical"]
    );
    // inside the Delta = 10 window the neoclassical quartic has a nonphysical root
    let neo_window = t
        .rows
        .iter()
        .filter(|r| r[0] == "neoclassical" && r[1] == "10" && r[2] == "30")
        .map(|r| r[4].as_str())
        .collect::<Vec<_>>();
    assert!(neo_window.contains(&"nonphysical"), "{neo_window:?}");
}

#[test]
fn empty_drive_list_gives_header_only() {
    let dir = tempfile::tempdir().unwrap();
    ok(&pbb(
        dir.path(),
        "[sweep]\netas = []\n",
        &["classical-roots"],
    ));
    let t = Table::read(&dir.path().join("out/classical_roots.csv")).unwrap();
    assert!(t.rows.is_empty());
    assert_eq!(t.header[..5], ["theory", "delta", "eta", "root", "class"]);
}

#[test]
fn boundary_rows_per_theory_gamma_and_detuning() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"
[sweep]
deltas = [0.01, 2.0, 10.0]
gammas = [0.0, 0.01, 0.1, 1.0]
theories = ["semiclassical", "neoclassical"]
"#;
    ok(&pbb(dir.path(), cfg, &["boundary"]));
    let t = Table::read(&dir.path().join("out/boundary.csv")).unwrap();
    assert_eq!(t.rows.len(), 2 * 4 * 3);
    let r = t
        .rows
        .iter()
        .position(|r| r[0] == "neoclassical" && r[2] == "0" && r[4] == "0.01")
        .unwrap();
    let lo: f64 = col(&t, r, "eta_lower").unwrap();
    let w: f64 = col(&t, r, "width").unwrap();
    assert!((lo - 50.0).abs() < 0.1 && w < 0.1);

    // single detuning
    let dir = tempfile::tempdir().unwrap();
    ok(&pbb(
        dir.path(),
        "[params]\ndelta = 10.0\n[sweep]\ntheories = [\"semiclassical\"]\n",
        &["boundary"],
    ));
    let t = Table::read(&dir.path().join("out/boundary.csv")).unwrap();
    assert_eq!(t.rows.len(), 1);
    assert!(col::<f64>(&t, 0, "eta_upper").unwrap() > col::<f64>(&t, 0, "eta_lower").unwrap());
}

const SMOKE: &str = r#"
[params]
g = 20.0
delta = 10.0
eta = 5.0
[trajectory]
t_final = 3.0
dt_out = 0.5
n_trajectories = 3
n_max = 20
"#;

#[test]
fn ensemble_smoke_run_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    ok(&pbb(a.path(), SMOKE, &["ensemble", "--threads", "1"]));
    ok(&pbb(b.path(), SMOKE, &["ensemble", "--threads", "4"]));
    let fa = all_files(&a.path().join("out"));
    let fb = all_files(&b.path().join("out"));
    assert_eq!(fa.len(), 3 + 3 * 3);
    for (x, y) in fa.iter().zip(&fb) {
        let strip = |p: &Path, root: &Path| p.strip_prefix(root).unwrap().to_path_buf();
        assert_eq!(strip(x, a.path()), strip(y, b.path()));
        // embedded configs differ only in the output directory
        let read = |p: &Path, root: &Path| {
            std::fs::read_to_string(p)
                .unwrap()
                .replace(&root.join("out").display().to_string(), "OUT")
        };
        assert_eq!(read(x, a.path()), read(y, b.path()), "{}", x.display());
    }
    let s = Table::read(&a.path().join("out/summary.csv")).unwrap();
    assert_eq!(s.rows.len(), 1);
    // too short to segment, and no neoclassical window at this drive
    assert!(["insufficient_signal", "no_reference_levels"].contains(&s.rows[0][7].as_str()));
    let f = Table::read(&a.path().join("out/failures.csv")).unwrap();
    assert!(f.rows.is_empty());
}

#[test]
fn ensemble_means_match_the_master_equation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"
[params]
g = 20.0
delta = 10.0
eta = 5.0
[trajectory]
t_final = 2.0
dt_out = 0.5
n_trajectories = 200
n_max = 20
master_check = true
write_trajectories = false
"#;
    ok(&pbb(dir.path(), cfg, &["ensemble"]));
    let t = Table::read(&dir.path().join("out/means.csv")).unwrap();
    assert_eq!(t.rows.len(), 5);
    for r in 1..t.rows.len() {
        for (m, se, me) in [
            ("n_mean", "n_stderr", "master_n"),
            ("sigma_z_mean", "sigma_z_stderr", "master_sigma_z"),
        ] {
            let (m, se, me): (f64, f64, f64) = (
                col(&t, r, m).unwrap(),
                col(&t, r, se).unwrap(),
                col(&t, r, me).unwrap(),
            );
            assert!((m - me).abs() <= 4.0 * se, "row {r}: {m} ± {se} vs {me}");
        }
    }
}

const TELEGRAPH: &str = r#"
[params]
g = 100.0
delta = 50.0
eta = 14.0
[trajectory]
t_final = 80.0
dt_out = 0.1
n_trajectories = 2
base_seed = 7
"#;

#[test]
fn analyze_reproduces_the_ensemble_summary() {
    let dir = tempfile::tempdir().unwrap();
    ok(&pbb(dir.path(), TELEGRAPH, &["ensemble"]));
    ok(&pbb(dir.path(), TELEGRAPH, &["analyze"]));
    let s = Table::read(&dir.path().join("out/summary.csv")).unwrap();
    let a = Table::read(&dir.path().join("out/analysis.csv")).unwrap();
    assert_eq!(s.header, a.header);
    assert_eq!(s.rows[0][7], "ok");
    assert_eq!(col::<usize>(&s, 0, "n_max"), Some(31));
    // everything derived from the records is reproduced exactly
    assert_eq!(s.rows[0][1..], a.rows[0][1..]);
    assert_eq!(a.rows[0][0], "d50_e14");

    // overlay onto the bright-state model
    let overlay = format!(
        "[bright]\nn_grid = [0.0, 1.0, 10.0]\noverlay = [\"{}\"]\n",
        dir.path().join("out/summary.csv").display()
    );
    ok(&pbb(dir.path(), &overlay, &["bright-model"]));
    let b = Table::read(&dir.path().join("out/bright_model.csv")).unwrap();
    assert_eq!(b.rows.len(), 4);
    assert_eq!(b.rows[3][0], "trajectory");
    assert_eq!(b.rows[3][2], s.rows[0][s.column("n_bright").unwrap()]);

    // mutual information needs snapshots, which files do not carry
    let mi = format!("{TELEGRAPH}[analysis]\nmutual_information = true\n");
    let out = pbb(dir.path(), &mi, &["analyze"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(error_line(&out)["message"]
        .as_str()
        .unwrap()
        .contains("snapshots"));
}

#[test]
fn bright_model_default_grid() {
    let dir = tempfile::tempdir().unwrap();
    ok(&pbb(dir.path(), "", &["bright-model"]));
    let t = Table::read(&dir.path().join("out/bright_model.csv")).unwrap();
    assert_eq!(t.rows.len(), RunConfig::default().bright.n_grid.len());
    assert_eq!(t.rows[0][2], "0");
    assert_eq!(col::<f64>(&t, 0, "pseudospin"), Some(1.0));
    assert_eq!(col::<f64>(&t, 0, "mutual_information"), Some(0.0));
    let last = t.rows.len() - 1;
    assert!(col::<f64>(&t, last, "pseudospin").unwrap() > 0.99);
}

#[test]
fn config_errors_exit_2_with_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let out = pbb(dir.path(), "[params]\nkappa = 0.0\n", &["boundary"]);
    assert_eq!(out.status.code(), Some(2));
    let e = error_line(&out);
    assert_eq!(e["error"], "config");
    assert_eq!(e["field"], "params.kappa");

    let out = pbb(dir.path(), "[trajectory]\nt_finl = 3.0\n", &["ensemble"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(error_line(&out)["message"]
        .as_str()
        .unwrap()
        .contains("t_finl"));

    let out = pbb(dir.path(), "[params]\ngamma_c = 0.1\n", &["ensemble"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_line(&out)["field"], "params.gamma_c");

    let out = pbb(dir.path(), "", &["no-such-command"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_line(&out)["error"], "usage");

    let out = Command::new(env!("CARGO_BIN_EXE_pbb"))
        .args(["--out"])
        .arg(dir.path().join("out"))
        .arg("boundary")
        .env("PBB_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_line(&out)["field"], "PBB_THREADS");
}

#[test]
fn failed_search_still_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!("{SMOKE}[sweep]\nhalf_filling = true\neta_bracket = [4.0, 6.0]\n");
    let out = pbb(dir.path(), &cfg, &["ensemble"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_line(&out)["error"], "runtime");
    let s = Table::read(&dir.path().join("out/summary.csv")).unwrap();
    assert_eq!(s.rows.len(), 1);
    let h = Table::read(&dir.path().join("out/half_filling.csv")).unwrap();
    assert!(h.rows.is_empty());
}
