use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use udncov::analytic::{lambda_opt_closest, AssociationPolicy};
use udncov_cli::config::ConfigFile;
use udncov_cli::csv_out;
use udncov_cli::plot::{render_svg, Metric, PlotStyle};
use udncov_cli::presets::{Preset, PresetOptions};
use udncov_cli::sweep::run_sweep;

fn udncov(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_udncov")).args(args).output().expect("run udncov")
}

fn sample_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/buildings_sweep.toml")
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    rdr.records().map(|r| r.unwrap().iter().map(String::from).collect()).collect()
}

#[test]
fn shipped_config_round_trips() {
    let text = std::fs::read_to_string(sample_config()).unwrap();
    let cfg = ConfigFile::parse(&text).unwrap();
    let once = cfg.to_toml().unwrap();
    assert_eq!(ConfigFile::parse(&once).unwrap(), cfg);
    assert_eq!(ConfigFile::parse(&once).unwrap().to_toml().unwrap(), once);
}

#[test]
fn sweep_verb_writes_full_table() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    let config = sample_config();
    let res = udncov(&["sweep", "--config", config.to_str().unwrap(), "--out", out, "--height", "15"]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let text = std::fs::read_to_string(tmp.path().join("sweep.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 3 * 16);
    assert!(tmp.path().join("sweep_pcov.svg").exists());
    assert!(tmp.path().join("sweep_ase.svg").exists());
    let rows = read_csv(&tmp.path().join("sweep.csv"));
    assert!(rows.iter().all(|r| r[10] == "ok"));
    // the scenario's own height wins over the file, the flag over both
    let ground: Vec<&Vec<String>> = rows.iter().filter(|r| r[0] == "strongest-ground").collect();
    let strongest: Vec<&Vec<String>> = rows.iter().filter(|r| r[0] == "strongest").collect();
    assert_eq!(ground[0][6], strongest[0][6]);
}

#[test]
fn failed_rows_set_exit_code() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.toml");
    std::fs::write(
        &cfg,
        "[sweep]\naxis = \"threshold\"\nmin = 0.5\nmax = 2.0\npoints = 4\nscale = \"linear\"\n\n[base]\npolicy = \"strongest\"\n",
    )
    .unwrap();
    let res = udncov(&["sweep", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap(), "--format", "csv"]);
    assert_eq!(res.status.code(), Some(1));
    let rows = read_csv(&tmp.path().join("sweep.csv"));
    assert_eq!(rows.len(), 4);
    assert!(rows[0][10].starts_with("error: validity"));
    assert!(rows[1..].iter().all(|r| r[10] == "ok"));

    let missing = udncov(&["sweep", "--config", "/nonexistent.toml"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn point_verb_prints_json() {
    let res = udncov(&["point", "--height", "0", "--policy", "strongest", "--alpha-nlos", "4"]);
    assert!(res.status.success());
    let line = String::from_utf8(res.stdout).unwrap();
    let v: serde_json::Value = serde_json::from_str(line.trim()).unwrap();
    assert_eq!(v["policy"], "strongest");
    assert_eq!(v["method"], "closed_form");
    let p = v["pcov"].as_f64().unwrap();
    assert!((p - 2.0 / std::f64::consts::PI).abs() < 1e-12);

    let mc = udncov(&["point", "--engines", "analytic,mc", "--trials", "2000", "--bs-density", "1e-4"]);
    assert!(mc.status.success());
    let lines: Vec<serde_json::Value> =
        String::from_utf8(mc.stdout).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[1]["engine"], "mc");
    assert!(lines[1]["ci_halfwidth"].as_f64().unwrap() > 0.0);
}

#[test]
fn usage_errors() {
    assert_eq!(udncov(&["fig3", "--engines", "fast"]).status.code(), Some(2));
    assert_eq!(udncov(&["point", "--los-prob", "1.5"]).status.code(), Some(2));
    assert_ne!(udncov(&["fig3", "--format", "pdf"]).status.code(), Some(0));
}

#[test]
fn two_row_table_is_three_lines() {
    let mut spec = Preset::Fig3.spec(&PresetOptions::default()).unwrap();
    spec.grid = udncov_cli::sweep::Grid::log(1e-4, 1e-3, 2).unwrap();
    spec.scenarios.truncate(1);
    let rows = run_sweep(&spec).unwrap();
    let text = csv_out::to_string(&rows, false).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.ends_with('\n'));
}

#[test]
fn fig3_plot_has_eight_series_and_flat_ground_curves() {
    let rows = run_sweep(&Preset::Fig3.spec(&PresetOptions::default()).unwrap()).unwrap();
    assert!(rows.iter().all(|r| r.is_ok()));
    let svg = render_svg(&rows, PlotStyle { metric: Metric::Pcov, title: "fig3" }).unwrap();
    let polylines: Vec<&str> = svg.lines().filter(|l| l.starts_with("<polyline")).collect();
    assert_eq!(polylines.len(), 8);
    // scenario order: h20 closest, h20 strongest, h0 closest, h0 strongest per case
    for (i, line) in polylines.iter().enumerate() {
        let pts = line.split("points=\"").nth(1).unwrap().trim_end_matches("\"/>");
        let ys: Vec<&str> = pts.split(' ').map(|p| p.split(',').nth(1).unwrap()).collect();
        let flat = ys.iter().all(|y| *y == ys[0]);
        assert_eq!(flat, i % 4 >= 2, "series {i}");
    }
    for r in rows.iter().filter(|r| r.scenario_id.contains("-h0-")) {
        let first = rows.iter().find(|q| q.scenario_id == r.scenario_id).unwrap();
        assert_eq!(r.outcome.as_ref().unwrap().pcov, first.outcome.as_ref().unwrap().pcov);
    }
}

#[test]
fn fig4_peak_matches_optimal_density() {
    let rows = run_sweep(&Preset::Fig4.spec(&PresetOptions::default()).unwrap()).unwrap();
    let step = (udncov_cli::presets::LAMBDA_MAX / udncov_cli::presets::LAMBDA_MIN).log10()
        / (udncov_cli::presets::POINTS - 1) as f64;
    for h in [10.0, 15.0, 20.0] {
        let id = format!("nlos-h{h}-closest");
        let best = rows
            .iter()
            .filter(|r| r.scenario_id == id && r.policy == AssociationPolicy::Closest)
            .max_by(|a, b| a.outcome.as_ref().unwrap().ase.total_cmp(&b.outcome.as_ref().unwrap().ase))
            .unwrap();
        let opt = lambda_opt_closest(1.0, h, 4.0).unwrap();
        assert!((best.axis_value / opt).log10().abs() <= step, "h={h}: {} vs {opt}", best.axis_value);
    }
}

#[test]
fn presets_write_expected_files() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    let res = udncov(&["fig2", "--out", out, "--policy", "closest"]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    for f in ["fig2.csv", "fig2_pcov.svg", "fig2_ase.svg"] {
        assert!(tmp.path().join(f).exists(), "{f}");
    }
    assert_eq!(read_csv(&tmp.path().join("fig2.csv")).len(), 100);
    let res = udncov(&["fig4", "--out", out, "--format", "svg", "--timings"]);
    assert!(res.status.success());
    assert!(tmp.path().join("fig4_ase.svg").exists() && !tmp.path().join("fig4.csv").exists());
    let res = udncov(&["fig4", "--out", out, "--format", "csv", "--timings"]);
    assert!(res.status.success());
    let header = std::fs::read_to_string(tmp.path().join("fig4.csv")).unwrap();
    assert!(header.lines().next().unwrap().ends_with(",status,wall_time_ms"));
}
