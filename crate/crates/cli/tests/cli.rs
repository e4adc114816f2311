//! End-to-end checks of the command-line surface: bundles, determinism,
//! comparisons, figure extraction and exit codes.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use gridrisk_cli::report::{self, FAILED_MARKER};
use gridrisk_cli::scenario::Overrides;

fn write(path: &Path, body: &str) {
    fs::write(path, body).unwrap();
}

/// A tiny scenario that runs in milliseconds.
fn tiny_scenario(dir: &Path, name: &str, seed: u64, delta: f64) -> PathBuf {
    let body = format!(
        r#"
label = "{name}"

[[fleet.unit]]
id = "big"
capacity_mw = 100.0
forced_outage_rate = 0.1
cyber_exposed = true

[[fleet.unit]]
id = "small"
capacity_mw = 50.0
forced_outage_rate = 0.2
cyber_exposed = false

[load.synth]
annual_peak_mw = 120.0
base_fraction = 0.6
peak_hour = 4380

[cyber]
delta = {delta}
window_start = 4000
window_hours = 1000
degraded_availability = 0.7

[mc]
replications = 150
seed = {seed}

[output]
dir = "{out}"
"#,
        out = dir.join(format!("out_{name}")).display()
    );
    let path = dir.join(name);
    write(&path, &body);
    path
}

fn read_artifacts(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn bundle_is_complete_and_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = tiny_scenario(tmp.path(), "tiny", 9, 0.05);

    let out1 = tmp.path().join("run1");
    let out2 = tmp.path().join("run2");
    for out in [&out1, &out2] {
        let bundle = report::run_scenario(
            &scenario,
            &Overrides {
                out_dir: Some(out.clone()),
                ..Default::default()
            },
        )
        .unwrap();
        assert!(!bundle.scenario.hash.is_empty());
        assert!(!out.join(FAILED_MARKER).exists());
    }
    // Byte-identical artifacts run to run.
    assert_eq!(read_artifacts(&out1), read_artifacts(&out2));
}

#[test]
fn delta_zero_matches_neutralized_cyber_section_bit_for_bit() {
    // Same fleet with exposure stripped and the cyber section neutral:
    // common random numbers make the Monte Carlo outputs identical.
    let tmp = tempfile::tempdir().unwrap();
    let secured = r#"
label = "secured"

[[fleet.unit]]
id = "big"
capacity_mw = 100.0
forced_outage_rate = 0.1
cyber_exposed = false

[load.synth]
annual_peak_mw = 90.0
base_fraction = 0.6
peak_hour = 4380

[cyber]
delta = 0.0

[mc]
replications = 300
seed = 5150
"#;
    let exposed_neutral = secured
        .replace("cyber_exposed = false", "cyber_exposed = true")
        .replace(
            "delta = 0.0",
            "delta = 0.0\ndegraded_availability = 0.9",
        );
    let a_path = tmp.path().join("secured");
    let b_path = tmp.path().join("exposed_neutral");
    write(&a_path, secured);
    write(&b_path, &exposed_neutral);

    let a = report::run_scenario(
        &a_path,
        &Overrides {
            out_dir: Some(tmp.path().join("out_a")),
            ..Default::default()
        },
    )
    .unwrap();
    let b = report::run_scenario(
        &b_path,
        &Overrides {
            out_dir: Some(tmp.path().join("out_b")),
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(a.mc, b.mc);
    // delta = 0: derated table equals the base table byte for byte.
    assert_eq!(
        fs::read(tmp.path().join("out_a/copt_base.csv")).unwrap(),
        fs::read(tmp.path().join("out_a/copt_derated.csv")).unwrap()
    );
}

#[test]
fn scenario_hash_toggles_with_each_input_field() {
    let tmp = tempfile::tempdir().unwrap();
    let base = tiny_scenario(tmp.path(), "base", 9, 0.05);
    let hash = |path: &Path| {
        gridrisk_cli::load_scenario(path, &Overrides::default())
            .unwrap()
            .hash
    };
    let base_hash = hash(&base);

    let text = fs::read_to_string(&base).unwrap();
    for (from, to) in [
        ("forced_outage_rate = 0.1", "forced_outage_rate = 0.11"),
        ("annual_peak_mw = 120.0", "annual_peak_mw = 121.0"),
        ("delta = 0.05", "delta = 0.06"),
        ("window_start = 4000", "window_start = 4001"),
        ("seed = 9", "seed = 10"),
        ("replications = 150", "replications = 151"),
    ] {
        let variant = tmp.path().join("variant");
        write(&variant, &text.replace(from, to));
        assert_ne!(hash(&variant), base_hash, "toggling {from} must move the hash");
    }
}

#[test]
fn compare_orders_rows_and_rejects_invalid_inputs() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tiny_scenario(tmp.path(), "low", 9, 0.0);
    let b = tiny_scenario(tmp.path(), "high", 9, 0.05);

    let table = report::compare(&[a.clone(), b.clone()], &Overrides::default()).unwrap();
    assert_eq!(table.rows.len(), 2);
    assert_eq!(table.rows[0].label, "low");
    assert_eq!(table.rows[1].label, "high");
    // Same seed, delta affects only the derated table: MC identical,
    // analytic LOLE ordered by delta (derating monotonicity).
    assert_eq!(
        table.rows[0].mc_lole_mean_days,
        table.rows[1].mc_lole_mean_days
    );
    assert!(
        table.rows[1].lole_analytic_daily_days >= table.rows[0].lole_analytic_daily_days
    );

    // Comparing a scenario with itself gives identical rows.
    let twice = report::compare(&[a.clone(), a.clone()], &Overrides::default()).unwrap();
    assert_eq!(
        twice.rows[0].lole_analytic_daily_days,
        twice.rows[1].lole_analytic_daily_days
    );
    assert_eq!(twice.rows[0].mc_lole_mean_days, twice.rows[1].mc_lole_mean_days);

    // One bad path: every failure reported, nothing runs.
    let missing = tmp.path().join("missing");
    let err = report::compare(&[a, missing.clone()], &Overrides::default()).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains("missing"));
}

#[test]
fn figure_extraction_and_missing_artifact() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = tiny_scenario(tmp.path(), "fig", 9, 0.05);
    let out = tmp.path().join("bundle");
    report::run_scenario(
        &scenario,
        &Overrides {
            out_dir: Some(out.clone()),
            ..Default::default()
        },
    )
    .unwrap();

    let written = report::emit_figure_data(&out, "lolp_series").unwrap();
    assert_eq!(written.len(), 1);
    let text = fs::read_to_string(&written[0]).unwrap();
    assert_eq!(text.lines().count(), 8761); // header + 8760 rows
    assert_eq!(text.lines().next(), Some("hour,value"));

    // Idempotent re-emission.
    let again = report::emit_figure_data(&out, "lolp_series").unwrap();
    assert_eq!(written, again);

    let both = report::emit_figure_data(&out, "copt_compare").unwrap();
    assert_eq!(both.len(), 2);
    // Each emitted table is still a normalized distribution.
    for path in &both {
        let text = fs::read_to_string(path).unwrap();
        let total: f64 = text
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(2).unwrap().parse::<f64>().unwrap())
            .sum();
        assert!((total - 1.0).abs() < 1e-12, "{path:?}: sum {total}");
    }

    // Remove an artifact: the error names it.
    fs::remove_file(out.join("mc_lole_hist.csv")).unwrap();
    let err = report::emit_figure_data(&out, "lole_hist").unwrap_err();
    assert_eq!(err.exit_code(), 3);
    assert!(err.to_string().contains("mc_lole_hist"), "{err}");

    let err = report::emit_figure_data(&out, "nope").unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn failed_write_leaves_marker_behind() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = tiny_scenario(tmp.path(), "marker", 1, 0.0);
    let out = tmp.path().join("blocked");
    // A directory squatting on an artifact name makes the write fail
    // partway through.
    fs::create_dir_all(out.join("attack.json")).unwrap();
    let err = report::run_scenario(
        &scenario,
        &Overrides {
            out_dir: Some(out.clone()),
            ..Default::default()
        },
    )
    .unwrap_err();
    assert_eq!(err.exit_code(), 3);
    assert!(out.join(FAILED_MARKER).exists());
    let marker = fs::read_to_string(out.join(FAILED_MARKER)).unwrap();
    assert!(marker.contains("attack.json"), "{marker}");
}

#[test]
fn zero_risk_scenario_histogram_is_single_zero_bin() {
    let tmp = tempfile::tempdir().unwrap();
    let body = r#"
[[fleet.unit]]
id = "perfect"
capacity_mw = 100.0
forced_outage_rate = 0.0
cyber_exposed = false

[load.synth]
annual_peak_mw = 80.0
base_fraction = 0.5
peak_hour = 100

[cyber]
delta = 0.0

[mc]
replications = 64
seed = 1
"#;
    let path = tmp.path().join("safe");
    write(&path, body);
    let out = tmp.path().join("out_safe");
    report::run_scenario(
        &path,
        &Overrides {
            out_dir: Some(out.clone()),
            ..Default::default()
        },
    )
    .unwrap();
    let hist = fs::read_to_string(out.join("mc_lole_hist.csv")).unwrap();
    assert_eq!(hist, "bin_lower,count\n0,64\n");
    let figs = report::emit_figure_data(&out, "lole_hist").unwrap();
    assert_eq!(fs::read_to_string(&figs[0]).unwrap(), hist);
}

#[test]
fn rerunning_from_embedded_resolved_scenario_reproduces_bundle() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = tiny_scenario(tmp.path(), "orig", 33, 0.05);
    let out = tmp.path().join("out_orig");
    let bundle = report::run_scenario(
        &scenario,
        &Overrides {
            out_dir: Some(out.clone()),
            ..Default::default()
        },
    )
    .unwrap();

    let resolved = out.join("resolved_scenario.toml");
    let out2 = tmp.path().join("out_replay");
    let replay = report::run_scenario(
        &resolved,
        &Overrides {
            out_dir: Some(out2.clone()),
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(bundle.scenario.hash, replay.scenario.hash);
    assert_eq!(bundle.mc, replay.mc);
    assert_eq!(
        fs::read(out.join("lolp_series.csv")).unwrap(),
        fs::read(out2.join("lolp_series.csv")).unwrap()
    );
}

// ---- binary-level exit codes ----------------------------------------------

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gridrisk"))
}

#[test]
fn missing_fleet_file_exits_2_and_names_path() {
    let tmp = tempfile::tempdir().unwrap();
    let body = r#"
[fleet]
path = "no/such/fleet"

[load.synth]
annual_peak_mw = 80.0
base_fraction = 0.5
peak_hour = 0
"#;
    let path = tmp.path().join("broken");
    write(&path, body);
    let output = bin().arg("simulate").arg(&path).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("no/such/fleet"), "{stderr}");
}

#[test]
fn simulate_exits_zero_and_prints_key_values() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = tiny_scenario(tmp.path(), "ok", 2, 0.0);
    let out = tmp.path().join("out_cli");
    let output = bin()
        .arg("simulate")
        .arg(&scenario)
        .arg("--out")
        .arg(&out)
        .arg("--replications")
        .arg("50")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{:?}", output);
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("scenario_hash: "), "{stdout}");
    assert!(stdout.contains("mc_lole_mean_days: "), "{stdout}");
    assert!(out.join("manifest.json").exists());
}

#[test]
fn unknown_figure_exits_2() {
    let output = bin().arg("figure").arg("/nonexistent").arg("bogus").output().unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn copt_and_lole_subcommands_write_their_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = tiny_scenario(tmp.path(), "partial", 4, 0.05);

    let out = tmp.path().join("tables");
    let output = bin()
        .arg("copt")
        .arg(&scenario)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    assert!(out.join("copt_base.csv").exists());
    assert!(out.join("copt_derated.csv").exists());
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("installed_mw: 150"), "{stdout}");

    let out2 = tmp.path().join("lole");
    let output = bin()
        .arg("lole")
        .arg(&scenario)
        .arg("--out")
        .arg(&out2)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    for name in [
        "lole_daily_peak.json",
        "lole_hourly.json",
        "lole_derated_daily_peak.json",
        "lole_derated_hourly.json",
    ] {
        let text = fs::read_to_string(out2.join(name)).unwrap();
        assert!(text.contains("lole_days_per_year"), "{name}");
    }
}

#[test]
fn scenario_can_load_fleet_and_profile_from_files() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("fleet.txt"),
        "# test fleet\ng1 100 0.1 0\ng2 60 0.2 1\n",
    )
    .unwrap();
    let loads: String = (0..8760)
        .map(|h| format!("{}\n", 50.0 + (h % 24) as f64))
        .collect();
    fs::write(tmp.path().join("loads.txt"), loads).unwrap();
    let body = r#"
[fleet]
path = "fleet.txt"

[load]
path = "loads.txt"

[cyber]
delta = 0.0

[mc]
replications = 20
seed = 8
"#;
    let path = tmp.path().join("filebased");
    write(&path, body);
    let s = gridrisk_cli::load_scenario(&path, &Overrides::default()).unwrap();
    assert_eq!(s.fleet.len(), 2);
    assert_eq!(s.fleet.installed_capacity_mw(), 160.0);
    assert_eq!(s.profile.hourly_mw()[0], 50.0);
    assert_eq!(s.profile.hourly_mw()[23], 73.0);
}
