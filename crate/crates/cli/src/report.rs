//! Report bundles: validated runs in, CSV/JSON artifacts and stable
//! `key: value` summaries out.
//!
//! A bundle directory is self-describing: `manifest.json` lists every
//! artifact, and `resolved_scenario.toml` re-runs the exact inputs. While a
//! bundle is being written a `FAILED` marker sits in the directory; it is
//! removed as the last step, so a directory with a marker (or with no
//! manifest) is never a complete bundle.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use gridrisk_core::{
    eens, expected_lole_mixture, lole_daily_peak, lole_hourly, run_monte_carlo, Copt, Disruption,
    LoleBreakdown, McOutputs, Rounding,
};

use crate::scenario::{load_scenario, Overrides, Scenario};
use crate::CliError;

pub const FAILED_MARKER: &str = "FAILED";
pub const MANIFEST: &str = "manifest.json";
pub const RESOLVED_SCENARIO: &str = "resolved_scenario.toml";

/// Everything a full scenario run computes.
#[derive(Debug)]
pub struct ReportBundle {
    pub scenario: Scenario,
    pub disruption: Disruption,
    pub copt_base: Copt,
    pub copt_derated: Copt,
    pub lole_base_daily: LoleBreakdown,
    pub lole_base_hourly: LoleBreakdown,
    pub lole_derated_daily: LoleBreakdown,
    pub lole_derated_hourly: LoleBreakdown,
    pub eens_base_mwh: f64,
    pub eens_derated_mwh: f64,
    /// Disruption-probability-weighted mix of derated and base daily-peak LOLE.
    pub lole_mixture_days: f64,
    pub mc: McOutputs,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'a str,
    version: &'a str,
    label: &'a str,
    scenario_hash: &'a str,
    seed: u64,
    replications: usize,
    delta: f64,
    artifacts: BTreeMap<&'a str, &'a str>,
}

#[derive(Serialize)]
struct AttackReport<'a> {
    target: &'a str,
    disruption_probability: f64,
    path_count: usize,
    unreachable: bool,
}

/// Units: `mean` and `std_error` are days/year under the daily-peak
/// convention; the deficit-hours pair is the hours-in-deficit/24 variant.
#[derive(Serialize)]
struct McSummary {
    mean: f64,
    std_error: f64,
    replications: usize,
    seed: u64,
    deficit_hours_mean: f64,
    deficit_hours_std_error: f64,
}

/// Artifact file names, keyed by the names `figure` accepts.
fn artifact_map() -> BTreeMap<&'static str, &'static str> {
    BTreeMap::from([
        ("resolved_scenario", RESOLVED_SCENARIO),
        ("attack", "attack.json"),
        ("copt_base", "copt_base.csv"),
        ("copt_derated", "copt_derated.csv"),
        ("lole_daily_peak", "lole_daily_peak.json"),
        ("lole_hourly", "lole_hourly.json"),
        ("lole_derated_daily_peak", "lole_derated_daily_peak.json"),
        ("lole_derated_hourly", "lole_derated_hourly.json"),
        ("mc_lole_summary", "mc_lole_summary.json"),
        ("mc_lole_hist", "mc_lole_hist.csv"),
        ("mc_lole_samples", "mc_lole_samples.csv"),
        ("lolp_series", "lolp_series.csv"),
        ("availability_series", "availability_series.csv"),
    ])
}

/// Runs the full pipeline for one scenario without touching the filesystem.
pub fn compute_bundle(scenario: Scenario) -> Result<ReportBundle, CliError> {
    let disruption = scenario
        .graph
        .disruption_probability(&scenario.target)
        .map_err(|e| CliError::Runtime(format!("attack graph evaluation: {e}")))?;
    let copt_base = Copt::build(&scenario.fleet, Rounding::Exact)
        .map_err(|e| CliError::Runtime(format!("outage table: {e}")))?;
    let copt_derated = copt_base
        .apply_cyber_derating(scenario.cyber.delta)
        .map_err(|e| CliError::Runtime(format!("derating: {e}")))?;

    let lole_base_daily = lole_daily_peak(&copt_base, &scenario.profile);
    let lole_base_hourly = lole_hourly(&copt_base, &scenario.profile);
    let lole_derated_daily = lole_daily_peak(&copt_derated, &scenario.profile);
    let lole_derated_hourly = lole_hourly(&copt_derated, &scenario.profile);
    let eens_base_mwh = eens(&copt_base, &scenario.profile);
    let eens_derated_mwh = eens(&copt_derated, &scenario.profile);
    let lole_mixture_days = expected_lole_mixture(
        lole_base_daily.lole_days_per_year,
        lole_derated_daily.lole_days_per_year,
        disruption.probability,
    )
    .map_err(|e| CliError::Runtime(format!("mixture: {e}")))?;

    let mc = run_monte_carlo(
        &scenario.fleet,
        &scenario.profile,
        &scenario.cyber,
        &scenario.mc,
    );

    Ok(ReportBundle {
        scenario,
        disruption,
        copt_base,
        copt_derated,
        lole_base_daily,
        lole_base_hourly,
        lole_derated_daily,
        lole_derated_hourly,
        eens_base_mwh,
        eens_derated_mwh,
        lole_mixture_days,
        mc,
    })
}

/// Stable line-oriented summary for standard output.
pub fn summary_lines(bundle: &ReportBundle) -> Vec<(String, String)> {
    let s = &bundle.scenario;
    let mut lines: Vec<(String, String)> = Vec::new();
    let mut push = |k: &str, v: String| lines.push((k.to_string(), v));
    push("scenario", s.label.clone());
    push("file", s.path.display().to_string());
    push("scenario_hash", s.hash.clone());
    push("out_dir", s.out_dir.display().to_string());
    push("units", s.fleet.len().to_string());
    push("installed_mw", format!("{}", s.fleet.installed_capacity_mw()));
    push("attack_target", s.target.clone());
    push(
        "disruption_probability",
        format!("{:e}", bundle.disruption.probability),
    );
    push("attack_paths", bundle.disruption.path_count.to_string());
    push("delta", format!("{}", s.cyber.delta));
    push(
        "attack_window",
        format!(
            "[{}, {})",
            s.cyber.window_start,
            s.cyber.window_start + s.cyber.window_hours
        ),
    );
    push(
        "lole_analytic_daily_peak_days",
        format!("{}", bundle.lole_base_daily.lole_days_per_year),
    );
    push(
        "lole_analytic_hourly_days",
        format!("{}", bundle.lole_base_hourly.lole_days_per_year),
    );
    push(
        "lole_derated_daily_peak_days",
        format!("{}", bundle.lole_derated_daily.lole_days_per_year),
    );
    push(
        "lole_derated_hourly_days",
        format!("{}", bundle.lole_derated_hourly.lole_days_per_year),
    );
    push("eens_base_mwh", format!("{}", bundle.eens_base_mwh));
    push("eens_derated_mwh", format!("{}", bundle.eens_derated_mwh));
    push("lole_mixture_days", format!("{}", bundle.lole_mixture_days));
    push("mc_replications", s.mc.replications.to_string());
    push("mc_seed", s.mc.seed.to_string());
    push("mc_lole_mean_days", format!("{}", bundle.mc.lole.mean_days));
    push(
        "mc_lole_std_error_days",
        format!("{}", bundle.mc.lole.std_error_days),
    );
    let peak = bundle.mc.lolp_series.iter().cloned().fold(0.0, f64::max);
    push("mc_lolp_peak", format!("{peak}"));
    lines
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> std::io::Result<()> {
    fs::write(dir.join(name), bytes)
}

fn csv_series(header: &str, values: &[f64]) -> Vec<u8> {
    let mut out = String::with_capacity(values.len() * 12);
    out.push_str(header);
    out.push('\n');
    for (i, v) in values.iter().enumerate() {
        out.push_str(&format!("{i},{v}\n"));
    }
    out.into_bytes()
}

fn json<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec_pretty(value)
        .map_err(|e| CliError::Runtime(format!("serialize report: {e}")))?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Writes every artifact of a computed bundle into its output directory.
pub fn write_bundle(bundle: &ReportBundle) -> Result<(), CliError> {
    let dir = &bundle.scenario.out_dir;
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Runtime(format!("create {}: {e}", dir.display())))?;
    // Marker first: it only disappears once the bundle is complete.
    write_file(dir, FAILED_MARKER, b"bundle incomplete\n")
        .map_err(|e| CliError::Runtime(format!("write marker: {e}")))?;
    let result = write_artifacts(bundle, dir);
    match result {
        Ok(()) => {
            fs::remove_file(dir.join(FAILED_MARKER))
                .map_err(|e| CliError::Runtime(format!("finalize bundle: {e}")))?;
            Ok(())
        }
        Err(e) => {
            let _ = fs::write(
                dir.join(FAILED_MARKER),
                format!("bundle incomplete: {e}\n"),
            );
            Err(e)
        }
    }
}

fn write_artifacts(bundle: &ReportBundle, dir: &Path) -> Result<(), CliError> {
    let io_err = |name: &str| {
        let name = name.to_string();
        move |e: std::io::Error| CliError::Runtime(format!("write {name}: {e}"))
    };
    let s = &bundle.scenario;

    write_file(dir, RESOLVED_SCENARIO, s.resolved_toml.as_bytes())
        .map_err(io_err(RESOLVED_SCENARIO))?;

    let attack = AttackReport {
        target: &s.target,
        disruption_probability: bundle.disruption.probability,
        path_count: bundle.disruption.path_count,
        unreachable: bundle.disruption.unreachable,
    };
    write_file(dir, "attack.json", &json(&attack)?).map_err(io_err("attack.json"))?;

    let mut copt_csv = Vec::new();
    bundle
        .copt_base
        .write_csv(&mut copt_csv)
        .map_err(io_err("copt_base.csv"))?;
    write_file(dir, "copt_base.csv", &copt_csv).map_err(io_err("copt_base.csv"))?;
    let mut derated_csv = Vec::new();
    bundle
        .copt_derated
        .write_csv(&mut derated_csv)
        .map_err(io_err("copt_derated.csv"))?;
    write_file(dir, "copt_derated.csv", &derated_csv).map_err(io_err("copt_derated.csv"))?;

    write_file(dir, "lole_daily_peak.json", &json(&bundle.lole_base_daily)?)
        .map_err(io_err("lole_daily_peak.json"))?;
    write_file(dir, "lole_hourly.json", &json(&bundle.lole_base_hourly)?)
        .map_err(io_err("lole_hourly.json"))?;
    write_file(
        dir,
        "lole_derated_daily_peak.json",
        &json(&bundle.lole_derated_daily)?,
    )
    .map_err(io_err("lole_derated_daily_peak.json"))?;
    write_file(
        dir,
        "lole_derated_hourly.json",
        &json(&bundle.lole_derated_hourly)?,
    )
    .map_err(io_err("lole_derated_hourly.json"))?;

    let mc_summary = McSummary {
        mean: bundle.mc.lole.mean_days,
        std_error: bundle.mc.lole.std_error_days,
        replications: s.mc.replications,
        seed: s.mc.seed,
        deficit_hours_mean: bundle.mc.lole.deficit_hours_mean_days,
        deficit_hours_std_error: bundle.mc.lole.deficit_hours_std_error_days,
    };
    write_file(dir, "mc_lole_summary.json", &json(&mc_summary)?)
        .map_err(io_err("mc_lole_summary.json"))?;

    let mut hist = String::from("bin_lower,count\n");
    for bin in &bundle.mc.lole.histogram {
        hist.push_str(&format!("{},{}\n", bin.lower_days, bin.count));
    }
    write_file(dir, "mc_lole_hist.csv", hist.as_bytes()).map_err(io_err("mc_lole_hist.csv"))?;

    let mut samples = String::from("replication,lole_days\n");
    for (i, d) in bundle.mc.lole.samples_days.iter().enumerate() {
        samples.push_str(&format!("{i},{d}\n"));
    }
    write_file(dir, "mc_lole_samples.csv", samples.as_bytes())
        .map_err(io_err("mc_lole_samples.csv"))?;

    write_file(
        dir,
        "lolp_series.csv",
        &csv_series("hour,value", &bundle.mc.lolp_series),
    )
    .map_err(io_err("lolp_series.csv"))?;
    write_file(
        dir,
        "availability_series.csv",
        &csv_series("hour,value", &bundle.mc.availability_series),
    )
    .map_err(io_err("availability_series.csv"))?;

    let manifest = Manifest {
        tool: "gridrisk",
        version: env!("CARGO_PKG_VERSION"),
        label: &s.label,
        scenario_hash: &s.hash,
        seed: s.mc.seed,
        replications: s.mc.replications,
        delta: s.cyber.delta,
        artifacts: artifact_map(),
    };
    write_file(dir, MANIFEST, &json(&manifest)?).map_err(io_err(MANIFEST))?;
    Ok(())
}

/// Loads, runs and writes a scenario; the returned bundle carries all
/// computed artifacts for inspection.
pub fn run_scenario(path: &Path, overrides: &Overrides) -> Result<ReportBundle, CliError> {
    let scenario = load_scenario(path, overrides)?;
    let bundle = compute_bundle(scenario)?;
    write_bundle(&bundle)?;
    Ok(bundle)
}

/// One comparison row. Analytic LOLE columns are computed on the
/// delta-derated outage table so rows reflect each scenario's own cyber
/// factor; the Monte Carlo columns come from the full simulation.
#[derive(Debug)]
pub struct CompareRow {
    pub file: String,
    pub label: String,
    pub delta: f64,
    pub lole_analytic_daily_days: f64,
    pub lole_analytic_hourly_days: f64,
    pub mc_lole_mean_days: f64,
    pub mc_lole_se_days: f64,
    pub disruption_probability: f64,
}

#[derive(Debug)]
pub struct CompareTable {
    pub rows: Vec<CompareRow>,
}

impl CompareTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "scenario,label,delta,lole_analytic_daily_days,lole_analytic_hourly_days,\
             mc_lole_mean_days,mc_lole_se_days,disruption_probability\n",
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.file,
                r.label,
                r.delta,
                r.lole_analytic_daily_days,
                r.lole_analytic_hourly_days,
                r.mc_lole_mean_days,
                r.mc_lole_se_days,
                r.disruption_probability
            ));
        }
        out
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<28} {:>6} {:>12} {:>13} {:>10} {:>9} {:>12}\n",
            "label", "delta", "lole_daily", "lole_hourly", "mc_mean", "mc_se", "p_disrupt"
        ));
        for r in &self.rows {
            out.push_str(&format!(
                "{:<28} {:>6} {:>12.4} {:>13.4} {:>10.4} {:>9.4} {:>12.3e}\n",
                r.label,
                r.delta,
                r.lole_analytic_daily_days,
                r.lole_analytic_hourly_days,
                r.mc_lole_mean_days,
                r.mc_lole_se_days,
                r.disruption_probability
            ));
        }
        out
    }
}

/// Validates every scenario before running any; rows keep argument order.
pub fn compare(paths: &[PathBuf], overrides: &Overrides) -> Result<CompareTable, CliError> {
    if paths.len() < 2 {
        return Err(CliError::Input {
            file: String::new(),
            message: "compare needs at least two scenario files".into(),
        });
    }
    let mut scenarios = Vec::new();
    let mut failures = Vec::new();
    for path in paths {
        match load_scenario(path, overrides) {
            Ok(s) => scenarios.push(s),
            Err(e) => failures.push(e.to_string()),
        }
    }
    if !failures.is_empty() {
        return Err(CliError::Input {
            file: String::new(),
            message: failures.join("\n"),
        });
    }
    let mut rows = Vec::new();
    for scenario in scenarios {
        let file = scenario.path.display().to_string();
        let bundle = compute_bundle(scenario)?;
        rows.push(CompareRow {
            file,
            label: bundle.scenario.label.clone(),
            delta: bundle.scenario.cyber.delta,
            lole_analytic_daily_days: bundle.lole_derated_daily.lole_days_per_year,
            lole_analytic_hourly_days: bundle.lole_derated_hourly.lole_days_per_year,
            mc_lole_mean_days: bundle.mc.lole.mean_days,
            mc_lole_se_days: bundle.mc.lole.std_error_days,
            disruption_probability: bundle.disruption.probability,
        });
    }
    Ok(CompareTable { rows })
}

/// Writes the comparison CSV under `out_dir` (default `.`).
pub fn write_compare_csv(table: &CompareTable, out_dir: Option<&Path>) -> Result<PathBuf, CliError> {
    let dir = out_dir.unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Runtime(format!("create {}: {e}", dir.display())))?;
    let path = dir.join("compare.csv");
    let mut f = fs::File::create(&path)
        .map_err(|e| CliError::Runtime(format!("write {}: {e}", path.display())))?;
    f.write_all(table.to_csv().as_bytes())
        .map_err(|e| CliError::Runtime(format!("write {}: {e}", path.display())))?;
    Ok(path)
}

/// Figure names accepted by `figure`, mapped to bundle artifacts.
pub fn figure_artifacts(figure: &str) -> Option<&'static [&'static str]> {
    match figure {
        "lolp_series" => Some(&["lolp_series"]),
        "lole_hist" => Some(&["mc_lole_hist"]),
        "copt_compare" => Some(&["copt_base", "copt_derated"]),
        "availability" => Some(&["availability_series"]),
        _ => None,
    }
}

/// Copies the plot-ready CSVs behind a figure out of a bundle into
/// `<bundle>/figures/`. Idempotent; fails if the bundle lacks the artifact.
pub fn emit_figure_data(bundle_dir: &Path, figure: &str) -> Result<Vec<PathBuf>, CliError> {
    let keys = figure_artifacts(figure).ok_or_else(|| CliError::Input {
        file: bundle_dir.display().to_string(),
        message: format!(
            "unknown figure `{figure}`; expected one of lolp_series, lole_hist, copt_compare, availability"
        ),
    })?;
    let manifest_path = bundle_dir.join(MANIFEST);
    let manifest: serde_json::Value = serde_json::from_slice(
        &fs::read(&manifest_path).map_err(|e| CliError::Input {
            file: bundle_dir.display().to_string(),
            message: format!("not a bundle directory ({MANIFEST}: {e})"),
        })?,
    )
    .map_err(|e| CliError::Input {
        file: manifest_path.display().to_string(),
        message: format!("manifest parse error: {e}"),
    })?;
    if bundle_dir.join(FAILED_MARKER).exists() {
        return Err(CliError::Runtime(format!(
            "bundle at {} is marked FAILED; re-run the scenario",
            bundle_dir.display()
        )));
    }

    let figures_dir = bundle_dir.join("figures");
    fs::create_dir_all(&figures_dir)
        .map_err(|e| CliError::Runtime(format!("create {}: {e}", figures_dir.display())))?;
    let mut written = Vec::new();
    for key in keys {
        let Some(name) = manifest
            .get("artifacts")
            .and_then(|a| a.get(*key))
            .and_then(|v| v.as_str())
        else {
            return Err(CliError::Runtime(format!(
                "missing artifact `{key}`: the run step that produces it was skipped"
            )));
        };
        let src = bundle_dir.join(name);
        if !src.exists() {
            return Err(CliError::Runtime(format!(
                "missing artifact `{key}` ({name}): the run step that produces it was skipped"
            )));
        }
        let dst = figures_dir.join(name);
        fs::copy(&src, &dst)
            .map_err(|e| CliError::Runtime(format!("copy {}: {e}", src.display())))?;
        written.push(dst);
    }
    Ok(written)
}
