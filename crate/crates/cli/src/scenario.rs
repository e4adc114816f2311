//! Scenario files: a single TOML document naming the fleet, the load, the
//! attack graph, the cyber window and the Monte Carlo settings.
//!
//! Input paths are resolved relative to the scenario file; the output
//! directory is taken as given (relative to the working directory).
//! Resolution inlines every external input, producing a self-contained
//! document whose SHA-256 digest identifies the run; report bundles embed
//! it so any bundle can be re-run from its own `resolved_scenario.toml`.

use std::fs::File;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use gridrisk_core::{
    default_av2g_chain, AttackEdge, AttackGraph, AttackNode, CyberScenario, Fleet, GeneratorUnit,
    LoadProfile, McConfig,
};

use crate::CliError;

/// Defaults for omitted sections: the shipped study parameters, so an empty
/// `[cyber]` section gives the 30-day mid-year attack at 0.88 availability.
pub const DEFAULT_DELTA: f64 = 0.05;
pub const DEFAULT_WINDOW_START: u32 = 4020;
pub const DEFAULT_WINDOW_HOURS: u32 = 720;
pub const DEFAULT_DEGRADED_AVAILABILITY: f64 = 0.88;
pub const DEFAULT_REPLICATIONS: usize = 10_000;
pub const DEFAULT_SEED: u64 = 4380;
pub const DEFAULT_TARGET: &str = "grid_disruption";

/// Command-line overrides applied before the scenario is resolved and
/// hashed, so the hash always matches what actually ran.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub replications: Option<usize>,
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    label: Option<String>,
    fleet: RawFleet,
    load: RawLoad,
    attack: Option<RawAttack>,
    cyber: Option<RawCyber>,
    mc: Option<RawMc>,
    output: Option<RawOutput>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFleet {
    path: Option<PathBuf>,
    #[serde(default)]
    unit: Vec<GeneratorUnit>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLoad {
    path: Option<PathBuf>,
    hourly_mw: Option<Vec<f64>>,
    synth: Option<RawSynth>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSynth {
    annual_peak_mw: f64,
    base_fraction: f64,
    peak_hour: u32,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAttack {
    target: Option<String>,
    #[serde(default)]
    node: Vec<AttackNode>,
    #[serde(default)]
    edge: Vec<AttackEdge>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCyber {
    delta: Option<f64>,
    window_start: Option<u32>,
    window_hours: Option<u32>,
    degraded_availability: Option<f64>,
    nominal_availability: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMc {
    replications: Option<usize>,
    seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: PathBuf,
}

/// Fully materialized scenario: every external input inlined. Serializing
/// this struct yields the canonical document the scenario hash is taken
/// over, and the document itself parses as a scenario again.
#[derive(Debug, Serialize)]
pub struct ResolvedScenario {
    pub label: String,
    pub fleet: ResolvedFleet,
    pub load: ResolvedLoad,
    pub attack: ResolvedAttack,
    pub cyber: CyberScenario,
    pub mc: McConfig,
}

#[derive(Debug, Serialize)]
pub struct ResolvedFleet {
    pub unit: Vec<GeneratorUnit>,
}

#[derive(Debug, Serialize)]
pub struct ResolvedLoad {
    pub hourly_mw: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct ResolvedAttack {
    pub target: String,
    pub node: Vec<AttackNode>,
    pub edge: Vec<AttackEdge>,
}

/// A validated, runnable scenario.
#[derive(Debug)]
pub struct Scenario {
    pub path: PathBuf,
    pub label: String,
    pub fleet: Fleet,
    pub profile: LoadProfile,
    pub graph: AttackGraph,
    pub target: String,
    pub cyber: CyberScenario,
    pub mc: McConfig,
    pub out_dir: PathBuf,
    /// Canonical self-contained document; `hash` is its SHA-256 digest.
    pub resolved_toml: String,
    pub hash: String,
}

fn input_err(path: &Path, message: impl Into<String>) -> CliError {
    CliError::Input {
        file: path.display().to_string(),
        message: message.into(),
    }
}

/// Parses, resolves and validates a scenario file.
pub fn load_scenario(path: &Path, overrides: &Overrides) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| input_err(path, format!("cannot read scenario: {e}")))?;
    let raw: RawScenario = toml::from_str(&text)
        .map_err(|e| input_err(path, format!("scenario parse error: {e}")))?;
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".to_string());

    let label = raw.label.unwrap_or_else(|| stem.clone());

    // [fleet]: inline units or a path relative to the scenario file.
    let fleet = match (&raw.fleet.path, raw.fleet.unit.is_empty()) {
        (Some(p), true) => {
            let fleet_path = dir.join(p);
            let file = File::open(&fleet_path).map_err(|e| {
                input_err(path, format!("[fleet] path `{}`: {e}", fleet_path.display()))
            })?;
            Fleet::from_reader(file)
                .map_err(|e| input_err(path, format!("[fleet] `{}`: {e}", fleet_path.display())))?
        }
        (None, false) => Fleet::new(raw.fleet.unit)
            .map_err(|e| input_err(path, format!("[fleet] unit: {e}")))?,
        (Some(_), false) => {
            return Err(input_err(path, "[fleet] give either `path` or inline `unit` entries, not both"));
        }
        (None, true) => {
            return Err(input_err(path, "[fleet] requires a `path` or inline `unit` entries"));
        }
    };

    // [load]: a file path, inline hourly values, or synth parameters.
    let profile = match (&raw.load.path, &raw.load.hourly_mw, &raw.load.synth) {
        (Some(p), None, None) => {
            let load_path = dir.join(p);
            let file = File::open(&load_path).map_err(|e| {
                input_err(path, format!("[load] path `{}`: {e}", load_path.display()))
            })?;
            LoadProfile::from_reader(file)
                .map_err(|e| input_err(path, format!("[load] `{}`: {e}", load_path.display())))?
        }
        (None, Some(values), None) => LoadProfile::new(values.clone())
            .map_err(|e| input_err(path, format!("[load] hourly_mw: {e}")))?,
        (None, None, Some(s)) => {
            LoadProfile::synthetic(s.annual_peak_mw, s.base_fraction, s.peak_hour)
                .map_err(|e| input_err(path, format!("[load.synth]: {e}")))?
        }
        _ => {
            return Err(input_err(
                path,
                "[load] requires exactly one of `path`, `hourly_mw` or a `[load.synth]` table",
            ));
        }
    };

    // [attack]: custom DAG or the default four-stage chain.
    let (graph, target) = match raw.attack {
        Some(a) if !a.node.is_empty() => {
            let graph = AttackGraph::build(a.node, a.edge)
                .map_err(|e| input_err(path, format!("[attack]: {e}")))?;
            let target = a.target.unwrap_or_else(|| DEFAULT_TARGET.to_string());
            if graph.node(&target).is_none() {
                return Err(input_err(
                    path,
                    format!("[attack] target: node `{target}` is not in the graph"),
                ));
            }
            (graph, target)
        }
        Some(a) if !a.edge.is_empty() => {
            return Err(input_err(
                path,
                "[attack] edge entries need matching [[attack.node]] definitions",
            ));
        }
        other => {
            let graph = default_av2g_chain();
            let target = other
                .and_then(|a| a.target)
                .unwrap_or_else(|| DEFAULT_TARGET.to_string());
            if graph.node(&target).is_none() {
                return Err(input_err(
                    path,
                    format!("[attack] target: node `{target}` is not in the default chain"),
                ));
            }
            (graph, target)
        }
    };

    // [cyber]: omitted fields fall back to the study defaults.
    let c = raw.cyber.unwrap_or(RawCyber {
        delta: None,
        window_start: None,
        window_hours: None,
        degraded_availability: None,
        nominal_availability: None,
    });
    let cyber = CyberScenario::new(
        c.delta.unwrap_or(DEFAULT_DELTA),
        c.window_start.unwrap_or(DEFAULT_WINDOW_START),
        c.window_hours.unwrap_or(DEFAULT_WINDOW_HOURS),
        c.degraded_availability.unwrap_or(DEFAULT_DEGRADED_AVAILABILITY),
        c.nominal_availability,
    )
    .map_err(|e| input_err(path, format!("[cyber]: {e}")))?;

    // [mc] plus command-line overrides.
    let mc_raw = raw.mc.unwrap_or(RawMc {
        replications: None,
        seed: None,
    });
    let replications = overrides
        .replications
        .or(mc_raw.replications)
        .unwrap_or(DEFAULT_REPLICATIONS);
    if replications == 0 {
        return Err(input_err(path, "[mc] replications: must be at least 1"));
    }
    let mc = McConfig {
        replications,
        seed: overrides.seed.or(mc_raw.seed).unwrap_or(DEFAULT_SEED),
    };

    let out_dir = overrides
        .out_dir
        .clone()
        .or(raw.output.map(|o| o.dir))
        .unwrap_or_else(|| PathBuf::from("out").join(&stem));

    let resolved = ResolvedScenario {
        label: label.clone(),
        fleet: ResolvedFleet {
            unit: fleet.units().to_vec(),
        },
        load: ResolvedLoad {
            hourly_mw: profile.hourly_mw().to_vec(),
        },
        attack: ResolvedAttack {
            target: target.clone(),
            node: graph.nodes().to_vec(),
            edge: graph.edges().to_vec(),
        },
        cyber: cyber.clone(),
        mc,
    };
    let resolved_toml = toml::to_string(&resolved)
        .map_err(|e| input_err(path, format!("cannot serialize resolved scenario: {e}")))?;
    let hash = format!("{:x}", Sha256::digest(resolved_toml.as_bytes()));

    Ok(Scenario {
        path: path.to_path_buf(),
        label,
        fleet,
        profile,
        graph,
        target,
        cyber,
        mc,
        out_dir,
        resolved_toml,
        hash,
    })
}
