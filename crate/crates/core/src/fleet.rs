//! Generation fleet and hourly load data.
//!
//! A [`Fleet`] is a set of two-state generating units (conventional plants
//! and V2G aggregates alike); a [`LoadProfile`] is a full year of hourly MW
//! values. Both are immutable after validation.

use std::f64::consts::TAU;
use std::io::{BufRead, BufReader, Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Hours in a simulated year.
pub const HOURS_PER_YEAR: usize = 8760;
/// Days in a simulated year.
pub const DAYS_PER_YEAR: usize = 365;
/// Hours per day.
pub const HOURS_PER_DAY: usize = 24;

/// A two-state generating unit: online with probability `1 - forced_outage_rate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorUnit {
    pub id: String,
    pub capacity_mw: f64,
    /// Probability the unit is unavailable when demanded (q).
    pub forced_outage_rate: f64,
    /// Whether attack-window degradation applies to this unit.
    pub cyber_exposed: bool,
}

impl GeneratorUnit {
    pub fn new(
        id: impl Into<String>,
        capacity_mw: f64,
        forced_outage_rate: f64,
        cyber_exposed: bool,
    ) -> Self {
        Self {
            id: id.into(),
            capacity_mw,
            forced_outage_rate,
            cyber_exposed,
        }
    }

    /// Nominal availability `1 - q`.
    pub fn availability(&self) -> f64 {
        1.0 - self.forced_outage_rate
    }
}

#[derive(Debug, Error)]
pub enum FleetError {
    #[error("read failed: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("duplicate unit id `{0}`")]
    DuplicateId(String),
    #[error("fleet has no units")]
    Empty,
    #[error("unit `{id}` capacity {value} must be positive")]
    InvalidCapacity { id: String, value: f64 },
    #[error("unit `{id}` forced outage rate {value} is outside [0, 1]")]
    InvalidOutageRate { id: String, value: f64 },
}

/// Validated, immutable set of generating units.
#[derive(Debug, Clone, PartialEq)]
pub struct Fleet {
    units: Vec<GeneratorUnit>,
}

/// Largest accepted unit capacity; beyond this the 1e-6 MW outage-table
/// lattice could overflow over a large fleet.
pub const MAX_UNIT_CAPACITY_MW: f64 = 1e6;

impl Fleet {
    pub fn new(units: Vec<GeneratorUnit>) -> Result<Self, FleetError> {
        if units.is_empty() {
            return Err(FleetError::Empty);
        }
        let mut seen = std::collections::HashSet::new();
        for unit in &units {
            if !(unit.capacity_mw > 0.0 && unit.capacity_mw <= MAX_UNIT_CAPACITY_MW) {
                return Err(FleetError::InvalidCapacity {
                    id: unit.id.clone(),
                    value: unit.capacity_mw,
                });
            }
            if !(0.0..=1.0).contains(&unit.forced_outage_rate) {
                return Err(FleetError::InvalidOutageRate {
                    id: unit.id.clone(),
                    value: unit.forced_outage_rate,
                });
            }
            if unit.id.is_empty() || !seen.insert(unit.id.clone()) {
                return Err(FleetError::DuplicateId(unit.id.clone()));
            }
        }
        Ok(Self { units })
    }

    /// Parses the fleet table format: one unit per line,
    /// `id capacity_mw forced_outage_rate cyber_exposed(0|1)`,
    /// `#` comments and blank lines allowed, LF or CRLF.
    pub fn from_reader(reader: impl Read) -> Result<Self, FleetError> {
        let reader = BufReader::new(reader);
        let mut units = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = idx + 1;
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let fields: Vec<&str> = content.split_whitespace().collect();
            if fields.len() != 4 {
                return Err(FleetError::Parse {
                    line: lineno,
                    message: format!(
                        "expected 4 fields (id capacity_mw forced_outage_rate cyber_exposed), got {}",
                        fields.len()
                    ),
                });
            }
            let capacity_mw: f64 = fields[1].parse().map_err(|_| FleetError::Parse {
                line: lineno,
                message: format!("capacity_mw `{}` is not a number", fields[1]),
            })?;
            let forced_outage_rate: f64 = fields[2].parse().map_err(|_| FleetError::Parse {
                line: lineno,
                message: format!("forced_outage_rate `{}` is not a number", fields[2]),
            })?;
            let cyber_exposed = match fields[3] {
                "0" => false,
                "1" => true,
                other => {
                    return Err(FleetError::Parse {
                        line: lineno,
                        message: format!("cyber_exposed `{other}` must be 0 or 1"),
                    })
                }
            };
            units.push(GeneratorUnit::new(
                fields[0],
                capacity_mw,
                forced_outage_rate,
                cyber_exposed,
            ));
        }
        Self::new(units)
    }

    /// Writes the same table format `from_reader` parses; floats use the
    /// shortest round-trip representation so a reload reproduces the fleet
    /// exactly.
    pub fn write(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "# id capacity_mw forced_outage_rate cyber_exposed")?;
        for u in &self.units {
            writeln!(
                w,
                "{} {} {} {}",
                u.id,
                u.capacity_mw,
                u.forced_outage_rate,
                u8::from(u.cyber_exposed)
            )?;
        }
        Ok(())
    }

    pub fn units(&self) -> &[GeneratorUnit] {
        &self.units
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    pub fn installed_capacity_mw(&self) -> f64 {
        self.units.iter().map(|u| u.capacity_mw).sum()
    }
}

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("read failed: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("expected {expected} hourly values, found {found}", expected = HOURS_PER_YEAR)]
    WrongLength { found: usize },
    #[error("negative load at hour {hour}")]
    NegativeLoad { hour: usize },
    #[error("{0}")]
    Domain(String),
}

/// One year of hourly load, exactly 8760 non-negative MW values.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadProfile {
    hourly_mw: Vec<f64>,
}

impl LoadProfile {
    pub fn new(hourly_mw: Vec<f64>) -> Result<Self, ProfileError> {
        if hourly_mw.len() != HOURS_PER_YEAR {
            return Err(ProfileError::WrongLength {
                found: hourly_mw.len(),
            });
        }
        for (hour, &v) in hourly_mw.iter().enumerate() {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(ProfileError::NegativeLoad { hour });
            }
        }
        Ok(Self { hourly_mw })
    }

    /// Parses one MW value per line; blank lines and `#` comments skipped,
    /// LF or CRLF.
    pub fn from_reader(reader: impl Read) -> Result<Self, ProfileError> {
        let reader = BufReader::new(reader);
        let mut values = Vec::with_capacity(HOURS_PER_YEAR);
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let v: f64 = content.parse().map_err(|_| ProfileError::Parse {
                line: idx + 1,
                message: format!("`{content}` is not a number"),
            })?;
            values.push(v);
        }
        Self::new(values)
    }

    /// Deterministic synthetic year: a seasonal raised cosine peaking at
    /// `peak_hour` multiplied by a diurnal raised cosine peaking at
    /// hour-of-day 17, interpolating between `annual_peak * base_fraction`
    /// and `annual_peak`.
    pub fn synthetic(
        annual_peak_mw: f64,
        base_fraction: f64,
        peak_hour: u32,
    ) -> Result<Self, ProfileError> {
        if !(annual_peak_mw > 0.0 && annual_peak_mw.is_finite()) {
            return Err(ProfileError::Domain(format!(
                "annual_peak_mw {annual_peak_mw} must be positive"
            )));
        }
        if !(base_fraction > 0.0 && base_fraction <= 1.0) {
            return Err(ProfileError::Domain(format!(
                "base_fraction {base_fraction} must be in (0, 1]"
            )));
        }
        if peak_hour as usize >= HOURS_PER_YEAR {
            return Err(ProfileError::Domain(format!(
                "peak_hour {peak_hour} must be below {HOURS_PER_YEAR}"
            )));
        }
        if base_fraction == 1.0 {
            return Ok(Self {
                hourly_mw: vec![annual_peak_mw; HOURS_PER_YEAR],
            });
        }
        let floor = annual_peak_mw * base_fraction;
        let hourly_mw = (0..HOURS_PER_YEAR)
            .map(|h| {
                let seasonal =
                    0.5 * (1.0 + (TAU * (h as f64 - peak_hour as f64) / HOURS_PER_YEAR as f64).cos());
                let hod = (h % HOURS_PER_DAY) as f64;
                let diurnal = 0.5 * (1.0 + (TAU * (hod - 17.0) / HOURS_PER_DAY as f64).cos());
                let w = seasonal * diurnal;
                floor * (1.0 - w) + annual_peak_mw * w
            })
            .collect();
        Ok(Self { hourly_mw })
    }

    pub fn hourly_mw(&self) -> &[f64] {
        &self.hourly_mw
    }

    /// Peak load of each of the 365 days.
    pub fn daily_peaks(&self) -> Vec<f64> {
        self.hourly_mw
            .chunks_exact(HOURS_PER_DAY)
            .map(|day| day.iter().copied().fold(f64::NEG_INFINITY, f64::max))
            .collect()
    }

    /// Hour index of each day's peak load; the earliest hour wins ties.
    pub fn daily_peak_hours(&self) -> Vec<usize> {
        self.hourly_mw
            .chunks_exact(HOURS_PER_DAY)
            .enumerate()
            .map(|(day, hours)| {
                let mut best = 0;
                for (i, &v) in hours.iter().enumerate() {
                    if v > hours[best] {
                        best = i;
                    }
                }
                day * HOURS_PER_DAY + best
            })
            .collect()
    }
}
