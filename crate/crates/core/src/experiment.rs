//! Experiment grids: cartesian sweeps over distributions, team sizes, and
//! allocation schemes, loaded from JSON configs or built-in presets, with CSV
//! and plot-data emission.
//!
//! A grid cell is one (distribution, scheme, team_size) combination. Cells
//! are enumerated distributions-outer → schemes → team_sizes-inner, and cell
//! `i` runs with master seed `split_seed(grid seed, i)` — so cells are
//! independent jobs that can execute on any number of workers while the
//! emitted files stay byte-identical.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Deserialize;
use thiserror::Error;

use crate::engine::run_experiment;
use crate::metrics::{build_report, MetricsError, MetricsReport};
use crate::model::{
    AllocationScheme, ConfigError, DistributionError, PerformanceDistribution, SimulationConfig,
    DEFAULT_BASE_WORK, DEFAULT_ROUNDS, DEFAULT_ROUND_REWARD, DEFAULT_RUNS, DEFAULT_TEAM_SIZES,
    DEFAULT_WORKLOAD_HIGH, DEFAULT_WORKLOAD_LOW,
};
use crate::rng::split_seed;

/// Seed used when neither the config nor the command line chooses one.
pub const DEFAULT_MASTER_SEED: u64 = 0;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid JSON in {path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("unknown scheme `{name}` in {path}, expected `equal` or `proportional`")]
    BadScheme { path: PathBuf, name: String },
    #[error("unknown preset `{name}`; available: {available}")]
    UnknownPreset { name: String, available: String },
    #[error("experiment grid has no {0}")]
    EmptyAxis(&'static str),
    #[error("scenario name `{0}` is invalid; allowed characters are A-Z a-z 0-9 . _ -")]
    BadScenarioName(String),
    #[error("duplicate scenario name `{0}`")]
    DuplicateScenario(String),
    #[error("scenario `{scenario}`: {source}")]
    Distribution {
        scenario: String,
        source: DistributionError,
    },
    #[error("cell ({scenario}, {scheme}, team size {team_size}): {source}")]
    Cell {
        scenario: String,
        scheme: AllocationScheme,
        team_size: usize,
        source: ConfigError,
    },
    #[error("cell ({scenario}, {scheme}, team size {team_size}): {source}")]
    CellMetrics {
        scenario: String,
        scheme: AllocationScheme,
        team_size: usize,
        source: MetricsError,
    },
    #[error("nothing to emit: the report list is empty")]
    NoReports,
    #[error("reports for scenario `{scenario}` do not cover every (team size, scheme) cell")]
    RaggedReports { scenario: String },
    #[error("cannot write {path}: {source}")]
    Emit {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// A distribution plus the label it carries through output files.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedDistribution {
    pub name: String,
    pub distribution: PerformanceDistribution,
}

/// Full sweep description: every distribution × scheme × team size.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentGrid {
    pub distributions: Vec<NamedDistribution>,
    pub team_sizes: Vec<usize>,
    pub schemes: Vec<AllocationScheme>,
    pub rounds: usize,
    pub runs: usize,
    pub base_work: f64,
    pub round_reward: f64,
    pub workload_low: f64,
    pub workload_high: f64,
    pub master_seed: u64,
}

/// One (distribution, scheme, team size) combination of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridCell {
    pub index: usize,
    pub scenario: String,
    pub config: SimulationConfig,
}

fn valid_scenario_name(name: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-'))
}

impl ExperimentGrid {
    /// Grid over the given distributions with every other axis at its
    /// default (team sizes 1..64, both schemes, 1000 rounds × 100 runs).
    pub fn with_defaults(distributions: Vec<NamedDistribution>) -> Self {
        ExperimentGrid {
            distributions,
            team_sizes: DEFAULT_TEAM_SIZES.to_vec(),
            schemes: vec![AllocationScheme::EqualShare, AllocationScheme::Proportional],
            rounds: DEFAULT_ROUNDS,
            runs: DEFAULT_RUNS,
            base_work: DEFAULT_BASE_WORK,
            round_reward: DEFAULT_ROUND_REWARD,
            workload_low: DEFAULT_WORKLOAD_LOW,
            workload_high: DEFAULT_WORKLOAD_HIGH,
            master_seed: DEFAULT_MASTER_SEED,
        }
    }

    /// Check the axes and every cell; errors name the offending cell.
    pub fn validate(&self) -> Result<(), GridError> {
        if self.distributions.is_empty() {
            return Err(GridError::EmptyAxis("distributions"));
        }
        if self.team_sizes.is_empty() {
            return Err(GridError::EmptyAxis("team sizes"));
        }
        if self.schemes.is_empty() {
            return Err(GridError::EmptyAxis("schemes"));
        }
        let mut seen = Vec::new();
        for d in &self.distributions {
            if !valid_scenario_name(&d.name) {
                return Err(GridError::BadScenarioName(d.name.clone()));
            }
            if seen.contains(&&d.name) {
                return Err(GridError::DuplicateScenario(d.name.clone()));
            }
            seen.push(&d.name);
        }
        for cell in self.cells() {
            cell.config.validate().map_err(|source| GridError::Cell {
                scenario: cell.scenario.clone(),
                scheme: cell.config.scheme,
                team_size: cell.config.team_size,
                source,
            })?;
        }
        Ok(())
    }

    /// Cells in enumeration order. The index both orders the work and
    /// derives the cell's sub-seed, so it is part of the output contract.
    pub fn cells(&self) -> Vec<GridCell> {
        let mut cells = Vec::new();
        for dist in &self.distributions {
            for &scheme in &self.schemes {
                for &team_size in &self.team_sizes {
                    let index = cells.len();
                    cells.push(GridCell {
                        index,
                        scenario: dist.name.clone(),
                        config: SimulationConfig {
                            distribution: dist.distribution.clone(),
                            team_size,
                            scheme,
                            rounds: self.rounds,
                            runs: self.runs,
                            base_work: self.base_work,
                            round_reward: self.round_reward,
                            workload_low: self.workload_low,
                            workload_high: self.workload_high,
                            master_seed: split_seed(self.master_seed, index as u64),
                        },
                    });
                }
            }
        }
        cells
    }
}

// ---------------------------------------------------------------------------
// JSON config

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    distributions: Vec<RawDistribution>,
    team_sizes: Option<Vec<usize>>,
    schemes: Option<Vec<String>>,
    rounds: Option<usize>,
    runs: Option<usize>,
    base_work: Option<f64>,
    round_reward: Option<f64>,
    workload_factor: Option<[f64; 2]>,
    master_seed: Option<u64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDistribution {
    name: String,
    spec: String,
}

/// Load and validate a grid from a JSON config file. Omitted fields fall
/// back to the experiment defaults; unknown fields are rejected.
pub fn load_config(path: &Path) -> Result<ExperimentGrid, GridError> {
    let text = fs::read_to_string(path).map_err(|source| GridError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let raw: RawGrid = serde_json::from_str(&text).map_err(|source| GridError::Json {
        path: path.to_path_buf(),
        source,
    })?;

    let mut distributions = Vec::with_capacity(raw.distributions.len());
    for d in raw.distributions {
        let distribution = PerformanceDistribution::parse(&d.spec).map_err(|source| {
            GridError::Distribution {
                scenario: d.name.clone(),
                source,
            }
        })?;
        distributions.push(NamedDistribution {
            name: d.name,
            distribution,
        });
    }

    let mut grid = ExperimentGrid::with_defaults(distributions);
    if let Some(team_sizes) = raw.team_sizes {
        grid.team_sizes = team_sizes;
    }
    if let Some(schemes) = raw.schemes {
        let mut parsed = Vec::with_capacity(schemes.len());
        for s in &schemes {
            match s.parse::<AllocationScheme>() {
                Ok(scheme) => parsed.push(scheme),
                Err(_) => {
                    return Err(GridError::BadScheme {
                        path: path.to_path_buf(),
                        name: s.clone(),
                    })
                }
            }
        }
        grid.schemes = parsed;
    }
    if let Some(rounds) = raw.rounds {
        grid.rounds = rounds;
    }
    if let Some(runs) = raw.runs {
        grid.runs = runs;
    }
    if let Some(base_work) = raw.base_work {
        grid.base_work = base_work;
    }
    if let Some(round_reward) = raw.round_reward {
        grid.round_reward = round_reward;
    }
    if let Some([low, high]) = raw.workload_factor {
        grid.workload_low = low;
        grid.workload_high = high;
    }
    if let Some(seed) = raw.master_seed {
        grid.master_seed = seed;
    }
    grid.validate()?;
    Ok(grid)
}

// ---------------------------------------------------------------------------
// Presets

const PRESET_RATIOS: [u32; 4] = [2, 5, 10, 100];
const TEN_LAYER_SPEC: &str = "1:800,2:400,3:200,4:100,5:50,6:30,7:10,8:5,9:3,10:2";

/// Names accepted by [`preset`].
pub fn preset_names() -> Vec<String> {
    let mut names = Vec::new();
    for family in ["two-class", "lone-low", "lone-high"] {
        for r in PRESET_RATIOS {
            names.push(format!("{family}-r{r}"));
        }
    }
    names.push("ten-layer".to_string());
    names
}

/// Build the named canned experiment: the two-class populations
/// (800 low / 800 high), the lone-low and lone-high populations (1 vs 1599),
/// each at performance ratios 2/5/10/100, and the ten-layer pyramid. All use
/// the default grid axes.
pub fn preset(name: &str) -> Result<ExperimentGrid, GridError> {
    let spec = preset_spec(name).ok_or_else(|| GridError::UnknownPreset {
        name: name.to_string(),
        available: preset_names().join(", "),
    })?;
    let distribution =
        PerformanceDistribution::parse(&spec).expect("preset specs are well-formed");
    Ok(ExperimentGrid::with_defaults(vec![NamedDistribution {
        name: name.to_string(),
        distribution,
    }]))
}

fn preset_spec(name: &str) -> Option<String> {
    if name == "ten-layer" {
        return Some(TEN_LAYER_SPEC.to_string());
    }
    for r in PRESET_RATIOS {
        if name == format!("two-class-r{r}") {
            return Some(format!("1:800,{r}:800"));
        }
        if name == format!("lone-low-r{r}") {
            return Some(format!("1:1,{r}:1599"));
        }
        if name == format!("lone-high-r{r}") {
            return Some(format!("1:1599,{r}:1"));
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Execution

/// Run every cell of the grid and aggregate each into a report. Cells are
/// independent rayon jobs; the report list is ordered by cell index, and a
/// failing cell aborts the grid with its identity in the error.
pub fn run_grid(grid: &ExperimentGrid) -> Result<Vec<MetricsReport>, GridError> {
    grid.validate()?;
    grid.cells()
        .into_par_iter()
        .map(|cell| {
            let results = run_experiment(&cell.config).map_err(|source| GridError::Cell {
                scenario: cell.scenario.clone(),
                scheme: cell.config.scheme,
                team_size: cell.config.team_size,
                source,
            })?;
            build_report(&cell.scenario, &cell.config, &results).map_err(|source| {
                GridError::CellMetrics {
                    scenario: cell.scenario.clone(),
                    scheme: cell.config.scheme,
                    team_size: cell.config.team_size,
                    source,
                }
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Emission

// All real-valued columns print with 6 decimals; integers print plain.
fn fmt6(x: f64) -> String {
    format!("{x:.6}")
}

fn write_file(path: &Path, contents: &str) -> Result<(), GridError> {
    let emit_err = |source| GridError::Emit {
        path: path.to_path_buf(),
        source,
    };
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(emit_err)?;
        }
    }
    let mut file = fs::File::create(path).map_err(emit_err)?;
    file.write_all(contents.as_bytes()).map_err(emit_err)
}

/// Write the flat per-level results table:
/// `scenario,scheme,team_size,level,population,avg_reward,sd_reward,efficiency,gini`,
/// one row per (cell, level), sorted by (scenario, scheme, team_size, level),
/// UTF-8 with LF line endings.
pub fn emit_csv(reports: &[MetricsReport], path: &Path) -> Result<(), GridError> {
    if reports.is_empty() {
        return Err(GridError::NoReports);
    }
    struct Row<'a> {
        scenario: &'a str,
        scheme: &'static str,
        team_size: usize,
        level: f64,
        line_tail: String,
    }
    let mut rows = Vec::new();
    for report in reports {
        for stats in &report.levels {
            let mut tail = String::new();
            write!(
                tail,
                "{},{},{},{},{}",
                stats.population,
                fmt6(stats.avg_reward),
                fmt6(stats.sd_reward),
                fmt6(stats.efficiency),
                fmt6(report.gini)
            )
            .expect("writing to a String cannot fail");
            rows.push(Row {
                scenario: &report.scenario,
                scheme: report.scheme.label(),
                team_size: report.team_size,
                level: stats.level,
                line_tail: tail,
            });
        }
    }
    rows.sort_by(|a, b| {
        (a.scenario, a.scheme, a.team_size)
            .cmp(&(b.scenario, b.scheme, b.team_size))
            .then(a.level.total_cmp(&b.level))
    });

    let mut out = String::from("scenario,scheme,team_size,level,population,avg_reward,sd_reward,efficiency,gini\n");
    for row in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            row.scenario,
            row.scheme,
            row.team_size,
            fmt6(row.level),
            row.line_tail
        )
        .expect("writing to a String cannot fail");
    }
    write_file(path, &out)
}

/// Write per-scenario plot tables, one file per (scenario, metric) with
/// metric ∈ {avg_reward, efficiency}: rows are team sizes ascending, columns
/// are `<level>_<scheme>` series (levels ascending, equal before
/// proportional). Returns the written paths.
pub fn emit_plotdata(reports: &[MetricsReport], dir: &Path) -> Result<Vec<PathBuf>, GridError> {
    if reports.is_empty() {
        return Err(GridError::NoReports);
    }

    // scenario → (scheme label, team_size) → report
    let mut by_scenario: BTreeMap<&str, BTreeMap<(&'static str, usize), &MetricsReport>> =
        BTreeMap::new();
    for report in reports {
        by_scenario
            .entry(&report.scenario)
            .or_default()
            .insert((report.scheme.label(), report.team_size), report);
    }

    let mut written = Vec::new();
    for (scenario, cells) in by_scenario {
        let mut team_sizes: Vec<usize> = cells.keys().map(|&(_, ts)| ts).collect();
        team_sizes.sort_unstable();
        team_sizes.dedup();
        let mut schemes: Vec<&'static str> = cells.keys().map(|&(s, _)| s).collect();
        schemes.sort_unstable();
        schemes.dedup();
        let mut levels: Vec<f64> = cells
            .values()
            .flat_map(|r| r.levels.iter().map(|l| l.level))
            .collect();
        levels.sort_by(f64::total_cmp);
        levels.dedup();

        // Columns: level-major, scheme-minor.
        let mut header = String::from("team_size");
        for &level in &levels {
            for &scheme in &schemes {
                write!(header, ",{level}_{scheme}").expect("writing to a String cannot fail");
            }
        }

        for (metric, pick) in [
            ("avg_reward", (|l| l.avg_reward) as fn(&crate::metrics::LevelStats) -> f64),
            ("efficiency", |l| l.efficiency),
        ] {
            let mut out = header.clone();
            out.push('\n');
            for &team_size in &team_sizes {
                write!(out, "{team_size}").expect("writing to a String cannot fail");
                for &level in &levels {
                    for &scheme in &schemes {
                        let report = cells.get(&(scheme, team_size)).ok_or_else(|| {
                            GridError::RaggedReports {
                                scenario: scenario.to_string(),
                            }
                        })?;
                        let stats = report
                            .levels
                            .iter()
                            .find(|l| l.level == level)
                            .ok_or_else(|| GridError::RaggedReports {
                                scenario: scenario.to_string(),
                            })?;
                        out.push(',');
                        out.push_str(&fmt6(pick(stats)));
                    }
                }
                out.push('\n');
            }
            let path = dir.join(format!("{scenario}_{metric}.csv"));
            write_file(&path, &out)?;
            written.push(path);
        }
    }
    Ok(written)
}
