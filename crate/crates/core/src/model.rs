//! Domain types: performance distributions, participants, allocation schemes,
//! and the per-cell simulation configuration.
//!
//! A population is described compactly as `level:count` pairs — `"1:800,2:800"`
//! is 800 participants at performance 1 and 800 at performance 2. Parsing is
//! whitespace-insensitive and canonicalizes entries by ascending level, so two
//! spellings of the same population compare equal and serialize identically.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub const DEFAULT_BASE_WORK: f64 = 600.0;
pub const DEFAULT_ROUND_REWARD: f64 = 10.0;
pub const DEFAULT_ROUNDS: usize = 1000;
pub const DEFAULT_RUNS: usize = 100;
pub const DEFAULT_WORKLOAD_LOW: f64 = 0.8;
pub const DEFAULT_WORKLOAD_HIGH: f64 = 1.2;
pub const DEFAULT_TEAM_SIZES: [usize; 7] = [1, 2, 4, 8, 16, 32, 64];

/// How a round's reward is divided among the winning team's members.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AllocationScheme {
    /// Every member receives reward / team_size.
    EqualShare,
    /// Member i receives reward * p_i / sum of the team's performances.
    Proportional,
}

impl AllocationScheme {
    /// Stable identifier used in CSV output and CLI flags.
    pub fn label(self) -> &'static str {
        match self {
            AllocationScheme::EqualShare => "equal",
            AllocationScheme::Proportional => "proportional",
        }
    }
}

impl fmt::Display for AllocationScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for AllocationScheme {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "equal" => Ok(AllocationScheme::EqualShare),
            "proportional" => Ok(AllocationScheme::Proportional),
            other => Err(ConfigError::UnknownScheme(other.to_string())),
        }
    }
}

/// One `level:count` group of a distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistributionEntry {
    pub level: f64,
    pub count: usize,
}

/// Validated, canonical population description.
///
/// Invariants held by construction: at least one entry, every level finite and
/// positive, every count positive, levels strictly ascending (no duplicates).
#[derive(Debug, Clone, PartialEq)]
pub struct PerformanceDistribution {
    entries: Vec<DistributionEntry>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistributionError {
    #[error("distribution is empty")]
    Empty,
    #[error("malformed distribution entry `{0}`, expected `level:count`")]
    Syntax(String),
    #[error("performance level must be a positive finite number, got `{0}`")]
    BadLevel(String),
    #[error("participant count must be a positive integer, got `{0}`")]
    BadCount(String),
    #[error("duplicate performance level {0}")]
    DuplicateLevel(f64),
}

impl PerformanceDistribution {
    /// Build from raw entries; sorts by level and enforces the invariants.
    pub fn new(mut entries: Vec<DistributionEntry>) -> Result<Self, DistributionError> {
        if entries.is_empty() {
            return Err(DistributionError::Empty);
        }
        for e in &entries {
            if !e.level.is_finite() || e.level <= 0.0 {
                return Err(DistributionError::BadLevel(e.level.to_string()));
            }
            if e.count == 0 {
                return Err(DistributionError::BadCount("0".to_string()));
            }
        }
        entries.sort_by(|a, b| a.level.total_cmp(&b.level));
        for pair in entries.windows(2) {
            if pair[0].level == pair[1].level {
                return Err(DistributionError::DuplicateLevel(pair[0].level));
            }
        }
        Ok(PerformanceDistribution { entries })
    }

    /// Parse the `level:count[,level:count...]` grammar. Whitespace is
    /// ignored everywhere; entry order does not matter.
    pub fn parse(text: &str) -> Result<Self, DistributionError> {
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(DistributionError::Empty);
        }
        let mut entries = Vec::new();
        for raw in compact.split(',') {
            let Some((level_text, count_text)) = raw.split_once(':') else {
                return Err(DistributionError::Syntax(raw.to_string()));
            };
            if level_text.is_empty() || count_text.is_empty() {
                return Err(DistributionError::Syntax(raw.to_string()));
            }
            let level: f64 = level_text
                .parse()
                .map_err(|_| DistributionError::Syntax(raw.to_string()))?;
            if !level.is_finite() || level <= 0.0 {
                return Err(DistributionError::BadLevel(level_text.to_string()));
            }
            let count: usize = count_text
                .parse()
                .map_err(|_| DistributionError::Syntax(raw.to_string()))?;
            if count == 0 {
                return Err(DistributionError::BadCount(count_text.to_string()));
            }
            entries.push(DistributionEntry { level, count });
        }
        PerformanceDistribution::new(entries)
    }

    pub fn entries(&self) -> &[DistributionEntry] {
        &self.entries
    }

    /// Total number of participants.
    pub fn population(&self) -> usize {
        self.entries.iter().map(|e| e.count).sum()
    }

    /// Canonical text form; parsing it back yields an equal distribution.
    pub fn spec_string(&self) -> String {
        let parts: Vec<String> = self
            .entries
            .iter()
            .map(|e| format!("{}:{}", e.level, e.count))
            .collect();
        parts.join(",")
    }

    /// Materialize the population: ids 0..n-1, grouped by ascending level.
    pub fn expand_population(&self) -> Vec<Participant> {
        let mut participants = Vec::with_capacity(self.population());
        for e in &self.entries {
            for _ in 0..e.count {
                participants.push(Participant {
                    id: participants.len(),
                    performance: e.level,
                });
            }
        }
        participants
    }
}

impl fmt::Display for PerformanceDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.spec_string())
    }
}

impl FromStr for PerformanceDistribution {
    type Err = DistributionError;

    fn from_str(s: &str) -> Result<Self, DistributionError> {
        PerformanceDistribution::parse(s)
    }
}

/// One simulated node. `performance` is static for the whole experiment;
/// higher means faster.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Participant {
    pub id: usize,
    pub performance: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error(transparent)]
    Distribution(#[from] DistributionError),
    #[error("team size must be at least 1")]
    ZeroTeamSize,
    #[error("population {population} is not divisible by team size {team_size}")]
    UnevenTeams { population: usize, team_size: usize },
    #[error("workload factor range [{low}, {high}) is invalid, need 0 < low <= high")]
    BadWorkloadRange { low: f64, high: f64 },
    #[error("base work must be a positive finite number, got {0}")]
    BadBaseWork(f64),
    #[error("round reward must be a positive finite number, got {0}")]
    BadRoundReward(f64),
    #[error("rounds must be at least 1")]
    ZeroRounds,
    #[error("runs must be at least 1")]
    ZeroRuns,
    #[error("unknown allocation scheme `{0}`, expected `equal` or `proportional`")]
    UnknownScheme(String),
}

/// Everything one simulation cell needs: population, team size, scheme,
/// workload model, horizon, and the master seed its runs derive from.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub distribution: PerformanceDistribution,
    pub team_size: usize,
    pub scheme: AllocationScheme,
    pub rounds: usize,
    pub runs: usize,
    pub base_work: f64,
    pub round_reward: f64,
    pub workload_low: f64,
    pub workload_high: f64,
    pub master_seed: u64,
}

impl SimulationConfig {
    /// Config with the standard experiment defaults (600 s base work, 10
    /// coins per round, 1000 rounds, 100 runs, workload factor [0.8, 1.2)).
    pub fn new(
        distribution: PerformanceDistribution,
        team_size: usize,
        scheme: AllocationScheme,
    ) -> Self {
        SimulationConfig {
            distribution,
            team_size,
            scheme,
            rounds: DEFAULT_ROUNDS,
            runs: DEFAULT_RUNS,
            base_work: DEFAULT_BASE_WORK,
            round_reward: DEFAULT_ROUND_REWARD,
            workload_low: DEFAULT_WORKLOAD_LOW,
            workload_high: DEFAULT_WORKLOAD_HIGH,
            master_seed: 0,
        }
    }

    pub fn with_seed(mut self, master_seed: u64) -> Self {
        self.master_seed = master_seed;
        self
    }

    pub fn population_size(&self) -> usize {
        self.distribution.population()
    }

    pub fn team_count(&self) -> usize {
        self.population_size() / self.team_size
    }

    /// Check every numeric constraint; the engine refuses unvalidated configs.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.team_size == 0 {
            return Err(ConfigError::ZeroTeamSize);
        }
        let population = self.population_size();
        if !population.is_multiple_of(self.team_size) {
            return Err(ConfigError::UnevenTeams {
                population,
                team_size: self.team_size,
            });
        }
        if !(self.workload_low > 0.0
            && self.workload_low <= self.workload_high
            && self.workload_high.is_finite())
        {
            return Err(ConfigError::BadWorkloadRange {
                low: self.workload_low,
                high: self.workload_high,
            });
        }
        if !self.base_work.is_finite() || self.base_work <= 0.0 {
            return Err(ConfigError::BadBaseWork(self.base_work));
        }
        if !self.round_reward.is_finite() || self.round_reward <= 0.0 {
            return Err(ConfigError::BadRoundReward(self.round_reward));
        }
        if self.rounds == 0 {
            return Err(ConfigError::ZeroRounds);
        }
        if self.runs == 0 {
            return Err(ConfigError::ZeroRuns);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(text: &str) -> PerformanceDistribution {
        PerformanceDistribution::parse(text).unwrap()
    }

    #[test]
    fn parses_basic_two_class() {
        let d = dist("1:800,2:800");
        assert_eq!(d.entries().len(), 2);
        assert_eq!(d.population(), 1600);
        assert_eq!(d.entries()[0].level, 1.0);
        assert_eq!(d.entries()[1].count, 800);
    }

    #[test]
    fn whitespace_is_ignored() {
        assert_eq!(dist(" 1 : 800 ,\t2 : 800 "), dist("1:800,2:800"));
    }

    #[test]
    fn entry_order_is_canonicalized() {
        let a = dist("2:800,1:800");
        let b = dist("1:800,2:800");
        assert_eq!(a, b);
        assert_eq!(a.spec_string(), "1:800,2:800");
    }

    #[test]
    fn fractional_and_scientific_levels_parse() {
        let d = dist("1.5:10,1e2:5");
        assert_eq!(d.entries()[0].level, 1.5);
        assert_eq!(d.entries()[1].level, 100.0);
    }

    #[test]
    fn display_round_trips() {
        for text in ["1:800,2:800", "0.5:3,1.25:7,100:1", "1:1599,100:1"] {
            let d = dist(text);
            assert_eq!(dist(&d.to_string()), d);
        }
    }

    #[test]
    fn zero_level_is_a_domain_error() {
        assert!(matches!(
            PerformanceDistribution::parse("0:5"),
            Err(DistributionError::BadLevel(_))
        ));
    }

    #[test]
    fn negative_and_non_finite_levels_rejected() {
        assert!(matches!(
            PerformanceDistribution::parse("-1:5"),
            Err(DistributionError::BadLevel(_))
        ));
        assert!(matches!(
            PerformanceDistribution::parse("inf:5"),
            Err(DistributionError::BadLevel(_))
        ));
        assert!(matches!(
            PerformanceDistribution::parse("nan:5"),
            Err(DistributionError::BadLevel(_))
        ));
    }

    #[test]
    fn zero_count_is_a_domain_error() {
        assert!(matches!(
            PerformanceDistribution::parse("1:0"),
            Err(DistributionError::BadCount(_))
        ));
    }

    #[test]
    fn syntax_errors_are_distinguished() {
        for text in ["1:800,", "1-800", ":5", "1:", "1:800,,2:800", "a:5", "1:b"] {
            assert!(
                matches!(
                    PerformanceDistribution::parse(text),
                    Err(DistributionError::Syntax(_)) | Err(DistributionError::Empty)
                ),
                "expected syntax error for {text:?}"
            );
        }
    }

    #[test]
    fn duplicate_levels_rejected() {
        assert!(matches!(
            PerformanceDistribution::parse("1:800,1:1"),
            Err(DistributionError::DuplicateLevel(_))
        ));
    }

    #[test]
    fn empty_input_rejected() {
        assert!(matches!(
            PerformanceDistribution::parse(""),
            Err(DistributionError::Empty)
        ));
        assert!(matches!(
            PerformanceDistribution::parse("   "),
            Err(DistributionError::Empty)
        ));
    }

    #[test]
    fn expansion_is_ascending_with_contiguous_ids() {
        let d = dist("2:3,1:2");
        let pop = d.expand_population();
        assert_eq!(pop.len(), 5);
        let perfs: Vec<f64> = pop.iter().map(|p| p.performance).collect();
        assert_eq!(perfs, vec![1.0, 1.0, 2.0, 2.0, 2.0]);
        for (i, p) in pop.iter().enumerate() {
            assert_eq!(p.id, i);
        }
    }

    #[test]
    fn ten_layer_population_totals_1600() {
        let d = dist("1:800,2:400,3:200,4:100,5:50,6:30,7:10,8:5,9:3,10:2");
        assert_eq!(d.population(), 1600);
        assert_eq!(d.expand_population().len(), 1600);
    }

    #[test]
    fn config_defaults_validate() {
        let cfg = SimulationConfig::new(dist("1:800,2:800"), 64, AllocationScheme::EqualShare);
        assert_eq!(cfg.rounds, 1000);
        assert_eq!(cfg.runs, 100);
        assert_eq!(cfg.base_work, 600.0);
        assert_eq!(cfg.round_reward, 10.0);
        assert_eq!(cfg.team_count(), 25);
        cfg.validate().unwrap();
    }

    #[test]
    fn divisibility_is_enforced_with_both_numbers_reported() {
        let cfg = SimulationConfig::new(dist("1:1000"), 3, AllocationScheme::EqualShare);
        match cfg.validate() {
            Err(ConfigError::UnevenTeams {
                population,
                team_size,
            }) => {
                assert_eq!((population, team_size), (1000, 3));
            }
            other => panic!("expected divisibility error, got {other:?}"),
        }
    }

    #[test]
    fn workload_range_must_be_positive_and_ordered() {
        let mut cfg = SimulationConfig::new(dist("1:4"), 2, AllocationScheme::EqualShare);
        cfg.workload_low = 0.0;
        assert!(matches!(
            cfg.validate(),
            Err(ConfigError::BadWorkloadRange { .. })
        ));
        cfg.workload_low = 1.3;
        cfg.workload_high = 1.2;
        assert!(matches!(
            cfg.validate(),
            Err(ConfigError::BadWorkloadRange { .. })
        ));
        // Degenerate but legal: low == high pins the factor to a constant.
        cfg.workload_low = 1.0;
        cfg.workload_high = 1.0;
        cfg.validate().unwrap();
    }

    #[test]
    fn remaining_numeric_guards() {
        let base = SimulationConfig::new(dist("1:4"), 2, AllocationScheme::EqualShare);

        let mut cfg = base.clone();
        cfg.team_size = 0;
        assert!(matches!(cfg.validate(), Err(ConfigError::ZeroTeamSize)));

        let mut cfg = base.clone();
        cfg.base_work = -1.0;
        assert!(matches!(cfg.validate(), Err(ConfigError::BadBaseWork(_))));

        let mut cfg = base.clone();
        cfg.round_reward = 0.0;
        assert!(matches!(
            cfg.validate(),
            Err(ConfigError::BadRoundReward(_))
        ));

        let mut cfg = base.clone();
        cfg.rounds = 0;
        assert!(matches!(cfg.validate(), Err(ConfigError::ZeroRounds)));

        let mut cfg = base;
        cfg.runs = 0;
        assert!(matches!(cfg.validate(), Err(ConfigError::ZeroRuns)));
    }

    #[test]
    fn scheme_labels_round_trip() {
        for scheme in [AllocationScheme::EqualShare, AllocationScheme::Proportional] {
            assert_eq!(scheme.label().parse::<AllocationScheme>().unwrap(), scheme);
        }
        assert!("both".parse::<AllocationScheme>().is_err());
    }
}
