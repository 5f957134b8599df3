//! Aggregation of run results into per-level reward and fairness statistics.
//!
//! All statistics are computed sequentially over the run list in run order,
//! so reports are bit-stable no matter how the runs themselves were
//! scheduled. `avg_reward` for a level is the mean over runs of that run's
//! mean cumulative reward across the level's participants; `sd_reward` is the
//! spread of those per-run means across runs (sample standard deviation,
//! n−1 divisor, 0 when there is a single run).

use thiserror::Error;

use crate::engine::RunResult;
use crate::model::{AllocationScheme, PerformanceDistribution, SimulationConfig};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("no run results to aggregate")]
    EmptyResults,
    #[error("run {run} reports {got} participants, expected {expected}")]
    PopulationMismatch {
        run: usize,
        expected: usize,
        got: usize,
    },
    #[error("cannot compute a gini coefficient of an empty population")]
    EmptyValues,
    #[error("gini coefficient requires non-negative values")]
    NegativeValue,
    #[error("gini coefficient is undefined when every value is zero")]
    AllZero,
    #[error("total average reward {total} deviates from the expected {expected}")]
    ConservationViolation { total: f64, expected: f64 },
}

/// Mean/spread of cumulative reward for one performance level.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelAverage {
    pub level: f64,
    pub population: usize,
    pub avg_reward: f64,
    pub sd_reward: f64,
}

/// Per-level block of a [`MetricsReport`].
#[derive(Debug, Clone, PartialEq)]
pub struct LevelStats {
    pub level: f64,
    pub population: usize,
    pub avg_reward: f64,
    pub sd_reward: f64,
    /// Reward per unit of performance: `avg_reward / level`.
    pub efficiency: f64,
}

/// One cell's aggregated statistics plus the config that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    /// Scenario label used in emitted files; defaults to the canonical
    /// distribution text when the cell is run outside a named grid.
    pub scenario: String,
    pub distribution: String,
    pub team_size: usize,
    pub scheme: AllocationScheme,
    pub rounds: usize,
    pub runs: usize,
    pub master_seed: u64,
    /// Ascending by level.
    pub levels: Vec<LevelStats>,
    /// Mean over runs of the per-run Gini coefficient of cumulative rewards.
    pub gini: f64,
}

/// Group cumulative rewards by performance level: for each level, the mean
/// over runs of the per-run participant mean, plus its across-run spread.
/// Levels come out ascending, mirroring the distribution's canonical order.
pub fn average_reward_by_level(
    results: &[RunResult],
    dist: &PerformanceDistribution,
) -> Result<Vec<LevelAverage>, MetricsError> {
    if results.is_empty() {
        return Err(MetricsError::EmptyResults);
    }
    let n = dist.population();
    for (run, r) in results.iter().enumerate() {
        if r.cumulative_reward.len() != n {
            return Err(MetricsError::PopulationMismatch {
                run,
                expected: n,
                got: r.cumulative_reward.len(),
            });
        }
    }

    // Expansion orders participants by ascending level, so each level owns a
    // contiguous id block.
    let mut averages = Vec::with_capacity(dist.entries().len());
    let mut offset = 0;
    for entry in dist.entries() {
        let block = offset..offset + entry.count;
        let per_run_means: Vec<f64> = results
            .iter()
            .map(|r| r.cumulative_reward[block.clone()].iter().sum::<f64>() / entry.count as f64)
            .collect();
        let mean = per_run_means.iter().sum::<f64>() / per_run_means.len() as f64;
        let sd = if per_run_means.len() < 2 {
            0.0
        } else {
            let ss: f64 = per_run_means.iter().map(|m| (m - mean) * (m - mean)).sum();
            (ss / (per_run_means.len() - 1) as f64).sqrt()
        };
        averages.push(LevelAverage {
            level: entry.level,
            population: entry.count,
            avg_reward: mean,
            sd_reward: sd,
        });
        offset += entry.count;
    }
    Ok(averages)
}

/// Reward earned per unit of contributed performance, per level.
pub fn efficiency_by_level(averages: &[LevelAverage]) -> Vec<(f64, f64)> {
    averages
        .iter()
        .map(|a| (a.level, a.avg_reward / a.level))
        .collect()
}

/// Standard Gini coefficient of a non-negative sample with a positive total.
/// 0 for perfect equality; (n−1)/n when one participant holds everything.
pub fn gini_coefficient(values: &[f64]) -> Result<f64, MetricsError> {
    if values.is_empty() {
        return Err(MetricsError::EmptyValues);
    }
    if values.iter().any(|&v| v < 0.0) {
        return Err(MetricsError::NegativeValue);
    }
    let total: f64 = values.iter().sum();
    if total == 0.0 {
        return Err(MetricsError::AllZero);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    // G = sum_i (2i - n - 1) x_(i) / (n * total), i = 1..n ascending.
    let weighted: f64 = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| (2.0 * (i as f64 + 1.0) - n - 1.0) * x)
        .sum();
    Ok(weighted / (n * total))
}

/// Aggregate an experiment's runs into a report and enforce the conservation
/// invariant: the per-level averages, weighted by level population, must add
/// up to `rounds * round_reward` (within 1e-6 relative).
pub fn build_report(
    scenario: &str,
    cfg: &SimulationConfig,
    results: &[RunResult],
) -> Result<MetricsReport, MetricsError> {
    let averages = average_reward_by_level(results, &cfg.distribution)?;

    let total: f64 = averages
        .iter()
        .map(|a| a.avg_reward * a.population as f64)
        .sum();
    let expected = cfg.rounds as f64 * cfg.round_reward;
    if (total - expected).abs() > 1e-6 * expected {
        return Err(MetricsError::ConservationViolation { total, expected });
    }

    let gini_sum = results
        .iter()
        .map(|r| gini_coefficient(&r.cumulative_reward))
        .sum::<Result<f64, _>>()?;

    let levels = averages
        .into_iter()
        .map(|a| LevelStats {
            level: a.level,
            population: a.population,
            avg_reward: a.avg_reward,
            sd_reward: a.sd_reward,
            efficiency: a.avg_reward / a.level,
        })
        .collect();

    Ok(MetricsReport {
        scenario: scenario.to_string(),
        distribution: cfg.distribution.spec_string(),
        team_size: cfg.team_size,
        scheme: cfg.scheme,
        rounds: cfg.rounds,
        runs: cfg.runs,
        master_seed: cfg.master_seed,
        levels,
        gini: gini_sum / results.len() as f64,
    })
}
