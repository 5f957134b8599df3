//! Round execution: shuffle the population into teams, race the teams, pay
//! the winner.
//!
//! A team's completion time is the *sum* of its members' times — the workload
//! is a relay of equal slices, one per member, so every member's pace matters
//! and a single fast node speeds its team up by at most its own slice. Member
//! times are `(base_work / team_size) * u / performance` with a fresh workload
//! factor `u ~ U[low, high)` drawn per member per round.
//!
//! Determinism: a run consumes exactly one [`RngStream`] in a fixed order
//! (shuffle first, then one draw per member in team order), so a run seed
//! fully determines every time, winner, and payout. Runs of an experiment use
//! seeds derived via [`split_seed`] and may execute on any number of worker
//! threads without changing results.

use rayon::prelude::*;

use crate::model::{AllocationScheme, ConfigError, SimulationConfig};
use crate::rng::{split_seed, RngStream};

/// A round's partition of the population into equal-size teams: consecutive
/// blocks of a shuffled id array. Team t is `order[t*size .. (t+1)*size]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TeamAssignment {
    order: Vec<usize>,
    team_size: usize,
}

impl TeamAssignment {
    /// Wrap an explicit participant order (mostly for tests and cross-checks
    /// against fixed team layouts). The order must be a permutation of
    /// 0..len and divide evenly into teams.
    pub fn from_order(order: Vec<usize>, team_size: usize) -> Result<Self, ConfigError> {
        if team_size == 0 {
            return Err(ConfigError::ZeroTeamSize);
        }
        if !order.len().is_multiple_of(team_size) {
            return Err(ConfigError::UnevenTeams {
                population: order.len(),
                team_size,
            });
        }
        let mut seen = vec![false; order.len()];
        for &id in &order {
            assert!(
                id < order.len() && !seen[id],
                "order is not a permutation of 0..{}",
                order.len()
            );
            seen[id] = true;
        }
        Ok(TeamAssignment { order, team_size })
    }

    pub fn team_size(&self) -> usize {
        self.team_size
    }

    pub fn team_count(&self) -> usize {
        self.order.len() / self.team_size
    }

    pub fn participant_count(&self) -> usize {
        self.order.len()
    }

    /// Member ids of team `index`, in draw order.
    pub fn team(&self, index: usize) -> &[usize] {
        &self.order[index * self.team_size..(index + 1) * self.team_size]
    }

    /// All teams in index order.
    pub fn teams(&self) -> impl Iterator<Item = &[usize]> {
        self.order.chunks_exact(self.team_size)
    }
}

/// Uniformly shuffle `population_size` participants into teams of
/// `team_size`. Consumes the stream's next `population_size - 1` draws.
pub fn assign_teams(
    rng: &mut RngStream,
    population_size: usize,
    team_size: usize,
) -> Result<TeamAssignment, ConfigError> {
    if team_size == 0 {
        return Err(ConfigError::ZeroTeamSize);
    }
    if !population_size.is_multiple_of(team_size) {
        return Err(ConfigError::UnevenTeams {
            population: population_size,
            team_size,
        });
    }
    let mut order: Vec<usize> = (0..population_size).collect();
    rng.shuffle(&mut order);
    Ok(TeamAssignment { order, team_size })
}

#[inline]
fn draw_member_time(rng: &mut RngStream, slice: f64, performance: f64, low: f64, high: f64) -> f64 {
    debug_assert!(performance > 0.0);
    slice * rng.uniform(low, high) / performance
}

/// Time one member needs for its slice of the base workload this round.
/// Always within `[slice * low / p, slice * high / p)`.
pub fn member_time(rng: &mut RngStream, performance: f64, cfg: &SimulationConfig) -> f64 {
    let slice = cfg.base_work / cfg.team_size as f64;
    draw_member_time(rng, slice, performance, cfg.workload_low, cfg.workload_high)
}

/// Total completion time of a team: the sum of its members' slice times,
/// drawn in member order.
pub fn team_time(
    rng: &mut RngStream,
    team: &[usize],
    performances: &[f64],
    cfg: &SimulationConfig,
) -> f64 {
    let slice = cfg.base_work / cfg.team_size as f64;
    let mut total = 0.0;
    for &id in team {
        total += draw_member_time(
            rng,
            slice,
            performances[id],
            cfg.workload_low,
            cfg.workload_high,
        );
    }
    total
}

/// Split a round's reward among the winning team's members. The returned
/// shares align with the member order and sum to `reward` (up to float
/// rounding). Allocation never touches the RNG, so the choice of scheme
/// cannot perturb timing or winners.
pub fn allocate_rewards(
    member_performances: &[f64],
    scheme: AllocationScheme,
    reward: f64,
) -> Vec<f64> {
    match scheme {
        AllocationScheme::EqualShare => {
            let share = reward / member_performances.len() as f64;
            vec![share; member_performances.len()]
        }
        AllocationScheme::Proportional => {
            let total: f64 = member_performances.iter().sum();
            member_performances
                .iter()
                .map(|p| reward * p / total)
                .collect()
        }
    }
}

/// Outcome of a single round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundResult {
    pub round_index: usize,
    /// Completion time per team, indexed like the assignment's teams.
    pub team_times: Vec<f64>,
    /// Winning team index: minimal time, ties to the lowest index.
    pub winner: usize,
    /// `(participant id, coins)` for each member of the winning team, in
    /// team order. Everyone else earned nothing this round.
    pub payouts: Vec<(usize, f64)>,
}

/// Race all teams once and pay the winner.
pub fn run_round(
    rng: &mut RngStream,
    round_index: usize,
    assignment: &TeamAssignment,
    performances: &[f64],
    cfg: &SimulationConfig,
) -> RoundResult {
    let mut team_times = Vec::with_capacity(assignment.team_count());
    for team in assignment.teams() {
        team_times.push(team_time(rng, team, performances, cfg));
    }

    let mut winner = 0;
    for (t, &time) in team_times.iter().enumerate() {
        if time < team_times[winner] {
            winner = t;
        }
    }

    let members = assignment.team(winner);
    let member_performances: Vec<f64> = members.iter().map(|&id| performances[id]).collect();
    let shares = allocate_rewards(&member_performances, cfg.scheme, cfg.round_reward);
    let payouts = members.iter().copied().zip(shares).collect();

    RoundResult {
        round_index,
        team_times,
        winner,
        payouts,
    }
}

/// Per-participant totals accumulated over one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    /// Coins accumulated per participant id.
    pub cumulative_reward: Vec<f64>,
    /// Rounds won (as a member of the winning team) per participant id.
    pub win_counts: Vec<u64>,
}

/// Play `cfg.rounds` rounds with a fresh stream seeded from `run_seed`.
/// Single-threaded and pure: the (config, seed) pair fully determines the
/// result.
pub fn run_simulation(cfg: &SimulationConfig, run_seed: u64) -> Result<RunResult, ConfigError> {
    cfg.validate()?;
    let population = cfg.distribution.expand_population();
    let performances: Vec<f64> = population.iter().map(|p| p.performance).collect();
    let n = performances.len();

    let mut rng = RngStream::seed_from(run_seed);
    let mut cumulative_reward = vec![0.0; n];
    let mut win_counts = vec![0u64; n];

    for round_index in 0..cfg.rounds {
        let assignment = assign_teams(&mut rng, n, cfg.team_size)?;
        let round = run_round(&mut rng, round_index, &assignment, &performances, cfg);
        for &(id, coins) in &round.payouts {
            cumulative_reward[id] += coins;
            win_counts[id] += 1;
        }
    }

    Ok(RunResult {
        cumulative_reward,
        win_counts,
    })
}

/// Execute `cfg.runs` independent runs; run `i` is seeded with
/// `split_seed(cfg.master_seed, i)`. Runs may be scheduled across any number
/// of rayon workers — results are collected by run index, so the output is
/// identical to running them sequentially.
pub fn run_experiment(cfg: &SimulationConfig) -> Result<Vec<RunResult>, ConfigError> {
    cfg.validate()?;
    (0..cfg.runs)
        .into_par_iter()
        .map(|i| run_simulation(cfg, split_seed(cfg.master_seed, i as u64)))
        .collect()
}
