//! Independent cross-checks for the engine.
//!
//! Everything in this module is deliberately primitive and shares no code
//! with the engine: its own generator (an xorshift64* rather than the
//! engine's splitmix-style mixer), its own arithmetic spelling of the timing
//! formula, and fixed team compositions instead of shuffles. The test suite
//! races both implementations against each other; agreement is evidence, not
//! circularity.
//!
//! Scenarios are tiny by design (at most 4 teams of at most 4 members) so
//! that brute-force sampling and interval reasoning stay exact and fast.

use thiserror::Error;

pub const MAX_TEAMS: usize = 4;
pub const MAX_MEMBERS: usize = 4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("scenario needs at least two teams")]
    TooFewTeams,
    #[error("scenario allows at most {MAX_TEAMS} teams, got {0}")]
    TooManyTeams(usize),
    #[error("team {team} has {got} members, allowed 1..={MAX_MEMBERS}")]
    BadTeamSize { team: usize, got: usize },
    #[error("performances must be positive finite numbers")]
    BadPerformance,
    #[error("workload factor range [{low}, {high}) is invalid")]
    BadRange { low: f64, high: f64 },
    #[error("sample count must be positive")]
    NoSamples,
}

/// A fixed race between a handful of small teams.
#[derive(Debug, Clone, PartialEq)]
pub struct TinyScenario {
    teams: Vec<Vec<f64>>,
    base_work: f64,
    workload_low: f64,
    workload_high: f64,
}

impl TinyScenario {
    pub fn new(
        teams: Vec<Vec<f64>>,
        base_work: f64,
        workload_low: f64,
        workload_high: f64,
    ) -> Result<Self, OracleError> {
        if teams.len() < 2 {
            return Err(OracleError::TooFewTeams);
        }
        if teams.len() > MAX_TEAMS {
            return Err(OracleError::TooManyTeams(teams.len()));
        }
        for (team, members) in teams.iter().enumerate() {
            if members.is_empty() || members.len() > MAX_MEMBERS {
                return Err(OracleError::BadTeamSize {
                    team,
                    got: members.len(),
                });
            }
            if members.iter().any(|p| !p.is_finite() || *p <= 0.0) {
                return Err(OracleError::BadPerformance);
            }
        }
        if !(base_work.is_finite() && base_work > 0.0) {
            return Err(OracleError::BadPerformance);
        }
        if !(workload_low > 0.0 && workload_low <= workload_high && workload_high.is_finite()) {
            return Err(OracleError::BadRange {
                low: workload_low,
                high: workload_high,
            });
        }
        Ok(TinyScenario {
            teams,
            base_work,
            workload_low,
            workload_high,
        })
    }

    /// Scenario with the standard 600 s workload and [0.8, 1.2) factor.
    pub fn with_defaults(teams: Vec<Vec<f64>>) -> Result<Self, OracleError> {
        TinyScenario::new(teams, 600.0, 0.8, 1.2)
    }

    pub fn teams(&self) -> &[Vec<f64>] {
        &self.teams
    }

    pub fn team_count(&self) -> usize {
        self.teams.len()
    }

    // One sampled completion time for a team. Same model as the engine but
    // spelled differently on purpose: base * u / (members * p).
    fn sample_team_time(&self, members: &[f64], rng: &mut XorShift64Star) -> f64 {
        let size = members.len() as f64;
        let mut total = 0.0;
        for &p in members {
            let u = self.workload_low + (self.workload_high - self.workload_low) * rng.next_f64();
            total += self.base_work * u / (size * p);
        }
        total
    }

    // Reachable completion-time interval of a team: every member at the low
    // (resp. high) end of the workload factor.
    fn time_interval(&self, members: &[f64]) -> (f64, f64) {
        let size = members.len() as f64;
        let inv_sum: f64 = members.iter().map(|p| self.base_work / (size * p)).sum();
        (inv_sum * self.workload_low, inv_sum * self.workload_high)
    }
}

/// If some team's *worst* possible time still beats every rival's *best*
/// possible time, that team wins with probability 1; return its index.
/// Returns `None` when no team dominates outright.
pub fn dominance_check(scenario: &TinyScenario) -> Option<usize> {
    let intervals: Vec<(f64, f64)> = scenario
        .teams
        .iter()
        .map(|m| scenario.time_interval(m))
        .collect();
    (0..intervals.len()).find(|&t| {
        intervals
            .iter()
            .enumerate()
            .all(|(other, &(low, _))| other == t || intervals[t].1 < low)
    })
}

/// Estimate each team's win probability by brute force: sample every team's
/// time `samples` times and tally the argmin (ties to the lowest index, the
/// same rule the game uses). Returns one probability per team, summing to 1.
pub fn win_probability_bruteforce(
    scenario: &TinyScenario,
    samples: usize,
    seed: u64,
) -> Result<Vec<f64>, OracleError> {
    if samples == 0 {
        return Err(OracleError::NoSamples);
    }
    let mut rng = XorShift64Star::new(seed);
    let mut wins = vec![0u64; scenario.team_count()];
    for _ in 0..samples {
        let mut best_team = 0;
        let mut best_time = f64::INFINITY;
        for (t, members) in scenario.teams.iter().enumerate() {
            let time = scenario.sample_team_time(members, &mut rng);
            if time < best_time {
                best_time = time;
                best_team = t;
            }
        }
        wins[best_team] += 1;
    }
    Ok(wins
        .iter()
        .map(|&w| w as f64 / samples as f64)
        .collect())
}

// Minimal xorshift64* generator — chosen precisely because it is NOT the
// generator the engine uses.
struct XorShift64Star {
    state: u64,
}

impl XorShift64Star {
    fn new(seed: u64) -> Self {
        XorShift64Star {
            // xorshift state must be non-zero.
            state: if seed == 0 { 0x4D59_5DF4_D0F3_3173 } else { seed },
        }
    }

    fn next_u64(&mut self) -> u64 {
        let mut x = self.state;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.state = x;
        x.wrapping_mul(0x2545_F491_4F6C_DD1D)
    }

    fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }
}
