//! Ensemble simulation of quantum-like and Bayesian investors.
//!
//! Every agent draws from its own ChaCha8 stream keyed by
//! `(scenario seed, agent index, period)`, so results do not depend on how
//! rayon schedules the per-agent work. Aggregation only ever sums integer
//! counts, which keeps the period barrier order-independent too.

use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::classical::classical_agent_step;
use crate::error::{check_dim, invalid, Error, Result};
use crate::hilbert::{Hamiltonian, Matrix, Observable, StateVector};
use crate::measurement::{born_distribution, collapse_group, JointEntry, JointTable, OutcomeDistribution, OutcomeProbability, COLLAPSE_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentKind {
    Quantum,
    Classical,
}

/// Identically prepared agents sharing one initial belief state.
#[derive(Clone, Debug)]
pub struct AgentPopulation {
    pub name: String,
    pub count: usize,
    pub initial_state: StateVector,
    pub kind: AgentKind,
}

impl AgentPopulation {
    pub fn new(name: impl Into<String>, count: usize, initial_state: StateVector, kind: AgentKind) -> Result<Self> {
        if count == 0 {
            return Err(invalid("population count must be at least 1"));
        }
        Ok(Self { name: name.into(), count, initial_state, kind })
    }

    pub fn quantum(count: usize, initial_state: StateVector) -> Result<Self> {
        Self::new("quantum", count, initial_state, AgentKind::Quantum)
    }
}

/// Information arriving during one period: the state evolves under
/// `hamiltonian` for `duration` before the period's measurement.
#[derive(Clone, Debug)]
pub struct NewsEntry {
    pub hamiltonian: Hamiltonian,
    pub duration: f64,
    /// Measurement basis for this period, if it differs from the scenario's price observable.
    pub observable: Option<Observable>,
}

/// Per-period news. A single entry is applied to every period.
#[derive(Clone, Debug)]
pub struct NewsSchedule {
    entries: Vec<NewsEntry>,
}

impl NewsSchedule {
    pub fn new(entries: Vec<NewsEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(invalid("news schedule needs at least one entry"));
        }
        for (k, e) in entries.iter().enumerate() {
            if !(e.duration.is_finite() && e.duration >= 0.0) {
                return Err(invalid(format!("news entry {k}: duration {} must be finite and >= 0", e.duration)));
            }
        }
        Ok(Self { entries })
    }

    /// Zero Hamiltonian in every period.
    pub fn quiet(dim: usize) -> Self {
        Self { entries: vec![NewsEntry { hamiltonian: Hamiltonian::zero(dim), duration: 0.0, observable: None }] }
    }

    pub fn repeating(hamiltonian: Hamiltonian, duration: f64) -> Result<Self> {
        Self::new(vec![NewsEntry { hamiltonian, duration, observable: None }])
    }

    pub fn entries(&self) -> &[NewsEntry] {
        &self.entries
    }

    pub fn entry(&self, period: usize) -> &NewsEntry {
        if self.entries.len() == 1 {
            &self.entries[0]
        } else {
            &self.entries[period]
        }
    }
}

/// One simulated trading period.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PeriodRecord {
    /// 1-based period number.
    pub period: usize,
    pub price_start: f64,
    pub up_fraction: f64,
    pub down_fraction: f64,
    pub price_end: f64,
    /// Up fraction of each population, in scenario order.
    pub population_up: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PricePath {
    pub initial_price: f64,
    pub periods: Vec<PeriodRecord>,
}

impl PricePath {
    /// Initial price followed by the closing price of each period.
    pub fn prices(&self) -> Vec<f64> {
        std::iter::once(self.initial_price).chain(self.periods.iter().map(|p| p.price_end)).collect()
    }
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub seed: u64,
    pub populations: Vec<AgentPopulation>,
    pub news: NewsSchedule,
    pub price_observable: Observable,
    /// Price impact coefficient λ in `price · (1 + λ (f₊ - f₋))`.
    pub impact: f64,
    pub initial_price: f64,
    pub periods: usize,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.periods == 0 {
            return Err(invalid("period count must be at least 1"));
        }
        if !(self.impact.is_finite() && self.impact >= 0.0) {
            return Err(invalid(format!("impact coefficient {} must be finite and >= 0", self.impact)));
        }
        if !(self.initial_price.is_finite() && self.initial_price > 0.0) {
            return Err(invalid(format!("initial price {} must be finite and > 0", self.initial_price)));
        }
        if self.populations.is_empty() {
            return Err(invalid("scenario needs at least one population"));
        }
        let d = self.price_observable.dim();
        check_signed_outcomes(&self.price_observable)?;
        for p in &self.populations {
            if p.count == 0 {
                return Err(invalid(format!("population {}: count must be at least 1", p.name)));
            }
            check_dim(d, p.initial_state.dim())?;
        }
        let n = self.news.entries.len();
        if n != 1 && n != self.periods {
            return Err(invalid(format!("news schedule has {n} entries; expected 1 or {}", self.periods)));
        }
        for e in &self.news.entries {
            check_dim(d, e.hamiltonian.dim())?;
            if let Some(obs) = &e.observable {
                check_dim(d, obs.dim())?;
                check_signed_outcomes(obs)?;
                if obs.outcome_count() != self.price_observable.outcome_count() {
                    return Err(invalid("per-period observable must have as many outcomes as the price observable"));
                }
            }
        }
        Ok(())
    }
}

fn check_signed_outcomes(obs: &Observable) -> Result<()> {
    if obs.outcomes().iter().any(|&v| v == 0.0) {
        return Err(invalid("price observable outcomes must be nonzero (positive = up, negative = down)"));
    }
    Ok(())
}

/// Deterministic random stream for one agent in one period.
pub fn agent_rng(seed: u64, agent: u64, period: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(agent);
    rng.set_word_pos(u128::from(period) << 32);
    rng
}

/// Draws an outcome group by inverse CDF over outcomes in descending
/// eigenvalue order and returns it with the collapsed state.
fn sample_group<R: Rng + ?Sized>(psi: &StateVector, obs: &Observable, rng: &mut R) -> (usize, StateVector) {
    let u: f64 = rng.random();
    let mut cumulative = 0.0;
    let mut chosen = None;
    for g in 0..obs.outcome_count() {
        let p = obs.group_probability(psi, g);
        if p < COLLAPSE_TOL {
            continue;
        }
        cumulative += p;
        chosen = Some(g);
        if u < cumulative {
            break;
        }
    }
    let g = chosen.expect("a normalized state has at least one possible outcome");
    let (_, post) = collapse_group(psi, obs, g);
    (g, post.expect("chosen outcome has nonzero probability"))
}

/// Measures `obs` on `psi` with randomness from `rng`; returns the outcome and
/// the collapsed state.
pub fn sample_measurement<R: Rng + ?Sized>(psi: &StateVector, obs: &Observable, rng: &mut R) -> Result<(f64, StateVector)> {
    check_dim(obs.dim(), psi.dim())?;
    let (g, post) = sample_group(psi, obs, rng);
    Ok((obs.outcome_value(g), post))
}

fn require_quantum(population: &AgentPopulation, obs: &Observable) -> Result<()> {
    if population.kind != AgentKind::Quantum {
        return Err(invalid(format!(
            "population {} is classical; ensemble measurement needs quantum agents",
            population.name
        )));
    }
    check_dim(obs.dim(), population.initial_state.dim())
}

fn tally(groups: impl ParallelIterator<Item = usize>, n: usize) -> Vec<u64> {
    groups
        .fold(
            || vec![0u64; n],
            |mut acc, g| {
                acc[g] += 1;
                acc
            },
        )
        .reduce(
            || vec![0u64; n],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        )
}

/// Empirical outcome frequencies of one measurement over the population.
pub fn run_ensemble(population: &AgentPopulation, obs: &Observable, seed: u64) -> Result<OutcomeDistribution> {
    require_quantum(population, obs)?;
    let psi = &population.initial_state;
    let counts = tally(
        (0..population.count as u64).into_par_iter().map(|agent| {
            let mut rng = agent_rng(seed, agent, 0);
            sample_group(psi, obs, &mut rng).0
        }),
        obs.outcome_count(),
    );
    let n = population.count as f64;
    let entries = counts
        .iter()
        .enumerate()
        .map(|(g, &c)| OutcomeProbability { outcome: obs.outcome_value(g), probability: c as f64 / n })
        .collect();
    Ok(OutcomeDistribution { entries })
}

/// Which of the two observables is measured first.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeasurementOrder {
    IThenJ,
    JThenI,
}

/// Each agent measures both observables in the given order, collapsing in
/// between. The table's first column is the observable measured first.
pub fn run_sequential_ensemble(
    population: &AgentPopulation,
    obs_i: &Observable,
    obs_j: &Observable,
    order: MeasurementOrder,
    seed: u64,
) -> Result<JointTable> {
    require_quantum(population, obs_i)?;
    check_dim(obs_i.dim(), obs_j.dim())?;
    let (first, second) = match order {
        MeasurementOrder::IThenJ => (obs_i, obs_j),
        MeasurementOrder::JThenI => (obs_j, obs_i),
    };
    let nb = second.outcome_count();
    let psi = &population.initial_state;
    let counts = tally(
        (0..population.count as u64).into_par_iter().map(|agent| {
            let mut rng = agent_rng(seed, agent, 0);
            let (a, mid) = sample_group(psi, first, &mut rng);
            let (b, _) = sample_group(&mid, second, &mut rng);
            a * nb + b
        }),
        first.outcome_count() * nb,
    );
    Ok(counts_to_table(&counts, first.outcomes(), second.outcomes(), population.count))
}

fn counts_to_table(counts: &[u64], first: Vec<f64>, second: Vec<f64>, total: usize) -> JointTable {
    let nb = second.len();
    let rows = counts
        .iter()
        .enumerate()
        .map(|(k, &c)| JointEntry { first: first[k / nb], second: second[k % nb], probability: c as f64 / total as f64 })
        .collect();
    JointTable { first_observable: "first".into(), second_observable: "second".into(), rows }
}

/// Classical two-stage model: `p(α)` for the first question and `p(β | α)` for the second.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalJointModel {
    first_outcomes: Vec<f64>,
    second_outcomes: Vec<f64>,
    first_probs: Vec<f64>,
    conditionals: Vec<Vec<f64>>,
}

impl ClassicalJointModel {
    pub fn new(
        first_outcomes: Vec<f64>,
        second_outcomes: Vec<f64>,
        first_probs: Vec<f64>,
        conditionals: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let sums_to_one = |p: &[f64]| (p.iter().sum::<f64>() - 1.0).abs() <= 1e-9 && p.iter().all(|x| (0.0..=1.0).contains(x));
        if first_probs.len() != first_outcomes.len() || conditionals.len() != first_outcomes.len() {
            return Err(invalid("classical joint model: first-stage sizes disagree"));
        }
        if !sums_to_one(&first_probs) {
            return Err(invalid("classical joint model: first-stage probabilities must form a distribution"));
        }
        for row in &conditionals {
            if row.len() != second_outcomes.len() || !sums_to_one(row) {
                return Err(invalid("classical joint model: each conditional row must be a distribution over second outcomes"));
            }
        }
        Ok(Self { first_outcomes, second_outcomes, first_probs, conditionals })
    }

    /// Classical model with the same first-stage and conditional probabilities
    /// a quantum agent in `psi` would report. Null first-stage branches get a
    /// uniform conditional, which never affects sampling.
    pub fn matching(psi: &StateVector, first: &Observable, second: &Observable) -> Result<Self> {
        let dist = born_distribution(psi, first)?;
        check_dim(second.dim(), psi.dim())?;
        let nb = second.outcome_count();
        let conditionals = (0..first.outcome_count())
            .map(|a| match collapse_group(psi, first, a) {
                (_, Some(post)) => (0..nb).map(|b| second.group_probability(&post, b).clamp(0.0, 1.0)).collect(),
                (_, None) => vec![1.0 / nb as f64; nb],
            })
            .collect();
        let total = dist.total();
        let first_probs = dist.entries.iter().map(|e| (e.probability / total).min(1.0)).collect();
        Self::new(first.outcomes(), second.outcomes(), first_probs, conditionals)
    }
}

fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut cumulative = 0.0;
    let mut last = 0;
    for (k, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        cumulative += p;
        last = k;
        if u < cumulative {
            break;
        }
    }
    last
}

/// Samples a classical joint table with the same stream layout as
/// [`run_sequential_ensemble`].
pub fn run_classical_sequential_ensemble(model: &ClassicalJointModel, count: usize, seed: u64) -> Result<JointTable> {
    if count == 0 {
        return Err(invalid("population count must be at least 1"));
    }
    let nb = model.second_outcomes.len();
    let counts = tally(
        (0..count as u64).into_par_iter().map(|agent| {
            let mut rng = agent_rng(seed, agent, 0);
            let a = sample_index(&model.first_probs, &mut rng);
            let b = sample_index(&model.conditionals[a], &mut rng);
            a * nb + b
        }),
        model.first_outcomes.len() * nb,
    );
    Ok(counts_to_table(&counts, model.first_outcomes.clone(), model.second_outcomes.clone(), count))
}

enum PopulationState {
    Quantum(Vec<StateVector>),
    Classical(Vec<f64>),
}

/// Probability that each eigenstate of `obs` is still found in its own
/// eigenspace after `propagator`, averaged within degenerate eigenspaces.
/// For a two-level price observable this is `|⟨±|U|±⟩|²`.
fn news_likelihoods(obs: &Observable, propagator: Option<&Matrix>) -> Vec<f64> {
    (0..obs.outcome_count())
        .map(|g| match propagator {
            None => 1.0,
            Some(u) => {
                let members: Vec<&StateVector> = obs.members(g).collect();
                let total: f64 = members
                    .iter()
                    .map(|e| {
                        let moved = StateVector::from_vector(u * e.as_vector());
                        obs.group_probability(&moved, g)
                    })
                    .sum();
                (total / obs.multiplicity(g) as f64).clamp(0.0, 1.0)
            }
        })
        .collect()
}

/// Runs the trading loop. Each period: evolve quantum agents under the
/// period's news, measure the period observable and collapse, update
/// classical beliefs with the news likelihoods and sample their
/// expectations, then move the price by `λ (f₊ - f₋)`.
pub fn run_market(scenario: &Scenario) -> Result<PricePath> {
    scenario.validate()?;
    let mut states: Vec<PopulationState> = scenario
        .populations
        .iter()
        .map(|p| match p.kind {
            AgentKind::Quantum => Ok(PopulationState::Quantum(vec![p.initial_state.clone(); p.count])),
            AgentKind::Classical => born_distribution(&p.initial_state, &scenario.price_observable)
                .map(|d| PopulationState::Classical(d.entries.iter().map(|e| e.probability).collect())),
        })
        .collect::<Result<_>>()?;
    let total_agents: u64 = scenario.populations.iter().map(|p| p.count as u64).sum();

    let mut path = PricePath { initial_price: scenario.initial_price, periods: Vec::with_capacity(scenario.periods) };
    let mut price = scenario.initial_price;
    for period in 0..scenario.periods {
        let news = scenario.news.entry(period);
        let obs = news.observable.as_ref().unwrap_or(&scenario.price_observable);
        let propagator = (!news.hamiltonian.is_zero() && news.duration != 0.0).then(|| news.hamiltonian.propagator(news.duration));
        let outcome_up: Vec<bool> = obs.outcomes().iter().map(|&v| v > 0.0).collect();
        let outcome_values = obs.outcomes();

        let mut up_total = 0u64;
        let mut population_up = Vec::with_capacity(states.len());
        let mut agent_offset = 0u64;
        for (pop, state) in scenario.populations.iter().zip(states.iter_mut()) {
            let counts = match state {
                PopulationState::Quantum(agents) => tally(
                    agents.par_iter_mut().enumerate().map(|(k, psi)| {
                        if let Some(u) = &propagator {
                            *psi = StateVector::from_vector(u * psi.as_vector());
                        }
                        let mut rng = agent_rng(scenario.seed, agent_offset + k as u64, period as u64);
                        let (g, post) = sample_group(psi, obs, &mut rng);
                        *psi = post;
                        g
                    }),
                    obs.outcome_count(),
                ),
                PopulationState::Classical(belief) => {
                    let likelihoods = news_likelihoods(obs, propagator.as_ref());
                    match classical_agent_step(belief, &likelihoods, &outcome_values) {
                        Ok(step) => *belief = step.belief,
                        // news the classical model deems impossible carries no usable signal
                        Err(Error::ImpossibleEvidence) => {}
                        Err(e) => return Err(e),
                    }
                    let belief: &[f64] = belief;
                    tally(
                        (0..pop.count as u64).into_par_iter().map(|k| {
                            let mut rng = agent_rng(scenario.seed, agent_offset + k, period as u64);
                            sample_index(belief, &mut rng)
                        }),
                        obs.outcome_count(),
                    )
                }
            };
            let up: u64 = counts.iter().zip(&outcome_up).filter(|(_, &u)| u).map(|(c, _)| c).sum();
            population_up.push(up as f64 / pop.count as f64);
            up_total += up;
            agent_offset += pop.count as u64;
        }

        let down_total = total_agents - up_total;
        let up_fraction = up_total as f64 / total_agents as f64;
        let down_fraction = down_total as f64 / total_agents as f64;
        let price_end = price * (1.0 + scenario.impact * (up_fraction - down_fraction));
        if !(price_end.is_finite() && price_end > 0.0) {
            return Err(Error::SimulationHalt {
                period: period + 1,
                reason: format!("price left the positive finite range ({price_end})"),
                partial: Box::new(path),
            });
        }
        path.periods.push(PeriodRecord { period: period + 1, price_start: price, up_fraction, down_fraction, price_end, population_up });
        price = price_end;
    }
    Ok(path)
}
