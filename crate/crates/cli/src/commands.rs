use std::path::{Path, PathBuf};
use std::time::Instant;

use qexpect_core::config::{Config, ConfigError, Named};
use qexpect_core::{
    born_distribution, evolved_born, interference_term, measurement::max_order_gap, run_ensemble, run_market,
    sequential_joint, uncertainty_product, AgentPopulation, JointTable, Observable, PricePath,
};
use serde::Serialize;
use thiserror::Error;

use crate::format::{num, outcome_label, Csv};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("config has no `{0}` section")]
    MissingSection(&'static str),

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Model(#[from] qexpect_core::Error),

    /// Market halted; the partial CSV has already been produced.
    #[error("{error}")]
    Halted { error: qexpect_core::Error, partial_csv: String },

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(ConfigError::Parse { .. } | ConfigError::Io { .. }) | CliError::Write { .. } => 2,
            CliError::Halted { .. } => 3,
            CliError::Usage(_) => 64,
            _ => 1,
        }
    }
}

fn section<T>(task: Option<T>, name: &'static str) -> Result<T, CliError> {
    task.ok_or(CliError::MissingSection(name))
}

pub fn born(path: &Path) -> Result<String, CliError> {
    let task = section(Config::load(path)?.born, "born")?;
    let dist = born_distribution(&task.state.value, &task.observable.value)?;
    let mut csv = Csv::new(&["outcome", "probability"]);
    for e in &dist.entries {
        csv.row(&[num(e.outcome), num(e.probability)]);
    }
    Ok(csv.finish())
}

pub fn evolve(path: &Path, t_flag: Option<f64>, grid_flag: Option<usize>) -> Result<String, CliError> {
    let task = section(Config::load(path)?.evolve, "evolve")?;
    let t_end = t_flag
        .or(task.t)
        .ok_or_else(|| CliError::Usage("evolve needs a time: pass --t or set evolve.t".into()))?;
    if !t_end.is_finite() {
        return Err(CliError::Usage(format!("--t {t_end} is not finite")));
    }
    let times: Vec<f64> = match grid_flag.or(task.grid) {
        None => vec![t_end],
        Some(0) => return Err(CliError::Usage("--grid needs at least one sample".into())),
        Some(1) => vec![t_end],
        Some(n) => (0..n).map(|k| t_end * k as f64 / (n - 1) as f64).collect(),
    };
    let obs = &task.observable.value;
    let mut header = vec!["t".to_string()];
    header.extend(obs.outcomes().into_iter().map(outcome_label));
    let mut csv = Csv::new(&header);
    for t in times {
        let dist = evolved_born(&task.state.value, &task.hamiltonian.value, t, obs)?;
        let mut row = vec![num(t)];
        row.extend(dist.entries.iter().map(|e| num(e.probability)));
        csv.row(&row);
    }
    Ok(csv.finish())
}

pub fn interference(path: &Path) -> Result<String, CliError> {
    let task = section(Config::load(path)?.interference, "interference")?;
    let r = interference_term(&task.state.value, &task.target, &task.partition.value)?;
    Ok(format!("p_direct={} p_classical={} IT={}\n", num(r.p_direct), num(r.p_classical_sum), num(r.interference)))
}

fn joint_rows(csv: &mut Csv, table: &JointTable) {
    for r in &table.rows {
        csv.row(&[
            table.first_observable.as_str(),
            table.second_observable.as_str(),
            &num(r.first),
            &num(r.second),
            &num(r.probability),
        ]);
    }
}

fn labelled_joint(state: &Named<qexpect_core::StateVector>, a: &Named<Observable>, b: &Named<Observable>) -> Result<JointTable, CliError> {
    Ok(sequential_joint(&state.value, &a.value, &b.value)?.with_labels(&a.name, &b.name))
}

pub fn order_effect(path: &Path) -> Result<String, CliError> {
    let task = section(Config::load(path)?.order_effect, "order_effect")?;
    let ij = labelled_joint(&task.state, &task.first, &task.second)?;
    let ji = labelled_joint(&task.state, &task.second, &task.first)?;
    let gap = max_order_gap(&ij, &ji, task.first.value.outcomes().len(), task.second.value.outcomes().len());
    let mut csv = Csv::new(&["first", "second", "alpha", "beta", "probability"]);
    joint_rows(&mut csv, &ij);
    joint_rows(&mut csv, &ji);
    csv.line(&format!("order_effect={}", num(gap)));
    Ok(csv.finish())
}

pub fn uncertainty(path: &Path) -> Result<String, CliError> {
    let task = section(Config::load(path)?.uncertainty, "uncertainty")?;
    let r = uncertainty_product(&task.state.value, &task.first.value, &task.second.value)?;
    Ok(format!(
        "delta_a={} delta_b={} product={} robertson_bound={}\n",
        num(r.delta_a),
        num(r.delta_b),
        num(r.product),
        num(r.robertson_bound)
    ))
}

pub fn ensemble(path: &Path, n_flag: Option<usize>, seed_flag: Option<u64>) -> Result<String, CliError> {
    let task = section(Config::load(path)?.ensemble, "ensemble")?;
    let count = n_flag.unwrap_or(task.count);
    if count == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let seed = seed_flag.unwrap_or(task.seed);
    let population = AgentPopulation::quantum(count, task.state.value.clone())?;
    let empirical = run_ensemble(&population, &task.observable.value, seed)?;
    let analytic = born_distribution(&task.state.value, &task.observable.value)?;
    let mut csv = Csv::new(&["outcome", "empirical", "analytic", "deviation"]);
    for (e, a) in empirical.entries.iter().zip(&analytic.entries) {
        csv.row(&[num(e.outcome), num(e.probability), num(a.probability), num(e.probability - a.probability)]);
    }
    Ok(csv.finish())
}

/// Everything needed to reproduce a market run.
#[derive(Serialize)]
pub struct RunReport<'a> {
    pub library_version: &'static str,
    pub seed: u64,
    /// Resolved config, defaults explicit and the effective seed substituted.
    pub config: &'a qexpect_core::config::ConfigDocument,
    pub results: &'a PricePath,
    pub wall_clock_seconds: f64,
}

pub struct MarketOutput {
    pub csv: String,
    pub report_json: String,
}

pub fn price_path_csv(path: &PricePath, population_names: &[String]) -> String {
    let mut header: Vec<String> =
        ["period", "price_start", "up_fraction", "down_fraction", "price_end"].iter().map(|s| s.to_string()).collect();
    header.extend(population_names.iter().map(|n| format!("up_{n}")));
    let mut csv = Csv::new(&header);
    for r in &path.periods {
        let mut row = vec![r.period.to_string(), num(r.price_start), num(r.up_fraction), num(r.down_fraction), num(r.price_end)];
        row.extend(r.population_up.iter().map(|&u| num(u)));
        csv.row(&row);
    }
    csv.finish()
}

pub fn simulate_market(path: &Path, seed_flag: Option<u64>) -> Result<MarketOutput, CliError> {
    let started = Instant::now();
    let mut config = Config::load(path)?;
    let mut scenario = section(config.market.take(), "market")?;
    if let Some(seed) = seed_flag {
        scenario.seed = seed;
    }
    if let Some(m) = config.document.market.as_mut() {
        m.seed = Some(scenario.seed);
    }
    let names: Vec<String> = scenario.populations.iter().map(|p| p.name.clone()).collect();
    let result = match run_market(&scenario) {
        Ok(path) => path,
        Err(qexpect_core::Error::SimulationHalt { period, reason, partial }) => {
            let partial_csv = price_path_csv(&partial, &names);
            return Err(CliError::Halted {
                error: qexpect_core::Error::SimulationHalt { period, reason, partial },
                partial_csv,
            });
        }
        Err(e) => return Err(e.into()),
    };
    let report = RunReport {
        library_version: env!("CARGO_PKG_VERSION"),
        seed: scenario.seed,
        config: &config.document,
        results: &result,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    Ok(MarketOutput {
        csv: price_path_csv(&result, &names),
        report_json: serde_json::to_string_pretty(&report).expect("report serializes"),
    })
}
