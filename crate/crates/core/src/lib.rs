//! Quantum-probability models of investor expectation formation.
//!
//! The crate is organised bottom-up:
//!
//! - [`hilbert`]: pure states, observables, projectors and unitary evolution.
//! - [`measurement`]: Born rule, Lüders collapse, sequential joint tables,
//!   order effects, interference terms and uncertainty products.
//! - [`classical`]: the Kolmogorovian baseline (total probability, Bayes).
//! - [`market`]: seeded ensembles of agents and a price-impact trading loop.
//! - [`config`]: versioned JSON scenario documents.
//! - [`sampling`]: seeded random states and operators for tests and benchmarks.

pub mod classical;
pub mod config;
pub mod error;
pub mod hilbert;
pub mod market;
pub mod measurement;
pub mod sampling;

pub use num_complex::Complex64;

pub use classical::{bayes_update, classical_agent_step, total_probability, ClassicalConditionalModel, ClassicalStep};
pub use error::{Error, Result};
pub use hilbert::{commutator_norm, evolve, inner_product, projector_for, Hamiltonian, Matrix, Observable, Projector, StateVector};
pub use market::{
    run_classical_sequential_ensemble, run_ensemble, run_market, run_sequential_ensemble, sample_measurement, AgentKind,
    AgentPopulation, ClassicalJointModel, MeasurementOrder, NewsEntry, NewsSchedule, PeriodRecord, PricePath, Scenario,
};
pub use measurement::{
    born_distribution, born_probability, collapse, evolved_born, interference_term, order_effect, sequential_joint,
    transition_probability, uncertainty_product, InterferenceReport, JointEntry, JointTable, OutcomeDistribution,
    OutcomeProbability, UncertaintyReport,
};
