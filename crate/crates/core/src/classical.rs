//! Classical (Kolmogorovian) reference: total probability and Bayesian updating.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::hilbert::{Observable, Projector, StateVector};
use crate::measurement::{born_probability, collapse_group};

const PARTITION_TOL: f64 = 1e-9;

/// Conditional probabilities `p(A | B_k)` over a disjoint partition `{B_k}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassicalConditionalModel {
    partition_probs: Vec<f64>,
    conditionals: Vec<f64>,
}

impl ClassicalConditionalModel {
    pub fn new(partition_probs: Vec<f64>, conditionals: Vec<f64>) -> Result<Self> {
        if partition_probs.is_empty() {
            return Err(invalid("partition must contain at least one event"));
        }
        if partition_probs.len() != conditionals.len() {
            return Err(invalid(format!(
                "{} partition probabilities but {} conditionals",
                partition_probs.len(),
                conditionals.len()
            )));
        }
        if let Some(p) = partition_probs.iter().find(|&&p| !(p > 0.0 && p <= 1.0)) {
            return Err(invalid(format!("partition event has probability {p}; every event needs mass in (0, 1]")));
        }
        let total: f64 = partition_probs.iter().sum();
        if (total - 1.0).abs() > PARTITION_TOL {
            return Err(invalid(format!("partition probabilities sum to {total}, not 1")));
        }
        if let Some(c) = conditionals.iter().find(|&&c| !(0.0..=1.0).contains(&c)) {
            return Err(invalid(format!("conditional probability {c} is outside [0, 1]")));
        }
        Ok(Self { partition_probs, conditionals })
    }

    /// The classical model a quantum agent would imply by treating each
    /// outcome of `partition` as an event: `p(B_k)` is its Born probability and
    /// `p(A | B_k)` the Born probability of `target` after collapse. Null
    /// branches are dropped.
    pub fn induced(psi: &StateVector, target: &Projector, partition: &Observable) -> Result<Self> {
        let mut partition_probs = Vec::new();
        let mut conditionals = Vec::new();
        for g in 0..partition.outcome_count() {
            if let (p, Some(post)) = collapse_group(psi, partition, g) {
                partition_probs.push(p);
                conditionals.push(born_probability(&post, target)?);
            }
        }
        Self::new(partition_probs, conditionals)
    }

    pub fn partition_probs(&self) -> &[f64] {
        &self.partition_probs
    }

    pub fn conditionals(&self) -> &[f64] {
        &self.conditionals
    }
}

/// `p(A) = Σ_k p(A | B_k) p(B_k)`.
pub fn total_probability(model: &ClassicalConditionalModel) -> f64 {
    model
        .partition_probs
        .iter()
        .zip(&model.conditionals)
        .map(|(p, c)| p * c)
        .sum()
}

/// Posterior `prior_k L_k / Σ_m prior_m L_m`.
pub fn bayes_update(prior: &[f64], likelihoods: &[f64]) -> Result<Vec<f64>> {
    validate_distribution(prior, "prior")?;
    if prior.len() != likelihoods.len() {
        return Err(invalid(format!("{} prior states but {} likelihoods", prior.len(), likelihoods.len())));
    }
    if let Some(l) = likelihoods.iter().find(|&&l| !(0.0..=1.0).contains(&l)) {
        return Err(invalid(format!("likelihood {l} is outside [0, 1]")));
    }
    let evidence: f64 = prior.iter().zip(likelihoods).map(|(p, l)| p * l).sum();
    if evidence <= 0.0 {
        return Err(Error::ImpossibleEvidence);
    }
    Ok(prior.iter().zip(likelihoods).map(|(p, l)| p * l / evidence).collect())
}

fn validate_distribution(p: &[f64], what: &str) -> Result<()> {
    if p.is_empty() {
        return Err(invalid(format!("{what} is empty")));
    }
    if let Some(x) = p.iter().find(|&&x| !(0.0..=1.0).contains(&x)) {
        return Err(invalid(format!("{what} entry {x} is outside [0, 1]")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > PARTITION_TOL {
        return Err(invalid(format!("{what} sums to {total}, not 1")));
    }
    Ok(())
}

/// Result of one classical agent update.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassicalStep {
    pub belief: Vec<f64>,
    /// Belief-weighted mean outcome value.
    pub expected_direction: f64,
}

/// Bayesian update of `belief` over states labelled by `outcomes`, followed by
/// the belief-weighted expected outcome.
pub fn classical_agent_step(belief: &[f64], likelihoods: &[f64], outcomes: &[f64]) -> Result<ClassicalStep> {
    if outcomes.len() != belief.len() {
        return Err(invalid(format!("{} belief states but {} outcome labels", belief.len(), outcomes.len())));
    }
    let posterior = bayes_update(belief, likelihoods)?;
    let expected_direction = posterior.iter().zip(outcomes).map(|(p, v)| p * v).sum();
    Ok(ClassicalStep { belief: posterior, expected_direction })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const UP_DOWN: [f64; 2] = [1.0, -1.0];

    #[test]
    fn total_probability_examples() {
        let m = ClassicalConditionalModel::new(vec![0.5, 0.5], vec![0.3, 0.3]).unwrap();
        assert_abs_diff_eq!(total_probability(&m), 0.3, epsilon = 1e-15);
        let m = ClassicalConditionalModel::new(vec![1.0], vec![0.7]).unwrap();
        assert_eq!(total_probability(&m), 0.7);
        let m = ClassicalConditionalModel::new(vec![0.625, 0.375], vec![0.4, 0.0]).unwrap();
        assert_abs_diff_eq!(total_probability(&m), 0.25, epsilon = 1e-15);
    }

    #[test]
    fn model_validation() {
        assert!(ClassicalConditionalModel::new(vec![0.5, 0.4], vec![0.1, 0.1]).is_err());
        assert!(ClassicalConditionalModel::new(vec![1.0, 0.0], vec![0.1, 0.1]).is_err());
        assert!(ClassicalConditionalModel::new(vec![0.5, 0.5], vec![0.1, 1.1]).is_err());
        assert!(ClassicalConditionalModel::new(vec![], vec![]).is_err());
        assert!(ClassicalConditionalModel::new(vec![1.0], vec![0.1, 0.2]).is_err());
    }

    #[test]
    fn bayes_examples() {
        let post = bayes_update(&[0.5, 0.5], &[0.3, 0.3]).unwrap();
        assert_eq!(post, vec![0.5, 0.5]);
        assert_eq!(bayes_update(&[0.5, 0.5], &[1.0, 0.0]).unwrap(), vec![1.0, 0.0]);
        let post = bayes_update(&[0.25, 0.75], &[0.8, 0.4]).unwrap();
        assert_abs_diff_eq!(post[0], 0.4, epsilon = 1e-15);
        assert_abs_diff_eq!(post[1], 0.6, epsilon = 1e-15);
    }

    #[test]
    fn bayes_impossible_evidence() {
        assert!(matches!(bayes_update(&[1.0, 0.0], &[0.0, 0.9]), Err(Error::ImpossibleEvidence)));
        assert!(bayes_update(&[0.7, 0.7], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn agent_step_examples() {
        let s = classical_agent_step(&[1.0, 0.0], &[0.2, 0.9], &UP_DOWN).unwrap();
        assert_eq!(s.expected_direction, 1.0);
        let s = classical_agent_step(&[0.5, 0.5], &[0.6, 0.6], &UP_DOWN).unwrap();
        assert_eq!(s.expected_direction, 0.0);
        let s = classical_agent_step(&[0.25, 0.75], &[0.8, 0.4], &UP_DOWN).unwrap();
        assert_abs_diff_eq!(s.belief[0], 0.4, epsilon = 1e-15);
        assert_abs_diff_eq!(s.expected_direction, -0.2, epsilon = 1e-15);
    }

    #[test]
    fn uniform_likelihoods_are_identity() {
        let prior = [0.1, 0.2, 0.3, 0.4];
        let post = bayes_update(&prior, &[0.37; 4]).unwrap();
        for (a, b) in prior.iter().zip(&post) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        }
    }
}
