//! Born-rule probabilities, Lüders collapse and sequential measurement.
//!
//! Sequential joint probabilities follow `p_ij(α, β) = p_i(α) · p_{j|i}(β | α)`
//! where the conditional is the Born probability of `β` on the state collapsed
//! onto the `α` eigenspace. Branches whose probability falls below
//! [`COLLAPSE_TOL`] contribute zero and are never collapsed.

use serde::Serialize;

use crate::error::{check_dim, invalid, Error, Result};
use crate::hilbert::{max_abs_diff, Hamiltonian, Matrix, Observable, Projector, StateVector, INPUT_TOL};

/// Branch probabilities below this are treated as impossible outcomes.
pub const COLLAPSE_TOL: f64 = 1e-12;

/// Probability of one measurement outcome.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OutcomeProbability {
    pub outcome: f64,
    pub probability: f64,
}

/// Outcome distribution of a single measurement, one entry per distinct
/// eigenvalue in descending order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutcomeDistribution {
    pub entries: Vec<OutcomeProbability>,
}

impl OutcomeDistribution {
    pub fn probability(&self, outcome: f64) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| (e.outcome - outcome).abs() <= crate::hilbert::OUTCOME_TOL)
            .map(|e| e.probability)
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|e| e.probability).sum()
    }

    pub fn outcomes(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|e| e.outcome)
    }
}

/// One cell of a sequential joint table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct JointEntry {
    /// Outcome of the first measurement.
    pub first: f64,
    /// Outcome of the second measurement.
    pub second: f64,
    pub probability: f64,
}

/// Joint distribution of two measurements performed in a fixed order.
///
/// Rows are ordered by first outcome, then second outcome, both descending.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JointTable {
    pub first_observable: String,
    pub second_observable: String,
    pub rows: Vec<JointEntry>,
}

impl JointTable {
    pub fn with_labels(mut self, first: impl Into<String>, second: impl Into<String>) -> Self {
        self.first_observable = first.into();
        self.second_observable = second.into();
        self
    }

    pub fn probability(&self, first: f64, second: f64) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| close(r.first, first) && close(r.second, second))
            .map(|r| r.probability)
    }

    pub fn total(&self) -> f64 {
        self.rows.iter().map(|r| r.probability).sum()
    }

    /// Marginal distribution of the first measurement.
    pub fn first_marginal(&self) -> Vec<OutcomeProbability> {
        let mut out: Vec<OutcomeProbability> = Vec::new();
        for r in &self.rows {
            match out.iter_mut().find(|e| close(e.outcome, r.first)) {
                Some(e) => e.probability += r.probability,
                None => out.push(OutcomeProbability { outcome: r.first, probability: r.probability }),
            }
        }
        out
    }

    /// Probability mass on cells whose two outcomes differ.
    pub fn off_diagonal_mass(&self) -> f64 {
        self.rows.iter().filter(|r| !close(r.first, r.second)).map(|r| r.probability).sum()
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= crate::hilbert::OUTCOME_TOL
}

/// Deviation of the direct probability of an event from the classical
/// total-probability sum over a measured partition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InterferenceReport {
    pub p_direct: f64,
    pub p_classical_sum: f64,
    /// `p_direct - p_classical_sum`; positive is constructive.
    pub interference: f64,
}

/// Both sides of the Robertson inequality `ΔA·ΔB ≥ ½|⟨[A,B]⟩|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct UncertaintyReport {
    pub delta_a: f64,
    pub delta_b: f64,
    pub product: f64,
    pub robertson_bound: f64,
}

/// `‖Πψ‖²`.
pub fn born_probability(psi: &StateVector, proj: &Projector) -> Result<f64> {
    check_dim(proj.dim(), psi.dim())?;
    let image = proj.matrix() * psi.as_vector();
    Ok(image.norm_squared().clamp(0.0, 1.0))
}

pub fn born_distribution(psi: &StateVector, obs: &Observable) -> Result<OutcomeDistribution> {
    check_dim(obs.dim(), psi.dim())?;
    let entries = (0..obs.outcome_count())
        .map(|g| OutcomeProbability {
            outcome: obs.outcome_value(g),
            probability: obs.group_probability(psi, g).clamp(0.0, 1.0),
        })
        .collect();
    Ok(OutcomeDistribution { entries })
}

/// Born distribution of `exp(-iHt) ψ`.
pub fn evolved_born(psi: &StateVector, hamiltonian: &Hamiltonian, t: f64, obs: &Observable) -> Result<OutcomeDistribution> {
    born_distribution(&hamiltonian.evolve(psi, t)?, obs)
}

/// Lüders update `Πψ / ‖Πψ‖`.
pub fn collapse(psi: &StateVector, proj: &Projector) -> Result<StateVector> {
    check_dim(proj.dim(), psi.dim())?;
    let image = proj.matrix() * psi.as_vector();
    let probability = image.norm_squared();
    if probability < COLLAPSE_TOL {
        return Err(Error::ImpossibleOutcome { probability });
    }
    Ok(StateVector::from_vector(image))
}

/// Collapse onto the eigenspace of outcome group `g`, or `None` for a null branch.
pub(crate) fn collapse_group(psi: &StateVector, obs: &Observable, g: usize) -> (f64, Option<StateVector>) {
    let p = obs.group_probability(psi, g);
    if p < COLLAPSE_TOL {
        (p, None)
    } else {
        (p, Some(StateVector::from_vector(obs.group_projection(psi, g))))
    }
}

/// `|⟨a|b⟩|²`.
pub fn transition_probability(from: &StateVector, to: &StateVector) -> Result<f64> {
    Ok(from.inner(to)?.norm_sqr().clamp(0.0, 1.0))
}

/// Joint table for measuring `first` and then `second` on `psi`.
pub fn sequential_joint(psi: &StateVector, first: &Observable, second: &Observable) -> Result<JointTable> {
    check_dim(first.dim(), psi.dim())?;
    check_dim(second.dim(), psi.dim())?;
    let mut rows = Vec::with_capacity(first.outcome_count() * second.outcome_count());
    for a in 0..first.outcome_count() {
        let (p_a, post) = collapse_group(psi, first, a);
        for b in 0..second.outcome_count() {
            let probability = match &post {
                Some(state) => p_a * second.group_probability(state, b),
                None => 0.0,
            };
            rows.push(JointEntry { first: first.outcome_value(a), second: second.outcome_value(b), probability });
        }
    }
    Ok(JointTable { first_observable: "first".into(), second_observable: "second".into(), rows })
}

/// `max_{α,β} |p_ij(α, β) - p_ji(β, α)|`.
pub fn order_effect(psi: &StateVector, obs_i: &Observable, obs_j: &Observable) -> Result<f64> {
    let ij = sequential_joint(psi, obs_i, obs_j)?;
    let ji = sequential_joint(psi, obs_j, obs_i)?;
    Ok(max_order_gap(&ij, &ji, obs_i.outcome_count(), obs_j.outcome_count()))
}

/// Order-effect statistic between a table of `i` then `j` and one of `j` then `i`.
///
/// Tables must use the row layout produced by [`sequential_joint`].
pub fn max_order_gap(ij: &JointTable, ji: &JointTable, outcomes_i: usize, outcomes_j: usize) -> f64 {
    let mut gap = 0.0_f64;
    for a in 0..outcomes_i {
        for b in 0..outcomes_j {
            let forward = ij.rows[a * outcomes_j + b].probability;
            let reverse = ji.rows[b * outcomes_i + a].probability;
            gap = gap.max((forward - reverse).abs());
        }
    }
    gap
}

/// Compares `p(target)` with `Σ_k p(B_k) p(target | B_k)` over the outcomes
/// `B_k` of `partition`.
pub fn interference_term(psi: &StateVector, target: &Projector, partition: &Observable) -> Result<InterferenceReport> {
    check_dim(target.dim(), psi.dim())?;
    check_dim(partition.dim(), psi.dim())?;
    let projectors = partition.projectors();
    let d = partition.dim();
    let sum = projectors.iter().fold(Matrix::zeros(d, d), |acc, (_, p)| acc + p.matrix());
    let dev = max_abs_diff(&sum, &Matrix::identity(d, d));
    if dev > INPUT_TOL {
        return Err(invalid(format!("partition projectors do not sum to the identity (deviation {dev:e})")));
    }

    let p_direct = born_probability(psi, target)?;
    let mut p_classical_sum = 0.0;
    for g in 0..partition.outcome_count() {
        if let (p_k, Some(post)) = collapse_group(psi, partition, g) {
            p_classical_sum += p_k * born_probability(&post, target)?;
        }
    }
    Ok(InterferenceReport { p_direct, p_classical_sum, interference: p_direct - p_classical_sum })
}

/// Standard deviations of `A` and `B` in `psi` and the Robertson lower bound.
pub fn uncertainty_product(psi: &StateVector, a: &Observable, b: &Observable) -> Result<UncertaintyReport> {
    check_dim(a.dim(), psi.dim())?;
    check_dim(b.dim(), psi.dim())?;
    let (ma, mb) = (a.operator(), b.operator());
    let v = psi.as_vector();
    let a_psi = &ma * v;
    let b_psi = &mb * v;
    let spread = |x_psi: &nalgebra::DVector<num_complex::Complex64>| {
        let mean = v.dotc(x_psi).re;
        (x_psi.norm_squared() - mean * mean).max(0.0).sqrt()
    };
    let delta_a = spread(&a_psi);
    let delta_b = spread(&b_psi);
    // ⟨ψ|AB - BA|ψ⟩ = ⟨Aψ|Bψ⟩ - ⟨Bψ|Aψ⟩ for Hermitian A, B
    let comm = a_psi.dotc(&b_psi) - b_psi.dotc(&a_psi);
    Ok(UncertaintyReport { delta_a, delta_b, product: delta_a * delta_b, robertson_bound: 0.5 * comm.norm() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_3, FRAC_PI_4, FRAC_PI_8};

    fn plus() -> StateVector {
        StateVector::basis(2, 0).unwrap()
    }

    fn minus() -> StateVector {
        StateVector::basis(2, 1).unwrap()
    }

    #[test]
    fn born_probability_examples() {
        let p = Observable::price();
        let pi_plus = p.projector(1.0).unwrap();
        assert_eq!(born_probability(&plus(), &pi_plus).unwrap(), 1.0);
        let sym = StateVector::from_real(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]).unwrap();
        assert_abs_diff_eq!(born_probability(&sym, &pi_plus).unwrap(), 0.5, epsilon = 1e-15);
        let s = StateVector::from_angle(FRAC_PI_3, 0.0);
        assert_abs_diff_eq!(born_probability(&s, &pi_plus).unwrap(), 0.25, epsilon = 1e-15);
    }

    #[test]
    fn born_probability_rank_one_matches_overlap() {
        let e = StateVector::from_angle(0.4, 0.9);
        let psi = StateVector::from_angle(1.1, -0.3);
        let via_proj = born_probability(&psi, &Projector::rank_one(&e)).unwrap();
        assert_abs_diff_eq!(via_proj, e.inner(&psi).unwrap().norm_sqr(), epsilon = 1e-15);
    }

    #[test]
    fn born_distribution_examples() {
        let p = Observable::price();
        let d = born_distribution(&minus(), &p).unwrap();
        assert_eq!(d.probability(1.0), Some(0.0));
        assert_eq!(d.probability(-1.0), Some(1.0));

        let d = born_distribution(&StateVector::from_angle(FRAC_PI_4, 0.0), &p).unwrap();
        assert_abs_diff_eq!(d.probability(1.0).unwrap(), 0.5, epsilon = 1e-15);

        let d = born_distribution(&StateVector::from_angle(FRAC_PI_8, 0.0), &p).unwrap();
        assert_abs_diff_eq!(d.probability(1.0).unwrap(), 0.853553390593, epsilon = 1e-12);
        assert_abs_diff_eq!(d.probability(-1.0).unwrap(), 0.146446609407, epsilon = 1e-12);
        assert_eq!(d.outcomes().collect::<Vec<_>>(), vec![1.0, -1.0]);
    }

    #[test]
    fn born_distribution_dimension_mismatch() {
        let psi = StateVector::basis(3, 0).unwrap();
        assert!(born_distribution(&psi, &Observable::price()).is_err());
    }

    #[test]
    fn evolved_born_examples() {
        let p = Observable::price();
        let psi = StateVector::from_angle(0.3, 0.2);
        let h = Hamiltonian::rabi(1.0);
        assert_eq!(evolved_born(&psi, &h, 0.0, &p).unwrap().entries.len(), 2);
        for t in [0.0, 0.4, 1.3, 2.9] {
            let d = evolved_born(&plus(), &h, t, &p).unwrap();
            assert_abs_diff_eq!(d.probability(1.0).unwrap(), t.cos().powi(2), epsilon = 1e-12);
        }
        let diag = Hamiltonian::diagonal(&[1.5, -0.5]).unwrap();
        let base = born_distribution(&psi, &p).unwrap();
        for t in [0.7, 5.0] {
            let d = evolved_born(&psi, &diag, t, &p).unwrap();
            assert_abs_diff_eq!(d.entries[0].probability, base.entries[0].probability, epsilon = 1e-14);
        }
    }

    #[test]
    fn collapse_examples() {
        let p = Observable::price();
        let pi_plus = p.projector(1.0).unwrap();
        let sym = StateVector::from_real(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]).unwrap();
        let once = collapse(&sym, &pi_plus).unwrap();
        assert!(once.same_ray(&plus()));
        let twice = collapse(&once, &pi_plus).unwrap();
        assert!(twice.same_ray(&once));
        assert!(matches!(
            collapse(&plus(), &p.projector(-1.0).unwrap()),
            Err(Error::ImpossibleOutcome { .. })
        ));
    }

    #[test]
    fn transition_probability_examples() {
        let a = StateVector::from_angle(0.2, 0.4);
        assert_abs_diff_eq!(transition_probability(&a, &a).unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(transition_probability(&plus(), &minus()).unwrap(), 0.0);
        let j = Observable::rotated(FRAC_PI_3, 0.0);
        assert_abs_diff_eq!(transition_probability(&plus(), &j.eigenvectors()[0]).unwrap(), 0.25, epsilon = 1e-15);
    }

    #[test]
    fn sequential_joint_repeatable_and_marginal() {
        let psi = StateVector::from_angle(0.8, 0.5);
        let a = Observable::rotated(0.3, 0.1);
        let t = sequential_joint(&psi, &a, &a).unwrap();
        assert!(t.off_diagonal_mass() < 1e-12);
        let born = born_distribution(&psi, &a).unwrap();
        for e in &born.entries {
            assert_abs_diff_eq!(t.probability(e.outcome, e.outcome).unwrap(), e.probability, epsilon = 1e-12);
        }
    }

    #[test]
    fn sequential_joint_two_bases_at_sixty_degrees() {
        let i = Observable::price();
        let j = Observable::rotated(FRAC_PI_3, 0.0);
        let ij = sequential_joint(&plus(), &i, &j).unwrap();
        let ji = sequential_joint(&plus(), &j, &i).unwrap();
        assert_abs_diff_eq!(ij.probability(1.0, 1.0).unwrap(), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(ji.probability(1.0, 1.0).unwrap(), 0.0625, epsilon = 1e-15);
        // null first-outcome branch contributes zero rows
        assert_eq!(ij.probability(-1.0, 1.0), Some(0.0));
        assert_eq!(ij.probability(-1.0, -1.0), Some(0.0));
        assert_abs_diff_eq!(order_effect(&plus(), &i, &j).unwrap(), 0.1875, epsilon = 1e-15);
    }

    #[test]
    fn commuting_observables_give_classical_joint() {
        let psi = StateVector::from_angle(0.6, 1.0);
        let a = Observable::rotated(0.4, 0.0);
        let b = a.relabeled(vec![-1.0, 1.0]).unwrap();
        let t = sequential_joint(&psi, &a, &b).unwrap();
        let born = born_distribution(&psi, &a).unwrap();
        assert_abs_diff_eq!(t.probability(1.0, -1.0).unwrap(), born.probability(1.0).unwrap(), epsilon = 1e-14);
        assert_abs_diff_eq!(t.probability(-1.0, 1.0).unwrap(), born.probability(-1.0).unwrap(), epsilon = 1e-14);
        assert!(order_effect(&psi, &a, &b).unwrap() < 1e-10);
        assert!(order_effect(&psi, &a, &a).unwrap() < 1e-15);
    }

    #[test]
    fn interference_examples() {
        let i = Observable::price();
        let target = i.projector(1.0).unwrap();

        let r = interference_term(&plus(), &target, &Observable::rotated(FRAC_PI_3, 0.0)).unwrap();
        assert_abs_diff_eq!(r.p_direct, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.p_classical_sum, 0.625, epsilon = 1e-15);
        assert_abs_diff_eq!(r.interference, 0.375, epsilon = 1e-15);

        let r = interference_term(&plus(), &target, &Observable::rotated(FRAC_PI_4, 0.0)).unwrap();
        assert_abs_diff_eq!(r.p_classical_sum, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(r.interference, 0.5, epsilon = 1e-15);

        let psi = StateVector::from_angle(1.2, 0.7);
        let r = interference_term(&psi, &target, &i).unwrap();
        assert!(r.interference.abs() < 1e-10);
    }

    #[test]
    fn interference_can_be_destructive() {
        // p_direct = cos²(3π/8) while the π/4 partition gives a classical sum of 1/2
        let psi = StateVector::from_angle(-FRAC_PI_8 * 3.0, 0.0);
        let target = Observable::price().projector(1.0).unwrap();
        let r = interference_term(&psi, &target, &Observable::rotated(FRAC_PI_4, 0.0)).unwrap();
        assert!(r.interference < 0.0);
        assert!((r.p_direct - (r.p_classical_sum + r.interference)).abs() < 1e-14);
    }

    #[test]
    fn interference_rejects_mismatched_dimensions() {
        let target = Observable::price().projector(1.0).unwrap();
        let partition = Observable::new((0..3).map(|k| StateVector::basis(3, k).unwrap()).collect(), vec![1.0, 0.0, -1.0])
            .unwrap();
        assert!(interference_term(&plus(), &target, &partition).is_err());
    }

    #[test]
    fn uncertainty_examples() {
        let z = Observable::price();
        let x = Observable::rotated(FRAC_PI_4, 0.0);
        let r = uncertainty_product(&plus(), &z, &x).unwrap();
        assert_eq!(r.delta_a, 0.0);
        assert!(r.robertson_bound < 1e-15);

        let psi = StateVector::from_angle(0.9, 0.4);
        let r = uncertainty_product(&psi, &z, &z).unwrap();
        assert_abs_diff_eq!(r.product, r.delta_a * r.delta_a, epsilon = 1e-15);
        assert_eq!(r.robertson_bound, 0.0);

        // Pauli Y eigenstate saturates ΔZ·ΔX ≥ |⟨Y⟩|
        let y_plus = StateVector::from_angle(FRAC_PI_4, std::f64::consts::FRAC_PI_2);
        let r = uncertainty_product(&y_plus, &z, &x).unwrap();
        assert_abs_diff_eq!(r.product, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r.robertson_bound, 1.0, epsilon = 1e-14);
    }
}
