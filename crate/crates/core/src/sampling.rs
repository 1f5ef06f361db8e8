//! Seeded random states and operators.
//!
//! Amplitudes and matrix entries are drawn from the standard normal
//! distribution; Hermitian matrices are symmetrized as `(M + M†) / 2`.

use rand::{Rng, RngExt};
use rand_distr::StandardNormal;

use crate::hilbert::{Hamiltonian, Matrix, Observable, StateVector};
use crate::Complex64;

fn normal_complex<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-distributed pure state in dimension `dim`.
pub fn random_state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> StateVector {
    loop {
        let amps = (0..dim).map(|_| normal_complex(rng)).collect();
        if let Ok(s) = StateVector::new(amps) {
            return s;
        }
    }
}

pub fn random_hermitian_matrix<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Matrix {
    let m = Matrix::from_fn(dim, dim, |_, _| normal_complex(rng));
    (&m + m.adjoint()).scale(0.5)
}

pub fn random_hamiltonian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Hamiltonian {
    Hamiltonian::new(random_hermitian_matrix(rng, dim)).expect("symmetrized matrix is Hermitian")
}

/// Observable with a random eigenbasis and random (generically distinct) eigenvalues.
pub fn random_observable<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Observable {
    Observable::from_hermitian(&random_hermitian_matrix(rng, dim)).expect("symmetrized matrix is Hermitian")
}

/// Random ±1 two-level observable, `rotated(θ, φ)` with uniform angles.
pub fn random_qubit_observable<R: Rng + ?Sized>(rng: &mut R) -> Observable {
    let theta: f64 = rng.random_range(0.0..std::f64::consts::PI);
    let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    Observable::rotated(theta, phase)
}

/// A random observable together with one that shares its eigenbasis but has
/// independently drawn eigenvalues, so the two commute.
pub fn random_commuting_pair<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> (Observable, Observable) {
    let a = random_observable(rng, dim);
    let values = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let b = a.relabeled(values).expect("same orthonormal basis");
    (a, b)
}
