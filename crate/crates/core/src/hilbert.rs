//! Finite-dimensional complex Hilbert space primitives.
//!
//! States are pure and normalized. Observables are stored in spectral form
//! (orthonormal eigenbasis plus real eigenvalues) so that measurement never has
//! to diagonalize anything. Hamiltonians are diagonalized once at construction
//! and time evolution is applied through the spectral decomposition
//! `exp(-iHt) = V diag(exp(-i λ t)) V†` with ħ = 1.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{check_dim, invalid, Result};

/// Dense complex matrix used for every operator in the crate.
pub type Matrix = DMatrix<Complex64>;

/// Tolerance for internal invariant assertions.
pub const INVARIANT_TOL: f64 = 1e-10;
/// Tolerance applied to user-supplied data (orthonormality, hermiticity, normalization).
pub const INPUT_TOL: f64 = 1e-8;
/// Eigenvalues closer than this are treated as the same measurement outcome.
pub const OUTCOME_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A normalized pure state.
///
/// Two states are physically the same when they differ by a global phase, so
/// this type deliberately does not implement `PartialEq`; use
/// [`StateVector::same_ray`].
#[derive(Clone, Debug)]
pub struct StateVector {
    amplitudes: DVector<Complex64>,
}

impl StateVector {
    /// Builds a state from raw amplitudes, rescaling them to unit norm.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        Self::normalize(DVector::from_vec(amplitudes))
    }

    /// Builds a state from amplitudes that must already have unit norm within `tol`.
    pub fn from_normalized(amplitudes: Vec<Complex64>, tol: f64) -> Result<Self> {
        let v = DVector::from_vec(amplitudes);
        let norm_sqr = v.norm_squared();
        if (norm_sqr - 1.0).abs() > tol {
            return Err(invalid(format!(
                "state is not normalized: squared norm {norm_sqr} deviates from 1 by more than {tol:e}"
            )));
        }
        Self::normalize(v)
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(amplitudes.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Computational basis vector `|index⟩` in dimension `dim`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(invalid(format!("basis index {index} out of range for dimension {dim}")));
        }
        let mut v = DVector::from_element(dim, ZERO);
        v[index] = ONE;
        Self::normalize(v)
    }

    /// Two-level state `cos θ |0⟩ + e^{iφ} sin θ |1⟩`.
    pub fn from_angle(theta: f64, phase: f64) -> Self {
        let v = DVector::from_vec(vec![
            Complex64::new(theta.cos(), 0.0),
            Complex64::from_polar(theta.sin(), phase),
        ]);
        Self::from_vector(v)
    }

    fn normalize(v: DVector<Complex64>) -> Result<Self> {
        if v.len() < 2 {
            return Err(invalid(format!("state dimension must be at least 2, got {}", v.len())));
        }
        if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(invalid("state has non-finite amplitudes"));
        }
        let norm = v.norm();
        if norm < 1e-150 {
            return Err(invalid("cannot normalize the zero vector"));
        }
        Ok(Self { amplitudes: v.unscale(norm) })
    }

    /// Renormalizes a vector that is known to be nonzero and of dimension ≥ 2.
    pub(crate) fn from_vector(v: DVector<Complex64>) -> Self {
        let norm = v.norm();
        Self { amplitudes: v.unscale(norm) }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        self.amplitudes.as_slice()
    }

    pub fn as_vector(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.norm_squared()
    }

    /// `⟨self|other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        check_dim(self.dim(), other.dim())?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// Multiplies every amplitude by `e^{iφ}`.
    pub fn with_global_phase(&self, phi: f64) -> Self {
        let w = Complex64::from_polar(1.0, phi);
        Self { amplitudes: self.amplitudes.map(|z| z * w) }
    }

    /// Phase-insensitive equality: `|⟨a|b⟩|² > 1 - 1e-10`.
    pub fn same_ray(&self, other: &StateVector) -> bool {
        match self.inner(other) {
            Ok(z) => z.norm_sqr() > 1.0 - INVARIANT_TOL,
            Err(_) => false,
        }
    }

    /// Applies an operator and renormalizes. Fails if the image is the zero vector.
    pub(crate) fn apply(&self, op: &Matrix) -> Result<Self> {
        check_dim(op.ncols(), self.dim())?;
        Self::normalize(op * &self.amplitudes)
    }
}

/// `⟨a|b⟩` with conjugation on the first argument.
pub fn inner_product(a: &StateVector, b: &StateVector) -> Result<Complex64> {
    a.inner(b)
}

/// Orthogonal projector onto a subspace.
#[derive(Clone, Debug)]
pub struct Projector {
    matrix: Matrix,
}

impl Projector {
    /// Validates idempotence and hermiticity within [`INPUT_TOL`].
    pub fn new(matrix: Matrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(invalid(format!("projector must be square, got {}x{}", matrix.nrows(), matrix.ncols())));
        }
        let herm = max_abs_diff(&matrix, &matrix.adjoint());
        if herm > INPUT_TOL {
            return Err(invalid(format!("projector is not Hermitian (max deviation {herm:e})")));
        }
        let idem = max_abs_diff(&(&matrix * &matrix), &matrix);
        if idem > INPUT_TOL {
            return Err(invalid(format!("projector is not idempotent (max deviation {idem:e})")));
        }
        Ok(Self { matrix })
    }

    /// Sum of `|e⟩⟨e|` over an orthonormal family.
    pub(crate) fn from_orthonormal<'a>(dim: usize, vectors: impl IntoIterator<Item = &'a StateVector>) -> Self {
        let mut matrix = Matrix::zeros(dim, dim);
        for e in vectors {
            matrix += e.as_vector() * e.as_vector().adjoint();
        }
        Self { matrix }
    }

    pub fn rank_one(e: &StateVector) -> Self {
        Self::from_orthonormal(e.dim(), [e])
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Trace, rounded to the nearest integer.
    pub fn rank(&self) -> usize {
        self.matrix.trace().re.round().max(0.0) as usize
    }
}

#[derive(Clone, Debug)]
struct OutcomeGroup {
    value: f64,
    members: Vec<usize>,
}

/// Hermitian observable in spectral form `Σ_k λ_k |e_k⟩⟨e_k|`.
#[derive(Clone, Debug)]
pub struct Observable {
    eigenvectors: Vec<StateVector>,
    eigenvalues: Vec<f64>,
    // distinct outcomes, sorted by descending eigenvalue
    groups: Vec<OutcomeGroup>,
}

impl Observable {
    /// Builds an observable from `d` eigenvectors of dimension `d` and `d` real
    /// eigenvalues. Rejects the basis if its Gram matrix deviates from the
    /// identity by more than [`INPUT_TOL`]. Repeated eigenvalues are allowed and
    /// grouped into a single outcome.
    pub fn new(eigenvectors: Vec<StateVector>, eigenvalues: Vec<f64>) -> Result<Self> {
        let d = eigenvectors.len();
        if d < 2 {
            return Err(invalid(format!("observable needs at least 2 eigenvectors, got {d}")));
        }
        if eigenvalues.len() != d {
            return Err(invalid(format!("{d} eigenvectors but {} eigenvalues", eigenvalues.len())));
        }
        for e in &eigenvectors {
            check_dim(d, e.dim())?;
        }
        if let Some(bad) = eigenvalues.iter().find(|x| !x.is_finite()) {
            return Err(invalid(format!("eigenvalue {bad} is not finite")));
        }
        for m in 0..d {
            for n in m..d {
                let g = eigenvectors[m].inner(&eigenvectors[n])?;
                let expected = if m == n { ONE } else { ZERO };
                let dev = (g - expected).norm();
                if dev > INPUT_TOL {
                    return Err(invalid(format!(
                        "eigenbasis is not orthonormal: Gram entry ({m},{n}) deviates by {dev:e}"
                    )));
                }
            }
        }
        let groups = group_outcomes(&eigenvalues);
        Ok(Self { eigenvectors, eigenvalues, groups })
    }

    /// The price observable `|+⟩⟨+| - |-⟩⟨-|` on the computational basis.
    pub fn price() -> Self {
        Self::rotated(0.0, 0.0)
    }

    /// Two-level ±1 observable with eigenvectors
    /// `|+⟩ = (cos θ, e^{iφ} sin θ)` and `|-⟩ = (-sin θ, e^{iφ} cos θ)`.
    pub fn rotated(theta: f64, phase: f64) -> Self {
        Self::rotated_with_values(theta, phase, [1.0, -1.0])
    }

    pub fn rotated_with_values(theta: f64, phase: f64, values: [f64; 2]) -> Self {
        let w = Complex64::from_polar(1.0, phase);
        let plus = StateVector::from_vector(DVector::from_vec(vec![
            Complex64::new(theta.cos(), 0.0),
            w * theta.sin(),
        ]));
        let minus = StateVector::from_vector(DVector::from_vec(vec![
            Complex64::new(-theta.sin(), 0.0),
            w * theta.cos(),
        ]));
        let eigenvalues = values.to_vec();
        let groups = group_outcomes(&eigenvalues);
        Self { eigenvectors: vec![plus, minus], eigenvalues, groups }
    }

    /// Diagonalizes a Hermitian matrix.
    pub fn from_hermitian(matrix: &Matrix) -> Result<Self> {
        let (values, vectors) = hermitian_eigen(matrix)?;
        let eigenvectors = vectors.column_iter().map(|c| StateVector::from_vector(c.into_owned())).collect();
        Self::new(eigenvectors, values.iter().copied().collect())
    }

    /// Same eigenbasis, new outcome labels.
    pub fn relabeled(&self, eigenvalues: Vec<f64>) -> Result<Self> {
        Self::new(self.eigenvectors.clone(), eigenvalues)
    }

    pub fn dim(&self) -> usize {
        self.eigenvectors.len()
    }

    pub fn eigenvectors(&self) -> &[StateVector] {
        &self.eigenvectors
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Distinct outcome values in descending order.
    pub fn outcomes(&self) -> Vec<f64> {
        self.groups.iter().map(|g| g.value).collect()
    }

    pub(crate) fn outcome_count(&self) -> usize {
        self.groups.len()
    }

    pub(crate) fn outcome_value(&self, group: usize) -> f64 {
        self.groups[group].value
    }

    pub(crate) fn outcome_index(&self, outcome: f64) -> Result<usize> {
        self.groups
            .iter()
            .position(|g| (g.value - outcome).abs() <= OUTCOME_TOL)
            .ok_or_else(|| invalid(format!("outcome {outcome} is not an eigenvalue of the observable")))
    }

    pub(crate) fn members(&self, group: usize) -> impl Iterator<Item = &StateVector> {
        self.groups[group].members.iter().map(move |&k| &self.eigenvectors[k])
    }

    pub(crate) fn multiplicity(&self, group: usize) -> usize {
        self.groups[group].members.len()
    }

    /// `‖Π_g ψ‖²` computed from the eigenvector overlaps.
    pub(crate) fn group_probability(&self, psi: &StateVector, group: usize) -> f64 {
        self.members(group)
            .map(|e| e.as_vector().dotc(psi.as_vector()).norm_sqr())
            .sum()
    }

    /// Unnormalized `Π_g ψ`.
    pub(crate) fn group_projection(&self, psi: &StateVector, group: usize) -> DVector<Complex64> {
        let mut out = DVector::from_element(self.dim(), ZERO);
        for e in self.members(group) {
            let c = e.as_vector().dotc(psi.as_vector());
            out.axpy(c, e.as_vector(), ONE);
        }
        out
    }

    /// Dense operator `Σ_k λ_k |e_k⟩⟨e_k|`.
    pub fn operator(&self) -> Matrix {
        let d = self.dim();
        let mut m = Matrix::zeros(d, d);
        for (e, &lambda) in self.eigenvectors.iter().zip(&self.eigenvalues) {
            m += (e.as_vector() * e.as_vector().adjoint()).scale(lambda);
        }
        m
    }

    /// Eigenspace projector for `outcome`.
    pub fn projector(&self, outcome: f64) -> Result<Projector> {
        let g = self.outcome_index(outcome)?;
        Ok(Projector::from_orthonormal(self.dim(), self.members(g)))
    }

    /// Projectors for every distinct outcome, in [`Observable::outcomes`] order.
    pub fn projectors(&self) -> Vec<(f64, Projector)> {
        (0..self.groups.len())
            .map(|g| (self.groups[g].value, Projector::from_orthonormal(self.dim(), self.members(g))))
            .collect()
    }
}

fn group_outcomes(eigenvalues: &[f64]) -> Vec<OutcomeGroup> {
    let mut order: Vec<usize> = (0..eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eigenvalues[b].total_cmp(&eigenvalues[a]));
    let mut groups: Vec<OutcomeGroup> = Vec::new();
    for k in order {
        let v = eigenvalues[k];
        match groups.last_mut() {
            Some(g) if (g.value - v).abs() <= OUTCOME_TOL => g.members.push(k),
            _ => groups.push(OutcomeGroup { value: v, members: vec![k] }),
        }
    }
    groups
}

/// Eigenspace projector of `obs` for `outcome`.
pub fn projector_for(obs: &Observable, outcome: f64) -> Result<Projector> {
    obs.projector(outcome)
}

/// Hermitian generator of belief dynamics (ħ = 1, dimensionless time).
#[derive(Clone, Debug)]
pub struct Hamiltonian {
    matrix: Matrix,
    eigenvalues: DVector<f64>,
    eigenvectors: Matrix,
}

impl Hamiltonian {
    /// Rejects matrices whose deviation from hermiticity exceeds [`INPUT_TOL`].
    pub fn new(matrix: Matrix) -> Result<Self> {
        let (eigenvalues, eigenvectors) = hermitian_eigen(&matrix)?;
        Ok(Self { matrix, eigenvalues, eigenvectors })
    }

    pub fn zero(dim: usize) -> Self {
        Self::new(Matrix::zeros(dim, dim)).expect("zero matrix is Hermitian")
    }

    /// `ω (|+⟩⟨-| + |-⟩⟨+|)` on the computational basis.
    pub fn rabi(omega: f64) -> Self {
        Self::pauli(omega, 0.0, 0.0)
    }

    /// `x σ_x + y σ_y + z σ_z`.
    pub fn pauli(x: f64, y: f64, z: f64) -> Self {
        let m = Matrix::from_row_slice(
            2,
            2,
            &[Complex64::new(z, 0.0), Complex64::new(x, -y), Complex64::new(x, y), Complex64::new(-z, 0.0)],
        );
        Self::new(m).expect("Pauli combination is Hermitian")
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        let d = DVector::from_iterator(values.len(), values.iter().map(|&x| Complex64::new(x, 0.0)));
        Self::new(Matrix::from_diagonal(&d))
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.iter().all(|z| *z == ZERO)
    }

    /// `exp(-iHt)` via the stored eigendecomposition.
    pub fn propagator(&self, t: f64) -> Matrix {
        let phases = DVector::from_iterator(
            self.eigenvalues.len(),
            self.eigenvalues.iter().map(|&l| Complex64::from_polar(1.0, -l * t)),
        );
        &self.eigenvectors * Matrix::from_diagonal(&phases) * self.eigenvectors.adjoint()
    }

    /// `ψ(t) = exp(-iHt) ψ`, renormalized to absorb roundoff.
    pub fn evolve(&self, psi: &StateVector, t: f64) -> Result<StateVector> {
        check_dim(self.dim(), psi.dim())?;
        if !t.is_finite() {
            return Err(invalid(format!("evolution time {t} is not finite")));
        }
        psi.apply(&self.propagator(t))
    }
}

/// `ψ(t) = exp(-iHt) ψ`. Negative `t` evolves backwards.
pub fn evolve(psi: &StateVector, hamiltonian: &Hamiltonian, t: f64) -> Result<StateVector> {
    hamiltonian.evolve(psi, t)
}

/// Frobenius norm of `AB - BA` for the reconstructed operators.
///
/// No normalization is applied: for the Pauli pair `σ_z`, `σ_x` this returns
/// `‖2iσ_y‖_F = 2√2`.
pub fn commutator_norm(a: &Observable, b: &Observable) -> Result<f64> {
    check_dim(a.dim(), b.dim())?;
    let (ma, mb) = (a.operator(), b.operator());
    Ok((&ma * &mb - &mb * &ma).norm())
}

pub(crate) fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Eigendecomposition of a Hermitian matrix after validating hermiticity.
fn hermitian_eigen(matrix: &Matrix) -> Result<(DVector<f64>, Matrix)> {
    if !matrix.is_square() {
        return Err(invalid(format!("operator must be square, got {}x{}", matrix.nrows(), matrix.ncols())));
    }
    if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(invalid("operator has non-finite entries"));
    }
    let adjoint = matrix.adjoint();
    for i in 0..matrix.nrows() {
        for j in 0..matrix.ncols() {
            let dev = (matrix[(i, j)] - adjoint[(i, j)]).norm();
            if dev > INPUT_TOL {
                return Err(invalid(format!(
                    "operator is not Hermitian: entry ({i},{j}) differs from the conjugate of ({j},{i}) by {dev:e}"
                )));
            }
        }
    }
    let symmetric = (matrix + adjoint).scale(0.5);
    let eig = symmetric.symmetric_eigen();
    Ok((eig.eigenvalues, eig.eigenvectors))
}

impl From<Projector> for Matrix {
    fn from(p: Projector) -> Self {
        p.matrix
    }
}

impl std::fmt::Display for StateVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (k, z) in self.amplitudes.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}{:+}i", z.re, z.im)?;
        }
        write!(f, ")")
    }
}
