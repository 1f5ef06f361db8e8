//! Test-only oracles, written against raw arrays so they share no code path
//! with the library.

#![allow(dead_code)]

use qexpect_core::{Complex64 as C, Matrix};

/// `exp(A)` by scaling and squaring around a truncated Taylor series.
pub fn taylor_expm(a: &Matrix) -> Matrix {
    let n = a.nrows();
    let norm = a.iter().map(|z| z.norm()).sum::<f64>();
    let mut squarings = 0;
    let mut scale = 1.0;
    while norm * scale > 0.25 {
        scale *= 0.5;
        squarings += 1;
    }
    let scaled = a * C::new(scale, 0.0);
    let mut term = Matrix::identity(n, n);
    let mut sum = Matrix::identity(n, n);
    for k in 1..=30 {
        term = &term * &scaled * C::new(1.0 / k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

pub type M2 = [[C; 2]; 2];
pub type V2 = [C; 2];

pub fn outer(e: V2) -> M2 {
    let mut m = [[C::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            m[i][j] = e[i] * e[j].conj();
        }
    }
    m
}

pub fn apply(m: &M2, v: V2) -> V2 {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

pub fn norm_sqr(v: V2) -> f64 {
    v[0].norm_sqr() + v[1].norm_sqr()
}

/// Rank-one projectors `(|+⟩⟨+|, |-⟩⟨-|)` of the basis at angle θ, phase φ.
pub fn basis_projectors(theta: f64, phase: f64) -> [M2; 2] {
    let w = C::from_polar(1.0, phase);
    let plus = [C::new(theta.cos(), 0.0), w * theta.sin()];
    let minus = [C::new(-theta.sin(), 0.0), w * theta.cos()];
    [outer(plus), outer(minus)]
}

/// `p(α then β) = ‖Π_β Π_α ψ‖²`, indices 0 = +1, 1 = -1.
pub fn brute_sequential(psi: V2, first: &[M2; 2], second: &[M2; 2]) -> [[f64; 2]; 2] {
    let mut out = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            out[a][b] = norm_sqr(apply(&second[b], apply(&first[a], psi)));
        }
    }
    out
}

/// `(p_direct, Σ_k ‖Π_target Π_k ψ‖²)`.
pub fn brute_interference(psi: V2, target: &M2, partition: &[M2; 2]) -> (f64, f64) {
    let direct = norm_sqr(apply(target, psi));
    let classical = partition.iter().map(|p| norm_sqr(apply(target, apply(p, psi)))).sum();
    (direct, classical)
}
