#![allow(dead_code)]

use num_complex::Complex64;
use ptspectra::ComplexMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn random_complex(r: &mut ChaCha8Rng) -> Complex64 {
    c(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))
}

pub fn random_matrix(n: usize, r: &mut ChaCha8Rng) -> ComplexMatrix {
    let entries = (0..n * n).map(|_| random_complex(r)).collect();
    ComplexMatrix::from_row_major(n, entries).unwrap()
}

pub fn random_hermitian(n: usize, r: &mut ChaCha8Rng) -> ComplexMatrix {
    let a = random_matrix(n, r);
    let mut h = ComplexMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            h[(i, j)] = a[(i, j)] + a[(j, i)].conj();
        }
    }
    h
}

/// `S M S⁻¹` with `S` unit upper triangular.
pub fn similarity(m: &ComplexMatrix, r: &mut ChaCha8Rng, scale: f64) -> ComplexMatrix {
    let n = m.dim();
    let mut s = ComplexMatrix::identity(n);
    for i in 0..n {
        for j in i + 1..n {
            s[(i, j)] = random_complex(r) * scale;
        }
    }
    // Columns of S⁻¹ by back substitution.
    let mut inv = ComplexMatrix::zeros(n);
    for col in 0..n {
        for i in (0..n).rev() {
            let mut v = if i == col { c(1.0, 0.0) } else { c(0.0, 0.0) };
            for k in i + 1..n {
                v -= s[(i, k)] * inv[(k, col)];
            }
            inv[(i, col)] = v;
        }
    }
    s.matmul(m).matmul(&inv)
}

/// Monic polynomial coefficients `c_0..c_{d-1}` of `Π (x − r_k)`.
pub fn poly_from_roots(roots: &[Complex64]) -> Vec<Complex64> {
    let mut coeffs = vec![c(1.0, 0.0)];
    for &r in roots {
        let mut next = vec![c(0.0, 0.0); coeffs.len() + 1];
        for (k, &a) in coeffs.iter().enumerate() {
            next[k + 1] += a;
            next[k] -= r * a;
        }
        coeffs = next;
    }
    coeffs.pop();
    coeffs
}

pub fn companion(coeffs: &[Complex64]) -> ComplexMatrix {
    let d = coeffs.len();
    let mut m = ComplexMatrix::zeros(d);
    for j in 0..d {
        m[(0, j)] = -coeffs[d - 1 - j];
    }
    for i in 1..d {
        m[(i, i - 1)] = c(1.0, 0.0);
    }
    m
}

/// Roots spread over `0.5 ≤ |r| ≤ 2` with pairwise distance at least `0.5`.
pub fn separated_roots(d: usize, r: &mut ChaCha8Rng) -> Vec<Complex64> {
    let mut roots: Vec<Complex64> = Vec::new();
    while roots.len() < d {
        let z = Complex64::from_polar(r.gen_range(0.5..2.0), r.gen_range(0.0..std::f64::consts::TAU));
        if roots.iter().all(|w| (w - z).norm() >= 0.5) {
            roots.push(z);
        }
    }
    roots
}

/// Largest distance after greedy nearest pairing of two eigenvalue sets.
pub fn set_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for &x in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

/// Largest distance from a non-real eigenvalue to the conjugate of its
/// nearest partner.
pub fn closure(eigs: &[Complex64], is_real: impl Fn(Complex64) -> bool) -> f64 {
    eigs.iter()
        .filter(|z| !is_real(**z))
        .map(|z| eigs.iter().map(|w| (z - w.conj()).norm()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}
