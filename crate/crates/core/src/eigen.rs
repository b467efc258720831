//! Dense complex non-Hermitian eigensolver.
//!
//! Pipeline: diagonal balancing, Householder reduction to upper Hessenberg
//! form, then single-shift complex QR (Wilkinson shift from the trailing
//! 2×2, exceptional shift every 10 stalled sweeps) with deflation on
//! negligible subdiagonals. Eigenvectors come from inverse iteration on the
//! Hessenberg matrix, back-transformed through both similarities.
//!
//! Matrices with the parity phase pattern (real entries where `i + j` is
//! even, imaginary where it is odd) are similar to a real matrix through
//! `diag(iᵏ)`. Their eigenvalues come from a real Schur decomposition of
//! that matrix instead, so conjugate pairs are exact and real levels carry
//! no rounding-level imaginary part.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;

pub const MAX_DIM: usize = 4096;
/// QR sweeps allowed per deflated eigenvalue.
pub const SWEEPS_PER_EIGENVALUE: usize = 40;
const EXCEPTIONAL_PERIOD: usize = 10;
const EXCEPTIONAL_FACTOR: f64 = 0.75;
const INVERSE_ITERATIONS: usize = 2;
pub const DEFAULT_SEED: u64 = 0x5eed_0f_e1_9e;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[inline]
fn cabs1(z: Complex64) -> f64 {
    z.re.abs() + z.im.abs()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    pub value: Complex64,
    /// Unit 2-norm coefficient vector, absent when inverse iteration broke down.
    pub vector: Option<Vec<Complex64>>,
    /// `‖M v − E v‖₂`, present with the vector.
    pub residual: Option<f64>,
    /// Inverse iteration could not produce an acceptable vector.
    pub defective: bool,
}

/// Closed real-part interval `[lo, hi]` selecting eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealWindow {
    pub lo: f64,
    pub hi: f64,
}

impl RealWindow {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo <= hi) {
            return Err(Error::InvalidInput(format!("window [{lo}, {hi}] is empty")));
        }
        Ok(RealWindow { lo, hi })
    }

    pub fn around(center: f64, half_width: f64) -> Self {
        RealWindow {
            lo: center - half_width,
            hi: center + half_width,
        }
    }

    pub fn all() -> Self {
        RealWindow {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.lo && z.re <= self.hi
    }
}

/// All eigenvalues of `m`, sorted by (real part, imaginary part).
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<Complex64>> {
    Ok(EigenSolver::new(m)?.eigenvalues().to_vec())
}

/// Eigenpairs for every eigenvalue whose real part lies in `window`.
pub fn eigenpairs(m: &ComplexMatrix, window: RealWindow) -> Result<Vec<EigenPair>> {
    EigenSolver::new(m)?.eigenpairs(window, DEFAULT_SEED)
}

/// `‖M v − E v‖₂`, recomputed from scratch.
pub fn residual(m: &ComplexMatrix, pair: &EigenPair) -> Result<f64> {
    let v = pair
        .vector
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("eigenpair has no vector".into()))?;
    if v.len() != m.dim() {
        return Err(Error::InvalidInput(format!(
            "vector length {} does not match dimension {}",
            v.len(),
            m.dim()
        )));
    }
    Ok(residual_of(m, pair.value, v))
}

fn residual_of(m: &ComplexMatrix, value: Complex64, v: &[Complex64]) -> f64 {
    m.mul_vec(v)
        .iter()
        .zip(v)
        .map(|(mv, x)| (mv - value * x).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Balanced Hessenberg form of a matrix plus its converged eigenvalues.
pub struct EigenSolver<'a> {
    original: &'a ComplexMatrix,
    n: usize,
    /// `B = D⁻¹ M D`.
    scale: Vec<f64>,
    /// Unit Householder vectors `u_k` acting on rows/cols `k+1..n`.
    reflectors: Vec<Option<Vec<Complex64>>>,
    /// Row-major upper Hessenberg `H = Qᴴ B Q`.
    hessenberg: Vec<Complex64>,
    values: Vec<Complex64>,
    real_form: bool,
}

impl<'a> EigenSolver<'a> {
    pub fn new(m: &'a ComplexMatrix) -> Result<Self> {
        let n = m.dim();
        if n == 0 || n > MAX_DIM {
            return Err(Error::InvalidInput(format!("dimension {n} outside [1, {MAX_DIM}]")));
        }
        if !m.is_finite() {
            return Err(Error::InvalidInput("matrix has non-finite entries".into()));
        }
        let mut a = m.entries().to_vec();
        let scale = balance(&mut a, n);
        let real_values = real_form(&a, n).and_then(|r| real_schur_eigenvalues(r, n));
        let real_form = real_values.is_some();
        let reflectors = reduce_to_hessenberg(&mut a, n);
        let mut values = match real_values {
            Some(v) => v,
            None => hessenberg_qr(&mut a.clone(), n)?,
        };
        values.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
        Ok(EigenSolver {
            original: m,
            n,
            scale,
            reflectors,
            hessenberg: a,
            values,
            real_form,
        })
    }

    /// Whether the eigenvalues came from the real-similar form.
    pub fn used_real_form(&self) -> bool {
        self.real_form
    }

    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.values
    }

    pub fn eigenpairs(&self, window: RealWindow, seed: u64) -> Result<Vec<EigenPair>> {
        let selected: Vec<Complex64> =
            self.values.iter().copied().filter(|z| window.contains(*z)).collect();
        self.vectors_for(&selected, seed)
    }

    /// Eigenpairs for the given eigenvalues (normally taken from
    /// [`eigenvalues`](Self::eigenvalues)).
    pub fn vectors_for(&self, values: &[Complex64], seed: u64) -> Result<Vec<EigenPair>> {
        let n = self.n;
        let hnorm = self.hessenberg.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let mnorm = self.original.frobenius_norm();
        let coincide = 1e3 * f64::EPSILON * hnorm.max(f64::MIN_POSITIVE);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut found: Vec<(Complex64, Vec<Complex64>)> = Vec::new();
        let mut out = Vec::with_capacity(values.len());
        for &lambda in values {
            let lu = HessenbergLu::factor(&self.hessenberg, n, lambda, hnorm);
            let mut z: Vec<Complex64> = (0..n)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            normalize(&mut z);
            for _ in 0..INVERSE_ITERATIONS {
                lu.solve(&mut z);
                for (mu, prev) in &found {
                    if (mu - lambda).norm() <= coincide {
                        let proj: Complex64 = prev.iter().zip(&z).map(|(p, q)| p.conj() * q).sum();
                        for (q, p) in z.iter_mut().zip(prev) {
                            *q -= proj * p;
                        }
                    }
                }
                if !normalize(&mut z) {
                    break;
                }
            }
            let usable = z.iter().all(|c| c.re.is_finite() && c.im.is_finite())
                && z.iter().any(|c| *c != ZERO);
            let pair = if usable {
                found.push((lambda, z.clone()));
                let mut v = self.back_transform(&z);
                normalize(&mut v);
                let res = residual_of(self.original, lambda, &v);
                if res <= 1e-8 * mnorm.max(f64::MIN_POSITIVE) {
                    EigenPair {
                        value: lambda,
                        vector: Some(v),
                        residual: Some(res),
                        defective: false,
                    }
                } else {
                    EigenPair {
                        value: lambda,
                        vector: None,
                        residual: None,
                        defective: true,
                    }
                }
            } else {
                EigenPair {
                    value: lambda,
                    vector: None,
                    residual: None,
                    defective: true,
                }
            };
            out.push(pair);
        }
        Ok(out)
    }

    /// `x = D Q z`.
    fn back_transform(&self, z: &[Complex64]) -> Vec<Complex64> {
        let mut y = z.to_vec();
        for (k, u) in self.reflectors.iter().enumerate().rev() {
            if let Some(u) = u {
                let tail = &mut y[k + 1..];
                let s: Complex64 = u.iter().zip(tail.iter()).map(|(a, b)| a.conj() * b).sum();
                for (t, a) in tail.iter_mut().zip(u) {
                    *t -= 2.0 * s * a;
                }
            }
        }
        for (v, d) in y.iter_mut().zip(&self.scale) {
            *v *= *d;
        }
        y
    }
}

fn normalize(v: &mut [Complex64]) -> bool {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return false;
    }
    for z in v.iter_mut() {
        *z /= norm;
    }
    true
}

/// Radix-2 diagonal balancing, returning `D` with `A ← D⁻¹ A D`.
fn balance(a: &mut [Complex64], n: usize) -> Vec<f64> {
    const RADIX: f64 = 2.0;
    let mut scale = vec![1.0; n];
    loop {
        let mut converged = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += cabs1(a[j * n + i]);
                    r += cabs1(a[i * n + j]);
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= RADIX * RADIX;
            }
            g = r * RADIX;
            while c >= g {
                f /= RADIX;
                c /= RADIX * RADIX;
            }
            if (c + r) / f < 0.95 * s {
                converged = false;
                scale[i] *= f;
                let inv = 1.0 / f;
                for j in 0..n {
                    a[i * n + j] *= inv;
                    a[j * n + i] *= f;
                }
            }
        }
        if converged {
            return scale;
        }
    }
}

/// In-place Householder reduction to upper Hessenberg form.
/// `A = diag(i⁻ᵏ) M diag(iᵏ)` if `m` has the parity phase pattern exactly.
fn real_form(m: &[Complex64], n: usize) -> Option<nalgebra::DMatrix<f64>> {
    let mut a = nalgebra::DMatrix::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            let z = m[r * n + c];
            a[(r, c)] = if (r + c) % 2 == 0 {
                if z.im != 0.0 {
                    return None;
                }
                // i^(c−r) is ±1.
                if r.abs_diff(c) % 4 == 2 {
                    -z.re
                } else {
                    z.re
                }
            } else {
                if z.re != 0.0 {
                    return None;
                }
                // i^(c−r) is i or −i.
                if (c > r && (c - r) % 4 == 1) || (r > c && (r - c) % 4 == 3) {
                    -z.im
                } else {
                    z.im
                }
            };
        }
    }
    Some(a)
}

/// Eigenvalues from the quasi-triangular real Schur factor. `None` if the
/// iteration does not converge, in which case the complex path takes over.
fn real_schur_eigenvalues(a: nalgebra::DMatrix<f64>, n: usize) -> Option<Vec<Complex64>> {
    let schur = nalgebra::linalg::Schur::try_new(a, f64::EPSILON, SWEEPS_PER_EIGENVALUE * n.max(1))?;
    let (_, t) = schur.unpack();
    let mut out = Vec::with_capacity(n);
    let mut k = 0;
    while k < n {
        if k + 1 == n || t[(k + 1, k)] == 0.0 {
            out.push(Complex64::new(t[(k, k)], 0.0));
            k += 1;
            continue;
        }
        let half_tr = 0.5 * (t[(k, k)] + t[(k + 1, k + 1)]);
        let half_diff = 0.5 * (t[(k, k)] - t[(k + 1, k + 1)]);
        let disc = half_diff * half_diff + t[(k + 1, k)] * t[(k, k + 1)];
        if disc >= 0.0 {
            let root = disc.sqrt();
            out.push(Complex64::new(half_tr + root, 0.0));
            out.push(Complex64::new(half_tr - root, 0.0));
        } else {
            let root = (-disc).sqrt();
            out.push(Complex64::new(half_tr, root));
            out.push(Complex64::new(half_tr, -root));
        }
        k += 2;
    }
    out.iter().all(|z| z.re.is_finite() && z.im.is_finite()).then_some(out)
}

fn reduce_to_hessenberg(a: &mut [Complex64], n: usize) -> Vec<Option<Vec<Complex64>>> {
    let mut reflectors = Vec::with_capacity(n.saturating_sub(2));
    let mut s = vec![ZERO; n];
    for k in 0..n.saturating_sub(2) {
        let tail_norm: f64 = (k + 2..n).map(|i| a[i * n + k].norm_sqr()).sum::<f64>().sqrt();
        if tail_norm == 0.0 {
            reflectors.push(None);
            continue;
        }
        let x0 = a[(k + 1) * n + k];
        let xnorm = (x0.norm_sqr() + tail_norm * tail_norm).sqrt();
        let phase = if x0.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { x0 / x0.norm() };
        let mut u: Vec<Complex64> = (k + 1..n).map(|i| a[i * n + k]).collect();
        u[0] += phase * xnorm;
        normalize(&mut u);

        // Left: rows k+1.., columns k..
        s[k..n].iter_mut().for_each(|v| *v = ZERO);
        for (r, ur) in u.iter().enumerate() {
            let row = &a[(k + 1 + r) * n..(k + 2 + r) * n];
            let cu = ur.conj();
            for j in k..n {
                s[j] += cu * row[j];
            }
        }
        for (r, ur) in u.iter().enumerate() {
            let row = &mut a[(k + 1 + r) * n..(k + 2 + r) * n];
            let f = 2.0 * ur;
            for j in k..n {
                row[j] -= f * s[j];
            }
        }
        // Right: all rows, columns k+1..
        for i in 0..n {
            let row = &mut a[i * n + k + 1..(i + 1) * n];
            let dot: Complex64 = row.iter().zip(&u).map(|(x, y)| x * y).sum();
            if dot == ZERO {
                continue;
            }
            let f = 2.0 * dot;
            for (x, y) in row.iter_mut().zip(&u) {
                *x -= f * y.conj();
            }
        }
        a[(k + 1) * n + k] = -phase * xnorm;
        for i in k + 2..n {
            a[i * n + k] = ZERO;
        }
        reflectors.push(Some(u));
    }
    reflectors
}

/// Elementary reflector for a 2-vector: returns `(beta, tau, v2)` with
/// `(I - tau w wᴴ)ᴴ (alpha, x)ᵀ = (beta, 0)ᵀ`, `w = (1, v2)`.
fn reflector2(alpha: Complex64, x: Complex64) -> (Complex64, Complex64, Complex64) {
    let xnorm = x.norm();
    if xnorm == 0.0 && alpha.im == 0.0 {
        return (alpha, ZERO, ZERO);
    }
    let mag = (alpha.re * alpha.re + alpha.im * alpha.im + xnorm * xnorm).sqrt();
    let beta = if alpha.re >= 0.0 { -mag } else { mag };
    let tau = Complex64::new((beta - alpha.re) / beta, -alpha.im / beta);
    let v2 = x / (alpha - beta);
    (Complex64::new(beta, 0.0), tau, v2)
}

/// Eigenvalues of an upper Hessenberg matrix by single-shift complex QR.
/// Only the active window is updated (no Schur form is accumulated).
fn hessenberg_qr(h: &mut [Complex64], n: usize) -> Result<Vec<Complex64>> {
    let at = |i: usize, j: usize| i * n + j;
    let mut w = vec![ZERO; n];
    if n == 1 {
        w[0] = h[0];
        return Ok(w);
    }
    let ulp = f64::EPSILON;
    let smlnum = f64::MIN_POSITIVE * (n as f64 / ulp);

    // Make every subdiagonal real and non-negative.
    for i in 1..n {
        let sub = h[at(i, i - 1)];
        if sub.im != 0.0 {
            let mut sc = sub / cabs1(sub);
            sc = sc.conj() / sc.norm();
            h[at(i, i - 1)] = Complex64::new(sub.norm(), 0.0);
            for j in i..n {
                h[at(i, j)] *= sc;
            }
            for j in 0..=(i + 1).min(n - 1) {
                h[at(j, i)] *= sc.conj();
            }
        }
    }

    let mut i = n - 1;
    let mut kdefl = 0usize;
    loop {
        let mut l = 0;
        let mut converged = false;
        for _sweep in 0..=SWEEPS_PER_EIGENVALUE {
            // Negligible subdiagonal search.
            let mut k = i;
            while k > l {
                let sub = h[at(k, k - 1)];
                if cabs1(sub) <= smlnum {
                    break;
                }
                let mut tst = cabs1(h[at(k - 1, k - 1)]) + cabs1(h[at(k, k)]);
                if tst == 0.0 {
                    if k >= 2 {
                        tst += h[at(k - 1, k - 2)].re.abs();
                    }
                    if k + 1 < n {
                        tst += h[at(k + 1, k)].re.abs();
                    }
                }
                if sub.re.abs() <= ulp * tst {
                    let up = cabs1(h[at(k - 1, k)]);
                    let ab = cabs1(sub).max(up);
                    let ba = cabs1(sub).min(up);
                    let d1 = cabs1(h[at(k, k)]);
                    let d2 = cabs1(h[at(k - 1, k - 1)] - h[at(k, k)]);
                    let aa = d1.max(d2);
                    let bb = d1.min(d2);
                    let s = aa + ab;
                    if ba * (ab / s) <= smlnum.max(ulp * (bb * (aa / s))) {
                        break;
                    }
                }
                k -= 1;
            }
            l = k;
            if l > 0 {
                h[at(l, l - 1)] = ZERO;
            }
            if l >= i {
                converged = true;
                break;
            }
            kdefl += 1;

            let shift = if kdefl % (2 * EXCEPTIONAL_PERIOD) == 0 {
                EXCEPTIONAL_FACTOR * h[at(i, i - 1)].re.abs() + h[at(i, i)]
            } else if kdefl % EXCEPTIONAL_PERIOD == 0 {
                EXCEPTIONAL_FACTOR * h[at(l + 1, l)].re.abs() + h[at(l, l)]
            } else {
                wilkinson_shift(
                    h[at(i - 1, i - 1)],
                    h[at(i - 1, i)],
                    h[at(i, i - 1)],
                    h[at(i, i)],
                )
            };

            // Look for two consecutive small subdiagonals.
            let mut m = i - 1;
            let (mut v0, mut v1);
            loop {
                let h11 = h[at(m, m)];
                let h22 = h[at(m + 1, m + 1)];
                let mut h11s = h11 - shift;
                let mut h21 = h[at(m + 1, m)].re;
                let s = cabs1(h11s) + h21.abs();
                h11s /= s;
                h21 /= s;
                v0 = h11s;
                v1 = Complex64::new(h21, 0.0);
                if m == l {
                    break;
                }
                let h10 = h[at(m, m - 1)].re;
                if h10.abs() * h21.abs() <= ulp * (cabs1(h11s) * (cabs1(h11) + cabs1(h22))) {
                    break;
                }
                m -= 1;
            }

            // Single-shift QR sweep over rows/columns l..=i.
            let (i1, i2) = (l, i);
            for k in m..i {
                if k > m {
                    v0 = h[at(k, k - 1)];
                    v1 = h[at(k + 1, k - 1)];
                }
                let (beta, t1, v2) = reflector2(v0, v1);
                if k > m {
                    h[at(k, k - 1)] = beta;
                    h[at(k + 1, k - 1)] = ZERO;
                }
                let t2 = (t1 * v2).re;
                let ct1 = t1.conj();
                for j in k..=i2 {
                    let sum = ct1 * h[at(k, j)] + t2 * h[at(k + 1, j)];
                    h[at(k, j)] -= sum;
                    h[at(k + 1, j)] -= sum * v2;
                }
                let cv2 = v2.conj();
                for j in i1..=(k + 2).min(i) {
                    let sum = t1 * h[at(j, k)] + t2 * h[at(j, k + 1)];
                    h[at(j, k)] -= sum;
                    h[at(j, k + 1)] -= sum * cv2;
                }
                if k == m && m > l {
                    // Keep H(m, m-1) real after starting mid-block.
                    let mut temp = Complex64::new(1.0, 0.0) - t1;
                    temp /= temp.norm();
                    h[at(m + 1, m)] *= temp.conj();
                    if m + 2 <= i {
                        h[at(m + 2, m + 1)] *= temp;
                    }
                    for j in m..=i {
                        if j != m + 1 {
                            for c in j + 1..=i2 {
                                h[at(j, c)] *= temp;
                            }
                            for r in i1..j {
                                h[at(r, j)] *= temp.conj();
                            }
                        }
                    }
                }
            }
            // Keep H(i, i-1) real.
            let temp = h[at(i, i - 1)];
            if temp.im != 0.0 {
                let rtemp = temp.norm();
                h[at(i, i - 1)] = Complex64::new(rtemp, 0.0);
                let temp = temp / rtemp;
                for c in i + 1..=i2 {
                    h[at(i, c)] *= temp.conj();
                }
                for r in i1..i {
                    h[at(r, i)] *= temp;
                }
            }
        }
        if !converged {
            return Err(Error::NoConvergence { index: i });
        }
        w[i] = h[at(i, i)];
        kdefl = 0;
        if l == 0 {
            break;
        }
        i = l - 1;
        if i == 0 {
            w[0] = h[0];
            break;
        }
    }
    Ok(w)
}

/// Eigenvalue of the trailing 2×2 block closer to its last diagonal entry.
fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let u = b.sqrt() * c.sqrt();
    let s = cabs1(u);
    if s == 0.0 {
        return d;
    }
    let x = 0.5 * (a - d);
    let sx = cabs1(x);
    let s = s.max(sx);
    let mut y = s * ((x / s) * (x / s) + (u / s) * (u / s)).sqrt();
    if sx > 0.0 && (x.re / sx) * y.re + (x.im / sx) * y.im < 0.0 {
        y = -y;
    }
    d - u * (u / (x + y))
}

/// LU factors of `H − λI` for upper Hessenberg `H`, with adjacent-row
/// partial pivoting.
struct HessenbergLu {
    n: usize,
    u: Vec<Complex64>,
    swaps: Vec<bool>,
    multipliers: Vec<Complex64>,
}

impl HessenbergLu {
    fn factor(h: &[Complex64], n: usize, lambda: Complex64, hnorm: f64) -> Self {
        let tiny = f64::EPSILON * hnorm.max(f64::MIN_POSITIVE);
        let mut u = h.to_vec();
        for i in 0..n {
            u[i * n + i] -= lambda;
        }
        let mut swaps = vec![false; n.saturating_sub(1)];
        let mut multipliers = vec![ZERO; n.saturating_sub(1)];
        for k in 0..n.saturating_sub(1) {
            let below = u[(k + 1) * n + k];
            if below == ZERO {
                continue;
            }
            if cabs1(below) > cabs1(u[k * n + k]) {
                swaps[k] = true;
                for j in k..n {
                    u.swap(k * n + j, (k + 1) * n + j);
                }
            }
            if u[k * n + k] == ZERO {
                u[k * n + k] = Complex64::new(tiny, 0.0);
            }
            let l = u[(k + 1) * n + k] / u[k * n + k];
            multipliers[k] = l;
            u[(k + 1) * n + k] = ZERO;
            let (top, bottom) = u.split_at_mut((k + 1) * n);
            let src = &top[k * n + k + 1..k * n + n];
            let dst = &mut bottom[k + 1..n];
            for (d, s) in dst.iter_mut().zip(src) {
                *d -= l * s;
            }
        }
        for i in 0..n {
            if cabs1(u[i * n + i]) < tiny {
                u[i * n + i] = Complex64::new(tiny, 0.0);
            }
        }
        HessenbergLu {
            n,
            u,
            swaps,
            multipliers,
        }
    }

    fn solve(&self, b: &mut [Complex64]) {
        let n = self.n;
        for k in 0..n.saturating_sub(1) {
            if self.swaps[k] {
                b.swap(k, k + 1);
            }
            let l = self.multipliers[k];
            b[k + 1] = b[k + 1] - l * b[k];
        }
        for i in (0..n).rev() {
            let row = &self.u[i * n..(i + 1) * n];
            let mut acc = b[i];
            for j in i + 1..n {
                acc -= row[j] * b[j];
            }
            b[i] = acc / row[i];
            // Rescale on growth; direction is all that matters.
            if b[i].norm() > 1e150 {
                let f = 1.0 / b[i].norm();
                for v in b[i..].iter_mut() {
                    *v *= f;
                }
                for v in b[..i].iter_mut() {
                    *v *= f;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_matrix(n: usize, seed: u64) -> ComplexMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let entries = (0..n * n)
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        ComplexMatrix::from_row_major(n, entries).unwrap()
    }


    /// Random matrix with the parity phase pattern.
    fn phased_matrix(n: usize, seed: u64) -> ComplexMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut entries = Vec::with_capacity(n * n);
        for r in 0..n {
            for col in 0..n {
                let x = rng.gen_range(-1.0..1.0);
                entries.push(if (r + col) % 2 == 0 { c(x, 0.0) } else { c(0.0, x) });
            }
        }
        ComplexMatrix::from_row_major(n, entries).unwrap()
    }

    #[test]
    fn real_form_matches_complex_path() {
        for n in [2, 3, 7, 40] {
            let m = phased_matrix(n, n as u64);
            let solver = EigenSolver::new(&m).unwrap();
            assert!(solver.used_real_form());
            let mut a = m.entries().to_vec();
            balance(&mut a, n);
            reduce_to_hessenberg(&mut a, n);
            let general = hessenberg_qr(&mut a, n).unwrap();
            for x in solver.eigenvalues() {
                let d = general.iter().map(|y| (x - y).norm()).fold(f64::INFINITY, f64::min);
                assert!(d < 1e-10, "n={n}: {x} off by {d:e}");
            }
            // Exact conjugate pairs.
            for z in solver.eigenvalues().iter().filter(|z| z.im != 0.0) {
                assert!(solver.eigenvalues().contains(&z.conj()));
            }
            let sum: Complex64 = solver.eigenvalues().iter().sum();
            assert!((sum - m.trace()).norm() < 1e-10);
        }
        assert!(!EigenSolver::new(&random_matrix(6, 1)).unwrap().used_real_form());
    }

    #[test]
    fn diagonal_and_rotation() {
        let m = ComplexMatrix::from_real_rows(&[vec![2.0, 0.0], vec![0.0, 3.0]]).unwrap();
        assert_eq!(eigenvalues(&m).unwrap(), vec![c(2.0, 0.0), c(3.0, 0.0)]);
        let m = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![-1.0, 0.0]]).unwrap();
        let mut ev = eigenvalues(&m).unwrap();
        // Real parts are both zero up to rounding, so order by imaginary part.
        ev.sort_by(|a, b| a.im.total_cmp(&b.im));
        assert!((ev[0] - c(0.0, -1.0)).norm() < 1e-14);
        assert!((ev[1] - c(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn one_by_one() {
        let m = ComplexMatrix::from_rows(&[vec![c(1.5, -2.0)]]).unwrap();
        assert_eq!(eigenvalues(&m).unwrap(), vec![c(1.5, -2.0)]);
    }

    #[test]
    fn cube_roots_of_unity() {
        // Companion matrix of z³ − 1.
        let m = ComplexMatrix::from_real_rows(&[
            vec![0.0, 0.0, 1.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
        ])
        .unwrap();
        let ev = eigenvalues(&m).unwrap();
        let s = 3f64.sqrt() / 2.0;
        let expect = [c(-0.5, -s), c(-0.5, s), c(1.0, 0.0)];
        for (a, b) in ev.iter().zip(&expect) {
            assert!((a - b).norm() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn jordan_block_and_zero_matrix() {
        let m = ComplexMatrix::from_real_rows(&[
            vec![1.0, 1.0, 0.0],
            vec![0.0, 1.0, 1.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        for z in eigenvalues(&m).unwrap() {
            assert!((z - c(1.0, 0.0)).norm() < 1e-12);
        }
        assert!(eigenvalues(&ComplexMatrix::zeros(5))
            .unwrap()
            .iter()
            .all(|z| *z == ZERO));
    }

    #[test]
    fn rejects_invalid_input() {
        assert!(EigenSolver::new(&ComplexMatrix::zeros(MAX_DIM + 1)).is_err());
    }

    #[test]
    fn random_matrices_trace_and_residuals() {
        for (n, seed) in [(2, 1), (5, 2), (17, 3), (60, 4)] {
            let m = random_matrix(n, seed);
            let solver = EigenSolver::new(&m).unwrap();
            let sum: Complex64 = solver.eigenvalues().iter().sum();
            assert!((sum - m.trace()).norm() <= 1e-12 * m.frobenius_norm() * n as f64);
            let pairs = solver.eigenpairs(RealWindow::all(), 9).unwrap();
            assert_eq!(pairs.len(), n);
            for p in &pairs {
                let v = p.vector.as_ref().expect("random matrices are diagonalizable");
                let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                assert!((norm - 1.0).abs() < 1e-12);
                assert!(residual(&m, p).unwrap() < 1e-10 * m.frobenius_norm());
            }
        }
    }

    #[test]
    fn symmetric_two_by_two_vectors() {
        let m = ComplexMatrix::from_real_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let pairs = eigenpairs(&m, RealWindow::all()).unwrap();
        let r = 0.5f64.sqrt();
        for (p, (val, vec)) in pairs.iter().zip([(1.0, [r, -r]), (3.0, [r, r])]) {
            assert!((p.value - c(val, 0.0)).norm() < 1e-12);
            let v = p.vector.as_ref().unwrap();
            // Fix the arbitrary phase against the first component.
            let phase = v[0] / v[0].norm();
            for (a, b) in v.iter().zip(vec) {
                assert!((a / phase - c(b, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn repeated_eigenvalue_gets_independent_vectors() {
        let m = ComplexMatrix::from_diagonal(&[c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(5.0, 1.0)]);
        let pairs = eigenpairs(&m, RealWindow::new(1.5, 2.5).unwrap()).unwrap();
        assert_eq!(pairs.len(), 2);
        let a = pairs[0].vector.as_ref().unwrap();
        let b = pairs[1].vector.as_ref().unwrap();
        let overlap: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
        assert!(overlap.norm() < 1e-10);
        for p in &pairs {
            assert!(p.residual.unwrap() < 1e-14);
        }
    }

    #[test]
    fn perturbed_vector_residual() {
        let m = ComplexMatrix::from_diagonal(&[c(1.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)]);
        let exact = EigenPair {
            value: c(2.0, 0.0),
            vector: Some(vec![ZERO, c(1.0, 0.0), ZERO]),
            residual: None,
            defective: false,
        };
        assert!(residual(&m, &exact).unwrap() < 1e-15);
        let mut v = vec![c(1e-3, 0.0), c(1.0, 0.0), ZERO];
        normalize(&mut v);
        let bad = EigenPair {
            vector: Some(v),
            ..exact.clone()
        };
        let r = residual(&m, &bad).unwrap();
        assert!(r > 1e-5 && r < 2e-3, "{r}");
        let none = EigenPair {
            vector: None,
            ..exact
        };
        assert!(residual(&m, &none).is_err());
    }

    #[test]
    fn residual_matches_direct_evaluation() {
        let m = random_matrix(10, 11);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut v: Vec<Complex64> = (0..10)
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        normalize(&mut v);
        let value = c(0.3, -0.2);
        let mut acc = 0.0;
        for i in 0..10 {
            let mut s = ZERO;
            for j in 0..10 {
                s += m[(i, j)] * v[j];
            }
            acc += (s - value * v[i]).norm_sqr();
        }
        let pair = EigenPair {
            value,
            vector: Some(v),
            residual: None,
            defective: false,
        };
        assert!((residual(&m, &pair).unwrap() - acc.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn deterministic_vectors() {
        let m = random_matrix(12, 5);
        let a = eigenpairs(&m, RealWindow::all()).unwrap();
        let b = eigenpairs(&m, RealWindow::all()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn window_selection() {
        let m = ComplexMatrix::from_diagonal(&[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]);
        let pairs = eigenpairs(&m, RealWindow::around(2.0, 0.5)).unwrap();
        assert_eq!(pairs.len(), 1);
        assert!(RealWindow::new(2.0, 1.0).is_err());
    }
}
