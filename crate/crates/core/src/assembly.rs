//! Matrix of `H = p² + V(x)` in the oscillator basis.
//!
//! `H = (p² + x²) + (V − x²)`: the first bracket is `diag(2m + 1)`, every
//! polynomial piece of `V − x²` goes through the ladder identities, and only
//! the non-polynomial parity parts are integrated numerically on the half
//! line.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::basis::{phi_values, x2_element, x_element, BasisSpec};
use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::potential::PotentialSpec;
use crate::quadrature::{refine_until, QuadratureSpec};

/// Magnitude below which assembled elements are stored as exact zeros.
pub const ZERO_CUTOFF: f64 = 1e-15;

/// Default quadrature for `potential` in `basis`: resolves both the basis
/// products and the potential's own oscillation at the support edge.
pub fn default_quadrature(potential: &PotentialSpec, basis: &BasisSpec) -> QuadratureSpec {
    let k = basis.max_product_wavenumber() + potential.residual_wavenumber(basis.x_support);
    QuadratureSpec::resolving(basis.x_support, k)
}

/// Products below this magnitude contribute nothing at assembly precision.
const NEGLIGIBLE: f64 = 1e-18;

/// `φ_m(x_q)·sqrt(2 w_q)` for every node of the half-line rule, split into
/// even-index and odd-index rows; the factor 2 folds the mirrored half of
/// each parity-definite integral.
struct NodeTable {
    size_n: usize,
    nodes: Vec<f64>,
    /// `[class][q * len(class) + k]` holds the scaled `φ_{2k + class}(x_q)`.
    by_class: [Vec<f64>; 2],
}

impl NodeTable {
    fn build(basis: &BasisSpec, quad: &QuadratureSpec) -> Result<Self> {
        let rule = quad.nodes()?;
        let n = basis.size_n;
        let lens = [n.div_ceil(2), n / 2];
        let mut even = vec![0.0; rule.len() * lens[0]];
        let mut odd = vec![0.0; rule.len() * lens[1]];
        even.par_chunks_mut(lens[0])
            .zip(odd.par_chunks_mut(lens[1].max(1)))
            .zip(rule.par_iter())
            .for_each(|((e, o), &(x, w))| {
                let mut vals = vec![0.0; n];
                phi_values(n, x, &mut vals);
                let f = (2.0 * w).sqrt();
                for (m, v) in vals.iter().enumerate() {
                    if m % 2 == 0 {
                        e[m / 2] = v * f;
                    } else {
                        o[m / 2] = v * f;
                    }
                }
            });
        Ok(NodeTable {
            size_n: n,
            nodes: rule.iter().map(|r| r.0).collect(),
            by_class: [even, odd],
        })
    }

    fn class_len(&self, class: usize) -> usize {
        if class == 0 {
            self.size_n.div_ceil(2)
        } else {
            self.size_n / 2
        }
    }

    /// `G[m][n] = 2 ∫₀ φ_m φ_n f dx` for pairs with `(m + n) % 2 == parity`,
    /// upper triangle only (row-major, `n ≥ m`).
    fn weighted_gram(&self, f: &(dyn Fn(f64) -> f64 + Sync), parity: usize) -> Vec<f64> {
        let n = self.size_n;
        let weights: Vec<f64> = self.nodes.iter().map(|&x| f(x)).collect();
        let mut out = vec![0.0; n * n];
        out.par_chunks_mut(n).enumerate().for_each(|(m, row)| {
            let own = m % 2;
            let other = (m + parity) % 2;
            let (own_len, other_len) = (self.class_len(own), self.class_len(other));
            if other_len == 0 {
                return;
            }
            // first partner index j = m + parity, as k in its class
            let k0 = (m + parity) / 2;
            let mut acc = vec![0.0; other_len - k0.min(other_len)];
            if acc.is_empty() {
                return;
            }
            for (q, &wq) in weights.iter().enumerate() {
                let a = self.by_class[own][q * own_len + m / 2] * wq;
                if a.abs() < NEGLIGIBLE {
                    continue;
                }
                let partners = &self.by_class[other][q * other_len + k0..(q + 1) * other_len];
                for (s, p) in acc.iter_mut().zip(partners) {
                    *s += a * p;
                }
            }
            for (k, v) in acc.into_iter().enumerate() {
                row[m + parity + 2 * k] = v;
            }
        });
        out
    }
}

/// `M[m][n] = (2m + 1) δ_mn + ⟨φ_m| V − x² |φ_n⟩`.
pub fn assemble(
    potential: &PotentialSpec,
    basis: &BasisSpec,
    quad: &QuadratureSpec,
) -> Result<ComplexMatrix> {
    let n = basis.size_n;
    if n < 2 {
        return Err(Error::InvalidInput("assembly needs at least 2 basis functions".into()));
    }
    QuadratureSpec::new(quad.panel_count, quad.nodes_per_panel, quad.x_max)?;
    if quad.x_max < basis.x_support {
        return Err(Error::InvalidInput(format!(
            "quadrature limit {} below basis support {}",
            quad.x_max, basis.x_support
        )));
    }
    let mut m = ComplexMatrix::zeros(n);
    let c2 = potential.quadratic_coeff() - 1.0;
    let b1 = potential.imag_linear_coeff();
    for i in 0..n {
        m[(i, i)] = Complex64::new((2 * i + 1) as f64 + c2 * x2_element(i, i), 0.0);
        if c2 != 0.0 && i + 2 < n {
            let v = Complex64::new(c2 * x2_element(i, i + 2), 0.0);
            m[(i, i + 2)] = v;
            m[(i + 2, i)] = v;
        }
        if b1 != 0.0 && i + 1 < n {
            let v = Complex64::new(0.0, b1 * x_element(i, i + 1));
            m[(i, i + 1)] = v;
            m[(i + 1, i)] = v;
        }
    }

    let re_part = potential.re_residual();
    let im_part = potential.im_residual();
    if re_part.is_some() || im_part.is_some() {
        let table = NodeTable::build(basis, quad)?;
        if let Some(f) = re_part {
            let g = table.weighted_gram(&*f, 0);
            add_upper(&mut m, &g, Complex64::new(1.0, 0.0), 0);
        }
        if let Some(f) = im_part {
            let g = table.weighted_gram(&*f, 1);
            add_upper(&mut m, &g, Complex64::new(0.0, 1.0), 1);
        }
    }

    for i in 0..n {
        for z in m.row_mut(i).iter_mut() {
            if z.re.abs() < ZERO_CUTOFF {
                z.re = 0.0;
            }
            if z.im.abs() < ZERO_CUTOFF {
                z.im = 0.0;
            }
        }
    }
    Ok(m)
}

/// Adds `factor · g` from the upper triangle into both halves of `m`.
fn add_upper(m: &mut ComplexMatrix, g: &[f64], factor: Complex64, parity: usize) {
    let n = m.dim();
    for i in 0..n {
        let mut j = i + parity;
        while j < n {
            let v = factor * g[i * n + j];
            m[(i, j)] += v;
            if j != i {
                m[(j, i)] += v;
            }
            j += 2;
        }
    }
}

/// Recomputes selected quadrature elements `⟨φ_m| V − x² |φ_n⟩` (numerical
/// parts only) with panel doubling until they settle within `tol`.
pub fn verify_elements(
    potential: &PotentialSpec,
    basis: &BasisSpec,
    quad: &QuadratureSpec,
    pairs: &[(usize, usize)],
    tol: f64,
) -> Result<Vec<Complex64>> {
    let re_part = potential.re_residual();
    let im_part = potential.im_residual();
    pairs
        .iter()
        .map(|&(m, n)| {
            if m >= basis.size_n || n >= basis.size_n {
                return Err(Error::InvalidInput(format!("element ({m}, {n}) outside basis")));
            }
            let even = (m + n) % 2 == 0;
            let part = if even { re_part.as_ref() } else { im_part.as_ref() };
            let Some(f) = part else {
                return Ok(Complex64::new(0.0, 0.0));
            };
            let top = m.max(n) + 1;
            let integrand = |x: f64| {
                let mut vals = vec![0.0; top];
                phi_values(top, x, &mut vals);
                Complex64::new(2.0 * vals[m] * vals[n] * f(x), 0.0)
            };
            let out = refine_until(integrand, quad, tol).map_err(|e| Error::Element {
                m,
                n,
                source: Box::new(e),
            })?;
            Ok(if even {
                out.value
            } else {
                Complex64::new(0.0, out.value.re)
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct StructureReport {
    pub is_symmetric: bool,
    pub max_asym: f64,
    pub parity_phase_ok: bool,
    pub max_phase_violation: f64,
}

/// Complex symmetry and the PT phase pattern (real where `m + n` is even,
/// imaginary where odd).
pub fn structure_report(m: &ComplexMatrix) -> StructureReport {
    let n = m.dim();
    let mut max_asym: f64 = 0.0;
    let mut max_phase: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let z = m[(i, j)];
            if j > i {
                max_asym = max_asym.max((z - m[(j, i)]).norm());
            }
            let violation = if (i + j) % 2 == 0 { z.im.abs() } else { z.re.abs() };
            max_phase = max_phase.max(violation);
        }
    }
    StructureReport {
        is_symmetric: max_asym <= 1e-13,
        max_asym,
        parity_phase_ok: max_phase <= 1e-12,
        max_phase_violation: max_phase,
    }
}
