//! Orthonormal eigenfunctions of `p² + x²` (eigenvalue `2m + 1`) and their
//! analytic position matrix elements.

use crate::error::{Error, Result};

/// π^(-1/4), the peak of the normalized Gaussian ground state.
pub const PI_POW_NEG_QUARTER: f64 = 0.751_125_544_464_942_5;

/// Upper bound on the basis index accepted by [`eval_phi`].
pub const MAX_INDEX: usize = 10_000;

/// Mantissa rescaling threshold for the scaled recurrence.
const RESCALE: f64 = 1e100;

/// Truncated harmonic-oscillator basis `φ_0 .. φ_{size_n - 1}`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BasisSpec {
    pub size_n: usize,
    /// Half-width beyond which every retained `φ_m` is numerically zero.
    pub x_support: f64,
}

impl BasisSpec {
    /// Basis of `size_n` functions with the default support
    /// `sqrt(2 size_n + 1) + 6`.
    pub fn new(size_n: usize) -> Result<Self> {
        Self::with_support(size_n, Self::default_support(size_n))
    }

    pub fn with_support(size_n: usize, x_support: f64) -> Result<Self> {
        if size_n == 0 {
            return Err(Error::InvalidInput("basis size must be at least 1".into()));
        }
        if size_n > MAX_INDEX {
            return Err(Error::InvalidInput(format!(
                "basis size {size_n} exceeds {MAX_INDEX}"
            )));
        }
        let min = Self::turning_point(size_n) + 4.0;
        if !(x_support >= min) {
            return Err(Error::InvalidInput(format!(
                "x_support {x_support} below turning point plus margin ({min})"
            )));
        }
        Ok(BasisSpec { size_n, x_support })
    }

    /// Classical turning point of the highest retained state.
    pub fn turning_point(size_n: usize) -> f64 {
        ((2 * size_n + 1) as f64).sqrt()
    }

    pub fn default_support(size_n: usize) -> f64 {
        Self::turning_point(size_n) + 6.0
    }

    /// Largest local wavenumber of a product `φ_m φ_n` inside the basis.
    pub fn max_product_wavenumber(&self) -> f64 {
        2.0 * Self::turning_point(self.size_n)
    }
}

/// Value of the `m`-th normalized Hermite function at `x`.
///
/// Runs the three-term recurrence on the normalized functions with a
/// separately tracked exponential scale, so neither the Gaussian factor
/// nor the polynomial growth can underflow or overflow for `m < 10⁴`.
pub fn eval_phi(m: usize, x: f64) -> f64 {
    let mut out = vec![0.0; m + 1];
    phi_values(m + 1, x, &mut out);
    out[m]
}

/// Fills `out[m] = φ_m(x)` for `m < count`.
pub fn phi_values(count: usize, x: f64, out: &mut [f64]) {
    assert!(out.len() >= count);
    // value = mantissa * exp(log_scale)
    let mut log_scale = -0.5 * x * x;
    let mut prev = 0.0;
    let mut cur = PI_POW_NEG_QUARTER;
    for (m, slot) in out.iter_mut().take(count).enumerate() {
        *slot = if cur == 0.0 {
            0.0
        } else {
            let ln = log_scale + cur.abs().ln();
            if ln < -745.0 {
                0.0
            } else {
                cur * log_scale.exp()
            }
        };
        let mf = m as f64;
        let next = (2.0 / (mf + 1.0)).sqrt() * x * cur - (mf / (mf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            cur /= RESCALE;
            prev /= RESCALE;
            log_scale += RESCALE.ln();
        }
    }
}

/// `⟨φ_m| x |φ_n⟩`.
pub fn x_element(m: usize, n: usize) -> f64 {
    if m.abs_diff(n) == 1 {
        (m.max(n) as f64 / 2.0).sqrt()
    } else {
        0.0
    }
}

/// `⟨φ_m| x² |φ_n⟩`.
pub fn x2_element(m: usize, n: usize) -> f64 {
    match m.abs_diff(n) {
        0 => m as f64 + 0.5,
        2 => {
            let k = m.min(n) as f64;
            ((k + 1.0) * (k + 2.0)).sqrt() / 2.0
        }
        _ => 0.0,
    }
}
