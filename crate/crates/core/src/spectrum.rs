//! Real-level extraction, cross-size convergence, quantum-number labels,
//! real-count scans over the coupling `g` and exceptional-point bracketing.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assembly::{assemble, default_quadrature};
use crate::basis::BasisSpec;
use crate::eigen::{EigenSolver, DEFAULT_SEED};
use crate::error::{Error, Result};
use crate::potential::{PotentialDescriptor, PotentialSpec};

/// Reality and convergence thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// `|Im E| ≤ tol_abs + tol_rel·|Re E|` classifies `E` as real.
    pub tol_abs: f64,
    pub tol_rel: f64,
    /// Largest cross-size difference accepted as converged.
    pub delta: f64,
}

impl Tolerances {
    /// Defaults for reproducing the published tables.
    pub const TABLE: Tolerances = Tolerances {
        tol_abs: 1e-6,
        tol_rel: 1e-8,
        delta: 5e-3,
    };

    /// Defaults for the exactly solvable test potentials.
    pub const ANALYTIC: Tolerances = Tolerances {
        tol_abs: 1e-6,
        tol_rel: 1e-8,
        delta: 1e-6,
    };

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v >= 0.0 && v.is_finite();
        if !(ok(self.tol_abs) && ok(self.tol_rel) && self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::InvalidInput(format!("invalid tolerances {self:?}")));
        }
        Ok(())
    }

    pub fn is_real(&self, z: Complex64) -> bool {
        z.im.abs() <= self.tol_abs + self.tol_rel * z.re.abs()
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances::TABLE
    }
}

/// Splits eigenvalues into real energies (ascending) and one
/// positive-imaginary representative per complex-conjugate pair.
pub fn filter_real(eigs: &[Complex64], tol_abs: f64, tol_rel: f64) -> (Vec<f64>, Vec<Complex64>) {
    let mut real = Vec::new();
    let mut complex = Vec::new();
    for &z in eigs {
        if z.im.abs() <= tol_abs + tol_rel * z.re.abs() {
            real.push(z.re);
        } else if z.im > 0.0 {
            complex.push(z);
        }
    }
    real.sort_by(f64::total_cmp);
    complex.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    (real, complex)
}

fn greedy_match(levels_n1: &[f64], levels_n2: &[f64], delta: f64, stop_at_miss: bool) -> Vec<(f64, f64)> {
    let mut used = vec![false; levels_n2.len()];
    let mut out = Vec::new();
    for &a in levels_n1 {
        let best = levels_n2
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .min_by(|(_, x), (_, y)| (*x - a).abs().total_cmp(&(*y - a).abs()));
        match best {
            Some((j, &b)) if (b - a).abs() <= delta => {
                used[j] = true;
                out.push((b, (b - a).abs()));
            }
            _ if stop_at_miss => break,
            _ => {}
        }
    }
    out.sort_by(|x, y| x.0.total_cmp(&y.0));
    out
}

/// Greedy nearest-neighbour matching of `levels_n1` (ascending) into
/// `levels_n2`. Returns `(E_n2, |E_n2 − E_n1|)` for every match within
/// `delta`; unmatched levels are dropped.
pub fn match_across_sizes(levels_n1: &[f64], levels_n2: &[f64], delta: f64) -> Vec<(f64, f64)> {
    greedy_match(levels_n1, levels_n2, delta, false)
}

/// Like [`match_across_sizes`], but stops at the first level of
/// `levels_n1` without a partner: everything above it is treated as
/// truncation-dominated even if it happens to match.
pub fn converged_prefix(levels_n1: &[f64], levels_n2: &[f64], delta: f64) -> Vec<(f64, f64)> {
    greedy_match(levels_n1, levels_n2, delta, true)
}

/// Same as [`match_across_sizes`] in the complex plane.
fn match_complex(l1: &[Complex64], l2: &[Complex64], delta: f64) -> Vec<Complex64> {
    let mut used = vec![false; l2.len()];
    let mut out = Vec::new();
    for &a in l1 {
        let best = l2
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .min_by(|(_, x), (_, y)| (*x - a).norm().total_cmp(&(*y - a).norm()));
        if let Some((j, &b)) = best {
            if (b - a).norm() <= delta {
                used[j] = true;
                out.push(b);
            }
        }
    }
    out.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealLevel {
    /// Rank among converged real levels, ascending in energy.
    pub quantum_number: usize,
    /// Energy at the larger basis size.
    pub energy: f64,
    pub cross_size_delta: f64,
    /// Imaginary part left over at the larger size.
    pub imag_residue: f64,
    /// Share of `Σ|A_m|²` carried by even `m`; absent if no eigenvector.
    pub parity_weight: Option<f64>,
    /// `‖M v − E v‖₂` of the eigenvector used for `parity_weight`.
    pub residual: Option<f64>,
}

impl RealLevel {
    pub fn dominant_parity(&self) -> Option<Parity> {
        self.parity_weight
            .map(|w| if w >= 0.5 { Parity::Even } else { Parity::Odd })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub potential: PotentialDescriptor,
    pub sizes: (usize, usize),
    pub real_levels: Vec<RealLevel>,
    /// Converged complex levels, positive-imaginary representatives.
    pub complex_levels: Vec<Complex64>,
    pub tolerances: Tolerances,
    /// Highest converged real energy plus one level gap; `None` without
    /// converged real levels.
    pub converged_cutoff: Option<f64>,
    /// Largest distance from a non-real larger-basis eigenvalue below the
    /// cutoff to the conjugate of its nearest partner.
    pub conjugate_closure: f64,
    /// Real eigenvalue counts at each size before matching.
    pub raw_real_counts: (usize, usize),
}

impl SpectrumReport {
    pub fn energies(&self) -> Vec<f64> {
        self.real_levels.iter().map(|l| l.energy).collect()
    }

    /// Converged real levels whose eigenvector is dominantly even.
    pub fn even_dominant(&self) -> Vec<&RealLevel> {
        self.real_levels
            .iter()
            .filter(|l| l.dominant_parity() == Some(Parity::Even))
            .collect()
    }

    /// Odd-dominant levels lying between the lowest `even_count`
    /// even-dominant ones.
    pub fn interleaved_odd(&self, even_count: usize) -> Vec<&RealLevel> {
        let even = self.even_dominant();
        let k = even_count.min(even.len());
        if k == 0 {
            return Vec::new();
        }
        let top_even = even[k - 1].energy;
        self.real_levels
            .iter()
            .filter(|l| l.dominant_parity() == Some(Parity::Odd) && l.energy < top_even)
            .collect()
    }
}

/// Raw spectrum of one basis size.
pub struct SizedSpectrum {
    pub size: usize,
    pub eigenvalues: Vec<Complex64>,
}

/// Assembles and diagonalizes `potential` at basis size `n`.
pub fn spectrum_at(potential: &PotentialSpec, n: usize) -> Result<SizedSpectrum> {
    let basis = BasisSpec::new(n)?;
    let quad = default_quadrature(potential, &basis);
    let matrix = assemble(potential, &basis, &quad)
        .map_err(|e| e.context(format!("assembling {} at N={n}", potential.name())))?;
    let solver = EigenSolver::new(&matrix)
        .map_err(|e| e.context(format!("diagonalizing {} at N={n}", potential.name())))?;
    Ok(SizedSpectrum {
        size: n,
        eigenvalues: solver.eigenvalues().to_vec(),
    })
}

/// Distance from each non-real eigenvalue below `below` to the conjugate
/// of its nearest partner, maximized.
fn conjugate_closure(eigs: &[Complex64], below: f64, tol: &Tolerances) -> f64 {
    eigs.iter()
        .filter(|z| z.re <= below && !tol.is_real(**z))
        .map(|z| {
            eigs.iter()
                .map(|w| (z - w.conj()).norm())
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

/// Runs the full pipeline at two basis sizes and keeps the real levels that
/// agree across them.
pub fn spectrum_report(
    potential: &PotentialSpec,
    n1: usize,
    n2: usize,
    tol: &Tolerances,
) -> Result<SpectrumReport> {
    if n1 >= n2 {
        return Err(Error::InvalidInput(format!("sizes must satisfy n1 < n2, got ({n1}, {n2})")));
    }
    tol.validate()?;
    let (small, large) = rayon::join(
        || spectrum_at(potential, n1),
        || -> Result<(Vec<Complex64>, Vec<(f64, Option<f64>, Option<f64>, f64)>)> {
            let basis = BasisSpec::new(n2)?;
            let quad = default_quadrature(potential, &basis);
            let matrix = assemble(potential, &basis, &quad)
                .map_err(|e| e.context(format!("assembling {} at N={n2}", potential.name())))?;
            let solver = EigenSolver::new(&matrix)
                .map_err(|e| e.context(format!("diagonalizing {} at N={n2}", potential.name())))?;
            let eigs = solver.eigenvalues().to_vec();
            let real: Vec<Complex64> = eigs.iter().copied().filter(|z| tol.is_real(*z)).collect();
            // Eigenvectors only for levels that can possibly match.
            let pairs = solver.vectors_for(&real, DEFAULT_SEED)?;
            let info = pairs
                .iter()
                .map(|p| {
                    let weight = p.vector.as_ref().map(|v| {
                        v.iter().step_by(2).map(|z| z.norm_sqr()).sum::<f64>()
                            / v.iter().map(|z| z.norm_sqr()).sum::<f64>()
                    });
                    (p.value.re, weight, p.residual, p.value.im)
                })
                .collect();
            Ok((eigs, info))
        },
    );
    let small = small?;
    let (large_eigs, large_info) = large?;

    let (real1, complex1) = filter_real(&small.eigenvalues, tol.tol_abs, tol.tol_rel);
    let (real2, complex2) = filter_real(&large_eigs, tol.tol_abs, tol.tol_rel);
    let matched = converged_prefix(&real1, &real2, tol.delta);

    let real_levels: Vec<RealLevel> = matched
        .iter()
        .enumerate()
        .map(|(q, &(energy, d))| {
            let info = large_info
                .iter()
                .find(|i| i.0 == energy)
                .expect("matched energy comes from the larger spectrum");
            RealLevel {
                quantum_number: q,
                energy,
                cross_size_delta: d,
                imag_residue: info.3,
                parity_weight: info.1,
                residual: info.2,
            }
        })
        .collect();

    let converged_cutoff = match real_levels.len() {
        0 => None,
        1 => Some(real_levels[0].energy + real_levels[0].energy.abs().max(1.0)),
        k => {
            let top = real_levels[k - 1].energy;
            Some(top + (top - real_levels[k - 2].energy))
        }
    };
    let closure_limit = converged_cutoff.unwrap_or(f64::NEG_INFINITY);
    let complex_levels: Vec<Complex64> = match_complex(&complex1, &complex2, tol.delta)
        .into_iter()
        .filter(|z| z.re <= closure_limit)
        .collect();

    Ok(SpectrumReport {
        potential: potential.descriptor(),
        sizes: (n1, n2),
        conjugate_closure: conjugate_closure(&large_eigs, closure_limit, tol),
        real_levels,
        complex_levels,
        tolerances: *tol,
        converged_cutoff,
        raw_real_counts: (real1.len(), real2.len()),
    })
}

/// Lowest real eigenvalues at each basis size, for convergence studies.
pub fn convergence_table(
    potential: &PotentialSpec,
    sizes: &[usize],
    tol: &Tolerances,
    levels: usize,
) -> Result<Vec<(usize, Vec<f64>)>> {
    sizes
        .par_iter()
        .map(|&n| {
            let s = spectrum_at(potential, n)?;
            let (real, _) = filter_real(&s.eigenvalues, tol.tol_abs, tol.tol_rel);
            Ok((n, real.into_iter().take(levels).collect()))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GScanResult {
    pub g_values: Vec<f64>,
    /// Converged real levels per `g`; `None` where the point failed.
    pub real_counts: Vec<Option<usize>>,
    /// Adjacent grid points where the count drops by exactly 2.
    pub merge_brackets: Vec<(f64, f64)>,
    pub failures: Vec<(f64, String)>,
    pub sizes: (usize, usize),
    pub tolerances: Tolerances,
}

/// Converged real-level count of `AhmedCubicPT(g)` across a grid of `g`.
pub fn scan_g(g_grid: &[f64], n1: usize, n2: usize, tol: &Tolerances) -> Result<GScanResult> {
    if g_grid.iter().any(|g| !(*g >= 0.0)) {
        return Err(Error::InvalidInput("couplings must be non-negative".into()));
    }
    if g_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidInput("g grid must be strictly increasing".into()));
    }
    let outcomes: Vec<Result<usize>> = g_grid
        .par_iter()
        .map(|&g| {
            spectrum_report(&PotentialSpec::ahmed_cubic(g), n1, n2, tol)
                .map(|r| r.real_levels.len())
        })
        .collect();
    let mut real_counts = Vec::with_capacity(g_grid.len());
    let mut failures = Vec::new();
    for (&g, outcome) in g_grid.iter().zip(outcomes) {
        match outcome {
            Ok(c) => real_counts.push(Some(c)),
            Err(e) => {
                failures.push((g, e.to_string()));
                real_counts.push(None);
            }
        }
    }
    let merge_brackets = g_grid
        .windows(2)
        .zip(real_counts.windows(2))
        .filter_map(|(g, c)| match (c[0], c[1]) {
            (Some(a), Some(b)) if a == b + 2 => Some((g[0], g[1])),
            _ => None,
        })
        .collect();
    Ok(GScanResult {
        g_values: g_grid.to_vec(),
        real_counts,
        merge_brackets,
        failures,
        sizes: (n1, n2),
        tolerances: *tol,
    })
}

/// Real eigenvalues of `AhmedCubicPT(g)` at a single basis size `n` with
/// energy at most `energy_cap`. Truncation artefacts sit near the top of
/// the matrix spectrum, far above any cap of order `n/4`.
pub fn real_count_at(g: f64, n: usize, tol: &Tolerances, energy_cap: f64) -> Result<usize> {
    let s = spectrum_at(&PotentialSpec::ahmed_cubic(g), n)?;
    let (real, _) = filter_real(&s.eigenvalues, tol.tol_abs, tol.tol_rel);
    Ok(real.iter().filter(|&&e| e <= energy_cap).count())
}

/// Default energy cap for single-size real counts.
pub fn default_energy_cap(n: usize) -> f64 {
    n as f64 / 4.0
}

/// Bisects `[g_low, g_high]` until narrower than `tol_g`, keeping the real
/// count at each end fixed (counts must differ by 2 at the start).
pub fn bracket_exceptional_point(
    g_low: f64,
    g_high: f64,
    n: usize,
    tol_g: f64,
    tol: &Tolerances,
) -> Result<(f64, f64)> {
    if !(tol_g > 0.0) || !(g_low < g_high) {
        return Err(Error::InvalidInput(format!(
            "need g_low < g_high and tol_g > 0, got [{g_low}, {g_high}], {tol_g}"
        )));
    }
    if g_high - g_low <= tol_g {
        return Ok((g_low, g_high));
    }
    let cap = default_energy_cap(n);
    let (count_low, count_high) = rayon::join(
        || real_count_at(g_low, n, tol, cap),
        || real_count_at(g_high, n, tol, cap),
    );
    let (count_low, count_high) = (count_low?, count_high?);
    if count_low.abs_diff(count_high) != 2 {
        return Err(Error::InvalidInput(format!(
            "real counts at the bracket ends must differ by 2, got {count_low} and {count_high}"
        )));
    }
    let (mut lo, mut hi) = (g_low, g_high);
    while hi - lo > tol_g {
        let mid = 0.5 * (lo + hi);
        let c = real_count_at(mid, n, tol, cap)?;
        if c == count_low {
            lo = mid;
        } else if c == count_high {
            hi = mid;
        } else {
            return Err(Error::BracketLost {
                g: mid,
                count: c,
                expected_low: count_low,
                expected_high: count_high,
            });
        }
    }
    Ok((lo, hi))
}
