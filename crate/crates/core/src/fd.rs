//! Finite-difference discretization of `−d²/dx² + V(x)` on `[−L, L]` with
//! Dirichlet walls, used to cross-check basis spectra.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::eigen::eigenvalues;
use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::potential::PotentialSpec;
use crate::spectrum::{filter_real, SpectrumReport};

pub const MIN_POINTS: usize = 100;
/// Decay lengths kept between a classical turning point and the wall.
pub const WALL_MARGIN: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub half_width: f64,
    /// Interior points; the walls at `±L` are not unknowns.
    pub points: usize,
}

impl GridSpec {
    pub const DEFAULT: GridSpec = GridSpec {
        half_width: 12.0,
        points: 3000,
    };

    pub fn new(half_width: f64, points: usize) -> Result<Self> {
        let g = GridSpec { half_width, points };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.half_width > 0.0 && self.half_width.is_finite()) {
            return Err(Error::InvalidInput(format!("half width {} must be positive", self.half_width)));
        }
        if self.points < MIN_POINTS {
            return Err(Error::InvalidInput(format!(
                "{} grid points, need at least {MIN_POINTS}",
                self.points
            )));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.points + 1) as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        -self.half_width + (j + 1) as f64 * self.spacing()
    }

    /// Highest energy whose turning point for the confining `c·x²` part
    /// stays `WALL_MARGIN` inside the walls. `None` without such a part.
    pub fn energy_ceiling(&self, potential: &PotentialSpec) -> Option<f64> {
        let c = potential.quadratic_coeff();
        let inner = (self.half_width - WALL_MARGIN).max(0.0);
        (c > 0.0).then(|| c * inner * inner)
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::DEFAULT
    }
}

/// Three-point-stencil Hamiltonian as a dense matrix.
pub fn fd_matrix(potential: &PotentialSpec, grid: &GridSpec) -> Result<ComplexMatrix> {
    grid.validate()?;
    let n = grid.points;
    let h = grid.spacing();
    let off = Complex64::new(-1.0 / (h * h), 0.0);
    let mut m = ComplexMatrix::zeros(n);
    for j in 0..n {
        // Exact zero at the centre node of odd grids.
        let x = if 2 * j + 1 == n { 0.0 } else { grid.node(j) };
        m[(j, j)] = Complex64::new(2.0 / (h * h), 0.0) + potential.evaluate(x);
        if j + 1 < n {
            m[(j, j + 1)] = off;
            m[(j + 1, j)] = off;
        }
    }
    Ok(m)
}

/// Real eigenvalues of the FD Hamiltonian, ascending.
pub fn fd_real_levels(potential: &PotentialSpec, grid: &GridSpec, tol_abs: f64, tol_rel: f64) -> Result<Vec<f64>> {
    let m = fd_matrix(potential, grid)?;
    let eigs = eigenvalues(&m).map_err(|e| {
        e.context(format!(
            "finite-difference spectrum of {} (L = {}, {} points)",
            potential.name(),
            grid.half_width,
            grid.points
        ))
    })?;
    Ok(filter_real(&eigs, tol_abs, tol_rel).0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleMatch {
    pub quantum_number: usize,
    pub energy_mdm: f64,
    /// Nearest FD real level; `None` if the FD spectrum has no real levels.
    pub energy_fd: Option<f64>,
    pub gap: Option<f64>,
    /// No FD level within `10·delta`.
    pub flagged: bool,
    /// Above [`GridSpec::energy_ceiling`]; the walls distort the FD level.
    pub beyond_grid: bool,
}

/// Nearest FD real level for every converged level of `report`.
pub fn oracle_compare(potential: &PotentialSpec, report: &SpectrumReport, grid: &GridSpec) -> Result<Vec<OracleMatch>> {
    if report.real_levels.is_empty() {
        return Err(Error::InvalidInput("report has no converged real levels".into()));
    }
    let tol = report.tolerances;
    let fd = fd_real_levels(potential, grid, tol.tol_abs, tol.tol_rel)?;
    let mut out = match_levels(&report.energies(), &fd, 10.0 * tol.delta);
    let ceiling = grid.energy_ceiling(potential).unwrap_or(f64::INFINITY);
    for m in &mut out {
        m.beyond_grid = m.energy_mdm > ceiling;
    }
    Ok(out)
}

/// Nearest-neighbour pairing of `mdm` levels into `fd` levels.
pub fn match_levels(mdm: &[f64], fd: &[f64], flag_beyond: f64) -> Vec<OracleMatch> {
    mdm.iter()
        .enumerate()
        .map(|(q, &e)| {
            let nearest = fd
                .iter()
                .copied()
                .min_by(|a, b| (a - e).abs().total_cmp(&(b - e).abs()));
            let gap = nearest.map(|f| (f - e).abs());
            OracleMatch {
                quantum_number: q,
                energy_mdm: e,
                energy_fd: nearest,
                gap,
                flagged: gap.map_or(true, |g| g > flag_beyond),
                beyond_grid: false,
            }
        })
        .collect()
}
