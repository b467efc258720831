//! Composite Gauss–Legendre quadrature on `[0, x_max]`.
//!
//! Every potential term has definite parity, so full-line integrals are
//! folded onto the half line and the `|x|` kink at the origin always sits
//! on a panel boundary.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const MAX_ORDER: usize = 512;
pub const MAX_DOUBLINGS: usize = 8;

/// Phase (radians) a panel may span at the largest resolved wavenumber.
const PHASE_PER_PANEL: f64 = 24.0;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct QuadratureSpec {
    pub panel_count: usize,
    pub nodes_per_panel: usize,
    pub x_max: f64,
}

impl QuadratureSpec {
    pub fn new(panel_count: usize, nodes_per_panel: usize, x_max: f64) -> Result<Self> {
        if nodes_per_panel < 8 || nodes_per_panel > MAX_ORDER {
            return Err(Error::InvalidInput(format!(
                "nodes_per_panel {nodes_per_panel} outside [8, {MAX_ORDER}]"
            )));
        }
        if panel_count < 4 {
            return Err(Error::InvalidInput(format!(
                "panel_count {panel_count} below 4"
            )));
        }
        if !(x_max > 0.0 && x_max.is_finite()) {
            return Err(Error::InvalidInput(format!("x_max {x_max} not positive")));
        }
        Ok(QuadratureSpec {
            panel_count,
            nodes_per_panel,
            x_max,
        })
    }

    /// 32 nodes per panel, `max(8, ceil(2 x_max))` panels.
    pub fn default_for(x_max: f64) -> Self {
        let panels = ((2.0 * x_max).ceil() as usize).max(8);
        QuadratureSpec {
            panel_count: panels,
            nodes_per_panel: 32,
            x_max,
        }
    }

    /// Default rule, refined so that no panel spans more than
    /// [`PHASE_PER_PANEL`] radians of an oscillation with wavenumber `k_max`.
    pub fn resolving(x_max: f64, k_max: f64) -> Self {
        let mut spec = Self::default_for(x_max);
        let needed = (x_max * k_max / PHASE_PER_PANEL).ceil() as usize;
        spec.panel_count = spec.panel_count.max(needed);
        spec
    }

    /// High-accuracy settings for tests and element verification.
    pub fn reference(x_max: f64) -> Self {
        QuadratureSpec {
            panel_count: ((4.0 * x_max).ceil() as usize).max(16),
            nodes_per_panel: 48,
            x_max,
        }
    }

    pub fn doubled(&self) -> Self {
        QuadratureSpec {
            panel_count: self.panel_count * 2,
            ..*self
        }
    }

    pub fn node_count(&self) -> usize {
        self.panel_count * self.nodes_per_panel
    }

    /// Panel edges `0 = b_0 < b_1 < ... < b_P = x_max`.
    pub fn panel_edges(&self) -> Vec<f64> {
        let width = self.x_max / self.panel_count as f64;
        let mut edges: Vec<f64> = (0..=self.panel_count).map(|i| i as f64 * width).collect();
        edges[self.panel_count] = self.x_max;
        edges
    }

    /// Absolute nodes and weights on `[0, x_max]`, panel by panel.
    pub fn nodes(&self) -> Result<Vec<(f64, f64)>> {
        let rule = cached_rule(self.nodes_per_panel)?;
        let edges = self.panel_edges();
        let mut out = Vec::with_capacity(self.node_count());
        for pair in edges.windows(2) {
            let mid = 0.5 * (pair[0] + pair[1]);
            let half = 0.5 * (pair[1] - pair[0]);
            out.extend(rule.iter().map(|&(t, w)| (mid + half * t, half * w)));
        }
        Ok(out)
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, ascending by node.
pub fn legendre_rule(order: usize) -> Result<Vec<(f64, f64)>> {
    if order == 0 || order > MAX_ORDER {
        return Err(Error::InvalidInput(format!(
            "rule order {order} outside [1, {MAX_ORDER}]"
        )));
    }
    let n = order;
    let nf = n as f64;
    let mut rule = vec![(0.0, 0.0); n];
    // Roots come in ± pairs; solve for the positive half.
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut converged = false;
        let mut deriv = 0.0;
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            deriv = dp;
            let step = p / dp;
            x -= step;
            if step.abs() <= 1e-15 * x.abs().max(1e-3) {
                converged = true;
                let (_, dp) = legendre_with_derivative(n, x);
                deriv = dp;
                break;
            }
        }
        if !converged {
            return Err(Error::RuleNotConverged { order, index: i });
        }
        let w = 2.0 / ((1.0 - x * x) * deriv * deriv);
        rule[i] = (-x, w);
        rule[n - 1 - i] = (x, w);
    }
    if n % 2 == 1 {
        rule[n / 2].0 = 0.0;
    }
    Ok(rule)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn cached_rule(order: usize) -> Result<Arc<Vec<(f64, f64)>>> {
    static RULES: OnceLock<Mutex<HashMap<usize, Arc<Vec<(f64, f64)>>>>> = OnceLock::new();
    let rules = RULES.get_or_init(Default::default);
    if let Some(rule) = rules.lock().expect("rule cache poisoned").get(&order) {
        return Ok(rule.clone());
    }
    let rule = Arc::new(legendre_rule(order)?);
    rules
        .lock()
        .expect("rule cache poisoned")
        .insert(order, rule.clone());
    Ok(rule)
}

/// Composite Gauss–Legendre approximation of `∫₀^{x_max} f(x) dx`.
pub fn integrate_half<F>(f: F, spec: &QuadratureSpec) -> Complex64
where
    F: Fn(f64) -> Complex64,
{
    let nodes = spec.nodes().expect("quadrature spec holds a valid order");
    nodes.iter().map(|&(x, w)| w * f(x)).sum()
}

/// `∫_{-x_max}^{x_max} f(x) dx` with panels mirrored on both sides of 0.
pub fn integrate_full<F>(f: F, spec: &QuadratureSpec) -> Complex64
where
    F: Fn(f64) -> Complex64,
{
    let nodes = spec.nodes().expect("quadrature spec holds a valid order");
    let left: Complex64 = nodes.iter().map(|&(x, w)| w * f(-x)).sum();
    let right: Complex64 = nodes.iter().map(|&(x, w)| w * f(x)).sum();
    left + right
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Refined {
    pub value: Complex64,
    /// Absolute difference between the last two approximations.
    pub achieved: f64,
    pub doublings: usize,
    pub spec: QuadratureSpec,
}

/// Doubles the panel count until successive values agree within `tol`.
pub fn refine_until<F>(f: F, spec: &QuadratureSpec, tol: f64) -> Result<Refined>
where
    F: Fn(f64) -> Complex64,
{
    if !(tol >= 1e-14) {
        return Err(Error::InvalidInput(format!("tolerance {tol:e} below 1e-14")));
    }
    let mut current = *spec;
    let mut value = integrate_half(&f, &current);
    let mut achieved = f64::INFINITY;
    for doublings in 1..=MAX_DOUBLINGS {
        let next = current.doubled();
        let next_value = integrate_half(&f, &next);
        achieved = (next_value - value).norm();
        current = next;
        value = next_value;
        if achieved < tol {
            return Ok(Refined {
                value,
                achieved,
                doublings,
                spec: current,
            });
        }
    }
    Err(Error::ToleranceNotReached {
        value,
        achieved,
        tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    #[test]
    fn low_order_rules() {
        assert_eq!(legendre_rule(1).unwrap(), vec![(0.0, 2.0)]);
        let r2 = legendre_rule(2).unwrap();
        let s = 1.0 / 3f64.sqrt();
        assert!((r2[0].0 + s).abs() < 1e-15 && (r2[1].0 - s).abs() < 1e-15);
        assert!((r2[0].1 - 1.0).abs() < 1e-15 && (r2[1].1 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rule_properties() {
        for order in [3, 8, 16, 32, 48, 100, 257, 512] {
            let rule = legendre_rule(order).unwrap();
            let total: f64 = rule.iter().map(|r| r.1).sum();
            assert!((total - 2.0).abs() < 1e-14, "order {order}: {total}");
            for i in 0..order {
                assert!(rule[i].1 > 0.0);
                assert!(rule[i].0 > -1.0 && rule[i].0 < 1.0);
                assert!((rule[i].0 + rule[order - 1 - i].0).abs() < 1e-15);
                assert!((rule[i].1 - rule[order - 1 - i].1).abs() < 1e-14);
            }
            assert!(rule.windows(2).all(|w| w[0].0 < w[1].0));
        }
        assert!(legendre_rule(0).is_err());
        assert!(legendre_rule(513).is_err());
    }

    #[test]
    fn polynomial_exactness() {
        let rule = legendre_rule(16).unwrap();
        let v: f64 = rule.iter().map(|&(x, w)| w * x.powi(30)).sum();
        assert!((v - 2.0 / 31.0).abs() < 1e-13 * (2.0 / 31.0));
        for q in [8usize, 12, 32] {
            let rule = legendre_rule(q).unwrap();
            for deg in 0..2 * q {
                let v: f64 = rule.iter().map(|&(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((v - exact).abs() < 1e-13 * exact.max(1.0), "q={q} deg={deg}");
            }
        }
    }

    #[test]
    fn composite_panels_are_exact_for_polynomials() {
        let spec = QuadratureSpec::new(5, 8, 2.5).unwrap();
        let v = integrate_half(|x| c(x.powi(15)), &spec);
        let exact = 2.5f64.powi(16) / 16.0;
        assert!((v.re - exact).abs() < 1e-13 * exact);
    }

    #[test]
    fn gaussian_moments() {
        let spec = QuadratureSpec::default_for(10.0);
        let v = integrate_half(|x| c((-x * x).exp()), &spec);
        assert!((v.re - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-12);
        let v = integrate_half(|x| c(x.powi(3) * (-x * x).exp()), &spec);
        assert!((v.re - 0.5).abs() < 1e-12);
    }

    #[test]
    fn oscillatory_gaussian_against_finer_rule() {
        let f = |x: f64| c((2.0 * x * x).cos() * (-x * x).exp());
        let spec = QuadratureSpec::default_for(12.0);
        let fine = QuadratureSpec::new(spec.panel_count * 4, 64, 12.0).unwrap();
        let finer = QuadratureSpec::new(spec.panel_count * 8, 64, 12.0).unwrap();
        let (a, b, r) = (
            integrate_half(f, &spec).re,
            integrate_half(f, &fine).re,
            integrate_half(f, &finer).re,
        );
        assert!((b - r).abs() < 1e-14);
        assert!((a - r).abs() < 1e-10);
        // ∫₀^∞ cos(2x²) e^{-x²} dx = Re √π / (2 √(1 - 2i))
        let exact = (Complex64::new(std::f64::consts::PI, 0.0)
            / Complex64::new(1.0, -2.0))
        .sqrt()
            / 2.0;
        assert!((r - exact.re).abs() < 1e-13);
    }

    #[test]
    fn refinement_of_smooth_integrand() {
        let spec = QuadratureSpec::default_for(10.0);
        let out = refine_until(|x| c((-x * x).exp()), &spec, 1e-10).unwrap();
        assert!(out.doublings <= 2);
        assert!(out.achieved < 1e-10);
    }

    #[test]
    fn refinement_of_oscillatory_integrand() {
        let spec = QuadratureSpec::default_for(12.0);
        let out = refine_until(|x| c((2.0 * x * x).sin() * (-x * x).exp()), &spec, 1e-10).unwrap();
        assert!(out.achieved < 1e-10);
        let exact = (Complex64::new(std::f64::consts::PI, 0.0) / Complex64::new(1.0, -2.0))
            .sqrt()
            / 2.0;
        assert!((out.value.re - exact.im).abs() < 1e-12);
    }

    #[test]
    fn singular_integrand_stays_finite() {
        let spec = QuadratureSpec::default_for(4.0);
        match refine_until(|x| c(1.0 / x.sqrt()), &spec, 1e-14) {
            Ok(out) => assert!(out.value.re.is_finite()),
            Err(Error::ToleranceNotReached { value, achieved, .. }) => {
                assert!(value.re.is_finite() && achieved.is_finite());
                assert!((value.re - 4.0).abs() < 1e-2);
            }
            Err(other) => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn parity_folding_matches_two_sided_panels() {
        use crate::basis::eval_phi;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let spec = QuadratureSpec::reference(16.0);
        for _ in 0..20 {
            let m = rng.gen_range(0..40);
            let n = rng.gen_range(0..40);
            let a: f64 = rng.gen_range(-1.0..1.0);
            let g = |x: f64| {
                let pot = Complex64::new(0.25 * x * x, a * x * x.abs());
                pot * eval_phi(m, x) * eval_phi(n, x)
            };
            let folded = integrate_half(|x| g(x) + g(-x), &spec);
            let direct = integrate_full(g, &spec);
            assert!((folded - direct).norm() < 1e-12 * direct.norm().max(1.0));
        }
    }

    #[test]
    fn deterministic() {
        let spec = QuadratureSpec::default_for(9.0);
        let f = |x: f64| Complex64::new((3.0 * x).sin(), x.cos()) * (-x).exp();
        assert_eq!(integrate_half(f, &spec), integrate_half(f, &spec));
    }

    #[test]
    fn spec_validation() {
        assert!(QuadratureSpec::new(4, 7, 1.0).is_err());
        assert!(QuadratureSpec::new(3, 8, 1.0).is_err());
        assert!(QuadratureSpec::new(4, 8, 0.0).is_err());
        let spec = QuadratureSpec::new(6, 8, 3.0).unwrap();
        let edges = spec.panel_edges();
        assert_eq!(edges[0], 0.0);
        assert_eq!(*edges.last().unwrap(), 3.0);
        assert!(edges.windows(2).all(|w| w[0] < w[1]));
        assert!(refine_until(|_| c(1.0), &spec, 1e-15).is_err());
    }
}
