//! PT-symmetric potentials `V(x) = re_even(|x|) + i·sign(x)·im_odd(|x|)`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// User-supplied PT-symmetric potential. Both parts are evaluated on
/// `x ≥ 0` only, so the even/odd structure cannot be violated.
#[derive(Clone)]
pub struct CustomPotential {
    pub label: String,
    pub re_even: RealFn,
    pub im_odd: RealFn,
    /// Largest oscillation wavenumber of either part on the basis support,
    /// used to size quadrature panels. Zero for smooth, slowly varying parts.
    pub wavenumber: f64,
}

#[derive(Clone)]
pub enum PotentialSpec {
    /// `x²/4 + i g x|x|`
    AhmedCubicPT { g: f64 },
    /// `x²/4 + exp(-2i x|x|)`
    ExpPT,
    /// `x² + i x`
    ShiftedHO,
    /// `k x²`
    Harmonic { k: f64 },
    CustomPT(CustomPotential),
}

impl fmt::Debug for PotentialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PotentialSpec::AhmedCubicPT { g } => write!(f, "AhmedCubicPT {{ g: {g} }}"),
            PotentialSpec::ExpPT => write!(f, "ExpPT"),
            PotentialSpec::ShiftedHO => write!(f, "ShiftedHO"),
            PotentialSpec::Harmonic { k } => write!(f, "Harmonic {{ k: {k} }}"),
            PotentialSpec::CustomPT(c) => write!(f, "CustomPT({:?})", c.label),
        }
    }
}

/// Serializable name + parameters of a potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialDescriptor {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub g: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub k: Option<f64>,
}

/// `sign(0) = 0`.
fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

impl PotentialSpec {
    pub fn ahmed_cubic(g: f64) -> Self {
        PotentialSpec::AhmedCubicPT { g }
    }

    pub fn harmonic(k: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidInput(format!("harmonic k = {k} must be positive")));
        }
        Ok(PotentialSpec::Harmonic { k })
    }

    pub fn custom(
        label: impl Into<String>,
        re_even: impl Fn(f64) -> f64 + Send + Sync + 'static,
        im_odd: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        PotentialSpec::CustomPT(CustomPotential {
            label: label.into(),
            re_even: Arc::new(re_even),
            im_odd: Arc::new(im_odd),
            wavenumber: 0.0,
        })
    }

    /// Resolves a CLI name (`ahmed_cubic`, `exp_pt`, `shifted_ho`, `harmonic`).
    pub fn from_name(name: &str, g: Option<f64>, k: Option<f64>) -> Result<Self> {
        match name {
            "ahmed_cubic" => Ok(PotentialSpec::ahmed_cubic(g.unwrap_or(2.0))),
            "exp_pt" => Ok(PotentialSpec::ExpPT),
            "shifted_ho" => Ok(PotentialSpec::ShiftedHO),
            "harmonic" => PotentialSpec::harmonic(k.unwrap_or(1.0)),
            other => Err(Error::InvalidInput(format!(
                "unknown potential `{other}` (expected ahmed_cubic, exp_pt, shifted_ho or harmonic)"
            ))),
        }
    }

    pub fn name(&self) -> String {
        match self {
            PotentialSpec::AhmedCubicPT { .. } => "ahmed_cubic".into(),
            PotentialSpec::ExpPT => "exp_pt".into(),
            PotentialSpec::ShiftedHO => "shifted_ho".into(),
            PotentialSpec::Harmonic { .. } => "harmonic".into(),
            PotentialSpec::CustomPT(c) => format!("custom:{}", c.label),
        }
    }

    pub fn descriptor(&self) -> PotentialDescriptor {
        let (g, k) = match self {
            PotentialSpec::AhmedCubicPT { g } => (Some(*g), None),
            PotentialSpec::Harmonic { k } => (None, Some(*k)),
            _ => (None, None),
        };
        PotentialDescriptor {
            name: self.name(),
            g,
            k,
        }
    }

    /// `V(x)` written exactly as the closed-form expression.
    pub fn evaluate(&self, x: f64) -> Complex64 {
        match self {
            PotentialSpec::AhmedCubicPT { g } => Complex64::new(0.25 * x * x, g * x * x.abs()),
            PotentialSpec::ExpPT => {
                0.25 * x * x + Complex64::new(0.0, -2.0 * x * x.abs()).exp()
            }
            PotentialSpec::ShiftedHO => Complex64::new(x * x, x),
            PotentialSpec::Harmonic { k } => Complex64::new(k * x * x, 0.0),
            PotentialSpec::CustomPT(c) => {
                let a = x.abs();
                Complex64::new((c.re_even)(a), sign(x) * (c.im_odd)(a))
            }
        }
    }

    /// Even real part, for `x ≥ 0`.
    pub fn re_even(&self, x: f64) -> f64 {
        match self {
            PotentialSpec::AhmedCubicPT { .. } => 0.25 * x * x,
            PotentialSpec::ExpPT => 0.25 * x * x + (2.0 * x * x).cos(),
            PotentialSpec::ShiftedHO => x * x,
            PotentialSpec::Harmonic { k } => k * x * x,
            PotentialSpec::CustomPT(c) => (c.re_even)(x),
        }
    }

    /// Odd imaginary part, for `x ≥ 0`.
    pub fn im_odd(&self, x: f64) -> f64 {
        match self {
            PotentialSpec::AhmedCubicPT { g } => g * x * x,
            PotentialSpec::ExpPT => -(2.0 * x * x).sin(),
            PotentialSpec::ShiftedHO => x,
            PotentialSpec::Harmonic { .. } => 0.0,
            PotentialSpec::CustomPT(c) => (c.im_odd)(x),
        }
    }

    /// The pair `(re_even, im_odd)` as closures on `x ≥ 0`.
    pub fn parity_parts(&self) -> (impl Fn(f64) -> f64 + '_, impl Fn(f64) -> f64 + '_) {
        (move |x| self.re_even(x), move |x| self.im_odd(x))
    }

    /// `re_even(|x|) + i·sign(x)·im_odd(|x|)`.
    pub fn reconstruct(&self, x: f64) -> Complex64 {
        let a = x.abs();
        Complex64::new(self.re_even(a), sign(x) * self.im_odd(a))
    }

    /// Checks `|V(x) - conj(V(-x))| ≤ 1e-12` at `samples` quasi-random
    /// points of `[-half_width, half_width]`.
    pub fn pt_check(&self, samples: usize, half_width: f64) -> Result<bool> {
        pt_check_fn(|x| self.evaluate(x), samples, half_width)
    }

    /// Coefficient of the `x²` term handled analytically during assembly.
    pub fn quadratic_coeff(&self) -> f64 {
        match self {
            PotentialSpec::AhmedCubicPT { .. } | PotentialSpec::ExpPT => 0.25,
            PotentialSpec::ShiftedHO => 1.0,
            PotentialSpec::Harmonic { k } => *k,
            PotentialSpec::CustomPT(_) => 0.0,
        }
    }

    /// Coefficient `b` of an imaginary `i b x` term handled analytically.
    pub fn imag_linear_coeff(&self) -> f64 {
        match self {
            PotentialSpec::ShiftedHO => 1.0,
            _ => 0.0,
        }
    }

    /// `re_even(x) - c x²` for `x ≥ 0`, or `None` when identically zero.
    pub fn re_residual(&self) -> Option<Box<dyn Fn(f64) -> f64 + Send + Sync + '_>> {
        match self {
            PotentialSpec::ExpPT => Some(Box::new(|x: f64| (2.0 * x * x).cos())),
            PotentialSpec::CustomPT(c) => Some(Box::new(move |x| (c.re_even)(x))),
            _ => None,
        }
    }

    /// `im_odd(x) - b x` for `x ≥ 0`, or `None` when identically zero.
    pub fn im_residual(&self) -> Option<Box<dyn Fn(f64) -> f64 + Send + Sync + '_>> {
        match self {
            PotentialSpec::AhmedCubicPT { g } => {
                let g = *g;
                (g != 0.0).then(|| Box::new(move |x: f64| g * x * x) as Box<_>)
            }
            PotentialSpec::ExpPT => Some(Box::new(|x: f64| -(2.0 * x * x).sin())),
            PotentialSpec::CustomPT(c) => Some(Box::new(move |x| (c.im_odd)(x))),
            _ => None,
        }
    }

    /// Upper bound on the oscillation wavenumber of the residual parts on `[0, x_max]`.
    pub fn residual_wavenumber(&self, x_max: f64) -> f64 {
        match self {
            PotentialSpec::ExpPT => 4.0 * x_max,
            PotentialSpec::CustomPT(c) => c.wavenumber,
            _ => 0.0,
        }
    }

    /// True when the potential is real (Hermitian Hamiltonian).
    pub fn is_real(&self) -> bool {
        matches!(self, PotentialSpec::Harmonic { .. })
            || matches!(self, PotentialSpec::AhmedCubicPT { g } if *g == 0.0)
    }

    pub fn builtins() -> Vec<PotentialSpec> {
        vec![
            PotentialSpec::ahmed_cubic(2.0),
            PotentialSpec::ExpPT,
            PotentialSpec::ShiftedHO,
            PotentialSpec::Harmonic { k: 0.25 },
        ]
    }
}

/// PT check for an arbitrary complex function of `x`.
pub fn pt_check_fn(v: impl Fn(f64) -> Complex64, samples: usize, half_width: f64) -> Result<bool> {
    if samples < 16 {
        return Err(Error::InvalidInput(format!("pt_check needs ≥ 16 samples, got {samples}")));
    }
    // Golden-ratio (Kronecker) sequence.
    let alpha = 0.618_033_988_749_894_9;
    Ok((1..=samples).all(|i| {
        let u = (i as f64 * alpha).fract();
        let x = half_width * (2.0 * u - 1.0);
        (v(x) - v(-x).conj()).norm() <= 1e-12
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn direct_substitution() {
        let v = PotentialSpec::ahmed_cubic(2.0).evaluate(1.0);
        assert_eq!(v, Complex64::new(0.25, 2.0));
        assert_eq!(PotentialSpec::ExpPT.evaluate(0.0), Complex64::new(1.0, 0.0));
        let v = PotentialSpec::ExpPT.evaluate(-1.0);
        assert!((v.re - (0.25 + 2f64.cos())).abs() < 1e-15);
        assert!((v.im - 2f64.sin()).abs() < 1e-15);
        assert!((v.re + 0.16614).abs() < 1e-5 && (v.im - 0.90930).abs() < 1e-5);
        assert_eq!(PotentialSpec::ShiftedHO.evaluate(-2.0), Complex64::new(4.0, -2.0));
    }

    #[test]
    fn parity_parts_of_builtins() {
        let ahmed = PotentialSpec::ahmed_cubic(1.5);
        let (re, im) = ahmed.parity_parts();
        assert_eq!((re(2.0), im(2.0)), (1.0, 6.0));
        let shifted = PotentialSpec::ShiftedHO;
        let (re, im) = shifted.parity_parts();
        assert_eq!((re(3.0), im(3.0)), (9.0, 3.0));
        let h = PotentialSpec::harmonic(0.7).unwrap();
        let (re, im) = h.parity_parts();
        assert_eq!((re(2.0), im(2.0)), (0.7 * 4.0, 0.0));
        let exp = PotentialSpec::ExpPT;
        let (re, im) = exp.parity_parts();
        let x2 = 1.1f64 * 1.1;
        assert_eq!(re(1.1), 0.25 * x2 + (2.0 * x2).cos());
        assert_eq!(im(1.1), -(2.0 * x2).sin());
    }

    #[test]
    fn imaginary_part_vanishes_at_origin() {
        let custom = PotentialSpec::custom("shifted", |x| x * x, |_| 1.0);
        assert_eq!(custom.evaluate(0.0).im, 0.0);
        assert_eq!(custom.evaluate(-0.5).im, -1.0);
    }

    #[test]
    fn pt_check_positive_and_negative() {
        for p in PotentialSpec::builtins() {
            assert!(p.pt_check(64, 40.0).unwrap(), "{p:?}");
        }
        assert!(PotentialSpec::ahmed_cubic(2.0).pt_check(16, 10.0).unwrap());
        // Custom parts are only ever sampled on x ≥ 0, so an even imaginary
        // part handed to CustomPT is still extended oddly.
        let custom = PotentialSpec::custom("even-imag", |x| x * x, |x| x * x);
        assert!(custom.pt_check(64, 10.0).unwrap());
        // Wired directly as a complex function, the same part breaks PT.
        assert!(!pt_check_fn(|x| Complex64::new(x * x, x * x), 64, 10.0).unwrap());
        assert!(PotentialSpec::ExpPT.pt_check(8, 10.0).is_err());
    }

    #[test]
    fn names_round_trip() {
        for p in PotentialSpec::builtins() {
            let d = p.descriptor();
            let back = PotentialSpec::from_name(&d.name, d.g, d.k).unwrap();
            assert_eq!(back.descriptor(), d);
        }
        assert!(PotentialSpec::from_name("quartic", None, None).is_err());
        assert!(PotentialSpec::harmonic(-1.0).is_err());
    }

    #[test]
    fn analytic_split_reconstructs_parts() {
        for p in PotentialSpec::builtins() {
            for &x in &[0.0, 0.3, 1.7, 5.0] {
                let re = p.quadratic_coeff() * x * x
                    + p.re_residual().map_or(0.0, |f| f(x));
                let im = p.imag_linear_coeff() * x + p.im_residual().map_or(0.0, |f| f(x));
                assert!((re - p.re_even(x)).abs() < 1e-14, "{p:?}");
                assert!((im - p.im_odd(x)).abs() < 1e-14, "{p:?}");
            }
        }
    }

    proptest! {
        #[test]
        fn evaluate_agrees_with_parity_parts(x in -60.0f64..60.0, g in -3.0f64..3.0) {
            let mut all = PotentialSpec::builtins();
            all.push(PotentialSpec::ahmed_cubic(g));
            all.push(PotentialSpec::custom("cos", |x| x.cos(), |x| x.powi(3)));
            for p in all {
                let d = p.evaluate(x) - p.reconstruct(x);
                let scale = p.evaluate(x).norm().max(1.0);
                prop_assert!(d.norm() <= 1e-15 * scale, "{:?} at {}", p, x);
            }
        }
    }
}
