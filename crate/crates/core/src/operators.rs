//! Fourier symbols of the nonlocal operator and of the two sub-flows.
//!
//! With `m(xi) = -a |xi|^lambda + i b sgn(xi) |xi|^lambda` the multiplier of the
//! nonlocal operator `I`:
//!
//! * `psi(xi) = 4 pi^2 xi^2 + m(xi)` is the symbol of `I - d_xx`,
//! * `phi(xi) = 4 pi^2 eta xi^2 + m(xi)` the symbol of `I - eta d_xx`,
//! * `heat(xi) = 4 pi^2 eps xi^2` the symbol of `-eps d_xx`,
//!
//! so `psi = phi + heat` whenever `eps + eta = 1`. The `phi` symbol carries the
//! imaginary unit on its `b` term; without it that identity fails.
//!
//! Two coefficient sets are provided for `lambda = 4/3`.
//! [`SymbolSpec::new`] uses `a = 2 pi^2 Gamma(2/3)`, `b = sqrt(3) a`, the
//! customary constants for this model. The integral
//! `int_0^inf xi^{-1/3} f''(x - xi) d xi` has, under the `exp(-2 pi i x xi)`
//! transform, multiplier constants smaller by `(2 pi)^{-2/3}`; those are
//! [`integral_kernel_coefficients`], used when comparing the spectral operator
//! against [`apply_nonlocal_quadrature`].

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;
use crate::spectral::{forward_dft, hs_norm, hs_norm_spectral, inverse_dft, Field};

const FOUR_PI_SQ: f64 = 4.0 * PI * PI;

pub const DEFAULT_LAMBDA: f64 = 4.0 / 3.0;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Lanczos approximation of the Gamma function, with reflection below 1/2.
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        PI / ((PI * x).sin() * gamma(1.0 - x))
    } else {
        let x = x - 1.0;
        let t = x + LANCZOS_G + 0.5;
        let series = LANCZOS_COEFFS[1..]
            .iter()
            .enumerate()
            .fold(LANCZOS_COEFFS[0], |acc, (i, c)| {
                acc + c / (x + (i + 1) as f64)
            });
        (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * series
    }
}

pub fn gamma_two_thirds() -> f64 {
    gamma(2.0 / 3.0)
}

/// `(a, b) = (2 pi^2 Gamma(2/3), 2 sqrt(3) pi^2 Gamma(2/3))`.
pub fn default_coefficients() -> (f64, f64) {
    let a = 2.0 * PI * PI * gamma_two_thirds();
    (a, 3f64.sqrt() * a)
}

/// Multiplier constants of the integral operator under the
/// `exp(-2 pi i x xi)` convention.
pub fn integral_kernel_coefficients() -> (f64, f64) {
    let (a, b) = default_coefficients();
    let scale = (2.0 * PI).powf(-2.0 / 3.0);
    (a * scale, b * scale)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SymbolKind {
    NonlocalI,
    PsiI,
    PhiI,
    Heat,
}

/// Parameters of every symbol: viscosity split and nonlocal multiplier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymbolSpec {
    epsilon: f64,
    lambda: f64,
    a: f64,
    b: f64,
}

impl SymbolSpec {
    /// `epsilon` is the Burgers viscosity; the linear flow gets
    /// `eta = 1 - epsilon`. `epsilon = 0` (so `eta = 1`) is accepted for
    /// symbol inspection; the Burgers stepper itself requires `epsilon > 0`.
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&epsilon) {
            return Err(Error::InvalidParameter(format!(
                "epsilon {epsilon} outside [0, 1)"
            )));
        }
        let (a, b) = default_coefficients();
        Ok(Self {
            epsilon,
            lambda: DEFAULT_LAMBDA,
            a,
            b,
        })
    }

    pub fn with_lambda(mut self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda < 2.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda {lambda} outside (0, 2)"
            )));
        }
        self.lambda = lambda;
        Ok(self)
    }

    pub fn with_coefficients(mut self, a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "nonlocal coefficients must be positive, got a = {a}, b = {b}"
            )));
        }
        self.a = a;
        self.b = b;
        Ok(self)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn eta(&self) -> f64 {
        1.0 - self.epsilon
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// `|xi|^lambda`, with the zero frequency mapped to zero.
    fn homogeneous(&self, xi: f64) -> f64 {
        if xi == 0.0 {
            0.0
        } else {
            xi.abs().powf(self.lambda)
        }
    }

    pub fn symbol(&self, kind: SymbolKind, xi: f64) -> Complex64 {
        match kind {
            SymbolKind::NonlocalI => self.nonlocal(xi),
            SymbolKind::PsiI => self.psi(xi),
            SymbolKind::PhiI => self.phi(xi),
            SymbolKind::Heat => Complex64::new(self.heat(xi), 0.0),
        }
    }

    /// Multiplier of the nonlocal operator.
    pub fn nonlocal(&self, xi: f64) -> Complex64 {
        let h = self.homogeneous(xi);
        Complex64::new(-self.a * h, self.b * xi.signum() * h)
    }

    pub fn psi(&self, xi: f64) -> Complex64 {
        self.nonlocal(xi) + FOUR_PI_SQ * xi * xi
    }

    pub fn phi(&self, xi: f64) -> Complex64 {
        self.nonlocal(xi) + FOUR_PI_SQ * self.eta() * xi * xi
    }

    pub fn heat(&self, xi: f64) -> f64 {
        FOUR_PI_SQ * self.epsilon * xi * xi
    }

    /// `-min Re psi`.
    pub fn alpha0(&self) -> f64 {
        growth_rate(FOUR_PI_SQ, self.a, self.lambda)
    }

    /// `-min Re phi`.
    pub fn beta0(&self) -> f64 {
        growth_rate(FOUR_PI_SQ * self.eta(), self.a, self.lambda)
    }

    /// Modulus constant of the nonlocal multiplier: `|m(xi)| = bound * |xi|^lambda`.
    pub fn nonlocal_bound(&self) -> f64 {
        self.a.hypot(self.b)
    }
}

/// `-min_xi (diffusion xi^2 - a |xi|^lambda)`, attained at
/// `xi* = (lambda a / (2 diffusion))^(1 / (2 - lambda))`.
fn growth_rate(diffusion: f64, a: f64, lambda: f64) -> f64 {
    if diffusion <= 0.0 {
        return f64::INFINITY;
    }
    let xi = (lambda * a / (2.0 * diffusion)).powf(1.0 / (2.0 - lambda));
    -(diffusion * xi * xi - a * xi.powf(lambda))
}

pub fn apply_nonlocal_spectral(spec: &SymbolSpec, f: &Field) -> Result<Field> {
    let grid = *f.grid();
    let mut spectrum = forward_dft(f);
    spectrum.apply_multiplier(|k| spec.nonlocal(grid.frequency(k)));
    inverse_dft(&spectrum)
}

/// Evaluates `int_0^xi_max xi^{-1/3} f''(x - xi) d xi` for the given second
/// derivative `f''`.
///
/// The substitution `xi = s^3` turns the integrand into `3 s f''(x - s^3)`,
/// which is smooth at the origin. The neglected tail is estimated by the
/// contribution of `[xi_max, 2 xi_max]`; if that exceeds `tolerance` the call
/// fails with [`Error::ToleranceNotMet`].
pub fn apply_nonlocal_quadrature(
    second_derivative: impl Fn(f64) -> f64,
    x: f64,
    xi_max: f64,
    tolerance: f64,
) -> Result<f64> {
    if !(xi_max > 0.0) {
        return Err(Error::InvalidParameter(format!("xi_max {xi_max}")));
    }
    let tail = quadrature::integrate(
        |xi| xi.powf(-1.0 / 3.0) * second_derivative(x - xi).abs(),
        xi_max,
        2.0 * xi_max,
        tolerance,
    )?;
    if tail > tolerance {
        return Err(Error::ToleranceNotMet {
            estimate: tail,
            tolerance,
        });
    }
    quadrature::integrate(
        |s| 3.0 * s * second_derivative(x - s * s * s),
        0.0,
        xi_max.cbrt(),
        tolerance,
    )
}

/// `||I f||_{H^{s - lambda}} / ||f||_{H^s}`, bounded by
/// [`SymbolSpec::nonlocal_bound`].
pub fn hs_bound_ratio(spec: &SymbolSpec, f: &Field, s: f64) -> Result<f64> {
    let denom = hs_norm(f, s);
    if denom == 0.0 {
        return Err(Error::ZeroField);
    }
    let grid = *f.grid();
    let mut spectrum = forward_dft(f);
    spectrum.apply_multiplier(|k| spec.nonlocal(grid.frequency(k)));
    Ok(hs_norm_spectral(&spectrum, s - spec.lambda()) / denom)
}
