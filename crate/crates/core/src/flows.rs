//! The two sub-flows of the splitting.
//!
//! * [`LinearPropagator`]: exact solution operator of
//!   `v_t + I[v] - eta v_xx = 0`, applied as the Fourier multiplier
//!   `exp(-t phi(xi_k))`.
//! * [`BurgersStepper`]: explicit centered finite differences for
//!   `w_t + (w^2/2)_x - eps w_xx = 0`, substepped under the CFL–Péclet bound.
//!
//! [`hopf_cole_oracle`] evaluates the exact viscous Burgers solution on the
//! real line for validating the stepper.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operators::SymbolSpec;
use crate::quadrature;
use crate::spectral::{forward_dft, inverse_dft, Field, SpectralGrid};

pub const DEFAULT_CFL_SAFETY: f64 = 0.9;

/// Velocity floor in the advective CFL limit.
pub const VELOCITY_FLOOR: f64 = 1e-12;

// Relative slack accepted when checking a substep against the CFL bound.
const CFL_SLACK: f64 = 1e-12;

/// Linear-flow multiplier for bin `k` over time `t`. At the Nyquist bin the
/// generator is replaced by its real part (the mean of `phi(xi)` and
/// `phi(-xi)`), which keeps the multiplier real there.
fn linear_multiplier(spec: &SymbolSpec, grid: &SpectralGrid, k: usize, t: f64) -> Complex64 {
    let mut generator = spec.phi(grid.frequency(k));
    if k == grid.nyquist_bin() {
        generator.im = 0.0;
    }
    (-t * generator).exp()
}

/// Exact propagator of the linear sub-problem with multipliers cached for
/// one step length.
#[derive(Debug, Clone)]
pub struct LinearPropagator {
    grid: SpectralGrid,
    spec: SymbolSpec,
    step: f64,
    multipliers: Vec<Complex64>,
}

impl LinearPropagator {
    pub fn new(grid: SpectralGrid, spec: SymbolSpec, step: f64) -> Result<Self> {
        if !(step >= 0.0) {
            return Err(Error::NegativeTime(step));
        }
        let multipliers = (0..grid.n_nodes())
            .map(|k| linear_multiplier(&spec, &grid, k, step))
            .collect();
        Ok(Self {
            grid,
            spec,
            step,
            multipliers,
        })
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn spec(&self) -> &SymbolSpec {
        &self.spec
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn multipliers(&self) -> &[Complex64] {
        &self.multipliers
    }

    /// Advances `f` by the cached step.
    pub fn apply(&self, f: &Field) -> Result<Field> {
        self.check_grid(f)?;
        let mut spectrum = forward_dft(f);
        spectrum.apply_multiplier(|k| self.multipliers[k]);
        inverse_dft(&spectrum)
    }

    /// Advances `f` by an arbitrary time `t`.
    pub fn flow(&self, f: &Field, t: f64) -> Result<Field> {
        if !(t >= 0.0) {
            return Err(Error::NegativeTime(t));
        }
        if t == self.step {
            return self.apply(f);
        }
        self.check_grid(f)?;
        let mut spectrum = forward_dft(f);
        spectrum.apply_multiplier(|k| linear_multiplier(&self.spec, &self.grid, k, t));
        inverse_dft(&spectrum)
    }

    fn check_grid(&self, f: &Field) -> Result<()> {
        if *f.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }
}

pub fn linear_flow(prop: &LinearPropagator, f: &Field, t: f64) -> Result<Field> {
    prop.flow(f, t)
}

/// Explicit centered scheme for viscous Burgers on the periodic grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BurgersStepper {
    grid: SpectralGrid,
    epsilon: f64,
    cfl_safety: f64,
    // When set, flows use substeps of exactly this length (t must be a
    // multiple of it) instead of deriving them from the CFL bound per call.
    fixed_substep: Option<f64>,
}

impl BurgersStepper {
    pub fn new(grid: SpectralGrid, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "Burgers viscosity {epsilon} must be positive"
            )));
        }
        Ok(Self {
            grid,
            epsilon,
            cfl_safety: DEFAULT_CFL_SAFETY,
            fixed_substep: None,
        })
    }

    /// Uses substeps of length `dtau` in every flow. Each flow still checks
    /// `dtau` against the CFL bound of its input.
    pub fn with_fixed_substep(mut self, dtau: f64) -> Result<Self> {
        if !(dtau > 0.0 && dtau.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "fixed substep {dtau} must be positive"
            )));
        }
        self.fixed_substep = Some(dtau);
        Ok(self)
    }

    pub fn fixed_substep(&self) -> Option<f64> {
        self.fixed_substep
    }

    pub fn with_cfl_safety(mut self, safety: f64) -> Result<Self> {
        if !(safety > 0.0 && safety <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "CFL safety {safety} outside (0, 1]"
            )));
        }
        self.cfl_safety = safety;
        Ok(self)
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn cfl_safety(&self) -> f64 {
        self.cfl_safety
    }

    /// Largest admissible substep for `u`:
    /// `safety * min(dx / max|u|, dx^2 / (2 eps))`.
    pub fn cfl_dt(&self, u: &Field) -> f64 {
        let dx = self.grid.dx();
        let v = u.max_abs().max(VELOCITY_FLOOR);
        self.cfl_safety * (dx / v).min(dx * dx / (2.0 * self.epsilon))
    }

    /// One explicit step of length `dtau`.
    pub fn substep(&self, u: &Field, dtau: f64) -> Result<Field> {
        if *u.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        let bound = self.cfl_dt(u);
        if !(dtau >= 0.0) || dtau > bound * (1.0 + CFL_SLACK) {
            return Err(Error::CflViolation { dtau, bound });
        }
        let mut out = vec![0.0; u.values().len()];
        self.advance(u.values(), &mut out, dtau);
        let field = Field::from_raw(self.grid, out);
        field.check_finite()?;
        Ok(field)
    }

    fn advance(&self, u: &[f64], out: &mut [f64], dtau: f64) {
        let n = u.len();
        let dx = self.grid.dx();
        let adv = dtau / (2.0 * dx);
        let diff = self.epsilon * dtau / (dx * dx);
        let update = |left: f64, center: f64, right: f64| {
            center - adv * (0.5 * right * right - 0.5 * left * left)
                + diff * (right - 2.0 * center + left)
        };
        out[0] = update(u[n - 1], u[0], u[1]);
        for j in 1..n - 1 {
            out[j] = update(u[j - 1], u[j], u[j + 1]);
        }
        out[n - 1] = update(u[n - 2], u[n - 1], u[0]);
    }

    /// Number of equal substeps used to cover `t` starting from `u`:
    /// `ceil(t / dtau_max)`, or `t / dtau` rounded up under a fixed substep.
    pub fn substep_count(&self, u: &Field, t: f64) -> usize {
        if t == 0.0 {
            return 0;
        }
        match self.fixed_substep {
            // t is expected to be a multiple of dtau up to rounding.
            Some(dtau) => ((t / dtau) * (1.0 - 1e-9)).ceil().max(1.0) as usize,
            None => (t / self.cfl_dt(u)).ceil().max(1.0) as usize,
        }
    }

    /// Advances `u` by `t` using `ceil(t / dtau_max)` equal substeps, with
    /// `dtau_max` fixed from the CFL bound of the input (or the configured
    /// fixed substep).
    pub fn flow(&self, u: &Field, t: f64) -> Result<Field> {
        self.flow_counted(u, t).map(|(field, _)| field)
    }

    /// As [`BurgersStepper::flow`], also returning the substep count.
    pub fn flow_counted(&self, u: &Field, t: f64) -> Result<(Field, usize)> {
        if !(t >= 0.0) {
            return Err(Error::NegativeTime(t));
        }
        if *u.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        let count = self.substep_count(u, t);
        if count == 0 {
            return Ok((u.clone(), 0));
        }
        let dtau = t / count as f64;
        if self.fixed_substep.is_some() {
            let bound = self.cfl_dt(u);
            if dtau > bound * (1.0 + CFL_SLACK) {
                return Err(Error::CflViolation { dtau, bound });
            }
        }
        let mut current = u.values().to_vec();
        let mut next = vec![0.0; current.len()];
        for _ in 0..count {
            self.advance(&current, &mut next, dtau);
            std::mem::swap(&mut current, &mut next);
        }
        let field = Field::from_raw(self.grid, current);
        field.check_finite()?;
        Ok((field, count))
    }
}

pub fn burgers_substep(st: &BurgersStepper, u: &Field, dtau: f64) -> Result<Field> {
    st.substep(u, dtau)
}

pub fn burgers_flow(st: &BurgersStepper, u: &Field, t: f64) -> Result<Field> {
    st.flow(u, t)
}

pub fn cfl_dt(st: &BurgersStepper, u: &Field) -> f64 {
    st.cfl_dt(u)
}

// Gaussian-weight half-width (in units of sqrt(4 eps t)) the Hopf–Cole window
// starts from; it is doubled until the integrals settle.
const HOPF_COLE_INITIAL_WINDOW: f64 = 8.0;
const HOPF_COLE_MAX_WINDOW: f64 = 4096.0;

/// Exact viscous Burgers solution `w(t, x)` on the real line:
///
/// ```text
/// w(t, x) = int ((x - y) / t) E(y) dy / int E(y) dy,
/// E(y) = exp(-(x - y)^2 / (4 eps t) - (1 / (2 eps)) int_0^y w0)
/// ```
///
/// evaluated in the scaled variable `y = x + sqrt(4 eps t) z`, with the
/// primitive of `w0` shifted to start at `x`.
pub fn hopf_cole_oracle(
    w0: impl Fn(f64) -> f64,
    epsilon: f64,
    t: f64,
    x: f64,
    tolerance: f64,
) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon {epsilon}")));
    }
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "Hopf–Cole time must be positive, got {t}"
        )));
    }
    let sigma = (4.0 * epsilon * t).sqrt();
    let inner_tol = tolerance * epsilon;
    let exponent = |z: f64| -> Result<f64> {
        let primitive = quadrature::integrate(&w0, x, x + sigma * z, inner_tol)?;
        Ok(-z * z - primitive / (2.0 * epsilon))
    };

    let integrate_window = |half: f64| -> Result<(f64, f64)> {
        // Integrand failures are surfaced through this cell.
        let failure = std::cell::RefCell::new(None);
        let weight = |z: f64| match exponent(z) {
            Ok(e) => e.exp(),
            Err(err) => {
                failure.borrow_mut().get_or_insert(err);
                0.0
            }
        };
        let outer_tol = 0.1 * tolerance;
        let mass = quadrature::integrate(weight, -half, half, outer_tol)?;
        let moment = quadrature::integrate(|z| z * weight(z), -half, half, outer_tol)?;
        if let Some(err) = failure.into_inner() {
            return Err(err);
        }
        Ok((mass, moment))
    };

    let value = |(mass, moment): (f64, f64)| -sigma / t * moment / mass;
    let mut half = HOPF_COLE_INITIAL_WINDOW;
    let mut previous = value(integrate_window(half)?);
    while half < HOPF_COLE_MAX_WINDOW {
        half *= 2.0;
        let current = value(integrate_window(half)?);
        if (current - previous).abs() <= tolerance * current.abs().max(1.0) {
            return Ok(current);
        }
        previous = current;
    }
    Err(Error::QuadratureFailure(format!(
        "Hopf–Cole window did not settle at x = {x}"
    )))
}
