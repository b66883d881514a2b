//! Periodic grid, discrete Fourier transform and discrete norms.
//!
//! Transform convention (unnormalized forward, `1/N` on the inverse):
//!
//! ```text
//! c_k = sum_j u_j exp(-2 pi i j k / N)
//! u_j = (1/N) sum_k c_k exp(+2 pi i j k / N)
//! ```
//!
//! Bin `k` in DFT order carries the signed frequency `xi_k = k / length` for
//! `k < N/2` and `(k - N) / length` otherwise, so the Nyquist bin maps to
//! `-(N/2) / length`. The Nyquist mode of a real field is a pure cosine;
//! multipliers applied there keep only their real part.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Imaginary residue tolerated by [`inverse_dft`], relative to the input norm.
pub const IMAG_RESIDUE_TOL: f64 = 1e-10;

const MIN_LOG2_NODES: u32 = 4;

/// Uniform periodic grid on `[0, length)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralGrid {
    n_nodes: usize,
    length: f64,
}

impl SpectralGrid {
    pub fn new(n_nodes: usize, length: f64) -> Result<Self> {
        if !n_nodes.is_power_of_two() || n_nodes.trailing_zeros() < MIN_LOG2_NODES {
            return Err(Error::InvalidGrid(format!(
                "node count {n_nodes} must be a power of two >= {}",
                1usize << MIN_LOG2_NODES
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "length {length} must be positive"
            )));
        }
        Ok(Self { n_nodes, length })
    }

    /// Grid on the unit interval.
    pub fn unit(n_nodes: usize) -> Result<Self> {
        Self::new(n_nodes, 1.0)
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n_nodes as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        j as f64 * self.length / self.n_nodes as f64
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_nodes).map(move |j| self.node(j))
    }

    /// Signed wavenumber of DFT bin `k` (in `0..n_nodes`).
    pub fn wavenumber(&self, k: usize) -> i64 {
        let n = self.n_nodes as i64;
        let k = k as i64;
        if k < n / 2 {
            k
        } else {
            k - n
        }
    }

    /// Frequency `xi_k` of DFT bin `k`.
    pub fn frequency(&self, k: usize) -> f64 {
        self.wavenumber(k) as f64 / self.length
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.n_nodes).map(|k| self.frequency(k)).collect()
    }

    pub fn nyquist_bin(&self) -> usize {
        self.n_nodes / 2
    }

    /// DFT bin holding signed wavenumber `m`, reduced modulo `n_nodes`.
    pub fn bin(&self, m: i64) -> usize {
        m.rem_euclid(self.n_nodes as i64) as usize
    }
}

/// Real nodal values on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: SpectralGrid,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: SpectralGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_nodes() {
            return Err(Error::LengthMismatch {
                expected: grid.n_nodes(),
                found: values.len(),
            });
        }
        let field = Self { grid, values };
        field.check_finite()?;
        Ok(field)
    }

    /// Samples `f` at the grid nodes.
    pub fn from_fn(grid: SpectralGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.nodes().map(f).collect())
    }

    pub fn zeros(grid: SpectralGrid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.n_nodes()],
        }
    }

    pub fn constant(grid: SpectralGrid, value: f64) -> Self {
        Self {
            grid,
            values: vec![value; grid.n_nodes()],
        }
    }

    /// Crate-internal constructor; callers run [`Field::check_finite`] where
    /// the values may have left the finite range.
    pub(crate) fn from_raw(grid: SpectralGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.n_nodes());
        Self { grid, values }
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(index) => Err(Error::NonFinite { index }),
            None => Ok(()),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Spatial mean `(1/length) * dx * sum_j u_j`.
    pub fn mean(&self) -> f64 {
        self.sum() / self.values.len() as f64
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self::from_raw(self.grid, values))
    }

    /// Discrete L2 distance to `other`.
    pub fn distance(&self, other: &Field) -> Result<f64> {
        Ok(l2_norm(&self.sub(other)?))
    }
}

/// DFT coefficients in bin order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: SpectralGrid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(grid: SpectralGrid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.n_nodes() {
            return Err(Error::LengthMismatch {
                expected: grid.n_nodes(),
                found: coeffs.len(),
            });
        }
        Ok(Self { grid, coeffs })
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient of signed wavenumber `m`.
    pub fn coeff(&self, m: i64) -> Complex64 {
        self.coeffs[self.grid.bin(m)]
    }

    /// `sqrt(sum_k |c_k|^2 / N)`, equal to the Euclidean norm of the
    /// corresponding nodal values.
    pub fn norm(&self) -> f64 {
        let sum: f64 = self.coeffs.iter().map(|c| c.norm_sqr()).sum();
        (sum / self.coeffs.len() as f64).sqrt()
    }

    /// Multiplies every bin by `multiplier(k)`. The Nyquist bin keeps only the
    /// real part of the product so that real fields stay real.
    pub fn apply_multiplier(&mut self, multiplier: impl Fn(usize) -> Complex64) {
        let nyquist = self.grid.nyquist_bin();
        for (k, c) in self.coeffs.iter_mut().enumerate() {
            *c *= multiplier(k);
            if k == nyquist {
                c.im = 0.0;
            }
        }
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn forward_plan(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n))
}

fn inverse_plan(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n))
}

pub fn forward_dft(f: &Field) -> SpectralField {
    let mut buf: Vec<Complex64> = f.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    forward_plan(buf.len()).process(&mut buf);
    SpectralField {
        grid: f.grid,
        coeffs: buf,
    }
}

/// Inverse transform back to a real field. The imaginary residue must stay
/// below [`IMAG_RESIDUE_TOL`] times the input norm; it is then discarded.
pub fn inverse_dft(spectrum: &SpectralField) -> Result<Field> {
    let n = spectrum.coeffs.len();
    let mut buf = spectrum.coeffs.clone();
    inverse_plan(n).process(&mut buf);
    let scale = 1.0 / n as f64;

    let residue = buf
        .iter()
        .map(|c| (c.im * scale).powi(2))
        .sum::<f64>()
        .sqrt();
    let limit = IMAG_RESIDUE_TOL * spectrum.norm();
    if residue > limit {
        return Err(Error::NonHermitianInput { residue, limit });
    }
    let field = Field::from_raw(spectrum.grid, buf.iter().map(|c| c.re * scale).collect());
    field.check_finite()?;
    Ok(field)
}

/// Midpoint-rule L2 norm `sqrt(dx * sum_j u_j^2)`.
pub fn l2_norm(f: &Field) -> f64 {
    let sum: f64 = f.values.iter().map(|v| v * v).sum();
    (f.grid.dx() * sum).sqrt()
}

/// Sobolev norm with weights `(1 + xi_k^2)^s`, normalized so that
/// `hs_norm(f, 0) == l2_norm(f)`.
pub fn hs_norm(f: &Field, s: f64) -> f64 {
    hs_norm_spectral(&forward_dft(f), s)
}

pub fn hs_norm_spectral(spectrum: &SpectralField, s: f64) -> f64 {
    let grid = spectrum.grid;
    let n = grid.n_nodes() as f64;
    let sum: f64 = spectrum
        .coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let xi = grid.frequency(k);
            (1.0 + xi * xi).powf(s) * c.norm_sqr()
        })
        .sum();
    (grid.length() * sum / (n * n)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn rejects_bad_grids() {
        assert!(SpectralGrid::new(8, 1.0).is_err());
        assert!(SpectralGrid::new(48, 1.0).is_err());
        assert!(SpectralGrid::new(64, 0.0).is_err());
        assert!(SpectralGrid::new(16, 1.0).is_ok());
    }

    #[test]
    fn frequency_mapping() {
        let g = SpectralGrid::new(16, 2.0).unwrap();
        assert_eq!(g.frequency(0), 0.0);
        assert_eq!(g.frequency(1), 0.5);
        assert_eq!(g.frequency(7), 3.5);
        assert_eq!(g.frequency(8), -4.0);
        assert_eq!(g.frequency(15), -0.5);
        assert_eq!(g.bin(-1), 15);
        assert_relative_eq!(g.dx(), 0.125);
        assert_relative_eq!(g.node(3), 0.375);
    }

    #[test]
    fn field_validation() {
        let g = SpectralGrid::unit(16).unwrap();
        assert!(matches!(
            Field::new(g, vec![0.0; 15]),
            Err(Error::LengthMismatch { .. })
        ));
        let mut v = vec![0.0; 16];
        v[3] = f64::NAN;
        assert_eq!(Field::new(g, v), Err(Error::NonFinite { index: 3 }));
    }

    #[test]
    fn dft_of_constant() {
        let g = SpectralGrid::unit(16).unwrap();
        let s = forward_dft(&Field::constant(g, 2.5));
        assert_relative_eq!(s.coeff(0).re, 40.0, epsilon = 1e-12);
        for k in 1..16 {
            assert!(s.coeffs()[k].norm() < 1e-12);
        }
    }

    #[test]
    fn dft_of_cosine() {
        let g = SpectralGrid::unit(32).unwrap();
        let f = Field::from_fn(g, |x| (2.0 * PI * x).cos()).unwrap();
        let s = forward_dft(&f);
        for m in -16..16i64 {
            let expected = if m.abs() == 1 { 16.0 } else { 0.0 };
            assert!((s.coeff(m) - Complex64::new(expected, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn inverse_special_cases() {
        let g = SpectralGrid::unit(16).unwrap();
        let zero = SpectralField::new(g, vec![Complex64::new(0.0, 0.0); 16]).unwrap();
        assert_eq!(inverse_dft(&zero).unwrap().max_abs(), 0.0);

        let mut c = vec![Complex64::new(0.0, 0.0); 16];
        c[0] = Complex64::new(16.0, 0.0);
        let one = inverse_dft(&SpectralField::new(g, c).unwrap()).unwrap();
        for v in one.values() {
            assert_relative_eq!(*v, 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn inverse_rejects_non_hermitian() {
        let g = SpectralGrid::unit(16).unwrap();
        let mut c = vec![Complex64::new(0.0, 0.0); 16];
        c[1] = Complex64::new(1.0, 0.0);
        let err = inverse_dft(&SpectralField::new(g, c).unwrap()).unwrap_err();
        assert!(matches!(err, Error::NonHermitianInput { .. }));
    }

    #[test]
    fn norms_of_simple_fields() {
        let g = SpectralGrid::unit(256).unwrap();
        assert_eq!(l2_norm(&Field::zeros(g)), 0.0);
        assert_relative_eq!(l2_norm(&Field::constant(g, 1.0)), 1.0, epsilon = 1e-14);
        let sine = Field::from_fn(g, |x| (2.0 * PI * x).sin()).unwrap();
        assert_relative_eq!(l2_norm(&sine), 0.5f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(hs_norm(&sine, 1.0), 1.0, epsilon = 1e-12);
        for s in [0.0, 1.0, 2.5] {
            assert_relative_eq!(hs_norm(&Field::constant(g, 1.0), s), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn nyquist_multiplier_keeps_real_part() {
        let g = SpectralGrid::unit(16).unwrap();
        let f = Field::from_fn(g, |x| (16.0 * PI * x).cos()).unwrap();
        let mut s = forward_dft(&f);
        s.apply_multiplier(|_| Complex64::new(0.5, 3.0));
        let out = inverse_dft(&s).unwrap();
        for (a, b) in out.values().iter().zip(f.values()) {
            assert_relative_eq!(*a, 0.5 * b, epsilon = 1e-13);
        }
    }
}
