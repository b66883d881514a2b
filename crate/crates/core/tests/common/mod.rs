#![allow(dead_code)]

use fowler_split::operators::apply_nonlocal_quadrature;
use fowler_split::{Field, SpectralGrid};
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

/// Unnormalized DFT by direct summation, `c_k = sum_j f_j exp(-2 pi i jk/N)`.
pub fn direct_dft(values: &[f64]) -> Vec<Complex64> {
    let n = values.len();
    (0..n)
        .map(|k| {
            values
                .iter()
                .enumerate()
                .map(|(j, &v)| {
                    let phase = -2.0 * PI * ((j * k) % n) as f64 / n as f64;
                    Complex64::from_polar(v, phase)
                })
                .sum()
        })
        .collect()
}

/// `max_k |c_k - conj(c_{-k})|`, the imaginary part carried back to
/// physical space by an inverse transform.
pub fn hermitian_residue(coeffs: &[Complex64]) -> f64 {
    let n = coeffs.len();
    (0..n)
        .map(|k| (coeffs[k] - coeffs[(n - k) % n].conj()).norm())
        .fold(0.0, f64::max)
}

/// `-min_xi (diffusion xi^2 - a xi^lambda)` by successive grid zooms.
pub fn growth_rate_grid_search(diffusion: f64, a: f64, lambda: f64) -> f64 {
    let f = |xi: f64| diffusion * xi * xi - a * xi.powf(lambda);
    let (mut lo, mut hi) = (0.0, 1.0);
    while f(hi) < 0.0 {
        hi *= 2.0;
    }
    let points = 2001;
    let mut best = f64::INFINITY;
    for _ in 0..12 {
        let h = (hi - lo) / (points - 1) as f64;
        let (mut arg, mut val) = (lo, f64::INFINITY);
        for i in 0..points {
            let xi = lo + i as f64 * h;
            if f(xi) < val {
                val = f(xi);
                arg = xi;
            }
        }
        best = best.min(val);
        lo = (arg - 2.0 * h).max(0.0);
        hi = arg + 2.0 * h;
    }
    -best
}

pub fn gaussian(z: f64) -> f64 {
    (-z * z).exp()
}

pub fn gaussian_second_derivative(z: f64) -> f64 {
    (4.0 * z * z - 2.0) * (-z * z).exp()
}

/// `I[exp(-(. - center)^2)](x)` by direct quadrature on the real line.
pub fn nonlocal_gaussian(x: f64, center: f64, tolerance: f64) -> f64 {
    let y = x - center;
    if y < -10.0 {
        // The integrand lives at positions left of x, where the Gaussian
        // is below exp(-100).
        return 0.0;
    }
    let xi_max = (y + 8.0).max(8.0);
    apply_nonlocal_quadrature(
        |p| gaussian_second_derivative(p - center),
        x,
        xi_max,
        tolerance,
    )
    .expect("Gaussian quadrature converges")
}

/// Far-field expansion of `I[exp(-z^2)](y)` for large positive `y`,
/// from expanding `(y - z)^{-1/3}` against the Gaussian moments.
pub fn nonlocal_gaussian_far_field(y: f64) -> f64 {
    let sqrt_pi = PI.sqrt();
    4.0 / 9.0 * sqrt_pi * y.powf(-7.0 / 3.0)
        + 70.0 / 81.0 * sqrt_pi * y.powf(-13.0 / 3.0)
        + 30.0 * 0.75 * sqrt_pi * (7280.0 / 65610.0) * y.powf(-19.0 / 3.0)
}

/// `sum_n I[g](x + n L)` for a Gaussian `g` centred inside one period:
/// the continuous operator applied to the periodic extension.
pub fn periodized_nonlocal_gaussian(x: f64, center: f64, length: f64, tolerance: f64) -> f64 {
    const DIRECT_IMAGES: usize = 3;
    const FAR_IMAGES: usize = 1_000;
    let mut total = 0.0;
    for n in 0..=DIRECT_IMAGES {
        total += nonlocal_gaussian(x + n as f64 * length, center, tolerance);
    }
    let y0 = x - center;
    for n in DIRECT_IMAGES + 1..=FAR_IMAGES {
        total += nonlocal_gaussian_far_field(y0 + n as f64 * length);
    }
    // Midpoint-rule remainder of the leading term.
    let y_end = y0 + (FAR_IMAGES as f64 + 0.5) * length;
    total += 4.0 / 9.0 * PI.sqrt() * 0.75 * y_end.powf(-4.0 / 3.0) / length;
    total
}

/// Relative L2 distance `||a - b|| / ||b||`.
pub fn relative_l2(a: &Field, b: &Field) -> f64 {
    a.distance(b).unwrap() / fowler_split::l2_norm(b)
}

pub fn field_strategy(n: usize) -> impl Strategy<Value = Field> {
    let grid = SpectralGrid::unit(n).unwrap();
    prop::collection::vec(-10.0f64..10.0, n).prop_map(move |v| Field::new(grid, v).unwrap())
}

/// Smooth random fields: a few random low modes plus a mean.
pub fn smooth_field_strategy(grid: SpectralGrid, modes: usize) -> impl Strategy<Value = Field> {
    (
        -1.0f64..1.0,
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), modes),
    )
        .prop_map(move |(mean, amps)| {
            Field::from_fn(grid, |x| {
                let theta = 2.0 * PI * x / grid.length();
                mean + amps
                    .iter()
                    .enumerate()
                    .map(|(m, (c, s))| {
                        let k = (m + 1) as f64;
                        c * (k * theta).cos() + s * (k * theta).sin()
                    })
                    .sum::<f64>()
            })
            .unwrap()
        })
}
