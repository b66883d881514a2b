//! Adaptive Gauss–Kronrod (7/15) quadrature on finite intervals.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7).
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_DEPTH: u32 = 60;

/// One 15-point Kronrod panel: returns `(kronrod, |kronrod - gauss|)`.
fn panel(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = half * XGK[i];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
///
/// Panels are bisected until the Kronrod–Gauss difference on each falls
/// below its share of `tol` (proportional to panel width).
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "quadrature tolerance {tol}"
        )));
    }
    let density = tol / (b - a).abs();
    let mut total = 0.0;
    let mut stack = vec![(a, b, 0u32)];
    while let Some((lo, hi, depth)) = stack.pop() {
        let (value, err) = panel(&f, lo, hi);
        if !value.is_finite() {
            return Err(Error::QuadratureFailure(format!(
                "non-finite integrand on [{lo}, {hi}]"
            )));
        }
        if err <= density * (hi - lo).abs() {
            total += value;
        } else if depth >= MAX_DEPTH {
            return Err(Error::QuadratureFailure(format!(
                "no convergence on [{lo}, {hi}] after {MAX_DEPTH} bisections (error {err:e})"
            )));
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, depth + 1));
            stack.push((lo, mid, depth + 1));
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn polynomials_are_exact() {
        let v = integrate(|x| 3.0 * x * x - x + 1.0, -1.0, 2.0, 1e-12).unwrap();
        assert_relative_eq!(v, 9.0 - 1.5 + 3.0, epsilon = 1e-13);
    }

    #[test]
    fn oscillatory_and_peaked() {
        let v = integrate(|x| x.sin(), 0.0, PI, 1e-12).unwrap();
        assert_relative_eq!(v, 2.0, epsilon = 1e-12);
        let v = integrate(|x| (-x * x / 1e-4).exp(), -1.0, 1.0, 1e-13).unwrap();
        assert_relative_eq!(v, PI.sqrt() * 1e-2, epsilon = 1e-12);
    }

    #[test]
    fn reversed_bounds_flip_sign() {
        let v = integrate(|x| x.exp(), 1.0, 0.0, 1e-12).unwrap();
        assert_relative_eq!(v, 1.0 - 1f64.exp(), epsilon = 1e-12);
    }

    #[test]
    fn failure_is_reported() {
        let err = integrate(|x| 1.0 / x, 0.0, 1.0, 1e-12).unwrap_err();
        assert!(matches!(err, Error::QuadratureFailure(_)));
    }
}
