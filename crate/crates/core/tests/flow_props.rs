mod common;

use common::smooth_field_strategy;
use fowler_split::flows::burgers_substep;
use fowler_split::{
    hs_norm, l2_norm, make_initial_data, BurgersStepper, InitialDataKind, LinearPropagator,
    SpectralGrid, SymbolSpec,
};
use proptest::prelude::*;

fn grid() -> SpectralGrid {
    SpectralGrid::new(256, 4.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn linear_flow_norms_grow_at_most_at_beta0(
        u in smooth_field_strategy(grid(), 12),
        t in 0.0f64..1.0,
        eps in 0.05f64..0.6,
    ) {
        let spec = SymbolSpec::new(eps).unwrap();
        let prop = LinearPropagator::new(grid(), spec, t).unwrap();
        let v = prop.apply(&u).unwrap();
        let gain = (spec.beta0() * t).exp();
        for n in 0..4 {
            let s = n as f64;
            prop_assert!(hs_norm(&v, s) <= gain * hs_norm(&u, s) * (1.0 + 1e-12));
        }
        prop_assert!(l2_norm(&v) <= gain * l2_norm(&u) * (1.0 + 1e-12));
    }

    #[test]
    fn linear_flow_is_a_semigroup(u in smooth_field_strategy(grid(), 8), s in 0.0f64..0.5, t in 0.0f64..0.5) {
        let spec = SymbolSpec::new(0.5).unwrap();
        let a = LinearPropagator::new(grid(), spec, s).unwrap();
        let b = LinearPropagator::new(grid(), spec, t).unwrap();
        let ab = LinearPropagator::new(grid(), spec, s + t).unwrap();
        let lhs = b.apply(&a.apply(&u).unwrap()).unwrap();
        let rhs = ab.apply(&u).unwrap();
        prop_assert!(lhs.distance(&rhs).unwrap() <= 1e-12 * l2_norm(&rhs).max(1.0));
    }

    #[test]
    fn linear_flow_preserves_mean(u in smooth_field_strategy(grid(), 8), t in 0.0f64..1.0) {
        let prop = LinearPropagator::new(grid(), SymbolSpec::new(0.5).unwrap(), t).unwrap();
        let v = prop.apply(&u).unwrap();
        prop_assert!((v.mean() - u.mean()).abs() <= 1e-12);
    }

    #[test]
    fn burgers_substep_conserves_sum(u in smooth_field_strategy(grid(), 12), frac in 0.0f64..1.0, eps in 0.05f64..0.95) {
        let st = BurgersStepper::new(grid(), eps).unwrap();
        let dtau = frac * st.cfl_dt(&u);
        let v = burgers_substep(&st, &u, dtau).unwrap();
        prop_assert!((v.sum() - u.sum()).abs() <= 1e-12 * u.values().iter().map(|x| x.abs()).sum::<f64>().max(1.0));
    }

    #[test]
    fn burgers_flow_conserves_mean(u in smooth_field_strategy(grid(), 6), t in 0.0f64..0.02) {
        let st = BurgersStepper::new(grid(), 0.5).unwrap();
        let v = st.flow(&u, t).unwrap();
        prop_assert!((v.mean() - u.mean()).abs() <= 1e-12);
    }
}

/// Both `Y^t` and `Y^{t/2} Y^{t/2}` approach a much finer flow at first
/// order in the substep length.
#[test]
fn burgers_flow_composition_is_first_order_consistent() {
    let u0 = make_initial_data(InitialDataKind::BumpSingle, grid()).unwrap();
    let t = 0.05;
    let stepper = |safety: f64| {
        BurgersStepper::new(grid(), 0.5)
            .unwrap()
            .with_cfl_safety(safety)
            .unwrap()
    };
    let fine = stepper(0.9 / 256.0).flow(&u0, t).unwrap();
    let errors = |safety: f64| {
        let st = stepper(safety);
        let whole = st.flow(&u0, t).unwrap();
        let halves = st.flow(&st.flow(&u0, 0.5 * t).unwrap(), 0.5 * t).unwrap();
        (
            whole.distance(&fine).unwrap(),
            halves.distance(&fine).unwrap(),
            whole.distance(&halves).unwrap(),
        )
    };
    let mut previous = errors(0.9);
    for safety in [0.45, 0.225, 0.1125] {
        let current = errors(safety);
        let r_whole = previous.0 / current.0;
        let r_halves = previous.1 / current.1;
        assert!((1.8..2.2).contains(&r_whole), "ratio {r_whole}");
        assert!((1.8..2.2).contains(&r_halves), "ratio {r_halves}");
        assert!(current.2 <= current.0 + current.1);
        previous = current;
    }
}

#[test]
fn linear_flow_attains_beta0_on_the_minimizing_mode() {
    let spec = SymbolSpec::new(0.5).unwrap();
    let prop_grid = SpectralGrid::new(256, 64.0).unwrap();
    // Frequency of the most unstable mode, rounded to the grid.
    let xi_star = (spec.lambda() * spec.a()
        / (2.0 * 4.0 * std::f64::consts::PI.powi(2) * spec.eta()))
    .powf(1.0 / (2.0 - spec.lambda()));
    let m = (xi_star * prop_grid.length()).round();
    let u = fowler_split::Field::from_fn(prop_grid, |x| {
        (2.0 * std::f64::consts::PI * m * x / prop_grid.length()).cos()
    })
    .unwrap();
    let t = 0.5;
    let v = LinearPropagator::new(prop_grid, spec, t)
        .unwrap()
        .apply(&u)
        .unwrap();
    let observed = l2_norm(&v) / l2_norm(&u);
    let predicted = (-t * spec.phi(m / prop_grid.length()).re).exp();
    assert!((observed - predicted).abs() < 1e-12 * predicted);
    assert!(observed <= (spec.beta0() * t).exp());
    assert!(observed >= 0.99 * (spec.beta0() * t).exp());
}
