//! Split-step Fourier solver for the nonlocal Fowler dune equation
//!
//! ```text
//! u_t + (u^2/2)_x + I[u] - u_xx = 0,   I[f](x) = int_0^inf xi^{-1/3} f''(x - xi) d xi,
//! ```
//!
//! on a periodic grid. The equation is split into the linear nonlocal flow
//! `v_t + I[v] - eta v_xx = 0`, solved exactly in Fourier space, and the
//! viscous Burgers flow `w_t + (w^2/2)_x - eps w_xx = 0`, solved with an
//! explicit centered scheme, with `eps + eta = 1`. Lie and Strang compositions
//! of the two flows are provided together with a self-convergence harness for
//! measuring their temporal order.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod convergence;
pub mod error;
pub mod flows;
pub mod operators;
pub mod quadrature;
pub mod spectral;
pub mod splitting;

pub use convergence::{
    fit_order, make_initial_data, run_study, self_convergence_error, ConvergenceReport, ErrorRow,
    InitialData, InitialDataKind, OrderFit, Parallelism, StudyOutcome, StudySpec, SubstepPolicy,
};
pub use error::{Error, Result};
pub use flows::{BurgersStepper, LinearPropagator};
pub use operators::{SymbolKind, SymbolSpec};
pub use spectral::{
    forward_dft, hs_norm, inverse_dft, l2_norm, Field, SpectralField, SpectralGrid,
};
pub use splitting::{
    evolve, evolve_with, reference_solution, split_step, EvolveOptions, SchemeKind, SchemeSpec,
    SplitStepper, Trajectory,
};
