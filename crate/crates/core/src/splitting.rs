//! Lie and Strang compositions of the linear flow `X` and the Burgers flow
//! `Y`, and time integration with trajectory capture.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flows::{BurgersStepper, LinearPropagator, DEFAULT_CFL_SAFETY};
use crate::operators::SymbolSpec;
use crate::spectral::{l2_norm, Field, SpectralGrid};

/// Snapshots whose L2 norm exceeds this multiple of the initial norm abort
/// the run.
pub const BLOW_UP_FACTOR: f64 = 1e3;

/// Ratio between a study step and the reference-solution step.
pub const REFERENCE_REFINEMENT: usize = 16;

const STEP_COUNT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SchemeKind {
    /// `X^dt Y^dt` (Burgers first).
    #[serde(rename = "lie_xy")]
    LieXY,
    /// `Y^dt X^dt` (linear first).
    #[serde(rename = "lie_yx")]
    LieYX,
    /// `X^{dt/2} Y^dt X^{dt/2}`.
    #[serde(rename = "strang_xyx")]
    StrangXYX,
    /// `Y^{dt/2} X^dt Y^{dt/2}`.
    #[serde(rename = "strang_yxy")]
    StrangYXY,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 4] = [
        SchemeKind::LieXY,
        SchemeKind::LieYX,
        SchemeKind::StrangXYX,
        SchemeKind::StrangYXY,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SchemeKind::LieXY => "lie_xy",
            SchemeKind::LieYX => "lie_yx",
            SchemeKind::StrangXYX => "strang_xyx",
            SchemeKind::StrangYXY => "strang_yxy",
        }
    }

    /// Formal order in time.
    pub fn order(&self) -> u32 {
        match self {
            SchemeKind::LieXY | SchemeKind::LieYX => 1,
            SchemeKind::StrangXYX | SchemeKind::StrangYXY => 2,
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SchemeKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown scheme '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeSpec {
    pub kind: SchemeKind,
    pub dt: f64,
    pub t_final: f64,
    pub capture_every: usize,
}

impl SchemeSpec {
    /// `dt` must divide `t_final`; a zero final time gives a single snapshot.
    pub fn new(kind: SchemeKind, dt: f64, t_final: f64, capture_every: usize) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt {dt} must be positive")));
        }
        if !(t_final >= 0.0 && t_final.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "t_final {t_final} must be non-negative"
            )));
        }
        if capture_every == 0 {
            return Err(Error::InvalidParameter("capture_every must be >= 1".into()));
        }
        let spec = Self {
            kind,
            dt,
            t_final,
            capture_every,
        };
        let steps = (t_final / dt).round();
        if (steps * dt - t_final).abs() > STEP_COUNT_TOL * t_final {
            return Err(Error::IncommensurateStep { dt, t_final });
        }
        Ok(spec)
    }

    pub fn n_steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }
}

/// One splitting step with its sub-flow operators prepared.
#[derive(Debug, Clone)]
pub struct SplitStepper {
    kind: SchemeKind,
    dt: f64,
    // Linear flow over dt (Lie, StrangYXY) or dt/2 (StrangXYX).
    linear: LinearPropagator,
    burgers: BurgersStepper,
}

impl SplitStepper {
    pub fn new(
        kind: SchemeKind,
        dt: f64,
        grid: SpectralGrid,
        spec: SymbolSpec,
        burgers: BurgersStepper,
    ) -> Result<Self> {
        let linear_step = match kind {
            SchemeKind::StrangXYX => 0.5 * dt,
            _ => dt,
        };
        Ok(Self {
            kind,
            dt,
            linear: LinearPropagator::new(grid, spec, linear_step)?,
            burgers,
        })
    }

    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Applies one step, returning the new field and the Burgers substeps
    /// spent.
    pub fn step(&self, u: &Field) -> Result<(Field, usize)> {
        let dt = self.dt;
        match self.kind {
            SchemeKind::LieXY => {
                let (w, n) = self.burgers.flow_counted(u, dt)?;
                Ok((self.linear.apply(&w)?, n))
            }
            SchemeKind::LieYX => {
                let v = self.linear.apply(u)?;
                self.burgers.flow_counted(&v, dt)
            }
            SchemeKind::StrangXYX => {
                let v = self.linear.apply(u)?;
                let (w, n) = self.burgers.flow_counted(&v, dt)?;
                Ok((self.linear.apply(&w)?, n))
            }
            SchemeKind::StrangYXY => {
                let (w, n1) = self.burgers.flow_counted(u, 0.5 * dt)?;
                let v = self.linear.apply(&w)?;
                let (out, n2) = self.burgers.flow_counted(&v, 0.5 * dt)?;
                Ok((out, n1 + n2))
            }
        }
    }
}

/// One splitting step assembled from caller-provided sub-flows. `prop` may
/// cache any step length; the required lengths are computed on demand.
pub fn split_step(
    scheme: &SchemeSpec,
    prop: &LinearPropagator,
    st: &BurgersStepper,
    u: &Field,
) -> Result<Field> {
    let dt = scheme.dt;
    let half = 0.5 * dt;
    match scheme.kind {
        SchemeKind::LieXY => prop.flow(&st.flow(u, dt)?, dt),
        SchemeKind::LieYX => st.flow(&prop.flow(u, dt)?, dt),
        SchemeKind::StrangXYX => prop.flow(&st.flow(&prop.flow(u, half)?, dt)?, half),
        SchemeKind::StrangYXY => st.flow(&prop.flow(&st.flow(u, half)?, dt)?, half),
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub snapshots: Vec<Field>,
    pub scheme: SchemeSpec,
    pub l2_history: Vec<f64>,
    /// Total Burgers substeps over the run.
    pub burgers_substeps: usize,
}

impl Trajectory {
    pub fn final_field(&self) -> &Field {
        self.snapshots
            .last()
            .expect("trajectory holds the initial snapshot")
    }
}

/// Options shared by every evolution in a study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolveOptions {
    pub cfl_safety: f64,
    /// Fixed Burgers substep; `None` derives it from the CFL bound per call.
    pub burgers_substep: Option<f64>,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            cfl_safety: DEFAULT_CFL_SAFETY,
            burgers_substep: None,
        }
    }
}

impl EvolveOptions {
    pub fn burgers_stepper(&self, grid: SpectralGrid, epsilon: f64) -> Result<BurgersStepper> {
        let stepper = BurgersStepper::new(grid, epsilon)?.with_cfl_safety(self.cfl_safety)?;
        match self.burgers_substep {
            Some(dtau) => stepper.with_fixed_substep(dtau),
            None => Ok(stepper),
        }
    }
}

pub fn evolve(scheme: &SchemeSpec, spec: &SymbolSpec, u0: &Field) -> Result<Trajectory> {
    evolve_with(scheme, spec, u0, EvolveOptions::default())
}

/// Iterates the splitting step to `t_final`, capturing every
/// `capture_every` steps and always the final state.
pub fn evolve_with(
    scheme: &SchemeSpec,
    spec: &SymbolSpec,
    u0: &Field,
    options: EvolveOptions,
) -> Result<Trajectory> {
    let grid = *u0.grid();
    u0.check_finite()?;
    let burgers = options.burgers_stepper(grid, spec.epsilon())?;
    let stepper = SplitStepper::new(scheme.kind, scheme.dt, grid, *spec, burgers)?;

    let n_steps = scheme.n_steps();
    let initial_norm = l2_norm(u0);
    let limit = BLOW_UP_FACTOR * initial_norm;

    let mut times = vec![0.0];
    let mut l2_history = vec![initial_norm];
    let mut snapshots = vec![u0.clone()];
    let mut burgers_substeps = 0;
    let mut u = u0.clone();
    for step in 1..=n_steps {
        let time = step as f64 * scheme.dt;
        let (next, substeps) = stepper.step(&u).map_err(|e| match e {
            Error::NonFinite { .. } => Error::BlowUpDetected {
                step,
                time,
                norm: f64::INFINITY,
                limit,
            },
            other => other,
        })?;
        burgers_substeps += substeps;
        u = next;
        let norm = l2_norm(&u);
        if !(norm <= limit) {
            return Err(Error::BlowUpDetected {
                step,
                time,
                norm,
                limit,
            });
        }
        if step % scheme.capture_every == 0 || step == n_steps {
            times.push(if step == n_steps {
                scheme.t_final
            } else {
                time
            });
            l2_history.push(norm);
            snapshots.push(u.clone());
        }
    }
    Ok(Trajectory {
        times,
        snapshots,
        scheme: *scheme,
        l2_history,
        burgers_substeps,
    })
}

/// Final state of a single evolution, without storing intermediate snapshots.
pub fn final_state(
    kind: SchemeKind,
    dt: f64,
    t_final: f64,
    spec: &SymbolSpec,
    u0: &Field,
    options: EvolveOptions,
) -> Result<Field> {
    let n_steps = SchemeSpec::new(kind, dt, t_final, 1)?.n_steps();
    let scheme = SchemeSpec::new(kind, dt, t_final, n_steps.max(1))?;
    let trajectory = evolve_with(&scheme, spec, u0, options)?;
    Ok(trajectory.final_field().clone())
}

/// Fine-step Strang (`X Y X`) surrogate for the exact solution at `t_final`.
pub fn reference_solution(
    spec: &SymbolSpec,
    u0: &Field,
    t_final: f64,
    dt_ref: f64,
) -> Result<Field> {
    reference_solution_with(spec, u0, t_final, dt_ref, EvolveOptions::default())
}

pub fn reference_solution_with(
    spec: &SymbolSpec,
    u0: &Field,
    t_final: f64,
    dt_ref: f64,
    options: EvolveOptions,
) -> Result<Field> {
    final_state(SchemeKind::StrangXYX, dt_ref, t_final, spec, u0, options)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn setup() -> (SpectralGrid, SymbolSpec, Field) {
        let grid = SpectralGrid::new(128, 1.0).unwrap();
        let spec = SymbolSpec::new(0.5).unwrap();
        let u0 = Field::from_fn(grid, |x| 0.3 * (2.0 * PI * x).sin() + 0.1).unwrap();
        (grid, spec, u0)
    }

    #[test]
    fn scheme_names_round_trip() {
        for kind in SchemeKind::ALL {
            assert_eq!(kind.name().parse::<SchemeKind>().unwrap(), kind);
        }
        assert!("lie".parse::<SchemeKind>().is_err());
    }

    #[test]
    fn scheme_spec_validation() {
        assert!(SchemeSpec::new(SchemeKind::LieXY, 0.01, 0.1, 1).is_ok());
        assert_eq!(
            SchemeSpec::new(SchemeKind::LieXY, 0.01, 0.1, 1)
                .unwrap()
                .n_steps(),
            10
        );
        assert!(matches!(
            SchemeSpec::new(SchemeKind::LieXY, 0.03, 0.1, 1),
            Err(Error::IncommensurateStep { .. })
        ));
        assert!(SchemeSpec::new(SchemeKind::LieXY, 0.0, 0.1, 1).is_err());
        assert!(SchemeSpec::new(SchemeKind::LieXY, 0.01, 0.1, 0).is_err());
        assert_eq!(
            SchemeSpec::new(SchemeKind::LieXY, 0.01, 0.0, 1)
                .unwrap()
                .n_steps(),
            0
        );
    }

    #[test]
    fn stepper_matches_free_function() {
        let (grid, spec, u0) = setup();
        let st = BurgersStepper::new(grid, spec.epsilon()).unwrap();
        let prop = LinearPropagator::new(grid, spec, 0.0).unwrap();
        for kind in SchemeKind::ALL {
            let scheme = SchemeSpec::new(kind, 0.004, 0.004, 1).unwrap();
            let stepper = SplitStepper::new(kind, 0.004, grid, spec, st).unwrap();
            let (a, _) = stepper.step(&u0).unwrap();
            let b = split_step(&scheme, &prop, &st, &u0).unwrap();
            assert!(a.distance(&b).unwrap() < 1e-14, "{kind}");
        }
    }

    #[test]
    fn tiny_step_is_near_identity() {
        let (grid, spec, u0) = setup();
        let st = BurgersStepper::new(grid, spec.epsilon()).unwrap();
        let prop = LinearPropagator::new(grid, spec, 1e-8).unwrap();
        let scheme = SchemeSpec::new(SchemeKind::LieXY, 1e-8, 1e-8, 1).unwrap();
        let out = split_step(&scheme, &prop, &st, &u0).unwrap();
        assert!(out.distance(&u0).unwrap() < 1e-6);
    }

    #[test]
    fn constants_survive_every_scheme() {
        let (grid, spec, _) = setup();
        let c = Field::constant(grid, 0.25);
        for kind in SchemeKind::ALL {
            let scheme = SchemeSpec::new(kind, 0.01, 0.05, 1).unwrap();
            let traj = evolve(&scheme, &spec, &c).unwrap();
            for v in traj.final_field().values() {
                assert!((v - 0.25).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn degenerate_and_single_step_runs() {
        let (grid, spec, u0) = setup();
        let scheme = SchemeSpec::new(SchemeKind::StrangXYX, 0.01, 0.0, 1).unwrap();
        let traj = evolve(&scheme, &spec, &u0).unwrap();
        assert_eq!(traj.times, vec![0.0]);
        assert_eq!(traj.snapshots, vec![u0.clone()]);

        let scheme = SchemeSpec::new(SchemeKind::StrangXYX, 0.01, 0.01, 1).unwrap();
        let traj = evolve(&scheme, &spec, &u0).unwrap();
        let st = BurgersStepper::new(grid, spec.epsilon()).unwrap();
        let stepper = SplitStepper::new(SchemeKind::StrangXYX, 0.01, grid, spec, st).unwrap();
        assert_eq!(traj.final_field(), &stepper.step(&u0).unwrap().0);
        assert_eq!(traj.times, vec![0.0, 0.01]);
    }

    #[test]
    fn capture_cadence() {
        let (_, spec, u0) = setup();
        let scheme = SchemeSpec::new(SchemeKind::LieYX, 0.01, 0.1, 3).unwrap();
        let traj = evolve(&scheme, &spec, &u0).unwrap();
        assert_eq!(traj.times.len(), 5);
        assert!(traj.times.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(*traj.times.last().unwrap(), 0.1);
        for (snap, norm) in traj.snapshots.iter().zip(&traj.l2_history) {
            assert_eq!(l2_norm(snap), *norm);
        }
        assert!(traj.burgers_substeps > 0);
    }

    #[test]
    fn blow_up_is_detected() {
        // An oversized nonlocal coefficient makes low modes grow violently.
        let grid = SpectralGrid::new(64, 1.0).unwrap();
        let spec = SymbolSpec::new(0.5)
            .unwrap()
            .with_coefficients(1e4, 1e4)
            .unwrap();
        let u0 = Field::from_fn(grid, |x| 1e-3 * (2.0 * PI * x).sin()).unwrap();
        let scheme = SchemeSpec::new(SchemeKind::LieXY, 0.01, 1.0, 1).unwrap();
        let err = evolve(&scheme, &spec, &u0).unwrap_err();
        assert!(matches!(err, Error::BlowUpDetected { .. }), "{err:?}");
    }

    #[test]
    fn reference_of_trivial_inputs() {
        let (grid, spec, u0) = setup();
        assert_eq!(reference_solution(&spec, &u0, 0.0, 0.001).unwrap(), u0);
        let c = Field::constant(grid, -0.5);
        let r = reference_solution(&spec, &c, 0.02, 0.001).unwrap();
        for v in r.values() {
            assert!((v + 0.5).abs() < 1e-12);
        }
    }
}
