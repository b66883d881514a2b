//! Temporal self-convergence studies.
//!
//! Without an exact solution the error at step `dt` is measured as
//! `||u_{dt/2}(T) - u_{dt/4}(T)||_{L2}`; the temporal order is the slope of
//! `log(error)` against `log(dt)`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::SymbolSpec;
use crate::spectral::{l2_norm, Field, SpectralGrid};
use crate::splitting::{
    final_state, reference_solution_with, EvolveOptions, SchemeKind, REFERENCE_REFINEMENT,
};

/// Studies stop when the smallest error comes within this factor of the
/// reference self-consistency gap.
pub const SPATIAL_FLOOR_FACTOR: f64 = 3.0;

const MIN_LADDER_LEN: usize = 4;
const LADDER_RATIO_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialDataKind {
    BumpSingle,
    BumpDouble,
    BumpAsym,
    Gaussian,
    Sine,
}

impl InitialDataKind {
    pub const ALL: [InitialDataKind; 5] = [
        InitialDataKind::BumpSingle,
        InitialDataKind::BumpDouble,
        InitialDataKind::BumpAsym,
        InitialDataKind::Gaussian,
        InitialDataKind::Sine,
    ];

    /// The three compactly supported profiles used in convergence studies.
    pub const BUMPS: [InitialDataKind; 3] = [
        InitialDataKind::BumpSingle,
        InitialDataKind::BumpDouble,
        InitialDataKind::BumpAsym,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            InitialDataKind::BumpSingle => "bump_single",
            InitialDataKind::BumpDouble => "bump_double",
            InitialDataKind::BumpAsym => "bump_asym",
            InitialDataKind::Gaussian => "gaussian",
            InitialDataKind::Sine => "sine",
        }
    }

    pub fn default_width(&self) -> f64 {
        match self {
            InitialDataKind::BumpSingle | InitialDataKind::Gaussian => 0.5,
            InitialDataKind::BumpDouble | InitialDataKind::BumpAsym => 0.4,
            InitialDataKind::Sine => 1.0,
        }
    }
}

impl fmt::Display for InitialDataKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InitialDataKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        InitialDataKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown initial data '{s}'")))
    }
}

/// Initial profile with amplitude and width. Bumps are
/// `A exp(-1 / (1 - r^2))` for `r = |x - c| / w < 1`; the two-bump profiles
/// place bumps of half-width `w` at `L/2 -+ 1.5 w`; the asymmetric one halves
/// the right amplitude. The Gaussian is `A exp(-((x - L/2) / w)^2)` and the
/// sine `A sin(2 pi x / L)`; both are test profiles without compact support.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialData {
    pub kind: InitialDataKind,
    pub amplitude: f64,
    pub width: f64,
}

impl InitialData {
    pub fn new(kind: InitialDataKind) -> Self {
        Self {
            kind,
            amplitude: 1.0,
            width: kind.default_width(),
        }
    }

    /// Support interval of the compactly supported profiles.
    pub fn support(&self, grid: &SpectralGrid) -> Option<(f64, f64)> {
        let c = 0.5 * grid.length();
        let w = self.width;
        match self.kind {
            InitialDataKind::BumpSingle => Some((c - w, c + w)),
            InitialDataKind::BumpDouble | InitialDataKind::BumpAsym => {
                Some((c - 2.5 * w, c + 2.5 * w))
            }
            InitialDataKind::Gaussian | InitialDataKind::Sine => None,
        }
    }

    pub fn sample(&self, grid: SpectralGrid) -> Result<Field> {
        if !(self.width > 0.0 && self.amplitude.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "initial data width {} / amplitude {}",
                self.width, self.amplitude
            )));
        }
        if let Some((lo, hi)) = self.support(&grid) {
            let margin = 0.25 * (hi - lo);
            if lo - margin < 0.0 || hi + margin > grid.length() {
                return Err(Error::SupportTooWide(format!(
                    "{} support [{lo}, {hi}] needs 25% margin inside [0, {}]",
                    self.kind,
                    grid.length()
                )));
            }
        }
        let (a, w) = (self.amplitude, self.width);
        let c = 0.5 * grid.length();
        let length = grid.length();
        let profile: Box<dyn Fn(f64) -> f64> = match self.kind {
            InitialDataKind::BumpSingle => Box::new(move |x| a * bump((x - c) / w)),
            InitialDataKind::BumpDouble => {
                Box::new(move |x| a * (bump((x - c + 1.5 * w) / w) + bump((x - c - 1.5 * w) / w)))
            }
            InitialDataKind::BumpAsym => Box::new(move |x| {
                a * (bump((x - c + 1.5 * w) / w) + 0.5 * bump((x - c - 1.5 * w) / w))
            }),
            InitialDataKind::Gaussian => Box::new(move |x| a * (-((x - c) / w).powi(2)).exp()),
            InitialDataKind::Sine => {
                Box::new(move |x| a * (2.0 * std::f64::consts::PI * x / length).sin())
            }
        };
        Field::from_fn(grid, profile)
    }
}

/// `exp(-1 / (1 - r^2))` on `|r| < 1`, zero elsewhere.
pub fn bump(r: f64) -> f64 {
    if r.abs() < 1.0 {
        (-1.0 / (1.0 - r * r)).exp()
    } else {
        0.0
    }
}

pub fn make_initial_data(kind: InitialDataKind, grid: SpectralGrid) -> Result<Field> {
    InitialData::new(kind).sample(grid)
}

/// `||u_{dt/2}(T) - u_{dt/4}(T)||_{L2}`.
pub fn self_convergence_error(
    kind: SchemeKind,
    dt: f64,
    u0: &Field,
    t_final: f64,
    spec: &SymbolSpec,
    options: EvolveOptions,
) -> Result<f64> {
    let coarse = final_state(kind, 0.5 * dt, t_final, spec, u0, options)?;
    let fine = final_state(kind, 0.25 * dt, t_final, spec, u0, options)?;
    coarse.distance(&fine)
}

/// `||u_dt(T) - reference||_{L2}`.
pub fn reference_error(
    kind: SchemeKind,
    dt: f64,
    u0: &Field,
    t_final: f64,
    spec: &SymbolSpec,
    options: EvolveOptions,
    reference: &Field,
) -> Result<f64> {
    final_state(kind, dt, t_final, spec, u0, options)?.distance(reference)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub dt: f64,
    pub error_l2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderFit {
    pub slope: f64,
    /// Least-squares standard error of the slope.
    pub slope_ci: f64,
}

/// Ordinary least squares of `log(error)` on `log(dt)`.
pub fn fit_order(rows: &[ErrorRow]) -> Result<OrderFit> {
    if rows.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "need at least 3 rows, got {}",
            rows.len()
        )));
    }
    if let Some(row) = rows.iter().find(|r| !(r.error_l2 > 0.0) || !(r.dt > 0.0)) {
        return Err(Error::DegenerateFit(format!(
            "non-positive entry dt = {}, error = {}",
            row.dt, row.error_l2
        )));
    }
    let n = rows.len() as f64;
    let xs: Vec<f64> = rows.iter().map(|r| r.dt.ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.error_l2.ln()).collect();
    let x_mean = xs.iter().sum::<f64>() / n;
    let y_mean = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - x_mean).powi(2)).sum();
    if sxx <= f64::EPSILON * n {
        return Err(Error::DegenerateFit("all step sizes are equal".into()));
    }
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - x_mean) * (y - y_mean))
        .sum();
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let ssr: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let slope_ci = (ssr / (n - 2.0) / sxx).sqrt();
    Ok(OrderFit { slope, slope_ci })
}

/// How Burgers substeps are chosen across the runs of a study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubstepPolicy {
    /// One substep length for every run: the largest admissible divisor of
    /// the shortest Burgers sub-flow time in the study. All runs then share
    /// the same discrete Burgers map, and differences between runs measure
    /// splitting error only.
    #[default]
    Aligned,
    /// `ceil(t / dtau_max)` substeps per call, so the substep length varies
    /// with the outer step.
    Cfl,
}

impl FromStr for SubstepPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "aligned" => Ok(SubstepPolicy::Aligned),
            "cfl" => Ok(SubstepPolicy::Cfl),
            other => Err(Error::InvalidParameter(format!(
                "unknown substep policy '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudySpec {
    pub dts: Vec<f64>,
    pub schemes: Vec<SchemeKind>,
    pub initial_data: Vec<InitialData>,
    pub t_final: f64,
    pub grid: SpectralGrid,
    pub symbols: SymbolSpec,
    pub options: EvolveOptions,
    pub substeps: SubstepPolicy,
}

impl StudySpec {
    /// `N = 1024` on `[0, 4)`, `eps = eta = 1/2`, `T = 0.1`,
    /// `dt = T/50 ... T/800`, all schemes, the three bump profiles.
    pub fn default_study() -> Self {
        let t_final = 0.1;
        Self {
            dts: default_ladder(t_final),
            schemes: SchemeKind::ALL.to_vec(),
            initial_data: InitialDataKind::BUMPS.map(InitialData::new).to_vec(),
            t_final,
            grid: SpectralGrid::new(1024, 4.0).expect("valid default grid"),
            symbols: SymbolSpec::new(0.5).expect("valid default symbols"),
            options: EvolveOptions::default(),
            substeps: SubstepPolicy::Aligned,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let dts = &self.dts;
        if dts.len() < MIN_LADDER_LEN {
            return Err(Error::InvalidParameter(format!(
                "dt ladder needs at least {MIN_LADDER_LEN} entries"
            )));
        }
        for pair in dts.windows(2) {
            if ((pair[0] / pair[1]) - 2.0).abs() > LADDER_RATIO_TOL {
                return Err(Error::InvalidParameter(format!(
                    "consecutive dts {} and {} are not in ratio 2",
                    pair[0], pair[1]
                )));
            }
        }
        if dts[0] / dts[dts.len() - 1] < 10.0 - LADDER_RATIO_TOL {
            return Err(Error::InvalidParameter(
                "dt ladder spans less than a decade".into(),
            ));
        }
        for &dt in dts {
            crate::splitting::SchemeSpec::new(SchemeKind::LieXY, 0.25 * dt, self.t_final, 1)?;
        }
        if self.schemes.is_empty() || self.initial_data.is_empty() {
            return Err(Error::InvalidParameter("study has no cells".into()));
        }
        Ok(())
    }

    pub fn smallest_dt(&self) -> f64 {
        self.dts.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Shortest Burgers sub-flow time of any run, the half step of the
    /// refined reference solution. Every other sub-flow time is a
    /// power-of-two multiple of it.
    pub fn shortest_burgers_time(&self) -> f64 {
        self.smallest_dt() / (2 * REFERENCE_REFINEMENT) as f64
    }

    /// Evolution options for the runs of this study, resolving the substep
    /// policy against the CFL bound of the initial data.
    pub fn evolve_options(&self, initial: &[Field]) -> Result<EvolveOptions> {
        let mut options = self.options;
        if self.substeps == SubstepPolicy::Aligned && options.burgers_substep.is_none() {
            let stepper = options.burgers_stepper(self.grid, self.symbols.epsilon())?;
            let bound = initial
                .iter()
                .map(|u| stepper.cfl_dt(u))
                .fold(f64::INFINITY, f64::min);
            let unit = self.shortest_burgers_time();
            options.burgers_substep = Some(unit / (unit / bound).ceil());
        }
        Ok(options)
    }
}

/// `{T/50, T/100, T/200, T/400, T/800}`.
pub fn default_ladder(t_final: f64) -> Vec<f64> {
    [50.0, 100.0, 200.0, 400.0, 800.0]
        .iter()
        .map(|d| t_final / d)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub scheme: SchemeKind,
    pub initial_data: InitialDataKind,
    pub rows: Vec<ErrorRow>,
    pub slope: f64,
    pub slope_ci: f64,
}

/// Outcome of one `(scheme, initial data)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub scheme: SchemeKind,
    pub initial_data: InitialDataKind,
    pub report: std::result::Result<ConvergenceReport, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyOutcome {
    pub cells: Vec<CellResult>,
    /// Reference self-consistency gap per initial data, in study order.
    pub reference_gaps: Vec<(InitialDataKind, f64)>,
    /// Options every run used, including the resolved Burgers substep.
    pub options: EvolveOptions,
}

impl StudyOutcome {
    pub fn reports(&self) -> impl Iterator<Item = &ConvergenceReport> {
        self.cells.iter().filter_map(|c| c.report.as_ref().ok())
    }

    pub fn failures(&self) -> impl Iterator<Item = &CellResult> {
        self.cells.iter().filter(|c| c.report.is_err())
    }

    pub fn report(&self, scheme: SchemeKind, data: InitialDataKind) -> Option<&ConvergenceReport> {
        self.reports()
            .find(|r| r.scheme == scheme && r.initial_data == data)
    }

    /// Checks every successful report against the reference gap of its
    /// initial data.
    pub fn check_spatial_floor(&self) -> Result<()> {
        for report in self.reports() {
            let gap = self
                .reference_gaps
                .iter()
                .find(|(k, _)| *k == report.initial_data)
                .map(|(_, g)| *g)
                .unwrap_or(0.0);
            let smallest = report
                .rows
                .iter()
                .map(|r| r.error_l2)
                .fold(f64::INFINITY, f64::min);
            if smallest <= SPATIAL_FLOOR_FACTOR * gap {
                return Err(Error::SpatialFloorReached { smallest, gap });
            }
        }
        Ok(())
    }
}

/// Thread budget for a study: `0` runs serially, `n > 0` uses a dedicated
/// pool of `n` threads, `None` uses the global rayon pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Parallelism(pub Option<usize>);

impl Parallelism {
    pub fn serial() -> Self {
        Self(Some(0))
    }
}

/// `||ref(dt_ref) - ref(dt_ref / 2)||` with `dt_ref = min(dts) / 16`.
pub fn reference_gap(study: &StudySpec, u0: &Field, options: EvolveOptions) -> Result<f64> {
    let dt_ref = study.smallest_dt() / REFERENCE_REFINEMENT as f64;
    let a = reference_solution_with(&study.symbols, u0, study.t_final, dt_ref, options)?;
    let b = reference_solution_with(&study.symbols, u0, study.t_final, 0.5 * dt_ref, options)?;
    Ok(l2_norm(&a.sub(&b)?))
}

enum Job {
    Error { cell: usize, row: usize },
    Gap { data: usize },
}

/// Evaluates every `(scheme x initial data x dt)` cell plus the reference
/// gaps. Results are assembled in study order, independent of scheduling.
pub fn run_study(study: &StudySpec, parallelism: Parallelism) -> Result<StudyOutcome> {
    study.validate()?;
    let fields = study
        .initial_data
        .iter()
        .map(|d| d.sample(study.grid))
        .collect::<Result<Vec<_>>>()?;
    let options = study.evolve_options(&fields)?;

    let n_data = study.initial_data.len();
    let n_cells = study.schemes.len() * n_data;
    let mut jobs: Vec<Job> = (0..n_data).map(|data| Job::Gap { data }).collect();
    for cell in 0..n_cells {
        for row in 0..study.dts.len() {
            jobs.push(Job::Error { cell, row });
        }
    }

    let evaluate = |job: &Job| -> Result<f64> {
        match *job {
            Job::Gap { data } => reference_gap(study, &fields[data], options),
            Job::Error { cell, row } => {
                let kind = study.schemes[cell / n_data];
                let data = cell % n_data;
                self_convergence_error(
                    kind,
                    study.dts[row],
                    &fields[data],
                    study.t_final,
                    &study.symbols,
                    options,
                )
            }
        }
    };

    let values: Vec<Result<f64>> = match parallelism.0 {
        Some(0) => jobs.iter().map(evaluate).collect(),
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?
            .install(|| jobs.par_iter().map(evaluate).collect()),
        None => jobs.par_iter().map(evaluate).collect(),
    };

    let mut values = values.into_iter();
    let reference_gaps = study
        .initial_data
        .iter()
        .map(|d| {
            values
                .next()
                .expect("one gap per initial data")
                .map(|g| (d.kind, g))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut cells = Vec::with_capacity(n_cells);
    for cell in 0..n_cells {
        let scheme = study.schemes[cell / n_data];
        let data = study.initial_data[cell % n_data].kind;
        let mut rows = Vec::with_capacity(study.dts.len());
        let mut failure = None;
        for &dt in &study.dts {
            match values.next().expect("one value per row") {
                Ok(error_l2) => rows.push(ErrorRow { dt, error_l2 }),
                Err(e) => {
                    failure.get_or_insert(format!("dt = {dt}: {e}"));
                }
            }
        }
        let report = match failure {
            Some(msg) => Err(msg),
            None => fit_order(&rows)
                .map(|fit| ConvergenceReport {
                    scheme,
                    initial_data: data,
                    rows,
                    slope: fit.slope,
                    slope_ci: fit.slope_ci,
                })
                .map_err(|e| e.to_string()),
        };
        cells.push(CellResult {
            scheme,
            initial_data: data,
            report,
        });
    }
    Ok(StudyOutcome {
        cells,
        reference_gaps,
        options,
    })
}
