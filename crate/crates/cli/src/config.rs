use crate::error::CliError;
use fowler_split::convergence::default_ladder;
use fowler_split::operators::DEFAULT_LAMBDA;
use fowler_split::{
    EvolveOptions, InitialData, InitialDataKind, SchemeKind, SchemeSpec, SpectralGrid, StudySpec,
    SubstepPolicy, SymbolSpec,
};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown format '{other}' (expected csv or json)")),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        })
    }
}

/// Everything a run depends on. Serialized verbatim into every JSON sidecar
/// so that a sidecar can be passed back through `--config`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub n: usize,
    pub length: f64,
    pub epsilon: f64,
    pub lambda: f64,
    pub a_i: Option<f64>,
    pub b_i: Option<f64>,
    pub scheme: SchemeKind,
    pub schemes: Vec<SchemeKind>,
    pub dt: f64,
    pub t_final: f64,
    pub capture_every: usize,
    pub init: InitialDataKind,
    pub inits: Vec<InitialDataKind>,
    pub amplitude: f64,
    pub width: Option<f64>,
    pub cfl_safety: f64,
    pub substeps: SubstepPolicy,
    pub out: PathBuf,
    pub format: OutputFormat,
    /// Reserved; every run is deterministic.
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: 1024,
            length: 4.0,
            epsilon: 0.5,
            lambda: DEFAULT_LAMBDA,
            a_i: None,
            b_i: None,
            scheme: SchemeKind::StrangXYX,
            schemes: SchemeKind::ALL.to_vec(),
            dt: 1e-3,
            t_final: 0.1,
            capture_every: 10,
            init: InitialDataKind::BumpSingle,
            inits: InitialDataKind::BUMPS.to_vec(),
            amplitude: 1.0,
            width: None,
            cfl_safety: fowler_split::flows::DEFAULT_CFL_SAFETY,
            substeps: SubstepPolicy::Aligned,
            out: PathBuf::from("out"),
            format: OutputFormat::Csv,
            seed: 0,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, CliError>
where
    T::Err: fmt::Display,
{
    value
        .trim()
        .parse()
        .map_err(|e| CliError::Config(format!("{key} = '{value}': {e}")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>, CliError>
where
    T::Err: fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

fn parse_optional(key: &str, value: &str) -> Result<Option<f64>, CliError> {
    match value.trim() {
        "" | "none" | "default" => Ok(None),
        v => parse(key, v).map(Some),
    }
}

impl RunConfig {
    /// Sets one field from its textual form. Keys accept `-` or `_`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let key = key.trim().replace('-', "_");
        let k = key.as_str();
        match k {
            "n" | "n_nodes" => self.n = parse(k, value)?,
            "length" => self.length = parse(k, value)?,
            "epsilon" => self.epsilon = parse(k, value)?,
            "eta" => self.epsilon = 1.0 - parse::<f64>(k, value)?,
            "lambda" => self.lambda = parse(k, value)?,
            "a_i" => self.a_i = parse_optional(k, value)?,
            "b_i" => self.b_i = parse_optional(k, value)?,
            "scheme" => self.scheme = parse(k, value)?,
            "schemes" => self.schemes = parse_list(k, value)?,
            "dt" => self.dt = parse(k, value)?,
            "t_final" => self.t_final = parse(k, value)?,
            "capture_every" => self.capture_every = parse(k, value)?,
            "init" => self.init = parse(k, value)?,
            "inits" => self.inits = parse_list(k, value)?,
            "amplitude" => self.amplitude = parse(k, value)?,
            "width" => self.width = parse_optional(k, value)?,
            "cfl_safety" => self.cfl_safety = parse(k, value)?,
            "substeps" => self.substeps = parse(k, value)?,
            "out" => self.out = PathBuf::from(value.trim()),
            "format" => self.format = parse(k, value)?,
            "seed" => self.seed = parse(k, value)?,
            other => return Err(CliError::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Reads a flat `key = value` file, or a JSON object (a bare config or a
    /// sidecar carrying one under `"config"`).
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        if text.trim_start().starts_with('{') {
            let mut value: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            if let Some(inner) = value.get_mut("config") {
                value = inner.take();
            }
            return serde_json::from_value(value)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())));
        }
        let mut config = Self::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!(
                    "{}:{}: expected key = value",
                    path.display(),
                    lineno + 1
                ))
            })?;
            config.set(key, value)?;
        }
        Ok(config)
    }

    pub fn grid(&self) -> Result<SpectralGrid, CliError> {
        Ok(SpectralGrid::new(self.n, self.length)?)
    }

    /// Symbol parameters; `allow_inviscid` admits `epsilon = 0`.
    pub fn symbols(&self, allow_inviscid: bool) -> Result<SymbolSpec, CliError> {
        let eps_ok = if allow_inviscid {
            (0.0..1.0).contains(&self.epsilon)
        } else {
            self.epsilon > 0.0 && self.epsilon < 1.0
        };
        if !eps_ok {
            return Err(CliError::Config(format!(
                "epsilon {} outside {}",
                self.epsilon,
                if allow_inviscid { "[0, 1)" } else { "(0, 1)" }
            )));
        }
        let mut spec = SymbolSpec::new(self.epsilon)?.with_lambda(self.lambda)?;
        if self.a_i.is_some() || self.b_i.is_some() {
            let a = self.a_i.unwrap_or(spec.a());
            let b = self.b_i.unwrap_or(spec.b());
            spec = spec.with_coefficients(a, b)?;
        }
        Ok(spec)
    }

    pub fn initial_data(&self, kind: InitialDataKind) -> Result<InitialData, CliError> {
        if !(self.amplitude.is_finite()) {
            return Err(CliError::Config(format!("amplitude {}", self.amplitude)));
        }
        Ok(InitialData {
            kind,
            amplitude: self.amplitude,
            width: self.width.unwrap_or(kind.default_width()),
        })
    }

    pub fn options(&self) -> Result<EvolveOptions, CliError> {
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(CliError::Config(format!(
                "cfl_safety {} outside (0, 1]",
                self.cfl_safety
            )));
        }
        Ok(EvolveOptions {
            cfl_safety: self.cfl_safety,
            burgers_substep: None,
        })
    }

    pub fn scheme_spec(&self) -> Result<SchemeSpec, CliError> {
        Ok(SchemeSpec::new(
            self.scheme,
            self.dt,
            self.t_final,
            self.capture_every,
        )?)
    }

    pub fn study(&self) -> Result<StudySpec, CliError> {
        let grid = self.grid()?;
        let study = StudySpec {
            dts: default_ladder(self.t_final),
            schemes: self.schemes.clone(),
            initial_data: self
                .inits
                .iter()
                .map(|&k| self.initial_data(k))
                .collect::<Result<_, _>>()?,
            t_final: self.t_final,
            grid,
            symbols: self.symbols(false)?,
            options: self.options()?,
            substeps: self.substeps,
        };
        study.validate()?;
        for data in &study.initial_data {
            data.sample(grid)?;
        }
        Ok(study)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_value_parsing() {
        let mut c = RunConfig::default();
        c.set("t-final", "0.5").unwrap();
        c.set("schemes", "lie_xy, strang_yxy").unwrap();
        c.set("eta", "0.25").unwrap();
        c.set("width", "none").unwrap();
        assert_eq!(c.t_final, 0.5);
        assert_eq!(c.schemes, vec![SchemeKind::LieXY, SchemeKind::StrangYXY]);
        assert_eq!(c.epsilon, 0.75);
        assert_eq!(c.width, None);
        assert!(c.set("bogus", "1").is_err());
        assert!(c.set("n", "many").is_err());
        assert!(c.set("format", "xml").is_err());
    }

    #[test]
    fn validation_rejects_bad_parameters() {
        let bad = |key: &str, value: &str| {
            let mut c = RunConfig::default();
            c.set(key, value).unwrap();
            c
        };
        assert!(bad("epsilon", "1").symbols(false).is_err());
        assert!(bad("epsilon", "0").symbols(false).is_err());
        assert!(bad("epsilon", "0").symbols(true).is_ok());
        assert!(bad("lambda", "2").symbols(false).is_err());
        assert!(bad("n", "100").grid().is_err());
        assert!(bad("dt", "0.03").scheme_spec().is_err());
        assert!(bad("cfl_safety", "1.5").options().is_err());
        assert!(RunConfig::default().study().is_ok());
    }

    #[test]
    fn json_round_trip() {
        let mut c = RunConfig::default();
        c.set("a_i", "3.5").unwrap();
        let text = serde_json::to_string(&c).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
    }
}
