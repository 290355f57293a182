//! Flat `section.key = value` experiment configuration.
//!
//! Lines are `key = value`; `#` starts a comment. Every key is optional and
//! has a default, but unknown keys (and keys that do not apply to the chosen
//! `initial.kind`) are rejected. Lists are comma separated.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use cch_core::{DiagnosticsSpec, LpExponent, ModelParams, PicardStart, Scheme};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GridSection {
    pub dim: usize,
    pub n: usize,
    pub box_length: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSection {
    pub scheme: Scheme,
    pub dt: f64,
    pub t_end: f64,
    pub record_every: usize,
    pub blowup_linf: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    /// `A exp(-|x - c|²/(2w²))`, `c` defaulting to the box center.
    Gaussian { amplitude: f64, width: f64, center: Option<Vec<f64>>, mean_zero: bool },
    /// Random phases on the shell `band_min <= |m| <= band_max` with
    /// amplitudes `|m|^{-slope}`, rescaled so that `sqrt(E₁) = target_h1`.
    RandomBand { seed: u64, slope: f64, band_min: f64, band_max: f64, target_h1: f64 },
    /// Whitespace-separated samples in row-major order.
    File { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSection {
    pub csv: String,
    pub json: String,
    /// File stem; checkpoints are written as `<stem>_<step>.cch`.
    pub checkpoint: String,
    /// Steps between checkpoints; 0 writes only the final one.
    pub checkpoint_every: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Horizon {
    None,
    /// `(L/8)²`.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitSection {
    pub t_min: f64,
    pub floor_factor: f64,
    pub horizon: Horizon,
    /// `L^p` class of the data for the predicted exponents.
    pub p: Option<f64>,
    pub allow_extension: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardSection {
    pub horizon: f64,
    pub dt: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub start: PicardStart,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub grid: GridSection,
    pub model: ModelParams,
    pub solver: SolverSection,
    pub initial: InitialData,
    pub output: OutputSection,
    pub diagnostics: DiagnosticsSpec,
    pub fit: FitSection,
    pub picard: PicardSection,
}

struct Entries {
    map: BTreeMap<String, (String, usize)>,
}

impl Entries {
    fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", i + 1)))?;
            let key = key.trim().to_string();
            if map.insert(key.clone(), (value.trim().to_string(), i + 1)).is_some() {
                return Err(CliError::Config(format!("line {}: duplicate key {key}", i + 1)));
            }
        }
        Ok(Self { map })
    }

    fn take_raw(&mut self, key: &str) -> Option<(String, usize)> {
        self.map.remove(key)
    }

    fn take<T: std::str::FromStr>(&mut self, key: &str, default: T) -> Result<T> {
        match self.take_raw(key) {
            None => Ok(default),
            Some((v, line)) => parse_value(key, &v, line),
        }
    }

    fn take_list(&mut self, key: &str, default: Vec<f64>) -> Result<Vec<f64>> {
        match self.take_raw(key) {
            None => Ok(default),
            Some((v, line)) => parse_list(key, &v, line),
        }
    }

    fn finish(self) -> Result<()> {
        if let Some((key, (_, line))) = self.map.into_iter().next() {
            return Err(CliError::Config(format!("line {line}: unknown or inapplicable key {key}")));
        }
        Ok(())
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, v: &str, line: usize) -> Result<T> {
    v.parse()
        .map_err(|_| CliError::Config(format!("line {line}: cannot parse {key} = {v}")))
}

fn parse_list(key: &str, v: &str, line: usize) -> Result<Vec<f64>> {
    if v.is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|s| parse_value(key, s.trim(), line)).collect()
}

fn parse_lp(key: &str, v: &str, line: usize) -> Result<Vec<LpExponent>> {
    if v.is_empty() {
        return Ok(Vec::new());
    }
    v.split(',')
        .map(|s| {
            let s = s.trim();
            let p = if s.eq_ignore_ascii_case("inf") { f64::INFINITY } else { parse_value(key, s, line)? };
            LpExponent::new(p).map_err(|e| CliError::Config(format!("line {line}: {e}")))
        })
        .collect()
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

pub fn parse_scheme(s: &str) -> Result<Scheme> {
    s.parse::<Scheme>().map_err(|_| CliError::Config(format!("unknown scheme {s}")))
}

fn start_name(start: PicardStart) -> &'static str {
    match start {
        PicardStart::Linear => "linear",
        PicardStart::Constant => "constant",
        PicardStart::Zero => "zero",
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut e = Entries::parse(text)?;

        let grid = GridSection {
            dim: e.take("grid.dim", 3)?,
            n: e.take("grid.n", 32)?,
            box_length: e.take("grid.L", std::f64::consts::TAU)?,
        };
        let dim = grid.dim;

        let model = ModelParams {
            cubic_coeff: e.take("model.a", 1.0)?,
            linear_pot_coeff: e.take("model.b", -1.0)?,
            drift: e.take_list("model.beta", vec![1.0; dim])?,
            gamma: e.take("model.gamma", 1.0)?,
        };

        let scheme = match e.take_raw("solver.scheme") {
            None => Scheme::Etdrk2,
            Some((v, line)) => parse_scheme(&v)
                .map_err(|_| CliError::Config(format!("line {line}: unknown scheme {v}")))?,
        };
        let solver = SolverSection {
            scheme,
            dt: e.take("solver.dt", 0.01)?,
            t_end: e.take("solver.t_end", 1.0)?,
            record_every: e.take("solver.record_every", 1)?,
            blowup_linf: e.take("solver.blowup_linf", 1e6)?,
        };

        let kind: String = e.take("initial.kind", "gaussian".to_string())?;
        let initial = match kind.as_str() {
            "gaussian" => InitialData::Gaussian {
                amplitude: e.take("initial.amplitude", 1e-2)?,
                width: e.take("initial.width", 1.0)?,
                center: match e.take_raw("initial.center") {
                    None => None,
                    Some((v, line)) => Some(parse_list("initial.center", &v, line)?),
                },
                mean_zero: e.take("initial.mean_zero", false)?,
            },
            "random_band" => InitialData::RandomBand {
                seed: e.take("initial.seed", 0)?,
                slope: e.take("initial.slope", 1.0)?,
                band_min: e.take("initial.band_min", 1.0)?,
                band_max: e.take("initial.band_max", 3.0)?,
                target_h1: e.take("initial.target_h1", 1e-2)?,
            },
            "file" => InitialData::File {
                path: e
                    .take_raw("initial.path")
                    .map(|(v, _)| PathBuf::from(v))
                    .ok_or_else(|| CliError::Config("initial.kind = file needs initial.path".into()))?,
            },
            other => return Err(CliError::Config(format!("unknown initial.kind {other}"))),
        };

        let output = OutputSection {
            csv: e.take("output.csv", "diagnostics.csv".to_string())?,
            json: e.take("output.json", "summary.json".to_string())?,
            checkpoint: e.take("output.checkpoint", "checkpoint".to_string())?,
            checkpoint_every: e.take("output.checkpoint_every", 0)?,
        };

        let lp_exponents = match e.take_raw("diagnostics.p") {
            None => Vec::new(),
            Some((v, line)) => parse_lp("diagnostics.p", &v, line)?,
        };
        let diagnostics = DiagnosticsSpec {
            max_level: e.take("diagnostics.level", 1)?,
            neg_orders: e.take_list("diagnostics.s", vec![0.5])?,
            max_derivative: e.take("diagnostics.k", 2)?,
            lp_exponents,
        };

        let horizon = match e.take_raw("fit.horizon") {
            None => Horizon::None,
            Some((v, line)) => match v.as_str() {
                "none" => Horizon::None,
                "auto" => Horizon::Auto,
                _ => Horizon::Fixed(parse_value("fit.horizon", &v, line)?),
            },
        };
        let p = match e.take_raw("fit.p") {
            None => None,
            Some((v, _)) if v == "none" => None,
            Some((v, line)) => Some(parse_value("fit.p", &v, line)?),
        };
        let fit = FitSection {
            t_min: e.take("fit.t_min", 1.0)?,
            floor_factor: e.take("fit.floor_factor", 10.0)?,
            horizon,
            p,
            allow_extension: e.take("fit.allow_extension", false)?,
        };

        let start = match e.take_raw("picard.start") {
            None => PicardStart::Linear,
            Some((v, line)) => match v.as_str() {
                "linear" => PicardStart::Linear,
                "constant" => PicardStart::Constant,
                "zero" => PicardStart::Zero,
                _ => return Err(CliError::Config(format!("line {line}: unknown picard.start {v}"))),
            },
        };
        let picard = PicardSection {
            horizon: e.take("picard.horizon", 0.1)?,
            dt: e.take("picard.dt", 0.01)?,
            tol: e.take("picard.tol", 1e-10)?,
            max_iter: e.take("picard.max_iter", 50)?,
            start,
        };

        e.finish()?;
        let cfg = Self { grid, model, solver, initial, output, diagnostics, fit, picard };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.model.drift.len() != self.grid.dim {
            return bad(format!(
                "model.beta has {} entries for dimension {}",
                self.model.drift.len(),
                self.grid.dim
            ));
        }
        if self.solver.record_every == 0 {
            return bad("solver.record_every must be at least 1".into());
        }
        let every = self.output.checkpoint_every;
        if every > 0 && every % self.solver.record_every != 0 {
            return bad("output.checkpoint_every must be a multiple of solver.record_every".into());
        }
        let names = [&self.output.csv, &self.output.json];
        if names[0] == names[1] || names.iter().any(|n| n.ends_with(".cch") || n.is_empty()) {
            return bad("output paths must be distinct and non-empty".into());
        }
        if self.diagnostics.neg_orders.iter().any(|&s| !(s >= 0.0)) {
            return bad("diagnostics.s entries must be non-negative".into());
        }
        match &self.initial {
            InitialData::Gaussian { width, center, .. } => {
                if !(*width > 0.0) {
                    return bad("initial.width must be positive".into());
                }
                if center.as_ref().is_some_and(|c| c.len() != self.grid.dim) {
                    return bad("initial.center needs one entry per axis".into());
                }
            }
            InitialData::RandomBand { band_min, band_max, .. } => {
                if !(band_max >= band_min) || *band_max >= (self.grid.n / 2) as f64 {
                    return bad(format!(
                        "random band [{band_min}, {band_max}] must be ordered and below n/2 = {}",
                        self.grid.n / 2
                    ));
                }
            }
            InitialData::File { .. } => {}
        }
        Ok(())
    }

    /// True when some diagnostic needs mean-zero data.
    pub fn needs_mean_zero(&self) -> bool {
        self.diagnostics.neg_orders.iter().any(|&s| s > 0.0)
    }

    pub fn grid_spec(&self) -> Result<cch_core::GridSpec> {
        Ok(cch_core::GridSpec::new(self.grid.dim, self.grid.n, self.grid.box_length)?)
    }

    pub fn solver_config(&self) -> cch_core::SolverConfig {
        let mut cfg = cch_core::SolverConfig::new(
            self.solver.scheme,
            self.solver.dt,
            self.solver.t_end,
            self.model.clone(),
        )
        .with_record_every(self.solver.record_every);
        cfg.blowup_linf = self.solver.blowup_linf;
        cfg
    }

    /// Seed of the random initial data, if any.
    pub fn seed(&self) -> Option<u64> {
        match self.initial {
            InitialData::RandomBand { seed, .. } => Some(seed),
            _ => None,
        }
    }

    pub fn set_seed(&mut self, new_seed: u64) -> Result<()> {
        match &mut self.initial {
            InitialData::RandomBand { seed, .. } => {
                *seed = new_seed;
                Ok(())
            }
            _ => Err(CliError::Config("--seed needs initial.kind = random_band".into())),
        }
    }

    /// Canonical text form; `parse(to_text())` gives back the same config.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("grid.dim", self.grid.dim.to_string());
        kv("grid.n", self.grid.n.to_string());
        kv("grid.L", self.grid.box_length.to_string());
        kv("model.a", self.model.cubic_coeff.to_string());
        kv("model.b", self.model.linear_pot_coeff.to_string());
        kv("model.beta", join(&self.model.drift));
        kv("model.gamma", self.model.gamma.to_string());
        kv("solver.scheme", self.solver.scheme.name().to_string());
        kv("solver.dt", self.solver.dt.to_string());
        kv("solver.t_end", self.solver.t_end.to_string());
        kv("solver.record_every", self.solver.record_every.to_string());
        kv("solver.blowup_linf", self.solver.blowup_linf.to_string());
        match &self.initial {
            InitialData::Gaussian { amplitude, width, center, mean_zero } => {
                kv("initial.kind", "gaussian".into());
                kv("initial.amplitude", amplitude.to_string());
                kv("initial.width", width.to_string());
                if let Some(c) = center {
                    kv("initial.center", join(c));
                }
                kv("initial.mean_zero", mean_zero.to_string());
            }
            InitialData::RandomBand { seed, slope, band_min, band_max, target_h1 } => {
                kv("initial.kind", "random_band".into());
                kv("initial.seed", seed.to_string());
                kv("initial.slope", slope.to_string());
                kv("initial.band_min", band_min.to_string());
                kv("initial.band_max", band_max.to_string());
                kv("initial.target_h1", target_h1.to_string());
            }
            InitialData::File { path } => {
                kv("initial.kind", "file".into());
                kv("initial.path", path.display().to_string());
            }
        }
        kv("output.csv", self.output.csv.clone());
        kv("output.json", self.output.json.clone());
        kv("output.checkpoint", self.output.checkpoint.clone());
        kv("output.checkpoint_every", self.output.checkpoint_every.to_string());
        kv("diagnostics.level", self.diagnostics.max_level.to_string());
        kv("diagnostics.s", join(&self.diagnostics.neg_orders));
        kv("diagnostics.k", self.diagnostics.max_derivative.to_string());
        let ps: Vec<String> = self
            .diagnostics
            .lp_exponents
            .iter()
            .map(|p| match p {
                LpExponent::Infinity => "inf".to_string(),
                LpExponent::Finite(p) => p.to_string(),
            })
            .collect();
        kv("diagnostics.p", ps.join(","));
        kv("fit.t_min", self.fit.t_min.to_string());
        kv("fit.floor_factor", self.fit.floor_factor.to_string());
        kv(
            "fit.horizon",
            match self.fit.horizon {
                Horizon::None => "none".into(),
                Horizon::Auto => "auto".into(),
                Horizon::Fixed(h) => h.to_string(),
            },
        );
        kv("fit.p", self.fit.p.map_or("none".into(), |p| p.to_string()));
        kv("fit.allow_extension", self.fit.allow_extension.to_string());
        kv("picard.horizon", self.picard.horizon.to_string());
        kv("picard.dt", self.picard.dt.to_string());
        kv("picard.tol", self.picard.tol.to_string());
        kv("picard.max_iter", self.picard.max_iter.to_string());
        kv("picard.start", start_name(self.picard.start).into());
        s
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::parse("").expect("defaults are valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_roundtrip() {
        let cfg = ExperimentConfig::default();
        assert_eq!(cfg.grid.dim, 3);
        assert_eq!(cfg.model.drift, vec![1.0; 3]);
        assert_eq!(ExperimentConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn full_roundtrip() {
        let text = "
            # comment
            grid.dim = 2
            grid.n = 16
            grid.L = 12.5
            model.beta = 0.5, -1
            solver.scheme = imex1
            initial.kind = random_band
            initial.seed = 42
            initial.band_min = 1.4142135623730951
            diagnostics.p = 1.5, inf
            fit.horizon = auto
            fit.p = 1
            picard.start = zero
        ";
        let cfg = ExperimentConfig::parse(text).unwrap();
        assert_eq!(cfg.model.drift, vec![0.5, -1.0]);
        assert_eq!(cfg.seed(), Some(42));
        assert_eq!(cfg.fit.horizon, Horizon::Auto);
        assert_eq!(cfg.diagnostics.lp_exponents[1], LpExponent::Infinity);
        assert_eq!(ExperimentConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn strictness() {
        assert!(ExperimentConfig::parse("grid.nn = 3").is_err());
        assert!(ExperimentConfig::parse("grid.n = 16\ngrid.n = 32").is_err());
        assert!(ExperimentConfig::parse("initial.seed = 3").is_err());
        assert!(ExperimentConfig::parse("grid.n = sixteen").is_err());
        assert!(ExperimentConfig::parse("model.beta = 1,1").is_err());
        assert!(ExperimentConfig::parse("solver.scheme = rk4").is_err());
        assert!(ExperimentConfig::parse("no equals sign").is_err());
        assert!(ExperimentConfig::parse("initial.kind = random_band\ninitial.band_max = 16").is_err());
        assert!(ExperimentConfig::parse("solver.record_every = 3\noutput.checkpoint_every = 4").is_err());
    }
}
