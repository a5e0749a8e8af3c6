//! Named simulation scenarios and their flat `key=value` configuration.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::curves::GridSpec;
use crate::error::{Error, Result};
use crate::permute::DEFAULT_B;
use crate::simgen::{decaying_weights, CoeffDist, GeneratorSpec, MeanShift, Side};
use crate::statistic::PhiKind;

pub const DEFAULT_REPS: usize = 400;
pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_GRID_POINTS: usize = 101;
/// Number of frequencies in the contiguous sine/cosine mixture.
pub const EX7_DEFAULT_D: usize = 81;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioId {
    /// Wiener versus Wiener.
    Ex1,
    /// `t + W` versus `t + W`.
    Ex2,
    /// Decaying trigonometric series versus itself.
    Ex3,
    /// `W` versus `r t^2 + W`.
    Ex4i,
    /// `W` versus `r e^t + W`.
    Ex4ii,
    /// Normal coefficients, scale `sigma` on the second sample.
    Ex5i,
    /// Cauchy coefficients, scale `sigma` on the second sample.
    Ex5ii,
    /// Sine family versus cosine family, both N(0, 2).
    Ex6i,
    /// Sine family N(0, 2) versus cosine family t_4.
    Ex6ii,
    /// Sine family versus a `delta/sqrt(m)` mixture with the cosine family.
    Ex7,
    /// Series with N(0,1) versus a mixture with N(1,1) coefficients.
    Ex8,
    /// Series with N(0,1) versus a mixture with N(0,2) coefficients.
    Ex9,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 12] = [
        ScenarioId::Ex1,
        ScenarioId::Ex2,
        ScenarioId::Ex3,
        ScenarioId::Ex4i,
        ScenarioId::Ex4ii,
        ScenarioId::Ex5i,
        ScenarioId::Ex5ii,
        ScenarioId::Ex6i,
        ScenarioId::Ex6ii,
        ScenarioId::Ex7,
        ScenarioId::Ex8,
        ScenarioId::Ex9,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioId::Ex1 => "ex1",
            ScenarioId::Ex2 => "ex2",
            ScenarioId::Ex3 => "ex3",
            ScenarioId::Ex4i => "ex4i",
            ScenarioId::Ex4ii => "ex4ii",
            ScenarioId::Ex5i => "ex5i",
            ScenarioId::Ex5ii => "ex5ii",
            ScenarioId::Ex6i => "ex6i",
            ScenarioId::Ex6ii => "ex6ii",
            ScenarioId::Ex7 => "ex7",
            ScenarioId::Ex8 => "ex8",
            ScenarioId::Ex9 => "ex9",
        }
    }

    /// The scenario's own parameter, if it has one.
    pub fn param(self) -> Option<Param> {
        match self {
            ScenarioId::Ex1 | ScenarioId::Ex2 | ScenarioId::Ex3 => None,
            ScenarioId::Ex4i | ScenarioId::Ex4ii => Some(Param::R),
            ScenarioId::Ex5i | ScenarioId::Ex5ii => Some(Param::Sigma),
            ScenarioId::Ex6i | ScenarioId::Ex6ii => Some(Param::D),
            ScenarioId::Ex7 | ScenarioId::Ex8 | ScenarioId::Ex9 => Some(Param::Delta),
        }
    }

    /// Both samples share one distribution.
    pub fn is_null(self) -> bool {
        self.param().is_none()
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace(['(', ')', '.', '_', '-'], "");
        ScenarioId::ALL
            .into_iter()
            .find(|id| id.name() == key)
            .ok_or_else(|| Error::UnknownScenario(s.to_string()))
    }
}

/// Parameters a sweep can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Param {
    /// Both group sizes at once.
    N,
    R,
    Sigma,
    D,
    Delta,
}

impl Param {
    pub fn name(self) -> &'static str {
        match self {
            Param::N => "n",
            Param::R => "r",
            Param::Sigma => "sigma",
            Param::D => "d",
            Param::Delta => "delta",
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Param {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "n" => Ok(Param::N),
            "r" => Ok(Param::R),
            "sigma" => Ok(Param::Sigma),
            "d" => Ok(Param::D),
            "delta" => Ok(Param::Delta),
            other => Err(Error::invalid(format!("unknown sweep parameter `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    pub r: Option<f64>,
    pub sigma: Option<f64>,
    pub d: Option<usize>,
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub scenario: ScenarioId,
    pub n: usize,
    pub m: usize,
    #[serde(rename = "B")]
    pub b: usize,
    pub alpha: f64,
    pub reps: usize,
    pub phi: Vec<PhiKind>,
    pub seed: u64,
    pub params: ScenarioParams,
    /// Points of the equispaced grid on [0, 1] used by Wiener scenarios.
    pub grid_points: usize,
    pub normalized_cos: bool,
    /// Render the sine/cosine families of ex6 and ex7 on the
    /// `grid_points` grid instead of keeping exact coefficients.
    #[serde(default)]
    pub sincos_grid: bool,
}

impl ScenarioConfig {
    pub fn new(scenario: ScenarioId, n: usize, m: usize) -> Self {
        ScenarioConfig {
            scenario,
            n,
            m,
            b: DEFAULT_B,
            alpha: DEFAULT_ALPHA,
            reps: DEFAULT_REPS,
            phi: PhiKind::ALL.to_vec(),
            seed: 0,
            params: ScenarioParams::default(),
            grid_points: DEFAULT_GRID_POINTS,
            normalized_cos: false,
            sincos_grid: false,
        }
    }

    pub fn with_b(mut self, b: usize) -> Self {
        self.b = b;
        self
    }

    pub fn with_reps(mut self, reps: usize) -> Self {
        self.reps = reps;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_phi(mut self, phi: &[PhiKind]) -> Self {
        self.phi = phi.to_vec();
        self
    }

    /// Sets a scenario parameter; `Param::N` sets both group sizes.
    pub fn with_param(mut self, param: Param, value: f64) -> Result<Self> {
        self.set_param(param, value)?;
        Ok(self)
    }

    pub fn set_param(&mut self, param: Param, value: f64) -> Result<()> {
        let count = |v: f64| -> Result<usize> {
            if v.is_finite() && v >= 0.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(Error::invalid(format!("{param} must be a whole number, got {value}")))
            }
        };
        match param {
            Param::N => {
                let n = count(value)?;
                self.n = n;
                self.m = n;
            }
            Param::R => self.params.r = Some(value),
            Param::Sigma => self.params.sigma = Some(value),
            Param::D => self.params.d = Some(count(value)?),
            Param::Delta => self.params.delta = Some(value),
        }
        Ok(())
    }

    pub fn param_value(&self, param: Param) -> Option<f64> {
        match param {
            Param::N => Some(self.n as f64),
            Param::R => self.params.r,
            Param::Sigma => self.params.sigma,
            Param::D => self.params.d.map(|d| d as f64).or_else(|| {
                (self.scenario == ScenarioId::Ex7).then_some(EX7_DEFAULT_D as f64)
            }),
            Param::Delta => self.params.delta,
        }
    }

    /// The parameter reported in ledgers: the scenario's own, else `n`.
    pub fn reported_param(&self) -> Param {
        self.scenario.param().unwrap_or(Param::N)
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::invalid("reps must be at least 1"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if self.b == 0 {
            return Err(Error::invalid("B must be at least 1"));
        }
        if self.n == 0 || self.m == 0 {
            return Err(Error::invalid("both group sizes must be at least 1"));
        }
        if self.phi.is_empty() {
            return Err(Error::invalid("at least one phi is required"));
        }
        if let Some(p) = self.scenario.param() {
            if self.param_value(p).is_none() {
                return Err(Error::invalid(format!(
                    "scenario {} needs parameter {p}",
                    self.scenario
                )));
            }
        }
        self.generators()?;
        Ok(())
    }

    /// Grid used by the Wiener scenarios, `None` for coefficient scenarios.
    pub fn grid(&self) -> Result<Option<GridSpec>> {
        match self.scenario {
            ScenarioId::Ex1 | ScenarioId::Ex2 | ScenarioId::Ex4i | ScenarioId::Ex4ii => {
                GridSpec::unit_interval(self.grid_points).map(Some)
            }
            _ => Ok(None),
        }
    }

    /// Grid the sine/cosine families are rendered on, when `sincos_grid` is
    /// set for a scenario that uses them.
    pub fn sincos_render_grid(&self) -> Result<Option<GridSpec>> {
        let uses_sincos = matches!(
            self.scenario,
            ScenarioId::Ex6i | ScenarioId::Ex6ii | ScenarioId::Ex7
        );
        if self.sincos_grid && uses_sincos {
            GridSpec::unit_interval(self.grid_points).map(Some)
        } else {
            Ok(None)
        }
    }

    /// Grid of the generated curves: the Wiener grid, the render grid, or
    /// `None` for coefficient curves.
    pub fn sample_grid(&self) -> Result<Option<GridSpec>> {
        Ok(self.grid()?.or(self.sincos_render_grid()?))
    }

    /// Generators of the first and second sample.
    pub fn generators(&self) -> Result<(GeneratorSpec, GeneratorSpec)> {
        let need = |p: Param| {
            self.param_value(p).ok_or_else(|| {
                Error::invalid(format!("scenario {} needs parameter {p}", self.scenario))
            })
        };
        let series = |coeffs| GeneratorSpec::Basis {
            weights: decaying_weights(9, 2.5),
            coeffs,
        };
        let sincos = |d: usize, side, coeffs| GeneratorSpec::SinCos {
            d,
            side,
            coeffs,
            normalized_cos: self.normalized_cos,
        };
        let var2 = CoeffDist::normal_var(0.0, 2.0);
        let mixture = |base: GeneratorSpec, contaminant, delta| GeneratorSpec::Mixture {
            base: Box::new(base),
            contaminant: Box::new(contaminant),
            delta,
        };
        Ok(match self.scenario {
            ScenarioId::Ex1 => (GeneratorSpec::Wiener, GeneratorSpec::Wiener),
            ScenarioId::Ex2 => {
                let g = GeneratorSpec::ShiftedWiener {
                    mean: MeanShift::Linear,
                    r: 1.0,
                };
                (g.clone(), g)
            }
            ScenarioId::Ex3 => {
                let g = series(CoeffDist::standard_normal());
                (g.clone(), g)
            }
            ScenarioId::Ex4i | ScenarioId::Ex4ii => {
                let mean = if self.scenario == ScenarioId::Ex4i {
                    MeanShift::Quadratic
                } else {
                    MeanShift::Exponential
                };
                (
                    GeneratorSpec::Wiener,
                    GeneratorSpec::ShiftedWiener {
                        mean,
                        r: need(Param::R)?,
                    },
                )
            }
            ScenarioId::Ex5i => {
                let sigma = positive(need(Param::Sigma)?, "sigma")?;
                (
                    series(CoeffDist::standard_normal()),
                    series(CoeffDist::Normal {
                        mean: 0.0,
                        sd: sigma,
                    }),
                )
            }
            ScenarioId::Ex5ii => {
                let sigma = positive(need(Param::Sigma)?, "sigma")?;
                (
                    series(CoeffDist::Cauchy { scale: 1.0 }),
                    series(CoeffDist::Cauchy { scale: sigma }),
                )
            }
            ScenarioId::Ex6i | ScenarioId::Ex6ii => {
                let d = need(Param::D)? as usize;
                let eta = if self.scenario == ScenarioId::Ex6i {
                    var2
                } else {
                    CoeffDist::StudentT { dof: 4 }
                };
                (sincos(d, Side::Sin, var2), sincos(d, Side::Cos, eta))
            }
            ScenarioId::Ex7 => {
                let d = need(Param::D)? as usize;
                let u = sincos(d, Side::Sin, var2);
                let v = sincos(d, Side::Cos, var2);
                (u.clone(), mixture(u, v, need(Param::Delta)?))
            }
            ScenarioId::Ex8 | ScenarioId::Ex9 => {
                let f = series(CoeffDist::standard_normal());
                let g = if self.scenario == ScenarioId::Ex8 {
                    series(CoeffDist::Normal { mean: 1.0, sd: 1.0 })
                } else {
                    series(var2)
                };
                (f.clone(), mixture(f, g, need(Param::Delta)?))
            }
        })
    }

    /// Parses `key=value` lines (blank lines and `#` comments ignored).
    pub fn parse_kv(text: &str) -> Result<Self> {
        Self::from_pairs(&parse_kv_pairs(text)?)
    }

    /// Builds a configuration from `(key, value)` pairs, later pairs winning.
    /// `scenario` is required; `m` defaults to `n`.
    pub fn from_pairs(pairs: &[(String, String)]) -> Result<Self> {
        let scenario = pairs
            .iter()
            .rev()
            .find(|(k, _)| k == "scenario")
            .ok_or_else(|| Error::invalid("no scenario given"))?
            .1
            .parse::<ScenarioId>()?;
        let mut config = ScenarioConfig::new(scenario, 0, 0);
        for (key, value) in pairs {
            config.apply(key, value)?;
        }
        if !pairs.iter().any(|(k, _)| k == "m") {
            config.m = config.n;
        }
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_kv(&text)
    }

    /// Applies one configuration key.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| Error::invalid(format!("invalid {what} `{value}` for key `{key}`"));
        let real = || value.parse::<f64>().map_err(|_| bad("number"));
        let count = || value.parse::<usize>().map_err(|_| bad("count"));
        match key {
            "scenario" => self.scenario = value.parse()?,
            "n" => self.n = count()?,
            "m" => self.m = count()?,
            "B" | "b" => self.b = count()?,
            "alpha" => self.alpha = real()?,
            "reps" => self.reps = count()?,
            "phi" => self.phi = parse_phi_list(value)?,
            "seed" => self.seed = value.parse().map_err(|_| bad("seed"))?,
            "r" => self.params.r = Some(real()?),
            "sigma" => self.params.sigma = Some(real()?),
            "d" => self.params.d = Some(count()?),
            "delta" => self.params.delta = Some(real()?),
            "grid_points" => self.grid_points = count()?,
            "normalized_cos" => {
                self.normalized_cos = value.parse().map_err(|_| bad("boolean"))?;
            }
            "sincos_grid" => self.sincos_grid = value.parse().map_err(|_| bad("boolean"))?,
            other => return Err(Error::invalid(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }
}

/// `key=value` lines with `#` comments, in file order.
pub fn parse_kv_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::invalid(format!("line {}: expected key=value, got `{line}`", lineno + 1))
        })?;
        pairs.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}

fn positive(v: f64, name: &str) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::invalid(format!("{name} must be positive, got {v}")))
    }
}

/// `l2,exp,log` style list; `all` selects every kind.
pub fn parse_phi_list(s: &str) -> Result<Vec<PhiKind>> {
    if s.trim() == "all" {
        return Ok(PhiKind::ALL.to_vec());
    }
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let kind: PhiKind = part.parse()?;
        if !out.contains(&kind) {
            out.push(kind);
        }
    }
    if out.is_empty() {
        return Err(Error::invalid("empty phi list"));
    }
    Ok(out)
}
