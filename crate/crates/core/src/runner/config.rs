//! Flat `key = value` configuration documents.
//!
//! ```text
//! # heavy particle, single trajectory
//! label = heavy
//! mass = 0.6
//! theta = pi/3
//! epsilon = 2
//!
//! [physical]          # optional: replaces `mass` and `gamma`
//! sigma_r = 0.371e-9  # metres
//! mass_u = 27.63e9    # atomic mass units
//! gradient = 0.028    # tesla per metre
//!
//! [sweep]             # only read by `parse_sweep`
//! parameter = mass
//! values = 0.1, 0.5, 0.6, 0.7
//! concurrency = 2
//! ```

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::PathBuf;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{Convolution, Grid, SimParams, DEFAULT_DZ, DEFAULT_Z_MAX};
use crate::units::ScaleSet;

/// Physical description converted through [`crate::units`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalUnits {
    pub sigma_r: f64,
    pub mass_u: f64,
    pub gradient: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub label: String,
    pub z_max: f64,
    pub dz: f64,
    pub params: SimParams,
    pub out_dir: PathBuf,
    pub physical: Option<PhysicalUnits>,
}

impl ScenarioConfig {
    /// Reference numerics with the given dimensionless mass, angle and width.
    pub fn new(label: impl Into<String>, m_tilde: f64, theta: f64, epsilon: f64) -> Self {
        ScenarioConfig {
            label: label.into(),
            z_max: DEFAULT_Z_MAX,
            dz: DEFAULT_DZ,
            params: SimParams::new(m_tilde, theta, epsilon),
            out_dir: PathBuf::from("out"),
            physical: None,
        }
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.z_max, self.dz)
    }

    /// Directory this scenario writes into.
    pub fn run_dir(&self) -> PathBuf {
        self.out_dir.join(&self.label)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweptParameter {
    Mass,
    Theta,
}

impl std::fmt::Display for SweptParameter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SweptParameter::Mass => "mass",
            SweptParameter::Theta => "theta",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub base: ScenarioConfig,
    pub parameter: SweptParameter,
    pub values: Vec<f64>,
    pub concurrency: usize,
}

impl SweepConfig {
    pub fn new(
        base: ScenarioConfig,
        parameter: SweptParameter,
        values: Vec<f64>,
        concurrency: usize,
    ) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::param("values", "sweep needs at least one value"));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::param(
                "values",
                "sweep values must be strictly increasing",
            ));
        }
        if concurrency == 0 {
            return Err(Error::param("concurrency", "must be at least 1"));
        }
        Ok(SweepConfig {
            base,
            parameter,
            values,
            concurrency,
        })
    }

    /// Scenario for the `index`-th swept value.
    pub fn scenario(&self, index: usize) -> ScenarioConfig {
        let mut cfg = self.base.clone();
        let value = self.values[index];
        match self.parameter {
            SweptParameter::Mass => cfg.params.m_tilde = value,
            SweptParameter::Theta => cfg.params.theta = value,
        }
        cfg.label = format!("{}_{}_{:03}", self.base.label, self.parameter, index);
        cfg
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Main,
    Physical,
    Sweep,
}

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
}

/// Parsed but not yet validated document.
#[derive(Debug, Clone, Default)]
pub struct Document {
    main: BTreeMap<String, Entry>,
    physical: Option<BTreeMap<String, Entry>>,
    sweep: Option<BTreeMap<String, Entry>>,
}

const MAIN_KEYS: &[&str] = &[
    "label",
    "mass",
    "gamma",
    "theta",
    "epsilon",
    "delta",
    "dz",
    "dt",
    "t_max",
    "z_max",
    "nonlinear_iters",
    "corrector_tol",
    "snapshot_stride",
    "self_gravity",
    "convolution",
    "min_prominence",
    "separation_threshold",
    "keep_snapshots",
    "out",
];
const PHYSICAL_KEYS: &[&str] = &["sigma_r", "mass_u", "gradient"];
const SWEEP_KEYS: &[&str] = &["parameter", "values", "concurrency"];

fn canonical_key(key: &str) -> &str {
    match key {
        "m_tilde" => "mass",
        "gamma_tilde" => "gamma",
        "tmax" => "t_max",
        "zmax" => "z_max",
        "output" => "out",
        other => other,
    }
}

impl Document {
    pub fn parse(text: &str) -> Result<Self> {
        let mut doc = Document::default();
        let mut section = Section::Main;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(name) = content.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                section = match name.trim() {
                    "physical" => {
                        if doc.physical.is_some() {
                            return Err(parse_err(line, "duplicate [physical] section"));
                        }
                        doc.physical = Some(BTreeMap::new());
                        Section::Physical
                    }
                    "sweep" => {
                        if doc.sweep.is_some() {
                            return Err(parse_err(line, "duplicate [sweep] section"));
                        }
                        doc.sweep = Some(BTreeMap::new());
                        Section::Sweep
                    }
                    other => return Err(parse_err(line, format!("unknown section [{other}]"))),
                };
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| {
                parse_err(line, format!("expected `key = value`, got `{content}`"))
            })?;
            let key = canonical_key(key.trim()).to_string();
            let value = value.trim().to_string();
            if value.is_empty() {
                return Err(parse_err(line, format!("missing value for `{key}`")));
            }
            let (table, allowed) = match section {
                Section::Main => (&mut doc.main, MAIN_KEYS),
                Section::Physical => (doc.physical.as_mut().unwrap(), PHYSICAL_KEYS),
                Section::Sweep => (doc.sweep.as_mut().unwrap(), SWEEP_KEYS),
            };
            if !allowed.contains(&key.as_str()) {
                return Err(parse_err(line, format!("unknown key `{key}`")));
            }
            if table.contains_key(&key) {
                return Err(parse_err(line, format!("duplicate key `{key}`")));
            }
            table.insert(key, Entry { value, line });
        }
        Ok(doc)
    }

    /// Sets (or replaces) a main-section key, as a command-line flag would.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = canonical_key(key);
        if !MAIN_KEYS.contains(&key) {
            return Err(parse_err(0, format!("unknown key `{key}`")));
        }
        self.main.insert(
            key.to_string(),
            Entry {
                value: value.to_string(),
                line: 0,
            },
        );
        Ok(())
    }

    pub fn scenario(&self) -> Result<ScenarioConfig> {
        let main = &self.main;
        let get = |key: &str| main.get(key);

        let mut params = SimParams::new(f64::NAN, PI / 3.0, 2.0);
        let mut cfg = ScenarioConfig::new("scenario", f64::NAN, PI / 3.0, 2.0);

        if let Some(e) = get("label") {
            if e.value.contains(['/', '\\']) {
                return Err(parse_err(e.line, "label must not contain path separators"));
            }
            cfg.label = e.value.clone();
        }
        if let Some(e) = get("out") {
            cfg.out_dir = PathBuf::from(&e.value);
        }
        if let Some(e) = get("z_max") {
            cfg.z_max = number(e)?;
        }
        if let Some(e) = get("dz") {
            cfg.dz = number(e)?;
        }
        for (key, slot) in [
            ("theta", &mut params.theta),
            ("epsilon", &mut params.epsilon),
            ("delta", &mut params.delta),
            ("dt", &mut params.dt),
            ("t_max", &mut params.t_max),
            ("corrector_tol", &mut params.corrector_tol),
            ("min_prominence", &mut params.min_prominence),
        ] {
            if let Some(e) = get(key) {
                *slot = number(e)?;
            }
        }
        if let Some(e) = get("separation_threshold") {
            params.separation_threshold = Some(number(e)?);
        }
        if let Some(e) = get("nonlinear_iters") {
            params.nonlinear_iters = integer(e)?;
        }
        if let Some(e) = get("snapshot_stride") {
            params.snapshot_stride = integer(e)?;
        }
        if let Some(e) = get("self_gravity") {
            params.self_gravity = boolean(e)?;
        }
        if let Some(e) = get("keep_snapshots") {
            params.keep_snapshots = boolean(e)?;
        }
        if let Some(e) = get("convolution") {
            params.convolution = match e.value.to_ascii_lowercase().as_str() {
                "direct" => Convolution::Direct,
                "fft" => Convolution::Fft,
                other => {
                    return Err(parse_err(
                        e.line,
                        format!("convolution must be `direct` or `fft`, got `{other}`"),
                    ))
                }
            };
        }

        match &self.physical {
            Some(block) => {
                if let Some(e) = get("mass").or_else(|| get("gamma")) {
                    return Err(parse_err(
                        e.line,
                        "mass/gamma are set both directly and through the [physical] section",
                    ));
                }
                let field = |key: &str| -> Result<f64> {
                    let e = block.get(key).ok_or_else(|| {
                        parse_err(0, format!("[physical] section is missing `{key}`"))
                    })?;
                    number(e)
                };
                let units = PhysicalUnits {
                    sigma_r: field("sigma_r")?,
                    mass_u: field("mass_u")?,
                    gradient: field("gradient")?,
                };
                let scales = ScaleSet::from_sigma(units.sigma_r)
                    .map_err(|e| parse_err(block["sigma_r"].line, e.to_string()))?;
                params.m_tilde = crate::units::mass_to_dimensionless(units.mass_u, &scales)
                    .map_err(|e| parse_err(block["mass_u"].line, e.to_string()))?;
                params.gamma_tilde = scales.gamma_dimensionless(units.gradient);
                cfg.physical = Some(units);
            }
            None => {
                let e = get("mass").ok_or_else(|| {
                    parse_err(0, "missing required key `mass` (or a [physical] section)")
                })?;
                params.m_tilde = number(e)?;
                if let Some(e) = get("gamma") {
                    params.gamma_tilde = number(e)?;
                }
            }
        }

        cfg.params = params;
        let grid = cfg
            .grid()
            .map_err(|e| parse_err(line_of(main, &["dz", "z_max"]), e.to_string()))?;
        cfg.params.validate(&grid).map_err(|e| {
            let line = match &e {
                Error::Parameter { name, .. } => line_of(main, &[config_key(name)]),
                _ => 0,
            };
            parse_err(line, e.to_string())
        })?;
        Ok(cfg)
    }

    pub fn sweep(&self) -> Result<SweepConfig> {
        let base = self.scenario()?;
        let block = self
            .sweep
            .as_ref()
            .ok_or_else(|| parse_err(0, "missing [sweep] section"))?;
        let entry = |key: &str| {
            block
                .get(key)
                .ok_or_else(|| parse_err(0, format!("[sweep] section is missing `{key}`")))
        };

        let p = entry("parameter")?;
        let parameter = match p.value.as_str() {
            "mass" | "m_tilde" => SweptParameter::Mass,
            "theta" => SweptParameter::Theta,
            other => {
                return Err(parse_err(
                    p.line,
                    format!("can only sweep `mass` or `theta`, got `{other}`"),
                ))
            }
        };
        let v = entry("values")?;
        let values = v
            .value
            .split(',')
            .map(|s| {
                parse_number(s.trim())
                    .ok_or_else(|| parse_err(v.line, format!("bad number `{}`", s.trim())))
            })
            .collect::<Result<Vec<_>>>()?;
        let concurrency = match block.get("concurrency") {
            Some(e) => integer(e)?,
            None => 1,
        };
        let sweep = SweepConfig::new(base, parameter, values, concurrency)
            .map_err(|e| parse_err(v.line, e.to_string()))?;
        let grid = sweep.base.grid()?;
        for i in 0..sweep.values.len() {
            sweep
                .scenario(i)
                .params
                .validate(&grid)
                .map_err(|e| parse_err(v.line, e.to_string()))?;
        }
        Ok(sweep)
    }
}

/// Parses and validates a scenario document.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    Document::parse(text)?.scenario()
}

/// Parses and validates a document with a `[sweep]` section.
pub fn parse_sweep(text: &str) -> Result<SweepConfig> {
    Document::parse(text)?.sweep()
}

fn config_key(param: &str) -> &str {
    match param {
        "m_tilde" => "mass",
        "gamma_tilde" => "gamma",
        other => other,
    }
}

fn line_of(table: &BTreeMap<String, Entry>, keys: &[&str]) -> usize {
    keys.iter()
        .filter_map(|k| table.get(*k))
        .map(|e| e.line)
        .max()
        .unwrap_or(0)
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn number(e: &Entry) -> Result<f64> {
    parse_number(&e.value)
        .ok_or_else(|| parse_err(e.line, format!("expected a number, got `{}`", e.value)))
}

fn integer(e: &Entry) -> Result<usize> {
    e.value.parse().map_err(|_| {
        parse_err(
            e.line,
            format!("expected a non-negative integer, got `{}`", e.value),
        )
    })
}

fn boolean(e: &Entry) -> Result<bool> {
    match e.value.as_str() {
        "true" | "yes" | "on" => Ok(true),
        "false" | "no" | "off" => Ok(false),
        other => Err(parse_err(
            e.line,
            format!("expected true/false, got `{other}`"),
        )),
    }
}

/// Plain floats plus multiples of π: `pi`, `pi/3`, `2pi/3`, `2*pi/3`, `0.5*pi`.
pub fn parse_number(s: &str) -> Option<f64> {
    if let Ok(v) = s.parse::<f64>() {
        return v.is_finite().then_some(v);
    }
    let lower = s.to_ascii_lowercase().replace(' ', "");
    let (coef, rest) = lower.split_once("pi")?;
    let coef = coef.trim_end_matches('*');
    let coef = if coef.is_empty() {
        1.0
    } else {
        coef.parse::<f64>().ok()?
    };
    let div = if rest.is_empty() {
        1.0
    } else {
        rest.strip_prefix('/')?.parse::<f64>().ok()?
    };
    let v = coef * PI / div;
    v.is_finite().then_some(v)
}
