//! Run configuration: `key = value` lines, `#` comments, defaults matching
//! the dislocation experiment.

use std::collections::HashMap;
use std::path::PathBuf;

use serde::Serialize;

use crate::adapt::AdaptConfig;
use crate::error::{Error, Result};
use crate::mesh::{BoundaryValues, RefinementFactor};
use crate::model::{AtomIndex, ModelParams, Partition};

const KEYS: &[&str] = &[
    "k0",
    "k1",
    "k2",
    "a0",
    "m",
    "atomistic_first",
    "atomistic_last",
    "bc_l1",
    "bc_l2",
    "bc_r2",
    "bc_r1",
    "tau_gl",
    "tau_fac",
    "lambda",
    "max_iterations",
    "oracle",
    "out",
    "formats",
    "tolerances",
    "lambdas",
    "sweep_tau_gl",
];

/// Which artifacts to write.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OutputFormats {
    pub csv: bool,
    pub json: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ModelParams,
    pub atomistic: (AtomIndex, AtomIndex),
    pub boundary: BoundaryValues,
    pub adapt: AdaptConfig,
    pub oracle: bool,
    pub out: PathBuf,
    pub formats: OutputFormats,
    /// Stopping tolerances that define the meshes of the efficiency study.
    pub tolerances: Vec<f64>,
    /// Partial-refinement factors compared in the efficiency study.
    pub lambdas: Vec<RefinementFactor>,
    /// Tolerance of the per-factor runs behind `mesh_efficiency.csv`.
    pub sweep_tau_gl: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        parse_config("").expect("defaults are valid")
    }
}

impl RunConfig {
    pub fn partition(&self) -> Result<Partition> {
        Partition::block(self.params.half_length(), self.atomistic.0, self.atomistic.1)
    }

    /// Everything that determines the numbers, without the output location.
    pub fn echo(&self) -> ConfigEcho {
        ConfigEcho {
            k0: self.params.k0(),
            k1: self.params.k1(),
            k2: self.params.k2(),
            a0: self.params.a0(),
            m: self.params.half_length(),
            atomistic_first: self.atomistic.0,
            atomistic_last: self.atomistic.1,
            boundary: self.boundary,
            tau_gl: self.adapt.tau_gl,
            tau_fac: self.adapt.tau_fac,
            lambda: self.adapt.factor,
            max_iterations: self.adapt.max_iterations,
            oracle: self.oracle,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub k0: f64,
    pub k1: f64,
    pub k2: f64,
    pub a0: f64,
    pub m: usize,
    pub atomistic_first: AtomIndex,
    pub atomistic_last: AtomIndex,
    pub boundary: BoundaryValues,
    pub tau_gl: f64,
    pub tau_fac: f64,
    pub lambda: RefinementFactor,
    pub max_iterations: usize,
    pub oracle: bool,
}

struct Entries {
    values: HashMap<String, (usize, String)>,
}

impl Entries {
    fn line(&self, key: &str) -> Option<usize> {
        self.values.get(key).map(|(l, _)| *l)
    }

    fn err(&self, key: &str, message: impl Into<String>) -> Error {
        Error::Config {
            line: self.line(key),
            key: key.to_string(),
            message: message.into(),
        }
    }

    fn get<T>(&self, key: &str, default: T, parse: impl Fn(&str) -> std::result::Result<T, String>) -> Result<T> {
        match self.values.get(key) {
            None => Ok(default),
            Some((_, raw)) => parse(raw).map_err(|m| self.err(key, m)),
        }
    }
}

fn number<T: std::str::FromStr>(raw: &str) -> std::result::Result<T, String> {
    raw.parse().map_err(|_| format!("cannot parse `{raw}` as a number"))
}

fn real(raw: &str) -> std::result::Result<f64, String> {
    let v: f64 = number(raw)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{raw}` is not finite"))
    }
}

fn switch(raw: &str) -> std::result::Result<bool, String> {
    match raw.to_ascii_lowercase().as_str() {
        "on" | "true" | "yes" | "1" => Ok(true),
        "off" | "false" | "no" | "0" => Ok(false),
        _ => Err(format!("expected on or off, got `{raw}`")),
    }
}

fn list<T>(raw: &str, item: impl Fn(&str) -> std::result::Result<T, String>) -> std::result::Result<Vec<T>, String> {
    let items: Vec<T> = raw
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(item)
        .collect::<std::result::Result<_, _>>()?;
    if items.is_empty() {
        Err("list is empty".into())
    } else {
        Ok(items)
    }
}

pub fn parse_tolerances(raw: &str) -> std::result::Result<Vec<f64>, String> {
    list(raw, |s| match real(s)? {
        v if v > 0.0 => Ok(v),
        v => Err(format!("tolerance must be positive, got {v}")),
    })
}

pub fn parse_lambdas(raw: &str) -> std::result::Result<Vec<RefinementFactor>, String> {
    list(raw, str::parse)
}

fn formats(raw: &str) -> std::result::Result<OutputFormats, String> {
    let mut f = OutputFormats {
        csv: false,
        json: false,
    };
    for name in list(raw, |s| Ok(s.to_ascii_lowercase()))? {
        match name.as_str() {
            "csv" => f.csv = true,
            "json" => f.json = true,
            other => return Err(format!("unknown output format `{other}`")),
        }
    }
    Ok(f)
}

/// Parses and validates a configuration. Omitted keys take their defaults.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut values = HashMap::new();
    for (n, raw_line) in text.lines().enumerate() {
        let line = n + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| Error::Config {
            line: Some(line),
            key: content.to_string(),
            message: "expected `key = value`".into(),
        })?;
        let key = key.trim().to_ascii_lowercase();
        if !KEYS.contains(&key.as_str()) {
            return Err(Error::Config {
                line: Some(line),
                key,
                message: "unknown key".into(),
            });
        }
        if let Some((first, _)) = values.get(&key) {
            return Err(Error::Config {
                line: Some(line),
                key,
                message: format!("already set on line {first}"),
            });
        }
        values.insert(key, (line, value.trim().to_string()));
    }
    let e = Entries { values };

    let k0 = e.get("k0", 0.1, real)?;
    let k1 = e.get("k1", 2.0, real)?;
    let k2 = e.get("k2", 1.0, real)?;
    let a0 = e.get("a0", 1.0, real)?;
    let m = e.get("m", 2053usize, number)?;
    let params = ModelParams::new(k0, k1, k2, a0, m).map_err(|err| {
        let key = ["k1", "k2", "k0", "a0", "m"]
            .into_iter()
            .filter(|k| e.line(k).is_some())
            .max_by_key(|k| e.line(k))
            .unwrap_or("k1");
        e.err(key, err.to_string())
    })?;

    let first = e.get("atomistic_first", -1, number)?;
    let last = e.get("atomistic_last", 2, number)?;
    Partition::block(m, first, last).map_err(|err| e.err("atomistic_first", err.to_string()))?;

    let wells = BoundaryValues::in_wells(&params);
    let boundary = BoundaryValues {
        l1: e.get("bc_l1", wells.l1, real)?,
        l2: e.get("bc_l2", wells.l2, real)?,
        r2: e.get("bc_r2", wells.r2, real)?,
        r1: e.get("bc_r1", wells.r1, real)?,
    };

    let adapt = AdaptConfig {
        tau_gl: e.get("tau_gl", 1e-5, real)?,
        tau_fac: e.get("tau_fac", 10.0, real)?,
        factor: e.get("lambda", RefinementFactor::Finite(2), str::parse)?,
        max_iterations: e.get("max_iterations", 100, number)?,
    };
    adapt.validate().map_err(|err| {
        let key = if adapt.tau_gl <= 0.0 {
            "tau_gl"
        } else if adapt.tau_fac <= 1.0 {
            "tau_fac"
        } else {
            "max_iterations"
        };
        e.err(key, err.to_string())
    })?;

    let sweep_tau_gl = e.get("sweep_tau_gl", 4e-10, real)?;
    if sweep_tau_gl <= 0.0 {
        return Err(e.err("sweep_tau_gl", "must be positive"));
    }

    Ok(RunConfig {
        params,
        atomistic: (first, last),
        boundary,
        adapt,
        oracle: e.get("oracle", true, switch)?,
        out: e.get("out", PathBuf::from("out"), |s| Ok(PathBuf::from(s)))?,
        formats: e.get("formats", OutputFormats { csv: true, json: true }, formats)?,
        tolerances: e.get("tolerances", vec![1e-1, 1e-3, 1e-5], parse_tolerances)?,
        lambdas: e.get(
            "lambdas",
            vec![
                RefinementFactor::Finite(2),
                RefinementFactor::Finite(4),
                RefinementFactor::Finite(8),
                RefinementFactor::Infinite,
            ],
            parse_lambdas,
        )?,
        sweep_tau_gl,
    })
}
