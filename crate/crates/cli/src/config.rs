//! Flat `key = value` configuration with `--set` overrides.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use clap::ValueEnum;
use qensemble::ensemble::{Quantity, UnitSystem};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Ensemble,
    Well,
    Spread,
    Collapse,
    Eraser,
    Bomb,
    Selftest,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.to_possible_value().expect("no skipped variants").get_name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Float,
    /// Integer no smaller than the bound.
    Count(u64),
    FloatList,
    Choice(&'static [&'static str]),
}

#[derive(Debug, Clone, Copy)]
struct ParamSpec {
    key: &'static str,
    default: &'static str,
    kind: Kind,
    quantity: Option<Quantity>,
    /// Must be given explicitly in SI units.
    si_required: bool,
}

const fn spec(key: &'static str, default: &'static str, kind: Kind, quantity: Option<Quantity>) -> ParamSpec {
    ParamSpec { key, default, kind, quantity, si_required: false }
}

const fn si(mut p: ParamSpec) -> ParamSpec {
    p.si_required = true;
    p
}

use Kind::*;
use Quantity as Q;

const UNITS: ParamSpec = spec("units", "natural", Choice(&["natural", "si"]), None);
const MASS: ParamSpec = si(spec("mass", "1", Float, Some(Q::Mass)));
const HBAR: ParamSpec = si(spec("hbar", "1", Float, Some(Q::Action)));
const CONVENTION: ParamSpec =
    spec("convention", "as_printed", Choice(&["as_printed", "single_mass", "double_mass"]), None);

fn schema(cmd: Command) -> Vec<ParamSpec> {
    match cmd {
        Command::Ensemble => vec![
            UNITS,
            MASS,
            HBAR,
            CONVENTION,
            si(spec("energy", "1", Float, Some(Q::Energy))),
            si(spec("potentials", "-3,0,0.5", FloatList, Some(Q::Energy))),
            si(spec("r_max", "10", Float, Some(Q::Length))),
            spec("n_r", "201", Count(2), None),
            spec("n_k", "401", Count(2), None),
        ],
        Command::Spread => vec![
            UNITS,
            MASS,
            HBAR,
            spec("packet", "both", Choice(&["both", "gaussian", "single_mode"]), None),
            si(spec("b", "1", Float, Some(Q::Length))),
            si(spec("k0", "5", Float, Some(Q::Wavenumber))),
            si(spec("times", "0,0.5,1,2", FloatList, Some(Q::Time))),
            si(spec("x_min", "-10", Float, Some(Q::Length))),
            si(spec("x_max", "30", Float, Some(Q::Length))),
            spec("n_x", "801", Count(3), None),
            spec("closed_form", "textbook", Choice(&["textbook", "as_printed"]), None),
        ],
        Command::Collapse => vec![
            UNITS,
            MASS,
            HBAR,
            CONVENTION,
            si(spec("energy", "1", Float, Some(Q::Energy))),
            si(spec("e_rfa", "0.25", Float, Some(Q::Energy))),
            spec("threshold_form", "energy_above", Choice(&["energy_above", "difference"]), None),
            si(spec("r_max", "10", Float, Some(Q::Length))),
            spec("n_r", "201", Count(2), None),
            spec("n_k", "401", Count(2), None),
        ],
        Command::Well => vec![
            UNITS,
            MASS,
            HBAR,
            si(spec("v0", "20", Float, Some(Q::Energy))),
            si(spec("x0", "1", Float, Some(Q::Length))),
            si(spec("energy", "1", Float, Some(Q::Energy))),
            si(spec("x_max", "6", Float, Some(Q::Length))),
            spec("n_x", "1201", Count(3), None),
            spec("n_k", "2001", Count(3), None),
        ],
        Command::Eraser => vec![
            UNITS,
            spec("n_phi", "64", Count(2), None),
            spec("e1", "1", Float, Some(Q::Amplitude)),
            spec("b1", "1", Float, Some(Q::Amplitude)),
            si(spec("c", "1", Float, Some(Q::Velocity))),
        ],
        Command::Bomb => vec![
            spec("bomb", "both", Choice(&["both", "present", "absent"]), None),
            spec("reflectivity", "0.5", Float, Some(Q::Dimensionless)),
            spec("efficiency", "0.02", Float, Some(Q::Dimensionless)),
            spec("trials", "100000", Count(1), None),
        ],
        Command::Selftest => Vec::new(),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Float(f64),
    Count(u64),
    List(Vec<f64>),
    Choice(String),
}

/// Validated scenario parameters.
#[derive(Debug, Clone)]
pub struct Params {
    units: UnitSystem,
    specs: Vec<ParamSpec>,
    raw: BTreeMap<&'static str, String>,
    values: BTreeMap<&'static str, Value>,
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_file(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = split_pair(line).map_err(|e| CliError::Invalid(format!("config line {}: {e}", i + 1)))?;
        if !seen.insert(k.clone()) {
            return Err(CliError::Invalid(format!("config line {}: duplicate key `{k}`", i + 1)));
        }
        out.push((k, v));
    }
    Ok(out)
}

pub fn split_pair(s: &str) -> Result<(String, String), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got `{s}`"))?;
    let (k, v) = (k.trim(), v.trim());
    if k.is_empty() {
        return Err(format!("empty key in `{s}`"));
    }
    Ok((k.to_string(), v.to_string()))
}

fn parse_float(key: &str, s: &str) -> Result<f64, CliError> {
    let v: f64 = s.parse().map_err(|_| CliError::Invalid(format!("`{key}`: `{s}` is not a number")))?;
    if !v.is_finite() {
        return Err(CliError::Invalid(format!("`{key}`: must be finite")));
    }
    Ok(v)
}

impl Params {
    /// Merges file entries and overrides (later wins) over the defaults.
    pub fn resolve(cmd: Command, file: &[(String, String)], sets: &[(String, String)]) -> Result<Self, CliError> {
        let specs = schema(cmd);
        let mut raw: BTreeMap<&'static str, String> = specs.iter().map(|s| (s.key, s.default.to_string())).collect();
        let mut explicit = BTreeSet::new();
        for (k, v) in file.iter().chain(sets) {
            let spec = specs.iter().find(|s| s.key == k).ok_or_else(|| {
                let known: Vec<&str> = specs.iter().map(|s| s.key).collect();
                CliError::Invalid(format!("unknown key `{k}` for `{cmd}` (known: {})", known.join(", ")))
            })?;
            raw.insert(spec.key, v.clone());
            explicit.insert(spec.key);
        }
        let units = match raw.get("units").map(String::as_str) {
            Some("si") => UnitSystem::Si,
            _ => UnitSystem::Natural,
        };
        let mut values = BTreeMap::new();
        for s in &specs {
            let text = &raw[s.key];
            let v = match s.kind {
                Float => Value::Float(parse_float(s.key, text)?),
                Count(min) => {
                    let n: u64 = text
                        .parse()
                        .map_err(|_| CliError::Invalid(format!("`{}`: `{text}` is not a whole number", s.key)))?;
                    if n < min {
                        return Err(CliError::Invalid(format!("`{}`: must be at least {min}", s.key)));
                    }
                    Value::Count(n)
                }
                FloatList => {
                    let items =
                        text.split(',').map(|t| parse_float(s.key, t.trim())).collect::<Result<Vec<_>, _>>()?;
                    Value::List(items)
                }
                Choice(options) => {
                    if !options.contains(&text.as_str()) {
                        return Err(CliError::Invalid(format!(
                            "`{}`: `{text}` is not one of {}",
                            s.key,
                            options.join(", ")
                        )));
                    }
                    Value::Choice(text.clone())
                }
            };
            if units == UnitSystem::Si && s.si_required && !explicit.contains(s.key) {
                return Err(CliError::Invalid(format!("`{}` must be set explicitly when units = si", s.key)));
            }
            values.insert(s.key, v);
        }
        Ok(Self { units, specs, raw, values })
    }

    pub fn units(&self) -> UnitSystem {
        self.units
    }

    pub fn has(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn float(&self, key: &str) -> f64 {
        match self.values.get(key) {
            Some(Value::Float(v)) => *v,
            other => panic!("`{key}` is not a float parameter: {other:?}"),
        }
    }

    pub fn count(&self, key: &str) -> usize {
        match self.values.get(key) {
            Some(Value::Count(v)) => *v as usize,
            other => panic!("`{key}` is not a count parameter: {other:?}"),
        }
    }

    pub fn list(&self, key: &str) -> &[f64] {
        match self.values.get(key) {
            Some(Value::List(v)) => v,
            other => panic!("`{key}` is not a list parameter: {other:?}"),
        }
    }

    pub fn choice(&self, key: &str) -> &str {
        match self.values.get(key) {
            Some(Value::Choice(v)) => v,
            other => panic!("`{key}` is not a choice parameter: {other:?}"),
        }
    }

    /// `(key, value, unit)` for every parameter, in schema order.
    pub fn echo(&self) -> Vec<(&'static str, String, &'static str)> {
        self.specs
            .iter()
            .map(|s| {
                let unit = match (s.quantity, s.kind) {
                    (Some(q), _) => self.units.tag(q),
                    (None, Count(_)) => "count",
                    (None, _) => "-",
                };
                (s.key, self.raw[s.key].clone(), unit)
            })
            .collect()
    }
}
