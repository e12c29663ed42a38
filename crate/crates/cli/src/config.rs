//! Experiment configuration: flat TOML sections merged over per-experiment
//! defaults.
//!
//! ```toml
//! [experiment]
//! name = "fig2"
//! seed = 7
//!
//! [physics]
//! omega_plus_alpha = 2000.0
//! v = 10.0
//!
//! [numerics]
//! realizations = 8
//! ```
//!
//! `omega_plus_alpha` is accepted in place of `omega`; the resolved config
//! always carries `omega`.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use timeloc::lattice::Band;
use toml::{Table, Value};

pub const GOLDEN: f64 = 0.618_033_988_749_894_9;
pub const DEFAULT_OMEGA_PLUS_ALPHA: f64 = 2000.0;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("unknown experiment `{0}` (expected one of: {names})", names = Experiment::NAMES.join(", "))]
    UnknownExperiment(String),
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("malformed config: {0}")]
    Parse(String),
    #[error("bad override `{0}`: expected section.key=value")]
    Override(String),
    #[error("invalid value for `{key}`: {reason}")]
    Invalid { key: String, reason: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Fig1,
    Fig2,
    Sos,
    Levels,
    EigenstateCompare,
    BornVsTm,
    LatticeSweep,
    Custom,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::Fig1,
        Experiment::Fig2,
        Experiment::Sos,
        Experiment::Levels,
        Experiment::EigenstateCompare,
        Experiment::BornVsTm,
        Experiment::LatticeSweep,
        Experiment::Custom,
    ];
    const NAMES: [&'static str; 8] =
        ["fig1", "fig2", "sos", "levels", "eigenstate-compare", "born-vs-tm", "lattice-sweep", "custom"];

    pub fn name(self) -> &'static str {
        Self::NAMES[self as usize]
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| ConfigError::UnknownExperiment(s.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub name: Experiment,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Physics {
    pub omega: f64,
    pub alpha: f64,
    pub v: f64,
    pub lambda: f64,
    pub s: u32,
    pub k0: f64,
    /// Kinetic mass coefficient of the effective model.
    pub mu: f64,
    /// Target energy `Ẽ = E - ω²/2`.
    pub energy: f64,
    #[serde(with = "band_name")]
    pub band: Band,
}

mod band_name {
    use serde::{Deserialize, Deserializer, Serializer};
    use timeloc::lattice::Band;

    pub fn serialize<S: Serializer>(band: &Band, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&band.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Band, D::Error> {
        let name = String::deserialize(d)?;
        name.parse().map_err(|e| serde::de::Error::custom(format!("{e}")))
    }
}

/// Numerical knobs. A zero half-width means "derive from the physics".
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Numerics {
    pub basis_halfwidth: i64,
    pub floquet_halfwidth: i64,
    pub grid: usize,
    pub levels: usize,
    pub state: usize,
    pub realizations: usize,
    pub min_realizations: usize,
    pub min_fits: usize,
    pub states: usize,
    pub shell_lo: f64,
    pub shell_hi: f64,
    pub length: f64,
    pub steps_per_period: usize,
    pub periods: usize,
    pub trajectories: usize,
    pub fourier_cutoff: usize,
    pub times: usize,
    pub second_order: bool,
    pub window_check: bool,
    /// fig1 only: the k0 = 10³ eigenproblem (several GB, minutes).
    pub full_scale: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axis: String,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    pub physics: Physics,
    pub numerics: Numerics,
    pub sweep: SweepSection,
}

fn base(name: Experiment) -> ExperimentConfig {
    ExperimentConfig {
        experiment: ExperimentSection { name, seed: 1 },
        physics: Physics {
            omega: DEFAULT_OMEGA_PLUS_ALPHA - GOLDEN,
            alpha: GOLDEN,
            v: 20.0,
            lambda: 0.0,
            s: 1,
            k0: 10.0,
            mu: 1.0,
            energy: 0.0,
            band: Band::Lowest,
        },
        numerics: Numerics {
            basis_halfwidth: 0,
            floquet_halfwidth: 0,
            grid: 1024,
            levels: 8,
            state: 7,
            realizations: 1,
            min_realizations: 1,
            min_fits: 1,
            states: 5,
            shell_lo: 0.0,
            shell_hi: 0.0,
            length: 0.0,
            steps_per_period: 640,
            periods: 300,
            trajectories: 8,
            fourier_cutoff: 40,
            times: 400,
            second_order: false,
            window_check: false,
            full_scale: false,
        },
        sweep: SweepSection { axis: String::new(), values: Vec::new() },
    }
}

/// Reference parameters for each pipeline, scaled down where the full problem
/// is too large for a workstation. Some defaults depend on a user choice
/// (`band`, `full_scale`), which is why the raw table is consulted.
pub fn defaults(name: Experiment, user: &Table) -> ExperimentConfig {
    let mut c = base(name);
    let p = &mut c.physics;
    let n = &mut c.numerics;
    match name {
        Experiment::Fig1 => {
            if lookup(user, "numerics", "full_scale").and_then(Value::as_bool) == Some(true) {
                n.full_scale = true;
                (p.k0, p.v, p.energy) = (1e3, 4e3, 8e3);
                (n.shell_lo, n.shell_hi) = (7.5e3, 8.5e3);
                (n.realizations, n.min_realizations, n.min_fits) = (1, 1, 1);
                n.grid = 16384;
            } else {
                // Ẽ ∝ k0² keeps the exponential factor; V is chosen so ξ_Born ≈ 0.3
                (p.k0, p.v, p.energy) = (100.0, 125.0, 80.0);
                (n.shell_lo, n.shell_hi) = (60.0, 100.0);
                (n.realizations, n.min_realizations, n.min_fits) = (200, 5, 20);
                n.grid = 4096;
            }
        }
        Experiment::Fig2 | Experiment::LatticeSweep => {
            let band = lookup(user, "physics", "band").and_then(Value::as_str).and_then(|b| b.parse::<Band>().ok());
            (p.s, p.lambda, p.k0) = (100, 2e4, 100.0);
            p.v = if band == Some(Band::FirstExcited) { 300.0 } else { 10.0 };
            n.realizations = if name == Experiment::Fig2 { 8 } else { 20 };
            // resolves Wannier packets of width ~0.01 rad in the lab series
            n.grid = 8192;
        }
        Experiment::Sos => {}
        Experiment::Levels => {
            c.sweep = SweepSection { axis: "physics.v".into(), values: vec![0.0, 5.0, 10.0, 15.0, 20.0] };
        }
        Experiment::EigenstateCompare => {
            n.second_order = true;
        }
        Experiment::BornVsTm => {
            (p.k0, p.v, p.energy) = (1e3, 4e3, 8e3);
            n.length = 300.0;
            n.realizations = 16;
        }
        Experiment::Custom => {
            p.energy = 20.0;
        }
    }
    c
}

fn lookup<'a>(t: &'a Table, section: &str, key: &str) -> Option<&'a Value> {
    t.get(section)?.as_table()?.get(key)
}

/// Parses a `section.key=value` override; the value is read as a TOML
/// literal, falling back to a bare string.
pub fn parse_override(s: &str) -> Result<(String, String, Value), ConfigError> {
    let (path, raw) = s.split_once('=').ok_or_else(|| ConfigError::Override(s.into()))?;
    let (section, key) = path.trim().split_once('.').ok_or_else(|| ConfigError::Override(s.into()))?;
    let raw = raw.trim();
    let value = toml::from_str::<Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));
    Ok((section.to_string(), key.to_string(), value))
}

pub fn set(table: &mut Table, section: &str, key: &str, value: Value) {
    let entry = table.entry(section.to_string()).or_insert_with(|| Value::Table(Table::new()));
    if !entry.is_table() {
        *entry = Value::Table(Table::new());
    }
    let sec = entry.as_table_mut().expect("section table");
    // the two frequency spellings replace each other
    match key {
        "omega" => {
            sec.remove("omega_plus_alpha");
        }
        "omega_plus_alpha" => {
            sec.remove("omega");
        }
        _ => {}
    }
    sec.insert(key.to_string(), value);
}

/// Reads a config or a run manifest (whose `[config]` table is used).
pub fn read_table(path: &Path) -> Result<Table, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.display().to_string(), source })?;
    let mut t: Table = toml::from_str(&text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    if let Some(Value::Table(inner)) = t.remove("config") {
        return Ok(inner);
    }
    Ok(t)
}

fn merge(into: &mut Table, over: Table) {
    for (k, v) in over {
        match (into.get_mut(&k), v) {
            (Some(Value::Table(a)), Value::Table(b)) => merge(a, b),
            (_, v) => {
                into.insert(k, v);
            }
        }
    }
}

fn as_f64(v: &Value, key: &str) -> Result<f64, ConfigError> {
    v.as_float()
        .or_else(|| v.as_integer().map(|i| i as f64))
        .ok_or_else(|| ConfigError::Invalid { key: key.into(), reason: "expected a number".into() })
}

/// Integers are accepted wherever a float is expected.
fn coerce_floats(t: &mut Table) {
    const FLOAT_KEYS: [&str; 10] =
        ["omega", "alpha", "v", "lambda", "k0", "mu", "energy", "shell_lo", "shell_hi", "length"];
    for (_, sec) in t.iter_mut() {
        let Some(sec) = sec.as_table_mut() else { continue };
        for (k, v) in sec.iter_mut() {
            if let (true, Some(i)) = (FLOAT_KEYS.contains(&k.as_str()), v.as_integer()) {
                *v = Value::Float(i as f64);
            }
            if k == "values" {
                if let Some(arr) = v.as_array_mut() {
                    for x in arr.iter_mut() {
                        if let Some(i) = x.as_integer() {
                            *x = Value::Float(i as f64);
                        }
                    }
                }
            }
        }
    }
}

impl ExperimentConfig {
    /// Resolves a raw table (after overrides) into a complete config.
    pub fn resolve(mut user: Table) -> Result<Self, ConfigError> {
        let name: Experiment = match lookup(&user, "experiment", "name") {
            Some(Value::String(s)) => s.parse()?,
            Some(_) => return Err(ConfigError::Invalid { key: "experiment.name".into(), reason: "expected a string".into() }),
            None => Experiment::Custom,
        };
        let defaults = defaults(name, &user);
        if let Some(Value::Table(phys)) = user.get_mut("physics") {
            if phys.contains_key("omega") && phys.contains_key("omega_plus_alpha") {
                return Err(ConfigError::Invalid {
                    key: "physics.omega".into(),
                    reason: "give either omega or omega_plus_alpha".into(),
                });
            }
            if let Some(opa) = phys.remove("omega_plus_alpha") {
                let alpha = match phys.get("alpha") {
                    Some(a) => as_f64(a, "physics.alpha")?,
                    None => defaults.physics.alpha,
                };
                phys.insert("omega".into(), Value::Float(as_f64(&opa, "physics.omega_plus_alpha")? - alpha));
            }
        }
        coerce_floats(&mut user);
        let mut table = Table::try_from(&defaults).map_err(|e| ConfigError::Parse(e.to_string()))?;
        merge(&mut table, user);
        let cfg: ExperimentConfig = table.try_into().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut t = match path {
            Some(p) => read_table(p)?,
            None => Table::new(),
        };
        for o in overrides {
            let (section, key, value) = parse_override(o)?;
            set(&mut t, &section, &key, value);
        }
        Self::resolve(t)
    }

    pub fn defaults_for(name: Experiment) -> Self {
        Self::resolve(Table::from_iter([(
            "experiment".to_string(),
            Value::Table(Table::from_iter([("name".to_string(), Value::String(name.name().into()))])),
        )]))
        .expect("built-in defaults are valid")
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let bad = |key: &str, reason: &str| Err(ConfigError::Invalid { key: key.into(), reason: reason.into() });
        let p = &self.physics;
        if !(p.omega > 0.0 && p.omega.is_finite()) {
            return bad("physics.omega", "must be positive");
        }
        if !(p.k0 > 0.0) {
            return bad("physics.k0", "must be positive");
        }
        if !(p.mu > 0.0) {
            return bad("physics.mu", "must be positive");
        }
        if p.s == 0 {
            return bad("physics.s", "must be at least 1");
        }
        if !p.v.is_finite() || !p.lambda.is_finite() || !p.alpha.is_finite() || !p.energy.is_finite() {
            return bad("physics", "parameters must be finite");
        }
        if self.numerics.grid < 8 {
            return bad("numerics.grid", "need at least 8 points");
        }
        if self.numerics.shell_hi < self.numerics.shell_lo {
            return bad("numerics.shell_hi", "below shell_lo");
        }
        Ok(())
    }

    pub fn table(&self) -> Table {
        Table::try_from(self).expect("config serializes")
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Config with one numeric field replaced, addressed as `section.key`.
    pub fn with_value(&self, axis: &str, value: f64) -> Result<Self, ConfigError> {
        let (section, key) = axis.split_once('.').ok_or_else(|| ConfigError::Invalid {
            key: axis.into(),
            reason: "axis must be section.key".into(),
        })?;
        let mut t = self.table();
        let current = lookup(&t, section, key);
        let numeric_alias = section == "physics" && key == "omega_plus_alpha";
        let v = match current {
            _ if numeric_alias => Value::Float(value),
            Some(Value::Float(_)) => Value::Float(value),
            Some(Value::Integer(_)) => {
                if value.fract() != 0.0 {
                    return Err(ConfigError::Invalid { key: axis.into(), reason: format!("{value} is not an integer") });
                }
                Value::Integer(value as i64)
            }
            Some(_) => return Err(ConfigError::Invalid { key: axis.into(), reason: "not a numeric field".into() }),
            None => return Err(ConfigError::Invalid { key: axis.into(), reason: "no such field".into() }),
        };
        set(&mut t, section, key, v);
        Self::resolve(t)
    }
}
