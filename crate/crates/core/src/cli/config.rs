use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::gibbs::McmcParams;
use crate::model::{in_open_chamber, Kernel, Potential, TiltSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("key `{key}` expects {expected}, got `{found}`")]
    TypeError {
        key: String,
        expected: &'static str,
        found: String,
    },
    #[error("missing required key `{0}`")]
    MissingRequired(String),
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Exact,
    Sample,
    Mixing,
    Invariance,
    Converge,
    Dominance,
    Blocks,
    Slope,
    Oracle,
}

impl Experiment {
    pub const ALL: [Experiment; 9] = [
        Experiment::Exact,
        Experiment::Sample,
        Experiment::Mixing,
        Experiment::Invariance,
        Experiment::Converge,
        Experiment::Dominance,
        Experiment::Blocks,
        Experiment::Slope,
        Experiment::Oracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Exact => "exact",
            Experiment::Sample => "sample",
            Experiment::Mixing => "mixing",
            Experiment::Invariance => "invariance",
            Experiment::Converge => "converge",
            Experiment::Dominance => "dominance",
            Experiment::Blocks => "blocks",
            Experiment::Slope => "slope",
            Experiment::Oracle => "oracle",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == s)
    }

    fn required(self, bridge: bool) -> Vec<&'static str> {
        let mut keys = match self {
            Experiment::Exact | Experiment::Sample => {
                vec!["model.lambda", "window.m", "window.n", "boundary.u"]
            }
            Experiment::Mixing => vec!["model.lambda", "window.k", "boundary.u", "boundary.u_alt"],
            Experiment::Invariance | Experiment::Converge => {
                vec!["model.lambdas", "boundary.u_cont"]
            }
            Experiment::Dominance => vec![
                "model.lambda",
                "window.m",
                "window.n",
                "boundary.u",
                "boundary.u_alt",
                "boundary.u_cont",
                "boundary.u_cont_alt",
            ],
            Experiment::Blocks => vec![
                "model.lambda",
                "window.m",
                "window.n",
                "boundary.u",
                "boundary.u_alt",
            ],
            Experiment::Slope => vec!["model.lambda", "window.lengths", "boundary.u"],
            Experiment::Oracle => vec![],
        };
        if bridge {
            match self {
                Experiment::Exact | Experiment::Sample => keys.push("boundary.v"),
                Experiment::Mixing => keys.extend(["boundary.v", "boundary.v_alt"]),
                Experiment::Invariance | Experiment::Converge => keys.push("boundary.v_cont"),
                _ => {}
            }
        }
        keys
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Int,
    Uint,
    Float,
    Str,
    IntList,
    FloatList,
}

impl Kind {
    fn describe(self) -> &'static str {
        match self {
            Kind::Int => "an integer",
            Kind::Uint => "a non-negative integer",
            Kind::Float => "a finite real",
            Kind::Str => "a word",
            Kind::IntList => "a comma-separated list of integers",
            Kind::FloatList => "a comma-separated list of reals",
        }
    }
}

const SCHEMA: &[(&str, Kind)] = &[
    ("experiment", Kind::Str),
    ("seed", Kind::Uint),
    ("model.n", Kind::Uint),
    ("model.lambda", Kind::Float),
    ("model.lambdas", Kind::FloatList),
    ("model.a", Kind::Float),
    ("model.b", Kind::Float),
    ("kernel.offsets", Kind::IntList),
    ("kernel.probs", Kind::FloatList),
    ("window.m", Kind::Int),
    ("window.n", Kind::Int),
    ("window.t", Kind::Int),
    ("window.k", Kind::IntList),
    ("window.lengths", Kind::IntList),
    ("window.half_scale", Kind::Float),
    ("window.m_cont", Kind::Float),
    ("window.t_obs", Kind::Float),
    ("boundary.mode", Kind::Str),
    ("boundary.u", Kind::IntList),
    ("boundary.v", Kind::IntList),
    ("boundary.u_alt", Kind::IntList),
    ("boundary.v_alt", Kind::IntList),
    ("boundary.u_cont", Kind::FloatList),
    ("boundary.v_cont", Kind::FloatList),
    ("boundary.u_cont_alt", Kind::FloatList),
    ("engine.x_max", Kind::Int),
    ("mcmc.block_len", Kind::Uint),
    ("mcmc.overlap", Kind::Uint),
    ("mcmc.sweeps", Kind::Uint),
    ("mcmc.burn_in", Kind::Uint),
    ("mcmc.thin", Kind::Uint),
    ("mcmc.chains", Kind::Uint),
    ("sample.method", Kind::Str),
    ("sample.count", Kind::Uint),
    ("grid.dx", Kind::Float),
    ("grid.dx_fine", Kind::Float),
    ("grid.cap", Kind::Float),
    ("blocks.eta", Kind::Float),
    ("blocks.eps", Kind::Float),
    ("blocks.m_list", Kind::IntList),
    ("oracle.boundary", Kind::Str),
    ("oracle.t", Kind::Float),
];

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Uint(u64),
    Float(f64),
    Str(String),
    IntList(Vec<i64>),
    FloatList(Vec<f64>),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn join<T: fmt::Display>(xs: &[T]) -> String {
            xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
        }
        match self {
            Value::Int(x) => write!(f, "{x}"),
            Value::Uint(x) => write!(f, "{x}"),
            Value::Float(x) => write!(f, "{x:?}"),
            Value::Str(s) => write!(f, "{s}"),
            Value::IntList(xs) => write!(f, "{}", join(xs)),
            Value::FloatList(xs) => {
                let parts: Vec<String> = xs.iter().map(|x| format!("{x:?}")).collect();
                write!(f, "{}", parts.join(","))
            }
        }
    }
}

fn kind_of(key: &str) -> Option<Kind> {
    SCHEMA.iter().find(|(k, _)| *k == key).map(|&(_, kind)| kind)
}

fn parse_value(key: &str, kind: Kind, raw: &str) -> Result<Value, ConfigError> {
    let bad = || ConfigError::TypeError {
        key: key.to_string(),
        expected: kind.describe(),
        found: raw.to_string(),
    };
    let float = |s: &str| s.trim().parse::<f64>().ok().filter(|x| x.is_finite());
    let items = || raw.split(',').map(str::trim);
    Ok(match kind {
        Kind::Int => Value::Int(raw.parse().map_err(|_| bad())?),
        Kind::Uint => Value::Uint(raw.parse().map_err(|_| bad())?),
        Kind::Float => Value::Float(float(raw).ok_or_else(bad)?),
        Kind::Str => {
            if raw.is_empty() || raw.contains(char::is_whitespace) {
                return Err(bad());
            }
            Value::Str(raw.to_string())
        }
        Kind::IntList => Value::IntList(
            items()
                .map(|s| s.parse().map_err(|_| bad()))
                .collect::<Result<_, _>>()?,
        ),
        Kind::FloatList => Value::FloatList(
            items()
                .map(|s| float(s).ok_or_else(bad))
                .collect::<Result<_, _>>()?,
        ),
    })
}

/// Validated flat configuration. Only keys present in the source are stored,
/// so emitting and re-parsing is the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    values: BTreeMap<String, Value>,
    experiment: Experiment,
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut values = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, raw)) = line.split_once('=') else {
            return Err(ConfigError::Syntax {
                line: i + 1,
                msg: "expected `key = value`".into(),
            });
        };
        let (key, raw) = (key.trim(), raw.trim());
        let kind = kind_of(key).ok_or_else(|| ConfigError::UnknownKey(key.to_string()))?;
        let value = parse_value(key, kind, raw)?;
        if values.insert(key.to_string(), value).is_some() {
            return Err(ConfigError::Syntax {
                line: i + 1,
                msg: format!("duplicate key `{key}`"),
            });
        }
    }
    RunConfig::from_values(values)
}

pub fn emit_config(config: &RunConfig) -> String {
    config
        .values
        .iter()
        .map(|(k, v)| format!("{k} = {v}\n"))
        .collect()
}

impl RunConfig {
    fn from_values(values: BTreeMap<String, Value>) -> Result<Self, ConfigError> {
        let name = match values.get("experiment") {
            Some(Value::Str(s)) => s.clone(),
            _ => return Err(ConfigError::MissingRequired("experiment".into())),
        };
        let experiment = Experiment::parse(&name).ok_or_else(|| ConfigError::TypeError {
            key: "experiment".into(),
            expected: "one of exact, sample, mixing, invariance, converge, dominance, blocks, slope, oracle",
            found: name.clone(),
        })?;
        let config = Self { values, experiment };
        for key in experiment.required(config.is_bridge()?) {
            if !config.values.contains_key(key) {
                return Err(ConfigError::MissingRequired(key.into()));
            }
        }
        config.validate()?;
        Ok(config)
    }

    pub fn experiment(&self) -> Experiment {
        self.experiment
    }

    /// Replaces the seed, as done by the command-line override.
    pub fn with_seed(&self, seed: u64) -> Self {
        let mut out = self.clone();
        out.values.insert("seed".into(), Value::Uint(seed));
        out
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.values.get(key)
    }

    pub fn int(&self, key: &str) -> Option<i64> {
        match self.values.get(key) {
            Some(Value::Int(x)) => Some(*x),
            _ => None,
        }
    }

    pub fn uint(&self, key: &str) -> Option<u64> {
        match self.values.get(key) {
            Some(Value::Uint(x)) => Some(*x),
            _ => None,
        }
    }

    pub fn float(&self, key: &str) -> Option<f64> {
        match self.values.get(key) {
            Some(Value::Float(x)) => Some(*x),
            _ => None,
        }
    }

    pub fn word(&self, key: &str) -> Option<&str> {
        match self.values.get(key) {
            Some(Value::Str(s)) => Some(s),
            _ => None,
        }
    }

    pub fn ints(&self, key: &str) -> Option<&[i64]> {
        match self.values.get(key) {
            Some(Value::IntList(x)) => Some(x),
            _ => None,
        }
    }

    pub fn floats(&self, key: &str) -> Option<&[f64]> {
        match self.values.get(key) {
            Some(Value::FloatList(x)) => Some(x),
            _ => None,
        }
    }

    pub fn seed(&self) -> u64 {
        self.uint("seed").unwrap_or(0)
    }

    pub fn n(&self) -> usize {
        self.uint("model.n").unwrap_or(1) as usize
    }

    pub fn a(&self) -> f64 {
        self.float("model.a").unwrap_or(1.0)
    }

    pub fn b(&self) -> f64 {
        self.float("model.b").unwrap_or(2.0)
    }

    pub fn is_bridge(&self) -> Result<bool, ConfigError> {
        match self.word("boundary.mode").unwrap_or("walk") {
            "walk" => Ok(false),
            "bridge" => Ok(true),
            other => Err(ConfigError::TypeError {
                key: "boundary.mode".into(),
                expected: "walk or bridge",
                found: other.into(),
            }),
        }
    }

    pub fn kernel(&self) -> Result<Kernel, ConfigError> {
        let offsets = self.ints("kernel.offsets").unwrap_or(&[-1, 1]).to_vec();
        let probs = self.floats("kernel.probs").unwrap_or(&[0.5, 0.5]).to_vec();
        Kernel::new(offsets, probs).map_err(|e| ConfigError::Invalid(format!("kernel: {e}")))
    }

    pub fn tilt(&self, lambda: f64) -> Result<TiltSpec, ConfigError> {
        let invalid = |e: crate::model::ModelError| ConfigError::Invalid(format!("model: {e}"));
        let v = Potential::linear(lambda).map_err(invalid)?;
        TiltSpec::new(self.a(), self.b(), v).map_err(invalid)
    }

    pub fn lambda(&self) -> Option<f64> {
        self.float("model.lambda")
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.floats("model.lambdas").map(<[f64]>::to_vec).unwrap_or_default()
    }

    pub fn mcmc(&self) -> McmcParams {
        let d = McmcParams::default();
        let get = |k: &str, default: usize| self.uint(k).map_or(default, |x| x as usize);
        McmcParams {
            block_len: get("mcmc.block_len", d.block_len),
            overlap: get("mcmc.overlap", d.overlap),
            sweeps: get("mcmc.sweeps", d.sweeps),
            burn_in: get("mcmc.burn_in", d.burn_in),
            thin: get("mcmc.thin", d.thin),
            chains: get("mcmc.chains", d.chains),
            seed: self.seed(),
        }
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        if self.n() == 0 {
            return invalid("model.n must be positive".into());
        }
        self.kernel()?;
        // a tilt per λ exercises the a, b and λ constraints
        let lambdas: Vec<f64> = self.lambda().into_iter().chain(self.lambdas()).collect();
        if lambdas.is_empty() {
            self.tilt(1.0)?;
        }
        for &l in &lambdas {
            self.tilt(l)?;
        }
        for key in ["boundary.u", "boundary.v", "boundary.u_alt", "boundary.v_alt"] {
            if let Some(x) = self.ints(key) {
                if x.len() != self.n() || !in_open_chamber(x) {
                    return invalid(format!(
                        "{key} must hold {} strictly decreasing positive heights",
                        self.n()
                    ));
                }
            }
        }
        for key in ["boundary.u_cont", "boundary.v_cont", "boundary.u_cont_alt"] {
            if let Some(x) = self.floats(key) {
                let ordered = x.windows(2).all(|w| w[0] > w[1]) && x.last().is_some_and(|&l| l > 0.0);
                if x.len() != self.n() || !ordered {
                    return invalid(format!(
                        "{key} must hold {} strictly decreasing positive heights",
                        self.n()
                    ));
                }
            }
        }
        if let (Some(m), Some(n)) = (self.int("window.m"), self.int("window.n")) {
            if m >= n {
                return invalid(format!("window [{m}, {n}] is empty"));
            }
        }
        self.mcmc()
            .validate()
            .map_err(|e| ConfigError::Invalid(format!("mcmc: {e}")))?;
        for (key, allowed) in [
            ("sample.method", &["exact", "mcmc"][..]),
            (
                "oracle.boundary",
                &["stationary", "zero", "fixed", "free_right", "free_both"][..],
            ),
        ] {
            if let Some(w) = self.word(key) {
                if !allowed.contains(&w) {
                    return Err(ConfigError::TypeError {
                        key: key.into(),
                        expected: "a listed option",
                        found: w.into(),
                    });
                }
            }
        }
        for key in ["grid.dx", "grid.dx_fine", "grid.cap", "window.m_cont", "window.half_scale"] {
            if let Some(x) = self.float(key) {
                if !(x > 0.0) {
                    return invalid(format!("{key} must be positive"));
                }
            }
        }
        Ok(())
    }
}
