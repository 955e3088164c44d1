//! Configuration resolution: flat `key = value` config files, flag
//! overrides, and the reference defaults.
//!
//! Without a config file the defaults reproduce the reference experiment
//! (J = 0.1, B1 = B2(0) = 3, B3 = 4, T1 = 1, T2 = 2). When a config file is
//! supplied it must define the six physical keys explicitly; a missing key
//! is a config error naming the key.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use qotto_core::{CycleConfig, StepPolicy};

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

const PHYSICAL_KEYS: [&str; 6] = ["j", "b1", "b2_start", "b3", "t_cold", "t_hot"];
const OPTIONAL_KEYS: [&str; 3] = ["tau", "step_policy", "protocol"];
const SWEEP_KEYS: [&str; 7] = [
    "sweep.tau_min",
    "sweep.tau_max",
    "sweep.n_points",
    "sweep.spacing",
    "sweep.tau_values",
    "sweep.out",
    "sweep.format",
];

/// Output format for sweep artifacts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(ConfigError(format!(
                "unknown format '{other}', expected csv or json"
            ))),
        }
    }
}

/// Fully resolved run settings after merging defaults, file and flags.
#[derive(Debug, Clone)]
pub struct Settings {
    pub cycle: CycleConfig,
    pub constant_delta_b: bool,
    pub tau_values: Vec<f64>,
    pub log_spacing: bool,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    pub workers: Option<usize>,
}

/// Flag-level overrides collected by clap before resolution.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub config_path: Option<PathBuf>,
    pub tau: Option<f64>,
    pub tau_range: Option<String>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub constant_delta_b: bool,
    pub step_policy: Option<String>,
    pub workers: Option<usize>,
}

fn parse_f64(key: &str, value: &str) -> Result<f64, ConfigError> {
    value
        .parse::<f64>()
        .map_err(|_| ConfigError(format!("key '{key}' has non-numeric value '{value}'")))
}

fn parse_step_policy(s: &str) -> Result<StepPolicy, ConfigError> {
    if s == "auto" {
        return Ok(StepPolicy::Auto);
    }
    if let Some(h) = s.strip_prefix("fixed:") {
        let h = parse_f64("step_policy", h)?;
        return Ok(StepPolicy::Fixed(h));
    }
    Err(ConfigError(format!(
        "step_policy must be 'auto' or 'fixed:H', got '{s}'"
    )))
}

/// `MIN:MAX:N` with an optional trailing `:log`.
pub fn parse_tau_range(range: &str) -> Result<(Vec<f64>, bool), ConfigError> {
    let parts: Vec<&str> = range.split(':').collect();
    let (min_s, max_s, n_s, log) = match parts.as_slice() {
        [a, b, c] => (*a, *b, *c, false),
        [a, b, c, "log"] => (*a, *b, *c, true),
        [a, b, c, "linear"] => (*a, *b, *c, false),
        _ => {
            return Err(ConfigError(format!(
                "tau range must be MIN:MAX:N[:log], got '{range}'"
            )))
        }
    };
    let min = parse_f64("tau-range min", min_s)?;
    let max = parse_f64("tau-range max", max_s)?;
    let n: usize = n_s
        .parse()
        .map_err(|_| ConfigError(format!("tau-range point count '{n_s}' is not an integer")))?;
    Ok((tau_grid(min, max, n, log)?, log))
}

pub fn tau_grid(min: f64, max: f64, n: usize, log: bool) -> Result<Vec<f64>, ConfigError> {
    if n == 0 {
        return Err(ConfigError("tau range needs at least 1 point".into()));
    }
    if min < 0.0 {
        return Err(ConfigError(format!("tau values must be >= 0, got {min}")));
    }
    if n > 1 && max <= min {
        return Err(ConfigError(format!(
            "tau range must be increasing, got [{min}, {max}]"
        )));
    }
    if log && min <= 0.0 {
        return Err(ConfigError("log spacing requires tau_min > 0".into()));
    }
    if n == 1 {
        return Ok(vec![min]);
    }
    let values = (0..n)
        .map(|k| {
            let f = k as f64 / (n - 1) as f64;
            if log {
                (min.ln() + (max.ln() - min.ln()) * f).exp()
            } else {
                min + (max - min) * f
            }
        })
        .collect();
    Ok(values)
}

fn read_key_value_file(path: &Path) -> Result<BTreeMap<String, String>, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError(format!(
                "{}:{}: expected 'key = value', got '{raw}'",
                path.display(),
                lineno + 1
            )));
        };
        let key = key.trim().to_string();
        let known = PHYSICAL_KEYS.contains(&key.as_str())
            || OPTIONAL_KEYS.contains(&key.as_str())
            || SWEEP_KEYS.contains(&key.as_str());
        if !known {
            return Err(ConfigError(format!("unknown config key '{key}'")));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

/// Merge defaults, optional config file and flag overrides into one
/// resolved settings block. Flags always win over file values.
pub fn resolve(overrides: &Overrides) -> Result<Settings, ConfigError> {
    let file = match &overrides.config_path {
        Some(p) => Some(read_key_value_file(p)?),
        None => None,
    };

    let mut cycle = CycleConfig::reference(20.0);
    let mut constant_delta_b = false;
    let mut tau_values: Option<Vec<f64>> = None;
    let mut log_spacing = false;
    let mut out: Option<PathBuf> = None;
    let mut format = OutputFormat::Csv;

    if let Some(map) = &file {
        for key in PHYSICAL_KEYS {
            if !map.contains_key(key) {
                return Err(ConfigError(format!(
                    "config file is missing required key '{key}'"
                )));
            }
        }
        cycle.j_coupling = parse_f64("j", &map["j"])?;
        cycle.b1 = parse_f64("b1", &map["b1"])?;
        cycle.b2_start = parse_f64("b2_start", &map["b2_start"])?;
        cycle.b3 = parse_f64("b3", &map["b3"])?;
        cycle.t_cold = parse_f64("t_cold", &map["t_cold"])?;
        cycle.t_hot = parse_f64("t_hot", &map["t_hot"])?;
        if let Some(v) = map.get("tau") {
            cycle.tau_total = parse_f64("tau", v)?;
        }
        if let Some(v) = map.get("step_policy") {
            cycle.step_policy = parse_step_policy(v)?;
        }
        if let Some(v) = map.get("protocol") {
            constant_delta_b = match v.as_str() {
                "sine_pulse" => false,
                "constant_delta_b" => true,
                other => {
                    return Err(ConfigError(format!(
                        "protocol must be sine_pulse or constant_delta_b, got '{other}'"
                    )))
                }
            };
        }
        if let Some(v) = map.get("sweep.tau_values") {
            let mut values = Vec::new();
            for item in v.split(',') {
                values.push(parse_f64("sweep.tau_values", item.trim())?);
            }
            if values.windows(2).any(|w| w[1] <= w[0]) || values.iter().any(|&t| t < 0.0) {
                return Err(ConfigError(
                    "sweep.tau_values must be nonnegative and strictly increasing".into(),
                ));
            }
            tau_values = Some(values);
        } else if map.contains_key("sweep.tau_min")
            || map.contains_key("sweep.tau_max")
            || map.contains_key("sweep.n_points")
        {
            for key in ["sweep.tau_min", "sweep.tau_max", "sweep.n_points"] {
                if !map.contains_key(key) {
                    return Err(ConfigError(format!(
                        "sweep range needs '{key}' alongside the other sweep.* keys"
                    )));
                }
            }
            let min = parse_f64("sweep.tau_min", &map["sweep.tau_min"])?;
            let max = parse_f64("sweep.tau_max", &map["sweep.tau_max"])?;
            let n: usize = map["sweep.n_points"].parse().map_err(|_| {
                ConfigError(format!(
                    "sweep.n_points '{}' is not an integer",
                    map["sweep.n_points"]
                ))
            })?;
            log_spacing = match map.get("sweep.spacing").map(String::as_str) {
                None | Some("linear") => false,
                Some("log") => true,
                Some(other) => {
                    return Err(ConfigError(format!(
                        "sweep.spacing must be linear or log, got '{other}'"
                    )))
                }
            };
            tau_values = Some(tau_grid(min, max, n, log_spacing)?);
        }
        if let Some(v) = map.get("sweep.out") {
            out = Some(PathBuf::from(v));
        }
        if let Some(v) = map.get("sweep.format") {
            format = v.parse()?;
        }
    }

    // flag overrides
    if let Some(tau) = overrides.tau {
        cycle.tau_total = tau;
    }
    if let Some(range) = &overrides.tau_range {
        let (values, log) = parse_tau_range(range)?;
        tau_values = Some(values);
        log_spacing = log;
    }
    if let Some(p) = &overrides.out {
        out = Some(p.clone());
    }
    if let Some(f) = overrides.format {
        format = f;
    }
    if overrides.constant_delta_b {
        constant_delta_b = true;
    }
    if let Some(s) = &overrides.step_policy {
        cycle.step_policy = parse_step_policy(s)?;
    }

    cycle
        .validate()
        .map_err(|e| ConfigError(e.to_string()))?;

    // default sweep grid reproduces the reference figure data
    let tau_values = tau_values.unwrap_or_else(|| tau_grid(0.5, 50.0, 100, false).unwrap());

    Ok(Settings {
        cycle,
        constant_delta_b,
        tau_values,
        log_spacing,
        out,
        format,
        workers: overrides.workers,
    })
}

/// Log the fully resolved configuration (defaults included) so any output
/// can be reproduced from the logs alone.
pub fn log_resolved(settings: &Settings) {
    let c = &settings.cycle;
    eprintln!("# resolved j = {}", c.j_coupling);
    eprintln!("# resolved b1 = {}", c.b1);
    eprintln!("# resolved b2_start = {}", c.b2_start);
    eprintln!("# resolved b3 = {}", c.b3);
    eprintln!("# resolved t_cold = {}", c.t_cold);
    eprintln!("# resolved t_hot = {}", c.t_hot);
    eprintln!("# resolved tau = {}", c.tau_total);
    eprintln!(
        "# resolved step_policy = {}",
        match c.step_policy {
            StepPolicy::Auto => "auto".to_string(),
            StepPolicy::Fixed(h) => format!("fixed:{h}"),
        }
    );
    eprintln!(
        "# resolved protocol = {}",
        if settings.constant_delta_b {
            "constant_delta_b"
        } else {
            "sine_pulse"
        }
    );
    eprintln!(
        "# resolved sweep.tau_values = {}",
        settings
            .tau_values
            .iter()
            .map(|t| t.to_string())
            .collect::<Vec<_>>()
            .join(",")
    );
    eprintln!(
        "# resolved sweep.spacing = {}",
        if settings.log_spacing { "log" } else { "linear" }
    );
    eprintln!(
        "# resolved sweep.format = {}",
        match settings.format {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    );
    if let Some(out) = &settings.out {
        eprintln!("# resolved sweep.out = {}", out.display());
    }
    if let Some(w) = settings.workers {
        eprintln!("# resolved workers = {w}");
    }
}
