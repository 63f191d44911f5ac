//! Settings from defaults, an optional `key = value` file and flags.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Args;
use rcx_core::coarse::{CoarseConfig, Mode};
use rcx_core::{BoundaryCondition, Complex64, ModelParams, TorusGeometry};
use serde::Serialize;

use crate::CliError;

/// Flags shared by every subcommand. Anything left unset falls back to the
/// config file, then to the built-in default.
#[derive(Debug, Default, Clone, Args)]
pub struct Overrides {
    /// Flat `key = value` file; `[section]` headers prefix keys with `section.`.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub dim: Option<usize>,
    #[arg(long, global = true)]
    pub half_side: Option<usize>,
    /// Coarse scale `L`.
    #[arg(long, global = true)]
    pub coarse_scale: Option<usize>,
    /// `K = alpha L`; also the annulus factor `a` of the probes.
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    #[arg(long, global = true)]
    pub layers: Option<usize>,
    /// `open` or `close`.
    #[arg(long, global = true)]
    pub mode: Option<String>,
    /// Large clusters have diameter at least `ceil(L / divisor)`.
    #[arg(long, global = true)]
    pub divisor: Option<f64>,
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    #[arg(long, global = true)]
    pub q: Option<f64>,
    /// Grid: `v`, `a,b,c` or `start:stop:count`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub z_re: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub z_im: Option<String>,
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub max_order: Option<usize>,
    /// Largest polymer, in coarse sites.
    #[arg(long, global = true)]
    pub max_size: Option<usize>,
    /// Edge cap for exact enumeration.
    #[arg(long, global = true)]
    pub cap: Option<usize>,
    /// `free`, `wired` or `periodic`.
    #[arg(long, global = true)]
    pub boundary: Option<String>,
    /// Backward time for `glauber-run`.
    #[arg(long, global = true)]
    pub time: Option<f64>,
    /// Observable edges for `correlate`, comma separated.
    #[arg(long, global = true)]
    pub edges: Option<String>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

/// Fully resolved settings; echoed into every manifest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Settings {
    pub dim: usize,
    pub half_side: usize,
    pub coarse_scale: usize,
    pub alpha: f64,
    pub layers: usize,
    pub mode: Mode,
    pub divisor: f64,
    pub beta: f64,
    pub q: f64,
    pub z_re: Vec<f64>,
    pub z_im: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub max_order: usize,
    pub max_size: usize,
    pub cap: usize,
    pub boundary: String,
    pub time: f64,
    pub edges: Option<Vec<usize>>,
    #[serde(skip)]
    pub out: PathBuf,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            dim: 1,
            half_side: 1,
            coarse_scale: 1,
            alpha: 4.0,
            layers: 4,
            mode: Mode::Close,
            divisor: 100.0,
            beta: std::f64::consts::LN_2,
            q: 2.0,
            z_re: vec![0.0],
            z_im: vec![0.0],
            trials: 1000,
            seed: 0,
            max_order: 6,
            max_size: 3,
            cap: 24,
            boundary: "periodic".into(),
            time: 10.0,
            edges: None,
            out: PathBuf::from("rcx-out"),
        }
    }
}

fn config_error(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// `key = value` pairs; blank lines and `#` comments are skipped.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut section = String::new();
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            section = name.trim().to_string();
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| config_error(format!("line {}: expected key = value", n + 1)))?;
        let key = key.trim().replace('-', "_");
        let key = if section.is_empty() { key } else { format!("{section}.{key}") };
        if out.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(config_error(format!("line {}: duplicate key {key}", n + 1)));
        }
    }
    Ok(out)
}

/// Section names are accepted but do not change the meaning of a key.
fn bare(key: &str) -> &str {
    key.rsplit('.').next().unwrap_or(key)
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| config_error(format!("{key}: cannot parse {value:?}")))
}

pub fn parse_grid(key: &str, text: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    let grid = match parts[..] {
        [single] => single
            .split(',')
            .map(|v| parse::<f64>(key, v.trim()))
            .collect::<Result<Vec<_>, _>>()?,
        [start, stop, count] => {
            let (a, b): (f64, f64) = (parse(key, start)?, parse(key, stop)?);
            let n: usize = parse(key, count)?;
            match n {
                0 => return Err(config_error(format!("{key}: empty grid"))),
                1 => vec![a],
                _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
            }
        }
        _ => return Err(config_error(format!("{key}: bad grid {text:?}"))),
    };
    if grid.iter().any(|v| !v.is_finite()) {
        return Err(config_error(format!("{key}: grid values must be finite")));
    }
    Ok(grid)
}

fn parse_edges(key: &str, text: &str) -> Result<Vec<usize>, CliError> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',').map(|v| parse(key, v.trim())).collect()
}

impl Settings {
    fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match bare(key) {
            "dim" => self.dim = parse(key, value)?,
            "half_side" => self.half_side = parse(key, value)?,
            "coarse_scale" => self.coarse_scale = parse(key, value)?,
            "alpha" => self.alpha = parse(key, value)?,
            "layers" => self.layers = parse(key, value)?,
            "mode" => self.mode = value.parse().map_err(|e: rcx_core::Error| config_error(e.to_string()))?,
            "divisor" => self.divisor = parse(key, value)?,
            "beta" => self.beta = parse(key, value)?,
            "q" => self.q = parse(key, value)?,
            "z_re" => self.z_re = parse_grid(key, value)?,
            "z_im" => self.z_im = parse_grid(key, value)?,
            "trials" => self.trials = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "max_order" => self.max_order = parse(key, value)?,
            "max_size" => self.max_size = parse(key, value)?,
            "cap" => self.cap = parse(key, value)?,
            "boundary" => self.boundary = value.to_string(),
            "time" => self.time = parse(key, value)?,
            "edges" => self.edges = Some(parse_edges(key, value)?),
            "out" => self.out = PathBuf::from(value),
            _ => return Err(config_error(format!("unknown key {key}"))),
        }
        Ok(())
    }

    pub fn resolve(o: &Overrides) -> Result<Self, CliError> {
        let mut s = Settings::default();
        if let Some(path) = &o.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| config_error(format!("{}: {e}", path.display())))?;
            for (k, v) in parse_config(&text)? {
                s.set(&k, &v)?;
            }
        }
        let flags: [(&str, Option<String>); 20] = [
            ("dim", o.dim.map(|v| v.to_string())),
            ("half_side", o.half_side.map(|v| v.to_string())),
            ("coarse_scale", o.coarse_scale.map(|v| v.to_string())),
            ("alpha", o.alpha.map(|v| v.to_string())),
            ("layers", o.layers.map(|v| v.to_string())),
            ("mode", o.mode.clone()),
            ("divisor", o.divisor.map(|v| v.to_string())),
            ("beta", o.beta.map(|v| v.to_string())),
            ("q", o.q.map(|v| v.to_string())),
            ("z_re", o.z_re.clone()),
            ("z_im", o.z_im.clone()),
            ("trials", o.trials.map(|v| v.to_string())),
            ("seed", o.seed.map(|v| v.to_string())),
            ("max_order", o.max_order.map(|v| v.to_string())),
            ("max_size", o.max_size.map(|v| v.to_string())),
            ("cap", o.cap.map(|v| v.to_string())),
            ("boundary", o.boundary.clone()),
            ("time", o.time.map(|v| v.to_string())),
            ("edges", o.edges.clone()),
            ("out", o.out.as_ref().map(|p| p.display().to_string())),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                s.set(k, &v)?;
            }
        }
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.dim == 0 || self.half_side == 0 {
            return Err(config_error("dim and half_side must be at least 1"));
        }
        if self.trials == 0 {
            return Err(config_error("trials must be at least 1"));
        }
        if !(self.time >= 0.0) || !self.time.is_finite() {
            return Err(config_error("time must be finite and non-negative"));
        }
        self.params().validate().map_err(|e| config_error(e.to_string()))?;
        self.coarse().validate().map_err(|e| config_error(e.to_string()))?;
        self.bc()?;
        Ok(())
    }

    pub fn torus(&self) -> Result<TorusGeometry, CliError> {
        TorusGeometry::new(self.dim, self.half_side).map_err(CliError::from)
    }

    pub fn params(&self) -> ModelParams {
        ModelParams::new(self.q, self.beta)
    }

    pub fn coarse(&self) -> CoarseConfig {
        CoarseConfig::new(self.coarse_scale, self.alpha, self.layers, self.mode).with_divisor(self.divisor)
    }

    pub fn bc(&self) -> Result<BoundaryCondition, CliError> {
        match self.boundary.as_str() {
            "free" => Ok(BoundaryCondition::Free),
            "wired" => Ok(BoundaryCondition::Wired),
            "periodic" => Ok(BoundaryCondition::Periodic),
            other => Err(config_error(format!("boundary must be free, wired or periodic, got {other}"))),
        }
    }

    /// Cartesian product of the two grids, real part outermost.
    pub fn z_grid(&self) -> Vec<Complex64> {
        self.z_re
            .iter()
            .flat_map(|&re| self.z_im.iter().map(move |&im| Complex64::new(re, im)))
            .collect()
    }
}
