//! Run configuration: command-line flags over a `key = value` file over
//! built-in defaults.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use kgml::FINE_STRUCTURE;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    GnuplotDat,
}

/// Inclusive range of principal quantum numbers, written `a..b` or `a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NRange {
    pub start: u32,
    pub end: u32,
}

impl FromStr for NRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parse = |t: &str| {
            t.trim()
                .parse::<u32>()
                .map_err(|_| format!("'{t}' is not a nonnegative integer"))
        };
        let (start, end) = match s.split_once("..") {
            Some((a, b)) => (parse(a)?, parse(b.strip_prefix('=').unwrap_or(b))?),
            None => {
                let n = parse(s)?;
                (n, n)
            }
        };
        if start > end {
            return Err(format!("empty range {start}..{end}"));
        }
        Ok(Self { start, end })
    }
}

impl fmt::Display for NRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

/// Fit window `lo,hi` (or `lo..hi`) in `u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window(pub f64, pub f64);

impl FromStr for Window {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s
            .split_once(',')
            .or_else(|| s.split_once(".."))
            .ok_or_else(|| format!("window '{s}' must be written lo,hi"))?;
        let parse = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| format!("'{t}' is not a number"))
        };
        Ok(Window(parse(a)?, parse(b)?))
    }
}

/// Every setting that can come from a flag or the config file; `None` means
/// "not given at this level".
#[derive(Debug, Clone, Default, Args)]
pub struct Settings {
    /// Nuclear charge number
    #[arg(long = "Z", global = true)]
    pub z: Option<u32>,
    /// Fine-structure constant
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Coupling g = Z·alpha, overriding Z
    #[arg(long, global = true)]
    pub g: Option<f64>,
    /// Energy E/(mc²)
    #[arg(long, global = true)]
    pub eta: Option<f64>,
    /// Quantum numbers, `a..b` inclusive or a single `n`
    #[arg(long, global = true)]
    pub n: Option<NRange>,
    /// Deformation θ = β(mc)²
    #[arg(long, global = true)]
    pub theta: Option<f64>,
    /// Deformation θ′ = β′(mc)²
    #[arg(long = "theta-prime", global = true)]
    pub theta_prime: Option<f64>,
    /// Model equation (or parameter block for `params`)
    #[arg(long, global = true)]
    pub model: Option<String>,
    /// Relative tolerance of the integrator
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Series truncation order
    #[arg(long, global = true)]
    pub order: Option<usize>,
    /// Fit window in u, `lo,hi`
    #[arg(long, global = true)]
    pub window: Option<Window>,
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,
    /// Output file (standard output when absent)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Lower end of the momentum grid
    #[arg(long = "u-min", global = true)]
    pub u_min: Option<f64>,
    /// Upper end of the momentum grid
    #[arg(long = "u-max", global = true)]
    pub u_max: Option<f64>,
    /// Number of grid points
    #[arg(long, global = true)]
    pub points: Option<usize>,
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, CliError>
where
    T::Err: fmt::Display,
{
    value
        .parse()
        .map_err(|e| CliError::Usage(format!("config key '{key}': {e}")))
}

impl Settings {
    /// Parses a flat `key = value` file; `#` starts a comment.
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let mut s = Settings::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!(
                    "{}:{}: expected key = value",
                    path.display(),
                    lineno + 1
                ))
            })?;
            let (key, value) = (key.trim(), value.trim());
            match key.replace('_', "-").as_str() {
                "Z" | "z" => s.z = Some(parse(key, value)?),
                "alpha" => s.alpha = Some(parse(key, value)?),
                "g" => s.g = Some(parse(key, value)?),
                "eta" => s.eta = Some(parse(key, value)?),
                "n" => s.n = Some(parse(key, value)?),
                "theta" => s.theta = Some(parse(key, value)?),
                "theta-prime" => s.theta_prime = Some(parse(key, value)?),
                "model" => s.model = Some(value.to_string()),
                "tol" => s.tol = Some(parse(key, value)?),
                "order" => s.order = Some(parse(key, value)?),
                "window" => s.window = Some(parse(key, value)?),
                "format" => {
                    s.format = Some(
                        Format::from_str(value, false)
                            .map_err(|e| CliError::Usage(format!("config key 'format': {e}")))?,
                    )
                }
                "out" => s.out = Some(PathBuf::from(value)),
                "u-min" => s.u_min = Some(parse(key, value)?),
                "u-max" => s.u_max = Some(parse(key, value)?),
                "points" => s.points = Some(parse(key, value)?),
                _ => {
                    return Err(CliError::Usage(format!(
                        "{}:{}: unknown key '{key}'",
                        path.display(),
                        lineno + 1
                    )))
                }
            }
        }
        Ok(s)
    }

    /// Fills every unset field from `lower`.
    pub fn or(self, lower: Settings) -> Settings {
        Settings {
            z: self.z.or(lower.z),
            alpha: self.alpha.or(lower.alpha),
            g: self.g.or(lower.g),
            eta: self.eta.or(lower.eta),
            n: self.n.or(lower.n),
            theta: self.theta.or(lower.theta),
            theta_prime: self.theta_prime.or(lower.theta_prime),
            model: self.model.or(lower.model),
            tol: self.tol.or(lower.tol),
            order: self.order.or(lower.order),
            window: self.window.or(lower.window),
            format: self.format.or(lower.format),
            out: self.out.or(lower.out),
            u_min: self.u_min.or(lower.u_min),
            u_max: self.u_max.or(lower.u_max),
            points: self.points.or(lower.points),
        }
    }
}

/// Resolved settings with defaults applied and knobs validated.
#[derive(Debug, Clone)]
pub struct RunConfig {
    /// `None` when the coupling was given directly.
    pub z: Option<u32>,
    pub alpha: f64,
    pub g: f64,
    pub eta: Option<f64>,
    pub n: NRange,
    pub theta: f64,
    pub theta_prime: Option<f64>,
    pub model: Option<String>,
    pub tol: f64,
    pub order: usize,
    pub window: (f64, f64),
    pub format: Format,
    pub out: Option<PathBuf>,
    pub u_min: f64,
    pub u_max: f64,
    pub points: usize,
}

pub const DEFAULT_THETA: f64 = 0.05;
pub const DEFAULT_ETA: f64 = 0.5;

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Usage(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

impl RunConfig {
    pub fn resolve(s: Settings) -> Result<Self, CliError> {
        let alpha = positive("alpha", s.alpha.unwrap_or(FINE_STRUCTURE))?;
        let (z, g) = match s.g {
            Some(g) if g >= 0.0 && g.is_finite() => (None, g),
            Some(g) => return Err(CliError::Usage(format!("g must be nonnegative, got {g}"))),
            None => {
                let z = s.z.unwrap_or(1);
                (Some(z), z as f64 * alpha)
            }
        };
        let theta = s.theta.unwrap_or(DEFAULT_THETA);
        for (name, v) in [("theta", Some(theta)), ("theta-prime", s.theta_prime)] {
            if let Some(v) = v {
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(CliError::Usage(format!(
                        "{name} must be nonnegative, got {v}"
                    )));
                }
            }
        }
        let window = s.window.unwrap_or(Window(
            kgml::asymptotics::DEFAULT_WINDOW.0,
            kgml::asymptotics::DEFAULT_WINDOW.1,
        ));
        positive("window lower end", window.0)?;
        if !(window.1 > window.0 && window.1.is_finite()) {
            return Err(CliError::Usage(format!(
                "empty fit window {},{}",
                window.0, window.1
            )));
        }
        let u_min = positive("u-min", s.u_min.unwrap_or(0.01))?;
        let u_max = positive("u-max", s.u_max.unwrap_or(100.0))?;
        if u_max <= u_min {
            return Err(CliError::Usage(format!(
                "empty grid: u-max {u_max} <= u-min {u_min}"
            )));
        }
        let points = s.points.unwrap_or(200);
        if points < 2 {
            return Err(CliError::Usage(format!(
                "a grid needs at least 2 points, got {points}"
            )));
        }
        let order = s.order.unwrap_or(kgml::fuchsian::DEFAULT_ORDER);
        if order == 0 {
            return Err(CliError::Usage("order must be positive".into()));
        }
        Ok(Self {
            z,
            alpha,
            g,
            eta: s.eta,
            n: s.n.unwrap_or(NRange { start: 0, end: 5 }),
            theta,
            theta_prime: s.theta_prime,
            model: s.model,
            tol: positive("tol", s.tol.unwrap_or(kgml::asymptotics::DEFAULT_TOL))?,
            order,
            window: (window.0, window.1),
            format: s.format.unwrap_or(Format::Csv),
            out: s.out,
            u_min,
            u_max,
            points,
        })
    }

    pub fn theta_prime(&self) -> f64 {
        self.theta_prime.unwrap_or(DEFAULT_THETA)
    }

    /// Header line describing the coupling.
    pub fn coupling_note(&self) -> String {
        match self.z {
            Some(z) => format!("g = Z*alpha = {z}*{:.16e} = {:.16e}", self.alpha, self.g),
            None => format!("g = {:.16e}", self.g),
        }
    }
}
