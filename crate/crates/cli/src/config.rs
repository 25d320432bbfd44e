//! Run configuration: flags over a key=value file over defaults.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, ValueEnum};

use balescu::operator::{OperatorConfig, WeightParams};
use balescu::PlasmaConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => bail!("format must be csv or json, got {s:?}"),
        }
    }
}

/// Flags shared by every subcommand. All optional so that unset flags fall
/// through to the config file and then to the defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Wavenumber cut-off k₀.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub k0: Option<f64>,
    /// Polynomial weight exponent ℓ.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub ell: Option<f64>,
    /// Exponential weight power ϑ ∈ [0, 2].
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    /// Exponential weight rate q > 0 (q < 1 when ϑ = 2).
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub q: Option<f64>,
    /// Nodes per axis of the 3-D grid (odd).
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Radial cells.
    #[arg(long, global = true)]
    pub m: Option<usize>,
    /// Velocity cut-off r_max.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub rmax: Option<f64>,
    /// Time step; defaults to the largest stable step.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub dt: Option<f64>,
    #[arg(long = "t-end", global = true, allow_hyphen_values = true)]
    pub t_end: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Flat key=value file; flags take precedence over it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub k0: f64,
    pub weight: WeightParams,
    pub n: usize,
    pub m: usize,
    pub r_max: f64,
    pub dt: Option<f64>,
    pub t_end: f64,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
    /// `tol.NAME = value` entries from the config file.
    pub tolerances: BTreeMap<String, f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let op = OperatorConfig::default();
        Self {
            k0: 1.0,
            weight: WeightParams::new(0.0, 1.0, 0.5).expect("default weight"),
            n: op.n,
            m: op.m,
            r_max: op.r_max,
            dt: None,
            t_end: 5.0,
            seed: 7,
            out: None,
            format: Format::Csv,
            tolerances: BTreeMap::new(),
        }
    }
}

/// Parse `key = value` lines. Blank lines and `#` comments are skipped;
/// `-` and `_` are interchangeable in keys.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| anyhow!("line {}: expected key=value, got {raw:?}", i + 1))?;
        let key = k.trim().replace('-', "_");
        if key.is_empty() {
            bail!("line {}: empty key", i + 1);
        }
        if map.insert(key.clone(), v.trim().to_string()).is_some() {
            bail!("line {}: duplicate key {key}", i + 1);
        }
    }
    Ok(map)
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e| anyhow!("config key {key}: cannot parse {value:?}: {e}"))
}

impl RunConfig {
    pub fn resolve(args: &CommonArgs) -> Result<Self> {
        let file = match &args.config {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                parse_config_text(&text).with_context(|| format!("in {}", path.display()))?
            }
            None => BTreeMap::new(),
        };
        Self::merge(args, &file)
    }

    pub fn merge(args: &CommonArgs, file: &BTreeMap<String, String>) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let (mut ell, mut theta, mut q) = (cfg.weight.ell, cfg.weight.theta, cfg.weight.q);
        for (key, value) in file {
            match key.as_str() {
                "k0" => cfg.k0 = parse(key, value)?,
                "ell" => ell = parse(key, value)?,
                "theta" => theta = parse(key, value)?,
                "q" => q = parse(key, value)?,
                "n" => cfg.n = parse(key, value)?,
                "m" => cfg.m = parse(key, value)?,
                "rmax" | "r_max" => cfg.r_max = parse(key, value)?,
                "dt" => cfg.dt = Some(parse(key, value)?),
                "t_end" => cfg.t_end = parse(key, value)?,
                "seed" => cfg.seed = parse(key, value)?,
                "out" => cfg.out = Some(PathBuf::from(value)),
                "format" => cfg.format = parse(key, value)?,
                k if k.starts_with("tol.") => {
                    cfg.tolerances.insert(k["tol.".len()..].to_string(), parse(key, value)?);
                }
                _ => bail!("unknown config key {key:?}"),
            }
        }
        if let Some(v) = args.k0 {
            cfg.k0 = v;
        }
        ell = args.ell.unwrap_or(ell);
        theta = args.theta.unwrap_or(theta);
        q = args.q.unwrap_or(q);
        if let Some(v) = args.n {
            cfg.n = v;
        }
        if let Some(v) = args.m {
            cfg.m = v;
        }
        if let Some(v) = args.rmax {
            cfg.r_max = v;
        }
        if args.dt.is_some() {
            cfg.dt = args.dt;
        }
        if let Some(v) = args.t_end {
            cfg.t_end = v;
        }
        if let Some(v) = args.seed {
            cfg.seed = v;
        }
        if args.out.is_some() {
            cfg.out = args.out.clone();
        }
        if let Some(v) = args.format {
            cfg.format = v;
        }
        cfg.weight = WeightParams::new(ell, theta, q)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.plasma()?;
        self.operator().validate()?;
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                bail!("--dt must be positive, got {dt}");
            }
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            bail!("--t-end must be nonnegative, got {}", self.t_end);
        }
        if let Some(out) = &self.out {
            check_writable(out)?;
        }
        Ok(())
    }

    pub fn plasma(&self) -> Result<PlasmaConfig> {
        Ok(PlasmaConfig::with_k0(self.k0)?)
    }

    pub fn operator(&self) -> OperatorConfig {
        OperatorConfig { r_max: self.r_max, m: self.m, n: self.n, ..OperatorConfig::default() }
    }
}

fn check_writable(path: &Path) -> Result<()> {
    if path.is_dir() {
        bail!("output path {} is a directory", path.display());
    }
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    if !parent.is_dir() {
        bail!("output directory {} does not exist", parent.display());
    }
    let meta = fs::metadata(parent)?;
    if meta.permissions().readonly() {
        bail!("output directory {} is not writable", parent.display());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_flags_over_file_over_defaults() {
        let file = parse_config_text("# comment\nk0 = 2\ntheta=2\nq = 0.5\nt-end = 1.5\nseed=3\n").unwrap();
        let args = CommonArgs { k0: Some(3.0), ..CommonArgs::default() };
        let cfg = RunConfig::merge(&args, &file).unwrap();
        assert_eq!(cfg.k0, 3.0);
        assert_eq!(cfg.weight.theta, 2.0);
        assert_eq!(cfg.t_end, 1.5);
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.m, OperatorConfig::default().m);
    }

    #[test]
    fn weight_constraints_checked_at_parse_time() {
        let file = parse_config_text("theta = 2\nq = 1.5").unwrap();
        assert!(RunConfig::merge(&CommonArgs::default(), &file).is_err());
        let args = CommonArgs { theta: Some(2.5), ..CommonArgs::default() };
        assert!(RunConfig::merge(&args, &BTreeMap::new()).is_err());
    }

    #[test]
    fn bad_lines_rejected() {
        assert!(parse_config_text("k0").is_err());
        assert!(parse_config_text("k0=1\nk0=2").is_err());
        let file = parse_config_text("colour = red").unwrap();
        assert!(RunConfig::merge(&CommonArgs::default(), &file).is_err());
        let file = parse_config_text("tol.kernel.jay_zero = 1e-3").unwrap();
        let cfg = RunConfig::merge(&CommonArgs::default(), &file).unwrap();
        assert_eq!(cfg.tolerances["kernel.jay_zero"], 1e-3);
    }
}
