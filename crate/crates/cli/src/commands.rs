use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use clap::Args;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use balescu::frequency::FrequencyTable;
use balescu::kernel::{jay, jay_oracle, jay_scaled, landau_kernel, weights_w, Kernel, JAY_MAX_X};
use balescu::linalg::{self, Mat3, Vec3};
use balescu::operator::{evolve_radial, EvolutionSummary, Preset, RadialOperator};
use balescu::output::{self, Cell};
use balescu::verify::{self, Campaign, VerifyConfig};
use balescu::Exec;

use crate::config::{Format, RunConfig};

/// Sample range of a table.
#[derive(Debug, Clone, Args)]
pub struct Range {
    #[arg(long, allow_hyphen_values = true)]
    pub from: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub to: Option<f64>,
    /// Number of samples, at least 2.
    #[arg(long)]
    pub points: Option<usize>,
}

impl Range {
    fn resolve(&self, from: f64, to: f64, points: usize) -> Result<Vec<f64>> {
        let (a, b, n) = (self.from.unwrap_or(from), self.to.unwrap_or(to), self.points.unwrap_or(points));
        if n < 2 {
            bail!("--points must be at least 2, got {n}");
        }
        if !(a.is_finite() && b.is_finite() && a < b) {
            bail!("bad range: need finite --from < --to, got [{a}, {b}]");
        }
        Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect())
    }
}

pub const DISPERSION_HEADER: [&str; 6] = ["x", "psi_r", "psi_i", "x2_psi_r", "eps_re_at_k1", "eps_im_at_k1"];
pub const JAY_HEADER: [&str; 5] = ["x", "J", "J_scaled", "J_oracle", "ratio_x3e"];
pub const FREQ_HEADER: [&str; 7] = ["r", "lambda1", "lambda2", "dlambda1", "dlambda2", "ratio_l1", "r_lambda2"];
pub const KERNEL_HEADER: [&str; 22] = [
    "v_x",
    "v_y",
    "v_z",
    "vs_x",
    "vs_y",
    "vs_z",
    "u_mag",
    "v_r_mag",
    "w1_scaled",
    "w2_scaled",
    "b_xx",
    "b_xy",
    "b_xz",
    "b_yy",
    "b_yz",
    "b_zz",
    "landau_xx",
    "landau_xy",
    "landau_xz",
    "landau_yy",
    "landau_yz",
    "landau_zz",
];
pub const EVOLVE_HEADER: [&str; 6] = ["t", "mass", "energy", "l2", "weighted", "sigma_norm"];

fn write_text(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn table_text(format: Format, header: &[&str], rows: &[Vec<Cell>]) -> Result<String> {
    Ok(match format {
        Format::Csv => {
            let mut buf = Vec::new();
            output::write_csv(&mut buf, header, rows)?;
            String::from_utf8(buf)?
        }
        Format::Json => output::table_json(header, rows)?,
    })
}

fn emit(cfg: &RunConfig, header: &[&str], rows: &[Vec<Cell>]) -> Result<()> {
    write_text(cfg.out.as_deref(), &table_text(cfg.format, header, rows)?)
}

pub fn dispersion_rows(cfg: &RunConfig, xs: &[f64]) -> Result<Vec<Vec<Cell>>> {
    let plasma = cfg.plasma()?;
    xs.iter()
        .map(|&x| {
            let p = plasma.psi(x);
            let e = plasma.epsilon(1.0, x)?;
            Ok(vec![x.into(), p.re.into(), p.im.into(), (x * x * p.re).into(), e.re.into(), e.im.into()])
        })
        .collect()
}

pub fn cmd_dispersion(cfg: &RunConfig, range: &Range) -> Result<()> {
    let xs = range.resolve(0.0, 10.0, 101)?;
    emit(cfg, &DISPERSION_HEADER, &dispersion_rows(cfg, &xs)?)
}

pub fn cmd_jay(cfg: &RunConfig, range: &Range) -> Result<()> {
    let xs = range.resolve(0.0, 12.0, 61)?;
    if xs.iter().any(|x| x.abs() > JAY_MAX_X) {
        bail!("J overflows beyond |x| = {JAY_MAX_X}; narrow --from/--to");
    }
    let plasma = cfg.plasma()?;
    let rows = xs
        .iter()
        .map(|&x| {
            let s = jay_scaled(&plasma, x);
            Ok(vec![
                x.into(),
                jay(&plasma, x)?.into(),
                s.into(),
                jay_oracle(&plasma, x)?.into(),
                (x.abs().powi(3) * s).into(),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    emit(cfg, &JAY_HEADER, &rows)
}

pub fn cmd_freq(cfg: &RunConfig, range: &Range) -> Result<()> {
    let rs = range.resolve(0.0, 30.0, 121)?;
    if rs[0] < 0.0 {
        bail!("bad range: r must be nonnegative");
    }
    let table = FrequencyTable::new(&cfg.plasma()?, Exec::Parallel)?;
    let rows = rs
        .iter()
        .map(|&r| {
            let p = table.lambda_pair(r)?;
            // Both eigenvalues are even in r, so the derivatives vanish at 0.
            let (d1, d2) = if r > 0.0 { table.lambda_derivatives(r)? } else { (0.0, 0.0) };
            let ratio = (1.0 + r.powi(3)) * p.lambda1 / (2.0 + r).ln();
            Ok(vec![
                r.into(),
                p.lambda1.into(),
                p.lambda2.into(),
                d1.into(),
                d2.into(),
                ratio.into(),
                (r * p.lambda2).into(),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    emit(cfg, &FREQ_HEADER, &rows)
}

#[derive(Debug, Clone, Args)]
pub struct KernelArgs {
    /// Random (v, v*) pairs after the fixed ±e₁ row.
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    /// Half-width of the sampling box.
    #[arg(long, default_value_t = 5.0)]
    pub radius: f64,
    /// Landau constant of the comparison kernel.
    #[arg(long, default_value_t = std::f64::consts::PI)]
    pub landau: f64,
}

fn upper(m: &Mat3) -> [f64; 6] {
    [m[0][0], m[0][1], m[0][2], m[1][1], m[1][2], m[2][2]]
}

pub fn cmd_kernel(cfg: &RunConfig, args: &KernelArgs) -> Result<()> {
    if !(args.radius > 0.0 && args.radius.is_finite()) {
        bail!("--radius must be positive, got {}", args.radius);
    }
    if !(args.landau > 0.0 && args.landau.is_finite()) {
        bail!("--landau must be positive, got {}", args.landau);
    }
    let plasma = cfg.plasma()?;
    let kern = Kernel::new(&plasma, 2.0 * args.radius * 3f64.sqrt(), Exec::Parallel);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut pairs: Vec<(Vec3, Vec3)> = vec![([1.0, 0.0, 0.0], [-1.0, 0.0, 0.0])];
    while pairs.len() < args.samples + 1 {
        let v: Vec3 = std::array::from_fn(|_| rng.gen_range(-args.radius..args.radius));
        let vs: Vec3 = std::array::from_fn(|_| rng.gen_range(-args.radius..args.radius));
        if linalg::norm(&linalg::sub(&v, &vs)) > 1e-6 {
            pairs.push((v, vs));
        }
    }
    let rows = pairs
        .iter()
        .map(|(v, vs)| {
            let km = kern.kernel_b(v, vs)?;
            let w = weights_w(&plasma, km.frame.v_r_mag)?;
            let l = landau_kernel(v, vs, args.landau)?;
            let mut row: Vec<Cell> = v.iter().chain(vs).map(|&x| x.into()).collect();
            row.extend([km.frame.u_mag, km.frame.v_r_mag, w.w1_scaled, w.w2_scaled].map(Cell::from));
            row.extend(upper(&km.b).map(Cell::from));
            row.extend(upper(&l).map(Cell::from));
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    emit(cfg, &KERNEL_HEADER, &rows)
}

#[derive(Debug, Clone, Args)]
pub struct EvolveArgs {
    /// gaussian_bump, shell or hermite_mode.
    #[arg(long, default_value = "gaussian_bump")]
    pub preset: String,
    /// Summary JSON path; defaults to <out>.summary.json, or stderr without --out.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
pub struct EvolveSummary {
    pub preset: String,
    pub theta: f64,
    pub theta_target: f64,
    pub fitted_p: Option<f64>,
    pub fitted_lambda: Option<f64>,
    pub fit_rss: Option<f64>,
    pub mass_drift: f64,
    pub energy_drift: f64,
    pub max_drift: f64,
    pub monotone: bool,
    pub monotone_l2: bool,
    pub monotone_weighted: bool,
    pub dt: f64,
    pub steps: usize,
    pub t_end: f64,
    pub k0: f64,
    pub ell: f64,
    pub q: f64,
    pub m: usize,
    pub r_max: f64,
    pub metadata: Metadata,
}

#[derive(Debug, Serialize)]
pub struct Metadata {
    pub generated_unix_s: u64,
    pub version: &'static str,
}

pub fn evolve_summary(cfg: &RunConfig, preset: Preset, s: &EvolutionSummary) -> EvolveSummary {
    EvolveSummary {
        preset: preset.name().to_string(),
        theta: cfg.weight.theta,
        theta_target: s.theta_target,
        fitted_p: s.fit.map(|f| f.p),
        fitted_lambda: s.fit.map(|f| f.lambda),
        fit_rss: s.fit.map(|f| f.rss),
        mass_drift: s.mass_drift,
        energy_drift: s.energy_drift,
        max_drift: s.mass_drift.max(s.energy_drift),
        monotone: s.monotone_l2 && s.monotone_weighted,
        monotone_l2: s.monotone_l2,
        monotone_weighted: s.monotone_weighted,
        dt: s.dt,
        steps: s.steps,
        t_end: cfg.t_end,
        k0: cfg.k0,
        ell: cfg.weight.ell,
        q: cfg.weight.q,
        m: cfg.m,
        r_max: cfg.r_max,
        metadata: Metadata {
            generated_unix_s: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            version: env!("CARGO_PKG_VERSION"),
        },
    }
}

fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.{suffix}"))
}

pub fn cmd_evolve(cfg: &RunConfig, args: &EvolveArgs) -> Result<()> {
    let preset: Preset = args.preset.parse()?;
    let op = RadialOperator::new(&cfg.plasma()?, &cfg.operator(), Exec::Parallel)?;
    let dt = cfg.dt.unwrap_or_else(|| op.max_stable_dt());
    let f0 = preset.initial(&op);
    let s = evolve_radial(&op, &f0, &cfg.weight, dt, cfg.t_end)?;
    let rows: Vec<Vec<Cell>> = s
        .records
        .iter()
        .map(|r| [r.t, r.mass, r.energy, r.l2, r.weighted, r.sigma_norm].map(Cell::from).to_vec())
        .collect();
    emit(cfg, &EVOLVE_HEADER, &rows)?;
    let summary = output::to_json(&evolve_summary(cfg, preset, &s))?;
    let path = args.summary.clone().or_else(|| cfg.out.as_deref().map(|o| sibling(o, "summary.json")));
    match path {
        Some(p) => fs::write(&p, summary).with_context(|| format!("writing {}", p.display()))?,
        None => eprint!("{summary}"),
    }
    Ok(())
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Override a manifest tolerance, NAME=VALUE (repeatable).
    #[arg(long = "tol", value_name = "NAME=VALUE")]
    pub tol: Vec<String>,
    /// Run one campaign: dispersion, kernel, frequency or operator.
    #[arg(long)]
    pub group: Option<String>,
    /// Number of coercivity probes.
    #[arg(long, default_value_t = 50)]
    pub probes: usize,
}

pub fn verify_config(cfg: &RunConfig, args: &VerifyArgs) -> Result<VerifyConfig> {
    let mut v = VerifyConfig {
        plasma: cfg.plasma()?,
        operator: cfg.operator(),
        seed: cfg.seed,
        probes: args.probes,
        t_end: cfg.t_end,
        tolerance_overrides: cfg.tolerances.clone(),
        exec: Exec::Parallel,
    };
    for item in &args.tol {
        let Some((name, value)) = item.split_once('=') else {
            bail!("--tol expects NAME=VALUE, got {item:?}");
        };
        let value: f64 = value.trim().parse().with_context(|| format!("--tol {item}"))?;
        v.tolerance_overrides.insert(name.trim().to_string(), value);
    }
    v.validate()?;
    Ok(v)
}

/// Runs the campaign, writes the report, returns whether every check passed.
pub fn cmd_verify(cfg: &RunConfig, args: &VerifyArgs) -> Result<bool> {
    let vcfg = verify_config(cfg, args)?;
    let campaign: Campaign = match args.group.as_deref() {
        None => verify::run_all(&vcfg)?,
        Some("dispersion") => verify::check_dispersion(&vcfg)?,
        Some("kernel") => verify::check_kernel(&vcfg)?,
        Some("frequency") => verify::check_frequency(&vcfg)?,
        Some("operator") => verify::check_operator(&vcfg)?,
        Some(other) => bail!("unknown group {other:?}; use dispersion, kernel, frequency or operator"),
    };
    let text = match cfg.format {
        Format::Csv => verify::report_csv(&campaign.checks)?,
        Format::Json => verify::report_json(&campaign.checks)?,
    };
    write_text(cfg.out.as_deref(), &text)?;
    if let Some(out) = &cfg.out {
        let path = sibling(out, "observations.json");
        fs::write(&path, output::to_json(&campaign.observations)?)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    for c in &campaign.checks {
        eprintln!(
            "{} {:<38} achieved {:.6e}  target {:.6e}  tol {:.1e}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.achieved,
            c.target,
            c.tolerance
        );
    }
    Ok(campaign.all_pass())
}

pub fn cmd_manifest(cfg: &RunConfig) -> Result<()> {
    write_text(cfg.out.as_deref(), &verify::manifest_json(cfg.k0)?)
}
