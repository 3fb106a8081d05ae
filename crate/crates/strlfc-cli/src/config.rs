//! Effective run configuration: command-line flags merged over an optional
//! TOML config file, with flags taking precedence and strict validation.

use crate::CliError;
use serde::Deserialize;
use std::path::PathBuf;

/// Flags shared by every subcommand. Each key can also come from `--config`.
#[derive(clap::Args, Clone, Debug, Default)]
pub struct CommonArgs {
    /// Message length in bits.
    #[arg(long)]
    pub k: Option<usize>,
    /// Inclusive message-length range A:B.
    #[arg(long, value_name = "A:B")]
    pub k_range: Option<String>,
    /// Erasure probability in [0, 1).
    #[arg(long)]
    pub p: Option<f64>,
    /// Erasure-probability grid A:B:STEP, ends inclusive.
    #[arg(long, value_name = "A:B:STEP")]
    pub p_grid: Option<String>,
    /// Comma-separated counts of decoding times, e.g. 1,2,4,8,16.
    #[arg(long, value_name = "M1,M2,..")]
    pub m_list: Option<String>,
    /// Target error probability in (0, 1).
    #[arg(long)]
    pub delta: Option<f64>,
    /// Monte Carlo trial count.
    #[arg(long)]
    pub trials: Option<u64>,
    /// Master seed for every random stream.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_parser = ["csv", "json", "svg"])]
    pub format: Option<String>,
    /// Transmission scheme (simulate only).
    #[arg(long, value_parser = ["st-fountain", "fountain"])]
    pub scheme: Option<String>,
    /// Decoding schedule (simulate only): "unbounded" or times T1,T2,...
    #[arg(long)]
    pub schedule: Option<String>,
    /// Message policy (simulate only).
    #[arg(long, value_parser = ["zero", "random"])]
    pub message_policy: Option<String>,
    /// TOML file supplying defaults for any key above; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// The config-file schema; unknown keys are rejected.
#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    k: Option<usize>,
    k_range: Option<String>,
    p: Option<f64>,
    p_grid: Option<String>,
    m_list: Option<String>,
    delta: Option<f64>,
    trials: Option<u64>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    format: Option<String>,
    scheme: Option<String>,
    schedule: Option<String>,
    message_policy: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
    Svg,
}

/// Flags merged over the config file; consumers apply per-command defaults.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub k: Option<usize>,
    pub k_range: Option<(usize, usize)>,
    pub p: Option<f64>,
    pub p_grid: Option<Vec<f64>>,
    pub m_list: Option<Vec<usize>>,
    pub delta: Option<f64>,
    pub trials: Option<u64>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    pub scheme: Option<String>,
    pub schedule: Option<String>,
    pub message_policy: Option<String>,
}

impl RunConfig {
    pub fn resolve(args: &CommonArgs) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    CliError::Validation(format!("cannot read config {}: {e}", path.display()))
                })?;
                toml::from_str::<FileConfig>(&text)
                    .map_err(|e| CliError::Validation(format!("invalid config file: {e}")))?
            }
            None => FileConfig::default(),
        };
        let k = args.k.or(file.k);
        if let Some(k) = k {
            if k == 0 {
                return Err(CliError::Validation("k must be at least 1".into()));
            }
        }
        let k_range = args
            .k_range
            .clone()
            .or(file.k_range)
            .map(|s| parse_k_range(&s))
            .transpose()?;
        let p = args.p.or(file.p);
        if let Some(p) = p {
            validate_erasure_prob(p)?;
        }
        let p_grid = args
            .p_grid
            .clone()
            .or(file.p_grid)
            .map(|s| parse_p_grid(&s))
            .transpose()?;
        let m_list = args
            .m_list
            .clone()
            .or(file.m_list)
            .map(|s| parse_m_list(&s))
            .transpose()?;
        let delta = args.delta.or(file.delta);
        if let Some(d) = delta {
            if !(d > 0.0 && d < 1.0) {
                return Err(CliError::Validation(format!(
                    "delta {d} must lie strictly between 0 and 1"
                )));
            }
        }
        let trials = args.trials.or(file.trials);
        if let Some(t) = trials {
            if t == 0 {
                return Err(CliError::Validation("trials must be at least 1".into()));
            }
        }
        let format = match args
            .format
            .clone()
            .or(file.format)
            .unwrap_or_else(|| "csv".into())
            .as_str()
        {
            "csv" => OutputFormat::Csv,
            "json" => OutputFormat::Json,
            "svg" => OutputFormat::Svg,
            other => {
                return Err(CliError::Validation(format!(
                    "unknown format {other:?}; expected csv, json, or svg"
                )))
            }
        };
        let scheme = args.scheme.clone().or(file.scheme);
        if let Some(s) = &scheme {
            if s != "st-fountain" && s != "fountain" {
                return Err(CliError::Validation(format!(
                    "unknown scheme {s:?}; expected st-fountain or fountain"
                )));
            }
        }
        let message_policy = args.message_policy.clone().or(file.message_policy);
        if let Some(mp) = &message_policy {
            if mp != "zero" && mp != "random" {
                return Err(CliError::Validation(format!(
                    "unknown message policy {mp:?}; expected zero or random"
                )));
            }
        }
        Ok(Self {
            k,
            k_range,
            p,
            p_grid,
            m_list,
            delta,
            trials,
            seed: args.seed.or(file.seed).unwrap_or(0),
            out: args.out.clone().or(file.out),
            format,
            scheme,
            schedule: args.schedule.clone().or(file.schedule),
            message_policy,
        })
    }

    /// Message lengths: explicit range, single k, or the given default.
    pub fn k_list(&self, default: (usize, usize)) -> Vec<usize> {
        if let Some((a, b)) = self.k_range {
            (a..=b).collect()
        } else if let Some(k) = self.k {
            vec![k]
        } else {
            (default.0..=default.1).collect()
        }
    }

    /// Erasure probabilities: explicit grid, single p, or the given default.
    pub fn p_list(&self, default: f64) -> Vec<f64> {
        if let Some(grid) = &self.p_grid {
            grid.clone()
        } else {
            vec![self.p.unwrap_or(default)]
        }
    }
}

pub fn validate_erasure_prob(p: f64) -> Result<(), CliError> {
    if !(0.0..1.0).contains(&p) {
        return Err(CliError::Validation(format!(
            "erasure probability {p} must lie in [0, 1)"
        )));
    }
    Ok(())
}

fn parse_k_range(s: &str) -> Result<(usize, usize), CliError> {
    let err = || CliError::Validation(format!("bad k range {s:?}; expected A:B with 1 <= A <= B"));
    let (a, b) = s.split_once(':').ok_or_else(err)?;
    let a: usize = a.trim().parse().map_err(|_| err())?;
    let b: usize = b.trim().parse().map_err(|_| err())?;
    if a < 1 || a > b {
        return Err(err());
    }
    Ok((a, b))
}

fn parse_p_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let err = || {
        CliError::Validation(format!(
            "bad p grid {s:?}; expected A:B:STEP with 0 <= A <= B < 1 and STEP > 0"
        ))
    };
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(err());
    }
    let a: f64 = parts[0].trim().parse().map_err(|_| err())?;
    let b: f64 = parts[1].trim().parse().map_err(|_| err())?;
    let step: f64 = parts[2].trim().parse().map_err(|_| err())?;
    if !(0.0..1.0).contains(&a) || !(0.0..1.0).contains(&b) || a > b || step <= 0.0 {
        return Err(err());
    }
    let mut grid = Vec::new();
    let mut i = 0u32;
    loop {
        let v = a + f64::from(i) * step;
        if v > b + step * 1e-9 {
            break;
        }
        grid.push(v.min(b));
        i += 1;
    }
    Ok(grid)
}

fn parse_m_list(s: &str) -> Result<Vec<usize>, CliError> {
    let err = || {
        CliError::Validation(format!(
            "bad m list {s:?}; expected comma-separated positive integers"
        ))
    };
    let mut out = Vec::new();
    for part in s.split(',') {
        let m: usize = part.trim().parse().map_err(|_| err())?;
        if m == 0 {
            return Err(err());
        }
        out.push(m);
    }
    if out.is_empty() {
        return Err(err());
    }
    Ok(out)
}

/// "unbounded" or comma-separated strictly increasing times.
pub fn parse_schedule(s: &str) -> Result<strlfc::DecodingSchedule, CliError> {
    if s.trim() == "unbounded" {
        return Ok(strlfc::DecodingSchedule::Unbounded);
    }
    let mut times = Vec::new();
    for part in s.split(',') {
        let t: u64 = part.trim().parse().map_err(|_| {
            CliError::Validation(format!(
                "bad schedule {s:?}; expected \"unbounded\" or times T1,T2,..."
            ))
        })?;
        times.push(t);
    }
    strlfc::DecodingSchedule::finite(times)
        .map_err(|e| CliError::Validation(format!("bad schedule {s:?}: {e}")))
}
