//! The five subcommands: bound tables, backoff curves, rank-gap curves,
//! schedule optimization, and seeded simulation with analytic cross-checks.

use crate::config::{parse_schedule, OutputFormat, RunConfig};
use crate::output::{csv_precision, fmt_float, json_document, Csv, Meta};
use crate::svg::{self, Series};
use crate::CliError;
use serde::Serialize;
use std::path::{Path, PathBuf};
use strlfc::bounds::{
    achievability_margin, backoff_bounds, converse, fountain_achievability,
    st_fountain_achievability,
};
use strlfc::montecarlo::{clopper_pearson, compare_to_analytic, estimate, MessagePolicy};
use strlfc::phase_type::{expected_rank_gap, fountain_rank_distribution};
use strlfc::schedule::{rate_vs_m_sweep, schedule_objective};
use strlfc::{ChannelParams, DecodingSchedule, EncoderSpec, Scheme};

fn lib_err(e: strlfc::Error) -> CliError {
    CliError::Runtime(e.to_string())
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn with_extension(path: &Path, ext: &str) -> PathBuf {
    let mut p = path.to_path_buf();
    p.set_extension(ext);
    p
}

/// Writes rows in the requested format; `svg` lazily renders the plot.
fn emit<T: Serialize>(
    cfg: &RunConfig,
    meta: &Meta,
    default_out: &str,
    csv: Csv,
    rows: &[T],
    svg: impl FnOnce() -> String,
) -> Result<(), CliError> {
    let out = cfg
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(default_out));
    match cfg.format {
        OutputFormat::Csv => write_file(&out, &csv.finish()),
        OutputFormat::Json => write_file(&with_extension(&out, "json"), &json_document(meta, rows)),
        OutputFormat::Svg => {
            write_file(&out, &csv.finish())?;
            write_file(&with_extension(&out, "svg"), &svg())
        }
    }
}

#[derive(Serialize)]
struct BoundsRow {
    k: usize,
    p: f64,
    fountain_l: f64,
    st_fountain_l: f64,
    converse_l: f64,
    rate_fountain: f64,
    rate_st_fountain: f64,
    rate_converse: f64,
    bound_margin: f64,
}

pub fn cmd_bounds(cfg: &RunConfig) -> Result<(), CliError> {
    let k_list = cfg.k_list((1, 22));
    let p_list = cfg.p_list(0.1);
    if *k_list.last().unwrap() > 127 {
        return Err(CliError::Validation(
            "k above 127 overflows the converse's message count".into(),
        ));
    }
    let mut rows = Vec::new();
    for &p in &p_list {
        for &k in &k_list {
            let fountain = fountain_achievability(k, p).map_err(lib_err)?;
            let st = st_fountain_achievability(k, p).map_err(lib_err)?;
            let conv = converse(1u128 << k, p).map_err(lib_err)?;
            rows.push(BoundsRow {
                k,
                p,
                fountain_l: fountain.blocklength,
                st_fountain_l: st.blocklength,
                converse_l: conv.blocklength,
                rate_fountain: fountain.rate,
                rate_st_fountain: st.rate,
                rate_converse: conv.rate,
                bound_margin: achievability_margin(k, p).map_err(lib_err)?,
            });
        }
    }

    let meta = Meta::new(
        "bounds",
        cfg.seed,
        &[
            ("k", format_list(&k_list)),
            ("p", format_float_list(&p_list)),
        ],
    );
    let mut csv = Csv::new(
        &meta,
        &[
            "k",
            "p",
            "fountain_l",
            "st_fountain_l",
            "converse_l",
            "rate_fountain",
            "rate_st_fountain",
            "rate_converse",
            "bound_margin",
        ],
    );
    for r in &rows {
        csv.row(&[
            r.k.to_string(),
            fmt_float(r.p),
            fmt_float(r.fountain_l),
            fmt_float(r.st_fountain_l),
            fmt_float(r.converse_l),
            fmt_float(r.rate_fountain),
            fmt_float(r.rate_st_fountain),
            fmt_float(r.rate_converse),
            fmt_float(r.bound_margin),
        ]);
    }
    emit(cfg, &meta, "bounds.csv", csv, &rows, || {
        let mut series = Vec::new();
        for &p in &p_list {
            let tag = |name: &str| {
                if p_list.len() > 1 {
                    format!("{name} p={p}")
                } else {
                    name.to_string()
                }
            };
            let sel: Vec<&BoundsRow> = rows.iter().filter(|r| r.p == p).collect();
            series.push(Series {
                name: tag("fountain"),
                points: sel
                    .iter()
                    .map(|r| (csv_precision(r.fountain_l), csv_precision(r.rate_fountain)))
                    .collect(),
            });
            series.push(Series {
                name: tag("systematic+fountain"),
                points: sel
                    .iter()
                    .map(|r| (csv_precision(r.st_fountain_l), csv_precision(r.rate_st_fountain)))
                    .collect(),
            });
            series.push(Series {
                name: tag("converse"),
                points: sel
                    .iter()
                    .map(|r| (csv_precision(r.converse_l), csv_precision(r.rate_converse)))
                    .collect(),
            });
        }
        svg::render(
            "Rate vs expected blocklength",
            "expected blocklength (channel uses)",
            "rate (bits per channel use)",
            &series,
        )
    })
}

#[derive(Serialize)]
struct BackoffRow {
    p: f64,
    backoff_fountain: f64,
    backoff_st_fountain: f64,
}

pub fn cmd_backoff(cfg: &RunConfig) -> Result<(), CliError> {
    let k = cfg.k.unwrap_or(3);
    let p_list = match &cfg.p_grid {
        Some(grid) => grid.clone(),
        None => (0..=99).map(|i| f64::from(i) * 0.01).collect(),
    };
    let mut rows = Vec::new();
    for &p in &p_list {
        let b = backoff_bounds(k, p).map_err(lib_err)?;
        rows.push(BackoffRow {
            p,
            backoff_fountain: b.fountain,
            backoff_st_fountain: b.st_fountain,
        });
    }
    let meta = Meta::new(
        "backoff",
        cfg.seed,
        &[("k", k.to_string()), ("p", format_float_list(&p_list))],
    );
    let mut csv = Csv::new(&meta, &["p", "backoff_fountain", "backoff_st_fountain"]);
    for r in &rows {
        csv.row(&[
            fmt_float(r.p),
            fmt_float(r.backoff_fountain),
            fmt_float(r.backoff_st_fountain),
        ]);
    }
    emit(cfg, &meta, "backoff.csv", csv, &rows, || {
        svg::render(
            &format!("Backoff from capacity, k = {k}"),
            "erasure probability",
            "backoff bound 1 - R/C",
            &[
                Series {
                    name: "fountain".into(),
                    points: rows
                        .iter()
                        .map(|r| (csv_precision(r.p), csv_precision(r.backoff_fountain)))
                        .collect(),
                },
                Series {
                    name: "systematic+fountain".into(),
                    points: rows
                        .iter()
                        .map(|r| (csv_precision(r.p), csv_precision(r.backoff_st_fountain)))
                        .collect(),
                },
            ],
        )
    })
}

#[derive(Serialize)]
struct RankGapRow {
    k: usize,
    gap: f64,
}

pub fn cmd_rankgap(cfg: &RunConfig) -> Result<(), CliError> {
    let k_list = cfg.k_list((1, 100));
    let p = cfg.p.unwrap_or(0.1);
    let mut rows = Vec::new();
    for &k in &k_list {
        rows.push(RankGapRow {
            k,
            gap: expected_rank_gap(k, p).map_err(lib_err)?,
        });
    }
    let meta = Meta::new(
        "rankgap",
        cfg.seed,
        &[("k", format_list(&k_list)), ("p", format!("{p}"))],
    );
    let mut csv = Csv::new(&meta, &["k", "gap"]);
    for r in &rows {
        csv.row(&[r.k.to_string(), fmt_float(r.gap)]);
    }
    emit(cfg, &meta, "rankgap.csv", csv, &rows, || {
        svg::render(
            &format!("Expected-rank advantage of systematic transmission, p = {p}"),
            "message length k",
            "mean rank gap at time k",
            &[Series {
                name: "gap".into(),
                points: rows
                    .iter()
                    .map(|r| (r.k as f64, csv_precision(r.gap)))
                    .collect(),
            }],
        )
    })
}

#[derive(Serialize)]
struct ScheduleRow {
    m: usize,
    k: usize,
    schedule: String,
    blocklength_bound: f64,
    rate: f64,
    error_bound: f64,
    adjusted_unbounded_rate: f64,
}

pub fn cmd_schedules(cfg: &RunConfig) -> Result<(), CliError> {
    let k_list = cfg.k_list((1, 16));
    let p = cfg.p.unwrap_or(0.5);
    let delta = cfg.delta.unwrap_or(1e-3);
    let m_list = cfg.m_list.clone().unwrap_or_else(|| vec![1, 2, 4, 8, 16]);
    let sweep = rate_vs_m_sweep(&k_list, p, &m_list, delta).map_err(lib_err)?;
    let rows: Vec<ScheduleRow> = sweep
        .iter()
        .map(|row| ScheduleRow {
            m: row.m,
            k: row.k,
            schedule: join_times(&row.solution.times),
            blocklength_bound: row.solution.objective,
            rate: row.solution.rate,
            error_bound: row.solution.error_bound,
            adjusted_unbounded_rate: row.adjusted_unbounded_rate,
        })
        .collect();
    let meta = Meta::new(
        "schedules",
        cfg.seed,
        &[
            ("k", format_list(&k_list)),
            ("p", format!("{p}")),
            ("delta", format!("{delta}")),
            ("m", format_list(&m_list)),
        ],
    );
    let mut csv = Csv::new(
        &meta,
        &[
            "m",
            "k",
            "schedule",
            "blocklength_bound",
            "rate",
            "error_bound",
            "adjusted_unbounded_rate",
        ],
    );
    for r in &rows {
        csv.row(&[
            r.m.to_string(),
            r.k.to_string(),
            r.schedule.clone(),
            fmt_float(r.blocklength_bound),
            fmt_float(r.rate),
            fmt_float(r.error_bound),
            fmt_float(r.adjusted_unbounded_rate),
        ]);
    }
    emit(cfg, &meta, "schedules.csv", csv, &rows, || {
        let mut series: Vec<Series> = m_list
            .iter()
            .map(|&m| Series {
                name: format!("m = {m}"),
                points: rows
                    .iter()
                    .filter(|r| r.m == m)
                    .map(|r| (csv_precision(r.blocklength_bound), csv_precision(r.rate)))
                    .collect(),
            })
            .collect();
        let reference: Vec<(f64, f64)> = k_list
            .iter()
            .filter_map(|&k| {
                let rate = csv_precision(rows.iter().find(|r| r.k == k)?.adjusted_unbounded_rate);
                Some((k as f64 / rate, rate))
            })
            .collect();
        series.push(Series {
            name: "unbounded reference".into(),
            points: reference,
        });
        svg::render(
            &format!("Rate vs blocklength bound, p = {p}, target error {delta}"),
            "expected blocklength bound (channel uses)",
            "rate (bits per channel use)",
            &series,
        )
    })
}

#[derive(Serialize)]
struct AnalyticBlock {
    blocklength: f64,
    error_bound: f64,
    z_score: f64,
    z_pass: bool,
    error_bound_consistent: bool,
}

#[derive(Serialize)]
struct SimulateJson<'a> {
    meta: &'a Meta,
    report: &'a strlfc::SimReport,
    analytic: &'a AnalyticBlock,
}

/// Exact expected blocklength and error bound for the given scheme and
/// schedule.
fn analytic_stats(
    scheme: Scheme,
    k: usize,
    p: f64,
    schedule: &DecodingSchedule,
) -> Result<(f64, f64), CliError> {
    match schedule {
        DecodingSchedule::Unbounded => {
            let blocklength = match scheme {
                Scheme::SystematicFountain => {
                    st_fountain_achievability(k, p).map_err(lib_err)?.blocklength
                }
                Scheme::FountainOnly => fountain_achievability(k, p).map_err(lib_err)?.blocklength,
            };
            Ok((blocklength, 0.0))
        }
        DecodingSchedule::Finite(times) => match scheme {
            Scheme::SystematicFountain => schedule_objective(k, p, times).map_err(lib_err),
            Scheme::FountainOnly => {
                let last = *times.last().expect("validated schedule");
                let mut objective = last as f64;
                for w in times.windows(2) {
                    let full = fountain_rank_distribution(k, p, w[0]).map_err(lib_err)?.prob(k);
                    objective -= (w[1] - w[0]) as f64 * full;
                }
                let err = 1.0 - fountain_rank_distribution(k, p, last).map_err(lib_err)?.prob(k);
                Ok((objective, err))
            }
        },
    }
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<(), CliError> {
    let k = cfg.k.unwrap_or(3);
    let p = cfg.p.unwrap_or(0.5);
    let trials = cfg.trials.unwrap_or(100_000);
    if trials < 1000 {
        return Err(CliError::Validation(
            "simulate needs at least 1000 trials for the analytic comparison".into(),
        ));
    }
    let scheme = match cfg.scheme.as_deref() {
        Some("fountain") => Scheme::FountainOnly,
        _ => Scheme::SystematicFountain,
    };
    let schedule = match &cfg.schedule {
        Some(s) => parse_schedule(s)?,
        None => DecodingSchedule::Unbounded,
    };
    let policy = match cfg.message_policy.as_deref() {
        Some("zero") => MessagePolicy::Zero,
        _ => MessagePolicy::Random,
    };

    let spec = EncoderSpec::new(k, scheme).map_err(|e| CliError::Validation(e.to_string()))?;
    let params = ChannelParams::new(p, cfg.seed).map_err(|e| CliError::Validation(e.to_string()))?;
    let report = estimate(&spec, &params, &schedule, trials, &policy, &[]).map_err(lib_err)?;

    let (analytic_l, analytic_err) = analytic_stats(scheme, k, p, &schedule)?;
    let cmp = compare_to_analytic(&report, analytic_l).map_err(lib_err)?;
    let error_bound_consistent = match schedule {
        DecodingSchedule::Unbounded => report.failures == 0,
        DecodingSchedule::Finite(_) => {
            let (lo, hi) = clopper_pearson(report.failures, report.trials, 0.9999);
            lo <= analytic_err && analytic_err <= hi
        }
    };
    let analytic = AnalyticBlock {
        blocklength: analytic_l,
        error_bound: analytic_err,
        z_score: cmp.z_score,
        z_pass: cmp.pass,
        error_bound_consistent,
    };

    let schedule_label = match &schedule {
        DecodingSchedule::Unbounded => "unbounded".to_string(),
        DecodingSchedule::Finite(times) => join_times(times),
    };
    let scheme_label = match scheme {
        Scheme::SystematicFountain => "st-fountain",
        Scheme::FountainOnly => "fountain",
    };
    let meta = Meta::new(
        "simulate",
        cfg.seed,
        &[
            ("k", k.to_string()),
            ("p", format!("{p}")),
            ("scheme", scheme_label.to_string()),
            ("schedule", schedule_label.clone()),
            ("trials", trials.to_string()),
            (
                "policy",
                if policy == MessagePolicy::Zero { "zero" } else { "random" }.to_string(),
            ),
        ],
    );

    let mut csv = Csv::new(
        &meta,
        &[
            "scheme",
            "k",
            "p",
            "schedule",
            "trials",
            "seed",
            "mean_stop_time",
            "stderr_stop_time",
            "analytic_blocklength",
            "z_score",
            "z_pass",
            "failures",
            "error_rate",
            "error_ci_low",
            "error_ci_high",
            "analytic_error_bound",
            "error_bound_consistent",
            "undetected_errors",
        ],
    );
    csv.row(&[
        scheme_label.to_string(),
        k.to_string(),
        fmt_float(p),
        schedule_label,
        trials.to_string(),
        cfg.seed.to_string(),
        fmt_float(report.mean_stop_time),
        fmt_float(report.stderr_stop_time),
        fmt_float(analytic_l),
        fmt_float(cmp.z_score),
        cmp.pass.to_string(),
        report.failures.to_string(),
        fmt_float(report.error_rate),
        fmt_float(report.error_ci_low),
        fmt_float(report.error_ci_high),
        fmt_float(analytic_err),
        error_bound_consistent.to_string(),
        report.undetected_errors.to_string(),
    ]);

    if cfg.format == OutputFormat::Svg {
        return Err(CliError::Validation(
            "simulate emits csv and json only".into(),
        ));
    }
    let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from("simulate.csv"));
    write_file(&out, &csv.finish())?;
    let json = serde_json::to_string_pretty(&SimulateJson {
        meta: &meta,
        report: &report,
        analytic: &analytic,
    })
    .expect("serializable report")
        + "\n";
    write_file(&with_extension(&out, "json"), &json)?;

    if !cmp.pass || !error_bound_consistent {
        return Err(CliError::Mismatch(format!(
            "simulation disagrees with analytic values: z = {:.3}, error bound consistent = {}",
            cmp.z_score, error_bound_consistent
        )));
    }
    Ok(())
}

fn join_times(times: &[u64]) -> String {
    times
        .iter()
        .map(u64::to_string)
        .collect::<Vec<_>>()
        .join("|")
}

fn format_list(values: &[usize]) -> String {
    if values.len() > 4 {
        format!("{}..{}", values.first().unwrap(), values.last().unwrap())
    } else {
        values
            .iter()
            .map(usize::to_string)
            .collect::<Vec<_>>()
            .join(",")
    }
}

fn format_float_list(values: &[f64]) -> String {
    if values.len() > 4 {
        format!(
            "{}..{}(n={})",
            values.first().unwrap(),
            values.last().unwrap(),
            values.len()
        )
    } else {
        values
            .iter()
            .map(|v| format!("{v}"))
            .collect::<Vec<_>>()
            .join(",")
    }
}
