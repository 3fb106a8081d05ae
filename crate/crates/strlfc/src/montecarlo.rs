//! Trial orchestration and statistics: estimates of the stopping time, error
//! rates with exact binomial confidence intervals, and rank histograms, all
//! deterministic for a fixed master seed regardless of worker count.

use crate::channel::{derive_stream, ChannelParams, RandomState, StreamTag, TrialStreams, RNG_ALGORITHM};
use crate::codec::{run_trial, DecodingSchedule, EncoderSpec, Scheme};
use crate::error::{Error, Result};
use crate::gf2::BitVector;
use rand::RngCore;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{Beta, ContinuousCDF};

/// How the transmitted message is chosen per trial. The rank process does not
/// depend on the message, so all policies give the same stopping-time law.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum MessagePolicy {
    Zero,
    Fixed(BitVector),
    Random,
}

/// Empirical rank counts at one probed time instant.
#[derive(Clone, Debug, Serialize)]
pub struct RankHistogram {
    pub time: u64,
    /// counts[r] = trials observed at rank r.
    pub counts: Vec<u64>,
}

/// Aggregated result of a batch of simulated transmissions.
#[derive(Clone, Debug, Serialize)]
pub struct SimReport {
    pub scheme: Scheme,
    pub k: usize,
    pub erasure_prob: f64,
    pub schedule: DecodingSchedule,
    pub message_policy: MessagePolicy,
    pub trials: u64,
    pub master_seed: u64,
    pub rng_algorithm: String,
    pub mean_stop_time: f64,
    /// Sample standard deviation divided by sqrt(trials).
    pub stderr_stop_time: f64,
    /// Rank-deficient terminations (each counted as an error).
    pub failures: u64,
    pub error_rate: f64,
    /// Exact binomial (Clopper-Pearson) 95% interval for the error rate.
    pub error_ci_low: f64,
    pub error_ci_high: f64,
    /// Successful decodes that did not match the transmitted message.
    /// Structurally zero for the rank decoder over an erasure channel.
    pub undetected_errors: u64,
    pub rank_histograms: Vec<RankHistogram>,
}

struct Aggregate {
    sum_stop: u128,
    sum_stop_sq: u128,
    failures: u64,
    undetected: u64,
    hist: Vec<Vec<u64>>,
}

impl Aggregate {
    fn new(n_probes: usize, k: usize) -> Self {
        Self {
            sum_stop: 0,
            sum_stop_sq: 0,
            failures: 0,
            undetected: 0,
            hist: vec![vec![0; k + 1]; n_probes],
        }
    }

    fn merge(mut self, other: Self) -> Self {
        self.sum_stop += other.sum_stop;
        self.sum_stop_sq += other.sum_stop_sq;
        self.failures += other.failures;
        self.undetected += other.undetected;
        for (a, b) in self.hist.iter_mut().zip(other.hist) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        self
    }
}

fn random_message(rng: &mut RandomState, k: usize) -> BitVector {
    let n_words = k.div_ceil(64);
    let mut words = Vec::with_capacity(n_words);
    for _ in 0..n_words {
        words.push(rng.next_u64());
    }
    BitVector::from_words(k, words)
}

/// Runs `trials` independent transmissions and aggregates the sufficient
/// statistics. Trials are parallelized over their indices; every trial draws
/// its streams from (master seed, trial index, tag), so the report is
/// bit-identical for a fixed seed regardless of the worker count.
pub fn estimate(
    spec: &EncoderSpec,
    params: &ChannelParams,
    schedule: &DecodingSchedule,
    trials: u64,
    policy: &MessagePolicy,
    probe_times: &[u64],
) -> Result<SimReport> {
    if trials == 0 {
        return Err(Error::TooFewTrials { required: 1, got: 0 });
    }
    if let MessagePolicy::Fixed(msg) = policy {
        if msg.len() != spec.k() {
            return Err(Error::MessageLengthMismatch {
                expected: spec.k(),
                got: msg.len(),
            });
        }
    }
    let mut probes = probe_times.to_vec();
    probes.sort_unstable();
    probes.dedup();

    let k = spec.k();
    let seed = params.seed();
    let agg = (0..trials)
        .into_par_iter()
        .try_fold(
            || Aggregate::new(probes.len(), k),
            |mut acc, trial| -> Result<Aggregate> {
                let mut streams = TrialStreams::derive(seed, trial);
                let message = match policy {
                    MessagePolicy::Zero => BitVector::zeros(k),
                    MessagePolicy::Fixed(m) => m.clone(),
                    MessagePolicy::Random => {
                        random_message(&mut derive_stream(seed, trial, StreamTag::Message), k)
                    }
                };
                let outcome = run_trial(spec, params, schedule, &message, &mut streams, &probes)?;
                acc.sum_stop += u128::from(outcome.stop_time);
                acc.sum_stop_sq += u128::from(outcome.stop_time) * u128::from(outcome.stop_time);
                match &outcome.decoded {
                    None => acc.failures += 1,
                    Some(decoded) if *decoded != message => acc.undetected += 1,
                    Some(_) => {}
                }
                for (slot, &(_, rank)) in acc.hist.iter_mut().zip(&outcome.rank_probes) {
                    slot[rank] += 1;
                }
                Ok(acc)
            },
        )
        .try_reduce(|| Aggregate::new(probes.len(), k), |a, b| Ok(a.merge(b)))?;

    let n = trials as f64;
    let mean = agg.sum_stop as f64 / n;
    let stderr = if trials < 2 {
        0.0
    } else {
        let var = (agg.sum_stop_sq as f64 - n * mean * mean) / (n - 1.0);
        (var.max(0.0) / n).sqrt()
    };
    let (error_ci_low, error_ci_high) = clopper_pearson(agg.failures, trials, 0.95);
    Ok(SimReport {
        scheme: spec.scheme(),
        k,
        erasure_prob: params.erasure_prob(),
        schedule: schedule.clone(),
        message_policy: policy.clone(),
        trials,
        master_seed: seed,
        rng_algorithm: RNG_ALGORITHM.to_string(),
        mean_stop_time: mean,
        stderr_stop_time: stderr,
        failures: agg.failures,
        error_rate: agg.failures as f64 / n,
        error_ci_low,
        error_ci_high,
        undetected_errors: agg.undetected,
        rank_histograms: probes
            .into_iter()
            .zip(agg.hist)
            .map(|(time, counts)| RankHistogram { time, counts })
            .collect(),
    })
}

/// Exact (Clopper-Pearson) two-sided confidence interval for a binomial
/// proportion.
pub fn clopper_pearson(successes: u64, trials: u64, confidence: f64) -> (f64, f64) {
    assert!(trials >= 1, "interval needs at least one trial");
    assert!(successes <= trials);
    assert!(confidence > 0.0 && confidence < 1.0);
    let alpha = 1.0 - confidence;
    let x = successes as f64;
    let n = trials as f64;
    let low = if successes == 0 {
        0.0
    } else {
        Beta::new(x, n - x + 1.0)
            .expect("valid shape parameters")
            .inverse_cdf(alpha / 2.0)
    };
    let high = if successes == trials {
        1.0
    } else {
        Beta::new(x + 1.0, n - x)
            .expect("valid shape parameters")
            .inverse_cdf(1.0 - alpha / 2.0)
    };
    (low, high)
}

/// A z-test of the simulated mean stopping time against an analytic value.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Comparison {
    pub z_score: f64,
    pub pass: bool,
}

/// z = (sample mean - analytic) / stderr; passes when |z| <= 4. A degenerate
/// sample (zero stderr) passes only on exact equality, with an infinite z as
/// the diagnostic otherwise.
pub fn compare_to_analytic(report: &SimReport, analytic: f64) -> Result<Comparison> {
    if report.trials < 1000 {
        return Err(Error::TooFewTrials {
            required: 1000,
            got: report.trials,
        });
    }
    if report.stderr_stop_time == 0.0 {
        if report.mean_stop_time == analytic {
            return Ok(Comparison {
                z_score: 0.0,
                pass: true,
            });
        }
        return Ok(Comparison {
            z_score: f64::INFINITY,
            pass: false,
        });
    }
    let z = (report.mean_stop_time - analytic) / report.stderr_stop_time;
    Ok(Comparison {
        z_score: z,
        pass: z.abs() <= 4.0,
    })
}
