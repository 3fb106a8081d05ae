//! Analytic machinery for the rank process: binomial tails, the absorbing
//! Markov chain the rank follows once the systematic phase ends, closed-form
//! expected stopping times, full-rank probabilities, and expected-rank
//! trajectories.
//!
//! All powers of two enter only as ratios, evaluated through `exp2` of
//! exponent differences so that message lengths well beyond 64 bits stay in
//! range.

use crate::error::{Error, Result};
use statrs::distribution::{Binomial, Discrete, DiscreteCDF};

/// Fraction of the 2^k - 1 nonzero vectors that fall outside a fixed
/// r-dimensional subspace: (2^k - 2^r) / (2^k - 1).
pub(crate) fn fresh_fraction(k: usize, r: usize) -> f64 {
    debug_assert!(r <= k);
    let k = k as f64;
    let r = r as f64;
    (1.0 - (r - k).exp2()) / (1.0 - (-k).exp2())
}

/// Fraction of the nonzero vectors inside an r-dimensional subspace:
/// (2^r - 1) / (2^k - 1).
pub(crate) fn spanned_fraction(k: usize, r: usize) -> f64 {
    debug_assert!(r <= k);
    let k = k as f64;
    let r = r as f64;
    ((r - k).exp2() - (-k).exp2()) / (1.0 - (-k).exp2())
}

/// (2^k - 1) / (2^k - 2^i), the reciprocal of [`fresh_fraction`].
pub(crate) fn inverse_fresh_fraction(k: usize, i: usize) -> f64 {
    debug_assert!(i < k);
    let k = k as f64;
    let i = i as f64;
    (1.0 - (-k).exp2()) / (1.0 - (i - k).exp2())
}

fn validate_binomial(point: usize, trials: usize, q: f64) -> Result<()> {
    if trials == 0 {
        return Err(Error::ZeroDimension);
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidProbability(q));
    }
    if point > trials {
        return Err(Error::BinomialOutOfRange { point, trials });
    }
    Ok(())
}

/// P[X = j] for X ~ Binomial(trials, q). Degenerate success probabilities are
/// handled exactly so that noiseless and fully-erased channels stay bit-exact.
pub fn binomial_pmf(j: usize, trials: usize, q: f64) -> Result<f64> {
    validate_binomial(j, trials, q)?;
    if q == 0.0 {
        return Ok(if j == 0 { 1.0 } else { 0.0 });
    }
    if q == 1.0 {
        return Ok(if j == trials { 1.0 } else { 0.0 });
    }
    let dist = Binomial::new(q, trials as u64).expect("validated parameters");
    Ok(dist.pmf(j as u64))
}

/// P[X <= i] for X ~ Binomial(trials, q), evaluated stably.
pub fn binomial_cdf(i: usize, trials: usize, q: f64) -> Result<f64> {
    validate_binomial(i, trials, q)?;
    if i == trials || q == 0.0 {
        return Ok(1.0);
    }
    if q == 1.0 {
        return Ok(0.0);
    }
    let dist = Binomial::new(q, trials as u64).expect("validated parameters");
    Ok(dist.cdf(i as u64))
}

/// Absorbing Markov chain for the generator-matrix rank after the systematic
/// phase: transient states are ranks 0..k-1, the absorbing state is rank k.
///
/// `stay[r]` and `advance[r]` are the hold and step-up probabilities out of
/// rank r; `advance[k-1]` is the exit mass into the absorbing state. `alpha`
/// is the rank distribution entering the fountain phase (binomial over the
/// k systematic receptions), restricted to the transient states.
#[derive(Clone, Debug)]
pub struct PhaseChain {
    k: usize,
    erasure_prob: f64,
    stay: Vec<f64>,
    advance: Vec<f64>,
    alpha: Vec<f64>,
    alpha_absorbing: f64,
}

impl PhaseChain {
    pub fn new(k: usize, erasure_prob: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::ZeroDimension);
        }
        if !(0.0..=1.0).contains(&erasure_prob) {
            return Err(Error::InvalidProbability(erasure_prob));
        }
        let p = erasure_prob;
        let success = 1.0 - p;
        let mut stay = Vec::with_capacity(k);
        let mut advance = Vec::with_capacity(k);
        for r in 0..k {
            stay.push(p + success * spanned_fraction(k, r));
            advance.push(success * fresh_fraction(k, r));
        }
        let mut alpha = Vec::with_capacity(k);
        for j in 0..k {
            alpha.push(binomial_pmf(j, k, success)?);
        }
        let alpha_absorbing = binomial_pmf(k, k, success)?;
        Ok(Self {
            k,
            erasure_prob,
            stay,
            advance,
            alpha,
            alpha_absorbing,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn erasure_prob(&self) -> f64 {
        self.erasure_prob
    }

    /// Hold probabilities for ranks 0..k-1 (the transfer-matrix diagonal).
    pub fn stay(&self) -> &[f64] {
        &self.stay
    }

    /// Step-up probabilities for ranks 0..k-1; the last entry is the exit
    /// mass into the absorbing state.
    pub fn advance(&self) -> &[f64] {
        &self.advance
    }

    /// Initial transient distribution: P[rank = j] after the systematic phase.
    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    /// Initial mass already absorbed (full rank straight out of the
    /// systematic phase).
    pub fn alpha_absorbing(&self) -> f64 {
        self.alpha_absorbing
    }

    /// Expected stopping time of the unbounded-schedule decoder, in closed
    /// form: k plus the capacity-scaled sum of inverse fresh-column fractions
    /// weighted by the binomial CDF.
    pub fn expected_stop_time(&self) -> Result<f64> {
        if self.erasure_prob >= 1.0 {
            return Err(Error::DivergentStopTime);
        }
        let success = 1.0 - self.erasure_prob;
        let mut sum = 0.0;
        for i in 0..self.k {
            sum += inverse_fresh_fraction(self.k, i) * binomial_cdf(i, self.k, success)?;
        }
        Ok(self.k as f64 + sum / success)
    }

    /// Same expectation through the linear system route: back-substitution on
    /// the bidiagonal (I - T) for the expected absorption times, then a dot
    /// with the initial distribution. Cross-checks the closed form.
    pub fn expected_stop_time_by_solve(&self) -> Result<f64> {
        if self.erasure_prob >= 1.0 {
            return Err(Error::DivergentStopTime);
        }
        let k = self.k;
        // x[r]: expected steps to absorption starting from transient rank r.
        let mut x = vec![0.0; k];
        x[k - 1] = 1.0 / (1.0 - self.stay[k - 1]);
        for r in (0..k - 1).rev() {
            x[r] = (1.0 + self.advance[r] * x[r + 1]) / (1.0 - self.stay[r]);
        }
        let mean_absorption: f64 = self.alpha.iter().zip(&x).map(|(a, t)| a * t).sum();
        Ok(self.k as f64 + mean_absorption)
    }

    /// Expected stopping time as k plus the summed survival probabilities,
    /// truncated once the per-term mass drops below 1e-12 (hard cap at
    /// k + 10^6 steps). A third route used for cross-validation.
    pub fn expected_stop_time_by_tail_sum(&self) -> Result<f64> {
        if self.erasure_prob >= 1.0 {
            return Err(Error::DivergentStopTime);
        }
        let mut v = self.alpha.clone();
        let mut total = 0.0;
        for _ in 0..1_000_000u64 {
            let mass: f64 = v.iter().sum();
            total += mass;
            if mass < 1e-12 {
                break;
            }
            self.step_transient(&mut v);
        }
        Ok(self.k as f64 + total)
    }

    /// One step of the transient part of the chain: v <- v T.
    fn step_transient(&self, v: &mut [f64]) {
        let mut carry = 0.0;
        for (r, mass) in v.iter_mut().enumerate() {
            let next_carry = *mass * self.advance[r];
            *mass = *mass * self.stay[r] + carry;
            carry = next_carry;
        }
    }

    /// P[rank at time n < k]: zero before the systematic phase completes can
    /// never hold, so 1 for n < k; afterwards the untouched transient mass.
    pub fn prob_rank_deficient(&self, n: u64) -> f64 {
        if n < self.k as u64 {
            return 1.0;
        }
        let mut v = self.alpha.clone();
        for _ in 0..n - self.k as u64 {
            self.step_transient(&mut v);
        }
        v.iter().sum()
    }

    /// P[rank at time n = k]; zero for n < k.
    pub fn prob_full_rank(&self, n: u64) -> f64 {
        if n < self.k as u64 {
            return 0.0;
        }
        1.0 - self.prob_rank_deficient(n)
    }

    /// P[rank at time n < k] for every n in 0..=n_max, computed in one sweep.
    pub fn deficiency_curve(&self, n_max: u64) -> Vec<f64> {
        let k = self.k as u64;
        let mut curve = Vec::with_capacity(n_max as usize + 1);
        let mut v = self.alpha.clone();
        for n in 0..=n_max {
            if n < k {
                curve.push(1.0);
            } else {
                if n > k {
                    self.step_transient(&mut v);
                }
                curve.push(v.iter().sum());
            }
        }
        curve
    }

    /// One step of the full (k+1)-state chain, including the absorbing state.
    pub fn step_distribution(&self, dist: &mut RankDistribution) {
        assert_eq!(dist.probs.len(), self.k + 1, "distribution dimension mismatch");
        let (transient, absorbed) = dist.probs.split_at_mut(self.k);
        let mut carry = 0.0;
        for (r, mass) in transient.iter_mut().enumerate() {
            let next_carry = *mass * self.advance[r];
            *mass = *mass * self.stay[r] + carry;
            carry = next_carry;
        }
        absorbed[0] += carry;
    }
}

/// Probability distribution over ranks 0..=k at a fixed time instant.
#[derive(Clone, Debug, PartialEq)]
pub struct RankDistribution {
    probs: Vec<f64>,
}

impl RankDistribution {
    /// All mass at rank 0 (nothing received yet).
    pub fn point_mass_zero(k: usize) -> Self {
        let mut probs = vec![0.0; k + 1];
        probs[0] = 1.0;
        Self { probs }
    }

    /// Rank distribution after `n <= k` systematic transmissions: binomial in
    /// the number of unerased receptions.
    pub fn systematic_at(k: usize, erasure_prob: f64, n: usize) -> Result<Self> {
        if n > k {
            return Err(Error::BinomialOutOfRange { point: n, trials: k });
        }
        let mut probs = vec![0.0; k + 1];
        if n == 0 {
            probs[0] = 1.0;
        } else {
            for (j, slot) in probs.iter_mut().enumerate().take(n + 1) {
                *slot = binomial_pmf(j, n, 1.0 - erasure_prob)?;
            }
        }
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, rank: usize) -> f64 {
        self.probs[rank]
    }

    pub fn mean(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(r, p)| r as f64 * p)
            .sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.probs.iter().sum()
    }
}

/// Rank distribution of the systematic-then-fountain scheme at time n.
pub fn st_rank_distribution(k: usize, erasure_prob: f64, n: u64) -> Result<RankDistribution> {
    let chain = PhaseChain::new(k, erasure_prob)?;
    if n <= k as u64 {
        return RankDistribution::systematic_at(k, erasure_prob, n as usize);
    }
    let mut dist = RankDistribution::systematic_at(k, erasure_prob, k)?;
    for _ in 0..n - k as u64 {
        chain.step_distribution(&mut dist);
    }
    Ok(dist)
}

/// Rank distribution of the fountain-only scheme at time n: every instant
/// draws a fountain column, so the chain runs from rank 0 from the start.
pub fn fountain_rank_distribution(k: usize, erasure_prob: f64, n: u64) -> Result<RankDistribution> {
    let chain = PhaseChain::new(k, erasure_prob)?;
    let mut dist = RankDistribution::point_mass_zero(k);
    for _ in 0..n {
        chain.step_distribution(&mut dist);
    }
    Ok(dist)
}

/// Expected-rank advantage of systematic transmission over fountain-only
/// coding at the end of the systematic window: k(1-p) minus the mean rank of
/// the fountain chain after k steps.
pub fn expected_rank_gap(k: usize, erasure_prob: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::ZeroDimension);
    }
    if !(0.0..=1.0).contains(&erasure_prob) {
        return Err(Error::InvalidProbability(erasure_prob));
    }
    let systematic_mean = k as f64 * (1.0 - erasure_prob);
    let fountain_mean = fountain_rank_distribution(k, erasure_prob, k as u64)?.mean();
    Ok(systematic_mean - fountain_mean)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_cdf_full_support_is_one() {
        for q in [0.0, 0.3, 1.0] {
            assert_eq!(binomial_cdf(5, 5, q).unwrap(), 1.0);
        }
    }

    #[test]
    fn binomial_cdf_at_zero_is_failure_power() {
        let got = binomial_cdf(0, 4, 0.3).unwrap();
        assert!((got - 0.7f64.powi(4)).abs() < 1e-14);
    }

    #[test]
    fn binomial_cdf_hand_value() {
        // P[X <= 1] for X ~ Bin(3, 1/2) = 1/8 + 3/8.
        assert!((binomial_cdf(1, 3, 0.5).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn binomial_rejects_out_of_range() {
        assert!(binomial_cdf(4, 3, 0.5).is_err());
        assert!(binomial_cdf(1, 3, 1.5).is_err());
        assert!(binomial_pmf(1, 0, 0.5).is_err());
    }

    #[test]
    fn chain_dimension_one() {
        // Single transient state: hold with probability p, alpha = [p].
        let chain = PhaseChain::new(1, 0.5).unwrap();
        assert_eq!(chain.stay(), &[0.5]);
        assert_eq!(chain.advance(), &[0.5]);
        assert!((chain.alpha()[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn chain_dimension_two_noiseless() {
        let chain = PhaseChain::new(2, 0.0).unwrap();
        assert!((chain.stay()[0] - 0.0).abs() < 1e-15);
        assert!((chain.advance()[0] - 1.0).abs() < 1e-15);
        assert!((chain.stay()[1] - 1.0 / 3.0).abs() < 1e-15);
        assert!((chain.advance()[1] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn chain_rows_are_stochastic() {
        let chain = PhaseChain::new(8, 0.3).unwrap();
        for r in 0..8 {
            assert!((chain.stay()[r] + chain.advance()[r] - 1.0).abs() < 1e-12);
        }
        let alpha_total: f64 = chain.alpha().iter().sum::<f64>() + chain.alpha_absorbing();
        assert!((alpha_total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn expected_stop_time_geometric_case() {
        let chain = PhaseChain::new(1, 0.5).unwrap();
        assert!((chain.expected_stop_time().unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn expected_stop_time_noiseless_is_k() {
        for k in [2usize, 5, 17, 64] {
            let chain = PhaseChain::new(k, 0.0).unwrap();
            assert_eq!(chain.expected_stop_time().unwrap(), k as f64);
        }
    }

    #[test]
    fn expected_stop_time_diverges_at_p_one() {
        let chain = PhaseChain::new(3, 1.0).unwrap();
        assert_eq!(chain.expected_stop_time().unwrap_err(), Error::DivergentStopTime);
        assert_eq!(
            chain.expected_stop_time_by_solve().unwrap_err(),
            Error::DivergentStopTime
        );
    }

    #[test]
    fn stop_time_routes_agree() {
        for k in [1usize, 2, 3, 8, 16, 32, 64] {
            for tenths in 0..10 {
                let p = tenths as f64 / 10.0;
                let chain = PhaseChain::new(k, p).unwrap();
                let closed = chain.expected_stop_time().unwrap();
                let solved = chain.expected_stop_time_by_solve().unwrap();
                assert!(
                    (closed - solved).abs() <= 1e-10 * closed.abs(),
                    "k={k} p={p}: {closed} vs {solved}"
                );
            }
        }
    }

    #[test]
    fn tail_sum_route_agrees() {
        for (k, p) in [(1usize, 0.5), (4, 0.3), (8, 0.5), (6, 0.9)] {
            let chain = PhaseChain::new(k, p).unwrap();
            let closed = chain.expected_stop_time().unwrap();
            let tail = chain.expected_stop_time_by_tail_sum().unwrap();
            assert!((closed - tail).abs() < 1e-9, "k={k} p={p}: {closed} vs {tail}");
        }
    }

    #[test]
    fn full_rank_prob_zero_before_k() {
        let chain = PhaseChain::new(4, 0.2).unwrap();
        for n in 0..4 {
            assert_eq!(chain.prob_full_rank(n), 0.0);
        }
        assert!(chain.prob_full_rank(4) > 0.0);
    }

    #[test]
    fn full_rank_prob_dimension_one_closed_form() {
        let chain = PhaseChain::new(1, 0.3).unwrap();
        for n in 1..30u64 {
            let expect = 1.0 - 0.3f64.powi(n as i32);
            assert!((chain.prob_full_rank(n) - expect).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn full_rank_prob_monotone_and_limits_to_one() {
        let chain = PhaseChain::new(8, 0.5).unwrap();
        let mut prev = 0.0;
        for n in 0..200 {
            let cur = chain.prob_full_rank(n);
            assert!(cur + 1e-15 >= prev, "not monotone at n={n}");
            prev = cur;
        }
        assert!((1.0 - chain.prob_full_rank(8 + 2000)).abs() < 1e-9);
    }

    #[test]
    fn full_rank_prob_monotone_in_capacity() {
        for n in [6u64, 10, 20] {
            let mut prev = 1.0;
            for tenths in 0..=9 {
                let p = tenths as f64 / 10.0;
                let cur = PhaseChain::new(5, p).unwrap().prob_full_rank(n);
                assert!(cur <= prev + 1e-15, "p={p} n={n}");
                prev = cur;
            }
        }
    }

    #[test]
    fn deficiency_curve_matches_pointwise_queries() {
        let chain = PhaseChain::new(5, 0.4).unwrap();
        let curve = chain.deficiency_curve(40);
        for (n, &s) in curve.iter().enumerate() {
            assert!((s - chain.prob_rank_deficient(n as u64)).abs() < 1e-13);
        }
    }

    #[test]
    fn rank_gap_zero_at_dimension_one() {
        for p in [0.0, 0.1, 0.5, 0.9] {
            assert_eq!(expected_rank_gap(1, p).unwrap(), 0.0);
        }
    }

    #[test]
    fn rank_gap_noiseless_two_bits() {
        // Fountain chain from rank 0: step to 1 surely, then to 2 w.p. 2/3,
        // so the mean is 5/3 and the gap is 1/3.
        let gap = expected_rank_gap(2, 0.0).unwrap();
        assert!((gap - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn rank_gap_nonnegative_low_erasure() {
        for k in 1..=100 {
            let gap = expected_rank_gap(k, 0.1).unwrap();
            assert!(gap >= -1e-12, "k={k} gap={gap}");
        }
    }

    #[test]
    fn distributions_normalize() {
        for n in [0u64, 3, 5, 9, 30] {
            let st = st_rank_distribution(5, 0.3, n).unwrap();
            assert!((st.total_mass() - 1.0).abs() < 1e-12);
            let fo = fountain_rank_distribution(5, 0.3, n).unwrap();
            assert!((fo.total_mass() - 1.0).abs() < 1e-12);
            for dist in [&st, &fo] {
                assert!(dist.probs().iter().all(|&q| q >= 0.0));
            }
        }
    }

    #[test]
    fn systematic_distribution_is_binomial_at_k() {
        let dist = st_rank_distribution(4, 0.25, 4).unwrap();
        for j in 0..=4usize {
            let expect = binomial_pmf(j, 4, 0.75).unwrap();
            assert!((dist.prob(j) - expect).abs() < 1e-14);
        }
        assert!((dist.mean() - 3.0).abs() < 1e-12);
    }
}
