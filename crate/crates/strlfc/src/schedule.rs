//! Optimizer for finite decoding-time schedules: choose m strictly increasing
//! inspection times minimizing the expected blocklength bound subject to a
//! target error probability.
//!
//! With P_n the full-rank probability at time n and s_n = 1 - P_n, the
//! objective over times t_1 < ... < t_m is
//!
//!   N = t_m - sum_i (t_{i+1} - t_i) P_{t_i} = t_1 + sum_i (t_{i+1} - t_i) s_{t_i},
//!
//! and the constraint is s_{t_m} <= delta. An exchange argument pins the
//! final time: feasibility forces t_m >= the smallest feasible time, counting
//! forces t_m >= m, and any schedule exceeding that bound can drop its last
//! look and re-insert one lower without raising N. The solver therefore fixes
//! t_m = max(min feasible time, m) and runs a shortest-path dynamic program
//! over the interior times, with every time in [1, t_m] admitted — schedules
//! that are tight on slots really do use looks before the systematic phase
//! ends. An unrestricted exhaustive search validates this on small instances.

use crate::bounds::{early_termination_adjust, st_fountain_achievability};
use crate::error::{Error, Result};
use crate::phase_type::PhaseChain;
use serde::Serialize;

/// How a schedule was found.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SolverMethod {
    /// Shortest-path dynamic program; optimal within the restricted space.
    Dp,
    /// Full enumeration up to a final-time cap; the validation oracle.
    Exhaustive,
}

/// An optimized decoding schedule and its certificates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScheduleSolution {
    pub times: Vec<u64>,
    /// Expected blocklength bound N for this schedule.
    pub objective: f64,
    /// Error bound 1 - P[full rank at the final time]; at most the target.
    pub error_bound: f64,
    /// k / N.
    pub rate: f64,
    pub method: SolverMethod,
}

fn validate_problem(k: usize, p: f64, delta: f64) -> Result<()> {
    if k == 0 {
        return Err(Error::ZeroDimension);
    }
    if !(0.0..1.0).contains(&p) {
        return Err(Error::InvalidErasureProb(p));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidTargetError(delta));
    }
    Ok(())
}

/// Smallest n with 1 - P[full rank at n] <= delta, by exponential growth then
/// binary search on the monotone deficiency probability.
pub fn min_feasible_final_time(k: usize, p: f64, delta: f64) -> Result<u64> {
    validate_problem(k, p, delta)?;
    let chain = PhaseChain::new(k, p)?;
    let feasible = |n: u64| chain.prob_rank_deficient(n) <= delta;
    let k = k as u64;
    let mut hi = k;
    let mut lo = k - 1; // times below k always have deficiency 1 > delta
    while !feasible(hi) {
        lo = hi;
        hi = k + 2 * (hi - k) + 1;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

fn validate_times(times: &[u64]) -> Result<()> {
    if times.is_empty() || times[0] < 1 || times.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidSchedule);
    }
    Ok(())
}

fn objective_from_curve(curve: &[f64], times: &[u64]) -> (f64, f64) {
    let last = *times.last().expect("validated non-empty");
    let mut objective = last as f64;
    for w in times.windows(2) {
        let full_rank = 1.0 - curve[w[0] as usize];
        objective -= (w[1] - w[0]) as f64 * full_rank;
    }
    (objective, curve[last as usize])
}

/// Recomputes (expected blocklength bound, error bound) for a schedule.
pub fn schedule_objective(k: usize, p: f64, times: &[u64]) -> Result<(f64, f64)> {
    if k == 0 {
        return Err(Error::ZeroDimension);
    }
    if !(0.0..1.0).contains(&p) {
        return Err(Error::InvalidErasureProb(p));
    }
    validate_times(times)?;
    let chain = PhaseChain::new(k, p)?;
    let curve = chain.deficiency_curve(*times.last().unwrap());
    Ok(objective_from_curve(&curve, times))
}

/// Solves for an optimal m-time schedule at error target delta.
pub fn optimize_schedule(
    k: usize,
    p: f64,
    m: usize,
    delta: f64,
    method: SolverMethod,
) -> Result<ScheduleSolution> {
    validate_problem(k, p, delta)?;
    if m == 0 {
        return Err(Error::InvalidSchedule);
    }
    match method {
        SolverMethod::Dp => dp_schedule(k, p, m, delta),
        SolverMethod::Exhaustive => {
            let cap = min_feasible_final_time(k, p, delta)? + m as u64 + 5;
            exhaustive_schedule(k, p, m, delta, cap)
        }
    }
}

// Index arithmetic over two DP layers reads clearer than iterator chains here.
#[allow(clippy::needless_range_loop)]
fn dp_schedule(k: usize, p: f64, m: usize, delta: f64) -> Result<ScheduleSolution> {
    let final_time = min_feasible_final_time(k, p, delta)?.max(m as u64);
    let chain = PhaseChain::new(k, p)?;
    let curve = chain.deficiency_curve(final_time);

    let times = if m == 1 {
        vec![final_time]
    } else {
        // Offsets 0..=span map to times 1..=final_time.
        let span = (final_time - 1) as usize;
        let time_of = |j: usize| j as u64 + 1;
        let deficiency = |j: usize| curve[j + 1];
        // suffix[r][j]: cheapest way to place r more times after offset j,
        // the last landing on the final time. choice[r][j]: the next offset,
        // smallest among minimizers so reconstruction is lexicographic.
        let mut suffix = vec![vec![f64::INFINITY; span + 1]; m];
        let mut choice = vec![vec![usize::MAX; span + 1]; m];
        suffix[0][span] = 0.0;
        for r in 1..m {
            for j in 0..=span - r {
                let here = deficiency(j);
                let mut best = f64::INFINITY;
                let mut best_next = usize::MAX;
                for next in j + 1..=span - (r - 1) {
                    let cost = (next - j) as f64 * here + suffix[r - 1][next];
                    if cost < best {
                        best = cost;
                        best_next = next;
                    }
                }
                suffix[r][j] = best;
                choice[r][j] = best_next;
            }
        }
        let mut best_total = f64::INFINITY;
        let mut first = usize::MAX;
        for j in 0..=span - (m - 1) {
            let total = time_of(j) as f64 + suffix[m - 1][j];
            if total < best_total {
                best_total = total;
                first = j;
            }
        }
        let mut times = Vec::with_capacity(m);
        let mut j = first;
        times.push(time_of(j));
        for r in (1..m).rev() {
            j = choice[r][j];
            times.push(time_of(j));
        }
        times
    };

    let (objective, error_bound) = objective_from_curve(&curve, &times);
    Ok(ScheduleSolution {
        rate: k as f64 / objective,
        times,
        objective,
        error_bound,
        method: SolverMethod::Dp,
    })
}

/// Enumerates every strictly increasing m-tuple with times in
/// [1, max_final_time], keeping the cheapest feasible schedule
/// (lexicographically smallest on ties). No floor on early times and no
/// pinning of the final time, so this is a true oracle for the DP.
pub fn exhaustive_schedule(
    k: usize,
    p: f64,
    m: usize,
    delta: f64,
    max_final_time: u64,
) -> Result<ScheduleSolution> {
    validate_problem(k, p, delta)?;
    if m == 0 {
        return Err(Error::InvalidSchedule);
    }
    if (max_final_time as usize) < m {
        return Err(Error::ScheduleSpaceEmpty {
            m,
            slots: max_final_time as usize,
        });
    }
    let chain = PhaseChain::new(k, p)?;
    let curve = chain.deficiency_curve(max_final_time);

    let mut best: Option<(f64, Vec<u64>)> = None;
    let mut combo: Vec<u64> = (1..=m as u64).collect();
    loop {
        let last = combo[m - 1];
        if curve[last as usize] <= delta {
            let (objective, _) = objective_from_curve(&curve, &combo);
            // Strict improvement keeps the lexicographically first optimum.
            if best.as_ref().is_none_or(|(b, _)| objective < *b) {
                best = Some((objective, combo.clone()));
            }
        }
        // Advance to the next combination in lexicographic order.
        let mut advanced = false;
        for idx in (0..m).rev() {
            if combo[idx] < max_final_time - (m - 1 - idx) as u64 {
                combo[idx] += 1;
                for i in idx + 1..m {
                    combo[i] = combo[i - 1] + 1;
                }
                advanced = true;
                break;
            }
        }
        if !advanced {
            let (objective, times) = best.ok_or(Error::InfeasibleWithinCap {
                cap: max_final_time,
            })?;
            let error_bound = curve[*times.last().unwrap() as usize];
            return Ok(ScheduleSolution {
                rate: k as f64 / objective,
                times,
                objective,
                error_bound,
                method: SolverMethod::Exhaustive,
            });
        }
    }
}

/// One point of the rate-versus-m sweep.
#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub k: usize,
    pub m: usize,
    pub solution: ScheduleSolution,
    /// Rate of the unbounded-schedule reference at the same error target
    /// (early-termination adjusted).
    pub adjusted_unbounded_rate: f64,
}

/// Optimal rates for every (k, m) pair.
pub fn rate_vs_m_sweep(
    k_list: &[usize],
    p: f64,
    m_list: &[usize],
    delta: f64,
) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for &k in k_list {
        let unbounded = st_fountain_achievability(k, p)?.blocklength;
        let adjusted_unbounded_rate = k as f64 / early_termination_adjust(unbounded, delta)?;
        for &m in m_list {
            rows.push(SweepRow {
                k,
                m,
                solution: optimize_schedule(k, p, m, delta, SolverMethod::Dp)?,
                adjusted_unbounded_rate,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn min_feasible_single_bit_powers_of_two() {
        // Deficiency for k=1 is p^n; with delta = 2^-10 and p = 1/2 the
        // smallest feasible time is exactly 10.
        let n = min_feasible_final_time(1, 0.5, 2f64.powi(-10)).unwrap();
        assert_eq!(n, 10);
    }

    #[test]
    fn min_feasible_loose_target_is_k() {
        for k in 1..=5 {
            assert_eq!(min_feasible_final_time(k, 0.2, 0.999).unwrap(), k as u64);
        }
    }

    #[test]
    fn min_feasible_brackets() {
        for (k, p, delta) in [(1, 0.5, 1e-3), (3, 0.3, 1e-2), (6, 0.9, 0.05)] {
            let chain = PhaseChain::new(k, p).unwrap();
            let n = min_feasible_final_time(k, p, delta).unwrap();
            assert!(chain.prob_rank_deficient(n) <= delta);
            assert!(chain.prob_rank_deficient(n - 1) > delta);
        }
    }

    #[test]
    fn single_look_solution_hand_value() {
        let sol = optimize_schedule(1, 0.5, 1, 1e-3, SolverMethod::Dp).unwrap();
        assert_eq!(sol.times, vec![10]);
        assert!((sol.objective - 10.0).abs() < 1e-12);
        assert!((sol.rate - 0.1).abs() < 1e-12);
    }

    #[test]
    fn extra_looks_never_hurt() {
        for (k, p) in [(1usize, 0.5), (3, 0.3), (4, 0.5)] {
            let mut prev = f64::INFINITY;
            for m in 1..=4 {
                let sol = optimize_schedule(k, p, m, 1e-2, SolverMethod::Dp).unwrap();
                assert!(sol.objective <= prev + 1e-12, "k={k} p={p} m={m}");
                prev = sol.objective;
            }
        }
    }

    #[test]
    fn tighter_targets_cost_blocklength() {
        for m in 1..=3 {
            let loose = optimize_schedule(3, 0.5, m, 1e-1, SolverMethod::Dp).unwrap();
            let tight = optimize_schedule(3, 0.5, m, 1e-3, SolverMethod::Dp).unwrap();
            assert!(tight.objective >= loose.objective - 1e-12, "m={m}");
        }
    }

    #[test]
    fn dp_matches_exhaustive_sample() {
        for (k, m, p, delta) in [
            (2usize, 2usize, 0.5, 1e-2),
            (3, 3, 0.3, 1e-1),
            (4, 2, 0.5, 1e-1),
            (1, 3, 0.3, 1e-2),
            // Slot-tight instances where the optimum uses looks before the
            // systematic phase completes.
            (1, 3, 0.3, 1e-1),
            (2, 3, 0.5, 0.6),
        ] {
            let dp = optimize_schedule(k, p, m, delta, SolverMethod::Dp).unwrap();
            let ex = exhaustive_schedule(k, p, m, delta, 40).unwrap();
            assert_eq!(dp.times, ex.times, "k={k} m={m} p={p} delta={delta}");
            assert!((dp.objective - ex.objective).abs() < 1e-10);
        }
    }

    #[test]
    fn objective_reproduces_from_stored_schedule() {
        for m in 1..=4 {
            let sol = optimize_schedule(4, 0.4, m, 1e-2, SolverMethod::Dp).unwrap();
            let (objective, error_bound) = schedule_objective(4, 0.4, &sol.times).unwrap();
            assert!((objective - sol.objective).abs() <= 1e-12);
            assert!((error_bound - sol.error_bound).abs() <= 1e-12);
            assert!(sol.error_bound <= 1e-2);
            assert!(sol.objective >= 4.0);
        }
    }

    #[test]
    fn tight_slots_move_looks_before_the_systematic_phase_ends() {
        // k=1, p=0.5, delta=1e-3: the smallest feasible final time is 10, so
        // 16 looks only fit by starting at time 1 and ending at 16.
        let sol = optimize_schedule(1, 0.5, 16, 1e-3, SolverMethod::Dp).unwrap();
        assert_eq!(sol.times, (1..=16).collect::<Vec<u64>>());
        let expect: f64 = 1.0 + (1..=15).map(|t| 0.5f64.powi(t)).sum::<f64>();
        assert!((sol.objective - expect).abs() < 1e-12);
    }

    #[test]
    fn sweep_covers_every_pair_and_rechecks_feasibility() {
        let rows = rate_vs_m_sweep(&[1, 2], 0.5, &[1, 16], 1e-3).unwrap();
        assert_eq!(rows.len(), 4);
        for row in &rows {
            let (_, err) = schedule_objective(row.k, 0.5, &row.solution.times).unwrap();
            assert!(err <= 1e-3);
            assert!(row.adjusted_unbounded_rate > 0.0);
        }
    }

    #[test]
    fn invalid_problems_rejected() {
        assert!(optimize_schedule(0, 0.5, 1, 1e-2, SolverMethod::Dp).is_err());
        assert!(optimize_schedule(2, 1.0, 1, 1e-2, SolverMethod::Dp).is_err());
        assert!(optimize_schedule(2, 0.5, 0, 1e-2, SolverMethod::Dp).is_err());
        assert!(optimize_schedule(2, 0.5, 1, 0.0, SolverMethod::Dp).is_err());
        assert!(optimize_schedule(2, 0.5, 1, 1.0, SolverMethod::Dp).is_err());
    }
}
