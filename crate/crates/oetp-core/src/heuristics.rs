//! Constructive pipeline: greedy assignment, ejection-chain local search and
//! schedule-pool restriction.
//!
//! The intended flow is `greedy_assign` for a feasible start, optionally
//! `local_search_improve` to tighten it, then `restrict_pool` to shrink the
//! schedule set before handing the incumbent to the exact solver as a warm
//! start.

use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;

use crate::model::{CandidateId, Instance, ResidualTracker, ResourceId, ScheduleId, Solution};
use crate::rng::{seeded_rng, uniform_below};

/// Order in which greedy scans candidates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CandidateOrder {
    /// Ascending compatibility-list size, ties by ascending id.
    MostConstrainedFirst,
    /// Ascending candidate id.
    InputOrder,
}

/// Rule picking a schedule for the current candidate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScheduleChoice {
    /// Among fitting schedules, maximize the minimum residual capacity over
    /// consumed resources after the assignment; ties by ascending id.
    MaxMinResidual,
    /// First fitting schedule in id order.
    FirstFeasible,
}

/// Configuration of [`greedy_assign`]. Output is fully determined by the
/// instance, the policy and the optional tie seed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GreedyPolicy {
    pub candidate_order: CandidateOrder,
    pub schedule_choice: ScheduleChoice,
    /// When set, ties in candidate order and schedule choice are broken by a
    /// seeded draw instead of by ascending id.
    pub tie_seed: Option<u64>,
}

impl Default for GreedyPolicy {
    fn default() -> Self {
        GreedyPolicy {
            candidate_order: CandidateOrder::MostConstrainedFirst,
            schedule_choice: ScheduleChoice::MaxMinResidual,
            tie_seed: None,
        }
    }
}

fn candidate_scan_order(
    instance: &Instance,
    order: CandidateOrder,
    rng: Option<&mut ChaCha8Rng>,
) -> Vec<CandidateId> {
    let mut ids: Vec<CandidateId> = (0..instance.num_candidates() as u32)
        .map(CandidateId::new)
        .collect();
    if order == CandidateOrder::InputOrder {
        return ids;
    }
    ids.sort_by_key(|c| (instance.compat[c.index()].len(), c.get()));
    if let Some(rng) = rng {
        // Shuffle runs of equal degree so the seed decides their order.
        let mut run_start = 0;
        while run_start < ids.len() {
            let degree = instance.compat[ids[run_start].index()].len();
            let mut run_end = run_start + 1;
            while run_end < ids.len() && instance.compat[ids[run_end].index()].len() == degree {
                run_end += 1;
            }
            for i in (run_start + 1..run_end).rev() {
                let j = run_start + uniform_below(rng, (i - run_start + 1) as u64) as usize;
                ids.swap(i, j);
            }
            run_start = run_end;
        }
    }
    ids
}

fn pick_schedule(
    instance: &Instance,
    tracker: &ResidualTracker,
    options: &[ScheduleId],
    choice: ScheduleChoice,
    rng: Option<&mut ChaCha8Rng>,
) -> Option<ScheduleId> {
    match choice {
        ScheduleChoice::FirstFeasible => options
            .iter()
            .copied()
            .find(|&sid| tracker.fits(instance, sid)),
        ScheduleChoice::MaxMinResidual => {
            let mut best_key = i64::MIN;
            let mut tied: Vec<ScheduleId> = Vec::new();
            for &sid in options {
                let Some(headroom) = tracker.headroom_after(instance, sid) else {
                    continue;
                };
                if headroom > best_key {
                    best_key = headroom;
                    tied.clear();
                    tied.push(sid);
                } else if headroom == best_key {
                    tied.push(sid);
                }
            }
            match (tied.len(), rng) {
                (0, _) => None,
                (1, _) | (_, None) => Some(tied[0]),
                (n, Some(rng)) => Some(tied[uniform_below(rng, n as u64) as usize]),
            }
        }
    }
}

/// Builds a feasible solution in one pass over the candidates.
///
/// The result is maximal with respect to single additions: residuals only
/// shrink during the pass, so a candidate skipped for lack of capacity can
/// never fit later.
pub fn greedy_assign(instance: &Instance, policy: &GreedyPolicy) -> Solution {
    let mut rng = policy.tie_seed.map(seeded_rng);
    let order = candidate_scan_order(instance, policy.candidate_order, rng.as_mut());
    let mut tracker = ResidualTracker::new(instance);
    let mut solution = Solution::empty(instance.num_candidates());
    for candidate in order {
        let options = &instance.compat[candidate.index()];
        if let Some(sid) = pick_schedule(
            instance,
            &tracker,
            options,
            policy.schedule_choice,
            rng.as_mut(),
        ) {
            tracker.assign(instance, sid);
            solution.set(candidate, Some(sid));
        }
    }
    solution
}

fn lists_intersect(a: &[ResourceId], b: &[ResourceId]) -> bool {
    let (mut ia, mut ib) = (0, 0);
    while ia < a.len() && ib < b.len() {
        match a[ia].cmp(&b[ib]) {
            core::cmp::Ordering::Less => ia += 1,
            core::cmp::Ordering::Greater => ib += 1,
            core::cmp::Ordering::Equal => return true,
        }
    }
    false
}

/// Improves a feasible solution with 1-chain ejections.
///
/// A move assigns one unassigned candidate directly, or unassigns one
/// assigned candidate, assigns the blocked one in the freed space and
/// reassigns the ejected candidate elsewhere. Moves are applied on first
/// improvement, scanning candidates, schedules and ejection victims in
/// ascending id order, restarting after every applied move. Each direct-fit
/// check and each ejection attempt consumes one unit of `budget`.
///
/// The start solution must be feasible.
pub fn local_search_improve(instance: &Instance, start: &Solution, budget: u64) -> Solution {
    let mut tracker = ResidualTracker::from_solution(instance, start)
        .expect("local search requires a feasible start solution");
    let mut solution = start.clone();
    let mut remaining = budget;
    let n = instance.num_candidates();

    'restart: loop {
        for u in 0..n {
            let cu = CandidateId::new(u as u32);
            if solution.get(cu).is_some() {
                continue;
            }
            let options = &instance.compat[u];

            for &j in options {
                if remaining == 0 {
                    return solution;
                }
                remaining -= 1;
                if tracker.fits(instance, j) {
                    tracker.assign(instance, j);
                    solution.set(cu, Some(j));
                    continue 'restart;
                }
            }

            for &j in options {
                let deficient: Vec<_> = instance.usage[j.index()]
                    .iter()
                    .copied()
                    .filter(|&rid| tracker.residual(rid) < 1)
                    .collect();
                for v in 0..n {
                    let cv = CandidateId::new(v as u32);
                    let Some(old) = solution.get(cv) else {
                        continue;
                    };
                    // Ejecting v only helps if its schedule feeds a resource
                    // that j is short of.
                    if !lists_intersect(&instance.usage[old.index()], &deficient) {
                        continue;
                    }
                    if remaining == 0 {
                        return solution;
                    }
                    remaining -= 1;
                    tracker.unassign(instance, old);
                    if tracker.fits(instance, j) {
                        tracker.assign(instance, j);
                        let relocation = instance.compat[v]
                            .iter()
                            .copied()
                            .find(|&w| tracker.fits(instance, w));
                        if let Some(w) = relocation {
                            tracker.assign(instance, w);
                            solution.set(cu, Some(j));
                            solution.set(cv, Some(w));
                            continue 'restart;
                        }
                        tracker.unassign(instance, j);
                    }
                    tracker.assign(instance, old);
                }
            }
        }
        break;
    }
    solution
}

/// Why a schedule survived [`restrict_pool`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KeptReason {
    UsedByIncumbent,
    UnsaturatedExtra,
}

/// The schedules kept by a pool restriction, sorted by id, each tagged with
/// the reason it was kept.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PoolRestriction {
    kept: Vec<(ScheduleId, KeptReason)>,
}

impl PoolRestriction {
    pub fn kept(&self) -> &[(ScheduleId, KeptReason)] {
        &self.kept
    }

    pub fn schedule_ids(&self) -> impl Iterator<Item = ScheduleId> + '_ {
        self.kept.iter().map(|&(sid, _)| sid)
    }

    pub fn len(&self) -> usize {
        self.kept.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kept.is_empty()
    }

    pub fn contains(&self, schedule: ScheduleId) -> bool {
        self.kept
            .binary_search_by_key(&schedule, |&(sid, _)| sid)
            .is_ok()
    }
}

/// Restricts the schedule pool to the incumbent's schedules plus up to
/// `extra` additional unsaturated ones.
///
/// A schedule is unsaturated when every resource it consumes has residual
/// capacity at least 1 under the incumbent; a schedule consuming nothing is
/// trivially unsaturated. Extras are ranked by descending minimum residual
/// over consumed resources, ties by ascending id. The returned sub-instance
/// keeps the original id space and filters compatibility lists to kept
/// schedules, so the incumbent stays feasible on it.
///
/// The incumbent must be feasible.
pub fn restrict_pool(
    instance: &Instance,
    incumbent: &Solution,
    extra: usize,
) -> (PoolRestriction, Instance) {
    let residual = instance
        .residual_capacities(incumbent)
        .expect("pool restriction requires a feasible incumbent");

    let num_schedules = instance.num_schedules();
    let mut used = vec![false; num_schedules];
    for (_, sid) in incumbent.assigned_pairs() {
        used[sid.index()] = true;
    }

    let mut ranked: Vec<(i64, ScheduleId)> = Vec::new();
    for (j, _) in used.iter().enumerate().filter(|&(_, &u)| !u) {
        let mut min_residual = i64::MAX;
        for rid in &instance.usage[j] {
            min_residual = min_residual.min(residual[rid.index()]);
        }
        if min_residual >= 1 {
            ranked.push((min_residual, ScheduleId::new(j as u32)));
        }
    }
    ranked.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    ranked.truncate(extra);

    let mut kept: Vec<(ScheduleId, KeptReason)> = used
        .iter()
        .enumerate()
        .filter(|&(_, &u)| u)
        .map(|(j, _)| (ScheduleId::new(j as u32), KeptReason::UsedByIncumbent))
        .collect();
    kept.extend(
        ranked
            .into_iter()
            .map(|(_, sid)| (sid, KeptReason::UnsaturatedExtra)),
    );
    kept.sort_by_key(|&(sid, _)| sid);

    let mut keep_mask = vec![false; num_schedules];
    for &(sid, _) in &kept {
        keep_mask[sid.index()] = true;
    }
    let compat = instance
        .compat
        .iter()
        .map(|list| {
            list.iter()
                .copied()
                .filter(|sid| keep_mask[sid.index()])
                .collect()
        })
        .collect();

    let sub = Instance {
        capacities: instance.capacities.clone(),
        compat,
        usage: instance.usage.clone(),
        labels: instance.labels.clone(),
    };

    (PoolRestriction { kept }, sub)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sid(raw: u32) -> ScheduleId {
        ScheduleId::new(raw)
    }

    fn cid(raw: u32) -> CandidateId {
        CandidateId::new(raw)
    }

    fn rid(raw: u32) -> ResourceId {
        ResourceId::new(raw)
    }

    fn t1() -> Instance {
        Instance {
            capacities: vec![2, 1],
            compat: vec![vec![sid(0), sid(1)], vec![sid(0)], vec![sid(1)]],
            usage: vec![vec![rid(0)], vec![rid(0), rid(1)]],
            labels: None,
        }
    }

    /// Four candidates where greedy walks into a trap that one ejection
    /// fixes: candidate 0 takes the schedule consuming both contended
    /// resources, blocking candidate 1; moving 0 aside fits everyone.
    fn swap_instance() -> Instance {
        Instance {
            capacities: vec![1, 1, 1, 1],
            compat: vec![
                vec![sid(0), sid(1)],
                vec![sid(2), sid(3)],
                vec![sid(4)],
                vec![sid(5)],
            ],
            usage: vec![
                vec![rid(0), rid(1)],
                vec![rid(0)],
                vec![rid(1)],
                vec![rid(1)],
                vec![rid(2)],
                vec![rid(3)],
            ],
            labels: None,
        }
    }

    fn assert_maximal(instance: &Instance, solution: &Solution) {
        let tracker = ResidualTracker::from_solution(instance, solution).unwrap();
        for (i, assigned) in solution.assignment().iter().enumerate() {
            if assigned.is_some() {
                continue;
            }
            for &sid in &instance.compat[i] {
                assert!(
                    !tracker.fits(instance, sid),
                    "candidate {i} could still take schedule {sid}"
                );
            }
        }
    }

    #[test]
    fn greedy_default_policy_on_t1() {
        let inst = t1();
        let sol = greedy_assign(&inst, &GreedyPolicy::default());
        assert_eq!(sol.assignment(), &[None, Some(sid(0)), Some(sid(1))]);
        assert_eq!(sol.value(), 2);
        assert!(inst.evaluate(&sol).unwrap().feasible);
        assert_maximal(&inst, &sol);
    }

    #[test]
    fn greedy_input_order_shares_a_schedule() {
        let inst = t1();
        let policy = GreedyPolicy {
            candidate_order: CandidateOrder::InputOrder,
            ..GreedyPolicy::default()
        };
        let sol = greedy_assign(&inst, &policy);
        // Candidate 0 grabs s0 (headroom 1 beats s1's 0), candidate 1 joins
        // it on s0, candidate 2 is starved of r0.
        assert_eq!(sol.assignment(), &[Some(sid(0)), Some(sid(0)), None]);
        assert_eq!(sol.value(), 2);
        assert_maximal(&inst, &sol);
    }

    #[test]
    fn greedy_first_feasible_on_t1() {
        let inst = t1();
        let policy = GreedyPolicy {
            schedule_choice: ScheduleChoice::FirstFeasible,
            ..GreedyPolicy::default()
        };
        let sol = greedy_assign(&inst, &policy);
        assert_eq!(sol.value(), 2);
        assert_maximal(&inst, &sol);
    }

    #[test]
    fn greedy_single_forced_assignment() {
        let inst = Instance {
            capacities: vec![1],
            compat: vec![vec![sid(0)]],
            usage: vec![vec![rid(0)]],
            labels: None,
        };
        let sol = greedy_assign(&inst, &GreedyPolicy::default());
        assert_eq!(sol.value(), 1);
        assert_eq!(sol.get(cid(0)), Some(sid(0)));
    }

    #[test]
    fn greedy_leaves_empty_compat_unassigned() {
        let mut inst = t1();
        inst.compat.push(Vec::new());
        let sol = greedy_assign(&inst, &GreedyPolicy::default());
        assert_eq!(sol.get(cid(3)), None);
        assert_eq!(sol.value(), 2);
    }

    #[test]
    fn greedy_tie_seed_is_deterministic() {
        let inst = swap_instance();
        let policy = GreedyPolicy {
            tie_seed: Some(7),
            ..GreedyPolicy::default()
        };
        let a = greedy_assign(&inst, &policy);
        let b = greedy_assign(&inst, &policy);
        assert_eq!(a, b);
        assert!(inst.evaluate(&a).unwrap().feasible);
        assert_maximal(&inst, &a);
    }

    #[test]
    fn greedy_walks_into_swap_trap() {
        let inst = swap_instance();
        let sol = greedy_assign(&inst, &GreedyPolicy::default());
        assert_eq!(
            sol.assignment(),
            &[Some(sid(0)), None, Some(sid(4)), Some(sid(5))]
        );
        assert_eq!(sol.value(), 3);
    }

    #[test]
    fn local_search_fixes_swap_trap() {
        let inst = swap_instance();
        let greedy = greedy_assign(&inst, &GreedyPolicy::default());
        let improved = local_search_improve(&inst, &greedy, 10_000);
        assert_eq!(improved.value(), 4);
        assert!(inst.evaluate(&improved).unwrap().feasible);
    }

    #[test]
    fn local_search_keeps_optimum_unchanged() {
        let inst = t1();
        let optimal = Solution::from_assignment(vec![None, Some(sid(0)), Some(sid(1))]);
        let out = local_search_improve(&inst, &optimal, 10_000);
        assert_eq!(out.value(), 2);
    }

    #[test]
    fn local_search_from_empty_start() {
        let inst = t1();
        let out = local_search_improve(&inst, &Solution::empty(3), 10_000);
        assert!(inst.evaluate(&out).unwrap().feasible);
        assert!(out.value() >= 1);
    }

    #[test]
    fn local_search_respects_zero_budget() {
        let inst = swap_instance();
        let greedy = greedy_assign(&inst, &GreedyPolicy::default());
        let out = local_search_improve(&inst, &greedy, 0);
        assert_eq!(out, greedy);
    }

    #[test]
    fn restrict_pool_keeps_used_and_unsaturated() {
        let inst = t1();
        let incumbent = Solution::from_assignment(vec![None, Some(sid(0)), None]);
        let (pool, sub) = restrict_pool(&inst, &incumbent, 1);
        assert_eq!(
            pool.kept(),
            &[
                (sid(0), KeptReason::UsedByIncumbent),
                (sid(1), KeptReason::UnsaturatedExtra),
            ]
        );
        assert_eq!(sub.compat, inst.compat);
        assert!(sub.validate().is_empty());
    }

    #[test]
    fn restrict_pool_with_saturated_residuals() {
        let inst = t1();
        let incumbent = Solution::from_assignment(vec![Some(sid(1)), Some(sid(0)), None]);
        let (pool, sub) = restrict_pool(&inst, &incumbent, 5);
        assert_eq!(
            pool.kept(),
            &[
                (sid(0), KeptReason::UsedByIncumbent),
                (sid(1), KeptReason::UsedByIncumbent),
            ]
        );
        assert!(inst.evaluate(&incumbent).unwrap().feasible);
        assert_eq!(sub.compat, inst.compat);
    }

    #[test]
    fn restrict_pool_empty_incumbent_zero_extra() {
        let inst = t1();
        let (pool, sub) = restrict_pool(&inst, &Solution::empty(3), 0);
        assert!(pool.is_empty());
        assert!(sub.compat.iter().all(|list| list.is_empty()));
        assert_eq!(sub.num_schedules(), inst.num_schedules());
    }

    #[test]
    fn restrict_pool_ranks_by_headroom() {
        // Three spare schedules with distinct headroom; only the two widest
        // survive extra = 2.
        let inst = Instance {
            capacities: vec![3, 2, 1],
            compat: vec![vec![sid(0), sid(1), sid(2), sid(3)]],
            usage: vec![vec![rid(0)], vec![rid(1)], vec![rid(2)], vec![rid(0)]],
            labels: None,
        };
        let (pool, _) = restrict_pool(&inst, &Solution::empty(1), 2);
        assert_eq!(
            pool.kept(),
            &[
                (sid(0), KeptReason::UnsaturatedExtra),
                (sid(3), KeptReason::UnsaturatedExtra),
            ]
        );
    }

    #[test]
    fn pool_contains_lookup() {
        let inst = t1();
        let incumbent = Solution::from_assignment(vec![None, Some(sid(0)), None]);
        let (pool, _) = restrict_pool(&inst, &incumbent, 0);
        assert!(pool.contains(sid(0)));
        assert!(!pool.contains(sid(1)));
        assert_eq!(pool.len(), 1);
    }
}
