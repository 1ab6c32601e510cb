//! Seeded synthetic instance generation and aggregate statistics.
//!
//! Instances mimic the statistical shape of a large oral-examination
//! campaign: a few thousand candidates and schedules, compatibility lists of
//! ~1.1 million relations, schedules touching a handful of the ~100 shared
//! resources, and capacities calibrated so that supply roughly matches the
//! demand of a full assignment. Schedules, resources and candidates cluster
//! into segments — the synthetic analogue of languages or sites — so that
//! contention is local the way it is in a real campaign: a candidate's
//! options concentrate on one segment, each schedule drains one resource of
//! its own segment, and segment populations deliberately do not quite match
//! segment supply. All randomness flows through one seeded ChaCha8 stream,
//! so a config generates byte-identical instances on every platform.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand_chacha::ChaCha8Rng;

use crate::model::{Instance, ResourceId, ScheduleId};
use crate::rng::{sample_distinct, sample_weighted_distinct, seeded_rng, uniform_range, unit_f64};

/// Exponent of the power-law schedule popularity in skewed mode: the weight
/// of schedule j is (j + 1)^(-0.8).
const SKEW_EXPONENT: f64 = -0.8;

/// Number of segments schedules, resources and candidates are clustered
/// into at scale (fewer on tiny instances so no segment is empty). Real
/// campaigns cluster by language or site; segments reproduce the local
/// contention that clustering causes.
const SEGMENTS: u64 = 24;

/// Fraction of a candidate's compatibility list drawn from the segment the
/// candidate belongs to; the rest is drawn from everywhere else.
const IN_SEGMENT_FRACTION: f64 = 0.8;

/// Relative amplitude of the mismatch between a segment's candidate
/// population and its schedule supply. Capacities are calibrated against the
/// population-agnostic expectation, so tilting populations oversubscribes
/// some segments — the main source of the residue a greedy pass leaves.
const GROUP_IMBALANCE: f64 = 0.25;

/// Ratio between the heaviest and lightest candidate degree weight
/// (log-uniform). Real campaigns mix tightly constrained candidates (a
/// handful of compatible plannings, all inside one segment) with flexible
/// ones; that captive tail is what oversubscription strands.
const DEGREE_SPREAD: f64 = 450.0;

/// Relative amplitude of the per-resource capacity noise on healthy
/// resources. It skews individual capacities away from their expected demand
/// (the total is renormalized afterwards), adding irregular bottlenecks on
/// top of the segment-level imbalance.
const CAPACITY_NOISE: f64 = 0.25;

/// Probability that a resource suffers an availability collapse and keeps
/// zero capacity. A few unstaffable rows (a rare-language jury, a room
/// block lost to works) are what genuinely strand the captive candidates
/// routed through them — ambient noise alone is routed around by everyone
/// else, because candidates are free to substitute schedules.
const OUTAGE_PROB: f64 = 0.12;

/// Distribution of candidate compatibility over schedules.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DegreeShape {
    /// Every schedule equally likely.
    Uniform,
    /// Low-index schedules more popular, power-law weights.
    Skewed,
}

/// Statistical description of a synthetic instance family.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub num_candidates: u32,
    pub num_schedules: u32,
    pub num_resources: u32,
    /// Total compatibility relations to generate (hit exactly).
    pub target_relations: u64,
    /// Inclusive range of resources consumed per schedule.
    pub resources_per_schedule: (u32, u32),
    /// ρ: total capacity relative to the expected demand of assigning every
    /// candidate. 1.0 makes supply match demand, which leaves a small
    /// residue of unassignable candidates under greedy.
    pub capacity_factor: f64,
    pub degree_shape: DegreeShape,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            seed: 0,
            num_candidates: 7804,
            num_schedules: 7759,
            num_resources: 103,
            target_relations: 1_123_321,
            resources_per_schedule: (1, 4),
            capacity_factor: 1.0,
            degree_shape: DegreeShape::Uniform,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum GeneratorError {
    TargetRelationsTooLarge {
        target: u64,
        max: u128,
    },
    ResourceRangeInvalid {
        lo: u32,
        hi: u32,
        num_resources: u32,
    },
    CapacityFactorInvalid {
        rho: f64,
    },
}

impl fmt::Display for GeneratorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorError::TargetRelationsTooLarge { target, max } => write!(
                f,
                "target_relations {target} exceeds num_candidates * num_schedules = {max}"
            ),
            GeneratorError::ResourceRangeInvalid {
                lo,
                hi,
                num_resources,
            } => write!(
                f,
                "resources_per_schedule {lo}..={hi} invalid for {num_resources} resources"
            ),
            GeneratorError::CapacityFactorInvalid { rho } => {
                write!(f, "capacity_factor {rho} must be finite and positive")
            }
        }
    }
}

impl core::error::Error for GeneratorError {}

/// Generates a valid instance matching the config exactly: stated counts,
/// exactly `target_relations` relations, per-schedule usage sizes inside the
/// configured range, and capacities summing to roughly ρ times the expected
/// demand. Deterministic in the seed.
pub fn generate_instance(config: &GeneratorConfig) -> Result<Instance, GeneratorError> {
    let c = config.num_candidates as u64;
    let p = config.num_schedules as u64;
    let r = config.num_resources as u64;

    let max_relations = c as u128 * p as u128;
    if config.target_relations as u128 > max_relations {
        return Err(GeneratorError::TargetRelationsTooLarge {
            target: config.target_relations,
            max: max_relations,
        });
    }
    let (lo, hi) = config.resources_per_schedule;
    if lo > hi || hi as u64 > r {
        return Err(GeneratorError::ResourceRangeInvalid {
            lo,
            hi,
            num_resources: config.num_resources,
        });
    }
    if !(config.capacity_factor.is_finite() && config.capacity_factor > 0.0) {
        return Err(GeneratorError::CapacityFactorInvalid {
            rho: config.capacity_factor,
        });
    }

    let mut rng = seeded_rng(config.seed);
    let segments = SEGMENTS.min(p);

    // Usage: every schedule consumes one "home" resource from its own
    // segment's resource block plus a uniform remainder. The home row ties a
    // segment's service capacity to a small resource set, so oversubscribing
    // the segment actually bites instead of diffusing over the whole pool.
    let mut usage: Vec<Vec<ResourceId>> = Vec::with_capacity(p as usize);
    for g in 0..segments {
        let (j0, j1) = segment_bounds(p, segments, g);
        let (t0, t1) = segment_bounds(r, segments, g);
        for _ in j0..j1 {
            let size = uniform_range(&mut rng, lo as u64, hi as u64) as usize;
            let rows = if size == 0 {
                Vec::new()
            } else if t1 > t0 {
                let home = uniform_range(&mut rng, t0, t1 - 1);
                let rest = sample_distinct(&mut rng, r - 1, size - 1);
                let mut rows = Vec::with_capacity(size);
                let mut placed = false;
                for x in rest {
                    let k = if x < home { x } else { x + 1 };
                    if !placed && home < k {
                        rows.push(home);
                        placed = true;
                    }
                    rows.push(k);
                }
                if !placed {
                    rows.push(home);
                }
                rows
            } else {
                // Fewer resources than segments: no home block, draw global.
                sample_distinct(&mut rng, r, size)
            };
            usage.push(
                rows.into_iter()
                    .map(|k| ResourceId::new(k as u32))
                    .collect(),
            );
        }
    }

    let weights: Option<Vec<f64>> = match config.degree_shape {
        DegreeShape::Uniform => None,
        DegreeShape::Skewed => Some(
            (0..p)
                .map(|j| libm::pow(j as f64 + 1.0, SKEW_EXPONENT))
                .collect(),
        ),
    };

    // Candidate populations per segment: proportional to the segment's share
    // of schedule popularity, tilted by a deliberate imbalance. Capacities
    // below are calibrated without knowledge of the tilt, so tilted-up
    // segments end up short on supply.
    let seg_weight: Vec<f64> = (0..segments)
        .map(|g| {
            let (j0, j1) = segment_bounds(p, segments, g);
            let supply = match &weights {
                None => (j1 - j0) as f64,
                Some(w) => w[j0 as usize..j1 as usize].iter().sum(),
            };
            let tilt = 1.0 + GROUP_IMBALANCE * (unit_f64(&mut rng) * 2.0 - 1.0);
            supply * tilt
        })
        .collect();
    let group = draw_groups(&mut rng, c as usize, &seg_weight);
    let degree = spread_degrees(&mut rng, c, p, config.target_relations);

    let mut compat: Vec<Vec<ScheduleId>> = Vec::with_capacity(c as usize);
    for (i, &d) in degree.iter().enumerate() {
        let picks = if d == 0 {
            Vec::new()
        } else {
            let block = segment_bounds(p, segments, group[i]);
            segment_sample(&mut rng, p, block, d, &weights)
        };
        compat.push(
            picks
                .into_iter()
                .map(|j| ScheduleId::new(j as u32))
                .collect(),
        );
    }

    // Capacity of resource k starts from its share of a full assignment's
    // expected demand: candidates land on schedules proportionally to the
    // popularity weights, and each assignment consumes one unit of each
    // resource its schedule touches. A per-resource noise factor then skews
    // individual capacities away from their expected demand — that is what
    // creates bottlenecks — and a final renormalization keeps the total at
    // ρ times the expected total demand.
    let mut member_weight = vec![0.0f64; r as usize];
    let mut total_weight = 0.0f64;
    for (j, rows) in usage.iter().enumerate() {
        let w = weights.as_ref().map_or(1.0, |w| w[j]);
        total_weight += w;
        for k in rows {
            member_weight[k.index()] += w;
        }
    }
    let mut capacities = vec![0i64; r as usize];
    if total_weight > 0.0 {
        let raw: Vec<f64> = member_weight
            .iter()
            .map(|&m| {
                let outage = unit_f64(&mut rng) < OUTAGE_PROB;
                let u = unit_f64(&mut rng);
                let noise = if outage {
                    0.0
                } else {
                    1.0 + CAPACITY_NOISE * (u * 2.0 - 1.0)
                };
                (m / total_weight) * noise
            })
            .collect();
        let raw_total: f64 = raw.iter().sum();
        let expected_share_total: f64 = member_weight.iter().sum::<f64>() / total_weight;
        if raw_total > 0.0 {
            let scale = config.capacity_factor * c as f64 * expected_share_total / raw_total;
            for (cap, share) in capacities.iter_mut().zip(&raw) {
                *cap = libm::floor(share * scale + 0.5) as i64;
            }
        }
    }

    let instance = Instance {
        capacities,
        compat,
        usage,
        labels: None,
    };
    debug_assert!(instance.validate().is_empty());
    Ok(instance)
}

/// Half-open range of ids segment `g` owns when `n` ids are split into
/// `segments` contiguous near-equal blocks.
fn segment_bounds(n: u64, segments: u64, g: u64) -> (u64, u64) {
    (g * n / segments, (g + 1) * n / segments)
}

/// One weighted segment draw per candidate.
fn draw_groups(rng: &mut ChaCha8Rng, c: usize, seg_weight: &[f64]) -> Vec<u64> {
    if seg_weight.is_empty() {
        return vec![0; c];
    }
    let mut prefix: Vec<f64> = Vec::with_capacity(seg_weight.len());
    let mut total = 0.0f64;
    for &w in seg_weight {
        total += w;
        prefix.push(total);
    }
    (0..c)
        .map(|_| {
            let t = unit_f64(rng) * total;
            prefix
                .partition_point(|&x| x <= t)
                .min(seg_weight.len() - 1) as u64
        })
        .collect()
}

/// Per-candidate compatibility degrees that sum to `target` exactly.
///
/// Every candidate draws a log-uniform weight spanning a [`DEGREE_SPREAD`]
/// ratio, quotas are floored, and the largest fractional remainders absorb
/// the difference — so the mix of constrained and flexible candidates is
/// wide but the relation total is hit to the unit. Degrees stay within
/// `0..=p`, and nobody is left without options when the target allows one
/// per candidate.
fn spread_degrees(rng: &mut ChaCha8Rng, c: u64, p: u64, target: u64) -> Vec<usize> {
    if c == 0 {
        return Vec::new();
    }
    if target == 0 {
        return vec![0; c as usize];
    }
    let floor_deg: u64 = if target >= c { 1 } else { 0 };

    let log_spread = libm::log(DEGREE_SPREAD);
    let w: Vec<f64> = (0..c)
        .map(|_| libm::exp(unit_f64(rng) * log_spread))
        .collect();
    let total_w: f64 = w.iter().sum();

    let mut deg: Vec<u64> = Vec::with_capacity(c as usize);
    let mut frac: Vec<f64> = Vec::with_capacity(c as usize);
    let mut sum: u64 = 0;
    for &wi in &w {
        let quota = target as f64 * wi / total_w;
        let fl = libm::floor(quota);
        let d = (fl as u64).clamp(floor_deg, p);
        frac.push(quota - fl);
        deg.push(d);
        sum += d;
    }

    // Largest-remainder correction: hand the missing units to the largest
    // fractional parts (or claw back from the smallest), cycling until the
    // clamped total lands on the target. Reachable by construction since
    // c * floor_deg <= target <= c * p.
    let mut order: Vec<usize> = (0..c as usize).collect();
    if sum < target {
        order.sort_unstable_by(|&a, &b| frac[b].total_cmp(&frac[a]).then(a.cmp(&b)));
        let mut need = target - sum;
        while need > 0 {
            let before = need;
            for &i in &order {
                if need == 0 {
                    break;
                }
                if deg[i] < p {
                    deg[i] += 1;
                    need -= 1;
                }
            }
            assert!(need < before, "relation target {target} unreachable");
        }
    } else if sum > target {
        order.sort_unstable_by(|&a, &b| frac[a].total_cmp(&frac[b]).then(a.cmp(&b)));
        let mut excess = sum - target;
        while excess > 0 {
            let before = excess;
            for &i in &order {
                if excess == 0 {
                    break;
                }
                if deg[i] > floor_deg {
                    deg[i] -= 1;
                    excess -= 1;
                }
            }
            assert!(excess < before, "relation target {target} unreachable");
        }
    }
    deg.into_iter().map(|d| d as usize).collect()
}

/// `d` distinct schedule ids biased toward the candidate's own segment
/// `[s0, s1)`: [`IN_SEGMENT_FRACTION`] of the picks come from inside, the
/// rest from the complement, both without replacement. Returns a sorted
/// list.
fn segment_sample(
    rng: &mut ChaCha8Rng,
    p: u64,
    (s0, s1): (u64, u64),
    d: usize,
    weights: &Option<Vec<f64>>,
) -> Vec<u64> {
    let seg_len = s1 - s0;
    let comp_len = p - seg_len;
    let mut k_in = (libm::floor(IN_SEGMENT_FRACTION * d as f64 + 0.5) as u64).min(seg_len);
    let mut k_out = d as u64 - k_in;
    if k_out > comp_len {
        k_out = comp_len;
        k_in = d as u64 - comp_len;
    }

    let ins: Vec<u64> = match weights {
        None => sample_distinct(rng, seg_len, k_in as usize),
        Some(w) => sample_weighted_distinct(rng, &w[s0 as usize..s1 as usize], k_in as usize),
    }
    .into_iter()
    .map(|x| x + s0)
    .collect();

    let outs: Vec<u64> = match weights {
        None => sample_distinct(rng, comp_len, k_out as usize),
        Some(w) => {
            let mut comp_w: Vec<f64> = Vec::with_capacity(comp_len as usize);
            comp_w.extend_from_slice(&w[..s0 as usize]);
            comp_w.extend_from_slice(&w[s1 as usize..]);
            sample_weighted_distinct(rng, &comp_w, k_out as usize)
        }
    }
    .into_iter()
    .map(|x| if x < s0 { x } else { x + seg_len })
    .collect();

    let mut merged = Vec::with_capacity(d);
    let (mut ai, mut bi) = (0, 0);
    while ai < ins.len() && bi < outs.len() {
        if ins[ai] < outs[bi] {
            merged.push(ins[ai]);
            ai += 1;
        } else {
            merged.push(outs[bi]);
            bi += 1;
        }
    }
    merged.extend_from_slice(&ins[ai..]);
    merged.extend_from_slice(&outs[bi..]);
    merged
}

/// Aggregate statistics of an instance.
#[derive(Clone, Debug, PartialEq)]
pub struct InstanceStats {
    pub num_candidates: usize,
    pub num_schedules: usize,
    pub num_resources: usize,
    pub relations: u64,
    /// Entry d counts the candidates with exactly d compatible schedules.
    pub compat_degree_histogram: Vec<u64>,
    /// Entry s counts the schedules consuming exactly s resources.
    pub usage_size_histogram: Vec<u64>,
    pub capacity_total: i64,
    /// Per resource: expected demand of a full assignment (each candidate
    /// picking uniformly among its options) divided by capacity.
    pub demand_supply_ratio: Vec<f64>,
}

impl InstanceStats {
    pub fn mean_compat_degree(&self) -> f64 {
        if self.num_candidates == 0 {
            0.0
        } else {
            self.relations as f64 / self.num_candidates as f64
        }
    }
}

/// Exact aggregate statistics of a valid instance.
pub fn instance_stats(instance: &Instance) -> InstanceStats {
    let relations = instance.relations();

    let max_degree = instance.compat.iter().map(|l| l.len()).max().unwrap_or(0);
    let mut compat_degree_histogram = if instance.compat.is_empty() {
        Vec::new()
    } else {
        vec![0u64; max_degree + 1]
    };
    for list in &instance.compat {
        compat_degree_histogram[list.len()] += 1;
    }

    let max_size = instance.usage.iter().map(|l| l.len()).max().unwrap_or(0);
    let mut usage_size_histogram = if instance.usage.is_empty() {
        Vec::new()
    } else {
        vec![0u64; max_size + 1]
    };
    for list in &instance.usage {
        usage_size_histogram[list.len()] += 1;
    }

    let mut demand = vec![0.0f64; instance.num_resources()];
    for list in &instance.compat {
        if list.is_empty() {
            continue;
        }
        let w = 1.0 / list.len() as f64;
        for j in list {
            for k in &instance.usage[j.index()] {
                demand[k.index()] += w;
            }
        }
    }
    let demand_supply_ratio = demand
        .iter()
        .zip(instance.capacities.iter())
        .map(|(&d, &cap)| {
            if d == 0.0 {
                0.0
            } else if cap <= 0 {
                f64::INFINITY
            } else {
                d / cap as f64
            }
        })
        .collect();

    InstanceStats {
        num_candidates: instance.num_candidates(),
        num_schedules: instance.num_schedules(),
        num_resources: instance.num_resources(),
        relations,
        compat_degree_histogram,
        usage_size_histogram,
        capacity_total: instance.capacities.iter().sum(),
        demand_supply_ratio,
    }
}

/// Small random instance for oracle-scale testing: at most 10 candidates, 8
/// schedules and 6 resources, capacities 0..=3, compatibility degrees at
/// most 4, so exhaustive enumeration stays below the default brute-force
/// leaf cap.
pub fn random_compact_instance(seed: u64) -> Instance {
    let mut rng = seeded_rng(seed);
    let c = uniform_range(&mut rng, 0, 10);
    let p = uniform_range(&mut rng, 0, 8);
    let r = uniform_range(&mut rng, 0, 6);

    let capacities = (0..r)
        .map(|_| uniform_range(&mut rng, 0, 3) as i64)
        .collect();
    let usage = (0..p)
        .map(|_| {
            let size = uniform_range(&mut rng, 0, r.min(4)) as usize;
            sample_distinct(&mut rng, r, size)
                .into_iter()
                .map(|k| ResourceId::new(k as u32))
                .collect()
        })
        .collect();
    let compat = (0..c)
        .map(|_| {
            let d = uniform_range(&mut rng, 0, p.min(4)) as usize;
            sample_distinct(&mut rng, p, d)
                .into_iter()
                .map(|j| ScheduleId::new(j as u32))
                .collect()
        })
        .collect();

    Instance {
        capacities,
        compat,
        usage,
        labels: None,
    }
}
