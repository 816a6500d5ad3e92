//! The canonical tester for k-cycle-freeness over `F_p`.
//!
//! A k-cycle of `(f_1, ..., f_k)` is a tuple `(x_1, ..., x_k)` with zero sum
//! and `f_j(x_j) = 1` for all `j`. Functions are given by their supports.
//! Ordered counts drive the tester's hit probability; distances are computed
//! on the cycle hypergraph.
//!
//! Distance only ever needs `1 -> 0` flips: turning a `0` into a `1` can only
//! create cycles, so any cycle-free function reachable with some set of
//! changes is reachable with its `1 -> 0` part alone. The distance is therefore
//! the size of a minimum hitting set of the cycles, viewed as sets of
//! `(function, point)` pairs.

use std::collections::{HashMap, HashSet};

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::check_budget;
use crate::exec;
use crate::ffield::is_prime;
use crate::pmf::LocalPmf;
use crate::rational::Exact;
use crate::{Error, Result, Vector};

/// Largest cycle hypergraph handed to the exact hitting-set search.
pub const MAX_EXACT_CYCLES: usize = 10_000;
/// Iterations per independently seeded simulation stream.
pub const SIMULATION_CHUNK: u64 = 1 << 14;
/// Cap on the number of support points an instance transform may produce.
pub const MAX_SUPPORT_POINTS: u64 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawInstance")]
pub struct CycleInstance {
    pub p: u32,
    pub k: usize,
    pub n: usize,
    /// `supports[j]` lists the points where `f_{j+1}` is `1`.
    pub supports: Vec<Vec<Vector>>,
    /// One function: every support is the same set.
    pub single_mode: bool,
}

#[derive(Deserialize)]
struct RawInstance {
    p: u32,
    k: usize,
    n: usize,
    supports: Vec<Vec<Vector>>,
    #[serde(default)]
    single_mode: bool,
}

impl TryFrom<RawInstance> for CycleInstance {
    type Error = Error;

    fn try_from(raw: RawInstance) -> Result<Self> {
        CycleInstance::new(raw.p, raw.k, raw.n, raw.supports, raw.single_mode)
    }
}

impl CycleInstance {
    pub fn new(p: u32, k: usize, n: usize, supports: Vec<Vec<Vector>>, single_mode: bool) -> Result<Self> {
        if !is_prime(p as u64) {
            return Err(Error::invalid(format!("{p} is not prime")));
        }
        if k < 3 {
            return Err(Error::invalid("cycle length k must be at least 3"));
        }
        if supports.len() != k {
            return Err(Error::invalid(format!(
                "expected {k} supports, found {}",
                supports.len()
            )));
        }
        if (p as f64).powi(n as i32) > u64::MAX as f64 / 2.0 {
            return Err(Error::Range(format!("domain {p}^{n} is too large")));
        }
        for (j, s) in supports.iter().enumerate() {
            let mut seen = HashSet::with_capacity(s.len());
            for v in s {
                if v.len() != n || v.iter().any(|&x| x >= p) {
                    return Err(Error::invalid(format!("support {j} has a point outside F_{p}^{n}")));
                }
                if !seen.insert(v) {
                    return Err(Error::invalid(format!("support {j} repeats the point {v:?}")));
                }
            }
        }
        if single_mode {
            let first: HashSet<&Vector> = supports[0].iter().collect();
            if supports
                .iter()
                .any(|s| s.len() != first.len() || s.iter().any(|v| !first.contains(v)))
            {
                return Err(Error::invalid("single-mode supports must all be the same set"));
            }
        }
        Ok(CycleInstance {
            p,
            k,
            n,
            supports,
            single_mode,
        })
    }

    /// `p^n`.
    pub fn domain_size(&self) -> u64 {
        (self.p as u64).pow(self.n as u32)
    }

    fn ordered_work(&self) -> u128 {
        self.supports[..self.k - 1]
            .iter()
            .fold(1u128, |acc, s| acc.saturating_mul(s.len() as u128))
    }
}

/// Position `j` takes the vectors `x^{(j)}_i` of every tuple.
pub fn pmf_to_instance(pmf: &LocalPmf) -> Result<CycleInstance> {
    let supports = (0..pmf.k)
        .map(|j| {
            let mut seen = HashSet::new();
            pmf.tuples
                .iter()
                .map(|t| t[j].clone())
                .filter(|v| seen.insert(v.clone()))
                .collect()
        })
        .collect();
    CycleInstance::new(pmf.p, pmf.k, pmf.n, supports, false)
}

fn neg_sum(p: u32, sum: &[u32]) -> Vector {
    sum.iter().map(|&x| if x == 0 { 0 } else { p - x }).collect()
}

fn last_lookup(inst: &CycleInstance) -> HashMap<&[u32], usize> {
    inst.supports[inst.k - 1]
        .iter()
        .enumerate()
        .map(|(i, v)| (v.as_slice(), i))
        .collect()
}

/// Calls `visit` on every ordered cycle (as support indices) whose first
/// index is `first`, in lexicographic order. `non_decreasing` restricts to
/// non-decreasing indices, which enumerates multisets in single mode.
fn scan_from(
    inst: &CycleInstance,
    last: &HashMap<&[u32], usize>,
    first: usize,
    non_decreasing: bool,
    visit: &mut dyn FnMut(&[usize]),
) {
    fn rec(
        inst: &CycleInstance,
        last: &HashMap<&[u32], usize>,
        non_decreasing: bool,
        idx: &mut Vec<usize>,
        sum: &mut Vector,
        visit: &mut dyn FnMut(&[usize]),
    ) {
        let pos = idx.len();
        let p = inst.p;
        if pos == inst.k - 1 {
            if let Some(&i) = last.get(neg_sum(p, sum).as_slice()) {
                if !non_decreasing || i >= idx[pos - 1] {
                    idx.push(i);
                    visit(idx);
                    idx.pop();
                }
            }
            return;
        }
        let start = if non_decreasing { idx[pos - 1] } else { 0 };
        for i in start..inst.supports[pos].len() {
            let saved = sum.clone();
            for (a, &x) in sum.iter_mut().zip(&inst.supports[pos][i]) {
                *a = (*a + x) % p;
            }
            idx.push(i);
            rec(inst, last, non_decreasing, idx, sum, visit);
            idx.pop();
            *sum = saved;
        }
    }
    let mut idx = vec![first];
    let mut sum = inst.supports[0][first].clone();
    rec(inst, last, non_decreasing, &mut idx, &mut sum, visit);
}

/// Ordered tuples `(x_1, ..., x_k)`; the work is `prod_{j<k} |supp f_j|`.
pub fn count_cycles(inst: &CycleInstance, budget: u64) -> Result<u64> {
    check_budget("cycle count", inst.ordered_work(), budget)?;
    let last = last_lookup(inst);
    Ok(exec::sum(inst.supports[0].len(), |first| {
        let mut count = 0u64;
        scan_from(inst, &last, first, false, &mut |_| count += 1);
        count
    }))
}

/// Cycles as sets: multisets of support points in single mode, ordered
/// tuples otherwise (each point is tied to its function).
pub fn count_unordered_cycles(inst: &CycleInstance, budget: u64) -> Result<u64> {
    if !inst.single_mode {
        return count_cycles(inst, budget);
    }
    check_budget("cycle count", inst.ordered_work(), budget)?;
    // index order must agree across positions
    let norm = CycleInstance {
        supports: vec![inst.supports[0].clone(); inst.k],
        ..inst.clone()
    };
    let last = last_lookup(&norm);
    Ok(exec::sum(norm.supports[0].len(), |first| {
        let mut count = 0u64;
        scan_from(&norm, &last, first, true, &mut |_| count += 1);
        count
    }))
}

/// Every ordered cycle as support indices, lexicographically.
pub fn list_cycles(inst: &CycleInstance, budget: u64) -> Result<Vec<Vec<usize>>> {
    check_budget("cycle listing", inst.ordered_work(), budget)?;
    let last = last_lookup(inst);
    let parts = exec::map(inst.supports[0].len(), |first| {
        let mut out = Vec::new();
        scan_from(inst, &last, first, false, &mut |c| out.push(c.to_vec()));
        out
    });
    Ok(parts.into_iter().flatten().collect())
}

/// `count_cycles / p^{(k-1)n}`: one tester iteration's hit probability.
pub fn rejection_probability(inst: &CycleInstance, budget: u64) -> Result<Exact> {
    let count = count_cycles(inst, budget)?;
    let space = BigUint::from(inst.p).pow(((inst.k - 1) * inst.n) as u32);
    Ok(Exact::new(BigUint::from(count), space))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub seed: u64,
    pub iterations: u64,
    pub chunk: u64,
    pub hits: u64,
    pub found: bool,
    /// 1-based iteration of the first hit.
    pub first_hit: Option<u64>,
    pub empirical_rate: f64,
}

/// Chunk `c` of [`SIMULATION_CHUNK`] iterations draws from ChaCha8 seeded
/// with `seed` on stream `c`, so the report does not depend on thread count.
pub fn simulate_canonical(inst: &CycleInstance, iterations: u64, seed: u64) -> Result<SimulationReport> {
    if iterations == 0 {
        return Err(Error::invalid("iterations must be at least 1"));
    }
    let members: Vec<HashSet<&[u32]>> = inst
        .supports
        .iter()
        .map(|s| s.iter().map(Vec::as_slice).collect())
        .collect();
    let (p, k, n) = (inst.p, inst.k, inst.n);
    let chunks = iterations.div_ceil(SIMULATION_CHUNK);
    let results = exec::map(chunks as usize, |c| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(c as u64);
        let start = c as u64 * SIMULATION_CHUNK;
        let len = SIMULATION_CHUNK.min(iterations - start);
        let mut hits = 0u64;
        let mut first = None;
        let mut xs = vec![vec![0u32; n]; k];
        for it in 0..len {
            let mut sum = vec![0u32; n];
            for x in xs.iter_mut().take(k - 1) {
                for (coord, acc) in x.iter_mut().zip(sum.iter_mut()) {
                    *coord = rng.random_range(0..p);
                    *acc = (*acc + *coord) % p;
                }
            }
            xs[k - 1] = neg_sum(p, &sum);
            if xs.iter().zip(&members).all(|(x, m)| m.contains(x.as_slice())) {
                hits += 1;
                first.get_or_insert(start + it + 1);
            }
        }
        (hits, first)
    });
    let hits = results.iter().map(|r| r.0).sum();
    let first_hit = results.iter().find_map(|r| r.1);
    Ok(SimulationReport {
        seed,
        iterations,
        chunk: SIMULATION_CHUNK,
        hits,
        found: hits > 0,
        first_hit,
        empirical_rate: hits as f64 / iterations as f64,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Change {
    /// 0-based function index; always 0 in single mode.
    pub function: usize,
    pub point: Vector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distance {
    pub cycles: u64,
    pub changes: u64,
    /// `changes / p^n`.
    pub epsilon: Exact,
    pub hitting_set: Vec<Change>,
}

/// Cycles as sorted, deduplicated element ids with the id decoder.
fn cycle_hypergraph(inst: &CycleInstance, budget: u64) -> Result<(Vec<Vec<u32>>, Vec<Change>)> {
    let cycles = list_cycles(inst, budget)?;
    let mut offsets = Vec::with_capacity(inst.k);
    let mut elements = Vec::new();
    if inst.single_mode {
        offsets = vec![0; inst.k];
        elements.extend(inst.supports[0].iter().map(|v| Change {
            function: 0,
            point: v.clone(),
        }));
    } else {
        for (j, s) in inst.supports.iter().enumerate() {
            offsets.push(elements.len());
            elements.extend(s.iter().map(|v| Change {
                function: j,
                point: v.clone(),
            }));
        }
    }
    // single mode: positions may list the shared set in different orders
    let canon: Vec<HashMap<&[u32], usize>> = if inst.single_mode {
        inst.supports
            .iter()
            .map(|_| {
                inst.supports[0]
                    .iter()
                    .enumerate()
                    .map(|(i, v)| (v.as_slice(), i))
                    .collect()
            })
            .collect()
    } else {
        Vec::new()
    };
    let sets = cycles
        .iter()
        .map(|c| {
            let mut ids: Vec<u32> = c
                .iter()
                .enumerate()
                .map(|(j, &i)| {
                    if inst.single_mode {
                        canon[j][inst.supports[j][i].as_slice()] as u32
                    } else {
                        (offsets[j] + i) as u32
                    }
                })
                .collect();
            ids.sort_unstable();
            ids.dedup();
            ids
        })
        .collect::<Vec<_>>();
    let sets = if inst.single_mode {
        let mut seen = HashSet::new();
        sets.into_iter().filter(|s| seen.insert(s.clone())).collect()
    } else {
        sets
    };
    Ok((sets, elements))
}

/// Greedy packing of pairwise-disjoint cycles in enumeration order; a lower
/// bound on the distance (times `p^n`).
pub fn disjoint_cycle_lower_bound(inst: &CycleInstance, budget: u64) -> Result<u64> {
    let (sets, elements) = cycle_hypergraph(inst, budget)?;
    Ok(disjoint_packing(&sets, elements.len(), |_| true) as u64)
}

fn disjoint_packing(sets: &[Vec<u32>], universe: usize, mut keep: impl FnMut(usize) -> bool) -> usize {
    let mut used = vec![false; universe];
    let mut count = 0;
    for (c, set) in sets.iter().enumerate() {
        if keep(c) && set.iter().all(|&e| !used[e as usize]) {
            set.iter().for_each(|&e| used[e as usize] = true);
            count += 1;
        }
    }
    count
}

struct HittingSearch<'a> {
    sets: &'a [Vec<u32>],
    chosen: Vec<bool>,
    excluded: Vec<bool>,
    picked: Vec<u32>,
    best: Vec<u32>,
    nodes: u64,
    budget: u64,
}

impl HittingSearch<'_> {
    fn unhit(&self) -> Vec<usize> {
        (0..self.sets.len())
            .filter(|&c| !self.sets[c].iter().any(|&e| self.chosen[e as usize]))
            .collect()
    }

    fn greedy(&mut self) {
        let mut chosen = self.chosen.clone();
        let mut picked = Vec::new();
        loop {
            let open: Vec<usize> = (0..self.sets.len())
                .filter(|&c| !self.sets[c].iter().any(|&e| chosen[e as usize]))
                .collect();
            if open.is_empty() {
                break;
            }
            let mut freq = vec![0usize; chosen.len()];
            for &c in &open {
                self.sets[c].iter().for_each(|&e| freq[e as usize] += 1);
            }
            let e = (0..freq.len())
                .max_by(|&a, &b| freq[a].cmp(&freq[b]).then(b.cmp(&a)))
                .expect("elements");
            chosen[e] = true;
            picked.push(e as u32);
        }
        self.best = picked;
    }

    fn run(&mut self) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::Budget {
                what: "hitting-set nodes",
                needed: self.nodes as u128,
                budget: self.budget,
            });
        }
        let open = self.unhit();
        if open.is_empty() {
            if self.picked.len() < self.best.len() {
                self.best = self.picked.clone();
            }
            return Ok(());
        }
        let available = |c: usize, ex: &[bool]| self.sets[c].iter().filter(|&&e| !ex[e as usize]).count();
        if open.iter().any(|&c| available(c, &self.excluded) == 0) {
            return Ok(());
        }
        let excluded = &self.excluded;
        let sets = self.sets;
        let mut used = vec![false; excluded.len()];
        let mut lb = 0;
        for &c in &open {
            let live: Vec<u32> = sets[c].iter().copied().filter(|&e| !excluded[e as usize]).collect();
            if live.iter().all(|&e| !used[e as usize]) {
                live.iter().for_each(|&e| used[e as usize] = true);
                lb += 1;
            }
        }
        if self.picked.len() + lb >= self.best.len() {
            return Ok(());
        }
        let target = *open
            .iter()
            .min_by_key(|&&c| available(c, &self.excluded))
            .expect("open cycles");
        let branch: Vec<u32> = self.sets[target]
            .iter()
            .copied()
            .filter(|&e| !self.excluded[e as usize])
            .collect();
        let mut newly_excluded = Vec::new();
        for e in branch {
            self.chosen[e as usize] = true;
            self.picked.push(e);
            let res = self.run();
            self.picked.pop();
            self.chosen[e as usize] = false;
            res?;
            self.excluded[e as usize] = true;
            newly_excluded.push(e);
        }
        for e in newly_excluded {
            self.excluded[e as usize] = false;
        }
        Ok(())
    }
}

/// Minimum number of `1 -> 0` changes making the instance cycle-free, by
/// branch and bound (greedy upper bound, disjoint-packing lower bound).
/// Fails with a budget error above [`MAX_EXACT_CYCLES`] cycles or `budget`
/// search nodes; [`disjoint_cycle_lower_bound`] still applies then.
pub fn exact_distance(inst: &CycleInstance, budget: u64) -> Result<Distance> {
    let (sets, elements) = cycle_hypergraph(inst, budget)?;
    check_budget("cycles for exact distance", sets.len() as u128, MAX_EXACT_CYCLES as u64)?;
    let mut search = HittingSearch {
        sets: &sets,
        chosen: vec![false; elements.len()],
        excluded: vec![false; elements.len()],
        picked: Vec::new(),
        best: Vec::new(),
        nodes: 0,
        budget,
    };
    search.greedy();
    search.run()?;
    let mut best = search.best;
    best.sort_unstable();
    let changes = best.len() as u64;
    Ok(Distance {
        cycles: sets.len() as u64,
        changes,
        epsilon: Exact::new(BigUint::from(changes), BigUint::from(inst.domain_size())),
        hitting_set: best.into_iter().map(|e| elements[e as usize].clone()).collect(),
    })
}

/// `(k - 1 - log_p d) / (1 - log_p d)` for a capacity `1 < d < p`.
pub fn lower_bound_exponent(k: usize, p: u32, d: f64) -> Result<f64> {
    if !(d > 1.0 && d < p as f64) {
        return Err(Error::invalid(format!(
            "capacity {d} must lie strictly between 1 and {p}"
        )));
    }
    let rate = d.ln() / (p as f64).ln();
    Ok((k as f64 - 1.0 - rate) / (1.0 - rate))
}

/// Binary entropy.
pub fn entropy(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
}

/// `(k - 1 - H(1/k)/log_2 p) / (1 - H(1/k)/log_2 p)`.
pub fn g_exponent(k: usize, p: u32) -> Result<f64> {
    if k < 3 {
        return Err(Error::invalid("cycle length k must be at least 3"));
    }
    if !is_prime(p as u64) {
        return Err(Error::invalid(format!("{p} is not prime")));
    }
    let rate = entropy(1.0 / k as f64) / (p as f64).log2();
    Ok((k as f64 - 1.0 - rate) / (1.0 - rate))
}

/// One function on `F_p^{n+k-1}`: `f(y, z) = f_j(y)` when `z` is the `j`-th of
/// `e_1, ..., e_{k-1}, -(e_1 + ... + e_{k-1})`, and `0` otherwise. When `p`
/// does not divide `k`, its multiset cycles correspond one-to-one with the
/// input's cycles.
pub fn reduce_to_single(inst: &CycleInstance) -> Result<CycleInstance> {
    let (p, k) = (inst.p, inst.k);
    if (k as u64).is_multiple_of(p as u64) {
        return Err(Error::invalid(format!(
            "p = {p} divides k = {k}; use the zero tester for this case instead"
        )));
    }
    let tags: Vec<Vector> = (0..k)
        .map(|j| {
            if j + 1 < k {
                (0..k - 1).map(|i| (i == j) as u32).collect()
            } else {
                vec![p - 1; k - 1]
            }
        })
        .collect();
    let mut support: Vec<Vector> = inst
        .supports
        .iter()
        .zip(&tags)
        .flat_map(|(s, z)| s.iter().map(move |y| y.iter().chain(z).copied().collect()))
        .collect();
    support.sort();
    CycleInstance::new(p, k, inst.n + k - 1, vec![support; k], true)
}

/// Pads every point with each `z` in `F_p^{n_target - n}` of zero coordinate
/// sum. The ordered cycle count grows by `(p^{n_target - n - 1})^{k - 1}`.
pub fn extend_domain(inst: &CycleInstance, n_target: usize) -> Result<CycleInstance> {
    if n_target <= inst.n {
        return Err(Error::invalid(format!(
            "target dimension {n_target} must exceed {}",
            inst.n
        )));
    }
    let p = inst.p;
    let delta = n_target - inst.n;
    let pads_count = (p as u64).checked_pow(delta as u32 - 1);
    let largest = inst.supports.iter().map(Vec::len).max().unwrap_or(0) as u64;
    match pads_count.and_then(|c| c.checked_mul(largest.max(1))) {
        Some(total) if total <= MAX_SUPPORT_POINTS => {}
        _ => return Err(Error::Range("extended supports are too large".into())),
    }
    // free coordinates enumerate F_p^{delta-1}; the last one closes the sum
    let pads: Vec<Vector> = (0..pads_count.expect("checked"))
        .map(|mut code| {
            let mut z = vec![0u32; delta];
            for slot in z[..delta - 1].iter_mut().rev() {
                *slot = (code % p as u64) as u32;
                code /= p as u64;
            }
            let s: u64 = z.iter().map(|&x| x as u64).sum();
            z[delta - 1] = ((p as u64 - s % p as u64) % p as u64) as u32;
            z
        })
        .collect();
    let supports = inst
        .supports
        .iter()
        .map(|s| {
            s.iter()
                .flat_map(|x| pads.iter().map(move |z| x.iter().chain(z).copied().collect()))
                .collect()
        })
        .collect();
    CycleInstance::new(p, inst.k, n_target, supports, inst.single_mode)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZeroTestOutcome {
    pub accept: bool,
    pub queries: u64,
    /// 1-based query that landed in the support.
    pub first_hit: Option<u64>,
}

/// Queries `ceil(3 / eps)` uniform points and rejects on any support hit.
pub fn zero_tester(support: &[Vector], p: u32, n: usize, eps: f64, seed: u64) -> Result<ZeroTestOutcome> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid("eps must lie in (0, 1)"));
    }
    if !is_prime(p as u64) {
        return Err(Error::invalid(format!("{p} is not prime")));
    }
    let members: HashSet<&[u32]> = support.iter().map(Vec::as_slice).collect();
    let queries = (3.0 / eps).ceil() as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = vec![0u32; n];
    for q in 1..=queries {
        x.iter_mut().for_each(|c| *c = rng.random_range(0..p));
        if members.contains(x.as_slice()) {
            return Ok(ZeroTestOutcome {
                accept: false,
                queries,
                first_hit: Some(q),
            });
        }
    }
    Ok(ZeroTestOutcome {
        accept: true,
        queries,
        first_hit: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::DEFAULT_BUDGET;

    fn example() -> CycleInstance {
        let pmf = LocalPmf::new(
            2,
            3,
            2,
            vec![
                vec![vec![0, 0], vec![0, 0], vec![0, 0]],
                vec![vec![1, 0], vec![0, 1], vec![1, 1]],
            ],
        )
        .unwrap();
        pmf_to_instance(&pmf).unwrap()
    }

    fn full(p: u32, n: usize, k: usize) -> CycleInstance {
        let all: Vec<Vector> = (0..(p as u64).pow(n as u32))
            .map(|mut c| {
                let mut v = vec![0u32; n];
                for x in v.iter_mut().rev() {
                    *x = (c % p as u64) as u32;
                    c /= p as u64;
                }
                v
            })
            .collect();
        CycleInstance::new(p, k, n, vec![all; k], true).unwrap()
    }

    #[test]
    fn counts() {
        let empty = CycleInstance::new(2, 3, 1, vec![vec![]; 3], false).unwrap();
        assert_eq!(count_cycles(&empty, 10).unwrap(), 0);
        assert_eq!(count_cycles(&full(2, 1, 3), 10).unwrap(), 4);
        assert_eq!(count_cycles(&example(), 10).unwrap(), 2);
        assert!(matches!(count_cycles(&full(2, 1, 3), 3), Err(Error::Budget { .. })));
    }

    #[test]
    fn unordered_single_mode() {
        // F_2, k = 3, both points: multisets {0,0,0}, {0,1,1}
        assert_eq!(count_unordered_cycles(&full(2, 1, 3), 100).unwrap(), 2);
        assert_eq!(count_unordered_cycles(&example(), 100).unwrap(), 2);
    }

    #[test]
    fn probabilities() {
        assert_eq!(rejection_probability(&example(), 100).unwrap(), Exact::new(1u32, 8u32));
        assert_eq!(
            rejection_probability(&full(2, 1, 3), 100).unwrap(),
            Exact::new(1u32, 1u32)
        );
    }

    #[test]
    fn simulation_edges() {
        let empty = CycleInstance::new(2, 3, 2, vec![vec![]; 3], false).unwrap();
        let r = simulate_canonical(&empty, 1000, 1).unwrap();
        assert!(!r.found && r.empirical_rate == 0.0 && r.first_hit.is_none());
        let r = simulate_canonical(&full(3, 2, 3), 1000, 1).unwrap();
        assert_eq!((r.first_hit, r.empirical_rate), (Some(1), 1.0));
        assert!(simulate_canonical(&empty, 0, 1).is_err());
    }

    #[test]
    fn distances() {
        let d = exact_distance(&example(), DEFAULT_BUDGET).unwrap();
        assert_eq!(d.changes, 2);
        assert_eq!(d.epsilon, Exact::new(1u32, 2u32));
        let empty = CycleInstance::new(2, 3, 1, vec![vec![]; 3], false).unwrap();
        assert_eq!(exact_distance(&empty, DEFAULT_BUDGET).unwrap().changes, 0);
        // full F_2 instance in single mode: removing 0 kills {0,0,0} and {0,1,1}
        let d = exact_distance(&full(2, 1, 3), DEFAULT_BUDGET).unwrap();
        assert_eq!(d.changes, 1);
        assert_eq!(
            d.hitting_set,
            vec![Change {
                function: 0,
                point: vec![0]
            }]
        );
    }

    #[test]
    fn exponents() {
        assert!((lower_bound_exponent(3, 2, 1.67).unwrap() - 4.84).abs() < 0.01);
        assert!((lower_bound_exponent(3, 2, 3.0 / 2f64.powf(2.0 / 3.0)).unwrap() - 13.239).abs() < 0.001);
        assert!((lower_bound_exponent(3, 3, 2f64.powf(4.0 / 3.0)).unwrap() - 7.298).abs() < 0.001);
        assert!(lower_bound_exponent(3, 2, 2.0).is_err());
        assert!(lower_bound_exponent(3, 2, 1.0).is_err());
        assert!((g_exponent(3, 2).unwrap() - 13.239).abs() < 0.001);
        assert!((g_exponent(4, 2).unwrap() - 11.60).abs() < 0.01);
        assert!((g_exponent(3, 3).unwrap() - 3.38).abs() < 0.01);
        for (k, p) in [(3, 2), (4, 2), (5, 3), (3, 7)] {
            let d = 2f64.powf(entropy(1.0 / k as f64));
            assert!((g_exponent(k, p).unwrap() - lower_bound_exponent(k, p, d).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn reduction() {
        let single = reduce_to_single(&example()).unwrap();
        assert_eq!(single.n, 4);
        assert_eq!(count_unordered_cycles(&single, DEFAULT_BUDGET).unwrap(), 2);
        let empty = CycleInstance::new(2, 3, 1, vec![vec![]; 3], false).unwrap();
        assert_eq!(count_cycles(&reduce_to_single(&empty).unwrap(), 10).unwrap(), 0);
        let k4 = CycleInstance::new(2, 4, 1, vec![vec![]; 4], false).unwrap();
        assert!(reduce_to_single(&k4).is_err());
    }

    #[test]
    fn extension() {
        let e3 = extend_domain(&example(), 3).unwrap();
        assert_eq!(count_cycles(&e3, 100).unwrap(), 2);
        let e4 = extend_domain(&example(), 4).unwrap();
        assert_eq!(count_cycles(&e4, 100).unwrap(), 8);
        assert!(e4.supports[0].iter().all(|v| (v[2] + v[3]) % 2 == 0));
        assert!(extend_domain(&example(), 2).is_err());
    }

    #[test]
    fn zero_test() {
        for seed in 0..20 {
            assert!(zero_tester(&[], 2, 4, 0.1, seed).unwrap().accept);
            let all: Vec<Vector> = full(2, 3, 3).supports[0].clone();
            assert!(!zero_tester(&all, 2, 3, 0.5, seed).unwrap().accept);
        }
        assert!(zero_tester(&[], 2, 4, 0.0, 0).is_err());
    }

    #[test]
    fn validation() {
        assert!(CycleInstance::new(4, 3, 1, vec![vec![]; 3], false).is_err());
        assert!(CycleInstance::new(2, 3, 1, vec![vec![]; 2], false).is_err());
        assert!(CycleInstance::new(2, 3, 1, vec![vec![vec![0], vec![0]], vec![], vec![]], false).is_err());
        assert!(CycleInstance::new(2, 3, 1, vec![vec![vec![0]], vec![], vec![]], true).is_err());
        let json = serde_json::to_string(&example()).unwrap();
        let back: CycleInstance = serde_json::from_str(&json).unwrap();
        assert_eq!(back, example());
    }
}
