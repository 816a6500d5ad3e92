//! Search for large collections in `Z_D^n` without 3-sunflowers or with the
//! two-symbol property.
//!
//! Vectors are identified with their index in lexicographic order and a
//! collection with its sorted index list. The search is an orderly generation:
//! a set is visited only if it is the lexicographically smallest sorted list in
//! its orbit under coordinate permutations and per-coordinate symbol
//! relabelings. Removing the largest element of such a set leaves a set that is
//! again minimal, so growing minimal sets by larger elements reaches one
//! representative of every orbit. Both predicates are invariant under the
//! group and closed under taking subsets.
//!
//! Work is split into subtrees that run in parallel with a fixed share of the
//! node budget each. Unfinished subtrees are kept as resumable [`Pending`]
//! entries, so the result only depends on the budget, never on thread count.

use std::cmp::Ordering;

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::exec;
use crate::zvectors::{
    find_sunflower, has_two_symbol_coordinate, sunflower_unchecked, two_symbol_property, ZVecCollection,
};
use crate::{Error, Result, Vector};

/// Largest `D^n` handled.
pub const MAX_UNIVERSE: u64 = 1 << 16;
/// The symmetry table is built only when `|G| * D^n` stays below this.
pub const MAX_GROUP_TABLE: u64 = 20_000_000;
/// Number of subtrees the frontier is widened to before parallel rounds.
const FRONTIER_WIDTH: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Target {
    SunflowerFree,
    TwoSymbol { k: usize },
}

impl Target {
    pub fn k(&self) -> usize {
        match self {
            Target::SunflowerFree => 3,
            Target::TwoSymbol { k } => *k,
        }
    }

    /// Independent check through the collection-level verifiers.
    pub fn holds(&self, coll: &ZVecCollection) -> Result<bool> {
        match self {
            Target::SunflowerFree => Ok(find_sunflower(coll).is_none()),
            Target::TwoSymbol { k } => Ok(two_symbol_property(coll, *k)?.is_none()),
        }
    }
}

/// Subtree rooted at the visited set `prefix`, restricted to children whose
/// new element is at least `from`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pending {
    pub prefix: Vec<u32>,
    pub from: u32,
}

/// Resumable search state; also the checkpoint format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchState {
    #[serde(rename = "D")]
    pub d: u32,
    pub n: usize,
    pub target: Target,
    /// Whether symmetry pruning is in effect for `pending`.
    pub symmetry: bool,
    pub seed: u64,
    pub best: Vec<u32>,
    pub nodes: u64,
    pub pending: Vec<Pending>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchReport {
    #[serde(rename = "D")]
    pub d: u32,
    pub n: usize,
    pub k: usize,
    pub target: Target,
    pub best: ZVecCollection,
    /// True only when the exhaustive search finished.
    pub optimal: bool,
    pub nodes_explored: u64,
    pub symmetry: bool,
    pub pending: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchConfig {
    pub d: u32,
    pub n: usize,
    pub target: Target,
    pub budget: u64,
    /// Requested symmetry pruning; dropped when the group table is too large.
    pub symmetry: bool,
    /// Seed for the greedy completion after budget exhaustion.
    pub seed: u64,
}

impl SearchConfig {
    pub fn new(d: u32, n: usize, target: Target, budget: u64) -> Self {
        SearchConfig {
            d,
            n,
            target,
            budget,
            symmetry: true,
            seed: 0,
        }
    }
}

fn factorial(x: u64) -> u64 {
    (1..=x).fold(1u64, |a, b| a.saturating_mul(b))
}

fn universe(d: u32, n: usize) -> Result<Vec<Vector>> {
    match (d as u64).checked_pow(n as u32) {
        Some(size) if size <= MAX_UNIVERSE => Ok((0..size)
            .map(|mut code| {
                let mut v = vec![0u32; n];
                for x in v.iter_mut().rev() {
                    *x = (code % d as u64) as u32;
                    code /= d as u64;
                }
                v
            })
            .collect()),
        _ => Err(Error::Range(format!("{d}^{n} vectors exceed {MAX_UNIVERSE}"))),
    }
}

fn index_of(v: &[u32], d: u32) -> u32 {
    v.iter().fold(0u32, |acc, &x| acc * d + x)
}

struct Problem {
    d: u32,
    target: Target,
    vectors: Vec<Vector>,
    /// `group[g][x]` = image of index `x`; identity excluded.
    group: Vec<Vec<u32>>,
}

impl Problem {
    fn new(d: u32, n: usize, target: Target, symmetry: bool) -> Result<Problem> {
        if let Target::TwoSymbol { k } = target {
            if k < 3 {
                return Err(Error::invalid("cycle length k must be at least 3"));
            }
        }
        if d < 2 || n == 0 {
            return Err(Error::invalid("need D >= 2 and n >= 1"));
        }
        let vectors = universe(d, n)?;
        let order = factorial(n as u64).saturating_mul(factorial(d as u64).saturating_pow(n as u32));
        let group = if symmetry && order.saturating_mul(vectors.len() as u64) <= MAX_GROUP_TABLE {
            let coord_perms: Vec<Vec<usize>> = (0..n).permutations(n).collect();
            let relabels: Vec<Vec<u32>> = (0..d).permutations(d as usize).collect();
            let mut table = Vec::with_capacity(order as usize);
            for pi in &coord_perms {
                for sigmas in (0..n).map(|_| relabels.iter()).multi_cartesian_product() {
                    let image: Vec<u32> = vectors
                        .iter()
                        .map(|v| {
                            let mut w = vec![0u32; n];
                            for c in 0..n {
                                w[pi[c]] = sigmas[c][v[c] as usize];
                            }
                            index_of(&w, d)
                        })
                        .collect();
                    if image.iter().enumerate().any(|(i, &x)| i as u32 != x) {
                        table.push(image);
                    }
                }
            }
            table
        } else {
            Vec::new()
        };
        Ok(Problem {
            d,
            target,
            vectors,
            group,
        })
    }

    fn symmetric(&self) -> bool {
        !self.group.is_empty()
    }

    fn canonical(&self, set: &[u32]) -> bool {
        let mut img = Vec::with_capacity(set.len());
        self.group.iter().all(|g| {
            img.clear();
            img.extend(set.iter().map(|&x| g[x as usize]));
            img.sort_unstable();
            img.as_slice() >= set
        })
    }

    /// `set + {y}` satisfies the target, given that `set` does.
    fn compatible(&self, set: &[u32], y: u32) -> bool {
        let yv = &self.vectors[y as usize];
        match self.target {
            Target::SunflowerFree => set
                .iter()
                .tuple_combinations()
                .all(|(&a, &b)| !sunflower_unchecked(&self.vectors[a as usize], &self.vectors[b as usize], yv)),
            Target::TwoSymbol { k } => (2..k.min(set.len() + 1)).all(|size| {
                set.iter().combinations(size).all(|sub| {
                    let mut vs: Vec<&Vector> = sub.iter().map(|&&i| &self.vectors[i as usize]).collect();
                    vs.push(yv);
                    has_two_symbol_coordinate(&vs)
                })
            }),
        }
    }

    /// `set + {x, y}` satisfies the target, given that `set + {x}` and
    /// `set + {y}` do: only subsets holding both `x` and `y` are checked.
    fn compatible_pair(&self, set: &[u32], x: u32, y: u32) -> bool {
        let (xv, yv) = (&self.vectors[x as usize], &self.vectors[y as usize]);
        match self.target {
            Target::SunflowerFree => set
                .iter()
                .all(|&a| !sunflower_unchecked(&self.vectors[a as usize], xv, yv)),
            Target::TwoSymbol { k } => (1..(k - 1).min(set.len() + 1)).all(|size| {
                set.iter().combinations(size).all(|sub| {
                    let mut vs: Vec<&Vector> = sub.iter().map(|&&i| &self.vectors[i as usize]).collect();
                    vs.push(xv);
                    vs.push(yv);
                    has_two_symbol_coordinate(&vs)
                })
            }),
        }
    }

    fn candidates(&self, prefix: &[u32]) -> Vec<u32> {
        let start = prefix.last().map_or(0, |&m| m + 1);
        (start..self.vectors.len() as u32)
            .filter(|&y| self.compatible(prefix, y))
            .collect()
    }

    fn collection(&self, set: &[u32]) -> Result<ZVecCollection> {
        let n = self.vectors[0].len();
        ZVecCollection::new(
            self.d,
            n,
            set.iter().map(|&i| self.vectors[i as usize].clone()).collect(),
        )
    }
}

fn better(candidate: &[u32], best: &[u32]) -> bool {
    match candidate.len().cmp(&best.len()) {
        Ordering::Greater => true,
        Ordering::Equal => candidate < best,
        Ordering::Less => false,
    }
}

struct Run {
    left: u64,
    used: u64,
    best: Vec<u32>,
}

impl Problem {
    /// Depth-first search below the visited set `prefix`; returns what is left
    /// unexplored when the budget runs out.
    fn explore(&self, prefix: &mut Vec<u32>, from: u32, cands: &[u32], run: &mut Run) -> Vec<Pending> {
        for (pos, &x) in cands.iter().enumerate() {
            if x < from {
                continue;
            }
            if prefix.len() + cands.len() - pos <= run.best.len() {
                break;
            }
            prefix.push(x);
            if self.symmetric() && !self.canonical(prefix) {
                prefix.pop();
                continue;
            }
            if run.left == 0 {
                prefix.pop();
                return vec![Pending {
                    prefix: prefix.clone(),
                    from: x,
                }];
            }
            run.left -= 1;
            run.used += 1;
            if better(prefix, &run.best) {
                run.best = prefix.clone();
            }
            let base = &prefix[..prefix.len() - 1];
            let next: Vec<u32> = cands[pos + 1..]
                .iter()
                .copied()
                .filter(|&y| self.compatible_pair(base, x, y))
                .collect();
            let mut pending = self.explore(prefix, 0, &next, run);
            prefix.pop();
            if !pending.is_empty() {
                pending.push(Pending {
                    prefix: prefix.clone(),
                    from: x + 1,
                });
                return pending;
            }
        }
        Vec::new()
    }

    fn run_item(&self, item: &Pending, budget: u64, best: &[u32]) -> (Run, Vec<Pending>) {
        let mut run = Run {
            left: budget,
            used: 0,
            best: best.to_vec(),
        };
        let cands = self.candidates(&item.prefix);
        let mut prefix = item.prefix.clone();
        let pending = self.explore(&mut prefix, item.from, &cands, &mut run);
        (run, pending)
    }

    /// Replaces the first pending entry by one entry per visited child.
    fn widen(&self, state: &mut SearchState, left: &mut u64) {
        let item = state.pending.remove(0);
        let cands = self.candidates(&item.prefix);
        let mut children = Vec::new();
        for (pos, &x) in cands.iter().enumerate() {
            if x < item.from {
                continue;
            }
            if item.prefix.len() + cands.len() - pos <= state.best.len() {
                break;
            }
            let mut child = item.prefix.clone();
            child.push(x);
            if self.symmetric() && !self.canonical(&child) {
                continue;
            }
            if *left == 0 {
                children.push(Pending {
                    prefix: item.prefix.clone(),
                    from: x,
                });
                break;
            }
            *left -= 1;
            state.nodes += 1;
            if better(&child, &state.best) {
                state.best = child.clone();
            }
            children.push(Pending { prefix: child, from: 0 });
        }
        state.pending.extend(children);
    }

    fn advance(&self, state: &mut SearchState, budget: u64) {
        let mut left = budget;
        while !state.pending.is_empty() && state.pending.len() < FRONTIER_WIDTH && left > 0 {
            self.widen(state, &mut left);
        }
        while !state.pending.is_empty() && left > 0 {
            let items = std::mem::take(&mut state.pending);
            let active = items.len().min(left as usize);
            let share = left / active as u64;
            let results = exec::map(active, |i| self.run_item(&items[i], share, &state.best));
            for (run, pending) in results {
                left -= run.used;
                state.nodes += run.used;
                if better(&run.best, &state.best) {
                    state.best = run.best;
                }
                state.pending.extend(pending);
            }
            state.pending.extend(items.into_iter().skip(active));
        }
    }
}

fn report(problem: &Problem, state: &SearchState) -> Result<SearchReport> {
    let optimal = state.pending.is_empty();
    let mut best = problem.collection(&state.best)?;
    if !optimal {
        best = greedy_extend(&best, state.target, state.seed)?;
    }
    Ok(SearchReport {
        d: state.d,
        n: state.n,
        k: state.target.k(),
        target: state.target,
        best,
        optimal,
        nodes_explored: state.nodes,
        symmetry: state.symmetry,
        pending: state.pending.len(),
    })
}

/// Exhaustive branch and bound within `cfg.budget` visited sets. Returns the
/// report and the state to checkpoint.
pub fn search(cfg: &SearchConfig) -> Result<(SearchReport, SearchState)> {
    let problem = Problem::new(cfg.d, cfg.n, cfg.target, cfg.symmetry)?;
    let mut state = SearchState {
        d: cfg.d,
        n: cfg.n,
        target: cfg.target,
        symmetry: problem.symmetric(),
        seed: cfg.seed,
        best: Vec::new(),
        nodes: 0,
        pending: vec![Pending {
            prefix: Vec::new(),
            from: 0,
        }],
    };
    problem.advance(&mut state, cfg.budget);
    Ok((report(&problem, &state)?, state))
}

/// Continues a checkpointed search with `budget` more visited sets.
pub fn resume(mut state: SearchState, budget: u64) -> Result<(SearchReport, SearchState)> {
    let problem = Problem::new(state.d, state.n, state.target, state.symmetry)?;
    if problem.symmetric() != state.symmetry {
        return Err(Error::invalid("checkpoint symmetry setting cannot be reproduced"));
    }
    let size = problem.vectors.len() as u32;
    let sorted = |s: &[u32]| s.windows(2).all(|w| w[0] < w[1]) && s.iter().all(|&x| x < size);
    if !sorted(&state.best) || state.pending.iter().any(|p| !sorted(&p.prefix)) {
        return Err(Error::invalid("checkpoint holds malformed index lists"));
    }
    if !state.target.holds(&problem.collection(&state.best)?)? {
        return Err(Error::invalid("checkpoint best set violates the target"));
    }
    problem.advance(&mut state, budget);
    Ok((report(&problem, &state)?, state))
}

pub fn max_sunflower_free(d: u32, n: usize, budget: u64) -> Result<SearchReport> {
    if d < 3 {
        return Err(Error::invalid("sunflowers need D >= 3"));
    }
    Ok(search(&SearchConfig::new(d, n, Target::SunflowerFree, budget))?.0)
}

pub fn max_two_symbol(d: u32, n: usize, k: usize, budget: u64) -> Result<SearchReport> {
    Ok(search(&SearchConfig::new(d, n, Target::TwoSymbol { k }, budget))?.0)
}

/// Adds vectors of `Z_D^n` in seeded random order whenever the target still
/// holds. One pass suffices for maximality because both targets are closed
/// under subsets.
pub fn greedy_extend(coll: &ZVecCollection, target: Target, seed: u64) -> Result<ZVecCollection> {
    if !target.holds(coll)? {
        return Err(Error::invalid("input collection violates the target"));
    }
    let problem = Problem::new(coll.d, coll.n, target, false)?;
    let mut order: Vec<u32> = (0..problem.vectors.len() as u32).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut set: Vec<u32> = coll.vectors.iter().map(|v| index_of(v, coll.d)).collect();
    let mut members: std::collections::HashSet<u32> = set.iter().copied().collect();
    let mut vectors = coll.vectors.clone();
    for y in order {
        if !members.contains(&y) && problem.compatible(&set, y) {
            set.push(y);
            members.insert(y);
            vectors.push(problem.vectors[y as usize].clone());
        }
    }
    ZVecCollection::new(coll.d, coll.n, vectors)
}
