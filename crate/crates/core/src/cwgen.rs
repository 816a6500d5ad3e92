//! Randomized construction of balanced vectors in `Z_k^{nk}` whose positional
//! classes `v_1|_1, ..., v_k|_k` partition the ground set only when
//! `v_1 = ... = v_k`.
//!
//! Every balanced partition `(I_1, ..., I_k)` is hashed to `k` residues mod a
//! prime `M`: `beta_j(I) = <w, I> + c_j` for `j < k`, and
//! `beta_k(I) = (<w, [N] \ I> + sum_{j<k} c_j) / (k - 1)`. A partition whose
//! residues all equal the same element `b_i` of an equation-free set lands in
//! `L_i`; partitions sharing a class with another member of their `L_i` are then
//! dropped.

use std::collections::HashMap;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::behrend::{behrend_construct, next_prime, verify_equation_free, EquationCheck};
use crate::error::{check_budget, saturating_pow};
use crate::exec;
use crate::rational::Exact;
use crate::zvectors::ZVecCollection;
use crate::{Error, Result, Vector, DEFAULT_BUDGET};

/// Ground sets are stored as `u128` masks.
pub const MAX_GROUND_SET: usize = 128;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CwConfig {
    pub k: usize,
    pub n: usize,
    pub seed: u64,
    /// Multiplier in the choice of `M`; `None` means [`default_c_k`].
    #[serde(default)]
    pub c_k: Option<f64>,
    pub trials: usize,
    /// Cap on the number of enumerated partitions.
    #[serde(default = "default_budget")]
    pub budget: u64,
}

fn default_budget() -> u64 {
    DEFAULT_BUDGET
}

impl CwConfig {
    pub fn new(k: usize, n: usize, seed: u64, trials: usize) -> Self {
        CwConfig {
            k,
            n,
            seed,
            c_k: None,
            trials,
            budget: DEFAULT_BUDGET,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.k < 3 {
            return Err(Error::invalid("cycle length k must be at least 3"));
        }
        if self.n == 0 {
            return Err(Error::invalid("block size n must be at least 1"));
        }
        if self.trials == 0 {
            return Err(Error::invalid("trials must be at least 1"));
        }
        if self.n * self.k > MAX_GROUND_SET {
            return Err(Error::Range(format!(
                "n k = {} exceeds {MAX_GROUND_SET}",
                self.n * self.k
            )));
        }
        if let Some(c) = self.c_k {
            if !(c.is_finite() && c > 0.0) {
                return Err(Error::invalid("c_k must be a positive finite number"));
            }
        }
        Ok(())
    }
}

/// `2k (k!)^2 k^k`.
pub fn default_c_k(k: usize) -> f64 {
    let fact: f64 = (1..=k).map(|x| x as f64).product();
    2.0 * k as f64 * fact * fact * (k as f64).powi(k as i32)
}

/// `(parts * n)! / (n!)^parts`.
pub fn multinomial(parts: usize, n: usize) -> BigUint {
    let fact = |x: usize| (1..=x).fold(BigUint::from(1u32), |acc, i| acc * BigUint::from(i));
    fact(parts * n) / fact(n).pow(parts as u32)
}

/// `next_prime(max(ceil(c_k * multinomial(n(k-1); n, ..., n)^(1/(k-2))), k + 1))`.
pub fn choose_modulus(k: usize, n: usize, c_k: f64) -> Result<u64> {
    let multi = multinomial(k - 1, n);
    let root = if k == 3 {
        multi.to_string().parse::<f64>().expect("decimal digits")
    } else {
        let ln = multi.to_string().parse::<f64>().expect("decimal digits").ln();
        (ln / (k - 2) as f64).exp()
    };
    let x = c_k * root;
    // exact integers must not round up through float noise
    let x = if (x - x.round()).abs() <= 1e-9 * x.max(1.0) {
        x.round()
    } else {
        x.ceil()
    };
    // NaN lands here too
    if x.is_nan() || x >= crate::behrend::MAX_PRIME_INPUT as f64 {
        return Err(Error::Range(format!("modulus estimate {x} is too large")));
    }
    next_prime((x as u64).max(k as u64 + 1))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialDraw {
    pub w: Vec<u64>,
    pub c: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CwDiagnostics {
    pub modulus: u64,
    pub c_k: f64,
    pub behrend: Vec<u64>,
    pub partitions: u64,
    pub chosen_trial: usize,
    /// `|L_i|` and `|L'_i|` of the chosen trial, indexed like `behrend`.
    pub l_sizes: Vec<usize>,
    pub pruned_sizes: Vec<usize>,
    pub w: Vec<u64>,
    pub c: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CwResult {
    pub config: CwConfig,
    pub collection: ZVecCollection,
    pub diagnostics: CwDiagnostics,
    /// Every trial's draws, in sampling order.
    pub transcript: Vec<TrialDraw>,
}

struct Setup {
    modulus: u64,
    c_k: f64,
    behrend: Vec<u64>,
    /// `b -> i` for `b = behrend[i]`.
    slot: HashMap<u64, usize>,
    partitions: Vec<Vector>,
    /// `masks[p][j]` = positions of partition `p` holding symbol `j`.
    masks: Vec<Vec<u128>>,
    draws: Vec<TrialDraw>,
}

struct TrialOutcome {
    buckets: Vec<Vec<usize>>,
    pruned: Vec<Vec<usize>>,
}

/// All balanced vectors of `Z_k^(nk)` in lexicographic order.
fn balanced_vectors(k: usize, n: usize) -> Vec<Vector> {
    fn rec(k: usize, left: &mut [usize], cur: &mut Vector, out: &mut Vec<Vector>) {
        if left.iter().all(|&x| x == 0) {
            out.push(cur.clone());
            return;
        }
        for s in 0..k {
            if left[s] > 0 {
                left[s] -= 1;
                cur.push(s as u32);
                rec(k, left, cur, out);
                cur.pop();
                left[s] += 1;
            }
        }
    }
    let mut out = Vec::new();
    rec(k, &mut vec![n; k], &mut Vec::with_capacity(n * k), &mut out);
    out
}

fn class_masks(v: &[u32], k: usize) -> Vec<u128> {
    let mut masks = vec![0u128; k];
    for (pos, &s) in v.iter().enumerate() {
        masks[s as usize] |= 1u128 << pos;
    }
    masks
}

fn inverse_mod_prime(a: u64, m: u64) -> u64 {
    // Fermat
    let mut acc: u128 = 1;
    let mut base = a as u128 % m as u128;
    let mut e = m - 2;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % m as u128;
        }
        base = base * base % m as u128;
        e >>= 1;
    }
    acc as u64
}

fn setup(cfg: &CwConfig, trials: usize) -> Result<Setup> {
    cfg.validate()?;
    let (k, n) = (cfg.k, cfg.n);
    let count = multinomial(k, n);
    let needed: u128 = count.clone().try_into().unwrap_or(u128::MAX);
    check_budget("balanced partitions", needed, cfg.budget)?;

    let c_k = cfg.c_k.unwrap_or_else(|| default_c_k(k));
    let modulus = choose_modulus(k, n, c_k)?;
    let behrend = behrend_construct(k as u32 - 1, modulus / (k as u64 - 1))?.elements;
    let scan = saturating_pow(behrend.len() as u128, k as u32 - 1).min(u64::MAX as u128) as u64;
    if let EquationCheck::Witness { tuple } = verify_equation_free(&behrend, k as u32 - 1, Some(modulus), scan)? {
        return Err(Error::Domain(format!(
            "equation-free set wraps modulo {modulus}: {tuple:?}"
        )));
    }
    let slot = behrend.iter().enumerate().map(|(i, &b)| (b, i)).collect();

    let partitions = balanced_vectors(k, n);
    let masks = partitions.iter().map(|v| class_masks(v, k)).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let draws = (0..trials)
        .map(|_| TrialDraw {
            w: (0..n * k).map(|_| rng.random_range(0..modulus)).collect(),
            c: (0..k).map(|_| rng.random_range(0..modulus)).collect(),
        })
        .collect();
    Ok(Setup {
        modulus,
        c_k,
        behrend,
        slot,
        partitions,
        masks,
        draws,
    })
}

fn run_trial(s: &Setup, k: usize, draw: &TrialDraw) -> TrialOutcome {
    let m = s.modulus as u128;
    let total: u128 = draw.w.iter().map(|&x| x as u128).sum::<u128>() % m;
    let inv = inverse_mod_prime(k as u64 - 1, s.modulus) as u128;
    let c_head: u128 = draw.c[..k - 1].iter().map(|&x| x as u128).sum();
    let mut buckets = vec![Vec::new(); s.behrend.len()];
    for (idx, v) in s.partitions.iter().enumerate() {
        let mut sums = vec![0u128; k];
        for (pos, &sym) in v.iter().enumerate() {
            sums[sym as usize] += draw.w[pos] as u128;
        }
        let beta = |j: usize| -> u128 {
            if j + 1 < k {
                (sums[j] + draw.c[j] as u128) % m
            } else {
                (total + m - sums[j] % m + c_head) % m * inv % m
            }
        };
        let b = beta(0);
        if !(1..k).all(|j| beta(j) == b) {
            continue;
        }
        debug_assert_eq!(
            (0..k - 1).map(&beta).sum::<u128>() % m,
            (k as u128 - 1) * beta(k - 1) % m
        );
        if let Some(&i) = s.slot.get(&(b as u64)) {
            buckets[i].push(idx);
        }
    }
    let pruned = buckets
        .iter()
        .map(|bucket| {
            let mut seen: Vec<HashMap<u128, usize>> = vec![HashMap::new(); k];
            for &idx in bucket {
                for (counts, &mask) in seen.iter_mut().zip(&s.masks[idx]) {
                    *counts.entry(mask).or_default() += 1;
                }
            }
            bucket
                .iter()
                .copied()
                .filter(|&idx| (0..k).all(|j| seen[j][&s.masks[idx][j]] == 1))
                .collect()
        })
        .collect();
    TrialOutcome { buckets, pruned }
}

pub fn cw_construct(cfg: &CwConfig) -> Result<CwResult> {
    let s = setup(cfg, cfg.trials)?;
    let k = cfg.k;
    let outcomes = exec::map(s.draws.len(), |t| run_trial(&s, k, &s.draws[t]));
    let size = |o: &TrialOutcome| o.pruned.iter().map(Vec::len).sum::<usize>();
    let chosen = (0..outcomes.len())
        .max_by(|&a, &b| size(&outcomes[a]).cmp(&size(&outcomes[b])).then(b.cmp(&a)))
        .expect("at least one trial");
    let best = &outcomes[chosen];
    let mut vectors: Vec<Vector> = best
        .pruned
        .iter()
        .flatten()
        .map(|&idx| s.partitions[idx].clone())
        .collect();
    vectors.sort();
    let collection = ZVecCollection::new(k as u32, cfg.n * k, vectors)?;
    let scan = saturating_pow(collection.len() as u128, k as u32 - 1).min(u64::MAX as u128) as u64;
    if let PartitionCheck::Witness { vectors } = verify_partition_unique(&collection, k, scan)? {
        return Err(Error::Domain(format!(
            "construction output has a partitioning tuple {vectors:?}"
        )));
    }
    let draw = s.draws[chosen].clone();
    Ok(CwResult {
        config: cfg.clone(),
        collection,
        diagnostics: CwDiagnostics {
            modulus: s.modulus,
            c_k: s.c_k,
            behrend: s.behrend.clone(),
            partitions: s.partitions.len() as u64,
            chosen_trial: chosen,
            l_sizes: best.buckets.iter().map(Vec::len).collect(),
            pruned_sizes: best.pruned.iter().map(Vec::len).collect(),
            w: draw.w,
            c: draw.c,
        },
        transcript: s.draws,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PartitionCheck {
    Ok,
    Unbalanced {
        vector: Vector,
    },
    /// `(v_1, ..., v_k)`, not all equal, with `v_1|_1, ..., v_k|_k` a partition.
    Witness {
        vectors: Vec<Vector>,
    },
}

impl PartitionCheck {
    pub fn is_ok(&self) -> bool {
        matches!(self, PartitionCheck::Ok)
    }
}

/// Exhaustive scan of index tuples in lexicographic order. Disjoint classes of
/// a balanced tuple always cover the ground set, so the last index is found
/// by lookup on the complementary mask and the budget bounds `|F|^(k-1)`.
pub fn verify_partition_unique(coll: &ZVecCollection, k: usize, budget: u64) -> Result<PartitionCheck> {
    if k < 2 || coll.d as usize != k {
        return Err(Error::invalid(format!(
            "collection alphabet {} does not match k = {k}",
            coll.d
        )));
    }
    if coll.n > MAX_GROUND_SET {
        return Err(Error::Range(format!(
            "vector length {} exceeds {MAX_GROUND_SET}",
            coll.n
        )));
    }
    if let Some(v) = coll.vectors.iter().find(|v| !crate::zvectors::is_balanced(v, k)) {
        return Ok(PartitionCheck::Unbalanced { vector: v.clone() });
    }
    let m = coll.len();
    check_budget("partition scan", saturating_pow(m as u128, k as u32 - 1), budget)?;
    let masks: Vec<Vec<u128>> = coll.vectors.iter().map(|v| class_masks(v, k)).collect();
    let full: u128 = if coll.n == 128 {
        u128::MAX
    } else {
        (1u128 << coll.n) - 1
    };
    let mut last: HashMap<u128, Vec<usize>> = HashMap::new();
    for (i, ms) in masks.iter().enumerate() {
        last.entry(ms[k - 1]).or_default().push(i);
    }

    fn rec(
        masks: &[Vec<u128>],
        last: &HashMap<u128, Vec<usize>>,
        full: u128,
        idx: &mut Vec<usize>,
        covered: u128,
    ) -> Option<Vec<usize>> {
        let k = masks[0].len();
        let pos = idx.len();
        if pos == k - 1 {
            let hits = last.get(&(full & !covered))?;
            return hits.iter().find_map(|&i| {
                (!idx.iter().all(|&x| x == i)).then(|| {
                    let mut w = idx.clone();
                    w.push(i);
                    w
                })
            });
        }
        for (i, ms) in masks.iter().enumerate() {
            if ms[pos] & covered != 0 {
                continue;
            }
            idx.push(i);
            let found = rec(masks, last, full, idx, covered | ms[pos]);
            idx.pop();
            if found.is_some() {
                return found;
            }
        }
        None
    }

    let witness = exec::find_first(m, |first| {
        let mut idx = vec![first];
        rec(&masks, &last, full, &mut idx, masks[first][0])
    });
    Ok(match witness {
        Some(indices) => PartitionCheck::Witness {
            vectors: indices.into_iter().map(|i| coll.vectors[i].clone()).collect(),
        },
        None => PartitionCheck::Ok,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
    pub standard_error: f64,
}

impl Moments {
    /// Sample mean, unbiased variance, and standard error of the mean.
    pub fn of(samples: &[f64]) -> Moments {
        let count = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / count;
        let variance = if samples.len() > 1 {
            samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (count - 1.0)
        } else {
            0.0
        };
        Moments {
            mean,
            variance,
            standard_error: (variance / count).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CwReport {
    pub k: usize,
    pub n: usize,
    pub trials: usize,
    pub modulus: u64,
    pub behrend_size: usize,
    pub partitions: u64,
    /// Per-trial averages of `|L_i|` over `i` are the samples.
    pub l: Moments,
    pub pruned: Moments,
    /// `multinomial(nk; n, ..., n) / M^(k-1)`.
    pub expected: Exact,
    /// Half of `expected`; a lower bound on the mean of `|L'_i|` for the
    /// intended choice of `M`.
    pub lower_bound: Exact,
    /// `|mean - expected| / standard_error` (`0` or infinity when the error is zero).
    pub deviation: f64,
    pub within_three_se: bool,
}

/// Runs `trials` draws from `cfg`'s seed and compares the empirical mean of
/// `|L_i|` with its exact expectation.
pub fn cw_expectation_report(cfg: &CwConfig, trials: usize) -> Result<CwReport> {
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    let cfg = CwConfig { trials, ..cfg.clone() };
    let s = setup(&cfg, trials)?;
    let k = cfg.k;
    let outcomes = exec::map(trials, |t| run_trial(&s, k, &s.draws[t]));
    let per_trial = |f: &dyn Fn(&TrialOutcome) -> &Vec<Vec<usize>>| -> Vec<f64> {
        outcomes
            .iter()
            .map(|o| f(o).iter().map(|b| b.len() as f64).sum::<f64>() / s.behrend.len() as f64)
            .collect()
    };
    let l = Moments::of(&per_trial(&|o| &o.buckets));
    let pruned = Moments::of(&per_trial(&|o| &o.pruned));
    let expected = Exact::new(multinomial(k, cfg.n), BigUint::from(s.modulus).pow(k as u32 - 1));
    let lower_bound = Exact::new(expected.numer().clone(), expected.denom() * 2u32);
    let gap = (l.mean - expected.to_f64()).abs();
    let deviation = if l.standard_error > 0.0 {
        gap / l.standard_error
    } else if gap == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(CwReport {
        k,
        n: cfg.n,
        trials,
        modulus: s.modulus,
        behrend_size: s.behrend.len(),
        partitions: s.partitions.len() as u64,
        l,
        pruned,
        expected,
        lower_bound,
        deviation,
        within_three_se: deviation < 3.0,
    })
}
