//! Local perfect-matching-free families (PMFs) for k-cycles over `F_p`.
//!
//! A local PMF is a list of `m` zero-sum `k`-tuples `(x^1_i, ..., x^k_i)` of
//! vectors in `F_p^n` such that `x^1_{i_1} + ... + x^k_{i_k} = 0` forces
//! `i_1 = ... = i_k`. This module verifies the property exhaustively and
//! provides the constructions that produce such families from sunflower-free
//! collections, from balanced vectors with unique partitions, by products, and
//! from (global) PMFs. It also verifies uniquely solvable puzzles.

use std::collections::HashMap;

use itertools::Itertools;
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::cwgen::{verify_partition_unique, PartitionCheck};
use crate::error::{check_budget, saturating_pow};
use crate::exec;
use crate::gadgets::construct_b;
use crate::rational::Exact;
use crate::zvectors::{find_sunflower, partition_decode, two_symbol_property, ZVecCollection};
use crate::{Error, Result, Vector};

/// Default cap on `m!` for [`globalize_to_local`] (allows `m <= 6`).
pub const GLOBALIZE_BUDGET: u64 = 720;
/// Default cap on `(m!)^3` for [`verify_usp`] (allows `m <= 5`).
pub const USP_BUDGET: u64 = 1_728_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawPmf")]
pub struct LocalPmf {
    pub p: u32,
    pub k: usize,
    pub n: usize,
    /// `tuples[i][j]` is `x^{(j+1)}_{i+1}`.
    pub tuples: Vec<Vec<Vector>>,
}

#[derive(Deserialize)]
struct RawPmf {
    p: u32,
    k: usize,
    n: usize,
    tuples: Vec<Vec<Vector>>,
}

impl TryFrom<RawPmf> for LocalPmf {
    type Error = Error;

    fn try_from(raw: RawPmf) -> Result<Self> {
        LocalPmf::new(raw.p, raw.k, raw.n, raw.tuples)
    }
}

impl LocalPmf {
    /// Checks shapes and residues; zero sums are left to the verifiers.
    pub fn new(p: u32, k: usize, n: usize, tuples: Vec<Vec<Vector>>) -> Result<Self> {
        if !crate::ffield::is_prime(p as u64) {
            return Err(Error::invalid(format!("{p} is not prime")));
        }
        if k < 2 {
            return Err(Error::invalid("tuple length k must be at least 2"));
        }
        for (i, t) in tuples.iter().enumerate() {
            if t.len() != k {
                return Err(Error::invalid(format!(
                    "tuple {i} has {} vectors, expected {k}",
                    t.len()
                )));
            }
            if t.iter().any(|v| v.len() != n || v.iter().any(|&x| x >= p)) {
                return Err(Error::invalid(format!("tuple {i} has a vector outside F_{p}^{n}")));
            }
        }
        Ok(LocalPmf { p, k, n, tuples })
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    fn tuple_sums_to_zero(&self, i: usize) -> bool {
        let p = self.p as u64;
        (0..self.n).all(|c| self.tuples[i].iter().map(|v| v[c] as u64).sum::<u64>() % p == 0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PmfCheck {
    Ok,
    /// Tuple `index` does not sum to zero.
    NonzeroTuple {
        index: usize,
    },
    /// Index tuple, not all equal, whose cross sum vanishes.
    Cancellation {
        indices: Vec<usize>,
    },
}

impl PmfCheck {
    pub fn is_ok(&self) -> bool {
        matches!(self, PmfCheck::Ok)
    }
}

fn add_into(acc: &mut [u32], v: &[u32], p: u32) {
    for (a, &x) in acc.iter_mut().zip(v) {
        *a = ((*a as u64 + x as u64) % p as u64) as u32;
    }
}

fn negated(v: &[u32], p: u32) -> Vector {
    v.iter().map(|&x| if x == 0 { 0 } else { p - x }).collect()
}

/// Exhaustive local-PMF check. The last index is resolved by hash lookup, so
/// the work (and the budget) is `m^(k-1)` partial sums. Returns the
/// lexicographically first violating index tuple.
pub fn verify_local_pmf(pmf: &LocalPmf, budget: u64) -> Result<PmfCheck> {
    let m = pmf.len();
    let k = pmf.k;
    check_budget("local PMF scan", saturating_pow(m as u128, k as u32 - 1), budget)?;
    if let Some(index) = (0..m).find(|&i| !pmf.tuple_sums_to_zero(i)) {
        return Ok(PmfCheck::NonzeroTuple { index });
    }
    let mut last: HashMap<&[u32], Vec<usize>> = HashMap::new();
    for (i, t) in pmf.tuples.iter().enumerate() {
        last.entry(t[k - 1].as_slice()).or_default().push(i);
    }

    fn rec(
        pmf: &LocalPmf,
        last: &HashMap<&[u32], Vec<usize>>,
        idx: &mut Vec<usize>,
        sum: &mut Vector,
    ) -> Option<Vec<usize>> {
        let pos = idx.len();
        if pos == pmf.k - 1 {
            let need = negated(sum, pmf.p);
            let hits = last.get(need.as_slice())?;
            return hits.iter().find_map(|&i| {
                let trivial = idx.iter().all(|&x| x == i);
                (!trivial).then(|| {
                    let mut w = idx.clone();
                    w.push(i);
                    w
                })
            });
        }
        for i in 0..pmf.len() {
            let saved = sum.clone();
            add_into(sum, &pmf.tuples[i][pos], pmf.p);
            idx.push(i);
            let found = rec(pmf, last, idx, sum);
            idx.pop();
            *sum = saved;
            if found.is_some() {
                return found;
            }
        }
        None
    }

    let witness = exec::find_first(m, |first| {
        let mut idx = vec![first];
        let mut sum = pmf.tuples[first][0].clone();
        rec(pmf, &last, &mut idx, &mut sum)
    });
    Ok(match witness {
        Some(indices) => PmfCheck::Cancellation { indices },
        None => PmfCheck::Ok,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum GlobalCheck {
    Ok,
    NonzeroTuple {
        index: usize,
    },
    /// Permutations `pi_1 = id, pi_2, ..., pi_k`, not all equal, with
    /// `sum_j x^j_{pi_j(i)} = 0` for every `i`.
    Matching {
        permutations: Vec<Vec<usize>>,
    },
}

/// Checks the (global) PMF condition: the only permutations `pi_1..pi_k` with
/// `sum_j x^j_{pi_j(i)} = 0` for all `i` are the all-equal ones.
///
/// Composing every `pi_j` with `pi_1^{-1}` preserves the condition, so `pi_1`
/// is fixed to the identity and the rest are found by backtracking.
pub fn verify_global_pmf(pmf: &LocalPmf, budget: u64) -> Result<GlobalCheck> {
    let m = pmf.len();
    check_budget("global PMF permutations", factorial(m), budget)?;
    if let Some(index) = (0..m).find(|&i| !pmf.tuple_sums_to_zero(i)) {
        return Ok(GlobalCheck::NonzeroTuple { index });
    }
    let k = pmf.k;
    let mut last: HashMap<&[u32], Vec<usize>> = HashMap::new();
    for (i, t) in pmf.tuples.iter().enumerate() {
        last.entry(t[k - 1].as_slice()).or_default().push(i);
    }

    struct Search<'a> {
        pmf: &'a LocalPmf,
        last: HashMap<&'a [u32], Vec<usize>>,
        // assign[j][row] = pi_{j+1}(row) for j in 1..k
        assign: Vec<Vec<usize>>,
        used: Vec<Vec<bool>>,
    }

    impl Search<'_> {
        fn row(&mut self, row: usize) -> bool {
            let m = self.pmf.len();
            if row == m {
                return self.assign[1..]
                    .iter()
                    .any(|pi| pi.iter().enumerate().any(|(i, &x)| i != x));
            }
            let sum = self.pmf.tuples[row][0].clone();
            self.column(row, 1, sum)
        }

        fn column(&mut self, row: usize, j: usize, sum: Vector) -> bool {
            let (k, p) = (self.pmf.k, self.pmf.p);
            if j == k - 1 {
                let need = negated(&sum, p);
                let Some(cands) = self.last.get(need.as_slice()).cloned() else {
                    return false;
                };
                for i in cands {
                    if self.used[j][i] {
                        continue;
                    }
                    self.used[j][i] = true;
                    self.assign[j][row] = i;
                    if self.row(row + 1) {
                        return true;
                    }
                    self.used[j][i] = false;
                }
                return false;
            }
            for i in 0..self.pmf.len() {
                if self.used[j][i] {
                    continue;
                }
                let mut next = sum.clone();
                add_into(&mut next, &self.pmf.tuples[i][j], p);
                self.used[j][i] = true;
                self.assign[j][row] = i;
                if self.column(row, j + 1, next) {
                    return true;
                }
                self.used[j][i] = false;
            }
            false
        }
    }

    let mut search = Search {
        pmf,
        last,
        assign: vec![vec![0; m]; k],
        used: vec![vec![false; m]; k],
    };
    search.assign[0] = (0..m).collect();
    if m > 0 && search.row(0) {
        Ok(GlobalCheck::Matching {
            permutations: search.assign,
        })
    } else {
        Ok(GlobalCheck::Ok)
    }
}

fn factorial(m: usize) -> u128 {
    (1..=m as u128).fold(1u128, |acc, x| acc.saturating_mul(x))
}

/// Maps each `v` to the `k` columns of the stacked gadgets `B_{v_1}; ...; B_{v_n}`
/// built from `F_{p^(k-1)}`.
pub fn sunflower_to_pmf(coll: &ZVecCollection, p: u32, k: usize) -> Result<LocalPmf> {
    if k < 3 {
        return Err(Error::invalid("cycle length k must be at least 3"));
    }
    let gadgets = construct_b(p, (k - 1) as u32)?;
    if coll.d as usize != gadgets.matrices.len() {
        return Err(Error::invalid(format!(
            "alphabet size {} differs from p^(k-1) = {}",
            coll.d,
            gadgets.matrices.len()
        )));
    }
    if let Some(witness) = two_symbol_property(coll, k)? {
        return Err(Error::Precondition {
            reason: "collection lacks the two-symbol property".into(),
            witness,
        });
    }
    let tuples = coll
        .vectors
        .iter()
        .map(|v| {
            (0..k)
                .map(|col| v.iter().flat_map(|&s| gadgets.column(s as usize, col)).collect())
                .collect()
        })
        .collect();
    LocalPmf::new(p, k, coll.n * (k - 1), tuples)
}

/// `{(x, x, x)}` for a sunflower-free collection over `Z_3`; a triangle PMF over `F_3`.
pub fn diag_pmf(coll: &ZVecCollection) -> Result<LocalPmf> {
    if coll.d != 3 {
        return Err(Error::invalid("diagonal construction needs D = 3"));
    }
    if let Some(w) = find_sunflower(coll) {
        return Err(Error::Precondition {
            reason: "collection contains a 3-sunflower".into(),
            witness: w.to_vec(),
        });
    }
    let tuples = coll.vectors.iter().map(|x| vec![x.clone(); 3]).collect();
    LocalPmf::new(3, 3, coll.n, tuples)
}

/// Product family: tuple `(i, j)` (row-major) concatenates tuple `i` of `a`
/// with tuple `j` of `b` position by position.
pub fn concat_pmf(a: &LocalPmf, b: &LocalPmf) -> Result<LocalPmf> {
    if a.p != b.p || a.k != b.k {
        return Err(Error::invalid("PMFs have different p or k"));
    }
    let tuples = a
        .tuples
        .iter()
        .cartesian_product(&b.tuples)
        .map(|(ta, tb)| {
            ta.iter()
                .zip(tb)
                .map(|(x, y)| x.iter().chain(y).copied().collect())
                .collect()
        })
        .collect();
    LocalPmf::new(a.p, a.k, a.n + b.n, tuples)
}

/// Turns a PMF with `m` tuples into a local PMF with `m!` tuples of length
/// `n m`: one tuple per permutation (lexicographic order), concatenating the
/// original tuples in permuted order. `budget` caps `m!`.
pub fn globalize_to_local(pmf: &LocalPmf, budget: u64) -> Result<LocalPmf> {
    match verify_global_pmf(pmf, budget)? {
        GlobalCheck::Ok => {}
        other => {
            return Err(Error::invalid(format!("input is not a PMF: {other:?}")));
        }
    }
    let m = pmf.len();
    let tuples = (0..m)
        .permutations(m)
        .map(|perm| {
            (0..pmf.k)
                .map(|j| perm.iter().flat_map(|&i| pmf.tuples[i][j].iter().copied()).collect())
                .collect()
        })
        .collect();
    LocalPmf::new(pmf.p, pmf.k, pmf.n * m, tuples)
}

/// Characteristic-vector construction from balanced vectors with unique
/// partitions: the first `k - 1` vectors are the indicators of the symbol
/// classes `0..k-1`, the last is minus the indicator of the complement of class
/// `k - 1`. `budget` bounds the partition-uniqueness check.
pub fn balanced_to_pmf(coll: &ZVecCollection, p: u32, budget: u64) -> Result<LocalPmf> {
    let k = coll.d as usize;
    match verify_partition_unique(coll, k, budget)? {
        PartitionCheck::Ok => {}
        PartitionCheck::Unbalanced { vector } => {
            return Err(Error::Precondition {
                reason: "vector is not balanced".into(),
                witness: vec![vector],
            })
        }
        PartitionCheck::Witness { vectors } => {
            return Err(Error::Precondition {
                reason: "positional classes of distinct vectors partition the ground set".into(),
                witness: vectors,
            })
        }
    }
    let total = coll.n;
    let tuples = coll
        .vectors
        .iter()
        .map(|v| {
            let bp = partition_decode(v, k).expect("balance checked above");
            let mut tuple: Vec<Vector> = bp.parts[..k - 1]
                .iter()
                .map(|part| {
                    let mut x = vec![0u32; total];
                    part.iter().for_each(|&pos| x[pos] = 1);
                    x
                })
                .collect();
            let mut lastv = vec![p - 1; total];
            bp.parts[k - 1].iter().for_each(|&pos| lastv[pos] = 0);
            tuple.push(lastv);
            tuple
        })
        .collect();
    LocalPmf::new(p, k, total, tuples)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UspStrength {
    Usp,
    Strong,
}

/// Puzzle rows over `Z_3`; symbols `0, 1, 2` stand for the three piece types.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UspCollection {
    pub n: usize,
    pub vectors: Vec<Vector>,
    pub strength: UspStrength,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum UspCheck {
    Ok,
    Witness { permutations: [Vec<usize>; 3] },
}

/// Enumerates every permutation triple except the all-equal ones and looks
/// for a cell `(i, j)` meeting at least two (or, for strong USPs, exactly two)
/// of `x_{pi_1(i)}_j = 0`, `x_{pi_2(i)}_j = 1`, `x_{pi_3(i)}_j = 2`.
pub fn verify_usp(usp: &UspCollection, budget: u64) -> Result<UspCheck> {
    let m = usp.vectors.len();
    if usp.vectors.iter().any(|v| v.len() != usp.n || v.iter().any(|&x| x > 2)) {
        return Err(Error::invalid("USP rows must be vectors in Z_3^n"));
    }
    check_budget("USP permutation triples", factorial(m).saturating_pow(3), budget)?;
    let perms: Vec<Vec<usize>> = (0..m).permutations(m).collect();
    let rows = &usp.vectors;
    let caught = |a: &[usize], b: &[usize], c: &[usize]| {
        (0..m).any(|i| {
            (0..usp.n).any(|j| {
                let hits = (rows[a[i]][j] == 0) as u8 + (rows[b[i]][j] == 1) as u8 + (rows[c[i]][j] == 2) as u8;
                match usp.strength {
                    UspStrength::Usp => hits >= 2,
                    UspStrength::Strong => hits == 2,
                }
            })
        })
    };
    let count = perms.len();
    let witness = exec::find_first(count, |a| {
        for b in 0..count {
            for c in 0..count {
                if a == b && b == c {
                    continue;
                }
                if !caught(&perms[a], &perms[b], &perms[c]) {
                    return Some([perms[a].clone(), perms[b].clone(), perms[c].clone()]);
                }
            }
        }
        None
    });
    Ok(match witness {
        Some(permutations) => UspCheck::Witness { permutations },
        None => UspCheck::Ok,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PmfExponent {
    pub m: usize,
    pub epsilon: Exact,
    pub alpha: f64,
}

/// Distance `eps = m / p^n` and query exponent
/// `alpha = (k - 1 - log_p(m)/n) / (1 - log_p(m)/n)` of the functions induced
/// by an `(n, m)` local PMF.
pub fn pmf_to_exponent(pmf: &LocalPmf) -> Result<PmfExponent> {
    let m = pmf.len();
    let domain = BigUint::from(pmf.p).pow(pmf.n as u32);
    if m == 0 || BigUint::from(m) >= domain {
        return Err(Error::invalid("exponent needs 1 <= m < p^n"));
    }
    let rate = (m as f64).ln() / (pmf.n as f64 * (pmf.p as f64).ln());
    let alpha = (pmf.k as f64 - 1.0 - rate) / (1.0 - rate);
    Ok(PmfExponent {
        m,
        epsilon: Exact::new(BigUint::from(m), domain),
        alpha,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::DEFAULT_BUDGET;

    pub(crate) fn example_pmf() -> LocalPmf {
        LocalPmf::new(
            2,
            3,
            2,
            vec![
                vec![vec![0, 0], vec![0, 0], vec![0, 0]],
                vec![vec![1, 0], vec![0, 1], vec![1, 1]],
            ],
        )
        .unwrap()
    }

    /// Straight enumeration of `[m]^k`, independent of the hashed scan.
    fn naive_ok(pmf: &LocalPmf) -> bool {
        let m = pmf.len();
        (0..pmf.k)
            .map(|_| 0..m)
            .multi_cartesian_product()
            .filter(|idx| idx.iter().any(|&i| i != idx[0]))
            .all(|idx| {
                (0..pmf.n).any(|c| {
                    idx.iter()
                        .enumerate()
                        .map(|(j, &i)| pmf.tuples[i][j][c] as u64)
                        .sum::<u64>()
                        % pmf.p as u64
                        != 0
                })
            })
    }

    #[test]
    fn single_tuple_is_ok() {
        let pmf = LocalPmf::new(3, 3, 1, vec![vec![vec![1], vec![1], vec![1]]]).unwrap();
        assert!(verify_local_pmf(&pmf, DEFAULT_BUDGET).unwrap().is_ok());
    }

    #[test]
    fn two_tuple_example() {
        let pmf = example_pmf();
        assert!(naive_ok(&pmf));
        assert!(verify_local_pmf(&pmf, DEFAULT_BUDGET).unwrap().is_ok());
    }

    #[test]
    fn identical_tuples_cancel() {
        let t = vec![vec![1, 0], vec![0, 1], vec![1, 1]];
        let pmf = LocalPmf::new(2, 3, 2, vec![t.clone(), t]).unwrap();
        assert_eq!(
            verify_local_pmf(&pmf, DEFAULT_BUDGET).unwrap(),
            PmfCheck::Cancellation { indices: vec![0, 0, 1] }
        );
        assert!(!naive_ok(&pmf));
    }

    #[test]
    fn nonzero_tuple_and_budget() {
        let pmf = LocalPmf::new(2, 3, 1, vec![vec![vec![1], vec![0], vec![0]]]).unwrap();
        assert_eq!(verify_local_pmf(&pmf, 10).unwrap(), PmfCheck::NonzeroTuple { index: 0 });
        let big = concat_pmf(&example_pmf(), &example_pmf()).unwrap();
        assert!(matches!(verify_local_pmf(&big, 15), Err(Error::Budget { .. })));
    }

    #[test]
    fn sunflower_transform() {
        let f = ZVecCollection::new(4, 1, vec![vec![0], vec![1]]).unwrap();
        let pmf = sunflower_to_pmf(&f, 2, 3).unwrap();
        assert_eq!((pmf.len(), pmf.n), (2, 2));
        assert!(verify_local_pmf(&pmf, DEFAULT_BUDGET).unwrap().is_ok());
        let bad = ZVecCollection::new(4, 1, vec![vec![0], vec![1], vec![2]]).unwrap();
        match sunflower_to_pmf(&bad, 2, 3) {
            Err(Error::Precondition { witness, .. }) => assert_eq!(witness, vec![vec![0], vec![1], vec![2]]),
            other => panic!("unexpected {other:?}"),
        }
        let wrong_alphabet = ZVecCollection::new(3, 1, vec![vec![0]]).unwrap();
        assert!(sunflower_to_pmf(&wrong_alphabet, 2, 3).is_err());
    }

    #[test]
    fn sunflower_transform_k4() {
        // Z_8 alphabet, gadgets from F_8; two vectors always pass
        let f = ZVecCollection::new(8, 2, vec![vec![0, 5], vec![3, 5], vec![7, 1]]).unwrap();
        assert_eq!(two_symbol_property(&f, 4).unwrap(), None);
        let pmf = sunflower_to_pmf(&f, 2, 4).unwrap();
        assert_eq!(pmf.n, 6);
        assert!(naive_ok(&pmf));
        assert!(verify_local_pmf(&pmf, DEFAULT_BUDGET).unwrap().is_ok());
    }

    #[test]
    fn diagonal() {
        let f = ZVecCollection::new(3, 1, vec![vec![0], vec![1]]).unwrap();
        let pmf = diag_pmf(&f).unwrap();
        assert_eq!(pmf.tuples[1], vec![vec![1], vec![1], vec![1]]);
        assert!(verify_local_pmf(&pmf, DEFAULT_BUDGET).unwrap().is_ok());
        let empty = ZVecCollection::new(3, 2, vec![]).unwrap();
        assert!(diag_pmf(&empty).unwrap().is_empty());
        let ap = ZVecCollection::new(3, 1, vec![vec![0], vec![1], vec![2]]).unwrap();
        assert!(diag_pmf(&ap).is_err());
    }

    #[test]
    fn products() {
        let p = example_pmf();
        let empty = LocalPmf::new(2, 3, 1, vec![]).unwrap();
        assert!(concat_pmf(&p, &empty).unwrap().is_empty());
        let single = LocalPmf::new(2, 3, 1, vec![vec![vec![1], vec![1], vec![0]]]).unwrap();
        let ext = concat_pmf(&p, &single).unwrap();
        assert_eq!((ext.len(), ext.n), (2, 3));
        assert_eq!(ext.tuples[1][0], vec![1, 0, 1]);
        let sq = concat_pmf(&p, &p).unwrap();
        assert_eq!((sq.len(), sq.n), (4, 4));
        assert!(naive_ok(&sq));
        assert!(verify_local_pmf(&sq, DEFAULT_BUDGET).unwrap().is_ok());
        let other_k = LocalPmf::new(2, 4, 1, vec![]).unwrap();
        assert!(concat_pmf(&p, &other_k).is_err());
    }

    #[test]
    fn globalize() {
        let one = LocalPmf::new(2, 3, 1, vec![vec![vec![1], vec![1], vec![0]]]).unwrap();
        assert_eq!(globalize_to_local(&one, GLOBALIZE_BUDGET).unwrap(), one);
        let g = globalize_to_local(&example_pmf(), GLOBALIZE_BUDGET).unwrap();
        assert_eq!((g.len(), g.n), (2, 4));
        assert!(verify_local_pmf(&g, DEFAULT_BUDGET).unwrap().is_ok());
        let seven = LocalPmf::new(2, 3, 3, vec![vec![vec![0; 3]; 3]; 7]).unwrap();
        assert!(matches!(
            globalize_to_local(&seven, GLOBALIZE_BUDGET),
            Err(Error::Budget { .. })
        ));
    }

    /// Brute-force permutation oracle for the global condition.
    fn naive_global_ok(pmf: &LocalPmf) -> bool {
        let m = pmf.len();
        let perms: Vec<Vec<usize>> = (0..m).permutations(m).collect();
        (0..pmf.k - 1)
            .map(|_| perms.iter())
            .multi_cartesian_product()
            .filter(|rest| rest.iter().any(|pi| pi.iter().enumerate().any(|(i, &x)| i != x)))
            .all(|rest| {
                (0..m).any(|row| {
                    (0..pmf.n).any(|c| {
                        let s = pmf.tuples[row][0][c] as u64
                            + rest
                                .iter()
                                .enumerate()
                                .map(|(j, pi)| pmf.tuples[pi[row]][j + 1][c] as u64)
                                .sum::<u64>();
                        !s.is_multiple_of(pmf.p as u64)
                    })
                })
            })
    }

    #[test]
    fn global_check_against_oracle() {
        let zero_sum: Vec<Vec<Vector>> = (0..9u32)
            .map(|t| vec![vec![t / 3], vec![t % 3], vec![(6 - t / 3 - t % 3) % 3]])
            .collect();
        for trio in zero_sum.iter().cloned().combinations(3) {
            let pmf = LocalPmf::new(3, 3, 1, trio).unwrap();
            let global = verify_global_pmf(&pmf, GLOBALIZE_BUDGET).unwrap();
            assert_eq!(global == GlobalCheck::Ok, naive_global_ok(&pmf), "{pmf:?}");
            if let GlobalCheck::Matching { permutations } = &global {
                assert_eq!(permutations[0], vec![0, 1, 2]);
            }
            let local = verify_local_pmf(&pmf, DEFAULT_BUDGET).unwrap();
            assert_eq!(local.is_ok(), naive_ok(&pmf));
            if local.is_ok() {
                assert_eq!(global, GlobalCheck::Ok);
            }
        }
    }

    #[test]
    fn global_but_not_local() {
        let v = |a: u32, b: u32, c: u32| vec![a, b, c];
        let pmf = LocalPmf::new(
            2,
            3,
            3,
            vec![
                vec![v(0, 0, 0), v(0, 0, 0), v(0, 0, 0)],
                vec![v(0, 0, 1), v(0, 1, 0), v(0, 1, 1)],
                vec![v(0, 1, 0), v(1, 0, 0), v(1, 1, 0)],
            ],
        )
        .unwrap();
        assert!(!verify_local_pmf(&pmf, DEFAULT_BUDGET).unwrap().is_ok());
        assert_eq!(verify_global_pmf(&pmf, GLOBALIZE_BUDGET).unwrap(), GlobalCheck::Ok);
        assert!(naive_global_ok(&pmf));
        let g = globalize_to_local(&pmf, GLOBALIZE_BUDGET).unwrap();
        assert_eq!((g.len(), g.n), (6, 9));
        assert!(naive_ok(&g));
        assert!(verify_local_pmf(&g, DEFAULT_BUDGET).unwrap().is_ok());
    }

    #[test]
    fn global_matching_found() {
        let t = vec![vec![1], vec![1], vec![1]];
        let pmf = LocalPmf::new(3, 3, 1, vec![t.clone(), t]).unwrap();
        assert!(matches!(
            verify_global_pmf(&pmf, GLOBALIZE_BUDGET).unwrap(),
            GlobalCheck::Matching { .. }
        ));
        assert!(globalize_to_local(&pmf, GLOBALIZE_BUDGET).is_err());
    }

    #[test]
    fn balanced_construction() {
        let f = ZVecCollection::new(3, 3, vec![vec![0, 1, 2]]).unwrap();
        let pmf = balanced_to_pmf(&f, 2, DEFAULT_BUDGET).unwrap();
        assert_eq!(pmf.tuples[0], vec![vec![1, 0, 0], vec![0, 1, 0], vec![1, 1, 0]]);
        let pmf = balanced_to_pmf(&f, 3, DEFAULT_BUDGET).unwrap();
        assert_eq!(pmf.tuples[0][2], vec![2, 2, 0]);
        assert!(verify_local_pmf(&pmf, DEFAULT_BUDGET).unwrap().is_ok());
        let bad = ZVecCollection::new(3, 3, vec![vec![0, 1, 2], vec![1, 2, 0], vec![2, 0, 1]]).unwrap();
        assert!(matches!(
            balanced_to_pmf(&bad, 2, DEFAULT_BUDGET),
            Err(Error::Precondition { .. })
        ));
    }

    #[test]
    fn usp_examples() {
        let single = UspCollection {
            n: 2,
            vectors: vec![vec![0, 1]],
            strength: UspStrength::Usp,
        };
        assert_eq!(verify_usp(&single, USP_BUDGET).unwrap(), UspCheck::Ok);
        let pair = UspCollection {
            n: 2,
            vectors: vec![vec![0, 1], vec![1, 0]],
            strength: UspStrength::Usp,
        };
        assert_eq!(
            verify_usp(&pair, USP_BUDGET).unwrap(),
            UspCheck::Witness {
                permutations: [vec![0, 1], vec![0, 1], vec![1, 0]]
            }
        );
        let six = UspCollection {
            n: 1,
            vectors: vec![vec![0]; 6],
            strength: UspStrength::Usp,
        };
        assert!(matches!(verify_usp(&six, USP_BUDGET), Err(Error::Budget { .. })));
    }

    #[test]
    fn strong_implies_plain() {
        // a 2-element strong USP in Z_3^2 found by scanning all row pairs
        let mut found = 0;
        for a in 0..9u32 {
            for b in a + 1..9u32 {
                let rows = vec![vec![a / 3, a % 3], vec![b / 3, b % 3]];
                let strong = UspCollection {
                    n: 2,
                    vectors: rows.clone(),
                    strength: UspStrength::Strong,
                };
                if verify_usp(&strong, USP_BUDGET).unwrap() == UspCheck::Ok {
                    found += 1;
                    let plain = UspCollection {
                        n: 2,
                        vectors: rows,
                        strength: UspStrength::Usp,
                    };
                    assert_eq!(verify_usp(&plain, USP_BUDGET).unwrap(), UspCheck::Ok);
                }
            }
        }
        assert!(found > 0);
    }

    #[test]
    fn exponent_formula() {
        let e = pmf_to_exponent(&example_pmf()).unwrap();
        assert_eq!(e.epsilon, Exact::new(1u32, 2u32));
        assert!((e.alpha - 3.0).abs() < 1e-12);
        let one = LocalPmf::new(2, 4, 3, vec![vec![vec![0; 3]; 4]]).unwrap();
        assert!((pmf_to_exponent(&one).unwrap().alpha - 3.0).abs() < 1e-12);
        let empty = LocalPmf::new(2, 3, 3, vec![]).unwrap();
        assert!(pmf_to_exponent(&empty).is_err());
    }

    #[test]
    fn exponent_grows_as_rate_approaches_one() {
        let alpha = |rate: f64| (2.0 - rate) / (1.0 - rate);
        let mut prev = alpha(0.0);
        for step in 1..100 {
            let a = alpha(step as f64 / 100.0);
            assert!(a > prev);
            prev = a;
        }
        assert!(prev > 100.0);
    }
}
