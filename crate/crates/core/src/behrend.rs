//! Sets of integers without non-trivial solutions to
//! `x_1 + ... + x_r = r * x_{r+1}`.
//!
//! Elements are `1 + sum_i y_i q^i` for digit vectors `y` in `{0..s-1}^d` lying
//! on one sphere `|y|^2 = t`, with base `q = r s`. Digit sums never carry, so a
//! solution forces the same equation coordinate-wise, and on a sphere that
//! equation only has the trivial solution.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{check_budget, saturating_pow};
use crate::exec;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BehrendParams {
    pub d: u32,
    pub s: u64,
    pub q: u64,
    pub t: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BehrendSet {
    pub r: u32,
    pub m: u64,
    pub elements: Vec<u64>,
    /// `None` when no digit construction beats the trivial sets.
    pub params: Option<BehrendParams>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum EquationCheck {
    Ok,
    /// `(x_1, ..., x_r, x_{r+1})`.
    Witness {
        tuple: Vec<u64>,
    },
}

impl EquationCheck {
    pub fn is_ok(&self) -> bool {
        matches!(self, EquationCheck::Ok)
    }
}

/// Largest element produced by `(d, s)`: every digit equal to `s - 1`.
fn max_element(d: u32, s: u64, q: u64) -> Option<u64> {
    let mut total: u64 = 0;
    let mut place: u64 = 1;
    for _ in 0..d {
        total = total.checked_add((s - 1).checked_mul(place)?)?;
        place = place.checked_mul(q)?;
    }
    total.checked_add(1)
}

/// `counts[t]` = number of `y` in `{0..s-1}^d` with `|y|^2 = t`.
fn sphere_counts(d: u32, s: u64) -> Vec<u64> {
    let top = (s - 1) * (s - 1) * d as u64;
    let mut counts = vec![0u64; top as usize + 1];
    counts[0] = 1;
    for _ in 0..d {
        let mut next = vec![0u64; counts.len()];
        for (t, &c) in counts.iter().enumerate().filter(|(_, &c)| c > 0) {
            for y in 0..s {
                let u = t + (y * y) as usize;
                if u < next.len() {
                    next[u] += c;
                }
            }
        }
        counts = next;
    }
    counts
}

fn sphere_elements(params: &BehrendParams) -> Vec<u64> {
    fn rec(params: &BehrendParams, digit: u32, left: u64, place: u64, acc: u64, out: &mut Vec<u64>) {
        if digit == params.d {
            if left == 0 {
                out.push(acc + 1);
            }
            return;
        }
        for y in 0..params.s {
            let sq = y * y;
            if sq > left {
                break;
            }
            rec(params, digit + 1, left - sq, place * params.q, acc + y * place, out);
        }
    }
    let mut out = Vec::new();
    rec(params, 0, params.t, 1, 0, &mut out);
    out.sort_unstable();
    out
}

/// Sweeps every `(d, s)` whose full digit cube fits in `[1, m]`, taking the
/// largest sphere (smallest `t` on ties, first `(d, s)` on ties). Falls back
/// to `{1, 2}` when that beats the sweep and to `{1}` when `m = 1`.
pub fn behrend_construct(r: u32, m: u64) -> Result<BehrendSet> {
    if r < 2 {
        return Err(Error::invalid("equation arity r must be at least 2"));
    }
    if m == 0 {
        return Err(Error::invalid("range bound m must be positive"));
    }
    let mut best: Option<(u64, BehrendParams)> = None;
    // d = 1 gives singleton spheres
    for d in 2..64u32 {
        let mut any = false;
        for s in 2.. {
            let q = r as u64 * s;
            match max_element(d, s, q) {
                Some(top) if top <= m => {}
                _ => break,
            }
            any = true;
            let counts = sphere_counts(d, s);
            let (t, &size) = counts
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
                .expect("non-empty counts");
            if best.as_ref().is_none_or(|(b, _)| size > *b) {
                best = Some((size, BehrendParams { d, s, q, t: t as u64 }));
            }
        }
        if !any {
            break;
        }
    }
    let (elements, params) = match best {
        Some((size, params)) if size >= 2 => (sphere_elements(&params), Some(params)),
        _ if m >= 2 => (vec![1, 2], None),
        _ => (vec![1], None),
    };
    let set = BehrendSet { r, m, elements, params };
    let budget = saturating_pow(set.elements.len() as u128, r).min(u64::MAX as u128) as u64;
    match verify_equation_free(&set.elements, r, None, budget)? {
        EquationCheck::Ok => Ok(set),
        EquationCheck::Witness { tuple } => Err(Error::Domain(format!(
            "digit construction produced a solution {tuple:?}"
        ))),
    }
}

/// Exhaustive scan over `(x_1, ..., x_r)` in lexicographic order of the
/// sorted, deduplicated set; `x_{r+1}` is found by lookup, so the budget
/// bounds `|B|^r`. With a modulus all arithmetic is mod `M`.
pub fn verify_equation_free(set: &[u64], r: u32, modulus: Option<u64>, budget: u64) -> Result<EquationCheck> {
    if r < 2 {
        return Err(Error::invalid("equation arity r must be at least 2"));
    }
    if modulus == Some(0) {
        return Err(Error::invalid("modulus must be positive"));
    }
    let mut xs = set.to_vec();
    xs.sort_unstable();
    xs.dedup();
    check_budget("equation scan", saturating_pow(xs.len() as u128, r), budget)?;
    let reduce = |v: u128| -> u128 {
        match modulus {
            Some(md) => v % md as u128,
            None => v,
        }
    };
    let mut rhs: HashMap<u128, Vec<u64>> = HashMap::new();
    for &x in &xs {
        rhs.entry(reduce(r as u128 * x as u128)).or_default().push(x);
    }

    fn rec(
        xs: &[u64],
        r: usize,
        rhs: &HashMap<u128, Vec<u64>>,
        reduce: &dyn Fn(u128) -> u128,
        tuple: &mut Vec<u64>,
        sum: u128,
    ) -> Option<Vec<u64>> {
        if tuple.len() == r {
            let hits = rhs.get(&reduce(sum))?;
            return hits.iter().find_map(|&y| {
                (!tuple.iter().all(|&x| x == y)).then(|| {
                    let mut w = tuple.clone();
                    w.push(y);
                    w
                })
            });
        }
        for &x in xs {
            tuple.push(x);
            let found = rec(xs, r, rhs, reduce, tuple, reduce(sum + x as u128));
            tuple.pop();
            if found.is_some() {
                return found;
            }
        }
        None
    }

    let witness = exec::find_first(xs.len(), |i| {
        let mut tuple = vec![xs[i]];
        rec(&xs, r as usize, &rhs, &reduce, &mut tuple, reduce(xs[i] as u128))
    });
    Ok(match witness {
        Some(tuple) => EquationCheck::Witness { tuple },
        None => EquationCheck::Ok,
    })
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    (a as u128 * b as u128 % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin; the first twelve prime bases cover all `u64`.
pub fn is_prime_u64(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &b in &BASES {
        if n.is_multiple_of(b) {
            return n == b;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'bases: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

pub const MAX_PRIME_INPUT: u64 = 1 << 62;

pub fn next_prime(x: u64) -> Result<u64> {
    if !(2..=MAX_PRIME_INPUT).contains(&x) {
        return Err(Error::Range(format!("next_prime input {x} outside [2, 2^62]")));
    }
    Ok((x..).find(|&c| is_prime_u64(c)).expect("primes are unbounded"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::DEFAULT_BUDGET;

    /// Direct scan of all `(r+1)`-tuples.
    fn naive_free(set: &[u64], r: usize, modulus: Option<u64>) -> bool {
        use itertools::Itertools;
        (0..=r)
            .map(|_| set.iter().copied())
            .multi_cartesian_product()
            .filter(|t| t.iter().any(|&x| x != t[0]))
            .all(|t| {
                let lhs: u128 = t[..r].iter().map(|&x| x as u128).sum();
                let rhs = r as u128 * t[r] as u128;
                match modulus {
                    Some(md) => lhs % md as u128 != rhs % md as u128,
                    None => lhs != rhs,
                }
            })
    }

    #[test]
    fn small_examples() {
        assert_eq!(verify_equation_free(&[1, 2], 2, None, 100).unwrap(), EquationCheck::Ok);
        assert_eq!(
            verify_equation_free(&[1, 2, 3], 2, None, 100).unwrap(),
            EquationCheck::Witness { tuple: vec![1, 3, 2] }
        );
        // 2 * 1 = 2 and 2 * 2 = 1 mod 3, while sums of two elements give 2, 0, 1
        // only for the trivial pairs
        assert_eq!(
            verify_equation_free(&[1, 2], 2, Some(3), 100).unwrap(),
            EquationCheck::Ok
        );
        assert!(naive_free(&[1, 2], 2, Some(3)));
        assert_eq!(
            verify_equation_free(&[1, 2], 2, Some(2), 100).unwrap(),
            EquationCheck::Witness { tuple: vec![1, 1, 2] }
        );
        assert!(matches!(
            verify_equation_free(&[1, 2, 3], 3, None, 26),
            Err(Error::Budget { .. })
        ));
    }

    #[test]
    fn construct_small() {
        assert_eq!(behrend_construct(2, 2).unwrap().elements, vec![1, 2]);
        assert_eq!(behrend_construct(3, 1).unwrap().elements, vec![1]);
        assert!(behrend_construct(1, 10).is_err());
        assert!(behrend_construct(2, 0).is_err());
    }

    #[test]
    fn construct_r3_m100_brute_force() {
        let b = behrend_construct(3, 100).unwrap();
        assert!(b.elements.iter().all(|&x| (1..=100).contains(&x)));
        assert!(naive_free(&b.elements, 3, None));
    }

    #[test]
    fn sizes_non_decreasing() {
        for r in [2, 3] {
            let mut prev = 0;
            for m in (2..400).step_by(7) {
                let b = behrend_construct(r, m).unwrap();
                assert!(b.elements.len() >= prev, "r={r} m={m}");
                prev = b.elements.len();
            }
        }
    }

    #[test]
    fn sphere_counts_match_enumeration() {
        for (d, s) in [(1, 5), (2, 3), (3, 4), (4, 2)] {
            let counts = sphere_counts(d, s);
            for (t, &c) in counts.iter().enumerate() {
                let q = 2 * s;
                let params = BehrendParams { d, s, q, t: t as u64 };
                assert_eq!(sphere_elements(&params).len() as u64, c);
            }
            assert_eq!(counts.iter().sum::<u64>(), s.pow(d));
        }
    }

    #[test]
    fn primes() {
        assert_eq!(next_prime(8).unwrap(), 11);
        assert_eq!(next_prime(7).unwrap(), 7);
        assert_eq!(next_prime(90).unwrap(), 97);
        assert_eq!(next_prime(2).unwrap(), 2);
        assert!(next_prime(1).is_err());
        let sieve: Vec<u64> = (2..2000u64)
            .filter(|&n| (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0))
            .collect();
        let mr: Vec<u64> = (0..2000u64).filter(|&n| is_prime_u64(n)).collect();
        assert_eq!(sieve, mr);
        assert!(is_prime_u64((1 << 61) - 1));
        assert!(!is_prime_u64(3_215_031_751));
        assert!(next_prime(MAX_PRIME_INPUT).unwrap() > MAX_PRIME_INPUT);
    }

    #[test]
    fn modular_freeness_below_wrap() {
        let b = behrend_construct(2, 50).unwrap();
        let modulus = next_prime(2 * 50 + 1).unwrap();
        assert!(verify_equation_free(&b.elements, 2, Some(modulus), DEFAULT_BUDGET)
            .unwrap()
            .is_ok());
    }
}
