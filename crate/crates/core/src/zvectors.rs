//! Vector collections over `Z_D` (symbols `0..D`).

use std::collections::HashSet;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::exec;
use crate::{Error, Result, Vector};

/// A set of distinct length-`n` vectors over `Z_D`, in the order given.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawCollection")]
pub struct ZVecCollection {
    #[serde(rename = "D")]
    pub d: u32,
    pub n: usize,
    pub vectors: Vec<Vector>,
}

#[derive(Deserialize)]
struct RawCollection {
    #[serde(rename = "D")]
    d: u32,
    n: usize,
    vectors: Vec<Vector>,
}

impl TryFrom<RawCollection> for ZVecCollection {
    type Error = Error;

    fn try_from(raw: RawCollection) -> Result<Self> {
        ZVecCollection::new(raw.d, raw.n, raw.vectors)
    }
}

impl ZVecCollection {
    pub fn new(d: u32, n: usize, vectors: Vec<Vector>) -> Result<Self> {
        if d < 2 {
            return Err(Error::invalid("alphabet size D must be at least 2"));
        }
        let mut seen = HashSet::with_capacity(vectors.len());
        for v in &vectors {
            if v.len() != n {
                return Err(Error::invalid(format!("vector {v:?} does not have length {n}")));
            }
            if v.iter().any(|&x| x >= d) {
                return Err(Error::invalid(format!("vector {v:?} has a symbol outside [0, {d})")));
            }
            if !seen.insert(v) {
                return Err(Error::invalid(format!("duplicate vector {v:?}")));
            }
        }
        Ok(ZVecCollection { d, n, vectors })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Same collection with vectors in ascending lexicographic order.
    pub fn sorted(mut self) -> Self {
        self.vectors.sort();
        self
    }
}

pub(crate) fn sunflower_unchecked(a: &[u32], b: &[u32], c: &[u32]) -> bool {
    a.iter()
        .zip(b)
        .zip(c)
        .all(|((&x, &y), &z)| (x == y && y == z) || (x != y && y != z && x != z))
}

/// True iff every coordinate of the three vectors is all-equal or all-distinct.
pub fn is_sunflower(a: &[u32], b: &[u32], c: &[u32]) -> Result<bool> {
    if a.len() != b.len() || b.len() != c.len() {
        return Err(Error::invalid("sunflower arguments have different lengths"));
    }
    if a == b || b == c || a == c {
        return Err(Error::invalid("sunflower arguments must be pairwise distinct"));
    }
    Ok(sunflower_unchecked(a, b, c))
}

/// First sunflower `(i, j, l)`, `i < j < l`, in lexicographic index order.
pub fn find_sunflower(coll: &ZVecCollection) -> Option<[Vector; 3]> {
    let vs = &coll.vectors;
    let m = vs.len();
    exec::find_first(m, |i| {
        for j in i + 1..m {
            for l in j + 1..m {
                if sunflower_unchecked(&vs[i], &vs[j], &vs[l]) {
                    return Some([vs[i].clone(), vs[j].clone(), vs[l].clone()]);
                }
            }
        }
        None
    })
}

/// Whether some coordinate carries exactly two distinct symbols.
pub(crate) fn has_two_symbol_coordinate(vs: &[&Vector]) -> bool {
    let n = vs.first().map_or(0, |v| v.len());
    (0..n).any(|c| {
        let first = vs[0][c];
        let mut second = None;
        for v in &vs[1..] {
            let x = v[c];
            if x == first {
                continue;
            }
            match second {
                None => second = Some(x),
                Some(s) if s == x => {}
                Some(_) => return false,
            }
        }
        second.is_some()
    })
}

/// Looks for `k` members, not all equal, with no coordinate carrying exactly
/// two distinct symbols.
///
/// The condition depends only on the set of distinct vectors in the tuple, so
/// the scan runs over subsets of size `k` down to `3` (pairs always pass). A
/// failing subset smaller than `k` is padded to a `k`-tuple by repeating its
/// first member.
pub fn two_symbol_property(coll: &ZVecCollection, k: usize) -> Result<Option<Vec<Vector>>> {
    if k < 3 {
        return Err(Error::invalid("cycle length k must be at least 3"));
    }
    let vs = &coll.vectors;
    let m = vs.len();
    for size in (3..=k.min(m)).rev() {
        let hit = exec::find_first(m, |first| {
            (first + 1..m).combinations(size - 1).find_map(|rest| {
                let mut set: Vec<&Vector> = vec![&vs[first]];
                set.extend(rest.iter().map(|&r| &vs[r]));
                (!has_two_symbol_coordinate(&set)).then(|| {
                    let mut tuple: Vec<Vector> = vec![vs[first].clone(); k - size];
                    tuple.extend(set.into_iter().cloned());
                    tuple
                })
            })
        });
        if hit.is_some() {
            return Ok(hit);
        }
    }
    Ok(None)
}

/// Replaces every symbol of `Z_{q^t}` by its `t` base-`q` digits, most
/// significant first.
pub fn recode_base(coll: &ZVecCollection, q: u32) -> Result<ZVecCollection> {
    if q < 2 {
        return Err(Error::invalid("base must be at least 2"));
    }
    let mut t = 0usize;
    let mut power = 1u64;
    while power < coll.d as u64 {
        power *= q as u64;
        t += 1;
    }
    if power != coll.d as u64 || t == 0 {
        return Err(Error::invalid(format!("D = {} is not a power of {q}", coll.d)));
    }
    let vectors = coll
        .vectors
        .iter()
        .map(|v| {
            v.iter()
                .flat_map(|&x| {
                    let mut digits = vec![0u32; t];
                    let mut y = x;
                    for slot in digits.iter_mut().rev() {
                        *slot = y % q;
                        y /= q;
                    }
                    digits
                })
                .collect()
        })
        .collect();
    ZVecCollection::new(q, coll.n * t, vectors)
}

/// A balanced vector over `Z_k` of length `n k` together with its symbol classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BalancedPartition {
    pub k: usize,
    pub n: usize,
    pub vector: Vector,
    /// `parts[j]` = sorted positions (0-based) holding symbol `j`.
    pub parts: Vec<Vec<usize>>,
}

/// Encodes `k` equal-size parts partitioning `0..n k` as a balanced vector.
pub fn partition_encode(parts: &[Vec<usize>]) -> Result<BalancedPartition> {
    let k = parts.len();
    if k == 0 {
        return Err(Error::invalid("no parts given"));
    }
    let n = parts[0].len();
    if parts.iter().any(|p| p.len() != n) {
        return Err(Error::invalid("parts are not balanced"));
    }
    let total = n * k;
    let mut vector = vec![u32::MAX; total];
    for (j, part) in parts.iter().enumerate() {
        for &pos in part {
            if pos >= total || vector[pos] != u32::MAX {
                return Err(Error::invalid(format!("position {pos} is out of range or repeated")));
            }
            vector[pos] = j as u32;
        }
    }
    let parts = parts
        .iter()
        .map(|p| {
            let mut p = p.clone();
            p.sort_unstable();
            p
        })
        .collect();
    Ok(BalancedPartition { k, n, vector, parts })
}

/// Symbol classes of a balanced vector over `Z_k`.
pub fn partition_decode(vector: &[u32], k: usize) -> Result<BalancedPartition> {
    if k == 0 || !vector.len().is_multiple_of(k) {
        return Err(Error::invalid("vector length is not a multiple of k"));
    }
    let n = vector.len() / k;
    let mut parts = vec![Vec::with_capacity(n); k];
    for (pos, &s) in vector.iter().enumerate() {
        let part = parts
            .get_mut(s as usize)
            .ok_or_else(|| Error::invalid(format!("symbol {s} outside Z_{k}")))?;
        part.push(pos);
    }
    if parts.iter().any(|p| p.len() != n) {
        return Err(Error::invalid("vector is not balanced"));
    }
    Ok(BalancedPartition {
        k,
        n,
        vector: vector.to_vec(),
        parts,
    })
}

pub fn is_balanced(vector: &[u32], k: usize) -> bool {
    partition_decode(vector, k).is_ok()
}
