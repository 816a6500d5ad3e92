//! The `A` and `B` matrix families over `F_p`.
//!
//! `A_i` is the `k x k` matrix with columns `enc(a_i), enc(a_i b), ...,
//! enc(a_i b^(k-1))`, where `a_i` runs over `F_{p^k}` in enumeration order and
//! `b` generates the multiplicative group. Distinct matrices never agree on a
//! sum of the same non-empty set of columns.
//!
//! `B_i` appends the column `-(sum of the columns of A_i)`, so every `B_i` has
//! zero column sum, and for `i != j` mixing a non-empty proper subset of the
//! columns of `B_i` with the complementary columns of `B_j` never sums to zero.

use serde::{Deserialize, Serialize};

use crate::exec;
use crate::ffield::{enc, make_field};
use crate::{Error, Result, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GadgetKind {
    A,
    B,
}

/// `p^k` matrices over `F_p`, row-major; `k x k` for kind A, `k x (k+1)` for B.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixFamily {
    pub p: u32,
    pub k: u32,
    pub kind: GadgetKind,
    pub matrices: Vec<Vec<Vec<u32>>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum GadgetCheck {
    Ok,
    /// Kind B matrix whose columns do not sum to zero.
    NonzeroColumnSum {
        i: usize,
    },
    /// Offending pair and column subset (0-based column indices).
    Witness {
        i: usize,
        j: usize,
        subset: Vec<usize>,
    },
}

impl GadgetCheck {
    pub fn is_ok(&self) -> bool {
        matches!(self, GadgetCheck::Ok)
    }
}

impl MatrixFamily {
    pub fn columns(&self) -> usize {
        match self.kind {
            GadgetKind::A => self.k as usize,
            GadgetKind::B => self.k as usize + 1,
        }
    }

    /// Column `l` of matrix `i`.
    pub fn column(&self, i: usize, l: usize) -> Vector {
        self.matrices[i].iter().map(|row| row[l]).collect()
    }

    fn validate(&self) -> Result<()> {
        let rows = self.k as usize;
        let cols = self.columns();
        let expected = (self.p as u64).checked_pow(self.k);
        if self.k == 0 || expected != Some(self.matrices.len() as u64) {
            return Err(Error::invalid(format!(
                "expected p^k = {}^{} matrices, found {}",
                self.p,
                self.k,
                self.matrices.len()
            )));
        }
        for (i, m) in self.matrices.iter().enumerate() {
            if m.len() != rows || m.iter().any(|r| r.len() != cols) {
                return Err(Error::invalid(format!("matrix {i} is not {rows}x{cols}")));
            }
            if m.iter().flatten().any(|&x| x >= self.p) {
                return Err(Error::invalid(format!("matrix {i} has an entry outside [0, p)")));
            }
        }
        Ok(())
    }
}

pub fn construct_a(p: u32, k: u32) -> Result<MatrixFamily> {
    let field = make_field(p, k)?;
    let beta = field.generator();
    let kk = k as usize;
    let powers: Vec<_> = (0..kk as u64).map(|e| field.pow(&beta, e)).collect();
    let matrices = field
        .elements()
        .map(|alpha| {
            let cols: Vec<Vector> = powers.iter().map(|b| enc(&field, &field.mul(&alpha, b))).collect();
            (0..kk).map(|row| cols.iter().map(|c| c[row]).collect()).collect()
        })
        .collect();
    Ok(MatrixFamily {
        p,
        k,
        kind: GadgetKind::A,
        matrices,
    })
}

pub fn construct_b(p: u32, k: u32) -> Result<MatrixFamily> {
    let a = construct_a(p, k)?;
    let matrices = a
        .matrices
        .into_iter()
        .map(|m| {
            m.into_iter()
                .map(|mut row| {
                    let s = row.iter().fold(0u64, |acc, &x| acc + x as u64) % p as u64;
                    row.push(((p as u64 - s) % p as u64) as u32);
                    row
                })
                .collect()
        })
        .collect();
    Ok(MatrixFamily {
        p,
        k,
        kind: GadgetKind::B,
        matrices,
    })
}

/// Non-empty subsets of `0..n` as sorted index lists, in lexicographic order.
pub(crate) fn subsets_lex(n: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        for x in start..n {
            cur.push(x);
            out.push(cur.clone());
            rec(x + 1, n, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, &mut Vec::new(), &mut out);
    out
}

/// Exhaustive check of the defining property; returns the lexicographically
/// smallest violating `(i, j, subset)`.
pub fn verify_gadget(family: &MatrixFamily) -> Result<GadgetCheck> {
    family.validate()?;
    let p = family.p as u64;
    let cols = family.columns();
    let count = family.matrices.len();
    let columns: Vec<Vec<Vector>> = (0..count)
        .map(|i| (0..cols).map(|l| family.column(i, l)).collect())
        .collect();

    if family.kind == GadgetKind::B {
        for (i, cs) in columns.iter().enumerate() {
            let nonzero = (0..family.k as usize).any(|row| cs.iter().map(|c| c[row] as u64).sum::<u64>() % p != 0);
            if nonzero {
                return Ok(GadgetCheck::NonzeroColumnSum { i });
            }
        }
    }

    let subsets: Vec<Vec<usize>> = match family.kind {
        GadgetKind::A => subsets_lex(cols),
        GadgetKind::B => subsets_lex(cols).into_iter().filter(|s| s.len() < cols).collect(),
    };
    let rows = family.k as usize;
    let sum_cols = |i: usize, set: &mut dyn Iterator<Item = usize>, acc: &mut [u64]| {
        for l in set {
            for (a, &x) in acc.iter_mut().zip(&columns[i][l]) {
                *a += x as u64;
            }
        }
    };

    let witness = exec::find_first(count, |i| {
        let mut acc = vec![0u64; rows];
        let mut other = vec![0u64; rows];
        for j in (0..count).filter(|&j| j != i) {
            for s in &subsets {
                acc.iter_mut().for_each(|x| *x = 0);
                match family.kind {
                    GadgetKind::A => {
                        other.iter_mut().for_each(|x| *x = 0);
                        sum_cols(i, &mut s.iter().copied(), &mut acc);
                        sum_cols(j, &mut s.iter().copied(), &mut other);
                        if acc.iter().zip(&other).all(|(a, b)| a % p == b % p) {
                            return Some((i, j, s.clone()));
                        }
                    }
                    GadgetKind::B => {
                        sum_cols(i, &mut s.iter().copied(), &mut acc);
                        sum_cols(j, &mut (0..cols).filter(|l| !s.contains(l)), &mut acc);
                        if acc.iter().all(|a| a % p == 0) {
                            return Some((i, j, s.clone()));
                        }
                    }
                }
            }
        }
        None
    });
    Ok(match witness {
        Some((i, j, subset)) => GadgetCheck::Witness { i, j, subset },
        None => GadgetCheck::Ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn a_2_1() {
        let fam = construct_a(2, 1).unwrap();
        assert_eq!(fam.matrices, vec![vec![vec![0]], vec![vec![1]]]);
        assert!(verify_gadget(&fam).unwrap().is_ok());
    }

    #[test]
    fn a_2_2_conventions() {
        let fam = construct_a(2, 2).unwrap();
        assert_eq!(fam.matrices.len(), 4);
        assert_eq!(fam.matrices[0], vec![vec![0, 0], vec![0, 0]]);
        // the element 1 sits at index 2 in lexicographic order (0, x, 1, 1+x)
        assert_eq!(fam.column(2, 0), vec![1, 0]);
        assert_eq!(fam.column(2, 1), vec![0, 1]);
        assert!(verify_gadget(&fam).unwrap().is_ok());
    }

    #[test]
    fn b_small_cases() {
        let fam = construct_b(2, 1).unwrap();
        assert_eq!(fam.matrices, vec![vec![vec![0, 0]], vec![vec![1, 1]]]);
        let fam = construct_b(2, 2).unwrap();
        assert_eq!(fam.column(2, 2), vec![1, 1]);
        let fam = construct_b(3, 1).unwrap();
        assert_eq!(fam.matrices, vec![vec![vec![0, 0]], vec![vec![1, 2]], vec![vec![2, 1]]]);
        assert!(verify_gadget(&construct_b(3, 2).unwrap()).unwrap().is_ok());
    }

    #[test]
    fn duplicate_matrices_are_caught() {
        let mut fam = construct_a(3, 2).unwrap();
        fam.matrices[1] = fam.matrices[0].clone();
        assert_eq!(
            verify_gadget(&fam).unwrap(),
            GadgetCheck::Witness {
                i: 0,
                j: 1,
                subset: vec![0]
            }
        );
    }

    #[test]
    fn bad_column_sum_and_malformed() {
        let mut fam = construct_b(3, 2).unwrap();
        fam.matrices[4][0][2] = (fam.matrices[4][0][2] + 1) % 3;
        assert_eq!(verify_gadget(&fam).unwrap(), GadgetCheck::NonzeroColumnSum { i: 4 });
        fam.matrices.pop();
        assert!(verify_gadget(&fam).is_err());
    }

    #[test]
    fn subset_order() {
        assert_eq!(
            subsets_lex(3),
            vec![
                vec![0],
                vec![0, 1],
                vec![0, 1, 2],
                vec![0, 2],
                vec![1],
                vec![1, 2],
                vec![2]
            ]
        );
    }

    #[test]
    fn supported_families_verify() {
        for (p, k) in [(2, 1), (2, 2), (2, 3), (3, 1), (3, 2), (5, 1), (2, 4), (3, 3), (7, 1)] {
            let a = construct_a(p, k).unwrap();
            let b = construct_b(p, k).unwrap();
            assert_eq!(a.matrices.len() as u64, (p as u64).pow(k));
            assert!(verify_gadget(&a).unwrap().is_ok(), "A({p},{k})");
            assert!(verify_gadget(&b).unwrap().is_ok(), "B({p},{k})");
        }
    }
}
