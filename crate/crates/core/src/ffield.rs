//! Arithmetic in `F_p` and `F_{p^k}`.
//!
//! `F_{p^k}` is represented as `F_p[x] / (m(x))` for a monic irreducible `m`
//! of degree `k`. Elements are coefficient vectors in the polynomial basis,
//! constant term first. All choices are canonical so that every downstream
//! gadget is reproducible:
//!
//! * the modulus is the lexicographically smallest monic irreducible of degree
//!   `k`, comparing coefficient sequences constant term first;
//! * elements are enumerated in ascending lexicographic order of their
//!   coefficient vectors (so element `0` is the zero element);
//! * the generator is the first element in that enumeration whose
//!   multiplicative order is `p^k - 1`.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Largest supported field order.
pub const MAX_FIELD_ORDER: u64 = 1 << 16;

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) {
        return false;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// An element of `F_{p^k}` as polynomial-basis coordinates, constant first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FieldElem {
    pub coeffs: Vec<u32>,
}

impl FieldElem {
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Mul,
    Inv,
}

/// The ambient field `F_q`, `q = p^k`, with a fixed modulus and generator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawFieldSpec")]
pub struct FieldSpec {
    pub p: u32,
    pub k: u32,
    /// Monic modulus, `k + 1` coefficients, constant term first.
    pub modulus: Vec<u32>,
    /// Generator of the multiplicative group, as `k` coefficients.
    pub generator: Vec<u32>,
}

#[derive(Deserialize)]
struct RawFieldSpec {
    p: u32,
    k: u32,
    modulus: Vec<u32>,
    generator: Vec<u32>,
}

impl TryFrom<RawFieldSpec> for FieldSpec {
    type Error = Error;

    fn try_from(raw: RawFieldSpec) -> Result<Self> {
        let field = make_field(raw.p, raw.k)?;
        if field.modulus != raw.modulus || field.generator != raw.generator {
            // any other irreducible/generator is mathematically fine but would
            // silently change every derived gadget
            return Err(Error::invalid(format!(
                "field spec does not match the canonical choice for p={}, k={}",
                raw.p, raw.k
            )));
        }
        Ok(field)
    }
}

/// Builds `F_{p^k}` with the canonical modulus and generator.
pub fn make_field(p: u32, k: u32) -> Result<FieldSpec> {
    if !is_prime(p as u64) {
        return Err(Error::invalid(format!("{p} is not prime")));
    }
    if k == 0 {
        return Err(Error::invalid("extension degree must be at least 1"));
    }
    let order = (p as u64).checked_pow(k).filter(|&q| q <= MAX_FIELD_ORDER);
    if order.is_none() {
        return Err(Error::Range(format!("field order {p}^{k} exceeds {MAX_FIELD_ORDER}")));
    }
    let modulus = smallest_irreducible(p, k);
    let mut field = FieldSpec {
        p,
        k,
        modulus,
        generator: vec![0; k as usize],
    };
    field.generator = field.find_generator().coeffs;
    Ok(field)
}

/// Coefficient vector (constant first) of the `index`-th sequence of length
/// `len` in lexicographic order, i.e. the constant term is the most
/// significant digit.
fn lex_digits(mut index: u64, p: u32, len: usize) -> Vec<u32> {
    let mut out = vec![0u32; len];
    for slot in out.iter_mut().rev() {
        *slot = (index % p as u64) as u32;
        index /= p as u64;
    }
    out
}

fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    // m monic, deg m >= 1
    let mut r: Vec<u32> = a.to_vec();
    let dm = m.len() - 1;
    while r.len() > dm {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - dm;
        if lead != 0 {
            for (i, &mc) in m.iter().enumerate() {
                let t = (lead as u64 * mc as u64) % p as u64;
                let slot = &mut r[shift + i];
                *slot = ((*slot as u64 + p as u64 - t) % p as u64) as u32;
            }
        }
        r.pop();
    }
    r
}

fn is_irreducible(poly: &[u32], p: u32) -> bool {
    let deg = poly.len() - 1;
    for d in 1..=deg / 2 {
        let count = (p as u64).pow(d as u32);
        for idx in 0..count {
            let mut divisor = lex_digits(idx, p, d);
            divisor.push(1);
            if poly_rem(poly, &divisor, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

fn smallest_irreducible(p: u32, k: u32) -> Vec<u32> {
    let count = (p as u64).pow(k);
    (0..count)
        .map(|idx| {
            let mut poly = lex_digits(idx, p, k as usize);
            poly.push(1);
            poly
        })
        .find(|poly| is_irreducible(poly, p))
        .expect("an irreducible polynomial of every degree exists")
}

impl FieldSpec {
    pub fn order(&self) -> u64 {
        (self.p as u64).pow(self.k)
    }

    pub fn zero(&self) -> FieldElem {
        FieldElem {
            coeffs: vec![0; self.k as usize],
        }
    }

    pub fn one(&self) -> FieldElem {
        let mut e = self.zero();
        e.coeffs[0] = 1;
        e
    }

    pub fn generator(&self) -> FieldElem {
        FieldElem {
            coeffs: self.generator.clone(),
        }
    }

    /// The `index`-th element in enumeration order; index 0 is zero.
    pub fn element(&self, index: u64) -> FieldElem {
        FieldElem {
            coeffs: lex_digits(index, self.p, self.k as usize),
        }
    }

    /// Inverse of [`FieldSpec::element`].
    pub fn index_of(&self, a: &FieldElem) -> u64 {
        a.coeffs.iter().fold(0u64, |acc, &c| acc * self.p as u64 + c as u64)
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElem> + '_ {
        (0..self.order()).map(move |i| self.element(i))
    }

    pub fn contains(&self, a: &FieldElem) -> bool {
        a.coeffs.len() == self.k as usize && a.coeffs.iter().all(|&c| c < self.p)
    }

    pub fn add(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        FieldElem {
            coeffs: a
                .coeffs
                .iter()
                .zip(&b.coeffs)
                .map(|(&x, &y)| ((x as u64 + y as u64) % self.p as u64) as u32)
                .collect(),
        }
    }

    pub fn neg(&self, a: &FieldElem) -> FieldElem {
        FieldElem {
            coeffs: a.coeffs.iter().map(|&x| if x == 0 { 0 } else { self.p - x }).collect(),
        }
    }

    pub fn mul(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        let k = self.k as usize;
        let p = self.p as u64;
        let mut prod = vec![0u32; 2 * k - 1];
        for (i, &x) in a.coeffs.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.coeffs.iter().enumerate() {
                let slot = &mut prod[i + j];
                *slot = ((*slot as u64 + x as u64 * y as u64) % p) as u32;
            }
        }
        let mut coeffs = poly_rem(&prod, &self.modulus, self.p);
        coeffs.resize(k, 0);
        FieldElem { coeffs }
    }

    pub fn pow(&self, a: &FieldElem, mut e: u64) -> FieldElem {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: &FieldElem) -> Result<FieldElem> {
        if a.is_zero() {
            return Err(Error::Domain("inverse of zero".into()));
        }
        Ok(self.pow(a, self.order() - 2))
    }

    /// Multiplicative order of a nonzero element.
    pub fn mult_order(&self, a: &FieldElem) -> u64 {
        let group = self.order() - 1;
        let mut ord = group;
        for r in prime_factors(group) {
            while ord.is_multiple_of(r) && self.pow(a, ord / r) == self.one() {
                ord /= r;
            }
        }
        ord
    }

    fn find_generator(&self) -> FieldElem {
        let group = self.order() - 1;
        self.elements()
            .skip(1)
            .find(|a| self.mult_order(a) == group)
            .expect("the multiplicative group of a finite field is cyclic")
    }
}

/// Binary field operation; `b` is ignored for [`FieldOp::Inv`].
pub fn field_arith(field: &FieldSpec, a: &FieldElem, b: &FieldElem, op: FieldOp) -> Result<FieldElem> {
    if !field.contains(a) || (op != FieldOp::Inv && !field.contains(b)) {
        return Err(Error::invalid("operand is not an element of the field"));
    }
    match op {
        FieldOp::Add => Ok(field.add(a, b)),
        FieldOp::Mul => Ok(field.mul(a, b)),
        FieldOp::Inv => field.inv(a),
    }
}

/// Linear encoding `F_{p^k} -> F_p^k`: the polynomial-basis coordinates.
pub fn enc(field: &FieldSpec, a: &FieldElem) -> Vec<u32> {
    debug_assert!(field.contains(a));
    a.coeffs.clone()
}
