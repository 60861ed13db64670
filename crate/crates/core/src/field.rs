//! Arithmetic in odd-characteristic finite fields `F_{p^ell}`.
//!
//! Elements are polynomials over `F_p` reduced modulo a fixed monic
//! irreducible polynomial. A [`FieldElem`] stores its coefficient vector
//! packed into a single integer, `c_0 + c_1 p + ... + c_{ell-1} p^{ell-1}`,
//! which we call the element's *rank*. Rank order coincides with
//! lexicographic order on coefficient vectors read from the top degree down,
//! so the constants `0, 1, ..., p-1` come first.
//!
//! All arithmetic goes through a [`Field`], which is immutable after
//! construction and can be shared freely across threads.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest field order accepted by [`Field::new`].
pub const MAX_FIELD_ORDER: u64 = 1 << 16;

/// Extension fields up to this order get full addition and multiplication tables.
const TABLE_LIMIT: u32 = 1024;

/// An element of some [`Field`], identified by its rank.
#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct FieldElem(u32);

impl FieldElem {
    pub const ZERO: FieldElem = FieldElem(0);
    pub const ONE: FieldElem = FieldElem(1);

    /// The rank of the element in the canonical enumeration of its field.
    pub fn rank(self) -> u32 {
        self.0
    }

    /// Builds an element from a rank without checking it against any field.
    pub fn from_rank(rank: u32) -> Self {
        FieldElem(rank)
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

/// Binary and unary operations accepted by [`arith`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Inv,
}

struct Tables {
    add: Vec<u16>,
    mul: Vec<u16>,
}

/// The finite field `F_{p^ell}` with a fixed polynomial basis.
pub struct Field {
    p: u32,
    ell: u32,
    q: u32,
    /// Monic modulus, constant term first, length `ell + 1`.
    modulus: Vec<u32>,
    tables: Option<Tables>,
    inverses: OnceLock<Vec<u32>>,
    non_residue: OnceLock<FieldElem>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("p", &self.p)
            .field("ell", &self.ell)
            .field("modulus", &self.modulus)
            .finish()
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.ell == other.ell && self.modulus == other.modulus
    }
}

impl Eq for Field {}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Splits `q` into `(p, ell)` with `q = p^ell`, `p` an odd prime.
pub fn prime_power(q: u64) -> Result<(u64, u32)> {
    if q < 3 {
        return Err(Error::NotPrimePower(q));
    }
    let p = (2..=q).find(|d| q.is_multiple_of(*d)).unwrap();
    if p == 2 {
        return Err(Error::EvenCharacteristic);
    }
    let (mut rest, mut ell) = (q, 0);
    while rest % p == 0 {
        rest /= p;
        ell += 1;
    }
    if rest != 1 {
        return Err(Error::NotPrimePower(q));
    }
    Ok((p, ell))
}

// Polynomials over F_p, constant term first, trailing zeros trimmed.

fn trim(poly: &mut Vec<u32>) {
    while poly.last() == Some(&0) {
        poly.pop();
    }
}

fn poly_rem(num: &[u32], den: &[u32], p: u32) -> Vec<u32> {
    let mut rem = num.to_vec();
    trim(&mut rem);
    let dd = den.len() - 1;
    let lead_inv = mod_pow(den[dd], p - 2, p);
    while rem.len() > dd {
        let shift = rem.len() - 1 - dd;
        let factor = (rem[rem.len() - 1] as u64 * lead_inv as u64 % p as u64) as u32;
        for (i, &c) in den.iter().enumerate() {
            let sub = (factor as u64 * c as u64 % p as u64) as u32;
            rem[shift + i] = (rem[shift + i] + p - sub) % p;
        }
        trim(&mut rem);
    }
    rem
}

fn mod_pow(base: u32, mut exp: u32, p: u32) -> u32 {
    let m = p as u64;
    let (mut acc, mut b) = (1u64, base as u64 % m);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    acc as u32
}

/// Monic polynomial of degree `deg` whose lower coefficients are the base-`p`
/// digits of `index`.
fn monic_from_index(index: u64, deg: u32, p: u32) -> Vec<u32> {
    let mut poly = Vec::with_capacity(deg as usize + 1);
    let mut rest = index;
    for _ in 0..deg {
        poly.push((rest % p as u64) as u32);
        rest /= p as u64;
    }
    poly.push(1);
    poly
}

/// Irreducibility by trial division with every monic polynomial of degree
/// at most `deg / 2`.
pub fn is_irreducible(poly: &[u32], p: u32) -> bool {
    let deg = poly.len() as u32 - 1;
    for d in 1..=deg / 2 {
        for index in 0..(p as u64).pow(d) {
            let divisor = monic_from_index(index, d, p);
            if poly_rem(poly, &divisor, p).is_empty() {
                return false;
            }
        }
    }
    true
}

impl Field {
    /// Constructs `F_{p^ell}` with the lexicographically smallest monic
    /// irreducible modulus of degree `ell` (`x` itself when `ell = 1`).
    pub fn new(p: u64, ell: u32) -> Result<Arc<Field>> {
        if ell < 1 {
            return Err(Error::ZeroDegree);
        }
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if p == 2 {
            return Err(Error::EvenCharacteristic);
        }
        let q = (p as u128).pow(ell);
        if q > MAX_FIELD_ORDER as u128 {
            return Err(Error::FieldTooLarge(
                q.min(u64::MAX as u128) as u64,
                MAX_FIELD_ORDER,
            ));
        }
        let (p, q) = (p as u32, q as u32);
        let modulus = if ell == 1 {
            vec![0, 1]
        } else {
            (0..(p as u64).pow(ell))
                .map(|i| monic_from_index(i, ell, p))
                .find(|m| is_irreducible(m, p))
                .expect("an irreducible polynomial of every degree exists")
        };
        let mut field = Field {
            p,
            ell,
            q,
            modulus,
            tables: None,
            inverses: OnceLock::new(),
            non_residue: OnceLock::new(),
        };
        if ell > 1 && q <= TABLE_LIMIT {
            field.tables = Some(field.build_tables());
        }
        Ok(Arc::new(field))
    }

    /// Constructs the field of order `q`, which must be an odd prime power.
    pub fn with_order(q: u64) -> Result<Arc<Field>> {
        let (p, ell) = prime_power(q)?;
        Field::new(p, ell)
    }

    fn build_tables(&self) -> Tables {
        let n = self.q as usize;
        let mut add = vec![0u16; n * n];
        let mut mul = vec![0u16; n * n];
        for a in 0..self.q {
            for b in 0..self.q {
                let idx = a as usize * n + b as usize;
                add[idx] = self.add_digits(a, b) as u16;
                mul[idx] = self.mul_poly(a, b) as u16;
            }
        }
        Tables { add, mul }
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.ell
    }

    pub fn order(&self) -> u32 {
        self.q
    }

    /// Coefficients of the modulus, constant term first.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn zero(&self) -> FieldElem {
        FieldElem::ZERO
    }

    pub fn one(&self) -> FieldElem {
        FieldElem::ONE
    }

    pub fn contains(&self, a: FieldElem) -> bool {
        a.0 < self.q
    }

    pub fn check(&self, a: FieldElem) -> Result<FieldElem> {
        if self.contains(a) {
            Ok(a)
        } else {
            Err(Error::ForeignElement(a.0))
        }
    }

    /// The image of the integer `n` in the prime subfield.
    pub fn from_int(&self, n: i64) -> FieldElem {
        FieldElem(n.rem_euclid(self.p as i64) as u32)
    }

    pub fn from_coeffs(&self, coeffs: &[u32]) -> Result<FieldElem> {
        if coeffs.len() > self.ell as usize || coeffs.iter().any(|&c| c >= self.p) {
            return Err(Error::Parse(format!(
                "coefficients {coeffs:?} do not describe an element of F_{}^{}",
                self.p, self.ell
            )));
        }
        let rank = coeffs.iter().rev().fold(0u32, |acc, &c| acc * self.p + c);
        Ok(FieldElem(rank))
    }

    /// Coefficient vector of length `ell`, constant term first.
    pub fn coeffs(&self, a: FieldElem) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.ell as usize);
        let mut rest = a.0;
        for _ in 0..self.ell {
            out.push(rest % self.p);
            rest /= self.p;
        }
        out
    }

    /// All `q` elements in rank order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElem> + '_ {
        (0..self.q).map(FieldElem)
    }

    fn add_digits(&self, a: u32, b: u32) -> u32 {
        let (mut a, mut b) = (a, b);
        let mut out = 0;
        let mut weight = 1;
        for _ in 0..self.ell {
            out += (a % self.p + b % self.p) % self.p * weight;
            a /= self.p;
            b /= self.p;
            weight *= self.p;
        }
        out
    }

    fn mul_poly(&self, a: u32, b: u32) -> u32 {
        let (ca, cb) = (self.coeffs(FieldElem(a)), self.coeffs(FieldElem(b)));
        let p = self.p as u64;
        let mut prod = vec![0u32; 2 * self.ell as usize - 1];
        for (i, &x) in ca.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in cb.iter().enumerate() {
                prod[i + j] = ((prod[i + j] as u64 + x as u64 * y as u64) % p) as u32;
            }
        }
        let rem = poly_rem(&prod, &self.modulus, self.p);
        rem.iter().rev().fold(0u32, |acc, &c| acc * self.p + c)
    }

    #[inline]
    pub fn add(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        if self.ell == 1 {
            let s = a.0 + b.0;
            return FieldElem(if s >= self.p { s - self.p } else { s });
        }
        match &self.tables {
            Some(t) => FieldElem(t.add[(a.0 * self.q + b.0) as usize] as u32),
            None => FieldElem(self.add_digits(a.0, b.0)),
        }
    }

    #[inline]
    pub fn neg(&self, a: FieldElem) -> FieldElem {
        if self.ell == 1 {
            return FieldElem(if a.0 == 0 { 0 } else { self.p - a.0 });
        }
        let mut rest = a.0;
        let mut out = 0;
        let mut weight = 1;
        for _ in 0..self.ell {
            let c = rest % self.p;
            out += (self.p - c) % self.p * weight;
            rest /= self.p;
            weight *= self.p;
        }
        FieldElem(out)
    }

    #[inline]
    pub fn sub(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        if self.ell == 1 {
            return FieldElem(if a.0 >= b.0 {
                a.0 - b.0
            } else {
                a.0 + self.p - b.0
            });
        }
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        if self.ell == 1 {
            return FieldElem(((a.0 as u64 * b.0 as u64) % self.p as u64) as u32);
        }
        match &self.tables {
            Some(t) => FieldElem(t.mul[(a.0 * self.q + b.0) as usize] as u32),
            None => FieldElem(self.mul_poly(a.0, b.0)),
        }
    }

    pub fn pow(&self, a: FieldElem, mut exp: u64) -> FieldElem {
        let mut acc = FieldElem::ONE;
        let mut base = a;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    fn inverse_table(&self) -> &[u32] {
        self.inverses.get_or_init(|| {
            let mut inv = vec![0u32; self.q as usize];
            for a in 1..self.q {
                if inv[a as usize] == 0 {
                    let b = self.pow(FieldElem(a), self.q as u64 - 2).0;
                    inv[a as usize] = b;
                    inv[b as usize] = a;
                }
            }
            inv
        })
    }

    pub fn inv(&self, a: FieldElem) -> Result<FieldElem> {
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(FieldElem(self.inverse_table()[a.0 as usize]))
    }

    pub fn div(&self, a: FieldElem, b: FieldElem) -> Result<FieldElem> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn square(&self, a: FieldElem) -> FieldElem {
        self.mul(a, a)
    }

    /// Euler's criterion: `a = 0` or `a^((q-1)/2) = 1`.
    pub fn is_square(&self, a: FieldElem) -> bool {
        a.is_zero() || self.pow(a, (self.q as u64 - 1) / 2) == FieldElem::ONE
    }

    fn non_residue(&self) -> FieldElem {
        *self.non_residue.get_or_init(|| {
            self.elements()
                .find(|&z| !self.is_square(z))
                .expect("odd-order fields contain non-residues")
        })
    }

    /// The canonical square root: of the two roots `±s`, the one of smaller rank.
    pub fn sqrt(&self, a: FieldElem) -> Result<FieldElem> {
        if a.is_zero() {
            return Ok(a);
        }
        if !self.is_square(a) {
            return Err(Error::NotASquare(self.render(a)));
        }
        let q = self.q as u64;
        let root = if q % 4 == 3 {
            self.pow(a, (q + 1) / 4)
        } else {
            self.tonelli_shanks(a)
        };
        debug_assert_eq!(self.square(root), a);
        let other = self.neg(root);
        Ok(root.min(other))
    }

    fn tonelli_shanks(&self, a: FieldElem) -> FieldElem {
        let mut odd = self.q as u64 - 1;
        let mut two_adic = 0u32;
        while odd.is_multiple_of(2) {
            odd /= 2;
            two_adic += 1;
        }
        let mut m = two_adic;
        let mut c = self.pow(self.non_residue(), odd);
        let mut t = self.pow(a, odd);
        let mut root = self.pow(a, odd.div_ceil(2));
        while t != FieldElem::ONE {
            let mut i = 0;
            let mut probe = t;
            while probe != FieldElem::ONE {
                probe = self.square(probe);
                i += 1;
            }
            let mut b = c;
            for _ in 0..(m - i - 1) {
                b = self.square(b);
            }
            m = i;
            c = self.square(b);
            t = self.mul(t, c);
            root = self.mul(root, b);
        }
        root
    }

    /// The `(q-1)/2` nonzero quadratic residues, in rank order.
    pub fn squares_nonzero(&self) -> Vec<FieldElem> {
        let mut seen = vec![false; self.q as usize];
        for a in self.elements().skip(1) {
            seen[self.square(a).0 as usize] = true;
        }
        self.elements().filter(|a| seen[a.0 as usize]).collect()
    }

    /// Human-readable form: the integer for prime fields, otherwise the
    /// coefficient tuple `(c0,c1,...)`.
    pub fn render(&self, a: FieldElem) -> String {
        if self.ell == 1 {
            a.0.to_string()
        } else {
            let parts: Vec<String> = self.coeffs(a).iter().map(|c| c.to_string()).collect();
            format!("({})", parts.join(","))
        }
    }

    /// Inverse of [`Field::render`]. Prime-field elements may be negative integers.
    pub fn parse(&self, text: &str) -> Result<FieldElem> {
        let text = text.trim();
        if let Some(inner) = text.strip_prefix('(').and_then(|t| t.strip_suffix(')')) {
            let coeffs = inner
                .split(',')
                .map(|c| {
                    c.trim()
                        .parse::<u32>()
                        .map_err(|e| Error::Parse(format!("{c:?}: {e}")))
                })
                .collect::<Result<Vec<_>>>()?;
            return self.from_coeffs(&coeffs);
        }
        let n: i64 = text
            .parse()
            .map_err(|e| Error::Parse(format!("field element {text:?}: {e}")))?;
        if self.ell == 1 {
            Ok(self.from_int(n))
        } else if (0..self.p as i64).contains(&n) {
            Ok(FieldElem(n as u32))
        } else {
            Err(Error::Parse(format!(
                "{text:?} is not a constant of F_{}^{}",
                self.p, self.ell
            )))
        }
    }

    /// `true` when `self` and `other` are the same field, up to identity of the modulus.
    pub fn same_as(&self, other: &Field) -> bool {
        std::ptr::eq(self, other) || self == other
    }
}

/// An element bundled with its field, for checked arithmetic across API boundaries.
#[derive(Clone, Debug)]
pub struct Value {
    field: Arc<Field>,
    elem: FieldElem,
}

impl Value {
    pub fn new(field: &Arc<Field>, elem: FieldElem) -> Result<Value> {
        field.check(elem)?;
        Ok(Value {
            field: Arc::clone(field),
            elem,
        })
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    pub fn elem(&self) -> FieldElem {
        self.elem
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        self.elem == other.elem && self.field.same_as(&other.field)
    }
}

/// Checked field arithmetic. Unary operations (`Neg`, `Inv`) ignore `b`.
pub fn arith(a: &Value, b: &Value, op: ArithOp) -> Result<Value> {
    if !a.field.same_as(&b.field) {
        return Err(Error::MixedFields);
    }
    let f = &a.field;
    let elem = match op {
        ArithOp::Add => f.add(a.elem, b.elem),
        ArithOp::Sub => f.sub(a.elem, b.elem),
        ArithOp::Mul => f.mul(a.elem, b.elem),
        ArithOp::Div => f.div(a.elem, b.elem)?,
        ArithOp::Neg => f.neg(a.elem),
        ArithOp::Inv => f.inv(a.elem)?,
    };
    Ok(Value {
        field: Arc::clone(f),
        elem,
    })
}

macro_rules! value_op {
    ($trait:ident, $method:ident, $op:expr) => {
        impl $trait for &Value {
            type Output = Value;

            /// Panics when the operands come from different fields.
            fn $method(self, rhs: &Value) -> Value {
                arith(self, rhs, $op).expect("operands from the same field")
            }
        }
    };
}

value_op!(Add, add, ArithOp::Add);
value_op!(Sub, sub, ArithOp::Sub);
value_op!(Mul, mul, ArithOp::Mul);

impl Neg for &Value {
    type Output = Value;

    fn neg(self) -> Value {
        Value {
            field: Arc::clone(&self.field),
            elem: self.field.neg(self.elem),
        }
    }
}

/// A ring embedding `F_{p^m} -> F_{p^n}` for `m | n`.
///
/// The generator `x` of the small field is sent to the smallest-rank root of
/// the small field's modulus inside the big field; the rest follows by
/// linearity over `F_p`.
#[derive(Debug, Clone)]
pub struct SubfieldEmbedding {
    small: Arc<Field>,
    big: Arc<Field>,
    image: Vec<FieldElem>,
    preimage: HashMap<FieldElem, FieldElem>,
}

impl SubfieldEmbedding {
    pub fn new(small: &Arc<Field>, big: &Arc<Field>) -> Result<Self> {
        if small.p != big.p {
            return Err(Error::IncompatibleSubfield(format!(
                "characteristics {} and {} differ",
                small.p, big.p
            )));
        }
        if !big.ell.is_multiple_of(small.ell) {
            return Err(Error::IncompatibleSubfield(format!(
                "degree {} does not divide {}",
                small.ell, big.ell
            )));
        }
        let eval = |x: FieldElem| {
            small.modulus.iter().rev().fold(FieldElem::ZERO, |acc, &c| {
                big.add(big.mul(acc, x), FieldElem(c))
            })
        };
        let generator = big
            .elements()
            .find(|&x| eval(x).is_zero())
            .ok_or_else(|| Error::IncompatibleSubfield("modulus has no root".into()))?;
        let image: Vec<FieldElem> = small
            .elements()
            .map(|a| {
                small
                    .coeffs(a)
                    .iter()
                    .rev()
                    .fold(FieldElem::ZERO, |acc, &c| {
                        big.add(big.mul(acc, generator), FieldElem(c))
                    })
            })
            .collect();
        let preimage = image
            .iter()
            .enumerate()
            .map(|(i, &b)| (b, FieldElem(i as u32)))
            .collect();
        Ok(SubfieldEmbedding {
            small: Arc::clone(small),
            big: Arc::clone(big),
            image,
            preimage,
        })
    }

    pub fn small(&self) -> &Arc<Field> {
        &self.small
    }

    pub fn big(&self) -> &Arc<Field> {
        &self.big
    }

    pub fn apply(&self, a: FieldElem) -> Result<FieldElem> {
        self.image
            .get(a.0 as usize)
            .copied()
            .ok_or(Error::ForeignElement(a.0))
    }

    /// Images of all small-field elements, indexed by small-field rank.
    pub fn image(&self) -> &[FieldElem] {
        &self.image
    }

    pub fn contains(&self, b: FieldElem) -> bool {
        self.preimage.contains_key(&b)
    }

    pub fn preimage(&self, b: FieldElem) -> Option<FieldElem> {
        self.preimage.get(&b).copied()
    }
}

/// One-shot form of [`SubfieldEmbedding::apply`].
pub fn subfield_embed(small: &Arc<Field>, big: &Arc<Field>, a: FieldElem) -> Result<FieldElem> {
    SubfieldEmbedding::new(small, big)?.apply(a)
}
