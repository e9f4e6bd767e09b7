//! Arithmetic in prime fields GF(q).
//!
//! Every symbol handled by the codes in this crate is an element of a prime
//! field. [`PrimeField`] carries the modulus and exposes unchecked operations
//! on raw residues (`u32` in `[0, q)`), which is what matrices and codecs use
//! internally. [`FieldElement`] pairs a residue with its field and checks that
//! both operands of a binary operation agree on the modulus.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GfError {
    #[error("modulus {0} is not prime")]
    NotPrime(u32),
    #[error("field mismatch: GF({left}) vs GF({right})")]
    FieldMismatch { left: u32, right: u32 },
    #[error("division by zero in GF({0})")]
    DivisionByZero(u32),
    #[error("value {value} is not a residue of GF({q})")]
    OutOfRange { value: u64, q: u32 },
}

/// A prime field GF(q).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeField {
    q: u32,
}

fn is_prime(q: u32) -> bool {
    if q < 2 {
        return false;
    }
    if q < 4 {
        return true;
    }
    if q.is_multiple_of(2) {
        return false;
    }
    let q = q as u64;
    let mut f = 3u64;
    while f * f <= q {
        if q.is_multiple_of(f) {
            return false;
        }
        f += 2;
    }
    true
}

impl PrimeField {
    pub fn new(q: u32) -> Result<Self, GfError> {
        if !is_prime(q) {
            return Err(GfError::NotPrime(q));
        }
        Ok(Self { q })
    }

    #[inline]
    pub fn modulus(&self) -> u32 {
        self.q
    }

    /// Number of elements, i.e. the modulus.
    #[inline]
    pub fn size(&self) -> usize {
        self.q as usize
    }

    /// Element with the given integer value reduced mod q.
    pub fn elem(&self, value: u64) -> FieldElement {
        FieldElement {
            value: (value % self.q as u64) as u32,
            field: *self,
        }
    }

    /// Element with the given residue; fails if `value >= q`.
    pub fn try_elem(&self, value: u64) -> Result<FieldElement, GfError> {
        if value >= self.q as u64 {
            return Err(GfError::OutOfRange { value, q: self.q });
        }
        Ok(FieldElement {
            value: value as u32,
            field: *self,
        })
    }

    pub fn zero(&self) -> FieldElement {
        self.elem(0)
    }

    pub fn one(&self) -> FieldElement {
        self.elem(1)
    }

    /// Reduce an arbitrary signed integer into `[0, q)`.
    #[inline]
    pub fn reduce_i64(&self, v: i64) -> u32 {
        v.rem_euclid(self.q as i64) as u32
    }

    #[inline]
    pub fn contains(&self, v: u32) -> bool {
        v < self.q
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        ((a as u64 + b as u64) % self.q as u64) as u32
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        ((a as u64 + self.q as u64 - b as u64) % self.q as u64) as u32
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.q - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.q as u64) as u32
    }

    /// `acc + a * b`
    #[inline]
    pub fn mul_add(&self, acc: u32, a: u32, b: u32) -> u32 {
        ((acc as u64 + a as u64 * b as u64) % self.q as u64) as u32
    }

    pub fn pow(&self, base: u32, mut exp: u64) -> u32 {
        let q = self.q as u64;
        let mut b = base as u64 % q;
        let mut acc = 1u64 % q;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * b % q;
            }
            b = b * b % q;
            exp >>= 1;
        }
        acc as u32
    }

    /// Multiplicative inverse via the extended Euclidean algorithm.
    pub fn inv(&self, a: u32) -> Result<u32, GfError> {
        if a.is_multiple_of(self.q) {
            return Err(GfError::DivisionByZero(self.q));
        }
        let (mut r0, mut r1) = (self.q as i64, (a % self.q) as i64);
        let (mut t0, mut t1) = (0i64, 1i64);
        while r1 != 0 {
            let quot = r0 / r1;
            (r0, r1) = (r1, r0 - quot * r1);
            (t0, t1) = (t1, t0 - quot * t1);
        }
        debug_assert_eq!(r0, 1);
        Ok(self.reduce_i64(t0))
    }

    pub fn div(&self, a: u32, b: u32) -> Result<u32, GfError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// Inner product of two equal-length slices.
    pub fn dot(&self, a: &[u32], b: &[u32]) -> u32 {
        debug_assert_eq!(a.len(), b.len());
        let q = self.q as u64;
        let mut acc = 0u64;
        for (&x, &y) in a.iter().zip(b) {
            acc = (acc + x as u64 * y as u64) % q;
        }
        acc as u32
    }
}

impl fmt::Display for PrimeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.q)
    }
}

/// An element of a [`PrimeField`], stored as its least nonnegative residue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u32,
    field: PrimeField,
}

impl FieldElement {
    #[inline]
    pub fn value(&self) -> u32 {
        self.value
    }

    #[inline]
    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    fn same_field(&self, other: &Self) -> Result<PrimeField, GfError> {
        if self.field != other.field {
            return Err(GfError::FieldMismatch {
                left: self.field.q,
                right: other.field.q,
            });
        }
        Ok(self.field)
    }

    fn with(&self, value: u32) -> Self {
        Self {
            value,
            field: self.field,
        }
    }

    pub fn try_add(self, other: Self) -> Result<Self, GfError> {
        let f = self.same_field(&other)?;
        Ok(self.with(f.add(self.value, other.value)))
    }

    pub fn try_sub(self, other: Self) -> Result<Self, GfError> {
        let f = self.same_field(&other)?;
        Ok(self.with(f.sub(self.value, other.value)))
    }

    pub fn try_mul(self, other: Self) -> Result<Self, GfError> {
        let f = self.same_field(&other)?;
        Ok(self.with(f.mul(self.value, other.value)))
    }

    pub fn try_div(self, other: Self) -> Result<Self, GfError> {
        let f = self.same_field(&other)?;
        Ok(self.with(f.div(self.value, other.value)?))
    }

    pub fn inv(self) -> Result<Self, GfError> {
        Ok(self.with(self.field.inv(self.value)?))
    }

    pub fn pow(self, exp: u64) -> Self {
        self.with(self.field.pow(self.value, exp))
    }
}

impl std::ops::Neg for FieldElement {
    type Output = Self;

    fn neg(self) -> Self {
        self.with(self.field.neg(self.value))
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}
