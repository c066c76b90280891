//! Exact arithmetic in GF(p) for prime p and in GF(4).
//!
//! GF(4) is stored in the basis {1, e} over GF(2) with the defining relation
//! e² = e + 1. An element `a + b·e` is encoded as the two-bit integer
//! `a | (b << 1)`, which makes the canonical order 0, 1, e, 1+e coincide with
//! the integer order of the encodings.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldKind {
    Prime(u32),
    /// GF(4) = GF(2)[e] / (e² + e + 1).
    Gf4,
}

/// A supported finite field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldSpec {
    kind: FieldKind,
}

impl FieldSpec {
    /// Builds the field of order `q`. Accepts primes and 4.
    pub fn new(q: u64) -> Result<Self> {
        if q == 4 {
            return Ok(Self::gf4());
        }
        if q > u64::from(u32::MAX) || !is_prime(q) {
            return Err(Error::UnsupportedField(q));
        }
        Ok(Self {
            kind: FieldKind::Prime(q as u32),
        })
    }

    pub fn gf4() -> Self {
        Self { kind: FieldKind::Gf4 }
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn order(&self) -> u32 {
        match self.kind {
            FieldKind::Prime(p) => p,
            FieldKind::Gf4 => 4,
        }
    }

    pub fn characteristic(&self) -> u32 {
        match self.kind {
            FieldKind::Prime(p) => p,
            FieldKind::Gf4 => 2,
        }
    }

    /// True when 2 is invertible.
    pub fn is_odd_characteristic(&self) -> bool {
        self.characteristic() != 2
    }

    pub fn is_gf4(&self) -> bool {
        self.kind == FieldKind::Gf4
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement { value: 0, field: *self }
    }

    pub fn one(&self) -> FieldElement {
        FieldElement { value: 1, field: *self }
    }

    /// The GF(4) generator `e` (with e² = e + 1); `None` for prime fields.
    pub fn gf4_generator(&self) -> Option<FieldElement> {
        self.is_gf4().then_some(FieldElement {
            value: 0b10,
            field: *self,
        })
    }

    /// Element at position `index` of the canonical order.
    pub fn element(&self, index: u32) -> Option<FieldElement> {
        (index < self.order()).then_some(FieldElement {
            value: index,
            field: *self,
        })
    }

    /// All elements in canonical order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        let field = *self;
        (0..self.order()).map(move |value| FieldElement { value, field })
    }

    /// The image of the integer `n` under the ring map ℤ → F.
    pub fn from_int(&self, n: i64) -> FieldElement {
        let c = i64::from(self.characteristic());
        FieldElement {
            value: n.rem_euclid(c) as u32,
            field: *self,
        }
    }

    /// Parses `"3"` for prime fields and `"0" | "1" | "e" | "1+e"` for GF(4).
    pub fn parse_element(&self, s: &str) -> Result<FieldElement> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let value = match self.kind {
            FieldKind::Prime(p) => t
                .parse::<i64>()
                .map(|n| n.rem_euclid(i64::from(p)) as u32)
                .map_err(|_| Error::InvalidElement(s.to_string()))?,
            FieldKind::Gf4 => match t.as_str() {
                "0" => 0,
                "1" => 1,
                "e" => 2,
                "1+e" | "e+1" => 3,
                _ => return Err(Error::InvalidElement(s.to_string())),
            },
        };
        Ok(FieldElement { value, field: *self })
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.order())
    }
}

/// Shorthand for [`FieldSpec::new`].
pub fn field_new(q: u64) -> Result<FieldSpec> {
    FieldSpec::new(q)
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// A value in a [`FieldSpec`], stored by its canonical index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u32,
    field: FieldSpec,
}

impl FieldElement {
    pub fn field(&self) -> FieldSpec {
        self.field
    }

    /// Position in the canonical order of the field.
    pub fn index(&self) -> u32 {
        self.value
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    fn same_field(&self, other: &Self) -> Result<()> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(Error::FieldMismatch)
        }
    }

    fn with(&self, value: u32) -> Self {
        Self {
            value,
            field: self.field,
        }
    }

    pub fn checked_add(self, rhs: Self) -> Result<Self> {
        self.same_field(&rhs)?;
        let v = match self.field.kind {
            FieldKind::Prime(p) => ((u64::from(self.value) + u64::from(rhs.value)) % u64::from(p)) as u32,
            FieldKind::Gf4 => self.value ^ rhs.value,
        };
        Ok(self.with(v))
    }

    pub fn checked_neg(self) -> Self {
        match self.field.kind {
            FieldKind::Prime(p) => self.with(if self.value == 0 { 0 } else { p - self.value }),
            FieldKind::Gf4 => self,
        }
    }

    pub fn checked_sub(self, rhs: Self) -> Result<Self> {
        self.same_field(&rhs)?;
        self.checked_add(rhs.checked_neg())
    }

    pub fn checked_mul(self, rhs: Self) -> Result<Self> {
        self.same_field(&rhs)?;
        let v = match self.field.kind {
            FieldKind::Prime(p) => ((u64::from(self.value) * u64::from(rhs.value)) % u64::from(p)) as u32,
            FieldKind::Gf4 => gf4_mul(self.value, rhs.value),
        };
        Ok(self.with(v))
    }

    pub fn checked_inv(self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let v = match self.field.kind {
            FieldKind::Prime(p) => mod_inverse(self.value, p),
            // 1·1 = 1, e·(1+e) = e + e² = 1
            FieldKind::Gf4 => [0, 1, 3, 2][self.value as usize],
        };
        Ok(self.with(v))
    }

    pub fn checked_div(self, rhs: Self) -> Result<Self> {
        self.same_field(&rhs)?;
        self.checked_mul(rhs.checked_inv()?)
    }

    pub fn square(self) -> Self {
        self * self
    }
}

fn gf4_mul(a: u32, b: u32) -> u32 {
    let (a0, a1) = (a & 1, a >> 1);
    let (b0, b1) = (b & 1, b >> 1);
    // (a0 + a1 e)(b0 + b1 e) with e² = e + 1
    let c0 = (a0 & b0) ^ (a1 & b1);
    let c1 = (a0 & b1) ^ (a1 & b0) ^ (a1 & b1);
    c0 | (c1 << 1)
}

fn mod_inverse(a: u32, p: u32) -> u32 {
    let (mut r0, mut r1) = (i64::from(p), i64::from(a));
    let (mut t0, mut t1) = (0i64, 1i64);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    t0.rem_euclid(i64::from(p)) as u32
}

// The std operators panic on mixed fields or division by zero; the
// `checked_*` methods and `arith` report those as errors instead.
impl Add for FieldElement {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.checked_add(rhs).expect("field mismatch in addition")
    }
}

impl Sub for FieldElement {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self.checked_sub(rhs).expect("field mismatch in subtraction")
    }
}

impl Mul for FieldElement {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.checked_mul(rhs).expect("field mismatch in multiplication")
    }
}

impl Div for FieldElement {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        self.checked_div(rhs).expect("invalid division")
    }
}

impl Neg for FieldElement {
    type Output = Self;
    fn neg(self) -> Self {
        self.checked_neg()
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.field.kind {
            FieldKind::Prime(_) => write!(f, "{}", self.value),
            FieldKind::Gf4 => f.write_str(["0", "1", "e", "1+e"][self.value as usize]),
        }
    }
}

impl Serialize for FieldElement {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Inv,
}

/// Applies `op`; binary operations need `b`.
pub fn arith(op: ArithOp, a: FieldElement, b: Option<FieldElement>) -> Result<FieldElement> {
    let rhs = || b.ok_or_else(|| Error::InvalidElement("missing second operand".into()));
    match op {
        ArithOp::Add => a.checked_add(rhs()?),
        ArithOp::Sub => a.checked_sub(rhs()?),
        ArithOp::Mul => a.checked_mul(rhs()?),
        ArithOp::Div => a.checked_div(rhs()?),
        ArithOp::Neg => Ok(a.checked_neg()),
        ArithOp::Inv => a.checked_inv(),
    }
}

/// Smallest nonzero element (canonical order) with e² + e ≠ 0.
pub fn find_secure_element(field: FieldSpec) -> Result<FieldElement> {
    field
        .elements()
        .skip(1)
        .find(|&e| !(e.square() + e).is_zero())
        .ok_or(Error::NoSuchElement(field.order()))
}

/// A 3×3 matrix over one field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Matrix3 {
    field: FieldSpec,
    rows: [[FieldElement; 3]; 3],
}

impl Matrix3 {
    pub fn new(rows: [[FieldElement; 3]; 3]) -> Result<Self> {
        let field = rows[0][0].field();
        if rows.iter().flatten().any(|x| x.field() != field) {
            return Err(Error::FieldMismatch);
        }
        Ok(Self { field, rows })
    }

    /// Matrix of integers mapped into `field`.
    pub fn from_ints(field: FieldSpec, rows: [[i64; 3]; 3]) -> Self {
        Self {
            field,
            rows: rows.map(|r| r.map(|x| field.from_int(x))),
        }
    }

    pub fn identity(field: FieldSpec) -> Self {
        Self::from_ints(field, [[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn get(&self, r: usize, c: usize) -> FieldElement {
        self.rows[r][c]
    }

    pub fn rows(&self) -> &[[FieldElement; 3]; 3] {
        &self.rows
    }

    pub fn determinant(&self) -> FieldElement {
        let m = &self.rows;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Inverse through the adjugate.
    pub fn inverse(&self) -> Result<Self> {
        let det = self.determinant();
        if det.is_zero() {
            return Err(Error::SingularMatrix);
        }
        let inv_det = det.checked_inv()?;
        let m = &self.rows;
        let cof = |r: usize, c: usize| {
            let (r1, r2) = ((r + 1) % 3, (r + 2) % 3);
            let (c1, c2) = ((c + 1) % 3, (c + 2) % 3);
            m[r1][c1] * m[r2][c2] - m[r1][c2] * m[r2][c1]
        };
        let mut rows = [[self.field.zero(); 3]; 3];
        for (i, row) in rows.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                // adj(m)[i][j] = cofactor(j, i)
                *x = cof(j, i) * inv_det;
            }
        }
        Ok(Self {
            field: self.field,
            rows,
        })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.field != other.field {
            return Err(Error::FieldMismatch);
        }
        let mut rows = [[self.field.zero(); 3]; 3];
        for (i, row) in rows.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = (0..3).fold(self.field.zero(), |acc, k| acc + self.rows[i][k] * other.rows[k][j]);
            }
        }
        Ok(Self {
            field: self.field,
            rows,
        })
    }

    pub fn mul_vec(&self, v: [FieldElement; 3]) -> Result<[FieldElement; 3]> {
        if v.iter().any(|x| x.field() != self.field) {
            return Err(Error::FieldMismatch);
        }
        Ok(self
            .rows
            .map(|row| (0..3).fold(self.field.zero(), |acc, k| acc + row[k] * v[k])))
    }
}

/// Shorthand for [`Matrix3::inverse`].
pub fn mat3_inverse(m: &Matrix3) -> Result<Matrix3> {
    m.inverse()
}
