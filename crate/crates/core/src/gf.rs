//! Arithmetic over GF(2^k).
//!
//! Elements are stored as their polynomial coefficient bit patterns, so
//! addition is XOR. Multiplication and inversion are table driven; tables are
//! built once per field from the reduction polynomial.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported field order.
pub const MAX_ORDER: usize = 256;

/// An element of GF(q), stored as an integer in `[0, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GfSymbol(pub u8);

impl GfSymbol {
    pub const ZERO: GfSymbol = GfSymbol(0);
    pub const ONE: GfSymbol = GfSymbol(1);

    pub fn value(self) -> u8 {
        self.0
    }
}

impl fmt::Display for GfSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u8> for GfSymbol {
    fn from(v: u8) -> Self {
        GfSymbol(v)
    }
}

/// Default irreducible polynomials, indexed by degree. GF(4) uses x^2+x+1.
const REDUCTION_POLYS: [u32; 9] = [
    0, 0b11, 0b111, 0b1011, 0b10011, 0b100101, 0b1000011, 0b10001001, 0b100011101,
];

/// The field GF(q) for q a power of two.
#[derive(Clone, PartialEq, Eq)]
pub struct GfField {
    q: usize,
    degree: u32,
    poly: u32,
    mul: Vec<u8>,
    inv: Vec<u8>,
}

impl fmt::Debug for GfField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GfField")
            .field("q", &self.q)
            .field("poly", &format_args!("{:#b}", self.poly))
            .finish()
    }
}

/// Carry-less product of two polynomials reduced modulo `poly`.
fn poly_mul_mod(mut a: u32, mut b: u32, poly: u32, degree: u32) -> u32 {
    let mut acc = 0;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if degree > 0 && a & (1 << degree) != 0 {
            a ^= poly;
        }
    }
    acc
}

impl GfField {
    /// GF(q) with the default reduction polynomial for its degree.
    pub fn new(q: usize) -> Result<Self> {
        if !q.is_power_of_two() || !(2..=MAX_ORDER).contains(&q) {
            return Err(Error::InvalidField(format!(
                "field order {q} is not a power of two in [2, {MAX_ORDER}]"
            )));
        }
        let degree = q.trailing_zeros();
        Self::with_polynomial(q, REDUCTION_POLYS[degree as usize])
    }

    /// GF(q) reduced by an explicit polynomial (bit pattern including the
    /// leading term). The polynomial must be irreducible.
    pub fn with_polynomial(q: usize, poly: u32) -> Result<Self> {
        if !q.is_power_of_two() || !(2..=MAX_ORDER).contains(&q) {
            return Err(Error::InvalidField(format!("field order {q} unsupported")));
        }
        let degree = q.trailing_zeros();
        if poly >> degree != 1 {
            return Err(Error::InvalidField(format!(
                "polynomial {poly:#b} does not have degree {degree}"
            )));
        }
        let mut mul = vec![0u8; q * q];
        for a in 0..q {
            for b in 0..q {
                mul[a * q + b] = poly_mul_mod(a as u32, b as u32, poly, degree) as u8;
            }
        }
        let mut inv = vec![0u8; q];
        for a in 1..q {
            match (1..q).find(|&b| mul[a * q + b] == 1) {
                Some(b) => inv[a] = b as u8,
                None => {
                    return Err(Error::InvalidField(format!(
                        "polynomial {poly:#b} is reducible over GF(2)"
                    )))
                }
            }
        }
        Ok(Self {
            q,
            degree,
            poly,
            mul,
            inv,
        })
    }

    pub fn order(&self) -> usize {
        self.q
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn polynomial(&self) -> u32 {
        self.poly
    }

    pub fn symbol(&self, v: u8) -> Result<GfSymbol> {
        self.check(GfSymbol(v))
    }

    fn check(&self, a: GfSymbol) -> Result<GfSymbol> {
        if (a.0 as usize) < self.q {
            Ok(a)
        } else {
            Err(Error::SymbolOutOfRange {
                value: a.0 as usize,
                q: self.q,
            })
        }
    }

    pub fn add(&self, a: GfSymbol, b: GfSymbol) -> Result<GfSymbol> {
        Ok(GfSymbol(self.check(a)?.0 ^ self.check(b)?.0))
    }

    pub fn mul(&self, a: GfSymbol, b: GfSymbol) -> Result<GfSymbol> {
        let (a, b) = (self.check(a)?, self.check(b)?);
        Ok(GfSymbol(self.mul_raw(a.0, b.0)))
    }

    pub fn inv(&self, a: GfSymbol) -> Result<GfSymbol> {
        let a = self.check(a)?;
        if a.0 == 0 {
            return Err(Error::ZeroInverse);
        }
        Ok(GfSymbol(self.inv[a.0 as usize]))
    }

    /// Unchecked multiply for hot loops; operands must be `< q`.
    #[inline]
    pub fn mul_raw(&self, a: u8, b: u8) -> u8 {
        self.mul[a as usize * self.q + b as usize]
    }

    /// Unchecked inverse; `a` must be nonzero and `< q`.
    #[inline]
    pub fn inv_raw(&self, a: u8) -> u8 {
        debug_assert!(a != 0);
        self.inv[a as usize]
    }

    /// Nonzero elements in increasing order.
    pub fn nonzero(&self) -> impl Iterator<Item = u8> {
        1..self.q as u8
    }
}

pub fn gf_add(a: GfSymbol, b: GfSymbol, f: &GfField) -> Result<GfSymbol> {
    f.add(a, b)
}

pub fn gf_mul(a: GfSymbol, b: GfSymbol, f: &GfField) -> Result<GfSymbol> {
    f.mul(a, b)
}

pub fn gf_inv(a: GfSymbol, f: &GfField) -> Result<GfSymbol> {
    f.inv(a)
}
