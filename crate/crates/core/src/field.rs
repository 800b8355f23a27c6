//! Arithmetic in GF(2^n) with fixed primitive polynomials, used to build
//! reference power functions such as the Gold function `x^3`.

use crate::error::{Error, Result};
use crate::vecfun::VectorialFunction;

/// Primitive polynomials by degree (bit `i` is the coefficient of `x^i`).
const PRIMITIVE: [u64; 12] = [
    0, 0b11, 0b111, 0b1011, 0b10011, 0b100101, 0b1000011, 0b10000011, 0x11d, 0x211, 0x409, 0x805,
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GaloisField {
    n: usize,
    poly: u64,
}

impl GaloisField {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n >= PRIMITIVE.len() {
            return Err(Error::TooManyVariables(n));
        }
        Ok(GaloisField {
            n,
            poly: PRIMITIVE[n],
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mul(&self, mut a: u64, mut b: u64) -> u64 {
        let mut acc = 0;
        while b != 0 {
            if b & 1 == 1 {
                acc ^= a;
            }
            b >>= 1;
            a <<= 1;
            if (a >> self.n) & 1 == 1 {
                a ^= self.poly;
            }
        }
        acc
    }

    pub fn pow(&self, mut a: u64, mut e: u64) -> u64 {
        let mut acc = 1;
        while e != 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; zero maps to zero.
    pub fn inv(&self, a: u64) -> u64 {
        self.pow(a, (1 << self.n) - 2)
    }

    /// Absolute trace `a + a^2 + ... + a^{2^{n-1}}`, which is 0 or 1.
    pub fn trace(&self, a: u64) -> u64 {
        let mut t = 0;
        let mut x = a;
        for _ in 0..self.n {
            t ^= x;
            x = self.mul(x, x);
        }
        t
    }
}

/// `x -> x^e` over GF(2^n) as an (n,n)-function.
pub fn power_function(n: usize, e: u64) -> Result<VectorialFunction> {
    let field = GaloisField::new(n)?;
    VectorialFunction::from_fn(n, n, |x| field.pow(x, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_primitive() {
        for n in 1..PRIMITIVE.len() {
            let f = GaloisField::new(n).unwrap();
            let order = (1u64 << n) - 1;
            // the generator x has order exactly 2^n - 1
            let mut seen = 1;
            let mut x = 2 % (1 << n);
            if n == 1 {
                continue;
            }
            while x != 1 {
                x = f.mul(x, 2);
                seen += 1;
            }
            assert_eq!(seen, order, "n = {n}");
        }
    }

    #[test]
    fn inverse_and_trace() {
        let f = GaloisField::new(8).unwrap();
        for a in 1..256 {
            assert_eq!(f.mul(a, f.inv(a)), 1);
            assert!(f.trace(a) <= 1);
        }
        let ones = (0..256).filter(|&a| f.trace(a) == 1).count();
        assert_eq!(ones, 128);
    }
}
