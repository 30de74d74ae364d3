//! Exact integer Laurent polynomials.
//!
//! All knot-polynomial arithmetic is integer-exact: bracket and Jones values
//! are small enough that `i64` coefficients never overflow within the
//! state-sum budget.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// Laurent polynomial in one variable with integer exponents.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LaurentPoly {
    /// exponent → coefficient; zero coefficients are never stored.
    coeffs: BTreeMap<i64, i64>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        LaurentPoly::default()
    }

    pub fn one() -> Self {
        LaurentPoly::monomial(0, 1)
    }

    pub fn monomial(exp: i64, coeff: i64) -> Self {
        let mut p = LaurentPoly::default();
        if coeff != 0 {
            p.coeffs.insert(exp, coeff);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, exp: i64) -> i64 {
        self.coeffs.get(&exp).copied().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        self.coeffs.iter().map(|(&e, &c)| (e, c))
    }

    pub fn add_term(&mut self, exp: i64, coeff: i64) {
        let entry = self.coeffs.entry(exp).or_insert(0);
        *entry += coeff;
        if *entry == 0 {
            self.coeffs.remove(&exp);
        }
    }

    pub fn add(&self, other: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        for (e, c) in other.terms() {
            out.add_term(e, c);
        }
        out
    }

    pub fn mul(&self, other: &LaurentPoly) -> LaurentPoly {
        let mut out = LaurentPoly::zero();
        for (e1, c1) in self.terms() {
            for (e2, c2) in other.terms() {
                out.add_term(e1 + e2, c1 * c2);
            }
        }
        out
    }

    pub fn scale(&self, k: i64) -> LaurentPoly {
        let mut out = LaurentPoly::zero();
        for (e, c) in self.terms() {
            out.add_term(e, c * k);
        }
        out
    }

    /// Multiply by a single monomial.
    pub fn shift(&self, exp: i64, coeff: i64) -> LaurentPoly {
        self.mul(&LaurentPoly::monomial(exp, coeff))
    }

    pub fn pow(&self, n: u32) -> LaurentPoly {
        let mut out = LaurentPoly::one();
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    /// Variable inversion `x ↔ x⁻¹`.
    pub fn mirror(&self) -> LaurentPoly {
        let mut out = LaurentPoly::zero();
        for (e, c) in self.terms() {
            out.add_term(-e, c);
        }
        out
    }

    pub fn render(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut s = String::new();
        let terms: Vec<(i64, i64)> = self.terms().collect();
        for (i, &(e, c)) in terms.iter().rev().enumerate() {
            let sign = if c < 0 { "-" } else { "+" };
            if i == 0 {
                if c < 0 {
                    s.push('-');
                }
            } else {
                s.push_str(&format!(" {sign} "));
            }
            let mag = c.abs();
            match (mag, e) {
                (_, 0) => s.push_str(&mag.to_string()),
                (1, 1) => s.push_str(var),
                (1, _) => s.push_str(&format!("{var}^{e}")),
                (_, 1) => s.push_str(&format!("{mag}{var}")),
                (_, _) => s.push_str(&format!("{mag}{var}^{e}")),
            }
        }
        s
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render("A"))
    }
}

/// Laurent polynomial with half-integer exponents: the exponent key is the
/// numerator over the fixed denominator 2 (so key 3 means `t^{3/2}`).
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct HalfLaurent {
    coeffs: BTreeMap<i64, i64>,
}

impl HalfLaurent {
    pub fn one() -> Self {
        let mut p = HalfLaurent::default();
        p.coeffs.insert(0, 1);
        p
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs.get(&0) == Some(&1)
    }

    /// `(numerator_of_2·exponent, coefficient)` pairs.
    pub fn terms(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        self.coeffs.iter().map(|(&e, &c)| (e, c))
    }

    pub fn add_term(&mut self, half_exp: i64, coeff: i64) {
        let entry = self.coeffs.entry(half_exp).or_insert(0);
        *entry += coeff;
        if *entry == 0 {
            self.coeffs.remove(&half_exp);
        }
    }

    /// Converts a polynomial in `A` to one in `t = A⁻⁴`. Bracket-derived
    /// polynomials always have even `A`-exponents, so every term lands on a
    /// half-integer power of `t`.
    pub fn from_a_poly(p: &LaurentPoly) -> Self {
        let mut out = HalfLaurent::default();
        for (e, c) in p.terms() {
            assert!(e % 2 == 0, "normalized bracket must have even A-exponents");
            out.add_term(-e / 2, c);
        }
        out
    }

    /// `t ↔ 1/t`.
    pub fn mirror(&self) -> HalfLaurent {
        let mut out = HalfLaurent::default();
        for (e, c) in self.terms() {
            out.add_term(-e, c);
        }
        out
    }

    /// `|V(−1)|` with the convention `t^{1/2} = i`: the link determinant.
    /// The value is a Gaussian integer with one vanishing part; its modulus
    /// is returned exactly.
    pub fn determinant(&self) -> u64 {
        let (mut re, mut im) = (0i64, 0i64);
        for (e, c) in self.terms() {
            match e.rem_euclid(4) {
                0 => re += c,
                1 => im += c,
                2 => re -= c,
                3 => im -= c,
                _ => unreachable!(),
            }
        }
        assert!(
            re == 0 || im == 0,
            "V(-1) must be real or purely imaginary, got {re} + {im} i"
        );
        re.unsigned_abs().max(im.unsigned_abs())
    }

    pub fn render(&self, var: &str) -> String {
        if self.coeffs.is_empty() {
            return "0".to_string();
        }
        let mut s = String::new();
        let terms: Vec<(i64, i64)> = self.terms().collect();
        for (i, &(e, c)) in terms.iter().rev().enumerate() {
            let sign = if c < 0 { "-" } else { "+" };
            if i == 0 {
                if c < 0 {
                    s.push('-');
                }
            } else {
                s.push_str(&format!(" {sign} "));
            }
            let mag = c.abs();
            let exp = if e % 2 == 0 {
                (e / 2).to_string()
            } else {
                format!("{e}/2")
            };
            match (mag, e) {
                (_, 0) => s.push_str(&mag.to_string()),
                (1, 2) => s.push_str(var),
                (1, _) => s.push_str(&format!("{var}^{exp}")),
                (_, 2) => s.push_str(&format!("{mag}{var}")),
                (_, _) => s.push_str(&format!("{mag}{var}^{exp}")),
            }
        }
        s
    }
}

impl fmt::Display for HalfLaurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render("t"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_is_exact_and_sparse() {
        let p = LaurentPoly::monomial(2, 1).add(&LaurentPoly::monomial(-2, -1));
        let q = p.mul(&p);
        // (A² − A⁻²)² = A⁴ − 2 + A⁻⁴
        assert_eq!(q.coeff(4), 1);
        assert_eq!(q.coeff(0), -2);
        assert_eq!(q.coeff(-4), 1);
        assert_eq!(q.terms().count(), 3);
        // cancellation removes the entry entirely
        let r = q.add(&q.scale(-1));
        assert!(r.is_zero());
    }

    #[test]
    fn mirror_inverts_exponents() {
        let p = LaurentPoly::monomial(5, -1).add(&LaurentPoly::monomial(-3, 2));
        let m = p.mirror();
        assert_eq!(m.coeff(-5), -1);
        assert_eq!(m.coeff(3), 2);
        assert_eq!(p.mirror().mirror(), p);
    }

    #[test]
    fn trefoil_jones_determinant() {
        // V(right trefoil) = −t⁴ + t³ + t → |V(−1)| = 3
        let mut v = HalfLaurent::default();
        v.add_term(8, -1);
        v.add_term(6, 1);
        v.add_term(2, 1);
        assert_eq!(v.determinant(), 3);
    }

    #[test]
    fn hopf_jones_determinant() {
        // V(positive Hopf) = −t^{1/2} − t^{5/2} → |V(−1)| = 2 with t^{1/2} = i
        let mut v = HalfLaurent::default();
        v.add_term(1, -1);
        v.add_term(5, -1);
        assert_eq!(v.determinant(), 2);
    }

    #[test]
    fn unknot_determinant() {
        assert_eq!(HalfLaurent::one().determinant(), 1);
    }

    #[test]
    fn rendering() {
        let mut v = HalfLaurent::default();
        v.add_term(8, -1);
        v.add_term(6, 1);
        v.add_term(2, 1);
        assert_eq!(v.render("t"), "-t^4 + t^3 + t");
    }
}
