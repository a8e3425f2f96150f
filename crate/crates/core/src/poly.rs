//! Sparse multivariate polynomials with integer coefficients, and the
//! compact text grammar used on the command line.
//!
//! Grammar (whitespace ignored):
//!
//! ```text
//! poly   := ['+'|'-'] term (('+'|'-') term)*
//! term   := factor ('*' factor)*
//! factor := integer | var ['^' integer]
//! var    := 'x' digits | 'x' | 'y' | 'z' | 'w'
//! ```
//!
//! `x`, `y`, `z`, `w` are shorthands for `x1`..`x4`. Variables are 1-based.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntPolynomial {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, i128>,
}

/// `lead * t^2 + linear(x') * t + constant(x')` in a chosen variable `t`,
/// with `lead` a constant.
#[derive(Debug, Clone)]
pub struct QuadraticSplit {
    pub var: usize,
    pub lead: i128,
    pub linear: IntPolynomial,
    pub constant: IntPolynomial,
}

impl IntPolynomial {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: i128, nvars: usize) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    /// The coordinate function `x_{i+1}` (0-based index `i`).
    pub fn var(i: usize, nvars: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(e, 1);
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Vec<u32>, i128)>) -> Result<Self> {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            if e.len() != nvars {
                return Err(Error::DimensionMismatch {
                    expected: nvars,
                    got: e.len(),
                });
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    fn add_term(&mut self, e: Vec<u32>, c: i128) {
        if c == 0 {
            return;
        }
        match self.terms.entry(e) {
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += c;
                if *slot.get() == 0 {
                    slot.remove();
                }
            }
            Entry::Vacant(slot) => {
                slot.insert(c);
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], i128)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), *c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum())
            .max()
            .unwrap_or(0)
    }

    pub fn degree_in(&self, var: usize) -> u32 {
        self.terms.keys().map(|e| e[var]).max().unwrap_or(0)
    }

    pub fn constant_term(&self) -> i128 {
        self.terms.get(&vec![0; self.nvars]).copied().unwrap_or(0)
    }

    /// `Some(c)` when the polynomial is the constant `c`.
    pub fn as_constant(&self) -> Option<i128> {
        (self.degree() == 0).then(|| self.constant_term())
    }

    /// Same polynomial viewed in `nvars >= self.nvars` variables.
    pub fn widen(&self, nvars: usize) -> Result<Self> {
        if nvars < self.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                got: nvars,
            });
        }
        let terms = self.terms.iter().map(|(e, c)| {
            let mut e = e.clone();
            e.resize(nvars, 0);
            (e, *c)
        });
        Self::from_terms(nvars, terms)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let n = self.nvars.max(other.nvars);
        let mut out = self.widen(n)?;
        for (e, c) in other.widen(n)?.terms {
            out.add_term(e, c);
        }
        Ok(out)
    }

    pub fn scale(&self, k: i128) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c * k);
        }
        out
    }

    /// Evaluation with overflow checking.
    pub fn eval_checked(&self, x: &[i128]) -> Result<i128> {
        if x.len() < self.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                got: x.len(),
            });
        }
        let mut acc: i128 = 0;
        for (e, c) in &self.terms {
            let mut t = *c;
            for (xi, &k) in x.iter().zip(e) {
                for _ in 0..k {
                    t = t.checked_mul(*xi).ok_or(Error::Overflow)?;
                }
            }
            acc = acc.checked_add(t).ok_or(Error::Overflow)?;
        }
        Ok(acc)
    }

    /// Evaluation on `i64` coordinates; callers guarantee the result fits.
    pub fn eval_i64(&self, x: &[i64]) -> i128 {
        let mut acc: i128 = 0;
        for (e, c) in &self.terms {
            let mut t = *c;
            for (xi, &k) in x.iter().zip(e) {
                for _ in 0..k {
                    t *= *xi as i128;
                }
            }
            acc += t;
        }
        acc
    }

    /// Value modulo `m` of the polynomial at residues `x`.
    pub fn eval_mod(&self, x: &[u64], m: u64) -> u64 {
        let m128 = m as u128;
        let mut acc: u128 = 0;
        for (e, c) in &self.terms {
            let mut t = c.rem_euclid(m as i128) as u128;
            for (xi, &k) in x.iter().zip(e) {
                for _ in 0..k {
                    t = t * (*xi as u128 % m128) % m128;
                }
            }
            acc = (acc + t) % m128;
        }
        acc as u64
    }

    /// Writes the polynomial as a quadratic in `var` when its `var^2`
    /// coefficient is constant and no higher power of `var` occurs.
    pub fn split_quadratic(&self, var: usize) -> Option<QuadraticSplit> {
        if self.degree_in(var) > 2 {
            return None;
        }
        let mut lead = 0;
        let mut linear = Self::zero(self.nvars);
        let mut constant = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            let mut rest = e.clone();
            rest[var] = 0;
            match e[var] {
                2 => {
                    if rest.iter().any(|&k| k > 0) {
                        return None;
                    }
                    lead = *c;
                }
                1 => linear.add_term(rest, *c),
                _ => constant.add_term(rest, *c),
            }
        }
        Some(QuadraticSplit {
            var,
            lead,
            linear,
            constant,
        })
    }

    /// When every non-constant term involves a single variable, returns the
    /// constant and, per variable, its `(exponent, coefficient)` list.
    pub fn separable_parts(&self) -> Option<(i128, Vec<Vec<(u32, i128)>>)> {
        let mut parts = vec![Vec::new(); self.nvars];
        let mut constant = 0;
        for (e, c) in &self.terms {
            let mut support = e.iter().enumerate().filter(|(_, &k)| k > 0);
            match (support.next(), support.next()) {
                (None, _) => constant = *c,
                (Some((i, &k)), None) => parts[i].push((k, *c)),
                _ => return None,
            }
        }
        Some((constant, parts))
    }

    /// Parses the grammar in the module docs. The variable count is the
    /// largest index seen, or `min_vars` if that is larger.
    pub fn parse(text: &str, min_vars: usize) -> Result<Self> {
        let src: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if src.is_empty() {
            return Err(Error::Parse("empty polynomial".into()));
        }
        let mut raw: Vec<(Vec<(usize, u32)>, i128)> = Vec::new();
        let bytes = src.as_bytes();
        let mut pos = 0;
        let mut nvars = min_vars;
        while pos < bytes.len() {
            let mut sign = 1i128;
            if bytes[pos] == b'+' || bytes[pos] == b'-' {
                if bytes[pos] == b'-' {
                    sign = -1;
                }
                pos += 1;
            } else if pos != 0 {
                return Err(Error::Parse(format!("expected '+' or '-' at offset {pos} in {text:?}")));
            }
            let mut coef = sign;
            let mut powers = Vec::new();
            loop {
                let (factor, next) = parse_factor(bytes, pos, text)?;
                pos = next;
                match factor {
                    Factor::Int(k) => {
                        coef = coef.checked_mul(k).ok_or(Error::Overflow)?;
                    }
                    Factor::Var(i, k) => {
                        nvars = nvars.max(i + 1);
                        powers.push((i, k));
                    }
                }
                if pos < bytes.len() && bytes[pos] == b'*' {
                    pos += 1;
                } else {
                    break;
                }
            }
            raw.push((powers, coef));
        }
        let mut p = Self::zero(nvars);
        for (powers, coef) in raw {
            let mut e = vec![0u32; nvars];
            for (i, k) in powers {
                e[i] += k;
            }
            p.add_term(e, coef);
        }
        Ok(p)
    }
}

enum Factor {
    Int(i128),
    Var(usize, u32),
}

fn parse_uint(bytes: &[u8], mut pos: usize, text: &str) -> Result<(u128, usize)> {
    let start = pos;
    while pos < bytes.len() && bytes[pos].is_ascii_digit() {
        pos += 1;
    }
    if start == pos {
        return Err(Error::Parse(format!("expected a number at offset {start} in {text:?}")));
    }
    let s = std::str::from_utf8(&bytes[start..pos]).expect("ascii digits");
    let v = s
        .parse::<u128>()
        .map_err(|e| Error::Parse(format!("{s}: {e}")))?;
    Ok((v, pos))
}

fn parse_factor(bytes: &[u8], pos: usize, text: &str) -> Result<(Factor, usize)> {
    let Some(&c) = bytes.get(pos) else {
        return Err(Error::Parse(format!("unexpected end of {text:?}")));
    };
    if c.is_ascii_digit() {
        let (v, next) = parse_uint(bytes, pos, text)?;
        let v = i128::try_from(v).map_err(|_| Error::Overflow)?;
        return Ok((Factor::Int(v), next));
    }
    let (index, mut next) = match c {
        b'x' if bytes.get(pos + 1).is_some_and(u8::is_ascii_digit) => {
            let (i, next) = parse_uint(bytes, pos + 1, text)?;
            if i == 0 {
                return Err(Error::Parse("variables are numbered from x1".into()));
            }
            (i as usize - 1, next)
        }
        b'x' => (0, pos + 1),
        b'y' => (1, pos + 1),
        b'z' => (2, pos + 1),
        b'w' => (3, pos + 1),
        other => {
            return Err(Error::Parse(format!(
                "unexpected {:?} at offset {pos} in {text:?}",
                other as char
            )))
        }
    };
    let mut exp = 1u32;
    if bytes.get(next) == Some(&b'^') {
        let (k, after) = parse_uint(bytes, next + 1, text)?;
        exp = u32::try_from(k).map_err(|_| Error::Overflow)?;
        next = after;
    }
    Ok((Factor::Var(index, exp), next))
}

impl fmt::Display for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (e, c)) in self.terms.iter().rev().enumerate() {
            let monomial: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| match k {
                    1 => format!("x{}", i + 1),
                    _ => format!("x{}^{}", i + 1, k),
                })
                .collect();
            let sign = if *c < 0 { "-" } else if idx > 0 { "+" } else { "" };
            let mag = c.unsigned_abs();
            if monomial.is_empty() {
                write!(f, "{sign}{mag}")?;
            } else if mag == 1 {
                write!(f, "{sign}{}", monomial.join("*"))?;
            } else {
                write!(f, "{sign}{mag}*{}", monomial.join("*"))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_and_echoes_canonically() {
        let p = IntPolynomial::parse("x1^2 + x2^2 - 3*x3^2", 0).unwrap();
        assert_eq!(p.nvars(), 3);
        assert_eq!(p.to_string(), "x1^2+x2^2-3*x3^2");
        let q = IntPolynomial::parse("1+2*x^2+3*y^2", 0).unwrap();
        assert_eq!(q.to_string(), "2*x1^2+3*x2^2+1");
        assert_eq!(IntPolynomial::parse("x1-x1", 2).unwrap().to_string(), "0");
        assert_eq!(IntPolynomial::parse("-x2*x1", 0).unwrap().to_string(), "-x1*x2");
    }

    #[test]
    fn rejects_garbage() {
        assert!(IntPolynomial::parse("", 0).is_err());
        assert!(IntPolynomial::parse("x1^", 0).is_err());
        assert!(IntPolynomial::parse("x0", 0).is_err());
        assert!(IntPolynomial::parse("2x1", 0).is_err());
        assert!(IntPolynomial::parse("x1+*x2", 0).is_err());
        assert!(IntPolynomial::parse("q1", 0).is_err());
    }

    #[test]
    fn quadratic_split_and_separability() {
        let p = IntPolynomial::parse("x1^2+x1*x3+2*x2^2-5", 0).unwrap();
        let s = p.split_quadratic(0).unwrap();
        assert_eq!(s.lead, 1);
        assert_eq!(s.linear.to_string(), "x3");
        assert_eq!(s.constant.to_string(), "2*x2^2-5");
        assert!(p.separable_parts().is_none());
        let cubic = IntPolynomial::parse("x1^2*x2", 0).unwrap();
        assert!(cubic.split_quadratic(0).is_none());
        let (c, parts) = IntPolynomial::parse("x1^2-3*x3^2+7", 0)
            .unwrap()
            .separable_parts()
            .unwrap();
        assert_eq!(c, 7);
        assert_eq!(parts[1], vec![]);
        assert_eq!(parts[2], vec![(2, -3)]);
    }

    proptest! {
        #[test]
        fn display_parse_roundtrip_and_eval(
            coeffs in proptest::collection::vec(-20i128..20, 6),
            x in proptest::collection::vec(-30i64..30, 2),
        ) {
            let terms = vec![
                (vec![2, 0], coeffs[0]), (vec![1, 1], coeffs[1]), (vec![0, 2], coeffs[2]),
                (vec![1, 0], coeffs[3]), (vec![0, 1], coeffs[4]), (vec![0, 0], coeffs[5]),
            ];
            let p = IntPolynomial::from_terms(2, terms).unwrap();
            let q = IntPolynomial::parse(&p.to_string(), 2).unwrap();
            prop_assert_eq!(&p, &q);
            let (a, b) = (x[0] as i128, x[1] as i128);
            let direct = coeffs[0]*a*a + coeffs[1]*a*b + coeffs[2]*b*b + coeffs[3]*a + coeffs[4]*b + coeffs[5];
            prop_assert_eq!(p.eval_i64(&x), direct);
            prop_assert_eq!(p.eval_checked(&[a, b]).unwrap(), direct);
            let m = 97u64;
            let r: Vec<u64> = x.iter().map(|v| v.rem_euclid(m as i64) as u64).collect();
            prop_assert_eq!(p.eval_mod(&r, m) as i128, direct.rem_euclid(m as i128));
        }
    }
}
