//! Integral quadratic forms, affine quadrics `q(x) = m`, and positive-definite
//! binary forms together with their representation functions.

use std::fmt;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Signed, Zero};

use crate::arith::{self, Factorizer};
use crate::error::{Error, Result};
use crate::poly::IntPolynomial;

pub type Rational = Ratio<i128>;

/// An integral quadratic form stored through its doubled Gram matrix `G`,
/// so that `q(x) = x^T G x / 2`. Diagonal entries of `G` are even; the
/// off-diagonal `G[i][j]` is the coefficient of `x_i x_j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuadraticForm {
    dim: usize,
    gram2: Vec<i128>,
    label: Option<String>,
}

impl QuadraticForm {
    pub fn from_gram2(dim: usize, gram2: Vec<i128>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidForm("dimension must be at least 1".into()));
        }
        if gram2.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: gram2.len(),
            });
        }
        for i in 0..dim {
            if gram2[i * dim + i] % 2 != 0 {
                return Err(Error::InvalidForm(format!(
                    "doubled Gram matrix has odd diagonal entry at {i}"
                )));
            }
            for j in 0..i {
                if gram2[i * dim + j] != gram2[j * dim + i] {
                    return Err(Error::InvalidForm("Gram matrix is not symmetric".into()));
                }
            }
        }
        Ok(Self {
            dim,
            gram2,
            label: None,
        })
    }

    /// `sum_i coeffs[i] * x_i^2`.
    pub fn diagonal(coeffs: &[i128]) -> Result<Self> {
        let n = coeffs.len();
        let mut g = vec![0; n * n];
        for (i, c) in coeffs.iter().enumerate() {
            g[i * n + i] = 2 * c;
        }
        Self::from_gram2(n, g)
    }

    pub fn from_polynomial(p: &IntPolynomial) -> Result<Self> {
        let n = p.nvars();
        let mut g = vec![0; n * n];
        for (e, c) in p.terms() {
            let support: Vec<usize> = (0..n).filter(|&i| e[i] > 0).collect();
            match (support.as_slice(), e.iter().sum::<u32>()) {
                ([i], 2) => g[i * n + i] = 2 * c,
                ([i, j], 2) => {
                    g[i * n + j] = c;
                    g[j * n + i] = c;
                }
                _ => {
                    return Err(Error::InvalidForm(format!(
                        "{p} is not a homogeneous quadratic form"
                    )))
                }
            }
        }
        Self::from_gram2(n, g)
    }

    /// Accepts `diag:1,1,-3`, `gram2:2,0;0,-2` (rows of the doubled Gram
    /// matrix), or a homogeneous quadratic polynomial such as `x1^2+x2^2-3*x3^2`.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let form = if let Some(rest) = text.strip_prefix("diag:") {
            Self::diagonal(&parse_int_list(rest, ',')?)?
        } else if let Some(rest) = text.strip_prefix("gram2:") {
            let rows: Vec<Vec<i128>> = rest
                .split(';')
                .map(|r| parse_int_list(r, ','))
                .collect::<Result<_>>()?;
            let n = rows.len();
            if rows.iter().any(|r| r.len() != n) {
                return Err(Error::Parse("gram2 matrix must be square".into()));
            }
            Self::from_gram2(n, rows.concat())?
        } else {
            Self::from_polynomial(&IntPolynomial::parse(text, 0)?)?
        };
        Ok(form.with_label(text))
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Entry `(i, j)` of the doubled Gram matrix.
    pub fn gram2(&self, i: usize, j: usize) -> i128 {
        self.gram2[i * self.dim + j]
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.dim).all(|i| (0..self.dim).all(|j| i == j || self.gram2(i, j) == 0))
    }

    pub fn evaluate(&self, x: &[i128]) -> Result<i128> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        let mut acc: i128 = 0;
        for i in 0..self.dim {
            let sq = x[i].checked_mul(x[i]).ok_or(Error::Overflow)?;
            let t = (self.gram2(i, i) / 2).checked_mul(sq).ok_or(Error::Overflow)?;
            acc = acc.checked_add(t).ok_or(Error::Overflow)?;
            for j in i + 1..self.dim {
                let t = self
                    .gram2(i, j)
                    .checked_mul(x[i])
                    .and_then(|v| v.checked_mul(x[j]))
                    .ok_or(Error::Overflow)?;
                acc = acc.checked_add(t).ok_or(Error::Overflow)?;
            }
        }
        Ok(acc)
    }

    /// The bilinear pairing `x^T G y` (twice the polar form).
    pub fn pairing(&self, x: &[i128], y: &[i128]) -> i128 {
        let n = self.dim;
        let mut acc = 0;
        for i in 0..n {
            for j in 0..n {
                acc += x[i] * self.gram2(i, j) * y[j];
            }
        }
        acc
    }

    pub fn to_polynomial(&self) -> IntPolynomial {
        let n = self.dim;
        let mut terms = Vec::new();
        for i in 0..n {
            let mut e = vec![0; n];
            e[i] = 2;
            terms.push((e, self.gram2(i, i) / 2));
            for j in i + 1..n {
                let mut e = vec![0; n];
                e[i] = 1;
                e[j] = 1;
                terms.push((e, self.gram2(i, j)));
            }
        }
        IntPolynomial::from_terms(n, terms).expect("exponent vectors sized to dim")
    }

    /// Sum of absolute coefficients: `|q(x)| <= coeff_norm * max|x_i|^2`.
    pub fn coeff_norm(&self) -> i128 {
        let n = self.dim;
        let mut s = 0;
        for i in 0..n {
            s += (self.gram2(i, i) / 2).abs();
            for j in i + 1..n {
                s += self.gram2(i, j).abs();
            }
        }
        s
    }

    /// Determinant of the rational Gram matrix `G/2`.
    pub fn det(&self) -> Rational {
        Rational::new(bareiss_det(self.dim, &self.gram2), 1i128 << self.dim)
    }

    /// Diagonal entries of a rational congruence diagonalization of `G/2`.
    pub fn rational_diagonal(&self) -> Vec<Rational> {
        let n = self.dim;
        let mut a: Vec<Vec<Rational>> = (0..n)
            .map(|i| (0..n).map(|j| Rational::new(self.gram2(i, j), 2)).collect())
            .collect();
        let mut diag = Vec::with_capacity(n);
        for k in 0..n {
            if a[k][k].is_zero() {
                if let Some(i) = (k + 1..n).find(|&i| !a[i][i].is_zero()) {
                    a.swap(k, i);
                    for row in a.iter_mut() {
                        row.swap(k, i);
                    }
                } else if let Some(j) = (k + 1..n).find(|&j| !a[k][j].is_zero()) {
                    // x_k -> x_k + x_j makes the pivot 2 a_kj.
                    for t in 0..n {
                        let v = a[j][t];
                        a[k][t] += v;
                    }
                    for row in a.iter_mut() {
                        let v = row[j];
                        row[k] += v;
                    }
                } else {
                    diag.push(Rational::zero());
                    continue;
                }
            }
            let p = a[k][k];
            for i in k + 1..n {
                let f = a[i][k] / p;
                for t in k + 1..n {
                    let v = a[k][t];
                    a[i][t] -= f * v;
                }
            }
            diag.push(p);
        }
        diag
    }

    /// Numbers of positive and negative eigenvalues, computed exactly.
    pub fn signature(&self) -> Result<(usize, usize)> {
        let d = self.rational_diagonal();
        if d.iter().any(Zero::is_zero) {
            return Err(Error::DegenerateForm);
        }
        let pos = d.iter().filter(|v| v.is_positive()).count();
        Ok((pos, d.len() - pos))
    }

    pub fn is_indefinite(&self) -> Result<bool> {
        let (p, n) = self.signature()?;
        Ok(p > 0 && n > 0)
    }

    /// Rational diagonalization rescaled to integers in the same square classes.
    pub fn integral_diagonal(&self) -> Vec<i128> {
        self.rational_diagonal()
            .into_iter()
            .map(|r| r.numer() * r.denom())
            .collect()
    }
}

impl fmt::Display for QuadraticForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_polynomial())
    }
}

fn parse_int_list(s: &str, sep: char) -> Result<Vec<i128>> {
    s.split(sep)
        .map(|t| {
            t.trim()
                .parse::<i128>()
                .map_err(|e| Error::Parse(format!("{t:?}: {e}")))
        })
        .collect()
}

/// Fraction-free Gaussian elimination.
fn bareiss_det(n: usize, m: &[i128]) -> i128 {
    let mut a: Vec<Vec<i128>> = (0..n).map(|i| m[i * n..(i + 1) * n].to_vec()).collect();
    let mut sign = 1;
    let mut prev = 1i128;
    for k in 0..n {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&i| a[i][k] != 0) {
                Some(i) => {
                    a.swap(k, i);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

fn is_rational_square(r: &Rational) -> bool {
    !r.is_negative() && arith::is_square(*r.numer()) && arith::is_square(*r.denom())
}

/// The integral model `q(x) = m` of an affine quadric.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AffineQuadricInstance {
    form: QuadraticForm,
    m: i128,
    bad_modulus: u128,
}

impl AffineQuadricInstance {
    pub fn new(form: QuadraticForm, m: i128) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("m must be nonzero".into()));
        }
        let det = form.det();
        if det.is_zero() {
            return Err(Error::DegenerateForm);
        }
        let product = 2u128
            .checked_mul(m.unsigned_abs())
            .and_then(|v| v.checked_mul(det.numer().unsigned_abs()))
            .and_then(|v| v.checked_mul(det.denom().unsigned_abs()))
            .ok_or(Error::Overflow)?;
        let bad_modulus = arith::radical(product)?;
        Ok(Self {
            form,
            m,
            bad_modulus,
        })
    }

    pub fn parse(form: &str, m: i128) -> Result<Self> {
        Self::new(QuadraticForm::parse(form)?, m)
    }

    pub fn form(&self) -> &QuadraticForm {
        &self.form
    }

    pub fn m(&self) -> i128 {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.form.dim
    }

    /// `rad(2 * m * det q)`: primes where smoothness of the reduction may fail.
    pub fn bad_modulus(&self) -> u128 {
        self.bad_modulus
    }

    pub fn is_good_prime(&self, p: u128) -> bool {
        self.bad_modulus % p != 0
    }

    /// The polynomial `q(x) - m`.
    pub fn defining_polynomial(&self) -> IntPolynomial {
        self.form
            .to_polynomial()
            .add(&IntPolynomial::constant(-self.m, self.dim()))
            .expect("same variable count")
    }

    /// Canonical text used for hashing and report echo.
    pub fn canonical(&self) -> String {
        format!("{}={}", self.form, self.m)
    }

    /// For a two-sheeted hyperboloid (m has the sign of the one-dimensional
    /// eigenspace) returns an integral vector `v` such that the sign of
    /// `pairing(x, v)` labels the sheet containing `x`.
    pub fn sheet_functional(&self) -> Option<Vec<i128>> {
        let (pos, neg) = self.form.signature().ok()?;
        let minority_negative = match (pos, neg) {
            (p, 1) if p >= 1 => true,
            (1, n) if n >= 1 => false,
            _ => return None,
        };
        if (self.m < 0) != minority_negative {
            return None;
        }
        let n = self.dim();
        // Unit vectors first, then small combinations.
        let mut candidates: Vec<Vec<i128>> = (0..n)
            .map(|i| (0..n).map(|j| (i == j) as i128).collect())
            .collect();
        let total = 5usize.pow(n as u32);
        for code in 0..total {
            let mut c = code;
            let v: Vec<i128> = (0..n)
                .map(|_| {
                    let d = (c % 5) as i128 - 2;
                    c /= 5;
                    d
                })
                .collect();
            candidates.push(v);
        }
        candidates.into_iter().find(|v| {
            let val = self.form.evaluate(v).unwrap_or(0);
            if minority_negative {
                val < 0
            } else {
                val > 0
            }
        })
    }
}

/// A place of the rationals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Place {
    Infinity,
    Prime(u128),
}

/// The Hilbert symbol `(a, b)_v`.
pub fn hilbert_symbol(a: i128, b: i128, place: Place) -> Result<i8> {
    if a == 0 || b == 0 {
        return Err(Error::InvalidArgument("Hilbert symbol needs nonzero arguments".into()));
    }
    let p = match place {
        Place::Infinity => return Ok(if a < 0 && b < 0 { -1 } else { 1 }),
        Place::Prime(p) if arith::is_prime(p) => p,
        Place::Prime(p) => return Err(Error::NotPrime(p)),
    };
    let (alpha, u) = arith::split_valuation(a, p);
    let (beta, v) = arith::split_valuation(b, p);
    let odd = |k: u32| k % 2 == 1;
    if p == 2 {
        let eps = |x: i128| (x.rem_euclid(4) == 3) as u32;
        let omega = |x: i128| matches!(x.rem_euclid(8), 3 | 5) as u32;
        let e = eps(u) * eps(v) + alpha * omega(v) + beta * omega(u);
        return Ok(if odd(e) { -1 } else { 1 });
    }
    let mut s: i8 = if odd(alpha) && odd(beta) && p % 4 == 3 { -1 } else { 1 };
    if odd(beta) {
        s *= arith::legendre(u, p);
    }
    if odd(alpha) {
        s *= arith::legendre(v, p);
    }
    Ok(s)
}

/// Places at which `(a, b)_v` can differ from 1.
fn relevant_places(values: &[i128]) -> Result<Vec<Place>> {
    let mut primes = vec![2u128];
    let f = Factorizer::default();
    for &v in values {
        for p in f.prime_divisors(v.unsigned_abs())? {
            if !primes.contains(&p) {
                primes.push(p);
            }
        }
    }
    primes.sort_unstable();
    let mut places = vec![Place::Infinity];
    places.extend(primes.into_iter().map(Place::Prime));
    Ok(places)
}

/// Hasse-Minkowski decision for a ternary form: true iff `q` has no
/// nontrivial rational zero.
pub fn is_q_anisotropic_ternary(form: &QuadraticForm) -> Result<bool> {
    if form.dim() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            got: form.dim(),
        });
    }
    let d = form.integral_diagonal();
    if d.contains(&0) {
        return Err(Error::DegenerateForm);
    }
    let (a, b, c) = (d[0], d[1], d[2]);
    // <a,b,c> is isotropic iff (-ac, -bc)_v = 1 at every place.
    let x = -a * c;
    let y = -b * c;
    for place in relevant_places(&[a, b, c])? {
        if hilbert_symbol(x, y, place)? == -1 {
            return Ok(true);
        }
    }
    Ok(false)
}

/// True iff `-m det q` is not the square of a rational number; for a ternary
/// quadric this is equivalent to the surface containing no rational line.
pub fn minus_m_det_nonsquare(instance: &AffineQuadricInstance) -> Result<bool> {
    if instance.dim() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            got: instance.dim(),
        });
    }
    let value = -instance.form().det() * Rational::from_integer(instance.m());
    Ok(!is_rational_square(&value))
}

/// A positive-definite binary form `a u^2 + b uv + c v^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BinaryForm {
    a: i128,
    b: i128,
    c: i128,
}

impl BinaryForm {
    pub fn new(a: i128, b: i128, c: i128) -> Result<Self> {
        let f = Self { a, b, c };
        if a <= 0 || f.discriminant() >= 0 {
            return Err(Error::InvalidForm(format!(
                "{a},{b},{c} is not positive definite"
            )));
        }
        Ok(f)
    }

    /// Parses `a,b,c`.
    pub fn parse(text: &str) -> Result<Self> {
        let v = parse_int_list(text, ',')?;
        match v.as_slice() {
            [a, b, c] => Self::new(*a, *b, *c),
            _ => Err(Error::Parse(format!("binary form needs a,b,c: {text:?}"))),
        }
    }

    pub fn coefficients(&self) -> (i128, i128, i128) {
        (self.a, self.b, self.c)
    }

    pub fn discriminant(&self) -> i128 {
        self.b * self.b - 4 * self.a * self.c
    }

    pub fn content(&self) -> i128 {
        self.a.gcd(&self.b).gcd(&self.c)
    }

    /// The primitive form obtained by dividing out the content.
    pub fn primitive_part(&self) -> (BinaryForm, i128) {
        let g = self.content();
        (
            BinaryForm {
                a: self.a / g,
                b: self.b / g,
                c: self.c / g,
            },
            g,
        )
    }

    pub fn eval(&self, u: i128, v: i128) -> i128 {
        self.a * u * u + self.b * u * v + self.c * v * v
    }

    /// Whether `p` lies in the obstruction set: `(D/p) = -1`. Primes dividing
    /// `2D` are never in it.
    pub fn is_obstruction_prime(&self, p: u128) -> bool {
        p != 2 && arith::legendre(self.discriminant(), p) == -1
    }

    /// The indicator of `n = Q(u, v)` for some integers `u, v`.
    pub fn represents(&self, n: i128) -> bool {
        self.represents_with(n, &Factorizer::default())
    }

    pub fn represents_with(&self, n: i128, factorizer: &Factorizer) -> bool {
        if n < 0 {
            return false;
        }
        if n == 0 {
            return true;
        }
        let (prim, g) = self.primitive_part();
        if n % g != 0 {
            return false;
        }
        prim.represents_primitive(n / g, factorizer)
    }

    fn solve_u(&self, n: i128, v: i128) -> bool {
        // 4a Q(u,v) = (2au + bv)^2 - D v^2
        let disc = 4 * self.a * n + self.discriminant() * v * v;
        let Some(s) = arith::exact_sqrt(disc) else {
            return false;
        };
        let s = s as i128;
        let two_a = 2 * self.a;
        (s - self.b * v) % two_a == 0 || (-s - self.b * v) % two_a == 0
    }

    fn represents_primitive(&self, n: i128, factorizer: &Factorizer) -> bool {
        let vmax = arith::isqrt((4 * self.a * n / -self.discriminant()) as u128) as i128;
        // Q(-u,-v) = Q(u,v), so v >= 0 suffices. Small v first: most
        // represented values have a short representation.
        const QUICK: i128 = 24;
        if (0..=vmax.min(QUICK)).any(|v| self.solve_u(n, v)) {
            return true;
        }
        if vmax <= QUICK {
            return false;
        }
        if let Ok(fac) = factorizer.factor(n as u128) {
            if fac
                .iter()
                .any(|&(p, e)| e % 2 == 1 && self.is_obstruction_prime(p))
            {
                return false;
            }
        }
        (QUICK + 1..=vmax).any(|v| self.solve_u(n, v))
    }

    /// The multiplicative relaxation: 1 iff no prime of the obstruction set
    /// divides `n`; 0 for `n = 0`.
    pub fn b_star(&self, n: u128) -> Result<u8> {
        self.b_star_with(n, &Factorizer::default())
    }

    pub fn b_star_with(&self, n: u128, factorizer: &Factorizer) -> Result<u8> {
        if n == 0 {
            return Ok(0);
        }
        let blocked = factorizer
            .factor(n)?
            .iter()
            .any(|&(p, _)| self.is_obstruction_prime(p));
        Ok(u8::from(!blocked))
    }

    /// The square `r` built from the obstruction primes dividing `n` with
    /// their full multiplicity; `None` when one of them occurs to an odd power.
    pub fn admissible_square_part(&self, n: u128, factorizer: &Factorizer) -> Result<Option<u128>> {
        if n == 0 {
            return Ok(None);
        }
        let mut r = 1u128;
        for (p, e) in factorizer.factor(n)? {
            if self.is_obstruction_prime(p) {
                if e % 2 == 1 {
                    return Ok(None);
                }
                r *= p.pow(e);
            }
        }
        Ok(Some(r))
    }
}

impl fmt::Display for BinaryForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.a, self.b, self.c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(text: &str) -> QuadraticForm {
        QuadraticForm::parse(text).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(q("diag:1,1,-3").evaluate(&[1, 1, 1]).unwrap(), -1);
        assert_eq!(q("x1^2+x2^2-x3^2").evaluate(&[2, 2, 1]).unwrap(), 7);
        assert_eq!(q("x1*x2+x3^2").evaluate(&[0, 0, 0]).unwrap(), 0);
        assert!(matches!(
            q("diag:1,1").evaluate(&[1, 2, 3]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert_eq!(q("diag:1,1").evaluate(&[i128::MAX, 1]), Err(Error::Overflow));
    }

    #[test]
    fn parse_variants_agree() {
        let a = q("diag:1,1,-3");
        let b = q("gram2:2,0,0;0,2,0;0,0,-6");
        let c = q("x^2+y^2-3*z^2");
        assert_eq!(a.to_polynomial(), b.to_polynomial());
        assert_eq!(a.to_polynomial(), c.to_polynomial());
        assert!(QuadraticForm::parse("gram2:1,0;0,2").is_err());
        assert!(QuadraticForm::parse("gram2:2,1;0,2").is_err());
        assert!(QuadraticForm::parse("x1^2+x2").is_err());
    }

    #[test]
    fn determinant_conventions() {
        assert_eq!(q("diag:1,1,-3").det(), Rational::from_integer(-3));
        // Gram of x1*x2 is [[0,1/2],[1/2,0]].
        assert_eq!(q("x1*x2").det(), Rational::new(-1, 4));
        assert_eq!(q("x1^2+x1*x2+x2^2").det(), Rational::new(3, 4));
    }

    #[test]
    fn signature_examples() {
        assert_eq!(q("diag:1,1,-3").signature().unwrap(), (2, 1));
        assert_eq!(q("diag:1,1,1").signature().unwrap(), (3, 0));
        assert_eq!(q("diag:1,1,1,-1").signature().unwrap(), (3, 1));
        assert_eq!(q("x1*x2+x3*x4").signature().unwrap(), (2, 2));
        assert_eq!(q("x1*x2").signature().unwrap(), (1, 1));
        assert_eq!(q("diag:1,0").signature(), Err(Error::DegenerateForm));
    }

    #[test]
    fn hilbert_examples() {
        assert_eq!(hilbert_symbol(-1, -1, Place::Infinity).unwrap(), -1);
        assert_eq!(hilbert_symbol(-1, -1, Place::Prime(2)).unwrap(), -1);
        assert_eq!(hilbert_symbol(2, 7, Place::Prime(7)).unwrap(), 1);
        assert_eq!(hilbert_symbol(3, 3, Place::Prime(3)).unwrap(), -1);
        assert_eq!(hilbert_symbol(2, 3, Place::Prime(9)), Err(Error::NotPrime(9)));
        assert!(hilbert_symbol(0, 3, Place::Prime(3)).is_err());
    }

    /// Brute-force oracle: a primitive zero of a x^2 + b y^2 - z^2 modulo 2^6.
    fn soluble_mod_64(a: i128, b: i128) -> bool {
        let m = 64i128;
        for x in 0..m {
            for y in 0..m {
                for z in 0..m {
                    if x % 2 == 0 && y % 2 == 0 && z % 2 == 0 {
                        continue;
                    }
                    if (a * x * x + b * y * y - z * z).rem_euclid(m) == 0 {
                        return true;
                    }
                }
            }
        }
        false
    }

    #[test]
    fn hilbert_at_two_matches_brute_force() {
        let vals = [1i128, -1, 3, -3, 5, -5, 7, -7, 2, -2, 6, -6, 10, -14];
        for &a in &vals {
            for &b in &vals {
                let expect = if soluble_mod_64(a, b) { 1 } else { -1 };
                assert_eq!(hilbert_symbol(a, b, Place::Prime(2)).unwrap(), expect, "({a},{b})_2");
            }
        }
    }

    #[test]
    fn anisotropy_examples() {
        assert!(is_q_anisotropic_ternary(&q("diag:1,1,-3")).unwrap());
        assert!(!is_q_anisotropic_ternary(&q("diag:1,1,-1")).unwrap());
        assert!(!is_q_anisotropic_ternary(&q("diag:1,-2,-1")).unwrap());
        assert!(is_q_anisotropic_ternary(&q("diag:1,1,1")).unwrap());
        assert!(is_q_anisotropic_ternary(&q("diag:1,1,1,1")).is_err());
    }

    fn has_small_zero(form: &QuadraticForm, bound: i128) -> bool {
        for x in -bound..=bound {
            for y in -bound..=bound {
                for z in -bound..=bound {
                    if (x, y, z) != (0, 0, 0) && form.evaluate(&[x, y, z]).unwrap() == 0 {
                        return true;
                    }
                }
            }
        }
        false
    }

    #[test]
    fn anisotropic_forms_have_no_small_zeros() {
        let forms = ["diag:1,1,-3", "diag:1,2,-5", "diag:1,1,-7", "diag:2,3,-7", "x1^2+x1*x2+x2^2-5*x3^2"];
        for text in forms {
            let f = q(text);
            if is_q_anisotropic_ternary(&f).unwrap() {
                assert!(!has_small_zero(&f, 25), "{text}");
            } else {
                assert!(has_small_zero(&f, 25), "{text}");
            }
        }
    }

    #[test]
    fn line_test_examples() {
        let inst = AffineQuadricInstance::parse("diag:1,1,-3", 1).unwrap();
        assert!(minus_m_det_nonsquare(&inst).unwrap());
        let inst = AffineQuadricInstance::parse("diag:1,1,-1", -1).unwrap();
        assert!(minus_m_det_nonsquare(&inst).unwrap());
        // -m det = -1 * (-4) = 4
        let inst = AffineQuadricInstance::parse("diag:1,1,-4", 1).unwrap();
        assert!(!minus_m_det_nonsquare(&inst).unwrap());
        // x^2+y^2-z^2 = 1 contains the line (1, t, t).
        let inst = AffineQuadricInstance::parse("diag:1,1,-1", 1).unwrap();
        assert!(!minus_m_det_nonsquare(&inst).unwrap());
    }

    #[test]
    fn instance_validation_and_bad_modulus() {
        assert!(AffineQuadricInstance::parse("diag:1,1,-3", 0).is_err());
        assert_eq!(
            AffineQuadricInstance::parse("diag:1,0,-3", 1),
            Err(Error::DegenerateForm)
        );
        let inst = AffineQuadricInstance::parse("diag:1,1,-3", 5).unwrap();
        assert_eq!(inst.bad_modulus(), 30);
        let inst = AffineQuadricInstance::parse("diag:1,1,1,-1", 1).unwrap();
        assert_eq!(inst.bad_modulus(), 2);
    }

    #[test]
    fn sheet_functional_only_for_two_sheeted() {
        let one = AffineQuadricInstance::parse("diag:1,1,-1", 1).unwrap();
        assert!(one.sheet_functional().is_none());
        let two = AffineQuadricInstance::parse("diag:1,1,-1", -1).unwrap();
        assert_eq!(two.sheet_functional().unwrap(), vec![0, 0, 1]);
        let two = AffineQuadricInstance::parse("diag:-1,-1,3", 1).unwrap();
        assert_eq!(two.sheet_functional().unwrap(), vec![0, 0, 1]);
    }

    #[test]
    fn represents_examples() {
        let f = BinaryForm::new(1, 0, 1).unwrap();
        assert!(f.represents(25));
        assert!(!f.represents(21));
        assert!(f.represents(0));
        assert!(!f.represents(-5));
        let g = BinaryForm::new(2, 2, 3).unwrap();
        assert!(g.represents(0));
        assert!(!g.represents(1));
        assert!(g.represents(2));
        assert!(g.represents(3));
        // non-primitive form 2u^2 + 2v^2 represents exactly 2 * (sums of two squares)
        let h = BinaryForm::new(2, 0, 2).unwrap();
        assert!(h.represents(10));
        assert!(!h.represents(5));
        assert!(BinaryForm::new(1, 0, -1).is_err());
        assert!(BinaryForm::new(-1, 0, -1).is_err());
    }

    fn represents_brute(f: &BinaryForm, n: i128) -> bool {
        let b = 2 * arith::isqrt(n.max(0) as u128) as i128 + 2;
        (-b..=b).any(|u| (-b..=b).any(|v| f.eval(u, v) == n))
    }

    #[test]
    fn represents_matches_brute_force() {
        for (a, b, c) in [(1, 0, 1), (1, 1, 1), (1, 0, 2), (2, 1, 3), (1, 0, 5), (2, 2, 3), (3, 0, 3)] {
            let f = BinaryForm::new(a, b, c).unwrap();
            for n in 0..2000 {
                assert_eq!(f.represents(n), represents_brute(&f, n), "{f} n={n}");
            }
        }
    }

    #[test]
    fn b_star_examples() {
        let f = BinaryForm::new(1, 0, 1).unwrap();
        assert_eq!(f.discriminant(), -4);
        assert_eq!(f.b_star(9).unwrap(), 0);
        assert_eq!(f.b_star(1).unwrap(), 1);
        assert_eq!(f.b_star(25).unwrap(), 1);
        assert_eq!(f.b_star(0).unwrap(), 0);
        assert!(!f.is_obstruction_prime(2));
    }

    #[test]
    fn represented_values_reduce_to_b_star() {
        let f = Factorizer::default();
        for form in [BinaryForm::new(1, 0, 1).unwrap(), BinaryForm::new(1, 1, 2).unwrap(), BinaryForm::new(2, 1, 3).unwrap()] {
            for n in 1..100_000u128 {
                if !form.represents(n as i128) {
                    continue;
                }
                let r = form.admissible_square_part(n, &f).unwrap().expect("even exponents");
                assert!(arith::is_square(r as i128));
                assert_eq!(n % r, 0);
                assert_eq!(form.b_star(n / r).unwrap(), 1, "{form} n={n} r={r}");
            }
        }
    }

    proptest! {
        #[test]
        fn b_star_multiplicative(m in 1u128..5000, n in 1u128..5000, a in 1i128..5, c in 1i128..7) {
            prop_assume!(num_integer::gcd(m, n) == 1);
            let f = BinaryForm::new(a, 1, c).unwrap();
            prop_assert_eq!(f.b_star(m * n).unwrap(), f.b_star(m).unwrap() * f.b_star(n).unwrap());
        }

        #[test]
        fn hilbert_symmetric_bimultiplicative(
            a in -300i128..300, b in -300i128..300, c in -300i128..300,
            pi in 0usize..8,
        ) {
            prop_assume!(a != 0 && b != 0 && c != 0);
            let place = match pi {
                0 => Place::Infinity,
                i => Place::Prime([2u128, 3, 5, 7, 11, 13, 17][i - 1]),
            };
            let h = |x, y| hilbert_symbol(x, y, place).unwrap();
            prop_assert_eq!(h(a, b), h(b, a));
            prop_assert_eq!(h(a * c, b), h(a, b) * h(c, b));
        }

        #[test]
        fn hilbert_product_formula(a in -1000i128..1000, b in -1000i128..1000) {
            prop_assume!(a != 0 && b != 0);
            let mut prod = 1;
            for place in relevant_places(&[a, b]).unwrap() {
                prod *= hilbert_symbol(a, b, place).unwrap();
            }
            prop_assert_eq!(prod, 1);
        }

        #[test]
        fn signature_invariant_under_unimodular_change(
            coeffs in proptest::collection::vec(-5i128..6, 3),
            ops in proptest::collection::vec((0usize..3, 0usize..3, -3i128..4), 1..6),
        ) {
            prop_assume!(coeffs.iter().all(|&c| c != 0));
            let base = QuadraticForm::diagonal(&coeffs).unwrap();
            // Compose elementary unimodular matrices x_i += k x_j.
            let mut u = [[1i128, 0, 0], [0, 1, 0], [0, 0, 1]];
            for (i, j, k) in ops {
                if i == j { continue; }
                for row in u.iter_mut() {
                    row[i] += k * row[j];
                }
            }
            // G' = U^T G U
            let mut g = vec![0i128; 9];
            for r in 0..3 {
                for c in 0..3 {
                    let mut s = 0;
                    for a in 0..3 {
                        for b in 0..3 {
                            s += u[a][r] * base.gram2(a, b) * u[b][c];
                        }
                    }
                    g[r * 3 + c] = s;
                }
            }
            let changed = QuadraticForm::from_gram2(3, g).unwrap();
            prop_assert_eq!(changed.signature().unwrap(), base.signature().unwrap());
            prop_assert_eq!(changed.det(), base.det());
        }

        #[test]
        fn evaluate_matches_polynomial(
            g in proptest::collection::vec(-6i128..7, 6),
            x in proptest::collection::vec(-1000i128..1000, 3),
        ) {
            let gram = vec![2 * g[0], g[1], g[2], g[1], 2 * g[3], g[4], g[2], g[4], 2 * g[5]];
            let f = QuadraticForm::from_gram2(3, gram).unwrap();
            let direct = g[0]*x[0]*x[0] + g[1]*x[0]*x[1] + g[2]*x[0]*x[2]
                + g[3]*x[1]*x[1] + g[4]*x[1]*x[2] + g[5]*x[2]*x[2];
            prop_assert_eq!(f.evaluate(&x).unwrap(), direct);
            prop_assert_eq!(f.to_polynomial().eval_checked(&x).unwrap(), direct);
        }
    }
}
