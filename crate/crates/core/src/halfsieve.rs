//! Values of `Q1` over a box that a definite binary form `Q2` represents,
//! square-stratified subsequences, sifting functions, and the density and
//! remainder tables around them.
//!
//! The box is the sup-norm box `[-T, T]^L`, so `(2T+1)^L` points.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::arith::{self, Factorizer};
use crate::error::{Error, Result};
use crate::forms::{self, AffineQuadricInstance, BinaryForm, QuadraticForm, Rational};
use crate::lattice;
use crate::localcount::{self, ratio_f64};
use crate::poly::IntPolynomial;

/// Sieve parameters `z = T^lambda`, `y = T^beta` and the stratum cut `r < T^gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SieveParameters {
    pub lambda: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl SieveParameters {
    /// `lambda = beta = 1/8`, `gamma = 1/(8L)`.
    pub fn defaults(l: usize) -> Self {
        Self {
            lambda: 0.125,
            beta: 0.125,
            gamma: 1.0 / (8.0 * l as f64),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SievePrimes {
    /// Every obstruction prime.
    Full,
    /// Obstruction primes with `rho(p) != p`.
    Reduced,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypotheses {
    pub satisfied: bool,
    pub note: String,
}

#[derive(Debug, Clone)]
pub struct HalfSieveInstance {
    q1: IntPolynomial,
    q2: BinaryForm,
    /// Doubled Gram matrix of the homogenization of `Q1`.
    hom: QuadraticForm,
    disc: i128,
    bad_modulus: u128,
    factorizer: Factorizer,
}

impl HalfSieveInstance {
    pub fn new(q1: IntPolynomial, q2: BinaryForm) -> Result<Self> {
        let l = q1.nvars();
        if l == 0 {
            return Err(Error::InvalidForm("Q1 needs at least one variable".into()));
        }
        if q1.degree() != 2 {
            return Err(Error::InvalidForm(format!("Q1 must have degree 2: {q1}")));
        }
        let mut h = vec![0i128; (l + 1) * (l + 1)];
        for (exp, c) in q1.terms() {
            let vars: Vec<usize> = exp
                .iter()
                .enumerate()
                .flat_map(|(i, &e)| std::iter::repeat_n(i, e as usize))
                .collect();
            match vars.as_slice() {
                [] => h[l * (l + 1) + l] = 2 * c,
                &[i] => {
                    h[i * (l + 1) + l] = c;
                    h[l * (l + 1) + i] = c;
                }
                &[i, j] if i == j => h[i * (l + 1) + i] = 2 * c,
                &[i, j] => {
                    h[i * (l + 1) + j] = c;
                    h[j * (l + 1) + i] = c;
                }
                _ => unreachable!("degree checked"),
            }
        }
        let hom = QuadraticForm::from_gram2(l + 1, h)?;
        let scaled = hom.det() * Rational::from_integer(1i128 << (l + 1));
        if !scaled.is_integer() {
            return Err(Error::Overflow);
        }
        let disc = scaled.to_integer();
        let d = q2.discriminant();
        let base = 2u128
            .checked_mul(disc.unsigned_abs().max(1))
            .and_then(|v| v.checked_mul(d.unsigned_abs()))
            .ok_or(Error::Overflow)?;
        Ok(Self {
            q1,
            q2,
            hom,
            disc,
            bad_modulus: arith::radical(base)?,
            factorizer: Factorizer::default(),
        })
    }

    pub fn parse(q1: &str, q2: &str) -> Result<Self> {
        Self::new(IntPolynomial::parse(q1, 0)?, BinaryForm::parse(q2)?)
    }

    pub fn with_factorizer(mut self, factorizer: Factorizer) -> Self {
        self.factorizer = factorizer;
        self
    }

    pub fn q1(&self) -> &IntPolynomial {
        &self.q1
    }

    pub fn q2(&self) -> &BinaryForm {
        &self.q2
    }

    pub fn dim(&self) -> usize {
        self.q1.nvars()
    }

    /// Determinant of the doubled Gram matrix of the homogenized `Q1`.
    pub fn disc(&self) -> i128 {
        self.disc
    }

    pub fn bad_modulus(&self) -> u128 {
        self.bad_modulus
    }

    fn h(&self, i: usize, j: usize) -> i128 {
        self.hom.gram2(i, j)
    }

    /// Checks the standing hypotheses: smoothness of `Q1 = 0` for `L >= 2`,
    /// and for `L = 1` that the ternary quadric `X^2 - 4a Q2 = b^2 - 4ac`
    /// obtained by completing the square has a nonsquare `-m det`.
    pub fn hypotheses(&self) -> Result<Hypotheses> {
        let l = self.dim();
        if l == 1 {
            let (a, b, c) = (self.h(0, 0) / 2, self.h(0, 1), self.h(1, 1) / 2);
            let (qa, qb, qc) = self.q2.coefficients();
            let m = b * b - 4 * a * c;
            if m == 0 {
                return Ok(Hypotheses {
                    satisfied: false,
                    note: "Q1 is a constant times a square".into(),
                });
            }
            let gram2 = vec![2, 0, 0, 0, -8 * a * qa, -4 * a * qb, 0, -4 * a * qb, -8 * a * qc];
            let ternary = AffineQuadricInstance::new(QuadraticForm::from_gram2(3, gram2)?, m)?;
            let ok = forms::minus_m_det_nonsquare(&ternary)?;
            return Ok(Hypotheses {
                satisfied: ok,
                note: format!(
                    "ternary {} = {m}: -m det is {}a square",
                    ternary.form().to_polynomial(),
                    if ok { "not " } else { "" }
                ),
            });
        }
        if self.disc == 0 {
            return Ok(Hypotheses {
                satisfied: false,
                note: "homogenized discriminant vanishes".into(),
            });
        }
        let quad = QuadraticForm::from_gram2(
            l,
            (0..l).flat_map(|i| (0..l).map(move |j| (i, j))).map(|(i, j)| self.h(i, j)).collect(),
        )?;
        if quad.det() != Rational::from_integer(0) {
            return Ok(Hypotheses {
                satisfied: true,
                note: "quadratic part nondegenerate and discriminant nonzero".into(),
            });
        }
        // Degenerate quadratic part: look for singular points modulo small good primes.
        let primes: Vec<u64> = arith::primes_below(30)
            .into_iter()
            .filter(|&p| self.bad_modulus % p as u128 != 0)
            .collect();
        for &p in &primes {
            if (p as u128).pow(l as u32) > localcount::DEFAULT_BUDGET {
                break;
            }
            if self.singular_point_mod(p) {
                return Ok(Hypotheses {
                    satisfied: false,
                    note: format!("singular point modulo {p}"),
                });
            }
        }
        Ok(Hypotheses {
            satisfied: true,
            note: format!("no singular point modulo {primes:?} (heuristic)"),
        })
    }

    fn singular_point_mod(&self, p: u64) -> bool {
        let l = self.dim();
        let mut x = vec![0u64; l];
        loop {
            let mut ok = self.q1.eval_mod(&x, p) == 0;
            for i in 0..l {
                if !ok {
                    break;
                }
                let grad: i128 = (0..l).map(|j| self.h(i, j) * x[j] as i128).sum::<i128>() + self.h(i, l);
                ok = grad.rem_euclid(p as i128) == 0;
            }
            if ok {
                return true;
            }
            let mut i = l;
            loop {
                if i == 0 {
                    return false;
                }
                i -= 1;
                x[i] += 1;
                if x[i] < p {
                    break;
                }
                x[i] = 0;
            }
        }
    }

    /// `(max |x_i|, Q1(X))` for every `X` in the box, in no particular order.
    fn box_entries(&self, t: u64) -> Result<Vec<(u64, i128)>> {
        let l = self.dim();
        let r = i64::try_from(t).map_err(|_| Error::HeightTooLarge)?;
        let side = 2 * t as u128 + 1;
        let needed = side.checked_pow(l as u32).unwrap_or(u128::MAX);
        if needed > lattice::DEFAULT_BUDGET {
            return Err(Error::EnumerationBudget {
                needed,
                budget: lattice::DEFAULT_BUDGET,
            });
        }
        let coeff: u128 = self.q1.terms().map(|(_, c)| c.unsigned_abs()).sum();
        if coeff.checked_mul((t as u128 + 1).pow(2)).is_none_or(|v| v >= 1 << 100) {
            return Err(Error::HeightTooLarge);
        }
        Ok((-r..=r)
            .into_par_iter()
            .flat_map_iter(|first| {
                let mut out = Vec::new();
                let mut x = vec![-r; l];
                x[0] = first;
                loop {
                    let key = x.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0);
                    out.push((key, self.q1.eval_i64(&x)));
                    let mut i = l;
                    loop {
                        if i == 1 || l == 1 {
                            return out.into_iter();
                        }
                        i -= 1;
                        x[i] += 1;
                        if x[i] <= r {
                            break;
                        }
                        x[i] = -r;
                    }
                }
            })
            .collect())
    }

    fn values(&self, t: u64) -> Result<Vec<i128>> {
        Ok(self.box_entries(t)?.into_iter().map(|(_, v)| v).collect())
    }

    /// `C(T) = #{X in box : Q1(X) = Q2(u, v) for some u, v}`. Each distinct
    /// value is tested once.
    pub fn representable_count(&self, t: u64) -> Result<u64> {
        Ok(self.density_curve(&[t])?[0].count)
    }

    /// `B1(T) = #{X in box : Q1(X) = 0}`.
    pub fn zero_fiber_count(&self, t: u64) -> Result<u64> {
        Ok(self.values(t)?.into_iter().filter(|&v| v == 0).count() as u64)
    }

    pub fn is_admissible(&self, r: u128) -> Result<bool> {
        if r == 0 {
            return Ok(false);
        }
        let Some(s) = arith::exact_sqrt(r as i128) else {
            return Ok(false);
        };
        Ok(self
            .factorizer
            .prime_divisors(s)?
            .into_iter()
            .all(|p| self.q2.is_obstruction_prime(p)))
    }

    /// `A(T)_r = {Q1(X)/r : r | Q1(X)}` and `Lambda_r = #A(T)_r`.
    pub fn stratum_count(&self, t: u64, r: u128) -> Result<Stratum> {
        if r == 0 {
            return Err(Error::InvalidArgument("r must be positive".into()));
        }
        let omega_r = localcount::omega(&self.q1, r, localcount::DEFAULT_BUDGET)?;
        let l = self.dim() as i32;
        let expected = omega_r as f64 / (r as f64).powi(l) * (2.0 * t as f64).powi(l);
        let members: Vec<i128> = if omega_r == 0 {
            Vec::new()
        } else {
            let ri = r as i128;
            self.values(t)?.into_iter().filter(|v| v % ri == 0).map(|v| v / ri).collect()
        };
        Ok(Stratum {
            r,
            lambda: members.len() as u64,
            members,
            omega_r,
            expected,
            empty_by_omega: omega_r == 0,
        })
    }

    /// Obstruction primes below `z`; `Reduced` drops those with `omega(p) = p^L`.
    pub fn sieve_primes(&self, z: u64, which: SievePrimes) -> Result<Vec<u64>> {
        let l = self.dim() as u32;
        let candidates: Vec<u64> = arith::primes_below(z)
            .into_iter()
            .filter(|&p| self.q2.is_obstruction_prime(p as u128))
            .collect();
        if which == SievePrimes::Full {
            return Ok(candidates);
        }
        let keep = candidates
            .par_iter()
            .map(|&p| Ok(localcount::omega(&self.q1, p as u128, localcount::DEFAULT_BUDGET)? != (p as u128).pow(l)))
            .collect::<Result<Vec<bool>>>()?;
        Ok(candidates.into_iter().zip(keep).filter(|(_, k)| *k).map(|(p, _)| p).collect())
    }

    /// `S(A(T)_r, P, z)`: members with no sieve prime below `z` as a factor.
    pub fn sift(&self, t: u64, r: u128, z: u64, which: SievePrimes) -> Result<u64> {
        let stratum = self.stratum_count(t, r)?;
        let primes = self.sieve_primes(z, which)?;
        Ok(sift_members(&stratum.members, &primes))
    }

    /// `sum over members of b*(|member|)`.
    pub fn b_star_sum(&self, t: u64, r: u128) -> Result<u64> {
        let stratum = self.stratum_count(t, r)?;
        let flags = stratum
            .members
            .par_iter()
            .map(|&v| self.q2.b_star_with(v.unsigned_abs(), &self.factorizer))
            .collect::<Result<Vec<u8>>>()?;
        Ok(flags.into_iter().map(u64::from).sum())
    }

    pub fn sifting_chain(&self, t: u64, r: u128, z: u64) -> Result<SiftingChain> {
        let stratum = self.stratum_count(t, r)?;
        let full = self.sieve_primes(z, SievePrimes::Full)?;
        let reduced = self.sieve_primes(z, SievePrimes::Reduced)?;
        Ok(SiftingChain {
            t,
            r,
            z,
            lambda: stratum.lambda,
            b_star_sum: self.b_star_sum(t, r)?,
            sift_full: sift_members(&stratum.members, &full),
            sift_reduced: sift_members(&stratum.members, &reduced),
        })
    }

    /// `rho(p) = omega(p) / p^(L-1)`.
    pub fn rho(&self, p: u128) -> Result<Rational> {
        localcount::varrho(&self.q1, p, localcount::DEFAULT_BUDGET)
    }

    /// Deviation `sum_{p in P', p < x} rho(p)/(p - rho(p)) ln p - ln(x)/2`
    /// for each `x`, plus the sign census of `((D/p), (disc/p))` below the
    /// largest `x`.
    pub fn halfdim_condition_report(&self, x_grid: &[u64]) -> Result<HalfDimReport> {
        if x_grid.is_empty() || x_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("x grid must be nonempty and increasing".into()));
        }
        let top = *x_grid.last().expect("nonempty");
        let primes = arith::primes_below(top);
        let l = self.dim() as u32;
        // Terms for every obstruction prime below the top of the grid.
        let terms: Vec<(u64, Option<f64>)> = primes
            .par_iter()
            .filter(|&&p| self.q2.is_obstruction_prime(p as u128))
            .map(|&p| {
                let w = localcount::omega(&self.q1, p as u128, localcount::DEFAULT_BUDGET)?;
                if w == (p as u128).pow(l) {
                    return Ok((p, None));
                }
                let rho = Rational::new(w as i128, (p as i128).pow(l - 1));
                let term = rho / (Rational::from_integer(p as i128) - rho);
                Ok((p, Some(ratio_f64(&term) * (p as f64).ln())))
            })
            .collect::<Result<Vec<_>>>()?;
        let rows: Vec<(u64, f64)> = x_grid
            .iter()
            .map(|&x| {
                let s: f64 = terms.iter().filter(|(p, _)| *p < x).filter_map(|(_, t)| *t).sum();
                (x, s - 0.5 * (x as f64).ln())
            })
            .collect();
        let character = self.census_character();
        let d = self.q2.discriminant();
        let mut census: BTreeMap<(i8, i8), u64> = BTreeMap::new();
        for &p in primes.iter().filter(|&&p| p > 2) {
            let key = (arith::legendre(d, p as u128), arith::legendre(character, p as u128));
            *census.entry(key).or_insert(0) += 1;
        }
        let k = rows.iter().map(|r| r.1.abs()).fold(0.0, f64::max);
        Ok(HalfDimReport {
            rows,
            empirical_k: k,
            census,
            excluded: terms.iter().filter(|t| t.1.is_none()).map(|t| t.0).collect(),
        })
    }

    /// `b^2 - 4ac` for `L = 1`, the homogenized discriminant otherwise.
    fn census_character(&self) -> i128 {
        if self.dim() == 1 {
            let (a, b, c) = (self.h(0, 0) / 2, self.h(0, 1), self.h(1, 1) / 2);
            b * b - 4 * a * c
        } else {
            self.disc
        }
    }

    /// `R_r(d) = #A(T)_{rd} - (rho_r(d)/d) Lambda_r` for squarefree `d`
    /// supported on the reduced sieve primes.
    pub fn remainder_report(&self, t: u64, r: u128, d_grid: &[u128]) -> Result<Vec<RemainderRow>> {
        let stratum = self.stratum_count(t, r)?;
        let l = self.dim() as i32;
        let max_d = d_grid.iter().copied().max().unwrap_or(1);
        let allowed = self.sieve_primes((max_d + 1).min(u64::MAX as u128) as u64, SievePrimes::Reduced)?;
        d_grid
            .iter()
            .map(|&d| {
                if d == 0 {
                    return Err(Error::InvalidArgument("d must be positive".into()));
                }
                let fac = self.factorizer.factor(d)?;
                if fac.iter().any(|&(p, e)| e > 1 || !allowed.contains(&(p as u64))) {
                    return Err(Error::InvalidArgument(format!(
                        "d = {d} must be squarefree with primes in the reduced sieve set"
                    )));
                }
                let mut rho_d = Rational::from_integer(1);
                for &(p, _) in &fac {
                    rho_d *= localcount::varrho_r(&self.q1, r, p, self.bad_modulus, localcount::DEFAULT_BUDGET)?;
                }
                let di = d as i128;
                let count = stratum.members.iter().filter(|&&v| v % di == 0).count() as u64;
                let main = rho_d / Rational::from_integer(di) * Rational::from_integer(stratum.lambda as i128);
                let remainder = Rational::from_integer(count as i128) - main;
                let scale = ((d * r) as f64).powi(l - 1) * (t as f64).powi(l - 1);
                Ok(RemainderRow {
                    d,
                    count,
                    main,
                    remainder,
                    normalized: ratio_f64(&remainder) / scale,
                })
            })
            .collect()
    }

    /// `(T, C(T), C(T) sqrt(ln T) / T^L)`, one box pass at the largest `T`.
    pub fn density_curve(&self, t_grid: &[u64]) -> Result<Vec<DensityRow>> {
        let top = t_grid.iter().copied().max().ok_or_else(|| Error::InvalidArgument("empty T grid".into()))?;
        let entries = self.box_entries(top)?;
        let mut distinct: Vec<i128> = entries.iter().map(|e| e.1).filter(|&v| v >= 0).collect();
        distinct.par_sort_unstable();
        distinct.dedup();
        let represented: Vec<bool> = distinct
            .par_iter()
            .map(|&v| self.q2.represents_with(v, &self.factorizer))
            .collect();
        let is_rep = |v: i128| v >= 0 && distinct.binary_search(&v).is_ok_and(|i| represented[i]);
        let mut hits: Vec<u64> = entries.iter().filter(|e| is_rep(e.1)).map(|e| e.0).collect();
        hits.sort_unstable();
        let l = self.dim() as i32;
        Ok(t_grid
            .iter()
            .map(|&t| {
                let count = hits.partition_point(|&k| k <= t) as u64;
                let tf = t as f64;
                DensityRow {
                    t,
                    count,
                    normalized: if t < 2 { f64::NAN } else { count as f64 * tf.ln().sqrt() / tf.powi(l) },
                }
            })
            .collect())
    }

    /// Every admissible square `r <= bound`.
    pub fn admissible_squares(&self, bound: u128) -> Result<Vec<u128>> {
        let s_max = arith::isqrt(bound);
        let mut out = Vec::new();
        for s in 1..=s_max {
            let r = s * s;
            if self.is_admissible(r)? {
                out.push(r);
            }
        }
        Ok(out)
    }

    /// Checks `C(T) <= B1(T) + sum_r sum_{members} b*(member)` over every
    /// admissible square `r <= max |Q1|`, and that each represented nonzero
    /// value splits as an admissible square times a `b* = 1` cofactor.
    pub fn decomposition_check(&self, t: u64) -> Result<Decomposition> {
        let values = self.values(t)?;
        let max_abs = values.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0);
        let squares = self.admissible_squares(max_abs.max(1))?;
        let count = self.representable_count(t)?;
        let zero_fiber = values.iter().filter(|&&v| v == 0).count() as u64;
        let mut star_sum = 0u64;
        for &r in &squares {
            let ri = r as i128;
            let flags = values
                .par_iter()
                .filter(|&&v| v != 0 && v % ri == 0)
                .map(|&v| self.q2.b_star_with((v / ri).unsigned_abs(), &self.factorizer))
                .collect::<Result<Vec<u8>>>()?;
            star_sum += flags.into_iter().map(u64::from).sum::<u64>();
        }
        let mut distinct: Vec<i128> = values.into_iter().filter(|&v| v > 0).collect();
        distinct.sort_unstable();
        distinct.dedup();
        let bridge_failures = distinct
            .par_iter()
            .filter(|&&v| self.q2.represents_with(v, &self.factorizer))
            .map(|&v| -> Result<u64> {
                let n = v as u128;
                Ok(match self.q2.admissible_square_part(n, &self.factorizer)? {
                    Some(r) => u64::from(self.q2.b_star_with(n / r, &self.factorizer)? != 1),
                    None => 1,
                })
            })
            .collect::<Result<Vec<u64>>>()?
            .into_iter()
            .sum();
        Ok(Decomposition {
            t,
            representable: count,
            zero_fiber,
            star_sum,
            squares,
            bridge_failures,
        })
    }
}

fn sift_members(members: &[i128], primes: &[u64]) -> u64 {
    members
        .par_iter()
        .filter(|&&v| primes.iter().all(|&p| v % p as i128 != 0))
        .count() as u64
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stratum {
    pub r: u128,
    pub lambda: u64,
    /// `Q1(X)/r` in box order.
    pub members: Vec<i128>,
    pub omega_r: u128,
    /// `(omega(r)/r^L)(2T)^L`, for comparison only.
    pub expected: f64,
    pub empty_by_omega: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SiftingChain {
    pub t: u64,
    pub r: u128,
    pub z: u64,
    pub lambda: u64,
    pub b_star_sum: u64,
    pub sift_full: u64,
    pub sift_reduced: u64,
}

impl SiftingChain {
    pub fn holds(&self) -> bool {
        self.b_star_sum <= self.sift_full && self.sift_full <= self.sift_reduced && self.sift_reduced <= self.lambda
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HalfDimReport {
    /// `(x, deviation)`.
    pub rows: Vec<(u64, f64)>,
    /// Largest `|deviation|` on the grid.
    pub empirical_k: f64,
    pub census: BTreeMap<(i8, i8), u64>,
    /// Obstruction primes dropped because `omega(p) = p^L`.
    pub excluded: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RemainderRow {
    pub d: u128,
    pub count: u64,
    pub main: Rational,
    pub remainder: Rational,
    /// `R / ((dr)^(L-1) T^(L-1))`.
    pub normalized: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityRow {
    pub t: u64,
    pub count: u64,
    pub normalized: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub t: u64,
    pub representable: u64,
    pub zero_fiber: u64,
    pub star_sum: u64,
    pub squares: Vec<u128>,
    pub bridge_failures: u64,
}

impl Decomposition {
    pub fn holds(&self) -> bool {
        self.representable <= self.zero_fiber + self.star_sum && self.bridge_failures == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle(q1: &str) -> HalfSieveInstance {
        HalfSieveInstance::parse(q1, "1,0,1").unwrap()
    }

    fn generic() -> HalfSieveInstance {
        circle("1+2*x1^2+3*x2^2")
    }

    #[test]
    fn construction_and_hypotheses() {
        let one = circle("x^2+1");
        assert_eq!(one.disc(), 4);
        assert_eq!(one.bad_modulus(), 2);
        assert!(!one.hypotheses().unwrap().satisfied);
        let g = generic();
        assert_eq!(g.disc(), 2 * 4 * 6);
        assert!(g.hypotheses().unwrap().satisfied);
        assert!(!circle("x1^2-x2^2").hypotheses().unwrap().satisfied);
        // x^2 + 3: the ternary X^2 - 4u^2 - 4v^2 = -12 has -m det = 192, not a square.
        assert!(circle("x^2+3").hypotheses().unwrap().satisfied);
        // Degenerate quadratic part, smooth: x1^2 + x2.
        assert!(circle("x1^2+x2").hypotheses().unwrap().satisfied);
        assert!(HalfSieveInstance::parse("x1^3+1", "1,0,1").is_err());
    }

    #[test]
    fn counterexample_counts_everything() {
        let one = circle("x^2+1");
        for t in [0u64, 1, 10, 1000] {
            assert_eq!(one.representable_count(t).unwrap(), 2 * t + 1);
        }
        assert_eq!(one.zero_fiber_count(10).unwrap(), 0);
    }

    #[test]
    fn zero_fiber_of_two_lines() {
        assert_eq!(circle("x1^2-x2^2").zero_fiber_count(10).unwrap(), 41);
    }

    #[test]
    fn representable_count_matches_double_enumeration() {
        let g = generic();
        let t = 20i64;
        // Oracle: every value u^2 + v^2 up to the box maximum.
        let max = 1 + 5 * t * t;
        let mut reps = vec![false; max as usize + 1];
        for u in 0..=max.isqrt() {
            for v in 0..=max.isqrt() {
                if u * u + v * v <= max {
                    reps[(u * u + v * v) as usize] = true;
                }
            }
        }
        let mut expect = 0;
        for x in -t..=t {
            for y in -t..=t {
                expect += reps[(1 + 2 * x * x + 3 * y * y) as usize] as u64;
            }
        }
        assert_eq!(g.representable_count(20).unwrap(), expect);
    }

    #[test]
    fn strata() {
        let one = circle("x^2+1");
        let s1 = one.stratum_count(7, 1).unwrap();
        assert_eq!(s1.lambda, 15);
        let s9 = one.stratum_count(100, 9).unwrap();
        assert!(s9.empty_by_omega && s9.members.is_empty());
        let s25 = one.stratum_count(100, 25).unwrap();
        assert_eq!(s25.omega_r, 2);
        for x in -100i128..=100 {
            let hit = (x * x + 1) % 25 == 0;
            assert_eq!(hit, x.rem_euclid(25) == 7 || x.rem_euclid(25) == 18);
        }
        assert_eq!(s25.lambda, (-100i128..=100).filter(|x| matches!(x.rem_euclid(25), 7 | 18)).count() as u64);
        assert!(one.is_admissible(9).unwrap());
        assert!(!one.is_admissible(25).unwrap());
        assert!(!one.is_admissible(3).unwrap());
    }

    #[test]
    fn sift_examples() {
        let g = generic();
        let lambda = g.stratum_count(30, 1).unwrap().lambda;
        assert_eq!(g.sift(30, 1, 2, SievePrimes::Full).unwrap(), lambda);
        let mut prev = lambda;
        for z in [3, 5, 10, 20, 40] {
            let s = g.sift(30, 1, z, SievePrimes::Full).unwrap();
            assert!(s <= prev);
            prev = s;
        }
        for r in [1u128, 9, 49] {
            let chain = g.sifting_chain(50, r, 30).unwrap();
            assert!(chain.holds(), "{chain:?}");
        }
    }

    #[test]
    fn sift_past_all_values_is_b_star_filter() {
        let g = generic();
        let t = 15;
        let max = 1 + 5 * 15 * 15;
        let members = g.stratum_count(t, 1).unwrap().members;
        let primes = g.sieve_primes(max as u64 + 1, SievePrimes::Reduced).unwrap();
        let direct = members
            .iter()
            .filter(|&&v| {
                g.factorizer
                    .prime_divisors(v as u128)
                    .unwrap()
                    .iter()
                    .all(|p| !primes.contains(&(*p as u64)))
            })
            .count() as u64;
        assert_eq!(g.sift(t, 1, max as u64 + 1, SievePrimes::Reduced).unwrap(), direct);
    }

    #[test]
    fn halfdim_report_shapes() {
        let g = generic();
        let rep = g.halfdim_condition_report(&[3, 100, 1000]).unwrap();
        assert!((rep.rows[0].1 + 0.5 * 3f64.ln()).abs() < 1e-12);
        assert!(rep.census.values().sum::<u64>() > 0);
        let one = circle("x^2+1");
        let rep = one.halfdim_condition_report(&[1000]).unwrap();
        // x^2 + 1 has no roots at obstruction primes p = 3 mod 4.
        assert!(rep.excluded.is_empty());
        for p in arith::primes_below(1000).into_iter().filter(|p| p % 4 == 3) {
            assert_eq!(one.rho(p as u128).unwrap(), Rational::from_integer(0));
        }
    }

    #[test]
    fn remainders() {
        let g = generic();
        let rows = g.remainder_report(40, 1, &[1, 3, 7, 11, 21]).unwrap();
        assert_eq!(rows[0].remainder, Rational::from_integer(0));
        assert!(rows.iter().any(|r| r.remainder != Rational::from_integer(0)));
        assert!(g.remainder_report(40, 1, &[9]).is_err());
        assert!(g.remainder_report(40, 1, &[5]).is_err());
    }

    #[test]
    fn density_curve_is_monotone() {
        let g = generic();
        let rows = g.density_curve(&[10, 20, 40]).unwrap();
        assert!(rows.windows(2).all(|w| w[0].count <= w[1].count));
        assert_eq!(rows[1].count, g.representable_count(20).unwrap());
    }

    #[test]
    fn decomposition_holds_at_small_height() {
        let d = generic().decomposition_check(20).unwrap();
        assert!(d.holds(), "{d:?}");
        assert!(d.squares.contains(&9) && !d.squares.contains(&25));
    }

    #[test]
    fn sign_symmetry() {
        let g = generic();
        let vals = g.box_entries(12).unwrap();
        let mut pos: Vec<i128> = vals.iter().map(|e| e.1).collect();
        pos.sort_unstable();
        // The box is symmetric and Q1 is even, so each value occurs a
        // multiple of its orbit size; flipping signs maps the multiset to itself.
        let mut flipped: Vec<i128> = (-12i64..=12)
            .flat_map(|x| (-12i64..=12).map(move |y| (-x, -y)))
            .map(|(x, y)| g.q1().eval_i64(&[x, y]))
            .collect();
        flipped.sort_unstable();
        assert_eq!(pos, flipped);
    }
}
