//! Exact point counts modulo `N` for affine quadrics and closed subsets of
//! them, local density ratios, and partial products of those ratios.
//!
//! Counting zeros of a polynomial modulo `N` picks the cheapest of:
//!
//! * histogram convolution when the polynomial is a sum of univariate parts
//!   (diagonal quadrics), cost `~ N^2` per variable;
//! * for prime `N`, enumeration of all but one variable and a root count of
//!   the remaining quadratic through a table of squares, cost `~ N^(n-1)`;
//! * for composite `N`, the same enumeration with a memoised value table of
//!   `A t^2 + b t` per residue `b`;
//! * plain enumeration of `(Z/N)^n`.
//!
//! Every route is exact. A call whose cheapest route exceeds the budget fails
//! with [`Error::BudgetExceeded`] instead of truncating.

use std::collections::HashMap;

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::arith::{self, Factorizer};
use crate::error::{Error, Result};
use crate::forms::{AffineQuadricInstance, Rational};
use crate::poly::IntPolynomial;

/// Default cap on inner-loop steps per counting call.
pub const DEFAULT_BUDGET: u128 = 100_000_000;

/// Largest modulus for which the `A t^2 + b t` value table is built.
const TABLE_LIMIT: u64 = 4096;

/// Point counts of `Q(Z/N)` assembled over the prime powers of `N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalCountTable {
    pub modulus: u128,
    pub count: u128,
    /// `(p, k, #Q(Z/p^k))` for each `p^k || N`.
    pub breakdown: Vec<(u128, u32, u128)>,
}

/// The closed subset `Z = Q ∩ (f_1 = ... = f_r = 0)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosedSubsetSpec {
    ambient: AffineQuadricInstance,
    cutters: Vec<IntPolynomial>,
    declared_codim: usize,
    bad_modulus: u128,
}

impl ClosedSubsetSpec {
    pub fn new(
        ambient: AffineQuadricInstance,
        cutters: Vec<IntPolynomial>,
        declared_codim: usize,
    ) -> Result<Self> {
        let n = ambient.dim();
        let cutters = cutters
            .iter()
            .map(|f| {
                if f.nvars() > n {
                    Err(Error::DimensionMismatch {
                        expected: n,
                        got: f.nvars(),
                    })
                } else {
                    f.widen(n)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        if declared_codim == 0 {
            return Err(Error::InvalidArgument("declared codimension must be positive".into()));
        }
        // Primes dividing the content of a cutter are treated as bad too.
        let mut extra = 1u128;
        for f in &cutters {
            let content = f
                .terms()
                .fold(0u128, |g, (_, c)| num_integer::gcd(g, c.unsigned_abs()));
            if content > 1 {
                extra = extra.checked_mul(content).ok_or(Error::Overflow)?;
            }
        }
        let bad_modulus = arith::radical(
            ambient
                .bad_modulus()
                .checked_mul(extra)
                .ok_or(Error::Overflow)?,
        )?;
        Ok(Self {
            ambient,
            cutters,
            declared_codim,
            bad_modulus,
        })
    }

    /// Parses cutters separated by `;`.
    pub fn parse(ambient: AffineQuadricInstance, cutters: &str, declared_codim: usize) -> Result<Self> {
        let n = ambient.dim();
        let polys = cutters
            .split(';')
            .filter(|s| !s.trim().is_empty())
            .map(|s| IntPolynomial::parse(s, n))
            .collect::<Result<Vec<_>>>()?;
        Self::new(ambient, polys, declared_codim)
    }

    pub fn ambient(&self) -> &AffineQuadricInstance {
        &self.ambient
    }

    pub fn cutters(&self) -> &[IntPolynomial] {
        &self.cutters
    }

    pub fn declared_codim(&self) -> usize {
        self.declared_codim
    }

    /// Bad primes of the ambient quadric extended by the cutter contents.
    pub fn bad_modulus(&self) -> u128 {
        self.bad_modulus
    }

    pub fn is_good_prime(&self, p: u128) -> bool {
        self.bad_modulus % p != 0
    }

    /// Whether every cutter vanishes at the residue vector `x` modulo `p`.
    pub fn contains_mod(&self, x: &[u64], p: u64) -> bool {
        self.cutters.iter().all(|f| f.eval_mod(x, p) == 0)
    }

    /// Whether every cutter vanishes at the integer point `x` modulo `p`.
    pub fn contains_point_mod(&self, x: &[i64], p: u64) -> bool {
        self.cutters
            .iter()
            .all(|f| f.eval_i64(x).rem_euclid(p as i128) == 0)
    }

    /// `gcd` of the cutter values at `x`; 0 means every cutter vanishes
    /// (and so does every prime). No cutters also gives 0.
    pub fn cutter_gcd(&self, x: &[i64]) -> u128 {
        self.cutters
            .iter()
            .fold(0u128, |g, f| num_integer::gcd(g, f.eval_i64(x).unsigned_abs()))
    }
}

// ---------------------------------------------------------------------------
// Zero counting engine

fn budget_error(modulus: u64, needed: u128, budget: u128) -> Error {
    Error::BudgetExceeded {
        modulus: modulus as u128,
        needed,
        budget,
    }
}

fn saturating_pow(base: u128, exp: u32) -> u128 {
    base.checked_pow(exp).unwrap_or(u128::MAX)
}

/// Exact `#{x in (Z/N)^n : f(x) = 0 mod N}` computed directly, without CRT.
pub fn count_zeros_mod(f: &IntPolynomial, modulus: u64, budget: u128) -> Result<u128> {
    if modulus == 0 {
        return Err(Error::InvalidArgument("modulus must be positive".into()));
    }
    let n = f.nvars() as u32;
    if modulus == 1 {
        return Ok(1);
    }
    if n == 0 {
        return Ok(u128::from(f.constant_term().rem_euclid(modulus as i128) == 0));
    }
    let big_n = modulus as u128;

    // Costs are in inner-loop steps; an enumerated point costs one step per term.
    let terms = f.terms().count().max(1) as u128;
    let mut best: Option<(u128, Route)> = None;
    let mut consider = |cost: u128, route: Route| {
        if best.as_ref().is_none_or(|(c, _)| cost < *c) {
            best = Some((cost, route));
        }
    };
    if let Some((constant, parts)) = f.separable_parts() {
        let convolutions = (n as u128).saturating_sub(2);
        let cost = big_n
            .saturating_mul(big_n)
            .saturating_mul(convolutions)
            .saturating_add(big_n * n as u128);
        consider(cost, Route::Separable(constant, parts));
    }
    if let Some(split) = best_split(f) {
        let outer = saturating_pow(big_n, n - 1).saturating_mul(terms);
        if arith::is_prime(big_n) {
            consider(outer.saturating_add(big_n), Route::PrimeSplit(split));
        } else if modulus <= TABLE_LIMIT {
            let rows = saturating_pow(big_n, n - 1).min(big_n);
            consider(outer.saturating_add(rows * big_n), Route::TableSplit(split));
        }
    }
    consider(saturating_pow(big_n, n).saturating_mul(terms), Route::Naive);

    let (cost, route) = best.expect("naive route always considered");
    if cost > budget {
        return Err(budget_error(modulus, cost, budget));
    }
    Ok(match route {
        Route::Separable(constant, parts) => count_separable(constant, &parts, modulus),
        Route::PrimeSplit(split) => count_prime_split(f, &split, modulus),
        Route::TableSplit(split) => count_table_split(f, &split, modulus),
        Route::Naive => count_naive(f, modulus, |_| true),
    })
}

enum Route {
    Separable(i128, Vec<Vec<(u32, i128)>>),
    PrimeSplit(crate::poly::QuadraticSplit),
    TableSplit(crate::poly::QuadraticSplit),
    Naive,
}

/// Prefers the last variable with a nonzero constant square coefficient.
fn best_split(f: &IntPolynomial) -> Option<crate::poly::QuadraticSplit> {
    (0..f.nvars())
        .rev()
        .filter_map(|v| f.split_quadratic(v))
        .find(|s| s.lead != 0)
}

fn count_separable(constant: i128, parts: &[Vec<(u32, i128)>], modulus: u64) -> u128 {
    let fits_u64 = (modulus as u128)
        .checked_pow(parts.len() as u32)
        .is_some_and(|v| v <= u64::MAX as u128);
    if fits_u64 {
        convolve::<u64>(constant, parts, modulus)
    } else {
        convolve::<u128>(constant, parts, modulus)
    }
}

/// Value histogram of one univariate part over `Z/m`.
fn part_histogram(part: &[(u32, i128)], modulus: u64) -> Vec<u32> {
    let mm = modulus as u128;
    let mut h = vec![0u32; modulus as usize];
    for x in 0..modulus {
        let mut v: u128 = 0;
        for &(k, c) in part {
            let mut t = c.rem_euclid(modulus as i128) as u128;
            for _ in 0..k {
                t = t * x as u128 % mm;
            }
            v = (v + t) % mm;
        }
        h[v as usize] += 1;
    }
    h
}

/// Cyclic convolution of the part histograms, read off at `-constant`.
/// Counts stay below `m^n`, which the caller checks fits `T`.
fn convolve<T>(constant: i128, parts: &[Vec<(u32, i128)>], modulus: u64) -> u128
where
    T: Copy + Default + std::ops::AddAssign + std::ops::Mul<Output = T> + From<u32> + Into<u128>,
{
    let m = modulus as usize;
    let dense = |part: &Vec<(u32, i128)>| -> Vec<T> {
        part_histogram(part, modulus).into_iter().map(T::from).collect()
    };
    let sparse = |part: &Vec<(u32, i128)>| -> Vec<(usize, T)> {
        part_histogram(part, modulus)
            .into_iter()
            .enumerate()
            .filter(|(_, c)| *c > 0)
            .map(|(w, c)| (w, T::from(c)))
            .collect()
    };
    let target = (-constant).rem_euclid(modulus as i128) as usize;
    let (first, rest) = parts.split_first().expect("at least one variable");
    let mut acc = dense(first);
    let Some((last, middle)) = rest.split_last() else {
        return acc[target].into();
    };
    for part in middle {
        let mut next = vec![T::default(); m];
        for (w, c) in sparse(part) {
            // next[v + w mod m] += c * acc[v], split at the wrap point.
            let (head, tail) = acc.split_at(m - w);
            for (dst, &a) in next[w..].iter_mut().zip(head) {
                *dst += a * c;
            }
            for (dst, &a) in next[..w].iter_mut().zip(tail) {
                *dst += a * c;
            }
        }
        acc = next;
    }
    sparse(last)
        .into_iter()
        .map(|(w, c)| (acc[(target + m - w) % m] * c).into())
        .sum()
}

/// Iterates residue vectors of length `len` modulo `m` in lexicographic order.
fn for_each_residue_vector(len: usize, m: u64, mut f: impl FnMut(&[u64])) {
    let mut x = vec![0u64; len];
    loop {
        f(&x);
        let mut i = len;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            x[i] += 1;
            if x[i] < m {
                break;
            }
            x[i] = 0;
        }
    }
}

/// Splits the outer enumeration over the first free coordinate for rayon.
fn par_outer<T: Send>(
    nvars: usize,
    var: usize,
    m: u64,
    init: impl Fn() -> T + Sync,
    visit: impl Fn(&mut T, &mut [u64]) + Sync,
    merge: impl Fn(T, T) -> T + Sync + Send,
) -> T {
    let free: Vec<usize> = (0..nvars).filter(|&i| i != var).collect();
    if free.is_empty() {
        let mut acc = init();
        let mut x = vec![0u64; nvars];
        visit(&mut acc, &mut x);
        return acc;
    }
    (0..m)
        .into_par_iter()
        .map(|first| {
            let mut acc = init();
            let mut x = vec![0u64; nvars];
            x[free[0]] = first;
            for_each_residue_vector(free.len() - 1, m, |rest| {
                for (slot, &v) in free[1..].iter().zip(rest) {
                    x[*slot] = v;
                }
                visit(&mut acc, &mut x);
            });
            acc
        })
        .reduce(&init, merge)
}

/// Square-root table modulo an odd prime: `roots[v]` is some `s` with `s^2 = v`.
fn sqrt_table(p: u64) -> Vec<Option<u64>> {
    let mut t = vec![None; p as usize];
    for s in 0..p {
        let v = (s as u128 * s as u128 % p as u128) as usize;
        if t[v].is_none() {
            t[v] = Some(s);
        }
    }
    t
}

fn count_prime_split(f: &IntPolynomial, split: &crate::poly::QuadraticSplit, p: u64) -> u128 {
    let lead = split.lead.rem_euclid(p as i128) as u64;
    let squares = (p > 2 && lead != 0).then(|| sqrt_table(p));
    par_outer(
        f.nvars(),
        split.var,
        p,
        || 0u128,
        |acc, x| {
            let b = split.linear.eval_mod(x, p);
            let c = split.constant.eval_mod(x, p);
            *acc += roots_mod_prime(lead, b, c, p, squares.as_deref()) as u128;
        },
        |a, b| a + b,
    )
}

/// Number of `t` in `F_p` with `a t^2 + b t + c = 0`.
fn roots_mod_prime(a: u64, b: u64, c: u64, p: u64, squares: Option<&[Option<u64>]>) -> u64 {
    let pp = p as u128;
    match (a, squares) {
        (0, _) => {
            if b != 0 {
                1
            } else if c == 0 {
                p
            } else {
                0
            }
        }
        (_, Some(sq)) => {
            let disc = (b as u128 * b as u128 + pp * pp * 4 - 4 * a as u128 % pp * c as u128 % pp) % pp;
            match (disc, sq[disc as usize]) {
                (0, _) => 1,
                (_, Some(_)) => 2,
                (_, None) => 0,
            }
        }
        (_, None) => (0..p)
            .filter(|&t| {
                let t = t as u128;
                (a as u128 * t % pp * t + b as u128 * t + c as u128) % pp == 0
            })
            .count() as u64,
    }
}

fn count_table_split(f: &IntPolynomial, split: &crate::poly::QuadraticSplit, m: u64) -> u128 {
    let lead = split.lead.rem_euclid(m as i128) as u64;
    let row = |b: u64| -> Vec<u32> {
        let mut h = vec![0u32; m as usize];
        for t in 0..m {
            let v = (lead as u128 * t as u128 % m as u128 * t as u128 + b as u128 * t as u128) % m as u128;
            h[v as usize] += 1;
        }
        h
    };
    par_outer(
        f.nvars(),
        split.var,
        m,
        || (0u128, HashMap::<u64, Vec<u32>>::new()),
        |(acc, rows), x| {
            let b = split.linear.eval_mod(x, m);
            let c = split.constant.eval_mod(x, m);
            let h = rows.entry(b).or_insert_with(|| row(b));
            *acc += h[((m - c) % m) as usize] as u128;
        },
        |a, b| (a.0 + b.0, HashMap::new()),
    )
    .0
}

fn count_naive(f: &IntPolynomial, m: u64, keep: impl Fn(&[u64]) -> bool + Sync) -> u128 {
    let n = f.nvars();
    par_outer(
        n,
        n, // no solved variable: all coordinates enumerated
        m,
        || 0u128,
        |acc, x| {
            if f.eval_mod(x, m) == 0 && keep(x) {
                *acc += 1;
            }
        },
        |a, b| a + b,
    )
}

// ---------------------------------------------------------------------------
// Quadric counts

/// `#Q(Z/p^k)` for a single prime power: direct when affordable, otherwise
/// lifted from `F_p` when `p` is good for the instance.
pub fn count_prime_power(inst: &AffineQuadricInstance, p: u128, k: u32, budget: u128) -> Result<u128> {
    let modulus = p.checked_pow(k).ok_or(Error::Overflow)?;
    let modulus = u64::try_from(modulus).map_err(|_| Error::Overflow)?;
    let poly = inst.defining_polynomial();
    match count_zeros_mod(&poly, modulus, budget) {
        Ok(c) => Ok(c),
        Err(Error::BudgetExceeded { .. }) if k >= 2 && inst.is_good_prime(p) => {
            let base = count_zeros_mod(&poly, p as u64, budget)?;
            let lift = saturating_pow(p, (k - 1) * (inst.dim() as u32 - 1));
            base.checked_mul(lift).ok_or(Error::Overflow)
        }
        Err(e) => Err(e),
    }
}

/// `#{x in (Z/N)^n : q(x) = m mod N}` assembled by CRT over prime powers.
pub fn count_quadric_mod(inst: &AffineQuadricInstance, modulus: u128, budget: u128) -> Result<LocalCountTable> {
    if modulus < 2 {
        return Err(Error::InvalidArgument("modulus must be at least 2".into()));
    }
    let mut count = 1u128;
    let mut breakdown = Vec::new();
    for (p, k) in Factorizer::default().factor(modulus)? {
        let c = count_prime_power(inst, p, k, budget)?;
        count = count.checked_mul(c).ok_or(Error::Overflow)?;
        breakdown.push((p, k, c));
    }
    Ok(LocalCountTable {
        modulus,
        count,
        breakdown,
    })
}

/// `#Q(Z/N)` by direct counting over `(Z/N)^n`, no CRT and no lifting.
pub fn count_quadric_direct(inst: &AffineQuadricInstance, modulus: u64, budget: u128) -> Result<u128> {
    count_zeros_mod(&inst.defining_polynomial(), modulus, budget)
}

/// The variable `i` when `f = c x_i` with `p` not dividing `c`.
fn coordinate_cutter(f: &IntPolynomial, p: u128) -> Option<usize> {
    let mut terms = f.terms().filter(|(_, c)| *c != 0);
    let (exps, c) = terms.next()?;
    if terms.next().is_some() || c.rem_euclid(p as i128) == 0 {
        return None;
    }
    let mut support = exps.iter().enumerate().filter(|(_, &e)| e != 0);
    let (i, &e) = support.next()?;
    (e == 1 && support.next().is_none()).then_some(i)
}

/// When every cutter is a coordinate hyperplane mod `p`, `poly` with those
/// coordinates set to zero, in the remaining variables.
fn restrict_to_coordinate_cutters(
    poly: &IntPolynomial,
    cutters: &[IntPolynomial],
    p: u128,
) -> Result<Option<IntPolynomial>> {
    let n = poly.nvars();
    let mut killed = vec![false; n];
    for f in cutters {
        match coordinate_cutter(f, p) {
            Some(i) => killed[i] = true,
            None => return Ok(None),
        }
    }
    let keep: Vec<usize> = (0..n).filter(|&i| !killed[i]).collect();
    let terms = poly
        .terms()
        .filter(|(e, _)| e.iter().zip(&killed).all(|(&d, &k)| !k || d == 0))
        .map(|(e, c)| (keep.iter().map(|&i| e[i]).collect::<Vec<u32>>(), c))
        .collect::<Vec<_>>();
    IntPolynomial::from_terms(keep.len(), terms).map(Some)
}

/// `#Z(F_p)`: points of the quadric mod `p` on which every cutter vanishes.
pub fn count_subset_mod_p(spec: &ClosedSubsetSpec, p: u128, budget: u128) -> Result<u128> {
    if !arith::is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let p64 = u64::try_from(p).map_err(|_| Error::Overflow)?;
    let inst = spec.ambient();
    if spec.cutters().is_empty() {
        return count_prime_power(inst, p, 1, budget);
    }
    let poly = inst.defining_polynomial();
    if let Some(restricted) = restrict_to_coordinate_cutters(&poly, spec.cutters(), p)? {
        return count_zeros_mod(&restricted, p64, budget);
    }
    let n = inst.dim() as u32;
    let split = (0..inst.dim())
        .rev()
        .filter_map(|v| poly.split_quadratic(v))
        .find(|s| s.lead.rem_euclid(p as i128) != 0);
    let cost = match split {
        Some(_) => saturating_pow(p, n - 1).saturating_add(p),
        None => saturating_pow(p, n),
    };
    if cost > budget {
        return Err(budget_error(p64, cost, budget));
    }
    let Some(split) = split else {
        return Ok(count_naive(&poly, p64, |x| spec.contains_mod(x, p64)));
    };
    let lead = split.lead.rem_euclid(p as i128) as u64;
    let squares = (p64 > 2).then(|| sqrt_table(p64));
    let inv2a = arith::inverse_mod((2 * lead as u128) % p, p);
    Ok(par_outer(
        inst.dim(),
        split.var,
        p64,
        || 0u128,
        |acc, x| {
            let b = split.linear.eval_mod(x, p64);
            let c = split.constant.eval_mod(x, p64);
            let mut test = |t: u64, x: &mut [u64]| {
                x[split.var] = t;
                if spec.contains_mod(x, p64) {
                    *acc += 1;
                }
            };
            match (&squares, inv2a) {
                (Some(sq), Some(inv)) => {
                    let pp = p;
                    let disc = (b as u128 * b as u128 + 4 * pp * pp - 4 * (lead as u128) % pp * c as u128 % pp) % pp;
                    if let Some(s) = sq[disc as usize] {
                        let neg_b = (pp - b as u128) % pp;
                        let t1 = (neg_b + s as u128) % pp * inv % pp;
                        let t2 = (neg_b + pp - s as u128) % pp * inv % pp;
                        test(t1 as u64, x);
                        if t2 != t1 {
                            test(t2 as u64, x);
                        }
                    }
                }
                _ => {
                    for t in 0..p64 {
                        let tt = t as u128;
                        if (lead as u128 * tt % p * tt + b as u128 * tt + c as u128) % p == 0 {
                            test(t, x);
                        }
                    }
                }
            }
        },
        |a, b| a + b,
    ))
}

/// `tau_p = #U(F_p) / #Q(F_p)` with `U = Q \ Z`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TauP {
    pub p: u128,
    pub quadric: u128,
    pub subset: u128,
}

impl TauP {
    pub fn ratio(&self) -> Rational {
        Rational::new(
            (self.quadric - self.subset) as i128,
            self.quadric as i128,
        )
    }

    pub fn as_f64(&self) -> f64 {
        (self.quadric - self.subset) as f64 / self.quadric as f64
    }
}

pub fn tau_p(spec: &ClosedSubsetSpec, p: u128, budget: u128) -> Result<TauP> {
    let quadric = count_prime_power(spec.ambient(), p, 1, budget)?;
    if quadric == 0 {
        return Err(Error::NoLocalPoints(p));
    }
    let subset = count_subset_mod_p(spec, p, budget)?;
    Ok(TauP { p, quadric, subset })
}

/// Local density of `U` at a prime read off at level `p^k`:
/// `1 - #{x in Q(Z/p^k) : x mod p in Z} / #Q(Z/p^k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalFactor {
    pub p: u128,
    pub level: u32,
    pub ratio: Rational,
    /// The ratio agreed at three consecutive levels.
    pub stabilized: bool,
}

/// Local density at a bad prime, increasing the level until the ratio is
/// stable over three consecutive levels or the budget runs out.
pub fn local_factor_bad_prime(spec: &ClosedSubsetSpec, p: u128, budget: u128) -> Result<LocalFactor> {
    const MAX_LEVEL: u32 = 10;
    let p64 = u64::try_from(p).map_err(|_| Error::Overflow)?;
    let poly = spec.ambient().defining_polynomial();
    let n = spec.ambient().dim() as u32;
    let mut history: Vec<Rational> = Vec::new();
    for k in 1..=MAX_LEVEL {
        let modulus = p.checked_pow(k).ok_or(Error::Overflow)?;
        let cost = saturating_pow(modulus, n);
        if cost > budget {
            break;
        }
        let m = modulus as u64;
        let total = count_naive(&poly, m, |_| true);
        if total == 0 {
            return Err(Error::NoLocalPoints(modulus));
        }
        let inside = count_naive(&poly, m, |x| {
            let reduced: Vec<u64> = x.iter().map(|v| v % p64).collect();
            spec.contains_mod(&reduced, p64)
        });
        history.push(Rational::new((total - inside) as i128, total as i128));
        let len = history.len();
        if len >= 3 && history[len - 1] == history[len - 2] && history[len - 2] == history[len - 3] {
            return Ok(LocalFactor {
                p,
                level: k,
                ratio: history[len - 1],
                stabilized: true,
            });
        }
    }
    match history.last() {
        Some(&ratio) => Ok(LocalFactor {
            p,
            level: history.len() as u32,
            ratio,
            stabilized: false,
        }),
        None => Err(budget_error(p64, saturating_pow(p, n), budget)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PurityProduct {
    pub cutoff: u128,
    /// `(p, tau_p, partial product through p)` over good primes below the cutoff.
    pub trajectory: Vec<(u128, Rational, f64)>,
    /// Product of `tau_p` over good primes below the cutoff.
    pub good_product: f64,
    /// Fitted `C` in `|1 - tau_p| <= C / p^codim`.
    pub fitted_c: f64,
    /// `[good_product * (1 - C / P), good_product]`.
    pub bracket: (f64, f64),
    /// Local densities at bad primes.
    pub bad_factors: Vec<LocalFactor>,
}

impl PurityProduct {
    /// Predicted density of `U(Z)` in `Q(Z)`: good and bad local factors.
    pub fn prediction(&self) -> f64 {
        self.bad_factors
            .iter()
            .map(|f| ratio_f64(&f.ratio))
            .product::<f64>()
            * self.good_product
    }
}

pub fn ratio_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Partial product of `tau_p` over good primes `p < cutoff`, with a tail
/// bracket, and the bad-prime local factors kept separately.
pub fn purity_product(spec: &ClosedSubsetSpec, cutoff: u128, budget: u128) -> Result<PurityProduct> {
    let primes = arith::primes_below(cutoff.min(u64::MAX as u128) as u64);
    let taus: Vec<Result<(u128, Rational)>> = primes
        .par_iter()
        .filter(|&&p| spec.is_good_prime(p as u128))
        .map(|&p| tau_p(spec, p as u128, budget).map(|t| (p as u128, t.ratio())))
        .collect();
    let mut trajectory = Vec::new();
    let mut prod = 1.0f64;
    let mut fitted_c = 0.0f64;
    let codim = spec.declared_codim() as i32;
    for t in taus {
        let (p, tau) = t?;
        prod *= ratio_f64(&tau);
        let dev = (Rational::one() - tau).abs();
        fitted_c = fitted_c.max(ratio_f64(&dev) * (p as f64).powi(codim));
        trajectory.push((p, tau, prod));
    }
    let bad_factors = primes
        .iter()
        .filter(|&&p| !spec.is_good_prime(p as u128))
        .map(|&p| local_factor_bad_prime(spec, p as u128, budget))
        .collect::<Result<Vec<_>>>()?;
    let lower = prod * (1.0 - fitted_c / cutoff as f64);
    Ok(PurityProduct {
        cutoff,
        trajectory,
        good_product: prod,
        fitted_c,
        bracket: (lower.max(0.0), prod),
        bad_factors,
    })
}

trait AbsRatio {
    fn abs(&self) -> Self;
}

impl AbsRatio for Rational {
    fn abs(&self) -> Self {
        if *self < Rational::zero() {
            -*self
        } else {
            *self
        }
    }
}

// ---------------------------------------------------------------------------
// Zeros of Q1 and their densities

/// `omega(N) = #{xi in (Z/N)^L : Q1(xi) = 0 mod N}`, multiplicative over
/// prime powers.
pub fn omega(q1: &IntPolynomial, modulus: u128, budget: u128) -> Result<u128> {
    if modulus == 0 {
        return Err(Error::InvalidArgument("modulus must be positive".into()));
    }
    let mut acc = 1u128;
    for (p, k) in Factorizer::default().factor(modulus)? {
        let pk = u64::try_from(p.pow(k)).map_err(|_| Error::Overflow)?;
        acc = acc
            .checked_mul(count_zeros_mod(q1, pk, budget)?)
            .ok_or(Error::Overflow)?;
    }
    Ok(acc)
}

/// `rho(p) = omega(p) / p^(L-1)`.
pub fn varrho(q1: &IntPolynomial, p: u128, budget: u128) -> Result<Rational> {
    let w = omega(q1, p, budget)?;
    let l = q1.nvars() as u32;
    let denom = saturating_pow(p, l.saturating_sub(1));
    if l == 0 {
        return Ok(Rational::from_integer(w as i128));
    }
    Ok(Rational::new(w as i128, denom as i128))
}

/// `rho_r(p)`: `rho(p)` for `p ∤ r`, 1 for good `p | r`, and
/// `omega(pr) / (omega(r) p^(L-1))` for bad `p | r`.
pub fn varrho_r(q1: &IntPolynomial, r: u128, p: u128, bad_modulus: u128, budget: u128) -> Result<Rational> {
    if r == 0 {
        return Err(Error::InvalidArgument("r must be positive".into()));
    }
    let w_r = omega(q1, r, budget)?;
    if w_r == 0 {
        return Err(Error::EmptyStratum(r));
    }
    if r % p != 0 {
        return varrho(q1, p, budget);
    }
    if bad_modulus % p != 0 {
        return Ok(Rational::one());
    }
    let w_pr = omega(q1, p * r, budget)?;
    let l = q1.nvars() as u32;
    let denom = w_r * saturating_pow(p, l.saturating_sub(1));
    Ok(Rational::new(w_pr as i128, denom as i128))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LangWeilRow {
    pub p: u128,
    pub count: u128,
    pub main_term: u128,
    /// `(count - p^(n-1)) / p^(n - 3/2)`.
    pub deviation: f64,
    pub good: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LangWeilReport {
    pub rows: Vec<LangWeilRow>,
    /// Largest `|deviation|` over good primes.
    pub max_deviation: f64,
}

pub fn lang_weil_report(inst: &AffineQuadricInstance, primes: &[u128], budget: u128) -> Result<LangWeilReport> {
    let n = inst.dim() as i32;
    let rows = primes
        .par_iter()
        .map(|&p| {
            if !arith::is_prime(p) {
                return Err(Error::NotPrime(p));
            }
            let count = count_prime_power(inst, p, 1, budget)?;
            let main_term = saturating_pow(p, (n - 1) as u32);
            let deviation = (count as f64 - main_term as f64) / (p as f64).powf(n as f64 - 1.5);
            Ok(LangWeilRow {
                p,
                count,
                main_term,
                deviation,
                good: inst.is_good_prime(p),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_deviation = rows
        .iter()
        .filter(|r| r.good)
        .map(|r| r.deviation.abs())
        .fold(0.0, f64::max);
    Ok(LangWeilReport {
        rows,
        max_deviation,
    })
}
