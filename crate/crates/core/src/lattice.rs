//! Integral points on `q(x) = m` inside a height ball, and the congruence
//! and prime-window counts built on top of them.
//!
//! One coordinate (the last with a nonzero square coefficient) is solved
//! from the others by an exact square root; the rest are walked in a nested
//! loop that updates the partial quadratic incrementally. Slices of the first
//! free coordinate are independent and handled by rayon.

use std::collections::BTreeMap;

use log::warn;
use rayon::prelude::*;

use crate::arith::{self, Factorizer};
use crate::error::{Error, Result};
use crate::forms::AffineQuadricInstance;
use crate::localcount::ClosedSubsetSpec;

/// Default cap on inner-loop steps per enumeration.
pub const DEFAULT_BUDGET: u128 = 20_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, serde::Serialize, serde::Deserialize)]
pub enum Norm {
    #[default]
    #[serde(rename = "euclid")]
    Euclidean,
    #[serde(rename = "sup")]
    Sup,
}

/// `||x|| <= T` for a positive rational `T = num / den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HeightWindow {
    num: u64,
    den: u64,
    norm: Norm,
}

impl HeightWindow {
    pub fn new(num: u64, den: u64, norm: Norm) -> Result<Self> {
        if num == 0 || den == 0 {
            return Err(Error::InvalidArgument("height bound must be positive".into()));
        }
        let g = num_integer::gcd(num, den);
        Ok(Self {
            num: num / g,
            den: den / g,
            norm,
        })
    }

    pub fn integer(t: u64, norm: Norm) -> Result<Self> {
        Self::new(t, 1, norm)
    }

    pub fn euclidean(t: u64) -> Result<Self> {
        Self::integer(t, Norm::Euclidean)
    }

    pub fn sup(t: u64) -> Result<Self> {
        Self::integer(t, Norm::Sup)
    }

    pub fn norm(&self) -> Norm {
        self.norm
    }

    pub fn bound(&self) -> (u64, u64) {
        (self.num, self.den)
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Largest coordinate magnitude allowed by the window.
    pub fn radius(&self) -> u64 {
        self.num / self.den
    }

    /// `x` is inside iff `key(x) <= key_bound()`. The key is the squared
    /// length for the euclidean norm and the largest `|x_i|` for sup.
    pub fn key_bound(&self) -> u128 {
        match self.norm {
            Norm::Euclidean => {
                let n = self.num as u128;
                let d = self.den as u128;
                n * n / (d * d)
            }
            Norm::Sup => self.radius() as u128,
        }
    }

    pub fn key(&self, x: &[i64]) -> u128 {
        point_key(self.norm, x)
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        self.key(x) <= self.key_bound()
    }
}

pub fn point_key(norm: Norm, x: &[i64]) -> u128 {
    match norm {
        Norm::Euclidean => x.iter().map(|&v| (v as i128 * v as i128) as u128).sum(),
        Norm::Sup => x.iter().map(|v| v.unsigned_abs() as u128).max().unwrap_or(0),
    }
}

/// A residue vector modulo `l`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CongruenceClass {
    modulus: u64,
    residue: Vec<u64>,
}

impl CongruenceClass {
    pub fn new(modulus: u64, residue: &[i64]) -> Result<Self> {
        if modulus < 2 {
            return Err(Error::InvalidArgument("modulus must be at least 2".into()));
        }
        Ok(Self {
            modulus,
            residue: residue
                .iter()
                .map(|&r| r.rem_euclid(modulus as i64) as u64)
                .collect(),
        })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn residue(&self) -> &[u64] {
        &self.residue
    }

    pub fn matches(&self, x: &[i64]) -> bool {
        x.iter()
            .zip(&self.residue)
            .all(|(&v, &r)| v.rem_euclid(self.modulus as i64) as u64 == r)
    }

    /// Whether `q(xi) = m mod l`.
    pub fn lies_on(&self, inst: &AffineQuadricInstance) -> bool {
        let poly = inst.defining_polynomial();
        poly.eval_mod(&self.residue, self.modulus) == 0
    }
}

fn reduce_point(x: &[i64], l: u64) -> Vec<u64> {
    x.iter().map(|&v| v.rem_euclid(l as i64) as u64).collect()
}

// ---------------------------------------------------------------------------
// Enumeration core

struct Plan {
    n: usize,
    solved: Option<usize>,
    free: Vec<usize>,
    /// `A_ss` of the doubled Gram matrix for the solved coordinate.
    a2: i128,
    /// `A_{s, free[d]}`.
    link: Vec<i128>,
    /// `A_{free[d], free[d]} / 2`.
    half_diag: Vec<i128>,
    /// `cross[d][e] = A_{free[d], free[e]}` for `e < d`.
    cross: Vec<Vec<i128>>,
    m: i128,
    radius: i64,
    key_bound: u128,
    norm: Norm,
}

impl Plan {
    fn new(inst: &AffineQuadricInstance, window: &HeightWindow, budget: u128) -> Result<Self> {
        let form = inst.form();
        let n = inst.dim();
        let radius = window.radius();
        if radius > i64::MAX as u64 / 4 {
            return Err(Error::HeightTooLarge);
        }
        // Keep B^2 and 4a(C - m) well inside i128.
        let weight: u128 = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| form.gram2(i, j).unsigned_abs())
            .sum();
        let r1 = radius as u128 + 1;
        let m_abs = inst.m().unsigned_abs();
        if weight.checked_mul(r1).is_none_or(|v| v >= 1 << 60) || m_abs >= 1 << 60 {
            return Err(Error::HeightTooLarge);
        }
        let solved = (0..n).rev().find(|&i| form.gram2(i, i) != 0);
        if solved.is_none() {
            warn!("no coordinate has a nonzero square coefficient; scanning the full box");
        }
        let free: Vec<usize> = (0..n).filter(|&i| Some(i) != solved).collect();
        let side = 2 * radius as u128 + 1;
        let needed = side.checked_pow(free.len() as u32).unwrap_or(u128::MAX);
        if needed > budget {
            return Err(Error::EnumerationBudget { needed, budget });
        }
        let s = solved.unwrap_or(0);
        Ok(Self {
            n,
            solved,
            a2: solved.map_or(0, |s| form.gram2(s, s)),
            link: free.iter().map(|&j| if solved.is_some() { form.gram2(s, j) } else { 0 }).collect(),
            half_diag: free.iter().map(|&j| form.gram2(j, j) / 2).collect(),
            cross: free
                .iter()
                .enumerate()
                .map(|(d, &i)| free[..d].iter().map(|&j| form.gram2(i, j)).collect())
                .collect(),
            free,
            m: inst.m(),
            radius: radius as i64,
            key_bound: window.key_bound(),
            norm: window.norm(),
        })
    }

    /// Range of the free coordinate at the given partial key.
    fn range(&self, key: u128) -> (i64, i64) {
        let r = match self.norm {
            Norm::Sup => self.radius,
            Norm::Euclidean => {
                let rem = self.key_bound.saturating_sub(key);
                (arith::isqrt(rem) as i64).min(self.radius)
            }
        };
        (-r, r)
    }

    fn bump_key(&self, key: u128, v: i64) -> u128 {
        match self.norm {
            Norm::Euclidean => key + (v as i128 * v as i128) as u128,
            Norm::Sup => key.max(v.unsigned_abs() as u128),
        }
    }

    fn walk<F: FnMut(&[i64])>(&self, d: usize, x: &mut [i64], b: i128, c: i128, key: u128, visit: &mut F) {
        if d == self.free.len() {
            self.finish(x, b, c, key, visit);
            return;
        }
        let idx = self.free[d];
        let lin: i128 = self.cross[d]
            .iter()
            .zip(&self.free[..d])
            .map(|(&a, &j)| a * x[j] as i128)
            .sum();
        let (lo, hi) = self.range(key);
        let (hd, link) = (self.half_diag[d], self.link[d]);
        for v in lo..=hi {
            let vv = v as i128;
            x[idx] = v;
            let c2 = c + hd * vv * vv + lin * vv;
            self.walk(d + 1, x, b + link * vv, c2, self.bump_key(key, v), visit);
        }
    }

    fn walk_slice<F: FnMut(&[i64])>(&self, first: i64, visit: &mut F) {
        let mut x = vec![0i64; self.n];
        if self.free.is_empty() {
            self.finish(&mut x, 0, 0, 0, visit);
            return;
        }
        let idx = self.free[0];
        x[idx] = first;
        let v = first as i128;
        let c = self.half_diag[0] * v * v;
        self.walk(1, &mut x, self.link[0] * v, c, self.bump_key(0, first), visit);
    }

    fn finish<F: FnMut(&[i64])>(&self, x: &mut [i64], b: i128, c: i128, key: u128, visit: &mut F) {
        let Some(s) = self.solved else {
            if c == self.m {
                visit(x);
            }
            return;
        };
        // a t^2 + b t + (c - m) = 0 with a = a2 / 2.
        let disc = b * b - 2 * self.a2 * (c - self.m);
        let Some(r) = arith::exact_sqrt(disc).map(|r| r as i128) else {
            return;
        };
        // Emit roots in increasing order; a double root appears once.
        let mut roots = [(-b - r, true), (-b + r, r != 0)];
        if self.a2 < 0 {
            roots.swap(0, 1);
        }
        for (num, keep) in roots {
            if !keep || num % self.a2 != 0 {
                continue;
            }
            let t = num / self.a2;
            if t.unsigned_abs() > self.radius as u128 {
                continue;
            }
            let t = t as i64;
            if self.bump_key(key, t) <= self.key_bound {
                x[s] = t;
                visit(x);
            }
        }
    }

    fn first_range(&self) -> (i64, i64) {
        if self.free.is_empty() {
            (0, 0)
        } else {
            self.range(0)
        }
    }

    /// Parallel fold over slices of the first free coordinate. Slices are
    /// merged in increasing order, so order-sensitive accumulators stay
    /// deterministic.
    fn fold<T: Send>(
        &self,
        init: impl Fn() -> T + Sync + Send,
        visit: impl Fn(&mut T, &[i64]) + Sync + Send,
        merge: impl Fn(T, T) -> T + Sync + Send,
    ) -> T {
        let (lo, hi) = self.first_range();
        (lo..=hi)
            .into_par_iter()
            .map(|first| {
                let mut acc = init();
                self.walk_slice(first, &mut |x| visit(&mut acc, x));
                acc
            })
            .reduce(&init, merge)
    }

    fn lex_sorted(&self) -> bool {
        match self.solved {
            None => true,
            Some(s) => s == self.n - 1,
        }
    }
}

/// Parallel fold over every point of `q(x) = m` in the window.
pub fn fold_points<T: Send>(
    inst: &AffineQuadricInstance,
    window: &HeightWindow,
    budget: u128,
    init: impl Fn() -> T + Sync + Send,
    visit: impl Fn(&mut T, &[i64]) + Sync + Send,
    merge: impl Fn(T, T) -> T + Sync + Send,
) -> Result<T> {
    let plan = Plan::new(inst, window, budget)?;
    Ok(plan.fold(init, visit, merge))
}

/// Every point of `q(x) = m` with `||x|| <= T`, in lexicographic order.
pub fn enumerate_points(inst: &AffineQuadricInstance, window: &HeightWindow) -> Result<std::vec::IntoIter<Vec<i64>>> {
    enumerate_points_with_budget(inst, window, DEFAULT_BUDGET)
}

pub fn enumerate_points_with_budget(
    inst: &AffineQuadricInstance,
    window: &HeightWindow,
    budget: u128,
) -> Result<std::vec::IntoIter<Vec<i64>>> {
    let plan = Plan::new(inst, window, budget)?;
    let mut pts = plan.fold(Vec::new, |acc, x| acc.push(x.to_vec()), |mut a, mut b| {
        a.append(&mut b);
        a
    });
    if !plan.lex_sorted() {
        pts.sort_unstable();
    }
    Ok(pts.into_iter())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PointCount {
    pub total: u64,
    /// Per-sheet counts `(positive, negative)` for two-sheeted hyperboloids.
    pub sheets: Option<(u64, u64)>,
}

/// `N(T)`, with the sheet split when the real locus has two components.
pub fn count_points(inst: &AffineQuadricInstance, window: &HeightWindow) -> Result<PointCount> {
    count_points_with_budget(inst, window, DEFAULT_BUDGET)
}

pub fn count_points_with_budget(inst: &AffineQuadricInstance, window: &HeightWindow, budget: u128) -> Result<PointCount> {
    let functional = inst.sheet_functional();
    let form = inst.form();
    let (total, pos) = fold_points(
        inst,
        window,
        budget,
        || (0u64, 0u64),
        |acc, x| {
            acc.0 += 1;
            if let Some(v) = &functional {
                let xi: Vec<i128> = x.iter().map(|&c| c as i128).collect();
                if form.pairing(&xi, v) > 0 {
                    acc.1 += 1;
                }
            }
        },
        |a, b| (a.0 + b.0, a.1 + b.1),
    )?;
    Ok(PointCount {
        total,
        sheets: functional.map(|_| (pos, total - pos)),
    })
}

/// `V_l(T; xi)`.
pub fn count_congruence(inst: &AffineQuadricInstance, window: &HeightWindow, class: &CongruenceClass) -> Result<u64> {
    if class.residue().len() != inst.dim() {
        return Err(Error::DimensionMismatch {
            expected: inst.dim(),
            got: class.residue().len(),
        });
    }
    fold_points(
        inst,
        window,
        DEFAULT_BUDGET,
        || 0u64,
        |acc, x| *acc += class.matches(x) as u64,
        |a, b| a + b,
    )
}

/// `V_l(T; xi)` for every residue `xi` hit by a point in the window.
pub fn residue_histogram(
    inst: &AffineQuadricInstance,
    window: &HeightWindow,
    l: u64,
) -> Result<BTreeMap<Vec<u64>, u64>> {
    if l < 2 {
        return Err(Error::InvalidArgument("modulus must be at least 2".into()));
    }
    fold_points(
        inst,
        window,
        DEFAULT_BUDGET,
        BTreeMap::new,
        |acc, x| *acc.entry(reduce_point(x, l)).or_insert(0) += 1,
        |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            a
        },
    )
}

/// `V_p(T; Z)`: points whose reduction mod `p` lies in `Z`.
pub fn count_bad_prime_points(
    inst: &AffineQuadricInstance,
    window: &HeightWindow,
    spec: &ClosedSubsetSpec,
    p: u64,
) -> Result<u64> {
    if !arith::is_prime(p as u128) {
        return Err(Error::NotPrime(p as u128));
    }
    fold_points(
        inst,
        window,
        DEFAULT_BUDGET,
        || 0u64,
        |acc, x| *acc += spec.contains_point_mod(x, p) as u64,
        |a, b| a + b,
    )
}

/// Closed prime range `[lo, hi]`; `hi = None` is unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrimeWindow {
    pub lo: u128,
    pub hi: Option<u128>,
}

impl PrimeWindow {
    pub fn new(lo: u128, hi: Option<u128>) -> Result<Self> {
        if lo < 2 {
            return Err(Error::InvalidArgument("prime window must start at 2 or later".into()));
        }
        Ok(Self { lo, hi })
    }

    pub fn at_least(lo: u128) -> Result<Self> {
        Self::new(lo, None)
    }

    pub fn contains(&self, p: u128) -> bool {
        p >= self.lo && self.hi.is_none_or(|h| p <= h)
    }

    pub fn is_empty(&self) -> bool {
        self.hi.is_some_and(|h| h < self.lo)
    }

    /// Whether some prime in the window divides `d`. Every prime divides 0.
    pub fn hits(&self, d: u128, factorizer: &Factorizer) -> Result<bool> {
        match d {
            0 => Ok(!self.is_empty()),
            1 => Ok(false),
            _ if d < self.lo => Ok(false),
            _ => Ok(factorizer.prime_divisors(d)?.into_iter().any(|p| self.contains(p))),
        }
    }
}

/// Multiplicities of the cutter gcd over the points in a window, with each
/// point's height key kept so smaller windows can be read off the same pass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GcdTable {
    norm: Norm,
    /// `(height key, cutter gcd)` per point.
    entries: Vec<(u128, u128)>,
}

impl GcdTable {
    pub fn build(spec: &ClosedSubsetSpec, window: &HeightWindow) -> Result<Self> {
        let mut entries = fold_points(
            spec.ambient(),
            window,
            DEFAULT_BUDGET,
            Vec::new,
            |acc, x| acc.push((window.key(x), spec.cutter_gcd(x))),
            |mut a, mut b| {
                a.append(&mut b);
                a
            },
        )?;
        entries.sort_unstable();
        Ok(Self {
            norm: window.norm(),
            entries,
        })
    }

    pub fn norm(&self) -> Norm {
        self.norm
    }

    fn check(&self, window: &HeightWindow) -> Result<()> {
        if window.norm() != self.norm {
            return Err(Error::InvalidArgument("window norm differs from the table's".into()));
        }
        Ok(())
    }

    /// Number of points in the (smaller) window.
    pub fn total(&self, window: &HeightWindow) -> Result<u64> {
        self.check(window)?;
        let bound = window.key_bound();
        Ok(self.entries.partition_point(|&(k, _)| k <= bound) as u64)
    }

    /// `d -> #points` for the given window; `d = 0` marks points on `Z(Q)`.
    pub fn histogram(&self, window: &HeightWindow) -> Result<BTreeMap<u128, u64>> {
        self.check(window)?;
        let bound = window.key_bound();
        let mut h = BTreeMap::new();
        for &(_, d) in self.entries.iter().take_while(|&&(k, _)| k <= bound) {
            *h.entry(d).or_insert(0) += 1;
        }
        Ok(h)
    }
}

/// Points of a gcd histogram divisible by some prime in the window.
pub fn sieve_window_from_histogram(
    hist: &BTreeMap<u128, u64>,
    primes: PrimeWindow,
    factorizer: &Factorizer,
) -> Result<u64> {
    let hits = hist
        .par_iter()
        .map(|(&d, &c)| Ok(if primes.hits(d, factorizer)? { c } else { 0 }))
        .collect::<Result<Vec<u64>>>()?;
    Ok(hits.into_iter().sum())
}

/// `V(T; N1, N2)`: points with `X mod p` in `Z` for some prime `p` in the window.
pub fn count_sieve_window(
    spec: &ClosedSubsetSpec,
    window: &HeightWindow,
    primes: PrimeWindow,
    factorizer: &Factorizer,
) -> Result<u64> {
    let table = GcdTable::build(spec, window)?;
    sieve_window_from_histogram(&table.histogram(window)?, primes, factorizer)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthFit {
    /// `(T, N(T), N(T) / T^(n-2))`.
    pub rows: Vec<(u64, u64, f64)>,
    /// Least-squares `c` in `N(T) ~ c T^(n-2)`.
    pub c: f64,
    pub last_estimate: f64,
    /// Slope of `log(N(T)/T^(n-2))` against `log T`; `None` if any count is 0.
    pub log_slope: Option<f64>,
    /// Every count was zero.
    pub all_zero: bool,
}

/// Fits `N(T) ~ c T^(n-2)` over an increasing grid using one pass at the largest `T`.
pub fn fit_growth(inst: &AffineQuadricInstance, grid: &[u64], norm: Norm) -> Result<GrowthFit> {
    if grid.len() < 3 || grid.windows(2).any(|w| w[0] >= w[1]) || grid[0] == 0 {
        return Err(Error::InvalidArgument(
            "growth fit needs an increasing grid of at least three positive heights".into(),
        ));
    }
    let top = HeightWindow::integer(*grid.last().expect("nonempty"), norm)?;
    let mut keys = fold_points(
        inst,
        &top,
        DEFAULT_BUDGET,
        Vec::new,
        |acc, x| acc.push(top.key(x)),
        |mut a, mut b| {
            a.append(&mut b);
            a
        },
    )?;
    keys.sort_unstable();
    let e = inst.dim() as i32 - 2;
    let rows: Vec<(u64, u64, f64)> = grid
        .iter()
        .map(|&t| {
            let bound = HeightWindow::integer(t, norm).expect("positive").key_bound();
            let n = keys.partition_point(|&k| k <= bound) as u64;
            (t, n, n as f64 / (t as f64).powi(e))
        })
        .collect();
    let num: f64 = rows.iter().map(|&(t, n, _)| n as f64 * (t as f64).powi(e)).sum();
    let den: f64 = rows.iter().map(|&(t, _, _)| (t as f64).powi(2 * e)).sum();
    let all_zero = rows.iter().all(|r| r.1 == 0);
    let log_slope = if rows.iter().any(|r| r.1 == 0) {
        None
    } else {
        let pts: Vec<(f64, f64)> = rows.iter().map(|&(t, _, r)| ((t as f64).ln(), r.ln())).collect();
        let k = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        Some(sxy / sxx)
    };
    Ok(GrowthFit {
        last_estimate: rows.last().map_or(0.0, |r| r.2),
        c: if all_zero { 0.0 } else { num / den },
        rows,
        log_slope,
        all_zero,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn inst(form: &str, m: i128) -> AffineQuadricInstance {
        AffineQuadricInstance::parse(form, m).unwrap()
    }

    /// Oracle: every point of the box `[-R, R]^n`.
    fn brute(inst: &AffineQuadricInstance, window: &HeightWindow) -> BTreeSet<Vec<i64>> {
        let n = inst.dim();
        let r = window.radius() as i64;
        let mut out = BTreeSet::new();
        let mut x = vec![-r; n];
        loop {
            let xi: Vec<i128> = x.iter().map(|&v| v as i128).collect();
            if inst.form().evaluate(&xi).unwrap() == inst.m() && window.contains(&x) {
                out.insert(x.clone());
            }
            let mut i = n;
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                x[i] += 1;
                if x[i] <= r {
                    break;
                }
                x[i] = -r;
            }
        }
    }

    #[test]
    fn small_examples() {
        let q = inst("diag:1,1,-3", 1);
        let two: Vec<_> = enumerate_points(&q, &HeightWindow::euclidean(2).unwrap()).unwrap().collect();
        assert_eq!(two, vec![vec![-1, 0, 0], vec![0, -1, 0], vec![0, 1, 0], vec![1, 0, 0]]);
        let three = count_points(&q, &HeightWindow::euclidean(3).unwrap()).unwrap();
        assert_eq!(three.total, 12);
        let pts: BTreeSet<_> = enumerate_points(&q, &HeightWindow::euclidean(3).unwrap()).unwrap().collect();
        for p in [[2, 0, 1], [2, 0, -1], [-2, 0, 1], [0, 2, -1], [0, -2, 1]] {
            assert!(pts.contains(&p.to_vec()));
        }
        // Definite form with negative m: nothing.
        let none = inst("diag:1,1,1", -1);
        assert_eq!(count_points(&none, &HeightWindow::euclidean(10).unwrap()).unwrap().total, 0);
        assert_eq!(count_points(&q, &HeightWindow::new(1, 2, Norm::Euclidean).unwrap()).unwrap().total, 0);
    }

    #[test]
    fn matches_box_oracle() {
        let cases = [
            ("diag:1,1,-3", 1),
            ("diag:1,1,-1", 1),
            ("diag:1,1,-1", -1),
            ("x1*x2+x3^2", 2),
            ("x1^2+x1*x2-2*x3^2", 5),
            ("x1*x2+x2*x3-x1*x3", 3),
            ("diag:1,1,1,-1", 2),
            ("x1^2+x2*x3+x3*x4-x4^2", -1),
        ];
        for (form, m) in cases {
            let q = inst(form, m);
            for norm in [Norm::Euclidean, Norm::Sup] {
                let t = if q.dim() == 4 { 6 } else { 11 };
                let w = HeightWindow::integer(t, norm).unwrap();
                let got: Vec<_> = enumerate_points(&q, &w).unwrap().collect();
                let expect: Vec<_> = brute(&q, &w).into_iter().collect();
                assert_eq!(got, expect, "{form}={m} {norm:?}");
            }
            let w = HeightWindow::new(15, 2, Norm::Euclidean).unwrap();
            assert_eq!(enumerate_points(&q, &w).unwrap().collect::<BTreeSet<_>>(), brute(&q, &w), "{form}");
        }
    }

    #[test]
    fn norms_and_monotonicity() {
        let q = inst("diag:1,1,1,-1", 1);
        let mut prev = 0;
        for t in [1, 2, 5, 9, 17] {
            let e = count_points(&q, &HeightWindow::euclidean(t).unwrap()).unwrap().total;
            let s = count_points(&q, &HeightWindow::sup(t).unwrap()).unwrap().total;
            assert!(s >= e);
            assert!(e >= prev);
            prev = e;
        }
    }

    #[test]
    fn two_sheets_split_evenly_for_symmetric_form() {
        let q = inst("diag:1,1,-1", -1);
        let c = count_points(&q, &HeightWindow::euclidean(40).unwrap()).unwrap();
        let (a, b) = c.sheets.unwrap();
        assert_eq!(a + b, c.total);
        assert_eq!(a, b);
        assert!(count_points(&inst("diag:1,1,-1", 1), &HeightWindow::euclidean(5).unwrap()).unwrap().sheets.is_none());
    }

    #[test]
    fn congruence_partition() {
        let q = inst("diag:1,1,-3", 1);
        let w = HeightWindow::euclidean(3).unwrap();
        let class = CongruenceClass::new(2, &[1, 0, 0]).unwrap();
        assert_eq!(count_congruence(&q, &w, &class).unwrap(), 2);
        let bad = CongruenceClass::new(3, &[0, 0, 0]).unwrap();
        assert!(!bad.lies_on(&q));
        assert_eq!(count_congruence(&q, &w, &bad).unwrap(), 0);

        let q = inst("diag:1,1,1,-1", 1);
        let w = HeightWindow::euclidean(20).unwrap();
        let n = count_points(&q, &w).unwrap().total;
        let h3 = residue_histogram(&q, &w, 3).unwrap();
        assert_eq!(h3.values().sum::<u64>(), n);
        let h6 = residue_histogram(&q, &w, 6).unwrap();
        for (xi, &v) in &h3 {
            let refined: u64 = h6
                .iter()
                .filter(|(k, _)| k.iter().zip(xi).all(|(a, b)| a % 3 == *b))
                .map(|(_, c)| c)
                .sum();
            assert_eq!(refined, v);
            let class = CongruenceClass::new(3, &xi.iter().map(|&c| c as i64).collect::<Vec<_>>()).unwrap();
            assert!(class.lies_on(&q));
            assert_eq!(count_congruence(&q, &w, &class).unwrap(), v);
        }
    }

    fn reference_subset() -> ClosedSubsetSpec {
        ClosedSubsetSpec::parse(inst("diag:1,1,1,-1", 1), "x1;x2", 2).unwrap()
    }

    #[test]
    fn bad_prime_points() {
        let z = reference_subset();
        let w = HeightWindow::euclidean(20).unwrap();
        let n = count_points(z.ambient(), &w).unwrap().total;
        let whole = ClosedSubsetSpec::parse(z.ambient().clone(), "0;0", 2).unwrap();
        assert_eq!(count_bad_prime_points(z.ambient(), &w, &whole, 7).unwrap(), n);
        for p in [2u64, 3, 5] {
            let direct = count_bad_prime_points(z.ambient(), &w, &z, p).unwrap();
            let by_residue: u64 = residue_histogram(z.ambient(), &w, p)
                .unwrap()
                .iter()
                .filter(|(xi, _)| z.contains_mod(xi, p))
                .map(|(_, c)| c)
                .sum();
            assert_eq!(direct, by_residue);
        }
        let far = ClosedSubsetSpec::parse(z.ambient().clone(), "x1^2+x2^2+1;x1", 2).unwrap();
        assert_eq!(count_bad_prime_points(z.ambient(), &w, &far, 1009).unwrap(), 0);
    }

    #[test]
    fn sieve_window_cross_checks() {
        let z = reference_subset();
        let f = Factorizer::default();
        let w = HeightWindow::euclidean(50).unwrap();
        let table = GcdTable::build(&z, &w).unwrap();
        let hist = table.histogram(&w).unwrap();
        // Rational points of Z: x1 = x2 = 0, z^2 - w^2 = 1.
        assert_eq!(hist.get(&0), Some(&2));
        for p in [3u128, 5, 7, 11] {
            let window = PrimeWindow::new(p, Some(p)).unwrap();
            let via_gcd = sieve_window_from_histogram(&hist, window, &f).unwrap();
            let direct = count_bad_prime_points(z.ambient(), &w, &z, p as u64).unwrap();
            assert_eq!(via_gcd, direct, "p={p}");
        }
        let wide = sieve_window_from_histogram(&hist, PrimeWindow::new(3, Some(40)).unwrap(), &f).unwrap();
        let narrow = sieve_window_from_histogram(&hist, PrimeWindow::new(5, Some(20)).unwrap(), &f).unwrap();
        assert!(narrow <= wide);
        let huge = sieve_window_from_histogram(&hist, PrimeWindow::at_least(10_000).unwrap(), &f).unwrap();
        assert_eq!(huge, 2);
        assert_eq!(
            count_sieve_window(&z, &HeightWindow::euclidean(20).unwrap(), PrimeWindow::at_least(2).unwrap(), &f).unwrap(),
            table.histogram(&HeightWindow::euclidean(20).unwrap()).unwrap().iter().filter(|(d, _)| **d != 1).map(|(_, c)| c).sum::<u64>()
        );
    }

    #[test]
    fn graded_table_matches_fresh_counts() {
        let z = reference_subset();
        let big = GcdTable::build(&z, &HeightWindow::euclidean(30).unwrap()).unwrap();
        for t in [5, 12, 30] {
            let w = HeightWindow::euclidean(t).unwrap();
            assert_eq!(big.total(&w).unwrap(), count_points(z.ambient(), &w).unwrap().total);
            assert_eq!(big.histogram(&w).unwrap(), GcdTable::build(&z, &w).unwrap().histogram(&w).unwrap());
        }
        assert!(big.total(&HeightWindow::sup(5).unwrap()).is_err());
    }

    #[test]
    fn growth_fit_reports() {
        let q = inst("diag:1,1,-1", 1);
        let fit = fit_growth(&q, &[25, 50, 100], Norm::Euclidean).unwrap();
        assert!(!fit.all_zero && fit.c > 0.0);
        for &(t, n, _) in &fit.rows {
            assert_eq!(n, count_points(&q, &HeightWindow::euclidean(t).unwrap()).unwrap().total);
        }
        let empty = fit_growth(&inst("diag:1,1,1", -1), &[2, 4, 8], Norm::Euclidean).unwrap();
        assert!(empty.all_zero && empty.c == 0.0 && empty.log_slope.is_none());
        assert!(fit_growth(&q, &[4, 2, 8], Norm::Euclidean).is_err());
    }

    #[test]
    fn budget_and_overflow_guards() {
        let q = inst("diag:1,1,1,-1", 1);
        assert!(matches!(
            enumerate_points_with_budget(&q, &HeightWindow::euclidean(1000).unwrap(), 1000),
            Err(Error::EnumerationBudget { .. })
        ));
        assert_eq!(
            count_points(&q, &HeightWindow::euclidean(1 << 62).unwrap()),
            Err(Error::HeightTooLarge)
        );
    }
}
