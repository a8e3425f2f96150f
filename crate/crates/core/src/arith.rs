//! Integer arithmetic shared by every module: exact square roots, a prime
//! sieve, Miller-Rabin, trial division + Pollard rho factorization over
//! `u128`, and Legendre/Jacobi symbols.

use std::sync::OnceLock;

use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Trial division covers every prime below this bound.
pub const TRIAL_DIVISION_LIMIT: u32 = 1_000_000;

/// Default seed for the rho stage when the caller does not provide one.
pub const DEFAULT_SEED: u64 = 0x5eed_0f_f4c7;

/// Floor of the square root of `n`.
pub fn isqrt(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u128;
    // f64 is off by at most a few units for n < 2^128; fix up exactly.
    while x > 0 && x.checked_mul(x).is_none_or(|sq| sq > n) {
        x -= 1;
    }
    while (x + 1).checked_mul(x + 1).is_some_and(|sq| sq <= n) {
        x += 1;
    }
    x
}

/// Residues that squares take modulo 64.
const SQUARES_MOD_64: u64 = {
    let mut mask = 0u64;
    let mut i = 0;
    while i < 64 {
        mask |= 1 << ((i * i) % 64);
        i += 1;
    }
    mask
};

/// `Some(r)` with `r*r == n` when `n` is a perfect square.
pub fn exact_sqrt(n: i128) -> Option<u128> {
    if n < 0 || SQUARES_MOD_64 >> (n as u64 & 63) & 1 == 0 {
        return None;
    }
    let r = isqrt(n as u128);
    (r * r == n as u128).then_some(r)
}

pub fn is_square(n: i128) -> bool {
    exact_sqrt(n).is_some()
}

/// All primes strictly below `limit`.
pub fn primes_below(limit: u64) -> Vec<u64> {
    if limit < 3 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n];
    let mut primes = Vec::with_capacity(n / 10 + 8);
    for i in 2..n {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j < n {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

fn trial_primes() -> &'static [u32] {
    static PRIMES: OnceLock<Vec<u32>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        primes_below(TRIAL_DIVISION_LIMIT as u64)
            .into_iter()
            .map(|p| p as u32)
            .collect()
    })
}

pub fn mulmod(a: u128, b: u128, m: u128) -> u128 {
    if m <= u64::MAX as u128 {
        return (a % m) * (b % m) % m;
    }
    // Double-and-add; a + a cannot overflow since m < 2^127 is enforced by callers.
    let (mut a, mut b) = (a % m, b % m);
    let mut acc = 0u128;
    while b > 0 {
        if b & 1 == 1 {
            acc = addmod(acc, a, m);
        }
        a = addmod(a, a, m);
        b >>= 1;
    }
    acc
}

fn addmod(a: u128, b: u128, m: u128) -> u128 {
    let (s, overflow) = a.overflowing_add(b);
    if overflow || s >= m {
        s.wrapping_sub(m)
    } else {
        s
    }
}

pub fn powmod(mut base: u128, mut exp: u128, m: u128) -> u128 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u128;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mulmod(acc, base, m);
        }
        base = mulmod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Miller-Rabin with the first 20 prime bases. Deterministic below 3.3e24,
/// overwhelmingly reliable above.
pub fn is_prime(n: u128) -> bool {
    const BASES: [u128; 20] = [
        2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71,
    ];
    if n < 2 {
        return false;
    }
    for &p in &BASES {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &BASES {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Prime factorization: trial division by every prime below 10^6, then
/// Brent's rho with pseudo-random parameters drawn from a seeded stream.
#[derive(Debug, Clone, Copy)]
pub struct Factorizer {
    seed: u64,
}

impl Default for Factorizer {
    fn default() -> Self {
        Self { seed: DEFAULT_SEED }
    }
}

impl Factorizer {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed }
    }

    /// Sorted `(prime, exponent)` pairs. `factor(1)` is empty; 0 is rejected.
    pub fn factor(&self, n: u128) -> Result<Vec<(u128, u32)>> {
        if n == 0 {
            return Err(Error::InvalidArgument("cannot factor 0".into()));
        }
        if n >= 1u128 << 127 {
            return Err(Error::Overflow);
        }
        let mut rest = n;
        let mut out = Vec::new();
        for &p in trial_primes() {
            let p = p as u128;
            if p * p > rest {
                break;
            }
            if rest % p == 0 {
                let mut e = 0;
                while rest % p == 0 {
                    rest /= p;
                    e += 1;
                }
                out.push((p, e));
            }
        }
        if rest > 1 {
            let mut large = Vec::new();
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ (n as u64));
            split_large(rest, &mut rng, &mut large)?;
            large.sort_unstable();
            for p in large {
                match out.last_mut() {
                    Some((q, e)) if *q == p => *e += 1,
                    _ => out.push((p, 1)),
                }
            }
        }
        Ok(out)
    }

    pub fn prime_divisors(&self, n: u128) -> Result<Vec<u128>> {
        Ok(self.factor(n)?.into_iter().map(|(p, _)| p).collect())
    }

    pub fn largest_prime_factor(&self, n: u128) -> Result<Option<u128>> {
        Ok(self.factor(n)?.last().map(|&(p, _)| p))
    }
}

fn split_large(n: u128, rng: &mut ChaCha8Rng, out: &mut Vec<u128>) -> Result<()> {
    if n == 1 {
        return Ok(());
    }
    if is_prime(n) {
        out.push(n);
        return Ok(());
    }
    if let Some(r) = exact_sqrt(n as i128) {
        split_large(r, rng, out)?;
        return split_large(r, rng, out);
    }
    for _ in 0..64 {
        let c = rng.gen_range(1..n);
        let x0 = rng.gen_range(0..n);
        if let Some(d) = brent_rho(n, x0, c) {
            split_large(d, rng, out)?;
            return split_large(n / d, rng, out);
        }
    }
    Err(Error::FactorizationFailed(n))
}

fn brent_rho(n: u128, x0: u128, c: u128) -> Option<u128> {
    let f = |x: u128| addmod(mulmod(x, x, n), c, n);
    let (mut y, mut r, mut q) = (x0, 1u64, 1u128);
    let (mut x, mut ys);
    let m = 128u64;
    let mut g: u128;
    loop {
        x = y;
        for _ in 0..r {
            y = f(y);
        }
        let mut k = 0;
        loop {
            ys = y;
            for _ in 0..m.min(r - k) {
                y = f(y);
                q = mulmod(q, x.abs_diff(y), n);
            }
            g = q.gcd(&n);
            k += m;
            if k >= r || g != 1 {
                break;
            }
        }
        r *= 2;
        if g != 1 || r > 1 << 24 {
            break;
        }
    }
    if g == n {
        loop {
            ys = f(ys);
            g = x.abs_diff(ys).gcd(&n);
            if g != 1 {
                break;
            }
        }
    }
    (g != 1 && g != n).then_some(g)
}

/// Product of the distinct primes dividing `n` (`rad(0)` is undefined; 1 for 0).
pub fn radical(n: u128) -> Result<u128> {
    if n == 0 {
        return Ok(1);
    }
    Ok(Factorizer::default()
        .factor(n)?
        .into_iter()
        .map(|(p, _)| p)
        .product())
}

/// Exponent of `p` in `n` and the cofactor. `n` must be nonzero.
pub fn split_valuation(mut n: i128, p: u128) -> (u32, i128) {
    debug_assert!(n != 0 && p > 1);
    let p = p as i128;
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    (v, n)
}

/// Jacobi symbol (a/n) for odd positive n.
pub fn jacobi(a: i128, n: u128) -> i8 {
    assert!(n % 2 == 1, "jacobi symbol needs an odd modulus");
    let mut a = a.rem_euclid(n as i128) as u128;
    let mut n = n;
    let mut t = 1i8;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if matches!(n % 8, 3 | 5) {
                t = -t;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            t = -t;
        }
        a %= n;
    }
    if n == 1 {
        t
    } else {
        0
    }
}

/// Legendre symbol (a/p). For p = 2 this returns 0 when a is even and 1
/// otherwise; no caller relies on a quadratic character at 2.
pub fn legendre(a: i128, p: u128) -> i8 {
    if p == 2 {
        return (a.rem_euclid(2) != 0) as i8;
    }
    jacobi(a, p)
}

pub fn gcd_i128(a: i128, b: i128) -> u128 {
    a.unsigned_abs().gcd(&b.unsigned_abs())
}

/// Modular inverse for `gcd(a, m) = 1`.
pub fn inverse_mod(a: u128, m: u128) -> Option<u128> {
    let e = (a as i128).extended_gcd(&(m as i128));
    (e.gcd == 1).then(|| e.x.rem_euclid(m as i128) as u128)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isqrt_edges() {
        assert_eq!(isqrt(0), 0);
        assert_eq!(isqrt(15), 3);
        assert_eq!(isqrt(16), 4);
        let big = (1u128 << 63) - 25;
        assert_eq!(isqrt(big * big), big);
        assert_eq!(isqrt(big * big - 1), big - 1);
        assert_eq!(isqrt(u128::MAX), (1u128 << 64) - 1);
    }

    #[test]
    fn sieve_matches_primality() {
        let ps = primes_below(2000);
        for n in 0..2000u128 {
            assert_eq!(ps.contains(&(n as u64)), is_prime(n), "{n}");
        }
    }

    #[test]
    fn factors_products_of_large_primes() {
        let f = Factorizer::default();
        let p = 1_000_000_007u128;
        let q = 998_244_353u128;
        assert_eq!(f.factor(p * q).unwrap(), vec![(q, 1), (p, 1)]);
        assert_eq!(f.factor(p * p * 12).unwrap(), vec![(2, 2), (3, 1), (p, 2)]);
        let r = 18_446_744_073_709_551_557u128; // largest prime below 2^64
        assert_eq!(f.factor(r * 3).unwrap(), vec![(3, 1), (r, 1)]);
        assert_eq!(f.factor(1).unwrap(), vec![]);
        assert!(f.factor(0).is_err());
    }

    #[test]
    fn factorization_independent_of_seed() {
        let n = 1_000_003u128 * 1_000_033 * 1_000_037;
        let a = Factorizer::with_seed(1).factor(n).unwrap();
        let b = Factorizer::with_seed(99).factor(n).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn legendre_matches_euler_criterion() {
        for p in primes_below(200).into_iter().skip(1) {
            for a in -50i128..50 {
                let euler = powmod(a.rem_euclid(p as i128) as u128, (p as u128 - 1) / 2, p as u128);
                let expect = match euler {
                    0 => 0,
                    1 => 1,
                    _ => -1,
                };
                assert_eq!(legendre(a, p as u128), expect, "({a}/{p})");
            }
        }
    }
}
