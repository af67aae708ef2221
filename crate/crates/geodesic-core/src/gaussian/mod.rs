//! Exact arithmetic in the ring of Gaussian integers `Z[i]`.
//!
//! Everything downstream (partition geometry, matrix products, congruence
//! counts, the sieve) reduces to the operations here. All arithmetic is
//! integer-exact; `i128` components give ample headroom at desk scale, and
//! factorization is capped at norm `10^12` by default.

mod residue;

pub use residue::{Residue, ResidueRing};

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

/// Default ceiling on `norm(z)` accepted by [`factor`].
pub const DEFAULT_FACTOR_BOUND: i128 = 1_000_000_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GaussianError {
    #[error("gcd(0, 0) is undefined")]
    GcdBothZero,
    #[error("cannot factor zero")]
    FactorZero,
    #[error("norm {0} exceeds the factorization bound {1}")]
    NormOverBound(i128, i128),
    #[error("is_squarefree is undefined for zero")]
    SquarefreeZero,
}

/// A Gaussian integer `re + im*i`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GaussianInt {
    pub re: i128,
    pub im: i128,
}

/// Shorthand constructor.
pub const fn gi(re: i128, im: i128) -> GaussianInt {
    GaussianInt { re, im }
}

impl fmt::Debug for GaussianInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for GaussianInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re, self.im) {
            (re, 0) => write!(f, "{re}"),
            (0, 1) => write!(f, "i"),
            (0, -1) => write!(f, "-i"),
            (0, im) => write!(f, "{im}i"),
            (re, 1) => write!(f, "{re}+i"),
            (re, -1) => write!(f, "{re}-i"),
            (re, im) if im < 0 => write!(f, "{re}{im}i"),
            (re, im) => write!(f, "{re}+{im}i"),
        }
    }
}

impl GaussianInt {
    pub const ZERO: GaussianInt = gi(0, 0);
    pub const ONE: GaussianInt = gi(1, 0);
    pub const I: GaussianInt = gi(0, 1);

    pub fn norm(self) -> i128 {
        self.re * self.re + self.im * self.im
    }

    pub fn conj(self) -> GaussianInt {
        gi(self.re, -self.im)
    }

    pub fn is_zero(self) -> bool {
        self.re == 0 && self.im == 0
    }

    pub fn is_unit(self) -> bool {
        self.norm() == 1
    }

    /// Multiplication by `i^k` for `k` in `0..4`.
    pub fn mul_unit_pow(self, k: u8) -> GaussianInt {
        match k % 4 {
            0 => self,
            1 => gi(-self.im, self.re),
            2 => gi(-self.re, -self.im),
            _ => gi(self.im, -self.re),
        }
    }

    /// First-quadrant associate: `re > 0, im >= 0` (zero stays zero).
    ///
    /// Each nonzero `z` has exactly one associate in the half-open first
    /// quadrant, which makes equality of ideals testable.
    pub fn canonical(self) -> GaussianInt {
        self.canonical_with_unit().0
    }

    /// Canonical associate together with the power `k` such that
    /// `i^k * self == canonical`.
    pub fn canonical_with_unit(self) -> (GaussianInt, u8) {
        if self.is_zero() {
            return (self, 0);
        }
        for k in 0..4 {
            let w = self.mul_unit_pow(k);
            if w.re > 0 && w.im >= 0 {
                return (w, k);
            }
        }
        unreachable!("every nonzero Gaussian integer has a first-quadrant associate")
    }

    /// Exact division; `None` when `other` does not divide `self`.
    pub fn checked_div(self, other: GaussianInt) -> Option<GaussianInt> {
        if other.is_zero() {
            return None;
        }
        let n = other.norm();
        let num = self * other.conj();
        if num.re % n == 0 && num.im % n == 0 {
            Some(gi(num.re / n, num.im / n))
        } else {
            None
        }
    }

    pub fn divides(self, other: GaussianInt) -> bool {
        other.checked_div(self).is_some()
    }

    /// Euclidean division with `norm(r) <= norm(b)/2`.
    pub fn div_rem(self, b: GaussianInt) -> (GaussianInt, GaussianInt) {
        debug_assert!(!b.is_zero());
        let n = b.norm();
        let num = self * b.conj();
        let q = gi(round_div(num.re, n), round_div(num.im, n));
        (q, self - q * b)
    }
}

/// Round `a / b` to the nearest integer (b > 0), ties toward negative infinity.
fn round_div(a: i128, b: i128) -> i128 {
    debug_assert!(b > 0);
    (2 * a + b).div_euclid(2 * b)
}

impl Add for GaussianInt {
    type Output = GaussianInt;
    fn add(self, rhs: GaussianInt) -> GaussianInt {
        gi(self.re + rhs.re, self.im + rhs.im)
    }
}

impl Sub for GaussianInt {
    type Output = GaussianInt;
    fn sub(self, rhs: GaussianInt) -> GaussianInt {
        gi(self.re - rhs.re, self.im - rhs.im)
    }
}

impl Mul for GaussianInt {
    type Output = GaussianInt;
    fn mul(self, rhs: GaussianInt) -> GaussianInt {
        gi(
            self.re * rhs.re - self.im * rhs.im,
            self.re * rhs.im + self.im * rhs.re,
        )
    }
}

impl Neg for GaussianInt {
    type Output = GaussianInt;
    fn neg(self) -> GaussianInt {
        gi(-self.re, -self.im)
    }
}

impl From<i128> for GaussianInt {
    fn from(n: i128) -> GaussianInt {
        gi(n, 0)
    }
}

/// Greatest common divisor, returned as the canonical associate.
pub fn gcd(a: GaussianInt, b: GaussianInt) -> Result<GaussianInt, GaussianError> {
    if a.is_zero() && b.is_zero() {
        return Err(GaussianError::GcdBothZero);
    }
    let (mut a, mut b) = (a, b);
    while !b.is_zero() {
        let (_, r) = a.div_rem(b);
        a = b;
        b = r;
    }
    Ok(a.canonical())
}

/// Unit times sorted prime powers, multiplying back to the input exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaussianFactorization {
    /// One of `1, i, -1, -i`.
    pub unit: GaussianInt,
    /// `(canonical prime, exponent)`, sorted by `(norm, re, im)`, no repeats.
    pub factors: Vec<(GaussianInt, u32)>,
}

impl GaussianFactorization {
    pub fn product(&self) -> GaussianInt {
        let mut p = self.unit;
        for &(q, e) in &self.factors {
            for _ in 0..e {
                p = p * q;
            }
        }
        p
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }
}

/// Factor `z` into canonical Gaussian primes.
///
/// Works through the rational factorization of `norm(z)`: the ramified prime
/// `1+i` soaks up the even part, inert primes `p = 3 mod 4` come in squared
/// norms, and split primes `p = 1 mod 4` are recovered as `gcd(p, x - i)`
/// with `x^2 = -1 mod p`.
pub fn factor(z: GaussianInt) -> Result<GaussianFactorization, GaussianError> {
    factor_with_bound(z, DEFAULT_FACTOR_BOUND)
}

pub fn factor_with_bound(
    z: GaussianInt,
    bound: i128,
) -> Result<GaussianFactorization, GaussianError> {
    if z.is_zero() {
        return Err(GaussianError::FactorZero);
    }
    let n = z.norm();
    if n > bound {
        return Err(GaussianError::NormOverBound(n, bound));
    }
    let mut rest = z;
    let mut factors: Vec<(GaussianInt, u32)> = Vec::new();
    for (p, pe) in factor_u64(n as u64) {
        if p == 2 {
            let pi = gi(1, 1);
            let mut e = 0;
            while let Some(q) = rest.checked_div(pi) {
                rest = q;
                e += 1;
            }
            debug_assert_eq!(e, pe);
            factors.push((pi, e));
        } else if p % 4 == 3 {
            debug_assert_eq!(pe % 2, 0);
            let pi = gi(p as i128, 0);
            let mut e = 0;
            while let Some(q) = rest.checked_div(pi) {
                rest = q;
                e += 1;
            }
            debug_assert_eq!(e, pe / 2);
            factors.push((pi, e));
        } else {
            let x = sqrt_minus_one_mod(p);
            let pi = gcd(gi(p as i128, 0), gi(x as i128, -1))
                .expect("nonzero gcd input")
                .canonical();
            debug_assert_eq!(pi.norm(), p as i128);
            for q in [pi, pi.conj().canonical()] {
                let mut e = 0;
                while let Some(w) = rest.checked_div(q) {
                    rest = w;
                    e += 1;
                }
                if e > 0 {
                    factors.push((q, e));
                }
            }
        }
    }
    debug_assert!(rest.is_unit());
    factors.sort_by_key(|&(q, _)| (q.norm(), q.re, q.im));
    Ok(GaussianFactorization {
        unit: rest,
        factors,
    })
}

/// True iff every prime in `factor(z)` appears with exponent 1.
pub fn is_squarefree(z: GaussianInt) -> Result<bool, GaussianError> {
    if z.is_zero() {
        return Err(GaussianError::SquarefreeZero);
    }
    Ok(factor(z)?.is_squarefree())
}

/// All canonical Gaussian primes of norm at most `n`, sorted by `(norm, re, im)`.
///
/// Covers the ramified prime `1+i`, both split conjugates over `p = 1 mod 4`,
/// and inert rational primes `p = 3 mod 4` (norm `p^2`).
pub fn gaussian_primes_up_to(n: i128) -> Vec<GaussianInt> {
    let mut out = Vec::new();
    if n >= 2 {
        out.push(gi(1, 1));
    }
    for p in rational_primes_up_to(n.max(0) as u64) {
        if p == 2 {
            continue;
        }
        if p % 4 == 3 {
            if (p as i128) * (p as i128) <= n {
                out.push(gi(p as i128, 0));
            }
        } else if (p as i128) <= n {
            let x = sqrt_minus_one_mod(p);
            let pi = gcd(gi(p as i128, 0), gi(x as i128, -1)).expect("nonzero gcd input");
            out.push(pi);
            out.push(pi.conj().canonical());
        }
    }
    out.sort_by_key(|q| (q.norm(), q.re, q.im));
    out
}

/// Residue class of `D mod 4` among the square classes `{0, 1, -1, 2i}`.
///
/// Squaring all sixteen residues of `Z[i]/(4)` shows these four classes are
/// exactly the squares mod 4 (see the exhaustive test below), so `None` means
/// `D` cannot be the discriminant of a binary quadratic form over `Z[i]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiscClass {
    Zero,
    One,
    MinusOne,
    TwoI,
    None,
}

pub fn discriminant_residue_class(d: GaussianInt) -> DiscClass {
    let re = d.re.rem_euclid(4);
    let im = d.im.rem_euclid(4);
    match (re, im) {
        (0, 0) => DiscClass::Zero,
        (1, 0) => DiscClass::One,
        (3, 0) => DiscClass::MinusOne,
        (0, 2) => DiscClass::TwoI,
        _ => DiscClass::None,
    }
}

// ---------------------------------------------------------------------------
// rational-integer helpers
// ---------------------------------------------------------------------------

/// Sieve of Eratosthenes.
pub fn rational_primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for p in 2..=n {
        if !composite[p] {
            primes.push(p as u64);
            let mut q = p * p;
            while q <= n {
                composite[q] = true;
                q += p;
            }
        }
    }
    primes
}

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn powmod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(acc, b, m);
        }
        b = mulmod(b, b, m);
        e >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for u64.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
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
    // Sinclair's deterministic base set for n < 3.3 * 10^24 restricted to u64.
    'outer: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

fn pollard_rho(n: u64) -> u64 {
    debug_assert!(n % 2 == 1 && n > 3);
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mulmod(x, x, n) + c) % n;
        let (mut x, mut y, mut d) = (2u64, 2u64, 1u64);
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = gcd_u64(x.abs_diff(y), n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Factor a u64 into `(prime, exponent)` pairs, sorted by prime.
pub fn factor_u64(mut n: u64) -> Vec<(u64, u32)> {
    let mut out: Vec<(u64, u32)> = Vec::new();
    let push = |p: u64, out: &mut Vec<(u64, u32)>| {
        if let Some(last) = out.iter_mut().find(|(q, _)| *q == p) {
            last.1 += 1;
        } else {
            out.push((p, 1));
        }
    };
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31] {
        while n % p == 0 {
            n /= p;
            push(p, &mut out);
        }
    }
    let mut stack = vec![n];
    while let Some(m) = stack.pop() {
        if m == 1 {
            continue;
        }
        if is_prime_u64(m) {
            push(m, &mut out);
            continue;
        }
        let mut d = m;
        // trial division first: norms at desk scale rarely need rho
        let mut found = false;
        let mut t = 37u64;
        while t * t <= d && t < 100_000 {
            if d % t == 0 {
                push(t, &mut out);
                stack.push(d / t);
                found = true;
                break;
            }
            t += 2;
        }
        if !found {
            d = pollard_rho(m);
            stack.push(d);
            stack.push(m / d);
        }
    }
    out.sort_by_key(|&(p, _)| p);
    out
}

/// A square root of -1 mod a prime `p = 1 mod 4`.
fn sqrt_minus_one_mod(p: u64) -> u64 {
    debug_assert_eq!(p % 4, 1);
    for a in 2..p {
        let x = powmod(a, (p - 1) / 4, p);
        if mulmod(x, x, p) == p - 1 {
            return x;
        }
    }
    unreachable!("p = 1 mod 4 always has a 4th-power non-residue")
}
