//! Dyadic fixed-point intervals with outward rounding.
//!
//! An [`Interval`] at precision `p` is the closed set `[lo / 2^p, hi / 2^p]`.
//! Every operation rounds the lower end down and the upper end up, so the
//! true value of any expression built from exact inputs lies inside the
//! result.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    lo: BigInt,
    hi: BigInt,
    prec: u32,
}

fn floor_div(a: &BigInt, b: &BigInt) -> BigInt {
    a.div_floor(b)
}

fn ceil_div(a: &BigInt, b: &BigInt) -> BigInt {
    -((-a).div_floor(b))
}

fn shr_floor(a: &BigInt, k: u32) -> BigInt {
    a >> k as usize
}

fn shr_ceil(a: &BigInt, k: u32) -> BigInt {
    -((-a) >> k as usize)
}

impl Interval {
    pub fn new(lo: BigInt, hi: BigInt, prec: u32) -> Self {
        debug_assert!(lo <= hi);
        Interval { lo, hi, prec }
    }

    pub fn zero(prec: u32) -> Self {
        Interval::new(BigInt::zero(), BigInt::zero(), prec)
    }

    pub fn from_int(n: &BigInt, prec: u32) -> Self {
        let v = n << prec as usize;
        Interval::new(v.clone(), v, prec)
    }

    pub fn from_i64(n: i64, prec: u32) -> Self {
        Self::from_int(&BigInt::from(n), prec)
    }

    /// Tightest enclosure of an exact rational.
    pub fn from_rational(q: &BigRational, prec: u32) -> Self {
        let num = q.numer() << prec as usize;
        Interval::new(floor_div(&num, q.denom()), ceil_div(&num, q.denom()), prec)
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn lo_raw(&self) -> &BigInt {
        &self.lo
    }

    pub fn hi_raw(&self) -> &BigInt {
        &self.hi
    }

    pub fn lo(&self) -> BigRational {
        BigRational::new(self.lo.clone(), BigInt::one() << self.prec as usize)
    }

    pub fn hi(&self) -> BigRational {
        BigRational::new(self.hi.clone(), BigInt::one() << self.prec as usize)
    }

    pub fn lo_f64(&self) -> f64 {
        ratio_f64(&self.lo, self.prec)
    }

    pub fn hi_f64(&self) -> f64 {
        ratio_f64(&self.hi, self.prec)
    }

    pub fn mid_f64(&self) -> f64 {
        ratio_f64(&(&self.lo + &self.hi), self.prec + 1)
    }

    /// Upper bound on the width, as a float.
    pub fn width_f64(&self) -> f64 {
        ratio_f64(&(&self.hi - &self.lo), self.prec)
    }

    pub fn contains(&self, q: &BigRational) -> bool {
        self.lo() <= *q && *q <= self.hi()
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo() <= other.lo() && other.hi() <= self.hi()
    }

    /// Certified comparison with zero: `Some` when the sign is decided.
    pub fn sign(&self) -> Option<Ordering> {
        if self.lo.is_positive() {
            Some(Ordering::Greater)
        } else if self.hi.is_negative() {
            Some(Ordering::Less)
        } else if self.lo.is_zero() && self.hi.is_zero() {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    /// Re-expresses the interval at another precision, rounding outward.
    pub fn with_prec(&self, prec: u32) -> Self {
        match prec.cmp(&self.prec) {
            Ordering::Equal => self.clone(),
            Ordering::Greater => {
                let s = (prec - self.prec) as usize;
                Interval::new(&self.lo << s, &self.hi << s, prec)
            }
            Ordering::Less => {
                let s = self.prec - prec;
                Interval::new(shr_floor(&self.lo, s), shr_ceil(&self.hi, s), prec)
            }
        }
    }

    fn align(&self, other: &Interval) -> (Interval, Interval) {
        let p = self.prec.max(other.prec);
        (self.with_prec(p), other.with_prec(p))
    }

    pub fn add(&self, other: &Interval) -> Interval {
        let (a, b) = self.align(other);
        Interval::new(&a.lo + &b.lo, &a.hi + &b.hi, a.prec)
    }

    pub fn sub(&self, other: &Interval) -> Interval {
        let (a, b) = self.align(other);
        Interval::new(&a.lo - &b.hi, &a.hi - &b.lo, a.prec)
    }

    pub fn neg(&self) -> Interval {
        Interval::new(-&self.hi, -&self.lo, self.prec)
    }

    pub fn mul(&self, other: &Interval) -> Interval {
        let (a, b) = self.align(other);
        let p = a.prec;
        let cands = [&a.lo * &b.lo, &a.lo * &b.hi, &a.hi * &b.lo, &a.hi * &b.hi];
        let min = cands.iter().min().expect("four candidates");
        let max = cands.iter().max().expect("four candidates");
        Interval::new(shr_floor(min, p), shr_ceil(max, p), p)
    }

    /// Multiplication by an exact rational.
    pub fn mul_rational(&self, q: &BigRational) -> Interval {
        let (n, d) = (q.numer(), q.denom());
        let a = &self.lo * n;
        let b = &self.hi * n;
        let (min, max) = if a <= b { (a, b) } else { (b, a) };
        Interval::new(floor_div(&min, d), ceil_div(&max, d), self.prec)
    }

    pub fn mul_int(&self, n: &BigInt) -> Interval {
        self.mul_rational(&BigRational::from_integer(n.clone()))
    }

    pub fn scale_pow2(&self, k: i64) -> Interval {
        if k >= 0 {
            Interval::new(&self.lo << k as usize, &self.hi << k as usize, self.prec)
        } else {
            let s = (-k) as u32;
            Interval::new(shr_floor(&self.lo, s), shr_ceil(&self.hi, s), self.prec)
        }
    }

    /// Convex hull.
    pub fn hull(&self, other: &Interval) -> Interval {
        let (a, b) = self.align(other);
        Interval::new(a.lo.min(b.lo), a.hi.max(b.hi), a.prec)
    }

    /// Natural logarithm of a positive interval.
    pub fn ln(&self) -> Option<Interval> {
        if !self.lo.is_positive() {
            return None;
        }
        let p = self.prec;
        let lo = ln_bounds(&self.lo(), p).0;
        let hi = ln_bounds(&self.hi(), p).1;
        Some(Interval::new(lo, hi, p))
    }

    pub fn exp(&self) -> Interval {
        let p = self.prec;
        let lo = exp_bounds(&self.lo(), p).0;
        let hi = exp_bounds(&self.hi(), p).1;
        Interval::new(lo, hi, p)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.12}, {:.12}]", self.lo_f64(), self.hi_f64())
    }
}

fn ratio_f64(n: &BigInt, prec: u32) -> f64 {
    // Keep 64 significant bits before converting.
    let bits = n.bits();
    if bits > 64 {
        let s = bits - 64;
        let top = (n >> s as usize).to_f64().unwrap_or(f64::NAN);
        top * 2f64.powi(s as i32 - prec as i32)
    } else {
        n.to_f64().unwrap_or(f64::NAN) * 2f64.powi(-(prec as i32))
    }
}

/// Guard bits used internally by the series evaluations.
fn guard(prec: u32) -> u32 {
    prec + 32
}

/// `2·atanh(num/den)` for `0 ≤ num/den ≤ 1/3`, as raw bounds at precision `q`.
fn two_atanh(num: &BigInt, den: &BigInt, q: u32) -> (BigInt, BigInt) {
    let zn = num << q as usize;
    let z_lo = floor_div(&zn, den);
    let z_hi = ceil_div(&zn, den);
    let z2_lo = shr_floor(&(&z_lo * &z_lo), q);
    let z2_hi = shr_ceil(&(&z_hi * &z_hi), q);
    let (mut pow_lo, mut pow_hi) = (z_lo, z_hi);
    let (mut sum_lo, mut sum_hi) = (BigInt::zero(), BigInt::zero());
    let mut i: u64 = 0;
    loop {
        let d = BigInt::from(2 * i + 1);
        sum_lo += floor_div(&pow_lo, &d);
        sum_hi += ceil_div(&pow_hi, &d);
        pow_lo = shr_floor(&(&pow_lo * &z2_lo), q);
        pow_hi = shr_ceil(&(&pow_hi * &z2_hi), q);
        i += 1;
        if pow_hi <= BigInt::one() {
            break;
        }
        if i > 8 * q as u64 + 64 {
            break;
        }
    }
    // Remaining terms sum to at most pow·(1/(1−z²)) ≤ pow·9/8.
    let tail = ceil_div(&(&pow_hi * 9), &BigInt::from(8)) + 1;
    sum_hi += tail;
    (sum_lo * 2, sum_hi * 2)
}

fn ln2_bounds(q: u32) -> (BigInt, BigInt) {
    two_atanh(&BigInt::one(), &BigInt::from(3), q)
}

/// Bounds on `ln x` for an exact positive rational, at precision `p`.
pub(crate) fn ln_bounds(x: &BigRational, p: u32) -> (BigInt, BigInt) {
    assert!(x.is_positive(), "ln of a non-positive number");
    let q = guard(p);
    // x = a / b = (a / (b·2^k)) · 2^k with 1 ≤ a / (b·2^k) < 2. Kept as a
    // numerator/denominator pair to avoid gcd work on huge operands.
    let mut k = x.numer().bits() as i64 - x.denom().bits() as i64;
    let (mut a, mut b) = if k >= 0 {
        (x.numer().clone(), x.denom() << k as usize)
    } else {
        (x.numer() << (-k) as usize, x.denom().clone())
    };
    while a >= &b << 1usize {
        b <<= 1usize;
        k += 1;
    }
    while a < b {
        a <<= 1usize;
        k -= 1;
    }
    let (a_lo, a_hi) = two_atanh(&(&a - &b), &(&a + &b), q);
    let (l_lo, l_hi) = ln2_bounds(q);
    let kb = BigInt::from(k);
    let (kl_lo, kl_hi) = if k >= 0 {
        (&kb * &l_lo, &kb * &l_hi)
    } else {
        (&kb * &l_hi, &kb * &l_lo)
    };
    let s = q - p;
    (shr_floor(&(a_lo + kl_lo), s), shr_ceil(&(a_hi + kl_hi), s))
}

/// Bounds on `e^r` for exact rational `r ∈ [0, 2]`, raw at precision `q`.
fn exp_small(r_lo: &BigInt, r_hi: &BigInt, q: u32) -> (BigInt, BigInt) {
    let one = BigInt::one() << q as usize;
    let (mut t_lo, mut t_hi) = (one.clone(), one);
    let (mut s_lo, mut s_hi) = (t_lo.clone(), t_hi.clone());
    let mut n: u64 = 0;
    loop {
        n += 1;
        let d = BigInt::from(n);
        t_lo = floor_div(&shr_floor(&(&t_lo * r_lo), q), &d);
        t_hi = ceil_div(&shr_ceil(&(&t_hi * r_hi), q), &d);
        s_lo += &t_lo;
        s_hi += &t_hi;
        if n >= 8 && t_hi <= BigInt::one() {
            break;
        }
        if n > 8 * q as u64 + 64 {
            break;
        }
    }
    // Tail after term n is at most term_n · r/(n+1−r) ≤ term_n.
    s_hi += &t_hi + 1;
    (s_lo, s_hi)
}

/// Bounds on `e^x` for an exact rational, at precision `p`.
pub(crate) fn exp_bounds(x: &BigRational, p: u32) -> (BigInt, BigInt) {
    let q = guard(p);
    let (l_lo, l_hi) = ln2_bounds(q);
    // k = floor(x / ln2) computed against the upper bound of ln 2, one lower
    // for negative x, so that r = x − k·ln2 ≥ 0.
    let ln2_hi = BigRational::new(l_hi.clone(), BigInt::one() << q as usize);
    let mut k = (x / &ln2_hi).floor().to_integer();
    if x.is_negative() {
        k -= 1;
    }
    let xq = x.numer() << q as usize;
    let x_lo = floor_div(&xq, x.denom());
    let x_hi = ceil_div(&xq, x.denom());
    let (kl_lo, kl_hi) = if k.sign() != Sign::Minus {
        (&k * &l_lo, &k * &l_hi)
    } else {
        (&k * &l_hi, &k * &l_lo)
    };
    let r_lo = x_lo - kl_hi;
    let r_hi = x_hi - kl_lo;
    let (mut e_lo, e_hi) = exp_small(&r_lo.clone().max(BigInt::zero()), &r_hi, q);
    if r_lo.is_negative() {
        // e^r ≥ 1 + r.
        e_lo = ((BigInt::one() << q as usize) + &r_lo).max(BigInt::zero());
    }
    let k = k.to_i64().expect("exponent fits in i64");
    let shift = |v: &BigInt, up: bool| -> BigInt {
        let total = k - (q - p) as i64;
        if total >= 0 {
            v << total as usize
        } else if up {
            shr_ceil(v, (-total) as u32)
        } else {
            shr_floor(v, (-total) as u32)
        }
    };
    (shift(&e_lo, false), shift(&e_hi, true))
}

/// Enclosure of `ln 2`.
pub fn ln2(prec: u32) -> Interval {
    let (lo, hi) = ln2_bounds(guard(prec));
    Interval::new(lo, hi, guard(prec)).with_prec(prec)
}

/// Enclosure of `ln q` for an exact positive rational.
pub fn ln_rational(q: &BigRational, prec: u32) -> Interval {
    let (lo, hi) = ln_bounds(q, prec);
    Interval::new(lo, hi, prec)
}

/// Enclosure of `ln n` for a positive big integer.
pub fn ln_int(n: &BigInt, prec: u32) -> Interval {
    ln_rational(&BigRational::from_integer(n.clone()), prec)
}

/// Enclosure of `e^q` for an exact rational.
pub fn exp_rational(q: &BigRational, prec: u32) -> Interval {
    let (lo, hi) = exp_bounds(q, prec);
    Interval::new(lo, hi, prec)
}
