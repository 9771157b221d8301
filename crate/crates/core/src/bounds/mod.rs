//! Certified arithmetic for the schedule conditions: binary entropy, partial
//! sums of binomial coefficients and their exponential sandwich, and the
//! parameter schedule `(ℓ_k, r_k)` itself.

pub mod interval;
mod schedule;

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub use interval::{exp_rational, ln2, ln_int, ln_rational, Interval};
pub use schedule::{
    check_conditions, extend_schedule, parse_schedule, ConditionReport, ExtendOptions, Family,
    Mode, Schedule,
};

/// Working precision (bits) used when nothing else is configured.
pub const DEFAULT_PRECISION: u32 = 64;
/// Precision ceiling for certified comparisons.
pub const DEFAULT_MAX_PRECISION: u32 = 4096;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("schedule error: {0}")]
    Schedule(String),
    #[error("undecided condition {condition}: interval still straddles the threshold at {prec} bits")]
    Undecided { condition: String, prec: u32 },
    #[error("infeasible schedule: {0}")]
    Infeasible(String),
    #[error("schedule too large: {0}")]
    TooLarge(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

impl BoundsError {
    pub fn is_resource(&self) -> bool {
        matches!(self, BoundsError::Undecided { .. } | BoundsError::TooLarge(_))
    }
}

type Result<T> = std::result::Result<T, BoundsError>;

pub fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `p/q`, an integer, or a decimal such as `0.25`.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    if let Some((i, f)) = s.split_once('.') {
        let neg = i.starts_with('-');
        let digits = format!("{}{}", i.trim_start_matches('-'), f);
        let n: BigInt = digits.parse().ok()?;
        let q = BigRational::new(n, BigInt::from(10u32).pow(f.len() as u32));
        return Some(if neg { -q } else { q });
    }
    s.parse::<BigInt>().ok().map(BigRational::from_integer)
}

/// Repeats `eval` at doubling precision until the sign of the result is
/// decided. Returns whether the value is `≥ 0`, with the deciding enclosure.
pub fn decide_nonneg(
    condition: &str,
    max_prec: u32,
    eval: impl Fn(u32) -> Interval,
) -> Result<(bool, Interval)> {
    let mut p = DEFAULT_PRECISION.min(max_prec.max(16));
    loop {
        let v = eval(p);
        if !v.lo_raw().is_negative() {
            return Ok((true, v));
        }
        if v.hi_raw().is_negative() {
            return Ok((false, v));
        }
        if p >= max_prec {
            return Err(BoundsError::Undecided {
                condition: condition.to_string(),
                prec: p,
            });
        }
        p = (p * 2).min(max_prec);
    }
}

fn check_unit(t: &BigRational) -> Result<()> {
    if t.is_negative() || *t > BigRational::one() {
        return Err(BoundsError::Domain(format!("{t} is outside [0, 1]")));
    }
    Ok(())
}

/// `−t·ln t` with `0·ln 0 = 0`.
fn neg_t_ln_t(t: &BigRational, prec: u32) -> Interval {
    if t.is_zero() || t.is_one() {
        return Interval::zero(prec);
    }
    ln_rational(t, prec).mul_rational(t).neg()
}

/// Certified enclosure of `H(t) = −t ln t − (1−t) ln(1−t)`.
pub fn binary_entropy(t: &BigRational, prec: u32) -> Result<Interval> {
    check_unit(t)?;
    let q = prec + 8;
    let one_minus = BigRational::one() - t;
    Ok(neg_t_ln_t(t, q).add(&neg_t_ln_t(&one_minus, q)).with_prec(prec))
}

/// `Σ_{r=0}^{m} C(n, r)`, with `m` clamped to `n`.
pub fn binom_sum_upto(n: u64, m: u64) -> BigUint {
    let m = m.min(n);
    let mut c = BigUint::one();
    let mut sum = BigUint::one();
    for r in 0..m {
        c = c * BigUint::from(n - r) / BigUint::from(r + 1);
        sum += &c;
    }
    sum
}

/// `Σ_{r=0}^{⌊αn⌋} C(n, r)` exactly.
pub fn binom_partial_sum(n: u64, alpha: &BigRational) -> Result<BigUint> {
    check_unit(alpha)?;
    let m = (alpha * BigRational::from_integer(BigInt::from(n)))
        .floor()
        .to_integer()
        .to_u64()
        .unwrap_or(0);
    Ok(binom_sum_upto(n, m))
}

/// The exponential sandwich `2^⌊αn⌋ ≤ Σ_{r ≤ αn} C(n,r) ≤ e^{nH(α)}`.
#[derive(Debug, Clone)]
pub struct BinomBounds {
    pub n: u64,
    pub alpha: BigRational,
    pub lower: BigUint,
    pub sum: BigUint,
    /// Enclosure of `e^{nH(α)}`.
    pub upper: Interval,
    pub holds: bool,
}

impl fmt::Display for BinomBounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "lower={} sum={} upper={} holds={}",
            self.lower,
            self.sum,
            format_decimal(&self.upper),
            self.holds
        )
    }
}

/// Short decimal for an enclosure: the common prefix of both ends when they
/// agree to the displayed digits, the full interval otherwise.
pub fn format_decimal(i: &Interval) -> String {
    let lo = i.lo_f64();
    let hi = i.hi_f64();
    let a = format!("{lo:.6}");
    let b = format!("{hi:.6}");
    if a == b {
        let t = a.trim_end_matches('0').trim_end_matches('.').to_string();
        if t.is_empty() || t == "-" {
            "0".into()
        } else {
            t
        }
    } else {
        format!("[{a}, {b}]")
    }
}

pub fn binom_bounds_check(n: u64, alpha: &BigRational, max_prec: u32) -> Result<BinomBounds> {
    if !alpha.is_positive() || *alpha > rational(1, 2) {
        return Err(BoundsError::Domain(format!("alpha = {alpha} is outside (0, 1/2]")));
    }
    if n == 0 {
        return Err(BoundsError::Domain("n must be at least 1".into()));
    }
    let sum = binom_partial_sum(n, alpha)?;
    let floor = (alpha * BigRational::from_integer(BigInt::from(n)))
        .floor()
        .to_integer();
    let lower = BigUint::one() << floor.to_usize().unwrap_or(0);
    let nb = BigRational::from_integer(BigInt::from(n));
    let upper_at = |p: u32| -> Interval {
        let q = p + 16;
        let h = binary_entropy(alpha, q).expect("alpha already checked");
        h.mul_rational(&nb).exp().with_prec(p)
    };
    let sum_q = BigRational::from_integer(BigInt::from(sum.clone()));
    let (upper_ok, _) = decide_nonneg("binomial upper bound", max_prec, |p| {
        upper_at(p).sub(&Interval::from_rational(&sum_q, p))
    })?;
    let upper = upper_at(max_prec.min(128));
    Ok(BinomBounds {
        n,
        alpha: alpha.clone(),
        holds: lower <= sum && upper_ok,
        lower,
        sum,
        upper,
    })
}
