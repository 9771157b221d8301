use std::fmt;
use std::fmt::Write as _;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{
    binary_entropy, decide_nonneg, format_decimal, ln2, ln_int, parse_rational, BoundsError,
    Interval, Result, DEFAULT_MAX_PRECISION,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Every structural invariant enforced; parameters meant for certification.
    Strict,
    /// Small parameters for exhaustive experiments; monotonicity of `r` and
    /// divisibility of window lengths are not enforced.
    Toy,
}

/// The two nested families of levels: odd levels constrain the plus side,
/// even levels the minus side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Plus,
    Minus,
}

impl Family {
    pub fn of_level(k: usize) -> Family {
        if k % 2 == 1 {
            Family::Plus
        } else {
            Family::Minus
        }
    }

    pub fn other(self) -> Family {
        match self {
            Family::Plus => Family::Minus,
            Family::Minus => Family::Plus,
        }
    }

    pub fn sign(self) -> char {
        match self {
            Family::Plus => '+',
            Family::Minus => '-',
        }
    }

    pub fn parse(s: &str) -> Option<Family> {
        match s {
            "+" | "plus" | "+1" => Some(Family::Plus),
            "-" | "minus" | "-1" => Some(Family::Minus),
            _ => None,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Plus => "plus",
            Family::Minus => "minus",
        })
    }
}

/// Lengths `ℓ_k` and zero-frequency thresholds `r_k`, levels numbered from 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    lengths: Vec<BigUint>,
    rates: Vec<BigRational>,
    mode: Mode,
    mirrored: bool,
}

impl Schedule {
    pub fn new(lengths: Vec<BigUint>, rates: Vec<BigRational>, mode: Mode) -> Result<Self> {
        let s = Schedule {
            lengths,
            rates,
            mode,
            mirrored: false,
        };
        s.validate()?;
        Ok(s)
    }

    /// Toy schedule from small integers.
    pub fn toy(levels: &[(u64, BigRational)]) -> Result<Self> {
        Self::new(
            levels.iter().map(|(l, _)| BigUint::from(*l)).collect(),
            levels.iter().map(|(_, r)| r.clone()).collect(),
            Mode::Toy,
        )
    }

    /// `ℓ_1 = 4`, `r_1 = 1/2`.
    pub fn seed() -> Self {
        Self::new(
            vec![BigUint::from(4u32)],
            vec![BigRational::new(BigInt::one(), BigInt::from(2))],
            Mode::Strict,
        )
        .expect("seed is valid")
    }

    /// Applies every level's constraint to both families (toy mode only).
    pub fn mirrored(mut self) -> Result<Self> {
        if self.mode == Mode::Strict {
            return Err(BoundsError::Schedule("mirrored schedules are toy-only".into()));
        }
        self.mirrored = true;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        let n = self.lengths.len();
        if n == 0 || n != self.rates.len() {
            return Err(BoundsError::Schedule(
                "need the same nonzero number of lengths and rates".into(),
            ));
        }
        for k in 0..n {
            if self.lengths[k].is_zero() {
                return Err(BoundsError::Schedule(format!("l_{} must be positive", k + 1)));
            }
            let r = &self.rates[k];
            if !r.is_positive() || *r > BigRational::one() {
                return Err(BoundsError::Schedule(format!("r_{} = {r} is outside (0, 1]", k + 1)));
            }
            if k > 0 && self.lengths[k] <= self.lengths[k - 1] {
                return Err(BoundsError::Schedule(format!(
                    "lengths must increase: l_{} <= l_{}",
                    k + 1,
                    k
                )));
            }
            if self.mode == Mode::Strict && k > 0 {
                if self.rates[k] >= self.rates[k - 1] {
                    return Err(BoundsError::Schedule(format!(
                        "rates must decrease: r_{} >= r_{}",
                        k + 1,
                        k
                    )));
                }
                if self.divisibility(k + 1).is_none() {
                    return Err(BoundsError::Schedule(format!(
                        "2l_{}-1 is not a multiple of 2l_{}-1",
                        k + 1,
                        k
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn is_mirrored(&self) -> bool {
        self.mirrored
    }

    pub fn levels(&self) -> usize {
        self.lengths.len()
    }

    fn idx(&self, k: usize) -> Result<usize> {
        if k == 0 || k > self.levels() {
            Err(BoundsError::Schedule(format!(
                "level {k} not present (schedule has {} levels)",
                self.levels()
            )))
        } else {
            Ok(k - 1)
        }
    }

    pub fn length(&self, k: usize) -> Result<&BigUint> {
        Ok(&self.lengths[self.idx(k)?])
    }

    pub fn rate(&self, k: usize) -> Result<&BigRational> {
        Ok(&self.rates[self.idx(k)?])
    }

    /// Window size `2ℓ_k − 1`.
    pub fn window(&self, k: usize) -> Result<BigUint> {
        Ok(self.length(k)? * 2u32 - 1u32)
    }

    /// Window size as a machine integer, for exhaustive work.
    pub fn window_usize(&self, k: usize) -> Result<usize> {
        self.window(k)?
            .to_usize()
            .ok_or_else(|| BoundsError::TooLarge(format!("window of level {k} does not fit in memory")))
    }

    /// `m_k = (2ℓ_k − 1)/(2ℓ_{k−1} − 1)` when it is an integer.
    pub fn divisibility(&self, k: usize) -> Option<BigUint> {
        if k < 2 {
            return None;
        }
        let big = self.window(k).ok()?;
        let small = self.window(k - 1).ok()?;
        let (q, r) = big.div_rem(&small);
        r.is_zero().then_some(q)
    }

    /// `m_k`, or a schedule error naming the non-integral ratio.
    pub fn ratio(&self, k: usize) -> Result<BigUint> {
        self.idx(k)?;
        if k < 2 {
            return Err(BoundsError::Schedule("m_k needs a previous level".into()));
        }
        self.divisibility(k).ok_or_else(|| {
            BoundsError::Schedule(format!(
                "m_{k} = {}/{} is not an integer",
                self.window(k).unwrap_or_default(),
                self.window(k - 1).unwrap_or_default()
            ))
        })
    }

    /// Levels whose constraint applies to `family`, in increasing order, up
    /// to and including `k`.
    pub fn family_levels(&self, family: Family, k: usize) -> Vec<usize> {
        (1..=k.min(self.levels()))
            .filter(|&j| self.mirrored || Family::of_level(j) == family)
            .collect()
    }

    pub fn push(&mut self, length: BigUint, rate: BigRational) -> Result<()> {
        self.lengths.push(length);
        self.rates.push(rate);
        if let Err(e) = self.validate() {
            self.lengths.pop();
            self.rates.pop();
            return Err(e);
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "mode {}",
            match self.mode {
                Mode::Strict => "strict",
                Mode::Toy => "toy",
            }
        );
        if self.mirrored {
            s.push_str("mirrored\n");
        }
        for k in 0..self.levels() {
            let _ = writeln!(
                s,
                "level {} l={} r={}/{}",
                k + 1,
                self.lengths[k],
                self.rates[k].numer(),
                self.rates[k].denom()
            );
        }
        s
    }
}

/// Parses the line-oriented schedule format. `mode` defaults to `strict`.
pub fn parse_schedule(text: &str) -> Result<Schedule> {
    let err = |line: usize, msg: String| BoundsError::Parse { line, msg };
    let mut mode = Mode::Strict;
    let mut mirrored = false;
    let mut levels: Vec<(usize, BigUint, BigRational)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut tok = body.split_whitespace();
        match tok.next() {
            Some("mode") => {
                mode = match tok.next() {
                    Some("strict") => Mode::Strict,
                    Some("toy") => Mode::Toy,
                    other => return Err(err(line, format!("unknown mode {other:?}"))),
                }
            }
            Some("mirrored") => mirrored = true,
            Some("level") => {
                let k: usize = tok
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| err(line, "expected level number".into()))?;
                let mut l = None;
                let mut r = None;
                for t in tok {
                    if let Some(v) = t.strip_prefix("l=") {
                        l = Some(v.parse::<BigUint>().map_err(|_| err(line, format!("bad length `{v}`")))?);
                    } else if let Some(v) = t.strip_prefix("r=") {
                        r = Some(parse_rational(v).ok_or_else(|| err(line, format!("bad rate `{v}`")))?);
                    } else {
                        return Err(err(line, format!("unexpected `{t}`")));
                    }
                }
                let l = l.ok_or_else(|| err(line, "missing l=".into()))?;
                let r = r.ok_or_else(|| err(line, "missing r=".into()))?;
                if k != levels.len() + 1 {
                    return Err(err(line, format!("expected level {}, found {k}", levels.len() + 1)));
                }
                levels.push((k, l, r));
            }
            Some(other) => return Err(err(line, format!("unknown directive `{other}`"))),
            None => {}
        }
    }
    let s = Schedule::new(
        levels.iter().map(|(_, l, _)| l.clone()).collect(),
        levels.iter().map(|(_, _, r)| r.clone()).collect(),
        mode,
    )?;
    if mirrored {
        s.mirrored()
    } else {
        Ok(s)
    }
}

/// A condition's outcome and the signed slack behind it.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub holds: bool,
    pub margin: Margin,
}

#[derive(Debug, Clone)]
pub enum Margin {
    Exact(BigRational),
    Certified(Interval),
}

impl fmt::Display for Margin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Margin::Exact(q) if q.is_integer() && q.numer().bits() > 64 => {
                let sign = if q.is_negative() { "-" } else { "" };
                write!(f, "{sign}~2^{}", q.numer().bits() - 1)
            }
            Margin::Exact(q) if q.is_integer() => write!(f, "{}", q.numer()),
            Margin::Exact(q) => write!(f, "{}/{}", q.numer(), q.denom()),
            Margin::Certified(i) => f.write_str(&format_decimal(i)),
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} margin={}", self.name, if self.holds { "holds" } else { "fails" }, self.margin)
    }
}

#[derive(Debug, Clone)]
pub struct ConditionReport {
    pub k: usize,
    /// (S1) at level k.
    pub s1: Check,
    /// (S2)–(S4) between levels k and k+1; absent when k+1 is not in the schedule.
    pub s2: Option<Check>,
    pub s3: Option<Check>,
    pub s4: Option<Check>,
}

impl ConditionReport {
    pub fn all_hold(&self) -> bool {
        self.s1.holds
            && [&self.s2, &self.s3, &self.s4]
                .iter()
                .all(|c| c.as_ref().is_none_or(|c| c.holds))
    }

    pub fn checks(&self) -> Vec<&Check> {
        let mut v = vec![&self.s1];
        v.extend(self.s2.iter());
        v.extend(self.s3.iter());
        v.extend(self.s4.iter());
        v
    }
}

fn int(n: &BigUint) -> BigInt {
    BigInt::from(n.clone())
}

fn s1_margin(window: &BigUint, r: &BigRational) -> BigRational {
    BigRational::from_integer(int(window)) * r - BigRational::one()
}

/// (S2) slack: `r_k ln2 / 2 − 10 H(r_{k+1})`.
fn s2_value(r_k: &BigRational, r_next: &BigRational, p: u32) -> Interval {
    let q = p + 8;
    let left = ln2(q).mul_rational(&(r_k / BigRational::from_integer(BigInt::from(2))));
    let h = binary_entropy(r_next, q).expect("rate within [0, 1]");
    left.sub(&h.mul_int(&BigInt::from(10))).with_prec(p)
}

/// (S3) slack: `1/(4ℓ_k − 2) − 10 (r_{k+1} + 2 ln(W)/W²)` with `W = 2ℓ_{k+1} − 1`.
fn s3_value(l_k: &BigUint, r_next: &BigRational, w_next: &BigUint, p: u32) -> Interval {
    let q = p + 8;
    let left = BigRational::new(BigInt::one(), int(l_k) * 4 - 2);
    let w = int(w_next);
    let log_term = ln_int(&w, q).mul_rational(&BigRational::new(BigInt::from(2), &w * &w));
    Interval::from_rational(&left, q)
        .sub(&Interval::from_rational(r_next, q).add(&log_term).mul_int(&BigInt::from(10)))
        .with_prec(p)
}

/// Largest bit length of `ℓ` tolerated when materialising `2^{4ℓ}`.
const MAX_EXPONENT_BITS: u64 = 1 << 22;

fn pow2_4l(l: &BigUint) -> Result<BigUint> {
    let e = l
        .to_u64()
        .filter(|&v| v.saturating_mul(4) <= MAX_EXPONENT_BITS)
        .ok_or_else(|| {
            BoundsError::TooLarge(format!("2^(4l) with l of {} bits exceeds the exponent cap", l.bits()))
        })?;
    Ok(BigUint::one() << (4 * e) as usize)
}

/// (S4) compared on bit lengths when the power itself is too large to build.
fn s4_check(l_k: &BigUint, l_next: &BigUint) -> Check {
    match pow2_4l(l_k) {
        Ok(p) => {
            let m = int(l_next) - int(&p);
            Check {
                name: "S4",
                holds: !m.is_negative(),
                margin: Margin::Exact(BigRational::from_integer(m)),
            }
        }
        Err(_) => {
            // ℓ_{k+1} ≥ 2^{4ℓ_k} iff ⌊log₂ ℓ_{k+1}⌋ = bits − 1 ≥ 4ℓ_k.
            let bits = BigUint::from(l_next.bits());
            let need = l_k * 4u32;
            let holds = bits > need;
            let m = int(&bits) - int(&need) - BigInt::one();
            Check {
                name: "S4",
                holds,
                margin: Margin::Exact(BigRational::from_integer(m)),
            }
        }
    }
}

pub fn check_conditions(s: &Schedule, k: usize, max_prec: u32) -> Result<ConditionReport> {
    let l_k = s.length(k)?;
    let r_k = s.rate(k)?;
    let m1 = s1_margin(&s.window(k)?, r_k);
    let s1 = Check {
        name: "S1",
        holds: !m1.is_negative(),
        margin: Margin::Exact(m1),
    };
    if k >= s.levels() {
        return Ok(ConditionReport {
            k,
            s1,
            s2: None,
            s3: None,
            s4: None,
        });
    }
    let l_next = s.length(k + 1)?;
    let r_next = s.rate(k + 1)?;
    let w_next = s.window(k + 1)?;
    let (h2, v2) = decide_nonneg("S2", max_prec, |p| s2_value(r_k, r_next, p))?;
    let (h3, v3) = decide_nonneg("S3", max_prec, |p| s3_value(l_k, r_next, &w_next, p))?;
    Ok(ConditionReport {
        k,
        s1,
        s2: Some(Check {
            name: "S2",
            holds: h2,
            margin: Margin::Certified(v2),
        }),
        s3: Some(Check {
            name: "S3",
            holds: h3,
            margin: Margin::Certified(v3),
        }),
        s4: Some(s4_check(l_k, l_next)),
    })
}

#[derive(Debug, Clone, Copy)]
pub struct ExtendOptions {
    pub max_prec: u32,
    /// Largest exponent `m` tried for `r_{k+1} = 2^{−m}`.
    pub max_exponent: u64,
}

impl Default for ExtendOptions {
    fn default() -> Self {
        ExtendOptions {
            max_prec: DEFAULT_MAX_PRECISION,
            max_exponent: 1 << 16,
        }
    }
}

fn dyadic(m: u64) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::one() << m as usize)
}

/// Appends the next level: the least `ℓ_{k+1} ≥ 2^{4ℓ_k}` with
/// `2ℓ_{k+1} − 1 ≡ 0 (mod 2ℓ_k − 1)`, and the largest dyadic `r_{k+1} = 2^{−m}`
/// below `r_k` meeting (S2) and (S3).
pub fn extend_schedule(s: &Schedule, opts: ExtendOptions) -> Result<Schedule> {
    if s.mode() != Mode::Strict {
        return Err(BoundsError::Schedule("extension requires a strict schedule".into()));
    }
    let k = s.levels();
    let l_k = s.length(k)?.clone();
    let r_k = s.rate(k)?.clone();
    let lower = pow2_4l(&l_k)?;
    let modulus = &l_k * 2u32 - 1u32;
    // ℓ ≡ ℓ_k (mod 2ℓ_k − 1) is exactly 2ℓ − 1 ≡ 0.
    let shift = (int(&l_k) - int(&lower)).mod_floor(&int(&modulus));
    let l_next = &lower + shift.to_biguint().expect("mod_floor is nonnegative");
    let w_next = &l_next * 2u32 - 1u32;

    let passes = |m: u64| -> Result<bool> {
        let r = dyadic(m);
        let (a, _) = decide_nonneg("S2", opts.max_prec, |p| s2_value(&r_k, &r, p))?;
        if !a {
            return Ok(false);
        }
        let (b, _) = decide_nonneg("S3", opts.max_prec, |p| s3_value(&l_k, &r, &w_next, p))?;
        Ok(b)
    };

    // First exponent giving 2^{−m} < r_k.
    let mut m0 = 1u64;
    while dyadic(m0) >= r_k {
        m0 += 1;
        if m0 > opts.max_exponent {
            return Err(BoundsError::Infeasible("no dyadic rate below r_k".into()));
        }
    }
    // Exponential then binary search for the least passing m (both
    // conditions are monotone in m).
    let mut hi = m0;
    let mut step = 1u64;
    while !passes(hi)? {
        hi = hi.saturating_add(step);
        step *= 2;
        if hi > opts.max_exponent {
            return Err(BoundsError::Infeasible(format!(
                "(S2)/(S3) unmet for every r = 2^-m with m <= {}",
                opts.max_exponent
            )));
        }
    }
    let mut lo = hi.saturating_sub(step / 2).max(m0);
    if lo < hi && passes(lo)? {
        hi = lo;
    }
    while lo + 1 < hi {
        let mid = lo + (hi - lo) / 2;
        if passes(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let r_next = dyadic(hi);
    if s1_margin(&w_next, &r_next).is_negative() {
        return Err(BoundsError::Infeasible(format!(
            "(S1) fails at level {}: (2l-1) r = {} < 1 with r = 2^-{hi}",
            k + 1,
            BigRational::from_integer(int(&w_next)) * &r_next
        )));
    }
    let mut out = s.clone();
    out.push(l_next, r_next)?;
    Ok(out)
}
