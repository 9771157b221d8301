use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::{admissible, family_symbol, max_zeros, Family, Result, SubshiftError, ZERO};
use crate::bounds::{
    binary_entropy, binom_sum_upto, decide_nonneg, exp_rational, format_decimal, ln_int, BoundsError,
    Interval, Mode, Schedule,
};
use crate::exec;

/// Default cap on `states × zero counts` in the histogram automaton.
pub const DEFAULT_DP_CAP: u128 = 1 << 24;

/// Number of admissible binary strings by zero count: `counts[z]` strings of
/// the given length carry exactly `z` zeros.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZeroHistogram {
    pub length: BigUint,
    pub counts: Vec<BigUint>,
}

impl ZeroHistogram {
    pub fn total(&self) -> BigUint {
        self.counts.iter().sum()
    }
}

/// Histogram of binary strings of length `len` in which every window of
/// length `w` carries at most `mz` zeros, for each `(w, mz)` in `constraints`.
pub fn zero_histogram(
    len: &BigUint,
    constraints: &[(BigUint, BigUint)],
    cap: u128,
) -> Result<ZeroHistogram> {
    // Whole-string constraints only cap the total; shorter windows need the
    // automaton.
    let mut zcap: Option<BigUint> = None;
    let mut subs: Vec<(usize, usize)> = Vec::new();
    for (w, mz) in constraints {
        if w > len {
            continue;
        }
        if w == len {
            zcap = Some(zcap.map_or(mz.clone(), |c| c.min(mz.clone())));
        } else {
            let w = w.to_usize().ok_or(SubshiftError::CountingOverflow {
                states: u128::MAX,
                cap,
            })?;
            subs.push((w, mz.to_usize().unwrap_or(usize::MAX).min(w)));
        }
    }
    let zcap = zcap.map_or(len.clone(), |c| c.min(len.clone()));
    if subs.is_empty() {
        let n = len.to_u64().ok_or_else(|| too_big(cap))?;
        let z = zcap.to_u64().ok_or_else(|| too_big(cap))?;
        if (z as u128) + 1 > cap {
            return Err(SubshiftError::CountingOverflow {
                states: z as u128 + 1,
                cap,
            });
        }
        let mut counts = Vec::with_capacity(z as usize + 1);
        let mut c = BigUint::one();
        counts.push(c.clone());
        for r in 0..z {
            c = c * BigUint::from(n - r) / BigUint::from(r + 1);
            counts.push(c.clone());
        }
        return Ok(ZeroHistogram {
            length: len.clone(),
            counts,
        });
    }
    let n = len.to_usize().filter(|&n| n <= 127).ok_or_else(|| too_big(cap))?;
    let zcap = zcap.to_usize().expect("bounded by len");
    let counts = dp_histogram(n, &subs, zcap, cap)?;
    Ok(ZeroHistogram {
        length: len.clone(),
        counts: counts.into_iter().map(BigUint::from).collect(),
    })
}

fn too_big(cap: u128) -> SubshiftError {
    SubshiftError::CountingOverflow {
        states: u128::MAX,
        cap,
    }
}

fn dp_histogram(len: usize, subs: &[(usize, usize)], zcap: usize, cap: u128) -> Result<Vec<u128>> {
    let width = subs.iter().map(|&(w, _)| w).max().unwrap_or(1);
    let sb = width - 1;
    let states: u128 = 1u128.checked_shl(sb as u32).unwrap_or(u128::MAX);
    let cells = states.saturating_mul(zcap as u128 + 1);
    if sb > 40 || cells > cap {
        return Err(SubshiftError::CountingOverflow { states: cells, cap });
    }
    let states = states as usize;
    let zw = zcap + 1;
    let ok_full = |full: u64| {
        subs.iter()
            .all(|&(w, mz)| ((full & ((1u64 << w) - 1)).count_ones() as usize) <= mz)
    };
    // Prefix of sb symbols; bit (sb − 1 − p) holds position p, 1 = zero.
    let mut dp: Vec<u128> = vec![0; states * zw];
    for mask in 0..states as u64 {
        let fine = subs.iter().all(|&(w, mz)| {
            w > sb
                || (0..=(sb - w)).all(|start| {
                    let shifted = mask >> (sb - start - w);
                    ((shifted & ((1u64 << w) - 1)).count_ones() as usize) <= mz
                })
        });
        let z = mask.count_ones() as usize;
        if fine && z <= zcap {
            dp[mask as usize * zw + z] = 1;
        }
    }
    for _ in sb..len {
        if sb == 0 {
            // No state bits: each site is checked on its own.
            let mut row = vec![0u128; zw];
            for z in 0..zw {
                let v = dp[z];
                if ok_full(0) {
                    row[z] += v;
                }
                if z + 1 < zw && ok_full(1) {
                    row[z + 1] += v;
                }
            }
            dp = row;
            continue;
        }
        // Gather: target t has the new bit at position 0 and two predecessors
        // differing in the bit that just left the window.
        let next: Vec<Vec<u128>> = exec::map_range(0..states, |t| {
            let t = t as u64;
            let b = (t & 1) as usize;
            let mut row = vec![0u128; zw];
            for top in 0..2u64 {
                let prev = (t >> 1) | (top << (sb - 1));
                if !ok_full((prev << 1) | b as u64) {
                    continue;
                }
                let base = prev as usize * zw;
                for z in 0..zw - b {
                    row[z + b] += dp[base + z];
                }
            }
            row
        });
        for (t, row) in next.into_iter().enumerate() {
            dp[t * zw..(t + 1) * zw].copy_from_slice(&row);
        }
    }
    let mut out = vec![0u128; zw];
    for s in 0..states {
        for z in 0..zw {
            out[z] += dp[s * zw + z];
        }
    }
    Ok(out)
}

fn family_constraints(s: &Schedule, family: Family, k: usize) -> Result<Vec<(BigUint, BigUint)>> {
    let mut out = Vec::new();
    for j in s.family_levels(family, k) {
        let w = s.window(j)?;
        match max_zeros(&w, s.rate(j)?) {
            Some(mz) => out.push((w, mz)),
            None => out.push((w, BigUint::zero())),
        }
    }
    Ok(out)
}

/// Histogram of the admissible words of length `2ℓ_k − 1` for `family`.
pub fn family_histogram(k: usize, family: Family, s: &Schedule, cap: u128) -> Result<ZeroHistogram> {
    let len = s.window(k)?;
    zero_histogram(&len, &family_constraints(s, family, k)?, cap)
}

/// `|P|`: admissible words of length `2ℓ_k − 1` over the family alphabet.
pub fn count_p(k: usize, family: Family, s: &Schedule, cap: u128) -> Result<BigUint> {
    Ok(family_histogram(k, family, s, cap)?.total())
}

/// `|B|`: admissible words other than the zero-free one.
pub fn b_set_count(k: usize, family: Family, s: &Schedule, cap: u128) -> Result<BigUint> {
    Ok(count_p(k, family, s, cap)? - 1u32)
}

/// `|B|^{⌈m/2⌉}`: slots alternate free B-words (odd slots) and the fixed
/// zero-free word (even slots).
pub fn concat_count(b: &BigUint, m: &BigUint) -> Result<BigUint> {
    let slots = odd_slots(m)?;
    Ok(b.pow(slots))
}

fn odd_slots(m: &BigUint) -> Result<u32> {
    m.to_u32()
        .map(|m| m.div_ceil(2))
        .ok_or_else(|| SubshiftError::Domain(format!("m = {m} is too large to exponentiate")))
}

/// `|C|` at level `k` built from level `k − 1` words of `family`.
pub fn c_count(k: usize, family: Family, s: &Schedule, cap: u128) -> Result<BigUint> {
    let m = s.ratio(k)?;
    concat_count(&b_set_count(k - 1, family, s, cap)?, &m)
}

/// Builds every concatenation counted by [`c_count`] and checks each against
/// the level-`k` constraints of `family`. Returns (built, admissible).
pub fn explicit_concat_count(
    k: usize,
    family: Family,
    s: &Schedule,
    cap: u128,
) -> Result<(u64, u64)> {
    let m = s.ratio(k)?.to_usize().ok_or_else(|| too_big(cap))?;
    let len = s.window_usize(k - 1)?;
    if len > 24 {
        return Err(too_big(cap));
    }
    let sym = family_symbol(family);
    let mut b_words: Vec<Vec<usize>> = Vec::new();
    for mask in 0..(1u64 << len) {
        let w: Vec<usize> = (0..len)
            .map(|i| if mask >> (len - 1 - i) & 1 == 1 { ZERO } else { sym })
            .collect();
        if mask != 0 && admissible(&w, family, k - 1, s)? {
            b_words.push(w);
        }
    }
    let slots = m.div_ceil(2) as u32;
    let total = (b_words.len() as u128).checked_pow(slots).filter(|&t| t <= cap).ok_or(
        SubshiftError::CountingOverflow {
            states: (b_words.len() as u128).saturating_pow(slots),
            cap,
        },
    )? as u64;
    let ones = vec![sym; len];
    let results = exec::map_range(0..total as usize, |idx| {
        let mut idx = idx;
        let mut w = Vec::with_capacity(len * m);
        for slot in 0..m {
            if slot % 2 == 0 {
                let b = &b_words[idx % b_words.len()];
                idx /= b_words.len();
                w.extend_from_slice(b);
            } else {
                w.extend_from_slice(&ones);
            }
        }
        admissible(&w, family, k, s)
    });
    let mut good = 0u64;
    for r in results {
        if r? {
            good += 1;
        }
    }
    Ok((total, good))
}

/// Base of the zero weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Base {
    Int(u32),
    E,
}

impl Base {
    pub fn parse(s: &str) -> Option<Base> {
        match s {
            "e" => Some(Base::E),
            _ => s.parse::<u32>().ok().filter(|&b| b >= 1).map(Base::Int),
        }
    }
}

impl fmt::Display for Base {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Base::Int(b) => write!(f, "{b}"),
            Base::E => f.write_str("e"),
        }
    }
}

/// Polynomial with nonnegative integer coefficients in `x = b^L`.
type Poly = Vec<BigUint>;

fn trim(mut p: Poly) -> Poly {
    while p.len() > 1 && p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    p
}

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = vec![BigUint::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(out)
}

fn poly_pow(a: &Poly, mut e: u32) -> Poly {
    let mut base = a.clone();
    let mut acc: Poly = vec![BigUint::one()];
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_mul(&acc, &base);
        }
        e >>= 1;
        if e > 0 {
            base = poly_mul(&base, &base);
        }
    }
    acc
}

fn poly_scale(a: &Poly, c: &BigUint) -> Poly {
    trim(a.iter().map(|x| x * c).collect())
}

fn eval_int(p: &Poly, x: &BigUint) -> BigUint {
    let mut acc = BigUint::zero();
    for c in p.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

/// Enclosure of `Σ p_z e^{zL}`.
fn eval_e(p: &[BigInt], l: &BigUint, prec: u32) -> Interval {
    let mut acc = Interval::zero(prec);
    for (z, c) in p.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let exponent = BigRational::from_integer(BigInt::from(l * BigUint::from(z)));
        acc = acc.add(&exp_rational(&exponent, prec).mul_int(c));
    }
    acc
}

/// Certified comparison of two weight polynomials at `x = b^L`.
fn compare_at(p: &Poly, q: &Poly, base: Base, l: &BigUint, max_prec: u32) -> Result<Ordering> {
    match base {
        Base::Int(b) => {
            let x = BigUint::from(b).pow(l.to_u32().ok_or_else(|| too_big(0))?);
            Ok(eval_int(p, &x).cmp(&eval_int(q, &x)))
        }
        Base::E => {
            let (p, q) = (trim(p.clone()), trim(q.clone()));
            if p == q {
                return Ok(Ordering::Equal);
            }
            // e^L is transcendental, so distinct polynomials give distinct
            // values and the certified sign search terminates.
            let n = p.len().max(q.len());
            let diff: Vec<BigInt> = (0..n)
                .map(|i| {
                    BigInt::from(p.get(i).cloned().unwrap_or_default())
                        - BigInt::from(q.get(i).cloned().unwrap_or_default())
                })
                .collect();
            let (nonneg, _) = decide_nonneg("weighted comparison", max_prec, |pr| eval_e(&diff, l, pr))
                .map_err(SubshiftError::from)?;
            Ok(if nonneg { Ordering::Greater } else { Ordering::Less })
        }
    }
}

fn log_of(p: &Poly, base: Base, l: &BigUint, prec: u32) -> Result<Interval> {
    match base {
        Base::Int(b) => {
            let x = BigUint::from(b).pow(l.to_u32().ok_or_else(|| too_big(0))?);
            let v = eval_int(p, &x);
            if v.is_zero() {
                return Err(SubshiftError::Domain("logarithm of an empty weighted set".into()));
            }
            Ok(ln_int(&BigInt::from(v), prec))
        }
        Base::E => {
            let signed: Vec<BigInt> = p.iter().map(|c| BigInt::from(c.clone())).collect();
            eval_e(&signed, l, prec + 16)
                .ln()
                .map(|i| i.with_prec(prec))
                .ok_or_else(|| SubshiftError::Domain("logarithm of an empty weighted set".into()))
        }
    }
}

/// `ln (c · Σ_{ω ∈ P} b^{f_0(ω) L²})` with `L = 2ℓ_k − 1`.
#[derive(Debug, Clone)]
pub struct WeightedCount {
    pub log_value: Interval,
    pub base: Base,
    pub c: BigUint,
    poly: Poly,
    pub length: BigUint,
}

impl WeightedCount {
    /// Coefficients of the weight polynomial in `b^L`, including the factor `c`.
    pub fn coefficients(&self) -> &[BigUint] {
        &self.poly
    }
}

pub fn weighted_g_count(
    k: usize,
    family: Family,
    s: &Schedule,
    base: Base,
    c: &BigUint,
    cap: u128,
    prec: u32,
) -> Result<WeightedCount> {
    if c.is_zero() {
        return Err(SubshiftError::Domain("c must be at least 1".into()));
    }
    let h = family_histogram(k, family, s, cap)?;
    let poly = poly_scale(&h.counts, c);
    let log_value = log_of(&poly, base, &h.length, prec)?;
    Ok(WeightedCount {
        log_value,
        base,
        c: c.clone(),
        poly,
        length: h.length,
    })
}

/// Exact order of two weighted counts taken at the same length and base.
pub fn compare_weighted(a: &WeightedCount, b: &WeightedCount, max_prec: u32) -> Result<Ordering> {
    if a.base != b.base || a.length != b.length {
        return Err(SubshiftError::Domain("weighted counts at different lengths or bases".into()));
    }
    compare_at(&a.poly, &b.poly, a.base, &a.length, max_prec)
}

/// One certified inequality `lhs ≤ rhs`, with `margin = rhs − lhs`.
#[derive(Debug, Clone)]
pub struct Step {
    pub name: &'static str,
    pub holds: bool,
    pub margin: Interval,
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} margin={}",
            self.name,
            if self.holds { "holds" } else { "fails" },
            format_decimal(&self.margin)
        )
    }
}

fn step(name: &'static str, max_prec: u32, margin: impl Fn(u32) -> Interval) -> Result<Step> {
    let (holds, m) = decide_nonneg(name, max_prec, margin)?;
    Ok(Step {
        name,
        holds,
        margin: m,
    })
}

#[derive(Debug, Clone)]
pub struct Lemma51Report {
    pub k: usize,
    pub power: u32,
    /// Family constrained at level k (the side whose count is small).
    pub minority: Family,
    pub majority: Family,
    pub mode: Mode,
    pub m: BigUint,
    pub odd_slots: u32,
    /// `|P|` exactly (toy) or its binomial upper bound (strict).
    pub p_value: BigUint,
    pub b_count: BigUint,
    /// (i) `power·ln|P| ≤ power·L·H(r_k)`.
    pub bound_i: Step,
    /// (ii) `ln|C| ≥ L·r_{k−1}/2`.
    pub bound_ii: Step,
    /// (iii) `power·L·H(r_k) ≤ L·r_{k−1}/2`.
    pub bound_iii: Step,
    /// `|P|^power ≤ |C|`, decided on exact integers (toy only).
    pub direct: Option<bool>,
}

impl Lemma51Report {
    pub fn chain_holds(&self) -> bool {
        self.bound_i.holds && self.bound_ii.holds && self.bound_iii.holds
    }

    pub fn convention(&self) -> &'static str {
        if self.m.is_even() {
            "odd slots = m/2"
        } else {
            "odd slots = ceil(m/2), m odd"
        }
    }
}

fn bounds_err(e: BoundsError) -> SubshiftError {
    SubshiftError::Bounds(e)
}

pub fn verify_lemma51_chain(
    k: usize,
    s: &Schedule,
    power: u32,
    cap: u128,
    max_prec: u32,
) -> Result<Lemma51Report> {
    if k < 2 {
        return Err(SubshiftError::Domain("the chain needs k >= 2".into()));
    }
    let m = s.ratio(k).map_err(bounds_err)?;
    let slots = odd_slots(&m)?;
    let minority = Family::of_level(k);
    let majority = minority.other();
    let l = s.window(k).map_err(bounds_err)?;
    let l_int = BigInt::from(l.clone());
    let r_k = s.rate(k).map_err(bounds_err)?.clone();
    let r_prev = s.rate(k - 1).map_err(bounds_err)?.clone();

    let p_value = match s.mode() {
        Mode::Toy => count_p(k, minority, s, cap)?,
        Mode::Strict => {
            let n = l.to_u64().ok_or_else(|| too_big(cap))?;
            let top = (&r_k * BigRational::from_integer(l_int.clone()))
                .floor()
                .to_integer()
                .to_u64()
                .unwrap_or(0);
            binom_sum_upto(n, top)
        }
    };
    let b_count = b_set_count(k - 1, majority, s, cap)?;
    let pw = BigInt::from(power);
    let half_l_r = r_prev.clone() * BigRational::new(l_int.clone(), BigInt::from(2));

    let ln_p = |p: u32| ln_int(&BigInt::from(p_value.clone()), p);
    let entropy_side = |p: u32| {
        binary_entropy(&r_k, p)
            .expect("rate in (0, 1]")
            .mul_int(&(&l_int * &pw))
    };
    let bound_i = step("(i) |P|^power <= e^(power L H(r_k))", max_prec, |p| {
        entropy_side(p).sub(&ln_p(p).mul_int(&pw))
    })?;
    let ln_c = |p: u32| {
        if b_count.is_zero() {
            // ln 0: a hopeless lower bound, represented very negative.
            Interval::from_i64(-(1 << 40), p)
        } else {
            ln_int(&BigInt::from(b_count.clone()), p).mul_int(&BigInt::from(slots))
        }
    };
    let bound_ii = step("(ii) |C| >= e^(L r_(k-1) / 2)", max_prec, |p| {
        ln_c(p).sub(&Interval::from_rational(&half_l_r, p))
    })?;
    let bound_iii = step("(iii) power L H(r_k) <= L r_(k-1) / 2", max_prec, |p| {
        Interval::from_rational(&half_l_r, p).sub(&entropy_side(p))
    })?;
    let direct = match s.mode() {
        Mode::Toy => Some(p_value.pow(power) <= b_count.pow(slots)),
        Mode::Strict => None,
    };
    Ok(Lemma51Report {
        k,
        power,
        minority,
        majority,
        mode: s.mode(),
        m,
        odd_slots: slots,
        p_value,
        b_count,
        bound_i,
        bound_ii,
        bound_iii,
        direct,
    })
}

#[derive(Debug, Clone)]
pub struct Prop52Report {
    pub k: usize,
    pub power: u32,
    pub base: Base,
    pub c: BigUint,
    pub minority: Family,
    pub majority: Family,
    /// `power · ln G_minority`.
    pub lhs: Interval,
    /// `ln Σ_{ω∈C} b^{f_0(ω) L²}`.
    pub mid: Interval,
    /// `ln G_majority`.
    pub rhs: Interval,
    pub step1: Ordering,
    pub step2: Ordering,
    pub overall: Ordering,
}

impl Prop52Report {
    pub fn holds(&self) -> bool {
        self.overall != Ordering::Greater
    }

    /// Slack `rhs − lhs` in natural-log units.
    pub fn margin(&self) -> Interval {
        self.rhs.sub(&self.lhs)
    }
}

#[allow(clippy::too_many_arguments)]
pub fn verify_prop52(
    k: usize,
    s: &Schedule,
    power: u32,
    base: Base,
    c: &BigUint,
    cap: u128,
    prec: u32,
    max_prec: u32,
) -> Result<Prop52Report> {
    if k < 2 {
        return Err(SubshiftError::Domain("the comparison needs k >= 2".into()));
    }
    if c.is_zero() {
        return Err(SubshiftError::Domain("c must be at least 1".into()));
    }
    let m = s.ratio(k).map_err(bounds_err)?;
    let slots = odd_slots(&m)?;
    let minority = Family::of_level(k);
    let majority = minority.other();
    let l = s.window(k).map_err(bounds_err)?;

    let minor = weighted_g_count(k, minority, s, base, c, cap, prec)?;
    let major = weighted_g_count(k, majority, s, base, c, cap, prec)?;
    let mut b_hist = family_histogram(k - 1, majority, s, cap)?.counts;
    b_hist[0] -= 1u32;
    // Each B-word of z zeros weighs b^{zL}; fixed slots carry no zeros.
    let lhs_poly = poly_pow(&minor.poly, power);
    let mid_poly = poly_pow(&trim(b_hist), slots);
    let rhs_poly = major.poly.clone();

    let lhs = minor.log_value.mul_int(&BigInt::from(power));
    let mid = if mid_poly.iter().all(Zero::is_zero) {
        Interval::from_i64(-(1 << 40), prec)
    } else {
        log_of(&mid_poly, base, &l, prec)?
    };
    Ok(Prop52Report {
        k,
        power,
        base,
        c: c.clone(),
        minority,
        majority,
        step1: compare_at(&lhs_poly, &mid_poly, base, &l, max_prec)?,
        step2: compare_at(&mid_poly, &rhs_poly, base, &l, max_prec)?,
        overall: compare_at(&lhs_poly, &rhs_poly, base, &l, max_prec)?,
        lhs,
        mid,
        rhs: major.log_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{rational, DEFAULT_MAX_PRECISION};
    use crate::subshift::{in_fk, signed_alphabet, MINUS, PLUS};
    use crate::symbolic::Pattern;

    fn seed_toy(r: BigRational) -> Schedule {
        Schedule::toy(&[(4, r)]).unwrap()
    }

    /// Exhaustive count straight from the forbidden-set definition.
    fn brute_count(k: usize, family: Family, s: &Schedule) -> u64 {
        let len = s.window_usize(k).unwrap();
        let sym = family_symbol(family);
        let mut n = 0;
        for mask in 0..(1u64 << len) {
            let w: Vec<usize> = (0..len).map(|i| if mask >> i & 1 == 1 { ZERO } else { sym }).collect();
            if admissible(&w, family, k, s).unwrap() {
                n += 1;
            }
        }
        n
    }

    #[test]
    fn seed_counts() {
        let s = Schedule::seed();
        assert_eq!(count_p(1, Family::Plus, &s, DEFAULT_DP_CAP).unwrap(), BigUint::from(64u32));
        assert_eq!(brute_count(1, Family::Plus, &s), 64);
        assert_eq!(b_set_count(1, Family::Plus, &s, DEFAULT_DP_CAP).unwrap(), BigUint::from(63u32));
        let h = family_histogram(1, Family::Plus, &s, DEFAULT_DP_CAP).unwrap();
        assert_eq!(h.counts, [1u32, 7, 21, 35].map(BigUint::from).to_vec());
    }

    #[test]
    fn extreme_rates() {
        // f_0 ≥ r is forbidden, so r = 1 still removes the all-zero word.
        let s = seed_toy(rational(1, 1));
        assert_eq!(count_p(1, Family::Plus, &s, DEFAULT_DP_CAP).unwrap(), BigUint::from(127u32));
        assert_eq!(b_set_count(1, Family::Plus, &s, DEFAULT_DP_CAP).unwrap(), BigUint::from(126u32));
        let s = seed_toy(rational(1, 8));
        assert_eq!(count_p(1, Family::Plus, &s, DEFAULT_DP_CAP).unwrap(), BigUint::one());
        assert_eq!(b_set_count(1, Family::Plus, &s, DEFAULT_DP_CAP).unwrap(), BigUint::zero());
    }

    #[test]
    fn concatenation_counts() {
        assert_eq!(concat_count(&BigUint::from(3u32), &BigUint::from(4u32)).unwrap(), BigUint::from(9u32));
        assert_eq!(concat_count(&BigUint::zero(), &BigUint::from(5u32)).unwrap(), BigUint::zero());
        assert_eq!(
            concat_count(&BigUint::from(63u32), &BigUint::from(3u32)).unwrap(),
            BigUint::from(3969u32)
        );
    }

    #[test]
    fn non_integral_ratio_is_a_schedule_error() {
        let s = Schedule::toy(&[(4, rational(1, 2)), (8, rational(1, 2))]).unwrap();
        assert!(matches!(
            c_count(2, Family::Plus, &s, DEFAULT_DP_CAP),
            Err(SubshiftError::Bounds(BoundsError::Schedule(_)))
        ));
        assert!(matches!(
            verify_lemma51_chain(2, &s, 10, DEFAULT_DP_CAP, 512),
            Err(SubshiftError::Bounds(BoundsError::Schedule(_)))
        ));
    }

    #[test]
    fn dp_matches_definition_on_toy_schedules() {
        let schedules = [
            Schedule::toy(&[(2, rational(3, 4)), (4, rational(5, 8)), (5, rational(1, 2))]).unwrap(),
            Schedule::toy(&[(2, rational(2, 3)), (6, rational(1, 3)), (8, rational(1, 4))]).unwrap(),
            Schedule::toy(&[(3, rational(1, 2)), (5, rational(2, 3)), (8, rational(1, 2))])
                .unwrap()
                .mirrored()
                .unwrap(),
        ];
        for s in &schedules {
            for k in 1..=s.levels() {
                for f in [Family::Plus, Family::Minus] {
                    let dp = count_p(k, f, s, DEFAULT_DP_CAP).unwrap();
                    assert_eq!(dp, BigUint::from(brute_count(k, f, s)), "k={k} {f}");
                }
            }
        }
    }

    #[test]
    fn in_fk_agrees_with_literal_recursion() {
        // F_k read literally: outside the sub-alphabet, too many zeros, or a
        // factor of an earlier same-family length lying in that earlier F_j.
        fn literal(w: &[usize], k: usize, s: &Schedule) -> bool {
            let f = Family::of_level(k);
            if w.iter().any(|&x| x != ZERO && x != family_symbol(f)) {
                return true;
            }
            let z = w.iter().filter(|&&x| x == ZERO).count();
            if BigRational::new(z.into(), w.len().into()) >= *s.rate(k).unwrap() {
                return true;
            }
            (1..k).filter(|&j| Family::of_level(j) == f).any(|j| {
                let lj = s.window_usize(j).unwrap();
                w.windows(lj).any(|eta| literal(eta, j, s))
            })
        }
        let s = Schedule::toy(&[(2, rational(3, 4)), (3, rational(3, 5)), (4, rational(4, 7)), (6, rational(1, 2))]).unwrap();
        let a = signed_alphabet();
        for k in 1..=4 {
            let len = s.window_usize(k).unwrap();
            let sym = family_symbol(Family::of_level(k));
            for mask in 0..(1u64 << len) {
                let w: Vec<usize> = (0..len).map(|i| if mask >> i & 1 == 1 { ZERO } else { sym }).collect();
                let p = Pattern::word(a.clone(), &w).unwrap();
                assert_eq!(in_fk(&p, k, &s).unwrap(), literal(&w, k, &s));
            }
        }
    }

    #[test]
    fn nesting_and_disjointness() {
        let s = Schedule::toy(&[(2, rational(3, 4)), (3, rational(3, 5)), (4, rational(4, 7)), (6, rational(1, 2))]).unwrap();
        let len = s.window_usize(3).unwrap();
        for f in [Family::Plus, Family::Minus] {
            let sym = family_symbol(f);
            for mask in 0..(1u64 << len) {
                let w: Vec<usize> = (0..len).map(|i| if mask >> i & 1 == 1 { ZERO } else { sym }).collect();
                let lvl = if f == Family::Plus { 1 } else { 2 };
                if admissible(&w, f, lvl + 2, &s).unwrap() {
                    assert!(admissible(&w, f, lvl, &s).unwrap());
                }
            }
        }
        // A word admissible for both families is all zeros, which r < 1 forbids.
        for k in 1..=4 {
            let len = s.window_usize(k).unwrap();
            let zeros = vec![ZERO; len];
            assert!(!(admissible(&zeros, Family::Plus, k, &s).unwrap()
                && admissible(&zeros, Family::Minus, k, &s).unwrap()));
        }
    }

    #[test]
    fn concatenations_are_admissible() {
        let s = Schedule::toy(&[(2, rational(3, 4)), (5, rational(1, 2))]).unwrap();
        // m_2 = 9/3 = 3.
        let (built, good) = explicit_concat_count(2, Family::Plus, &s, DEFAULT_DP_CAP).unwrap();
        assert_eq!(BigUint::from(built), c_count(2, Family::Plus, &s, DEFAULT_DP_CAP).unwrap());
        assert_eq!(built, good);
        assert!(c_count(2, Family::Plus, &s, DEFAULT_DP_CAP).unwrap() <= count_p(2, Family::Plus, &s, DEFAULT_DP_CAP).unwrap());
    }

    #[test]
    fn toy_lemma_chain() {
        let s = Schedule::toy(&[(4, rational(1, 2)), (11, rational(1, 2))]).unwrap();
        let r = verify_lemma51_chain(2, &s, 10, DEFAULT_DP_CAP, DEFAULT_MAX_PRECISION).unwrap();
        assert_eq!(r.p_value, BigUint::one() << 20usize);
        assert!(r.bound_i.holds);
        assert!(!r.bound_iii.holds);
        assert_eq!(r.odd_slots, 2);
    }

    #[test]
    fn strict_seed_chain() {
        let s = crate::bounds::extend_schedule(&Schedule::seed(), Default::default()).unwrap();
        let r = verify_lemma51_chain(2, &s, 10, DEFAULT_DP_CAP, DEFAULT_MAX_PRECISION).unwrap();
        assert!(r.chain_holds(), "{r:?}");
        assert_eq!(r.m, BigUint::from(18725u32));
        assert_eq!(r.odd_slots, 9363);
        assert_eq!(r.b_count, BigUint::from(63u32));
        assert!(r.direct.is_none());
    }

    #[test]
    fn weighted_counts() {
        let s = Schedule::seed();
        let w = weighted_g_count(1, Family::Plus, &s, Base::Int(2), &BigUint::one(), DEFAULT_DP_CAP, 128).unwrap();
        let expect: BigUint = [1u32, 7, 21, 35]
            .iter()
            .enumerate()
            .map(|(i, &c)| BigUint::from(c) << (7 * i))
            .sum();
        assert!(!w.log_value.contains(&BigRational::from_integer(0.into())));
        let exact = ln_int(&BigInt::from(expect), 128);
        assert!(w.log_value.sub(&exact).width_f64() < 1e-30);
        let w2 = weighted_g_count(1, Family::Plus, &s, Base::Int(2), &BigUint::from(2u32), DEFAULT_DP_CAP, 128).unwrap();
        let d = w2.log_value.sub(&w.log_value).sub(&crate::bounds::ln2(128));
        assert!(d.lo_f64().abs() < 1e-30 && d.hi_f64().abs() < 1e-30);
        // Only the zero-free word survives: log 1 = 0 for any base.
        let lone = seed_toy(rational(1, 8));
        for b in [Base::Int(2), Base::E, Base::Int(1)] {
            let w = weighted_g_count(1, Family::Plus, &lone, b, &BigUint::one(), DEFAULT_DP_CAP, 64).unwrap();
            assert!(w.log_value.width_f64() < 1e-15 && w.log_value.lo_f64().abs() < 1e-15);
        }
        // b = 1, c = 1 gives log |P|.
        let w = weighted_g_count(1, Family::Plus, &s, Base::Int(1), &BigUint::one(), DEFAULT_DP_CAP, 64).unwrap();
        assert!(!w.log_value.contains(&BigRational::from_integer(0.into())));
        assert!((w.log_value.mid_f64() - 64f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn prop52_cases() {
        // Minus is all-ones only at level 2; plus is rich.
        let s = Schedule::toy(&[(2, rational(3, 4)), (5, rational(1, 9))]).unwrap();
        let r = verify_prop52(2, &s, 10, Base::Int(2), &BigUint::one(), DEFAULT_DP_CAP, 64, 1024).unwrap();
        assert!(r.holds());
        assert!(r.margin().lo_f64() > 5.0);
        // Symmetric schedule, power 1: both sides equal.
        let sym = Schedule::toy(&[(2, rational(3, 4)), (5, rational(1, 2))]).unwrap().mirrored().unwrap();
        for base in [Base::Int(2), Base::E] {
            let r = verify_prop52(2, &sym, 1, base, &BigUint::one(), DEFAULT_DP_CAP, 64, 1024).unwrap();
            assert_eq!(r.overall, Ordering::Equal);
        }
        // b = 1 reduces to counting: compare with the lemma's direct check.
        let s = Schedule::toy(&[(2, rational(3, 4)), (5, rational(1, 4))]).unwrap();
        let p = verify_prop52(2, &s, 2, Base::Int(1), &BigUint::one(), DEFAULT_DP_CAP, 64, 1024).unwrap();
        let l = verify_lemma51_chain(2, &s, 2, DEFAULT_DP_CAP, 1024).unwrap();
        assert_eq!(p.step1 != Ordering::Greater, l.direct.unwrap());
        // e-base comparison decides a strict case too.
        let r = verify_prop52(2, &s, 2, Base::E, &BigUint::one(), DEFAULT_DP_CAP, 64, 2048).unwrap();
        assert!(r.holds());
    }

    #[test]
    fn blowup_sum_matches_direct_enumeration() {
        use crate::subshift::{blowup_expand, BlowupSymbol};
        let s = Schedule::toy(&[(2, rational(3, 4)), (4, rational(5, 8))]).unwrap();
        let a = signed_alphabet();
        for k in 1..=2 {
            let len = s.window_usize(k).unwrap();
            let f = Family::of_level(k);
            let mut via_sum = BigUint::zero();
            let sym = family_symbol(f);
            for mask in 0..(1u64 << len) {
                let w: Vec<usize> = (0..len).map(|i| if mask >> i & 1 == 1 { ZERO } else { sym }).collect();
                if admissible(&w, f, k, &s).unwrap() {
                    via_sum += blowup_expand(&Pattern::word(a.clone(), &w).unwrap()).unwrap();
                }
            }
            // Direct: words over the four blown-up symbols whose projection is admissible.
            let syms = BlowupSymbol::all();
            let mut direct = 0u64;
            for idx in 0..4u64.pow(len as u32) {
                let mut i = idx;
                let w: Vec<usize> = (0..len)
                    .map(|_| {
                        let b = syms[(i % 4) as usize].base();
                        i /= 4;
                        b
                    })
                    .collect();
                if admissible(&w, f, k, &s).unwrap() {
                    direct += 1;
                }
            }
            assert_eq!(via_sum, BigUint::from(direct));
            let _ = (MINUS, PLUS);
        }
    }
}
