//! Frequency-constrained one-dimensional subshifts over `{−1, 0, +1}`.
//!
//! Level `k` of a [`Schedule`] forbids, inside its family, every window of
//! length `2ℓ_k − 1` in which zeros occur with frequency at least `r_k`. Odd
//! levels constrain the plus family (alphabet `{0, +1}`), even levels the minus
//! family (`{0, −1}`). Because the defining windows of earlier levels are
//! factors of later ones, admissibility at level `k` is the conjunction of all
//! same-family window constraints up to `k`, and counts reduce to zero-count
//! histograms of binary strings.

mod counting;

use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::bounds::{BoundsError, Schedule};
use crate::symbolic::{Alphabet, Pattern};

pub use crate::bounds::Family;
pub use counting::{
    b_set_count, c_count, concat_count, count_p, explicit_concat_count, family_histogram, verify_lemma51_chain,
    compare_weighted, verify_prop52, weighted_g_count, zero_histogram, Base, Lemma51Report, Prop52Report, Step,
    WeightedCount, ZeroHistogram, DEFAULT_DP_CAP,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SubshiftError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error("counting overflow: {states} automaton states exceed the cap of {cap}")]
    CountingOverflow { states: u128, cap: u128 },
}

impl SubshiftError {
    pub fn is_resource(&self) -> bool {
        match self {
            SubshiftError::CountingOverflow { .. } => true,
            SubshiftError::Bounds(e) => e.is_resource(),
            SubshiftError::Domain(_) => false,
        }
    }
}

type Result<T> = std::result::Result<T, SubshiftError>;

pub const MINUS: usize = 0;
pub const ZERO: usize = 1;
pub const PLUS: usize = 2;

/// `{−1, 0, +1}` written `-`, `0`, `+`, in that index order.
pub fn signed_alphabet() -> Arc<Alphabet> {
    Arc::new(Alphabet::new(["-", "0", "+"]).expect("three distinct symbols"))
}

/// The nonzero symbol of a family.
pub fn family_symbol(f: Family) -> usize {
    match f {
        Family::Plus => PLUS,
        Family::Minus => MINUS,
    }
}

/// Membership in `Σ_+ = {0, +1}` or `Σ_− = {0, −1}`.
pub fn in_sub_alphabet(symbol: usize, f: Family) -> bool {
    symbol == ZERO || symbol == family_symbol(f)
}

/// Tag of a blown-up symbol: zeros come in two copies, other symbols in one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tag {
    Zero,
    ZeroTilde,
    Star,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BlowupSymbol {
    base: usize,
    tag: Tag,
}

impl BlowupSymbol {
    pub fn new(base: usize, tag: Tag) -> Result<Self> {
        let ok = match tag {
            Tag::Star => base == MINUS || base == PLUS,
            Tag::Zero | Tag::ZeroTilde => base == ZERO,
        };
        if ok {
            Ok(BlowupSymbol { base, tag })
        } else {
            Err(SubshiftError::Domain(format!("tag {tag:?} does not fit base symbol {base}")))
        }
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn tag(&self) -> Tag {
        self.tag
    }

    /// All four blown-up symbols.
    pub fn all() -> [BlowupSymbol; 4] {
        [
            BlowupSymbol { base: MINUS, tag: Tag::Star },
            BlowupSymbol { base: ZERO, tag: Tag::Zero },
            BlowupSymbol { base: ZERO, tag: Tag::ZeroTilde },
            BlowupSymbol { base: PLUS, tag: Tag::Star },
        ]
    }
}

impl fmt::Display for BlowupSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.base, self.tag) {
            (ZERO, Tag::ZeroTilde) => f.write_str("0~"),
            (ZERO, _) => f.write_str("0"),
            (MINUS, _) => f.write_str("-"),
            _ => f.write_str("+"),
        }
    }
}

fn signed_word(omega: &Pattern) -> Result<&[usize]> {
    if omega.dim() != 1 || !omega.window().is_rectangle() {
        return Err(SubshiftError::Domain("expected a one-dimensional word".into()));
    }
    if **omega.alphabet() != *signed_alphabet() {
        return Err(SubshiftError::Domain("word is not over {-, 0, +}".into()));
    }
    Ok(omega.symbols())
}

fn zeros(w: &[usize]) -> usize {
    w.iter().filter(|&&s| s == ZERO).count()
}

/// Frequency of zeros, exactly.
pub fn f0(omega: &Pattern) -> Result<BigRational> {
    let w = signed_word(omega)?;
    if w.is_empty() {
        return Err(SubshiftError::Domain("empty word".into()));
    }
    Ok(BigRational::new(zeros(w).into(), w.len().into()))
}

/// Largest admissible number of zeros in a window of `len` sites with
/// threshold `r`: the largest `z` with `z/len < r`.
pub fn max_zeros(len: &BigUint, r: &BigRational) -> Option<BigUint> {
    // z < r·len  ⇔  z ≤ ⌈r·len⌉ − 1.
    let bound: num_bigint::BigInt = (r * BigRational::from_integer(len.clone().into())).ceil().to_integer();
    if bound <= num_bigint::BigInt::zero() {
        None
    } else {
        Some((bound - num_bigint::BigInt::one()).to_biguint().expect("nonnegative"))
    }
}

/// Membership of a word of length `2ℓ_k − 1` in the forbidden set `F_k`.
///
/// A word is forbidden when it leaves the family alphabet, when its zero
/// frequency reaches `r_k`, or when one of its contiguous factors of length
/// `2ℓ_j − 1` is forbidden at an earlier level `j` of the same family. The
/// last clause unrolls to: some same-family window has too many zeros.
pub fn in_fk(omega: &Pattern, k: usize, s: &Schedule) -> Result<bool> {
    let w = signed_word(omega)?;
    let len = s.window_usize(k)?;
    if w.len() != len {
        return Err(SubshiftError::Domain(format!(
            "word of length {} at level {k}, expected {len}",
            w.len()
        )));
    }
    let family = Family::of_level(k);
    violates(w, family, k, s)
}

fn violates(w: &[usize], family: Family, k: usize, s: &Schedule) -> Result<bool> {
    if w.iter().any(|&x| !in_sub_alphabet(x, family)) {
        return Ok(true);
    }
    for j in s.family_levels(family, k) {
        let lj = s.window_usize(j)?;
        if lj > w.len() {
            continue;
        }
        let r = s.rate(j)?;
        let limit = max_zeros(&BigUint::from(lj), r);
        for start in 0..=(w.len() - lj) {
            let z = BigUint::from(zeros(&w[start..start + lj]));
            if limit.as_ref().is_none_or(|m| z > *m) {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// Admissibility of a word of any length for a family, using every
/// same-family level up to `k` whose window fits.
pub fn admissible(w: &[usize], family: Family, k: usize, s: &Schedule) -> Result<bool> {
    Ok(!violates(w, family, k, s)?)
}

/// Number of blow-up words projecting onto `omega`: `2^{#zeros}`.
pub fn blowup_expand(omega: &Pattern) -> Result<BigUint> {
    let w = signed_word(omega)?;
    Ok(BigUint::one() << zeros(w))
}
