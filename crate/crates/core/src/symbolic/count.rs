use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::{Alphabet, ForbiddenSet, Pattern, Point, SymbolicError, Window};
use crate::exec;

/// Default limit on the number of candidate assignments scanned by
/// [`enumerate_admissible`] and on automaton states in [`count_admissible_dp`].
pub const DEFAULT_ENUM_CAP: u128 = 1 << 22;

const CHUNK: usize = 4096;

/// Every placement of a forbidden pattern that fits inside `shape`, as
/// (shape positions, symbols).
fn placements(forbidden: &ForbiddenSet, shape: &Window) -> Vec<(Vec<usize>, Vec<usize>)> {
    let mut out = Vec::new();
    for f in forbidden.patterns() {
        let fw = f.window();
        if fw.width() > shape.width() || fw.height() > shape.height() {
            continue;
        }
        for dy in 0..=(shape.height() - fw.height()) as i64 {
            'shift: for dx in 0..=(shape.width() - fw.width()) as i64 {
                let mut pos = Vec::with_capacity(fw.len());
                for p in fw.points() {
                    match shape.position(Point::new(p.x + dx, p.y + dy)) {
                        Some(i) => pos.push(i),
                        None => continue 'shift,
                    }
                }
                out.push((pos, f.symbols().to_vec()));
            }
        }
    }
    out
}

fn check_dims(forbidden: &ForbiddenSet, dim: u8) -> Result<(), SymbolicError> {
    match forbidden.patterns().iter().find(|p| p.dim() != dim) {
        Some(p) => Err(SymbolicError::Contract(format!(
            "forbidden pattern of dimension {} against a window of dimension {dim}",
            p.dim()
        ))),
        None => Ok(()),
    }
}

fn total_assignments(q: usize, n: usize, cap: u128) -> Result<u128, SymbolicError> {
    let mut total: u128 = 1;
    for _ in 0..n {
        total = match total.checked_mul(q as u128) {
            Some(t) if t <= cap => t,
            _ => {
                return Err(SymbolicError::EnumerationOverflow {
                    needed: total.saturating_mul(q as u128),
                    cap,
                })
            }
        };
    }
    Ok(total)
}

fn decode(mut idx: u128, q: usize, digits: &mut [usize]) {
    for d in digits.iter_mut().rev() {
        *d = (idx % q as u128) as usize;
        idx /= q as u128;
    }
}

/// Odometer increment, last position fastest.
fn bump(digits: &mut [usize], q: usize) {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < q {
            return;
        }
        *d = 0;
    }
}

/// Runs `visit` over every admissible assignment of `shape`, chunk by chunk,
/// collecting per-chunk results in order.
fn scan<R, F>(
    forbidden: &ForbiddenSet,
    shape: &Window,
    cap: u128,
    visit: F,
) -> Result<Vec<R>, SymbolicError>
where
    R: Send,
    F: Fn(&[usize], &mut R) + Sync + Send,
    R: Default,
{
    check_dims(forbidden, shape.dim())?;
    let q = forbidden.alphabet().len();
    let n = shape.len();
    let total = total_assignments(q, n, cap)?;
    let places = placements(forbidden, shape);
    let chunks = total.div_ceil(CHUNK as u128) as usize;
    Ok(exec::map_range(0..chunks, |c| {
        let start = c as u128 * CHUNK as u128;
        let end = (start + CHUNK as u128).min(total);
        let mut digits = vec![0usize; n];
        decode(start, q, &mut digits);
        let mut acc = R::default();
        for _ in start..end {
            let bad = places
                .iter()
                .any(|(pos, sym)| pos.iter().zip(sym).all(|(&i, &s)| digits[i] == s));
            if !bad {
                visit(&digits, &mut acc);
            }
            bump(&mut digits, q);
        }
        acc
    }))
}

/// All `shape`-patterns avoiding `forbidden`, in lexicographic order of the
/// symbol indices (window points in row-major order).
pub fn enumerate_admissible(
    forbidden: &ForbiddenSet,
    shape: &Window,
    cap: u128,
) -> Result<Vec<Pattern>, SymbolicError> {
    let chunks: Vec<Vec<Vec<usize>>> =
        scan(forbidden, shape, cap, |d, acc: &mut Vec<Vec<usize>>| acc.push(d.to_vec()))?;
    let alphabet = forbidden.alphabet();
    chunks
        .into_iter()
        .flatten()
        .map(|s| Pattern::new(alphabet.clone(), shape.clone(), s))
        .collect()
}

/// Number of admissible `shape`-patterns, by exhaustive scan.
pub fn count_admissible_brute(
    forbidden: &ForbiddenSet,
    shape: &Window,
    cap: u128,
) -> Result<BigUint, SymbolicError> {
    let chunks: Vec<u64> = scan(forbidden, shape, cap, |_, acc: &mut u64| *acc += 1)?;
    Ok(BigUint::from(chunks.into_iter().sum::<u64>()))
}

/// Number of admissible words of the given length, by dynamic programming over
/// the sliding-window automaton whose states are the last `w − 1` symbols.
pub fn count_admissible_dp(
    forbidden: &ForbiddenSet,
    length: usize,
    cap: u128,
) -> Result<BigUint, SymbolicError> {
    check_dims(forbidden, 1)?;
    let alphabet: &Arc<Alphabet> = forbidden.alphabet();
    let q = alphabet.len();
    if length == 0 {
        return Ok(BigUint::one());
    }
    if forbidden.is_empty() {
        return Ok(BigUint::from(q).pow(length as u32));
    }
    let w = forbidden
        .patterns()
        .iter()
        .map(|p| p.window().width())
        .max()
        .unwrap_or(1)
        .max(2);
    if length < w {
        return count_admissible_brute(forbidden, &Window::segment(length)?, cap);
    }
    let states = (q as u128)
        .checked_pow((w - 1) as u32)
        .filter(|&s| s <= cap)
        .ok_or(SymbolicError::CountingOverflow {
            states: (q as u128).saturating_pow((w - 1) as u32),
            cap,
        })?;
    let states = states as usize;

    // allowed[s * q + a]: appending `a` to state `s` creates no occurrence
    // ending at the new symbol.
    let ends: Vec<(Vec<usize>, Vec<usize>)> = forbidden
        .patterns()
        .iter()
        .map(|p| {
            let shift = w - p.window().width();
            let pos = p.window().points().iter().map(|pt| pt.x as usize + shift).collect();
            (pos, p.symbols().to_vec())
        })
        .collect();
    let mut allowed = vec![false; states * q];
    exec::fill(&mut allowed, |word| {
        let mut digits = vec![0usize; w];
        decode(word as u128, q, &mut digits);
        !ends
            .iter()
            .any(|(pos, sym)| pos.iter().zip(sym).all(|(&i, &s)| digits[i] == s))
    });

    // Admissible prefixes of length w − 1 seed the automaton.
    let prefix = Window::segment(w - 1)?;
    let places = placements(forbidden, &prefix);
    let mut counts: Vec<BigUint> = exec::map_range(0..states, |s| {
        let mut digits = vec![0usize; w - 1];
        decode(s as u128, q, &mut digits);
        let bad = places
            .iter()
            .any(|(pos, sym)| pos.iter().zip(sym).all(|(&i, &x)| digits[i] == x));
        if bad {
            BigUint::zero()
        } else {
            BigUint::one()
        }
    });

    let high = states / q;
    for _ in (w - 1)..length {
        counts = exec::map_range(0..states, |t| {
            let a = t % q;
            let base = t / q;
            let mut acc = BigUint::zero();
            for b in 0..q {
                let s = base + b * high;
                if allowed[s * q + a] && !counts[s].is_zero() {
                    acc += &counts[s];
                }
            }
            acc
        });
    }
    Ok(counts.into_iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bin() -> Arc<Alphabet> {
        Arc::new(Alphabet::new(["0", "1"]).unwrap())
    }

    fn golden() -> ForbiddenSet {
        let a = bin();
        ForbiddenSet::new(a.clone(), [Pattern::parse_word(a, "11").unwrap()]).unwrap()
    }

    #[test]
    fn golden_mean_length_three() {
        let out = enumerate_admissible(&golden(), &Window::segment(3).unwrap(), DEFAULT_ENUM_CAP)
            .unwrap();
        let words: Vec<String> = out.iter().map(ToString::to_string).collect();
        assert_eq!(words, ["000", "001", "010", "100", "101"]);
    }

    #[test]
    fn dp_matches_fibonacci() {
        let f = golden();
        assert_eq!(count_admissible_dp(&f, 3, DEFAULT_ENUM_CAP).unwrap(), BigUint::from(5u32));
        assert_eq!(count_admissible_dp(&f, 10, DEFAULT_ENUM_CAP).unwrap(), BigUint::from(144u32));
        let (mut a, mut b) = (1u64, 2u64);
        for n in 1..=60 {
            assert_eq!(count_admissible_dp(&f, n, DEFAULT_ENUM_CAP).unwrap(), BigUint::from(b));
            (a, b) = (b, a + b);
        }
    }

    #[test]
    fn full_shift_counts() {
        let a = Arc::new(Alphabet::new(["a", "b", "c"]).unwrap());
        let f = ForbiddenSet::empty(a);
        let shape = Window::lambda(2, 1).unwrap();
        assert_eq!(enumerate_admissible(&f, &shape, DEFAULT_ENUM_CAP).unwrap().len(), 27);
        let f2 = ForbiddenSet::empty(bin());
        assert_eq!(
            count_admissible_dp(&f2, 40, DEFAULT_ENUM_CAP).unwrap(),
            BigUint::from(1u64 << 40)
        );
    }

    #[test]
    fn forbidding_every_symbol_leaves_nothing() {
        let a = bin();
        let f = ForbiddenSet::new(
            a.clone(),
            [
                Pattern::parse_word(a.clone(), "0").unwrap(),
                Pattern::parse_word(a, "1").unwrap(),
            ],
        )
        .unwrap();
        assert!(enumerate_admissible(&f, &Window::segment(4).unwrap(), DEFAULT_ENUM_CAP)
            .unwrap()
            .is_empty());
        assert!(count_admissible_dp(&f, 9, DEFAULT_ENUM_CAP).unwrap().is_zero());
    }

    #[test]
    fn caps_are_hard_errors() {
        let f = golden();
        let err = enumerate_admissible(&f, &Window::segment(30).unwrap(), 1000).unwrap_err();
        assert!(matches!(err, SymbolicError::EnumerationOverflow { cap: 1000, .. }));
        assert!(err.to_string().contains("1000"));
        let a = bin();
        let long = ForbiddenSet::new(a.clone(), [Pattern::parse_word(a, "1111111111").unwrap()])
            .unwrap();
        assert!(matches!(
            count_admissible_dp(&long, 20, 100),
            Err(SymbolicError::CountingOverflow { .. })
        ));
    }

    #[test]
    fn two_dimensional_golden_mean_on_2x2() {
        let a = bin();
        let h = Pattern::new(
            a.clone(),
            Window::new(2, [Point::new(0, 0), Point::new(1, 0)]).unwrap(),
            vec![1, 1],
        )
        .unwrap();
        let v = Pattern::from_rows(a.clone(), &[vec![1], vec![1]]).unwrap();
        let f = ForbiddenSet::new(a, [h, v]).unwrap();
        let out = enumerate_admissible(&f, &Window::rect(2, 2).unwrap(), DEFAULT_ENUM_CAP).unwrap();
        assert_eq!(out.len(), 7);
        // 3×3 hard-square count.
        let c = count_admissible_brute(&f, &Window::rect(3, 3).unwrap(), DEFAULT_ENUM_CAP).unwrap();
        assert_eq!(c, BigUint::from(63u32));
    }

    #[test]
    fn holed_patterns_in_dp() {
        let a = bin();
        // Forbid 1.1: no two ones at distance two.
        let p = Pattern::new(
            a.clone(),
            Window::new(1, [Point::new(0, 0), Point::new(2, 0)]).unwrap(),
            vec![1, 1],
        )
        .unwrap();
        let f = ForbiddenSet::new(a, [p]).unwrap();
        for n in 1..=14 {
            let brute =
                count_admissible_brute(&f, &Window::segment(n).unwrap(), DEFAULT_ENUM_CAP).unwrap();
            assert_eq!(count_admissible_dp(&f, n, DEFAULT_ENUM_CAP).unwrap(), brute, "n={n}");
        }
    }
}
