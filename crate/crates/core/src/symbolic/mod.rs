//! Lattice patterns over a finite alphabet, forbidden-set subshifts and
//! finite-window admissibility for one- and two-dimensional lattices.
//!
//! Every [`Pattern`] is stored in its canonical translate: the coordinate-wise
//! minimum of its support is the origin, so two patterns are congruent exactly
//! when they compare equal.

mod count;
mod text;

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

pub use count::{count_admissible_brute, count_admissible_dp, enumerate_admissible, DEFAULT_ENUM_CAP};
pub use text::{format_pattern, parse_forbidden, parse_pattern_file, PatternFile, DEFAULT_GROUP};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymbolicError {
    #[error("alphabet must be nonempty")]
    EmptyAlphabet,
    #[error("duplicate symbol `{0}` in alphabet")]
    DuplicateSymbol(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("window must contain at least one point")]
    EmptyWindow,
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("enumeration overflow: {needed} candidates exceed the cap of {cap}")]
    EnumerationOverflow { needed: u128, cap: u128 },
    #[error("counting overflow: {states} automaton states exceed the cap of {cap}")]
    CountingOverflow { states: u128, cap: u128 },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

impl SymbolicError {
    pub fn is_resource(&self) -> bool {
        matches!(
            self,
            SymbolicError::EnumerationOverflow { .. } | SymbolicError::CountingOverflow { .. }
        )
    }
}

type Result<T> = std::result::Result<T, SymbolicError>;

/// Ordered list of distinct symbol names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<String>,
    index: HashMap<String, usize>,
}

impl Alphabet {
    pub fn new<I, S>(symbols: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(SymbolicError::EmptyAlphabet);
        }
        let mut index = HashMap::with_capacity(symbols.len());
        for (i, s) in symbols.iter().enumerate() {
            if index.insert(s.clone(), i).is_some() {
                return Err(SymbolicError::DuplicateSymbol(s.clone()));
            }
        }
        Ok(Alphabet { symbols, index })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbol(&self, i: usize) -> &str {
        &self.symbols[i]
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn index_of(&self, s: &str) -> Option<usize> {
        self.index.get(s).copied()
    }

    fn lookup(&self, s: &str) -> Result<usize> {
        self.index_of(s)
            .ok_or_else(|| SymbolicError::UnknownSymbol(s.to_string()))
    }

    /// True when every symbol is a single character, so words can be written
    /// without separators.
    pub fn is_compact(&self) -> bool {
        self.symbols.iter().all(|s| s.chars().count() == 1)
    }
}

/// A lattice point; for one-dimensional windows `y` is always 0.
///
/// Ordered row-major: by `y`, then `x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point {
    pub y: i64,
    pub x: i64,
}

impl Point {
    pub fn new(x: i64, y: i64) -> Self {
        Point { x, y }
    }
}

/// Finite support, stored as its canonical translate in row-major order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Window {
    dim: u8,
    points: Vec<Point>,
    width: usize,
    height: usize,
}

impl Window {
    pub fn new(dim: u8, points: impl IntoIterator<Item = Point>) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(SymbolicError::Contract(format!("unsupported dimension {dim}")));
        }
        let mut points: Vec<Point> = points.into_iter().collect();
        if points.is_empty() {
            return Err(SymbolicError::EmptyWindow);
        }
        if dim == 1 && points.iter().any(|p| p.y != points[0].y) {
            return Err(SymbolicError::Contract(
                "one-dimensional window with several rows".into(),
            ));
        }
        let min_x = points.iter().map(|p| p.x).min().unwrap_or(0);
        let min_y = points.iter().map(|p| p.y).min().unwrap_or(0);
        for p in points.iter_mut() {
            p.x -= min_x;
            p.y -= min_y;
        }
        points.sort();
        points.dedup();
        let width = points.iter().map(|p| p.x).max().unwrap_or(0) as usize + 1;
        let height = points.iter().map(|p| p.y).max().unwrap_or(0) as usize + 1;
        Ok(Window {
            dim,
            points,
            width,
            height,
        })
    }

    /// Contiguous one-dimensional segment of `n` sites.
    pub fn segment(n: usize) -> Result<Self> {
        Self::new(1, (0..n as i64).map(|x| Point::new(x, 0)))
    }

    /// Full `w × h` rectangle in dimension 2.
    pub fn rect(w: usize, h: usize) -> Result<Self> {
        Self::new(
            2,
            (0..h as i64).flat_map(|y| (0..w as i64).map(move |x| Point::new(x, y))),
        )
    }

    /// The centred cube of side `2n − 1`.
    pub fn lambda(n: usize, dim: u8) -> Result<Self> {
        if n == 0 {
            return Err(SymbolicError::EmptyWindow);
        }
        let side = 2 * n - 1;
        match dim {
            1 => Self::segment(side),
            2 => Self::rect(side, side),
            _ => Err(SymbolicError::Contract(format!("unsupported dimension {dim}"))),
        }
    }

    /// Centre plus its four nearest neighbours.
    pub fn cross() -> Self {
        Self::new(
            2,
            [(1, 0), (0, 1), (1, 1), (2, 1), (1, 2)]
                .into_iter()
                .map(|(x, y)| Point::new(x, y)),
        )
        .expect("cross is nonempty")
    }

    pub fn dim(&self) -> u8 {
        self.dim
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Bounding-box width.
    pub fn width(&self) -> usize {
        self.width
    }

    /// Bounding-box height.
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn is_rectangle(&self) -> bool {
        self.points.len() == self.width * self.height
    }

    /// Position of `p` in the point order, if present.
    pub fn position(&self, p: Point) -> Option<usize> {
        self.points.binary_search(&p).ok()
    }
}

/// A symbol assignment on a window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    alphabet: Arc<Alphabet>,
    window: Window,
    symbols: Vec<usize>,
}

impl Pattern {
    /// `symbols[i]` is the symbol at `window.points()[i]`.
    pub fn new(alphabet: Arc<Alphabet>, window: Window, symbols: Vec<usize>) -> Result<Self> {
        if symbols.len() != window.len() {
            return Err(SymbolicError::Contract(format!(
                "{} symbols for a window of {} points",
                symbols.len(),
                window.len()
            )));
        }
        if let Some(&bad) = symbols.iter().find(|&&s| s >= alphabet.len()) {
            return Err(SymbolicError::Contract(format!("symbol index {bad} out of range")));
        }
        Ok(Pattern {
            alphabet,
            window,
            symbols,
        })
    }

    /// One-dimensional word from symbol indices.
    pub fn word(alphabet: Arc<Alphabet>, symbols: &[usize]) -> Result<Self> {
        let window = Window::segment(symbols.len())?;
        Self::new(alphabet, window, symbols.to_vec())
    }

    /// One-dimensional word from text: characters for compact alphabets,
    /// whitespace-separated names otherwise.
    pub fn parse_word(alphabet: Arc<Alphabet>, text: &str) -> Result<Self> {
        let symbols = if alphabet.is_compact() && !text.contains(char::is_whitespace) {
            text.chars()
                .map(|c| alphabet.lookup(&c.to_string()))
                .collect::<Result<Vec<_>>>()?
        } else {
            text.split_whitespace()
                .map(|s| alphabet.lookup(s))
                .collect::<Result<Vec<_>>>()?
        };
        Self::word(alphabet, &symbols)
    }

    /// Full rectangle from rows, `rows[0]` being `y = 0`.
    pub fn from_rows(alphabet: Arc<Alphabet>, rows: &[Vec<usize>]) -> Result<Self> {
        let h = rows.len();
        let w = rows.first().map_or(0, Vec::len);
        if h == 0 || w == 0 || rows.iter().any(|r| r.len() != w) {
            return Err(SymbolicError::Contract("ragged or empty rows".into()));
        }
        let window = Window::rect(w, h)?;
        let symbols = rows.iter().flatten().copied().collect();
        Self::new(alphabet, window, symbols)
    }

    /// Builds a pattern on `window` from an arbitrary point → symbol function.
    pub fn from_fn(
        alphabet: Arc<Alphabet>,
        window: Window,
        f: impl Fn(Point) -> usize,
    ) -> Result<Self> {
        let symbols = window.points().iter().map(|&p| f(p)).collect();
        Self::new(alphabet, window, symbols)
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn symbols(&self) -> &[usize] {
        &self.symbols
    }

    pub fn dim(&self) -> u8 {
        self.window.dim
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn at(&self, p: Point) -> Option<usize> {
        self.window.position(p).map(|i| self.symbols[i])
    }

    /// Dense bounding-box grid, `None` outside the support.
    fn grid(&self) -> Vec<Option<usize>> {
        let w = self.window.width;
        let mut g = vec![None; w * self.window.height];
        for (p, &s) in self.window.points.iter().zip(&self.symbols) {
            g[p.y as usize * w + p.x as usize] = Some(s);
        }
        g
    }

    fn check_compatible(&self, other: &Pattern) -> Result<()> {
        if self.alphabet != other.alphabet {
            return Err(SymbolicError::Contract("patterns over different alphabets".into()));
        }
        if self.dim() != other.dim() {
            return Err(SymbolicError::Contract(format!(
                "dimension mismatch: {} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(())
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let compact = self.alphabet.is_compact();
        let w = self.window.width;
        let grid = self.grid();
        for y in 0..self.window.height {
            if y > 0 {
                f.write_str(";")?;
            }
            for x in 0..w {
                if !compact && x > 0 {
                    f.write_str(" ")?;
                }
                match grid[y * w + x] {
                    Some(s) => f.write_str(self.alphabet.symbol(s))?,
                    None => f.write_str(".")?,
                }
            }
        }
        Ok(())
    }
}

/// Does some translate of `p` sit entirely inside `q` with matching symbols?
pub fn occurs_in(p: &Pattern, q: &Pattern) -> Result<bool> {
    p.check_compatible(q)?;
    let (pw, ph) = (p.window.width, p.window.height);
    let (qw, qh) = (q.window.width, q.window.height);
    if pw > qw || ph > qh {
        return Ok(false);
    }
    let grid = q.grid();
    for dy in 0..=(qh - ph) {
        'shift: for dx in 0..=(qw - pw) {
            for (pt, &s) in p.window.points.iter().zip(&p.symbols) {
                let idx = (pt.y as usize + dy) * qw + pt.x as usize + dx;
                if grid[idx] != Some(s) {
                    continue 'shift;
                }
            }
            return Ok(true);
        }
    }
    Ok(false)
}

/// Finite set of forbidden patterns over one alphabet, deduplicated.
#[derive(Debug, Clone, PartialEq)]
pub struct ForbiddenSet {
    alphabet: Arc<Alphabet>,
    patterns: Vec<Pattern>,
}

impl ForbiddenSet {
    pub fn new(alphabet: Arc<Alphabet>, patterns: impl IntoIterator<Item = Pattern>) -> Result<Self> {
        let mut out: Vec<Pattern> = Vec::new();
        for p in patterns {
            if *p.alphabet != *alphabet {
                return Err(SymbolicError::Contract(
                    "forbidden pattern over a different alphabet".into(),
                ));
            }
            if !out.contains(&p) {
                out.push(p);
            }
        }
        Ok(ForbiddenSet {
            alphabet,
            patterns: out,
        })
    }

    pub fn empty(alphabet: Arc<Alphabet>) -> Self {
        ForbiddenSet {
            alphabet,
            patterns: Vec::new(),
        }
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn patterns(&self) -> &[Pattern] {
        &self.patterns
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    /// Common dimension of the patterns, if any.
    pub fn dim(&self) -> Option<u8> {
        self.patterns.first().map(Pattern::dim)
    }

    pub fn contains(&self, p: &Pattern) -> bool {
        self.patterns.contains(p)
    }

    /// Union with another forbidden set over the same alphabet.
    pub fn union(&self, other: &ForbiddenSet) -> Result<ForbiddenSet> {
        ForbiddenSet::new(
            self.alphabet.clone(),
            self.patterns.iter().chain(other.patterns.iter()).cloned(),
        )
    }
}

/// True iff no pattern of `forbidden` occurs inside `omega`.
pub fn locally_admissible(omega: &Pattern, forbidden: &ForbiddenSet) -> Result<bool> {
    for f in &forbidden.patterns {
        if occurs_in(f, omega)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bin() -> Arc<Alphabet> {
        Arc::new(Alphabet::new(["0", "1"]).unwrap())
    }

    fn w(a: &Arc<Alphabet>, s: &str) -> Pattern {
        Pattern::parse_word(a.clone(), s).unwrap()
    }

    #[test]
    fn alphabet_rejects_duplicates_and_empty() {
        assert_eq!(
            Alphabet::new(["a", "a"]).unwrap_err(),
            SymbolicError::DuplicateSymbol("a".into())
        );
        assert_eq!(
            Alphabet::new(Vec::<String>::new()).unwrap_err(),
            SymbolicError::EmptyAlphabet
        );
        let a = Alphabet::new(["x", "y", "z"]).unwrap();
        for (i, s) in a.symbols().iter().enumerate() {
            assert_eq!(a.index_of(s), Some(i));
        }
    }

    #[test]
    fn windows_are_canonical() {
        let a = Window::new(2, [Point::new(5, 7), Point::new(6, 7), Point::new(5, 9)]).unwrap();
        let b = Window::new(2, [Point::new(0, 0), Point::new(1, 0), Point::new(0, 2)]).unwrap();
        assert_eq!(a, b);
        assert_eq!((a.width(), a.height()), (2, 3));
        assert!(!a.is_rectangle());
        assert_eq!(Window::cross().len(), 5);
    }

    #[test]
    fn lambda_volume() {
        for n in 1..=100usize {
            let side = 2 * n - 1;
            assert_eq!(Window::lambda(n, 1).unwrap().len(), side);
            assert_eq!(Window::lambda(n, 2).unwrap().len(), side * side);
        }
    }

    #[test]
    fn occurrence_examples() {
        let a = bin();
        assert!(occurs_in(&w(&a, "11"), &w(&a, "0110")).unwrap());
        assert!(!occurs_in(&w(&a, "11"), &w(&a, "0101")).unwrap());
        let vertical = Pattern::from_rows(a.clone(), &[vec![0], vec![1]]).unwrap();
        assert!(matches!(
            occurs_in(&vertical, &w(&a, "0101")),
            Err(SymbolicError::Contract(_))
        ));
        let other = Arc::new(Alphabet::new(["0", "1", "2"]).unwrap());
        assert!(occurs_in(&w(&a, "1"), &w(&other, "1")).is_err());
    }

    #[test]
    fn occurrence_respects_holes() {
        let a = bin();
        // 1 . 1 with a hole in the middle.
        let holed = Pattern::new(
            a.clone(),
            Window::new(1, [Point::new(0, 0), Point::new(2, 0)]).unwrap(),
            vec![1, 1],
        )
        .unwrap();
        assert!(occurs_in(&holed, &w(&a, "0101")).unwrap());
        assert!(!occurs_in(&holed, &w(&a, "0110")).unwrap());
    }

    #[test]
    fn boundary_straddling_is_not_an_occurrence() {
        let a = bin();
        assert!(!occurs_in(&w(&a, "111"), &w(&a, "11")).unwrap());
    }

    #[test]
    fn local_admissibility_examples() {
        let a = bin();
        let f = ForbiddenSet::new(a.clone(), [w(&a, "11")]).unwrap();
        assert!(locally_admissible(&w(&a, "0101"), &f).unwrap());
        assert!(!locally_admissible(&w(&a, "0110"), &f).unwrap());
        let empty = ForbiddenSet::empty(a.clone());
        assert!(locally_admissible(&w(&a, "1111"), &empty).unwrap());
    }

    #[test]
    fn forbidden_set_deduplicates_congruent_patterns() {
        let a = bin();
        let p = w(&a, "11");
        let q = Pattern::new(
            a.clone(),
            Window::new(1, [Point::new(3, 0), Point::new(4, 0)]).unwrap(),
            vec![1, 1],
        )
        .unwrap();
        let f = ForbiddenSet::new(a, [p, q]).unwrap();
        assert_eq!(f.len(), 1);
    }

    #[test]
    fn display_round_trips_compact_words() {
        let a = bin();
        assert_eq!(w(&a, "0110").to_string(), "0110");
        let p = Pattern::from_rows(a, &[vec![0, 1], vec![1, 1]]).unwrap();
        assert_eq!(p.to_string(), "01;11");
    }
}
