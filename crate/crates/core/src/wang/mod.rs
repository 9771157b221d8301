//! Wang tiles: colour-matched unit squares on finite regions.
//!
//! Row 0 is the bottom row and cells are stored row-major from there, so a
//! tile's `top` colour meets the `bottom` colour of the tile one row up.

mod solve;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::symbolic::{
    enumerate_admissible, Alphabet, ForbiddenSet, Pattern, Point, SymbolicError, Window,
    DEFAULT_ENUM_CAP,
};

pub use solve::{
    count_by_transfer, count_tilings, solve, DEFAULT_AREA_CAP, DEFAULT_COLUMN_CAP,
    DEFAULT_SOLVE_LIMIT,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WangError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("empty tile set")]
    Empty,
    #[error("bad region: {0}")]
    Region(String),
    #[error("{what} exceed the cap of {cap} (reached {partial})")]
    Overflow {
        what: &'static str,
        partial: u128,
        cap: u128,
    },
    #[error("conversion error: {0}")]
    Conversion(String),
    #[error("simulation map: {0}")]
    Map(String),
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
}

impl WangError {
    pub fn is_resource(&self) -> bool {
        match self {
            WangError::Overflow { .. } => true,
            WangError::Symbolic(e) => e.is_resource(),
            _ => false,
        }
    }
}

type Result<T> = std::result::Result<T, WangError>;

/// A tile as four interned colour ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tile {
    pub left: u32,
    pub right: u32,
    pub top: u32,
    pub bottom: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TileSet {
    colors: Vec<String>,
    names: Vec<String>,
    tiles: Vec<Tile>,
}

impl TileSet {
    /// Builds a tile set from named tiles given by colour names. Colours are
    /// interned in first-seen order; repeated quadruples keep the first name.
    pub fn new<S: AsRef<str>>(tiles: impl IntoIterator<Item = (String, [S; 4])>) -> Result<Self> {
        let mut colors: Vec<String> = Vec::new();
        let mut index: HashMap<String, u32> = HashMap::new();
        let mut intern = |c: &str| -> u32 {
            if let Some(&i) = index.get(c) {
                return i;
            }
            colors.push(c.to_string());
            index.insert(c.to_string(), colors.len() as u32 - 1);
            colors.len() as u32 - 1
        };
        let mut seen = BTreeSet::new();
        let mut names = Vec::new();
        let mut out = Vec::new();
        for (name, [l, r, t, b]) in tiles {
            let tile = Tile {
                left: intern(l.as_ref()),
                right: intern(r.as_ref()),
                top: intern(t.as_ref()),
                bottom: intern(b.as_ref()),
            };
            if seen.insert(tile) {
                names.push(name);
                out.push(tile);
            }
        }
        if out.is_empty() {
            return Err(WangError::Empty);
        }
        Ok(TileSet {
            colors,
            names,
            tiles: out,
        })
    }

    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    pub fn tiles(&self) -> &[Tile] {
        &self.tiles
    }

    pub fn colors(&self) -> &[String] {
        &self.colors
    }

    pub fn color(&self, id: u32) -> &str {
        &self.colors[id as usize]
    }

    pub fn color_id(&self, name: &str) -> Option<u32> {
        self.colors.iter().position(|c| c == name).map(|i| i as u32)
    }

    pub fn name(&self, tile: usize) -> &str {
        &self.names[tile]
    }

    pub fn tile_id(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    fn named(&self) -> impl Iterator<Item = (String, [&str; 4])> + '_ {
        self.tiles.iter().zip(&self.names).map(|(t, n)| {
            (
                n.clone(),
                [self.color(t.left), self.color(t.right), self.color(t.top), self.color(t.bottom)],
            )
        })
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("colors {}\n", self.colors.join(" "));
        for (n, [l, r, t, b]) in self.named() {
            s.push_str(&format!("tile {n} l={l} r={r} t={t} b={b}\n"));
        }
        s
    }
}

/// Parses `colors c1 c2 ...` followed by `tile <id> l=<c> r=<c> t=<c> b=<c>`
/// lines. Blank lines and `#` comments are skipped.
pub fn parse_tileset(text: &str) -> Result<TileSet> {
    let mut declared: Option<Vec<String>> = None;
    let mut tiles = Vec::new();
    let mut ids = BTreeSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |msg: String| WangError::Parse { line, msg };
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut words = body.split_whitespace();
        match words.next() {
            Some("colors") => {
                if declared.is_some() {
                    return Err(err("colors declared twice".into()));
                }
                let cs: Vec<String> = words.map(str::to_string).collect();
                let unique: BTreeSet<&String> = cs.iter().collect();
                if unique.len() != cs.len() {
                    return Err(err("duplicate colour".into()));
                }
                declared = Some(cs);
            }
            Some("tile") => {
                let colors = declared
                    .as_ref()
                    .ok_or_else(|| err("tile before the colors line".into()))?;
                let id = words.next().ok_or_else(|| err("missing tile id".into()))?;
                if !ids.insert(id.to_string()) {
                    return Err(err(format!("duplicate tile id {id}")));
                }
                let mut sides: [Option<String>; 4] = Default::default();
                for w in words {
                    let (k, v) = w
                        .split_once('=')
                        .ok_or_else(|| err(format!("expected side=colour, got {w}")))?;
                    let slot = match k {
                        "l" => 0,
                        "r" => 1,
                        "t" => 2,
                        "b" => 3,
                        _ => return Err(err(format!("unknown side {k}"))),
                    };
                    if !colors.iter().any(|c| c == v) {
                        return Err(err(format!("undeclared colour {v}")));
                    }
                    if sides[slot].replace(v.to_string()).is_some() {
                        return Err(err(format!("side {k} given twice")));
                    }
                }
                let [l, r, t, b] = sides;
                match (l, r, t, b) {
                    (Some(l), Some(r), Some(t), Some(b)) => tiles.push((id.to_string(), [l, r, t, b])),
                    _ => return Err(err("a tile needs l, r, t and b".into())),
                }
            }
            Some(other) => return Err(err(format!("unknown directive {other}"))),
            None => {}
        }
    }
    TileSet::new(tiles)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Wrap {
    Free,
    Torus,
}

impl Wrap {
    pub fn parse(s: &str) -> Option<Wrap> {
        match s {
            "free" => Some(Wrap::Free),
            "torus" => Some(Wrap::Torus),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Left,
    Right,
    Top,
    Bottom,
}

/// A finite rectangle, optionally with prescribed colours on its outer edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    width: usize,
    height: usize,
    wrap: Wrap,
    boundary: BTreeMap<(Side, usize), u32>,
}

impl Region {
    pub fn new(width: usize, height: usize, wrap: Wrap) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(WangError::Region(format!("{width}x{height} has no cells")));
        }
        Ok(Region {
            width,
            height,
            wrap,
            boundary: BTreeMap::new(),
        })
    }

    pub fn free(width: usize, height: usize) -> Result<Self> {
        Region::new(width, height, Wrap::Free)
    }

    pub fn torus(width: usize, height: usize) -> Result<Self> {
        Region::new(width, height, Wrap::Torus)
    }

    /// Parses `WxH`.
    pub fn parse_size(s: &str) -> Option<(usize, usize)> {
        let (w, h) = s.split_once('x')?;
        Some((w.parse().ok()?, h.parse().ok()?))
    }

    /// Prescribes the colour on an outer edge; `pos` is the row for left and
    /// right edges and the column for top and bottom edges.
    pub fn with_constraint(mut self, side: Side, pos: usize, color: u32) -> Result<Self> {
        if self.wrap == Wrap::Torus {
            return Err(WangError::Region("torus regions have no boundary".into()));
        }
        let limit = match side {
            Side::Left | Side::Right => self.height,
            Side::Top | Side::Bottom => self.width,
        };
        if pos >= limit {
            return Err(WangError::Region(format!("{side:?} edge position {pos} out of range")));
        }
        self.boundary.insert((side, pos), color);
        Ok(self)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn wrap(&self) -> Wrap {
        self.wrap
    }

    pub fn constraint(&self, side: Side, pos: usize) -> Option<u32> {
        self.boundary.get(&(side, pos)).copied()
    }
}

/// Tile indices on a region, row-major from the bottom row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tiling {
    region: Region,
    cells: Vec<usize>,
}

impl Tiling {
    pub fn new(region: Region, cells: Vec<usize>) -> Result<Self> {
        if cells.len() != region.width * region.height {
            return Err(WangError::Region(format!(
                "{} cells for a {}x{} region",
                cells.len(),
                region.width,
                region.height
            )));
        }
        Ok(Tiling { region, cells })
    }

    pub(crate) fn new_unchecked(region: Region, cells: Vec<usize>) -> Self {
        Tiling { region, cells }
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn at(&self, x: usize, y: usize) -> usize {
        self.cells[y * self.region.width + x]
    }

    /// Rows from the top down, tile names separated by spaces.
    pub fn render(&self, ts: &TileSet) -> String {
        let mut s = String::new();
        for y in (0..self.region.height).rev() {
            let row: Vec<&str> = (0..self.region.width).map(|x| ts.name(self.at(x, y))).collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }
}

/// True when every abutting edge pair matches and the boundary holds.
pub fn validate(ts: &TileSet, t: &Tiling) -> bool {
    let (w, h) = (t.region.width, t.region.height);
    if t.cells.len() != w * h || t.cells.iter().any(|&c| c >= ts.len()) {
        return false;
    }
    let tile = |x: usize, y: usize| ts.tiles[t.at(x, y)];
    let torus = t.region.wrap == Wrap::Torus;
    for y in 0..h {
        for x in 0..w {
            let here = tile(x, y);
            if (x + 1 < w || torus) && here.right != tile((x + 1) % w, y).left {
                return false;
            }
            if (y + 1 < h || torus) && here.top != tile(x, (y + 1) % h).bottom {
                return false;
            }
        }
    }
    t.region.boundary.iter().all(|(&(side, pos), &c)| match side {
        Side::Left => tile(0, pos).left == c,
        Side::Right => tile(w - 1, pos).right == c,
        Side::Bottom => tile(pos, 0).bottom == c,
        Side::Top => tile(pos, h - 1).top == c,
    })
}

/// Colour name of the coordinate pair `(i, j)`.
pub fn coordinate_color(i: usize, j: usize) -> String {
    format!("{i},{j}")
}

/// The `N²` tiles over `(Z/N)²`: tile `(i, j)` has left = bottom = `(i, j)`,
/// right = `(i+1, j)`, top = `(i, j+1)`. Tile `(i, j)` has index `j·N + i`.
pub fn coordinate_tileset(n: usize) -> Result<TileSet> {
    if n < 2 {
        return Err(WangError::Region(format!("coordinate tiles need N >= 2, got {n}")));
    }
    let mut tiles = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let here = coordinate_color(i, j);
            tiles.push((
                format!("c{i}_{j}"),
                [here.clone(), coordinate_color((i + 1) % n, j), coordinate_color(i, (j + 1) % n), here],
            ));
        }
    }
    TileSet::new(tiles)
}

/// An internally colour-matched `N × N` block.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MacroTile {
    n: usize,
    cells: Vec<usize>,
}

impl MacroTile {
    pub fn new(ts: &TileSet, n: usize, cells: Vec<usize>) -> Result<Self> {
        let region = Region::free(n, n)?;
        let t = Tiling::new(region, cells)?;
        if !validate(ts, &t) {
            return Err(WangError::Map("block is not internally colour-matched".into()));
        }
        Ok(MacroTile { n, cells: t.cells })
    }

    pub fn zoom(&self) -> usize {
        self.n
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    fn at(&self, x: usize, y: usize) -> usize {
        self.cells[y * self.n + x]
    }

    /// Macro colours, bottom to top for left/right, left to right otherwise.
    pub fn left(&self, ts: &TileSet) -> Vec<u32> {
        (0..self.n).map(|y| ts.tiles[self.at(0, y)].left).collect()
    }

    pub fn right(&self, ts: &TileSet) -> Vec<u32> {
        (0..self.n).map(|y| ts.tiles[self.at(self.n - 1, y)].right).collect()
    }

    pub fn bottom(&self, ts: &TileSet) -> Vec<u32> {
        (0..self.n).map(|x| ts.tiles[self.at(x, 0)].bottom).collect()
    }

    pub fn top(&self, ts: &TileSet) -> Vec<u32> {
        (0..self.n).map(|x| ts.tiles[self.at(x, self.n - 1)].top).collect()
    }

    /// The block as a pattern over tile indices.
    pub fn to_pattern(&self, ts: &TileSet) -> Result<Pattern> {
        let alphabet = Arc::new(Alphabet::new(ts.names.iter().cloned())?);
        let n = self.n;
        Ok(Pattern::from_fn(alphabet, Window::rect(n, n)?, |p: Point| {
            self.at(p.x as usize, p.y as usize)
        })?)
    }
}

/// All macro tiles with zoom factor `n`, in search order.
pub fn macro_tiles(ts: &TileSet, n: usize, cap: usize) -> Result<Vec<MacroTile>> {
    let region = Region::free(n, n)?;
    Ok(solve(ts, &region, cap)?
        .into_iter()
        .map(|t| MacroTile { n, cells: t.cells })
        .collect())
}

/// Outcome of each clause of the simulation check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimulationReport {
    pub injective: bool,
    pub matching: bool,
    /// First offending pair `(a, b, horizontal?)` for the matching clause.
    pub matching_witness: Option<(usize, usize, bool)>,
    pub unique_split: bool,
    /// Torus multiples `k` that were fully searched.
    pub checked_k: Vec<usize>,
    /// The unique-split clause is checked on finitely many tori only; set when
    /// a cap cut the search short.
    pub truncated: bool,
    /// `(k, number of splits)` for the first torus tiling without exactly one.
    pub split_witness: Option<(usize, usize)>,
}

impl SimulationReport {
    pub fn passes(&self) -> bool {
        self.injective && self.matching && self.unique_split
    }
}

impl fmt::Display for SimulationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "injective={} matching={} unique_split={} (bounded, k<={}{})",
            self.injective,
            self.matching,
            self.unique_split,
            self.checked_k.last().copied().unwrap_or(0),
            if self.truncated { ", truncated" } else { "" }
        )
    }
}

/// Checks that `r` (one macro tile of `tau` per tile of `rho`) is a
/// simulation with zoom `n`: injective, matching-equivalent, and every legal
/// `tau`-tiling of a `kn × kn` torus (`k ≤ max_k`) splits uniquely into images.
pub fn verify_simulation(
    rho: &TileSet,
    tau: &TileSet,
    n: usize,
    r: &[MacroTile],
    max_k: usize,
    limit: usize,
) -> Result<SimulationReport> {
    if r.len() != rho.len() {
        return Err(WangError::Map(format!("{} images for {} tiles", r.len(), rho.len())));
    }
    if let Some(m) = r.iter().find(|m| m.n != n) {
        return Err(WangError::Map(format!("image with zoom {} instead of {n}", m.n)));
    }
    let distinct: BTreeSet<&[usize]> = r.iter().map(|m| m.cells.as_slice()).collect();
    let injective = distinct.len() == r.len();

    let mut matching_witness = None;
    'outer: for a in 0..rho.len() {
        for b in 0..rho.len() {
            let (ta, tb) = (rho.tiles[a], rho.tiles[b]);
            let h = (ta.right == tb.left) == (r[a].right(tau) == r[b].left(tau));
            let v = (ta.top == tb.bottom) == (r[a].top(tau) == r[b].bottom(tau));
            if !h || !v {
                matching_witness = Some((a, b, !h));
                break 'outer;
            }
        }
    }

    let images: HashMap<&[usize], usize> =
        r.iter().enumerate().map(|(i, m)| (m.cells.as_slice(), i)).collect();
    let mut checked_k = Vec::new();
    let mut truncated = false;
    let mut split_witness = None;
    for k in 1..=max_k {
        let size = k * n;
        let tilings = match solve(tau, &Region::torus(size, size)?, limit) {
            Ok(t) => t,
            Err(e) if e.is_resource() => {
                truncated = true;
                break;
            }
            Err(e) => return Err(e),
        };
        for t in &tilings {
            let splits = (0..n * n)
                .filter(|&off| {
                    let (dx, dy) = (off % n, off / n);
                    (0..k * k).all(|blk| {
                        let (bx, by) = (blk % k, blk / k);
                        let cells: Vec<usize> = (0..n * n)
                            .map(|c| {
                                let x = (dx + bx * n + c % n) % size;
                                let y = (dy + by * n + c / n) % size;
                                t.at(x, y)
                            })
                            .collect();
                        images.contains_key(cells.as_slice())
                    })
                })
                .count();
            if splits != 1 {
                split_witness = Some((k, splits));
                break;
            }
        }
        checked_k.push(k);
        if split_witness.is_some() {
            break;
        }
    }
    Ok(SimulationReport {
        injective,
        matching: matching_witness.is_none(),
        matching_witness,
        unique_split: split_witness.is_none(),
        checked_k,
        truncated,
        split_witness,
    })
}

/// Parses a simulation map: `map <rho-tile> <tau-tile> ...` with `N²` tau
/// tile ids per line, row-major from the bottom row.
pub fn parse_map(text: &str, rho: &TileSet, tau: &TileSet, n: usize) -> Result<Vec<MacroTile>> {
    let mut out: Vec<Option<MacroTile>> = vec![None; rho.len()];
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |msg: String| WangError::Parse { line, msg };
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut words = body.split_whitespace();
        if words.next() != Some("map") {
            return Err(err("expected `map`".into()));
        }
        let src = words.next().ok_or_else(|| err("missing rho tile".into()))?;
        let a = rho.tile_id(src).ok_or_else(|| err(format!("unknown rho tile {src}")))?;
        let cells = words
            .map(|w| tau.tile_id(w).ok_or_else(|| err(format!("unknown tau tile {w}"))))
            .collect::<Result<Vec<_>>>()?;
        if cells.len() != n * n {
            return Err(err(format!("expected {} tiles, got {}", n * n, cells.len())));
        }
        let m = MacroTile::new(tau, n, cells).map_err(|e| err(e.to_string()))?;
        if out[a].replace(m).is_some() {
            return Err(err(format!("rho tile {src} mapped twice")));
        }
    }
    out.into_iter()
        .enumerate()
        .map(|(a, m)| m.ok_or_else(|| WangError::Map(format!("rho tile {} has no image", rho.name(a)))))
        .collect()
}

/// The coordinate macro tile: tile `(i, j)` at position `(i, j)`.
pub fn coordinate_macro_tile(tau: &TileSet, n: usize) -> Result<MacroTile> {
    MacroTile::new(tau, n, (0..n * n).collect())
}

/// Colour standing for "no neighbour" on the left and bottom borders.
pub const BORDER: &str = "#";

/// Wang encoding of a two-dimensional nearest-neighbour SFT.
#[derive(Debug, Clone)]
pub struct WangEncoding {
    pub tiles: TileSet,
    /// SFT symbol carried by each tile.
    pub symbol: Vec<usize>,
    pub alphabet: Arc<Alphabet>,
}

impl WangEncoding {
    /// The region whose tilings biject with configurations on `w × h`: on a
    /// free region the left and bottom borders carry [`BORDER`].
    pub fn region(&self, w: usize, h: usize, wrap: Wrap) -> Result<Region> {
        let mut r = Region::new(w, h, wrap)?;
        if wrap == Wrap::Free {
            let b = self.tiles.color_id(BORDER).expect("border colour present");
            for y in 0..h {
                r = r.with_constraint(Side::Left, y, b)?;
            }
            for x in 0..w {
                r = r.with_constraint(Side::Bottom, x, b)?;
            }
        }
        Ok(r)
    }

    /// The configuration a tiling encodes, row-major from the bottom.
    pub fn decode(&self, t: &Tiling) -> Vec<usize> {
        t.cells().iter().map(|&c| self.symbol[c]).collect()
    }
}

/// Converts an SFT given by dominoes (1×2 and 2×1 patterns) and single
/// symbols into Wang tiles.
///
/// A tile carries its symbol `a` on its right and top edges and, on its left
/// and bottom edges, the symbol of the neighbour it accepts there (or
/// [`BORDER`]). Any other rectangular forbidden pattern is first recoded with
/// [`recode_to_dominoes`].
pub fn sft_to_wang(f: &ForbiddenSet) -> Result<WangEncoding> {
    if f.dim() == Some(1) {
        return Err(WangError::Conversion("expected a two-dimensional forbidden set".into()));
    }
    let alphabet = f.alphabet().clone();
    let q = alphabet.len();
    let mut single = vec![false; q];
    let mut horiz = vec![vec![true; q]; q];
    let mut vert = vec![vec![true; q]; q];
    for p in f.patterns() {
        let (w, h) = (p.window().width(), p.window().height());
        if !p.window().is_rectangle() || !matches!((w, h), (1, 1) | (2, 1) | (1, 2)) {
            return Err(WangError::Conversion(format!(
                "pattern of shape {w}x{h} is not a domino; recode first"
            )));
        }
        let s = p.symbols();
        match (w, h) {
            (1, 1) => single[s[0]] = true,
            (2, 1) => horiz[s[0]][s[1]] = false,
            _ => vert[s[0]][s[1]] = false,
        }
    }
    let name = |s: usize| alphabet.symbol(s).to_string();
    let mut tiles = Vec::new();
    let mut symbol = Vec::new();
    for a in (0..q).filter(|&a| !single[a]) {
        let lefts: Vec<String> = std::iter::once(BORDER.to_string())
            .chain((0..q).filter(|&x| !single[x] && horiz[x][a]).map(name))
            .collect();
        let belows: Vec<String> = std::iter::once(BORDER.to_string())
            .chain((0..q).filter(|&y| !single[y] && vert[y][a]).map(name))
            .collect();
        for l in &lefts {
            for b in &belows {
                tiles.push((format!("{}[{l}|{b}]", name(a)), [l.clone(), name(a), name(a), b.clone()]));
                symbol.push(a);
            }
        }
    }
    if tiles.is_empty() {
        return Err(WangError::Conversion("every symbol is forbidden".into()));
    }
    Ok(WangEncoding {
        tiles: TileSet::new(tiles)?,
        symbol,
        alphabet,
    })
}

/// Higher-block recoding: the new alphabet is the admissible `w × h` blocks,
/// where `w × h` bounds every forbidden pattern, and overlapping neighbours
/// must agree. Configurations of the recoded SFT on a `W × H` region
/// correspond to admissible configurations on `(W+w−1) × (H+h−1)`.
pub fn recode_to_dominoes(f: &ForbiddenSet) -> Result<ForbiddenSet> {
    let w = f.patterns().iter().map(|p| p.window().width()).max().unwrap_or(1);
    let h = f.patterns().iter().map(|p| p.window().height()).max().unwrap_or(1);
    let blocks = enumerate_admissible(f, &Window::rect(w, h)?, DEFAULT_ENUM_CAP)?;
    if blocks.is_empty() {
        return Err(WangError::Conversion("no admissible block".into()));
    }
    let names: Vec<String> = (0..blocks.len()).map(|i| format!("b{i}")).collect();
    let alphabet = Arc::new(Alphabet::new(names)?);
    let at = |b: &Pattern, x: usize, y: usize| b.at(Point::new(x as i64, y as i64)).expect("inside block");
    let mut forbidden = Vec::new();
    for (i, a) in blocks.iter().enumerate() {
        for (j, b) in blocks.iter().enumerate() {
            let h_ok = (0..h).all(|y| (1..w).all(|x| at(a, x, y) == at(b, x - 1, y)));
            let v_ok = (0..w).all(|x| (1..h).all(|y| at(a, x, y) == at(b, x, y - 1)));
            if !h_ok {
                forbidden.push(Pattern::from_rows(alphabet.clone(), &[vec![i, j]])?);
            }
            if !v_ok {
                forbidden.push(Pattern::new(
                    alphabet.clone(),
                    Window::rect(1, 2)?,
                    vec![i, j],
                )?);
            }
        }
    }
    Ok(ForbiddenSet::new(alphabet, forbidden)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::{count_admissible_brute, parse_forbidden};

    fn mono() -> TileSet {
        TileSet::new([("m".to_string(), ["a", "a", "a", "a"])]).unwrap()
    }

    fn golden_2d() -> ForbiddenSet {
        parse_forbidden("alphabet 0 1\ndim 2\npat 2x1 11\npat 1x2 1;1\n").unwrap()
    }

    #[test]
    fn validation_examples() {
        let ts = mono();
        let t = Tiling::new(Region::free(3, 3).unwrap(), vec![0; 9]).unwrap();
        assert!(validate(&ts, &t));
        let ts = TileSet::new([
            ("a".to_string(), ["x", "y", "z", "z"]),
            ("b".to_string(), ["x", "y", "z", "z"]),
            ("c".to_string(), ["w", "w", "z", "z"]),
        ])
        .unwrap();
        assert_eq!(ts.len(), 2);
        let t = Tiling::new(Region::free(2, 1).unwrap(), vec![0, 1]).unwrap();
        assert!(!validate(&ts, &t));
        let coord = coordinate_tileset(2).unwrap();
        let t = Tiling::new(Region::torus(2, 2).unwrap(), vec![0, 1, 2, 3]).unwrap();
        assert!(validate(&coord, &t));
        let t = Tiling::new(Region::torus(2, 2).unwrap(), vec![1, 0, 3, 2]).unwrap();
        assert!(validate(&coord, &t));
        let t = Tiling::new(Region::torus(2, 2).unwrap(), vec![0, 0, 2, 2]).unwrap();
        assert!(!validate(&coord, &t));
    }

    #[test]
    fn coordinate_tiles_follow_the_rule() {
        let ts = coordinate_tileset(2).unwrap();
        assert_eq!(ts.len(), 4);
        let t = ts.tiles()[0];
        assert_eq!(ts.color(t.left), "0,0");
        assert_eq!(ts.color(t.bottom), "0,0");
        assert_eq!(ts.color(t.right), "1,0");
        assert_eq!(ts.color(t.top), "0,1");
        assert!(coordinate_tileset(1).is_err());
    }

    #[test]
    fn solver_examples() {
        assert_eq!(solve(&mono(), &Region::free(4, 3).unwrap(), 10).unwrap().len(), 1);
        let ts = TileSet::new([
            ("a".to_string(), ["x", "y", "z", "z"]),
            ("b".to_string(), ["x", "w", "z", "z"]),
        ])
        .unwrap();
        assert!(solve(&ts, &Region::free(2, 1).unwrap(), 10).unwrap().is_empty());
        let coord = coordinate_tileset(2).unwrap();
        let all = solve(&coord, &Region::free(2, 2).unwrap(), 10).unwrap();
        assert_eq!(all.len(), 4);
        assert!(all.iter().all(|t| validate(&coord, t)));
        assert_eq!(all[0].cells(), &[0, 1, 2, 3]);
        let e = solve(&coord, &Region::free(2, 2).unwrap(), 3).unwrap_err();
        assert!(matches!(e, WangError::Overflow { .. }) && e.is_resource());
    }

    #[test]
    fn transfer_examples() {
        let coord = coordinate_tileset(3).unwrap();
        for wrap in [Wrap::Free, Wrap::Torus] {
            let r = Region::new(3, 3, wrap).unwrap();
            assert_eq!(count_by_transfer(&coord, &r, DEFAULT_COLUMN_CAP).unwrap(), 9u32.into());
        }
        // A torus whose side is not a multiple of N admits no tiling.
        let r = Region::torus(4, 3).unwrap();
        assert_eq!(count_by_transfer(&coord, &r, DEFAULT_COLUMN_CAP).unwrap(), 0u32.into());
        assert_eq!(count_tilings(&coord, &r, 100).unwrap(), 0);
        assert_eq!(count_by_transfer(&mono(), &Region::free(5, 2).unwrap(), 10).unwrap(), 1u32.into());
    }

    #[test]
    fn boundary_constraints_are_respected() {
        let coord = coordinate_tileset(3).unwrap();
        let c = coord.color_id("2,1").unwrap();
        let r = Region::free(3, 3).unwrap().with_constraint(Side::Left, 0, c).unwrap();
        let sols = solve(&coord, &r, 10).unwrap();
        assert_eq!(sols.len(), 1);
        assert!(validate(&coord, &sols[0]));
        assert_eq!(count_by_transfer(&coord, &r, 100).unwrap(), 1u32.into());
        assert!(Region::torus(2, 2).unwrap().with_constraint(Side::Top, 0, 0).is_err());
    }

    #[test]
    fn macro_tile_examples() {
        assert_eq!(macro_tiles(&mono(), 2, 10).unwrap().len(), 1);
        let coord = coordinate_tileset(3).unwrap();
        assert_eq!(macro_tiles(&coord, 3, 100).unwrap().len(), 9);
        let ones = macro_tiles(&coord, 1, 100).unwrap();
        assert_eq!(ones.iter().map(|m| m.cells()[0]).collect::<Vec<_>>(), (0..9).collect::<Vec<_>>());
        // Only "a b" is a legal horizontal neighbour pair besides a-a.
        let ts = TileSet::new([
            ("a".to_string(), ["p", "p", "v", "v"]),
            ("b".to_string(), ["p", "q", "v", "v"]),
        ])
        .unwrap();
        let blocks = macro_tiles(&ts, 2, 100).unwrap();
        // Each row is aa or ab, rows independent.
        assert_eq!(blocks.len(), 4);
    }

    #[test]
    fn coordinate_simulation() {
        let rho = TileSet::new([("zero".to_string(), ["0", "0", "0", "0"])]).unwrap();
        for n in 2..=3 {
            let tau = coordinate_tileset(n).unwrap();
            let m = coordinate_macro_tile(&tau, n).unwrap();
            assert_eq!(
                m.bottom(&tau).iter().map(|&c| tau.color(c).to_string()).collect::<Vec<_>>(),
                (0..n).map(|i| coordinate_color(i, 0)).collect::<Vec<_>>()
            );
            assert_eq!(m.left(&tau), m.right(&tau));
            let rep = verify_simulation(&rho, &tau, n, &[m], 2, 1000).unwrap();
            assert!(rep.passes(), "{rep}");
            assert_eq!(rep.checked_k, vec![1, 2]);
        }
    }

    #[test]
    fn simulation_failures_are_reported() {
        let tau = coordinate_tileset(2).unwrap();
        let m = coordinate_macro_tile(&tau, 2).unwrap();
        let rho = TileSet::new([
            ("p".to_string(), ["0", "0", "0", "0"]),
            ("q".to_string(), ["1", "1", "1", "1"]),
        ])
        .unwrap();
        let rep = verify_simulation(&rho, &tau, 2, &[m.clone(), m.clone()], 1, 100).unwrap();
        assert!(!rep.injective);
        // A rogue monochrome tile tiles every torus without any grid.
        let mut named: Vec<(String, [String; 4])> = tau
            .named()
            .map(|(n, cs)| (n, cs.map(str::to_string)))
            .collect();
        named.push(("rogue".into(), ["x", "x", "x", "x"].map(String::from)));
        let rogue = TileSet::new(named).unwrap();
        let single = TileSet::new([("zero".to_string(), ["0", "0", "0", "0"])]).unwrap();
        let m = coordinate_macro_tile(&rogue, 2).unwrap();
        let rep = verify_simulation(&single, &rogue, 2, &[m], 2, 1000).unwrap();
        assert!(rep.injective && rep.matching && !rep.unique_split);
        assert_eq!(rep.split_witness, Some((1, 0)));
    }

    #[test]
    fn tileset_text_round_trip() {
        let coord = coordinate_tileset(2).unwrap();
        let text = coord.to_text();
        assert!(text.starts_with("colors 0,0 1,0 0,1 1,1\n"));
        assert_eq!(parse_tileset(&text).unwrap(), coord);
        let e = parse_tileset("colors a\ntile x l=a r=a t=a\n").unwrap_err();
        assert!(matches!(e, WangError::Parse { line: 2, .. }));
        let e = parse_tileset("colors a\ntile x l=a r=a t=a b=z\n").unwrap_err();
        assert!(matches!(e, WangError::Parse { line: 2, .. }));
        assert!(matches!(parse_tileset("colors a\n"), Err(WangError::Empty)));
    }

    #[test]
    fn map_file() {
        let tau = coordinate_tileset(2).unwrap();
        let rho = TileSet::new([("zero".to_string(), ["0", "0", "0", "0"])]).unwrap();
        let r = parse_map("map zero c0_0 c1_0 c0_1 c1_1\n", &rho, &tau, 2).unwrap();
        assert_eq!(r[0], coordinate_macro_tile(&tau, 2).unwrap());
        assert!(parse_map("map zero c0_0 c0_0 c0_1 c1_1\n", &rho, &tau, 2).is_err());
        assert!(parse_map("", &rho, &tau, 2).is_err());
    }

    #[test]
    fn golden_mean_as_wang_shift() {
        let f = golden_2d();
        let enc = sft_to_wang(&f).unwrap();
        // 0 accepts {#, 0, 1} on both sides, 1 accepts {#, 0}.
        assert_eq!(enc.tiles.len(), 9 + 4);
        for (w, h, expect) in [(2, 2, 7u32), (3, 3, 63)] {
            let r = enc.region(w, h, Wrap::Free).unwrap();
            let sols = solve(&enc.tiles, &r, 1000).unwrap();
            assert_eq!(sols.len() as u32, expect);
            assert_eq!(count_by_transfer(&enc.tiles, &r, DEFAULT_COLUMN_CAP).unwrap(), expect.into());
            let direct = count_admissible_brute(&f, &Window::rect(w, h).unwrap(), DEFAULT_ENUM_CAP).unwrap();
            assert_eq!(direct, expect.into());
            let configs: BTreeSet<Vec<usize>> = sols.iter().map(|t| enc.decode(t)).collect();
            assert_eq!(configs.len(), sols.len());
        }
        // On a torus the border tiles cannot appear.
        let r = enc.region(2, 2, Wrap::Torus).unwrap();
        let torus = solve(&enc.tiles, &r, 1000).unwrap();
        // Configurations on the 2×2 torus with no two adjacent ones: 0000,
        // the four singletons and the two diagonals.
        assert_eq!(torus.len(), 7);
    }

    #[test]
    fn conversion_edge_cases() {
        let a = Arc::new(Alphabet::new(["a"]).unwrap());
        let f = ForbiddenSet::empty(a.clone());
        let enc = sft_to_wang(&f).unwrap();
        let r = enc.region(3, 2, Wrap::Free).unwrap();
        assert_eq!(solve(&enc.tiles, &r, 10).unwrap().len(), 1);
        let all = parse_forbidden("alphabet 0 1\ndim 2\npat 1x1 0\npat 1x1 1\n").unwrap();
        assert!(matches!(sft_to_wang(&all), Err(WangError::Conversion(_))));
        let square = parse_forbidden("alphabet 0 1\ndim 2\npat 2x2 11;11\n").unwrap();
        assert!(matches!(sft_to_wang(&square), Err(WangError::Conversion(_))));
    }

    #[test]
    fn recoded_square_pattern() {
        // Forbid the all-ones 2×2 square; recode to dominoes over 2×2 blocks.
        let f = parse_forbidden("alphabet 0 1\ndim 2\npat 2x2 11;11\n").unwrap();
        let d = recode_to_dominoes(&f).unwrap();
        assert_eq!(d.alphabet().len(), 15);
        let enc = sft_to_wang(&d).unwrap();
        // Recoded 2×1 region ↔ admissible 3×2 configurations.
        let r = enc.region(2, 1, Wrap::Free).unwrap();
        let n = count_by_transfer(&enc.tiles, &r, DEFAULT_COLUMN_CAP).unwrap();
        let direct = count_admissible_brute(&f, &Window::rect(3, 2).unwrap(), DEFAULT_ENUM_CAP).unwrap();
        assert_eq!(n, direct);
    }
}
