//! One level of the macro-tile layout: coordinate tiles with a decoration
//! layer that carries the four boundary strings along wires to a computation
//! zone where a checker runs.
//!
//! Geometry for zoom `N`, `ℓ` bits per side and `m = ⌊(N − ℓ)/2⌋`:
//!
//! * side bits sit on the middle `ℓ` positions `m..m+ℓ` of each side;
//! * each bit has its own track row above row `m + ℓ`, reached through its
//!   own column, and turns up into the zone's feeder row at its input index;
//! * wires may cross (one horizontal and one vertical wire per cell) but
//!   never share a tile side;
//! * the zone runs the compiled checker for `budget` rows, topped by a sink
//!   row that accepts any configuration.

use std::collections::HashMap;

use super::compile::{compile_tm, QUIET};
use super::{cell_label, Cell, Result, TmError, TmSpec};
use crate::wang::{count_tilings, coordinate_color, solve, Region, Side, TileSet, Tiling};

/// Decoration on outer sides that carry no bit.
const FILLER: &str = "0";
/// Spare blank cells to the right of the zone input.
const PAD: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Geometry {
    n: usize,
    ell: usize,
    m: usize,
    zx: usize,
    zw: usize,
    track0: usize,
    feeder: usize,
    sink: usize,
}

fn geometry(n: usize, ell: usize, budget: usize) -> Option<Geometry> {
    if ell == 0 || budget == 0 || n < ell + 2 {
        return None;
    }
    let m = (n - ell) / 2;
    let zw = 4 * ell + PAD;
    let zx = m + ell + 1;
    let track0 = m + ell + 1;
    let feeder = track0 + 4 * ell;
    let sink = feeder + 1 + budget;
    let last_v = zx + zw + ell;
    let fits = ell < m && last_v <= n - 2 && sink <= n - 2;
    fits.then_some(Geometry {
        n,
        ell,
        m,
        zx,
        zw,
        track0,
        feeder,
        sink,
    })
}

/// Smallest zoom factor hosting `ell` bits per side and `budget` steps.
pub fn min_zoom(ell: usize, budget: usize) -> usize {
    (2..)
        .find(|&n| geometry(n, ell, budget).is_some())
        .expect("large zooms always fit")
}

// Side slots: left, right, top, bottom.
const L: usize = 0;
const R: usize = 1;
const T: usize = 2;
const B: usize = 3;

fn opposite(s: usize) -> usize {
    [R, L, B, T][s]
}

/// Wire paths as cell sequences with the entry side of the first cell.
fn wires(g: &Geometry) -> Vec<(usize, Vec<(usize, usize)>)> {
    let ell = g.ell;
    let mut out = Vec::new();
    let seg = |path: &mut Vec<(usize, usize)>, to: (usize, usize)| {
        let mut cur = *path.last().expect("path starts somewhere");
        while cur != to {
            cur.0 = step_toward(cur.0, to.0);
            if cur.0 == to.0 {
                cur.1 = step_toward(cur.1, to.1);
            }
            path.push(cur);
        }
    };
    // Input order is bottom, left, top, right; tracks stack bottom, left,
    // right, top from low to high.
    for k in 0..ell {
        let (idx, t) = (k, g.track0 + k);
        let mut p = vec![(g.m + k, 0)];
        seg(&mut p, (g.m + k, t));
        seg(&mut p, (g.zx + idx, t));
        seg(&mut p, (g.zx + idx, g.feeder));
        out.push((B, p));
    }
    for k in 0..ell {
        let (idx, t, u) = (ell + k, g.track0 + ell + k, 1 + k);
        let mut p = vec![(0, g.m + k)];
        seg(&mut p, (u, g.m + k));
        seg(&mut p, (u, t));
        seg(&mut p, (g.zx + idx, t));
        seg(&mut p, (g.zx + idx, g.feeder));
        out.push((L, p));
    }
    for k in 0..ell {
        let (idx, t) = (2 * ell + k, g.track0 + 3 * ell + k);
        let mut p = vec![(g.m + k, g.n - 1)];
        seg(&mut p, (g.m + k, t));
        seg(&mut p, (g.zx + idx, t));
        seg(&mut p, (g.zx + idx, g.feeder));
        out.push((T, p));
    }
    for k in 0..ell {
        let (idx, t, v) = (3 * ell + k, g.track0 + 2 * ell + k, g.zx + g.zw + 1 + k);
        let mut p = vec![(g.n - 1, g.m + k)];
        seg(&mut p, (v, g.m + k));
        seg(&mut p, (v, t));
        seg(&mut p, (g.zx + idx, t));
        seg(&mut p, (g.zx + idx, g.feeder));
        out.push((R, p));
    }
    out
}

fn step_toward(a: usize, b: usize) -> usize {
    match a.cmp(&b) {
        std::cmp::Ordering::Less => a + 1,
        std::cmp::Ordering::Greater => a - 1,
        std::cmp::Ordering::Equal => a,
    }
}

fn side_between(a: (usize, usize), b: (usize, usize)) -> usize {
    if b.0 > a.0 {
        R
    } else if b.0 < a.0 {
        L
    } else if b.1 > a.1 {
        T
    } else {
        B
    }
}

/// The assembled tile set with everything needed to pose one block.
#[derive(Debug, Clone)]
pub struct MacroLayout {
    pub tiles: TileSet,
    pub zoom: usize,
    pub ell: usize,
    pub budget: usize,
    geom: Geometry,
}

/// Builds the product tile set (coordinate tiles × decoration) for zoom `n`,
/// `ell` bits per side and a checker run of `budget` steps.
pub fn assemble_macrotile(n: usize, ell: usize, checker: &TmSpec, budget: usize) -> Result<MacroLayout> {
    let Some(g) = geometry(n, ell, budget) else {
        let min = if ell == 0 || budget == 0 { 0 } else { min_zoom(ell, budget) };
        return Err(TmError::Layout { n, min });
    };
    let bit = |b: usize| -> Result<usize> {
        checker
            .symbol_id(&b.to_string())
            .ok_or_else(|| TmError::Input(format!("checker has no symbol {b}")))
    };
    let bits = [bit(0)?, bit(1)?];
    let compiled = compile_tm(checker)?;

    // Which wire uses which side of which cell.
    let mut sides: HashMap<(usize, usize), [Option<usize>; 4]> = HashMap::new();
    let wires = wires(&g);
    for (w, (entry, path)) in wires.iter().enumerate() {
        let mut claim = |cell: (usize, usize), s: usize| -> Result<()> {
            let slot = &mut sides.entry(cell).or_default()[s];
            if slot.replace(w).is_some() {
                return Err(TmError::Invalid(format!("wires collide at {cell:?}")));
            }
            Ok(())
        };
        claim(path[0], *entry)?;
        for pair in path.windows(2) {
            let s = side_between(pair[0], pair[1]);
            claim(pair[0], s)?;
            claim(pair[1], opposite(s))?;
        }
        claim(*path.last().expect("nonempty"), T)?;
    }
    let in_zone = |x: usize, y: usize| x >= g.zx && x < g.zx + g.zw && y > g.feeder && y <= g.sink;
    if sides.keys().any(|&(x, y)| in_zone(x, y)) {
        return Err(TmError::Invalid("a wire enters the computation zone".into()));
    }

    let tm_tiles = compiled.tiles.tiles();
    let tm_color = |c: u32| compiled.tiles.color(c).to_string();
    let vertical: Vec<String> = {
        let mut v: Vec<String> = tm_tiles.iter().map(|t| tm_color(t.top)).collect();
        v.sort();
        v.dedup();
        v
    };
    let start_label = |b: usize| {
        cell_label(
            checker,
            Cell {
                symbol: bits[b],
                head: Some(checker.start()),
            },
        )
    };

    let mut named: Vec<(String, [String; 4])> = Vec::new();
    for y in 0..n {
        for x in 0..n {
            let coord = [
                coordinate_color(x, y),
                coordinate_color((x + 1) % n, y),
                coordinate_color(x, (y + 1) % n),
                coordinate_color(x, y),
            ];
            let mut push = |variant: String, deco: [String; 4]| {
                let cs: [String; 4] = std::array::from_fn(|s| format!("{}|{}", coord[s], deco[s]));
                named.push((format!("{x},{y}:{variant}"), cs));
            };
            if x >= g.zx && x < g.zx + g.zw && y > g.feeder && y < g.sink {
                for (i, t) in tm_tiles.iter().enumerate() {
                    push(
                        format!("z{i}"),
                        [tm_color(t.left), tm_color(t.right), tm_color(t.top), tm_color(t.bottom)],
                    );
                }
                continue;
            }
            if x >= g.zx && x < g.zx + g.zw && y == g.sink {
                for (i, c) in vertical.iter().enumerate() {
                    push(format!("s{i}"), [QUIET.into(), QUIET.into(), QUIET.into(), c.clone()]);
                }
                continue;
            }
            let outer = [x == 0, x == n - 1, y == n - 1, y == 0];
            let used = sides.get(&(x, y)).copied().unwrap_or_default();
            let mut present: Vec<usize> = used.iter().flatten().copied().collect();
            present.sort();
            present.dedup();
            let feeder_pad = y == g.feeder && x >= g.zx + 4 * ell && x < g.zx + g.zw;
            for assign in 0..(1usize << present.len()) {
                let bit_of = |w: usize| {
                    let i = present.iter().position(|&p| p == w).expect("present");
                    assign >> i & 1
                };
                let deco: [String; 4] = std::array::from_fn(|s| match used[s] {
                    Some(w) if s == T && y == g.feeder && x >= g.zx => {
                        let idx = x - g.zx;
                        if idx == 0 {
                            start_label(bit_of(w))
                        } else {
                            checker.symbols()[bits[bit_of(w)]].clone()
                        }
                    }
                    Some(w) => bit_of(w).to_string(),
                    None if s == T && feeder_pad => checker.symbols()[checker.blank()].clone(),
                    None if outer[s] => FILLER.into(),
                    None => QUIET.into(),
                });
                push(format!("d{assign}"), deco);
            }
        }
    }
    Ok(MacroLayout {
        tiles: TileSet::new(named)?,
        zoom: n,
        ell,
        budget,
        geom: g,
    })
}

impl MacroLayout {
    /// Offset of the first side bit from the corner (the middle `ℓ` slots).
    pub fn middle_offset(&self) -> usize {
        self.geom.m
    }

    /// The `N × N` block with macro colours `io = [bottom, left, top, right]`,
    /// or `None` when some edge colour cannot occur.
    pub fn region(&self, io: &[Vec<u8>; 4]) -> Result<Option<Region>> {
        let (n, m, ell) = (self.zoom, self.geom.m, self.ell);
        if io.iter().any(|s| s.len() != ell || s.iter().any(|&b| b > 1)) {
            return Err(TmError::Input(format!("each side needs {ell} bits")));
        }
        let deco = |side: usize, pos: usize| -> String {
            if pos >= m && pos < m + ell {
                io[side][pos - m].to_string()
            } else {
                FILLER.into()
            }
        };
        let mut r = Region::free(n, n)?;
        for pos in 0..n {
            for (side, which, coord) in [
                (0, Side::Bottom, coordinate_color(pos, 0)),
                (1, Side::Left, coordinate_color(0, pos)),
                (2, Side::Top, coordinate_color(pos, 0)),
                (3, Side::Right, coordinate_color(0, pos)),
            ] {
                let Some(c) = self.tiles.color_id(&format!("{coord}|{}", deco(side, pos))) else {
                    return Ok(None);
                };
                r = r.with_constraint(which, pos, c)?;
            }
        }
        Ok(Some(r))
    }

    /// Number of legal blocks with the given macro colours.
    pub fn count_blocks(&self, io: &[Vec<u8>; 4], cap: u128) -> Result<u128> {
        match self.region(io)? {
            None => Ok(0),
            Some(r) => Ok(count_tilings(&self.tiles, &r, cap)?),
        }
    }

    pub fn solve_block(&self, io: &[Vec<u8>; 4]) -> Result<Option<Tiling>> {
        match self.region(io)? {
            None => Ok(None),
            Some(r) => Ok(solve(&self.tiles, &r, 4)?.into_iter().next()),
        }
    }

    /// What the zone's first row receives in a solved block: the top
    /// decorations of the feeder row.
    pub fn zone_input(&self, t: &Tiling) -> Vec<String> {
        (self.geom.zx..self.geom.zx + self.geom.zw)
            .map(|x| {
                let c = self.tiles.tiles()[t.at(x, self.geom.feeder)].top;
                let name = self.tiles.color(c);
                name.split_once('|').map_or(name, |(_, d)| d).to_string()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::super::{machines, parse_tm};
    use super::*;

    fn io(b: &[u8], l: &[u8], t: &[u8], r: &[u8]) -> [Vec<u8>; 4] {
        [b.to_vec(), l.to_vec(), t.to_vec(), r.to_vec()]
    }

    #[test]
    fn minimum_zoom_is_enforced() {
        let tm = parse_tm(machines::ALWAYS_ACCEPT).unwrap();
        let min = min_zoom(1, 2);
        assert!(geometry(min, 1, 2).is_some() && geometry(min - 1, 1, 2).is_none());
        match assemble_macrotile(min - 1, 1, &tm, 2) {
            Err(TmError::Layout { n, min: m }) => assert_eq!((n, m), (min - 1, min)),
            other => panic!("expected a layout error, got {other:?}"),
        }
    }

    #[test]
    fn accepting_checker_has_a_block_and_wires_deliver() {
        let tm = parse_tm(machines::ALWAYS_ACCEPT).unwrap();
        let n = min_zoom(1, 2);
        let lay = assemble_macrotile(n, 1, &tm, 2).unwrap();
        for (b, l, t, r) in [(0, 0, 0, 0), (1, 0, 1, 1), (0, 1, 1, 0)] {
            let c = io(&[b], &[l], &[t], &[r]);
            assert_eq!(lay.count_blocks(&c, 8).unwrap(), 1);
            let block = lay.solve_block(&c).unwrap().unwrap();
            assert_eq!(
                lay.zone_input(&block),
                vec![format!("q0:{b}"), l.to_string(), t.to_string(), r.to_string(), "_".into()]
            );
        }
    }

    #[test]
    fn rejected_inputs_have_no_block() {
        let tm = parse_tm(machines::REJECT_FIRST_ONE).unwrap();
        let n = min_zoom(2, 2);
        let lay = assemble_macrotile(n, 2, &tm, 2).unwrap();
        assert_eq!(lay.count_blocks(&io(&[1, 0], &[0, 0], &[0, 0], &[0, 0]), 8).unwrap(), 0);
        assert_eq!(lay.count_blocks(&io(&[0, 1], &[1, 1], &[0, 1], &[1, 0]), 8).unwrap(), 1);
        let block = lay.solve_block(&io(&[0, 1], &[1, 1], &[0, 1], &[1, 0])).unwrap().unwrap();
        assert_eq!(lay.zone_input(&block)[..8].join(""), "q0:01110110");
    }
}
