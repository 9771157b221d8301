use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::{Region, Result, Side, TileSet, Tiling, WangError, Wrap};
use crate::exec;

/// Default cap on the number of tilings `solve` will return.
pub const DEFAULT_SOLVE_LIMIT: usize = 1 << 16;
/// Default cap on region area for the search.
pub const DEFAULT_AREA_CAP: usize = 4096;
/// Default cap on column states in transfer counting.
pub const DEFAULT_COLUMN_CAP: usize = 1 << 20;

/// Domains are bitsets over tile indices, one block of `words` per cell.
struct Problem<'a> {
    ts: &'a TileSet,
    w: usize,
    h: usize,
    torus: bool,
    words: usize,
    by_left: Vec<Vec<u64>>,
    by_right: Vec<Vec<u64>>,
    by_top: Vec<Vec<u64>>,
    by_bottom: Vec<Vec<u64>>,
}

#[derive(Clone, Copy)]
enum Dir {
    Right,
    Left,
    Up,
    Down,
}

const DIRS: [Dir; 4] = [Dir::Right, Dir::Left, Dir::Up, Dir::Down];

impl<'a> Problem<'a> {
    fn new(ts: &'a TileSet, region: &Region) -> Self {
        let words = ts.len().div_ceil(64);
        let nc = ts.colors().len();
        let mut by_left = vec![vec![0u64; words]; nc];
        let mut by_right = vec![vec![0u64; words]; nc];
        let mut by_top = vec![vec![0u64; words]; nc];
        let mut by_bottom = vec![vec![0u64; words]; nc];
        for (i, t) in ts.tiles().iter().enumerate() {
            let (wd, bit) = (i / 64, 1u64 << (i % 64));
            by_left[t.left as usize][wd] |= bit;
            by_right[t.right as usize][wd] |= bit;
            by_top[t.top as usize][wd] |= bit;
            by_bottom[t.bottom as usize][wd] |= bit;
        }
        Problem {
            ts,
            w: region.width(),
            h: region.height(),
            torus: region.wrap() == Wrap::Torus,
            words,
            by_left,
            by_right,
            by_top,
            by_bottom,
        }
    }

    fn neighbor(&self, cell: usize, d: Dir) -> Option<usize> {
        let (x, y) = (cell % self.w, cell / self.w);
        let (nx, ny) = match d {
            Dir::Right if x + 1 < self.w => (x + 1, y),
            Dir::Right if self.torus => (0, y),
            Dir::Left if x > 0 => (x - 1, y),
            Dir::Left if self.torus => (self.w - 1, y),
            Dir::Up if y + 1 < self.h => (x, y + 1),
            Dir::Up if self.torus => (x, 0),
            Dir::Down if y > 0 => (x, y - 1),
            Dir::Down if self.torus => (x, self.h - 1),
            _ => return None,
        };
        Some(ny * self.w + nx)
    }

    fn initial(&self, region: &Region) -> Vec<u64> {
        let mut full = vec![0u64; self.words];
        for i in 0..self.ts.len() {
            full[i / 64] |= 1 << (i % 64);
        }
        let mut dom = Vec::with_capacity(self.w * self.h * self.words);
        for cell in 0..self.w * self.h {
            let (x, y) = (cell % self.w, cell / self.w);
            let mut d = full.clone();
            for (i, t) in self.ts.tiles().iter().enumerate() {
                let mut ok = true;
                for (side, pos, color) in [
                    (Side::Left, y, t.left),
                    (Side::Right, y, t.right),
                    (Side::Bottom, x, t.bottom),
                    (Side::Top, x, t.top),
                ] {
                    let on_edge = match side {
                        Side::Left => x == 0,
                        Side::Right => x + 1 == self.w,
                        Side::Bottom => y == 0,
                        Side::Top => y + 1 == self.h,
                    };
                    if on_edge && region.constraint(side, pos).is_some_and(|c| c != color) {
                        ok = false;
                    }
                }
                // A one-wide torus makes a tile its own neighbour.
                if self.torus && self.w == 1 && t.left != t.right {
                    ok = false;
                }
                if self.torus && self.h == 1 && t.top != t.bottom {
                    ok = false;
                }
                if !ok {
                    d[i / 64] &= !(1 << (i % 64));
                }
            }
            dom.extend_from_slice(&d);
        }
        dom
    }

    fn tiles_in(&self, dom: &[u64], cell: usize) -> impl Iterator<Item = usize> + '_ {
        let block = dom[cell * self.words..(cell + 1) * self.words].to_vec();
        (0..self.ts.len()).filter(move |&i| block[i / 64] >> (i % 64) & 1 == 1)
    }

    /// Tiles allowed at the neighbour of `cell` in direction `d`.
    fn support(&self, dom: &[u64], cell: usize, d: Dir) -> Vec<u64> {
        let mut seen = vec![false; self.ts.colors().len()];
        let mut out = vec![0u64; self.words];
        for i in self.tiles_in(dom, cell) {
            let t = &self.ts.tiles()[i];
            let (color, table) = match d {
                Dir::Right => (t.right, &self.by_left),
                Dir::Left => (t.left, &self.by_right),
                Dir::Up => (t.top, &self.by_bottom),
                Dir::Down => (t.bottom, &self.by_top),
            };
            if !seen[color as usize] {
                seen[color as usize] = true;
                for (o, s) in out.iter_mut().zip(&table[color as usize]) {
                    *o |= s;
                }
            }
        }
        out
    }

    fn propagate(&self, dom: &mut [u64], mut queue: Vec<usize>) -> bool {
        let mut queued = vec![false; self.w * self.h];
        for &c in &queue {
            queued[c] = true;
        }
        while let Some(cell) = queue.pop() {
            queued[cell] = false;
            for d in DIRS {
                let Some(n) = self.neighbor(cell, d) else { continue };
                let sup = self.support(dom, cell, d);
                let block = &mut dom[n * self.words..(n + 1) * self.words];
                let mut changed = false;
                let mut empty = true;
                for (b, s) in block.iter_mut().zip(&sup) {
                    let nb = *b & s;
                    changed |= nb != *b;
                    empty &= nb == 0;
                    *b = nb;
                }
                if empty {
                    return false;
                }
                if changed && !queued[n] {
                    queued[n] = true;
                    queue.push(n);
                }
            }
        }
        true
    }

    fn branch_cell(&self, dom: &[u64]) -> Option<usize> {
        (0..self.w * self.h).find(|&c| {
            dom[c * self.words..(c + 1) * self.words]
                .iter()
                .map(|b| b.count_ones())
                .sum::<u32>()
                > 1
        })
    }

    fn decode(&self, dom: &[u64]) -> Vec<usize> {
        (0..self.w * self.h)
            .map(|c| self.tiles_in(dom, c).next().expect("singleton domain"))
            .collect()
    }

    fn assign(&self, dom: &[u64], cell: usize, tile: usize) -> Option<Vec<u64>> {
        let mut d = dom.to_vec();
        let block = &mut d[cell * self.words..(cell + 1) * self.words];
        block.iter_mut().for_each(|b| *b = 0);
        block[tile / 64] = 1 << (tile % 64);
        self.propagate(&mut d, vec![cell]).then_some(d)
    }

    /// Depth-first search in row-major cell order, ascending tile index.
    /// `visit` returns false to stop; the return value reports a stop.
    fn search(&self, dom: Vec<u64>, visit: &mut dyn FnMut(&[u64]) -> bool) -> bool {
        let Some(cell) = self.branch_cell(&dom) else {
            return visit(&dom);
        };
        let cands: Vec<usize> = self.tiles_in(&dom, cell).collect();
        for t in cands {
            if let Some(d) = self.assign(&dom, cell, t) {
                if !self.search(d, visit) {
                    return false;
                }
            }
        }
        true
    }

    /// Root domains after propagation, then split at the first branching cell
    /// so that subtrees can run on separate threads.
    fn roots(&self, region: &Region) -> Vec<Vec<u64>> {
        let mut dom = self.initial(region);
        if !self.propagate(&mut dom, (0..self.w * self.h).collect()) {
            return Vec::new();
        }
        match self.branch_cell(&dom) {
            None => vec![dom],
            Some(cell) => self
                .tiles_in(&dom, cell)
                .collect::<Vec<_>>()
                .into_iter()
                .filter_map(|t| self.assign(&dom, cell, t))
                .collect(),
        }
    }
}

fn check_area(region: &Region, cap: usize) -> Result<()> {
    let area = region.width() * region.height();
    if area > cap {
        return Err(WangError::Overflow {
            what: "region area",
            partial: area as u128,
            cap: cap as u128,
        });
    }
    Ok(())
}

/// All legal tilings, in lexicographic order of the row-major cell sequence
/// (row 0 is the bottom row). More than `limit` tilings is an error.
pub fn solve(ts: &TileSet, region: &Region, limit: usize) -> Result<Vec<Tiling>> {
    check_area(region, DEFAULT_AREA_CAP)?;
    let p = Problem::new(ts, region);
    let roots = p.roots(region);
    let parts = exec::map(&roots, |dom| {
        let mut found = Vec::new();
        p.search(dom.clone(), &mut |d| {
            found.push(p.decode(d));
            found.len() <= limit
        });
        found
    });
    let mut out = Vec::new();
    for part in parts {
        out.extend(part);
        if out.len() > limit {
            return Err(WangError::Overflow {
                what: "tilings",
                partial: out.len() as u128,
                cap: limit as u128,
            });
        }
    }
    Ok(out
        .into_iter()
        .map(|cells| Tiling::new_unchecked(region.clone(), cells))
        .collect())
}

/// Number of legal tilings by search, without storing them.
pub fn count_tilings(ts: &TileSet, region: &Region, cap: u128) -> Result<u128> {
    check_area(region, DEFAULT_AREA_CAP)?;
    let p = Problem::new(ts, region);
    let roots = p.roots(region);
    let parts = exec::map(&roots, |dom| {
        let mut n = 0u128;
        p.search(dom.clone(), &mut |_| {
            n += 1;
            n <= cap
        });
        n
    });
    let total: u128 = parts.iter().sum();
    if total > cap {
        return Err(WangError::Overflow {
            what: "tilings",
            partial: total,
            cap,
        });
    }
    Ok(total)
}

fn columns(ts: &TileSet, h: usize, torus: bool, cap: usize) -> Result<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    let mut stack: Vec<Vec<usize>> = (0..ts.len()).map(|t| vec![t]).collect();
    stack.reverse();
    while let Some(col) = stack.pop() {
        if col.len() == h {
            let tiles = ts.tiles();
            if torus && tiles[col[h - 1]].top != tiles[col[0]].bottom {
                continue;
            }
            out.push(col);
            if out.len() > cap {
                return Err(WangError::Overflow {
                    what: "column states",
                    partial: out.len() as u128,
                    cap: cap as u128,
                });
            }
            continue;
        }
        let top = ts.tiles()[*col.last().expect("nonempty")].top;
        for t in (0..ts.len()).rev() {
            if ts.tiles()[t].bottom == top {
                let mut next = col.clone();
                next.push(t);
                stack.push(next);
            }
        }
    }
    Ok(out)
}

/// Exact number of legal tilings by multiplying column-compatibility
/// relations, independent of the search.
pub fn count_by_transfer(ts: &TileSet, region: &Region, cap: usize) -> Result<BigUint> {
    let (w, h) = (region.width(), region.height());
    let torus = region.wrap() == Wrap::Torus;
    let cols = columns(ts, h, torus, cap)?;
    let tiles = ts.tiles();
    let left_sig = |c: &Vec<usize>| c.iter().map(|&t| tiles[t].left).collect::<Vec<u32>>();
    let right_sig = |c: &Vec<usize>| c.iter().map(|&t| tiles[t].right).collect::<Vec<u32>>();
    let lefts: Vec<Vec<u32>> = cols.iter().map(left_sig).collect();
    let rights: Vec<Vec<u32>> = cols.iter().map(right_sig).collect();
    let fits = |ci: usize, x: usize| -> bool {
        let col = &cols[ci];
        let bottom_ok = region
            .constraint(Side::Bottom, x)
            .is_none_or(|c| tiles[col[0]].bottom == c);
        let top_ok = region
            .constraint(Side::Top, x)
            .is_none_or(|c| tiles[col[h - 1]].top == c);
        let left_ok = x != 0
            || (0..h).all(|y| region.constraint(Side::Left, y).is_none_or(|c| lefts[ci][y] == c));
        let right_ok = x + 1 != w
            || (0..h).all(|y| region.constraint(Side::Right, y).is_none_or(|c| rights[ci][y] == c));
        bottom_ok && top_ok && left_ok && right_ok
    };
    let sweep = |start: Vec<BigUint>| -> Vec<BigUint> {
        let mut v = start;
        for x in 1..w {
            let mut acc: HashMap<&[u32], BigUint> = HashMap::new();
            for (ci, val) in v.iter().enumerate() {
                if !val.is_zero() {
                    *acc.entry(rights[ci].as_slice()).or_default() += val;
                }
            }
            v = exec::map_range(0..cols.len(), |ci| {
                if !fits(ci, x) {
                    return BigUint::zero();
                }
                acc.get(lefts[ci].as_slice()).cloned().unwrap_or_default()
            });
        }
        v
    };
    if !torus {
        let start: Vec<BigUint> = (0..cols.len())
            .map(|ci| if fits(ci, 0) { BigUint::one() } else { BigUint::zero() })
            .collect();
        return Ok(sweep(start).into_iter().sum());
    }
    // Torus: fix the seam signature and require the last column to close it.
    let mut seams: Vec<&Vec<u32>> = lefts.iter().collect();
    seams.sort();
    seams.dedup();
    let mut total = BigUint::zero();
    for seam in seams {
        let start: Vec<BigUint> = (0..cols.len())
            .map(|ci| if lefts[ci] == *seam { BigUint::one() } else { BigUint::zero() })
            .collect();
        let end = sweep(start);
        for (ci, val) in end.into_iter().enumerate() {
            if rights[ci] == *seam {
                total += val;
            }
        }
    }
    Ok(total)
}
