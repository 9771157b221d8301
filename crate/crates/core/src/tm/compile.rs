use std::collections::BTreeSet;

use super::{cell_label, simulate, Cell, Diagram, Move, Result, TmError, TmSpec};
use crate::exec;
use crate::wang::{count_tilings, Region, Side, TileSet, Tiling};

/// Horizontal colour of an edge no head crosses.
pub const QUIET: &str = "-";

/// What a compiled tile stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TileKind {
    /// A cell the head neither visits nor enters.
    Quiescent { symbol: usize },
    /// The head applies rule `(state, symbol)`.
    Head { state: usize, symbol: usize },
    /// The head arrives from the left (`from_left`) or right in `state`.
    Arrive { state: usize, symbol: usize, from_left: bool },
}

/// Tiles whose rows are consecutive configurations. A tile's bottom colour is
/// its cell at time `t` and its top colour the same cell at `t + 1`.
#[derive(Debug, Clone)]
pub struct CompiledTiles {
    pub tiles: TileSet,
    pub kinds: Vec<TileKind>,
    tm: TmSpec,
}

fn arrive_color(state: &str, from_left: bool) -> String {
    if from_left {
        format!(">{state}")
    } else {
        format!("<{state}")
    }
}

/// Compiles `tm` into Wang tiles. Transitions into a halting state get no
/// tile, so a run that halts cannot be continued upward.
pub fn compile_tm(tm: &TmSpec) -> Result<CompiledTiles> {
    let label = |c: Cell| cell_label(tm, c);
    let mut tiles: Vec<(String, [String; 4])> = Vec::new();
    let mut kinds = Vec::new();
    for (s, name) in tm.symbols().iter().enumerate() {
        tiles.push((
            format!("q[{name}]"),
            [QUIET.into(), QUIET.into(), name.clone(), name.clone()],
        ));
        kinds.push(TileKind::Quiescent { symbol: s });
    }
    let mut arrivals: BTreeSet<(usize, bool)> = BTreeSet::new();
    for ((q, a), r) in tm.rules() {
        if tm.is_halting(r.next) {
            continue;
        }
        let bottom = label(Cell { symbol: a, head: Some(q) });
        let next = &tm.states()[r.next];
        let written = label(Cell { symbol: r.write, head: None });
        let (left, right, top) = match r.mv {
            Move::S => (QUIET.into(), QUIET.into(), label(Cell { symbol: r.write, head: Some(r.next) })),
            Move::R => (QUIET.into(), arrive_color(next, true), written),
            Move::L => (arrive_color(next, false), QUIET.into(), written),
        };
        match r.mv {
            Move::R => arrivals.insert((r.next, true)),
            Move::L => arrivals.insert((r.next, false)),
            Move::S => false,
        };
        tiles.push((format!("h[{bottom}]"), [left, right, top, bottom]));
        kinds.push(TileKind::Head { state: q, symbol: a });
    }
    for (q, from_left) in arrivals {
        for (s, name) in tm.symbols().iter().enumerate() {
            let c = arrive_color(&tm.states()[q], from_left);
            let (left, right) = if from_left { (c, QUIET.into()) } else { (QUIET.into(), c) };
            let top = label(Cell { symbol: s, head: Some(q) });
            tiles.push((format!("a[{left}{name}{right}]"), [left, right, top, name.clone()]));
            kinds.push(TileKind::Arrive { state: q, symbol: s, from_left });
        }
    }
    Ok(CompiledTiles {
        tiles: TileSet::new(tiles)?,
        kinds,
        tm: tm.clone(),
    })
}

/// Closed-form tile count: one quiescent tile per symbol, one per rule into
/// a non-halting state, and `|Γ|` arrival tiles per (state, direction) that
/// some such move targets.
pub fn expected_tile_count(tm: &TmSpec) -> usize {
    let g = tm.symbols().len();
    let live: Vec<_> = tm.rules().filter(|(_, r)| !tm.is_halting(r.next)).collect();
    let targets: BTreeSet<(usize, bool)> = live
        .iter()
        .filter(|(_, r)| r.mv != Move::S)
        .map(|(_, r)| (r.next, r.mv == Move::R))
        .collect();
    g + live.len() + g * targets.len()
}

/// Bottom-edge colours of the initial configuration (head on cell 0), or
/// `None` when a colour has no tile, which happens when the machine starts
/// in a halting state.
pub fn input_colors(c: &CompiledTiles, input: &[usize], width: usize, with_head: bool) -> Option<Vec<u32>> {
    let mut tape = input.to_vec();
    tape.resize(width, c.tm.blank());
    tape.iter()
        .enumerate()
        .map(|(i, &s)| {
            let head = (with_head && i == 0).then_some(c.tm.start());
            c.tiles.color_id(&cell_label(&c.tm, Cell { symbol: s, head }))
        })
        .collect()
}

impl CompiledTiles {
    pub fn tm(&self) -> &TmSpec {
        &self.tm
    }

    /// The `w × h` region with the input on its bottom edge and quiet sides,
    /// or `None` if the input colours cannot occur.
    pub fn region(&self, input: &[usize], w: usize, h: usize, with_head: bool) -> Result<Option<Region>> {
        if input.len() > w {
            return Err(TmError::Input(format!("input of length {} exceeds width {w}", input.len())));
        }
        let Some(colors) = input_colors(self, input, w, with_head) else {
            return Ok(None);
        };
        let quiet = self.tiles.color_id(QUIET).expect("quiet colour present");
        let mut r = Region::free(w, h)?;
        for (x, c) in colors.into_iter().enumerate() {
            r = r.with_constraint(Side::Bottom, x, c)?;
        }
        for y in 0..h {
            r = r.with_constraint(Side::Left, y, quiet)?;
            r = r.with_constraint(Side::Right, y, quiet)?;
        }
        Ok(Some(r))
    }
}

/// Reads a tiling back as configurations: the bottom colours of each row,
/// then the top colours of the last row.
pub fn tiling_diagram(c: &CompiledTiles, t: &Tiling) -> Vec<Vec<String>> {
    let (w, h) = (t.region().width(), t.region().height());
    let tiles = c.tiles.tiles();
    let mut rows: Vec<Vec<String>> = (0..h)
        .map(|y| (0..w).map(|x| c.tiles.color(tiles[t.at(x, y)].bottom).to_string()).collect())
        .collect();
    rows.push((0..w).map(|x| c.tiles.color(tiles[t.at(x, h - 1)].top).to_string()).collect());
    rows
}

/// Rendered simulator rows in the same shape as [`tiling_diagram`].
pub fn diagram_rows(tm: &TmSpec, d: &Diagram) -> Vec<Vec<String>> {
    d.rows
        .iter()
        .map(|r| r.iter().map(|&c| cell_label(tm, c)).collect())
        .collect()
}

/// Legal fillings of the `w × h` computation region above `input`.
pub fn count_computation_fillings(
    checker: &CompiledTiles,
    input: &[usize],
    w: usize,
    h: usize,
    cap: u128,
) -> Result<u128> {
    match checker.region(input, w, h, true)? {
        None => Ok(0),
        Some(r) => Ok(count_tilings(&checker.tiles, &r, cap)?),
    }
}

/// Filling counts for every binary input of one length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndependenceRow {
    pub length: usize,
    pub width: usize,
    pub height: usize,
    pub inputs: usize,
    pub min: u128,
    pub max: u128,
}

impl IndependenceRow {
    pub fn constant(&self) -> bool {
        self.min == self.max
    }
}

/// Counts fillings for all `2^L` inputs over the symbols `0`, `1` for each
/// `L` in `lengths`, on regions `max(L, min_width) × height`.
pub fn independence(
    checker: &CompiledTiles,
    lengths: std::ops::RangeInclusive<usize>,
    min_width: usize,
    height: usize,
    cap: u128,
) -> Result<Vec<IndependenceRow>> {
    let tm = checker.tm();
    let bits = [
        tm.symbol_id("0").ok_or_else(|| TmError::Input("checker has no symbol 0".into()))?,
        tm.symbol_id("1").ok_or_else(|| TmError::Input("checker has no symbol 1".into()))?,
    ];
    let mut out = Vec::new();
    for len in lengths {
        let width = len.max(min_width);
        let n = 1usize << len;
        let counts = exec::map_range(0..n, |mask| {
            let input: Vec<usize> = (0..len).map(|i| bits[mask >> i & 1]).collect();
            count_computation_fillings(checker, &input, width, height, cap)
        });
        let counts = counts.into_iter().collect::<Result<Vec<u128>>>()?;
        out.push(IndependenceRow {
            length: len,
            width,
            height,
            inputs: n,
            min: *counts.iter().min().expect("nonempty"),
            max: *counts.iter().max().expect("nonempty"),
        });
    }
    Ok(out)
}

/// Checks the bijection for one input: the number of tilings, and whether
/// the unique tiling (if any) reproduces the simulator row by row.
pub fn check_against_simulator(
    c: &CompiledTiles,
    input: &[usize],
    w: usize,
    h: usize,
) -> Result<(usize, bool)> {
    let Some(region) = c.region(input, w, h, true)? else {
        return Ok((0, false));
    };
    let sols = crate::wang::solve(&c.tiles, &region, 16)?;
    if sols.len() != 1 {
        return Ok((sols.len(), false));
    }
    let d = simulate(c.tm(), input, w, h)?;
    Ok((1, !d.halted && diagram_rows(c.tm(), &d) == tiling_diagram(c, &sols[0])))
}

#[cfg(test)]
mod tests {
    use super::super::{machines, parse_tm};
    use super::*;

    fn compiled(src: &str) -> CompiledTiles {
        compile_tm(&parse_tm(src).unwrap()).unwrap()
    }

    #[test]
    fn tile_counts_match_the_closed_form() {
        for src in [
            machines::RIGHT_MOVER,
            machines::BINARY_COUNTER,
            machines::IMMEDIATE_HALT,
            machines::HALT_AFTER_ONE,
            machines::BOUNCER,
            machines::REJECT_11,
        ] {
            let tm = parse_tm(src).unwrap();
            let c = compile_tm(&tm).unwrap();
            assert_eq!(c.tiles.len(), expected_tile_count(&tm));
            assert_eq!(c.kinds.len(), c.tiles.len());
        }
    }

    #[test]
    fn reference_machines() {
        let c = compiled(machines::RIGHT_MOVER);
        assert_eq!(check_against_simulator(&c, &[], 4, 3).unwrap(), (1, true));
        let c = compiled(machines::BINARY_COUNTER);
        let input = c.tm().parse_input("11").unwrap();
        assert_eq!(check_against_simulator(&c, &input, 6, 6).unwrap(), (1, true));
        let c = compiled(machines::IMMEDIATE_HALT);
        assert_eq!(check_against_simulator(&c, &[], 3, 3).unwrap().0, 0);
    }

    #[test]
    fn halting_kills_the_tiling() {
        let c = compiled(machines::HALT_AFTER_ONE);
        assert_eq!(count_computation_fillings(&c, &[], 3, 3, 10).unwrap(), 0);
        // A run leaving the region has no tiling either.
        let c = compiled(machines::RIGHT_MOVER);
        assert_eq!(count_computation_fillings(&c, &[], 3, 3, 10).unwrap(), 0);
    }

    #[test]
    fn quiescent_rows_are_forced() {
        let c = compiled(machines::BOUNCER);
        let zero = c.tm().symbol_id("0").unwrap();
        let r = c.region(&[zero, zero, zero], 3, 4, false).unwrap().unwrap();
        let sols = crate::wang::solve(&c.tiles, &r, 10).unwrap();
        assert_eq!(sols.len(), 1);
        assert!(tiling_diagram(&c, &sols[0]).iter().all(|row| row == &["0", "0", "0"]));
    }

    #[test]
    fn fillings_do_not_depend_on_the_input() {
        let c = compiled(machines::BOUNCER);
        let tm = c.tm();
        let a = tm.parse_input("01").unwrap();
        let b = tm.parse_input("10").unwrap();
        assert_eq!(
            count_computation_fillings(&c, &a, 4, 4, 10).unwrap(),
            count_computation_fillings(&c, &b, 4, 4, 10).unwrap()
        );
        for row in independence(&c, 1..=4, 2, 5, 10).unwrap() {
            assert!(row.constant() && row.min == 1, "{row:?}");
        }
        let c = compiled(machines::REJECT_11);
        let tm = c.tm();
        let ones = tm.parse_input("11").unwrap();
        let zeros = tm.parse_input("00").unwrap();
        assert_eq!(count_computation_fillings(&c, &ones, 2, 3, 10).unwrap(), 0);
        assert_eq!(count_computation_fillings(&c, &zeros, 2, 3, 10).unwrap(), 1);
        let rows = independence(&c, 2..=2, 2, 3, 10).unwrap();
        assert!(!rows[0].constant());
    }
}
