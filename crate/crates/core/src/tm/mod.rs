//! Deterministic Turing machines, their space–time diagrams, and their
//! compilation into Wang tiles.

mod compile;
mod layout;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use thiserror::Error;

use crate::wang::WangError;

pub use compile::{
    check_against_simulator, compile_tm, count_computation_fillings, diagram_rows, expected_tile_count, independence, input_colors,
    tiling_diagram, CompiledTiles, IndependenceRow, TileKind,
};
pub use layout::{assemble_macrotile, min_zoom, MacroLayout};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TmError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid machine: {0}")]
    Invalid(String),
    #[error("bad input: {0}")]
    Input(String),
    #[error("head left the tape at step {step}")]
    BoundaryExit { step: usize },
    #[error("layout error: N = {n} is below the minimum {min}")]
    Layout { n: usize, min: usize },
    #[error(transparent)]
    Wang(#[from] WangError),
}

impl TmError {
    pub fn is_resource(&self) -> bool {
        matches!(self, TmError::Wang(e) if e.is_resource())
    }
}

type Result<T> = std::result::Result<T, TmError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Move {
    L,
    R,
    S,
}

impl Move {
    fn parse(s: &str) -> Option<Move> {
        match s {
            "L" => Some(Move::L),
            "R" => Some(Move::R),
            "S" => Some(Move::S),
            _ => None,
        }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Move::L => "L",
            Move::R => "R",
            Move::S => "S",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rule {
    pub next: usize,
    pub write: usize,
    pub mv: Move,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TmSpec {
    states: Vec<String>,
    start: usize,
    halting: Vec<bool>,
    symbols: Vec<String>,
    blank: usize,
    rules: BTreeMap<(usize, usize), Rule>,
}

impl TmSpec {
    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn blank(&self) -> usize {
        self.blank
    }

    pub fn is_halting(&self, q: usize) -> bool {
        self.halting[q]
    }

    pub fn rule(&self, q: usize, s: usize) -> Option<Rule> {
        self.rules.get(&(q, s)).copied()
    }

    pub fn rules(&self) -> impl Iterator<Item = ((usize, usize), Rule)> + '_ {
        self.rules.iter().map(|(&k, &r)| (k, r))
    }

    pub fn symbol_id(&self, s: &str) -> Option<usize> {
        self.symbols.iter().position(|x| x == s)
    }

    pub fn state_id(&self, s: &str) -> Option<usize> {
        self.states.iter().position(|x| x == s)
    }

    /// Splits on whitespace when present, otherwise one symbol per character.
    pub fn parse_input(&self, text: &str) -> Result<Vec<usize>> {
        let tokens: Vec<String> = if text.split_whitespace().count() > 1 {
            text.split_whitespace().map(str::to_string).collect()
        } else {
            text.trim().chars().map(|c| c.to_string()).collect()
        };
        tokens
            .iter()
            .map(|t| {
                self.symbol_id(t)
                    .ok_or_else(|| TmError::Input(format!("symbol {t} is not in the tape alphabet")))
            })
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("states {}\n", self.states.join(" "));
        let halts: Vec<&str> = (0..self.states.len())
            .filter(|&q| self.halting[q])
            .map(|q| self.states[q].as_str())
            .collect();
        if !halts.is_empty() {
            s.push_str(&format!("halt {}\n", halts.join(" ")));
        }
        s.push_str(&format!("symbols {}\n", self.symbols.join(" ")));
        s.push_str(&format!("blank {}\n", self.symbols[self.blank]));
        s.push_str(&format!("start {}\n", self.states[self.start]));
        for (&(q, a), r) in &self.rules {
            s.push_str(&format!(
                "rule {} {} -> {} {} {}\n",
                self.states[q], self.symbols[a], self.states[r.next], self.symbols[r.write], r.mv
            ));
        }
        s
    }
}

/// Parses the line format
///
/// ```text
/// states q0 q1 qh
/// halt qh
/// symbols 0 1 _        # optional, defaults to the blank then rule symbols
/// blank _
/// start q0             # optional, defaults to the first state
/// rule q0 0 -> q1 1 R
/// ```
///
/// Every (non-halting state, symbol) pair needs exactly one rule.
pub fn parse_tm(text: &str) -> Result<TmSpec> {
    let mut states: Option<Vec<String>> = None;
    let mut halts: Vec<(usize, String)> = Vec::new();
    let mut symbols: Option<Vec<String>> = None;
    let mut blank: Option<String> = None;
    let mut start: Option<(usize, String)> = None;
    let mut raw_rules: Vec<(usize, [String; 5])> = Vec::new();
    let mut last = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last = line;
        let err = |msg: String| TmError::Parse { line, msg };
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let words: Vec<&str> = body.split_whitespace().collect();
        let args = || words[1..].iter().map(|s| s.to_string()).collect::<Vec<_>>();
        match words[0] {
            "states" => {
                if states.replace(args()).is_some() {
                    return Err(err("states declared twice".into()));
                }
            }
            "halt" => halts.extend(args().into_iter().map(|h| (line, h))),
            "symbols" => {
                if symbols.replace(args()).is_some() {
                    return Err(err("symbols declared twice".into()));
                }
            }
            "blank" => {
                if words.len() != 2 {
                    return Err(err("expected `blank <symbol>`".into()));
                }
                blank = Some(words[1].to_string());
            }
            "start" => {
                if words.len() != 2 {
                    return Err(err("expected `start <state>`".into()));
                }
                start = Some((line, words[1].to_string()));
            }
            "rule" => {
                if words.len() != 7 || words[3] != "->" {
                    return Err(err("expected `rule <q> <s> -> <q'> <s'> <L|R|S>`".into()));
                }
                raw_rules.push((
                    line,
                    [words[1], words[2], words[4], words[5], words[6]].map(str::to_string),
                ));
            }
            other => return Err(err(format!("unknown directive {other}"))),
        }
    }
    let states = states.ok_or(TmError::Parse {
        line: last,
        msg: "missing states line".into(),
    })?;
    if states.is_empty() {
        return Err(TmError::Parse {
            line: last,
            msg: "no states".into(),
        });
    }
    let state_ix: HashMap<&str, usize> = states.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    if state_ix.len() != states.len() {
        return Err(TmError::Invalid("duplicate state name".into()));
    }
    let blank = blank.ok_or(TmError::Parse {
        line: last,
        msg: "missing blank symbol".into(),
    })?;
    let symbols = match symbols {
        Some(s) => s,
        None => {
            let mut s = vec![blank.clone()];
            for (_, r) in &raw_rules {
                for x in [&r[1], &r[3]] {
                    if !s.contains(x) {
                        s.push(x.clone());
                    }
                }
            }
            s
        }
    };
    let sym_ix: HashMap<&str, usize> = symbols.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    if sym_ix.len() != symbols.len() {
        return Err(TmError::Invalid("duplicate tape symbol".into()));
    }
    let blank = *sym_ix.get(blank.as_str()).ok_or(TmError::Parse {
        line: last,
        msg: format!("blank {blank} is not a declared symbol"),
    })?;
    let start = match start {
        None => 0,
        Some((line, s)) => *state_ix.get(s.as_str()).ok_or(TmError::Parse {
            line,
            msg: format!("initial state {s} is not declared"),
        })?,
    };
    let mut halting = vec![false; states.len()];
    for (line, h) in halts {
        let q = *state_ix.get(h.as_str()).ok_or(TmError::Parse {
            line,
            msg: format!("halting state {h} is not declared"),
        })?;
        halting[q] = true;
    }
    let mut rules = BTreeMap::new();
    for (line, [q, a, q2, b, mv]) in raw_rules {
        let err = |msg: String| TmError::Parse { line, msg };
        let look_q = |s: &str| state_ix.get(s).copied().ok_or_else(|| err(format!("unknown state {s}")));
        let look_s = |s: &str| sym_ix.get(s).copied().ok_or_else(|| err(format!("unknown symbol {s}")));
        let (q, a, next, write) = (look_q(&q)?, look_s(&a)?, look_q(&q2)?, look_s(&b)?);
        let mv = Move::parse(&mv).ok_or_else(|| err(format!("bad move {mv}")))?;
        if halting[q] {
            return Err(err(format!("halting state {} has a rule", states[q])));
        }
        if rules.insert((q, a), Rule { next, write, mv }).is_some() {
            return Err(err(format!("duplicate transition for ({}, {})", states[q], symbols[a])));
        }
    }
    for q in (0..states.len()).filter(|&q| !halting[q]) {
        for (a, sym) in symbols.iter().enumerate() {
            if !rules.contains_key(&(q, a)) {
                return Err(TmError::Invalid(format!("no rule for ({}, {sym})", states[q])));
            }
        }
    }
    Ok(TmSpec {
        states,
        start,
        halting,
        symbols,
        blank,
        rules,
    })
}

/// One tape cell at one time, with the head's state when it sits there.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Cell {
    pub symbol: usize,
    pub head: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagram {
    pub width: usize,
    /// Row `t` is the configuration after `t` steps.
    pub rows: Vec<Vec<Cell>>,
    pub halted: bool,
}

impl Diagram {
    pub fn height(&self) -> usize {
        self.rows.len()
    }

    pub fn head_positions(&self) -> Vec<usize> {
        self.rows
            .iter()
            .map(|r| r.iter().position(|c| c.head.is_some()).expect("one head per row"))
            .collect()
    }

    /// One line per time step, earliest first; head cells read `q:s`.
    pub fn render(&self, tm: &TmSpec) -> String {
        let mut s = String::new();
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|c| cell_label(tm, *c)).collect();
            s.push_str(&cells.join(" "));
            s.push('\n');
        }
        s
    }
}

pub(crate) fn cell_label(tm: &TmSpec, c: Cell) -> String {
    match c.head {
        Some(q) => format!("{}:{}", tm.states[q], tm.symbols[c.symbol]),
        None => tm.symbols[c.symbol].clone(),
    }
}

/// Runs `steps` steps from `input` (padded with blanks to `width`, head on
/// cell 0), stopping early when a halting state is reached.
pub fn simulate(tm: &TmSpec, input: &[usize], width: usize, steps: usize) -> Result<Diagram> {
    if input.len() > width {
        return Err(TmError::Input(format!("input of length {} exceeds width {width}", input.len())));
    }
    if width == 0 {
        return Err(TmError::Input("width must be positive".into()));
    }
    let mut tape: Vec<usize> = input.to_vec();
    tape.resize(width, tm.blank);
    let (mut q, mut pos) = (tm.start, 0usize);
    let snapshot = |tape: &[usize], q: usize, pos: usize| -> Vec<Cell> {
        tape.iter()
            .enumerate()
            .map(|(i, &s)| Cell {
                symbol: s,
                head: (i == pos).then_some(q),
            })
            .collect()
    };
    let mut rows = vec![snapshot(&tape, q, pos)];
    let mut halted = tm.halting[q];
    for step in 1..=steps {
        if halted {
            break;
        }
        let r = tm.rules[&(q, tape[pos])];
        tape[pos] = r.write;
        q = r.next;
        pos = match r.mv {
            Move::S => pos,
            Move::R if pos + 1 < width => pos + 1,
            Move::L if pos > 0 => pos - 1,
            _ => return Err(TmError::BoundaryExit { step }),
        };
        rows.push(snapshot(&tape, q, pos));
        halted = tm.halting[q];
    }
    Ok(Diagram { width, rows, halted })
}

/// Reference machines used by tests, benches and the CLI.
pub mod machines {
    /// Moves right forever over blanks.
    pub const RIGHT_MOVER: &str = "states q0\nsymbols _\nblank _\nrule q0 _ -> q0 _ R\n";

    /// Halts before taking a step.
    pub const IMMEDIATE_HALT: &str = "states h\nhalt h\nsymbols _ 0 1\nblank _\n";

    /// Halts after one step.
    pub const HALT_AFTER_ONE: &str = "states q0 h\nhalt h\nsymbols _ 0 1\nblank _\n\
        rule q0 _ -> h _ S\nrule q0 0 -> h 0 S\nrule q0 1 -> h 1 S\n";

    /// Little-endian counter anchored at cell 0. The least significant digit
    /// is written in marked form (`a` = 0, `b` = 1) so the carry can find its
    /// way back.
    pub const BINARY_COUNTER: &str = "states inc carry back
symbols _ 0 1 a b
blank _
rule inc _ -> inc b S
rule inc 0 -> inc b S
rule inc 1 -> carry a R
rule inc a -> inc b S
rule inc b -> carry a R
rule carry _ -> back 1 L
rule carry 0 -> back 1 L
rule carry 1 -> carry 0 R
rule carry a -> carry a S
rule carry b -> carry b S
rule back _ -> back _ L
rule back 0 -> back 0 L
rule back 1 -> back 1 L
rule back a -> inc a S
rule back b -> inc b S
";

    /// Never halts: bounces between cells 0 and 1, flipping what it reads.
    pub const BOUNCER: &str = "states r l
symbols _ 0 1
blank _
rule r _ -> l _ R
rule r 0 -> l 1 R
rule r 1 -> l 0 R
rule l _ -> r _ L
rule l 0 -> r 1 L
rule l 1 -> r 0 L
";

    /// Accepts unless cells 0 and 1 both hold 1.
    pub const REJECT_11: &str = "states q0 q1 ok h
halt h
symbols _ 0 1
blank _
rule q0 _ -> ok _ S
rule q0 0 -> ok 0 S
rule q0 1 -> q1 1 R
rule q1 _ -> ok _ S
rule q1 0 -> ok 0 S
rule q1 1 -> h 1 S
rule ok _ -> ok _ S
rule ok 0 -> ok 0 S
rule ok 1 -> ok 1 S
";

    /// Stays put forever.
    pub const ALWAYS_ACCEPT: &str = "states q0
symbols _ 0 1
blank _
rule q0 _ -> q0 _ S
rule q0 0 -> q0 0 S
rule q0 1 -> q0 1 S
";

    /// Halts when the first input bit is 1.
    pub const REJECT_FIRST_ONE: &str = "states q0 h
halt h
symbols _ 0 1
blank _
rule q0 _ -> q0 _ S
rule q0 0 -> q0 0 S
rule q0 1 -> h 1 S
";
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parsing() {
        let m = parse_tm(machines::RIGHT_MOVER).unwrap();
        assert_eq!(m.states().len(), 1);
        let e = parse_tm("states q0\nblank _\nrule q0 _ -> q0 _ R\nrule q0 _ -> q0 _ L\n").unwrap_err();
        assert!(matches!(e, TmError::Parse { line: 4, .. }), "{e}");
        let e = parse_tm("states q0\nrule q0 _ -> q0 _ R\n").unwrap_err();
        assert!(matches!(e, TmError::Parse { .. }));
        let e = parse_tm("states q0\nblank _\nstart q9\n").unwrap_err();
        assert!(matches!(e, TmError::Parse { line: 3, .. }));
        let e = parse_tm("states q0\nsymbols _ 1\nblank _\nrule q0 _ -> q0 _ R\n").unwrap_err();
        assert!(matches!(e, TmError::Invalid(_)));
        let e = parse_tm("states q0 h\nhalt h\nsymbols _\nblank _\nrule q0 _ -> h _ S\nrule h _ -> h _ S\n").unwrap_err();
        assert!(matches!(e, TmError::Parse { line: 6, .. }));
    }

    #[test]
    fn printer_round_trips() {
        for src in [
            machines::RIGHT_MOVER,
            machines::BINARY_COUNTER,
            machines::IMMEDIATE_HALT,
            machines::REJECT_11,
        ] {
            let m = parse_tm(src).unwrap();
            let text = m.to_text();
            assert_eq!(parse_tm(&text).unwrap(), m);
            assert_eq!(parse_tm(&text).unwrap().to_text(), text);
        }
    }

    #[test]
    fn right_mover_runs() {
        let m = parse_tm(machines::RIGHT_MOVER).unwrap();
        let d = simulate(&m, &[], 4, 3).unwrap();
        assert_eq!(d.head_positions(), vec![0, 1, 2, 3]);
        assert!(matches!(simulate(&m, &[], 4, 4), Err(TmError::BoundaryExit { step: 4 })));
    }

    #[test]
    fn immediate_halt_has_one_row() {
        let m = parse_tm(machines::IMMEDIATE_HALT).unwrap();
        let d = simulate(&m, &[], 3, 5).unwrap();
        assert_eq!(d.height(), 1);
        assert!(d.halted);
    }

    /// Independent reference: the counter's value read back from the tape
    /// must go up by one each time the head returns to cell 0 in `inc`.
    fn counter_value(tm: &TmSpec, row: &[Cell]) -> u64 {
        row.iter()
            .enumerate()
            .map(|(i, c)| match tm.symbols()[c.symbol].as_str() {
                "1" | "b" => 1u64 << i,
                _ => 0,
            })
            .sum()
    }

    #[test]
    fn binary_counter_rows() {
        let m = parse_tm(machines::BINARY_COUNTER).unwrap();
        let input = m.parse_input("11").unwrap();
        let d = simulate(&m, &input, 6, 6).unwrap();
        let rendered = d.render(&m);
        let expected = "inc:1 1 _ _ _ _\n\
                        a carry:1 _ _ _ _\n\
                        a 0 carry:_ _ _ _\n\
                        a back:0 1 _ _ _\n\
                        back:a 0 1 _ _ _\n\
                        inc:a 0 1 _ _ _\n\
                        inc:b 0 1 _ _ _\n";
        assert_eq!(rendered, expected);
        let d = simulate(&m, &input, 8, 200).unwrap();
        let values: Vec<u64> = d
            .rows
            .iter()
            .filter(|r| r[0].head == Some(m.state_id("inc").unwrap()))
            .map(|r| counter_value(&m, r))
            .collect();
        assert!(values.len() > 10);
        for w in values.windows(2) {
            assert!(w[1] == w[0] || w[1] == w[0] + 1, "{values:?}");
        }
        assert!(values.last().unwrap() > &10);
    }
}
