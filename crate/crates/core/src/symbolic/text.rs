//! Line-oriented pattern files.
//!
//! ```text
//! alphabet 0 1
//! dim 2            # optional; height-1 patterns default to dimension 1
//! pat 2x1 1 1
//! pat 1x2 1;1
//! family plus      # optional; starts a named group
//! pat 3x1 1 . 1    # `.` marks a hole
//! ```
//!
//! Rows are listed from `y = 0` upward. Symbols within a row are separated by
//! spaces; for single-character alphabets a row may also be written solid.

use std::fmt::Write as _;
use std::sync::Arc;

use super::{Alphabet, ForbiddenSet, Pattern, Point, SymbolicError, Window};

pub const DEFAULT_GROUP: &str = "forbidden";

#[derive(Debug, Clone)]
pub struct PatternFile {
    pub alphabet: Arc<Alphabet>,
    /// Named groups in order of first appearance.
    pub groups: Vec<(String, Vec<Pattern>)>,
}

impl PatternFile {
    pub fn group(&self, name: &str) -> Option<&[Pattern]> {
        self.groups
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, p)| p.as_slice())
    }

    /// Every pattern in every group, as one forbidden set.
    pub fn forbidden(&self) -> Result<ForbiddenSet, SymbolicError> {
        ForbiddenSet::new(
            self.alphabet.clone(),
            self.groups.iter().flat_map(|(_, p)| p.iter().cloned()),
        )
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "alphabet {}", self.alphabet.symbols().join(" "));
        let two_d = self
            .groups
            .iter()
            .flat_map(|(_, p)| p)
            .any(|p| p.dim() == 2);
        if two_d {
            s.push_str("dim 2\n");
        }
        for (name, pats) in &self.groups {
            if name != DEFAULT_GROUP {
                let _ = writeln!(s, "family {name}");
            }
            for p in pats {
                let _ = writeln!(s, "pat {}", format_pattern(p));
            }
        }
        s
    }
}

/// `WxH row;row` with space-separated symbols.
pub fn format_pattern(p: &Pattern) -> String {
    let w = p.window().width();
    let h = p.window().height();
    let rows: Vec<String> = (0..h as i64)
        .map(|y| {
            (0..w as i64)
                .map(|x| match p.at(Point::new(x, y)) {
                    Some(s) => p.alphabet().symbol(s).to_string(),
                    None => ".".to_string(),
                })
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect();
    format!("{w}x{h} {}", rows.join(";"))
}

fn err(line: usize, msg: impl Into<String>) -> SymbolicError {
    SymbolicError::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_row(
    alphabet: &Alphabet,
    row: &str,
    width: usize,
    line: usize,
) -> Result<Vec<Option<usize>>, SymbolicError> {
    let mut tokens: Vec<String> = row.split_whitespace().map(str::to_string).collect();
    if tokens.len() == 1 && width > 1 && alphabet.is_compact() {
        tokens = tokens[0].chars().map(|c| c.to_string()).collect();
    }
    if tokens.len() != width {
        return Err(err(line, format!("row `{row}` has {} cells, expected {width}", tokens.len())));
    }
    tokens
        .iter()
        .map(|t| {
            if t == "." {
                Ok(None)
            } else {
                alphabet
                    .index_of(t)
                    .map(Some)
                    .ok_or_else(|| err(line, format!("unknown symbol `{t}`")))
            }
        })
        .collect()
}

pub fn parse_pattern_file(text: &str) -> Result<PatternFile, SymbolicError> {
    let mut alphabet: Option<Arc<Alphabet>> = None;
    let mut force_2d = false;
    let mut groups: Vec<(String, Vec<Pattern>)> = Vec::new();
    let mut current = DEFAULT_GROUP.to_string();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (head, rest) = body.split_once(char::is_whitespace).unwrap_or((body, ""));
        let rest = rest.trim();
        match head {
            "alphabet" => {
                if alphabet.is_some() {
                    return Err(err(line, "alphabet declared twice"));
                }
                let a = Alphabet::new(rest.split_whitespace())
                    .map_err(|e| err(line, e.to_string()))?;
                alphabet = Some(Arc::new(a));
            }
            "dim" => match rest {
                "1" => force_2d = false,
                "2" => force_2d = true,
                _ => return Err(err(line, format!("unsupported dimension `{rest}`"))),
            },
            "family" => {
                if rest.is_empty() {
                    return Err(err(line, "family needs a name"));
                }
                current = rest.to_string();
            }
            "pat" => {
                let a = alphabet
                    .clone()
                    .ok_or_else(|| err(line, "pattern before alphabet"))?;
                let (size, rows) = rest
                    .split_once(char::is_whitespace)
                    .ok_or_else(|| err(line, "expected `pat WxH rows`"))?;
                let (w, h) = size
                    .split_once('x')
                    .and_then(|(w, h)| Some((w.parse::<usize>().ok()?, h.parse::<usize>().ok()?)))
                    .filter(|&(w, h)| w > 0 && h > 0)
                    .ok_or_else(|| err(line, format!("bad size `{size}`")))?;
                let rows: Vec<&str> = rows.split(';').collect();
                if rows.len() != h {
                    return Err(err(line, format!("{} rows, expected {h}", rows.len())));
                }
                let mut points = Vec::new();
                let mut symbols = Vec::new();
                for (y, row) in rows.iter().enumerate() {
                    for (x, cell) in parse_row(&a, row, w, line)?.into_iter().enumerate() {
                        if let Some(s) = cell {
                            points.push(Point::new(x as i64, y as i64));
                            symbols.push((Point::new(x as i64, y as i64), s));
                        }
                    }
                }
                let dim = if h > 1 || force_2d { 2 } else { 1 };
                let window = Window::new(dim, points).map_err(|e| err(line, e.to_string()))?;
                let min_x = symbols.iter().map(|(p, _)| p.x).min().unwrap_or(0);
                let min_y = symbols.iter().map(|(p, _)| p.y).min().unwrap_or(0);
                let p = Pattern::from_fn(a, window, |pt| {
                    symbols
                        .iter()
                        .find(|(q, _)| q.x - min_x == pt.x && q.y - min_y == pt.y)
                        .map(|&(_, s)| s)
                        .unwrap_or(0)
                })
                .map_err(|e| err(line, e.to_string()))?;
                match groups.iter_mut().find(|(n, _)| *n == current) {
                    Some((_, v)) => v.push(p),
                    None => groups.push((current.clone(), vec![p])),
                }
            }
            other => return Err(err(line, format!("unknown directive `{other}`"))),
        }
    }
    let alphabet = alphabet.ok_or_else(|| err(0, "missing alphabet line"))?;
    Ok(PatternFile { alphabet, groups })
}

/// Parses a file and merges every group into one forbidden set.
pub fn parse_forbidden(text: &str) -> Result<ForbiddenSet, SymbolicError> {
    parse_pattern_file(text)?.forbidden()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_prints() {
        let text = "alphabet 0 1\ndim 2\npat 2x1 1 1\npat 1x2 1;1\n";
        let f = parse_pattern_file(text).unwrap();
        assert_eq!(f.groups.len(), 1);
        let pats = f.group(DEFAULT_GROUP).unwrap();
        assert_eq!(pats.len(), 2);
        assert!(pats.iter().all(|p| p.dim() == 2));
        assert_eq!(f.to_text(), text);
        let again = parse_pattern_file(&f.to_text()).unwrap();
        assert_eq!(again.group(DEFAULT_GROUP), f.group(DEFAULT_GROUP));
    }

    #[test]
    fn solid_rows_and_holes() {
        let f = parse_pattern_file("alphabet 0 1\npat 3x1 1 . 1\npat 2x1 11\n").unwrap();
        let pats = f.group(DEFAULT_GROUP).unwrap();
        assert_eq!(pats[0].len(), 2);
        assert_eq!(pats[1].symbols(), &[1, 1]);
        assert_eq!(pats[0].dim(), 1);
    }

    #[test]
    fn families_are_grouped() {
        let f = parse_pattern_file(
            "alphabet - 0 +\nfamily plus\npat 1x1 +\nfamily minus\npat 1x1 -\npat 1x1 0\n",
        )
        .unwrap();
        assert_eq!(f.group("plus").unwrap().len(), 1);
        assert_eq!(f.group("minus").unwrap().len(), 2);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse_pattern_file("alphabet 0 1\npat 2x1 1 2\n").unwrap_err();
        assert!(matches!(e, SymbolicError::Parse { line: 2, .. }));
        let e = parse_pattern_file("pat 1x1 0\n").unwrap_err();
        assert!(matches!(e, SymbolicError::Parse { line: 1, .. }));
        assert!(parse_pattern_file("alphabet 0 1\npat 2x2 0 0\n").is_err());
    }
}
