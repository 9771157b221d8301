//! Block recoding: a configuration over `S` read in non-overlapping blocks of
//! side `m` is a configuration over the block alphabet `T = S^{Λ_m}`, and the
//! block shift acts on it as the full shift. Birkhoff sums of a potential over
//! one block turn the base pressure into `λ_m` times itself.

use std::sync::Arc;

use thiserror::Error;

use crate::gibbs::{GibbsError, Potential, Transfer, DEFAULT_MAX_ITER};
use crate::symbolic::{Alphabet, Pattern, Point, SymbolicError, Window};

#[derive(Debug, Error)]
pub enum RecodingError {
    #[error("alignment: {0}")]
    Alignment(String),
    #[error("{0}")]
    Domain(String),
    #[error("{what} of size {size} exceeds the cap {cap}")]
    Cap { what: &'static str, size: u128, cap: u128 },
    #[error(transparent)]
    Gibbs(#[from] GibbsError),
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
}

impl RecodingError {
    pub fn is_resource(&self) -> bool {
        match self {
            RecodingError::Cap { .. } => true,
            RecodingError::Gibbs(e) => e.is_resource(),
            RecodingError::Symbolic(e) => e.is_resource(),
            _ => false,
        }
    }
}

pub type Result<T, E = RecodingError> = std::result::Result<T, E>;

/// Default limit on the block alphabet size.
pub const DEFAULT_BLOCK_CAP: u128 = 1 << 16;

/// The recoding `S^{Z^d} → T^{Z^d}` with blocks of side `m`.
#[derive(Debug, Clone)]
pub struct BlockCode {
    base: Arc<Alphabet>,
    dim: u8,
    m: usize,
    block: Window,
    blocks: Arc<Alphabet>,
}

impl BlockCode {
    pub fn new(base: Arc<Alphabet>, dim: u8, m: usize, cap: u128) -> Result<Self> {
        if m == 0 {
            return Err(RecodingError::Domain("block side must be positive".into()));
        }
        let block = match dim {
            1 => Window::segment(m)?,
            2 => Window::rect(m, m)?,
            _ => return Err(RecodingError::Domain(format!("unsupported dimension {dim}"))),
        };
        let s = base.len() as u128;
        let size = s
            .checked_pow(block.len() as u32)
            .filter(|&n| n <= cap)
            .ok_or(RecodingError::Cap {
                what: "block alphabet",
                size: s.saturating_pow(block.len() as u32),
                cap,
            })?;
        let names: Vec<String> = (0..size as usize)
            .map(|code| block_name(&base, dim, m, &decode(code, base.len(), block.len())))
            .collect();
        let blocks = Arc::new(Alphabet::new(names)?);
        Ok(BlockCode {
            base,
            dim,
            m,
            block,
            blocks,
        })
    }

    pub fn base(&self) -> &Arc<Alphabet> {
        &self.base
    }

    pub fn block_alphabet(&self) -> &Arc<Alphabet> {
        &self.blocks
    }

    pub fn block_window(&self) -> &Window {
        &self.block
    }

    pub fn side(&self) -> usize {
        self.m
    }

    /// `λ_m`, the number of sites in a block.
    pub fn lambda(&self) -> usize {
        self.block.len()
    }

    /// Block symbol of base symbols listed in block point order.
    pub fn encode(&self, symbols: &[usize]) -> usize {
        symbols.iter().rev().fold(0, |acc, &x| acc * self.base.len() + x)
    }

    pub fn decode(&self, t: usize) -> Vec<usize> {
        decode(t, self.base.len(), self.block.len())
    }

    fn grid_window(&self, w: usize, h: usize) -> Result<Window> {
        Ok(match self.dim {
            1 => Window::segment(w)?,
            _ => Window::rect(w, h)?,
        })
    }

    fn check_rect(&self, p: &Pattern, alphabet: &Alphabet) -> Result<(usize, usize)> {
        if p.dim() != self.dim {
            return Err(RecodingError::Domain(format!(
                "pattern of dimension {} for a {}-dimensional code",
                p.dim(),
                self.dim
            )));
        }
        if **p.alphabet() != *alphabet {
            return Err(RecodingError::Domain("pattern over the wrong alphabet".into()));
        }
        if !p.window().is_rectangle() {
            return Err(RecodingError::Alignment("pattern has holes".into()));
        }
        Ok((p.window().width(), p.window().height()))
    }
}

fn decode(mut code: usize, s: usize, n: usize) -> Vec<usize> {
    (0..n)
        .map(|_| {
            let x = code % s;
            code /= s;
            x
        })
        .collect()
}

fn block_name(base: &Alphabet, dim: u8, m: usize, symbols: &[usize]) -> String {
    let sep = if base.is_compact() { "" } else { "." };
    let row = |y: usize| {
        (0..m)
            .map(|x| base.symbol(symbols[y * m + x]))
            .collect::<Vec<_>>()
            .join(sep)
    };
    if dim == 1 {
        row(0)
    } else {
        (0..m).map(row).collect::<Vec<_>>().join("/")
    }
}

/// Reads `x` in aligned blocks: `f(x)_i = (σ^{m·i} x)|_{Λ_m}`.
pub fn recode_forward(x: &Pattern, code: &BlockCode) -> Result<Pattern> {
    let (w, h) = code.check_rect(x, &code.base)?;
    let m = code.m;
    let bh = if code.dim == 1 { 1 } else { m };
    if w % m != 0 || h % bh != 0 {
        return Err(RecodingError::Alignment(format!(
            "{w}x{h} window is not a union of {m}-blocks"
        )));
    }
    let (gw, gh) = (w / m, h / bh);
    let win = code.grid_window(gw, gh)?;
    Ok(Pattern::from_fn(code.blocks.clone(), win, |p| {
        let sym: Vec<usize> = code
            .block
            .points()
            .iter()
            .map(|q| {
                x.at(Point::new(p.x * m as i64 + q.x, p.y * bh as i64 + q.y))
                    .expect("aligned")
            })
            .collect();
        code.encode(&sym)
    })?)
}

/// Inverse of [`recode_forward`].
pub fn recode_backward(y: &Pattern, code: &BlockCode) -> Result<Pattern> {
    let (gw, gh) = code.check_rect(y, &code.blocks)?;
    let m = code.m;
    let bh = if code.dim == 1 { 1 } else { m };
    let win = code.grid_window(gw * m, gh * bh)?;
    Ok(Pattern::from_fn(code.base.clone(), win, |p| {
        let (bx, by) = (p.x as usize / m, p.y as usize / bh);
        let t = y.at(Point::new(bx as i64, by as i64)).expect("inside the grid");
        let i = code
            .block
            .position(Point::new(p.x % m as i64, p.y % bh as i64))
            .expect("inside the block");
        code.decode(t)[i]
    })?)
}

/// Topological entropy `log |P|` of the full shift over a set of blocks.
pub fn block_entropy(p: &[Pattern], code: &BlockCode) -> Result<f64> {
    let mut seen: Vec<&[usize]> = Vec::new();
    for b in p {
        if b.window() != &code.block || **b.alphabet() != *code.base {
            return Err(RecodingError::Domain("block of the wrong shape or alphabet".into()));
        }
        if !seen.contains(&b.symbols()) {
            seen.push(b.symbols());
        }
    }
    if seen.is_empty() {
        return Err(RecodingError::Domain("entropy of an empty block set".into()));
    }
    Ok((seen.len() as f64).ln())
}

/// Base and block-chain pressures of one potential.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    pub m: usize,
    pub beta: f64,
    pub base_pressure: f64,
    pub block_pressure: f64,
    pub ratio: f64,
}

impl ScalingReport {
    /// `|ratio − m| ≤ tol` (a zero base pressure needs a zero block pressure).
    pub fn holds(&self, tol: f64) -> bool {
        if self.base_pressure.abs() < 1e-300 {
            self.block_pressure.abs() <= tol
        } else {
            (self.ratio - self.m as f64).abs() <= tol
        }
    }
}

/// Computes `P(σ, βφ)` on the base chain and `P(σ^m, β S_m φ)` on the chain
/// of `m`-blocks, where `S_m φ` is the Birkhoff sum over one block.
pub fn pressure_scaling_check(p: &Potential, beta: f64, m: usize, cap: u128) -> Result<ScalingReport> {
    if p.window().dim() != 1 {
        return Err(RecodingError::Domain("the scaling check runs on chains".into()));
    }
    let code = BlockCode::new(p.alphabet().clone(), 1, m, cap)?;
    let w = p.window().width();
    // Blocks needed to see every window starting inside the first block.
    let nb = (m - 1 + w).div_ceil(m);
    let sm = Potential::from_fn(code.blocks.clone(), Window::segment(nb)?, cap, |blocks| {
        let x: Vec<usize> = blocks.iter().flat_map(|&t| code.decode(t)).collect();
        (0..m).map(|i| p.eval(&x[i..i + w])).sum()
    })?;
    let geom = crate::gibbs::Geometry::Chain;
    let base = Transfer::new(p, geom, cap)?.solve_with(beta, DEFAULT_MAX_ITER)?;
    let block = Transfer::new(&sm, geom, cap)?.solve_with(beta, DEFAULT_MAX_ITER)?;
    let (bp, kp) = (base.report().pressure, block.report().pressure);
    Ok(ScalingReport {
        m,
        beta,
        base_pressure: bp,
        block_pressure: kp,
        ratio: kp / bp,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gibbs::potential_direct;
    use crate::symbolic::ForbiddenSet;

    fn ab() -> Arc<Alphabet> {
        Arc::new(Alphabet::new(["a", "b"]).unwrap())
    }

    #[test]
    fn forward_groups_blocks() {
        let code = BlockCode::new(ab(), 1, 2, DEFAULT_BLOCK_CAP).unwrap();
        let x = Pattern::parse_word(ab(), "abab").unwrap();
        let y = recode_forward(&x, &code).unwrap();
        let names: Vec<&str> = y.symbols().iter().map(|&t| code.block_alphabet().symbol(t)).collect();
        assert_eq!(names, ["ab", "ab"]);
        assert_eq!(recode_backward(&y, &code).unwrap(), x);
        let odd = Pattern::parse_word(ab(), "aba").unwrap();
        assert!(matches!(recode_forward(&odd, &code), Err(RecodingError::Alignment(_))));
    }

    #[test]
    fn side_one_is_the_identity() {
        let code = BlockCode::new(ab(), 1, 1, DEFAULT_BLOCK_CAP).unwrap();
        let x = Pattern::parse_word(ab(), "abbab").unwrap();
        let y = recode_forward(&x, &code).unwrap();
        assert_eq!(y.symbols(), x.symbols());
        assert_eq!(code.lambda(), 1);
    }

    #[test]
    fn two_dimensional_blocks() {
        let code = BlockCode::new(ab(), 2, 2, DEFAULT_BLOCK_CAP).unwrap();
        assert_eq!(code.block_alphabet().len(), 16);
        let x = Pattern::from_rows(ab(), &[vec![0, 1, 1, 1], vec![0, 0, 1, 0]]).unwrap();
        let y = recode_forward(&x, &code).unwrap();
        assert_eq!(code.block_alphabet().symbol(y.symbols()[0]), "ab/aa");
        assert_eq!(code.block_alphabet().symbol(y.symbols()[1]), "bb/ba");
        assert_eq!(recode_backward(&y, &code).unwrap(), x);
    }

    #[test]
    fn entropies() {
        let code = BlockCode::new(ab(), 2, 2, DEFAULT_BLOCK_CAP).unwrap();
        let all: Vec<Pattern> = (0..16)
            .map(|t| Pattern::new(ab(), code.block_window().clone(), code.decode(t)).unwrap())
            .collect();
        assert!((block_entropy(&all, &code).unwrap() - 4.0 * 2f64.ln()).abs() < 1e-15);
        assert_eq!(block_entropy(&all[..1], &code).unwrap(), 0.0);
        assert!(block_entropy(&[], &code).is_err());
        let line = BlockCode::new(ab(), 1, 2, DEFAULT_BLOCK_CAP).unwrap();
        let golden: Vec<Pattern> = ["aa", "ab", "ba"].iter().map(|w| Pattern::parse_word(ab(), w).unwrap()).collect();
        assert!((block_entropy(&golden, &line).unwrap() - 3f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn pressure_scales_with_block_size() {
        let zero = Potential::zero(ab(), 1);
        let r = pressure_scaling_check(&zero, 1.0, 2, DEFAULT_BLOCK_CAP).unwrap();
        assert!((r.block_pressure - 2.0 * 2f64.ln()).abs() < 1e-12);
        let g = potential_direct(
            &ForbiddenSet::new(ab(), [Pattern::parse_word(ab(), "bb").unwrap()]).unwrap(),
        )
        .unwrap();
        for m in 1..=3 {
            let r = pressure_scaling_check(&g, 1.0, m, DEFAULT_BLOCK_CAP).unwrap();
            assert!(r.holds(1e-8), "{r:?}");
        }
    }
}
