//! Finite-range interactions, locally constant potentials and their
//! equilibrium states on chains and fixed-height strips.
//!
//! Two readings of the cross-shaped forbidden-pattern potential are kept side
//! by side: [`potential_direct`] charges `−1` when the window anchored at the
//! origin is forbidden, [`potential_from_interaction`] spreads the interaction
//! `−|Λ|` evenly over the sites of each forbidden translate. Birkhoff sums of
//! the second are `|Λ|` times those of the first.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use thiserror::Error;

use crate::subshift::SubshiftError;
use crate::symbolic::{Alphabet, ForbiddenSet, Pattern, Point, SymbolicError, Window};

mod demo;
mod transfer;

pub use demo::{oscillation_demo, DemoOptions, DemoReport, SweepRow};
pub use transfer::{
    cylinder_mass, energy_bound_check, pressure, BoundCheck, Equilibrium, EquilibriumReport, Geometry,
    Transfer, DEFAULT_MATRIX_CAP, DEFAULT_MAX_ITER, EIGEN_TOL, VARIATIONAL_TOL,
};

#[derive(Debug, Error)]
pub enum GibbsError {
    #[error("conversion: {0}")]
    Conversion(String),
    #[error("{0}")]
    Domain(String),
    #[error("{what} of size {size} exceeds the cap {cap}")]
    Cap { what: &'static str, size: u128, cap: u128 },
    #[error("reducible transfer matrix with tied leading classes: {}", classes.join("; "))]
    Reducible { classes: Vec<String> },
    #[error("power iteration did not converge within {iterations} iterations (gap {gap:e})")]
    Convergence { iterations: usize, gap: f64 },
    #[error("inapplicable: {0}")]
    Inapplicable(String),
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
    #[error(transparent)]
    Subshift(#[from] SubshiftError),
}

impl GibbsError {
    pub fn is_resource(&self) -> bool {
        match self {
            GibbsError::Cap { .. } | GibbsError::Convergence { .. } => true,
            GibbsError::Symbolic(e) => e.is_resource(),
            GibbsError::Subshift(e) => e.is_resource(),
            _ => false,
        }
    }
}

pub type Result<T, E = GibbsError> = std::result::Result<T, E>;

/// Default limit on potential table sizes.
pub const DEFAULT_TABLE_CAP: u128 = 1 << 22;

fn table_size(s: usize, n: usize, cap: u128) -> Result<usize> {
    let mut size: u128 = 1;
    for _ in 0..n {
        size = size.saturating_mul(s as u128);
        if size > cap {
            return Err(GibbsError::Cap {
                what: "potential table",
                size,
                cap,
            });
        }
    }
    Ok(size as usize)
}

/// Mixed-radix index of a symbol assignment on a window.
fn encode(symbols: &[usize], s: usize) -> usize {
    symbols.iter().rev().fold(0, |acc, &x| acc * s + x)
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

/// One shape of a translation-invariant interaction: energies of the
/// patterns on `window` (unlisted patterns have energy 0).
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub window: Window,
    pub energy: HashMap<Vec<usize>, f64>,
}

/// Finite-range interaction, each shape stored once.
#[derive(Debug, Clone, PartialEq)]
pub struct Interaction {
    pub alphabet: Arc<Alphabet>,
    pub terms: Vec<Term>,
}

impl Interaction {
    /// Largest bounding-box side over all shapes.
    pub fn range(&self) -> usize {
        self.terms
            .iter()
            .map(|t| t.window.width().max(t.window.height()))
            .max()
            .unwrap_or(0)
    }

    pub fn energy(&self, term: usize, symbols: &[usize]) -> f64 {
        self.terms[term].energy.get(symbols).copied().unwrap_or(0.0)
    }
}

fn shared_window(f: &ForbiddenSet) -> Result<Option<Window>> {
    let mut shapes = f.patterns().iter().map(|p| p.window().clone());
    let Some(first) = shapes.next() else {
        return Ok(None);
    };
    if shapes.any(|w| w != first) {
        return Err(GibbsError::Conversion(
            "forbidden patterns must share one window shape".into(),
        ));
    }
    Ok(Some(first))
}

/// `Φ_Λ = −|Λ|` on forbidden patterns of the common shape, `0` elsewhere.
pub fn interaction_from_forbidden(f: &ForbiddenSet) -> Result<Interaction> {
    let terms = match shared_window(f)? {
        None => Vec::new(),
        Some(w) => {
            let e = -(w.len() as f64);
            vec![Term {
                energy: f.patterns().iter().map(|p| (p.symbols().to_vec(), e)).collect(),
                window: w,
            }]
        }
    };
    Ok(Interaction {
        alphabet: f.alphabet().clone(),
        terms,
    })
}

/// Locally constant function given by a table over all patterns on `window`.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    alphabet: Arc<Alphabet>,
    window: Window,
    table: Vec<f64>,
}

impl Potential {
    /// Tabulates `f` over every pattern on `window`.
    pub fn from_fn(
        alphabet: Arc<Alphabet>,
        window: Window,
        cap: u128,
        f: impl Fn(&[usize]) -> f64 + Sync + Send,
    ) -> Result<Self> {
        let s = alphabet.len();
        let n = window.len();
        let size = table_size(s, n, cap)?;
        let table = crate::exec::map_range(0..size, |code| f(&decode(code, s, n)));
        Self::from_table(alphabet, window, table)
    }

    pub fn from_table(alphabet: Arc<Alphabet>, window: Window, table: Vec<f64>) -> Result<Self> {
        let size = table_size(alphabet.len(), window.len(), u128::MAX)?;
        if table.len() != size {
            return Err(GibbsError::Domain(format!(
                "table has {} entries, the window needs {size}",
                table.len()
            )));
        }
        if table.iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
            return Err(GibbsError::Domain("potential values must be finite or -inf".into()));
        }
        Ok(Potential {
            alphabet,
            window,
            table,
        })
    }

    /// `φ ≡ 0` on a one-site window of the given dimension.
    pub fn zero(alphabet: Arc<Alphabet>, dim: u8) -> Self {
        let window = Window::new(dim, [Point::new(0, 0)]).expect("one point");
        let table = vec![0.0; alphabet.len()];
        Potential {
            alphabet,
            window,
            table,
        }
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    /// Value on symbols listed in window point order.
    pub fn eval(&self, symbols: &[usize]) -> f64 {
        self.table[encode(symbols, self.alphabet.len())]
    }

    pub fn eval_pattern(&self, p: &Pattern) -> Result<f64> {
        if p.window() != &self.window || **p.alphabet() != *self.alphabet {
            return Err(GibbsError::Domain("pattern does not match the potential window".into()));
        }
        Ok(self.eval(p.symbols()))
    }

    /// True when `φ ≤ 0` everywhere.
    pub fn is_nonpositive(&self) -> bool {
        self.table.iter().all(|&v| v <= 0.0)
    }

    pub fn scaled(&self, c: f64) -> Potential {
        Potential {
            table: self.table.iter().map(|v| v * c).collect(),
            ..self.clone()
        }
    }
}

/// `φ = −1` on forbidden windows and `0` elsewhere.
pub fn potential_direct(f: &ForbiddenSet) -> Result<Potential> {
    let Some(w) = shared_window(f)? else {
        return Ok(Potential::zero(f.alphabet().clone(), f.dim().unwrap_or(1)));
    };
    let s = f.alphabet().len();
    let mut table = vec![0.0; table_size(s, w.len(), DEFAULT_TABLE_CAP)?];
    for p in f.patterns() {
        table[encode(p.symbols(), s)] = -1.0;
    }
    Potential::from_table(f.alphabet().clone(), w, table)
}

/// `φ(x) = Σ_{Λ ∋ 0} Φ_Λ(x)/|Λ|`, tabulated on the union of all translates
/// of the interaction's shapes that contain the origin.
pub fn potential_from_interaction(phi: &Interaction, cap: u128) -> Result<Potential> {
    if phi.terms.is_empty() {
        return Ok(Potential::zero(phi.alphabet.clone(), 1));
    }
    let dim = phi.terms[0].window.dim();
    if phi.terms.iter().any(|t| t.window.dim() != dim) {
        return Err(GibbsError::Conversion("terms of mixed dimension".into()));
    }
    // Raw union, origin at (0, 0).
    let mut raw: BTreeSet<(i64, i64)> = BTreeSet::new();
    for t in &phi.terms {
        for p in t.window.points() {
            for q in t.window.points() {
                raw.insert((q.x - p.x, q.y - p.y));
            }
        }
    }
    let (mx, my) = (
        raw.iter().map(|p| p.0).min().unwrap_or(0),
        raw.iter().map(|p| p.1).min().unwrap_or(0),
    );
    let union = Window::new(dim, raw.iter().map(|&(x, y)| Point::new(x - mx, y - my)))?;
    // For each term and anchor, where each term point lands in the union.
    let placements: Vec<(usize, Vec<usize>)> = phi
        .terms
        .iter()
        .enumerate()
        .flat_map(|(ti, t)| {
            let union = &union;
            t.window.points().iter().map(move |p| {
                let pos = t
                    .window
                    .points()
                    .iter()
                    .map(|q| {
                        union
                            .position(Point::new(q.x - p.x - mx, q.y - p.y - my))
                            .expect("translate lies in the union")
                    })
                    .collect();
                (ti, pos)
            })
        })
        .collect();
    Potential::from_fn(phi.alphabet.clone(), union, cap, |x| {
        placements
            .iter()
            .map(|(ti, pos)| {
                let sym: Vec<usize> = pos.iter().map(|&i| x[i]).collect();
                phi.energy(*ti, &sym) / phi.terms[*ti].window.len() as f64
            })
            .sum()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binary() -> Arc<Alphabet> {
        Arc::new(Alphabet::new(["0", "1"]).unwrap())
    }

    fn golden() -> ForbiddenSet {
        let a = binary();
        ForbiddenSet::new(a.clone(), [Pattern::parse_word(a, "11").unwrap()]).unwrap()
    }

    fn cross_pattern(a: &Arc<Alphabet>, centre: usize) -> Pattern {
        Pattern::from_fn(a.clone(), Window::cross(), |p| {
            if p == Point::new(1, 1) {
                centre
            } else {
                0
            }
        })
        .unwrap()
    }

    #[test]
    fn forbidden_interaction_energy() {
        let a = binary();
        let f = ForbiddenSet::new(a.clone(), [cross_pattern(&a, 1)]).unwrap();
        let phi = interaction_from_forbidden(&f).unwrap();
        assert_eq!(phi.terms.len(), 1);
        assert_eq!(phi.energy(0, cross_pattern(&a, 1).symbols()), -5.0);
        assert_eq!(phi.energy(0, cross_pattern(&a, 0).symbols()), 0.0);
        assert_eq!(phi.range(), 3);
        let g = interaction_from_forbidden(&golden()).unwrap();
        assert_eq!(g.energy(0, &[1, 1]), -2.0);
        assert!(interaction_from_forbidden(&ForbiddenSet::empty(a)).unwrap().terms.is_empty());
    }

    #[test]
    fn mixed_shapes_are_rejected() {
        let a = binary();
        let f = ForbiddenSet::new(
            a.clone(),
            [Pattern::parse_word(a.clone(), "11").unwrap(), Pattern::parse_word(a, "101").unwrap()],
        )
        .unwrap();
        assert!(matches!(interaction_from_forbidden(&f), Err(GibbsError::Conversion(_))));
        assert!(matches!(potential_direct(&f), Err(GibbsError::Conversion(_))));
    }

    #[test]
    fn direct_golden_table() {
        let p = potential_direct(&golden()).unwrap();
        assert_eq!(p.eval(&[1, 1]), -1.0);
        for w in [[0, 0], [0, 1], [1, 0]] {
            assert_eq!(p.eval(&w), 0.0);
        }
        let a = binary();
        let f = ForbiddenSet::new(a.clone(), [cross_pattern(&a, 1)]).unwrap();
        let c = potential_direct(&f).unwrap();
        assert_eq!(c.eval_pattern(&cross_pattern(&a, 1)).unwrap(), -1.0);
        assert_eq!(c.eval_pattern(&cross_pattern(&a, 0)).unwrap(), 0.0);
    }

    #[test]
    fn interaction_reading_counts_covering_translates() {
        let a = binary();
        // Forbid every cross with centre 1; the all-ones configuration then
        // has all five covering crosses forbidden.
        let pats: Vec<Pattern> = (0..32usize)
            .map(|m| {
                let mut sym: Vec<usize> = (0..5).map(|i| m >> i & 1).collect();
                sym[2] = 1;
                Pattern::new(a.clone(), Window::cross(), sym).unwrap()
            })
            .collect();
        let f = ForbiddenSet::new(a.clone(), pats).unwrap();
        let phi = potential_from_interaction(&interaction_from_forbidden(&f).unwrap(), DEFAULT_TABLE_CAP).unwrap();
        assert_eq!(phi.window().len(), 13);
        let ones = vec![1; 13];
        assert!((phi.eval(&ones) + 5.0).abs() < 1e-12);
        // Only the origin is 1: exactly the centred cross is forbidden.
        let o = phi.window().position(Point::new(2, 2)).unwrap();
        let mut one = vec![0; 13];
        one[o] = 1;
        assert!((phi.eval(&one) + 1.0).abs() < 1e-12);
        assert!((phi.eval(&[0; 13]) - 0.0).abs() < 1e-12);
        // The direct reading gives -1 on the all-ones window either way.
        let d = potential_direct(&f).unwrap();
        assert_eq!(d.eval(&[1; 5]), -1.0);
    }

    #[test]
    fn zero_interaction_gives_zero_potential() {
        let a = binary();
        let phi = Interaction {
            alphabet: a,
            terms: Vec::new(),
        };
        let p = potential_from_interaction(&phi, 16).unwrap();
        assert!(p.table().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn table_cap_is_enforced() {
        let a = binary();
        let w = Window::segment(30).unwrap();
        assert!(matches!(
            Potential::from_fn(a, w, 1 << 20, |_| 0.0),
            Err(GibbsError::Cap { .. })
        ));
    }
}
