//! Desk-scale run of the entropy-versus-energy mechanism: two families of
//! frequency-constrained words compete, and as β grows the equilibrium mass
//! moves to the family with the larger weighted count.

use std::cmp::Ordering;

use num_bigint::BigUint;

use super::{GibbsError, Potential, Result, Transfer};
use crate::bounds::{Family, Mode, Schedule};
use crate::exec;
use crate::subshift::{admissible, compare_weighted, signed_alphabet, weighted_g_count, Base, ZERO};
use crate::symbolic::{Pattern, Window};

/// Dominance threshold for a family's cylinder mass.
pub const DOMINANCE: f64 = 0.9;

#[derive(Debug, Clone)]
pub struct DemoOptions {
    pub schedule: Schedule,
    /// Number of levels used (at most 3).
    pub levels: usize,
    /// Reference weight of the symbol `0` (the blow-up multiplicity).
    pub multiplicity: u32,
    /// Ascending inverse temperatures.
    pub betas: Vec<f64>,
    pub cap: u128,
    pub max_iter: usize,
    pub max_prec: u32,
}

impl DemoOptions {
    /// `ℓ = (2, 4)`, `r = (3/4, 5/8)`, multiplicity 2, β from 0 to 16.
    pub fn asymmetric() -> Self {
        let schedule = Schedule::toy(&[
            (2, crate::bounds::rational(3, 4)),
            (4, crate::bounds::rational(5, 8)),
        ])
        .expect("valid toy schedule");
        DemoOptions {
            schedule,
            levels: 2,
            multiplicity: 2,
            betas: (0..=32).map(|i| i as f64 * 0.5).collect(),
            cap: super::DEFAULT_MATRIX_CAP,
            max_iter: super::DEFAULT_MAX_ITER,
            max_prec: 4096,
        }
    }
}

/// One β of the sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub beta: f64,
    pub pressure: f64,
    pub entropy: f64,
    pub energy: f64,
    pub mass_plus: f64,
    pub mass_minus: f64,
    pub variational_gap: f64,
}

impl SweepRow {
    pub fn dominant(&self) -> Option<Family> {
        if self.mass_plus > DOMINANCE {
            Some(Family::Plus)
        } else if self.mass_minus > DOMINANCE {
            Some(Family::Minus)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone)]
pub struct DemoReport {
    pub window: usize,
    pub states: usize,
    pub rows: Vec<SweepRow>,
    /// Consecutive dominant rows whose dominant family differs:
    /// `(β₁, β₂, before, after)`.
    pub flips: Vec<(f64, f64, Family, Family)>,
    /// Order of the plus and minus weighted counts at the top level, or
    /// `None` when a family has no level yet.
    pub weighted_order: Option<Ordering>,
}

impl DemoReport {
    /// The family favoured by the weighted counts.
    pub fn predicted(&self) -> Option<Family> {
        match self.weighted_order? {
            Ordering::Greater => Some(Family::Plus),
            Ordering::Less => Some(Family::Minus),
            Ordering::Equal => None,
        }
    }

    /// Dominant family at the largest β of the sweep.
    pub fn final_dominant(&self) -> Option<Family> {
        self.rows.last().and_then(SweepRow::dominant)
    }

    /// True when the last flip lands on the family the weighted counts favour.
    pub fn flip_matches_prediction(&self) -> bool {
        match (self.flips.last(), self.predicted()) {
            (Some(&(_, _, _, after)), Some(p)) => after == p && self.final_dominant() == Some(p),
            _ => false,
        }
    }

    /// First β at which the final dominant family takes over, if it does.
    pub fn crossover(&self) -> Option<f64> {
        self.flips.last().map(|f| f.1)
    }
}

fn words(len: usize, family: Family, k: usize, s: &Schedule, cap: u128) -> Result<Vec<Vec<usize>>> {
    let total = 3u128.checked_pow(len as u32).filter(|&t| t <= cap).ok_or(GibbsError::Cap {
        what: "family enumeration",
        size: 3u128.saturating_pow(len as u32),
        cap,
    })?;
    let mut out = Vec::new();
    for code in 0..total as usize {
        let mut x = code;
        let w: Vec<usize> = (0..len)
            .map(|_| {
                let a = x % 3;
                x /= 3;
                a
            })
            .collect();
        if admissible(&w, family, k, s)? {
            out.push(w);
        }
    }
    Ok(out)
}

/// Sweeps β for the potential that is `0` on windows admissible for some
/// active family and `−1` elsewhere, reporting the masses of both families.
pub fn oscillation_demo(opts: &DemoOptions) -> Result<DemoReport> {
    let s = &opts.schedule;
    let k = opts.levels;
    if s.mode() != Mode::Toy {
        return Err(GibbsError::Domain("the demo needs a toy schedule".into()));
    }
    if k == 0 || k > 3 || k > s.levels() {
        return Err(GibbsError::Domain(format!("levels must be in 1..=min(3, {})", s.levels())));
    }
    if opts.multiplicity == 0 {
        return Err(GibbsError::Domain("multiplicity must be positive".into()));
    }
    if opts.betas.windows(2).any(|w| w[0] >= w[1]) {
        return Err(GibbsError::Domain("betas must be strictly increasing".into()));
    }
    let len = s.window_usize(k).map_err(crate::subshift::SubshiftError::from)?;
    let active: Vec<Family> = [Family::Plus, Family::Minus]
        .into_iter()
        .filter(|&f| !s.family_levels(f, k).is_empty())
        .collect();
    let alphabet = signed_alphabet();
    let window = Window::segment(len)?;
    let plus = words(len, Family::Plus, k, s, opts.cap)?;
    let minus = words(len, Family::Minus, k, s, opts.cap)?;
    let potential = Potential::from_fn(alphabet.clone(), window.clone(), opts.cap, |w| {
        let ok = active
            .iter()
            .any(|&f| admissible(w, f, k, s).expect("levels validated above"));
        if ok {
            0.0
        } else {
            -1.0
        }
    })?;
    let mut weights = vec![1.0; 3];
    weights[ZERO] = opts.multiplicity as f64;
    let transfer = Transfer::with_weights(&potential, super::Geometry::Chain, &weights, opts.cap)?;
    let to_patterns = |ws: &[Vec<usize>]| -> Result<Vec<Pattern>> {
        ws.iter()
            .map(|w| Ok(Pattern::new(alphabet.clone(), window.clone(), w.clone())?))
            .collect()
    };
    let (gp, gm) = (to_patterns(&plus)?, to_patterns(&minus)?);
    let rows = exec::map(&opts.betas, |&beta| -> Result<SweepRow> {
        let eq = transfer.solve_with(beta, opts.max_iter)?;
        let r = eq.report();
        Ok(SweepRow {
            beta,
            pressure: r.pressure,
            entropy: r.entropy,
            energy: r.energy,
            mass_plus: eq.mass(&gp)?,
            mass_minus: eq.mass(&gm)?,
            variational_gap: r.variational_gap,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let mut flips = Vec::new();
    let mut last: Option<(f64, Family)> = None;
    for row in &rows {
        if let Some(f) = row.dominant() {
            if let Some((b, g)) = last {
                if g != f {
                    flips.push((b, row.beta, g, f));
                }
            }
            last = Some((row.beta, f));
        }
    }
    let weighted_order = if active.len() == 2 {
        let base = Base::Int(opts.multiplicity);
        let one = BigUint::from(1u32);
        let wp = weighted_g_count(k, Family::Plus, s, base, &one, opts.cap, 64)?;
        let wm = weighted_g_count(k, Family::Minus, s, base, &one, opts.cap, 64)?;
        Some(compare_weighted(&wp, &wm, opts.max_prec)?)
    } else {
        None
    };
    Ok(DemoReport {
        window: len,
        states: transfer.states(),
        rows,
        flips,
        weighted_order,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::rational;

    #[test]
    fn asymmetric_flip_matches_weighted_counts() {
        let mut opts = DemoOptions::asymmetric();
        opts.betas = vec![0.0, 1.5, 2.0, 4.0, 8.0, 16.0];
        let rep = oscillation_demo(&opts).unwrap();
        assert_eq!((rep.window, rep.states), (7, 729));
        assert!(rep.rows.iter().all(|r| r.variational_gap < 1e-8));
        assert_eq!(rep.rows[1].dominant(), Some(Family::Minus));
        assert_eq!(rep.final_dominant(), Some(Family::Plus));
        assert_eq!(rep.predicted(), Some(Family::Plus));
        assert!(rep.flip_matches_prediction());
        assert_eq!(rep.crossover(), Some(4.0));
    }

    #[test]
    fn single_level_starves_the_other_family() {
        let mut opts = DemoOptions::asymmetric();
        opts.levels = 1;
        opts.betas = vec![0.0, 4.0, 16.0];
        let rep = oscillation_demo(&opts).unwrap();
        let m: Vec<f64> = rep.rows.iter().map(|r| r.mass_minus).collect();
        assert!(m[0] > m[1] && m[1] > m[2] && m[2] < 1e-5);
        assert!(rep.weighted_order.is_none());
    }

    #[test]
    fn symmetric_schedule_gives_equal_masses() {
        let s = Schedule::toy(&[(2, rational(3, 4))]).unwrap().mirrored().unwrap();
        let opts = DemoOptions {
            schedule: s,
            levels: 1,
            betas: vec![0.0, 1.0, 5.0],
            ..DemoOptions::asymmetric()
        };
        let rep = oscillation_demo(&opts).unwrap();
        for r in &rep.rows {
            assert!((r.mass_plus - r.mass_minus).abs() < 1e-10, "{r:?}");
        }
        assert_eq!(rep.weighted_order, Some(Ordering::Equal));
    }

    #[test]
    fn options_are_validated() {
        let mut opts = DemoOptions::asymmetric();
        opts.betas = vec![1.0, 0.5];
        assert!(oscillation_demo(&opts).is_err());
        opts = DemoOptions::asymmetric();
        opts.levels = 4;
        assert!(oscillation_demo(&opts).is_err());
    }
}
