//! Transfer operators over chain blocks or strip columns, Perron vectors by
//! power iteration, and the Markov measure they define.
//!
//! A state is `d = max(w − 1, 1)` consecutive columns (a column is one symbol
//! on a chain, `h` symbols on a strip of height `h` with vertical wrap), where
//! `w` is the potential window's width. Appending a column is one transition;
//! its log weight is `β · (sum of φ over the h window placements starting at
//! the first column) + log(reference weight of the new column)`.

use std::fmt;

use crate::exec;
use crate::symbolic::{Pattern, Point};

use super::{GibbsError, Potential, Result};

/// Relative Collatz–Wielandt gap at which power iteration stops.
pub const EIGEN_TOL: f64 = 1e-12;
/// Allowed `|P − h − β·E|` per site.
pub const VARIATIONAL_TOL: f64 = 1e-8;
/// Default cap on transitions (states × columns).
pub const DEFAULT_MATRIX_CAP: u128 = 1 << 24;
pub const DEFAULT_MAX_ITER: usize = 2_000_000;
/// Entries this far below the largest one (in log scale) are dropped.
const NEGLIGIBLE: f64 = -300.0;
/// Lazy-walk shift used when the support may be periodic.
const SHIFT: f64 = 0.125;
/// Leading classes closer than this (in log λ) count as tied.
const TIE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Geometry {
    Chain,
    /// Bi-infinite strip of the given height, periodic vertically.
    Strip(usize),
}

impl Geometry {
    pub fn height(self) -> usize {
        match self {
            Geometry::Chain => 1,
            Geometry::Strip(h) => h,
        }
    }
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Geometry::Chain => f.write_str("chain"),
            Geometry::Strip(h) => write!(f, "strip({h})"),
        }
    }
}

/// β-independent part of the transfer operator.
#[derive(Debug, Clone)]
pub struct Transfer {
    geometry: Geometry,
    s: usize,
    h: usize,
    cols: usize,
    d: usize,
    states: usize,
    /// Per transition `u·cols + c`: summed potential, possibly `-inf`.
    energy: Vec<f64>,
    /// Per column: log of its reference weight.
    log_weight: Vec<f64>,
    total_weight: f64,
}

fn checked_pow(base: usize, exp: usize, cap: u128, what: &'static str) -> Result<usize> {
    let mut v: u128 = 1;
    for _ in 0..exp {
        v = v.saturating_mul(base as u128);
        if v > cap {
            return Err(GibbsError::Cap { what, size: v, cap });
        }
    }
    Ok(v as usize)
}

impl Transfer {
    /// Transfer operator with the counting reference measure.
    pub fn new(p: &Potential, geometry: Geometry, cap: u128) -> Result<Self> {
        Self::with_weights(p, geometry, &vec![1.0; p.alphabet().len()], cap)
    }

    /// Transfer operator where symbol `a` carries reference weight
    /// `weights[a]` (an integer weight `b` is the same as `b` copies of `a`).
    pub fn with_weights(p: &Potential, geometry: Geometry, weights: &[f64], cap: u128) -> Result<Self> {
        let s = p.alphabet().len();
        if weights.len() != s || weights.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(GibbsError::Domain(format!("need {s} positive finite symbol weights")));
        }
        let win = p.window();
        let h = geometry.height();
        match geometry {
            Geometry::Chain if win.dim() != 1 => {
                return Err(GibbsError::Domain("a chain needs a one-dimensional potential".into()))
            }
            Geometry::Strip(_) if win.dim() != 2 => {
                return Err(GibbsError::Domain("a strip needs a two-dimensional potential".into()))
            }
            Geometry::Strip(hh) if hh == 0 || win.height() > hh => {
                return Err(GibbsError::Domain(format!(
                    "strip height {hh} is below the window height {}",
                    win.height()
                )))
            }
            _ => {}
        }
        let cols = checked_pow(s, h, cap, "transfer columns")?;
        let d = win.width().saturating_sub(1).max(1);
        let states = checked_pow(cols, d, cap, "transfer states")?;
        let edges = (states as u128) * (cols as u128);
        if edges > cap {
            return Err(GibbsError::Cap {
                what: "transfer matrix",
                size: edges,
                cap,
            });
        }
        let spow: Vec<usize> = (0..h).map(|i| s.pow(i as u32)).collect();
        let cpow: Vec<usize> = (0..d).map(|i| cols.pow(i as u32)).collect();
        let points: Vec<Point> = win.points().to_vec();
        let mut energy = vec![0.0; edges as usize];
        exec::fill(&mut energy, |e| {
            let (u, c) = (e / cols, e % cols);
            let col = |j: usize| if j < d { u / cpow[j] % cols } else { c };
            let mut total = 0.0;
            let mut sym = vec![0; points.len()];
            for y in 0..h {
                for (k, pt) in points.iter().enumerate() {
                    let row = (y + pt.y as usize) % h;
                    sym[k] = col(pt.x as usize) / spow[row] % s;
                }
                total += p.eval(&sym);
            }
            total
        });
        let log_weight = (0..cols)
            .map(|c| (0..h).map(|y| weights[c / spow[y] % s].ln()).sum())
            .collect();
        Ok(Transfer {
            geometry,
            s,
            h,
            cols,
            d,
            states,
            energy,
            log_weight,
            total_weight: weights.iter().sum(),
        })
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn transitions(&self) -> usize {
        self.energy.len()
    }

    /// Log of the total reference weight of one site (`log |S|` when
    /// unweighted).
    pub fn log_alphabet(&self) -> f64 {
        self.total_weight.ln()
    }

    fn next(&self, u: usize, c: usize) -> usize {
        u / self.cols + c * (self.states / self.cols)
    }

    /// Predecessor of `v` whose first column is `c0`, with the column appended.
    fn pred(&self, v: usize, c0: usize) -> (usize, usize) {
        let top = self.states / self.cols;
        (c0 + (v % top) * self.cols, v / top)
    }

    /// Does the subshift of zero-energy transitions contain a bi-infinite path?
    pub fn zero_energy_nonempty(&self) -> bool {
        let zero = |e: usize| self.energy[e] == 0.0;
        let mut alive = vec![true; self.states];
        let mut out: Vec<usize> = (0..self.states)
            .map(|u| (0..self.cols).filter(|&c| zero(u * self.cols + c)).count())
            .collect();
        let mut stack: Vec<usize> = (0..self.states).filter(|&u| out[u] == 0).collect();
        while let Some(v) = stack.pop() {
            if !alive[v] {
                continue;
            }
            alive[v] = false;
            for c0 in 0..self.cols {
                let (u, c) = self.pred(v, c0);
                if alive[u] && zero(u * self.cols + c) {
                    out[u] -= 1;
                    if out[u] == 0 {
                        stack.push(u);
                    }
                }
            }
        }
        alive.iter().any(|&a| a)
    }

    fn state_label(&self, u: usize) -> String {
        let mut cols = Vec::new();
        let mut x = u;
        for _ in 0..self.d {
            let c = x % self.cols;
            x /= self.cols;
            let mut col = c;
            let syms: Vec<String> = (0..self.h)
                .map(|_| {
                    let a = col % self.s;
                    col /= self.s;
                    a.to_string()
                })
                .collect();
            cols.push(syms.join(""));
        }
        cols.join("|")
    }

    /// Equilibrium state at inverse temperature `beta`.
    pub fn solve(&self, beta: f64) -> Result<Equilibrium> {
        self.solve_with(beta, DEFAULT_MAX_ITER)
    }

    pub fn solve_with(&self, beta: f64, max_iter: usize) -> Result<Equilibrium> {
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(GibbsError::Domain(format!("beta must be finite and nonnegative, got {beta}")));
        }
        let log_a: Vec<f64> = (0..self.energy.len())
            .map(|e| {
                let en = self.energy[e];
                if en == f64::NEG_INFINITY {
                    en
                } else {
                    beta * en + self.log_weight[e % self.cols]
                }
            })
            .collect();
        let scale = log_a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if scale == f64::NEG_INFINITY {
            return Err(GibbsError::Reducible {
                classes: vec!["no admissible transition".into()],
            });
        }
        let lin: Vec<f64> = log_a
            .iter()
            .map(|&x| if x - scale < NEGLIGIBLE { 0.0 } else { (x - scale).exp() })
            .collect();
        let full = lin.iter().all(|&x| x > 0.0);
        let mask = if full { None } else { Some(self.leading_class(&lin, max_iter)?) };
        let shift = !full;
        let (r, lam, it_r) = self.power(&lin, mask.as_deref(), false, shift, max_iter)?;
        let (l, _, it_l) = self.power(&lin, mask.as_deref(), true, shift, max_iter)?;
        let active = |u: usize| mask.as_ref().is_none_or(|m| m[u]);
        let rowsum: Vec<f64> = (0..self.states)
            .map(|u| {
                if !active(u) {
                    return 0.0;
                }
                (0..self.cols)
                    .map(|c| lin[u * self.cols + c] * r[self.next(u, c)])
                    .sum()
            })
            .collect();
        let mut pi: Vec<f64> = (0..self.states).map(|u| if active(u) { l[u] * r[u] } else { 0.0 }).collect();
        let z: f64 = pi.iter().sum();
        pi.iter_mut().for_each(|x| *x /= z);

        let (mut energy, mut entropy) = (0.0, 0.0);
        for u in 0..self.states {
            if pi[u] == 0.0 {
                continue;
            }
            for c in 0..self.cols {
                let e = u * self.cols + c;
                let p = lin[e] * r[self.next(u, c)] / rowsum[u];
                if p > 0.0 {
                    let f = pi[u] * p;
                    energy += f * self.energy[e];
                    entropy -= f * (p.ln() - self.log_weight[c]);
                }
            }
        }
        let h = self.h as f64;
        let pressure = (lam.ln() + scale) / h;
        let (energy, entropy) = (energy / h, entropy / h);
        Ok(Equilibrium {
            transfer: self.clone(),
            beta,
            lin,
            r,
            l,
            rowsum,
            pi,
            report: EquilibriumReport {
                beta,
                geometry: self.geometry,
                pressure,
                entropy,
                energy,
                variational_gap: (pressure - entropy - beta * energy).abs(),
                iterations: it_r.max(it_l),
                states: self.states,
                class_size: mask.as_ref().map_or(self.states, |m| m.iter().filter(|&&x| x).count()),
                marginals: Vec::new(),
            },
        })
    }

    /// Power iteration on the active states. Returns the normalised Perron
    /// vector, the eigenvalue (of the scaled matrix) and the iteration count.
    fn power(
        &self,
        lin: &[f64],
        mask: Option<&[bool]>,
        transpose: bool,
        shift: bool,
        max_iter: usize,
    ) -> Result<(Vec<f64>, f64, usize)> {
        let n = self.states;
        let active = |u: usize| mask.is_none_or(|m| m[u]);
        let mut v: Vec<f64> = (0..n).map(|u| if active(u) { 1.0 } else { 0.0 }).collect();
        let mut w = vec![0.0; n];
        let mut gap = f64::INFINITY;
        for it in 1..=max_iter {
            exec::fill(&mut w, |u| {
                if !active(u) {
                    return 0.0;
                }
                let mut acc = 0.0;
                for c in 0..self.cols {
                    acc += if transpose {
                        let (p, cc) = self.pred(u, c);
                        lin[p * self.cols + cc] * v[p]
                    } else {
                        lin[u * self.cols + c] * v[self.next(u, c)]
                    };
                }
                acc
            });
            let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
            for u in 0..n {
                if v[u] > 0.0 {
                    let q = w[u] / v[u];
                    lo = lo.min(q);
                    hi = hi.max(q);
                } else if w[u] > 0.0 {
                    hi = f64::INFINITY;
                }
            }
            if hi == 0.0 {
                return Ok((v, 0.0, it));
            }
            gap = (hi - lo) / hi;
            let done = gap <= EIGEN_TOL;
            let sigma = if shift { SHIFT * hi } else { 0.0 };
            let norm = (0..n).map(|u| w[u] + sigma * v[u]).fold(0.0, f64::max);
            for u in 0..n {
                v[u] = (w[u] + sigma * v[u]) / norm;
            }
            if done {
                return Ok((v, 0.5 * (lo + hi), it));
            }
        }
        Err(GibbsError::Convergence {
            iterations: max_iter,
            gap,
        })
    }

    /// Mask of the communicating class carrying the largest eigenvalue.
    fn leading_class(&self, lin: &[f64], max_iter: usize) -> Result<Vec<bool>> {
        let classes = self.classes(lin);
        let mut best: Vec<(f64, usize)> = Vec::new();
        for (i, cl) in classes.iter().enumerate() {
            let mut mask = vec![false; self.states];
            cl.iter().for_each(|&u| mask[u] = true);
            let (_, lam, _) = self.power(lin, Some(&mask), false, true, max_iter)?;
            if lam > 0.0 {
                best.push((lam.ln(), i));
            }
        }
        best.sort_by(|a, b| b.0.total_cmp(&a.0));
        match best.as_slice() {
            [] => Err(GibbsError::Reducible {
                classes: vec!["no class carries a cycle".into()],
            }),
            [(top, _), (second, _), ..] if top - second < TIE => Err(GibbsError::Reducible {
                classes: best
                    .iter()
                    .take_while(|(l, _)| top - l < TIE)
                    .map(|&(l, i)| {
                        format!(
                            "{} states from {} (log lambda {:.12})",
                            classes[i].len(),
                            self.state_label(classes[i][0]),
                            l
                        )
                    })
                    .collect(),
            }),
            [(_, i), ..] => {
                let mut mask = vec![false; self.states];
                classes[*i].iter().for_each(|&u| mask[u] = true);
                Ok(mask)
            }
        }
    }

    /// Strongly connected components of the support that carry a cycle.
    fn classes(&self, lin: &[f64]) -> Vec<Vec<usize>> {
        let n = self.states;
        let succ = |u: usize| {
            (0..self.cols)
                .filter(move |&c| lin[u * self.cols + c] > 0.0)
                .map(move |c| self.next(u, c))
        };
        // Iterative Tarjan.
        let mut index = vec![usize::MAX; n];
        let mut low = vec![0; n];
        let mut on_stack = vec![false; n];
        let mut stack = Vec::new();
        let mut out = Vec::new();
        let mut counter = 0;
        for root in 0..n {
            if index[root] != usize::MAX {
                continue;
            }
            let mut call: Vec<(usize, Vec<usize>)> = vec![(root, succ(root).collect())];
            index[root] = counter;
            low[root] = counter;
            counter += 1;
            stack.push(root);
            on_stack[root] = true;
            while let Some((u, rest)) = call.last_mut() {
                let u = *u;
                if let Some(v) = rest.pop() {
                    if index[v] == usize::MAX {
                        index[v] = counter;
                        low[v] = counter;
                        counter += 1;
                        stack.push(v);
                        on_stack[v] = true;
                        call.push((v, succ(v).collect()));
                    } else if on_stack[v] {
                        low[u] = low[u].min(index[v]);
                    }
                    continue;
                }
                call.pop();
                if let Some((parent, _)) = call.last() {
                    let p = *parent;
                    low[p] = low[p].min(low[u]);
                }
                if low[u] == index[u] {
                    let mut comp = Vec::new();
                    loop {
                        let v = stack.pop().expect("tarjan stack");
                        on_stack[v] = false;
                        comp.push(v);
                        if v == u {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    let cyclic = comp.len() > 1 || succ(u).any(|v| v == u);
                    if cyclic {
                        out.push(comp);
                    }
                }
            }
        }
        out.sort();
        out
    }
}

/// Summary numbers of one equilibrium computation, per site.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumReport {
    pub beta: f64,
    pub geometry: Geometry,
    pub pressure: f64,
    pub entropy: f64,
    pub energy: f64,
    /// `|pressure − entropy − β·energy|`.
    pub variational_gap: f64,
    pub iterations: usize,
    pub states: usize,
    /// Size of the communicating class the measure lives on.
    pub class_size: usize,
    pub marginals: Vec<(String, f64)>,
}

impl EquilibriumReport {
    pub fn variational_ok(&self) -> bool {
        self.variational_gap <= VARIATIONAL_TOL
    }

    pub fn is_reducible(&self) -> bool {
        self.class_size < self.states
    }
}

impl fmt::Display for EquilibriumReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "beta={} geometry={} pressure={:.12} entropy={:.12} energy={:.12} gap={:.3e}",
            self.beta, self.geometry, self.pressure, self.entropy, self.energy, self.variational_gap
        )?;
        if self.is_reducible() {
            write!(f, " class={}/{}", self.class_size, self.states)?;
        }
        for (name, m) in &self.marginals {
            write!(f, " mass_{name}={m:.12}")?;
        }
        Ok(())
    }
}

/// The Markov measure built from the Perron vectors.
#[derive(Debug, Clone)]
pub struct Equilibrium {
    transfer: Transfer,
    pub beta: f64,
    lin: Vec<f64>,
    r: Vec<f64>,
    l: Vec<f64>,
    rowsum: Vec<f64>,
    pi: Vec<f64>,
    report: EquilibriumReport,
}

impl Equilibrium {
    pub fn report(&self) -> &EquilibriumReport {
        &self.report
    }

    /// Report with the masses of the named cylinder families filled in.
    pub fn report_with(&self, families: &[(String, Vec<Pattern>)]) -> Result<EquilibriumReport> {
        let mut rep = self.report.clone();
        for (name, g) in families {
            rep.marginals.push((name.clone(), self.mass(g)?));
        }
        Ok(rep)
    }

    /// Left and right Perron vectors (each scaled to maximum 1).
    pub fn perron_vectors(&self) -> (&[f64], &[f64]) {
        (&self.l, &self.r)
    }

    pub fn transfer(&self) -> &Transfer {
        &self.transfer
    }

    fn prob(&self, u: usize, c: usize) -> f64 {
        let t = &self.transfer;
        if self.rowsum[u] == 0.0 {
            return 0.0;
        }
        self.lin[u * t.cols + c] * self.r[t.next(u, c)] / self.rowsum[u]
    }

    /// Probability of the union of the cylinders of `g` placed with their
    /// lower-left corner at the origin. Patterns must share one window.
    pub fn mass(&self, g: &[Pattern]) -> Result<f64> {
        let Some(first) = g.first() else {
            return Ok(0.0);
        };
        let t = &self.transfer;
        let win = first.window();
        let dim_ok = match t.geometry {
            Geometry::Chain => win.dim() == 1,
            Geometry::Strip(h) => win.dim() == 2 && win.height() <= h,
        };
        if !dim_ok {
            return Err(GibbsError::Domain(format!(
                "family window {}x{} does not fit the {}",
                win.width(),
                win.height(),
                t.geometry
            )));
        }
        if first.alphabet().len() != t.s {
            return Err(GibbsError::Domain("family over a different alphabet".into()));
        }
        let mut seen: Vec<&[usize]> = Vec::new();
        let mut total = 0.0;
        for p in g {
            if p.window() != win {
                return Err(GibbsError::Domain("family patterns must share one window".into()));
            }
            if seen.contains(&p.symbols()) {
                continue;
            }
            seen.push(p.symbols());
            total += self.pattern_mass(p);
        }
        Ok(total)
    }

    fn pattern_mass(&self, p: &Pattern) -> f64 {
        let t = &self.transfer;
        let width = p.window().width();
        let spow: Vec<usize> = (0..t.h).map(|i| t.s.pow(i as u32)).collect();
        // ok[x][c]: column value c agrees with the pattern in column x.
        let ok: Vec<Vec<bool>> = (0..width)
            .map(|x| {
                let cells: Vec<(usize, usize)> = p
                    .window()
                    .points()
                    .iter()
                    .zip(p.symbols())
                    .filter(|(pt, _)| pt.x as usize == x)
                    .map(|(pt, &a)| (pt.y as usize, a))
                    .collect();
                (0..t.cols)
                    .map(|c| cells.iter().all(|&(y, a)| c / spow[y] % t.s == a))
                    .collect()
            })
            .collect();
        let top = t.states / t.cols;
        let mut v: Vec<f64> = (0..t.states)
            .map(|u| {
                let mut x = u;
                for col in ok.iter().take(t.d) {
                    if !col[x % t.cols] {
                        return 0.0;
                    }
                    x /= t.cols;
                }
                self.pi[u]
            })
            .collect();
        for col in ok.iter().skip(t.d) {
            let prev = v;
            v = vec![0.0; t.states];
            exec::fill(&mut v, |w| {
                let c = w / top;
                if !col[c] {
                    return 0.0;
                }
                (0..t.cols)
                    .map(|c0| {
                        let (u, _) = t.pred(w, c0);
                        prev[u] * self.prob(u, c)
                    })
                    .sum()
            });
        }
        v.iter().sum()
    }
}

/// Equilibrium report for `β·φ` with the counting reference measure.
pub fn pressure(p: &Potential, beta: f64, geometry: Geometry, cap: u128) -> Result<EquilibriumReport> {
    Ok(Transfer::new(p, geometry, cap)?.solve(beta)?.report().clone())
}

/// Mass of the union of cylinders `g` under the equilibrium state of `β·φ`.
pub fn cylinder_mass(g: &[Pattern], p: &Potential, beta: f64, geometry: Geometry, cap: u128) -> Result<f64> {
    Transfer::new(p, geometry, cap)?.solve(beta)?.mass(g)
}

/// Outcome of the energy lower bound `∫φ dμ_β ≥ −C/β`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    pub holds: bool,
    pub bound: f64,
    /// `energy − bound`.
    pub margin: f64,
}

/// Checks `energy ≥ −C/β` with `C` the log of the (weighted) alphabet size.
/// Requires a nonempty zero-energy subshift, which is what makes the
/// pressure nonnegative.
pub fn energy_bound_check(t: &Transfer, report: &EquilibriumReport) -> Result<BoundCheck> {
    if !t.zero_energy_nonempty() {
        return Err(GibbsError::Inapplicable(
            "no configuration has zero energy everywhere".into(),
        ));
    }
    if report.beta <= 0.0 {
        return Err(GibbsError::Inapplicable("the bound needs beta > 0".into()));
    }
    let bound = -t.log_alphabet() / report.beta;
    let margin = report.energy - bound;
    Ok(BoundCheck {
        holds: margin >= 0.0,
        bound,
        margin,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::super::{
        interaction_from_forbidden, potential_direct, potential_from_interaction, DEFAULT_TABLE_CAP,
    };
    use super::*;
    use crate::symbolic::{Alphabet, ForbiddenSet, Window};

    fn binary() -> Arc<Alphabet> {
        Arc::new(Alphabet::new(["0", "1"]).unwrap())
    }

    fn golden() -> Potential {
        let a = binary();
        potential_direct(&ForbiddenSet::new(a.clone(), [Pattern::parse_word(a, "11").unwrap()]).unwrap()).unwrap()
    }

    fn golden_lambda(beta: f64) -> f64 {
        // Largest root of x² − (1 + e^{−β})x + (e^{−β} − 1).
        let t = 1.0 + (-beta).exp();
        let det = (-beta).exp() - 1.0;
        0.5 * (t + (t * t - 4.0 * det).sqrt())
    }

    fn word(s: &str) -> Pattern {
        Pattern::parse_word(binary(), s).unwrap()
    }

    #[test]
    fn full_shift_pressure() {
        for s in [2usize, 3, 5] {
            let names: Vec<String> = (0..s).map(|i| i.to_string()).collect();
            let a = Arc::new(Alphabet::new(names).unwrap());
            let r = pressure(&Potential::zero(a, 1), 1.0, Geometry::Chain, DEFAULT_MATRIX_CAP).unwrap();
            assert!((r.pressure - (s as f64).ln()).abs() < 1e-9);
            assert!((r.entropy - (s as f64).ln()).abs() < 1e-9);
            assert!(r.energy.abs() < 1e-12 && r.variational_ok());
        }
    }

    #[test]
    fn golden_mean_against_closed_form() {
        let p = golden();
        for beta in [0.0, 0.5, 1.0, 2.0, 6.0, 20.0] {
            let r = pressure(&p, beta, Geometry::Chain, DEFAULT_MATRIX_CAP).unwrap();
            assert!((r.pressure - golden_lambda(beta).ln()).abs() < 1e-10, "{r}");
            assert!(r.variational_ok(), "{r}");
        }
        let r6 = pressure(&p, 6.0, Geometry::Chain, DEFAULT_MATRIX_CAP).unwrap();
        assert!((r6.pressure - 0.481212).abs() < 0.01);
        let r0 = pressure(&p, 0.0, Geometry::Chain, DEFAULT_MATRIX_CAP).unwrap();
        assert!((r0.pressure - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn large_beta_is_stable() {
        let r = pressure(&golden(), 1000.0, Geometry::Chain, DEFAULT_MATRIX_CAP).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((r.pressure - phi.ln()).abs() < 1e-10, "{r}");
        assert!(r.variational_ok());
    }

    #[test]
    fn marginals() {
        let t = Transfer::new(&golden(), Geometry::Chain, DEFAULT_MATRIX_CAP).unwrap();
        let eq0 = t.solve(0.0).unwrap();
        assert!((eq0.mass(&[word("0")]).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(eq0.mass(&[]).unwrap(), 0.0);
        let all: Vec<Pattern> = (0..8).map(|m| word(&format!("{}{}{}", m & 1, m >> 1 & 1, m >> 2 & 1))).collect();
        let eq = t.solve(3.0).unwrap();
        assert!((eq.mass(&all).unwrap() - 1.0).abs() < 1e-12);
        // Far beyond any physical β the measure is the Parry measure.
        let parry = (5.0 + 5f64.sqrt()) / 10.0;
        let hard = t.solve(800.0).unwrap();
        assert!((hard.mass(&[word("0")]).unwrap() - parry).abs() < 1e-10);
        assert!(hard.mass(&[word("11")]).unwrap() < 1e-100);
    }

    #[test]
    fn hard_constraints_use_the_leading_class() {
        // Two disjoint cycles: "0" repeated, and "1" with weight 3 via duplicates.
        let a = binary();
        let table = vec![0.0, f64::NEG_INFINITY, f64::NEG_INFINITY, 0.0];
        let p = Potential::from_table(a.clone(), Window::segment(2).unwrap(), table).unwrap();
        let t = Transfer::with_weights(&p, Geometry::Chain, &[1.0, 3.0], DEFAULT_MATRIX_CAP).unwrap();
        let eq = t.solve(1.0).unwrap();
        assert!((eq.report().pressure - 3f64.ln()).abs() < 1e-12);
        assert_eq!(eq.report().class_size, 1);
        assert!((eq.mass(&[word("1")]).unwrap() - 1.0).abs() < 1e-12);
        let tie = Transfer::new(&p, Geometry::Chain, DEFAULT_MATRIX_CAP).unwrap();
        assert!(matches!(tie.solve(1.0), Err(GibbsError::Reducible { .. })));
        // Period two: only alternation survives.
        let alt = Potential::from_table(a, Window::segment(2).unwrap(), vec![f64::NEG_INFINITY, 0.0, 0.0, f64::NEG_INFINITY])
            .unwrap();
        let r = pressure(&alt, 2.0, Geometry::Chain, DEFAULT_MATRIX_CAP).unwrap();
        assert!(r.pressure.abs() < 1e-12 && r.variational_ok());
    }

    #[test]
    fn energy_bound() {
        let t = Transfer::new(&golden(), Geometry::Chain, DEFAULT_MATRIX_CAP).unwrap();
        for beta in [0.5, 1.0, 2.0, 4.0, 8.0] {
            let eq = t.solve(beta).unwrap();
            let chk = energy_bound_check(&t, eq.report()).unwrap();
            assert!(chk.holds && (chk.bound + 2f64.ln() / beta).abs() < 1e-15);
        }
        let a = binary();
        let all = ForbiddenSet::new(a.clone(), [word("0"), word("1")]).unwrap();
        let dead = Transfer::new(&potential_direct(&all).unwrap(), Geometry::Chain, DEFAULT_MATRIX_CAP).unwrap();
        let rep = dead.solve(1.0).unwrap();
        assert!(matches!(energy_bound_check(&dead, rep.report()), Err(GibbsError::Inapplicable(_))));
    }

    #[test]
    fn readings_differ_by_window_size() {
        let a = binary();
        let f = ForbiddenSet::new(a.clone(), [word("11")]).unwrap();
        let direct = potential_direct(&f).unwrap();
        let spread = potential_from_interaction(&interaction_from_forbidden(&f).unwrap(), DEFAULT_TABLE_CAP).unwrap();
        for beta in [0.5, 1.5] {
            let a = pressure(&spread, beta, Geometry::Chain, DEFAULT_MATRIX_CAP).unwrap();
            let b = pressure(&direct, 2.0 * beta, Geometry::Chain, DEFAULT_MATRIX_CAP).unwrap();
            assert!((a.pressure - b.pressure).abs() < 1e-10);
        }
    }

    #[test]
    fn strips() {
        let a = binary();
        let cross = Pattern::from_fn(a.clone(), Window::cross(), |_| 1).unwrap();
        let f = ForbiddenSet::new(a.clone(), [cross]).unwrap();
        let p = potential_direct(&f).unwrap();
        let mut last = f64::INFINITY;
        for h in 3..=4 {
            let t = Transfer::new(&p, Geometry::Strip(h), DEFAULT_MATRIX_CAP).unwrap();
            let rep = t.solve(2.0).unwrap();
            assert!(rep.report().variational_ok(), "{}", rep.report());
            assert!(rep.report().pressure <= 2f64.ln() && rep.report().pressure > 0.0);
            last = last.min(rep.report().pressure);
        }
        assert!(last.is_finite());
        let zero = pressure(&Potential::zero(a.clone(), 2), 0.0, Geometry::Strip(2), DEFAULT_MATRIX_CAP).unwrap();
        assert!((zero.pressure - 2f64.ln()).abs() < 1e-12);
        assert!(Transfer::new(&p, Geometry::Strip(2), DEFAULT_MATRIX_CAP).is_err());
        assert!(matches!(
            Transfer::new(&p, Geometry::Strip(12), 1 << 16),
            Err(GibbsError::Cap { .. })
        ));
    }
}
