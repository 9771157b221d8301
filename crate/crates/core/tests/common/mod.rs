//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;
use std::process::Command;

use ztlab::gibbs::{Equilibrium, Potential};

/// `Σ_x l(x_0..x_{d-1}) · Π e^{βφ(window)} · r(x_{n-d}..x_{n-1})` over all
/// words of length `n`, split into the part where `x[at..at+g]` is one of
/// `family` and the whole. Returns the ratio.
///
/// Chain geometry only, counting reference measure.
pub fn finite_volume_mass(eq: &Equilibrium, p: &Potential, beta: f64, n: usize, at: usize, family: &[Vec<usize>]) -> f64 {
    let s = p.alphabet().len();
    let w = p.window().width();
    let d = w.saturating_sub(1).max(1);
    assert!(n >= d && n >= w);
    let (l, r) = eq.perron_vectors();
    let state = |x: &[usize]| x.iter().rev().fold(0usize, |acc, &a| acc * s + a);
    let total_words = s.pow(n as u32);
    let mut x = vec![0usize; n];
    let (mut hit, mut all) = (0.0f64, 0.0f64);
    for code in 0..total_words {
        let mut c = code;
        for v in x.iter_mut() {
            *v = c % s;
            c /= s;
        }
        let mut weight = l[state(&x[..d])] * r[state(&x[n - d..])];
        if weight == 0.0 {
            continue;
        }
        // Windows ending at sites d..n-1; when w == 1 the first site is
        // counted through the boundary vector as well.
        for end in d..n {
            let start = end + 1 - w;
            let e = p.eval(&x[start..=end]);
            weight *= if e == f64::NEG_INFINITY { 0.0 } else { (beta * e).exp() };
        }
        all += weight;
        if family.iter().any(|g| x[at..at + g.len()] == g[..]) {
            hit += weight;
        }
    }
    hit / all
}

/// `max |l·M − λl| / max l` and the same for `r`, with `M` rebuilt from the
/// potential and `λ = e^{pressure}`.
pub fn eigen_residual(eq: &Equilibrium, p: &Potential, beta: f64, pressure: f64) -> f64 {
    let s = p.alphabet().len();
    let w = p.window().width();
    let d = w.saturating_sub(1).max(1);
    let states = s.pow(d as u32);
    let top = states / s;
    let (l, r) = eq.perron_vectors();
    let lambda = pressure.exp();
    let entry = |u: usize, c: usize| -> f64 {
        let mut x: Vec<usize> = (0..d).map(|j| u / s.pow(j as u32) % s).collect();
        x.push(c);
        let e = p.eval(&x[x.len() - w..]);
        if e == f64::NEG_INFINITY {
            0.0
        } else {
            (beta * e).exp()
        }
    };
    let next = |u: usize, c: usize| if d == 1 { c } else { u / s + c * top };
    let mut lm = vec![0.0; states];
    let mut mr = vec![0.0; states];
    for u in 0..states {
        for c in 0..s {
            let v = next(u, c);
            let m = entry(u, c);
            lm[v] += l[u] * m;
            mr[u] += m * r[v];
        }
    }
    let scale_l = l.iter().cloned().fold(0.0, f64::max);
    let scale_r = r.iter().cloned().fold(0.0, f64::max);
    let a = (0..states).map(|u| (lm[u] - lambda * l[u]).abs()).fold(0.0, f64::max) / (lambda * scale_l);
    let b = (0..states).map(|u| (mr[u] - lambda * r[u]).abs()).fold(0.0, f64::max) / (lambda * scale_r);
    a.max(b)
}

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

/// Runs the binary and returns (exit code, stdout, stderr).
pub fn ztlab(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_ztlab"))
        .args(args)
        .current_dir(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data"))
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}
