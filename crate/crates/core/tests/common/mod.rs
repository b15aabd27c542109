#![allow(dead_code)]

use cpdshift::cpd::{validate_triplet, ScalarTriplet};
use cpdshift::verdict::Outcome;
use cpdshift::wab::wab_classify;
use rand::Rng;

/// A corpus entry; `wab` marks triplets emitted by the `W_{a,b}` family.
#[derive(Debug, Clone)]
pub struct Entry {
    pub triplet: ScalarTriplet,
    pub wab: bool,
}

pub fn random_atoms<R: Rng>(rng: &mut R, max_atoms: usize, lo: f64, hi: f64) -> Vec<(f64, f64)> {
    let k = rng.random_range(0..=max_atoms);
    let mut atoms: Vec<(f64, f64)> = Vec::with_capacity(k);
    while atoms.len() < k {
        let x: f64 = rng.random_range(lo..hi);
        if (x - 1.0).abs() < 1e-3 || atoms.iter().any(|a| (a.0 - x).abs() < 1e-3) {
            continue;
        }
        atoms.push((x, rng.random_range(0.05..2.0)));
    }
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    atoms
}

/// Random triplets with atoms in `[0, 5] \ {1}`, kept when validation says yes;
/// about one in eight comes from the `W_{a,b}` family.
pub fn corpus<R: Rng>(rng: &mut R, size: usize) -> Vec<Entry> {
    let mut out = Vec::with_capacity(size);
    while out.len() < size {
        if rng.random_bool(0.125) {
            let a = rng.random_range(0.1..3.0);
            let b = rng.random_range(1.0..4.0);
            if let Some(t) = wab_classify(a, b).unwrap().triplet {
                out.push(Entry { triplet: t, wab: true });
            }
            continue;
        }
        let b = rng.random_range(-1.0..3.0);
        let c = if rng.random_bool(0.5) { 0.0 } else { rng.random_range(0.0..2.0) };
        let atoms = random_atoms(rng, 4, 0.0, 5.0);
        let Ok(t) = ScalarTriplet::from_parts(b, c, &atoms) else { continue };
        if validate_triplet(&t).outcome != Outcome::Yes {
            continue;
        }
        if c == 0.0 && atoms.iter().all(|a| a.0 == 0.0) {
            // Types I and II: re-emit through the W_{a,b} family.
            let a = b + 1.0;
            let theta = t.nu().total_mass();
            let w = wab_classify(a, (theta - 1.0 + 2.0 * a) / a).unwrap();
            out.push(Entry { triplet: w.triplet.unwrap(), wab: true });
        } else {
            out.push(Entry { triplet: t, wab: false });
        }
    }
    out
}

fn lse(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// `ln γ_n` by direct summation of every term of the defining formula.
pub fn log_gamma_oracle(b: f64, c: f64, atoms: &[(f64, f64)], n: u64) -> f64 {
    let nf = n as f64;
    let poly = 1.0 + b * nf + c * nf * nf;
    let mut pos = Vec::new();
    if poly > 0.0 {
        pos.push(poly.ln());
    }
    for &(x, w) in atoms {
        for j in 0..n.saturating_sub(1) {
            let coef = (n - j - 1) as f64;
            if x == 0.0 && j > 0 {
                continue;
            }
            let lx = if j == 0 { 0.0 } else { j as f64 * x.ln() };
            pos.push(w.ln() + coef.ln() + lx);
        }
    }
    let s = lse(&pos);
    if poly < 0.0 {
        (s.exp() + poly).ln()
    } else {
        s
    }
}

/// `γ_n` by direct summation (moderate `n` only).
pub fn gamma_oracle(b: f64, c: f64, atoms: &[(f64, f64)], n: u64) -> f64 {
    let nf = n as f64;
    let mut g = 1.0 + b * nf + c * nf * nf;
    for &(x, w) in atoms {
        let mut q = 0.0;
        let mut p = 1.0;
        for j in 0..n.saturating_sub(1) {
            q += (n - j - 1) as f64 * p;
            p *= x;
        }
        g += w * q;
    }
    g
}
