#![allow(dead_code)]

use rand::Rng;
use revmc::gram::GramSpace;
use revmc::{HistorySet, ModelParams, Path, PriorModel, Seq, StationaryWeights, Symbol};

/// Integer-valued reversible, stationary weights: a constant base plus
/// random circuits added together with their reversals.
pub fn random_weights<R: Rng>(rng: &mut R, m: usize, r: usize, base: f64) -> StationaryWeights {
    let space = GramSpace::new(m, r).unwrap();
    let top = r + 1;
    let mut values = vec![base; space.count(top)];
    for _ in 0..rng.random_range(1..=3) {
        let len = rng.random_range(1..=6);
        let cycle: Vec<Symbol> = (0..len).map(|_| rng.random_range(0..m as Symbol)).collect();
        let weight = rng.random_range(1..=3) as f64;
        for i in 0..len {
            let gram: Vec<Symbol> = (0..top).map(|k| cycle[(i + k) % len]).collect();
            let code = space.encode(&gram);
            let rev = space.reversed(space.flat(top, code)) - space.offset(top);
            values[code] += weight;
            values[rev] += weight;
        }
    }
    StationaryWeights::from_values(m, r, values).unwrap()
}

pub fn random_histories<R: Rng>(rng: &mut R, m: usize, r: usize) -> HistorySet {
    if r < 2 {
        return HistorySet::empty();
    }
    let seeds: Vec<Seq> = (0..m as Symbol)
        .filter(|_| rng.random_bool(0.5))
        .map(|s| Seq::new(vec![s]).unwrap())
        .collect();
    HistorySet::closure(seeds, r, m)
}

pub fn random_state<R: Rng>(rng: &mut R, m: usize, r: usize) -> Seq {
    Seq::new((0..r).map(|_| rng.random_range(0..m as Symbol)).collect()).unwrap()
}

/// A random valid model with `m <= 3`, `r <= 2`.
pub fn random_model<R: Rng>(rng: &mut R) -> PriorModel {
    let m = rng.random_range(2..=3);
    let r = rng.random_range(1..=2);
    random_model_with(rng, m, r)
}

pub fn random_model_with<R: Rng>(rng: &mut R, m: usize, r: usize) -> PriorModel {
    let base = rng.random_range(2..=4) as f64;
    let weights = random_weights(rng, m, r, base);
    let histories = random_histories(rng, m, r);
    let c = if rng.random_bool(0.5) { 1.0 } else { 0.5 };
    let v0 = random_state(rng, m, r);
    ModelParams::new(histories, weights, c, v0).build().unwrap()
}

/// Every admissible path of exactly `n` transitions from `v0`.
pub fn all_paths(m: usize, v0: &Seq, n: usize) -> Vec<Path> {
    let mut out = Vec::with_capacity(m.pow(n as u32));
    let mut moves = vec![0 as Symbol; n];
    loop {
        let mut symbols = v0.symbols().to_vec();
        symbols.extend_from_slice(&moves);
        out.push(Path::from_symbols(v0.len(), symbols).unwrap());
        // odometer increment
        let mut i = n;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            moves[i] += 1;
            if (moves[i] as usize) < m {
                break;
            }
            moves[i] = 0;
        }
    }
}

/// Edge-reinforced random walk on an undirected graph with loops: from `a`
/// move to `b` with probability `x_ab / Σ_b x_ab`, then add `c` to `x_ab`
/// and to `x_ba` (a loop therefore gains `2c`).
pub fn errw_log_probability(x0: &[Vec<f64>], c: f64, path: &[Symbol]) -> f64 {
    let mut x = x0.to_vec();
    let mut lp = 0.0;
    for pair in path.windows(2) {
        let (a, b) = (pair[0] as usize, pair[1] as usize);
        let total: f64 = x[a].iter().sum();
        lp += (x[a][b] / total).ln();
        x[a][b] += c;
        x[b][a] += c;
    }
    lp
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn windows(eta: &[Symbol], z: &[Symbol]) -> usize {
    if z.len() > eta.len() {
        return 0;
    }
    eta.windows(z.len()).filter(|w| *w == z).count()
}

/// `Σ w(u)` over `(r+1)`-grams `u` starting with `z`, by brute force.
fn naive_marginal(model: &PriorModel, z: &[Symbol]) -> f64 {
    let m = model.alphabet_size();
    let top = model.order() + 1;
    let free = top - z.len();
    (0..m.pow(free as u32))
        .map(|mut code| {
            let mut u = z.to_vec();
            let mut tail = vec![0; free];
            for slot in tail.iter_mut().rev() {
                *slot = (code % m) as Symbol;
                code /= m;
            }
            u.extend(tail);
            model.weights().get(&Seq::new(u).unwrap())
        })
        .sum()
}

/// Shortest proper suffix of `v` in the history set, else `v`.
fn naive_history(model: &PriorModel, v: &[Symbol]) -> Vec<Symbol> {
    for l in 1..v.len() {
        let s = &v[v.len() - l..];
        if model.histories().iter().any(|h| h.symbols() == s) {
            return s.to_vec();
        }
    }
    v.to_vec()
}

/// Transition probabilities recomputed from scratch by scanning the whole
/// sequence `eta` (which starts with `v0`).
pub fn naive_transition(model: &PriorModel, eta: &[Symbol], a: Symbol) -> f64 {
    let r = model.order();
    let c = model.c();
    let beta = model.beta().symbols();
    let v0 = model.v0().symbols();
    let rev = |z: &[Symbol]| z.iter().rev().copied().collect::<Vec<_>>();
    let h = naive_history(model, &eta[eta.len() - r..]);
    let mut ha = h.clone();
    ha.push(a);
    let wp = naive_marginal(model, &ha)
        + c * (windows(eta, &ha) as f64 + windows(eta, &rev(&ha)) as f64 - windows(beta, &ha) as f64);
    let ends = eta.ends_with(&h) as usize as f64;
    let starts = v0.starts_with(&rev(&h)) as usize as f64;
    let followed = windows(&beta[..beta.len() - 1], &h) as f64;
    let wpp = naive_marginal(model, &h)
        + c * (windows(eta, &h) as f64 - ends + windows(eta, &rev(&h)) as f64 - starts - followed);
    wp / wpp
}

pub fn naive_log_probability(model: &PriorModel, symbols: &[Symbol]) -> f64 {
    let r = model.order();
    (r..symbols.len())
        .map(|i| naive_transition(model, &symbols[..i], symbols[i]).ln())
        .sum()
}
