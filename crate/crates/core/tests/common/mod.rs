#![allow(dead_code)]

use std::collections::HashSet;

use anisotv::grid::Grid;
use anisotv::WeightedGraph;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Connected graph on `n` vertices: a random spanning tree plus up to
/// `extra` further edges, random orientations, weights in `[0.1, 10]`.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, extra: usize) -> WeightedGraph {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut seen = HashSet::new();
    let mut edges = Vec::new();
    let mut push = |i: usize, j: usize, edges: &mut Vec<(usize, usize)>, rng: &mut ChaCha8Rng| {
        if i == j || !seen.insert((i.min(j), i.max(j))) {
            return;
        }
        edges.push(if rng.gen_bool(0.5) { (i, j) } else { (j, i) });
    };
    for k in 1..n {
        let parent = order[rng.gen_range(0..k)];
        push(order[k], parent, &mut edges, rng);
    }
    if n > 1 {
        for _ in 0..extra {
            let i = rng.gen_range(0..n);
            let j = rng.gen_range(0..n);
            push(i, j, &mut edges, rng);
        }
    }
    let w = (0..n).map(|_| rng.gen_range(0.1..10.0)).collect();
    let ew = (0..edges.len()).map(|_| rng.gen_range(0.1..10.0)).collect();
    WeightedGraph::new(w, edges, ew).unwrap()
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..hi)).collect()
}

/// Grid of dimension `d` with `cells[i]` uneven intervals on axis `i`.
pub fn random_grid(rng: &mut ChaCha8Rng, cells: &[usize]) -> Grid {
    let axes = cells
        .iter()
        .map(|&c| {
            let mut x = rng.gen_range(-1.0..1.0);
            let mut axis = vec![x];
            for _ in 0..c {
                x += rng.gen_range(0.2..1.5);
                axis.push(x);
            }
            axis
        })
        .collect();
    Grid::new(axes).unwrap()
}

/// Random grid with dimension in `1..=3` and at most `max_cells` cells.
pub fn random_shape(rng: &mut ChaCha8Rng, max_cells: usize) -> Vec<usize> {
    let d = rng.gen_range(1..=3);
    let side = (max_cells as f64).powf(1.0 / d as f64).floor() as usize;
    (0..d).map(|_| rng.gen_range(1..=side.max(1))).collect()
}

pub fn range(f: &[f64]) -> f64 {
    let hi = f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = f.iter().copied().fold(f64::INFINITY, f64::min);
    hi - lo
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}
