#![allow(dead_code)]

use std::collections::BTreeMap;
use std::hash::Hash;

use drift_usf::electrical::FiniteNetwork;
use drift_usf::wilson::{BoxNetwork, Parent};
use drift_usf::{FiniteBox, LatticeParams, TreeRoot, Vertex};
use rand::seq::SliceRandom;
use rand::Rng;
use rustc_hash::FxHashMap;

/// The excision procedure as stated: find the first entry that occurs again,
/// cut everything after it up to its last occurrence, repeat.
pub fn loop_erase_literal<T: Eq + Clone>(items: &[T]) -> Vec<T> {
    let mut gamma = items.to_vec();
    loop {
        let first = (0..gamma.len()).find(|&j| gamma[j + 1..].contains(&gamma[j]));
        let Some(tau) = first else { return gamma };
        let sigma = gamma.iter().rposition(|u| *u == gamma[tau]).expect("repeated entry");
        gamma.drain(tau + 1..=sigma);
    }
}

/// The same procedure in linear time. Entries before a cut never repeat
/// afterwards, so the search for the next repeated entry resumes after the
/// cut; and the last occurrence of an entry after the cut is its last
/// occurrence in the original sequence.
pub fn loop_erase_literal_fast<T: Eq + Hash + Clone>(items: &[T]) -> Vec<T> {
    let mut last: FxHashMap<&T, usize> = FxHashMap::default();
    for (i, v) in items.iter().enumerate() {
        last.insert(v, i);
    }
    let mut out = Vec::new();
    let mut j = 0;
    while j < items.len() {
        out.push(items[j].clone());
        j = last[&items[j]] + 1;
    }
    out
}

/// Every spanning tree of a box network oriented towards its root, with its
/// weight (the product of merged conductances along the tree).
pub fn enumerate_trees(params: &LatticeParams, region: &FiniteBox) -> BTreeMap<Vec<(Vertex, Parent)>, f64> {
    let net = BoxNetwork::new(params, region, &TreeRoot::Wired).expect("wired box");
    let n = net.len();
    let root = net.root;
    let mut out = BTreeMap::new();
    let mut choice = vec![0usize; n];
    loop {
        let parents: Vec<usize> = (0..n).map(|i| net.adjacency[i][choice[i]].0).collect();
        let acyclic = (0..n).all(|start| {
            let mut v = start;
            for _ in 0..=n {
                if v == root {
                    return true;
                }
                v = parents[v];
            }
            false
        });
        if acyclic {
            let weight: f64 = (0..n).map(|i| net.adjacency[i][choice[i]].1).product();
            let mut key: Vec<(Vertex, Parent)> = (0..n)
                .map(|i| {
                    let p = if parents[i] == root { Parent::Root } else { Parent::Vertex(net.vertex(parents[i])) };
                    (net.vertex(i), p)
                })
                .collect();
            key.sort();
            out.insert(key, weight);
        }
        // next choice vector
        let mut k = 0;
        loop {
            if k == n {
                return out;
            }
            choice[k] += 1;
            if choice[k] < net.adjacency[k].len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
    }
}

/// A random connected network: a random spanning tree plus `extra` edges,
/// conductances log-uniform in `[0.1, 10]`.
pub fn random_network<R: Rng>(rng: &mut R, size: usize, extra: usize) -> FiniteNetwork {
    let mut order: Vec<usize> = (0..size).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    let cond = |rng: &mut R| 10f64.powf(rng.gen_range(-1.0..1.0));
    for i in 1..size {
        let j = order[rng.gen_range(0..i)];
        let c = cond(rng);
        edges.push((order[i], j, c));
    }
    for _ in 0..extra {
        let u = rng.gen_range(0..size);
        let mut v = rng.gen_range(0..size);
        while v == u {
            v = rng.gen_range(0..size);
        }
        let c = cond(rng);
        edges.push((u, v, c));
    }
    FiniteNetwork::new(size, edges, None).expect("connected by construction")
}

pub fn random_values<R: Rng>(rng: &mut R, size: usize) -> Vec<f64> {
    (0..size).map(|_| rng.gen_range(-1.0..1.0)).collect()
}
