//! Shared helpers for the integration suites: seeded random boxes drawn
//! from the local and no-signalling polytopes.
#![allow(dead_code)]

use nsbox::correlations::{enumerate_local_deterministic, mix, Box, Scenario};
use rand::Rng;

/// Random point of the local polytope: a convex mixture of the 16
/// deterministic boxes. Returns the box and its weights.
pub fn random_local_box<R: Rng>(rng: &mut R) -> (Box, Vec<f64>) {
    let det = enumerate_local_deterministic(Scenario::chsh()).unwrap();
    let mut w: Vec<f64> = (0..det.len()).map(|_| rng.gen_range(0.0..1.0)).collect();
    let total: f64 = w.iter().sum();
    for v in w.iter_mut() {
        *v /= total;
    }
    (mix(&det, &w).unwrap(), w)
}

/// The eight extremal non-local vertices of the (2,2,2,2) no-signalling
/// polytope: p = 1/2 delta_{a xor b, xy xor alpha.x xor beta.y xor gamma}.
pub fn ns_vertices() -> Vec<Box> {
    let s = Scenario::chsh();
    let mut out = Vec::new();
    for alpha in 0..2usize {
        for beta in 0..2usize {
            for gamma in 0..2usize {
                let mut p = vec![0.0; s.len()];
                for x in 0..2 {
                    for y in 0..2 {
                        for a in 0..2 {
                            for b in 0..2 {
                                let t = (x & y) ^ (alpha & x) ^ (beta & y) ^ gamma;
                                if a ^ b == t {
                                    p[s.index(x, y, a, b)] = 0.5;
                                }
                            }
                        }
                    }
                }
                out.push(Box::new(s, p).unwrap());
            }
        }
    }
    out
}

/// Random no-signalling box: a convex mixture of all 24 vertices of the
/// (2,2,2,2) no-signalling polytope.
pub fn random_ns_box<R: Rng>(rng: &mut R) -> Box {
    let mut vertices = enumerate_local_deterministic(Scenario::chsh()).unwrap();
    vertices.extend(ns_vertices());
    let mut w: Vec<f64> = (0..vertices.len()).map(|_| rng.gen_range(0.0..1.0)).collect();
    let total: f64 = w.iter().sum();
    for v in w.iter_mut() {
        *v /= total;
    }
    mix(&vertices, &w).unwrap()
}
