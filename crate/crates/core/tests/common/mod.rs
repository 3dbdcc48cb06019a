#![allow(dead_code)]

use std::path::PathBuf;

use ifsnet::constructor::lift_ifs;
use ifsnet::geometry::systems::{cantor, koch, random_compact, sierpinski};
use ifsnet::geometry::IfsSystem;
use rand::Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

/// Every compact example: Cantor, the three lifted systems and five random ones.
pub fn compact_systems() -> Vec<(String, IfsSystem)> {
    let mut out = vec![
        ("cantor".to_string(), cantor()),
        ("lifted cantor".to_string(), lift_ifs(&cantor()).unwrap()),
        (
            "lifted sierpinski".to_string(),
            lift_ifs(&sierpinski()).unwrap(),
        ),
        ("lifted koch".to_string(), lift_ifs(&koch()).unwrap()),
    ];
    for s in 1..=5 {
        out.push((format!("random {s}"), random_compact(s)));
    }
    out
}

/// `f_{w_1} ∘ … ∘ f_{w_k}(y)` for a random word and a random point `y` of a seed part.
/// Returns the word (zero-based, outermost first) with the point.
pub fn word_point<R: Rng>(sys: &IfsSystem, k: usize, rng: &mut R) -> (Vec<usize>, Vec<f64>) {
    let parts = sys.seed().parts();
    let part = &parts[rng.gen_range(0..parts.len())];
    let weights: Vec<f64> = part.vertices().iter().map(|_| rng.gen::<f64>()).collect();
    let total: f64 = weights.iter().sum();
    let mut y = vec![0.0; sys.dim()];
    for (w, v) in weights.iter().zip(part.vertices()) {
        for (yc, vc) in y.iter_mut().zip(v) {
            *yc += w / total * vc;
        }
    }
    let word: Vec<usize> = (0..k).map(|_| rng.gen_range(0..sys.num_maps())).collect();
    for &j in word.iter().rev() {
        y = sys.maps()[j].apply(&y).unwrap();
    }
    (word, y)
}

/// A random seed vertex pushed through a random word of length `k`.
pub fn word_vertex<R: Rng>(sys: &IfsSystem, k: usize, rng: &mut R) -> Vec<f64> {
    let parts = sys.seed().parts();
    let part = &parts[rng.gen_range(0..parts.len())];
    let mut y = part.vertices()[rng.gen_range(0..part.vertices().len())].clone();
    for _ in 0..k {
        y = sys.maps()[rng.gen_range(0..sys.num_maps())]
            .apply(&y)
            .unwrap();
    }
    y
}
