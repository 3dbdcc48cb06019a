use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::words::BruteOracle;
use crate::geometry::BoxDomain;

/// Which boundary neighbourhood is left out of a comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Band {
    /// Points within this distance of a level-`k` image boundary.
    Final(f64),
    /// Points within this distance of any image boundary of level `1..=k`.
    AllLevels(f64),
    /// Points outside the set within this distance of a level-`k` image boundary.
    Outside(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfCheckReport {
    pub samples: usize,
    pub skipped_near_boundary: usize,
    pub inside: usize,
    pub mismatches: usize,
    pub first_mismatch: Option<Vec<f64>>,
}

/// `n` points uniform in `domain`, reproducible from `seed`.
pub fn uniform_samples(domain: &BoxDomain, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            domain
                .lo
                .iter()
                .zip(&domain.hi)
                .map(|(l, h)| l + (h - l) * rng.gen::<f64>())
                .collect()
        })
        .collect()
}

/// Compares a membership predicate against the oracle on `points`.
/// `make` is called once per chunk so the predicate may own scratch buffers.
pub fn self_check<M, F>(
    make: M,
    oracle: &BruteOracle,
    points: &[Vec<f64>],
    band: Band,
) -> SelfCheckReport
where
    M: Fn() -> F + Sync,
    F: FnMut(&[f64]) -> bool,
{
    // (skipped, inside, mismatch index)
    let per_point: Vec<(bool, bool, bool)> = points
        .par_chunks(512)
        .flat_map_iter(|chunk| {
            let mut pred = make();
            chunk
                .iter()
                .map(|x| {
                    let truth = oracle.contains(x);
                    let near = match band {
                        Band::Final(b) => oracle.near_boundary(x, b),
                        Band::AllLevels(b) => oracle.near_any_boundary(x, b),
                        Band::Outside(b) => !truth && oracle.near_boundary(x, b),
                    };
                    if near {
                        return (true, false, false);
                    }
                    (false, truth, pred(x) != truth)
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let first_mismatch = per_point
        .iter()
        .position(|p| p.2)
        .map(|i| points[i].clone());
    SelfCheckReport {
        samples: points.len(),
        skipped_near_boundary: per_point.iter().filter(|p| p.0).count(),
        inside: per_point.iter().filter(|p| p.1).count(),
        mismatches: per_point.iter().filter(|p| p.2).count(),
        first_mismatch,
    }
}
