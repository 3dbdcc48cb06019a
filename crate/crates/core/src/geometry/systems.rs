//! Built-in example systems.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::affine::AffineMap;
use super::bbox::BoxDomain;
use super::ifs::{verify_nice, IfsSystem, Mode};
use super::polytope::{ConvexPolytope, PolytopeUnion};

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Middle-thirds Cantor system on `[0, 1]`.
pub fn cantor() -> IfsSystem {
    let seed = ConvexPolytope::from_box(&BoxDomain::cube(1, 0.0, 1.0)).expect("unit interval");
    IfsSystem::new(
        vec![
            AffineMap::scaling(1.0 / 3.0, &[0.0]),
            AffineMap::scaling(1.0 / 3.0, &[2.0 / 3.0]),
        ],
        PolytopeUnion::single(seed),
        Mode::TotallyDisconnected,
    )
    .expect("valid system")
}

/// Sierpinski gasket: `f_i(x) = (x + v_i)/2` on the open unit equilateral triangle.
pub fn sierpinski() -> IfsSystem {
    let v = [[0.0, 0.0], [1.0, 0.0], [0.5, SQRT3 / 2.0]];
    let tri = ConvexPolytope::polygon_ccw(&v).expect("triangle");
    let maps = v
        .iter()
        .map(|vi| AffineMap::scaling(0.5, &[vi[0] / 2.0, vi[1] / 2.0]))
        .collect();
    IfsSystem::new(maps, PolytopeUnion::single(tri), Mode::JustTouching).expect("valid system")
}

/// Koch curve with four similitudes and the open triangle `(0,0), (1/2, √3/2), (1,0)`.
pub fn koch() -> IfsSystem {
    let s = SQRT3 / 6.0;
    let third = 1.0 / 3.0;
    let a1 = vec![vec![third, 0.0], vec![0.0, third]];
    let a2 = vec![vec![1.0 / 6.0, -s], vec![s, 1.0 / 6.0]];
    let a3 = vec![vec![1.0 / 6.0, s], vec![-s, 1.0 / 6.0]];
    let maps = vec![
        AffineMap::from_rows(&a1, &[0.0, 0.0]),
        AffineMap::from_rows(&a2, &[third, 0.0]),
        AffineMap::from_rows(&a3, &[0.5, s]),
        AffineMap::from_rows(&a1, &[2.0 * third, 0.0]),
    ]
    .into_iter()
    .collect::<Result<Vec<_>, _>>()
    .expect("finite maps");
    let tri = ConvexPolytope::polygon_ccw(&[[0.0, 0.0], [1.0, 0.0], [0.5, SQRT3 / 2.0]])
        .expect("triangle");
    IfsSystem::new(maps, PolytopeUnion::single(tri), Mode::JustTouching).expect("valid system")
}

/// Seeded random totally disconnected system. All seed parts share one facet count,
/// so the realized literal width matches the closed-form budget.
pub fn random_compact(seed: u64) -> IfsSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        if let Some(sys) = try_random(&mut rng) {
            return sys;
        }
    }
}

fn try_random(rng: &mut ChaCha8Rng) -> Option<IfsSystem> {
    let d = if rng.gen_bool(0.3) { 1 } else { 2 };
    let p0 = rng.gen_range(1..=2usize);
    let j_count = rng.gen_range(2..=3usize);
    let triangles = d == 2 && rng.gen_bool(0.5);

    let parts: Vec<ConvexPolytope> = match (d, p0) {
        (1, 1) => vec![interval(0.0, 1.0)],
        (1, _) => vec![interval(0.0, 0.4), interval(0.6, 1.0)],
        (_, 1) if triangles => {
            vec![ConvexPolytope::polygon_ccw(&[[0.0, 0.0], [1.0, 0.0], [0.5, 0.9]]).ok()?]
        }
        (_, 1) => vec![rect(0.0, 0.0, 1.0, 1.0)],
        (_, _) if triangles => vec![
            ConvexPolytope::polygon_ccw(&[[0.0, 0.0], [0.45, 0.0], [0.0, 1.0]]).ok()?,
            ConvexPolytope::polygon_ccw(&[[1.0, 0.0], [1.0, 1.0], [0.55, 1.0]]).ok()?,
        ],
        (_, _) => vec![rect(0.0, 0.0, 0.4, 1.0), rect(0.6, 0.0, 1.0, 1.0)],
    };
    let seed = PolytopeUnion::new(parts).ok()?;
    let center = seed.bounding_box().center();

    let mut maps = Vec::with_capacity(j_count);
    for _ in 0..j_count {
        let s = rng.gen_range(0.08..0.22);
        let host = &seed.parts()[rng.gen_range(0..seed.len())];
        // aim the seed center at a random convex combination of the host's vertices
        let weights: Vec<f64> = host
            .vertices()
            .iter()
            .map(|_| rng.gen_range(0.1..1.0))
            .collect();
        let total: f64 = weights.iter().sum();
        let mut target = vec![0.0; d];
        for (w, v) in weights.iter().zip(host.vertices()) {
            for c in 0..d {
                target[c] += w / total * v[c];
            }
        }
        let linear = if d == 1 {
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            DMatrix::from_element(1, 1, sign * s)
        } else {
            let th = rng.gen_range(0.0..2.0 * PI);
            DMatrix::from_row_slice(2, 2, &[th.cos(), -th.sin(), th.sin(), th.cos()]) * s
        };
        let offset =
            DVector::from_column_slice(&target) - &linear * DVector::from_column_slice(&center);
        maps.push(AffineMap::new(linear, offset).ok()?);
    }
    let sys = IfsSystem::new(maps, seed, Mode::TotallyDisconnected).ok()?;
    let cert = verify_nice(&sys).ok()?;
    (cert.min_margin() > 1e-2).then_some(sys)
}

fn interval(lo: f64, hi: f64) -> ConvexPolytope {
    ConvexPolytope::from_box(&BoxDomain::new(vec![lo], vec![hi]).expect("interval")).expect("box")
}

fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> ConvexPolytope {
    ConvexPolytope::from_box(&BoxDomain::new(vec![x0, y0], vec![x1, y1]).expect("rect"))
        .expect("box")
}
