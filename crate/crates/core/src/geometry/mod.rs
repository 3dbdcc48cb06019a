//! Affine maps, polytopes, niceness certificates and the constants `M`, `δ`.

pub mod affine;
pub mod bbox;
pub mod ifs;
pub mod io;
pub mod lp;
pub mod polytope;
pub mod systems;

/// Feasibility and equality tolerance for geometric decisions.
pub const EPS_GEOM: f64 = 1e-9;

pub use affine::AffineMap;
pub use bbox::BoxDomain;
pub use ifs::{
    compute_inverse_bound, compute_separation, image_indicator_max, verify_nice, IfsSystem, Mode,
    NiceCertificate,
};
pub use io::{ifs_to_string, load_ifs, parse_ifs, save_ifs};
pub use lp::{lp_max_min_affine, LpSolution};
pub use polytope::{map_polytope, ConvexPolytope, HalfSpace, PolytopeUnion};
