//! Indicator networks for seeds, images and Hutchinson iterates.

pub mod indicator;
pub mod iterate;
pub mod lift;
pub mod open;
pub mod sharpen;
pub mod tmap;

pub use indicator::{
    build_halfspace_indicator, build_polytope_indicator, build_union_indicator,
    build_union_indicator_above, Convention, IndicatorNet, Target,
};
pub use iterate::{
    build_phi_k, ceil_log2, default_domain, Budget, BudgetReport, Layout, LiteralSize, PhiK,
    RealizedSize, RecurrentNet,
};
pub use lift::lift_ifs;
pub use open::{build_psi_delta, default_delta, reference_origin, PsiDelta};
pub use sharpen::sharpen;
pub use tmap::{
    build_t, build_ti, map_constants, t_output_box, MapConstants, RampPlacement, TNetBundle,
};
