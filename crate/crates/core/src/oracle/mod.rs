//! Ground truth that never touches a network: word enumeration, the orbit
//! chain, and rasters for comparing the two against built nets.

mod chain;
mod check;
mod raster;
mod words;

pub use chain::member_chain;
pub use check::{self_check, uniform_samples, Band, SelfCheckReport};
pub use raster::{
    compare_rasters, pixel_center, rasterize, rasterize_net, rasterize_predicate, rasterize_with,
    Raster, RasterComparison, ThresholdMode,
};
pub use words::{
    enumerate_word_images, member_brute, BruteOracle, WordImage, DEFAULT_BUDGET, MEMBER_TOL,
};
