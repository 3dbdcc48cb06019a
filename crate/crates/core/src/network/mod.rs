//! ReLU networks: evaluation, accounting, combinators and gadgets.

pub mod combinators;
pub mod gadgets;
pub mod io;
pub mod net;

pub use combinators::{
    add, add_many, check_pad, compose, compose_chain, dedupe_neurons, eliminate_linear_neuron,
    pad_bound, pad_depth, pad_depth_auto, prune_dead, split, split_many, PadCheck,
};
pub use gadgets::{
    carry_shift, gadget_clamp, gadget_max2, gadget_min2, gadget_ramp, gadget_vec_max,
    gadget_vec_min, gadget_vec_min_above, gadget_vec_scalar_min, gadget_vec_scalar_min_above,
    ramp_value,
};
pub use io::{load_net, net_to_string, parse_net, save_net};
pub use net::{Accounting, AffineStage, Evaluation, Evaluator, ReluNet};
