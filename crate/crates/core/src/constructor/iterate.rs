use serde::Serialize;

use super::indicator::{build_union_indicator, Convention, IndicatorNet, Target};
use super::tmap::{build_t, map_constants, MapConstants, RampPlacement, TNetBundle};
use crate::error::{Error, Result};
use crate::geometry::{BoxDomain, IfsSystem, Mode};
use crate::network::{
    compose, compose_chain, dedupe_neurons, eliminate_linear_neuron, gadget_min2, pad_depth,
    prune_dead, split, Accounting, AffineStage, ReluNet,
};

/// Network layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    /// Every block padded to the closed-form depth, no lane sharing.
    Literal,
    /// Lanes shared between blocks, no depth padding, dead neurons pruned.
    Merged,
}

/// Closed-form width and depth constants for `(J, d, m, p_0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Budget {
    #[serde(rename = "W0")]
    pub w0: usize,
    #[serde(rename = "L0")]
    pub l0: usize,
    #[serde(rename = "W_T")]
    pub w_t: usize,
    #[serde(rename = "L_T")]
    pub l_t: usize,
}

/// `⌈log₂ n⌉` for `n ≥ 1`.
pub fn ceil_log2(n: usize) -> usize {
    assert!(n >= 1, "ceil_log2 of zero");
    (usize::BITS - (n - 1).leading_zeros()) as usize
}

impl Budget {
    pub fn new(j: usize, d: usize, m: usize, p0: usize) -> Self {
        let w_t = j * (d + m * p0).max(2 * d);
        Self {
            w0: w_t + j * m * p0,
            l0: ceil_log2(m) + ceil_log2(j * p0) + 2,
            w_t,
            l_t: 2 + ceil_log2(m) + ceil_log2(p0),
        }
    }

    pub fn for_system(sys: &IfsSystem) -> Self {
        Self::new(
            sys.num_maps(),
            sys.dim(),
            sys.max_facets(),
            sys.seed_parts(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RealizedSize {
    pub width: usize,
    pub depth: usize,
    pub params: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LiteralSize {
    pub width: usize,
    pub depth: usize,
}

/// Closed-form budget next to what was built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BudgetReport {
    #[serde(flatten)]
    pub budget: Budget,
    pub k: usize,
    pub realized: RealizedSize,
    pub literal: LiteralSize,
    pub recurrent_cell_params: usize,
}

impl BudgetReport {
    pub fn to_json(&self) -> String {
        crate::json::to_string(self)
    }
}

/// `x ↦ exit(cell^k(entry(x)))` with one shared cell.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrentNet {
    pub entry: ReluNet,
    pub cell: ReluNet,
    pub exit: ReluNet,
    pub k: usize,
}

impl RecurrentNet {
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        let mut state = self.entry.evaluator().run(x).to_vec();
        let mut ev = self.cell.evaluator();
        for _ in 0..self.k {
            state = ev.run(&state).to_vec();
        }
        self.exit.evaluator().run(&state)[0]
    }

    pub fn unroll(&self) -> Result<ReluNet> {
        let mut chain: Vec<&ReluNet> = Vec::with_capacity(self.k + 2);
        chain.push(&self.entry);
        chain.extend(std::iter::repeat(&self.cell).take(self.k));
        chain.push(&self.exit);
        compose_chain(&chain)
    }
}

/// Everything produced for one `φ_k`.
#[derive(Debug, Clone)]
pub struct PhiK {
    pub indicator: IndicatorNet,
    pub recurrent: RecurrentNet,
    pub report: BudgetReport,
    pub t: TNetBundle,
    pub phi1: IndicatorNet,
    /// Domain of the unrolled net (enlarged seed box).
    pub domain: BoxDomain,
    /// Domain of the cell's state `z` lanes.
    pub state_domain: BoxDomain,
}

/// Default compact set `K`: the seed's bounding box grown by a quarter on each side.
pub fn default_domain(sys: &IfsSystem) -> BoxDomain {
    let b = sys.seed().bounding_box();
    let pad = 0.25 * b.diameter();
    b.enlarged(0.0, pad)
}

/// Builds `φ_k` for a compact-mode system.
pub fn build_phi_k(sys: &IfsSystem, k: usize, layout: Layout) -> Result<PhiK> {
    if sys.mode() != Mode::TotallyDisconnected {
        return Err(Error::ModeMismatch(
            "system is in open mode; use the open-set construction".into(),
        ));
    }
    let consts = map_constants(sys, None)?;
    assemble(sys, k, &consts, RampPlacement::Outside, layout)
}

pub(crate) fn assemble(
    sys: &IfsSystem,
    k: usize,
    consts: &[MapConstants],
    placement: RampPlacement,
    layout: Layout,
) -> Result<PhiK> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let d = sys.dim();
    let budget = Budget::for_system(sys);
    let domain = default_domain(sys);
    let t_box = super::tmap::t_output_box(consts, d, placement);
    let state_domain = domain.hull(&t_box);

    let t = build_t(sys, consts, placement, &state_domain)?;
    let phi1 = build_union_indicator(&sys.first_iterate(), &state_domain)?;
    let u = consts
        .iter()
        .map(|c| c.phi_max)
        .fold(f64::NEG_INFINITY, f64::max);
    let (phi_lo, _) = phi1.net.output_interval();
    let mu_lo = phi_lo[0].min(u);
    let cell_domain = state_domain.product(&BoxDomain::new(vec![mu_lo], vec![u])?);

    let zproj = projection(d + 1, &(0..d).collect::<Vec<_>>(), &cell_domain)?;
    let muproj = projection(d + 1, &[d], &cell_domain)?;
    let a = compose(&t.t_net, &zproj)?;
    let phi1z = compose(&phi1.net, &zproj)?;
    let pair = split(&muproj, &phi1z)?;
    let (lo, hi) = pair.output_interval();
    let b = compose(&gadget_min2(&BoxDomain::new(lo, hi)?)?, &pair)?;
    // Interval arithmetic through the clamps is loose by orders of magnitude, so
    // pad with the proven ranges: T lands in t_box and the running min in [mu_lo, u].
    let bound = t_box
        .lo
        .iter()
        .chain(&t_box.hi)
        .chain([&mu_lo, &u])
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .ceil()
        + 1.0;
    let depth = a.depth().max(b.depth());
    let raw = split(&pad_depth(&a, depth, bound)?, &pad_depth(&b, depth, bound)?)?;

    // One inverse-map lane of the last selector is an affine function of the
    // first selector's inverse-map lanes; dropping it frees the slot taken by
    // the running-minimum lane.
    let j = sys.num_maps();
    let idx: usize = t.per_map[..j - 1]
        .iter()
        .map(|n| n.stages()[0].rows())
        .sum();
    let basis: Vec<usize> = (0..d).collect();
    let cell = match layout {
        Layout::Literal => {
            let padded = pad_depth(&raw, budget.l0, bound)?;
            eliminate_linear_neuron(&padded, 0, idx, Some(&basis))?
        }
        Layout::Merged => {
            let slim = eliminate_linear_neuron(&raw, 0, idx, Some(&basis))?;
            prune_dead(&dedupe_neurons(&slim)?)?
        }
    };

    let mut entry_rows = vec![vec![0.0; d]; d + 1];
    for (c, row) in entry_rows.iter_mut().enumerate().take(d) {
        row[c] = 1.0;
    }
    let mut entry_bias = vec![0.0; d + 1];
    entry_bias[d] = u;
    let entry = ReluNet::affine(&entry_rows, entry_bias, domain.clone())?;
    let exit = projection(d + 1, &[d], &cell_domain)?;

    let recurrent = RecurrentNet {
        entry,
        cell,
        exit,
        k,
    };
    let unrolled = recurrent.unroll()?;
    let acc: Accounting = unrolled.accounting();
    let report = BudgetReport {
        budget,
        k,
        realized: RealizedSize {
            width: acc.width,
            depth: acc.depth,
            params: acc.params,
        },
        literal: LiteralSize {
            width: budget.w0,
            depth: budget.l0 * k,
        },
        recurrent_cell_params: recurrent.cell.param_count(),
    };
    Ok(PhiK {
        indicator: IndicatorNet {
            net: unrolled,
            target: Target::Iterate { k },
            convention: Convention::SignInside,
        },
        recurrent,
        report,
        t,
        phi1,
        domain,
        state_domain,
    })
}

fn projection(n: usize, keep: &[usize], domain: &BoxDomain) -> Result<ReluNet> {
    let rows: Vec<Vec<f64>> = keep
        .iter()
        .map(|&c| {
            let mut r = vec![0.0; n];
            r[c] = 1.0;
            r
        })
        .collect();
    ReluNet::new(
        vec![AffineStage::from_rows(&rows, vec![0.0; keep.len()])?],
        domain.clone(),
    )
}
