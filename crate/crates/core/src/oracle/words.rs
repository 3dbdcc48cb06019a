use crate::error::{Error, Result};
use crate::geometry::{AffineMap, ConvexPolytope, IfsSystem, Mode};

/// Default cap on `J^k · p_0` word images.
pub const DEFAULT_BUDGET: u128 = 1_000_000;

/// Tolerance for membership decisions, in distance units.
pub const MEMBER_TOL: f64 = 1e-9;

/// Image of one seed part under the composition `f_{w_1} ∘ … ∘ f_{w_k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct WordImage {
    /// Zero-based map indices, outermost first.
    pub word: Vec<usize>,
    pub part: usize,
    pub polytope: ConvexPolytope,
}

fn check_budget(sys: &IfsSystem, k: usize, budget: u128) -> Result<u128> {
    let required = (sys.num_maps() as u128)
        .checked_pow(k as u32)
        .and_then(|v| v.checked_mul(sys.seed_parts() as u128))
        .unwrap_or(u128::MAX);
    if required > budget {
        return Err(Error::BudgetExceeded { required, budget });
    }
    Ok(required)
}

/// All `J^k · p_0` word images, words in lexicographic order and parts innermost.
pub fn enumerate_word_images(sys: &IfsSystem, k: usize) -> Result<Vec<WordImage>> {
    let required = check_budget(sys, k, DEFAULT_BUDGET)?;
    let mut out = Vec::with_capacity(required as usize);
    let mut stack: Vec<(Vec<usize>, AffineMap)> =
        vec![(Vec::new(), AffineMap::identity(sys.dim()))];
    // depth-first with children pushed in reverse keeps lexicographic order
    while let Some((word, f)) = stack.pop() {
        if word.len() == k {
            for (pi, p) in sys.seed().parts().iter().enumerate() {
                out.push(WordImage {
                    word: word.clone(),
                    part: pi,
                    polytope: p.map(&f)?,
                });
            }
            continue;
        }
        for j in (0..sys.num_maps()).rev() {
            let mut w = word.clone();
            w.push(j);
            stack.push((w, f.compose(&sys.maps()[j])?));
        }
    }
    Ok(out)
}

/// Flat inverse map `x ↦ G x + g`.
#[derive(Clone)]
struct Inv {
    g: Vec<f64>,
    off: Vec<f64>,
}

/// Membership in the `k`-th iterate by descending the word tree, pruning every
/// branch whose image does not contain the point.
#[derive(Clone)]
pub struct BruteOracle {
    d: usize,
    k: usize,
    open: bool,
    inverses: Vec<Inv>,
    /// Per seed part: rows `(n, c)` of its half-spaces.
    parts: Vec<Vec<(Vec<f64>, f64)>>,
}

impl BruteOracle {
    pub fn new(sys: &IfsSystem, k: usize) -> Result<Self> {
        Self::with_budget(sys, k, DEFAULT_BUDGET)
    }

    pub fn with_budget(sys: &IfsSystem, k: usize, budget: u128) -> Result<Self> {
        check_budget(sys, k, budget)?;
        let d = sys.dim();
        let inverses = sys
            .inverses()
            .iter()
            .map(|f| Inv {
                g: f.rows().concat(),
                off: f.offset().iter().copied().collect(),
            })
            .collect();
        let parts = sys
            .seed()
            .parts()
            .iter()
            .map(|p| {
                p.halfspaces()
                    .iter()
                    .map(|h| (h.normal().to_vec(), h.offset()))
                    .collect()
            })
            .collect();
        Ok(Self {
            d,
            k,
            open: sys.mode() == Mode::JustTouching,
            inverses,
            parts,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `x ∈ C_k` (closed, with tolerance) or `x ∈ U_k` (strict) by mode.
    pub fn contains(&self, x: &[f64]) -> bool {
        let open = self.open;
        let test = move |v: f64| {
            if open {
                v > MEMBER_TOL
            } else {
                v >= -MEMBER_TOL
            }
        };
        self.descend(x, &test, &test)
    }

    /// Whether some level-`k` image boundary passes within `band` of `x`.
    pub fn near_boundary(&self, x: &[f64], band: f64) -> bool {
        self.descend(x, &|v| v >= -band, &|v| v.abs() < band)
    }

    /// Whether the boundary of any image of level `1..=k` passes within `band` of `x`.
    pub fn near_any_boundary(&self, x: &[f64], band: f64) -> bool {
        (1..=self.k).any(|level| self.descend_to(x, level, &|v| v >= -band, &|v| v.abs() < band))
    }

    fn descend(&self, x: &[f64], prune: &dyn Fn(f64) -> bool, leaf: &dyn Fn(f64) -> bool) -> bool {
        self.descend_to(x, self.k, prune, leaf)
    }

    fn descend_to(
        &self,
        x: &[f64],
        k: usize,
        prune: &dyn Fn(f64) -> bool,
        leaf: &dyn Fn(f64) -> bool,
    ) -> bool {
        let d = self.d;
        let mut g = vec![0.0; d * d];
        for i in 0..d {
            g[i * d + i] = 1.0;
        }
        let root = Inv {
            g,
            off: vec![0.0; d],
        };
        self.visit(x, &root, 0, k, prune, leaf)
    }

    fn visit(
        &self,
        x: &[f64],
        node: &Inv,
        level: usize,
        k: usize,
        prune: &dyn Fn(f64) -> bool,
        leaf: &dyn Fn(f64) -> bool,
    ) -> bool {
        let test = if level == k { leaf } else { prune };
        if !self.parts.iter().any(|p| test(self.part_value(x, node, p))) {
            return false;
        }
        if level == k {
            return true;
        }
        let d = self.d;
        for inv in &self.inverses {
            // child inverse: f_j⁻¹ ∘ (current inverse)
            let mut g = vec![0.0; d * d];
            let mut off = inv.off.clone();
            for r in 0..d {
                for c in 0..d {
                    let mut acc = 0.0;
                    for t in 0..d {
                        acc += inv.g[r * d + t] * node.g[t * d + c];
                    }
                    g[r * d + c] = acc;
                }
                for t in 0..d {
                    off[r] += inv.g[r * d + t] * node.off[t];
                }
            }
            if self.visit(x, &Inv { g, off }, level + 1, k, prune, leaf) {
                return true;
            }
        }
        false
    }

    /// Normalized indicator of one mapped seed part at `x` (signed distance lower bound).
    fn part_value(&self, x: &[f64], node: &Inv, part: &[(Vec<f64>, f64)]) -> f64 {
        let d = self.d;
        let mut y = node.off.clone();
        for r in 0..d {
            for c in 0..d {
                y[r] += node.g[r * d + c] * x[c];
            }
        }
        let mut best = f64::INFINITY;
        for (n, c0) in part {
            let mut v = *c0;
            for (ni, yi) in n.iter().zip(&y) {
                v += ni * yi;
            }
            // gradient in x is Gᵀ n
            let mut norm2 = 0.0;
            for c in 0..d {
                let mut gc = 0.0;
                for r in 0..d {
                    gc += node.g[r * d + c] * n[r];
                }
                norm2 += gc * gc;
            }
            best = best.min(v / norm2.sqrt());
        }
        best
    }
}

/// One-shot membership query.
pub fn member_brute(sys: &IfsSystem, k: usize, x: &[f64]) -> Result<bool> {
    if x.len() != sys.dim() {
        return Err(Error::DimensionMismatch {
            context: "member_brute",
            expected: sys.dim(),
            found: x.len(),
        });
    }
    Ok(BruteOracle::new(sys, k)?.contains(x))
}
