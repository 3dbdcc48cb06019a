use crate::error::{Error, Result};
use crate::geometry::BoxDomain;

/// One affine stage `x ↦ Wx + b` with a row-major weight matrix.
#[derive(Debug, Clone)]
pub struct AffineStage {
    rows: usize,
    cols: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
    sparse: Vec<Vec<(usize, f64)>>,
}

impl PartialEq for AffineStage {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self.weights == other.weights
            && self.bias == other.bias
    }
}

impl AffineStage {
    pub fn new(rows: usize, cols: usize, weights: Vec<f64>, bias: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::ShapeMismatch(
                "affine stage needs positive dimensions".into(),
            ));
        }
        if weights.len() != rows * cols || bias.len() != rows {
            return Err(Error::ShapeMismatch(format!(
                "affine stage {rows}x{cols} got {} weights and {} biases",
                weights.len(),
                bias.len()
            )));
        }
        if weights.iter().chain(&bias).any(|v| !v.is_finite()) {
            return Err(Error::InvalidNetwork("non-finite weight".into()));
        }
        let sparse = (0..rows)
            .map(|r| {
                (0..cols)
                    .filter_map(|c| {
                        let w = weights[r * cols + c];
                        (w != 0.0).then_some((c, w))
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            rows,
            cols,
            weights,
            bias,
            sparse,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>], bias: Vec<f64>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::ShapeMismatch("ragged weight rows".into()));
        }
        Self::new(rows.len(), cols, rows.concat(), bias)
    }

    pub fn identity(n: usize) -> Self {
        let mut w = vec![0.0; n * n];
        for i in 0..n {
            w[i * n + i] = 1.0;
        }
        Self::new(n, n, w, vec![0.0; n]).expect("identity is well formed")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn weight(&self, r: usize, c: usize) -> f64 {
        self.weights[r * self.cols + c]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.weights[r * self.cols..(r + 1) * self.cols]
    }

    pub fn param_count(&self) -> usize {
        self.rows * self.cols + self.rows
    }

    /// `out = W x + b`, summing nonzero terms in column order after the bias.
    pub fn apply_into(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for (r, row) in self.sparse.iter().enumerate() {
            let mut acc = self.bias[r];
            for &(c, w) in row {
                acc += w * x[c];
            }
            out.push(acc);
        }
    }

    /// `self ∘ inner` as one affine stage.
    pub fn after(&self, inner: &AffineStage) -> Result<AffineStage> {
        if self.cols != inner.rows {
            return Err(Error::DimensionMismatch {
                context: "affine merge",
                expected: self.cols,
                found: inner.rows,
            });
        }
        let mut w = vec![0.0; self.rows * inner.cols];
        let mut b = self.bias.clone();
        for r in 0..self.rows {
            for &(k, a) in &self.sparse[r] {
                b[r] += a * inner.bias[k];
                for &(c, v) in &inner.sparse[k] {
                    w[r * inner.cols + c] += a * v;
                }
            }
        }
        AffineStage::new(self.rows, inner.cols, w, b)
    }

    /// Interval image of the box `[lo, hi]`.
    pub fn interval(&self, lo: &[f64], hi: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut olo = self.bias.clone();
        let mut ohi = self.bias.clone();
        for r in 0..self.rows {
            for &(c, w) in &self.sparse[r] {
                if w > 0.0 {
                    olo[r] += w * lo[c];
                    ohi[r] += w * hi[c];
                } else {
                    olo[r] += w * hi[c];
                    ohi[r] += w * lo[c];
                }
            }
        }
        (olo, ohi)
    }
}

#[inline]
fn relu_in_place(v: &mut [f64]) {
    for x in v {
        // also maps -0.0 to +0.0
        *x = if *x > 0.0 { *x } else { 0.0 };
    }
}

/// Width, depth and parameter count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Accounting {
    pub width: usize,
    pub depth: usize,
    pub params: usize,
}

/// Alternating affine and ReLU stages; a ReLU sits between consecutive affine stages.
#[derive(Debug, Clone, PartialEq)]
pub struct ReluNet {
    stages: Vec<AffineStage>,
    domain: BoxDomain,
}

/// Result of an evaluation together with the domain flag.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub output: Vec<f64>,
    pub in_domain: bool,
}

impl ReluNet {
    pub fn new(stages: Vec<AffineStage>, domain: BoxDomain) -> Result<Self> {
        let first = stages
            .first()
            .ok_or_else(|| Error::InvalidNetwork("network has no affine stage".into()))?;
        if domain.dim() != first.cols {
            return Err(Error::DimensionMismatch {
                context: "network domain",
                expected: first.cols,
                found: domain.dim(),
            });
        }
        for w in stages.windows(2) {
            if w[0].rows != w[1].cols {
                return Err(Error::DimensionMismatch {
                    context: "layer chaining",
                    expected: w[0].rows,
                    found: w[1].cols,
                });
            }
        }
        Ok(Self { stages, domain })
    }

    /// Depth-0 net `x ↦ Wx + b`.
    pub fn affine(rows: &[Vec<f64>], bias: Vec<f64>, domain: BoxDomain) -> Result<Self> {
        Self::new(vec![AffineStage::from_rows(rows, bias)?], domain)
    }

    pub fn identity(domain: BoxDomain) -> Self {
        let n = domain.dim();
        Self {
            stages: vec![AffineStage::identity(n)],
            domain,
        }
    }

    pub fn stages(&self) -> &[AffineStage] {
        &self.stages
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn with_domain(mut self, domain: BoxDomain) -> Result<Self> {
        if domain.dim() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                context: "network domain",
                expected: self.input_dim(),
                found: domain.dim(),
            });
        }
        self.domain = domain;
        Ok(self)
    }

    pub fn input_dim(&self) -> usize {
        self.stages[0].cols
    }

    pub fn output_dim(&self) -> usize {
        self.stages[self.stages.len() - 1].rows
    }

    pub fn depth(&self) -> usize {
        self.stages.len() - 1
    }

    pub fn width(&self) -> usize {
        self.stages
            .iter()
            .map(|s| s.rows.max(s.cols))
            .max()
            .unwrap_or(0)
    }

    pub fn param_count(&self) -> usize {
        self.stages.iter().map(AffineStage::param_count).sum()
    }

    pub fn accounting(&self) -> Accounting {
        Accounting {
            width: self.width(),
            depth: self.depth(),
            params: self.param_count(),
        }
    }

    /// Neuron count of each hidden layer.
    pub fn hidden_widths(&self) -> Vec<usize> {
        self.stages[..self.stages.len() - 1]
            .iter()
            .map(|s| s.rows)
            .collect()
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                context: "evaluate",
                expected: self.input_dim(),
                found: x.len(),
            });
        }
        let mut ev = self.evaluator();
        Ok(ev.run(x).to_vec())
    }

    /// Evaluates and reports whether `x` lies in the domain box (with a small slack).
    pub fn evaluate_flagged(&self, x: &[f64]) -> Result<Evaluation> {
        let output = self.evaluate(x)?;
        let slack = 1e-9 * (1.0 + self.domain.max_abs());
        Ok(Evaluation {
            output,
            in_domain: self.domain.contains(x, slack),
        })
    }

    /// Scalar output convenience; panics on dimension mismatch.
    pub fn eval_scalar(&self, x: &[f64]) -> f64 {
        self.evaluator().run(x)[0]
    }

    /// Reusable evaluation buffers.
    pub fn evaluator(&self) -> Evaluator<'_> {
        Evaluator {
            net: self,
            a: Vec::with_capacity(self.width()),
            b: Vec::with_capacity(self.width()),
        }
    }

    /// Interval bounds of every stage's output over the domain box.
    /// Entry `i` bounds the pre-activation of hidden layer `i` (last entry: network output).
    pub fn interval_bounds(&self) -> Vec<(Vec<f64>, Vec<f64>)> {
        self.interval_bounds_on(&self.domain.lo, &self.domain.hi)
    }

    pub fn interval_bounds_on(&self, lo: &[f64], hi: &[f64]) -> Vec<(Vec<f64>, Vec<f64>)> {
        let mut out = Vec::with_capacity(self.stages.len());
        let (mut l, mut h) = (lo.to_vec(), hi.to_vec());
        for (i, s) in self.stages.iter().enumerate() {
            let (nl, nh) = s.interval(&l, &h);
            out.push((nl.clone(), nh.clone()));
            if i + 1 < self.stages.len() {
                l = nl.iter().map(|v| v.max(0.0)).collect();
                h = nh.iter().map(|v| v.max(0.0)).collect();
            }
        }
        out
    }

    /// Interval bound of the output over the domain.
    pub fn output_interval(&self) -> (Vec<f64>, Vec<f64>) {
        self.interval_bounds().pop().expect("at least one stage")
    }
}

/// Holds two scratch buffers so repeated evaluations do not allocate.
pub struct Evaluator<'a> {
    net: &'a ReluNet,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl Evaluator<'_> {
    pub fn run(&mut self, x: &[f64]) -> &[f64] {
        let stages = &self.net.stages;
        stages[0].apply_into(x, &mut self.a);
        for s in &stages[1..] {
            relu_in_place(&mut self.a);
            s.apply_into(&self.a, &mut self.b);
            std::mem::swap(&mut self.a, &mut self.b);
        }
        &self.a
    }
}
