//! Weight files.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::net::{AffineStage, ReluNet};
use crate::error::{Error, Result};
use crate::geometry::BoxDomain;

#[derive(Serialize)]
struct WeightFile<'a> {
    version: u32,
    input_dim: usize,
    output_dim: usize,
    domain_bound: &'a BoxDomain,
    layers: Vec<Layer>,
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum Layer {
    Affine {
        #[serde(rename = "W")]
        w: Vec<Vec<f64>>,
        b: Vec<f64>,
    },
    Relu,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightFileIn {
    version: u32,
    input_dim: usize,
    output_dim: usize,
    domain_bound: BoxDomain,
    layers: Vec<LayerIn>,
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum LayerIn {
    Affine {
        #[serde(rename = "W")]
        w: Value,
        b: Vec<f64>,
    },
    Relu,
}

fn perr(context: impl Into<String>, message: impl ToString) -> Error {
    Error::Parse {
        context: context.into(),
        message: message.to_string(),
    }
}

pub fn net_to_string(net: &ReluNet) -> String {
    let mut layers = Vec::with_capacity(2 * net.stages().len());
    for (i, s) in net.stages().iter().enumerate() {
        if i > 0 {
            layers.push(Layer::Relu);
        }
        layers.push(Layer::Affine {
            w: (0..s.rows()).map(|r| s.row(r).to_vec()).collect(),
            b: s.bias().to_vec(),
        });
    }
    crate::json::to_string(&WeightFile {
        version: 1,
        input_dim: net.input_dim(),
        output_dim: net.output_dim(),
        domain_bound: net.domain(),
        layers,
    })
}

/// Parses a weight file. `W` may be nested rows or a flat row-major list.
pub fn parse_net(text: &str) -> Result<ReluNet> {
    let file: WeightFileIn = serde_json::from_str(text)
        .map_err(|e| perr(format!("line {} column {}", e.line(), e.column()), e))?;
    if file.version != 1 {
        return Err(perr(
            "version",
            format!("unsupported version {}", file.version),
        ));
    }
    let domain = BoxDomain::new(file.domain_bound.lo, file.domain_bound.hi)
        .map_err(|e| perr("domain_bound", e))?;
    let mut stages = Vec::new();
    let mut expect_affine = true;
    let mut cols = file.input_dim;
    for (i, layer) in file.layers.into_iter().enumerate() {
        match layer {
            LayerIn::Affine { w, b } => {
                if !expect_affine {
                    return Err(perr(format!("layers[{i}]"), "two affine layers in a row"));
                }
                let rows = b.len();
                let flat = flatten_weights(&w, rows, cols)
                    .map_err(|m| perr(format!("layers[{i}].W"), m))?;
                stages.push(
                    AffineStage::new(rows, cols, flat, b)
                        .map_err(|e| perr(format!("layers[{i}]"), e))?,
                );
                cols = rows;
                expect_affine = false;
            }
            LayerIn::Relu => {
                if expect_affine {
                    return Err(perr(
                        format!("layers[{i}]"),
                        "relu must follow an affine layer",
                    ));
                }
                expect_affine = true;
            }
        }
    }
    if expect_affine {
        return Err(perr("layers", "must end with an affine layer"));
    }
    let net = ReluNet::new(stages, domain).map_err(|e| perr("layers", e))?;
    if net.output_dim() != file.output_dim {
        return Err(perr(
            "output_dim",
            format!(
                "declared {}, layers give {}",
                file.output_dim,
                net.output_dim()
            ),
        ));
    }
    Ok(net)
}

fn flatten_weights(w: &Value, rows: usize, cols: usize) -> std::result::Result<Vec<f64>, String> {
    let arr = w.as_array().ok_or("expected an array")?;
    let num = |v: &Value| v.as_f64().ok_or_else(|| format!("non-numeric entry {v}"));
    let flat: Vec<f64> = if arr.iter().all(Value::is_array) {
        if arr.len() != rows {
            return Err(format!("expected {rows} rows, found {}", arr.len()));
        }
        let mut out = Vec::with_capacity(rows * cols);
        for (r, row) in arr.iter().enumerate() {
            let row = row.as_array().expect("checked");
            if row.len() != cols {
                return Err(format!(
                    "row {r} has {} entries, expected {cols}",
                    row.len()
                ));
            }
            for v in row {
                out.push(num(v)?);
            }
        }
        out
    } else {
        arr.iter().map(num).collect::<std::result::Result<_, _>>()?
    };
    if flat.len() != rows * cols {
        return Err(format!(
            "expected {} weights, found {}",
            rows * cols,
            flat.len()
        ));
    }
    Ok(flat)
}

pub fn save_net(net: &ReluNet, path: &Path) -> Result<()> {
    std::fs::write(path, net_to_string(net))
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn load_net(path: &Path) -> Result<ReluNet> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_net(&text)
}
