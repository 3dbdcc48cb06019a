//! IFS description files.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::affine::AffineMap;
use super::ifs::{IfsSystem, Mode};
use super::polytope::{ConvexPolytope, HalfSpace, PolytopeUnion};
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IfsFile {
    dimension: usize,
    mode: String,
    maps: Vec<MapFile>,
    seed: SeedFile,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MapFile {
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SeedFile {
    parts: Vec<PartFile>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartFile {
    halfspaces: Vec<HalfSpaceFile>,
    vertices: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HalfSpaceFile {
    a: Vec<f64>,
    b: f64,
}

fn parse_err(context: impl Into<String>, message: impl ToString) -> Error {
    Error::Parse {
        context: context.into(),
        message: message.to_string(),
    }
}

fn check_len(context: String, v: &[f64], d: usize) -> Result<()> {
    if v.len() != d {
        return Err(parse_err(
            context,
            format!("expected {d} entries, found {}", v.len()),
        ));
    }
    Ok(())
}

/// Parses an IFS description. Errors name the offending field.
pub fn parse_ifs(text: &str) -> Result<IfsSystem> {
    let file: IfsFile = serde_json::from_str(text)
        .map_err(|e| parse_err(format!("line {} column {}", e.line(), e.column()), e))?;
    let d = file.dimension;
    if d == 0 {
        return Err(parse_err("dimension", "must be positive"));
    }
    let mode = Mode::parse(&file.mode).ok_or_else(|| {
        parse_err(
            "mode",
            format!("expected \"compact\" or \"open\", got {:?}", file.mode),
        )
    })?;
    let mut maps = Vec::with_capacity(file.maps.len());
    for (j, m) in file.maps.iter().enumerate() {
        if m.a.len() != d {
            return Err(parse_err(
                format!("maps[{j}].A"),
                format!("expected {d} rows"),
            ));
        }
        for (r, row) in m.a.iter().enumerate() {
            check_len(format!("maps[{j}].A[{r}]"), row, d)?;
        }
        check_len(format!("maps[{j}].b"), &m.b, d)?;
        maps.push(
            AffineMap::from_rows(&m.a, &m.b).map_err(|e| parse_err(format!("maps[{j}]"), e))?,
        );
    }
    let mut parts = Vec::with_capacity(file.seed.parts.len());
    for (i, p) in file.seed.parts.iter().enumerate() {
        let mut hs = Vec::with_capacity(p.halfspaces.len());
        for (h, f) in p.halfspaces.iter().enumerate() {
            let ctx = format!("seed.parts[{i}].halfspaces[{h}]");
            check_len(format!("{ctx}.a"), &f.a, d)?;
            hs.push(HalfSpace::new(f.a.clone(), f.b).map_err(|e| parse_err(ctx, e))?);
        }
        for (v, vert) in p.vertices.iter().enumerate() {
            check_len(format!("seed.parts[{i}].vertices[{v}]"), vert, d)?;
        }
        parts.push(
            ConvexPolytope::new(hs, p.vertices.clone())
                .map_err(|e| parse_err(format!("seed.parts[{i}]"), e))?,
        );
    }
    let seed = PolytopeUnion::new(parts).map_err(|e| parse_err("seed.parts", e))?;
    IfsSystem::new(maps, seed, mode)
}

pub fn load_ifs(path: &Path) -> Result<IfsSystem> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_ifs(&text)
}

/// Serializes with 17 significant digits per number.
pub fn ifs_to_string(sys: &IfsSystem) -> String {
    let file = IfsFile {
        dimension: sys.dim(),
        mode: sys.mode().as_str().to_string(),
        maps: sys
            .maps()
            .iter()
            .map(|f| MapFile {
                a: f.rows(),
                b: f.offset().iter().copied().collect(),
            })
            .collect(),
        seed: SeedFile {
            parts: sys
                .seed()
                .parts()
                .iter()
                .map(|p| PartFile {
                    halfspaces: p
                        .halfspaces()
                        .iter()
                        .map(|h| HalfSpaceFile {
                            a: h.normal().to_vec(),
                            b: h.offset(),
                        })
                        .collect(),
                    vertices: p.vertices().to_vec(),
                })
                .collect(),
        },
    };
    crate::json::to_string(&file)
}

pub fn save_ifs(sys: &IfsSystem, path: &Path) -> Result<()> {
    std::fs::write(path, ifs_to_string(sys))
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
