//! Plain-text mesh format.
//!
//! ```text
//! # comment
//! VERTICES 3 2
//! 0 0
//! 1 0
//! 0 1
//! CELLS 1
//! FLUID 0 1 2
//! FACETS 3
//! GAMMA_F0 0 1
//! GAMMA_F0 1 2
//! GAMMA_OUT 2 0
//! ```
//!
//! Indices are 0-based.

use std::fmt::Write as _;

use super::{AnyMesh, Mesh, MeshData};
use crate::error::{FpsiError, Result};

fn parse_err(line: usize, message: impl Into<String>) -> FpsiError {
    FpsiError::MeshParse {
        line,
        message: message.into(),
    }
}

fn parse_num<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T> {
    tok.parse()
        .map_err(|_| parse_err(line, format!("invalid {what} '{tok}'")))
}

pub fn parse_native(text: &str) -> Result<AnyMesh> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let mut data = MeshData::default();
    let mut seen = [false; 3];
    while let Some((ln, header)) = lines.next() {
        let toks: Vec<&str> = header.split_whitespace().collect();
        match toks[0] {
            "VERTICES" => {
                if toks.len() != 3 {
                    return Err(parse_err(ln, "expected 'VERTICES <count> <dim>'"));
                }
                let n: usize = parse_num(toks[1], ln, "vertex count")?;
                data.dim = parse_num(toks[2], ln, "dimension")?;
                for _ in 0..n {
                    let (ln, l) = lines.next().ok_or_else(|| parse_err(ln, "unexpected end of VERTICES"))?;
                    let coords = l
                        .split_whitespace()
                        .map(|t| parse_num::<f64>(t, ln, "coordinate"))
                        .collect::<Result<Vec<_>>>()?;
                    if coords.len() != data.dim {
                        return Err(parse_err(ln, format!("expected {} coordinates", data.dim)));
                    }
                    data.vertices.push(coords);
                }
                seen[0] = true;
            }
            "CELLS" => {
                if toks.len() != 2 {
                    return Err(parse_err(ln, "expected 'CELLS <count>'"));
                }
                let n: usize = parse_num(toks[1], ln, "cell count")?;
                for _ in 0..n {
                    let (ln, l) = lines.next().ok_or_else(|| parse_err(ln, "unexpected end of CELLS"))?;
                    let mut it = l.split_whitespace();
                    let tag = it.next().unwrap().parse().map_err(|e: String| parse_err(ln, e))?;
                    let vs = it.map(|t| parse_num(t, ln, "vertex index")).collect::<Result<Vec<_>>>()?;
                    data.cells.push((tag, vs));
                }
                seen[1] = true;
            }
            "FACETS" => {
                if toks.len() != 2 {
                    return Err(parse_err(ln, "expected 'FACETS <count>'"));
                }
                let n: usize = parse_num(toks[1], ln, "facet count")?;
                for _ in 0..n {
                    let (ln, l) = lines.next().ok_or_else(|| parse_err(ln, "unexpected end of FACETS"))?;
                    let mut it = l.split_whitespace();
                    let marker = it.next().unwrap().parse().map_err(|e: String| parse_err(ln, e))?;
                    let vs = it.map(|t| parse_num(t, ln, "vertex index")).collect::<Result<Vec<_>>>()?;
                    data.facets.push((marker, vs));
                }
                seen[2] = true;
            }
            other => return Err(parse_err(ln, format!("unknown section '{other}'"))),
        }
    }
    if !seen[0] || !seen[1] {
        return Err(parse_err(0, "missing VERTICES or CELLS section"));
    }
    data.build()
}

/// Serialize a mesh in the native format; coordinates use shortest round-trip formatting.
pub fn write_native<const D: usize>(mesh: &Mesh<D>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "VERTICES {} {}", mesh.n_vertices(), D);
    for v in mesh.vertices() {
        let coords: Vec<String> = v.iter().map(|x| format!("{x:?}")).collect();
        let _ = writeln!(s, "{}", coords.join(" "));
    }
    let _ = writeln!(s, "CELLS {}", mesh.n_cells());
    for c in 0..mesh.n_cells() {
        let vs: Vec<String> = mesh.cell(c).iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "{} {}", mesh.cell_tag(c), vs.join(" "));
    }
    let _ = writeln!(s, "FACETS {}", mesh.marked_facets().len());
    for f in mesh.marked_facets() {
        let vs: Vec<String> = f.vertices.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "{} {}", f.marker, vs.join(" "));
    }
    s
}
