//! Gmsh ASCII 2.2 reader.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{AnyMesh, Marker, MeshData, Subdomain};
use crate::error::{FpsiError, Result};

/// Physical-group ids for subdomains and facet markers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicalTagMap {
    pub fluid: i64,
    pub solid: i64,
    pub gamma_f0: i64,
    pub gamma_out: i64,
    pub gamma_s0: i64,
    pub gamma_fs: i64,
}

impl Default for PhysicalTagMap {
    fn default() -> Self {
        PhysicalTagMap {
            fluid: 1,
            solid: 2,
            gamma_f0: 11,
            gamma_out: 12,
            gamma_s0: 13,
            gamma_fs: 14,
        }
    }
}

impl PhysicalTagMap {
    fn subdomain(&self, tag: i64) -> Option<Subdomain> {
        if tag == self.fluid {
            Some(Subdomain::Fluid)
        } else if tag == self.solid {
            Some(Subdomain::Solid)
        } else {
            None
        }
    }

    fn marker(&self, tag: i64) -> Option<Marker> {
        [
            (self.gamma_f0, Marker::GammaF0),
            (self.gamma_out, Marker::GammaOut),
            (self.gamma_s0, Marker::GammaS0),
            (self.gamma_fs, Marker::GammaFs),
        ]
        .into_iter()
        .find(|(t, _)| *t == tag)
        .map(|(_, m)| m)
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> FpsiError {
    FpsiError::MeshParse {
        line,
        message: message.into(),
    }
}

fn num<T: std::str::FromStr>(tok: Option<&str>, line: usize) -> Result<T> {
    let tok = tok.ok_or_else(|| parse_err(line, "unexpected end of line"))?;
    tok.parse().map_err(|_| parse_err(line, format!("invalid number '{tok}'")))
}

struct Element {
    line: usize,
    kind: u32,
    physical: i64,
    nodes: Vec<usize>,
}

pub fn parse_msh(text: &str, tags: &PhysicalTagMap) -> Result<AnyMesh> {
    let lines: Vec<&str> = text.lines().map(str::trim).collect();
    let mut i = 0;
    let mut node_index: HashMap<usize, usize> = HashMap::new();
    let mut coords: Vec<[f64; 3]> = Vec::new();
    let mut elements: Vec<Element> = Vec::new();
    let mut have_format = false;

    while i < lines.len() {
        match lines[i] {
            "$MeshFormat" => {
                let ln = i + 2;
                let version = lines.get(i + 1).and_then(|l| l.split_whitespace().next()).unwrap_or("");
                if !version.starts_with("2.") {
                    return Err(parse_err(ln, format!("unsupported MSH version '{version}'")));
                }
                let file_type: i32 = num(lines.get(i + 1).and_then(|l| l.split_whitespace().nth(1)), ln)?;
                if file_type != 0 {
                    return Err(parse_err(ln, "binary MSH files are not supported"));
                }
                have_format = true;
                i += 2;
            }
            "$Nodes" => {
                let n: usize = num(lines.get(i + 1).copied(), i + 2)?;
                for k in 0..n {
                    let ln = i + 3 + k;
                    let l = lines.get(i + 2 + k).ok_or_else(|| parse_err(ln, "unexpected end of $Nodes"))?;
                    let mut it = l.split_whitespace();
                    let id: usize = num(it.next(), ln)?;
                    let x = [num(it.next(), ln)?, num(it.next(), ln)?, num(it.next(), ln)?];
                    node_index.insert(id, coords.len());
                    coords.push(x);
                }
                i += n + 2;
            }
            "$Elements" => {
                let n: usize = num(lines.get(i + 1).copied(), i + 2)?;
                for k in 0..n {
                    let ln = i + 3 + k;
                    let l = lines.get(i + 2 + k).ok_or_else(|| parse_err(ln, "unexpected end of $Elements"))?;
                    let mut it = l.split_whitespace();
                    let _id: usize = num(it.next(), ln)?;
                    let kind: u32 = num(it.next(), ln)?;
                    let ntags: usize = num(it.next(), ln)?;
                    let mut tag_vals = Vec::with_capacity(ntags);
                    for _ in 0..ntags {
                        tag_vals.push(num::<i64>(it.next(), ln)?);
                    }
                    let nodes = it.map(|t| num(Some(t), ln)).collect::<Result<Vec<usize>>>()?;
                    elements.push(Element {
                        line: ln,
                        kind,
                        physical: tag_vals.first().copied().unwrap_or(0),
                        nodes,
                    });
                }
                i += n + 2;
            }
            _ => i += 1,
        }
    }
    if !have_format {
        return Err(parse_err(1, "missing $MeshFormat section"));
    }

    // 2-node lines, 3-node triangles, 4-node tetrahedra
    let dim = if elements.iter().any(|e| e.kind == 4) { 3 } else { 2 };
    let (cell_kind, facet_kind) = if dim == 3 { (4, 2) } else { (2, 1) };
    let mut data = MeshData {
        dim,
        vertices: coords.iter().map(|c| c[..dim].to_vec()).collect(),
        ..Default::default()
    };
    for e in &elements {
        let map = |n: &usize| {
            node_index
                .get(n)
                .copied()
                .ok_or_else(|| parse_err(e.line, format!("unknown node {n}")))
        };
        if e.kind == cell_kind {
            let tag = tags
                .subdomain(e.physical)
                .ok_or_else(|| parse_err(e.line, format!("cell with unmapped physical tag {}", e.physical)))?;
            data.cells.push((tag, e.nodes.iter().map(map).collect::<Result<_>>()?));
        } else if e.kind == facet_kind {
            if let Some(m) = tags.marker(e.physical) {
                data.facets.push((m, e.nodes.iter().map(map).collect::<Result<_>>()?));
            }
        }
    }
    data.build()
}
