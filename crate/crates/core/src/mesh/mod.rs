//! Conforming simplicial meshes with subdomain tags and facet markers.
//!
//! Cells carry a [`Subdomain`] tag, and every boundary facet as well as every
//! fluid–solid facet carries a [`Marker`]. Meshes are validated on
//! construction and immutable afterwards.

mod generate;
mod gmsh;
mod native;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{FpsiError, Result};
use crate::tensor::{det, Tensor, Vector};

pub use generate::{channel_2d, unit_square, ChannelSpec, SquareTags};
pub use gmsh::{parse_msh, PhysicalTagMap};
pub use native::{parse_native, write_native};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Subdomain {
    Fluid,
    Solid,
}

impl Subdomain {
    pub fn name(self) -> &'static str {
        match self {
            Subdomain::Fluid => "FLUID",
            Subdomain::Solid => "SOLID",
        }
    }

    /// Integer id used in VTK output.
    pub fn id(self) -> i32 {
        match self {
            Subdomain::Fluid => 1,
            Subdomain::Solid => 2,
        }
    }
}

impl FromStr for Subdomain {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "FLUID" => Ok(Subdomain::Fluid),
            "SOLID" => Ok(Subdomain::Solid),
            other => Err(format!("unknown subdomain tag '{other}'")),
        }
    }
}

impl fmt::Display for Subdomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Facet markers: fluid Dirichlet/inlet, fluid outlet, structure exterior,
/// fluid–structure interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Marker {
    GammaF0,
    GammaOut,
    GammaS0,
    GammaFs,
}

impl Marker {
    pub const ALL: [Marker; 4] = [Marker::GammaF0, Marker::GammaOut, Marker::GammaS0, Marker::GammaFs];

    pub fn name(self) -> &'static str {
        match self {
            Marker::GammaF0 => "GAMMA_F0",
            Marker::GammaOut => "GAMMA_OUT",
            Marker::GammaS0 => "GAMMA_S0",
            Marker::GammaFs => "GAMMA_FS",
        }
    }
}

impl FromStr for Marker {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Marker::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown facet marker '{s}'"))
    }
}

impl fmt::Display for Marker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Sorted facet vertex tuple, padded with `usize::MAX` in 2D.
type FacetKey = [usize; 3];

fn facet_key(vs: &[usize]) -> FacetKey {
    let mut k = [usize::MAX; 3];
    k[..vs.len()].copy_from_slice(vs);
    k[..vs.len()].sort_unstable();
    k
}

/// A marked facet together with the cells adjacent to it.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkedFacet {
    pub vertices: Vec<usize>,
    pub marker: Marker,
    /// Adjacent cells; one entry for exterior facets, two for interface facets.
    pub cells: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceFacet<const D: usize> {
    pub vertices: Vec<usize>,
    pub fluid_cell: usize,
    pub solid_cell: usize,
    /// Reference unit normal, pointing from the fluid cell into the solid cell.
    pub normal: Vector<D>,
    pub measure: f64,
    pub h: f64,
}

/// Local edge numbering of the reference simplex; shared with the P2 basis.
pub fn reference_edges(dim: usize) -> &'static [[usize; 2]] {
    match dim {
        2 => &[[0, 1], [1, 2], [0, 2]],
        3 => &[[0, 1], [1, 2], [0, 2], [0, 3], [1, 3], [2, 3]],
        _ => panic!("unsupported dimension {dim}"),
    }
}

#[derive(Debug, Clone)]
pub struct Mesh<const D: usize> {
    vertices: Vec<Vector<D>>,
    cells: Vec<usize>,
    tags: Vec<Subdomain>,
    facets: Vec<MarkedFacet>,
    edges: Vec<[usize; 2]>,
    cell_edges: Vec<usize>,
}

/// A mesh of either supported dimension, as read from a file.
#[derive(Debug, Clone)]
pub enum AnyMesh {
    D2(Mesh<2>),
    D3(Mesh<3>),
}

impl AnyMesh {
    pub fn dim(&self) -> usize {
        match self {
            AnyMesh::D2(_) => 2,
            AnyMesh::D3(_) => 3,
        }
    }

    pub fn summary(&self) -> MeshSummary {
        match self {
            AnyMesh::D2(m) => m.summary(),
            AnyMesh::D3(m) => m.summary(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeshSummary {
    pub dim: usize,
    pub vertices: usize,
    pub fluid_cells: usize,
    pub solid_cells: usize,
    pub fluid_volume: f64,
    pub solid_volume: f64,
    pub facets_per_marker: Vec<(Marker, usize)>,
    pub min_volume: f64,
}

impl fmt::Display for MeshSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "dimension      {}", self.dim)?;
        writeln!(f, "vertices       {}", self.vertices)?;
        writeln!(f, "fluid cells    {} (volume {:.6e})", self.fluid_cells, self.fluid_volume)?;
        writeln!(f, "solid cells    {} (volume {:.6e})", self.solid_cells, self.solid_volume)?;
        writeln!(f, "min cell vol   {:.6e}", self.min_volume)?;
        for (m, n) in &self.facets_per_marker {
            writeln!(f, "{:<14} {}", m.name(), n)?;
        }
        Ok(())
    }
}

/// Load a mesh file; `.msh` files are read as Gmsh ASCII 2.2, anything else
/// as the native format. The dimension must match `D`.
pub fn load_mesh<const D: usize>(path: &Path, tags: &PhysicalTagMap) -> Result<Mesh<D>> {
    match load_any_mesh(path, tags)? {
        AnyMesh::D2(m) if D == 2 => Ok(m.cast()),
        AnyMesh::D3(m) if D == 3 => Ok(m.cast()),
        other => Err(FpsiError::Dimension(format!(
            "mesh {} is {}-dimensional, expected {D}",
            path.display(),
            other.dim()
        ))),
    }
}

pub fn load_any_mesh(path: &Path, tags: &PhysicalTagMap) -> Result<AnyMesh> {
    let text = std::fs::read_to_string(path).map_err(|e| FpsiError::io(path, e))?;
    let is_msh = path.extension().map(|e| e == "msh").unwrap_or(false);
    if is_msh {
        parse_msh(&text, tags)
    } else {
        parse_native(&text)
    }
}

/// Raw, unvalidated mesh input.
#[derive(Debug, Clone, Default)]
pub struct MeshData {
    pub dim: usize,
    pub vertices: Vec<Vec<f64>>,
    pub cells: Vec<(Subdomain, Vec<usize>)>,
    pub facets: Vec<(Marker, Vec<usize>)>,
}

impl MeshData {
    pub fn build(self) -> Result<AnyMesh> {
        match self.dim {
            2 => Ok(AnyMesh::D2(Mesh::from_data(self)?)),
            3 => Ok(AnyMesh::D3(Mesh::from_data(self)?)),
            d => Err(FpsiError::InvalidMesh(format!("unsupported dimension {d}"))),
        }
    }
}

impl<const D: usize> Mesh<D> {
    /// Build and validate a mesh. Negatively oriented cells are repaired by
    /// swapping their first two vertices.
    pub fn new(
        vertices: Vec<Vector<D>>,
        cells: Vec<(Subdomain, Vec<usize>)>,
        facets: Vec<(Marker, Vec<usize>)>,
    ) -> Result<Self> {
        if D != 2 && D != 3 {
            return Err(FpsiError::InvalidMesh(format!("unsupported dimension {D}")));
        }
        if cells.is_empty() {
            return Err(FpsiError::InvalidMesh("mesh has no cells".into()));
        }
        let nv = vertices.len();
        let mut flat = Vec::with_capacity(cells.len() * (D + 1));
        let mut tags = Vec::with_capacity(cells.len());
        for (c, (tag, vs)) in cells.into_iter().enumerate() {
            if vs.len() != D + 1 {
                return Err(FpsiError::InvalidMesh(format!(
                    "cell {c} has {} vertices, expected {}",
                    vs.len(),
                    D + 1
                )));
            }
            if let Some(&bad) = vs.iter().find(|&&v| v >= nv) {
                return Err(FpsiError::InvalidMesh(format!("cell {c} references missing vertex {bad}")));
            }
            let distinct: BTreeSet<_> = vs.iter().collect();
            if distinct.len() != vs.len() {
                return Err(FpsiError::InvalidMesh(format!("cell {c} repeats a vertex")));
            }
            let mut vs = vs;
            let pts: Vec<Vector<D>> = vs.iter().map(|&v| vertices[v]).collect();
            let vol = signed_volume(&pts);
            let diam = diameter(&pts);
            if !(vol.abs() > 1e-14 * diam.powi(D as i32)) {
                return Err(FpsiError::InvalidMesh(format!("cell {c} has zero volume")));
            }
            if vol < 0.0 {
                vs.swap(0, 1);
            }
            flat.extend_from_slice(&vs);
            tags.push(tag);
        }

        let mut mesh = Mesh {
            vertices,
            cells: flat,
            tags,
            facets: Vec::new(),
            edges: Vec::new(),
            cell_edges: Vec::new(),
        };
        mesh.check_duplicate_vertices()?;
        mesh.build_edges();
        mesh.attach_facets(facets)?;
        Ok(mesh)
    }

    fn from_data(data: MeshData) -> Result<Self> {
        let mut verts = Vec::with_capacity(data.vertices.len());
        for (i, v) in data.vertices.iter().enumerate() {
            if v.len() != D {
                return Err(FpsiError::InvalidMesh(format!(
                    "vertex {i} has {} coordinates, expected {D}",
                    v.len()
                )));
            }
            verts.push(Vector::<D>::from_fn(|k, _| v[k]));
        }
        Mesh::new(verts, data.cells, data.facets)
    }

    fn cast<const E: usize>(self) -> Mesh<E> {
        assert_eq!(D, E);
        Mesh {
            vertices: self.vertices.iter().map(|v| Vector::<E>::from_fn(|i, _| v[i])).collect(),
            cells: self.cells,
            tags: self.tags,
            facets: self.facets,
            edges: self.edges,
            cell_edges: self.cell_edges,
        }
    }

    fn check_duplicate_vertices(&self) -> Result<()> {
        let mut order: Vec<usize> = (0..self.vertices.len()).collect();
        let key = |v: &Vector<D>| -> Vec<u64> { v.iter().map(|x| (x + 0.0).to_bits()).collect() };
        order.sort_by_key(|&i| key(&self.vertices[i]));
        for w in order.windows(2) {
            if self.vertices[w[0]] == self.vertices[w[1]] {
                return Err(FpsiError::InvalidMesh(format!(
                    "non-conforming mesh: vertices {} and {} coincide",
                    w[0], w[1]
                )));
            }
        }
        Ok(())
    }

    fn build_edges(&mut self) {
        let local = reference_edges(D);
        let mut index: HashMap<[usize; 2], usize> = HashMap::new();
        let mut edges = Vec::new();
        let mut cell_edges = Vec::with_capacity(self.n_cells() * local.len());
        for c in 0..self.n_cells() {
            let vs = self.cell(c);
            for &[a, b] in local {
                let key = if vs[a] < vs[b] { [vs[a], vs[b]] } else { [vs[b], vs[a]] };
                let id = *index.entry(key).or_insert_with(|| {
                    edges.push(key);
                    edges.len() - 1
                });
                cell_edges.push(id);
            }
        }
        self.edges = edges;
        self.cell_edges = cell_edges;
    }

    fn attach_facets(&mut self, facets: Vec<(Marker, Vec<usize>)>) -> Result<()> {
        // all cell facets
        let mut adjacency: HashMap<FacetKey, Vec<usize>> = HashMap::new();
        for c in 0..self.n_cells() {
            let vs = self.cell(c);
            for skip in 0..=D {
                let f: Vec<usize> = (0..=D).filter(|&i| i != skip).map(|i| vs[i]).collect();
                adjacency.entry(facet_key(&f)).or_default().push(c);
            }
        }
        for cells in adjacency.values() {
            if cells.len() > 2 {
                return Err(FpsiError::InvalidMesh(format!(
                    "non-conforming mesh: facet shared by {} cells",
                    cells.len()
                )));
            }
        }

        let mut markers: HashMap<FacetKey, usize> = HashMap::new();
        let mut marked: Vec<MarkedFacet> = Vec::new();
        for (marker, vs) in facets {
            if vs.len() != D {
                return Err(FpsiError::InvalidMesh(format!(
                    "{marker} facet has {} vertices, expected {D}",
                    vs.len()
                )));
            }
            let key = facet_key(&vs);
            if let Some(&prev) = markers.get(&key) {
                if marked[prev].marker != marker {
                    return Err(FpsiError::InvalidMesh(format!(
                        "contradictory markers {} and {marker} on facet {vs:?}",
                        marked[prev].marker
                    )));
                }
                continue;
            }
            let cells = adjacency.get(&key).cloned().ok_or_else(|| {
                FpsiError::InvalidMesh(format!("{marker} facet {vs:?} is not a facet of any cell"))
            })?;
            let tags: Vec<Subdomain> = cells.iter().map(|&c| self.tags[c]).collect();
            match marker {
                Marker::GammaFs => {
                    let ok = tags.len() == 2 && tags.contains(&Subdomain::Fluid) && tags.contains(&Subdomain::Solid);
                    if !ok {
                        return Err(FpsiError::InvalidMesh(format!(
                            "interface facet not between subdomains: {vs:?}"
                        )));
                    }
                }
                Marker::GammaF0 | Marker::GammaOut => {
                    if tags != [Subdomain::Fluid] {
                        return Err(FpsiError::InvalidMesh(format!(
                            "{marker} facet {vs:?} must belong to exactly one FLUID cell"
                        )));
                    }
                }
                Marker::GammaS0 => {
                    if tags != [Subdomain::Solid] {
                        return Err(FpsiError::InvalidMesh(format!(
                            "{marker} facet {vs:?} must belong to exactly one SOLID cell"
                        )));
                    }
                }
            }
            markers.insert(key, marked.len());
            marked.push(MarkedFacet {
                vertices: vs,
                marker,
                cells,
            });
        }

        // completeness: every exterior facet and every fluid/solid facet is marked
        let mut keys: Vec<&FacetKey> = adjacency.keys().collect();
        keys.sort_unstable();
        let mut exterior: Vec<FacetKey> = Vec::new();
        for key in keys {
            let cells = &adjacency[key];
            let needs_marker = cells.len() == 1 || self.tags[cells[0]] != self.tags[cells[1]];
            if cells.len() == 1 {
                exterior.push(*key);
            }
            if needs_marker && !markers.contains_key(key) {
                let vs: Vec<usize> = key.iter().copied().filter(|&v| v != usize::MAX).collect();
                return Err(FpsiError::InvalidMesh(format!("facet {vs:?} is missing a marker")));
            }
        }
        self.check_hanging_vertices(&exterior)?;
        self.facets = marked;
        Ok(())
    }

    /// Detect T-junctions: an exterior-facet vertex lying inside another
    /// exterior facet.
    fn check_hanging_vertices(&self, exterior: &[FacetKey]) -> Result<()> {
        let mut candidates: Vec<usize> = exterior
            .iter()
            .flat_map(|k| k.iter().copied().filter(|&v| v != usize::MAX))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        candidates.sort_by(|&a, &b| self.vertices[a][0].total_cmp(&self.vertices[b][0]));
        let xs: Vec<f64> = candidates.iter().map(|&v| self.vertices[v][0]).collect();
        for key in exterior {
            let vs: Vec<usize> = key.iter().copied().filter(|&v| v != usize::MAX).collect();
            let pts: Vec<Vector<D>> = vs.iter().map(|&v| self.vertices[v]).collect();
            let diam = diameter(&pts);
            let tol = 1e-10 * diam;
            let lo = pts.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min) - tol;
            let hi = pts.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max) + tol;
            let start = xs.partition_point(|&x| x < lo);
            for idx in start..xs.len() {
                if xs[idx] > hi {
                    break;
                }
                let v = candidates[idx];
                if vs.contains(&v) {
                    continue;
                }
                if point_in_facet(&pts, &self.vertices[v], tol) {
                    return Err(FpsiError::InvalidMesh(format!(
                        "non-conforming mesh: vertex {v} lies inside facet {vs:?}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        D
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_cells(&self) -> usize {
        self.tags.len()
    }

    pub fn vertices(&self) -> &[Vector<D>] {
        &self.vertices
    }

    pub fn vertex(&self, v: usize) -> &Vector<D> {
        &self.vertices[v]
    }

    pub fn cell(&self, c: usize) -> &[usize] {
        &self.cells[c * (D + 1)..(c + 1) * (D + 1)]
    }

    pub fn cell_tag(&self, c: usize) -> Subdomain {
        self.tags[c]
    }

    pub fn cells_with_tag(&self, tag: Subdomain) -> Vec<usize> {
        (0..self.n_cells()).filter(|&c| self.tags[c] == tag).collect()
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    /// Global edge ids of a cell, in [`reference_edges`] order.
    pub fn cell_edges(&self, c: usize) -> &[usize] {
        let n = reference_edges(D).len();
        &self.cell_edges[c * n..(c + 1) * n]
    }

    pub fn cell_points(&self, c: usize) -> Vec<Vector<D>> {
        self.cell(c).iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn signed_volume(&self, c: usize) -> f64 {
        signed_volume(&self.cell_points(c))
    }

    pub fn cell_volume(&self, c: usize) -> f64 {
        self.signed_volume(c).abs()
    }

    pub fn cell_centroid(&self, c: usize) -> Vector<D> {
        centroid(&self.cell_points(c))
    }

    pub fn total_volume(&self) -> f64 {
        (0..self.n_cells()).map(|c| self.cell_volume(c)).sum()
    }

    pub fn subdomain_volume(&self, tag: Subdomain) -> f64 {
        self.cells_with_tag(tag).iter().map(|&c| self.cell_volume(c)).sum()
    }

    pub fn marked_facets(&self) -> &[MarkedFacet] {
        &self.facets
    }

    pub fn facets_with_marker(&self, marker: Marker) -> impl Iterator<Item = &MarkedFacet> {
        self.facets.iter().filter(move |f| f.marker == marker)
    }

    pub fn has_marker(&self, marker: Marker) -> bool {
        self.facets.iter().any(|f| f.marker == marker)
    }

    pub fn has_subdomain(&self, tag: Subdomain) -> bool {
        self.tags.contains(&tag)
    }

    pub fn facet_points(&self, facet: &[usize]) -> Vec<Vector<D>> {
        facet.iter().map(|&v| self.vertices[v]).collect()
    }

    /// Unit normal of an exterior facet pointing out of its (single) cell.
    pub fn outward_normal(&self, facet: &MarkedFacet) -> Vector<D> {
        let pts = self.facet_points(&facet.vertices);
        let n = facet_normal(&pts);
        let inward = self.cell_centroid(facet.cells[0]) - centroid(&pts);
        if n.dot(&inward) > 0.0 {
            -n
        } else {
            n
        }
    }

    /// One entry per GAMMA_FS facet, in input order.
    pub fn extract_interface(&self) -> Vec<InterfaceFacet<D>> {
        self.facets_with_marker(Marker::GammaFs)
            .map(|f| {
                let (fluid_cell, solid_cell) = if self.tags[f.cells[0]] == Subdomain::Fluid {
                    (f.cells[0], f.cells[1])
                } else {
                    (f.cells[1], f.cells[0])
                };
                let pts = self.facet_points(&f.vertices);
                let mut normal = facet_normal(&pts);
                let dir = self.cell_centroid(solid_cell) - self.cell_centroid(fluid_cell);
                if normal.dot(&dir) < 0.0 {
                    normal = -normal;
                }
                InterfaceFacet {
                    vertices: f.vertices.clone(),
                    fluid_cell,
                    solid_cell,
                    normal,
                    measure: facet_measure(&pts),
                    h: facet_local_size(&pts),
                }
            })
            .collect()
    }

    pub fn summary(&self) -> MeshSummary {
        MeshSummary {
            dim: D,
            vertices: self.n_vertices(),
            fluid_cells: self.cells_with_tag(Subdomain::Fluid).len(),
            solid_cells: self.cells_with_tag(Subdomain::Solid).len(),
            fluid_volume: self.subdomain_volume(Subdomain::Fluid),
            solid_volume: self.subdomain_volume(Subdomain::Solid),
            facets_per_marker: Marker::ALL
                .iter()
                .map(|&m| (m, self.facets_with_marker(m).count()))
                .collect(),
            min_volume: (0..self.n_cells()).map(|c| self.cell_volume(c)).fold(f64::INFINITY, f64::min),
        }
    }
}

/// Signed simplex volume: `det[x1-x0, ..., xd-x0] / d!`.
pub fn signed_volume<const D: usize>(pts: &[Vector<D>]) -> f64 {
    let b = Tensor::<D>::from_fn(|i, j| pts[j + 1][i] - pts[0][i]);
    let fact: f64 = (1..=D).map(|k| k as f64).product();
    det(&b) / fact
}

pub fn centroid<const D: usize>(pts: &[Vector<D>]) -> Vector<D> {
    pts.iter().fold(Vector::<D>::zeros(), |acc, p| acc + p) / pts.len() as f64
}

/// Longest pairwise distance.
pub fn diameter<const D: usize>(pts: &[Vector<D>]) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            d = d.max((pts[i] - pts[j]).norm());
        }
    }
    d
}

/// Local mesh size of a facet: its diameter (longest edge).
pub fn facet_local_size<const D: usize>(pts: &[Vector<D>]) -> f64 {
    diameter(pts)
}

/// Measure of a facet with D vertices in D dimensions (segment length or triangle area).
pub fn facet_measure<const D: usize>(pts: &[Vector<D>]) -> f64 {
    match D {
        2 => (pts[1] - pts[0]).norm(),
        3 => {
            let a = pts[1] - pts[0];
            let b = pts[2] - pts[0];
            let c = [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
            0.5 * (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt()
        }
        _ => panic!("unsupported dimension {D}"),
    }
}

/// Unit normal of a facet, orientation unspecified.
pub fn facet_normal<const D: usize>(pts: &[Vector<D>]) -> Vector<D> {
    let mut n = Vector::<D>::zeros();
    match D {
        2 => {
            let t = pts[1] - pts[0];
            n[0] = t[1];
            n[1] = -t[0];
        }
        3 => {
            let a = pts[1] - pts[0];
            let b = pts[2] - pts[0];
            n[0] = a[1] * b[2] - a[2] * b[1];
            n[1] = a[2] * b[0] - a[0] * b[2];
            n[2] = a[0] * b[1] - a[1] * b[0];
        }
        _ => panic!("unsupported dimension {D}"),
    }
    n / n.norm()
}

fn point_in_facet<const D: usize>(pts: &[Vector<D>], p: &Vector<D>, tol: f64) -> bool {
    let n = facet_normal(pts);
    if (p - pts[0]).dot(&n).abs() > tol {
        return false;
    }
    match D {
        2 => {
            let t = pts[1] - pts[0];
            let s = (p - pts[0]).dot(&t) / t.norm_squared();
            s > 1e-10 && s < 1.0 - 1e-10
        }
        3 => {
            // barycentric coordinates in the facet plane
            let e1 = pts[1] - pts[0];
            let e2 = pts[2] - pts[0];
            let r = p - pts[0];
            let (a, b, c) = (e1.dot(&e1), e1.dot(&e2), e2.dot(&e2));
            let (d1, d2) = (r.dot(&e1), r.dot(&e2));
            let den = a * c - b * b;
            let l1 = (c * d1 - b * d2) / den;
            let l2 = (a * d2 - b * d1) / den;
            let l0 = 1.0 - l1 - l2;
            let eps = 1e-10;
            l0 > -eps && l1 > -eps && l2 > -eps && [l0, l1, l2].iter().filter(|&&l| l > 1.0 - eps).count() == 0
        }
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::vector;

    fn two_triangle_square(fluid_right: Subdomain, interface: Marker) -> Result<Mesh<2>> {
        let v = vec![vector![0.0, 0.0], vector![1.0, 0.0], vector![1.0, 1.0], vector![0.0, 1.0]];
        // diagonal from (1,0) to (0,1): lower-left triangle and upper-right triangle
        let cells = vec![(Subdomain::Fluid, vec![0, 1, 3]), (fluid_right, vec![1, 2, 3])];
        let mut facets = vec![
            (Marker::GammaF0, vec![0, 1]),
            (Marker::GammaF0, vec![3, 0]),
            (interface, vec![1, 3]),
        ];
        let outer = if fluid_right == Subdomain::Solid { Marker::GammaS0 } else { Marker::GammaF0 };
        facets.push((outer, vec![1, 2]));
        facets.push((outer, vec![2, 3]));
        Mesh::new(v, cells, facets)
    }

    #[test]
    fn single_reference_triangle() {
        let m = Mesh::<2>::new(
            vec![vector![0.0, 0.0], vector![1.0, 0.0], vector![0.0, 1.0]],
            vec![(Subdomain::Fluid, vec![0, 1, 2])],
            vec![
                (Marker::GammaF0, vec![0, 1]),
                (Marker::GammaF0, vec![1, 2]),
                (Marker::GammaOut, vec![2, 0]),
            ],
        )
        .unwrap();
        assert_eq!(m.n_cells(), 1);
        assert_eq!(m.cell_volume(0), 0.5);
        assert!(m.extract_interface().is_empty());
    }

    #[test]
    fn orientation_is_repaired() {
        let m = Mesh::<2>::new(
            vec![vector![0.0, 0.0], vector![1.0, 0.0], vector![0.0, 1.0]],
            vec![(Subdomain::Fluid, vec![0, 2, 1])],
            vec![
                (Marker::GammaF0, vec![0, 1]),
                (Marker::GammaF0, vec![1, 2]),
                (Marker::GammaF0, vec![2, 0]),
            ],
        )
        .unwrap();
        assert!(m.signed_volume(0) > 0.0);
    }

    #[test]
    fn interface_of_split_square() {
        let m = two_triangle_square(Subdomain::Solid, Marker::GammaFs).unwrap();
        let iface = m.extract_interface();
        assert_eq!(iface.len(), 1);
        let f = &iface[0];
        assert!((f.measure - 2f64.sqrt()).abs() < 1e-15);
        let s = 1.0 / 2f64.sqrt();
        // fluid is the lower-left triangle, so the normal points to (1,1)/sqrt2
        assert!((f.normal - vector![s, s]).norm() < 1e-15);
        let dir = m.cell_centroid(f.solid_cell) - m.cell_centroid(f.fluid_cell);
        assert!(f.normal.dot(&dir) > 0.0);
        assert_eq!(iface, m.extract_interface());
    }

    #[test]
    fn interface_between_two_fluid_cells_is_rejected() {
        let err = two_triangle_square(Subdomain::Fluid, Marker::GammaFs).unwrap_err();
        assert!(err.to_string().contains("interface facet not between subdomains"), "{err}");
    }

    #[test]
    fn missing_marker_is_rejected() {
        let err = Mesh::<2>::new(
            vec![vector![0.0, 0.0], vector![1.0, 0.0], vector![0.0, 1.0]],
            vec![(Subdomain::Fluid, vec![0, 1, 2])],
            vec![(Marker::GammaF0, vec![0, 1]), (Marker::GammaF0, vec![1, 2])],
        )
        .unwrap_err();
        assert!(err.to_string().contains("missing a marker"), "{err}");
    }

    #[test]
    fn contradictory_marker_is_rejected() {
        let err = Mesh::<2>::new(
            vec![vector![0.0, 0.0], vector![1.0, 0.0], vector![0.0, 1.0]],
            vec![(Subdomain::Fluid, vec![0, 1, 2])],
            vec![
                (Marker::GammaF0, vec![0, 1]),
                (Marker::GammaOut, vec![1, 0]),
                (Marker::GammaF0, vec![1, 2]),
                (Marker::GammaF0, vec![2, 0]),
            ],
        )
        .unwrap_err();
        assert!(err.to_string().contains("contradictory"), "{err}");
    }

    #[test]
    fn zero_volume_is_rejected() {
        let err = Mesh::<2>::new(
            vec![vector![0.0, 0.0], vector![1.0, 0.0], vector![2.0, 0.0]],
            vec![(Subdomain::Fluid, vec![0, 1, 2])],
            vec![],
        )
        .unwrap_err();
        assert!(err.to_string().contains("zero volume"), "{err}");
    }

    #[test]
    fn hanging_vertex_is_rejected() {
        // big triangle on the left, two small ones on the right sharing a split edge
        let v = vec![
            vector![0.0, 0.0],
            vector![1.0, 0.0],
            vector![1.0, 1.0],
            vector![1.0, 0.5],
            vector![2.0, 0.5],
        ];
        let cells = vec![
            (Subdomain::Fluid, vec![0, 1, 2]),
            (Subdomain::Fluid, vec![1, 4, 3]),
            (Subdomain::Fluid, vec![3, 4, 2]),
        ];
        let facets = vec![
            (Marker::GammaF0, vec![0, 1]),
            (Marker::GammaF0, vec![2, 0]),
            (Marker::GammaF0, vec![1, 2]),
            (Marker::GammaF0, vec![1, 3]),
            (Marker::GammaF0, vec![3, 2]),
            (Marker::GammaF0, vec![1, 4]),
            (Marker::GammaF0, vec![4, 2]),
        ];
        let err = Mesh::<2>::new(v, cells, facets).unwrap_err();
        assert!(err.to_string().contains("non-conforming"), "{err}");
    }

    #[test]
    fn local_size_is_facet_diameter() {
        assert_eq!(facet_local_size(&[vector![0.0, 0.0], vector![0.0, 2.0]]), 2.0);
        assert_eq!(facet_local_size(&[vector![0.0, 0.0], vector![3.0, 4.0]]), 5.0);
        let h = facet_local_size(&[vector![0.0, 0.0, 0.0], vector![1.0, 0.0, 0.0], vector![0.0, 1.0, 0.0]]);
        assert!((h - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn axis_aligned_interface_normal() {
        let v = vec![
            vector![-1.0, 0.0],
            vector![0.0, 0.0],
            vector![0.0, 1.0],
            vector![1.0, 0.0],
        ];
        let cells = vec![(Subdomain::Fluid, vec![0, 1, 2]), (Subdomain::Solid, vec![1, 3, 2])];
        let facets = vec![
            (Marker::GammaF0, vec![0, 1]),
            (Marker::GammaOut, vec![2, 0]),
            (Marker::GammaFs, vec![1, 2]),
            (Marker::GammaS0, vec![1, 3]),
            (Marker::GammaS0, vec![3, 2]),
        ];
        let m = Mesh::<2>::new(v, cells, facets).unwrap();
        let iface = m.extract_interface();
        assert!((iface[0].normal - vector![1.0, 0.0]).norm() < 1e-15);
        assert_eq!(iface[0].h, 1.0);
    }
}
