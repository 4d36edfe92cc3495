//! Continuous Lagrange spaces on one subdomain.

use crate::error::{FpsiError, Result};
use crate::fe::element::ReferenceElement;
use crate::mesh::{reference_edges, Marker, Mesh, Subdomain};
use crate::tensor::{det, inverse, Tensor, Vector};

/// Affine map `x = x0 + B ξ` of one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellGeometry<const D: usize> {
    pub x0: Vector<D>,
    pub b: Tensor<D>,
    pub b_inv_t: Tensor<D>,
    pub det_b: f64,
}

impl<const D: usize> CellGeometry<D> {
    pub fn new(pts: &[Vector<D>]) -> Self {
        let b = Tensor::<D>::from_fn(|i, j| pts[j + 1][i] - pts[0][i]);
        let b_inv = inverse(&b).expect("validated cell has nonzero volume");
        CellGeometry {
            x0: pts[0],
            b,
            b_inv_t: b_inv.transpose(),
            det_b: det(&b),
        }
    }

    pub fn map(&self, xi: &[f64]) -> Vector<D> {
        self.x0 + self.b * Vector::<D>::from_fn(|i, _| xi[i])
    }

    pub fn inverse_map(&self, x: &Vector<D>) -> [f64; 3] {
        let xi = self.b_inv_t.transpose() * (x - self.x0);
        std::array::from_fn(|i| if i < D { xi[i] } else { 0.0 })
    }

    /// Physical gradient from a reference gradient.
    pub fn grad(&self, g: &[f64; 3]) -> Vector<D> {
        self.b_inv_t * Vector::<D>::from_fn(|i, _| g[i])
    }
}

/// Mesh entity carrying a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Entity {
    Vertex(usize),
    Edge(usize),
}

#[derive(Debug, Clone)]
pub struct FunctionSpace<const D: usize> {
    pub tag: Subdomain,
    pub components: usize,
    pub element: ReferenceElement,
    cells: Vec<usize>,
    local_of_cell: Vec<Option<usize>>,
    cell_nodes: Vec<usize>,
    node_coords: Vec<Vector<D>>,
    node_entity: Vec<Entity>,
    vertex_node: Vec<Option<usize>>,
    edge_node: Vec<Option<usize>>,
    dirichlet: Vec<Option<Marker>>,
    geometry: Vec<CellGeometry<D>>,
}

/// Build a scalar (`components = 1`) or vector (`components = D`) Lagrange
/// space of `degree` on the cells tagged `tag`. Nodes on facets with one of
/// `dirichlet_markers` are masked; earlier markers take priority.
pub fn build_space<const D: usize>(
    mesh: &Mesh<D>,
    tag: Subdomain,
    components: usize,
    degree: usize,
    dirichlet_markers: &[Marker],
) -> Result<FunctionSpace<D>> {
    let element = ReferenceElement::new(D, degree)?;
    if components != 1 && components != D {
        return Err(FpsiError::Space(format!("value rank must have 1 or {D} components")));
    }
    for &m in dirichlet_markers {
        if !mesh.has_marker(m) {
            return Err(FpsiError::Space(format!("unknown Dirichlet marker {m}")));
        }
    }
    let cells = mesh.cells_with_tag(tag);
    if cells.is_empty() {
        return Err(FpsiError::Space(format!("subdomain {tag} is empty")));
    }
    let mut local_of_cell = vec![None; mesh.n_cells()];
    for (l, &c) in cells.iter().enumerate() {
        local_of_cell[c] = Some(l);
    }

    let mut vertex_node = vec![None; mesh.n_vertices()];
    let mut edge_node = vec![None; mesh.edges().len()];
    let mut used_vertices = vec![false; mesh.n_vertices()];
    let mut used_edges = vec![false; mesh.edges().len()];
    for &c in &cells {
        mesh.cell(c).iter().for_each(|&v| used_vertices[v] = true);
        mesh.cell_edges(c).iter().for_each(|&e| used_edges[e] = true);
    }
    let mut node_coords = Vec::new();
    let mut node_entity = Vec::new();
    for (v, _) in used_vertices.iter().enumerate().filter(|(_, &u)| u) {
        vertex_node[v] = Some(node_coords.len());
        node_coords.push(*mesh.vertex(v));
        node_entity.push(Entity::Vertex(v));
    }
    if degree == 2 {
        for (e, _) in used_edges.iter().enumerate().filter(|(_, &u)| u) {
            let [a, b] = mesh.edges()[e];
            edge_node[e] = Some(node_coords.len());
            node_coords.push((mesh.vertex(a) + mesh.vertex(b)) * 0.5);
            node_entity.push(Entity::Edge(e));
        }
    }

    let mut cell_nodes = Vec::with_capacity(cells.len() * element.n_nodes());
    let mut geometry = Vec::with_capacity(cells.len());
    for &c in &cells {
        cell_nodes.extend(mesh.cell(c).iter().map(|&v| vertex_node[v].unwrap()));
        if degree == 2 {
            cell_nodes.extend(mesh.cell_edges(c).iter().map(|&e| edge_node[e].unwrap()));
        }
        geometry.push(CellGeometry::new(&mesh.cell_points(c)));
    }

    let mut dirichlet = vec![None; node_coords.len()];
    let edge_lookup: std::collections::HashMap<[usize; 2], usize> =
        mesh.edges().iter().enumerate().map(|(i, &e)| (e, i)).collect();
    for &m in dirichlet_markers.iter().rev() {
        for f in mesh.facets_with_marker(m) {
            for &v in &f.vertices {
                if let Some(n) = vertex_node[v] {
                    dirichlet[n] = Some(m);
                }
            }
            if degree == 2 {
                for i in 0..f.vertices.len() {
                    for j in i + 1..f.vertices.len() {
                        let (a, b) = (f.vertices[i], f.vertices[j]);
                        let key = if a < b { [a, b] } else { [b, a] };
                        if let Some(n) = edge_lookup.get(&key).and_then(|&e| edge_node[e]) {
                            dirichlet[n] = Some(m);
                        }
                    }
                }
            }
        }
    }

    Ok(FunctionSpace {
        tag,
        components,
        element,
        cells,
        local_of_cell,
        cell_nodes,
        node_coords,
        node_entity,
        vertex_node,
        edge_node,
        dirichlet,
        geometry,
    })
}

impl<const D: usize> FunctionSpace<D> {
    pub fn degree(&self) -> usize {
        self.element.degree
    }

    pub fn n_nodes(&self) -> usize {
        self.node_coords.len()
    }

    pub fn n_dofs(&self) -> usize {
        self.n_nodes() * self.components
    }

    pub fn nodes_per_cell(&self) -> usize {
        self.element.n_nodes()
    }

    /// Global mesh cell ids covered by the space, in local order.
    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn local_cell(&self, cell: usize) -> Option<usize> {
        self.local_of_cell.get(cell).copied().flatten()
    }

    pub fn cell_nodes(&self, local: usize) -> &[usize] {
        let n = self.nodes_per_cell();
        &self.cell_nodes[local * n..(local + 1) * n]
    }

    pub fn geometry(&self, local: usize) -> &CellGeometry<D> {
        &self.geometry[local]
    }

    pub fn dof(&self, node: usize, comp: usize) -> usize {
        node * self.components + comp
    }

    /// DOFs of a cell, node-major: `[n0c0, n0c1, …, n1c0, …]`.
    pub fn cell_dofs(&self, local: usize) -> Vec<usize> {
        self.cell_nodes(local)
            .iter()
            .flat_map(|&n| (0..self.components).map(move |c| n * self.components + c))
            .collect()
    }

    pub fn node_coord(&self, node: usize) -> &Vector<D> {
        &self.node_coords[node]
    }

    pub fn node_entity(&self, node: usize) -> Entity {
        self.node_entity[node]
    }

    pub fn node_of_entity(&self, e: Entity) -> Option<usize> {
        match e {
            Entity::Vertex(v) => self.vertex_node.get(v).copied().flatten(),
            Entity::Edge(i) => self.edge_node.get(i).copied().flatten(),
        }
    }

    pub fn node_of_vertex(&self, v: usize) -> Option<usize> {
        self.node_of_entity(Entity::Vertex(v))
    }

    pub fn dirichlet_marker(&self, node: usize) -> Option<Marker> {
        self.dirichlet[node]
    }

    pub fn is_dirichlet_dof(&self, dof: usize) -> bool {
        self.dirichlet[dof / self.components].is_some()
    }

    pub fn dirichlet_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_nodes()).filter(|&n| self.dirichlet[n].is_some())
    }

    /// Nodal interpolant of `f`, which writes `components` values.
    pub fn interpolate(&self, f: impl Fn(&Vector<D>, &mut [f64])) -> Vec<f64> {
        let mut out = vec![0.0; self.n_dofs()];
        for (n, x) in self.node_coords.iter().enumerate() {
            f(x, &mut out[n * self.components..(n + 1) * self.components]);
        }
        out
    }

    /// Evaluate a field at reference point `xi` of local cell `local`.
    pub fn evaluate(&self, coeffs: &[f64], local: usize, xi: &[f64]) -> Result<Vec<f64>> {
        let (vals, _) = self.element.eval_basis(xi)?;
        let mut out = vec![0.0; self.components];
        for (i, &n) in self.cell_nodes(local).iter().enumerate() {
            for (c, o) in out.iter_mut().enumerate() {
                *o += vals[i] * coeffs[n * self.components + c];
            }
        }
        Ok(out)
    }

    /// Physical gradient (row per component) at `xi` of local cell `local`.
    pub fn evaluate_grad(&self, coeffs: &[f64], local: usize, xi: &[f64]) -> Result<Vec<Vector<D>>> {
        let (_, grads) = self.element.eval_basis(xi)?;
        let geo = &self.geometry[local];
        let mut out = vec![Vector::<D>::zeros(); self.components];
        for (i, &n) in self.cell_nodes(local).iter().enumerate() {
            let g = geo.grad(&grads[i]);
            for (c, o) in out.iter_mut().enumerate() {
                *o += g * coeffs[n * self.components + c];
            }
        }
        Ok(out)
    }

    /// Find the local cell containing `x` and its reference coordinates.
    pub fn locate(&self, x: &Vector<D>) -> Option<(usize, [f64; 3])> {
        let mut best: Option<(usize, [f64; 3], f64)> = None;
        for (l, geo) in self.geometry.iter().enumerate() {
            let xi = geo.inverse_map(x);
            let min = (0..D).map(|i| xi[i]).fold(1.0 - xi[..D].iter().sum::<f64>(), f64::min);
            if best.map_or(true, |b| min > b.2) {
                best = Some((l, xi, min));
            }
        }
        best.filter(|b| b.2 > -1e-9).map(|b| {
            let mut xi = b.1;
            // clamp round-off so the point is accepted by eval_basis
            for v in xi.iter_mut().take(D) {
                *v = v.max(0.0);
            }
            let s: f64 = xi[..D].iter().sum();
            if s > 1.0 {
                xi[..D].iter_mut().for_each(|v| *v /= s);
            }
            (b.0, xi)
        })
    }

    /// Evaluate at a physical point; `None` outside the subdomain.
    pub fn evaluate_at(&self, coeffs: &[f64], x: &Vector<D>) -> Option<Vec<f64>> {
        let (l, xi) = self.locate(x)?;
        self.evaluate(coeffs, l, &xi).ok()
    }
}

/// Local edge index of the reference edge joining local vertices `a` and `b`.
pub fn local_edge(dim: usize, a: usize, b: usize) -> Option<usize> {
    reference_edges(dim)
        .iter()
        .position(|&[x, y]| (x, y) == (a, b) || (x, y) == (b, a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{unit_square, SquareTags};
    use nalgebra::vector;
    use proptest::prelude::*;

    fn triangle() -> Mesh<2> {
        Mesh::new(
            vec![vector![0.0, 0.0], vector![1.0, 0.0], vector![0.0, 1.0]],
            vec![(Subdomain::Fluid, vec![0, 1, 2])],
            vec![
                (Marker::GammaF0, vec![0, 1]),
                (Marker::GammaOut, vec![1, 2]),
                (Marker::GammaF0, vec![2, 0]),
            ],
        )
        .unwrap()
    }

    fn square(n: usize) -> Mesh<2> {
        unit_square(
            n,
            SquareTags {
                subdomain: Subdomain::Fluid,
                boundary: Marker::GammaF0,
            },
        )
        .unwrap()
    }

    #[test]
    fn dof_counts() {
        let m = triangle();
        assert_eq!(build_space(&m, Subdomain::Fluid, 1, 1, &[]).unwrap().n_dofs(), 3);
        assert_eq!(build_space(&m, Subdomain::Fluid, 2, 2, &[]).unwrap().n_dofs(), 12);
        assert_eq!(build_space(&square(1), Subdomain::Fluid, 1, 2, &[]).unwrap().n_dofs(), 9);
        assert!(build_space(&m, Subdomain::Solid, 1, 1, &[]).is_err());
        assert!(build_space(&m, Subdomain::Fluid, 1, 1, &[Marker::GammaS0]).is_err());
    }

    #[test]
    fn dirichlet_mask_follows_markers() {
        let m = triangle();
        let s = build_space(&m, Subdomain::Fluid, 2, 2, &[Marker::GammaOut, Marker::GammaF0]).unwrap();
        // all 6 nodes lie on the boundary; vertex 1 and 2 are shared and take GAMMA_OUT
        assert_eq!(s.dirichlet_nodes().count(), 6);
        assert_eq!(s.dirichlet_marker(s.node_of_vertex(1).unwrap()), Some(Marker::GammaOut));
        assert_eq!(s.dirichlet_marker(s.node_of_vertex(0).unwrap()), Some(Marker::GammaF0));
        let s = build_space(&square(2), Subdomain::Fluid, 1, 2, &[Marker::GammaF0]).unwrap();
        // 5×5 P2 grid nodes, 16 on the boundary
        assert_eq!(s.dirichlet_nodes().count(), 16);
        assert_eq!(s.n_nodes(), 25);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]

        #[test]
        fn p2_reproduces_quadratics(c in prop::collection::vec(-2.0f64..2.0, 6), x in 0.0f64..1.0, y in 0.0f64..1.0) {
            let f = |p: &Vector<2>| c[0] + c[1] * p[0] + c[2] * p[1] + c[3] * p[0] * p[0] + c[4] * p[0] * p[1] + c[5] * p[1] * p[1];
            let s = build_space(&square(3), Subdomain::Fluid, 1, 2, &[]).unwrap();
            let coeffs = s.interpolate(|p, out| out[0] = f(p));
            let pt = vector![x, y];
            let v = s.evaluate_at(&coeffs, &pt).unwrap();
            prop_assert!((v[0] - f(&pt)).abs() < 1e-12);
        }
    }
}
