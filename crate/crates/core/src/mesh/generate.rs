//! Built-in structured triangulations used by the scenarios and tests.

use nalgebra::vector;

use super::{Marker, Mesh, Subdomain};
use crate::error::{FpsiError, Result};
use crate::tensor::Vector;

/// Channel with a fluid core and a poroelastic strip on each side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSpec {
    /// Cells across the fluid height.
    pub n: usize,
    pub length: f64,
    pub fluid_height: f64,
    pub wall_thickness: f64,
}

impl ChannelSpec {
    pub fn new(n: usize) -> Self {
        ChannelSpec {
            n,
            length: 50.0,
            fluid_height: 10.0,
            wall_thickness: 1.0,
        }
    }

    pub fn h(&self) -> f64 {
        self.fluid_height / self.n as f64
    }

    /// Point on the upper inner wall at half the channel length.
    pub fn probe(&self) -> Vector<2> {
        vector![0.5 * self.length, 0.5 * self.fluid_height]
    }
}

/// Split each rectangle of the tensor grid `xs × ys` into two triangles.
fn grid_cells(nx: usize, ny: usize) -> Vec<[usize; 3]> {
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut cells = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            cells.push([a, b, c]);
            cells.push([a, c, d]);
        }
    }
    cells
}

pub fn channel_2d(spec: &ChannelSpec) -> Result<Mesh<2>> {
    if spec.n < 1 {
        return Err(FpsiError::Config("channel resolution must be at least 1".into()));
    }
    let h = spec.h();
    let half = 0.5 * spec.fluid_height;
    let layers = (spec.wall_thickness / h - 1e-9).ceil().max(1.0) as usize;
    let nx = ((spec.length / h).round() as usize).max(1);

    let mut ys: Vec<f64> = Vec::new();
    for k in 0..layers {
        ys.push(-half - spec.wall_thickness + spec.wall_thickness * k as f64 / layers as f64);
    }
    for k in 0..=spec.n {
        ys.push(-half + spec.fluid_height * k as f64 / spec.n as f64);
    }
    for k in 1..=layers {
        ys.push(half + spec.wall_thickness * k as f64 / layers as f64);
    }
    let ny = ys.len() - 1;
    let xs: Vec<f64> = (0..=nx).map(|i| spec.length * i as f64 / nx as f64).collect();

    let mut vertices = Vec::with_capacity(xs.len() * ys.len());
    for &y in &ys {
        for &x in &xs {
            vertices.push(vector![x, y]);
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let row_is_solid = |j: usize| j < layers || j >= layers + spec.n;

    let cells = grid_cells(nx, ny)
        .into_iter()
        .enumerate()
        .map(|(k, c)| {
            let j = k / (2 * nx);
            let tag = if row_is_solid(j) { Subdomain::Solid } else { Subdomain::Fluid };
            (tag, c.to_vec())
        })
        .collect();

    let mut facets = Vec::new();
    for i in 0..nx {
        facets.push((Marker::GammaS0, vec![id(i, 0), id(i + 1, 0)]));
        facets.push((Marker::GammaS0, vec![id(i, ny), id(i + 1, ny)]));
        facets.push((Marker::GammaFs, vec![id(i, layers), id(i + 1, layers)]));
        facets.push((Marker::GammaFs, vec![id(i, layers + spec.n), id(i + 1, layers + spec.n)]));
    }
    for j in 0..ny {
        let (left, right) = if row_is_solid(j) {
            (Marker::GammaS0, Marker::GammaS0)
        } else {
            (Marker::GammaF0, Marker::GammaOut)
        };
        facets.push((left, vec![id(0, j), id(0, j + 1)]));
        facets.push((right, vec![id(nx, j), id(nx, j + 1)]));
    }
    Mesh::new(vertices, cells, facets)
}

/// Tagging for [`unit_square`]: one subdomain, one marker on the whole boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SquareTags {
    pub subdomain: Subdomain,
    pub boundary: Marker,
}

/// `[0,1]²` split into `n × n` squares, two triangles each.
pub fn unit_square(n: usize, tags: SquareTags) -> Result<Mesh<2>> {
    if n < 1 {
        return Err(FpsiError::Config("square resolution must be at least 1".into()));
    }
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut vertices = Vec::new();
    for j in 0..=n {
        for i in 0..=n {
            vertices.push(vector![i as f64 / n as f64, j as f64 / n as f64]);
        }
    }
    let cells = grid_cells(n, n)
        .into_iter()
        .map(|c| (tags.subdomain, c.to_vec()))
        .collect();
    let mut facets = Vec::new();
    for k in 0..n {
        facets.push((tags.boundary, vec![id(k, 0), id(k + 1, 0)]));
        facets.push((tags.boundary, vec![id(k, n), id(k + 1, n)]));
        facets.push((tags.boundary, vec![id(0, k), id(0, k + 1)]));
        facets.push((tags.boundary, vec![id(n, k), id(n, k + 1)]));
    }
    Mesh::new(vertices, cells, facets)
}
