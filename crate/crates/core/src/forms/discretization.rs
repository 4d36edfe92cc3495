//! Spaces, quadrature tables and the sparsity pattern of the monolithic system.

use serde::{Deserialize, Serialize};

use super::layout::{Block, BlockLayout};
use super::sparse::CsrMatrix;
use crate::error::{FpsiError, Result};
use crate::fe::{build_space, quadrature, reference_measure, FunctionSpace, QuadratureRule, ReferenceElement, Tabulation};
use crate::mesh::{facet_measure, InterfaceFacet, Marker, Mesh, Subdomain};
use crate::tensor::Vector;

#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizationOptions {
    pub quadrature_degree: usize,
    /// Markers on which the fluid velocity is prescribed. Fluid boundaries
    /// not listed here are natural (external pressure) boundaries.
    pub fluid_dirichlet: Vec<Marker>,
}

impl Default for DiscretizationOptions {
    fn default() -> Self {
        DiscretizationOptions {
            quadrature_degree: 6,
            fluid_dirichlet: Vec::new(),
        }
    }
}

/// Facet quadrature mapped into one or two adjacent cells.
#[derive(Debug, Clone)]
pub struct FacetQuadrature<const D: usize> {
    /// Reference-measure weights (`dŝ`).
    pub weights: Vec<f64>,
    pub points: Vec<Vector<D>>,
    pub xi: Vec<[f64; 3]>,
    pub p2: Tabulation,
    pub p1: Tabulation,
}

/// A natural boundary facet of one subdomain.
#[derive(Debug, Clone)]
pub struct BoundaryFacet<const D: usize> {
    pub marker: Marker,
    /// Local cell index in the subdomain's spaces.
    pub cell: usize,
    /// Outward reference unit normal.
    pub normal: Vector<D>,
    pub quad: FacetQuadrature<D>,
}

/// Interface facet with quadrature on both sides.
#[derive(Debug, Clone)]
pub struct InterfaceQuadrature<const D: usize> {
    pub facet: InterfaceFacet<D>,
    pub fluid_cell: usize,
    pub solid_cell: usize,
    pub fluid: FacetQuadrature<D>,
    pub solid: FacetQuadrature<D>,
}

#[derive(Debug, Clone)]
pub struct Discretization<const D: usize> {
    pub mesh: Mesh<D>,
    pub options: DiscretizationOptions,
    pub vf: Option<FunctionSpace<D>>,
    pub pf: Option<FunctionSpace<D>>,
    pub vs: Option<FunctionSpace<D>>,
    pub q: Option<FunctionSpace<D>>,
    pub pd: Option<FunctionSpace<D>>,
    /// Fluid P2 vector space for the mesh-extension problem.
    pub ext: Option<FunctionSpace<D>>,
    pub layout: BlockLayout,
    pub cell_rule: QuadratureRule,
    pub p2: Tabulation,
    pub p1: Tabulation,
    pub interface: Vec<InterfaceQuadrature<D>>,
    /// Fluid facets carrying an external-pressure condition.
    pub natural: Vec<BoundaryFacet<D>>,
    /// Fixed structure boundary facets.
    pub pore_boundary: Vec<BoundaryFacet<D>>,
    /// Fluid pressure node pinned when the fluid box is closed.
    pub pressure_pin: Option<usize>,
    pattern: CsrMatrix,
    ext_pattern: Option<CsrMatrix>,
}

fn facet_quadrature<const D: usize>(
    space: &FunctionSpace<D>,
    cell: usize,
    pts: &[Vector<D>],
    rule: &QuadratureRule,
) -> FacetQuadrature<D> {
    let scale = facet_measure(pts) / reference_measure(D - 1);
    let geo = space.geometry(cell);
    let mut points = Vec::with_capacity(rule.len());
    let mut xi = Vec::with_capacity(rule.len());
    for lam in rule.barycentric() {
        let x = pts.iter().zip(&lam).fold(Vector::<D>::zeros(), |acc, (p, l)| acc + p * *l);
        xi.push(geo.inverse_map(&x));
        points.push(x);
    }
    let p2 = ReferenceElement::new(D, 2).unwrap().tabulate_points(&xi);
    let p1 = ReferenceElement::new(D, 1).unwrap().tabulate_points(&xi);
    FacetQuadrature {
        weights: rule.weights.iter().map(|w| w * scale).collect(),
        points,
        xi,
        p2,
        p1,
    }
}

fn optional_space<const D: usize>(
    mesh: &Mesh<D>,
    tag: Subdomain,
    components: usize,
    degree: usize,
    markers: &[Marker],
) -> Result<Option<FunctionSpace<D>>> {
    if !mesh.has_subdomain(tag) {
        return Ok(None);
    }
    let present: Vec<Marker> = markers.iter().copied().filter(|&m| mesh.has_marker(m)).collect();
    build_space(mesh, tag, components, degree, &present).map(Some)
}

impl<const D: usize> Discretization<D> {
    pub fn new(mesh: Mesh<D>, options: DiscretizationOptions) -> Result<Self> {
        for m in &options.fluid_dirichlet {
            if !matches!(m, Marker::GammaF0 | Marker::GammaOut) {
                return Err(FpsiError::Config(format!("{m} cannot carry fluid velocity data")));
            }
        }
        let vf = optional_space(&mesh, Subdomain::Fluid, D, 2, &options.fluid_dirichlet)?;
        let pf = optional_space(&mesh, Subdomain::Fluid, 1, 1, &[])?;
        let vs = optional_space(&mesh, Subdomain::Solid, D, 2, &[Marker::GammaS0])?;
        let q = optional_space(&mesh, Subdomain::Solid, D, 2, &[])?;
        let pd = optional_space(&mesh, Subdomain::Solid, 1, 1, &[Marker::GammaS0])?;
        let ext = optional_space(
            &mesh,
            Subdomain::Fluid,
            D,
            2,
            &[Marker::GammaFs, Marker::GammaF0, Marker::GammaOut],
        )?;
        let size = |s: &Option<FunctionSpace<D>>| s.as_ref().map_or(0, |s| s.n_dofs());
        let layout = BlockLayout::new([size(&vf), size(&vs), size(&q), size(&pf), size(&pd)]);

        let cell_rule = quadrature(D, options.quadrature_degree)?;
        let facet_rule = quadrature(D - 1, options.quadrature_degree)?;
        let p2 = ReferenceElement::new(D, 2)?.tabulate(&cell_rule);
        let p1 = ReferenceElement::new(D, 1)?.tabulate(&cell_rule);

        let mut interface = Vec::new();
        for f in mesh.extract_interface() {
            let (vfs, vss) = (vf.as_ref().unwrap(), vs.as_ref().unwrap());
            let pts = mesh.facet_points(&f.vertices);
            let fluid_cell = vfs.local_cell(f.fluid_cell).unwrap();
            let solid_cell = vss.local_cell(f.solid_cell).unwrap();
            interface.push(InterfaceQuadrature {
                fluid: facet_quadrature(vfs, fluid_cell, &pts, &facet_rule),
                solid: facet_quadrature(vss, solid_cell, &pts, &facet_rule),
                fluid_cell,
                solid_cell,
                facet: f,
            });
        }

        let mut natural = Vec::new();
        let mut pore_boundary = Vec::new();
        for f in mesh.marked_facets() {
            let pts = mesh.facet_points(&f.vertices);
            let (space, list) = match f.marker {
                Marker::GammaF0 | Marker::GammaOut if !options.fluid_dirichlet.contains(&f.marker) => {
                    (vf.as_ref().unwrap(), &mut natural)
                }
                Marker::GammaS0 => (vs.as_ref().unwrap(), &mut pore_boundary),
                _ => continue,
            };
            let cell = space.local_cell(f.cells[0]).unwrap();
            list.push(BoundaryFacet {
                marker: f.marker,
                cell,
                normal: mesh.outward_normal(f),
                quad: facet_quadrature(space, cell, &pts, &facet_rule),
            });
        }

        let pressure_pin = if pf.is_some() && natural.is_empty() && interface.is_empty() {
            Some(0)
        } else {
            None
        };

        let mut disc = Discretization {
            mesh,
            options,
            vf,
            pf,
            vs,
            q,
            pd,
            ext,
            layout,
            cell_rule,
            p2,
            p1,
            interface,
            natural,
            pore_boundary,
            pressure_pin,
            pattern: CsrMatrix::from_groups(0, std::iter::empty()),
            ext_pattern: None,
        };
        disc.pattern = disc.build_pattern();
        disc.ext_pattern = disc.ext.as_ref().map(|s| {
            let groups: Vec<Vec<usize>> = (0..s.cells().len()).map(|l| s.cell_dofs(l)).collect();
            CsrMatrix::from_groups(s.n_dofs(), groups.iter().map(|g| g.as_slice()))
        });
        Ok(disc)
    }

    pub fn space(&self, b: Block) -> Option<&FunctionSpace<D>> {
        match b {
            Block::FluidVelocity => self.vf.as_ref(),
            Block::SolidVelocity => self.vs.as_ref(),
            Block::Flux => self.q.as_ref(),
            Block::FluidPressure => self.pf.as_ref(),
            Block::PorePressure => self.pd.as_ref(),
        }
    }

    /// Global DOFs of a block on a local cell of its subdomain.
    pub fn global_dofs(&self, b: Block, local_cell: usize) -> Vec<usize> {
        let off = self.layout.offset(b);
        self.space(b)
            .map(|s| s.cell_dofs(local_cell).into_iter().map(|d| d + off).collect())
            .unwrap_or_default()
    }

    pub fn fluid_cell_dofs(&self, l: usize) -> Vec<usize> {
        let mut d = self.global_dofs(Block::FluidVelocity, l);
        d.extend(self.global_dofs(Block::FluidPressure, l));
        d
    }

    pub fn solid_cell_dofs(&self, l: usize) -> Vec<usize> {
        let mut d = self.global_dofs(Block::SolidVelocity, l);
        d.extend(self.global_dofs(Block::Flux, l));
        d.extend(self.global_dofs(Block::PorePressure, l));
        d
    }

    pub fn interface_dofs(&self, f: &InterfaceQuadrature<D>) -> Vec<usize> {
        let mut d = self.global_dofs(Block::FluidVelocity, f.fluid_cell);
        d.extend(self.solid_cell_dofs(f.solid_cell));
        d
    }

    pub fn n_fluid_cells(&self) -> usize {
        self.vf.as_ref().map_or(0, |s| s.cells().len())
    }

    pub fn n_solid_cells(&self) -> usize {
        self.vs.as_ref().map_or(0, |s| s.cells().len())
    }

    fn build_pattern(&self) -> CsrMatrix {
        let mut groups: Vec<Vec<usize>> = Vec::new();
        groups.extend((0..self.n_fluid_cells()).map(|l| self.fluid_cell_dofs(l)));
        groups.extend((0..self.n_solid_cells()).map(|l| self.solid_cell_dofs(l)));
        groups.extend(self.interface.iter().map(|f| self.interface_dofs(f)));
        CsrMatrix::from_groups(self.layout.total(), groups.iter().map(|g| g.as_slice()))
    }

    /// Zero matrix with the monolithic sparsity pattern.
    pub fn empty_matrix(&self) -> CsrMatrix {
        self.pattern.clone()
    }

    pub fn empty_extension_matrix(&self) -> Option<CsrMatrix> {
        self.ext_pattern.clone()
    }

    pub fn n_quad(&self) -> usize {
        self.cell_rule.len()
    }
}

/// All discrete fields at one time level. Vectors are indexed by the DOFs of
/// their spaces: `uf` and `wf` share the fluid velocity numbering, `us` the
/// structure velocity numbering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fields {
    pub vf: Vec<f64>,
    pub vs: Vec<f64>,
    pub q: Vec<f64>,
    pub pf: Vec<f64>,
    pub pd: Vec<f64>,
    /// Structure displacement.
    pub us: Vec<f64>,
    /// Fluid-mesh displacement.
    pub uf: Vec<f64>,
    /// Fluid-mesh velocity.
    pub wf: Vec<f64>,
}

impl Fields {
    pub fn zeros<const D: usize>(disc: &Discretization<D>) -> Self {
        let l = &disc.layout;
        let nf = l.size(Block::FluidVelocity);
        let ns = l.size(Block::SolidVelocity);
        Fields {
            vf: vec![0.0; nf],
            vs: vec![0.0; ns],
            q: vec![0.0; l.size(Block::Flux)],
            pf: vec![0.0; l.size(Block::FluidPressure)],
            pd: vec![0.0; l.size(Block::PorePressure)],
            us: vec![0.0; ns],
            uf: vec![0.0; nf],
            wf: vec![0.0; nf],
        }
    }

    pub fn block(&self, b: Block) -> &[f64] {
        match b {
            Block::FluidVelocity => &self.vf,
            Block::SolidVelocity => &self.vs,
            Block::Flux => &self.q,
            Block::FluidPressure => &self.pf,
            Block::PorePressure => &self.pd,
        }
    }

    pub fn block_mut(&mut self, b: Block) -> &mut Vec<f64> {
        match b {
            Block::FluidVelocity => &mut self.vf,
            Block::SolidVelocity => &mut self.vs,
            Block::Flux => &mut self.q,
            Block::FluidPressure => &mut self.pf,
            Block::PorePressure => &mut self.pd,
        }
    }

    /// Concatenate the five unknown blocks in layout order.
    pub fn to_vector(&self) -> Vec<f64> {
        Block::ALL.iter().flat_map(|&b| self.block(b).iter().copied()).collect()
    }

    pub fn set_unknowns(&mut self, layout: &BlockLayout, x: &[f64]) {
        for b in Block::ALL {
            *self.block_mut(b) = x[layout.range(b)].to_vec();
        }
    }

    /// Largest absolute value over every stored vector.
    pub fn max_abs(&self) -> f64 {
        [&self.vf, &self.vs, &self.q, &self.pf, &self.pd, &self.us, &self.uf, &self.wf]
            .iter()
            .flat_map(|v| v.iter())
            .fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn check_sizes<const D: usize>(&self, disc: &Discretization<D>) -> Result<()> {
        let z = Fields::zeros(disc);
        let pairs = [
            ("v_f", self.vf.len(), z.vf.len()),
            ("v_s", self.vs.len(), z.vs.len()),
            ("q", self.q.len(), z.q.len()),
            ("p_f", self.pf.len(), z.pf.len()),
            ("p_d", self.pd.len(), z.pd.len()),
            ("u_s", self.us.len(), z.us.len()),
            ("u_f", self.uf.len(), z.uf.len()),
            ("w_f", self.wf.len(), z.wf.len()),
        ];
        for (name, got, want) in pairs {
            if got != want {
                return Err(FpsiError::Dimension(format!("field {name} has {got} values, expected {want}")));
            }
        }
        Ok(())
    }
}
