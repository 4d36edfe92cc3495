//! VTK snapshots and the CSV time series.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::energy::EnergyReport;
use crate::error::{FpsiError, Result};
use crate::fe::FunctionSpace;
use crate::forms::{Discretization, Fields};

/// Values of a space's coefficients at the mesh vertices, zero where the
/// space does not live.
fn vertex_values<const D: usize>(
    n_vertices: usize,
    space: Option<&FunctionSpace<D>>,
    coeffs: &[f64],
    components: usize,
) -> Vec<f64> {
    let mut out = vec![0.0; n_vertices * components];
    if let Some(s) = space {
        for v in 0..n_vertices {
            if let Some(node) = s.node_of_vertex(v) {
                for c in 0..s.components.min(components) {
                    out[v * components + c] = coeffs[s.dof(node, c)];
                }
            }
        }
    }
    out
}

/// Displacement at every vertex: the structure displacement where it exists,
/// the fluid mesh displacement elsewhere.
pub fn vertex_displacement<const D: usize>(disc: &Discretization<D>, fields: &Fields) -> Vec<f64> {
    let nv = disc.mesh.n_vertices();
    let mut u = vertex_values(nv, disc.vf.as_ref(), &fields.uf, D);
    if let Some(vs) = &disc.vs {
        for v in 0..nv {
            if let Some(node) = vs.node_of_vertex(v) {
                for c in 0..D {
                    u[v * D + c] = fields.us[vs.dof(node, c)];
                }
            }
        }
    }
    u
}

fn write_vectors<const D: usize>(s: &mut String, name: &str, values: &[f64]) {
    let _ = writeln!(s, "VECTORS {name} double");
    for chunk in values.chunks(D) {
        let z = if D == 3 { chunk[2] } else { 0.0 };
        let _ = writeln!(s, "{:e} {:e} {:e}", chunk[0], chunk[1], z);
    }
}

fn write_scalars(s: &mut String, name: &str, values: &[f64]) {
    let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
    for v in values {
        let _ = writeln!(s, "{v:e}");
    }
}

/// Legacy ASCII unstructured grid at the deformed vertex positions `x + u`.
pub fn vtk_string<const D: usize>(disc: &Discretization<D>, fields: &Fields, title: &str) -> String {
    let mesh = &disc.mesh;
    let nv = mesh.n_vertices();
    let nc = mesh.n_cells();
    let u = vertex_displacement(disc, fields);
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0\n{}\nASCII\nDATASET UNSTRUCTURED_GRID", title.replace('\n', " "));
    let _ = writeln!(s, "POINTS {nv} double");
    for (v, x) in mesh.vertices().iter().enumerate() {
        let p: Vec<f64> = (0..3).map(|c| if c < D { x[c] + u[v * D + c] } else { 0.0 }).collect();
        let _ = writeln!(s, "{:e} {:e} {:e}", p[0], p[1], p[2]);
    }
    let _ = writeln!(s, "CELLS {nc} {}", nc * (D + 2));
    for c in 0..nc {
        let ids: Vec<String> = mesh.cell(c).iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "{} {}", D + 1, ids.join(" "));
    }
    let cell_type = if D == 2 { 5 } else { 10 };
    let _ = writeln!(s, "CELL_TYPES {nc}");
    for _ in 0..nc {
        let _ = writeln!(s, "{cell_type}");
    }
    let _ = writeln!(s, "CELL_DATA {nc}\nSCALARS subdomain int 1\nLOOKUP_TABLE default");
    for c in 0..nc {
        let _ = writeln!(s, "{}", mesh.cell_tag(c).id());
    }
    let _ = writeln!(s, "POINT_DATA {nv}");
    write_vectors::<D>(&mut s, "v_f", &vertex_values(nv, disc.vf.as_ref(), &fields.vf, D));
    write_vectors::<D>(&mut s, "v_s", &vertex_values(nv, disc.vs.as_ref(), &fields.vs, D));
    write_vectors::<D>(&mut s, "q", &vertex_values(nv, disc.q.as_ref(), &fields.q, D));
    write_scalars(&mut s, "p_f", &vertex_values(nv, disc.pf.as_ref(), &fields.pf, 1));
    write_scalars(&mut s, "p_d", &vertex_values(nv, disc.pd.as_ref(), &fields.pd, 1));
    write_vectors::<D>(&mut s, "u", &u);
    s
}

pub fn write_vtk<const D: usize>(disc: &Discretization<D>, fields: &Fields, path: &Path) -> Result<()> {
    let title = format!("fpsi {}", path.file_name().and_then(|n| n.to_str()).unwrap_or("snapshot"));
    std::fs::write(path, vtk_string(disc, fields, &title)).map_err(|e| FpsiError::io(path, e))
}

pub fn snapshot_name(step: usize) -> String {
    format!("step_{step:06}.vtk")
}

/// Probe displacement and energies at one time level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesRow {
    pub time: f64,
    /// Axial and wall-normal displacement at the probe; NaN without a probe.
    pub probe: [f64; 2],
    pub energy: EnergyReport,
}

impl SeriesRow {
    pub fn header() -> String {
        let mut cols = vec!["t", "ux_probe", "ur_probe"];
        cols.extend(EnergyReport::COLUMNS);
        cols.join(",")
    }

    pub fn to_csv(&self) -> String {
        let mut vals = vec![self.time, self.probe[0], self.probe[1]];
        vals.extend(self.energy.values());
        vals.iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(",")
    }
}

/// `timeseries.csv`, flushed after every row.
pub struct SeriesWriter {
    path: PathBuf,
    out: BufWriter<File>,
}

impl SeriesWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let file = File::create(path).map_err(|e| FpsiError::io(path, e))?;
        let mut w = SeriesWriter {
            path: path.to_path_buf(),
            out: BufWriter::new(file),
        };
        w.line(&SeriesRow::header())?;
        Ok(w)
    }

    fn line(&mut self, text: &str) -> Result<()> {
        writeln!(self.out, "{text}")
            .and_then(|_| self.out.flush())
            .map_err(|e| FpsiError::io(&self.path, e))
    }

    pub fn append(&mut self, row: &SeriesRow) -> Result<()> {
        self.line(&row.to_csv())
    }
}

/// Parse a series written by [`SeriesWriter`].
pub fn read_series(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path).map_err(|e| FpsiError::io(path, e))?;
    let mut lines = text.lines();
    if lines.next() != Some(SeriesRow::header().as_str()) {
        return Err(FpsiError::Config(format!("{}: unexpected header", path.display())));
    }
    lines
        .map(|l| {
            l.split(',')
                .map(|v| {
                    v.parse::<f64>()
                        .map_err(|e| FpsiError::Config(format!("{}: bad value '{v}': {e}", path.display())))
                })
                .collect()
        })
        .collect()
}
