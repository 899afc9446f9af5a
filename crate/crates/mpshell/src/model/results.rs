//! Result records, streaming CSV curves and legacy ASCII VTK snapshots.

use crate::magnetics::MU_0;
use crate::mesh::Mesh;
use crate::solver::{ShellModel, SystemState};
use std::collections::BTreeMap;
use std::io::{self, Write};
use std::path::Path;

/// One load level of a probe history. Displacements in mm, flux in mT; the
/// nondimensional load is recomputed from SI quantities.
#[derive(Debug, Clone)]
pub struct ResultRecord {
    pub step: usize,
    pub load_factor: f64,
    pub b_ext_mt: f64,
    pub nondim_load: f64,
    pub probes: Vec<(String, [f64; 3])>,
}

/// Nondimensional load `1e3 |B_ext| |B_rem| / (mu mu_0)` with `|B_rem|` the
/// largest block remnant magnitude of the model.
pub fn nondimensional_load(model: &ShellModel, load_factor: f64) -> f64 {
    let b_ext = model.program.external_max * load_factor;
    let b_rem = model
        .program
        .block_remnant
        .iter()
        .map(|b| b.norm())
        .fold(0.0_f64, f64::max);
    1e3 * b_ext.abs() * b_rem / (model.material.mu * MU_0)
}

pub fn record_for(
    model: &ShellModel,
    state: &SystemState,
    probes: &BTreeMap<String, usize>,
    step: usize,
) -> ResultRecord {
    let b_ext_mt = model.program.external_max * state.load_factor * 1e3;
    let probes = probes
        .iter()
        .map(|(name, &node)| {
            let u = state.u[node] * 1e3;
            (name.clone(), [u.x, u.y, u.z])
        })
        .collect();
    ResultRecord {
        step,
        load_factor: state.load_factor,
        b_ext_mt,
        nondim_load: nondimensional_load(model, state.load_factor),
        probes,
    }
}

/// Streaming curve writer: one CSV row per probe per accepted load step,
/// flushed after every step so aborted runs keep their partial curves.
pub struct CurveWriter<W: Write> {
    sink: W,
}

impl<W: Write> CurveWriter<W> {
    pub fn new(mut sink: W) -> io::Result<Self> {
        writeln!(sink, "step,b_ext_mT,nondim_load,probe,u1_mm,u2_mm,u3_mm")?;
        Ok(Self { sink })
    }

    pub fn write_record(&mut self, rec: &ResultRecord) -> io::Result<()> {
        for (name, u) in &rec.probes {
            writeln!(
                self.sink,
                "{},{:.9e},{:.9e},{},{:.9e},{:.9e},{:.9e}",
                rec.step, rec.b_ext_mt, rec.nondim_load, name, u[0], u[1], u[2]
            )?;
        }
        self.sink.flush()
    }
}

/// Legacy ASCII VTK unstructured grid with the reference geometry (mm) and
/// point data: displacement (mm) and micro-rotation pseudo-vector (rad).
pub fn write_vtk(path: &Path, mesh: &Mesh, state: &SystemState, title: &str) -> io::Result<()> {
    let mut f = io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "# vtk DataFile Version 3.0")?;
    writeln!(f, "{title}")?;
    writeln!(f, "ASCII")?;
    writeln!(f, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(f, "POINTS {} double", mesh.node_count())?;
    for p in &mesh.nodes {
        writeln!(f, "{:.9e} {:.9e} {:.9e}", p.x * 1e3, p.y * 1e3, p.z * 1e3)?;
    }
    writeln!(f, "CELLS {} {}", mesh.element_count(), mesh.element_count() * 9)?;
    for e in &mesh.elements {
        write!(f, "8")?;
        for &n in &e.nodes {
            write!(f, " {n}")?;
        }
        writeln!(f)?;
    }
    writeln!(f, "CELL_TYPES {}", mesh.element_count())?;
    for _ in 0..mesh.element_count() {
        // 23 = quadratic (8-node serendipity) quadrilateral
        writeln!(f, "23")?;
    }
    writeln!(f, "POINT_DATA {}", mesh.node_count())?;
    writeln!(f, "VECTORS displacement_mm double")?;
    for u in &state.u {
        writeln!(f, "{:.9e} {:.9e} {:.9e}", u.x * 1e3, u.y * 1e3, u.z * 1e3)?;
    }
    writeln!(f, "VECTORS micro_rotation_rad double")?;
    for t in &state.theta {
        writeln!(f, "{:.9e} {:.9e} {:.9e}", t.x, t.y, t.z)?;
    }
    f.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::MeshBuilder;
    use crate::tensor::Vec3;

    #[test]
    fn csv_rows_have_unit_tagged_header() {
        let rec = ResultRecord {
            step: 3,
            load_factor: 0.5,
            b_ext_mt: 25.0,
            nondim_load: 9.4,
            probes: vec![("tip".into(), [1.0, 2.0, 3.0])],
        };
        let mut buf = Vec::new();
        {
            let mut w = CurveWriter::new(&mut buf).unwrap();
            w.write_record(&rec).unwrap();
        }
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "step,b_ext_mT,nondim_load,probe,u1_mm,u2_mm,u3_mm"
        );
        assert!(lines.next().unwrap().starts_with("3,"));
    }

    #[test]
    fn vtk_snapshot_is_well_formed() {
        let mut b = MeshBuilder::new(1e-9);
        b.add_structured_patch(2, 1, |s, t| Vec3::new(s, t, 0.0), |_, _| 0);
        let mesh = b.build();
        let state = SystemState::zero(&mesh);
        let dir = std::env::temp_dir().join("mpshell_vtk_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("snap.vtk");
        write_vtk(&path, &mesh, &state, "t").unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# vtk DataFile Version 3.0"));
        assert!(text.contains("DATASET UNSTRUCTURED_GRID"));
        assert!(text.contains(&format!("POINTS {} double", mesh.node_count())));
        assert!(text.contains(&format!("CELLS {} {}", 2, 18)));
        // every cell line lists 8 nodes within range
        let cells: Vec<&str> = text
            .lines()
            .skip_while(|l| !l.starts_with("CELLS"))
            .skip(1)
            .take(2)
            .collect();
        for c in cells {
            let ids: Vec<usize> = c
                .split_whitespace()
                .map(|t| t.parse().unwrap())
                .collect();
            assert_eq!(ids[0], 8);
            assert_eq!(ids.len(), 9);
            assert!(ids[1..].iter().all(|&i| i < mesh.node_count()));
        }
        assert!(text.contains("VECTORS displacement_mm double"));
        assert!(text.contains("VECTORS micro_rotation_rad double"));
    }
}
