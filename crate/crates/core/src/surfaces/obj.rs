use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::SurfaceMesh;
use crate::error::{Error, Result};
use crate::real::Real;

/// Vertices and 0-based faces read back from an OBJ file.
#[derive(Clone, Debug, PartialEq)]
pub struct ObjMesh {
    pub vertices: Vec<[f64; 3]>,
    pub faces: Vec<Vec<usize>>,
}

/// `v` lines in node order with 17 significant digits, then `f` quads over
/// the unmasked cells (1-based).
pub fn write_obj<T: Real, W: Write>(mesh: &SurfaceMesh<T>, out: &mut W) -> Result<()> {
    let g = mesh.grid();
    writeln!(out, "# isoasym mesh {} x {}", g.nx, g.ny)?;
    for x in mesh.points() {
        writeln!(out, "v {:.16e} {:.16e} {:.16e}", x[0].as_f64(), x[1].as_f64(), x[2].as_f64())?;
    }
    for f in mesh.faces() {
        writeln!(out, "f {} {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1, f[3] + 1)?;
    }
    Ok(())
}

/// `vertex_index,p,metric,cubic` with 1-based vertex indices.
pub fn write_csv<T: Real, W: Write>(mesh: &SurfaceMesh<T>, out: &mut W) -> Result<()> {
    let s = mesh.scalars.as_ref().ok_or_else(|| Error::InvalidParameter("mesh has no sampled invariants".into()))?;
    writeln!(out, "vertex_index,p,metric,cubic")?;
    for k in 0..s.p.len() {
        writeln!(out, "{},{:.16e},{:.16e},{:.16e}", k + 1, s.p[k].as_f64(), s.metric[k].as_f64(), s.cubic[k].as_f64())?;
    }
    Ok(())
}

/// Writes `path` and, when the mesh carries invariants, the sidecar CSV next
/// to it (same stem, `.csv`).
pub fn export_obj<T: Real>(mesh: &SurfaceMesh<T>, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_obj(mesh, &mut w)?;
    w.flush()?;
    if mesh.scalars.is_some() {
        let mut w = BufWriter::new(File::create(path.with_extension("csv"))?);
        write_csv(mesh, &mut w)?;
        w.flush()?;
    }
    Ok(())
}

pub fn read_obj(path: &Path) -> Result<ObjMesh> {
    let reader = BufReader::new(File::open(path)?);
    let mut mesh = ObjMesh { vertices: Vec::new(), faces: Vec::new() };
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        let bad = |what: &str| Error::Format(format!("{}:{}: {what}", path.display(), n + 1));
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("v") => {
                let xs: Vec<f64> =
                    parts.map(|t| t.parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad("bad vertex"))?;
                if xs.len() != 3 {
                    return Err(bad("vertex needs 3 coordinates"));
                }
                mesh.vertices.push([xs[0], xs[1], xs[2]]);
            }
            Some("f") => {
                let mut face = Vec::new();
                for t in parts {
                    let idx = t.split('/').next().unwrap_or("").parse::<usize>().map_err(|_| bad("bad face index"))?;
                    if idx == 0 || idx > mesh.vertices.len() {
                        return Err(bad("face index out of range"));
                    }
                    face.push(idx - 1);
                }
                if face.len() < 3 {
                    return Err(bad("face needs at least 3 vertices"));
                }
                mesh.faces.push(face);
            }
            _ => {}
        }
    }
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::make_grid;

    #[test]
    fn smallest_mesh_layout() {
        let g = make_grid(0.0, 0.0, 8, 8, 0.5).unwrap();
        let mesh = SurfaceMesh::new(&g, vec![[0.5, 0.25, 1.0]; 64], vec![false; 64]).unwrap();
        let mut buf = Vec::new();
        write_obj(&mesh, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 64);
        assert!(text.lines().any(|l| l == "f 1 2 10 9"));
        assert!(text.contains("v 5.0000000000000000e-1 2.5000000000000000e-1 1.0000000000000000e0"));
    }

    #[test]
    fn csv_requires_invariants() {
        let g = make_grid(0.0, 0.0, 8, 8, 0.5).unwrap();
        let mesh = SurfaceMesh::new(&g, vec![[0.0; 3]; 64], vec![false; 64]).unwrap();
        assert!(write_csv(&mesh, &mut Vec::new()).is_err());
    }
}
