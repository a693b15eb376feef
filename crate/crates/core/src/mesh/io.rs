//! Mesh and sample file formats.

use std::fmt::Write as _;
use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use ply_rs::parser::Parser;
use ply_rs::ply::{DefaultElement, Property};

use super::{MeshSample, TriMesh};
use crate::error::{Error, Result};

/// Reads an OBJ or PLY triangle mesh (chosen by extension) and validates it.
pub fn load_mesh(path: impl AsRef<Path>) -> Result<TriMesh> {
    let path = path.as_ref();
    let (v, f) = read_mesh_arrays(path)?;
    TriMesh::new(v, f)
}

/// Raw vertex and face arrays without topological validation.
pub fn read_mesh_arrays(path: &Path) -> Result<(Vec<[f64; 3]>, Vec<[usize; 3]>)> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .unwrap_or_default();
    match ext.as_str() {
        "obj" => read_obj(path),
        "ply" => read_ply(path),
        other => Err(Error::Parse(format!("unsupported mesh extension `{other}`"))),
    }
}

/// Reads `v` and `f` records only; vertex order is kept as in the file so
/// that companion layouts can share indices.
fn read_obj(path: &Path) -> Result<(Vec<[f64; 3]>, Vec<[usize; 3]>)> {
    let text = std::fs::read_to_string(path)?;
    parse_obj(&text)
}

pub fn parse_obj(text: &str) -> Result<(Vec<[f64; 3]>, Vec<[usize; 3]>)> {
    let mut verts = Vec::new();
    let mut faces = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let bad = |what: &str| Error::Parse(format!("obj line {}: {what}", ln + 1));
        let mut it = line.split_whitespace();
        match it.next() {
            Some("v") => {
                let c: Vec<f64> = it.take(3).map(|t| t.parse().map_err(|_| bad("bad coordinate"))).collect::<Result<_>>()?;
                if c.len() != 3 {
                    return Err(bad("vertex needs three coordinates"));
                }
                verts.push([c[0], c[1], c[2]]);
            }
            Some("f") => {
                let idx: Vec<usize> = it
                    .map(|t| {
                        let i: i64 = t.split('/').next().unwrap_or("").parse().map_err(|_| bad("bad index"))?;
                        let i = if i < 0 { verts.len() as i64 + i } else { i - 1 };
                        usize::try_from(i).map_err(|_| bad("index out of range"))
                    })
                    .collect::<Result<_>>()?;
                if idx.len() != 3 {
                    return Err(Error::Mesh(format!("non-triangular face on line {}", ln + 1)));
                }
                faces.push([idx[0], idx[1], idx[2]]);
            }
            _ => {}
        }
    }
    Ok((verts, faces))
}

fn scalar(p: &Property) -> Option<f64> {
    Some(match *p {
        Property::Char(v) => v as f64,
        Property::UChar(v) => v as f64,
        Property::Short(v) => v as f64,
        Property::UShort(v) => v as f64,
        Property::Int(v) => v as f64,
        Property::UInt(v) => v as f64,
        Property::Float(v) => v as f64,
        Property::Double(v) => v,
        _ => return None,
    })
}

fn index_list(p: &Property) -> Option<Vec<i64>> {
    Some(match p {
        Property::ListChar(v) => v.iter().map(|&x| x as i64).collect(),
        Property::ListUChar(v) => v.iter().map(|&x| x as i64).collect(),
        Property::ListShort(v) => v.iter().map(|&x| x as i64).collect(),
        Property::ListUShort(v) => v.iter().map(|&x| x as i64).collect(),
        Property::ListInt(v) => v.iter().map(|&x| x as i64).collect(),
        Property::ListUInt(v) => v.iter().map(|&x| x as i64).collect(),
        _ => return None,
    })
}

fn read_ply(path: &Path) -> Result<(Vec<[f64; 3]>, Vec<[usize; 3]>)> {
    let mut f = BufReader::new(File::open(path)?);
    let ply = Parser::<DefaultElement>::new()
        .read_ply(&mut f)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let verts = ply
        .payload
        .get("vertex")
        .ok_or_else(|| Error::Parse("PLY file has no vertex element".into()))?
        .iter()
        .map(|e| {
            let c = |k: &str| e.get(k).and_then(scalar).ok_or_else(|| Error::Parse(format!("vertex lacks `{k}`")));
            Ok([c("x")?, c("y")?, c("z")?])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut faces = Vec::new();
    for e in ply.payload.get("face").map(Vec::as_slice).unwrap_or(&[]) {
        let idx = e
            .get("vertex_indices")
            .or_else(|| e.get("vertex_index"))
            .and_then(index_list)
            .ok_or_else(|| Error::Parse("face lacks a vertex index list".into()))?;
        if idx.len() != 3 {
            return Err(Error::Mesh("non-triangular face".into()));
        }
        if idx.iter().any(|&i| i < 0) {
            return Err(Error::Mesh("negative vertex index".into()));
        }
        faces.push([idx[0] as usize, idx[1] as usize, idx[2] as usize]);
    }
    Ok((verts, faces))
}

/// Wavefront OBJ text of a mesh.
pub fn obj_string(vertices: &[[f64; 3]], faces: &[[usize; 3]]) -> String {
    let mut s = String::new();
    for v in vertices {
        let _ = writeln!(s, "v {:.17e} {:.17e} {:.17e}", v[0], v[1], v[2]);
    }
    for f in faces {
        let _ = writeln!(s, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    s
}

pub fn write_obj(path: impl AsRef<Path>, mesh: &TriMesh) -> Result<()> {
    std::fs::write(path, obj_string(mesh.vertices(), mesh.faces()))?;
    Ok(())
}

/// ASCII PLY point cloud.
pub fn ply_points_string(points: &[[f64; 3]]) -> String {
    let mut s = format!(
        "ply\nformat ascii 1.0\nelement vertex {}\nproperty double x\nproperty double y\nproperty double z\nend_header\n",
        points.len()
    );
    for p in points {
        let _ = writeln!(s, "{:.17e} {:.17e} {:.17e}", p[0], p[1], p[2]);
    }
    s
}

/// `faceId,b0,b1,b2,x,y,z` rows.
pub fn samples_csv(samples: &[MeshSample]) -> String {
    let mut s = String::from("faceId,b0,b1,b2,x,y,z\n");
    for m in samples {
        let _ = writeln!(
            s,
            "{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
            m.face, m.bary[0], m.bary[1], m.bary[2], m.position[0], m.position[1], m.position[2]
        );
    }
    s
}

/// Parses [`samples_csv`] output and checks it against `mesh`.
pub fn parse_samples_csv(text: &str, mesh: &TriMesh) -> Result<Vec<MeshSample>> {
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("faceId") {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() < 4 {
            return Err(Error::Parse(format!("line {}: expected faceId,b0,b1,b2", ln + 1)));
        }
        let face: usize = cols[0].parse().map_err(|_| Error::Parse(format!("line {}: bad face id", ln + 1)))?;
        let mut bary = [0.0; 3];
        for k in 0..3 {
            bary[k] = cols[k + 1]
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: bad barycentric coordinate", ln + 1)))?;
        }
        out.push(MeshSample::new(mesh, face, bary)?);
    }
    Ok(out)
}

/// Per-vertex or per-face scalars from `id,value` rows.
pub fn parse_scalar_csv(text: &str, len: usize) -> Result<Vec<f64>> {
    let mut vals = vec![f64::NAN; len];
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split(',').map(str::trim);
        let (Some(a), Some(b)) = (it.next(), it.next()) else {
            return Err(Error::Parse(format!("line {}: expected id,value", ln + 1)));
        };
        let Ok(id) = a.parse::<usize>() else {
            if ln == 0 {
                continue; // header
            }
            return Err(Error::Parse(format!("line {}: bad id `{a}`", ln + 1)));
        };
        let v: f64 = b.parse().map_err(|_| Error::Parse(format!("line {}: bad value `{b}`", ln + 1)))?;
        if id >= len {
            return Err(Error::Parse(format!("line {}: id {id} out of range", ln + 1)));
        }
        vals[id] = v;
    }
    if let Some(i) = vals.iter().position(|v| v.is_nan()) {
        return Err(Error::Parse(format!("no value for id {i}")));
    }
    Ok(vals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate;

    #[test]
    fn obj_and_ply_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let m = generate::icosphere(1);
        let p = dir.path().join("s.obj");
        write_obj(&p, &m).unwrap();
        let back = load_mesh(&p).unwrap();
        assert_eq!(back.faces(), m.faces());
        assert_eq!(back.vertices(), m.vertices());

        let mut ply = format!(
            "ply\nformat ascii 1.0\nelement vertex {}\nproperty double x\nproperty double y\nproperty double z\nelement face {}\nproperty list uchar int vertex_indices\nend_header\n",
            m.num_vertices(),
            m.num_faces()
        );
        for v in m.vertices() {
            ply.push_str(&format!("{:.17e} {:.17e} {:.17e}\n", v[0], v[1], v[2]));
        }
        for f in m.faces() {
            ply.push_str(&format!("3 {} {} {}\n", f[0], f[1], f[2]));
        }
        let p = dir.path().join("s.ply");
        std::fs::write(&p, ply).unwrap();
        let back = load_mesh(&p).unwrap();
        assert_eq!(back.faces(), m.faces());
        assert_eq!(back.genus(), 0);
    }

    #[test]
    fn tetrahedron_obj() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.obj");
        std::fs::write(&p, "v 1 1 1\nv 1 -1 -1\nv -1 1 -1\nv -1 -1 1\nf 1 2 3\nf 1 4 2\nf 1 3 4\nf 2 4 3\n").unwrap();
        let t = load_mesh(&p).unwrap();
        assert_eq!((t.num_vertices(), t.num_faces(), t.genus()), (4, 4, 0));
        std::fs::write(&p, "v 1 1 1\nv 1 -1 -1\nv -1 1 -1\nv -1 -1 1\nf 1 2 3\nf 1 4 2\nf 1 3 4\n").unwrap();
        assert!(load_mesh(&p).is_err());
        std::fs::write(&p, "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n").unwrap();
        assert!(matches!(load_mesh(&p), Err(Error::Mesh(m)) if m.contains("non-triangular")));
    }

    #[test]
    fn scalar_csv() {
        let v = parse_scalar_csv("id,value\n1,2.5\n0,1\n", 2).unwrap();
        assert_eq!(v, vec![1.0, 2.5]);
        assert!(parse_scalar_csv("0,1\n", 2).is_err());
    }
}
