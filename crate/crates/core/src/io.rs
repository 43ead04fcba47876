//! File interchange: ASCII OFF meshes, curvature/Phi CSV sidecars and
//! per-vertex eigenfunction tables. Sparse matrices export through
//! [`crate::sparse::CsrMatrix::write_matrix_market`].

use std::io::{BufRead, Write};

use crate::curvature::CurvatureField;
use crate::error::{Error, Result};
use crate::mesh::TriMesh;
use crate::spaceform::{AmbientPoint, SpaceForm};

/// Writes ASCII OFF. Curved models store their extra embedding coordinate as
/// a fourth component on each vertex line.
pub fn write_off(mesh: &TriMesh, w: &mut impl Write) -> Result<()> {
    writeln!(w, "OFF")?;
    writeln!(w, "{} {} 0", mesh.vertex_count(), mesh.face_count())?;
    let dim = mesh.space_form.embedding_dim();
    for p in &mesh.vertices {
        let mut line = String::new();
        for k in 0..dim {
            if k > 0 {
                line.push(' ');
            }
            line.push_str(&format!("{}", p.coords[k]));
        }
        writeln!(w, "{line}")?;
    }
    for f in &mesh.faces {
        writeln!(w, "3 {} {} {}", f[0], f[1], f[2])?;
    }
    Ok(())
}

/// Reads ASCII OFF into the given space form; vertex lines must carry the
/// model's embedding dimension (3 flat, 4 curved).
pub fn read_off(r: impl BufRead, space_form: SpaceForm) -> Result<TriMesh> {
    let mut lines = Vec::new();
    for (num, line) in r.lines().enumerate() {
        let line = line?;
        let trimmed = line.split('#').next().unwrap_or("").trim().to_string();
        if !trimmed.is_empty() {
            lines.push((num + 1, trimmed));
        }
    }
    let mut it = lines.into_iter();
    let (n0, header) = it
        .next()
        .ok_or_else(|| Error::Parse("empty OFF file".into()))?;
    if header != "OFF" {
        return Err(Error::Parse(format!("line {n0}: expected OFF header")));
    }
    let (n1, counts) = it
        .next()
        .ok_or_else(|| Error::Parse("missing counts line".into()))?;
    let parts: Vec<&str> = counts.split_whitespace().collect();
    if parts.len() < 2 {
        return Err(Error::Parse(format!("line {n1}: counts line needs V F [E]")));
    }
    let nv: usize = parts[0]
        .parse()
        .map_err(|_| Error::Parse(format!("line {n1}: bad vertex count")))?;
    let nf: usize = parts[1]
        .parse()
        .map_err(|_| Error::Parse(format!("line {n1}: bad face count")))?;
    let dim = space_form.embedding_dim();
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (num, line) = it
            .next()
            .ok_or_else(|| Error::Parse("unexpected end of vertex list".into()))?;
        let xs: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Parse(format!("line {num}: bad vertex coordinate")))?;
        if xs.len() != dim {
            return Err(Error::Parse(format!(
                "line {num}: expected {dim} coordinates, found {}",
                xs.len()
            )));
        }
        vertices.push(AmbientPoint::new(&space_form, &xs)?);
    }
    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (num, line) = it
            .next()
            .ok_or_else(|| Error::Parse("unexpected end of face list".into()))?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 4 || toks[0] != "3" {
            return Err(Error::Parse(format!(
                "line {num}: only triangular faces (\"3 i j k\") are supported"
            )));
        }
        let mut idx = [0usize; 3];
        for (k, t) in toks[1..].iter().enumerate() {
            idx[k] = t
                .parse()
                .map_err(|_| Error::Parse(format!("line {num}: bad vertex index")))?;
        }
        faces.push(idx);
    }
    TriMesh::new(space_form, vertices, faces)
}

/// Curvature sidecar: vertex_id, kappa1, kappa2, S1, S2.
pub fn write_curvature_csv(cf: &CurvatureField, w: &mut impl Write) -> Result<()> {
    writeln!(w, "vertex_id,kappa1,kappa2,S1,S2")?;
    for v in 0..cf.vertex_count() {
        writeln!(
            w,
            "{},{},{},{},{}",
            v, cf.kappa[v][0], cf.kappa[v][1], cf.sym[v][1], cf.sym[v][2]
        )?;
    }
    Ok(())
}

/// Custom Phi matrices: vertex_id, p11, p12, p22 (in the vertex frame).
pub fn read_phi_csv(r: impl BufRead, expected_vertices: usize) -> Result<Vec<[f64; 3]>> {
    let mut out = vec![None; expected_vertices];
    for (num, line) in r.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || (num == 0 && t.starts_with("vertex_id")) {
            continue;
        }
        let cols: Vec<&str> = t.split(',').collect();
        if cols.len() != 4 {
            return Err(Error::Parse(format!(
                "phi csv line {}: expected vertex_id,p11,p12,p22",
                num + 1
            )));
        }
        let v: usize = cols[0]
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("phi csv line {}: bad vertex id", num + 1)))?;
        if v >= expected_vertices {
            return Err(Error::Parse(format!(
                "phi csv line {}: vertex {v} out of range",
                num + 1
            )));
        }
        let mut m = [0.0; 3];
        for (k, c) in cols[1..].iter().enumerate() {
            m[k] = c
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("phi csv line {}: bad entry", num + 1)))?;
        }
        out[v] = Some(m);
    }
    out.into_iter()
        .enumerate()
        .map(|(v, m)| m.ok_or_else(|| Error::Parse(format!("phi csv: vertex {v} missing"))))
        .collect()
}

/// Per-vertex eigenfunction table: vertex_id, mode0, mode1, ...
pub fn write_eigenfunctions_csv(modes: &[Vec<f64>], w: &mut impl Write) -> Result<()> {
    if modes.is_empty() {
        return Err(Error::domain("no eigenfunctions to export"));
    }
    let header: Vec<String> = (0..modes.len()).map(|k| format!("mode{k}")).collect();
    writeln!(w, "vertex_id,{}", header.join(","))?;
    for v in 0..modes[0].len() {
        let row: Vec<String> = modes.iter().map(|m| format!("{}", m[v])).collect();
        writeln!(w, "{v},{}", row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surfaces::{builtin_surface, SurfaceFamily};
    use proptest::prelude::*;

    #[test]
    fn off_round_trip_flat_and_curved() {
        for fam in [
            SurfaceFamily::PlaneDisk { radius: 1.0 },
            SurfaceFamily::GeodesicSphereH3 { radius: 1.0 },
        ] {
            let (mesh, _) = builtin_surface(&fam, 1).unwrap();
            let mut buf = Vec::new();
            write_off(&mesh, &mut buf).unwrap();
            let back = read_off(std::io::BufReader::new(&buf[..]), mesh.space_form).unwrap();
            assert_eq!(back.vertex_count(), mesh.vertex_count());
            assert_eq!(back.faces, mesh.faces);
            assert_eq!(back.boundary_vertex, mesh.boundary_vertex);
            for (a, b) in back.vertices.iter().zip(&mesh.vertices) {
                assert!((a.coords - b.coords).norm() == 0.0, "coordinates must round-trip");
            }
        }
    }

    #[test]
    fn malformed_off_is_reported() {
        let sf = SpaceForm::euclidean(3);
        assert!(read_off(std::io::BufReader::new(&b"NOFF\n"[..]), sf).is_err());
        let missing = b"OFF\n3 1 0\n0 0 0\n1 0 0\n";
        assert!(read_off(std::io::BufReader::new(&missing[..]), sf).is_err());
        let quad = b"OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n";
        assert!(matches!(
            read_off(std::io::BufReader::new(&quad[..]), sf),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn phi_csv_round_trip() {
        let data = "vertex_id,p11,p12,p22\n0,1.0,0.0,2.0\n1,3.0,0.5,1.0\n";
        let mats = read_phi_csv(std::io::BufReader::new(data.as_bytes()), 2).unwrap();
        assert_eq!(mats[1], [3.0, 0.5, 1.0]);
        assert!(read_phi_csv(std::io::BufReader::new(data.as_bytes()), 3).is_err());
    }

    proptest! {
        /// Writing then reading an OFF file reproduces the mesh exactly.
        #[test]
        fn off_round_trip_random_patches(seed in 0u64..50) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let level = rng.gen_range(0..2u32);
            let radius = rng.gen_range(0.5..3.0);
            let (mesh, _) = builtin_surface(&SurfaceFamily::SphereCap {
                sphere_radius: radius,
                polar_angle: rng.gen_range(0.3..2.0),
            }, level).unwrap();
            let mut buf = Vec::new();
            write_off(&mesh, &mut buf).unwrap();
            let back = read_off(std::io::BufReader::new(&buf[..]), mesh.space_form).unwrap();
            prop_assert_eq!(back.faces, mesh.faces);
            for (a, b) in back.vertices.iter().zip(&mesh.vertices) {
                prop_assert_eq!(a.coords, b.coords);
            }
        }
    }
}
