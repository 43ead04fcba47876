//! Triangulated hypersurfaces (n = 2) embedded in a space form.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::spaceform::{AmbientPoint, Coords, SpaceForm};

/// Triangle mesh with consistent orientation and derived boundary flags.
#[derive(Clone, Debug)]
pub struct TriMesh {
    pub space_form: SpaceForm,
    pub vertices: Vec<AmbientPoint>,
    pub faces: Vec<[usize; 3]>,
    pub boundary_vertex: Vec<bool>,
    /// Refinement level the mesh was generated at, if any.
    pub level: Option<u32>,
}

impl TriMesh {
    /// Validates indices, orientation consistency (every interior edge appears
    /// exactly twice, in opposite directions) and model membership of every
    /// vertex, then derives boundary flags from edge incidence.
    pub fn new(
        space_form: SpaceForm,
        vertices: Vec<AmbientPoint>,
        faces: Vec<[usize; 3]>,
    ) -> Result<Self> {
        let nv = vertices.len();
        if nv < 3 || faces.is_empty() {
            return Err(Error::MeshTopology(
                "a mesh needs at least three vertices and one face".into(),
            ));
        }
        for p in &vertices {
            space_form.check_point(&p.coords)?;
        }
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for (f, tri) in faces.iter().enumerate() {
            let [a, b, c] = *tri;
            if a >= nv || b >= nv || c >= nv {
                return Err(Error::MeshTopology(format!(
                    "face {f} references a vertex out of range"
                )));
            }
            if a == b || b == c || a == c {
                return Err(Error::MeshTopology(format!(
                    "face {f} repeats a vertex index"
                )));
            }
            for (u, v) in [(a, b), (b, c), (c, a)] {
                let count = directed.entry((u, v)).or_insert(0);
                *count += 1;
                if *count > 1 {
                    return Err(Error::MeshTopology(format!(
                        "directed edge ({u},{v}) appears twice; orientation is inconsistent"
                    )));
                }
            }
        }
        let mut boundary_vertex = vec![false; nv];
        for (&(u, v), _) in directed.iter() {
            let opposite = directed.contains_key(&(v, u));
            if !opposite {
                boundary_vertex[u] = true;
                boundary_vertex[v] = true;
            }
        }
        Ok(TriMesh {
            space_form,
            vertices,
            faces,
            boundary_vertex,
            level: None,
        })
    }

    pub fn with_level(mut self, level: u32) -> Self {
        self.level = Some(level);
        self
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn is_closed(&self) -> bool {
        !self.boundary_vertex.iter().any(|&b| b)
    }

    pub fn interior_count(&self) -> usize {
        self.boundary_vertex.iter().filter(|&&b| !b).count()
    }

    /// Vertex-to-vertex adjacency lists (sorted, deduplicated).
    pub fn vertex_neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertex_count()];
        for tri in &self.faces {
            for (u, v) in [(tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])] {
                adj[u].push(v);
                adj[v].push(u);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        adj
    }

    /// Faces incident to each vertex.
    pub fn vertex_faces(&self) -> Vec<Vec<usize>> {
        let mut vf = vec![Vec::new(); self.vertex_count()];
        for (f, tri) in self.faces.iter().enumerate() {
            for &v in tri {
                vf[v].push(f);
            }
        }
        vf
    }

    /// Geodesic edge lengths of a face in index order (|01|, |12|, |20|).
    pub fn face_edge_lengths(&self, f: usize) -> [f64; 3] {
        let [a, b, c] = self.faces[f];
        let sf = &self.space_form;
        [
            sf.distance_unchecked(&self.vertices[a].coords, &self.vertices[b].coords),
            sf.distance_unchecked(&self.vertices[b].coords, &self.vertices[c].coords),
            sf.distance_unchecked(&self.vertices[c].coords, &self.vertices[a].coords),
        ]
    }

    /// Isometric flattening of a face from its geodesic edge lengths.
    /// Returns the three planar corners; corner 0 sits at the origin and
    /// corner 1 on the positive x axis.
    pub fn flatten_face(&self, f: usize) -> Result<[[f64; 2]; 3]> {
        let [l01, l12, l20] = self.face_edge_lengths(f);
        flatten_triangle(l01, l12, l20, f)
    }

    /// Area of a face in the flattened (geodesic edge length) metric.
    pub fn face_area(&self, f: usize) -> Result<f64> {
        let p = self.flatten_face(f)?;
        Ok(triangle_area(&p))
    }

    pub fn total_area(&self) -> Result<f64> {
        let mut sum = 0.0;
        for f in 0..self.face_count() {
            sum += self.face_area(f)?;
        }
        Ok(sum)
    }

    /// Longest geodesic edge in the mesh.
    pub fn h_max(&self) -> f64 {
        let mut h: f64 = 0.0;
        for f in 0..self.face_count() {
            for l in self.face_edge_lengths(f) {
                h = h.max(l);
            }
        }
        h
    }

    /// Area-weighted vertex normals following the face winding. The
    /// contribution of each incident face is the tangent-space cross product
    /// of its two log-mapped edges at the vertex.
    pub fn vertex_normals(&self) -> Vec<Coords> {
        let sf = &self.space_form;
        let mut normals = vec![Coords::zeros(); self.vertex_count()];
        for tri in &self.faces {
            for k in 0..3 {
                let v = tri[k];
                let a = tri[(k + 1) % 3];
                let b = tri[(k + 2) % 3];
                let p = &self.vertices[v].coords;
                let u1 = sf.log(p, &self.vertices[a].coords);
                let u2 = sf.log(p, &self.vertices[b].coords);
                normals[v] += sf.tangent_cross(p, &u1, &u2);
            }
        }
        for (v, n) in normals.iter_mut().enumerate() {
            let p = &self.vertices[v].coords;
            let t = sf.project_tangent(p, n);
            let len = sf.dot(&t, &t).sqrt();
            *n = if len > 1e-300 { t / len } else { sf.tangent_basis(p)[0] };
        }
        normals
    }

    /// Keeps the faces whose three corners are all flagged, renumbering
    /// vertices. Returns the submesh and the old index of each kept vertex.
    pub fn restrict_to(&self, keep_vertex: &[bool]) -> Result<(TriMesh, Vec<usize>)> {
        if keep_vertex.len() != self.vertex_count() {
            return Err(Error::domain("keep mask length does not match vertex count"));
        }
        let faces: Vec<[usize; 3]> = self
            .faces
            .iter()
            .copied()
            .filter(|t| t.iter().all(|&v| keep_vertex[v]))
            .collect();
        let mut old_of_new = Vec::new();
        let mut new_of_old = vec![usize::MAX; self.vertex_count()];
        let mut vertices = Vec::new();
        let mut remapped = Vec::with_capacity(faces.len());
        for tri in faces {
            let mut out = [0usize; 3];
            for (k, &v) in tri.iter().enumerate() {
                if new_of_old[v] == usize::MAX {
                    new_of_old[v] = vertices.len();
                    vertices.push(self.vertices[v]);
                    old_of_new.push(v);
                }
                out[k] = new_of_old[v];
            }
            remapped.push(out);
        }
        let mesh = TriMesh::new(self.space_form, vertices, remapped)?;
        Ok((mesh, old_of_new))
    }

    /// Uniform scaling; only meaningful in the Euclidean model.
    pub fn scaled(&self, t: f64) -> Result<TriMesh> {
        if self.space_form.curvature() != 0 {
            return Err(Error::domain("scaling is only defined for the flat model"));
        }
        if t <= 0.0 {
            return Err(Error::domain("scale factor must be positive"));
        }
        let vertices = self
            .vertices
            .iter()
            .map(|p| AmbientPoint::from_coords(p.coords * t))
            .collect();
        let mut m = TriMesh::new(self.space_form, vertices, self.faces.clone())?;
        m.level = self.level;
        Ok(m)
    }
}

/// Lays out a triangle with the given side lengths in the plane.
pub fn flatten_triangle(l01: f64, l12: f64, l20: f64, face: usize) -> Result<[[f64; 2]; 3]> {
    if l01 <= 0.0 || l12 <= 0.0 || l20 <= 0.0 {
        return Err(Error::EdgeLengths { face });
    }
    let x = (l01 * l01 + l20 * l20 - l12 * l12) / (2.0 * l01);
    let y2 = l20 * l20 - x * x;
    if y2 <= 0.0 {
        return Err(Error::EdgeLengths { face });
    }
    let corners = [[0.0, 0.0], [l01, 0.0], [x, y2.sqrt()]];
    let area = triangle_area(&corners);
    if area < 1e-14 {
        return Err(Error::DegenerateFace { face, area });
    }
    Ok(corners)
}

pub fn triangle_area(p: &[[f64; 2]; 3]) -> f64 {
    0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1])
        - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]))
        .abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn flat_square() -> TriMesh {
        let sf = SpaceForm::euclidean(3);
        let vs = vec![
            AmbientPoint::new(&sf, &[0.0, 0.0, 0.0]).unwrap(),
            AmbientPoint::new(&sf, &[1.0, 0.0, 0.0]).unwrap(),
            AmbientPoint::new(&sf, &[1.0, 1.0, 0.0]).unwrap(),
            AmbientPoint::new(&sf, &[0.0, 1.0, 0.0]).unwrap(),
        ];
        TriMesh::new(sf, vs, vec![[0, 1, 2], [0, 2, 3]]).unwrap()
    }

    #[test]
    fn boundary_flags_follow_edge_incidence() {
        let m = flat_square();
        assert!(m.boundary_vertex.iter().all(|&b| b));
        assert!(!m.is_closed());
        assert_relative_eq!(m.total_area().unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn inconsistent_orientation_is_rejected() {
        let sf = SpaceForm::euclidean(3);
        let vs = vec![
            AmbientPoint::new(&sf, &[0.0, 0.0, 0.0]).unwrap(),
            AmbientPoint::new(&sf, &[1.0, 0.0, 0.0]).unwrap(),
            AmbientPoint::new(&sf, &[1.0, 1.0, 0.0]).unwrap(),
            AmbientPoint::new(&sf, &[0.0, 1.0, 0.0]).unwrap(),
        ];
        // Second face flipped: edge (0,2) traversed in the same direction twice.
        let r = TriMesh::new(sf, vs, vec![[0, 1, 2], [0, 3, 2]]);
        assert!(matches!(r, Err(Error::MeshTopology(_))));
    }

    #[test]
    fn degenerate_triangle_is_rejected() {
        assert!(flatten_triangle(1.0, 1.0, 2.5, 0).is_err());
        assert!(flatten_triangle(1.0, 0.0, 1.0, 0).is_err());
        let p = flatten_triangle(3.0, 4.0, 5.0, 0).unwrap();
        assert_relative_eq!(triangle_area(&p), 6.0, epsilon = 1e-12);
    }

    #[test]
    fn restrict_keeps_a_submesh() {
        let m = flat_square();
        let (sub, map) = m.restrict_to(&[true, true, true, false]).unwrap();
        assert_eq!(sub.face_count(), 1);
        assert_eq!(map.len(), 3);
    }
}
