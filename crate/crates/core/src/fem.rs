//! Piecewise-linear finite elements for the weak form of L_Phi = div(Phi grad):
//! stiffness integral <Phi grad f, grad g> and P1 mass matrix, assembled on a
//! TriMesh for a per-vertex symmetric positive field Phi.

use nalgebra::{Matrix2, Vector2};

use crate::curvature::CurvatureField;
use crate::error::{Error, Result};
use crate::mesh::{triangle_area, TriMesh};
use crate::sparse::CsrMatrix;
use crate::spaceform::Coords;

/// Orthonormal tangent frame at a vertex (model metric).
#[derive(Clone, Debug)]
pub struct VertexFrame {
    pub e1: Coords,
    pub e2: Coords,
    pub normal: Coords,
}

/// Per-vertex symmetric 2x2 field in the vertex frame.
#[derive(Clone, Debug)]
pub struct PhiField {
    pub frames: Vec<VertexFrame>,
    /// (a11, a12, a22) in the (e1, e2) basis.
    pub mats: Vec<[f64; 3]>,
}

impl PhiField {
    /// Identity section Phi = Id (the Laplace-Beltrami operator), with frames
    /// synthesized from mesh vertex normals.
    pub fn identity(mesh: &TriMesh) -> Result<Self> {
        let frames = mesh_frames(mesh);
        let mats = vec![[1.0, 0.0, 1.0]; mesh.vertex_count()];
        Ok(PhiField { frames, mats })
    }

    /// The Newton tensor P_r in the principal frame of the curvature field.
    pub fn newton(mesh: &TriMesh, cf: &CurvatureField, r: usize) -> Result<Self> {
        if cf.vertex_count() != mesh.vertex_count() {
            return Err(Error::domain("curvature field does not cover the mesh"));
        }
        let mut frames = Vec::with_capacity(mesh.vertex_count());
        let mut mats = Vec::with_capacity(mesh.vertex_count());
        for v in 0..mesh.vertex_count() {
            let mu = cf.newton_eigenvalues(v, r)?;
            frames.push(VertexFrame {
                e1: cf.dirs[v][0],
                e2: cf.dirs[v][1],
                normal: cf.normals[v],
            });
            mats.push([mu[0], 0.0, mu[1]]);
        }
        Ok(PhiField { frames, mats })
    }

    /// Arbitrary per-vertex symmetric matrices in the given frames.
    pub fn custom(frames: Vec<VertexFrame>, mats: Vec<[f64; 3]>) -> Result<Self> {
        if frames.len() != mats.len() {
            return Err(Error::domain("frame and matrix counts differ"));
        }
        for m in &mats {
            if !m.iter().all(|x| x.is_finite()) {
                return Err(Error::domain("Phi entries must be finite"));
            }
        }
        Ok(PhiField { frames, mats })
    }

    /// Constant matrix in the synthesized mesh frames.
    pub fn constant(mesh: &TriMesh, mat: [f64; 3]) -> Result<Self> {
        let frames = mesh_frames(mesh);
        let mats = vec![mat; mesh.vertex_count()];
        PhiField::custom(frames, mats)
    }

    pub fn vertex_count(&self) -> usize {
        self.mats.len()
    }

    /// Ascending eigenvalues of Phi at a vertex.
    pub fn eigen_at(&self, v: usize) -> [f64; 2] {
        let [a, b, c] = self.mats[v];
        let mean = 0.5 * (a + c);
        let disc = (0.25 * (a - c) * (a - c) + b * b).sqrt();
        [mean - disc, mean + disc]
    }

    /// Global eigenvalue extrema (mu, nu) over all vertices.
    pub fn eigen_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in 0..self.vertex_count() {
            let e = self.eigen_at(v);
            lo = lo.min(e[0]);
            hi = hi.max(e[1]);
        }
        (lo, hi)
    }

    /// Smallest eigenvalue over the mesh; positive means elliptic.
    pub fn ellipticity_margin(&self) -> f64 {
        self.eigen_range().0
    }
}

/// Tangent frames from area-weighted vertex normals plus a deterministic
/// in-plane basis.
pub fn mesh_frames(mesh: &TriMesh) -> Vec<VertexFrame> {
    let sf = &mesh.space_form;
    let normals = mesh.vertex_normals();
    let mut frames = Vec::with_capacity(normals.len());
    for (v, n) in normals.iter().enumerate() {
        let p = &mesh.vertices[v].coords;
        let basis = sf.tangent_basis(p);
        let pick = basis
            .iter()
            .min_by(|a, b| {
                sf.dot(a, n)
                    .abs()
                    .partial_cmp(&sf.dot(b, n).abs())
                    .unwrap()
            })
            .unwrap();
        let mut e1 = pick - n * sf.dot(pick, n);
        e1 /= sf.dot(&e1, &e1).sqrt();
        let e2 = sf.tangent_cross(p, n, &e1);
        frames.push(VertexFrame {
            e1,
            e2,
            normal: *n,
        });
    }
    frames
}

/// Flattened face geometry plus the per-corner rotation taking vertex-frame
/// components into the chart.
pub struct FaceChart {
    pub corners: [[f64; 2]; 3],
    pub area: f64,
    /// Constant P1 hat-function gradients in the chart.
    pub grads: [Vector2<f64>; 3],
    /// Vertex-frame -> chart rotations (orthogonal 2x2).
    pub rot: [Matrix2<f64>; 3],
}

impl FaceChart {
    pub fn build(mesh: &TriMesh, frames: &[VertexFrame], f: usize) -> Result<Self> {
        let sf = &mesh.space_form;
        let tri = mesh.faces[f];
        let corners = mesh.flatten_face(f)?;
        let area = triangle_area(&corners);
        let grads = hat_gradients(&corners, area);
        let mut rot = [Matrix2::zeros(); 3];
        for c in 0..3 {
            let v = tri[c];
            let a = tri[(c + 1) % 3];
            let b = tri[(c + 2) % 3];
            let p = &mesh.vertices[v].coords;
            // Ambient edge directions and their chart images.
            let u = sf.log(p, &mesh.vertices[a].coords);
            let w = sf.log(p, &mesh.vertices[b].coords);
            let pu = chart_dir(&corners, c, (c + 1) % 3);
            let pw = chart_dir(&corners, c, (c + 2) % 3);
            // Orthonormal pairs (model metric in the tangent space).
            let nu = sf.dot(&u, &u).sqrt();
            if nu < 1e-300 {
                return Err(Error::DegenerateFace { face: f, area });
            }
            let e1 = u / nu;
            let mut e2 = w - e1 * sf.dot(&w, &e1);
            let ne2 = sf.dot(&e2, &e2).sqrt();
            if ne2 < 1e-300 {
                return Err(Error::DegenerateFace { face: f, area });
            }
            e2 /= ne2;
            let f1 = pu;
            let mut f2 = pw - f1 * pw.dot(&f1);
            let nf2 = f2.norm();
            if nf2 < 1e-300 {
                return Err(Error::DegenerateFace { face: f, area });
            }
            f2 /= nf2;
            // Columns: chart images of the vertex frame vectors, then the
            // nearest orthogonal matrix.
            let fr = &frames[v];
            let col = |t: &Coords| {
                let alpha = sf.dot(t, &e1);
                let beta = sf.dot(t, &e2);
                f1 * alpha + f2 * beta
            };
            let m = Matrix2::from_columns(&[col(&fr.e1), col(&fr.e2)]);
            rot[c] = nearest_orthogonal(&m);
        }
        Ok(FaceChart {
            corners,
            area,
            grads,
            rot,
        })
    }

    /// Average of the three vertex matrices expressed in the chart,
    /// symmetrized.
    pub fn average_phi(&self, tri: &[usize; 3], phi: &PhiField) -> Matrix2<f64> {
        let mut acc = Matrix2::zeros();
        for c in 0..3 {
            let [a, b, d] = phi.mats[tri[c]];
            let m = Matrix2::new(a, b, b, d);
            let r = self.rot[c];
            acc += r * m * r.transpose();
        }
        acc /= 3.0;
        0.5 * (acc + acc.transpose())
    }

    /// Average of per-vertex tangent vectors (components in vertex frames)
    /// expressed in the chart.
    pub fn average_vector(&self, tri: &[usize; 3], comps: &[[f64; 2]]) -> Vector2<f64> {
        let mut acc = Vector2::zeros();
        for c in 0..3 {
            let x = Vector2::new(comps[tri[c]][0], comps[tri[c]][1]);
            acc += self.rot[c] * x;
        }
        acc / 3.0
    }
}

fn chart_dir(corners: &[[f64; 2]; 3], from: usize, to: usize) -> Vector2<f64> {
    let d = Vector2::new(
        corners[to][0] - corners[from][0],
        corners[to][1] - corners[from][1],
    );
    d / d.norm()
}

fn hat_gradients(p: &[[f64; 2]; 3], area: f64) -> [Vector2<f64>; 3] {
    // grad lambda_i = perp(p_{i+2} - p_{i+1}) / (2 area), counterclockwise corners.
    let mut g = [Vector2::zeros(); 3];
    for i in 0..3 {
        let a = p[(i + 1) % 3];
        let b = p[(i + 2) % 3];
        g[i] = Vector2::new(-(b[1] - a[1]), b[0] - a[0]) / (2.0 * area);
    }
    g
}

/// Nearest orthogonal matrix (2x2 polar factor via SVD).
fn nearest_orthogonal(m: &Matrix2<f64>) -> Matrix2<f64> {
    let svd = m.svd(true, true);
    let u = svd.u.unwrap();
    let vt = svd.v_t.unwrap();
    u * vt
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MassScheme {
    Consistent,
    Lumped,
}

/// Map between the full vertex numbering and the boundary-reduced system.
#[derive(Clone, Debug)]
pub struct DirichletMap {
    pub interior_to_full: Vec<usize>,
    pub full_dim: usize,
}

impl DirichletMap {
    /// Reinserts a reduced vector into full vertex numbering, zero on the
    /// boundary.
    pub fn reinsert(&self, reduced: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.full_dim];
        for (r, &v) in self.interior_to_full.iter().enumerate() {
            full[v] = reduced[r];
        }
        full
    }
}

/// Stiffness and mass pair for the weak eigenvalue problem K u = lambda M u.
#[derive(Clone, Debug)]
pub struct OperatorPair {
    pub stiffness: CsrMatrix,
    pub mass: CsrMatrix,
    /// One third of the incident-triangle areas per (current) row.
    pub lumped_mass: Vec<f64>,
    pub dirichlet: Option<DirichletMap>,
    /// Whether the source mesh was closed (no boundary).
    pub from_closed_mesh: bool,
}

impl OperatorPair {
    pub fn dim(&self) -> usize {
        self.stiffness.n
    }
}

/// Assembles the stiffness and mass matrices. Element stiffness uses the
/// vertex-averaged Phi in the face chart; the mass matrix is the consistent
/// P1 matrix unless `Lumped` is requested.
pub fn assemble(mesh: &TriMesh, phi: &PhiField, scheme: MassScheme) -> Result<OperatorPair> {
    if phi.vertex_count() != mesh.vertex_count() {
        return Err(Error::domain("Phi field does not cover the mesh"));
    }
    let n = mesh.vertex_count();
    let mut kt = Vec::with_capacity(9 * mesh.face_count());
    let mut mt = Vec::with_capacity(9 * mesh.face_count());
    let mut lumped = vec![0.0; n];
    for (f, tri) in mesh.faces.iter().enumerate() {
        let chart = FaceChart::build(mesh, &phi.frames, f)?;
        let phi_tri = chart.average_phi(tri, phi);
        for a in 0..3 {
            for b in 0..3 {
                let k = chart.area * (phi_tri * chart.grads[b]).dot(&chart.grads[a]);
                kt.push((tri[a], tri[b], k));
                let m = match scheme {
                    MassScheme::Consistent => {
                        chart.area / 12.0 * if a == b { 2.0 } else { 1.0 }
                    }
                    MassScheme::Lumped => {
                        if a == b {
                            chart.area / 3.0
                        } else {
                            0.0
                        }
                    }
                };
                if m != 0.0 {
                    mt.push((tri[a], tri[b], m));
                }
            }
            lumped[tri[a]] += chart.area / 3.0;
        }
    }
    Ok(OperatorPair {
        stiffness: CsrMatrix::from_triplets(n, kt),
        mass: CsrMatrix::from_triplets(n, mt),
        lumped_mass: lumped,
        dirichlet: None,
        from_closed_mesh: mesh.is_closed(),
    })
}

/// Removes boundary rows/columns from both matrices, keeping the index map
/// for eigenfunction reinsertion.
pub fn apply_dirichlet(op: &OperatorPair, mesh: &TriMesh) -> Result<OperatorPair> {
    if op.dirichlet.is_some() {
        return Err(Error::domain("operator pair is already boundary-reduced"));
    }
    if op.dim() != mesh.vertex_count() {
        return Err(Error::domain("operator pair does not match the mesh"));
    }
    if mesh.is_closed() {
        return Err(Error::NoBoundary);
    }
    let interior: Vec<usize> = (0..mesh.vertex_count())
        .filter(|&v| !mesh.boundary_vertex[v])
        .collect();
    if interior.is_empty() {
        return Err(Error::NoInterior);
    }
    let lumped = interior.iter().map(|&v| op.lumped_mass[v]).collect();
    Ok(OperatorPair {
        stiffness: op.stiffness.restrict(&interior),
        mass: op.mass.restrict(&interior),
        lumped_mass: lumped,
        dirichlet: Some(DirichletMap {
            interior_to_full: interior,
            full_dim: mesh.vertex_count(),
        }),
        from_closed_mesh: false,
    })
}
