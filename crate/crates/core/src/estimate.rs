//! Discrete curvature estimation for ingested meshes: area-weighted normals
//! plus a least-squares quadric fit of the neighbor heights over the tangent
//! plane of each vertex. Accuracy is O(h) in the principal curvatures under
//! uniform refinement.
//!
//! Sign convention: heights are measured along the normal opposite the face
//! winding, so an outward-wound sphere gets positive principal curvatures.

use nalgebra::{DMatrix, DVector};

use crate::curvature::CurvatureField;
use crate::error::{Error, Result};
use crate::mesh::TriMesh;
use crate::spaceform::Coords;

pub fn estimate_curvature(mesh: &TriMesh) -> Result<CurvatureField> {
    let sf = &mesh.space_form;
    let adjacency = mesh.vertex_neighbors();
    let winding = mesh.vertex_normals();
    let n = mesh.vertex_count();
    let mut normals = Vec::with_capacity(n);
    let mut kappa = Vec::with_capacity(n);
    let mut dirs = Vec::with_capacity(n);
    for v in 0..n {
        let p = &mesh.vertices[v].coords;
        let eta = -winding[v];
        // In-plane frame.
        let basis = sf.tangent_basis(p);
        let pick = basis
            .iter()
            .min_by(|a, b| {
                sf.dot(a, &eta)
                    .abs()
                    .partial_cmp(&sf.dot(b, &eta).abs())
                    .unwrap()
            })
            .unwrap();
        let mut e1 = pick - eta * sf.dot(pick, &eta);
        e1 /= sf.dot(&e1, &e1).sqrt();
        let e2 = sf.tangent_cross(p, &eta, &e1);

        let mut fit = None;
        for depth in [2usize, 3] {
            let ring = gather_ring(&adjacency, v, depth);
            if ring.len() < 5 {
                continue;
            }
            if let Some(q) = quadric_fit(mesh, v, &ring, &e1, &e2, &eta) {
                fit = Some(q);
                break;
            }
        }
        let (q11, q12, q22) = fit.ok_or(Error::CurvatureFit { vertex: v })?;
        let (k1, k2, theta) = sym2(q11, q12, q22);
        let d1raw = e1 * theta.cos() + e2 * theta.sin();
        let d1 = d1raw / sf.dot(&d1raw, &d1raw).sqrt();
        let d2 = sf.tangent_cross(p, &eta, &d1);
        normals.push(eta);
        kappa.push([k1, k2]);
        dirs.push([d1, d2]);
    }
    CurvatureField::new(mesh, normals, kappa, dirs)
}

fn gather_ring(adjacency: &[Vec<usize>], v: usize, depth: usize) -> Vec<usize> {
    let mut seen = std::collections::HashSet::new();
    seen.insert(v);
    let mut frontier = vec![v];
    let mut out = Vec::new();
    for _ in 0..depth {
        let mut next = Vec::new();
        for &u in &frontier {
            for &w in &adjacency[u] {
                if seen.insert(w) {
                    out.push(w);
                    next.push(w);
                }
            }
        }
        frontier = next;
    }
    out
}

/// Least squares h = a x + b y + (q11 x^2 + 2 q12 x y + q22 y^2) / 2 over the
/// log-mapped neighbors; returns the quadratic part or None when the normal
/// equations are rank deficient.
fn quadric_fit(
    mesh: &TriMesh,
    v: usize,
    ring: &[usize],
    e1: &Coords,
    e2: &Coords,
    eta: &Coords,
) -> Option<(f64, f64, f64)> {
    let sf = &mesh.space_form;
    let p = &mesh.vertices[v].coords;
    let mut rows = Vec::with_capacity(ring.len());
    let mut rhs = Vec::with_capacity(ring.len());
    let mut scale = 0.0;
    for &u in ring {
        let d = sf.log(p, &mesh.vertices[u].coords);
        let x = sf.dot(&d, e1);
        let y = sf.dot(&d, e2);
        scale += x * x + y * y;
        rows.push((x, y));
        rhs.push(sf.dot(&d, eta));
    }
    let s = (scale / ring.len() as f64).sqrt();
    if s < 1e-300 {
        return None;
    }
    let mut a = DMatrix::<f64>::zeros(ring.len(), 5);
    let mut b = DVector::<f64>::zeros(ring.len());
    for (i, ((x, y), h)) in rows.iter().zip(&rhs).enumerate() {
        let (xs, ys) = (x / s, y / s);
        a[(i, 0)] = xs;
        a[(i, 1)] = ys;
        a[(i, 2)] = 0.5 * xs * xs;
        a[(i, 3)] = xs * ys;
        a[(i, 4)] = 0.5 * ys * ys;
        b[i] = h / s;
    }
    let ata = a.transpose() * &a;
    let atb = a.transpose() * b;
    let chol = ata.cholesky()?;
    let sol = chol.solve(&atb);
    // Quadratic coefficients scale back by 1/s.
    Some((sol[2] / s, sol[3] / s, sol[4] / s))
}

fn sym2(p: f64, q: f64, r: f64) -> (f64, f64, f64) {
    let mean = 0.5 * (p + r);
    let disc = (0.25 * (p - r) * (p - r) + q * q).sqrt();
    let lo = mean - disc;
    let (vx, vy) = if q.abs() > 1e-300 {
        (lo - r, q)
    } else if p <= r {
        (1.0, 0.0)
    } else {
        (0.0, 1.0)
    };
    (lo, mean + disc, vy.atan2(vx))
}
