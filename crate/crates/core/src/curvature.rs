//! Principal curvatures, elementary symmetric functions and Newton tensors.
//!
//! Two tracks share the same algebra: a dimension-generic one operating on a
//! raw spectrum of principal curvatures (any n, any numeric type) and the
//! per-vertex surface track (n = 2) attached to a mesh.

use num_traits::Num;

use crate::error::{Error, Result};
use crate::mesh::TriMesh;
use crate::spaceform::{AmbientPoint, Coords, SpaceForm};

/// Elementary symmetric functions S_0..S_n of the given values, computed by
/// expanding prod (1 + k_i t) one factor at a time. Exact for exact inputs.
pub fn elementary_symmetric<T: Num + Clone>(kappas: &[T]) -> Vec<T> {
    let mut s = Vec::with_capacity(kappas.len() + 1);
    s.push(T::one());
    for k in kappas {
        s.push(T::zero());
        for j in (1..s.len()).rev() {
            let add = k.clone() * s[j - 1].clone();
            s[j] = s[j].clone() + add;
        }
    }
    s
}

/// Eigenvalues of the r-th Newton tensor in the principal frame, via the
/// scalar recursion mu_i^0 = 1, mu_i^r = S_r - k_i * mu_i^{r-1}.
pub fn newton_spectrum<T: Num + Clone>(kappas: &[T], r: usize) -> Vec<T> {
    let s = elementary_symmetric(kappas);
    let mut mu: Vec<T> = vec![T::one(); kappas.len()];
    for j in 1..=r {
        for (m, k) in mu.iter_mut().zip(kappas.iter()) {
            *m = s[j].clone() - k.clone() * m.clone();
        }
    }
    mu
}

/// A raw principal-curvature spectrum in dimension n.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureSpectrum {
    kappas: Vec<f64>,
}

impl CurvatureSpectrum {
    pub fn new(kappas: Vec<f64>) -> Result<Self> {
        if kappas.is_empty() {
            return Err(Error::domain("a curvature spectrum needs n >= 1 entries"));
        }
        Ok(CurvatureSpectrum { kappas })
    }

    pub fn n(&self) -> usize {
        self.kappas.len()
    }

    pub fn kappas(&self) -> &[f64] {
        &self.kappas
    }

    /// S_0..S_n.
    pub fn symmetric_functions(&self) -> Vec<f64> {
        elementary_symmetric(&self.kappas)
    }

    /// Newton-tensor eigenvalues mu_i^r, i = 1..n, for 0 <= r <= n-1.
    pub fn newton_eigenvalues(&self, r: usize) -> Result<Vec<f64>> {
        if r >= self.n() {
            return Err(Error::domain(format!(
                "newton tensor order r={r} out of range for n={}",
                self.n()
            )));
        }
        Ok(newton_spectrum(&self.kappas, r))
    }
}

/// Per-vertex curvature data of a surface (n = 2): unit normal, principal
/// curvatures k1 <= k2 with orthonormal principal directions, and the derived
/// symmetric functions S_0, S_1, S_2.
#[derive(Clone, Debug)]
pub struct CurvatureField {
    pub normals: Vec<Coords>,
    /// (k1, k2) with k1 <= k2.
    pub kappa: Vec<[f64; 2]>,
    /// Principal directions matching `kappa`.
    pub dirs: Vec<[Coords; 2]>,
    /// (S_0, S_1, S_2) = (1, k1 + k2, k1 * k2).
    pub sym: Vec<[f64; 3]>,
}

const NORMAL_TOL: f64 = 1e-10;
const FRAME_TOL: f64 = 1e-8;

impl CurvatureField {
    /// Builds the field and checks the frame invariants against the mesh's
    /// space form metric.
    pub fn new(
        mesh: &TriMesh,
        normals: Vec<Coords>,
        kappa: Vec<[f64; 2]>,
        dirs: Vec<[Coords; 2]>,
    ) -> Result<Self> {
        let nv = mesh.vertex_count();
        if normals.len() != nv || kappa.len() != nv || dirs.len() != nv {
            return Err(Error::domain(
                "curvature field arrays must match the vertex count",
            ));
        }
        let sf = &mesh.space_form;
        for v in 0..nv {
            let n = &normals[v];
            let [e1, e2] = &dirs[v];
            if (sf.dot(n, n).sqrt() - 1.0).abs() > NORMAL_TOL {
                return Err(Error::domain(format!("normal at vertex {v} is not unit")));
            }
            for (a, b) in [(e1, e2), (e1, n), (e2, n)] {
                if sf.dot(a, b).abs() > FRAME_TOL {
                    return Err(Error::domain(format!(
                        "frame at vertex {v} is not orthogonal"
                    )));
                }
            }
            for e in [e1, e2] {
                if (sf.dot(e, e).sqrt() - 1.0).abs() > FRAME_TOL {
                    return Err(Error::domain(format!(
                        "principal direction at vertex {v} is not unit"
                    )));
                }
            }
            if kappa[v][0] > kappa[v][1] {
                return Err(Error::domain(format!(
                    "principal curvatures at vertex {v} are not sorted"
                )));
            }
        }
        let sym = kappa
            .iter()
            .map(|k| [1.0, k[0] + k[1], k[0] * k[1]])
            .collect();
        Ok(CurvatureField {
            normals,
            kappa,
            dirs,
            sym,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.kappa.len()
    }

    /// Newton eigenvalues (mu_1^r, mu_2^r) at a vertex, ordered to match the
    /// principal directions (mu_1^1 = k2, mu_2^1 = k1).
    pub fn newton_eigenvalues(&self, v: usize, r: usize) -> Result<[f64; 2]> {
        if r > 2 {
            return Err(Error::domain(format!("newton order r={r} out of range for n=2")));
        }
        let [k1, k2] = self.kappa[v];
        let mu = newton_spectrum(&[k1, k2], r);
        Ok([mu[0], mu[1]])
    }
}

/// Global extrema of the Newton-tensor eigenvalues over all vertices:
/// (mu, nu) = (inf of the smallest, sup of the largest).
pub fn spectral_extrema(mesh: &TriMesh, cf: &CurvatureField, r: usize) -> Result<(f64, f64)> {
    if mesh.vertex_count() == 0 || cf.vertex_count() != mesh.vertex_count() {
        return Err(Error::domain("curvature field does not cover the mesh"));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in 0..mesh.vertex_count() {
        let mu = cf.newton_eigenvalues(v, r)?;
        lo = lo.min(mu[0]).min(mu[1]);
        hi = hi.max(mu[0]).max(mu[1]);
    }
    Ok((lo, hi))
}

/// P_r is positive definite iff the smallest Newton eigenvalue is positive;
/// the margin is that smallest eigenvalue.
pub fn check_ellipticity(mesh: &TriMesh, cf: &CurvatureField, r: usize) -> Result<(bool, f64)> {
    let (mu, _) = spectral_extrema(mesh, cf, r)?;
    Ok((mu > 0.0, mu))
}

/// sup |S_{r+1}| over the mesh vertices lying in the closed ambient ball
/// B(p, R).
pub fn local_curvature_sup(
    mesh: &TriMesh,
    cf: &CurvatureField,
    p: &AmbientPoint,
    radius: f64,
    r: usize,
) -> Result<f64> {
    if radius <= 0.0 {
        return Err(Error::domain("ball radius must be positive"));
    }
    if r + 1 > 2 {
        return Err(Error::domain(format!(
            "S_{} is not defined for surfaces (n = 2)",
            r + 1
        )));
    }
    let sf: &SpaceForm = &mesh.space_form;
    sf.check_point(&p.coords)?;
    let mut sup: Option<f64> = None;
    for (v, q) in mesh.vertices.iter().enumerate() {
        if sf.distance_unchecked(&p.coords, &q.coords) <= radius {
            let s = cf.sym[v][r + 1].abs();
            sup = Some(sup.map_or(s, |cur: f64| cur.max(s)));
        }
    }
    sup.ok_or(Error::EmptyBall)
}

/// Infimum of S_r over the mesh vertices (r <= 2).
pub fn inf_symmetric_function(cf: &CurvatureField, r: usize) -> Result<f64> {
    if r > 2 {
        return Err(Error::domain(format!("S_{r} is not stored for surfaces")));
    }
    cf.sym
        .iter()
        .map(|s| s[r])
        .fold(None, |acc: Option<f64>, x| {
            Some(acc.map_or(x, |a| a.min(x)))
        })
        .ok_or_else(|| Error::domain("empty curvature field"))
}
