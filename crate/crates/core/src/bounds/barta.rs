//! Vector-field lower bound: for any smooth field X on the domain,
//! inf [div(Phi X) - |Phi^{1/2} X|^2] bounds the fundamental tone from below,
//! with equality at X = -grad log v for the first eigenfunction v.
//!
//! Discrete realization: the divergence at a vertex is the lumped-M-weighted
//! adjoint of the P1 gradient applied to the field's flux form, element by
//! element. Fields with a singular layer (log-gradients of functions
//! vanishing on the boundary) carry their de-singularizing weight: face
//! values average the finite products w*X and divide by the face-averaged
//! weight, which reproduces the centroid value of the underlying smooth flux.

use nalgebra::Vector2;

use super::BoundConstants;
use crate::error::{Error, Result};
use crate::fem::{FaceChart, PhiField, VertexFrame};
use crate::mesh::TriMesh;
use crate::spaceform::AmbientPoint;

/// Tangent vector field sampled at vertices, components in the vertex frames.
#[derive(Clone, Debug)]
pub struct VertexVectorField {
    /// w_i * X_i: finite everywhere, including vertices where the weight
    /// vanishes and the pointwise field blows up.
    scaled: Vec<[f64; 2]>,
    /// De-singularizing weight; 1 for plain fields. The pointwise field is
    /// undefined at vertices with zero weight.
    weight: Vec<f64>,
}

impl VertexVectorField {
    pub fn zero(n: usize) -> Self {
        VertexVectorField {
            scaled: vec![[0.0, 0.0]; n],
            weight: vec![1.0; n],
        }
    }

    /// Plain field with unit weight.
    pub fn new(components: Vec<[f64; 2]>) -> Result<Self> {
        for c in &components {
            if !c[0].is_finite() || !c[1].is_finite() {
                return Err(Error::domain("vector field components must be finite"));
            }
        }
        let weight = vec![1.0; components.len()];
        Ok(VertexVectorField {
            scaled: components,
            weight,
        })
    }

    /// Field given by scaled values w_i * X_i and nonnegative weights w_i.
    pub fn weighted(scaled: Vec<[f64; 2]>, weight: Vec<f64>) -> Result<Self> {
        if scaled.len() != weight.len() {
            return Err(Error::domain("scaled values and weights differ in length"));
        }
        for (c, &w) in scaled.iter().zip(&weight) {
            if !c[0].is_finite() || !c[1].is_finite() || !w.is_finite() || w < 0.0 {
                return Err(Error::domain(
                    "weighted field needs finite values and nonnegative weights",
                ));
            }
        }
        Ok(VertexVectorField { scaled, weight })
    }

    pub fn len(&self) -> usize {
        self.weight.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weight.is_empty()
    }

    pub fn is_defined(&self, v: usize) -> bool {
        self.weight[v] > 0.0
    }

    /// Pointwise components where the field is defined.
    pub fn component(&self, v: usize) -> Option<[f64; 2]> {
        if self.is_defined(v) {
            let w = self.weight[v];
            Some([self.scaled[v][0] / w, self.scaled[v][1] / w])
        } else {
            None
        }
    }
}

/// Weak divergence of Phi X at every vertex: the lumped-mass adjoint of the
/// P1 gradient applied to the element fluxes.
pub fn weak_divergence(
    mesh: &TriMesh,
    phi: &PhiField,
    field: &VertexVectorField,
) -> Result<Vec<f64>> {
    let n = mesh.vertex_count();
    if field.len() != n || phi.vertex_count() != n {
        return Err(Error::domain("field does not cover the mesh"));
    }
    let mut rhs = vec![0.0; n];
    let mut lumped = vec![0.0; n];
    for (f, tri) in mesh.faces.iter().enumerate() {
        let chart = FaceChart::build(mesh, &phi.frames, f)?;
        let phi_tri = chart.average_phi(tri, phi);
        let mut num = Vector2::zeros();
        let mut den = 0.0;
        for c in 0..3 {
            let v = tri[c];
            num += chart.rot[c] * Vector2::new(field.scaled[v][0], field.scaled[v][1]);
            den += field.weight[v];
        }
        // (sum w X) / (sum w): the weighted corner average.
        let x_face = if den > 1e-300 { num / den } else { Vector2::zeros() };
        let flux = phi_tri * x_face;
        for c in 0..3 {
            rhs[tri[c]] -= chart.area * flux.dot(&chart.grads[c]);
            lumped[tri[c]] += chart.area / 3.0;
        }
    }
    Ok(rhs
        .iter()
        .zip(&lumped)
        .map(|(r, m)| if *m > 0.0 { r / m } else { 0.0 })
        .collect())
}

/// Evaluates the vector-field bound: the infimum over interior vertices of
/// div(Phi X) - <Phi X, X>. Requires Phi positive definite.
pub fn barta_bound(
    mesh: &TriMesh,
    phi: &PhiField,
    field: &VertexVectorField,
    consts: &BoundConstants,
) -> Result<f64> {
    let margin = phi.ellipticity_margin();
    if margin <= 0.0 {
        return Err(Error::NotElliptic {
            what: "Phi".into(),
            margin,
        });
    }
    let div = weak_divergence(mesh, phi, field)?;
    let mut inf = f64::INFINITY;
    for v in 0..mesh.vertex_count() {
        if mesh.boundary_vertex[v] {
            continue;
        }
        let Some([x1, x2]) = field.component(v) else {
            continue;
        };
        let [a, b, c] = phi.mats[v];
        let quad = a * x1 * x1 + 2.0 * b * x1 * x2 + c * x2 * x2;
        inf = inf.min(div[v] - quad);
    }
    if !inf.is_finite() {
        return Err(Error::domain("no interior vertices to take the infimum over"));
    }
    Ok(consts.barta_scale * inf)
}

/// The radial test field X = -grad log(R^2 - rho^2) = 2 rho grad rho / (R^2 -
/// rho^2), with rho the ambient distance from `p` projected to the surface.
/// Carries the weight R^2 - rho^2.
pub fn canonical_test_field(
    mesh: &TriMesh,
    frames: &[VertexFrame],
    p: &AmbientPoint,
    ball_radius: f64,
) -> Result<VertexVectorField> {
    let sf = &mesh.space_form;
    sf.check_point(&p.coords)?;
    if ball_radius <= 0.0 {
        return Err(Error::domain("ball radius must be positive"));
    }
    let n = mesh.vertex_count();
    let mut scaled = vec![[0.0, 0.0]; n];
    let mut weight = vec![0.0; n];
    let mut offending = Vec::new();
    for v in 0..n {
        let x = &mesh.vertices[v].coords;
        let rho = sf.distance_unchecked(&p.coords, x);
        let w = ball_radius * ball_radius - rho * rho;
        if w <= 1e-12 * ball_radius * ball_radius {
            if !mesh.boundary_vertex[v] {
                offending.push(v);
            }
            // Rim vertex: weight 0, scaled value 2 rho grad rho.
        } else {
            weight[v] = w;
        }
        if rho < 1e-14 {
            continue; // grad of rho^2 vanishes at the center
        }
        // Ambient gradient of rho at x points away from p.
        let grad_rho = -sf.log(x, &p.coords) / rho;
        scaled[v] = [
            2.0 * rho * sf.dot(&grad_rho, &frames[v].e1),
            2.0 * rho * sf.dot(&grad_rho, &frames[v].e2),
        ];
    }
    if !offending.is_empty() {
        offending.truncate(8);
        return Err(Error::domain(format!(
            "interior vertices outside the open ball of radius {ball_radius}: {offending:?}"
        )));
    }
    VertexVectorField::weighted(scaled, weight)
}

/// X = -grad log v for a positive vertex function v (typically the first
/// eigenfunction): the P1 face gradients are averaged to vertices with area
/// weights; the field carries v itself as its weight.
pub fn eigenfunction_log_gradient_field(
    mesh: &TriMesh,
    frames: &[VertexFrame],
    v: &[f64],
) -> Result<VertexVectorField> {
    let n = mesh.vertex_count();
    if v.len() != n {
        return Err(Error::domain("function length does not match the mesh"));
    }
    // Orient so the dominant entries are positive.
    let mut scale = 0.0f64;
    for &x in v {
        if x.abs() > scale.abs() {
            scale = x;
        }
    }
    if scale == 0.0 {
        return Err(Error::domain("zero function"));
    }
    let sign = scale.signum();
    let mut grads = vec![Vector2::zeros(); n];
    let mut areas = vec![0.0f64; n];
    for (f, tri) in mesh.faces.iter().enumerate() {
        let chart = FaceChart::build(mesh, frames, f)?;
        let mut g = Vector2::zeros();
        for c in 0..3 {
            g += chart.grads[c] * (sign * v[tri[c]]);
        }
        for c in 0..3 {
            grads[tri[c]] += chart.rot[c].transpose() * g * chart.area;
            areas[tri[c]] += chart.area;
        }
    }
    let floor = 1e-12 * scale.abs();
    let mut scaled = vec![[0.0, 0.0]; n];
    let mut weight = vec![0.0; n];
    for i in 0..n {
        let vi = sign * v[i];
        if areas[i] <= 0.0 {
            continue;
        }
        let g = grads[i] / areas[i];
        scaled[i] = [-g[0], -g[1]];
        if vi > floor {
            weight[i] = vi;
        }
    }
    VertexVectorField::weighted(scaled, weight)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::{smallest_eigenpairs, ProblemKind, SolveOptions};
    use crate::fem::{apply_dirichlet, assemble, MassScheme};
    use crate::surfaces::{builtin_surface, SurfaceFamily};
    use approx::assert_relative_eq;

    #[test]
    fn zero_field_gives_zero_bound() {
        let (mesh, _) = builtin_surface(&SurfaceFamily::PlaneDisk { radius: 1.0 }, 1).unwrap();
        let phi = PhiField::identity(&mesh).unwrap();
        let x = VertexVectorField::zero(mesh.vertex_count());
        let b = barta_bound(&mesh, &phi, &x, &BoundConstants::default()).unwrap();
        assert_relative_eq!(b, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn canonical_field_values_on_the_disk() {
        let (mesh, _) = builtin_surface(&SurfaceFamily::PlaneDisk { radius: 1.0 }, 2).unwrap();
        let phi = PhiField::identity(&mesh).unwrap();
        let center = AmbientPoint::new(&mesh.space_form, &[0.0, 0.0, 0.0]).unwrap();
        let x = canonical_test_field(&mesh, &phi.frames, &center, 1.0).unwrap();
        // Center vertex: X = 0.
        assert_eq!(x.component(0).unwrap(), [0.0, 0.0]);
        // A vertex at rho = 0.5: |X| = 2*0.5/(1-0.25) = 4/3.
        let target = mesh
            .vertices
            .iter()
            .position(|p| (p.coords[0] - 0.5).abs() < 1e-12 && p.coords[1].abs() < 1e-12)
            .expect("ring vertex at (0.5, 0)");
        let c = x.component(target).unwrap();
        assert_relative_eq!((c[0] * c[0] + c[1] * c[1]).sqrt(), 4.0 / 3.0, epsilon = 1e-10);
    }

    #[test]
    fn canonical_field_has_unit_radial_gradient_on_geodesic_cap() {
        // The totally geodesic cap contains the geodesics through its pole,
        // so |grad rho| = 1 on the surface and |X| = 2 rho / (R^2 - rho^2).
        let fam = SurfaceFamily::SphericalCap {
            polar_angle: std::f64::consts::FRAC_PI_4,
        };
        let (mesh, _) = builtin_surface(&fam, 1).unwrap();
        let phi = PhiField::identity(&mesh).unwrap();
        let pole = fam.cap_pole().unwrap();
        let radius = std::f64::consts::FRAC_PI_4;
        let x = canonical_test_field(&mesh, &phi.frames, &pole, radius).unwrap();
        for v in 0..mesh.vertex_count() {
            let Some(c) = x.component(v) else { continue };
            let rho = mesh
                .space_form
                .distance_unchecked(&pole.coords, &mesh.vertices[v].coords);
            if rho < 1e-9 {
                continue;
            }
            let want = 2.0 * rho / (radius * radius - rho * rho);
            assert_relative_eq!(
                (c[0] * c[0] + c[1] * c[1]).sqrt(),
                want,
                epsilon = want * 1e-9
            );
        }
    }

    #[test]
    fn disk_canonical_bound_is_near_four() {
        // Symbolic oracle: div X - |X|^2 = 4/(R^2 - rho^2), infimum 4 at the
        // center of the unit disk.
        let (mesh, _) = builtin_surface(&SurfaceFamily::PlaneDisk { radius: 1.0 }, 3).unwrap();
        let phi = PhiField::identity(&mesh).unwrap();
        let center = AmbientPoint::new(&mesh.space_form, &[0.0, 0.0, 0.0]).unwrap();
        let x = canonical_test_field(&mesh, &phi.frames, &center, 1.0).unwrap();
        let b = barta_bound(&mesh, &phi, &x, &BoundConstants::default()).unwrap();
        assert_relative_eq!(b, 4.0, epsilon = 0.2);
    }

    #[test]
    fn vertices_outside_the_ball_are_reported() {
        let (mesh, _) = builtin_surface(&SurfaceFamily::PlaneDisk { radius: 1.0 }, 1).unwrap();
        let phi = PhiField::identity(&mesh).unwrap();
        let center = AmbientPoint::new(&mesh.space_form, &[0.0, 0.0, 0.0]).unwrap();
        assert!(canonical_test_field(&mesh, &phi.frames, &center, 0.5).is_err());
    }

    #[test]
    fn equality_field_recovers_the_eigenvalue_on_the_disk() {
        let (mesh, _) = builtin_surface(&SurfaceFamily::PlaneDisk { radius: 1.0 }, 3).unwrap();
        let phi = PhiField::identity(&mesh).unwrap();
        let op = assemble(&mesh, &phi, MassScheme::Consistent).unwrap();
        let red = apply_dirichlet(&op, &mesh).unwrap();
        let res =
            smallest_eigenpairs(&red, 1, ProblemKind::Dirichlet, &SolveOptions::default()).unwrap();
        let lambda = res.eigenvalues[0];
        let x =
            eigenfunction_log_gradient_field(&mesh, &phi.frames, &res.eigenfunctions[0]).unwrap();
        let b = barta_bound(&mesh, &phi, &x, &BoundConstants::default()).unwrap();
        assert!(
            (b - lambda).abs() <= 0.05 * lambda,
            "bound {b} vs lambda {lambda}"
        );
    }

    #[test]
    fn non_elliptic_phi_is_rejected() {
        let (mesh, cf) =
            builtin_surface(&SurfaceFamily::Torus { major: 2.0, minor: 1.0 }, 0).unwrap();
        let p1 = PhiField::newton(&mesh, &cf, 1).unwrap();
        let x = VertexVectorField::zero(mesh.vertex_count());
        assert!(matches!(
            barta_bound(&mesh, &p1, &x, &BoundConstants::default()),
            Err(Error::NotElliptic { .. })
        ));
    }
}
