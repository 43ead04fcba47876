//! Built-in surface families with analytic curvature fields.
//!
//! All families produce consistently oriented meshes (outward winding where
//! "outward" makes sense) and curvature data from closed formulas. Normals in
//! the curvature field follow the mean-convex convention: geodesic spheres
//! carry the inward normal, so their principal curvatures are positive.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::Vector3;

use crate::curvature::CurvatureField;
use crate::error::{Error, Result};
use crate::mesh::TriMesh;
use crate::spaceform::{AmbientPoint, Coords, SpaceForm};

#[derive(Clone, Debug, PartialEq)]
pub enum SurfaceFamily {
    /// Round sphere of the given radius centered at the origin of R^3.
    RoundSphere { radius: f64 },
    /// Ellipsoid x^2/a^2 + y^2/b^2 + z^2/c^2 = 1 in R^3.
    Ellipsoid { a: f64, b: f64, c: f64 },
    /// Torus of revolution around the z axis (major, minor radii) in R^3.
    Torus { major: f64, minor: f64 },
    /// Flat disk of the given radius in the z = 0 plane of R^3.
    PlaneDisk { radius: f64 },
    /// Cap of a round sphere in R^3: polar angle measured from the +z pole.
    SphereCap { sphere_radius: f64, polar_angle: f64 },
    /// Geodesic cap of the totally geodesic S^2 inside S^3 (c = 1).
    SphericalCap { polar_angle: f64 },
    /// The whole totally geodesic S^2 inside S^3 (c = 1), closed.
    GreatSphereS3,
    /// Closed geodesic sphere of the given radius in H^3 (c = -1).
    GeodesicSphereH3 { radius: f64 },
    /// Cap of a geodesic sphere in H^3, polar angle from the cap pole.
    GeodesicCapH3 { sphere_radius: f64, polar_angle: f64 },
}

impl SurfaceFamily {
    pub fn name(&self) -> &'static str {
        match self {
            SurfaceFamily::RoundSphere { .. } => "round_sphere",
            SurfaceFamily::Ellipsoid { .. } => "ellipsoid",
            SurfaceFamily::Torus { .. } => "torus",
            SurfaceFamily::PlaneDisk { .. } => "plane_disk",
            SurfaceFamily::SphereCap { .. } => "sphere_cap",
            SurfaceFamily::SphericalCap { .. } => "spherical_cap",
            SurfaceFamily::GreatSphereS3 => "great_sphere_s3",
            SurfaceFamily::GeodesicSphereH3 { .. } => "geodesic_sphere_h3",
            SurfaceFamily::GeodesicCapH3 { .. } => "geodesic_cap_h3",
        }
    }

    pub fn space_form(&self) -> SpaceForm {
        match self {
            SurfaceFamily::SphericalCap { .. } | SurfaceFamily::GreatSphereS3 => {
                SpaceForm::spherical(3)
            }
            SurfaceFamily::GeodesicSphereH3 { .. } | SurfaceFamily::GeodesicCapH3 { .. } => {
                SpaceForm::hyperbolic(3)
            }
            _ => SpaceForm::euclidean(3),
        }
    }

    /// Pole of a cap family (the natural ambient-ball center), or the disk
    /// center for the flat disk.
    pub fn cap_pole(&self) -> Option<AmbientPoint> {
        let c = match self {
            SurfaceFamily::PlaneDisk { .. } => Coords::new(0.0, 0.0, 0.0, 0.0),
            SurfaceFamily::SphereCap { sphere_radius, .. } => {
                Coords::new(0.0, 0.0, *sphere_radius, 0.0)
            }
            SurfaceFamily::SphericalCap { .. } => Coords::new(1.0, 0.0, 0.0, 0.0),
            SurfaceFamily::GeodesicCapH3 { sphere_radius, .. } => Coords::new(
                sphere_radius.cosh(),
                0.0,
                0.0,
                sphere_radius.sinh(),
            ),
            _ => return None,
        };
        Some(AmbientPoint::from_coords(c))
    }

    fn check_params(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::domain(format!("{}: {what}", self.name())));
        match *self {
            SurfaceFamily::RoundSphere { radius } if radius <= 0.0 => bad("radius must be positive"),
            SurfaceFamily::Ellipsoid { a, b, c } if a <= 0.0 || b <= 0.0 || c <= 0.0 => {
                bad("semi-axes must be positive")
            }
            SurfaceFamily::Torus { major, minor } if minor <= 0.0 || major <= minor => {
                bad("requires major > minor > 0")
            }
            SurfaceFamily::PlaneDisk { radius } if radius <= 0.0 => bad("radius must be positive"),
            SurfaceFamily::SphereCap {
                sphere_radius,
                polar_angle,
            } if sphere_radius <= 0.0 || polar_angle <= 0.0 || polar_angle >= PI => {
                bad("needs radius > 0 and polar angle in (0, pi)")
            }
            SurfaceFamily::SphericalCap { polar_angle }
                if polar_angle <= 0.0 || polar_angle >= PI =>
            {
                bad("polar angle must lie in (0, pi)")
            }
            SurfaceFamily::GeodesicSphereH3 { radius } if radius <= 0.0 => {
                bad("radius must be positive")
            }
            SurfaceFamily::GeodesicCapH3 {
                sphere_radius,
                polar_angle,
            } if sphere_radius <= 0.0 || polar_angle <= 0.0 || polar_angle >= PI => {
                bad("needs radius > 0 and polar angle in (0, pi)")
            }
            _ => Ok(()),
        }
    }
}

/// Polar angle of the cap cut out of a geodesic sphere of radius `rho0` by
/// the ambient ball of radius `ball_radius` centered at a point of the
/// surface (the cap pole).
pub fn cap_angle_for_ball(curvature: i32, rho0: f64, ball_radius: f64) -> Result<f64> {
    if rho0 <= 0.0 || ball_radius <= 0.0 {
        return Err(Error::domain("sphere and ball radii must be positive"));
    }
    let cos_psi = match curvature {
        0 => {
            let s = ball_radius / (2.0 * rho0);
            if s >= 1.0 {
                return Err(Error::domain("ball swallows the whole sphere"));
            }
            return Ok(2.0 * s.asin());
        }
        1 => {
            let (sr, cr) = (rho0.sin(), rho0.cos());
            (ball_radius.cos() - cr * cr) / (sr * sr)
        }
        -1 => {
            let (sh, ch) = (rho0.sinh(), rho0.cosh());
            (ch * ch - ball_radius.cosh()) / (sh * sh)
        }
        _ => return Err(Error::domain("curvature sign must be -1, 0 or 1")),
    };
    if cos_psi <= -1.0 {
        return Err(Error::domain("ball swallows the whole sphere"));
    }
    if cos_psi >= 1.0 {
        return Err(Error::domain("ball does not reach the surface"));
    }
    Ok(cos_psi.acos())
}

/// Generates a mesh plus its analytic curvature field.
pub fn builtin_surface(family: &SurfaceFamily, level: u32) -> Result<(TriMesh, CurvatureField)> {
    family.check_params()?;
    if level > 7 {
        return Err(Error::domain("refinement level capped at 7"));
    }
    match *family {
        SurfaceFamily::RoundSphere { radius } => round_sphere(radius, level),
        SurfaceFamily::Ellipsoid { a, b, c } => ellipsoid(a, b, c, level),
        SurfaceFamily::Torus { major, minor } => torus(major, minor, level),
        SurfaceFamily::PlaneDisk { radius } => plane_disk(radius, level),
        SurfaceFamily::SphereCap {
            sphere_radius,
            polar_angle,
        } => sphere_cap(sphere_radius, polar_angle, level),
        SurfaceFamily::SphericalCap { polar_angle } => spherical_cap_s3(polar_angle, level),
        SurfaceFamily::GreatSphereS3 => great_sphere_s3(level),
        SurfaceFamily::GeodesicSphereH3 { radius } => geodesic_sphere_h3(radius, level),
        SurfaceFamily::GeodesicCapH3 {
            sphere_radius,
            polar_angle,
        } => geodesic_cap_h3(sphere_radius, polar_angle, level),
    }
}

// ---------------------------------------------------------------------------
// Icosphere machinery
// ---------------------------------------------------------------------------

/// Unit icosphere by repeated 4-to-1 subdivision; 10 * 4^level + 2 vertices.
pub fn icosphere(level: u32) -> (Vec<Vector3<f64>>, Vec<[usize; 3]>) {
    let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
    let mut vertices: Vec<Vector3<f64>> = vec![
        Vector3::new(-1.0, phi, 0.0),
        Vector3::new(1.0, phi, 0.0),
        Vector3::new(-1.0, -phi, 0.0),
        Vector3::new(1.0, -phi, 0.0),
        Vector3::new(0.0, -1.0, phi),
        Vector3::new(0.0, 1.0, phi),
        Vector3::new(0.0, -1.0, -phi),
        Vector3::new(0.0, 1.0, -phi),
        Vector3::new(phi, 0.0, -1.0),
        Vector3::new(phi, 0.0, 1.0),
        Vector3::new(-phi, 0.0, -1.0),
        Vector3::new(-phi, 0.0, 1.0),
    ];
    for v in &mut vertices {
        v.normalize_mut();
    }
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..level {
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let mut mid = |u: usize, v: usize, vs: &mut Vec<Vector3<f64>>| -> usize {
                let key = (u.min(v), u.max(v));
                *midpoint.entry(key).or_insert_with(|| {
                    let m = (vs[u] + vs[v]).normalize();
                    vs.push(m);
                    vs.len() - 1
                })
            };
            let ab = mid(a, b, &mut vertices);
            let bc = mid(b, c, &mut vertices);
            let ca = mid(c, a, &mut vertices);
            next.push([a, ab, ca]);
            next.push([ab, b, bc]);
            next.push([ca, bc, c]);
            next.push([ab, bc, ca]);
        }
        faces = next;
    }
    (vertices, faces)
}

/// Deterministic unit tangent of the unit sphere at direction u.
fn sphere_tangent(u: &Vector3<f64>) -> Vector3<f64> {
    let axis = if u[2].abs() < 0.9 {
        Vector3::new(0.0, 0.0, 1.0)
    } else {
        Vector3::new(1.0, 0.0, 0.0)
    };
    axis.cross(u).normalize()
}

fn coords3(v: &Vector3<f64>) -> Coords {
    Coords::new(v[0], v[1], v[2], 0.0)
}

fn round_sphere(radius: f64, level: u32) -> Result<(TriMesh, CurvatureField)> {
    let (units, faces) = icosphere(level);
    let sf = SpaceForm::euclidean(3);
    let vertices = units
        .iter()
        .map(|u| AmbientPoint::from_coords(coords3(&(u * radius))))
        .collect();
    let mesh = TriMesh::new(sf, vertices, faces)?.with_level(level);
    let mut normals = Vec::with_capacity(units.len());
    let mut kappa = Vec::with_capacity(units.len());
    let mut dirs = Vec::with_capacity(units.len());
    let k = 1.0 / radius;
    for u in &units {
        let t = sphere_tangent(u);
        let s = u.cross(&t);
        normals.push(coords3(&(-u)));
        kappa.push([k, k]);
        dirs.push([coords3(&t), coords3(&s)]);
    }
    let cf = CurvatureField::new(&mesh, normals, kappa, dirs)?;
    Ok((mesh, cf))
}

/// Symmetric 2x2 eigendecomposition, ascending. Returns (k1, k2, angle of the
/// first eigenvector).
fn sym2_eigen(p: f64, q: f64, r: f64) -> (f64, f64, f64) {
    let mean = 0.5 * (p + r);
    let half = 0.5 * (p - r);
    let disc = (half * half + q * q).sqrt();
    let (lo, hi) = (mean - disc, mean + disc);
    // Eigenvector for `lo`: (q, lo - p) or (lo - r, q), whichever is stabler.
    let (vx, vy) = if q.abs() > 1e-300 {
        (lo - r, q)
    } else if p <= r {
        (1.0, 0.0)
    } else {
        (0.0, 1.0)
    };
    (lo, hi, vy.atan2(vx))
}

fn ellipsoid(a: f64, b: f64, c: f64, level: u32) -> Result<(TriMesh, CurvatureField)> {
    let (units, faces) = icosphere(level);
    let sf = SpaceForm::euclidean(3);
    let points: Vec<Vector3<f64>> = units
        .iter()
        .map(|u| Vector3::new(a * u[0], b * u[1], c * u[2]))
        .collect();
    let vertices = points
        .iter()
        .map(|p| AmbientPoint::from_coords(coords3(p)))
        .collect();
    let mesh = TriMesh::new(sf, vertices, faces)?.with_level(level);
    let inv2 = Vector3::new(1.0 / (a * a), 1.0 / (b * b), 1.0 / (c * c));
    let mut normals = Vec::with_capacity(points.len());
    let mut kappa = Vec::with_capacity(points.len());
    let mut dirs = Vec::with_capacity(points.len());
    for p in &points {
        let grad = Vector3::new(p[0] * inv2[0], p[1] * inv2[1], p[2] * inv2[2]);
        let nu = grad.norm();
        let n_out = grad / nu;
        let t1 = sphere_tangent(&n_out);
        let t2 = n_out.cross(&t1);
        // Shape operator w.r.t. the inward normal: P D P / nu on the tangent.
        let d = |v: &Vector3<f64>| Vector3::new(v[0] * inv2[0], v[1] * inv2[1], v[2] * inv2[2]);
        let s11 = t1.dot(&d(&t1)) / nu;
        let s12 = t1.dot(&d(&t2)) / nu;
        let s22 = t2.dot(&d(&t2)) / nu;
        let (k1, k2, theta) = sym2_eigen(s11, s12, s22);
        let e1 = (t1 * theta.cos() + t2 * theta.sin()).normalize();
        let e2 = n_out.cross(&e1);
        normals.push(coords3(&(-n_out)));
        kappa.push([k1, k2]);
        dirs.push([coords3(&e1), coords3(&e2)]);
    }
    let cf = CurvatureField::new(&mesh, normals, kappa, dirs)?;
    Ok((mesh, cf))
}

fn torus(major: f64, minor: f64, level: u32) -> Result<(TriMesh, CurvatureField)> {
    let nv_major = 12 * (1 << level) as usize;
    let nu_tube = 6 * (1 << level) as usize;
    let sf = SpaceForm::euclidean(3);
    let idx = |i: usize, j: usize| (i % nv_major) * nu_tube + (j % nu_tube);
    let mut vertices = Vec::with_capacity(nv_major * nu_tube);
    let mut normals = Vec::with_capacity(nv_major * nu_tube);
    let mut kappa = Vec::with_capacity(nv_major * nu_tube);
    let mut dirs = Vec::with_capacity(nv_major * nu_tube);
    for i in 0..nv_major {
        let v = 2.0 * PI * i as f64 / nv_major as f64;
        for j in 0..nu_tube {
            let u = 2.0 * PI * j as f64 / nu_tube as f64;
            let ring = major + minor * u.cos();
            let p = Vector3::new(ring * v.cos(), ring * v.sin(), minor * u.sin());
            let n_out = Vector3::new(u.cos() * v.cos(), u.cos() * v.sin(), u.sin());
            let e_u = Vector3::new(-u.sin() * v.cos(), -u.sin() * v.sin(), u.cos());
            let e_v = Vector3::new(-v.sin(), v.cos(), 0.0);
            vertices.push(AmbientPoint::from_coords(coords3(&p)));
            normals.push(coords3(&(-n_out)));
            // k along e_v is cos u / (major + minor cos u) < 1/minor always.
            kappa.push([u.cos() / ring, 1.0 / minor]);
            dirs.push([coords3(&e_v), coords3(&e_u)]);
        }
    }
    let mut faces = Vec::with_capacity(2 * nv_major * nu_tube);
    for i in 0..nv_major {
        for j in 0..nu_tube {
            faces.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            faces.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    let mesh = TriMesh::new(sf, vertices, faces)?.with_level(level);
    let cf = CurvatureField::new(&mesh, normals, kappa, dirs)?;
    Ok((mesh, cf))
}

// ---------------------------------------------------------------------------
// Polar (disk-type) meshes
// ---------------------------------------------------------------------------

fn disk_rings(level: u32) -> usize {
    5 * (1 << level) as usize
}

/// Builds the combinatorial polar disk: a center vertex plus m rings, ring j
/// holding 6j vertices. `place(t, phi)` maps ring fraction t in [0,1] and
/// azimuth phi to a point. Faces are wound counterclockwise in the chart.
fn polar_mesh(
    m: usize,
    place: impl Fn(f64, f64) -> Coords,
) -> (Vec<AmbientPoint>, Vec<[usize; 3]>) {
    let mut vertices = vec![AmbientPoint::from_coords(place(0.0, 0.0))];
    let mut ring_start = vec![0usize; m + 1];
    for j in 1..=m {
        ring_start[j] = vertices.len();
        let count = 6 * j;
        for i in 0..count {
            let phi = 2.0 * PI * i as f64 / count as f64;
            vertices.push(AmbientPoint::from_coords(place(j as f64 / m as f64, phi)));
        }
    }
    let mut faces = Vec::with_capacity(6 * m * m);
    // Center fan.
    for i in 0..6usize {
        faces.push([0, 1 + i, 1 + (i + 1) % 6]);
    }
    // Annuli: merge the two rings by angle.
    for j in 2..=m {
        let (a, b) = (6 * (j - 1), 6 * j);
        let (inner, outer) = (ring_start[j - 1], ring_start[j]);
        let (mut i, mut k) = (0usize, 0usize);
        while i < a || k < b {
            let inner_next = if i < a {
                (i + 1) as f64 / a as f64
            } else {
                f64::INFINITY
            };
            let outer_next = if k < b {
                (k + 1) as f64 / b as f64
            } else {
                f64::INFINITY
            };
            if k < b && (i == a || outer_next <= inner_next) {
                faces.push([inner + i % a, outer + k % b, outer + (k + 1) % b]);
                k += 1;
            } else {
                faces.push([inner + i % a, outer + k % b, inner + (i + 1) % a]);
                i += 1;
            }
        }
    }
    (vertices, faces)
}

fn plane_disk(radius: f64, level: u32) -> Result<(TriMesh, CurvatureField)> {
    let m = disk_rings(level);
    let (vertices, faces) = polar_mesh(m, |t, phi| {
        Coords::new(radius * t * phi.cos(), radius * t * phi.sin(), 0.0, 0.0)
    });
    let sf = SpaceForm::euclidean(3);
    let n = vertices.len();
    let mesh = TriMesh::new(sf, vertices, faces)?.with_level(level);
    let normals = vec![Coords::new(0.0, 0.0, 1.0, 0.0); n];
    let kappa = vec![[0.0, 0.0]; n];
    let dirs = vec![[Coords::new(1.0, 0.0, 0.0, 0.0), Coords::new(0.0, 1.0, 0.0, 0.0)]; n];
    let cf = CurvatureField::new(&mesh, normals, kappa, dirs)?;
    Ok((mesh, cf))
}

fn sphere_cap(rho0: f64, theta: f64, level: u32) -> Result<(TriMesh, CurvatureField)> {
    let m = disk_rings(level);
    let place = |t: f64, phi: f64| {
        let psi = t * theta;
        Coords::new(
            rho0 * psi.sin() * phi.cos(),
            rho0 * psi.sin() * phi.sin(),
            rho0 * psi.cos(),
            0.0,
        )
    };
    let (vertices, faces) = polar_mesh(m, place);
    let sf = SpaceForm::euclidean(3);
    let mesh = TriMesh::new(sf, vertices, faces)?.with_level(level);
    let k = 1.0 / rho0;
    let mut normals = Vec::with_capacity(mesh.vertex_count());
    let mut kappa = Vec::with_capacity(mesh.vertex_count());
    let mut dirs = Vec::with_capacity(mesh.vertex_count());
    for p in &mesh.vertices {
        let u = Vector3::new(p.coords[0], p.coords[1], p.coords[2]) / rho0;
        let t1 = sphere_tangent(&u);
        let t2 = u.cross(&t1);
        normals.push(coords3(&(-u)));
        kappa.push([k, k]);
        dirs.push([coords3(&t1), coords3(&t2)]);
    }
    let cf = CurvatureField::new(&mesh, normals, kappa, dirs)?;
    Ok((mesh, cf))
}

fn spherical_cap_s3(theta: f64, level: u32) -> Result<(TriMesh, CurvatureField)> {
    let m = disk_rings(level);
    let place = |t: f64, phi: f64| {
        let psi = t * theta;
        Coords::new(psi.cos(), psi.sin() * phi.cos(), psi.sin() * phi.sin(), 0.0)
    };
    let (vertices, faces) = polar_mesh(m, place);
    let sf = SpaceForm::spherical(3);
    let mesh = TriMesh::new(sf, vertices, faces)?.with_level(level);
    let (normals, kappa, dirs) = great_sphere_frames(&mesh);
    let cf = CurvatureField::new(&mesh, normals, kappa, dirs)?;
    Ok((mesh, cf))
}

fn great_sphere_s3(level: u32) -> Result<(TriMesh, CurvatureField)> {
    let (units, faces) = icosphere(level);
    let sf = SpaceForm::spherical(3);
    let vertices: Vec<AmbientPoint> = units
        .iter()
        .map(|u| AmbientPoint::from_coords(Coords::new(u[0], u[1], u[2], 0.0)))
        .collect();
    let mesh = TriMesh::new(sf, vertices, faces)?.with_level(level);
    let (normals, kappa, dirs) = great_sphere_frames(&mesh);
    let cf = CurvatureField::new(&mesh, normals, kappa, dirs)?;
    Ok((mesh, cf))
}

/// Frames for surfaces lying inside the x4 = 0 equatorial S^2 of S^3:
/// normal e4, zero shape operator, tangent directions from the 3d sphere.
fn great_sphere_frames(mesh: &TriMesh) -> (Vec<Coords>, Vec<[f64; 2]>, Vec<[Coords; 2]>) {
    let n = mesh.vertex_count();
    let mut normals = Vec::with_capacity(n);
    let mut kappa = Vec::with_capacity(n);
    let mut dirs = Vec::with_capacity(n);
    for p in &mesh.vertices {
        let u = Vector3::new(p.coords[0], p.coords[1], p.coords[2]);
        let t1 = sphere_tangent(&u);
        let t2 = u.cross(&t1);
        normals.push(Coords::new(0.0, 0.0, 0.0, 1.0));
        kappa.push([0.0, 0.0]);
        dirs.push([coords3(&t1), coords3(&t2)]);
    }
    (normals, kappa, dirs)
}

/// Point of the geodesic sphere of radius rho0 in H^3 with unit direction u.
fn h3_sphere_point(rho0: f64, u: &Vector3<f64>) -> Coords {
    Coords::new(
        rho0.cosh(),
        rho0.sinh() * u[0],
        rho0.sinh() * u[1],
        rho0.sinh() * u[2],
    )
}

/// Inward normal and frame of the geodesic sphere at direction u.
fn h3_sphere_frame(rho0: f64, u: &Vector3<f64>) -> (Coords, [Coords; 2]) {
    let normal = Coords::new(
        -rho0.sinh(),
        -rho0.cosh() * u[0],
        -rho0.cosh() * u[1],
        -rho0.cosh() * u[2],
    );
    let t1 = sphere_tangent(u);
    let t2 = u.cross(&t1);
    (
        normal,
        [
            Coords::new(0.0, t1[0], t1[1], t1[2]),
            Coords::new(0.0, t2[0], t2[1], t2[2]),
        ],
    )
}

fn geodesic_sphere_h3(rho0: f64, level: u32) -> Result<(TriMesh, CurvatureField)> {
    let (units, faces) = icosphere(level);
    let sf = SpaceForm::hyperbolic(3);
    let vertices: Vec<AmbientPoint> = units
        .iter()
        .map(|u| AmbientPoint::from_coords(h3_sphere_point(rho0, u)))
        .collect();
    let mesh = TriMesh::new(sf, vertices, faces)?.with_level(level);
    let k = 1.0 / rho0.tanh();
    let mut normals = Vec::with_capacity(units.len());
    let mut kappa = Vec::with_capacity(units.len());
    let mut dirs = Vec::with_capacity(units.len());
    for u in &units {
        let (n, d) = h3_sphere_frame(rho0, u);
        normals.push(n);
        kappa.push([k, k]);
        dirs.push(d);
    }
    let cf = CurvatureField::new(&mesh, normals, kappa, dirs)?;
    Ok((mesh, cf))
}

fn geodesic_cap_h3(rho0: f64, theta: f64, level: u32) -> Result<(TriMesh, CurvatureField)> {
    let m = disk_rings(level);
    let place = |t: f64, phi: f64| {
        let psi = t * theta;
        let u = Vector3::new(psi.sin() * phi.cos(), psi.sin() * phi.sin(), psi.cos());
        h3_sphere_point(rho0, &u)
    };
    let (vertices, faces) = polar_mesh(m, place);
    let sf = SpaceForm::hyperbolic(3);
    let mesh = TriMesh::new(sf, vertices, faces)?.with_level(level);
    let k = 1.0 / rho0.tanh();
    let sh = rho0.sinh();
    let mut normals = Vec::with_capacity(mesh.vertex_count());
    let mut kappa = Vec::with_capacity(mesh.vertex_count());
    let mut dirs = Vec::with_capacity(mesh.vertex_count());
    for p in &mesh.vertices {
        let u = Vector3::new(p.coords[1] / sh, p.coords[2] / sh, p.coords[3] / sh).normalize();
        let (n, d) = h3_sphere_frame(rho0, &u);
        normals.push(n);
        kappa.push([k, k]);
        dirs.push(d);
    }
    let cf = CurvatureField::new(&mesh, normals, kappa, dirs)?;
    Ok((mesh, cf))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn icosphere_vertex_count() {
        for level in 0..=4u32 {
            let (v, f) = icosphere(level);
            assert_eq!(v.len(), 10 * 4usize.pow(level) + 2);
            assert_eq!(f.len(), 20 * 4usize.pow(level));
        }
    }

    #[test]
    fn icosphere_winding_is_outward() {
        let (v, f) = icosphere(1);
        let mut vol = 0.0;
        for [a, b, c] in f {
            vol += v[a].dot(&v[b].cross(&v[c])) / 6.0;
        }
        assert!(vol > 0.0, "signed volume {vol} should be positive");
    }

    #[test]
    fn round_sphere_field_and_area() {
        let (mesh, cf) = builtin_surface(&SurfaceFamily::RoundSphere { radius: 1.0 }, 3).unwrap();
        assert_eq!(mesh.vertex_count(), 642);
        assert!(mesh.is_closed());
        for k in &cf.kappa {
            assert_relative_eq!(k[0], 1.0, epsilon = 1e-12);
            assert_relative_eq!(k[1], 1.0, epsilon = 1e-12);
        }
        // Chordal icosphere area converges to 4 pi from below.
        let area = mesh.total_area().unwrap();
        assert!(area < 4.0 * PI && area > 4.0 * PI * 0.99);
    }

    #[test]
    fn sphere_area_converges_at_second_order() {
        let exact = 4.0 * PI;
        let mut errs = Vec::new();
        for level in 1..=3 {
            let (mesh, _) =
                builtin_surface(&SurfaceFamily::RoundSphere { radius: 1.0 }, level).unwrap();
            errs.push((exact - mesh.total_area().unwrap()).abs());
        }
        assert!(errs[1] / errs[0] < 0.3);
        assert!(errs[2] / errs[1] < 0.3);
    }

    #[test]
    fn plane_disk_has_rim_boundary() {
        let (mesh, cf) = builtin_surface(&SurfaceFamily::PlaneDisk { radius: 1.0 }, 1).unwrap();
        let m = disk_rings(1);
        assert_eq!(mesh.vertex_count(), 1 + 3 * m * (m + 1));
        let rim = mesh.boundary_vertex.iter().filter(|&&b| b).count();
        assert_eq!(rim, 6 * m);
        assert!(cf.kappa.iter().all(|k| k[0] == 0.0 && k[1] == 0.0));
        assert_relative_eq!(mesh.total_area().unwrap(), PI, epsilon = 0.02);
    }

    #[test]
    fn torus_is_closed_with_expected_curvatures() {
        let (mesh, cf) =
            builtin_surface(&SurfaceFamily::Torus { major: 2.0, minor: 1.0 }, 1).unwrap();
        assert!(mesh.is_closed());
        // Euler characteristic zero.
        let v = mesh.vertex_count() as i64;
        let f = mesh.face_count() as i64;
        let e = 3 * f / 2;
        assert_eq!(v - e + f, 0);
        for k in &cf.kappa {
            assert_relative_eq!(k[1], 1.0, epsilon = 1e-12);
            assert!(k[0] >= -1.0 - 1e-12 && k[0] <= 1.0 / 3.0 + 1e-12);
        }
        let min_k: f64 = cf.kappa.iter().map(|k| k[0]).fold(f64::INFINITY, f64::min);
        assert!(min_k < 0.0, "inner torus vertices have negative curvature");
    }

    #[test]
    fn torus_winding_is_outward() {
        let (mesh, _) =
            builtin_surface(&SurfaceFamily::Torus { major: 2.0, minor: 1.0 }, 0).unwrap();
        let mut vol = 0.0;
        for [a, b, c] in &mesh.faces {
            let pa = Vector3::new(
                mesh.vertices[*a].coords[0],
                mesh.vertices[*a].coords[1],
                mesh.vertices[*a].coords[2],
            );
            let pb = Vector3::new(
                mesh.vertices[*b].coords[0],
                mesh.vertices[*b].coords[1],
                mesh.vertices[*b].coords[2],
            );
            let pc = Vector3::new(
                mesh.vertices[*c].coords[0],
                mesh.vertices[*c].coords[1],
                mesh.vertices[*c].coords[2],
            );
            vol += pa.dot(&pb.cross(&pc)) / 6.0;
        }
        assert!(vol > 0.0);
    }

    #[test]
    fn ellipsoid_curvature_matches_spheroid_closed_form() {
        let (mesh, cf) =
            builtin_surface(&SurfaceFamily::Ellipsoid { a: 1.0, b: 1.0, c: 2.0 }, 2).unwrap();
        assert!(mesh.is_closed());
        // Poles (0, 0, +-2): both curvatures c/a^2 = 2.
        // Equator (x^2+y^2=1, z=0): meridian a/c^2 = 1/4, parallel 1/a = 1.
        for (v, p) in mesh.vertices.iter().enumerate() {
            let z = p.coords[2];
            if (z.abs() - 2.0).abs() < 1e-9 {
                assert_relative_eq!(cf.kappa[v][0], 2.0, epsilon = 1e-9);
                assert_relative_eq!(cf.kappa[v][1], 2.0, epsilon = 1e-9);
            }
            if z.abs() < 1e-9 {
                assert_relative_eq!(cf.kappa[v][0], 0.25, epsilon = 1e-9);
                assert_relative_eq!(cf.kappa[v][1], 1.0, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn cap_families_have_boundary_and_constant_curvature() {
        let (mesh, cf) = builtin_surface(
            &SurfaceFamily::SphereCap { sphere_radius: 1.0, polar_angle: 0.5 },
            1,
        )
        .unwrap();
        assert!(!mesh.is_closed());
        assert!(cf.kappa.iter().all(|k| (k[0] - 1.0).abs() < 1e-12));

        let (mesh, cf) = builtin_surface(&SurfaceFamily::SphericalCap { polar_angle: 0.7 }, 1).unwrap();
        assert!(!mesh.is_closed());
        assert!(cf.kappa.iter().all(|k| k[0] == 0.0 && k[1] == 0.0));

        let (mesh, cf) = builtin_surface(
            &SurfaceFamily::GeodesicCapH3 { sphere_radius: 1.0, polar_angle: 0.4 },
            1,
        )
        .unwrap();
        assert!(!mesh.is_closed());
        let want = 1.0 / 1.0f64.tanh();
        assert!(cf.kappa.iter().all(|k| (k[0] - want).abs() < 1e-12));
    }

    #[test]
    fn geodesic_sphere_h3_raw_area() {
        // Intrinsic geometry of the geodesic sphere of radius rho0 is a round
        // sphere of radius sinh(rho0).
        let rho0 = 1.0f64;
        let (mesh, _) = builtin_surface(&SurfaceFamily::GeodesicSphereH3 { radius: rho0 }, 3).unwrap();
        assert!(mesh.is_closed());
        let exact = 4.0 * PI * rho0.sinh().powi(2);
        assert_relative_eq!(mesh.total_area().unwrap(), exact, epsilon = exact * 0.01);
    }

    #[test]
    fn cap_angle_conversions() {
        // Flat: chord 2 rho0 sin(psi/2).
        let psi = cap_angle_for_ball(0, 1.0, 0.5).unwrap();
        assert_relative_eq!(psi, 2.0 * (0.25f64).asin(), epsilon = 1e-14);
        // Equatorial S^2 in S^3: ambient distance equals the polar angle.
        let psi = cap_angle_for_ball(1, PI / 2.0, 0.8).unwrap();
        assert_relative_eq!(psi, 0.8, epsilon = 1e-12);
        // H^3: check round trip through the hyperbolic law of cosines.
        let rho0 = 1.0f64;
        let r = 0.5f64;
        let psi = cap_angle_for_ball(-1, rho0, r).unwrap();
        let cosr = rho0.cosh() * rho0.cosh() - rho0.sinh() * rho0.sinh() * psi.cos();
        assert_relative_eq!(cosr, r.cosh(), epsilon = 1e-12);
        assert!(cap_angle_for_ball(0, 1.0, 5.0).is_err());
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(builtin_surface(&SurfaceFamily::RoundSphere { radius: 0.0 }, 1).is_err());
        assert!(builtin_surface(&SurfaceFamily::Torus { major: 1.0, minor: 1.0 }, 1).is_err());
        assert!(builtin_surface(&SurfaceFamily::PlaneDisk { radius: -2.0 }, 1).is_err());
    }
}
