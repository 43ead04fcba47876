//! Extrinsic radius: the radius of the smallest ambient geodesic ball
//! containing a closed mesh, together with its center (the barycenter).
//!
//! The flat model uses the exact randomized minimal-enclosing-ball walk; the
//! curved models run the same incremental walk with geodesic circumcenters
//! obtained from small Gram-matrix solves. A subgradient descent step is kept
//! as a fallback for degenerate spherical data that no open hemisphere
//! contains.

use nalgebra::{DMatrix, DVector, Matrix2, Matrix3, Vector2, Vector3};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::mesh::TriMesh;
use crate::spaceform::{AmbientPoint, Coords, SpaceForm};

const SHUFFLE_SEED: u64 = 0x5eed_ba11;
const ENCLOSE_TOL: f64 = 1e-9;

pub fn extrinsic_radius(mesh: &TriMesh) -> Result<(f64, AmbientPoint)> {
    if !mesh.is_closed() {
        return Err(Error::BoundaryPresent);
    }
    let pts: Vec<Coords> = mesh.vertices.iter().map(|p| p.coords).collect();
    let sf = &mesh.space_form;
    match sf.curvature() {
        0 => {
            let (c, r) = euclidean_min_ball(&pts);
            Ok((r, AmbientPoint::from_coords(c)))
        }
        _ => {
            if sf.curvature() == 1 {
                if let Some(out) = spherical_degenerate_center(sf, &pts) {
                    return Ok(out);
                }
            }
            let (c, r) = geodesic_min_ball(sf, &pts)?;
            Ok((r, AmbientPoint::from_coords(c)))
        }
    }
}

// ---------------------------------------------------------------------------
// Euclidean exact minimal enclosing ball (randomized incremental walk)
// ---------------------------------------------------------------------------

fn v3(c: &Coords) -> Vector3<f64> {
    Vector3::new(c[0], c[1], c[2])
}

fn euclidean_min_ball(pts: &[Coords]) -> (Coords, f64) {
    let mut shuffled: Vec<Vector3<f64>> = pts.iter().map(v3).collect();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(SHUFFLE_SEED));
    let mut ball: Option<(Vector3<f64>, f64)> = None;
    for i in 0..shuffled.len() {
        if !inside(&ball, &shuffled[i]) {
            ball = Some(ball_one(&shuffled[..i], shuffled[i]));
        }
    }
    let (c, r) = ball.unwrap_or((Vector3::zeros(), 0.0));
    (Coords::new(c[0], c[1], c[2], 0.0), r)
}

fn inside(ball: &Option<(Vector3<f64>, f64)>, p: &Vector3<f64>) -> bool {
    match ball {
        None => false,
        Some((c, r)) => (p - c).norm() <= r * (1.0 + ENCLOSE_TOL) + 1e-14,
    }
}

fn ball_one(pts: &[Vector3<f64>], q: Vector3<f64>) -> (Vector3<f64>, f64) {
    let mut ball = (q, 0.0);
    for j in 0..pts.len() {
        if !inside(&Some(ball), &pts[j]) {
            ball = ball_two(&pts[..j], q, pts[j]);
        }
    }
    ball
}

fn ball_two(pts: &[Vector3<f64>], q1: Vector3<f64>, q2: Vector3<f64>) -> (Vector3<f64>, f64) {
    let mut ball = diameter_ball(q1, q2);
    for j in 0..pts.len() {
        if !inside(&Some(ball), &pts[j]) {
            ball = ball_three(&pts[..j], q1, q2, pts[j]);
        }
    }
    ball
}

fn ball_three(
    pts: &[Vector3<f64>],
    q1: Vector3<f64>,
    q2: Vector3<f64>,
    q3: Vector3<f64>,
) -> (Vector3<f64>, f64) {
    let mut ball = circum3(q1, q2, q3).unwrap_or_else(|| diameter_ball(q1, q2));
    for j in 0..pts.len() {
        if !inside(&Some(ball), &pts[j]) {
            if let Some(b) = circum4(q1, q2, q3, pts[j]) {
                ball = b;
            }
        }
    }
    ball
}

fn diameter_ball(a: Vector3<f64>, b: Vector3<f64>) -> (Vector3<f64>, f64) {
    let c = (a + b) * 0.5;
    (c, (a - c).norm().max((b - c).norm()))
}

fn circum3(a: Vector3<f64>, b: Vector3<f64>, c: Vector3<f64>) -> Option<(Vector3<f64>, f64)> {
    let u = b - a;
    let w = c - a;
    let g = Matrix2::new(u.dot(&u), u.dot(&w), u.dot(&w), w.dot(&w));
    let rhs = Vector2::new(0.5 * u.dot(&u), 0.5 * w.dot(&w));
    let sol = g.lu().solve(&rhs)?;
    let center = a + u * sol[0] + w * sol[1];
    let r = (a - center)
        .norm()
        .max((b - center).norm())
        .max((c - center).norm());
    if r.is_finite() {
        Some((center, r))
    } else {
        None
    }
}

fn circum4(
    a: Vector3<f64>,
    b: Vector3<f64>,
    c: Vector3<f64>,
    d: Vector3<f64>,
) -> Option<(Vector3<f64>, f64)> {
    let rows = [b - a, c - a, d - a];
    let m = Matrix3::from_rows(&[rows[0].transpose(), rows[1].transpose(), rows[2].transpose()]);
    let rhs = Vector3::new(
        0.5 * rows[0].dot(&rows[0]),
        0.5 * rows[1].dot(&rows[1]),
        0.5 * rows[2].dot(&rows[2]),
    );
    let sol = m.lu().solve(&rhs)?;
    let center = a + sol;
    let r = [a, b, c, d]
        .iter()
        .map(|p| (p - center).norm())
        .fold(0.0f64, f64::max);
    if r.is_finite() {
        Some((center, r))
    } else {
        None
    }
}

// ---------------------------------------------------------------------------
// Geodesic minimal enclosing ball on the curved models
// ---------------------------------------------------------------------------

/// Circumcenter of 2..4 support points: the model point equidistant from all
/// of them inside their span, via a Gram solve.
fn circumcenter(sf: &SpaceForm, support: &[Coords]) -> Option<(Coords, f64)> {
    let k = support.len();
    if k == 1 {
        return Some((support[0], 0.0));
    }
    let mut g = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            g[(i, j)] = sf.dot(&support[i], &support[j]);
        }
    }
    let beta = g.lu().solve(&DVector::from_element(k, 1.0))?;
    let s: f64 = beta.iter().sum();
    let t = match sf.curvature() {
        1 => {
            if s <= 1e-12 {
                return None; // no hemisphere-sized ball through these points
            }
            1.0 / s.sqrt()
        }
        _ => {
            if s >= -1e-12 {
                return None;
            }
            -1.0 / (-s).sqrt()
        }
    };
    let mut x = Coords::zeros();
    for (i, p) in support.iter().enumerate() {
        x += p * (t * beta[i]);
    }
    // Future sheet for the hyperboloid.
    if sf.curvature() == -1 && x[0] < 0.0 {
        x = -x;
    }
    let r = support
        .iter()
        .map(|p| sf.distance_unchecked(&x, p))
        .fold(0.0f64, f64::max);
    if r.is_finite() {
        Some((x, r))
    } else {
        None
    }
}

fn ginside(sf: &SpaceForm, ball: &Option<(Coords, f64)>, p: &Coords) -> bool {
    match ball {
        None => false,
        Some((c, r)) => sf.distance_unchecked(c, p) <= r + ENCLOSE_TOL * (1.0 + r),
    }
}

fn geodesic_min_ball(sf: &SpaceForm, pts: &[Coords]) -> Result<(Coords, f64)> {
    let mut shuffled: Vec<Coords> = pts.to_vec();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(SHUFFLE_SEED));
    let mut ball: Option<(Coords, f64)> = None;
    for i in 0..shuffled.len() {
        if !ginside(sf, &ball, &shuffled[i]) {
            ball = gball_fixed(sf, &shuffled[..i], &[shuffled[i]]);
        }
    }
    let ball = ball.and_then(|b| {
        let ok = pts.iter().all(|p| ginside(sf, &Some(b), p));
        ok.then_some(b)
    });
    match ball {
        Some((c, r)) => Ok((c, r)),
        // Degenerate support solves: fall back to subgradient descent.
        None => minimax_descent(sf, pts),
    }
}

/// Incremental walk with `fixed` boundary points (1..=4).
fn gball_fixed(sf: &SpaceForm, pts: &[Coords], fixed: &[Coords]) -> Option<(Coords, f64)> {
    let mut ball = circumcenter(sf, fixed);
    if fixed.len() == 4 {
        return ball;
    }
    for j in 0..pts.len() {
        if !ginside(sf, &ball, &pts[j]) {
            let mut support = fixed.to_vec();
            support.push(pts[j]);
            if let Some(b) = gball_fixed(sf, &pts[..j], &support) {
                ball = Some(b);
            }
        }
    }
    ball
}

/// Iterative minimax descent: start at the best vertex and repeatedly step
/// toward the current farthest point with shrinking step sizes.
pub fn minimax_descent(sf: &SpaceForm, pts: &[Coords]) -> Result<(Coords, f64)> {
    let far = |x: &Coords| -> (usize, f64) {
        let mut best = (0usize, -1.0f64);
        for (i, p) in pts.iter().enumerate() {
            let d = sf.distance_unchecked(x, p);
            if d > best.1 {
                best = (i, d);
            }
        }
        best
    };
    let mut center = pts
        .iter()
        .copied()
        .min_by(|a, b| far(a).1.partial_cmp(&far(b).1).unwrap())
        .ok_or_else(|| Error::domain("empty vertex set"))?;
    let mut best = (far(&center).1, center);
    for k in 1..=2000 {
        let (i, d) = far(&center);
        if d < best.0 {
            best = (d, center);
        }
        if d < 1e-15 {
            break;
        }
        let dir = sf.log(&center, &pts[i]);
        let step = 1.0 / (k as f64 + 1.0);
        center = sf.project_point(&sf.exp(&center, &(dir * step)))?;
    }
    let (d, c) = best;
    Ok((c, d))
}

/// Exact handling of spherical data whose span is a proper subspace of R^4
/// (e.g. the equatorial great sphere): the minimax center is the unit normal
/// of the span and every point is at distance pi/2.
fn spherical_degenerate_center(sf: &SpaceForm, pts: &[Coords]) -> Option<(f64, AmbientPoint)> {
    let mut m = nalgebra::Matrix4::<f64>::zeros();
    for p in pts {
        m += p * p.transpose();
    }
    let eig = m.symmetric_eigen();
    let (mut arg, mut min) = (0usize, f64::INFINITY);
    let mut max = 0.0f64;
    for i in 0..4 {
        let v = eig.eigenvalues[i];
        max = max.max(v);
        if v < min {
            min = v;
            arg = i;
        }
    }
    if min > 1e-10 * max {
        return None;
    }
    let mut axis: Coords = eig.eigenvectors.column(arg).into_owned();
    axis /= axis.norm();
    // Deterministic sign.
    for k in 0..4 {
        if axis[k].abs() > 1e-12 {
            if axis[k] < 0.0 {
                axis = -axis;
            }
            break;
        }
    }
    let r = pts
        .iter()
        .map(|p| sf.distance_unchecked(&axis, p))
        .fold(0.0f64, f64::max);
    Some((r, AmbientPoint::from_coords(axis)))
}
