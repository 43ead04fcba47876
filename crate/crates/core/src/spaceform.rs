//! Simply connected space forms of curvature c in {1, 0, -1}.
//!
//! Models: Euclidean coordinates for c = 0, the unit sphere in R^{d+1} for
//! c = 1, and the upper hyperboloid sheet in Minkowski R^{d+1} (signature
//! -,+,...,+) for c = -1. Coordinates are stored in a fixed 4-slot vector;
//! unused trailing slots stay zero.

use crate::error::{Error, Result};
use nalgebra::SVector;

pub type Coords = SVector<f64, 4>;

/// Absolute tolerance for the model constraint of stored points.
pub const MODEL_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SpaceForm {
    curvature: i8,
    /// Dimension of the space form itself (n + 1 for hypersurfaces M^n).
    dim: usize,
}

impl SpaceForm {
    pub fn new(curvature: i32, dim: usize) -> Result<Self> {
        if !matches!(curvature, -1 | 0 | 1) {
            return Err(Error::domain(format!(
                "curvature sign must be -1, 0 or 1, got {curvature}"
            )));
        }
        if !(2..=3).contains(&dim) {
            return Err(Error::domain(format!(
                "space form dimension must be 2 or 3 (got {dim}); only surfaces in \
                 three-dimensional space forms are meshed"
            )));
        }
        Ok(SpaceForm {
            curvature: curvature as i8,
            dim,
        })
    }

    pub fn euclidean(dim: usize) -> Self {
        SpaceForm::new(0, dim).expect("valid dimension")
    }

    pub fn spherical(dim: usize) -> Self {
        SpaceForm::new(1, dim).expect("valid dimension")
    }

    pub fn hyperbolic(dim: usize) -> Self {
        SpaceForm::new(-1, dim).expect("valid dimension")
    }

    pub fn curvature(&self) -> i32 {
        self.curvature as i32
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of coordinates a stored point actually uses.
    pub fn embedding_dim(&self) -> usize {
        if self.curvature == 0 {
            self.dim
        } else {
            self.dim + 1
        }
    }

    /// Ambient model metric on coordinate vectors (Minkowski for c = -1).
    pub fn dot(&self, a: &Coords, b: &Coords) -> f64 {
        if self.curvature == -1 {
            -a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
        } else {
            a.dot(b)
        }
    }

    pub fn norm(&self, a: &Coords) -> f64 {
        self.dot(a, a).max(0.0).sqrt()
    }

    fn model_name(&self) -> &'static str {
        match self.curvature {
            0 => "euclidean",
            1 => "sphere",
            _ => "hyperboloid",
        }
    }

    /// Checks the model constraint of a coordinate vector.
    pub fn check_point(&self, x: &Coords) -> Result<()> {
        for k in self.embedding_dim()..4 {
            if x[k] != 0.0 {
                return Err(Error::InvalidPoint {
                    model: self.model_name(),
                    defect: x[k].abs(),
                });
            }
        }
        let defect = match self.curvature {
            0 => 0.0,
            1 => (self.dot(x, x) - 1.0).abs(),
            _ => {
                if x[0] <= 0.0 {
                    return Err(Error::InvalidPoint {
                        model: self.model_name(),
                        defect: -x[0],
                    });
                }
                (self.dot(x, x) + 1.0).abs()
            }
        };
        if defect > MODEL_TOL {
            return Err(Error::InvalidPoint {
                model: self.model_name(),
                defect,
            });
        }
        Ok(())
    }

    /// Projects a coordinate vector onto the model (used after averaging).
    pub fn project_point(&self, x: &Coords) -> Result<Coords> {
        let mut y = *x;
        for k in self.embedding_dim()..4 {
            y[k] = 0.0;
        }
        match self.curvature {
            0 => Ok(y),
            1 => {
                let n = y.norm();
                if n < 1e-14 {
                    return Err(Error::domain("cannot project the origin onto the sphere"));
                }
                Ok(y / n)
            }
            _ => {
                let q = -self.dot(&y, &y);
                if q <= 1e-14 || y[0] <= 0.0 {
                    return Err(Error::domain(
                        "cannot project a non-timelike vector onto the hyperboloid",
                    ));
                }
                Ok(y / q.sqrt())
            }
        }
    }

    /// Geodesic distance between two points of the model.
    pub fn distance(&self, p: &AmbientPoint, q: &AmbientPoint) -> Result<f64> {
        self.check_point(&p.coords)?;
        self.check_point(&q.coords)?;
        Ok(self.distance_unchecked(&p.coords, &q.coords))
    }

    /// Distance on raw coordinates; callers guarantee model membership.
    pub fn distance_unchecked(&self, p: &Coords, q: &Coords) -> f64 {
        match self.curvature {
            0 => (q - p).norm(),
            1 => self.dot(p, q).clamp(-1.0, 1.0).acos(),
            _ => {
                let c = (-self.dot(p, q)).max(1.0);
                c.acosh()
            }
        }
    }

    /// Hessian comparison function v(rho): coth rho, 1/rho, cot rho.
    pub fn hessian_comparison(&self, rho: f64) -> Result<f64> {
        if rho <= 0.0 {
            return Err(Error::domain(format!(
                "hessian comparison requires rho > 0, got {rho}"
            )));
        }
        match self.curvature {
            0 => Ok(1.0 / rho),
            -1 => Ok(1.0 / rho.tanh()),
            _ => {
                if rho >= std::f64::consts::FRAC_PI_2 {
                    return Err(Error::domain(format!(
                        "cot comparison needs rho < pi/2 on the sphere, got {rho}"
                    )));
                }
                Ok(1.0 / rho.tan())
            }
        }
    }

    /// rho * v(rho); >= 1 for c <= 0 and <= 1 for c = 1.
    pub fn rho_times_v(&self, rho: f64) -> Result<f64> {
        Ok(rho * self.hessian_comparison(rho)?)
    }

    /// Log map: tangent vector at p whose geodesic reaches q; zero for p = q.
    pub fn log(&self, p: &Coords, q: &Coords) -> Coords {
        match self.curvature {
            0 => q - p,
            1 => {
                let d = self.distance_unchecked(p, q);
                if d < 1e-15 {
                    return Coords::zeros();
                }
                let w = q - p * self.dot(p, q);
                let n = w.norm();
                if n < 1e-15 {
                    // Antipodal: direction is not unique; pick deterministically.
                    let mut t = self.tangent_basis(p)[0];
                    t *= d;
                    return t;
                }
                w * (d / n)
            }
            _ => {
                let d = self.distance_unchecked(p, q);
                if d < 1e-15 {
                    return Coords::zeros();
                }
                let w = q + p * self.dot(p, q);
                let n = self.norm(&w);
                if n < 1e-15 {
                    return Coords::zeros();
                }
                w * (d / n)
            }
        }
    }

    /// Exponential map at p for a tangent vector v.
    pub fn exp(&self, p: &Coords, v: &Coords) -> Coords {
        match self.curvature {
            0 => p + v,
            1 => {
                let t = v.norm();
                if t < 1e-15 {
                    return *p;
                }
                p * t.cos() + v * (t.sin() / t)
            }
            _ => {
                let t = self.norm(v);
                if t < 1e-15 {
                    return *p;
                }
                p * t.cosh() + v * (t.sinh() / t)
            }
        }
    }

    /// Removes the component normal to the model at p, leaving a tangent vector.
    pub fn project_tangent(&self, p: &Coords, w: &Coords) -> Coords {
        let mut v = *w;
        for k in self.embedding_dim()..4 {
            v[k] = 0.0;
        }
        match self.curvature {
            0 => v,
            1 => v - p * self.dot(p, &v),
            // <p,p> = -1, so the tangential part is v + <p,v> p.
            _ => v + p * self.dot(p, &v),
        }
    }

    /// Parallel transport of a tangent vector at p to the tangent space at q
    /// along the connecting geodesic.
    pub fn transport(&self, p: &Coords, q: &Coords, v: &Coords) -> Coords {
        match self.curvature {
            0 => *v,
            1 => {
                let c = self.dot(p, q);
                if (1.0 + c).abs() < 1e-14 {
                    return *v; // antipodal: transport undefined, keep as is
                }
                v - (p + q) * (self.dot(v, q) / (1.0 + c))
            }
            _ => {
                let c = self.dot(p, q);
                v + (p + q) * (self.dot(v, q) / (1.0 - c))
            }
        }
    }

    /// Deterministic orthonormal basis of the tangent space at p
    /// (model metric; three vectors for dim = 3).
    pub fn tangent_basis(&self, p: &Coords) -> [Coords; 3] {
        let mut basis = [Coords::zeros(); 3];
        let mut count = 0;
        for axis in 0..4 {
            if count == self.dim {
                break;
            }
            let mut e = Coords::zeros();
            e[axis] = 1.0;
            let mut t = self.project_tangent(p, &e);
            // Gram-Schmidt against vectors found so far.
            for b in basis.iter().take(count) {
                t -= b * self.dot(&t, b);
            }
            let n = self.dot(&t, &t);
            if n > 1e-8 {
                basis[count] = t / n.sqrt();
                count += 1;
            }
        }
        debug_assert_eq!(count, self.dim, "tangent basis construction failed");
        basis
    }

    /// Cross product inside the tangent space at p: a vector model-orthogonal
    /// to both arguments with |result| = |u||w| sin(angle).
    pub fn tangent_cross(&self, p: &Coords, u: &Coords, w: &Coords) -> Coords {
        if self.curvature == 0 {
            let a = nalgebra::Vector3::new(u[0], u[1], u[2]);
            let b = nalgebra::Vector3::new(w[0], w[1], w[2]);
            let c = a.cross(&b);
            Coords::new(c[0], c[1], c[2], 0.0)
        } else {
            let basis = self.tangent_basis(p);
            let a = nalgebra::Vector3::new(
                self.dot(u, &basis[0]),
                self.dot(u, &basis[1]),
                self.dot(u, &basis[2]),
            );
            let b = nalgebra::Vector3::new(
                self.dot(w, &basis[0]),
                self.dot(w, &basis[1]),
                self.dot(w, &basis[2]),
            );
            let c = a.cross(&b);
            basis[0] * c[0] + basis[1] * c[1] + basis[2] * c[2]
        }
    }
}

/// A point of a space-form model, stored in embedding coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AmbientPoint {
    pub coords: Coords,
}

impl AmbientPoint {
    /// Validating constructor; `xs` must hold `embedding_dim` coordinates.
    pub fn new(sf: &SpaceForm, xs: &[f64]) -> Result<Self> {
        if xs.len() != sf.embedding_dim() {
            return Err(Error::domain(format!(
                "expected {} coordinates, got {}",
                sf.embedding_dim(),
                xs.len()
            )));
        }
        let mut coords = Coords::zeros();
        for (k, &x) in xs.iter().enumerate() {
            coords[k] = x;
        }
        sf.check_point(&coords)?;
        Ok(AmbientPoint { coords })
    }

    /// Wraps raw coordinates that are already known to satisfy the model.
    pub fn from_coords(coords: Coords) -> Self {
        AmbientPoint { coords }
    }
}
