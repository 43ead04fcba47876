//! Comparisons between operator tones sharing a mesh: the L_r vs L_s factor
//! mu(P_r)/nu(P_s) and the Phi eigenvalue sandwich around the Laplace tone.

use super::BoundConstants;
use crate::curvature::{spectral_extrema, CurvatureField};
use crate::eigen::{smallest_eigenpairs, ProblemKind, SolveOptions};
use crate::error::{Error, Result};
use crate::fem::{apply_dirichlet, assemble, MassScheme, PhiField};
use crate::mesh::TriMesh;

#[derive(Clone, Copy, Debug)]
pub struct ComparisonOutcome {
    pub factor: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
    pub lambda_r: f64,
    pub lambda_s: f64,
    pub mu_r: f64,
    pub nu_s: f64,
}

/// Solves the problem appropriate for the mesh: Dirichlet when a boundary is
/// present, otherwise the closed problem's first nonzero eigenvalue.
pub fn fundamental_tone(mesh: &TriMesh, phi: &PhiField, opts: &SolveOptions) -> Result<f64> {
    let op = assemble(mesh, phi, MassScheme::Consistent)?;
    if mesh.is_closed() {
        Ok(smallest_eigenpairs(&op, 1, ProblemKind::Closed, opts)?.eigenvalues[0])
    } else {
        let red = apply_dirichlet(&op, mesh)?;
        Ok(smallest_eigenpairs(&red, 1, ProblemKind::Dirichlet, opts)?.eigenvalues[0])
    }
}

/// lambda^{L_r} >= mu(P_r)/nu(P_s) * lambda^{L_s}, checked with computed
/// tones on the same mesh.
pub fn comparison_bound(
    mesh: &TriMesh,
    cf: &CurvatureField,
    r: usize,
    s: usize,
    opts: &SolveOptions,
    consts: &BoundConstants,
    tol_rel: f64,
) -> Result<ComparisonOutcome> {
    let (mu_r, _) = spectral_extrema(mesh, cf, r)?;
    if mu_r <= 0.0 {
        return Err(Error::NotElliptic {
            what: format!("P_{r}"),
            margin: mu_r,
        });
    }
    let (mu_s, nu_s) = spectral_extrema(mesh, cf, s)?;
    if mu_s <= 0.0 {
        return Err(Error::NotElliptic {
            what: format!("P_{s}"),
            margin: mu_s,
        });
    }
    let phi_r = PhiField::newton(mesh, cf, r)?;
    let phi_s = PhiField::newton(mesh, cf, s)?;
    let lambda_r = fundamental_tone(mesh, &phi_r, opts)?;
    let lambda_s = fundamental_tone(mesh, &phi_s, opts)?;
    let factor = consts.comparison_scale * mu_r / nu_s;
    let rhs = factor * lambda_s;
    Ok(ComparisonOutcome {
        factor,
        lhs: lambda_r,
        rhs,
        pass: lambda_r >= rhs * (1.0 - tol_rel) - f64::EPSILON,
        lambda_r,
        lambda_s,
        mu_r,
        nu_s,
    })
}

#[derive(Clone, Copy, Debug)]
pub struct SandwichOutcome {
    pub mu: f64,
    pub nu: f64,
    pub lambda_phi: f64,
    pub lambda_delta: f64,
    pub pass: bool,
}

/// nu(Phi) lambda^Delta >= lambda^{L_Phi} >= mu(Phi) lambda^Delta on the same
/// mesh and problem kind.
pub fn phi_sandwich(
    mesh: &TriMesh,
    phi: &PhiField,
    opts: &SolveOptions,
    consts: &BoundConstants,
    tol_rel: f64,
) -> Result<SandwichOutcome> {
    let (mu, nu) = phi.eigen_range();
    if mu <= 0.0 {
        return Err(Error::NotElliptic {
            what: "Phi".into(),
            margin: mu,
        });
    }
    let lambda_phi = fundamental_tone(mesh, phi, opts)?;
    let lambda_delta = fundamental_tone(mesh, &PhiField::identity(mesh)?, opts)?;
    let mu_eff = consts.sandwich_mu_scale * mu;
    let upper_ok = nu * lambda_delta >= lambda_phi * (1.0 - tol_rel);
    let lower_ok = lambda_phi >= mu_eff * lambda_delta * (1.0 - tol_rel);
    Ok(SandwichOutcome {
        mu: mu_eff,
        nu,
        lambda_phi,
        lambda_delta,
        pass: upper_ok && lower_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surfaces::{builtin_surface, SurfaceFamily};
    use approx::assert_relative_eq;

    #[test]
    fn unit_sphere_p1_equals_laplacian() {
        let (mesh, cf) = builtin_surface(&SurfaceFamily::RoundSphere { radius: 1.0 }, 2).unwrap();
        let out = comparison_bound(
            &mesh,
            &cf,
            1,
            0,
            &SolveOptions::default(),
            &BoundConstants::default(),
            1e-6,
        )
        .unwrap();
        assert_relative_eq!(out.factor, 1.0, epsilon = 1e-12);
        assert!(out.pass);
        assert_relative_eq!(out.lambda_r, out.lambda_s, epsilon = 1e-9);
    }

    #[test]
    fn sphere_radius_two_scales_exactly() {
        // P_1 = (1/2) Id on the sphere of radius 2, so lambda^{L_1} is exactly
        // half of lambda^Delta; both matrices share the assembly path.
        let (mesh, cf) = builtin_surface(&SurfaceFamily::RoundSphere { radius: 2.0 }, 2).unwrap();
        let out = comparison_bound(
            &mesh,
            &cf,
            1,
            0,
            &SolveOptions::default(),
            &BoundConstants::default(),
            1e-6,
        )
        .unwrap();
        assert_relative_eq!(out.factor, 0.5, epsilon = 1e-12);
        let ratio = out.lambda_r / out.lambda_s;
        assert_relative_eq!(ratio, 0.5, epsilon = 1e-6);
        assert!(out.pass);
        // Scaling oracle: lambda^Delta(S^2_rho) = 2/rho^2.
        assert_relative_eq!(out.lambda_s, 0.5, epsilon = 0.02);
    }

    #[test]
    fn ellipsoid_comparison_holds_strictly() {
        let (mesh, cf) = builtin_surface(
            &SurfaceFamily::Ellipsoid { a: 1.0, b: 1.0, c: 1.5 },
            2,
        )
        .unwrap();
        let out = comparison_bound(
            &mesh,
            &cf,
            1,
            0,
            &SolveOptions::default(),
            &BoundConstants::default(),
            1e-6,
        )
        .unwrap();
        assert!(out.pass);
        assert!(out.lhs > out.rhs, "strict inequality expected off the sphere");
    }

    #[test]
    fn torus_newton_operator_is_rejected() {
        let (mesh, cf) =
            builtin_surface(&SurfaceFamily::Torus { major: 2.0, minor: 1.0 }, 0).unwrap();
        let err = comparison_bound(
            &mesh,
            &cf,
            1,
            0,
            &SolveOptions::default(),
            &BoundConstants::default(),
            1e-6,
        );
        match err {
            Err(Error::NotElliptic { what, .. }) => assert_eq!(what, "P_1"),
            other => panic!("expected ellipticity failure, got {other:?}"),
        }
    }

    #[test]
    fn scalar_sandwich_is_tight() {
        let (mesh, _) = builtin_surface(&SurfaceFamily::PlaneDisk { radius: 1.0 }, 1).unwrap();
        let phi = PhiField::constant(&mesh, [3.0, 0.0, 3.0]).unwrap();
        let out = phi_sandwich(
            &mesh,
            &phi,
            &SolveOptions::default(),
            &BoundConstants::default(),
            1e-6,
        )
        .unwrap();
        assert!(out.pass);
        assert_relative_eq!(out.mu, 3.0, epsilon = 1e-12);
        assert_relative_eq!(out.nu, 3.0, epsilon = 1e-12);
        assert_relative_eq!(out.lambda_phi, 3.0 * out.lambda_delta, epsilon = 1e-6);
    }

    #[test]
    fn anisotropic_sandwich_is_strict() {
        let (mesh, _) = builtin_surface(&SurfaceFamily::PlaneDisk { radius: 1.0 }, 1).unwrap();
        let phi = PhiField::constant(&mesh, [1.0, 0.0, 2.0]).unwrap();
        let out = phi_sandwich(
            &mesh,
            &phi,
            &SolveOptions::default(),
            &BoundConstants::default(),
            1e-6,
        )
        .unwrap();
        assert!(out.pass);
        assert!(out.lambda_phi < out.nu * out.lambda_delta);
        assert!(out.lambda_phi > out.mu * out.lambda_delta);
    }
}
