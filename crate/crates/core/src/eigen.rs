//! Smallest eigenpairs of the generalized problem K u = lambda M u by
//! shift-invert block inverse iteration with Rayleigh-Ritz extraction,
//! M-orthonormalization with full reorthogonalization, and explicit deflation
//! of the constant vector on closed meshes.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fem::OperatorPair;
use crate::sparse::SkylineCholesky;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProblemKind {
    Dirichlet,
    Closed,
}

impl ProblemKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ProblemKind::Dirichlet => "dirichlet",
            ProblemKind::Closed => "closed",
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub seed: u64,
    pub max_iterations: usize,
    pub tolerance: f64,
    pub shift_scale: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            seed: 42,
            max_iterations: 400,
            tolerance: 1e-9,
            shift_scale: 1e-3,
        }
    }
}

#[derive(Clone, Debug)]
pub struct EigenResult {
    /// Ascending; on closed problems the first entry is the first nonzero
    /// eigenvalue (constants are deflated).
    pub eigenvalues: Vec<f64>,
    /// M-orthonormal eigenvectors. For Dirichlet problems these are given in
    /// the full vertex numbering with zeros on the boundary.
    pub eigenfunctions: Vec<Vec<f64>>,
    /// ||K u - lambda M u|| / ||u|| per pair, in the solve numbering.
    pub residual_norms: Vec<f64>,
    pub kind: ProblemKind,
}

/// Rayleigh quotient u^T K u / u^T M u; an upper bound certificate for the
/// fundamental tone of the same problem for any admissible u.
pub fn rayleigh_quotient(op: &OperatorPair, u: &[f64]) -> Result<f64> {
    if u.len() != op.dim() {
        return Err(Error::domain("vector length does not match the operator"));
    }
    let num: f64 = u.iter().zip(op.stiffness.apply(u)).map(|(a, b)| a * b).sum();
    let den: f64 = u.iter().zip(op.mass.apply(u)).map(|(a, b)| a * b).sum();
    if den <= 0.0 {
        return Err(Error::domain("Rayleigh quotient of a (near) zero vector"));
    }
    Ok(num / den)
}

pub fn smallest_eigenpairs(
    op: &OperatorPair,
    k: usize,
    kind: ProblemKind,
    opts: &SolveOptions,
) -> Result<EigenResult> {
    let n = op.dim();
    if k == 0 {
        return Err(Error::domain("need at least one eigenpair"));
    }
    match kind {
        ProblemKind::Dirichlet => {
            if op.dirichlet.is_none() {
                return Err(Error::domain(
                    "dirichlet solve requires a boundary-reduced operator pair",
                ));
            }
        }
        ProblemKind::Closed => {
            if op.dirichlet.is_some() {
                return Err(Error::domain("closed solve on a boundary-reduced pair"));
            }
            if !op.from_closed_mesh {
                return Err(Error::domain("closed solve requires a closed mesh"));
            }
            // The constant vector must be a near-kernel of K.
            let ones = vec![1.0; n];
            let r = op.stiffness.apply(&ones);
            let scale = (0..n)
                .map(|i| op.stiffness.get(i, i).abs())
                .fold(0.0f64, f64::max)
                .max(1e-300);
            let worst = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if worst / scale > 1e-8 {
                return Err(Error::domain(
                    "closed solve requires K * 1 = 0 on a closed mesh",
                ));
            }
        }
    }
    let block = (2 * k).max(k + 3).min(n);
    if block < k + 1 && n > k {
        return Err(Error::domain("problem too small for the requested count"));
    }
    if k >= n {
        return Err(Error::domain(format!(
            "requested {k} pairs from a {n}-dimensional system"
        )));
    }

    // Shift: a small positive multiple of the mean M-scaled diagonal of K.
    let mean_scaled: f64 = (0..n)
        .map(|i| op.stiffness.get(i, i) / op.lumped_mass[i].max(1e-300))
        .sum::<f64>()
        / n as f64;
    let mut sigma = (opts.shift_scale * mean_scaled).max(1e-12);
    let mut factor = None;
    for _attempt in 0..3 {
        let shifted = op.stiffness.linear_combination(1.0, &op.mass, sigma);
        match SkylineCholesky::factor(&shifted) {
            Ok(f) => {
                factor = Some(f);
                break;
            }
            Err(_) => sigma *= 10.0,
        }
    }
    let factor = factor.ok_or_else(|| {
        Error::Factorization("K + sigma M not factorizable after three shift increases".into())
    })?;

    // M-normalized constant mode for deflation.
    let deflate: Option<Vec<f64>> = if kind == ProblemKind::Closed {
        let ones = vec![1.0; n];
        let m1 = op.mass.apply(&ones);
        let nrm: f64 = m1.iter().sum::<f64>().sqrt();
        Some(ones.iter().map(|x| x / nrm).collect())
    } else {
        None
    };
    let project = |x: &mut Vec<f64>| {
        if let Some(c) = &deflate {
            let mc = op.mass.apply(c);
            let coef: f64 = x.iter().zip(&mc).map(|(a, b)| a * b).sum();
            for (xi, ci) in x.iter_mut().zip(c) {
                *xi -= coef * ci;
            }
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut basis: Vec<Vec<f64>> = (0..block)
        .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    for x in &mut basis {
        project(x);
    }

    let m_dot = |a: &[f64], b: &[f64]| -> f64 {
        a.iter().zip(op.mass.apply(b)).map(|(x, y)| x * y).sum()
    };

    let mut best_residual = f64::INFINITY;
    let mut values = vec![0.0; block];
    let mut residuals = vec![f64::INFINITY; block];
    for iteration in 0..opts.max_iterations {
        // Inverse step: Y = (K + sigma M)^{-1} M X.
        let mut ys: Vec<Vec<f64>> = basis
            .iter()
            .map(|x| factor.solve(&op.mass.apply(x)))
            .collect();
        for y in &mut ys {
            project(y);
        }
        // M-orthonormalization, two Gram-Schmidt passes.
        for pass in 0..2 {
            for i in 0..ys.len() {
                for j in 0..i {
                    let (head, tail) = ys.split_at_mut(i);
                    let coef = m_dot(&tail[0], &head[j]);
                    for (yi, yj) in tail[0].iter_mut().zip(&head[j]) {
                        *yi -= coef * yj;
                    }
                }
                let nrm = m_dot(&ys[i], &ys[i]).sqrt();
                if nrm < 1e-200 {
                    // Deflated to nothing; replace with a fresh direction.
                    let fresh: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    ys[i] = fresh;
                    project(&mut ys[i]);
                    if pass == 1 {
                        return Err(Error::NoConvergence {
                            best_residual,
                            iterations: iteration,
                        });
                    }
                } else {
                    for yi in ys[i].iter_mut() {
                        *yi /= nrm;
                    }
                }
            }
        }
        // Rayleigh-Ritz on the block.
        let kys: Vec<Vec<f64>> = ys.iter().map(|y| op.stiffness.apply(y)).collect();
        let mut h = DMatrix::<f64>::zeros(block, block);
        for i in 0..block {
            for j in 0..=i {
                let v: f64 = ys[i].iter().zip(&kys[j]).map(|(a, b)| a * b).sum();
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
        }
        let eig = h.symmetric_eigen();
        let mut order: Vec<usize> = (0..block).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
        let mut next: Vec<Vec<f64>> = Vec::with_capacity(block);
        for (slot, &col) in order.iter().enumerate() {
            let mut x = vec![0.0; n];
            for (j, y) in ys.iter().enumerate() {
                let q = eig.eigenvectors[(j, col)];
                for (xi, yi) in x.iter_mut().zip(y) {
                    *xi += q * yi;
                }
            }
            values[slot] = eig.eigenvalues[col];
            next.push(x);
        }
        basis = next;
        // Residuals of the wanted pairs.
        let mut worst = 0.0f64;
        for i in 0..k {
            let kx = op.stiffness.apply(&basis[i]);
            let mx = op.mass.apply(&basis[i]);
            let mut num = 0.0;
            let mut den = 0.0;
            for j in 0..n {
                let r = kx[j] - values[i] * mx[j];
                num += r * r;
                den += basis[i][j] * basis[i][j];
            }
            residuals[i] = (num / den.max(1e-300)).sqrt();
            worst = worst.max(residuals[i]);
        }
        best_residual = best_residual.min(worst);
        if worst < opts.tolerance {
            let eigenvalues: Vec<f64> = values[..k].to_vec();
            let residual_norms: Vec<f64> = residuals[..k].to_vec();
            let eigenfunctions: Vec<Vec<f64>> = basis[..k]
                .iter()
                .map(|u| match &op.dirichlet {
                    Some(map) => map.reinsert(u),
                    None => u.clone(),
                })
                .collect();
            return Ok(EigenResult {
                eigenvalues,
                eigenfunctions,
                residual_norms,
                kind,
            });
        }
    }
    Err(Error::NoConvergence {
        best_residual,
        iterations: opts.max_iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{apply_dirichlet, assemble, MassScheme, PhiField};
    use crate::surfaces::{builtin_surface, SurfaceFamily};
    use approx::assert_relative_eq;

    #[test]
    fn closed_unit_sphere_spectrum_cluster() {
        // Oracle: lambda_k = k(k+1) on the unit sphere; the first nonzero
        // eigenvalue is 2 with multiplicity 3.
        let (mesh, _) = builtin_surface(&SurfaceFamily::RoundSphere { radius: 1.0 }, 3).unwrap();
        let phi = PhiField::identity(&mesh).unwrap();
        let op = assemble(&mesh, &phi, MassScheme::Consistent).unwrap();
        let res = smallest_eigenpairs(&op, 3, ProblemKind::Closed, &SolveOptions::default()).unwrap();
        for lam in &res.eigenvalues {
            assert_relative_eq!(*lam, 2.0, epsilon = 0.04);
        }
        for r in &res.residual_norms {
            assert!(*r < 1e-8);
        }
        // Deflation: reported eigenfunctions are M-orthogonal to constants.
        let ones = vec![1.0; op.dim()];
        let m1 = op.mass.apply(&ones);
        for u in &res.eigenfunctions {
            let dot: f64 = u.iter().zip(&m1).map(|(a, b)| a * b).sum();
            assert!(dot.abs() < 1e-9, "u^T M 1 = {dot:.3e}");
        }
    }

    #[test]
    fn dirichlet_disk_fundamental_tone() {
        // Oracle: first Dirichlet eigenvalue of the unit disk is j01^2.
        let (mesh, _) = builtin_surface(&SurfaceFamily::PlaneDisk { radius: 1.0 }, 2).unwrap();
        let phi = PhiField::identity(&mesh).unwrap();
        let op = assemble(&mesh, &phi, MassScheme::Consistent).unwrap();
        let red = apply_dirichlet(&op, &mesh).unwrap();
        let res = smallest_eigenpairs(&red, 1, ProblemKind::Dirichlet, &SolveOptions::default())
            .unwrap();
        let j01 = 2.404825557695773f64;
        assert_relative_eq!(res.eigenvalues[0], j01 * j01, epsilon = j01 * j01 * 0.02);
        // Conforming elements overestimate.
        assert!(res.eigenvalues[0] > j01 * j01);
        // Eigenfunction comes back in full numbering, zero on the rim.
        let u = &res.eigenfunctions[0];
        assert_eq!(u.len(), mesh.vertex_count());
        for (v, &flag) in mesh.boundary_vertex.iter().enumerate() {
            if flag {
                assert_eq!(u[v], 0.0);
            }
        }
    }

    #[test]
    fn rayleigh_quotient_certificates() {
        let (mesh, _) = builtin_surface(&SurfaceFamily::RoundSphere { radius: 1.0 }, 2).unwrap();
        let phi = PhiField::identity(&mesh).unwrap();
        let op = assemble(&mesh, &phi, MassScheme::Consistent).unwrap();
        // Constants on a closed mesh sit in the kernel.
        let ones = vec![1.0; op.dim()];
        assert!(rayleigh_quotient(&op, &ones).unwrap().abs() < 1e-10);
        // Eigenfunction reproduces its eigenvalue.
        let res = smallest_eigenpairs(&op, 1, ProblemKind::Closed, &SolveOptions::default()).unwrap();
        let rq = rayleigh_quotient(&op, &res.eigenfunctions[0]).unwrap();
        assert_relative_eq!(rq, res.eigenvalues[0], epsilon = 1e-8);
        // Any vector M-orthogonal to constants gives an upper certificate.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut u: Vec<f64> = (0..op.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let m1 = op.mass.apply(&ones);
        let s: f64 = u.iter().zip(&m1).map(|(a, b)| a * b).sum();
        let t: f64 = ones.iter().zip(&m1).map(|(a, b)| a * b).sum();
        for (ui, oi) in u.iter_mut().zip(&ones) {
            *ui -= s / t * oi;
        }
        assert!(rayleigh_quotient(&op, &u).unwrap() >= res.eigenvalues[0] * 0.98);
        assert!(rayleigh_quotient(&op, &[0.0; 0]).is_err());
    }

    #[test]
    fn p1_on_unit_sphere_matches_laplacian_spectrum() {
        let (mesh, cf) = builtin_surface(&SurfaceFamily::RoundSphere { radius: 1.0 }, 2).unwrap();
        let id = assemble(&mesh, &PhiField::identity(&mesh).unwrap(), MassScheme::Consistent)
            .unwrap();
        let p1 = assemble(
            &mesh,
            &PhiField::newton(&mesh, &cf, 1).unwrap(),
            MassScheme::Consistent,
        )
        .unwrap();
        let opts = SolveOptions::default();
        let a = smallest_eigenpairs(&id, 1, ProblemKind::Closed, &opts).unwrap();
        let b = smallest_eigenpairs(&p1, 1, ProblemKind::Closed, &opts).unwrap();
        let rel = (a.eigenvalues[0] - b.eigenvalues[0]).abs() / a.eigenvalues[0];
        assert!(rel < 1e-10, "relative gap {rel:.3e}");
    }

    #[test]
    fn closed_solve_rejects_open_mesh_operator() {
        let (mesh, _) = builtin_surface(&SurfaceFamily::PlaneDisk { radius: 1.0 }, 0).unwrap();
        let phi = PhiField::identity(&mesh).unwrap();
        let op = assemble(&mesh, &phi, MassScheme::Consistent).unwrap();
        assert!(
            smallest_eigenpairs(&op, 1, ProblemKind::Closed, &SolveOptions::default()).is_err()
        );
    }
}
