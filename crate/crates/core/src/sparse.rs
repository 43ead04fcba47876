//! Minimal sparse kernel: CSR storage, reverse Cuthill-McKee ordering and an
//! envelope (skyline) Cholesky factorization. Mesh stiffness/mass matrices at
//! desk scale factor comfortably once RCM keeps the envelope tight.

use std::io::Write;

use crate::error::{Error, Result};

/// Symmetric sparse matrix in CSR with the full (both triangles) pattern.
#[derive(Clone, Debug)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from triplets, summing duplicates.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_unstable_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx: Vec<usize> = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut cur_row = 0usize;
        for (i, j, v) in triplets {
            debug_assert!(i < n && j < n);
            while cur_row < i {
                cur_row += 1;
                row_ptr[cur_row] = col_idx.len();
            }
            if col_idx.len() > row_ptr[cur_row] && *col_idx.last().unwrap() == j {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(j);
                values.push(v);
            }
        }
        while cur_row < n {
            cur_row += 1;
            row_ptr[cur_row] = col_idx.len();
        }
        CsrMatrix {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.col_idx[a..b], &self.values[a..b])
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            let mut acc = 0.0;
            for (&j, &v) in cols.iter().zip(vals) {
                acc += v * x[j];
            }
            y[i] = acc;
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec(x, &mut y);
        y
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    /// Largest relative asymmetry |a_ij - a_ji| / max|a|.
    pub fn symmetry_defect(&self) -> f64 {
        let scale = self
            .values
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(1e-300);
        let mut worst = 0.0f64;
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst / scale
    }

    /// Restriction to the index subset `keep` (renumbered in order).
    pub fn restrict(&self, keep: &[usize]) -> CsrMatrix {
        let mut new_of_old = vec![usize::MAX; self.n];
        for (new, &old) in keep.iter().enumerate() {
            new_of_old[old] = new;
        }
        let mut triplets = Vec::new();
        for (new_i, &old_i) in keep.iter().enumerate() {
            let (cols, vals) = self.row(old_i);
            for (&j, &v) in cols.iter().zip(vals) {
                if new_of_old[j] != usize::MAX {
                    triplets.push((new_i, new_of_old[j], v));
                }
            }
        }
        CsrMatrix::from_triplets(keep.len(), triplets)
    }

    /// a * self + b * other, matching patterns not required.
    pub fn linear_combination(&self, a: f64, other: &CsrMatrix, b: f64) -> CsrMatrix {
        let mut triplets = Vec::with_capacity(self.nnz() + other.nnz());
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                triplets.push((i, j, a * v));
            }
            let (cols, vals) = other.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                triplets.push((i, j, b * v));
            }
        }
        CsrMatrix::from_triplets(self.n, triplets)
    }

    /// MatrixMarket coordinate output (symmetric: lower triangle only).
    pub fn write_matrix_market(&self, w: &mut impl Write) -> Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate real symmetric")?;
        let mut entries = Vec::new();
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                if j <= i {
                    entries.push((i + 1, j + 1, v));
                }
            }
        }
        writeln!(w, "{} {} {}", self.n, self.n, entries.len())?;
        for (i, j, v) in entries {
            writeln!(w, "{i} {j} {v:.17e}")?;
        }
        Ok(())
    }
}

/// Reverse Cuthill-McKee ordering: returns `perm` with perm[new] = old.
pub fn rcm_order(n: usize, adjacency: &[Vec<usize>]) -> Vec<usize> {
    let degree: Vec<usize> = adjacency.iter().map(|a| a.len()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        // Start each component from a pseudo-peripheral vertex: take the
        // minimum-degree unvisited vertex and run one BFS to the far end.
        let start = (0..n)
            .filter(|&v| !visited[v])
            .min_by_key(|&v| degree[v])
            .unwrap();
        let start = bfs_far_end(start, adjacency, &visited);
        let mut queue = std::collections::VecDeque::new();
        visited[start] = true;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nbrs: Vec<usize> = adjacency[v]
                .iter()
                .copied()
                .filter(|&u| !visited[u])
                .collect();
            nbrs.sort_unstable_by_key(|&u| degree[u]);
            for u in nbrs {
                visited[u] = true;
                queue.push_back(u);
            }
        }
    }
    order.reverse();
    order
}

fn bfs_far_end(start: usize, adjacency: &[Vec<usize>], visited_mask: &[bool]) -> usize {
    let mut dist = vec![usize::MAX; adjacency.len()];
    let mut queue = std::collections::VecDeque::new();
    dist[start] = 0;
    queue.push_back(start);
    let mut last = start;
    while let Some(v) = queue.pop_front() {
        last = v;
        for &u in &adjacency[v] {
            if dist[u] == usize::MAX && !visited_mask[u] {
                dist[u] = dist[v] + 1;
                queue.push_back(u);
            }
        }
    }
    last
}

/// Envelope Cholesky of a symmetric positive definite matrix, with an RCM
/// permutation computed from the sparsity pattern.
pub struct SkylineCholesky {
    n: usize,
    /// perm[new] = old
    perm: Vec<usize>,
    /// Start column of each permuted row's envelope.
    first: Vec<usize>,
    /// env[env_ptr[i] + (j - first[i])] = L[i][j]
    env_ptr: Vec<usize>,
    env: Vec<f64>,
}

impl SkylineCholesky {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.n;
        let adjacency: Vec<Vec<usize>> = (0..n)
            .map(|i| a.row(i).0.iter().copied().filter(|&j| j != i).collect())
            .collect();
        let perm = rcm_order(n, &adjacency);
        let mut iperm = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            iperm[old] = new;
        }
        // Envelope extents in the permuted numbering.
        let mut first: Vec<usize> = (0..n).collect();
        for old_i in 0..n {
            let i = iperm[old_i];
            for &old_j in a.row(old_i).0 {
                let j = iperm[old_j];
                if j < i {
                    first[i] = first[i].min(j);
                }
            }
        }
        let mut env_ptr = vec![0usize; n + 1];
        for i in 0..n {
            env_ptr[i + 1] = env_ptr[i] + (i - first[i] + 1);
        }
        let mut env = vec![0.0f64; env_ptr[n]];
        for old_i in 0..n {
            let i = iperm[old_i];
            let (cols, vals) = a.row(old_i);
            for (&old_j, &v) in cols.iter().zip(vals) {
                let j = iperm[old_j];
                if j <= i {
                    env[env_ptr[i] + (j - first[i])] += v;
                }
            }
        }
        // In-place envelope LL^T.
        for i in 0..n {
            for j in first[i]..=i {
                let lo = first[i].max(first[j]);
                let mut s = env[env_ptr[i] + (j - first[i])];
                for k in lo..j {
                    s -= env[env_ptr[i] + (k - first[i])] * env[env_ptr[j] + (k - first[j])];
                }
                if j < i {
                    let d = env[env_ptr[j] + (j - first[j])];
                    env[env_ptr[i] + (j - first[i])] = s / d;
                } else {
                    if s <= 0.0 || !s.is_finite() {
                        return Err(Error::Factorization(format!(
                            "non-positive pivot {s:.3e} at row {i}"
                        )));
                    }
                    env[env_ptr[i] + (j - first[i])] = s.sqrt();
                }
            }
        }
        Ok(SkylineCholesky {
            n,
            perm,
            first,
            env_ptr,
            env,
        })
    }

    /// Solves A x = b.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = vec![0.0; n];
        for i in 0..n {
            y[i] = b[self.perm[i]];
        }
        // Forward: L y = Pb.
        for i in 0..n {
            let mut s = y[i];
            for k in self.first[i]..i {
                s -= self.env[self.env_ptr[i] + (k - self.first[i])] * y[k];
            }
            y[i] = s / self.env[self.env_ptr[i] + (i - self.first[i])];
        }
        // Backward: L^T x = y, processed column-wise.
        for k in (0..n).rev() {
            y[k] /= self.env[self.env_ptr[k] + (k - self.first[k])];
            let xk = y[k];
            for j in self.first[k]..k {
                y[j] -= self.env[self.env_ptr[k] + (j - self.first[k])] * xk;
            }
        }
        let mut x = vec![0.0; n];
        for i in 0..n {
            x[self.perm[i]] = y[i];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn csr_sums_duplicates_and_multiplies() {
        let m = CsrMatrix::from_triplets(
            3,
            vec![(0, 0, 1.0), (0, 0, 1.0), (0, 2, 3.0), (2, 0, 3.0), (1, 1, 5.0), (2, 2, 4.0)],
        );
        assert_eq!(m.get(0, 0), 2.0);
        assert_eq!(m.get(0, 2), 3.0);
        assert_eq!(m.get(1, 0), 0.0);
        let y = m.apply(&[1.0, 2.0, 3.0]);
        assert_eq!(y, vec![11.0, 10.0, 15.0]);
        assert_eq!(m.symmetry_defect(), 0.0);
    }

    #[test]
    fn skyline_matches_dense_solve() {
        // Small SPD matrix: diagonally dominant Laplacian-like.
        let mut t = Vec::new();
        let n = 12;
        for i in 0..n {
            t.push((i, i, 4.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
            if i + 4 < n {
                t.push((i, i + 4, -0.5));
                t.push((i + 4, i, -0.5));
            }
        }
        let a = CsrMatrix::from_triplets(n, t);
        let chol = SkylineCholesky::factor(&a).unwrap();
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let x = chol.solve(&b);
        let r = a.apply(&x);
        for (ri, bi) in r.iter().zip(&b) {
            assert_relative_eq!(ri, bi, epsilon = 1e-10);
        }
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let a = CsrMatrix::from_triplets(2, vec![(0, 0, 1.0), (1, 1, -1.0)]);
        assert!(SkylineCholesky::factor(&a).is_err());
    }

    proptest! {
        #[test]
        fn random_spd_solves(seed in 0u64..500) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(2..20);
            // A = B^T B + I via dense construction, then sparsified fully.
            let b: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
                .collect();
            let mut t = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    let mut s = 0.0;
                    for k in 0..n {
                        s += b[k][i] * b[k][j];
                    }
                    if i == j {
                        s += 1.0;
                    }
                    t.push((i, j, s));
                }
            }
            let a = CsrMatrix::from_triplets(n, t);
            let chol = SkylineCholesky::factor(&a).unwrap();
            let rhs: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let x = chol.solve(&rhs);
            let r = a.apply(&x);
            for (ri, bi) in r.iter().zip(&rhs) {
                prop_assert!((ri - bi).abs() < 1e-8);
            }
        }
    }
}
