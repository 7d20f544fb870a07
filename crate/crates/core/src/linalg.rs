//! Small dense linear-algebra helpers shared by the structural checks and
//! the kernel machinery: weighted eigendecompositions of nonsymmetric
//! matrices that are symmetric under a positive weight, spectra of complex
//! Fourier symbols via realification, and a banded LU for the Newton solves.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};

use crate::{Error, Result};

/// Symmetry defect `max |M - M^T|` entrywise.
pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..i {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// Smallest eigenvalue of the symmetric part of `m`.
pub fn min_symmetric_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    eig.eigenvalues.min()
}

/// Symmetric positive-definite square root.
pub fn spd_sqrt(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = SymmetricEigen::new(m.clone());
    if eig.eigenvalues.min() <= 0.0 {
        return Err(Error::EigenFailure(format!(
            "matrix not positive definite (min eigenvalue {:.3e})",
            eig.eigenvalues.min()
        )));
    }
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
    Ok(&eig.eigenvectors * d * eig.eigenvectors.transpose())
}

/// Eigendecomposition of a real matrix `A` that is symmetrizable by a
/// symmetric positive-definite weight `W` (i.e. `W A` is symmetric).
///
/// Returns ascending real eigenvalues together with biorthonormal right and
/// left eigenvector matrices: columns `r_j` of `right`, columns `l_j` of
/// `left`, with `l_j^T r_k = delta_jk`, `A r_j = a_j r_j`, `l_j^T A = a_j l_j^T`.
///
/// When `secondary` is given, eigenvectors inside each eigenvalue cluster
/// (gap below `cluster_tol`) are rotated so that `l_j^T S r_k` is diagonal on
/// the cluster, provided `W S` is also symmetric.
pub struct WeightedEigen {
    pub eigenvalues: DVector<f64>,
    pub right: DMatrix<f64>,
    pub left: DMatrix<f64>,
    /// Cluster index of each eigenvalue (ascending grouping of near-equal values).
    pub clusters: Vec<usize>,
}

pub fn weighted_eigen(
    a: &DMatrix<f64>,
    w: &DMatrix<f64>,
    secondary: Option<&DMatrix<f64>>,
    cluster_tol: f64,
) -> Result<WeightedEigen> {
    let n = a.nrows();
    let p = spd_sqrt(w)?;
    let p_inv = p
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::EigenFailure("weight sqrt not invertible".into()))?;

    // M = P A P^{-1} = P^{-1} (W A) P^{-1} is symmetric when W A is.
    let wa = w * a;
    if asymmetry(&wa) > 1e-8 * (1.0 + wa.norm()) {
        return Err(Error::EigenFailure(format!(
            "W*A not symmetric (defect {:.3e}); symmetrizability violated",
            asymmetry(&wa)
        )));
    }
    let m = &p_inv * &wa * &p_inv;
    let m = (&m + &m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(m);

    // Sort ascending.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut q = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        q.set_column(col, &eig.eigenvectors.column(i));
    }

    // Cluster detection on the sorted spectrum.
    let scale = 1.0 + eigenvalues.amax();
    let mut clusters = vec![0usize; n];
    for j in 1..n {
        clusters[j] = if (eigenvalues[j] - eigenvalues[j - 1]).abs() <= cluster_tol * scale {
            clusters[j - 1]
        } else {
            clusters[j - 1] + 1
        };
    }

    // Within each cluster, rotate to diagonalize the projected secondary matrix.
    if let Some(s) = secondary {
        let s_tilde = &p_inv * (w * s) * &p_inv;
        let s_tilde = (&s_tilde + &s_tilde.transpose()) * 0.5;
        let mut j = 0;
        while j < n {
            let mut k = j;
            while k < n && clusters[k] == clusters[j] {
                k += 1;
            }
            if k - j > 1 {
                let block = q.columns(j, k - j).into_owned();
                let proj = block.transpose() * &s_tilde * &block;
                let proj = (&proj + &proj.transpose()) * 0.5;
                let sub = SymmetricEigen::new(proj);
                let rotated = &block * &sub.eigenvectors;
                for (c, col) in (j..k).enumerate() {
                    q.set_column(col, &rotated.column(c));
                }
            }
            j = k;
        }
    }

    Ok(WeightedEigen {
        eigenvalues,
        right: &p_inv * &q,
        left: &p * &q,
        clusters,
    })
}

/// All eigenvalues of the complex matrix `X + iY`, together with their
/// complex conjugates (the spectrum of the realification `[[X,-Y],[Y,X]]`).
///
/// The conjugate ambiguity is harmless for the uses in this crate, which
/// only need real parts or match branches by the sign-symmetric imaginary
/// part.
pub fn symbol_spectrum(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Vec<Complex<f64>> {
    let n = x.nrows();
    let mut real = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            real[(i, j)] = x[(i, j)];
            real[(i, j + n)] = -y[(i, j)];
            real[(i + n, j)] = y[(i, j)];
            real[(i + n, j + n)] = x[(i, j)];
        }
    }
    real.complex_eigenvalues().iter().copied().collect()
}

/// Basis of the space of skew-symmetric n x n matrices.
pub fn skew_basis(n: usize) -> Vec<DMatrix<f64>> {
    let mut basis = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let mut e = DMatrix::zeros(n, n);
            e[(i, j)] = 1.0;
            e[(j, i)] = -1.0;
            basis.push(e);
        }
    }
    basis
}

/// Banded matrix in LAPACK-like storage with `kl` sub- and `ku`
/// super-diagonals, solved by Gaussian elimination with partial pivoting.
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    /// Row-major band storage with width `kl + ku + 1 + kl` (fill-in space).
    data: Vec<f64>,
    width: usize,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        BandedMatrix {
            n,
            kl,
            ku,
            data: vec![0.0; n * width],
            width,
        }
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let (i, j) = (i as isize, j as isize);
        let off = j - i + self.kl as isize + self.kl as isize;
        // Entry (i,j) lives at row i, band offset j - i; valid for
        // -kl <= j-i <= ku + kl (the upper extension holds pivot fill-in).
        if j - i < -(self.kl as isize) || j - i > (self.ku + self.kl) as isize {
            return None;
        }
        Some(i as usize * self.width + (off - self.kl as isize) as usize)
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let slot = self.slot(i, j).expect("entry outside band");
        self.data[slot] = value;
    }

    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        let slot = self.slot(i, j).expect("entry outside band");
        self.data[slot] += value;
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        match self.slot(i, j) {
            Some(s) => self.data[s],
            None => 0.0,
        }
    }

    fn set_raw(&mut self, i: usize, j: usize, value: f64) {
        if let Some(s) = self.slot(i, j) {
            self.data[s] = value;
        } else if value != 0.0 {
            panic!("fill-in outside extended band");
        }
    }

    /// Solve `A x = b` in place; consumes the factorization workspace.
    pub fn solve(mut self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        let mut x = b.to_vec();
        let kl = self.kl;
        let ku_ext = self.ku + self.kl;
        for col in 0..n {
            // Partial pivot among rows col..=col+kl.
            let mut piv = col;
            let mut piv_val = self.get(col, col).abs();
            for r in (col + 1)..n.min(col + kl + 1) {
                let v = self.get(r, col).abs();
                if v > piv_val {
                    piv = r;
                    piv_val = v;
                }
            }
            if piv_val == 0.0 {
                return Err(Error::NewtonDivergence(format!(
                    "singular banded matrix at column {col}"
                )));
            }
            if piv != col {
                for j in col..n.min(col + ku_ext + 1) {
                    let a = self.get(col, j);
                    let b2 = self.get(piv, j);
                    self.set_raw(col, j, b2);
                    self.set_raw(piv, j, a);
                }
                x.swap(col, piv);
            }
            let d = self.get(col, col);
            for r in (col + 1)..n.min(col + kl + 1) {
                let factor = self.get(r, col) / d;
                if factor == 0.0 {
                    continue;
                }
                self.set_raw(r, col, 0.0);
                for j in (col + 1)..n.min(col + ku_ext + 1) {
                    let v = self.get(r, j) - factor * self.get(col, j);
                    self.set_raw(r, j, v);
                }
                x[r] -= factor * x[col];
            }
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in (i + 1)..n.min(i + ku_ext + 1) {
                s -= self.get(i, j) * x[j];
            }
            x[i] = s / self.get(i, i);
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn weighted_eigen_biorthonormal_on_random_symmetric() {
        let a = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.2, 1.0, 0.5, -0.3, 0.2, -0.3, 1.5]);
        let w = DMatrix::identity(3, 3);
        let dec = weighted_eigen(&a, &w, None, 1e-8).unwrap();
        let prod = dec.left.transpose() * &dec.right;
        assert_relative_eq!(prod, DMatrix::identity(3, 3), epsilon = 1e-12);
        for j in 0..3 {
            let r = dec.right.column(j).into_owned();
            let residual = (&a * &r - dec.eigenvalues[j] * &r).norm();
            assert!(residual < 1e-10, "right eigenvector residual {residual}");
            let l = dec.left.column(j).into_owned();
            let residual = (a.transpose() * &l - dec.eigenvalues[j] * &l).norm();
            assert!(residual < 1e-10, "left eigenvector residual {residual}");
        }
    }

    #[test]
    fn weighted_eigen_nonsymmetric_with_weight() {
        // A = dF dG^{-1} with dF, dG symmetric, dG > 0: weight W = dG^{-1}.
        let df = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.3]);
        let dg = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let dg_inv = dg.clone().try_inverse().unwrap();
        let a = &df * &dg_inv;
        let dec = weighted_eigen(&a, &dg_inv, None, 1e-8).unwrap();
        for j in 0..2 {
            let r = dec.right.column(j).into_owned();
            assert!((&a * &r - dec.eigenvalues[j] * &r).norm() < 1e-10);
        }
        let prod = dec.left.transpose() * &dec.right;
        assert_relative_eq!(prod, DMatrix::identity(2, 2), epsilon = 1e-12);
    }

    #[test]
    fn symbol_spectrum_matches_closed_form() {
        // M = [[0, -i xi], [-i xi, -xi^2]]; eigenvalues (-xi^2 +- sqrt(xi^4 - 4 xi^2))/2.
        let xi = 0.5_f64;
        let x = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, -xi * xi]);
        let y = DMatrix::from_row_slice(2, 2, &[0.0, -xi, -xi, 0.0]);
        let spec = symbol_spectrum(&x, &y);
        // xi < 2: real part is -xi^2/2 for all branches.
        for lambda in &spec {
            assert_relative_eq!(lambda.re, -xi * xi / 2.0, epsilon = 1e-12);
        }
        let disc = (xi.powi(4) - 4.0 * xi * xi).abs().sqrt() / 2.0;
        let mut ims: Vec<f64> = spec.iter().map(|l| l.im).collect();
        ims.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_relative_eq!(ims[0], -disc, epsilon = 1e-12);
        assert_relative_eq!(ims[3], disc, epsilon = 1e-12);
    }

    #[test]
    fn banded_solver_matches_dense() {
        let n = 12;
        let mut banded = BandedMatrix::zeros(n, 2, 2);
        let mut dense = DMatrix::zeros(n, n);
        let mut seed = 1234u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 33) as f64) / (u32::MAX as f64) - 0.5
        };
        for i in 0..n {
            for j in i.saturating_sub(2)..n.min(i + 3) {
                let v = next() + if i == j { 4.0 } else { 0.0 };
                banded.set(i, j, v);
                dense[(i, j)] = v;
            }
        }
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let x = banded.solve(&b).unwrap();
        let xd = dense.lu().solve(&DVector::from_column_slice(&b)).unwrap();
        for i in 0..n {
            assert_relative_eq!(x[i], xd[i], epsilon = 1e-10);
        }
    }
}
