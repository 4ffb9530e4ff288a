//! Karhunen-Loève basis construction: centering, covariance, symmetric
//! eigendecomposition, truncation and the associated diagnostics.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::csv::Table;
use crate::error::{invalid, Error, Result};
use crate::sampling::{Grid, SampleMatrix};

/// Sample matrix with the per-row mean over all wavefunctions removed.
#[derive(Debug, Clone)]
pub struct CenteredMatrix {
    pub values: DMatrix<f64>,
    pub row_means: DVector<f64>,
    pub grid: Grid,
}

impl CenteredMatrix {
    pub fn n_functions(&self) -> usize {
        self.values.ncols()
    }
}

/// Symmetric positive semi-definite `N_s × N_s` covariance of centered samples.
#[derive(Debug, Clone)]
pub struct CovarianceMatrix {
    pub k: DMatrix<f64>,
    pub grid: Grid,
}

impl CovarianceMatrix {
    pub fn trace(&self) -> f64 {
        self.k.trace()
    }

    /// Square table with header `k_0,...,k_{N-1}`.
    pub fn to_table(&self) -> Table {
        let n = self.k.nrows();
        let mut table = Table::new((0..n).map(|i| format!("k_{i}")));
        for i in 0..n {
            table.push_numeric(self.k.row(i).iter().copied());
        }
        table
    }
}

/// All eigenpairs of a covariance matrix, eigenvalues in descending order and
/// orthonormal eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct KLBasis {
    pub eigenvalues: Vec<f64>,
    pub vectors: DMatrix<f64>,
    pub grid: Grid,
}

impl KLBasis {
    pub fn n_modes(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues_table(&self) -> Table {
        let mut table = Table::new(["index", "lambda"]);
        for (i, &l) in self.eigenvalues.iter().enumerate() {
            table.push(vec![i.to_string(), crate::csv::fmt_f64(l)]);
        }
        table
    }

    /// One column per mode, prefixed by the grid coordinate.
    pub fn vectors_table(&self) -> Table {
        let header = std::iter::once("x".to_string()).chain((0..self.n_modes()).map(|i| format!("phi_{i}")));
        let mut table = Table::new(header);
        for (i, &x) in self.grid.points.iter().enumerate() {
            table.push_numeric(std::iter::once(x).chain(self.vectors.row(i).iter().copied()));
        }
        table
    }
}

/// The leading `m` modes of a [`KLBasis`].
#[derive(Debug, Clone)]
pub struct TruncatedBasis {
    pub m: usize,
    pub vectors: DMatrix<f64>,
    pub eigenvalues: Vec<f64>,
    pub grid: Grid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TruncationCriterion {
    FixedM(usize),
    /// Keep the fewest modes whose eigenvalues sum to at least this fraction of the trace.
    EnergyFraction(f64),
}

pub fn center_columns(samples: &SampleMatrix) -> Result<CenteredMatrix> {
    center_matrix(&samples.values, &samples.grid)
}

pub fn center_matrix(values: &DMatrix<f64>, grid: &Grid) -> Result<CenteredMatrix> {
    let n_w = values.ncols();
    if n_w < 2 {
        return invalid(format!("centering needs at least 2 wavefunctions, got {n_w}"));
    }
    if values.nrows() != grid.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} sample rows for a grid of {} points",
            values.nrows(),
            grid.len()
        )));
    }
    let row_means = DVector::from_iterator(values.nrows(), values.row_iter().map(|r| r.sum() / n_w as f64));
    let mut centered = values.clone();
    for (i, mut row) in centered.row_iter_mut().enumerate() {
        row.add_scalar_mut(-row_means[i]);
    }
    Ok(CenteredMatrix { values: centered, row_means, grid: grid.clone() })
}

/// `K = Yc Ycᵀ / N_w`, accumulated in a fixed order and mirrored so `K = Kᵀ` exactly.
pub fn covariance(centered: &CenteredMatrix) -> CovarianceMatrix {
    let y = &centered.values;
    let (n_s, n_w) = y.shape();
    let mut k = DMatrix::zeros(n_s, n_s);
    for i in 0..n_s {
        for j in i..n_s {
            let mut acc = 0.0;
            for c in 0..n_w {
                acc += y[(i, c)] * y[(j, c)];
            }
            let v = acc / n_w as f64;
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    CovarianceMatrix { k, grid: centered.grid.clone() }
}

const JACOBI_TOL: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 100;

fn off_diagonal_norm(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += a[(i, j)] * a[(i, j)];
            }
        }
    }
    acc.sqrt()
}

/// Cyclic Jacobi eigensolver for a real symmetric matrix.
///
/// Returns `(eigenvalues, eigenvectors)` unsorted. Stops once the off-diagonal
/// Frobenius norm drops below `1e-14·‖A‖_F`.
pub fn jacobi_eigen(matrix: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = matrix.nrows();
    if n != matrix.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "eigensolver needs a square matrix, got {}x{}",
            n,
            matrix.ncols()
        )));
    }
    if matrix.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("eigensolver input"));
    }
    let mut a = matrix.clone();
    let mut v = DMatrix::identity(n, n);
    let threshold = JACOBI_TOL * a.norm();

    let mut converged = off_diagonal_norm(&a) <= threshold;
    let mut sweeps = 0;
    while !converged && sweeps < JACOBI_MAX_SWEEPS {
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
        converged = off_diagonal_norm(&a) <= threshold;
    }
    if !converged {
        return Err(Error::NotConverged { what: "Jacobi eigensolver", iterations: sweeps });
    }
    Ok(((0..n).map(|i| a[(i, i)]).collect(), v))
}

/// Flips a vector so that its largest-magnitude entry is positive. Entries
/// within `1e-12` relative of the maximum count as ties; the lowest index wins.
fn fix_sign(mut col: nalgebra::DVectorViewMut<f64>) {
    let max = col.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max == 0.0 {
        return;
    }
    let pivot = col.iter().position(|v| v.abs() >= max * (1.0 - 1e-12)).unwrap();
    if col[pivot] < 0.0 {
        col.neg_mut();
    }
}

/// Full eigendecomposition of the covariance, sorted descending, with the
/// deterministic sign convention applied to every eigenvector.
pub fn eig_sym(cov: &CovarianceMatrix) -> Result<KLBasis> {
    let (values, vectors) = jacobi_eigen(&cov.k)?;
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]));
    let eigenvalues = order.iter().map(|&i| values[i]).collect();
    let mut sorted = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        sorted.set_column(dst, &vectors.column(src));
        fix_sign(sorted.column_mut(dst));
    }
    Ok(KLBasis { eigenvalues, vectors: sorted, grid: cov.grid.clone() })
}

pub fn truncate_basis(basis: &KLBasis, criterion: TruncationCriterion) -> Result<TruncatedBasis> {
    let n = basis.n_modes();
    let m = match criterion {
        TruncationCriterion::FixedM(m) => {
            if m < 1 || m > n {
                return invalid(format!("retained mode count must be in 1..={n}, got {m}"));
            }
            m
        }
        TruncationCriterion::EnergyFraction(f) => {
            if !(f > 0.0 && f <= 1.0) {
                return invalid(format!("energy fraction must be in (0, 1], got {f}"));
            }
            let total: f64 = basis.eigenvalues.iter().sum();
            let mut acc = 0.0;
            let mut m = n;
            for (i, &l) in basis.eigenvalues.iter().enumerate() {
                acc += l;
                if acc >= f * total {
                    m = i + 1;
                    break;
                }
            }
            m
        }
    };
    Ok(TruncatedBasis {
        m,
        vectors: basis.vectors.columns(0, m).into_owned(),
        eigenvalues: basis.eigenvalues[..m].to_vec(),
        grid: basis.grid.clone(),
    })
}

/// `Z = Φᵀ Y`.
pub fn kl_transform(basis: &KLBasis, samples: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if samples.nrows() != basis.vectors.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "basis has {} rows, samples have {}",
            basis.vectors.nrows(),
            samples.nrows()
        )));
    }
    Ok(basis.vectors.tr_mul(samples))
}

/// Mean squared residual `(1/N_w) Σ_j ‖y_j − Q Qᵀ y_j‖²` of projecting every
/// column onto the span of the orthonormal columns of `q`.
pub fn projection_mse(samples: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<f64> {
    if samples.nrows() != q.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "basis has {} rows, samples have {}",
            q.nrows(),
            samples.nrows()
        )));
    }
    let coeffs = q.tr_mul(samples);
    let residual = samples - q * coeffs;
    Ok(residual.norm_squared() / samples.ncols() as f64)
}

/// Truncation error of the leading `m` KL modes.
pub fn reconstruction_mse(centered: &CenteredMatrix, basis: &KLBasis, m: usize) -> Result<f64> {
    if m < 1 || m > basis.n_modes() {
        return invalid(format!("mode count must be in 1..={}, got {m}", basis.n_modes()));
    }
    projection_mse(&centered.values, &basis.vectors.columns(0, m).into_owned())
}

/// Haar-distributed orthogonal `n × n` matrix: QR of a seeded Gaussian matrix
/// with the signs of `R`'s diagonal folded into `Q`.
pub fn random_orthonormal(n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = DMatrix::from_fn(n, n, |_, _| StandardNormal.sample(&mut rng));
    orthonormalize(g)
}

/// Orthonormal columns spanning the same nested subspaces as the columns of `a`.
pub fn orthonormalize(a: DMatrix<f64>) -> DMatrix<f64> {
    let qr = a.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..q.ncols().min(r.nrows()) {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Orthonormalized raised monomials `(x/scale)^(k+1)`, `k = 0..N_s-1`, on the grid.
pub fn raised_monomial_basis(grid: &Grid) -> DMatrix<f64> {
    let n = grid.len();
    let scale = grid.a.abs().max(grid.b.abs());
    let a = DMatrix::from_fn(n, n, |i, k| (grid.points[i] / scale).powi(k as i32 + 1));
    orthonormalize(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{make_grid, GridKind};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn grid(n: usize) -> Grid {
        make_grid(GridKind::Uniform, n, 0.0, 1.0).unwrap()
    }

    fn cov_of(k: DMatrix<f64>) -> CovarianceMatrix {
        let n = k.nrows();
        CovarianceMatrix { k, grid: grid(n) }
    }

    #[test]
    fn centering_examples() {
        let twin = center_matrix(&DMatrix::from_row_slice(2, 2, &[1.5, 1.5, -2.0, -2.0]), &grid(2)).unwrap();
        assert!(twin.values.iter().all(|&v| v == 0.0));

        let c = center_matrix(&DMatrix::from_row_slice(2, 2, &[1.0, 3.0, 2.0, 2.0]), &grid(2)).unwrap();
        assert_eq!(c.values, DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 0.0, 0.0]));
        assert_eq!(c.row_means.as_slice(), &[2.0, 2.0]);

        assert!(center_matrix(&DMatrix::from_element(3, 1, 1.0), &grid(3)).is_err());
    }

    #[test]
    fn covariance_examples() {
        let c = center_matrix(&DMatrix::from_row_slice(2, 2, &[1.0, 3.0, 2.0, 2.0]), &grid(2)).unwrap();
        let k = covariance(&c);
        assert_eq!(k.k, DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]));

        let zero = center_matrix(&DMatrix::zeros(3, 4), &grid(3)).unwrap();
        assert!(covariance(&zero).k.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn eig_sym_examples() {
        let id = eig_sym(&cov_of(DMatrix::identity(4, 4))).unwrap();
        assert_eq!(id.eigenvalues, vec![1.0; 4]);
        assert_eq!(id.vectors, DMatrix::identity(4, 4));

        let b = eig_sym(&cov_of(DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]))).unwrap();
        assert_relative_eq!(b.eigenvalues[0], 3.0, epsilon = 1e-14);
        assert_relative_eq!(b.eigenvalues[1], 1.0, epsilon = 1e-14);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_relative_eq!(b.vectors[(0, 0)], h, epsilon = 1e-14);
        assert_relative_eq!(b.vectors[(1, 0)], h, epsilon = 1e-14);
        // (−1, 1)/√2 with the tie resolved toward a positive first entry
        assert_relative_eq!(b.vectors[(0, 1)], h, epsilon = 1e-14);
        assert_relative_eq!(b.vectors[(1, 1)], -h, epsilon = 1e-14);

        let d = eig_sym(&cov_of(DMatrix::from_diagonal(&DVector::from_vec(vec![5.0, 2.0, 9.0])))).unwrap();
        assert_eq!(d.eigenvalues, vec![9.0, 5.0, 2.0]);
        let perm = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0]);
        assert_eq!(d.vectors, perm);
    }

    #[test]
    fn eig_sym_matches_reference_solver() {
        let a = DMatrix::from_fn(9, 9, |i, j| ((i * 7 + j * 3) % 11) as f64 - 5.0);
        let sym = &a + a.transpose();
        let ours = eig_sym(&cov_of(sym.clone())).unwrap();
        let mut reference: Vec<f64> = sym.symmetric_eigen().eigenvalues.iter().copied().collect();
        reference.sort_by(|x, y| y.total_cmp(x));
        for (x, y) in ours.eigenvalues.iter().zip(&reference) {
            assert_relative_eq!(x, y, epsilon = 1e-11);
        }
    }

    #[test]
    fn eig_sym_rejects_non_square_and_nan() {
        assert!(jacobi_eigen(&DMatrix::zeros(2, 3)).is_err());
        let mut m = DMatrix::identity(2, 2);
        m[(0, 1)] = f64::NAN;
        assert!(jacobi_eigen(&m).is_err());
    }

    fn example_basis() -> KLBasis {
        KLBasis { eigenvalues: vec![9.0, 5.0, 2.0], vectors: DMatrix::identity(3, 3), grid: grid(3) }
    }

    #[test]
    fn truncation_examples() {
        let b = example_basis();
        assert_eq!(truncate_basis(&b, TruncationCriterion::EnergyFraction(0.5)).unwrap().m, 1);
        assert_eq!(truncate_basis(&b, TruncationCriterion::EnergyFraction(0.9)).unwrap().m, 3);
        assert_eq!(truncate_basis(&b, TruncationCriterion::EnergyFraction(1.0)).unwrap().m, 3);
        let full = truncate_basis(&b, TruncationCriterion::FixedM(3)).unwrap();
        assert_eq!(full.m, 3);
        assert_eq!(full.vectors, b.vectors);
        assert!(truncate_basis(&b, TruncationCriterion::FixedM(0)).is_err());
        assert!(truncate_basis(&b, TruncationCriterion::FixedM(4)).is_err());
        assert!(truncate_basis(&b, TruncationCriterion::EnergyFraction(0.0)).is_err());
        assert!(truncate_basis(&b, TruncationCriterion::EnergyFraction(1.5)).is_err());
    }

    #[test]
    fn transform_examples() {
        let b = example_basis();
        let y = DMatrix::from_fn(3, 4, |i, j| (i + 2 * j) as f64);
        assert_eq!(kl_transform(&b, &y).unwrap(), y);
        assert!(kl_transform(&b, &DMatrix::zeros(2, 2)).is_err());

        let k = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 1.0]);
        let basis = eig_sym(&cov_of(k)).unwrap();
        let first = basis.vectors.columns(0, 1).into_owned();
        let z = kl_transform(&basis, &first).unwrap();
        assert_relative_eq!(z[(0, 0)], 1.0, epsilon = 1e-14);
        assert!(z[(1, 0)].abs() < 1e-14 && z[(2, 0)].abs() < 1e-14);
    }

    #[test]
    fn rank_one_data_reconstructs_with_one_mode() {
        let c = center_matrix(&DMatrix::from_row_slice(2, 2, &[1.0, 3.0, 2.0, 2.0]), &grid(2)).unwrap();
        let basis = eig_sym(&covariance(&c)).unwrap();
        assert!(reconstruction_mse(&c, &basis, 1).unwrap().abs() < 1e-15);
        assert!(reconstruction_mse(&c, &basis, 0).is_err());
    }

    #[test]
    fn random_orthonormal_is_orthonormal_and_seeded() {
        let q = random_orthonormal(12, 7);
        let err = (q.tr_mul(&q) - DMatrix::identity(12, 12)).abs().max();
        assert!(err < 1e-13);
        assert_eq!(q, random_orthonormal(12, 7));
        assert_ne!(q, random_orthonormal(12, 8));
    }

    fn data_matrix() -> impl Strategy<Value = DMatrix<f64>> {
        (2usize..8).prop_flat_map(|n_s| {
            let n_w = n_s + 3;
            proptest::collection::vec(-10.0f64..10.0, n_s * n_w).prop_map(move |v| DMatrix::from_vec(n_s, n_w, v))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn kl_invariants(y in data_matrix()) {
            let g = grid(y.nrows());
            let c = center_matrix(&y, &g).unwrap();
            let scale = y.abs().max().max(1e-300);
            for row in c.values.row_iter() {
                prop_assert!(row.sum().abs() <= 1e-12 * y.ncols() as f64 * scale);
            }
            let cov = covariance(&c);
            prop_assert_eq!(&cov.k, &cov.k.transpose());
            let tr = cov.trace();
            prop_assert!((tr - c.values.norm_squared() / y.ncols() as f64).abs() <= 1e-12 * tr.max(1e-300));

            let basis = eig_sym(&cov).unwrap();
            let n = basis.n_modes();
            let lam0 = basis.eigenvalues[0];
            prop_assert!(basis.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
            prop_assert!(*basis.eigenvalues.last().unwrap() >= -1e-12 * tr);
            let ortho = (basis.vectors.tr_mul(&basis.vectors) - DMatrix::identity(n, n)).abs().max();
            prop_assert!(ortho <= 1e-10);
            let diag = basis.vectors.tr_mul(&cov.k) * &basis.vectors
                - DMatrix::from_diagonal(&DVector::from_vec(basis.eigenvalues.clone()));
            prop_assert!(diag.abs().max() <= 1e-10 * lam0);
            let sum: f64 = basis.eigenvalues.iter().sum();
            prop_assert!((sum - tr).abs() <= 1e-12 * tr);

            for m in 1..=n {
                let mse = reconstruction_mse(&c, &basis, m).unwrap();
                let tail: f64 = basis.eigenvalues[m..].iter().sum();
                prop_assert!((mse - tail).abs() <= 1e-9 * tr + 1e-9 * tail.abs());
            }
            prop_assert!(reconstruction_mse(&c, &basis, n).unwrap() <= 1e-10 * tr);

            // decorrelation of the transformed coefficients
            let z = kl_transform(&basis, &c.values).unwrap();
            let kz = &z * z.transpose() / y.ncols() as f64;
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        prop_assert!(kz[(i, j)].abs() <= 1e-10 * lam0);
                    }
                }
            }
        }

        #[test]
        fn scale_equivariance(y in data_matrix(), s in 0.1f64..10.0) {
            let g = grid(y.nrows());
            let base = eig_sym(&covariance(&center_matrix(&y, &g).unwrap())).unwrap();
            let scaled = eig_sym(&covariance(&center_matrix(&(&y * s), &g).unwrap())).unwrap();
            let lam0 = base.eigenvalues[0];
            for (a, b) in base.eigenvalues.iter().zip(&scaled.eigenvalues) {
                prop_assert!((b - s * s * a).abs() <= 1e-10 * s * s * lam0);
            }
            // vectors are only determined for well-separated eigenvalues
            let n = base.n_modes();
            for i in 0..n {
                let gap = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| (base.eigenvalues[i] - base.eigenvalues[j]).abs())
                    .fold(f64::INFINITY, f64::min);
                if gap > 1e-3 * lam0 {
                    let diff = (base.vectors.column(i) - scaled.vectors.column(i)).abs().max();
                    prop_assert!(diff <= 1e-7, "mode {} differs by {}", i, diff);
                }
            }
        }
    }
}
