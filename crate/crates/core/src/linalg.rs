//! Dense numerical linear algebra on small matrices: thresholded rank,
//! kernels, images, least squares and subspace comparison. Matrices are
//! `nalgebra::DMatrix<f64>`.

use nalgebra::DMatrix;

/// Relative singular-value threshold.
pub const RANK_TAU: f64 = 1e-9;
/// Required ratio between the smallest kept singular value and the threshold.
pub const GAP_FACTOR: f64 = 10.0;

#[derive(Debug, Clone)]
pub struct Decomposition {
    /// Singular values, descending; `cols` of them (zeros appended for wide matrices).
    pub singular: Vec<f64>,
    /// Left singular vectors as columns (`rows × min(rows, cols)`); only the
    /// columns with nonzero singular value are guaranteed orthonormal.
    pub u: DMatrix<f64>,
    /// Right singular vectors as columns, a complete orthonormal basis (`cols × cols`).
    pub v: DMatrix<f64>,
}

/// SVD with a complete right basis: wide matrices are padded with zero rows.
pub fn svd(m: &DMatrix<f64>) -> Decomposition {
    let (r, c) = m.shape();
    let rows = r.max(c);
    let mut padded = DMatrix::zeros(rows, c);
    padded.view_mut((0, 0), (r, c)).copy_from(m);
    let s = padded.svd(true, true);
    let (u, vt) = (s.u.expect("u requested"), s.v_t.expect("v_t requested"));
    let mut order: Vec<usize> = (0..c).collect();
    order.sort_by(|&a, &b| s.singular_values[b].total_cmp(&s.singular_values[a]));
    let singular = order.iter().map(|&i| s.singular_values[i]).collect();
    let u = DMatrix::from_fn(r, r.min(c), |i, j| u[(i, order[j])]);
    let v = DMatrix::from_fn(c, c, |i, j| vt[(order[j], i)]);
    Decomposition { singular, u, v }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankInfo {
    pub rank: usize,
    pub sigma_max: f64,
    /// Smallest kept singular value divided by the threshold `τ σ_max`
    /// (infinite when nothing is dropped or the matrix is zero).
    pub gap: f64,
}

impl RankInfo {
    pub fn well_conditioned(&self) -> bool {
        self.gap >= GAP_FACTOR
    }
}

pub fn rank_of(singular: &[f64], cols: usize, rows: usize, tau: f64) -> RankInfo {
    let k = rows.min(cols).min(singular.len());
    let sigma_max = singular.first().copied().unwrap_or(0.0);
    if sigma_max == 0.0 {
        return RankInfo { rank: 0, sigma_max, gap: f64::INFINITY };
    }
    let threshold = tau * sigma_max;
    let rank = singular[..k].iter().filter(|&&s| s > threshold).count();
    let gap = if rank == 0 { f64::INFINITY } else { singular[rank - 1] / threshold };
    RankInfo { rank, sigma_max, gap }
}

pub fn rank(m: &DMatrix<f64>) -> RankInfo {
    let d = svd(m);
    rank_of(&d.singular, m.ncols(), m.nrows(), RANK_TAU)
}

/// Orthonormal image basis (columns) and kernel basis (columns).
pub fn image_and_kernel(m: &DMatrix<f64>, tau: f64) -> (RankInfo, DMatrix<f64>, DMatrix<f64>) {
    let d = svd(m);
    let info = rank_of(&d.singular, m.ncols(), m.nrows(), tau);
    let image = d.u.columns(0, info.rank).into_owned();
    let kernel = d.v.columns(info.rank, m.ncols() - info.rank).into_owned();
    (info, image, kernel)
}

/// Moore–Penrose pseudo-inverse with the rank threshold.
pub fn pinv(m: &DMatrix<f64>, tau: f64) -> DMatrix<f64> {
    let d = svd(m);
    let info = rank_of(&d.singular, m.ncols(), m.nrows(), tau);
    let mut out = DMatrix::zeros(m.ncols(), m.nrows());
    for k in 0..info.rank {
        let vk = d.v.column(k);
        let uk = d.u.column(k);
        out += (vk * uk.transpose()) / d.singular[k];
    }
    out
}

/// Orthonormal basis of the column span.
pub fn orth(m: &DMatrix<f64>) -> DMatrix<f64> {
    image_and_kernel(m, RANK_TAU).1
}

/// Spectral norm of the difference of orthogonal projectors onto the two
/// column spans; 0 for equal subspaces, 1 when dimensions differ.
pub fn subspace_distance(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let (qa, qb) = (orth(a), orth(b));
    if qa.ncols() != qb.ncols() {
        return 1.0;
    }
    let pa = &qa * qa.transpose();
    let pb = &qb * qb.transpose();
    let diff = pa - pb;
    svd(&diff).singular.first().copied().unwrap_or(0.0)
}

/// Distance from `v` to the column span of `m` (Euclidean norm of the residual).
pub fn membership_residual(m: &DMatrix<f64>, v: &[f64]) -> f64 {
    let q = orth(m);
    let v = DMatrix::from_column_slice(v.len(), 1, v);
    let proj = &q * (q.transpose() * &v);
    (v - proj).norm()
}

pub fn from_columns(cols: &[Vec<f64>]) -> DMatrix<f64> {
    let rows = cols.first().map_or(0, Vec::len);
    DMatrix::from_fn(rows, cols.len(), |i, j| cols[j][i])
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_and_kernel_of_wide_matrix() {
        // anchors ∂y, −∂x, 0, ∂y as columns
        let m = from_columns(&[vec![0.0, 1.0, 0.0], vec![-1.0, 0.0, 0.0], vec![0.0; 3], vec![0.0, 1.0, 0.0]]);
        let (info, image, kernel) = image_and_kernel(&m, RANK_TAU);
        assert_eq!(info.rank, 2);
        assert_eq!(image.ncols(), 2);
        assert_eq!(kernel.ncols(), 2);
        assert!(max_abs(&(&m * &kernel)) < 1e-14);
        assert!(info.well_conditioned());
    }

    #[test]
    fn singular_values_sorted() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 3.0]);
        let d = svd(&m);
        assert_eq!(d.singular, vec![3.0, 1.0]);
        let back = &d.u * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(d.singular.clone())) * d.v.transpose();
        assert!(max_abs(&(back - m)) < 1e-14);
    }

    #[test]
    fn near_threshold_is_flagged() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 5e-9]);
        let info = rank(&m);
        assert_eq!(info.rank, 2);
        assert!(!info.well_conditioned());
    }

    #[test]
    fn subspace_comparison() {
        let a = from_columns(&[vec![1.0, 0.0, 0.0], vec![1.0, 1.0, 0.0]]);
        let b = from_columns(&[vec![0.0, 2.0, 0.0], vec![3.0, 0.0, 0.0]]);
        assert!(subspace_distance(&a, &b) < 1e-14);
        let c = from_columns(&[vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0]]);
        assert!((subspace_distance(&a, &c) - 1.0).abs() < 1e-12);
        assert!(membership_residual(&a, &[2.0, -1.0, 0.0]) < 1e-14);
        assert!((membership_residual(&a, &[0.0, 0.0, 2.0]) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn pseudo_inverse_solves_full_rank_systems() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 0.0, 0.0, 1.0, 1.0]);
        let p = pinv(&m, RANK_TAU);
        assert!(max_abs(&(&m * &p - DMatrix::identity(2, 2))) < 1e-14);
    }
}
