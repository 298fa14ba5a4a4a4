//! Restriction of a family to an immersed submanifold `S`: the fiber
//! `L_x ∩ ((T_xS × ℝ) ⊕ (T*_xM × ℝ))` and its image in `E¹(S)`.

use std::sync::Arc;

use nalgebra::DMatrix;

use super::induced::{lcp_fiber, precontact_fiber};
use super::{induced_structure, InducedLeafStructure};
use crate::error::{Error, Result};
use crate::families::DiracFamily;
use crate::linalg::{self, svd, RANK_TAU};
use crate::symexpr::{Chart, Expr};

/// Parametrized submanifold `u ↦ (map_1(u), …, map_n(u))`.
#[derive(Debug, Clone)]
pub struct Submanifold {
    pub param_chart: Arc<Chart>,
    pub map: Vec<Expr>,
}

impl Submanifold {
    pub fn new(param_chart: &Arc<Chart>, map: Vec<Expr>) -> Self {
        Self { param_chart: param_chart.clone(), map }
    }

    /// `S = M` through the identity.
    pub fn identity(chart: &Arc<Chart>) -> Self {
        Self::new(chart, (0..chart.dim()).map(Expr::var).collect())
    }

    pub fn dim(&self) -> usize {
        self.param_chart.dim()
    }

    pub fn point(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.map.iter().map(|e| e.eval(u)).collect()
    }

    /// `n × m` differential at `u`.
    pub fn jacobian(&self, u: &[f64]) -> Result<DMatrix<f64>> {
        let m = self.dim();
        let mut j = DMatrix::zeros(self.map.len(), m);
        for (i, e) in self.map.iter().enumerate() {
            for k in 0..m {
                j[(i, k)] = e.partial(k).eval(u)?;
            }
        }
        Ok(j)
    }
}

#[derive(Debug, Clone)]
pub struct RestrictionFiber {
    pub point: Vec<f64>,
    /// Basis of the intersection in `(X, f, α, g)` coordinates on `M`.
    pub intersection: DMatrix<f64>,
    /// Basis of `L_x ∩ ({0} ⊕ ((T_xS)° × {0}))`.
    pub kernel: DMatrix<f64>,
    /// Orthonormal basis of the image in `(T_uS × ℝ) ⊕ (T*_uS × ℝ)`.
    pub image: DMatrix<f64>,
}

/// Kernel of `m` with singular values measured against `scale`.
fn kernel_against(m: &DMatrix<f64>, scale: f64, point: &[f64]) -> Result<DMatrix<f64>> {
    let d = svd(m);
    let threshold = RANK_TAU * scale.max(d.singular.first().copied().unwrap_or(0.0));
    let k = m.nrows().min(m.ncols());
    let rank = d.singular[..k].iter().filter(|&&s| s > threshold).count();
    let next = d.singular.get(rank).copied().unwrap_or(0.0);
    let kept = if rank == 0 { f64::INFINITY } else { d.singular[rank - 1] };
    if kept < linalg::GAP_FACTOR * threshold || next > threshold / linalg::GAP_FACTOR && next < threshold {
        return Err(Error::IllConditioned { point: point.to_vec(), gap: kept / threshold });
    }
    Ok(d.v.columns(rank, m.ncols() - rank).into_owned())
}

pub fn restrict_fiber(family: &DiracFamily, s: &Submanifold, u: &[f64]) -> Result<RestrictionFiber> {
    let n = family.dim();
    let m = s.dim();
    if s.map.len() != n {
        return Err(Error::InvalidInput(format!("submanifold maps into dimension {}, chart has {n}", s.map.len())));
    }
    let x = s.point(u)?;
    let jac = s.jacobian(u)?;
    if linalg::rank(&jac).rank != m {
        return Err(Error::InvalidInput(format!("differential of the immersion is not injective at {u:?}")));
    }
    let frame = family.frame_matrix(&x)?;
    let scale = linalg::svd(&frame).singular[0];
    let anchor = frame.rows(0, n).into_owned();
    let q = linalg::orth(&jac);
    let normal = DMatrix::identity(n, n) - &q * q.transpose();
    let coeffs = kernel_against(&(normal * anchor), scale, &x)?;
    let intersection = &frame * &coeffs;

    // (X, f, α, g) ↦ (J⁺X, f, Jᵀα, g)
    let jp = linalg::pinv(&jac, RANK_TAU);
    let mut r = DMatrix::zeros(2 * m + 2, 2 * n + 2);
    r.view_mut((0, 0), (m, n)).copy_from(&jp);
    r[(m, n)] = 1.0;
    r.view_mut((m + 1, n + 1), (m, n)).copy_from(&jac.transpose());
    r[(2 * m + 1, 2 * n + 1)] = 1.0;
    let projected = &r * &intersection;
    let quotient = kernel_against(&projected, scale, &x)?;
    let kernel = &intersection * &quotient;
    let (info, image, _) = linalg::image_and_kernel(&projected, RANK_TAU);
    if info.rank != m + 1 {
        return Err(Error::RankDrop { point: x, expected: m + 1, found: info.rank });
    }
    Ok(RestrictionFiber { point: x, intersection, kernel, image })
}

/// Fibers at every sample; refuses if the intersection dimension varies.
pub fn restrict_to_submanifold(family: &DiracFamily, s: &Submanifold, samples: &[Vec<f64>]) -> Result<Vec<RestrictionFiber>> {
    let mut out: Vec<RestrictionFiber> = Vec::with_capacity(samples.len());
    for u in samples {
        let fiber = restrict_fiber(family, s, u)?;
        if let Some(first) = out.first() {
            if first.intersection.ncols() != fiber.intersection.ncols() {
                return Err(Error::RankDrop {
                    point: fiber.point,
                    expected: first.intersection.ncols(),
                    found: fiber.intersection.ncols(),
                });
            }
        }
        out.push(fiber);
    }
    Ok(out)
}

/// Distance between the restriction of the family to a leaf `S` and the
/// l.c.p. (or precontact) fiber of the induced leaf forms pulled back to `S`.
pub fn leaf_restriction_distance(family: &DiracFamily, s: &Submanifold, u: &[f64]) -> Result<f64> {
    let fiber = restrict_fiber(family, s, u)?;
    let jac = s.jacobian(u)?;
    let expected = match induced_structure(family, &fiber.point)? {
        InducedLeafStructure::Lcp { omega2, omega1, .. } => {
            lcp_fiber(&(jac.transpose() * omega2 * &jac), &(jac.transpose() * omega1))
        }
        InducedLeafStructure::Precontact { phi_form, eta, .. } => {
            precontact_fiber(&(jac.transpose() * phi_form * &jac), &(jac.transpose() * eta))
        }
    };
    Ok(linalg::subspace_distance(&fiber.image, &expected))
}

#[cfg(test)]
mod tests {
    use super::super::tests::jacobi;
    use super::*;
    use crate::calculus::KForm;

    #[test]
    fn graph_of_area_form_on_the_x_axis() {
        let c = Arc::new(Chart::standard(2));
        let omega = KForm::from_entries(&c, 2, [(vec![0, 1], Expr::one())]).unwrap();
        let fam = DiracFamily::from_dirac_graph_form(omega).unwrap();
        let line = Arc::new(Chart::new(&["u"]).unwrap());
        let s = Submanifold::new(&line, vec![Expr::var(0), Expr::zero()]);
        let want = DMatrix::from_column_slice(4, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        for u in [-0.7, 0.0, 1.3] {
            let f = restrict_fiber(&fam, &s, &[u]).unwrap();
            assert!(linalg::subspace_distance(&f.image, &want) < 1e-10);
            // (∂x, 0) + (dy, 0) restricts to (∂u, 0) + (0, 0); nothing is lost
            assert_eq!(f.kernel.ncols(), 0);
        }
    }

    #[test]
    fn identity_restriction_is_the_fiber() {
        let fam = jacobi(&[(0, 1, "1"), (1, 2, "-y")], &["0", "0", "1"]);
        let s = Submanifold::identity(fam.chart());
        let p = [0.2, -0.4, 0.9];
        let f = restrict_fiber(&fam, &s, &p).unwrap();
        assert!(linalg::subspace_distance(&f.image, &fam.frame_matrix(&p).unwrap()) < 1e-10);
    }

    #[test]
    fn jacobi_leaf_is_the_induced_lcp_family() {
        let fam = jacobi(&[(0, 1, "1")], &["0", "1", "0"]);
        let plane = Arc::new(Chart::new(&["u", "v"]).unwrap());
        let s = Submanifold::new(&plane, vec![Expr::var(0), Expr::var(1), Expr::int(5)]);
        for u in [[0.0, 0.0], [0.4, -1.1]] {
            // all of L_x is tangent to the leaf; dz is lost in the quotient
            let f = restrict_fiber(&fam, &s, &u).unwrap();
            assert_eq!((f.intersection.ncols(), f.kernel.ncols()), (4, 1));
            assert!(leaf_restriction_distance(&fam, &s, &u).unwrap() < 1e-10);
        }
    }

    #[test]
    fn intersection_jump_is_refused() {
        // Λ = x ∂x∧∂y along the x-axis: the intersection grows at x = 0
        let c = Arc::new(Chart::standard(2));
        let lam = crate::calculus::KVector::from_entries(&c, 2, [(vec![0, 1], Expr::var(0))]).unwrap();
        let fam = DiracFamily::from_dirac_graph_bivector(lam).unwrap();
        let line = Arc::new(Chart::new(&["u"]).unwrap());
        let s = Submanifold::new(&line, vec![Expr::var(0), Expr::zero()]);
        assert!(restrict_fiber(&fam, &s, &[0.5]).is_ok());
        assert_eq!(restrict_fiber(&fam, &s, &[0.5]).unwrap().intersection.ncols(), 2);
        assert_eq!(restrict_fiber(&fam, &s, &[0.0]).unwrap().intersection.ncols(), 3);
        let samples = vec![vec![0.5], vec![0.0]];
        assert!(matches!(restrict_to_submanifold(&fam, &s, &samples), Err(Error::RankDrop { .. })));
    }
}
