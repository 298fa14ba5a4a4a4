//! Characteristic foliation of a family: pointwise rank and leaf type,
//! induced leaf structures, leaf tracing, the time-extended algebroid and
//! restriction to submanifolds.

mod bar;
mod induced;
mod restrict;
mod trace;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::families::DiracFamily;
use crate::linalg::{self, RANK_TAU};

pub use bar::{bar_anchor, bar_bracket, time_derivative};
pub use induced::{
    induced_structure, lcp_fiber, lcp_volume, precontact_consistency, precontact_fiber, InducedLeafStructure,
};
pub use restrict::{leaf_restriction_distance, restrict_fiber, restrict_to_submanifold, RestrictionFiber, Submanifold};
pub use trace::{lcp_loop_integral, rk4_step, trace_bar_leaf, trace_leaf, BarSample, BarTrace, GeneratorPolicy, LeafTrace, TraceSample};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LeafType {
    Precontact,
    Lcp,
}

impl LeafType {
    pub fn as_str(self) -> &'static str {
        match self {
            LeafType::Precontact => "Precontact",
            LeafType::Lcp => "LCP",
        }
    }
}

#[derive(Debug, Clone)]
pub struct PointAnalysis {
    pub point: Vec<f64>,
    /// `ρ(s_i(x))` as columns (`n × (n + 1)`).
    pub anchor: DMatrix<f64>,
    /// `φ_L(s_i)(x)`.
    pub phi: DVector<f64>,
    pub rank: usize,
    /// Orthonormal basis of `ker ρ|_{L_x}` in frame coordinates.
    pub kernel: DMatrix<f64>,
    /// Orthonormal basis of `ρ(L_x)`.
    pub image: DMatrix<f64>,
    pub leaf_type: LeafType,
    pub sigma_max: f64,
    /// Smallest kept singular value over the rank threshold.
    pub gap: f64,
    /// `max |φ(k)|` over the kernel basis.
    pub phi_on_kernel: f64,
}

/// Tolerance for `φ` vanishing on the kernel, relative to `max(1, |φ|)`.
pub const PHI_TOL: f64 = 1e-9;

fn anchor_and_phi(family: &DiracFamily, x: &[f64]) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let cols = family.frame().iter().map(|s| s.x.eval(x)).collect::<Result<Vec<_>>>()?;
    let phi = family.phi().iter().map(|p| p.eval(x)).collect::<Result<Vec<_>>>()?;
    Ok((linalg::from_columns(&cols), DVector::from_vec(phi)))
}

/// Rank of `ρ(L_x)`, its kernel on `L_x`, and the precontact/l.c.p. type.
pub fn analyze_point(family: &DiracFamily, x: &[f64]) -> Result<PointAnalysis> {
    if x.len() < family.dim() {
        return Err(Error::InvalidInput(format!("point has {} coordinates, chart needs {}", x.len(), family.dim())));
    }
    let (anchor, phi) = anchor_and_phi(family, x)?;
    let (info, image, kernel) = linalg::image_and_kernel(&anchor, RANK_TAU);
    if !info.well_conditioned() {
        return Err(Error::IllConditioned { point: x.to_vec(), gap: info.gap });
    }
    let phi_on_kernel = (0..kernel.ncols()).map(|k| phi.dot(&kernel.column(k)).abs()).fold(0.0, f64::max);
    let leaf_type = if phi_on_kernel <= PHI_TOL * phi.norm().max(1.0) { LeafType::Lcp } else { LeafType::Precontact };
    Ok(PointAnalysis {
        point: x.to_vec(),
        anchor,
        phi,
        rank: info.rank,
        kernel,
        image,
        leaf_type,
        sigma_max: info.sigma_max,
        gap: info.gap,
        phi_on_kernel,
    })
}

#[derive(Debug, Clone)]
pub struct BarDistribution {
    pub rank: usize,
    pub rank_bar: usize,
    /// Orthonormal basis of `{(ρ(e), φ(e))}` in `ℝ^{n+1}`.
    pub basis: DMatrix<f64>,
}

/// Span of `ρ(e_x) + φ(e_x) ∂_t` at `(x, t)`. The frame does not depend on
/// `t`, so neither does the result.
pub fn bar_distribution(family: &DiracFamily, x: &[f64], _t: f64) -> Result<BarDistribution> {
    let (anchor, phi) = anchor_and_phi(family, x)?;
    let n = family.dim();
    let mut bar = anchor.clone().insert_row(n, 0.0);
    bar.row_mut(n).copy_from(&phi.transpose());
    let info = linalg::rank(&anchor);
    let (info_bar, basis, _) = linalg::image_and_kernel(&bar, RANK_TAU);
    if !info.well_conditioned() || !info_bar.well_conditioned() {
        return Err(Error::IllConditioned { point: x.to_vec(), gap: info.gap.min(info_bar.gap) });
    }
    Ok(BarDistribution { rank: info.rank, rank_bar: info_bar.rank, basis })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{KForm, KVector, VectorField};
    use crate::symexpr::{parse_expr, Chart, Expr};
    use std::sync::Arc;

    pub(crate) fn jacobi(lam: &[(usize, usize, &str)], e: &[&str]) -> DiracFamily {
        let c = Arc::new(Chart::standard(3));
        let lam = KVector::from_entries(&c, 2, lam.iter().map(|(i, j, t)| (vec![*i, *j], parse_expr(t, &c).unwrap())))
            .unwrap();
        let e = VectorField::new(&c, e.iter().map(|t| parse_expr(t, &c).unwrap()).collect()).unwrap();
        DiracFamily::from_jacobi(lam, e).unwrap()
    }

    pub(crate) fn homogeneous_plane() -> DiracFamily {
        let c = Arc::new(Chart::standard(2));
        let pi = KVector::from_entries(&c, 2, [(vec![0, 1], Expr::one())]).unwrap();
        let z = VectorField::new(&c, vec![Expr::var(0), Expr::zero()]).unwrap();
        DiracFamily::from_homogeneous_poisson(pi, z).unwrap()
    }

    #[test]
    fn contact_pair_is_precontact_of_full_rank() {
        let fam = jacobi(&[(0, 1, "1"), (1, 2, "-y")], &["0", "0", "1"]);
        let a = analyze_point(&fam, &[0.0, 0.0, 0.0]).unwrap();
        assert_eq!((a.rank, a.leaf_type), (3, LeafType::Precontact));
        assert_eq!(a.kernel.ncols(), 1);
        let b = bar_distribution(&fam, &[0.0; 3], 0.0).unwrap();
        assert_eq!((b.rank, b.rank_bar), (3, 4));
    }

    #[test]
    fn jacobi_with_tangent_reeb_field_is_lcp() {
        let fam = jacobi(&[(0, 1, "1")], &["0", "1", "0"]);
        for p in [[0.0, 0.0, 0.0], [0.3, -0.2, 5.0]] {
            let a = analyze_point(&fam, &p).unwrap();
            assert_eq!((a.rank, a.leaf_type), (2, LeafType::Lcp));
            assert_eq!(a.rank + a.kernel.ncols(), 4);
            let b = bar_distribution(&fam, &p, 1.0).unwrap();
            assert_eq!((b.rank, b.rank_bar), (2, 2));
        }
    }

    #[test]
    fn homogeneous_plane_is_precontact() {
        let fam = homogeneous_plane();
        for p in [[0.0, 0.0], [1.0, 1.0]] {
            let a = analyze_point(&fam, &p).unwrap();
            assert_eq!((a.rank, a.leaf_type), (2, LeafType::Precontact));
        }
    }

    #[test]
    fn zero_graph_has_equal_ranks() {
        let c = Arc::new(Chart::standard(2));
        let fam = DiracFamily::from_dirac_graph_form(KForm::zero(&c, 2).unwrap()).unwrap();
        let b = bar_distribution(&fam, &[0.4, 0.1], 0.0).unwrap();
        assert_eq!((b.rank, b.rank_bar), (2, 2));
        assert_eq!(analyze_point(&fam, &[0.4, 0.1]).unwrap().leaf_type, LeafType::Lcp);
    }

    #[test]
    fn ambiguous_rank_is_refused() {
        let fam = jacobi(&[(0, 1, "1")], &["0", "0", "x"]);
        assert!(matches!(analyze_point(&fam, &[3e-9, 0.0, 0.0]), Err(Error::IllConditioned { .. })));
        assert_eq!(analyze_point(&fam, &[0.0, 0.0, 0.0]).unwrap().rank, 2);
        assert_eq!(analyze_point(&fam, &[0.5, 0.0, 0.0]).unwrap().rank, 3);
    }
}
