//! Leaf structures read off the frame at a point: a precontact form
//! `η_F` (with `Φ_F`) or an l.c.p. pair `(Ω_F, ω_F)`, both as samples on an
//! orthonormal basis of the leaf tangent space.

use nalgebra::{DMatrix, DVector};

use super::{analyze_point, LeafType, PointAnalysis};
use crate::calculus::lie_bracket;
use crate::error::{Error, Result};
use crate::families::DiracFamily;
use crate::linalg::{self, max_abs, RANK_TAU};

/// Consistency bound on the linear solves, relative to the data scale.
const SOLVE_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub enum InducedLeafStructure {
    Precontact {
        /// Orthonormal leaf basis (`n × r`).
        basis: DMatrix<f64>,
        /// `η_F` extended by zero off the leaf (ambient covector).
        eta: DVector<f64>,
        /// `Φ_F` extended by zero off the leaf (ambient skew matrix).
        phi_form: DMatrix<f64>,
        residual: f64,
    },
    Lcp {
        basis: DMatrix<f64>,
        /// `Ω_F` (ambient skew matrix).
        omega2: DMatrix<f64>,
        /// `ω_F` (ambient covector).
        omega1: DVector<f64>,
        residual: f64,
    },
}

impl InducedLeafStructure {
    pub fn leaf_type(&self) -> LeafType {
        match self {
            InducedLeafStructure::Precontact { .. } => LeafType::Precontact,
            InducedLeafStructure::Lcp { .. } => LeafType::Lcp,
        }
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        match self {
            InducedLeafStructure::Precontact { basis, .. } | InducedLeafStructure::Lcp { basis, .. } => basis,
        }
    }

    pub fn residual(&self) -> f64 {
        match self {
            InducedLeafStructure::Precontact { residual, .. } | InducedLeafStructure::Lcp { residual, .. } => *residual,
        }
    }
}

/// `Ψ_L(s_i, s_j) = i_{X_j} α_i + f_j g_i` on the frame.
fn psi_matrix(family: &DiracFamily, x: &[f64]) -> Result<DMatrix<f64>> {
    let n = family.dim();
    let vals = family.frame().iter().map(|s| s.eval(x)).collect::<Result<Vec<_>>>()?;
    let m = vals.len();
    Ok(DMatrix::from_fn(m, m, |i, j| {
        let (a, b) = (&vals[i], &vals[j]);
        let contraction: f64 = (0..n).map(|k| a[n + 1 + k] * b[k]).sum();
        contraction + b[n] * a[2 * n + 1]
    }))
}

fn singular(context: &str, residual: f64) -> Error {
    Error::SingularSystem { context: context.to_string(), residual }
}

pub fn induced_structure(family: &DiracFamily, x: &[f64]) -> Result<InducedLeafStructure> {
    let analysis = analyze_point(family, x)?;
    induced_from_analysis(family, &analysis)
}

pub(crate) fn induced_from_analysis(family: &DiracFamily, a: &PointAnalysis) -> Result<InducedLeafStructure> {
    let psi = psi_matrix(family, &a.point)?;
    let basis = a.image.clone();
    let r = a.rank;
    let leaf_anchor = basis.transpose() * &a.anchor;
    let scale = max_abs(&psi).max(1.0);
    match a.leaf_type {
        LeafType::Precontact => {
            // w_i = (ρ(s_i), φ(s_i)) in leaf coordinates; Ψ = Wᵀ M W with
            // M = [[Φ, −η], [ηᵀ, 0]].
            let mut w = leaf_anchor.insert_row(r, 0.0);
            w.row_mut(r).copy_from(&a.phi.transpose());
            let info = linalg::rank(&w);
            if info.rank != r + 1 || !info.well_conditioned() {
                return Err(singular("precontact leaf: (ρ, φ) is not onto T_xF × ℝ", info.gap));
            }
            let wp = linalg::pinv(&w, RANK_TAU);
            let m = wp.transpose() * &psi * &wp;
            let phi_leaf = (m.view((0, 0), (r, r)) - m.view((0, 0), (r, r)).transpose()) * 0.5;
            let eta_leaf = DVector::from_fn(r, |i, _| 0.5 * (m[(r, i)] - m[(i, r)]));
            let mut mm = DMatrix::zeros(r + 1, r + 1);
            mm.view_mut((0, 0), (r, r)).copy_from(&phi_leaf);
            mm.view_mut((0, r), (r, 1)).copy_from(&(-&eta_leaf));
            mm.view_mut((r, 0), (1, r)).copy_from(&eta_leaf.transpose());
            let residual = max_abs(&(w.transpose() * mm * &w - &psi));
            if residual > SOLVE_TOL * scale {
                return Err(singular("precontact leaf: Ψ_L is not of the form Φ + λη", residual));
            }
            Ok(InducedLeafStructure::Precontact {
                eta: &basis * eta_leaf,
                phi_form: &basis * phi_leaf * basis.transpose(),
                basis,
                residual,
            })
        }
        LeafType::Lcp => {
            let ap = linalg::pinv(&leaf_anchor, RANK_TAU);
            let om2 = ap.transpose() * &psi * &ap;
            let om2 = (&om2 - om2.transpose()) * 0.5;
            let om1: DVector<f64> = -(ap.transpose() * &a.phi);
            let r2 = max_abs(&(leaf_anchor.transpose() * &om2 * &leaf_anchor - &psi));
            let r1 = (leaf_anchor.transpose() * &om1 + &a.phi).amax();
            let residual = r2.max(r1);
            if residual > SOLVE_TOL * scale {
                return Err(singular("l.c.p. leaf: Ψ_L or φ does not factor through ρ", residual));
            }
            Ok(InducedLeafStructure::Lcp {
                omega2: &basis * om2 * basis.transpose(),
                omega1: &basis * om1,
                basis,
                residual,
            })
        }
    }
}

fn eta_at(family: &DiracFamily, y: &[f64]) -> Result<DVector<f64>> {
    match induced_structure(family, y)? {
        InducedLeafStructure::Precontact { eta, .. } => Ok(eta),
        InducedLeafStructure::Lcp { .. } => Err(singular("leaf type changed near the point", f64::NAN)),
    }
}

/// `max |Φ_F(U_i, U_j) − dη_F(U_i, U_j)|` over pairs of frame anchor fields,
/// with `dη_F(U, V) = U(η(V)) − V(η(U)) − η([U, V])` and the directional
/// derivatives taken by Richardson-extrapolated central differences.
pub fn precontact_consistency(family: &DiracFamily, x: &[f64], h: f64) -> Result<f64> {
    let (eta, phi_form) = match induced_structure(family, x)? {
        InducedLeafStructure::Precontact { eta, phi_form, .. } => (eta, phi_form),
        InducedLeafStructure::Lcp { .. } => return Err(Error::InvalidInput("point lies on an l.c.p. leaf".into())),
    };
    let frame = family.frame();
    let fields: Vec<_> = frame.iter().map(|s| &s.x).collect();
    let u_at = |i: usize, y: &[f64]| -> Result<DVector<f64>> { Ok(DVector::from_vec(fields[i].eval(y)?)) };
    // U_i(η(U_j)) at x
    let derivative = |i: usize, j: usize| -> Result<f64> {
        let ui = u_at(i, x)?;
        let g = |s: f64| -> Result<f64> {
            let y: Vec<f64> = x.iter().zip(ui.iter()).map(|(a, b)| a + s * b).collect();
            Ok(eta_at(family, &y)?.dot(&u_at(j, &y)?))
        };
        let central = |step: f64| -> Result<f64> { Ok((g(step)? - g(-step)?) / (2.0 * step)) };
        let (d1, d2) = (central(h)?, central(h / 2.0)?);
        Ok((4.0 * d2 - d1) / 3.0)
    };
    let mut worst = 0.0f64;
    for i in 0..frame.len() {
        let ui = u_at(i, x)?;
        if ui.amax() == 0.0 {
            continue;
        }
        for j in i + 1..frame.len() {
            let uj = u_at(j, x)?;
            if uj.amax() == 0.0 {
                continue;
            }
            let bracket = DVector::from_vec(lie_bracket(fields[i], fields[j])?.eval(x)?);
            let d_eta = derivative(i, j)? - derivative(j, i)? - eta.dot(&bracket);
            let phi_val = (ui.transpose() * &phi_form * &uj)[(0, 0)];
            worst = worst.max((phi_val - d_eta).abs());
        }
    }
    Ok(worst)
}

/// `(ω_F ∧ Ω_F)` on the leaf basis of a 3-dimensional l.c.p. leaf, or `ω_F`
/// on a 1-dimensional one.
pub fn lcp_volume(structure: &InducedLeafStructure) -> Result<f64> {
    let InducedLeafStructure::Lcp { basis, omega2, omega1, .. } = structure else {
        return Err(Error::InvalidInput("volume form needs an l.c.p. leaf".into()));
    };
    let w: Vec<f64> = (0..basis.ncols()).map(|k| omega1.dot(&basis.column(k))).collect();
    let o = basis.transpose() * omega2 * basis;
    match basis.ncols() {
        1 => Ok(w[0]),
        3 => Ok(w[0] * o[(1, 2)] - w[1] * o[(0, 2)] + w[2] * o[(0, 1)]),
        d => Err(Error::UnsupportedDegree { op: "lcp_volume", degree: d }),
    }
}

/// Fiber of the l.c.p. family of `(Ω, ω)` at a point, columns in
/// `(X, f, α, g)` coordinates.
pub fn lcp_fiber(omega2: &DMatrix<f64>, omega1: &DVector<f64>) -> DMatrix<f64> {
    let m = omega1.len();
    let mut out = DMatrix::zeros(2 * m + 2, m + 1);
    for i in 0..m {
        out[(i, i)] = 1.0;
        out[(m, i)] = -omega1[i];
        for j in 0..m {
            out[(m + 1 + j, i)] = omega2[(i, j)];
        }
    }
    for j in 0..m {
        out[(m + 1 + j, m)] = omega1[j];
    }
    out[(2 * m + 1, m)] = 1.0;
    out
}

/// Fiber of the precontact family of `η` with `Φ` in place of `dη`.
pub fn precontact_fiber(phi_form: &DMatrix<f64>, eta: &DVector<f64>) -> DMatrix<f64> {
    let m = eta.len();
    let mut out = DMatrix::zeros(2 * m + 2, m + 1);
    for i in 0..m {
        out[(i, i)] = 1.0;
        for j in 0..m {
            out[(m + 1 + j, i)] = phi_form[(i, j)];
        }
        out[(2 * m + 1, i)] = -eta[i];
    }
    out[(m, m)] = 1.0;
    for j in 0..m {
        out[(m + 1 + j, m)] = eta[j];
    }
    out
}
