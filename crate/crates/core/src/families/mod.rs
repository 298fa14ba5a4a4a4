//! The five families of Dirac structures in `(TM × ℝ) ⊕ (T*M × ℝ)`, each
//! presented by a frame of `n + 1` generating sections.

mod certify;
mod model;

use std::fmt;
use std::sync::Arc;

use crate::calculus::{interior, same_chart, sharp, KForm, KVector, VectorField};
use crate::error::{Error, Result};
use crate::sections::E1Section;
use crate::symexpr::{Chart, Expr};

pub use certify::{certify, CertificationReport, NamedResidual, Verdict};
pub use model::{model_bracket, model_bracket_check, random_model_section, ModelBracketReport};

#[derive(Clone, PartialEq)]
pub enum FamilyKind {
    /// Graph of a 2-form `Ω`: sections `(X, 0) + (i_X Ω, f)`.
    DiracGraph2Form { omega: KForm },
    /// Graph of a bivector `Λ`: sections `(#_Λ α, 0) + (α, f)`.
    DiracGraphBivector { lambda: KVector },
    /// Locally conformal presymplectic pair: `(X, −i_X ω) + (i_X Ω + f ω, f)`.
    Lcp { omega2: KForm, omega1: KForm },
    /// Precontact form: `(X, f) + (i_X dη + f η, −i_X η)`.
    Precontact { eta: KForm },
    /// Jacobi pair: `(#_Λ α + f E, −i_E α) + (α, f)`.
    Jacobi { lambda: KVector, e: VectorField },
    /// Homogeneous Poisson pair: `(#_Π α − f Z, f) + (α, i_Z α)`.
    HomogeneousPoisson { pi: KVector, z: VectorField },
}

impl FamilyKind {
    pub fn tag(&self) -> &'static str {
        match self {
            FamilyKind::DiracGraph2Form { .. } => "dirac_2form",
            FamilyKind::DiracGraphBivector { .. } => "dirac_bivector",
            FamilyKind::Lcp { .. } => "lcp",
            FamilyKind::Precontact { .. } => "precontact",
            FamilyKind::Jacobi { .. } => "jacobi",
            FamilyKind::HomogeneousPoisson { .. } => "homogeneous_poisson",
        }
    }

    /// Whether model sections are pairs `(X, f)` rather than `(α, f)`.
    pub fn tangent_model(&self) -> bool {
        matches!(self, FamilyKind::DiracGraph2Form { .. } | FamilyKind::Lcp { .. } | FamilyKind::Precontact { .. })
    }
}

impl fmt::Debug for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyKind::DiracGraph2Form { omega } => write!(f, "DiracGraph2Form({omega:?})"),
            FamilyKind::DiracGraphBivector { lambda } => write!(f, "DiracGraphBivector({lambda:?})"),
            FamilyKind::Lcp { omega2, omega1 } => write!(f, "Lcp({omega2:?}, {omega1:?})"),
            FamilyKind::Precontact { eta } => write!(f, "Precontact({eta:?})"),
            FamilyKind::Jacobi { lambda, e } => write!(f, "Jacobi({lambda:?}, {e:?})"),
            FamilyKind::HomogeneousPoisson { pi, z } => write!(f, "HomogeneousPoisson({pi:?}, {z:?})"),
        }
    }
}

/// Element of the model presentation of a family's algebroid.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSection {
    Tangent { x: VectorField, f: Expr },
    Cotangent { alpha: KForm, f: Expr },
}

impl ModelSection {
    pub fn f(&self) -> &Expr {
        match self {
            ModelSection::Tangent { f, .. } | ModelSection::Cotangent { f, .. } => f,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DiracFamily {
    kind: FamilyKind,
    chart: Arc<Chart>,
    frame: Vec<E1Section>,
    phi: Vec<Expr>,
}

fn check_degree(op: &'static str, degree: usize, want: usize) -> Result<()> {
    if degree == want {
        Ok(())
    } else {
        Err(Error::UnsupportedDegree { op, degree })
    }
}

impl DiracFamily {
    pub fn from_dirac_graph_form(omega: KForm) -> Result<Self> {
        check_degree("dirac graph 2-form", omega.degree(), 2)?;
        Self::build(FamilyKind::DiracGraph2Form { omega })
    }

    pub fn from_dirac_graph_bivector(lambda: KVector) -> Result<Self> {
        check_degree("dirac graph bivector", lambda.degree(), 2)?;
        Self::build(FamilyKind::DiracGraphBivector { lambda })
    }

    pub fn from_lcp(omega2: KForm, omega1: KForm) -> Result<Self> {
        check_degree("lcp 2-form", omega2.degree(), 2)?;
        check_degree("lcp 1-form", omega1.degree(), 1)?;
        same_chart(omega2.chart(), omega1.chart())?;
        Self::build(FamilyKind::Lcp { omega2, omega1 })
    }

    pub fn from_precontact(eta: KForm) -> Result<Self> {
        check_degree("precontact form", eta.degree(), 1)?;
        Self::build(FamilyKind::Precontact { eta })
    }

    pub fn from_jacobi(lambda: KVector, e: VectorField) -> Result<Self> {
        check_degree("jacobi bivector", lambda.degree(), 2)?;
        same_chart(lambda.chart(), e.chart())?;
        Self::build(FamilyKind::Jacobi { lambda, e })
    }

    pub fn from_homogeneous_poisson(pi: KVector, z: VectorField) -> Result<Self> {
        check_degree("homogeneous poisson bivector", pi.degree(), 2)?;
        same_chart(pi.chart(), z.chart())?;
        Self::build(FamilyKind::HomogeneousPoisson { pi, z })
    }

    fn build(kind: FamilyKind) -> Result<Self> {
        let chart = match &kind {
            FamilyKind::DiracGraph2Form { omega } => omega.chart().clone(),
            FamilyKind::DiracGraphBivector { lambda } => lambda.chart().clone(),
            FamilyKind::Lcp { omega2, .. } => omega2.chart().clone(),
            FamilyKind::Precontact { eta } => eta.chart().clone(),
            FamilyKind::Jacobi { lambda, .. } => lambda.chart().clone(),
            FamilyKind::HomogeneousPoisson { pi, .. } => pi.chart().clone(),
        };
        let mut family = Self { kind, chart, frame: Vec::new(), phi: Vec::new() };
        let basis = family.model_basis();
        family.frame = basis.iter().map(|m| family.section_from_model(m)).collect::<Result<_>>()?;
        family.phi = family.frame.iter().map(|s| s.f.clone()).collect();
        Ok(family)
    }

    pub fn kind(&self) -> &FamilyKind {
        &self.kind
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    /// The `n + 1` generating sections.
    pub fn frame(&self) -> &[E1Section] {
        &self.frame
    }

    /// `φ_L(s_i)`, the f-components of the frame.
    pub fn phi(&self) -> &[Expr] {
        &self.phi
    }

    /// `(∂_1, 0), …, (∂_n, 0), (0, 1)` or `(dx^1, 0), …, (dx^n, 0), (0, 1)`.
    pub fn model_basis(&self) -> Vec<ModelSection> {
        let n = self.dim();
        let chart = &self.chart;
        let mut out: Vec<ModelSection> = (0..n)
            .map(|i| {
                if self.kind.tangent_model() {
                    ModelSection::Tangent { x: VectorField::coordinate(chart, i), f: Expr::zero() }
                } else {
                    ModelSection::Cotangent { alpha: KForm::coordinate(chart, i), f: Expr::zero() }
                }
            })
            .collect();
        out.push(if self.kind.tangent_model() {
            ModelSection::Tangent { x: VectorField::zero(chart), f: Expr::one() }
        } else {
            ModelSection::Cotangent { alpha: KForm::zero(chart, 1).expect("degree 1"), f: Expr::one() }
        });
        out
    }

    /// Image of a model section under the family's section formula.
    pub fn section_from_model(&self, m: &ModelSection) -> Result<E1Section> {
        let scalar = |theta: KForm| theta.coeffs()[0].clone();
        let s = match (&self.kind, m) {
            (FamilyKind::DiracGraph2Form { omega }, ModelSection::Tangent { x, f }) => {
                E1Section::new(x.clone(), Expr::zero(), interior(x, omega)?, f.clone())?
            }
            (FamilyKind::Lcp { omega2, omega1 }, ModelSection::Tangent { x, f }) => E1Section::new(
                x.clone(),
                -scalar(interior(x, omega1)?),
                interior(x, omega2)?.add(&omega1.scale(f))?,
                f.clone(),
            )?,
            (FamilyKind::Precontact { eta }, ModelSection::Tangent { x, f }) => {
                let deta = crate::calculus::exterior_d(eta)?;
                E1Section::new(
                    x.clone(),
                    f.clone(),
                    interior(x, &deta)?.add(&eta.scale(f))?,
                    -scalar(interior(x, eta)?),
                )?
            }
            (FamilyKind::DiracGraphBivector { lambda }, ModelSection::Cotangent { alpha, f }) => {
                E1Section::new(sharp(lambda, alpha)?, Expr::zero(), alpha.clone(), f.clone())?
            }
            (FamilyKind::Jacobi { lambda, e }, ModelSection::Cotangent { alpha, f }) => E1Section::new(
                sharp(lambda, alpha)?.add(&e.scale(f))?,
                -alpha.apply(e),
                alpha.clone(),
                f.clone(),
            )?,
            (FamilyKind::HomogeneousPoisson { pi, z }, ModelSection::Cotangent { alpha, f }) => E1Section::new(
                sharp(pi, alpha)?.sub(&z.scale(f))?,
                f.clone(),
                alpha.clone(),
                alpha.apply(z),
            )?,
            _ => {
                return Err(Error::InvalidInput(format!(
                    "{} family takes {} model sections",
                    self.kind.tag(),
                    if self.kind.tangent_model() { "(X, f)" } else { "(α, f)" }
                )))
            }
        };
        Ok(s.simplify())
    }

    /// Frame values at `point` as columns of a `(2n + 2) × (n + 1)` matrix.
    pub fn frame_matrix(&self, point: &[f64]) -> Result<nalgebra::DMatrix<f64>> {
        let cols = self.frame.iter().map(|s| s.eval(point)).collect::<Result<Vec<_>>>()?;
        Ok(crate::linalg::from_columns(&cols))
    }

    /// Same family with every coefficient viewed on `chart` (same coordinates,
    /// e.g. with a time parameter attached).
    pub fn rehome(&self, chart: &Arc<Chart>) -> Result<Self> {
        let kind = match &self.kind {
            FamilyKind::DiracGraph2Form { omega } => FamilyKind::DiracGraph2Form { omega: omega.rehome(chart)? },
            FamilyKind::DiracGraphBivector { lambda } => FamilyKind::DiracGraphBivector { lambda: lambda.rehome(chart)? },
            FamilyKind::Lcp { omega2, omega1 } => {
                FamilyKind::Lcp { omega2: omega2.rehome(chart)?, omega1: omega1.rehome(chart)? }
            }
            FamilyKind::Precontact { eta } => FamilyKind::Precontact { eta: eta.rehome(chart)? },
            FamilyKind::Jacobi { lambda, e } => FamilyKind::Jacobi { lambda: lambda.rehome(chart)?, e: e.rehome(chart)? },
            FamilyKind::HomogeneousPoisson { pi, z } => {
                FamilyKind::HomogeneousPoisson { pi: pi.rehome(chart)?, z: z.rehome(chart)? }
            }
        };
        Ok(Self {
            kind,
            chart: chart.clone(),
            frame: self.frame.iter().map(|s| s.rehome(chart)).collect::<Result<_>>()?,
            phi: self.phi.clone(),
        })
    }
}
