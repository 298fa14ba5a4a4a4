//! Model presentations of the family algebroids and their agreement with the
//! extended bracket.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{certify, DiracFamily, FamilyKind, ModelSection, Verdict};
use crate::calculus::{form2_apply, lie_bracket, lie_derivative_form, sharp, KForm, KVector, VectorField};
use crate::error::{Error, Result};
use crate::sampling::{random_polynomial, SampleConfig};
use crate::sections::extended_bracket;
use crate::symexpr::Expr;

/// The family's own bracket on model sections.
pub fn model_bracket(family: &DiracFamily, a: &ModelSection, b: &ModelSection) -> Result<ModelSection> {
    use ModelSection::{Cotangent, Tangent};
    let out = match (family.kind(), a, b) {
        (FamilyKind::DiracGraph2Form { omega }, Tangent { x, f }, Tangent { x: y, f: g }) => {
            lcp_bracket(omega, None, x, f, y, g)?
        }
        (FamilyKind::Lcp { omega2, omega1 }, Tangent { x, f }, Tangent { x: y, f: g }) => {
            lcp_bracket(omega2, Some(omega1), x, f, y, g)?
        }
        (FamilyKind::Precontact { .. }, Tangent { x, f }, Tangent { x: y, f: g }) => {
            Tangent { x: lie_bracket(x, y)?, f: (x.apply(g) - y.apply(f)).simplify() }
        }
        (FamilyKind::DiracGraphBivector { lambda }, Cotangent { alpha, f }, Cotangent { alpha: beta, f: g }) => {
            jacobi_bracket(lambda, None, alpha, f, beta, g)?
        }
        (FamilyKind::Jacobi { lambda, e }, Cotangent { alpha, f }, Cotangent { alpha: beta, f: g }) => {
            jacobi_bracket(lambda, Some(e), alpha, f, beta, g)?
        }
        (FamilyKind::HomogeneousPoisson { pi, z }, Cotangent { alpha, f }, Cotangent { alpha: beta, f: g }) => {
            let (sa, sb) = (sharp(pi, alpha)?, sharp(pi, beta)?);
            let chart = family.chart();
            let form = lie_derivative_form(&sa, beta)?
                .sub(&lie_derivative_form(&sb, alpha)?)?
                .sub(&KForm::differential(chart, &pi.apply2(alpha, beta)))?
                .sub(&lie_derivative_form(z, beta)?.sub(beta)?.scale(f))?
                .add(&lie_derivative_form(z, alpha)?.sub(alpha)?.scale(g))?
                .simplify();
            let scalar = sa.apply(g) - sb.apply(f) + g * z.apply(f) - f * z.apply(g);
            Cotangent { alpha: form, f: scalar.simplify() }
        }
        _ => {
            return Err(Error::InvalidInput(format!("model sections do not match the {} family", family.kind().tag())))
        }
    };
    Ok(out)
}

/// `([X, Y], Ω(X, Y) + X(g) − g ω(X) − Y(f) + f ω(Y))`.
fn lcp_bracket(
    omega2: &KForm,
    omega1: Option<&KForm>,
    x: &VectorField,
    f: &Expr,
    y: &VectorField,
    g: &Expr,
) -> Result<ModelSection> {
    let mut scalar = form2_apply(omega2, x, y)? + x.apply(g) - y.apply(f);
    if let Some(w) = omega1 {
        scalar = scalar - g * w.apply(x) + f * w.apply(y);
    }
    Ok(ModelSection::Tangent { x: lie_bracket(x, y)?, f: scalar.simplify() })
}

/// `(L_{#α}β − L_{#β}α − d Λ(α, β) + f L_E β − g L_E α − i_E(α∧β),
///   Λ(β, α) + #α(g) − #β(f) + f E(g) − g E(f))`.
fn jacobi_bracket(
    lambda: &KVector,
    e: Option<&VectorField>,
    alpha: &KForm,
    f: &Expr,
    beta: &KForm,
    g: &Expr,
) -> Result<ModelSection> {
    let chart = lambda.chart();
    let (sa, sb) = (sharp(lambda, alpha)?, sharp(lambda, beta)?);
    let lab = lambda.apply2(alpha, beta);
    let mut form = lie_derivative_form(&sa, beta)?
        .sub(&lie_derivative_form(&sb, alpha)?)?
        .sub(&KForm::differential(chart, &lab))?;
    let mut scalar = -lab + sa.apply(g) - sb.apply(f);
    if let Some(e) = e {
        let i_e = beta.scale(&alpha.apply(e)).sub(&alpha.scale(&beta.apply(e)))?;
        form = form
            .add(&lie_derivative_form(e, beta)?.scale(f))?
            .sub(&lie_derivative_form(e, alpha)?.scale(g))?
            .sub(&i_e)?;
        scalar = scalar + f * e.apply(g) - g * e.apply(f);
    }
    Ok(ModelSection::Cotangent { alpha: form.simplify(), f: scalar.simplify() })
}

/// Model section with random polynomial coefficients of degree ≤ 2.
pub fn random_model_section<R: Rng>(family: &DiracFamily, rng: &mut R) -> ModelSection {
    let chart = family.chart();
    let n = chart.dim();
    let mut poly = || random_polynomial(rng, n, 2, 3);
    let comps: Vec<Expr> = (0..n).map(|_| poly()).collect();
    let f = poly();
    if family.kind().tangent_model() {
        ModelSection::Tangent { x: VectorField::new(chart, comps).expect("n components"), f }
    } else {
        ModelSection::Cotangent { alpha: KForm::from_components(chart, comps).expect("n components"), f }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelBracketReport {
    pub pairs: usize,
    pub points: usize,
    pub max_residual: f64,
}

/// Compares `section(model_bracket(a, b))` with `[section(a), section(b)]` on
/// `pairs` seeded random pairs, at the configured sample points.
pub fn model_bracket_check(family: &DiracFamily, config: &SampleConfig, pairs: usize, tol: f64) -> Result<ModelBracketReport> {
    let report = certify(family, config, tol)?;
    if report.verdict != Verdict::Integrable {
        let worst = report.worst();
        return Err(Error::NotIntegrable { residual: worst.name.clone(), value: worst.max_abs });
    }
    let points = config.points(family.dim());
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x6d6f_64656c);
    let mut max_residual = 0.0f64;
    for _ in 0..pairs {
        let a = random_model_section(family, &mut rng);
        let b = random_model_section(family, &mut rng);
        let lhs = family.section_from_model(&model_bracket(family, &a, &b)?)?;
        let rhs = extended_bracket(&family.section_from_model(&a)?, &family.section_from_model(&b)?)?;
        let diff = lhs.sub(&rhs)?;
        for p in &points {
            max_residual = max_residual.max(diff.max_abs_at(p)?);
        }
    }
    Ok(ModelBracketReport { pairs, points: points.len(), max_residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::{parse_expr, Chart};
    use std::sync::Arc;

    #[test]
    fn precontact_model_bracket_is_the_vector_field_bracket() {
        let c = Arc::new(Chart::standard(3));
        let eta = KForm::from_components(&c, vec![parse_expr("-y", &c).unwrap(), Expr::zero(), Expr::one()]).unwrap();
        let fam = DiracFamily::from_precontact(eta).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_model_section(&fam, &mut rng);
        let b = random_model_section(&fam, &mut rng);
        let lifted = extended_bracket(&fam.section_from_model(&a).unwrap(), &fam.section_from_model(&b).unwrap()).unwrap();
        let (ModelSection::Tangent { x, f }, ModelSection::Tangent { x: y, f: g }) = (&a, &b) else { unreachable!() };
        let want_x = lie_bracket(x, y).unwrap();
        let want_f = x.apply(g) - y.apply(f);
        let p = [0.2, -0.6, 0.4];
        let got = lifted.eval(&p).unwrap();
        let wx = want_x.eval(&p).unwrap();
        for i in 0..3 {
            assert!((got[i] - wx[i]).abs() < 1e-12);
        }
        assert!((got[3] - want_f.eval(&p).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn mismatched_models_are_rejected() {
        let c = Arc::new(Chart::standard(2));
        let fam = DiracFamily::from_precontact(KForm::zero(&c, 1).unwrap()).unwrap();
        let m = ModelSection::Cotangent { alpha: KForm::coordinate(&c, 0), f: Expr::zero() };
        assert!(model_bracket(&fam, &m, &m).is_err());
    }
}
