//! Sections `(X, f) + (α, g)` of `(TM × ℝ) ⊕ (T*M × ℝ)` and of `TM ⊕ T*M`,
//! their pairings, and the brackets built on them.

use std::fmt;
use std::sync::Arc;

use crate::calculus::{exterior_d, interior, lie_bracket, lie_derivative_form, same_chart, KForm, VectorField};
use crate::error::{Error, Result};
use crate::symexpr::{Chart, Expr};

#[derive(Clone, PartialEq)]
pub struct E1Section {
    pub x: VectorField,
    pub f: Expr,
    pub alpha: KForm,
    pub g: Expr,
}

impl E1Section {
    pub fn new(x: VectorField, f: Expr, alpha: KForm, g: Expr) -> Result<Self> {
        same_chart(x.chart(), alpha.chart())?;
        if alpha.degree() != 1 {
            return Err(Error::UnsupportedDegree { op: "E1Section form part", degree: alpha.degree() });
        }
        Ok(Self { x, f, alpha, g })
    }

    pub fn zero(chart: &Arc<Chart>) -> Self {
        Self {
            x: VectorField::zero(chart),
            f: Expr::zero(),
            alpha: KForm::zero(chart, 1).expect("degree 1"),
            g: Expr::zero(),
        }
    }

    /// `(0, 0) + (0, 1)`.
    pub fn unit_g(chart: &Arc<Chart>) -> Self {
        Self { g: Expr::one(), ..Self::zero(chart) }
    }

    /// `(0, 1) + (0, 0)`.
    pub fn unit_f(chart: &Arc<Chart>) -> Self {
        Self { f: Expr::one(), ..Self::zero(chart) }
    }

    pub fn chart(&self) -> &Arc<Chart> {
        self.x.chart()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            x: self.x.add(&other.x)?,
            f: &self.f + &other.f,
            alpha: self.alpha.add(&other.alpha)?,
            g: &self.g + &other.g,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            x: self.x.sub(&other.x)?,
            f: &self.f - &other.f,
            alpha: self.alpha.sub(&other.alpha)?,
            g: &self.g - &other.g,
        })
    }

    pub fn scale(&self, h: &Expr) -> Self {
        Self { x: self.x.scale(h), f: &self.f * h, alpha: self.alpha.scale(h), g: &self.g * h }
    }

    pub fn simplify(&self) -> Self {
        Self { x: self.x.simplify(), f: self.f.simplify(), alpha: self.alpha.simplify(), g: self.g.simplify() }
    }

    pub fn rehome(&self, chart: &Arc<Chart>) -> Result<Self> {
        Ok(Self { x: self.x.rehome(chart)?, f: self.f.clone(), alpha: self.alpha.rehome(chart)?, g: self.g.clone() })
    }

    /// Fiber coordinates `(X^1..X^n, f, α_1..α_n, g)`.
    pub fn eval(&self, point: &[f64]) -> Result<Vec<f64>> {
        let mut v = self.x.eval(point)?;
        v.push(self.f.eval(point)?);
        v.extend(self.alpha.eval(point)?);
        v.push(self.g.eval(point)?);
        Ok(v)
    }

    pub fn max_abs_at(&self, point: &[f64]) -> Result<f64> {
        Ok(self.eval(point)?.into_iter().fold(0.0, |m, v| m.max(v.abs())))
    }
}

impl fmt::Debug for E1Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let chart = self.chart();
        write!(f, "({:?}, {}) + ({:?}, {})", self.x, self.f.display_with(chart), self.alpha, self.g.display_with(chart))
    }
}

/// `⟨e1, e2⟩₊ = ½(i_{X2}α1 + f2 g1 + i_{X1}α2 + f1 g2)`.
pub fn pairing_plus(e1: &E1Section, e2: &E1Section) -> Result<Expr> {
    same_chart(e1.chart(), e2.chart())?;
    let s = e1.alpha.apply(&e2.x) + &e2.f * &e1.g + e2.alpha.apply(&e1.x) + &e1.f * &e2.g;
    Ok((Expr::ratio(1, 2) * s).simplify())
}

/// `⟨e1, e2⟩₋ = ½(i_{X2}α1 + f2 g1 − i_{X1}α2 − f1 g2)`.
pub fn pairing_minus(e1: &E1Section, e2: &E1Section) -> Result<Expr> {
    same_chart(e1.chart(), e2.chart())?;
    let s = e1.alpha.apply(&e2.x) + &e2.f * &e1.g - e2.alpha.apply(&e1.x) - &e1.f * &e2.g;
    Ok((Expr::ratio(1, 2) * s).simplify())
}

/// `ρ((X, f) + (α, g)) = X`.
pub fn anchor(e: &E1Section) -> &VectorField {
    &e.x
}

/// The extended Courant bracket.
pub fn extended_bracket(e1: &E1Section, e2: &E1Section) -> Result<E1Section> {
    same_chart(e1.chart(), e2.chart())?;
    let chart = e1.chart();
    let half = Expr::ratio(1, 2);
    let (x1, x2) = (&e1.x, &e2.x);
    let (f1, f2, g1, g2) = (&e1.f, &e2.f, &e1.g, &e2.g);
    let i21 = interior(x2, &e1.alpha)?.coeffs()[0].clone();
    let i12 = interior(x1, &e2.alpha)?.coeffs()[0].clone();

    let x = lie_bracket(x1, x2)?;
    let f = (x1.apply(f2) - x2.apply(f1)).simplify();

    let d = |h: &Expr| KForm::differential(chart, h);
    let skew = exterior_d(&KForm::scalar(chart, &i21 - &i12))?;
    let alpha = lie_derivative_form(x1, &e2.alpha)?
        .sub(&lie_derivative_form(x2, &e1.alpha)?)?
        .add(&skew.scale(&half))?
        .add(&e2.alpha.scale(f1))?
        .sub(&e1.alpha.scale(f2))?
        .add(&d(f1).scale(g2).sub(&d(f2).scale(g1))?.sub(&d(g2).scale(f1))?.add(&d(g1).scale(f2))?.scale(&half))?
        .simplify();

    let g = (x1.apply(g2) - x2.apply(g1) + &half * (i21 - i12 - f2 * g1 + f1 * g2)).simplify();
    E1Section::new(x, f, alpha, g)
}

/// `[e1, h e2] − h[e1, e2] − ρ(e1)(h) e2 + ⟨e1, e2⟩₊ (0, 0) + (dh, 0)`; zero when the
/// Leibniz-type rule holds.
pub fn leibniz_defect(e1: &E1Section, e2: &E1Section, h: &Expr) -> Result<E1Section> {
    let chart = e1.chart();
    let lhs = extended_bracket(e1, &e2.scale(h))?;
    let dh = E1Section { alpha: KForm::differential(chart, h), ..E1Section::zero(chart) };
    Ok(lhs
        .sub(&extended_bracket(e1, e2)?.scale(h))?
        .sub(&e2.scale(&e1.x.apply(h)))?
        .add(&dh.scale(&pairing_plus(e1, e2)?))?
        .simplify())
}

/// `T_L(e1, e2, e3) = ⟨[e1, e2], e3⟩₊`.
pub fn t_tensor(e1: &E1Section, e2: &E1Section, e3: &E1Section) -> Result<Expr> {
    pairing_plus(&extended_bracket(e1, e2)?, e3)
}

/// Closed form of `T_L`, valid on pairwise isotropic triples:
/// `½ Σ_cyc (i_{[X1,X2]}α3 + g3 (X1(f2) − X2(f1)) + (X3 + f3)(i_{X2}α1 + f2 g1))`.
pub fn t_tensor_closed(e1: &E1Section, e2: &E1Section, e3: &E1Section) -> Result<Expr> {
    same_chart(e1.chart(), e2.chart())?;
    same_chart(e1.chart(), e3.chart())?;
    let mut terms = Vec::with_capacity(3);
    for (a, b, c) in [(e1, e2, e3), (e2, e3, e1), (e3, e1, e2)] {
        let p = a.alpha.apply(&b.x) + &b.f * &a.g;
        terms.push(
            c.alpha.apply(&lie_bracket(&a.x, &b.x)?)
                + &c.g * (a.x.apply(&b.f) - b.x.apply(&a.f))
                + c.x.apply(&p)
                + &c.f * &p,
        );
    }
    Ok((Expr::ratio(1, 2) * Expr::sum(terms)).simplify())
}

/// `Σ_cyc [[e1, e2], e3] − (0, 0) + (dT_L, T_L)`; zero on isotropic triples.
pub fn jacobiator_defect(e1: &E1Section, e2: &E1Section, e3: &E1Section) -> Result<E1Section> {
    let chart = e1.chart();
    let mut acc = E1Section::zero(chart);
    for (a, b, c) in [(e1, e2, e3), (e2, e3, e1), (e3, e1, e2)] {
        acc = acc.add(&extended_bracket(&extended_bracket(a, b)?, c)?)?;
    }
    let t = t_tensor(e1, e2, e3)?;
    let correction = E1Section { alpha: KForm::differential(chart, &t), g: t, ..E1Section::zero(chart) };
    Ok(acc.sub(&correction)?.simplify())
}

/// Section `X + α` of `TM ⊕ T*M`.
#[derive(Clone, PartialEq)]
pub struct TMSection {
    pub x: VectorField,
    pub alpha: KForm,
}

impl TMSection {
    pub fn new(x: VectorField, alpha: KForm) -> Result<Self> {
        same_chart(x.chart(), alpha.chart())?;
        if alpha.degree() != 1 {
            return Err(Error::UnsupportedDegree { op: "TMSection form part", degree: alpha.degree() });
        }
        Ok(Self { x, alpha })
    }

    pub fn zero(chart: &Arc<Chart>) -> Self {
        Self { x: VectorField::zero(chart), alpha: KForm::zero(chart, 1).expect("degree 1") }
    }

    pub fn chart(&self) -> &Arc<Chart> {
        self.x.chart()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Ok(Self { x: self.x.add(&other.x)?, alpha: self.alpha.add(&other.alpha)? })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Ok(Self { x: self.x.sub(&other.x)?, alpha: self.alpha.sub(&other.alpha)? })
    }

    pub fn scale(&self, h: &Expr) -> Self {
        Self { x: self.x.scale(h), alpha: self.alpha.scale(h) }
    }

    pub fn simplify(&self) -> Self {
        Self { x: self.x.simplify(), alpha: self.alpha.simplify() }
    }

    /// Fiber coordinates `(X^1..X^n, α_1..α_n)`.
    pub fn eval(&self, point: &[f64]) -> Result<Vec<f64>> {
        let mut v = self.x.eval(point)?;
        v.extend(self.alpha.eval(point)?);
        Ok(v)
    }

    pub fn max_abs_at(&self, point: &[f64]) -> Result<f64> {
        Ok(self.eval(point)?.into_iter().fold(0.0, |m, v| m.max(v.abs())))
    }
}

impl fmt::Debug for TMSection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} + {:?}", self.x, self.alpha)
    }
}

/// `½(α1(X2) + α2(X1))`.
pub fn tm_pairing_plus(s1: &TMSection, s2: &TMSection) -> Result<Expr> {
    same_chart(s1.chart(), s2.chart())?;
    Ok((Expr::ratio(1, 2) * (s1.alpha.apply(&s2.x) + s2.alpha.apply(&s1.x))).simplify())
}

/// `½(α1(X2) − α2(X1))`.
pub fn tm_pairing_minus(s1: &TMSection, s2: &TMSection) -> Result<Expr> {
    same_chart(s1.chart(), s2.chart())?;
    Ok((Expr::ratio(1, 2) * (s1.alpha.apply(&s2.x) - s2.alpha.apply(&s1.x))).simplify())
}

/// `[X1 + α1, X2 + α2] = [X1, X2] + L_{X1}α2 − L_{X2}α1 + ½ d(i_{X2}α1 − i_{X1}α2)`.
pub fn courant_bracket(s1: &TMSection, s2: &TMSection) -> Result<TMSection> {
    same_chart(s1.chart(), s2.chart())?;
    let chart = s1.chart();
    let skew = s1.alpha.apply(&s2.x) - s2.alpha.apply(&s1.x);
    let alpha = lie_derivative_form(&s1.x, &s2.alpha)?
        .sub(&lie_derivative_form(&s2.x, &s1.alpha)?)?
        .add(&KForm::differential(chart, &skew).scale(&Expr::ratio(1, 2)))?
        .simplify();
    TMSection::new(lie_bracket(&s1.x, &s2.x)?, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::parse_expr;

    fn sec(chart: &Arc<Chart>, x: &[&str], f: &str, a: &[&str], g: &str) -> E1Section {
        let p = |t: &str| parse_expr(t, chart).unwrap();
        E1Section::new(
            VectorField::new(chart, x.iter().map(|t| p(t)).collect()).unwrap(),
            p(f),
            KForm::from_components(chart, a.iter().map(|t| p(t)).collect()).unwrap(),
            p(g),
        )
        .unwrap()
    }

    #[test]
    fn pairings() {
        let r1 = Arc::new(Chart::standard(1));
        let e = sec(&r1, &["1"], "0", &["1"], "0");
        assert_eq!(pairing_plus(&e, &e).unwrap(), Expr::one());
        let a = sec(&r1, &["1"], "0", &["0"], "0");
        let b = sec(&r1, &["0"], "0", &["1"], "0");
        assert_eq!(pairing_plus(&a, &b).unwrap(), Expr::ratio(1, 2));
        assert_eq!(pairing_minus(&a, &b).unwrap(), Expr::ratio(-1, 2));
        assert_eq!(pairing_minus(&b, &a).unwrap(), Expr::ratio(1, 2));
        assert_eq!(pairing_plus(&E1Section::unit_f(&r1), &E1Section::unit_g(&r1)).unwrap(), Expr::ratio(1, 2));
        let w = sec(&r1, &["x^2"], "sin(x)", &["exp(x)"], "x");
        assert!(pairing_minus(&w, &w).unwrap().is_zero());
    }

    #[test]
    fn anchor_is_the_vector_part() {
        let r2 = Arc::new(Chart::standard(2));
        let e = sec(&r2, &["1", "0"], "3", &["0", "1"], "5");
        assert_eq!(anchor(&e), &VectorField::coordinate(&r2, 0));
    }

    #[test]
    fn bracket_examples() {
        let r1 = Arc::new(Chart::standard(1));
        let a = sec(&r1, &["1"], "0", &["0"], "0");
        let b = sec(&r1, &["0"], "0", &["x"], "0");
        let br = extended_bracket(&a, &b).unwrap();
        assert!(br.x.component(0).is_zero() && br.f.is_zero());
        assert_eq!(br.alpha.coeffs()[0], Expr::ratio(1, 2));
        assert_eq!(br.g.eval(&[3.0]).unwrap(), -1.5);

        let br = extended_bracket(&E1Section::unit_f(&r1), &E1Section::unit_g(&r1)).unwrap();
        assert_eq!(br.g, Expr::ratio(1, 2));
        assert!(br.alpha.is_literal_zero() && br.f.is_zero());

        let r2 = Arc::new(Chart::standard(2));
        let u = sec(&r2, &["y", "x^2"], "0", &["0", "0"], "0");
        let v = sec(&r2, &["1", "x*y"], "0", &["0", "0"], "0");
        let br = extended_bracket(&u, &v).unwrap();
        assert_eq!(br.x, lie_bracket(&u.x, &v.x).unwrap());
        assert!(br.f.is_zero() && br.g.is_zero() && br.alpha.is_literal_zero());
    }

    #[test]
    fn courant_examples() {
        let r1 = Arc::new(Chart::standard(1));
        let p = |t: &str| parse_expr(t, &r1).unwrap();
        let a = TMSection::new(VectorField::coordinate(&r1, 0), KForm::zero(&r1, 1).unwrap()).unwrap();
        let b = TMSection::new(VectorField::zero(&r1), KForm::from_components(&r1, vec![p("x")]).unwrap()).unwrap();
        let br = courant_bracket(&a, &b).unwrap();
        assert!(br.x.component(0).is_zero());
        assert_eq!(br.alpha.coeffs()[0], Expr::ratio(1, 2));
        let df = TMSection::new(VectorField::zero(&r1), KForm::differential(&r1, &p("x^3"))).unwrap();
        let dg = TMSection::new(VectorField::zero(&r1), KForm::differential(&r1, &p("sin(x)"))).unwrap();
        let br = courant_bracket(&df, &dg).unwrap();
        assert!(br.x.component(0).is_zero() && br.alpha.is_literal_zero());
    }

    #[test]
    fn leibniz_with_constant_h_is_exactly_zero() {
        let r2 = Arc::new(Chart::standard(2));
        let e1 = sec(&r2, &["y", "x"], "x*y", &["1", "y^2"], "x");
        let e2 = sec(&r2, &["x^2", "1"], "y", &["x", "0"], "1");
        let d = leibniz_defect(&e1, &e2, &Expr::int(3)).unwrap();
        assert!(d.max_abs_at(&[0.4, -0.7]).unwrap() < 1e-15);
        let d = leibniz_defect(&e1, &E1Section::zero(&r2), &parse_expr("x*y", &r2).unwrap()).unwrap();
        assert!(d.max_abs_at(&[0.4, -0.7]).unwrap() == 0.0);
    }

    #[test]
    fn t_tensor_with_zero_argument() {
        let r2 = Arc::new(Chart::standard(2));
        let e1 = sec(&r2, &["y", "x"], "x*y", &["1", "y^2"], "x");
        let e2 = sec(&r2, &["x^2", "1"], "y", &["x", "0"], "1");
        let z = E1Section::zero(&r2);
        assert!(t_tensor(&e1, &e2, &z).unwrap().is_zero());
        assert!(t_tensor_closed(&e1, &e2, &z).unwrap().eval(&[0.2, 0.3]).is_ok());
    }

    #[test]
    fn jacobiator_of_constant_sections_vanishes() {
        let r2 = Arc::new(Chart::standard(2));
        let a = sec(&r2, &["1", "2"], "3", &["0", "0"], "0");
        let b = sec(&r2, &["0", "1"], "1", &["0", "0"], "0");
        let c = sec(&r2, &["2", "0"], "5", &["0", "0"], "0");
        assert!(jacobiator_defect(&a, &b, &c).unwrap().max_abs_at(&[0.1, 0.2]).unwrap() < 1e-15);
    }
}
