//! The algebroid `A × ℝ → M × ℝ` with anchor `ρ + φ ∂_t`. Its sections are
//! E1Sections on a chart carrying `t` as a parameter.

use std::sync::Arc;

use crate::calculus::VectorField;
use crate::error::{Error, Result};
use crate::sections::{extended_bracket, E1Section};
use crate::symexpr::{Chart, Expr};

fn time_chart(e: &E1Section) -> Result<usize> {
    let chart = e.chart();
    if !chart.is_time_extended() {
        return Err(Error::InvalidInput("time-dependent sections need a chart with t".into()));
    }
    Ok(chart.time_index())
}

/// Componentwise `∂/∂t`.
pub fn time_derivative(e: &E1Section) -> Result<E1Section> {
    let t = time_chart(e)?;
    let dt = |h: &Expr| h.partial(t).simplify();
    Ok(E1Section {
        x: VectorField::new(e.chart(), e.x.comps().iter().map(dt).collect())?,
        f: dt(&e.f),
        alpha: e.alpha.map_coeffs(dt),
        g: dt(&e.g),
    })
}

/// `ρ̄(ē) = X + f ∂_t` as a vector field on `extended`, the chart of `M × ℝ`.
pub fn bar_anchor(e: &E1Section, extended: &Arc<Chart>) -> Result<VectorField> {
    time_chart(e)?;
    let mut comps = e.x.comps().to_vec();
    comps.push(e.f.clone());
    VectorField::new(extended, comps)
}

/// `[ē₁, ē₂] + φ(ē₁) ∂_t ē₂ − φ(ē₂) ∂_t ē₁`, with `[,]` the frozen-time
/// extended bracket and `φ` the f-component.
pub fn bar_bracket(a: &E1Section, b: &E1Section) -> Result<E1Section> {
    let frozen = extended_bracket(a, b)?;
    let (da, db) = (time_derivative(a)?, time_derivative(b)?);
    Ok(frozen.add(&db.scale(&a.f))?.sub(&da.scale(&b.f))?.simplify())
}

#[cfg(test)]
mod tests {
    use super::super::tests::jacobi;
    use super::*;
    use crate::sampling::SampleConfig;
    use crate::symexpr::parse_expr;

    fn timed(fam: &crate::families::DiracFamily) -> (Arc<Chart>, Vec<E1Section>) {
        let c = Arc::new(fam.chart().with_time().unwrap());
        let frame = fam.frame().iter().map(|s| s.rehome(&c).unwrap()).collect();
        (c, frame)
    }

    #[test]
    fn time_independent_sections_use_the_frozen_bracket() {
        let fam = jacobi(&[(0, 1, "1"), (1, 2, "-y")], &["0", "0", "1"]);
        let (_, f) = timed(&fam);
        let got = bar_bracket(&f[1], &f[3]).unwrap().sub(&extended_bracket(&f[1], &f[3]).unwrap()).unwrap();
        assert_eq!(got.max_abs_at(&[0.3, 0.2, -0.1, 0.7]).unwrap(), 0.0);
    }

    #[test]
    fn t_scaled_section_picks_up_phi_terms() {
        let fam = jacobi(&[(0, 1, "1"), (1, 2, "-y")], &["0", "0", "1"]);
        let (c, f) = timed(&fam);
        let t = parse_expr("t", &c).unwrap();
        // φ(s_i) = −dx^i(E): φ(s_0) = φ(s_3) = 0, φ(s_2) = −1
        let a = f[3].scale(&t);
        let b = f[0].clone();
        let got = bar_bracket(&a, &b).unwrap();
        // [t s3, s0] = t [s3, s0] − s0(t) s3 + ⟨..⟩ terms vanish since t is a parameter;
        // the bar terms add φ(a) ∂_t b − φ(b) ∂_t a = 0 − 0.
        let want = extended_bracket(&f[3], &f[0]).unwrap().scale(&t);
        let b2 = bar_bracket(&b, &a).unwrap();
        for p in SampleConfig::default().points(4) {
            assert!(got.sub(&want).unwrap().max_abs_at(&p).unwrap() < 1e-12);
            assert!(got.add(&b2).unwrap().max_abs_at(&p).unwrap() < 1e-12);
        }
        // φ(b) ≠ 0: b = s2, a = t s0 → extra −φ(s2) ∂_t(t s0) = s0
        let got = bar_bracket(&f[0].scale(&t), &f[2]).unwrap();
        let want = extended_bracket(&f[0], &f[2]).unwrap().scale(&t).add(&f[0]).unwrap();
        assert!(got.sub(&want).unwrap().max_abs_at(&[0.1, 0.4, -0.3, 2.0]).unwrap() < 1e-12);
    }

    #[test]
    fn anchor_carries_phi_on_dt() {
        let fam = jacobi(&[(0, 1, "1")], &["0", "1", "0"]);
        let (_, f) = timed(&fam);
        let ext = Arc::new(fam.chart().extended().unwrap());
        let v = bar_anchor(&f[0], &ext).unwrap();
        // s_0 = (#dx, −dx(E)) = (∂y, 0)
        assert_eq!(v.eval(&[0.0; 4]).unwrap(), vec![0.0, 1.0, 0.0, 0.0]);
        let v = bar_anchor(&f[1], &ext).unwrap();
        assert_eq!(v.eval(&[0.0; 4]).unwrap(), vec![-1.0, 0.0, 0.0, -1.0]);
        assert!(bar_anchor(&fam.frame()[0], &ext).is_err());
    }
}
