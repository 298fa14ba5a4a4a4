use super::{increasing_tuples, same_chart, sort_with_sign, Alt, KForm, KVector, Variance, VectorField, MAX_DEGREE};
use crate::error::{Error, Result};
use crate::symexpr::Expr;

/// `[X, Y]^i = X^j ∂_j Y^i − Y^j ∂_j X^i`.
pub fn lie_bracket(x: &VectorField, y: &VectorField) -> Result<VectorField> {
    same_chart(x.chart(), y.chart())?;
    let comps = (0..x.chart().dim())
        .map(|i| (x.apply(y.component(i)) - y.apply(x.component(i))).simplify())
        .collect();
    VectorField::new(x.chart(), comps)
}

/// Coordinate exterior derivative of a form of degree 0, 1 or 2.
pub fn exterior_d(theta: &KForm) -> Result<KForm> {
    let k = theta.degree();
    if k >= MAX_DEGREE {
        return Err(Error::UnsupportedDegree { op: "exterior_d", degree: k });
    }
    let chart = theta.chart();
    let entries = increasing_tuples(chart.dim(), k + 1).into_iter().map(|idx| {
        let terms = (0..=k).map(|m| {
            let mut rest = idx.clone();
            let i = rest.remove(m);
            let c = theta.coeff(&rest).partial(i);
            if m % 2 == 0 {
                c
            } else {
                -c
            }
        });
        let value = Expr::sum(terms).simplify();
        (idx, value)
    });
    KForm::from_entries(chart, k + 1, entries)
}

/// Contraction `i_X θ` in the first slot.
pub fn interior(x: &VectorField, theta: &KForm) -> Result<KForm> {
    same_chart(x.chart(), theta.chart())?;
    let k = theta.degree();
    if k == 0 {
        return Err(Error::UnsupportedDegree { op: "interior", degree: 0 });
    }
    let n = x.chart().dim();
    let entries = increasing_tuples(n, k - 1).into_iter().map(|rest| {
        let terms = (0..n).filter(|j| !x.component(*j).is_zero()).map(|j| {
            let mut idx = Vec::with_capacity(k);
            idx.push(j);
            idx.extend_from_slice(&rest);
            x.component(j) * theta.coeff(&idx)
        });
        let value = Expr::sum(terms).simplify();
        (rest, value)
    });
    KForm::from_entries(x.chart(), k - 1, entries)
}

/// `L_X θ = i_X dθ + d i_X θ` for forms of degree 0, 1 or 2.
pub fn lie_derivative_form(x: &VectorField, theta: &KForm) -> Result<KForm> {
    same_chart(x.chart(), theta.chart())?;
    match theta.degree() {
        0 => Ok(KForm::scalar(x.chart(), x.apply(&theta.coeffs()[0]).simplify())),
        1 | 2 => {
            let a = interior(x, &exterior_d(theta)?)?;
            let b = exterior_d(&interior(x, theta)?)?;
            Ok(a.add(&b)?.simplify())
        }
        k => Err(Error::UnsupportedDegree { op: "lie_derivative_form", degree: k }),
    }
}

/// `(L_X Π)^ij = X^k ∂_k Π^ij − Π^kj ∂_k X^i − Π^ik ∂_k X^j`.
pub fn lie_derivative_bivector(x: &VectorField, p: &KVector) -> Result<KVector> {
    same_chart(x.chart(), p.chart())?;
    if p.degree() != 2 {
        return Err(Error::UnsupportedDegree { op: "lie_derivative_bivector", degree: p.degree() });
    }
    let n = x.chart().dim();
    let entries = increasing_tuples(n, 2).into_iter().map(|idx| {
        let (i, j) = (idx[0], idx[1]);
        let mut terms = vec![x.apply(&p.coeff(&[i, j]))];
        for k in 0..n {
            let dxi = x.component(i).partial(k);
            if !dxi.is_zero() {
                terms.push(-(p.coeff(&[k, j]) * dxi));
            }
            let dxj = x.component(j).partial(k);
            if !dxj.is_zero() {
                terms.push(-(p.coeff(&[i, k]) * dxj));
            }
        }
        (idx, Expr::sum(terms).simplify())
    });
    KVector::from_entries(x.chart(), 2, entries)
}

/// Graded product; both operands must have the same variance.
pub fn wedge<K: Variance>(a: &Alt<K>, b: &Alt<K>) -> Result<Alt<K>> {
    same_chart(a.chart(), b.chart())?;
    let (p, q) = (a.degree(), b.degree());
    if p + q > MAX_DEGREE {
        return Err(Error::UnsupportedDegree { op: "wedge", degree: p + q });
    }
    let n = a.chart().dim();
    let mut acc: Vec<Vec<Expr>> = vec![Vec::new(); super::binomial(n, p + q)];
    for (ia, ca) in a.entries() {
        if ca.is_zero() {
            continue;
        }
        for (ib, cb) in b.entries() {
            if cb.is_zero() {
                continue;
            }
            let joined: Vec<usize> = ia.iter().chain(ib.iter()).copied().collect();
            if let Some((sorted, sign)) = sort_with_sign(&joined) {
                let term = ca * cb;
                acc[super::tuple_rank(n, &sorted)].push(if sign > 0 { term } else { -term });
            }
        }
    }
    let entries = increasing_tuples(n, p + q).into_iter().zip(acc).map(|(idx, terms)| (idx, Expr::sum(terms).simplify()));
    Alt::from_entries(a.chart(), p + q, entries)
}

/// Schouten–Nijenhuis bracket for degree pairs (1,1), (1,2), (2,1), (2,2).
pub fn schouten(p: &KVector, q: &KVector) -> Result<KVector> {
    same_chart(p.chart(), q.chart())?;
    match (p.degree(), q.degree()) {
        (1, 1) => Ok(lie_bracket(&p.to_vector_field()?, &q.to_vector_field()?)?.to_kvector()),
        (1, 2) => lie_derivative_bivector(&p.to_vector_field()?, q),
        (2, 1) => Ok(lie_derivative_bivector(&q.to_vector_field()?, p)?.neg()),
        (2, 2) => Ok(schouten_bivectors(p, q)),
        (a, b) => Err(Error::UnsupportedDegree { op: "schouten", degree: a + b - 1 }),
    }
}

fn schouten_bivectors(p: &KVector, q: &KVector) -> KVector {
    let chart = p.chart();
    let n = chart.dim();
    let entries: Vec<_> = increasing_tuples(n, 3)
        .into_iter()
        .map(|idx| {
            let mut terms = Vec::new();
            for r in 0..3 {
                let (i, j, k) = (idx[r], idx[(r + 1) % 3], idx[(r + 2) % 3]);
                for l in 0..n {
                    let pli = p.coeff(&[l, i]);
                    if !pli.is_zero() {
                        let d = q.coeff(&[j, k]).partial(l);
                        if !d.is_zero() {
                            terms.push(&pli * &d);
                        }
                    }
                    let qli = q.coeff(&[l, i]);
                    if !qli.is_zero() {
                        let d = p.coeff(&[j, k]).partial(l);
                        if !d.is_zero() {
                            terms.push(&qli * &d);
                        }
                    }
                }
            }
            (idx, Expr::sum(terms).simplify())
        })
        .collect();
    KVector::from_entries(chart, 3, entries).expect("tuples are increasing")
}

/// `(#_Λ α)^j = Λ^ij α_i`.
pub fn sharp(lambda: &KVector, alpha: &KForm) -> Result<VectorField> {
    same_chart(lambda.chart(), alpha.chart())?;
    if lambda.degree() != 2 || alpha.degree() != 1 {
        return Err(Error::UnsupportedDegree { op: "sharp", degree: lambda.degree() });
    }
    let n = lambda.chart().dim();
    let comps = (0..n)
        .map(|j| {
            Expr::sum((0..n).filter(|&i| i != j && !alpha.coeffs()[i].is_zero()).map(|i| lambda.coeff(&[i, j]) * alpha.coeffs()[i].clone()))
                .simplify()
        })
        .collect();
    VectorField::new(lambda.chart(), comps)
}

/// `Ω(X, Y)` for a 2-form.
pub fn form2_apply(omega: &KForm, x: &VectorField, y: &VectorField) -> Result<Expr> {
    same_chart(omega.chart(), x.chart())?;
    same_chart(omega.chart(), y.chart())?;
    if omega.degree() != 2 {
        return Err(Error::UnsupportedDegree { op: "form2_apply", degree: omega.degree() });
    }
    let terms = omega.entries().filter(|(_, c)| !c.is_zero()).map(|(idx, c)| {
        let (i, j) = (idx[0], idx[1]);
        c * (x.component(i) * y.component(j) - x.component(j) * y.component(i))
    });
    Ok(Expr::sum(terms).simplify())
}
