use super::{Expr, Node};

impl Expr {
    /// Exact partial derivative with respect to variable `index`.
    pub fn partial(&self, index: usize) -> Expr {
        if !self.depends_on(index) {
            return Expr::zero();
        }
        match self.node() {
            Node::Const(_) => Expr::zero(),
            Node::Var(i) => {
                if *i == index {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Node::Sum(items) => Expr::sum(items.iter().map(|e| e.partial(index))),
            Node::Product(items) => Expr::sum((0..items.len()).filter_map(|k| {
                let dk = items[k].partial(index);
                if dk.is_zero() {
                    return None;
                }
                Some(Expr::product(
                    items.iter().enumerate().map(|(j, e)| if j == k { dk.clone() } else { e.clone() }),
                ))
            })),
            Node::Quotient(a, b) => {
                let (da, db) = (a.partial(index), b.partial(index));
                if db.is_zero() {
                    return &da / b;
                }
                (&da * b - a * &db) / b.powi(2)
            }
            Node::Power(a, k) => Expr::int(i64::from(*k)) * a.powi(k - 1) * a.partial(index),
            Node::Exp(a) => self * &a.partial(index),
            Node::Log(a) => a.partial(index) / a,
            Node::Sin(a) => a.cos() * a.partial(index),
            Node::Cos(a) => -(a.sin() * a.partial(index)),
            Node::Neg(a) => -a.partial(index),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_rules() {
        let (x, y) = (Expr::var(0), Expr::var(1));
        assert_eq!((&x * &y).partial(0), y);
        let t = Expr::var(3);
        let e = (-&t).exp() * &x;
        let d = e.partial(3);
        let expected = -((-&t).exp() * &x);
        for p in [[0.5, 0.0, 0.0, 1.2], [-2.0, 1.0, 0.0, -0.4]] {
            assert!((d.eval(&p).unwrap() - expected.eval(&p).unwrap()).abs() < 1e-15);
        }
        assert!(x.partial(1).is_zero());
    }
}
