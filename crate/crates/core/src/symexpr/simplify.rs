use super::{Expr, Node, Number};

impl Expr {
    /// Value-preserving cleanup: zero/one elimination, constant folding,
    /// like-term collection within each sum and like-base collection within
    /// each product. Not a canonical form.
    pub fn simplify(&self) -> Expr {
        match self.node() {
            Node::Const(_) | Node::Var(_) => self.clone(),
            Node::Sum(items) => collect_terms(items.iter().map(Expr::simplify)),
            Node::Product(items) => collect_factors(items.iter().map(Expr::simplify)),
            Node::Quotient(a, b) => {
                let (a, b) = (a.simplify(), b.simplify());
                if a == b && !a.is_constant() {
                    return Expr::one();
                }
                Expr::quotient(&a, &b)
            }
            Node::Power(a, k) => a.simplify().powi(*k),
            Node::Exp(a) => a.simplify().exp(),
            Node::Log(a) => a.simplify().log(),
            Node::Sin(a) => a.simplify().sin(),
            Node::Cos(a) => a.simplify().cos(),
            Node::Neg(a) => -a.simplify(),
        }
    }
}

/// Splits a term into numeric coefficient and remaining body (`None` for a pure constant).
fn split_coefficient(term: &Expr) -> (Number, Option<Expr>) {
    match term.node() {
        Node::Const(c) => (*c, None),
        Node::Neg(inner) => {
            let (c, body) = split_coefficient(inner);
            (c.neg(), body)
        }
        Node::Product(items) => match items[0].as_const() {
            Some(c) => (c, Some(Expr::product(items[1..].iter().cloned()))),
            None => (Number::int(1), Some(term.clone())),
        },
        _ => (Number::int(1), Some(term.clone())),
    }
}

fn collect_terms(terms: impl Iterator<Item = Expr>) -> Expr {
    let flat = Expr::sum(terms);
    let items: Vec<Expr> = match flat.node() {
        Node::Sum(items) => items.clone(),
        _ => return flat,
    };
    let mut constant = Number::int(0);
    let mut groups: Vec<(Expr, Number)> = Vec::new();
    for term in &items {
        match split_coefficient(term) {
            (c, None) => constant = constant.add(c),
            (c, Some(body)) => match groups.iter_mut().find(|(b, _)| *b == body) {
                Some((_, acc)) => *acc = acc.add(c),
                None => groups.push((body, c)),
            },
        }
    }
    Expr::sum(
        groups
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(body, c)| Expr::constant(c) * body)
            .chain(std::iter::once(Expr::constant(constant))),
    )
}

fn collect_factors(factors: impl Iterator<Item = Expr>) -> Expr {
    let flat = Expr::product(factors);
    let (negate, items): (bool, Vec<Expr>) = match flat.node() {
        Node::Product(items) => (false, items.clone()),
        Node::Neg(inner) => match inner.node() {
            Node::Product(items) => (true, items.clone()),
            _ => return flat,
        },
        _ => return flat,
    };
    let mut constant = Number::int(if negate { -1 } else { 1 });
    let mut groups: Vec<(Expr, i32)> = Vec::new();
    for factor in &items {
        let (base, k) = match factor.node() {
            Node::Const(c) => {
                constant = constant.mul(*c);
                continue;
            }
            Node::Power(b, k) => (b.clone(), *k),
            _ => (factor.clone(), 1),
        };
        match groups.iter_mut().find(|(b, _)| *b == base) {
            Some((_, acc)) => *acc = acc.saturating_add(k),
            None => groups.push((base, k)),
        }
    }
    Expr::product(
        std::iter::once(Expr::constant(constant)).chain(groups.into_iter().map(|(b, k)| b.powi(k))),
    )
}
