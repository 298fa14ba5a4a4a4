//! Exact scalar expressions over chart variables.
//!
//! An [`Expr`] is an immutable, reference-counted tree. The arithmetic
//! constructors apply cheap local rewrites (zero/one elimination, constant
//! folding, flattening) so that trees produced by repeated differentiation
//! stay small; [`Expr::simplify`] performs a full bottom-up pass on top of that.

mod chart;
mod diff;
mod eval;
mod number;
mod parse;
mod simplify;

use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

pub use chart::Chart;
pub use number::Number;
pub use parse::{parse_expr, parse_expr_at};

/// Node of an expression tree.
#[derive(Debug, PartialEq, Eq, Hash)]
pub enum Node {
    Const(Number),
    /// Variable index: chart coordinates first, then `t` at index `dim`.
    Var(usize),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Quotient(Expr, Expr),
    Power(Expr, i32),
    Exp(Expr),
    Log(Expr),
    Sin(Expr),
    Cos(Expr),
    Neg(Expr),
}

#[derive(Debug)]
struct Inner {
    node: Node,
    /// Bitmask of referenced variables; indices >= 63 share the top bit.
    vars: u64,
}

#[derive(Clone)]
pub struct Expr(Arc<Inner>);

fn var_bit(index: usize) -> u64 {
    1u64 << index.min(63)
}

impl Expr {
    fn from_node(node: Node) -> Self {
        let vars = match &node {
            Node::Const(_) => 0,
            Node::Var(i) => var_bit(*i),
            Node::Sum(items) | Node::Product(items) => items.iter().fold(0, |m, e| m | e.0.vars),
            Node::Quotient(a, b) => a.0.vars | b.0.vars,
            Node::Power(a, _)
            | Node::Exp(a)
            | Node::Log(a)
            | Node::Sin(a)
            | Node::Cos(a)
            | Node::Neg(a) => a.0.vars,
        };
        Expr(Arc::new(Inner { node, vars }))
    }

    pub fn node(&self) -> &Node {
        &self.0.node
    }

    pub fn constant(n: Number) -> Self {
        Self::from_node(Node::Const(n))
    }

    pub fn int(v: i64) -> Self {
        Self::constant(Number::int(v))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Self::constant(Number::ratio(num, den))
    }

    pub fn float(v: f64) -> Self {
        Self::constant(Number::Float(v))
    }

    pub fn zero() -> Self {
        Self::int(0)
    }

    pub fn one() -> Self {
        Self::int(1)
    }

    pub fn var(index: usize) -> Self {
        Self::from_node(Node::Var(index))
    }

    pub fn as_const(&self) -> Option<Number> {
        match self.node() {
            Node::Const(n) => Some(*n),
            _ => None,
        }
    }

    /// True only for a literal zero; this is not a value test.
    pub fn is_zero(&self) -> bool {
        self.as_const().is_some_and(Number::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.as_const().is_some_and(Number::is_one)
    }

    /// Whether the expression syntactically references variable `index`.
    pub fn depends_on(&self, index: usize) -> bool {
        self.0.vars & var_bit(index) != 0
    }

    pub fn is_constant(&self) -> bool {
        self.0.vars == 0
    }

    /// Largest referenced variable index, if any.
    pub fn max_var(&self) -> Option<usize> {
        let mut best = None;
        self.visit(&mut |e| {
            if let Node::Var(i) = e.node() {
                best = Some(best.map_or(*i, |b: usize| b.max(*i)));
            }
        });
        best
    }

    fn visit(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match self.node() {
            Node::Const(_) | Node::Var(_) => {}
            Node::Sum(items) | Node::Product(items) => items.iter().for_each(|e| e.visit(f)),
            Node::Quotient(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Node::Power(a, _)
            | Node::Exp(a)
            | Node::Log(a)
            | Node::Sin(a)
            | Node::Cos(a)
            | Node::Neg(a) => a.visit(f),
        }
    }

    /// Number of nodes, counting shared subtrees once per occurrence.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }

    pub fn sum<I: IntoIterator<Item = Expr>>(terms: I) -> Expr {
        let mut out = Vec::new();
        let mut constant = Number::int(0);
        for term in terms {
            match term.node() {
                Node::Const(c) => constant = constant.add(*c),
                Node::Sum(inner) => {
                    for t in inner {
                        match t.node() {
                            Node::Const(c) => constant = constant.add(*c),
                            _ => out.push(t.clone()),
                        }
                    }
                }
                _ => out.push(term),
            }
        }
        if !constant.is_zero() {
            out.push(Expr::constant(constant));
        }
        match out.len() {
            0 => Expr::zero(),
            1 => out.pop().unwrap(),
            _ => Self::from_node(Node::Sum(out)),
        }
    }

    pub fn product<I: IntoIterator<Item = Expr>>(factors: I) -> Expr {
        let mut out = Vec::new();
        let mut constant = Number::int(1);
        for factor in factors {
            match factor.node() {
                Node::Const(c) => constant = constant.mul(*c),
                Node::Product(inner) => {
                    for t in inner {
                        match t.node() {
                            Node::Const(c) => constant = constant.mul(*c),
                            _ => out.push(t.clone()),
                        }
                    }
                }
                Node::Neg(inner) => {
                    constant = constant.neg();
                    match inner.node() {
                        Node::Product(items) => {
                            for t in items {
                                match t.node() {
                                    Node::Const(c) => constant = constant.mul(*c),
                                    _ => out.push(t.clone()),
                                }
                            }
                        }
                        _ => out.push(inner.clone()),
                    }
                }
                _ => out.push(factor),
            }
            if constant.is_zero() {
                return Expr::zero();
            }
        }
        if out.is_empty() {
            return Expr::constant(constant);
        }
        if constant.is_one() {
            if out.len() == 1 {
                return out.pop().unwrap();
            }
            return Self::from_node(Node::Product(out));
        }
        if constant == Number::int(-1) {
            let body = if out.len() == 1 { out.pop().unwrap() } else { Self::from_node(Node::Product(out)) };
            return Self::from_node(Node::Neg(body));
        }
        out.insert(0, Expr::constant(constant));
        Self::from_node(Node::Product(out))
    }

    pub fn neg_of(e: &Expr) -> Expr {
        match e.node() {
            Node::Const(c) => Expr::constant(c.neg()),
            Node::Neg(inner) => inner.clone(),
            Node::Product(items) if items[0].as_const().is_some() => {
                let c = items[0].as_const().unwrap().neg();
                Expr::product(std::iter::once(Expr::constant(c)).chain(items[1..].iter().cloned()))
            }
            _ => Self::from_node(Node::Neg(e.clone())),
        }
    }

    pub fn quotient(a: &Expr, b: &Expr) -> Expr {
        if let Some(d) = b.as_const() {
            if let Some(r) = d.recip() {
                return a * &Expr::constant(r);
            }
        }
        if a.is_zero() {
            return Expr::zero();
        }
        Self::from_node(Node::Quotient(a.clone(), b.clone()))
    }

    pub fn powi(&self, k: i32) -> Expr {
        match k {
            0 => return Expr::one(),
            1 => return self.clone(),
            _ => {}
        }
        match self.node() {
            Node::Const(c) => {
                if let Some(v) = c.powi(k) {
                    return Expr::constant(v);
                }
            }
            Node::Power(base, m) => {
                if let Some(km) = m.checked_mul(k) {
                    return base.powi(km);
                }
            }
            _ => {}
        }
        Self::from_node(Node::Power(self.clone(), k))
    }

    pub fn exp(&self) -> Expr {
        if self.is_zero() {
            return Expr::one();
        }
        Self::from_node(Node::Exp(self.clone()))
    }

    pub fn log(&self) -> Expr {
        if self.is_one() {
            return Expr::zero();
        }
        Self::from_node(Node::Log(self.clone()))
    }

    pub fn sin(&self) -> Expr {
        if self.is_zero() {
            return Expr::zero();
        }
        Self::from_node(Node::Sin(self.clone()))
    }

    pub fn cos(&self) -> Expr {
        if self.is_zero() {
            return Expr::one();
        }
        Self::from_node(Node::Cos(self.clone()))
    }

    /// Rewrites every variable index through `map`.
    pub fn remap_vars(&self, map: &impl Fn(usize) -> usize) -> Expr {
        match self.node() {
            Node::Const(_) => self.clone(),
            Node::Var(i) => Expr::var(map(*i)),
            Node::Sum(items) => Expr::sum(items.iter().map(|e| e.remap_vars(map))),
            Node::Product(items) => Expr::product(items.iter().map(|e| e.remap_vars(map))),
            Node::Quotient(a, b) => Expr::quotient(&a.remap_vars(map), &b.remap_vars(map)),
            Node::Power(a, k) => a.remap_vars(map).powi(*k),
            Node::Exp(a) => a.remap_vars(map).exp(),
            Node::Log(a) => a.remap_vars(map).log(),
            Node::Sin(a) => a.remap_vars(map).sin(),
            Node::Cos(a) => a.remap_vars(map).cos(),
            Node::Neg(a) => -a.remap_vars(map),
        }
    }

    /// Replaces variable `index` by `value` everywhere.
    pub fn substitute(&self, index: usize, value: &Expr) -> Expr {
        if !self.depends_on(index) {
            return self.clone();
        }
        match self.node() {
            Node::Const(_) => self.clone(),
            Node::Var(i) if *i == index => value.clone(),
            Node::Var(_) => self.clone(),
            Node::Sum(items) => Expr::sum(items.iter().map(|e| e.substitute(index, value))),
            Node::Product(items) => Expr::product(items.iter().map(|e| e.substitute(index, value))),
            Node::Quotient(a, b) => Expr::quotient(&a.substitute(index, value), &b.substitute(index, value)),
            Node::Power(a, k) => a.substitute(index, value).powi(*k),
            Node::Exp(a) => a.substitute(index, value).exp(),
            Node::Log(a) => a.substitute(index, value).log(),
            Node::Sin(a) => a.substitute(index, value).sin(),
            Node::Cos(a) => a.substitute(index, value).cos(),
            Node::Neg(a) => -a.substitute(index, value),
        }
    }

    /// Renders with chart variable names; the output re-parses to an equal value.
    pub fn display_with<'a>(&'a self, chart: &'a Chart) -> impl fmt::Display + 'a {
        Named { expr: self, chart: Some(chart) }
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.node == other.0.node
    }
}

impl Eq for Expr {}

impl Hash for Expr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.node.hash(state);
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Named { expr: self, chart: None }.fmt(f)
    }
}

impl From<i64> for Expr {
    fn from(v: i64) -> Self {
        Expr::int(v)
    }
}

impl From<f64> for Expr {
    fn from(v: f64) -> Self {
        Expr::float(v)
    }
}

struct Named<'a> {
    expr: &'a Expr,
    chart: Option<&'a Chart>,
}

// Precedence levels: 1 sum, 2 product/quotient/negation, 3 power base, 4 atom.
impl Named<'_> {
    fn write(&self, e: &Expr, f: &mut fmt::Formatter<'_>, parent: u8) -> fmt::Result {
        let prec = precedence(e);
        if prec < parent {
            write!(f, "(")?;
            self.write_bare(e, f)?;
            write!(f, ")")
        } else {
            self.write_bare(e, f)
        }
    }

    fn write_bare(&self, e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match e.node() {
            Node::Const(c) => write!(f, "{c}"),
            Node::Var(i) => match self.chart {
                Some(chart) => write!(f, "{}", chart.var_name(*i)),
                None => write!(f, "v{i}"),
            },
            Node::Sum(items) => {
                for (k, term) in items.iter().enumerate() {
                    if k == 0 {
                        self.write(term, f, 1)?;
                        continue;
                    }
                    match term.node() {
                        Node::Neg(inner) => {
                            write!(f, " - ")?;
                            self.write(inner, f, 2)?;
                        }
                        Node::Const(c) if c.is_negative() => {
                            write!(f, " - ")?;
                            self.write(&Expr::constant(c.neg()), f, 2)?;
                        }
                        _ => {
                            write!(f, " + ")?;
                            self.write(term, f, 2)?;
                        }
                    }
                }
                Ok(())
            }
            Node::Product(items) => {
                for (k, factor) in items.iter().enumerate() {
                    if k > 0 {
                        write!(f, "*")?;
                    }
                    // a non-integer rational inside a product needs its own parentheses
                    self.write(factor, f, if k == 0 { 2 } else { 3 })?;
                }
                Ok(())
            }
            Node::Quotient(a, b) => {
                self.write(a, f, 2)?;
                write!(f, "/")?;
                self.write(b, f, 3)
            }
            Node::Power(a, k) => {
                self.write(a, f, 4)?;
                write!(f, "^{k}")
            }
            Node::Neg(a) => {
                write!(f, "-")?;
                self.write(a, f, 3)
            }
            Node::Exp(a) => self.call("exp", a, f),
            Node::Log(a) => self.call("log", a, f),
            Node::Sin(a) => self.call("sin", a, f),
            Node::Cos(a) => self.call("cos", a, f),
        }
    }

    fn call(&self, name: &str, arg: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{name}(")?;
        self.write(arg, f, 0)?;
        write!(f, ")")
    }
}

fn precedence(e: &Expr) -> u8 {
    match e.node() {
        Node::Const(Number::Rational(r)) if !r.is_integer() => 2,
        Node::Const(c) if c.is_negative() => 2,
        Node::Const(_) | Node::Var(_) => 4,
        Node::Sum(_) => 1,
        Node::Product(_) | Node::Quotient(..) | Node::Neg(_) => 2,
        Node::Power(..) => 3,
        Node::Exp(_) | Node::Log(_) | Node::Sin(_) | Node::Cos(_) => 4,
    }
}

impl fmt::Display for Named<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(self.expr, f, 0)
    }
}

macro_rules! binary_ops {
    ($trait:ident, $method:ident, $body:expr) => {
        impl $trait<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                let f: fn(&Expr, &Expr) -> Expr = $body;
                f(self, rhs)
            }
        }
        impl $trait<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                (&self).$method(rhs)
            }
        }
        impl $trait<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                self.$method(&rhs)
            }
        }
    };
}

binary_ops!(Add, add, |a, b| Expr::sum([a.clone(), b.clone()]));
binary_ops!(Sub, sub, |a, b| Expr::sum([a.clone(), Expr::neg_of(b)]));
binary_ops!(Mul, mul, |a, b| Expr::product([a.clone(), b.clone()]));
binary_ops!(Div, div, Expr::quotient);

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg_of(self)
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg_of(&self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Expr {
        Expr::var(0)
    }
    fn y() -> Expr {
        Expr::var(1)
    }

    #[test]
    fn constructors_fold_constants() {
        assert_eq!(Expr::int(2) + Expr::int(3), Expr::int(5));
        assert_eq!(x() * Expr::zero(), Expr::zero());
        assert_eq!(x() * Expr::one(), x());
        assert_eq!(-(-x()), x());
        assert_eq!(Expr::one() / Expr::int(2), Expr::ratio(1, 2));
        assert_eq!(Expr::zero().exp(), Expr::one());
    }

    #[test]
    fn dependency_mask() {
        let e = x() * y().sin();
        assert!(e.depends_on(0) && e.depends_on(1) && !e.depends_on(2));
        assert!(Expr::int(4).is_constant());
        assert_eq!(e.max_var(), Some(1));
    }

    #[test]
    fn display_round_trips_through_parser() {
        let chart = Chart::standard(2);
        let e = (x() - y() * Expr::ratio(1, 2)) / (x() + Expr::int(2)).powi(2) - y().exp();
        let text = e.display_with(&chart).to_string();
        let back = parse_expr(&text, &chart).unwrap();
        for p in [[0.3, -0.7], [1.5, 2.0]] {
            assert_eq!(e.eval(&p).unwrap().to_bits(), back.eval(&p).unwrap().to_bits(), "{text}");
        }
    }
}
