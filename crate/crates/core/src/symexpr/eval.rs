use super::{Expr, Node};
use crate::error::{Error, Result};

impl Expr {
    /// Evaluates at `point`, which holds one value per variable index.
    pub fn eval(&self, point: &[f64]) -> Result<f64> {
        Ok(match self.node() {
            Node::Const(c) => c.to_f64(),
            Node::Var(i) => *point.get(*i).ok_or(Error::UnboundVariable(*i))?,
            Node::Sum(items) => {
                let mut acc = 0.0;
                for e in items {
                    acc += e.eval(point)?;
                }
                acc
            }
            Node::Product(items) => {
                let mut acc = 1.0;
                for e in items {
                    acc *= e.eval(point)?;
                }
                acc
            }
            Node::Quotient(a, b) => {
                let den = b.eval(point)?;
                if den == 0.0 {
                    return Err(self.domain("division by zero"));
                }
                a.eval(point)? / den
            }
            Node::Power(a, k) => {
                let base = a.eval(point)?;
                if *k < 0 && base == 0.0 {
                    return Err(self.domain("negative power of zero"));
                }
                base.powi(*k)
            }
            Node::Exp(a) => a.eval(point)?.exp(),
            Node::Log(a) => {
                let v = a.eval(point)?;
                if v <= 0.0 {
                    return Err(self.domain("logarithm of a non-positive value"));
                }
                v.ln()
            }
            Node::Sin(a) => a.eval(point)?.sin(),
            Node::Cos(a) => a.eval(point)?.cos(),
            Node::Neg(a) => -a.eval(point)?,
        })
    }

    fn domain(&self, reason: &'static str) -> Error {
        Error::Domain { subexpr: self.to_string(), reason }
    }
}
