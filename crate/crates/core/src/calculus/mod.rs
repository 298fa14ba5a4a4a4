//! Coordinate tensor calculus on a single chart: vector fields, k-forms and
//! k-vectors (k <= 3), and the brackets and derivatives built from them.
//!
//! Conventions:
//! - `dx^i ∧ dx^j` has coefficient 1 on the increasing pair `(i, j)`, and a
//!   2-form acts as `Ω(X, Y) = Σ Ω_ij X^i Y^j` over all ordered pairs.
//! - `i_X` contracts the first slot.
//! - `#_Λ α` is defined by `β(#_Λ α) = Λ(α, β)`, i.e. `(#_Λ α)^j = Λ^ij α_i`.
//! - The Schouten bracket of a vector field with a multivector is the Lie
//!   derivative; on bivectors `[Λ, Λ]^ijk = 2 Σ_cyc Λ^li ∂_l Λ^jk`, the sign
//!   under which Jacobi pairs satisfy `[Λ, Λ] = 2 E ∧ Λ`.

mod ops;

use std::fmt;
use std::marker::PhantomData;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::symexpr::{Chart, Expr};

pub use ops::{
    exterior_d, form2_apply, interior, lie_bracket, lie_derivative_bivector, lie_derivative_form, schouten, sharp,
    wedge,
};

pub const MAX_DEGREE: usize = 3;

pub(crate) fn same_chart(a: &Arc<Chart>, b: &Arc<Chart>) -> Result<()> {
    if Arc::ptr_eq(a, b) || a.compatible(b) {
        Ok(())
    } else {
        Err(Error::ChartMismatch)
    }
}

/// Vector field `Σ X^i ∂_i`.
#[derive(Clone, PartialEq)]
pub struct VectorField {
    chart: Arc<Chart>,
    comps: Vec<Expr>,
}

impl VectorField {
    pub fn new(chart: &Arc<Chart>, comps: Vec<Expr>) -> Result<Self> {
        if comps.len() != chart.dim() {
            return Err(Error::InvalidInput(format!(
                "vector field needs {} components, got {}",
                chart.dim(),
                comps.len()
            )));
        }
        Ok(Self { chart: chart.clone(), comps })
    }

    pub fn zero(chart: &Arc<Chart>) -> Self {
        Self { chart: chart.clone(), comps: vec![Expr::zero(); chart.dim()] }
    }

    /// The coordinate field `∂_i`.
    pub fn coordinate(chart: &Arc<Chart>, i: usize) -> Self {
        let mut v = Self::zero(chart);
        v.comps[i] = Expr::one();
        v
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn comps(&self) -> &[Expr] {
        &self.comps
    }

    pub fn component(&self, i: usize) -> &Expr {
        &self.comps[i]
    }

    /// Derivative of `f` along the field, `X(f) = Σ X^j ∂_j f`.
    pub fn apply(&self, f: &Expr) -> Expr {
        Expr::sum(self.comps.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(j, c)| c * f.partial(j)))
    }

    pub fn scale(&self, s: &Expr) -> Self {
        Self { chart: self.chart.clone(), comps: self.comps.iter().map(|c| c * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        same_chart(&self.chart, &other.chart)?;
        Ok(Self { chart: self.chart.clone(), comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a + b).collect() })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        same_chart(&self.chart, &other.chart)?;
        Ok(Self { chart: self.chart.clone(), comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a - b).collect() })
    }

    pub fn neg(&self) -> Self {
        Self { chart: self.chart.clone(), comps: self.comps.iter().map(|c| -c).collect() }
    }

    pub fn simplify(&self) -> Self {
        Self { chart: self.chart.clone(), comps: self.comps.iter().map(Expr::simplify).collect() }
    }

    pub fn eval(&self, point: &[f64]) -> Result<Vec<f64>> {
        self.comps.iter().map(|c| c.eval(point)).collect()
    }

    /// Same components on another chart with the same coordinates.
    pub fn rehome(&self, chart: &Arc<Chart>) -> Result<Self> {
        same_chart(&self.chart, chart)?;
        Ok(Self { chart: chart.clone(), comps: self.comps.clone() })
    }

    pub fn to_kvector(&self) -> KVector {
        Alt { chart: self.chart.clone(), degree: 1, coeffs: self.comps.clone(), _kind: PhantomData }
    }
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "VectorField[")?;
        for (i, c) in self.comps.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", c.display_with(&self.chart))?;
        }
        write!(f, "]")
    }
}

mod sealed {
    pub trait Sealed {}
}

/// Index placement of an alternating tensor.
pub trait Variance: sealed::Sealed + Clone + PartialEq {
    const NAME: &'static str;
}

/// Covariant (differential form) indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lower;
/// Contravariant (multivector) indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Upper;

impl sealed::Sealed for Lower {}
impl sealed::Sealed for Upper {}
impl Variance for Lower {
    const NAME: &'static str = "form";
}
impl Variance for Upper {
    const NAME: &'static str = "multivector";
}

/// Alternating tensor of degree `k <= 3`, stored on strictly increasing
/// index tuples in lexicographic order.
#[derive(Clone, PartialEq)]
pub struct Alt<K: Variance> {
    chart: Arc<Chart>,
    degree: usize,
    coeffs: Vec<Expr>,
    _kind: PhantomData<K>,
}

pub type KForm = Alt<Lower>;
pub type KVector = Alt<Upper>;

impl<K: Variance> Alt<K> {
    pub fn zero(chart: &Arc<Chart>, degree: usize) -> Result<Self> {
        if degree > MAX_DEGREE {
            return Err(Error::UnsupportedDegree { op: "alternating tensor", degree });
        }
        let len = binomial(chart.dim(), degree);
        Ok(Self { chart: chart.clone(), degree, coeffs: vec![Expr::zero(); len], _kind: PhantomData })
    }

    /// Degree-0 tensor holding a single scalar.
    pub fn scalar(chart: &Arc<Chart>, f: Expr) -> Self {
        Self { chart: chart.clone(), degree: 0, coeffs: vec![f], _kind: PhantomData }
    }

    /// Builds from entries on strictly increasing index tuples; repeated
    /// tuples accumulate.
    pub fn from_entries<I>(chart: &Arc<Chart>, degree: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<usize>, Expr)>,
    {
        let mut out = Self::zero(chart, degree)?;
        for (idx, value) in entries {
            if idx.len() != degree
                || idx.windows(2).any(|w| w[0] >= w[1])
                || idx.iter().any(|&i| i >= chart.dim())
            {
                return Err(Error::InvalidInput(format!(
                    "{} entry {:?} is not a strictly increasing {}-tuple below {}",
                    K::NAME,
                    idx,
                    degree,
                    chart.dim()
                )));
            }
            let r = tuple_rank(chart.dim(), &idx);
            out.coeffs[r] = &out.coeffs[r] + &value;
        }
        Ok(out)
    }

    /// Degree-1 tensor from its `n` components.
    pub fn from_components(chart: &Arc<Chart>, comps: Vec<Expr>) -> Result<Self> {
        if comps.len() != chart.dim() {
            return Err(Error::InvalidInput(format!("expected {} components, got {}", chart.dim(), comps.len())));
        }
        Ok(Self { chart: chart.clone(), degree: 1, coeffs: comps, _kind: PhantomData })
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Coefficients in lexicographic order of increasing tuples.
    pub fn coeffs(&self) -> &[Expr] {
        &self.coeffs
    }

    /// Coefficient on an arbitrary index tuple, with the permutation sign;
    /// zero when an index repeats.
    pub fn coeff(&self, idx: &[usize]) -> Expr {
        debug_assert_eq!(idx.len(), self.degree);
        match sort_with_sign(idx) {
            None => Expr::zero(),
            Some((sorted, sign)) => {
                let c = &self.coeffs[tuple_rank(self.chart.dim(), &sorted)];
                if sign > 0 {
                    c.clone()
                } else {
                    -c
                }
            }
        }
    }

    /// Entries as `(increasing tuple, coefficient)` pairs.
    pub fn entries(&self) -> impl Iterator<Item = (Vec<usize>, &Expr)> {
        increasing_tuples(self.chart.dim(), self.degree).into_iter().zip(self.coeffs.iter())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| a - b)
    }

    fn combine(&self, other: &Self, f: impl Fn(&Expr, &Expr) -> Expr) -> Result<Self> {
        same_chart(&self.chart, &other.chart)?;
        if self.degree != other.degree {
            return Err(Error::InvalidInput(format!("degree {} vs {}", self.degree, other.degree)));
        }
        Ok(self.with_coeffs(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| f(a, b)).collect()))
    }

    pub fn scale(&self, s: &Expr) -> Self {
        self.with_coeffs(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn neg(&self) -> Self {
        self.with_coeffs(self.coeffs.iter().map(|c| -c).collect())
    }

    pub fn simplify(&self) -> Self {
        self.with_coeffs(self.coeffs.iter().map(Expr::simplify).collect())
    }

    pub fn map_coeffs(&self, f: impl Fn(&Expr) -> Expr) -> Self {
        self.with_coeffs(self.coeffs.iter().map(f).collect())
    }

    fn with_coeffs(&self, coeffs: Vec<Expr>) -> Self {
        Self { chart: self.chart.clone(), degree: self.degree, coeffs, _kind: PhantomData }
    }

    pub fn rehome(&self, chart: &Arc<Chart>) -> Result<Self> {
        same_chart(&self.chart, chart)?;
        Ok(Self { chart: chart.clone(), ..self.clone() })
    }

    pub fn is_literal_zero(&self) -> bool {
        self.coeffs.iter().all(Expr::is_zero)
    }

    /// Numeric coefficients on increasing tuples.
    pub fn eval(&self, point: &[f64]) -> Result<Vec<f64>> {
        self.coeffs.iter().map(|c| c.eval(point)).collect()
    }

    /// Largest absolute coefficient at `point`.
    pub fn max_abs_at(&self, point: &[f64]) -> Result<f64> {
        Ok(self.eval(point)?.into_iter().fold(0.0, |m, v| m.max(v.abs())))
    }

    /// Full antisymmetric matrix of a degree-2 tensor at `point`.
    pub fn matrix_at(&self, point: &[f64]) -> Result<Vec<Vec<f64>>> {
        if self.degree != 2 {
            return Err(Error::UnsupportedDegree { op: "matrix_at", degree: self.degree });
        }
        let n = self.chart.dim();
        let mut m = vec![vec![0.0; n]; n];
        for (idx, c) in self.entries() {
            let v = c.eval(point)?;
            m[idx[0]][idx[1]] = v;
            m[idx[1]][idx[0]] = -v;
        }
        Ok(m)
    }
}

impl KForm {
    /// Differential of a scalar, `df`.
    pub fn differential(chart: &Arc<Chart>, f: &Expr) -> Self {
        Alt {
            chart: chart.clone(),
            degree: 1,
            coeffs: (0..chart.dim()).map(|i| f.partial(i)).collect(),
            _kind: PhantomData,
        }
    }

    /// `dx^i`.
    pub fn coordinate(chart: &Arc<Chart>, i: usize) -> Self {
        let mut coeffs = vec![Expr::zero(); chart.dim()];
        coeffs[i] = Expr::one();
        Alt { chart: chart.clone(), degree: 1, coeffs, _kind: PhantomData }
    }

    /// `α(X)` for a 1-form.
    pub fn apply(&self, x: &VectorField) -> Expr {
        debug_assert_eq!(self.degree, 1);
        Expr::sum(self.coeffs.iter().zip(x.comps()).map(|(a, b)| a * b))
    }
}

impl KVector {
    pub fn to_vector_field(&self) -> Result<VectorField> {
        if self.degree != 1 {
            return Err(Error::UnsupportedDegree { op: "to_vector_field", degree: self.degree });
        }
        VectorField::new(&self.chart, self.coeffs.clone())
    }

    /// `Λ(α, β) = Σ Λ^ij α_i β_j` for a bivector.
    pub fn apply2(&self, a: &KForm, b: &KForm) -> Expr {
        debug_assert_eq!(self.degree, 2);
        Expr::sum(self.entries().filter(|(_, c)| !c.is_zero()).map(|(idx, c)| {
            let (i, j) = (idx[0], idx[1]);
            c * (a.coeffs()[i].clone() * b.coeffs()[j].clone() - a.coeffs()[j].clone() * b.coeffs()[i].clone())
        }))
    }
}

impl<K: Variance> fmt::Debug for Alt<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}[", K::NAME, self.degree)?;
        let mut first = true;
        for (idx, c) in self.entries() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, ", ")?;
            }
            first = false;
            write!(f, "{idx:?}: {}", c.display_with(&self.chart))?;
        }
        write!(f, "]")
    }
}

pub(crate) fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// All strictly increasing `k`-tuples from `0..n`, lexicographically.
pub fn increasing_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::with_capacity(binomial(n, k));
    rec(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Lexicographic position of an increasing tuple among all increasing `len`-tuples of `0..n`.
pub(crate) fn tuple_rank(n: usize, idx: &[usize]) -> usize {
    let k = idx.len();
    let mut rank = 0;
    let mut prev = 0;
    for (pos, &v) in idx.iter().enumerate() {
        for skipped in prev..v {
            rank += binomial(n - skipped - 1, k - pos - 1);
        }
        prev = v + 1;
    }
    rank
}

/// Sorts indices, returning the permutation sign; `None` on repeats.
pub(crate) fn sort_with_sign(idx: &[usize]) -> Option<(Vec<usize>, i32)> {
    let mut v = idx.to_vec();
    let mut sign = 1;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((v, sign))
}
