//! Fixed-step RK4 integration along anchor images, on `M` and on `M × ℝ`.

use nalgebra::DVector;

use super::induced::induced_from_analysis;
use super::{analyze_point, InducedLeafStructure, LeafType, PointAnalysis};
use crate::error::{Error, Result};
use crate::families::DiracFamily;

/// Which frame combination drives step `k`.
#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorPolicy {
    /// `s_{k mod (n+1)}`.
    Cycle,
    Single(usize),
    /// Fixed coefficients on the frame.
    Combination(Vec<f64>),
}

impl GeneratorPolicy {
    fn coefficients(&self, step: usize, m: usize) -> Result<Vec<f64>> {
        let mut c = vec![0.0; m];
        match self {
            GeneratorPolicy::Cycle => c[step % m] = 1.0,
            GeneratorPolicy::Single(i) if *i < m => c[*i] = 1.0,
            GeneratorPolicy::Combination(w) if w.len() == m => c.copy_from_slice(w),
            _ => return Err(Error::InvalidInput(format!("generator policy {self:?} does not fit a frame of {m}"))),
        }
        Ok(c)
    }

    pub fn describe(&self) -> String {
        match self {
            GeneratorPolicy::Cycle => "cycle".into(),
            GeneratorPolicy::Single(i) => format!("single:{i}"),
            GeneratorPolicy::Combination(w) => {
                format!("combination:{}", w.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","))
            }
        }
    }
}

pub fn rk4_step<F>(f: F, y: &[f64], h: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let shift = |k: &[f64], s: f64| -> Vec<f64> { y.iter().zip(k).map(|(a, b)| a + s * b).collect() };
    let k1 = f(y)?;
    let k2 = f(&shift(&k1, h / 2.0))?;
    let k3 = f(&shift(&k2, h / 2.0))?;
    let k4 = f(&shift(&k3, h))?;
    Ok((0..y.len()).map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceSample {
    pub step: usize,
    pub point: Vec<f64>,
    pub rank: usize,
    pub leaf_type: LeafType,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeafTrace {
    pub samples: Vec<TraceSample>,
    pub h: f64,
    pub policy: GeneratorPolicy,
    /// The trace stopped early because a step would change rank or type.
    pub reached_singular: bool,
}

impl LeafTrace {
    /// Every sample has the rank and leaf type of the first.
    pub fn is_constant(&self) -> bool {
        let first = &self.samples[0];
        self.samples.iter().all(|s| s.rank == first.rank && s.leaf_type == first.leaf_type)
    }
}

fn combination_field(family: &DiracFamily, c: &[f64], x: &[f64]) -> Result<(Vec<f64>, f64)> {
    let n = family.dim();
    let mut v = vec![0.0; n];
    let mut phi = 0.0;
    for (k, s) in family.frame().iter().enumerate() {
        if c[k] == 0.0 {
            continue;
        }
        for (i, comp) in s.x.eval(x)?.into_iter().enumerate() {
            v[i] += c[k] * comp;
        }
        phi += c[k] * family.phi()[k].eval(x)?;
    }
    Ok((v, phi))
}

fn check_finite(values: &[f64], step: usize) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::StepFailure { step })
    }
}

fn sample(step: usize, a: &PointAnalysis) -> TraceSample {
    TraceSample { step, point: a.point.clone(), rank: a.rank, leaf_type: a.leaf_type, gap: a.gap }
}

/// Integrates `ẋ = ρ(s(x))`. A step whose endpoint has a different rank or
/// leaf type, or an ambiguous rank, is rejected and ends the trace.
pub fn trace_leaf(family: &DiracFamily, x0: &[f64], policy: &GeneratorPolicy, steps: usize, h: f64) -> Result<LeafTrace> {
    let start = analyze_point(family, x0)?;
    let m = family.frame().len();
    let mut samples = vec![sample(0, &start)];
    let mut x = x0.to_vec();
    let mut reached_singular = false;
    for step in 1..=steps {
        let c = policy.coefficients(step - 1, m)?;
        let next = rk4_step(|y| combination_field(family, &c, y).map(|v| v.0), &x, h)
            .map_err(|_| Error::StepFailure { step })?;
        check_finite(&next, step)?;
        match analyze_point(family, &next) {
            Ok(a) if a.rank == start.rank && a.leaf_type == start.leaf_type => {
                samples.push(sample(step, &a));
                x = next;
            }
            Ok(_) | Err(Error::IllConditioned { .. }) => {
                reached_singular = true;
                break;
            }
            Err(_) => return Err(Error::StepFailure { step }),
        }
    }
    Ok(LeafTrace { samples, h, policy: policy.clone(), reached_singular })
}

fn omega_on_leaf(family: &DiracFamily, x: &[f64], v: &[f64]) -> Result<f64> {
    let a = analyze_point(family, x)?;
    match induced_from_analysis(family, &a)? {
        InducedLeafStructure::Lcp { omega1, .. } => Ok(omega1.dot(&DVector::from_column_slice(v))),
        InducedLeafStructure::Precontact { .. } => Err(Error::InvalidInput("left the l.c.p. leaf".into())),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BarSample {
    pub step: usize,
    pub point: Vec<f64>,
    pub t: f64,
    /// `σ = ∫ ω_F(ẋ)` from the start.
    pub sigma: f64,
    /// `|σ + t − t₀|`.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BarTrace {
    pub samples: Vec<BarSample>,
    pub max_residual: f64,
    pub reached_singular: bool,
}

/// Integrates `(ẋ, ṫ) = (ρ(s), φ(s))` through an l.c.p. point together with
/// `σ̇ = ω_F(ẋ)`. On the time-extended leaf `dt = −ω_F`, so `σ + t` stays
/// at `t₀`.
pub fn trace_bar_leaf(
    family: &DiracFamily,
    x0: &[f64],
    t0: f64,
    policy: &GeneratorPolicy,
    steps: usize,
    h: f64,
) -> Result<BarTrace> {
    let start = analyze_point(family, x0)?;
    if start.leaf_type != LeafType::Lcp {
        return Err(Error::InvalidInput("time-extended trace needs an l.c.p. leaf".into()));
    }
    let n = family.dim();
    let m = family.frame().len();
    let mut y: Vec<f64> = x0.iter().copied().chain([t0, 0.0]).collect();
    let mut samples = vec![BarSample { step: 0, point: x0.to_vec(), t: t0, sigma: 0.0, residual: 0.0 }];
    let mut reached_singular = false;
    for step in 1..=steps {
        let c = policy.coefficients(step - 1, m)?;
        let rhs = |state: &[f64]| -> Result<Vec<f64>> {
            let x = &state[..n];
            let (mut v, phi) = combination_field(family, &c, x)?;
            let sigma_dot = omega_on_leaf(family, x, &v)?;
            v.extend([phi, sigma_dot]);
            Ok(v)
        };
        let next = match rk4_step(rhs, &y, h) {
            Ok(next) => next,
            Err(Error::IllConditioned { .. }) | Err(Error::SingularSystem { .. }) | Err(Error::InvalidInput(_)) => {
                reached_singular = true;
                break;
            }
            Err(_) => return Err(Error::StepFailure { step }),
        };
        check_finite(&next, step)?;
        match analyze_point(family, &next[..n]) {
            Ok(a) if a.rank == start.rank && a.leaf_type == start.leaf_type => {}
            Ok(_) | Err(Error::IllConditioned { .. }) => {
                reached_singular = true;
                break;
            }
            Err(_) => return Err(Error::StepFailure { step }),
        }
        y = next;
        let (t, sigma) = (y[n], y[n + 1]);
        samples.push(BarSample { step, point: y[..n].to_vec(), t, sigma, residual: (sigma + t - t0).abs() });
    }
    let max_residual = samples.iter().map(|s| s.residual).fold(0.0, f64::max);
    Ok(BarTrace { samples, max_residual, reached_singular })
}

/// `∮ ω_F` around the loop: flow `a` along `s_i`, `b` along `s_j`, `−a`
/// along `s_i`, `−b` along `s_j`, then the straight chord back to `x0`.
pub fn lcp_loop_integral(
    family: &DiracFamily,
    x0: &[f64],
    (i, j): (usize, usize),
    (a, b): (f64, f64),
    substeps: usize,
) -> Result<f64> {
    let n = family.dim();
    let m = family.frame().len();
    if i >= m || j >= m || substeps == 0 {
        return Err(Error::InvalidInput("loop generators out of range".into()));
    }
    let mut y: Vec<f64> = x0.iter().copied().chain([0.0]).collect();
    for (k, len) in [(i, a), (j, b), (i, -a), (j, -b)] {
        let mut c = vec![0.0; m];
        c[k] = 1.0;
        let h = len / substeps as f64;
        for s in 0..substeps {
            y = rk4_step(
                |state| {
                    let x = &state[..n];
                    let (mut v, _) = combination_field(family, &c, x)?;
                    let w = omega_on_leaf(family, x, &v)?;
                    v.push(w);
                    Ok(v)
                },
                &y,
                h,
            )?;
            check_finite(&y, s)?;
        }
    }
    // Simpson on the chord.
    let end = &y[..n];
    let chord: Vec<f64> = x0.iter().zip(end).map(|(p, q)| p - q).collect();
    let at = |s: f64| -> Vec<f64> { end.iter().zip(&chord).map(|(q, d)| q + s * d).collect() };
    let closing = if chord.iter().all(|d| *d == 0.0) {
        0.0
    } else {
        (omega_on_leaf(family, &at(0.0), &chord)?
            + 4.0 * omega_on_leaf(family, &at(0.5), &chord)?
            + omega_on_leaf(family, &at(1.0), &chord)?)
            / 6.0
    };
    Ok(y[n] + closing)
}

#[cfg(test)]
mod tests {
    use super::super::tests::{homogeneous_plane, jacobi};
    use super::*;

    #[test]
    fn rk4_integrates_exponential() {
        let mut y = vec![1.0];
        for _ in 0..10 {
            y = rk4_step(|v| Ok(vec![v[0]]), &y, 0.1).unwrap();
        }
        assert!((y[0] - 1f64.exp()).abs() < 1e-5);
    }

    #[test]
    fn lcp_leaf_trace_stays_on_plane() {
        let fam = jacobi(&[(0, 1, "1")], &["0", "1", "0"]);
        let tr = trace_leaf(&fam, &[0.0, 0.0, 5.0], &GeneratorPolicy::Cycle, 200, 0.05).unwrap();
        assert_eq!(tr.samples.len(), 201);
        assert!(!tr.reached_singular && tr.is_constant());
        assert!(tr.samples.iter().all(|s| (s.point[2] - 5.0).abs() < 1e-9));
        assert!(tr.samples.iter().any(|s| s.point[0].abs() > 0.1));
    }

    #[test]
    fn contact_and_homogeneous_traces_are_constant() {
        let fam = jacobi(&[(0, 1, "1"), (1, 2, "-y")], &["0", "0", "1"]);
        let tr = trace_leaf(&fam, &[0.0; 3], &GeneratorPolicy::Cycle, 200, 0.05).unwrap();
        assert!(!tr.reached_singular && tr.is_constant());
        assert_eq!((tr.samples[0].rank, tr.samples[0].leaf_type), (3, LeafType::Precontact));
        let tr = trace_leaf(&homogeneous_plane(), &[1.0, 0.0], &GeneratorPolicy::Cycle, 200, 0.05).unwrap();
        assert!(!tr.reached_singular && tr.is_constant());
        assert_eq!((tr.samples[0].rank, tr.samples[0].leaf_type), (2, LeafType::Precontact));
    }

    #[test]
    fn trace_stops_before_rank_changes() {
        // E = x ∂z: rank 3 off {x = 0}, rank 2 on it; flowing along −∂x from x = 0.3
        let fam = jacobi(&[(0, 1, "1")], &["0", "0", "x"]);
        let tr = trace_leaf(&fam, &[0.3, 0.0, 0.0], &GeneratorPolicy::Single(1), 100, 0.05).unwrap();
        assert!(tr.reached_singular);
        assert!(tr.is_constant());
        assert!(tr.samples.len() < 100);
    }

    #[test]
    fn time_extended_trace_keeps_t_minus_x() {
        let fam = jacobi(&[(0, 1, "1")], &["0", "1", "0"]);
        let tr = trace_bar_leaf(&fam, &[0.0, 0.0, 5.0], 0.25, &GeneratorPolicy::Cycle, 200, 0.05).unwrap();
        assert!(!tr.reached_singular);
        assert!(tr.max_residual < 1e-9, "{}", tr.max_residual);
        for s in &tr.samples {
            assert!((s.t - s.point[0] - 0.25).abs() < 1e-9);
        }
    }

    #[test]
    fn loop_integral_of_closed_form_vanishes() {
        let fam = jacobi(&[(0, 1, "1")], &["0", "1", "0"]);
        let v = lcp_loop_integral(&fam, &[0.1, 0.2, 5.0], (0, 1), (0.1, 0.1), 8).unwrap();
        assert!(v.abs() < 1e-12, "{v}");
    }
}
