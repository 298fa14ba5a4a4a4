//! Passage to `M × ℝ`: the map `ψ`, the Dirac structure `L̃` it carries the
//! family to, the Poisson bivector of a Jacobi pair, and pointwise checks of
//! the algebroid isomorphism and of the leaf 2-form.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::calculus::{schouten, KForm, KVector, VectorField};
use crate::error::{Error, Result};
use crate::families::{certify, DiracFamily, Verdict};
use crate::foliation::{analyze_point, bar_anchor, bar_bracket, bar_distribution, induced_structure, InducedLeafStructure};
use crate::linalg::{self, max_abs, RANK_TAU};
use crate::sampling::{random_polynomial, SampleConfig};
use crate::sections::{courant_bracket, tm_pairing_plus, E1Section, TMSection};
use crate::symexpr::{Chart, Expr};

fn time_of(chart: &Chart) -> Expr {
    Expr::var(chart.dim())
}

/// `ψ((X, f) + (α, g)) = (X + f ∂_t) + eᵗ(α + g dt)` on `extended`, the
/// chart of `M × ℝ`. Coefficients may depend on `t`.
pub fn psi_apply(e: &E1Section, extended: &Arc<Chart>) -> Result<TMSection> {
    let n = e.chart().dim();
    if extended.dim() != n + 1 || extended.names()[..n] != e.chart().names()[..] {
        return Err(Error::ChartMismatch);
    }
    let et = Expr::var(n).exp();
    let mut x = e.x.comps().to_vec();
    x.push(e.f.clone());
    let mut a: Vec<Expr> = e.alpha.coeffs().iter().map(|c| c * &et).collect();
    a.push(&e.g * &et);
    TMSection::new(VectorField::new(extended, x)?, KForm::from_components(extended, a)?).map(|s| s.simplify())
}

/// Inverse of `ψ`, landing on `timed` (the base chart with `t` as a parameter).
pub fn psi_inverse(s: &TMSection, timed: &Arc<Chart>) -> Result<E1Section> {
    let n = timed.dim();
    if s.chart().dim() != n + 1 || !timed.is_time_extended() {
        return Err(Error::ChartMismatch);
    }
    let emt = (-Expr::var(n)).exp();
    let x = s.x.comps();
    let a = s.alpha.coeffs();
    E1Section::new(
        VectorField::new(timed, x[..n].to_vec())?,
        x[n].clone(),
        KForm::from_components(timed, a[..n].iter().map(|c| c * &emt).collect())?,
        &a[n] * &emt,
    )
    .map(|e| e.simplify())
}

/// `ψ` at time `t` on fiber coordinates `(X, f, α, g) ↦ (X, f, eᵗα, eᵗg)`.
pub fn psi_matrix(n: usize, t: f64) -> DMatrix<f64> {
    let mut m = DMatrix::identity(2 * n + 2, 2 * n + 2);
    for i in n + 1..2 * n + 2 {
        m[(i, i)] = t.exp();
    }
    m
}

#[derive(Debug, Clone)]
pub struct TildeFrame {
    pub chart: Arc<Chart>,
    pub sections: Vec<TMSection>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosureReport {
    pub points: usize,
    pub isotropy_max: f64,
    /// Largest distance of `[s̃_i, s̃_j]` from the span of the frame.
    pub closure_max: f64,
    pub rank_min: usize,
}

impl TildeFrame {
    /// `ψ` applied to the family frame, without any integrability check.
    pub fn new(family: &DiracFamily) -> Result<Self> {
        let chart = Arc::new(family.chart().extended()?);
        let sections = family.frame().iter().map(|s| psi_apply(s, &chart)).collect::<Result<_>>()?;
        Ok(Self { chart, sections })
    }

    /// `2(n+1) × (n+1)` matrix of frame values at `(x, t)`.
    pub fn matrix(&self, point: &[f64]) -> Result<DMatrix<f64>> {
        let cols = self.sections.iter().map(|s| s.eval(point)).collect::<Result<Vec<_>>>()?;
        Ok(linalg::from_columns(&cols))
    }

    /// Isotropy, rank and Courant closure at the sample points of `M × ℝ`.
    pub fn closure(&self, config: &SampleConfig) -> Result<ClosureReport> {
        let points = config.points(self.chart.dim());
        let m = self.sections.len();
        let mut pairings = Vec::new();
        let mut brackets = Vec::new();
        for i in 0..m {
            for j in i..m {
                pairings.push(tm_pairing_plus(&self.sections[i], &self.sections[j])?);
                if j > i {
                    brackets.push(courant_bracket(&self.sections[i], &self.sections[j])?);
                }
            }
        }
        let (mut isotropy_max, mut closure_max, mut rank_min) = (0.0f64, 0.0f64, usize::MAX);
        for p in &points {
            let frame = self.matrix(p)?;
            rank_min = rank_min.min(linalg::rank(&frame).rank);
            for e in &pairings {
                isotropy_max = isotropy_max.max(e.eval(p)?.abs());
            }
            for b in &brackets {
                closure_max = closure_max.max(linalg::membership_residual(&frame, &b.eval(p)?));
            }
        }
        Ok(ClosureReport { points: points.len(), isotropy_max, closure_max, rank_min })
    }
}

fn require_integrable(family: &DiracFamily, config: &SampleConfig, tol: f64) -> Result<()> {
    let report = certify(family, config, tol)?;
    if report.verdict == Verdict::Integrable {
        Ok(())
    } else {
        let worst = report.worst();
        Err(Error::NotIntegrable { residual: worst.name, value: worst.max_abs })
    }
}

/// The frame of `L̃` for a certified family.
pub fn tilde_frame(family: &DiracFamily, config: &SampleConfig, tol: f64) -> Result<TildeFrame> {
    require_integrable(family, config, tol)?;
    TildeFrame::new(family)
}

/// `e^{−t}(Λ + ∂_t ∧ E)` on the chart of `M × ℝ`.
pub fn jacobi_poissonization(lambda: &KVector, e: &VectorField) -> Result<KVector> {
    let base = lambda.chart();
    let n = base.dim();
    let ext = Arc::new(base.extended()?);
    let emt = (-time_of(base)).exp();
    let mut entries: Vec<(Vec<usize>, Expr)> = lambda.entries().map(|(idx, c)| (idx, c * &emt)).collect();
    for j in 0..n {
        entries.push((vec![j, n], -(e.component(j) * &emt)));
    }
    Ok(KVector::from_entries(&ext, 2, entries)?.simplify())
}

/// `max |[P, P]|` over samples.
pub fn schouten_residual(p: &KVector, points: &[Vec<f64>]) -> Result<f64> {
    let s = schouten(p, p)?;
    let mut m = 0.0f64;
    for x in points {
        m = m.max(s.max_abs_at(x)?);
    }
    Ok(m)
}

/// Graph `{X + i_X Ω}` at a point, as columns.
pub fn graph_of_form(omega: &KForm, point: &[f64]) -> Result<DMatrix<f64>> {
    let n = omega.chart().dim();
    let o = omega.matrix_at(point)?;
    Ok(DMatrix::from_fn(2 * n, n, |r, k| if r < n { f64::from(u8::from(r == k)) } else { o[k][r - n] }))
}

/// Graph `{#_Λ α + α}` at a point, as columns.
pub fn graph_of_bivector(lambda: &KVector, point: &[f64]) -> Result<DMatrix<f64>> {
    let n = lambda.chart().dim();
    let l = lambda.matrix_at(point)?;
    Ok(DMatrix::from_fn(2 * n, n, |r, k| if r < n { l[k][r] } else { f64::from(u8::from(r - n == k)) }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsomorphismReport {
    pub pairs: usize,
    pub points: usize,
    pub anchor_max: f64,
    pub bracket_max: f64,
}

/// Random `t`-dependent combination `Σ c_i(x, t) s_i` on `timed`.
fn random_timed_section(frame: &[E1Section], timed: &Arc<Chart>, rng: &mut ChaCha8Rng) -> Result<E1Section> {
    let nvars = timed.num_vars();
    let mut acc = E1Section::zero(timed);
    for s in frame {
        acc = acc.add(&s.scale(&random_polynomial(rng, nvars, 2, 2)))?;
    }
    Ok(acc.simplify())
}

/// Compares `ψ` against the anchors and brackets of `A × ℝ` on the frame
/// sections themselves, on `t`- and `t²`-scaled frame sections, and on
/// `pairs` random `t`-dependent combinations.
pub fn check_isomorphism(family: &DiracFamily, config: &SampleConfig, pairs: usize, tol: f64) -> Result<IsomorphismReport> {
    require_integrable(family, config, tol)?;
    let timed = Arc::new(family.chart().with_time()?);
    let ext = Arc::new(family.chart().extended()?);
    let frame: Vec<E1Section> = family.frame().iter().map(|s| s.rehome(&timed)).collect::<Result<_>>()?;
    let phi: Vec<Expr> = family.phi().to_vec();
    let t = time_of(&timed);

    let mut sections: Vec<(E1Section, Expr)> = Vec::new();
    for (k, s) in frame.iter().enumerate() {
        sections.push((s.clone(), phi[k].clone()));
    }
    let m = frame.len();
    for k in 0..m {
        let h = if k % 2 == 0 { t.clone() } else { t.powi(2) };
        sections.push((frame[k].scale(&h).simplify(), (&phi[k] * &h).simplify()));
    }
    let mut pair_list: Vec<(usize, usize)> = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect();
    pair_list.extend((0..m).flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (m + i, m + j))));
    pair_list.extend((0..m).map(|i| (i, m + (i + 1) % m)));
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x0070_7369);
    for _ in 0..pairs {
        let a = random_timed_section(&frame, &timed, &mut rng)?;
        let b = random_timed_section(&frame, &timed, &mut rng)?;
        let (pa, pb) = (a.f.clone(), b.f.clone());
        let base = sections.len();
        sections.push((a, pa));
        sections.push((b, pb));
        pair_list.push((base, base + 1));
    }

    let points = config.points(ext.dim());
    let (mut anchor_max, mut bracket_max) = (0.0f64, 0.0f64);
    // anchor: classical anchor of ψ(ē) against ρ(ē) + φ(ē) ∂_t
    for (s, phi_s) in &sections {
        let classical = psi_apply(s, &ext)?.x;
        let mut want = s.x.comps().to_vec();
        want.push(phi_s.clone());
        let diff = classical.sub(&VectorField::new(&ext, want)?)?;
        let bar = classical.sub(&bar_anchor(s, &ext)?)?;
        for p in &points {
            for v in diff.eval(p)?.into_iter().chain(bar.eval(p)?) {
                anchor_max = anchor_max.max(v.abs());
            }
        }
    }
    for &(i, j) in &pair_list {
        let (a, b) = (&sections[i].0, &sections[j].0);
        let lhs = psi_apply(&bar_bracket(a, b)?, &ext)?;
        let rhs = courant_bracket(&psi_apply(a, &ext)?, &psi_apply(b, &ext)?)?;
        let diff = lhs.sub(&rhs)?;
        for p in &points {
            bracket_max = bracket_max.max(diff.max_abs_at(p)?);
        }
    }
    Ok(IsomorphismReport { pairs: pair_list.len(), points: points.len(), anchor_max, bracket_max })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OmegaTildeReport {
    pub point: Vec<f64>,
    /// `dim F̃`.
    pub leaf_dim: usize,
    /// `Ω_F̃` from the pairings of `L̃` against the closed form built from the
    /// induced leaf structure.
    pub max_residual: f64,
    /// l.c.p. leaves: `max |λ + ω_F(u)|` over tangent vectors `(u, λ)` of `F̃`,
    /// i.e. `dt = −ω_F` on `F̃`. Zero for precontact leaves.
    pub relation_residual: f64,
    /// Rank of the anchors of `L̃` minus the rank of the time-extended
    /// distribution (should vanish).
    pub rank_difference: i64,
}

/// Leaf 2-form of `L̃` at `(x, t)`: `Ω_F̃(X̃_i, X̃_j) = α̃_i(X̃_j)`, against
/// `eᵗ(dη_F + dt ∧ η_F)` on precontact leaves and `eᵗ Ω_F` on l.c.p. leaves.
pub fn omega_tilde_check(family: &DiracFamily, x: &[f64], t: f64) -> Result<OmegaTildeReport> {
    let n = family.dim();
    let tilde = TildeFrame::new(family)?;
    let mut point = x[..n].to_vec();
    point.push(t);
    let vals = tilde.matrix(&point)?;
    let anchors = vals.rows(0, n + 1).into_owned();
    let forms = vals.rows(n + 1, n + 1).into_owned();
    let psi = forms.transpose() * &anchors;

    let (info, q, _) = linalg::image_and_kernel(&anchors, RANK_TAU);
    let coords = q.transpose() * &anchors;
    let cp = linalg::pinv(&coords, RANK_TAU);
    let solved = cp.transpose() * &psi * &cp;
    let consistency = max_abs(&(coords.transpose() * &solved * &coords - &psi));
    if consistency > 1e-8 * max_abs(&psi).max(1.0) {
        return Err(Error::SingularSystem { context: "Ω_F̃ does not factor through the anchor of L̃".into(), residual: consistency });
    }

    analyze_point(family, &point[..n])?;
    let et = t.exp();
    let mut closed = DMatrix::zeros(n + 1, n + 1);
    let mut relation_residual = 0.0f64;
    match induced_structure(family, &point[..n])? {
        InducedLeafStructure::Precontact { eta, phi_form, .. } => {
            closed.view_mut((0, 0), (n, n)).copy_from(&(&phi_form * et));
            for i in 0..n {
                closed[(n, i)] = et * eta[i];
                closed[(i, n)] = -et * eta[i];
            }
        }
        InducedLeafStructure::Lcp { omega2, omega1, .. } => {
            closed.view_mut((0, 0), (n, n)).copy_from(&(&omega2 * et));
            for k in 0..q.ncols() {
                let v = q.column(k);
                let w: f64 = (0..n).map(|i| omega1[i] * v[i]).sum();
                relation_residual = relation_residual.max((v[n] + w).abs());
            }
        }
    }
    let max_residual = max_abs(&(q.transpose() * closed * &q - solved));
    let rank_bar = bar_distribution(family, &point[..n], t)?.rank_bar;
    Ok(OmegaTildeReport {
        point,
        leaf_dim: info.rank,
        max_residual,
        relation_residual,
        rank_difference: info.rank as i64 - rank_bar as i64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::parse_expr;

    fn chart(n: usize) -> Arc<Chart> {
        Arc::new(Chart::standard(n))
    }

    fn jacobi(lam: &[(usize, usize, &str)], e: &[&str]) -> (KVector, VectorField) {
        let c = chart(3);
        let lam = KVector::from_entries(&c, 2, lam.iter().map(|(i, j, t)| (vec![*i, *j], parse_expr(t, &c).unwrap())))
            .unwrap();
        let e = VectorField::new(&c, e.iter().map(|t| parse_expr(t, &c).unwrap()).collect()).unwrap();
        (lam, e)
    }

    fn precontact() -> DiracFamily {
        let c = chart(3);
        let eta = KForm::from_components(&c, vec![parse_expr("-y", &c).unwrap(), Expr::zero(), Expr::one()]).unwrap();
        DiracFamily::from_precontact(eta).unwrap()
    }

    #[test]
    fn psi_on_simple_sections() {
        let c = Arc::new(chart(1).with_time().unwrap());
        let ext = Arc::new(chart(1).extended().unwrap());
        let p = [0.3, 0.7];
        let s = E1Section::new(VectorField::coordinate(&c, 0), Expr::zero(), KForm::zero(&c, 1).unwrap(), Expr::zero()).unwrap();
        assert_eq!(psi_apply(&s, &ext).unwrap().eval(&p).unwrap(), vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(psi_apply(&E1Section::unit_f(&c), &ext).unwrap().eval(&p).unwrap(), vec![0.0, 1.0, 0.0, 0.0]);
        let s = E1Section::new(VectorField::zero(&c), Expr::zero(), KForm::coordinate(&c, 0), Expr::one()).unwrap();
        let got = psi_apply(&s, &ext).unwrap();
        let e = 0.7f64.exp();
        assert_eq!(got.eval(&p).unwrap(), vec![0.0, 0.0, e, e]);
        let back = psi_inverse(&got, &c).unwrap();
        assert!(back.sub(&s).unwrap().max_abs_at(&p).unwrap() < 1e-15);
    }

    #[test]
    fn psi_matrix_is_invertible_on_frames() {
        let fam = precontact();
        let m = psi_matrix(3, 0.4);
        let f = fam.frame_matrix(&[0.1, 0.2, 0.3]).unwrap();
        let back = m.clone().try_inverse().unwrap() * (&m * &f);
        assert!(max_abs(&(back - f)) < 1e-12);
    }

    #[test]
    fn precontact_tilde_is_a_graph() {
        let fam = precontact();
        let tilde = tilde_frame(&fam, &SampleConfig::default(), 1e-9).unwrap();
        let ext = tilde.chart.clone();
        // eᵗ(dη + dt∧η) with η = dz − y dx, dη = dx∧dy
        let et = parse_expr("exp(t)", &ext).unwrap();
        let y = parse_expr("y", &ext).unwrap();
        let omega = KForm::from_entries(
            &ext,
            2,
            [(vec![0, 1], et.clone()), (vec![0, 3], &y * &et), (vec![2, 3], -et.clone())],
        )
        .unwrap();
        for p in SampleConfig::default().points(4).iter().take(20) {
            let d = linalg::subspace_distance(&tilde.matrix(p).unwrap(), &graph_of_form(&omega, p).unwrap());
            assert!(d < 1e-10, "{d}");
        }
        let r = tilde.closure(&SampleConfig { grid: 2, extra: 10, ..Default::default() }).unwrap();
        assert!(r.isotropy_max < 1e-12 && r.closure_max < 1e-9 && r.rank_min == 4, "{r:?}");
    }

    #[test]
    fn contact_pair_tilde_is_graph_of_poisson_bivector() {
        let (lam, e) = jacobi(&[(0, 1, "1"), (1, 2, "-y")], &["0", "0", "1"]);
        let fam = DiracFamily::from_jacobi(lam.clone(), e.clone()).unwrap();
        let pt = jacobi_poissonization(&lam, &e).unwrap();
        let tilde = TildeFrame::new(&fam).unwrap();
        let pts = SampleConfig::default().points(4);
        for p in pts.iter().take(20) {
            let d = linalg::subspace_distance(&tilde.matrix(p).unwrap(), &graph_of_bivector(&pt, p).unwrap());
            assert!(d < 1e-10, "{d}");
        }
        assert!(schouten_residual(&pt, &pts).unwrap() < 1e-9);
    }

    #[test]
    fn small_poissonizations() {
        let c = chart(1);
        let lam = KVector::zero(&c, 2).unwrap();
        let pt = jacobi_poissonization(&lam, &VectorField::coordinate(&c, 0)).unwrap();
        // e^{−t} ∂t∧∂x = −e^{−t} ∂x∧∂t
        let want = -(0.3f64).exp().recip();
        assert!((pt.coeff(&[0, 1]).eval(&[0.5, 0.3]).unwrap() - want).abs() < 1e-15);
        let (lam, e) = jacobi(&[(0, 1, "1")], &["0", "0", "0"]);
        let pt = jacobi_poissonization(&lam, &e).unwrap();
        assert_eq!(pt.entries().filter(|(_, c)| !c.is_zero()).count(), 1);
        assert_eq!(schouten_residual(&pt, &SampleConfig::default().points(4)).unwrap(), 0.0);
    }

    #[test]
    fn non_integrable_input_fails_closure() {
        let (lam, e) = jacobi(&[(0, 1, "1")], &["0", "0", "1"]);
        let fam = DiracFamily::from_jacobi(lam, e).unwrap();
        assert!(matches!(tilde_frame(&fam, &SampleConfig::default(), 1e-9), Err(Error::NotIntegrable { .. })));
        let r = TildeFrame::new(&fam).unwrap().closure(&SampleConfig { grid: 2, extra: 10, ..Default::default() }).unwrap();
        assert!(r.closure_max > 1e-3, "{r:?}");
    }

    #[test]
    fn isomorphism_on_precontact_family() {
        let r = check_isomorphism(&precontact(), &SampleConfig { grid: 2, extra: 8, ..Default::default() }, 3, 1e-9).unwrap();
        assert!(r.anchor_max < 1e-12 && r.bracket_max < 1e-8, "{r:?}");
    }

    #[test]
    fn omega_tilde_on_precontact_origin() {
        let r = omega_tilde_check(&precontact(), &[0.0; 3], 0.0).unwrap();
        assert_eq!((r.leaf_dim, r.rank_difference), (4, 0));
        assert!(r.max_residual < 1e-10, "{r:?}");
        let tilde = TildeFrame::new(&precontact()).unwrap();
        let v = tilde.matrix(&[0.0; 4]).unwrap();
        // s̃ for ∂x: α̃ = i_{∂x}dη + …; Ω_F̃(∂x, ∂y) = α̃_x(∂y)
        assert!((v[(4 + 1, 0)] - 1.0).abs() < 1e-15);
        // s̃ for (0, 1): X̃ = ∂t, α̃ = η; Ω_F̃(∂t, ∂z) = 1
        assert!((v[(4 + 2, 3)] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn omega_tilde_on_lcp_leaf_and_graph() {
        let (lam, e) = jacobi(&[(0, 1, "1")], &["0", "1", "0"]);
        let fam = DiracFamily::from_jacobi(lam, e).unwrap();
        let r = omega_tilde_check(&fam, &[0.2, -0.3, 5.0], 0.8).unwrap();
        assert_eq!((r.leaf_dim, r.rank_difference), (2, 0));
        assert!(r.max_residual < 1e-10 && r.relation_residual < 1e-12, "{r:?}");
        let c = chart(2);
        let omega = KForm::from_entries(&c, 2, [(vec![0, 1], Expr::one())]).unwrap();
        let r = omega_tilde_check(&DiracFamily::from_dirac_graph_form(omega).unwrap(), &[0.5, 0.5], 1.5).unwrap();
        assert!(r.max_residual < 1e-10 && r.relation_residual == 0.0);
    }
}
