use super::{DiracFamily, FamilyKind};
use crate::calculus::{exterior_d, schouten, wedge, Alt, Variance};
use crate::error::Result;
use crate::linalg;
use crate::sampling::SampleConfig;
use crate::sections::{pairing_plus, t_tensor, t_tensor_closed};
use crate::symexpr::Expr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Integrable,
    NotIntegrable,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Integrable => "INTEGRABLE",
            Verdict::NotIntegrable => "NOT_INTEGRABLE",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedResidual {
    pub name: String,
    pub max_abs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificationReport {
    pub kind: &'static str,
    pub points: usize,
    pub tol: f64,
    /// Smallest numerical rank of the frame over the samples.
    pub frame_rank_min: usize,
    pub isotropy_max: f64,
    /// `max |T_L|` over frame triples and samples.
    pub t_max: f64,
    /// Largest disagreement between the two evaluations of `T_L`.
    pub t_path_gap: f64,
    /// `max |φ([s_i, s_j]) − ρ(s_i)φ(s_j) + ρ(s_j)φ(s_i)|`.
    pub cocycle_max: f64,
    /// Family structure equations, symbolic and then sampled.
    pub structure: Vec<NamedResidual>,
    pub verdict: Verdict,
}

impl CertificationReport {
    /// All residuals in a fixed order; `T_L` and isotropy first.
    pub fn residuals(&self) -> Vec<NamedResidual> {
        let mut out = vec![
            NamedResidual { name: "isotropy".into(), max_abs: self.isotropy_max },
            NamedResidual { name: "T_L".into(), max_abs: self.t_max },
        ];
        out.extend(self.structure.iter().cloned());
        out
    }

    /// The largest structure residual, falling back to `T_L`.
    pub fn worst(&self) -> NamedResidual {
        self.structure
            .iter()
            .chain(std::iter::once(&NamedResidual { name: "T_L".into(), max_abs: self.t_max }))
            .fold(None::<&NamedResidual>, |acc, r| match acc {
                Some(a) if a.max_abs >= r.max_abs => Some(a),
                _ => Some(r),
            })
            .cloned()
            .expect("nonempty")
    }
}

fn sample_max<K: Variance>(t: &Alt<K>, points: &[Vec<f64>]) -> Result<f64> {
    let t = t.simplify();
    let mut m = 0.0f64;
    for p in points {
        m = m.max(t.max_abs_at(p)?);
    }
    Ok(m)
}

fn structure_residuals(family: &DiracFamily, points: &[Vec<f64>]) -> Result<Vec<NamedResidual>> {
    let named = |name: &str, max_abs: f64| NamedResidual { name: name.into(), max_abs };
    let two = Expr::int(2);
    Ok(match family.kind() {
        FamilyKind::DiracGraph2Form { omega } => vec![named("dΩ", sample_max(&exterior_d(omega)?, points)?)],
        FamilyKind::DiracGraphBivector { lambda } => {
            vec![named("[Λ,Λ]", sample_max(&schouten(lambda, lambda)?, points)?)]
        }
        FamilyKind::Lcp { omega2, omega1 } => vec![
            named("dω", sample_max(&exterior_d(omega1)?, points)?),
            named("dΩ − ω∧Ω", sample_max(&exterior_d(omega2)?.sub(&wedge(omega1, omega2)?)?, points)?),
        ],
        FamilyKind::Precontact { .. } => Vec::new(),
        FamilyKind::Jacobi { lambda, e } => {
            let ev = e.to_kvector();
            vec![
                named(
                    "[Λ,Λ] − 2E∧Λ",
                    sample_max(&schouten(lambda, lambda)?.sub(&wedge(&ev, lambda)?.scale(&two))?, points)?,
                ),
                named("[E,Λ]", sample_max(&schouten(&ev, lambda)?, points)?),
            ]
        }
        FamilyKind::HomogeneousPoisson { pi, z } => vec![
            named("[Π,Π]", sample_max(&schouten(pi, pi)?, points)?),
            named("[Z,Π] + Π", sample_max(&schouten(&z.to_kvector(), pi)?.add(pi)?, points)?),
        ],
    })
}

/// Sampling certificate of integrability: isotropy, `T_L` on every frame
/// triple (both evaluation paths), the cocycle identity, and the family's
/// structure equations.
pub fn certify(family: &DiracFamily, config: &SampleConfig, tol: f64) -> Result<CertificationReport> {
    let points = config.points(family.dim());
    let frame = family.frame();
    let m = frame.len();

    let mut pairings = Vec::new();
    let mut cocycles = Vec::new();
    for i in 0..m {
        for j in i..m {
            pairings.push(pairing_plus(&frame[i], &frame[j])?);
            if j > i {
                let br = crate::sections::extended_bracket(&frame[i], &frame[j])?;
                let phi = family.phi();
                cocycles.push((br.f - frame[i].x.apply(&phi[j]) + frame[j].x.apply(&phi[i])).simplify());
            }
        }
    }
    let mut triples = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            for k in j + 1..m {
                let def = t_tensor(&frame[i], &frame[j], &frame[k])?;
                let closed = t_tensor_closed(&frame[i], &frame[j], &frame[k])?;
                triples.push((def, closed));
            }
        }
    }

    let (mut isotropy_max, mut t_max, mut t_path_gap, mut cocycle_max) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut frame_rank_min = usize::MAX;
    for p in &points {
        for e in &pairings {
            isotropy_max = isotropy_max.max(e.eval(p)?.abs());
        }
        for e in &cocycles {
            cocycle_max = cocycle_max.max(e.eval(p)?.abs());
        }
        for (def, closed) in &triples {
            let (a, b) = (def.eval(p)?, closed.eval(p)?);
            t_max = t_max.max(a.abs());
            t_path_gap = t_path_gap.max((a - b).abs());
        }
        frame_rank_min = frame_rank_min.min(linalg::rank(&family.frame_matrix(p)?).rank);
    }
    let structure = structure_residuals(family, &points)?;
    let ok = isotropy_max <= tol && t_max <= tol && structure.iter().all(|r| r.max_abs <= tol);
    Ok(CertificationReport {
        kind: family.kind().tag(),
        points: points.len(),
        tol,
        frame_rank_min,
        isotropy_max,
        t_max,
        t_path_gap,
        cocycle_max,
        structure,
        verdict: if ok { Verdict::Integrable } else { Verdict::NotIntegrable },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{KVector, VectorField};
    use crate::symexpr::{parse_expr, Chart};
    use std::sync::Arc;

    fn jacobi(lam: &[(usize, usize, &str)], e: &[&str]) -> DiracFamily {
        let c = Arc::new(Chart::standard(3));
        let lam = KVector::from_entries(&c, 2, lam.iter().map(|(i, j, t)| (vec![*i, *j], parse_expr(t, &c).unwrap())))
            .unwrap();
        let e = VectorField::new(&c, e.iter().map(|t| parse_expr(t, &c).unwrap()).collect()).unwrap();
        DiracFamily::from_jacobi(lam, e).unwrap()
    }

    #[test]
    fn contact_pair_is_integrable() {
        let fam = jacobi(&[(0, 1, "1"), (1, 2, "-y")], &["0", "0", "1"]);
        let r = certify(&fam, &SampleConfig::default(), 1e-9).unwrap();
        assert_eq!(r.verdict, Verdict::Integrable, "{r:?}");
        assert_eq!(r.frame_rank_min, 4);
        assert!(r.t_path_gap < 1e-12);
    }

    #[test]
    fn transverse_reeb_field_is_not_integrable() {
        let fam = jacobi(&[(0, 1, "1")], &["0", "0", "1"]);
        let r = certify(&fam, &SampleConfig::default(), 1e-9).unwrap();
        assert_eq!(r.verdict, Verdict::NotIntegrable);
        assert!((r.t_max - 0.5).abs() < 1e-12);
        let w = r.worst();
        assert_eq!(w.name, "[Λ,Λ] − 2E∧Λ");
        assert!((w.max_abs - 2.0).abs() < 1e-12);
        assert!(r.t_path_gap < 1e-12);
    }
}
