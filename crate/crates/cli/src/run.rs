//! Dispatch of scenario actions and the report they produce.

use std::fmt::Write as _;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use e1dirac::families::{certify, model_bracket_check, FamilyKind, Verdict};
use e1dirac::foliation::{
    analyze_point, bar_distribution, induced_structure, lcp_loop_integral, lcp_volume, precontact_consistency,
    trace_bar_leaf, trace_leaf, GeneratorPolicy, InducedLeafStructure, LeafType,
};
use e1dirac::linalg;
use e1dirac::poissonization::{check_isomorphism, jacobi_poissonization, omega_tilde_check, schouten_residual, TildeFrame};
use e1dirac::Error;
use nalgebra::{DMatrix, DVector};

use crate::scenario::{Action, Expectation, Scenario};

/// Model bracket against the extended bracket.
pub const MODEL_TOL: f64 = 1e-8;
/// Courant closure, isotropy and bracket intertwining on `M × ℝ`.
pub const TILDE_TOL: f64 = 1e-8;
/// Leaf 2-form of the Poissonization against its closed form.
pub const OMEGA_TOL: f64 = 1e-7;
/// `Φ_F = dη_F` by finite differences.
pub const PRECONTACT_TOL: f64 = 1e-8;
/// Time-extended trace relation and loop integrals of `ω_F`.
pub const TRACE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Error => "ERROR",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorInfo {
    pub code: &'static str,
    pub message: String,
    pub exit: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActionReport {
    pub action: &'static str,
    pub status: Status,
    pub summary: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorInfo>,
    pub details: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub scenario: String,
    pub kind: &'static str,
    pub coordinates: Vec<String>,
    pub digest: String,
    pub seed: u64,
    pub actions: Vec<ActionReport>,
    pub status: Status,
    pub exit_code: i32,
}

impl Report {
    /// The canonical machine-readable form.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} {}  scenario {}  kind {}  coordinates ({})  seed {}",
            self.tool,
            self.version,
            self.scenario,
            self.kind,
            self.coordinates.join(", "),
            self.seed
        );
        let _ = writeln!(out, "digest {}", self.digest);
        let _ = writeln!(out, "{:<11} {:<6} summary", "action", "status");
        for a in &self.actions {
            let _ = writeln!(out, "{:<11} {:<6} {}", a.action, a.status.as_str(), a.summary);
            if let Some(e) = &a.error {
                let _ = writeln!(out, "{:<11} {:<6} {}: {}", "", "", e.code, e.message);
            }
        }
        let _ = writeln!(out, "overall {} (exit {})", self.status.as_str(), self.exit_code);
        out
    }
}

/// Machine-readable code and process exit class of a library error.
pub fn error_code(e: &Error) -> (&'static str, i32) {
    match e {
        Error::Domain { .. } => ("domain_error", 3),
        Error::UnboundVariable(_) => ("unbound_variable", 2),
        Error::ChartMismatch => ("chart_mismatch", 2),
        Error::UnsupportedDegree { .. } => ("unsupported_degree", 2),
        Error::InvalidChart(_) => ("invalid_chart", 2),
        Error::Parse { .. } => ("parse_error", 2),
        Error::UnknownIdentifier { .. } => ("unknown_coordinate", 2),
        Error::NotIntegrable { .. } => ("not_integrable", 1),
        Error::IllConditioned { .. } => ("ill_conditioned", 3),
        Error::SingularSystem { .. } => ("singular_system", 3),
        Error::RankDrop { .. } => ("rank_drop", 3),
        Error::StepFailure { .. } => ("step_failure", 3),
        Error::InvalidInput(_) => ("invalid_input", 2),
    }
}

fn info(e: &Error) -> ErrorInfo {
    let (code, exit) = error_code(e);
    ErrorInfo { code, message: e.to_string(), exit }
}

fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn vector(v: &DVector<f64>) -> Vec<f64> {
    v.iter().copied().collect()
}

fn sci(v: f64) -> String {
    format!("{v:.3e}")
}

type Outcome = (Status, String, Value);

fn check(s: &Scenario) -> Result<Outcome, Error> {
    let r = certify(&s.family, &s.sampling, s.tol)?;
    let worst = r.worst();
    let structure: Vec<Value> = r.structure.iter().map(|n| json!({"name": n.name, "max_abs": n.max_abs})).collect();
    let mut details = json!({
        "verdict": r.verdict.as_str(),
        "points": r.points,
        "tol": r.tol,
        "frame_rank_min": r.frame_rank_min,
        "isotropy_max": r.isotropy_max,
        "t_max": r.t_max,
        "t_path_gap": r.t_path_gap,
        "cocycle_max": r.cocycle_max,
        "structure": structure,
        "worst": {"name": worst.name, "max_abs": worst.max_abs},
    });
    let mut pass = r.verdict == Verdict::Integrable;
    let mut summary = format!("{}  T_L {}  worst {} {}", r.verdict.as_str(), sci(r.t_max), worst.name, sci(worst.max_abs));
    if pass {
        let m = model_bracket_check(&s.family, &s.sampling, s.pairs, s.tol)?;
        pass = m.max_residual <= MODEL_TOL;
        details["model_bracket"] = json!({"pairs": m.pairs, "points": m.points, "max_residual": m.max_residual, "tol": MODEL_TOL});
        let _ = write!(summary, "  model {}", sci(m.max_residual));
    }
    if let Some(expect) = &s.expect {
        let (expected, residual, met) = match expect {
            Expectation::Integrable => ("INTEGRABLE", None, r.verdict == Verdict::Integrable),
            Expectation::NotIntegrable { residual } => (
                "NOT_INTEGRABLE",
                residual.clone(),
                r.verdict == Verdict::NotIntegrable && residual.as_ref().is_none_or(|n| *n == worst.name),
            ),
        };
        details["expectation"] = json!({"verdict": expected, "residual": residual, "met": met});
    }
    Ok((if pass { Status::Pass } else { Status::Fail }, summary, details))
}

fn require_at(s: &Scenario) -> Result<Vec<f64>, Error> {
    s.at.clone().ok_or_else(|| Error::InvalidInput("this action needs a point (`at = [...]` or --at)".into()))
}

fn induced_json(s: &Scenario, x: &[f64]) -> Result<(Value, bool), Error> {
    Ok(match induced_structure(&s.family, x)? {
        InducedLeafStructure::Precontact { eta, phi_form, residual, basis } => {
            let consistency = precontact_consistency(&s.family, x, 1e-3)?;
            (
                json!({
                    "type": LeafType::Precontact.as_str(),
                    "leaf_dim": basis.ncols(),
                    "eta": vector(&eta),
                    "phi_form": matrix_rows(&phi_form),
                    "solve_residual": residual,
                    "d_eta_consistency": consistency,
                }),
                consistency <= PRECONTACT_TOL,
            )
        }
        structure @ InducedLeafStructure::Lcp { .. } => {
            let volume = lcp_volume(&structure).ok();
            let InducedLeafStructure::Lcp { omega2, omega1, residual, basis } = structure else { unreachable!() };
            (
                json!({
                    "type": LeafType::Lcp.as_str(),
                    "leaf_dim": basis.ncols(),
                    "omega2": matrix_rows(&omega2),
                    "omega1": vector(&omega1),
                    "solve_residual": residual,
                    "volume": volume,
                }),
                true,
            )
        }
    })
}

fn classify(s: &Scenario) -> Result<Outcome, Error> {
    let x = require_at(s)?;
    let a = analyze_point(&s.family, &x)?;
    let b = bar_distribution(&s.family, &x, s.t0)?;
    let sandwich = a.rank <= b.rank_bar && b.rank_bar <= a.rank + 1 && (b.rank_bar == a.rank) == (a.leaf_type == LeafType::Lcp);
    let (induced, consistent) = induced_json(s, &x)?;
    let details = json!({
        "point": x,
        "rank": a.rank,
        "rank_bar": b.rank_bar,
        "kernel_dim": a.kernel.ncols(),
        "leaf_type": a.leaf_type.as_str(),
        "sigma_max": a.sigma_max,
        "gap": a.gap,
        "phi_on_kernel": a.phi_on_kernel,
        "dimension_relations": sandwich,
        "induced": induced,
    });
    let summary = format!("{}  rank {}  rank_bar {}", a.leaf_type.as_str(), a.rank, b.rank_bar);
    Ok((if sandwich && consistent { Status::Pass } else { Status::Fail }, summary, details))
}

/// First two frame elements with independent anchors at `x`.
fn loop_generators(s: &Scenario, x: &[f64]) -> Result<Option<(usize, usize)>, Error> {
    let cols = s.family.frame().iter().map(|f| f.x.eval(x)).collect::<Result<Vec<_>, _>>()?;
    for i in 0..cols.len() {
        for j in i + 1..cols.len() {
            let m = linalg::from_columns(&[cols[i].clone(), cols[j].clone()]);
            if linalg::rank(&m).rank == 2 {
                return Ok(Some((i, j)));
            }
        }
    }
    Ok(None)
}

fn trace(s: &Scenario) -> Result<Outcome, Error> {
    let x = require_at(s)?;
    let policy = GeneratorPolicy::Cycle;
    let tr = trace_leaf(&s.family, &x, &policy, s.steps, s.dt)?;
    let first = &tr.samples[0];
    let constant = tr.is_constant();
    let samples: Vec<Value> = tr
        .samples
        .iter()
        .map(|p| json!({"step": p.step, "point": p.point, "rank": p.rank, "leaf_type": p.leaf_type.as_str(), "gap": p.gap}))
        .collect();
    let mut details = json!({
        "start": x,
        "h": tr.h,
        "policy": policy.describe(),
        "steps_requested": s.steps,
        "steps_accepted": tr.samples.len() - 1,
        "reached_singular": tr.reached_singular,
        "constant": constant,
        "rank": first.rank,
        "leaf_type": first.leaf_type.as_str(),
        "samples": samples,
    });
    let mut pass = constant;
    let mut summary = format!(
        "{} steps  rank {}  {}{}",
        tr.samples.len() - 1,
        first.rank,
        first.leaf_type.as_str(),
        if tr.reached_singular { "  REACHED_SINGULAR" } else { "" }
    );
    if first.leaf_type == LeafType::Lcp {
        let bar = trace_bar_leaf(&s.family, &x, s.t0, &policy, s.steps, s.dt)?;
        let last = bar.samples.last().expect("start sample");
        details["time_extended"] = json!({
            "t0": s.t0,
            "steps_accepted": bar.samples.len() - 1,
            "reached_singular": bar.reached_singular,
            "final_t": last.t,
            "final_sigma": last.sigma,
            "max_residual": bar.max_residual,
        });
        pass &= bar.max_residual <= TRACE_TOL;
        let _ = write!(summary, "  σ+t−t0 {}", sci(bar.max_residual));
        if let Some(gens) = loop_generators(s, &x)? {
            let v = lcp_loop_integral(&s.family, &x, gens, (0.1, 0.1), 8)?;
            details["loop_integral"] = json!({"generators": [gens.0, gens.1], "value": v});
            pass &= v.abs() <= TRACE_TOL;
            let _ = write!(summary, "  ∮ω {}", sci(v));
        }
    }
    Ok((if pass { Status::Pass } else { Status::Fail }, summary, details))
}

fn poissonize(s: &Scenario) -> Result<Outcome, Error> {
    let n = s.family.dim();
    let tilde = TildeFrame::new(&s.family)?;
    let closure = tilde.closure(&s.sampling)?;
    let cert = certify(&s.family, &s.sampling, s.tol)?;
    let integrable = cert.verdict == Verdict::Integrable;
    let mut details = json!({
        "closure": {
            "points": closure.points,
            "isotropy_max": closure.isotropy_max,
            "closure_max": closure.closure_max,
            "rank_min": closure.rank_min,
        },
        "integrable": integrable,
    });
    let mut summary = format!("closure {}", sci(closure.closure_max));
    if !integrable {
        let w = cert.worst();
        let err = Error::NotIntegrable { residual: w.name, value: w.max_abs };
        details["not_integrable"] = json!(info(&err).message);
        return Ok((Status::Fail, summary, details));
    }
    let mut pass = closure.isotropy_max <= TILDE_TOL && closure.closure_max <= TILDE_TOL && closure.rank_min == n + 1;

    let iso = check_isomorphism(&s.family, &s.sampling, s.pairs, s.tol)?;
    details["isomorphism"] =
        json!({"pairs": iso.pairs, "points": iso.points, "anchor_max": iso.anchor_max, "bracket_max": iso.bracket_max});
    pass &= iso.anchor_max <= TILDE_TOL && iso.bracket_max <= TILDE_TOL;
    let _ = write!(summary, "  ψ-bracket {}", sci(iso.bracket_max));

    if let Some(x) = &s.at {
        let o = omega_tilde_check(&s.family, x, s.t0)?;
        details["omega_tilde"] = json!({
            "point": o.point,
            "leaf_dim": o.leaf_dim,
            "max_residual": o.max_residual,
            "relation_residual": o.relation_residual,
            "rank_difference": o.rank_difference,
        });
        pass &= o.max_residual <= OMEGA_TOL && o.relation_residual <= OMEGA_TOL && o.rank_difference == 0;
        let _ = write!(summary, "  Ω_F̃ {}", sci(o.max_residual));
    }
    if let FamilyKind::Jacobi { lambda, e } = s.family.kind() {
        let pt = jacobi_poissonization(lambda, e)?;
        let pts = s.sampling.points(n + 1);
        let r = schouten_residual(&pt, &pts)?;
        details["poisson_bivector"] = json!({"points": pts.len(), "schouten_max": r});
        pass &= r <= s.tol;
        let _ = write!(summary, "  [Λ̃,Λ̃] {}", sci(r));
    }
    Ok((if pass { Status::Pass } else { Status::Fail }, summary, details))
}

/// Runs every requested action; the report depends only on the scenario text,
/// the effective settings and the tool version.
pub fn run(s: &Scenario) -> Report {
    let mut actions = Vec::new();
    for &a in &s.actions {
        let outcome = match a {
            Action::Check => check(s),
            Action::Classify => classify(s),
            Action::Trace => trace(s),
            Action::Poissonize => poissonize(s),
        };
        actions.push(match outcome {
            Ok((status, summary, details)) => ActionReport { action: a.as_str(), status, summary, error: None, details },
            Err(e) => {
                let i = info(&e);
                let status = if i.exit == 1 { Status::Fail } else { Status::Error };
                ActionReport { action: a.as_str(), status, summary: i.code.to_string(), error: Some(i), details: Value::Null }
            }
        });
    }
    let exits: Vec<i32> = actions
        .iter()
        .map(|a| match (&a.error, a.status) {
            (Some(e), _) => e.exit,
            (None, Status::Pass) => 0,
            (None, _) => 1,
        })
        .collect();
    let exit_code = [2, 3, 1].into_iter().find(|c| exits.contains(c)).unwrap_or(0);
    let status = match exit_code {
        0 => Status::Pass,
        1 => Status::Fail,
        _ => Status::Error,
    };
    let digest = Sha256::digest(s.canonical().as_bytes());
    Report {
        tool: "e1dirac",
        version: crate::VERSION,
        scenario: s.name.clone(),
        kind: s.family.kind().tag(),
        coordinates: s.chart.names().to_vec(),
        digest: format!("{digest:x}"),
        seed: s.sampling.seed,
        actions,
        status,
        exit_code,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::lookup;
    use crate::scenario::{parse_scenario, Overrides};

    fn scenario(name: &str, actions: Vec<Action>) -> Scenario {
        let mut s = parse_scenario(lookup(name).unwrap().text).unwrap();
        s.actions = actions;
        s
    }

    #[test]
    fn contact_check_and_classify() {
        let r = run(&scenario("contact_jacobi_r3", vec![Action::Check, Action::Classify]));
        assert_eq!(r.exit_code, 0, "{}", r.to_table());
        assert_eq!(r.actions[0].details["verdict"], "INTEGRABLE");
        assert_eq!(r.actions[1].details["leaf_type"], "Precontact");
        assert_eq!(r.actions[1].details["rank"], 3);
    }

    #[test]
    fn non_integrable_check_names_the_residual() {
        let r = run(&scenario("jacobi_transverse_r3", vec![Action::Check]));
        assert_eq!(r.exit_code, 1);
        assert_eq!(r.actions[0].details["worst"]["name"], "[Λ,Λ] − 2E∧Λ");
        assert_eq!(r.actions[0].details["expectation"]["met"], true);
    }

    #[test]
    fn missing_point_is_an_input_error() {
        let mut s = scenario("contact_jacobi_r3", vec![Action::Classify]);
        s.at = None;
        let r = run(&s);
        assert_eq!(r.exit_code, 2);
        assert_eq!(r.actions[0].error.as_ref().unwrap().code, "invalid_input");
    }

    #[test]
    fn ambiguous_point_is_a_numerical_refusal() {
        let text = "name = a\ncoordinates = [x, y, z]\nkind = jacobi\nlambda = [x y: 1]\ne = [0, 0, x]\nactions = [classify]\nat = [3e-9, 0, 0]\n";
        let r = run(&parse_scenario(text).unwrap());
        assert_eq!(r.exit_code, 3);
        assert_eq!(r.actions[0].error.as_ref().unwrap().code, "ill_conditioned");
    }

    #[test]
    fn reports_repeat_byte_for_byte() {
        let mut s = scenario("jacobi_planes_r3", vec![Action::Classify, Action::Trace]);
        s.apply(&Overrides { steps: Some(20), ..Default::default() });
        assert_eq!(run(&s).to_json(), run(&s).to_json());
        let mut t = s.clone();
        t.apply(&Overrides { seed: Some(5), ..Default::default() });
        assert_ne!(run(&s).digest, run(&t).digest);
    }
}
