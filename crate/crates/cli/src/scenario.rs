//! Line-oriented scenario files: `key = value`, `#` comments, single-line
//! bracketed lists. See `docs/scenario-format.md`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use e1dirac::calculus::{KForm, KVector, VectorField};
use e1dirac::families::DiracFamily;
use e1dirac::sampling::SampleConfig;
use e1dirac::symexpr::{parse_expr_at, Chart, Expr};
use e1dirac::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Action {
    Check,
    Classify,
    Trace,
    Poissonize,
}

impl Action {
    pub fn as_str(self) -> &'static str {
        match self {
            Action::Check => "check",
            Action::Classify => "classify",
            Action::Trace => "trace",
            Action::Poissonize => "poissonize",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "check" => Action::Check,
            "classify" => Action::Classify,
            "trace" => Action::Trace,
            "poissonize" => Action::Poissonize,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Parse,
    UnknownCoordinate,
    DimensionMismatch,
}

impl ErrorKind {
    pub fn code(self) -> &'static str {
        match self {
            ErrorKind::Parse => "parse_error",
            ErrorKind::UnknownCoordinate => "unknown_coordinate",
            ErrorKind::DimensionMismatch => "dimension_mismatch",
        }
    }
}

/// A located problem in a scenario file; line and column are 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioError {
    pub line: usize,
    pub column: usize,
    pub kind: ErrorKind,
    pub message: String,
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}: {}", self.line, self.column, self.kind.code(), self.message)
    }
}

/// Expected outcome of `check`, recorded by catalog entries.
#[derive(Debug, Clone, PartialEq)]
pub enum Expectation {
    Integrable,
    NotIntegrable { residual: Option<String> },
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub chart: Arc<Chart>,
    pub family: DiracFamily,
    pub sampling: SampleConfig,
    pub tol: f64,
    /// Random pairs for the model-bracket and isomorphism checks.
    pub pairs: usize,
    pub actions: Vec<Action>,
    pub at: Option<Vec<f64>>,
    pub t0: f64,
    pub steps: usize,
    pub dt: f64,
    pub expect: Option<Expectation>,
    pub source: String,
}

/// Overrides from the command line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub at: Option<Vec<f64>>,
    pub t0: Option<f64>,
    pub steps: Option<usize>,
    pub dt: Option<f64>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub points: Option<usize>,
}

impl Scenario {
    pub fn apply(&mut self, o: &Overrides) {
        if let Some(at) = &o.at {
            self.at = Some(at.clone());
        }
        if let Some(v) = o.t0 {
            self.t0 = v;
        }
        if let Some(v) = o.steps {
            self.steps = v;
        }
        if let Some(v) = o.dt {
            self.dt = v;
        }
        if let Some(v) = o.seed {
            self.sampling.seed = v;
        }
        if let Some(v) = o.tol {
            self.tol = v;
        }
        if let Some(v) = o.points {
            self.sampling.extra = v;
        }
    }

    /// Text that determines the report: the source plus the effective settings.
    pub fn canonical(&self) -> String {
        format!(
            "{}\n--\nseed={} grid={} extra={} tol={:e} pairs={} at={:?} t0={:e} steps={} dt={:e} actions={:?}\n",
            self.source.trim_end(),
            self.sampling.seed,
            self.sampling.grid,
            self.sampling.extra,
            self.tol,
            self.pairs,
            self.at,
            self.t0,
            self.steps,
            self.dt,
            self.actions,
        )
    }
}

struct Entry {
    line: usize,
    /// Column of the first value character.
    column: usize,
    value: String,
}

struct Ctx {
    errors: Vec<ScenarioError>,
}

impl Ctx {
    fn push(&mut self, line: usize, column: usize, kind: ErrorKind, message: impl Into<String>) {
        self.errors.push(ScenarioError { line, column, kind, message: message.into() });
    }

    fn core_error(&mut self, line: usize, base: usize, e: Error) {
        match e {
            Error::Parse { column, message } => self.push(line, base + column - 1, ErrorKind::Parse, message),
            Error::UnknownIdentifier { name, column } => {
                self.push(line, base + column - 1, ErrorKind::UnknownCoordinate, format!("`{name}` is not a declared coordinate"))
            }
            other => self.push(line, base, ErrorKind::Parse, other.to_string()),
        }
    }
}

/// Items of a `[a, b, c]` list with their 1-based columns.
fn split_list(entry: &Entry, ctx: &mut Ctx) -> Option<Vec<(String, usize)>> {
    let v = entry.value.as_str();
    if !v.starts_with('[') || !v.ends_with(']') {
        ctx.push(entry.line, entry.column, ErrorKind::Parse, "expected a bracketed list `[ ... ]`");
        return None;
    }
    let inner = &v[1..v.len() - 1];
    let mut items = Vec::new();
    let (mut depth, mut start) = (0i32, 0usize);
    let chars: Vec<(usize, char)> = inner.char_indices().collect();
    let push = |from: usize, to: usize, items: &mut Vec<(String, usize)>| {
        let raw = &inner[from..to];
        let lead = raw.len() - raw.trim_start().len();
        let col = entry.column + 1 + inner[..from + lead].chars().count();
        items.push((raw.trim().to_string(), col));
    };
    for &(i, c) in &chars {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                push(start, i, &mut items);
                start = i + 1;
            }
            _ => {}
        }
    }
    push(start, inner.len(), &mut items);
    if items.len() == 1 && items[0].0.is_empty() {
        items.clear();
    }
    if let Some((_, col)) = items.iter().find(|(s, _)| s.is_empty()) {
        ctx.push(entry.line, *col, ErrorKind::Parse, "empty list item");
        return None;
    }
    Some(items)
}

fn expr_list(entry: &Entry, chart: &Chart, n: usize, ctx: &mut Ctx) -> Option<Vec<Expr>> {
    let items = split_list(entry, ctx)?;
    if items.len() != n {
        ctx.push(
            entry.line,
            entry.column,
            ErrorKind::DimensionMismatch,
            format!("expected {n} components, found {}", items.len()),
        );
        return None;
    }
    let mut out = Vec::with_capacity(n);
    let mut ok = true;
    for (text, col) in items {
        match parse_expr_at(&text, chart, col - 1) {
            Ok(e) => out.push(e),
            Err(e) => {
                ctx.core_error(entry.line, 1, e);
                ok = false;
            }
        }
    }
    ok.then_some(out)
}

/// `[a b: expr, ...]` on strictly increasing coordinate pairs.
fn pair_list(entry: &Entry, chart: &Chart, ctx: &mut Ctx) -> Option<Vec<(Vec<usize>, Expr)>> {
    let items = split_list(entry, ctx)?;
    let mut out: Vec<(Vec<usize>, Expr)> = Vec::new();
    let mut ok = true;
    for (text, col) in items {
        let Some(colon) = text.find(':') else {
            ctx.push(entry.line, col, ErrorKind::Parse, "expected `i j: expression`");
            ok = false;
            continue;
        };
        let names: Vec<&str> = text[..colon].split_whitespace().collect();
        if names.len() != 2 {
            ctx.push(entry.line, col, ErrorKind::DimensionMismatch, "an entry needs exactly two coordinate names");
            ok = false;
            continue;
        }
        let mut idx = Vec::new();
        for name in &names {
            match chart.names().iter().position(|c| c == name) {
                Some(i) => idx.push(i),
                None => {
                    let offset = text.find(name).unwrap_or(0);
                    ctx.push(entry.line, col + offset, ErrorKind::UnknownCoordinate, format!("`{name}` is not a declared coordinate"));
                    ok = false;
                }
            }
        }
        if idx.len() == 2 && idx[0] >= idx[1] {
            ctx.push(
                entry.line,
                col,
                ErrorKind::DimensionMismatch,
                format!("pair ({}, {}) is not increasing; give antisymmetric entries on increasing pairs only", names[0], names[1]),
            );
            ok = false;
            continue;
        }
        if out.iter().any(|(p, _)| *p == idx) {
            ctx.push(entry.line, col, ErrorKind::Parse, format!("pair ({}, {}) given twice", names[0], names[1]));
            ok = false;
            continue;
        }
        let body = &text[colon + 1..];
        let lead = body.len() - body.trim_start().len();
        let offset = col - 1 + text[..colon + 1 + lead].chars().count();
        match parse_expr_at(body.trim(), chart, offset) {
            Ok(e) if idx.len() == 2 => out.push((idx, e)),
            Ok(_) => {}
            Err(e) => {
                ctx.core_error(entry.line, 1, e);
                ok = false;
            }
        }
    }
    ok.then_some(out)
}

fn number<T: std::str::FromStr>(entry: &Entry, what: &str, ctx: &mut Ctx) -> Option<T> {
    match entry.value.parse::<T>() {
        Ok(v) => Some(v),
        Err(_) => {
            ctx.push(entry.line, entry.column, ErrorKind::Parse, format!("expected {what}, found `{}`", entry.value));
            None
        }
    }
}

fn reals(entry: &Entry, n: usize, ctx: &mut Ctx) -> Option<Vec<f64>> {
    let items = split_list(entry, ctx)?;
    if items.len() != n {
        ctx.push(entry.line, entry.column, ErrorKind::DimensionMismatch, format!("expected {n} coordinates, found {}", items.len()));
        return None;
    }
    let mut out = Vec::new();
    for (text, col) in items {
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => out.push(v),
            _ => {
                ctx.push(entry.line, col, ErrorKind::Parse, format!("`{text}` is not a real number"));
                return None;
            }
        }
    }
    Some(out)
}

const KINDS: [(&str, &[&str]); 6] = [
    ("dirac_2form", &["omega"]),
    ("dirac_bivector", &["lambda"]),
    ("lcp", &["omega2", "omega1"]),
    ("precontact", &["eta"]),
    ("jacobi", &["lambda", "e"]),
    ("homogeneous_poisson", &["pi", "z"]),
];

const SETTINGS: [&str; 14] = [
    "name", "coordinates", "kind", "grid", "points", "seed", "tol", "pairs", "actions", "at", "t0", "steps", "dt", "expect",
];

pub fn parse_scenario(text: &str) -> Result<Scenario, Vec<ScenarioError>> {
    let mut ctx = Ctx { errors: Vec::new() };
    let mut entries: BTreeMap<String, Entry> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let Some(eq) = content.find('=') else {
            let col = content.len() - content.trim_start().len() + 1;
            ctx.push(line, col, ErrorKind::Parse, "expected `key = value`");
            continue;
        };
        let key = content[..eq].trim();
        let rest = &content[eq + 1..];
        let lead = rest.len() - rest.trim_start().len();
        let column = content[..eq + 1 + lead].chars().count() + 1;
        let key_col = content.len() - content.trim_start().len() + 1;
        let known = SETTINGS.contains(&key) || KINDS.iter().any(|(_, ks)| ks.contains(&key)) || key == "expect_residual";
        if !known {
            ctx.push(line, key_col, ErrorKind::Parse, format!("unknown key `{key}`"));
            continue;
        }
        if entries.contains_key(key) {
            ctx.push(line, key_col, ErrorKind::Parse, format!("key `{key}` given twice"));
            continue;
        }
        entries.insert(key.to_string(), Entry { line, column, value: rest.trim().to_string() });
    }

    let required = |k: &str, ctx: &mut Ctx| {
        if !entries.contains_key(k) {
            ctx.push(1, 1, ErrorKind::Parse, format!("missing required key `{k}`"));
        }
    };
    for k in ["name", "coordinates", "kind"] {
        required(k, &mut ctx);
    }

    let chart = entries.get("coordinates").and_then(|e| {
        let items = split_list(e, &mut ctx)?;
        let names: Vec<String> = items.iter().map(|(s, _)| s.clone()).collect();
        if names.iter().any(|n| n == "t") {
            ctx.push(e.line, e.column, ErrorKind::Parse, "`t` is reserved for the time variable");
            return None;
        }
        match Chart::new(&names) {
            Ok(c) => Some(Arc::new(c)),
            Err(err) => {
                ctx.push(e.line, e.column, ErrorKind::Parse, err.to_string());
                None
            }
        }
    });

    let kind = entries.get("kind").and_then(|e| match KINDS.iter().find(|(k, _)| *k == e.value) {
        Some((k, keys)) => Some((*k, *keys)),
        None => {
            ctx.push(e.line, e.column, ErrorKind::Parse, format!("unknown kind `{}`", e.value));
            None
        }
    });
    for (key, entry) in &entries {
        let is_component = KINDS.iter().any(|(_, ks)| ks.contains(&key.as_str()));
        if is_component {
            if let Some((k, keys)) = kind {
                if !keys.contains(&key.as_str()) {
                    ctx.push(entry.line, 1, ErrorKind::Parse, format!("key `{key}` does not apply to kind {k}"));
                }
            }
        }
    }

    let mut family = None;
    if let (Some(chart), Some((k, keys))) = (&chart, kind) {
        let n = chart.dim();
        let mut missing = false;
        for key in keys {
            if !entries.contains_key(*key) {
                ctx.push(1, 1, ErrorKind::Parse, format!("kind {k} needs key `{key}`"));
                missing = true;
            }
        }
        if !missing {
            let two = |key: &str, ctx: &mut Ctx| pair_list(&entries[key], chart, ctx);
            let one = |key: &str, ctx: &mut Ctx| expr_list(&entries[key], chart, n, ctx);
            let built = match k {
                "dirac_2form" => two("omega", &mut ctx).map(|o| {
                    KForm::from_entries(chart, 2, o).and_then(DiracFamily::from_dirac_graph_form)
                }),
                "dirac_bivector" => two("lambda", &mut ctx).map(|l| {
                    KVector::from_entries(chart, 2, l).and_then(DiracFamily::from_dirac_graph_bivector)
                }),
                "lcp" => match (two("omega2", &mut ctx), one("omega1", &mut ctx)) {
                    (Some(o2), Some(o1)) => Some(
                        KForm::from_entries(chart, 2, o2)
                            .and_then(|o2| Ok((o2, KForm::from_components(chart, o1)?)))
                            .and_then(|(o2, o1)| DiracFamily::from_lcp(o2, o1)),
                    ),
                    _ => None,
                },
                "precontact" => one("eta", &mut ctx)
                    .map(|c| KForm::from_components(chart, c).and_then(DiracFamily::from_precontact)),
                "jacobi" => match (two("lambda", &mut ctx), one("e", &mut ctx)) {
                    (Some(l), Some(e)) => Some(
                        KVector::from_entries(chart, 2, l)
                            .and_then(|l| Ok((l, VectorField::new(chart, e)?)))
                            .and_then(|(l, e)| DiracFamily::from_jacobi(l, e)),
                    ),
                    _ => None,
                },
                _ => match (two("pi", &mut ctx), one("z", &mut ctx)) {
                    (Some(p), Some(z)) => Some(
                        KVector::from_entries(chart, 2, p)
                            .and_then(|p| Ok((p, VectorField::new(chart, z)?)))
                            .and_then(|(p, z)| DiracFamily::from_homogeneous_poisson(p, z)),
                    ),
                    _ => None,
                },
            };
            match built {
                Some(Ok(f)) => family = Some(f),
                Some(Err(e)) => ctx.push(1, 1, ErrorKind::Parse, e.to_string()),
                None => {}
            }
        }
    }

    let mut sampling = SampleConfig::default();
    if let Some(e) = entries.get("grid") {
        sampling.grid = number(e, "a lattice size", &mut ctx).unwrap_or(sampling.grid);
    }
    if let Some(e) = entries.get("points") {
        sampling.extra = number(e, "a point count", &mut ctx).unwrap_or(sampling.extra);
    }
    if let Some(e) = entries.get("seed") {
        sampling.seed = number(e, "an unsigned seed", &mut ctx).unwrap_or(0);
    }
    let real = |key: &str, default: f64, ctx: &mut Ctx| -> f64 {
        match entries.get(key) {
            Some(e) => match number::<f64>(e, "a real number", ctx) {
                Some(v) if v.is_finite() => v,
                Some(_) => {
                    ctx.push(e.line, e.column, ErrorKind::Parse, "value must be finite");
                    default
                }
                None => default,
            },
            None => default,
        }
    };
    let tol = real("tol", 1e-9, &mut ctx);
    let t0 = real("t0", 0.0, &mut ctx);
    let dt = real("dt", 0.05, &mut ctx);
    let steps = entries.get("steps").and_then(|e| number(e, "a step count", &mut ctx)).unwrap_or(200);
    let pairs = entries.get("pairs").and_then(|e| number(e, "a pair count", &mut ctx)).unwrap_or(10);
    let at = match (entries.get("at"), &chart) {
        (Some(e), Some(c)) => reals(e, c.dim(), &mut ctx),
        _ => None,
    };
    let actions = match entries.get("actions") {
        Some(e) => split_list(e, &mut ctx)
            .map(|items| {
                let mut acts = Vec::new();
                for (s, col) in items {
                    match Action::parse(&s) {
                        Some(a) if !acts.contains(&a) => acts.push(a),
                        Some(_) => {}
                        None => ctx.push(e.line, col, ErrorKind::Parse, format!("unknown action `{s}`")),
                    }
                }
                acts
            })
            .unwrap_or_default(),
        None => vec![Action::Check],
    };
    let expect = match entries.get("expect") {
        Some(e) => match e.value.as_str() {
            "integrable" => Some(Expectation::Integrable),
            "not_integrable" => Some(Expectation::NotIntegrable {
                residual: entries.get("expect_residual").map(|r| r.value.clone()),
            }),
            other => {
                ctx.push(e.line, e.column, ErrorKind::Parse, format!("expect must be integrable or not_integrable, found `{other}`"));
                None
            }
        },
        None => None,
    };
    let name = entries.get("name").map(|e| e.value.clone()).unwrap_or_default();

    if !ctx.errors.is_empty() {
        ctx.errors.sort_by_key(|e| (e.line, e.column));
        return Err(ctx.errors);
    }
    let (Some(chart), Some(family)) = (chart, family) else {
        return Err(vec![ScenarioError { line: 1, column: 1, kind: ErrorKind::Parse, message: "incomplete scenario".into() }]);
    };
    Ok(Scenario { name, chart, family, sampling, tol, pairs, actions, at, t0, steps, dt, expect, source: text.to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;

    const CONTACT: &str = "\
name = contact
coordinates = [x, y, z]
kind = jacobi
lambda = [x y: 1, y z: -y]
e = [0, 0, 1]
";

    #[test]
    fn contact_parses() {
        let s = parse_scenario(CONTACT).unwrap();
        assert_eq!(s.chart.dim(), 3);
        assert_eq!(s.family.kind().tag(), "jacobi");
        assert_eq!(s.actions, vec![Action::Check]);
    }

    #[test]
    fn undeclared_coordinate_is_located() {
        let text = CONTACT.replace("e = [0, 0, 1]", "e = [0, w, 1]");
        let errs = parse_scenario(&text).unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!((errs[0].line, errs[0].column, errs[0].kind), (5, 9, ErrorKind::UnknownCoordinate));
        let text = CONTACT.replace("y z: -y", "y z: -w*y");
        let errs = parse_scenario(&text).unwrap_err();
        assert_eq!((errs[0].line, errs[0].column, errs[0].kind), (4, 25, ErrorKind::UnknownCoordinate));
    }

    #[test]
    fn decreasing_pair_is_rejected() {
        let text = CONTACT.replace("y z: -y", "z y: y");
        let errs = parse_scenario(&text).unwrap_err();
        assert_eq!(errs[0].kind, ErrorKind::DimensionMismatch);
        assert_eq!(errs[0].line, 4);
    }

    #[test]
    fn wrong_component_count() {
        let errs = parse_scenario(&CONTACT.replace("[0, 0, 1]", "[0, 1]")).unwrap_err();
        assert_eq!(errs[0].kind, ErrorKind::DimensionMismatch);
    }

    #[test]
    fn time_is_not_a_coordinate() {
        let errs = parse_scenario(&CONTACT.replace("[0, 0, 1]", "[0, 0, t]")).unwrap_err();
        assert_eq!(errs[0].kind, ErrorKind::UnknownCoordinate);
    }

    #[test]
    fn several_errors_are_collected() {
        let text = "name = bad\ncoordinates = [x, y]\nkind = precontact\neta = [x, q]\nfoo = 1\nsteps = many\n";
        let errs = parse_scenario(text).unwrap_err();
        let lines: Vec<usize> = errs.iter().map(|e| e.line).collect();
        assert_eq!(lines, vec![4, 5, 6]);
    }

    #[test]
    fn overrides_and_settings() {
        let text = format!("{CONTACT}actions = [classify, trace]\nat = [0, 0, 0]\nseed = 4\n");
        let mut s = parse_scenario(&text).unwrap();
        assert_eq!(s.actions, vec![Action::Classify, Action::Trace]);
        assert_eq!(s.at, Some(vec![0.0; 3]));
        s.apply(&Overrides { seed: Some(9), steps: Some(5), ..Default::default() });
        assert_eq!((s.sampling.seed, s.steps), (9, 5));
        assert!(s.canonical().contains("seed=9"));
    }
}
