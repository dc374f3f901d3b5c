//! The curve-spec file: schema, overrides from the command line, and the
//! validation that runs before any computation.

use std::collections::BTreeMap;
use std::fmt;

use serde::Deserialize;
use spectral_core::localdata::Orders;
use spectral_core::recursion::{dimension, is_stable};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecError(pub String);

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn bad<T>(msg: impl Into<String>) -> Result<T, SpecError> {
    Err(SpecError(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    LocalData,
    Invariants,
    Intersection,
    Graphs,
    TheoremCheck,
    ClosedFormCheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::LocalData => "local-data",
            Command::Invariants => "invariants",
            Command::Intersection => "intersection",
            Command::Graphs => "graphs",
            Command::TheoremCheck => "theorem-check",
            Command::ClosedFormCheck => "closed-form-check",
        }
    }

    fn needs_targets(self) -> bool {
        !matches!(self, Command::LocalData | Command::ClosedFormCheck)
    }
}

/// A scalar in a spec: an integer or exact text such as `"3/2"`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Int(i64),
    Text(String),
}

impl Number {
    pub fn text(&self) -> String {
        match self {
            Number::Int(n) => n.to_string(),
            Number::Text(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Builtin {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, Number>,
}

/// `num / den` with coefficients listed from degree 0 up.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fraction {
    pub num: Vec<Number>,
    #[serde(default)]
    pub den: Option<Vec<Number>>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Parametric {
    #[serde(default)]
    pub x: Option<Fraction>,
    #[serde(default)]
    pub dx: Option<Fraction>,
    #[serde(default)]
    pub y: Option<Fraction>,
    #[serde(default)]
    pub dy: Option<Fraction>,
    #[serde(default, rename = "B")]
    pub kernel: Option<serde_json::Value>,
    pub branchpoints: Vec<Number>,
    #[serde(default)]
    pub involution: Option<Fraction>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrderSpec {
    pub chart: Option<i64>,
    pub bergman: Option<i64>,
    pub times: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub name: String,
    pub field: String,
    #[serde(default)]
    pub builtin: Option<Builtin>,
    #[serde(default)]
    pub parametric: Option<Parametric>,
    #[serde(default)]
    pub orders: OrderSpec,
    #[serde(default)]
    pub targets: Vec<(usize, usize)>,
    #[serde(default)]
    pub commands: Vec<Command>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Field {
    Rational,
    Quadratic(i64),
    Surd,
    Float(u32),
}

impl Field {
    pub fn parse(s: &str) -> Result<Self, SpecError> {
        let s = s.trim();
        if s == "rational" {
            return Ok(Field::Rational);
        }
        if s == "surd" {
            return Ok(Field::Surd);
        }
        if let Some(m) = s.strip_prefix("quadratic:") {
            let m: i64 = m.trim().parse().map_err(|_| SpecError(format!("bad radicand in field {s:?}")))?;
            if m == 0 || m == 1 || !squarefree(m) {
                return bad(format!("field {s:?}: the radicand must be a squarefree integer other than 0 and 1"));
            }
            return Ok(Field::Quadratic(m));
        }
        if let Some(b) = s.strip_prefix("float:") {
            let bits: u32 = b.trim().parse().map_err(|_| SpecError(format!("bad precision in field {s:?}")))?;
            if bits == 0 || bits > 53 {
                return bad(format!("field {s:?}: the float backend is double precision, so bits must be 1..=53"));
            }
            return Ok(Field::Float(bits));
        }
        bad(format!("unknown field {s:?}; expected rational, quadratic:m, surd or float:bits"))
    }
}

fn squarefree(m: i64) -> bool {
    let a = m.unsigned_abs();
    (2..).take_while(|p| p * p <= a).all(|p| !a.is_multiple_of(p * p))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Builtin(Builtin),
    Parametric(Box<Parametric>),
}

/// A validated spec with command-line overrides applied.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub name: String,
    pub field: Field,
    pub source: Source,
    pub orders: Orders,
    /// Order for closed-form tables.
    pub table_order: usize,
    pub targets: Vec<(usize, usize)>,
    pub commands: Vec<Command>,
}

#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub field: Option<String>,
    pub orders: Option<OrderSpec>,
    pub targets: Option<Vec<(usize, usize)>>,
    pub commands: Vec<Command>,
}

pub fn parse_file(text: &str) -> Result<SpecFile, SpecError> {
    serde_json::from_str(text).map_err(|e| SpecError(format!("malformed spec: {e}")))
}

/// `g,n` pairs separated by `;` or whitespace.
pub fn parse_targets(s: &str) -> Result<Vec<(usize, usize)>, SpecError> {
    s.split(|c: char| c == ';' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            let (g, n) = t.split_once(',').ok_or_else(|| SpecError(format!("target {t:?} is not g,n")))?;
            let g = g.trim().parse().map_err(|_| SpecError(format!("bad genus in {t:?}")))?;
            let n = n.trim().parse().map_err(|_| SpecError(format!("bad point count in {t:?}")))?;
            Ok((g, n))
        })
        .collect()
}

/// `key=value` pairs separated by commas, keys `chart`, `bergman`, `times`.
pub fn parse_orders(s: &str) -> Result<OrderSpec, SpecError> {
    let mut o = OrderSpec::default();
    for part in s.split(',').filter(|p| !p.trim().is_empty()) {
        let (k, v) = part.split_once('=').ok_or_else(|| SpecError(format!("order {part:?} is not key=value")))?;
        let v = v.trim();
        let int = || v.parse::<i64>().map_err(|_| SpecError(format!("bad order value {v:?}")));
        match k.trim() {
            "chart" => o.chart = Some(int()?),
            "bergman" => o.bergman = Some(int()?),
            "times" => o.times = Some(int()?.try_into().map_err(|_| SpecError(format!("bad order value {v:?}")))?),
            other => return bad(format!("unknown order key {other:?}")),
        }
    }
    Ok(o)
}

fn merge(base: OrderSpec, over: OrderSpec) -> OrderSpec {
    OrderSpec {
        chart: over.chart.or(base.chart),
        bergman: over.bergman.or(base.bergman),
        times: over.times.or(base.times),
    }
}

pub fn resolve(file: SpecFile, over: Overrides) -> Result<Resolved, SpecError> {
    let field = Field::parse(over.field.as_deref().unwrap_or(&file.field))?;
    let source = match (file.builtin, file.parametric) {
        (Some(b), None) => Source::Builtin(b),
        (None, Some(p)) => {
            check_parametric(&p)?;
            Source::Parametric(Box::new(p))
        }
        (Some(_), Some(_)) => return bad("spec has both builtin and parametric"),
        (None, None) => return bad("spec needs a builtin or a parametric curve"),
    };
    let targets = over.targets.unwrap_or(file.targets);
    for &(g, n) in &targets {
        if !is_stable(g, n) || (n == 0 && g < 2) {
            return bad(format!("target ({g},{n}) is not a stable type"));
        }
    }
    let commands = if over.commands.is_empty() { file.commands } else { over.commands };
    if commands.is_empty() {
        return bad("no commands given in the spec or on the command line");
    }
    if let Some(c) = commands.iter().find(|c| c.needs_targets()) {
        if targets.is_empty() {
            return bad(format!("{} needs at least one target", c.name()));
        }
    }
    let requested = merge(file.orders, over.orders.unwrap_or_default());
    // the recursion and the calibration both need the (1,1) level
    let dim = targets.iter().map(|&(g, n)| dimension(g, n)).max().unwrap_or(1).max(1);
    let default = Orders::for_dimension(dim);
    let orders = Orders {
        bergman: requested.bergman.unwrap_or(default.bergman),
        times: requested.times.unwrap_or(default.times),
    };
    if orders.bergman < 0 {
        return bad("bergman order must be nonnegative");
    }
    if let Some(c) = requested.chart {
        if c < orders.chart() {
            return bad(format!("chart order {c} is below the {} these bergman and times orders need", orders.chart()));
        }
    }
    Ok(Resolved {
        name: file.name,
        field,
        source,
        orders,
        table_order: requested.times.unwrap_or(6),
        targets,
        commands,
    })
}

fn check_parametric(p: &Parametric) -> Result<(), SpecError> {
    if p.x.is_some() == p.dx.is_some() {
        return bad("parametric curve needs exactly one of x and dx");
    }
    if p.y.is_some() == p.dy.is_some() {
        return bad("parametric curve needs exactly one of y and dy");
    }
    match &p.kernel {
        None => {}
        Some(serde_json::Value::String(s)) if s == "standard" => {}
        Some(_) => return bad("only the standard kernel \"B\": \"standard\" is supported in curve specs"),
    }
    if p.branchpoints.is_empty() {
        return bad("parametric curve needs at least one branchpoint");
    }
    Ok(())
}
