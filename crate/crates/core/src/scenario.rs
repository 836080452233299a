//! Scenario files.
//!
//! A line-oriented `key: value` format. `#` starts a comment. Two keys open
//! indented blocks: `edges:` holds one `- id: .., tail: .., head: .., dist: ..`
//! record per line, and `policy_params:` holds `name: value` lines for the
//! most recent `policy:`. Repeat `policy:` to compare several policies.
//!
//! ```text
//! vertices: s a b r
//! source: s
//! destination: r
//! edges:
//!   - id: 0, tail: s, head: a, dist: bernoulli 0.3 1
//!   - id: 1, tail: a, head: r, dist: bernoulli 0.3 1
//!   - id: 2, tail: s, head: b, dist: uniform 0.2 0.6
//!   - id: 3, tail: b, head: r, dist: exponential 2.5
//! horizon: 10000
//! seeds: base 1 count 50      # or an explicit list: seeds: 3 5 8
//! output: results/diamond
//! policy: dsee-star
//! policy_params:
//!   w: 5
//! policy: naive-ucb
//! ```
//!
//! Optional keys: `seeds` (default `base 0 count 50`), `output` (default: the
//! scenario path without its extension) and `spanner_c`, the spanner
//! approximation factor (default 1, exact).

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::cost::EdgeDistribution;
use crate::graph::{load_network, EdgeSpec, GraphError, NetworkSpec};
use crate::policy::{PolicyError, PolicySpec};

pub const DEFAULT_SEED_COUNT: u64 = 50;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: unknown policy `{name}`")]
    UnknownPolicy { line: usize, name: String },
    #[error("missing field `{0}`")]
    MissingField(String),
    #[error("invalid `{field}`: {reason}")]
    InvalidParam { field: String, reason: String },
    #[error("network: {0}")]
    Network(#[from] GraphError),
}

impl ScenarioError {
    fn parse(line: usize, message: impl Into<String>) -> Self {
        Self::Parse {
            line,
            message: message.into(),
        }
    }

    fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Self::InvalidParam {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Seeds {
    List(Vec<u64>),
    Range { base: u64, count: u64 },
}

impl Seeds {
    pub fn to_vec(&self) -> Vec<u64> {
        match self {
            Seeds::List(v) => v.clone(),
            Seeds::Range { base, count } => (0..*count).map(|i| base.wrapping_add(i)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Seeds::List(v) => v.len(),
            Seeds::Range { count, .. } => *count as usize,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Same number of seeds, starting from `base`.
    pub fn with_base(&self, base: u64) -> Seeds {
        Seeds::Range {
            base,
            count: self.len() as u64,
        }
    }
}

impl Default for Seeds {
    fn default() -> Self {
        Seeds::Range {
            base: 0,
            count: DEFAULT_SEED_COUNT,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub network: NetworkSpec,
    /// Distribution of each edge, indexed by edge id.
    pub dists: Vec<EdgeDistribution>,
    pub horizon: u64,
    pub policies: Vec<PolicySpec>,
    pub seeds: Seeds,
    /// Prefix for `<output>_<policy>.csv` and `<output>_summary.txt`.
    pub output: String,
    pub spanner_c: f64,
}

/// Reads and validates a scenario file.
pub fn parse_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let default_output = path.with_extension("").display().to_string();
    Scenario::parse_str(&text, &default_output)
}

/// Line number, policy name and its raw parameters.
type RawPolicy = (usize, String, Vec<(String, String)>);

#[derive(Clone, Copy)]
enum Block {
    None,
    Edges,
    Params,
}

struct RawEdge {
    line: usize,
    id: Option<String>,
    tail: Option<String>,
    head: Option<String>,
    dist: Option<String>,
}

fn check_name(line: usize, what: &str, name: &str) -> Result<(), ScenarioError> {
    if name.is_empty()
        || name
            .chars()
            .any(|c| c.is_whitespace() || matches!(c, ',' | ':' | '#'))
    {
        return Err(ScenarioError::parse(
            line,
            format!("invalid {what} name `{name}`"),
        ));
    }
    Ok(())
}

fn split_key(line_no: usize, s: &str) -> Result<(String, String), ScenarioError> {
    let (k, v) = s
        .split_once(':')
        .ok_or_else(|| ScenarioError::parse(line_no, format!("expected `key: value`, got `{s}`")))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

fn parse_u64(field: &str, raw: &str) -> Result<u64, ScenarioError> {
    if let Ok(v) = raw.parse::<u64>() {
        return Ok(v);
    }
    match raw.parse::<f64>() {
        Ok(f) if f.is_finite() && f >= 0.0 && f.fract() == 0.0 && f < 1.8e19 => Ok(f as u64),
        _ => Err(ScenarioError::invalid(field, format!("`{raw}` is not a nonnegative integer"))),
    }
}

impl Scenario {
    /// Parses scenario text; `default_output` is used when `output` is absent.
    pub fn parse_str(text: &str, default_output: &str) -> Result<Scenario, ScenarioError> {
        let mut vertices: Option<Vec<String>> = None;
        let mut source: Option<String> = None;
        let mut destination: Option<String> = None;
        let mut edges: Option<Vec<RawEdge>> = None;
        let mut horizon: Option<u64> = None;
        let mut seeds: Option<Seeds> = None;
        let mut output: Option<String> = None;
        let mut spanner_c: Option<f64> = None;
        let mut policies: Vec<RawPolicy> = Vec::new();
        let mut params_seen = Vec::<bool>::new();
        let mut block = Block::None;

        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw_line.split('#').next().unwrap_or("").trim_end();
            if line.trim().is_empty() {
                continue;
            }
            let indented = line.starts_with(' ') || line.starts_with('\t');
            if indented {
                let body = line.trim();
                match block {
                    Block::None => {
                        return Err(ScenarioError::parse(line_no, "indented line outside a block"))
                    }
                    Block::Edges => {
                        let rec = body.strip_prefix('-').ok_or_else(|| {
                            ScenarioError::parse(line_no, "edge records start with `-`")
                        })?;
                        let mut e = RawEdge {
                            line: line_no,
                            id: None,
                            tail: None,
                            head: None,
                            dist: None,
                        };
                        for part in rec.split(',') {
                            let (k, v) = split_key(line_no, part.trim())?;
                            let slot = match k.as_str() {
                                "id" => &mut e.id,
                                "tail" => &mut e.tail,
                                "head" => &mut e.head,
                                "dist" => &mut e.dist,
                                other => {
                                    return Err(ScenarioError::parse(
                                        line_no,
                                        format!("unknown edge field `{other}`"),
                                    ))
                                }
                            };
                            if slot.replace(v).is_some() {
                                return Err(ScenarioError::parse(
                                    line_no,
                                    format!("edge field `{k}` given twice"),
                                ));
                            }
                        }
                        edges.get_or_insert_with(Vec::new).push(e);
                    }
                    Block::Params => {
                        let (k, v) = split_key(line_no, body)?;
                        policies.last_mut().expect("params follow a policy").2.push((k, v));
                    }
                }
                continue;
            }

            block = Block::None;
            let (key, value) = split_key(line_no, line)?;
            let once = |present: bool| {
                if present {
                    Err(ScenarioError::parse(line_no, format!("`{key}` given twice")))
                } else {
                    Ok(())
                }
            };
            match key.as_str() {
                "vertices" => {
                    once(vertices.is_some())?;
                    let list: Vec<String> = value
                        .split(|c: char| c == ',' || c.is_whitespace())
                        .filter(|s| !s.is_empty())
                        .map(str::to_string)
                        .collect();
                    for v in &list {
                        check_name(line_no, "vertex", v)?;
                    }
                    vertices = Some(list);
                }
                "source" => {
                    once(source.is_some())?;
                    check_name(line_no, "vertex", &value)?;
                    source = Some(value);
                }
                "destination" => {
                    once(destination.is_some())?;
                    check_name(line_no, "vertex", &value)?;
                    destination = Some(value);
                }
                "edges" => {
                    once(edges.is_some())?;
                    if !value.is_empty() {
                        return Err(ScenarioError::parse(line_no, "edge records go on indented lines"));
                    }
                    edges = Some(Vec::new());
                    block = Block::Edges;
                }
                "horizon" => {
                    once(horizon.is_some())?;
                    let h = parse_u64("horizon", &value)?;
                    if h < 1 {
                        return Err(ScenarioError::invalid("horizon", "must be at least 1"));
                    }
                    horizon = Some(h);
                }
                "seeds" => {
                    once(seeds.is_some())?;
                    seeds = Some(parse_seeds(&value)?);
                }
                "output" => {
                    once(output.is_some())?;
                    if value.is_empty() {
                        return Err(ScenarioError::invalid("output", "empty prefix"));
                    }
                    output = Some(value);
                }
                "spanner_c" => {
                    once(spanner_c.is_some())?;
                    let c: f64 = value
                        .parse()
                        .map_err(|_| ScenarioError::invalid("spanner_c", "not a number"))?;
                    if !(c.is_finite() && c >= 1.0) {
                        return Err(ScenarioError::invalid("spanner_c", "must be >= 1"));
                    }
                    spanner_c = Some(c);
                }
                "policy" => {
                    if value.is_empty() {
                        return Err(ScenarioError::MissingField("policy".into()));
                    }
                    policies.push((line_no, value, Vec::new()));
                    params_seen.push(false);
                }
                "policy_params" => {
                    let Some(seen) = params_seen.last_mut() else {
                        return Err(ScenarioError::parse(line_no, "`policy_params` before any `policy`"));
                    };
                    if *seen {
                        return Err(ScenarioError::parse(line_no, "`policy_params` given twice for one policy"));
                    }
                    *seen = true;
                    if !value.is_empty() {
                        return Err(ScenarioError::parse(line_no, "policy parameters go on indented lines"));
                    }
                    block = Block::Params;
                }
                "dist" => {
                    return Err(ScenarioError::parse(line_no, "`dist` belongs inside an edge record"))
                }
                other => {
                    return Err(ScenarioError::parse(line_no, format!("unknown field `{other}`")))
                }
            }
        }

        let vertices = vertices.ok_or_else(|| ScenarioError::MissingField("vertices".into()))?;
        let source = source.ok_or_else(|| ScenarioError::MissingField("source".into()))?;
        let destination = destination.ok_or_else(|| ScenarioError::MissingField("destination".into()))?;
        let raw_edges = edges.ok_or_else(|| ScenarioError::MissingField("edges".into()))?;
        let horizon = horizon.ok_or_else(|| ScenarioError::MissingField("horizon".into()))?;
        if policies.is_empty() {
            return Err(ScenarioError::MissingField("policy".into()));
        }

        let mut edge_specs = Vec::with_capacity(raw_edges.len());
        let mut dist_by_id: Vec<(usize, EdgeDistribution)> = Vec::new();
        for (i, e) in raw_edges.iter().enumerate() {
            let need = |v: &Option<String>, name: &str| {
                v.clone()
                    .ok_or_else(|| ScenarioError::MissingField(format!("edges[{i}].{name} (line {})", e.line)))
            };
            let id_raw = need(&e.id, "id")?;
            let id: usize = id_raw
                .parse()
                .map_err(|_| ScenarioError::invalid(format!("edges[{i}].id"), format!("`{id_raw}` is not an edge index")))?;
            let tail = need(&e.tail, "tail")?;
            let head = need(&e.head, "head")?;
            check_name(e.line, "vertex", &tail)?;
            check_name(e.line, "vertex", &head)?;
            let dist: EdgeDistribution = need(&e.dist, "dist")?
                .parse()
                .map_err(|err: crate::cost::CostError| {
                    ScenarioError::invalid(format!("edges[{i}].dist"), err.to_string())
                })?;
            edge_specs.push(EdgeSpec { id, tail, head });
            dist_by_id.push((id, dist));
        }
        let network = NetworkSpec {
            vertices,
            edges: edge_specs,
            source,
            destination,
        };
        load_network(&network)?;
        // ids are now known to be exactly 0..m
        dist_by_id.sort_by_key(|(id, _)| *id);
        let dists: Vec<EdgeDistribution> = dist_by_id.into_iter().map(|(_, d)| d).collect();
        let min_alpha = dists
            .iter()
            .filter_map(|d| match d.tail() {
                crate::cost::Tail::Heavy { alpha } => Some(alpha),
                crate::cost::Tail::Light => None,
            })
            .reduce(f64::min);

        let mut specs = Vec::with_capacity(policies.len());
        for (line, name, params) in &policies {
            let spec = PolicySpec::from_params(name, params).map_err(|e| match e {
                PolicyError::UnknownPolicy(name) => ScenarioError::UnknownPolicy { line: *line, name },
                PolicyError::MissingParam(p) => {
                    ScenarioError::MissingField(format!("policy_params.{p} (policy {name}, line {line})"))
                }
                PolicyError::InvalidParam { name: p, reason } => {
                    ScenarioError::invalid(format!("policy_params.{p}"), reason)
                }
                other => ScenarioError::invalid("policy", other.to_string()),
            })?;
            if let (PolicySpec::DseeHeavy { q, .. }, Some(alpha)) = (&spec, min_alpha) {
                if *q >= alpha {
                    return Err(ScenarioError::invalid(
                        "policy_params.q",
                        format!("must be below the smallest Pareto shape {alpha}"),
                    ));
                }
            }
            if specs.iter().any(|s: &PolicySpec| s.name() == spec.name()) {
                return Err(ScenarioError::invalid(
                    "policy",
                    format!("`{}` listed twice; output files are named by policy", spec.name()),
                ));
            }
            specs.push(spec);
        }

        let seeds = seeds.unwrap_or_default();
        Ok(Scenario {
            network,
            dists,
            horizon,
            policies: specs,
            seeds,
            output: output.unwrap_or_else(|| default_output.to_string()),
            spanner_c: spanner_c.unwrap_or(1.0),
        })
    }

    /// Canonical text form; parsing it yields an equal scenario.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "vertices: {}", self.network.vertices.join(" "));
        let _ = writeln!(s, "source: {}", self.network.source);
        let _ = writeln!(s, "destination: {}", self.network.destination);
        let _ = writeln!(s, "edges:");
        let mut edges: Vec<&EdgeSpec> = self.network.edges.iter().collect();
        edges.sort_by_key(|e| e.id);
        for e in edges {
            let _ = writeln!(
                s,
                "  - id: {}, tail: {}, head: {}, dist: {}",
                e.id, e.tail, e.head, self.dists[e.id]
            );
        }
        let _ = writeln!(s, "horizon: {}", self.horizon);
        match &self.seeds {
            Seeds::Range { base, count } => {
                let _ = writeln!(s, "seeds: base {base} count {count}");
            }
            Seeds::List(v) => {
                let list: Vec<String> = v.iter().map(u64::to_string).collect();
                let _ = writeln!(s, "seeds: {}", list.join(" "));
            }
        }
        let _ = writeln!(s, "output: {}", self.output);
        let _ = writeln!(s, "spanner_c: {}", self.spanner_c);
        for p in &self.policies {
            let _ = writeln!(s, "policy: {}", p.name());
            let params = p.params();
            if !params.is_empty() {
                let _ = writeln!(s, "policy_params:");
                for (k, v) in params {
                    let _ = writeln!(s, "  {k}: {v}");
                }
            }
        }
        s
    }
}

fn parse_seeds(value: &str) -> Result<Seeds, ScenarioError> {
    let words: Vec<&str> = value
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|w| !w.is_empty())
        .collect();
    let seeds = match words.as_slice() {
        ["base", base, "count", count] => Seeds::Range {
            base: parse_u64("seeds", base)?,
            count: parse_u64("seeds", count)?,
        },
        list => Seeds::List(
            list.iter()
                .map(|w| parse_u64("seeds", w))
                .collect::<Result<_, _>>()?,
        ),
    };
    if seeds.is_empty() {
        return Err(ScenarioError::invalid("seeds", "at least one seed is required"));
    }
    Ok(seeds)
}
