//! Routing network model: validated multigraphs, simple-path enumeration and
//! the 0/1 incidence embedding of paths.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::rank::IntegerEchelon;

/// Default cap on the number of enumerated simple paths.
pub const DEFAULT_PATH_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("duplicate edge id {0}")]
    DuplicateEdgeId(usize),
    #[error("edge ids must be 0..{m} without gaps; id {missing} is missing")]
    NonContiguousEdgeIds { m: usize, missing: usize },
    #[error("duplicate vertex `{0}`")]
    DuplicateVertex(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("source and destination are both `{0}`")]
    SourceIsDestination(String),
    #[error("no path from `{source_vertex}` to `{destination}`")]
    NoPathExists {
        source_vertex: String,
        destination: String,
    },
    #[error("edge {0} lies on no simple source-destination path")]
    EdgeOffAllPaths(usize),
    #[error("more than {cap} simple paths")]
    PathExplosion { cap: usize },
    #[error("expected a vector of length {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("incidence rank overflowed exact integer arithmetic")]
    RankOverflow,
}

/// One edge of a network description, referring to vertices by name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeSpec {
    pub id: usize,
    pub tail: String,
    pub head: String,
}

/// Unvalidated network description as it appears in a scenario file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkSpec {
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeSpec>,
    pub source: String,
    pub destination: String,
}

impl NetworkSpec {
    /// Convenience constructor taking `(id, tail, head)` triples.
    pub fn new(
        vertices: &[&str],
        edges: &[(usize, &str, &str)],
        source: &str,
        destination: &str,
    ) -> Self {
        Self {
            vertices: vertices.iter().map(|v| v.to_string()).collect(),
            edges: edges
                .iter()
                .map(|&(id, tail, head)| EdgeSpec {
                    id,
                    tail: tail.to_string(),
                    head: head.to_string(),
                })
                .collect(),
            source: source.to_string(),
            destination: destination.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub id: usize,
    /// Index into [`NetworkInstance::vertices`].
    pub tail: usize,
    pub head: usize,
}

/// A validated network. Every edge lies on at least one simple
/// source-destination path; vertices on no such path have been dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkInstance {
    vertices: Vec<String>,
    edges: Vec<Edge>,
    source: usize,
    destination: usize,
}

impl NetworkInstance {
    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn source(&self) -> &str {
        &self.vertices[self.source]
    }

    pub fn destination(&self) -> &str {
        &self.vertices[self.destination]
    }

    /// Number of edges `m`.
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Number of retained vertices `n`.
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Whether the directed graph has no cycle.
    pub fn is_acyclic(&self) -> bool {
        let n = self.vertices.len();
        let mut indegree = vec![0usize; n];
        for e in &self.edges {
            indegree[e.head] += 1;
        }
        let mut stack: Vec<usize> = (0..n).filter(|&v| indegree[v] == 0).collect();
        let mut seen = 0;
        while let Some(v) = stack.pop() {
            seen += 1;
            for e in self.edges.iter().filter(|e| e.tail == v) {
                indegree[e.head] -= 1;
                if indegree[e.head] == 0 {
                    stack.push(e.head);
                }
            }
        }
        seen == n
    }
}

/// A simple source-destination path as an incidence vector over edge ids.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PathVector {
    pub id: usize,
    pub bits: Vec<u8>,
    pub edges: Vec<usize>,
}

impl PathVector {
    pub fn to_f64(&self) -> Vec<f64> {
        self.bits.iter().map(|&b| b as f64).collect()
    }

    pub fn hop_count(&self) -> usize {
        self.edges.len()
    }
}

impl fmt::Display for PathVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.edges.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// All simple paths of a network plus the dimension of their span.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSet {
    pub paths: Vec<PathVector>,
    pub dimension: usize,
}

impl PathSet {
    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn vectors(&self) -> Vec<Vec<f64>> {
        self.paths.iter().map(PathVector::to_f64).collect()
    }
}

/// Adjacency over raw vertex indices with out-edges sorted by edge id.
struct Adjacency {
    out: Vec<Vec<(usize, usize)>>, // (edge id, head)
}

impl Adjacency {
    fn new(n: usize, edges: &[Edge]) -> Self {
        let mut out = vec![Vec::new(); n];
        for e in edges {
            out[e.tail].push((e.id, e.head));
        }
        for list in &mut out {
            list.sort_unstable();
        }
        Self { out }
    }
}

/// Depth-first enumeration of simple paths, children visited by ascending
/// edge id. Calls `visit` with each path's edge sequence; stops with
/// `PathExplosion` once more than `cap` paths are found.
fn for_each_simple_path(
    adj: &Adjacency,
    source: usize,
    destination: usize,
    cap: usize,
    mut visit: impl FnMut(&[usize]),
) -> Result<usize, GraphError> {
    let n = adj.out.len();
    let mut on_path = vec![false; n];
    let mut edges: Vec<usize> = Vec::new();
    // Explicit stack of (vertex, next child index) to avoid recursion depth limits.
    let mut stack: Vec<(usize, usize)> = vec![(source, 0)];
    on_path[source] = true;
    let mut count = 0usize;
    while let Some(&mut (v, ref mut next)) = stack.last_mut() {
        if v == destination {
            count += 1;
            if count > cap {
                return Err(GraphError::PathExplosion { cap });
            }
            visit(&edges);
            on_path[v] = false;
            stack.pop();
            edges.pop();
            continue;
        }
        if *next < adj.out[v].len() {
            let (eid, head) = adj.out[v][*next];
            *next += 1;
            if !on_path[head] {
                on_path[head] = true;
                edges.push(eid);
                stack.push((head, 0));
            }
        } else {
            on_path[v] = false;
            stack.pop();
            edges.pop();
        }
    }
    Ok(count)
}

/// Validates a network description.
pub fn load_network(spec: &NetworkSpec) -> Result<NetworkInstance, GraphError> {
    load_network_with_cap(spec, DEFAULT_PATH_CAP)
}

pub fn load_network_with_cap(
    spec: &NetworkSpec,
    cap: usize,
) -> Result<NetworkInstance, GraphError> {
    let mut index: HashMap<&str, usize> = HashMap::new();
    for (i, v) in spec.vertices.iter().enumerate() {
        if index.insert(v.as_str(), i).is_some() {
            return Err(GraphError::DuplicateVertex(v.clone()));
        }
    }
    let lookup = |name: &str| {
        index
            .get(name)
            .copied()
            .ok_or_else(|| GraphError::UnknownVertex(name.to_string()))
    };
    let source = lookup(&spec.source)?;
    let destination = lookup(&spec.destination)?;
    if source == destination {
        return Err(GraphError::SourceIsDestination(spec.source.clone()));
    }

    let m = spec.edges.len();
    let mut slots: Vec<Option<Edge>> = vec![None; m];
    for e in &spec.edges {
        let tail = lookup(&e.tail)?;
        let head = lookup(&e.head)?;
        if e.id >= m {
            // Some id below m must then be missing or duplicated.
            if spec.edges.iter().filter(|o| o.id == e.id).count() > 1 {
                return Err(GraphError::DuplicateEdgeId(e.id));
            }
            let missing = (0..m).find(|id| !spec.edges.iter().any(|o| o.id == *id));
            return Err(GraphError::NonContiguousEdgeIds {
                m,
                missing: missing.unwrap_or(e.id),
            });
        }
        if slots[e.id].is_some() {
            return Err(GraphError::DuplicateEdgeId(e.id));
        }
        slots[e.id] = Some(Edge {
            id: e.id,
            tail,
            head,
        });
    }
    let edges: Vec<Edge> = slots.into_iter().map(|s| s.expect("all ids filled")).collect();

    let adj = Adjacency::new(spec.vertices.len(), &edges);
    let mut edge_used = vec![false; m];
    let mut vertex_used = vec![false; spec.vertices.len()];
    let found = for_each_simple_path(&adj, source, destination, cap, |path| {
        for &eid in path {
            edge_used[eid] = true;
            vertex_used[edges[eid].tail] = true;
            vertex_used[edges[eid].head] = true;
        }
    })?;
    if found == 0 {
        return Err(GraphError::NoPathExists {
            source_vertex: spec.source.clone(),
            destination: spec.destination.clone(),
        });
    }
    if let Some(eid) = edge_used.iter().position(|u| !u) {
        return Err(GraphError::EdgeOffAllPaths(eid));
    }

    let mut remap = vec![usize::MAX; spec.vertices.len()];
    let mut vertices = Vec::new();
    for (i, name) in spec.vertices.iter().enumerate() {
        if vertex_used[i] {
            remap[i] = vertices.len();
            vertices.push(name.clone());
        }
    }
    let edges = edges
        .into_iter()
        .map(|e| Edge {
            id: e.id,
            tail: remap[e.tail],
            head: remap[e.head],
        })
        .collect();
    Ok(NetworkInstance {
        vertices,
        edges,
        source: remap[source],
        destination: remap[destination],
    })
}

/// Enumerates every simple source-destination path in lexicographic order
/// of edge sequence and computes the exact rank of their incidence vectors.
pub fn enumerate_paths(net: &NetworkInstance) -> Result<PathSet, GraphError> {
    enumerate_paths_with_cap(net, DEFAULT_PATH_CAP)
}

pub fn enumerate_paths_with_cap(
    net: &NetworkInstance,
    cap: usize,
) -> Result<PathSet, GraphError> {
    let m = net.edge_count();
    let adj = Adjacency::new(net.vertex_count(), &net.edges);
    let mut paths = Vec::new();
    for_each_simple_path(&adj, net.source, net.destination, cap, |edges| {
        let mut bits = vec![0u8; m];
        for &e in edges {
            bits[e] = 1;
        }
        paths.push(PathVector {
            id: paths.len(),
            bits,
            edges: edges.to_vec(),
        });
    })?;

    let mut ech = IntegerEchelon::new(m);
    let mut row = vec![0i64; m];
    for p in &paths {
        for (r, &b) in row.iter_mut().zip(&p.bits) {
            *r = b as i64;
        }
        ech.insert(&row).map_err(|_| GraphError::RankOverflow)?;
        if ech.rank() == m {
            break;
        }
    }
    Ok(PathSet {
        paths,
        dimension: ech.rank(),
    })
}

/// Total cost of a path under per-edge costs.
pub fn path_cost(path: &PathVector, edge_costs: &[f64]) -> Result<f64, GraphError> {
    if edge_costs.len() != path.bits.len() {
        return Err(GraphError::DimensionMismatch {
            expected: path.bits.len(),
            actual: edge_costs.len(),
        });
    }
    Ok(path.edges.iter().map(|&e| edge_costs[e]).sum())
}

/// Small reference networks used by tests, examples and the acceptance suite.
pub mod catalog {
    use super::NetworkSpec;

    /// Two disjoint two-hop paths: `s→a→r` and `s→b→r`.
    pub fn diamond() -> NetworkSpec {
        NetworkSpec::new(
            &["s", "a", "b", "r"],
            &[(0, "s", "a"), (1, "a", "r"), (2, "s", "b"), (3, "b", "r")],
            "s",
            "r",
        )
    }

    /// Two parallel links into a relay followed by two parallel links out.
    pub fn parallel_serial() -> NetworkSpec {
        NetworkSpec::new(
            &["s", "a", "r"],
            &[(0, "s", "a"), (1, "s", "a"), (2, "a", "r"), (3, "a", "r")],
            "s",
            "r",
        )
    }

    /// Diamond with a bridge `a→b`.
    pub fn wheatstone() -> NetworkSpec {
        NetworkSpec::new(
            &["s", "a", "b", "r"],
            &[
                (0, "s", "a"),
                (1, "s", "b"),
                (2, "a", "b"),
                (3, "a", "r"),
                (4, "b", "r"),
            ],
            "s",
            "r",
        )
    }

    /// `rows × cols` lattice with edges pointing right and down, routed from
    /// the top-left to the bottom-right corner. Horizontal edges get the
    /// lower ids, row by row.
    pub fn grid(rows: usize, cols: usize) -> NetworkSpec {
        assert!(rows >= 1 && cols >= 1 && rows * cols >= 2, "grid too small");
        let name = |r: usize, c: usize| format!("v{r}_{c}");
        let mut vertices = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                vertices.push(name(r, c));
            }
        }
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols.saturating_sub(1) {
                edges.push((name(r, c), name(r, c + 1)));
            }
        }
        for r in 0..rows.saturating_sub(1) {
            for c in 0..cols {
                edges.push((name(r, c), name(r + 1, c)));
            }
        }
        NetworkSpec {
            vertices,
            edges: edges
                .into_iter()
                .enumerate()
                .map(|(id, (tail, head))| super::EdgeSpec { id, tail, head })
                .collect(),
            source: name(0, 0),
            destination: name(rows - 1, cols - 1),
        }
    }
}
