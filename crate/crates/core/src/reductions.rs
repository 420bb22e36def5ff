//! Graph gadgets for the hardness reductions, with their closed-form optima.
//!
//! Vertex-cover gadgets take a cubic graph and give every vertex a group of
//! 18 agents: a cycle `v1..v8`, five pendant pairs `w1..w5`/`x1..x5`, and one
//! cross-group second choice on each of `v1`, `v3`, `v5`. Each group is
//! matched either "in the cover" (`v1v2 v3v4 v5v6 v7v8`) or "outside" it
//! (`v2v3 v4v5 v6v7 v8v1`) in every stable matching.
//!
//! The independent-set gadget gives every vertex six agents `v w x y a b`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::criteria::{self, Criterion};
use crate::engine::{SearchConfig, Status};
use crate::model::{AgentId, Instance, Matching};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("vertex {0} out of range")]
    OutOfRange(usize),
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("repeated edge {{{0}, {1}}}")]
    MultiEdge(usize, usize),
    #[error("graph is not cubic: vertex {vertex} has degree {degree}")]
    NotCubic { vertex: usize, degree: usize },
    #[error("graph too large for exhaustive search ({0} vertices)")]
    TooLarge(usize),
    #[error("solver finished with status {0:?}")]
    Solver(Status),
}

/// Undirected graph on vertices `0..n`, edges stored with `u < v`, sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimpleGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

impl SimpleGraph {
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self, ReductionError> {
        let mut adj = vec![Vec::new(); n];
        let mut sorted = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            for x in [u, v] {
                if x >= n {
                    return Err(ReductionError::OutOfRange(x + 1));
                }
            }
            if u == v {
                return Err(ReductionError::SelfLoop(u + 1));
            }
            let e = (u.min(v), u.max(v));
            if sorted.contains(&e) {
                return Err(ReductionError::MultiEdge(e.0 + 1, e.1 + 1));
            }
            sorted.push(e);
            adj[u].push(v);
            adj[v].push(u);
        }
        sorted.sort_unstable();
        for list in &mut adj {
            list.sort_unstable();
        }
        Ok(Self { n, edges: sorted, adj })
    }

    /// Complete graph on `n` vertices.
    pub fn complete(n: usize) -> Self {
        let edges: Vec<_> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        Self::new(n, &edges).expect("complete graphs are simple")
    }

    /// `"n m"` then `m` lines `"u v"` with 1-based vertices; `#` starts a
    /// comment line.
    pub fn parse(text: &str) -> Result<Self, ReductionError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let syntax = |line, message: &str| ReductionError::Syntax {
            line,
            message: message.to_string(),
        };
        let pair = |line: usize, s: &str| -> Result<(usize, usize), ReductionError> {
            let nums: Vec<usize> = s
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| syntax(line, "expected a non-negative integer")))
                .collect::<Result<_, _>>()?;
            match nums[..] {
                [a, b] => Ok((a, b)),
                _ => Err(syntax(line, "expected two integers")),
            }
        };
        let (line, header) = lines.next().ok_or_else(|| syntax(1, "missing header"))?;
        let (n, m) = pair(line, header)?;
        let mut edges = Vec::with_capacity(m);
        for _ in 0..m {
            let (line, text) = lines.next().ok_or_else(|| syntax(line, "fewer edges than declared"))?;
            let (u, v) = pair(line, text)?;
            if u == 0 || v == 0 {
                return Err(ReductionError::OutOfRange(0));
            }
            edges.push((u - 1, v - 1));
        }
        if let Some((line, _)) = lines.next() {
            return Err(syntax(line, "more edges than declared"));
        }
        Self::new(n, &edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbours(&self, u: usize) -> &[usize] {
        &self.adj[u]
    }

    pub fn check_cubic(&self) -> Result<(), ReductionError> {
        match self.adj.iter().position(|a| a.len() != 3) {
            Some(u) => Err(ReductionError::NotCubic {
                vertex: u + 1,
                degree: self.adj[u].len(),
            }),
            None => Ok(()),
        }
    }

    fn covers(&self, set: u32) -> bool {
        self.edges.iter().all(|&(u, v)| set >> u & 1 == 1 || set >> v & 1 == 1)
    }

    fn check_small(&self) -> Result<(), ReductionError> {
        if self.n > 20 {
            return Err(ReductionError::TooLarge(self.n));
        }
        Ok(())
    }

    /// Size of a minimum vertex cover, by trying every vertex subset.
    pub fn min_vertex_cover(&self) -> Result<usize, ReductionError> {
        self.check_small()?;
        Ok((0u32..1 << self.n)
            .filter(|&s| self.covers(s))
            .map(|s| s.count_ones() as usize)
            .min()
            .unwrap_or(0))
    }

    /// Size of a maximum independent set, by trying every vertex subset.
    pub fn max_independent_set(&self) -> Result<usize, ReductionError> {
        self.check_small()?;
        Ok((0u32..1 << self.n)
            .filter(|&s| self.is_independent_mask(s))
            .map(|s| s.count_ones() as usize)
            .max()
            .unwrap_or(0))
    }

    fn is_independent_mask(&self, set: u32) -> bool {
        self.edges.iter().all(|&(u, v)| set >> u & 1 == 0 || set >> v & 1 == 0)
    }

    pub fn is_independent(&self, vertices: &[usize]) -> bool {
        self.edges
            .iter()
            .all(|(u, v)| !(vertices.contains(u) && vertices.contains(v)))
    }

    pub fn is_vertex_cover(&self, vertices: &[usize]) -> bool {
        self.edges
            .iter()
            .all(|(u, v)| vertices.contains(u) || vertices.contains(v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GadgetVariant {
    Fc,
    Generous,
    Egalitarian,
    IndependentSet,
}

impl GadgetVariant {
    pub const ALL: [GadgetVariant; 4] = [
        GadgetVariant::Fc,
        GadgetVariant::Generous,
        GadgetVariant::Egalitarian,
        GadgetVariant::IndependentSet,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GadgetVariant::Fc => "fc",
            GadgetVariant::Generous => "generous",
            GadgetVariant::Egalitarian => "egalitarian",
            GadgetVariant::IndependentSet => "independent-set",
        }
    }
}

impl fmt::Display for GadgetVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GadgetVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GadgetVariant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| format!("unknown variant `{s}`"))
    }
}

#[derive(Debug, Clone)]
pub struct GadgetSpec {
    pub variant: GadgetVariant,
    pub graph: SimpleGraph,
}

/// Roles inside one vertex-cover group; indices are 1-based copies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VcRole {
    V(usize),
    W(usize),
    X(usize),
}

pub const VC_GROUP: usize = 18;

/// Agent for `role` in the group of `vertex`: `v1..v8`, then `w1..w5`, then
/// `x1..x5`.
pub fn vc_agent(vertex: usize, role: VcRole) -> AgentId {
    let offset = match role {
        VcRole::V(j) => j - 1,
        VcRole::W(j) => 7 + j,
        VcRole::X(j) => 12 + j,
    };
    AgentId(vertex * VC_GROUP + offset)
}

/// Inverse of [`vc_agent`].
pub fn vc_role(a: AgentId) -> (usize, VcRole) {
    let (vertex, offset) = (a.0 / VC_GROUP, a.0 % VC_GROUP);
    let role = match offset {
        0..=7 => VcRole::V(offset + 1),
        8..=12 => VcRole::W(offset - 7),
        _ => VcRole::X(offset - 12),
    };
    (vertex, role)
}

pub fn build_vc_gadget(g: &SimpleGraph, variant: GadgetVariant) -> Result<Instance, ReductionError> {
    assert!(variant != GadgetVariant::IndependentSet, "use build_is_gadget");
    g.check_cubic()?;
    use VcRole::{V, W, X};

    // cross[u][s]: partner of v^(2s+1)_u; copies are handed out 1, 3, 5 in
    // sorted edge order.
    let mut cross = vec![[AgentId(0); 3]; g.n()];
    let mut next = vec![0usize; g.n()];
    for &(u, v) in g.edges() {
        let (su, sv) = (next[u], next[v]);
        next[u] += 1;
        next[v] += 1;
        cross[u][su] = vc_agent(v, V(2 * sv + 1));
        cross[v][sv] = vc_agent(u, V(2 * su + 1));
    }

    let mut prefs = Vec::with_capacity(g.n() * VC_GROUP);
    for (u, cross) in cross.iter().enumerate() {
        let a = |r| vc_agent(u, r);
        prefs.push(vec![a(V(2)), cross[0], a(V(8))]);
        prefs.push(vec![a(V(3)), a(W(1)), a(V(1))]);
        prefs.push(vec![a(V(4)), cross[1], a(V(2))]);
        prefs.push(vec![a(V(5)), a(W(2)), a(V(3))]);
        prefs.push(vec![a(V(6)), cross[2], a(V(4))]);
        prefs.push(vec![a(V(7)), a(W(3)), a(V(5))]);
        prefs.push(match variant {
            GadgetVariant::Generous => vec![a(V(8)), a(V(6)), a(W(4))],
            _ => vec![a(W(4)), a(V(8)), a(V(6))],
        });
        prefs.push(vec![a(V(1)), a(W(5)), a(V(7))]);
        for (j, v) in [2, 4, 6, 7, 8].into_iter().enumerate() {
            prefs.push(vec![a(X(j + 1)), a(V(v))]);
        }
        for j in 1..=5 {
            prefs.push(vec![a(W(j))]);
        }
    }
    Ok(Instance::new(prefs).expect("gadget lists are mutual"))
}

/// How a vertex-cover group is matched.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VcCase {
    /// `v1v2 v3v4 v5v6 v7v8`: the vertex is in the cover.
    InCover,
    /// `v2v3 v4v5 v6v7 v8v1`: the vertex is outside the cover.
    OutOfCover,
}

/// The case realized by `vertex`'s group in `m`, if either.
pub fn classify_vc_group(m: &Matching, vertex: usize) -> Option<VcCase> {
    let v = |j| vc_agent(vertex, VcRole::V(j));
    let all = |pairs: [(usize, usize); 4]| pairs.iter().all(|&(a, b)| m.contains_pair(v(a), v(b)));
    if all([(1, 2), (3, 4), (5, 6), (7, 8)]) {
        Some(VcCase::InCover)
    } else if all([(2, 3), (4, 5), (6, 7), (8, 1)]) {
        Some(VcCase::OutOfCover)
    } else {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IsRole {
    V,
    W,
    X,
    Y,
    A,
    B,
}

/// Agent for `role` of `vertex` in an `n`-vertex independent-set gadget;
/// roles are laid out in blocks of `n`.
pub fn is_agent(n: usize, vertex: usize, role: IsRole) -> AgentId {
    AgentId(role as usize * n + vertex)
}

pub fn build_is_gadget(g: &SimpleGraph) -> Instance {
    use IsRole::*;
    let n = g.n();
    let a = |u, r| is_agent(n, u, r);
    let mut prefs = vec![Vec::new(); 6 * n];
    for u in 0..n {
        let mut v_list = vec![a(u, A), a(u, W)];
        v_list.extend(g.neighbours(u).iter().map(|&w| a(w, V)));
        v_list.push(a(u, Y));
        prefs[a(u, V).0] = v_list;
        prefs[a(u, W).0] = vec![a(u, X), a(u, V), a(u, A), a(u, B)];
        prefs[a(u, X).0] = vec![a(u, A), a(u, Y), a(u, W)];
        prefs[a(u, Y).0] = vec![a(u, A), a(u, V), a(u, X)];
        prefs[a(u, A).0] = vec![a(u, W), a(u, B), a(u, V), a(u, X), a(u, Y)];
        prefs[a(u, B).0] = vec![a(u, W), a(u, A)];
    }
    Instance::new(prefs).expect("gadget lists are mutual")
}

/// Vertices whose group takes `{v, y}` and `{w, x}` (one first choice).
pub fn is_selected_vertices(n: usize, m: &Matching) -> Vec<usize> {
    (0..n)
        .filter(|&u| m.contains_pair(is_agent(n, u, IsRole::V), is_agent(n, u, IsRole::Y)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GadgetPrediction {
    pub variant: GadgetVariant,
    pub n: usize,
    /// Minimum vertex cover, or maximum independent set.
    pub k: usize,
    pub value: u64,
}

impl GadgetPrediction {
    pub fn new(variant: GadgetVariant, n: usize, k: usize) -> Self {
        let (n64, k64) = (n as u64, k as u64);
        let value = match variant {
            GadgetVariant::Fc => 14 * n64 - k64,
            GadgetVariant::Generous => 3 * n64 + k64,
            GadgetVariant::Egalitarian => 26 * n64 + k64,
            GadgetVariant::IndependentSet => k64,
        };
        Self { variant, n, k, value }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyReport {
    pub prediction: GadgetPrediction,
    pub actual: u64,
}

impl VerifyReport {
    pub fn holds(&self) -> bool {
        self.prediction.value == self.actual
    }
}

/// Builds the gadget, solves it, and compares with the closed form at the
/// graph's exact parameter.
pub fn predict_and_verify(spec: &GadgetSpec, cfg: &SearchConfig) -> Result<VerifyReport, ReductionError> {
    let g = &spec.graph;
    let (inst, k) = match spec.variant {
        GadgetVariant::IndependentSet => (build_is_gadget(g), g.max_independent_set()?),
        v => (build_vc_gadget(g, v)?, g.min_vertex_cover()?),
    };
    let criterion = match spec.variant {
        GadgetVariant::Fc | GadgetVariant::IndependentSet => Criterion::FcMax,
        GadgetVariant::Generous => Criterion::Generous,
        GadgetVariant::Egalitarian => Criterion::Egalitarian,
    };
    let r = criteria::solve_criterion(&inst, criterion, cfg);
    if r.status() != Status::Optimal {
        return Err(ReductionError::Solver(r.status()));
    }
    let actual = match spec.variant {
        GadgetVariant::Generous => r.profile.as_ref().expect("optimal").level(3) as u64,
        _ => r.outcome.objective_value.expect("optimal") as u64,
    };
    Ok(VerifyReport {
        prediction: GadgetPrediction::new(spec.variant, g.n(), k),
        actual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::is_stable;
    use crate::oracle;

    fn k4() -> SimpleGraph {
        SimpleGraph::complete(4)
    }

    #[test]
    fn graph_parsing() {
        let g = SimpleGraph::parse("# triangle\n3 3\n1 2\n2 3\n3 1\n").unwrap();
        assert_eq!(g.edges(), &[(0, 1), (0, 2), (1, 2)]);
        assert_eq!(g.neighbours(2), &[0, 1]);
        assert!(matches!(SimpleGraph::parse("2 1\n1 1\n"), Err(ReductionError::SelfLoop(1))));
        assert!(matches!(SimpleGraph::parse("2 2\n1 2\n2 1\n"), Err(ReductionError::MultiEdge(1, 2))));
        assert!(matches!(SimpleGraph::parse("2 1\n1 3\n"), Err(ReductionError::OutOfRange(3))));
        assert!(matches!(SimpleGraph::parse("2 2\n1 2\n"), Err(ReductionError::Syntax { .. })));
        assert!(matches!(SimpleGraph::parse("2 x\n"), Err(ReductionError::Syntax { line: 1, .. })));
    }

    #[test]
    fn brute_force_parameters() {
        assert_eq!(k4().min_vertex_cover().unwrap(), 3);
        assert_eq!(k4().max_independent_set().unwrap(), 1);
        let path = SimpleGraph::new(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(path.min_vertex_cover().unwrap(), 1);
        assert_eq!(path.max_independent_set().unwrap(), 2);
    }

    #[test]
    fn vc_gadget_structure() {
        let inst = build_vc_gadget(&k4(), GadgetVariant::Fc).unwrap();
        assert_eq!(inst.n(), 72);
        assert!(inst.max_list_len() <= 3);
        for u in 0..4 {
            for j in [1, 3, 5] {
                let a = vc_agent(u, VcRole::V(j));
                let outside: Vec<_> = inst.prefs(a).iter().filter(|b| vc_role(**b).0 != u).collect();
                assert_eq!(outside.len(), 1);
                assert_eq!(inst.rank_of(a, *outside[0]), Some(2));
                assert_eq!(inst.rank_of(*outside[0], a), Some(2));
            }
        }
        for a in inst.agents() {
            assert_eq!(vc_agent(vc_role(a).0, vc_role(a).1), a);
        }
        let path = SimpleGraph::new(3, &[(0, 1), (1, 2)]).unwrap();
        assert!(matches!(
            build_vc_gadget(&path, GadgetVariant::Fc),
            Err(ReductionError::NotCubic { vertex: 1, degree: 1 })
        ));
    }

    #[test]
    fn vc_stable_matchings_are_covers() {
        let g = k4();
        for variant in [GadgetVariant::Fc, GadgetVariant::Generous] {
            let inst = build_vc_gadget(&g, variant).unwrap();
            let set = oracle::enumerate_stable(&inst).unwrap();
            // one stable matching per vertex cover of K4: the four triples and V
            assert_eq!(set.len(), 5);
            for m in &set.matchings {
                assert_eq!(m.size(), 36);
                let mut cover = Vec::new();
                for u in 0..4 {
                    for j in 1..=5 {
                        assert!(m.contains_pair(vc_agent(u, VcRole::W(j)), vc_agent(u, VcRole::X(j))));
                    }
                    match classify_vc_group(m, u).expect("every group is in one of the two cases") {
                        VcCase::InCover => cover.push(u),
                        VcCase::OutOfCover => {}
                    }
                }
                assert!(g.is_vertex_cover(&cover));
            }
        }
    }

    #[test]
    fn is_gadget_structure() {
        let edge = SimpleGraph::new(2, &[(0, 1)]).unwrap();
        let inst = build_is_gadget(&edge);
        assert_eq!(inst.n(), 12);
        let a = |u, r| is_agent(2, u, r);
        assert_eq!(inst.prefs(a(0, IsRole::V)), &[a(0, IsRole::A), a(0, IsRole::W), a(1, IsRole::V), a(0, IsRole::Y)]);
        let lone = build_is_gadget(&SimpleGraph::new(1, &[]).unwrap());
        assert_eq!(lone.list_len(AgentId(0)), 3);
        let tri = build_is_gadget(&SimpleGraph::complete(3));
        for u in 0..3 {
            assert_eq!(tri.list_len(is_agent(3, u, IsRole::V)), 5);
        }
    }

    #[test]
    fn is_stable_matchings_select_independent_sets() {
        for g in [SimpleGraph::new(2, &[(0, 1)]).unwrap(), SimpleGraph::complete(3), SimpleGraph::new(4, &[(0, 1), (1, 2), (2, 3)]).unwrap()] {
            let inst = build_is_gadget(&g);
            let set = oracle::enumerate_stable(&inst).unwrap();
            assert!(!set.is_empty());
            for m in &set.matchings {
                assert_eq!(m.size() * 2, inst.n());
                assert!(is_stable(&inst, m));
                assert!(g.is_independent(&is_selected_vertices(g.n(), m)));
            }
        }
    }

    #[test]
    fn predictions_on_small_graphs() {
        let cfg = SearchConfig::default();
        for g in [SimpleGraph::new(2, &[(0, 1)]).unwrap(), SimpleGraph::complete(3)] {
            let spec = GadgetSpec {
                variant: GadgetVariant::IndependentSet,
                graph: g,
            };
            let r = predict_and_verify(&spec, &cfg).unwrap();
            assert_eq!(r.actual, 1);
            assert!(r.holds());
        }
    }

    #[test]
    fn variant_names() {
        for v in GadgetVariant::ALL {
            assert_eq!(v.name().parse::<GadgetVariant>().unwrap(), v);
        }
    }
}
