//! Instances, matchings, their text formats, and the random instance
//! generator.
//!
//! Agents are numbered from 1 in files and from 0 in memory. An instance
//! file looks like
//!
//! ```text
//! # comment lines are ignored
//! 3
//! 2 3
//! 1
//! 1
//! ```
//!
//! where line `i + 1` holds agent `i`'s preference list, most preferred
//! first, and an empty line stands for an empty list.

use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Index of an agent inside its instance (0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AgentId(pub usize);

impl AgentId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for AgentId {
    /// Displays the 1-based name used in files and reports.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0 + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("agent {0} lists itself")]
    SelfReference(AgentId),
    #[error("agent {agent} lists {entry} more than once")]
    Duplicate { agent: AgentId, entry: AgentId },
    #[error("asymmetric pair ({0},{1})")]
    Asymmetric(AgentId, AgentId),
    #[error("agent {agent} out of range for an instance of {n} agents")]
    OutOfRange { agent: usize, n: usize },
    #[error("unacceptable pair ({0},{1})")]
    Unacceptable(AgentId, AgentId),
    #[error("agent {0} is matched twice")]
    DoublyMatched(AgentId),
    #[error("matching has {found} agents but the instance has {expected}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("completeness {0} is outside [0, 1]")]
    Completeness(f64),
}

/// How `parse_instance` treats one-sided acceptability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Acceptability {
    /// Reject instances where `b` is on `a`'s list but not vice versa.
    #[default]
    Strict,
    /// Drop one-sided entries. Such an entry can never be matched or block.
    Symmetrize,
}

/// An SRI instance: strictly ordered, possibly incomplete preference lists
/// with mutual acceptability, plus a dense rank table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    prefs: Vec<Vec<AgentId>>,
    // ranks[a * n + b] = rank(a, b), 0 when b is unacceptable to a.
    ranks: Vec<u32>,
    max_list_len: usize,
}

impl Instance {
    /// Builds a validated instance from 0-based preference lists.
    pub fn new(prefs: Vec<Vec<AgentId>>) -> Result<Self, ModelError> {
        Self::build(prefs, Acceptability::Strict)
    }

    /// Like [`Instance::new`] but silently removes one-sided entries.
    pub fn symmetrized(prefs: Vec<Vec<AgentId>>) -> Result<Self, ModelError> {
        Self::build(prefs, Acceptability::Symmetrize)
    }

    /// Convenience constructor from 1-based lists, as written in the text
    /// format. Panics on invalid input; meant for fixtures and tests.
    pub fn from_one_based(lists: &[&[usize]]) -> Self {
        let prefs = lists
            .iter()
            .map(|l| l.iter().map(|&b| AgentId(b - 1)).collect())
            .collect();
        Self::new(prefs).expect("invalid fixture instance")
    }

    fn build(mut prefs: Vec<Vec<AgentId>>, mode: Acceptability) -> Result<Self, ModelError> {
        let n = prefs.len();
        let mut ranks = vec![0u32; n * n];
        for (a, list) in prefs.iter().enumerate() {
            for (pos, &b) in list.iter().enumerate() {
                if b.0 >= n {
                    return Err(ModelError::OutOfRange { agent: b.0 + 1, n });
                }
                if b.0 == a {
                    return Err(ModelError::SelfReference(AgentId(a)));
                }
                if ranks[a * n + b.0] != 0 {
                    return Err(ModelError::Duplicate {
                        agent: AgentId(a),
                        entry: b,
                    });
                }
                ranks[a * n + b.0] = pos as u32 + 1;
            }
        }
        let mut one_sided = Vec::new();
        for a in 0..n {
            for &b in &prefs[a] {
                if ranks[b.0 * n + a] == 0 {
                    match mode {
                        Acceptability::Strict => {
                            return Err(ModelError::Asymmetric(AgentId(a), b));
                        }
                        Acceptability::Symmetrize => one_sided.push((a, b.0)),
                    }
                }
            }
        }
        if !one_sided.is_empty() {
            for &(a, b) in &one_sided {
                ranks[a * n + b] = 0;
            }
            for (a, list) in prefs.iter_mut().enumerate() {
                list.retain(|b| ranks[a * n + b.0] != 0);
                for (pos, &b) in list.iter().enumerate() {
                    ranks[a * n + b.0] = pos as u32 + 1;
                }
            }
        }
        let max_list_len = prefs.iter().map(Vec::len).max().unwrap_or(0);
        Ok(Self {
            prefs,
            ranks,
            max_list_len,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.prefs.len()
    }

    /// `L`, the length of the longest preference list.
    #[inline]
    pub fn max_list_len(&self) -> usize {
        self.max_list_len
    }

    #[inline]
    pub fn prefs(&self, a: AgentId) -> &[AgentId] {
        &self.prefs[a.0]
    }

    pub fn all_prefs(&self) -> &[Vec<AgentId>] {
        &self.prefs
    }

    #[inline]
    pub fn list_len(&self, a: AgentId) -> usize {
        self.prefs[a.0].len()
    }

    /// `rank(a, b)` if `b` is acceptable to `a`.
    #[inline]
    pub fn rank_of(&self, a: AgentId, b: AgentId) -> Option<u32> {
        match self.ranks[a.0 * self.n() + b.0] {
            0 => None,
            r => Some(r),
        }
    }

    /// 1 plus the number of agents `a` prefers to `b`.
    pub fn rank(&self, a: AgentId, b: AgentId) -> Result<u32, ModelError> {
        if a.0 >= self.n() || b.0 >= self.n() {
            return Err(ModelError::OutOfRange {
                agent: a.0.max(b.0) + 1,
                n: self.n(),
            });
        }
        self.rank_of(a, b).ok_or(ModelError::Unacceptable(a, b))
    }

    #[inline]
    pub fn is_acceptable(&self, a: AgentId, b: AgentId) -> bool {
        self.ranks[a.0 * self.n() + b.0] != 0
    }

    /// The agent at 1-based position `rank` of `a`'s list.
    #[inline]
    pub fn choice(&self, a: AgentId, rank: u32) -> Option<AgentId> {
        rank.checked_sub(1)
            .and_then(|i| self.prefs[a.0].get(i as usize).copied())
    }

    /// Acceptable pairs `(a, b)` with `a < b`, in lexicographic order.
    pub fn edges(&self) -> Vec<(AgentId, AgentId)> {
        let mut out = Vec::new();
        for a in 0..self.n() {
            let mut row: Vec<AgentId> = self.prefs[a].iter().copied().filter(|b| b.0 > a).collect();
            row.sort_unstable();
            out.extend(row.into_iter().map(|b| (AgentId(a), b)));
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.prefs.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn agents(&self) -> impl Iterator<Item = AgentId> {
        (0..self.n()).map(AgentId)
    }

    /// A copy with every pair in `removed` made mutually unacceptable.
    pub fn without_pairs(&self, removed: &[(AgentId, AgentId)]) -> Instance {
        let n = self.n();
        let mut drop = vec![false; n * n];
        for &(a, b) in removed {
            drop[a.0 * n + b.0] = true;
            drop[b.0 * n + a.0] = true;
        }
        let prefs = self
            .prefs
            .iter()
            .enumerate()
            .map(|(a, l)| l.iter().copied().filter(|b| !drop[a * n + b.0]).collect())
            .collect();
        Instance::new(prefs).expect("pair removal preserves validity")
    }

    /// A copy keeping only the pairs for which `keep` holds.
    pub fn filtered(&self, mut keep: impl FnMut(AgentId, AgentId) -> bool) -> Instance {
        let n = self.n();
        let mut kept = vec![false; n * n];
        for (a, b) in self.edges() {
            let k = keep(a, b);
            kept[a.0 * n + b.0] = k;
            kept[b.0 * n + a.0] = k;
        }
        let prefs = self
            .prefs
            .iter()
            .enumerate()
            .map(|(a, l)| l.iter().copied().filter(|b| kept[a * n + b.0]).collect())
            .collect();
        Instance::new(prefs).expect("pair removal preserves validity")
    }
}

/// A symmetric partial pairing of agents.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Matching {
    partner: Vec<Option<AgentId>>,
}

impl Matching {
    pub fn empty(n: usize) -> Self {
        Self {
            partner: vec![None; n],
        }
    }

    /// Builds a matching over `n` agents from unordered pairs.
    pub fn from_pairs(
        n: usize,
        pairs: impl IntoIterator<Item = (AgentId, AgentId)>,
    ) -> Result<Self, ModelError> {
        let mut m = Self::empty(n);
        for (a, b) in pairs {
            for x in [a, b] {
                if x.0 >= n {
                    return Err(ModelError::OutOfRange { agent: x.0 + 1, n });
                }
            }
            if a == b {
                return Err(ModelError::SelfReference(a));
            }
            for x in [a, b] {
                if m.partner[x.0].is_some() {
                    return Err(ModelError::DoublyMatched(x));
                }
            }
            m.partner[a.0] = Some(b);
            m.partner[b.0] = Some(a);
        }
        Ok(m)
    }

    /// Fixture helper taking 1-based pairs. Panics on invalid input.
    pub fn from_one_based(n: usize, pairs: &[(usize, usize)]) -> Self {
        Self::from_pairs(n, pairs.iter().map(|&(a, b)| (AgentId(a - 1), AgentId(b - 1))))
            .expect("invalid fixture matching")
    }

    pub(crate) fn from_partner_unchecked(partner: Vec<Option<AgentId>>) -> Self {
        debug_assert!(partner
            .iter()
            .enumerate()
            .all(|(a, p)| p.is_none_or(|b| partner[b.0] == Some(AgentId(a)))));
        Self { partner }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.partner.len()
    }

    #[inline]
    pub fn partner(&self, a: AgentId) -> Option<AgentId> {
        self.partner[a.0]
    }

    #[inline]
    pub fn is_matched(&self, a: AgentId) -> bool {
        self.partner[a.0].is_some()
    }

    pub fn contains_pair(&self, a: AgentId, b: AgentId) -> bool {
        self.partner[a.0] == Some(b)
    }

    /// Matched pairs `(a, b)` with `a < b`, sorted.
    pub fn pairs(&self) -> Vec<(AgentId, AgentId)> {
        self.partner
            .iter()
            .enumerate()
            .filter_map(|(a, p)| p.filter(|b| b.0 > a).map(|b| (AgentId(a), b)))
            .collect()
    }

    pub fn size(&self) -> usize {
        self.partner.iter().filter(|p| p.is_some()).count() / 2
    }

    /// Removes the pair containing `a`, if any.
    pub fn unmatch(&mut self, a: AgentId) {
        if let Some(b) = self.partner[a.0].take() {
            self.partner[b.0] = None;
        }
    }

    /// Checks that the matching fits `inst`: same size and every pair acceptable.
    pub fn validate(&self, inst: &Instance) -> Result<(), ModelError> {
        if self.n() != inst.n() {
            return Err(ModelError::SizeMismatch {
                expected: inst.n(),
                found: self.n(),
            });
        }
        for (a, b) in self.pairs() {
            if !inst.is_acceptable(a, b) {
                return Err(ModelError::Unacceptable(a, b));
            }
        }
        Ok(())
    }
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> ModelError {
    ModelError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

/// Splits a line into (1-based column, token) pairs.
fn tokens(line: &str) -> impl Iterator<Item = (usize, &str)> {
    line.split_whitespace().map(move |tok| {
        let offset = tok.as_ptr() as usize - line.as_ptr() as usize;
        (offset + 1, tok)
    })
}

fn parse_agent(tok: &str, line: usize, column: usize) -> Result<usize, ModelError> {
    match tok.parse::<usize>() {
        Ok(v) if v >= 1 => Ok(v),
        Ok(_) => Err(syntax(line, column, "agent indices start at 1")),
        Err(_) => Err(syntax(line, column, format!("expected an agent index, found `{tok}`"))),
    }
}

/// Parses an instance in strict mode.
pub fn parse_instance(text: &str) -> Result<Instance, ModelError> {
    parse_instance_with(text, Acceptability::Strict)
}

pub fn parse_instance_with(text: &str, mode: Acceptability) -> Result<Instance, ModelError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim_start().starts_with('#'));

    let n = loop {
        match lines.next() {
            None => return Err(syntax(1, 1, "missing agent count")),
            Some((_, l)) if l.trim().is_empty() => continue,
            Some((no, l)) => {
                let mut toks = tokens(l);
                let (col, tok) = toks.next().expect("non-empty line");
                let n: usize = tok
                    .parse()
                    .map_err(|_| syntax(no, col, format!("expected agent count, found `{tok}`")))?;
                if let Some((col, _)) = toks.next() {
                    return Err(syntax(no, col, "trailing tokens after agent count"));
                }
                break n;
            }
        }
    };

    let mut prefs = Vec::with_capacity(n);
    for (no, l) in lines.by_ref() {
        if prefs.len() == n {
            if l.trim().is_empty() {
                continue;
            }
            return Err(syntax(no, 1, format!("more than {n} preference lists")));
        }
        let mut list = Vec::new();
        for (col, tok) in tokens(l) {
            let v = parse_agent(tok, no, col)?;
            if v > n {
                return Err(syntax(no, col, format!("agent {v} exceeds n = {n}")));
            }
            list.push(AgentId(v - 1));
        }
        prefs.push(list);
    }
    // Missing trailing lines are empty lists.
    prefs.resize(n, Vec::new());
    Instance::build(prefs, mode)
}

/// Writes the instance format read by [`parse_instance`].
pub fn serialize_instance(inst: &Instance) -> String {
    let mut out = format!("{}\n", inst.n());
    for list in inst.all_prefs() {
        let line: Vec<String> = list.iter().map(ToString::to_string).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

/// Parses "i j" lines (1-based) into a matching over `n` agents.
pub fn parse_matching(text: &str, n: usize) -> Result<Matching, ModelError> {
    let mut pairs = Vec::new();
    for (i, l) in text.lines().enumerate() {
        let no = i + 1;
        if l.trim_start().starts_with('#') || l.trim().is_empty() {
            continue;
        }
        let toks: Vec<(usize, &str)> = tokens(l).collect();
        if toks.len() != 2 {
            return Err(syntax(no, 1, "expected exactly two agent indices"));
        }
        let a = parse_agent(toks[0].1, no, toks[0].0)?;
        let b = parse_agent(toks[1].1, no, toks[1].0)?;
        pairs.push((AgentId(a - 1), AgentId(b - 1)));
    }
    Matching::from_pairs(n, pairs)
}

/// One "i j" line per pair, 1-based, `i < j`, sorted ascending.
pub fn serialize_matching(m: &Matching) -> String {
    m.pairs()
        .into_iter()
        .map(|(a, b)| format!("{a} {b}\n"))
        .collect()
}

/// Parameters of the random instance generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomSpec {
    pub n: usize,
    pub completeness: f64,
    pub seed: u64,
}

impl RandomSpec {
    pub fn new(n: usize, completeness: f64, seed: u64) -> Result<Self, ModelError> {
        if !(0.0..=1.0).contains(&completeness) {
            return Err(ModelError::Completeness(completeness));
        }
        Ok(Self {
            n,
            completeness,
            seed,
        })
    }
}

/// Flips one coin per unordered pair, then orders each list by a uniform
/// random permutation. Deterministic for a fixed spec.
pub fn generate_random(spec: &RandomSpec) -> Instance {
    let p = spec.completeness.clamp(0.0, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut prefs: Vec<Vec<AgentId>> = vec![Vec::new(); spec.n];
    for a in 0..spec.n {
        for b in a + 1..spec.n {
            if rng.gen_bool(p) {
                prefs[a].push(AgentId(b));
                prefs[b].push(AgentId(a));
            }
        }
    }
    for list in &mut prefs {
        list.shuffle(&mut rng);
    }
    Instance::new(prefs).expect("generator output is mutually acceptable")
}

#[cfg(test)]
mod tests {
    use super::*;

    const NO_STABLE_FOUR: &str = "# no stable matching\n4\n2 3 4\n3 1 4\n1 2 4\n1 2 3\n";

    #[test]
    fn parses_no_stable_four() {
        let inst = parse_instance(NO_STABLE_FOUR).unwrap();
        assert_eq!(inst.n(), 4);
        assert!(inst.all_prefs().iter().all(|l| l.len() == 3));
        assert_eq!(inst.max_list_len(), 3);
        assert_eq!(inst.rank(AgentId(1), AgentId(0)).unwrap(), 2);
    }

    #[test]
    fn single_agent_empty_list() {
        let inst = parse_instance("1\n\n").unwrap();
        assert_eq!(inst.n(), 1);
        assert_eq!(inst.max_list_len(), 0);
        assert_eq!(parse_instance("1\n").unwrap(), inst);
    }

    #[test]
    fn asymmetric_rejected_in_strict_mode() {
        let err = parse_instance("2\n2\n\n").unwrap_err();
        assert_eq!(err, ModelError::Asymmetric(AgentId(0), AgentId(1)));
        assert_eq!(err.to_string(), "asymmetric pair (1,2)");
        let sym = parse_instance_with("2\n2\n\n", Acceptability::Symmetrize).unwrap();
        assert_eq!(sym.edge_count(), 0);
    }

    #[test]
    fn symmetrize_recomputes_ranks() {
        let sym = parse_instance_with("3\n3 2\n1\n\n", Acceptability::Symmetrize).unwrap();
        assert_eq!(sym.prefs(AgentId(0)), &[AgentId(1)]);
        assert_eq!(sym.rank(AgentId(0), AgentId(1)).unwrap(), 1);
    }

    #[test]
    fn validation_errors() {
        assert_eq!(
            parse_instance("2\n1\n\n").unwrap_err(),
            ModelError::SelfReference(AgentId(0))
        );
        assert_eq!(
            parse_instance("3\n2 2\n1\n\n").unwrap_err(),
            ModelError::Duplicate {
                agent: AgentId(0),
                entry: AgentId(1)
            }
        );
    }

    #[test]
    fn syntax_errors_carry_position() {
        match parse_instance("2\n2 x\n1\n").unwrap_err() {
            ModelError::Syntax { line, column, .. } => assert_eq!((line, column), (2, 3)),
            e => panic!("unexpected {e}"),
        }
        match parse_instance("2\n3\n1\n").unwrap_err() {
            ModelError::Syntax { line, column, .. } => assert_eq!((line, column), (2, 1)),
            e => panic!("unexpected {e}"),
        }
        assert!(matches!(
            parse_instance("1\n\n2\n").unwrap_err(),
            ModelError::Syntax { line: 3, .. }
        ));
        assert!(matches!(parse_instance("").unwrap_err(), ModelError::Syntax { .. }));
    }

    #[test]
    fn rank_follows_list_position() {
        // a3 with list [a1, a2]
        let inst = Instance::from_one_based(&[&[3], &[3], &[1, 2]]);
        assert_eq!(inst.rank(AgentId(2), AgentId(0)).unwrap(), 1);
        assert_eq!(inst.rank(AgentId(2), AgentId(1)).unwrap(), 2);
        assert_eq!(
            inst.rank(AgentId(2), AgentId(2)).unwrap_err(),
            ModelError::Unacceptable(AgentId(2), AgentId(2))
        );
    }

    #[test]
    fn round_trip_no_stable_four() {
        let inst = parse_instance(NO_STABLE_FOUR).unwrap();
        assert_eq!(parse_instance(&serialize_instance(&inst)).unwrap(), inst);
    }

    #[test]
    fn matching_serialization() {
        assert_eq!(serialize_matching(&Matching::empty(4)), "");
        let m = Matching::from_one_based(10, &[(1, 4), (2, 9), (3, 6), (5, 7), (8, 10)]);
        assert_eq!(serialize_matching(&m), "1 4\n2 9\n3 6\n5 7\n8 10\n");
        let unsorted = "# unsorted\n10 8\n7 5\n1 4\n9 2\n3 6\n";
        assert_eq!(parse_matching(unsorted, 10).unwrap(), m);
        assert!(matches!(
            parse_matching("1 2\n2 3\n", 3).unwrap_err(),
            ModelError::DoublyMatched(_)
        ));
    }

    #[test]
    fn generator_extremes() {
        let full = generate_random(&RandomSpec::new(20, 1.0, 3).unwrap());
        assert!(full.all_prefs().iter().all(|l| l.len() == 19));
        let none = generate_random(&RandomSpec::new(20, 0.0, 3).unwrap());
        assert!(none.all_prefs().iter().all(Vec::is_empty));
        assert!(RandomSpec::new(5, 1.5, 0).is_err());
    }

    #[test]
    fn generator_is_deterministic() {
        let spec = RandomSpec::new(40, 0.5, 7).unwrap();
        assert_eq!(
            serialize_instance(&generate_random(&spec)),
            serialize_instance(&generate_random(&spec))
        );
        let other = RandomSpec::new(40, 0.5, 8).unwrap();
        assert_ne!(generate_random(&spec), generate_random(&other));
    }

    #[test]
    fn generator_acceptance_frequency() {
        // n = 100 over 200 seeds, within three standard errors of p.
        let n = 100usize;
        let pairs = (n * (n - 1) / 2) as f64;
        for p in [0.25, 0.5, 0.75] {
            let mut accepted = 0usize;
            let seeds = 200u64;
            for seed in 0..seeds {
                accepted += generate_random(&RandomSpec::new(n, p, seed).unwrap()).edge_count();
            }
            let trials = pairs * seeds as f64;
            let freq = accepted as f64 / trials;
            let se = (p * (1.0 - p) / trials).sqrt();
            assert!((freq - p).abs() <= 3.0 * se, "p={p} freq={freq} se={se}");
        }
    }
}
