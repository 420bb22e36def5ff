//! JSON and text documents printed by the subcommands.

use std::cmp::Ordering;
use std::fmt::Write;

use serde::Serialize;

use sri_core::analysis::{self, Profile, ProfileScope};
use sri_core::bench::RowStatus;
use sri_core::criteria::{Criterion, CriterionResult};
use sri_core::engine::Status;
use sri_core::model::{Instance, Matching};

pub fn json<T: Serialize>(doc: &T) -> serde_json::Result<String> {
    let mut s = serde_json::to_string_pretty(doc)?;
    s.push('\n');
    Ok(s)
}

/// 1-based pairs with the smaller agent first.
fn pairs(m: &Matching) -> Vec<[usize; 2]> {
    m.pairs().into_iter().map(|(a, b)| [a.0 + 1, b.0 + 1]).collect()
}

fn join<T: ToString>(xs: &[T], sep: &str) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(sep)
}

/// A criterion value: one number, or a whole profile.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum Value {
    Number(i64),
    Profile(Vec<u32>),
}

impl Value {
    fn text(&self) -> String {
        match self {
            Value::Number(v) => v.to_string(),
            Value::Profile(p) => join(p, ";"),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ResultDoc {
    pub criterion: Criterion,
    pub status: RowStatus,
    pub objective: Option<Value>,
    pub matching: Option<Vec<[usize; 2]>>,
    pub profile: Option<Vec<u32>>,
    /// Agents the profile counts: `matched-set` (every agent matched in all
    /// stable matchings) or `all-matched` for almost-stable results.
    pub profile_scope: &'static str,
    pub cost: Option<u64>,
    pub regret: Option<u32>,
    pub blocking: Option<usize>,
    pub nodes: u64,
    pub millis: u64,
}

impl ResultDoc {
    pub fn new(r: &CriterionResult) -> Self {
        let optimal = r.status() == Status::Optimal;
        let objective = match (&r.profile, r.outcome.objective_value) {
            _ if !optimal || r.criterion == Criterion::AnyStable => None,
            (Some(p), _) if r.criterion.is_lexicographic() => Some(Value::Profile(p.counts.clone())),
            (_, Some(v)) => Some(Value::Number(v)),
            _ => None,
        };
        Self {
            criterion: r.criterion,
            status: r.status().into(),
            objective,
            matching: r.outcome.matching.as_ref().filter(|_| optimal).map(pairs),
            profile: r.profile.as_ref().map(|p| p.counts.clone()),
            profile_scope: if r.criterion == Criterion::AlmostStable {
                "all-matched"
            } else {
                "matched-set"
            },
            cost: r.summary.map(|s| s.cost),
            regret: r.summary.map(|s| s.regret),
            blocking: r.summary.map(|s| s.blocking_count),
            nodes: r.outcome.stats.nodes,
            millis: r.outcome.stats.millis,
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let status = serde_json::to_value(self.status).expect("plain enum");
        let _ = writeln!(s, "criterion {}", self.criterion);
        let _ = writeln!(s, "status {}", status.as_str().unwrap_or_default());
        if let Some(v) = &self.objective {
            let _ = writeln!(s, "objective {}", v.text());
        }
        if let Some(p) = &self.profile {
            let _ = writeln!(s, "profile {} ({})", join(p, " "), self.profile_scope);
        }
        if let (Some(c), Some(r), Some(b)) = (self.cost, self.regret, self.blocking) {
            let _ = writeln!(s, "cost {c} regret {r} blocking {b}");
        }
        let _ = writeln!(s, "nodes {} millis {}", self.nodes, self.millis);
        if let Some(m) = &self.matching {
            for [a, b] in m {
                let _ = writeln!(s, "{a} {b}");
            }
        }
        s
    }
}

#[derive(Debug, Serialize)]
pub struct EnumerateDoc {
    pub count: usize,
    pub matchings: Vec<Vec<[usize; 2]>>,
}

impl EnumerateDoc {
    pub fn new(ms: &[Matching]) -> Self {
        Self {
            count: ms.len(),
            matchings: ms.iter().map(pairs).collect(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} stable matchings\n", self.count);
        for (i, m) in self.matchings.iter().enumerate() {
            let body: Vec<String> = m.iter().map(|[a, b]| format!("{a}-{b}")).collect();
            let _ = writeln!(s, "{}: {}", i + 1, body.join(" "));
        }
        s
    }
}

/// Value of `m` under criterion `c`; `None` for any-stable.
pub fn criterion_value(inst: &Instance, m: &Matching, c: Criterion) -> Option<Value> {
    let p = analysis::profile(inst, m, ProfileScope::AllMatched);
    match c {
        Criterion::AnyStable => None,
        Criterion::Egalitarian => Some(Value::Number(p.cost() as i64)),
        Criterion::FcMax => Some(Value::Number(p.level(1) as i64)),
        Criterion::RankMaximal | Criterion::Generous => Some(Value::Profile(p.counts)),
        Criterion::MinRegret => Some(Value::Number(p.regret() as i64)),
        Criterion::AlmostStable => Some(Value::Number(analysis::blocking_count(inst, m) as i64)),
    }
}

/// How `ours` compares with `best` under `c`: `Less` means strictly worse.
fn quality(c: Criterion, ours: &Value, best: &Value) -> Ordering {
    match (ours, best) {
        (Value::Number(a), Value::Number(b)) if c == Criterion::FcMax => a.cmp(b),
        (Value::Number(a), Value::Number(b)) => b.cmp(a),
        (Value::Profile(a), Value::Profile(b)) => {
            let (a, b) = (Profile { counts: a.clone() }, Profile { counts: b.clone() });
            match c {
                Criterion::Generous => b.cmp_reverse(&a),
                _ => a.cmp_forward(&b),
            }
        }
        _ => Ordering::Equal,
    }
}

#[derive(Debug, Serialize)]
pub struct CheckReport {
    pub criterion: Criterion,
    pub stable: bool,
    pub blocking: usize,
    pub value: Option<Value>,
    /// Solver optimum, when requested.
    pub optimum: Option<Value>,
    pub accepted: bool,
    pub reason: Option<String>,
}

impl CheckReport {
    pub fn new(inst: &Instance, m: &Matching, c: Criterion) -> Self {
        let blocking = analysis::blocking_count(inst, m);
        let stable = blocking == 0;
        let accepted = stable || c == Criterion::AlmostStable;
        Self {
            criterion: c,
            stable,
            blocking,
            value: criterion_value(inst, m, c),
            optimum: None,
            accepted,
            reason: (!accepted).then(|| format!("{blocking} blocking pairs")),
        }
    }

    pub fn compare_with(&mut self, inst: &Instance, best: &CriterionResult) {
        if best.status() != Status::Optimal {
            // The matching was valid, so only an unstable one can get here.
            self.accepted = false;
            self.reason.get_or_insert_with(|| "instance has no stable matching".into());
            return;
        }
        let m = best.outcome.matching.as_ref().expect("optimal");
        let optimum = criterion_value(inst, m, self.criterion);
        if let (Some(ours), Some(opt)) = (&self.value, &optimum) {
            if quality(self.criterion, ours, opt) == Ordering::Less {
                self.accepted = false;
                self.reason
                    .get_or_insert_with(|| format!("not optimal: {} vs {}", ours.text(), opt.text()));
            }
        }
        self.optimum = optimum;
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "criterion {}", self.criterion);
        let _ = writeln!(s, "stable {} blocking {}", self.stable, self.blocking);
        if let Some(v) = &self.value {
            let _ = writeln!(s, "value {}", v.text());
        }
        if let Some(v) = &self.optimum {
            let _ = writeln!(s, "optimum {}", v.text());
        }
        let _ = writeln!(s, "{}", if self.accepted { "accepted" } else { "rejected" });
        if let Some(r) = &self.reason {
            let _ = writeln!(s, "reason {r}");
        }
        s
    }
}
