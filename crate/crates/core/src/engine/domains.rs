//! Rank-variable domains and the propagators of the constraint model.
//!
//! Agent `a` has one variable over `1..=len(a) + 1`; value `len(a) + 1`
//! ("matched to self") means unmatched. Two constraint families act on it:
//!
//! * pairing: `agent[a] = rank(a, b)` iff `agent[b] = rank(b, a)`;
//! * stability (strict mode only): `agent[a] > rank(a, b)` implies
//!   `agent[b] < rank(b, a)`.
//!
//! Domains are bitsets copied on branching, so there is no trail.

use std::collections::VecDeque;

use crate::model::{AgentId, Instance};

#[derive(Debug)]
pub(crate) struct Wipeout(pub usize);

/// Static per-agent bitset offsets.
#[derive(Debug)]
pub(crate) struct Layout {
    offset: Vec<usize>,
    pub self_rank: Vec<u32>,
    total_words: usize,
}

impl Layout {
    pub fn new(inst: &Instance) -> Self {
        let mut offset = Vec::with_capacity(inst.n());
        let mut self_rank = Vec::with_capacity(inst.n());
        let mut total = 0;
        for a in inst.agents() {
            let len = inst.list_len(a) as u32;
            offset.push(total);
            self_rank.push(len + 1);
            // bits 0..=len+1, bit 0 unused
            total += (len as usize + 2).div_ceil(64);
        }
        Self {
            offset,
            self_rank,
            total_words: total,
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Event {
    Removed(usize, u32),
    MinRaised(usize, u32),
    Fixed(usize),
}

#[derive(Debug, Clone)]
pub(crate) struct Domains {
    bits: Vec<u64>,
    size: Vec<u32>,
    min: Vec<u32>,
    max: Vec<u32>,
}

impl Domains {
    pub fn full(layout: &Layout) -> Self {
        let n = layout.self_rank.len();
        let mut d = Self {
            bits: vec![0; layout.total_words],
            size: vec![0; n],
            min: vec![1; n],
            max: layout.self_rank.clone(),
        };
        for a in 0..n {
            let top = layout.self_rank[a];
            for v in 1..=top {
                let i = layout.offset[a] + v as usize / 64;
                d.bits[i] |= 1 << (v % 64);
            }
            d.size[a] = top;
        }
        d
    }

    #[inline]
    pub fn contains(&self, layout: &Layout, a: usize, v: u32) -> bool {
        if v == 0 || v > layout.self_rank[a] {
            return false;
        }
        let i = layout.offset[a] + v as usize / 64;
        self.bits[i] >> (v % 64) & 1 == 1
    }

    #[inline]
    pub fn size(&self, a: usize) -> u32 {
        self.size[a]
    }

    #[inline]
    pub fn min(&self, a: usize) -> u32 {
        self.min[a]
    }

    #[inline]
    pub fn max(&self, a: usize) -> u32 {
        self.max[a]
    }

    #[inline]
    pub fn is_fixed(&self, a: usize) -> bool {
        self.size[a] == 1
    }

    pub fn values<'a>(&'a self, layout: &'a Layout, a: usize) -> impl Iterator<Item = u32> + 'a {
        (self.min[a]..=self.max[a]).filter(move |&v| self.contains(layout, a, v))
    }

    fn next_from(&self, layout: &Layout, a: usize, v: u32) -> u32 {
        (v..=layout.self_rank[a])
            .find(|&x| self.contains(layout, a, x))
            .unwrap_or(layout.self_rank[a] + 1)
    }

    fn prev_from(&self, layout: &Layout, a: usize, v: u32) -> u32 {
        (1..=v).rev().find(|&x| self.contains(layout, a, x)).unwrap_or(0)
    }
}

/// Propagation context: the instance, layout and mode, plus a work queue.
pub(crate) struct Propagator<'a> {
    pub inst: &'a Instance,
    pub layout: &'a Layout,
    pub strict: bool,
    queue: VecDeque<Event>,
}

impl<'a> Propagator<'a> {
    pub fn new(inst: &'a Instance, layout: &'a Layout, strict: bool) -> Self {
        Self {
            inst,
            layout,
            strict,
            queue: VecDeque::new(),
        }
    }

    #[inline]
    fn rank(&self, a: usize, b: AgentId) -> u32 {
        self.inst
            .rank_of(AgentId(a), b)
            .expect("acceptable pair")
    }

    #[inline]
    fn partner_at(&self, a: usize, v: u32) -> Option<AgentId> {
        self.inst.choice(AgentId(a), v)
    }

    pub fn remove(&mut self, d: &mut Domains, a: usize, v: u32) -> Result<(), Wipeout> {
        if !d.contains(self.layout, a, v) {
            return Ok(());
        }
        let i = self.layout.offset[a] + v as usize / 64;
        d.bits[i] &= !(1u64 << (v % 64));
        d.size[a] -= 1;
        if d.size[a] == 0 {
            self.queue.clear();
            return Err(Wipeout(a));
        }
        self.queue.push_back(Event::Removed(a, v));
        if v == d.min[a] {
            let old = d.min[a];
            d.min[a] = d.next_from(self.layout, a, v + 1);
            self.queue.push_back(Event::MinRaised(a, old));
        }
        if v == d.max[a] {
            d.max[a] = d.prev_from(self.layout, a, v - 1);
        }
        if d.size[a] == 1 {
            self.queue.push_back(Event::Fixed(a));
        }
        Ok(())
    }

    /// Removes every value strictly greater than `cap`.
    pub fn cap(&mut self, d: &mut Domains, a: usize, cap: u32) -> Result<(), Wipeout> {
        while d.max[a] > cap {
            let v = d.max[a];
            self.remove(d, a, v)?;
        }
        Ok(())
    }

    /// Restricts `a` to the single value `v`.
    pub fn fix(&mut self, d: &mut Domains, a: usize, v: u32) -> Result<(), Wipeout> {
        if !d.contains(self.layout, a, v) {
            self.queue.clear();
            return Err(Wipeout(a));
        }
        let others: Vec<u32> = d.values(self.layout, a).filter(|&x| x != v).collect();
        for x in others {
            self.remove(d, a, x)?;
        }
        Ok(())
    }

    /// Queues the root-level consequences of the current domains, which the
    /// event-driven rules would otherwise never see.
    pub fn seed_root(&mut self, d: &Domains) {
        for a in 0..self.inst.n() {
            self.queue.push_back(Event::MinRaised(a, 1));
            if d.is_fixed(a) {
                self.queue.push_back(Event::Fixed(a));
            }
            for v in 1..self.layout.self_rank[a] {
                if !d.contains(self.layout, a, v) {
                    self.queue.push_back(Event::Removed(a, v));
                }
            }
        }
    }

    /// Runs all queued events to a fixpoint.
    pub fn propagate(&mut self, d: &mut Domains) -> Result<(), Wipeout> {
        while let Some(ev) = self.queue.pop_front() {
            match ev {
                Event::Removed(a, v) => {
                    if let Some(b) = self.partner_at(a, v) {
                        let rb = self.rank(b.0, AgentId(a));
                        self.remove(d, b.0, rb)?;
                    }
                }
                Event::Fixed(a) => {
                    let v = d.min[a];
                    if let Some(b) = self.partner_at(a, v) {
                        let rb = self.rank(b.0, AgentId(a));
                        self.fix(d, b.0, rb)?;
                    }
                }
                Event::MinRaised(a, old) => {
                    if !self.strict {
                        continue;
                    }
                    let new = d.min[a];
                    // a ends up strictly worse than everyone ranked in old..new:
                    // each of them must end up strictly better than a.
                    for r in old..new {
                        if let Some(b) = self.partner_at(a, r) {
                            let rb = self.rank(b.0, AgentId(a));
                            self.cap(d, b.0, rb - 1)?;
                        }
                    }
                    // a cannot beat its current best option b, so b may not
                    // end up worse than a (either they pair up or b does better).
                    if let Some(b) = self.partner_at(a, new) {
                        let rb = self.rank(b.0, AgentId(a));
                        self.cap(d, b.0, rb)?;
                    }
                }
            }
        }
        Ok(())
    }
}
