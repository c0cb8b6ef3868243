//! Minimum edit-distance alignment of reference and hypothesis phone
//! sequences.
//!
//! The backtrace is deterministic: walking back from the terminal cell, a
//! diagonal move (match or substitution) is taken whenever it lies on a
//! minimum-cost path, then a deletion, then an insertion.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::phoneset::Phone;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EditKind {
    Match,
    Substitute,
    Delete,
    Insert,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EditStep {
    Match(Phone),
    Substitute { reference: Phone, hypothesis: Phone },
    Delete(Phone),
    Insert(Phone),
}

impl EditStep {
    pub fn kind(&self) -> EditKind {
        match self {
            EditStep::Match(_) => EditKind::Match,
            EditStep::Substitute { .. } => EditKind::Substitute,
            EditStep::Delete(_) => EditKind::Delete,
            EditStep::Insert(_) => EditKind::Insert,
        }
    }

    pub fn reference(&self) -> Option<Phone> {
        match *self {
            EditStep::Match(p) | EditStep::Delete(p) => Some(p),
            EditStep::Substitute { reference, .. } => Some(reference),
            EditStep::Insert(_) => None,
        }
    }

    pub fn hypothesis(&self) -> Option<Phone> {
        match *self {
            EditStep::Match(p) | EditStep::Insert(p) => Some(p),
            EditStep::Substitute { hypothesis, .. } => Some(hypothesis),
            EditStep::Delete(_) => None,
        }
    }

    pub fn is_error(&self) -> bool {
        !matches!(self, EditStep::Match(_))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("edit costs must all be at least 1 (got sub={sub}, del={del}, ins={ins})")]
pub struct InvalidCosts {
    pub sub: u32,
    pub del: u32,
    pub ins: u32,
}

/// Per-operation costs. Matches always cost 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditCosts {
    sub: u32,
    del: u32,
    ins: u32,
}

impl EditCosts {
    pub const UNIT: EditCosts = EditCosts {
        sub: 1,
        del: 1,
        ins: 1,
    };

    pub fn new(sub: u32, del: u32, ins: u32) -> Result<Self, InvalidCosts> {
        if sub == 0 || del == 0 || ins == 0 {
            return Err(InvalidCosts { sub, del, ins });
        }
        Ok(EditCosts { sub, del, ins })
    }

    pub fn sub(&self) -> u32 {
        self.sub
    }

    pub fn del(&self) -> u32 {
        self.del
    }

    pub fn ins(&self) -> u32 {
        self.ins
    }

    fn diag(&self, a: Phone, b: Phone) -> u32 {
        if a == b {
            0
        } else {
            self.sub
        }
    }
}

impl Default for EditCosts {
    fn default() -> Self {
        EditCosts::UNIT
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alignment {
    pub steps: Vec<EditStep>,
    pub ref_len: usize,
    pub hyp_len: usize,
    /// Terminal value of the DP table under the costs used.
    pub distance: u64,
}

impl Alignment {
    pub fn count(&self, kind: EditKind) -> usize {
        self.steps.iter().filter(|s| s.kind() == kind).count()
    }

    /// Number of non-match steps. Equals `distance` under unit costs.
    pub fn errors(&self) -> usize {
        self.steps.iter().filter(|s| s.is_error()).count()
    }

    pub fn reference(&self) -> Vec<Phone> {
        self.steps.iter().filter_map(EditStep::reference).collect()
    }

    pub fn hypothesis(&self) -> Vec<Phone> {
        self.steps.iter().filter_map(EditStep::hypothesis).collect()
    }
}

/// Aligns `reference` against `hypothesis` with a full DP table and backtrace.
pub fn align(reference: &[Phone], hypothesis: &[Phone], costs: EditCosts) -> Alignment {
    let (n, m) = (reference.len(), hypothesis.len());
    let width = m + 1;
    let mut table = vec![0u64; (n + 1) * width];
    let at = |i: usize, j: usize| i * width + j;

    for j in 1..=m {
        table[at(0, j)] = table[at(0, j - 1)] + u64::from(costs.ins);
    }
    for i in 1..=n {
        table[at(i, 0)] = table[at(i - 1, 0)] + u64::from(costs.del);
        for j in 1..=m {
            let diag = table[at(i - 1, j - 1)]
                + u64::from(costs.diag(reference[i - 1], hypothesis[j - 1]));
            let del = table[at(i - 1, j)] + u64::from(costs.del);
            let ins = table[at(i, j - 1)] + u64::from(costs.ins);
            table[at(i, j)] = diag.min(del).min(ins);
        }
    }

    let mut steps = Vec::with_capacity(n.max(m));
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = table[at(i, j)];
        if i > 0 && j > 0 {
            let (r, h) = (reference[i - 1], hypothesis[j - 1]);
            if here == table[at(i - 1, j - 1)] + u64::from(costs.diag(r, h)) {
                steps.push(if r == h {
                    EditStep::Match(r)
                } else {
                    EditStep::Substitute {
                        reference: r,
                        hypothesis: h,
                    }
                });
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && here == table[at(i - 1, j)] + u64::from(costs.del) {
            steps.push(EditStep::Delete(reference[i - 1]));
            i -= 1;
        } else {
            debug_assert!(j > 0 && here == table[at(i, j - 1)] + u64::from(costs.ins));
            steps.push(EditStep::Insert(hypothesis[j - 1]));
            j -= 1;
        }
    }
    steps.reverse();

    Alignment {
        steps,
        ref_len: n,
        hyp_len: m,
        distance: table[at(n, m)],
    }
}

/// Two-row edit distance with reusable buffers, for scoring many pairs.
#[derive(Clone, Debug, Default)]
pub struct EditDistance {
    costs: EditCosts,
    prev: Vec<u64>,
    cur: Vec<u64>,
}

impl EditDistance {
    pub fn new(costs: EditCosts) -> Self {
        EditDistance {
            costs,
            prev: Vec::new(),
            cur: Vec::new(),
        }
    }

    pub fn distance(&mut self, reference: &[Phone], hypothesis: &[Phone]) -> u64 {
        let costs = self.costs;
        let m = hypothesis.len();
        self.prev.clear();
        self.prev
            .extend((0..=m as u64).map(|j| j * u64::from(costs.ins)));
        self.cur.clear();
        self.cur.resize(m + 1, 0);

        for (i, &r) in reference.iter().enumerate() {
            self.cur[0] = (i as u64 + 1) * u64::from(costs.del);
            for (j, &h) in hypothesis.iter().enumerate() {
                let diag = self.prev[j] + u64::from(costs.diag(r, h));
                let del = self.prev[j + 1] + u64::from(costs.del);
                let ins = self.cur[j] + u64::from(costs.ins);
                self.cur[j + 1] = diag.min(del).min(ins);
            }
            std::mem::swap(&mut self.prev, &mut self.cur);
        }
        self.prev[m]
    }
}

/// Edit distance without materialising the alignment.
pub fn distance_only(reference: &[Phone], hypothesis: &[Phone], costs: EditCosts) -> u64 {
    EditDistance::new(costs).distance(reference, hypothesis)
}
