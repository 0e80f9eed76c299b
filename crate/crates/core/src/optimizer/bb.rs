//! Depth-first branch and bound with bound propagation.
//!
//! Variables are branched in index order, 1 before 0, so leaves are reached
//! in decreasing lexicographic order. The bound at a node is the objective
//! of the fixed part plus every positive coefficient still free. After each
//! decision, constraints over the touched variables are propagated to fix
//! forced variables or detect a dead end.

use super::{better, Configuration, ConflictItem, IlpProblem, SolverError, DEFAULT_NODE_LIMIT};
use crate::optimizer::Cmp;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BbOptions {
    pub node_limit: u64,
}

impl Default for BbOptions {
    fn default() -> Self {
        BbOptions {
            node_limit: DEFAULT_NODE_LIMIT,
        }
    }
}

const FREE: i8 = -1;

struct Search<'a> {
    p: &'a IlpProblem,
    active: Vec<bool>,
    occurs: Vec<Vec<usize>>,
    val: Vec<i8>,
    trail: Vec<usize>,
    nodes: u64,
    limit: u64,
}

/// Receives feasible leaves.
trait Collector {
    /// Objective a subtree must be able to reach to be worth exploring.
    fn threshold(&self) -> Option<f64>;
    /// Returns false to stop the search.
    fn leaf(&mut self, obj: f64, x: &[bool]) -> bool;
}

struct TopK {
    k: usize,
    items: Vec<(f64, Vec<bool>)>,
}

impl Collector for TopK {
    fn threshold(&self) -> Option<f64> {
        (self.items.len() == self.k).then(|| self.items[self.k - 1].0)
    }

    fn leaf(&mut self, obj: f64, x: &[bool]) -> bool {
        let pos = self
            .items
            .iter()
            .position(|(o, y)| better(obj, x, *o, y))
            .unwrap_or(self.items.len());
        if pos < self.k {
            self.items.insert(pos, (obj, x.to_vec()));
            self.items.truncate(self.k);
        }
        true
    }
}

struct Count(u64);

impl Collector for Count {
    fn threshold(&self) -> Option<f64> {
        None
    }

    fn leaf(&mut self, _: f64, _: &[bool]) -> bool {
        self.0 += 1;
        true
    }
}

struct First(bool);

impl Collector for First {
    fn threshold(&self) -> Option<f64> {
        None
    }

    fn leaf(&mut self, _: f64, _: &[bool]) -> bool {
        self.0 = true;
        false
    }
}

impl<'a> Search<'a> {
    fn new(p: &'a IlpProblem, active: Vec<bool>, limit: u64) -> Self {
        let mut occurs = vec![Vec::new(); p.len()];
        for (ci, c) in p.constraints.iter().enumerate() {
            if active[ci] {
                for &(_, v) in &c.terms {
                    occurs[v].push(ci);
                }
            }
        }
        Search {
            p,
            active,
            occurs,
            val: vec![FREE; p.len()],
            trail: Vec::new(),
            nodes: 0,
            limit,
        }
    }

    fn assign(&mut self, v: usize, b: bool) {
        self.val[v] = b as i8;
        self.trail.push(v);
    }

    fn undo(&mut self, mark: usize) {
        for v in self.trail.drain(mark..) {
            self.val[v] = FREE;
        }
    }

    /// Propagates constraint `ci`; returns false on a violated constraint.
    fn propagate_one(&mut self, ci: usize, queue: &mut Vec<usize>) -> bool {
        let c = &self.p.constraints[ci];
        let (mut lo, mut hi) = (0i64, 0i64);
        for &(a, v) in &c.terms {
            match self.val[v] {
                FREE if a > 0 => hi += a,
                FREE => lo += a,
                1 => {
                    lo += a;
                    hi += a;
                }
                _ => {}
            }
        }
        let upper = matches!(c.cmp, Cmp::Le | Cmp::Eq);
        let lower = matches!(c.cmp, Cmp::Ge | Cmp::Eq);
        if (upper && lo > c.rhs) || (lower && hi < c.rhs) {
            return false;
        }
        let mut forced = Vec::new();
        for &(a, v) in &c.terms {
            if self.val[v] != FREE {
                continue;
            }
            // Setting v to the value that raises the sum must keep lo <= rhs,
            // and the value that lowers it must keep hi >= rhs.
            if upper && lo + a.abs() > c.rhs {
                forced.push((v, a < 0));
            } else if lower && hi - a.abs() < c.rhs {
                forced.push((v, a > 0));
            }
        }
        for (v, b) in forced {
            if self.val[v] == FREE {
                self.assign(v, b);
                queue.extend(self.occurs[v].iter().copied());
            } else if self.val[v] != b as i8 {
                return false;
            }
        }
        true
    }

    fn propagate(&mut self, mut queue: Vec<usize>) -> bool {
        while let Some(ci) = queue.pop() {
            if !self.propagate_one(ci, &mut queue) {
                return false;
            }
        }
        true
    }

    fn root(&mut self) -> bool {
        let all: Vec<usize> = (0..self.p.constraints.len())
            .filter(|&i| self.active[i])
            .collect();
        self.propagate(all)
    }

    fn bound(&self) -> f64 {
        let mut s = 0.0;
        for (i, &c) in self.p.objective.iter().enumerate() {
            if self.val[i] == 1 || (self.val[i] == FREE && c > 0.0) {
                s += c;
            }
        }
        s
    }

    /// Visits feasible leaves below the current node in decreasing
    /// lexicographic order. Returns false once the collector stops.
    fn dfs(&mut self, col: &mut dyn Collector, slack: f64) -> Result<bool, SolverError> {
        self.nodes += 1;
        if self.nodes > self.limit {
            return Err(SolverError::NodeLimit { limit: self.limit });
        }
        if let Some(t) = col.threshold() {
            if self.bound() < t - slack {
                return Ok(true);
            }
        }
        let Some(v) = self.val.iter().position(|&b| b == FREE) else {
            let x: Vec<bool> = self.val.iter().map(|&b| b == 1).collect();
            return Ok(col.leaf(self.p.objective_value(&x), &x));
        };
        for b in [true, false] {
            let mark = self.trail.len();
            self.assign(v, b);
            let ok = self.propagate(self.occurs[v].clone());
            let go_on = if ok { self.dfs(col, slack)? } else { true };
            self.undo(mark);
            if !go_on {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn run(&mut self, col: &mut dyn Collector) -> Result<(), SolverError> {
        if self.root() {
            self.dfs(col, self.p.slack())?;
        }
        Ok(())
    }
}

fn all_active(p: &IlpProblem) -> Vec<bool> {
    vec![true; p.constraints.len()]
}

/// The `k` best configurations, best first.
pub fn solve_bb_top_k(
    p: &IlpProblem,
    k: usize,
    opts: &BbOptions,
) -> Result<Vec<Configuration>, SolverError> {
    let mut col = TopK {
        k: k.max(1),
        items: Vec::new(),
    };
    Search::new(p, all_active(p), opts.node_limit).run(&mut col)?;
    if col.items.is_empty() {
        return Err(SolverError::Infeasible {
            conflict: minimal_conflict(p, opts)?,
        });
    }
    Ok(col
        .items
        .iter()
        .map(|(_, x)| Configuration::from_bits(p, x))
        .collect())
}

pub fn solve_bb(p: &IlpProblem) -> Result<Configuration, SolverError> {
    Ok(solve_bb_top_k(p, 1, &BbOptions::default())?.remove(0))
}

/// Number of feasible assignments.
pub fn count_feasible(p: &IlpProblem, opts: &BbOptions) -> Result<u64, SolverError> {
    let mut col = Count(0);
    Search::new(p, all_active(p), opts.node_limit).run(&mut col)?;
    Ok(col.0)
}

fn feasible_with(p: &IlpProblem, active: &[bool], opts: &BbOptions) -> Result<bool, SolverError> {
    let mut col = First(false);
    Search::new(p, active.to_vec(), opts.node_limit).run(&mut col)?;
    Ok(col.0)
}

/// An irreducible set of constraints that cannot hold together, found by
/// deleting constraints one at a time while the rest stays infeasible.
/// Empty when `p` is feasible.
pub fn minimal_conflict(
    p: &IlpProblem,
    opts: &BbOptions,
) -> Result<Vec<ConflictItem>, SolverError> {
    let mut active = all_active(p);
    if feasible_with(p, &active, opts)? {
        return Ok(Vec::new());
    }
    for i in 0..active.len() {
        active[i] = false;
        if feasible_with(p, &active, opts)? {
            active[i] = true;
        }
    }
    Ok(active
        .iter()
        .enumerate()
        .filter(|(_, &a)| a)
        .map(|(i, _)| ConflictItem {
            index: i,
            constraint: p.constraints[i].render(&p.variables),
            origin: p.constraints[i].origin.clone(),
        })
        .collect())
}
