//! Brute-force reference solver: scores every assignment.

use super::{better, Cmp, Configuration, IlpProblem, SolverError};

pub const EXHAUSTIVE_CAP: usize = 25;

fn check_size(p: &IlpProblem) -> Result<(), SolverError> {
    if p.len() > EXHAUSTIVE_CAP {
        return Err(SolverError::TooManyVariables {
            n: p.len(),
            cap: EXHAUSTIVE_CAP,
        });
    }
    Ok(())
}

/// A constraint over a bitmask assignment. Unit coefficients are counted
/// with popcounts; anything else is summed term by term.
struct MaskConstraint {
    plus: u32,
    minus: u32,
    other: Vec<(i64, u32)>,
    cmp: Cmp,
    rhs: i64,
}

impl MaskConstraint {
    fn holds(&self, mask: u32) -> bool {
        let mut lhs =
            (mask & self.plus).count_ones() as i64 - (mask & self.minus).count_ones() as i64;
        for &(a, bit) in &self.other {
            if mask & bit != 0 {
                lhs += a;
            }
        }
        match self.cmp {
            Cmp::Le => lhs <= self.rhs,
            Cmp::Ge => lhs >= self.rhs,
            Cmp::Eq => lhs == self.rhs,
        }
    }
}

fn for_each_feasible(p: &IlpProblem, mut f: impl FnMut(&[bool])) {
    let cs: Vec<MaskConstraint> = p
        .constraints
        .iter()
        .map(|c| {
            let mut m = MaskConstraint {
                plus: 0,
                minus: 0,
                other: Vec::new(),
                cmp: c.cmp,
                rhs: c.rhs,
            };
            for &(a, v) in &c.terms {
                match a {
                    1 => m.plus |= 1 << v,
                    -1 => m.minus |= 1 << v,
                    _ => m.other.push((a, 1 << v)),
                }
            }
            m
        })
        .collect();
    let n = p.len();
    let mut x = vec![false; n];
    for mask in 0u32..(1u32 << n) {
        if cs.iter().all(|c| c.holds(mask)) {
            for (i, b) in x.iter_mut().enumerate() {
                *b = mask >> i & 1 == 1;
            }
            f(&x);
        }
    }
}

pub fn solve_exhaustive(p: &IlpProblem) -> Result<Configuration, SolverError> {
    check_size(p)?;
    let mut best: Option<(f64, Vec<bool>)> = None;
    for_each_feasible(p, |x| {
        let obj = p.objective_value(x);
        if best.as_ref().is_none_or(|(b, bx)| better(obj, x, *b, bx)) {
            best = Some((obj, x.to_vec()));
        }
    });
    match best {
        Some((_, x)) => Ok(Configuration::from_bits(p, &x)),
        None => Err(SolverError::Infeasible {
            conflict: Vec::new(),
        }),
    }
}

pub fn count_feasible_exhaustive(p: &IlpProblem) -> Result<u64, SolverError> {
    check_size(p)?;
    let mut n = 0;
    for_each_feasible(p, |_| n += 1);
    Ok(n)
}
