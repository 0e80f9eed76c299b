//! Combinations of context features (CCFs), the context Kripke structure
//! over them, and detection of interleaving adaptation rules.

use std::collections::{HashSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diag::Diagnostic;
use crate::model::{ContextGroupKind, Model, RuleKind};

pub const DEFAULT_CCF_LIMIT: usize = 100_000;

/// One state of the context environment: a set of simultaneously active
/// context features, listed in context declaration order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Ccf {
    pub id: String,
    pub members: Vec<String>,
}

impl Ccf {
    pub fn contains(&self, context: &str) -> bool {
        self.members.iter().any(|c| c == context)
    }
}

/// Within one CCF, a feature required by some active context and excluded
/// by another.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterleavingConflict {
    pub ccf: String,
    pub feature: String,
    pub requiring_contexts: Vec<String>,
    pub excluding_contexts: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CcfError {
    #[error("{count} combinations of context features exceed the limit of {limit}; the model is too large for exhaustive CCF analysis")]
    TooMany { count: String, limit: usize },
    #[error("model has no context Kripke structure")]
    NoCks,
    #[error("unknown C-KS state {0}")]
    UnknownState(String),
}

/// Number of ways one context group can participate in a CCF.
fn group_choices(kind: ContextGroupKind, n: usize) -> Option<u128> {
    let pow = if n >= 127 { None } else { Some(1u128 << n) };
    match kind {
        ContextGroupKind::Xor => Some(n as u128),
        ContextGroupKind::Or => pow.map(|p| p - 1),
        ContextGroupKind::Optional => pow,
    }
}

/// Closed-form number of CCFs: the product over groups of n (xor),
/// 2^n - 1 (or) or 2^n (optional). `None` on overflow.
pub fn ccf_count(m: &Model) -> Option<u128> {
    let by_group = m.contexts_by_group();
    m.context_groups
        .iter()
        .enumerate()
        .try_fold(1u128, |acc, (gi, g)| {
            let n = by_group.get(&gi).map_or(0, Vec::len);
            acc.checked_mul(group_choices(g.kind, n)?)
        })
}

/// Does this member set form a legal CCF? Every xor group contributes exactly
/// one member, every or group at least one, optional groups any number.
pub fn is_valid_ccf(m: &Model, members: &[String]) -> Result<(), String> {
    let mut seen = HashSet::new();
    for c in members {
        if m.context(c).is_none() {
            return Err(format!("{c} is not a context feature"));
        }
        if !seen.insert(c.as_str()) {
            return Err(format!("{c} appears twice"));
        }
    }
    for g in &m.context_groups {
        let k = m
            .group_contexts(&g.id)
            .filter(|c| seen.contains(c.id.as_str()))
            .count();
        match g.kind {
            ContextGroupKind::Xor if k != 1 => {
                return Err(format!(
                    "xor context group {} needs exactly one active member, found {k}",
                    g.id
                ))
            }
            ContextGroupKind::Or if k == 0 => {
                return Err(format!(
                    "or context group {} needs at least one active member",
                    g.id
                ))
            }
            _ => {}
        }
    }
    Ok(())
}

/// Puts a member list into context declaration order.
pub fn canonical_members(m: &Model, members: &[String]) -> Vec<String> {
    let mut v: Vec<(usize, String)> = members
        .iter()
        .map(|c| (m.context_index(c).unwrap_or(usize::MAX), c.clone()))
        .collect();
    v.sort();
    v.into_iter().map(|(_, c)| c).collect()
}

fn same_members(m: &Model, a: &[String], b: &[String]) -> bool {
    canonical_members(m, a) == canonical_members(m, b)
}

pub fn enumerate_ccfs(m: &Model) -> Result<Vec<Ccf>, CcfError> {
    enumerate_ccfs_with_limit(m, DEFAULT_CCF_LIMIT)
}

/// All CCFs of the model in deterministic order.
///
/// Per group the choices are counted in binary over member declaration order
/// (first member = lowest bit); across groups, the first declared group changes
/// fastest. Declared C-KS states keep their ids; others are named `ccf<k>`
/// after their 1-based position.
pub fn enumerate_ccfs_with_limit(m: &Model, limit: usize) -> Result<Vec<Ccf>, CcfError> {
    let count = ccf_count(m);
    match count {
        Some(c) if c <= limit as u128 => {}
        _ => {
            return Err(CcfError::TooMany {
                count: count.map_or_else(|| "more than 2^128".to_string(), |c| c.to_string()),
                limit,
            })
        }
    }
    let by_group = m.contexts_by_group();
    // Choices per group, each a list of context indices.
    let mut per_group: Vec<Vec<Vec<usize>>> = Vec::new();
    for (gi, g) in m.context_groups.iter().enumerate() {
        let members = by_group.get(&gi).cloned().unwrap_or_default();
        let n = members.len();
        let subsets = |from: u64| -> Vec<Vec<usize>> {
            (from..(1u64 << n))
                .map(|mask| {
                    (0..n)
                        .filter(|b| mask >> b & 1 == 1)
                        .map(|b| members[b])
                        .collect()
                })
                .collect()
        };
        per_group.push(match g.kind {
            ContextGroupKind::Xor => members.iter().map(|&c| vec![c]).collect(),
            ContextGroupKind::Or => subsets(1),
            ContextGroupKind::Optional => subsets(0),
        });
    }

    let declared: &[crate::model::CcfDecl] = m.cks.as_ref().map_or(&[], |c| &c.states);
    let declared_ids: HashSet<&str> = declared.iter().map(|d| d.id.as_str()).collect();
    let total = count.unwrap_or(0) as usize;
    let mut out = Vec::with_capacity(total);
    let mut digits = vec![0usize; per_group.len()];
    for k in 0..total {
        let mut idx: Vec<usize> = digits
            .iter()
            .enumerate()
            .flat_map(|(g, &d)| per_group[g][d].iter().copied())
            .collect();
        idx.sort_unstable();
        let members: Vec<String> = idx.iter().map(|&i| m.contexts[i].id.clone()).collect();
        let id = match declared
            .iter()
            .find(|d| same_members(m, &d.members, &members))
        {
            Some(d) => d.id.clone(),
            None => {
                let base = format!("ccf{}", k + 1);
                if declared_ids.contains(base.as_str()) {
                    format!("{base}_auto")
                } else {
                    base
                }
            }
        };
        out.push(Ccf { id, members });
        for (g, d) in digits.iter_mut().enumerate() {
            *d += 1;
            if *d < per_group[g].len() {
                break;
            }
            *d = 0;
        }
    }
    Ok(out)
}

/// The CCFs an analysis should iterate over: declared C-KS states when
/// present, otherwise the full enumeration.
pub fn analysis_ccfs(m: &Model) -> Result<Vec<Ccf>, CcfError> {
    match &m.cks {
        Some(cks) if !cks.states.is_empty() => Ok(cks
            .states
            .iter()
            .map(|s| Ccf {
                id: s.id.clone(),
                members: canonical_members(m, &s.members),
            })
            .collect()),
        _ => enumerate_ccfs(m),
    }
}

/// Looks a CCF up by id among declared states, then among enumerated ones.
pub fn find_ccf(m: &Model, id: &str) -> Result<Ccf, CcfError> {
    if let Some(s) = m
        .cks
        .as_ref()
        .and_then(|c| c.states.iter().find(|s| s.id == id))
    {
        return Ok(Ccf {
            id: s.id.clone(),
            members: canonical_members(m, &s.members),
        });
    }
    enumerate_ccfs(m)?
        .into_iter()
        .find(|c| c.id == id)
        .ok_or_else(|| CcfError::UnknownState(id.to_string()))
}

pub fn detect_interleaving_faults(m: &Model, ccf: &Ccf) -> Vec<InterleavingConflict> {
    let mut out = Vec::new();
    for f in &m.features {
        let mut requiring = Vec::new();
        let mut excluding = Vec::new();
        for c in &ccf.members {
            for r in m
                .rules
                .iter()
                .filter(|r| &r.source == c && r.target == f.id)
            {
                match r.kind {
                    RuleKind::Require => requiring.push(c.clone()),
                    RuleKind::Exclude => excluding.push(c.clone()),
                }
            }
        }
        if !requiring.is_empty() && !excluding.is_empty() {
            out.push(InterleavingConflict {
                ccf: ccf.id.clone(),
                feature: f.id.clone(),
                requiring_contexts: requiring,
                excluding_contexts: excluding,
            });
        }
    }
    out
}

/// Interleaving conflicts as warnings.
pub fn interleaving_diagnostics(conflicts: &[InterleavingConflict]) -> Vec<Diagnostic> {
    conflicts
        .iter()
        .map(|c| {
            let mut subjects = vec![c.ccf.clone(), c.feature.clone()];
            subjects.extend(c.requiring_contexts.iter().cloned());
            subjects.extend(c.excluding_contexts.iter().cloned());
            Diagnostic::new(
                "interleaving-fault",
                crate::diag::Severity::Warning,
                subjects,
                format!(
                    "{}: feature {} is required by {{{}}} and excluded by {{{}}}",
                    c.ccf,
                    c.feature,
                    c.requiring_contexts.join(", "),
                    c.excluding_contexts.join(", ")
                ),
            )
        })
        .collect()
}

/// Diagnostics for the context Kripke structure: invalid states, states
/// unreachable from the initial state, and legal CCFs missing from it.
pub fn check_cks(m: &Model) -> Vec<Diagnostic> {
    let Some(cks) = &m.cks else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for s in &cks.states {
        if let Err(why) = is_valid_ccf(m, &s.members) {
            out.push(Diagnostic::error(
                "invalid-ccf",
                &[&s.id],
                format!("invalid CCF {}: {why}", s.id),
            ));
        }
    }
    for (i, s) in cks.states.iter().enumerate() {
        if let Some(prev) = cks.states[..i]
            .iter()
            .find(|p| same_members(m, &p.members, &s.members))
        {
            out.push(Diagnostic::warning(
                "duplicate-ccf-state",
                &[&prev.id, &s.id],
                format!("{} and {} declare the same contexts", prev.id, s.id),
            ));
        }
    }
    if let Some(init) = &cks.initial {
        if let Ok(reach) = reachable_ccfs(m, init) {
            for s in &cks.states {
                if !reach.contains(&s.id) {
                    out.push(Diagnostic::warning(
                        "unreachable-state",
                        &[&s.id],
                        format!("{} is unreachable from initial state {init}", s.id),
                    ));
                }
            }
        }
    }
    match enumerate_ccfs(m) {
        Ok(all) => {
            for c in all {
                if !cks
                    .states
                    .iter()
                    .any(|s| same_members(m, &s.members, &c.members))
                {
                    out.push(Diagnostic::warning(
                        "ccf-missing-from-cks",
                        &[&c.id],
                        format!(
                            "CCF {{{}}} is not a state of the C-KS",
                            c.members.join(", ")
                        ),
                    ));
                }
            }
        }
        Err(e) => out.push(Diagnostic::warning(
            "ccf-enumeration-skipped",
            &[],
            e.to_string(),
        )),
    }
    out
}

/// Transitive closure of C-KS transitions from `start`, including `start`,
/// in state declaration order.
pub fn reachable_ccfs(m: &Model, start: &str) -> Result<Vec<String>, CcfError> {
    let cks = m.cks.as_ref().ok_or(CcfError::NoCks)?;
    if !cks.states.iter().any(|s| s.id == start) {
        return Err(CcfError::UnknownState(start.to_string()));
    }
    let mut seen: HashSet<&str> = HashSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(x) = queue.pop_front() {
        for (a, b) in &cks.transitions {
            if a == x && seen.insert(b.as_str()) {
                queue.push_back(b.as_str());
            }
        }
    }
    Ok(cks
        .states
        .iter()
        .filter(|s| seen.contains(s.id.as_str()))
        .map(|s| s.id.clone())
        .collect())
}

/// Every static check at once: model diagnostics, C-KS diagnostics and
/// interleaving faults in each analysed CCF.
pub fn check_model(m: &Model) -> Vec<Diagnostic> {
    let mut out = crate::validate::validate_model(m);
    if crate::diag::has_errors(&out) {
        return out;
    }
    out.extend(check_cks(m));
    if let Ok(ccfs) = analysis_ccfs(m) {
        for c in &ccfs {
            out.extend(interleaving_diagnostics(&detect_interleaving_faults(m, c)));
        }
    }
    out
}
