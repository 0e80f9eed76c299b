use std::collections::{HashMap, HashSet};

use crate::diag::Diagnostic;
use crate::model::{Model, RuleKind};

/// Structural and semantic diagnostics for a model.
///
/// The list is empty iff every type invariant holds and every hard goal binds
/// a variable feature. Rules that target both a feature and one of its
/// descendants under the same context are reported as warnings.
pub fn validate_model(m: &Model) -> Vec<Diagnostic> {
    let mut out: Vec<Diagnostic> = m
        .structural_issues()
        .iter()
        .map(|i| i.to_diagnostic())
        .collect();

    // Hard goals.
    let mut decomposition_by_goal = HashMap::new();
    let mut bound: HashMap<&str, &str> = HashMap::new();
    for h in &m.goals.hardgoals {
        if let Some(f) = m.feature(&h.feature) {
            if !f.is_variable() {
                out.push(Diagnostic::error(
                    "hardgoal-binds-non-variable",
                    &[&h.id, &f.id],
                    format!(
                        "hard goal must bind a variable feature ({} binds {})",
                        h.id, f.id
                    ),
                ));
            }
        }
        if let Some(prev) = decomposition_by_goal.insert(h.goal.as_str(), h.decomposition) {
            if prev != h.decomposition {
                out.push(Diagnostic::error(
                    "mixed-decomposition",
                    &[&h.goal, &h.id],
                    format!("hard goals under {} mix and/or decomposition", h.goal),
                ));
            }
        }
        if let Some(other) = bound.insert(h.feature.as_str(), h.id.as_str()) {
            out.push(Diagnostic::error(
                "feature-bound-twice",
                &[&h.feature, other, &h.id],
                format!(
                    "feature {} is bound by both {other} and {}",
                    h.feature, h.id
                ),
            ));
        }
    }

    // Rules.
    for r in &m.rules {
        if let Some(f) = m.feature(&r.target) {
            if !f.is_variable() {
                out.push(Diagnostic::warning(
                    "rule-targets-non-variable",
                    &[&r.source, &r.target],
                    format!(
                        "rule {} {} {} targets a non-variable feature; it has no effect on utilities",
                        r.source,
                        r.kind.keyword(),
                        r.target
                    ),
                ));
            }
        }
    }
    let by_source: HashMap<&str, Vec<(&str, RuleKind)>> =
        m.rules.iter().fold(HashMap::new(), |mut acc, r| {
            acc.entry(r.source.as_str())
                .or_default()
                .push((r.target.as_str(), r.kind));
            acc
        });
    for c in &m.contexts {
        let Some(targets) = by_source.get(c.id.as_str()) else {
            continue;
        };
        let target_set: HashSet<&str> = targets.iter().map(|(t, _)| *t).collect();
        for (t, _) in targets {
            for anc in m.ancestors(t) {
                if target_set.contains(anc.as_str()) {
                    out.push(Diagnostic::warning(
                        "rule-on-parent-and-child",
                        &[&c.id, &anc, t],
                        format!(
                            "context {} has rules on both {anc} and its descendant {t}; \
                             such rule sets are fault-prone",
                            c.id
                        ),
                    ));
                }
            }
        }
    }
    out
}
