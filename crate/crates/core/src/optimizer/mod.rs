//! 0-1 integer programs over feature selections.
//!
//! Every feature becomes one binary variable, in declaration order. The
//! objective is the utility of each feature; the tree, its groups and the
//! cross-tree constraints become linear constraints. Context rules only
//! shape utilities unless strict context constraints are requested.

mod bb;
mod exhaustive;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ccf::Ccf;
use crate::contribution::{utility_table, ContributionError, UtilityTable};
use crate::model::{GroupKind, Model, Relation, RuleKind};
use crate::scenario::ScenarioWeights;

pub use bb::{count_feasible, minimal_conflict, solve_bb, solve_bb_top_k, BbOptions};
pub use exhaustive::{count_feasible_exhaustive, solve_exhaustive, EXHAUSTIVE_CAP};

pub const DEFAULT_NODE_LIMIT: u64 = 10_000_000;
pub const NODE_LIMIT_ENV: &str = "TOFFA_NODE_LIMIT";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cmp {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
}

impl Cmp {
    pub fn symbol(self) -> &'static str {
        match self {
            Cmp::Le => "<=",
            Cmp::Ge => ">=",
            Cmp::Eq => "=",
        }
    }
}

/// Where a constraint comes from in the model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Origin {
    Root { feature: String },
    Mandatory { feature: String },
    Optional { feature: String },
    OrGroup { group: String },
    OrMember { group: String, feature: String },
    XorGroup { group: String },
    Requires { from: String, to: String },
    Excludes { a: String, b: String },
    ContextRequire { context: String, feature: String },
    ContextExclude { context: String, feature: String },
    Other { label: String },
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Root { feature } => write!(f, "root {feature}"),
            Origin::Mandatory { feature } => write!(f, "mandatory {feature}"),
            Origin::Optional { feature } => write!(f, "optional {feature}"),
            Origin::OrGroup { group } => write!(f, "or-group {group}"),
            Origin::OrMember { group, feature } => write!(f, "or-group {group} member {feature}"),
            Origin::XorGroup { group } => write!(f, "xor-group {group}"),
            Origin::Requires { from, to } => write!(f, "{from} requires {to}"),
            Origin::Excludes { a, b } => write!(f, "{a} excludes {b}"),
            Origin::ContextRequire { context, feature } => {
                write!(f, "context {context} requires {feature}")
            }
            Origin::ContextExclude { context, feature } => {
                write!(f, "context {context} excludes {feature}")
            }
            Origin::Other { label } => f.write_str(label),
        }
    }
}

/// `Σ coef·x (<=|>=|=) rhs`, with each variable at most once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearConstraint {
    pub terms: Vec<(i64, usize)>,
    pub cmp: Cmp,
    pub rhs: i64,
    pub origin: Origin,
}

impl LinearConstraint {
    /// Builds a constraint, merging repeated variables and dropping zero terms.
    pub fn new(terms: &[(i64, usize)], cmp: Cmp, rhs: i64, origin: Origin) -> Self {
        let mut merged: Vec<(i64, usize)> = Vec::new();
        for &(a, v) in terms {
            match merged.iter_mut().find(|(_, u)| *u == v) {
                Some(t) => t.0 += a,
                None => merged.push((a, v)),
            }
        }
        merged.retain(|(a, _)| *a != 0);
        LinearConstraint {
            terms: merged,
            cmp,
            rhs,
            origin,
        }
    }

    pub fn satisfied(&self, x: &[bool]) -> bool {
        let lhs: i64 = self
            .terms
            .iter()
            .filter(|(_, v)| x[*v])
            .map(|(a, _)| a)
            .sum();
        match self.cmp {
            Cmp::Le => lhs <= self.rhs,
            Cmp::Ge => lhs >= self.rhs,
            Cmp::Eq => lhs == self.rhs,
        }
    }

    pub fn render(&self, names: &[String]) -> String {
        let mut s = String::new();
        for (k, (a, v)) in self.terms.iter().enumerate() {
            let name = format!("X_{}", names[*v]);
            let mag = a.abs();
            let body = if mag == 1 {
                name
            } else {
                format!("{mag} {name}")
            };
            match (k, *a < 0) {
                (0, false) => s.push_str(&body),
                (0, true) => s.push_str(&format!("-{body}")),
                (_, false) => s.push_str(&format!(" + {body}")),
                (_, true) => s.push_str(&format!(" - {body}")),
            }
        }
        if s.is_empty() {
            s.push('0');
        }
        format!("{s} {} {}", self.cmp.symbol(), self.rhs)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IlpProblem {
    /// Variable names, one per feature.
    pub variables: Vec<String>,
    pub objective: Vec<f64>,
    pub constraints: Vec<LinearConstraint>,
}

impl IlpProblem {
    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    /// The objective of an assignment. Every solver scores through this one
    /// summation so equal assignments always get bit-identical values.
    pub fn objective_value(&self, x: &[bool]) -> f64 {
        let mut s = 0.0;
        for (c, &on) in self.objective.iter().zip(x) {
            if on {
                s += c;
            }
        }
        s
    }

    pub fn is_feasible(&self, x: &[bool]) -> bool {
        self.constraints.iter().all(|c| c.satisfied(x))
    }

    /// Slack below the incumbent within which a branch is still explored,
    /// so that ties are decided by the tie-break rather than rounding.
    pub(crate) fn slack(&self) -> f64 {
        1e-9 * (1.0 + self.objective.iter().map(|c| c.abs()).sum::<f64>())
    }

    /// Plain-text listing: an objective line `max ...`, then one line per
    /// constraint followed by its origin.
    pub fn dump(&self) -> String {
        let terms: Vec<String> = self
            .objective
            .iter()
            .zip(&self.variables)
            .filter(|(c, _)| **c != 0.0)
            .map(|(c, v)| format!("{c:+}·X_{v}"))
            .collect();
        let mut out = format!(
            "max {}\n",
            if terms.is_empty() {
                "0".to_string()
            } else {
                terms.join(" ")
            }
        );
        for c in &self.constraints {
            out.push_str(&format!("{} # {}\n", c.render(&self.variables), c.origin));
        }
        out
    }
}

/// Builds the program for `m` with the utilities of `u` as objective.
pub fn build_ilp(m: &Model, u: &UtilityTable) -> IlpProblem {
    let variables: Vec<String> = m.features.iter().map(|f| f.id.clone()).collect();
    let objective: Vec<f64> = m
        .features
        .iter()
        .map(|f| u.utility(&f.id).unwrap_or(0.0))
        .collect();
    let idx = |id: &str| m.feature_index(id).expect("validated model");
    let mut cs = Vec::new();
    for (i, f) in m.features.iter().enumerate() {
        let parent = f.parent.as_deref().map(idx);
        match (&f.relation, parent) {
            (Relation::Root, _) => cs.push(LinearConstraint::new(
                &[(1, i)],
                Cmp::Eq,
                1,
                Origin::Root {
                    feature: f.id.clone(),
                },
            )),
            (Relation::Mandatory, Some(p)) => cs.push(LinearConstraint::new(
                &[(1, i), (-1, p)],
                Cmp::Eq,
                0,
                Origin::Mandatory {
                    feature: f.id.clone(),
                },
            )),
            (Relation::Optional, Some(p)) => cs.push(LinearConstraint::new(
                &[(1, i), (-1, p)],
                Cmp::Le,
                0,
                Origin::Optional {
                    feature: f.id.clone(),
                },
            )),
            _ => {}
        }
    }
    for g in m.feature_groups() {
        let p = idx(&g.parent);
        let mut terms: Vec<(i64, usize)> = g.members.iter().map(|&c| (1, c)).collect();
        terms.push((-1, p));
        match g.kind {
            GroupKind::Or => {
                cs.push(LinearConstraint::new(
                    &terms,
                    Cmp::Ge,
                    0,
                    Origin::OrGroup {
                        group: g.id.clone(),
                    },
                ));
                for &c in &g.members {
                    cs.push(LinearConstraint::new(
                        &[(1, c), (-1, p)],
                        Cmp::Le,
                        0,
                        Origin::OrMember {
                            group: g.id.clone(),
                            feature: m.features[c].id.clone(),
                        },
                    ));
                }
            }
            GroupKind::Xor => cs.push(LinearConstraint::new(
                &terms,
                Cmp::Eq,
                0,
                Origin::XorGroup {
                    group: g.id.clone(),
                },
            )),
        }
    }
    for k in &m.constraints {
        let (a, b) = (idx(&k.a), idx(&k.b));
        cs.push(match k.kind {
            RuleKind::Require => LinearConstraint::new(
                &[(1, a), (-1, b)],
                Cmp::Le,
                0,
                Origin::Requires {
                    from: k.a.clone(),
                    to: k.b.clone(),
                },
            ),
            RuleKind::Exclude => LinearConstraint::new(
                &[(1, a), (1, b)],
                Cmp::Le,
                1,
                Origin::Excludes {
                    a: k.a.clone(),
                    b: k.b.clone(),
                },
            ),
        });
    }
    IlpProblem {
        variables,
        objective,
        constraints: cs,
    }
}

/// Adds the rules of the contexts active in `ccf` as hard constraints:
/// `X_f = 1` for requires and `X_f = 0` for excludes.
pub fn add_context_constraints(p: &mut IlpProblem, m: &Model, ccf: &Ccf) {
    for r in m.rules.iter().filter(|r| ccf.contains(&r.source)) {
        let Some(v) = m.feature_index(&r.target) else {
            continue;
        };
        let (rhs, origin) = match r.kind {
            RuleKind::Require => (
                1,
                Origin::ContextRequire {
                    context: r.source.clone(),
                    feature: r.target.clone(),
                },
            ),
            RuleKind::Exclude => (
                0,
                Origin::ContextExclude {
                    context: r.source.clone(),
                    feature: r.target.clone(),
                },
            ),
        };
        p.constraints
            .push(LinearConstraint::new(&[(1, v)], Cmp::Eq, rhs, origin));
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureState {
    pub feature: String,
    pub active: bool,
}

/// A full assignment with its objective value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub assignment: Vec<FeatureState>,
    pub objective: f64,
}

impl Configuration {
    pub fn from_bits(p: &IlpProblem, x: &[bool]) -> Self {
        Configuration {
            assignment: p
                .variables
                .iter()
                .zip(x)
                .map(|(v, &on)| FeatureState {
                    feature: v.clone(),
                    active: on,
                })
                .collect(),
            objective: p.objective_value(x),
        }
    }

    pub fn bits(&self) -> Vec<bool> {
        self.assignment.iter().map(|s| s.active).collect()
    }

    pub fn active(&self) -> Vec<&str> {
        self.assignment
            .iter()
            .filter(|s| s.active)
            .map(|s| s.feature.as_str())
            .collect()
    }

    pub fn is_active(&self, feature: &str) -> bool {
        self.assignment
            .iter()
            .any(|s| s.active && s.feature == feature)
    }

    /// `{f0, f1, ¬f2, ...}`
    pub fn notation(&self) -> String {
        let parts: Vec<String> = self
            .assignment
            .iter()
            .map(|s| {
                if s.active {
                    s.feature.clone()
                } else {
                    format!("¬{}", s.feature)
                }
            })
            .collect();
        format!("{{{}}}", parts.join(", "))
    }
}

/// Whether `a` beats `b`: larger objective, then the lexicographically
/// greater assignment in variable order (true > false).
pub(crate) fn better(a_obj: f64, a: &[bool], b_obj: f64, b: &[bool]) -> bool {
    if a_obj != b_obj {
        return a_obj > b_obj;
    }
    a > b
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConflictItem {
    pub index: usize,
    pub constraint: String,
    pub origin: Origin,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("infeasible: no configuration satisfies {}", describe_conflict(.conflict))]
    Infeasible { conflict: Vec<ConflictItem> },
    #[error("{n} variables exceed the exhaustive solver's cap of {cap}")]
    TooManyVariables { n: usize, cap: usize },
    #[error("search stopped after {limit} nodes without a proof of optimality")]
    NodeLimit { limit: u64 },
}

fn describe_conflict(c: &[ConflictItem]) -> String {
    if c.is_empty() {
        return "the constraints".to_string();
    }
    c.iter()
        .map(|i| format!("[{}] {}", i.origin, i.constraint))
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptimizeError {
    #[error(transparent)]
    Contribution(#[from] ContributionError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeOptions {
    pub strict_context: bool,
    pub node_limit: u64,
    pub top_k: usize,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        OptimizeOptions {
            strict_context: false,
            node_limit: DEFAULT_NODE_LIMIT,
            top_k: 1,
        }
    }
}

impl OptimizeOptions {
    /// Defaults, with the node limit taken from `TOFFA_NODE_LIMIT` if set.
    pub fn from_env() -> Self {
        let node_limit = std::env::var(NODE_LIMIT_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .unwrap_or(DEFAULT_NODE_LIMIT);
        OptimizeOptions {
            node_limit,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    pub configuration: Configuration,
    /// The best `top_k` configurations, best first; starts with `configuration`.
    pub ranked: Vec<Configuration>,
    pub utilities: UtilityTable,
    pub problem: IlpProblem,
}

pub fn build_problem(
    m: &Model,
    w: &ScenarioWeights,
    ccf: Option<&Ccf>,
    opts: &OptimizeOptions,
) -> Result<(IlpProblem, UtilityTable), ContributionError> {
    let u = utility_table(m, w, ccf)?;
    let mut p = build_ilp(m, &u);
    if let (true, Some(c)) = (opts.strict_context, ccf) {
        add_context_constraints(&mut p, m, c);
    }
    Ok((p, u))
}

/// The best configuration of `m` under `w`, with utilities restricted to
/// the contexts of `ccf` when one is given.
pub fn optimal_configuration(
    m: &Model,
    w: &ScenarioWeights,
    ccf: Option<&Ccf>,
    opts: &OptimizeOptions,
) -> Result<Optimum, OptimizeError> {
    let (p, u) = build_problem(m, w, ccf, opts)?;
    let bb = BbOptions {
        node_limit: opts.node_limit,
    };
    let ranked = solve_bb_top_k(&p, opts.top_k.max(1), &bb)?;
    Ok(Optimum {
        configuration: ranked[0].clone(),
        ranked,
        utilities: u,
        problem: p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_model;

    fn tiny() -> Model {
        parse_model(
            "feature f0 \"R\" root\nfeature f1 \"M\" mandatory of f0\n\
             feature f2 \"O\" optional of f1\ngroup g or of f0 { f3 \"A\", f4 \"B\" }\n\
             group h xor of f1 { f5 \"C\", f6 \"D\" }\nconstraint f2 requires f5\n\
             constraint f3 excludes f6\n",
        )
        .unwrap()
    }

    fn zero_table(m: &Model) -> UtilityTable {
        UtilityTable {
            ccf: None,
            rows: m
                .features
                .iter()
                .map(|f| crate::contribution::UtilityRow {
                    feature: f.id.clone(),
                    variable: f.is_variable(),
                    cont_c: 0.0,
                    cont_g: 0.0,
                    cont_sg: 0.0,
                    utility: 0.0,
                })
                .collect(),
        }
    }

    #[test]
    fn encoding_matches_semantics() {
        let m = tiny();
        let p = build_ilp(&m, &zero_table(&m));
        let text = p.dump();
        assert!(text.contains("X_f0 = 1"), "{text}");
        assert!(text.contains("X_f1 - X_f0 = 0"));
        assert!(text.contains("X_f2 - X_f1 <= 0"));
        assert!(text.contains("X_f3 + X_f4 - X_f0 >= 0"));
        assert!(text.contains("X_f3 - X_f0 <= 0"));
        assert!(text.contains("X_f5 + X_f6 - X_f1 = 0"));
        assert!(text.contains("X_f2 - X_f5 <= 0"));
        assert!(text.contains("X_f3 + X_f6 <= 1"));
        // R, M, then (f2 free unless f5), or-group nonempty, xor member.
        // f5: f2 in {0,1}, or-group 3 subsets -> 6; f6: f2 = 0, f3 = 0 -> f4 only -> 1.
        assert_eq!(count_feasible_exhaustive(&p).unwrap(), 7);
    }

    #[test]
    fn constraint_terms_merge() {
        let c = LinearConstraint::new(
            &[(1, 0), (1, 0), (-1, 1), (1, 1)],
            Cmp::Le,
            1,
            Origin::Other { label: "t".into() },
        );
        assert_eq!(c.terms, vec![(2, 0)]);
    }

    #[test]
    fn tie_break_prefers_active_features_early() {
        assert!(better(1.0, &[true, false], 1.0, &[false, true]));
        assert!(!better(1.0, &[false, true], 1.0, &[true, false]));
        assert!(better(2.0, &[false], 1.0, &[true]));
    }

    #[test]
    fn notation_marks_inactive_features() {
        let m = tiny();
        let p = build_ilp(&m, &zero_table(&m));
        let c = Configuration::from_bits(&p, &[true, true, false, true, false, true, false]);
        assert_eq!(c.notation(), "{f0, f1, ¬f2, f3, ¬f4, f5, ¬f6}");
        assert_eq!(c.active(), vec!["f0", "f1", "f3", "f5"]);
    }
}
