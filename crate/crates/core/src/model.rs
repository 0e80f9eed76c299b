//! Domain types for the unified product-line model: the context-aware feature
//! model, the goal model, and the context Kripke structure.
//!
//! A [`Model`] is plain data. Declaration order is significant: the i-th
//! declared feature gets index i, and every tie-break downstream reads
//! features in that order.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::diag::{Diagnostic, Severity};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroupKind {
    Xor,
    Or,
}

impl GroupKind {
    pub fn keyword(self) -> &'static str {
        match self {
            GroupKind::Xor => "xor",
            GroupKind::Or => "or",
        }
    }
}

/// How a feature hangs off its parent.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "group", rename_all = "kebab-case")]
pub enum Relation {
    Root,
    Mandatory,
    Optional,
    OrMember(String),
    XorMember(String),
}

impl Relation {
    pub fn group(&self) -> Option<(&str, GroupKind)> {
        match self {
            Relation::OrMember(g) => Some((g, GroupKind::Or)),
            Relation::XorMember(g) => Some((g, GroupKind::Xor)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Feature {
    pub id: String,
    pub name: String,
    pub parent: Option<String>,
    pub relation: Relation,
}

impl Feature {
    /// Optional features and group members vary; root and mandatory features do not.
    pub fn is_variable(&self) -> bool {
        matches!(
            self.relation,
            Relation::Optional | Relation::OrMember(_) | Relation::XorMember(_)
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContextGroupKind {
    Xor,
    Or,
    Optional,
}

impl ContextGroupKind {
    pub fn keyword(self) -> &'static str {
        match self {
            ContextGroupKind::Xor => "xor",
            ContextGroupKind::Or => "or",
            ContextGroupKind::Optional => "optional",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextGroup {
    pub id: String,
    pub name: String,
    pub kind: ContextGroupKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextFeature {
    pub id: String,
    pub name: String,
    pub group: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleKind {
    Require,
    Exclude,
}

impl RuleKind {
    pub fn keyword(self) -> &'static str {
        match self {
            RuleKind::Require => "requires",
            RuleKind::Exclude => "excludes",
        }
    }

    /// Impact degree of the rule on the target feature's context contribution.
    pub fn impact(self) -> f64 {
        match self {
            RuleKind::Require => 1.0,
            RuleKind::Exclude => -1.0,
        }
    }
}

/// A context feature requiring or excluding a system feature.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdaptationRule {
    pub source: String,
    pub target: String,
    pub kind: RuleKind,
}

/// Cross-tree constraint between two system features.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureConstraint {
    pub a: String,
    pub b: String,
    pub kind: RuleKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Goal {
    pub id: String,
    pub name: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Decomposition {
    And,
    Or,
}

impl Decomposition {
    pub fn keyword(self) -> &'static str {
        match self {
            Decomposition::And => "and",
            Decomposition::Or => "or",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HardGoal {
    pub id: String,
    pub goal: String,
    pub decomposition: Decomposition,
    pub feature: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SoftGoal {
    pub id: String,
    pub name: String,
}

/// Qualitative satisfaction of a soft goal by a hard goal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SatisfactionLevel {
    #[serde(rename = "++")]
    Satisfied,
    #[serde(rename = "+")]
    WeaklySatisfied,
    #[serde(rename = "?")]
    Undecided,
    #[serde(rename = "-")]
    WeaklyDenied,
    #[serde(rename = "--")]
    Denied,
}

impl SatisfactionLevel {
    pub const ALL: [SatisfactionLevel; 5] = [
        SatisfactionLevel::Satisfied,
        SatisfactionLevel::WeaklySatisfied,
        SatisfactionLevel::Undecided,
        SatisfactionLevel::WeaklyDenied,
        SatisfactionLevel::Denied,
    ];

    pub fn value(self) -> f64 {
        match self {
            SatisfactionLevel::Satisfied => 1.0,
            SatisfactionLevel::WeaklySatisfied => 0.5,
            SatisfactionLevel::Undecided => 0.0,
            SatisfactionLevel::WeaklyDenied => -0.5,
            SatisfactionLevel::Denied => -1.0,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            SatisfactionLevel::Satisfied => "++",
            SatisfactionLevel::WeaklySatisfied => "+",
            SatisfactionLevel::Undecided => "?",
            SatisfactionLevel::WeaklyDenied => "-",
            SatisfactionLevel::Denied => "--",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|l| l.symbol() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SoftGoalLink {
    pub hardgoal: String,
    pub softgoal: String,
    pub level: SatisfactionLevel,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoalModel {
    pub goals: Vec<Goal>,
    pub hardgoals: Vec<HardGoal>,
    pub softgoals: Vec<SoftGoal>,
    pub links: Vec<SoftGoalLink>,
}

impl GoalModel {
    pub fn is_empty(&self) -> bool {
        self.goals.is_empty()
            && self.hardgoals.is_empty()
            && self.softgoals.is_empty()
            && self.links.is_empty()
    }
}

/// A named combination of context features, as declared in the model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CcfDecl {
    pub id: String,
    pub members: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cks {
    pub states: Vec<CcfDecl>,
    pub initial: Option<String>,
    pub transitions: Vec<(String, String)>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Model {
    pub name: String,
    pub features: Vec<Feature>,
    pub context_groups: Vec<ContextGroup>,
    pub contexts: Vec<ContextFeature>,
    pub rules: Vec<AdaptationRule>,
    pub constraints: Vec<FeatureConstraint>,
    pub goals: GoalModel,
    pub cks: Option<Cks>,
}

/// A feature group derived from the members' relations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureGroup {
    pub id: String,
    pub kind: GroupKind,
    pub parent: String,
    pub members: Vec<usize>,
}

/// The kind of thing an identifier names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IdKind {
    Feature,
    FeatureGroup,
    ContextGroup,
    Context,
    Goal,
    HardGoal,
    SoftGoal,
    Ccf,
}

impl fmt::Display for IdKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IdKind::Feature => "feature",
            IdKind::FeatureGroup => "feature group",
            IdKind::ContextGroup => "context group",
            IdKind::Context => "context feature",
            IdKind::Goal => "goal",
            IdKind::HardGoal => "hard goal",
            IdKind::SoftGoal => "soft goal",
            IdKind::Ccf => "ccf",
        })
    }
}

/// A structural defect: something that makes the model unusable as a whole.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StructuralIssue {
    Duplicate {
        id: String,
    },
    Dangling {
        id: String,
        expected: IdKind,
        from: String,
    },
    Invariant {
        id: String,
        message: String,
    },
}

impl StructuralIssue {
    pub fn subject(&self) -> &str {
        match self {
            StructuralIssue::Duplicate { id } => id,
            StructuralIssue::Dangling { from, .. } => from,
            StructuralIssue::Invariant { id, .. } => id,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            StructuralIssue::Duplicate { .. } => "duplicate-id",
            StructuralIssue::Dangling { .. } => "dangling-reference",
            StructuralIssue::Invariant { .. } => "invariant",
        }
    }

    pub fn to_diagnostic(&self) -> Diagnostic {
        let subjects = match self {
            StructuralIssue::Dangling { id, from, .. } => vec![from.clone(), id.clone()],
            other => vec![other.subject().to_string()],
        };
        Diagnostic::new(self.code(), Severity::Error, subjects, self.to_string())
    }
}

impl fmt::Display for StructuralIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StructuralIssue::Duplicate { id } => write!(f, "duplicate id {id}"),
            StructuralIssue::Dangling { id, expected, .. } => {
                write!(f, "dangling reference {id} (expected a {expected})")
            }
            StructuralIssue::Invariant { id, message } => write!(f, "{id}: {message}"),
        }
    }
}

impl Model {
    pub fn feature_index(&self, id: &str) -> Option<usize> {
        self.features.iter().position(|f| f.id == id)
    }

    pub fn feature(&self, id: &str) -> Option<&Feature> {
        self.features.iter().find(|f| f.id == id)
    }

    pub fn context(&self, id: &str) -> Option<&ContextFeature> {
        self.contexts.iter().find(|c| c.id == id)
    }

    pub fn context_index(&self, id: &str) -> Option<usize> {
        self.contexts.iter().position(|c| c.id == id)
    }

    pub fn context_group(&self, id: &str) -> Option<&ContextGroup> {
        self.context_groups.iter().find(|g| g.id == id)
    }

    /// Context features of a group, in declaration order.
    pub fn group_contexts<'a>(
        &'a self,
        group: &'a str,
    ) -> impl Iterator<Item = &'a ContextFeature> {
        self.contexts.iter().filter(move |c| c.group == group)
    }

    pub fn root_index(&self) -> Option<usize> {
        self.features
            .iter()
            .position(|f| f.relation == Relation::Root)
    }

    pub fn children(&self, parent: &str) -> impl Iterator<Item = (usize, &Feature)> {
        let parent = parent.to_string();
        self.features
            .iter()
            .enumerate()
            .filter(move |(_, f)| f.parent.as_deref() == Some(parent.as_str()))
    }

    /// Feature groups in order of their first member.
    pub fn feature_groups(&self) -> Vec<FeatureGroup> {
        let mut groups: Vec<FeatureGroup> = Vec::new();
        for (i, f) in self.features.iter().enumerate() {
            if let Some((gid, kind)) = f.relation.group() {
                match groups.iter_mut().find(|g| g.id == gid) {
                    Some(g) => g.members.push(i),
                    None => groups.push(FeatureGroup {
                        id: gid.to_string(),
                        kind,
                        parent: f.parent.clone().unwrap_or_default(),
                        members: vec![i],
                    }),
                }
            }
        }
        groups
    }

    pub fn hardgoal_for_feature(&self, feature: &str) -> Option<&HardGoal> {
        self.goals.hardgoals.iter().find(|h| h.feature == feature)
    }

    pub fn ancestors(&self, feature: &str) -> Vec<String> {
        let mut out = Vec::new();
        let mut cur = self.feature(feature).and_then(|f| f.parent.clone());
        while let Some(p) = cur {
            if out.contains(&p) {
                break;
            }
            cur = self.feature(&p).and_then(|f| f.parent.clone());
            out.push(p);
        }
        out
    }

    /// Every declared identifier with its kind, in declaration order.
    pub fn declared_ids(&self) -> Vec<(&str, IdKind)> {
        let mut ids: Vec<(&str, IdKind)> = Vec::new();
        let mut seen_groups = HashSet::new();
        for f in &self.features {
            ids.push((&f.id, IdKind::Feature));
            if let Some((g, _)) = f.relation.group() {
                if seen_groups.insert(g) {
                    ids.push((g, IdKind::FeatureGroup));
                }
            }
        }
        ids.extend(
            self.context_groups
                .iter()
                .map(|g| (g.id.as_str(), IdKind::ContextGroup)),
        );
        ids.extend(
            self.contexts
                .iter()
                .map(|c| (c.id.as_str(), IdKind::Context)),
        );
        ids.extend(
            self.goals
                .goals
                .iter()
                .map(|g| (g.id.as_str(), IdKind::Goal)),
        );
        ids.extend(
            self.goals
                .hardgoals
                .iter()
                .map(|h| (h.id.as_str(), IdKind::HardGoal)),
        );
        ids.extend(
            self.goals
                .softgoals
                .iter()
                .map(|s| (s.id.as_str(), IdKind::SoftGoal)),
        );
        if let Some(cks) = &self.cks {
            ids.extend(cks.states.iter().map(|s| (s.id.as_str(), IdKind::Ccf)));
        }
        ids
    }

    /// Checks the type invariants that make a model structurally usable:
    /// unique ids, resolvable references, a single-rooted feature tree,
    /// well-formed groups, and non-contradictory rules.
    pub fn structural_issues(&self) -> Vec<StructuralIssue> {
        let mut issues = Vec::new();
        let ids = self.declared_ids();
        let mut kinds: HashMap<&str, IdKind> = HashMap::new();
        for (id, kind) in &ids {
            if kinds.insert(id, *kind).is_some() {
                issues.push(StructuralIssue::Duplicate { id: id.to_string() });
            }
        }
        let resolve =
            |issues: &mut Vec<StructuralIssue>, id: &str, expected: IdKind, from: &str| -> bool {
                if kinds.get(id) == Some(&expected) {
                    true
                } else {
                    issues.push(StructuralIssue::Dangling {
                        id: id.to_string(),
                        expected,
                        from: from.to_string(),
                    });
                    false
                }
            };

        // Feature tree.
        let roots: Vec<&Feature> = self
            .features
            .iter()
            .filter(|f| f.relation == Relation::Root)
            .collect();
        match roots.len() {
            0 if !self.features.is_empty() => issues.push(StructuralIssue::Invariant {
                id: self.features[0].id.clone(),
                message: "feature model has no root".into(),
            }),
            0 => issues.push(StructuralIssue::Invariant {
                id: self.name.clone(),
                message: "model declares no features".into(),
            }),
            1 => {}
            _ => issues.push(StructuralIssue::Invariant {
                id: roots[1].id.clone(),
                message: "more than one root feature".into(),
            }),
        }
        for f in &self.features {
            match (&f.relation, &f.parent) {
                (Relation::Root, Some(_)) => issues.push(StructuralIssue::Invariant {
                    id: f.id.clone(),
                    message: "root feature cannot have a parent".into(),
                }),
                (Relation::Root, None) => {}
                (_, None) => issues.push(StructuralIssue::Invariant {
                    id: f.id.clone(),
                    message: "non-root feature needs a parent".into(),
                }),
                (_, Some(p)) => {
                    resolve(&mut issues, p, IdKind::Feature, &f.id);
                }
            }
        }
        for f in &self.features {
            let mut seen = HashSet::new();
            let mut cur = f.parent.as_deref();
            while let Some(p) = cur {
                if p == f.id || !seen.insert(p) {
                    issues.push(StructuralIssue::Invariant {
                        id: f.id.clone(),
                        message: "feature hierarchy contains a cycle".into(),
                    });
                    break;
                }
                cur = self.feature(p).and_then(|x| x.parent.as_deref());
            }
        }
        for g in self.feature_groups() {
            let parents: HashSet<Option<&str>> = g
                .members
                .iter()
                .map(|&i| self.features[i].parent.as_deref())
                .collect();
            if g.members.len() < 2 {
                issues.push(StructuralIssue::Invariant {
                    id: g.id.clone(),
                    message: "a feature group needs at least two members".into(),
                });
            }
            if parents.len() > 1 {
                issues.push(StructuralIssue::Invariant {
                    id: g.id.clone(),
                    message: "group members must share one parent".into(),
                });
            }
            let kinds: HashSet<GroupKind> = g
                .members
                .iter()
                .filter_map(|&i| self.features[i].relation.group().map(|(_, k)| k))
                .collect();
            if kinds.len() > 1 {
                issues.push(StructuralIssue::Invariant {
                    id: g.id.clone(),
                    message: "group mixes xor and or members".into(),
                });
            }
            let contiguous = g.members.windows(2).all(|w| w[1] == w[0] + 1);
            if !contiguous {
                issues.push(StructuralIssue::Invariant {
                    id: g.id.clone(),
                    message: "group members must be declared contiguously".into(),
                });
            }
        }

        // Contexts.
        for c in &self.contexts {
            resolve(&mut issues, &c.group, IdKind::ContextGroup, &c.id);
        }
        for g in &self.context_groups {
            let n = self.group_contexts(&g.id).count();
            if n == 0 {
                issues.push(StructuralIssue::Invariant {
                    id: g.id.clone(),
                    message: "context group contains no context features".into(),
                });
            } else if n < 2 && g.kind == ContextGroupKind::Xor {
                issues.push(StructuralIssue::Invariant {
                    id: g.id.clone(),
                    message: "xor context group needs at least two context features".into(),
                });
            }
        }
        let mut rule_pairs: HashSet<(&str, &str)> = HashSet::new();
        for r in &self.rules {
            let from = format!("rule {} {} {}", r.source, r.kind.keyword(), r.target);
            resolve(&mut issues, &r.source, IdKind::Context, &from);
            resolve(&mut issues, &r.target, IdKind::Feature, &from);
            if !rule_pairs.insert((&r.source, &r.target)) {
                issues.push(StructuralIssue::Invariant {
                    id: r.source.clone(),
                    message: format!("more than one rule between {} and {}", r.source, r.target),
                });
            }
        }
        for c in &self.constraints {
            let from = format!("constraint {} {} {}", c.a, c.kind.keyword(), c.b);
            resolve(&mut issues, &c.a, IdKind::Feature, &from);
            resolve(&mut issues, &c.b, IdKind::Feature, &from);
            if c.a == c.b {
                issues.push(StructuralIssue::Invariant {
                    id: c.a.clone(),
                    message: "a constraint must relate two distinct features".into(),
                });
            }
        }

        // Goal model.
        for h in &self.goals.hardgoals {
            resolve(&mut issues, &h.goal, IdKind::Goal, &h.id);
            resolve(&mut issues, &h.feature, IdKind::Feature, &h.id);
        }
        let mut link_pairs: HashSet<(&str, &str)> = HashSet::new();
        for l in &self.goals.links {
            let from = format!("link {} {}", l.hardgoal, l.softgoal);
            resolve(&mut issues, &l.hardgoal, IdKind::HardGoal, &from);
            resolve(&mut issues, &l.softgoal, IdKind::SoftGoal, &from);
            if !link_pairs.insert((&l.hardgoal, &l.softgoal)) {
                issues.push(StructuralIssue::Invariant {
                    id: l.hardgoal.clone(),
                    message: format!(
                        "more than one link between {} and {}",
                        l.hardgoal, l.softgoal
                    ),
                });
            }
        }

        // C-KS.
        if let Some(cks) = &self.cks {
            for s in &cks.states {
                let mut seen = HashSet::new();
                for m in &s.members {
                    resolve(&mut issues, m, IdKind::Context, &s.id);
                    if !seen.insert(m) {
                        issues.push(StructuralIssue::Invariant {
                            id: s.id.clone(),
                            message: format!("context {m} listed twice"),
                        });
                    }
                }
            }
            if let Some(init) = &cks.initial {
                resolve(&mut issues, init, IdKind::Ccf, "initial");
            }
            for (a, b) in &cks.transitions {
                let from = format!("transition {a} -> {b}");
                resolve(&mut issues, a, IdKind::Ccf, &from);
                resolve(&mut issues, b, IdKind::Ccf, &from);
            }
        }
        issues
    }

    /// Context feature ids grouped by context group, both in declaration order.
    pub fn contexts_by_group(&self) -> BTreeMap<usize, Vec<usize>> {
        let mut out: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (ci, c) in self.contexts.iter().enumerate() {
            if let Some(gi) = self.context_groups.iter().position(|g| g.id == c.group) {
                out.entry(gi).or_default().push(ci);
            }
        }
        out
    }
}
