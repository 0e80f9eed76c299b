//! Contribution degrees and per-feature utility values.
//!
//! A variable feature gathers value from three sources:
//!
//! * goals: the rank of the goal its hard goal refines, times the hard
//!   goal's satisfaction value (1 under OR, 1/m under an AND of m);
//! * contexts: for every rule targeting it, the rank of the rule's context
//!   group times +1 (requires) or -1 (excludes);
//! * soft goals: for every link of its hard goal, the soft goal's importance
//!   times the link's satisfaction level.
//!
//! Non-variable features always have utility 0.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ccf::Ccf;
use crate::model::{Decomposition, Model};
use crate::scenario::ScenarioWeights;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContributionError {
    #[error("no weight for {0}")]
    MissingWeight(String),
    #[error("unknown hard goal {0}")]
    UnknownHardGoal(String),
    #[error("unknown context {0}")]
    UnknownContext(String),
}

/// Satisfaction value of a hard goal within its goal's decomposition.
pub fn hardgoal_sat_value(m: &Model, hardgoal: &str) -> Result<f64, ContributionError> {
    let h = m
        .goals
        .hardgoals
        .iter()
        .find(|h| h.id == hardgoal)
        .ok_or_else(|| ContributionError::UnknownHardGoal(hardgoal.to_string()))?;
    Ok(match h.decomposition {
        Decomposition::Or => 1.0,
        Decomposition::And => {
            let siblings = m
                .goals
                .hardgoals
                .iter()
                .filter(|g| g.goal == h.goal)
                .count();
            1.0 / siblings as f64
        }
    })
}

/// Satisfaction value of a context within its group. Every group kind
/// contributes its members in full.
pub fn context_sat_value(m: &Model, context: &str) -> Result<f64, ContributionError> {
    m.context(context)
        .map(|_| 1.0)
        .ok_or_else(|| ContributionError::UnknownContext(context.to_string()))
}

fn weight(w: &crate::prioritization::WeightAssignment, id: &str) -> Result<f64, ContributionError> {
    w.get(id)
        .ok_or_else(|| ContributionError::MissingWeight(id.to_string()))
}

pub fn cont_goal(m: &Model, feature: &str, w: &ScenarioWeights) -> Result<f64, ContributionError> {
    let Some(h) = m.hardgoal_for_feature(feature) else {
        return Ok(0.0);
    };
    Ok(weight(&w.goals, &h.goal)? * hardgoal_sat_value(m, &h.id)?)
}

/// Context contribution, counting only rules whose context is in `restrict`
/// when one is given.
pub fn cont_context(
    m: &Model,
    feature: &str,
    w: &ScenarioWeights,
    restrict: Option<&Ccf>,
) -> Result<f64, ContributionError> {
    let mut sum = 0.0;
    for r in m.rules.iter().filter(|r| r.target == feature) {
        if restrict.is_some_and(|c| !c.contains(&r.source)) {
            continue;
        }
        let ctx = m
            .context(&r.source)
            .ok_or_else(|| ContributionError::UnknownContext(r.source.clone()))?;
        sum += weight(&w.contexts, &ctx.group)? * context_sat_value(m, &ctx.id)? * r.kind.impact();
    }
    Ok(sum)
}

pub fn cont_softgoal(
    m: &Model,
    feature: &str,
    w: &ScenarioWeights,
) -> Result<f64, ContributionError> {
    let Some(h) = m.hardgoal_for_feature(feature) else {
        return Ok(0.0);
    };
    let mut sum = 0.0;
    for l in m.goals.links.iter().filter(|l| l.hardgoal == h.id) {
        sum += weight(&w.softgoals, &l.softgoal)? * l.level.value();
    }
    Ok(sum)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityRow {
    pub feature: String,
    pub variable: bool,
    #[serde(rename = "contC")]
    pub cont_c: f64,
    #[serde(rename = "contG")]
    pub cont_g: f64,
    #[serde(rename = "contSG")]
    pub cont_sg: f64,
    pub utility: f64,
}

/// One row per feature, in declaration order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityTable {
    pub ccf: Option<String>,
    pub rows: Vec<UtilityRow>,
}

impl UtilityTable {
    pub fn row(&self, feature: &str) -> Option<&UtilityRow> {
        self.rows.iter().find(|r| r.feature == feature)
    }

    pub fn utility(&self, feature: &str) -> Option<f64> {
        self.row(feature).map(|r| r.utility)
    }

    pub fn utilities(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.utility).collect()
    }
}

pub fn utility_table(
    m: &Model,
    w: &ScenarioWeights,
    restrict: Option<&Ccf>,
) -> Result<UtilityTable, ContributionError> {
    let mut rows = Vec::with_capacity(m.features.len());
    for f in &m.features {
        let row = if f.is_variable() {
            let cont_c = cont_context(m, &f.id, w, restrict)?;
            let cont_g = cont_goal(m, &f.id, w)?;
            let cont_sg = cont_softgoal(m, &f.id, w)?;
            UtilityRow {
                feature: f.id.clone(),
                variable: true,
                cont_c,
                cont_g,
                cont_sg,
                utility: cont_c + cont_g + cont_sg,
            }
        } else {
            UtilityRow {
                feature: f.id.clone(),
                variable: false,
                cont_c: 0.0,
                cont_g: 0.0,
                cont_sg: 0.0,
                utility: 0.0,
            }
        };
        rows.push(row);
    }
    Ok(UtilityTable {
        ccf: restrict.map(|c| c.id.clone()),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_model;
    use crate::scenario::{scenario_weights, Scenario};

    const SRC: &str = "feature f0 \"R\" root\n\
        feature f1 \"T\" mandatory of f0\n\
        group x xor of f1 { f2 \"A\", f3 \"B\" }\n\
        feature f4 \"O\" optional of f0\n\
        contextgroup c2 \"S\" xor\ncontext c3 \"E\" in c2\ncontext c4 \"N\" in c2\n\
        rule c3 requires f2\nrule c4 excludes f2\nrule c3 requires f1\n\
        goal g1 \"G\"\ngoal g2 \"H\"\n\
        hardgoal hg1 of g1 or binds f2\nhardgoal hg2 of g1 or binds f3\n\
        hardgoal hg3 of g2 and binds f4\n\
        softgoal sg1 \"E\"\nsoftgoal sg2 \"F\"\n\
        link hg1 sg1 ++\nlink hg1 sg2 -\nlink hg3 sg2 +\n";

    fn setup() -> (Model, ScenarioWeights) {
        let m = parse_model(SRC).unwrap();
        let w = scenario_weights(
            &m,
            &Scenario::ordered("s", &["g1", "g2"], &["c2"], &["sg1", "sg2"]),
        )
        .unwrap();
        (m, w)
    }

    #[test]
    fn sat_values() {
        let (m, _) = setup();
        assert_eq!(hardgoal_sat_value(&m, "hg1").unwrap(), 1.0);
        // hg3 is the only hard goal of its AND goal.
        assert_eq!(hardgoal_sat_value(&m, "hg3").unwrap(), 1.0);
        assert_eq!(context_sat_value(&m, "c3").unwrap(), 1.0);
        assert!(hardgoal_sat_value(&m, "nope").is_err());
    }

    #[test]
    fn contributions_sum_into_utility() {
        let (m, w) = setup();
        let t = utility_table(&m, &w, None).unwrap();
        let f2 = t.row("f2").unwrap();
        // c3 requires and c4 excludes: the group rank cancels out.
        assert_eq!(f2.cont_c, 0.0);
        assert_eq!(f2.cont_g, 0.5);
        // Order sg1 > sg2 gives importance (3/4, 1/4).
        assert!((f2.cont_sg - (0.75 - 0.125)).abs() < 1e-12);
        assert_eq!(f2.utility, f2.cont_c + f2.cont_g + f2.cont_sg);
        assert_eq!(t.utility("f3"), Some(0.5));
        assert!((t.utility("f4").unwrap() - (1.0 / 3.0 + 0.125)).abs() < 1e-12);
        for r in t.rows.iter().filter(|r| !r.variable) {
            assert_eq!(r.utility, 0.0);
        }
    }

    #[test]
    fn restriction_drops_inactive_contexts() {
        let (m, w) = setup();
        let c3 = Ccf {
            id: "k".into(),
            members: vec!["c3".into()],
        };
        let t = utility_table(&m, &w, Some(&c3)).unwrap();
        assert_eq!(t.row("f2").unwrap().cont_c, 0.5);
        assert_eq!(t.ccf.as_deref(), Some("k"));
        let empty = Ccf {
            id: "e".into(),
            members: vec![],
        };
        assert_eq!(
            utility_table(&m, &w, Some(&empty))
                .unwrap()
                .row("f2")
                .unwrap()
                .cont_c,
            0.0
        );
    }

    #[test]
    fn and_decomposition_splits_satisfaction() {
        let m = parse_model(
            "feature f0 \"R\" root\ngroup x or of f0 { f1 \"A\", f2 \"B\", f3 \"C\" }\n\
             goal g1 \"G\"\nhardgoal h1 of g1 and binds f1\nhardgoal h2 of g1 and binds f2\n\
             hardgoal h3 of g1 and binds f3\n",
        )
        .unwrap();
        assert!((hardgoal_sat_value(&m, "h2").unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let w = scenario_weights(&m, &Scenario::equal("e")).unwrap();
        assert!((cont_goal(&m, "f1", &w).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }
}
