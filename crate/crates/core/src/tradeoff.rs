//! Scenario runs across every context state and the adaptation models
//! built from them.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ccf::{analysis_ccfs, Ccf, CcfError};
use crate::contribution::ContributionError;
use crate::model::Model;
use crate::optimizer::{
    build_problem, count_feasible, solve_bb_top_k, BbOptions, Configuration, ConflictItem,
    FeatureState, OptimizeOptions, SolverError,
};
use crate::scenario::{scenario_weights, Scenario, ScenarioError, ScenarioWeights};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TradeoffError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Ccf(#[from] CcfError),
    #[error(transparent)]
    Contribution(#[from] ContributionError),
    #[error("ccf {ccf}: {source}")]
    Solver {
        ccf: String,
        #[source]
        source: SolverError,
    },
    #[error("comparison needs at least two scenarios")]
    TooFewScenarios,
    #[error("model has no context Kripke structure")]
    NoCks,
    #[error("result has no configuration for C-KS state {0}")]
    StateMismatch(String),
    #[error("unknown configuration label {0}")]
    UnknownLabel(String),
}

/// A distinct configuration within one result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledConfiguration {
    pub label: String,
    pub active: Vec<String>,
    pub assignment: Vec<FeatureState>,
}

impl LabeledConfiguration {
    pub fn notation(&self) -> String {
        Configuration {
            assignment: self.assignment.clone(),
            objective: 0.0,
        }
        .notation()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CcfOutcome {
    pub ccf: String,
    pub members: Vec<String>,
    /// Label of the winning configuration; `None` when infeasible.
    pub label: Option<String>,
    pub objective: Option<f64>,
    pub feasible_count: Option<u64>,
    /// Runner-up configurations when more than one was requested, best first.
    pub alternatives: Vec<Configuration>,
    pub conflict: Vec<ConflictItem>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeoffResult {
    pub scenario: String,
    pub entries: Vec<CcfOutcome>,
    pub configurations: Vec<LabeledConfiguration>,
}

impl TradeoffResult {
    pub fn label_of(&self, ccf: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|e| e.ccf == ccf)
            .and_then(|e| e.label.as_deref())
    }

    pub fn configuration(&self, label: &str) -> Option<&LabeledConfiguration> {
        self.configurations.iter().find(|c| c.label == label)
    }

    /// `(ccf, label)` pairs for every feasible CCF, in run order.
    pub fn ccf_map(&self) -> Vec<(String, String)> {
        self.entries
            .iter()
            .filter_map(|e| Some((e.ccf.clone(), e.label.clone()?)))
            .collect()
    }

    /// Assigns labels F1, F2, ... to distinct winning assignments in order
    /// of first appearance.
    pub fn from_outcomes(
        scenario: &str,
        solved: Vec<(Ccf, Result<CcfSolve, SolverError>)>,
    ) -> Self {
        let mut configurations: Vec<LabeledConfiguration> = Vec::new();
        let mut entries = Vec::new();
        for (ccf, r) in solved {
            let mut e = CcfOutcome {
                ccf: ccf.id.clone(),
                members: ccf.members.clone(),
                label: None,
                objective: None,
                feasible_count: None,
                alternatives: Vec::new(),
                conflict: Vec::new(),
            };
            match r {
                Ok(s) => {
                    let best = &s.ranked[0];
                    let label = match configurations
                        .iter()
                        .find(|c| c.assignment == best.assignment)
                    {
                        Some(c) => c.label.clone(),
                        None => {
                            let label = format!("F{}", configurations.len() + 1);
                            configurations.push(LabeledConfiguration {
                                label: label.clone(),
                                active: best.active().iter().map(|s| s.to_string()).collect(),
                                assignment: best.assignment.clone(),
                            });
                            label
                        }
                    };
                    e.label = Some(label);
                    e.objective = Some(best.objective);
                    e.feasible_count = s.feasible_count;
                    e.alternatives = s.ranked[1..].to_vec();
                }
                Err(SolverError::Infeasible { conflict }) => e.conflict = conflict,
                Err(_) => {}
            }
            entries.push(e);
        }
        TradeoffResult {
            scenario: scenario.to_string(),
            entries,
            configurations,
        }
    }
}

/// The solver's answer for one CCF.
#[derive(Debug, Clone, PartialEq)]
pub struct CcfSolve {
    pub ranked: Vec<Configuration>,
    pub feasible_count: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub optimize: OptimizeOptions,
    /// Also count feasible configurations per CCF.
    pub count_feasible: bool,
    pub parallel: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            optimize: OptimizeOptions::default(),
            count_feasible: false,
            parallel: true,
        }
    }
}

fn solve_ccf(
    m: &Model,
    w: &ScenarioWeights,
    ccf: &Ccf,
    opts: &RunOptions,
) -> Result<Result<CcfSolve, SolverError>, TradeoffError> {
    let (p, _) = build_problem(m, w, Some(ccf), &opts.optimize)?;
    let bb = BbOptions {
        node_limit: opts.optimize.node_limit,
    };
    let ranked = match solve_bb_top_k(&p, opts.optimize.top_k.max(1), &bb) {
        Ok(r) => r,
        Err(e @ SolverError::Infeasible { .. }) => return Ok(Err(e)),
        Err(source) => {
            return Err(TradeoffError::Solver {
                ccf: ccf.id.clone(),
                source,
            })
        }
    };
    let feasible_count = if opts.count_feasible {
        Some(
            count_feasible(&p, &bb).map_err(|source| TradeoffError::Solver {
                ccf: ccf.id.clone(),
                source,
            })?,
        )
    } else {
        None
    };
    Ok(Ok(CcfSolve {
        ranked,
        feasible_count,
    }))
}

/// Solves every CCF (declared C-KS states, else every valid combination).
pub fn run_scenario(
    m: &Model,
    s: &Scenario,
    opts: &RunOptions,
) -> Result<TradeoffResult, TradeoffError> {
    let w = scenario_weights(m, s)?;
    let ccfs = analysis_ccfs(m)?;
    run_weights(m, &s.id, &w, &ccfs, opts)
}

/// Solves the given CCFs under precomputed weights.
pub fn run_weights(
    m: &Model,
    scenario_id: &str,
    w: &ScenarioWeights,
    ccfs: &[Ccf],
    opts: &RunOptions,
) -> Result<TradeoffResult, TradeoffError> {
    let solved: Vec<_> = if opts.parallel {
        ccfs.par_iter().map(|c| solve_ccf(m, w, c, opts)).collect()
    } else {
        ccfs.iter().map(|c| solve_ccf(m, w, c, opts)).collect()
    };
    let solved = ccfs
        .iter()
        .cloned()
        .zip(solved)
        .map(|(c, r)| r.map(|r| (c, r)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TradeoffResult::from_outcomes(scenario_id, solved))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Disagreement {
    pub ccf: String,
    /// Per scenario: the active features of its winner, or `None` if infeasible.
    pub winners: Vec<(String, Option<Vec<String>>)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub results: Vec<TradeoffResult>,
    pub diff: Vec<Disagreement>,
}

fn winner(r: &TradeoffResult, ccf: &str) -> Option<Vec<String>> {
    r.label_of(ccf)
        .and_then(|l| r.configuration(l))
        .map(|c| c.active.clone())
}

/// Runs each scenario and lists the CCFs whose winning assignment differs
/// between scenarios. Labels are per result, so assignments are compared.
pub fn compare_scenarios(
    m: &Model,
    ss: &[Scenario],
    opts: &RunOptions,
) -> Result<Comparison, TradeoffError> {
    if ss.len() < 2 {
        return Err(TradeoffError::TooFewScenarios);
    }
    let results = ss
        .iter()
        .map(|s| run_scenario(m, s, opts))
        .collect::<Result<Vec<_>, _>>()?;
    let mut diff = Vec::new();
    for e in &results[0].entries {
        let winners: Vec<_> = results
            .iter()
            .map(|r| (r.scenario.clone(), winner(r, &e.ccf)))
            .collect();
        if winners.iter().any(|(_, w)| *w != winners[0].1) {
            diff.push(Disagreement {
                ccf: e.ccf.clone(),
                winners,
            });
        }
    }
    Ok(Comparison { results, diff })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum InitialPolicy {
    MostFrequent,
    Explicit(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdaptationEdge {
    pub from: String,
    pub to: String,
    pub trigger: String,
    pub noop: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdaptationModel {
    pub initial: String,
    pub states: Vec<String>,
    pub edges: Vec<AdaptationEdge>,
    /// `(ccf, label)` in C-KS state order.
    pub ccf_map: Vec<(String, String)>,
}

impl AdaptationModel {
    pub fn label_of(&self, ccf: &str) -> Option<&str> {
        self.ccf_map
            .iter()
            .find(|(c, _)| c == ccf)
            .map(|(_, l)| l.as_str())
    }

    /// How many CCFs load each label, in state order.
    pub fn frequencies(&self) -> Vec<(String, usize)> {
        self.states
            .iter()
            .map(|s| {
                (
                    s.clone(),
                    self.ccf_map.iter().filter(|(_, l)| l == s).count(),
                )
            })
            .collect()
    }

    /// Graphviz rendering: one node per configuration, one edge per C-KS
    /// transition labeled with the CCF that triggers it.
    pub fn to_dot(&self) -> String {
        let mut loaded: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for (c, l) in &self.ccf_map {
            loaded.entry(l.as_str()).or_default().push(c.as_str());
        }
        let mut out = String::from("digraph adaptation {\n  rankdir=LR;\n");
        for s in &self.states {
            let shape = if *s == self.initial {
                "doublecircle"
            } else {
                "circle"
            };
            let ccfs = loaded
                .get(s.as_str())
                .map(|v| v.join(", "))
                .unwrap_or_default();
            out.push_str(&format!("  \"{s}\" [shape={shape}, tooltip=\"{ccfs}\"];\n"));
        }
        for e in &self.edges {
            let style = if e.noop { ", style=dashed" } else { "" };
            out.push_str(&format!(
                "  \"{}\" -> \"{}\" [label=\"{}\"{style}];\n",
                e.from, e.to, e.trigger
            ));
        }
        out.push_str("}\n");
        out
    }
}

pub fn build_adaptation_model(
    m: &Model,
    r: &TradeoffResult,
    policy: &InitialPolicy,
) -> Result<AdaptationModel, TradeoffError> {
    let cks = m.cks.as_ref().ok_or(TradeoffError::NoCks)?;
    if cks.states.is_empty() {
        return Err(TradeoffError::NoCks);
    }
    let mut ccf_map = Vec::new();
    for s in &cks.states {
        let l = r
            .label_of(&s.id)
            .ok_or_else(|| TradeoffError::StateMismatch(s.id.clone()))?;
        ccf_map.push((s.id.clone(), l.to_string()));
    }
    let label = |ccf: &str| -> String {
        ccf_map
            .iter()
            .find(|(c, _)| c == ccf)
            .map(|(_, l)| l.clone())
            .expect("transitions reference declared states")
    };
    let edges = cks
        .transitions
        .iter()
        .map(|(x, y)| {
            let (from, to) = (label(x), label(y));
            AdaptationEdge {
                noop: from == to,
                from,
                to,
                trigger: y.clone(),
            }
        })
        .collect();
    let states: Vec<String> = r.configurations.iter().map(|c| c.label.clone()).collect();
    let initial = match policy {
        InitialPolicy::Explicit(l) => {
            if !states.contains(l) {
                return Err(TradeoffError::UnknownLabel(l.clone()));
            }
            l.clone()
        }
        InitialPolicy::MostFrequent => {
            let mut best: Option<(&String, usize)> = None;
            for s in &states {
                let n = ccf_map.iter().filter(|(_, l)| l == s).count();
                if best.is_none_or(|(_, b)| n > b) {
                    best = Some((s, n));
                }
            }
            best.map(|(s, _)| s.clone())
                .ok_or_else(|| TradeoffError::StateMismatch(cks.states[0].id.clone()))?
        }
    };
    Ok(AdaptationModel {
        initial,
        states,
        edges,
        ccf_map,
    })
}
