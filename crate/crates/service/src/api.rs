//! Request and response documents, and the computations behind them.
//!
//! Every function here is pure: the same model, scenario and parameters
//! always produce the same document, digest included. The command line
//! prints these same documents for its structured output.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use toffa_core::ccf::{analysis_ccfs, check_model, find_ccf, Ccf};
use toffa_core::contribution::{utility_table, UtilityTable};
use toffa_core::diag::{has_errors, Diagnostic};
use toffa_core::optimizer::{optimal_configuration, Configuration, IlpProblem, OptimizeOptions};
use toffa_core::scenario::scenario_weights;
use toffa_core::tradeoff::{
    build_adaptation_model, run_scenario, AdaptationModel, InitialPolicy, RunOptions,
    TradeoffResult,
};
use toffa_core::validate::validate_model;
use toffa_core::{parse_scenario, serialize_model, Model, Scenario, ScenarioWeights};

use crate::error::ApiError;

/// A scenario in either the text format or its structured form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScenarioInput {
    Text(String),
    Structured(Scenario),
}

impl ScenarioInput {
    pub fn resolve(&self) -> Result<Scenario, ApiError> {
        match self {
            ScenarioInput::Text(t) => Ok(parse_scenario(t)?),
            ScenarioInput::Structured(s) => Ok(s.clone()),
        }
    }
}

/// Body of every computational request. Fields an endpoint does not use
/// are ignored; a missing scenario falls back to the session's last one.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ComputeRequest {
    pub scenario: Option<ScenarioInput>,
    /// CCF id restricting utilities (utility, optimize).
    pub ccf: Option<String>,
    pub strict_context: bool,
    pub top_k: Option<usize>,
    pub count_feasible: bool,
    /// Initial configuration label for the adaptation model.
    pub initial: Option<String>,
}

/// Parameters that shape a result, hashed into its digest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub ccf: Option<String>,
    pub strict_context: bool,
    pub top_k: usize,
    pub count_feasible: bool,
    pub initial: Option<String>,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            ccf: None,
            strict_context: false,
            top_k: 1,
            count_feasible: false,
            initial: None,
        }
    }
}

impl From<&ComputeRequest> for Params {
    fn from(r: &ComputeRequest) -> Self {
        Params {
            ccf: r.ccf.clone(),
            strict_context: r.strict_context,
            top_k: r.top_k.unwrap_or(1).max(1),
            count_feasible: r.count_feasible,
            initial: r.initial.clone(),
        }
    }
}

impl Params {
    fn optimize_options(&self) -> OptimizeOptions {
        OptimizeOptions {
            strict_context: self.strict_context,
            top_k: self.top_k,
            ..OptimizeOptions::from_env()
        }
    }

    fn run_options(&self) -> RunOptions {
        RunOptions {
            optimize: self.optimize_options(),
            count_feasible: self.count_feasible,
            parallel: true,
        }
    }
}

/// Hex sha256 over the canonical model text, the scenario text, the
/// operation and its parameters.
pub fn digest(m: &Model, s: Option<&Scenario>, op: &str, p: &Params) -> String {
    let mut h = Sha256::new();
    h.update(serialize_model(m).as_bytes());
    h.update(b"\0");
    if let Some(s) = s {
        h.update(s.to_text().as_bytes());
    }
    h.update(b"\0");
    h.update(op.as_bytes());
    h.update(b"\0");
    h.update(serde_json::to_vec(p).expect("params serialize").as_slice());
    hex::encode(h.finalize())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Created {
    pub session_id: String,
    pub diagnostics: Vec<Diagnostic>,
    pub digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDoc {
    pub session_id: String,
    pub source: String,
    pub model: Model,
    pub scenario: Option<Scenario>,
    pub created: u64,
    pub updated: u64,
    pub digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CcfsDoc {
    pub count: usize,
    pub ccfs: Vec<Ccf>,
    pub digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckDoc {
    pub ok: bool,
    pub diagnostics: Vec<Diagnostic>,
    pub digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrioritizeDoc {
    pub scenario: String,
    pub weights: ScenarioWeights,
    pub digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityDoc {
    pub scenario: String,
    pub table: UtilityTable,
    pub digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedConfiguration {
    pub label: String,
    pub notation: String,
    pub configuration: Configuration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeDoc {
    pub scenario: String,
    pub ccf: Option<String>,
    pub objective: f64,
    /// Best first; the first entry is the optimum.
    pub ranked: Vec<RankedConfiguration>,
    pub utilities: UtilityTable,
    pub problem: IlpProblem,
    pub digest: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CcfLabel {
    pub ccf: String,
    pub label: String,
}

fn labels(pairs: &[(String, String)]) -> Vec<CcfLabel> {
    pairs
        .iter()
        .map(|(c, l)| CcfLabel {
            ccf: c.clone(),
            label: l.clone(),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeoffDoc {
    pub ccf_map: Vec<CcfLabel>,
    pub result: TradeoffResult,
    pub digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptationDoc {
    pub ccf_map: Vec<CcfLabel>,
    pub model: AdaptationModel,
    pub dot: String,
    pub digest: String,
}

fn none() -> Params {
    Params::default()
}

/// Non-fatal diagnostics of a freshly parsed model, or the error list.
pub fn admit(m: &Model) -> Result<Vec<Diagnostic>, ApiError> {
    let d = validate_model(m);
    if has_errors(&d) {
        return Err(ApiError::InvalidModel(d));
    }
    Ok(d)
}

pub fn ccfs(m: &Model) -> Result<CcfsDoc, ApiError> {
    let ccfs = analysis_ccfs(m)?;
    Ok(CcfsDoc {
        count: ccfs.len(),
        ccfs,
        digest: digest(m, None, "ccfs", &none()),
    })
}

pub fn check(m: &Model) -> CheckDoc {
    let diagnostics = check_model(m);
    CheckDoc {
        ok: !has_errors(&diagnostics),
        diagnostics,
        digest: digest(m, None, "check", &none()),
    }
}

pub fn prioritize(m: &Model, s: &Scenario) -> Result<PrioritizeDoc, ApiError> {
    Ok(PrioritizeDoc {
        scenario: s.id.clone(),
        weights: scenario_weights(m, s)?,
        digest: digest(m, Some(s), "prioritize", &none()),
    })
}

pub fn utility(m: &Model, s: &Scenario, p: &Params) -> Result<UtilityDoc, ApiError> {
    let w = scenario_weights(m, s)?;
    let ccf = p.ccf.as_deref().map(|id| find_ccf(m, id)).transpose()?;
    let p = Params {
        ccf: p.ccf.clone(),
        ..none()
    };
    Ok(UtilityDoc {
        scenario: s.id.clone(),
        table: utility_table(m, &w, ccf.as_ref())?,
        digest: digest(m, Some(s), "utility", &p),
    })
}

pub fn optimize(m: &Model, s: &Scenario, p: &Params) -> Result<OptimizeDoc, ApiError> {
    let w = scenario_weights(m, s)?;
    let ccf = p.ccf.as_deref().map(|id| find_ccf(m, id)).transpose()?;
    let o = optimal_configuration(m, &w, ccf.as_ref(), &p.optimize_options())?;
    let ranked = o
        .ranked
        .into_iter()
        .enumerate()
        .map(|(i, c)| RankedConfiguration {
            label: format!("F{}", i + 1),
            notation: c.notation(),
            configuration: c,
        })
        .collect();
    let p = Params {
        initial: None,
        count_feasible: false,
        ..p.clone()
    };
    Ok(OptimizeDoc {
        scenario: s.id.clone(),
        ccf: p.ccf.clone(),
        objective: o.configuration.objective,
        ranked,
        utilities: o.utilities,
        problem: o.problem,
        digest: digest(m, Some(s), "optimize", &p),
    })
}

fn run_params(p: &Params) -> Params {
    Params {
        ccf: None,
        initial: None,
        ..p.clone()
    }
}

pub fn tradeoff(m: &Model, s: &Scenario, p: &Params) -> Result<TradeoffDoc, ApiError> {
    let p = run_params(p);
    let result = run_scenario(m, s, &p.run_options())?;
    Ok(TradeoffDoc {
        ccf_map: labels(&result.ccf_map()),
        result,
        digest: digest(m, Some(s), "tradeoff", &p),
    })
}

pub fn adaptation(m: &Model, s: &Scenario, p: &Params) -> Result<AdaptationDoc, ApiError> {
    let p = Params {
        initial: p.initial.clone(),
        ..run_params(p)
    };
    let result = run_scenario(m, s, &p.run_options())?;
    let policy = match &p.initial {
        Some(l) => InitialPolicy::Explicit(l.clone()),
        None => InitialPolicy::MostFrequent,
    };
    let model = build_adaptation_model(m, &result, &policy)?;
    Ok(AdaptationDoc {
        ccf_map: labels(&model.ccf_map),
        dot: model.to_dot(),
        model,
        digest: digest(m, Some(s), "adaptation-model", &p),
    })
}
