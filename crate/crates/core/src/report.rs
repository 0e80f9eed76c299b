//! Plain-text renderings shared by the command line and the guide.
//! Numbers are shown with two decimals; structured output keeps full
//! precision.

use crate::ccf::Ccf;
use crate::contribution::UtilityTable;
use crate::diag::Diagnostic;
use crate::optimizer::Configuration;
use crate::prioritization::WeightAssignment;
use crate::scenario::ScenarioWeights;
use crate::tradeoff::{AdaptationModel, Comparison, TradeoffResult};

/// Two decimals, never `-0.00`.
pub fn fixed2(x: f64) -> String {
    let s = format!("{x:.2}");
    if s == "-0.00" {
        "0.00".to_string()
    } else {
        s
    }
}

fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut width: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (w, c) in width.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&width)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        padded.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = line(header.to_vec());
    for r in rows {
        out.push_str(&line(r.iter().map(String::as_str).collect()));
    }
    out
}

/// Variable features with their contributions and utility.
pub fn utility_text(t: &UtilityTable) -> String {
    let rows: Vec<Vec<String>> = t
        .rows
        .iter()
        .filter(|r| r.variable)
        .map(|r| {
            vec![
                r.feature.clone(),
                fixed2(r.cont_c),
                fixed2(r.cont_g),
                fixed2(r.cont_sg),
                fixed2(r.utility),
            ]
        })
        .collect();
    table(&["feature", "contC", "contG", "contSG", "utility"], &rows)
}

fn weight_rows(w: &WeightAssignment, out: &mut Vec<Vec<String>>, kind: &str) {
    let provenance = format!("{:?}", w.provenance).to_lowercase();
    for (id, v) in &w.weights {
        out.push(vec![
            kind.to_string(),
            id.clone(),
            fixed2(*v),
            provenance.clone(),
        ]);
    }
}

pub fn weights_text(w: &ScenarioWeights) -> String {
    let mut rows = Vec::new();
    weight_rows(&w.goals, &mut rows, "goal");
    weight_rows(&w.contexts, &mut rows, "context");
    weight_rows(&w.softgoals, &mut rows, "softgoal");
    let mut out = table(&["kind", "id", "weight", "from"], &rows);
    if let Some(c) = &w.consistency {
        out.push_str(&format!(
            "lambda_max = {}  CI = {}  CR = {}  {}\n",
            fixed2(c.lambda_max),
            fixed2(c.ci),
            fixed2(c.cr),
            if c.acceptable {
                "consistent"
            } else {
                "inconsistent"
            }
        ));
    }
    out
}

pub fn ccfs_text(ccfs: &[Ccf]) -> String {
    ccfs.iter()
        .map(|c| format!("{} = {{{}}}\n", c.id, c.members.join(", ")))
        .collect()
}

pub fn configuration_text(label: &str, c: &Configuration) -> String {
    format!(
        "{label} = {}\nobjective = {}\n",
        c.notation(),
        fixed2(c.objective)
    )
}

pub fn tradeoff_text(r: &TradeoffResult) -> String {
    let rows: Vec<Vec<String>> = r
        .entries
        .iter()
        .map(|e| {
            vec![
                e.ccf.clone(),
                e.members.join(", "),
                e.label.clone().unwrap_or_else(|| "infeasible".to_string()),
                e.objective.map(fixed2).unwrap_or_else(|| "-".to_string()),
            ]
        })
        .collect();
    let mut out = format!("scenario {}\n", r.scenario);
    out.push_str(&table(
        &["ccf", "contexts", "configuration", "objective"],
        &rows,
    ));
    for c in &r.configurations {
        out.push_str(&format!("{} = {}\n", c.label, c.notation()));
    }
    for e in r.entries.iter().filter(|e| !e.conflict.is_empty()) {
        let parts: Vec<String> = e.conflict.iter().map(|c| c.origin.to_string()).collect();
        out.push_str(&format!("{} conflict: {}\n", e.ccf, parts.join("; ")));
    }
    out
}

pub fn comparison_text(c: &Comparison) -> String {
    let mut out: Vec<String> = c.results.iter().map(tradeoff_text).collect();
    if c.diff.is_empty() {
        out.push("no ccf changes its winner across scenarios\n".to_string());
    } else {
        let mut s = String::from("winners that differ:\n");
        for d in &c.diff {
            for (scenario, w) in &d.winners {
                let w = w
                    .as_ref()
                    .map(|a| format!("{{{}}}", a.join(", ")))
                    .unwrap_or_else(|| "infeasible".to_string());
                s.push_str(&format!("  {}  {scenario}  {w}\n", d.ccf));
            }
        }
        out.push(s);
    }
    out.join("\n")
}

pub fn adaptation_text(a: &AdaptationModel) -> String {
    let mut out = format!("initial {}\n", a.initial);
    for (s, n) in a.frequencies() {
        let ccfs: Vec<&str> = a
            .ccf_map
            .iter()
            .filter(|(_, l)| *l == s)
            .map(|(c, _)| c.as_str())
            .collect();
        out.push_str(&format!("{s} <- {{{}}} ({n})\n", ccfs.join(", ")));
    }
    for e in &a.edges {
        let noop = if e.noop { "  no-op" } else { "" };
        out.push_str(&format!("{} -> {} on {}{noop}\n", e.from, e.to, e.trigger));
    }
    out
}

pub fn diagnostics_text(d: &[Diagnostic]) -> String {
    d.iter().map(|x| format!("{x}\n")).collect()
}
