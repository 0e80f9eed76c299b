//! Prioritization scenarios and their text format.
//!
//! ```text
//! # comments run to end of line
//! scenario base {
//!   goals: g2 > g1 > g3 ;
//!   contexts: c2 > c6 ;
//!   softgoals: ahp (sg1, sg2, sg3) [[1, 3, 3], [1/3, 1, 1], [1/3, 1, 1]]
//! }
//! ```
//!
//! Each section is `equal`, an order `a > b > c`, or (soft goals only) an
//! inline matrix. A section may be omitted only when the model has nothing
//! of that kind to rank. A file may hold several scenarios.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diag::Diagnostic;
use crate::dsl::ParseError;
use crate::model::Model;
use crate::prioritization::{
    ahp_consistency, ahp_ivalues, bst_rank_values, check_permutation, AhpMatrix, ConsistencyReport,
    PrioritizationError, PriorityRanking, SubjectKind, WeightAssignment,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "value")]
pub enum RankSpec {
    Order(Vec<String>),
    Equal,
    Unspecified,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "value")]
pub enum SoftGoalSpec {
    Order(Vec<String>),
    Ahp(AhpMatrix),
    Equal,
    Unspecified,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: String,
    pub goals: RankSpec,
    pub contexts: RankSpec,
    pub softgoals: SoftGoalSpec,
}

fn ids(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

impl Scenario {
    /// A scenario with the three orders given; soft goals use the
    /// synthetic matrix for their order.
    pub fn ordered(id: &str, goals: &[&str], contexts: &[&str], softgoals: &[&str]) -> Self {
        Scenario {
            id: id.to_string(),
            goals: RankSpec::Order(ids(goals)),
            contexts: RankSpec::Order(ids(contexts)),
            softgoals: SoftGoalSpec::Order(ids(softgoals)),
        }
    }

    pub fn equal(id: &str) -> Self {
        Scenario {
            id: id.to_string(),
            goals: RankSpec::Equal,
            contexts: RankSpec::Equal,
            softgoals: SoftGoalSpec::Equal,
        }
    }

    pub fn to_text(&self) -> String {
        let mut parts = Vec::new();
        let rank = |name: &str, r: &RankSpec, parts: &mut Vec<String>| match r {
            RankSpec::Order(o) => parts.push(format!("{name}: {}", o.join(" > "))),
            RankSpec::Equal => parts.push(format!("{name}: equal")),
            RankSpec::Unspecified => {}
        };
        rank("goals", &self.goals, &mut parts);
        rank("contexts", &self.contexts, &mut parts);
        match &self.softgoals {
            SoftGoalSpec::Order(o) => parts.push(format!("softgoals: {}", o.join(" > "))),
            SoftGoalSpec::Equal => parts.push("softgoals: equal".to_string()),
            SoftGoalSpec::Ahp(a) => {
                let rows: Vec<String> = a
                    .entries
                    .iter()
                    .map(|r| {
                        let cells: Vec<String> = r.iter().map(|v| format!("{v:?}")).collect();
                        format!("[{}]", cells.join(", "))
                    })
                    .collect();
                parts.push(format!(
                    "softgoals: ahp ({}) [{}]",
                    a.subjects.join(", "),
                    rows.join(", ")
                ));
            }
            SoftGoalSpec::Unspecified => {}
        }
        let body: Vec<String> = parts.iter().map(|p| format!("  {p}")).collect();
        format!("scenario {} {{\n{}\n}}\n", self.id, body.join(" ;\n"))
    }
}

pub fn serialize_scenarios(ss: &[Scenario]) -> String {
    ss.iter()
        .map(Scenario::to_text)
        .collect::<Vec<_>>()
        .join("\n")
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Num(f64),
    Sym(char),
}

struct Lexer {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
    end: (usize, usize),
}

fn lex(src: &str) -> Result<Lexer, ParseError> {
    let mut toks = Vec::new();
    let mut last = (1, 1);
    for (li, line) in src.lines().enumerate() {
        let line_no = li + 1;
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let col = i + 1;
            if c == '#' {
                break;
            } else if c.is_whitespace() {
                i += 1;
            } else if "{}:;>()[],/".contains(c) {
                toks.push((Tok::Sym(c), line_no, col));
                i += 1;
            } else if c.is_ascii_digit() || c == '.' {
                let start = i;
                while i < chars.len()
                    && (chars[i].is_ascii_alphanumeric()
                        || chars[i] == '.'
                        || ((chars[i] == '-' || chars[i] == '+')
                            && matches!(chars[i - 1], 'e' | 'E')))
                {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                let v: f64 = text.parse().map_err(|_| ParseError {
                    line: line_no,
                    column: col,
                    message: format!("invalid number {text}"),
                })?;
                toks.push((Tok::Num(v), line_no, col));
            } else if c.is_alphanumeric() || c == '_' || c == '-' {
                let start = i;
                while i < chars.len()
                    && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '-')
                {
                    i += 1;
                }
                toks.push((Tok::Word(chars[start..i].iter().collect()), line_no, col));
            } else {
                return Err(ParseError {
                    line: line_no,
                    column: col,
                    message: format!("unexpected character {c:?}"),
                });
            }
            last = (line_no, i + 1);
        }
    }
    Ok(Lexer {
        toks,
        pos: 0,
        end: last,
    })
}

impl Lexer {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn err(&self, message: impl Into<String>) -> ParseError {
        let (line, column) = self
            .toks
            .get(self.pos)
            .map(|t| (t.1, t.2))
            .unwrap_or(self.end);
        ParseError {
            line,
            column,
            message: message.into(),
        }
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.0.clone());
        self.pos += 1;
        t
    }

    fn sym(&mut self, c: char) -> Result<(), ParseError> {
        match self.peek() {
            Some(Tok::Sym(s)) if *s == c => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err(format!("expected '{c}'"))),
        }
    }

    fn at_sym(&self, c: char) -> bool {
        matches!(self.peek(), Some(Tok::Sym(s)) if *s == c)
    }

    fn word(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Word(w)) => {
                let w = w.clone();
                self.pos += 1;
                Ok(w)
            }
            _ => Err(self.err(format!("expected {what}"))),
        }
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        let v = match self.next() {
            Some(Tok::Num(v)) => v,
            _ => {
                self.pos -= 1;
                return Err(self.err("expected a number"));
            }
        };
        if self.at_sym('/') {
            self.pos += 1;
            match self.next() {
                Some(Tok::Num(d)) if d != 0.0 => Ok(v / d),
                _ => {
                    self.pos -= 1;
                    Err(self.err("expected a non-zero denominator"))
                }
            }
        } else {
            Ok(v)
        }
    }

    fn order(&mut self, first: String) -> Result<Vec<String>, ParseError> {
        let mut out = vec![first];
        while self.at_sym('>') {
            self.pos += 1;
            out.push(self.word("an identifier after '>'")?);
        }
        Ok(out)
    }

    fn matrix(&mut self) -> Result<AhpMatrix, ParseError> {
        self.sym('(')?;
        let mut subjects = vec![self.word("a soft goal id")?];
        while self.at_sym(',') {
            self.pos += 1;
            subjects.push(self.word("a soft goal id")?);
        }
        self.sym(')')?;
        self.sym('[')?;
        let mut rows = Vec::new();
        loop {
            self.sym('[')?;
            let mut row = vec![self.number()?];
            while self.at_sym(',') {
                self.pos += 1;
                row.push(self.number()?);
            }
            self.sym(']')?;
            rows.push(row);
            if self.at_sym(',') {
                self.pos += 1;
            } else {
                break;
            }
        }
        self.sym(']')?;
        Ok(AhpMatrix {
            subjects,
            entries: rows,
        })
    }

    fn scenario(&mut self) -> Result<Scenario, ParseError> {
        match self.word("'scenario'")?.as_str() {
            "scenario" => {}
            other => {
                self.pos -= 1;
                return Err(self.err(format!("expected 'scenario', found {other}")));
            }
        }
        let id = self.word("a scenario id")?;
        self.sym('{')?;
        let mut s = Scenario {
            id,
            goals: RankSpec::Unspecified,
            contexts: RankSpec::Unspecified,
            softgoals: SoftGoalSpec::Unspecified,
        };
        let mut seen: Vec<String> = Vec::new();
        while !self.at_sym('}') {
            if self.peek().is_none() {
                return Err(self.err("unterminated scenario block"));
            }
            let section = self.word("a section name")?;
            if seen.contains(&section) {
                self.pos -= 1;
                return Err(self.err(format!("section {section} given twice")));
            }
            self.sym(':')?;
            let head = self.word("'equal', 'ahp' or an identifier")?;
            match section.as_str() {
                "goals" | "contexts" => {
                    let spec = if head == "equal" {
                        RankSpec::Equal
                    } else {
                        RankSpec::Order(self.order(head)?)
                    };
                    if section == "goals" {
                        s.goals = spec;
                    } else {
                        s.contexts = spec;
                    }
                }
                "softgoals" => {
                    s.softgoals = match head.as_str() {
                        "equal" => SoftGoalSpec::Equal,
                        "ahp" => SoftGoalSpec::Ahp(self.matrix()?),
                        _ => SoftGoalSpec::Order(self.order(head)?),
                    }
                }
                _ => {
                    self.pos -= 3;
                    return Err(self.err(format!(
                        "unknown section {section}; expected goals, contexts or softgoals"
                    )));
                }
            }
            seen.push(section);
            if self.at_sym(';') {
                self.pos += 1;
            } else if !self.at_sym('}') {
                return Err(self.err("expected ';' or '}'"));
            }
        }
        self.sym('}')?;
        Ok(s)
    }
}

pub fn parse_scenarios(src: &str) -> Result<Vec<Scenario>, ParseError> {
    let mut lx = lex(src)?;
    let mut out: Vec<Scenario> = Vec::new();
    while lx.peek().is_some() {
        let start = lx.pos;
        let s = lx.scenario()?;
        if out.iter().any(|o| o.id == s.id) {
            lx.pos = start + 1;
            return Err(lx.err(format!("duplicate scenario id {}", s.id)));
        }
        out.push(s);
    }
    if out.is_empty() {
        return Err(lx.err("no scenario found"));
    }
    Ok(out)
}

/// Parses a file expected to hold exactly one scenario.
pub fn parse_scenario(src: &str) -> Result<Scenario, ParseError> {
    let mut v = parse_scenarios(src)?;
    if v.len() != 1 {
        return Err(ParseError {
            line: 1,
            column: 1,
            message: format!("expected one scenario, found {}", v.len()),
        });
    }
    Ok(v.remove(0))
}

/// Numeric weights derived from a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioWeights {
    pub goals: WeightAssignment,
    pub contexts: WeightAssignment,
    pub softgoals: WeightAssignment,
    /// Present when soft goals were weighted from a matrix with 2..=9 subjects.
    pub consistency: Option<ConsistencyReport>,
    pub matrix: Option<AhpMatrix>,
    pub warnings: Vec<Diagnostic>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("scenario {scenario} does not rank {kind}, but the model declares some")]
    Missing { scenario: String, kind: SubjectKind },
    #[error("scenario {scenario}: {source}")]
    Prioritization {
        scenario: String,
        #[source]
        source: PrioritizationError,
    },
}

fn rank_weights(
    scenario: &str,
    kind: SubjectKind,
    spec: &RankSpec,
    subjects: &[String],
) -> Result<WeightAssignment, ScenarioError> {
    let ranking = match spec {
        RankSpec::Order(o) => PriorityRanking {
            kind,
            order: o.clone(),
            equal_priority: false,
        },
        RankSpec::Equal => PriorityRanking::equal(kind),
        RankSpec::Unspecified if subjects.is_empty() => PriorityRanking::equal(kind),
        RankSpec::Unspecified => {
            return Err(ScenarioError::Missing {
                scenario: scenario.to_string(),
                kind,
            })
        }
    };
    bst_rank_values(&ranking, subjects).map_err(|source| ScenarioError::Prioritization {
        scenario: scenario.to_string(),
        source,
    })
}

/// Resolves a scenario against a model's goals, context groups and soft goals.
pub fn scenario_weights(m: &Model, s: &Scenario) -> Result<ScenarioWeights, ScenarioError> {
    let goals: Vec<String> = m.goals.goals.iter().map(|g| g.id.clone()).collect();
    let groups: Vec<String> = m.context_groups.iter().map(|g| g.id.clone()).collect();
    let softgoals: Vec<String> = m.goals.softgoals.iter().map(|g| g.id.clone()).collect();
    let wrap = |source| ScenarioError::Prioritization {
        scenario: s.id.clone(),
        source,
    };

    let goal_w = rank_weights(&s.id, SubjectKind::Goals, &s.goals, &goals)?;
    let ctx_w = rank_weights(&s.id, SubjectKind::Contexts, &s.contexts, &groups)?;

    let matrix = match &s.softgoals {
        SoftGoalSpec::Order(o) => {
            check_permutation(SubjectKind::Softgoals, o, &softgoals).map_err(wrap)?;
            Some(AhpMatrix::from_order(o))
        }
        SoftGoalSpec::Ahp(a) => {
            check_permutation(SubjectKind::Softgoals, &a.subjects, &softgoals).map_err(wrap)?;
            Some(a.clone())
        }
        SoftGoalSpec::Equal => None,
        SoftGoalSpec::Unspecified if softgoals.is_empty() => None,
        SoftGoalSpec::Unspecified => {
            return Err(ScenarioError::Missing {
                scenario: s.id.clone(),
                kind: SubjectKind::Softgoals,
            })
        }
    };
    let mut warnings = Vec::new();
    let (sg_w, consistency) = match &matrix {
        Some(a) => {
            let w = ahp_ivalues(a).map_err(wrap)?;
            warnings.extend(a.scale_warnings());
            let c = match ahp_consistency(a) {
                Ok(c) => {
                    if !c.acceptable {
                        warnings.push(Diagnostic::warning(
                            "ahp-inconsistent",
                            &[],
                            format!(
                                "soft goal judgments are inconsistent (CR = {:.3} > 0.1)",
                                c.cr
                            ),
                        ));
                    }
                    Some(c)
                }
                Err(PrioritizationError::TooLarge(n)) => {
                    warnings.push(Diagnostic::warning(
                        "ahp-consistency-unavailable",
                        &[],
                        format!("no consistency ratio for {n} soft goals"),
                    ));
                    None
                }
                Err(_) => None,
            };
            (w, c)
        }
        None => (
            bst_rank_values(&PriorityRanking::equal(SubjectKind::Softgoals), &softgoals)
                .map_err(wrap)?,
            None,
        ),
    };
    Ok(ScenarioWeights {
        goals: goal_w,
        contexts: ctx_w,
        softgoals: sg_w,
        consistency,
        matrix,
        warnings,
    })
}
