//! The line-oriented model language.
//!
//! ```text
//! model "<name>"
//! feature <id> "<name>" root
//! feature <id> "<name>" (mandatory|optional) of <parent-id>
//! group <gid> (xor|or) of <parent-id> { <id> "<name>", ... }
//! contextgroup <id> "<name>" (xor|or|optional)
//! context <id> "<name>" in <contextgroup-id>
//! rule <context-id> (requires|excludes) <feature-id>
//! constraint <feature-id> (requires|excludes) <feature-id>
//! goal <id> "<name>"
//! hardgoal <id> of <goal-id> (and|or) binds <feature-id>
//! softgoal <id> "<name>"
//! link <hardgoal-id> <softgoal-id> (++|+|?|-|--)
//! ccf <id> { <context-id>, ... }
//! initial <ccf-id>
//! transition <ccf-id> -> <ccf-id>
//! ```
//!
//! One declaration per line, `#` starts a comment. A `{ ... }` list may
//! continue over several lines. References may point forward.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::model::*;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    fn at(pos: Pos, message: impl Into<String>) -> Self {
        ParseError {
            line: pos.line,
            column: pos.column,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
struct Pos {
    line: usize,
    column: usize,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Str(String),
    LBrace,
    RBrace,
    Comma,
    Arrow,
    Level(SatisfactionLevel),
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Word(w) => write!(f, "`{w}`"),
            Tok::Str(s) => write!(f, "string {s:?}"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::Level(l) => write!(f, "`{}`", l.symbol()),
        }
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '.'
}

fn tokenize_line(text: &str, line: usize, out: &mut Vec<(Tok, Pos)>) -> Result<(), ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos {
            line,
            column: i + 1,
        };
        match c {
            '#' => break,
            c if c.is_whitespace() => i += 1,
            '{' => {
                out.push((Tok::LBrace, pos));
                i += 1;
            }
            '}' => {
                out.push((Tok::RBrace, pos));
                i += 1;
            }
            ',' => {
                out.push((Tok::Comma, pos));
                i += 1;
            }
            '"' => {
                let mut s = String::new();
                i += 1;
                loop {
                    match chars.get(i) {
                        None => return Err(ParseError::at(pos, "unterminated string")),
                        Some('"') => {
                            i += 1;
                            break;
                        }
                        Some('\\') => {
                            match chars.get(i + 1) {
                                Some(&e @ ('"' | '\\')) => s.push(e),
                                Some('n') => s.push('\n'),
                                _ => {
                                    return Err(ParseError::at(
                                        Pos {
                                            line,
                                            column: i + 1,
                                        },
                                        "invalid escape in string",
                                    ))
                                }
                            }
                            i += 2;
                        }
                        Some(&ch) => {
                            s.push(ch);
                            i += 1;
                        }
                    }
                }
                out.push((Tok::Str(s), pos));
            }
            '-' if chars.get(i + 1) == Some(&'>') => {
                out.push((Tok::Arrow, pos));
                i += 2;
            }
            '+' | '-' | '?' => {
                let mut j = i;
                while j < chars.len() && matches!(chars[j], '+' | '-' | '?') {
                    j += 1;
                }
                let sym: String = chars[i..j].iter().collect();
                match SatisfactionLevel::from_symbol(&sym) {
                    Some(l) => out.push((Tok::Level(l), pos)),
                    None => {
                        return Err(ParseError::at(
                            pos,
                            format!("unknown satisfaction level `{sym}`"),
                        ))
                    }
                }
                i = j;
            }
            c if is_word_char(c) => {
                let mut j = i;
                while j < chars.len() && is_word_char(chars[j]) {
                    j += 1;
                }
                out.push((Tok::Word(chars[i..j].iter().collect()), pos));
                i = j;
            }
            other => {
                return Err(ParseError::at(
                    pos,
                    format!("unexpected character `{other}`"),
                ))
            }
        }
    }
    Ok(())
}

/// Splits the source into statements: one per line, except that an open
/// brace carries the statement onto following lines.
fn statements(src: &str) -> Result<Vec<Vec<(Tok, Pos)>>, ParseError> {
    let mut stmts = Vec::new();
    let mut cur: Vec<(Tok, Pos)> = Vec::new();
    let mut depth = 0i32;
    let mut open_at = Pos::default();
    for (ln, text) in src.lines().enumerate() {
        let start = cur.len();
        tokenize_line(text, ln + 1, &mut cur)?;
        for (t, p) in &cur[start..] {
            match t {
                Tok::LBrace => {
                    if depth == 0 {
                        open_at = *p;
                    }
                    depth += 1;
                }
                Tok::RBrace => depth -= 1,
                _ => {}
            }
            if depth < 0 {
                return Err(ParseError::at(*p, "unbalanced `}`"));
            }
        }
        if depth == 0 && !cur.is_empty() {
            stmts.push(std::mem::take(&mut cur));
        }
    }
    if depth > 0 {
        return Err(ParseError::at(open_at, "unclosed `{`"));
    }
    Ok(stmts)
}

struct Cursor<'a> {
    toks: &'a [(Tok, Pos)],
    i: usize,
}

impl<'a> Cursor<'a> {
    fn pos(&self) -> Pos {
        match self.toks.get(self.i) {
            Some((_, p)) => *p,
            None => {
                let (_, last) = self.toks.last().expect("statements are non-empty");
                Pos {
                    line: last.line,
                    column: last.column + 1,
                }
            }
        }
    }

    fn next(&mut self, what: &str) -> Result<(Tok, Pos), ParseError> {
        match self.toks.get(self.i) {
            Some(t) => {
                self.i += 1;
                Ok(t.clone())
            }
            None => Err(ParseError::at(
                self.pos(),
                format!("expected {what}, found end of line"),
            )),
        }
    }

    fn word(&mut self, what: &str) -> Result<(String, Pos), ParseError> {
        match self.next(what)? {
            (Tok::Word(w), p) => Ok((w, p)),
            (t, p) => Err(ParseError::at(p, format!("expected {what}, found {t}"))),
        }
    }

    fn string(&mut self, what: &str) -> Result<String, ParseError> {
        match self.next(what)? {
            (Tok::Str(s), _) => Ok(s),
            (t, p) => Err(ParseError::at(p, format!("expected {what}, found {t}"))),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        match self.next(&format!("`{kw}`"))? {
            (Tok::Word(w), _) if w == kw => Ok(()),
            (t, p) => Err(ParseError::at(p, format!("expected `{kw}`, found {t}"))),
        }
    }

    fn one_of<T: Copy>(&mut self, options: &[(&str, T)]) -> Result<T, ParseError> {
        let expected = options
            .iter()
            .map(|(k, _)| format!("`{k}`"))
            .collect::<Vec<_>>()
            .join(" or ");
        let (w, p) = self.word(&expected)?;
        options
            .iter()
            .find(|(k, _)| *k == w)
            .map(|(_, v)| *v)
            .ok_or_else(|| ParseError::at(p, format!("expected {expected}, found `{w}`")))
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        let what = tok.to_string();
        match self.next(&what)? {
            (t, _) if t == tok => Ok(()),
            (t, p) => Err(ParseError::at(p, format!("expected {what}, found {t}"))),
        }
    }

    fn end(&self) -> Result<(), ParseError> {
        match self.toks.get(self.i) {
            None => Ok(()),
            Some((t, p)) => Err(ParseError::at(
                *p,
                format!("unexpected {t} after declaration"),
            )),
        }
    }

    /// `{ item, item, ... }` with an optional trailing comma.
    fn list<T>(
        &mut self,
        mut item: impl FnMut(&mut Self) -> Result<T, ParseError>,
    ) -> Result<Vec<T>, ParseError> {
        self.expect(Tok::LBrace)?;
        let mut out = Vec::new();
        loop {
            if matches!(self.toks.get(self.i), Some((Tok::RBrace, _))) {
                self.i += 1;
                return Ok(out);
            }
            out.push(item(self)?);
            match self.next("`,` or `}`")? {
                (Tok::Comma, _) => {}
                (Tok::RBrace, _) => return Ok(out),
                (t, p) => {
                    return Err(ParseError::at(
                        p,
                        format!("expected `,` or `}}`, found {t}"),
                    ))
                }
            }
        }
    }
}

#[derive(Default)]
struct Locations {
    decl: HashMap<String, Pos>,
    refs: Vec<(String, Pos)>,
}

impl Locations {
    fn declare(&mut self, id: &str, pos: Pos) {
        self.decl.entry(id.to_string()).or_insert(pos);
    }

    fn reference(&mut self, from: &str, pos: Pos) {
        self.refs.push((from.to_string(), pos));
    }
}

/// Parses model source text. Structural invariants are enforced: the
/// returned model has unique ids, resolvable references and a well-formed
/// feature tree.
pub fn parse_model(src: &str) -> Result<Model, ParseError> {
    let mut m = Model::default();
    let mut loc = Locations::default();
    let mut saw_model = false;
    let mut dup_check: HashMap<String, Pos> = HashMap::new();

    for stmt in statements(src)? {
        let mut c = Cursor { toks: &stmt, i: 0 };
        let (kw, kw_pos) = c.word("a declaration keyword")?;
        let mut declare = |id: &str, pos: Pos, loc: &mut Locations| -> Result<(), ParseError> {
            if dup_check.contains_key(id) {
                return Err(ParseError::at(pos, format!("duplicate id {id}")));
            }
            dup_check.insert(id.to_string(), pos);
            loc.declare(id, pos);
            Ok(())
        };
        match kw.as_str() {
            "model" => {
                if saw_model {
                    return Err(ParseError::at(kw_pos, "model name declared twice"));
                }
                saw_model = true;
                m.name = c.string("model name")?;
            }
            "feature" => {
                let (id, p) = c.word("feature id")?;
                declare(&id, p, &mut loc)?;
                let name = c.string("feature name")?;
                let (rel, rp) = c.word("`root`, `mandatory` or `optional`")?;
                let (relation, parent) = match rel.as_str() {
                    "root" => (Relation::Root, None),
                    "mandatory" | "optional" => {
                        c.keyword("of")?;
                        let (parent, pp) = c.word("parent feature id")?;
                        loc.reference(&id, pp);
                        let r = if rel == "mandatory" {
                            Relation::Mandatory
                        } else {
                            Relation::Optional
                        };
                        (r, Some(parent))
                    }
                    other => {
                        return Err(ParseError::at(
                            rp,
                            format!("expected `root`, `mandatory` or `optional`, found `{other}`"),
                        ))
                    }
                };
                m.features.push(Feature {
                    id,
                    name,
                    parent,
                    relation,
                });
            }
            "group" => {
                let (gid, gp) = c.word("group id")?;
                declare(&gid, gp, &mut loc)?;
                let kind = c.one_of(&[("xor", GroupKind::Xor), ("or", GroupKind::Or)])?;
                c.keyword("of")?;
                let (parent, pp) = c.word("parent feature id")?;
                loc.reference(&gid, pp);
                let members = c.list(|c| {
                    let (id, p) = c.word("member feature id")?;
                    let name = c.string("member feature name")?;
                    Ok((id, p, name))
                })?;
                for (id, p, name) in members {
                    declare(&id, p, &mut loc)?;
                    let relation = match kind {
                        GroupKind::Xor => Relation::XorMember(gid.clone()),
                        GroupKind::Or => Relation::OrMember(gid.clone()),
                    };
                    m.features.push(Feature {
                        id,
                        name,
                        parent: Some(parent.clone()),
                        relation,
                    });
                }
            }
            "contextgroup" => {
                let (id, p) = c.word("context group id")?;
                declare(&id, p, &mut loc)?;
                let name = c.string("context group name")?;
                let kind = c.one_of(&[
                    ("xor", ContextGroupKind::Xor),
                    ("or", ContextGroupKind::Or),
                    ("optional", ContextGroupKind::Optional),
                ])?;
                m.context_groups.push(ContextGroup { id, name, kind });
            }
            "context" => {
                let (id, p) = c.word("context id")?;
                declare(&id, p, &mut loc)?;
                let name = c.string("context name")?;
                c.keyword("in")?;
                let (group, gp) = c.word("context group id")?;
                loc.reference(&id, gp);
                m.contexts.push(ContextFeature { id, name, group });
            }
            "rule" | "constraint" => {
                let (a, ap) = c.word("source id")?;
                let kind = c.one_of(&[
                    ("requires", RuleKind::Require),
                    ("excludes", RuleKind::Exclude),
                ])?;
                let (b, _) = c.word("target feature id")?;
                let from = format!("{kw} {a} {} {b}", kind.keyword());
                loc.reference(&from, ap);
                if kw == "rule" {
                    m.rules.push(AdaptationRule {
                        source: a,
                        target: b,
                        kind,
                    });
                } else {
                    m.constraints.push(FeatureConstraint { a, b, kind });
                }
            }
            "goal" => {
                let (id, p) = c.word("goal id")?;
                declare(&id, p, &mut loc)?;
                let name = c.string("goal name")?;
                m.goals.goals.push(Goal { id, name });
            }
            "hardgoal" => {
                let (id, p) = c.word("hard goal id")?;
                declare(&id, p, &mut loc)?;
                c.keyword("of")?;
                let (goal, gp) = c.word("goal id")?;
                loc.reference(&id, gp);
                let decomposition =
                    c.one_of(&[("and", Decomposition::And), ("or", Decomposition::Or)])?;
                c.keyword("binds")?;
                let (feature, _) = c.word("feature id")?;
                m.goals.hardgoals.push(HardGoal {
                    id,
                    goal,
                    decomposition,
                    feature,
                });
            }
            "softgoal" => {
                let (id, p) = c.word("soft goal id")?;
                declare(&id, p, &mut loc)?;
                let name = c.string("soft goal name")?;
                m.goals.softgoals.push(SoftGoal { id, name });
            }
            "link" => {
                let (hg, hp) = c.word("hard goal id")?;
                let (sg, _) = c.word("soft goal id")?;
                let level = match c.next("satisfaction level")? {
                    (Tok::Level(l), _) => l,
                    (t, p) => {
                        return Err(ParseError::at(
                            p,
                            format!("expected satisfaction level (++ + ? - --), found {t}"),
                        ))
                    }
                };
                loc.reference(&format!("link {hg} {sg}"), hp);
                m.goals.links.push(SoftGoalLink {
                    hardgoal: hg,
                    softgoal: sg,
                    level,
                });
            }
            "ccf" => {
                let (id, p) = c.word("ccf id")?;
                declare(&id, p, &mut loc)?;
                let members = c.list(|c| c.word("context id").map(|(w, _)| w))?;
                loc.reference(&id, p);
                m.cks
                    .get_or_insert_with(Cks::default)
                    .states
                    .push(CcfDecl { id, members });
            }
            "initial" => {
                let (id, p) = c.word("ccf id")?;
                let cks = m.cks.get_or_insert_with(Cks::default);
                if cks.initial.is_some() {
                    return Err(ParseError::at(kw_pos, "initial state declared twice"));
                }
                loc.reference("initial", p);
                cks.initial = Some(id);
            }
            "transition" => {
                let (a, ap) = c.word("source ccf id")?;
                c.expect(Tok::Arrow)?;
                let (b, _) = c.word("target ccf id")?;
                loc.reference(&format!("transition {a} -> {b}"), ap);
                m.cks
                    .get_or_insert_with(Cks::default)
                    .transitions
                    .push((a, b));
            }
            other => {
                return Err(ParseError::at(
                    kw_pos,
                    format!("unknown declaration `{other}`"),
                ));
            }
        }
        c.end()?;
    }

    if let Some(issue) = m.structural_issues().into_iter().next() {
        let subject = issue.subject();
        let pos = loc
            .refs
            .iter()
            .find(|(from, _)| from == subject)
            .map(|(_, p)| *p)
            .or_else(|| loc.decl.get(subject).copied())
            .unwrap_or(Pos { line: 1, column: 1 });
        return Err(ParseError::at(pos, issue.to_string()));
    }
    Ok(m)
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Canonical source text for a model. `parse_model(&serialize_model(m)) == m`
/// for every structurally valid model.
pub fn serialize_model(m: &Model) -> String {
    let mut lines: Vec<String> = Vec::new();
    if !m.name.is_empty() {
        lines.push(format!("model {}", quote(&m.name)));
    }
    let groups = m.feature_groups();
    let mut emitted_groups = Vec::new();
    for f in &m.features {
        match &f.relation {
            Relation::Root => lines.push(format!("feature {} {} root", f.id, quote(&f.name))),
            Relation::Mandatory | Relation::Optional => {
                let kw = if f.relation == Relation::Mandatory {
                    "mandatory"
                } else {
                    "optional"
                };
                lines.push(format!(
                    "feature {} {} {kw} of {}",
                    f.id,
                    quote(&f.name),
                    f.parent.as_deref().unwrap_or_default()
                ));
            }
            Relation::OrMember(gid) | Relation::XorMember(gid) => {
                if emitted_groups.contains(gid) {
                    continue;
                }
                emitted_groups.push(gid.clone());
                let g = groups
                    .iter()
                    .find(|g| &g.id == gid)
                    .expect("group of member");
                let members = g
                    .members
                    .iter()
                    .map(|&i| format!("{} {}", m.features[i].id, quote(&m.features[i].name)))
                    .collect::<Vec<_>>()
                    .join(", ");
                lines.push(format!(
                    "group {} {} of {} {{ {members} }}",
                    g.id,
                    g.kind.keyword(),
                    g.parent
                ));
            }
        }
    }
    for g in &m.context_groups {
        lines.push(format!(
            "contextgroup {} {} {}",
            g.id,
            quote(&g.name),
            g.kind.keyword()
        ));
    }
    for c in &m.contexts {
        lines.push(format!(
            "context {} {} in {}",
            c.id,
            quote(&c.name),
            c.group
        ));
    }
    for r in &m.rules {
        lines.push(format!(
            "rule {} {} {}",
            r.source,
            r.kind.keyword(),
            r.target
        ));
    }
    for c in &m.constraints {
        lines.push(format!("constraint {} {} {}", c.a, c.kind.keyword(), c.b));
    }
    for g in &m.goals.goals {
        lines.push(format!("goal {} {}", g.id, quote(&g.name)));
    }
    for h in &m.goals.hardgoals {
        lines.push(format!(
            "hardgoal {} of {} {} binds {}",
            h.id,
            h.goal,
            h.decomposition.keyword(),
            h.feature
        ));
    }
    for s in &m.goals.softgoals {
        lines.push(format!("softgoal {} {}", s.id, quote(&s.name)));
    }
    for l in &m.goals.links {
        lines.push(format!(
            "link {} {} {}",
            l.hardgoal,
            l.softgoal,
            l.level.symbol()
        ));
    }
    if let Some(cks) = &m.cks {
        for s in &cks.states {
            lines.push(format!("ccf {} {{ {} }}", s.id, s.members.join(", ")));
        }
        if let Some(init) = &cks.initial {
            lines.push(format!("initial {init}"));
        }
        for (a, b) in &cks.transitions {
            lines.push(format!("transition {a} -> {b}"));
        }
    }
    let mut out = lines.join("\n");
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_model() {
        let m = parse_model("feature f0 \"Root\" root\n").unwrap();
        assert_eq!(m.features.len(), 1);
        assert!(m.goals.is_empty());
        assert!(m.cks.is_none());
        assert_eq!(serialize_model(&m), "feature f0 \"Root\" root\n");
    }

    #[test]
    fn dangling_feature_in_rule() {
        let src = "feature f0 \"Root\" root\n\
                   contextgroup cg \"G\" optional\n\
                   context c1 \"C\" in cg\n\
                   rule c1 requires f99\n";
        let err = parse_model(src).unwrap_err();
        assert!(err.message.contains("dangling reference f99"), "{err}");
        assert_eq!(err.line, 4);
    }

    #[test]
    fn duplicate_id_is_rejected() {
        let err =
            parse_model("feature f0 \"R\" root\nfeature f0 \"S\" optional of f0\n").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.message.contains("duplicate id f0"));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse_model("feature f0 \"R\" rooot\n").unwrap_err();
        assert_eq!((err.line, err.column), (1, 16));
        let err = parse_model("feature f0 \"R\n").unwrap_err();
        assert!(err.message.contains("unterminated"));
        let err = parse_model("frobnicate x\n").unwrap_err();
        assert!(err.message.contains("unknown declaration"));
        let err = parse_model("feature f0 \"R\" root extra\n").unwrap_err();
        assert!(err.message.contains("unexpected"));
    }

    #[test]
    fn group_with_one_member_is_an_invariant_violation() {
        let err =
            parse_model("feature f0 \"R\" root\ngroup g xor of f0 { f1 \"A\" }\n").unwrap_err();
        assert!(err.message.contains("at least two members"), "{err}");
    }

    #[test]
    fn cycles_are_rejected() {
        let src = "feature f0 \"R\" root\n\
                   feature a \"A\" optional of b\n\
                   feature b \"B\" optional of a\n";
        let err = parse_model(src).unwrap_err();
        assert!(err.message.contains("cycle"), "{err}");
    }

    #[test]
    fn multiline_lists_and_comments() {
        let src = "feature f0 \"R\" root # the root\n\
                   group g or of f0 {\n  a \"A\",\n  b \"B\",\n}\n";
        let m = parse_model(src).unwrap();
        assert_eq!(m.features.len(), 3);
        assert_eq!(m.features[2].relation, Relation::OrMember("g".into()));
        assert_eq!(parse_model(&serialize_model(&m)).unwrap(), m);
    }

    #[test]
    fn contradictory_rule_pair_is_rejected() {
        let src = "feature f0 \"R\" root\nfeature a \"A\" optional of f0\n\
                   contextgroup cg \"G\" or\ncontext c \"C\" in cg\n\
                   rule c requires a\nrule c excludes a\n";
        let err = parse_model(src).unwrap_err();
        assert!(err.message.contains("more than one rule"), "{err}");
    }

    #[test]
    fn every_rule_kind_survives_serialization_once() {
        let src = "model \"all\"\nfeature r \"R\" root\nfeature a \"A\" optional of r\n\
                   feature b \"B\" optional of r\ngroup x xor of r { p \"P\", q \"Q\" }\n\
                   contextgroup cg \"G\" or\ncontext c1 \"C1\" in cg\ncontext c2 \"C2\" in cg\n\
                   rule c1 requires a\nrule c2 excludes a\nrule c1 excludes b\n\
                   constraint a requires b\nconstraint p excludes b\n\
                   goal g \"G\"\nhardgoal h1 of g or binds a\nhardgoal h2 of g or binds b\n\
                   softgoal s \"S\"\nlink h1 s ++\nlink h2 s --\n\
                   ccf k1 { c1 }\nccf k2 { c1, c2 }\ninitial k1\ntransition k1 -> k2\n";
        let m = parse_model(src).unwrap();
        let text = serialize_model(&m);
        for needle in [
            "rule c1 requires a",
            "rule c2 excludes a",
            "rule c1 excludes b",
            "constraint a requires b",
            "constraint p excludes b",
            "link h1 s ++",
            "link h2 s --",
            "transition k1 -> k2",
            "initial k1",
        ] {
            assert_eq!(text.matches(needle).count(), 1, "{needle}");
        }
        assert_eq!(parse_model(&text).unwrap(), m);
    }
}
