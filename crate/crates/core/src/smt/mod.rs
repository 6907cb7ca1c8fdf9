//! SMT-LIB 2 generation.
//!
//! Variable naming is fixed: `node_<id>` (Bool), `clock_<id>`, `label_<id>`,
//! `score_<id>` (Int), `pair_<a>__<b>` (Int, `a` in the earlier graph),
//! `obj` (Int); path-rule artifacts use `F_<id>` plus the `efficient` and
//! `formal` Booleans. Node ids are validated to `[A-Za-z0-9_]+`, so names
//! never need quoting.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::model::NodeId;

mod full;
mod paths;

pub use full::{encode_full, encode_full_with, FullOptions};
pub use paths::{
    efficient_holds, encode_efficient, encode_efficient_with, encode_equivalence, encode_equivalence_with, encode_formal,
    formal_holds, PathRuleOptions,
};

pub const LOGIC: &str = "QF_LIA";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ArtifactKind {
    Full,
    Efficient,
    Formal,
    Equivalence,
}

/// How the full encoding asks for the optimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EncodeStrategy {
    /// Emit `(maximize obj)`; needs a solver with the optimization extension.
    #[default]
    NativeMaximize,
    /// Plain satisfiability; the driver adds `obj >= b` bounds itself.
    SatisfactionOnly,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(tag = "entity", content = "id", rename_all = "snake_case")]
pub enum SmtEntity {
    Node(NodeId),
    Clock(NodeId),
    Label(NodeId),
    Score(NodeId),
    Pair(NodeId, NodeId),
    Objective,
    Selection(NodeId),
    Efficient,
    Formal,
}

impl SmtEntity {
    pub fn name(&self) -> String {
        match self {
            Self::Node(n) => format!("node_{n}"),
            Self::Clock(n) => format!("clock_{n}"),
            Self::Label(n) => format!("label_{n}"),
            Self::Score(n) => format!("score_{n}"),
            Self::Pair(a, b) => format!("pair_{a}__{b}"),
            Self::Objective => "obj".to_owned(),
            Self::Selection(n) => format!("F_{n}"),
            Self::Efficient => "efficient".to_owned(),
            Self::Formal => "formal".to_owned(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SmtArtifact {
    pub kind: ArtifactKind,
    pub text: String,
    pub var_map: BTreeMap<String, SmtEntity>,
}

impl SmtArtifact {
    /// Copy of the artifact with `assertion` inserted before the first
    /// `(check-sat)`, or appended when there is none.
    pub fn with_assertion(&self, assertion: &str) -> SmtArtifact {
        let mut out = self.clone();
        let line = format!("(assert {assertion})\n");
        match out.text.find("(check-sat)") {
            Some(at) => out.text.insert_str(at, &line),
            None => out.text.push_str(&line),
        }
        out
    }

    /// Copy with extra commands appended at the end.
    pub fn with_commands(&self, commands: &str) -> SmtArtifact {
        let mut out = self.clone();
        out.text.push_str(commands);
        if !out.text.ends_with('\n') {
            out.text.push('\n');
        }
        out
    }

    /// Names of declared variables of the given shape, in var_map order.
    pub fn names_where(&self, pred: impl Fn(&SmtEntity) -> bool) -> Vec<&str> {
        self.var_map
            .iter()
            .filter(|(_, e)| pred(e))
            .map(|(n, _)| n.as_str())
            .collect()
    }
}

/// Integer literal; SMT-LIB has no negative numerals.
pub(crate) fn int(v: i64) -> String {
    if v < 0 {
        format!("(- {})", v.unsigned_abs())
    } else {
        v.to_string()
    }
}

/// n-ary connective that degrades gracefully for 0 or 1 arguments.
pub(crate) fn nary(op: &str, args: &[String], empty: &str) -> String {
    match args {
        [] => empty.to_owned(),
        [one] => one.clone(),
        _ => {
            let mut s = format!("({op}");
            for a in args {
                s.push(' ');
                s.push_str(a);
            }
            s.push(')');
            s
        }
    }
}

pub(crate) fn and(args: &[String]) -> String {
    nary("and", args, "true")
}

pub(crate) fn or(args: &[String]) -> String {
    nary("or", args, "false")
}

pub(crate) fn not(arg: &str) -> String {
    format!("(not {arg})")
}

pub(crate) fn implies(lhs: &str, rhs: &str) -> String {
    format!("(=> {lhs} {rhs})")
}

pub(crate) struct Writer {
    pub text: String,
    pub var_map: BTreeMap<String, SmtEntity>,
}

impl Writer {
    pub fn new() -> Self {
        let mut text = String::new();
        let _ = writeln!(text, "(set-logic {LOGIC})");
        let _ = writeln!(text, "(set-option :produce-models true)");
        Self {
            text,
            var_map: BTreeMap::new(),
        }
    }

    pub fn comment(&mut self, c: &str) {
        let _ = writeln!(self.text, "; {c}");
    }

    pub fn declare(&mut self, entity: SmtEntity, sort: &str) -> String {
        let name = entity.name();
        let _ = writeln!(self.text, "(declare-const {name} {sort})");
        self.var_map.insert(name.clone(), entity);
        name
    }

    pub fn define_bool(&mut self, entity: SmtEntity, body: &str) {
        let name = entity.name();
        let _ = writeln!(self.text, "(define-fun {name} () Bool {body})");
        self.var_map.insert(name, entity);
    }

    pub fn assert(&mut self, term: &str) {
        let _ = writeln!(self.text, "(assert {term})");
    }

    pub fn line(&mut self, l: &str) {
        self.text.push_str(l);
        self.text.push('\n');
    }

    pub fn finish(self, kind: ArtifactKind) -> SmtArtifact {
        SmtArtifact {
            kind,
            text: self.text,
            var_map: self.var_map,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literals_and_connectives() {
        assert_eq!(int(-5), "(- 5)");
        assert_eq!(int(7), "7");
        assert_eq!(int(i64::MIN), "(- 9223372036854775808)");
        assert_eq!(and(&[]), "true");
        assert_eq!(or(&["x".into()]), "x");
        assert_eq!(and(&["x".into(), "y".into()]), "(and x y)");
    }

    #[test]
    fn assertion_goes_before_check_sat() {
        let a = SmtArtifact {
            kind: ArtifactKind::Full,
            text: "(declare-const obj Int)\n(check-sat)\n".into(),
            var_map: BTreeMap::new(),
        };
        assert_eq!(
            a.with_assertion("(>= obj 3)").text,
            "(declare-const obj Int)\n(assert (>= obj 3))\n(check-sat)\n"
        );
    }
}
