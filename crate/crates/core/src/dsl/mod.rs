//! Textual assertion language and the project file format.

mod lexer;
mod parser;
pub mod project;
mod render;

use std::fmt;

use thiserror::Error;

pub use lexer::Pos;
pub use parser::parse_assertion;
pub use project::{load_project, save_project, Project, ProjectError, FORMAT_VERSION};
pub use render::render_assertion;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    UnknownVariable,
    TypeMismatch,
    OutOfDomainLiteral,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ParseErrorKind::Syntax => "syntax error",
            ParseErrorKind::UnknownVariable => "unknown variable",
            ParseErrorKind::TypeMismatch => "type mismatch",
            ParseErrorKind::OutOfDomainLiteral => "literal outside domain",
        })
    }
}

/// Rejected assertion text, located by 1-based line and column.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{line}:{column}: {kind}: {message}{}", expected_suffix(.expected))]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub line: usize,
    pub column: usize,
    pub message: String,
    /// Tokens that would have been accepted, for syntax errors.
    pub expected: Vec<String>,
}

fn expected_suffix(expected: &[String]) -> String {
    if expected.is_empty() {
        String::new()
    } else {
        format!(" (expected {})", expected.join(", "))
    }
}

impl ParseError {
    pub(crate) fn new(kind: ParseErrorKind, pos: Pos, message: String) -> Self {
        Self {
            kind,
            line: pos.line,
            column: pos.column,
            message,
            expected: Vec::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::assertion::{Alphabet, Interval, Valuation, Value, VariableDecl};

    fn alphabet() -> Arc<Alphabet> {
        Arc::new(
            Alphabet::new(vec![
                VariableDecl::real("s", "m/s", 0.0, 70.0).unwrap(),
                VariableDecl::real("e", "m", 0.0, 5.0).unwrap(),
                VariableDecl::enumeration("r", &["hw", "ru", "ur"]).unwrap(),
                VariableDecl::boolean("wet").unwrap(),
                VariableDecl::integer("lanes", "", 1, 4).unwrap(),
            ])
            .unwrap(),
        )
    }

    fn parse(text: &str) -> AssertionSet {
        parse_assertion(text, &alphabet()).unwrap()
    }

    use crate::assertion::AssertionSet;

    #[test]
    fn conjunction_is_one_box() {
        let e = parse("s in [0,30] & r in {hw,ru}");
        assert_eq!(e.boxes().len(), 1);
        assert_eq!(e.boxes()[0].constrained(e.alphabet()).count(), 2);
    }

    #[test]
    fn negation_complements() {
        let e = parse("!(s in [0,30])");
        let expected = AssertionSet::interval(
            alphabet(),
            "s",
            Interval {
                lo: 30.0,
                lo_closed: false,
                hi: 70.0,
                hi_closed: true,
            },
        )
        .unwrap();
        assert_eq!(e.boxes(), expected.boxes());
        assert_eq!(render_assertion(&e), "s in (30, 70]");
    }

    #[test]
    fn disjunction_membership() {
        let e = parse("s in [0,30] | e <= 0.5");
        assert_eq!(e.boxes().len(), 2);
        let v: Valuation = [
            ("s", Value::Number(50.0)),
            ("e", Value::Number(0.4)),
            ("r", Value::Label("hw".into())),
            ("wet", Value::Bool(false)),
            ("lanes", Value::Number(2.0)),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        assert!(e.member(&v).unwrap());
    }

    #[test]
    fn canonical_render() {
        assert_eq!(render_assertion(&parse("s in [0,30]")), "s in [0, 30]");
        assert_eq!(render_assertion(&parse("true")), "true");
        assert_eq!(render_assertion(&parse("false | s in (1, 1)")), "false");
        assert_eq!(
            render_assertion(&parse("r != ur & s > 10")),
            "r in {hw, ru} & s in (10, 70]"
        );
        assert_eq!(render_assertion(&parse("wet == true")), "wet in {true}");
        assert_eq!(render_assertion(&parse("lanes < 3")), "lanes in [1, 2]");
    }

    #[test]
    fn comparisons_desugar_to_intervals() {
        assert_eq!(parse("s <= 30"), parse("s in [0, 30]"));
        assert_eq!(parse("s != 30"), parse("s in [0,30) | s in (30,70]"));
        assert_eq!(parse("s == 0"), parse("s in [0,0]"));
        assert_eq!(parse("r != hw"), parse("r in {ru, ur}"));
        assert_eq!(parse("!(!(e >= 1))"), parse("e in [1, 5]"));
        assert_eq!(
            parse("(s < 10 | s > 20) & e < 1 # trailing comment"),
            parse("!(s in [10, 20]) & e in [0, 1)")
        );
    }

    #[test]
    fn precedence() {
        assert_eq!(
            parse("s < 10 | s > 60 & e < 1"),
            parse("s < 10 | (s > 60 & e < 1)")
        );
        assert_eq!(parse("!s < 10 & e < 1"), parse("(!(s < 10)) & e < 1"));
    }

    #[test]
    fn errors_carry_positions() {
        let a = alphabet();
        let err = parse_assertion("s in [0,30", &a).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::Syntax);
        assert_eq!((err.line, err.column), (1, 11));
        assert!(err.expected.contains(&"`]`".to_string()));

        let err = parse_assertion("s in [0,30] &\n  zz < 3", &a).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnknownVariable);
        assert_eq!((err.line, err.column), (2, 3));

        let err = parse_assertion("s in {hw}", &a).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::TypeMismatch);
        let err = parse_assertion("r == 3", &a).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::TypeMismatch);
        let err = parse_assertion("r < hw", &a).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::TypeMismatch);

        let err = parse_assertion("s <= 100", &a).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::OutOfDomainLiteral);
        assert_eq!(err.column, 6);
        let err = parse_assertion("r in {hw, xx}", &a).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::OutOfDomainLiteral);

        let err = parse_assertion("", &a).unwrap_err();
        assert_eq!((err.line, err.column), (1, 1));
        let err = parse_assertion("s in [0,1] s", &a).unwrap_err();
        assert_eq!(err.column, 12);
    }

    #[test]
    fn deep_nesting_is_an_error_not_a_crash() {
        let a = alphabet();
        let text = "(".repeat(10_000) + "s < 1" + &")".repeat(10_000);
        assert!(parse_assertion(&text, &a).is_err());
        let text = "!".repeat(10_000) + "s < 1";
        assert!(parse_assertion(&text, &a).is_err());
        let ok = "(".repeat(50) + "s < 1" + &")".repeat(50);
        assert!(parse_assertion(&ok, &a).is_ok());
    }
}
