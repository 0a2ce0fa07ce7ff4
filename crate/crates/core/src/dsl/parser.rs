use std::sync::Arc;

use super::lexer::{tokenize, CmpOp, Pos, Tok, Token};
use super::{ParseError, ParseErrorKind};
use crate::assertion::{Alphabet, AssertionSet, Atom, Domain, Interval, LabelSet, VariableDecl};

/// Nesting bound for parentheses and negations.
const MAX_DEPTH: usize = 200;

#[derive(Debug, Clone)]
enum Literal {
    Number(f64),
    Label(String),
    Bool(bool),
}

#[derive(Debug, Clone)]
enum AtomExpr {
    Interval {
        lo: (f64, Pos),
        lo_closed: bool,
        hi: (f64, Pos),
        hi_closed: bool,
    },
    Labels(Vec<(Literal, Pos)>),
    Compare(CmpOp, Literal, Pos),
}

#[derive(Debug, Clone)]
enum Expr {
    Or(Vec<Expr>),
    And(Vec<Expr>),
    Not(Box<Expr>),
    Const(bool),
    Atom {
        variable: String,
        pos: Pos,
        constraint: AtomExpr,
    },
}

struct Parser {
    tokens: Vec<Token>,
    at: usize,
    depth: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.at]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.at].clone();
        if self.at + 1 < self.tokens.len() {
            self.at += 1;
        }
        t
    }

    fn unexpected(&self, expected: &[&str]) -> ParseError {
        let t = self.peek();
        let mut err = ParseError::new(
            ParseErrorKind::Syntax,
            t.pos,
            format!("unexpected {}", t.tok.describe()),
        );
        err.expected = expected.iter().map(|s| s.to_string()).collect();
        err
    }

    fn expect(&mut self, tok: Tok, name: &str) -> Result<Token, ParseError> {
        if self.peek().tok == tok {
            Ok(self.bump())
        } else {
            Err(self.unexpected(&[name]))
        }
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(ParseError::new(
                ParseErrorKind::Syntax,
                self.peek().pos,
                format!("expression nested deeper than {MAX_DEPTH} levels"),
            ));
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut terms = vec![self.term()?];
        while self.peek().tok == Tok::Pipe {
            self.bump();
            terms.push(self.term()?);
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            Expr::Or(terms)
        })
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut factors = vec![self.factor()?];
        while self.peek().tok == Tok::Amp {
            self.bump();
            factors.push(self.factor()?);
        }
        Ok(if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            Expr::And(factors)
        })
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        match self.peek().tok.clone() {
            Tok::Bang => {
                self.bump();
                self.enter()?;
                let inner = self.factor()?;
                self.depth -= 1;
                Ok(Expr::Not(Box::new(inner)))
            }
            Tok::LParen => {
                self.bump();
                self.enter()?;
                let inner = self.expr()?;
                self.depth -= 1;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Tok::True => {
                self.bump();
                Ok(Expr::Const(true))
            }
            Tok::False => {
                self.bump();
                Ok(Expr::Const(false))
            }
            Tok::Ident(name) => {
                let pos = self.bump().pos;
                let constraint = self.constraint()?;
                Ok(Expr::Atom {
                    variable: name,
                    pos,
                    constraint,
                })
            }
            _ => Err(self.unexpected(&["`!`", "`(`", "identifier", "`true`", "`false`"])),
        }
    }

    fn constraint(&mut self) -> Result<AtomExpr, ParseError> {
        match self.peek().tok.clone() {
            Tok::In => {
                self.bump();
                match self.peek().tok {
                    Tok::LBracket | Tok::LParen => self.interval(),
                    Tok::LBrace => self.label_set(),
                    _ => Err(self.unexpected(&["`[`", "`(`", "`{`"])),
                }
            }
            Tok::Cmp(op) => {
                self.bump();
                let (lit, pos) = self.literal()?;
                Ok(AtomExpr::Compare(op, lit, pos))
            }
            _ => Err(self.unexpected(&["`in`", "`==`", "`!=`", "`<`", "`<=`", "`>`", "`>=`"])),
        }
    }

    fn number(&mut self) -> Result<(f64, Pos), ParseError> {
        match self.peek().tok {
            Tok::Number(x) => {
                let pos = self.bump().pos;
                Ok((x, pos))
            }
            _ => Err(self.unexpected(&["number"])),
        }
    }

    fn interval(&mut self) -> Result<AtomExpr, ParseError> {
        let lo_closed = self.bump().tok == Tok::LBracket;
        let lo = self.number()?;
        self.expect(Tok::Comma, "`,`")?;
        let hi = self.number()?;
        let hi_closed = match self.peek().tok {
            Tok::RBracket => true,
            Tok::RParen => false,
            _ => return Err(self.unexpected(&["`]`", "`)`"])),
        };
        self.bump();
        Ok(AtomExpr::Interval {
            lo,
            lo_closed,
            hi,
            hi_closed,
        })
    }

    fn label_set(&mut self) -> Result<AtomExpr, ParseError> {
        self.bump();
        let mut labels = vec![self.literal()?];
        loop {
            match self.peek().tok {
                Tok::Comma => {
                    self.bump();
                    labels.push(self.literal()?);
                }
                Tok::RBrace => {
                    self.bump();
                    return Ok(AtomExpr::Labels(labels));
                }
                _ => return Err(self.unexpected(&["`,`", "`}`"])),
            }
        }
    }

    fn literal(&mut self) -> Result<(Literal, Pos), ParseError> {
        let pos = self.peek().pos;
        let lit = match self.peek().tok.clone() {
            Tok::Number(x) => Literal::Number(x),
            Tok::Ident(s) => Literal::Label(s),
            Tok::True => Literal::Bool(true),
            Tok::False => Literal::Bool(false),
            _ => return Err(self.unexpected(&["number", "label", "`true`", "`false`"])),
        };
        self.bump();
        Ok((lit, pos))
    }
}

/// Parses an assertion expression and elaborates it into a set over `alphabet`.
///
/// Grammar (precedence `!` > `&` > `|`):
///
/// ```text
/// expr     := term ('|' term)*
/// term     := factor ('&' factor)*
/// factor   := '!' factor | '(' expr ')' | 'true' | 'false' | atom
/// atom     := IDENT 'in' interval | IDENT 'in' '{' label (',' label)* '}'
///           | IDENT ('=='|'!='|'<'|'<='|'>'|'>=') literal
/// interval := ('['|'(') number ',' number (']'|')')
/// ```
pub fn parse_assertion(text: &str, alphabet: &Arc<Alphabet>) -> Result<AssertionSet, ParseError> {
    let tokens = tokenize(text)?;
    let mut p = Parser {
        tokens,
        at: 0,
        depth: 0,
    };
    let expr = p.expr()?;
    if p.peek().tok != Tok::Eof {
        return Err(p.unexpected(&["`|`", "`&`", "end of input"]));
    }
    elaborate(&expr, alphabet)
}

fn elaborate(expr: &Expr, alphabet: &Arc<Alphabet>) -> Result<AssertionSet, ParseError> {
    match expr {
        Expr::Const(true) => Ok(AssertionSet::universe(alphabet.clone())),
        Expr::Const(false) => Ok(AssertionSet::empty(alphabet.clone())),
        Expr::Not(inner) => Ok(elaborate(inner, alphabet)?.complement()),
        Expr::Or(parts) => {
            let mut acc = AssertionSet::empty(alphabet.clone());
            for p in parts {
                acc = acc.union(&elaborate(p, alphabet)?).expect("one alphabet");
            }
            Ok(acc)
        }
        Expr::And(parts) => {
            let mut acc = AssertionSet::universe(alphabet.clone());
            for p in parts {
                acc = acc
                    .intersect(&elaborate(p, alphabet)?)
                    .expect("one alphabet");
            }
            Ok(acc)
        }
        Expr::Atom {
            variable,
            pos,
            constraint,
        } => {
            let decl = alphabet.get(variable).ok_or_else(|| {
                ParseError::new(
                    ParseErrorKind::UnknownVariable,
                    *pos,
                    format!("unknown variable `{variable}`"),
                )
            })?;
            let single = |atom: Option<Atom>| match atom {
                Some(atom) => AssertionSet::from_atom(alphabet.clone(), variable, atom)
                    .expect("atom kind checked against declaration"),
                None => AssertionSet::empty(alphabet.clone()),
            };
            Ok(match atom_for(decl, *pos, constraint)? {
                Elaborated::Atom(atom) => single(atom),
                Elaborated::Not(atom) => single(atom).complement(),
            })
        }
    }
}

fn type_mismatch(decl: &VariableDecl, pos: Pos, what: &str) -> ParseError {
    ParseError::new(
        ParseErrorKind::TypeMismatch,
        pos,
        format!(
            "{what} cannot constrain {} variable `{}`",
            decl.kind(),
            decl.name
        ),
    )
}

fn check_in_domain(decl: &VariableDecl, x: f64, pos: Pos) -> Result<(), ParseError> {
    let (lo, hi) = decl.domain.bounds().expect("numeric variable");
    if x < lo || x > hi {
        return Err(ParseError::new(
            ParseErrorKind::OutOfDomainLiteral,
            pos,
            format!(
                "{x} lies outside the domain [{lo}, {hi}] of `{}`",
                decl.name
            ),
        ));
    }
    Ok(())
}

fn label_index(decl: &VariableDecl, lit: &Literal, pos: Pos) -> Result<u32, ParseError> {
    let text = match (lit, &decl.domain) {
        (Literal::Bool(b), Domain::Boolean) => b.to_string(),
        (Literal::Label(l), Domain::Enumeration(_)) => l.clone(),
        (Literal::Number(_), _) => return Err(type_mismatch(decl, pos, "a number")),
        (Literal::Bool(_), _) => return Err(type_mismatch(decl, pos, "a boolean literal")),
        (Literal::Label(l), _) => return Err(type_mismatch(decl, pos, &format!("label `{l}`"))),
    };
    decl.label_index(&text).ok_or_else(|| {
        ParseError::new(
            ParseErrorKind::OutOfDomainLiteral,
            pos,
            format!("`{text}` is not a label of `{}`", decl.name),
        )
    })
}

enum Elaborated {
    Atom(Option<Atom>),
    Not(Option<Atom>),
}

fn atom_for(decl: &VariableDecl, pos: Pos, c: &AtomExpr) -> Result<Elaborated, ParseError> {
    let numeric = decl.domain.bounds();
    match c {
        AtomExpr::Interval {
            lo,
            lo_closed,
            hi,
            hi_closed,
        } => {
            if numeric.is_none() {
                return Err(type_mismatch(decl, pos, "an interval"));
            }
            check_in_domain(decl, lo.0, lo.1)?;
            check_in_domain(decl, hi.0, hi.1)?;
            if lo.0 > hi.0 {
                return Err(ParseError::new(
                    ParseErrorKind::Syntax,
                    lo.1,
                    format!("interval lower bound {} exceeds upper bound {}", lo.0, hi.0),
                ));
            }
            Ok(Elaborated::Atom(Atom::range(
                decl,
                Interval {
                    lo: lo.0,
                    lo_closed: *lo_closed,
                    hi: hi.0,
                    hi_closed: *hi_closed,
                },
            )))
        }
        AtomExpr::Labels(labels) => {
            if numeric.is_some() {
                return Err(type_mismatch(decl, pos, "a label set"));
            }
            let mut set = LabelSet(0);
            for (lit, p) in labels {
                set.0 |= 1 << label_index(decl, lit, *p)?;
            }
            Ok(Elaborated::Atom(Atom::labels(decl, set)))
        }
        AtomExpr::Compare(op, lit, lit_pos) => match numeric {
            Some((dlo, dhi)) => {
                let x = match lit {
                    Literal::Number(x) => *x,
                    _ => return Err(type_mismatch(decl, *lit_pos, "a non-numeric literal")),
                };
                check_in_domain(decl, x, *lit_pos)?;
                let iv = |lo, lo_closed, hi, hi_closed| Interval {
                    lo,
                    lo_closed,
                    hi,
                    hi_closed,
                };
                let point = iv(x, true, x, true);
                let atom = match op {
                    CmpOp::Eq => Atom::range(decl, point),
                    CmpOp::Ne => return Ok(Elaborated::Not(Atom::range(decl, point))),
                    CmpOp::Lt => Atom::range(decl, iv(dlo, true, x, false)),
                    CmpOp::Le => Atom::range(decl, iv(dlo, true, x, true)),
                    CmpOp::Gt => Atom::range(decl, iv(x, false, dhi, true)),
                    CmpOp::Ge => Atom::range(decl, iv(x, true, dhi, true)),
                };
                Ok(Elaborated::Atom(atom))
            }
            None => {
                let ix = label_index(decl, lit, *lit_pos)?;
                let full = LabelSet::full(decl.domain.labels().map_or(0, |l| l.len()));
                match op {
                    CmpOp::Eq => Ok(Elaborated::Atom(Atom::labels(decl, LabelSet::single(ix)))),
                    CmpOp::Ne => Ok(Elaborated::Atom(Atom::labels(
                        decl,
                        LabelSet(full.0 & !(1 << ix)),
                    ))),
                    _ => Err(type_mismatch(decl, pos, "an ordering comparison")),
                }
            }
        },
    }
}
