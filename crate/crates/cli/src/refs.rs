//! Contract references on the command line.
//!
//! A reference is either a name or an operator applied to references:
//!
//! ```text
//! ref  := name | op "(" ref ("," ref)* ")"
//! op   := comp | quot | conj | sat
//! ```
//!
//! A name resolves to a contract, a model (its contract) or a test case (its
//! test-case contract). Names that match more than one kind are ambiguous.

use simcontract::configurator::build_test_case_contract;
use simcontract::contract::{compose_all, conjoin, quotient, Contract};
use simcontract::dsl::Project;

pub fn resolve(project: &Project, text: &str) -> Result<Contract, String> {
    let mut p = RefParser { src: text, pos: 0 };
    let node = p.node()?;
    p.skip_ws();
    if p.pos != text.len() {
        return Err(format!(
            "unexpected `{}` in contract reference `{text}`",
            &text[p.pos..]
        ));
    }
    eval(project, &node)
}

#[derive(Debug, PartialEq)]
enum Node {
    Name(String),
    Apply(String, Vec<Node>),
}

struct RefParser<'a> {
    src: &'a str,
    pos: usize,
}

impl RefParser<'_> {
    fn skip_ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<String, String> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let len = rest
            .find(|c: char| !(c.is_alphanumeric() || c == '_' || c == '-' || c == '.'))
            .unwrap_or(rest.len());
        if len == 0 {
            return Err(format!(
                "expected a contract name at offset {} of `{}`",
                self.pos, self.src
            ));
        }
        self.pos += len;
        Ok(rest[..len].to_string())
    }

    fn node(&mut self) -> Result<Node, String> {
        let name = self.ident()?;
        if !self.eat('(') {
            return Ok(Node::Name(name));
        }
        let mut args = vec![self.node()?];
        while self.eat(',') {
            args.push(self.node()?);
        }
        if !self.eat(')') {
            return Err(format!(
                "expected `,` or `)` at offset {} of `{}`",
                self.pos, self.src
            ));
        }
        Ok(Node::Apply(name, args))
    }
}

fn eval(project: &Project, node: &Node) -> Result<Contract, String> {
    match node {
        Node::Name(name) => lookup(project, name),
        Node::Apply(op, args) => {
            let cs = args
                .iter()
                .map(|a| eval(project, a))
                .collect::<Result<Vec<_>, _>>()?;
            let arity = |n: usize| {
                if cs.len() == n {
                    Ok(())
                } else {
                    Err(format!("`{op}` takes {n} argument(s), got {}", cs.len()))
                }
            };
            let err = |e: simcontract::assertion::AlgebraError| e.to_string();
            match op.as_str() {
                "comp" => Ok(compose_all(&cs)
                    .map_err(err)?
                    .expect("at least one argument")),
                "conj" => {
                    let mut it = cs.into_iter();
                    let first = it.next().expect("at least one argument");
                    it.try_fold(first, |acc, c| conjoin(&acc, &c)).map_err(err)
                }
                "quot" => {
                    arity(2)?;
                    Ok(quotient(&cs[0], &cs[1]).map_err(err)?.contract)
                }
                "sat" => {
                    arity(1)?;
                    let c = &cs[0];
                    Ok(c.saturate().with_id(format!("sat({})", c.id)))
                }
                other => Err(format!(
                    "unknown operator `{other}` (expected comp, quot, conj or sat)"
                )),
            }
        }
    }
}

fn lookup(project: &Project, name: &str) -> Result<Contract, String> {
    let mut found = Vec::new();
    if let Some(c) = project.contracts.get(name) {
        found.push(("contract", c.clone()));
    }
    if let Some(m) = project.architecture.model(name) {
        found.push(("model", m.contract.clone()));
    }
    if let Some(tc) = project.test_cases.get(name) {
        let c = build_test_case_contract(tc, &project.architecture)
            .map_err(|e| format!("test case `{name}`: {e}"))?;
        found.push(("test case", c));
    }
    match found.len() {
        0 => Err(format!("`{name}` is not a contract, model or test case")),
        1 => Ok(found.pop().expect("one entry").1),
        _ => Err(format!(
            "`{name}` is ambiguous: it names a {}",
            found
                .iter()
                .map(|(k, _)| *k)
                .collect::<Vec<_>>()
                .join(" and a ")
        )),
    }
}
