use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::AlgebraError;

/// Enumeration domains are stored as bit sets, which caps their size.
pub const MAX_LABELS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarKind {
    Real,
    Integer,
    Boolean,
    Enumeration,
}

impl fmt::Display for VarKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VarKind::Real => "real",
            VarKind::Integer => "integer",
            VarKind::Boolean => "boolean",
            VarKind::Enumeration => "enumeration",
        })
    }
}

/// Declared value range of a variable. Every domain is bounded.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    Real { lo: f64, hi: f64 },
    Integer { lo: i64, hi: i64 },
    Boolean,
    Enumeration(Vec<String>),
}

impl Domain {
    pub fn kind(&self) -> VarKind {
        match self {
            Domain::Real { .. } => VarKind::Real,
            Domain::Integer { .. } => VarKind::Integer,
            Domain::Boolean => VarKind::Boolean,
            Domain::Enumeration(_) => VarKind::Enumeration,
        }
    }

    /// Numeric bounds for real and integer domains.
    pub fn bounds(&self) -> Option<(f64, f64)> {
        match self {
            Domain::Real { lo, hi } => Some((*lo, *hi)),
            Domain::Integer { lo, hi } => Some((*lo as f64, *hi as f64)),
            _ => None,
        }
    }

    /// Label list for boolean (`false`, `true`) and enumeration domains.
    pub fn labels(&self) -> Option<Vec<&str>> {
        match self {
            Domain::Boolean => Some(vec!["false", "true"]),
            Domain::Enumeration(labels) => Some(labels.iter().map(String::as_str).collect()),
            _ => None,
        }
    }

    fn describe(&self) -> String {
        match self {
            Domain::Real { lo, hi } => format!("[{lo}, {hi}]"),
            Domain::Integer { lo, hi } => format!("[{lo}, {hi}]"),
            Domain::Boolean => "{false, true}".to_string(),
            Domain::Enumeration(labels) => format!("{{{}}}", labels.join(", ")),
        }
    }
}

/// A typed, unit-carrying variable with a bounded domain.
#[derive(Debug, Clone, PartialEq)]
pub struct VariableDecl {
    pub name: String,
    pub unit: String,
    pub domain: Domain,
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub(crate) fn is_keyword(s: &str) -> bool {
    matches!(s, "in" | "true" | "false")
}

impl VariableDecl {
    pub fn new(
        name: impl Into<String>,
        unit: impl Into<String>,
        domain: Domain,
    ) -> Result<Self, AlgebraError> {
        let name = name.into();
        if !is_identifier(&name) || is_keyword(&name) {
            return Err(AlgebraError::InvalidDeclaration {
                variable: name,
                reason: "name is not a valid identifier".into(),
            });
        }
        let invalid = |reason: &str| AlgebraError::InvalidDeclaration {
            variable: name.clone(),
            reason: reason.to_string(),
        };
        match &domain {
            Domain::Real { lo, hi } => {
                if !lo.is_finite() || !hi.is_finite() {
                    return Err(invalid("domain bounds must be finite"));
                }
                if lo > hi {
                    return Err(invalid("lower bound exceeds upper bound"));
                }
            }
            Domain::Integer { lo, hi } => {
                if lo > hi {
                    return Err(invalid("lower bound exceeds upper bound"));
                }
                const EXACT: i64 = 1 << 53;
                if lo.abs() > EXACT || hi.abs() > EXACT {
                    return Err(invalid("integer bounds must be within +/-2^53"));
                }
            }
            Domain::Boolean => {}
            Domain::Enumeration(labels) => {
                if labels.is_empty() {
                    return Err(invalid("enumeration needs at least one label"));
                }
                if labels.len() > MAX_LABELS {
                    return Err(invalid("enumeration has more than 64 labels"));
                }
                for (i, l) in labels.iter().enumerate() {
                    if !is_identifier(l) || is_keyword(l) {
                        return Err(invalid(&format!("label `{l}` is not a valid identifier")));
                    }
                    if labels[..i].contains(l) {
                        return Err(invalid(&format!("duplicate label `{l}`")));
                    }
                }
            }
        }
        Ok(Self {
            name,
            unit: unit.into(),
            domain,
        })
    }

    pub fn real(name: &str, unit: &str, lo: f64, hi: f64) -> Result<Self, AlgebraError> {
        Self::new(name, unit, Domain::Real { lo, hi })
    }

    pub fn integer(name: &str, unit: &str, lo: i64, hi: i64) -> Result<Self, AlgebraError> {
        Self::new(name, unit, Domain::Integer { lo, hi })
    }

    pub fn boolean(name: &str) -> Result<Self, AlgebraError> {
        Self::new(name, "", Domain::Boolean)
    }

    pub fn enumeration(name: &str, labels: &[&str]) -> Result<Self, AlgebraError> {
        Self::new(
            name,
            "",
            Domain::Enumeration(labels.iter().map(|l| l.to_string()).collect()),
        )
    }

    pub fn kind(&self) -> VarKind {
        self.domain.kind()
    }

    pub(crate) fn label_count(&self) -> usize {
        match &self.domain {
            Domain::Boolean => 2,
            Domain::Enumeration(labels) => labels.len(),
            _ => 0,
        }
    }

    pub fn label_index(&self, label: &str) -> Option<u32> {
        match &self.domain {
            Domain::Boolean => match label {
                "false" => Some(0),
                "true" => Some(1),
                _ => None,
            },
            Domain::Enumeration(labels) => labels.iter().position(|l| l == label).map(|i| i as u32),
            _ => None,
        }
    }

    pub(crate) fn label_at(&self, index: u32) -> Value {
        match &self.domain {
            Domain::Boolean => Value::Bool(index == 1),
            Domain::Enumeration(labels) => Value::Label(labels[index as usize].clone()),
            _ => unreachable!("label lookup on numeric variable"),
        }
    }

    /// Checks that `value` has the right shape and lies in the declared domain.
    pub(crate) fn coordinate(&self, value: &Value) -> Result<Coord, AlgebraError> {
        let violation = || AlgebraError::DomainViolation {
            variable: self.name.clone(),
            value: value.to_string(),
            domain: self.domain.describe(),
        };
        match (&self.domain, value) {
            (Domain::Real { lo, hi }, Value::Number(x)) => {
                if x >= lo && x <= hi {
                    Ok(Coord::Num(*x))
                } else {
                    Err(violation())
                }
            }
            (Domain::Integer { lo, hi }, Value::Number(x)) => {
                if x.fract() == 0.0 && *x >= *lo as f64 && *x <= *hi as f64 {
                    Ok(Coord::Num(*x))
                } else {
                    Err(violation())
                }
            }
            (Domain::Boolean, Value::Bool(b)) => Ok(Coord::Label(u32::from(*b))),
            (Domain::Boolean, Value::Label(l)) | (Domain::Enumeration(_), Value::Label(l)) => {
                self.label_index(l).map(Coord::Label).ok_or_else(violation)
            }
            _ => Err(violation()),
        }
    }

    /// True when both declarations describe the same variable syntax.
    pub fn same_syntax(&self, other: &VariableDecl) -> bool {
        self == other
    }

    /// Human-readable reason why two same-named declarations conflict.
    pub fn conflict_with(&self, other: &VariableDecl) -> Option<String> {
        if self.kind() != other.kind() {
            Some(format!("kind {} vs {}", self.kind(), other.kind()))
        } else if self.unit != other.unit {
            Some(format!("unit `{}` vs `{}`", self.unit, other.unit))
        } else if self.domain != other.domain {
            Some(format!(
                "domain {} vs {}",
                self.domain.describe(),
                other.domain.describe()
            ))
        } else {
            None
        }
    }
}

/// A concrete variable value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Number(f64),
    Bool(bool),
    Label(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Number(x) => write!(f, "{x}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Label(l) => f.write_str(l),
        }
    }
}

/// Position of a value along one axis: numbers as themselves, labels by index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Coord {
    Num(f64),
    Label(u32),
}

/// One time-slice of a run: a value for every variable of an alphabet.
pub type Valuation = BTreeMap<String, Value>;

/// Ordered, duplicate-free set of variable declarations (sorted by name).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Alphabet {
    vars: Vec<VariableDecl>,
}

impl Alphabet {
    pub fn new(mut vars: Vec<VariableDecl>) -> Result<Self, AlgebraError> {
        vars.sort_by(|a, b| a.name.cmp(&b.name));
        for pair in vars.windows(2) {
            if pair[0].name == pair[1].name {
                return Err(AlgebraError::DuplicateVariable(pair[0].name.clone()));
            }
        }
        Ok(Self { vars })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn vars(&self) -> &[VariableDecl] {
        &self.vars
    }

    pub fn iter(&self) -> impl Iterator<Item = &VariableDecl> {
        self.vars.iter()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.vars.iter().map(|v| v.name.as_str())
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.vars
            .binary_search_by(|v| v.name.as_str().cmp(name))
            .ok()
    }

    pub fn get(&self, name: &str) -> Option<&VariableDecl> {
        self.index_of(name).map(|i| &self.vars[i])
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index_of(name).is_some()
    }

    /// Union of two alphabets; same-named variables must be declared identically.
    pub fn union(&self, other: &Alphabet) -> Result<Alphabet, AlgebraError> {
        let mut vars = self.vars.clone();
        for v in &other.vars {
            match self.get(&v.name) {
                Some(mine) => {
                    if let Some(reason) = mine.conflict_with(v) {
                        return Err(AlgebraError::VariableDeclConflict {
                            variable: v.name.clone(),
                            reason,
                        });
                    }
                }
                None => vars.push(v.clone()),
            }
        }
        Alphabet::new(vars)
    }

    /// Sub-alphabet with only the named variables.
    pub fn restrict<'a, I>(&self, names: I) -> Result<Alphabet, AlgebraError>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut vars = Vec::new();
        for n in names {
            let decl = self
                .get(n)
                .ok_or_else(|| AlgebraError::UnknownVariable(n.to_string()))?;
            if !vars.iter().any(|v: &VariableDecl| v.name == n) {
                vars.push(decl.clone());
            }
        }
        Alphabet::new(vars)
    }

    /// True when every variable of `self` occurs in `other` with the same declaration.
    pub fn is_sub_alphabet_of(&self, other: &Alphabet) -> bool {
        self.vars
            .iter()
            .all(|v| other.get(&v.name).is_some_and(|o| o == v))
    }

    pub(crate) fn coordinates(&self, v: &Valuation) -> Result<Vec<Coord>, AlgebraError> {
        if let Some(extra) = v.keys().find(|k| !self.contains(k)) {
            return Err(AlgebraError::UnknownVariable(extra.clone()));
        }
        self.vars
            .iter()
            .map(|decl| {
                let value = v
                    .get(&decl.name)
                    .ok_or_else(|| AlgebraError::MissingVariable(decl.name.clone()))?;
                decl.coordinate(value)
            })
            .collect()
    }
}
