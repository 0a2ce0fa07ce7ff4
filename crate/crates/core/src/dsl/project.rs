//! Project files: variables, contracts, components, models and test cases in
//! one TOML document. Assertions are written in the expression language.
//!
//! ```toml
//! format_version = "1"
//!
//! [[variables]]
//! name = "ego_speed"
//! kind = "real"          # real | integer | boolean | enumeration
//! unit = "m/s"
//! lower = 0.0
//! upper = 70.0
//!
//! [[contracts]]
//! id = "C1"
//! variables = ["ego_speed", "road_type"]   # optional, defaults to all
//! assume = "road_type in {hw, ru}"         # optional, defaults to true
//! guarantee = "ego_speed in [0, 40]"
//!
//! [[components]]
//! id = "I1"
//! controlled = ["ego_speed"]
//! uncontrolled = ["road_type"]
//!
//! [[models]]
//! id = "M1"
//! component = "I1"
//! contract = "C1"
//! cost = 2.0
//!
//! [[test_cases]]
//! id = "highway"
//! parameters = { road_type = "hw" }
//! requirement = "pos_err in [0, 1]"
//! evaluation = ["pos_err"]
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{parse_assertion, render_assertion, ParseError};
use crate::architecture::{
    Architecture, ComponentDecl, Direction, PortDecl, SimulationModelDecl, StructuralError,
};
use crate::assertion::{AlgebraError, Alphabet, AssertionSet, Domain, Value, VariableDecl};
use crate::configurator::TestCaseSpec;
use crate::contract::Contract;

pub const FORMAT_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProjectError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("{location}: `{id}` is not declared")]
    DanglingReference { id: String, location: String },
    #[error("duplicate id `{id}` in {section}")]
    DuplicateId { id: String, section: String },
    #[error("{location}: {error}")]
    Expression { location: String, error: ParseError },
    #[error("{location}: {error}")]
    Declaration {
        location: String,
        error: AlgebraError,
    },
    #[error(transparent)]
    Structural(#[from] StructuralError),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProject {
    format_version: String,
    #[serde(default)]
    variables: Vec<RawVariable>,
    #[serde(default)]
    contracts: Vec<RawContract>,
    #[serde(default)]
    components: Vec<RawComponent>,
    #[serde(default)]
    models: Vec<RawModel>,
    #[serde(default)]
    test_cases: Vec<RawTestCase>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVariable {
    name: String,
    kind: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    unit: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lower: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    upper: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawContract {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    variables: Option<Vec<String>>,
    #[serde(default = "always")]
    assume: String,
    guarantee: String,
}

fn always() -> String {
    "true".into()
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawComponent {
    id: String,
    #[serde(default)]
    controlled: Vec<String>,
    #[serde(default)]
    uncontrolled: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    id: String,
    component: String,
    contract: String,
    cost: f64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    metadata: BTreeMap<String, String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTestCase {
    id: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    parameters: BTreeMap<String, Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    operating_conditions: Option<String>,
    requirement: String,
    #[serde(default)]
    evaluation: Vec<String>,
}

/// A loaded, fully resolved project.
#[derive(Debug, Clone, PartialEq)]
pub struct Project {
    pub variables: Arc<Alphabet>,
    pub contracts: BTreeMap<String, Contract>,
    pub architecture: Architecture,
    pub test_cases: BTreeMap<String, TestCaseSpec>,
}

fn check_unique<'a>(
    ids: impl Iterator<Item = &'a String>,
    section: &str,
) -> Result<(), ProjectError> {
    let mut seen = BTreeSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(ProjectError::DuplicateId {
                id: id.clone(),
                section: section.into(),
            });
        }
    }
    Ok(())
}

fn variable(raw: &RawVariable) -> Result<VariableDecl, ProjectError> {
    let location = format!("variables.{}", raw.name);
    let schema = |msg: &str| ProjectError::Schema(format!("{location}: {msg}"));
    let bounds = || match (raw.lower, raw.upper) {
        (Some(lo), Some(hi)) => Ok((lo, hi)),
        _ => Err(schema("numeric variables need `lower` and `upper`")),
    };
    let domain = match raw.kind.as_str() {
        "real" => {
            let (lo, hi) = bounds()?;
            Domain::Real { lo, hi }
        }
        "integer" => {
            let (lo, hi) = bounds()?;
            if lo.fract() != 0.0 || hi.fract() != 0.0 {
                return Err(schema("integer bounds must be whole numbers"));
            }
            Domain::Integer {
                lo: lo as i64,
                hi: hi as i64,
            }
        }
        "boolean" => Domain::Boolean,
        "enumeration" => Domain::Enumeration(
            raw.labels
                .clone()
                .ok_or_else(|| schema("enumerations need `labels`"))?,
        ),
        other => return Err(schema(&format!("unknown kind `{other}`"))),
    };
    VariableDecl::new(raw.name.clone(), raw.unit.clone(), domain)
        .map_err(|error| ProjectError::Declaration { location, error })
}

fn parse_at(
    text: &str,
    alphabet: &Arc<Alphabet>,
    location: String,
) -> Result<AssertionSet, ProjectError> {
    parse_assertion(text, alphabet).map_err(|error| ProjectError::Expression { location, error })
}

fn resolve_vars(
    names: &[String],
    all: &Alphabet,
    location: &str,
) -> Result<Vec<VariableDecl>, ProjectError> {
    names
        .iter()
        .map(|n| {
            all.get(n)
                .cloned()
                .ok_or_else(|| ProjectError::DanglingReference {
                    id: n.clone(),
                    location: location.to_string(),
                })
        })
        .collect()
}

/// Parses and resolves a project document.
pub fn load_project(document: &str) -> Result<Project, ProjectError> {
    let raw: RawProject = toml::from_str(document)
        .map_err(|e| ProjectError::Schema(e.to_string().trim_end().to_string()))?;
    if raw.format_version != FORMAT_VERSION {
        return Err(ProjectError::Schema(format!(
            "unsupported format_version `{}` (expected `{FORMAT_VERSION}`)",
            raw.format_version
        )));
    }
    check_unique(raw.variables.iter().map(|v| &v.name), "variables")?;
    check_unique(raw.contracts.iter().map(|c| &c.id), "contracts")?;
    check_unique(
        raw.components
            .iter()
            .map(|c| &c.id)
            .chain(raw.models.iter().map(|m| &m.id)),
        "components and models",
    )?;
    check_unique(raw.test_cases.iter().map(|t| &t.id), "test_cases")?;

    let all = Arc::new(
        Alphabet::new(
            raw.variables
                .iter()
                .map(variable)
                .collect::<Result<_, _>>()?,
        )
        .map_err(|error| ProjectError::Declaration {
            location: "variables".into(),
            error,
        })?,
    );

    let mut contracts = BTreeMap::new();
    for c in &raw.contracts {
        let location = format!("contracts.{}", c.id);
        let alphabet = match &c.variables {
            None => all.clone(),
            Some(names) => Arc::new(
                Alphabet::new(resolve_vars(names, &all, &format!("{location}.variables"))?)
                    .map_err(|error| ProjectError::Declaration {
                        location: format!("{location}.variables"),
                        error,
                    })?,
            ),
        };
        let assume = parse_at(&c.assume, &alphabet, format!("{location}.assume"))?;
        let guarantee = parse_at(&c.guarantee, &alphabet, format!("{location}.guarantee"))?;
        let contract =
            Contract::new(c.id.clone(), assume, guarantee).expect("parsed over one alphabet");
        contracts.insert(c.id.clone(), contract);
    }

    let mut components = Vec::new();
    for c in &raw.components {
        let location = format!("components.{}", c.id);
        let mut ports = Vec::new();
        for (names, direction, field) in [
            (&c.controlled, Direction::Controlled, "controlled"),
            (&c.uncontrolled, Direction::Uncontrolled, "uncontrolled"),
        ] {
            for decl in resolve_vars(names, &all, &format!("{location}.{field}"))? {
                ports.push(PortDecl {
                    variable: decl,
                    direction,
                });
            }
        }
        components.push(ComponentDecl::new(c.id.clone(), ports)?);
    }

    let mut models = Vec::new();
    for m in &raw.models {
        let location = format!("models.{}", m.id);
        if !raw.components.iter().any(|c| c.id == m.component) {
            return Err(ProjectError::DanglingReference {
                id: m.component.clone(),
                location: format!("{location}.component"),
            });
        }
        let contract =
            contracts
                .get(&m.contract)
                .ok_or_else(|| ProjectError::DanglingReference {
                    id: m.contract.clone(),
                    location: format!("{location}.contract"),
                })?;
        models.push(SimulationModelDecl {
            id: m.id.clone(),
            component: m.component.clone(),
            contract: contract.clone(),
            cost: m.cost,
            metadata: m.metadata.clone(),
        });
    }
    let architecture = Architecture::new(components, models)?;

    let mut test_cases = BTreeMap::new();
    for t in &raw.test_cases {
        let location = format!("test_cases.{}", t.id);
        for name in t.parameters.keys() {
            resolve_vars(
                std::slice::from_ref(name),
                &all,
                &format!("{location}.parameters"),
            )?;
        }
        resolve_vars(&t.evaluation, &all, &format!("{location}.evaluation"))?;
        let operating_conditions = t
            .operating_conditions
            .as_deref()
            .map(|text| parse_at(text, &all, format!("{location}.operating_conditions")))
            .transpose()?;
        test_cases.insert(
            t.id.clone(),
            TestCaseSpec {
                id: t.id.clone(),
                parameters: t.parameters.clone(),
                operating_conditions,
                requirement: parse_at(&t.requirement, &all, format!("{location}.requirement"))?,
                evaluation: t.evaluation.iter().cloned().collect(),
            },
        );
    }

    Ok(Project {
        variables: all,
        contracts,
        architecture,
        test_cases,
    })
}

fn raw_variable(v: &VariableDecl) -> RawVariable {
    let (lower, upper) = match v.domain.bounds() {
        Some((lo, hi)) => (Some(lo), Some(hi)),
        None => (None, None),
    };
    RawVariable {
        name: v.name.clone(),
        kind: v.kind().to_string(),
        unit: v.unit.clone(),
        lower,
        upper,
        labels: match &v.domain {
            Domain::Enumeration(l) => Some(l.clone()),
            _ => None,
        },
    }
}

/// Serializes a project in canonical order; byte-stable for equal input.
pub fn save_project(project: &Project) -> String {
    let all_names: Vec<&str> = project.variables.names().collect();
    let raw = RawProject {
        format_version: FORMAT_VERSION.into(),
        variables: project.variables.iter().map(raw_variable).collect(),
        contracts: project
            .contracts
            .values()
            .map(|c| {
                let names: Vec<String> = c.alphabet().names().map(str::to_string).collect();
                RawContract {
                    id: c.id.clone(),
                    variables: (names != all_names).then_some(names),
                    assume: render_assertion(c.assumption()),
                    guarantee: render_assertion(c.guarantee()),
                }
            })
            .collect(),
        components: project
            .architecture
            .components()
            .map(|c| {
                let p = c.partition();
                RawComponent {
                    id: c.id.clone(),
                    controlled: p.controlled.into_iter().collect(),
                    uncontrolled: p.uncontrolled.into_iter().collect(),
                }
            })
            .collect(),
        models: project
            .architecture
            .models()
            .map(|m| RawModel {
                id: m.id.clone(),
                component: m.component.clone(),
                contract: m.contract.id.clone(),
                cost: m.cost,
                metadata: m.metadata.clone(),
            })
            .collect(),
        test_cases: project
            .test_cases
            .values()
            .map(|t| RawTestCase {
                id: t.id.clone(),
                parameters: t.parameters.clone(),
                operating_conditions: t.operating_conditions.as_ref().map(render_assertion),
                requirement: render_assertion(&t.requirement),
                evaluation: t.evaluation.iter().cloned().collect(),
            })
            .collect(),
    };
    toml::to_string(&raw).expect("project documents always serialize")
}
