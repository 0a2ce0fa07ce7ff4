//! Components, their ports, candidate simulation models, and the syntactic
//! composability check for a chosen setup.
//!
//! Components are wired by variable name: two ports with the same variable
//! name are connected. Hierarchy is flattened, so an architecture is a flat
//! set of leaf components.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::assertion::{AlgebraError, Alphabet, VariableDecl};
use crate::contract::{Contract, PortPartition};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Controlled,
    Uncontrolled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PortDecl {
    pub variable: VariableDecl,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentDecl {
    pub id: String,
    ports: Vec<PortDecl>,
}

impl ComponentDecl {
    pub fn new(id: impl Into<String>, mut ports: Vec<PortDecl>) -> Result<Self, StructuralError> {
        let id = id.into();
        ports.sort_by(|a, b| a.variable.name.cmp(&b.variable.name));
        for pair in ports.windows(2) {
            if pair[0].variable.name == pair[1].variable.name {
                return Err(StructuralError::DuplicatePort {
                    component: id,
                    variable: pair[0].variable.name.clone(),
                });
            }
        }
        Ok(Self { id, ports })
    }

    pub fn ports(&self) -> &[PortDecl] {
        &self.ports
    }

    pub fn partition(&self) -> PortPartition {
        let mut p = PortPartition::default();
        for port in &self.ports {
            let name = port.variable.name.clone();
            match port.direction {
                Direction::Controlled => p.controlled.insert(name),
                Direction::Uncontrolled => p.uncontrolled.insert(name),
            };
        }
        p
    }
}

/// A simulation model implementing a component, with its validity-domain
/// contract and an abstract computational cost.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationModelDecl {
    pub id: String,
    pub component: String,
    pub contract: Contract,
    pub cost: f64,
    pub metadata: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StructuralError {
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("component `{component}` declares port `{variable}` twice")]
    DuplicatePort { component: String, variable: String },
    #[error("model `{model}` references unknown component `{component}`")]
    UnknownComponent { model: String, component: String },
    #[error("unknown model `{0}`")]
    UnknownModel(String),
    #[error("model `{model}` does not implement component `{component}`")]
    WrongComponent { model: String, component: String },
    #[error("setup assigns no model to component `{0}`")]
    Unassigned(String),
    #[error("setup assigns a model to unknown component `{0}`")]
    UnknownAssignedComponent(String),
    #[error("model `{model}` has invalid cost {cost}")]
    InvalidCost { model: String, cost: f64 },
    #[error("contract of model `{model}` does not cover port `{variable}`")]
    UncoveredPort { model: String, variable: String },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Architecture {
    components: BTreeMap<String, ComponentDecl>,
    models: BTreeMap<String, SimulationModelDecl>,
}

/// Component id → model id.
pub type SetupAssignment = BTreeMap<String, String>;

impl Architecture {
    pub fn new(
        components: Vec<ComponentDecl>,
        models: Vec<SimulationModelDecl>,
    ) -> Result<Self, StructuralError> {
        let mut arch = Architecture::default();
        for c in components {
            if arch.components.contains_key(&c.id) {
                return Err(StructuralError::DuplicateId(c.id));
            }
            arch.components.insert(c.id.clone(), c);
        }
        for m in models {
            if arch.models.contains_key(&m.id) || arch.components.contains_key(&m.id) {
                return Err(StructuralError::DuplicateId(m.id));
            }
            let comp = arch.components.get(&m.component).ok_or_else(|| {
                StructuralError::UnknownComponent {
                    model: m.id.clone(),
                    component: m.component.clone(),
                }
            })?;
            if !m.cost.is_finite() || m.cost < 0.0 {
                return Err(StructuralError::InvalidCost {
                    model: m.id.clone(),
                    cost: m.cost,
                });
            }
            if let Some(port) = comp
                .ports
                .iter()
                .find(|p| !m.contract.alphabet().contains(&p.variable.name))
            {
                return Err(StructuralError::UncoveredPort {
                    model: m.id.clone(),
                    variable: port.variable.name.clone(),
                });
            }
            arch.models.insert(m.id.clone(), m);
        }
        Ok(arch)
    }

    pub fn components(&self) -> impl Iterator<Item = &ComponentDecl> {
        self.components.values()
    }

    pub fn component(&self, id: &str) -> Option<&ComponentDecl> {
        self.components.get(id)
    }

    pub fn models(&self) -> impl Iterator<Item = &SimulationModelDecl> {
        self.models.values()
    }

    pub fn model(&self, id: &str) -> Option<&SimulationModelDecl> {
        self.models.get(id)
    }

    /// Models implementing `component`, in id order.
    pub fn models_of<'a>(
        &'a self,
        component: &'a str,
    ) -> impl Iterator<Item = &'a SimulationModelDecl> + 'a {
        self.models
            .values()
            .filter(move |m| m.component == component)
    }

    /// Union of all port variables.
    pub fn alphabet(&self) -> Result<Arc<Alphabet>, AlgebraError> {
        let mut acc = Alphabet::empty();
        for c in self.components.values() {
            let vars = Alphabet::new(c.ports.iter().map(|p| p.variable.clone()).collect())?;
            acc = acc.union(&vars)?;
        }
        Ok(Arc::new(acc))
    }

    /// Variables some component declares as controlled.
    pub fn controlled_variables(&self) -> BTreeSet<String> {
        self.components
            .values()
            .flat_map(|c| c.partition().controlled)
            .collect()
    }

    /// Port variables no component controls.
    pub fn uncontrolled_variables(&self) -> BTreeSet<String> {
        let controlled = self.controlled_variables();
        self.components
            .values()
            .flat_map(|c| c.ports.iter().map(|p| p.variable.name.clone()))
            .filter(|v| !controlled.contains(v))
            .collect()
    }
}

/// A composability violation in a chosen setup.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Diagnostic {
    /// Same variable declared with different kind, unit, or domain.
    DeclarationMismatch {
        variable: String,
        first: String,
        second: String,
        detail: String,
    },
    /// More than one component controls the variable.
    MultipleSources {
        variable: String,
        controllers: Vec<String>,
    },
    /// The model's assumption constrains a controlled port.
    Incompatible {
        model: String,
        contract: String,
        ports: Vec<String>,
    },
    /// The model's guarantee constrains an uncontrolled port.
    Inconsistent {
        model: String,
        contract: String,
        ports: Vec<String>,
    },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::DeclarationMismatch {
                variable,
                first,
                second,
                detail,
            } => write!(
                f,
                "variable {variable} is declared differently by {first} and {second}: {detail}"
            ),
            Diagnostic::MultipleSources {
                variable,
                controllers,
            } => write!(
                f,
                "variable {variable} has {} sources ({})",
                controllers.len(),
                controllers.join(", ")
            ),
            Diagnostic::Incompatible {
                model,
                contract,
                ports,
            } => write!(
                f,
                "model {model}: assumption of {contract} constrains controlled port(s) {}",
                ports.join(", ")
            ),
            Diagnostic::Inconsistent {
                model,
                contract,
                ports,
            } => write!(
                f,
                "model {model}: guarantee of {contract} constrains uncontrolled port(s) {}",
                ports.join(", ")
            ),
        }
    }
}

/// What a composable setup looks like once wired together.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositionPlan {
    pub assignment: SetupAssignment,
    /// Union of the chosen contracts' and components' variables.
    pub alphabet: Arc<Alphabet>,
    /// Controlled variable → controlling component.
    pub controllers: BTreeMap<String, String>,
    pub external_inputs: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Composability {
    Plan(CompositionPlan),
    Diagnostics(Vec<Diagnostic>),
}

/// Checks a total setup: matching declarations for shared variables, at most
/// one controller per variable, and every contract compatible and consistent
/// with its component's ports. All violations are reported.
pub fn check_composability(
    arch: &Architecture,
    setup: &SetupAssignment,
) -> Result<Composability, StructuralError> {
    if let Some(missing) = arch.components.keys().find(|c| !setup.contains_key(*c)) {
        return Err(StructuralError::Unassigned(missing.clone()));
    }
    check_partial(arch, setup)
}

/// Same checks restricted to the components `setup` mentions.
pub(crate) fn check_partial(
    arch: &Architecture,
    setup: &SetupAssignment,
) -> Result<Composability, StructuralError> {
    let mut chosen = Vec::new();
    for (component, model) in setup {
        let comp = arch
            .components
            .get(component)
            .ok_or_else(|| StructuralError::UnknownAssignedComponent(component.clone()))?;
        let m = arch
            .models
            .get(model)
            .ok_or_else(|| StructuralError::UnknownModel(model.clone()))?;
        if &m.component != component {
            return Err(StructuralError::WrongComponent {
                model: model.clone(),
                component: component.clone(),
            });
        }
        chosen.push((comp, m));
    }

    let mut diagnostics = BTreeSet::new();

    // (a) one declaration per variable name, first seen in component-id order
    let mut decls: BTreeMap<&str, (&VariableDecl, String)> = BTreeMap::new();
    let mut reported: BTreeSet<(String, String, String)> = BTreeSet::new();
    for (comp, m) in &chosen {
        let port_decls = comp
            .ports
            .iter()
            .map(|p| (&p.variable, format!("component {}", comp.id)));
        let contract_decls = m
            .contract
            .alphabet()
            .iter()
            .map(|v| (v, format!("contract {} of model {}", m.contract.id, m.id)));
        for (decl, origin) in port_decls.chain(contract_decls) {
            match decls.get(decl.name.as_str()) {
                None => {
                    decls.insert(&decl.name, (decl, origin));
                }
                Some((first, first_origin)) => {
                    if let Some(detail) = first.conflict_with(decl) {
                        let key = (decl.name.clone(), first_origin.clone(), origin.clone());
                        if reported.insert(key) {
                            diagnostics.insert(Diagnostic::DeclarationMismatch {
                                variable: decl.name.clone(),
                                first: first_origin.clone(),
                                second: origin,
                                detail,
                            });
                        }
                    }
                }
            }
        }
    }

    // (b) unique source
    let mut controllers: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (comp, _) in &chosen {
        for v in comp.partition().controlled {
            controllers.entry(v).or_default().push(comp.id.clone());
        }
    }
    for (variable, sources) in &controllers {
        if sources.len() > 1 {
            diagnostics.insert(Diagnostic::MultipleSources {
                variable: variable.clone(),
                controllers: sources.clone(),
            });
        }
    }

    // (c) compatibility and consistency per model
    for (comp, m) in &chosen {
        let ports = comp.partition();
        let assumption = m.contract.assumption();
        let guarantee = m.contract.guarantee();
        let constrained_controlled: Vec<String> = ports
            .controlled
            .iter()
            .filter(|v| !assumption.is_receptive([v.as_str()]).unwrap_or(false))
            .cloned()
            .collect();
        if !m.contract.is_compatible(&ports)? {
            diagnostics.insert(Diagnostic::Incompatible {
                model: m.id.clone(),
                contract: m.contract.id.clone(),
                ports: constrained_controlled,
            });
        }
        if !m.contract.is_consistent(&ports)? {
            let constrained_uncontrolled = ports
                .uncontrolled
                .iter()
                .filter(|v| !guarantee.is_receptive([v.as_str()]).unwrap_or(false))
                .cloned()
                .collect();
            diagnostics.insert(Diagnostic::Inconsistent {
                model: m.id.clone(),
                contract: m.contract.id.clone(),
                ports: constrained_uncontrolled,
            });
        }
    }

    if !diagnostics.is_empty() {
        return Ok(Composability::Diagnostics(
            diagnostics.into_iter().collect(),
        ));
    }

    let alphabet = Alphabet::new(decls.values().map(|(d, _)| (*d).clone()).collect())?;
    let controllers: BTreeMap<String, String> = controllers
        .into_iter()
        .map(|(v, mut c)| (v, c.remove(0)))
        .collect();
    let external_inputs = alphabet
        .names()
        .filter(|v| !controllers.contains_key(*v))
        .map(str::to_string)
        .collect();
    Ok(Composability::Plan(CompositionPlan {
        assignment: setup.clone(),
        alphabet: Arc::new(alphabet),
        controllers,
        external_inputs,
    }))
}

/// Variables no chosen model controls; they must be set from outside.
pub fn external_inputs(plan: &CompositionPlan) -> BTreeSet<String> {
    plan.external_inputs.clone()
}
