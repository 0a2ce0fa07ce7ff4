//! Selects sufficiently valid, cheapest simulation setups for a test case.
//!
//! A setup is sufficiently valid when the composition of its model contracts
//! refines the test-case contract. Every total assignment of models to
//! components is evaluated; none are pruned.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::architecture::{
    check_composability, check_partial, Architecture, Composability, Diagnostic, SetupAssignment,
    StructuralError,
};
use crate::assertion::{
    AlgebraError, Alphabet, AssertionSet, Atom, Interval, LabelSet, Valuation, Value,
};
use crate::contract::{compose_all, quotient, Contract, RefinementFailure};

pub const DEFAULT_CANDIDATE_LIMIT: usize = 10_000;

/// A concrete scenario plus its evaluation criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct TestCaseSpec {
    pub id: String,
    /// Scenario parameters fixed to single values.
    pub parameters: BTreeMap<String, Value>,
    pub operating_conditions: Option<AssertionSet>,
    pub requirement: AssertionSet,
    pub evaluation: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("component `{0}` has no simulation models")]
    NoModelsForComponent(String),
    #[error("{count} candidate setups exceed the limit of {limit}")]
    CandidateLimitExceeded { count: usize, limit: usize },
    #[error("test case references unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("parameter `{variable}` = {value} lies outside its declared domain")]
    DomainViolation { variable: String, value: String },
    #[error("evaluation variable `{0}` is not controlled by any component")]
    EvaluationVariableUncontrolled(String),
    #[error("scenario parameter `{0}` is controlled by a component, not an external input")]
    ParameterNotExternal(String),
    #[error("component `{0}` is already assigned in the partial setup")]
    TargetComponentAssigned(String),
    #[error("partial setup leaves component `{0}` unassigned")]
    IncompletePartialSetup(String),
    #[error("partial setup is not composable: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    NotComposable(Vec<Diagnostic>),
    #[error(transparent)]
    Structural(#[from] StructuralError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfigureOptions {
    /// Use literal refinement against the unsaturated test-case contract.
    pub strict_refinement: bool,
    pub limit: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct SetupCandidate {
    pub assignment: SetupAssignment,
    /// Saturated composition of the chosen model contracts.
    pub composed_contract: Contract,
    pub total_cost: f64,
}

impl SetupCandidate {
    /// Chosen model ids, sorted.
    pub fn model_ids(&self) -> Vec<String> {
        sorted_models(&self.assignment)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Rejection {
    NotComposable { diagnostics: Vec<Diagnostic> },
    RefinementFailed(RefinementFailure),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RejectedCandidate {
    pub assignment: SetupAssignment,
    pub total_cost: f64,
    pub reason: Rejection,
}

#[derive(Debug, Clone)]
pub struct ConfigurationReport {
    pub test_case: String,
    pub strict_refinement: bool,
    pub test_case_contract: Contract,
    /// Ascending cost, ties broken by the sorted model-id tuple.
    pub valid: Vec<SetupCandidate>,
    /// In enumeration order.
    pub rejected: Vec<RejectedCandidate>,
}

impl ConfigurationReport {
    pub fn best(&self) -> Option<&SetupCandidate> {
        self.valid.first()
    }
}

fn sorted_models(assignment: &SetupAssignment) -> Vec<String> {
    let mut ids: Vec<String> = assignment.values().cloned().collect();
    ids.sort();
    ids
}

/// Re-homes `set` over `target`, dropping variables outside it. Fails when a
/// dropped variable is actually constrained.
fn rehome(set: &AssertionSet, target: &Arc<Alphabet>) -> Result<AssertionSet, ConfigError> {
    let (kept, dropped): (Vec<&str>, Vec<&str>) =
        set.alphabet().names().partition(|n| target.contains(n));
    for d in &dropped {
        if !set.is_receptive([*d])? {
            return Err(ConfigError::UnknownVariable(d.to_string()));
        }
    }
    Ok(set.project(kept)?.extend_alphabet(target.clone())?)
}

fn point_constraint(
    alphabet: &Arc<Alphabet>,
    variable: &str,
    value: &Value,
) -> Result<AssertionSet, ConfigError> {
    let decl = alphabet
        .get(variable)
        .ok_or_else(|| ConfigError::UnknownVariable(variable.to_string()))?;
    let violation = || ConfigError::DomainViolation {
        variable: variable.to_string(),
        value: value.to_string(),
    };
    let probe: Valuation = [(variable.to_string(), value.clone())].into();
    let single = Alphabet::new(vec![decl.clone()])?;
    if single.coordinates(&probe).is_err() {
        return Err(violation());
    }
    let atom = match value {
        Value::Number(x) => Atom::Range(Interval::closed(*x, *x)),
        Value::Bool(b) => Atom::Labels(LabelSet::single(u32::from(*b))),
        Value::Label(l) => {
            Atom::Labels(LabelSet::single(decl.label_index(l).ok_or_else(violation)?))
        }
    };
    Ok(AssertionSet::from_atom(alphabet.clone(), variable, atom)?)
}

/// Test-case contract over the architecture's port variables: the assumption
/// fixes the scenario parameters and adds the operating conditions, the
/// guarantee is the validity requirement.
pub fn build_test_case_contract(
    tc: &TestCaseSpec,
    arch: &Architecture,
) -> Result<Contract, ConfigError> {
    let alphabet = arch.alphabet()?;
    let controlled = arch.controlled_variables();
    for v in &tc.evaluation {
        if !alphabet.contains(v) {
            return Err(ConfigError::UnknownVariable(v.clone()));
        }
        if !controlled.contains(v) {
            return Err(ConfigError::EvaluationVariableUncontrolled(v.clone()));
        }
    }
    let mut assumption = AssertionSet::universe(alphabet.clone());
    for (variable, value) in &tc.parameters {
        let point = point_constraint(&alphabet, variable, value)?;
        if controlled.contains(variable) {
            return Err(ConfigError::ParameterNotExternal(variable.clone()));
        }
        assumption = assumption.intersect(&point)?;
    }
    if let Some(conditions) = &tc.operating_conditions {
        assumption = assumption.intersect(&rehome(conditions, &alphabet)?)?;
    }
    let guarantee = rehome(&tc.requirement, &alphabet)?;
    Ok(Contract::new(tc.id.clone(), assumption, guarantee)?)
}

/// Composes the contracts of the assigned models, folding in model-id order.
pub fn compose_setup(
    arch: &Architecture,
    assignment: &SetupAssignment,
) -> Result<Contract, ConfigError> {
    let mut models: Vec<&str> = assignment.values().map(String::as_str).collect();
    models.sort();
    let contracts = models
        .iter()
        .map(|m| {
            arch.model(m)
                .map(|m| &m.contract)
                .ok_or_else(|| StructuralError::UnknownModel(m.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let composed = compose_all(contracts.iter().copied())?;
    Ok(composed.unwrap_or_else(|| Contract::trivial("true", Arc::new(Alphabet::empty()))))
}

enum Outcome {
    Valid(SetupCandidate),
    Rejected(RejectedCandidate),
}

fn evaluate(
    arch: &Architecture,
    assignment: SetupAssignment,
    tc_contract: &Contract,
    strict: bool,
) -> Result<Outcome, ConfigError> {
    let total_cost = assignment
        .values()
        .map(|m| arch.model(m).map_or(0.0, |m| m.cost))
        .sum();
    if let Composability::Diagnostics(diagnostics) = check_composability(arch, &assignment)? {
        return Ok(Outcome::Rejected(RejectedCandidate {
            assignment,
            total_cost,
            reason: Rejection::NotComposable { diagnostics },
        }));
    }
    let composed = compose_setup(arch, &assignment)?;
    let (composed, tc) = crate::contract::equalize_alphabets(&composed, tc_contract)?;
    let failure = if strict {
        composed.refinement_failure_literal(&tc)?
    } else {
        composed.refinement_failure(&tc)?
    };
    Ok(match failure {
        None => Outcome::Valid(SetupCandidate {
            assignment,
            composed_contract: composed,
            total_cost,
        }),
        Some(f) => Outcome::Rejected(RejectedCandidate {
            assignment,
            total_cost,
            reason: Rejection::RefinementFailed(f),
        }),
    })
}

/// All total assignments, components in id order, models in id order, last
/// component varying fastest.
fn enumerate(arch: &Architecture, limit: usize) -> Result<Vec<SetupAssignment>, ConfigError> {
    let mut choices: Vec<(&str, Vec<&str>)> = Vec::new();
    for c in arch.components() {
        let models: Vec<&str> = arch.models_of(&c.id).map(|m| m.id.as_str()).collect();
        if models.is_empty() {
            return Err(ConfigError::NoModelsForComponent(c.id.clone()));
        }
        choices.push((&c.id, models));
    }
    let count = choices
        .iter()
        .try_fold(1usize, |acc, (_, m)| acc.checked_mul(m.len()))
        .unwrap_or(usize::MAX);
    if count > limit {
        return Err(ConfigError::CandidateLimitExceeded { count, limit });
    }
    let mut out = Vec::with_capacity(count);
    for mut index in 0..count {
        let mut assignment = SetupAssignment::new();
        for (component, models) in choices.iter().rev() {
            assignment.insert(
                component.to_string(),
                models[index % models.len()].to_string(),
            );
            index /= models.len();
        }
        out.push(assignment);
    }
    Ok(out)
}

pub(crate) fn candidate_order(a: (f64, Vec<String>), b: (f64, Vec<String>)) -> Ordering {
    a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1))
}

/// Evaluates every setup against the test case and ranks the valid ones.
pub fn configure(
    arch: &Architecture,
    tc: &TestCaseSpec,
    options: ConfigureOptions,
) -> Result<ConfigurationReport, ConfigError> {
    let tc_contract = build_test_case_contract(tc, arch)?;
    configure_contract(arch, &tc_contract, options)
}

/// [`configure`] against an already built test-case contract.
pub fn configure_contract(
    arch: &Architecture,
    tc_contract: &Contract,
    options: ConfigureOptions,
) -> Result<ConfigurationReport, ConfigError> {
    let assignments = enumerate(arch, options.limit.unwrap_or(DEFAULT_CANDIDATE_LIMIT))?;
    let outcomes = assignments
        .into_par_iter()
        .map(|a| evaluate(arch, a, tc_contract, options.strict_refinement))
        .collect::<Result<Vec<_>, _>>()?;
    let mut valid = Vec::new();
    let mut rejected = Vec::new();
    for o in outcomes {
        match o {
            Outcome::Valid(c) => valid.push(c),
            Outcome::Rejected(r) => rejected.push(r),
        }
    }
    valid.sort_by(|a, b| {
        candidate_order((a.total_cost, a.model_ids()), (b.total_cost, b.model_ids()))
    });
    Ok(ConfigurationReport {
        test_case: tc_contract.id.clone(),
        strict_refinement: options.strict_refinement,
        test_case_contract: tc_contract.clone(),
        valid,
        rejected,
    })
}

/// Requirement for a model still missing in `target`: the quotient of the
/// saturated test-case contract by the composition of the assigned models.
/// Any model whose saturated contract refines the result completes the
/// partial setup into a valid one.
pub fn derive_missing_requirement(
    arch: &Architecture,
    tc: &TestCaseSpec,
    partial: &SetupAssignment,
    target: &str,
) -> Result<Contract, ConfigError> {
    if arch.component(target).is_none() {
        return Err(StructuralError::UnknownAssignedComponent(target.to_string()).into());
    }
    if partial.contains_key(target) {
        return Err(ConfigError::TargetComponentAssigned(target.to_string()));
    }
    if let Some(missing) = arch
        .components()
        .find(|c| c.id != target && !partial.contains_key(&c.id))
    {
        return Err(ConfigError::IncompletePartialSetup(missing.id.clone()));
    }
    if let Composability::Diagnostics(d) = check_partial(arch, partial)? {
        return Err(ConfigError::NotComposable(d));
    }
    let tc_contract = build_test_case_contract(tc, arch)?;
    let alphabet = tc_contract.alphabet().clone();
    let partial_contract = if partial.is_empty() {
        Contract::trivial("true", alphabet)
    } else {
        compose_setup(arch, partial)?
    };
    let q = quotient(&tc_contract.saturate(), &partial_contract)?;
    Ok(q.contract.with_id(format!("requirement({target})")))
}
