//! Human tables and machine (TOML) documents for every subcommand.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use simcontract::architecture::SetupAssignment;
use simcontract::assertion::Valuation;
use simcontract::configurator::{ConfigurationReport, Rejection};
use simcontract::contract::{Contract, RefinementFailure};
use simcontract::dsl::render_assertion;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Human,
    Machine,
}

pub fn to_toml<T: Serialize>(doc: &T) -> String {
    toml::to_string(doc).expect("report documents are valid TOML")
}

#[derive(Serialize)]
pub struct ContractDoc {
    pub id: String,
    pub variables: Vec<String>,
    pub assume: String,
    pub guarantee: String,
}

impl From<&Contract> for ContractDoc {
    fn from(c: &Contract) -> Self {
        Self {
            id: c.id.clone(),
            variables: c.alphabet().names().map(str::to_string).collect(),
            assume: render_assertion(c.assumption()),
            guarantee: render_assertion(c.guarantee()),
        }
    }
}

pub fn human_contract(c: &Contract) -> String {
    let d = ContractDoc::from(c);
    format!(
        "contract {}\n  variables: {}\n  assume:    {}\n  guarantee: {}\n",
        d.id,
        d.variables.join(", "),
        d.assume,
        d.guarantee
    )
}

pub fn human_valuation(v: &Valuation) -> String {
    v.iter()
        .map(|(k, x)| format!("{k}={x}"))
        .collect::<Vec<_>>()
        .join(", ")
}

#[derive(Serialize)]
pub struct RefineDoc {
    pub sub: String,
    #[serde(rename = "super")]
    pub sup: String,
    pub mode: &'static str,
    pub refines: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<RefinementFailure>,
}

pub fn human_refine(d: &RefineDoc) -> String {
    let mut out = format!(
        "{} {} {} ({} refinement)\n",
        d.sub,
        if d.refines {
            "refines"
        } else {
            "does not refine"
        },
        d.sup,
        d.mode
    );
    if let Some(f) = &d.failure {
        let _ = writeln!(
            out,
            "  failing clause: {}\n  witness: {}",
            f.clause,
            human_valuation(&f.witness)
        );
    }
    out
}

#[derive(Serialize)]
pub struct QuotientDoc {
    pub contract: ContractDoc,
    pub saturated_top: bool,
    pub saturated_divisor: bool,
}

#[derive(Serialize)]
struct CandidateDoc {
    rank: usize,
    cost: f64,
    models: Vec<String>,
    assignment: SetupAssignment,
    assume: String,
    guarantee: String,
}

#[derive(Serialize)]
struct RejectedDoc {
    cost: f64,
    models: Vec<String>,
    assignment: SetupAssignment,
    reason: Rejection,
}

#[derive(Serialize)]
struct ConfigureDoc {
    test_case: String,
    strict_refinement: bool,
    test_case_contract: ContractDoc,
    valid: Vec<CandidateDoc>,
    rejected: Vec<RejectedDoc>,
}

fn sorted_models(a: &SetupAssignment) -> Vec<String> {
    let mut m: Vec<String> = a.values().cloned().collect();
    m.sort();
    m
}

pub fn machine_configure(r: &ConfigurationReport) -> String {
    to_toml(&ConfigureDoc {
        test_case: r.test_case.clone(),
        strict_refinement: r.strict_refinement,
        test_case_contract: (&r.test_case_contract).into(),
        valid: r
            .valid
            .iter()
            .enumerate()
            .map(|(i, c)| CandidateDoc {
                rank: i + 1,
                cost: c.total_cost,
                models: c.model_ids(),
                assignment: c.assignment.clone(),
                assume: render_assertion(c.composed_contract.assumption()),
                guarantee: render_assertion(c.composed_contract.guarantee()),
            })
            .collect(),
        rejected: r
            .rejected
            .iter()
            .map(|c| RejectedDoc {
                cost: c.total_cost,
                models: sorted_models(&c.assignment),
                assignment: c.assignment.clone(),
                reason: c.reason.clone(),
            })
            .collect(),
    })
}

pub fn human_configure(r: &ConfigurationReport) -> String {
    let mut out = format!(
        "test case {} ({} refinement)\n  assume:    {}\n  guarantee: {}\n\n",
        r.test_case,
        if r.strict_refinement {
            "literal"
        } else {
            "saturated"
        },
        render_assertion(r.test_case_contract.assumption()),
        render_assertion(r.test_case_contract.guarantee()),
    );
    let _ = writeln!(out, "valid setups: {}", r.valid.len());
    if !r.valid.is_empty() {
        let _ = writeln!(out, "  {:>4}  {:>10}  models", "rank", "cost");
        for (i, c) in r.valid.iter().enumerate() {
            let _ = writeln!(
                out,
                "  {:>4}  {:>10}  {}",
                i + 1,
                c.total_cost,
                c.model_ids().join(", ")
            );
        }
    }
    let _ = writeln!(out, "rejected setups: {}", r.rejected.len());
    for c in &r.rejected {
        let why = match &c.reason {
            Rejection::NotComposable { diagnostics } => format!(
                "not composable: {}",
                diagnostics
                    .iter()
                    .map(|d| d.to_string())
                    .collect::<Vec<_>>()
                    .join("; ")
            ),
            Rejection::RefinementFailed(f) => {
                format!(
                    "{} not refined, witness {}",
                    f.clause,
                    human_valuation(&f.witness)
                )
            }
        };
        let _ = writeln!(
            out,
            "  {} (cost {}): {}",
            sorted_models(&c.assignment).join(", "),
            c.total_cost,
            why
        );
    }
    out
}

#[derive(Serialize)]
pub struct ModelCheck {
    pub model: String,
    pub component: String,
    pub contract: String,
    pub compatible: bool,
    pub consistent: bool,
}

#[derive(Serialize)]
pub struct ValidateDoc {
    pub variables: usize,
    pub contracts: usize,
    pub components: usize,
    pub models: Vec<ModelCheck>,
    /// Test case id → problem; empty when every test case builds.
    pub test_case_errors: BTreeMap<String, String>,
}

impl ValidateDoc {
    pub fn ok(&self) -> bool {
        self.test_case_errors.is_empty() && self.models.iter().all(|m| m.compatible && m.consistent)
    }
}

pub fn human_validate(d: &ValidateDoc) -> String {
    let mut out = format!(
        "{} variables, {} contracts, {} components, {} models\n",
        d.variables,
        d.contracts,
        d.components,
        d.models.len()
    );
    let yn = |b: bool| if b { "yes" } else { "NO" };
    let _ = writeln!(
        out,
        "  {:<12} {:<12} {:<12} {:<10} consistent",
        "model", "component", "contract", "compatible"
    );
    for m in &d.models {
        let _ = writeln!(
            out,
            "  {:<12} {:<12} {:<12} {:<10} {}",
            m.model,
            m.component,
            m.contract,
            yn(m.compatible),
            yn(m.consistent)
        );
    }
    for (tc, e) in &d.test_case_errors {
        let _ = writeln!(out, "test case {tc}: {e}");
    }
    out.push_str(if d.ok() {
        "project is valid\n"
    } else {
        "project has problems\n"
    });
    out
}
