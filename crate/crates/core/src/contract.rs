//! Assume-guarantee contracts and their algebra.
//!
//! A contract `(A, G)` pairs an assumption about the environment with a
//! guarantee the component provides while the assumption holds. Refinement,
//! composition, quotient and conjunction follow the usual set-theoretic
//! definitions over [`AssertionSet`]s sharing one alphabet.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::assertion::{AlgebraError, Alphabet, AssertionSet, Valuation};

#[derive(Debug, Clone)]
pub struct Contract {
    pub id: String,
    assumption: AssertionSet,
    guarantee: AssertionSet,
}

/// Equal ids and semantically equal assertions.
impl PartialEq for Contract {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id && self.same_sets(other)
    }
}

/// Controlled and uncontrolled ports of the component a contract belongs to.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PortPartition {
    pub controlled: BTreeSet<String>,
    pub uncontrolled: BTreeSet<String>,
}

/// Which side of a refinement check failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Clause {
    /// The refined contract's assumption is not covered.
    Assumption,
    /// The refining contract's guarantee is too weak.
    Guarantee,
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Clause::Assumption => "assumption",
            Clause::Guarantee => "guarantee",
        })
    }
}

/// A valuation showing why one contract does not refine another.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinementFailure {
    pub clause: Clause,
    pub witness: Valuation,
}

/// Result of [`quotient`]: the contract plus which operands had to be saturated.
#[derive(Debug, Clone)]
pub struct Quotient {
    pub contract: Contract,
    pub saturated_top: bool,
    pub saturated_divisor: bool,
}

impl Contract {
    pub fn new(
        id: impl Into<String>,
        assumption: AssertionSet,
        guarantee: AssertionSet,
    ) -> Result<Self, AlgebraError> {
        if assumption.alphabet() != guarantee.alphabet() {
            return Err(AlgebraError::AlphabetMismatch);
        }
        Ok(Self {
            id: id.into(),
            assumption,
            guarantee,
        })
    }

    /// `(universe, universe)`: assumes nothing, guarantees nothing.
    pub fn trivial(id: impl Into<String>, alphabet: Arc<Alphabet>) -> Self {
        Self {
            id: id.into(),
            assumption: AssertionSet::universe(alphabet.clone()),
            guarantee: AssertionSet::universe(alphabet),
        }
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        self.assumption.alphabet()
    }

    pub fn assumption(&self) -> &AssertionSet {
        &self.assumption
    }

    pub fn guarantee(&self) -> &AssertionSet {
        &self.guarantee
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    fn same_sets(&self, other: &Contract) -> bool {
        self.assumption == other.assumption && self.guarantee == other.guarantee
    }

    /// `A ⟹ G` as a set: `G ∪ ¬A`.
    pub fn requirement(&self) -> AssertionSet {
        self.guarantee
            .union(&self.assumption.complement())
            .expect("assumption and guarantee share an alphabet")
    }

    /// `(A, G ∪ ¬A)`.
    pub fn saturate(&self) -> Contract {
        Contract {
            id: self.id.clone(),
            assumption: self.assumption.clone(),
            guarantee: self.requirement(),
        }
    }

    pub fn is_saturated(&self) -> bool {
        self.assumption
            .complement()
            .is_subset(&self.guarantee)
            .expect("assumption and guarantee share an alphabet")
    }

    /// Whether a component with behaviour `behavior` implements the contract:
    /// `A ∩ B ⊆ G`.
    pub fn satisfied_by(&self, behavior: &AssertionSet) -> Result<bool, AlgebraError> {
        self.assumption
            .intersect(behavior)?
            .is_subset(&self.guarantee)
    }

    /// `A_self ⊇ A_other` and `G_self ⊆ G_other`, on the contracts as written.
    pub fn refines_literal(&self, other: &Contract) -> Result<bool, AlgebraError> {
        Ok(self.refinement_failure_literal(other)?.is_none())
    }

    /// Refinement between the saturated forms of both contracts.
    pub fn refines(&self, other: &Contract) -> Result<bool, AlgebraError> {
        Ok(self.refinement_failure(other)?.is_none())
    }

    /// Why `self` does not literally refine `other`, if it does not. Contracts
    /// over different alphabets are compared over the union of both.
    pub fn refinement_failure_literal(
        &self,
        other: &Contract,
    ) -> Result<Option<RefinementFailure>, AlgebraError> {
        if self.alphabet() != other.alphabet() {
            let (a, b) = equalize_alphabets(self, other)?;
            return a.refinement_failure_literal(&b);
        }
        let missed = other.assumption.difference(&self.assumption)?;
        if let Some(witness) = missed.witness() {
            return Ok(Some(RefinementFailure {
                clause: Clause::Assumption,
                witness,
            }));
        }
        let loose = self.guarantee.difference(&other.guarantee)?;
        Ok(loose.witness().map(|witness| RefinementFailure {
            clause: Clause::Guarantee,
            witness,
        }))
    }

    /// Why the saturated `self` does not refine the saturated `other`.
    pub fn refinement_failure(
        &self,
        other: &Contract,
    ) -> Result<Option<RefinementFailure>, AlgebraError> {
        self.saturate()
            .refinement_failure_literal(&other.saturate())
    }

    /// The assumption leaves the controlled ports unconstrained.
    pub fn is_compatible(&self, ports: &PortPartition) -> Result<bool, AlgebraError> {
        self.check_ports(ports)?;
        self.assumption
            .is_receptive(ports.controlled.iter().map(String::as_str))
    }

    /// The guarantee leaves the uncontrolled ports unconstrained.
    pub fn is_consistent(&self, ports: &PortPartition) -> Result<bool, AlgebraError> {
        self.check_ports(ports)?;
        self.guarantee
            .is_receptive(ports.uncontrolled.iter().map(String::as_str))
    }

    fn check_ports(&self, ports: &PortPartition) -> Result<(), AlgebraError> {
        let alphabet = self.alphabet();
        match ports
            .controlled
            .iter()
            .chain(&ports.uncontrolled)
            .find(|v| !alphabet.contains(v))
        {
            Some(v) => Err(AlgebraError::UnknownVariable(v.clone())),
            None => Ok(()),
        }
    }

    /// Re-homes the contract over a larger alphabet.
    pub fn extend_alphabet(&self, target: Arc<Alphabet>) -> Result<Contract, AlgebraError> {
        Ok(Contract {
            id: self.id.clone(),
            assumption: self.assumption.extend_alphabet(target.clone())?,
            guarantee: self.guarantee.extend_alphabet(target)?,
        })
    }
}

/// `A ∩ B ⊆ G`: behaviour `behavior` implements `contract`.
pub fn satisfies(behavior: &AssertionSet, contract: &Contract) -> Result<bool, AlgebraError> {
    contract.satisfied_by(behavior)
}

/// Re-homes both contracts over the union of their alphabets.
pub fn equalize_alphabets(
    c1: &Contract,
    c2: &Contract,
) -> Result<(Contract, Contract), AlgebraError> {
    if c1.alphabet() == c2.alphabet() {
        return Ok((c1.clone(), c2.extend_alphabet(c1.alphabet().clone())?));
    }
    let union = Arc::new(c1.alphabet().union(c2.alphabet())?);
    Ok((
        c1.extend_alphabet(union.clone())?,
        c2.extend_alphabet(union)?,
    ))
}

/// Parallel composition: `((A1 ∩ A2) ∪ ¬(G1 ∩ G2), G1 ∩ G2)`.
pub fn compose(c1: &Contract, c2: &Contract) -> Result<Contract, AlgebraError> {
    let (c1, c2) = equalize_alphabets(c1, c2)?;
    let guarantee = c1.guarantee.intersect(&c2.guarantee)?;
    let assumption = c1
        .assumption
        .intersect(&c2.assumption)?
        .union(&guarantee.complement())?;
    Contract::new(
        format!("compose({},{})", c1.id, c2.id),
        assumption,
        guarantee,
    )
}

/// Left fold of [`compose`]; a single contract comes back saturated.
pub fn compose_all<'a, I>(contracts: I) -> Result<Option<Contract>, AlgebraError>
where
    I: IntoIterator<Item = &'a Contract>,
{
    let mut acc: Option<Contract> = None;
    for c in contracts {
        acc = Some(match acc {
            None => c.saturate(),
            Some(prev) => compose(&prev, c)?,
        });
    }
    Ok(acc)
}

/// Quotient `top / divisor`: `(A_t ∩ G_d, (A_d ∩ G_t) ∪ ¬(A_t ∩ G_d))`.
///
/// Both operands are saturated first when they are not already.
pub fn quotient(top: &Contract, divisor: &Contract) -> Result<Quotient, AlgebraError> {
    let (top, divisor) = equalize_alphabets(top, divisor)?;
    let saturated_top = !top.is_saturated();
    let saturated_divisor = !divisor.is_saturated();
    let top = if saturated_top { top.saturate() } else { top };
    let divisor = if saturated_divisor {
        divisor.saturate()
    } else {
        divisor
    };
    let assumption = top.assumption.intersect(&divisor.guarantee)?;
    let guarantee = divisor
        .assumption
        .intersect(&top.guarantee)?
        .union(&assumption.complement())?;
    Ok(Quotient {
        contract: Contract::new(
            format!("quotient({},{})", top.id, divisor.id),
            assumption,
            guarantee,
        )?,
        saturated_top,
        saturated_divisor,
    })
}

/// Conjunction: `(A1 ∪ A2, G1 ∩ G2)`.
pub fn conjoin(c1: &Contract, c2: &Contract) -> Result<Contract, AlgebraError> {
    let (c1, c2) = equalize_alphabets(c1, c2)?;
    Contract::new(
        format!("conjoin({},{})", c1.id, c2.id),
        c1.assumption.union(&c2.assumption)?,
        c1.guarantee.intersect(&c2.guarantee)?,
    )
}
