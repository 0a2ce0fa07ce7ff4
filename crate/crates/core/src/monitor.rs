//! Runtime monitors generated from a setup's contracts.
//!
//! Each recorded row is substituted into every contract: a value outside its
//! declared domain is a domain exit, a row outside the assumption is an exit
//! of the validity domain, and a row inside the assumption but outside the
//! guarantee is a guarantee breach. Checks are pointwise in time.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::architecture::{
    check_composability, Architecture, Composability, SetupAssignment, StructuralError,
};
use crate::assertion::{AlgebraError, Alphabet, AssertionSet, Coord, Domain, VariableDecl};
use crate::contract::Contract;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MonitorError {
    #[error("setup is not composable: {0}")]
    NotComposable(String),
    #[error(transparent)]
    Structural(#[from] StructuralError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Malformed trace input, located by 1-based line of the file.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {row}: {message}")]
pub struct TraceFormatError {
    pub row: usize,
    pub message: String,
}

/// A recorded value; may lie outside the declared domain.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum TraceValue {
    Number(f64),
    Bool(bool),
    Label(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub time: f64,
    /// One value per variable of the trace alphabet, in alphabet order.
    pub values: Vec<TraceValue>,
}

/// A recorded run: time-stamped valuations over an alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub alphabet: Arc<Alphabet>,
    pub rows: Vec<TraceRow>,
}

fn parse_cell(decl: &VariableDecl, cell: &str) -> Result<TraceValue, String> {
    let cell = cell.trim();
    let number = || -> Result<f64, String> {
        let x: f64 = cell
            .parse()
            .map_err(|_| format!("`{cell}` is not a number (column `{}`)", decl.name))?;
        if x.is_nan() {
            return Err(format!("NaN in column `{}`", decl.name));
        }
        Ok(x)
    };
    match &decl.domain {
        Domain::Real { .. } => number().map(TraceValue::Number),
        Domain::Integer { .. } => {
            let x = number()?;
            if x.is_finite() && x.fract() != 0.0 {
                return Err(format!(
                    "`{cell}` is not an integer (column `{}`)",
                    decl.name
                ));
            }
            Ok(TraceValue::Number(x))
        }
        Domain::Boolean => match cell {
            "true" => Ok(TraceValue::Bool(true)),
            "false" => Ok(TraceValue::Bool(false)),
            _ => Err(format!(
                "`{cell}` is not a boolean (column `{}`)",
                decl.name
            )),
        },
        Domain::Enumeration(_) => {
            if cell.is_empty() {
                Err(format!("empty label in column `{}`", decl.name))
            } else {
                Ok(TraceValue::Label(cell.to_string()))
            }
        }
    }
}

/// Streaming CSV reader. The first column must be `time`; every variable of
/// the alphabet needs a column; other columns are ignored. Lines starting with
/// `#` are comments.
pub struct TraceReader<R: Read> {
    records: csv::StringRecordsIntoIter<R>,
    alphabet: Arc<Alphabet>,
    columns: Vec<usize>,
    last_time: Option<f64>,
}

impl<R: Read> TraceReader<R> {
    pub fn new(reader: R, alphabet: Arc<Alphabet>) -> Result<Self, TraceFormatError> {
        let mut csv = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .has_headers(true)
            .from_reader(reader);
        let header = csv
            .headers()
            .map_err(|e| TraceFormatError {
                row: e.position().map_or(1, |p| p.line() as usize),
                message: e.to_string(),
            })?
            .clone();
        // the header's own position ignores leading comment lines
        let header_line = (csv.position().line() as usize).saturating_sub(1).max(1);
        let fail = |message: String| TraceFormatError {
            row: header_line,
            message,
        };
        if header.get(0) != Some("time") {
            return Err(fail("first column must be `time`".into()));
        }
        let mut columns = Vec::with_capacity(alphabet.len());
        for name in alphabet.names() {
            let ix = header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| fail(format!("missing column `{name}`")))?;
            columns.push(ix);
        }
        Ok(Self {
            records: csv.into_records(),
            alphabet,
            columns,
            last_time: None,
        })
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }
}

impl<R: Read> Iterator for TraceReader<R> {
    type Item = Result<TraceRow, TraceFormatError>;

    fn next(&mut self) -> Option<Self::Item> {
        let record = self.records.next()?;
        Some(
            record
                .map_err(|e| TraceFormatError {
                    row: e.position().map_or(0, |p| p.line() as usize),
                    message: e.to_string(),
                })
                .and_then(|record| {
                    let row = record.position().map_or(0, |p| p.line() as usize);
                    let fail = |message: String| TraceFormatError { row, message };
                    let time: f64 = record.get(0).unwrap_or("").parse().map_err(|_| {
                        fail(format!(
                            "unparseable time `{}`",
                            record.get(0).unwrap_or("")
                        ))
                    })?;
                    if !time.is_finite() {
                        return Err(fail("time must be finite".into()));
                    }
                    if let Some(prev) = self.last_time {
                        if time <= prev {
                            return Err(fail(format!(
                                "time {time} does not increase (previous {prev})"
                            )));
                        }
                    }
                    self.last_time = Some(time);
                    let values = self
                        .columns
                        .iter()
                        .zip(self.alphabet.iter())
                        .map(|(&ix, decl)| {
                            let cell = record.get(ix).ok_or_else(|| {
                                fail(format!("missing value for `{}`", decl.name))
                            })?;
                            parse_cell(decl, cell).map_err(fail)
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    Ok(TraceRow { time, values })
                }),
        )
    }
}

impl Trace {
    pub fn from_csv<R: Read>(
        reader: R,
        alphabet: Arc<Alphabet>,
    ) -> Result<Trace, TraceFormatError> {
        let r = TraceReader::new(reader, alphabet.clone())?;
        Ok(Trace {
            alphabet,
            rows: r.collect::<Result<_, _>>()?,
        })
    }
}

/// The assertions one monitor checks.
#[derive(Debug, Clone)]
pub struct ContractMonitor {
    pub contract_id: String,
    /// `None` for the test-case contract.
    pub model_id: Option<String>,
    /// Over the monitor spec's alphabet.
    pub assumption: AssertionSet,
    pub guarantee: AssertionSet,
    /// Variables constrained by the assumption or the guarantee.
    pub relevant: BTreeSet<String>,
    checked_assumption: AssertionSet,
    checked_guarantee: AssertionSet,
}

impl ContractMonitor {
    pub fn new(
        contract: &Contract,
        model_id: Option<String>,
        alphabet: Arc<Alphabet>,
    ) -> Result<Self, AlgebraError> {
        let c = contract.extend_alphabet(alphabet)?;
        let relevant: BTreeSet<String> = c
            .assumption()
            .constrained_variables()
            .into_iter()
            .chain(c.guarantee().constrained_variables())
            .collect();
        let keep = || relevant.iter().map(String::as_str);
        Ok(Self {
            contract_id: c.id.clone(),
            model_id,
            checked_assumption: c.assumption().project(keep())?,
            checked_guarantee: c.guarantee().project(keep())?,
            assumption: c.assumption().clone(),
            guarantee: c.guarantee().clone(),
            relevant,
        })
    }
}

#[derive(Debug, Clone)]
pub struct MonitorSpec {
    pub alphabet: Arc<Alphabet>,
    pub monitors: Vec<ContractMonitor>,
}

/// One monitor per chosen model contract (model-id order), then one for the
/// test-case contract, all over the union alphabet.
pub fn generate_monitors(
    arch: &Architecture,
    setup: &SetupAssignment,
    test_case: &Contract,
) -> Result<MonitorSpec, MonitorError> {
    let plan = match check_composability(arch, setup)? {
        Composability::Plan(p) => p,
        Composability::Diagnostics(d) => {
            return Err(MonitorError::NotComposable(
                d.iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join("; "),
            ))
        }
    };
    let mut models: Vec<&str> = setup.values().map(String::as_str).collect();
    models.sort();
    let alphabet = Arc::new(plan.alphabet.union(test_case.alphabet())?);
    let mut monitors = Vec::new();
    for m in models {
        let model = arch
            .model(m)
            .ok_or_else(|| StructuralError::UnknownModel(m.to_string()))?;
        monitors.push(ContractMonitor::new(
            &model.contract,
            Some(model.id.clone()),
            alphabet.clone(),
        )?);
    }
    monitors.push(ContractMonitor::new(test_case, None, alphabet.clone())?);
    Ok(MonitorSpec { alphabet, monitors })
}

/// Monitors for arbitrary contracts, e.g. for ad-hoc checks.
pub fn monitors_for(contracts: &[(&Contract, Option<&str>)]) -> Result<MonitorSpec, AlgebraError> {
    let mut alphabet = Alphabet::empty();
    for (c, _) in contracts {
        alphabet = alphabet.union(c.alphabet())?;
    }
    let alphabet = Arc::new(alphabet);
    let monitors = contracts
        .iter()
        .map(|(c, m)| ContractMonitor::new(c, m.map(str::to_string), alphabet.clone()))
        .collect::<Result<_, _>>()?;
    Ok(MonitorSpec { alphabet, monitors })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    DomainExit,
    AssumptionExit,
    GuaranteeBreach,
}

impl std::fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ViolationKind::DomainExit => "domain-exit",
            ViolationKind::AssumptionExit => "assumption-exit",
            ViolationKind::GuaranteeBreach => "guarantee-breach",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub contract: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    pub time: f64,
    /// 0-based index of the data row.
    pub row: usize,
    pub variables: Vec<String>,
    /// No smaller set of variables explains the failure; `variables` lists
    /// every variable whose atom failed somewhere in the assertion.
    pub whole_assertion: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractFindings {
    pub contract: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    pub violations: Vec<Violation>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Clean,
    AssumptionExitsOnly,
    Breaches,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Clean => "clean",
            Verdict::AssumptionExitsOnly => "assumption-exits-only",
            Verdict::Breaches => "breaches",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Summary {
    pub rows: usize,
    pub domain_exits: usize,
    pub assumption_exits: usize,
    pub guarantee_breaches: usize,
}

impl Summary {
    pub fn total(&self) -> usize {
        self.domain_exits + self.assumption_exits + self.guarantee_breaches
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonitorReport {
    pub verdict: Verdict,
    pub summary: Summary,
    pub contracts: Vec<ContractFindings>,
}

impl MonitorReport {
    pub fn violations(&self) -> impl Iterator<Item = &Violation> {
        self.contracts.iter().flat_map(|c| c.violations.iter())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonitorOptions {
    /// Check guarantees only where the assumption holds.
    pub gate_guarantees: bool,
}

impl Default for MonitorOptions {
    fn default() -> Self {
        Self {
            gate_guarantees: true,
        }
    }
}

struct Prepared<'a> {
    monitor: &'a ContractMonitor,
    /// Positions of the relevant variables in the trace alphabet.
    positions: Vec<usize>,
    decls: Vec<&'a VariableDecl>,
}

/// Incremental checker: feed rows in order, then [`Monitor::finish`].
pub struct Monitor<'a> {
    prepared: Vec<Prepared<'a>>,
    options: MonitorOptions,
    findings: Vec<Vec<Violation>>,
    summary: Summary,
    last_time: Option<f64>,
}

impl<'a> Monitor<'a> {
    /// Binds the monitors to the variable layout of `trace_alphabet`, which
    /// must declare every relevant variable exactly as the spec does.
    pub fn new(
        spec: &'a MonitorSpec,
        trace_alphabet: &Alphabet,
        options: MonitorOptions,
    ) -> Result<Self, AlgebraError> {
        let mut prepared = Vec::new();
        for m in &spec.monitors {
            let mut positions = Vec::new();
            let mut decls = Vec::new();
            for name in m.checked_assumption.alphabet().names() {
                let mine = spec
                    .alphabet
                    .get(name)
                    .expect("relevant variables come from the spec alphabet");
                let ix = trace_alphabet
                    .index_of(name)
                    .ok_or_else(|| AlgebraError::MissingVariable(name.to_string()))?;
                if let Some(reason) = mine.conflict_with(&trace_alphabet.vars()[ix]) {
                    return Err(AlgebraError::VariableDeclConflict {
                        variable: name.to_string(),
                        reason,
                    });
                }
                positions.push(ix);
                decls.push(mine);
            }
            prepared.push(Prepared {
                monitor: m,
                positions,
                decls,
            });
        }
        Ok(Self {
            findings: vec![Vec::new(); prepared.len()],
            prepared,
            options,
            summary: Summary::default(),
            last_time: None,
        })
    }

    /// Checks one row. Rows must arrive with strictly increasing time.
    pub fn feed(&mut self, row: &TraceRow) -> Result<(), TraceFormatError> {
        let index = self.summary.rows;
        if let Some(prev) = self.last_time {
            if row.time <= prev {
                return Err(TraceFormatError {
                    row: index + 2,
                    message: format!("time {} does not increase (previous {prev})", row.time),
                });
            }
        }
        self.last_time = Some(row.time);
        self.summary.rows += 1;
        for (p, findings) in self.prepared.iter().zip(self.findings.iter_mut()) {
            let m = p.monitor;
            let violation = |kind, variables, whole_assertion| Violation {
                kind,
                contract: m.contract_id.clone(),
                model: m.model_id.clone(),
                time: row.time,
                row: index,
                variables,
                whole_assertion,
            };
            let mut coords = Vec::with_capacity(p.positions.len());
            let mut outside = Vec::new();
            for (&ix, decl) in p.positions.iter().zip(&p.decls) {
                match coordinate(decl, &row.values[ix]) {
                    Some(c) => coords.push(c),
                    None => outside.push(decl.name.clone()),
                }
            }
            if !outside.is_empty() {
                findings.push(violation(ViolationKind::DomainExit, outside, false));
                self.summary.domain_exits += 1;
                continue;
            }
            let assumed = m.checked_assumption.contains_coords(&coords);
            if !assumed {
                let (vars, whole) = attribute(&m.checked_assumption, &coords);
                findings.push(violation(ViolationKind::AssumptionExit, vars, whole));
                self.summary.assumption_exits += 1;
            }
            if (assumed || !self.options.gate_guarantees)
                && !m.checked_guarantee.contains_coords(&coords)
            {
                let (vars, whole) = attribute(&m.checked_guarantee, &coords);
                findings.push(violation(ViolationKind::GuaranteeBreach, vars, whole));
                self.summary.guarantee_breaches += 1;
            }
        }
        Ok(())
    }

    pub fn feed_all<'r, I>(&mut self, rows: I) -> Result<(), TraceFormatError>
    where
        I: IntoIterator<Item = &'r TraceRow>,
    {
        rows.into_iter().try_for_each(|r| self.feed(r))
    }

    pub fn finish(self) -> MonitorReport {
        let verdict = if self.summary.guarantee_breaches > 0 {
            Verdict::Breaches
        } else if self.summary.total() > 0 {
            Verdict::AssumptionExitsOnly
        } else {
            Verdict::Clean
        };
        MonitorReport {
            verdict,
            summary: self.summary,
            contracts: self
                .prepared
                .iter()
                .zip(self.findings)
                .map(|(p, violations)| ContractFindings {
                    contract: p.monitor.contract_id.clone(),
                    model: p.monitor.model_id.clone(),
                    violations,
                })
                .collect(),
        }
    }
}

/// Checks a whole trace in one pass.
pub fn check_trace(
    trace: &Trace,
    spec: &MonitorSpec,
    options: MonitorOptions,
) -> Result<MonitorReport, MonitorCheckError> {
    let mut monitor = Monitor::new(spec, &trace.alphabet, options)?;
    monitor.feed_all(&trace.rows)?;
    Ok(monitor.finish())
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MonitorCheckError {
    #[error(transparent)]
    Format(#[from] TraceFormatError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

fn coordinate(decl: &VariableDecl, value: &TraceValue) -> Option<Coord> {
    let as_value = match value {
        TraceValue::Number(x) => crate::assertion::Value::Number(*x),
        TraceValue::Bool(b) => crate::assertion::Value::Bool(*b),
        TraceValue::Label(l) => crate::assertion::Value::Label(l.clone()),
    };
    decl.coordinate(&as_value).ok()
}

/// Variables whose atom fails in every box. When dropping those atoms would
/// still not admit the row, or no such variable exists, the whole assertion
/// is blamed and every failing variable is listed.
fn attribute(set: &AssertionSet, coords: &[Coord]) -> (Vec<String>, bool) {
    let failing: Vec<Vec<usize>> = set.boxes().iter().map(|b| b.failing(coords)).collect();
    let name = |i: usize| set.alphabet().vars()[i].name.clone();
    let mut common: Option<BTreeSet<usize>> = None;
    for f in &failing {
        let f: BTreeSet<usize> = f.iter().copied().collect();
        common = Some(match common {
            None => f,
            Some(c) => c.intersection(&f).copied().collect(),
        });
    }
    let common = common.unwrap_or_default();
    let explains = failing.iter().any(|f| f.iter().all(|i| common.contains(i)));
    if !common.is_empty() && explains {
        (common.into_iter().map(name).collect(), false)
    } else {
        let all: BTreeSet<usize> = failing.into_iter().flatten().collect();
        (all.into_iter().map(name).collect(), true)
    }
}

/// Human-readable table of a report.
pub fn render_report(report: &MonitorReport) -> String {
    let mut out = String::new();
    let s = &report.summary;
    out.push_str(&format!(
        "verdict: {}\nrows: {}  domain-exits: {}  assumption-exits: {}  guarantee-breaches: {}\n",
        report.verdict, s.rows, s.domain_exits, s.assumption_exits, s.guarantee_breaches
    ));
    let mut by_row: BTreeMap<usize, Vec<&Violation>> = BTreeMap::new();
    for v in report.violations() {
        by_row.entry(v.row).or_default().push(v);
    }
    if !by_row.is_empty() {
        out.push_str(&format!(
            "{:>6}  {:>12}  {:<17}  {:<12}  {}\n",
            "row", "time", "kind", "contract", "variables"
        ));
    }
    for (_, vs) in by_row {
        for v in vs {
            let vars = if v.whole_assertion {
                format!("{} (joint)", v.variables.join(", "))
            } else {
                v.variables.join(", ")
            };
            out.push_str(&format!(
                "{:>6}  {:>12}  {:<17}  {:<12}  {}\n",
                v.row,
                v.time,
                v.kind.to_string(),
                v.contract,
                vars
            ));
        }
    }
    out
}
