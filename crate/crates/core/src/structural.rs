//! Structural models and sequential residual generation.
//!
//! A model lists equations over known and unknown variables, with each
//! non-measurement equation causally assigned to the one unknown it
//! computes. Residual generators are derived by backward chaining from a
//! target sensor: collect the solving equation of every unknown the
//! estimate needs until only known signals remain. Re-routing a subset of
//! sensors substitutes their measurements for the measured states, which
//! removes those measurement equations, shortens chains, and can open new
//! estimation paths that avoid parts of the model.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fsm::{Fsm, FsmError};
use crate::select::candidate_count;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructuralError {
    #[error("unknown sensor id `{0}`")]
    UnknownSensor(String),
    #[error("target sensor `{0}` cannot also be an input")]
    TargetInInputs(String),
    #[error("residual spec references equation `{0}` missing from the model")]
    UnknownEquation(String),
    #[error("model has no sensors")]
    NoSensors,
    #[error("model failed validation:\n{0}")]
    InvalidModel(ValidationReport),
    #[error(transparent)]
    Fsm(#[from] FsmError),
}

/// Role of an equation inside the model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EquationKind {
    /// State dynamics; the solved state comes out of an integrator, so a
    /// reference to the state itself is not listed as a dependency.
    Dynamic,
    /// Algebraic relation.
    Static,
    /// Sensor equation tying one unknown state to a measured output.
    Measurement,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Equation {
    pub id: String,
    /// The one variable this equation is causally assigned to compute;
    /// `None` for pure constraints.
    pub solves: Option<String>,
    /// Other variables on the right-hand side (known or unknown).
    pub depends_on: BTreeSet<String>,
    /// Fault labels entering this equation.
    pub faults: BTreeSet<String>,
    pub kind: EquationKind,
}

impl Equation {
    /// Every variable the equation relates: the solved one plus the
    /// dependencies.
    fn var_set(&self) -> BTreeSet<&str> {
        self.solves
            .iter()
            .map(String::as_str)
            .chain(self.depends_on.iter().map(String::as_str))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sensor {
    pub id: String,
    /// Id of the measurement equation producing this sensor's output.
    pub equation: String,
    /// The unknown state this sensor measures.
    pub measures: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructuralModel {
    pub equations: Vec<Equation>,
    pub unknowns: BTreeSet<String>,
    pub knowns: BTreeSet<String>,
    pub sensors: Vec<Sensor>,
    /// Fault labels in reporting order; fixes the FSM column ordering.
    pub faults: Vec<String>,
}

impl StructuralModel {
    pub fn sensor(&self, id: &str) -> Option<&Sensor> {
        self.sensors.iter().find(|s| s.id == id)
    }

    pub fn equation(&self, id: &str) -> Option<&Equation> {
        self.equations.iter().find(|e| e.id == id)
    }
}

/// A residual generator: estimate `target`'s output along the causal
/// chain, optionally consuming other sensors as known inputs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidualSpec {
    /// `r_<target>` for default residuals, `<target>_<in1>.<in2>...` for
    /// re-routed ones (inputs listed in sensor order).
    pub id: String,
    pub target: String,
    pub inputs: BTreeSet<String>,
    /// Equation ids used by the derivation, including the target's
    /// measurement equation. Measurement equations of consumed inputs are
    /// excluded: those sensors enter as plain signals.
    pub support: BTreeSet<String>,
}

/// One diagnostic from [`validate_model`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ModelIssue {
    DuplicateEquationId(String),
    DuplicateSensorId(String),
    DuplicateFaultId(String),
    /// Two non-measurement equations are assigned to the same unknown.
    DuplicateAssignment { variable: String, equations: Vec<String> },
    SelfDependence { equation: String, variable: String },
    UndeclaredVariable { equation: String, variable: String },
    UndeclaredFault { equation: String, fault: String },
    /// Fault listed on the model but absent from every equation.
    UnusedFault(String),
    /// Non-measurement equation solving something not declared unknown.
    SolvesNotUnknown { equation: String, variable: String },
    /// Unknown that is needed somewhere but has no solving equation.
    UnsolvedUnknown(String),
    /// Unknown that no sensor chain ever visits.
    UnreachableUnknown(String),
    SensorEquationMissing { sensor: String, equation: String },
    SensorEquationNotMeasurement { sensor: String, equation: String },
    /// Sensor's measurement equation does not depend on exactly the
    /// measured state.
    SensorMeasuresMismatch { sensor: String, equation: String },
}

impl fmt::Display for ModelIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::DuplicateEquationId(id) => write!(f, "duplicate equation id `{id}`"),
            Self::DuplicateSensorId(id) => write!(f, "duplicate sensor id `{id}`"),
            Self::DuplicateFaultId(id) => write!(f, "duplicate fault id `{id}`"),
            Self::DuplicateAssignment { variable, equations } => write!(
                f,
                "unknown `{variable}` is solved by more than one equation: {}",
                equations.join(", ")
            ),
            Self::SelfDependence { equation, variable } => {
                write!(f, "equation `{equation}` depends on the variable `{variable}` it solves")
            }
            Self::UndeclaredVariable { equation, variable } => {
                write!(f, "equation `{equation}` references undeclared variable `{variable}`")
            }
            Self::UndeclaredFault { equation, fault } => {
                write!(f, "equation `{equation}` references undeclared fault `{fault}`")
            }
            Self::UnusedFault(id) => write!(f, "fault `{id}` appears in no equation"),
            Self::SolvesNotUnknown { equation, variable } => {
                write!(f, "equation `{equation}` solves `{variable}` which is not an unknown")
            }
            Self::UnsolvedUnknown(v) => write!(f, "unknown `{v}` is required but never solved"),
            Self::UnreachableUnknown(v) => write!(f, "unknown `{v}` is not reachable from any sensor"),
            Self::SensorEquationMissing { sensor, equation } => {
                write!(f, "sensor `{sensor}` references missing equation `{equation}`")
            }
            Self::SensorEquationNotMeasurement { sensor, equation } => {
                write!(f, "sensor `{sensor}` equation `{equation}` is not a measurement")
            }
            Self::SensorMeasuresMismatch { sensor, equation } => {
                write!(f, "sensor `{sensor}` equation `{equation}` does not measure the declared state")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub issues: Vec<ModelIssue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.issues.is_empty() {
            return write!(f, "model is valid");
        }
        for issue in &self.issues {
            writeln!(f, "- {issue}")?;
        }
        Ok(())
    }
}

/// Checks the model invariants and returns structured diagnostics.
pub fn validate_model(model: &StructuralModel) -> ValidationReport {
    let mut issues = Vec::new();

    let mut eq_ids = BTreeSet::new();
    for eq in &model.equations {
        if !eq_ids.insert(eq.id.as_str()) {
            issues.push(ModelIssue::DuplicateEquationId(eq.id.clone()));
        }
    }
    let mut sensor_ids = BTreeSet::new();
    for s in &model.sensors {
        if !sensor_ids.insert(s.id.as_str()) {
            issues.push(ModelIssue::DuplicateSensorId(s.id.clone()));
        }
    }
    let mut fault_ids = BTreeSet::new();
    for fid in &model.faults {
        if !fault_ids.insert(fid.as_str()) {
            issues.push(ModelIssue::DuplicateFaultId(fid.clone()));
        }
    }

    let declared: BTreeSet<&str> = model
        .unknowns
        .iter()
        .chain(model.knowns.iter())
        .map(String::as_str)
        .chain(model.sensors.iter().map(|s| s.id.as_str()))
        .collect();

    for eq in &model.equations {
        if let Some(solved) = &eq.solves {
            if eq.depends_on.contains(solved) {
                issues.push(ModelIssue::SelfDependence {
                    equation: eq.id.clone(),
                    variable: solved.clone(),
                });
            }
            if eq.kind != EquationKind::Measurement && !model.unknowns.contains(solved) {
                issues.push(ModelIssue::SolvesNotUnknown {
                    equation: eq.id.clone(),
                    variable: solved.clone(),
                });
            }
        }
        for dep in &eq.depends_on {
            if !declared.contains(dep.as_str()) {
                issues.push(ModelIssue::UndeclaredVariable {
                    equation: eq.id.clone(),
                    variable: dep.clone(),
                });
            }
        }
        for fault in &eq.faults {
            if !fault_ids.contains(fault.as_str()) {
                issues.push(ModelIssue::UndeclaredFault {
                    equation: eq.id.clone(),
                    fault: fault.clone(),
                });
            }
        }
    }

    for fid in &model.faults {
        if !model.equations.iter().any(|e| e.faults.contains(fid)) {
            issues.push(ModelIssue::UnusedFault(fid.clone()));
        }
    }

    // Causal assignment must be a function: one solver per unknown.
    let mut solvers: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for eq in &model.equations {
        if eq.kind == EquationKind::Measurement {
            continue;
        }
        if let Some(solved) = &eq.solves {
            solvers.entry(solved.as_str()).or_default().push(&eq.id);
        }
    }
    for (variable, equations) in &solvers {
        if equations.len() > 1 {
            issues.push(ModelIssue::DuplicateAssignment {
                variable: (*variable).to_string(),
                equations: equations.iter().map(|s| s.to_string()).collect(),
            });
        }
    }

    for sensor in &model.sensors {
        match model.equation(&sensor.equation) {
            None => issues.push(ModelIssue::SensorEquationMissing {
                sensor: sensor.id.clone(),
                equation: sensor.equation.clone(),
            }),
            Some(eq) => {
                if eq.kind != EquationKind::Measurement {
                    issues.push(ModelIssue::SensorEquationNotMeasurement {
                        sensor: sensor.id.clone(),
                        equation: sensor.equation.clone(),
                    });
                } else if eq.depends_on.len() != 1
                    || !eq.depends_on.contains(&sensor.measures)
                    || !model.unknowns.contains(&sensor.measures)
                {
                    issues.push(ModelIssue::SensorMeasuresMismatch {
                        sensor: sensor.id.clone(),
                        equation: sensor.equation.clone(),
                    });
                }
            }
        }
    }

    // Reachability and solvability of the unknowns, following the
    // declared assignment from every sensor.
    let mut required: BTreeSet<&str> = model.sensors.iter().map(|s| s.measures.as_str()).collect();
    for eq in &model.equations {
        for dep in &eq.depends_on {
            if model.unknowns.contains(dep) {
                required.insert(dep);
            }
        }
    }
    let mut reached: BTreeSet<&str> = BTreeSet::new();
    let mut stack: Vec<&str> = model.sensors.iter().map(|s| s.measures.as_str()).collect();
    while let Some(v) = stack.pop() {
        if !model.unknowns.contains(v) || !reached.insert(v) {
            continue;
        }
        if let Some(&eqs) = solvers.get(v).map(|e| &e[0]) {
            let eq = model.equation(eqs).expect("solver ids come from the model");
            for dep in &eq.depends_on {
                stack.push(dep);
            }
        }
    }
    for unknown in &model.unknowns {
        let solved = solvers.contains_key(unknown.as_str());
        if !solved && required.contains(unknown.as_str()) {
            issues.push(ModelIssue::UnsolvedUnknown(unknown.clone()));
        }
        if !reached.contains(unknown.as_str()) {
            issues.push(ModelIssue::UnreachableUnknown(unknown.clone()));
        }
    }

    ValidationReport { issues }
}

/// Record of one substituted sensor: consuming its signal injects its
/// measurement fault into every derivation that touches the state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Substitution {
    pub sensor: String,
    pub state: String,
    pub faults: BTreeSet<String>,
}

/// A model after sensor re-routing, with the causal assignment rebuilt.
#[derive(Clone, Debug)]
pub struct Rerouted {
    pub model: StructuralModel,
    pub substitutions: Vec<Substitution>,
    /// unknown -> id of the equation that computes it. Equations freed by
    /// the re-routing (their solved state became known) are re-aimed at
    /// their single remaining unknown and take precedence over the
    /// declared assignment; that is what routes derivations through the
    /// substituted measurements.
    pub assignment: BTreeMap<String, String>,
}

/// Re-classifies the states measured by `inputs` as known signals and
/// drops their measurement equations.
pub fn reroute_sensors(
    model: &StructuralModel,
    inputs: &BTreeSet<String>,
) -> Result<Rerouted, StructuralError> {
    let mut substitutions = Vec::new();
    let mut substituted_states = BTreeSet::new();
    let mut removed_equations = BTreeSet::new();
    for input in inputs {
        let sensor = model
            .sensor(input)
            .ok_or_else(|| StructuralError::UnknownSensor(input.clone()))?;
        let faults = model
            .equation(&sensor.equation)
            .map(|eq| eq.faults.clone())
            .unwrap_or_default();
        substitutions.push(Substitution {
            sensor: sensor.id.clone(),
            state: sensor.measures.clone(),
            faults,
        });
        substituted_states.insert(sensor.measures.clone());
        removed_equations.insert(sensor.equation.clone());
    }

    let mut rerouted = model.clone();
    rerouted.equations.retain(|eq| !removed_equations.contains(&eq.id));
    rerouted.sensors.retain(|s| !inputs.contains(&s.id));
    for state in &substituted_states {
        rerouted.unknowns.remove(state);
        rerouted.knowns.insert(state.clone());
    }

    let mut assignment: BTreeMap<String, String> = BTreeMap::new();
    let mut reaimed: BTreeSet<String> = BTreeSet::new();
    for eq in &rerouted.equations {
        if eq.kind == EquationKind::Measurement {
            continue;
        }
        let Some(solved) = &eq.solves else { continue };
        if rerouted.unknowns.contains(solved) {
            // Declared assignment; first equation wins, a re-aimed one
            // keeps precedence.
            if !reaimed.contains(solved) {
                assignment.entry(solved.clone()).or_insert_with(|| eq.id.clone());
            }
        } else if substituted_states.contains(solved) {
            // Freed equation: its solved state is now measured directly.
            // Re-aim it at its single remaining unknown, if any.
            let remaining: Vec<&str> = eq
                .var_set()
                .into_iter()
                .filter(|v| rerouted.unknowns.contains(*v))
                .collect();
            if let [only] = remaining.as_slice() {
                if reaimed.insert((*only).to_string()) {
                    assignment.insert((*only).to_string(), eq.id.clone());
                }
            }
        }
    }

    Ok(Rerouted {
        model: rerouted,
        substitutions,
        assignment,
    })
}

/// Outcome of a residual derivation attempt.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Derivation {
    Feasible(ResidualSpec),
    Infeasible(InfeasibleCandidate),
}

impl Derivation {
    pub fn feasible(&self) -> Option<&ResidualSpec> {
        match self {
            Self::Feasible(spec) => Some(spec),
            Self::Infeasible(_) => None,
        }
    }
}

/// Attempt that backward chaining could not complete.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InfeasibleCandidate {
    pub id: String,
    pub target: String,
    pub inputs: BTreeSet<String>,
    /// First unknown encountered that has no solving equation.
    pub blocking_unknown: String,
}

/// Derives the residual that estimates `target`'s output while consuming
/// the sensors in `inputs` as known signals.
pub fn derive_residual(
    model: &StructuralModel,
    target: &str,
    inputs: &BTreeSet<String>,
) -> Result<Derivation, StructuralError> {
    if inputs.contains(target) {
        return Err(StructuralError::TargetInInputs(target.to_string()));
    }
    let sensor = model
        .sensor(target)
        .ok_or_else(|| StructuralError::UnknownSensor(target.to_string()))?;
    let rerouted = reroute_sensors(model, inputs)?;
    let id = candidate_id(model, target, inputs);

    let mut support = BTreeSet::new();
    support.insert(sensor.equation.clone());
    let mut visited = BTreeSet::new();
    let mut stack = vec![sensor.measures.clone()];
    while let Some(variable) = stack.pop() {
        if rerouted.model.knowns.contains(&variable) || !visited.insert(variable.clone()) {
            continue;
        }
        let Some(eq_id) = rerouted.assignment.get(&variable) else {
            return Ok(Derivation::Infeasible(InfeasibleCandidate {
                id,
                target: target.to_string(),
                inputs: inputs.clone(),
                blocking_unknown: variable,
            }));
        };
        let eq = rerouted
            .model
            .equation(eq_id)
            .expect("assignment references live equations");
        support.insert(eq.id.clone());
        for dep in eq.var_set() {
            if dep != variable {
                stack.push(dep.to_string());
            }
        }
    }

    Ok(Derivation::Feasible(ResidualSpec {
        id,
        target: target.to_string(),
        inputs: inputs.clone(),
        support,
    }))
}

/// Default (no re-routing) residuals, one per sensor in sensor order.
pub fn original_residuals(model: &StructuralModel) -> Result<Vec<ResidualSpec>, StructuralError> {
    model
        .sensors
        .iter()
        .map(|s| {
            match derive_residual(model, &s.id, &BTreeSet::new())? {
                Derivation::Feasible(spec) => Ok(spec),
                Derivation::Infeasible(inf) => Err(StructuralError::InvalidModel(ValidationReport {
                    issues: vec![ModelIssue::UnsolvedUnknown(inf.blocking_unknown)],
                })),
            }
        })
        .collect()
}

/// Where a signature entry comes from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FaultSource {
    /// Fault enters a support equation.
    Equation(String),
    /// Measurement fault of a consumed input sensor.
    InputSensor(String),
    /// Measurement fault of the target sensor.
    TargetSensor(String),
}

/// Per-fault provenance of a residual's structural signature; empty
/// source list means the residual is insensitive to the fault.
pub fn signature_trace(
    model: &StructuralModel,
    spec: &ResidualSpec,
) -> Result<Vec<(String, Vec<FaultSource>)>, StructuralError> {
    let mut support_eqs = Vec::new();
    for eq_id in &spec.support {
        let eq = model
            .equation(eq_id)
            .ok_or_else(|| StructuralError::UnknownEquation(eq_id.clone()))?;
        support_eqs.push(eq);
    }
    let target_sensor = model
        .sensor(&spec.target)
        .ok_or_else(|| StructuralError::UnknownSensor(spec.target.clone()))?;
    let target_faults = model
        .equation(&target_sensor.equation)
        .map(|eq| eq.faults.clone())
        .unwrap_or_default();
    let mut input_faults: Vec<(&str, BTreeSet<String>)> = Vec::new();
    for input in &spec.inputs {
        let sensor = model
            .sensor(input)
            .ok_or_else(|| StructuralError::UnknownSensor(input.clone()))?;
        let faults = model
            .equation(&sensor.equation)
            .map(|eq| eq.faults.clone())
            .unwrap_or_default();
        input_faults.push((input, faults));
    }

    Ok(model
        .faults
        .iter()
        .map(|fault| {
            let mut sources = Vec::new();
            for eq in &support_eqs {
                if eq.faults.contains(fault) {
                    sources.push(FaultSource::Equation(eq.id.clone()));
                }
            }
            for (input, faults) in &input_faults {
                if faults.contains(fault) {
                    sources.push(FaultSource::InputSensor((*input).to_string()));
                }
            }
            if target_faults.contains(fault)
                && !sources
                    .iter()
                    .any(|s| matches!(s, FaultSource::Equation(id) if *id == target_sensor.equation))
            {
                sources.push(FaultSource::TargetSensor(spec.target.clone()));
            }
            (fault.clone(), sources)
        })
        .collect())
}

/// Boolean fault-sensitivity vector of a residual, ordered like
/// `model.faults`. A fault is marked when it enters a support equation,
/// when it is the measurement fault of a consumed input sensor, or when
/// it is the target's own measurement fault.
pub fn structural_signature(
    model: &StructuralModel,
    spec: &ResidualSpec,
) -> Result<Vec<bool>, StructuralError> {
    Ok(signature_trace(model, spec)?
        .into_iter()
        .map(|(_, sources)| !sources.is_empty())
        .collect())
}

/// Result of enumerating every (target, input-subset) candidate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Enumeration {
    /// Attempted derivations, `n * 2^(n-1) - n` for `n` sensors.
    pub attempted: u64,
    pub feasible: Vec<ResidualSpec>,
    pub infeasible: Vec<InfeasibleCandidate>,
}

/// Enumerates all re-routing candidates: every target sensor combined
/// with every non-empty subset of the remaining sensors.
///
/// Order is deterministic: targets in sensor order, subsets counting up
/// in binary with bit `k` standing for the `k`-th remaining sensor.
/// Attempts run on the rayon pool when the `parallel` feature is enabled.
pub fn enumerate_candidates(model: &StructuralModel) -> Result<Enumeration, StructuralError> {
    let attempts = candidate_attempts(model)?;
    #[cfg(feature = "parallel")]
    let outcomes: Result<Vec<Derivation>, StructuralError> = attempts
        .par_iter()
        .map(|(target, inputs)| derive_residual(model, target, inputs))
        .collect();
    #[cfg(not(feature = "parallel"))]
    let outcomes: Result<Vec<Derivation>, StructuralError> = attempts
        .iter()
        .map(|(target, inputs)| derive_residual(model, target, inputs))
        .collect();
    collect_enumeration(attempts.len() as u64, outcomes?)
}

/// Sequential reference path for [`enumerate_candidates`].
pub fn enumerate_candidates_seq(model: &StructuralModel) -> Result<Enumeration, StructuralError> {
    let attempts = candidate_attempts(model)?;
    let outcomes: Result<Vec<Derivation>, StructuralError> = attempts
        .iter()
        .map(|(target, inputs)| derive_residual(model, target, inputs))
        .collect();
    collect_enumeration(attempts.len() as u64, outcomes?)
}

fn candidate_attempts(
    model: &StructuralModel,
) -> Result<Vec<(String, BTreeSet<String>)>, StructuralError> {
    let report = validate_model(model);
    if !report.is_valid() {
        return Err(StructuralError::InvalidModel(report));
    }
    let n = model.sensors.len();
    if n == 0 {
        return Err(StructuralError::NoSensors);
    }
    let expected = candidate_count(n as u32).map_err(StructuralError::Fsm)?;

    let mut attempts = Vec::with_capacity(expected as usize);
    for target in &model.sensors {
        let others: Vec<&str> = model
            .sensors
            .iter()
            .filter(|s| s.id != target.id)
            .map(|s| s.id.as_str())
            .collect();
        for mask in 1u64..(1u64 << others.len()) {
            let inputs: BTreeSet<String> = others
                .iter()
                .enumerate()
                .filter(|(k, _)| mask & (1 << k) != 0)
                .map(|(_, id)| (*id).to_string())
                .collect();
            attempts.push((target.id.clone(), inputs));
        }
    }
    debug_assert_eq!(attempts.len() as u64, expected);
    Ok(attempts)
}

fn collect_enumeration(
    attempted: u64,
    outcomes: Vec<Derivation>,
) -> Result<Enumeration, StructuralError> {
    let mut feasible = Vec::new();
    let mut infeasible = Vec::new();
    for outcome in outcomes {
        match outcome {
            Derivation::Feasible(spec) => feasible.push(spec),
            Derivation::Infeasible(inf) => infeasible.push(inf),
        }
    }
    Ok(Enumeration {
        attempted,
        feasible,
        infeasible,
    })
}

/// Stacks the structural signatures of `specs` into an FSM with the
/// model's fault ordering.
pub fn predicted_fsm(
    model: &StructuralModel,
    specs: &[ResidualSpec],
) -> Result<Fsm, StructuralError> {
    let mut cells = Vec::with_capacity(specs.len());
    for spec in specs {
        cells.push(structural_signature(model, spec)?);
    }
    let ids = specs.iter().map(|s| s.id.clone()).collect();
    Fsm::new(ids, model.faults.clone(), cells).map_err(StructuralError::Fsm)
}

/// `r_<target>` for default residuals, otherwise target plus the inputs
/// dot-joined in sensor order.
pub fn candidate_id(model: &StructuralModel, target: &str, inputs: &BTreeSet<String>) -> String {
    if inputs.is_empty() {
        return format!("r_{target}");
    }
    let joined: Vec<&str> = model
        .sensors
        .iter()
        .filter(|s| inputs.contains(&s.id))
        .map(|s| s.id.as_str())
        .collect();
    format!("{target}_{}", joined.join("."))
}
