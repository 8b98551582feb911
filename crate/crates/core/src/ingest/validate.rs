use std::collections::{HashMap, HashSet};
use std::fmt;

use super::model::{BusType, NetworkModel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Clone, Debug, PartialEq)]
pub enum DiagnosticKind {
    NonPositiveBaseMva,
    NoSlack,
    MultipleSlack { count: usize },
    DuplicateBusId { bus: u32 },
    UnknownBus { branch: usize, bus: u32 },
    SelfLoop { branch: usize },
    ZeroReactance { branch: usize },
    NonPositiveTap { branch: usize },
    NonPositiveVoltage { bus: u32 },
    NonFiniteInjection { bus: u32 },
    UnratedBranch { branch: usize },
    IsolatedBus { bus: u32 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub kind: DiagnosticKind,
}

impl Diagnostic {
    fn error(kind: DiagnosticKind) -> Self {
        Self {
            severity: Severity::Error,
            kind,
        }
    }

    fn warning(kind: DiagnosticKind) -> Self {
        Self {
            severity: Severity::Warning,
            kind,
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let level = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{level}: ")?;
        match &self.kind {
            DiagnosticKind::NonPositiveBaseMva => write!(f, "MVA base must be positive"),
            DiagnosticKind::NoSlack => write!(f, "no slack bus"),
            DiagnosticKind::MultipleSlack { count } => write!(f, "{count} slack buses, expected 1"),
            DiagnosticKind::DuplicateBusId { bus } => {
                write!(f, "bus id {bus} appears more than once")
            }
            DiagnosticKind::UnknownBus { branch, bus } => {
                write!(f, "branch {branch} references unknown bus {bus}")
            }
            DiagnosticKind::SelfLoop { branch } => {
                write!(f, "branch {branch} connects a bus to itself")
            }
            DiagnosticKind::ZeroReactance { branch } => {
                write!(f, "branch {branch} has zero reactance")
            }
            DiagnosticKind::NonPositiveTap { branch } => {
                write!(f, "branch {branch} has a non-positive turns ratio")
            }
            DiagnosticKind::NonPositiveVoltage { bus } => {
                write!(f, "bus {bus} has a non-positive voltage magnitude")
            }
            DiagnosticKind::NonFiniteInjection { bus } => {
                write!(f, "bus {bus} has a non-finite scheduled injection")
            }
            DiagnosticKind::UnratedBranch { branch } => {
                write!(f, "branch {branch} has no flow rating")
            }
            DiagnosticKind::IsolatedBus { bus } => write!(f, "bus {bus} has no in-service branch"),
        }
    }
}

/// Checks every model invariant and returns one diagnostic per violation.
/// An empty list means the model is usable as-is.
pub fn validate_network(model: &NetworkModel) -> Vec<Diagnostic> {
    let mut out = Vec::new();

    if !(model.base_mva > 0.0 && model.base_mva.is_finite()) {
        out.push(Diagnostic::error(DiagnosticKind::NonPositiveBaseMva));
    }

    let slack_count = model
        .buses
        .iter()
        .filter(|b| b.bus_type == BusType::Slack)
        .count();
    match slack_count {
        0 => out.push(Diagnostic::error(DiagnosticKind::NoSlack)),
        1 => {}
        count => out.push(Diagnostic::error(DiagnosticKind::MultipleSlack { count })),
    }

    let mut ids = HashSet::new();
    for bus in &model.buses {
        if !ids.insert(bus.id) {
            out.push(Diagnostic::error(DiagnosticKind::DuplicateBusId {
                bus: bus.id,
            }));
        }
        if !(bus.v_mag > 0.0 && bus.v_mag.is_finite()) {
            out.push(Diagnostic::error(DiagnosticKind::NonPositiveVoltage {
                bus: bus.id,
            }));
        }
        if !bus.p_sched().is_finite() || !bus.q_sched().is_finite() {
            out.push(Diagnostic::error(DiagnosticKind::NonFiniteInjection {
                bus: bus.id,
            }));
        }
    }

    let mut degree: HashMap<u32, usize> = HashMap::new();
    for br in &model.branches {
        for bus in [br.from_bus, br.to_bus] {
            if !ids.contains(&bus) {
                out.push(Diagnostic::error(DiagnosticKind::UnknownBus {
                    branch: br.id,
                    bus,
                }));
            }
        }
        if br.from_bus == br.to_bus {
            out.push(Diagnostic::error(DiagnosticKind::SelfLoop {
                branch: br.id,
            }));
        }
        if br.x == 0.0 || !br.x.is_finite() {
            out.push(Diagnostic::error(DiagnosticKind::ZeroReactance {
                branch: br.id,
            }));
        }
        if !(br.tap > 0.0 && br.tap.is_finite()) {
            out.push(Diagnostic::error(DiagnosticKind::NonPositiveTap {
                branch: br.id,
            }));
        }
        if br.rating_mva == 0.0 {
            out.push(Diagnostic::warning(DiagnosticKind::UnratedBranch {
                branch: br.id,
            }));
        }
        if br.in_service {
            *degree.entry(br.from_bus).or_default() += 1;
            *degree.entry(br.to_bus).or_default() += 1;
        }
    }

    // a lone slack bus with no branches is a legitimate one-bus case
    if model.buses.len() > 1 {
        for bus in &model.buses {
            if !degree.contains_key(&bus.id) {
                out.push(Diagnostic::warning(DiagnosticKind::IsolatedBus {
                    bus: bus.id,
                }));
            }
        }
    }

    out
}
