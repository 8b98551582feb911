use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BusType {
    PQ,
    PV,
    Slack,
}

impl fmt::Display for BusType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BusType::PQ => "pq",
            BusType::PV => "pv",
            BusType::Slack => "slack",
        };
        f.write_str(s)
    }
}

/// One bus of the bus-branch model. Powers are per-unit on the case MVA
/// base, angles are radians.
#[derive(Clone, Debug, PartialEq)]
pub struct BusRecord {
    pub id: u32,
    pub bus_type: BusType,
    pub v_mag: f64,
    pub v_ang: f64,
    pub p_load: f64,
    pub q_load: f64,
    pub p_gen: f64,
    pub q_gen: f64,
    pub g_shunt: f64,
    pub b_shunt: f64,
    pub base_kv: f64,
}

impl BusRecord {
    /// Scheduled active injection `p_gen - p_load`.
    pub fn p_sched(&self) -> f64 {
        self.p_gen - self.p_load
    }

    pub fn q_sched(&self) -> f64 {
        self.q_gen - self.q_load
    }
}

/// One branch (line or transformer). `id` is the 1-based ordinal of the
/// branch in its source file and is what reports refer to.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchRecord {
    pub id: usize,
    pub from_bus: u32,
    pub to_bus: u32,
    pub r: f64,
    pub x: f64,
    pub b_charging: f64,
    /// Off-nominal turns ratio on the from side; already normalized so that
    /// an absent ratio reads as 1.0.
    pub tap: f64,
    /// MVA flow limit, 0 means unlimited.
    pub rating_mva: f64,
    pub in_service: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NetworkModel {
    pub case_name: String,
    pub base_mva: f64,
    pub buses: Vec<BusRecord>,
    pub branches: Vec<BranchRecord>,
}

impl NetworkModel {
    pub fn bus(&self, id: u32) -> Option<&BusRecord> {
        self.buses.iter().find(|b| b.id == id)
    }

    pub fn branch(&self, id: usize) -> Option<&BranchRecord> {
        self.branches.iter().find(|b| b.id == id)
    }

    pub fn in_service_branch_count(&self) -> usize {
        self.branches.iter().filter(|b| b.in_service).count()
    }
}

/// Maps an input turns ratio to its normalized form: 0 means nominal.
pub(crate) fn normalize_tap(raw: f64) -> f64 {
    if raw == 0.0 {
        1.0
    } else {
        raw
    }
}
