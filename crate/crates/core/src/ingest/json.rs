//! JSON network format. Loads and generation are MW/MVAR, angles degrees,
//! shunts and impedances per-unit (the same units a CDF file uses).

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::model::{normalize_tap, BranchRecord, BusRecord, BusType, NetworkModel};
use super::{check_bus_set, IngestError};

#[derive(Serialize, Deserialize)]
struct JsonNetwork {
    #[serde(default)]
    case_name: Option<String>,
    base_mva: f64,
    buses: Vec<JsonBus>,
    branches: Vec<JsonBranch>,
}

#[derive(Serialize, Deserialize)]
struct JsonBus {
    id: u32,
    #[serde(rename = "type")]
    bus_type: JsonBusType,
    #[serde(default = "unity")]
    v_mag: f64,
    #[serde(default)]
    v_ang: f64,
    #[serde(default)]
    p_load: f64,
    #[serde(default)]
    q_load: f64,
    #[serde(default)]
    p_gen: f64,
    #[serde(default)]
    q_gen: f64,
    #[serde(default)]
    g_shunt: f64,
    #[serde(default)]
    b_shunt: f64,
    #[serde(default)]
    base_kv: f64,
}

#[derive(Serialize, Deserialize, Clone, Copy)]
enum JsonBusType {
    #[serde(rename = "pq", alias = "PQ")]
    Pq,
    #[serde(rename = "pv", alias = "PV")]
    Pv,
    #[serde(rename = "slack", alias = "Slack", alias = "SLACK")]
    Slack,
}

#[derive(Serialize, Deserialize)]
struct JsonBranch {
    from: u32,
    to: u32,
    #[serde(default)]
    r: f64,
    x: f64,
    #[serde(default)]
    b: f64,
    #[serde(default)]
    tap: f64,
    #[serde(default)]
    rating_mva: f64,
    #[serde(default)]
    status: Status,
}

#[derive(Serialize, Deserialize, Clone, Copy)]
#[serde(untagged)]
enum Status {
    Flag(bool),
    Code(u8),
}

impl Default for Status {
    fn default() -> Self {
        Status::Flag(true)
    }
}

fn unity() -> f64 {
    1.0
}

impl From<JsonBusType> for BusType {
    fn from(t: JsonBusType) -> Self {
        match t {
            JsonBusType::Pq => BusType::PQ,
            JsonBusType::Pv => BusType::PV,
            JsonBusType::Slack => BusType::Slack,
        }
    }
}

impl From<BusType> for JsonBusType {
    fn from(t: BusType) -> Self {
        match t {
            BusType::PQ => JsonBusType::Pq,
            BusType::PV => JsonBusType::Pv,
            BusType::Slack => JsonBusType::Slack,
        }
    }
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> IngestError {
    IngestError::SchemaError {
        path: path.into(),
        message: message.into(),
    }
}

pub fn parse_json_network(text: &str) -> Result<NetworkModel, IngestError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: JsonNetwork = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        schema(path, e.into_inner().to_string())
    })?;

    let base = raw.base_mva;
    if !(base > 0.0 && base.is_finite()) {
        return Err(schema("base_mva", "must be a positive number"));
    }

    let buses: Vec<BusRecord> = raw
        .buses
        .iter()
        .map(|b| BusRecord {
            id: b.id,
            bus_type: b.bus_type.into(),
            v_mag: b.v_mag,
            v_ang: b.v_ang.to_radians(),
            p_load: b.p_load / base,
            q_load: b.q_load / base,
            p_gen: b.p_gen / base,
            q_gen: b.q_gen / base,
            g_shunt: b.g_shunt,
            b_shunt: b.b_shunt,
            base_kv: b.base_kv,
        })
        .collect();
    check_bus_set(&buses)?;

    let known: HashSet<u32> = buses.iter().map(|b| b.id).collect();
    let mut branches = Vec::with_capacity(raw.branches.len());
    for (i, br) in raw.branches.iter().enumerate() {
        for (key, bus) in [("from", br.from), ("to", br.to)] {
            if !known.contains(&bus) {
                return Err(schema(
                    format!("branches[{i}].{key}"),
                    format!("unknown bus {bus}"),
                ));
            }
        }
        let in_service = match br.status {
            Status::Flag(f) => f,
            Status::Code(0) => false,
            Status::Code(1) => true,
            Status::Code(c) => {
                return Err(schema(
                    format!("branches[{i}].status"),
                    format!("status must be 0 or 1, got {c}"),
                ))
            }
        };
        branches.push(BranchRecord {
            id: i + 1,
            from_bus: br.from,
            to_bus: br.to,
            r: br.r,
            x: br.x,
            b_charging: br.b,
            tap: normalize_tap(br.tap),
            rating_mva: br.rating_mva,
            in_service,
        });
    }

    Ok(NetworkModel {
        case_name: raw.case_name.unwrap_or_else(|| "unnamed case".into()),
        base_mva: base,
        buses,
        branches,
    })
}

/// Writes a model back out in the JSON network format.
pub fn to_json_network(model: &NetworkModel) -> String {
    let base = model.base_mva;
    let doc = JsonNetwork {
        case_name: Some(model.case_name.clone()),
        base_mva: base,
        buses: model
            .buses
            .iter()
            .map(|b| JsonBus {
                id: b.id,
                bus_type: b.bus_type.into(),
                v_mag: b.v_mag,
                v_ang: b.v_ang.to_degrees(),
                p_load: b.p_load * base,
                q_load: b.q_load * base,
                p_gen: b.p_gen * base,
                q_gen: b.q_gen * base,
                g_shunt: b.g_shunt,
                b_shunt: b.b_shunt,
                base_kv: b.base_kv,
            })
            .collect(),
        branches: model
            .branches
            .iter()
            .map(|br| JsonBranch {
                from: br.from_bus,
                to: br.to_bus,
                r: br.r,
                x: br.x,
                b: br.b_charging,
                tap: br.tap,
                rating_mva: br.rating_mva,
                status: Status::Code(u8::from(br.in_service)),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("network serializes")
}
