//! IEEE Common Data Format reader.
//!
//! Records are read by the fixed column layout of the 1973 exchange format.
//! Circulating copies of the standard cases often drift in padding, so a
//! record whose columns do not parse is re-read by whitespace tokens instead;
//! the field order is the same either way.

use std::collections::HashSet;

use super::model::{normalize_tap, BranchRecord, BusRecord, BusType, NetworkModel};
use super::{check_bus_set, IngestError};

const BUS_HEADER: &str = "BUS DATA FOLLOWS";
const BRANCH_HEADER: &str = "BRANCH DATA FOLLOWS";
const SECTION_END: &str = "-999";

/// Bus fields kept in the model, in record order after the name.
struct RawBus {
    id: u32,
    kind: i64,
    v_mag: f64,
    v_ang_deg: f64,
    p_load: f64,
    q_load: f64,
    p_gen: f64,
    q_gen: f64,
    base_kv: f64,
    g_shunt: f64,
    b_shunt: f64,
}

struct RawBranch {
    from: u32,
    to: u32,
    r: f64,
    x: f64,
    b: f64,
    rating: f64,
    ratio: f64,
}

pub fn parse_cdf(text: &str) -> Result<NetworkModel, IngestError> {
    let lines: Vec<&str> = text.lines().collect();
    let title = lines
        .iter()
        .find(|l| !l.trim().is_empty())
        .ok_or_else(|| IngestError::MissingSection("title card".into()))?;
    let base_mva = parse_base_mva(title)?;
    let case_name = title
        .get(45..)
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .unwrap_or("unnamed case")
        .to_string();

    let bus_lines = section(&lines, BUS_HEADER, "BUS DATA")?;
    let branch_lines = section(&lines, BRANCH_HEADER, "BRANCH DATA")?;

    let mut buses = Vec::with_capacity(bus_lines.len());
    for (lineno, line) in bus_lines {
        let raw = parse_bus_columns(line)
            .or_else(|| parse_bus_tokens(line))
            .ok_or_else(|| diagnose_bus(lineno, line))?;
        let bus_type = match raw.kind {
            0 | 1 => BusType::PQ,
            2 => BusType::PV,
            3 => BusType::Slack,
            other => {
                return Err(IngestError::MalformedRecord {
                    line: lineno,
                    field: "bus type".into(),
                    reason: format!("unknown CDF bus type {other}"),
                })
            }
        };
        buses.push(BusRecord {
            id: raw.id,
            bus_type,
            v_mag: raw.v_mag,
            v_ang: raw.v_ang_deg.to_radians(),
            p_load: raw.p_load / base_mva,
            q_load: raw.q_load / base_mva,
            p_gen: raw.p_gen / base_mva,
            q_gen: raw.q_gen / base_mva,
            g_shunt: raw.g_shunt,
            b_shunt: raw.b_shunt,
            base_kv: raw.base_kv,
        });
    }
    check_bus_set(&buses)?;

    let known: HashSet<u32> = buses.iter().map(|b| b.id).collect();
    let mut branches = Vec::with_capacity(branch_lines.len());
    for (ordinal, (lineno, line)) in branch_lines.into_iter().enumerate() {
        let raw = parse_branch_columns(line)
            .or_else(|| parse_branch_tokens(line))
            .ok_or_else(|| IngestError::MalformedRecord {
                line: lineno,
                field: "branch record".into(),
                reason: "expected at least 15 numeric fields".into(),
            })?;
        for (field, bus) in [("tap bus", raw.from), ("z bus", raw.to)] {
            if !known.contains(&bus) {
                return Err(IngestError::MalformedRecord {
                    line: lineno,
                    field: field.into(),
                    reason: format!("unknown bus {bus}"),
                });
            }
        }
        branches.push(BranchRecord {
            id: ordinal + 1,
            from_bus: raw.from,
            to_bus: raw.to,
            r: raw.r,
            x: raw.x,
            b_charging: raw.b,
            tap: normalize_tap(raw.ratio),
            rating_mva: raw.rating,
            in_service: true,
        });
    }

    Ok(NetworkModel {
        case_name,
        base_mva,
        buses,
        branches,
    })
}

fn parse_base_mva(title: &str) -> Result<f64, IngestError> {
    let columnar = title
        .get(31..37)
        .and_then(|s| s.trim().parse::<f64>().ok())
        .filter(|v| *v > 0.0);
    let value = columnar.or_else(|| {
        // date and originator come first; the base is the first decimal token
        title
            .split_whitespace()
            .skip(1)
            .filter(|t| t.contains('.'))
            .find_map(|t| t.parse::<f64>().ok())
    });
    match value {
        Some(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(IngestError::MalformedRecord {
            line: 1,
            field: "MVA base".into(),
            reason: "title card carries no positive MVA base".into(),
        }),
    }
}

/// Returns the (1-based line number, text) of every record in a section.
fn section<'a>(
    lines: &[&'a str],
    header: &str,
    label: &str,
) -> Result<Vec<(usize, &'a str)>, IngestError> {
    let start = lines
        .iter()
        .position(|l| l.trim_start().starts_with(header))
        .ok_or_else(|| IngestError::MissingSection(label.into()))?;
    let mut records = Vec::new();
    for (offset, line) in lines[start + 1..].iter().enumerate() {
        let trimmed = line.trim();
        if trimmed.starts_with(SECTION_END) {
            return Ok(records);
        }
        if !trimmed.is_empty() {
            records.push((start + offset + 2, *line));
        }
    }
    Err(IngestError::MissingSection(format!(
        "{label} terminator ({SECTION_END})"
    )))
}

/// 1-based inclusive column slice, trimmed. `None` past the end of line.
fn cols(line: &str, first: usize, last: usize) -> Option<&str> {
    if !line.is_ascii() || line.len() < first {
        return None;
    }
    let end = last.min(line.len());
    Some(line[first - 1..end].trim())
}

fn num(line: &str, first: usize, last: usize) -> Option<f64> {
    cols(line, first, last)?
        .parse()
        .ok()
        .filter(|v: &f64| v.is_finite())
}

fn int(line: &str, first: usize, last: usize) -> Option<i64> {
    cols(line, first, last)?.parse().ok()
}

fn parse_bus_columns(line: &str) -> Option<RawBus> {
    if line.len() < 122 {
        return None;
    }
    let kind = int(line, 25, 26)?;
    let v_mag = num(line, 28, 33)?;
    if !(0..=3).contains(&kind) || v_mag <= 0.0 {
        return None;
    }
    Some(RawBus {
        id: u32::try_from(int(line, 1, 4)?).ok()?,
        kind,
        v_mag,
        v_ang_deg: num(line, 34, 40)?,
        p_load: num(line, 41, 49)?,
        q_load: num(line, 50, 58)?,
        p_gen: num(line, 59, 67)?,
        q_gen: num(line, 68, 75)?,
        base_kv: num(line, 77, 83)?,
        g_shunt: num(line, 107, 114)?,
        b_shunt: num(line, 115, 122)?,
    })
}

/// Token fallback. The name can hold any number of words, so the numeric
/// fields are taken from the end of the record: 16 when the remote-bus
/// number is present, else 15.
fn parse_bus_tokens(line: &str) -> Option<RawBus> {
    let tokens: Vec<&str> = line.split_whitespace().collect();
    let id: u32 = tokens.first()?.parse().ok()?;
    [16usize, 15].into_iter().find_map(|tail| {
        if tokens.len() < tail + 1 {
            return None;
        }
        let fields: Option<Vec<f64>> = tokens[tokens.len() - tail..]
            .iter()
            .map(|t| t.parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect();
        let f = fields?;
        // area, zone, type are integers
        if f[..3].iter().any(|v| v.fract() != 0.0) || !(0.0..=3.0).contains(&f[2]) {
            return None;
        }
        Some(RawBus {
            id,
            kind: f[2] as i64,
            v_mag: f[3],
            v_ang_deg: f[4],
            p_load: f[5],
            q_load: f[6],
            p_gen: f[7],
            q_gen: f[8],
            base_kv: f[9],
            g_shunt: f[13],
            b_shunt: f[14],
        })
    })
}

fn diagnose_bus(lineno: usize, line: &str) -> IngestError {
    let field = if line
        .split_whitespace()
        .next()
        .and_then(|t| t.parse::<u32>().ok())
        .is_none()
    {
        "bus number"
    } else {
        "bus record"
    };
    IngestError::MalformedRecord {
        line: lineno,
        field: field.into(),
        reason: "record matches neither the column layout nor the token layout".into(),
    }
}

fn parse_branch_columns(line: &str) -> Option<RawBranch> {
    if line.len() < 82 {
        return None;
    }
    Some(RawBranch {
        from: u32::try_from(int(line, 1, 4)?).ok()?,
        to: u32::try_from(int(line, 6, 9)?).ok()?,
        r: num(line, 20, 29)?,
        x: num(line, 30, 40)?,
        b: num(line, 41, 50)?,
        rating: num(line, 51, 55)?,
        ratio: num(line, 77, 82)?,
    })
}

fn parse_branch_tokens(line: &str) -> Option<RawBranch> {
    let t: Vec<&str> = line.split_whitespace().collect();
    if t.len() < 15 {
        return None;
    }
    let f = |i: usize| t[i].parse::<f64>().ok().filter(|v| v.is_finite());
    Some(RawBranch {
        from: t[0].parse().ok()?,
        to: t[1].parse().ok()?,
        r: f(6)?,
        x: f(7)?,
        b: f(8)?,
        rating: f(9)?,
        ratio: f(14)?,
    })
}
