//! Reader for the subset of the MATPOWER `.m` case format used by
//! distribution feeders: `mpc.baseMVA`, `mpc.bus` and `mpc.branch`.
//!
//! Bus columns consumed: `bus_i`, `type`, `Pd`, `Qd`, `Vm` (slack only) and
//! `baseKV` (ohm conversion only). Branch columns consumed: `fbus`, `tbus`,
//! `r`, `x`. Everything else, including `mpc.gen`, is ignored.
//!
//! Several feeder cases (`case33bw` among them) list impedances in ohms and
//! convert them at the end of the file with
//! `mpc.branch(:, [BR_R BR_X]) = mpc.branch(:, [BR_R BR_X]) / (Vbase^2 / Sbase);`.
//! That statement is recognised and applied, with `Vbase` taken from the
//! `baseKV` column of the first bus.

use super::case::{Branch, Bus, NetworkCase};
use crate::error::{Error, Result};

const SLACK_TYPE: f64 = 3.0;

struct Row {
    line: usize,
    values: Vec<f64>,
}

pub fn parse_matpower_case(text: &str) -> Result<NetworkCase> {
    let mut base_mva = None;
    let mut bus_rows = None;
    let mut branch_rows = None;
    let mut ohm_impedances = false;

    let lines: Vec<&str> = text.lines().map(strip_comment).collect();
    let mut k = 0;
    while k < lines.len() {
        let line_no = k + 1;
        let Some((lhs, rhs)) = lines[k].split_once('=') else {
            k += 1;
            continue;
        };
        let lhs = lhs.trim();
        match lhs {
            "mpc.baseMVA" => {
                let value = rhs.trim().trim_end_matches(';').trim();
                base_mva = Some(
                    value
                        .parse::<f64>()
                        .map_err(|_| Error::parse(line_no, format!("bad baseMVA value '{value}'")))?,
                );
                k += 1;
            }
            "mpc.bus" | "mpc.branch" => {
                let (rows, next) = read_matrix(&lines, k, rhs)?;
                if lhs == "mpc.bus" {
                    bus_rows = Some(rows);
                } else {
                    branch_rows = Some(rows);
                }
                k = next;
            }
            _ => {
                let compact: String = lines[k].chars().filter(|c| !c.is_whitespace()).collect();
                if compact.starts_with("mpc.branch(:,[BR_RBR_X])") && compact.contains("/(Vbase^2/Sbase)") {
                    ohm_impedances = true;
                }
                k += 1;
            }
        }
    }

    let base_mva = base_mva.ok_or_else(|| Error::parse(0, "missing mpc.baseMVA"))?;
    let bus_rows = bus_rows.ok_or_else(|| Error::parse(0, "missing mpc.bus block"))?;
    let branch_rows = branch_rows.ok_or_else(|| Error::parse(0, "missing mpc.branch block"))?;
    if bus_rows.is_empty() {
        return Err(Error::parse(0, "mpc.bus block is empty"));
    }

    let mut slack = None;
    let mut nominal_voltage = 1.0;
    let mut buses = Vec::with_capacity(bus_rows.len());
    for row in &bus_rows {
        if row.values.len() < 4 {
            return Err(Error::parse(row.line, format!("bus row has {} columns, need at least 4", row.values.len())));
        }
        let id = as_id(row.values[0], row.line)?;
        if row.values[1] == SLACK_TYPE {
            if let Some(prev) = slack {
                return Err(Error::Structure(format!("multiple slack buses ({prev} and {id})")));
            }
            slack = Some(id);
            if let Some(&vm) = row.values.get(7) {
                if vm > 0.0 {
                    nominal_voltage = vm;
                }
            }
        }
        buses.push(Bus {
            id,
            p_nominal: -row.values[2] / base_mva,
            q_nominal: -row.values[3] / base_mva,
        });
    }
    let slack = slack.ok_or_else(|| Error::Structure("no slack bus (type 3) in mpc.bus".into()))?;

    let z_base = if ohm_impedances {
        let kv = bus_rows[0]
            .values
            .get(9)
            .copied()
            .filter(|v| *v > 0.0)
            .ok_or_else(|| Error::parse(bus_rows[0].line, "ohm conversion needs baseKV on the first bus"))?;
        kv * kv / base_mva
    } else {
        1.0
    };

    let branches = branch_rows
        .iter()
        .map(|row| {
            if row.values.len() < 4 {
                return Err(Error::parse(
                    row.line,
                    format!("branch row has {} columns, need at least 4", row.values.len()),
                ));
            }
            Ok(Branch {
                from: as_id(row.values[0], row.line)?,
                to: as_id(row.values[1], row.line)?,
                r: row.values[2] / z_base,
                x: row.values[3] / z_base,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    NetworkCase::new(base_mva, nominal_voltage, slack, buses, branches)
}

fn strip_comment(line: &str) -> &str {
    match line.find('%') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn as_id(v: f64, line: usize) -> Result<usize> {
    if v >= 0.0 && v.fract() == 0.0 && v < 1e15 {
        Ok(v as usize)
    } else {
        Err(Error::parse(line, format!("bus id {v} is not a non-negative integer")))
    }
}

/// Reads a `[ ... ];` block starting on line `start`. Returns the rows and
/// the index of the first line after the block.
fn read_matrix(lines: &[&str], start: usize, rhs: &str) -> Result<(Vec<Row>, usize)> {
    let Some(open) = rhs.find('[') else {
        return Err(Error::parse(start + 1, "expected '[' to open matrix"));
    };
    let mut rows = Vec::new();
    let mut k = start;
    let mut chunk = &rhs[open + 1..];
    loop {
        let (body, closed) = match chunk.find(']') {
            Some(i) => (&chunk[..i], true),
            None => (chunk, false),
        };
        for piece in body.split(';') {
            let mut values = Vec::new();
            for tok in piece.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()) {
                let v = tok
                    .parse::<f64>()
                    .map_err(|_| Error::parse(k + 1, format!("non-numeric entry '{tok}'")))?;
                values.push(v);
            }
            if !values.is_empty() {
                rows.push(Row { line: k + 1, values });
            }
        }
        if closed {
            return Ok((rows, k + 1));
        }
        k += 1;
        if k >= lines.len() {
            return Err(Error::parse(start + 1, "matrix block is never closed with ']'"));
        }
        chunk = lines[k];
    }
}
