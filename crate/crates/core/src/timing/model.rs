// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

use super::TimingError;
use crate::netlist::{ElaboratedCircuit, GateKind};
use crate::Time;

/// Per-gate-kind propagation delays and register timing, all in picoseconds.
///
/// The XOR entry doubles as the delay of the mode gate a switchable register
/// puts on its clock path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DelayModel {
    pub gates: BTreeMap<GateKind, Time>,
    pub t_c2q: Time,
    pub t_setup: Time,
    pub t_hold: Time,
}

impl Default for DelayModel {
    /// The model shipped as `kit/default.json`.
    fn default() -> Self {
        let gates = [
            (GateKind::Xor, 20),
            (GateKind::And, 15),
            (GateKind::Or, 15),
            (GateKind::Not, 8),
            (GateKind::Buf, 5),
            (GateKind::Nand, 12),
            (GateKind::Nor, 12),
            (GateKind::Xnor, 22),
        ];
        DelayModel {
            gates: gates.into_iter().collect(),
            t_c2q: 100,
            t_setup: 50,
            t_hold: 30,
        }
    }
}

impl DelayModel {
    pub fn gate(&self, kind: GateKind) -> Result<Time, TimingError> {
        self.gates
            .get(&kind)
            .copied()
            .ok_or(TimingError::MissingDelay(kind))
    }

    /// Delay of every gate of `circuit`, indexed by gate id.
    pub fn resolve(&self, circuit: &ElaboratedCircuit) -> Result<Vec<Time>, TimingError> {
        circuit.gates.iter().map(|g| self.gate(g.kind)).collect()
    }

    pub fn with_gate(mut self, kind: GateKind, delay: Time) -> Self {
        self.gates.insert(kind, delay);
        self
    }

    /// Serializes to the same schema [`load_delay_model`] reads.
    pub fn to_json(&self) -> Value {
        let gates: serde_json::Map<String, Value> = self
            .gates
            .iter()
            .map(|(k, v)| (k.name().to_string(), Value::from(*v)))
            .collect();
        serde_json::json!({
            "gates": gates,
            "register": {
                "t_c2q": self.t_c2q,
                "t_setup": self.t_setup,
                "t_hold": self.t_hold,
            }
        })
    }
}

fn non_negative(v: &Value, what: &str) -> Result<Time, TimingError> {
    if let Some(u) = v.as_u64() {
        return Ok(u);
    }
    match v.as_i64() {
        Some(_) => Err(TimingError::NegativeDelay(what.to_string())),
        None => Err(TimingError::BadModel(format!(
            "`{what}` must be a non-negative integer number of ps"
        ))),
    }
}

/// Reads `{"gates": {KIND: ps, ...}, "register": {"t_c2q", "t_setup", "t_hold"}}`.
///
/// Gate kinds may be omitted; a circuit that uses a missing kind is rejected
/// when it is analyzed or simulated.
pub fn load_delay_model(doc: &Value) -> Result<DelayModel, TimingError> {
    let obj = doc
        .as_object()
        .ok_or_else(|| TimingError::BadModel("delay model must be a JSON object".into()))?;
    let gates_v = obj
        .get("gates")
        .ok_or_else(|| TimingError::MissingKey("gates".into()))?;
    let reg_v = obj
        .get("register")
        .ok_or_else(|| TimingError::MissingKey("register".into()))?;

    let gates_obj = gates_v
        .as_object()
        .ok_or_else(|| TimingError::BadModel("`gates` must be an object".into()))?;
    let mut gates = BTreeMap::new();
    for (k, v) in gates_obj {
        let kind: GateKind = k
            .parse()
            .map_err(|_| TimingError::BadModel(format!("unknown gate kind `{k}`")))?;
        gates.insert(kind, non_negative(v, k)?);
    }

    let reg = reg_v
        .as_object()
        .ok_or_else(|| TimingError::BadModel("`register` must be an object".into()))?;
    let field = |name: &str| -> Result<Time, TimingError> {
        let v = reg
            .get(name)
            .ok_or_else(|| TimingError::MissingKey(format!("register.{name}")))?;
        non_negative(v, name)
    };
    let t_c2q = field("t_c2q")?;
    if t_c2q < 1 {
        return Err(TimingError::ZeroClockToQ);
    }
    Ok(DelayModel {
        gates,
        t_c2q,
        t_setup: field("t_setup")?,
        t_hold: field("t_hold")?,
    })
}
