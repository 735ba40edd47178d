//! The on-disk circuit format:
//! `{"n_qubits": 2, "ops": [{"gate": "H", "wires": [0]}, ...]}`.

use std::fs;
use std::path::Path;

use qevo_core::{Circuit, GateId, Operation};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperationJson {
    pub gate: String,
    pub wires: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitJson {
    pub n_qubits: usize,
    pub ops: Vec<OperationJson>,
}

impl From<&Circuit> for CircuitJson {
    fn from(c: &Circuit) -> Self {
        Self {
            n_qubits: c.n_qubits(),
            ops: c
                .ops()
                .iter()
                .map(|op| OperationJson {
                    gate: op.gate().name().to_owned(),
                    wires: op.wires().to_vec(),
                })
                .collect(),
        }
    }
}

impl TryFrom<CircuitJson> for Circuit {
    type Error = Error;

    fn try_from(json: CircuitJson) -> Result<Self> {
        let ops = json
            .ops
            .iter()
            .map(|op| {
                let gate: GateId = op
                    .gate
                    .parse()
                    .map_err(|e: qevo_core::gate::UnknownGate| Error::InvalidInput(e.to_string()))?;
                Ok(Operation::new(gate, &op.wires)?)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Circuit::new(json.n_qubits, ops)?)
    }
}

pub fn to_json(circuit: &Circuit) -> String {
    serde_json::to_string(&CircuitJson::from(circuit)).expect("circuit JSON is serializable")
}

pub fn from_json(text: &str) -> Result<Circuit> {
    let json: CircuitJson = serde_json::from_str(text).map_err(|e| Error::Parse {
        path: "<circuit>".into(),
        line: e.line(),
        message: e.to_string(),
    })?;
    json.try_into()
}

pub fn read_circuit(path: &Path) -> Result<Circuit> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_json(&text).map_err(|e| match e {
        Error::Parse { line, message, .. } => Error::Parse {
            path: path.into(),
            line,
            message,
        },
        other => other,
    })
}

pub fn write_circuit(path: &Path, circuit: &Circuit) -> Result<()> {
    fs::write(path, to_json(circuit) + "\n").map_err(|e| Error::io(path, e))
}
