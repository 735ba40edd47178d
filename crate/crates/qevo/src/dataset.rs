//! Seeded datasets of optimized random target circuits, stored as
//! JSON-lines with the simulated statevector cached per record.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use qevo_core::evolution::{is_trivial, random_circuit};
use qevo_core::rng::{derive_seed, stream};
use qevo_core::{optimize, simulate, Circuit, Complex64, StateVector};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::circuit_json::CircuitJson;
use crate::error::{Error, Result};

/// Redraws allowed per record before generation gives up.
pub const MAX_REDRAWS: usize = 1000;
/// Per-amplitude tolerance when checking cached statevectors on load.
pub const LOAD_TOLERANCE: f64 = 1e-8;
pub const QUBIT_RANGE: std::ops::RangeInclusive<usize> = 4..=8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DatasetSpec {
    pub n_qubits: usize,
    pub count: usize,
    pub depth_min: usize,
    pub depth_max: usize,
    pub seed: u64,
}

impl DatasetSpec {
    /// Depths 5..=15.
    pub fn new(n_qubits: usize, count: usize, seed: u64) -> Self {
        Self {
            n_qubits,
            count,
            depth_min: 5,
            depth_max: 15,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !QUBIT_RANGE.contains(&self.n_qubits) {
            return Err(Error::InvalidInput(format!(
                "dataset qubit count {} outside {}..={}",
                self.n_qubits,
                QUBIT_RANGE.start(),
                QUBIT_RANGE.end()
            )));
        }
        if self.depth_min == 0 || self.depth_min > self.depth_max {
            return Err(Error::InvalidInput(format!(
                "dataset depth range {}..={} must satisfy 1 <= min <= max",
                self.depth_min, self.depth_max
            )));
        }
        Ok(())
    }

    /// Hex digest of the generation parameters. The count is excluded so a
    /// longer dataset extends a shorter one record for record.
    pub fn hash(&self) -> String {
        let canonical = format!(
            "qevo-dataset-v1;n={};depth_min={};depth_max={};seed={}",
            self.n_qubits, self.depth_min, self.depth_max, self.seed
        );
        hex::encode(&Sha256::digest(canonical.as_bytes())[..8])
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub seed: u64,
    pub spec_hash: String,
    pub index: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TargetRecord {
    pub id: String,
    pub circuit: Circuit,
    pub statevector: StateVector,
    pub provenance: Provenance,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RecordJson {
    id: String,
    circuit: CircuitJson,
    statevector: Vec<[f64; 2]>,
    provenance: Provenance,
}

impl TargetRecord {
    pub fn n_qubits(&self) -> usize {
        self.circuit.n_qubits()
    }

    pub fn to_json_line(&self) -> String {
        let json = RecordJson {
            id: self.id.clone(),
            circuit: CircuitJson::from(&self.circuit),
            statevector: self.statevector.amplitudes().iter().map(|a| [a.re, a.im]).collect(),
            provenance: self.provenance.clone(),
        };
        serde_json::to_string(&json).expect("record JSON is serializable")
    }

    /// Checks the circuit against the cached statevector.
    pub fn validate(&self, tolerance: f64) -> Result<()> {
        let fail = |message: String| Error::Validation {
            id: self.id.clone(),
            message,
        };
        let fresh = simulate(&self.circuit).map_err(|e| fail(e.to_string()))?;
        if fresh.dim() != self.statevector.dim() {
            return Err(fail(format!(
                "statevector has {} amplitudes, circuit needs {}",
                self.statevector.dim(),
                fresh.dim()
            )));
        }
        for (i, (a, b)) in fresh.amplitudes().iter().zip(self.statevector.amplitudes()).enumerate() {
            if (a - b).norm() > tolerance {
                return Err(fail(format!("amplitude {i} differs from the simulated state")));
            }
        }
        Ok(())
    }
}

pub fn record_id(spec: &DatasetSpec, index: usize) -> String {
    format!("q{}-s{}-{index:04}", spec.n_qubits, spec.seed)
}

/// Record `index` of the dataset: a random circuit, optimized, redrawn while
/// it is shorter than `depth_min` or trivial.
pub fn generate_target(spec: &DatasetSpec, index: usize) -> Result<TargetRecord> {
    spec.validate()?;
    let mut rng = stream(derive_seed(spec.seed, &[spec.n_qubits as u64, index as u64]));
    for _ in 0..MAX_REDRAWS {
        let circuit = optimize(&random_circuit(spec.n_qubits, spec.depth_min, spec.depth_max, &mut rng));
        if circuit.len() < spec.depth_min || is_trivial(&circuit) {
            continue;
        }
        let statevector = simulate(&circuit)?;
        return Ok(TargetRecord {
            id: record_id(spec, index),
            circuit,
            statevector,
            provenance: Provenance {
                seed: spec.seed,
                spec_hash: spec.hash(),
                index,
            },
        });
    }
    Err(Error::GenerationStalled {
        index,
        attempts: MAX_REDRAWS,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatasetSummary {
    pub count: usize,
    /// Records per circuit depth.
    pub depth_histogram: BTreeMap<usize, usize>,
}

impl DatasetSummary {
    pub fn of(records: &[TargetRecord]) -> Self {
        let mut depth_histogram = BTreeMap::new();
        for r in records {
            *depth_histogram.entry(r.circuit.len()).or_insert(0) += 1;
        }
        Self {
            count: records.len(),
            depth_histogram,
        }
    }
}

pub fn generate_records(spec: &DatasetSpec) -> Result<Vec<TargetRecord>> {
    spec.validate()?;
    (0..spec.count).map(|i| generate_target(spec, i)).collect()
}

pub fn generate_dataset(spec: &DatasetSpec, path: &Path) -> Result<DatasetSummary> {
    let records = generate_records(spec)?;
    write_records(&records, path)?;
    Ok(DatasetSummary::of(&records))
}

pub fn write_records(records: &[TargetRecord], path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for r in records {
        writeln!(out, "{}", r.to_json_line()).map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub records: Vec<TargetRecord>,
    /// SHA-256 of the file bytes.
    pub content_hash: String,
}

fn parse_record(path: &Path, line_no: usize, line: &str) -> Result<TargetRecord> {
    let json: RecordJson = serde_json::from_str(line).map_err(|e| Error::Parse {
        path: path.into(),
        line: line_no,
        message: e.to_string(),
    })?;
    let invalid = |message: String| Error::Validation {
        id: json.id.clone(),
        message,
    };
    let circuit = Circuit::try_from(json.circuit.clone()).map_err(|e| invalid(e.to_string()))?;
    let amps = json
        .statevector
        .iter()
        .map(|&[re, im]| Complex64::new(re, im))
        .collect();
    let statevector = StateVector::from_amplitudes(amps).map_err(|e| invalid(e.to_string()))?;
    Ok(TargetRecord {
        id: json.id,
        circuit,
        statevector,
        provenance: json.provenance,
    })
}

/// Reads and validates every record; the content hash is logged.
pub fn load_dataset(path: &Path) -> Result<Dataset> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let text = String::from_utf8(bytes.clone()).map_err(|e| Error::Parse {
        path: path.into(),
        line: 1 + bytes[..e.utf8_error().valid_up_to()]
            .iter()
            .filter(|&&b| b == b'\n')
            .count(),
        message: "file is not UTF-8".into(),
    })?;
    let mut records = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record = parse_record(path, i + 1, line)?;
        record.validate(LOAD_TOLERANCE)?;
        if !seen.insert(record.id.clone()) {
            return Err(Error::Validation {
                id: record.id,
                message: "duplicate record id".into(),
            });
        }
        records.push(record);
    }
    let content_hash = hex::encode(Sha256::digest(&bytes));
    log::info!(
        "loaded {} records from {} (sha256 {content_hash})",
        records.len(),
        path.display()
    );
    Ok(Dataset { records, content_hash })
}
