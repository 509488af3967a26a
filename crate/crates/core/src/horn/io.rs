use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{End, HornMapData, InvariantVector, Normalization};
use crate::error::{LabError, Result};
use crate::json::{complex, pair, versioned_value, write_atomic};

pub const INVARIANTS_FORMAT: &str = "germ-invariants/1";

#[derive(Serialize, Deserialize)]
struct InvariantFile {
    format: String,
    q: usize,
    alpha: [f64; 2],
    #[serde(default)]
    source: String,
    gates: Vec<GateFile>,
    critical_values: Vec<Option<[f64; 2]>>,
    normalization: NormalizationFile,
}

#[derive(Serialize, Deserialize)]
struct GateFile {
    i: usize,
    end: End,
    #[serde(rename = "M")]
    height: f64,
    #[serde(rename = "K")]
    samples: usize,
    fourier: Vec<[f64; 2]>,
    #[serde(default)]
    periodicity_residual: f64,
    #[serde(default = "yes")]
    decay_ok: bool,
}

fn yes() -> bool {
    true
}

#[derive(Serialize, Deserialize)]
struct NormalizationFile {
    attracting: Vec<[f64; 2]>,
    repelling: Vec<[f64; 2]>,
}

pub fn invariants_to_json(vector: &InvariantVector) -> Result<String> {
    let file = InvariantFile {
        format: INVARIANTS_FORMAT.to_string(),
        q: vector.q,
        alpha: pair(vector.alpha),
        source: vector.source.clone(),
        gates: vector
            .gates
            .iter()
            .map(|g| GateFile {
                i: g.gate,
                end: g.end,
                height: g.height,
                samples: g.samples,
                fourier: g.fourier.iter().copied().map(pair).collect(),
                periodicity_residual: g.periodicity_residual,
                decay_ok: g.decay_ok,
            })
            .collect(),
        critical_values: vector.critical_values.iter().map(|v| v.map(pair)).collect(),
        normalization: NormalizationFile {
            attracting: vector.normalization.attracting.iter().copied().map(pair).collect(),
            repelling: vector.normalization.repelling.iter().copied().map(pair).collect(),
        },
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

pub fn invariants_from_json(text: &str) -> Result<InvariantVector> {
    let value = versioned_value(text, INVARIANTS_FORMAT, "invariants")?;
    let file: InvariantFile = serde_json::from_value(value)?;
    for g in &file.gates {
        if g.fourier.len() != g.samples {
            return Err(LabError::Parse(format!(
                "gate {} has {} coefficients for K = {}",
                g.i,
                g.fourier.len(),
                g.samples
            )));
        }
    }
    Ok(InvariantVector {
        q: file.q,
        alpha: complex(file.alpha),
        source: file.source,
        gates: file
            .gates
            .into_iter()
            .map(|g| HornMapData {
                gate: g.i,
                end: g.end,
                height: g.height,
                samples: g.samples,
                fourier: g.fourier.into_iter().map(complex).collect(),
                periodicity_residual: g.periodicity_residual,
                decay_ok: g.decay_ok,
            })
            .collect(),
        critical_values: file.critical_values.into_iter().map(|v| v.map(complex)).collect(),
        normalization: Normalization {
            attracting: file.normalization.attracting.into_iter().map(complex).collect(),
            repelling: file.normalization.repelling.into_iter().map(complex).collect(),
        },
    })
}

pub fn save_invariants(vector: &InvariantVector, path: &Path) -> Result<()> {
    write_atomic(path, invariants_to_json(vector)?.as_bytes())
}

pub fn load_invariants(path: &Path) -> Result<InvariantVector> {
    invariants_from_json(&fs::read_to_string(path)?)
}
