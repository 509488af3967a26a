use std::fs;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::atlas::{rotation_group, Atlas, ParabolicParameter};
use crate::error::Result;
use crate::germ::build_germ;
use crate::horn::{compare_invariants, invariant_vector_with, HornOptions, InvariantVector, Normalization, Verdict};
use crate::json::{versioned_value, write_atomic};

pub const SCAN_FORMAT: &str = "rigidity-scan/1";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    pub horn: HornOptions,
    pub tol: f64,
    pub sep: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            horn: HornOptions::default(),
            tol: crate::horn::TOL_COMPARE,
            sep: crate::horn::SEPARATION,
        }
    }
}

/// One germ of the scan: an atlas class member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanEntry {
    pub index: usize,
    pub c: Complex64,
    /// Atlas entry the parameter belongs to.
    pub class: usize,
    /// Position within the rotation class; 0 is the atlas representative.
    pub member: usize,
    pub q: usize,
    pub alpha: Option<Complex64>,
    /// Reason the entry was left out of the comparisons.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quarantined: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub i: usize,
    pub j: usize,
    pub expected: Verdict,
    pub verdict: Verdict,
    pub distance: f64,
    pub witness: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSummary {
    /// `vacuous`, `consistent` or `violations`.
    pub status: String,
    pub pairs: usize,
    pub within_class: usize,
    pub cross_class: usize,
    pub quarantined: usize,
    pub max_within_class_distance: Option<f64>,
    pub min_cross_class_distance: Option<f64>,
    /// Smallest cross-class distance among pairs that agree in petal count
    /// and formal invariant, so only horn and critical-value data separate
    /// them.
    pub min_cross_class_horn_distance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidityScan {
    pub format: String,
    pub atlas_ref: String,
    pub d: u32,
    pub tol: f64,
    pub sep: f64,
    pub entries: Vec<ScanEntry>,
    pub pairs: Vec<PairRecord>,
    pub violations: Vec<PairRecord>,
    pub summary: ScanSummary,
}

impl RigidityScan {
    pub fn has_violations(&self) -> bool {
        !self.violations.is_empty()
    }
}

/// Compare the invariants of every class member of the atlas against every
/// other: members of one rotation class must come out equivalent, members
/// of different classes distinct.
pub fn rigidity_scan(atlas: &Atlas, atlas_ref: &str, options: &ScanOptions) -> RigidityScan {
    let mut params: Vec<(usize, usize, ParabolicParameter)> = Vec::new();
    for (class, entry) in atlas.entries.iter().enumerate() {
        for (member, omega) in rotation_group(atlas.d).into_iter().enumerate() {
            params.push((class, member, entry.rotated(omega)));
        }
    }
    let vectors: Vec<Result<InvariantVector>> = params
        .par_iter()
        .map(|(_, _, param)| {
            let germ = Arc::new(build_germ(param, 2 * param.petal_count + 2)?);
            invariant_vector_with(&germ, &Normalization::zero(germ.q()), &options.horn)
        })
        .collect();
    let entries: Vec<ScanEntry> = params
        .iter()
        .zip(&vectors)
        .enumerate()
        .map(|(index, ((class, member, param), v))| ScanEntry {
            index,
            c: param.c,
            class: *class,
            member: *member,
            q: param.petal_count,
            alpha: v.as_ref().ok().map(|v| v.alpha),
            quarantined: v.as_ref().err().map(|e| e.to_string()),
        })
        .collect();

    let jobs: Vec<(usize, usize)> = (0..params.len())
        .flat_map(|i| (i + 1..params.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| vectors[i].is_ok() && vectors[j].is_ok())
        .collect();
    let pairs: Vec<PairRecord> = jobs
        .par_iter()
        .map(|&(i, j)| {
            let (Ok(a), Ok(b)) = (&vectors[i], &vectors[j]) else {
                unreachable!("filtered above")
            };
            let report = compare_invariants(a, b, options.tol, options.sep);
            let expected = if params[i].0 == params[j].0 {
                Verdict::Equivalent
            } else {
                Verdict::Distinct
            };
            PairRecord {
                i,
                j,
                expected,
                verdict: report.verdict,
                distance: report.distance,
                witness: report.witnesses.first().cloned().unwrap_or_default(),
            }
        })
        .collect();
    let violations: Vec<PairRecord> = pairs.iter().filter(|p| p.verdict != p.expected).cloned().collect();

    let within: Vec<&PairRecord> = pairs.iter().filter(|p| p.expected == Verdict::Equivalent).collect();
    let cross: Vec<&PairRecord> = pairs.iter().filter(|p| p.expected == Verdict::Distinct).collect();
    let max = |it: &mut dyn Iterator<Item = f64>| it.fold(None, |m: Option<f64>, d| Some(m.map_or(d, |m| m.max(d))));
    let min = |it: &mut dyn Iterator<Item = f64>| it.fold(None, |m: Option<f64>, d| Some(m.map_or(d, |m| m.min(d))));
    let same_formal = |p: &PairRecord| {
        let (Ok(a), Ok(b)) = (&vectors[p.i], &vectors[p.j]) else {
            return false;
        };
        a.q == b.q && (a.alpha - b.alpha).norm() <= options.tol
    };
    let quarantined = entries.iter().filter(|e| e.quarantined.is_some()).count();
    let status = if entries.is_empty() {
        "vacuous"
    } else if violations.is_empty() && quarantined == 0 {
        "consistent"
    } else {
        "violations"
    };
    let summary = ScanSummary {
        status: status.to_string(),
        pairs: pairs.len(),
        within_class: within.len(),
        cross_class: cross.len(),
        quarantined,
        max_within_class_distance: max(&mut within.iter().map(|p| p.distance)),
        min_cross_class_distance: min(&mut cross.iter().map(|p| p.distance)),
        min_cross_class_horn_distance: min(&mut cross.iter().filter(|p| same_formal(p)).map(|p| p.distance)),
    };
    RigidityScan {
        format: SCAN_FORMAT.to_string(),
        atlas_ref: atlas_ref.to_string(),
        d: atlas.d,
        tol: options.tol,
        sep: options.sep,
        entries,
        pairs,
        violations,
        summary,
    }
}

pub fn scan_to_json(scan: &RigidityScan) -> Result<String> {
    Ok(serde_json::to_string_pretty(scan)?)
}

pub fn save_scan(scan: &RigidityScan, path: &Path) -> Result<()> {
    write_atomic(path, scan_to_json(scan)?.as_bytes())
}

pub fn load_scan(path: &Path) -> Result<RigidityScan> {
    let value = versioned_value(&fs::read_to_string(path)?, SCAN_FORMAT, "rigidity scan")?;
    Ok(serde_json::from_value(value)?)
}
