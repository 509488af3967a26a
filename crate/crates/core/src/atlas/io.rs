use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{class_of, Atlas, ParabolicKind, ParabolicParameter};
use crate::error::{LabError, Result};
use crate::json::{complex, pair, versioned_value, write_atomic};

pub const ATLAS_FORMAT: &str = "parabolic-atlas/1";

#[derive(Serialize, Deserialize)]
struct AtlasFile {
    format: String,
    d: u32,
    entries: Vec<EntryFile>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    partial: bool,
}

#[derive(Serialize, Deserialize)]
struct EntryFile {
    c: [f64; 2],
    k: usize,
    p: usize,
    q: usize,
    n: usize,
    cycle: Vec<[f64; 2]>,
    z_char: [f64; 2],
    a: [f64; 2],
    petal_count: usize,
    kind: ParabolicKind,
    #[serde(default)]
    class_members: Option<Vec<[f64; 2]>>,
}

pub(crate) fn atlas_to_json(atlas: &Atlas) -> Result<String> {
    let file = AtlasFile {
        format: ATLAS_FORMAT.to_string(),
        d: atlas.d,
        partial: atlas.partial,
        entries: atlas
            .entries
            .iter()
            .map(|e| EntryFile {
                c: pair(e.c),
                k: e.k,
                p: e.p,
                q: e.q,
                n: e.n,
                cycle: e.cycle.iter().copied().map(pair).collect(),
                z_char: pair(e.z_char),
                a: pair(e.a),
                petal_count: e.petal_count,
                kind: e.kind,
                class_members: Some(e.class_members.iter().copied().map(pair).collect()),
            })
            .collect(),
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

pub(crate) fn atlas_from_json(text: &str) -> Result<Atlas> {
    let value = versioned_value(text, ATLAS_FORMAT, "atlas")?;
    let file: AtlasFile = serde_json::from_value(value)?;
    if file.d < 2 {
        return Err(LabError::Parse(format!("degree {} is below 2", file.d)));
    }
    let entries = file
        .entries
        .into_iter()
        .map(|e| {
            let c = complex(e.c);
            ParabolicParameter {
                d: file.d,
                c,
                k: e.k,
                p: e.p,
                q: e.q,
                n: e.n,
                cycle: e.cycle.into_iter().map(complex).collect(),
                z_char: complex(e.z_char),
                a: complex(e.a),
                petal_count: e.petal_count,
                kind: e.kind,
                class_members: e
                    .class_members
                    .map(|m| m.into_iter().map(complex).collect())
                    .unwrap_or_else(|| class_of(file.d, c)),
            }
        })
        .collect();
    Ok(Atlas {
        d: file.d,
        entries,
        partial: file.partial,
    })
}

/// Write the atlas as JSON, atomically: a sibling temp file is renamed over
/// `path`.
pub fn save_atlas(atlas: &Atlas, path: &Path) -> Result<()> {
    let text = atlas_to_json(atlas)?;
    write_atomic(path, text.as_bytes())
}

pub fn load_atlas(path: &Path) -> Result<Atlas> {
    atlas_from_json(&fs::read_to_string(path)?)
}
