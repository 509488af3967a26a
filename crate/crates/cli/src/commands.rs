use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use parabolic_core::atlas::{class_of, enumerate_atlas, identify_parabolic, load_atlas, save_atlas, ParabolicParameter};
use parabolic_core::conjugacy::{rigidity_scan, save_scan, ScanOptions};
use parabolic_core::germ::{build_germ, model_germ, ModelTag, ParabolicGerm};
use parabolic_core::horn::{
    compare_invariants, invariant_vector_with, invariants_to_json, load_invariants, ConjugacyReport, HornOptions,
    InvariantVector, Normalization, Verdict,
};
use parabolic_core::numerics::UnicriticalMap;
use parabolic_core::render::{render as render_raster, to_csv, to_ppm, PixelStatus, RenderOptions};
use serde::Serialize;

use crate::config::{parse_complex, RunConfig};
use crate::Failure;

pub const COMPARISON_FORMAT: &str = "germ-comparison/1";

fn write(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| Failure::Compute(format!("cannot write {}: {e}", path.display())))
}

fn horn_options(config: &RunConfig) -> HornOptions {
    HornOptions {
        height: config.height,
        samples: config.samples,
        fatou_tol: config.tol_fatou,
        ..HornOptions::default()
    }
}

fn format_complex(z: Complex64) -> String {
    format!("{:.12}{:+.12}i", z.re, z.im)
}

pub fn atlas(config: &RunConfig) -> Result<(), Failure> {
    let (atlas, report) = enumerate_atlas(config.d, config.max_period, config.grid_density, config.tol_atlas)?;
    let path = config.out.clone().unwrap_or_else(|| PathBuf::from("atlas.json"));
    save_atlas(&atlas, &path)?;
    for e in &atlas.entries {
        println!(
            "c = {}  k = {}  p/q = {}/{}  n = {}  petals = {}  kind = {}",
            format_complex(e.c),
            e.k,
            e.p,
            e.q,
            e.n,
            e.petal_count,
            e.kind.name()
        );
    }
    println!("{} classes written to {}", atlas.entries.len(), path.display());
    if atlas.partial {
        for (c, reason) in &report.incomplete {
            eprintln!("incomplete solution at {}: {reason}", format_complex(*c));
        }
        return Err(Failure::Compute("atlas is partial".into()));
    }
    Ok(())
}

enum GermSpec {
    Parameter(ParabolicParameter),
    Model(ModelTag),
    File(PathBuf),
}

impl GermSpec {
    fn describe(&self) -> String {
        match self {
            GermSpec::Parameter(p) => format!("d={} c={}", p.d, format_complex(p.c)),
            GermSpec::Model(tag) => format!("model {}", tag.name()),
            GermSpec::File(path) => path.display().to_string(),
        }
    }
}

fn parameter(config: &RunConfig, c: Complex64) -> Result<ParabolicParameter, Failure> {
    Ok(identify_parabolic(config.d, c, config.max_period, config.tol_param)?)
}

fn parse_spec(config: &RunConfig, text: &str) -> Result<GermSpec, Failure> {
    if let Some(tag) = ModelTag::parse(text) {
        return Ok(GermSpec::Model(tag));
    }
    if Path::new(text).is_file() {
        return Ok(GermSpec::File(PathBuf::from(text)));
    }
    let c = parse_complex(text).map_err(|e| Failure::Usage(format!("germ {text:?}: {e}")))?;
    Ok(GermSpec::Parameter(parameter(config, c)?))
}

fn germ_of(param: &ParabolicParameter) -> Result<Arc<ParabolicGerm>, Failure> {
    Ok(Arc::new(build_germ(param, 2 * param.petal_count + 2)?))
}

fn vector(config: &RunConfig, spec: &GermSpec) -> Result<InvariantVector, Failure> {
    let germ = match spec {
        GermSpec::File(path) => return Ok(load_invariants(path)?),
        GermSpec::Model(tag) => Arc::new(model_germ(*tag)?),
        GermSpec::Parameter(param) => germ_of(param)?,
    };
    Ok(invariant_vector_with(&germ, &Normalization::zero(germ.q()), &horn_options(config))?)
}

pub fn invariants(config: &RunConfig, atlas: Option<&Path>, index: usize) -> Result<(), Failure> {
    let spec = match (&config.model, config.c, atlas) {
        (Some(name), None, None) => {
            GermSpec::Model(ModelTag::parse(name).ok_or_else(|| Failure::Usage(format!("unknown model {name:?}")))?)
        }
        (None, Some(c), None) => GermSpec::Parameter(parameter(config, c)?),
        (None, None, Some(path)) => {
            let atlas = load_atlas(path)?;
            let entry = atlas
                .entries
                .get(index)
                .ok_or_else(|| Failure::Usage(format!("atlas has {} entries, no index {index}", atlas.entries.len())))?;
            GermSpec::Parameter(entry.clone())
        }
        _ => return Err(Failure::Usage("give exactly one of --model, --c, --atlas".into())),
    };
    let v = vector(config, &spec)?;
    let json = invariants_to_json(&v)?;
    match &config.out {
        Some(path) => {
            write(path, json.as_bytes())?;
            println!(
                "{}: q = {}  alpha = {}  blocks = {}  written to {}",
                spec.describe(),
                v.q,
                format_complex(v.alpha),
                v.gates.len(),
                path.display()
            );
        }
        None => println!("{json}"),
    }
    Ok(())
}

#[derive(Serialize)]
struct GermSummary {
    spec: String,
    q: usize,
    alpha: Complex64,
}

#[derive(Serialize)]
struct Comparison {
    format: &'static str,
    first: GermSummary,
    second: GermSummary,
    #[serde(flatten)]
    report: ConjugacyReport,
    /// Verdict implied by the rotation symmetry, for two parameters of the
    /// same degree.
    expected: Option<Verdict>,
    violation: bool,
}

pub fn compare(config: &RunConfig, first: &str, second: &str) -> Result<(), Failure> {
    let a = parse_spec(config, first)?;
    let b = parse_spec(config, second)?;
    let (va, vb) = rayon::join(|| vector(config, &a), || vector(config, &b));
    let (va, vb) = (va?, vb?);
    let report = compare_invariants(&va, &vb, config.tol_compare, config.sep);
    let expected = match (&a, &b) {
        (GermSpec::Parameter(p1), GermSpec::Parameter(p2)) if p1.d == p2.d => {
            let same_class = class_of(p1.d, p1.c).iter().any(|m| (m - p2.c).norm() <= config.tol_param);
            Some(if same_class { Verdict::Equivalent } else { Verdict::Distinct })
        }
        _ => None,
    };
    let violation = expected.is_some_and(|e| e != report.verdict);
    let summary = format!(
        "{} vs {}: {} (distance {:e}){}",
        a.describe(),
        b.describe(),
        report.verdict.name(),
        report.distance,
        if violation { "  VIOLATION" } else { "" }
    );
    let out = Comparison {
        format: COMPARISON_FORMAT,
        first: GermSummary {
            spec: a.describe(),
            q: va.q,
            alpha: va.alpha,
        },
        second: GermSummary {
            spec: b.describe(),
            q: vb.q,
            alpha: vb.alpha,
        },
        report,
        expected,
        violation,
    };
    let json = serde_json::to_string_pretty(&out).map_err(|e| Failure::Compute(e.to_string()))?;
    match &config.out {
        Some(path) => {
            write(path, json.as_bytes())?;
            println!("{summary}");
        }
        None => {
            println!("{json}");
            eprintln!("{summary}");
        }
    }
    if violation {
        return Err(Failure::Compute("verdict differs from the expected one".into()));
    }
    Ok(())
}

pub fn rigidity(config: &RunConfig, atlas_path: &Path) -> Result<(), Failure> {
    let atlas = load_atlas(atlas_path)?;
    let options = ScanOptions {
        horn: horn_options(config),
        tol: config.tol_compare,
        sep: config.sep,
    };
    let scan = rigidity_scan(&atlas, &atlas_path.display().to_string(), &options);
    let path = config.out.clone().unwrap_or_else(|| PathBuf::from("rigidity.json"));
    save_scan(&scan, &path)?;
    let s = &scan.summary;
    let show = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:e}"));
    println!(
        "{} germs, {} pairs ({} within class, {} across), {} quarantined",
        scan.entries.len(),
        s.pairs,
        s.within_class,
        s.cross_class,
        s.quarantined
    );
    println!(
        "max within-class distance {}  min cross-class distance {}  min cross-class horn distance {}",
        show(s.max_within_class_distance),
        show(s.min_cross_class_distance),
        show(s.min_cross_class_horn_distance)
    );
    for e in scan.entries.iter().filter(|e| e.quarantined.is_some()) {
        eprintln!("quarantined {}: {}", format_complex(e.c), e.quarantined.as_deref().unwrap_or(""));
    }
    for v in &scan.violations {
        eprintln!("violation {} vs {}: expected {}, got {} ({:e})", v.i, v.j, v.expected.name(), v.verdict.name(), v.distance);
    }
    println!("status {} written to {}", s.status, path.display());
    if s.status == "violations" {
        return Err(Failure::Compute(format!(
            "{} violations, {} quarantined",
            scan.violations.len(),
            s.quarantined
        )));
    }
    Ok(())
}

pub fn render(config: &RunConfig) -> Result<(), Failure> {
    let c = config.c.ok_or_else(|| Failure::Usage("render needs --c".into()))?;
    let map = UnicriticalMap::new(config.d, c)?;
    let germ = match identify_parabolic(config.d, c, config.max_period, config.tol_param) {
        Ok(param) => Some(build_germ(&param, 2 * param.petal_count + 2)?),
        Err(e) => {
            eprintln!("no petal classification: {e}");
            None
        }
    };
    let options = RenderOptions {
        window: config.window,
        resolution: config.res,
        max_iter: config.max_iter,
    };
    let raster = render_raster(&map, germ.as_ref(), &options)?;
    let prefix = config.out.clone().unwrap_or_else(|| PathBuf::from("render"));
    let ppm = prefix.with_extension("ppm");
    let csv = prefix.with_extension("csv");
    write(&ppm, &to_ppm(&raster, config.max_iter))?;
    write(&csv, to_csv(&raster).as_bytes())?;
    let count = |s: PixelStatus| raster.pixels.iter().filter(|p| p.status == s).count();
    println!(
        "{}x{}: {} escaped, {} in petals, {} bounded; wrote {} and {}",
        raster.width,
        raster.height,
        count(PixelStatus::Escaped),
        count(PixelStatus::Petal),
        count(PixelStatus::Bounded),
        ppm.display(),
        csv.display()
    );
    Ok(())
}
