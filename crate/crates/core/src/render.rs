//! Dynamical-plane rasters: escape time, plus the parabolic petal through
//! which bounded orbits are attracted.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::fatou::ENTRY_RADIUS;
use crate::germ::ParabolicGerm;
use crate::numerics::UnicriticalMap;
use crate::Complex64;

pub const MAX_RESOLUTION: usize = 4096;
pub const DEFAULT_MAX_ITER: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PixelStatus {
    Escaped,
    /// Entered an attracting petal of the characteristic point.
    Petal,
    /// Neither escaped nor entered a petal within the iteration cap.
    Bounded,
}

impl PixelStatus {
    pub fn name(self) -> &'static str {
        match self {
            PixelStatus::Escaped => "escaped",
            PixelStatus::Petal => "petal",
            PixelStatus::Bounded => "bounded",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pixel {
    pub x: f64,
    pub y: f64,
    pub status: PixelStatus,
    /// `-1` unless the status is `Petal`.
    pub petal: i64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderOptions {
    /// `[x0, y0, x1, y1]`
    pub window: [f64; 4],
    pub resolution: usize,
    pub max_iter: usize,
}

impl RenderOptions {
    pub fn validate(&self) -> Result<()> {
        let [x0, y0, x1, y1] = self.window;
        if !self.window.iter().all(|v| v.is_finite()) || x1 <= x0 || y1 <= y0 {
            return Err(LabError::InvalidInput(format!("bad window {:?}", self.window)));
        }
        if self.resolution == 0 || self.resolution > MAX_RESOLUTION {
            return Err(LabError::InvalidInput(format!(
                "resolution must be in 1..={MAX_RESOLUTION}, got {}",
                self.resolution
            )));
        }
        if self.max_iter == 0 {
            return Err(LabError::InvalidInput("iteration cap must be positive".into()));
        }
        Ok(())
    }
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            window: [-2.0, -2.0, 2.0, 2.0],
            resolution: 256,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

/// Pixels in row-major order, top row first.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<Pixel>,
}

/// Classify the pixel centers of the window. With a germ, a bounded orbit
/// is labelled by the attracting petal of the germ's base point it first
/// enters under `f`.
pub fn render(map: &UnicriticalMap, germ: Option<&ParabolicGerm>, options: &RenderOptions) -> Result<Raster> {
    options.validate()?;
    let n = options.resolution;
    let [x0, y0, x1, y1] = options.window;
    let (dx, dy) = ((x1 - x0) / n as f64, (y1 - y0) / n as f64);
    let pixels = (0..n * n)
        .into_par_iter()
        .map(|index| {
            let (row, col) = (index / n, index % n);
            let x = x0 + (col as f64 + 0.5) * dx;
            let y = y1 - (row as f64 + 0.5) * dy;
            classify(map, germ, Complex64::new(x, y), options.max_iter)
        })
        .collect();
    Ok(Raster {
        width: n,
        height: n,
        pixels,
    })
}

fn classify(map: &UnicriticalMap, germ: Option<&ParabolicGerm>, z: Complex64, max_iter: usize) -> Pixel {
    let radius = map.escape_radius();
    let mut x = z;
    let pixel = |status, petal, iterations| Pixel {
        x: z.re,
        y: z.im,
        status,
        petal,
        iterations,
    };
    for m in 0..=max_iter {
        if x.norm() > radius {
            return pixel(PixelStatus::Escaped, -1, m);
        }
        if let Some(g) = germ {
            if x != g.z0() && g.w_chart(x).re > ENTRY_RADIUS {
                return pixel(PixelStatus::Petal, g.nearest_attracting(x) as i64, m);
            }
        }
        x = map.eval(x);
    }
    pixel(PixelStatus::Bounded, -1, max_iter)
}

const PETAL_COLORS: [[u8; 3]; 6] = [
    [220, 80, 60],
    [60, 140, 220],
    [90, 190, 90],
    [230, 190, 50],
    [170, 90, 200],
    [60, 200, 200],
];

fn color(p: &Pixel, max_iter: usize) -> [u8; 3] {
    match p.status {
        PixelStatus::Bounded => [0, 0, 0],
        PixelStatus::Escaped => {
            let level = 255 - (255 * p.iterations.min(64) / 64) as u8;
            [level, level, level]
        }
        PixelStatus::Petal => {
            let base = PETAL_COLORS[p.petal as usize % PETAL_COLORS.len()];
            // darker towards long entry times
            let shade = 1.0 - 0.6 * (p.iterations as f64 / max_iter as f64).sqrt();
            base.map(|v| (v as f64 * shade).round() as u8)
        }
    }
}

/// Binary portable pixmap.
pub fn to_ppm(raster: &Raster, max_iter: usize) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", raster.width, raster.height).into_bytes();
    out.reserve(3 * raster.pixels.len());
    for p in &raster.pixels {
        out.extend_from_slice(&color(p, max_iter));
    }
    out
}

pub fn to_csv(raster: &Raster) -> String {
    let mut out = String::with_capacity(40 * raster.pixels.len());
    out.push_str("x,y,status,petal_index,iterations\n");
    for p in &raster.pixels {
        let _ = writeln!(out, "{},{},{},{},{}", p.x, p.y, p.status.name(), p.petal, p.iterations);
    }
    out
}
