//! Lossy PNG renderings for reports: field intensity and phase, phase-layer
//! maps, matrix heat maps and truth-table bar charts.

use image::codecs::png::PngEncoder;
use image::{ImageEncoder, Rgb, RgbImage};
use nalgebra::DMatrix;

use crate::error::Result;
use crate::optics::{Field, PhaseLayer};
use crate::Real;

// perceptually ordered dark-to-bright stops
const SEQUENTIAL: [[f64; 3]; 5] =
    [[68.0, 1.0, 84.0], [59.0, 82.0, 139.0], [33.0, 145.0, 140.0], [94.0, 201.0, 98.0], [253.0, 231.0, 37.0]];

fn lerp_stops(stops: &[[f64; 3]], t: f64) -> Rgb<u8> {
    let t = t.clamp(0.0, 1.0) * (stops.len() - 1) as f64;
    let i = (t.floor() as usize).min(stops.len() - 2);
    let f = t - i as f64;
    let mut px = [0u8; 3];
    for (c, p) in px.iter_mut().enumerate() {
        *p = (stops[i][c] + f * (stops[i + 1][c] - stops[i][c])).round() as u8;
    }
    Rgb(px)
}

pub fn sequential(t: f64) -> Rgb<u8> {
    lerp_stops(&SEQUENTIAL, t)
}

/// Blue for negative, white at zero, red for positive; `t ∈ [−1, 1]`.
pub fn diverging(t: f64) -> Rgb<u8> {
    lerp_stops(&[[33.0, 102.0, 172.0], [247.0, 247.0, 247.0], [178.0, 24.0, 43.0]], (t + 1.0) / 2.0)
}

/// Cyclic map for phases in radians.
pub fn cyclic(phase: f64) -> Rgb<u8> {
    let t = phase.rem_euclid(std::f64::consts::TAU) / std::f64::consts::TAU;
    lerp_stops(&[[230.0, 230.0, 230.0], [200.0, 60.0, 60.0], [30.0, 30.0, 30.0], [60.0, 90.0, 200.0], [230.0, 230.0, 230.0]], t)
}

pub fn field_intensity<T: Real>(field: &Field<T>) -> RgbImage {
    let a = field.amplitudes();
    let max = a.iter().map(|z| z.norm_sqr().as_f64()).fold(0.0, f64::max);
    let n = a.nrows() as u32;
    RgbImage::from_fn(n, n, |x, y| {
        let v = a[(y as usize, x as usize)].norm_sqr().as_f64();
        sequential(if max > 0.0 { v / max } else { 0.0 })
    })
}

pub fn field_phase<T: Real>(field: &Field<T>) -> RgbImage {
    let a = field.amplitudes();
    let n = a.nrows() as u32;
    RgbImage::from_fn(n, n, |x, y| cyclic(a[(y as usize, x as usize)].arg().as_f64()))
}

pub fn phase_layer<T: Real>(layer: &PhaseLayer<T>) -> RgbImage {
    let p = layer.phases();
    let n = p.nrows() as u32;
    RgbImage::from_fn(n, n, |x, y| cyclic(p[(y as usize, x as usize)].as_f64()))
}

/// Each matrix entry drawn as a `cell`×`cell` block, scaled by the largest
/// magnitude. Signed data uses the diverging map.
pub fn heatmap(m: &DMatrix<f64>, cell: u32, signed: bool) -> RgbImage {
    let max = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let (rows, cols) = (m.nrows() as u32, m.ncols() as u32);
    RgbImage::from_fn(cols * cell, rows * cell, |x, y| {
        let v = m[((y / cell) as usize, (x / cell) as usize)];
        let t = if max > 0.0 { v / max } else { 0.0 };
        if signed {
            diverging(t)
        } else {
            sequential(t)
        }
    })
}

/// Grouped bar chart of a row-stochastic table: one group per input row,
/// one bar per output, heights in [0, 1].
pub fn bar_chart(probs: &DMatrix<f64>) -> RgbImage {
    const BAR: u32 = 6;
    const GAP: u32 = 10;
    const HEIGHT: u32 = 200;
    const PAD: u32 = 10;
    let (rows, cols) = (probs.nrows() as u32, probs.ncols() as u32);
    let width = 2 * PAD + rows * cols * BAR + (rows - 1) * GAP;
    let mut img = RgbImage::from_pixel(width, HEIGHT + 2 * PAD, Rgb([255, 255, 255]));
    for j in 0..rows {
        for k in 0..cols {
            let h = (probs[(j as usize, k as usize)].clamp(0.0, 1.0) * HEIGHT as f64).round() as u32;
            let x0 = PAD + j * (cols * BAR + GAP) + k * BAR;
            let color = sequential(k as f64 / (cols - 1).max(1) as f64);
            for x in x0..x0 + BAR - 1 {
                for y in (PAD + HEIGHT - h)..(PAD + HEIGHT) {
                    img.put_pixel(x, y, color);
                }
            }
        }
    }
    for x in PAD..width - PAD {
        img.put_pixel(x, PAD + HEIGHT, Rgb([0, 0, 0]));
    }
    img
}

pub fn encode_png(img: &RgbImage) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    PngEncoder::new(&mut buf).write_image(img.as_raw(), img.width(), img.height(), image::ExtendedColorType::Rgb8)?;
    Ok(buf)
}
