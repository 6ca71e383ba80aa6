//! SVG figures.

use std::path::Path;

use plotters::prelude::*;

/// Trajectories drawn in a fan plot.
pub const FAN_SIZE: usize = 50;

fn bounds(points: impl Iterator<Item = (f64, f64)>) -> (f64, f64, f64, f64) {
    let (mut x0, mut x1, mut y0, mut y1) = (0.0f64, 1e-9f64, 0.0f64, 1e-9f64);
    for (x, y) in points {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let pad = 0.05 * (y1 - y0).max(1.0);
    (x0, x1, y0 - pad, y1 + pad)
}

/// Horodistance paths of individual replicas against the line `v t`.
pub fn trajectory_fan(path: &Path, paths: &[Vec<(f64, f64)>], v: f64) -> Result<(), String> {
    let (x0, x1, y0, y1) = bounds(paths.iter().flatten().copied());
    let root = SVGBackend::new(path, (800, 500)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| e.to_string())?;
    let mut chart = ChartBuilder::on(&root)
        .caption("tagged particle horodistance", ("sans-serif", 20))
        .margin(10)
        .x_label_area_size(35)
        .y_label_area_size(45)
        .build_cartesian_2d(x0..x1, y0..y1)
        .map_err(|e| e.to_string())?;
    chart
        .configure_mesh()
        .x_desc("t")
        .y_desc("<X_t>")
        .draw()
        .map_err(|e| e.to_string())?;
    for p in paths {
        chart
            .draw_series(LineSeries::new(p.iter().copied(), BLUE.mix(0.25)))
            .map_err(|e| e.to_string())?;
    }
    chart
        .draw_series(LineSeries::new([(x0, v * x0), (x1, v * x1)], RED.stroke_width(2)))
        .map_err(|e| e.to_string())?;
    root.present().map_err(|e| e.to_string())
}

/// Sample means with 95% bars against the line `v t`.
pub fn mean_against_line(path: &Path, points: &[(f64, f64, f64)], v: f64) -> Result<(), String> {
    let (x0, x1, y0, y1) = bounds(
        points
            .iter()
            .flat_map(|&(t, m, se)| [(t, m - 2.0 * se), (t, m + 2.0 * se), (t, v * t)]),
    );
    let root = SVGBackend::new(path, (800, 500)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| e.to_string())?;
    let mut chart = ChartBuilder::on(&root)
        .caption("mean horodistance", ("sans-serif", 20))
        .margin(10)
        .x_label_area_size(35)
        .y_label_area_size(45)
        .build_cartesian_2d(x0..x1, y0..y1)
        .map_err(|e| e.to_string())?;
    chart
        .configure_mesh()
        .x_desc("t")
        .y_desc("mean <X_t>")
        .draw()
        .map_err(|e| e.to_string())?;
    chart
        .draw_series(LineSeries::new([(x0, v * x0), (x1, v * x1)], RED.stroke_width(2)))
        .map_err(|e| e.to_string())?;
    chart
        .draw_series(points.iter().map(|&(t, m, se)| {
            ErrorBar::new_vertical(t, m - 1.96 * se, m, m + 1.96 * se, BLUE.filled(), 6)
        }))
        .map_err(|e| e.to_string())?;
    root.present().map_err(|e| e.to_string())
}

/// Density histogram of standardized values with the standard normal density.
pub fn histogram_with_normal(path: &Path, z: &[f64]) -> Result<(), String> {
    const BINS: usize = 40;
    const LO: f64 = -4.0;
    const HI: f64 = 4.0;
    let width = (HI - LO) / BINS as f64;
    let mut counts = [0usize; BINS];
    for &x in z {
        if (LO..HI).contains(&x) {
            counts[((x - LO) / width) as usize] += 1;
        }
    }
    let scale = 1.0 / (z.len().max(1) as f64 * width);
    let top = counts.iter().map(|&c| c as f64 * scale).fold(0.45, f64::max) * 1.05;
    let root = SVGBackend::new(path, (800, 500)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| e.to_string())?;
    let mut chart = ChartBuilder::on(&root)
        .caption("standardized horodistance", ("sans-serif", 20))
        .margin(10)
        .x_label_area_size(35)
        .y_label_area_size(45)
        .build_cartesian_2d(LO..HI, 0.0..top)
        .map_err(|e| e.to_string())?;
    chart.configure_mesh().draw().map_err(|e| e.to_string())?;
    chart
        .draw_series(counts.iter().enumerate().map(|(i, &c)| {
            let a = LO + i as f64 * width;
            Rectangle::new([(a, 0.0), (a + width, c as f64 * scale)], BLUE.mix(0.4).filled())
        }))
        .map_err(|e| e.to_string())?;
    let density = (0..=200).map(|i| {
        let x = LO + (HI - LO) * i as f64 / 200.0;
        (x, (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt())
    });
    chart
        .draw_series(LineSeries::new(density, RED.stroke_width(2)))
        .map_err(|e| e.to_string())?;
    root.present().map_err(|e| e.to_string())
}
