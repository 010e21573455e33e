//! SVG line charts for the `--plots` flag.

use plotters::prelude::*;
use std::path::Path;

pub struct Series {
    pub label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// Plots are a convenience; a drawing failure is reported on stderr and otherwise ignored.
pub fn line_chart(path: &Path, title: &str, xlabel: &str, ylabel: &str, series: &[Series]) {
    if let Err(e) = draw(path, title, xlabel, ylabel, series) {
        eprintln!("warning: could not draw {}: {e}", path.display());
    }
}

fn draw(path: &Path, title: &str, xlabel: &str, ylabel: &str, series: &[Series]) -> Result<(), Box<dyn std::error::Error>> {
    let fin = |v: &[f64]| v.iter().copied().filter(|x| x.is_finite()).collect::<Vec<_>>();
    let xs: Vec<f64> = series.iter().flat_map(|s| fin(&s.x)).collect();
    let ys: Vec<f64> = series.iter().flat_map(|s| fin(&s.y)).collect();
    if xs.is_empty() || ys.is_empty() {
        return Ok(());
    }
    let span = |v: &[f64]| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let pad = ((hi - lo) * 0.05).max(1e-9);
        (lo - pad)..(hi + pad)
    };
    let root = SVGBackend::new(path, (800, 500)).into_drawing_area();
    root.fill(&WHITE)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 20))
        .margin(10)
        .x_label_area_size(40)
        .y_label_area_size(60)
        .build_cartesian_2d(span(&xs), span(&ys))?;
    chart.configure_mesh().x_desc(xlabel).y_desc(ylabel).draw()?;
    for (k, s) in series.iter().enumerate() {
        let color = Palette99::pick(k).to_rgba();
        chart
            .draw_series(LineSeries::new(s.x.iter().copied().zip(s.y.iter().copied()), color.stroke_width(2)))?
            .label(s.label.clone())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color));
    }
    chart.configure_series_labels().background_style(WHITE.mix(0.8)).border_style(BLACK).draw()?;
    root.present()?;
    Ok(())
}
