//! SVG figures.

use std::collections::BTreeMap;
use std::path::Path;

use corridor_core::{Path as CorridorPath, ScenarioRun, UavId};
use plotters::prelude::*;

use crate::output::OutputError;

const SIZE: (u32, u32) = (900, 700);

fn plot_err<E: std::fmt::Display>(e: E) -> OutputError {
    OutputError::Plot(e.to_string())
}

fn sample_path(path: &CorridorPath<f64>, n: usize) -> Vec<(f64, f64)> {
    let len = path.length();
    (0..=n)
        .filter_map(|k| path.point_at(len * k as f64 / n as f64).ok())
        .map(|p| (p.position.x, p.position.y))
        .collect()
}

fn series_by_uav<F>(run: &ScenarioRun<f64>, f: F) -> BTreeMap<UavId, Vec<(f64, f64)>>
where
    F: Fn(&corridor_core::sim::TrajectoryRecord<f64>) -> (f64, f64),
{
    let mut map: BTreeMap<UavId, Vec<(f64, f64)>> = BTreeMap::new();
    for r in &run.trajectory {
        map.entry(r.uav).or_default().push(f(r));
    }
    map
}

fn bounds(points: impl Iterator<Item = (f64, f64)>) -> ((f64, f64), (f64, f64)) {
    let mut xs = (f64::INFINITY, f64::NEG_INFINITY);
    let mut ys = (f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in points {
        xs = (xs.0.min(x), xs.1.max(x));
        ys = (ys.0.min(y), ys.1.max(y));
    }
    let pad = |r: (f64, f64)| {
        if !r.0.is_finite() {
            return (0.0, 1.0);
        }
        let d = ((r.1 - r.0) * 0.05).max(1.0);
        (r.0 - d, r.1 + d)
    };
    (pad(xs), pad(ys))
}

/// Layout plus every trajectory in the plane.
pub fn corridor_plot(run: &ScenarioRun<f64>, file: &Path) -> Result<(), OutputError> {
    let layout = &run.layout;
    let loiter = sample_path(&layout.loiter_circle, 360);
    let outgoing = sample_path(&layout.outgoing_path, 200);
    let incoming = sample_path(&layout.incoming_path, 200);
    let tracks = series_by_uav(run, |r| (r.x, r.y));
    let all = loiter.iter().chain(&outgoing).chain(&incoming).chain(tracks.values().flatten()).copied();
    let ((x0, x1), (y0, y1)) = bounds(all);
    // Equal axis scales.
    let span = (x1 - x0).max(y1 - y0);
    let (cx, cy) = ((x0 + x1) / 2.0, (y0 + y1) / 2.0);

    let root = SVGBackend::new(file, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption("corridor", ("sans-serif", 20))
        .margin(10)
        .x_label_area_size(30)
        .y_label_area_size(50)
        .build_cartesian_2d(cx - span / 2.0..cx + span / 2.0, cy - span / 2.0..cy + span / 2.0)
        .map_err(plot_err)?;
    chart.configure_mesh().x_desc("x (m)").y_desc("y (m)").draw().map_err(plot_err)?;
    for pts in [&loiter, &outgoing, &incoming] {
        chart.draw_series(LineSeries::new(pts.iter().copied(), BLACK.mix(0.4))).map_err(plot_err)?;
    }
    for (k, (id, pts)) in tracks.iter().enumerate() {
        let color = Palette99::pick(k).to_rgba();
        chart
            .draw_series(LineSeries::new(
                pts.iter().copied(),
                color.stroke_width(if *id == run.outgoing { 2 } else { 1 }),
            ))
            .map_err(plot_err)?
            .label(run.label(*id).to_string())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 15, y)], color));
    }
    chart.configure_series_labels().background_style(WHITE.mix(0.8)).border_style(BLACK).draw().map_err(plot_err)?;
    root.present().map_err(plot_err)
}

fn time_plot(
    file: &Path,
    caption: &str,
    y_desc: &str,
    series: Vec<(String, Vec<(f64, f64)>)>,
) -> Result<(), OutputError> {
    let ((x0, x1), (y0, y1)) = bounds(series.iter().flat_map(|(_, s)| s.iter().copied()));
    let root = SVGBackend::new(file, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(caption, ("sans-serif", 20))
        .margin(10)
        .x_label_area_size(30)
        .y_label_area_size(50)
        .build_cartesian_2d(x0..x1, y0..y1)
        .map_err(plot_err)?;
    chart.configure_mesh().x_desc("t (s)").y_desc(y_desc).draw().map_err(plot_err)?;
    for (k, (label, pts)) in series.into_iter().enumerate() {
        let color = Palette99::pick(k).to_rgba();
        chart
            .draw_series(LineSeries::new(pts, color))
            .map_err(plot_err)?
            .label(label)
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 15, y)], color));
    }
    chart.configure_series_labels().background_style(WHITE.mix(0.8)).border_style(BLACK).draw().map_err(plot_err)?;
    root.present().map_err(plot_err)
}

/// Writes `corridor.svg`, `outgoing_{v,a,theta}.svg`, `speeds.svg` and `separation.svg`.
pub fn write_plots(run: &ScenarioRun<f64>, dir: &Path) -> Result<(), OutputError> {
    std::fs::create_dir_all(dir)?;
    corridor_plot(run, &dir.join("corridor.svg"))?;

    let out = run.outgoing;
    let outgoing = |f: fn(&corridor_core::sim::TrajectoryRecord<f64>) -> f64| {
        run.trajectory.iter().filter(|r| r.uav == out).map(|r| (r.t, f(r))).collect::<Vec<_>>()
    };
    let label = run.label(out).to_string();
    time_plot(&dir.join("outgoing_v.svg"), "outgoing speed", "v (m/s)", vec![(label.clone(), outgoing(|r| r.v))])?;
    time_plot(
        &dir.join("outgoing_a.svg"),
        "outgoing lateral acceleration",
        "a (m/s²)",
        vec![(label.clone(), outgoing(|r| r.a))],
    )?;
    time_plot(&dir.join("outgoing_theta.svg"), "outgoing heading", "θ (rad)", vec![(label, outgoing(|r| r.theta))])?;

    let speeds = series_by_uav(run, |r| (r.t, r.v)).into_iter().map(|(id, s)| (run.label(id).to_string(), s)).collect();
    time_plot(&dir.join("speeds.svg"), "speeds", "v (m/s)", speeds)?;

    let sep: Vec<(f64, f64)> = run.safety.series.iter().copied().filter(|(_, d)| d.is_finite()).collect();
    let (t0, t1) = (sep.first().map_or(0.0, |p| p.0), sep.last().map_or(1.0, |p| p.0));
    time_plot(
        &dir.join("separation.svg"),
        "minimum pairwise separation",
        "d (m)",
        vec![("min separation".into(), sep), ("d_safe".into(), vec![(t0, run.safety.d_safe), (t1, run.safety.d_safe)])],
    )
}
