//! CSV and JSON artifacts of a run.

use std::io::Write;
use std::path::Path;

use corridor_core::guidance::PlanBranch;
use corridor_core::{PlanOutcome, ScenarioRun};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OutputError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("plot: {0}")]
    Plot(String),
}

pub const TRAJECTORY_HEADER: [&str; 8] = ["t", "uav_id", "x", "y", "theta", "v", "a", "lane"];
pub const EVENTS_HEADER: [&str; 4] = ["t", "kind", "uav_id", "detail"];

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_trajectories<W: Write>(run: &ScenarioRun<f64>, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRAJECTORY_HEADER)?;
    for r in &run.trajectory {
        w.write_record([
            fmt(r.t),
            run.label(r.uav).to_string(),
            fmt(r.x),
            fmt(r.y),
            fmt(r.theta),
            fmt(r.v),
            fmt(r.a),
            r.lane.as_str().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_events<W: Write>(run: &ScenarioRun<f64>, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(EVENTS_HEADER)?;
    for e in &run.events {
        let uav = e.uav.map(|u| run.label(u).to_string()).unwrap_or_default();
        w.write_record([fmt(e.time), e.kind.as_str().to_string(), uav, e.detail.clone()])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairMetric {
    pub a: String,
    pub b: String,
    pub t: f64,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Clearance {
    pub ahead: Option<f64>,
    pub behind: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    pub outcome: String,
    pub safe: bool,
    pub min_separation: Option<f64>,
    pub closest_pair: Option<PairMetric>,
    pub first_violation: Option<PairMetric>,
    pub t_departure: Option<f64>,
    pub branch: Option<String>,
    pub t_out: Option<f64>,
    pub h: Option<usize>,
    pub target_s: Option<f64>,
    pub v_out: Option<f64>,
    pub merge_time: Option<f64>,
    pub clearance: Option<Clearance>,
    pub max_cross_track: f64,
    pub max_slot_deviation: f64,
    #[serde(rename = "R_L")]
    pub r_loiter: f64,
    #[serde(rename = "d_L")]
    pub d_loiter: f64,
    pub d_p_min: f64,
    pub d_p_max: f64,
    pub patch_length: f64,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn branch_name(b: PlanBranch) -> String {
    match b {
        PlanBranch::StripStart => "strip-start".into(),
        PlanBranch::Interior(i) => format!("interior-{i}"),
        PlanBranch::StripEnd => "strip-end".into(),
        PlanBranch::Cooperative => "cooperative".into(),
    }
}

impl Metrics {
    pub fn from_run(run: &ScenarioRun<f64>) -> Self {
        let pair = |p: Option<(u32, u32, f64)>, dist: Option<f64>| {
            p.map(|(a, b, t)| PairMetric {
                a: run.label(a).to_string(),
                b: run.label(b).to_string(),
                t,
                distance: dist.unwrap_or(f64::NAN),
            })
        };
        let violation_distance = run.safety.violating_pair.and_then(|(a, b, t)| {
            // The report keeps only the pair and time; recover the distance.
            let pos = |id| run.trajectory.iter().find(|r| r.uav == id && r.t == t).map(|r| (r.x, r.y));
            match (pos(a), pos(b)) {
                (Some(p), Some(q)) => Some(((p.0 - q.0).powi(2) + (p.1 - q.1).powi(2)).sqrt()),
                _ => None,
            }
        });
        let branch = run.plan.map(|p| match p.outcome {
            PlanOutcome::Insert { branch, .. } => branch_name(branch),
            PlanOutcome::Loiter => "loiter".into(),
        });
        Self {
            outcome: run.outcome.as_str().to_string(),
            safe: run.safety.is_safe(),
            min_separation: finite(run.safety.min_separation),
            closest_pair: pair(run.safety.closest_pair, finite(run.safety.min_separation)),
            first_violation: pair(run.safety.violating_pair, violation_distance),
            t_departure: run.departure_time,
            branch,
            t_out: run.plan.and_then(|p| p.t_out()),
            h: run.plan.and_then(|p| p.h()),
            target_s: run.plan.and_then(|p| p.target_s()),
            v_out: run.v_out,
            merge_time: run.merge_time,
            clearance: run.merge_clearance.map(|c| Clearance { ahead: c.ahead, behind: c.behind }),
            max_cross_track: run.max_cross_track,
            max_slot_deviation: run.max_slot_deviation,
            r_loiter: run.layout.r_loiter,
            d_loiter: run.layout.d_loiter,
            d_p_min: run.d_p_min,
            d_p_max: run.d_p_max,
            patch_length: run.d_p_max - run.d_p_min,
        }
    }
}

/// Writes `trajectories.csv`, `events.csv` and `metrics.json` into `dir`.
pub fn write_all(run: &ScenarioRun<f64>, dir: &Path) -> Result<Metrics, OutputError> {
    std::fs::create_dir_all(dir)?;
    let open = |name: &str| std::fs::File::create(dir.join(name)).map(std::io::BufWriter::new);
    write_trajectories(run, open("trajectories.csv")?)?;
    write_events(run, open("events.csv")?)?;
    let metrics = Metrics::from_run(run);
    let mut f = open("metrics.json")?;
    serde_json::to_writer_pretty(&mut f, &metrics)?;
    writeln!(f)?;
    f.flush()?;
    Ok(metrics)
}
