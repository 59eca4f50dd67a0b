//! Output-file construction: CSV renderers, the run manifest, and atomic
//! writes. Every byte written here is a pure function of the run inputs so
//! that identical runs produce identical files; the manifest additionally
//! carries the wall-clock duration and is therefore the one file expected to
//! differ between reruns.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;

use risbeam_core::evaluation::{
    ExceedanceMap, HeatmapGrid, MonteCarloReport, SampleFailure, SimConfig, SnapshotEvaluation,
};
use risbeam_core::units::watts_to_dbm;

/// Everything needed to reproduce and audit one CLI run. Written last, after
/// all data files, so its presence marks a completed run.
#[derive(Serialize)]
pub struct Manifest {
    /// Crate version of the binary that produced the outputs.
    pub version: &'static str,
    pub command: &'static str,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub user_counts: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples_per_user_count: Option<usize>,
    /// Fully resolved configuration (file contents plus defaults).
    pub config: SimConfig,
    /// Data files written by this run, in write order.
    pub outputs: Vec<String>,
    pub duration_ms: u128,
    /// True when a recoverable solver failure left some results absent.
    pub partial: bool,
    pub notes: Vec<String>,
}

/// Writes through a dot-prefixed temporary in the same directory and renames
/// into place, so readers never observe a half-written file.
pub fn write_atomic(dir: &Path, name: &str, contents: &str) -> io::Result<()> {
    let tmp = dir.join(format!(".{name}.tmp"));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, dir.join(name))
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serializable report");
    text.push('\n');
    text
}

/// `scheme,x_m,y_m,power_dbm` — schemes in report order, then rows y-major
/// with x fastest, matching the grid's storage order.
pub fn heatmap_csv(grid: &HeatmapGrid) -> String {
    let nx = grid.xs.len();
    let mut out = String::with_capacity(grid.layers.len() * grid.xs.len() * grid.ys.len() * 32);
    out.push_str("scheme,x_m,y_m,power_dbm\n");
    for (scheme, cells) in &grid.layers {
        for (idx, &p) in cells.iter().enumerate() {
            let x = grid.xs[idx % nx];
            let y = grid.ys[idx / nx];
            let _ = writeln!(out, "{},{x},{y},{}", scheme.as_str(), watts_to_dbm(p));
        }
    }
    out
}

/// `scheme,x_m,y_m,exceeds` — 1 flags a cell outside the safety circle whose
/// received power is above the exposure limit.
pub fn exceedance_csv(map: &ExceedanceMap) -> String {
    let nx = map.xs.len();
    let mut out = String::with_capacity(map.layers.len() * map.xs.len() * map.ys.len() * 24);
    out.push_str("scheme,x_m,y_m,exceeds\n");
    for (scheme, flags) in &map.layers {
        for (idx, &f) in flags.iter().enumerate() {
            let x = map.xs[idx % nx];
            let y = map.ys[idx / nx];
            let _ = writeln!(out, "{},{x},{y},{f}", scheme.as_str());
        }
    }
    out
}

/// `scheme,layer,ue,ue_layer,sinr_db` — one row per scheme per selected
/// layer; `sinr_db` is empty for layers allocated zero power.
pub fn sinr_csv(eval: &SnapshotEvaluation) -> String {
    let mut out = String::new();
    out.push_str("scheme,layer,ue,ue_layer,sinr_db\n");
    for result in &eval.report.schemes {
        for (i, sinr) in result.sinr_db.iter().enumerate() {
            let sel = &eval.state.selected[i];
            let value = sinr.map_or(String::new(), |v| v.to_string());
            let _ = writeln!(
                out,
                "{},{i},{},{},{value}",
                result.scheme.as_str(),
                sel.user,
                sel.layer
            );
        }
    }
    out
}

/// `user_count,scheme,mean_transmit_power_w,mean_capacity_bps,mean_capacity_loss_pct,samples_included,samples_excluded`
/// — one row per (user count, scheme); mean fields are empty when every
/// sample of that user count was excluded.
pub fn montecarlo_csv(report: &MonteCarloReport) -> String {
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
    let mut out = String::new();
    out.push_str(
        "user_count,scheme,mean_transmit_power_w,mean_capacity_bps,\
         mean_capacity_loss_pct,samples_included,samples_excluded\n",
    );
    for row in &report.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            row.user_count,
            row.scheme.as_str(),
            opt(row.mean_transmit_power_w),
            opt(row.mean_capacity_bps),
            opt(row.mean_capacity_loss_pct),
            row.samples_included,
            row.samples_excluded
        );
    }
    out
}

/// `user_count,sample_index,seed,scheme,total_transmit_power_w,capacity_bps,capacity_loss_pct,max_sampled_power_w,iterations,converged,failure`
/// — one row per evaluated scheme; a sample whose snapshot could not be
/// evaluated contributes a single row with an empty scheme column and the
/// failure message; a sample whose dual-GD run hit its iteration cap keeps
/// its three evaluated rows and adds a `dual_gd` row carrying the failure.
pub fn samples_csv(report: &MonteCarloReport) -> String {
    let mut out = String::new();
    out.push_str(
        "user_count,sample_index,seed,scheme,total_transmit_power_w,capacity_bps,\
         capacity_loss_pct,max_sampled_power_w,iterations,converged,failure\n",
    );
    for rec in &report.samples {
        for s in &rec.schemes {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},",
                rec.user_count,
                rec.sample_index,
                rec.seed,
                s.scheme.as_str(),
                s.total_transmit_power_w,
                s.capacity_bps,
                s.capacity_loss_pct,
                s.max_sampled_power_w,
                s.iterations,
                s.converged
            );
        }
        match &rec.failure {
            None => {}
            Some(SampleFailure::Snapshot { message }) => {
                let _ = writeln!(
                    out,
                    "{},{},{},,,,,,,,{}",
                    rec.user_count,
                    rec.sample_index,
                    rec.seed,
                    csv_escape(message)
                );
            }
            Some(SampleFailure::DualGd {
                iterations,
                max_violation_w,
            }) => {
                let _ = writeln!(
                    out,
                    "{},{},{},dual_gd,,,,,{},false,{}",
                    rec.user_count,
                    rec.sample_index,
                    rec.seed,
                    iterations,
                    csv_escape(&format!(
                        "iteration cap reached; worst violation {max_violation_w} W"
                    ))
                );
            }
        }
    }
    out
}

/// Quotes a free-text field if it contains CSV-structural characters.
fn csv_escape(text: &str) -> String {
    if text.contains([',', '"', '\n']) {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

/// `angle_deg,gain_db` rows for an element-pattern cut.
pub fn pattern_csv(points: &[(f64, f64)]) -> String {
    let mut out = String::new();
    out.push_str("angle_deg,gain_db\n");
    for (angle, gain) in points {
        let _ = writeln!(out, "{angle},{gain}");
    }
    out
}
