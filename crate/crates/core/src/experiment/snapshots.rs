use std::path::{Path, PathBuf};

use crate::analysis::vorticity_field;
use crate::error::{PinnError, Result};
use crate::field::Field;
use crate::nn::{load_checkpoint, NetworkParams};
use crate::problems::ProblemSpec;

/// Column names of a snapshot file for `problem`.
pub fn snapshot_header(problem: &ProblemSpec) -> Vec<String> {
    let mut h = vec!["t".to_string(), "x".to_string()];
    if problem.spatial_dim() >= 2 {
        h.push("y".into());
    }
    if problem.is_euler() {
        h.extend(["u", "v", "p", "omega"].map(String::from));
    } else {
        h.push("u".into());
    }
    h
}

/// Grid points at time `t`: `resolution` nodes along x (and y), remaining
/// axes at the box centre.
fn grid_points(problem: &ProblemSpec, t: f64, resolution: usize) -> Vec<f64> {
    let g = &problem.geometry;
    let d = problem.spatial_dim();
    let centre: Vec<f64> = (0..d).map(|a| 0.5 * (g.lower[a] + g.upper[a])).collect();
    let node = |a: usize, i: usize| {
        if resolution == 1 {
            centre[a]
        } else {
            g.lower[a] + g.width(a) * i as f64 / (resolution - 1) as f64
        }
    };
    let ny = if d >= 2 { resolution } else { 1 };
    let mut pts = Vec::with_capacity(resolution * ny * (d + 1));
    for j in 0..ny {
        for i in 0..resolution {
            pts.push(t);
            for a in 0..d {
                pts.push(match a {
                    0 => node(0, i),
                    1 => node(1, j),
                    _ => centre[a],
                });
            }
        }
    }
    pts
}

/// Writes one CSV per requested time with the network evaluated on a
/// regular grid; Euler snapshots carry the vorticity.
pub fn emit_snapshots(
    problem: &ProblemSpec,
    params: &NetworkParams,
    times: &[f64],
    resolution: usize,
    out: &Path,
) -> Result<Vec<PathBuf>> {
    if params.input_dim() != problem.input_dim() || params.output_dim() != problem.output_dim {
        return Err(PinnError::Checkpoint(format!(
            "network maps R^{} -> R^{} but the problem needs R^{} -> R^{}",
            params.input_dim(),
            params.output_dim(),
            problem.input_dim(),
            problem.output_dim
        )));
    }
    if resolution == 0 {
        return Err(PinnError::InvalidArgument("grid resolution must be positive".into()));
    }
    let t_final = problem.t_final();
    if let Some(t) = times.iter().find(|&&t| !(0.0..=t_final).contains(&t)) {
        return Err(PinnError::Domain(format!("snapshot time {t} outside [0, {t_final}]")));
    }
    std::fs::create_dir_all(out)?;
    let d = problem.input_dim();
    let m = problem.output_dim;
    let mut files = Vec::with_capacity(times.len());
    for (k, &t) in times.iter().enumerate() {
        let pts = grid_points(problem, t, resolution);
        let values = params.eval(&pts);
        let omega = problem.is_euler().then(|| vorticity_field(params, &pts));
        let path = out.join(format!("snapshot_{k:03}.csv"));
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(snapshot_header(problem))?;
        for (p, y) in pts.chunks_exact(d).enumerate() {
            let mut row: Vec<String> = y[..d.min(3)].iter().map(|v| v.to_string()).collect();
            row.extend(values[p * m..(p + 1) * m].iter().map(|v| v.to_string()));
            if let Some(om) = &omega {
                row.push(om[p].to_string());
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        files.push(path);
    }
    Ok(files)
}

/// Loads a checkpoint and emits snapshots of it.
pub fn emit_field_snapshots(
    problem: &ProblemSpec,
    checkpoint: &Path,
    times: &[f64],
    resolution: usize,
    out: &Path,
) -> Result<Vec<PathBuf>> {
    let params = load_checkpoint(checkpoint)?;
    emit_snapshots(problem, &params, times, resolution, out)
}
