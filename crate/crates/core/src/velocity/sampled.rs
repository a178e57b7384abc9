//! Velocity data supplied by an external solver as a CSV time series.
//!
//! Expected format: a `t,x,y,vx,vy` header, then one row per sample.
//! Rows with the same leading time form a frame; frames must appear in
//! strictly increasing time order, share one rectilinear grid, and that
//! grid must cover the closed domain so boundary traces can be checked.
//! Evaluation is bilinear in space and linear in time (clamped at the
//! ends). The divergence reported for validation is the central
//! difference of the samples on their own grid, i.e. the discrete
//! incompressibility of the data as provided.

use super::{VelocityModel, VelocitySpec};
use crate::error::{Error, Result};
use crate::geometry::Domain;
use std::path::Path;
use std::sync::Arc;

pub struct SampledVelocity {
    times: Vec<f64>,
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Per frame, field layout iy * nx + ix.
    frames_vx: Vec<Vec<f64>>,
    frames_vy: Vec<Vec<f64>>,
    /// Central-difference divergence of each frame on the sample grid.
    frames_div: Vec<Vec<f64>>,
    frame_sup: Vec<f64>,
}

pub(super) fn construct(spec: &VelocitySpec, domain: &Domain) -> Result<Arc<dyn VelocityModel>> {
    let path = spec.file.as_ref().ok_or_else(|| {
        Error::Config("velocity.kind = user-sampled requires velocity.file".into())
    })?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("velocity.file {}: {e}", path.display())))?;
    Ok(Arc::new(SampledVelocity::parse(&text, domain)?))
}

impl SampledVelocity {
    pub fn from_path(path: &Path, domain: &Domain) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, domain)
    }

    pub fn parse(text: &str, domain: &Domain) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let header = loop {
            match lines.next() {
                Some((_, l)) if l.trim().is_empty() => continue,
                Some((_, l)) => break l,
                None => return Err(Error::Config("velocity file is empty".into())),
            }
        };
        let normalized: String = header.chars().filter(|c| !c.is_whitespace()).collect();
        if normalized != "t,x,y,vx,vy" {
            return Err(Error::Config(format!(
                "velocity file header must be t,x,y,vx,vy (got \"{}\")",
                header.trim()
            )));
        }

        struct Row {
            t: f64,
            x: f64,
            y: f64,
            vx: f64,
            vy: f64,
        }
        let mut rows: Vec<Row> = Vec::new();
        for (lineno, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 5 {
                return Err(Error::Config(format!(
                    "velocity file line {}: expected 5 fields, got {}",
                    lineno + 1,
                    fields.len()
                )));
            }
            let mut vals = [0.0; 5];
            for (k, f) in fields.iter().enumerate() {
                vals[k] = f.parse::<f64>().map_err(|_| {
                    Error::Config(format!(
                        "velocity file line {}: cannot parse \"{f}\" as a number",
                        lineno + 1
                    ))
                })?;
            }
            rows.push(Row {
                t: vals[0],
                x: vals[1],
                y: vals[2],
                vx: vals[3],
                vy: vals[4],
            });
        }
        if rows.is_empty() {
            return Err(Error::Config("velocity file has no data rows".into()));
        }

        // Split into frames at increases of t; t must be nondecreasing.
        let mut frame_bounds: Vec<(f64, usize, usize)> = Vec::new();
        let mut start = 0;
        for i in 1..=rows.len() {
            if i == rows.len() || rows[i].t != rows[start].t {
                frame_bounds.push((rows[start].t, start, i));
                if i < rows.len() && rows[i].t < rows[start].t {
                    return Err(Error::Config(format!(
                        "velocity file: frame times must increase (t = {} after {})",
                        rows[i].t, rows[start].t
                    )));
                }
                start = i;
            }
        }

        // Grid from the first frame.
        let first = &rows[frame_bounds[0].1..frame_bounds[0].2];
        let mut xs: Vec<f64> = first.iter().map(|r| r.x).collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        let mut ys: Vec<f64> = first.iter().map(|r| r.y).collect();
        ys.sort_by(f64::total_cmp);
        ys.dedup();
        let (nx, ny) = (xs.len(), ys.len());
        if nx < 3 || ny < 3 {
            return Err(Error::Config(format!(
                "velocity grid must have at least 3 nodes per axis, got {nx} x {ny}"
            )));
        }
        let tol = 1e-9 * domain.length.max(domain.height).max(1.0);
        if xs[0].abs() > tol
            || (xs[nx - 1] - domain.length).abs() > tol
            || ys[0].abs() > tol
            || (ys[ny - 1] - domain.height).abs() > tol
        {
            return Err(Error::Config(format!(
                "velocity grid must cover the closed domain [0, {}] x [0, {}]",
                domain.length, domain.height
            )));
        }

        let locate = |axis: &[f64], v: f64, name: &str| -> Result<usize> {
            axis.binary_search_by(|a| a.total_cmp(&v)).map_err(|_| {
                Error::Config(format!(
                    "velocity file: {name} = {v} does not lie on the rectilinear grid"
                ))
            })
        };

        let mut times = Vec::with_capacity(frame_bounds.len());
        let mut frames_vx = Vec::with_capacity(frame_bounds.len());
        let mut frames_vy = Vec::with_capacity(frame_bounds.len());
        for &(t, lo, hi) in &frame_bounds {
            if hi - lo != nx * ny {
                return Err(Error::Config(format!(
                    "velocity frame t = {t}: expected {} samples on the {nx} x {ny} grid, got {}",
                    nx * ny,
                    hi - lo
                )));
            }
            let mut vx = vec![0.0; nx * ny];
            let mut vy = vec![0.0; nx * ny];
            let mut filled = vec![false; nx * ny];
            for r in &rows[lo..hi] {
                let ix = locate(&xs, r.x, "x")?;
                let iy = locate(&ys, r.y, "y")?;
                let k = iy * nx + ix;
                if filled[k] {
                    return Err(Error::Config(format!(
                        "velocity frame t = {t}: duplicate sample at ({}, {})",
                        r.x, r.y
                    )));
                }
                filled[k] = true;
                vx[k] = r.vx;
                vy[k] = r.vy;
            }
            if !filled.iter().all(|&f| f) {
                return Err(Error::Config(format!(
                    "velocity frame t = {t}: grid is not a complete tensor product"
                )));
            }
            times.push(t);
            frames_vx.push(vx);
            frames_vy.push(vy);
        }

        let frames_div: Vec<Vec<f64>> = frames_vx
            .iter()
            .zip(&frames_vy)
            .map(|(vx, vy)| divergence_field(vx, vy, &xs, &ys))
            .collect();
        let frame_sup = frames_vx
            .iter()
            .zip(&frames_vy)
            .map(|(vx, vy)| {
                vx.iter()
                    .zip(vy)
                    .fold(0.0_f64, |acc, (a, b)| super::poison_max(acc, a.hypot(*b)))
            })
            .collect();

        Ok(Self {
            times,
            xs,
            ys,
            frames_vx,
            frames_vy,
            frames_div,
            frame_sup,
        })
    }

    fn interp_frame(&self, field: &[f64], x: f64, y: f64) -> f64 {
        let nx = self.xs.len();
        let (ix, sx) = cell(&self.xs, x);
        let (iy, sy) = cell(&self.ys, y);
        let f00 = field[iy * nx + ix];
        let f10 = field[iy * nx + ix + 1];
        let f01 = field[(iy + 1) * nx + ix];
        let f11 = field[(iy + 1) * nx + ix + 1];
        (1.0 - sy) * ((1.0 - sx) * f00 + sx * f10) + sy * ((1.0 - sx) * f01 + sx * f11)
    }

    fn time_weights(&self, t: f64) -> (usize, f64) {
        super::interp_bracket(&self.times, t)
    }
}

/// Central-difference divergence at the interior sample nodes, the
/// discrete incompressibility measure for user data. A central stencil
/// needs both neighbours, so border nodes replicate the adjacent
/// interior value; incompressibility *at* the boundary is the normal
/// trace's job, not this field's.
fn divergence_field(vx: &[f64], vy: &[f64], xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let (nx, ny) = (xs.len(), ys.len());
    let mut div = vec![0.0; nx * ny];
    for iy in 1..ny - 1 {
        for ix in 1..nx - 1 {
            let k = iy * nx + ix;
            div[k] = (vx[k + 1] - vx[k - 1]) / (xs[ix + 1] - xs[ix - 1])
                + (vy[k + nx] - vy[k - nx]) / (ys[iy + 1] - ys[iy - 1]);
        }
    }
    for iy in 1..ny - 1 {
        div[iy * nx] = div[iy * nx + 1];
        div[iy * nx + nx - 1] = div[iy * nx + nx - 2];
    }
    for ix in 0..nx {
        div[ix] = div[nx + ix];
        div[(ny - 1) * nx + ix] = div[(ny - 2) * nx + ix];
    }
    div
}

/// Clamped cell lookup: index of the left node and the local coordinate.
fn cell(axis: &[f64], v: f64) -> (usize, f64) {
    let n = axis.len();
    if v <= axis[0] {
        return (0, 0.0);
    }
    if v >= axis[n - 1] {
        return (n - 2, 1.0);
    }
    let mut i = axis.partition_point(|&a| a <= v);
    i = i.clamp(1, n - 1);
    let lo = axis[i - 1];
    let hi = axis[i];
    (i - 1, (v - lo) / (hi - lo))
}

impl VelocityModel for SampledVelocity {
    fn kind(&self) -> &'static str {
        "user-sampled"
    }

    fn velocity(&self, x: f64, y: f64, t: f64) -> (f64, f64) {
        let (i, s) = self.time_weights(t);
        let vx0 = self.interp_frame(&self.frames_vx[i], x, y);
        let vy0 = self.interp_frame(&self.frames_vy[i], x, y);
        if s == 0.0 {
            (vx0, vy0)
        } else {
            let vx1 = self.interp_frame(&self.frames_vx[i + 1], x, y);
            let vy1 = self.interp_frame(&self.frames_vy[i + 1], x, y);
            ((1.0 - s) * vx0 + s * vx1, (1.0 - s) * vy0 + s * vy1)
        }
    }

    fn divergence(&self, x: f64, y: f64, t: f64) -> f64 {
        let (i, s) = self.time_weights(t);
        let d0 = self.interp_frame(&self.frames_div[i], x, y);
        if s == 0.0 {
            d0
        } else {
            (1.0 - s) * d0 + s * self.interp_frame(&self.frames_div[i + 1], x, y)
        }
    }

    fn sup_norm(&self, t: f64) -> f64 {
        let (i, s) = self.time_weights(t);
        if s == 0.0 {
            self.frame_sup[i]
        } else {
            (1.0 - s) * self.frame_sup[i] + s * self.frame_sup[i + 1]
        }
    }

    fn time_factor(&self, _: f64) -> Option<f64> {
        if self.times.len() == 1 {
            Some(1.0)
        } else {
            None
        }
    }

    fn frame_times(&self) -> Option<Vec<f64>> {
        if self.times.len() == 1 {
            None
        } else {
            Some(self.times.clone())
        }
    }
}
