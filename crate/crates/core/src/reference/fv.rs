use std::io::Write;
use std::path::Path;

use crate::error::{PinnError, Result};
use crate::field::Field;
use crate::problems::{BoundaryCondition, FluxSpec, Pde, ProblemSpec};
use crate::sampling::gauss_legendre;

/// Target number of stored time slices.
pub const DEFAULT_SLICES: usize = 1000;

/// Numerical interface flux.
fn interface_flux(flux: &FluxSpec, ul: f64, ur: f64) -> f64 {
    match flux.convex_min {
        // exact Riemann solution for a convex flux with minimum at s
        Some(s) => (flux.f)(ul.max(s)).max((flux.f)(ur.min(s))),
        None => {
            let (fl, fr) = ((flux.f)(ul), (flux.f)(ur));
            let a = if (ur - ul).abs() > 1e-14 { (fr - fl) / (ur - ul) } else { (flux.f_prime)(ul) };
            if a >= 0.0 {
                fl
            } else {
                fr
            }
        }
    }
}

/// Explicit first-order finite-volume solver for a 1D scalar conservation
/// law with optional viscosity.
pub struct FvSolver<'a> {
    spec: &'a ProblemSpec,
    flux: &'a FluxSpec,
    nu: f64,
    periodic: bool,
    pub dx: f64,
    x_lower: f64,
    time: f64,
    cells: Vec<f64>,
    fluxes: Vec<f64>,
}

impl<'a> FvSolver<'a> {
    pub fn new(spec: &'a ProblemSpec, n_cells: usize) -> Result<Self> {
        let (nu, flux) = match &spec.pde {
            Pde::ConservationLaw { nu, flux } if spec.spatial_dim() == 1 => (*nu, flux),
            _ => return Err(PinnError::InvalidArgument("finite-volume solver needs a 1D conservation law".into())),
        };
        if n_cells < 2 {
            return Err(PinnError::InvalidArgument("need at least two cells".into()));
        }
        let periodic = match spec.boundary {
            BoundaryCondition::Dirichlet(_) => false,
            BoundaryCondition::Periodic => true,
            BoundaryCondition::NoPenetration => {
                return Err(PinnError::InvalidArgument(
                    "no-penetration boundaries are not supported by the FV solver".into(),
                ))
            }
        };
        let (lo, hi) = (spec.geometry.lower[0], spec.geometry.upper[0]);
        let dx = (hi - lo) / n_cells as f64;
        // cell averages of the initial data by 4-point Gauss per cell
        let (gx, gw) = gauss_legendre(4);
        let cells = (0..n_cells)
            .map(|i| {
                let mid = lo + (i as f64 + 0.5) * dx;
                gx.iter().zip(&gw).map(|(x, w)| 0.5 * w * (spec.initial_data)(&[mid + 0.5 * dx * x])[0]).sum()
            })
            .collect();
        Ok(Self { spec, flux, nu, periodic, dx, x_lower: lo, time: 0.0, cells, fluxes: vec![0.0; n_cells + 1] })
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// `sum_i u_i dx`.
    pub fn mass(&self) -> f64 {
        self.cells.iter().sum::<f64>() * self.dx
    }

    /// Net inflow `F_left - F_right` of the most recent step.
    pub fn boundary_inflow(&self) -> f64 {
        self.fluxes[0] - self.fluxes[self.cells.len()]
    }

    /// Bounds of the data, used for wave-speed estimates (the solution
    /// obeys a maximum principle).
    fn data_range(&self) -> (f64, f64) {
        let mut lo = self.cells.iter().copied().fold(f64::INFINITY, f64::min);
        let mut hi = self.cells.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if let BoundaryCondition::Dirichlet(g) = &self.spec.boundary {
            let t_final = self.spec.t_final();
            for k in 0..=16 {
                let t = t_final * k as f64 / 16.0;
                for x in [self.spec.geometry.lower[0], self.spec.geometry.upper[0]] {
                    let v = g(&[t, x])[0];
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
            }
        }
        (lo, hi)
    }

    /// Largest stable time step for Courant number `cfl`.
    pub fn stable_dt(&self, cfl: f64) -> f64 {
        let (lo, hi) = self.data_range();
        let a = self.flux.max_speed(lo, hi);
        let rate = a / self.dx + 2.0 * self.nu / (self.dx * self.dx);
        let mut dt = if rate > 0.0 { cfl / rate } else { f64::INFINITY };
        if self.nu > 0.0 {
            dt = dt.min(self.dx * self.dx / (4.0 * self.nu));
        }
        dt
    }

    fn ghost(&self, left: bool, t: f64) -> f64 {
        let n = self.cells.len();
        if self.periodic {
            return if left { self.cells[n - 1] } else { self.cells[0] };
        }
        let BoundaryCondition::Dirichlet(g) = &self.spec.boundary else { unreachable!() };
        let x = if left { self.x_lower } else { self.x_lower + n as f64 * self.dx };
        g(&[t, x])[0]
    }

    /// Advances by `dt` with forward Euler.
    pub fn step(&mut self, dt: f64) {
        let n = self.cells.len();
        let (gl, gr) = (self.ghost(true, self.time), self.ghost(false, self.time));
        let at = |i: isize| -> f64 {
            if i < 0 {
                gl
            } else if i as usize >= n {
                gr
            } else {
                self.cells[i as usize]
            }
        };
        let visc = self.nu / self.dx;
        for k in 0..=n {
            // interface k between cells k-1 and k; Dirichlet ghosts sit at
            // the boundary itself, half a cell from the first centre
            let (ul, ur) = (at(k as isize - 1), at(k as isize));
            let grad_scale = if !self.periodic && (k == 0 || k == n) { 2.0 } else { 1.0 };
            self.fluxes[k] = interface_flux(self.flux, ul, ur) - visc * grad_scale * (ur - ul);
        }
        let r = dt / self.dx;
        for i in 0..n {
            self.cells[i] -= r * (self.fluxes[i + 1] - self.fluxes[i]);
        }
        self.time += dt;
    }
}

/// Stored finite-volume solution on a space-time grid.
#[derive(Debug, Clone)]
pub struct FvGrid {
    pub n_cells: usize,
    pub dx: f64,
    pub dt: f64,
    pub cfl: f64,
    pub x_lower: f64,
    pub t_end: f64,
    /// Times of the stored slices, increasing, starting at 0 and ending at
    /// `t_end`.
    pub times: Vec<f64>,
    /// Cell averages per stored slice.
    pub cell_averages: Vec<Vec<f64>>,
}

/// Solves up to `t_end` with Courant number `cfl`, storing about
/// `DEFAULT_SLICES` time slices.
pub fn fv_solve(spec: &ProblemSpec, n_cells: usize, t_end: f64, cfl: f64) -> Result<FvGrid> {
    fv_solve_with_slices(spec, n_cells, t_end, cfl, DEFAULT_SLICES)
}

pub fn fv_solve_with_slices(spec: &ProblemSpec, n_cells: usize, t_end: f64, cfl: f64, slices: usize) -> Result<FvGrid> {
    if !(cfl > 0.0 && cfl <= 1.0) {
        return Err(PinnError::Stability(format!("CFL number {cfl} outside (0, 1]")));
    }
    if !(t_end > 0.0) {
        return Err(PinnError::InvalidArgument("t_end must be positive".into()));
    }
    let mut solver = FvSolver::new(spec, n_cells)?;
    let dt_max = solver.stable_dt(cfl);
    let n_steps = if dt_max.is_finite() { (t_end / dt_max).ceil().max(1.0) as usize } else { 1 };
    let dt = t_end / n_steps as f64;
    let stride = n_steps.div_ceil(slices.max(1)).max(1);
    let mut times = vec![0.0];
    let mut cell_averages = vec![solver.cells().to_vec()];
    for s in 1..=n_steps {
        solver.step(dt);
        if s % stride == 0 || s == n_steps {
            times.push(s as f64 * dt);
            cell_averages.push(solver.cells().to_vec());
        }
    }
    Ok(FvGrid { n_cells, dx: solver.dx, dt, cfl, x_lower: solver.x_lower, t_end, times, cell_averages })
}

impl FvGrid {
    pub fn x_upper(&self) -> f64 {
        self.x_lower + self.n_cells as f64 * self.dx
    }

    pub fn cell_center(&self, i: usize) -> f64 {
        self.x_lower + (i as f64 + 0.5) * self.dx
    }

    /// Linear interpolation of a slice between cell centres, constant in the
    /// half cells next to the boundary.
    fn sample_slice(&self, slice: &[f64], x: f64) -> f64 {
        let s = (x - self.x_lower) / self.dx - 0.5;
        if s <= 0.0 {
            return slice[0];
        }
        let i = s.floor() as usize;
        if i + 1 >= self.n_cells {
            return slice[self.n_cells - 1];
        }
        let a = s - i as f64;
        (1.0 - a) * slice[i] + a * slice[i + 1]
    }

    /// Bilinear value at `(t, x)` without bounds checks (clamped).
    pub fn value_at(&self, t: f64, x: f64) -> f64 {
        let t = t.clamp(0.0, self.t_end);
        let k = self.times.partition_point(|&s| s <= t).clamp(1, self.times.len() - 1);
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let a = if t1 > t0 { (t - t0) / (t1 - t0) } else { 0.0 };
        let v0 = self.sample_slice(&self.cell_averages[k - 1], x);
        if a == 0.0 {
            return v0;
        }
        (1.0 - a) * v0 + a * self.sample_slice(&self.cell_averages[k], x)
    }

    /// Total variation of a stored slice.
    pub fn total_variation(&self, slice: usize) -> f64 {
        self.cell_averages[slice].windows(2).map(|w| (w[1] - w[0]).abs()).sum()
    }

    /// Writes `t, x, u` rows for every `every`-th stored slice.
    pub fn write_csv(&self, path: &Path, every: usize) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "t,x,u")?;
        for (k, (t, slice)) in self.times.iter().zip(&self.cell_averages).enumerate() {
            if k % every.max(1) != 0 && k + 1 != self.times.len() {
                continue;
            }
            for (i, u) in slice.iter().enumerate() {
                writeln!(w, "{},{},{}", t, self.cell_center(i), u)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Values of the reference solution at `(t, x)` points (row-major pairs).
pub fn sample_reference(grid: &FvGrid, points: &[f64]) -> Result<Vec<f64>> {
    let tol = 1e-12 * (1.0 + grid.t_end.abs() + grid.x_upper().abs());
    points
        .chunks_exact(2)
        .map(|p| {
            let (t, x) = (p[0], p[1]);
            if t < -tol || t > grid.t_end + tol || x < grid.x_lower - tol || x > grid.x_upper() + tol {
                return Err(PinnError::Domain(format!("point (t={t}, x={x}) outside the solved region")));
            }
            Ok(grid.value_at(t, x))
        })
        .collect()
}

impl Field for FvGrid {
    fn input_dim(&self) -> usize {
        2
    }

    fn output_dim(&self) -> usize {
        1
    }

    fn eval(&self, points: &[f64]) -> Vec<f64> {
        points.chunks_exact(2).map(|p| self.value_at(p[0], p[1])).collect()
    }
}
