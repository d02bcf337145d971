use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use crate::error::{PinnError, Result};

/// Periodic 2D velocity field on a uniform node grid
/// `x_i = i Lx / nx`, `y_j = j Ly / ny`. Values are stored row-major with
/// `x` fastest: `u[j * nx + i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

fn parse_numbers(line: &str) -> Option<Vec<f64>> {
    line.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().ok())
        .collect()
}

impl GridField {
    /// Parses the grid text format: a header `nx ny Lx Ly` (optionally
    /// preceded by a line of column labels) followed by `nx * ny` rows of
    /// `u v`. Commas and whitespace both separate fields; `#` starts a
    /// comment line.
    pub fn parse(text: &str) -> Result<Self> {
        let err = |m: String| PinnError::Config { path: "shear_layer.file".into(), message: m };
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let mut header = None;
        for line in lines.by_ref() {
            match parse_numbers(line) {
                Some(v) => {
                    header = Some(v);
                    break;
                }
                None if header.is_none() => continue,
                None => break,
            }
        }
        let header = header.ok_or_else(|| err("missing header `nx ny Lx Ly`".into()))?;
        if header.len() != 4
            || header[0] < 2.0
            || header[1] < 2.0
            || header[0].fract() != 0.0
            || header[1].fract() != 0.0
        {
            return Err(err(format!("bad header {header:?}; expected integer nx, ny >= 2 and lengths Lx, Ly")));
        }
        let (nx, ny) = (header[0] as usize, header[1] as usize);
        let (lx, ly) = (header[2], header[3]);
        if !(lx > 0.0 && ly > 0.0) {
            return Err(err("domain lengths must be positive".into()));
        }
        let mut u = Vec::with_capacity(nx * ny);
        let mut v = Vec::with_capacity(nx * ny);
        for (k, line) in lines.enumerate() {
            let row = parse_numbers(line).ok_or_else(|| err(format!("row {}: not numeric", k + 1)))?;
            if row.len() != 2 {
                return Err(err(format!("row {}: expected 2 values (u, v), got {}", k + 1, row.len())));
            }
            u.push(row[0]);
            v.push(row[1]);
        }
        if u.len() != nx * ny {
            return Err(err(format!("expected {} rows, found {}", nx * ny, u.len())));
        }
        Ok(Self { nx, ny, lx, ly, u, v })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "nx,ny,Lx,Ly")?;
        writeln!(w, "{},{},{},{}", self.nx, self.ny, self.lx, self.ly)?;
        for (a, b) in self.u.iter().zip(&self.v) {
            writeln!(w, "{a},{b}")?;
        }
        w.flush()?;
        Ok(())
    }

    /// Periodic bilinear interpolation of `(u, v)` at `(x, y)`.
    pub fn sample(&self, x: f64, y: f64) -> [f64; 2] {
        let fx = (x / self.lx * self.nx as f64).rem_euclid(self.nx as f64);
        let fy = (y / self.ly * self.ny as f64).rem_euclid(self.ny as f64);
        let (i0, j0) = (fx.floor() as usize % self.nx, fy.floor() as usize % self.ny);
        let (i1, j1) = ((i0 + 1) % self.nx, (j0 + 1) % self.ny);
        let (a, b) = (fx - fx.floor(), fy - fy.floor());
        let lerp = |f: &[f64]| {
            let f00 = f[j0 * self.nx + i0];
            let f10 = f[j0 * self.nx + i1];
            let f01 = f[j1 * self.nx + i0];
            let f11 = f[j1 * self.nx + i1];
            (1.0 - a) * (1.0 - b) * f00 + a * (1.0 - b) * f10 + (1.0 - a) * b * f01 + a * b * f11
        };
        [lerp(&self.u), lerp(&self.v)]
    }

    /// Classical thin double shear layer on `[0, 2pi]^2`:
    /// `u = tanh(rho (y - pi/2))` for `y <= pi`, `tanh(rho (3pi/2 - y))`
    /// above, and `v = delta sin(x)`.
    pub fn double_shear_layer(nx: usize, ny: usize, rho: f64, delta: f64) -> Self {
        let (lx, ly) = (2.0 * PI, 2.0 * PI);
        let mut u = Vec::with_capacity(nx * ny);
        let mut v = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            let y = j as f64 * ly / ny as f64;
            for i in 0..nx {
                let x = i as f64 * lx / nx as f64;
                u.push(if y <= PI { (rho * (y - 0.5 * PI)).tanh() } else { (rho * (1.5 * PI - y)).tanh() });
                v.push(delta * x.sin());
            }
        }
        Self { nx, ny, lx, ly, u, v }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_sample_nodes() {
        let text = "# test grid\nnx ny Lx Ly\n2 2 2.0 4.0\n1 10\n2, 20\n3 30\n4 40\n";
        let g = GridField::parse(text).unwrap();
        assert_eq!((g.nx, g.ny), (2, 2));
        assert_eq!(g.sample(0.0, 0.0), [1.0, 10.0]);
        assert_eq!(g.sample(1.0, 0.0), [2.0, 20.0]);
        assert_eq!(g.sample(0.0, 2.0), [3.0, 30.0]);
        // midpoint of the cell and periodic wrap
        assert_eq!(g.sample(0.5, 1.0), [2.5, 25.0]);
        assert_eq!(g.sample(2.0, 4.0), [1.0, 10.0]);
        assert_eq!(g.sample(1.5, 0.0), [1.5, 15.0]);
    }

    #[test]
    fn bilinear_is_exact_for_bilinear_data() {
        let mut g = GridField::double_shear_layer(8, 8, 30.0, 0.05);
        g.lx = 8.0;
        g.ly = 8.0;
        for j in 0..8 {
            for i in 0..8 {
                g.u[j * 8 + i] = 1.0 + 2.0 * i as f64 + 3.0 * j as f64 + 0.5 * (i * j) as f64;
            }
        }
        let (x, y) = (2.3, 5.6);
        assert!((g.sample(x, y)[0] - (1.0 + 2.0 * x + 3.0 * y + 0.5 * x * y)).abs() < 1e-12);
    }

    #[test]
    fn malformed_files_are_rejected() {
        assert!(GridField::parse("").is_err());
        assert!(GridField::parse("2 2 1 1\n1 2\n").is_err());
        assert!(GridField::parse("2 2 1 1\n1 2\n1 2\n1 2\n1\n").is_err());
        assert!(GridField::parse("2.5 2 1 1\n").is_err());
    }

    #[test]
    fn write_then_load_round_trip() {
        let g = GridField::double_shear_layer(16, 12, 30.0, 0.05);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dsl.csv");
        g.write(&path).unwrap();
        assert_eq!(GridField::load(&path).unwrap(), g);
    }
}
