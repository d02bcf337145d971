use super::joe_kuo::{DIRECTIONS, MAX_DIM};
use crate::error::{PinnError, Result};

const BITS: usize = 32;

/// Gray-code Sobol generator with Joe-Kuo direction numbers.
#[derive(Debug, Clone)]
pub struct SobolSequence {
    dim: usize,
    directions: Vec<[u32; BITS]>,
    state: Vec<u32>,
    index: u64,
}

impl SobolSequence {
    pub const MAX_DIM: usize = MAX_DIM;

    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(PinnError::UnsupportedDimension { dim, max: MAX_DIM });
        }
        let mut directions = Vec::with_capacity(dim);
        let mut first = [0u32; BITS];
        for (k, v) in first.iter_mut().enumerate() {
            *v = 1 << (BITS - 1 - k);
        }
        directions.push(first);
        for &(s, a, m) in DIRECTIONS.iter().take(dim - 1) {
            let s = s as usize;
            let mut v = [0u32; BITS];
            for k in 0..s.min(BITS) {
                v[k] = m[k] << (BITS - 1 - k);
            }
            for k in s..BITS {
                let mut x = v[k - s] ^ (v[k - s] >> s);
                for l in 1..s {
                    if (a >> (s - 1 - l)) & 1 == 1 {
                        x ^= v[k - l];
                    }
                }
                v[k] = x;
            }
            directions.push(v);
        }
        Ok(Self { dim, directions, state: vec![0; dim], index: 0 })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Writes the next point into `out`. The first call yields the origin.
    pub fn next_into(&mut self, out: &mut [f64]) {
        const SCALE: f64 = 1.0 / (1u64 << BITS) as f64;
        if self.index > 0 {
            let c = (self.index - 1).trailing_ones() as usize;
            assert!(c < BITS, "Sobol sequence exhausted");
            for (x, v) in self.state.iter_mut().zip(&self.directions) {
                *x ^= v[c];
            }
        }
        for (o, &x) in out.iter_mut().zip(&self.state) {
            *o = x as f64 * SCALE;
        }
        self.index += 1;
    }
}

/// First `n` Sobol points in `[0,1)^d`, skipping the initial origin,
/// row-major.
pub fn sobol_flat(n: usize, d: usize) -> Result<Vec<f64>> {
    let mut seq = SobolSequence::new(d)?;
    let mut skip = vec![0.0; d];
    seq.next_into(&mut skip);
    let mut out = vec![0.0; n * d];
    for row in out.chunks_exact_mut(d) {
        seq.next_into(row);
    }
    Ok(out)
}

/// First `n` Sobol points in `[0,1)^d`, skipping the initial origin.
pub fn sobol(n: usize, d: usize) -> Result<Vec<Vec<f64>>> {
    Ok(sobol_flat(n, d)?.chunks_exact(d).map(|c| c.to_vec()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leading_points() {
        assert_eq!(sobol(3, 1).unwrap(), vec![vec![0.5], vec![0.75], vec![0.25]]);
        assert_eq!(sobol(1, 2).unwrap(), vec![vec![0.5, 0.5]]);
    }

    #[test]
    fn matches_reference_implementation_in_high_dimensions() {
        // Unscrambled Joe-Kuo Sobol points 1..=5 of the 100-dimensional
        // sequence (columns 1, 2, 3, 10, 50, 100), from an independent
        // reference implementation.
        let expected = [
            [0.5, 0.5, 0.5, 0.5, 0.5, 0.5],
            [0.75, 0.25, 0.25, 0.75, 0.75, 0.75],
            [0.25, 0.75, 0.75, 0.25, 0.25, 0.25],
            [0.375, 0.375, 0.625, 0.625, 0.375, 0.875],
            [0.875, 0.875, 0.125, 0.125, 0.875, 0.375],
        ];
        let pts = sobol(5, 100).unwrap();
        for (row, exp) in pts.iter().zip(expected.iter()) {
            for (c, &e) in [0usize, 1, 2, 9, 49, 99].iter().zip(exp) {
                assert_eq!(row[*c], e);
            }
        }
    }

    #[test]
    fn mean_is_centered() {
        let pts = sobol_flat(4096, 2).unwrap();
        for j in 0..2 {
            let mean: f64 = pts.iter().skip(j).step_by(2).sum::<f64>() / 4096.0;
            assert!((mean - 0.5).abs() < 1e-3);
        }
    }

    #[test]
    fn points_never_hit_the_origin_face() {
        let pts = sobol_flat(1 << 12, 7).unwrap();
        assert!(pts.iter().all(|&v| v > 0.0 && v < 1.0));
    }

    #[test]
    fn dimension_limits() {
        assert!(matches!(sobol(4, 101), Err(PinnError::UnsupportedDimension { dim: 101, max: 100 })));
        assert!(sobol(4, 0).is_err());
        assert!(sobol(4, 100).is_ok());
    }
}
