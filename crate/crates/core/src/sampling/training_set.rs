use std::io::Write;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::gauss::gauss_legendre_composite;
use super::random::{open_unit, stream_rng};
use super::rule::{QuadratureKind, QuadratureRule};
use super::sobol::sobol_flat;
use super::SpaceTimeBox;
use crate::error::{PinnError, Result};

/// Gauss-Legendre nodes per cell and axis used for training sets.
pub const GAUSS_NODES_PER_CELL: usize = 4;

/// How spatial-boundary collocation is laid out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryLayout {
    /// Points on every face, spread in proportion to face measure.
    Faces,
    /// Points on the lower face of each axis, each paired with its image
    /// on the opposite face.
    PeriodicPairs,
}

/// Requested collocation counts. For periodic layouts `n_sb` counts pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetCounts {
    pub n_int: usize,
    pub n_sb: usize,
    pub n_tb: usize,
}

/// Spatial-boundary rule plus face bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySet {
    pub rule: QuadratureRule,
    /// Face id `2 * axis + side` of every point.
    pub faces: Vec<usize>,
    /// Row-major partner points for periodic layouts.
    pub partners: Option<Vec<f64>>,
}

impl BoundarySet {
    /// Indices of the points on `face`.
    pub fn face_indices(&self, face: usize) -> Vec<usize> {
        self.faces.iter().enumerate().filter(|(_, &f)| f == face).map(|(i, _)| i).collect()
    }
}

/// Interior, spatial-boundary and temporal-boundary point sets.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    pub geometry: SpaceTimeBox,
    pub layout: BoundaryLayout,
    pub kind: QuadratureKind,
    pub seed: u64,
    pub interior: QuadratureRule,
    pub spatial_boundary: BoundarySet,
    pub temporal_boundary: QuadratureRule,
}

impl TrainingSet {
    pub fn n_int(&self) -> usize {
        self.interior.len()
    }

    pub fn n_sb(&self) -> usize {
        self.spatial_boundary.rule.len()
    }

    pub fn n_tb(&self) -> usize {
        self.temporal_boundary.len()
    }

    /// Writes all points as CSV with columns `t, x1..xd, weight, set`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_csv_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn write_csv_to<W: Write>(&self, w: &mut W) -> Result<()> {
        let d = self.geometry.spatial_dim();
        let mut header = vec!["t".to_string()];
        header.extend((1..=d).map(|i| format!("x{i}")));
        header.push("weight".into());
        header.push("set".into());
        writeln!(w, "{}", header.join(","))?;
        let mut dump = |rule_points: &[f64], weights: &[f64], tag: &str| -> std::io::Result<()> {
            for (p, wt) in rule_points.chunks_exact(d + 1).zip(weights) {
                let cols: Vec<String> = p.iter().map(|v| v.to_string()).collect();
                writeln!(w, "{},{},{}", cols.join(","), wt, tag)?;
            }
            Ok(())
        };
        dump(&self.interior.points, &self.interior.weights, "int")?;
        dump(&self.spatial_boundary.rule.points, &self.spatial_boundary.rule.weights, "sb")?;
        if let Some(p) = &self.spatial_boundary.partners {
            dump(p, &self.spatial_boundary.rule.weights, "sb_partner")?;
        }
        dump(&self.temporal_boundary.points, &self.temporal_boundary.weights, "tb")?;
        Ok(())
    }
}

/// Splits `n` into integer parts proportional to `measures` by the
/// largest-remainder rule (ties go to the lower index).
pub fn allocate(n: usize, measures: &[f64]) -> Vec<usize> {
    let total: f64 = measures.iter().sum();
    let exact: Vec<f64> = measures.iter().map(|m| n as f64 * m / total).collect();
    let mut parts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut left = n - parts.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..measures.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - parts[a] as f64;
        let rb = exact[b] - parts[b] as f64;
        rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
    });
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        parts[i] += 1;
        left -= 1;
    }
    parts
}

/// Maps unit-cube coordinates into `(lo, hi)`, keeping results strictly
/// inside the open interval.
fn map_open(u: f64, lo: f64, hi: f64) -> f64 {
    let v = lo + u * (hi - lo);
    let eps = 4.0 * f64::EPSILON * lo.abs().max(hi.abs()).max(hi - lo);
    v.clamp(lo + eps, hi - eps)
}

/// Unit-cube samples for a set of `n` points in dimension `dim`.
fn unit_samples(kind: QuadratureKind, n: usize, dim: usize, seed: u64, stream: u64) -> Result<Vec<f64>> {
    match kind {
        QuadratureKind::Sobol => sobol_flat(n, dim),
        QuadratureKind::MonteCarlo => {
            let mut rng = stream_rng(seed, stream);
            Ok((0..n * dim).map(|_| open_unit(&mut rng)).collect())
        }
        QuadratureKind::GaussLegendre => unreachable!("Gauss rules are built directly"),
    }
}

/// Gauss cells per axis so that the rule has about `n` points.
fn gauss_cells(n: usize, dim: usize) -> usize {
    let per_cell = (GAUSS_NODES_PER_CELL as f64).powi(dim as i32);
    ((n as f64 / per_cell).powf(1.0 / dim as f64).round() as usize).max(1)
}

fn alpha(kind: QuadratureKind, dim: usize) -> f64 {
    match kind {
        QuadratureKind::Sobol => 1.0,
        QuadratureKind::MonteCarlo => 0.5,
        QuadratureKind::GaussLegendre => 2.0 * GAUSS_NODES_PER_CELL as f64 / dim as f64,
    }
}

/// Rule on the box `(lo, hi)` in `dim = lo.len()` dimensions.
fn box_rule(kind: QuadratureKind, n: usize, lo: &[f64], hi: &[f64], seed: u64, stream: u64) -> Result<QuadratureRule> {
    let dim = lo.len();
    let measure: f64 = lo.iter().zip(hi).map(|(l, h)| h - l).product();
    if kind == QuadratureKind::GaussLegendre {
        return gauss_legendre_composite(gauss_cells(n, dim), GAUSS_NODES_PER_CELL, lo, hi);
    }
    let mut pts = unit_samples(kind, n, dim, seed, stream)?;
    for row in pts.chunks_exact_mut(dim) {
        for (a, v) in row.iter_mut().enumerate() {
            *v = map_open(*v, lo[a], hi[a]);
        }
    }
    Ok(QuadratureRule::equal_weight(dim, pts, measure, kind, alpha(kind, dim)))
}

const STREAM_INTERIOR: u64 = 0;
const STREAM_TEMPORAL: u64 = 1;
const STREAM_FACE0: u64 = 2;

/// Builds interior, spatial-boundary and temporal-boundary sets.
///
/// Equal weights `measure / N` are used for Sobol and Monte-Carlo points
/// and product weights for Gauss-Legendre. Gauss counts are rounded to
/// whole tensor grids.
pub fn build_training_set(
    geometry: &SpaceTimeBox,
    layout: BoundaryLayout,
    counts: SetCounts,
    kind: QuadratureKind,
    seed: u64,
) -> Result<TrainingSet> {
    if counts.n_int == 0 || counts.n_sb == 0 || counts.n_tb == 0 {
        return Err(PinnError::EmptyRule(format!(
            "training set counts must be positive (int {}, sb {}, tb {})",
            counts.n_int, counts.n_sb, counts.n_tb
        )));
    }
    let d = geometry.spatial_dim();
    let interior = box_rule(kind, counts.n_int, &geometry.lower_full(), &geometry.upper_full(), seed, STREAM_INTERIOR)?;

    let mut tb = box_rule(kind, counts.n_tb, &geometry.lower, &geometry.upper, seed, STREAM_TEMPORAL)?;
    tb.points = tb.points.chunks_exact(d).flat_map(|x| std::iter::once(0.0).chain(x.iter().copied())).collect();
    tb.dim = d + 1;

    let faces: Vec<usize> = match layout {
        BoundaryLayout::Faces => (0..geometry.n_faces()).collect(),
        BoundaryLayout::PeriodicPairs => (0..d).map(|a| 2 * a).collect(),
    };
    let measures: Vec<f64> = faces.iter().map(|&f| geometry.face_measure(f)).collect();
    let per_face = allocate(counts.n_sb, &measures);
    let mut sb = QuadratureRule { dim: d + 1, points: vec![], weights: vec![], kind, rate_alpha: alpha(kind, d) };
    let mut face_ids = Vec::new();
    let mut partners = Vec::new();
    for (&face, &n_f) in faces.iter().zip(&per_face) {
        if n_f == 0 {
            continue;
        }
        let axis = face / 2;
        // face coordinates: t followed by the tangential axes
        let mut lo = vec![0.0];
        let mut hi = vec![geometry.t_final];
        for a in (0..d).filter(|&a| a != axis) {
            lo.push(geometry.lower[a]);
            hi.push(geometry.upper[a]);
        }
        let r = box_rule(kind, n_f, &lo, &hi, seed, STREAM_FACE0 + face as u64)?;
        let fixed = if face % 2 == 0 { geometry.lower[axis] } else { geometry.upper[axis] };
        let mut pts = Vec::with_capacity(r.len() * (d + 1));
        for q in r.points.chunks_exact(d) {
            let mut y = Vec::with_capacity(d + 1);
            y.push(q[0]);
            let mut tang = q[1..].iter();
            for a in 0..d {
                y.push(if a == axis { fixed } else { *tang.next().unwrap() });
            }
            if layout == BoundaryLayout::PeriodicPairs {
                let mut p = y.clone();
                p[axis + 1] = geometry.upper[axis];
                partners.extend(p);
            }
            pts.extend(y);
        }
        face_ids.extend(std::iter::repeat(face).take(r.len()));
        sb.extend(QuadratureRule { dim: d + 1, points: pts, weights: r.weights, kind, rate_alpha: r.rate_alpha });
    }
    let spatial_boundary = BoundarySet {
        rule: sb,
        faces: face_ids,
        partners: (layout == BoundaryLayout::PeriodicPairs).then_some(partners),
    };
    Ok(TrainingSet {
        geometry: geometry.clone(),
        layout,
        kind,
        seed,
        interior,
        spatial_boundary,
        temporal_boundary: tb,
    })
}

/// `n` i.i.d. uniform points in the space-time box.
pub fn random_box_points(geometry: &SpaceTimeBox, n: usize, seed: u64) -> Vec<f64> {
    let lo = geometry.lower_full();
    let hi = geometry.upper_full();
    let mut rng = stream_rng(seed, 0);
    let mut out = Vec::with_capacity(n * lo.len());
    for _ in 0..n {
        for a in 0..lo.len() {
            let u: f64 = rng.gen();
            out.push(lo[a] + u * (hi[a] - lo[a]));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn heat1d() -> SpaceTimeBox {
        SpaceTimeBox::cube(1.0, 1, -1.0, 1.0).unwrap()
    }

    #[test]
    fn heat_1d_faces_split_evenly() {
        let ts = build_training_set(
            &heat1d(),
            BoundaryLayout::Faces,
            SetCounts { n_int: 16, n_sb: 8, n_tb: 4 },
            QuadratureKind::Sobol,
            0,
        )
        .unwrap();
        let sb = &ts.spatial_boundary;
        assert_eq!(sb.face_indices(0).len(), 4);
        assert_eq!(sb.face_indices(1).len(), 4);
        for i in 0..8 {
            let p = sb.rule.point(i);
            assert!(p[0] > 0.0 && p[0] < 1.0);
            assert_eq!(p[1], if sb.faces[i] == 0 { -1.0 } else { 1.0 });
        }
        assert!((sb.rule.total_weight() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn temporal_points_at_time_zero_and_interior_weights() {
        for kind in [QuadratureKind::Sobol, QuadratureKind::MonteCarlo, QuadratureKind::GaussLegendre] {
            let ts = build_training_set(
                &heat1d(),
                BoundaryLayout::Faces,
                SetCounts { n_int: 64, n_sb: 8, n_tb: 16 },
                kind,
                5,
            )
            .unwrap();
            assert!(ts.temporal_boundary.points.chunks_exact(2).all(|p| p[0] == 0.0));
            assert!((ts.interior.total_weight() - 2.0).abs() < 1e-12);
            assert!((ts.temporal_boundary.total_weight() - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_counts_rejected() {
        let r = build_training_set(
            &heat1d(),
            BoundaryLayout::Faces,
            SetCounts { n_int: 0, n_sb: 8, n_tb: 4 },
            QuadratureKind::Sobol,
            0,
        );
        assert!(matches!(r, Err(PinnError::EmptyRule(_))));
    }

    #[test]
    fn periodic_pairs_match_across_faces() {
        let g = SpaceTimeBox::cube(1.0, 2, -8.0, 8.0).unwrap();
        let ts = build_training_set(
            &g,
            BoundaryLayout::PeriodicPairs,
            SetCounts { n_int: 32, n_sb: 10, n_tb: 8 },
            QuadratureKind::MonteCarlo,
            1,
        )
        .unwrap();
        let sb = &ts.spatial_boundary;
        let partners = sb.partners.as_ref().unwrap();
        assert_eq!(sb.rule.len(), 10);
        for i in 0..10 {
            let p = sb.rule.point(i);
            let q = &partners[i * 3..i * 3 + 3];
            let axis = sb.faces[i] / 2;
            assert_eq!(p[axis + 1], -8.0);
            assert_eq!(q[axis + 1], 8.0);
            for a in 0..3 {
                if a != axis + 1 {
                    assert_eq!(p[a], q[a]);
                }
            }
        }
    }

    #[test]
    fn allocation_follows_measure() {
        assert_eq!(allocate(8, &[1.0, 1.0]), vec![4, 4]);
        assert_eq!(allocate(7, &[1.0, 1.0]), vec![4, 3]);
        assert_eq!(allocate(10, &[3.0, 1.0, 1.0]), vec![6, 2, 2]);
    }

    #[test]
    fn csv_has_header_and_all_rows() {
        let ts = build_training_set(
            &heat1d(),
            BoundaryLayout::Faces,
            SetCounts { n_int: 5, n_sb: 2, n_tb: 3 },
            QuadratureKind::Sobol,
            0,
        )
        .unwrap();
        let mut buf = Vec::new();
        ts.write_csv_to(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "t,x1,weight,set");
        assert_eq!(lines.len(), 11);
    }

    proptest! {
        #[test]
        fn points_inside_their_sets(seed in 0u64..1000, d in 1usize..4, n in 1usize..40) {
            let g = SpaceTimeBox::new(0.7, vec![-1.0; d], (0..d).map(|a| 1.0 + a as f64).collect()).unwrap();
            let ts = build_training_set(&g, BoundaryLayout::Faces, SetCounts { n_int: n, n_sb: n, n_tb: n }, QuadratureKind::MonteCarlo, seed).unwrap();
            for p in ts.interior.points.chunks_exact(d + 1) {
                prop_assert!(p[0] > 0.0 && p[0] < 0.7);
                for a in 0..d {
                    prop_assert!(p[a + 1] > g.lower[a] && p[a + 1] < g.upper[a]);
                }
            }
            let sb = &ts.spatial_boundary;
            for i in 0..sb.rule.len() {
                let p = sb.rule.point(i);
                let axis = sb.faces[i] / 2;
                let want = if sb.faces[i] % 2 == 0 { g.lower[axis] } else { g.upper[axis] };
                prop_assert_eq!(p[axis + 1], want);
            }
            if (0..g.n_faces()).all(|f| !sb.face_indices(f).is_empty()) {
                prop_assert!((sb.rule.total_weight() - g.boundary_measure() * 0.7).abs() < 1e-12 * g.boundary_measure());
            }
            prop_assert!((ts.interior.total_weight() - g.volume()).abs() < 1e-12 * g.volume());
        }
    }
}
