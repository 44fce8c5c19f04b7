//! Quadrature schemes that turn a point-process likelihood into a weighted
//! Poisson regression.
//!
//! The domain is partitioned into equal-volume grid cells with one dummy
//! point at each cell centre, so every cell is occupied and the weights
//! a_k = ν / n_k (cell volume over cell occupancy) sum to the domain volume
//! by construction. Responses are y_k = e_k / a_k with e_k the data
//! indicator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{LinearNetwork, NetworkLocation, TimeInterval, Window};
use crate::pattern::{Domain, PointPattern};

/// Data points followed by grid dummies, each with weight a_k.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuadratureScheme {
    points: Vec<[f64; 3]>,
    weights: Vec<f64>,
    n_data: usize,
    /// Cells per axis of the partition that produced the weights.
    grid_per_dim: usize,
}

impl QuadratureScheme {
    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn n_data(&self) -> usize {
        self.n_data
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn is_data(&self, j: usize) -> bool {
        j < self.n_data
    }

    pub fn grid_per_dim(&self) -> usize {
        self.grid_per_dim
    }

    /// Poisson-regression response e_j / a_j.
    pub fn response(&self, j: usize) -> f64 {
        if self.is_data(j) {
            1.0 / self.weights[j]
        } else {
            0.0
        }
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

fn cell_index(v: f64, lo: f64, step: f64, cells: usize) -> usize {
    (((v - lo) / step).floor() as usize).min(cells - 1)
}

/// Builds the scheme for a planar pattern. `target_dummy` defaults to 4n;
/// the per-axis cell count is its cube root, doubled (up to 10 times) if the
/// weight-sum invariant ever failed to hold.
pub fn build_quadrature(p: &PointPattern, target_dummy: Option<usize>) -> Result<QuadratureScheme> {
    let Domain::Planar { window, time } = p.domain() else {
        return Err(Error::DomainMismatch(
            "quadrature schemes are defined for planar patterns".into(),
        ));
    };
    let n = p.n();
    if n == 0 {
        return Err(Error::TooFewPoints { needed: 1, got: 0 });
    }
    let target = target_dummy.unwrap_or(4 * n);
    let g0 = (target as f64).cbrt().ceil().max(2.0) as usize;
    let volume = window.area() * time.length();

    for doubling in 0..=10 {
        let g = g0 << doubling;
        let scheme = assemble(p.points(), window, time, g);
        if (scheme.total_weight() - volume).abs() <= 1e-6 * volume {
            return Ok(scheme);
        }
        // A failed sum means some cell ended up empty (degenerate rounding);
        // a finer grid re-centres the dummies.
    }
    Err(Error::GridRefinementFailure { doublings: 10 })
}

fn assemble(data: &[[f64; 3]], window: &Window, time: &TimeInterval, g: usize) -> QuadratureScheme {
    let dx = (window.x_max - window.x_min) / g as f64;
    let dy = (window.y_max - window.y_min) / g as f64;
    let dt = time.length() / g as f64;
    let nu = dx * dy * dt;

    let cell_of = |p: &[f64; 3]| -> usize {
        let ix = cell_index(p[0], window.x_min, dx, g);
        let iy = cell_index(p[1], window.y_min, dy, g);
        let it = cell_index(p[2], time.start, dt, g);
        (ix * g + iy) * g + it
    };

    let n = data.len();
    let mut points = Vec::with_capacity(n + g * g * g);
    points.extend_from_slice(data);
    for ix in 0..g {
        for iy in 0..g {
            for it in 0..g {
                points.push([
                    window.x_min + (ix as f64 + 0.5) * dx,
                    window.y_min + (iy as f64 + 0.5) * dy,
                    time.start + (it as f64 + 0.5) * dt,
                ]);
            }
        }
    }

    let mut occupancy = vec![0usize; g * g * g];
    for p in &points {
        occupancy[cell_of(p)] += 1;
    }
    let weights = points.iter().map(|p| nu / occupancy[cell_of(p)] as f64).collect();
    QuadratureScheme { points, weights, n_data: n, grid_per_dim: g }
}

/// One-dimensional counterpart over the time axis, for separable fits.
pub(crate) struct AxisQuadrature {
    pub values: Vec<f64>,
    pub weights: Vec<f64>,
    pub n_data: usize,
}

impl AxisQuadrature {
    pub fn response(&self, j: usize) -> f64 {
        if j < self.n_data {
            1.0 / self.weights[j]
        } else {
            0.0
        }
    }
}

pub(crate) fn build_time_quadrature(times: &[f64], interval: &TimeInterval, target: usize) -> AxisQuadrature {
    let g = target.max(2);
    let step = interval.length() / g as f64;
    let mut values = times.to_vec();
    values.extend((0..g).map(|i| interval.start + (i as f64 + 0.5) * step));

    let mut occupancy = vec![0usize; g];
    for &t in &values {
        occupancy[cell_index(t, interval.start, step, g)] += 1;
    }
    let weights = values
        .iter()
        .map(|&t| step / occupancy[cell_index(t, interval.start, step, g)] as f64)
        .collect();
    AxisQuadrature { values, weights, n_data: times.len() }
}

/// Two-dimensional counterpart over the window, for separable fits.
pub(crate) struct SpatialQuadrature {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub n_data: usize,
}

impl SpatialQuadrature {
    pub fn response(&self, j: usize) -> f64 {
        if j < self.n_data {
            1.0 / self.weights[j]
        } else {
            0.0
        }
    }
}

pub(crate) fn build_spatial_quadrature(xy: &[[f64; 2]], window: &Window, target: usize) -> SpatialQuadrature {
    let g = (target as f64).sqrt().ceil().max(2.0) as usize;
    let dx = (window.x_max - window.x_min) / g as f64;
    let dy = (window.y_max - window.y_min) / g as f64;
    let nu = dx * dy;

    let cell_of = |p: &[f64; 2]| {
        cell_index(p[0], window.x_min, dx, g) * g + cell_index(p[1], window.y_min, dy, g)
    };

    let mut points = xy.to_vec();
    for ix in 0..g {
        for iy in 0..g {
            points.push([
                window.x_min + (ix as f64 + 0.5) * dx,
                window.y_min + (iy as f64 + 0.5) * dy,
            ]);
        }
    }
    let mut occupancy = vec![0usize; g * g];
    for p in &points {
        occupancy[cell_of(p)] += 1;
    }
    let weights = points.iter().map(|p| nu / occupancy[cell_of(p)] as f64).collect();
    SpatialQuadrature { points, weights, n_data: xy.len() }
}

/// Network counterpart: each segment is split into equal-length tiles in
/// proportion to its share of the target dummy count, one dummy per tile
/// centre, weights tile-length over tile occupancy. The returned points are
/// planar coordinates of the network locations (the regression covariates
/// are x and y).
pub(crate) fn build_network_quadrature(
    locations: &[NetworkLocation],
    net: &LinearNetwork,
    target: usize,
) -> SpatialQuadrature {
    let total = net.total_length();
    // tiles per segment, at least one each
    let tiles: Vec<usize> = net
        .segments()
        .iter()
        .map(|s| ((target as f64 * s.length / total).round() as usize).max(1))
        .collect();

    let tile_of = |loc: &NetworkLocation| -> (usize, usize) {
        let k = tiles[loc.segment];
        let len = net.segments()[loc.segment].length;
        let idx = (((loc.offset / len) * k as f64).floor() as usize).min(k - 1);
        (loc.segment, idx)
    };

    let mut all: Vec<NetworkLocation> = locations.to_vec();
    for (seg, &k) in tiles.iter().enumerate() {
        let len = net.segments()[seg].length;
        for i in 0..k {
            all.push(NetworkLocation {
                segment: seg,
                offset: (i as f64 + 0.5) * len / k as f64,
            });
        }
    }

    let mut occupancy: std::collections::HashMap<(usize, usize), usize> = std::collections::HashMap::new();
    for loc in &all {
        *occupancy.entry(tile_of(loc)).or_insert(0) += 1;
    }
    let weights = all
        .iter()
        .map(|loc| {
            let (seg, _) = tile_of(loc);
            let tile_len = net.segments()[seg].length / tiles[seg] as f64;
            tile_len / occupancy[&tile_of(loc)] as f64
        })
        .collect();
    let points = all
        .iter()
        .map(|loc| {
            let (x, y) = net.xy(loc);
            [x, y]
        })
        .collect();
    SpatialQuadrature { points, weights, n_data: locations.len() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_network;
    use crate::simulate::{rstpp, LambdaSpec};

    fn unit_pattern(points: Vec<[f64; 3]>) -> PointPattern {
        PointPattern::new_planar(points, Some(Window::unit()), Some(TimeInterval::unit())).unwrap()
    }

    #[test]
    fn single_point_on_a_4x4x4_grid_partitions_the_unit_cube() {
        let p = unit_pattern(vec![[0.3, 0.3, 0.3]]);
        let q = build_quadrature(&p, Some(64)).unwrap();
        assert_eq!(q.grid_per_dim(), 4);
        assert_eq!(q.len(), 1 + 64);
        let nu = 1.0 / 64.0;
        // the data point shares its cell with exactly one dummy
        assert!((q.weights()[0] - nu / 2.0).abs() < 1e-15);
        for (j, &w) in q.weights().iter().enumerate() {
            let occupancy = (nu / w).round();
            assert!((nu / occupancy - w).abs() < 1e-15, "weight {j} is not nu/n_k");
        }
        assert!((q.total_weight() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn data_point_at_a_dummy_position_shares_the_cell_weight() {
        // cell centre for g=4: (0.125, 0.125, 0.125)
        let p = unit_pattern(vec![[0.125, 0.125, 0.125]]);
        let q = build_quadrature(&p, Some(64)).unwrap();
        let nu = 1.0 / 64.0;
        assert!((q.weights()[0] - nu / 2.0).abs() < 1e-15);
        assert!((q.weights()[1] - nu / 2.0).abs() < 1e-15); // the dummy it landed on
    }

    #[test]
    fn weight_sum_matches_the_domain_volume_on_simulated_patterns() {
        let w = Window::new(-1.0, 3.0, 2.0, 4.0).unwrap();
        let time = TimeInterval::new(5.0, 15.0).unwrap();
        let volume = w.area() * time.length();
        let patterns = rstpp(&LambdaSpec::Constant(2.0), w, time, 99, 20).unwrap();
        for p in &patterns {
            if p.n() == 0 {
                continue;
            }
            let q = build_quadrature(p, None).unwrap();
            assert!((q.total_weight() - volume).abs() <= 1e-6 * volume);
            assert!(q.weights().iter().all(|&a| a > 0.0));
        }
    }

    #[test]
    fn responses_are_data_indicator_over_weight() {
        let p = unit_pattern(vec![[0.3, 0.3, 0.3], [0.8, 0.8, 0.8]]);
        let q = build_quadrature(&p, None).unwrap();
        assert_eq!(q.n_data(), 2);
        assert_eq!(q.response(0), 1.0 / q.weights()[0]);
        assert_eq!(q.response(q.len() - 1), 0.0);
    }

    #[test]
    fn boundary_points_are_clamped_into_the_grid() {
        let p = unit_pattern(vec![[1.0, 1.0, 1.0], [0.0, 0.0, 0.0]]);
        let q = build_quadrature(&p, Some(27)).unwrap();
        assert!((q.total_weight() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn time_quadrature_weights_sum_to_the_interval_length() {
        let interval = TimeInterval::new(2.0, 7.0).unwrap();
        let q = build_time_quadrature(&[2.5, 3.0, 6.9], &interval, 12);
        assert!((q.weights.iter().sum::<f64>() - 5.0).abs() < 1e-12);
        assert_eq!(q.response(0), 1.0 / q.weights[0]);
        assert_eq!(q.response(3), 0.0);
    }

    #[test]
    fn network_quadrature_weights_sum_to_the_total_length() {
        let net = build_network(
            &[((0.0, 0.0), (3.0, 0.0)), ((3.0, 0.0), (3.0, 1.0))],
            None,
        )
        .unwrap();
        let locs = vec![
            NetworkLocation { segment: 0, offset: 0.4 },
            NetworkLocation { segment: 1, offset: 0.9 },
        ];
        let q = build_network_quadrature(&locs, &net, 40);
        assert!((q.weights.iter().sum::<f64>() - 4.0).abs() < 1e-12);
        assert_eq!(q.n_data, 2);
        // dummies are spread in proportion to length: ~30 on the long segment
        let long = q.points.iter().skip(2).filter(|p| p[1] == 0.0).count();
        assert!(long > 2 * (q.points.len() - 2 - long), "{long} of {}", q.points.len() - 2);
    }
}
