//! Second-order summary statistics: the space-time K-function and pair
//! correlation, global and local, planar and network.
//!
//! Conventions that matter and are easy to get wrong:
//!
//! * The global planar K̂ counts unordered pairs with **two-sided** time
//!   lags and no edge correction, so its Poisson expectation is λ²πr²h,
//!   not πr²h. [`k_global_scaled`] divides by λ̂² = (n/|W||T|)² to get a
//!   surface comparable with the theoretical πr²h.
//! * Planar indicators are non-strict (≤), network indicators strict (<).
//!   Ties at grid values therefore land differently by design.
//! * Network pair weights divide by M = (number of network locations at
//!   exactly the pair's distance from the source point) × (2 when both
//!   t±Δt lie inside the time interval, 1 otherwise, and 1 when Δt = 0).
//! * pcf-type statistics replace indicators with product Epanechnikov
//!   kernels, bandwidths ε = 0.1·r_max and δ = 0.1·h_max.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{SourceDistances, TimeInterval};
use crate::intensity::IntensityValues;
use crate::pattern::PointPattern;

/// Evaluation grid: increasing positive spatial distances and time lags.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridSpec {
    r_values: Vec<f64>,
    h_values: Vec<f64>,
}

impl GridSpec {
    pub fn new(r_values: Vec<f64>, h_values: Vec<f64>) -> Result<Self> {
        for (name, vals) in [("r", &r_values), ("h", &h_values)] {
            if vals.is_empty() {
                return Err(Error::InvalidParams(format!("{name} grid is empty")));
            }
            if vals[0] <= 0.0 || !vals.iter().all(|v| v.is_finite()) {
                return Err(Error::InvalidParams(format!(
                    "{name} grid must be positive and finite"
                )));
            }
            if vals.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidParams(format!(
                    "{name} grid must be strictly increasing"
                )));
            }
        }
        Ok(GridSpec { r_values, h_values })
    }

    /// Default grid: 20 equally spaced values each way, r up to ¼ of the
    /// maximum pairwise distance (shortest-path on networks, ignoring
    /// unreachable pairs) and h up to ¼ of the time interval.
    pub fn default_for(p: &PointPattern) -> Result<Self> {
        if p.n() < 2 {
            return Err(Error::TooFewPoints { needed: 2, got: p.n() });
        }
        let max_d = match p.locations() {
            None => {
                let pts = p.points();
                let mut max_d: f64 = 0.0;
                for i in 0..pts.len() {
                    for j in (i + 1)..pts.len() {
                        let d = (pts[i][0] - pts[j][0]).hypot(pts[i][1] - pts[j][1]);
                        max_d = max_d.max(d);
                    }
                }
                max_d
            }
            Some(locs) => {
                let net = p.network().unwrap();
                let mut max_d: f64 = 0.0;
                for i in 0..locs.len() {
                    let sources = SourceDistances::new(net, &locs[i])?;
                    for loc in &locs[i + 1..] {
                        let d = sources.distance_to(loc);
                        if d.is_finite() {
                            max_d = max_d.max(d);
                        }
                    }
                }
                max_d
            }
        };
        if max_d <= 0.0 {
            return Err(Error::InvalidParams(
                "all points are spatially coincident; no usable distance grid".into(),
            ));
        }
        let r_max = max_d / 4.0;
        let h_max = p.time_interval().length() / 4.0;
        let spread = |max: f64| (1..=20).map(|k| max * k as f64 / 20.0).collect();
        GridSpec::new(spread(r_max), spread(h_max))
    }

    pub fn r_values(&self) -> &[f64] {
        &self.r_values
    }

    pub fn h_values(&self) -> &[f64] {
        &self.h_values
    }

    pub fn r_max(&self) -> f64 {
        *self.r_values.last().unwrap()
    }

    pub fn h_max(&self) -> f64 {
        *self.h_values.last().unwrap()
    }

    fn zeros(&self) -> Vec<Vec<f64>> {
        vec![vec![0.0; self.h_values.len()]; self.r_values.len()]
    }

    /// First r-index whose cell contains distance d, or None past the grid.
    fn r_bin(&self, d: f64, strict: bool) -> Option<usize> {
        let idx = if strict {
            self.r_values.partition_point(|&v| v <= d)
        } else {
            self.r_values.partition_point(|&v| v < d)
        };
        (idx < self.r_values.len()).then_some(idx)
    }

    fn h_bin(&self, dt: f64, strict: bool) -> Option<usize> {
        let idx = if strict {
            self.h_values.partition_point(|&v| v <= dt)
        } else {
            self.h_values.partition_point(|&v| v < dt)
        };
        (idx < self.h_values.len()).then_some(idx)
    }
}

/// Trapezoidal integration weights for values sampled at `xs` (ascending).
pub(crate) fn trapezoid_weights(xs: &[f64]) -> Vec<f64> {
    let m = xs.len();
    if m == 1 {
        return vec![1.0];
    }
    (0..m)
        .map(|i| {
            if i == 0 {
                (xs[1] - xs[0]) / 2.0
            } else if i == m - 1 {
                (xs[m - 1] - xs[m - 2]) / 2.0
            } else {
                (xs[i + 1] - xs[i - 1]) / 2.0
            }
        })
        .collect()
}

/// Turns binned pair weights into a cumulative surface: cell (a, b) ends up
/// holding the sum of all weights with r-bin ≤ a and h-bin ≤ b.
fn accumulate(mut m: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    for row in &mut m {
        for j in 1..row.len() {
            row[j] += row[j - 1];
        }
    }
    for i in 1..m.len() {
        for j in 0..m[i].len() {
            m[i][j] += m[i - 1][j];
        }
    }
    m
}

pub(crate) fn theo_planar(grid: &GridSpec) -> Vec<Vec<f64>> {
    grid.r_values
        .iter()
        .map(|&r| {
            grid.h_values
                .iter()
                .map(|&h| std::f64::consts::PI * r * r * h)
                .collect()
        })
        .collect()
}

pub(crate) fn theo_network(grid: &GridSpec) -> Vec<Vec<f64>> {
    grid.r_values
        .iter()
        .map(|&r| grid.h_values.iter().map(|&h| r * h).collect())
        .collect()
}

/// A K-type surface on a grid, with the theoretical Poisson benchmark
/// (πr²h on the plane, r·h on networks).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KSurface {
    pub grid: GridSpec,
    pub values: Vec<Vec<f64>>,
    pub theo: Vec<Vec<f64>>,
}

impl KSurface {
    /// Long-format export: one row per grid node.
    pub fn to_csv_writer<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["r", "h", "value", "theo"])?;
        for (i, &r) in self.grid.r_values().iter().enumerate() {
            for (j, &h) in self.grid.h_values().iter().enumerate() {
                wtr.write_record([
                    crate::pattern::format_float(r),
                    crate::pattern::format_float(h),
                    crate::pattern::format_float(self.values[i][j]),
                    crate::pattern::format_float(self.theo[i][j]),
                ])?;
            }
        }
        wtr.flush()?;
        Ok(())
    }

    /// Grid sum of squared differences between the surface and its
    /// theoretical benchmark.
    pub fn sum_squared_diff(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.theo)
            .flat_map(|(vr, tr)| vr.iter().zip(tr).map(|(v, t)| (v - t) * (v - t)))
            .sum()
    }
}

/// The local surface attached to one point. pcf-type surfaces also record
/// the kernel bandwidths that produced them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ListaSurface {
    pub point_index: usize,
    pub grid: GridSpec,
    pub values: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub delta: Option<f64>,
}

/// Which local statistic to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistic {
    K,
    Pcf,
}

/// Network local surfaces plus how many point pairs were dropped for being
/// on mutually unreachable components.
#[derive(Debug, Clone)]
pub struct NetworkLista {
    pub surfaces: Vec<ListaSurface>,
    pub excluded_pairs: usize,
}

fn require_planar(p: &PointPattern) -> Result<()> {
    if p.is_network() {
        return Err(Error::DomainMismatch(
            "planar statistic requested for a network pattern".into(),
        ));
    }
    Ok(())
}

fn check_lambda(p: &PointPattern, lambda: &IntensityValues) -> Result<()> {
    if lambda.len() != p.n() {
        return Err(Error::LengthMismatch { expected: p.n(), got: lambda.len() });
    }
    Ok(())
}

fn euclid(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Bins every unordered pair by (distance, lag) with a pair weight, then
/// accumulates; shared by all the global planar estimators.
fn pair_surface(
    p: &PointPattern,
    grid: &GridSpec,
    mut weight: impl FnMut(usize, usize) -> f64,
) -> Vec<Vec<f64>> {
    let pts = p.points();
    let mut acc = grid.zeros();
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            let (Some(ir), Some(ih)) = (
                grid.r_bin(euclid(&pts[i], &pts[j]), false),
                grid.h_bin((pts[i][2] - pts[j][2]).abs(), false),
            ) else {
                continue;
            };
            acc[ir][ih] += weight(i, j);
        }
    }
    accumulate(acc)
}

/// Global K̂(r,h) = (1/|W||T|) Σ_{i<j} 1(‖u_i−u_j‖ ≤ r, |t_i−t_j| ≤ h).
pub fn k_global(p: &PointPattern, grid: &GridSpec) -> Result<KSurface> {
    require_planar(p)?;
    if p.n() < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: p.n() });
    }
    let inv = 1.0 / p.volume();
    let values = pair_surface(p, grid, |_, _| inv);
    Ok(KSurface { grid: grid.clone(), values, theo: theo_planar(grid) })
}

/// K̂ divided by λ̂² = (n/|W||T|)²: the variant whose homogeneous-Poisson
/// expectation is close to πr²h (up to edge effects), used for benchmark
/// comparisons.
pub fn k_global_scaled(p: &PointPattern, grid: &GridSpec) -> Result<KSurface> {
    let mut surface = k_global(p, grid)?;
    let lambda_hat = p.n() as f64 / p.volume();
    let scale = 1.0 / (lambda_hat * lambda_hat);
    for row in &mut surface.values {
        for v in row.iter_mut() {
            *v *= scale;
        }
    }
    Ok(surface)
}

/// Inhomogeneous K̂_I(r,h) = (|W||T|/(n(n−1))) Σ_{i<j} 1(...)/(λ̂_i λ̂_j),
/// exactly as printed.
pub fn k_inhom_global(
    p: &PointPattern,
    lambda: &IntensityValues,
    grid: &GridSpec,
) -> Result<KSurface> {
    require_planar(p)?;
    if p.n() < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: p.n() });
    }
    check_lambda(p, lambda)?;
    let lam = lambda.values();
    let pref = p.volume() / (p.n() as f64 * (p.n() as f64 - 1.0));
    let values = pair_surface(p, grid, |i, j| pref / (lam[i] * lam[j]));
    Ok(KSurface { grid: grid.clone(), values, theo: theo_planar(grid) })
}

/// The same weighted pair sum with the Campbell-unbiased prefactor
/// 1/(|W||T|): its expectation under the true intensity is πr²h (up to
/// edge effects), which is what the goodness-of-fit comparison wants.
pub fn k_inhom_global_unbiased(
    p: &PointPattern,
    lambda: &IntensityValues,
    grid: &GridSpec,
) -> Result<KSurface> {
    require_planar(p)?;
    if p.n() < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: p.n() });
    }
    check_lambda(p, lambda)?;
    let lam = lambda.values();
    let inv = 1.0 / p.volume();
    let values = pair_surface(p, grid, |i, j| inv / (lam[i] * lam[j]));
    Ok(KSurface { grid: grid.clone(), values, theo: theo_planar(grid) })
}

fn epanechnikov(x: f64, bw: f64) -> f64 {
    let u = x / bw;
    if u.abs() < 1.0 {
        0.75 * (1.0 - u * u) / bw
    } else {
        0.0
    }
}

/// Local planar surface of one point. `lambda = None` is the homogeneous
/// weighting λ̂ = n/(|W||T|). Used directly by the permutation test, which
/// only ever needs one point's surface per permuted pattern.
pub fn lista_planar_single(
    p: &PointPattern,
    index: usize,
    lambda: Option<&IntensityValues>,
    statistic: Statistic,
    grid: &GridSpec,
) -> ListaSurface {
    let pts = p.points();
    let n = pts.len() as f64;
    let volume = p.volume();
    // pair weight 1/(λ_i λ_j |W||T|); homogeneous λ̂ = n/|W||T| makes it
    // |W||T|/n² for every pair
    let weight = |j: usize| -> f64 {
        match lambda {
            None => volume / (n * n),
            Some(lam) => 1.0 / (lam.values()[index] * lam.values()[j] * volume),
        }
    };
    match statistic {
        Statistic::K => {
            let mut acc = grid.zeros();
            for j in 0..pts.len() {
                if j == index {
                    continue;
                }
                let (Some(ir), Some(ih)) = (
                    grid.r_bin(euclid(&pts[index], &pts[j]), false),
                    grid.h_bin((pts[index][2] - pts[j][2]).abs(), false),
                ) else {
                    continue;
                };
                acc[ir][ih] += weight(j);
            }
            ListaSurface {
                point_index: index,
                grid: grid.clone(),
                values: accumulate(acc),
                epsilon: None,
                delta: None,
            }
        }
        Statistic::Pcf => {
            let eps = 0.1 * grid.r_max();
            let delta = 0.1 * grid.h_max();
            let mut values = grid.zeros();
            for j in 0..pts.len() {
                if j == index {
                    continue;
                }
                let d = euclid(&pts[index], &pts[j]);
                let dt = (pts[index][2] - pts[j][2]).abs();
                let w = weight(j) * volume; // the 1/|W||T| lives in the prefactor below
                for (a, &r) in grid.r_values().iter().enumerate() {
                    let ks = epanechnikov(d - r, eps);
                    if ks == 0.0 {
                        continue;
                    }
                    for (b, &h) in grid.h_values().iter().enumerate() {
                        let kt = epanechnikov(dt - h, delta);
                        if kt != 0.0 {
                            values[a][b] += ks * kt * w;
                        }
                    }
                }
            }
            // (n−1)/(4πr|W||T|) prefactor of the local product density
            for (a, &r) in grid.r_values().iter().enumerate() {
                let pref = (n - 1.0) / (4.0 * std::f64::consts::PI * r * volume);
                for v in &mut values[a] {
                    *v *= pref;
                }
            }
            ListaSurface {
                point_index: index,
                grid: grid.clone(),
                values,
                epsilon: Some(eps),
                delta: Some(delta),
            }
        }
    }
}

/// Local K or pcf surfaces for every point of a planar pattern.
pub fn lista_planar(
    p: &PointPattern,
    lambda: Option<&IntensityValues>,
    statistic: Statistic,
    grid: &GridSpec,
) -> Result<Vec<ListaSurface>> {
    require_planar(p)?;
    if p.n() < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: p.n() });
    }
    if let Some(lam) = lambda {
        check_lambda(p, lam)?;
    }
    Ok((0..p.n())
        .into_par_iter()
        .map(|i| lista_planar_single(p, i, lambda, statistic, grid))
        .collect())
}

/// 2 when both t ± Δt stay inside the interval and Δt > 0, otherwise 1:
/// the number of time points at lag exactly Δt from t.
pub fn temporal_multiplicity(time: &TimeInterval, t: f64, dt: f64) -> f64 {
    if dt > 0.0 && time.contains(t - dt) && time.contains(t + dt) {
        2.0
    } else {
        1.0
    }
}

/// Local network surface of one point; returns the surface and the number
/// of companions skipped as unreachable.
pub fn lista_network_single(
    p: &PointPattern,
    index: usize,
    lambda: &IntensityValues,
    statistic: Statistic,
    grid: &GridSpec,
) -> Result<(ListaSurface, usize)> {
    let net = p.network().expect("checked by caller").clone();
    let locs = p.locations().expect("network pattern");
    let pts = p.points();
    let time = p.time_interval();
    let lam = lambda.values();
    let volume = p.volume();
    let sources = SourceDistances::new(&net, &locs[index])?;
    let mut excluded = 0usize;

    let mut pairs: Vec<(f64, f64, f64)> = Vec::with_capacity(pts.len() - 1); // (d, dt, weight)
    for j in 0..pts.len() {
        if j == index {
            continue;
        }
        let d = sources.distance_to(&locs[j]);
        if !d.is_finite() {
            excluded += 1;
            continue;
        }
        let dt = (pts[index][2] - pts[j][2]).abs();
        let m = sources.count_at_distance(d) as f64 * temporal_multiplicity(&time, pts[index][2], dt);
        pairs.push((d, dt, 1.0 / (lam[index] * lam[j] * m * volume)));
    }

    let surface = match statistic {
        Statistic::K => {
            let mut acc = grid.zeros();
            for &(d, dt, w) in &pairs {
                let (Some(ir), Some(ih)) = (grid.r_bin(d, true), grid.h_bin(dt, true)) else {
                    continue;
                };
                acc[ir][ih] += w;
            }
            ListaSurface {
                point_index: index,
                grid: grid.clone(),
                values: accumulate(acc),
                epsilon: None,
                delta: None,
            }
        }
        Statistic::Pcf => {
            let eps = 0.1 * grid.r_max();
            let delta = 0.1 * grid.h_max();
            let mut values = grid.zeros();
            for &(d, dt, w) in &pairs {
                for (a, &r) in grid.r_values().iter().enumerate() {
                    let ks = epanechnikov(d - r, eps);
                    if ks == 0.0 {
                        continue;
                    }
                    for (b, &h) in grid.h_values().iter().enumerate() {
                        let kt = epanechnikov(dt - h, delta);
                        if kt != 0.0 {
                            values[a][b] += ks * kt * w;
                        }
                    }
                }
            }
            ListaSurface {
                point_index: index,
                grid: grid.clone(),
                values,
                epsilon: Some(eps),
                delta: Some(delta),
            }
        }
    };
    Ok((surface, excluded))
}

/// The normalization D(X) = ((n−1)/(|L||T|)) Σ_i Σ_{j≠i} 1/(λ̂_i λ̂_j).
pub fn network_normalizer(p: &PointPattern, lambda: &IntensityValues) -> f64 {
    let lam = lambda.values();
    let n = lam.len();
    let inv_sum: f64 = lam.iter().map(|l| 1.0 / l).sum();
    // Σ_i Σ_{j≠i} 1/(λ_i λ_j) = (Σ 1/λ)² − Σ 1/λ²
    let sq_sum: f64 = lam.iter().map(|l| 1.0 / (l * l)).sum();
    (n as f64 - 1.0) / p.volume() * (inv_sum * inv_sum - sq_sum)
}

/// Local K or pcf surfaces for every point of a network pattern, weighted
/// by λ̂ and the distance-multiplicity M; `normalize` divides by D(X).
pub fn lista_network(
    p: &PointPattern,
    lambda: &IntensityValues,
    statistic: Statistic,
    normalize: bool,
    grid: &GridSpec,
) -> Result<NetworkLista> {
    if !p.is_network() {
        return Err(Error::DomainMismatch(
            "network statistic requested for a planar pattern".into(),
        ));
    }
    if p.n() < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: p.n() });
    }
    check_lambda(p, lambda)?;
    let per_point: Vec<(ListaSurface, usize)> = (0..p.n())
        .into_par_iter()
        .map(|i| lista_network_single(p, i, lambda, statistic, grid))
        .collect::<Result<_>>()?;
    let excluded_pairs = per_point.iter().map(|(_, e)| e).sum();
    let mut surfaces: Vec<ListaSurface> = per_point.into_iter().map(|(s, _)| s).collect();
    if normalize {
        let d = network_normalizer(p, lambda);
        for s in &mut surfaces {
            for row in &mut s.values {
                for v in row.iter_mut() {
                    *v /= d;
                }
            }
        }
    }
    Ok(NetworkLista { surfaces, excluded_pairs })
}
