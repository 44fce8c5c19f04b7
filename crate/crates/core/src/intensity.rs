//! Kernel estimates of the first-order intensity at the data points.
//!
//! The estimate is a plain sum of product Gaussian kernels with no edge
//! correction:
//!
//! ```text
//! λ̂(u_i, t_i) = Σ_j k_σs(dist(u_i, u_j)) · k_σt(|t_i − t_j|)
//! ```
//!
//! On planar windows `dist` is Euclidean and the spatial kernel integrates
//! to one over the plane; on networks `dist` is the shortest-path metric and
//! the kernel integrates to one along a line, so values come out per unit
//! *length* and time. Unreachable pairs (disjoint components) contribute
//! nothing. Values are floored at `1e-10 · n / volume` so the reciprocal
//! weights used by the inhomogeneous statistics stay finite.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::pattern::{quantile_sorted, PointPattern};

/// Spatial or temporal smoothing bandwidth: a fixed value, or Silverman's
/// rule computed from the data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth {
    Auto,
    Fixed(f64),
}

impl Bandwidth {
    pub(crate) fn resolve(self, auto: f64) -> Result<f64> {
        match self {
            Bandwidth::Auto => Ok(auto),
            Bandwidth::Fixed(b) if b > 0.0 && b.is_finite() => Ok(b),
            Bandwidth::Fixed(b) => Err(Error::InvalidParams(format!(
                "bandwidth must be positive and finite, got {b}"
            ))),
        }
    }
}

/// Silverman's rule of thumb: `0.9 · min(sd, IQR/1.34) · n^(−1/5)`, with the
/// usual fallbacks when the sample is degenerate (zero spread): the standard
/// deviation, then the first value's magnitude, then 1.
pub fn silverman_bandwidth(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    let sd = var.sqrt();
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    let mut lo = sd.min(iqr / 1.34);
    if lo == 0.0 {
        lo = if sd > 0.0 {
            sd
        } else if values[0] != 0.0 {
            values[0].abs()
        } else {
            1.0
        };
    }
    0.9 * lo * n.powf(-0.2)
}

/// Default bandwidths for a pattern: temporal rule on t, spatial rule as the
/// mean of the x and y rules. Shared by the local-fit kernel weights.
pub fn auto_bandwidths(p: &PointPattern) -> (f64, f64) {
    let col = |k: usize| -> Vec<f64> { p.points().iter().map(|q| q[k]).collect() };
    let bw_s = 0.5 * (silverman_bandwidth(&col(0)) + silverman_bandwidth(&col(1)));
    let bw_t = silverman_bandwidth(&col(2));
    (bw_s, bw_t)
}

/// First-order intensity values aligned with a pattern's points, plus the
/// bandwidths that produced them (NaN for constant vectors).
#[derive(Debug, Clone)]
pub struct IntensityValues {
    values: Vec<f64>,
    pub bw_s: f64,
    pub bw_t: f64,
}

impl IntensityValues {
    /// Wraps externally supplied values, rejecting nonpositive entries.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        for (index, v) in values.iter().enumerate() {
            if !(*v > 0.0) || !v.is_finite() {
                return Err(Error::NonpositiveLambda { index });
            }
        }
        Ok(IntensityValues { values, bw_s: f64::NAN, bw_t: f64::NAN })
    }

    /// A constant intensity vector (the homogeneous weighting).
    pub fn constant(lambda: f64, n: usize) -> Result<Self> {
        Self::from_values(vec![lambda; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Sums after sorting, so the result depends only on the multiset of terms —
/// reordering the input points then permutes λ̂ values bit-for-bit.
pub(crate) fn ordered_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_by(f64::total_cmp);
    terms.iter().sum()
}

/// Gaussian density on the plane as a function of distance.
fn gauss2d(d: f64, sigma: f64) -> f64 {
    (-d * d / (2.0 * sigma * sigma)).exp() / (2.0 * std::f64::consts::PI * sigma * sigma)
}

/// Gaussian density on the line as a function of distance.
fn gauss1d(d: f64, sigma: f64) -> f64 {
    (-d * d / (2.0 * sigma * sigma)).exp() / ((2.0 * std::f64::consts::PI).sqrt() * sigma)
}

fn check_n(p: &PointPattern) -> Result<()> {
    if p.n() < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: p.n() });
    }
    Ok(())
}

fn floor_values(mut values: Vec<f64>, p: &PointPattern) -> Vec<f64> {
    let floor = 1e-10 * p.n() as f64 / p.volume();
    for v in &mut values {
        if !(*v > floor) {
            *v = floor;
        }
    }
    values
}

/// Kernel intensity with Euclidean spatial distances (planar patterns, or
/// the coordinates of a network pattern treated as planar).
pub fn kernel_intensity_planar(
    p: &PointPattern,
    bw_s: Bandwidth,
    bw_t: Bandwidth,
    leave_one_out: bool,
) -> Result<IntensityValues> {
    check_n(p)?;
    let (auto_s, auto_t) = auto_bandwidths(p);
    let sigma_s = bw_s.resolve(auto_s)?;
    let sigma_t = bw_t.resolve(auto_t)?;
    let pts = p.points();
    let values: Vec<f64> = (0..pts.len())
        .into_par_iter()
        .map(|i| {
            let mut terms = Vec::with_capacity(pts.len());
            for (j, q) in pts.iter().enumerate() {
                if leave_one_out && j == i {
                    continue;
                }
                let d = ((pts[i][0] - q[0]).powi(2) + (pts[i][1] - q[1]).powi(2)).sqrt();
                terms.push(gauss2d(d, sigma_s) * gauss1d(pts[i][2] - q[2], sigma_t));
            }
            ordered_sum(terms)
        })
        .collect();
    Ok(IntensityValues { values: floor_values(values, p), bw_s: sigma_s, bw_t: sigma_t })
}

/// Kernel intensity with shortest-path spatial distances. Values are per
/// unit length and time, matching the network second-order statistics.
pub fn kernel_intensity_network(
    p: &PointPattern,
    bw_s: Bandwidth,
    bw_t: Bandwidth,
    leave_one_out: bool,
) -> Result<IntensityValues> {
    check_n(p)?;
    let net = p
        .network()
        .ok_or_else(|| Error::DomainMismatch("network intensity needs a network pattern".into()))?
        .clone();
    let locs = p.locations().expect("network pattern carries locations");
    let (auto_s, auto_t) = auto_bandwidths(p);
    let sigma_s = bw_s.resolve(auto_s)?;
    let sigma_t = bw_t.resolve(auto_t)?;
    let pts = p.points();
    let values: Vec<f64> = (0..pts.len())
        .into_par_iter()
        .map(|i| {
            let sources = crate::geometry::SourceDistances::new(&net, &locs[i])
                .expect("pattern locations are validated at construction");
            let mut terms = Vec::with_capacity(pts.len());
            for (j, q) in pts.iter().enumerate() {
                if leave_one_out && j == i {
                    continue;
                }
                let d = sources.distance_to(&locs[j]);
                if d.is_finite() {
                    terms.push(gauss1d(d, sigma_s) * gauss1d(pts[i][2] - q[2], sigma_t));
                }
            }
            ordered_sum(terms)
        })
        .collect();
    Ok(IntensityValues { values: floor_values(values, p), bw_s: sigma_s, bw_t: sigma_t })
}
