//! Permutation test for local second-order differences between two
//! patterns sharing a domain.
//!
//! Each point i of the background pattern X is tested separately: its local
//! surface within X is compared against surfaces of the same point embedded
//! in k permuted patterns, each consisting of point i plus n−1 companions
//! drawn without replacement from (X \ {i}) ∪ Z. Planar surfaces use the
//! homogeneous local statistic: a kernel-reweighted one adapts to whatever
//! clustering the permutation shuffles in or out and cancels the very signal
//! the test is after. On a network, where the local statistic is defined
//! with point-wise weights, the intensity is re-estimated by kernel
//! smoothing on each permuted pattern so the null surfaces reflect the null
//! intensity. The deviation statistic is the trapezoidal grid integral of
//! the squared difference from the permutation average; p-values divide by
//! k exactly, so p = 0 is reachable.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intensity::{kernel_intensity_network, Bandwidth};
use crate::pattern::{Domain, PointPattern};
use crate::secondorder::{
    lista_network_single, lista_planar_single, trapezoid_weights, GridSpec, Statistic,
};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LocalTestResult {
    pub p_values: Vec<f64>,
    pub alpha: f64,
    pub significant_indices: Vec<usize>,
    pub k: usize,
    /// "K" or "pcf".
    pub statistic: String,
    pub n_background: usize,
    pub n_alternative: usize,
    pub network: bool,
    /// Set when k is too small for the requested alpha to be reachable.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub warning: Option<String>,
}

impl std::fmt::Display for LocalTestResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "Test for local differences between two")?;
        if self.network {
            writeln!(f, "spatio-temporal point patterns on a linear network")?;
        } else {
            writeln!(f, "spatio-temporal point patterns")?;
        }
        writeln!(f, "--------------------------------------")?;
        writeln!(f, "Background pattern X: {}", self.n_background)?;
        writeln!(f, "Alternative pattern Z: {}", self.n_alternative)?;
        writeln!(f)?;
        write!(
            f,
            "{} significant points at alpha = {}",
            self.significant_indices.len(),
            self.alpha
        )
    }
}

fn same_domain(a: &PointPattern, b: &PointPattern) -> bool {
    match (a.domain(), b.domain()) {
        (
            Domain::Planar { window: wa, time: ta },
            Domain::Planar { window: wb, time: tb },
        ) => wa == wb && ta == tb,
        (Domain::Network { net: na, time: ta }, Domain::Network { net: nb, time: tb }) => {
            ta == tb
                && (std::sync::Arc::ptr_eq(na, nb)
                    || (na.vertices() == nb.vertices() && na.segments() == nb.segments()))
        }
        _ => false,
    }
}

/// ∫∫ (a − b)² dr dh by the trapezoidal rule on the grid.
fn squared_deviation(
    a: &[Vec<f64>],
    b: &[Vec<f64>],
    wr: &[f64],
    wh: &[f64],
) -> f64 {
    let mut total = 0.0;
    for (i, (ra, rb)) in a.iter().zip(b).enumerate() {
        for (j, (va, vb)) in ra.iter().zip(rb).enumerate() {
            let d = va - vb;
            total += wr[i] * wh[j] * d * d;
        }
    }
    total
}

/// Local surface of point-of-interest `index` inside `p`. Planar patterns
/// use the homogeneous statistic; network patterns weight by a freshly
/// kernel-estimated intensity (leave-one-out, automatic bandwidths).
fn test_surface(
    p: &PointPattern,
    index: usize,
    statistic: Statistic,
    grid: &GridSpec,
) -> Result<Vec<Vec<f64>>> {
    if p.is_network() {
        let lam = kernel_intensity_network(p, Bandwidth::Auto, Bandwidth::Auto, true)?;
        let (surface, _) = lista_network_single(p, index, &lam, statistic, grid)?;
        Ok(surface.values)
    } else {
        Ok(lista_planar_single(p, index, None, statistic, grid).values)
    }
}

/// Pool of candidate companions: everything in X except point i, then all
/// of Z. Returns coordinate rows plus network locations when applicable.
struct CompanionPool {
    points: Vec<[f64; 3]>,
    locations: Option<Vec<crate::geometry::NetworkLocation>>,
}

impl CompanionPool {
    fn build(x: &PointPattern, z: &PointPattern, skip: usize) -> CompanionPool {
        let mut points = Vec::with_capacity(x.n() - 1 + z.n());
        let mut locations = x.locations().map(|_| Vec::with_capacity(x.n() - 1 + z.n()));
        for (idx, pt) in x.points().iter().enumerate() {
            if idx == skip {
                continue;
            }
            points.push(*pt);
            if let Some(locs) = &mut locations {
                locs.push(x.locations().unwrap()[idx]);
            }
        }
        for (idx, pt) in z.points().iter().enumerate() {
            points.push(*pt);
            if let Some(locs) = &mut locations {
                locs.push(z.locations().unwrap()[idx]);
            }
        }
        CompanionPool { points, locations }
    }

    /// Pattern made of X's point `i` plus the chosen companions, on X's
    /// domain. The tested point is always at index 0.
    fn pattern_with(
        &self,
        x: &PointPattern,
        i: usize,
        chosen: &[usize],
    ) -> Result<PointPattern> {
        match x.domain() {
            Domain::Planar { window, time } => {
                let mut pts = Vec::with_capacity(chosen.len() + 1);
                pts.push(x.points()[i]);
                pts.extend(chosen.iter().map(|&c| self.points[c]));
                PointPattern::new_planar(pts, Some(*window), Some(*time))
            }
            Domain::Network { net, time } => {
                let locs_pool = self.locations.as_ref().expect("network pool");
                let mut locs = Vec::with_capacity(chosen.len() + 1);
                let mut times = Vec::with_capacity(chosen.len() + 1);
                locs.push(x.locations().unwrap()[i]);
                times.push(x.points()[i][2]);
                for &c in chosen {
                    locs.push(locs_pool[c]);
                    times.push(self.points[c][2]);
                }
                PointPattern::from_network_locations(locs, times, net.clone(), *time)
            }
        }
    }
}

/// Runs the permutation test of X's local second-order structure against
/// the alternative pattern Z. `k` permutations per point; p-values land on
/// the lattice {0, 1/k, …, 1}.
pub fn localtest(
    x: &PointPattern,
    z: &PointPattern,
    statistic: Statistic,
    k: usize,
    alpha: f64,
    seed: u64,
) -> Result<LocalTestResult> {
    if !same_domain(x, z) {
        return Err(Error::DomainMismatch(
            "background and alternative patterns must share a domain".into(),
        ));
    }
    if x.n() < 2 || z.n() == 0 {
        return Err(Error::TooFewPoints { needed: 2, got: x.n().min(2).min(z.n() + 1) });
    }
    if k < 1 || !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParams(format!("k = {k}, alpha = {alpha}")));
    }
    let grid = GridSpec::default_for(x)?;
    let wr = trapezoid_weights(grid.r_values());
    let wh = trapezoid_weights(grid.h_values());

    let p_values: Vec<f64> = (0..x.n())
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let observed = test_surface(x, i, statistic, &grid)?;
            let pool = CompanionPool::build(x, z, i);

            // one null surface per permutation; the tested point sits at
            // index 0 of each permuted pattern
            let null_surfaces: Vec<Vec<Vec<f64>>> = (0..k)
                .map(|j| -> Result<Vec<Vec<f64>>> {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(((i as u64) << 32) | j as u64);
                    let chosen =
                        rand::seq::index::sample(&mut rng, pool.points.len(), x.n() - 1)
                            .into_vec();
                    let perm = pool.pattern_with(x, i, &chosen)?;
                    test_surface(&perm, 0, statistic, &grid)
                })
                .collect::<Result<_>>()?;

            let mut average = grid_zeros(&grid);
            for s in &null_surfaces {
                for (ra, rs) in average.iter_mut().zip(s) {
                    for (va, vs) in ra.iter_mut().zip(rs) {
                        *va += vs / k as f64;
                    }
                }
            }

            let t_obs = squared_deviation(&observed, &average, &wr, &wh);
            let exceed = null_surfaces
                .iter()
                .filter(|s| squared_deviation(s, &average, &wr, &wh) >= t_obs)
                .count();
            Ok(exceed as f64 / k as f64)
        })
        .collect::<Result<_>>()?;

    let significant_indices: Vec<usize> = p_values
        .iter()
        .enumerate()
        .filter(|(_, &p)| p < alpha)
        .map(|(i, _)| i)
        .collect();
    let warning = (((k + 1) as f64) * alpha < 1.0).then(|| {
        format!("k = {k} permutations cannot reach significance at alpha = {alpha}")
    });
    Ok(LocalTestResult {
        p_values,
        alpha,
        significant_indices,
        k,
        statistic: match statistic {
            Statistic::K => "K".into(),
            Statistic::Pcf => "pcf".into(),
        },
        n_background: x.n(),
        n_alternative: z.n(),
        network: x.is_network(),
        warning,
    })
}

fn grid_zeros(grid: &GridSpec) -> Vec<Vec<f64>> {
    vec![vec![0.0; grid.h_values().len()]; grid.r_values().len()]
}
