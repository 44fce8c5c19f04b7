//! Log-Gaussian Cox process fitting by (locally weighted) minimum contrast.
//!
//! The latent Gaussian field has mean −σ²/2, so the process intensity equals
//! the fitted first-order intensity and the pair correlation function is
//! g(r,h) = exp(C(r,h)) with C the field covariance. Covariance parameters
//! are found by minimising the squared distance between that theoretical pcf
//! and an empirical pcf surface (the average of per-point pcf surfaces,
//! optionally kernel-weighted around each point for local fits) over the
//! default quarter-max grid, using Nelder–Mead on log-transformed
//! parameters.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::poisson::{fit_locstppm, fit_stppm};
use super::{named_vector, summary_table, FittedModel, Formula};
use crate::error::{Error, Result};
use crate::intensity::{auto_bandwidths, Bandwidth, IntensityValues};
use crate::pattern::PointPattern;
use crate::secondorder::{lista_planar, trapezoid_weights, GridSpec, Statistic};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CovarianceFamily {
    /// σ² e^{−r/α} e^{−h/β}.
    SeparableExp,
    /// Nonseparable family with temporal scaling of the spatial decay.
    Gneiting,
    /// σ² (1 + (r/α)^{γs} + (h/β)^{γt})^{−δ}.
    IacoCesare,
}

impl CovarianceFamily {
    pub fn label(self) -> &'static str {
        match self {
            CovarianceFamily::SeparableExp => "separable",
            CovarianceFamily::Gneiting => "gneiting",
            CovarianceFamily::IacoCesare => "iaco-cesare",
        }
    }
}

impl std::fmt::Display for CovarianceFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for CovarianceFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sepexp" | "separable" | "exponential" => Ok(CovarianceFamily::SeparableExp),
            "gneiting" => Ok(CovarianceFamily::Gneiting),
            "iaco" | "iaco-cesare" | "iacocesare" => Ok(CovarianceFamily::IacoCesare),
            other => Err(Error::Parse(format!("unknown covariance family `{other}`"))),
        }
    }
}

/// Covariance of the latent field: variance, spatial and temporal scales,
/// and shape exponents (which default to 1 and are only estimated on
/// request, keeping the three-parameter output shape).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CovarianceParams {
    pub family: CovarianceFamily,
    pub sigma2: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma_s: f64,
    pub gamma_t: f64,
    pub delta: f64,
}

impl CovarianceParams {
    pub fn new(family: CovarianceFamily, sigma2: f64, alpha: f64, beta: f64) -> Result<Self> {
        Self::with_shapes(family, sigma2, alpha, beta, 1.0, 1.0, 1.0)
    }

    pub fn with_shapes(
        family: CovarianceFamily,
        sigma2: f64,
        alpha: f64,
        beta: f64,
        gamma_s: f64,
        gamma_t: f64,
        delta: f64,
    ) -> Result<Self> {
        let p = CovarianceParams { family, sigma2, alpha, beta, gamma_s, gamma_t, delta };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        let positive = [self.sigma2, self.alpha, self.beta, self.gamma_s, self.gamma_t, self.delta];
        if positive.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidParams(
                "covariance parameters must be positive and finite".into(),
            ));
        }
        if self.gamma_s > 2.0 || self.gamma_t > 2.0 || self.delta > 2.0 {
            return Err(Error::InvalidParams(
                "shape exponents must lie in (0, 2]".into(),
            ));
        }
        Ok(())
    }

    /// C(r, h) of the latent field.
    pub fn covariance(&self, r: f64, h: f64) -> f64 {
        match self.family {
            CovarianceFamily::SeparableExp => {
                self.sigma2 * (-r / self.alpha).exp() * (-h / self.beta).exp()
            }
            CovarianceFamily::Gneiting => {
                let psi1 = (h / self.beta).powf(self.gamma_t) + 1.0;
                self.sigma2 / psi1.powf(self.delta / self.gamma_t)
                    * (-(r / self.alpha).powf(self.gamma_s)
                        / psi1.powf(self.delta / (2.0 * self.gamma_t)))
                    .exp()
            }
            CovarianceFamily::IacoCesare => {
                self.sigma2
                    * (1.0 + (r / self.alpha).powf(self.gamma_s)
                        + (h / self.beta).powf(self.gamma_t))
                    .powf(-self.delta)
            }
        }
    }

    /// Names and values for the printed coefficient block; shapes appear
    /// only when they differ from the frozen default.
    fn report(&self) -> (Vec<String>, Vec<f64>) {
        let mut names = vec!["sigma".into(), "alpha".into(), "beta".into()];
        let mut values = vec![self.sigma2, self.alpha, self.beta];
        if self.gamma_s != 1.0 || self.gamma_t != 1.0 || self.delta != 1.0 {
            names.extend(["gamma_s".into(), "gamma_t".into(), "delta".into()]);
            values.extend([self.gamma_s, self.gamma_t, self.delta]);
        }
        (names, values)
    }
}

/// Pair correlation function of the process: g(r,h) = exp(C(r,h)).
pub fn theoretical_pcf(params: &CovarianceParams, r: f64, h: f64) -> f64 {
    assert!(r >= 0.0 && h >= 0.0, "spatial and temporal lags must be nonnegative");
    params.covariance(r, h).exp()
}

/// Derivative-free simplex minimisation. Returns the best vertex, its value,
/// whether the stopping criteria fired before the iteration cap, and the
/// iteration count.
fn nelder_mead<F: Fn(&[f64]) -> f64>(
    f: F,
    x0: &[f64],
    max_iter: usize,
) -> (Vec<f64>, f64, bool, usize) {
    const REFLECT: f64 = 1.0;
    const EXPAND: f64 = 2.0;
    const CONTRACT: f64 = 0.5;
    const SHRINK: f64 = 0.5;
    const STEP: f64 = 0.25;
    const F_TOL: f64 = 1e-10;
    const X_TOL: f64 = 1e-10;

    let n = x0.len();
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += STEP;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();

    for iter in 1..=max_iter {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let best = order[0];
        let worst = order[n];
        let second_worst = order[n - 1];

        let spread = (values[worst] - values[best]).abs();
        let size = simplex
            .iter()
            .flat_map(|v| v.iter().zip(&simplex[best]).map(|(a, b)| (a - b).abs()))
            .fold(0.0f64, f64::max);
        if spread <= F_TOL * (values[best].abs() + F_TOL) || size <= X_TOL {
            return (simplex[best].clone(), values[best], true, iter);
        }

        let centroid: Vec<f64> = (0..n)
            .map(|j| {
                order[..n].iter().map(|&i| simplex[i][j]).sum::<f64>() / n as f64
            })
            .collect();
        let at = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[worst])
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let reflected = at(REFLECT);
        let fr = f(&reflected);
        if fr < values[best] {
            let expanded = at(EXPAND);
            let fe = f(&expanded);
            if fe < fr {
                simplex[worst] = expanded;
                values[worst] = fe;
            } else {
                simplex[worst] = reflected;
                values[worst] = fr;
            }
        } else if fr < values[second_worst] {
            simplex[worst] = reflected;
            values[worst] = fr;
        } else {
            let (contracted, fc) = if fr < values[worst] {
                let c = at(CONTRACT);
                let v = f(&c);
                (c, v)
            } else {
                let c = at(-CONTRACT);
                let v = f(&c);
                (c, v)
            };
            if fc < values[worst].min(fr) {
                simplex[worst] = contracted;
                values[worst] = fc;
            } else {
                for &i in &order[1..] {
                    simplex[i] = simplex[i]
                        .iter()
                        .zip(&simplex[best])
                        .map(|(v, b)| b + SHRINK * (v - b))
                        .collect();
                    values[i] = f(&simplex[i]);
                }
            }
        }
    }

    let best = (0..=n).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap();
    (simplex[best].clone(), values[best], false, max_iter)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LgcpOptions {
    /// Estimate the shape exponents (γ_s, γ_t, δ) alongside σ², α, β instead
    /// of freezing them at 1.
    pub estimate_shapes: bool,
}

/// Optimisation coordinates: log for the positive scale parameters, and a
/// 2·sigmoid map for the shape exponents so they stay in (0, 2].
fn params_from(x: &[f64], family: CovarianceFamily, estimate_shapes: bool) -> CovarianceParams {
    let shape = |v: f64| 2.0 / (1.0 + (-v).exp());
    let (gamma_s, gamma_t, delta) = if estimate_shapes {
        (shape(x[3]), shape(x[4]), shape(x[5]))
    } else {
        (1.0, 1.0, 1.0)
    };
    CovarianceParams {
        family,
        sigma2: x[0].exp(),
        alpha: x[1].exp(),
        beta: x[2].exp(),
        gamma_s,
        gamma_t,
        delta,
    }
}

/// Minimises ∫∫ (Ĵ(r,h) − g(r,h;ψ))² dr dh over the grid for the empirical
/// pcf surface `empirical`, restarting the simplex from jittered starts and
/// keeping the lowest contrast seen.
pub fn minimum_contrast(
    empirical: &[Vec<f64>],
    grid: &GridSpec,
    family: CovarianceFamily,
    options: LgcpOptions,
    seed: u64,
) -> Result<(CovarianceParams, f64)> {
    const RESTARTS: usize = 5;
    const MAX_ITER: usize = 500;

    if empirical.len() != grid.r_values().len()
        || empirical.iter().any(|row| row.len() != grid.h_values().len())
    {
        return Err(Error::InvalidParams(
            "empirical surface does not match the grid".into(),
        ));
    }
    let wr = trapezoid_weights(grid.r_values());
    let wh = trapezoid_weights(grid.h_values());
    let objective = |x: &[f64]| -> f64 {
        let p = params_from(x, family, options.estimate_shapes);
        let mut total = 0.0;
        for (i, &r) in grid.r_values().iter().enumerate() {
            for (j, &h) in grid.h_values().iter().enumerate() {
                let d = empirical[i][j] - p.covariance(r, h).exp();
                total += wr[i] * wh[j] * d * d;
            }
        }
        total
    };

    // starting guess: σ² from the surface maximum (g(0,0) = e^{σ²}), scales
    // at half the grid extent
    let emp_max = empirical.iter().flatten().fold(0.0f64, |m, &v| m.max(v));
    let sigma2_0 = if emp_max > 1.05 { emp_max.ln().min(10.0) } else { 0.5 };
    let mut x0 = vec![sigma2_0.ln(), (grid.r_max() / 2.0).ln(), (grid.h_max() / 2.0).ln()];
    if options.estimate_shapes {
        x0.extend([0.0, 0.0, 0.0]);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut any_converged = false;
    for restart in 0..RESTARTS {
        let start: Vec<f64> = if restart == 0 {
            x0.clone()
        } else {
            x0.iter().map(|v| v + rng.random_range(-0.75..0.75)).collect()
        };
        let (x, fval, converged, _) = nelder_mead(&objective, &start, MAX_ITER);
        any_converged |= converged;
        if best.as_ref().is_none_or(|(_, b)| fval < *b) {
            best = Some((x, fval));
        }
    }
    if !any_converged {
        return Err(Error::OptimFailure(
            "every simplex restart hit the iteration cap".into(),
        ));
    }
    let (x, contrast) = best.expect("at least one restart ran");
    Ok((params_from(&x, family, options.estimate_shapes), contrast))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FitScope {
    Global,
    Local,
}

impl std::fmt::Display for FitScope {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FitScope::Global => "global",
            FitScope::Local => "local",
        })
    }
}

impl std::str::FromStr for FitScope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "global" => Ok(FitScope::Global),
            "local" => Ok(FitScope::Local),
            other => Err(Error::Parse(format!("expected `global` or `local`, got `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum SecondOrderFit {
    Global(CovarianceParams),
    Local(Vec<CovarianceParams>),
}

/// A fitted log-Gaussian Cox process: first-order intensity plus covariance
/// parameters of the latent field.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LgcpFit {
    pub first_order: FittedModel,
    pub second_order: SecondOrderFit,
    /// Minimised contrast, one entry (global) or one per point (local).
    pub contrast: Vec<f64>,
    pub family: CovarianceFamily,
    pub first: FitScope,
    pub second: FitScope,
    /// Wall time stays out of serialized output so files are reproducible.
    #[serde(skip)]
    pub elapsed_minutes: f64,
}

impl std::fmt::Display for LgcpFit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        const RULE: &str = "--------------------------------------------------";
        writeln!(f, "Joint minimum contrast fit")?;
        writeln!(f, "for a log-Gaussian Cox process with")?;
        writeln!(f, "{} first-order intensity and", self.first)?;
        writeln!(f, "{} second-order intensity", self.second)?;
        writeln!(f, "{RULE}")?;
        self.first_order.write_block(f, " of the first-order intensity")?;
        writeln!(f)?;
        writeln!(f, "{RULE}")?;
        writeln!(f, "Covariance function: {}", self.family)?;
        writeln!(f)?;
        match &self.second_order {
            SecondOrderFit::Global(params) => {
                writeln!(f, "Estimated coefficients of the second-order intensity:")?;
                let (names, values) = params.report();
                writeln!(f, "{}", named_vector(&names, &values))?;
            }
            SecondOrderFit::Local(rows) => {
                writeln!(f, "Summary of estimated coefficients of the second-order intensity")?;
                let (names, _) = rows[0].report();
                let table: Vec<Vec<f64>> = rows.iter().map(|p| p.report().1).collect();
                writeln!(f, "{}", summary_table(&names, &table))?;
            }
        }
        writeln!(f, "{RULE}")?;
        write!(f, "Model fitted in {:.3} minutes", self.elapsed_minutes)
    }
}

/// Fits an LGCP: first-order intensity by a (local) Poisson fit, covariance
/// parameters by minimum contrast against pcf surfaces weighted with that
/// intensity. `second = Local` minimises one contrast per point against a
/// Gaussian-weighted average of the per-point surfaces.
pub fn fit_stlgcppm(
    p: &PointPattern,
    formula: &Formula,
    first: FitScope,
    second: FitScope,
    family: CovarianceFamily,
    seed: u64,
    options: LgcpOptions,
) -> Result<LgcpFit> {
    if p.is_network() {
        return Err(Error::DomainMismatch("fit_stlgcppm accepts planar patterns only".into()));
    }
    if p.n() < 10 {
        return Err(Error::InsufficientPoints { needed: 10, got: p.n() });
    }
    let started = std::time::Instant::now();

    let first_order = match first {
        FitScope::Global => fit_stppm(p, formula)?,
        FitScope::Local => fit_locstppm(p, formula, Bandwidth::Auto, Bandwidth::Auto)?,
    };
    let lambda = IntensityValues::from_values(first_order.fitted_intensity.clone())?;
    let grid = GridSpec::default_for(p)?;
    let surfaces = lista_planar(p, Some(&lambda), Statistic::Pcf, &grid)?;

    let nr = grid.r_values().len();
    let nh = grid.h_values().len();
    let (second_order, contrast) = match second {
        FitScope::Global => {
            let mut mean = vec![vec![0.0; nh]; nr];
            for s in &surfaces {
                for (row, srow) in mean.iter_mut().zip(&s.values) {
                    for (v, sv) in row.iter_mut().zip(srow) {
                        *v += sv / surfaces.len() as f64;
                    }
                }
            }
            let (params, c) = minimum_contrast(&mean, &grid, family, options, seed)?;
            (SecondOrderFit::Global(params), vec![c])
        }
        FitScope::Local => {
            let (sigma_s, sigma_t) = auto_bandwidths(p);
            let pts = p.points();
            let fits: Vec<(CovarianceParams, f64)> = (0..p.n())
                .into_par_iter()
                .map(|i| {
                    let weights: Vec<f64> = pts
                        .iter()
                        .map(|q| {
                            let ds2 = (q[0] - pts[i][0]).powi(2) + (q[1] - pts[i][1]).powi(2);
                            let dt = q[2] - pts[i][2];
                            (-ds2 / (2.0 * sigma_s * sigma_s)
                                - dt * dt / (2.0 * sigma_t * sigma_t))
                                .exp()
                        })
                        .collect();
                    let total: f64 = weights.iter().sum();
                    let mut averaged = vec![vec![0.0; nh]; nr];
                    for (s, &w) in surfaces.iter().zip(&weights) {
                        for (row, srow) in averaged.iter_mut().zip(&s.values) {
                            for (v, sv) in row.iter_mut().zip(srow) {
                                *v += w * sv / total;
                            }
                        }
                    }
                    minimum_contrast(
                        &averaged,
                        &grid,
                        family,
                        options,
                        seed.wrapping_add((i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
                    )
                })
                .collect::<Result<_>>()?;
            let (params, contrasts): (Vec<_>, Vec<_>) = fits.into_iter().unzip();
            (SecondOrderFit::Local(params), contrasts)
        }
    };

    Ok(LgcpFit {
        first_order,
        second_order,
        contrast,
        family,
        first,
        second,
        elapsed_minutes: started.elapsed().as_secs_f64() / 60.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{TimeInterval, Window};
    use crate::simulate::{rstpp, LambdaSpec};

    fn sep(sigma2: f64, alpha: f64, beta: f64) -> CovarianceParams {
        CovarianceParams::new(CovarianceFamily::SeparableExp, sigma2, alpha, beta).unwrap()
    }

    #[test]
    fn pcf_at_the_origin_is_exp_sigma2_for_every_family() {
        for family in [
            CovarianceFamily::SeparableExp,
            CovarianceFamily::Gneiting,
            CovarianceFamily::IacoCesare,
        ] {
            let p = CovarianceParams::new(family, 1.7, 0.3, 2.0).unwrap();
            assert!((theoretical_pcf(&p, 0.0, 0.0) - 1.7f64.exp()).abs() < 1e-12);
            // correlation decays: far apart the pcf approaches 1
            assert!((theoretical_pcf(&p, 1e6, 1e6) - 1.0).abs() < 1e-6, "{family}");
        }
    }

    #[test]
    fn separable_exponential_evaluates_in_closed_form() {
        let p = sep(6.989, 0.225, 156.353);
        let g = theoretical_pcf(&p, 0.225, 156.353);
        let expected = (6.989 * (-1.0f64).exp() * (-1.0f64).exp()).exp();
        assert!((g - expected).abs() < 1e-12);
        assert!((g - 2.575).abs() < 1e-3);
    }

    #[test]
    fn pcf_never_increases_with_spatial_lag() {
        for family in [
            CovarianceFamily::SeparableExp,
            CovarianceFamily::Gneiting,
            CovarianceFamily::IacoCesare,
        ] {
            for shapes in [(1.0, 1.0, 1.0), (0.5, 1.5, 2.0), (2.0, 0.3, 0.7)] {
                let p = CovarianceParams::with_shapes(
                    family, 2.0, 0.4, 3.0, shapes.0, shapes.1, shapes.2,
                )
                .unwrap();
                for h in [0.0, 0.5, 2.0, 10.0] {
                    let mut last = f64::INFINITY;
                    for k in 0..60 {
                        let g = theoretical_pcf(&p, k as f64 * 0.05, h);
                        assert!(g <= last + 1e-12, "{family} rose in r at h={h}");
                        last = g;
                    }
                }
            }
        }
    }

    /// Separable and Iaco-Cesare decay in h everywhere. The nonseparable
    /// temporal-scaling family only does so for r up to about the spatial
    /// scale: beyond it, growing h slows the spatial decay faster than the
    /// prefactor shrinks, and the pcf ridges upward before decaying — the
    /// space-time interaction the family exists to model.
    #[test]
    fn temporal_decay_holds_where_each_family_guarantees_it() {
        for family in [CovarianceFamily::SeparableExp, CovarianceFamily::IacoCesare] {
            let p = CovarianceParams::new(family, 2.0, 0.4, 3.0).unwrap();
            for r in [0.0, 0.2, 1.0, 5.0] {
                let mut last = f64::INFINITY;
                for k in 0..60 {
                    let g = theoretical_pcf(&p, r, k as f64 * 0.3);
                    assert!(g <= last + 1e-12, "{family} rose in h at r={r}");
                    last = g;
                }
            }
        }
        let p = CovarianceParams::new(CovarianceFamily::Gneiting, 2.0, 0.4, 3.0).unwrap();
        for r in [0.0, 0.1, 0.2, 0.4] {
            let mut last = f64::INFINITY;
            for k in 0..60 {
                let g = theoretical_pcf(&p, r, k as f64 * 0.3);
                assert!(g <= last + 1e-12, "gneiting rose in h at r={r}");
                last = g;
            }
        }
        // and the documented ridge: at large spatial lag the pcf first rises
        let near = theoretical_pcf(&p, 3.0, 0.0);
        let later = theoretical_pcf(&p, 3.0, 3.0);
        assert!(later > near, "expected the interaction ridge: {near} -> {later}");
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(CovarianceParams::new(CovarianceFamily::SeparableExp, -1.0, 0.2, 1.0).is_err());
        assert!(CovarianceParams::new(CovarianceFamily::Gneiting, 1.0, 0.0, 1.0).is_err());
        assert!(CovarianceParams::with_shapes(
            CovarianceFamily::Gneiting,
            1.0,
            0.2,
            1.0,
            2.5,
            1.0,
            1.0
        )
        .is_err());
    }

    #[test]
    fn simplex_finds_the_minimum_of_a_quadratic() {
        let f = |x: &[f64]| (x[0] - 1.5).powi(2) + 3.0 * (x[1] + 0.5).powi(2) + 2.0;
        let (x, v, converged, _) = nelder_mead(f, &[0.0, 0.0], 500);
        assert!(converged);
        // the f-spread stop at 1e-10 pins coordinates to about sqrt(1e-10)
        assert!((x[0] - 1.5).abs() < 1e-4);
        assert!((x[1] + 0.5).abs() < 1e-4);
        assert!((v - 2.0).abs() < 1e-9);
    }

    #[test]
    fn planting_the_theoretical_surface_recovers_the_parameters() {
        let truth = sep(2.0, 0.1, 5.0);
        let grid = GridSpec::new(
            (1..=20).map(|k| k as f64 * 0.5 / 20.0).collect(),
            (1..=20).map(|k| k as f64 * 15.0 / 20.0).collect(),
        )
        .unwrap();
        let planted: Vec<Vec<f64>> = grid
            .r_values()
            .iter()
            .map(|&r| grid.h_values().iter().map(|&h| theoretical_pcf(&truth, r, h)).collect())
            .collect();
        let (fit, contrast) = minimum_contrast(
            &planted,
            &grid,
            CovarianceFamily::SeparableExp,
            LgcpOptions::default(),
            7,
        )
        .unwrap();
        assert!(contrast < 1e-10, "contrast {contrast}");
        assert!((fit.sigma2 - 2.0).abs() / 2.0 < 0.01, "sigma2 {}", fit.sigma2);
        assert!((fit.alpha - 0.1).abs() / 0.1 < 0.01, "alpha {}", fit.alpha);
        assert!((fit.beta - 5.0).abs() / 5.0 < 0.01, "beta {}", fit.beta);
    }

    #[test]
    fn global_global_fit_prints_the_report_block() {
        let p = rstpp(&LambdaSpec::Constant(60.0), Window::unit(), TimeInterval::unit(), 40, 1)
            .unwrap()
            .remove(0);
        let fit = fit_stlgcppm(
            &p,
            &Formula::intercept_only(),
            FitScope::Global,
            FitScope::Global,
            CovarianceFamily::SeparableExp,
            11,
            LgcpOptions::default(),
        )
        .unwrap();
        assert!(fit.contrast[0] >= 0.0);
        let text = fit.to_string();
        assert!(text.contains("Joint minimum contrast fit"));
        assert!(text.contains("global first-order intensity and"));
        assert!(text.contains("global second-order intensity"));
        assert!(text.contains("Homogeneous Poisson process"));
        assert!(text.contains("Estimated coefficients of the first-order intensity:"));
        assert!(text.contains("Covariance function: separable"));
        assert!(text.contains("Estimated coefficients of the second-order intensity:"));
        assert!(text.contains("sigma"));
        assert!(text.contains("Model fitted in"));
    }

    #[test]
    fn same_seed_reproduces_the_second_order_fit() {
        let p = rstpp(&LambdaSpec::Constant(50.0), Window::unit(), TimeInterval::unit(), 41, 1)
            .unwrap()
            .remove(0);
        let run = || {
            fit_stlgcppm(
                &p,
                &Formula::intercept_only(),
                FitScope::Global,
                FitScope::Global,
                CovarianceFamily::Gneiting,
                99,
                LgcpOptions::default(),
            )
            .unwrap()
        };
        let (a, b) = (run(), run());
        match (&a.second_order, &b.second_order) {
            (SecondOrderFit::Global(pa), SecondOrderFit::Global(pb)) => {
                assert_eq!(pa.sigma2, pb.sigma2);
                assert_eq!(pa.alpha, pb.alpha);
                assert_eq!(pa.beta, pb.beta);
            }
            _ => unreachable!(),
        }
        assert_eq!(a.contrast, b.contrast);
    }

    #[test]
    fn tiny_patterns_are_turned_away() {
        let p = PointPattern::new_planar(
            (0..5).map(|i| [0.1 + 0.15 * i as f64, 0.5, 0.1 + 0.2 * i as f64]).collect(),
            Some(Window::unit()),
            Some(TimeInterval::unit()),
        )
        .unwrap();
        assert!(matches!(
            fit_stlgcppm(
                &p,
                &Formula::intercept_only(),
                FitScope::Global,
                FitScope::Global,
                CovarianceFamily::SeparableExp,
                1,
                LgcpOptions::default(),
            ),
            Err(Error::InsufficientPoints { needed: 10, got: 5 })
        ));
    }
}
