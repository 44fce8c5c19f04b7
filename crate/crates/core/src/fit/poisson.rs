//! Global, local and separable Poisson intensity fits.

use rayon::prelude::*;

use super::glm::irls_poisson;
use super::quadrature::{
    build_network_quadrature, build_quadrature, build_spatial_quadrature, build_time_quadrature,
    QuadratureScheme,
};
use super::{FittedModel, Formula, ModelKind, Term};
use crate::error::{Error, Result};
use crate::intensity::{auto_bandwidths, Bandwidth};
use crate::pattern::{Domain, PointPattern};

fn require_planar(p: &PointPattern, what: &str) -> Result<()> {
    if p.is_network() {
        return Err(Error::DomainMismatch(format!("{what} accepts planar patterns only")));
    }
    Ok(())
}

/// Indices of the data points ordered by time, for imputing mark values at
/// dummy points: a dummy borrows the marks of the data point nearest in
/// time (ties resolved toward the earlier time).
fn time_order(p: &PointPattern) -> Vec<usize> {
    let mut order: Vec<usize> = (0..p.n()).collect();
    order.sort_by(|&a, &b| p.points()[a][2].total_cmp(&p.points()[b][2]));
    order
}

fn nearest_in_time(p: &PointPattern, order: &[usize], t: f64) -> usize {
    let pts = p.points();
    let pos = order.partition_point(|&i| pts[i][2] < t);
    match (pos.checked_sub(1).map(|q| order[q]), order.get(pos).copied()) {
        (Some(lo), Some(hi)) => {
            if (t - pts[lo][2]) <= (pts[hi][2] - t) {
                lo
            } else {
                hi
            }
        }
        (Some(lo), None) => lo,
        (None, Some(hi)) => hi,
        (None, None) => unreachable!("patterns fitted here are nonempty"),
    }
}

/// Design matrix over the quadrature points, data rows first.
fn design_matrix(p: &PointPattern, formula: &Formula, quad: &QuadratureScheme) -> Vec<Vec<f64>> {
    let order = if formula.mark_names().is_empty() { Vec::new() } else { time_order(p) };
    quad.points()
        .iter()
        .enumerate()
        .map(|(j, pt)| {
            formula.design_row(pt[0], pt[1], pt[2], &|name| {
                let row = if quad.is_data(j) { j } else { nearest_in_time(p, &order, pt[2]) };
                p.marks().and_then(|m| m.column(name)).expect("marks checked")[row]
            })
        })
        .collect()
}

/// Fits a log-linear Poisson intensity exp(θ·z(u,t)) by weighted Poisson
/// regression over a quadrature scheme.
pub fn fit_stppm(p: &PointPattern, formula: &Formula) -> Result<FittedModel> {
    require_planar(p, "fit_stppm")?;
    formula.check_marks(p)?;
    let quad = build_quadrature(p, None)?;
    let design = design_matrix(p, formula, &quad);
    let response: Vec<f64> = (0..quad.len()).map(|j| quad.response(j)).collect();

    let fit = irls_poisson(&design, &response, quad.weights())?;
    if !fit.converged {
        return Err(Error::NonConvergence { iterations: fit.iterations });
    }
    let n = quad.n_data();
    let fitted_intensity = fit.fitted[..n].to_vec();
    // logL ≈ Σ_data log λ̂ − Σ_k a_k λ̂_k, the quadrature form of the
    // Poisson log-likelihood
    let integral: f64 = quad.weights().iter().zip(&fit.fitted).map(|(a, mu)| a * mu).sum();
    let log_likelihood = fitted_intensity.iter().map(|l| l.ln()).sum::<f64>() - integral;

    Ok(FittedModel {
        kind: ModelKind::GlobalPoisson,
        formula: formula.clone(),
        time_formula: None,
        term_names: formula.term_names(),
        coefficients: vec![fit.coef],
        fitted_intensity,
        log_likelihood: Some(log_likelihood),
        deviance: Some(fit.deviance),
        bandwidths: None,
        converged: vec![true],
        n_data: n,
        quadrature: Some(quad),
    })
}

/// AIC = 2k − 2 log L̂ and BIC = k log n − 2 log L̂ of a global Poisson fit.
pub fn aic_bic(m: &FittedModel) -> Result<(f64, f64)> {
    if m.kind != ModelKind::GlobalPoisson {
        return Err(Error::WrongKind {
            expected: "global Poisson".into(),
            got: m.kind.label().into(),
        });
    }
    let k = m.term_names.len() as f64;
    let log_l = m.log_likelihood.expect("global fits store a likelihood");
    let n = m.n_data as f64;
    Ok((2.0 * k - 2.0 * log_l, k * n.ln() - 2.0 * log_l))
}

/// Fits one coefficient vector per data point by rerunning the quadrature
/// regression with Gaussian weights centred at that point. Points whose
/// weighted regression fails to converge (or loses rank) keep the global
/// coefficients and are flagged `false` in `converged`.
pub fn fit_locstppm(
    p: &PointPattern,
    formula: &Formula,
    bw_s: Bandwidth,
    bw_t: Bandwidth,
) -> Result<FittedModel> {
    require_planar(p, "fit_locstppm")?;
    formula.check_marks(p)?;
    let (auto_s, auto_t) = auto_bandwidths(p);
    let sigma_s = bw_s.resolve(auto_s)?;
    let sigma_t = bw_t.resolve(auto_t)?;

    let quad = build_quadrature(p, None)?;
    let design = design_matrix(p, formula, &quad);
    let response: Vec<f64> = (0..quad.len()).map(|j| quad.response(j)).collect();

    let global = irls_poisson(&design, &response, quad.weights())?;

    let n = quad.n_data();
    let pts = p.points();
    let rows: Vec<(Vec<f64>, bool)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let local_weights: Vec<f64> = quad
                .points()
                .iter()
                .zip(quad.weights())
                .map(|(q, a)| {
                    let dx = q[0] - pts[i][0];
                    let dy = q[1] - pts[i][1];
                    let dt = q[2] - pts[i][2];
                    let g = (-(dx * dx + dy * dy) / (2.0 * sigma_s * sigma_s)
                        - dt * dt / (2.0 * sigma_t * sigma_t))
                        .exp();
                    g * a
                })
                .collect();
            match irls_poisson(&design, &response, &local_weights) {
                Ok(fit) if fit.converged => (fit.coef, true),
                _ => (global.coef.clone(), false),
            }
        })
        .collect();

    let fitted_intensity = rows
        .iter()
        .enumerate()
        .map(|(i, (coef, _))| {
            design[i].iter().zip(coef).map(|(x, b)| x * b).sum::<f64>().exp()
        })
        .collect();
    let (coefficients, converged): (Vec<_>, Vec<_>) = rows.into_iter().unzip();

    Ok(FittedModel {
        kind: ModelKind::LocalPoisson,
        formula: formula.clone(),
        time_formula: None,
        term_names: formula.term_names(),
        coefficients,
        fitted_intensity,
        log_likelihood: None,
        deviance: None,
        bandwidths: Some((sigma_s, sigma_t)),
        converged,
        n_data: n,
        quadrature: Some(quad),
    })
}

/// Fits λ(u,t) = λ(u)·λ(t): a spatial log-linear model over {x, y, x:y} and
/// a temporal log-linear model over {t, marks}, each on its own quadrature,
/// multiplied and rescaled so the quadrature integral of the product equals
/// the observed point count. The rescaling constant is folded into the
/// spatial intercept. Works on planar and network patterns (the network
/// spatial quadrature tiles segments by length).
pub fn fit_separable(
    p: &PointPattern,
    space_formula: &Formula,
    time_formula: &Formula,
) -> Result<FittedModel> {
    if p.n() == 0 {
        return Err(Error::TooFewPoints { needed: 1, got: 0 });
    }
    for term in space_formula.terms() {
        if !matches!(term, Term::X | Term::Y | Term::XY) {
            return Err(Error::Formula(format!(
                "spatial part allows x, y and x:y only, found `{}`",
                term.name()
            )));
        }
    }
    for term in time_formula.terms() {
        if !matches!(term, Term::T | Term::Mark(_)) {
            return Err(Error::Formula(format!(
                "temporal part allows t and mark columns only, found `{}`",
                term.name()
            )));
        }
    }
    time_formula.check_marks(p)?;

    let n = p.n();
    let target = 4 * n;

    // temporal side
    let times: Vec<f64> = p.points().iter().map(|q| q[2]).collect();
    let interval = p.time_interval();
    let tq = build_time_quadrature(&times, &interval, target);
    let order = if time_formula.mark_names().is_empty() { Vec::new() } else { time_order(p) };
    let t_design: Vec<Vec<f64>> = tq
        .values
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            time_formula.design_row(0.0, 0.0, t, &|name| {
                let row = if j < tq.n_data { j } else { nearest_in_time(p, &order, t) };
                p.marks().and_then(|m| m.column(name)).expect("marks checked")[row]
            })
        })
        .collect();
    let t_response: Vec<f64> = (0..tq.values.len()).map(|j| tq.response(j)).collect();
    let t_fit = irls_poisson(&t_design, &t_response, &tq.weights)?;
    if !t_fit.converged {
        return Err(Error::NonConvergence { iterations: t_fit.iterations });
    }

    // spatial side
    let sq = match p.domain() {
        Domain::Planar { window, .. } => {
            let xy: Vec<[f64; 2]> = p.points().iter().map(|q| [q[0], q[1]]).collect();
            build_spatial_quadrature(&xy, window, target)
        }
        Domain::Network { net, .. } => {
            build_network_quadrature(p.locations().expect("network pattern"), net, target)
        }
    };
    let s_design: Vec<Vec<f64>> = sq
        .points
        .iter()
        .map(|q| space_formula.design_row(q[0], q[1], 0.0, &|_| unreachable!()))
        .collect();
    let s_response: Vec<f64> = (0..sq.points.len()).map(|j| sq.response(j)).collect();
    let s_fit = irls_poisson(&s_design, &s_response, &sq.weights)?;
    if !s_fit.converged {
        return Err(Error::NonConvergence { iterations: s_fit.iterations });
    }

    // rescale: ∫∫ λ(u)λ(t) factorises into the two marginal quadrature sums
    let s_sum: f64 = sq.weights.iter().zip(&s_fit.fitted).map(|(a, mu)| a * mu).sum();
    let t_sum: f64 = tq.weights.iter().zip(&t_fit.fitted).map(|(a, mu)| a * mu).sum();
    let scale = n as f64 / (s_sum * t_sum);

    let mut coef = s_fit.coef.clone();
    coef[0] += scale.ln();
    coef.extend_from_slice(&t_fit.coef);

    let fitted_intensity: Vec<f64> = (0..n)
        .map(|i| scale * s_fit.fitted[i] * t_fit.fitted[i])
        .collect();
    let log_likelihood =
        fitted_intensity.iter().map(|l| l.ln()).sum::<f64>() - n as f64;

    let term_names: Vec<String> = space_formula
        .term_names()
        .into_iter()
        .map(|t| format!("space:{t}"))
        .chain(time_formula.term_names().into_iter().map(|t| format!("time:{t}")))
        .collect();

    Ok(FittedModel {
        kind: ModelKind::Separable,
        formula: space_formula.clone(),
        time_formula: Some(time_formula.clone()),
        term_names,
        coefficients: vec![coef],
        fitted_intensity,
        log_likelihood: Some(log_likelihood),
        deviance: None,
        bandwidths: None,
        converged: vec![true],
        n_data: n,
        quadrature: None,
    })
}
