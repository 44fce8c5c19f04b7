//! Intensity model fitting.
//!
//! Log-linear Poisson models are fitted by turning the point-process
//! likelihood into a weighted Poisson regression on a quadrature scheme
//! (data points plus a lattice of dummy points, each carrying the volume of
//! its grid cell divided by the cell's occupancy). On top of that sit:
//!
//! * [`fit_stppm`] — one global coefficient vector;
//! * [`fit_locstppm`] — one coefficient vector per data point, from
//!   Gaussian-downweighted copies of the same regression;
//! * [`fit_separable`] — independent spatial and temporal log-linear fits
//!   multiplied together and rescaled to integrate to the point count;
//! * [`fit_stlgcppm`] — a log-Gaussian Cox process: first-order intensity
//!   from one of the Poisson fits, covariance parameters of the latent field
//!   by minimum contrast against pair-correlation surfaces.

mod glm;
mod lgcp;
mod poisson;
mod quadrature;

pub use lgcp::{
    fit_stlgcppm, minimum_contrast, theoretical_pcf, CovarianceFamily, CovarianceParams,
    FitScope, LgcpFit, LgcpOptions, SecondOrderFit,
};
pub use poisson::{aic_bic, fit_locstppm, fit_separable, fit_stppm};
pub use quadrature::{build_quadrature, QuadratureScheme};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pattern::{signif, signif7, PointPattern};

/// One covariate in a log-linear intensity model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Term {
    X,
    Y,
    T,
    /// The x·y interaction.
    XY,
    /// A named mark column.
    Mark(String),
}

impl Term {
    fn name(&self) -> String {
        match self {
            Term::X => "x".into(),
            Term::Y => "y".into(),
            Term::T => "t".into(),
            Term::XY => "x:y".into(),
            Term::Mark(m) => m.clone(),
        }
    }
}

/// Covariate list for a log-linear model; the intercept is always implied.
///
/// Parsed from R-style text: `~1`, `~x`, `~x + y`, `~x * y` (which expands
/// to `x`, `y` and their interaction), `~x + crime_hour`. Unknown
/// identifiers are taken to be mark-column names and validated against the
/// pattern at fit time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Formula {
    terms: Vec<Term>,
    text: String,
}

impl Formula {
    pub fn parse(s: &str) -> Result<Formula> {
        let stripped: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let body = stripped.strip_prefix('~').unwrap_or(&stripped);
        if body.is_empty() {
            return Err(Error::Formula("empty formula".into()));
        }
        let mut terms = Vec::new();
        let mut push = |t: Term| {
            if !terms.contains(&t) {
                terms.push(t);
            }
        };
        for token in body.split('+') {
            match token {
                "1" => {}
                "x" => push(Term::X),
                "y" => push(Term::Y),
                "t" => push(Term::T),
                "x*y" | "y*x" => {
                    push(Term::X);
                    push(Term::Y);
                    push(Term::XY);
                }
                "x:y" | "y:x" => push(Term::XY),
                name if is_identifier(name) => push(Term::Mark(name.into())),
                other => {
                    return Err(Error::Formula(format!("cannot parse term `{other}`")));
                }
            }
        }
        Ok(Formula { terms, text: format!("~{body}") })
    }

    pub fn intercept_only() -> Formula {
        Formula { terms: Vec::new(), text: "~1".into() }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_intercept_only(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient labels, intercept first.
    pub fn term_names(&self) -> Vec<String> {
        std::iter::once("(Intercept)".into())
            .chain(self.terms.iter().map(Term::name))
            .collect()
    }

    pub fn mark_names(&self) -> Vec<&str> {
        self.terms
            .iter()
            .filter_map(|t| match t {
                Term::Mark(m) => Some(m.as_str()),
                _ => None,
            })
            .collect()
    }

    /// Errors unless every mark term names a column of `p`.
    pub fn check_marks(&self, p: &PointPattern) -> Result<()> {
        for name in self.mark_names() {
            let known = p.marks().map(|m| m.column(name).is_some()).unwrap_or(false);
            if !known {
                return Err(Error::Formula(format!("pattern has no mark column `{name}`")));
            }
        }
        Ok(())
    }

    /// Design row [1, terms...] at a point; `mark` resolves mark columns.
    fn design_row(&self, x: f64, y: f64, t: f64, mark: &dyn Fn(&str) -> f64) -> Vec<f64> {
        let mut row = Vec::with_capacity(1 + self.terms.len());
        row.push(1.0);
        for term in &self.terms {
            row.push(match term {
                Term::X => x,
                Term::Y => y,
                Term::T => t,
                Term::XY => x * y,
                Term::Mark(m) => mark(m),
            });
        }
        row
    }
}

impl std::fmt::Display for Formula {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.text)
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    Separable,
    GlobalPoisson,
    LocalPoisson,
}

impl ModelKind {
    fn label(self) -> &'static str {
        match self {
            ModelKind::Separable => "separable",
            ModelKind::GlobalPoisson => "global Poisson",
            ModelKind::LocalPoisson => "local Poisson",
        }
    }
}

/// A fitted log-linear intensity model.
///
/// `coefficients` holds one row for global and separable fits, and one row
/// per data point for local fits. Separable fits fold the normalising
/// constant into the spatial intercept, so every kind satisfies
/// λ̂(u,t) = exp(θ · z(u,t)) with z the concatenated design row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FittedModel {
    pub kind: ModelKind,
    pub formula: Formula,
    /// Second formula of a separable fit (the temporal part).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub time_formula: Option<Formula>,
    pub term_names: Vec<String>,
    pub coefficients: Vec<Vec<f64>>,
    /// λ̂ at the data points (for local kinds, each from its own row).
    pub fitted_intensity: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub log_likelihood: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub deviance: Option<f64>,
    /// Smoothing bandwidths (σ_s, σ_t) of a local fit.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub bandwidths: Option<(f64, f64)>,
    /// Per-row IRLS convergence; a `false` row kept its last iterate.
    pub converged: Vec<bool>,
    pub n_data: usize,
    /// The quadrature scheme is bulky and reproducible, so it stays out of
    /// serialized output.
    #[serde(skip)]
    pub quadrature: Option<QuadratureScheme>,
}

impl FittedModel {
    /// Writes the descriptive block shared by the standalone Display and the
    /// Cox-process report, which qualifies the coefficient headings with
    /// `heading`.
    fn write_block(&self, f: &mut std::fmt::Formatter<'_>, heading: &str) -> std::fmt::Result {
        match self.kind {
            ModelKind::Separable => {
                writeln!(f, "Separable Poisson process")?;
                writeln!(
                    f,
                    "with spatial trend: {} and temporal trend: {}",
                    self.formula,
                    self.time_formula.as_ref().expect("separable fits carry a time formula")
                )?;
                writeln!(f)?;
                writeln!(f, "Estimated coefficients{heading}:")?;
                write!(f, "{}", named_vector(&self.term_names, &self.coefficients[0]))
            }
            ModelKind::GlobalPoisson => {
                if self.formula.is_intercept_only() {
                    writeln!(f, "Homogeneous Poisson process")?;
                    writeln!(f, "with Intensity: {}", signif7(self.coefficients[0][0].exp()))?;
                } else {
                    writeln!(f, "Inhomogeneous Poisson process")?;
                    writeln!(f, "with Trend: {}", self.formula)?;
                }
                writeln!(f)?;
                writeln!(f, "Estimated coefficients{heading}:")?;
                write!(f, "{}", named_vector(&self.term_names, &self.coefficients[0]))
            }
            ModelKind::LocalPoisson => {
                if self.formula.is_intercept_only() {
                    let mut lam = self.fitted_intensity.clone();
                    lam.sort_by(f64::total_cmp);
                    let median = crate::pattern::quantile_sorted(&lam, 0.5);
                    writeln!(f, "Homogeneous Poisson process")?;
                    writeln!(f, "with median Intensity: {}", signif7(median))?;
                } else {
                    writeln!(f, "Inhomogeneous Poisson process")?;
                    writeln!(f, "with Trend: {}", self.formula)?;
                }
                writeln!(f)?;
                writeln!(f, "Summary of estimated coefficients{heading}")?;
                write!(f, "{}", summary_table(&self.term_names, &self.coefficients))
            }
        }
    }
}

impl std::fmt::Display for FittedModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.write_block(f, "")
    }
}

/// R-style named-vector print: names over values, everything right-aligned
/// to one common column width.
pub(crate) fn named_vector(names: &[String], values: &[f64]) -> String {
    let rendered: Vec<String> = values.iter().map(|v| format!("{v:.3}")).collect();
    let width = names
        .iter()
        .map(String::len)
        .chain(rendered.iter().map(String::len))
        .max()
        .unwrap_or(0);
    let mut out = String::new();
    for (i, name) in names.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&format!("{name:>width$}"));
    }
    out.push('\n');
    for (i, v) in rendered.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&format!("{v:>width$}"));
    }
    out
}

/// R-style `summary`-of-columns table for per-point coefficient rows.
pub(crate) fn summary_table(names: &[String], rows: &[Vec<f64>]) -> String {
    const LABELS: [&str; 6] = ["Min.   ", "1st Qu.", "Median ", "Mean   ", "3rd Qu.", "Max.   "];
    let ncol = names.len();
    let mut cells: Vec<Vec<String>> = Vec::with_capacity(ncol);
    for j in 0..ncol {
        let mut col: Vec<f64> = rows.iter().map(|r| r[j]).collect();
        col.sort_by(f64::total_cmp);
        let mean = col.iter().sum::<f64>() / col.len() as f64;
        let q = |p| crate::pattern::quantile_sorted(&col, p);
        let stats = [q(0.0), q(0.25), q(0.5), mean, q(0.75), q(1.0)];
        cells.push(
            LABELS
                .iter()
                .zip(stats)
                .map(|(label, v)| format!("{label}:{}", signif(v, 4)))
                .collect(),
        );
    }
    let widths: Vec<usize> = (0..ncol)
        .map(|j| cells[j].iter().map(String::len).chain([names[j].len()]).max().unwrap())
        .collect();
    let mut out = String::new();
    out.push(' ');
    for j in 0..ncol {
        if j > 0 {
            out.push_str("  ");
        }
        out.push_str(&format!("{:>w$}", names[j], w = widths[j]));
    }
    for row in 0..LABELS.len() {
        out.push_str("\n ");
        for j in 0..ncol {
            if j > 0 {
                out.push_str("  ");
            }
            out.push_str(&format!("{:<w$}", cells[j][row], w = widths[j]));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{TimeInterval, Window};

    #[test]
    fn formula_parsing_covers_the_term_menu() {
        let f = Formula::parse("~ x + y").unwrap();
        assert_eq!(f.terms(), &[Term::X, Term::Y]);
        assert_eq!(f.to_string(), "~x+y");
        assert_eq!(f.term_names(), vec!["(Intercept)", "x", "y"]);

        let f = Formula::parse("~1").unwrap();
        assert!(f.is_intercept_only());
        assert_eq!(f.term_names(), vec!["(Intercept)"]);

        let f = Formula::parse("x").unwrap(); // leading ~ optional
        assert_eq!(f.terms(), &[Term::X]);

        let f = Formula::parse("~x + crime_hour").unwrap();
        assert_eq!(f.mark_names(), vec!["crime_hour"]);
    }

    #[test]
    fn star_expands_to_main_effects_plus_interaction() {
        let f = Formula::parse("~x*y").unwrap();
        assert_eq!(f.terms(), &[Term::X, Term::Y, Term::XY]);
        // already-present main effects are not duplicated
        let f = Formula::parse("~x + x*y").unwrap();
        assert_eq!(f.terms(), &[Term::X, Term::Y, Term::XY]);
    }

    #[test]
    fn malformed_terms_are_rejected() {
        assert!(matches!(Formula::parse("~x^2"), Err(Error::Formula(_))));
        assert!(matches!(Formula::parse(""), Err(Error::Formula(_))));
        assert!(matches!(Formula::parse("~2x"), Err(Error::Formula(_))));
    }

    #[test]
    fn unknown_mark_columns_fail_the_pattern_check() {
        let p = PointPattern::new_planar(
            vec![[0.2, 0.3, 0.1], [0.7, 0.6, 0.9]],
            Some(Window::unit()),
            Some(TimeInterval::unit()),
        )
        .unwrap();
        let f = Formula::parse("~depth").unwrap();
        assert!(matches!(f.check_marks(&p), Err(Error::Formula(_))));
        let ok = p
            .with_marks(vec!["depth".into()], vec![vec![1.0, 2.0]])
            .unwrap();
        f.check_marks(&ok).unwrap();
    }

    #[test]
    fn design_row_follows_term_order() {
        let f = Formula::parse("~x*y + t + m").unwrap();
        let row = f.design_row(2.0, 3.0, 5.0, &|name| {
            assert_eq!(name, "m");
            7.0
        });
        assert_eq!(row, vec![1.0, 2.0, 3.0, 6.0, 5.0, 7.0]);
    }

    #[test]
    fn named_vector_uses_one_common_width() {
        let out = named_vector(
            &["(Intercept)".into(), "x".into()],
            &[2.18012, 5.78349],
        );
        assert_eq!(out, "(Intercept)           x\n      2.180       5.783");
    }

    #[test]
    fn summary_table_reports_six_statistics_per_column() {
        let rows: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64, 10.0 + i as f64]).collect();
        let out = summary_table(&["(Intercept)".into(), "x".into()], &rows);
        assert!(out.contains("Min.   :0"));
        assert!(out.contains("Median :2"));
        assert!(out.contains("Max.   :14"));
        assert_eq!(out.lines().count(), 7);
    }
}
