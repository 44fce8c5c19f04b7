//! One `run_*` function per subcommand. Each loads its inputs, calls the
//! library, prints whatever console block the operation defines, writes the
//! requested files, and finishes by dropping a runconfig sidecar next to
//! every output so the run can be reproduced from the artifact alone.

use clap::Args;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::config::RunConfig;
use crate::inputs::{self, DomainOpts, LambdaChoice, LambdaOpts};
use crate::plot;

use stpat::diagnostics::{globaldiag, infl, localdiag};
use stpat::fit::{
    aic_bic, fit_locstppm, fit_separable, fit_stlgcppm, fit_stppm, CovarianceParams, FittedModel,
    Formula, LgcpFit, LgcpOptions, ModelKind, SecondOrderFit,
};
use stpat::geometry::{TimeInterval, Window};
use stpat::intensity::{Bandwidth, IntensityValues};
use stpat::localtest::localtest;
use stpat::pattern::{Domain, PointPattern};
use stpat::secondorder::{k_global, k_global_scaled, k_inhom_global, lista_network, lista_planar, ListaSurface};
use stpat::simulate::{retas, rstlpp, rstpp, EtasParams, LambdaSpec};
use stpat::{Error, Result};

// ---------------------------------------------------------------- summary

#[derive(Args)]
#[command(args_override_self = true)]
pub struct SummaryArgs {
    /// Pattern file (.csv with the domain flags, or .json)
    #[arg(long)]
    pub pattern: PathBuf,

    #[command(flatten)]
    pub domain: DomainOpts,

    /// Point map SVG
    #[arg(long, value_name = "FILE")]
    pub plot: Option<PathBuf>,
}

pub fn run_summary(args: &SummaryArgs) -> Result<()> {
    let p = inputs::load_pattern(&args.pattern, &args.domain)?;
    println!("{}", p.summarize());
    if let Some(path) = &args.plot {
        plot::pattern_plot(path, &p, &[], "pattern", &format!("{} points", p.n()))?;
        let mut rc = RunConfig::new("summary");
        rc.push("pattern", args.pattern.display());
        args.domain.record(&mut rc);
        rc.push("plot", path.display());
        rc.write_beside(path)?;
    }
    Ok(())
}

// -------------------------------------------------------------------- sim

#[derive(Args)]
#[command(args_override_self = true)]
pub struct SimArgs {
    /// Generator: `poisson` or `etas`
    #[arg(long, default_value = "poisson")]
    pub model: String,

    /// Constant intensity of a Poisson draw
    #[arg(long, conflicts_with = "coef")]
    pub lambda: Option<f64>,

    /// Log-linear intensity exp(c0 + c1·x + c2·y + c3·t)
    #[arg(long, value_name = "C0,C1,C2,C3")]
    pub coef: Option<String>,

    /// ETAS parameter overrides, e.g. mu=0.05,big_a=0.6 (others keep their
    /// defaults; fields: mu, big_a, c, p, d, q, alpha_m, m0, b)
    #[arg(long, value_name = "K=V,...")]
    pub par: Option<String>,

    /// Spatial window x0,x1,y0,y1 (default: unit square)
    #[arg(long, value_name = "X0,X1,Y0,Y1")]
    pub window: Option<String>,

    /// Time period t0,t1 (default: unit interval)
    #[arg(long, value_name = "T0,T1")]
    pub time: Option<String>,

    /// Simulate on this linear network instead of a window
    #[arg(long, value_name = "FILE", conflicts_with = "window")]
    pub network: Option<PathBuf>,

    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    /// Independent replicates; replicate r is drawn with seed+r and written
    /// to `<out>_r.<ext>`
    #[arg(long, default_value_t = 1)]
    pub nsim: usize,

    /// Output pattern file (.csv or .json)
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run_sim(args: &SimArgs) -> Result<()> {
    if args.nsim == 0 {
        return Err(Error::InvalidParams("--nsim: at least one replicate".into()));
    }
    let time = args.time.as_deref().map(inputs::parse_time).transpose()?.unwrap_or(TimeInterval::unit());
    let window = args.window.as_deref().map(inputs::parse_window).transpose()?.unwrap_or(Window::unit());
    let network = match &args.network {
        Some(path) => Some(Arc::new(inputs::load_network(path, None)?)),
        None => None,
    };

    let patterns: Vec<PointPattern> = match args.model.as_str() {
        "poisson" => {
            if args.par.is_some() {
                return Err(Error::InvalidParams("--par applies to the etas model".into()));
            }
            let lambda = match &args.coef {
                Some(c) => {
                    let v = inputs::parse_floats(c, 4, "--coef")?;
                    LambdaSpec::LogLinear { coef: [v[0], v[1], v[2], v[3]], lambda_max: None }
                }
                None => LambdaSpec::Constant(args.lambda.unwrap_or(100.0)),
            };
            match &network {
                None => rstpp(&lambda, window, time, args.seed, args.nsim)?,
                Some(net) => (0..args.nsim)
                    .map(|rep| rstlpp(&lambda, net, time, args.seed.wrapping_add(rep as u64)))
                    .collect::<Result<_>>()?,
            }
        }
        "etas" => {
            if args.lambda.is_some() || args.coef.is_some() {
                return Err(Error::InvalidParams(
                    "--lambda/--coef apply to the poisson model; etas takes --par".into(),
                ));
            }
            let params = etas_params(args.par.as_deref())?;
            let domain = match &network {
                None => Domain::Planar { window, time },
                Some(net) => Domain::Network { net: net.clone(), time },
            };
            (0..args.nsim)
                .map(|rep| retas(&params, &domain, args.seed.wrapping_add(rep as u64)))
                .collect::<Result<_>>()?
        }
        other => {
            return Err(Error::InvalidParams(format!(
                "--model: expected poisson or etas, got `{other}`"
            )))
        }
    };

    for (rep, p) in patterns.iter().enumerate() {
        let path = if args.nsim == 1 { args.out.clone() } else { rep_path(&args.out, rep) };
        write_pattern(p, &path)?;
    }

    let mut rc = RunConfig::new("sim");
    rc.push("model", &args.model);
    match args.model.as_str() {
        "poisson" => match &args.coef {
            Some(c) => rc.push("coef", c),
            None => rc.push("lambda", args.lambda.unwrap_or(100.0)),
        },
        _ => rc.push("par", etas_string(&etas_params(args.par.as_deref())?)),
    }
    match &args.network {
        Some(net) => rc.push("network", net.display()),
        None => rc.push("window", window_string(&window)),
    }
    rc.push("time", format!("{},{}", time.start, time.end));
    rc.push("seed", args.seed);
    rc.push("nsim", args.nsim);
    rc.push("out", args.out.display());
    rc.write_beside(&args.out)
}

fn etas_params(par: Option<&str>) -> Result<EtasParams> {
    let mut p = EtasParams::default();
    let Some(s) = par else { return Ok(p) };
    for item in s.split(',') {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("--par: expected key=value, got `{item}`")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("--par {key}: `{value}` is not a number")))?;
        match key.trim() {
            "mu" => p.mu = value,
            "big_a" => p.big_a = value,
            "c" => p.c = value,
            "p" => p.p = value,
            "d" => p.d = value,
            "q" => p.q = value,
            "alpha_m" => p.alpha_m = value,
            "m0" => p.m0 = value,
            "b" => p.b = value,
            other => return Err(Error::Parse(format!("--par: unknown ETAS parameter `{other}`"))),
        }
    }
    Ok(p)
}

fn etas_string(p: &EtasParams) -> String {
    format!(
        "mu={},big_a={},c={},p={},d={},q={},alpha_m={},m0={},b={}",
        p.mu, p.big_a, p.c, p.p, p.d, p.q, p.alpha_m, p.m0, p.b
    )
}

fn window_string(w: &Window) -> String {
    format!("{},{},{},{}", w.x_min, w.x_max, w.y_min, w.y_max)
}

fn rep_path(base: &Path, rep: usize) -> PathBuf {
    let stem = base.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = base
        .extension()
        .map(|e| format!(".{}", e.to_string_lossy()))
        .unwrap_or_default();
    base.with_file_name(format!("{stem}_{rep}{ext}"))
}

fn write_pattern(p: &PointPattern, path: &Path) -> Result<()> {
    if inputs::is_json(path) {
        std::fs::write(path, p.to_json_string()?)?;
    } else {
        p.to_csv_writer(BufWriter::new(File::create(path)?))?;
    }
    Ok(())
}

// ---------------------------------------------------------------------- k

#[derive(Args)]
#[command(args_override_self = true)]
pub struct KArgs {
    /// Pattern file (.csv with the domain flags, or .json); planar only
    #[arg(long)]
    pub pattern: PathBuf,

    #[command(flatten)]
    pub domain: DomainOpts,

    #[command(flatten)]
    pub lambda: LambdaOpts,

    /// Evaluation grid RMAX,HMAX[,N] (default: 20 nodes up to a quarter of
    /// the largest distance and of the period)
    #[arg(long, value_name = "RMAX,HMAX[,N]")]
    pub grid: Option<String>,

    /// Divide the homogeneous surface by the squared average intensity,
    /// putting it on the Poisson benchmark scale
    #[arg(long)]
    pub scaled: bool,

    /// Surface CSV (r,h,value,theo)
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Three-panel SVG: estimated, theoretical, difference
    #[arg(long, value_name = "FILE")]
    pub plot: Option<PathBuf>,
}

pub fn run_k(args: &KArgs) -> Result<()> {
    require_outputs(&args.out, &args.plot)?;
    let p = inputs::load_pattern(&args.pattern, &args.domain)?;
    let grid = inputs::make_grid(args.grid.as_deref(), &p)?;
    let choice = args.lambda.choice(false);
    if args.scaled && !matches!(choice, LambdaChoice::Homogeneous) {
        return Err(Error::InvalidParams(
            "--scaled applies to the homogeneous statistic (--lambda none)".into(),
        ));
    }
    let surface = match args.lambda.resolve(&p, false)? {
        None if args.scaled => k_global_scaled(&p, &grid)?,
        None => k_global(&p, &grid)?,
        Some(lam) => k_inhom_global(&p, &lam, &grid)?,
    };
    if let Some(out) = &args.out {
        surface.to_csv_writer(BufWriter::new(File::create(out)?))?;
    }
    if let Some(path) = &args.plot {
        plot::k_panels(path, &surface)?;
    }

    let mut rc = RunConfig::new("k");
    rc.push("pattern", args.pattern.display());
    args.domain.record(&mut rc);
    args.lambda.record(&mut rc);
    rc.push_opt("grid", args.grid.as_ref());
    rc.push_flag("scaled", args.scaled);
    if let Some(out) = &args.out {
        rc.push("out", out.display());
    }
    if let Some(path) = &args.plot {
        rc.push("plot", path.display());
    }
    write_sidecars(&rc, &args.out, &args.plot)
}

// ------------------------------------------------------------------ lista

#[derive(Args)]
#[command(args_override_self = true)]
pub struct ListaArgs {
    /// Pattern file (.csv with the domain flags, or .json)
    #[arg(long)]
    pub pattern: PathBuf,

    #[command(flatten)]
    pub domain: DomainOpts,

    #[command(flatten)]
    pub lambda: LambdaOpts,

    /// `k` or `pcf`
    #[arg(long, default_value = "k")]
    pub statistic: String,

    /// Divide network surfaces by the pattern-wide normalizer D(X)
    #[arg(long)]
    pub normalize: bool,

    /// Evaluation grid RMAX,HMAX[,N]
    #[arg(long, value_name = "RMAX,HMAX[,N]")]
    pub grid: Option<String>,

    /// Restrict the output to this point (0-based row of the pattern file)
    #[arg(long)]
    pub point: Option<usize>,

    /// Long CSV point,r,h,value
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Heatmap SVG of one point's surface (requires --point)
    #[arg(long, value_name = "FILE", requires = "point")]
    pub plot: Option<PathBuf>,
}

pub fn run_lista(args: &ListaArgs) -> Result<()> {
    require_outputs(&args.out, &args.plot)?;
    let p = inputs::load_pattern(&args.pattern, &args.domain)?;
    if let Some(i) = args.point {
        if i >= p.n() {
            return Err(Error::InvalidParams(format!(
                "--point {i} is out of range for a pattern of {} points",
                p.n()
            )));
        }
    }
    let grid = inputs::make_grid(args.grid.as_deref(), &p)?;
    let statistic = inputs::parse_statistic(&args.statistic)?;
    let lam = args.lambda.resolve(&p, false)?;

    let surfaces: Vec<ListaSurface> = if p.is_network() {
        // the network estimator always weights by an intensity; homogeneous
        // weighting just means the constant λ̂ = n/(|L||T|)
        let lam = match lam {
            Some(lam) => lam,
            None => IntensityValues::constant(p.n() as f64 / p.volume(), p.n())?,
        };
        let result = lista_network(&p, &lam, statistic, args.normalize, &grid)?;
        if result.excluded_pairs > 0 {
            eprintln!(
                "note: {} point pairs on mutually unreachable components were skipped",
                result.excluded_pairs
            );
        }
        result.surfaces
    } else {
        if args.normalize {
            return Err(Error::InvalidParams("--normalize applies to network patterns".into()));
        }
        lista_planar(&p, lam.as_ref(), statistic, &grid)?
    };

    if let Some(out) = &args.out {
        let mut w = csv::Writer::from_path(out)?;
        w.write_record(["point", "r", "h", "value"])?;
        let selected: Vec<usize> = match args.point {
            Some(i) => vec![i],
            None => (0..surfaces.len()).collect(),
        };
        for i in selected {
            let s = &surfaces[i];
            for (a, &r) in grid.r_values().iter().enumerate() {
                for (b, &h) in grid.h_values().iter().enumerate() {
                    w.write_record([i.to_string(), fnum(r), fnum(h), fnum(s.values[a][b])])?;
                }
            }
        }
        w.flush()?;
    }
    if let Some(path) = &args.plot {
        let i = args.point.expect("clap enforces --point with --plot");
        plot::surface_panels(
            path,
            &grid,
            &[plot::Panel { title: "estimated", values: &surfaces[i].values, diverging: false }],
        )?;
    }

    let mut rc = RunConfig::new("lista");
    rc.push("pattern", args.pattern.display());
    args.domain.record(&mut rc);
    args.lambda.record(&mut rc);
    rc.push("statistic", &args.statistic);
    rc.push_flag("normalize", args.normalize);
    rc.push_opt("grid", args.grid.as_ref());
    rc.push_opt("point", args.point.as_ref());
    if let Some(out) = &args.out {
        rc.push("out", out.display());
    }
    if let Some(path) = &args.plot {
        rc.push("plot", path.display());
    }
    write_sidecars(&rc, &args.out, &args.plot)
}

// -------------------------------------------------------------- localtest

#[derive(Args)]
#[command(args_override_self = true)]
pub struct LocaltestArgs {
    /// Pattern whose points get tested
    #[arg(long)]
    pub background: PathBuf,

    /// Pattern supplying the replacement points under the null
    #[arg(long)]
    pub alternative: PathBuf,

    #[command(flatten)]
    pub domain: DomainOpts,

    /// `k` or `pcf`
    #[arg(long, default_value = "k")]
    pub statistic: String,

    /// Permuted patterns per tested point
    #[arg(long, default_value_t = 19)]
    pub k: usize,

    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,

    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    /// Result JSON (p-values, significant point indices)
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// SVG of the background pattern with significant points set off
    #[arg(long, value_name = "FILE")]
    pub plot: Option<PathBuf>,
}

pub fn run_localtest(args: &LocaltestArgs) -> Result<()> {
    let x = inputs::load_pattern(&args.background, &args.domain)?;
    let z = inputs::load_pattern(&args.alternative, &args.domain)?;
    let statistic = inputs::parse_statistic(&args.statistic)?;
    let result = localtest(&x, &z, statistic, args.k, args.alpha, args.seed)?;
    println!("{result}");
    if let Some(out) = &args.out {
        write_json(out, &result)?;
    }
    if let Some(path) = &args.plot {
        plot::pattern_plot(
            path,
            &x,
            &result.significant_indices,
            "background pattern",
            &format!(
                "{} of {} points significant at alpha = {}",
                result.significant_indices.len(),
                x.n(),
                args.alpha
            ),
        )?;
    }

    let mut rc = RunConfig::new("localtest");
    rc.push("background", args.background.display());
    rc.push("alternative", args.alternative.display());
    args.domain.record(&mut rc);
    rc.push("statistic", &args.statistic);
    rc.push("k", args.k);
    rc.push("alpha", args.alpha);
    rc.push("seed", args.seed);
    if let Some(out) = &args.out {
        rc.push("out", out.display());
    }
    if let Some(path) = &args.plot {
        rc.push("plot", path.display());
    }
    write_sidecars(&rc, &args.out, &args.plot)
}

// -------------------------------------------------------------------- fit

#[derive(Args)]
#[command(args_override_self = true)]
pub struct FitArgs {
    /// Pattern file (.csv with the domain flags, or .json)
    #[arg(long)]
    pub pattern: PathBuf,

    #[command(flatten)]
    pub domain: DomainOpts,

    /// `poisson`, `locpoisson`, `sep`, or `lgcp`
    #[arg(long)]
    pub model: String,

    /// Trend formula: ~1, ~x+y, ~x*y+t, mark columns by name
    #[arg(long, default_value = "~1")]
    pub formula: String,

    /// Temporal trend of a separable fit
    #[arg(long, default_value = "~1")]
    pub time_formula: String,

    /// Spatial smoothing bandwidth of the local fit (default: Silverman)
    #[arg(long, value_name = "BW")]
    pub bw_s: Option<f64>,

    /// Temporal smoothing bandwidth of the local fit (default: Silverman)
    #[arg(long, value_name = "BW")]
    pub bw_t: Option<f64>,

    /// lgcp: latent covariance family `sepexp`, `gneiting`, or `iaco-cesare`
    #[arg(long, default_value = "sepexp")]
    pub family: String,

    /// lgcp: `global` or `local` first-order intensity
    #[arg(long, default_value = "global")]
    pub first: String,

    /// lgcp: `global` or `local` second-order fit
    #[arg(long, default_value = "global")]
    pub second: String,

    /// lgcp: estimate the shape exponents instead of freezing them at 1
    #[arg(long)]
    pub estimate_shapes: bool,

    /// lgcp: seed of the minimum-contrast restarts
    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    /// Fit JSON; per-point tables go to `<stem>_points.csv` (and
    /// `<stem>_params.csv` for a local second-order fit)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run_fit(args: &FitArgs) -> Result<()> {
    let p = inputs::load_pattern(&args.pattern, &args.domain)?;
    let formula = Formula::parse(&args.formula)?;
    if (args.bw_s.is_some() || args.bw_t.is_some())
        && args.model != "locpoisson"
        && args.model != "lgcp"
    {
        return Err(Error::InvalidParams(
            "--bw-s/--bw-t apply to local fits (locpoisson, lgcp --first local)".into(),
        ));
    }
    let bw = |v: Option<f64>| v.map(Bandwidth::Fixed).unwrap_or(Bandwidth::Auto);

    enum Outcome {
        Poisson(FittedModel),
        Lgcp(LgcpFit),
    }
    let outcome = match args.model.as_str() {
        "poisson" => Outcome::Poisson(fit_stppm(&p, &formula)?),
        "locpoisson" => {
            Outcome::Poisson(fit_locstppm(&p, &formula, bw(args.bw_s), bw(args.bw_t))?)
        }
        "sep" => Outcome::Poisson(fit_separable(
            &p,
            &formula,
            &Formula::parse(&args.time_formula)?,
        )?),
        "lgcp" => Outcome::Lgcp(fit_stlgcppm(
            &p,
            &formula,
            args.first.parse()?,
            args.second.parse()?,
            args.family.parse()?,
            args.seed,
            LgcpOptions { estimate_shapes: args.estimate_shapes },
        )?),
        other => {
            return Err(Error::InvalidParams(format!(
                "--model: expected poisson, locpoisson, sep or lgcp, got `{other}`"
            )))
        }
    };

    match &outcome {
        Outcome::Poisson(m) => println!("{m}"),
        Outcome::Lgcp(fit) => println!("{fit}"),
    }

    if let Some(out) = &args.out {
        match &outcome {
            Outcome::Poisson(m) => {
                // AIC/BIC ride along when the fit carries a likelihood
                let mut json = serde_json::to_value(m)?;
                if let (Ok((aic, bic)), Some(obj)) = (aic_bic(m), json.as_object_mut()) {
                    obj.insert("aic".into(), aic.into());
                    obj.insert("bic".into(), bic.into());
                }
                write_json(out, &json)?;
                write_points_csv(&sibling(out, "_points", "csv"), &p, m)?;
            }
            Outcome::Lgcp(fit) => {
                write_json(out, fit)?;
                write_points_csv(&sibling(out, "_points", "csv"), &p, &fit.first_order)?;
                if let SecondOrderFit::Local(rows) = &fit.second_order {
                    write_params_csv(&sibling(out, "_params", "csv"), rows)?;
                }
            }
        }
    }

    let mut rc = RunConfig::new("fit");
    rc.push("pattern", args.pattern.display());
    args.domain.record(&mut rc);
    rc.push("model", &args.model);
    rc.push("formula", &args.formula);
    if args.model == "sep" {
        rc.push("time-formula", &args.time_formula);
    }
    rc.push_opt("bw-s", args.bw_s.as_ref());
    rc.push_opt("bw-t", args.bw_t.as_ref());
    if args.model == "lgcp" {
        rc.push("family", &args.family);
        rc.push("first", &args.first);
        rc.push("second", &args.second);
        rc.push_flag("estimate-shapes", args.estimate_shapes);
        rc.push("seed", args.seed);
    }
    if let Some(out) = &args.out {
        rc.push("out", out.display());
        rc.write_beside(out)?;
    }
    Ok(())
}

fn write_points_csv(path: &Path, p: &PointPattern, m: &FittedModel) -> Result<()> {
    let local = matches!(m.kind, ModelKind::LocalPoisson);
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["x".to_string(), "y".into(), "t".into(), "fitted".into()];
    if local {
        header.push("converged".into());
        header.extend(m.term_names.iter().cloned());
    }
    w.write_record(&header)?;
    for (i, pt) in p.points().iter().enumerate() {
        let mut record = vec![fnum(pt[0]), fnum(pt[1]), fnum(pt[2]), fnum(m.fitted_intensity[i])];
        if local {
            record.push(m.converged[i].to_string());
            record.extend(m.coefficients[i].iter().map(|&c| fnum(c)));
        }
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

fn write_params_csv(path: &Path, rows: &[CovarianceParams]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["sigma2", "alpha", "beta", "gamma_s", "gamma_t", "delta"])?;
    for r in rows {
        w.write_record([
            fnum(r.sigma2),
            fnum(r.alpha),
            fnum(r.beta),
            fnum(r.gamma_s),
            fnum(r.gamma_t),
            fnum(r.delta),
        ])?;
    }
    w.flush()?;
    Ok(())
}

// ------------------------------------------------------------------- diag

#[derive(Args)]
#[command(args_override_self = true)]
pub struct DiagArgs {
    /// Pattern file (.csv with the domain flags, or .json)
    #[arg(long)]
    pub pattern: PathBuf,

    #[command(flatten)]
    pub domain: DomainOpts,

    /// Intensity to judge: defaults to `auto` here (a kernel estimate);
    /// pass a CSV file to score a fitted model's values
    #[command(flatten)]
    pub lambda: LambdaOpts,

    /// Evaluation grid RMAX,HMAX[,N]
    #[arg(long, value_name = "RMAX,HMAX[,N]")]
    pub grid: Option<String>,

    /// `global` (one score) or `local` (per-point scores and outliers)
    #[arg(long, default_value = "global")]
    pub mode: String,

    /// Quantile of the per-point scores beyond which points are flagged
    #[arg(long, default_value_t = 0.95)]
    pub percentile: f64,

    /// Result JSON; local mode adds the ranked outliers as `<stem>_infl.csv`
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// SVG: three comparison panels (global) or the pattern with outlying
    /// points set off (local)
    #[arg(long, value_name = "FILE")]
    pub plot: Option<PathBuf>,
}

pub fn run_diag(args: &DiagArgs) -> Result<()> {
    let p = inputs::load_pattern(&args.pattern, &args.domain)?;
    let grid = inputs::make_grid(args.grid.as_deref(), &p)?;
    let lam = args.lambda.resolve(&p, true)?.ok_or_else(|| {
        Error::InvalidParams("the diagnostic needs an intensity: --lambda auto or a file".into())
    })?;

    match args.mode.as_str() {
        "global" => {
            let result = globaldiag(&p, &lam, &grid)?;
            println!("{result}");
            if let Some(out) = &args.out {
                write_json(out, &result)?;
            }
            if let Some(path) = &args.plot {
                plot::surface_panels(
                    path,
                    &grid,
                    &[
                        plot::Panel {
                            title: "estimated",
                            values: &result.k_weighted.values,
                            diverging: false,
                        },
                        plot::Panel { title: "theoretical", values: result.k_theo(), diverging: false },
                        plot::Panel { title: "difference", values: &result.diff, diverging: true },
                    ],
                )?;
            }
        }
        "local" => {
            let result = localdiag(&p, &lam, args.percentile, &grid)?;
            println!("{result}");
            if let Some(out) = &args.out {
                write_json(out, &result)?;
                let report = infl(&result, &p)?;
                report.to_csv_writer(BufWriter::new(File::create(sibling(out, "_infl", "csv"))?))?;
            }
            if let Some(path) = &args.plot {
                plot::pattern_plot(
                    path,
                    &p,
                    &result.outlier_indices,
                    "analysed pattern",
                    &format!(
                        "{} of {} points beyond the {} percentile of the score distribution",
                        result.outlier_indices.len(),
                        p.n(),
                        args.percentile
                    ),
                )?;
            }
        }
        other => {
            return Err(Error::InvalidParams(format!(
                "--mode: expected global or local, got `{other}`"
            )))
        }
    }

    let mut rc = RunConfig::new("diag");
    rc.push("pattern", args.pattern.display());
    args.domain.record(&mut rc);
    args.lambda.record(&mut rc);
    rc.push_opt("grid", args.grid.as_ref());
    rc.push("mode", &args.mode);
    if args.mode == "local" {
        rc.push("percentile", args.percentile);
    }
    if let Some(out) = &args.out {
        rc.push("out", out.display());
    }
    if let Some(path) = &args.plot {
        rc.push("plot", path.display());
    }
    write_sidecars(&rc, &args.out, &args.plot)
}

// ---------------------------------------------------------------- helpers

/// Shortest exact decimal form; reparses to the same bits.
fn fnum(x: f64) -> String {
    format!("{x}")
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn sibling(path: &Path, suffix: &str, ext: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}.{ext}"))
}

fn require_outputs(out: &Option<PathBuf>, plot: &Option<PathBuf>) -> Result<()> {
    if out.is_none() && plot.is_none() {
        return Err(Error::InvalidParams("nothing to write: pass --out and/or --plot".into()));
    }
    Ok(())
}

/// One sidecar next to each requested artifact (they coincide when both
/// live in the same stem).
fn write_sidecars(rc: &RunConfig, out: &Option<PathBuf>, plot: &Option<PathBuf>) -> Result<()> {
    if let Some(out) = out {
        rc.write_beside(out)?;
    }
    if let Some(plot) = plot {
        rc.write_beside(plot)?;
    }
    Ok(())
}
