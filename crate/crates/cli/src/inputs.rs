//! Shared flag groups and file loading.
//!
//! File formats are picked by extension: `.json` uses the self-describing
//! wire formats (which embed the domain), anything else is CSV. CSV points
//! carry no domain of their own, so the domain flags here supply one.

use clap::Args;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::config::RunConfig;
use stpat::geometry::{LinearNetwork, TimeInterval, Window};
use stpat::intensity::{
    kernel_intensity_network, kernel_intensity_planar, Bandwidth, IntensityValues,
};
use stpat::pattern::{CsvDomain, PointPattern};
use stpat::secondorder::{GridSpec, Statistic};
use stpat::{Error, Result};

#[derive(Args, Debug)]
pub struct DomainOpts {
    /// Observation window x0,x1,y0,y1 (CSV input; with --time)
    #[arg(long, value_name = "X0,X1,Y0,Y1", requires = "time")]
    pub window: Option<String>,

    /// Observation period t0,t1 (CSV input; default: inferred from the data)
    #[arg(long, value_name = "T0,T1")]
    pub time: Option<String>,

    /// Linear network file (CSV rows x0,y0,x1,y1, or JSON); the pattern's
    /// points then live on the network
    #[arg(long, value_name = "FILE")]
    pub network: Option<PathBuf>,

    /// How far a point may sit off the network and still snap onto it
    #[arg(long, value_name = "DIST", requires = "network")]
    pub snap_tolerance: Option<f64>,
}

impl DomainOpts {
    fn any_set(&self) -> bool {
        self.window.is_some() || self.time.is_some() || self.network.is_some()
    }

    fn csv_domain(&self) -> Result<CsvDomain> {
        if let Some(net) = &self.network {
            if self.window.is_some() {
                return Err(Error::InvalidParams(
                    "--window does not combine with --network".into(),
                ));
            }
            return Ok(CsvDomain::Network {
                net: Arc::new(load_network(net, self.snap_tolerance)?),
                time: self.time.as_deref().map(parse_time).transpose()?,
                snap_tolerance: self.snap_tolerance,
            });
        }
        match (&self.window, &self.time) {
            (None, None) => Ok(CsvDomain::Infer),
            (Some(w), Some(t)) => Ok(CsvDomain::Planar {
                window: parse_window(w)?,
                time: parse_time(t)?,
            }),
            // --window without --time is already a clap error; this is the
            // reverse case, where the window would have to be guessed
            _ => Err(Error::InvalidParams(
                "--time needs --window (or --network) to pin down the domain".into(),
            )),
        }
    }

    pub fn record(&self, rc: &mut RunConfig) {
        rc.push_opt("window", self.window.as_ref());
        rc.push_opt("time", self.time.as_ref());
        if let Some(net) = &self.network {
            rc.push("network", net.display());
        }
        rc.push_opt("snap-tolerance", self.snap_tolerance.as_ref());
    }
}

pub fn load_pattern(path: &Path, domain: &DomainOpts) -> Result<PointPattern> {
    if is_json(path) {
        if domain.any_set() {
            return Err(Error::InvalidParams(
                "JSON patterns embed their domain; domain flags apply to CSV input only".into(),
            ));
        }
        return PointPattern::from_json_str(&std::fs::read_to_string(path)?);
    }
    PointPattern::from_csv_path(path, domain.csv_domain()?)
}

pub fn load_network(path: &Path, snap_tolerance: Option<f64>) -> Result<LinearNetwork> {
    if is_json(path) {
        LinearNetwork::from_json_str(&std::fs::read_to_string(path)?)
    } else {
        LinearNetwork::from_csv_path(path, snap_tolerance)
    }
}

pub fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

/// Where weighted statistics get their intensity from. Which choice is the
/// default depends on the subcommand: `none` for k and lista, `auto` for
/// diag (which cannot run unweighted).
#[derive(Args, Debug)]
pub struct LambdaOpts {
    /// Intensity at the data points: `none` (homogeneous), `auto` (kernel
    /// estimate), or a CSV file with one value per pattern row
    #[arg(long, value_name = "none|auto|FILE")]
    pub lambda: Option<String>,

    /// Spatial kernel bandwidth for --lambda auto (default: Silverman)
    #[arg(long, value_name = "BW")]
    pub bw_s: Option<f64>,

    /// Temporal kernel bandwidth for --lambda auto (default: Silverman)
    #[arg(long, value_name = "BW")]
    pub bw_t: Option<f64>,

    /// Leave each point out of its own kernel estimate
    #[arg(long)]
    pub leave_one_out: bool,
}

pub enum LambdaChoice {
    Homogeneous,
    Kernel,
    File(PathBuf),
}

impl LambdaOpts {
    pub fn choice(&self, default_kernel: bool) -> LambdaChoice {
        match self.lambda.as_deref() {
            None if default_kernel => LambdaChoice::Kernel,
            None => LambdaChoice::Homogeneous,
            Some("none") => LambdaChoice::Homogeneous,
            Some("auto") => LambdaChoice::Kernel,
            Some(path) => LambdaChoice::File(PathBuf::from(path)),
        }
    }

    /// `None` means homogeneous weighting.
    pub fn resolve(&self, p: &PointPattern, default_kernel: bool) -> Result<Option<IntensityValues>> {
        match self.choice(default_kernel) {
            LambdaChoice::Homogeneous => Ok(None),
            LambdaChoice::Kernel => {
                let bw = |v: Option<f64>| v.map(Bandwidth::Fixed).unwrap_or(Bandwidth::Auto);
                let estimate = if p.is_network() {
                    kernel_intensity_network
                } else {
                    kernel_intensity_planar
                };
                estimate(p, bw(self.bw_s), bw(self.bw_t), self.leave_one_out).map(Some)
            }
            LambdaChoice::File(path) => read_lambda_csv(&path).map(Some),
        }
    }

    pub fn record(&self, rc: &mut RunConfig) {
        rc.push_opt("lambda", self.lambda.as_ref());
        rc.push_opt("bw-s", self.bw_s.as_ref());
        rc.push_opt("bw-t", self.bw_t.as_ref());
        rc.push_flag("leave-one-out", self.leave_one_out);
    }
}

/// One λ value per row; a non-numeric first row is treated as a header.
pub fn read_lambda_csv(path: &Path) -> Result<IntensityValues> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut values = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        let field = record.get(0).unwrap_or_default();
        match field.parse::<f64>() {
            Ok(v) => values.push(v),
            Err(_) if row == 0 => continue,
            Err(_) => {
                return Err(Error::Parse(format!(
                    "{}:{}: `{field}` is not a number",
                    path.display(),
                    row + 1
                )))
            }
        }
    }
    IntensityValues::from_values(values)
}

pub fn parse_floats(s: &str, expect: usize, what: &str) -> Result<Vec<f64>> {
    let values: Vec<f64> = s
        .split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("{what}: `{part}` is not a number")))
        })
        .collect::<Result<_>>()?;
    if values.len() != expect {
        return Err(Error::Parse(format!(
            "{what}: expected {expect} comma-separated numbers, got {}",
            values.len()
        )));
    }
    Ok(values)
}

pub fn parse_window(s: &str) -> Result<Window> {
    let v = parse_floats(s, 4, "--window")?;
    Window::new(v[0], v[1], v[2], v[3])
}

pub fn parse_time(s: &str) -> Result<TimeInterval> {
    let v = parse_floats(s, 2, "--time")?;
    TimeInterval::new(v[0], v[1])
}

pub fn parse_statistic(s: &str) -> Result<Statistic> {
    match s {
        "k" | "K" => Ok(Statistic::K),
        "pcf" => Ok(Statistic::Pcf),
        other => Err(Error::Parse(format!("--statistic: expected `k` or `pcf`, got `{other}`"))),
    }
}

/// `RMAX,HMAX[,N]`: N evenly spaced nodes ending at each maximum (N = 20
/// when omitted); no flag at all means the data-driven default grid.
pub fn make_grid(flag: Option<&str>, p: &PointPattern) -> Result<GridSpec> {
    let Some(s) = flag else {
        return GridSpec::default_for(p);
    };
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 && parts.len() != 3 {
        return Err(Error::Parse(format!(
            "--grid: expected RMAX,HMAX or RMAX,HMAX,N, got `{s}`"
        )));
    }
    let max = |part: &str, what: &str| -> Result<f64> {
        part.trim()
            .parse::<f64>()
            .map_err(|_| Error::Parse(format!("--grid {what}: `{part}` is not a number")))
    };
    let r_max = max(parts[0], "RMAX")?;
    let h_max = max(parts[1], "HMAX")?;
    let n: usize = match parts.get(2) {
        None => 20,
        Some(part) => part
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("--grid N: `{part}` is not a whole number")))?,
    };
    if n == 0 {
        return Err(Error::Parse("--grid N: at least one node is required".into()));
    }
    let spread = |max: f64| (1..=n).map(|k| max * k as f64 / n as f64).collect();
    GridSpec::new(spread(r_max), spread(h_max))
}
