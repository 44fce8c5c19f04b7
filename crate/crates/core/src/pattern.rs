//! Spatio-temporal point patterns on planar windows or linear networks.
//!
//! A pattern stores (x, y, t) rows, its observation domain, and optional
//! named numeric mark columns. Network patterns additionally carry each
//! point's snapped [`NetworkLocation`]. Construction validates the lot:
//! duplicate space-time rows, points outside the domain, and points too far
//! from the network to snap are all hard errors, so downstream estimators
//! never re-check.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{LinearNetwork, NetworkLocation, TimeInterval, Window};

/// Observation domain of a pattern.
#[derive(Debug, Clone)]
pub enum Domain {
    Planar { window: Window, time: TimeInterval },
    Network { net: Arc<LinearNetwork>, time: TimeInterval },
}

impl Domain {
    pub fn time(&self) -> TimeInterval {
        match self {
            Domain::Planar { time, .. } | Domain::Network { time, .. } => *time,
        }
    }

    /// Spatial size: window area, or total network length.
    pub fn spatial_size(&self) -> f64 {
        match self {
            Domain::Planar { window, .. } => window.area(),
            Domain::Network { net, .. } => net.total_length(),
        }
    }

    /// |W|·|T| (planar) or |L|·|T| (network).
    pub fn volume(&self) -> f64 {
        self.spatial_size() * self.time().length()
    }
}

/// Named numeric mark columns, aligned with the pattern's points.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Marks {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
}

impl Marks {
    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.columns[i].as_slice())
    }
}

#[derive(Debug, Clone)]
pub struct PointPattern {
    points: Vec<[f64; 3]>,
    domain: Domain,
    /// Snapped on-network addresses; present iff the domain is a network.
    locations: Option<Vec<NetworkLocation>>,
    marks: Option<Marks>,
}

fn infer_window(points: &[[f64; 3]]) -> Result<Window> {
    let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in points {
        x0 = x0.min(p[0]);
        x1 = x1.max(p[0]);
        y0 = y0.min(p[1]);
        y1 = y1.max(p[1]);
    }
    Window::new(x0, x1, y0, y1).map_err(|_| {
        Error::InvalidDomain("cannot infer a window with positive area from these points".into())
    })
}

fn infer_time(points: &[[f64; 3]]) -> Result<TimeInterval> {
    let (mut t0, mut t1) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in points {
        t0 = t0.min(p[2]);
        t1 = t1.max(p[2]);
    }
    TimeInterval::new(t0, t1).map_err(|_| {
        Error::InvalidDomain("cannot infer a time interval of positive length".into())
    })
}

fn check_duplicates(points: &[[f64; 3]]) -> Result<()> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| {
        points[i]
            .iter()
            .zip(points[j].iter())
            .map(|(a, b)| a.total_cmp(b))
            .find(|o| *o != std::cmp::Ordering::Equal)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    for w in order.windows(2) {
        if points[w[0]] == points[w[1]] {
            let (first, second) = (w[0].min(w[1]), w[0].max(w[1]));
            return Err(Error::DuplicatePoint { first, second });
        }
    }
    Ok(())
}

impl PointPattern {
    /// Builds a planar pattern. `None` window or time means "infer the
    /// bounding box / spanned interval from the data".
    pub fn new_planar(
        points: Vec<[f64; 3]>,
        window: Option<Window>,
        time: Option<TimeInterval>,
    ) -> Result<Self> {
        for (index, p) in points.iter().enumerate() {
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::PointOutsideDomain { index });
            }
        }
        let window = match window {
            Some(w) => w,
            None => infer_window(&points)?,
        };
        let time = match time {
            Some(t) => t,
            None => infer_time(&points)?,
        };
        for (index, p) in points.iter().enumerate() {
            if !window.contains(p[0], p[1]) || !time.contains(p[2]) {
                return Err(Error::PointOutsideDomain { index });
            }
        }
        check_duplicates(&points)?;
        Ok(PointPattern {
            points,
            domain: Domain::Planar { window, time },
            locations: None,
            marks: None,
        })
    }

    /// Builds a network pattern by snapping each point onto the network.
    /// Points farther than `snap_tolerance` (default: 1e-6 of the network's
    /// bounding-box diagonal) from the network are rejected.
    pub fn new_network(
        points: Vec<[f64; 3]>,
        net: Arc<LinearNetwork>,
        time: Option<TimeInterval>,
        snap_tolerance: Option<f64>,
    ) -> Result<Self> {
        let tol = snap_tolerance.unwrap_or(1e-6 * net.bounding_box().diagonal());
        let time = match time {
            Some(t) => t,
            None => infer_time(&points)?,
        };
        let mut snapped = Vec::with_capacity(points.len());
        let mut locations = Vec::with_capacity(points.len());
        for (index, p) in points.iter().enumerate() {
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::PointOutsideDomain { index });
            }
            if !time.contains(p[2]) {
                return Err(Error::PointOutsideDomain { index });
            }
            let (loc, dist) = net.project(p[0], p[1]);
            if dist > tol {
                return Err(Error::SnapFailure { index, distance: dist, tolerance: tol });
            }
            let (x, y) = net.xy(&loc);
            snapped.push([x, y, p[2]]);
            locations.push(loc);
        }
        check_duplicates(&snapped)?;
        Ok(PointPattern {
            points: snapped,
            domain: Domain::Network { net, time },
            locations: Some(locations),
            marks: None,
        })
    }

    /// Builds a network pattern from already-known on-network locations
    /// (used by the simulators, which generate points on the network).
    pub fn from_network_locations(
        locations: Vec<NetworkLocation>,
        times: Vec<f64>,
        net: Arc<LinearNetwork>,
        time: TimeInterval,
    ) -> Result<Self> {
        if locations.len() != times.len() {
            return Err(Error::LengthMismatch { expected: locations.len(), got: times.len() });
        }
        let mut points = Vec::with_capacity(locations.len());
        for (index, (loc, &t)) in locations.iter().zip(times.iter()).enumerate() {
            if !time.contains(t) {
                return Err(Error::PointOutsideDomain { index });
            }
            let (x, y) = net.xy(loc);
            points.push([x, y, t]);
        }
        check_duplicates(&points)?;
        Ok(PointPattern {
            points,
            domain: Domain::Network { net, time },
            locations: Some(locations),
            marks: None,
        })
    }

    /// Attaches mark columns; every column must match the point count.
    pub fn with_marks(mut self, names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(Error::LengthMismatch { expected: names.len(), got: columns.len() });
        }
        for col in &columns {
            if col.len() != self.points.len() {
                return Err(Error::LengthMismatch {
                    expected: self.points.len(),
                    got: col.len(),
                });
            }
        }
        for (i, name) in names.iter().enumerate() {
            if ["x", "y", "t"].contains(&name.as_str()) || names[..i].contains(name) {
                return Err(Error::Parse(format!("invalid or repeated mark name '{name}'")));
            }
        }
        self.marks = Some(Marks { names, columns });
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn time_interval(&self) -> TimeInterval {
        self.domain.time()
    }

    pub fn window(&self) -> Option<Window> {
        match &self.domain {
            Domain::Planar { window, .. } => Some(*window),
            Domain::Network { .. } => None,
        }
    }

    pub fn network(&self) -> Option<&Arc<LinearNetwork>> {
        match &self.domain {
            Domain::Network { net, .. } => Some(net),
            Domain::Planar { .. } => None,
        }
    }

    pub fn is_network(&self) -> bool {
        matches!(self.domain, Domain::Network { .. })
    }

    pub fn locations(&self) -> Option<&[NetworkLocation]> {
        self.locations.as_deref()
    }

    pub fn marks(&self) -> Option<&Marks> {
        self.marks.as_ref()
    }

    /// |W|·|T| or |L|·|T|.
    pub fn volume(&self) -> f64 {
        self.domain.volume()
    }

    /// New pattern keeping only the given point indices (marks follow).
    pub fn select(&self, indices: &[usize]) -> PointPattern {
        let points = indices.iter().map(|&i| self.points[i]).collect();
        let locations = self
            .locations
            .as_ref()
            .map(|locs| indices.iter().map(|&i| locs[i]).collect());
        let marks = self.marks.as_ref().map(|m| Marks {
            names: m.names.clone(),
            columns: m
                .columns
                .iter()
                .map(|c| indices.iter().map(|&i| c[i]).collect())
                .collect(),
        });
        PointPattern { points, domain: self.domain.clone(), locations, marks }
    }

    pub fn summarize(&self) -> PatternSummary {
        let col = |k: usize| -> Vec<f64> { self.points.iter().map(|p| p[k]).collect() };
        let network = self.network().map(|net| NetworkInfo {
            vertices: net.vertices().len(),
            segments: net.segments().len(),
            total_length: net.total_length(),
        });
        PatternSummary {
            n: self.n(),
            x: FiveNumber::of(&col(0)),
            y: FiveNumber::of(&col(1)),
            t: FiveNumber::of(&col(2)),
            network,
        }
    }

    // ---- CSV / JSON ------------------------------------------------------

    /// Reads a pattern from CSV with header `x,y,t`; any extra columns become
    /// numeric marks. `domain` semantics as in the constructors.
    pub fn from_csv_reader<R: Read>(reader: R, domain: CsvDomain) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        let mut idx_x = None;
        let mut idx_y = None;
        let mut idx_t = None;
        let mut mark_cols: Vec<(usize, String)> = Vec::new();
        for (i, h) in headers.iter().enumerate() {
            match h.to_ascii_lowercase().as_str() {
                "x" => idx_x = Some(i),
                "y" => idx_y = Some(i),
                "t" => idx_t = Some(i),
                _ => mark_cols.push((i, h.to_string())),
            }
        }
        let (ix, iy, it) = match (idx_x, idx_y, idx_t) {
            (Some(a), Some(b), Some(c)) => (a, b, c),
            _ => return Err(Error::Parse("pattern CSV needs x, y and t columns".into())),
        };
        let mut points = Vec::new();
        let mut marks: Vec<Vec<f64>> = vec![Vec::new(); mark_cols.len()];
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let get = |i: usize| -> Result<f64> {
                rec.get(i)
                    .ok_or_else(|| Error::Parse(format!("row {row}: missing field {i}")))?
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("row {row}: {e}")))
            };
            points.push([get(ix)?, get(iy)?, get(it)?]);
            for (k, (i, _)) in mark_cols.iter().enumerate() {
                marks[k].push(get(*i)?);
            }
        }
        let pattern = match domain {
            CsvDomain::Infer => PointPattern::new_planar(points, None, None)?,
            CsvDomain::Planar { window, time } => {
                PointPattern::new_planar(points, Some(window), Some(time))?
            }
            CsvDomain::Network { net, time, snap_tolerance } => {
                PointPattern::new_network(points, net, time, snap_tolerance)?
            }
        };
        if mark_cols.is_empty() {
            Ok(pattern)
        } else {
            pattern.with_marks(mark_cols.into_iter().map(|(_, n)| n).collect(), marks)
        }
    }

    pub fn from_csv_path<P: AsRef<Path>>(path: P, domain: CsvDomain) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::from_csv_reader(f, domain)
    }

    /// Writes `x,y,t[,marks...]` with round-trip-exact float formatting.
    pub fn to_csv_writer<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header = vec!["x".to_string(), "y".to_string(), "t".to_string()];
        if let Some(m) = &self.marks {
            header.extend(m.names.iter().cloned());
        }
        wtr.write_record(&header)?;
        let mut row: Vec<String> = Vec::with_capacity(header.len());
        for (i, p) in self.points.iter().enumerate() {
            row.clear();
            row.extend(p.iter().map(|v| format_float(*v)));
            if let Some(m) = &self.marks {
                row.extend(m.columns.iter().map(|c| format_float(c[i])));
            }
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn to_csv_path<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.to_csv_writer(f)
    }

    pub fn to_json_string(&self) -> Result<String> {
        let wire = PatternWire {
            points: self.points.clone(),
            time: self.time_interval(),
            window: self.window(),
            network: self.network().map(|n| (**n).clone()),
            marks: self.marks.clone(),
        };
        Ok(serde_json::to_string_pretty(&wire)?)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let wire: PatternWire = serde_json::from_str(s)?;
        let base = match (wire.window, wire.network) {
            (_, Some(net)) => PointPattern::new_network(
                wire.points,
                Arc::new(net),
                Some(wire.time),
                None,
            )?,
            (Some(window), None) => {
                PointPattern::new_planar(wire.points, Some(window), Some(wire.time))?
            }
            (None, None) => PointPattern::new_planar(wire.points, None, Some(wire.time))?,
        };
        match wire.marks {
            Some(m) => base.with_marks(m.names, m.columns),
            None => Ok(base),
        }
    }
}

/// Domain argument for CSV ingestion.
pub enum CsvDomain {
    /// Infer window and time interval from the data's bounding box.
    Infer,
    Planar {
        window: Window,
        time: TimeInterval,
    },
    Network {
        net: Arc<LinearNetwork>,
        time: Option<TimeInterval>,
        snap_tolerance: Option<f64>,
    },
}

#[derive(Serialize, Deserialize)]
struct PatternWire {
    points: Vec<[f64; 3]>,
    time: TimeInterval,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    window: Option<Window>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    network: Option<LinearNetwork>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    marks: Option<Marks>,
}

/// Shortest round-trip representation; parses back to the identical f64.
pub(crate) fn format_float(v: f64) -> String {
    let mut s = format!("{v}");
    if !s.contains(['.', 'e', 'E', 'n', 'i']) {
        s.push_str(".0");
    }
    s
}

/// Min, quartiles and max computed by linear interpolation between order
/// statistics (the same convention feeds every quantile in this crate).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FiveNumber {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl FiveNumber {
    pub fn of(values: &[f64]) -> FiveNumber {
        let mut s = values.to_vec();
        s.sort_by(f64::total_cmp);
        FiveNumber {
            min: quantile_sorted(&s, 0.0),
            q1: quantile_sorted(&s, 0.25),
            median: quantile_sorted(&s, 0.5),
            q3: quantile_sorted(&s, 0.75),
            max: quantile_sorted(&s, 1.0),
        }
    }
}

/// Quantile of a sorted sample: index h = (n-1)p, interpolated linearly
/// between the bracketing order statistics.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NetworkInfo {
    pub vertices: usize,
    pub segments: usize,
    pub total_length: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PatternSummary {
    pub n: usize,
    pub x: FiveNumber,
    pub y: FiveNumber,
    pub t: FiveNumber,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub network: Option<NetworkInfo>,
}

/// Rounds to `digits` significant digits; the Display impl then prints the
/// shortest exact form, which matches how summary blocks are conventionally
/// shown.
pub(crate) fn signif(x: f64, digits: i32) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let d = 10f64.powi(digits - 1 - x.abs().log10().floor() as i32);
    (x * d).round() / d
}

pub(crate) fn signif7(x: f64) -> f64 {
    signif(x, 7)
}

impl fmt::Display for PatternSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.network.is_some() {
            writeln!(f, "Spatio-temporal point pattern on a linear network")?;
        } else {
            writeln!(f, "Spatio-temporal point pattern")?;
        }
        writeln!(f, "{} points", self.n)?;
        if let Some(net) = &self.network {
            writeln!(
                f,
                "Linear network: {} vertices, {} segments, total length {}",
                net.vertices,
                net.segments,
                signif7(net.total_length)
            )?;
        }
        writeln!(
            f,
            "Enclosing window: rectangle = [{}, {}] x [{}, {}] units",
            signif7(self.x.min),
            signif7(self.x.max),
            signif7(self.y.min),
            signif7(self.y.max)
        )?;
        write!(f, "Time period: [{}, {}]", signif7(self.t.min), signif7(self.t.max))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_network;

    fn pts(raw: &[(f64, f64, f64)]) -> Vec<[f64; 3]> {
        raw.iter().map(|&(x, y, t)| [x, y, t]).collect()
    }

    #[test]
    fn duplicate_rows_rejected() {
        let err = PointPattern::new_planar(
            pts(&[(0.1, 0.2, 0.3), (0.5, 0.5, 0.5), (0.1, 0.2, 0.3)]),
            Some(Window::unit()),
            Some(TimeInterval::unit()),
        )
        .unwrap_err();
        assert!(matches!(err, Error::DuplicatePoint { first: 0, second: 2 }));
    }

    #[test]
    fn coincident_locations_different_times_allowed() {
        let p = PointPattern::new_planar(
            pts(&[(0.1, 0.2, 0.3), (0.1, 0.2, 0.7)]),
            Some(Window::unit()),
            Some(TimeInterval::unit()),
        )
        .unwrap();
        assert_eq!(p.n(), 2);
    }

    #[test]
    fn outside_window_rejected_with_index() {
        let err = PointPattern::new_planar(
            pts(&[(0.1, 0.2, 0.3), (1.5, 0.5, 0.5)]),
            Some(Window::unit()),
            Some(TimeInterval::unit()),
        )
        .unwrap_err();
        assert!(matches!(err, Error::PointOutsideDomain { index: 1 }));
    }

    #[test]
    fn inferred_domain_is_the_bounding_box() {
        let p = PointPattern::new_planar(
            pts(&[(0.25, 0.5, 0.125), (0.75, 0.25, 0.875), (0.5, 0.75, 0.5)]),
            None,
            None,
        )
        .unwrap();
        let w = p.window().unwrap();
        assert_eq!((w.x_min, w.x_max), (0.25, 0.75));
        assert_eq!((w.y_min, w.y_max), (0.25, 0.75));
        let t = p.time_interval();
        assert_eq!((t.start, t.end), (0.125, 0.875));
    }

    #[test]
    fn network_point_beyond_tolerance_fails_to_snap() {
        let net = Arc::new(build_network(&[((0.0, 0.0), (1.0, 0.0))], None).unwrap());
        let err = PointPattern::new_network(
            pts(&[(0.5, 0.3, 0.5)]),
            net,
            Some(TimeInterval::unit()),
            Some(1e-3),
        )
        .unwrap_err();
        assert!(matches!(err, Error::SnapFailure { index: 0, .. }));
    }

    #[test]
    fn network_snapping_projects_onto_segment() {
        let net = Arc::new(build_network(&[((0.0, 0.0), (1.0, 0.0))], None).unwrap());
        let p = PointPattern::new_network(
            pts(&[(0.25, 1e-9, 0.5), (0.75, -1e-9, 0.25)]),
            net,
            Some(TimeInterval::unit()),
            None,
        )
        .unwrap();
        assert_eq!(p.points()[0][1], 0.0);
        let locs = p.locations().unwrap();
        assert!((locs[0].offset - 0.25).abs() < 1e-9);
        assert!((locs[1].offset - 0.75).abs() < 1e-9);
    }

    #[test]
    fn quartiles_interpolate_between_order_statistics() {
        // against a direct sort: n = 5, q1 sits at index 1 exactly
        let f = FiveNumber::of(&[5.0, 1.0, 3.0, 2.0, 4.0]);
        assert_eq!(f.min, 1.0);
        assert_eq!(f.q1, 2.0);
        assert_eq!(f.median, 3.0);
        assert_eq!(f.q3, 4.0);
        assert_eq!(f.max, 5.0);
        // n = 4: interpolated quartiles
        let f = FiveNumber::of(&[4.0, 1.0, 2.0, 3.0]);
        assert_eq!(f.q1, 1.75);
        assert_eq!(f.median, 2.5);
        assert_eq!(f.q3, 3.25);
    }

    #[test]
    fn summary_block_prints_enclosing_bounds() {
        // 208 points whose bounds match a known survey pattern
        let mut points = vec![
            [0.0011366, 0.0155277, 0.004],
            [0.9933775, 0.9960438, 0.997],
        ];
        for i in 0..206 {
            let f = (i as f64 + 1.0) / 208.0;
            points.push([0.1 + 0.8 * f, 0.1 + 0.8 * (1.0 - f), 0.05 + 0.9 * f]);
        }
        let p = PointPattern::new_planar(points, Some(Window::unit()), Some(TimeInterval::unit()))
            .unwrap();
        let text = p.summarize().to_string();
        assert!(text.contains("Spatio-temporal point pattern"));
        assert!(text.contains("208 points"));
        assert!(text.contains(
            "Enclosing window: rectangle = [0.0011366, 0.9933775] x [0.0155277, 0.9960438] units"
        ));
        assert!(text.contains("Time period: [0.004, 0.997]"));
    }

    #[test]
    fn csv_round_trip_is_lossless() {
        let p = PointPattern::new_planar(
            pts(&[
                (0.12345678901234567, 0.2, 0.3),
                (1.0 / 3.0, 2.0 / 7.0, 0.9999999999999999),
                (0.5, 0.5, 0.5),
            ]),
            Some(Window::unit()),
            Some(TimeInterval::unit()),
        )
        .unwrap()
        .with_marks(vec!["weight".into()], vec![vec![1.5, 2.25, -3.125]])
        .unwrap();
        let mut buf = Vec::new();
        p.to_csv_writer(&mut buf).unwrap();
        let q = PointPattern::from_csv_reader(
            buf.as_slice(),
            CsvDomain::Planar { window: Window::unit(), time: TimeInterval::unit() },
        )
        .unwrap();
        assert_eq!(p.points(), q.points());
        assert_eq!(
            p.marks().unwrap().column("weight").unwrap(),
            q.marks().unwrap().column("weight").unwrap()
        );
    }

    #[test]
    fn csv_extra_columns_become_marks() {
        let csv = "x,y,t,magnitude\n0.1,0.2,0.3,2.5\n0.4,0.5,0.6,3.5\n";
        let p = PointPattern::from_csv_reader(
            csv.as_bytes(),
            CsvDomain::Planar { window: Window::unit(), time: TimeInterval::unit() },
        )
        .unwrap();
        assert_eq!(p.marks().unwrap().column("magnitude").unwrap(), &[2.5, 3.5]);
    }

    #[test]
    fn json_round_trip_preserves_domain_and_marks() {
        let net = Arc::new(build_network(&[((0.0, 0.0), (2.0, 0.0))], None).unwrap());
        let p = PointPattern::new_network(
            pts(&[(0.5, 0.0, 0.25), (1.5, 0.0, 0.75)]),
            net,
            Some(TimeInterval::unit()),
            None,
        )
        .unwrap()
        .with_marks(vec!["m".into()], vec![vec![1.0, 2.0]])
        .unwrap();
        let s = p.to_json_string().unwrap();
        let q = PointPattern::from_json_str(&s).unwrap();
        assert!(q.is_network());
        assert_eq!(p.points(), q.points());
        assert_eq!(q.marks().unwrap().column("m").unwrap(), &[1.0, 2.0]);
    }
}
