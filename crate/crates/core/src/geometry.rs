//! Spatial and temporal domains: rectangular windows, time intervals, and
//! linear networks.
//!
//! A linear network is a finite union of straight segments that meet only at
//! their endpoints. Locations on a network are addressed as (segment, offset)
//! pairs, and the metric is the shortest-path distance along the segments.
//! Two queries drive everything downstream:
//!
//! * [`shortest_path_distance`] — d_L(a, b) via Dijkstra, splitting the
//!   source segment so interior locations seed both endpoints;
//! * [`count_at_distance`] — the number of network locations lying exactly at
//!   distance r from a source, obtained by counting interior crossings of the
//!   piecewise-linear distance function on each segment plus vertex hits
//!   (each vertex counted once regardless of degree).
//!
//! Batched use goes through [`SourceDistances`], which runs Dijkstra once per
//! source and answers both queries in O(segments).

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned rectangular observation window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Window {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        if !(x_min < x_max && y_min < y_max)
            || !(x_min.is_finite() && x_max.is_finite() && y_min.is_finite() && y_max.is_finite())
        {
            return Err(Error::InvalidDomain(format!(
                "window [{x_min}, {x_max}] x [{y_min}, {y_max}] has no interior"
            )));
        }
        Ok(Window { x_min, x_max, y_min, y_max })
    }

    /// Unit square [0,1] x [0,1].
    pub fn unit() -> Self {
        Window { x_min: 0.0, x_max: 1.0, y_min: 0.0, y_max: 1.0 }
    }

    pub fn area(&self) -> f64 {
        (self.x_max - self.x_min) * (self.y_max - self.y_min)
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x_min && x <= self.x_max && y >= self.y_min && y <= self.y_max
    }

    pub fn diagonal(&self) -> f64 {
        let dx = self.x_max - self.x_min;
        let dy = self.y_max - self.y_min;
        (dx * dx + dy * dy).sqrt()
    }
}

/// Closed time interval of positive length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeInterval {
    pub start: f64,
    pub end: f64,
}

impl TimeInterval {
    pub fn new(start: f64, end: f64) -> Result<Self> {
        if !(start < end) || !start.is_finite() || !end.is_finite() {
            return Err(Error::InvalidDomain(format!(
                "time interval [{start}, {end}] has zero or negative duration"
            )));
        }
        Ok(TimeInterval { start, end })
    }

    pub fn unit() -> Self {
        TimeInterval { start: 0.0, end: 1.0 }
    }

    pub fn length(&self) -> f64 {
        self.end - self.start
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.start && t <= self.end
    }
}

/// One straight segment of a network, referencing vertex indices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: usize,
    pub b: usize,
    pub length: f64,
}

/// A location on a network: a segment index plus the arc-length offset from
/// the segment's `a` vertex, with `0 <= offset <= length`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkLocation {
    pub segment: usize,
    pub offset: f64,
}

/// A linear network: vertices, segments, and per-vertex incidence lists.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinearNetwork {
    vertices: Vec<[f64; 2]>,
    segments: Vec<Segment>,
    incident: Vec<Vec<usize>>,
    total_length: f64,
}

/// Wire format for JSON ingestion/export: explicit vertices plus index pairs.
#[derive(Serialize, Deserialize)]
struct NetworkWire {
    vertices: Vec<[f64; 2]>,
    edges: Vec<[usize; 2]>,
}

/// Builds a network from raw segment endpoint coordinates
/// ((x0,y0),(x1,y1) per segment), snapping endpoints that fall within
/// `snap_tolerance` of each other onto a shared vertex.
///
/// The default tolerance is 1e-9 times the bounding-box diagonal. Segments
/// that collapse to zero length after snapping are rejected.
pub fn build_network(
    endpoints: &[((f64, f64), (f64, f64))],
    snap_tolerance: Option<f64>,
) -> Result<LinearNetwork> {
    if endpoints.is_empty() {
        return Err(Error::EmptyNetwork);
    }
    let (mut lo_x, mut hi_x) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut lo_y, mut hi_y) = (f64::INFINITY, f64::NEG_INFINITY);
    for &((x0, y0), (x1, y1)) in endpoints {
        for (x, y) in [(x0, y0), (x1, y1)] {
            if !x.is_finite() || !y.is_finite() {
                return Err(Error::InvalidDomain("non-finite segment endpoint".into()));
            }
            lo_x = lo_x.min(x);
            hi_x = hi_x.max(x);
            lo_y = lo_y.min(y);
            hi_y = hi_y.max(y);
        }
    }
    let diag = ((hi_x - lo_x).powi(2) + (hi_y - lo_y).powi(2)).sqrt();
    let tol = snap_tolerance.unwrap_or(1e-9 * diag.max(f64::MIN_POSITIVE));

    let mut vertices: Vec<[f64; 2]> = Vec::new();
    let vertex_of = |x: f64, y: f64, vertices: &mut Vec<[f64; 2]>| -> usize {
        for (i, v) in vertices.iter().enumerate() {
            if (v[0] - x).hypot(v[1] - y) <= tol {
                return i;
            }
        }
        vertices.push([x, y]);
        vertices.len() - 1
    };

    let mut segments = Vec::with_capacity(endpoints.len());
    for (index, &((x0, y0), (x1, y1))) in endpoints.iter().enumerate() {
        let a = vertex_of(x0, y0, &mut vertices);
        let b = vertex_of(x1, y1, &mut vertices);
        if a == b {
            return Err(Error::DegenerateSegment { index });
        }
        let length = (vertices[a][0] - vertices[b][0]).hypot(vertices[a][1] - vertices[b][1]);
        segments.push(Segment { a, b, length });
    }

    let mut incident = vec![Vec::new(); vertices.len()];
    for (i, s) in segments.iter().enumerate() {
        incident[s.a].push(i);
        incident[s.b].push(i);
    }
    let total_length = segments.iter().map(|s| s.length).sum();
    Ok(LinearNetwork { vertices, segments, incident, total_length })
}

impl LinearNetwork {
    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn incident_segments(&self, vertex: usize) -> &[usize] {
        &self.incident[vertex]
    }

    /// Total length |L| of the network.
    pub fn total_length(&self) -> f64 {
        self.total_length
    }

    pub fn bounding_box(&self) -> Window {
        let mut w = Window {
            x_min: f64::INFINITY,
            x_max: f64::NEG_INFINITY,
            y_min: f64::INFINITY,
            y_max: f64::NEG_INFINITY,
        };
        for v in &self.vertices {
            w.x_min = w.x_min.min(v[0]);
            w.x_max = w.x_max.max(v[0]);
            w.y_min = w.y_min.min(v[1]);
            w.y_max = w.y_max.max(v[1]);
        }
        w
    }

    /// Planar coordinates of a network location.
    pub fn xy(&self, loc: &NetworkLocation) -> (f64, f64) {
        let s = &self.segments[loc.segment];
        let a = self.vertices[s.a];
        let b = self.vertices[s.b];
        let f = if s.length > 0.0 { loc.offset / s.length } else { 0.0 };
        (a[0] + f * (b[0] - a[0]), a[1] + f * (b[1] - a[1]))
    }

    /// Nearest network location to a planar point, with its distance.
    pub fn project(&self, x: f64, y: f64) -> (NetworkLocation, f64) {
        let mut best = (NetworkLocation { segment: 0, offset: 0.0 }, f64::INFINITY);
        for (i, s) in self.segments.iter().enumerate() {
            let a = self.vertices[s.a];
            let b = self.vertices[s.b];
            let dx = b[0] - a[0];
            let dy = b[1] - a[1];
            let len2 = dx * dx + dy * dy;
            let t = if len2 > 0.0 {
                (((x - a[0]) * dx + (y - a[1]) * dy) / len2).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let px = a[0] + t * dx;
            let py = a[1] + t * dy;
            let d = (x - px).hypot(y - py);
            if d < best.1 {
                best = (NetworkLocation { segment: i, offset: t * s.length }, d);
            }
        }
        best
    }

    /// Reads a network from CSV rows of segment endpoints `x0,y0,x1,y1`.
    /// A leading header row is skipped if present.
    pub fn from_csv_reader<R: Read>(reader: R, snap_tolerance: Option<f64>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut endpoints = Vec::new();
        for (row, record) in rdr.records().enumerate() {
            let record = record?;
            let fields: Vec<&str> = record.iter().collect();
            if fields.len() < 4 {
                return Err(Error::Parse(format!(
                    "network CSV row {row} has {} fields, expected 4",
                    fields.len()
                )));
            }
            let parsed: std::result::Result<Vec<f64>, _> =
                fields[..4].iter().map(|f| f.parse::<f64>()).collect();
            match parsed {
                Ok(v) => endpoints.push(((v[0], v[1]), (v[2], v[3]))),
                Err(e) if row == 0 => {
                    // header row
                    let _ = e;
                }
                Err(e) => {
                    return Err(Error::Parse(format!("network CSV row {row}: {e}")));
                }
            }
        }
        build_network(&endpoints, snap_tolerance)
    }

    pub fn from_csv_path<P: AsRef<Path>>(path: P, snap_tolerance: Option<f64>) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::from_csv_reader(f, snap_tolerance)
    }

    /// Reads a network from JSON `{"vertices": [[x,y],...], "edges": [[i,j],...]}`.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let wire: NetworkWire = serde_json::from_str(s)?;
        let n = wire.vertices.len();
        let mut endpoints = Vec::with_capacity(wire.edges.len());
        for (row, e) in wire.edges.iter().enumerate() {
            if e[0] >= n || e[1] >= n {
                return Err(Error::Parse(format!(
                    "edge {row} references vertex {} but only {n} vertices exist",
                    e[0].max(e[1])
                )));
            }
            let a = wire.vertices[e[0]];
            let b = wire.vertices[e[1]];
            endpoints.push(((a[0], a[1]), (b[0], b[1])));
        }
        build_network(&endpoints, None)
    }

    pub fn to_json_string(&self) -> Result<String> {
        let wire = NetworkWire {
            vertices: self.vertices.clone(),
            edges: self.segments.iter().map(|s| [s.a, s.b]).collect(),
        };
        Ok(serde_json::to_string_pretty(&wire)?)
    }

    fn check_location(&self, loc: &NetworkLocation) -> Result<()> {
        let s = self
            .segments
            .get(loc.segment)
            .ok_or_else(|| Error::InvalidDomain(format!("segment {} out of range", loc.segment)))?;
        if loc.offset < -1e-12 || loc.offset > s.length * (1.0 + 1e-12) + 1e-12 {
            return Err(Error::InvalidDomain(format!(
                "offset {} outside segment of length {}",
                loc.offset, s.length
            )));
        }
        Ok(())
    }
}

/// Min-heap entry for Dijkstra.
#[derive(PartialEq)]
struct HeapEntry {
    dist: f64,
    vertex: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed: BinaryHeap is a max-heap
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shortest-path distances from one source location to the whole network.
///
/// Unreachable vertices keep distance `f64::INFINITY`.
pub struct SourceDistances<'a> {
    net: &'a LinearNetwork,
    source: NetworkLocation,
    vertex_dist: Vec<f64>,
}

impl<'a> SourceDistances<'a> {
    pub fn new(net: &'a LinearNetwork, source: &NetworkLocation) -> Result<Self> {
        net.check_location(source)?;
        let seg = net.segments[source.segment];
        let mut dist = vec![f64::INFINITY; net.vertices.len()];
        let mut heap = BinaryHeap::new();
        // Any path leaving the source first reaches one of its segment's
        // endpoints, so seeding both is equivalent to splitting the segment.
        let d_a = source.offset;
        let d_b = seg.length - source.offset;
        dist[seg.a] = d_a;
        dist[seg.b] = d_b;
        heap.push(HeapEntry { dist: d_a, vertex: seg.a });
        heap.push(HeapEntry { dist: d_b, vertex: seg.b });
        while let Some(HeapEntry { dist: d, vertex: v }) = heap.pop() {
            if d > dist[v] {
                continue;
            }
            for &si in &net.incident[v] {
                let s = net.segments[si];
                let w = if s.a == v { s.b } else { s.a };
                let nd = d + s.length;
                if nd < dist[w] {
                    dist[w] = nd;
                    heap.push(HeapEntry { dist: nd, vertex: w });
                }
            }
        }
        Ok(SourceDistances { net, source: *source, vertex_dist: dist })
    }

    pub fn source(&self) -> NetworkLocation {
        self.source
    }

    pub fn vertex_distance(&self, vertex: usize) -> f64 {
        self.vertex_dist[vertex]
    }

    /// Shortest-path distance from the source to `b`; `+inf` when `b` lies in
    /// a different connected component.
    pub fn distance_to(&self, b: &NetworkLocation) -> f64 {
        let seg = self.net.segments[b.segment];
        let via_a = self.vertex_dist[seg.a] + b.offset;
        let via_b = self.vertex_dist[seg.b] + (seg.length - b.offset);
        let mut d = via_a.min(via_b);
        if b.segment == self.source.segment {
            d = d.min((b.offset - self.source.offset).abs());
        }
        d
    }

    /// Number of network locations at shortest-path distance exactly `r` from
    /// the source. `r = 0` counts the source itself (1). A vertex at distance
    /// r counts once, no matter how many segments meet there.
    pub fn count_at_distance(&self, r: f64) -> usize {
        if r < 0.0 {
            return 0;
        }
        let tol = 1e-9 * (1.0 + r);
        let mut count = 0usize;

        // vertex hits, once per vertex
        for &d in &self.vertex_dist {
            if (d - r).abs() <= tol {
                count += 1;
            }
        }

        // interior crossings, per segment
        let mut candidates: Vec<f64> = Vec::new();
        for (si, s) in self.net.segments.iter().enumerate() {
            candidates.clear();
            let d_a = self.vertex_dist[s.a];
            let d_b = self.vertex_dist[s.b];
            // distance function on this segment is the lower envelope of
            // tents rooted at these (position, base-distance) pairs
            let mut sources: [(f64, f64); 3] = [(0.0, d_a), (s.length, d_b), (0.0, f64::INFINITY)];
            let mut n_src = 2;
            if si == self.source.segment {
                sources[2] = (self.source.offset, 0.0);
                n_src = 3;
            }
            let env = |x: f64, sources: &[(f64, f64)]| -> f64 {
                sources
                    .iter()
                    .map(|&(p, b)| b + (x - p).abs())
                    .fold(f64::INFINITY, f64::min)
            };
            for k in 0..n_src {
                let (p, base) = sources[k];
                let reach = r - base;
                if reach < 0.0 {
                    continue;
                }
                for x in [p - reach, p + reach] {
                    // open interval: endpoint solutions are vertex hits
                    if x > tol && x < s.length - tol && env(x, &sources[..n_src]) >= r - tol {
                        candidates.push(x);
                    }
                }
            }
            candidates.sort_by(f64::total_cmp);
            let mut last = f64::NEG_INFINITY;
            for &x in candidates.iter() {
                if x - last > tol {
                    count += 1;
                    last = x;
                }
            }
        }
        count
    }
}

/// Shortest-path distance between two network locations.
///
/// The source is canonicalized (the lexicographically smaller location runs
/// the search) so that `d(a, b)` and `d(b, a)` are bitwise identical.
pub fn shortest_path_distance(
    net: &LinearNetwork,
    a: &NetworkLocation,
    b: &NetworkLocation,
) -> Result<f64> {
    net.check_location(a)?;
    net.check_location(b)?;
    let a_first = (a.segment, a.offset) <= (b.segment, b.offset);
    let (src, dst) = if a_first { (a, b) } else { (b, a) };
    let sd = SourceDistances::new(net, src)?;
    Ok(sd.distance_to(dst))
}

/// Number of network locations at shortest-path distance exactly `r` from `u`.
pub fn count_at_distance(net: &LinearNetwork, u: &NetworkLocation, r: f64) -> Result<usize> {
    let sd = SourceDistances::new(net, u)?;
    Ok(sd.count_at_distance(r))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_segment() -> LinearNetwork {
        build_network(&[((0.0, 0.0), (1.0, 0.0))], None).unwrap()
    }

    /// Two unit arms at a right angle.
    fn l_shape() -> LinearNetwork {
        build_network(&[((0.0, 0.0), (1.0, 0.0)), ((1.0, 0.0), (1.0, 1.0))], None).unwrap()
    }

    /// 2x2 grid of unit squares: 9 vertices, 12 unit segments.
    fn grid_network() -> LinearNetwork {
        let mut segs = Vec::new();
        for i in 0..3 {
            for j in 0..2 {
                let (x0, y0) = (j as f64, i as f64);
                segs.push(((x0, y0), (x0 + 1.0, y0))); // horizontal
                segs.push(((y0, x0), (y0, x0 + 1.0))); // vertical
            }
        }
        build_network(&segs, None).unwrap()
    }

    #[test]
    fn grid_counts_vertices_and_length() {
        let net = grid_network();
        assert_eq!(net.vertices().len(), 9);
        assert_eq!(net.segments().len(), 12);
        assert!((net.total_length() - 12.0).abs() < 1e-12);
    }

    #[test]
    fn zero_length_segment_rejected() {
        let err = build_network(&[((0.0, 0.0), (0.0, 0.0))], None).unwrap_err();
        assert!(matches!(err, Error::DegenerateSegment { index: 0 }));
    }

    #[test]
    fn empty_network_rejected() {
        assert!(matches!(build_network(&[], None), Err(Error::EmptyNetwork)));
    }

    #[test]
    fn snapping_merges_nearby_endpoints() {
        // second segment starts 1e-12 away from the first's end
        let net = build_network(
            &[((0.0, 0.0), (1.0, 0.0)), ((1.0 + 1e-12, 0.0), (2.0, 0.0))],
            None,
        )
        .unwrap();
        assert_eq!(net.vertices().len(), 3);
    }

    #[test]
    fn straight_segment_distance_is_euclidean() {
        let net = unit_segment();
        let a = NetworkLocation { segment: 0, offset: 0.125 };
        let b = NetworkLocation { segment: 0, offset: 0.875 };
        let d = shortest_path_distance(&net, &a, &b).unwrap();
        assert!((d - 0.75).abs() < 1e-12);
    }

    #[test]
    fn l_shape_midpoint_distance() {
        // midpoints of the two arms: 0.5 to the corner on each side
        let net = l_shape();
        let a = NetworkLocation { segment: 0, offset: 0.5 };
        let b = NetworkLocation { segment: 1, offset: 0.5 };
        let d = shortest_path_distance(&net, &a, &b).unwrap();
        assert!((d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn disconnected_components_are_infinitely_far() {
        let net = build_network(
            &[((0.0, 0.0), (1.0, 0.0)), ((5.0, 5.0), (6.0, 5.0))],
            None,
        )
        .unwrap();
        let a = NetworkLocation { segment: 0, offset: 0.5 };
        let b = NetworkLocation { segment: 1, offset: 0.5 };
        assert!(shortest_path_distance(&net, &a, &b).unwrap().is_infinite());
    }

    #[test]
    fn symmetry_is_bitwise_exact() {
        let net = grid_network();
        let a = NetworkLocation { segment: 3, offset: 0.37 };
        let b = NetworkLocation { segment: 10, offset: 0.81 };
        let ab = shortest_path_distance(&net, &a, &b).unwrap();
        let ba = shortest_path_distance(&net, &b, &a).unwrap();
        assert_eq!(ab.to_bits(), ba.to_bits());
    }

    #[test]
    fn count_two_sides_of_interior_source() {
        let net = unit_segment();
        let u = NetworkLocation { segment: 0, offset: 0.5 };
        assert_eq!(count_at_distance(&net, &u, 0.3).unwrap(), 2);
    }

    #[test]
    fn count_zero_radius_is_the_point_itself() {
        let net = unit_segment();
        let u = NetworkLocation { segment: 0, offset: 0.5 };
        assert_eq!(count_at_distance(&net, &u, 0.0).unwrap(), 1);
    }

    #[test]
    fn count_beyond_segment_is_zero() {
        let net = unit_segment();
        let u = NetworkLocation { segment: 0, offset: 0.5 };
        assert_eq!(count_at_distance(&net, &u, 0.7).unwrap(), 0);
    }

    #[test]
    fn count_vertex_hit_once_across_incident_segments() {
        // Cross: four unit arms from the origin. A source 0.25 along one arm
        // sees the junction at 0.25; the junction counts once, and each of the
        // other three arms gets an interior crossing at radius 0.5.
        let net = build_network(
            &[
                ((0.0, 0.0), (1.0, 0.0)),
                ((0.0, 0.0), (-1.0, 0.0)),
                ((0.0, 0.0), (0.0, 1.0)),
                ((0.0, 0.0), (0.0, -1.0)),
            ],
            None,
        )
        .unwrap();
        let u = NetworkLocation { segment: 0, offset: 0.25 };
        assert_eq!(count_at_distance(&net, &u, 0.25).unwrap(), 2); // junction + far side
        assert_eq!(count_at_distance(&net, &u, 0.5).unwrap(), 4); // 3 arms + far side
    }

    #[test]
    fn count_antipode_on_loop_is_one() {
        // Square loop of perimeter 4; the antipode of any location is a local
        // maximum of the distance function and must still count once.
        let net = build_network(
            &[
                ((0.0, 0.0), (1.0, 0.0)),
                ((1.0, 0.0), (1.0, 1.0)),
                ((1.0, 1.0), (0.0, 1.0)),
                ((0.0, 1.0), (0.0, 0.0)),
            ],
            None,
        )
        .unwrap();
        let u = NetworkLocation { segment: 0, offset: 0.5 };
        assert_eq!(count_at_distance(&net, &u, 2.0).unwrap(), 1);
        assert_eq!(count_at_distance(&net, &u, 1.0).unwrap(), 2);
    }

    #[test]
    fn metric_axioms_on_random_triples() {
        use rand::{RngExt, SeedableRng};
        let net = grid_network();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let random_loc = |rng: &mut rand_chacha::ChaCha8Rng| {
            let segment = rng.random_range(0..net.segments().len());
            let offset = rng.random_range(0.0..net.segments()[segment].length);
            NetworkLocation { segment, offset }
        };
        for _ in 0..1000 {
            let a = random_loc(&mut rng);
            let b = random_loc(&mut rng);
            let c = random_loc(&mut rng);
            let ab = shortest_path_distance(&net, &a, &b).unwrap();
            let ba = shortest_path_distance(&net, &b, &a).unwrap();
            let ac = shortest_path_distance(&net, &a, &c).unwrap();
            let cb = shortest_path_distance(&net, &c, &b).unwrap();
            assert_eq!(ab.to_bits(), ba.to_bits(), "symmetry must be exact");
            assert!(ab >= 0.0);
            assert!(ab <= ac + cb + 1e-9, "triangle inequality violated");
        }
    }

    #[test]
    fn count_integrates_to_reachable_length() {
        // integral over r of the crossing count recovers network length
        let net = grid_network();
        let u = NetworkLocation { segment: 5, offset: 0.3 };
        let sd = SourceDistances::new(&net, &u).unwrap();
        let r_max = 8.0; // beyond the network radius from any point
        let steps = 10_000usize;
        let dr = r_max / steps as f64;
        let mut integral = 0.0;
        for k in 0..steps {
            let r = (k as f64 + 0.5) * dr;
            integral += sd.count_at_distance(r) as f64 * dr;
        }
        let rel = (integral - net.total_length()).abs() / net.total_length();
        assert!(rel < 0.02, "integral {integral} vs length {}", net.total_length());
    }

    #[test]
    fn json_round_trip() {
        let net = grid_network();
        let s = net.to_json_string().unwrap();
        let back = LinearNetwork::from_json_str(&s).unwrap();
        assert_eq!(back.vertices().len(), 9);
        assert!((back.total_length() - 12.0).abs() < 1e-12);
    }

    #[test]
    fn csv_ingestion_with_header() {
        let csv = "x0,y0,x1,y1\n0,0,1,0\n1,0,1,1\n";
        let net = LinearNetwork::from_csv_reader(csv.as_bytes(), None).unwrap();
        assert_eq!(net.segments().len(), 2);
        assert_eq!(net.vertices().len(), 3);
    }

    #[test]
    fn projection_snaps_to_nearest_segment() {
        let net = l_shape();
        let (loc, d) = net.project(0.5, 0.2);
        assert_eq!(loc.segment, 0);
        assert!((loc.offset - 0.5).abs() < 1e-12);
        assert!((d - 0.2).abs() < 1e-12);
    }
}
