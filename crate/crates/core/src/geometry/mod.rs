//! Minimal planar geometry kernel: WKT points, linestrings and single-ring
//! polygons, the topological predicates and the metric functions query
//! conditions reference.
//!
//! All classification against boundaries uses an epsilon, `DEFAULT_EPSILON`
//! by default; every predicate has an `*_eps` variant taking an explicit
//! tolerance.

mod wkt;

pub use wkt::{parse_wkt, WktError};

use thiserror::Error;

/// Tolerance used for on-boundary classification by the default predicate
/// entry points.
pub const DEFAULT_EPSILON: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum GeomError {
    #[error("{0}")]
    Wkt(#[from] WktError),
    #[error("area is only defined for polygons, got {0}")]
    AreaType(GeometryKind),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Point {
        Point { x, y }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GeometryKind {
    Point,
    LineString,
    Polygon,
}

impl GeometryKind {
    pub fn parse(s: &str) -> Option<GeometryKind> {
        match s.to_ascii_lowercase().as_str() {
            "point" => Some(GeometryKind::Point),
            "linestring" => Some(GeometryKind::LineString),
            "polygon" => Some(GeometryKind::Polygon),
            _ => None,
        }
    }
}

impl std::fmt::Display for GeometryKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GeometryKind::Point => write!(f, "point"),
            GeometryKind::LineString => write!(f, "linestring"),
            GeometryKind::Polygon => write!(f, "polygon"),
        }
    }
}

/// A planar geometry. Polygons hold a single explicitly closed ring
/// (first vertex repeated last); no holes, no multi parts.
#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    Point(Point),
    LineString(Vec<Point>),
    Polygon(Vec<Point>),
}

impl Geometry {
    pub fn kind(&self) -> GeometryKind {
        match self {
            Geometry::Point(_) => GeometryKind::Point,
            Geometry::LineString(_) => GeometryKind::LineString,
            Geometry::Polygon(_) => GeometryKind::Polygon,
        }
    }

    /// Canonical WKT: uppercase tag, minimal decimal formatting.
    pub fn to_wkt(&self) -> String {
        wkt::serialize(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Location {
    Inside,
    Boundary,
    Outside,
}

// ---------------------------------------------------------------------------
// segment primitives
// ---------------------------------------------------------------------------

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

fn dist(a: Point, b: Point) -> f64 {
    ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt()
}

fn dist_point_seg(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return dist(p, a);
    }
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
    dist(p, Point::new(a.x + t * dx, a.y + t * dy))
}

fn point_on_seg(p: Point, a: Point, b: Point, eps: f64) -> bool {
    dist_point_seg(p, a, b) <= eps
}

/// Transversal crossing strictly interior to both segments.
fn segs_properly_cross(a1: Point, a2: Point, b1: Point, b2: Point) -> bool {
    let d1 = cross(b1, b2, a1);
    let d2 = cross(b1, b2, a2);
    let d3 = cross(a1, a2, b1);
    let d4 = cross(a1, a2, b2);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

fn segs_intersect(a1: Point, a2: Point, b1: Point, b2: Point, eps: f64) -> bool {
    segs_properly_cross(a1, a2, b1, b2)
        || point_on_seg(b1, a1, a2, eps)
        || point_on_seg(b2, a1, a2, eps)
        || point_on_seg(a1, b1, b2, eps)
        || point_on_seg(a2, b1, b2, eps)
}

fn dist_seg_seg(a1: Point, a2: Point, b1: Point, b2: Point) -> f64 {
    if segs_properly_cross(a1, a2, b1, b2) {
        return 0.0;
    }
    dist_point_seg(a1, b1, b2)
        .min(dist_point_seg(a2, b1, b2))
        .min(dist_point_seg(b1, a1, a2))
        .min(dist_point_seg(b2, a1, a2))
}

fn line_segs(pts: &[Point]) -> impl Iterator<Item = (Point, Point)> + '_ {
    pts.windows(2).map(|w| (w[0], w[1]))
}

/// Edges of a closed ring (the closing vertex is already present).
fn ring_edges(ring: &[Point]) -> impl Iterator<Item = (Point, Point)> + '_ {
    line_segs(ring)
}

fn locate_in_ring(p: Point, ring: &[Point], eps: f64) -> Location {
    for (a, b) in ring_edges(ring) {
        if point_on_seg(p, a, b, eps) {
            return Location::Boundary;
        }
    }
    // Even-odd crossing count; the half-open vertex rule keeps vertex hits
    // from double counting.
    let mut inside = false;
    for (a, b) in ring_edges(ring) {
        if (a.y > p.y) != (b.y > p.y) {
            let x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x_cross {
                inside = !inside;
            }
        }
    }
    if inside {
        Location::Inside
    } else {
        Location::Outside
    }
}

/// A point strictly inside a simple ring: midpoint of the leftmost chord on a
/// horizontal line threaded between two distinct vertex heights.
fn interior_point(ring: &[Point]) -> Point {
    let mut ys: Vec<f64> = ring.iter().map(|p| p.y).collect();
    ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ys.dedup();
    for w in ys.windows(2) {
        let yc = (w[0] + w[1]) / 2.0;
        let mut xs: Vec<f64> = Vec::new();
        for (a, b) in ring_edges(ring) {
            if (a.y > yc) != (b.y > yc) {
                xs.push(a.x + (yc - a.y) * (b.x - a.x) / (b.y - a.y));
            }
        }
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if xs.len() >= 2 {
            return Point::new((xs[0] + xs[1]) / 2.0, yc);
        }
    }
    // Degenerate ring; fall back to the vertex mean.
    let n = (ring.len() - 1) as f64;
    let (sx, sy) = ring[..ring.len() - 1]
        .iter()
        .fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
    Point::new(sx / n, sy / n)
}

/// Split parameters of segment `ab` at every crossing/touch with ring edges,
/// including 0 and 1. Consecutive midpoints classify cleanly in or out.
fn seg_ring_params(a: Point, b: Point, ring: &[Point]) -> Vec<f64> {
    let r = Point::new(b.x - a.x, b.y - a.y);
    let rlen2 = r.x * r.x + r.y * r.y;
    let mut ts = vec![0.0, 1.0];
    if rlen2 == 0.0 {
        return ts;
    }
    for (c, d) in ring_edges(ring) {
        let s = Point::new(d.x - c.x, d.y - c.y);
        let denom = r.x * s.y - r.y * s.x;
        let qp = Point::new(c.x - a.x, c.y - a.y);
        if denom.abs() > 1e-12 {
            let t = (qp.x * s.y - qp.y * s.x) / denom;
            let u = (qp.x * r.y - qp.y * r.x) / denom;
            if (-1e-9..=1.0 + 1e-9).contains(&t) && (-1e-9..=1.0 + 1e-9).contains(&u) {
                ts.push(t.clamp(0.0, 1.0));
            }
        } else if cross(a, b, c).abs() <= 1e-9 * rlen2.sqrt().max(1.0) {
            // Collinear edge: project its endpoints onto ab.
            for q in [c, d] {
                let t = ((q.x - a.x) * r.x + (q.y - a.y) * r.y) / rlen2;
                if (0.0..=1.0).contains(&t) {
                    ts.push(t);
                }
            }
        }
    }
    ts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    ts.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
    ts
}

fn seg_piece_midpoints(a: Point, b: Point, ring: &[Point]) -> Vec<Point> {
    let ts = seg_ring_params(a, b, ring);
    ts.windows(2)
        .map(|w| {
            let t = (w[0] + w[1]) / 2.0;
            Point::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// linestring helpers
// ---------------------------------------------------------------------------

fn point_on_line(p: Point, line: &[Point], eps: f64) -> bool {
    line_segs(line).any(|(a, b)| point_on_seg(p, a, b, eps))
}

/// On the linestring but not at one of its two terminal points.
fn point_in_line_interior(p: Point, line: &[Point], eps: f64) -> bool {
    point_on_line(p, line, eps) && dist(p, line[0]) > eps && dist(p, *line.last().unwrap()) > eps
}

/// Is segment `pq` entirely covered by the linestring (as a point set)?
fn line_covers_seg(line: &[Point], p: Point, q: Point, eps: f64) -> bool {
    let r = Point::new(q.x - p.x, q.y - p.y);
    let len2 = r.x * r.x + r.y * r.y;
    if len2 == 0.0 {
        return point_on_line(p, line, eps);
    }
    // Collect coverage intervals from collinear overlapping segments.
    let mut ivs: Vec<(f64, f64)> = Vec::new();
    for (a, b) in line_segs(line) {
        if dist_point_seg(a, p, q).max(dist_point_seg(b, p, q)) <= eps {
            let ta = ((a.x - p.x) * r.x + (a.y - p.y) * r.y) / len2;
            let tb = ((b.x - p.x) * r.x + (b.y - p.y) * r.y) / len2;
            ivs.push((ta.min(tb).max(0.0), ta.max(tb).min(1.0)));
        }
    }
    ivs.retain(|(a, b)| a <= b);
    ivs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let tol = eps / len2.sqrt();
    let mut covered = 0.0;
    for (a, b) in ivs {
        if a > covered + tol {
            return false;
        }
        covered = covered.max(b);
    }
    covered >= 1.0 - tol
}

// ---------------------------------------------------------------------------
// public predicates
// ---------------------------------------------------------------------------

/// Shared point exists.
pub fn intersects(a: &Geometry, b: &Geometry) -> bool {
    intersects_eps(a, b, DEFAULT_EPSILON)
}

pub fn intersects_eps(a: &Geometry, b: &Geometry, eps: f64) -> bool {
    use Geometry::*;
    match (a, b) {
        (Point(p), Point(q)) => dist(*p, *q) <= eps,
        (Point(p), LineString(l)) | (LineString(l), Point(p)) => point_on_line(*p, l, eps),
        (Point(p), Polygon(r)) | (Polygon(r), Point(p)) => {
            locate_in_ring(*p, r, eps) != Location::Outside
        }
        (LineString(l1), LineString(l2)) => line_segs(l1)
            .any(|(a1, a2)| line_segs(l2).any(|(b1, b2)| segs_intersect(a1, a2, b1, b2, eps))),
        (LineString(l), Polygon(r)) | (Polygon(r), LineString(l)) => {
            l.iter()
                .any(|p| locate_in_ring(*p, r, eps) != Location::Outside)
                || line_segs(l).any(|(a1, a2)| {
                    ring_edges(r).any(|(b1, b2)| segs_intersect(a1, a2, b1, b2, eps))
                })
        }
        (Polygon(r1), Polygon(r2)) => {
            r1.iter()
                .any(|p| locate_in_ring(*p, r2, eps) != Location::Outside)
                || r2
                    .iter()
                    .any(|p| locate_in_ring(*p, r1, eps) != Location::Outside)
                || ring_edges(r1).any(|(a1, a2)| {
                    ring_edges(r2).any(|(b1, b2)| segs_intersect(a1, a2, b1, b2, eps))
                })
        }
    }
}

/// Every point of `b` lies in `a`, boundary allowed.
pub fn contains(a: &Geometry, b: &Geometry) -> bool {
    contains_eps(a, b, DEFAULT_EPSILON)
}

pub fn contains_eps(a: &Geometry, b: &Geometry, eps: f64) -> bool {
    use Geometry::*;
    match (a, b) {
        (Point(p), Point(q)) => dist(*p, *q) <= eps,
        (LineString(l), Point(p)) => point_on_line(*p, l, eps),
        (LineString(l1), LineString(l2)) => {
            line_segs(l2).all(|(p, q)| line_covers_seg(l1, p, q, eps))
        }
        (Polygon(r), Point(p)) => locate_in_ring(*p, r, eps) != Location::Outside,
        (Polygon(r), LineString(l)) => {
            l.iter()
                .all(|p| locate_in_ring(*p, r, eps) != Location::Outside)
                && line_segs(l).all(|(p, q)| {
                    seg_piece_midpoints(p, q, r)
                        .into_iter()
                        .all(|m| locate_in_ring(m, r, eps) != Location::Outside)
                })
        }
        (Polygon(r1), Polygon(r2)) => {
            r2.iter()
                .all(|p| locate_in_ring(*p, r1, eps) != Location::Outside)
                && ring_edges(r2).all(|(p, q)| {
                    seg_piece_midpoints(p, q, r1)
                        .into_iter()
                        .all(|m| locate_in_ring(m, r1, eps) != Location::Outside)
                })
        }
        // A lower-dimensional geometry cannot contain a higher-dimensional one.
        _ => false,
    }
}

fn interiors_intersect(a: &Geometry, b: &Geometry, eps: f64) -> bool {
    use Geometry::*;
    match (a, b) {
        (Point(p), Point(q)) => dist(*p, *q) <= eps,
        (Point(p), LineString(l)) | (LineString(l), Point(p)) => point_in_line_interior(*p, l, eps),
        (Point(p), Polygon(r)) | (Polygon(r), Point(p)) => {
            locate_in_ring(*p, r, eps) == Location::Inside
        }
        (LineString(l1), LineString(l2)) => lines_interiors_intersect(l1, l2, eps),
        (LineString(l), Polygon(r)) | (Polygon(r), LineString(l)) => line_segs(l).any(|(p, q)| {
            seg_piece_midpoints(p, q, r)
                .into_iter()
                .any(|m| locate_in_ring(m, r, eps) == Location::Inside)
        }),
        (Polygon(r1), Polygon(r2)) => {
            ring_edges(r1)
                .any(|(a1, a2)| ring_edges(r2).any(|(b1, b2)| segs_properly_cross(a1, a2, b1, b2)))
                || r1
                    .iter()
                    .any(|p| locate_in_ring(*p, r2, eps) == Location::Inside)
                || r2
                    .iter()
                    .any(|p| locate_in_ring(*p, r1, eps) == Location::Inside)
                || ring_edges(r1).any(|(p, q)| {
                    seg_piece_midpoints(p, q, r2)
                        .into_iter()
                        .any(|m| locate_in_ring(m, r2, eps) == Location::Inside)
                })
                || locate_in_ring(interior_point(r1), r2, eps) == Location::Inside
                || locate_in_ring(interior_point(r2), r1, eps) == Location::Inside
        }
    }
}

fn lines_interiors_intersect(l1: &[Point], l2: &[Point], eps: f64) -> bool {
    for (a1, a2) in line_segs(l1) {
        for (b1, b2) in line_segs(l2) {
            if segs_properly_cross(a1, a2, b1, b2) {
                return true;
            }
            // Touching configurations: some endpoint lies on the other
            // segment; interior if it is interior to both whole lines.
            for p in [a1, a2, b1, b2] {
                if point_on_seg(p, a1, a2, eps)
                    && point_on_seg(p, b1, b2, eps)
                    && point_in_line_interior(p, l1, eps)
                    && point_in_line_interior(p, l2, eps)
                {
                    return true;
                }
            }
            // Collinear overlap of positive length.
            if dist_point_seg(b1, a1, a2).min(dist_point_seg(b2, a1, a2)) <= eps {
                for (p, q) in [(a1, b1), (a1, b2), (a2, b1), (a2, b2)] {
                    if dist(p, q) > eps {
                        let m = Point::new((p.x + q.x) / 2.0, (p.y + q.y) / 2.0);
                        if point_on_seg(m, a1, a2, eps)
                            && point_on_seg(m, b1, b2, eps)
                            && point_in_line_interior(m, l1, eps)
                            && point_in_line_interior(m, l2, eps)
                        {
                            return true;
                        }
                    }
                }
            }
        }
    }
    false
}

/// Boundaries meet but interiors do not.
pub fn touches(a: &Geometry, b: &Geometry) -> bool {
    touches_eps(a, b, DEFAULT_EPSILON)
}

pub fn touches_eps(a: &Geometry, b: &Geometry, eps: f64) -> bool {
    intersects_eps(a, b, eps) && !interiors_intersect(a, b, eps)
}

/// Interiors intersect and neither geometry contains the other; for a
/// line/polygon pair this means the line passes through both the polygon's
/// interior and its exterior.
pub fn crosses(a: &Geometry, b: &Geometry) -> bool {
    crosses_eps(a, b, DEFAULT_EPSILON)
}

pub fn crosses_eps(a: &Geometry, b: &Geometry, eps: f64) -> bool {
    use Geometry::*;
    match (a, b) {
        (LineString(l), Polygon(r)) | (Polygon(r), LineString(l)) => {
            let mids: Vec<self::Point> = line_segs(l)
                .flat_map(|(p, q)| seg_piece_midpoints(p, q, r))
                .collect();
            mids.iter()
                .any(|m| locate_in_ring(*m, r, eps) == Location::Inside)
                && mids
                    .iter()
                    .any(|m| locate_in_ring(*m, r, eps) == Location::Outside)
        }
        (Point(_), _) | (_, Point(_)) => false,
        _ => interiors_intersect(a, b, eps) && !contains_eps(a, b, eps) && !contains_eps(b, a, eps),
    }
}

/// Minimum Euclidean distance between the two point sets; 0 when they
/// intersect.
pub fn distance(a: &Geometry, b: &Geometry) -> f64 {
    distance_eps(a, b, DEFAULT_EPSILON)
}

pub fn distance_eps(a: &Geometry, b: &Geometry, eps: f64) -> f64 {
    use Geometry::*;
    if intersects_eps(a, b, eps) {
        return 0.0;
    }
    match (a, b) {
        (Point(p), Point(q)) => dist(*p, *q),
        (Point(p), LineString(l)) | (LineString(l), Point(p)) => line_segs(l)
            .map(|(s, e)| dist_point_seg(*p, s, e))
            .fold(f64::INFINITY, f64::min),
        (Point(p), Polygon(r)) | (Polygon(r), Point(p)) => ring_edges(r)
            .map(|(s, e)| dist_point_seg(*p, s, e))
            .fold(f64::INFINITY, f64::min),
        (LineString(l1), LineString(l2)) => seg_set_distance(l1, l2),
        (LineString(l), Polygon(r)) | (Polygon(r), LineString(l)) => seg_set_distance(l, r),
        (Polygon(r1), Polygon(r2)) => seg_set_distance(r1, r2),
    }
}

fn seg_set_distance(a: &[Point], b: &[Point]) -> f64 {
    let mut best = f64::INFINITY;
    for (a1, a2) in line_segs(a) {
        for (b1, b2) in line_segs(b) {
            best = best.min(dist_seg_seg(a1, a2, b1, b2));
        }
    }
    best
}

/// Shoelace area; only polygons have one.
pub fn area(g: &Geometry) -> Result<f64, GeomError> {
    match g {
        Geometry::Polygon(ring) => {
            let mut sum = 0.0;
            for (a, b) in ring_edges(ring) {
                sum += a.x * b.y - b.x * a.y;
            }
            Ok(sum.abs() / 2.0)
        }
        other => Err(GeomError::AreaType(other.kind())),
    }
}

// ---------------------------------------------------------------------------
// polygon validity
// ---------------------------------------------------------------------------

/// Ring invariants: explicit closure, at least 3 distinct vertices, no
/// repeated consecutive vertices, no backtracking spikes, simple (no
/// self-intersection between non-adjacent edges).
pub(crate) fn validate_ring(ring: &[Point]) -> Result<(), String> {
    if ring.len() < 4 {
        return Err(format!(
            "ring has {} vertices, need at least 4 (closed)",
            ring.len()
        ));
    }
    if ring[0] != ring[ring.len() - 1] {
        return Err("ring is not closed (first vertex must equal last)".into());
    }
    let open = &ring[..ring.len() - 1];
    let mut distinct: Vec<Point> = Vec::new();
    for p in open {
        if !distinct.iter().any(|q| dist(*p, *q) <= DEFAULT_EPSILON) {
            distinct.push(*p);
        }
    }
    if distinct.len() < 3 {
        return Err("ring needs at least 3 distinct vertices".into());
    }
    let n = open.len();
    for i in 0..n {
        let (a, b) = (open[i], open[(i + 1) % n]);
        if dist(a, b) <= DEFAULT_EPSILON {
            return Err(format!("repeated consecutive vertex at index {i}"));
        }
    }
    for i in 0..n {
        let prev = open[(i + n - 1) % n];
        let v = open[i];
        let next = open[(i + 1) % n];
        if cross(v, prev, next).abs() <= DEFAULT_EPSILON
            && (prev.x - v.x) * (next.x - v.x) + (prev.y - v.y) * (next.y - v.y) > 0.0
        {
            return Err(format!("spike at vertex index {i}"));
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            // Skip adjacent edge pairs (including the wrap-around pair).
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (a1, a2) = (open[i], open[(i + 1) % n]);
            let (b1, b2) = (open[j], open[(j + 1) % n]);
            if segs_intersect(a1, a2, b1, b2, DEFAULT_EPSILON) {
                return Err(format!("ring self-intersects between edges {i} and {j}"));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(x0: f64, y0: f64, x1: f64, y1: f64) -> Geometry {
        parse_wkt(&format!(
            "POLYGON(({x0} {y0},{x1} {y0},{x1} {y1},{x0} {y1},{x0} {y0}))"
        ))
        .unwrap()
    }

    fn pt(x: f64, y: f64) -> Geometry {
        Geometry::Point(Point::new(x, y))
    }

    fn line(coords: &[(f64, f64)]) -> Geometry {
        Geometry::LineString(coords.iter().map(|&(x, y)| Point::new(x, y)).collect())
    }

    #[test]
    fn contains_boundary_and_interior() {
        let sq = square(0.0, 0.0, 4.0, 4.0);
        assert!(contains(&sq, &pt(2.0, 2.0)));
        assert!(contains(&sq, &pt(0.0, 2.0)), "boundary counts as inside");
        assert!(!contains(&sq, &pt(5.0, 2.0)));
        assert!(!contains(&pt(2.0, 2.0), &sq));
    }

    #[test]
    fn crosses_line_through_square() {
        let sq = square(0.0, 0.0, 4.0, 4.0);
        let l = line(&[(-1.0, 2.0), (5.0, 2.0)]);
        assert!(crosses(&l, &sq));
        assert!(crosses(&sq, &l));
        // A chord along the boundary does not cross.
        let edge = line(&[(0.0, 0.0), (4.0, 0.0)]);
        assert!(!crosses(&edge, &sq));
        // A line ending strictly inside still crosses.
        let half = line(&[(-1.0, 2.0), (2.0, 2.0)]);
        assert!(crosses(&half, &sq));
        // Fully interior line does not cross (contained).
        let inner = line(&[(1.0, 2.0), (3.0, 2.0)]);
        assert!(!crosses(&inner, &sq));
        assert!(contains(&sq, &inner));
    }

    #[test]
    fn touching_squares() {
        let a = square(0.0, 0.0, 2.0, 2.0);
        let b = square(2.0, 0.0, 4.0, 2.0);
        assert!(touches(&a, &b));
        assert!(intersects(&a, &b));
        assert!(!crosses(&a, &b));
        let c = square(1.0, 0.0, 3.0, 2.0);
        assert!(!touches(&a, &c), "overlapping interiors");
        assert!(crosses(&a, &c), "partial overlap, neither contains");
    }

    #[test]
    fn touch_point_on_polygon_boundary() {
        let sq = square(0.0, 0.0, 4.0, 4.0);
        assert!(touches(&sq, &pt(0.0, 2.0)));
        assert!(
            !touches(&sq, &pt(2.0, 2.0)),
            "interior point does not touch"
        );
    }

    #[test]
    fn distance_examples() {
        assert_eq!(distance(&pt(0.0, 0.0), &pt(3.0, 4.0)), 5.0);
        let sq = square(0.0, 0.0, 4.0, 4.0);
        assert_eq!(distance(&pt(6.0, 2.0), &sq), 2.0);
        assert_eq!(distance(&pt(2.0, 2.0), &sq), 0.0, "inside means zero");
        let far = square(120.0, 0.0, 140.0, 40.0);
        let near = square(0.0, 0.0, 40.0, 40.0);
        assert_eq!(distance(&near, &far), 80.0);
    }

    #[test]
    fn area_examples() {
        let unit = square(0.0, 0.0, 1.0, 1.0);
        assert_eq!(area(&unit).unwrap(), 1.0);
        assert!(matches!(area(&pt(0.0, 0.0)), Err(GeomError::AreaType(_))));
        assert!(matches!(
            area(&line(&[(0.0, 0.0), (1.0, 1.0)])),
            Err(GeomError::AreaType(_))
        ));
    }

    #[test]
    fn polygon_containment() {
        let outer = square(0.0, 0.0, 10.0, 10.0);
        let inner = square(2.0, 2.0, 6.0, 6.0);
        assert!(contains(&outer, &inner));
        assert!(!contains(&inner, &outer));
        assert!(contains(&outer, &outer), "a polygon contains itself");
    }

    #[test]
    fn ring_validation() {
        assert!(validate_ring(&[
            Point::new(0.0, 0.0),
            Point::new(4.0, 0.0),
            Point::new(4.0, 4.0),
            Point::new(0.0, 0.0)
        ])
        .is_ok());
        // Bowtie self-intersection.
        assert!(validate_ring(&[
            Point::new(0.0, 0.0),
            Point::new(4.0, 4.0),
            Point::new(4.0, 0.0),
            Point::new(0.0, 4.0),
            Point::new(0.0, 0.0)
        ])
        .is_err());
    }
}
