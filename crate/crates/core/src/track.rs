//! Track geometry: polylines with a segment grid, the reference-line frame
//! and clearance of vehicle footprints to the track bounds.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{closest_point_on_segment, Aabb, ConvexPolygon, Vec2};
use crate::math;

/// Default projection corridor around the reference line [m].
pub const DEFAULT_CORRIDOR: f64 = 50.0;

/// Result of a closest-point query on a polyline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Closest {
    pub segment: usize,
    /// Parameter along the segment in [0, 1].
    pub t: f64,
    pub point: Vec2,
    pub distance: f64,
}

/// Uniform grid over segment bounding boxes, stored in compressed rows.
#[derive(Debug, Clone, PartialEq)]
struct SegmentGrid {
    origin: Vec2,
    cell: f64,
    nx: usize,
    ny: usize,
    starts: Vec<u32>,
    items: Vec<u32>,
}

const MAX_GRID_CELLS: usize = 1 << 20;

impl SegmentGrid {
    fn build(segments: &[(Vec2, Vec2)]) -> Self {
        let bbox = Aabb::from_points(segments.iter().flat_map(|&(a, b)| [a, b])).unwrap_or(Aabb {
            min: Vec2::ZERO,
            max: Vec2::ZERO,
        });
        let mean_len = segments.iter().map(|&(a, b)| a.distance(b)).sum::<f64>()
            / segments.len().max(1) as f64;
        let extent = (bbox.max.x - bbox.min.x).max(bbox.max.y - bbox.min.y);
        let mut cell = (4.0 * mean_len).clamp(1.0, 100.0).max(extent / 1024.0);
        let (mut nx, mut ny);
        loop {
            nx = ((bbox.max.x - bbox.min.x) / cell) as usize + 1;
            ny = ((bbox.max.y - bbox.min.y) / cell) as usize + 1;
            if nx * ny <= MAX_GRID_CELLS {
                break;
            }
            cell *= 2.0;
        }
        let mut grid = SegmentGrid {
            origin: bbox.min,
            cell,
            nx,
            ny,
            starts: Vec::new(),
            items: Vec::new(),
        };

        let mut counts = alloc::vec![0u32; nx * ny + 1];
        for &(a, b) in segments {
            grid.for_cells(a, b, |c| counts[c] += 1);
        }
        let mut acc = 0u32;
        for c in counts.iter_mut() {
            let n = *c;
            *c = acc;
            acc += n;
        }
        let mut fill = counts.clone();
        let mut items = alloc::vec![0u32; acc as usize];
        for (i, &(a, b)) in segments.iter().enumerate() {
            grid.for_cells(a, b, |c| {
                items[fill[c] as usize] = i as u32;
                fill[c] += 1;
            });
        }
        grid.starts = counts;
        grid.items = items;
        grid
    }

    fn cell_of(&self, p: Vec2) -> (i64, i64) {
        (
            math::floor((p.x - self.origin.x) / self.cell) as i64,
            math::floor((p.y - self.origin.y) / self.cell) as i64,
        )
    }

    fn clamp_x(&self, i: i64) -> usize {
        i.clamp(0, self.nx as i64 - 1) as usize
    }

    fn clamp_y(&self, j: i64) -> usize {
        j.clamp(0, self.ny as i64 - 1) as usize
    }

    fn for_cells(&self, a: Vec2, b: Vec2, mut f: impl FnMut(usize)) {
        let (ax, ay) = self.cell_of(a);
        let (bx, by) = self.cell_of(b);
        for j in self.clamp_y(ay.min(by))..=self.clamp_y(ay.max(by)) {
            for i in self.clamp_x(ax.min(bx))..=self.clamp_x(ax.max(bx)) {
                f(j * self.nx + i);
            }
        }
    }

    fn cell_items(&self, i: usize, j: usize) -> &[u32] {
        let c = j * self.nx + i;
        &self.items[self.starts[c] as usize..self.starts[c + 1] as usize]
    }

    fn visit_box(&self, bbox: Aabb, mut f: impl FnMut(usize)) {
        let (x0, y0) = self.cell_of(bbox.min);
        let (x1, y1) = self.cell_of(bbox.max);
        if x1 < 0 || y1 < 0 || x0 >= self.nx as i64 || y0 >= self.ny as i64 {
            return;
        }
        for j in self.clamp_y(y0)..=self.clamp_y(y1) {
            for i in self.clamp_x(x0)..=self.clamp_x(x1) {
                for &s in self.cell_items(i, j) {
                    f(s as usize);
                }
            }
        }
    }

    /// Visits the cells at Chebyshev distance exactly `r` from `(cx, cy)`.
    fn visit_ring(&self, cx: i64, cy: i64, r: i64, mut f: impl FnMut(usize)) {
        let (nx, ny) = (self.nx as i64, self.ny as i64);
        let mut cell = |i: i64, j: i64| {
            if i >= 0 && j >= 0 && i < nx && j < ny {
                for &s in self.cell_items(i as usize, j as usize) {
                    f(s as usize);
                }
            }
        };
        if r == 0 {
            cell(cx, cy);
            return;
        }
        let (lo_i, hi_i) = ((cx - r).max(0), (cx + r).min(nx - 1));
        for i in lo_i..=hi_i {
            cell(i, cy - r);
            cell(i, cy + r);
        }
        let (lo_j, hi_j) = ((cy - r + 1).max(0), (cy + r - 1).min(ny - 1));
        for j in lo_j..=hi_j {
            cell(cx - r, j);
            cell(cx + r, j);
        }
    }

    /// Smallest ring radius whose block touches the grid, and the radius
    /// after which the block covers the whole grid.
    fn ring_range(&self, cx: i64, cy: i64) -> (i64, i64) {
        let (nx, ny) = (self.nx as i64, self.ny as i64);
        let dx = (-cx).max(cx - (nx - 1)).max(0);
        let dy = (-cy).max(cy - (ny - 1)).max(0);
        let first = dx.max(dy);
        let last = cx.max(nx - 1 - cx).max(cy).max(ny - 1 - cy);
        (first, last)
    }
}

/// Polyline with cumulative arc length and a spatial index over segments.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    points: Vec<Vec2>,
    /// Arc length at each point; for closed polylines the closing segment
    /// ends at `total`.
    s: Vec<f64>,
    total: f64,
    closed: bool,
    grid: SegmentGrid,
}

impl Polyline {
    /// Builds a polyline whose arc lengths are measured from the geometry.
    pub fn new(points: Vec<Vec2>, closed: bool) -> Result<Self> {
        let mut s = Vec::with_capacity(points.len());
        let mut acc = 0.0;
        for (i, p) in points.iter().enumerate() {
            if i > 0 {
                acc += p.distance(points[i - 1]);
            }
            s.push(acc);
        }
        Self::with_arc_lengths(points, s, closed)
    }

    /// Builds a polyline with caller-provided arc lengths (e.g. from a track
    /// file). Arc lengths must be strictly increasing.
    pub fn with_arc_lengths(points: Vec<Vec2>, s: Vec<f64>, closed: bool) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidTrack(
                "polyline needs at least two points".into(),
            ));
        }
        if s.len() != points.len() {
            return Err(Error::InvalidTrack(
                "arc length count differs from point count".into(),
            ));
        }
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidTrack(format!(
                "non-finite point at index {i}"
            )));
        }
        if let Some(i) = (1..s.len()).find(|&i| !(s[i] > s[i - 1]) || points[i] == points[i - 1]) {
            return Err(Error::InvalidTrack(format!(
                "arc length not strictly increasing at index {i}"
            )));
        }
        let closing = points[points.len() - 1].distance(points[0]);
        if closed && closing == 0.0 {
            return Err(Error::InvalidTrack(
                "closed polyline repeats its first point; omit the duplicate".into(),
            ));
        }
        let total = s[s.len() - 1] + if closed { closing } else { 0.0 };
        let mut line = Polyline {
            points,
            s,
            total,
            closed,
            grid: SegmentGrid::build(&[]),
        };
        let segs: Vec<_> = (0..line.segment_count()).map(|i| line.segment(i)).collect();
        line.grid = SegmentGrid::build(&segs);
        Ok(line)
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    pub fn arc_lengths(&self) -> &[f64] {
        &self.s
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn total_length(&self) -> f64 {
        self.total
    }

    pub fn segment_count(&self) -> usize {
        if self.closed {
            self.points.len()
        } else {
            self.points.len() - 1
        }
    }

    pub fn segment(&self, i: usize) -> (Vec2, Vec2) {
        (self.points[i], self.points[(i + 1) % self.points.len()])
    }

    fn segment_s(&self, i: usize) -> (f64, f64) {
        let end = if i + 1 < self.s.len() {
            self.s[i + 1]
        } else {
            self.total
        };
        (self.s[i], end)
    }

    pub fn max_segment_length(&self) -> f64 {
        (0..self.segment_count())
            .map(|i| {
                let (a, b) = self.segment(i);
                a.distance(b)
            })
            .fold(0.0, f64::max)
    }

    fn closest_on(&self, p: Vec2, i: usize) -> Closest {
        let (a, b) = self.segment(i);
        let (q, t) = closest_point_on_segment(p, a, b);
        Closest {
            segment: i,
            t,
            point: q,
            distance: p.distance(q),
        }
    }

    /// Closest point on the polyline within `max_distance` of `p`.
    ///
    /// Ties resolve to the lowest segment index so results do not depend on
    /// grid traversal order.
    pub fn closest(&self, p: Vec2, max_distance: f64) -> Option<Closest> {
        let g = &self.grid;
        let (cx, cy) = g.cell_of(p);
        let (first, last) = g.ring_range(cx, cy);
        // (squared distance, segment)
        let mut best: Option<(f64, usize)> = None;
        let mut r = first;
        loop {
            g.visit_ring(cx, cy, r, |i: usize| {
                let (a, b) = self.segment(i);
                let d2 = (closest_point_on_segment(p, a, b).0 - p).norm_sq();
                let better = match best {
                    None => true,
                    Some((bd, bi)) => d2 < bd || (d2 == bd && i < bi),
                };
                if better {
                    best = Some((d2, i));
                }
            });
            // Everything outside the visited block is at least this far.
            let bound = r as f64 * g.cell;
            let done_best = best.is_some_and(|(d2, _)| d2 < bound * bound);
            if done_best || bound > max_distance || r >= last {
                break;
            }
            r += 1;
        }
        best.map(|(_, i)| self.closest_on(p, i))
            .filter(|c| c.distance <= max_distance)
    }

    /// Segment indices whose cells overlap `bbox`; may contain duplicates.
    pub fn segments_near(&self, bbox: Aabb, mut f: impl FnMut(usize)) {
        self.grid.visit_box(bbox, &mut f)
    }

    /// Unit tangent at a closest-point result. At vertices the adjacent
    /// segment directions are averaged.
    pub fn tangent_at(&self, c: &Closest) -> Vec2 {
        let (a, b) = self.segment(c.segment);
        let dir = (b - a).normalized();
        let n = self.segment_count();
        if c.t <= 0.0 && (self.closed || c.segment > 0) {
            let prev = (c.segment + n - 1) % n;
            let (pa, pb) = self.segment(prev);
            (dir + (pb - pa).normalized()).normalized()
        } else if c.t >= 1.0 && (self.closed || c.segment + 1 < n) {
            let next = (c.segment + 1) % n;
            let (na, nb) = self.segment(next);
            (dir + (nb - na).normalized()).normalized()
        } else {
            dir
        }
    }

    /// Arc length of a closest-point result.
    pub fn arc_length_at(&self, c: &Closest) -> f64 {
        let (s0, s1) = self.segment_s(c.segment);
        s0 + c.t * (s1 - s0)
    }

    /// Offset of `p` from a closest-point result, positive to the left.
    pub fn signed_offset(&self, p: Vec2, c: &Closest) -> f64 {
        let side = self.tangent_at(c).cross(p - c.point);
        if side < 0.0 {
            -c.distance
        } else {
            c.distance
        }
    }

    /// Point and unit tangent at arc length `s` (wrapped on closed lines,
    /// clamped on open ones).
    pub fn point_at(&self, s: f64) -> (Vec2, Vec2) {
        let s = if self.closed {
            math::rem_euclid(s, self.total)
        } else {
            s.clamp(0.0, self.total)
        };
        let i = match self.s.partition_point(|&v| v <= s) {
            0 => 0,
            k => (k - 1).min(self.segment_count() - 1),
        };
        let (a, b) = self.segment(i);
        let (s0, s1) = self.segment_s(i);
        let t = ((s - s0) / (s1 - s0)).clamp(0.0, 1.0);
        (a + (b - a) * t, (b - a).normalized())
    }

    /// True when no two non-adjacent segments intersect.
    pub fn is_simple(&self) -> bool {
        let n = self.segment_count();
        for i in 0..n {
            let (a, b) = self.segment(i);
            let bbox = Aabb::from_points([a, b]).unwrap();
            let mut hit = false;
            self.segments_near(bbox, |j| {
                if hit || j <= i {
                    return;
                }
                let adjacent = j == i + 1 || (self.closed && i == 0 && j == n - 1);
                if adjacent {
                    return;
                }
                let (c, d) = self.segment(j);
                if crate::geometry::segments_intersect(a, b, c, d) {
                    hit = true;
                }
            });
            if hit {
                return false;
            }
        }
        true
    }
}

/// Which side of the track a bound delimits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// How the longitudinal order of two agents is decided on a closed track.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GapMode {
    /// Signed arc-length difference wrapped into half a lap.
    #[default]
    HalfLap,
    /// Every other agent counts as ahead; the gap is the forward distance.
    Forward,
}

/// Track-relative position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrenetPosition {
    /// Arc length along the reference line [m].
    pub s: f64,
    /// Lateral offset, left positive [m].
    pub n: f64,
}

/// One row of a sampled track description.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackSample {
    pub s: f64,
    pub x: f64,
    pub y: f64,
    /// Distance from the reference line to the left bound [m, > 0].
    pub n_left: f64,
    /// Distance from the reference line to the right bound [m, > 0].
    pub n_right: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackMap {
    reference: Polyline,
    left: Polyline,
    right: Polyline,
    corridor: f64,
    gap_mode: GapMode,
}

impl TrackMap {
    /// Builds a track from explicit polylines, all oriented along the
    /// driving direction.
    pub fn new(reference: Polyline, left: Polyline, right: Polyline) -> Result<Self> {
        if left.is_closed() != reference.is_closed() || right.is_closed() != reference.is_closed() {
            return Err(Error::InvalidTrack(
                "bounds and reference differ in closedness".into(),
            ));
        }
        if !left.is_simple() || !right.is_simple() {
            return Err(Error::InvalidTrack("track bound intersects itself".into()));
        }
        let map = TrackMap {
            reference,
            left,
            right,
            corridor: DEFAULT_CORRIDOR,
            gap_mode: GapMode::default(),
        };
        for (i, &p) in map.reference.points().iter().enumerate() {
            if map.bound_signed_distance(p, Side::Left) <= 0.0
                || map.bound_signed_distance(p, Side::Right) <= 0.0
            {
                return Err(Error::InvalidTrack(format!(
                    "reference point {i} does not lie between the bounds"
                )));
            }
        }
        Ok(map)
    }

    /// Builds a track from reference samples and lateral widths; bounds are
    /// offset along the reference normals.
    pub fn from_samples(samples: &[TrackSample], closed: bool) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidTrack(
                "track needs at least two samples".into(),
            ));
        }
        if let Some(i) = samples
            .iter()
            .position(|r| !(r.n_left > 0.0 && r.n_right > 0.0))
        {
            return Err(Error::InvalidTrack(format!(
                "non-positive width at sample {i}"
            )));
        }
        let pts: Vec<Vec2> = samples.iter().map(|r| Vec2::new(r.x, r.y)).collect();
        let s: Vec<f64> = samples.iter().map(|r| r.s).collect();
        let reference = Polyline::with_arc_lengths(pts.clone(), s, closed)?;
        let n = pts.len();
        let mut left = Vec::with_capacity(n);
        let mut right = Vec::with_capacity(n);
        for (i, r) in samples.iter().enumerate() {
            let prev = if i > 0 {
                pts[i - 1]
            } else if closed {
                pts[n - 1]
            } else {
                pts[i]
            };
            let next = if i + 1 < n {
                pts[i + 1]
            } else if closed {
                pts[0]
            } else {
                pts[i]
            };
            let normal = (next - prev).normalized().perp();
            left.push(pts[i] + normal * r.n_left);
            right.push(pts[i] - normal * r.n_right);
        }
        TrackMap::new(
            reference,
            Polyline::new(left, closed)?,
            Polyline::new(right, closed)?,
        )
    }

    pub fn with_corridor(mut self, corridor: f64) -> Self {
        self.corridor = corridor;
        self
    }

    pub fn with_gap_mode(mut self, mode: GapMode) -> Self {
        self.gap_mode = mode;
        self
    }

    pub fn reference(&self) -> &Polyline {
        &self.reference
    }

    pub fn bound(&self, side: Side) -> &Polyline {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }

    pub fn is_closed(&self) -> bool {
        self.reference.is_closed()
    }

    pub fn gap_mode(&self) -> GapMode {
        self.gap_mode
    }

    pub fn corridor(&self) -> f64 {
        self.corridor
    }

    pub fn length(&self) -> f64 {
        self.reference.total_length()
    }

    /// Projects `p` onto the reference line.
    pub fn project(&self, p: Vec2) -> Result<FrenetPosition> {
        let c = self
            .reference
            .closest(p, self.corridor)
            .ok_or(Error::OutOfCorridor {
                x: p.x,
                y: p.y,
                corridor: self.corridor,
            })?;
        Ok(FrenetPosition {
            s: self.reference.arc_length_at(&c),
            n: self.reference.signed_offset(p, &c),
        })
    }

    /// Heading of the reference line at the point closest to `p`.
    pub fn project_with_heading(&self, p: Vec2) -> Result<(FrenetPosition, f64)> {
        let c = self
            .reference
            .closest(p, self.corridor)
            .ok_or(Error::OutOfCorridor {
                x: p.x,
                y: p.y,
                corridor: self.corridor,
            })?;
        let tangent = self.reference.tangent_at(&c);
        Ok((
            FrenetPosition {
                s: self.reference.arc_length_at(&c),
                n: self.reference.signed_offset(p, &c),
            },
            math::atan2(tangent.y, tangent.x),
        ))
    }

    /// Cartesian point for a track-relative position.
    pub fn to_cartesian(&self, f: FrenetPosition) -> Vec2 {
        let (p, t) = self.reference.point_at(f.s);
        p + t.perp() * f.n
    }

    /// Signed arc-length difference `to - from` along the driving direction.
    pub fn signed_gap(&self, from_s: f64, to_s: f64) -> f64 {
        let d = to_s - from_s;
        if !self.is_closed() {
            return d;
        }
        let l = self.length();
        match self.gap_mode {
            GapMode::Forward => math::rem_euclid(d, l),
            GapMode::HalfLap => {
                let w = math::rem_euclid(d, l);
                if w > 0.5 * l {
                    w - l
                } else {
                    w
                }
            }
        }
    }

    /// Signed distance of `p` to one bound: positive on the track side,
    /// negative beyond the bound.
    pub fn bound_signed_distance(&self, p: Vec2, side: Side) -> f64 {
        let line = self.bound(side);
        let c = match line.closest(p, f64::INFINITY) {
            Some(c) => c,
            None => return f64::INFINITY,
        };
        let left_of = line.tangent_at(&c).cross(p - c.point) > 0.0;
        let outside = match side {
            Side::Left => left_of,
            Side::Right => !left_of && c.distance > 0.0,
        };
        if outside {
            -c.distance
        } else {
            c.distance
        }
    }

    fn bound_clearance(&self, poly: &ConvexPolygon, side: Side) -> f64 {
        let vertex_sd = poly
            .vertices()
            .iter()
            .map(|&v| self.bound_signed_distance(v, side))
            .fold(f64::INFINITY, f64::min);
        if vertex_sd < 0.0 {
            return vertex_sd;
        }
        let line = self.bound(side);
        let bbox = match poly.bbox() {
            Some(b) => b.expanded(vertex_sd),
            None => return vertex_sd,
        };
        let mut best = vertex_sd;
        let mut crossing = false;
        let mut depth: f64 = 0.0;
        let poly_box = poly.bbox().unwrap_or(bbox);
        // Vertex-to-bound distances are covered by `vertex_sd`; what is left
        // are bound vertices close to the polygon and bound segments crossing it.
        line.segments_near(bbox, |i| {
            let (a, b) = line.segment(i);
            let seg_box = Aabb {
                min: Vec2::new(a.x.min(b.x), a.y.min(b.y)),
                max: Vec2::new(a.x.max(b.x), a.y.max(b.y)),
            };
            if seg_box.box_distance(&poly_box) >= best {
                return;
            }
            if poly.intersects_segment(a, b) {
                crossing = true;
                for q in [a, b] {
                    if poly.contains(q) {
                        depth = depth.max(poly.boundary_distance(q));
                    }
                }
            } else {
                best = best
                    .min(poly.boundary_distance(a))
                    .min(poly.boundary_distance(b));
            }
        });
        if crossing {
            -depth
        } else {
            best
        }
    }

    /// Minimum clearance of `poly` to either bound, negative (penetration
    /// depth) when it crosses one.
    pub fn signed_distance_to_bounds(&self, poly: &ConvexPolygon) -> f64 {
        self.bound_clearance(poly, Side::Left)
            .min(self.bound_clearance(poly, Side::Right))
    }
}

/// Free-function form of [`TrackMap::project`].
pub fn project_to_frenet(p: Vec2, map: &TrackMap) -> Result<FrenetPosition> {
    map.project(p)
}

/// Free-function form of [`TrackMap::signed_distance_to_bounds`].
pub fn signed_distance_to_bounds(poly: &ConvexPolygon, map: &TrackMap) -> f64 {
    map.signed_distance_to_bounds(poly)
}

/// Straight open track along +x from `x0` to `x1`, half-width `half_width`,
/// sampled every `step` meters. Used by tests and fixtures.
pub fn straight_track(x0: f64, x1: f64, step: f64, half_width: f64) -> Result<TrackMap> {
    let n = ((x1 - x0) / step) as usize + 1;
    let samples: Vec<TrackSample> = (0..n)
        .map(|i| {
            let x = x0 + i as f64 * step;
            TrackSample {
                s: x - x0,
                x,
                y: 0.0,
                n_left: half_width,
                n_right: half_width,
            }
        })
        .collect();
    TrackMap::from_samples(&samples, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn square(c: Vec2) -> ConvexPolygon {
        ConvexPolygon::oriented_rect(c, 0.0, 2.0, 2.0)
    }

    #[test]
    fn projection_on_straight_line() {
        let map = straight_track(0.0, 100.0, 1.0, 5.0).unwrap();
        let f = map.project(Vec2::new(10.0, 0.0)).unwrap();
        assert!((f.s - 10.0).abs() < 1e-12 && f.n.abs() < 1e-12);
        let f = map.project(Vec2::new(10.0, 3.0)).unwrap();
        assert!((f.s - 10.0).abs() < 1e-12 && (f.n - 3.0).abs() < 1e-12);
        let f = map.project(Vec2::new(10.5, -2.0)).unwrap();
        assert!((f.s - 10.5).abs() < 1e-12 && (f.n + 2.0).abs() < 1e-12);
    }

    #[test]
    fn out_of_corridor() {
        let map = straight_track(0.0, 100.0, 1.0, 5.0).unwrap();
        assert!(matches!(
            map.project(Vec2::new(10.0, 60.0)),
            Err(Error::OutOfCorridor { .. })
        ));
        let map = map.with_corridor(100.0);
        assert!(map.project(Vec2::new(10.0, 60.0)).is_ok());
    }

    #[test]
    fn quarter_circle_projection() {
        let r = 100.0;
        let n = 2001;
        let pts: Vec<Vec2> = (0..n)
            .map(|i| {
                let a = (PI / 2.0) * i as f64 / (n - 1) as f64;
                Vec2::new(r * math::cos(a), r * math::sin(a))
            })
            .collect();
        let reference = Polyline::new(pts, false).unwrap();
        let seg = reference.max_segment_length();
        let c = reference
            .closest(
                Vec2::new(r * math::cos(PI / 4.0), r * math::sin(PI / 4.0)),
                50.0,
            )
            .unwrap();
        let s = reference.arc_length_at(&c);
        // chord lengths undershoot the arc slightly
        assert!((s - 100.0 * PI / 4.0).abs() < seg, "s = {s}");
        assert!(c.distance < seg);
    }

    #[test]
    fn square_between_bounds() {
        let map = straight_track(-50.0, 50.0, 1.0, 5.0).unwrap();
        let d = map.signed_distance_to_bounds(&square(Vec2::ZERO));
        assert!((d - 4.0).abs() < 1e-12, "{d}");
        let d = map.signed_distance_to_bounds(&square(Vec2::new(0.0, 5.0)));
        assert!((d + 1.0).abs() < 1e-12, "{d}");
        let d = map.signed_distance_to_bounds(&square(Vec2::new(0.0, 6.5)));
        assert!((d + 2.5).abs() < 1e-12, "{d}");
    }

    #[test]
    fn bound_poking_into_polygon_is_negative() {
        // left bound with a spike pointing into the track
        let reference = Polyline::new(
            alloc::vec![Vec2::new(0.0, 0.0), Vec2::new(20.0, 0.0)],
            false,
        )
        .unwrap();
        let left = Polyline::new(
            alloc::vec![
                Vec2::new(0.0, 5.0),
                Vec2::new(9.0, 5.0),
                Vec2::new(10.0, 1.5),
                Vec2::new(11.0, 5.0),
                Vec2::new(20.0, 5.0)
            ],
            false,
        )
        .unwrap();
        let right = Polyline::new(
            alloc::vec![Vec2::new(0.0, -5.0), Vec2::new(20.0, -5.0)],
            false,
        )
        .unwrap();
        let map = TrackMap::new(reference, left, right).unwrap();
        let poly = ConvexPolygon::oriented_rect(Vec2::new(10.0, 0.0), 0.0, 4.0, 4.0);
        let d = map.signed_distance_to_bounds(&poly);
        assert!((d + 0.5).abs() < 1e-12, "{d}");
    }

    #[test]
    fn reference_outside_bounds_rejected() {
        let reference = Polyline::new(
            alloc::vec![Vec2::new(0.0, 0.0), Vec2::new(20.0, 0.0)],
            false,
        )
        .unwrap();
        let left = Polyline::new(
            alloc::vec![Vec2::new(0.0, -1.0), Vec2::new(20.0, -1.0)],
            false,
        )
        .unwrap();
        let right = Polyline::new(
            alloc::vec![Vec2::new(0.0, -5.0), Vec2::new(20.0, -5.0)],
            false,
        )
        .unwrap();
        assert!(matches!(
            TrackMap::new(reference, left, right),
            Err(Error::InvalidTrack(_))
        ));
    }

    #[test]
    fn closed_circle_wraps() {
        let r = 200.0;
        let n = 400;
        let samples: Vec<TrackSample> = (0..n)
            .map(|i| {
                let a = 2.0 * PI * i as f64 / n as f64;
                TrackSample {
                    s: r * a,
                    x: r * math::cos(a),
                    y: r * math::sin(a),
                    n_left: 6.0,
                    n_right: 6.0,
                }
            })
            .collect();
        let map = TrackMap::from_samples(&samples, true).unwrap();
        let l = map.length();
        assert!(map.signed_gap(l - 5.0, 5.0) > 0.0);
        assert!((map.signed_gap(l - 5.0, 5.0) - 10.0).abs() < 1.0);
        assert!(map.signed_gap(5.0, l - 5.0) < 0.0);
        let fwd = map.clone().with_gap_mode(GapMode::Forward);
        assert!(fwd.signed_gap(5.0, l - 5.0) > 0.0);
        // point just before the seam projects near the end of the lap
        let a = -0.001;
        let f = map
            .project(Vec2::new(r * math::cos(a), r * math::sin(a)))
            .unwrap();
        assert!(f.s > l - 1.0);
        // points to the left of a counter-clockwise circle are inside it
        let f = map.project(Vec2::new(190.0, 0.0)).unwrap();
        assert!((f.n - 10.0).abs() < 0.01, "{}", f.n);
    }

    #[test]
    fn self_intersecting_bound_rejected() {
        let line = Polyline::new(
            alloc::vec![
                Vec2::new(0.0, 0.0),
                Vec2::new(10.0, 0.0),
                Vec2::new(10.0, 10.0),
                Vec2::new(5.0, -5.0)
            ],
            false,
        )
        .unwrap();
        assert!(!line.is_simple());
    }
}
