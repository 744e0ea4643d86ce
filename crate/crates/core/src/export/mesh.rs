//! Boundary mesh from stacked slice contours.
//!
//! Each slice's membership raster is contoured with marching squares; every
//! contour vertex is then pulled onto the true membership boundary by
//! bisecting the oracle along its lattice edge (keeping the inside end).
//! Consecutive contours are stitched by walking both rings in step of
//! normalized arc length, starting from angularly aligned vertices, and the
//! first and last contours are closed with fans around their centroids.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::MachineGeometry;
use crate::sweep::{oracle_membership, Classification, MembershipGrid, SliceSet};

/// Closed triangle surface; triangles are counter-clockwise seen from outside.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeshSurface {
    pub vertices: Vec<[f64; 3]>,
    pub triangles: Vec<[usize; 3]>,
}

/// Triangles with less area than this are not emitted [m^2].
const MIN_TRIANGLE_AREA: f64 = 1e-15;

fn triangle_area(a: &[f64; 3], b: &[f64; 3], c: &[f64; 3]) -> f64 {
    let u = nalgebra::Vector3::new(b[0] - a[0], b[1] - a[1], b[2] - a[2]);
    let v = nalgebra::Vector3::new(c[0] - a[0], c[1] - a[1], c[2] - a[2]);
    0.5 * u.cross(&v).norm()
}

impl MeshSurface {
    /// Indices in range and no degenerate triangles.
    pub fn check(&self) -> Result<()> {
        let n = self.vertices.len();
        for (k, t) in self.triangles.iter().enumerate() {
            if t.iter().any(|&i| i >= n) {
                return Err(Error::Precondition(format!("triangle {k} indexes past {n} vertices")));
            }
            let [a, b, c] = t.map(|i| self.vertices[i]);
            if triangle_area(&a, &b, &c) < MIN_TRIANGLE_AREA {
                return Err(Error::Precondition(format!("triangle {k} is degenerate")));
            }
        }
        Ok(())
    }

    /// Count of directed edges without an opposite partner; 0 for a closed,
    /// consistently oriented surface.
    pub fn unmatched_edges(&self) -> usize {
        let mut count: HashMap<(usize, usize), i64> = HashMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                *count.entry((a.min(b), a.max(b))).or_default() += if a < b { 1 } else { -1 };
            }
        }
        count.values().map(|c| c.unsigned_abs() as usize).sum()
    }

    /// Signed enclosed volume (positive for outward orientation).
    pub fn signed_volume(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let [a, b, c] = t.map(|i| nalgebra::Vector3::from(self.vertices[i]));
                a.dot(&b.cross(&c)) / 6.0
            })
            .sum()
    }
}

/// One closed planar ring at height `z`, counter-clockwise in (x, y).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Contour {
    pub z: f64,
    pub points: Vec<(f64, f64)>,
}

impl Contour {
    fn signed_area(points: &[(f64, f64)]) -> f64 {
        let n = points.len();
        (0..n)
            .map(|k| {
                let (a, b) = (points[k], points[(k + 1) % n]);
                a.0 * b.1 - b.0 * a.1
            })
            .sum::<f64>()
            * 0.5
    }

    fn centroid(&self) -> (f64, f64) {
        let n = self.points.len() as f64;
        let (sx, sy) = self.points.iter().fold((0.0, 0.0), |s, p| (s.0 + p.0, s.1 + p.1));
        (sx / n, sy / n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeshParams {
    /// Raster cells per side over the interference box.
    pub resolution: usize,
    /// A slice with more connected regions than this is a topology error.
    pub component_limit: usize,
}

impl Default for MeshParams {
    fn default() -> Self {
        Self { resolution: 96, component_limit: 1 }
    }
}

/// Labels 4-connected components of a row-major mask; returns labels
/// (0 = outside) and the size of each component.
fn components(mask: &[bool], n: usize) -> (Vec<usize>, Vec<usize>) {
    let mut label = vec![0usize; mask.len()];
    let mut sizes = Vec::new();
    for start in 0..mask.len() {
        if !mask[start] || label[start] != 0 {
            continue;
        }
        sizes.push(0);
        let id = sizes.len();
        let mut stack = vec![start];
        label[start] = id;
        while let Some(k) = stack.pop() {
            sizes[id - 1] += 1;
            let (i, j) = (k % n, k / n);
            let mut visit = |ni: usize, nj: usize| {
                let q = nj * n + ni;
                if mask[q] && label[q] == 0 {
                    label[q] = id;
                    stack.push(q);
                }
            };
            if i > 0 {
                visit(i - 1, j);
            }
            if i + 1 < n {
                visit(i + 1, j);
            }
            if j > 0 {
                visit(i, j - 1);
            }
            if j + 1 < n {
                visit(i, j + 1);
            }
        }
    }
    (label, sizes)
}

/// Lattice edge between sample `(i, j)` and its right (`horizontal`) or
/// upper neighbor, on a lattice padded by one outside sample on every side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Edge {
    i: i64,
    j: i64,
    horizontal: bool,
}

/// Marching-squares loops of `inside` on an `n x n` sample lattice, as
/// closed sequences of crossed lattice edges. Saddle cells keep the two
/// inside corners apart, matching 4-connectivity.
fn marching_squares(inside: &dyn Fn(i64, i64) -> bool, n: usize) -> Vec<Vec<Edge>> {
    let n = n as i64;
    let mut neighbors: HashMap<Edge, Vec<Edge>> = HashMap::new();
    let mut link = |a: Edge, b: Edge| {
        neighbors.entry(a).or_default().push(b);
        neighbors.entry(b).or_default().push(a);
    };
    for j in -1..n {
        for i in -1..n {
            // corners: 0 = (i, j), 1 = (i+1, j), 2 = (i+1, j+1), 3 = (i, j+1)
            let c = [inside(i, j), inside(i + 1, j), inside(i + 1, j + 1), inside(i, j + 1)];
            let bottom = Edge { i, j, horizontal: true };
            let right = Edge { i: i + 1, j, horizontal: false };
            let top = Edge { i, j: j + 1, horizontal: true };
            let left = Edge { i, j, horizontal: false };
            let code = c.iter().enumerate().fold(0, |acc, (k, &b)| acc | ((b as usize) << k));
            match code {
                0 | 15 => {}
                1 | 14 => link(left, bottom),
                2 | 13 => link(bottom, right),
                4 | 11 => link(right, top),
                8 | 7 => link(top, left),
                3 | 12 => link(left, right),
                6 | 9 => link(bottom, top),
                5 => {
                    link(left, bottom);
                    link(right, top);
                }
                10 => {
                    link(bottom, right);
                    link(top, left);
                }
                _ => unreachable!(),
            }
        }
    }
    let mut keys: Vec<Edge> = neighbors.keys().copied().collect();
    keys.sort_by_key(|e| (e.j, e.i, e.horizontal));
    let mut seen: HashMap<Edge, bool> = HashMap::new();
    let mut loops = Vec::new();
    for start in keys {
        if seen.contains_key(&start) {
            continue;
        }
        let mut ring = vec![start];
        seen.insert(start, true);
        let (mut prev, mut cur) = (start, neighbors[&start][0]);
        while cur != start {
            seen.insert(cur, true);
            ring.push(cur);
            let next = neighbors[&cur].iter().copied().find(|&e| e != prev).unwrap_or(prev);
            prev = cur;
            cur = next;
        }
        loops.push(ring);
    }
    loops
}

/// Outer boundary of the largest region of a slice's membership raster,
/// refined onto the oracle boundary to within `band`. `None` for an empty
/// raster.
pub fn extract_outer_contour(
    geom: &MachineGeometry,
    grid: &MembershipGrid,
    z: f64,
    d_pu: f64,
    band: f64,
    component_limit: usize,
) -> Result<Option<Contour>> {
    let n = grid.resolution;
    let mask = grid.mask(geom, z, d_pu);
    let (label, sizes) = components(&mask, n);
    if sizes.is_empty() {
        return Ok(None);
    }
    if sizes.len() > component_limit {
        return Err(Error::Topology(format!(
            "slice z = {z} has {} disconnected regions (sizes {:?}), limit {component_limit}",
            sizes.len(),
            sizes
        )));
    }
    let biggest = 1 + (0..sizes.len()).max_by_key(|&k| (sizes[k], std::cmp::Reverse(k))).unwrap();
    let inside = |i: i64, j: i64| {
        i >= 0 && j >= 0 && (i as usize) < n && (j as usize) < n && label[j as usize * n + i as usize] == biggest
    };
    let loops = marching_squares(&inside, n);
    let center = |i: i64, j: i64| {
        let b = &grid.bounds;
        (b.x_min + b.width() * (i as f64 + 0.5) / n as f64, b.y_min + b.depth() * (j as f64 + 0.5) / n as f64)
    };
    let rings: Vec<Vec<(f64, f64)>> = loops
        .iter()
        .map(|ring| {
            ring.iter()
                .map(|e| {
                    let (a, b) = ((e.i, e.j), if e.horizontal { (e.i + 1, e.j) } else { (e.i, e.j + 1) });
                    let (pin, pout) = if inside(a.0, a.1) { (a, b) } else { (b, a) };
                    refine_crossing(geom, center(pin.0, pin.1), center(pout.0, pout.1), z, d_pu, band)
                })
                .collect()
        })
        .collect();
    let outer = rings
        .into_iter()
        .max_by(|a, b| Contour::signed_area(a).abs().total_cmp(&Contour::signed_area(b).abs()))
        .expect("a nonempty region has a boundary");
    let mut points = outer;
    if Contour::signed_area(&points) < 0.0 {
        points.reverse();
    }
    Ok(Some(Contour { z, points }))
}

/// Bisects the segment from a member point to a non-member one until it is
/// shorter than `band / 4`, returning the member end.
fn refine_crossing(
    geom: &MachineGeometry,
    mut inside: (f64, f64),
    mut outside: (f64, f64),
    z: f64,
    d_pu: f64,
    band: f64,
) -> (f64, f64) {
    for _ in 0..60 {
        if (outside.0 - inside.0).hypot(outside.1 - inside.1) < 0.25 * band {
            break;
        }
        let mid = (0.5 * (inside.0 + outside.0), 0.5 * (inside.1 + outside.1));
        if oracle_membership(geom, mid.0, mid.1, z, d_pu) {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    inside
}

/// Rotates a ring so it starts at the vertex whose angle about the ring's
/// centroid is closest to `target`.
fn aligned(contour: &Contour, target: f64) -> Vec<(f64, f64)> {
    let (cx, cy) = contour.centroid();
    let diff = |p: &(f64, f64)| {
        let d = (p.1 - cy).atan2(p.0 - cx) - target;
        d.sin().atan2(d.cos()).abs()
    };
    let start = (0..contour.points.len()).min_by(|&a, &b| diff(&contour.points[a]).total_cmp(&diff(&contour.points[b]))).unwrap();
    let mut pts = contour.points.clone();
    pts.rotate_left(start);
    pts
}

/// Normalized cumulative arc length at every vertex, closing back to 1.
fn arc_parameters(points: &[(f64, f64)]) -> Vec<f64> {
    let n = points.len();
    let mut s = vec![0.0; n + 1];
    for k in 0..n {
        let (a, b) = (points[k], points[(k + 1) % n]);
        s[k + 1] = s[k] + (b.0 - a.0).hypot(b.1 - a.1);
    }
    let total = s[n];
    if total > 0.0 {
        s.iter_mut().for_each(|v| *v /= total);
    } else {
        (0..=n).for_each(|k| s[k] = k as f64 / n as f64);
    }
    s
}

/// Closed mesh through contours ordered by increasing z: side bands between
/// consecutive rings, fan caps on the first and last. Vertex count is the
/// sum of ring sizes plus the two cap centers.
// negated comparisons also reject NaN
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn stitch_contours(contours: &[Contour]) -> Result<MeshSurface> {
    if contours.len() < 2 {
        return Err(Error::Precondition(format!("need >= 2 contours, got {}", contours.len())));
    }
    if let Some(c) = contours.iter().find(|c| c.points.len() < 3) {
        return Err(Error::Precondition(format!("contour at z = {} has fewer than 3 points", c.z)));
    }
    if contours.windows(2).any(|w| !(w[0].z < w[1].z)) {
        return Err(Error::Precondition("contours must be strictly increasing in z".to_string()));
    }
    let mut rings: Vec<Vec<(f64, f64)>> = Vec::with_capacity(contours.len());
    let target = {
        let c = &contours[0];
        let (cx, cy) = c.centroid();
        (c.points[0].1 - cy).atan2(c.points[0].0 - cx)
    };
    for c in contours {
        let mut pts = c.points.clone();
        if Contour::signed_area(&pts) < 0.0 {
            pts.reverse();
        }
        rings.push(aligned(&Contour { z: c.z, points: pts }, target));
    }

    let mut vertices = Vec::new();
    let mut offsets = Vec::new();
    for (c, ring) in contours.iter().zip(&rings) {
        offsets.push(vertices.len());
        vertices.extend(ring.iter().map(|&(x, y)| [x, y, c.z]));
    }
    let mut triangles = Vec::new();
    let mut push = |vertices: &Vec<[f64; 3]>, t: [usize; 3]| {
        if triangle_area(&vertices[t[0]], &vertices[t[1]], &vertices[t[2]]) >= MIN_TRIANGLE_AREA {
            triangles.push(t);
        }
    };
    for k in 0..rings.len() - 1 {
        let (a, b) = (&rings[k], &rings[k + 1]);
        let (oa, ob) = (offsets[k], offsets[k + 1]);
        let (n, m) = (a.len(), b.len());
        let (u, v) = (arc_parameters(a), arc_parameters(b));
        let (mut i, mut j) = (0, 0);
        while i < n || j < m {
            let ai = oa + i % n;
            let bj = ob + j % m;
            if j == m || (i < n && u[i + 1] <= v[j + 1]) {
                push(&vertices, [ai, oa + (i + 1) % n, bj]);
                i += 1;
            } else {
                push(&vertices, [ai, ob + (j + 1) % m, bj]);
                j += 1;
            }
        }
    }
    for (idx, top) in [(0usize, false), (rings.len() - 1, true)] {
        let c = &contours[idx];
        let (cx, cy) = Contour { z: c.z, points: rings[idx].clone() }.centroid();
        let center = vertices.len();
        vertices.push([cx, cy, c.z]);
        let (o, n) = (offsets[idx], rings[idx].len());
        for k in 0..n {
            let (p, q) = (o + k, o + (k + 1) % n);
            push(&vertices, if top { [center, p, q] } else { [center, q, p] });
        }
    }
    Ok(MeshSurface { vertices, triangles })
}

/// Boundary mesh of a sweep: one refined outer contour per nonempty slice,
/// stitched in z order. The nonempty slices must form one contiguous run.
pub fn build_boundary_mesh(geom: &MachineGeometry, set: &SliceSet, params: &MeshParams) -> Result<MeshSurface> {
    let grid = MembershipGrid::new(geom, set.bounds, params.resolution);
    let band = set.params.boundary_band;
    let mut contours: Vec<(usize, Contour)> = Vec::new();
    for (k, slice) in set.slices.iter().enumerate() {
        if slice.classification == Classification::Empty {
            continue;
        }
        if let Some(c) = extract_outer_contour(geom, &grid, slice.z, set.params.d_pu, band, params.component_limit)? {
            if c.points.len() >= 3 {
                contours.push((k, c));
            }
        }
    }
    if contours.len() < 2 {
        return Err(Error::Precondition(format!("need >= 2 nonempty slices, got {}", contours.len())));
    }
    if contours.windows(2).any(|w| w[1].0 != w[0].0 + 1) {
        return Err(Error::Topology("nonempty slices are not contiguous in z".to_string()));
    }
    let contours: Vec<Contour> = contours.into_iter().map(|(_, c)| c).collect();
    stitch_contours(&contours)
}
