//! Convex hulls in the plane and in R³, and exact mean width of polytopes.
//!
//! In R³ the mean width of a polytope is `(1/4π) Σ_e |e| · ext(e)`, with
//! `ext(e)` the exterior dihedral angle at edge `e`. Lower-dimensional hulls
//! use the limiting angles: 2π for a segment, π for the edges of a planar
//! polygon.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::f64::consts::PI;

use crate::sphere::{angle_between, orthonormal_basis, Vec3};

/// Relative tolerance for collinearity / coplanarity decisions.
pub const HULL_TOL: f64 = 1e-10;

fn cross2(o: &[f64; 2], a: &[f64; 2], b: &[f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Indices of the convex hull of planar points, counterclockwise, without
/// collinear points. A turn is dropped when its sine is below `rel_tol`.
pub fn convex_hull_2d(points: &[[f64; 2]], rel_tol: f64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&a, &b| points[a][0].total_cmp(&points[b][0]).then(points[a][1].total_cmp(&points[b][1])));
    idx.dedup_by(|a, b| points[*a] == points[*b]);
    if idx.len() < 3 {
        return idx;
    }
    let turn_left = |o: usize, a: usize, b: usize| {
        let (po, pa, pb) = (&points[o], &points[a], &points[b]);
        let la = (pa[0] - po[0]).hypot(pa[1] - po[1]);
        let lb = (pb[0] - po[0]).hypot(pb[1] - po[1]);
        cross2(po, pa, pb) > rel_tol * la * lb
    };
    let mut lower: Vec<usize> = Vec::new();
    for &i in &idx {
        while lower.len() >= 2 && !turn_left(lower[lower.len() - 2], lower[lower.len() - 1], i) {
            lower.pop();
        }
        lower.push(i);
    }
    let mut upper: Vec<usize> = Vec::new();
    for &i in idx.iter().rev() {
        while upper.len() >= 2 && !turn_left(upper[upper.len() - 2], upper[upper.len() - 1], i) {
            upper.pop();
        }
        upper.push(i);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() == 2 && lower[0] == lower[1] {
        lower.pop();
    }
    lower
}

/// Perimeter of the planar convex hull.
pub fn hull_perimeter_2d(points: &[[f64; 2]]) -> f64 {
    let h = convex_hull_2d(points, HULL_TOL);
    match h.len() {
        0 | 1 => 0.0,
        2 => 2.0 * dist2(&points[h[0]], &points[h[1]]),
        k => (0..k).map(|i| dist2(&points[h[i]], &points[h[(i + 1) % k]])).sum(),
    }
}

fn dist2(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Mean width of a planar convex set: perimeter / π.
pub fn mean_width_2d(points: &[[f64; 2]]) -> f64 {
    hull_perimeter_2d(points) / PI
}

#[derive(Debug, Clone, Copy)]
struct Face {
    v: [usize; 3],
    normal: Vec3,
    alive: bool,
}

impl Face {
    fn new(points: &[Vec3], v: [usize; 3]) -> Face {
        let n = (points[v[1]] - points[v[0]]).cross(&(points[v[2]] - points[v[0]]));
        Face { v, normal: n.normalize(), alive: true }
    }

    /// Height of `p` above the face plane minus a tolerance proportional to
    /// the distance from the nearest face vertex; positive iff `p` sees the
    /// face. Measuring from the nearest vertex keeps the test meaningful for
    /// faces much smaller than the hull.
    fn excess(&self, points: &[Vec3], p: &Vec3) -> f64 {
        let q = self
            .v
            .iter()
            .map(|&k| p - points[k])
            .min_by(|a, b| a.norm_squared().total_cmp(&b.norm_squared()))
            .expect("three vertices");
        self.normal.dot(&q) - HULL_TOL * q.norm()
    }
}

/// Affine dimension reached by the hull so far and its support data.
#[derive(Debug, Clone)]
enum State {
    Empty,
    Point(usize),
    Segment(usize, usize),
    /// Planar polygon: origin, in-plane basis, counterclockwise vertex indices.
    Polygon {
        origin: Vec3,
        e1: Vec3,
        e2: Vec3,
        verts: Vec<usize>,
    },
    /// Polytope; `edges` maps each directed edge to the live face that owns
    /// it and `total` is `Σ |e| · ext(e)`, kept up to date on insertion.
    /// `fan` holds the faces created by the last insertion; visibility
    /// searches start there.
    Solid {
        faces: Vec<Face>,
        edges: HashMap<(usize, usize), usize>,
        total: f64,
        fan: Vec<usize>,
        dead: usize,
    },
}

/// Convex hull of a growing point set in R³.
///
/// Points are inserted one at a time; the hull degrades gracefully through
/// point, segment and planar-polygon states before becoming a polytope.
#[derive(Debug, Clone)]
pub struct IncrementalHull {
    points: Vec<Vec3>,
    state: State,
    scale: f64,
    /// Hull vertices adjacent to the last inserted point, if it became a vertex.
    last_neighbors: Option<Vec<usize>>,
}

impl Default for IncrementalHull {
    fn default() -> Self {
        Self::new()
    }
}

impl IncrementalHull {
    pub fn new() -> Self {
        IncrementalHull { points: Vec::new(), state: State::Empty, scale: 0.0, last_neighbors: None }
    }

    pub fn from_points(points: &[Vec3]) -> Self {
        let mut h = Self::new();
        for p in points {
            h.insert(*p);
        }
        h
    }

    /// Affine dimension of the hull (0..=3), or `None` when empty.
    pub fn rank(&self) -> Option<usize> {
        match self.state {
            State::Empty => None,
            State::Point(_) => Some(0),
            State::Segment(..) => Some(1),
            State::Polygon { .. } => Some(2),
            State::Solid { .. } => Some(3),
        }
    }

    fn eps(&self) -> f64 {
        HULL_TOL * self.scale
    }

    pub fn insert(&mut self, p: Vec3) {
        let i = self.points.len();
        self.points.push(p);
        if let Some(&first) = self.points.first() {
            self.scale = self.scale.max((p - first).norm());
        }
        let eps = self.eps();
        let state = std::mem::replace(&mut self.state, State::Empty);
        let (state, neighbors) = match state {
            State::Empty => (State::Point(i), Some(vec![])),
            State::Point(a) => {
                if (p - self.points[a]).norm() <= eps {
                    (State::Point(a), None)
                } else {
                    (State::Segment(a, i), Some(vec![a]))
                }
            }
            State::Segment(a, b) => {
                let (pa, pb) = (self.points[a], self.points[b]);
                let d = (pb - pa).normalize();
                let off = (p - pa) - d * d.dot(&(p - pa));
                if off.norm() <= eps {
                    let t = d.dot(&(p - pa));
                    if t < 0.0 {
                        (State::Segment(i, b), Some(vec![b]))
                    } else if t > (pb - pa).norm() {
                        (State::Segment(a, i), Some(vec![a]))
                    } else {
                        (State::Segment(a, b), None)
                    }
                } else {
                    let n = d.cross(&off).normalize();
                    let (e1, e2) = (d, n.cross(&d));
                    let st = self.planar(pa, e1, e2, vec![a, b, i]);
                    let nb = polygon_neighbors(&st, i);
                    (st, nb)
                }
            }
            State::Polygon { origin, e1, e2, mut verts } => {
                let n = e1.cross(&e2);
                let h = n.dot(&(p - origin));
                if h.abs() <= eps {
                    verts.push(i);
                    let st = self.planar(origin, e1, e2, verts);
                    let nb = polygon_neighbors(&st, i);
                    (st, nb)
                } else {
                    let nb = verts.clone();
                    (self.lift(&verts, i, h > 0.0), Some(nb))
                }
            }
            State::Solid { mut faces, mut edges, mut total, mut fan, mut dead } => {
                let nb = self.add_to_solid(&mut faces, &mut edges, &mut total, &mut fan, &mut dead, i);
                (State::Solid { faces, edges, total, fan, dead }, nb)
            }
        };
        self.state = state;
        self.last_neighbors = neighbors;
    }

    /// Hull vertices joined by an edge to the most recently inserted point,
    /// or `None` when that point did not become a hull vertex.
    pub fn last_neighbors(&self) -> Option<&[usize]> {
        self.last_neighbors.as_deref()
    }

    fn planar(&self, origin: Vec3, e1: Vec3, e2: Vec3, cand: Vec<usize>) -> State {
        let coords: Vec<[f64; 2]> = cand
            .iter()
            .map(|&k| {
                let q = self.points[k] - origin;
                [q.dot(&e1), q.dot(&e2)]
            })
            .collect();
        let h = convex_hull_2d(&coords, HULL_TOL);
        let verts: Vec<usize> = h.iter().map(|&j| cand[j]).collect();
        if verts.len() == 2 {
            State::Segment(verts[0], verts[1])
        } else {
            State::Polygon { origin, e1, e2, verts }
        }
    }

    /// Pyramid over the planar polygon with apex `apex`.
    fn lift(&self, verts: &[usize], apex: usize, above: bool) -> State {
        let k = verts.len();
        let mut faces = Vec::with_capacity(k + k);
        // Base faces oriented away from the apex.
        for j in 1..k - 1 {
            let tri = if above { [verts[0], verts[j + 1], verts[j]] } else { [verts[0], verts[j], verts[j + 1]] };
            faces.push(Face::new(&self.points, tri));
        }
        for j in 0..k {
            let (a, b) = (verts[j], verts[(j + 1) % k]);
            let tri = if above { [a, b, apex] } else { [b, a, apex] };
            faces.push(Face::new(&self.points, tri));
        }
        let edges = edge_map(&faces);
        let undirected: BTreeSet<(usize, usize)> = edges.keys().filter(|(a, b)| a < b).copied().collect();
        let total = undirected.iter().map(|&(a, b)| self.edge_term(&faces, &edges, a, b)).sum();
        let fan = (k.saturating_sub(2)..faces.len()).collect();
        State::Solid { faces, edges, total, fan, dead: 0 }
    }

    /// `|e| · ext(e)` for the undirected edge `{a, b}`.
    fn edge_term(&self, faces: &[Face], edges: &HashMap<(usize, usize), usize>, a: usize, b: usize) -> f64 {
        match (edges.get(&(a, b)), edges.get(&(b, a))) {
            (Some(&f), Some(&g)) => {
                (self.points[a] - self.points[b]).norm() * angle_between(&faces[f].normal, &faces[g].normal)
            }
            _ => 0.0,
        }
    }

    /// A live face visible from `p`: the best face of `fan`, improved by a
    /// greedy walk towards larger excess, then a full scan if the walk stalls.
    fn find_visible(
        &self,
        faces: &[Face],
        edges: &HashMap<(usize, usize), usize>,
        fan: &[usize],
        p: &Vec3,
    ) -> Option<usize> {
        let pts = &self.points;
        let start = fan
            .iter()
            .filter(|&&f| faces.get(f).is_some_and(|f| f.alive))
            .map(|&f| (f, faces[f].excess(pts, p)))
            .max_by(|a, b| a.1.total_cmp(&b.1));
        if let Some((mut f, mut e)) = start {
            for _ in 0..256 {
                if e > 0.0 {
                    return Some(f);
                }
                let v = faces[f].v;
                let next = [(v[1], v[0]), (v[2], v[1]), (v[0], v[2])]
                    .iter()
                    .filter_map(|k| edges.get(k).copied())
                    .map(|g| (g, faces[g].excess(pts, p)))
                    .max_by(|a, b| a.1.total_cmp(&b.1));
                match next {
                    Some((g, eg)) if eg > e => {
                        f = g;
                        e = eg;
                    }
                    _ => break,
                }
            }
        }
        faces
            .iter()
            .enumerate()
            .filter(|(_, f)| f.alive)
            .map(|(k, f)| (k, f.excess(pts, p)))
            .filter(|(_, e)| *e > 0.0)
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(k, _)| k)
    }

    fn add_to_solid(
        &self,
        faces: &mut Vec<Face>,
        edges: &mut HashMap<(usize, usize), usize>,
        total: &mut f64,
        fan: &mut Vec<usize>,
        dead: &mut usize,
        i: usize,
    ) -> Option<Vec<usize>> {
        let p = self.points[i];
        let seed = self.find_visible(faces, edges, fan, &p)?;
        // Connected visible region around the seed, so the horizon is a
        // single loop even when rounding makes visibility patchy.
        let mut visible: Vec<usize> = vec![seed];
        let mut seen: HashSet<usize> = HashSet::from([seed]);
        let mut k = 0;
        while k < visible.len() {
            let v = faces[visible[k]].v;
            k += 1;
            for e in [(v[1], v[0]), (v[2], v[1]), (v[0], v[2])] {
                if let Some(&g) = edges.get(&e) {
                    if seen.insert(g) && faces[g].excess(&self.points, &p) > 0.0 {
                        visible.push(g);
                    }
                }
            }
        }
        let region: HashSet<usize> = visible.iter().copied().collect();
        let mut directed: Vec<(usize, usize)> = Vec::with_capacity(3 * visible.len());
        for &k in &visible {
            let v = faces[k].v;
            directed.extend([(v[0], v[1]), (v[1], v[2]), (v[2], v[0])]);
        }
        // Ordered sets: the running total must not depend on hash order.
        let touched: BTreeSet<(usize, usize)> = directed.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
        for &(a, b) in &touched {
            *total -= self.edge_term(faces, edges, a, b);
        }
        let mut horizon: Vec<(usize, usize)> = directed
            .iter()
            .filter(|(a, b)| edges.get(&(*b, *a)).is_none_or(|g| !region.contains(g)))
            .copied()
            .collect();
        horizon.sort_unstable();
        for e in &directed {
            edges.remove(e);
        }
        for &k in &visible {
            faces[k].alive = false;
        }
        *dead += visible.len();
        let mut fresh: BTreeSet<(usize, usize)> = BTreeSet::new();
        let first_new = faces.len();
        for &(a, b) in &horizon {
            let k = faces.len();
            faces.push(Face::new(&self.points, [a, b, i]));
            for e in [(a, b), (b, i), (i, a)] {
                edges.insert(e, k);
                fresh.insert((e.0.min(e.1), e.0.max(e.1)));
            }
        }
        for &(a, b) in &fresh {
            *total += self.edge_term(faces, edges, a, b);
        }
        if faces.len() > 64 && *dead * 2 > faces.len() {
            faces.retain(|f| f.alive);
            *dead = 0;
            *edges = edge_map(faces);
            *fan = (0..faces.len()).filter(|&k| faces[k].v.contains(&i)).collect();
        } else {
            *fan = (first_new..faces.len()).collect();
        }
        let mut nb: Vec<usize> = horizon.iter().map(|e| e.0).collect();
        nb.sort_unstable();
        nb.dedup();
        Some(nb)
    }

    /// Indices of points that are hull vertices.
    pub fn vertex_indices(&self) -> Vec<usize> {
        match &self.state {
            State::Empty => vec![],
            State::Point(a) => vec![*a],
            State::Segment(a, b) => vec![*a, *b],
            State::Polygon { verts, .. } => verts.clone(),
            State::Solid { faces, .. } => {
                let mut v: Vec<usize> = faces.iter().filter(|f| f.alive).flat_map(|f| f.v).collect();
                v.sort_unstable();
                v.dedup();
                v
            }
        }
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    /// Whether `p` lies strictly outside the hull (by more than the hull tolerance).
    pub fn is_outside(&self, p: &Vec3) -> bool {
        let eps = self.eps().max(1e-14);
        match &self.state {
            State::Solid { faces, .. } => faces.iter().any(|f| f.alive && f.excess(&self.points, p) > 0.0),
            _ => {
                let mut h = self.clone();
                let before = h.mean_width();
                h.insert(*p);
                h.rank() > self.rank() || h.mean_width() > before + eps
            }
        }
    }

    /// Exact mean width of the current hull.
    pub fn mean_width(&self) -> f64 {
        match &self.state {
            State::Empty | State::Point(_) => 0.0,
            State::Segment(a, b) => 0.5 * (self.points[*a] - self.points[*b]).norm(),
            State::Polygon { verts, .. } => {
                let k = verts.len();
                let per: f64 = (0..k).map(|j| (self.points[verts[j]] - self.points[verts[(j + 1) % k]]).norm()).sum();
                per / 4.0
            }
            State::Solid { total, .. } => total / (4.0 * PI),
        }
    }
}

fn edge_map(faces: &[Face]) -> HashMap<(usize, usize), usize> {
    let mut m = HashMap::with_capacity(faces.len() * 3);
    for (k, f) in faces.iter().enumerate().filter(|(_, f)| f.alive) {
        for e in [(f.v[0], f.v[1]), (f.v[1], f.v[2]), (f.v[2], f.v[0])] {
            m.insert(e, k);
        }
    }
    m
}

/// Polygon neighbours of vertex `i`, if it is one.
fn polygon_neighbors(state: &State, i: usize) -> Option<Vec<usize>> {
    match state {
        State::Segment(a, b) if *a == i => Some(vec![*b]),
        State::Segment(a, b) if *b == i => Some(vec![*a]),
        State::Polygon { verts, .. } => {
            let k = verts.len();
            verts.iter().position(|&v| v == i).map(|j| vec![verts[(j + k - 1) % k], verts[(j + 1) % k]])
        }
        _ => None,
    }
}

/// Mean width of the convex hull of `points` in R³.
pub fn mean_width_polytope(points: &[Vec3]) -> f64 {
    IncrementalHull::from_points(points).mean_width()
}

/// Support function `h_K(θ) = max_y ⟨θ, y⟩` of the point set's hull.
pub fn support(points: &[Vec3], theta: &Vec3) -> f64 {
    points.iter().map(|p| p.dot(theta)).fold(f64::NEG_INFINITY, f64::max)
}

/// Planar coordinates of points in the plane orthogonal to `n`.
pub fn project_to_plane(points: &[Vec3], n: &Vec3) -> Vec<[f64; 2]> {
    let (e1, e2) = orthonormal_basis(n);
    points.iter().map(|p| [p.dot(&e1), p.dot(&e2)]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube() -> Vec<Vec3> {
        let mut v = Vec::new();
        for i in 0..8 {
            v.push(Vec3::new((i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64));
        }
        v
    }

    #[test]
    fn hull_2d_square_with_interior() {
        let pts = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5], [0.5, 0.0]];
        let h = convex_hull_2d(&pts, HULL_TOL);
        assert_eq!(h.len(), 4);
        assert!((hull_perimeter_2d(&pts) - 4.0).abs() < 1e-15);
    }

    #[test]
    fn cube_mean_width() {
        assert!((mean_width_polytope(&cube()) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn segment_and_square_mean_width() {
        let seg = [Vec3::zeros(), Vec3::new(0.0, 0.0, 3.0), Vec3::new(0.0, 0.0, 1.0)];
        assert!((mean_width_polytope(&seg) - 1.5).abs() < 1e-15);
        let sq = [Vec3::zeros(), Vec3::x(), Vec3::new(1.0, 1.0, 0.0), Vec3::y()];
        assert!((mean_width_polytope(&sq) - 1.0).abs() < 1e-15);
        assert_eq!(mean_width_polytope(&[Vec3::x()]), 0.0);
    }

    #[test]
    fn regular_tetrahedron_mean_width() {
        // Edge a: w = (6 a (π − arccos(1/3))) / (4π).
        let t = [
            Vec3::new(1.0, 1.0, 1.0),
            Vec3::new(1.0, -1.0, -1.0),
            Vec3::new(-1.0, 1.0, -1.0),
            Vec3::new(-1.0, -1.0, 1.0),
        ];
        let a = 8f64.sqrt();
        let expect = 6.0 * a * (PI - (1.0f64 / 3.0).acos()) / (4.0 * PI);
        assert!((mean_width_polytope(&t) - expect).abs() < 1e-12);
    }

    #[test]
    fn incremental_is_monotone_and_keeps_vertices() {
        let mut h = IncrementalHull::new();
        let mut last = 0.0;
        for p in cube().into_iter().chain([Vec3::new(0.5, 0.5, 0.5)]) {
            h.insert(p);
            let w = h.mean_width();
            assert!(w >= last - 1e-12);
            last = w;
        }
        assert_eq!(h.vertex_indices().len(), 8);
        assert!(!h.is_outside(&Vec3::new(0.5, 0.5, 0.5)));
        assert!(h.is_outside(&Vec3::new(2.0, 0.5, 0.5)));
    }

    #[test]
    fn running_width_matches_fresh_hull() {
        use rand::{seq::SliceRandom, Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<Vec3> =
            (0..300).map(|_| Vec3::new(rng.random(), rng.random::<f64>() * 2.0, rng.random::<f64>() - 0.5)).collect();
        let mut h = IncrementalHull::new();
        for p in &pts {
            h.insert(*p);
        }
        let mut shuffled = pts.clone();
        shuffled.shuffle(&mut rng);
        let fresh = IncrementalHull::from_points(&shuffled).mean_width();
        assert!((h.mean_width() - fresh).abs() < 1e-12, "{} {}", h.mean_width(), fresh);
    }

    #[test]
    fn neighbours_span_the_tangent_cone() {
        let mut pts = cube();
        pts.push(Vec3::new(1.5, 1.5, 1.5));
        let h = IncrementalHull::from_points(&pts);
        let nb: Vec<Vec3> = h.last_neighbors().unwrap().iter().map(|&k| pts[k]).collect();
        let q = pts[8];
        let a = crate::cone::tangent_cone(&nb, &q).unwrap();
        let b = crate::cone::tangent_cone(&pts, &q).unwrap();
        assert!(crate::cone::cones_equal(&a, &b, 1e-9));
        let mut h2 = h.clone();
        h2.insert(Vec3::new(0.5, 0.5, 0.5));
        assert!(h2.last_neighbors().is_none());
    }
}
